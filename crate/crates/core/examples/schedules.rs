//! Level schedules from a cost budget τ, in both regimes of the rate theorem.

use levy_mlmc::levy_model::{JumpMeasure, LevyModel, TruncatedStable};
use levy_mlmc::mlmc::{suggested_case, GStarSolver, LevelSchedule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for alpha in [0.8, 1.5] {
        let model = LevyModel::pure_jump(JumpMeasure::TruncatedStable(TruncatedStable::new(alpha, 1.0, 1)), 1)?;
        let case = suggested_case(&model)?;
        println!("α = {alpha}: suggested case {case}");
        for tau in [1e4, 1e6] {
            let s = if case == 1 {
                LevelSchedule::case1(&model, tau, 1.0, 1.0)?
            } else {
                LevelSchedule::case2(&model, tau, 1.0, 1.0)?
            };
            println!("  τ = {tau:e}: m = {}, n = {:?}, cost = {:.0} (bound {:.0})", s.m(), s.n(), s.cost(), s.cost_bound());
        }
        let gstar = GStarSolver::new(model.dominating_bound()?).solve(1e6)?;
        println!("  g*(10^6) = {gstar:.6}");
    }
    let model = LevyModel::pure_jump(JumpMeasure::TruncatedStable(TruncatedStable::new(1.5, 1.0, 1)), 1)?;
    match LevelSchedule::case1(&model, 3.0, 1.0, 1.0) {
        Err(e) => println!("τ = 3: {e}"),
        Ok(s) => println!("τ = 3: m = {}", s.m()),
    }
    Ok(())
}
