//! Multilevel estimate for `dY = 2 dX` against the exact value `y0 + A b`.

use levy_mlmc::levy_model::{JumpMeasure, LevyModel, TruncatedStable};
use levy_mlmc::mlmc::{estimate, LevelSchedule, Problem};
use levy_mlmc::oracle::closed_form_sf;
use levy_mlmc::payoffs::Payoff;
use levy_mlmc::scheme::CoefficientField;
use nalgebra::{DMatrix, DVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = LevyModel::new(
        DMatrix::zeros(1, 1),
        DVector::from_element(1, 0.3),
        JumpMeasure::TruncatedStable(TruncatedStable::new(1.5, 1.0, 1)),
        None,
    )?;
    let coeff = CoefficientField::constant(DMatrix::from_element(1, 1, 2.0))?;
    let payoff = Payoff::terminal(vec![1.0]);
    let problem = Problem::new(&model, &coeff, &[1.0], &payoff);
    let exact = closed_form_sf(&problem)?;
    for tau in [4096.0, 65536.0, 1048576.0] {
        let schedule = LevelSchedule::case1(&model, tau, 1.0, 1.0)?;
        let r = estimate(&problem, &schedule, 1, None)?;
        println!(
            "τ = {tau:>8}: estimate {:.4} ± {:.4} (exact {exact}), cost {:.0}",
            r.estimate, r.stderr, r.cost
        );
    }
    Ok(())
}
