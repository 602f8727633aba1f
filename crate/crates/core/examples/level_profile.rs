//! Per-level variance of `f(Υ⁽ᵏ⁾) − f(Υ⁽ᵏ⁻¹⁾)` next to its theoretical
//! envelope.

use levy_mlmc::levy_model::{JumpMeasure, LevyModel, TruncatedStable};
use levy_mlmc::mlmc::{level_profile, LevelSchedule, Problem};
use levy_mlmc::payoffs::Payoff;
use levy_mlmc::scheme::CoefficientField;
use nalgebra::{DMatrix, DVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = LevyModel::new(
        DMatrix::zeros(1, 1),
        DVector::from_element(1, 0.3),
        JumpMeasure::TruncatedStable(TruncatedStable::new(1.5, 1.0, 1).with_radius(2.0)),
        None,
    )?;
    let coeff = CoefficientField::constant(DMatrix::from_element(1, 1, 2.0))?;
    let payoff = Payoff::terminal(vec![1.0]);
    let problem = Problem::new(&model, &coeff, &[1.0], &payoff);
    let schedule = LevelSchedule::dyadic(&model, vec![1; 8], true)?;
    println!("{:>2} {:>10} {:>10} {:>10} {:>12}", "k", "h", "var", "envelope", "breakpoints");
    for l in level_profile(&problem, &schedule, 3, 5000, None)? {
        println!("{:>2} {:>10.5} {:>10.5} {:>10.5} {:>12.2}", l.k, l.h, l.var, l.envelope, l.breakpoints);
    }
    Ok(())
}
