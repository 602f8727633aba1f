//! Lookback payoff of a nonlinear SDE: multilevel estimate against a fine
//! single-level reference.

use levy_mlmc::levy_model::{JumpMeasure, LevyModel, TruncatedStable};
use levy_mlmc::mlmc::{estimate, LevelSchedule, Problem};
use levy_mlmc::oracle::reference_estimate;
use levy_mlmc::payoffs::Payoff;
use levy_mlmc::scheme::CoefficientField;
use nalgebra::{DMatrix, DVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = LevyModel::new(
        DMatrix::from_element(1, 1, 0.2),
        DVector::zeros(1),
        JumpMeasure::TruncatedStable(TruncatedStable::new(1.2, 1.0, 1)),
        None,
    )?;
    let coeff = CoefficientField::cosine(DMatrix::from_element(1, 1, 1.0))?;
    let payoff = Payoff::lookback(0);
    let problem = Problem::new(&model, &coeff, &[0.5], &payoff);
    let schedule = LevelSchedule::dyadic(&model, vec![4000, 1000, 400, 150, 60, 25], true)?;
    let r = estimate(&problem, &schedule, 11, None)?;
    let m = schedule.m() - 1;
    let reference = reference_estimate(&problem, schedule.eps()[m] / 4.0, schedule.h()[m] / 2.0, 20_000, 12, None)?;
    println!("multilevel {:.4} ± {:.4}", r.estimate, r.stderr);
    println!(
        "reference  {:.4} ± {:.4} (fine enough: {})",
        reference.value,
        reference.stderr,
        reference.fine_enough_for(&schedule)
    );
    Ok(())
}
