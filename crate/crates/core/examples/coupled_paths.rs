//! One coupled pair of paths of `dY = cos(Y) dX` on consecutive levels.

use levy_mlmc::levy_model::{cov_factor, JumpMeasure, LevyModel, TruncatedStable};
use levy_mlmc::payoffs::Payoff;
use levy_mlmc::scheme::{simulate_pair, CoefficientField, LevelParams};
use levy_mlmc::stream::RngStream;
use nalgebra::{DMatrix, DVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = LevyModel::new(
        DMatrix::from_element(1, 1, 0.3),
        DVector::zeros(1),
        JumpMeasure::TruncatedStable(TruncatedStable::new(1.2, 1.0, 1)),
        None,
    )?;
    let coeff = CoefficientField::cosine(DMatrix::from_element(1, 1, 1.0))?;
    // both levels share the correction factor of the finest level
    let corr = cov_factor(&model.small_jump_cov(0.05))?;
    let fine = LevelParams::new(1.0 / 16.0, 0.1, corr.clone());
    let coarse = LevelParams::new(1.0 / 8.0, 0.2, corr);
    let (pf, pc) = simulate_pair(&model, &coeff, &[0.5], &fine, &coarse, &RngStream::new(1))?;
    println!("fine   {}", pf.to_json());
    println!("coarse {}", pc.to_json());
    let sup = Payoff::lookback(0);
    println!("sup difference {:.6}", sup.evaluate(&pf)? - sup.evaluate(&pc)?);
    Ok(())
}
