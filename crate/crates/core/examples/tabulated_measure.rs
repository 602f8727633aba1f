//! A two-dimensional isotropic measure given as a radial density table.

use levy_mlmc::levy_model::{JumpMeasure, LevyModel, RadialTable};
use levy_mlmc::mlmc::{estimate, suggested_case, LevelSchedule, Problem};
use levy_mlmc::oracle::measure_quadrature;
use levy_mlmc::payoffs::Payoff;
use levy_mlmc::scheme::CoefficientField;
use nalgebra::{DMatrix, DVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = RadialTable::from_stable(1.3, 1.0, 2, 1e-3, 1.0, 40)?;
    let model = LevyModel::new(DMatrix::zeros(2, 2), DVector::from_vec(vec![0.1, 0.0]), JumpMeasure::TabulatedRadial(table), None)?;
    let g = model.dominating_bound()?;
    println!("fitted index {:?}, g(h) = {:.4} h^-{:.4}", model.bg_index(), g.coef, g.exponent);
    let q = measure_quadrature(&model, 0.1, 1e-10)?;
    println!("tail mass at 0.1: table {:.8}, quadrature {:.8}", model.tail_mass(0.1), q.tail_mass);
    println!("small-jump covariance at 0.1:{}", model.small_jump_cov(0.1));

    let coeff = CoefficientField::constant(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]))?;
    let payoff = Payoff::terminal(vec![1.0, -1.0]);
    let problem = Problem::new(&model, &coeff, &[0.0, 0.0], &payoff);
    let schedule = LevelSchedule::case1(&model, 8192.0, 1.0, 1.0)?;
    let r = estimate(&problem, &schedule, 13, None)?;
    println!("suggested case {}, estimate {:.4} ± {:.4} (exact 0.1)", suggested_case(&model)?, r.estimate, r.stderr);
    Ok(())
}
