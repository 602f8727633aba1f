//! Closed-form quantities of a truncated stable measure and the model checks.

use levy_mlmc::levy_model::{JumpMeasure, LevyModel, TruncatedStable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = LevyModel::pure_jump(JumpMeasure::TruncatedStable(TruncatedStable::new(1.5, 1.0, 1)), 1)?;
    let g = model.dominating_bound()?;
    println!("g(h) = {:.6} h^-{}", g.coef, g.exponent);
    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "h", "tail_mass", "F(h)", "ḡ(h)", "g(h)");
    for h in [1.0, 0.5, 0.1, 0.01, 0.001] {
        println!(
            "{h:>8} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            model.tail_mass(h),
            model.f_small(h),
            model.g_integral(h),
            model.g_bound(h)?
        );
    }
    println!("g⁻¹(2^10) = {:.6}", model.g_inverse(1024.0)?);

    let grid: Vec<f64> = (1..=20).map(|i| i as f64 / 20.0).collect();
    let doubling = model.validate_doubling(1.2, &grid)?;
    println!("doubling at γ = 1.2: {} (largest admissible γ {:.6})", doubling.holds, doubling.threshold);
    println!("Blumenthal–Getoor index: {:?}", model.bg_index());
    println!("UE: {:?}", model.check_ue(&grid, 32, 2.0)?);

    let skewed = LevyModel::pure_jump(JumpMeasure::TruncatedStable(TruncatedStable::one_sided(1.5, 1.0, 0.0)), 1)?;
    println!("one-sided F₀(0.5) = {:.6}", skewed.f_zero(0.5)[0]);
    Ok(())
}
