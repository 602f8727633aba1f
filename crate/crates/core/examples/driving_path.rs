//! Shared randomness of a coupled level pair: jumps, nested grids and the
//! raw Gaussian increments, dumped as JSON.

use levy_mlmc::driving_path::{build_grid, realize_pair, Role};
use levy_mlmc::levy_model::{JumpMeasure, LevyModel, TruncatedStable};
use levy_mlmc::stream::RngStream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("grid for a jump at 0.5, ε = 0.4: {:?}", build_grid(&[0.5], 0.4).points());

    let model = LevyModel::pure_jump(JumpMeasure::TruncatedStable(TruncatedStable::new(1.5, 1.0, 1)), 1)?;
    let stream = RngStream::new(7).split(3);
    let r = realize_pair(&model, 0.3, 0.125, 0.6, 0.25, &stream)?;
    println!("{} jumps with |x| >= 0.3", r.jumps().len());
    println!("fine grid   {:?}", r.grid(Role::Fine).points());
    println!("coarse grid {:?}", r.grid(Role::Coarse).points());
    let (w, _) = r.aggregated_increments(Role::Coarse);
    println!("Wiener increments on the coarse grid: {w:?}");
    println!("{}", serde_json::to_string_pretty(&r.to_json())?);
    Ok(())
}
