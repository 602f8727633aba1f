//! Loads a shipped JSON config, runs the invariant suite and a short rate
//! sweep, as the command-line tool does.

use levy_mlmc::cli::{estimate_json, rates_csv, run_estimate, run_rates, verify, Experiment};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/stable15_case1.json");
    let mut exp = Experiment::from_json(&std::fs::read_to_string(path)?)?;
    for check in verify(&exp, exp.config.seed, None) {
        println!("{check}");
    }
    print!("{}", estimate_json(&run_estimate(&exp, exp.config.seed, None)?));
    if let Some(sweep) = exp.config.sweep.as_mut() {
        sweep.tau_list.truncate(3);
        sweep.repetitions = 5;
    }
    let (rows, slope) = run_rates(&exp, exp.config.seed, None)?;
    print!("{}", rates_csv(&rows, slope));
    Ok(())
}
