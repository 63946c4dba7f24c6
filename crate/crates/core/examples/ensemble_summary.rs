//! Prints the class-comparison tables for one of the preset ensembles.
//!
//! `cargo run --release --example ensemble_summary -- 12 [kappa] [base_seed]`

use qbrittle::protocol::{compare_classes, run_ensemble, EnsembleConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(10), |a| a.parse())?;
    let mut config = EnsembleConfig::preset(n).ok_or("presets exist for 10, 12 and 14 qubits")?;
    if let Some(k) = args.next() {
        config.kappa = k.parse()?;
    }
    if let Some(s) = args.next() {
        config.base_seed = s.parse()?;
    }
    let report = run_ensemble(&config)?;
    print!("{}", compare_classes(&report));
    Ok(())
}
