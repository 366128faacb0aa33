//! Loading and validating a run configuration as the command-line front end does.

use pseudomode::config::RunConfig;

fn main() {
    let good = r#"{"operator": "complex-airy", "domain": [-4, 4], "region": {"u": [-1, 1, 5], "xi": [-1, 1, 5]}}"#;
    let cfg = RunConfig::from_json(good).expect("valid config");
    println!("orders {:?}, h sweep {:?}", cfg.orders(), cfg.h_sweep);
    let typo = r#"{"operator": "complex-airy", "domian": [-4, 4]}"#;
    let err = RunConfig::from_json(typo).unwrap_err();
    println!("rejected with exit code {}: {err}", err.exit_code());
}
