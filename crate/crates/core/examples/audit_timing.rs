//! Times one audit over the acceptance grid.
//!
//! `cargo run --release -p tfm-core --example audit_timing -- '<mechanism json>' <uic|mic|scp> <c> <gamma>`

use std::time::Instant;

use tfm_core::{audit, AuditConfig, Mechanism, Property, ScenarioSpace};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mech: Mechanism = serde_json::from_str(&args[1]).expect("mechanism json");
    let property: Property = args[2].parse().expect("property");
    let c: usize = args[3].parse().expect("c");
    let gamma = args[4].parse().expect("gamma");
    let vectors = ScenarioSpace::acceptance().vectors().expect("grid");
    let cfg = AuditConfig::with_gamma(gamma);
    let start = Instant::now();
    let report = audit(&mech, property, c, &vectors, &cfg).expect("audit");
    let secs = start.elapsed().as_secs_f64();
    println!(
        "{} {} c={} gamma={}: {:?} items={} deviations={} in {:.1}s ({:.1} ns/deviation)",
        mech.label(),
        property,
        c,
        gamma,
        report.verdict,
        report.scenarios_checked,
        report.deviations_checked,
        secs,
        secs * 1e9 / report.deviations_checked.max(1) as f64
    );
}
