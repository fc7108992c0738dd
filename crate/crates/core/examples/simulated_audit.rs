//! Full offline audit with the simulated annotator: one persona is pushed
//! toward harsher labels and the report should flag it.
//!
//!     cargo run --example simulated_audit -- /tmp/audit-out

use persona_audit::personas::PersonaSelection;
use persona_audit::provider::Bias;
use persona_audit::report::{emit, run_audit, AuditConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = AuditConfig::synthetic(50, 11);
    cfg.personas = PersonaSelection::Ids(
        ["gender_male", "gender_female", "political_view_left_wing", "political_view_right_wing"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    cfg.simulation.fidelity = 0.8;
    cfg.simulation.false_mark_rate = 0.05;
    cfg.simulation.bias.insert("political_view_right_wing".into(), Bias { probability: 0.3, drift: 1 });

    let out = run_audit(&cfg)?;
    let b = &out.bundle;
    println!("{:<26} {:>8} {:>8} {:>9}", "persona", "MAE", "ME", "token-F1");
    for p in &out.manifest.personas {
        let get = |m: &str| b.score(p, "majority", "all", m).map_or(f64::NAN, |r| r.score.mean);
        println!("{p:<26} {:>8.1} {:>8.1} {:>9.1}", get("mae"), get("me"), get("token_f1"));
    }
    println!();
    for d in b.deltas.iter().filter(|d| d.metric == "mae") {
        println!("{:<26} dMAE {:>6.1} [{:>6.1}, {:>6.1}] {}", d.persona_id, d.delta, d.low, d.high, if d.significant { "*" } else { "" });
    }
    for a in b.agreement.iter().filter(|a| a.scope == "label") {
        println!("alpha[{}] = {:.3}", a.agreement.group, a.agreement.mean.unwrap_or(f64::NAN));
    }

    if let Some(dir) = std::env::args().nth(1) {
        let files = emit(b, &out.manifest, dir.as_ref())?;
        println!("wrote {} files to {dir}", files.len());
    }
    Ok(())
}
