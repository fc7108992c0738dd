//! Bootstrap a persona-vs-baseline difference and test paired label
//! distributions with Stuart-Maxwell under a Bonferroni family.

use std::collections::BTreeMap;

use persona_audit::stats::{bonferroni_threshold, bootstrap_delta, chi_square_sf, stuart_maxwell, BootstrapConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let baseline: BTreeMap<String, f64> = (0..40).map(|i| (format!("post-{i:02}"), if i % 4 == 0 { 100.0 } else { 0.0 })).collect();
    let persona: BTreeMap<String, f64> = baseline
        .iter()
        .enumerate()
        .map(|(i, (k, v))| (k.clone(), if i % 3 == 0 { v + 100.0 } else { *v }))
        .collect();
    let cfg = BootstrapConfig { seed: 1, ..Default::default() };
    let d = bootstrap_delta("religion_atheist", "mae", &persona, &baseline, &cfg)?;
    println!("delta {:.2} [{:.2}, {:.2}] significant={}", d.delta, d.low, d.high, d.significant);

    let a = [0, 0, 1, 2, 1, 0, 2, 2, 1, 0, 0, 1];
    let b = [1, 0, 2, 2, 2, 1, 2, 2, 1, 1, 0, 2];
    let sm = stuart_maxwell(&a, &b, 3)?;
    println!("Stuart-Maxwell chi2={:.3} dof={} p={:.4}", sm.statistic, sm.dof, sm.p_value);
    for family in [1, 3, 10] {
        println!("  family {family:>2}: alpha {:.4} -> significant={}", bonferroni_threshold(family), sm.p_value < bonferroni_threshold(family));
    }
    println!("chi2 sf(3.841, 1) = {:.4}", chi_square_sf(3.841, 1)?);
    Ok(())
}
