//! Structural checks a finished bundle must pass, whatever the model.

use super::analysis::ReportBundle;
use crate::label::Task;

/// Problems found in `bundle`; empty when it is complete and consistent.
pub fn check_bundle(bundle: &ReportBundle, task: Task) -> Vec<String> {
    let mut issues = Vec::new();
    let mut need = |name: &str, empty: bool| {
        if empty {
            issues.push(format!("table `{name}` is empty"));
        }
    };
    need("scores", bundle.scores.is_empty());
    need("deltas", bundle.deltas.is_empty());
    need("agreement", bundle.agreement.is_empty());
    need("stuart_maxwell_summary", bundle.stuart_maxwell_summary.is_empty());
    need("label_distribution", bundle.label_distribution.is_empty());
    need("disagreement", bundle.disagreement.is_empty());
    need("linguistics", bundle.linguistics.is_empty());
    need("parse_failures", bundle.parse_failures.is_empty());
    if task != Task::Cose {
        need("overflag", bundle.overflag.is_empty());
    }

    for r in &bundle.scores {
        let s = &r.score;
        let (lo, hi) = match s.metric.as_str() {
            "mae" => (0.0, 200.0),
            "me" => (-200.0, 200.0),
            _ => (0.0, 100.0),
        };
        if s.per_run.iter().any(|v| !(lo..=hi).contains(v)) || s.std.is_nan() || s.std < 0.0 {
            issues.push(format!("score {}/{}/{} out of range", r.persona_id, r.subgroup, s.metric));
        }
    }
    for pair in bundle.scores.iter().filter(|r| r.score.metric == "mae") {
        let me = bundle.scores.iter().find(|m| {
            m.score.metric == "me" && m.persona_id == pair.persona_id && m.gold_group == pair.gold_group && m.subgroup == pair.subgroup
        });
        if let Some(me) = me {
            if pair.score.per_run.iter().zip(&me.score.per_run).any(|(a, b)| *a + 1e-9 < b.abs()) {
                issues.push(format!("MAE below |ME| for {}", pair.persona_id));
            }
        }
    }
    for d in &bundle.deltas {
        if d.low.is_nan() || d.high.is_nan() || d.low > d.high || d.significant != (d.low > 0.0 || d.high < 0.0) {
            issues.push(format!("inconsistent CI for {}/{}", d.persona_id, d.metric));
        }
    }
    for a in &bundle.agreement {
        if a.agreement.per_run.iter().flatten().any(|v| v.is_nan() || *v > 1.0 + 1e-12) {
            issues.push(format!("alpha above 1 in {}/{}", a.scope, a.agreement.group));
        }
    }
    for r in &bundle.overflag {
        if !(0.0..=1.0).contains(&r.rate) {
            issues.push(format!("over-flag rate out of range for {}", r.persona_id));
        }
    }
    for r in &bundle.stuart_maxwell {
        let t = &r.pair.test;
        if !(0.0..=1.0).contains(&t.p_value) || t.statistic.is_nan() || t.statistic < 0.0 {
            issues.push(format!("bad Stuart-Maxwell result {} vs {}", r.pair.persona_a, r.pair.persona_b));
        }
    }
    issues
}
