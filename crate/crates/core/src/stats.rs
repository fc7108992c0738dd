//! Paired bootstrap deltas, Stuart–Maxwell marginal homogeneity and
//! within-group disagreement.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parsing::AnnotationRecord;

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub iterations: usize,
    pub confidence: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            iterations: 1000,
            confidence: 0.95,
            seed: 0,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("bootstrap iterations must be at least 1".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::Config(format!("bootstrap confidence {} not in (0, 1)", self.confidence)));
        }
        Ok(())
    }
}

/// Draws `iterations` resamples of `0..n` with replacement and evaluates
/// `stat` on each. Iteration `i` uses its own ChaCha stream, so the result
/// does not depend on evaluation order.
pub fn bootstrap_paired<F>(n: usize, cfg: &BootstrapConfig, stat: F) -> Result<Vec<f64>>
where
    F: Fn(&[usize]) -> f64,
{
    cfg.validate()?;
    if n == 0 {
        return Err(Error::InvalidInput("bootstrap over an empty sample".into()));
    }
    let mut idx = vec![0usize; n];
    Ok((0..cfg.iterations)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            for slot in idx.iter_mut() {
                *slot = rng.gen_range(0..n);
            }
            stat(&idx)
        })
        .collect())
}

/// Linear-interpolated percentile (`q` in [0, 1]) of unsorted values.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Percentile interval at `confidence` over bootstrap replicates.
pub fn percentile_ci(replicates: &[f64], confidence: f64) -> (f64, f64) {
    let tail = (1.0 - confidence) / 2.0;
    (percentile(replicates, tail), percentile(replicates, 1.0 - tail))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedDelta {
    pub persona_id: String,
    pub metric: String,
    pub delta: f64,
    pub low: f64,
    pub high: f64,
    pub significant: bool,
}

impl PairedDelta {
    pub fn new(persona_id: impl Into<String>, metric: impl Into<String>, delta: f64, (low, high): (f64, f64)) -> Self {
        PairedDelta {
            persona_id: persona_id.into(),
            metric: metric.into(),
            delta,
            low,
            high,
            significant: low > 0.0 || high < 0.0,
        }
    }
}

fn mean_at(values: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| values[i]).sum::<f64>() / idx.len() as f64
}

/// Bootstrap CI of mean(persona) − mean(baseline) over per-instance scores
/// keyed by instance id. Both maps must cover the same ids.
pub fn bootstrap_delta(
    persona_id: &str,
    metric: &str,
    persona: &BTreeMap<String, f64>,
    baseline: &BTreeMap<String, f64>,
    cfg: &BootstrapConfig,
) -> Result<PairedDelta> {
    if persona.len() != baseline.len() || persona.keys().zip(baseline.keys()).any(|(a, b)| a != b) {
        let missing: Vec<&String> = persona.keys().filter(|k| !baseline.contains_key(*k)).chain(baseline.keys().filter(|k| !persona.contains_key(*k))).take(3).collect();
        return Err(Error::InvalidInput(format!(
            "persona and baseline cover different instances (e.g. {missing:?})"
        )));
    }
    let diffs: Vec<f64> = persona.values().zip(baseline.values()).map(|(p, b)| p - b).collect();
    let all: Vec<usize> = (0..diffs.len()).collect();
    let delta = mean_at(&diffs, &all);
    let reps = bootstrap_paired(diffs.len(), cfg, |idx| mean_at(&diffs, idx))?;
    Ok(PairedDelta::new(persona_id, metric, delta, percentile_ci(&reps, cfg.confidence)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StuartMaxwell {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Categories left out because they carry no off-diagonal mass.
    pub dropped: Vec<usize>,
}

/// k×k contingency table of paired codes (`a` rows, `b` columns).
pub fn contingency(labels_a: &[usize], labels_b: &[usize], k: usize) -> Result<Vec<Vec<f64>>> {
    if labels_a.len() != labels_b.len() {
        return Err(Error::LengthMismatch {
            pred: labels_a.len(),
            gold: labels_b.len(),
        });
    }
    let mut n = vec![vec![0.0; k]; k];
    for (&a, &b) in labels_a.iter().zip(labels_b) {
        if a >= k || b >= k {
            return Err(Error::InvalidInput(format!("category code {} out of range 0..{k}", a.max(b))));
        }
        n[a][b] += 1.0;
    }
    Ok(n)
}

/// Stuart–Maxwell test of marginal homogeneity on paired labels coded `0..k`.
pub fn stuart_maxwell(labels_a: &[usize], labels_b: &[usize], k: usize) -> Result<StuartMaxwell> {
    if k < 2 {
        return Err(Error::InvalidInput("stuart-maxwell needs k >= 2".into()));
    }
    stuart_maxwell_table(&contingency(labels_a, labels_b, k)?)
}

/// Stuart–Maxwell on a square contingency table.
///
/// A category without off-diagonal mass has d_i = 0 and an all-zero row in
/// S, so it is removed before inversion and the dof shrinks with it.
pub fn stuart_maxwell_table(n: &[Vec<f64>]) -> Result<StuartMaxwell> {
    let k = n.len();
    if k < 2 || n.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidInput("contingency table must be square with k >= 2".into()));
    }
    let row = |i: usize| n[i].iter().sum::<f64>();
    let col = |i: usize| n.iter().map(|r| r[i]).sum::<f64>();
    let (kept, dropped): (Vec<usize>, Vec<usize>) = (0..k).partition(|&i| row(i) + col(i) - 2.0 * n[i][i] > 0.0);
    if kept.len() < 2 {
        return Ok(StuartMaxwell {
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
            dropped,
        });
    }
    let m = kept.len() - 1;
    let d: Vec<f64> = kept[..m].iter().map(|&i| row(i) - col(i)).collect();
    let s: Vec<Vec<f64>> = kept[..m]
        .iter()
        .map(|&i| {
            kept[..m]
                .iter()
                .map(|&j| if i == j { row(i) + col(i) - 2.0 * n[i][i] } else { -(n[i][j] + n[j][i]) })
                .collect()
        })
        .collect();
    let x = solve(s, d.clone()).ok_or_else(|| Error::Domain("singular Stuart-Maxwell covariance".into()))?;
    let statistic = d.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>().max(0.0);
    Ok(StuartMaxwell {
        statistic,
        dof: m,
        p_value: chi_square_sf(statistic, m)?,
        dropped,
    })
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-12 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        let pivot = a[c].clone();
        for r in c + 1..n {
            let f = a[r][c] / pivot[c];
            for (x, p) in a[r][c..].iter_mut().zip(&pivot[c..]) {
                *x -= f * p;
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let tail: f64 = (r + 1..n).map(|j| a[r][j] * x[j]).sum();
        x[r] = (b[r] - tail) / a[r][r];
    }
    Some(x)
}

pub fn bonferroni_threshold(family_size: usize) -> f64 {
    SIGNIFICANCE_LEVEL / family_size.max(1) as f64
}

/// One pairwise Stuart–Maxwell test inside an attribute group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTest {
    pub group: String,
    pub persona_a: String,
    pub persona_b: String,
    pub test: StuartMaxwell,
    pub threshold: f64,
    pub significant: bool,
}

/// Sets the corrected threshold and significance flag on every test.
pub fn bonferroni(mut pairs: Vec<PairTest>, family_size: usize) -> Vec<PairTest> {
    let threshold = bonferroni_threshold(family_size);
    for p in &mut pairs {
        p.threshold = threshold;
        p.significant = p.test.p_value < threshold;
    }
    pairs
}

/// Share of instances on which the group's personas did not all give the
/// same label, per run and then averaged over runs. Instances with fewer than
/// two labelled personas are skipped. `None` when nothing is comparable.
pub fn disagreement_rate(records: &[AnnotationRecord], persona_ids: &[String]) -> Option<f64> {
    let members: BTreeSet<&str> = persona_ids.iter().map(String::as_str).collect();
    let mut by_run: BTreeMap<u32, BTreeMap<&str, Vec<_>>> = BTreeMap::new();
    for r in records {
        if let (true, Some(l)) = (members.contains(r.persona_id.as_str()), r.label) {
            by_run.entry(r.run).or_default().entry(r.instance_id.as_str()).or_default().push(l);
        }
    }
    let rates: Vec<f64> = by_run
        .values()
        .filter_map(|insts| {
            let comparable: Vec<_> = insts.values().filter(|ls| ls.len() >= 2).collect();
            if comparable.is_empty() {
                return None;
            }
            let split = comparable.iter().filter(|ls| ls.iter().any(|l| *l != ls[0])).count();
            Some(split as f64 / comparable.len() as f64)
        })
        .collect();
    (!rates.is_empty()).then(|| rates.iter().sum::<f64>() / rates.len() as f64)
}

fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + G + 0.5;
    let sum = C[1..].iter().enumerate().fold(C[0], |acc, (i, c)| acc + c / (x + i as f64 + 1.0));
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + sum.ln()
}

/// Regularized upper incomplete gamma Q(a, x).
fn gamma_q(a: f64, x: f64) -> f64 {
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 10_000;
    if x <= 0.0 {
        return 1.0;
    }
    let log_prefix = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * EPS {
                break;
            }
        }
        (1.0 - sum * log_prefix.exp()).clamp(0.0, 1.0)
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let step = d * c;
            h *= step;
            if (step - 1.0).abs() < EPS {
                break;
            }
        }
        (h * log_prefix.exp()).clamp(0.0, 1.0)
    }
}

/// Upper tail of the chi-square distribution.
pub fn chi_square_sf(x: f64, dof: usize) -> Result<f64> {
    if dof < 1 {
        return Err(Error::Domain("chi-square dof must be at least 1".into()));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("chi-square statistic {x} must be non-negative")));
    }
    Ok(gamma_q(dof as f64 / 2.0, x / 2.0))
}
