//! Classification and rationale-plausibility metrics.
//!
//! Everything here works on plain prediction/gold slices so the functions are
//! reusable outside the report pipeline. Scores are fractions in `[0, 1]`
//! except MAE/ME, which are reported ×100 on the ordinal hate3 scale.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{Label, Mask, OrdinalScale};

/// Conventions that the metrics leave configurable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskConventions {
    /// Score when both predicted and gold masks are empty.
    pub both_empty_score: f64,
    /// IOU at or above which an instance counts as a hit.
    pub iou_threshold: f64,
}

impl Default for MaskConventions {
    fn default() -> Self {
        MaskConventions {
            both_empty_score: 1.0,
            iou_threshold: 0.5,
        }
    }
}

fn check_pairs<T>(pred: &[T], gold: &[T], metric: &'static str) -> Result<()> {
    if pred.len() != gold.len() {
        return Err(Error::LengthMismatch {
            pred: pred.len(),
            gold: gold.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::UndefinedMetric(metric));
    }
    Ok(())
}

pub fn accuracy(pred: &[Label], gold: &[Label]) -> Result<f64> {
    check_pairs(pred, gold, "accuracy")?;
    let correct = pred.iter().zip(gold).filter(|(p, g)| p == g).count();
    Ok(correct as f64 / pred.len() as f64)
}

/// Per-class F1 for `class`; zero when the class has no true positives.
pub fn class_f1(pred: &[Label], gold: &[Label], class: Label) -> f64 {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for (p, g) in pred.iter().zip(gold) {
        match (*p == class, *g == class) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    if tp == 0 {
        return 0.0;
    }
    2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
}

/// Unweighted mean of per-class F1 over `classes` minus `excluded`.
///
/// Predictions of an excluded class still count against the true class's
/// recall, and a class absent from both gold and predictions contributes 0.
pub fn macro_f1(pred: &[Label], gold: &[Label], classes: &[Label], excluded: &[Label]) -> Result<f64> {
    check_pairs(pred, gold, "macro_f1")?;
    let kept: Vec<Label> = classes.iter().copied().filter(|c| !excluded.contains(c)).collect();
    if kept.is_empty() {
        return Err(Error::InvalidInput("macro_f1 with every class excluded".into()));
    }
    Ok(kept.iter().map(|c| class_f1(pred, gold, *c)).sum::<f64>() / kept.len() as f64)
}

fn ordinal_diffs<'a>(
    pred: &'a [Label],
    gold: &'a [Label],
    scale: OrdinalScale,
) -> impl Iterator<Item = Result<i32>> + 'a {
    pred.iter().zip(gold).map(move |(p, g)| {
        match (scale.value(*p), scale.value(*g)) {
            (Some(a), Some(b)) => Ok(a - b),
            _ => Err(Error::InvalidInput(format!("`{p}`/`{g}` are not on the ordinal scale"))),
        }
    })
}

/// 100 × mean |scale(pred) − scale(gold)|.
pub fn mae(pred: &[Label], gold: &[Label], scale: OrdinalScale) -> Result<f64> {
    check_pairs(pred, gold, "mae")?;
    let mut total = 0i64;
    for d in ordinal_diffs(pred, gold, scale) {
        total += i64::from(d?.abs());
    }
    Ok(100.0 * total as f64 / pred.len() as f64)
}

/// 100 × mean (scale(pred) − scale(gold)); positive means over-severe.
pub fn mean_error(pred: &[Label], gold: &[Label], scale: OrdinalScale) -> Result<f64> {
    check_pairs(pred, gold, "mean_error")?;
    let mut total = 0i64;
    for d in ordinal_diffs(pred, gold, scale) {
        total += i64::from(d?);
    }
    Ok(100.0 * total as f64 / pred.len() as f64)
}

/// Off-diagonal confusion rates: count(gold=g ∧ pred=p) / count(gold=g) for p ≠ g.
///
/// Only gold classes with support appear; every predicted label of a present
/// row appears, zeros included for `classes`.
pub fn overflag_matrix(pred: &[Label], gold: &[Label], classes: &[Label]) -> Result<BTreeMap<(Label, Label), f64>> {
    if pred.len() != gold.len() {
        return Err(Error::LengthMismatch {
            pred: pred.len(),
            gold: gold.len(),
        });
    }
    let mut support: BTreeMap<Label, usize> = BTreeMap::new();
    let mut counts: BTreeMap<(Label, Label), usize> = BTreeMap::new();
    for (p, g) in pred.iter().zip(gold) {
        *support.entry(*g).or_default() += 1;
        if p != g {
            *counts.entry((*g, *p)).or_default() += 1;
        }
    }
    let mut out = BTreeMap::new();
    for (g, n) in &support {
        let targets = classes.iter().copied().chain(counts.keys().filter(|k| k.0 == *g).map(|k| k.1));
        for p in targets {
            if p == *g {
                continue;
            }
            let c = counts.get(&(*g, p)).copied().unwrap_or(0);
            out.insert((*g, p), c as f64 / *n as f64);
        }
    }
    Ok(out)
}

fn mask_counts(pred: &Mask, gold: &Mask) -> Result<(usize, usize, usize)> {
    if pred.len() != gold.len() {
        return Err(Error::LengthMismatch {
            pred: pred.len(),
            gold: gold.len(),
        });
    }
    let inter = pred.iter().zip(gold.iter()).filter(|(a, b)| *a && *b).count();
    Ok((inter, pred.count_ones(), gold.count_ones()))
}

pub fn token_f1_with(pred: &Mask, gold: &Mask, conv: &MaskConventions) -> Result<f64> {
    let (inter, p, g) = mask_counts(pred, gold)?;
    Ok(match (p, g) {
        (0, 0) => conv.both_empty_score,
        (0, _) | (_, 0) => 0.0,
        _ => 2.0 * inter as f64 / (p + g) as f64,
    })
}

/// Token-level F1 between two masks (both empty → 1.0, one empty → 0.0).
pub fn token_f1(pred: &Mask, gold: &Mask) -> Result<f64> {
    token_f1_with(pred, gold, &MaskConventions::default())
}

pub fn iou_with(pred: &Mask, gold: &Mask, conv: &MaskConventions) -> Result<f64> {
    let (inter, p, g) = mask_counts(pred, gold)?;
    let union = p + g - inter;
    Ok(if union == 0 {
        conv.both_empty_score
    } else {
        inter as f64 / union as f64
    })
}

/// Intersection over union (both empty → 1.0).
pub fn iou(pred: &Mask, gold: &Mask) -> Result<f64> {
    iou_with(pred, gold, &MaskConventions::default())
}

/// Mean token F1 over paired masks.
pub fn mean_token_f1(pairs: &[(&Mask, &Mask)], conv: &MaskConventions) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::UndefinedMetric("token_f1"));
    }
    let mut total = 0.0;
    for (p, g) in pairs {
        total += token_f1_with(p, g, conv)?;
    }
    Ok(total / pairs.len() as f64)
}

/// Fraction of instances whose IOU reaches the threshold.
pub fn iou_f1(pairs: &[(&Mask, &Mask)], conv: &MaskConventions) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::UndefinedMetric("iou_f1"));
    }
    let mut hits = 0usize;
    for (p, g) in pairs {
        if iou_with(p, g, conv)? >= conv.iou_threshold {
            hits += 1;
        }
    }
    Ok(hits as f64 / pairs.len() as f64)
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per-run scores for one metric with their mean and spread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub metric: String,
    pub per_run: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub unit: String,
}

impl ScoreTable {
    pub fn new(metric: impl Into<String>, per_run: Vec<f64>, unit: impl Into<String>) -> Self {
        let (mean, std) = mean_std(&per_run);
        ScoreTable {
            metric: metric.into(),
            per_run,
            mean,
            std,
            unit: unit.into(),
        }
    }

    pub fn runs(&self) -> usize {
        self.per_run.len()
    }
}
