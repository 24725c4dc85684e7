//! Threshold-free and threshold-based detection metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub auroc: f64,
    pub auprc: f64,
    pub f1_macro: f64,
    pub recall: f64,
}

fn check(scores: &[f64], labels: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    Ok((pos, neg))
}

/// Indices sorted by descending score, grouped into runs of equal scores.
fn tie_groups(scores: &[f64]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match groups.last_mut() {
            Some(g) if scores[g[0]] == scores[i] => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

/// Mann–Whitney statistic with midranks for ties.
pub fn auroc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (pos, neg) = check(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut k = 0;
    while k < order.len() {
        let mut end = k;
        while end + 1 < order.len() && scores[order[end + 1]] == scores[order[k]] {
            end += 1;
        }
        // Ranks k+1 ..= end+1 share their mean.
        let mid = (k + end) as f64 / 2.0 + 1.0;
        rank_sum += mid * order[k..=end].iter().filter(|&&i| labels[i]).count() as f64;
        k = end + 1;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Average precision: `Σ (R_k − R_{k−1}) P_k` over descending distinct
/// thresholds, without interpolation.
pub fn auprc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (pos, _) = check(scores, labels)?;
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut prev_recall = 0.0;
    let mut area = 0.0;
    for group in tie_groups(scores) {
        seen += group.len();
        tp += group.iter().filter(|&&i| labels[i]).count();
        let recall = tp as f64 / pos as f64;
        let precision = tp as f64 / seen as f64;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Ok(area)
}

fn confusion(scores: &[f64], labels: &[bool], threshold: f64) -> (f64, f64, f64, f64) {
    let (mut tp, mut fp, mut tn, mut fn_) = (0.0, 0.0, 0.0, 0.0);
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l) {
            (true, true) => tp += 1.0,
            (true, false) => fp += 1.0,
            (false, false) => tn += 1.0,
            (false, true) => fn_ += 1.0,
        }
    }
    (tp, fp, tn, fn_)
}

fn f1(tp: f64, fp: f64, fn_: f64) -> f64 {
    let den = 2.0 * tp + fp + fn_;
    if den == 0.0 {
        0.0
    } else {
        2.0 * tp / den
    }
}

/// Mean of the per-class F1 scores; a node is predicted anomalous when its
/// score is at least `threshold`.
pub fn f1_macro(scores: &[f64], labels: &[bool], threshold: f64) -> f64 {
    let (tp, fp, tn, fn_) = confusion(scores, labels, threshold);
    0.5 * (f1(tp, fp, fn_) + f1(tn, fn_, fp))
}

/// Recall of the anomalous class.
pub fn recall(scores: &[f64], labels: &[bool], threshold: f64) -> f64 {
    let (tp, _, _, fn_) = confusion(scores, labels, threshold);
    if tp + fn_ == 0.0 {
        0.0
    } else {
        tp / (tp + fn_)
    }
}

pub fn metrics(scores: &[f64], labels: &[bool], threshold: f64) -> Result<MetricsRecord> {
    Ok(MetricsRecord {
        auroc: auroc(scores, labels)?,
        auprc: auprc(scores, labels)?,
        f1_macro: f1_macro(scores, labels, threshold),
        recall: recall(scores, labels, threshold),
    })
}

/// `(threshold, false positive rate, true positive rate)` at every distinct
/// score, starting from the all-negative corner.
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<Vec<(f64, f64, f64)>> {
    let (pos, neg) = check(scores, labels)?;
    let mut points = vec![(f64::INFINITY, 0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    for group in tie_groups(scores) {
        let t = group.iter().filter(|&&i| labels[i]).count();
        tp += t;
        fp += group.len() - t;
        points.push((scores[group[0]], fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    Ok(points)
}

/// `(threshold, recall, precision)` at every distinct score.
pub fn pr_curve(scores: &[f64], labels: &[bool]) -> Result<Vec<(f64, f64, f64)>> {
    let (pos, _) = check(scores, labels)?;
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut points = Vec::new();
    for group in tie_groups(scores) {
        seen += group.len();
        tp += group.iter().filter(|&&i| labels[i]).count();
        points.push((scores[group[0]], tp as f64 / pos as f64, tp as f64 / seen as f64));
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_separation() {
        let s = [0.9, 0.8, 0.3, 0.2];
        let l = [true, true, false, false];
        let m = metrics(&s, &l, 0.5).unwrap();
        assert_eq!(m, MetricsRecord { auroc: 1.0, auprc: 1.0, f1_macro: 1.0, recall: 1.0 });
    }

    #[test]
    fn ties_take_half_credit() {
        assert_eq!(auroc(&[0.5, 0.5], &[true, false]).unwrap(), 0.5);
    }

    #[test]
    fn average_precision_by_hand() {
        // ranking: +, -, +  → P@1 = 1, P@3 = 2/3; AP = 0.5·1 + 0.5·2/3
        let ap = auprc(&[0.9, 0.8, 0.7], &[true, false, true]).unwrap();
        assert!((ap - (0.5 + 1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn single_class_is_undefined() {
        assert!(matches!(auroc(&[0.1, 0.2], &[false, false]), Err(Error::SingleClass)));
        assert!(auprc(&[0.1], &[true]).is_err());
    }

    #[test]
    fn curves_end_at_full_recall() {
        let s = [0.9, 0.1, 0.4, 0.4];
        let l = [true, false, true, false];
        let roc = roc_curve(&s, &l).unwrap();
        assert_eq!(*roc.last().unwrap(), (0.1, 1.0, 1.0));
        let pr = pr_curve(&s, &l).unwrap();
        assert_eq!(pr.last().unwrap().1, 1.0);
    }
}
