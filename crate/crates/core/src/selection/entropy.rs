use crate::error::{Error, Result};

/// Entropy in bits of a class histogram; `0 log 0 = 0`.
pub fn entropy_from_counts(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.log2()
        })
        .sum::<f64>()
}

pub fn class_counts(labels: &[usize], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0; n_classes];
    for &l in labels {
        counts[l] += 1;
    }
    counts
}

fn n_classes_of(labels: &[usize]) -> usize {
    labels.iter().max().map_or(0, |m| m + 1)
}

/// Shannon entropy (bits) of a label multiset.
pub fn entropy(labels: &[usize]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(entropy_from_counts(&class_counts(labels, n_classes_of(labels))))
}

/// Information gain from counts: `H(parent) - Σ |child|/|parent| H(child)`.
pub fn information_gain_from_counts(parent: &[usize], children: &[&[usize]]) -> f64 {
    let n: usize = parent.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let remainder: f64 = children
        .iter()
        .map(|c| {
            let size: usize = c.iter().sum();
            size as f64 / n as f64 * entropy_from_counts(c)
        })
        .sum();
    let ig = entropy_from_counts(parent) - remainder;
    // rounding residue when the children mirror the parent's proportions
    if ig.abs() < TIE_EPS {
        0.0
    } else {
        ig
    }
}

/// Information gain of partitioning `parent` into `children`. The children
/// must together hold exactly the parent's label multiset.
pub fn split_information_gain(parent: &[usize], children: &[&[usize]]) -> Result<f64> {
    if parent.is_empty() {
        return Err(Error::EmptySet);
    }
    let k = children
        .iter()
        .map(|c| n_classes_of(c))
        .max()
        .unwrap_or(0)
        .max(n_classes_of(parent));
    let parent_counts = class_counts(parent, k);
    let child_counts: Vec<Vec<usize>> = children.iter().map(|c| class_counts(c, k)).collect();
    let mut merged = vec![0; k];
    for c in &child_counts {
        for (m, v) in merged.iter_mut().zip(c) {
            *m += v;
        }
    }
    if merged != parent_counts {
        return Err(Error::NotAPartition);
    }
    let refs: Vec<&[usize]> = child_counts.iter().map(|c| c.as_slice()).collect();
    Ok(information_gain_from_counts(&parent_counts, &refs).max(0.0))
}

/// Gains closer than this are treated as ties.
pub const TIE_EPS: f64 = 1e-12;

/// Best binary split `value <= threshold` of one continuous attribute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSplit {
    pub threshold: f64,
    pub ig: f64,
}

/// Midpoint strictly below `hi` so that `lo <= t < hi`.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let t = lo + (hi - lo) / 2.0;
    if t >= hi {
        lo
    } else {
        t
    }
}

/// Scans every midpoint between consecutive distinct sorted values and
/// returns the one with the highest information gain (smallest threshold on
/// ties). A constant attribute returns `ig = 0` at its value.
pub fn best_threshold_split(values: &[f64], labels: &[usize], n_classes: usize) -> Result<ThresholdSplit> {
    if values.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: labels.len(),
        });
    }
    if values.len() < 2 {
        return Err(Error::TooFewSamples(format!("{} samples", values.len())));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    Ok(scan_sorted(values, labels, n_classes, &order))
}

/// Threshold scan over samples already sorted by value (`order`).
pub(crate) fn scan_sorted(values: &[f64], labels: &[usize], n_classes: usize, order: &[usize]) -> ThresholdSplit {
    let parent: Vec<usize> = {
        let mut c = vec![0; n_classes];
        for &i in order {
            c[labels[i]] += 1;
        }
        c
    };
    let mut left = vec![0; n_classes];
    let mut right = parent.clone();
    let mut best = ThresholdSplit {
        threshold: values[order[0]],
        ig: 0.0,
    };
    let mut found = false;
    for w in 0..order.len() - 1 {
        let (i, j) = (order[w], order[w + 1]);
        left[labels[i]] += 1;
        right[labels[i]] -= 1;
        if values[i] == values[j] {
            continue;
        }
        let ig = information_gain_from_counts(&parent, &[&left, &right]).max(0.0);
        if !found || ig > best.ig + TIE_EPS {
            best = ThresholdSplit {
                threshold: midpoint(values[i], values[j]),
                ig,
            };
            found = true;
        }
    }
    best
}
