use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::DataError;
use crate::rng::{SeedStreams, Stream};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub seed: u64,
}

/// Per-class test quotas: floors of `frac * n_c`, topped up to `round(frac * n)`
/// by largest remainder (ties to the lower class index).
fn quotas(counts: &[usize], frac: f64) -> Vec<usize> {
    let n: usize = counts.iter().sum();
    let total = (frac * n as f64).round() as usize;
    let exact: Vec<f64> = counts.iter().map(|&c| frac * c as f64).collect();
    let mut q: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut missing = total.saturating_sub(q.iter().sum());
    for &c in order.iter().cycle().take(counts.len() * 2) {
        if missing == 0 {
            break;
        }
        if q[c] < counts[c] {
            q[c] += 1;
            missing -= 1;
        }
    }
    q
}

/// Stratified shuffled train/test partition. Index lists are returned sorted.
pub fn stratified_split(
    labels: &[usize],
    num_classes: usize,
    test_frac: f64,
    seed: u64,
) -> Result<SplitIndices, DataError> {
    if !(test_frac > 0.0 && test_frac < 1.0) {
        return Err(DataError::InvalidFraction(test_frac));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class
            .get_mut(l)
            .ok_or(DataError::LabelOutOfRange {
                label: l,
                classes: num_classes,
            })?
            .push(i);
    }
    if let Some(c) = by_class.iter().position(Vec::is_empty) {
        return Err(DataError::EmptyClass(c));
    }
    let counts: Vec<usize> = by_class.iter().map(Vec::len).collect();
    let q = quotas(&counts, test_frac);
    let mut rng = SeedStreams::new(seed).rng(Stream::Split, 0);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (members, &k) in by_class.iter_mut().zip(&q) {
        members.shuffle(&mut rng);
        test_idx.extend_from_slice(&members[..k]);
        train_idx.extend_from_slice(&members[k..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok(SplitIndices {
        train_idx,
        test_idx,
        seed,
    })
}
