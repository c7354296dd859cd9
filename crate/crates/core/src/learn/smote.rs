//! Synthetic minority oversampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::{Dataset, Label};
use crate::error::{Error, Result};

/// How one synthetic row was made: `base + gap * (neighbor - base)`, with
/// `base` and `neighbor` indexing the input dataset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticOrigin {
    pub base: usize,
    pub neighbor: usize,
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct SmoteOutput {
    /// Input rows unchanged and in order, followed by the synthetic rows.
    pub data: Dataset,
    pub origins: Vec<SyntheticOrigin>,
    pub minority: Label,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `k` nearest other members of `members` for each member, ties broken by
/// dataset index.
fn nearest_neighbors(data: &Dataset, members: &[usize], k: usize) -> Vec<Vec<usize>> {
    members
        .iter()
        .map(|&i| {
            let mut others: Vec<(f64, usize)> = members
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| (squared_distance(data.row(i), data.row(j)), j))
                .collect();
            others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            others.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

/// Oversamples the minority class up to the majority count. Base rows are
/// taken round-robin; each synthetic row interpolates towards one of the
/// base's `k` nearest minority neighbours (Euclidean) at a uniform gap in
/// `[0, 1)`. `k` is clamped to `minority_size - 1`.
pub fn smote(data: &Dataset, k: usize, rng_seed: u64) -> Result<SmoteOutput> {
    if k == 0 {
        return Err(Error::invalid("SMOTE needs k >= 1"));
    }
    let [benign, suspicious] = data.class_counts();
    if benign == 0 || suspicious == 0 {
        return Err(Error::invalid("SMOTE needs both classes present"));
    }
    let minority = if suspicious < benign {
        Label::Suspicious
    } else {
        Label::Benign
    };
    let (m, needed) = if benign == suspicious {
        (benign, 0)
    } else {
        (benign.min(suspicious), benign.max(suspicious) - benign.min(suspicious))
    };
    let mut out = data.clone();
    let mut origins = Vec::with_capacity(needed);
    if needed == 0 {
        return Ok(SmoteOutput {
            data: out,
            origins,
            minority,
        });
    }
    if m < 2 {
        return Err(Error::invalid("SMOTE needs at least two minority rows"));
    }
    let k = k.min(m - 1);
    let members: Vec<usize> = (0..data.len())
        .filter(|&i| data.labels()[i] == minority)
        .collect();
    let neighbors = nearest_neighbors(data, &members, k);

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for s in 0..needed {
        let slot = s % m;
        let base = members[slot];
        let neighbor = neighbors[slot][rng.random_range(0..k)];
        let gap: f64 = rng.random();
        let row = data
            .row(base)
            .iter()
            .zip(data.row(neighbor))
            .map(|(&x, &n)| (x + gap * (n - x)).clamp(x.min(n), x.max(n)))
            .collect();
        out.push(row, minority);
        origins.push(SyntheticOrigin {
            base,
            neighbor,
            gap,
        });
    }
    Ok(SmoteOutput {
        data: out,
        origins,
        minority,
    })
}
