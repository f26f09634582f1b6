//! Probability vectors, incomplete weight vectors, partitions and nested
//! (two-level) distributions.

use serde::Serialize;

use crate::qmath::EntropicIndex;
use crate::{Error, Result};

/// Absolute tolerance on `|Σ weights - 1|`.
pub const SUM_TOL: f64 = 1e-9;

fn check_positive(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::Empty);
    }
    match weights
        .iter()
        .enumerate()
        .find(|(_, w)| !(w.is_finite() && **w > 0.0))
    {
        Some((index, &value)) => Err(Error::Positivity { index, value }),
        None => Ok(()),
    }
}

fn check_normalized(sum: f64) -> Result<()> {
    if (sum - 1.0).abs() <= SUM_TOL {
        Ok(())
    } else {
        Err(Error::Normalization { sum })
    }
}

/// A strictly positive probability vector.
///
/// Weights are validated but never renormalized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbDist {
    weights: Vec<f64>,
}

impl ProbDist {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_positive(&weights)?;
        check_normalized(weights.iter().sum())?;
        Ok(ProbDist { weights })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        Ok(ProbDist {
            weights: vec![1.0 / n as f64; n],
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.weights.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }
}

/// Validates `weights` as a [`ProbDist`].
pub fn make_dist(weights: &[f64]) -> Result<ProbDist> {
    ProbDist::new(weights.to_vec())
}

/// A strictly positive weight vector with no sum constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncompleteDist {
    weights: Vec<f64>,
}

impl IncompleteDist {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_positive(&weights)?;
        Ok(IncompleteDist { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

impl From<ProbDist> for IncompleteDist {
    fn from(p: ProbDist) -> Self {
        IncompleteDist { weights: p.weights }
    }
}

/// A partition of the index set `{0, .., n-1}` into non-empty blocks.
///
/// Block order is preserved by [`coarsen`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    n: usize,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Partition(format!("block {b} is empty")));
            }
            for &i in block {
                if i >= n {
                    return Err(Error::Partition(format!("index {i} out of range 0..{n}")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Partition(format!("index {i} appears twice")));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Partition(format!("index {missing} is not covered")));
        }
        Ok(Partition { blocks, n })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Size of the underlying index set.
    pub fn domain_len(&self) -> usize {
        self.n
    }
}

/// Block sums of `p` over `part`, in block order.
pub fn coarsen(p: &ProbDist, part: &Partition) -> Result<ProbDist> {
    if part.n != p.len() {
        return Err(Error::Partition(format!(
            "partition covers {} indices but the distribution has {}",
            part.n,
            p.len()
        )));
    }
    let w = p.weights();
    let sums = part
        .blocks
        .iter()
        .map(|block| block.iter().map(|&i| w[i]).sum())
        .collect();
    ProbDist::new(sums)
}

/// `Σ p_j^q`.
pub fn power_sum(p: &ProbDist, q: EntropicIndex) -> f64 {
    let q = q.value();
    p.weights().iter().map(|w| w.powf(q)).sum()
}

/// Two-level distribution `x_{ij}` with row totals `x_i = Σ_j x_{ij}`.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedDist {
    rows: Vec<Vec<f64>>,
    totals: Vec<f64>,
}

impl NestedDist {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty);
        }
        for row in &rows {
            check_positive(row)?;
        }
        let totals: Vec<f64> = rows.iter().map(|r| r.iter().sum()).collect();
        check_normalized(totals.iter().sum())?;
        Ok(NestedDist { rows, totals })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// The row totals `x_i` as a distribution.
    pub fn coarse(&self) -> ProbDist {
        ProbDist {
            weights: self.totals.clone(),
        }
    }

    /// All cells, row after row.
    pub fn flatten(&self) -> ProbDist {
        ProbDist {
            weights: self.rows.iter().flatten().copied().collect(),
        }
    }

    /// Row `i` divided by its total.
    pub fn row_conditional(&self, i: usize) -> ProbDist {
        let t = self.totals[i];
        ProbDist {
            weights: self.rows[i].iter().map(|x| x / t).collect(),
        }
    }
}
