//! Multiway joint distributions with Tsallis joint and conditional entropies.
//!
//! Axes are numbered from 0. Cells are stored densely in row-major order
//! (the last axis varies fastest) and must be strictly positive.

use serde::Serialize;

use crate::bounds::BoundReport;
use crate::dist::{ProbDist, SUM_TOL};
use crate::entropy::tsallis_entropy;
use crate::qmath::{ln_q, EntropicIndex};
use crate::{Error, Result};

/// A strictly positive joint distribution over `dims.len()` axes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDist {
    dims: Vec<usize>,
    cells: Vec<f64>,
}

impl JointDist {
    pub fn new(dims: Vec<usize>, cells: Vec<f64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Dimension("a joint needs at least one axis".into()));
        }
        if let Some(i) = dims.iter().position(|&d| d == 0) {
            return Err(Error::Dimension(format!("axis {i} has size 0")));
        }
        let size = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Dimension("cell count overflows".into()))?;
        if size != cells.len() {
            return Err(Error::Dimension(format!(
                "dims {dims:?} need {size} cells, got {}",
                cells.len()
            )));
        }
        // reuse the probability-vector validation for positivity and sum
        let cells = ProbDist::new(cells)?.into_weights();
        Ok(JointDist { dims, cells })
    }

    /// A two-axis joint from its rows.
    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(vec![rows.len(), ncols], rows.concat())
    }

    /// The outer product of independent marginals.
    pub fn product(marginals: &[ProbDist]) -> Result<Self> {
        let mut cells = vec![1.0];
        for m in marginals {
            cells = cells
                .iter()
                .flat_map(|c| m.weights().iter().map(move |w| c * w))
                .collect();
        }
        Self::new(marginals.iter().map(ProbDist::len).collect(), cells)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn axis_count(&self) -> usize {
        self.dims.len()
    }

    /// All cells as one probability vector.
    pub fn flatten(&self) -> ProbDist {
        ProbDist::new(self.cells.clone()).expect("cells validated at construction")
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.dims[i + 1];
        }
        s
    }

    /// For every cell, its flat index in the marginal over `axes` (sorted).
    fn projection(&self, axes: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let strides = self.strides();
        let kept: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let mut kept_strides = vec![1; axes.len()];
        for i in (0..axes.len().saturating_sub(1)).rev() {
            kept_strides[i] = kept_strides[i + 1] * kept[i + 1];
        }
        let index = (0..self.cells.len())
            .map(|flat| {
                axes.iter()
                    .zip(&kept_strides)
                    .map(|(&a, s)| (flat / strides[a]) % self.dims[a] * s)
                    .sum()
            })
            .collect();
        (kept, index)
    }

    fn check_axes(&self, axes: &[usize], allow_empty: bool) -> Result<Vec<usize>> {
        if axes.is_empty() && !allow_empty {
            return Err(Error::Axes("axis set is empty".into()));
        }
        let mut sorted = axes.to_vec();
        sorted.sort_unstable();
        if let Some(&a) = sorted.iter().find(|&&a| a >= self.dims.len()) {
            return Err(Error::Axes(format!(
                "axis {a} out of range for a {}-axis joint",
                self.dims.len()
            )));
        }
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Axes(format!("repeated axis in {axes:?}")));
        }
        Ok(sorted)
    }

    fn marginal_sorted(&self, axes: &[usize]) -> JointDist {
        let (dims, index) = self.projection(axes);
        let mut cells = vec![0.0; dims.iter().product()];
        for (c, &i) in self.cells.iter().zip(&index) {
            cells[i] += c;
        }
        debug_assert!((cells.iter().sum::<f64>() - 1.0).abs() <= SUM_TOL);
        JointDist { dims, cells }
    }
}

/// Sums out every axis not in `axes`; the kept axes stay in increasing order.
pub fn marginal(j: &JointDist, axes: &[usize]) -> Result<JointDist> {
    let axes = j.check_axes(axes, false)?;
    Ok(j.marginal_sorted(&axes))
}

/// `-Σ p^q ln_q p` over all cells, the Tsallis entropy of the flattened joint.
pub fn tsallis_joint_entropy(j: &JointDist, q: EntropicIndex) -> f64 {
    tsallis_entropy(&j.flatten(), q)
}

/// `-Σ p(t, g)^q ln_q p(t | g)` over the joint of `target ∪ given`.
///
/// With `given` empty this is the entropy of the target marginal.
pub fn tsallis_conditional_entropy(
    j: &JointDist,
    target: &[usize],
    given: &[usize],
    q: EntropicIndex,
) -> Result<f64> {
    j.check_axes(target, false)?;
    j.check_axes(given, true)?;
    if let Some(a) = target.iter().find(|a| given.contains(a)) {
        return Err(Error::Axes(format!(
            "axis {a} is both a target and a condition"
        )));
    }
    let union = j.check_axes(&[target, given].concat(), false)?;
    let tg = j.marginal_sorted(&union);
    let given_pos: Vec<usize> = union
        .iter()
        .enumerate()
        .filter(|(_, a)| given.contains(a))
        .map(|(i, _)| i)
        .collect();
    let g = tg.marginal_sorted(&given_pos);
    let (_, index) = tg.projection(&given_pos);
    let qv = q.value();
    Ok(-tg
        .cells
        .iter()
        .zip(&index)
        .map(|(&c, &i)| c.powf(qv) * ln_q(c / g.cells[i], q))
        .sum::<f64>())
}

/// The conditional entropies `H_q(x_{o_i} | x_{o_{i-1}}, ..., x_{o_0})` for
/// `o = order`; they sum to the joint entropy.
pub fn chain_rule_decomposition(
    j: &JointDist,
    order: &[usize],
    q: EntropicIndex,
) -> Result<Vec<f64>> {
    let sorted = j.check_axes(order, false)?;
    if sorted.len() != j.axis_count() {
        return Err(Error::Axes(format!(
            "{order:?} is not a permutation of the {} axes",
            j.axis_count()
        )));
    }
    (0..order.len())
        .map(|i| tsallis_conditional_entropy(j, &order[i..=i], &order[..i], q))
        .collect()
}

/// Han's inequality: the joint entropy is at most the average over `i` of the
/// entropy with axis `i` left out, scaled by `1/(k-1)`. Lower bound is 0.
///
/// The inequality is only claimed for q >= 1 and needs at least two axes.
pub fn han_sandwich(j: &JointDist, q: EntropicIndex) -> Result<BoundReport> {
    if q.value() < 1.0 {
        return Err(Error::Hypothesis(format!(
            "Han's inequality needs q >= 1, got q = {q}"
        )));
    }
    let k = j.axis_count();
    if k < 2 {
        return Err(Error::Dimension(format!(
            "Han's inequality needs at least 2 axes, got {k}"
        )));
    }
    Ok(han_report(j, q))
}

/// Both sides of Han's inequality without the hypothesis guard; `j` needs
/// at least two axes.
pub(crate) fn han_report(j: &JointDist, q: EntropicIndex) -> BoundReport {
    let k = j.axis_count();
    let total: f64 = (0..k)
        .map(|i| {
            let rest: Vec<usize> = (0..k).filter(|&a| a != i).collect();
            tsallis_joint_entropy(&j.marginal_sorted(&rest), q)
        })
        .sum();
    BoundReport::new(0.0, tsallis_joint_entropy(j, q), total / (k - 1) as f64)
}

/// `(H_q(x_0 | x_1), H_q(x_0))`. For q >= 1 the first never exceeds the second.
pub fn conditioning_reduces_entropy_check(j: &JointDist, q: EntropicIndex) -> Result<(f64, f64)> {
    if j.axis_count() < 2 {
        return Err(Error::Dimension(
            "conditioning needs at least 2 axes".into(),
        ));
    }
    Ok((
        tsallis_conditional_entropy(j, &[0], &[1], q)?,
        tsallis_conditional_entropy(j, &[0], &[], q)?,
    ))
}
