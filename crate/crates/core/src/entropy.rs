//! Tsallis, Shannon and Rényi entropies.

use crate::dist::{NestedDist, ProbDist};
use crate::qmath::{ln_q, q_exp, EntropicIndex};
use crate::Result;

/// Tsallis entropy `Σ p_j ln_q(1/p_j)`; Shannon entropy at q = 1.
pub fn tsallis_entropy(p: &ProbDist, q: EntropicIndex) -> f64 {
    p.weights().iter().map(|&w| w * ln_q(1.0 / w, q)).sum()
}

/// Shannon entropy in nats.
pub fn shannon_entropy(p: &ProbDist) -> f64 {
    -p.weights().iter().map(|&w| w * w.ln()).sum::<f64>()
}

/// Rényi entropy `log(Σ p_j^q) / (1 - q)`.
///
/// `Σ p^q - 1` is accumulated as `Σ p (p^{q-1} - 1)` so that indices close to
/// 1 do not cancel. At q = 0 this is `log n`.
pub fn renyi_entropy(p: &ProbDist, q: EntropicIndex) -> f64 {
    if !q.deformed() {
        return shannon_entropy(p);
    }
    let a = q.value() - 1.0;
    let excess: f64 = p
        .weights()
        .iter()
        .map(|&w| w * (a * w.ln()).exp_m1())
        .sum();
    excess.ln_1p() / -a
}

/// Both sides of `exp R_q(p) = exp_q H_q(p)`.
pub fn renyi_tsallis_bridge(p: &ProbDist, q: EntropicIndex) -> Result<(f64, f64)> {
    let lhs = renyi_entropy(p, q).exp();
    let rhs = q_exp(tsallis_entropy(p, q), q)?;
    Ok((lhs, rhs))
}

/// Both sides of the q-additivity rule for a two-level distribution:
/// the entropy of all cells, and the entropy of the row totals plus the
/// within-row entropies weighted by `x_i^q`.
pub fn q_additivity_sides(nd: &NestedDist, q: EntropicIndex) -> (f64, f64) {
    let flat = tsallis_entropy(&nd.flatten(), q);
    let coarse = nd.coarse();
    let within: f64 = coarse
        .weights()
        .iter()
        .enumerate()
        .map(|(i, &x)| x.powf(q.value()) * tsallis_entropy(&nd.row_conditional(i), q))
        .sum();
    (flat, tsallis_entropy(&coarse, q) + within)
}
