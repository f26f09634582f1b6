//! # qentropy
//!
//! Generalized entropies and the inequalities between them.
//!
//! The crate covers the q-deformed logarithm and exponential, Tsallis, Rényi
//! and Shannon entropies, quasi-arithmetic (quasilinear) means and the
//! entropies generated by them, relative entropies and Csiszár
//! f-divergences, the two-sided Jensen-gap bounds that sandwich these
//! quantities, Tsallis joint/conditional entropies with Han's inequality,
//! and a seeded harness that checks every inequality on random inputs.
//!
//! | Quantity | Function | Formula |
//! |----------|----------|---------|
//! | q-logarithm | [`qmath::q_log`] | (x^{1-q} - 1)/(1-q) |
//! | Tsallis entropy | [`entropy::tsallis_entropy`] | Σ p ln_q(1/p) |
//! | Rényi entropy | [`entropy::renyi_entropy`] | log(Σ p^q)/(1-q) |
//! | quasilinear mean | [`quasilinear::quasilinear_mean`] | ψ⁻¹(Σ p ψ(x)) |
//! | Tsallis relative entropy | [`divergence::tsallis_relative`] | -Σ p ln_q(r/p) |
//! | f-divergence | [`divergence::f_divergence`] | Σ r f(p/r) |
//!
//! All inputs are strictly positive: zero probabilities are rejected at
//! construction rather than handled by continuity conventions.
//!
//! ```rust
//! use qentropy::{dist::ProbDist, entropy, qmath::EntropicIndex};
//!
//! let p = ProbDist::new(vec![0.25, 0.75]).unwrap();
//! let q = EntropicIndex::new(2.0).unwrap();
//! assert!((entropy::tsallis_entropy(&p, q) - 0.375).abs() < 1e-15);
//! ```

pub mod bounds;
pub mod dist;
pub mod divergence;
pub mod entropy;
mod error;
pub mod joint;
pub mod qmath;
pub mod quasilinear;
pub mod verify;

pub use error::{Error, Result};

/// Absolute and relative tolerance used when checking an inequality chain.
pub const CHECK_TOL: f64 = 1e-9;

/// Scale-aware excess of a violation amount.
///
/// A raw violation `amount` (positive means the inequality is broken) is
/// divided by `1 + scale`, so that `excess <= tol` is the same as
/// `amount <= tol + tol * scale`.
pub fn scaled_excess(amount: f64, scale: f64) -> f64 {
    if amount.is_nan() || !scale.is_finite() {
        return f64::INFINITY;
    }
    amount / (1.0 + scale.abs())
}
