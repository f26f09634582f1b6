//! Two-sided inequality chains.
//!
//! Every bound operation returns a [`BoundReport`] holding the exact middle
//! quantity together with the lower and upper bounds the corresponding
//! inequality places on it. Checking `lower <= value <= upper` (up to
//! [`CHECK_TOL`](crate::CHECK_TOL)) is checking the inequality.
//!
//! Degenerate single-point distributions give `(0, 0, 0)` everywhere.

use serde::Serialize;

use crate::dist::{IncompleteDist, ProbDist};
use crate::divergence::{
    dual_generator, f_divergence, incomplete_f_divergence, kl_divergence, ConvexGenerator,
};
use crate::entropy::tsallis_entropy;
use crate::qmath::{ln_q, EntropicIndex};
use crate::quasilinear::{
    check_psi_convexity, quasilinear_mean, tsallis_quasilinear_entropy, GeneratorPsi,
};
use crate::{scaled_excess, Error, Result};

/// `lower <= value <= upper`, with both slacks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    pub lower_slack: f64,
    pub upper_slack: f64,
}

impl BoundReport {
    pub fn new(lower: f64, value: f64, upper: f64) -> Self {
        BoundReport {
            lower,
            value,
            upper,
            lower_slack: value - lower,
            upper_slack: upper - value,
        }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    /// Largest violation of either side, divided by `1 + max(|lower|, |value|, |upper|)`.
    /// Negative when both sides hold with room to spare.
    pub fn excess(&self) -> f64 {
        let scale = self.lower.abs().max(self.value.abs()).max(self.upper.abs());
        scaled_excess((-self.lower_slack).max(-self.upper_slack), scale)
    }

    /// True when the chain holds within `tol` absolute plus `tol` relative.
    pub fn holds(&self, tol: f64) -> bool {
        self.excess() <= tol
    }
}

/// `0 <= m <= f''(x) <= M` for all x in `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondDerivativeRange {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub lo: f64,
    pub hi: f64,
}

impl SecondDerivativeRange {
    /// `lo == hi` is allowed: a single evaluation point.
    pub fn new(m: f64, big_m: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(m.is_finite() && big_m.is_finite() && 0.0 <= m && m <= big_m) {
            return Err(Error::DegenerateRange(format!(
                "need 0 <= m <= M, got m = {m}, M = {big_m}"
            )));
        }
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::DegenerateRange(format!(
                "need lo <= hi, got [{lo}, {hi}]"
            )));
        }
        Ok(SecondDerivativeRange { m, big_m, lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

fn same_len(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::LengthMismatch(a, b))
    }
}

/// `(min_i r_i/p_i, max_i r_i/p_i)`.
pub fn ratio_extremes(p: &ProbDist, r: &ProbDist) -> Result<(f64, f64)> {
    same_len(p.len(), r.len())?;
    Ok(p.weights()
        .iter()
        .zip(r.weights())
        .map(|(a, b)| b / a)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| {
            (lo.min(t), hi.max(t))
        }))
}

/// The generalized Jensen gap `Σ p_j f(x_j) - f(ψ⁻¹(Σ p_j ψ(x_j)))`.
pub fn jensen_gap<F>(f: F, psi: &GeneratorPsi, xs: &[f64], p: &ProbDist) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let m = quasilinear_mean(psi, xs, p)?;
    let avg: f64 = p.weights().iter().zip(xs).map(|(w, &x)| w * f(x)).sum();
    Ok(avg - f(m))
}

/// `min(r/p) T(f,x,p) <= T(f,x,r) <= max(r/p) T(f,x,p)` where T is the
/// generalized Jensen gap.
///
/// Assumes `f ∘ ψ⁻¹` is convex; see [`ratio_sandwich_validated`].
pub fn ratio_sandwich<F>(
    f: F,
    psi: &GeneratorPsi,
    xs: &[f64],
    p: &ProbDist,
    r: &ProbDist,
) -> Result<BoundReport>
where
    F: Fn(f64) -> f64,
{
    let (lo, hi) = ratio_extremes(p, r)?;
    let gap_p = jensen_gap(&f, psi, xs, p)?;
    let gap_r = jensen_gap(&f, psi, xs, r)?;
    Ok(BoundReport::new(lo * gap_p, gap_r, hi * gap_p))
}

const VALIDATION_LAMBDAS: [f64; 9] = [0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0];

fn require_compatible<F>(f: F, psi: &GeneratorPsi, grid: &[f64]) -> Result<()>
where
    F: Fn(f64) -> f64,
{
    let c = check_psi_convexity(f, psi, grid, &VALIDATION_LAMBDAS)?;
    if c.holds {
        Ok(())
    } else {
        let (a, b, lam) = c.witness;
        Err(Error::Hypothesis(format!(
            "f is not convex relative to psi={} at (a={a}, b={b}, lambda={lam})",
            psi.label()
        )))
    }
}

/// [`ratio_sandwich`] after a sampled check of the compatibility hypothesis
/// on the points `xs`.
pub fn ratio_sandwich_validated<F>(
    f: F,
    psi: &GeneratorPsi,
    xs: &[f64],
    p: &ProbDist,
    r: &ProbDist,
) -> Result<BoundReport>
where
    F: Fn(f64) -> f64,
{
    require_compatible(&f, psi, xs)?;
    ratio_sandwich(f, psi, xs, p, r)
}

/// The bracketed factor shared by the quasilinear/Tsallis bounds:
/// `ln_q ψ⁻¹((1/n) Σ ψ(1/r_j)) - (1/n) Σ ln_q(1/r_j)`.
fn uniform_gap(psi: &GeneratorPsi, r: &ProbDist, q: EntropicIndex) -> Result<f64> {
    let n = r.len();
    let inv: Vec<f64> = r.weights().iter().map(|w| 1.0 / w).collect();
    let u = ProbDist::uniform(n)?;
    let m = quasilinear_mean(psi, &inv, &u)?;
    let avg = inv.iter().map(|&x| ln_q(x, q)).sum::<f64>() / n as f64;
    Ok(ln_q(m, q) - avg)
}

/// Bounds on `I_q^ψ(r) - H_q(r)` by `n·min r` and `n·max r` times the gap
/// at the uniform distribution.
///
/// Assumes `-ln_q ∘ ψ⁻¹` is convex (true for identity, `lnq` and `power`
/// at every q, and for `log` when q >= 1).
pub fn quasilinear_vs_tsallis_bounds(
    psi: &GeneratorPsi,
    r: &ProbDist,
    q: EntropicIndex,
) -> Result<BoundReport> {
    let n = r.len() as f64;
    let braced = uniform_gap(psi, r, q)?;
    let value = tsallis_quasilinear_entropy(psi, r, q)? - tsallis_entropy(r, q);
    Ok(BoundReport::new(
        n * r.min() * braced,
        value,
        n * r.max() * braced,
    ))
}

/// [`quasilinear_vs_tsallis_bounds`] after checking the compatibility of
/// `-ln_q` with ψ on the points `1/r_j`.
pub fn quasilinear_vs_tsallis_bounds_validated(
    psi: &GeneratorPsi,
    r: &ProbDist,
    q: EntropicIndex,
) -> Result<BoundReport> {
    let grid: Vec<f64> = r.weights().iter().map(|w| 1.0 / w).collect();
    require_compatible(|x| -ln_q(x, q), psi, &grid)?;
    quasilinear_vs_tsallis_bounds(psi, r, q)
}

/// Two-sided refinement of `0 <= H_q(r) <= ln_q n`: bounds on
/// `ln_q n - H_q(r)`.
pub fn refined_maxent_bounds(r: &ProbDist, q: EntropicIndex) -> BoundReport {
    let n = r.len();
    let nf = n as f64;
    let inv_sum: f64 = r.weights().iter().map(|w| 1.0 / w).sum();
    let avg = r.weights().iter().map(|&w| ln_q(1.0 / w, q)).sum::<f64>() / nf;
    let braced = ln_q(inv_sum / nf, q) - avg;
    let value = ln_q(nf, q) - tsallis_entropy(r, q);
    BoundReport::new(nf * r.min() * braced, value, nf * r.max() * braced)
}

/// `t_j = p_j² / r_j`.
pub fn squared_ratio_weights(p: &ProbDist, r: &ProbDist) -> Result<IncompleteDist> {
    same_len(p.len(), r.len())?;
    IncompleteDist::new(
        p.weights()
            .iter()
            .zip(r.weights())
            .map(|(a, b)| a * a / b)
            .collect(),
    )
}

/// Bounds on `D_f(p||r)` by `min/max(r/p)` times
/// `D̃_{f*}(t||p) - f(Σ t_j)` with `t_j = p_j²/r_j`.
pub fn f_divergence_sandwich(
    f: &ConvexGenerator,
    p: &ProbDist,
    r: &ProbDist,
) -> Result<BoundReport> {
    let (lo, hi) = ratio_extremes(p, r)?;
    let t = squared_ratio_weights(p, r)?;
    let f_star = dual_generator(f);
    let pw = IncompleteDist::from(p.clone());
    let factor = incomplete_f_divergence(&f_star, &t, &pw)? - f.eval(t.total());
    let value = f_divergence(f, p, r)?;
    Ok(BoundReport::new(lo * factor, value, hi * factor))
}

/// The `f = -log` instance written with KL divergences: bounds on
/// `D_1(r||p)` by `min/max(r/p) (log Σ t_j - D_1(p||r))`.
pub fn reverse_kl_sandwich(p: &ProbDist, r: &ProbDist) -> Result<BoundReport> {
    let (lo, hi) = ratio_extremes(p, r)?;
    let t = squared_ratio_weights(p, r)?;
    let factor = t.total().ln() - kl_divergence(p, r)?;
    let value = kl_divergence(r, p)?;
    Ok(BoundReport::new(lo * factor, value, hi * factor))
}

/// `Σ_{i<j} p_i p_j (x_j - x_i)²` and `Σ p_j (x_j - x̄)²`, computed separately.
pub fn pairwise_spread_forms(xs: &[f64], p: &ProbDist) -> Result<(f64, f64)> {
    same_len(xs.len(), p.len())?;
    let w = p.weights();
    let mut pairwise = 0.0;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let d = xs[j] - xs[i];
            pairwise += w[i] * w[j] * d * d;
        }
    }
    let mean: f64 = w.iter().zip(xs).map(|(a, x)| a * x).sum();
    let variance = w
        .iter()
        .zip(xs)
        .map(|(a, x)| a * (x - mean) * (x - mean))
        .sum();
    Ok((pairwise, variance))
}

/// The weighted spread `Σ_{i<j} p_i p_j (x_j - x_i)²`, which equals the
/// weighted variance. Both forms are evaluated; debug builds assert they
/// agree to 1e-10 relative.
pub fn pairwise_spread(xs: &[f64], p: &ProbDist) -> Result<f64> {
    let (pairwise, variance) = pairwise_spread_forms(xs, p)?;
    debug_assert!(
        (pairwise - variance).abs() <= 1e-10 * (1e-300 + pairwise.abs().max(variance.abs())),
        "pairwise {pairwise} vs variance {variance}"
    );
    Ok(variance)
}

/// Both sides of Lagrange's identity
/// `(Σa²)(Σb²) - (Σab)² = Σ_{i<j} (a_i b_j - a_j b_i)²`.
pub fn lagrange_identity(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    same_len(a.len(), b.len())?;
    let aa: f64 = a.iter().map(|x| x * x).sum();
    let bb: f64 = b.iter().map(|x| x * x).sum();
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let mut rhs = 0.0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let c = a[i] * b[j] - a[j] * b[i];
            rhs += c * c;
        }
    }
    Ok((aa * bb - ab * ab, rhs))
}

fn check_in_range(range: &SecondDerivativeRange, xs: &[f64]) -> Result<()> {
    match xs.iter().find(|&&x| !range.contains(x)) {
        Some(&x) => Err(Error::Domain {
            what: "point outside the interval of the second-derivative range",
            value: x,
        }),
        None => Ok(()),
    }
}

/// `(m/2) Σ_{i<j} p_i p_j (x_j - x_i)² <= Σ p f(x) - f(Σ p x) <= (M/2) Σ_{i<j} ...`
///
/// The caller warrants `m <= f'' <= M` on `range`; all points must lie in it.
pub fn smooth_jensen_sandwich<F>(
    f: F,
    range: &SecondDerivativeRange,
    xs: &[f64],
    p: &ProbDist,
) -> Result<BoundReport>
where
    F: Fn(f64) -> f64,
{
    same_len(xs.len(), p.len())?;
    check_in_range(range, xs)?;
    let gap = arithmetic_gap(&f, xs, p);
    let (pairwise, _) = pairwise_spread_forms(xs, p)?;
    Ok(BoundReport::new(
        0.5 * range.m * pairwise,
        gap,
        0.5 * range.big_m * pairwise,
    ))
}

/// [`smooth_jensen_sandwich`] with the spread written as a weighted variance.
pub fn smooth_jensen_variance_sandwich<F>(
    f: F,
    range: &SecondDerivativeRange,
    xs: &[f64],
    p: &ProbDist,
) -> Result<BoundReport>
where
    F: Fn(f64) -> f64,
{
    same_len(xs.len(), p.len())?;
    check_in_range(range, xs)?;
    let gap = arithmetic_gap(&f, xs, p);
    let (_, variance) = pairwise_spread_forms(xs, p)?;
    Ok(BoundReport::new(
        0.5 * range.m * variance,
        gap,
        0.5 * range.big_m * variance,
    ))
}

fn arithmetic_gap<F: Fn(f64) -> f64>(f: F, xs: &[f64], p: &ProbDist) -> f64 {
    let w = p.weights();
    let mean: f64 = w.iter().zip(xs).map(|(a, x)| a * x).sum();
    let avg: f64 = w.iter().zip(xs).map(|(a, &x)| a * f(x)).sum();
    avg - f(mean)
}

/// Arithmetic minus geometric mean, bounded by the weighted variance over
/// `2·max x` and `2·min x`.
pub fn cartwright_field(xs: &[f64], p: &ProbDist) -> Result<BoundReport> {
    same_len(xs.len(), p.len())?;
    if let Some(&x) = xs.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Domain {
            what: "arithmetic-geometric mean bounds need positive points",
            value: x,
        });
    }
    let w = p.weights();
    let am: f64 = w.iter().zip(xs).map(|(a, x)| a * x).sum();
    let gm = w.iter().zip(xs).map(|(a, x)| a * x.ln()).sum::<f64>().exp();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (_, variance) = pairwise_spread_forms(xs, p)?;
    Ok(BoundReport::new(
        variance / (2.0 * hi),
        am - gm,
        variance / (2.0 * lo),
    ))
}

/// The exact range of `f''(x) = q x^{-q-1}` for `f = -ln_q` over the hull of
/// the points `1/p_j` and `1/r_j`.
///
/// With c ranging over all components of p and r, the interval is
/// `[1/max c, 1/min c]`, `m = q (min c)^{q+1}` and `M = q (max c)^{q+1}`.
pub fn tightest_constants(
    p: &ProbDist,
    r: &ProbDist,
    q: EntropicIndex,
) -> Result<SecondDerivativeRange> {
    same_len(p.len(), r.len())?;
    let qv = q.value();
    if qv == 0.0 {
        return Err(Error::DegenerateRange(
            "q = 0: -ln_q is affine and its second derivative vanishes".into(),
        ));
    }
    let cmin = p.min().min(r.min());
    let cmax = p.max().max(r.max());
    SecondDerivativeRange::new(
        qv * cmin.powf(qv + 1.0),
        qv * cmax.powf(qv + 1.0),
        1.0 / cmax,
        1.0 / cmin,
    )
}

/// The combined Tsallis cross-entropy chain and the two intermediate chains
/// it is assembled from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossEntropySandwich {
    /// Bounds on `Σ p ln_q(1/r) - Σ p ln_q(1/p)`.
    pub combined: BoundReport,
    /// Bounds on `ln_q(Σ p/r) - Σ p ln_q(1/r)` by `(m/2, M/2)` times the spread of `1/r`.
    pub cross: BoundReport,
    /// Bounds on `ln_q n - Σ p ln_q(1/p)` by `(m/2, M/2)` times the spread of `1/p`.
    pub own: BoundReport,
}

fn cross_entropy_chain<L>(
    p: &ProbDist,
    r: &ProbDist,
    m: f64,
    big_m: f64,
    log: L,
) -> Result<CrossEntropySandwich>
where
    L: Fn(f64) -> f64,
{
    same_len(p.len(), r.len())?;
    if !(0.0 <= m && m <= big_m) {
        return Err(Error::DegenerateRange(format!(
            "need 0 <= m <= M, got m = {m}, M = {big_m}"
        )));
    }
    let n = p.len() as f64;
    let inv_p: Vec<f64> = p.weights().iter().map(|w| 1.0 / w).collect();
    let inv_r: Vec<f64> = r.weights().iter().map(|w| 1.0 / w).collect();
    let (_, spread_p) = pairwise_spread_forms(&inv_p, p)?;
    let (_, spread_r) = pairwise_spread_forms(&inv_r, p)?;

    let pw = p.weights();
    let cross_entropy: f64 = pw.iter().zip(&inv_r).map(|(a, &x)| a * log(x)).sum();
    let own_entropy: f64 = pw.iter().zip(&inv_p).map(|(a, &x)| a * log(x)).sum();
    let log_ratio_sum = log(pw.iter().zip(&inv_r).map(|(a, x)| a * x).sum());
    let log_n = log(n);

    let cross = BoundReport::new(
        0.5 * m * spread_r,
        log_ratio_sum - cross_entropy,
        0.5 * big_m * spread_r,
    );
    let own = BoundReport::new(
        0.5 * m * spread_p,
        log_n - own_entropy,
        0.5 * big_m * spread_p,
    );
    let base = log_ratio_sum - log_n;
    let combined = BoundReport::new(
        base + 0.5 * m * spread_p - 0.5 * big_m * spread_r,
        cross_entropy - own_entropy,
        base + 0.5 * big_m * spread_p - 0.5 * m * spread_r,
    );
    Ok(CrossEntropySandwich {
        combined,
        cross,
        own,
    })
}

/// Bounds on `Σ p_j ln_q(1/r_j) - Σ p_j ln_q(1/p_j)`.
///
/// `mq` and `big_mq` must bound `q x^{-q-1}` on an interval holding every
/// `1/p_j` and `1/r_j`; [`tightest_constants`] gives the sharpest pair.
pub fn tsallis_cross_entropy_sandwich(
    p: &ProbDist,
    r: &ProbDist,
    q: EntropicIndex,
    mq: f64,
    big_mq: f64,
) -> Result<CrossEntropySandwich> {
    cross_entropy_chain(p, r, mq, big_mq, |x| ln_q(x, q))
}

/// The q = 1 case, with natural logarithms and `m_1 <= x^{-2} <= M_1`.
pub fn shannon_cross_entropy_sandwich(
    p: &ProbDist,
    r: &ProbDist,
    m1: f64,
    big_m1: f64,
) -> Result<CrossEntropySandwich> {
    cross_entropy_chain(p, r, m1, big_m1, f64::ln)
}
