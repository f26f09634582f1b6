//! Quasi-arithmetic means `ψ⁻¹(Σ p_j ψ(x_j))` and the entropies and relative
//! entropies they generate.
//!
//! A [`GeneratorPsi`] packages a strictly monotonic ψ with a closed-form
//! inverse. The built-ins are `identity`, `log`, `lnq` (the q-logarithm) and
//! `power` (x ↦ x^{1-q}).

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::dist::ProbDist;
use crate::qmath::{ln_q, q_exp, EntropicIndex};
use crate::{scaled_excess, Error, Result, CHECK_TOL};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Concave,
    Convex,
    /// Affine: both concave and convex.
    Linear,
    Unknown,
}

/// Where a generator's forward map is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PsiDomain {
    /// `(0, ∞)`
    Positive,
    /// The whole real line.
    Real,
}

impl PsiDomain {
    pub fn contains(self, x: f64) -> bool {
        match self {
            PsiDomain::Positive => x > 0.0 && x.is_finite(),
            PsiDomain::Real => x.is_finite(),
        }
    }
}

/// A continuous strictly monotonic ψ with its inverse.
#[derive(Clone)]
pub struct GeneratorPsi {
    label: String,
    forward: ScalarFn,
    inverse: ScalarFn,
    direction: Direction,
    shape: Shape,
    domain: PsiDomain,
}

impl fmt::Debug for GeneratorPsi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorPsi")
            .field("label", &self.label)
            .field("direction", &self.direction)
            .field("shape", &self.shape)
            .field("domain", &self.domain)
            .finish()
    }
}

/// Labels accepted by [`GeneratorPsi::from_label`].
pub const PSI_LABELS: [&str; 4] = ["identity", "log", "lnq", "power"];

impl GeneratorPsi {
    pub fn identity() -> Self {
        GeneratorPsi {
            label: "identity".into(),
            forward: Arc::new(|x| x),
            inverse: Arc::new(|y| y),
            direction: Direction::Increasing,
            shape: Shape::Linear,
            domain: PsiDomain::Real,
        }
    }

    pub fn log() -> Self {
        GeneratorPsi {
            label: "log".into(),
            forward: Arc::new(f64::ln),
            inverse: Arc::new(f64::exp),
            direction: Direction::Increasing,
            shape: Shape::Concave,
            domain: PsiDomain::Positive,
        }
    }

    /// ψ = ln_q. Coincides with `log` at q = 1.
    pub fn lnq(q: EntropicIndex) -> Self {
        GeneratorPsi {
            label: "lnq".into(),
            forward: Arc::new(move |x| ln_q(x, q)),
            inverse: Arc::new(move |y| q_exp(y, q).unwrap_or(f64::NAN)),
            direction: Direction::Increasing,
            shape: if q.value() > 0.0 {
                Shape::Concave
            } else {
                Shape::Linear
            },
            domain: PsiDomain::Positive,
        }
    }

    /// ψ(x) = x^{1-q}: increasing and concave for q < 1, decreasing and
    /// convex for q > 1. At q = 1 it is constant, so that index is rejected.
    pub fn power(q: EntropicIndex) -> Result<Self> {
        if !q.deformed() {
            return Err(Error::InvalidGenerator {
                label: "power".into(),
                reason: "x^(1-q) is constant at q = 1".into(),
            });
        }
        let a = 1.0 - q.value();
        let (direction, shape) = if q.value() == 0.0 {
            (Direction::Increasing, Shape::Linear)
        } else if a > 0.0 {
            (Direction::Increasing, Shape::Concave)
        } else {
            (Direction::Decreasing, Shape::Convex)
        };
        Ok(GeneratorPsi {
            label: "power".into(),
            forward: Arc::new(move |x| x.powf(a)),
            inverse: Arc::new(move |y| if y > 0.0 { y.powf(1.0 / a) } else { f64::NAN }),
            direction,
            shape,
            domain: PsiDomain::Positive,
        })
    }

    /// Builds one of the [`PSI_LABELS`] generators.
    pub fn from_label(label: &str, q: EntropicIndex) -> Result<Self> {
        match label {
            "identity" => Ok(Self::identity()),
            "log" => Ok(Self::log()),
            "lnq" => Ok(Self::lnq(q)),
            "power" => Self::power(q),
            other => Err(Error::InvalidGenerator {
                label: other.into(),
                reason: format!("unknown label; expected one of {PSI_LABELS:?}"),
            }),
        }
    }

    /// A user-supplied generator, validated on the grid `{2^k : k = -20..20}`:
    /// the inverse must round-trip to 1e-10 relative and the forward map must
    /// be strictly monotonic in the declared direction.
    pub fn custom<F, G>(
        label: &str,
        forward: F,
        inverse: G,
        direction: Direction,
        shape: Shape,
        domain: PsiDomain,
    ) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let psi = GeneratorPsi {
            label: label.into(),
            forward: Arc::new(forward),
            inverse: Arc::new(inverse),
            direction,
            shape,
            domain,
        };
        psi.validate()?;
        Ok(psi)
    }

    /// Checks the round-trip and monotonicity invariants on the validation
    /// grid `{2^k : k = -20..20}`.
    ///
    /// Grid points where ψ is numerically saturated (local condition number of
    /// the inverse above 1e6, e.g. `ln_q` near its asymptote for large q) are
    /// exempt from the round trip and may tie with their neighbour; at least
    /// half of the grid must be well conditioned.
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidGenerator {
            label: self.label.clone(),
            reason,
        };
        let xs: Vec<f64> = (-20..=20).map(|k| 2f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| self.forward(x)).collect();
        if let Some(i) = ys.iter().position(|y| !y.is_finite()) {
            return Err(bad(format!("forward({}) = {}", xs[i], ys[i])));
        }
        let last = xs.len() - 1;
        let mut checked = 0;
        for i in 0..xs.len() {
            let (lo, hi) = (i.saturating_sub(1), (i + 1).min(last));
            let slope = (ys[hi] - ys[lo]).abs() / ((hi - lo) as f64 * 2f64.ln());
            let cond = ys[i].abs() / slope;
            let saturated = cond.is_nan() || cond > 1e6;
            if !saturated {
                checked += 1;
                let back = self.inverse(ys[i]);
                let round_trips = (back - xs[i]).abs() <= 1e-10 * xs[i] * cond.max(1.0);
                if !round_trips {
                    return Err(bad(format!("inverse(forward({})) = {back}", xs[i])));
                }
            }
            if i > 0 {
                let step = match self.direction {
                    Direction::Increasing => ys[i] - ys[i - 1],
                    Direction::Decreasing => ys[i - 1] - ys[i],
                };
                if step < 0.0 || (step == 0.0 && !saturated) {
                    return Err(bad(format!(
                        "not strictly {:?} at x = {}",
                        self.direction, xs[i]
                    )));
                }
            }
        }
        if 2 * checked < xs.len() {
            return Err(bad("forward is numerically flat on most of the grid".into()));
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn domain(&self) -> PsiDomain {
        self.domain
    }

    #[inline]
    pub fn forward(&self, x: f64) -> f64 {
        (self.forward)(x)
    }

    #[inline]
    pub fn inverse(&self, y: f64) -> f64 {
        (self.inverse)(y)
    }

    /// Concave increasing or convex decreasing: the condition under which the
    /// Tsallis quasilinear relative entropy is non-negative.
    pub fn nonnegative_relative_entropy(&self) -> bool {
        matches!(
            (self.direction, self.shape),
            (Direction::Increasing, Shape::Concave | Shape::Linear)
                | (Direction::Decreasing, Shape::Convex | Shape::Linear)
        )
    }
}

fn weighted_mean(psi: &GeneratorPsi, p: &ProbDist, xs: impl Iterator<Item = f64>) -> Result<f64> {
    let mut acc = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&w, x) in p.weights().iter().zip(xs) {
        if !psi.domain.contains(x) {
            return Err(Error::Domain {
                what: "point outside the generator domain",
                value: x,
            });
        }
        lo = lo.min(x);
        hi = hi.max(x);
        acc += w * psi.forward(x);
    }
    let m = psi.inverse(acc);
    if !m.is_finite() {
        return Err(Error::Domain {
            what: "generator inverse undefined at the weighted average",
            value: acc,
        });
    }
    // the exact mean lies in [min, max]; clamp away roundoff
    Ok(m.clamp(lo, hi))
}

/// The quasilinear mean `ψ⁻¹(Σ p_j ψ(x_j))`.
pub fn quasilinear_mean(psi: &GeneratorPsi, xs: &[f64], p: &ProbDist) -> Result<f64> {
    if xs.len() != p.len() {
        return Err(Error::LengthMismatch(xs.len(), p.len()));
    }
    weighted_mean(psi, p, xs.iter().copied())
}

/// Tsallis quasilinear entropy `ln_q ψ⁻¹(Σ p_j ψ(1/p_j))`.
pub fn tsallis_quasilinear_entropy(
    psi: &GeneratorPsi,
    p: &ProbDist,
    q: EntropicIndex,
) -> Result<f64> {
    let m = weighted_mean(psi, p, p.weights().iter().map(|w| 1.0 / w))?;
    Ok(ln_q(m, q))
}

/// Quasilinear entropy `log ψ⁻¹(Σ p_j ψ(1/p_j))`.
pub fn quasilinear_entropy(psi: &GeneratorPsi, p: &ProbDist) -> Result<f64> {
    let m = weighted_mean(psi, p, p.weights().iter().map(|w| 1.0 / w))?;
    Ok(m.ln())
}

fn ratio_mean(psi: &GeneratorPsi, p: &ProbDist, r: &ProbDist) -> Result<f64> {
    if p.len() != r.len() {
        return Err(Error::LengthMismatch(p.len(), r.len()));
    }
    let ratios = p.weights().iter().zip(r.weights()).map(|(a, b)| b / a);
    weighted_mean(psi, p, ratios)
}

/// Tsallis quasilinear relative entropy `-ln_q ψ⁻¹(Σ p_j ψ(r_j/p_j))`.
pub fn tsallis_quasilinear_relative(
    psi: &GeneratorPsi,
    p: &ProbDist,
    r: &ProbDist,
    q: EntropicIndex,
) -> Result<f64> {
    Ok(-ln_q(ratio_mean(psi, p, r)?, q))
}

/// Quasilinear relative entropy `-log ψ⁻¹(Σ p_j ψ(r_j/p_j))`.
pub fn quasilinear_relative(psi: &GeneratorPsi, p: &ProbDist, r: &ProbDist) -> Result<f64> {
    Ok(-ratio_mean(psi, p, r)?.ln())
}

/// Outcome of a sampled check of
/// `f(ψ⁻¹((1-λ)ψ(a) + λψ(b))) <= (1-λ) f(a) + λ f(b)`.
///
/// `worst_violation` is the largest scale-adjusted excess of the left side
/// over the right side, minus [`CHECK_TOL`]; it is `<= 0` exactly when the
/// hypothesis held at every sampled point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompatibleConvexity {
    pub holds: bool,
    pub worst_violation: f64,
    pub witness: (f64, f64, f64),
}

/// Exhaustively evaluates the compatibility hypothesis on `grid × grid × lambdas`.
///
/// This is a sampled check, not a proof.
pub fn check_psi_convexity<F>(
    f: F,
    psi: &GeneratorPsi,
    grid: &[f64],
    lambdas: &[f64],
) -> Result<CompatibleConvexity>
where
    F: Fn(f64) -> f64,
{
    if grid.is_empty() || lambdas.is_empty() {
        return Err(Error::Empty);
    }
    if let Some(&x) = grid.iter().find(|&&x| !psi.domain.contains(x)) {
        return Err(Error::Domain {
            what: "grid point outside the generator domain",
            value: x,
        });
    }
    let mut worst = f64::NEG_INFINITY;
    let mut witness = (grid[0], grid[0], lambdas[0]);
    for &a in grid {
        let (fa, pa) = (f(a), psi.forward(a));
        for &b in grid {
            let (fb, pb) = (f(b), psi.forward(b));
            for &lam in lambdas {
                let lhs = f(psi.inverse((1.0 - lam) * pa + lam * pb));
                let rhs = (1.0 - lam) * fa + lam * fb;
                let excess = scaled_excess(lhs - rhs, lhs.abs().max(rhs.abs())) - CHECK_TOL;
                if excess > worst {
                    worst = excess;
                    witness = (a, b, lam);
                }
            }
        }
    }
    Ok(CompatibleConvexity {
        holds: worst <= 0.0,
        worst_violation: worst,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::make_dist;
    use crate::entropy::{renyi_entropy, shannon_entropy, tsallis_entropy};
    use proptest::prelude::*;

    fn q(v: f64) -> EntropicIndex {
        EntropicIndex::new(v).unwrap()
    }

    fn half() -> ProbDist {
        make_dist(&[0.5, 0.5]).unwrap()
    }

    #[test]
    fn builtins_validate() {
        GeneratorPsi::identity().validate().unwrap();
        GeneratorPsi::log().validate().unwrap();
        for qv in [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 4.0] {
            GeneratorPsi::lnq(q(qv)).validate().unwrap();
            if qv != 1.0 {
                GeneratorPsi::power(q(qv)).unwrap().validate().unwrap();
            }
        }
        assert!(GeneratorPsi::power(q(1.0)).is_err());
        assert!(GeneratorPsi::from_label("cosh", q(1.0)).is_err());
    }

    #[test]
    fn custom_generators_are_checked() {
        let ok = GeneratorPsi::custom(
            "cube",
            |x| x * x * x,
            f64::cbrt,
            Direction::Increasing,
            Shape::Unknown,
            PsiDomain::Positive,
        );
        assert!(ok.is_ok());
        let wrong_inverse = GeneratorPsi::custom(
            "sq",
            |x| x * x,
            |y| y,
            Direction::Increasing,
            Shape::Convex,
            PsiDomain::Positive,
        );
        assert!(wrong_inverse.is_err());
        let wrong_direction = GeneratorPsi::custom(
            "log",
            f64::ln,
            f64::exp,
            Direction::Decreasing,
            Shape::Concave,
            PsiDomain::Positive,
        );
        assert!(wrong_direction.is_err());
    }

    #[test]
    fn mean_examples() {
        let id = GeneratorPsi::identity();
        assert_eq!(quasilinear_mean(&id, &[1.0, 3.0], &half()).unwrap(), 2.0);
        let lg = GeneratorPsi::log();
        assert!((quasilinear_mean(&lg, &[1.0, 4.0], &half()).unwrap() - 2.0).abs() < 1e-15);
        let p = make_dist(&[0.2, 0.3, 0.5]).unwrap();
        assert_eq!(quasilinear_mean(&lg, &[7.5; 3], &p).unwrap(), 7.5);
        assert!(matches!(
            quasilinear_mean(&lg, &[1.0, -1.0], &half()),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            quasilinear_mean(&id, &[1.0], &half()),
            Err(Error::LengthMismatch(1, 2))
        ));
    }

    #[test]
    fn entropy_examples() {
        let p = make_dist(&[0.25, 0.75]).unwrap();
        let q2 = q(2.0);
        let lnq = GeneratorPsi::lnq(q2);
        let v = tsallis_quasilinear_entropy(&lnq, &p, q2).unwrap();
        assert!((v - tsallis_entropy(&p, q2)).abs() < 1e-15);
        let pw = GeneratorPsi::power(q2).unwrap();
        let v = tsallis_quasilinear_entropy(&pw, &p, q2).unwrap();
        assert!((v - 0.375).abs() < 1e-15);
        let one = make_dist(&[1.0]).unwrap();
        assert_eq!(
            tsallis_quasilinear_entropy(&GeneratorPsi::identity(), &one, q2).unwrap(),
            0.0
        );

        let v = quasilinear_entropy(&GeneratorPsi::log(), &p).unwrap();
        assert!((v - shannon_entropy(&p)).abs() < 1e-15);
        let v = quasilinear_entropy(&pw, &p).unwrap();
        assert!((v - 0.470_003_629_245_735_5).abs() < 1e-15);
        assert_eq!(quasilinear_entropy(&pw, &one).unwrap(), 0.0);
    }

    #[test]
    fn relative_examples() {
        let p = half();
        let r = make_dist(&[0.25, 0.75]).unwrap();
        let q2 = q(2.0);
        let v = tsallis_quasilinear_relative(&GeneratorPsi::lnq(q2), &p, &r, q2).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        for psi in [GeneratorPsi::identity(), GeneratorPsi::log(), GeneratorPsi::lnq(q2)] {
            assert_eq!(tsallis_quasilinear_relative(&psi, &r, &r, q2).unwrap(), 0.0);
            assert_eq!(quasilinear_relative(&psi, &r, &r).unwrap(), 0.0);
        }
        let kl = 0.143_841_036_225_890_46;
        assert!((quasilinear_relative(&GeneratorPsi::log(), &p, &r).unwrap() - kl).abs() < 1e-15);
        let pw = GeneratorPsi::power(q2).unwrap();
        assert!((quasilinear_relative(&pw, &p, &r).unwrap() - (4f64 / 3.0).ln()).abs() < 1e-15);
        assert!(matches!(
            quasilinear_relative(&pw, &p, &make_dist(&[1.0]).unwrap()),
            Err(Error::LengthMismatch(2, 1))
        ));
    }

    #[test]
    fn convexity_check_examples() {
        let id = GeneratorPsi::identity();
        let lams = [0.0, 0.5, 1.0];
        let c = check_psi_convexity(|x: f64| -x.ln(), &id, &[0.5, 1.0, 2.0], &lams).unwrap();
        assert!(c.holds);
        let grid: Vec<f64> = (1..40).map(|k| 0.1 * k as f64).collect();
        let lams: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        for qv in [0.0, 0.5, 2.0, 4.0] {
            let c = check_psi_convexity(|x| -ln_q(x, q(qv)), &id, &grid, &lams).unwrap();
            assert!(c.holds, "q={qv}: {c:?}");
        }
        let c = check_psi_convexity(|x: f64| -x * x, &id, &[0.0, 1.0], &[0.0, 0.5, 1.0]).unwrap();
        assert!(!c.holds);
        assert_eq!(c.witness, (0.0, 1.0, 0.5));
        assert!((c.worst_violation - (0.25 / 1.5 - CHECK_TOL)).abs() < 1e-15);
    }

    #[test]
    fn convexity_check_with_log_generator() {
        // -ln_q(e^y) is convex in y exactly when q >= 1
        let grid: Vec<f64> = (-10..=10).map(|k| 2f64.powi(k)).collect();
        let lams: Vec<f64> = (0..=8).map(|k| k as f64 / 8.0).collect();
        let lg = GeneratorPsi::log();
        for (qv, expect) in [(0.5, false), (1.0, true), (2.0, true)] {
            let c = check_psi_convexity(|x| -ln_q(x, q(qv)), &lg, &grid, &lams).unwrap();
            assert_eq!(c.holds, expect, "q={qv}");
        }
    }

    fn normalize(raw: &[f64]) -> ProbDist {
        let s: f64 = raw.iter().sum();
        ProbDist::new(raw.iter().map(|x| x / s).collect()).unwrap()
    }

    proptest! {
        #[test]
        fn mean_within_range(
            pairs in prop::collection::vec((1e-3f64..1.0, 1e-3f64..1e3), 1..12),
            which in 0usize..4,
            qv in 0.0f64..3.0,
        ) {
            let p = normalize(&pairs.iter().map(|t| t.0).collect::<Vec<_>>());
            let xs: Vec<f64> = pairs.iter().map(|t| t.1).collect();
            let psi = match which {
                0 => GeneratorPsi::identity(),
                1 => GeneratorPsi::log(),
                2 => GeneratorPsi::lnq(q(qv)),
                _ => GeneratorPsi::power(q(qv)).unwrap_or_else(|_| GeneratorPsi::log()),
            };
            let m = quasilinear_mean(&psi, &xs, &p).unwrap();
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(m >= lo && m <= hi);
        }

        #[test]
        fn nonnegativity(raw in prop::collection::vec(1e-3f64..1.0, 2..12), raw_r in prop::collection::vec(1e-3f64..1.0, 12), qv in 0.0f64..4.0) {
            let p = normalize(&raw);
            let r = normalize(&raw_r[..p.len()]);
            let qi = q(qv);
            let mut gens = vec![GeneratorPsi::identity(), GeneratorPsi::log(), GeneratorPsi::lnq(qi)];
            if let Ok(pw) = GeneratorPsi::power(qi) {
                gens.push(pw);
            }
            for psi in &gens {
                prop_assert!(tsallis_quasilinear_entropy(psi, &p, qi).unwrap() >= 0.0);
                prop_assert!(psi.nonnegative_relative_entropy());
                prop_assert!(tsallis_quasilinear_relative(psi, &p, &r, qi).unwrap() >= -1e-12);
            }
        }

        #[test]
        fn limit_in_q_for_fixed_generator(raw in prop::collection::vec(1e-3f64..1.0, 1..12)) {
            let p = normalize(&raw);
            for psi in [GeneratorPsi::identity(), GeneratorPsi::log()] {
                let one = quasilinear_entropy(&psi, &p).unwrap();
                for dq in [-1e-6, 1e-6] {
                    let v = tsallis_quasilinear_entropy(&psi, &p, q(1.0 + dq)).unwrap();
                    prop_assert!((v - one).abs() <= 1e-5);
                }
            }
        }

        #[test]
        fn power_generator_gives_renyi(raw in prop::collection::vec(1e-3f64..1.0, 1..12), qv in 0.0f64..4.0) {
            prop_assume!((qv - 1.0).abs() > 1e-3);
            let p = normalize(&raw);
            let pw = GeneratorPsi::power(q(qv)).unwrap();
            let v = quasilinear_entropy(&pw, &p).unwrap();
            prop_assert!((v - renyi_entropy(&p, q(qv))).abs() <= 1e-10 * (1.0 + v.abs()));
        }
    }
}
