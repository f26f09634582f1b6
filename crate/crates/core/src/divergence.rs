//! Relative entropies and Csiszár f-divergences.

use std::fmt;
use std::sync::Arc;

use crate::bounds::SecondDerivativeRange;
use crate::dist::{IncompleteDist, ProbDist};
use crate::qmath::{ln_q, q_exp, EntropicIndex};
use crate::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A convex `f` on `(0, ∞)` with `f(1) = 0`.
#[derive(Clone)]
pub struct ConvexGenerator {
    label: String,
    eval: ScalarFn,
    second_derivative: Option<SecondDerivativeRange>,
}

impl fmt::Debug for ConvexGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexGenerator")
            .field("label", &self.label)
            .field("second_derivative", &self.second_derivative)
            .finish()
    }
}

/// Labels accepted by [`ConvexGenerator::from_label`].
pub const F_LABELS: [&str; 4] = ["tsallis", "xlogx", "neglog", "neglnq"];

impl ConvexGenerator {
    /// `f(x) = -x ln_q(1/x)`, whose f-divergence is the Tsallis relative entropy.
    pub fn tsallis(q: EntropicIndex) -> Self {
        Self::trusted("tsallis", move |x| -x * ln_q(1.0 / x, q))
    }

    /// `f(x) = x log x`, whose f-divergence is the KL divergence.
    pub fn x_log_x() -> Self {
        Self::trusted("xlogx", |x| x * x.ln())
    }

    /// `f(x) = -log x`.
    pub fn neg_log() -> Self {
        Self::trusted("neglog", |x| -x.ln())
    }

    /// `f(x) = -ln_q x`.
    pub fn neg_lnq(q: EntropicIndex) -> Self {
        Self::trusted("neglnq", move |x| -ln_q(x, q))
    }

    pub fn from_label(label: &str, q: EntropicIndex) -> Result<Self> {
        match label {
            "tsallis" => Ok(Self::tsallis(q)),
            "xlogx" | "kl" => Ok(Self::x_log_x()),
            "neglog" => Ok(Self::neg_log()),
            "neglnq" => Ok(Self::neg_lnq(q)),
            other => Err(Error::InvalidGenerator {
                label: other.into(),
                reason: format!("unknown label; expected one of {F_LABELS:?}"),
            }),
        }
    }

    fn trusted<F>(label: &str, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ConvexGenerator {
            label: label.into(),
            eval: Arc::new(f),
            second_derivative: None,
        }
    }

    /// A user-supplied generator, checked for `f(1) = 0` and sampled midpoint
    /// convexity on `{2^{k/2} : k = -40..40}`.
    pub fn custom<F>(label: &str, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let g = Self::trusted(label, f);
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidGenerator {
            label: self.label.clone(),
            reason,
        };
        let at_one = self.eval(1.0);
        if at_one.abs() > 1e-12 {
            return Err(bad(format!("f(1) = {at_one}, expected 0")));
        }
        let grid: Vec<f64> = (-40..=40).map(|k| 2f64.powf(k as f64 / 2.0)).collect();
        for (i, &a) in grid.iter().enumerate() {
            for &b in &grid[i + 1..] {
                let mid = self.eval(0.5 * (a + b));
                let chord = 0.5 * (self.eval(a) + self.eval(b));
                if mid > chord + 1e-10 * (1.0 + chord.abs()) {
                    return Err(bad(format!("midpoint convexity fails on [{a}, {b}]")));
                }
            }
        }
        Ok(())
    }

    /// Attaches a known range of `f''` over an interval.
    pub fn with_second_derivative(mut self, range: SecondDerivativeRange) -> Self {
        self.second_derivative = Some(range);
        self
    }

    pub fn second_derivative(&self) -> Option<&SecondDerivativeRange> {
        self.second_derivative.as_ref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }
}

fn same_len(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::LengthMismatch(a, b))
    }
}

/// Tsallis relative entropy `-Σ p_j ln_q(r_j/p_j)`; KL divergence at q = 1.
pub fn tsallis_relative(p: &ProbDist, r: &ProbDist, q: EntropicIndex) -> Result<f64> {
    same_len(p.len(), r.len())?;
    Ok(-p
        .weights()
        .iter()
        .zip(r.weights())
        .map(|(&a, &b)| a * ln_q(b / a, q))
        .sum::<f64>())
}

/// `Σ p_j log(p_j / r_j)`.
pub fn kl_divergence(p: &ProbDist, r: &ProbDist) -> Result<f64> {
    same_len(p.len(), r.len())?;
    Ok(p.weights()
        .iter()
        .zip(r.weights())
        .map(|(&a, &b)| a * (a / b).ln())
        .sum())
}

/// Rényi relative entropy `log(Σ p_j^q r_j^{1-q}) / (q - 1)`; KL at q = 1.
///
/// No clamping: for q < 1 the value is returned exactly as the formula gives.
pub fn renyi_relative(p: &ProbDist, r: &ProbDist, q: EntropicIndex) -> Result<f64> {
    same_len(p.len(), r.len())?;
    if !q.deformed() {
        return kl_divergence(p, r);
    }
    // Σ p^q r^{1-q} - 1 = Σ p ((r/p)^{1-q} - 1)
    let a = 1.0 - q.value();
    let excess: f64 = p
        .weights()
        .iter()
        .zip(r.weights())
        .map(|(&pp, &rr)| pp * (a * (rr / pp).ln()).exp_m1())
        .sum();
    Ok(excess.ln_1p() / -a)
}

/// `Σ r_j f(p_j / r_j)`.
pub fn f_divergence(f: &ConvexGenerator, p: &ProbDist, r: &ProbDist) -> Result<f64> {
    same_len(p.len(), r.len())?;
    Ok(p.weights()
        .iter()
        .zip(r.weights())
        .map(|(&a, &b)| b * f.eval(a / b))
        .sum())
}

/// The dual generator `f*(t) = t f(1/t)`.
pub fn dual_generator(f: &ConvexGenerator) -> ConvexGenerator {
    let inner = f.eval.clone();
    let label = match f.label.strip_prefix("dual(").and_then(|s| s.strip_suffix(')')) {
        Some(orig) => orig.to_string(),
        None => format!("dual({})", f.label),
    };
    ConvexGenerator {
        label,
        eval: Arc::new(move |t| t * inner(1.0 / t)),
        second_derivative: None,
    }
}

/// `Σ a_j f*(b_j / a_j)` for weight vectors without a sum constraint.
pub fn incomplete_f_divergence(
    f_star: &ConvexGenerator,
    a: &IncompleteDist,
    b: &IncompleteDist,
) -> Result<f64> {
    same_len(a.len(), b.len())?;
    Ok(a.weights()
        .iter()
        .zip(b.weights())
        .map(|(&x, &y)| x * f_star.eval(y / x))
        .sum())
}

/// Both sides of `exp R_q(p||r) = exp_{2-q} D_q(p||r)`.
///
/// Defined for `0 <= q <= 2`.
pub fn renyi_tsallis_relative_bridge(
    p: &ProbDist,
    r: &ProbDist,
    q: EntropicIndex,
) -> Result<(f64, f64)> {
    let dual = q.dual()?;
    let lhs = renyi_relative(p, r, q)?.exp();
    let rhs = q_exp(tsallis_relative(p, r, q)?, dual)?;
    Ok((lhs, rhs))
}

/// `((1 - p_j) / (n - 1))_j`, a distribution whenever n >= 2.
#[cfg(test)]
pub(crate) fn complement(p: &ProbDist) -> Result<ProbDist> {
    let n = p.len();
    if n < 2 {
        return Err(Error::Dimension(
            "complement needs at least two components".into(),
        ));
    }
    let k = (n - 1) as f64;
    ProbDist::new(p.weights().iter().map(|w| (1.0 - w) / k).collect())
}

/// Both sides of
/// `Σ (1-p_j) log(1/(1-p_j)) <= Σ (1-p_j) log(1/(1-r_j))`,
/// the information inequality applied to the complemented distributions.
///
/// Every component must be strictly below 1, which needs n >= 2.
pub fn complement_cross_entropy(p: &ProbDist, r: &ProbDist) -> Result<(f64, f64)> {
    same_len(p.len(), r.len())?;
    if p.len() < 2 {
        return Err(Error::Dimension(
            "components must be < 1, which needs n >= 2".into(),
        ));
    }
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (&a, &b) in p.weights().iter().zip(r.weights()) {
        let c = 1.0 - a;
        lhs -= c * (-a).ln_1p();
        rhs -= c * (-b).ln_1p();
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{coarsen, make_dist, Partition};
    use proptest::prelude::*;

    fn q(v: f64) -> EntropicIndex {
        EntropicIndex::new(v).unwrap()
    }

    fn pr() -> (ProbDist, ProbDist) {
        (
            make_dist(&[0.5, 0.5]).unwrap(),
            make_dist(&[0.25, 0.75]).unwrap(),
        )
    }

    const KL_PR: f64 = 0.143_841_036_225_890_46;

    #[test]
    fn tsallis_relative_examples() {
        let (p, r) = pr();
        assert_eq!(tsallis_relative(&r, &r, q(2.0)).unwrap(), 0.0);
        assert!((tsallis_relative(&p, &r, q(2.0)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let direct: f64 = -p
            .weights()
            .iter()
            .zip(r.weights())
            .map(|(a, b)| a * (b / a).ln())
            .sum::<f64>();
        assert_eq!(tsallis_relative(&p, &r, q(1.0)).unwrap(), direct);
        assert!(matches!(
            tsallis_relative(&p, &make_dist(&[1.0]).unwrap(), q(2.0)),
            Err(Error::LengthMismatch(2, 1))
        ));
    }

    #[test]
    fn kl_and_renyi_examples() {
        let (p, r) = pr();
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        assert!((kl_divergence(&p, &r).unwrap() - KL_PR).abs() < 1e-15);
        assert_eq!(renyi_relative(&r, &r, q(2.0)).unwrap(), 0.0);
        let v = renyi_relative(&p, &r, q(2.0)).unwrap();
        assert!((v - 0.287_682_072_451_780_9).abs() < 1e-15);
        assert_eq!(renyi_relative(&p, &r, q(1.0)).unwrap(), kl_divergence(&p, &r).unwrap());
    }

    #[test]
    fn f_divergence_examples() {
        let (p, r) = pr();
        for f in [ConvexGenerator::x_log_x(), ConvexGenerator::neg_log(), ConvexGenerator::tsallis(q(0.5))] {
            assert_eq!(f_divergence(&f, &r, &r).unwrap(), 0.0);
        }
        let v = f_divergence(&ConvexGenerator::x_log_x(), &p, &r).unwrap();
        assert!((v - KL_PR).abs() < 1e-15);
        let v = f_divergence(&ConvexGenerator::tsallis(q(2.0)), &p, &r).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn generator_validation() {
        for f in [
            ConvexGenerator::x_log_x(),
            ConvexGenerator::neg_log(),
            ConvexGenerator::tsallis(q(0.0)),
            ConvexGenerator::tsallis(q(2.0)),
            ConvexGenerator::neg_lnq(q(3.0)),
        ] {
            f.validate().unwrap();
            dual_generator(&f).validate().unwrap();
        }
        assert!(ConvexGenerator::custom("sq", |x| x * x).is_err());
        assert!(ConvexGenerator::custom("concave", |x: f64| x.sqrt() - 1.0).is_err());
        assert!(ConvexGenerator::custom("chi2", |x| (x - 1.0) * (x - 1.0)).is_ok());
    }

    #[test]
    fn dual_examples() {
        let d = dual_generator(&ConvexGenerator::x_log_x());
        let d2 = dual_generator(&ConvexGenerator::neg_log());
        let f = ConvexGenerator::tsallis(q(1.7));
        let ff = dual_generator(&dual_generator(&f));
        assert_eq!(ff.label(), "tsallis");
        for k in -20..=20 {
            let t = 1.3f64.powi(k);
            assert!((d.eval(t) + t.ln()).abs() < 1e-12 * (1.0 + t.ln().abs()));
            assert!((d2.eval(t) - t * t.ln()).abs() < 1e-12 * (1.0 + (t * t.ln()).abs()));
            assert!((ff.eval(t) - f.eval(t)).abs() < 1e-12 * (1.0 + f.eval(t).abs()));
        }
    }

    #[test]
    fn incomplete_examples() {
        let f_star = ConvexGenerator::neg_log();
        let a = IncompleteDist::new(vec![1.0, 1.0]).unwrap();
        let b = IncompleteDist::new(vec![2.0, 2.0]).unwrap();
        assert_eq!(incomplete_f_divergence(&f_star, &a, &a).unwrap(), 0.0);
        let v = incomplete_f_divergence(&f_star, &a, &b).unwrap();
        assert!((v + 2.0 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn bridge_examples() {
        let (p, r) = pr();
        let (l, rr) = renyi_tsallis_relative_bridge(&r, &r, q(1.5)).unwrap();
        assert_eq!((l, rr), (1.0, 1.0));
        let (l, rr) = renyi_tsallis_relative_bridge(&p, &r, q(2.0)).unwrap();
        assert!((l - 4.0 / 3.0).abs() < 1e-15 && (rr - 4.0 / 3.0).abs() < 1e-15);
        let (l, rr) = renyi_tsallis_relative_bridge(&p, &r, q(1.0)).unwrap();
        assert!((l - KL_PR.exp()).abs() < 1e-15 && (rr - KL_PR.exp()).abs() < 1e-15);
        assert!(renyi_tsallis_relative_bridge(&p, &r, q(2.5)).is_err());
    }

    #[test]
    fn complement_construction() {
        let p = make_dist(&[0.1, 0.2, 0.7]).unwrap();
        let c = complement(&p).unwrap();
        assert!((c.weights()[0] - 0.45).abs() < 1e-15);
        assert!(complement(&make_dist(&[1.0]).unwrap()).is_err());
    }

    fn normalize(raw: &[f64]) -> ProbDist {
        let s: f64 = raw.iter().sum();
        ProbDist::new(raw.iter().map(|x| x / s).collect()).unwrap()
    }

    fn pair() -> impl Strategy<Value = (ProbDist, ProbDist)> {
        (2usize..12).prop_flat_map(|n| {
            (
                prop::collection::vec(1e-3f64..1.0, n),
                prop::collection::vec(1e-3f64..1.0, n),
            )
                .prop_map(|(a, b)| (normalize(&a), normalize(&b)))
        })
    }

    proptest! {
        #[test]
        fn nonnegative((p, r) in pair(), qv in 0.0f64..4.0) {
            prop_assert!(tsallis_relative(&p, &r, q(qv)).unwrap() >= -1e-12);
            prop_assert!(kl_divergence(&p, &r).unwrap() >= -1e-12);
            prop_assert!(f_divergence(&ConvexGenerator::neg_log(), &p, &r).unwrap() >= -1e-12);
        }

        #[test]
        fn bridge_holds((p, r) in pair(), qv in 0.0f64..2.0) {
            let (l, rr) = renyi_tsallis_relative_bridge(&p, &r, q(qv)).unwrap();
            prop_assert!((l - rr).abs() <= 1e-10 * l.max(rr));
        }

        #[test]
        fn tsallis_generator_matches((p, r) in pair(), qv in 0.0f64..4.0) {
            let a = f_divergence(&ConvexGenerator::tsallis(q(qv)), &p, &r).unwrap();
            let b = tsallis_relative(&p, &r, q(qv)).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }

        #[test]
        fn coarsening_monotone((p, r) in pair(), cut in 1usize..11, qv in 0.0f64..2.0) {
            let n = p.len();
            let cut = cut.min(n - 1);
            let part = Partition::new(vec![(cut..n).collect(), (0..cut).collect()], n).unwrap();
            let (pc, rc) = (coarsen(&p, &part).unwrap(), coarsen(&r, &part).unwrap());
            let qi = q(qv);
            let (fine, coarse) = (renyi_relative(&p, &r, qi).unwrap(), renyi_relative(&pc, &rc, qi).unwrap());
            prop_assert!(fine >= coarse - 1e-12 * (1.0 + fine.abs()));
            let (fine, coarse) = (tsallis_relative(&p, &r, qi).unwrap(), tsallis_relative(&pc, &rc, qi).unwrap());
            prop_assert!(fine >= coarse - 1e-12 * (1.0 + fine.abs()));
        }

        #[test]
        fn duality_bookkeeping((p, r) in pair()) {
            // Σ p f(p/r) = Σ t f*(p/t) with t = p²/r
            for f in [ConvexGenerator::x_log_x(), ConvexGenerator::neg_log(), ConvexGenerator::tsallis(q(2.0))] {
                let fs = dual_generator(&f);
                let lhs: f64 = p.weights().iter().zip(r.weights()).map(|(a, b)| a * f.eval(a / b)).sum();
                let t: Vec<f64> = p.weights().iter().zip(r.weights()).map(|(a, b)| a * a / b).collect();
                let rhs = incomplete_f_divergence(&fs, &IncompleteDist::new(t).unwrap(), &IncompleteDist::from(p.clone())).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
            }
        }

        #[test]
        fn complement_inequality((p, r) in pair()) {
            let (lhs, rhs) = complement_cross_entropy(&p, &r).unwrap();
            prop_assert!(lhs <= rhs + 1e-12 * (1.0 + rhs.abs()));
            // the gap is (n-1) KL of the complements
            let gap = (p.len() - 1) as f64
                * kl_divergence(&complement(&p).unwrap(), &complement(&r).unwrap()).unwrap();
            prop_assert!(((rhs - lhs) - gap).abs() <= 1e-10 * (1.0 + gap));
        }
    }
}
