//! Seeded randomized verification of every inequality and identity.
//!
//! Each registered [`TheoremCase`] draws random inputs, evaluates both sides
//! of its statement and reduces the per-trial excess to a [`VerifyReport`].
//! Trial `t` of case `id` draws from a ChaCha8 stream keyed by
//! `(seed, id)` with stream number `t`, so reports do not depend on the
//! order in which trials run or on the number of threads.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::bounds::{
    cartwright_field, f_divergence_sandwich, jensen_gap, lagrange_identity,
    pairwise_spread_forms, quasilinear_vs_tsallis_bounds, ratio_sandwich, refined_maxent_bounds,
    reverse_kl_sandwich, shannon_cross_entropy_sandwich, smooth_jensen_sandwich,
    smooth_jensen_variance_sandwich, squared_ratio_weights, tightest_constants,
    tsallis_cross_entropy_sandwich, BoundReport, SecondDerivativeRange,
};
use crate::dist::{coarsen, power_sum, IncompleteDist, NestedDist, Partition, ProbDist};
use crate::divergence::{
    complement_cross_entropy, dual_generator, incomplete_f_divergence, renyi_relative,
    renyi_tsallis_relative_bridge, tsallis_relative, ConvexGenerator,
};
use crate::entropy::{q_additivity_sides, renyi_entropy, renyi_tsallis_bridge, tsallis_entropy};
use crate::joint::{
    chain_rule_decomposition, conditioning_reduces_entropy_check, han_report,
    tsallis_conditional_entropy, tsallis_joint_entropy, JointDist,
};
use crate::qmath::{ln_q, EntropicIndex};
use crate::quasilinear::{tsallis_quasilinear_entropy, tsallis_quasilinear_relative, GeneratorPsi};
use crate::{scaled_excess, Error, Result, CHECK_TOL};

/// Floor on sampled probabilities in the standard profile.
pub const MIN_MASS: f64 = 1e-6;
/// Floor on sampled probabilities in the stress profile.
pub const STRESS_MIN_MASS: f64 = 1e-9;
/// Tolerance of the stress profile.
pub const STRESS_TOL: f64 = 1e-6;
/// Default grid of entropic indices, intersected with each case's range.
pub const Q_GRID: [f64; 11] = [0.0, 0.25, 0.5, 0.9, 0.999, 1.0, 1.001, 1.5, 2.0, 3.0, 4.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Probabilities floored at [`MIN_MASS`], checked at [`CHECK_TOL`].
    #[default]
    Standard,
    /// Probabilities floored at [`STRESS_MIN_MASS`], checked at [`STRESS_TOL`].
    Stress,
}

impl Profile {
    pub fn min_mass(self) -> f64 {
        match self {
            Profile::Standard => MIN_MASS,
            Profile::Stress => STRESS_MIN_MASS,
        }
    }

    pub fn tolerance(self) -> f64 {
        match self {
            Profile::Standard => CHECK_TOL,
            Profile::Stress => STRESS_TOL,
        }
    }
}

/// An interval of entropic indices, `hi` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QRange {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
}

impl QRange {
    const fn closed(lo: f64, hi: f64) -> Self {
        QRange {
            lo,
            hi,
            lo_open: false,
        }
    }

    const fn at_least(lo: f64) -> Self {
        Self::closed(lo, f64::INFINITY)
    }

    const fn positive() -> Self {
        QRange {
            lo: 0.0,
            hi: f64::INFINITY,
            lo_open: true,
        }
    }

    pub fn contains(&self, q: f64) -> bool {
        let above = if self.lo_open { q > self.lo } else { q >= self.lo };
        above && q <= self.hi
    }
}

impl std::fmt::Display for QRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let open = if self.lo_open { '(' } else { '[' };
        if self.hi.is_infinite() {
            write!(f, "{open}{}, inf)", self.lo)
        } else {
            write!(f, "{open}{}, {}]", self.lo, self.hi)
        }
    }
}

type TrialFn = fn(&mut TrialCtx) -> Result<Vec<Check>>;

type ScalarFn = Box<dyn Fn(f64) -> f64>;

/// One verifiable statement.
#[derive(Clone)]
pub struct TheoremCase {
    pub id: &'static str,
    pub summary: &'static str,
    /// Indices for which the statement is claimed; `None` when q plays no role.
    pub q_range: Option<QRange>,
    pub requires: &'static [&'static str],
    trial: TrialFn,
}

impl std::fmt::Debug for TheoremCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TheoremCase")
            .field("id", &self.id)
            .field("q_range", &self.q_range)
            .field("requires", &self.requires)
            .finish_non_exhaustive()
    }
}

const ANY_Q: Option<QRange> = Some(QRange::at_least(0.0));

static REGISTRY: [TheoremCase; 24] = [
    TheoremCase {
        id: "prop2.1",
        summary: "Tsallis quasilinear entropy is nonnegative",
        q_range: ANY_Q,
        requires: &[],
        trial: trial_quasilinear_entropy_nonnegative,
    },
    TheoremCase {
        id: "prop2.2",
        summary: "coarsening: power sums, Tsallis and Renyi entropies",
        q_range: ANY_Q,
        requires: &[],
        trial: trial_coarsening,
    },
    TheoremCase {
        id: "prop2.3",
        summary: "Tsallis quasilinear relative entropy is nonnegative",
        q_range: ANY_Q,
        requires: &["psi concave increasing or convex decreasing"],
        trial: trial_quasilinear_relative_nonnegative,
    },
    TheoremCase {
        id: "prop2.4",
        summary: "Renyi and Tsallis relative entropies decrease under coarsening",
        q_range: Some(QRange::closed(0.0, 2.0)),
        requires: &["0 <= q <= 2"],
        trial: trial_relative_coarsening,
    },
    TheoremCase {
        id: "prop3.1",
        summary: "ratio sandwich of generalized Jensen gaps",
        q_range: ANY_Q,
        requires: &["f o psi^-1 convex"],
        trial: trial_ratio_sandwich,
    },
    TheoremCase {
        id: "thm3.1",
        summary: "quasilinear minus Tsallis entropy bounds",
        q_range: ANY_Q,
        requires: &["-ln_q o psi^-1 convex"],
        trial: trial_quasilinear_vs_tsallis,
    },
    TheoremCase {
        id: "cor3.1",
        summary: "two-sided refinement of 0 <= H_q <= ln_q n",
        q_range: ANY_Q,
        requires: &[],
        trial: trial_refined_maxent,
    },
    TheoremCase {
        id: "thm3.2",
        summary: "f-divergence sandwich through the dual generator",
        q_range: ANY_Q,
        requires: &["f convex, f(1) = 0"],
        trial: trial_f_divergence_sandwich,
    },
    TheoremCase {
        id: "cor3.2",
        summary: "reverse KL sandwich (f = -log)",
        q_range: None,
        requires: &[],
        trial: trial_reverse_kl,
    },
    TheoremCase {
        id: "lem4.1",
        summary: "Lagrange identity",
        q_range: None,
        requires: &[],
        trial: trial_lagrange,
    },
    TheoremCase {
        id: "lem4.2",
        summary: "pairwise spread equals weighted variance",
        q_range: None,
        requires: &[],
        trial: trial_pairwise_spread,
    },
    TheoremCase {
        id: "thm4.1",
        summary: "smooth Jensen sandwich, pairwise form",
        q_range: ANY_Q,
        requires: &["0 <= m <= f'' <= M"],
        trial: trial_smooth_jensen,
    },
    TheoremCase {
        id: "cor4.1",
        summary: "smooth Jensen sandwich, variance form",
        q_range: ANY_Q,
        requires: &["0 <= m <= f'' <= M"],
        trial: trial_smooth_jensen_variance,
    },
    TheoremCase {
        id: "cf",
        summary: "Cartwright-Field bounds on AM - GM",
        q_range: None,
        requires: &[],
        trial: trial_cartwright_field,
    },
    TheoremCase {
        id: "thm4.2",
        summary: "Tsallis cross-entropy chain with tightest constants",
        q_range: Some(QRange::positive()),
        requires: &["q > 0"],
        trial: trial_tsallis_cross_entropy,
    },
    TheoremCase {
        id: "cor4.2",
        summary: "Shannon cross-entropy chain",
        q_range: Some(QRange::closed(1.0, 1.0)),
        requires: &["q = 1"],
        trial: trial_shannon_cross_entropy,
    },
    TheoremCase {
        id: "prop4.1",
        summary: "cross-entropy inequality for complemented distributions",
        q_range: None,
        requires: &["n >= 2"],
        trial: trial_complement,
    },
    TheoremCase {
        id: "prop5.1",
        summary: "two-variable chain rule",
        q_range: ANY_Q,
        requires: &[],
        trial: trial_chain_rule_pair,
    },
    TheoremCase {
        id: "prop5.2",
        summary: "multivariable chain rule in a random order",
        q_range: ANY_Q,
        requires: &[],
        trial: trial_chain_rule,
    },
    TheoremCase {
        id: "prop5.3",
        summary: "conditioning reduces Tsallis entropy",
        q_range: Some(QRange::at_least(1.0)),
        requires: &["q >= 1"],
        trial: trial_conditioning,
    },
    TheoremCase {
        id: "thm5.1",
        summary: "Han's inequality for Tsallis joint entropy",
        q_range: Some(QRange::at_least(1.0)),
        requires: &["q >= 1"],
        trial: trial_han,
    },
    TheoremCase {
        id: "id14",
        summary: "exp R_q = exp_q H_q",
        q_range: ANY_Q,
        requires: &[],
        trial: trial_bridge,
    },
    TheoremCase {
        id: "id16",
        summary: "exp R_q(p||r) = exp_{2-q} D_q(p||r)",
        q_range: Some(QRange::closed(0.0, 2.0)),
        requires: &["0 <= q <= 2"],
        trial: trial_relative_bridge,
    },
    TheoremCase {
        id: "qadd",
        summary: "q-additivity of Tsallis entropy",
        q_range: ANY_Q,
        requires: &[],
        trial: trial_q_additivity,
    },
];

/// All registered cases, in report order.
pub fn registry() -> &'static [TheoremCase] {
    &REGISTRY
}

pub fn find_case(id: &str) -> Result<&'static TheoremCase> {
    REGISTRY
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| Error::UnknownCase(id.to_string()))
}

/// Outcome of running one case.
///
/// `worst_violation` is the largest scaled excess over all trials (negative
/// when every trial held with room to spare); a trial is a violation when
/// its excess exceeds `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub case: String,
    pub trials: usize,
    pub violations: usize,
    pub worst_violation: f64,
    pub worst_witness: Value,
    pub seed: u64,
    pub profile: Profile,
    pub tolerance: f64,
    pub q_values: Vec<f64>,
    /// True when some q lies outside the case's hypothesis; such reports
    /// never count as failures.
    pub informational: bool,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.informational || self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub trials: usize,
    pub seed: u64,
    /// Inclusive range of distribution sizes.
    pub n_range: (usize, usize),
    /// Explicit indices; `None` uses [`Q_GRID`] restricted to each case.
    pub q_grid: Option<Vec<f64>>,
    pub profile: Profile,
    /// Overrides the profile tolerance.
    pub tolerance: Option<f64>,
    /// Permits indices outside a case's hypothesis.
    pub override_hypothesis: bool,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            trials: 10_000,
            seed: 42,
            n_range: (2, 16),
            q_grid: None,
            profile: Profile::Standard,
            tolerance: None,
            override_hypothesis: false,
            threads: None,
        }
    }
}

impl VerifyConfig {
    pub fn effective_tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(self.profile.tolerance())
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Dimension("trials must be at least 1".into()));
        }
        let (lo, hi) = self.n_range;
        if lo == 0 || lo > hi {
            return Err(Error::Dimension(format!(
                "invalid size range [{lo}, {hi}]"
            )));
        }
        let tol = self.effective_tolerance();
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(Error::Domain {
                what: "tolerance must be finite and non-negative",
                value: tol,
            });
        }
        Ok(())
    }

    /// The indices case `case` runs at, and whether any lies outside its
    /// hypothesis.
    fn q_values(&self, case: &TheoremCase) -> Result<(Vec<f64>, bool)> {
        let Some(range) = case.q_range else {
            return Ok((Vec::new(), false));
        };
        let grid = match &self.q_grid {
            Some(g) => {
                for &q in g {
                    EntropicIndex::new(q)?;
                }
                g.clone()
            }
            None if self.override_hypothesis => Q_GRID.to_vec(),
            None => Q_GRID.iter().copied().filter(|&q| range.contains(q)).collect(),
        };
        if grid.is_empty() {
            return Err(Error::Hypothesis(format!(
                "no index to run {} at; its range is {range}",
                case.id
            )));
        }
        let outside: Vec<f64> = grid.iter().copied().filter(|&q| !range.contains(q)).collect();
        if !outside.is_empty() && !self.override_hypothesis {
            return Err(Error::Hypothesis(format!(
                "{} is only claimed for q in {range}; q = {outside:?} needs the override flag",
                case.id
            )));
        }
        Ok((grid, !outside.is_empty()))
    }
}

/// A flat-Dirichlet sample floored at [`MIN_MASS`].
pub fn sample_simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ProbDist> {
    sample_simplex_floored(n, MIN_MASS, rng)
}

/// Normalized exponential variates, floored at `min_mass` and renormalized.
pub fn sample_simplex_floored<R: Rng + ?Sized>(
    n: usize,
    min_mass: f64,
    rng: &mut R,
) -> Result<ProbDist> {
    if n == 0 {
        return Err(Error::Empty);
    }
    let e: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = e.iter().sum();
    let floored: Vec<f64> = e.iter().map(|x| (x / total).max(min_mass)).collect();
    let total: f64 = floored.iter().sum();
    ProbDist::new(floored.iter().map(|x| x / total).collect())
}

fn trial_rng(seed: u64, id: &str, trial: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    for (k, b) in key[8..].iter_mut().zip(id.bytes()) {
        *k = b;
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial as u64);
    rng
}

/// Runs one case by id.
pub fn run_case(id: &str, config: &VerifyConfig) -> Result<VerifyReport> {
    let case = find_case(id)?;
    config.validate()?;
    with_pool(config.threads, || run_one(case, config))?
}

/// Runs every registered case in registry order.
pub fn run_all(config: &VerifyConfig) -> Result<Vec<VerifyReport>> {
    config.validate()?;
    with_pool(config.threads, || {
        REGISTRY.iter().map(|c| run_one(c, config)).collect()
    })?
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Dimension(format!("cannot start {t} threads: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

struct Worst {
    excess: f64,
    trial: usize,
    witness: Value,
}

fn pick_worst(a: Option<Worst>, b: Option<Worst>) -> Option<Worst> {
    match (a, b) {
        (None, w) | (w, None) => w,
        (Some(a), Some(b)) => {
            let b_wins = match b.excess.total_cmp(&a.excess) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => b.trial < a.trial,
            };
            Some(if b_wins { b } else { a })
        }
    }
}

fn run_one(case: &TheoremCase, config: &VerifyConfig) -> Result<VerifyReport> {
    let (qs, informational) = config.q_values(case)?;
    let tol = config.effective_tolerance();
    let min_mass = config.profile.min_mass();
    let (n_lo, n_hi) = config.n_range;

    let (violations, worst) = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(config.seed, case.id, t);
            let n = rng.random_range(n_lo..=n_hi);
            let q = qs.get(t % qs.len().max(1)).copied().unwrap_or(1.0);
            let mut ctx = TrialCtx {
                rng,
                n,
                q: EntropicIndex::new(q).expect("indices validated"),
                min_mass,
                witness: Map::new(),
            };
            ctx.note("trial", t);
            ctx.note("n", n);
            if case.q_range.is_some() {
                ctx.note("q", q);
            }
            let excess = match (case.trial)(&mut ctx) {
                Ok(checks) => checks
                    .iter()
                    .map(Check::excess)
                    .fold(f64::NEG_INFINITY, f64::max),
                Err(e) => {
                    ctx.note("error", e.to_string());
                    f64::INFINITY
                }
            };
            let worst = Worst {
                excess,
                trial: t,
                witness: Value::Object(ctx.witness),
            };
            (usize::from(excess.is_nan() || excess > tol), Some(worst))
        })
        .reduce(
            || (0, None),
            |(va, wa), (vb, wb)| (va + vb, pick_worst(wa, wb)),
        );
    let worst = worst.expect("at least one trial");
    Ok(VerifyReport {
        case: case.id.to_string(),
        trials: config.trials,
        violations,
        worst_violation: worst.excess,
        worst_witness: worst.witness,
        seed: config.seed,
        profile: config.profile,
        tolerance: tol,
        q_values: qs,
        informational,
    })
}

/// A single comparison inside a trial.
#[derive(Debug, Clone, Copy)]
enum Check {
    Chain(BoundReport),
    /// `a <= b`.
    Le(f64, f64),
    /// `a == b`.
    Close(f64, f64),
    /// `a == b` relative to an externally supplied magnitude.
    CloseScaled(f64, f64, f64),
}

impl Check {
    fn excess(&self) -> f64 {
        match *self {
            Check::Chain(r) => r.excess(),
            Check::Le(a, b) => scaled_excess(a - b, a.abs().max(b.abs())),
            Check::Close(a, b) => scaled_excess((a - b).abs(), a.abs().max(b.abs())),
            Check::CloseScaled(a, b, s) => scaled_excess((a - b).abs(), s),
        }
    }
}

struct TrialCtx {
    rng: ChaCha8Rng,
    n: usize,
    q: EntropicIndex,
    min_mass: f64,
    witness: Map<String, Value>,
}

impl TrialCtx {
    fn note(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.witness.insert(key.to_string(), v);
    }

    fn dist_of(&mut self, n: usize) -> Result<ProbDist> {
        sample_simplex_floored(n, self.min_mass, &mut self.rng)
    }

    fn dist(&mut self, key: &str) -> Result<ProbDist> {
        let p = self.dist_of(self.n)?;
        self.note(key, p.weights());
        Ok(p)
    }

    fn pair(&mut self) -> Result<(ProbDist, ProbDist)> {
        Ok((self.dist("p")?, self.dist("r")?))
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    fn log_uniform_points(&mut self, key: &str, lo: f64, hi: f64) -> Vec<f64> {
        let (a, b) = (lo.ln(), hi.ln());
        let xs: Vec<f64> = (0..self.n)
            .map(|_| self.rng.random_range(a..b).exp())
            .collect();
        self.note(key, &xs);
        xs
    }

    fn pick(&mut self, len: usize) -> usize {
        self.rng.random_range(0..len)
    }

    fn partition(&mut self) -> Result<Partition> {
        let n = self.n;
        let k = self.rng.random_range(1..=n);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut self.rng);
        let mut cuts: Vec<usize> = index::sample(&mut self.rng, n.max(2) - 1, k - 1)
            .into_iter()
            .map(|c| c + 1)
            .collect();
        cuts.sort_unstable();
        let mut blocks = Vec::with_capacity(k);
        let mut start = 0;
        for end in cuts.into_iter().chain(std::iter::once(n)) {
            blocks.push(order[start..end].to_vec());
            start = end;
        }
        self.note("blocks", &blocks);
        Partition::new(blocks, n)
    }

    /// Two to four axes; up to 8 states per axis for pairs, 4 otherwise.
    fn joint(&mut self, axes: Option<usize>) -> Result<JointDist> {
        let k = axes.unwrap_or_else(|| self.rng.random_range(2..=4));
        let max_dim = if k == 2 { 8 } else { 4 };
        let dims: Vec<usize> = (0..k).map(|_| self.rng.random_range(2..=max_dim)).collect();
        let cells = self.dist_of(dims.iter().product())?.into_weights();
        self.note("dims", &dims);
        self.note("cells", &cells);
        JointDist::new(dims, cells)
    }

    fn nested(&mut self) -> Result<NestedDist> {
        let sizes: Vec<usize> = (0..self.rng.random_range(1..=5))
            .map(|_| self.rng.random_range(1..=5))
            .collect();
        let cells = self.dist_of(sizes.iter().sum())?.into_weights();
        let mut rows = Vec::with_capacity(sizes.len());
        let mut start = 0;
        for s in sizes {
            rows.push(cells[start..start + s].to_vec());
            start += s;
        }
        self.note("rows", &rows);
        NestedDist::new(rows)
    }

    /// Built-in generators for which `-ln_q ∘ ψ⁻¹` is convex at this q.
    fn compatible_psi(&mut self) -> Result<GeneratorPsi> {
        let q = self.q;
        let mut psis = vec![GeneratorPsi::identity(), GeneratorPsi::lnq(q)];
        if q.deformed() {
            psis.push(GeneratorPsi::power(q)?);
        }
        if q.value() >= 1.0 {
            psis.push(GeneratorPsi::log());
        }
        let psi = psis.swap_remove(self.pick(psis.len()));
        self.note("psi", psi.label());
        Ok(psi)
    }

    /// Every built-in generator valid at this q.
    fn any_psi(&mut self) -> Result<GeneratorPsi> {
        let q = self.q;
        let mut psis = vec![
            GeneratorPsi::identity(),
            GeneratorPsi::log(),
            GeneratorPsi::lnq(q),
        ];
        if q.deformed() {
            psis.push(GeneratorPsi::power(q)?);
        }
        let psi = psis.swap_remove(self.pick(psis.len()));
        self.note("psi", psi.label());
        Ok(psi)
    }
}

fn trial_quasilinear_entropy_nonnegative(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let psi = ctx.any_psi()?;
    let p = ctx.dist("p")?;
    let v = tsallis_quasilinear_entropy(&psi, &p, ctx.q)?;
    Ok(vec![Check::Le(0.0, v)])
}

fn trial_coarsening(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let q = ctx.q;
    let p = ctx.dist("p")?;
    let pa = coarsen(&p, &ctx.partition()?)?;
    let (s, sa) = (power_sum(&p, q), power_sum(&pa, q));
    let mut checks = vec![
        Check::Le(tsallis_entropy(&pa, q), tsallis_entropy(&p, q)),
        Check::Le(renyi_entropy(&pa, q), renyi_entropy(&p, q)),
    ];
    if q.value() <= 1.0 {
        checks.push(Check::Le(sa, s));
    }
    if q.value() >= 1.0 {
        checks.push(Check::Le(s, sa));
    }
    Ok(checks)
}

fn trial_quasilinear_relative_nonnegative(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let psi = ctx.any_psi()?;
    let (p, r) = ctx.pair()?;
    let v = tsallis_quasilinear_relative(&psi, &p, &r, ctx.q)?;
    Ok(vec![Check::Le(0.0, v)])
}

fn trial_relative_coarsening(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let q = ctx.q;
    let (p, r) = ctx.pair()?;
    let part = ctx.partition()?;
    let (pa, ra) = (coarsen(&p, &part)?, coarsen(&r, &part)?);
    Ok(vec![
        Check::Le(renyi_relative(&pa, &ra, q)?, renyi_relative(&p, &r, q)?),
        Check::Le(tsallis_relative(&pa, &ra, q)?, tsallis_relative(&p, &r, q)?),
    ])
}

fn trial_ratio_sandwich(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let q = ctx.q;
    // (f, ψ) pairs with f ∘ ψ⁻¹ convex; the last needs q >= 1
    let pairs = if q.value() >= 1.0 { 6 } else { 5 };
    let choice = ctx.pick(pairs);
    let (label, f, psi): (&str, Box<dyn Fn(f64) -> f64>, GeneratorPsi) = match choice {
        0 => ("x^2", Box::new(|x| x * x), GeneratorPsi::identity()),
        1 => ("-log", Box::new(|x: f64| -x.ln()), GeneratorPsi::identity()),
        2 => ("xlogx", Box::new(|x: f64| x * x.ln()), GeneratorPsi::identity()),
        3 => ("-ln_q", Box::new(move |x| -ln_q(x, q)), GeneratorPsi::identity()),
        4 => ("x^2", Box::new(|x| x * x), GeneratorPsi::log()),
        _ => ("-ln_q", Box::new(move |x| -ln_q(x, q)), GeneratorPsi::log()),
    };
    ctx.note("f", label);
    ctx.note("psi", psi.label());
    let xs = ctx.log_uniform_points("xs", 0.1, 10.0);
    let (p, r) = ctx.pair()?;
    let rep = ratio_sandwich(&f, &psi, &xs, &p, &r)?;
    let gap_p = jensen_gap(&f, &psi, &xs, &p)?;
    Ok(vec![Check::Chain(rep), Check::Le(0.0, gap_p)])
}

fn trial_quasilinear_vs_tsallis(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let psi = ctx.compatible_psi()?;
    let r = ctx.dist("r")?;
    let rep = quasilinear_vs_tsallis_bounds(&psi, &r, ctx.q)?;
    Ok(vec![Check::Chain(rep), Check::Le(0.0, rep.lower)])
}

fn trial_refined_maxent(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let r = ctx.dist("r")?;
    let rep = refined_maxent_bounds(&r, ctx.q);
    let via_identity = quasilinear_vs_tsallis_bounds(&GeneratorPsi::identity(), &r, ctx.q)?;
    Ok(vec![
        Check::Chain(rep),
        Check::Le(0.0, rep.lower),
        Check::Close(rep.lower, via_identity.lower),
        Check::Close(rep.value, via_identity.value),
        Check::Close(rep.upper, via_identity.upper),
    ])
}

fn trial_f_divergence_sandwich(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let q = ctx.q;
    let f = match ctx.pick(4) {
        0 => ConvexGenerator::tsallis(q),
        1 => ConvexGenerator::x_log_x(),
        2 => ConvexGenerator::neg_log(),
        _ => ConvexGenerator::neg_lnq(q),
    };
    ctx.note("f", f.label());
    let (p, r) = ctx.pair()?;
    let rep = f_divergence_sandwich(&f, &p, &r)?;
    // Σ p f(p/r) = Σ t f*(p/t) with t = p²/r
    let direct: f64 = p
        .weights()
        .iter()
        .zip(r.weights())
        .map(|(a, b)| a * f.eval(a / b))
        .sum();
    let t = squared_ratio_weights(&p, &r)?;
    let dual = incomplete_f_divergence(&dual_generator(&f), &t, &IncompleteDist::from(p))?;
    Ok(vec![
        Check::Chain(rep),
        Check::Le(0.0, rep.lower),
        Check::Close(direct, dual),
    ])
}

fn trial_reverse_kl(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let (p, r) = ctx.pair()?;
    let rep = reverse_kl_sandwich(&p, &r)?;
    let via_f = f_divergence_sandwich(&ConvexGenerator::neg_log(), &p, &r)?;
    Ok(vec![
        Check::Chain(rep),
        Check::Le(0.0, rep.lower),
        Check::Close(rep.lower, via_f.lower),
        Check::Close(rep.value, via_f.value),
        Check::Close(rep.upper, via_f.upper),
    ])
}

fn trial_lagrange(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let n = ctx.n;
    let a: Vec<f64> = (0..n).map(|_| ctx.uniform(-1.0, 1.0)).collect();
    let b: Vec<f64> = (0..n).map(|_| ctx.uniform(-1.0, 1.0)).collect();
    ctx.note("a", &a);
    ctx.note("b", &b);
    let (lhs, rhs) = lagrange_identity(&a, &b)?;
    let scale = a.iter().map(|x| x * x).sum::<f64>() * b.iter().map(|x| x * x).sum::<f64>();
    Ok(vec![Check::CloseScaled(lhs, rhs, scale)])
}

fn trial_pairwise_spread(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let n = ctx.n;
    let xs: Vec<f64> = (0..n).map(|_| ctx.uniform(-10.0, 10.0)).collect();
    ctx.note("xs", &xs);
    let p = ctx.dist("p")?;
    let (pairwise, variance) = pairwise_spread_forms(&xs, &p)?;
    Ok(vec![Check::Close(pairwise, variance)])
}

type SmoothSetup = (Box<dyn Fn(f64) -> f64>, SecondDerivativeRange, Vec<f64>, ProbDist);

/// A function with a known range of f'' on a random interval, points inside
/// it and weights.
fn smooth_setup(ctx: &mut TrialCtx) -> Result<SmoothSetup> {
    let q = ctx.q;
    let qv = q.value();
    let choice = ctx.pick(5);
    let (a, b) = if choice == 2 {
        let a = ctx.uniform(-5.0, 5.0);
        (a, a + ctx.uniform(0.1, 5.0))
    } else {
        let a = ctx.uniform(0.1, 5.0);
        (a, a * (1.0 + ctx.uniform(0.1, 10.0)))
    };
    let (label, f, m, big_m): (&str, ScalarFn, f64, f64) = match choice {
        0 => ("-log", Box::new(|x: f64| -x.ln()), 1.0 / (b * b), 1.0 / (a * a)),
        1 => ("xlogx", Box::new(|x: f64| x * x.ln()), 1.0 / b, 1.0 / a),
        2 => ("exp", Box::new(f64::exp), a.exp(), b.exp()),
        3 => ("x^2", Box::new(|x| x * x), 2.0, 2.0),
        _ => (
            "-ln_q",
            Box::new(move |x| -ln_q(x, q)),
            qv * b.powf(-qv - 1.0),
            qv * a.powf(-qv - 1.0),
        ),
    };
    let range = SecondDerivativeRange::new(m, big_m, a, b)?;
    let xs: Vec<f64> = (0..ctx.n)
        .map(|_| (a + ctx.rng.random::<f64>() * (b - a)).min(b))
        .collect();
    ctx.note("f", label);
    ctx.note("interval", [a, b]);
    ctx.note("xs", &xs);
    let p = ctx.dist("p")?;
    Ok((f, range, xs, p))
}

fn trial_smooth_jensen(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let (f, range, xs, p) = smooth_setup(ctx)?;
    Ok(vec![Check::Chain(smooth_jensen_sandwich(f, &range, &xs, &p)?)])
}

fn trial_smooth_jensen_variance(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let (f, range, xs, p) = smooth_setup(ctx)?;
    Ok(vec![Check::Chain(smooth_jensen_variance_sandwich(
        f, &range, &xs, &p,
    )?)])
}

fn trial_cartwright_field(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let xs = ctx.log_uniform_points("xs", 0.01, 100.0);
    let p = ctx.dist("p")?;
    Ok(vec![Check::Chain(cartwright_field(&xs, &p)?)])
}

fn trial_tsallis_cross_entropy(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let (p, r) = ctx.pair()?;
    let c = tightest_constants(&p, &r, ctx.q)?;
    ctx.note("constants", c);
    let s = tsallis_cross_entropy_sandwich(&p, &r, ctx.q, c.m, c.big_m)?;
    Ok(vec![
        Check::Chain(s.combined),
        Check::Chain(s.cross),
        Check::Chain(s.own),
    ])
}

fn trial_shannon_cross_entropy(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let (p, r) = ctx.pair()?;
    let c = tightest_constants(&p, &r, EntropicIndex::ONE)?;
    ctx.note("constants", c);
    let s = shannon_cross_entropy_sandwich(&p, &r, c.m, c.big_m)?;
    Ok(vec![
        Check::Chain(s.combined),
        Check::Chain(s.cross),
        Check::Chain(s.own),
    ])
}

fn trial_complement(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    ctx.n = ctx.n.max(2);
    let (p, r) = ctx.pair()?;
    let (lhs, rhs) = complement_cross_entropy(&p, &r)?;
    Ok(vec![Check::Le(lhs, rhs)])
}

fn trial_chain_rule_pair(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let q = ctx.q;
    let j = ctx.joint(Some(2))?;
    let h = tsallis_joint_entropy(&j, q);
    let parts = tsallis_conditional_entropy(&j, &[0], &[], q)?
        + tsallis_conditional_entropy(&j, &[1], &[0], q)?;
    Ok(vec![Check::Close(h, parts)])
}

fn trial_chain_rule(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let q = ctx.q;
    let j = ctx.joint(None)?;
    let mut order: Vec<usize> = (0..j.axis_count()).collect();
    order.shuffle(&mut ctx.rng);
    ctx.note("order", &order);
    let sum: f64 = chain_rule_decomposition(&j, &order, q)?.iter().sum();
    Ok(vec![Check::Close(sum, tsallis_joint_entropy(&j, q))])
}

fn trial_conditioning(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let j = ctx.joint(None)?;
    let (conditional, marginal) = conditioning_reduces_entropy_check(&j, ctx.q)?;
    Ok(vec![Check::Le(conditional, marginal)])
}

fn trial_han(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let j = ctx.joint(None)?;
    Ok(vec![Check::Chain(han_report(&j, ctx.q))])
}

fn trial_bridge(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let p = ctx.dist("p")?;
    let (a, b) = renyi_tsallis_bridge(&p, ctx.q)?;
    Ok(vec![Check::Close(a, b)])
}

fn trial_relative_bridge(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let (p, r) = ctx.pair()?;
    let (a, b) = renyi_tsallis_relative_bridge(&p, &r, ctx.q)?;
    Ok(vec![Check::Close(a, b)])
}

fn trial_q_additivity(ctx: &mut TrialCtx) -> Result<Vec<Check>> {
    let nd = ctx.nested()?;
    let (flat, split) = q_additivity_sides(&nd, ctx.q);
    Ok(vec![Check::Close(flat, split)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(trials: usize) -> VerifyConfig {
        VerifyConfig {
            trials,
            ..VerifyConfig::default()
        }
    }

    #[test]
    fn registry_ids_are_unique() {
        let mut ids: Vec<&str> = registry().iter().map(|c| c.id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), registry().len());
    }

    #[test]
    fn sample_simplex_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(sample_simplex(1, &mut rng).unwrap().weights(), &[1.0]);
        let a = sample_simplex(5, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = sample_simplex(5, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
        assert!(a.min() >= MIN_MASS * 0.5);
        assert!(sample_simplex(0, &mut rng).is_err());
    }

    #[test]
    fn sample_simplex_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut sums = [0.0; 4];
        let draws = 10_000;
        for _ in 0..draws {
            let p = sample_simplex(4, &mut rng).unwrap();
            for (s, w) in sums.iter_mut().zip(p.weights()) {
                *s += w;
            }
        }
        for s in sums {
            assert!((s / draws as f64 - 0.25).abs() < 0.01, "{}", s / draws as f64);
        }
    }

    #[test]
    fn every_case_runs_clean() {
        for case in registry() {
            let rep = run_case(case.id, &quick(300)).unwrap();
            assert_eq!(rep.violations, 0, "{}", serde_json::to_string(&rep).unwrap());
            assert!(rep.worst_violation <= CHECK_TOL);
        }
    }

    #[test]
    fn unknown_case_is_an_error() {
        assert!(matches!(
            run_case("thm9.9", &quick(10)),
            Err(Error::UnknownCase(_))
        ));
    }

    #[test]
    fn outside_hypothesis_needs_override() {
        let mut cfg = quick(200);
        cfg.q_grid = Some(vec![0.5]);
        assert!(matches!(
            run_case("prop5.3", &cfg),
            Err(Error::Hypothesis(_))
        ));
        cfg.override_hypothesis = true;
        let rep = run_case("prop5.3", &cfg).unwrap();
        assert!(rep.informational && rep.passed());
        let rep = run_case("thm5.1", &cfg).unwrap();
        assert!(rep.informational);
    }

    #[test]
    fn report_does_not_depend_on_thread_count() {
        let mut one = quick(500);
        one.threads = Some(1);
        let mut four = one.clone();
        four.threads = Some(4);
        for id in ["thm4.2", "prop3.1", "thm5.1"] {
            let a = serde_json::to_string(&run_case(id, &one).unwrap()).unwrap();
            let b = serde_json::to_string(&run_case(id, &four).unwrap()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = quick(0);
        assert!(run_case("id14", &cfg).is_err());
        cfg.trials = 10;
        cfg.n_range = (3, 2);
        assert!(run_case("id14", &cfg).is_err());
        cfg.n_range = (2, 4);
        cfg.q_grid = Some(vec![-1.0]);
        assert!(matches!(run_case("id14", &cfg), Err(Error::InvalidIndex(_))));
    }
}
