//! Monte Carlo validation of the deviation inequalities.
//!
//! Samples are i.i.d. draws from a bounded [`DistributionSpec`]. The
//! function classes used for the supremum-type quantities are constant on a
//! finite partition of the support ("cells"), which makes every expected
//! risk `Ef` exactly computable and lets a sample of size N be drawn as
//! multinomial cell counts.
//!
//! All estimators run on the batch streams of [`crate::rng`]; the output is
//! a pure function of `(trials, seed)`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{self, BoundResult, BoundedRange, UenSource, UenValue};
use crate::complexity::{self, ClassSampler, EvaluationMatrix};
use crate::rng::{self, Domain};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid distribution: {0}")]
    Distribution(String),
    #[error("invalid function class: {0}")]
    Class(String),
    #[error("Ef is not exactly computable: {0}")]
    InexactMean(String),
    #[error("xi grid must be nonempty, strictly increasing and inside {0}")]
    Grid(&'static str),
    #[error("curves do not share a xi grid")]
    GridMismatch,
    #[error("trials must be at least 1")]
    Trials,
    #[error(transparent)]
    Bounds(#[from] bounds::BoundsError),
    #[error(transparent)]
    Complexity(#[from] complexity::ComplexityError),
}

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistKind {
    /// `a` with probability `1 − p`, `b` with probability `p`.
    BernoulliScaled { p: f64 },
    Uniform,
    DiscreteWeighted { points: Vec<f64>, weights: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub kind: DistKind,
    pub range: BoundedRange,
}

impl DistributionSpec {
    pub fn new(kind: DistKind, range: BoundedRange) -> Result<Self> {
        let spec = Self { kind, range };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            DistKind::BernoulliScaled { p } => {
                if !(*p > 0.0 && *p < 1.0) {
                    return Err(SimError::Distribution(format!("p = {p} outside (0, 1)")));
                }
            }
            DistKind::Uniform => {}
            DistKind::DiscreteWeighted { points, weights } => {
                if points.is_empty() || points.len() != weights.len() {
                    return Err(SimError::Distribution("points and weights must be nonempty and equal length".into()));
                }
                if weights.iter().any(|w| !(*w >= 0.0)) {
                    return Err(SimError::Distribution("weights must be nonnegative".into()));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(SimError::Distribution(format!("weights sum to {total}, not 1")));
                }
                if let Some(z) = points.iter().find(|z| !self.range.contains(**z)) {
                    return Err(SimError::Distribution(format!("support point {z} outside the range")));
                }
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        let (a, b) = (self.range.a(), self.range.b());
        match &self.kind {
            DistKind::BernoulliScaled { p } => a + p * (b - a),
            DistKind::Uniform => 0.5 * (a + b),
            DistKind::DiscreteWeighted { points, weights } => points.iter().zip(weights).map(|(z, w)| z * w).sum(),
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            DistKind::BernoulliScaled { p } => format!("bernoulli_p{p}"),
            DistKind::Uniform => "uniform".into(),
            DistKind::DiscreteWeighted { points, .. } => format!("discrete_{}pt", points.len()),
        }
    }
}

/// Trial count, master seed and worker count. Results never depend on
/// `workers`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_workers() -> usize {
    1
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self { trials, seed, workers: 1 }
    }

    fn check(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(SimError::Trials);
        }
        Ok(())
    }
}

/// A member of a finite function class; values lie in the distribution's range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// `f(z) = z`
    Identity,
    /// `f(z) = a + b − z`
    Complement,
    /// `f(z) = b` if `z ≤ threshold`, else `a`
    Indicator { threshold: f64 },
    /// Explicit values, one per support point (discrete distributions only).
    Table { values: Vec<f64> },
}

/// Distribution plus a class, reduced to cell probabilities and per-cell
/// function values.
#[derive(Debug, Clone, PartialEq)]
pub struct CellModel {
    probs: Vec<f64>,
    /// `values[i][k]`: function `i` on cell `k`.
    values: Vec<Vec<f64>>,
    means: Vec<f64>,
    range: BoundedRange,
}

impl CellModel {
    pub fn new(dist: &DistributionSpec, class: &[FunctionSpec]) -> Result<Self> {
        dist.validate()?;
        if class.is_empty() {
            return Err(SimError::Class("class must contain at least one function".into()));
        }
        let range = dist.range;
        let (a, b) = (range.a(), range.b());
        let (probs, values) = match &dist.kind {
            DistKind::BernoulliScaled { p } => {
                let points = [a, b];
                (vec![1.0 - p, *p], point_values(class, &points, range)?)
            }
            DistKind::DiscreteWeighted { points, weights } => (weights.clone(), point_values(class, points, range)?),
            DistKind::Uniform => {
                let mut cuts: Vec<f64> = Vec::new();
                for f in class {
                    match f {
                        FunctionSpec::Indicator { threshold } => {
                            if *threshold > a && *threshold < b {
                                cuts.push(*threshold);
                            }
                        }
                        other => {
                            return Err(SimError::InexactMean(format!(
                                "{other:?} is not piecewise constant under a uniform distribution"
                            )))
                        }
                    }
                }
                cuts.sort_by(f64::total_cmp);
                cuts.dedup();
                let mut edges = vec![a];
                edges.extend(cuts);
                edges.push(b);
                let probs = edges.windows(2).map(|w| (w[1] - w[0]) / (b - a)).collect();
                let values = class
                    .iter()
                    .map(|f| match f {
                        FunctionSpec::Indicator { threshold } => {
                            edges.windows(2).map(|w| if w[1] <= *threshold { b } else { a }).collect()
                        }
                        _ => unreachable!("checked above"),
                    })
                    .collect();
                (probs, values)
            }
        };
        let means = values
            .iter()
            .map(|row: &Vec<f64>| row.iter().zip(&probs).map(|(v, p)| v * p).sum())
            .collect();
        Ok(Self { probs, values, means, range })
    }

    pub fn range(&self) -> BoundedRange {
        self.range
    }

    /// Exact expected risks `Ef_i`.
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn cell_probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn functions(&self) -> usize {
        self.values.len()
    }

    /// Function `i` evaluated on cell `k`.
    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.values[i][k]
    }

    /// Empirical risks `E_N f_i` from cell counts.
    pub fn empirical_means(&self, counts: &[u64], n: u64, out: &mut [f64]) {
        let nf = n as f64;
        for (o, row) in out.iter_mut().zip(&self.values) {
            *o = row.iter().zip(counts).map(|(v, &c)| v * c as f64).sum::<f64>() / nf;
        }
    }

    /// `sup_f (Ef − E_N f)` and `sup_f |Ef − E_N f|`.
    fn deviations(&self, counts: &[u64], n: u64, scratch: &mut [f64]) -> (f64, f64) {
        self.empirical_means(counts, n, scratch);
        let mut one_sided = f64::NEG_INFINITY;
        let mut two_sided = 0.0_f64;
        for (m, e) in self.means.iter().zip(scratch.iter()) {
            let d = m - e;
            one_sided = one_sided.max(d);
            two_sided = two_sided.max(d.abs());
        }
        (one_sided, two_sided)
    }

    fn draw_cell(&self, rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (k, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return k;
            }
        }
        self.probs.len() - 1
    }
}

impl ClassSampler for CellModel {
    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> EvaluationMatrix {
        let cells: Vec<usize> = (0..n).map(|_| self.draw_cell(rng)).collect();
        let rows = self.values.iter().map(|row| cells.iter().map(|&k| row[k]).collect()).collect();
        EvaluationMatrix::from_rows(rows, self.range).expect("cell values lie in range")
    }
}

fn point_values(class: &[FunctionSpec], points: &[f64], range: BoundedRange) -> Result<Vec<Vec<f64>>> {
    let (a, b) = (range.a(), range.b());
    class
        .iter()
        .map(|f| {
            let row: Vec<f64> = match f {
                FunctionSpec::Identity => points.to_vec(),
                FunctionSpec::Complement => points.iter().map(|z| a + b - z).collect(),
                FunctionSpec::Indicator { threshold } => {
                    points.iter().map(|z| if *z <= *threshold { b } else { a }).collect()
                }
                FunctionSpec::Table { values } => {
                    if values.len() != points.len() {
                        return Err(SimError::Class(format!(
                            "table has {} values for {} support points",
                            values.len(),
                            points.len()
                        )));
                    }
                    values.clone()
                }
            };
            if let Some(v) = row.iter().find(|v| !range.contains(**v)) {
                return Err(SimError::Class(format!("function value {v} outside the range")));
            }
            Ok(row)
        })
        .collect()
}

/// Multinomial cell counts by sequential conditional binomials.
fn draw_counts(rng: &mut ChaCha8Rng, n: u64, probs: &[f64], out: &mut [u64]) {
    let mut remaining = n;
    let mut mass = 1.0;
    let last = probs.len() - 1;
    for k in 0..last {
        let c = if remaining == 0 || mass <= 0.0 {
            0
        } else {
            let q = (probs[k] / mass).clamp(0.0, 1.0);
            Binomial::new(remaining, q).expect("valid binomial").sample(rng)
        };
        out[k] = c;
        remaining -= c;
        mass -= probs[k];
    }
    out[last] = remaining;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub xi: f64,
    pub probability: f64,
    pub stderr: f64,
}

/// `(ξ, probability)` pairs from Monte Carlo or from a bound formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub points: Vec<TailPoint>,
    pub source: String,
}

impl TailCurve {
    pub fn xis(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.xi).collect()
    }

    fn from_counts(xi_grid: &[f64], exceed: &[u64], trials: u64, source: &str) -> Self {
        let t = trials as f64;
        let points = xi_grid
            .iter()
            .zip(exceed)
            .map(|(&xi, &c)| {
                let p = c as f64 / t;
                TailPoint { xi, probability: p, stderr: (p * (1.0 - p) / t).sqrt() }
            })
            .collect();
        Self { points, source: source.to_string() }
    }
}

/// A bound evaluated along a grid; probabilities are the clipped values.
pub fn bound_curve<F>(xi_grid: &[f64], source: &str, bound: F) -> Result<TailCurve>
where
    F: Fn(f64) -> Result<BoundResult>,
{
    let points = xi_grid
        .iter()
        .map(|&xi| Ok(TailPoint { xi, probability: bound(xi)?.value, stderr: 0.0 }))
        .collect::<Result<_>>()?;
    Ok(TailCurve { points, source: source.to_string() })
}

fn check_grid(xi_grid: &[f64], upper: f64, what: &'static str) -> Result<()> {
    if xi_grid.is_empty()
        || xi_grid.iter().any(|&x| !(x > 0.0 && x < upper))
        || xi_grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(SimError::Grid(what));
    }
    Ok(())
}

/// Histogram a deviation into the bucket of grid points it exceeds.
/// `strict` counts `dev > ξ`, otherwise `dev ≥ ξ`.
fn bucket(xi_grid: &[f64], dev: f64, strict: bool) -> usize {
    if strict {
        xi_grid.partition_point(|&x| x < dev)
    } else {
        xi_grid.partition_point(|&x| x <= dev)
    }
}

/// `exceed[j]` = number of trials whose bucket is above `j`.
fn cumulate(hist: &[u64], len: usize) -> Vec<u64> {
    let mut exceed = vec![0u64; len];
    let mut running = 0;
    for j in (0..len).rev() {
        running += hist[j + 1];
        exceed[j] = running;
    }
    exceed
}

fn merge_hist(parts: Vec<Vec<u64>>, len: usize) -> Vec<u64> {
    let mut hist = vec![0u64; len + 1];
    for part in parts {
        for (h, p) in hist.iter_mut().zip(part) {
            *h += p;
        }
    }
    hist
}

/// Two-sided tail `Pr{|E F − F(Z)| > ξ}` of `F(Z) = Σ_n z_n`.
pub fn sum_tail_mc(dist: &DistributionSpec, n: u64, xi_grid: &[f64], cfg: &McConfig) -> Result<TailCurve> {
    dist.validate()?;
    cfg.check()?;
    let total = n as f64 * dist.range.width();
    check_grid(xi_grid, total, "(0, N(b-a))")?;
    let expected = n as f64 * dist.mean();
    let (a, w) = (dist.range.a(), dist.range.width());
    let len = xi_grid.len();

    let parts = rng::run_batches(cfg.trials, cfg.workers, |batch, count| {
        let mut rng = rng::stream(cfg.seed, Domain::SumTail, batch);
        let mut hist = vec![0u64; len + 1];
        let mut counts = Vec::new();
        for _ in 0..count {
            let s = match &dist.kind {
                DistKind::BernoulliScaled { p } => {
                    let k = Binomial::new(n, *p).expect("valid binomial").sample(&mut rng);
                    n as f64 * a + w * k as f64
                }
                DistKind::Uniform => {
                    let u: f64 = (0..n).map(|_| rng.random::<f64>()).sum();
                    n as f64 * a + w * u
                }
                DistKind::DiscreteWeighted { points, weights } => {
                    counts.resize(points.len(), 0);
                    draw_counts(&mut rng, n, weights, &mut counts);
                    points.iter().zip(&counts).map(|(z, &c)| z * c as f64).sum()
                }
            };
            hist[bucket(xi_grid, (expected - s).abs(), true)] += 1;
        }
        hist
    });
    let exceed = cumulate(&merge_hist(parts, len), len);
    Ok(TailCurve::from_counts(xi_grid, &exceed, cfg.trials, "empirical_sum"))
}

/// One-sided tail of `H − E{H}` with `H = sup_f (Ef − E_N f)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BdiffTail {
    pub curve: TailCurve,
    /// Pilot estimate of `E{H}` on `10 × trials` independent trials.
    pub pilot_mean: f64,
    pub pilot_stderr: f64,
    /// Bounded-difference constant `(b − a)/N`.
    pub c: f64,
}

pub fn bdiff_tail_mc(model: &CellModel, n: u64, xi_grid: &[f64], cfg: &McConfig) -> Result<BdiffTail> {
    cfg.check()?;
    check_grid(xi_grid, f64::INFINITY, "(0, inf)")?;
    let m = model.functions();
    let cells = model.probs.len();

    let pilot_trials = 10 * cfg.trials;
    let sums = rng::run_batches(pilot_trials, cfg.workers, |batch, count| {
        let mut rng = rng::stream(cfg.seed, Domain::BdiffPilot, batch);
        let (mut counts, mut scratch) = (vec![0u64; cells], vec![0.0; m]);
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..count {
            draw_counts(&mut rng, n, &model.probs, &mut counts);
            let h = model.deviations(&counts, n, &mut scratch).0;
            s1 += h;
            s2 += h * h;
        }
        (s1, s2)
    });
    let (s1, s2) = sums.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let t = pilot_trials as f64;
    let pilot_mean = s1 / t;
    let pilot_var = ((s2 - t * pilot_mean * pilot_mean) / (t - 1.0).max(1.0)).max(0.0);

    let len = xi_grid.len();
    let parts = rng::run_batches(cfg.trials, cfg.workers, |batch, count| {
        let mut rng = rng::stream(cfg.seed, Domain::Bdiff, batch);
        let (mut counts, mut scratch) = (vec![0u64; cells], vec![0.0; m]);
        let mut hist = vec![0u64; len + 1];
        for _ in 0..count {
            draw_counts(&mut rng, n, &model.probs, &mut counts);
            let h = model.deviations(&counts, n, &mut scratch).0;
            hist[bucket(xi_grid, h - pilot_mean, false)] += 1;
        }
        hist
    });
    let exceed = cumulate(&merge_hist(parts, len), len);
    Ok(BdiffTail {
        curve: TailCurve::from_counts(xi_grid, &exceed, cfg.trials, "empirical_bdiff"),
        pilot_mean,
        pilot_stderr: (pilot_var / t).sqrt(),
        c: model.range.width() / n as f64,
    })
}

/// Two-sided tail `Pr{sup_f |Ef − E_N f| > ξ}`.
pub fn generalization_gap_mc(model: &CellModel, n: u64, xi_grid: &[f64], cfg: &McConfig) -> Result<TailCurve> {
    cfg.check()?;
    check_grid(xi_grid, f64::INFINITY, "(0, inf)")?;
    let m = model.functions();
    let cells = model.probs.len();
    let len = xi_grid.len();
    let parts = rng::run_batches(cfg.trials, cfg.workers, |batch, count| {
        let mut rng = rng::stream(cfg.seed, Domain::Gap, batch);
        let (mut counts, mut scratch) = (vec![0u64; cells], vec![0.0; m]);
        let mut hist = vec![0u64; len + 1];
        for _ in 0..count {
            draw_counts(&mut rng, n, &model.probs, &mut counts);
            let gap = model.deviations(&counts, n, &mut scratch).1;
            hist[bucket(xi_grid, gap, true)] += 1;
        }
        hist
    });
    let exceed = cumulate(&merge_hist(parts, len), len);
    Ok(TailCurve::from_counts(xi_grid, &exceed, cfg.trials, "empirical_gap"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointVerdict {
    pub xi: f64,
    pub empirical: f64,
    pub bound: f64,
    pub stderr: f64,
    pub pass: bool,
    /// `bound / empirical` where the empirical probability is positive.
    pub tightness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub empirical_source: String,
    pub bound_source: String,
    pub slack_sigmas: f64,
    pub points: Vec<PointVerdict>,
    pub pass: bool,
}

/// Pointwise `empirical ≤ bound + slack·stderr`.
pub fn check_bound_validity(empirical: &TailCurve, bound: &TailCurve, slack_sigmas: f64) -> Result<ValidityReport> {
    if empirical.points.len() != bound.points.len()
        || empirical.points.iter().zip(&bound.points).any(|(e, b)| e.xi != b.xi)
    {
        return Err(SimError::GridMismatch);
    }
    let points: Vec<PointVerdict> = empirical
        .points
        .iter()
        .zip(&bound.points)
        .map(|(e, b)| PointVerdict {
            xi: e.xi,
            empirical: e.probability,
            bound: b.probability,
            stderr: e.stderr,
            pass: e.probability <= b.probability + slack_sigmas * e.stderr,
            tightness: (e.probability > 0.0).then(|| b.probability / e.probability),
        })
        .collect();
    Ok(ValidityReport {
        empirical_source: empirical.source.clone(),
        bound_source: bound.source.clone(),
        slack_sigmas,
        pass: points.iter().all(|p| p.pass),
        points,
    })
}

/// One distribution, class and sample size to validate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub dist: DistributionSpec,
    pub class: Vec<FunctionSpec>,
    pub n: u64,
    #[serde(default = "default_xi_points")]
    pub xi_points: usize,
    #[serde(default = "default_uen_draws")]
    pub uen_draws: u64,
}

fn default_xi_points() -> usize {
    16
}

fn default_uen_draws() -> u64 {
    8
}

impl Scenario {
    /// `ξ_k = k·ξ_max/K` for the sum, with `ξ_max = min(4√N, 0.95N)·(b − a)`.
    pub fn sum_grid(&self) -> Vec<f64> {
        let nf = self.n as f64;
        let top = (4.0 * nf.sqrt()).min(0.95 * nf) * self.dist.range.width();
        let k = self.xi_points as f64;
        (1..=self.xi_points).map(|i| top * i as f64 / k).collect()
    }

    /// The sum grid divided by N: deviations of empirical means.
    pub fn mean_grid(&self) -> Vec<f64> {
        let nf = self.n as f64;
        self.sum_grid().into_iter().map(|x| x / nf).collect()
    }
}

/// Bernoulli p ∈ {0.05, 0.5} and Uniform on [0, 1], each with N ∈ {10, 100, 1000}.
pub fn default_scenarios() -> Vec<Scenario> {
    let unit = BoundedRange::unit();
    let dists = [
        (DistKind::BernoulliScaled { p: 0.05 }, vec![FunctionSpec::Identity, FunctionSpec::Complement]),
        (DistKind::BernoulliScaled { p: 0.5 }, vec![FunctionSpec::Identity, FunctionSpec::Complement]),
        (
            DistKind::Uniform,
            vec![
                FunctionSpec::Indicator { threshold: 0.25 },
                FunctionSpec::Indicator { threshold: 0.5 },
                FunctionSpec::Indicator { threshold: 0.75 },
            ],
        ),
    ];
    let mut out = Vec::new();
    for (kind, class) in dists {
        for n in [10u64, 100, 1000] {
            let dist = DistributionSpec { kind: kind.clone(), range: unit };
            out.push(Scenario {
                name: format!("{}_n{}", dist.label(), n),
                dist,
                class: class.clone(),
                n,
                xi_points: default_xi_points(),
                uen_draws: default_uen_draws(),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub name: String,
    pub curves: Vec<TailCurve>,
    pub checks: Vec<ValidityReport>,
    pub bdiff_pilot_mean: f64,
    pub bdiff_pilot_stderr: f64,
}

impl ScenarioOutcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Run the sum, bounded-difference and generalization-gap experiments of a
/// scenario and check them against their Bennett bounds (plus the Hoeffding
/// UEN baseline for the gap).
pub fn run_scenario(s: &Scenario, cfg: &McConfig, slack_sigmas: f64) -> Result<ScenarioOutcome> {
    let range = s.dist.range;
    let model = CellModel::new(&s.dist, &s.class)?;
    let class_range = model.range();

    let sum_grid = s.sum_grid();
    let sum = sum_tail_mc(&s.dist, s.n, &sum_grid, cfg)?;
    let sum_bound = bound_curve(&sum_grid, "bennett_sum", |xi| Ok(bounds::bennett_sum_tail(xi, s.n, &range)?))?;

    let mean_grid = s.mean_grid();
    let bdiff = bdiff_tail_mc(&model, s.n, &mean_grid, cfg)?;
    let bdiff_bound = bound_curve(&mean_grid, "bennett_bdiff", |xi| Ok(bounds::bennett_bdiff_tail(xi, s.n, bdiff.c)?))?;

    let gap = generalization_gap_mc(&model, s.n, &mean_grid, cfg)?;
    let n_points = 2 * s.n as usize;
    let uen_at = |xi: f64| -> Result<UenValue> {
        let log_uen = complexity::uen_estimate(&model, n_points, xi / 8.0, 1.0, s.uen_draws, cfg.seed)?;
        Ok(UenValue::new(log_uen, UenSource::Measured)?)
    };
    let uen_grid: Vec<UenValue> = mean_grid.iter().map(|&xi| uen_at(xi)).collect::<Result<_>>()?;
    let lookup = |xi: f64| uen_grid[mean_grid.iter().position(|&x| x == xi).expect("grid point")];
    let bennett_uen = bound_curve(&mean_grid, "bennett_uen", |xi| {
        Ok(bounds::bennett_uen_tail(xi, s.n, &class_range, &lookup(xi))?)
    })?;
    let hoeffding_uen = bound_curve(&mean_grid, "hoeffding_uen", |xi| {
        Ok(bounds::hoeffding_uen_tail(xi, s.n, &class_range, &lookup(xi))?)
    })?;

    let checks = vec![
        check_bound_validity(&sum, &sum_bound, slack_sigmas)?,
        check_bound_validity(&bdiff.curve, &bdiff_bound, slack_sigmas)?,
        check_bound_validity(&gap, &bennett_uen, slack_sigmas)?,
        check_bound_validity(&gap, &hoeffding_uen, slack_sigmas)?,
    ];
    Ok(ScenarioOutcome {
        name: s.name.clone(),
        curves: vec![sum, sum_bound, bdiff.curve, bdiff_bound, gap, bennett_uen, hoeffding_uen],
        checks,
        bdiff_pilot_mean: bdiff.pilot_mean,
        bdiff_pilot_stderr: bdiff.pilot_stderr,
    })
}
