//! Complexity measures of a finite function class restricted to data:
//! empirical ℓ_p covering numbers, uniform entropy estimates and
//! Rademacher complexities.
//!
//! The class is always an [`EvaluationMatrix`]: row `i` holds `f_i(z_n)` for
//! every sample `z_n`. Distances use the normalized empirical metric
//! `d_p(f, g) = ((1/N) Σ_n |f(z_n) − g(z_n)|^p)^{1/p}` unless stated
//! otherwise, and covers are internal (centers are rows of the matrix).

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{self, BoundedRange, DudleyResult};
use crate::rng::{self, Domain};

/// Largest class handled by the exact cover search.
pub const EXACT_COVER_MAX_ROWS: usize = 22;
/// Largest sample count handled by exhaustive sign enumeration.
pub const EXACT_RADEMACHER_MAX_COLS: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComplexityError {
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("row {row} has {got} entries, expected {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
    #[error("entry ({row}, {col}) = {value} lies outside [{a}, {b}]")]
    OutOfRange { row: usize, col: usize, value: f64, a: f64, b: f64 },
    #[error("rows have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("metric exponent p = {0} must be positive")]
    Exponent(f64),
    #[error("radius must be positive, got {0}")]
    Radius(f64),
    #[error("{what} = {got} exceeds the enumeration guard {limit}")]
    SizeGuard { what: &'static str, got: usize, limit: usize },
    #[error("need at least {min} trials, got {got}")]
    TooFewTrials { min: u64, got: u64 },
    #[error("matrix CSV: {0}")]
    Csv(String),
    #[error(transparent)]
    Bounds(#[from] bounds::BoundsError),
}

pub type Result<T> = std::result::Result<T, ComplexityError>;

/// An M-functions × N-samples grid of values within a [`BoundedRange`].
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationMatrix {
    values: Vec<f64>,
    rows: usize,
    cols: usize,
    range: BoundedRange,
}

impl EvaluationMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>, range: BoundedRange) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(ComplexityError::Empty);
        }
        let mut values = Vec::with_capacity(m * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(ComplexityError::Ragged { row: i, got: row.len(), expected: n });
            }
            for (j, v) in row.into_iter().enumerate() {
                if !range.contains(v) {
                    return Err(ComplexityError::OutOfRange {
                        row: i,
                        col: j,
                        value: v,
                        a: range.a(),
                        b: range.b(),
                    });
                }
                values.push(v);
            }
        }
        Ok(Self { values, rows: m, cols: n, range })
    }

    /// Builds the matrix with the range spanned by its own entries (widened
    /// by one unit when all entries are equal).
    pub fn from_rows_fitted(rows: Vec<Vec<f64>>) -> Result<Self> {
        let (lo, hi) = rows
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        if !lo.is_finite() {
            return Err(ComplexityError::Empty);
        }
        let range = if hi > lo { BoundedRange::new(lo, hi)? } else { BoundedRange::new(lo, lo + 1.0)? };
        Self::from_rows(rows, range)
    }

    /// Parses a CSV with one function per row and one sample per column.
    /// A first line that does not parse as numbers is taken as a header.
    /// Without `range`, the range is fitted to the entries.
    pub fn read_csv<R: std::io::Read>(reader: R, range: Option<BoundedRange>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let mut rows = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| ComplexityError::Csv(e.to_string()))?;
            let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
            match parsed {
                Ok(row) => rows.push(row),
                Err(_) if i == 0 => continue,
                Err(e) => return Err(ComplexityError::Csv(format!("line {}: {e}", i + 1))),
            }
        }
        match range {
            Some(r) => Self::from_rows(rows, r),
            None => Self::from_rows_fitted(rows),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn range(&self) -> BoundedRange {
        self.range
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// The class `{−f : f ∈ F}` on the mirrored range.
    pub fn negated(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| -v).collect(),
            rows: self.rows,
            cols: self.cols,
            range: BoundedRange::new(-self.range.b(), -self.range.a()).expect("mirrored range is valid"),
        }
    }

    /// The class `F ∪ {−f : f ∈ F}`.
    pub fn symmetrized(&self) -> Self {
        let r = self.range.a().abs().max(self.range.b().abs());
        let mut values = self.values.clone();
        values.extend(self.values.iter().map(|v| -v));
        Self {
            values,
            rows: 2 * self.rows,
            cols: self.cols,
            range: BoundedRange::new(-r, r.max(f64::MIN_POSITIVE)).expect("symmetric range is valid"),
        }
    }

    /// Keep the given columns (samples) in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let values = (0..self.rows)
            .flat_map(|i| cols.iter().map(move |&j| self.values[i * self.cols + j]))
            .collect();
        Self { values, rows: self.rows, cols: cols.len(), range: self.range }
    }

    /// Keep the given rows (functions) in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let values = rows.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        Self { values, rows: rows.len(), cols: self.cols, range: self.range }
    }
}

/// How the empirical ℓ_p distance is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `((1/N) Σ |·|^p)^{1/p}`
    #[default]
    Normalized,
    /// `(Σ |·|^p)^{1/p}`
    Raw,
}

/// Normalized empirical ℓ_p distance between two rows.
pub fn empirical_lp_distance(row_i: &[f64], row_j: &[f64], p: f64) -> Result<f64> {
    lp_distance(row_i, row_j, p, Normalization::Normalized)
}

pub fn lp_distance(row_i: &[f64], row_j: &[f64], p: f64, norm: Normalization) -> Result<f64> {
    if row_i.len() != row_j.len() {
        return Err(ComplexityError::LengthMismatch(row_i.len(), row_j.len()));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(ComplexityError::Exponent(p));
    }
    if row_i.is_empty() {
        return Ok(0.0);
    }
    let diffs = row_i.iter().zip(row_j).map(|(a, b)| (a - b).abs());
    let sum: f64 = if p == 1.0 {
        diffs.sum()
    } else if p == 2.0 {
        diffs.map(|d| d * d).sum()
    } else {
        diffs.map(|d| d.powf(p)).sum()
    };
    let scaled = match norm {
        Normalization::Normalized => sum / row_i.len() as f64,
        Normalization::Raw => sum,
    };
    Ok(if p == 1.0 { scaled } else { scaled.powf(1.0 / p) })
}

fn pairwise(matrix: &EvaluationMatrix, p: f64) -> Result<Vec<f64>> {
    let m = matrix.rows();
    let mut d = vec![0.0; m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let v = empirical_lp_distance(matrix.row(i), matrix.row(j), p)?;
            d[i * m + j] = v;
            d[j * m + i] = v;
        }
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverMethod {
    Greedy,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverResult {
    pub size: usize,
    pub method: CoverMethod,
    pub radius: f64,
    pub metric_p: f64,
    pub centers: Vec<usize>,
}

/// Farthest-point traversal from row 0.
///
/// The visiting order does not depend on the radius, so the greedy cover at
/// any radius is a prefix of it and its size is nonincreasing in the radius.
#[derive(Debug, Clone)]
pub struct FarthestPointTraversal {
    order: Vec<usize>,
    /// `covering_radius[k]` = max distance to the first `k + 1` centers.
    covering_radius: Vec<f64>,
    metric_p: f64,
}

impl FarthestPointTraversal {
    pub fn new(matrix: &EvaluationMatrix, p: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(ComplexityError::Exponent(p));
        }
        let m = matrix.rows();
        let mut order = vec![0usize];
        let mut nearest: Vec<f64> = (0..m)
            .map(|i| empirical_lp_distance(matrix.row(i), matrix.row(0), p))
            .collect::<Result<_>>()?;
        let mut covering_radius = Vec::with_capacity(m);
        loop {
            let (far, &dist) = nearest
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .expect("at least one row");
            covering_radius.push(dist);
            if dist == 0.0 {
                break;
            }
            order.push(far);
            for (i, near) in nearest.iter_mut().enumerate() {
                let d = empirical_lp_distance(matrix.row(i), matrix.row(far), p)?;
                if d < *near {
                    *near = d;
                }
            }
        }
        Ok(Self { order, covering_radius, metric_p: p })
    }

    /// Number of centers needed for the given radius.
    pub fn size_at(&self, radius: f64) -> usize {
        self.covering_radius.iter().position(|&r| r <= radius).map_or(self.order.len(), |k| k + 1)
    }

    pub fn cover(&self, radius: f64) -> CoverResult {
        let size = self.size_at(radius);
        CoverResult {
            size,
            method: CoverMethod::Greedy,
            radius,
            metric_p: self.metric_p,
            centers: self.order[..size].to_vec(),
        }
    }

    /// Largest distance from row 0's traversal to the class: the radius at
    /// which one center suffices.
    pub fn one_center_radius(&self) -> f64 {
        self.covering_radius[0]
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && !radius.is_nan() {
        Ok(())
    } else {
        Err(ComplexityError::Radius(radius))
    }
}

/// Greedy (farthest-point) internal cover; an upper bound on the exact size.
pub fn covering_number_greedy(matrix: &EvaluationMatrix, radius: f64, p: f64) -> Result<CoverResult> {
    check_radius(radius)?;
    Ok(FarthestPointTraversal::new(matrix, p)?.cover(radius))
}

/// Minimum internal cover by branch-and-bound over sets of centers.
pub fn covering_number_exact(matrix: &EvaluationMatrix, radius: f64, p: f64) -> Result<CoverResult> {
    check_radius(radius)?;
    let m = matrix.rows();
    if m > EXACT_COVER_MAX_ROWS {
        return Err(ComplexityError::SizeGuard { what: "rows", got: m, limit: EXACT_COVER_MAX_ROWS });
    }
    let d = pairwise(matrix, p)?;
    let balls: Vec<u32> = (0..m)
        .map(|c| (0..m).filter(|&i| d[c * m + i] <= radius).fold(0u32, |acc, i| acc | (1 << i)))
        .collect();
    let full: u32 = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    let max_ball = balls.iter().map(|b| b.count_ones()).max().unwrap_or(1).max(1);

    let greedy = FarthestPointTraversal::new(matrix, p)?.cover(radius);
    let mut best = greedy.centers.clone();
    let mut chosen = Vec::with_capacity(m);

    fn search(
        covered: u32,
        full: u32,
        balls: &[u32],
        max_ball: u32,
        chosen: &mut Vec<usize>,
        best: &mut Vec<usize>,
    ) {
        if covered == full {
            if chosen.len() < best.len() {
                *best = chosen.clone();
            }
            return;
        }
        let remaining = (full & !covered).count_ones();
        let needed = remaining.div_ceil(max_ball) as usize;
        if chosen.len() + needed >= best.len() {
            return;
        }
        let target = (full & !covered).trailing_zeros();
        for (c, &ball) in balls.iter().enumerate() {
            if ball & (1 << target) != 0 {
                chosen.push(c);
                search(covered | ball, full, balls, max_ball, chosen, best);
                chosen.pop();
            }
        }
    }
    search(0, full, &balls, max_ball, &mut chosen, &mut best);
    best.sort_unstable();
    Ok(CoverResult { size: best.len(), method: CoverMethod::Exact, radius, metric_p: p, centers: best })
}

/// Produces the class evaluated on a fresh sample of the requested size.
pub trait ClassSampler: Sync {
    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> EvaluationMatrix;
}

/// A sampler that ignores randomness and returns one fixed matrix.
#[derive(Debug, Clone)]
pub struct FixedSampler(pub EvaluationMatrix);

impl ClassSampler for FixedSampler {
    fn sample(&self, _n: usize, _rng: &mut ChaCha8Rng) -> EvaluationMatrix {
        self.0.clone()
    }
}

/// Under-estimate of `sup_{Z ∈ 𝒵^{2N}} ln N(F, radius, ℓ_p(Z))`: the largest
/// log greedy cover over `draws` sampled datasets of `n_points` samples.
///
/// Draw `k` always uses the same random stream, so the estimate is
/// nondecreasing in `draws`.
pub fn uen_estimate<S: ClassSampler + ?Sized>(
    sampler: &S,
    n_points: usize,
    radius: f64,
    p: f64,
    draws: u64,
    seed: u64,
) -> Result<f64> {
    check_radius(radius)?;
    if draws == 0 {
        return Err(ComplexityError::TooFewTrials { min: 1, got: 0 });
    }
    let mut best = 0.0_f64;
    for k in 0..draws {
        let mut rng = rng::stream(seed, Domain::Uen, k);
        let matrix = sampler.sample(n_points, &mut rng);
        let size = covering_number_greedy(&matrix, radius, p)?.size;
        best = best.max((size as f64).ln());
    }
    Ok(best)
}

/// `E_σ max_i (1/N) Σ_n σ_n·f_i(z_n)` by enumerating all `2^N` sign vectors
/// in Gray-code order.
pub fn rademacher_exact(matrix: &EvaluationMatrix) -> Result<f64> {
    let n = matrix.cols();
    if n > EXACT_RADEMACHER_MAX_COLS {
        return Err(ComplexityError::SizeGuard {
            what: "samples",
            got: n,
            limit: EXACT_RADEMACHER_MAX_COLS,
        });
    }
    let m = matrix.rows();
    let mut signs = vec![1.0_f64; n];
    let mut sums: Vec<f64> = (0..m).map(|i| matrix.row(i).iter().sum()).collect();
    let max_of = |s: &[f64]| s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = max_of(&sums);
    let count: u64 = 1 << n;
    for k in 1..count {
        let j = k.trailing_zeros() as usize;
        signs[j] = -signs[j];
        for (i, s) in sums.iter_mut().enumerate() {
            *s += 2.0 * signs[j] * matrix.row(i)[j];
        }
        total += max_of(&sums);
    }
    Ok(total / (count as f64 * n as f64))
}

/// Monte Carlo estimate and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
}

fn sup_correlation(matrix: &EvaluationMatrix, rng: &mut ChaCha8Rng, signs: &mut [f64]) -> f64 {
    for s in signs.iter_mut() {
        *s = if rng.random::<bool>() { 1.0 } else { -1.0 };
    }
    let n = matrix.cols() as f64;
    (0..matrix.rows())
        .map(|i| matrix.row(i).iter().zip(signs.iter()).map(|(v, s)| v * s).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
        / n
}

/// Monte Carlo empirical Rademacher complexity over `trials` sign vectors.
pub fn rademacher_mc(matrix: &EvaluationMatrix, trials: u64, seed: u64) -> Result<McEstimate> {
    if trials < 100 {
        return Err(ComplexityError::TooFewTrials { min: 100, got: trials });
    }
    let partial = rng::run_batches(trials, 1, |b, count| {
        let mut rng = rng::stream(seed, Domain::RademacherSigns, b);
        let mut signs = vec![0.0; matrix.cols()];
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..count {
            let v = sup_correlation(matrix, &mut rng, &mut signs);
            s1 += v;
            s2 += v * v;
        }
        (s1, s2)
    });
    let (s1, s2) = partial.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    Ok(mean_and_stderr(s1, s2, trials))
}

fn mean_and_stderr(s1: f64, s2: f64, count: u64) -> McEstimate {
    let n = count as f64;
    let mean = s1 / n;
    let var = if count > 1 { ((s2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    McEstimate { estimate: mean, stderr: (var / n).sqrt() }
}

/// Expected Rademacher complexity: the outer loop resamples the dataset,
/// the inner loop runs [`rademacher_mc`] on it.
pub fn rademacher_expected_mc<S: ClassSampler + ?Sized>(
    sampler: &S,
    n: usize,
    trials_outer: u64,
    trials_inner: u64,
    seed: u64,
) -> Result<McEstimate> {
    if trials_outer == 0 {
        return Err(ComplexityError::TooFewTrials { min: 1, got: 0 });
    }
    let mut estimates = Vec::with_capacity(trials_outer as usize);
    let mut inner_var = 0.0;
    for k in 0..trials_outer {
        let mut rng = rng::stream(seed, Domain::RademacherData, k);
        let matrix = sampler.sample(n, &mut rng);
        let inner = rademacher_mc(&matrix, trials_inner, rng::derive_seed(seed, k))?;
        inner_var += inner.stderr * inner.stderr;
        estimates.push(inner.estimate);
    }
    let s1: f64 = estimates.iter().sum();
    let s2: f64 = estimates.iter().map(|v| v * v).sum();
    let mut out = mean_and_stderr(s1, s2, trials_outer);
    if trials_outer == 1 {
        out.stderr = inner_var.sqrt();
    }
    Ok(out)
}

/// Normalized ℓ₂ diameter of the class.
pub fn diameter(matrix: &EvaluationMatrix, p: f64) -> Result<f64> {
    Ok(pairwise(matrix, p)?.into_iter().fold(0.0, f64::max))
}

/// Dudley's entropy-integral bound on `R_N(F)` using greedy ℓ₂ covers.
///
/// Greedy covers over-count the exact covering number, which keeps the
/// result an upper bound.
pub fn dudley_for_matrix(matrix: &EvaluationMatrix, eps_grid: Option<&[f64]>) -> Result<DudleyResult> {
    let traversal = FarthestPointTraversal::new(matrix, 2.0)?;
    let xi_max = diameter(matrix, 2.0)?.max(1e-12);
    let default_grid;
    let grid = match eps_grid {
        Some(g) => g,
        None => {
            default_grid = bounds::default_dudley_grid(xi_max);
            &default_grid
        }
    };
    let log_cover = |xi: f64| (traversal.size_at(xi) as f64).ln();
    Ok(bounds::dudley_upper_bound(log_cover, matrix.cols() as u64, grid, xi_max)?)
}
