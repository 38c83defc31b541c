//! Tail and generalization bounds: forward (deviation → probability) and
//! backward (confidence → radius).
//!
//! Hoeffding-type baselines sit next to the Bennett-type bounds built on
//! Γ(x) = x − (1+x)ln(1+x). Every Bennett exponent is written as
//! `exp{+N·Γ(·)}`; since Γ ≤ 0 on the relevant domain this is the only
//! sign under which the bounds decay.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special_functions::{self, gamma_fn, gamma_inverse, SpecialFnError};

/// β₁ interval for the UEN-based alternative radius.
pub const BETA1_INTERVAL: (f64, f64) = (0.0075, 0.4804);
/// β₂ interval for the Rademacher-based Bennett bound.
pub const BETA2_INTERVAL: (f64, f64) = (0.0075, 0.3863);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("invalid range [{a}, {b}]: need a < b")]
    Range { a: f64, b: f64 },
    #[error("confidence level eps = {0} outside (0, 1)")]
    Confidence(f64),
    #[error("sample count must be positive")]
    ZeroSamples,
    #[error("deviation xi = {xi} outside the admissible domain {domain}")]
    Deviation { xi: f64, domain: &'static str },
    #[error("bounded-difference constant c = {0} must be positive")]
    DifferenceConstant(f64),
    #[error("exponent gamma = {0} must be positive")]
    Exponent(f64),
    #[error("log covering number must be finite and nonnegative, got {0}")]
    LogUen(f64),
    #[error(
        "required normalized deviation x = {required_x} exceeds 1/8; the radius saturates at b - a"
    )]
    Saturated { required_x: f64 },
    #[error("eps = {eps} must lie in (0, {limit})")]
    InversionDomain { eps: f64, limit: f64 },
    #[error("covering function increases between xi = {lo} and xi = {hi}")]
    NonMonotoneCovering { lo: f64, hi: f64 },
    #[error("empty or invalid grid: {0}")]
    Grid(&'static str),
    #[error(transparent)]
    Special(#[from] SpecialFnError),
}

pub type Result<T> = std::result::Result<T, BoundsError>;

/// The interval `[a, b]` housing function values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct BoundedRange {
    a: f64,
    b: f64,
}

impl TryFrom<[f64; 2]> for BoundedRange {
    type Error = BoundsError;

    fn try_from(r: [f64; 2]) -> Result<Self> {
        Self::new(r[0], r[1])
    }
}

impl From<BoundedRange> for [f64; 2] {
    fn from(r: BoundedRange) -> Self {
        [r.a, r.b]
    }
}

impl BoundedRange {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(BoundsError::Range { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn unit() -> Self {
        Self { a: 0.0, b: 1.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.a && v <= self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UenSource {
    Measured,
    Analytic,
    UserSupplied,
}

/// `ln N₁(F, ξ/8, 2N)`, the log uniform entropy number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UenValue {
    log_uen: f64,
    source: UenSource,
}

impl UenValue {
    pub fn new(log_uen: f64, source: UenSource) -> Result<Self> {
        if !(log_uen.is_finite() && log_uen >= 0.0) {
            return Err(BoundsError::LogUen(log_uen));
        }
        Ok(Self { log_uen, source })
    }

    pub fn user(log_uen: f64) -> Result<Self> {
        Self::new(log_uen, UenSource::UserSupplied)
    }

    pub fn log_uen(&self) -> f64 {
        self.log_uen
    }

    pub fn source(&self) -> UenSource {
        self.source
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundFamily {
    HoeffdingUEN,
    BennettSum,
    BennettBdiff,
    BennettUEN,
    BernsteinAltUEN,
    BennettAltUEN,
    RademacherClassical,
    RademacherBennett,
}

impl BoundFamily {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::HoeffdingUEN => "hoeffding_uen",
            Self::BennettSum => "bennett_sum",
            Self::BennettBdiff => "bennett_bdiff",
            Self::BennettUEN => "bennett_uen",
            Self::BernsteinAltUEN => "bernstein_alt_uen",
            Self::BennettAltUEN => "bennett_alt_uen",
            Self::RademacherClassical => "rademacher_classical",
            Self::RademacherBennett => "rademacher_bennett",
        }
    }
}

/// Precondition that did not hold; the value is still computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundFlag {
    /// N below `8(b−a)²/ξ²`.
    SampleSizeBelowThreshold { required: f64 },
    /// ξ above `b − a`.
    DeviationAboveRange,
    /// γ ≥ 2 voids the alternative expression.
    ExponentNotBelowTwo,
    BetaOutsideInterval { lo: f64, hi: f64 },
}

/// A probability-valued bound; `value` is clipped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub value: f64,
    pub value_raw: f64,
    pub family: BoundFamily,
    pub valid: bool,
    pub flags: Vec<BoundFlag>,
}

impl BoundResult {
    fn new(raw: f64, family: BoundFamily, flags: Vec<BoundFlag>) -> Self {
        Self {
            value: raw.clamp(0.0, 1.0),
            value_raw: raw,
            family,
            valid: flags.is_empty(),
            flags,
        }
    }
}

/// A radius (deviation) with flagged preconditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusResult {
    pub xi: f64,
    pub valid: bool,
    pub flags: Vec<BoundFlag>,
}

impl RadiusResult {
    fn new(xi: f64, flags: Vec<BoundFlag>) -> Self {
        Self { xi, valid: flags.is_empty(), flags }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(BoundsError::Confidence(eps))
    }
}

fn check_n(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(BoundsError::ZeroSamples);
    }
    Ok(n as f64)
}

fn check_positive_xi(xi: f64) -> Result<()> {
    if xi > 0.0 && xi.is_finite() {
        Ok(())
    } else {
        Err(BoundsError::Deviation { xi, domain: "xi > 0" })
    }
}

fn sample_size_flag(xi: f64, n: f64, range: &BoundedRange) -> Option<BoundFlag> {
    let required = 8.0 * range.width().powi(2) / (xi * xi);
    (n < required).then_some(BoundFlag::SampleSizeBelowThreshold { required })
}

fn check_beta(beta: f64, interval: (f64, f64), flags: &mut Vec<BoundFlag>) -> Result<()> {
    special_functions::BetaParam::new(beta)?;
    if !(beta > interval.0 && beta < interval.1) {
        flags.push(BoundFlag::BetaOutsideInterval { lo: interval.0, hi: interval.1 });
    }
    Ok(())
}

fn check_gamma_exp(gamma_exp: f64, flags: &mut Vec<BoundFlag>) -> Result<()> {
    if !(gamma_exp > 0.0 && gamma_exp.is_finite()) {
        return Err(BoundsError::Exponent(gamma_exp));
    }
    if gamma_exp >= 2.0 {
        flags.push(BoundFlag::ExponentNotBelowTwo);
    }
    Ok(())
}

/// `L = ln N₁ − ln(ε/8)`, the complexity-plus-confidence term.
fn log_term(uen: &UenValue, eps: f64) -> f64 {
    uen.log_uen - (eps / 8.0).ln()
}

/// `8·N₁·exp{−Nξ²/(32(b−a)²)}`.
pub fn hoeffding_uen_tail(xi: f64, n: u64, range: &BoundedRange, uen: &UenValue) -> Result<BoundResult> {
    check_positive_xi(xi)?;
    let nf = check_n(n)?;
    let w = range.width();
    let flags = sample_size_flag(xi, nf, range).into_iter().collect();
    let raw = 8.0 * (uen.log_uen - nf * xi * xi / (32.0 * w * w)).exp();
    Ok(BoundResult::new(raw, BoundFamily::HoeffdingUEN, flags))
}

/// `(b−a)·sqrt(32·L/N)`.
pub fn hoeffding_uen_radius(eps: f64, n: u64, range: &BoundedRange, uen: &UenValue) -> Result<f64> {
    check_eps(eps)?;
    let nf = check_n(n)?;
    Ok(range.width() * (32.0 * log_term(uen, eps) / nf).sqrt())
}

/// Two-sided tail of a sum of N range-bounded variables:
/// `2·exp{N·Γ(ξ/(N(b−a)))}`, for `0 < ξ < N(b−a)`.
pub fn bennett_sum_tail(xi: f64, n: u64, range: &BoundedRange) -> Result<BoundResult> {
    let nf = check_n(n)?;
    let total = nf * range.width();
    if !(xi > 0.0 && xi < total) {
        return Err(BoundsError::Deviation { xi, domain: "0 < xi < N(b-a)" });
    }
    let raw = 2.0 * (nf * gamma_fn(xi / total)?).exp();
    Ok(BoundResult::new(raw, BoundFamily::BennettSum, Vec::new()))
}

/// One-sided tail under the bounded-difference condition with constant `c`:
/// `exp{N·Γ(ξ/(N·c))}`.
pub fn bennett_bdiff_tail(xi: f64, n: u64, c: f64) -> Result<BoundResult> {
    check_positive_xi(xi)?;
    let nf = check_n(n)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(BoundsError::DifferenceConstant(c));
    }
    let raw = (nf * gamma_fn(xi / (nf * c))?).exp();
    Ok(BoundResult::new(raw, BoundFamily::BennettBdiff, Vec::new()))
}

/// `8·N₁·exp{N·Γ(ξ/(8(b−a)))}`.
pub fn bennett_uen_tail(xi: f64, n: u64, range: &BoundedRange, uen: &UenValue) -> Result<BoundResult> {
    check_positive_xi(xi)?;
    let nf = check_n(n)?;
    let mut flags = Vec::new();
    if xi > range.width() {
        flags.push(BoundFlag::DeviationAboveRange);
    }
    flags.extend(sample_size_flag(xi, nf, range));
    let x = xi / (8.0 * range.width());
    let raw = 8.0 * (uen.log_uen + nf * gamma_fn(x)?).exp();
    Ok(BoundResult::new(raw, BoundFamily::BennettUEN, flags))
}

/// Closed-form Bernstein-type radius exactly as printed:
/// `4(b−a)L/(3N) + (b−a)·sqrt(2L/N)`.
///
/// This expression is smaller than the exact inversion of
/// [`bennett_uen_tail`]; see [`bernstein_uen_radius_scaled`] for the
/// relaxation on the same normalization.
pub fn bernstein_uen_radius(eps: f64, n: u64, range: &BoundedRange, uen: &UenValue) -> Result<f64> {
    check_eps(eps)?;
    let nf = check_n(n)?;
    Ok(bernstein_from_log_term(log_term(uen, eps), nf, range.width()))
}

fn bernstein_from_log_term(l: f64, nf: f64, w: f64) -> f64 {
    4.0 * w * l / (3.0 * nf) + w * (2.0 * l).sqrt() / nf.sqrt()
}

/// Bernstein relaxation of [`bennett_uen_tail`] in closed form.
///
/// Replacing Γ(x) by `−x²/(2+2x/3)` with `x = ξ/(8(b−a))` and solving
/// `N·x²/(2+2x/3) = L` gives `x = L/(3N) + sqrt(L²/(9N²) + 2L/N)`, which is
/// relaxed with `sqrt(u+v) ≤ sqrt(u) + sqrt(v)` to
/// `ξ = 8(b−a)·(2L/(3N) + sqrt(2L/N))`. Always at least the exact radius.
pub fn bernstein_uen_radius_scaled(eps: f64, n: u64, range: &BoundedRange, uen: &UenValue) -> Result<f64> {
    check_eps(eps)?;
    let nf = check_n(n)?;
    let l = log_term(uen, eps);
    Ok(8.0 * range.width() * (2.0 * l / (3.0 * nf) + (2.0 * l / nf).sqrt()))
}

/// Bennett-type alternative radius `8(b−a)·(L/(β₁N))^{1/γ}`.
pub fn bennett_alt_radius(
    eps: f64,
    n: u64,
    range: &BoundedRange,
    uen: &UenValue,
    beta1: f64,
    gamma_exp: f64,
) -> Result<RadiusResult> {
    check_eps(eps)?;
    let nf = check_n(n)?;
    let mut flags = Vec::new();
    check_beta(beta1, BETA1_INTERVAL, &mut flags)?;
    check_gamma_exp(gamma_exp, &mut flags)?;
    let base = log_term(uen, eps) / (beta1 * nf);
    Ok(RadiusResult::new(8.0 * range.width() * base.powf(1.0 / gamma_exp), flags))
}

/// Exact inversion of [`bennett_uen_tail`]:
/// `ξ = 8(b−a)·Γ⁻¹((ln(ε/8) − ln N₁)/N)`.
///
/// Fails with [`BoundsError::Saturated`] when the required normalized
/// deviation exceeds 1/8, i.e. the radius would exceed `b − a`.
pub fn bennett_uen_radius_exact(eps: f64, n: u64, range: &BoundedRange, uen: &UenValue) -> Result<f64> {
    let nf = check_n(n)?;
    let limit = 8.0 * uen.log_uen.exp();
    if !(eps > 0.0 && eps <= limit) {
        return Err(BoundsError::InversionDomain { eps, limit });
    }
    let y = -log_term(uen, eps) / nf;
    let x = gamma_inverse(y.min(0.0))?;
    if x > 0.125 {
        return Err(BoundsError::Saturated { required_x: x });
    }
    Ok(8.0 * range.width() * x)
}

/// Risk, population and empirical Rademacher complexity inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RademacherInputs {
    pub emp_risk: f64,
    pub rad: f64,
    pub emp_rad: f64,
}

/// `E_N f + 2R(F) + (b−a)·sqrt(ln(1/ε)/N)`, or with `use_empirical`
/// `E_N f + 2R_N(F) + 3(b−a)·sqrt(ln(2/ε)/(2N))`.
pub fn rademacher_bound_classical(
    inputs: &RademacherInputs,
    n: u64,
    range: &BoundedRange,
    eps: f64,
    use_empirical: bool,
) -> Result<f64> {
    check_eps(eps)?;
    let nf = check_n(n)?;
    let w = range.width();
    Ok(if use_empirical {
        inputs.emp_risk + 2.0 * inputs.emp_rad + 3.0 * w * ((2.0 / eps).ln() / (2.0 * nf)).sqrt()
    } else {
        inputs.emp_risk + 2.0 * inputs.rad + w * ((1.0 / eps).ln() / nf).sqrt()
    })
}

/// `E_N f + 2R(F) + (b−a)·(ln(1/ε)/(β₂N))^{1/γ}`, or with `use_empirical`
/// `E_N f + 2R_N(F) + 3(b−a)·(ln(2/ε)/(β₂N))^{1/γ}`.
pub fn rademacher_bound_bennett(
    inputs: &RademacherInputs,
    n: u64,
    range: &BoundedRange,
    eps: f64,
    beta2: f64,
    gamma_exp: f64,
    use_empirical: bool,
) -> Result<RadiusResult> {
    check_eps(eps)?;
    let nf = check_n(n)?;
    let mut flags = Vec::new();
    check_beta(beta2, BETA2_INTERVAL, &mut flags)?;
    check_gamma_exp(gamma_exp, &mut flags)?;
    let w = range.width();
    let inv = 1.0 / gamma_exp;
    let value = if use_empirical {
        inputs.emp_risk + 2.0 * inputs.emp_rad + 3.0 * w * ((2.0 / eps).ln() / (beta2 * nf)).powf(inv)
    } else {
        inputs.emp_risk + 2.0 * inputs.rad + w * ((1.0 / eps).ln() / (beta2 * nf)).powf(inv)
    };
    Ok(RadiusResult::new(value, flags))
}

/// Which inequality relates `R(F)` to `R_N(F)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PopulationFamily {
    Hoeffding,
    Bennett { beta2: f64, gamma_exp: f64 },
}

/// Upper bound on `R(F)` from `R_N(F)`.
pub fn rad_population_from_empirical(
    emp_rad: f64,
    n: u64,
    range: &BoundedRange,
    eps: f64,
    family: PopulationFamily,
) -> Result<RadiusResult> {
    check_eps(eps)?;
    let nf = check_n(n)?;
    let w = range.width();
    match family {
        PopulationFamily::Hoeffding => Ok(RadiusResult::new(
            emp_rad + w * ((2.0 / eps).ln() / (2.0 * nf)).sqrt(),
            Vec::new(),
        )),
        PopulationFamily::Bennett { beta2, gamma_exp } => {
            let mut flags = Vec::new();
            check_beta(beta2, BETA2_INTERVAL, &mut flags)?;
            check_gamma_exp(gamma_exp, &mut flags)?;
            let dev = w * ((2.0 / eps).ln() / (beta2 * nf)).powf(1.0 / gamma_exp);
            Ok(RadiusResult::new(emp_rad + dev, flags))
        }
    }
}

/// Dudley entropy-integral bound and the grid point attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DudleyResult {
    pub bound: f64,
    pub best_eps: f64,
}

/// 64 log-spaced points spanning `[1e−4, xi_max]`.
pub fn default_dudley_grid(xi_max: f64) -> Vec<f64> {
    let lo = 1e-4_f64.min(xi_max);
    log_spaced(lo, xi_max, 64)
}

pub(crate) fn log_spaced(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 || lo == hi {
        return vec![lo];
    }
    let (l, h) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            if i == points - 1 {
                hi
            } else {
                (l + (h - l) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

/// `min_{ε ∈ grid} 4ε + 12·∫_ε^{ξ_max} sqrt(ln N(ξ)/N) dξ`.
///
/// `log_cover` must be nonincreasing and vanish at `xi_max`. The integral is
/// taken by adaptive upper Riemann sums, so the returned value never
/// undershoots the exact infimum over the grid.
pub fn dudley_upper_bound<F>(log_cover: F, n: u64, eps_grid: &[f64], xi_max: f64) -> Result<DudleyResult>
where
    F: Fn(f64) -> f64,
{
    let nf = check_n(n)?;
    if eps_grid.is_empty() || eps_grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(BoundsError::Grid("eps grid must be nonempty and positive"));
    }
    if !(xi_max > 0.0 && xi_max.is_finite()) {
        return Err(BoundsError::Grid("xi_max must be positive"));
    }
    let integrand = |xi: f64| (log_cover(xi).max(0.0) / nf).sqrt();

    let mut grid: Vec<f64> = eps_grid.iter().map(|e| e.min(xi_max)).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    // tail[i] = ∫_{grid[i]}^{xi_max}
    let mut tail = vec![0.0; grid.len()];
    let mut acc = 0.0;
    let mut upper = xi_max;
    for i in (0..grid.len()).rev() {
        if grid[i] < upper {
            acc += integrate_nonincreasing(&integrand, grid[i], upper, 0)?;
        }
        tail[i] = acc;
        upper = grid[i];
    }

    let (best_eps, bound) = grid
        .iter()
        .zip(&tail)
        .map(|(&e, &t)| (e, 4.0 * e + 12.0 * t))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("grid is nonempty");
    Ok(DudleyResult { bound, best_eps })
}

fn integrate_nonincreasing<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, depth: u32) -> Result<f64> {
    let (fl, fh) = (f(lo), f(hi));
    if fh > fl * (1.0 + 1e-12) + 1e-300 {
        return Err(BoundsError::NonMonotoneCovering { lo, hi });
    }
    let width = hi - lo;
    if (fl - fh) * width <= 1e-12 || depth >= 60 {
        return Ok(fl * width);
    }
    let mid = 0.5 * (lo + hi);
    Ok(integrate_nonincreasing(f, lo, mid, depth + 1)? + integrate_nonincreasing(f, mid, hi, depth + 1)?)
}

/// Unnormalized Sudakov-type lower-bound shape:
/// `(1/ln N)·sup_{ξ ∈ grid} ξ·sqrt(ln N(ξ)/N)` with the unknown constant set
/// to 1. Only meaningful for comparing shapes, never as an inequality.
pub fn sudakov_shape_unnormalized<F>(log_cover: F, n: u64, grid: &[f64]) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let nf = check_n(n)?;
    if n < 2 {
        return Err(BoundsError::Grid("Sudakov shape needs N >= 2"));
    }
    let sup = grid
        .iter()
        .map(|&xi| xi * (log_cover(xi).max(0.0) / nf).sqrt())
        .fold(0.0, f64::max);
    Ok(sup / nf.ln())
}
