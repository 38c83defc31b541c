//! Scalar functions underlying the Bennett-type bounds.
//!
//! ```text
//! Γ(x)    = x − (1+x)·ln(1+x)                      (x > −1)
//! γ(β; x) = ln( ((x+1)·ln(x+1) − x) / β ) / ln x   (0 < x < 1)
//! ```
//!
//! Γ is the exponent of Bennett's inequality; it is nonpositive and
//! strictly decreasing on `[0, ∞)`, so it has a well-defined inverse there
//! even though no closed form exists. γ(β; x) solves `Γ(x) = −β·x^γ`.

use thiserror::Error;

/// Below this magnitude Γ is evaluated from its power series.
const SERIES_CUTOFF: f64 = 1e-2;

/// |ln x| below this makes γ(β; x) numerically unreliable (pole at x = 1).
pub const EXPONENT_POLE_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialFnError {
    #[error("normalized deviation {0} is outside the domain x > -1")]
    GammaDomain(f64),
    #[error("Γ⁻¹ is only defined for y ≤ 0, got {0}")]
    InverseDomain(f64),
    #[error("exponent query out of domain: beta = {beta}, x = {x} (need beta > 0, 0 < x < 1)")]
    ExponentDomain { beta: f64, x: f64 },
    #[error("Bernstein approximation needs x ≥ 0, got {0}")]
    BernsteinDomain(f64),
}

pub type Result<T> = std::result::Result<T, SpecialFnError>;

/// Dimensionless normalized deviation, the argument of Γ.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct GammaArg(f64);

impl GammaArg {
    pub fn new(x: f64) -> Result<Self> {
        if x.is_nan() || x <= -1.0 {
            return Err(SpecialFnError::GammaDomain(x));
        }
        Ok(Self(x))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Coefficient β of the exponent equation `Γ(x) = −β·x^γ`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BetaParam(f64);

impl BetaParam {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(SpecialFnError::ExponentDomain { beta, x: f64::NAN });
        }
        Ok(Self(beta))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// True when β lies strictly inside the open interval `(lo, hi)`.
    pub fn within(self, lo: f64, hi: f64) -> bool {
        self.0 > lo && self.0 < hi
    }
}

/// Γ(x) = x − (1+x)·ln(1+x).
pub fn gamma_fn(x: f64) -> Result<f64> {
    let x = GammaArg::new(x)?.get();
    Ok(gamma_unchecked(x))
}

/// (x+1)·ln(x+1) − x = −Γ(x), evaluated without the cancellation near 0.
pub(crate) fn neg_gamma(x: f64) -> f64 {
    -gamma_unchecked(x)
}

fn gamma_unchecked(x: f64) -> f64 {
    if x.abs() < SERIES_CUTOFF {
        gamma_series(x)
    } else if x.is_infinite() {
        f64::NEG_INFINITY
    } else {
        x - (1.0 + x) * x.ln_1p()
    }
}

// Γ(x) = −Σ_{k≥2} (−1)^k x^k / (k(k−1)); summed until the term no longer
// moves the partial sum.
fn gamma_series(x: f64) -> f64 {
    let mut power = x * x;
    let mut sum = 0.0;
    let mut k = 2.0_f64;
    loop {
        let term = power / (k * (k - 1.0));
        let next = sum + term;
        if next == sum || k > 60.0 {
            break;
        }
        sum = next;
        power *= -x;
        k += 1.0;
    }
    -sum
}

/// dΓ/dx = −ln(1+x).
pub fn gamma_derivative(x: f64) -> Result<f64> {
    let x = GammaArg::new(x)?.get();
    Ok(-x.ln_1p())
}

/// Unique `x ≥ 0` with `Γ(x) = y`, for `y ≤ 0`.
///
/// Bracket by doubling, bisect to a relative width of 1e−13, then polish
/// with two Newton steps using `Γ'(x) = −ln(1+x)`.
pub fn gamma_inverse(y: f64) -> Result<f64> {
    if y.is_nan() || y > 0.0 {
        return Err(SpecialFnError::InverseDomain(y));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y.is_infinite() {
        return Ok(f64::INFINITY);
    }
    // |Γ(x)| ≤ x²/2 on [0, ∞), so the root is at least sqrt(2|y|).
    let mut lo = (-2.0 * y).sqrt();
    if gamma_unchecked(lo) <= y {
        return Ok(lo);
    }
    let mut hi = 2.0 * lo;
    while gamma_unchecked(hi) > y {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gamma_unchecked(mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..2 {
        let slope = -x.ln_1p();
        if slope == 0.0 {
            break;
        }
        let step = (gamma_unchecked(x) - y) / slope;
        let candidate = x - step;
        if candidate.is_finite() && candidate > 0.0 {
            x = candidate;
        }
    }
    Ok(x)
}

/// Value of γ(β; x) together with a reliability flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentValue {
    pub value: f64,
    /// False when `|ln x|` is below [`EXPONENT_POLE_GUARD`].
    pub reliable: bool,
}

/// γ(β; x) = ln(((x+1)ln(x+1) − x)/β) / ln x, with the pole flag.
pub fn gamma_exponent_checked(beta: f64, x: f64) -> Result<ExponentValue> {
    // x = 1 is the ln x = 0 pole
    if !(beta > 0.0 && beta.is_finite()) || !(x > 0.0 && x < 1.0) {
        return Err(SpecialFnError::ExponentDomain { beta, x });
    }
    let ln_x = x.ln();
    let value = (neg_gamma(x) / beta).ln() / ln_x;
    Ok(ExponentValue {
        value,
        reliable: ln_x.abs() >= EXPONENT_POLE_GUARD,
    })
}

/// γ(β; x), the exponent solving `Γ(x) = −β·x^γ`.
pub fn gamma_exponent(beta: BetaParam, x: f64) -> Result<f64> {
    gamma_exponent_checked(beta.get(), x).map(|v| v.value)
}

/// ∂γ(β; x)/∂x by the quotient rule.
///
/// With `g(x) = (x+1)ln(x+1) − x` and `g'(x) = ln(1+x)`:
/// `γ' = [ (g'/g)·ln x − ln(g/β)/x ] / (ln x)²`.
pub fn gamma_exponent_derivative(beta: BetaParam, x: f64) -> Result<f64> {
    gamma_exponent_checked(beta.get(), x)?;
    let ln_x = x.ln();
    let g = neg_gamma(x);
    let dg = x.ln_1p();
    Ok(((dg / g) * ln_x - (g / beta.get()).ln() / x) / (ln_x * ln_x))
}

/// Central finite-difference derivative of γ(β; ·) with step `1e−7·x`.
pub fn gamma_exponent_derivative_fd(beta: BetaParam, x: f64) -> Result<f64> {
    let h = 1e-7 * x;
    let up = gamma_exponent(beta, x + h)?;
    let down = gamma_exponent(beta, x - h)?;
    Ok((up - down) / (2.0 * h))
}

/// Bernstein relaxation of Γ: `−x² / (2 + 2x/3)`.
pub fn bernstein_approx(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(SpecialFnError::BernsteinDomain(x));
    }
    Ok(-x * x / (2.0 + 2.0 * x / 3.0))
}
