//! Radius-versus-N curves, log-log slope fits and convergence diagnostics.

use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{self, BoundedRange, UenValue};
use crate::special_functions::{self, BetaParam};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RatesError {
    #[error("slope fit needs at least {MIN_FIT_POINTS} points, got {0}")]
    TooFewPoints(usize),
    #[error("points must be positive and finite")]
    NonPositive,
    #[error("degenerate fit: all N values coincide")]
    Degenerate,
    #[error("N grid must be strictly increasing and positive")]
    Grid,
    #[error("x grid must lie in (0, 1/8]")]
    XGrid,
    #[error("rate CSV: {0}")]
    Csv(String),
    #[error(transparent)]
    Bounds(#[from] bounds::BoundsError),
    #[error(transparent)]
    Special(#[from] special_functions::SpecialFnError),
}

pub type Result<T> = std::result::Result<T, RatesError>;

pub const MIN_FIT_POINTS: usize = 5;

/// Radius inverters whose N-dependence is profiled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RateFamily {
    Hoeffding,
    /// Bernstein closed form as printed.
    Bernstein,
    /// Bernstein relaxation on the exact-inversion normalization.
    BernsteinScaled,
    /// `8(b−a)(L/(β₁N))^{1/γ}` at a fixed `(β₁, γ)`.
    BennettAlt { beta1: f64, gamma_exp: f64 },
    BennettExact,
}

impl RateFamily {
    pub fn tag(&self) -> String {
        match self {
            RateFamily::Hoeffding => "hoeffding".into(),
            RateFamily::Bernstein => "bernstein".into(),
            RateFamily::BernsteinScaled => "bernstein_scaled".into(),
            RateFamily::BennettAlt { beta1, gamma_exp } => format!("bennett_alt_b{beta1}_g{gamma_exp}"),
            RateFamily::BennettExact => "bennett_exact".into(),
        }
    }

    pub fn radius(&self, eps: f64, n: u64, range: &BoundedRange, uen: &UenValue) -> Result<f64> {
        Ok(match *self {
            RateFamily::Hoeffding => bounds::hoeffding_uen_radius(eps, n, range, uen)?,
            RateFamily::Bernstein => bounds::bernstein_uen_radius(eps, n, range, uen)?,
            RateFamily::BernsteinScaled => bounds::bernstein_uen_radius_scaled(eps, n, range, uen)?,
            RateFamily::BennettAlt { beta1, gamma_exp } => {
                bounds::bennett_alt_radius(eps, n, range, uen, beta1, gamma_exp)?.xi
            }
            RateFamily::BennettExact => bounds::bennett_uen_radius_exact(eps, n, range, uen)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedPoint {
    pub n: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub family: String,
    pub points: Vec<(u64, f64)>,
    pub fitted_slope: f64,
    pub slope_stderr: f64,
    pub fit_range: (u64, u64),
    pub dropped: Vec<DroppedPoint>,
}

impl RateCurve {
    /// OLS slopes over each decade `[10^k, 10^{k+1}]` holding at least two points.
    pub fn decade_slopes(&self) -> Vec<DecadeSlope> {
        let Some(&(first, _)) = self.points.first() else {
            return Vec::new();
        };
        let last = self.points.last().expect("nonempty").0;
        let (lo, hi) = ((first as f64).log10().floor() as i32, (last as f64).log10().ceil() as i32);
        (lo..hi)
            .filter_map(|k| {
                let (a, b) = (10f64.powi(k), 10f64.powi(k + 1));
                let pts: Vec<(f64, f64)> = self
                    .points
                    .iter()
                    .filter(|(n, _)| (*n as f64) >= a * (1.0 - 1e-12) && (*n as f64) <= b * (1.0 + 1e-12))
                    .map(|&(n, xi)| (n as f64, xi))
                    .collect();
                let (slope, _) = ols_loglog(&pts).ok()?;
                (pts.len() >= 2).then_some(DecadeSlope { decade_start: a as u64, slope })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecadeSlope {
    pub decade_start: u64,
    pub slope: f64,
}

/// `points` N values log-spaced over `[lo, hi]`, rounded and deduplicated.
pub fn log_spaced_counts(lo: u64, hi: u64, points: usize) -> Vec<u64> {
    let mut out: Vec<u64> = bounds::log_spaced(lo as f64, hi as f64, points)
        .into_iter()
        .map(|v| v.round() as u64)
        .collect();
    out.dedup();
    out
}

/// Default window: N ∈ [10³, 10⁹], 25 log-spaced points.
pub fn default_n_grid() -> Vec<u64> {
    log_spaced_counts(1_000, 1_000_000_000, 25)
}

/// Evaluate `family` along `n_grid`; points violating the family's
/// preconditions are dropped and listed.
pub fn radius_curve(
    family: RateFamily,
    eps: f64,
    range: &BoundedRange,
    uen: &UenValue,
    n_grid: &[u64],
) -> Result<RateCurve> {
    if n_grid.is_empty() || n_grid[0] == 0 || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(RatesError::Grid);
    }
    let mut points = Vec::new();
    let mut dropped = Vec::new();
    for &n in n_grid {
        match family.radius(eps, n, range, uen) {
            Ok(xi) if xi > 0.0 && xi.is_finite() => points.push((n, xi)),
            Ok(xi) => dropped.push(DroppedPoint { n, reason: format!("non-positive radius {xi}") }),
            Err(RatesError::Bounds(e)) => dropped.push(DroppedPoint { n, reason: e.to_string() }),
            Err(e) => return Err(e),
        }
    }
    let (fitted_slope, slope_stderr) = fit_loglog_slope(&points)?;
    Ok(RateCurve {
        family: family.tag(),
        fit_range: (points[0].0, points[points.len() - 1].0),
        points,
        fitted_slope,
        slope_stderr,
        dropped,
    })
}

/// OLS slope of `ln ξ` on `ln N` with its standard error.
pub fn fit_loglog_slope(points: &[(u64, f64)]) -> Result<(f64, f64)> {
    if points.len() < MIN_FIT_POINTS {
        return Err(RatesError::TooFewPoints(points.len()));
    }
    let pts: Vec<(f64, f64)> = points.iter().map(|&(n, xi)| (n as f64, xi)).collect();
    ols_loglog(&pts)
}

fn ols_loglog(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.iter().any(|&(n, xi)| !(n > 0.0 && xi > 0.0 && xi.is_finite())) {
        return Err(RatesError::NonPositive);
    }
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(RatesError::Degenerate);
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let stderr = if points.len() > 2 {
        let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
        (rss / (k - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok((slope, stderr))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub x: f64,
    pub gamma: f64,
    pub local_rate: f64,
}

/// `(x, γ(β₁;x), −1/γ)` along `x_grid ⊂ (0, 1/8]`.
pub fn large_deviation_profile(beta1: BetaParam, x_grid: &[f64]) -> Result<Vec<ProfileRow>> {
    if x_grid.iter().any(|&x| !(x > 0.0 && x <= 0.125)) {
        return Err(RatesError::XGrid);
    }
    x_grid
        .iter()
        .map(|&x| {
            let gamma = special_functions::gamma_exponent(beta1, x)?;
            Ok(ProfileRow { x, gamma, local_rate: -1.0 / gamma })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum ConvergenceVerdict {
    Convergent,
    NonVanishing,
    Unbounded,
}

impl ConvergenceVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            ConvergenceVerdict::Convergent => "CONVERGENT",
            ConvergenceVerdict::NonVanishing => "NON-VANISHING",
            ConvergenceVerdict::Unbounded => "UNBOUNDED",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub log_uen: f64,
    pub ratio: f64,
    /// `ln(8·N₁) + N·Γ(ξ/(8(b−a)))`, the log of the unclipped UEN tail bound.
    pub log_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub xi: f64,
    pub rows: Vec<ConvergenceRow>,
    pub verdict: ConvergenceVerdict,
}

/// The bound is deemed to vanish once its log falls below this.
const VANISH_LOG: f64 = -20.0;

/// Track `log_uen(N)/N` and the UEN tail bound at fixed `ξ` along `n_grid`.
///
/// UNBOUNDED when the ratio grows by more than a factor of two over the
/// grid; otherwise CONVERGENT when the bound's log is decreasing over the
/// second half of the grid and ends below −20, NON-VANISHING if not.
pub fn asymptotic_convergence_check<F>(
    uen_growth: F,
    n_grid: &[u64],
    xi: f64,
    range: &BoundedRange,
) -> Result<ConvergenceReport>
where
    F: Fn(u64) -> f64,
{
    if n_grid.len() < 2 || n_grid[0] == 0 || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(RatesError::Grid);
    }
    let g = special_functions::gamma_fn(xi / (8.0 * range.width()))?;
    let rows: Vec<ConvergenceRow> = n_grid
        .iter()
        .map(|&n| {
            let log_uen = uen_growth(n);
            let nf = n as f64;
            ConvergenceRow { n, log_uen, ratio: log_uen / nf, log_bound: 8f64.ln() + log_uen + nf * g }
        })
        .collect();
    let (first, last) = (rows[0].ratio, rows[rows.len() - 1].ratio);
    let verdict = if !last.is_finite() || last > 2.0 * first.max(0.0) + 1e-12 && last > first {
        ConvergenceVerdict::Unbounded
    } else {
        let tail = &rows[rows.len() / 2..];
        let decreasing = tail.windows(2).all(|w| w[1].log_bound < w[0].log_bound);
        if decreasing && tail[tail.len() - 1].log_bound < VANISH_LOG {
            ConvergenceVerdict::Convergent
        } else {
            ConvergenceVerdict::NonVanishing
        }
    };
    Ok(ConvergenceReport { xi, rows, verdict })
}

/// One row of a rate CSV (`family,N,xi`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub family: String,
    #[serde(rename = "N")]
    pub n: u64,
    pub xi: f64,
}

pub fn read_rate_csv<R: Read>(reader: R) -> Result<Vec<RateRow>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e: csv::Error| RatesError::Csv(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn uen5() -> UenValue {
        UenValue::user(5.0).unwrap()
    }

    #[test]
    fn exact_power_laws() {
        let pts: Vec<(u64, f64)> = [10u64, 100, 1000, 10_000, 100_000]
            .iter()
            .map(|&n| (n, (n as f64).powf(-0.5)))
            .collect();
        let (s, e) = fit_loglog_slope(&pts).unwrap();
        assert!((s + 0.5).abs() < 1e-10 && e < 1e-10);
        let pts: Vec<(u64, f64)> = (1..=8).map(|k| (k * 37, 3.0 * ((k * 37) as f64).powf(-0.7))).collect();
        assert!((fit_loglog_slope(&pts).unwrap().0 + 0.7).abs() < 1e-10);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<(u64, f64)> = log_spaced_counts(100, 10_000_000, 25)
            .into_iter()
            .map(|n| (n, 2.0 * (n as f64).powf(-0.6) * (1.0 + 0.01 * (2.0 * rng.random::<f64>() - 1.0))))
            .collect();
        assert!((fit_loglog_slope(&pts).unwrap().0 + 0.6).abs() < 0.02);
    }

    #[test]
    fn fit_errors() {
        assert_eq!(fit_loglog_slope(&[(1, 1.0); 3]), Err(RatesError::TooFewPoints(3)));
        assert_eq!(fit_loglog_slope(&[(7, 1.0); 6]), Err(RatesError::Degenerate));
        assert_eq!(
            fit_loglog_slope(&[(1, 1.0), (2, 0.0), (3, 1.0), (4, 1.0), (5, 1.0)]),
            Err(RatesError::NonPositive)
        );
    }

    #[test]
    fn closed_form_families() {
        let r = BoundedRange::unit();
        let grid = default_n_grid();
        let h = radius_curve(RateFamily::Hoeffding, 0.05, &r, &uen5(), &grid).unwrap();
        assert!((h.fitted_slope + 0.5).abs() < 1e-10);
        let alt = RateFamily::BennettAlt { beta1: 0.3, gamma_exp: 1.6 };
        let a = radius_curve(alt, 0.05, &r, &uen5(), &grid).unwrap();
        assert!((a.fitted_slope + 0.625).abs() < 1e-10);
    }

    #[test]
    fn exact_inversion_drifts_towards_half() {
        let r = BoundedRange::unit();
        let c = radius_curve(RateFamily::BennettExact, 0.05, &r, &uen5(), &default_n_grid()).unwrap();
        assert_eq!(c.dropped.len(), 1);
        assert_eq!(c.dropped[0].n, 1000);
        assert!(c.fitted_slope > -0.51 && c.fitted_slope < -0.5, "{}", c.fitted_slope);
        let local = c.decade_slopes();
        assert!(local.len() >= 5);
        assert!(local.windows(2).all(|w| w[1].slope > w[0].slope));
    }

    #[test]
    fn exact_below_scaled_bernstein() {
        let r = BoundedRange::unit();
        for n in log_spaced_counts(2000, 1_000_000_000, 20) {
            let e = RateFamily::BennettExact.radius(0.05, n, &r, &uen5()).unwrap();
            let b = RateFamily::BernsteinScaled.radius(0.05, n, &r, &uen5()).unwrap();
            assert!(e <= b);
        }
    }

    #[test]
    fn too_few_valid_points() {
        let r = BoundedRange::unit();
        let err = radius_curve(RateFamily::BennettExact, 0.05, &r, &uen5(), &[10, 20, 30, 40, 50, 100_000]);
        assert_eq!(err.unwrap_err(), RatesError::TooFewPoints(1));
    }

    #[test]
    fn profile_shapes() {
        let grid = crate::bounds::log_spaced(1e-8, 0.125, 200);
        let p = large_deviation_profile(BetaParam::new(0.4).unwrap(), &grid).unwrap();
        assert!(p.windows(2).all(|w| w[1].gamma < w[0].gamma));
        assert!(p[0].gamma > 1.88 && p[0].local_rate < -0.5);
        let p = large_deviation_profile(BetaParam::new(0.47).unwrap(), &grid).unwrap();
        let imin = (0..p.len()).min_by(|&i, &j| p[i].gamma.total_cmp(&p[j].gamma)).unwrap();
        assert!(imin > 0 && imin < p.len() - 1);
        let m = crate::constants::classify_gamma_monotonicity(BetaParam::new(0.47).unwrap(), 0.125).unwrap();
        let x0 = m.minimizer_x.unwrap();
        assert!(p[imin - 1].x <= x0 && x0 <= p[imin + 1].x);
        assert!(large_deviation_profile(BetaParam::new(0.4).unwrap(), &[0.2]).is_err());
    }

    #[test]
    fn convergence_verdicts() {
        let r = BoundedRange::unit();
        let grid = log_spaced_counts(100, 10_000_000, 12);
        let v = |f: &dyn Fn(u64) -> f64| asymptotic_convergence_check(f, &grid, 0.5, &r).unwrap().verdict;
        assert_eq!(v(&|_| 5.0), ConvergenceVerdict::Convergent);
        assert_eq!(v(&|n| (n as f64).sqrt()), ConvergenceVerdict::Convergent);
        assert_eq!(v(&|n| 2.0 * n as f64), ConvergenceVerdict::NonVanishing);
        assert_eq!(v(&|n| (n as f64).powf(1.5)), ConvergenceVerdict::Unbounded);
    }

    #[test]
    fn csv_reader() {
        let text = "family,N,xi\nhoeffding,1000,0.5678\nhoeffding,2000,0.4015\n";
        let rows = read_rate_csv(text.as_bytes()).unwrap();
        assert_eq!(rows[1], RateRow { family: "hoeffding".into(), n: 2000, xi: 0.4015 });
        assert!(read_rate_csv("family,N\nx,1\n".as_bytes()).is_err());
    }
}
