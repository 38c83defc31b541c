use super::config::{range_of, EvalFamily, InvertFamily, RunConfig};
use super::{Cell, CommandOutput, ReportError, Status, Table};
use crate::bounds::{self, BoundFlag, BoundResult, BoundsError, UenValue};
use crate::complexity::{self, EvaluationMatrix};
use crate::constants::{self, round_decimals, Monotonicity};
use crate::rates::{self, RateFamily};
use crate::simulate::{self, McConfig};
use crate::special_functions::{self, BetaParam};

type Result<T> = std::result::Result<T, ReportError>;

fn flag_label(f: &BoundFlag) -> String {
    match f {
        BoundFlag::SampleSizeBelowThreshold { required } => format!("sample_size_below:{required:?}"),
        BoundFlag::DeviationAboveRange => "deviation_above_range".into(),
        BoundFlag::ExponentNotBelowTwo => "exponent_not_below_two".into(),
        BoundFlag::BetaOutsideInterval { lo, hi } => format!("beta_outside:{lo:?}..{hi:?}"),
    }
}

fn flags_cell(flags: &[BoundFlag]) -> Cell {
    if flags.is_empty() {
        Cell::Empty
    } else {
        flags.iter().map(flag_label).collect::<Vec<_>>().join(";").into()
    }
}

fn uen(log_uen: f64) -> Result<UenValue> {
    UenValue::user(log_uen).map_err(|e| ReportError::Config(format!("log_uen: {e}")))
}

fn status_from(flagged: bool) -> Status {
    if flagged {
        Status::PreconditionFlagged
    } else {
        Status::Success
    }
}

/// Forward tail bounds over the configured ξ grid.
pub fn cmd_eval(cfg: &RunConfig) -> Result<CommandOutput> {
    let e = cfg.eval.as_ref().ok_or_else(|| ReportError::Config("missing [eval] section".into()))?;
    let range = range_of(e.range)?;
    let uen = uen(e.log_uen)?;
    let c = e.c.unwrap_or(range.width() / e.n.max(1) as f64);
    let mut table = Table::new("eval", &["family", "N", "xi", "value", "value_raw", "valid", "flags"]);
    let mut flagged = false;
    for &xi in &e.xi {
        let r: BoundResult = match e.family {
            EvalFamily::HoeffdingUen => bounds::hoeffding_uen_tail(xi, e.n, &range, &uen),
            EvalFamily::BennettSum => bounds::bennett_sum_tail(xi, e.n, &range),
            EvalFamily::BennettBdiff => bounds::bennett_bdiff_tail(xi, e.n, c),
            EvalFamily::BennettUen => bounds::bennett_uen_tail(xi, e.n, &range, &uen),
        }
        .map_err(ReportError::compute)?;
        flagged |= !r.valid;
        table.push(vec![
            r.family.tag().into(),
            e.n.into(),
            xi.into(),
            r.value.into(),
            r.value_raw.into(),
            r.valid.into(),
            flags_cell(&r.flags),
        ]);
    }
    Ok(CommandOutput {
        command: "eval",
        summary: vec![format!("{} bound values, {} flagged", table.rows.len(), if flagged { "some" } else { "none" })],
        tables: vec![table],
        status: status_from(flagged),
        provenance: vec!["log_uen is user-supplied".into()],
    })
}

/// Radii for every configured (N, ε) pair.
pub fn cmd_invert(cfg: &RunConfig) -> Result<CommandOutput> {
    let inv = cfg.invert.as_ref().ok_or_else(|| ReportError::Config("missing [invert] section".into()))?;
    let range = range_of(inv.range)?;
    let uen = uen(inv.log_uen)?;
    let family = match inv.family {
        InvertFamily::Hoeffding => RateFamily::Hoeffding,
        InvertFamily::Bernstein => RateFamily::Bernstein,
        InvertFamily::BernsteinScaled => RateFamily::BernsteinScaled,
        InvertFamily::BennettExact => RateFamily::BennettExact,
        InvertFamily::BennettAlt => {
            let beta1 = inv.beta1.ok_or_else(|| ReportError::Config("invert.beta1 is required for bennett_alt".into()))?;
            let gamma_exp = inv
                .gamma_exp
                .ok_or_else(|| ReportError::Config("invert.gamma_exp is required for bennett_alt".into()))?;
            RateFamily::BennettAlt { beta1, gamma_exp }
        }
    };
    let mut table = Table::new("invert", &["family", "N", "eps", "xi", "valid", "flags"]);
    let mut flagged = false;
    for &n in &inv.n {
        for &eps in &inv.eps {
            let (xi, flags): (Cell, Cell) = match family {
                RateFamily::BennettAlt { beta1, gamma_exp } => {
                    let r = bounds::bennett_alt_radius(eps, n, &range, &uen, beta1, gamma_exp)
                        .map_err(ReportError::compute)?;
                    (r.xi.into(), flags_cell(&r.flags))
                }
                _ => match family.radius(eps, n, &range, &uen) {
                    Ok(xi) => (xi.into(), Cell::Empty),
                    Err(rates::RatesError::Bounds(BoundsError::Saturated { required_x })) => {
                        (Cell::Empty, format!("saturated:{required_x:?}").into())
                    }
                    Err(e) => return Err(ReportError::compute(e)),
                },
            };
            let valid = flags == Cell::Empty;
            flagged |= !valid;
            table.push(vec![family.tag().into(), n.into(), eps.into(), xi, valid.into(), flags]);
        }
    }
    Ok(CommandOutput {
        command: "invert",
        summary: vec![format!("{} radii", table.rows.len())],
        tables: vec![table],
        status: status_from(flagged),
        provenance: vec!["log_uen is user-supplied".into()],
    })
}

/// Figure data, β intervals, monotonicity classes and the x → 0 limit.
pub fn cmd_constants(cfg: &RunConfig) -> Result<CommandOutput> {
    let c = &cfg.constants;
    if !(c.x_max > 0.0 && c.x_max < 1.0) {
        return Err(ReportError::Config(format!("constants.x_max = {} must lie in (0, 1)", c.x_max)));
    }
    if c.fig1_points < 2 || c.fig2_points < 2 || c.fig3_points < 2 {
        return Err(ReportError::Config("figure point counts must be at least 2".into()));
    }
    let betas = c
        .betas
        .iter()
        .map(|&b| BetaParam::new(b).map_err(|e| ReportError::Config(format!("constants.betas: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let mut summary = Vec::new();

    let mut cols = vec!["x".to_string()];
    cols.extend(betas.iter().map(|b| format!("gamma_b{:?}", b.get())));
    let mut fig1 = Table { name: "fig1".into(), columns: cols, rows: Vec::new() };
    for k in 1..=c.fig1_points {
        let x = c.x_max * k as f64 / c.fig1_points as f64;
        let mut row = vec![Cell::Num(x)];
        row.extend(betas.iter().map(|&b| special_functions::gamma_exponent(b, x).ok().into()));
        fig1.push(row);
    }

    let mut fig2 = Table::new("fig2", &["x", "exp_gamma", "exp_hoeffding", "exp_beta"]);
    for x in constants::unit_grid(c.fig2_points) {
        let u = x / 8.0;
        let g = special_functions::gamma_fn(u).map_err(ReportError::compute)?;
        fig2.push(vec![
            x.into(),
            g.exp().into(),
            (-x * x / 32.0).exp().into(),
            (-c.fig2_beta * u * u).exp().into(),
        ]);
    }

    let mut fig3 = Table::new("fig3", &["x", "gamma"]);
    for k in 0..c.fig3_points {
        let x = c.fig3_x_max * k as f64 / (c.fig3_points - 1) as f64;
        fig3.push(vec![x.into(), special_functions::gamma_fn(x).map_err(ReportError::compute)?.into()]);
    }

    let mut intervals = Table::new("intervals", &["quantity", "x_max", "derived", "quoted", "rounded", "matches"]);
    let beta1 = constants::interval_report(c.x_max, Some((constants::QUOTED_BETA1_LOWER, constants::QUOTED_BETA1_UPPER)))
        .map_err(ReportError::compute)?;
    let beta2 = constants::interval_report(1.0, Some((constants::QUOTED_BETA1_LOWER, constants::QUOTED_BETA2_UPPER)))
        .map_err(ReportError::compute)?;
    let threshold = constants::find_monotonicity_threshold(c.x_max).map_err(ReportError::compute)?;
    let mut interval_row = |name: &str, x_max: f64, derived: f64, quoted: f64| {
        let rounded = round_decimals(derived, 4);
        intervals.push(vec![
            name.into(),
            x_max.into(),
            derived.into(),
            quoted.into(),
            rounded.into(),
            (rounded == quoted).into(),
        ]);
    };
    interval_row("beta1_lower", c.x_max, beta1.lower, constants::QUOTED_BETA1_LOWER);
    interval_row("beta1_upper", c.x_max, beta1.upper, constants::QUOTED_BETA1_UPPER);
    interval_row("monotonicity_threshold", c.x_max, threshold, constants::QUOTED_MONOTONICITY_THRESHOLD);
    interval_row("beta2_lower", 1.0, beta2.lower, constants::QUOTED_BETA1_LOWER);
    interval_row("beta2_upper", 1.0, beta2.upper, constants::QUOTED_BETA2_UPPER);
    summary.push(format!(
        "beta1 interval at x_max={:?}: ({:.4}, {:.4}); monotonicity threshold {:.4}",
        c.x_max, beta1.lower, beta1.upper, threshold
    ));
    summary.push(format!(
        "beta2 interval at x_max=1: ({:.4}, {:.4}){}",
        beta2.lower,
        beta2.upper,
        if beta2.degenerate { " [degenerate: lower >= upper, quoted lower not reproduced]" } else { "" }
    ));

    let mut mono = Table::new("monotonicity", &["beta", "classification", "minimizer_x"]);
    for &b in &betas {
        match constants::classify_gamma_monotonicity(b, c.x_max) {
            Ok(r) => {
                let class = match r.classification {
                    Monotonicity::MonotoneDecreasing => "monotone_decreasing",
                    Monotonicity::InteriorMinimum => "interior_minimum",
                };
                mono.push(vec![b.get().into(), class.into(), r.minimizer_x.into()]);
            }
            Err(constants::ConstantsError::BetaOutside { .. }) => {
                mono.push(vec![b.get().into(), "outside_interval".into(), Cell::Empty]);
            }
            Err(e) => return Err(ReportError::compute(e)),
        }
    }

    let mut limits = Table::new("limits", &["beta", "x", "gamma", "gap", "expansion_gap"]);
    for &b in &c.limit_betas {
        let beta = BetaParam::new(b).map_err(|e| ReportError::Config(format!("constants.limit_betas: {e}")))?;
        let r = constants::check_limit_at_zero(beta, &c.limit_xs).map_err(ReportError::compute)?;
        for row in &r.rows {
            limits.push(vec![b.into(), row.x.into(), row.gamma.into(), row.gap.into(), row.expansion_gap.into()]);
        }
        summary.push(format!(
            "limit beta={b:?}: gap at x={:?} is {:.6}, strictly decreasing: {}",
            r.rows.last().map_or(f64::NAN, |r| r.x),
            r.rows.last().map_or(f64::NAN, |r| r.gap),
            r.gaps_strictly_decreasing
        ));
    }

    let mut coincidence = Table::new("fig2_coincidence", &["beta", "sup_difference", "argmax_x"]);
    let grid = constants::unit_grid(c.fig2_points);
    for b in [c.fig2_beta, constants::QUOTED_BETA1_LOWER] {
        let r = constants::fig2_coincidence(b, &grid).map_err(ReportError::compute)?;
        coincidence.push(vec![b.into(), r.sup_difference.into(), r.argmax_x.into()]);
        summary.push(format!("fig2 sup |exp(Gamma(x/8)) - exp(-{b:?}(x/8)^2)| = {:.3e}", r.sup_difference));
    }

    Ok(CommandOutput {
        command: "constants",
        tables: vec![fig1, fig2, fig3, intervals, mono, limits, coincidence],
        summary,
        status: Status::Success,
        provenance: vec![
            "derived: interval endpoints, threshold and limits are recomputed from Gamma".into(),
            "quoted: 0.0075, 0.4804, 0.4434, 0.3863 are the published values, compared at 4 decimals".into(),
        ],
    })
}

/// Cover sizes, Rademacher complexity and the Dudley bound of a matrix.
pub fn cmd_complexity(cfg: &RunConfig) -> Result<CommandOutput> {
    let c = &cfg.complexity;
    let path = c.matrix.as_ref().ok_or_else(|| ReportError::Config("complexity.matrix is required".into()))?;
    let file = std::fs::File::open(path)
        .map_err(|e| ReportError::Config(format!("complexity.matrix {}: {e}", path.display())))?;
    let range = c.range.map(range_of).transpose()?;
    let matrix = EvaluationMatrix::read_csv(file, range).map_err(ReportError::compute)?;
    let seed = cfg.seed.unwrap_or(0);
    let mut summary = vec![format!("matrix: {} functions x {} samples", matrix.rows(), matrix.cols())];

    let mut covers = Table::new("covers", &["radius", "p", "greedy", "exact"]);
    let mut ordered = true;
    for &r in &c.radii {
        let greedy = complexity::covering_number_greedy(&matrix, r, c.p).map_err(ReportError::compute)?;
        let exact = if matrix.rows() <= complexity::EXACT_COVER_MAX_ROWS {
            Some(complexity::covering_number_exact(&matrix, r, c.p).map_err(ReportError::compute)?.size)
        } else {
            None
        };
        ordered &= exact.is_none_or(|e| e <= greedy.size);
        covers.push(vec![r.into(), c.p.into(), greedy.size.into(), exact.into()]);
    }
    summary.push(format!("exact <= greedy at every radius: {ordered}"));

    let mut rad = Table::new("rademacher", &["method", "estimate", "stderr"]);
    if matrix.cols() <= complexity::EXACT_RADEMACHER_MAX_COLS {
        let v = complexity::rademacher_exact(&matrix).map_err(ReportError::compute)?;
        rad.push(vec!["exact".into(), v.into(), 0.0.into()]);
    }
    let mc = complexity::rademacher_mc(&matrix, c.rademacher_trials, seed).map_err(ReportError::compute)?;
    rad.push(vec!["monte_carlo".into(), mc.estimate.into(), mc.stderr.into()]);

    let mut dudley = Table::new("dudley", &["bound", "best_eps"]);
    let d = complexity::dudley_for_matrix(&matrix, None).map_err(ReportError::compute)?;
    dudley.push(vec![d.bound.into(), d.best_eps.into()]);
    summary.push(format!("rademacher (mc) {:.6} +/- {:.2e}; dudley bound {:.6}", mc.estimate, mc.stderr, d.bound));

    Ok(CommandOutput {
        command: "complexity",
        tables: vec![covers, rad, dudley],
        summary,
        status: Status::Success,
        provenance: vec![format!("seed {seed}")],
    })
}

/// Monte Carlo tails against their bounds for every scenario.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<CommandOutput> {
    let s = &cfg.simulate;
    let seed = cfg.seed.ok_or_else(|| ReportError::Config("simulate requires a seed (config `seed` or --seed)".into()))?;
    if s.trials == 0 {
        return Err(ReportError::Config("simulate.trials must be positive".into()));
    }
    let mc = McConfig { trials: s.trials, seed, workers: s.workers.max(1) };
    let scenarios = if s.scenario.is_empty() { simulate::default_scenarios() } else { s.scenario.clone() };

    let mut tails = Table::new("tails", &["scenario", "xi", "probability", "stderr", "source"]);
    let mut validity = Table::new(
        "validity",
        &["scenario", "empirical", "bound", "xi", "empirical_probability", "bound_value", "stderr", "pass", "tightness"],
    );
    let mut pilots = Table::new("bdiff_pilot", &["scenario", "mean", "stderr"]);
    let mut summary = Vec::new();
    let mut all_pass = true;
    for sc in &scenarios {
        let out = simulate::run_scenario(sc, &mc, s.slack_sigmas).map_err(ReportError::compute)?;
        for curve in &out.curves {
            for p in &curve.points {
                tails.push(vec![
                    out.name.as_str().into(),
                    p.xi.into(),
                    p.probability.into(),
                    p.stderr.into(),
                    curve.source.as_str().into(),
                ]);
            }
        }
        for check in &out.checks {
            for p in &check.points {
                validity.push(vec![
                    out.name.as_str().into(),
                    check.empirical_source.as_str().into(),
                    check.bound_source.as_str().into(),
                    p.xi.into(),
                    p.empirical.into(),
                    p.bound.into(),
                    p.stderr.into(),
                    p.pass.into(),
                    p.tightness.into(),
                ]);
            }
            summary.push(format!(
                "{} {} vs {}: {}",
                out.name,
                check.empirical_source,
                check.bound_source,
                if check.pass { "PASS" } else { "FAIL" }
            ));
        }
        pilots.push(vec![out.name.as_str().into(), out.bdiff_pilot_mean.into(), out.bdiff_pilot_stderr.into()]);
        all_pass &= out.pass();
    }
    summary.push(format!("overall: {}", if all_pass { "PASS" } else { "FAIL" }));
    Ok(CommandOutput {
        command: "simulate",
        tables: vec![tails, validity, pilots],
        summary,
        status: if all_pass { Status::Success } else { Status::ValidityFail },
        provenance: vec![
            format!("seed {seed}, trials {}", s.trials),
            "UEN values are measured on 2N-point samples at radius xi/8".into(),
        ],
    })
}

/// Radius curves, slopes, the large-deviation profile and the convergence diagnostic.
pub fn cmd_rates(cfg: &RunConfig) -> Result<CommandOutput> {
    let r = &cfg.rates;
    let range = range_of(r.range)?;
    let uen = uen(r.log_uen)?;
    if r.n_min == 0 || r.n_min >= r.n_max || r.points < rates::MIN_FIT_POINTS {
        return Err(ReportError::Config(format!(
            "rates grid needs 0 < n_min < n_max and points >= {}",
            rates::MIN_FIT_POINTS
        )));
    }
    let grid = rates::log_spaced_counts(r.n_min, r.n_max, r.points);
    let mut summary = Vec::new();

    let mut curve_t = Table::new("rates", &["family", "N", "xi"]);
    let mut slopes = Table::new("slopes", &["family", "slope", "stderr", "n_min", "n_max", "points", "dropped"]);
    let mut decades = Table::new("decade_slopes", &["family", "decade_start", "slope"]);
    for family in &r.families {
        let curve = rates::radius_curve(*family, r.eps, &range, &uen, &grid).map_err(ReportError::compute)?;
        for &(n, xi) in &curve.points {
            curve_t.push(vec![curve.family.as_str().into(), n.into(), xi.into()]);
        }
        let dropped: Vec<String> = curve.dropped.iter().map(|d| d.n.to_string()).collect();
        slopes.push(vec![
            curve.family.as_str().into(),
            curve.fitted_slope.into(),
            curve.slope_stderr.into(),
            curve.fit_range.0.into(),
            curve.fit_range.1.into(),
            curve.points.len().into(),
            dropped.join(";").into(),
        ]);
        for d in curve.decade_slopes() {
            decades.push(vec![curve.family.as_str().into(), d.decade_start.into(), d.slope.into()]);
        }
        summary.push(format!(
            "{:<28} slope {:+.4} (stderr {:.1e}) over N in [{}, {}]",
            curve.family, curve.fitted_slope, curve.slope_stderr, curve.fit_range.0, curve.fit_range.1
        ));
    }

    let mut profile = Table::new("profile", &["beta", "x", "gamma", "local_rate"]);
    let xs = bounds::log_spaced(1e-8, 0.125, r.profile_points.max(2));
    for &b in &r.profile_betas {
        let beta = BetaParam::new(b).map_err(|e| ReportError::Config(format!("rates.profile_betas: {e}")))?;
        for row in rates::large_deviation_profile(beta, &xs).map_err(ReportError::compute)? {
            profile.push(vec![b.into(), row.x.into(), row.gamma.into(), row.local_rate.into()]);
        }
    }

    let mut conv = Table::new("convergence", &["model", "N", "log_uen", "ratio", "log_bound"]);
    let mut verdicts = Table::new("convergence_verdicts", &["model", "xi", "verdict"]);
    for model in &r.convergence_models {
        let report = rates::asymptotic_convergence_check(|n| model.eval(n), &grid, r.convergence_xi, &range)
            .map_err(ReportError::compute)?;
        for row in &report.rows {
            conv.push(vec![
                model.label().into(),
                row.n.into(),
                row.log_uen.into(),
                row.ratio.into(),
                row.log_bound.into(),
            ]);
        }
        verdicts.push(vec![model.label().into(), report.xi.into(), report.verdict.label().into()]);
        summary.push(format!("convergence {}: {}", model.label(), report.verdict.label()));
    }

    Ok(CommandOutput {
        command: "rates",
        tables: vec![curve_t, slopes, decades, profile, conv, verdicts],
        summary,
        status: Status::Success,
        provenance: vec![format!("eps {:?}, constant log_uen {:?}", r.eps, r.log_uen)],
    })
}
