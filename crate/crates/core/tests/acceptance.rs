//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::Command;
use std::time::Instant;

use bennett_core::bounds::{self, BoundedRange, UenValue};
use bennett_core::complexity::{self, EvaluationMatrix};
use bennett_core::constants::{self, round_decimals, Monotonicity};
use bennett_core::rates::{self, RateFamily};
use bennett_core::simulate::{self, DistKind, DistributionSpec, McConfig};
use bennett_core::special_functions::{gamma_fn, gamma_inverse, BetaParam};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn log_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (k - 1) as f64).exp()).collect()
}

fn beta1_interval() -> Check {
    let lo = constants::derive_beta_lower(0.125).map_err(|e| e.to_string())?;
    let hi = constants::derive_beta_upper(0.125).map_err(|e| e.to_string())?;
    // Closed forms: g(1/8) and 64·g(1/8) with g(x) = (1+x)ln(1+x) − x.
    let g = 1.125 * 1.125f64.ln() - 0.125;
    ensure(round_decimals(lo, 4) == 0.0075, format!("lower {lo} rounds to {}", round_decimals(lo, 4)))?;
    ensure(round_decimals(hi, 4) == 0.4804, format!("upper {hi} rounds to {}", round_decimals(hi, 4)))?;
    ensure((lo - g).abs() < 1e-8, format!("lower {lo} vs closed form {g}"))?;
    ensure((hi - 64.0 * g).abs() < 1e-8, format!("upper {hi} vs closed form {}", 64.0 * g))?;
    ensure((lo - 0.007505915113431386).abs() < 1e-8, format!("lower {lo} vs frozen oracle"))?;
    ensure((hi - 0.48037856725960873).abs() < 1e-8, format!("upper {hi} vs frozen oracle"))?;
    Ok(format!("({lo:.7}, {hi:.8}) -> (0.0075, 0.4804)"))
}

fn monotonicity_threshold() -> Check {
    let t = constants::find_monotonicity_threshold(0.125).map_err(|e| e.to_string())?;
    ensure((0.4384..=0.4484).contains(&t), format!("threshold {t}"))?;
    let below = constants::classify_gamma_monotonicity(BetaParam::new(t - 0.01).unwrap(), 0.125)
        .map_err(|e| e.to_string())?;
    let above = constants::classify_gamma_monotonicity(BetaParam::new(t + 0.01).unwrap(), 0.125)
        .map_err(|e| e.to_string())?;
    ensure(below.classification == Monotonicity::MonotoneDecreasing, "below threshold not monotone".into())?;
    ensure(above.classification == Monotonicity::InteriorMinimum, "above threshold monotone".into())?;
    Ok(format!("threshold {t:.6}; classifier consistent at +/-0.01"))
}

fn beta2_upper() -> Check {
    let r = constants::interval_report(1.0, Some((0.0075, 0.3863))).map_err(|e| e.to_string())?;
    let exact = 2.0 * 2f64.ln() - 1.0;
    ensure((r.upper - exact).abs() < 1e-12, format!("upper {} vs 2ln2-1 = {exact}", r.upper))?;
    ensure(round_decimals(r.upper, 4) == 0.3863, format!("upper rounds to {}", round_decimals(r.upper, 4)))?;
    Ok(format!(
        "upper {:.12}; lower endpoint derives to {:.6} (quoted 0.0075, degenerate={})",
        r.upper, r.lower, r.degenerate
    ))
}

fn limit_at_zero() -> Check {
    let mut worst = 0.0f64;
    for b in [0.1, 0.2, 0.3, 0.4] {
        let r = constants::check_limit_at_zero(BetaParam::new(b).unwrap(), &[1e-4, 1e-6, 1e-8])
            .map_err(|e| e.to_string())?;
        let last = r.rows[2].gap;
        ensure(last < 0.12, format!("beta {b}: gap {last} at 1e-8"))?;
        ensure(r.gaps_strictly_decreasing, format!("beta {b}: gaps not strictly decreasing"))?;
        worst = worst.max(last);
    }
    Ok(format!("largest gap at x=1e-8: {worst:.6}"))
}

fn fig2_coincidence() -> Check {
    let grid = constants::unit_grid(1001);
    let near = constants::fig2_coincidence(0.4804, &grid).map_err(|e| e.to_string())?;
    let far = constants::fig2_coincidence(0.0075, &grid).map_err(|e| e.to_string())?;
    ensure(near.sup_difference < 5e-4, format!("beta 0.4804 sup {}", near.sup_difference))?;
    ensure(far.sup_difference > 5e-3, format!("beta 0.0075 sup {}", far.sup_difference))?;
    Ok(format!("sup {:.3e} (beta 0.4804), {:.3e} (beta 0.0075)", near.sup_difference, far.sup_difference))
}

fn validity_pack() -> Check {
    let cfg = McConfig { trials: 1_000_000, seed: 20240601, workers: 1 };
    let mut checks = 0;
    let mut failures = Vec::new();
    for s in simulate::default_scenarios() {
        let out = simulate::run_scenario(&s, &cfg, 3.0).map_err(|e| e.to_string())?;
        for c in &out.checks {
            checks += 1;
            if !c.pass {
                failures.push(format!("{} {} vs {}", s.name, c.empirical_source, c.bound_source));
            }
        }
    }
    ensure(failures.is_empty(), format!("failed: {}", failures.join(", ")))?;
    Ok(format!("{checks} curve checks, 16 points each, all within 3 sigma"))
}

fn exact_oracles() -> Check {
    // (a) Bernoulli(1/2), N = 10: Pr{|S − 5| > 3} = 22/1024.
    let d = DistributionSpec::new(DistKind::BernoulliScaled { p: 0.5 }, BoundedRange::unit()).unwrap();
    let c = simulate::sum_tail_mc(&d, 10, &[1.0, 2.0, 3.0], &McConfig::new(1_000_000, 5)).map_err(|e| e.to_string())?;
    let exact = [1.0 - 252.0 / 1024.0 - 2.0 * 210.0 / 1024.0, 112.0 / 1024.0, 22.0 / 1024.0];
    for (p, e) in c.points.iter().zip(exact) {
        ensure((p.probability - e).abs() <= 3.0 * p.stderr, format!("binomial xi={}: {} vs {e}", p.xi, p.probability))?;
    }
    // (b) Monte Carlo Rademacher against exhaustive sign enumeration.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let n = 4 + (seed as usize % 9);
        let rows: Vec<Vec<f64>> = (0..5).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
        let m = EvaluationMatrix::from_rows(rows, BoundedRange::unit()).unwrap();
        let exact = complexity::rademacher_exact(&m).map_err(|e| e.to_string())?;
        let mc = complexity::rademacher_mc(&m, 20_000, seed).map_err(|e| e.to_string())?;
        let z = (mc.estimate - exact).abs() / mc.stderr;
        ensure(z <= 4.0, format!("seed {seed}, N={n}: {} vs {exact} ({z:.2} sigma)", mc.estimate))?;
        worst = worst.max(z);
    }
    // (c) Greedy covers never beat the exact minimum.
    let mut violations = 0;
    for _ in 0..100 {
        let rows: Vec<Vec<f64>> = (0..8).map(|_| (0..10).map(|_| rng.random::<f64>()).collect()).collect();
        let m = EvaluationMatrix::from_rows(rows, BoundedRange::unit()).unwrap();
        let r = rng.random_range(0.05..0.4);
        let g = complexity::covering_number_greedy(&m, r, 1.0).map_err(|e| e.to_string())?.size;
        let x = complexity::covering_number_exact(&m, r, 1.0).map_err(|e| e.to_string())?.size;
        if g < x {
            violations += 1;
        }
    }
    ensure(violations == 0, format!("{violations} greedy < exact violations"))?;
    Ok(format!("binomial within 3 sigma; rademacher worst {worst:.2} sigma; 0/100 cover violations"))
}

fn rate_slopes() -> Check {
    let r = BoundedRange::unit();
    let uen = UenValue::user(5.0).unwrap();
    let grid = rates::default_n_grid();
    let curve = |f| rates::radius_curve(f, 0.05, &r, &uen, &grid).map_err(|e| e.to_string());
    let h = curve(RateFamily::Hoeffding)?;
    let a = curve(RateFamily::BennettAlt { beta1: 0.3, gamma_exp: 1.6 })?;
    let x = curve(RateFamily::BennettExact)?;
    ensure((h.fitted_slope + 0.5).abs() <= 1e-4, format!("hoeffding slope {}", h.fitted_slope))?;
    ensure((a.fitted_slope + 0.625).abs() <= 1e-4, format!("gamma 1.6 slope {}", a.fitted_slope))?;
    ensure(
        x.fitted_slope > -0.625 && x.fitted_slope < -0.49,
        format!("exact-inversion slope {}", x.fitted_slope),
    )?;
    let local = x.decade_slopes();
    ensure(
        local.windows(2).all(|w| w[1].slope > w[0].slope),
        format!("decade slopes not increasing: {local:?}"),
    )?;
    let dropped: Vec<u64> = x.dropped.iter().map(|d| d.n).collect();
    Ok(format!(
        "hoeffding {:.6}, gamma 1.6 {:.6}, exact {:.5} (decades {:.5} -> {:.5}, saturated N dropped: {dropped:?})",
        h.fitted_slope,
        a.fitted_slope,
        x.fitted_slope,
        local.first().map_or(f64::NAN, |d| d.slope),
        local.last().map_or(f64::NAN, |d| d.slope),
    ))
}

fn round_trips() -> Check {
    let r = BoundedRange::unit();
    let mut count = 0;
    let mut worst = 0.0f64;
    for log_uen in [0.0, 5.0] {
        let uen = UenValue::user(log_uen).unwrap();
        for eps in [1e-6, 1e-4, 1e-2, 0.1, 0.5] {
            for n in [100u64, 1_000, 10_000, 100_000, 1_000_000, 10_000_000, 100_000_000] {
                let xi = bounds::hoeffding_uen_radius(eps, n, &r, &uen).map_err(|e| e.to_string())?;
                let back = bounds::hoeffding_uen_tail(xi, n, &r, &uen).map_err(|e| e.to_string())?.value_raw;
                worst = worst.max((back - eps).abs() / eps);
                count += 1;
                match bounds::bennett_uen_radius_exact(eps, n, &r, &uen) {
                    Ok(xi) => {
                        let back = bounds::bennett_uen_tail(xi, n, &r, &uen).map_err(|e| e.to_string())?.value_raw;
                        worst = worst.max((back - eps).abs() / eps);
                        count += 1;
                    }
                    Err(bounds::BoundsError::Saturated { .. }) => {}
                    Err(e) => return Err(e.to_string()),
                }
            }
        }
    }
    ensure(worst <= 1e-9, format!("worst tail round-trip error {worst:e}"))?;
    let mut worst_g = 0.0f64;
    for x in log_grid(1e-8, 1e3, 200) {
        let back = gamma_inverse(gamma_fn(x).unwrap()).map_err(|e| e.to_string())?;
        worst_g = worst_g.max((back - x).abs() / x);
    }
    ensure(worst_g <= 1e-10, format!("worst gamma round-trip error {worst_g:e}"))?;
    Ok(format!("{count} tail round trips (worst {worst:.1e}); gamma inverse worst {worst_g:.1e}"))
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 77\n[simulate]\ntrials = 50000\n").map_err(|e| e.to_string())?;
    let mut payloads = Vec::new();
    for workers in ["1", "8"] {
        let out = dir.path().join(format!("w{workers}"));
        let status = Command::new(env!("CARGO_BIN_EXE_bennett"))
            .args(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "simulate", "--workers", workers])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.code() == Some(0), format!("workers {workers}: exit {:?}", status.status.code()))?;
        let mut files = Vec::new();
        for name in ["tails.csv", "validity.csv", "bdiff_pilot.csv"] {
            files.push(std::fs::read(out.join(name)).map_err(|e| e.to_string())?);
        }
        payloads.push(files);
    }
    ensure(payloads[0] == payloads[1], "CSV payloads differ between 1 and 8 workers".into())?;
    let bytes: usize = payloads[0].iter().map(Vec::len).sum();
    Ok(format!("tails/validity/bdiff_pilot CSVs byte-identical ({bytes} bytes)"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("beta1 interval reproduction", beta1_interval),
        ("monotonicity threshold", monotonicity_threshold),
        ("beta2 upper endpoint", beta2_upper),
        ("limit gamma -> 2 at x -> 0", limit_at_zero),
        ("exp-Gamma coincidence curve", fig2_coincidence),
        ("deviation-inequality validity", validity_pack),
        ("exact-oracle cross-checks", exact_oracles),
        ("rate slopes", rate_slopes),
        ("inversion round trips", round_trips),
        ("determinism across workers", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name} [{secs:.2}s]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} [{secs:.2}s]: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
