//! Monte Carlo estimators against exhaustive enumeration.

use bennett_core::bounds::BoundedRange;
use bennett_core::simulate::{self, CellModel, DistKind, DistributionSpec, FunctionSpec, McConfig};

const POINTS: [f64; 3] = [0.0, 0.5, 1.0];
const WEIGHTS: [f64; 3] = [0.2, 0.3, 0.5];
const N: usize = 8;

fn three_point() -> (DistributionSpec, Vec<FunctionSpec>) {
    let dist = DistributionSpec::new(
        DistKind::DiscreteWeighted { points: POINTS.to_vec(), weights: WEIGHTS.to_vec() },
        BoundedRange::unit(),
    )
    .unwrap();
    let class = vec![
        FunctionSpec::Identity,
        FunctionSpec::Complement,
        FunctionSpec::Indicator { threshold: 0.25 },
        FunctionSpec::Table { values: vec![0.5, 1.0, 0.0] },
    ];
    (dist, class)
}

/// Function values per support point, written out independently of the
/// cell reduction.
fn values() -> [[f64; 3]; 4] {
    [[0.0, 0.5, 1.0], [1.0, 0.5, 0.0], [1.0, 0.0, 0.0], [0.5, 1.0, 0.0]]
}

/// `(probability, sup_f (Ef − E_N f), sup_f |Ef − E_N f|)` for all 3^N sequences.
fn enumerate() -> Vec<(f64, f64, f64)> {
    let vals = values();
    let means: Vec<f64> = vals.iter().map(|v| (0..3).map(|k| v[k] * WEIGHTS[k]).sum()).collect();
    let mut out = Vec::with_capacity(3usize.pow(N as u32));
    for code in 0..3usize.pow(N as u32) {
        let mut c = code;
        let mut seq = [0usize; N];
        for s in seq.iter_mut() {
            *s = c % 3;
            c /= 3;
        }
        let prob: f64 = seq.iter().map(|&k| WEIGHTS[k]).product();
        let mut one = f64::NEG_INFINITY;
        let mut two = 0.0f64;
        for (v, m) in vals.iter().zip(&means) {
            let emp = seq.iter().map(|&k| v[k]).sum::<f64>() / N as f64;
            one = one.max(m - emp);
            two = two.max((m - emp).abs());
        }
        out.push((prob, one, two));
    }
    out
}

fn within(estimate: f64, exact: f64, trials: u64, sigmas: f64) -> bool {
    let sd = (exact * (1.0 - exact) / trials as f64).sqrt();
    (estimate - exact).abs() <= sigmas * sd + 1e-12
}

#[test]
fn cell_means_match_enumeration() {
    let (dist, class) = three_point();
    let model = CellModel::new(&dist, &class).unwrap();
    let exact: Vec<f64> = values().iter().map(|v| (0..3).map(|k| v[k] * WEIGHTS[k]).sum()).collect();
    for (a, b) in model.means().iter().zip(&exact) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn gap_tail_matches_enumeration() {
    let (dist, class) = three_point();
    let model = CellModel::new(&dist, &class).unwrap();
    let table = enumerate();
    // Midpoints between atoms of the gap avoid boundary ties.
    let mut atoms: Vec<f64> = table.iter().map(|t| (t.2 * 1e9).round() / 1e9).collect();
    atoms.sort_by(f64::total_cmp);
    atoms.dedup();
    let grid: Vec<f64> = atoms.windows(2).map(|w| 0.5 * (w[0] + w[1])).filter(|&x| x > 0.0).collect();
    let trials = 200_000;
    let mc = simulate::generalization_gap_mc(&model, N as u64, &grid, &McConfig::new(trials, 31)).unwrap();
    for p in &mc.points {
        let exact: f64 = table.iter().filter(|t| t.2 > p.xi).map(|t| t.0).sum();
        assert!(within(p.probability, exact, trials, 3.0), "xi {}: {} vs {exact}", p.xi, p.probability);
    }
}

#[test]
fn bdiff_tail_matches_enumeration() {
    let (dist, class) = three_point();
    let model = CellModel::new(&dist, &class).unwrap();
    let table = enumerate();
    let mean_h: f64 = table.iter().map(|t| t.0 * t.1).sum();
    let mut atoms: Vec<f64> = table.iter().map(|t| (t.1 * 1e9).round() / 1e9).collect();
    atoms.sort_by(f64::total_cmp);
    atoms.dedup();
    let grid: Vec<f64> = atoms
        .windows(2)
        .map(|w| 0.5 * (w[0] + w[1]) - mean_h)
        .filter(|&x| x > 0.01)
        .collect();
    let trials = 200_000;
    let mc = simulate::bdiff_tail_mc(&model, N as u64, &grid, &McConfig::new(trials, 32)).unwrap();
    assert!((mc.pilot_mean - mean_h).abs() <= 4.0 * mc.pilot_stderr, "{} vs {mean_h}", mc.pilot_mean);
    assert!((mc.c - 1.0 / N as f64).abs() < 1e-15);
    for p in &mc.curve.points {
        let exact: f64 = table.iter().filter(|t| t.1 - mean_h >= p.xi).map(|t| t.0).sum();
        assert!(within(p.probability, exact, trials, 3.0), "xi {}: {} vs {exact}", p.xi, p.probability);
    }
}

#[test]
fn binomial_sum_tail_matches_closed_form() {
    let d = DistributionSpec::new(DistKind::BernoulliScaled { p: 0.5 }, BoundedRange::unit()).unwrap();
    let trials = 400_000;
    let c = simulate::sum_tail_mc(&d, 10, &[3.0], &McConfig::new(trials, 4)).unwrap();
    assert!(within(c.points[0].probability, 0.021484375, trials, 3.0));
}

#[test]
fn discrete_sum_tail_matches_enumeration() {
    let (dist, _) = three_point();
    let table_sums: Vec<(f64, f64)> = (0..3usize.pow(N as u32))
        .map(|code| {
            let (mut c, mut p, mut s) = (code, 1.0, 0.0);
            for _ in 0..N {
                p *= WEIGHTS[c % 3];
                s += POINTS[c % 3];
                c /= 3;
            }
            (p, s)
        })
        .collect();
    let expected = N as f64 * dist.mean();
    let grid = [0.75, 1.25, 2.25];
    let trials = 200_000;
    let mc = simulate::sum_tail_mc(&dist, N as u64, &grid, &McConfig::new(trials, 5)).unwrap();
    for p in &mc.points {
        let exact: f64 = table_sums.iter().filter(|t| (t.1 - expected).abs() > p.xi).map(|t| t.0).sum();
        assert!(within(p.probability, exact, trials, 3.0), "xi {}: {} vs {exact}", p.xi, p.probability);
    }
}

#[test]
fn uniform_indicator_gap_against_binomial() {
    // One indicator under Uniform[0, 1]: the gap is |t − Bin(N, t)/N|.
    let dist = DistributionSpec::new(DistKind::Uniform, BoundedRange::unit()).unwrap();
    let model = CellModel::new(&dist, &[FunctionSpec::Indicator { threshold: 0.3 }]).unwrap();
    let n = 20u64;
    let pmf = |k: u64| {
        let mut c = 1.0;
        for i in 0..k {
            c *= (n - i) as f64 / (i + 1) as f64;
        }
        c * 0.3f64.powi(k as i32) * 0.7f64.powi((n - k) as i32)
    };
    let grid = [0.075, 0.125, 0.175];
    let trials = 200_000;
    let mc = simulate::generalization_gap_mc(&model, n, &grid, &McConfig::new(trials, 6)).unwrap();
    for p in &mc.points {
        let exact: f64 = (0..=n).filter(|&k| (0.3 - k as f64 / n as f64).abs() > p.xi).map(pmf).sum();
        assert!(within(p.probability, exact, trials, 3.0), "xi {}: {} vs {exact}", p.xi, p.probability);
    }
}
