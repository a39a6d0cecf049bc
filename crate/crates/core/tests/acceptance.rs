//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use frac_hopfield::angle::{circular_distance, principal_arg};
use frac_hopfield::eigen::{eig_complex, eig_real, multiset_distance};
use frac_hopfield::equilibrium::EquilibriumState;
use frac_hopfield::hub::{hub_coefficients, hub_critical_order, quadratic_root_args};
use frac_hopfield::mittag_leffler::ml_oracle;
use frac_hopfield::model::examples::{hub3, ring3};
use frac_hopfield::ring::{
    circulant_eigenvalues, density_scan, parametric_eigs, ring_coefficients, ring_critical_order, RingCoefficients,
};
use frac_hopfield::sim::{abm_simulate, classify_tail, ring_attractor_check, SimConfig, TailClass, TailCriteria};
use frac_hopfield::spectral::{critical_order, jacobian_m, SpectrumReport, StableFor};
use frac_hopfield::{Activation, Complex64, NetworkSpec, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

const HUB_Q_STAR: f64 = 0.844976;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn origin(spec: &NetworkSpec) -> EquilibriumState {
    EquilibriumState::evaluate(spec, vec![c(0.0, 0.0); spec.n]).expect("origin")
}

/// Roots of `x^2 - s x + p`, the smaller one recovered from the product.
fn quadratic_roots(s: Complex64, p: Complex64) -> [Complex64; 2] {
    let d = (s * s - 4.0 * p).sqrt();
    let big = if (s + d).norm() >= (s - d).norm() { (s + d) / 2.0 } else { (s - d) / 2.0 };
    if big.norm() == 0.0 {
        return [big, big];
    }
    [big, p / big]
}

fn sorted(mut v: [f64; 2]) -> [f64; 2] {
    v.sort_by(f64::total_cmp);
    v
}

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, ok: String, fail: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(fail)
    }
}

fn within(elapsed: Duration, limit: Duration) -> Outcome {
    check(
        elapsed < limit,
        String::new(),
        format!("took {elapsed:?}, limit {limit:?}"),
    )
}

fn c1_hub_critical_order() -> Outcome {
    let spec = hub3();
    let start = Instant::now();
    let eq = origin(&spec);
    let closed = hub_critical_order(&hub_coefficients(&spec, &eq).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?
        .q_star;
    let m = jacobian_m(&spec, &eq).map_err(|e| e.to_string())?;
    let numeric = critical_order(&eig_complex(&m.m).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(
        (closed - HUB_Q_STAR).abs() <= 1e-5 && (numeric - HUB_Q_STAR).abs() <= 1e-5 && (closed - numeric).abs() <= 1e-8,
        format!("closed form {closed:.12}, numeric {numeric:.12}"),
        format!("closed form {closed}, numeric {numeric}"),
    )?;
    within(elapsed, Duration::from_millis(10))?;
    Ok(format!("closed form {closed:.12}, numeric {numeric:.12}, {elapsed:?}"))
}

fn c2_hub_coefficients() -> Outcome {
    let k = hub_coefficients(&hub3(), &origin(&hub3())).map_err(|e| e.to_string())?;
    let want = [c(1.0, -5.0), c(-1.0, 1.0), c(-3.0, -4.0)];
    let got = [k.alpha, k.beta, k.gamma];
    let err = got.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    check(
        err <= 1e-12,
        format!("alpha={} beta={} gamma={}", k.alpha, k.beta, k.gamma),
        format!("got {got:?}, max error {err:e}"),
    )
}

fn c3_root_argument_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let start = Instant::now();
    let mut checked = 0usize;
    let mut failures = 0usize;
    let mut first = None;
    let mut worst: f64 = 0.0;
    while checked < 100_000 {
        let mut draw = || c(rng.random_range(-5.0..=5.0), rng.random_range(-5.0..=5.0));
        let (alpha, beta, gamma) = (draw(), draw(), draw());
        let p = alpha * beta - gamma;
        if p.norm() < 1e-6 {
            continue;
        }
        checked += 1;
        let r = match quadratic_root_args(alpha, beta, gamma) {
            Ok(r) => r,
            Err(e) => {
                failures += 1;
                first.get_or_insert(format!("({alpha}, {beta}, {gamma}): {e}"));
                continue;
            }
        };
        let [l1, l2] = quadratic_roots(alpha + beta, p);
        let want = sorted([principal_arg(l1), principal_arg(l2)]);
        let got = sorted([r.phi1, r.phi2]);
        let arg_err = (got[0] - want[0]).abs().max((got[1] - want[1]).abs());
        let modulus_err = (l1.norm() * l2.norm() - r.inputs.rho2).abs();
        let sum_err = circular_distance(r.phi1 + r.phi2, r.inputs.theta2);
        worst = worst.max(arg_err).max(modulus_err).max(sum_err);
        if arg_err > 1e-9 || modulus_err > 1e-9 || sum_err > 1e-9 {
            failures += 1;
            first.get_or_insert(format!("({alpha}, {beta}, {gamma}): got {got:?}, want {want:?}"));
        }
    }
    let elapsed = start.elapsed();
    check(
        failures == 0,
        String::new(),
        format!("{failures} failures, first {}", first.unwrap_or_default()),
    )?;
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("{checked} triples, worst deviation {worst:.1e}, {elapsed:?}"))
}

fn c4_ring_instability() -> Outcome {
    let spec = ring3();
    let k = ring_coefficients(&spec, &origin(&spec)).map_err(|e| e.to_string())?;
    let l0 = circulant_eigenvalues(&k)[0];
    let q = ring_critical_order(&k).map_err(|e| e.to_string())?;
    let m = jacobian_m(&spec, &origin(&spec)).map_err(|e| e.to_string())?;
    let report = SpectrumReport::from_matrix(&m).map_err(|e| e.to_string())?;
    let all_unstable = [0.01, 0.3, 0.5, 0.8, 0.99].iter().all(|&q| report.verdict(q) == Verdict::Unstable);
    check(
        (l0 - c(1.0, 0.0)).norm() <= 1e-12 && q == 0.0 && report.stable_for == StableFor::None && all_unstable,
        format!("lambda_0 = {l0}, q* = {q}, unstable for all q"),
        format!("lambda_0 = {l0}, q* = {q}, stable_for {:?}", report.stable_for),
    )
}

fn c5_density_region() -> Outcome {
    let start = Instant::now();
    let res = 128;
    let mut cells = 0;
    for n in [5, 100] {
        let grid = density_scan(n, res).map_err(|e| e.to_string())?;
        for i in 0..res {
            for j in 0..res {
                let s = (grid.thetas[i] + grid.thetas[j]).abs();
                if s > 2.0 * PI / 3.0 && s < 4.0 * PI / 3.0 {
                    cells += 1;
                    if !grid.stable_all_q(i, j) {
                        return Err(format!(
                            "n={n}: cell ({}, {}) has q* = {}",
                            grid.thetas[i],
                            grid.thetas[j],
                            grid.q_star(i, j)
                        ));
                    }
                }
                if n == 100 && s <= 1e-9 && grid.q_star(i, j) != 0.0 {
                    return Err(format!(
                        "n=100: zero-sum cell ({}, {}) has q* = {:e}",
                        grid.thetas[i],
                        grid.thetas[j],
                        grid.q_star(i, j)
                    ));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!("{cells} band cells stable for all q, zero-sum row exact, {elapsed:?}"))
}

fn c6_parametric_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let t1 = rng.random_range(-PI..PI);
        let t2 = rng.random_range(-PI..PI);
        let n = rng.random_range(3..=50);
        let a = parametric_eigs(t1, t2, n);
        let b = circulant_eigenvalues(&RingCoefficients::unit_circle(t1, t2, n).map_err(|e| e.to_string())?);
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((x - y).norm());
        }
    }
    check(
        worst <= 1e-12,
        format!("1000 cases, worst {worst:.1e}"),
        format!("worst deviation {worst:e}"),
    )
}

fn scalar_decay() -> NetworkSpec {
    NetworkSpec::uniform(vec![1.0], vec![vec![c(0.0, 0.0)]], Activation::Linear { gain: c(1.0, 0.0) })
}

fn max_error(q: f64, h: f64, t_end: f64, exact: impl Fn(f64) -> f64) -> Result<f64, String> {
    let traj = abm_simulate(&scalar_decay(), &[c(1.0, 0.0)], &SimConfig::new(q, h, t_end)).map_err(|e| e.to_string())?;
    Ok(traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| (s[0] - c(exact(t), 0.0)).norm())
        .fold(0.0, f64::max))
}

fn c7_integrator_accuracy() -> Outcome {
    let start = Instant::now();
    let e1 = max_error(1.0, 1e-3, 5.0, |t| (-t).exp())?;
    let ml = |t: f64| ml_oracle(0.6, -t.powf(0.6)).expect("inside window");
    let fine = max_error(0.6, 1e-3, 2.0, ml)?;
    let coarse = max_error(0.6, 2e-3, 2.0, ml)?;
    let elapsed = start.elapsed();
    check(
        e1 <= 1e-5 && fine <= 1e-3 && coarse / fine >= 2.0,
        String::new(),
        format!("q=1 error {e1:e}, q=0.6 error {fine:e} (h=1e-3) vs {coarse:e} (h=2e-3)"),
    )?;
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!(
        "q=1 error {e1:.1e}, q=0.6 error {fine:.1e}, halving ratio {:.2}, {elapsed:?}",
        coarse / fine
    ))
}

fn c8_hub_regimes() -> Outcome {
    let z0 = vec![c(0.1, 0.1); 3];
    let run = |q: f64| -> Result<TailClass, String> {
        let traj = abm_simulate(&hub3(), &z0, &SimConfig::new(q, 0.01, 300.0)).map_err(|e| e.to_string())?;
        classify_tail(&traj, &TailCriteria::default()).map_err(|e| e.to_string())
    };
    let (low, high) = rayon::join(|| run(0.80), || run(0.87));
    let (low, high) = (low?, high?);
    check(
        low == TailClass::Decayed && high == TailClass::SustainedOscillation,
        format!("q=0.80 {low:?}, q=0.87 {high:?}"),
        format!("q=0.80 {low:?}, q=0.87 {high:?}"),
    )
}

fn c9_ring_convergence() -> Outcome {
    let tol = 1e-2;
    let reports: Vec<_> = (0..10u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let z0: Vec<Complex64> = (0..3)
                .map(|_| c(rng.random_range(-0.1..=0.1), rng.random_range(-0.1..=0.1)))
                .collect();
            let traj = abm_simulate(&ring3(), &z0, &SimConfig::new(0.8, 0.01, 200.0)).expect("valid run");
            ring_attractor_check(&traj)
        })
        .collect();
    let good = reports.iter().filter(|r| r.spread <= tol && r.modulus_defect <= tol).count();
    let worst_spread = reports.iter().map(|r| r.spread).fold(0.0, f64::max);
    let worst_defect = reports.iter().map(|r| r.modulus_defect).fold(0.0, f64::max);
    check(
        good >= 9,
        format!("{good}/10 seeds converged, worst spread {worst_spread:.1e}, worst modulus defect {worst_defect:.1e}"),
        format!("{good}/10 seeds converged, worst spread {worst_spread:e}, worst modulus defect {worst_defect:e}"),
    )
}

fn c10_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let grid: Vec<f64> = (1..1000).map(|k| k as f64 / 1000.0).collect();
    let mut violations = 0;
    for _ in 0..1000 {
        let len = rng.random_range(1..=12);
        let eigs: Vec<Complex64> = (0..len)
            .map(|_| Complex64::from_polar(rng.random_range(0.1..5.0), rng.random_range(-PI..PI)))
            .collect();
        let report = SpectrumReport::new(eigs, 0.0);
        let mut seen_unstable = false;
        for &q in &grid {
            match report.verdict(q) {
                Verdict::Stable if seen_unstable => violations += 1,
                Verdict::Stable => {}
                _ => seen_unstable = true,
            }
        }
    }
    check(
        violations == 0,
        "1000 spectra, stable set downward closed".into(),
        format!("{violations} violations"),
    )
}

fn c11_split_spectrum() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(1..=20);
        let mut draw = || c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let weights: Vec<Vec<Complex64>> = (0..n).map(|_| (0..n).map(|_| draw()).collect()).collect();
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..3.0)).collect();
        let spec = NetworkSpec::uniform(a, weights, Activation::unit_georgiou());
        let m = jacobian_m(&spec, &origin(&spec)).map_err(|e| e.to_string())?;
        let mut union = eig_complex(&m.m).map_err(|e| e.to_string())?;
        union.extend(eig_complex(&m.m.map(|z| z.conj())).map_err(|e| e.to_string())?);
        let split = eig_real(&m.real_split()).map_err(|e| e.to_string())?;
        let d = multiset_distance(&split, &union).ok_or("spectrum sizes differ")?;
        worst = worst.max(d);
    }
    check(
        worst <= 1e-8,
        format!("200 networks, worst distance {worst:.1e}"),
        format!("worst multiset distance {worst:e}"),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("hub critical order", c1_hub_critical_order),
        ("hub coefficients", c2_hub_coefficients),
        ("root-argument oracle suite", c3_root_argument_oracle),
        ("ring instability", c4_ring_instability),
        ("density scan region", c5_density_region),
        ("parametric identity", c6_parametric_identity),
        ("integrator accuracy", c7_integrator_accuracy),
        ("hub trajectory regimes", c8_hub_regimes),
        ("ring attractor convergence", c9_ring_convergence),
        ("verdict monotonicity", c10_monotonicity),
        ("split spectrum", c11_split_spectrum),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
