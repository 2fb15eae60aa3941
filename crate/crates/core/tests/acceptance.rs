//! Acceptance checks. Each test prints one `PASS`/`FAIL` line before
//! asserting, so `cargo test --test acceptance -- --nocapture` gives a
//! readable summary.

use std::time::{Duration, Instant};

use condldp::conditional::{
    build_conditioning_set, check_infimum_consistency, conditional_free_energy, conditional_marginal_rate,
    inf_rate_on_set, slice_free_energy, solve_tilt, verify_duality, ConsistencyStatus, RateSource,
    DEFAULT_TILT_TOL,
};
use condldp::empirics::{
    canonical_expectation, convergence_sweep, estimate_conditional_logprob, EventSet, Method, SweepOptions,
};
use condldp::sets::GridMask;
use condldp::{ConditioningSet, Extended, Grid, JointModel, LogValue, Region, ScalarField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!("acceptance {id} [{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}

fn above(x: f64) -> Region {
    Region::HalfSpace {
        normal: vec![1.0],
        anchor: vec![x],
    }
}

fn kl(x: f64, p: f64) -> f64 {
    let t = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (a / b).ln() };
    t(x, p) + t(1.0 - x, 1.0 - p)
}

#[test]
fn tilt_identity_on_grid() {
    let start = Instant::now();
    let mut pass = true;
    let mut worst: f64 = 0.0;

    let gauss = JointModel::gaussian_cramer(0.0, 1.0).unwrap();
    let grid = Grid::line(-3.984375, 4.0, 512).unwrap();
    let h = grid.step(0);
    for x0 in [0.25, 0.5, 1.0, 2.0] {
        let t = solve_tilt(&gauss.free_energy(), &[x0], DEFAULT_TILT_TOL).unwrap();
        let b = build_conditioning_set(&t.lambda0, &t.x0, None).unwrap();
        let inf = inf_rate_on_set(&gauss.rate_function(), &b, &grid, Some(&t)).unwrap();
        let gap = (inf.value.to_f64() - t.min_rate).abs();
        // I'' = 1
        let ok = gap <= 2.0 * h * h;
        worst = worst.max(gap);
        pass &= ok;
        println!("  gaussian x0={x0}: grid {} vs {} (gap {gap:.3e})", inf.value, t.min_rate);
    }

    let p = 0.3;
    let bern = JointModel::bernoulli_cramer(p).unwrap();
    let grid = Grid::line(0.0, 1.022, 512).unwrap();
    let h = grid.step(0);
    for x0 in [0.4, 0.5, 0.7] {
        let t = solve_tilt(&bern.free_energy(), &[x0], DEFAULT_TILT_TOL).unwrap();
        let b = build_conditioning_set(&t.lambda0, &t.x0, None).unwrap();
        let inf = inf_rate_on_set(&bern.rate_function(), &b, &grid, Some(&t)).unwrap();
        let gap = (inf.value.to_f64() - t.min_rate).abs();
        // I''(x) = 1 / (x (1 − x)), bounded on [x0 − h, x0 + h]
        let curvature = [x0 - h, x0, x0 + h]
            .iter()
            .map(|&x| 1.0 / (x * (1.0 - x)))
            .fold(0.0, f64::max);
        let oracle = kl(x0, p);
        let ok = gap <= 2.0 * h * h * curvature
            && (inf.value.to_f64() - oracle).abs() <= 1e-6
            && (t.min_rate - oracle).abs() <= 1e-6;
        worst = worst.max(gap);
        pass &= ok;
        println!(
            "  bernoulli x0={x0}: grid {} analytic {} KL {oracle} (gap {gap:.3e})",
            inf.value, t.min_rate
        );
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(1);
    report(1, "inf I(B) on grid equals λ₀·x₀ − Ψ(λ₀, 0)", pass, &format!("worst gap {worst:.3e}, {elapsed:.2?}"));
    assert!(pass);
}

#[test]
fn sandwich_bounds_with_tilting() {
    let start = Instant::now();
    let m = JointModel::gaussian_cramer(0.0, 1.0).unwrap();
    let a = EventSet::new(above(1.0)).unwrap();
    let b = ConditioningSet::new(above(0.5)).unwrap();
    let s = convergence_sweep(
        &m,
        &[100, 200, 400, 800],
        &a,
        &b,
        Method::Tilted,
        2024,
        100_000,
        &SweepOptions::default(),
    )
    .unwrap();
    for (e, v) in s.estimates.iter().zip(&s.verdicts) {
        println!(
            "  n={}: estimate {} ± {:.2e}, bounds [{}, {}], {}",
            e.n,
            e.estimate,
            e.stderr,
            v.lower,
            v.upper,
            if v.pass { "inside" } else { "outside" }
        );
    }
    let late_pass = s.estimates.iter().zip(&s.verdicts).filter(|(e, _)| e.n >= 200).all(|(_, v)| v.pass);
    let last = s.estimates.last().unwrap().estimate.to_f64();
    let close = (last + 0.375).abs() <= 0.05;
    let elapsed = start.elapsed();
    let pass = late_pass && close && elapsed < Duration::from_secs(60) && s.target == LogValue::Finite(-0.375);
    report(
        2,
        "sandwich bounds for P(x ≥ 1 | x ≥ 0.5)",
        pass,
        &format!("n=800 estimate {last:.5} vs -0.375, {elapsed:.2?}"),
    );
    assert!(pass);
}

#[test]
fn canonical_expectation_of_pair() {
    let start = Instant::now();
    let c = canonical_expectation(&JointModel::gaussian_pair(), 500, &[1.0], 77, 10_000).unwrap();
    let (y, se) = (c.mean[0], c.stderr[0]);
    let elapsed = start.elapsed();
    let pass = (y - 2.0).abs() <= 4.0 * se && elapsed < Duration::from_secs(30);
    report(
        3,
        "canonical expectation of Y at λ₀ = 1",
        pass,
        &format!("{y:.5} ± {se:.2e} vs 2, {elapsed:.2?}"),
    );
    assert!(pass);
}

#[test]
fn conditional_free_energy_duality() {
    let start = Instant::now();
    let m = JointModel::gaussian_pair();
    let psi = m.free_energy();
    let t = solve_tilt(&psi, &[1.0], DEFAULT_TILT_TOL).unwrap();
    assert!((t.lambda0[0] - 1.0).abs() < 1e-10);
    let i_x0 = conditional_marginal_rate(&psi, &t, RateSource::ClosedForm(&m.rate_function()))
        .unwrap()
        .field;
    let psi_x0 = conditional_free_energy(&psi, &t.lambda0).unwrap();
    let lambda_grid = Grid::line(-60.0, 0.49, 16384).unwrap();
    let y_grid = Grid::line(0.2, 6.0, 512).unwrap();
    let r = verify_duality(&psi_x0, &i_x0, Some((&lambda_grid, &y_grid))).unwrap();
    let elapsed = start.elapsed();

    // the conjugate of I_{x₀} obtained by re-solving the tilt equation at each λ
    let slice = verify_duality(&slice_free_energy(&psi, &t), &i_x0, Some((&lambda_grid, &y_grid))).unwrap();
    println!(
        "  Ψ(λ₀, λ) − Ψ(λ₀, 0): max gap {} at y = {:?} over {} points",
        r.max_defect, r.worst_point, r.compared
    );
    println!(
        "  tilt re-solved per λ: max gap {} at y = {:?} over {} points ({} unresolved)",
        slice.max_defect, slice.worst_point, slice.compared, slice.unresolved
    );
    let pass = r.max_defect <= Extended::Finite(5e-3) && elapsed < Duration::from_secs(1);
    report(
        4,
        "conjugate of conditional free energy equals conditional marginal rate",
        pass,
        &format!("sup gap {}, {elapsed:.2?}", r.max_defect),
    );
    assert!(pass);
}

#[test]
fn conditional_concentration() {
    let start = Instant::now();
    let m = JointModel::gaussian_pair();
    let b = ConditioningSet::new(above(1.0)).unwrap();
    let s = convergence_sweep(
        &m,
        &[2000],
        &EventSet::whole(),
        &b,
        Method::Tilted,
        31,
        10_000,
        &SweepOptions::default(),
    )
    .unwrap();
    let frac = s.concentration[0];
    let elapsed = start.elapsed();
    let centred = (s.centre[0] - 1.0).abs() < 1e-9 && (s.centre[1] - 2.0).abs() < 1e-9;
    let pass = centred && frac >= 0.95 && elapsed < Duration::from_secs(60);
    report(
        5,
        "conditioned draws concentrate at (x₀, y₀) = (1, 2)",
        pass,
        &format!("fraction within 0.2: {frac:.4}, {elapsed:.2?}"),
    );
    assert!(pass);
}

#[test]
fn shell_thickness_independence() {
    let m = JointModel::gaussian_cramer(0.0, 1.0).unwrap();
    let a = EventSet::new(above(1.0)).unwrap();
    let t = solve_tilt(&m.free_energy(), &[0.5], DEFAULT_TILT_TOL).unwrap();
    let half = build_conditioning_set(&t.lambda0, &t.x0, None).unwrap();
    let base = estimate_conditional_logprob(&m, 800, &a, &half, Method::Tilted, 2024, 100_000).unwrap();
    println!("  half-space: {} ± {:.2e}", base.estimate, base.stderr);
    let mut pass = true;
    let mut details = Vec::new();
    for delta in [0.05, 0.2] {
        let shell = build_conditioning_set(&t.lambda0, &t.x0, Some(delta)).unwrap();
        let e = estimate_conditional_logprob(&m, 800, &a, &shell, Method::Tilted, 2024, 100_000).unwrap();
        let ok = match (e.estimate, base.estimate) {
            (LogValue::Finite(u), LogValue::Finite(v)) => (u - v).abs() <= 2.0 * e.stderr.hypot(base.stderr),
            _ => false,
        };
        println!(
            "  δ={delta}: {} ± {:.2e} (hits in A∩B: {})",
            e.estimate, e.stderr, e.hits_ab
        );
        details.push(format!("δ={delta}: {}", e.estimate));
        pass &= ok;
    }
    report(
        6,
        "shell thickness does not change the n=800 estimate",
        pass,
        &format!("half-space {}, {}", base.estimate, details.join(", ")),
    );
    assert!(pass);
}

fn quadratic_rate(centre: [f64; 2], q: [[f64; 2]; 2]) -> ScalarField {
    ScalarField::closed_form(2, move |p| {
        let d = [p[0] - centre[0], p[1] - centre[1]];
        Extended::Finite(0.5 * (q[0][0] * d[0] * d[0] + 2.0 * q[0][1] * d[0] * d[1] + q[1][1] * d[1] * d[1]))
    })
}

#[test]
fn infimum_consistency_suite() {
    let start = Instant::now();
    let grid = Grid::from_bounds(&[-2.0, -2.0], &[2.0, 2.0], &[81, 81]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = 0;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..100 {
        let centre = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        // Q = LLᵀ + 0.1·I
        let (l11, l21, l22): (f64, f64, f64) =
            (rng.random_range(0.2..1.5), rng.random_range(-1.0..1.0), rng.random_range(0.2..1.5));
        let q = [
            [l11 * l11 + 0.1, l11 * l21],
            [l11 * l21, l21 * l21 + l22 * l22 + 0.1],
        ];
        let rate = quadratic_rate(centre, q);
        // half-planes whose intersection holds a disc of radius 0.25 inside
        // [-1.5, 1.5]², i.e. several grid steps wide
        let (a, b) = loop {
            let mut half = || {
                let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                (
                    [th.cos(), th.sin()],
                    [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
                )
            };
            let (ha, hb) = (half(), half());
            let depth = |(n, o): ([f64; 2], [f64; 2]), c: [f64; 2]| n[0] * (c[0] - o[0]) + n[1] * (c[1] - o[1]);
            let resolvable = (0..31 * 31).any(|k| {
                let c = [-1.5 + 0.1 * (k % 31) as f64, -1.5 + 0.1 * (k / 31) as f64];
                depth(ha, c) >= 0.25 && depth(hb, c) >= 0.25
            });
            if resolvable {
                let set = |(n, o): ([f64; 2], [f64; 2])| {
                    ConditioningSet::new(Region::HalfSpace {
                        normal: n.to_vec(),
                        anchor: o.to_vec(),
                    })
                    .unwrap()
                };
                break (set(ha), set(hb));
            }
        };
        let r = check_infimum_consistency(&rate, &a, &b, &grid).unwrap();
        if let Extended::Finite(g) = r.gap {
            worst_ratio = worst_ratio.max(g / r.tolerance);
        }
        if r.status != ConsistencyStatus::Pass {
            failures += 1;
            println!("  instance failed: {r:?}");
        }
    }

    let quad = quadratic_rate([0.0, 0.0], [[1.0, 0.0], [0.0, 1.0]]);
    // a single node has empty interior
    let mut single = vec![false; grid.len()];
    single[grid.node_of(&[0.5, 0.5]).unwrap()] = true;
    let empty_interior = ConditioningSet::mask(GridMask::new(grid.clone(), single).unwrap());
    let r1 = check_infimum_consistency(&quad, &ConditioningSet::whole(), &empty_interior, &grid).unwrap();
    // a half-plane plus an isolated node: closure of the interior misses the node
    let isolated = GridMask::from_fn(grid.clone(), |p| p[0] >= 1.0 || (p[0] == -1.0 && p[1] == 0.0));
    let r2 = check_infimum_consistency(&quad, &ConditioningSet::whole(), &ConditioningSet::mask(isolated), &grid)
        .unwrap();
    let designed = r1.status == ConsistencyStatus::HypothesisViolated && r2.status == ConsistencyStatus::HypothesisViolated;
    println!("  empty interior: {:?}; isolated node: {:?}", r1.status, r2.status);

    let elapsed = start.elapsed();
    let pass = failures == 0 && designed && elapsed < Duration::from_secs(5);
    report(
        7,
        "interior and closure infima agree on regular sets",
        pass,
        &format!("{failures} failures of 100, worst gap/tolerance {worst_ratio:.3}, {elapsed:.2?}"),
    );
    assert!(pass);
}
