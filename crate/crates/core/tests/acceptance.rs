//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails, except the ones listed in
//! `KNOWN_CONFLICTS`, whose pinned reference value contradicts its own
//! defining formula. Those still print FAIL.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use mtmix::dpmm::{ChainConfig, DpmmModel, Sampler};
use mtmix::experiments::{replicate, ExperimentCase, RunConfig};
use mtmix::mtm::{count_recovery_bound, wasserstein_bound_constant, RecoveryConditions};
use mtmix::{mtm, omega_n, wasserstein, BoxDomain, GaussianKernel, MixingMeasure, MtmConfig, Point};
use rand::Rng as _;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Criteria that stay red: (name, reason).
const KNOWN_CONFLICTS: &[(&str, &str)] = &[(
    "omega_n values",
    "pinned 0.52419 at n=1500 is sqrt(ln ln n / ln n) at n=1298, not 1500",
)];

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn run(name: &'static str, budget: Option<Duration>, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (mut pass, mut detail) = f();
    let elapsed = start.elapsed();
    if let Some(b) = budget {
        if elapsed > b {
            pass = false;
            detail.push_str(&format!("; over the {:.0} s budget", b.as_secs_f64()));
        }
    }
    Outcome { name, pass, detail, elapsed }
}

fn wasserstein_solver() -> (bool, String) {
    let mut rng = common::rng(1);
    let mut worst: f64 = 0.0;
    for t in 0..200 {
        let d = 1 + t % 2;
        let r = [1.0, 2.0, 1.5][t % 3];
        let pair = common::random_rational_pair(&mut rng, d);
        let oracle = common::brute_force_cost(&pair, r).powf(1.0 / r);
        let got = wasserstein(&pair.g, &pair.h, r).unwrap().distance;
        worst = worst.max((got - oracle).abs());
    }

    let (mut sym, mut tri, mut ident): (f64, f64, f64) = (0.0, f64::INFINITY, 0.0);
    let mut separated = true;
    for t in 0..1000 {
        let d = 1 + t % 3;
        let r = if t % 2 == 0 { 1.0 } else { 2.0 };
        let mut m = || {
            let k = rng.random_range(1..=6);
            common::random_measure(&mut rng, k, d)
        };
        let (a, b, c) = (m(), m(), m());
        let ab = wasserstein(&a, &b, r).unwrap().distance;
        let ba = wasserstein(&b, &a, r).unwrap().distance;
        let bc = wasserstein(&b, &c, r).unwrap().distance;
        let ac = wasserstein(&a, &c, r).unwrap().distance;
        sym = sym.max((ab - ba).abs());
        tri = tri.min(ab + bc - ac);
        ident = ident.max(wasserstein(&a, &a, r).unwrap().distance);
        separated &= ab > 0.0;
    }
    let pass = worst <= 1e-8 && sym <= 1e-8 && tri >= -1e-7 && ident <= 1e-8 && separated;
    (
        pass,
        format!(
            "200 oracle instances max |err| {worst:.1e}; 1000 triples: symmetry {sym:.1e}, \
             min triangle slack {tri:.2e}, max W(G,G) {ident:.1e}"
        ),
    )
}

fn line(atoms: &[f64], weights: &[f64]) -> MixingMeasure {
    MixingMeasure::from_coords(atoms.iter().map(|a| vec![*a]).collect(), weights.to_vec()).unwrap()
}

fn mtm_hand_traces() -> (bool, String) {
    let mut ok = true;
    let mut notes = Vec::new();

    // Well-separated G0: both stages are no-ops.
    let g0 = ExperimentCase::preset("A").unwrap().truth().unwrap();
    for seed in 0..20 {
        let res = mtm(&g0, &MtmConfig::new(0.1, 0.5, 2.0, seed).unwrap()).unwrap();
        ok &= res.k_tilde == 3
            && res.g_tilde.approx_eq_unordered(&g0, 1e-15)
            && res.stage1_merge_count + res.stage2_truncated_count + res.stage2_demoted_count == 0;
    }
    notes.push(format!("G0 fixed: {ok}"));

    // 0.5 d0 + 0.3 d0.05 + 0.2 d1: two admissible stage-1 outcomes.
    let g = line(&[0.0, 0.05, 1.0], &[0.5, 0.3, 0.2]);
    let cfg = |seed| MtmConfig::new(0.1, 1.0, 1.0, seed).unwrap();
    let mut branches = [false, false];
    for seed in 0..1000u64 {
        let res = mtm(&g, &cfg(seed)).unwrap();
        let first_close = *res.order.iter().find(|&&i| i < 2).unwrap();
        let kept = [0.0, 0.05][first_close];
        let expected = line(&[kept, 1.0], &[0.8, 0.2]);
        let good = res.k_tilde == 2
            && res.stage1_merge_count == 1
            && res.stage2_truncated_count == 0
            && res.stage2_demoted_count == 0
            && res.merged_measure.approx_eq_unordered(&expected, 1e-15)
            && res.g_tilde.approx_eq_unordered(&expected, 1e-15)
            && res.absorptions == vec![(1 - first_close, first_close)];
        ok &= good;
        branches[first_close] = true;
        if branches == [true, true] && seed >= 50 {
            break;
        }
    }
    ok &= branches == [true, true];
    notes.push(format!("3-atom branches seen {branches:?}"));

    // 0.95 d0 + 0.05 d3: truncation then reassignment.
    for seed in 0..20 {
        let res = mtm(&line(&[0.0, 3.0], &[0.95, 0.05]), &MtmConfig::new(0.2, 1.0, 1.0, seed).unwrap()).unwrap();
        ok &= res.k_tilde == 1
            && res.g_tilde.atoms()[0].coords() == [0.0]
            && (res.g_tilde.weights()[0] - 1.0).abs() < 1e-15
            && res.stage2_truncated_count == 1;
    }
    (ok, notes.join("; "))
}

/// Random measure meeting the fixed-point preconditions, and its config.
fn fixed_point_instance(rng: &mut mtmix::rng::Rng) -> (MixingMeasure, f64, f64, f64) {
    loop {
        let k = rng.random_range(1..=6);
        let omega: f64 = rng.random_range(0.05..0.3);
        let c: f64 = rng.random_range(0.2..1.0);
        let r = if rng.random::<bool>() { 1.0 } else { 2.0 };
        let g = common::random_measure(rng, k, 2);
        let thr = (c * omega).powf(r);
        let a = g.atoms();
        let w = g.weights();
        let mut good = w.iter().all(|x| *x > thr);
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    let dist = a[i].distance(&a[j]);
                    good &= dist > omega && w[i] * dist.powf(r) > thr;
                }
            }
        }
        if good {
            return (g, omega, c, r);
        }
    }
}

fn mtm_fixed_point() -> (bool, String) {
    let mut rng = common::rng(3);
    let mut failures = 0;
    for _ in 0..100 {
        let (g, omega, c, r) = fixed_point_instance(&mut rng);
        for seed in 0..50 {
            let res = mtm(&g, &MtmConfig::new(omega, c, r, seed).unwrap()).unwrap();
            if !(res.k_tilde == g.len() && res.g_tilde.approx_eq_unordered(&g, 1e-12)) {
                failures += 1;
            }
        }
    }
    (failures == 0, format!("100 measures x 50 seeds, {failures} mismatches"))
}

/// `G` near `G0`: each true atom split into up to four atoms within
/// `delta * omega`, plus spurious atoms anywhere in the box carrying total
/// mass at most `(delta * omega)^r`.
fn perturbed_near(g0: &MixingMeasure, delta: f64, omega: f64, r: f64, seed: u64) -> MixingMeasure {
    let mut rng = common::rng(1_000_000 + seed);
    let radius = delta * omega;
    let spurious = radius.powf(r) * rng.random_range(0.5..1.0);
    let mut atoms = Vec::new();
    let mut masses = Vec::new();
    for (theta, p) in g0.iter() {
        let m = rng.random_range(1..=4);
        let split = common::composition(&mut rng, 100, m);
        for s in split {
            let rho = radius * rng.random::<f64>().sqrt();
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let c = theta.coords();
            atoms.push(Point::new(vec![c[0] + rho * angle.cos(), c[1] + rho * angle.sin()]).unwrap());
            masses.push(p * (1.0 - spurious) * s as f64 / 100.0);
        }
    }
    let n_spur = rng.random_range(1..=5);
    for _ in 0..n_spur {
        atoms.push(Point::new(vec![rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0)]).unwrap());
        masses.push(spurious / n_spur as f64);
    }
    MixingMeasure::from_masses(atoms, masses).unwrap()
}

struct ConsistencyRun {
    guards: RecoveryConditions,
    fraction: f64,
    bound: f64,
    worst_w: f64,
    w_bound: f64,
}

fn consistency_run(delta: f64, omega: f64, r: f64, c: f64) -> ConsistencyRun {
    let g0 = ExperimentCase::preset("A").unwrap().truth().unwrap();
    let diameter = BoxDomain::cube(2, -6.0, 6.0).unwrap().diameter();
    let w_bound = wasserstein_bound_constant(&g0, diameter, r) * delta.sqrt() * omega;
    let mut hits = 0;
    let mut worst_w: f64 = 0.0;
    for seed in 0..1000 {
        let g = perturbed_near(&g0, delta, omega, r, seed);
        let res = mtm(&g, &MtmConfig::new(omega, c, r, seed).unwrap()).unwrap();
        if res.k_tilde == g0.len() {
            hits += 1;
        }
        worst_w = worst_w.max(wasserstein(&res.g_tilde, &g0, r).unwrap().distance);
    }
    ConsistencyRun {
        guards: RecoveryConditions::evaluate(&g0, omega, delta, r),
        fraction: hits as f64 / 1000.0,
        bound: count_recovery_bound(&g0, delta, r),
        worst_w,
        w_bound,
    }
}

fn consistency() -> (bool, String) {
    let stated = consistency_run(0.01, 0.3, 2.0, 0.5);
    let compliant = consistency_run(1e-5, 0.19, 2.0, 0.5);
    let ok = |c: &ConsistencyRun| c.fraction >= c.bound - 0.02 && c.worst_w <= c.w_bound;
    let show = |c: &ConsistencyRun| {
        format!(
            "k~=3 in {:.3} (need >= {:.4}), max W2 {:.2e} <= {:.3}, guards B1-B4 {}{}{}{}",
            c.fraction,
            c.bound - 0.02,
            c.worst_w,
            c.w_bound,
            c.guards.b1 as u8,
            c.guards.b2 as u8,
            c.guards.b3 as u8,
            c.guards.b4 as u8
        )
    };
    (
        ok(&stated) && ok(&compliant) && compliant.guards.all(),
        format!("delta=0.01 omega=0.3: {}; delta=1e-5 omega=0.19: {}", show(&stated), show(&compliant)),
    )
}

fn crp_prior() -> (bool, String) {
    let data = (0..5).map(|i| Point::new(vec![i as f64, 0.0]).unwrap()).collect();
    let model = DpmmModel::new(1.0, BoxDomain::cube(2, -6.0, 6.0).unwrap(), GaussianKernel::isotropic(2, 0.05).unwrap(), data)
        .unwrap()
        .prior_only();
    let cfg = ChainConfig::new(0, 100_000, 1, 20_240_601).unwrap();
    let mut sampler = Sampler::new(model, cfg).unwrap();
    for _ in 0..100 {
        sampler.step();
    }
    let mut counts = [0u64; 5];
    for _ in 0..100_000 {
        sampler.step();
        counts[sampler.state.num_clusters() - 1] += 1;
    }
    // |s(5, k)| / 5! for alpha = 1.
    let pmf = [24.0, 50.0, 35.0, 10.0, 1.0].map(|s| s / 120.0);
    let total: u64 = counts.iter().sum();
    let stat: f64 =
        counts.iter().zip(pmf).map(|(&o, p)| (o as f64 - p * total as f64).powi(2) / (p * total as f64)).sum();
    let p_value = 1.0 - ChiSquared::new(4.0).unwrap().cdf(stat);
    (p_value > 0.01, format!("10^5 sweeps, counts {counts:?}, chi2 {stat:.2}, p = {p_value:.3}"))
}

fn case_c_scaled() -> (bool, String) {
    let chain = ChainConfig::new(500, 4500, 10, 0).unwrap();
    let mut small_c_ok = true;
    let mut below_three = 0;
    let mut modes = Vec::new();
    for master in 1..=5u64 {
        let cfg = RunConfig {
            case: ExperimentCase::preset("C").unwrap(),
            c_values: vec![0.45, 0.5, 0.55, 1.0],
            chain: chain.clone(),
            seed: master,
            ..RunConfig::default()
        };
        let rep = replicate(&cfg).unwrap();
        assert_eq!(rep.table.draws(), 450);
        let m: Vec<usize> = (0..4).map(|i| rep.table.mode(i).unwrap()).collect();
        small_c_ok &= m[..3].iter().all(|&k| k == 3);
        if m[3] < 3 {
            below_three += 1;
        }
        modes.push(m);
    }
    (
        small_c_ok && below_three >= 3,
        format!("modes per seed [c=.45,.5,.55,1.0]: {modes:?}; c=1.0 below 3 in {below_three}/5"),
    )
}

fn omega_values() -> (bool, String) {
    let w500 = omega_n(500).unwrap();
    let w1500 = omega_n(1500).unwrap();
    let ok500 = (w500 - 0.54221).abs() <= 1e-4;
    let ok1500 = (w1500 - 0.52419).abs() <= 1e-4;
    (ok500 && ok1500, format!("n=500 {w500:.6} (pinned 0.54221), n=1500 {w1500:.6} (pinned 0.52419)"))
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let outcomes = vec![
        run("Wasserstein solver vs brute force + metric axioms", Some(secs(10)), wasserstein_solver),
        run("MTM hand traces", Some(secs(1)), mtm_hand_traces),
        run("MTM fixed point", None, mtm_fixed_point),
        run("MTM count recovery near G0", Some(secs(30)), consistency),
        run("CRP prior recovery", Some(secs(60)), crp_prior),
        run("Case C scaled simulation", Some(secs(15 * 60)), case_c_scaled),
        run("omega_n values", None, omega_values),
    ];
    let mut unexpected = 0;
    for o in &outcomes {
        let known = KNOWN_CONFLICTS.iter().find(|(n, _)| *n == o.name);
        println!(
            "{} {} ({:.2} s): {}{}",
            if o.pass { "PASS" } else { "FAIL" },
            o.name,
            o.elapsed.as_secs_f64(),
            o.detail,
            match (o.pass, known) {
                (false, Some((_, why))) => format!(" [known conflict: {why}]"),
                _ => String::new(),
            }
        );
        if !o.pass && known.is_none() {
            unexpected += 1;
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("{passed}/{} criteria passed", outcomes.len());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
