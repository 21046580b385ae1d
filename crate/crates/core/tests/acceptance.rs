//! Acceptance suite: one PASS/FAIL line per criterion and a summary.
//!
//! The process exits 0 so that `cargo test` goes on to the remaining test
//! targets; set `ACCEPTANCE_STRICT=1` to exit 1 when any criterion fails.
//! `ACCEPTANCE_ONLY=<k>` runs criterion `k` alone.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;

use delaynet::disorder::{kernel_transform, sample_realization, DisorderLaw};
use delaynet::dispersion::{
    classify_by_roots, classify_regime, dispersion_residual, hopf_curve_fixed_a, hopf_curve_fixed_beta,
    ClassifyOptions, DispersionParams, HopfPoint, Regime,
};
use delaynet::harness::{annealed_convergence, quenched_convergence, Experiment};
use delaynet::meanfield::{build_quadrature, picard_meanfield, simulate_moments, FiringRateMeanField, MomentInit};
use delaynet::model::{gaussian_expectation_s, FiringRateModel};
use delaynet::netsim::{simulate_network, InitialHistory, SimConfig};
use delaynet::oscillation::{detect_oscillation, finite_size_threshold};

type Verdict = (bool, String);
type Criterion = (&'static str, fn() -> delaynet::Result<Verdict>);

fn field_params(a: f64) -> DispersionParams {
    DispersionParams::new(3.0, -5.0, 1.0, a, 0.1, 1.3).unwrap()
}

fn decay_params(beta: f64, tau_s: f64) -> DispersionParams {
    DispersionParams::new(1.0, -3.5, 0.5, 3.0, beta, tau_s).unwrap()
}

fn regime_of(oscillatory: bool) -> Regime {
    if oscillatory {
        Regime::Oscillatory
    } else {
        Regime::Stationary
    }
}

/// Population-mean regime of an `n`-neuron network run.
fn network_regime(p: &DispersionParams, n: usize, t_end: f64) -> delaynet::Result<(Regime, f64)> {
    let real = sample_realization(&p.law()?, n, 1)?;
    let cfg = SimConfig::new(0.1, t_end, 2).with_initial(InitialHistory::Gaussian { mean: 0.2, variance: p.v_star() });
    let traj = simulate_network(&p.model(n)?, &real, &cfg)?;
    let osc = detect_oscillation(traj.population_mean(), cfg.dt, 0.5, finite_size_threshold(0.05, p.v_star(), n))?;
    Ok((regime_of(osc.oscillatory), osc.amplitude))
}

fn criterion_1() -> delaynet::Result<Verdict> {
    let start = Instant::now();
    let n = 5000;
    let law = DisorderLaw::small_world(2.5, 0.1, 1.3, 0.0)?;
    let real = sample_realization(&law, n, 1)?;
    let model = FiringRateModel::single(3.0, 1.0, 0.0, n)?;
    let cfg = SimConfig::new(0.01, 60.0, 2);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool");
    let traj = pool.install(|| simulate_network(&model, &real, &cfg))?;
    let var = *traj.var[0].last().unwrap();
    let rel = (var - 1.5).abs() / 1.5;
    let secs = start.elapsed().as_secs_f64();
    Ok((
        rel < 0.10 && secs < 30.0,
        format!("var(T)={var:.4} vs 1.5 (rel err {rel:.3} < 0.10), {secs:.1}s single-threaded < 30s"),
    ))
}

fn criterion_2() -> delaynet::Result<Verdict> {
    let opts = ClassifyOptions::default();
    let mut ok = true;
    let mut parts = Vec::new();
    let mut network_secs = 0.0;
    for (a, expected) in [(0.5, Regime::Stationary), (2.5, Regime::Oscillatory), (4.5, Regime::Stationary)] {
        let c = classify_regime(&field_params(a), &opts)?;
        let start = Instant::now();
        let (net, amp) = network_regime(&field_params(a), 5000, 300.0)?;
        network_secs += start.elapsed().as_secs_f64();
        let hit = c.method_a == Some(expected) && c.method_b == expected && net == expected;
        ok &= hit;
        parts.push(format!(
            "a={a}: A={} B={} net={} (amp {amp:.2}) want {}",
            c.method_a.map_or("none", Regime::as_str),
            c.method_b.as_str(),
            net.as_str(),
            expected.as_str()
        ));
    }
    ok &= network_secs < 300.0;
    Ok((ok, format!("{}; networks {network_secs:.0}s < 300s", parts.join("; "))))
}

fn criterion_3() -> delaynet::Result<Verdict> {
    let opts = ClassifyOptions::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (beta, tau_s, expected) in [(0.2, 2.0, Regime::Oscillatory), (0.9, 2.0, Regime::Stationary)] {
        let p = decay_params(beta, tau_s);
        let c = classify_regime(&p, &opts)?;
        let (net, amp) = network_regime(&p, 3500, 200.0)?;
        let hit = c.method_a == Some(expected) && c.method_b == expected && net == expected;
        ok &= hit;
        let root = c.rightmost.map_or("none".into(), |r| format!("{:+.4}", r.re));
        parts.push(format!(
            "(β={beta}, τ_s={tau_s}): A={} (Re ξ {root}) B={} net={} (amp {amp:.3}) want {}",
            c.method_a.map_or("none", Regime::as_str),
            c.method_b.as_str(),
            net.as_str(),
            expected.as_str()
        ));
    }
    Ok((ok, parts.join("; ")))
}

/// Whether a ±1% change of τ_s changes the root verdict at a curve point.
fn flips(h: &HopfPoint, base: &DispersionParams, opts: &ClassifyOptions) -> bool {
    let p = DispersionParams { a: h.a, beta: h.beta, tau_s: h.tau_s, ..*base };
    let below = classify_by_roots(&p.with_tau_s(h.tau_s * 0.99), opts).0;
    let above = classify_by_roots(&p.with_tau_s(h.tau_s * 1.01), opts).0;
    below.is_some() && above.is_some() && below != above
}

fn residual(h: &HopfPoint, base: &DispersionParams) -> f64 {
    let p = DispersionParams { a: h.a, beta: h.beta, tau_s: h.tau_s, ..*base };
    dispersion_residual(Complex64::new(0.0, h.omega), &p).norm()
}

fn criterion_4() -> delaynet::Result<Verdict> {
    let opts = ClassifyOptions::default();
    let base1 = field_params(1.0);
    let grid: Vec<f64> = (1..=1000).map(|i| i as f64 * 0.01).collect();
    let beta_curve = hopf_curve_fixed_beta(0.1, &base1, &grid, 0)?;
    let base2 = decay_params(0.2, 2.0);
    let betas: Vec<f64> = (0..=100).map(|i| i as f64 * 0.01).collect();
    let a_curve = hopf_curve_fixed_a(3.0, &base2, &betas, 0)?;

    let worst = beta_curve
        .points
        .iter()
        .map(|h| residual(h, &base1))
        .chain(a_curve.points.iter().map(|h| residual(h, &base2)))
        .fold(0.0, f64::max);

    let sample = |pts: &[HopfPoint], k: usize| -> Vec<HopfPoint> {
        (0..k).map(|i| pts[i * (pts.len() - 1) / (k - 1).max(1)]).collect()
    };
    let checks: Vec<(HopfPoint, DispersionParams)> = sample(&beta_curve.points, 40)
        .into_iter()
        .map(|h| (h, base1))
        .chain(sample(&a_curve.points, 15).into_iter().map(|h| (h, base2)))
        .collect();
    let flipped = checks.iter().filter(|(h, b)| flips(h, b, &opts)).count();

    let mut by_a = beta_curve.points.clone();
    by_a.sort_by(|p, q| p.a.total_cmp(&q.a));
    let imin = (0..by_a.len()).min_by(|&i, &j| by_a[i].tau_s.total_cmp(&by_a[j].tau_s)).unwrap_or(0);
    let interior = imin > 0 && imin + 1 < by_a.len();
    let local_minima = (1..by_a.len().saturating_sub(1))
        .filter(|&i| by_a[i].tau_s < by_a[i - 1].tau_s && by_a[i].tau_s < by_a[i + 1].tau_s)
        .count();
    let ok = worst < 1e-8 && flipped == checks.len() && interior && local_minima == 1;
    Ok((
        ok,
        format!(
            "{} + {} points, max |R(iω)|={worst:.1e} < 1e-8; ±1% τ_s flips {flipped}/{}; minimum (a={:.3}, τ_s={:.4}) interior={interior}, local minima={local_minima}",
            beta_curve.points.len(),
            a_curve.points.len(),
            checks.len(),
            by_a[imin].a,
            by_a[imin].tau_s
        ),
    ))
}

fn criterion_5() -> delaynet::Result<Verdict> {
    let start = Instant::now();
    let law = DisorderLaw::small_world(0.5, 0.1, 1.3, -5.0)?;
    let model = FiringRateModel::single(3.0, 1.0, -5.0, 1)?;
    let cfg = SimConfig::new(0.05, 5.0, 0).with_initial(InitialHistory::Gaussian { mean: 0.0, variance: 1.5 });
    let exp = Experiment::new(law, model, vec![100, 200, 400, 800, 1600, 3200], 16, 7, cfg);
    let q = quenched_convergence(&exp)?;
    let a = annealed_convergence(&exp)?;
    let in_band = |s: Option<f64>| s.is_some_and(|s| (-1.3..=-0.7).contains(&s));
    let i = exp.ns.iter().position(|&n| n == 1600).unwrap();
    let diff = (q.mse[i] - a.mse[i]).abs();
    let bound = 3.0 * (q.stderr[i].powi(2) + a.stderr[i].powi(2)).sqrt();
    let secs = start.elapsed().as_secs_f64();
    let ok = in_band(q.slope()) && in_band(a.slope()) && diff <= bound;
    Ok((
        ok,
        format!(
            "slopes quenched {:.3}, annealed {:.3} in [-1.3, -0.7]; N=1600 |Δmse|={diff:.2e} <= {bound:.2e}; {secs:.0}s",
            q.slope().unwrap_or(f64::NAN),
            a.slope().unwrap_or(f64::NAN)
        ),
    ))
}

fn criterion_6() -> delaynet::Result<Verdict> {
    let mut rng = delaynet::rng::sequential(2024);
    let mut worst_kernel: f64 = 0.0;
    for i in 0..100 {
        // A quarter of the inputs fall inside the series region.
        let a = rng.random_range(0.1..4.0);
        let c = if i % 4 == 0 {
            Complex64::from_polar(rng.random_range(0.0..1.0) / a, rng.random_range(-3.2..3.2))
        } else {
            Complex64::new(rng.random_range(-2.0..5.0), rng.random_range(-20.0..20.0))
        };
        let got = kernel_transform(c, a)?;
        let oracle = common::kernel_oracle(c, a);
        worst_kernel = worst_kernel.max((got - oracle).norm() / oracle.norm());
    }

    let mut mc_ok = true;
    let mut worst_z: f64 = 0.0;
    for u in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        for v in [0.0, 0.5, 1.5, 4.0] {
            let exact = gaussian_expectation_s(u, v)?;
            let (mean, se) = common::mc_expectation(u, v, 1_000_000, &mut rng);
            let z = if se > 0.0 { (exact - mean).abs() / se } else { (exact - mean).abs() * 1e12 };
            worst_z = worst_z.max(z);
            mc_ok &= z <= 3.0;
        }
    }

    let m = 10_000;
    let model = FiringRateModel::single(3.0, 1.0, -5.0, 1)?;
    let quad = build_quadrature(&DisorderLaw::small_world(0.5, 0.1, 1.3, -5.0)?, 64)?;
    let cfg = SimConfig::new(0.05, 5.0, 3).with_initial(InitialHistory::Gaussian { mean: 1.0, variance: 0.5 });
    let res = picard_meanfield(&FiringRateMeanField::from_model(&model)?, &quad, m, 10, &cfg)?;
    let mom = simulate_moments(&model, &quad.into(), &cfg, &MomentInit::single(1.0, 0.5))?;
    let mean_err = res.mean.iter().zip(mom.u(0)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let sd_err = res.var.iter().zip(mom.v(0)).map(|(x, y)| (x.sqrt() - y.sqrt()).abs()).fold(0.0, f64::max);
    let bound = 5.0 / (m as f64).sqrt();

    let ok = worst_kernel < 1e-10 && mc_ok && mean_err < bound && sd_err < bound;
    Ok((
        ok,
        format!(
            "kernel max rel err {worst_kernel:.1e} < 1e-10; MC worst |z|={worst_z:.2} <= 3; picard |Δmean|={mean_err:.4}, |Δsd|={sd_err:.4} < {bound:.3}"
        ),
    ))
}

fn run_cli(dir: &Path, jobs: usize, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_delaynet"))
        .args(args)
        .args(["--theta", "3", "--lambda", "1", "--j-bar", "-5", "--jobs", &jobs.to_string()])
        .arg("--out")
        .arg(dir)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn criterion_7() -> delaynet::Result<Verdict> {
    let root = tempfile::tempdir()?;
    let commands: [(&str, &[&str], &[&str]); 5] = [
        (
            "simulate-network",
            &["simulate-network", "--a", "2.5", "--n", "400", "--t-end", "20", "--dt", "0.1"],
            &["network.csv"],
        ),
        ("simulate-moments", &["simulate-moments", "--a", "2.5", "--t-end", "50", "--dt", "0.05"], &["moments.csv"]),
        (
            "picard",
            &["picard", "--a", "0.5", "--m", "500", "--iters", "4", "--t-end", "3", "--dt", "0.05"],
            &["picard.csv", "picard_distances.csv"],
        ),
        (
            "converge",
            &[
                "converge",
                "--a",
                "0.5",
                "--ns",
                "50,100,200",
                "--trials",
                "8",
                "--t-end",
                "2",
                "--dt",
                "0.1",
                "--set",
                "init_mean=0",
            ],
            &["converge_quenched.csv", "converge_annealed.csv"],
        ),
        (
            "chaos-pairs",
            &["chaos-pairs", "--a", "0.5", "--ns", "50,100", "--trials", "8", "--t-end", "2", "--dt", "0.1"],
            &["chaos.csv"],
        ),
    ];
    let mut ok = true;
    let mut compared = 0;
    for (name, args, files) in commands {
        let dirs = [
            root.path().join(format!("{name}-1a")),
            root.path().join(format!("{name}-1b")),
            root.path().join(format!("{name}-8")),
        ];
        let ran = run_cli(&dirs[0], 1, args) && run_cli(&dirs[1], 1, args) && run_cli(&dirs[2], 8, args);
        if !ran {
            return Ok((false, format!("{name} did not exit 0")));
        }
        for file in files {
            let bytes: Vec<Vec<u8>> =
                dirs.iter().map(|d| std::fs::read(d.join(file))).collect::<std::io::Result<_>>()?;
            ok &= bytes[0] == bytes[1] && bytes[0] == bytes[2] && !bytes[0].is_empty();
            compared += 1;
        }
    }
    Ok((ok, format!("{compared} artifacts byte-identical across repeated runs and --jobs 1 vs --jobs 8")))
}

fn criterion_8() -> delaynet::Result<Verdict> {
    let n = 2000;
    let law = DisorderLaw::small_world(0.5, 0.1, 1.3, -5.0)?;
    let real = sample_realization(&law, n, 1)?;
    let model = FiringRateModel::single(3.0, 1.0, -5.0, n)?;
    let mut finals = Vec::new();
    for (dt, substeps) in [(0.1, 4), (0.05, 2), (0.025, 1)] {
        let cfg = SimConfig::new(dt, 5.0, 9)
            .with_initial(InitialHistory::Gaussian { mean: 1.0, variance: 1.5 })
            .with_noise_substeps(substeps);
        finals.push(*simulate_network(&model, &real, &cfg)?.population_mean().last().unwrap());
    }
    let ratio = (finals[0] - finals[1]) / (finals[1] - finals[2]);
    Ok(((1.5..=2.5).contains(&ratio), format!("Richardson ratio {ratio:.3} in [1.5, 2.5]")))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("stationary variance", criterion_1),
        ("field-length regime triple", criterion_2),
        ("decay regime pair", criterion_3),
        ("Hopf curve self-consistency", criterion_4),
        ("propagation-of-chaos rate", criterion_5),
        ("oracle equivalences", criterion_6),
        ("determinism", criterion_7),
        ("step-size convergence", criterion_8),
    ];
    let filter: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = Vec::new();
    let mut ran = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if filter.is_some_and(|f| f != i + 1) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        ran += 1;
        if !pass {
            failed.push(i + 1);
        }
        println!(
            "criterion {} [{}] {name}: {detail} ({:.1}s)",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {ran} criteria passed, failing: {failed:?}", ran - failed.len());
    if !failed.is_empty() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
