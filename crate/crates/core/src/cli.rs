//! The `delaynet` command line.
//!
//! Every command reads the same flat parameter set (see [`crate::config`]),
//! writes its artifacts and a `resolved.config` into `--out`, and exits with
//! 0 on success, 1 on a numerical failure and 2 on a configuration error.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use crate::config::{read_file, Params};
use crate::disorder::{sample_realization, DisorderLaw};
use crate::dispersion::{
    characteristic_roots, classify_regime, dispersion_residual, hopf_curve_fixed_a, hopf_curve_fixed_beta, newton_root,
    write_classification_csv, ClassifyOptions, DispersionParams,
};
use crate::harness::{annealed_convergence, chaos_pairs, quenched_convergence, write_chaos_csv, Experiment};
use crate::meanfield::{build_quadrature, picard_meanfield, simulate_moments, FiringRateMeanField, MomentInit};
use crate::model::FiringRateModel;
use crate::netsim::{simulate_network, InitialHistory, Record, SimConfig};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "delaynet", version, about = "Delayed stochastic neuronal networks and their mean-field limit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Simulate the finite network on one disorder realization.
    SimulateNetwork,
    /// Integrate the Gaussian moment equations.
    SimulateMoments,
    /// Solve the mean-field equation by same-noise Picard iteration.
    Picard,
    /// Trace a Hopf curve (needs --fix-beta or --fix-a).
    HopfCurve,
    /// Find characteristic roots of the stationary state.
    DispersionRoot,
    /// Classify stationary / oscillatory by roots and by moment simulation.
    Classify,
    /// Quenched and annealed convergence rates.
    Converge,
    /// Pairwise correlation of tagged neurons versus N.
    ChaosPairs,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::SimulateNetwork => "simulate-network",
            Command::SimulateMoments => "simulate-moments",
            Command::Picard => "picard",
            Command::HopfCurve => "hopf-curve",
            Command::DispersionRoot => "dispersion-root",
            Command::Classify => "classify",
            Command::Converge => "converge",
            Command::ChaosPairs => "chaos-pairs",
        }
    }
}

/// Flags; each maps to the configuration key of the same name.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Flags {
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub theta: Option<String>,
    #[arg(long, global = true)]
    pub lambda: Option<String>,
    #[arg(long = "j-bar", global = true, allow_hyphen_values = true)]
    pub j_bar: Option<String>,
    #[arg(long = "a", global = true)]
    pub a: Option<String>,
    #[arg(long, global = true)]
    pub beta: Option<String>,
    #[arg(long = "tau-s", global = true)]
    pub tau_s: Option<String>,
    #[arg(long = "n", global = true)]
    pub n: Option<String>,
    #[arg(long, global = true)]
    pub dt: Option<String>,
    #[arg(long = "t-end", global = true)]
    pub t_end: Option<String>,
    #[arg(long = "disorder-seed", global = true)]
    pub disorder_seed: Option<String>,
    #[arg(long = "noise-seed", global = true)]
    pub noise_seed: Option<String>,
    #[arg(long = "root-seed", global = true)]
    pub root_seed: Option<String>,
    #[arg(long, global = true)]
    pub stride: Option<String>,
    /// Worker threads (0 = all logical cores).
    #[arg(long, global = true)]
    pub jobs: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<String>,
    #[arg(long = "fix-beta", global = true)]
    pub fix_beta: Option<String>,
    #[arg(long = "fix-a", global = true)]
    pub fix_a: Option<String>,
    #[arg(long, global = true)]
    pub ns: Option<String>,
    #[arg(long, global = true)]
    pub trials: Option<String>,
    #[arg(long, global = true)]
    pub panels: Option<String>,
    #[arg(long = "m", global = true)]
    pub m: Option<String>,
    #[arg(long, global = true)]
    pub iters: Option<String>,
    /// Any other configuration key, as KEY=VALUE.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE", allow_hyphen_values = true)]
    pub set: Vec<String>,
}

impl Flags {
    fn overrides(&self) -> Result<BTreeMap<String, String>> {
        let named = [
            ("theta", &self.theta),
            ("lambda", &self.lambda),
            ("j_bar", &self.j_bar),
            ("a", &self.a),
            ("beta", &self.beta),
            ("tau_s", &self.tau_s),
            ("n", &self.n),
            ("dt", &self.dt),
            ("t_end", &self.t_end),
            ("disorder_seed", &self.disorder_seed),
            ("noise_seed", &self.noise_seed),
            ("root_seed", &self.root_seed),
            ("stride", &self.stride),
            ("jobs", &self.jobs),
            ("out", &self.out),
            ("fix_beta", &self.fix_beta),
            ("fix_a", &self.fix_a),
            ("ns", &self.ns),
            ("trials", &self.trials),
            ("panels", &self.panels),
            ("m", &self.m),
            ("iters", &self.iters),
        ];
        let mut map: BTreeMap<String, String> =
            named.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v))).collect();
        for kv in &self.set {
            let (k, v) =
                kv.split_once('=').ok_or_else(|| Error::config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            map.insert(k.trim().replace('-', "_"), v.trim().to_string());
        }
        Ok(map)
    }
}

/// A parsed invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub command: Command,
    pub params: Params,
}

impl RunConfig {
    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.params.raw("out"))
    }
}

pub fn parse_config(cli: &Cli) -> Result<RunConfig> {
    let file = match &cli.flags.config {
        Some(path) => read_file(path)?,
        None => BTreeMap::new(),
    };
    let params = Params::resolve(file, cli.flags.overrides()?)?;
    Ok(RunConfig { command: cli.command, params })
}

/// Entry point of the binary; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match parse_config(&cli).and_then(|cfg| with_pool(&cfg, || run(&cfg))) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("delaynet: {e}");
            e.exit_code()
        }
    }
}

fn with_pool<T: Send>(cfg: &RunConfig, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let jobs = cfg.params.usize("jobs")?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::config(format!("cannot start {jobs} workers: {e}")))?;
    pool.install(f)
}

struct Ctx<'a> {
    p: &'a Params,
    out: PathBuf,
}

impl Ctx<'_> {
    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.out.join(name))?))
    }

    fn dispersion(&self) -> Result<DispersionParams> {
        let p = self.p;
        DispersionParams::new(
            p.f64("theta")?,
            p.f64("j_bar")?,
            p.f64("lambda")?,
            p.f64("a")?,
            p.f64("beta")?,
            p.f64("tau_s")?,
        )
    }

    fn law(&self) -> Result<DisorderLaw> {
        self.dispersion()?.law()
    }

    fn model(&self, n: usize) -> Result<FiringRateModel> {
        FiringRateModel::single(self.p.f64("theta")?, self.p.f64("lambda")?, self.p.f64("j_bar")?, n)
    }

    fn initial(&self) -> Result<InitialHistory> {
        let mean = self.p.f64("init_mean")?;
        let variance = match self.p.raw("init_var") {
            "stationary" => self.dispersion()?.v_star(),
            _ => self.p.f64("init_var")?,
        };
        Ok(InitialHistory::Gaussian { mean, variance })
    }

    fn sim_config(&self) -> Result<SimConfig> {
        Ok(SimConfig::new(self.p.f64("dt")?, self.p.f64("t_end")?, self.p.u64("noise_seed")?)
            .with_initial(self.initial()?)
            .with_record(Record::Tagged(self.p.usize("tagged")?)))
    }

    fn experiment(&self) -> Result<Experiment> {
        let mut exp = Experiment::new(
            self.law()?,
            self.model(1)?,
            self.p.usize_list("ns")?,
            self.p.usize("trials")?,
            self.p.u64("root_seed")?,
            self.sim_config()?,
        );
        exp.n_panels = self.p.usize("panels")?;
        Ok(exp)
    }
}

fn gnuplot(ctx: &Ctx, name: &str, body: &str) -> Result<()> {
    let mut f = ctx.create(name)?;
    writeln!(f, "set datafile separator ','\nset key autotitle columnhead\n{body}")?;
    f.flush()?;
    Ok(())
}

/// Executes a parsed command. `Ok` carries the exit status (nonzero only
/// for `converge` when a slope misses its interval).
pub fn run(cfg: &RunConfig) -> Result<i32> {
    let out = cfg.out_dir();
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("resolved.config"), cfg.params.emit())?;
    let ctx = Ctx { p: &cfg.params, out };
    let p = &cfg.params;
    let stride = p.usize("stride")?;
    match cfg.command {
        Command::SimulateNetwork => {
            let n = p.usize("n")?;
            let real = sample_realization(&ctx.law()?, n, p.u64("disorder_seed")?)?;
            let traj = simulate_network(&ctx.model(n)?, &real, &ctx.sim_config()?)?;
            let mut f = ctx.create("network.csv")?;
            traj.write_csv(&mut f, stride)?;
            f.flush()?;
            gnuplot(
                &ctx,
                "network.gp",
                "set xlabel 't'\nset multiplot layout 2,1\nplot 'network.csv' using 1:2 with lines\n\
                 plot for [c=4:*] 'network.csv' using 1:c with lines\nunset multiplot",
            )?;
        }
        Command::SimulateMoments => {
            let quad = build_quadrature(&ctx.law()?, p.usize("panels")?)?;
            let model = ctx.model(1)?;
            let init = MomentInit::from_initial(&ctx.initial()?, 1)?;
            let traj = simulate_moments(&model, &quad.into(), &ctx.sim_config()?, &init)?;
            let mut f = ctx.create("moments.csv")?;
            traj.write_csv(&mut f, stride)?;
            f.flush()?;
            gnuplot(
                &ctx,
                "moments.gp",
                "set xlabel 't'\nset multiplot layout 2,1\nplot 'moments.csv' using 1:2 with lines\n\
                 plot 'moments.csv' using 1:3 with lines\nunset multiplot",
            )?;
        }
        Command::Picard => {
            let model = FiringRateMeanField::from_model(&ctx.model(1)?)?;
            let quad = build_quadrature(&ctx.law()?, p.usize("panels")?)?;
            let res = picard_meanfield(&model, &quad, p.usize("m")?, p.usize("iters")?, &ctx.sim_config()?)?;
            let mut f = ctx.create("picard.csv")?;
            writeln!(f, "t,mean,var")?;
            for k in (0..res.mean.len()).step_by(stride.max(1)) {
                writeln!(f, "{},{},{}", k as f64 * res.dt, res.mean[k], res.var[k])?;
            }
            f.flush()?;
            let mut f = ctx.create("picard_distances.csv")?;
            writeln!(f, "k,d")?;
            for (k, d) in res.distances.iter().enumerate() {
                writeln!(f, "{},{}", k + 1, d)?;
            }
            f.flush()?;
        }
        Command::HopfCurve => {
            let params = ctx.dispersion()?;
            let (lo, hi, count) = (p.f64("grid_min")?, p.f64("grid_max")?, p.usize("grid_points")?);
            if count < 2 || !(lo < hi) {
                return Err(Error::config("grid needs grid_min < grid_max and at least 2 points"));
            }
            let grid: Vec<f64> = (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect();
            let extra = p.usize("branches")?;
            let (curve, xcol) = match (p.opt_f64("fix_beta")?, p.opt_f64("fix_a")?) {
                (Some(beta), None) => (hopf_curve_fixed_beta(beta, &params, &grid, extra)?, 1),
                (None, Some(a)) => (hopf_curve_fixed_a(a, &params, &grid, extra)?, 2),
                _ => return Err(Error::config("hopf-curve needs exactly one of `fix_beta` or `fix_a`")),
            };
            if curve.subcritical {
                eprintln!("delaynet: sub-critical gain, no Hopf point on the grid");
            }
            let mut f = ctx.create("hopf.csv")?;
            curve.write_csv(&mut f)?;
            f.flush()?;
            let xlabel = if xcol == 1 { "a" } else { "beta" };
            gnuplot(
                &ctx,
                "hopf.gp",
                &format!(
                    "set xlabel '{xlabel}'\nset ylabel 'tau_s'\nplot 'hopf.csv' using {xcol}:3 with points pt 7 ps 0.5"
                ),
            )?;
        }
        Command::DispersionRoot => {
            let params = ctx.dispersion()?;
            let seed = Complex64::new(p.f64("root_re")?, p.f64("root_im")?);
            let mut f = ctx.create("roots.csv")?;
            writeln!(f, "re,im,residual")?;
            let roots = characteristic_roots(&params, 16, 24);
            for r in &roots {
                writeln!(f, "{},{},{}", r.re, r.im, dispersion_residual(*r, &params).norm())?;
            }
            f.flush()?;
            match newton_root(seed, &params, 200) {
                Some(r) => println!("root from seed {seed}: {} {:+}i", r.re, r.im),
                None => println!("no root from seed {seed}"),
            }
            if let Some(r) = roots.first() {
                println!("rightmost root: {} {:+}i", r.re, r.im);
            }
        }
        Command::Classify => {
            let params = ctx.dispersion()?;
            let opts = ClassifyOptions {
                amp_threshold: p.f64("amp_threshold")?,
                transient_fraction: p.f64("transient")?,
                t_end: p.f64("classify_t_end")?,
                n_panels: p.usize("panels")?,
                ..ClassifyOptions::default()
            };
            let c = classify_regime(&params, &opts)?;
            let mut f = ctx.create("classify.csv")?;
            write_classification_csv(&[(params, c.clone())], &mut f)?;
            f.flush()?;
            println!(
                "method A: {}, method B: {}, agree: {}",
                c.method_a.map_or("none", |r| r.as_str()),
                c.method_b.as_str(),
                c.agree
            );
        }
        Command::Converge => {
            let exp = ctx.experiment()?;
            let (lo, hi) = (p.f64("slope_min")?, p.f64("slope_max")?);
            let modes: &[bool] = match p.raw("mode") {
                "quenched" => &[true],
                "annealed" => &[false],
                "both" => &[true, false],
                other => {
                    return Err(Error::config(format!(
                        "key `mode`: expected quenched, annealed or both, got {other:?}"
                    )))
                }
            };
            let mut pass = true;
            for &quenched in modes {
                let report = if quenched { quenched_convergence(&exp)? } else { annealed_convergence(&exp)? };
                let mut f = ctx.create(&format!("converge_{}.csv", report.mode.as_str()))?;
                report.write_csv(&mut f)?;
                f.flush()?;
                let summary = report.summary_json(lo, hi);
                println!("{summary}");
                pass &= report.slope().is_some_and(|s| (lo..=hi).contains(&s));
            }
            return Ok(if pass { 0 } else { 1 });
        }
        Command::ChaosPairs => {
            let rows = chaos_pairs(&ctx.experiment()?)?;
            let mut f = ctx.create("chaos.csv")?;
            write_chaos_csv(&rows, &mut f)?;
            f.flush()?;
        }
    }
    eprintln!("delaynet: {} wrote {}", cfg.command.name(), display(&ctx.out));
    Ok(0)
}

fn display(p: &Path) -> String {
    p.display().to_string()
}
