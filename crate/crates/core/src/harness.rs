//! Convergence and propagation-of-chaos experiments.
//!
//! Every trial runs [`simulate_coupled`]: the network and, for each tagged
//! neuron, the mean-field process driven by the same noise and initial value.
//! The squared pathwise distance then measures how far the network is from
//! its limit, which should shrink like `1/N`.
//!
//! Seeds are derived from one root seed and the `(N, trial)` labels, and
//! trial results are reduced in `(N, trial)` order, so reports do not depend
//! on the worker count.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::disorder::{sample_realization, DisorderLaw, DisorderRealization};
use crate::meanfield::{build_quadrature, simulate_moments, MomentInit, MomentTrajectory, DEFAULT_PANELS};
use crate::model::FiringRateModel;
use crate::netsim::{simulate_coupled, NetworkTrajectory, Record, SimConfig};
use crate::rng::derive_seed;
use crate::{Error, Result};

const TAGGED: usize = 16;
const PAIRS: usize = 8;
const DISORDER_LABEL: u64 = 1;
const NOISE_LABEL: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Quenched,
    Annealed,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Quenched => "quenched",
            Mode::Annealed => "annealed",
        }
    }
}

/// Least-squares line fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
}

/// Ordinary least squares of `y` on `x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::config("a line fit needs at least two paired points"));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::config("a line fit needs distinct abscissae"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let rss: f64 = x.iter().zip(y).map(|(xi, yi)| (yi - intercept - slope * xi).powi(2)).sum();
        (rss / (n - 2) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LineFit { slope, slope_stderr, intercept })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub mode: Mode,
    pub ns: Vec<usize>,
    /// Mean over trials of the tag-averaged `sup_t |X - X̄|²`.
    pub mse: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Trials lost to simulation errors, per size.
    pub aborted: Vec<usize>,
    /// Fit of `log mse` against `log N`; `None` when some `mse` is zero.
    pub fit: Option<LineFit>,
}

impl ConvergenceReport {
    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    /// CSV `N,mse,stderr,mode`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "N,mse,stderr,mode")?;
        for i in 0..self.ns.len() {
            writeln!(out, "{},{},{},{}", self.ns[i], self.mse[i], self.stderr[i], self.mode.as_str())?;
        }
        Ok(())
    }

    /// One-line JSON `{slope, slope_stderr, pass}` where `pass` means the
    /// slope lies in `[lo, hi]`.
    pub fn summary_json(&self, lo: f64, hi: f64) -> String {
        #[derive(Serialize)]
        struct Summary {
            slope: Option<f64>,
            slope_stderr: Option<f64>,
            pass: bool,
        }
        let slope = self.slope();
        let pass = slope.is_some_and(|s| (lo..=hi).contains(&s));
        serde_json::to_string(&Summary { slope, slope_stderr: self.fit.map(|f| f.slope_stderr), pass })
            .expect("summary serializes")
    }
}

/// Shared setup of the experiments.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub law: DisorderLaw,
    /// One-population model; its size is replaced by each `N`.
    pub model: FiringRateModel,
    pub ns: Vec<usize>,
    pub trials: usize,
    pub root_seed: u64,
    /// Grid, horizon and initial law; its seed is replaced per trial.
    pub cfg: SimConfig,
    pub n_panels: usize,
}

impl Experiment {
    pub fn new(
        law: DisorderLaw,
        model: FiringRateModel,
        ns: Vec<usize>,
        trials: usize,
        root_seed: u64,
        cfg: SimConfig,
    ) -> Self {
        Self { law, model, ns, trials, root_seed, cfg, n_panels: DEFAULT_PANELS }
    }

    fn validate(&self, min_n: usize) -> Result<()> {
        if self.model.population_count() != 1 {
            return Err(Error::config("experiments use a single population"));
        }
        if self.ns.is_empty() || self.ns.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("ns must be non-empty and strictly increasing"));
        }
        if self.ns[0] < min_n {
            return Err(Error::config(format!("sizes must be at least {min_n}")));
        }
        if self.trials == 0 {
            return Err(Error::config("trials must be >= 1"));
        }
        Ok(())
    }

    fn moments(&self) -> Result<MomentTrajectory> {
        let quad = build_quadrature(&self.law, self.n_panels)?;
        let init = MomentInit::from_initial(&self.cfg.initial, 1)?;
        simulate_moments(&self.model, &quad.into(), &self.cfg, &init)
    }

    fn realization(&self, n: usize, mode: Mode, trial: usize) -> Result<DisorderRealization> {
        let path = match mode {
            Mode::Quenched => vec![n as u64, DISORDER_LABEL],
            Mode::Annealed => vec![n as u64, trial as u64, DISORDER_LABEL],
        };
        sample_realization(&self.law, n, derive_seed(self.root_seed, &path))
    }

    /// Runs every `(N, trial)` job and returns the outcomes sorted by size,
    /// then trial.
    fn run_trials<T: Send>(
        &self,
        mode: Mode,
        job: impl Fn(&NetworkTrajectory, &NetworkTrajectory) -> T + Sync,
    ) -> Result<Vec<Vec<Option<T>>>> {
        let mf = self.moments()?;
        let quenched: Vec<Option<DisorderRealization>> = match mode {
            Mode::Quenched => self.ns.iter().map(|&n| self.realization(n, mode, 0).map(Some)).collect::<Result<_>>()?,
            Mode::Annealed => vec![None; self.ns.len()],
        };
        let jobs: Vec<(usize, usize)> =
            (0..self.ns.len()).flat_map(|i| (0..self.trials).map(move |t| (i, t))).collect();
        let outcomes: Vec<Result<Option<T>>> = jobs
            .par_iter()
            .map(|&(i, trial)| {
                let n = self.ns[i];
                let model = self.model.with_counts(&[n])?;
                let fresh;
                let real = match &quenched[i] {
                    Some(r) => r,
                    None => {
                        fresh = self.realization(n, mode, trial)?;
                        &fresh
                    }
                };
                let mut cfg = self.cfg.clone();
                cfg.seed = derive_seed(self.root_seed, &[n as u64, trial as u64, NOISE_LABEL]);
                cfg.record = Record::Tagged(TAGGED);
                match simulate_coupled(&model, real, &mf, &cfg) {
                    Ok((net, coupled)) => Ok(Some(job(&net, &coupled))),
                    Err(e @ (Error::NonFinite { .. } | Error::Numerical(_) | Error::Diverged(_))) => {
                        let _ = e;
                        Ok(None)
                    }
                    Err(e) => Err(e),
                }
            })
            .collect();
        let mut grouped: Vec<Vec<Option<T>>> = (0..self.ns.len()).map(|_| Vec::with_capacity(self.trials)).collect();
        for (&(i, _), outcome) in jobs.iter().zip(outcomes) {
            grouped[i].push(outcome?);
        }
        for (i, group) in grouped.iter().enumerate() {
            let lost = group.iter().filter(|o| o.is_none()).count();
            if 4 * lost > self.trials {
                return Err(Error::Numerical(format!("{lost} of {} trials failed at N = {}", self.trials, self.ns[i])));
            }
        }
        Ok(grouped)
    }
}

/// `(1/k) Σ_tagged max_t |X - X̄|²`.
fn tagged_sup_mse(net: &NetworkTrajectory, coupled: &NetworkTrajectory) -> f64 {
    let k = net.paths.len();
    net.paths
        .iter()
        .zip(&coupled.paths)
        .map(|(x, y)| x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).fold(0.0, f64::max))
        .sum::<f64>()
        / k as f64
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn convergence(exp: &Experiment, mode: Mode) -> Result<ConvergenceReport> {
    exp.validate(2)?;
    let grouped = exp.run_trials(mode, tagged_sup_mse)?;
    let mut mse = Vec::new();
    let mut stderr = Vec::new();
    let mut aborted = Vec::new();
    for group in &grouped {
        let ok: Vec<f64> = group.iter().flatten().copied().collect();
        let (m, s) = mean_and_stderr(&ok);
        mse.push(m);
        stderr.push(s);
        aborted.push(group.len() - ok.len());
    }
    let fit = if exp.ns.len() >= 2 && mse.iter().all(|&m| m > 0.0) {
        let x: Vec<f64> = exp.ns.iter().map(|&n| (n as f64).ln()).collect();
        let y: Vec<f64> = mse.iter().map(|m| m.ln()).collect();
        Some(fit_line(&x, &y)?)
    } else {
        None
    };
    Ok(ConvergenceReport { mode, ns: exp.ns.clone(), mse, stderr, aborted, fit })
}

/// One realization per size, fresh noise per trial.
pub fn quenched_convergence(exp: &Experiment) -> Result<ConvergenceReport> {
    convergence(exp, Mode::Quenched)
}

/// Fresh realization and noise per trial.
pub fn annealed_convergence(exp: &Experiment) -> Result<ConvergenceReport> {
    convergence(exp, Mode::Annealed)
}

/// Pairwise dependence of tagged neurons at one size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaosRow {
    pub n: usize,
    /// `max_pairs |mean_trials ρ(X_i, X_j)|`.
    pub raw: f64,
    /// `max_pairs |mean_trials (ρ(X_i, X_j) - ρ(X̄_i, X̄_j))|`: the same
    /// statistic with the finite-sample correlation of the independent
    /// coupled pair subtracted trial by trial.
    pub corrected: f64,
    pub aborted: usize,
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Time correlations of the disjoint tagged pairs `(0,1), ..., (14,15)` on
/// one quenched realization per size.
pub fn chaos_pairs(exp: &Experiment) -> Result<Vec<ChaosRow>> {
    exp.validate(2 * PAIRS)?;
    let grouped = exp.run_trials(Mode::Quenched, |net, coupled| {
        (0..PAIRS)
            .map(|p| {
                let (i, j) = (2 * p, 2 * p + 1);
                (pearson(&net.paths[i], &net.paths[j]), pearson(&coupled.paths[i], &coupled.paths[j]))
            })
            .collect::<Vec<_>>()
    })?;
    Ok(exp
        .ns
        .iter()
        .zip(&grouped)
        .map(|(&n, group)| {
            let ok: Vec<&Vec<(f64, f64)>> = group.iter().flatten().collect();
            let t = ok.len() as f64;
            let mut raw: f64 = 0.0;
            let mut corrected: f64 = 0.0;
            for p in 0..PAIRS {
                let r = ok.iter().map(|v| v[p].0).sum::<f64>() / t;
                let c = ok.iter().map(|v| v[p].0 - v[p].1).sum::<f64>() / t;
                raw = raw.max(r.abs());
                corrected = corrected.max(c.abs());
            }
            ChaosRow { n, raw, corrected, aborted: group.len() - ok.len() }
        })
        .collect())
}

/// CSV `N,raw,corrected`.
pub fn write_chaos_csv<W: Write>(rows: &[ChaosRow], mut out: W) -> Result<()> {
    writeln!(out, "N,raw,corrected")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.n, r.raw, r.corrected)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::InitialHistory;

    #[test]
    fn synthetic_slope() {
        let mut rng = crate::rng::sequential(3);
        use rand::Rng;
        let ns = [100.0, 200.0, 400.0, 800.0, 1600.0, 3200.0];
        let x: Vec<f64> = ns.iter().map(|n: &f64| n.ln()).collect();
        let y: Vec<f64> = ns.iter().map(|n| (2.0 / n * (1.0 + 0.05 * rng.random_range(-1.0..1.0))).ln()).collect();
        let fit = fit_line(&x, &y).unwrap();
        assert!((fit.slope + 1.0).abs() < 0.05);
    }

    #[test]
    fn exact_line() {
        let fit = fit_line(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-14 && fit.slope_stderr < 1e-12);
        assert!(fit_line(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    fn small_experiment(j: f64) -> Experiment {
        let law = DisorderLaw::small_world(0.5, 0.1, 1.3, j).unwrap();
        let model = FiringRateModel::single(3.0, 1.0, j, 1).unwrap();
        let cfg = SimConfig::new(0.1, 2.0, 0).with_initial(InitialHistory::Gaussian { mean: 0.0, variance: 1.5 });
        Experiment::new(law, model, vec![20, 40], 4, 11, cfg)
    }

    #[test]
    fn no_interaction_means_zero_error() {
        let exp = small_experiment(0.0);
        for report in [quenched_convergence(&exp).unwrap(), annealed_convergence(&exp).unwrap()] {
            assert_eq!(report.mse, vec![0.0, 0.0]);
            assert!(report.fit.is_none());
        }
    }

    #[test]
    fn reports_are_reproducible_and_pool_independent() {
        let exp = small_experiment(-5.0);
        let a = quenched_convergence(&exp).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| quenched_convergence(&exp).unwrap());
        assert_eq!(a, b);
        assert!(a.mse.iter().all(|&m| m > 0.0));
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("N,mse,stderr,mode\n20,"));
        let json: serde_json::Value = serde_json::from_str(&a.summary_json(-1.3, -0.7)).unwrap();
        assert!(json.get("pass").is_some());
    }

    #[test]
    fn chaos_rows() {
        let rows = chaos_pairs(&small_experiment(-5.0)).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.raw >= 0.0 && r.raw <= 1.0));
        assert!(chaos_pairs(&Experiment { ns: vec![10], ..small_experiment(-5.0) }).is_err());
    }

    #[test]
    fn pearson_basics() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]) - 1.0).abs() < 1e-15);
        assert_eq!(pearson(&[1.0, 1.0], &[0.0, 2.0]), 0.0);
    }
}
