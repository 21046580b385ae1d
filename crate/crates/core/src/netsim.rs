//! Euler–Maruyama simulation of the finite delayed network.
//!
//! One step for neuron `i` of population α:
//!
//! ```text
//! X_{k+1} = X_k + dt·(-X_k/θ_α + I_α(t_k) + Σ_γ (1/N_γ) Σ_{j∈γ} w_ij S(X_j(t_k - τ_ij))) + λ_α √dt ξ
//! ```
//!
//! Delays are rounded to the nearest multiple of `dt`. The activation
//! `S(X_j)` of every neuron is computed once per step and kept in a
//! [`HistoryBuffer`]; edges of a row are sorted by delay, so each row is a
//! short list of `(lag, run of sources)` pairs and the inner loop is a plain
//! gather from one buffer row.
//!
//! Neuron `i` draws its initial value and its Brownian increments from
//! ChaCha8 stream `i` of the noise seed. Results do not depend on how the
//! per-neuron work is split across threads.

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::disorder::{DisorderRealization, EdgeWeights};
use crate::history::HistoryBuffer;
use crate::meanfield::MomentTrajectory;
use crate::model::{sigmoid_s, FiringRateModel};
use crate::{rng, Error, Result};

/// Initial condition, held constant on `[-τ, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialHistory {
    Constant(f64),
    PerNeuron(Vec<f64>),
    /// Independent `N(mean, variance)` draw per neuron.
    Gaussian {
        mean: f64,
        variance: f64,
    },
}

impl InitialHistory {
    /// Mean and variance of the one-neuron initial law.
    pub fn moments(&self) -> Result<(f64, f64)> {
        match self {
            InitialHistory::Constant(x) => Ok((*x, 0.0)),
            InitialHistory::Gaussian { mean, variance } => Ok((*mean, *variance)),
            InitialHistory::PerNeuron(_) => {
                Err(Error::config("per-neuron initial values do not define a population law"))
            }
        }
    }
}

/// Which neuron paths to keep besides the population statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Record {
    /// The first `k` neurons.
    Tagged(usize),
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Root seed of the Brownian increments (independent of the disorder seed).
    pub seed: u64,
    pub initial: InitialHistory,
    /// Each increment is the sum of this many `N(0, dt/m)` draws. Runs at
    /// `dt` with `m` substeps and at `dt/2` with `2m` share Brownian paths.
    pub noise_substeps: u32,
    pub record: Record,
    /// Stream index of each neuron; defaults to the neuron index.
    pub noise_streams: Option<Vec<u64>>,
}

impl SimConfig {
    pub fn new(dt: f64, t_end: f64, seed: u64) -> Self {
        Self {
            dt,
            t_end,
            seed,
            initial: InitialHistory::Constant(0.0),
            noise_substeps: 1,
            record: Record::Tagged(16),
            noise_streams: None,
        }
    }

    pub fn with_initial(mut self, initial: InitialHistory) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_record(mut self, record: Record) -> Self {
        self.record = record;
        self
    }

    pub fn with_noise_substeps(mut self, m: u32) -> Self {
        self.noise_substeps = m;
        self
    }

    /// Number of steps; the grid is `{0, dt, ..., steps·dt}`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Checks the grid and that the shortest delay spans at least ten steps.
    pub fn validate(&self, tau_min: Option<f64>) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::config(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return Err(Error::config(format!("t_end must be >= dt, got {}", self.t_end)));
        }
        if self.noise_substeps == 0 {
            return Err(Error::config("noise_substeps must be >= 1"));
        }
        if let InitialHistory::Gaussian { variance, .. } = self.initial {
            if !(variance >= 0.0) {
                return Err(Error::config("initial variance must be >= 0"));
            }
        }
        if let Some(tau) = tau_min {
            if self.dt > tau / 10.0 * (1.0 + 1e-12) {
                return Err(Error::config(format!(
                    "dt = {} does not resolve the minimal delay {tau} with 10 steps",
                    self.dt
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub disorder_seed: u64,
    pub noise_seed: u64,
    pub dt: f64,
    pub t_end: f64,
    pub n: usize,
}

/// Recorded output of a network (or coupled mean-field) run.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTrajectory {
    pub steps: usize,
    /// `mean[α][k]`: mean over population α at step `k`.
    pub mean: Vec<Vec<f64>>,
    /// Cross-sectional variance over population α at step `k`.
    pub var: Vec<Vec<f64>>,
    pub tagged: Vec<usize>,
    /// `paths[t][k]`: state of neuron `tagged[t]` at step `k`.
    pub paths: Vec<Vec<f64>>,
    /// `states[k][i]`, present with [`Record::All`].
    pub states: Option<Vec<Vec<f64>>>,
    pub final_state: Vec<f64>,
    pub meta: TrajectoryMeta,
}

impl NetworkTrajectory {
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.meta.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }

    /// Mean of the first population.
    pub fn population_mean(&self) -> &[f64] {
        &self.mean[0]
    }

    /// CSV `t,mean,var,x_0,...` (population-indexed `mean_α,var_α` columns
    /// when there are several populations), every `stride` steps.
    pub fn write_csv<W: Write>(&self, mut out: W, stride: usize) -> Result<()> {
        let stride = stride.max(1);
        let p = self.mean.len();
        let mut header = String::from("t");
        if p == 1 {
            header.push_str(",mean,var");
        } else {
            for a in 1..=p {
                header.push_str(&format!(",mean_{a},var_{a}"));
            }
        }
        for t in 0..self.paths.len() {
            header.push_str(&format!(",x_{t}"));
        }
        writeln!(out, "{header}")?;
        for k in (0..=self.steps).step_by(stride) {
            let mut line = format!("{}", self.time(k));
            for a in 0..p {
                line.push_str(&format!(",{},{}", self.mean[a][k], self.var[a][k]));
            }
            for path in &self.paths {
                line.push_str(&format!(",{}", path[k]));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Row-wise `(lag, end)` runs of the delay-sorted edge lists.
struct LagPlan {
    runs: Vec<(u32, usize)>,
    run_offsets: Vec<usize>,
    window: usize,
}

impl LagPlan {
    fn build(real: &DisorderRealization, dt: f64) -> Self {
        let n = real.n();
        let mut runs = Vec::new();
        let mut run_offsets = Vec::with_capacity(n + 1);
        run_offsets.push(0);
        let mut max_lag = 0usize;
        for i in 0..n {
            let range = real.row_range(i);
            let mut current: Option<u32> = None;
            for k in range.clone() {
                let lag = (real.edge_delay(i, k) / dt).round() as u32;
                if current != Some(lag) {
                    if let Some(prev) = current {
                        runs.push((prev, k));
                    }
                    current = Some(lag);
                }
            }
            if let Some(prev) = current {
                runs.push((prev, range.end));
                max_lag = max_lag.max(prev as usize);
            }
            run_offsets.push(runs.len());
        }
        Self { runs, run_offsets, window: max_lag + 1 }
    }
}

#[inline]
fn gather_sum(values: &[f64], sources: &[u32]) -> f64 {
    let mut acc = [0.0f64; 4];
    let mut chunks = sources.chunks_exact(4);
    for c in &mut chunks {
        acc[0] += values[c[0] as usize];
        acc[1] += values[c[1] as usize];
        acc[2] += values[c[2] as usize];
        acc[3] += values[c[3] as usize];
    }
    let mut tail = 0.0;
    for &j in chunks.remainder() {
        tail += values[j as usize];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn euler(x: f64, theta: f64, input: f64, interaction: f64, dt: f64, noise: f64) -> f64 {
    x + dt * (-x / theta + input + interaction) + noise
}

struct NeuronState {
    x: f64,
    coupled: f64,
    rng: ChaCha8Rng,
}

/// Shared engine of [`simulate_network`] and [`simulate_coupled`].
struct Engine<'a> {
    model: &'a FiringRateModel,
    real: &'a DisorderRealization,
    cfg: &'a SimConfig,
    membership: Vec<usize>,
    /// `w / N` when one population with a single weight value.
    uniform_scale: Option<f64>,
    /// `1 / N_γ` per neuron, for the general path.
    inv_count: Vec<f64>,
    plan: LagPlan,
}

impl<'a> Engine<'a> {
    fn new(model: &'a FiringRateModel, real: &'a DisorderRealization, cfg: &'a SimConfig) -> Result<Self> {
        let n = model.total_count();
        if real.n() != n {
            return Err(Error::config(format!("realization has {} neurons, model has {n}", real.n())));
        }
        cfg.validate((real.edge_count() > 0).then(|| real.tau_min()))?;
        if let InitialHistory::PerNeuron(v) = &cfg.initial {
            if v.len() != n {
                return Err(Error::config("per-neuron initial history has the wrong length"));
            }
        }
        if let Some(streams) = &cfg.noise_streams {
            if streams.len() != n {
                return Err(Error::config("noise stream map has the wrong length"));
            }
        }
        let membership = model.membership();
        let pops = model.populations();
        let inv_count: Vec<f64> = membership.iter().map(|&a| 1.0 / pops[a].count as f64).collect();
        let uniform_scale = match real.weights() {
            EdgeWeights::Uniform(w) if pops.len() == 1 => Some(w / n as f64),
            _ => None,
        };
        let plan = LagPlan::build(real, cfg.dt);
        let window = HistoryBuffer::window_for(real.tau_max(), cfg.dt);
        if plan.window > window {
            return Err(Error::config("a rounded delay exceeds the history window"));
        }
        Ok(Self { model, real, cfg, membership, uniform_scale, inv_count, plan })
    }

    #[inline]
    fn interaction(&self, i: usize, hist: &HistoryBuffer) -> f64 {
        let runs = &self.plan.runs[self.plan.run_offsets[i]..self.plan.run_offsets[i + 1]];
        let mut start = self.real.row_range(i).start;
        let sources = self.real.row_sources(i);
        let base = start;
        match self.uniform_scale {
            Some(scale) => {
                let mut acc = 0.0;
                for &(lag, end) in runs {
                    acc += gather_sum(hist.row(lag as usize), &sources[start - base..end - base]);
                    start = end;
                }
                acc * scale
            }
            None => {
                let mut acc = 0.0;
                for &(lag, end) in runs {
                    let values = hist.row(lag as usize);
                    for k in start..end {
                        let j = sources[k - base] as usize;
                        acc += self.real.edge_weight(k) * self.inv_count[j] * values[j];
                    }
                    start = end;
                }
                acc
            }
        }
    }

    fn run(&self, drive: Option<&[Vec<f64>]>) -> Result<(NetworkTrajectory, Option<NetworkTrajectory>)> {
        let cfg = self.cfg;
        let n = self.real.n();
        let steps = cfg.steps();
        let dt = cfg.dt;
        let pops = self.model.populations();
        let npop = pops.len();
        let substeps = cfg.noise_substeps;
        let noise_scale: Vec<f64> = pops.iter().map(|p| p.lambda * (dt / substeps as f64).sqrt()).collect();

        let mut neurons: Vec<NeuronState> = (0..n)
            .map(|i| {
                let stream = cfg.noise_streams.as_ref().map_or(i as u64, |s| s[i]);
                let mut rng = rng::stream(cfg.seed, stream);
                let x = match &cfg.initial {
                    InitialHistory::Constant(x) => *x,
                    InitialHistory::PerNeuron(v) => v[i],
                    InitialHistory::Gaussian { mean, variance } => {
                        let z: f64 = rng.sample(StandardNormal);
                        mean + variance.sqrt() * z
                    }
                };
                NeuronState { x, coupled: x, rng }
            })
            .collect();

        let initial_act: Vec<f64> = neurons.iter().map(|s| sigmoid_s(s.x)).collect();
        let mut hist = HistoryBuffer::new(self.plan.window.max(1), &initial_act)?;

        let mut rec = Recorder::new(self, steps);
        let mut rec_coupled = drive.map(|_| Recorder::new(self, steps));
        rec.record(&neurons, |s| s.x);
        if let Some(r) = rec_coupled.as_mut() {
            r.record(&neurons, |s| s.coupled);
        }

        for k in 0..steps {
            let t = k as f64 * dt;
            let inputs: Vec<f64> = pops.iter().map(|p| p.input.value(t)).collect();
            let hist_ref = &hist;
            neurons.par_iter_mut().enumerate().with_min_len(256).for_each(|(i, s)| {
                let alpha = self.membership[i];
                let theta = pops[alpha].theta;
                let mut xi = 0.0;
                for _ in 0..substeps {
                    xi += s.rng.sample::<f64, _>(StandardNormal);
                }
                let noise = noise_scale[alpha] * xi;
                let inter = self.interaction(i, hist_ref);
                s.x = euler(s.x, theta, inputs[alpha], inter, dt, noise);
                if let Some(g) = drive {
                    s.coupled = euler(s.coupled, theta, inputs[alpha], g[alpha][k], dt, noise);
                }
            });
            if let Some(bad) = neurons.iter().position(|s| !s.x.is_finite() || !s.coupled.is_finite()) {
                return Err(Error::NonFinite { step: k + 1, index: bad });
            }
            hist.next_row_mut()
                .par_iter_mut()
                .zip(neurons.par_iter())
                .with_min_len(1024)
                .for_each(|(slot, s)| *slot = sigmoid_s(s.x));
            hist.advance();
            rec.record(&neurons, |s| s.x);
            if let Some(r) = rec_coupled.as_mut() {
                r.record(&neurons, |s| s.coupled);
            }
        }

        let net = rec.finish(&neurons, |s| s.x);
        let coupled = rec_coupled.map(|r| r.finish(&neurons, |s| s.coupled));
        let _ = npop;
        Ok((net, coupled))
    }
}

struct Recorder<'e> {
    membership: &'e [usize],
    counts: Vec<usize>,
    tagged: Vec<usize>,
    mean: Vec<Vec<f64>>,
    var: Vec<Vec<f64>>,
    paths: Vec<Vec<f64>>,
    states: Option<Vec<Vec<f64>>>,
    meta: TrajectoryMeta,
    steps: usize,
}

impl<'e> Recorder<'e> {
    fn new(engine: &'e Engine<'_>, steps: usize) -> Self {
        let n = engine.real.n();
        let npop = engine.model.population_count();
        let (tagged, states) = match engine.cfg.record {
            Record::Tagged(k) => ((0..k.min(n)).collect::<Vec<_>>(), None),
            Record::All => ((0..n.min(16)).collect(), Some(Vec::with_capacity(steps + 1))),
        };
        Self {
            membership: &engine.membership,
            counts: engine.model.populations().iter().map(|p| p.count).collect(),
            paths: vec![Vec::with_capacity(steps + 1); tagged.len()],
            tagged,
            mean: vec![Vec::with_capacity(steps + 1); npop],
            var: vec![Vec::with_capacity(steps + 1); npop],
            states,
            meta: TrajectoryMeta {
                disorder_seed: engine.real.seed(),
                noise_seed: engine.cfg.seed,
                dt: engine.cfg.dt,
                t_end: engine.cfg.t_end,
                n,
            },
            steps,
        }
    }

    fn record(&mut self, neurons: &[NeuronState], get: impl Fn(&NeuronState) -> f64) {
        let npop = self.mean.len();
        let mut sums = vec![0.0; npop];
        for (s, &a) in neurons.iter().zip(self.membership) {
            sums[a] += get(s);
        }
        let means: Vec<f64> = sums.iter().zip(&self.counts).map(|(s, &c)| s / c as f64).collect();
        let mut sq = vec![0.0; npop];
        for (s, &a) in neurons.iter().zip(self.membership) {
            let d = get(s) - means[a];
            sq[a] += d * d;
        }
        for a in 0..npop {
            self.mean[a].push(means[a]);
            self.var[a].push(sq[a] / self.counts[a] as f64);
        }
        for (path, &i) in self.paths.iter_mut().zip(&self.tagged) {
            path.push(get(&neurons[i]));
        }
        if let Some(states) = self.states.as_mut() {
            states.push(neurons.iter().map(&get).collect());
        }
    }

    fn finish(self, neurons: &[NeuronState], get: impl Fn(&NeuronState) -> f64) -> NetworkTrajectory {
        NetworkTrajectory {
            steps: self.steps,
            mean: self.mean,
            var: self.var,
            tagged: self.tagged,
            paths: self.paths,
            states: self.states,
            final_state: neurons.iter().map(get).collect(),
            meta: self.meta,
        }
    }
}

/// Simulates the network on a frozen realization.
pub fn simulate_network(
    model: &FiringRateModel,
    real: &DisorderRealization,
    cfg: &SimConfig,
) -> Result<NetworkTrajectory> {
    let engine = Engine::new(model, real, cfg)?;
    Ok(engine.run(None)?.0)
}

/// Simulates the network together with, for every neuron, the mean-field
/// process `dX̄ = (-X̄/θ + I + G(t)) dt + λ dW` that shares its Brownian
/// increments and initial value. `G` is the interaction term of the moment
/// trajectory `mf`, which must live on the same time grid.
pub fn simulate_coupled(
    model: &FiringRateModel,
    real: &DisorderRealization,
    mf: &MomentTrajectory,
    cfg: &SimConfig,
) -> Result<(NetworkTrajectory, NetworkTrajectory)> {
    let steps = cfg.steps();
    if mf.dt() != cfg.dt || mf.steps() < steps {
        return Err(Error::config(format!(
            "moment trajectory grid (dt={}, {} steps) does not cover the simulation grid (dt={}, {steps} steps)",
            mf.dt(),
            mf.steps(),
            cfg.dt
        )));
    }
    if mf.populations() != model.population_count() {
        return Err(Error::config("moment trajectory and model disagree on the number of populations"));
    }
    let engine = Engine::new(model, real, cfg)?;
    let drive = mf.drive_series();
    let (net, coupled) = engine.run(Some(&drive))?;
    Ok((net, coupled.expect("coupled run records the mean-field process")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::{sample_realization, Atom, DisorderLaw};

    fn complete_constant_delay(n: usize, j: f64, delay: f64) -> DisorderRealization {
        let law = DisorderLaw::discrete(vec![Atom { weight: j, delay, prob: 1.0 }]).unwrap();
        sample_realization(&law, n, 3).unwrap()
    }

    #[test]
    fn free_decay_matches_exponential() {
        let dt = 0.01;
        let model = FiringRateModel::single(3.0, 0.0, 0.0, 5).unwrap();
        let real = sample_realization(&DisorderLaw::small_world(1.0, 0.0, 1.0, 0.0).unwrap(), 5, 1).unwrap();
        let cfg = SimConfig::new(dt, 3.0, 1).with_initial(InitialHistory::Constant(1.0));
        let traj = simulate_network(&model, &real, &cfg).unwrap();
        let x_t = traj.population_mean()[traj.steps];
        assert!((x_t - (-1.0f64).exp()).abs() <= 5.0 * dt);
    }

    #[test]
    fn symmetric_network_stays_synchronous() {
        let model = FiringRateModel::single(1.0, 0.0, -2.0, 12).unwrap();
        let real = complete_constant_delay(12, -2.0, 0.5);
        let cfg = SimConfig::new(0.05, 10.0, 1).with_initial(InitialHistory::Constant(0.8)).with_record(Record::All);
        let traj = simulate_network(&model, &real, &cfg).unwrap();
        for row in traj.states.as_ref().unwrap() {
            assert!(row.iter().all(|&x| x.to_bits() == row[0].to_bits()));
        }
        // the interaction actually acted
        let free = 0.8 * (-2.0f64).exp();
        assert!((traj.population_mean()[40] - free).abs() > 1e-2);
    }

    #[test]
    fn exchangeable_under_relabeling() {
        let n = 10;
        let model = FiringRateModel::single(1.0, 0.7, -1.5, n).unwrap();
        let real = complete_constant_delay(n, -1.5, 0.3);
        let base = SimConfig::new(0.02, 2.0, 8)
            .with_initial(InitialHistory::Gaussian { mean: 0.2, variance: 0.5 })
            .with_record(Record::All);
        let perm: Vec<usize> = vec![3, 7, 0, 9, 1, 2, 8, 6, 5, 4];
        let mut permuted = base.clone();
        permuted.noise_streams = Some(perm.iter().map(|&p| p as u64).collect());
        let a = simulate_network(&model, &real, &base).unwrap();
        let b = simulate_network(&model, &real, &permuted).unwrap();
        for (ra, rb) in a.states.unwrap().iter().zip(b.states.unwrap().iter()) {
            for i in 0..n {
                assert!((rb[i] - ra[perm[i]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let model = FiringRateModel::single(3.0, 1.0, -5.0, 600).unwrap();
        let real = sample_realization(&DisorderLaw::small_world(2.5, 0.1, 1.3, -5.0).unwrap(), 600, 4).unwrap();
        let cfg = SimConfig::new(0.1, 5.0, 9).with_initial(InitialHistory::Gaussian { mean: 0.3, variance: 1.5 });
        let a = simulate_network(&model, &real, &cfg).unwrap();
        let b = simulate_network(&model, &real, &cfg).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let c = pool.install(|| simulate_network(&model, &real, &cfg).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn config_errors() {
        let model = FiringRateModel::single(3.0, 1.0, -5.0, 20).unwrap();
        let real = sample_realization(&DisorderLaw::small_world(2.5, 0.1, 1.3, -5.0).unwrap(), 20, 4).unwrap();
        // dt too coarse for tau_s = 1.3
        assert!(matches!(simulate_network(&model, &real, &SimConfig::new(0.2, 5.0, 1)), Err(Error::Config(_))));
        assert!(simulate_network(&model, &real, &SimConfig::new(0.1, 0.05, 1)).is_err());
        let wrong = FiringRateModel::single(3.0, 1.0, -5.0, 21).unwrap();
        assert!(simulate_network(&wrong, &real, &SimConfig::new(0.1, 1.0, 1)).is_err());
    }

    #[test]
    fn overflow_is_reported_with_step() {
        // θ < 0 is rejected, so blow up through a huge input instead.
        let model = FiringRateModel::new(
            vec![crate::model::PopulationParams::new(1e9, 0.0, 3)
                .with_input(crate::model::PiecewiseConstant::new(vec![(0.5, f64::MAX)]).unwrap())],
            vec![vec![0.0]],
        )
        .unwrap();
        let real = complete_constant_delay(3, 0.0, 1.0);
        let err = simulate_network(&model, &real, &SimConfig::new(0.1, 5.0, 1)).unwrap_err();
        match err {
            Error::NonFinite { step, .. } => assert!(step >= 6),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn two_population_network_runs() {
        use crate::disorder::{sample_population_realization, LawMatrix};
        use crate::model::PopulationParams;
        let law = |w: f64| DisorderLaw::discrete(vec![Atom { weight: w, delay: 0.5, prob: 1.0 }]).unwrap();
        let laws = LawMatrix::new(vec![vec![law(1.0), law(-2.0)], vec![law(0.5), law(0.0)]]).unwrap();
        let real = sample_population_realization(&laws, &[6, 4], 2).unwrap();
        let model = FiringRateModel::new(
            vec![PopulationParams::new(1.0, 0.0, 6), PopulationParams::new(2.0, 0.0, 4)],
            vec![vec![1.0, -2.0], vec![0.5, 0.0]],
        )
        .unwrap();
        let cfg = SimConfig::new(0.05, 0.2, 1).with_initial(InitialHistory::Constant(1.0));
        let traj = simulate_network(&model, &real, &cfg).unwrap();
        // First step by hand: histories are constant, so S(1) enters every sum.
        let s1 = sigmoid_s(1.0);
        let drift0 = -1.0 / 1.0 + (5.0 / 6.0) * 1.0 * s1 + (4.0 / 4.0) * -2.0 * s1;
        let drift1 = -1.0 / 2.0 + (6.0 / 6.0) * 0.5 * s1;
        assert!((traj.mean[0][1] - (1.0 + 0.05 * drift0)).abs() < 1e-14);
        assert!((traj.mean[1][1] - (1.0 + 0.05 * drift1)).abs() < 1e-14);
    }

    #[test]
    fn csv_header_and_stride() {
        let model = FiringRateModel::single(1.0, 0.5, 0.0, 4).unwrap();
        let real = complete_constant_delay(4, 0.0, 1.0);
        let traj =
            simulate_network(&model, &real, &SimConfig::new(0.1, 1.0, 1).with_record(Record::Tagged(2))).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf, 5).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,mean,var,x_0,x_1");
        assert_eq!(lines.len(), 1 + 3);
        assert!(lines[2].starts_with("0.5,"));
    }
}
