//! Mean-field limit of the firing-rate network.
//!
//! With Gaussian initial data the mean-field law stays Gaussian, and its mean
//! `u_α` and variance `v_α` obey the distributed-delay system
//!
//! ```text
//! u̇_α = -u_α/θ_α + I_α(t) + Σ_γ ∫ w E[S](u_γ(t-τ), v_γ(t-τ)) dΛ_αγ(w, τ)
//! v̇_α = -2 v_α/θ_α + λ_α²
//! ```
//!
//! [`simulate_moments`] integrates it with explicit Euler on the network grid.
//! [`picard_meanfield`] solves the McKean–Vlasov equation itself by iterating
//! the law map on `m` particles with frozen noise.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::disorder::{kernel, DisorderLaw, LawMatrix};
use crate::history::HistoryBuffer;
use crate::model::{expected_activation, sigmoid_s, FiringRateModel, PiecewiseConstant};
use crate::netsim::{InitialHistory, SimConfig};
use crate::quadrature::{composite, gauss_legendre};
use crate::{rng, Error, Result};
use num_complex::Complex64;

/// Default number of Gauss–Legendre panels on `[0, a]`.
pub const DEFAULT_PANELS: usize = 64;
const PANEL_ORDER: usize = 4;
const CELL_ORDER: usize = 8;

/// One quadrature node `(w, τ, q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadNode {
    pub weight: f64,
    pub delay: f64,
    pub mass: f64,
}

/// Discretization of a disorder law by weighted nodes with `Σ q = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LawQuadrature {
    nodes: Vec<QuadNode>,
    law: DisorderLaw,
}

/// Node of a law rounded onto the time grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagNode {
    pub lag: usize,
    pub weight: f64,
    pub mass: f64,
}

impl LawQuadrature {
    pub fn nodes(&self) -> &[QuadNode] {
        &self.nodes
    }

    pub fn law(&self) -> &DisorderLaw {
        &self.law
    }

    /// `Σ q_k w_k`.
    pub fn weighted_mass(&self) -> f64 {
        self.nodes.iter().map(|n| n.mass * n.weight).sum()
    }

    /// Smallest delay carrying a nonzero weight.
    pub fn tau_min(&self) -> f64 {
        self.nodes.iter().filter(|n| n.weight != 0.0 && n.mass > 0.0).map(|n| n.delay).fold(f64::INFINITY, f64::min)
    }

    pub fn tau_max(&self) -> f64 {
        self.nodes.iter().map(|n| n.delay).fold(0.0, f64::max)
    }

    /// The law mapped onto grid lags, matching the network's rounding of each
    /// delay to the nearest multiple of `dt`. For the small-world law the mass
    /// of each lag cell `[(ℓ-½)dt, (ℓ+½)dt)` is integrated directly, so the
    /// result does not depend on the panel count. Zero-weight mass is dropped.
    pub fn lag_nodes(&self, dt: f64) -> Vec<LagNode> {
        let mut out: Vec<LagNode> = Vec::new();
        let mut push = |lag: usize, weight: f64, mass: f64| {
            if weight == 0.0 || mass == 0.0 {
                return;
            }
            match out.iter_mut().find(|n| n.lag == lag && n.weight == weight) {
                Some(n) => n.mass += mass,
                None => out.push(LagNode { lag, weight, mass }),
            }
        };
        match &self.law {
            DisorderLaw::SmallWorldExp { a, beta, tau_s, j_bar } => {
                let rule = gauss_legendre(CELL_ORDER);
                let first = (tau_s / dt).round() as usize;
                let last = ((tau_s + a) / dt).round() as usize;
                for lag in first..=last {
                    let lo = ((lag as f64 - 0.5) * dt - tau_s).clamp(0.0, *a);
                    let hi = ((lag as f64 + 0.5) * dt - tau_s).clamp(0.0, *a);
                    if hi <= lo {
                        continue;
                    }
                    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                    let mass: f64 = rule
                        .iter()
                        .map(|&(x, w)| {
                            let r = mid + half * x;
                            w * half * small_world_density(r, *a, *beta)
                        })
                        .sum();
                    push(lag, *j_bar, mass);
                }
            }
            _ => {
                for n in &self.nodes {
                    push((n.delay / dt).round() as usize, n.weight, n.mass);
                }
            }
        }
        out.sort_by(|x, y| x.lag.cmp(&y.lag).then(x.weight.total_cmp(&y.weight)));
        out
    }
}

#[inline]
fn small_world_density(r: f64, a: f64, beta: f64) -> f64 {
    (-beta * r).exp() * (2.0 / a - 2.0 * r / (a * a))
}

/// Discretizes `law`. Discrete laws give their atoms, product laws the
/// product of their marginals. The small-world law gives composite
/// Gauss–Legendre nodes in the distance `r` carrying `e^{-βr}(2/a - 2r/a²)`
/// with weight `j_bar` at delay `τ_s + r`, plus one zero-weight node holding
/// the missing-edge mass `1 - K(β)`.
pub fn build_quadrature(law: &DisorderLaw, n_panels: usize) -> Result<LawQuadrature> {
    law.validate()?;
    if n_panels == 0 {
        return Err(Error::config("n_panels must be >= 1"));
    }
    let nodes = match law {
        DisorderLaw::Discrete { atoms } => {
            atoms.iter().map(|a| QuadNode { weight: a.weight, delay: a.delay, mass: a.prob }).collect()
        }
        DisorderLaw::Product { weights, delays } => {
            let mut nodes = Vec::new();
            for (&w, &pw) in weights.values().iter().zip(weights.probs()) {
                for (&d, &pd) in delays.values().iter().zip(delays.probs()) {
                    nodes.push(QuadNode { weight: w, delay: d, mass: pw * pd });
                }
            }
            nodes
        }
        DisorderLaw::SmallWorldExp { a, beta, tau_s, j_bar } => {
            let mut nodes: Vec<QuadNode> = composite(0.0, *a, n_panels, PANEL_ORDER)
                .into_iter()
                .map(|(r, w)| QuadNode {
                    weight: *j_bar,
                    delay: tau_s + r,
                    mass: w * small_world_density(r, *a, *beta),
                })
                .collect();
            let connected = kernel(Complex64::new(*beta, 0.0), *a).re;
            nodes.push(QuadNode { weight: 0.0, delay: *tau_s, mass: (1.0 - connected).max(0.0) });
            nodes
        }
    };
    Ok(LawQuadrature { nodes, law: law.clone() })
}

/// One quadrature per population pair.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureMatrix {
    entries: Vec<Vec<LawQuadrature>>,
}

impl QuadratureMatrix {
    pub fn single(quad: LawQuadrature) -> Self {
        Self { entries: vec![vec![quad]] }
    }

    pub fn build(laws: &LawMatrix, n_panels: usize) -> Result<Self> {
        let p = laws.size();
        let entries = (0..p)
            .map(|alpha| (0..p).map(|gamma| build_quadrature(laws.get(alpha, gamma), n_panels)).collect())
            .collect::<Result<_>>()?;
        Ok(Self { entries })
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, alpha: usize, gamma: usize) -> &LawQuadrature {
        &self.entries[alpha][gamma]
    }

    fn tau_min(&self) -> f64 {
        self.entries.iter().flatten().map(LawQuadrature::tau_min).fold(f64::INFINITY, f64::min)
    }

    fn tau_max(&self) -> f64 {
        self.entries.iter().flatten().map(LawQuadrature::tau_max).fold(0.0, f64::max)
    }
}

impl From<LawQuadrature> for QuadratureMatrix {
    fn from(quad: LawQuadrature) -> Self {
        Self::single(quad)
    }
}

/// Constant initial history `(u₀, v₀)` per population.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentInit {
    pub u0: Vec<f64>,
    pub v0: Vec<f64>,
}

impl MomentInit {
    pub fn single(u0: f64, v0: f64) -> Self {
        Self { u0: vec![u0], v0: vec![v0] }
    }

    /// The moments of a network initial condition, copied to every population.
    pub fn from_initial(initial: &InitialHistory, populations: usize) -> Result<Self> {
        let (u, v) = initial.moments()?;
        Ok(Self { u0: vec![u; populations], v0: vec![v; populations] })
    }
}

/// `(u_α, v_α)` on the grid `{-H·dt, ..., 0, ..., T}` and the interaction
/// term `G_α(t_k)` for `k ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTrajectory {
    dt: f64,
    steps: usize,
    history: usize,
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    drive: Vec<Vec<f64>>,
}

impl MomentTrajectory {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of grid points before time zero.
    pub fn history_len(&self) -> usize {
        self.history
    }

    pub fn populations(&self) -> usize {
        self.u.len()
    }

    /// Full grid from `-H·dt` to `T`.
    pub fn times(&self) -> Vec<f64> {
        (0..self.u[0].len()).map(|k| (k as f64 - self.history as f64) * self.dt).collect()
    }

    /// `u_α` on `{0, dt, ..., T}`.
    pub fn u(&self, alpha: usize) -> &[f64] {
        &self.u[alpha][self.history..]
    }

    pub fn v(&self, alpha: usize) -> &[f64] {
        &self.v[alpha][self.history..]
    }

    /// `u_α` including the initial history.
    pub fn u_full(&self, alpha: usize) -> &[f64] {
        &self.u[alpha]
    }

    pub fn v_full(&self, alpha: usize) -> &[f64] {
        &self.v[alpha]
    }

    /// `G_α(t_k)` for `k = 0..=steps`.
    pub fn drive(&self, alpha: usize) -> &[f64] {
        &self.drive[alpha]
    }

    pub(crate) fn drive_series(&self) -> Vec<Vec<f64>> {
        self.drive.clone()
    }

    /// CSV `t,u_1,...,u_P,v_1,...,v_P` over the full grid.
    pub fn write_csv<W: Write>(&self, mut out: W, stride: usize) -> Result<()> {
        let p = self.populations();
        let mut header = String::from("t");
        for a in 1..=p {
            header.push_str(&format!(",u_{a}"));
        }
        for a in 1..=p {
            header.push_str(&format!(",v_{a}"));
        }
        writeln!(out, "{header}")?;
        let times = self.times();
        for k in (0..times.len()).step_by(stride.max(1)) {
            let mut line = format!("{}", times[k]);
            for a in 0..p {
                line.push_str(&format!(",{}", self.u[a][k]));
            }
            for a in 0..p {
                line.push_str(&format!(",{}", self.v[a][k]));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Integrates the moment system with explicit Euler on the grid of `cfg`
/// (only `dt` and `t_end` are read). Delays are rounded to the grid as in the
/// network simulation.
pub fn simulate_moments(
    model: &FiringRateModel,
    quads: &QuadratureMatrix,
    cfg: &SimConfig,
    init: &MomentInit,
) -> Result<MomentTrajectory> {
    let p = model.population_count();
    if quads.size() != p {
        return Err(Error::config("quadrature matrix size does not match the number of populations"));
    }
    if init.u0.len() != p || init.v0.len() != p {
        return Err(Error::config("initial moments must be given for every population"));
    }
    if init.v0.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::config("initial variance must be >= 0"));
    }
    let tau_min = quads.tau_min();
    cfg.validate(tau_min.is_finite().then_some(tau_min))?;
    let dt = cfg.dt;
    let steps = cfg.steps();
    let kernels: Vec<Vec<Vec<LagNode>>> =
        (0..p).map(|a| (0..p).map(|g| quads.get(a, g).lag_nodes(dt)).collect()).collect();
    let max_lag = kernels.iter().flatten().flatten().map(|n| n.lag).max().unwrap_or(0);
    let history = max_lag.max(HistoryBuffer::window_for(quads.tau_max(), dt) - 1);

    let len = history + steps + 1;
    let mut u: Vec<Vec<f64>> = (0..p).map(|a| vec![init.u0[a]; history + 1]).collect();
    let mut v: Vec<Vec<f64>> = (0..p).map(|a| vec![init.v0[a]; history + 1]).collect();
    for a in 0..p {
        u[a].reserve(len);
        v[a].reserve(len);
    }
    let mut drive: Vec<Vec<f64>> = vec![Vec::with_capacity(steps + 1); p];
    // E[S] per population and grid index, filled as the grid advances.
    let mut act: Vec<Vec<f64>> =
        (0..p).map(|g| (0..=history).map(|k| expected_activation(u[g][k], v[g][k])).collect()).collect();

    let pops = model.populations();
    for k in 0..=steps {
        let idx = history + k;
        let t = k as f64 * dt;
        for a in 0..p {
            let mut g_sum = 0.0;
            for (g, kernel) in kernels[a].iter().enumerate() {
                for node in kernel {
                    g_sum += node.mass * node.weight * act[g][idx - node.lag];
                }
            }
            drive[a].push(g_sum);
        }
        if k == steps {
            break;
        }
        for a in 0..p {
            let pop = &pops[a];
            let (uk, vk) = (u[a][idx], v[a][idx]);
            let un = uk + dt * (-uk / pop.theta + pop.input.value(t) + drive[a][k]);
            let vn = vk + dt * (-2.0 * vk / pop.theta + pop.lambda * pop.lambda);
            if !un.is_finite() || !vn.is_finite() {
                return Err(Error::NonFinite { step: k + 1, index: a });
            }
            u[a].push(un);
            v[a].push(vn);
        }
        for g in 0..p {
            let value = expected_activation(u[g][idx + 1], v[g][idx + 1]);
            act[g].push(value);
        }
    }
    Ok(MomentTrajectory { dt, steps, history, u, v, drive })
}

/// Stationary moments `(0, λ_α²θ_α/2)` of the input-free system.
pub fn stationary_point(model: &FiringRateModel) -> Result<Vec<(f64, f64)>> {
    if model.populations().iter().any(|p| !p.input.is_zero()) {
        return Err(Error::NotApplicable("the closed-form stationary point requires zero input".into()));
    }
    Ok(model.populations().iter().map(|p| (0.0, p.stationary_variance())).collect())
}

/// A one-population McKean–Vlasov model
/// `dX = (f(t, X) + E_{Y,(w,τ)}[b(w, X_t, Y_{t-τ})]) dt + λ dW`.
pub trait MeanFieldModel: Sync {
    /// Intrinsic drift `f(t, x)`.
    fn drift(&self, t: f64, x: f64) -> f64;

    /// Constant noise intensity λ.
    fn diffusion(&self) -> f64;

    /// Interaction `b(w, x, y)` of a postsynaptic state `x` with a delayed
    /// presynaptic state `y`. Must vanish at `w = 0`.
    fn interaction(&self, w: f64, x: f64, y: f64) -> f64;

    /// When `b(w, x, y) = w·h(y)`, returns `h(y)`; enables an `O(m)` per-step
    /// evaluation instead of `O(m²)`.
    fn presynaptic(&self, _y: f64) -> Option<f64> {
        None
    }
}

/// The firing-rate model seen as a McKean–Vlasov model: `f = -x/θ + I(t)`,
/// `b = w S(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiringRateMeanField {
    pub theta: f64,
    pub lambda: f64,
    pub input: PiecewiseConstant,
}

impl FiringRateMeanField {
    pub fn from_model(model: &FiringRateModel) -> Result<Self> {
        if model.population_count() != 1 {
            return Err(Error::config("the particle solver handles one population"));
        }
        let p = &model.populations()[0];
        Ok(Self { theta: p.theta, lambda: p.lambda, input: p.input.clone() })
    }
}

impl MeanFieldModel for FiringRateMeanField {
    fn drift(&self, t: f64, x: f64) -> f64 {
        -x / self.theta + self.input.value(t)
    }

    fn diffusion(&self) -> f64 {
        self.lambda
    }

    fn interaction(&self, w: f64, _x: f64, y: f64) -> f64 {
        w * sigmoid_s(y)
    }

    fn presynaptic(&self, y: f64) -> Option<f64> {
        Some(sigmoid_s(y))
    }
}

/// Output of [`picard_meanfield`].
#[derive(Debug, Clone, PartialEq)]
pub struct PicardResult {
    pub dt: f64,
    /// Empirical mean of the last iterate on `{0, dt, ..., T}`.
    pub mean: Vec<f64>,
    /// Empirical variance of the last iterate.
    pub var: Vec<f64>,
    /// `d_k = max_t (1/m) Σ_p |X_p^{(k+1)}(t) - X_p^{(k)}(t)|²` for `k = 1, 2, ...`.
    pub distances: Vec<f64>,
}

/// Same-noise Picard iteration of the law map on `m` particles.
///
/// Iterate 0 holds every particle at its initial value; iterate `k+1`
/// re-simulates each particle with its frozen Brownian increments against
/// the empirical law of iterate `k`. `iters` applications of the map are
/// performed. Fails with [`Error::Diverged`] when `d_k` grows three times in
/// a row.
pub fn picard_meanfield<M: MeanFieldModel>(
    model: &M,
    quad: &LawQuadrature,
    m: usize,
    iters: usize,
    cfg: &SimConfig,
) -> Result<PicardResult> {
    if m < 2 {
        return Err(Error::config("picard needs at least 2 particles"));
    }
    if iters < 2 {
        return Err(Error::config("picard needs at least 2 iterations"));
    }
    let tau_min = quad.tau_min();
    cfg.validate(tau_min.is_finite().then_some(tau_min))?;
    let dt = cfg.dt;
    let steps = cfg.steps();
    let nodes = quad.lag_nodes(dt);
    let history = nodes.iter().map(|n| n.lag).max().unwrap_or(0);
    let len = history + steps + 1;
    let lambda = model.diffusion();
    let substeps = cfg.noise_substeps;
    let scale = lambda * (dt / substeps as f64).sqrt();

    // Initial values and frozen increments, one stream per particle.
    let (x0, noise): (Vec<f64>, Vec<Vec<f64>>) = (0..m)
        .into_par_iter()
        .map(|p| {
            let mut r = rng::stream(cfg.seed, p as u64);
            let x = match &cfg.initial {
                InitialHistory::Constant(x) => *x,
                InitialHistory::PerNeuron(v) => v[p % v.len()],
                InitialHistory::Gaussian { mean, variance } => {
                    let z: f64 = r.sample(StandardNormal);
                    mean + variance.sqrt() * z
                }
            };
            let xi = (0..steps)
                .map(|_| scale * (0..substeps).map(|_| r.sample::<f64, _>(StandardNormal)).sum::<f64>())
                .collect();
            (x, xi)
        })
        .unzip();

    let mut paths: Vec<Vec<f64>> = x0.iter().map(|&x| vec![x; len]).collect();
    let mut distances = Vec::with_capacity(iters - 1);
    let mut rises = 0;
    for iter in 0..iters {
        // Presynaptic fast path: Σ_nodes q w mean_p h(X_p(t - τ)).
        let field: Option<Vec<f64>> = model.presynaptic(0.0).map(|_| {
            let mean_h: Vec<f64> = (0..len)
                .into_par_iter()
                .map(|idx| paths.iter().map(|path| model.presynaptic(path[idx]).unwrap_or(0.0)).sum::<f64>() / m as f64)
                .collect();
            (0..=steps).map(|k| nodes.iter().map(|n| n.mass * n.weight * mean_h[history + k - n.lag]).sum()).collect()
        });
        let prev = &paths;
        let next: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|p| {
                let mut path = Vec::with_capacity(len);
                path.extend_from_slice(&prev[p][..=history]);
                for k in 0..steps {
                    let x = path[history + k];
                    let t = k as f64 * dt;
                    let inter = match &field {
                        Some(f) => f[k],
                        None => nodes
                            .iter()
                            .map(|n| {
                                let idx = history + k - n.lag;
                                n.mass * prev.iter().map(|q| model.interaction(n.weight, x, q[idx])).sum::<f64>()
                                    / m as f64
                            })
                            .sum(),
                    };
                    path.push(x + dt * (model.drift(t, x) + inter) + noise[p][k]);
                }
                path
            })
            .collect();
        if let Some((p, k)) =
            next.iter().enumerate().find_map(|(p, path)| path.iter().position(|x| !x.is_finite()).map(|k| (p, k)))
        {
            return Err(Error::NonFinite { step: k - history, index: p });
        }
        if iter > 0 {
            let d = (history..len)
                .map(|idx| next.iter().zip(prev).map(|(a, b)| (a[idx] - b[idx]).powi(2)).sum::<f64>() / m as f64)
                .fold(0.0, f64::max);
            if distances.last().is_some_and(|&last| d > last) {
                rises += 1;
                if rises >= 3 {
                    return Err(Error::Diverged(format!(
                        "picard distance increased three times in a row (d = {d:e} at iteration {iter})"
                    )));
                }
            } else {
                rises = 0;
            }
            distances.push(d);
        }
        paths = next;
    }

    let (mean, var) = (history..len)
        .map(|idx| {
            let mu = paths.iter().map(|p| p[idx]).sum::<f64>() / m as f64;
            let var = paths.iter().map(|p| (p[idx] - mu).powi(2)).sum::<f64>() / m as f64;
            (mu, var)
        })
        .unzip();
    Ok(PicardResult { dt, mean, var, distances })
}
