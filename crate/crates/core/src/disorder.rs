//! Quenched environments: neuron positions, Bernoulli edges and delays.
//!
//! A [`DisorderRealization`] is drawn once from a [`DisorderLaw`] and then
//! frozen. Sampling uses one sequential ChaCha8 stream per realization:
//! positions first, then every ordered pair `(i, j)`, `i != j`, in row-major
//! order. The same `(law, n, seed)` therefore always yields the same
//! realization.
//!
//! Edges are stored by target neuron (row `i` holds the presynaptic sources
//! `j`), each row sorted by increasing delay. Rounding delays to a time grid
//! is monotone, so for any step size the edges of a row sharing a rounded
//! lag form one contiguous run.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use rand::Rng;

use crate::{rng, Error, Result};

/// Finite distribution on the real line.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist {
    values: Vec<f64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl DiscreteDist {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::config("discrete distribution needs matching, non-empty values and probabilities"));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("probabilities must be >= 0 and values finite"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::config(format!("probabilities sum to {total}, expected 1")));
        }
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self { values, probs, cumulative })
    }

    pub fn point(value: f64) -> Self {
        Self { values: vec![value], probs: vec![1.0], cumulative: vec![1.0] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Inverse-CDF lookup for a uniform draw `u` in [0, 1).
    fn index(&self, u: f64) -> usize {
        self.cumulative.partition_point(|&c| c <= u).min(self.values.len() - 1)
    }
}

/// One atom `(w, τ, p)` of a discrete joint law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub weight: f64,
    pub delay: f64,
    pub prob: f64,
}

/// Joint law Λ of synaptic weight and delay for one population pair.
#[derive(Debug, Clone, PartialEq)]
pub enum DisorderLaw {
    /// Positions uniform on `[0, a]`; edge `j -> i` present with probability
    /// `exp(-β|r_i - r_j|)`, weight `j_bar`, delay `|r_i - r_j| + tau_s`.
    SmallWorldExp {
        a: f64,
        beta: f64,
        tau_s: f64,
        j_bar: f64,
    },
    /// Weight and delay drawn independently.
    Product {
        weights: DiscreteDist,
        delays: DiscreteDist,
    },
    Discrete {
        atoms: Vec<Atom>,
    },
}

impl DisorderLaw {
    pub fn small_world(a: f64, beta: f64, tau_s: f64, j_bar: f64) -> Result<Self> {
        let law = DisorderLaw::SmallWorldExp { a, beta, tau_s, j_bar };
        law.validate()?;
        Ok(law)
    }

    pub fn discrete(atoms: Vec<Atom>) -> Result<Self> {
        let law = DisorderLaw::Discrete { atoms };
        law.validate()?;
        Ok(law)
    }

    pub fn product(weights: DiscreteDist, delays: DiscreteDist) -> Result<Self> {
        let law = DisorderLaw::Product { weights, delays };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DisorderLaw::SmallWorldExp { a, beta, tau_s, j_bar } => {
                if !(*a > 0.0) || !a.is_finite() {
                    return Err(Error::config(format!("field length a must be > 0, got {a}")));
                }
                if !(*beta >= 0.0) {
                    return Err(Error::config(format!("beta must be >= 0, got {beta}")));
                }
                if !(*tau_s > 0.0) || !tau_s.is_finite() {
                    return Err(Error::config(format!("tau_s must be > 0, got {tau_s}")));
                }
                if !j_bar.is_finite() {
                    return Err(Error::config("j_bar must be finite"));
                }
            }
            DisorderLaw::Product { weights, delays } => {
                if weights.values.iter().any(|w| !w.is_finite()) {
                    return Err(Error::config("weights must be finite"));
                }
                if delays.values.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
                    return Err(Error::config("delays must be positive and finite"));
                }
            }
            DisorderLaw::Discrete { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::config("discrete law needs at least one atom"));
                }
                if atoms
                    .iter()
                    .any(|a| !(a.delay > 0.0) || !a.delay.is_finite() || !a.weight.is_finite() || !(a.prob >= 0.0))
                {
                    return Err(Error::config("atoms need positive finite delays, finite weights, non-negative mass"));
                }
                let total: f64 = atoms.iter().map(|a| a.prob).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::config(format!("atom probabilities sum to {total}, expected 1")));
                }
            }
        }
        Ok(())
    }

    pub fn tau_min(&self) -> f64 {
        match self {
            DisorderLaw::SmallWorldExp { tau_s, .. } => *tau_s,
            DisorderLaw::Product { delays, .. } => delays.values.iter().copied().fold(f64::INFINITY, f64::min),
            DisorderLaw::Discrete { atoms } => atoms.iter().map(|a| a.delay).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn tau_max(&self) -> f64 {
        match self {
            DisorderLaw::SmallWorldExp { a, tau_s, .. } => a + tau_s,
            DisorderLaw::Product { delays, .. } => delays.values.iter().copied().fold(0.0, f64::max),
            DisorderLaw::Discrete { atoms } => atoms.iter().map(|a| a.delay).fold(0.0, f64::max),
        }
    }

    pub fn field_length(&self) -> Option<f64> {
        match self {
            DisorderLaw::SmallWorldExp { a, .. } => Some(*a),
            _ => None,
        }
    }

    /// `E[J(w)]` under the law.
    pub fn mean_weight(&self) -> f64 {
        match self {
            DisorderLaw::SmallWorldExp { a, beta, j_bar, .. } => j_bar * kernel(Complex64::new(*beta, 0.0), *a).re,
            DisorderLaw::Product { weights, .. } => weights.values.iter().zip(&weights.probs).map(|(w, p)| w * p).sum(),
            DisorderLaw::Discrete { atoms } => atoms.iter().map(|a| a.weight * a.prob).sum(),
        }
    }
}

/// P×P matrix of laws, `laws[α][γ]` governing edges from population γ into
/// population α.
#[derive(Debug, Clone, PartialEq)]
pub struct LawMatrix {
    laws: Vec<Vec<DisorderLaw>>,
}

impl LawMatrix {
    pub fn new(laws: Vec<Vec<DisorderLaw>>) -> Result<Self> {
        let p = laws.len();
        if p == 0 || laws.iter().any(|row| row.len() != p) {
            return Err(Error::config("law matrix must be square and non-empty"));
        }
        for law in laws.iter().flatten() {
            law.validate()?;
        }
        let lengths: Vec<f64> = laws.iter().flatten().filter_map(DisorderLaw::field_length).collect();
        if lengths.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::config("all spatial laws must share the same field length"));
        }
        Ok(Self { laws })
    }

    pub fn single(law: DisorderLaw) -> Self {
        Self { laws: vec![vec![law]] }
    }

    pub fn size(&self) -> usize {
        self.laws.len()
    }

    pub fn get(&self, alpha: usize, gamma: usize) -> &DisorderLaw {
        &self.laws[alpha][gamma]
    }

    fn field_length(&self) -> Option<f64> {
        self.laws.iter().flatten().find_map(DisorderLaw::field_length)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EdgeWeights {
    Uniform(f64),
    PerEdge(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum EdgeDelays {
    /// `τ_ij = |r_i - r_j| + tau_s`, computed from the stored positions.
    Distance {
        tau_s: f64,
    },
    PerEdge(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub weight: f64,
    pub delay: f64,
}

/// One frozen sample of the random environment.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRealization {
    n: usize,
    positions: Vec<f64>,
    field_length: Option<f64>,
    offsets: Vec<usize>,
    sources: Vec<u32>,
    weights: EdgeWeights,
    delays: EdgeDelays,
    tau_min: f64,
    tau_max: f64,
    seed: u64,
}

impl DisorderRealization {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn field_length(&self) -> Option<f64> {
        self.field_length
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn edge_count(&self) -> usize {
        self.sources.len()
    }

    /// Smallest realized delay; zero when there are no edges.
    pub fn tau_min(&self) -> f64 {
        self.tau_min
    }

    /// Largest realized delay; zero when there are no edges.
    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    pub fn weights(&self) -> &EdgeWeights {
        &self.weights
    }

    /// Edge index range of row `i`.
    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    /// Presynaptic sources of neuron `i`, sorted by increasing delay.
    pub fn row_sources(&self, i: usize) -> &[u32] {
        &self.sources[self.row_range(i)]
    }

    #[inline]
    pub fn edge_weight(&self, k: usize) -> f64 {
        match &self.weights {
            EdgeWeights::Uniform(w) => *w,
            EdgeWeights::PerEdge(ws) => ws[k],
        }
    }

    /// Delay of the `k`-th stored edge, which belongs to row `i`.
    #[inline]
    pub fn edge_delay(&self, i: usize, k: usize) -> f64 {
        match &self.delays {
            EdgeDelays::Distance { tau_s } => {
                (self.positions[i] - self.positions[self.sources[k] as usize]).abs() + tau_s
            }
            EdgeDelays::PerEdge(ds) => ds[k],
        }
    }

    pub fn edges_into(&self, i: usize) -> impl Iterator<Item = Edge> + '_ {
        self.row_range(i).map(move |k| Edge {
            source: self.sources[k] as usize,
            weight: self.edge_weight(k),
            delay: self.edge_delay(i, k),
        })
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.row_sources(i).contains(&(j as u32))
    }
}

/// `n` independent uniform draws on `[0, a)`.
pub fn sample_positions<R: Rng + ?Sized>(n: usize, a: f64, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::config("n must be >= 1"));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::config(format!("field length a must be > 0, got {a}")));
    }
    Ok((0..n).map(|_| rng.random::<f64>() * a).collect())
}

/// Single-population realization of `n` neurons.
pub fn sample_realization(law: &DisorderLaw, n: usize, seed: u64) -> Result<DisorderRealization> {
    law.validate()?;
    sample_population_realization(&LawMatrix::single(law.clone()), &[n], seed)
}

/// Realization of a network whose populations occupy contiguous index
/// blocks of the given sizes.
pub fn sample_population_realization(laws: &LawMatrix, counts: &[usize], seed: u64) -> Result<DisorderRealization> {
    sample_inner(laws, counts, seed, None)
}

/// Single-population small-world realization on given positions: only the
/// edges are random, drawn in the same order as [`sample_realization`].
pub fn sample_realization_at(law: &DisorderLaw, positions: Vec<f64>, seed: u64) -> Result<DisorderRealization> {
    law.validate()?;
    let Some(a) = law.field_length() else {
        return Err(Error::config("positions only apply to the small-world law"));
    };
    if positions.is_empty() || positions.iter().any(|&r| !(0.0..=a).contains(&r)) {
        return Err(Error::config(format!("positions must be non-empty and lie in [0, {a}]")));
    }
    let n = positions.len();
    sample_inner(&LawMatrix::single(law.clone()), &[n], seed, Some(positions))
}

fn sample_inner(laws: &LawMatrix, counts: &[usize], seed: u64, fixed: Option<Vec<f64>>) -> Result<DisorderRealization> {
    if counts.len() != laws.size() {
        return Err(Error::config("one population count per law-matrix row is required"));
    }
    if counts.contains(&0) {
        return Err(Error::config("population counts must be >= 1"));
    }
    let n: usize = counts.iter().sum();
    if n > u32::MAX as usize {
        return Err(Error::config("network too large for 32-bit neuron indices"));
    }
    let membership: Vec<usize> = counts.iter().enumerate().flat_map(|(a, &c)| std::iter::repeat_n(a, c)).collect();

    let mut stream = rng::sequential(seed);
    let field_length = laws.field_length();
    let positions = match (field_length, fixed) {
        (_, Some(p)) => p,
        (Some(a), None) => sample_positions(n, a, &mut stream)?,
        (None, None) => Vec::new(),
    };

    let all_laws: Vec<&DisorderLaw> = laws.laws.iter().flatten().collect();
    let uniform_weight = match all_laws.as_slice() {
        [DisorderLaw::SmallWorldExp { j_bar, .. }, rest @ ..]
            if rest.iter().all(|l| matches!(l, DisorderLaw::SmallWorldExp { j_bar: w, .. } if w == j_bar)) =>
        {
            Some(*j_bar)
        }
        _ => None,
    };
    let distance_tau = match all_laws.as_slice() {
        [DisorderLaw::SmallWorldExp { tau_s, .. }, rest @ ..]
            if rest.iter().all(|l| matches!(l, DisorderLaw::SmallWorldExp { tau_s: t, .. } if t == tau_s)) =>
        {
            Some(*tau_s)
        }
        _ => None,
    };

    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut sources: Vec<u32> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut delays: Vec<f64> = Vec::new();
    let mut row: Vec<(f64, u32, f64)> = Vec::new();
    let (mut tau_min, mut tau_max) = (f64::INFINITY, 0.0f64);

    for i in 0..n {
        row.clear();
        let alpha = membership[i];
        for j in 0..n {
            if j == i {
                continue;
            }
            match laws.get(alpha, membership[j]) {
                DisorderLaw::SmallWorldExp { beta, tau_s, j_bar, .. } => {
                    let r = (positions[i] - positions[j]).abs();
                    let u: f64 = stream.random();
                    if u < (-beta * r).exp() && *j_bar != 0.0 {
                        row.push((r + tau_s, j as u32, *j_bar));
                    }
                }
                DisorderLaw::Product { weights: wd, delays: dd } => {
                    let w = wd.values[wd.index(stream.random())];
                    let d = dd.values[dd.index(stream.random())];
                    if w != 0.0 {
                        row.push((d, j as u32, w));
                    }
                }
                DisorderLaw::Discrete { atoms } => {
                    let u: f64 = stream.random();
                    let mut acc = 0.0;
                    let mut pick = atoms.len() - 1;
                    for (k, atom) in atoms.iter().enumerate() {
                        acc += atom.prob;
                        if u < acc {
                            pick = k;
                            break;
                        }
                    }
                    let atom = atoms[pick];
                    if atom.weight != 0.0 {
                        row.push((atom.delay, j as u32, atom.weight));
                    }
                }
            }
        }
        row.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        if let (Some(first), Some(last)) = (row.first(), row.last()) {
            tau_min = tau_min.min(first.0);
            tau_max = tau_max.max(last.0);
        }
        for &(d, j, w) in &row {
            sources.push(j);
            if uniform_weight.is_none() {
                weights.push(w);
            }
            if distance_tau.is_none() {
                delays.push(d);
            }
        }
        offsets.push(sources.len());
    }
    if sources.is_empty() {
        tau_min = 0.0;
    }

    Ok(DisorderRealization {
        n,
        positions,
        field_length,
        offsets,
        sources,
        weights: match uniform_weight {
            Some(w) => EdgeWeights::Uniform(w),
            None => EdgeWeights::PerEdge(weights),
        },
        delays: match distance_tau {
            Some(tau_s) => EdgeDelays::Distance { tau_s },
            None => EdgeDelays::PerEdge(delays),
        },
        tau_min,
        tau_max,
        seed,
    })
}

/// Radius below which the kernel is summed from its Taylor series.
const SERIES_RADIUS: f64 = 1.0;
const SERIES_TERMS: usize = 26;

/// Taylor coefficients `2(-1)^n / (n!(n+1)(n+2))` of `∫_0^1 e^{-zs} 2(1-s) ds`.
fn series_coefficients() -> [f64; SERIES_TERMS] {
    let mut c = [0.0; SERIES_TERMS];
    let mut factorial = 1.0;
    for (n, slot) in c.iter_mut().enumerate() {
        if n > 0 {
            factorial *= n as f64;
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        *slot = 2.0 * sign / (factorial * (n as f64 + 1.0) * (n as f64 + 2.0));
    }
    c
}

/// `K(c) = ∫_0^a e^{-cr} (2/a - 2r/a²) dr`, the Laplace transform of the
/// distance density between two uniform points on `[0, a]`.
pub fn kernel_transform(c: Complex64, a: f64) -> Result<Complex64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("field length must be > 0, got {a}")));
    }
    Ok(kernel(c, a))
}

pub(crate) fn kernel(c: Complex64, a: f64) -> Complex64 {
    let z = c * a;
    if z.norm() < SERIES_RADIUS {
        let coef = series_coefficients();
        coef.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &k| acc * z + k)
    } else {
        let inv = z.inv();
        inv * 2.0 * (Complex64::new(1.0, 0.0) - inv + (-z).exp() * inv)
    }
}

/// `dK/dc`.
pub(crate) fn kernel_derivative(c: Complex64, a: f64) -> Complex64 {
    let z = c * a;
    let dz = if z.norm() < SERIES_RADIUS {
        let coef = series_coefficients();
        (1..SERIES_TERMS).rev().fold(Complex64::new(0.0, 0.0), |acc, n| acc * z + coef[n] * n as f64)
    } else {
        let inv = z.inv();
        let inv2 = inv * inv;
        let inv3 = inv2 * inv;
        let e = (-z).exp();
        -inv2 * 2.0 + inv3 * 4.0 - e * inv2 * 2.0 - e * inv3 * 4.0
    };
    dz * a
}

/// Writes the edge list: header `# n=<n> a=<a> seed=<seed>`, then one
/// `i,j,w,tau` row per edge.
pub fn write_edge_list<W: Write>(real: &DisorderRealization, mut out: W) -> Result<()> {
    let a = match real.field_length {
        Some(a) => a.to_string(),
        None => "none".to_string(),
    };
    writeln!(out, "# n={} a={} seed={}", real.n, a, real.seed)?;
    for i in 0..real.n {
        for e in real.edges_into(i) {
            writeln!(out, "{},{},{},{}", i, e.source, e.weight, e.delay)?;
        }
    }
    Ok(())
}

/// Parses a file produced by [`write_edge_list`]. Positions are not part of
/// the format, so the result stores weights and delays per edge.
pub fn read_edge_list<R: BufRead>(input: R) -> Result<DisorderRealization> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::config("empty edge list"))??;
    let header = header.strip_prefix('#').ok_or_else(|| Error::config("edge list header must start with '#'"))?;
    let (mut n, mut a, mut seed) = (None, None, None);
    for field in header.split_whitespace() {
        let (key, value) = field.split_once('=').ok_or_else(|| Error::config(format!("bad header field {field:?}")))?;
        match key {
            "n" => n = Some(value.parse::<usize>().map_err(|e| Error::config(format!("header n: {e}")))?),
            "a" => {
                a = Some(if value == "none" {
                    None
                } else {
                    Some(value.parse::<f64>().map_err(|e| Error::config(format!("header a: {e}")))?)
                })
            }
            "seed" => seed = Some(value.parse::<u64>().map_err(|e| Error::config(format!("header seed: {e}")))?),
            other => return Err(Error::config(format!("unknown header field {other:?}"))),
        }
    }
    let n = n.ok_or_else(|| Error::config("header lacks n"))?;
    let mut rows: Vec<Vec<(f64, u32, f64)>> = vec![Vec::new(); n];
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::config(format!("edge list line {}: malformed row {line:?}", lineno + 2));
        let mut parts = line.split(',');
        let i: usize = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        let j: usize = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        let w: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        let d: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        if parts.next().is_some() || i >= n || j >= n || i == j || !(d > 0.0) || !w.is_finite() {
            return Err(bad());
        }
        rows[i].push((d, j as u32, w));
    }
    let mut offsets = vec![0];
    let (mut sources, mut weights, mut delays) = (Vec::new(), Vec::new(), Vec::new());
    let (mut tau_min, mut tau_max) = (f64::INFINITY, 0.0f64);
    for row in &mut rows {
        row.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        for &(d, j, w) in row.iter() {
            sources.push(j);
            weights.push(w);
            delays.push(d);
            tau_min = tau_min.min(d);
            tau_max = tau_max.max(d);
        }
        offsets.push(sources.len());
    }
    if sources.is_empty() {
        tau_min = 0.0;
    }
    let weights = match weights.first() {
        Some(&w0) if weights.iter().all(|&w| w == w0) => EdgeWeights::Uniform(w0),
        _ => EdgeWeights::PerEdge(weights),
    };
    Ok(DisorderRealization {
        n,
        positions: Vec::new(),
        field_length: a.flatten(),
        offsets,
        sources,
        weights,
        delays: EdgeDelays::PerEdge(delays),
        tau_min,
        tau_max,
        seed: seed.unwrap_or(0),
    })
}
