//! Exact evolving-set machinery on small finite graphs.
//!
//! A unit time interval carries a piecewise-constant environment; the
//! one-step transition kernel of the walk is the product of uniformized
//! subinterval semigroups and is exact to truncation error < 1e-12. On top
//! of the kernel sit the evolving-set law (exact, by U-threshold
//! enumeration), its Doob transform, the Diaconis–Fill coupling, and the
//! escape diagnostics used by the supermartingale estimate.
//!
//! Everything here is restricted to graphs whose walk has the uniform
//! measure stationary: regular graphs, or subgraphs of a regular host with
//! `host_degree` set. Vertex sets are bitmasks, so |V| <= 64.

use crate::error::{Error, Result};
use crate::graphs::FiniteGraph;
use crate::rng::StreamRng;
use serde::{Deserialize, Serialize};

/// Piecewise-constant environment over one unit interval: subinterval
/// lengths summing to 1 and, per subinterval, the set of open edges as a
/// bitmask over the graph's canonical edge list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PiecewiseEnvironment {
    pub lengths: Vec<f64>,
    pub open_masks: Vec<u64>,
}

impl PiecewiseEnvironment {
    pub fn new(lengths: Vec<f64>, open_masks: Vec<u64>) -> Result<Self> {
        if lengths.len() != open_masks.len() || lengths.is_empty() {
            return Err(Error::InvalidParameter("lengths/open_masks mismatch".into()));
        }
        if lengths.iter().any(|&l| l <= 0.0) {
            return Err(Error::InvalidParameter("subinterval lengths must be positive".into()));
        }
        let total: f64 = lengths.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "subintervals must span one unit interval, got {total}"
            )));
        }
        Ok(PiecewiseEnvironment { lengths, open_masks })
    }

    /// A single subinterval with the given open set.
    pub fn constant(open_mask: u64) -> Self {
        PiecewiseEnvironment { lengths: vec![1.0], open_masks: vec![open_mask] }
    }

    pub fn all_open(n_edges: usize) -> Self {
        Self::constant(mask_full(n_edges))
    }

    pub fn all_closed() -> Self {
        Self::constant(0)
    }

    /// 1–4 subintervals with Dirichlet-uniform lengths and independent
    /// Bernoulli(p_open) edge states.
    pub fn random(n_edges: usize, p_open: f64, rng: &mut StreamRng) -> Self {
        let pieces = 1 + rng.below(4) as usize;
        let mut cuts: Vec<f64> = (0..pieces - 1).map(|_| rng.uniform()).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.push(1.0);
        let mut lengths = Vec::with_capacity(pieces);
        let mut prev = 0.0;
        for &c in &cuts {
            lengths.push((c - prev).max(1e-12));
            prev = c;
        }
        let total: f64 = lengths.iter().sum();
        for l in &mut lengths {
            *l /= total;
        }
        let open_masks = (0..pieces)
            .map(|_| {
                (0..n_edges)
                    .filter(|_| rng.bernoulli(p_open))
                    .fold(0u64, |m, e| m | (1 << e))
            })
            .collect();
        PiecewiseEnvironment { lengths, open_masks }
    }
}

fn mask_full(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub fn set_size(mask: u64) -> u32 {
    mask.count_ones()
}

fn set_members(mask: u64) -> impl Iterator<Item = u32> {
    (0..64u32).filter(move |i| mask & (1 << i) != 0)
}

/// Exact one-step transition matrix of the walk over one unit interval.
#[derive(Debug, Clone)]
pub struct Kernel {
    n: usize,
    m: Vec<f64>, // row-major
}

impl Kernel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, x: usize, y: usize) -> f64 {
        self.m[x * self.n + y]
    }

    pub fn identity(n: usize) -> Self {
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = 1.0;
        }
        Kernel { n, m }
    }

    fn matmul(&self, other: &Kernel) -> Kernel {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.m[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.m[k * n + j];
                }
            }
        }
        Kernel { n, m: out }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.entry(i, j)).sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.n).map(|j| (0..self.n).map(|i| self.entry(i, j)).sum()).collect()
    }
}

/// Builds the unit-interval kernel for the given piecewise environment by
/// uniformization at rate 1 (the walk's total attempt rate), truncated when
/// the remaining Poisson tail drops below 1e-13 per subinterval.
pub fn step_kernel(g: &FiniteGraph, env: &PiecewiseEnvironment) -> Result<Kernel> {
    let n = g.len();
    if n == 0 || n > 64 {
        return Err(Error::InvalidParameter("kernel needs 1..=64 vertices".into()));
    }
    if g.host_degree.is_none() {
        let d0 = g.degree(0);
        if (0..n as u32).any(|v| g.degree(v) != d0) {
            return Err(Error::IrregularGraph);
        }
    }
    let edges = g.edge_list();
    if edges.len() > 64 {
        return Err(Error::InvalidParameter("more than 64 edges".into()));
    }

    let mut kernel = Kernel::identity(n);
    for (len, mask) in env.lengths.iter().zip(&env.open_masks) {
        // U = I + G with jump rates 1/deg to each open neighbor.
        let mut u = vec![0.0f64; n * n];
        for x in 0..n {
            u[x * n + x] = 1.0;
        }
        for (e, &(a, b)) in edges.iter().enumerate() {
            if mask & (1 << e) == 0 {
                continue;
            }
            let qa = 1.0 / g.weight_degree(a) as f64;
            let qb = 1.0 / g.weight_degree(b) as f64;
            u[a as usize * n + b as usize] += qa;
            u[a as usize * n + a as usize] -= qa;
            u[b as usize * n + a as usize] += qb;
            u[b as usize * n + b as usize] -= qb;
        }
        let u = Kernel { n, m: u };

        let delta = *len;
        let mut weight = (-delta).exp(); // Poisson(delta) pmf at 0
        let mut cumulative = weight;
        let mut term = Kernel::identity(n);
        let mut piece = Kernel { n, m: term.m.iter().map(|v| v * weight).collect() };
        let mut k = 0u32;
        while 1.0 - cumulative > 1e-13 {
            k += 1;
            term = term.matmul(&u);
            weight *= delta / k as f64;
            cumulative += weight;
            for (o, t) in piece.m.iter_mut().zip(&term.m) {
                *o += weight * t;
            }
            if k > 200 {
                break;
            }
        }
        kernel = kernel.matmul(&piece);
    }
    Ok(kernel)
}

/// Exact law of the evolving-set step from `S`: the distinct level sets of
/// `Q(y) = sum_{x in S} P(x, y)` weighted by the U-intervals that select
/// them (threshold rule `Q(y) >= U` as written).
#[derive(Debug, Clone)]
pub struct EvolvingSetLaw {
    /// `(vertex set, probability)`, nested and increasing.
    pub outcomes: Vec<(u64, f64)>,
}

impl EvolvingSetLaw {
    pub fn expected_size(&self) -> f64 {
        self.outcomes.iter().map(|&(m, p)| set_size(m) as f64 * p).sum()
    }

    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|&(_, p)| p).sum()
    }
}

pub fn evolving_set_law(k: &Kernel, set: u64) -> Result<EvolvingSetLaw> {
    if set == 0 {
        return Err(Error::EmptySet);
    }
    let n = k.n();
    let q: Vec<f64> = (0..n)
        .map(|y| set_members(set).filter(|&x| (x as usize) < n).map(|x| k.entry(x as usize, y)).sum())
        .collect();
    let mut levels: Vec<f64> = q.iter().copied().filter(|&v| v > 0.0).map(|v| v.min(1.0)).collect();
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();
    let mut outcomes = Vec::with_capacity(levels.len() + 1);
    if let Some(&top) = levels.first() {
        let p_empty = 1.0 - top;
        if p_empty > 0.0 {
            outcomes.push((0u64, p_empty));
        }
    } else {
        outcomes.push((0u64, 1.0));
    }
    for (i, &v) in levels.iter().enumerate() {
        let below = levels.get(i + 1).copied().unwrap_or(0.0);
        let mask = (0..n).filter(|&y| q[y] >= v).fold(0u64, |m, y| m | (1 << y));
        let p = v - below;
        if p > 0.0 {
            outcomes.push((mask, p));
        }
    }
    Ok(EvolvingSetLaw { outcomes })
}

/// The size-biased (Doob) law `|B|/|S| K(S, B)`, which never returns the
/// empty set.
pub fn doob_law(k: &Kernel, set: u64) -> Result<Vec<(u64, f64)>> {
    let base = evolving_set_law(k, set)?;
    let s = set_size(set) as f64;
    Ok(base
        .outcomes
        .into_iter()
        .filter(|&(m, _)| m != 0)
        .map(|(m, p)| (m, p * set_size(m) as f64 / s))
        .collect())
}

/// Samples one step of the Doob-transformed evolving set by enumerating
/// its (at most |V|+1) outcomes.
pub fn doob_step(k: &Kernel, set: u64, rng: &mut StreamRng) -> Result<u64> {
    let law = doob_law(k, set)?;
    let total: f64 = law.iter().map(|&(_, p)| p).sum();
    let mut u = rng.uniform() * total;
    for &(m, p) in &law {
        u -= p;
        if u <= 0.0 {
            return Ok(m);
        }
    }
    Ok(law.last().expect("doob law is nonempty").0)
}

/// Joint walker/set state of the Diaconis–Fill coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DFState {
    pub walker: u32,
    pub set: u64,
}

impl DFState {
    pub fn start(x: u32) -> Self {
        DFState { walker: x, set: 1u64 << x }
    }
}

/// One step of the Diaconis–Fill chain: samples `(y, B)` with
/// `P(x,y) K(A,B) / Q_A(y)`, so the walker follows the kernel, the set
/// follows the Doob transform, and the walker stays uniform on the set
/// given the set history.
pub fn df_step(k: &Kernel, state: DFState, rng: &mut StreamRng) -> Result<DFState> {
    if state.set & (1 << state.walker) == 0 {
        return Err(Error::WalkerOutsideSet);
    }
    let n = k.n();
    let law = evolving_set_law(k, state.set)?;
    let q: Vec<f64> = (0..n)
        .map(|y| set_members(state.set).map(|x| k.entry(x as usize, y)).sum())
        .collect();
    let x = state.walker as usize;
    let mut joint: Vec<(DFState, f64)> = Vec::new();
    let mut total = 0.0;
    for &(mask, p) in &law.outcomes {
        if mask == 0 {
            continue;
        }
        for y in set_members(mask) {
            let py = k.entry(x, y as usize);
            if py <= 0.0 {
                continue;
            }
            let w = py * p / q[y as usize];
            joint.push((DFState { walker: y, set: mask }, w));
            total += w;
        }
    }
    let mut u = rng.uniform() * total;
    for &(s, w) in &joint {
        u -= w;
        if u <= 0.0 {
            return Ok(s);
        }
    }
    Ok(joint.last().expect("joint law is nonempty").0)
}

/// One-step escape probability of `S`:
/// `Phi_S = (1/|S|) sum_{x in S, y notin S} P(x, y)`.
pub fn phi(k: &Kernel, set: u64) -> Result<f64> {
    let n = k.n();
    if set == 0 {
        return Err(Error::EmptySet);
    }
    if set == mask_full(n) {
        return Err(Error::FullSet);
    }
    let mut total = 0.0;
    for x in set_members(set) {
        for y in 0..n {
            if set & (1 << y) == 0 {
                total += k.entry(x as usize, y);
            }
        }
    }
    Ok(total / set_size(set) as f64)
}

/// Checks the one-step supermartingale estimate: the exact Doob
/// expectation of `|S'|^{-1/2}` against `exp(-Phi_S^2/6) |S|^{-1/2}`.
/// Returns `(lhs, rhs, pass)`.
pub fn check_supermartingale(k: &Kernel, set: u64) -> Result<(f64, f64, bool)> {
    let phi_s = phi(k, set)?;
    let lhs: f64 = doob_law(k, set)?
        .iter()
        .map(|&(m, p)| p / (set_size(m) as f64).sqrt())
        .sum();
    let rhs = (-phi_s * phi_s / 6.0).exp() / (set_size(set) as f64).sqrt();
    Ok((lhs, rhs, lhs <= rhs + 1e-12))
}

/// Time integral of the open boundary of `S` across the unit interval:
/// `sum_i length_i * |{open edges in piece i with one endpoint in S}|`.
pub fn boundary_integral(g: &FiniteGraph, env: &PiecewiseEnvironment, set: u64) -> f64 {
    let edges = g.edge_list();
    env.lengths
        .iter()
        .zip(&env.open_masks)
        .map(|(len, mask)| {
            let count = edges
                .iter()
                .enumerate()
                .filter(|&(e, &(a, b))| {
                    mask & (1 << e) != 0
                        && (set & (1 << a) != 0) != (set & (1 << b) != 0)
                })
                .count();
            len * count as f64
        })
        .sum()
}
