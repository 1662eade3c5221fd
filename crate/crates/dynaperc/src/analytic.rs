//! Closed-form and fixed-point oracles: tree survival probabilities, the
//! Galton–Watson walk speed, the explicit lower/upper bound formulas, and
//! the birth–death process that dominates the memory set.

use crate::error::{Error, Result};
use crate::rng::StreamRng;
use serde::{Deserialize, Serialize};

/// Parameters of percolation on the regular tree `T_d`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TreeParams {
    pub d: u32,
    pub p: f64,
}

impl TreeParams {
    pub fn new(d: u32, p: f64) -> Result<Self> {
        if d < 3 {
            return Err(Error::InvalidParameter("degree must be >= 3".into()));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParameter("p must be in (0,1]".into()));
        }
        Ok(TreeParams { d, p })
    }

    /// Offspring trials of the associated b-ary tree.
    pub fn b(&self) -> u32 {
        self.d - 1
    }

    pub fn p_c(&self) -> f64 {
        1.0 / self.b() as f64
    }
}

/// Cheeger constant of the infinite regular tree: (d-2)/d.
pub fn tree_cheeger(d: u32) -> f64 {
    (d as f64 - 2.0) / d as f64
}

/// Survival probability of Bernoulli-p percolation on the b-ary tree: the
/// largest root of `(1 - p*theta)^b = 1 - theta` in [0, 1].
///
/// Solved by bisection on the extinction probability `q = 1 - theta`
/// (smallest fixed point of the Binomial(b, p) offspring pgf); bisection
/// keeps its bracket even at criticality where the derivative degenerates.
/// Returns 0 for p <= 1/b.
pub fn survival_probability(b: u32, p: f64) -> f64 {
    assert!(b >= 2, "need b >= 2");
    assert!((0.0..=1.0).contains(&p));
    if p * b as f64 <= 1.0 {
        return 0.0;
    }
    if p == 1.0 {
        return 1.0;
    }
    let g = |q: f64| (1.0 - p + p * q).powi(b as i32) - q;
    // g(0) > 0, g(1) = 0 with g'(1) = bp - 1 > 0, and g is convex, so the
    // unique root in (0,1) is bracketed by [0, hi] for any hi above it
    // where g is clearly negative. Near q = 1 the evaluation drowns in
    // rounding (g(1-eps) ~ -(bp-1) eps), so scan geometrically for the
    // closest bracket with an unambiguous sign.
    let mut hi = f64::NAN;
    for k in (1..=40).rev() {
        let cand = 1.0 - 0.5f64.powi(k);
        if g(cand) < -1e-13 {
            hi = cand;
            break;
        }
    }
    if hi.is_nan() {
        return 0.0; // numerically indistinguishable from critical
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    1.0 - 0.5 * (lo + hi)
}

/// Density of the root's infinite cluster on `T_d`:
/// `theta_p = 1 - (1 - p*theta~)^d`.
pub fn root_cluster_density(d: u32, p: f64) -> f64 {
    assert!(d >= 3);
    let theta = survival_probability(d - 1, p);
    1.0 - (1.0 - p * theta).powi(d as i32)
}

fn binomial_coefficient(n: u32, k: u32) -> f64 {
    let mut c = 1.0f64;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// Speed of simple random walk on the Galton–Watson tree with
/// Binomial(b, p) offspring, on the event of nonextinction:
/// `sum_k ((k-1)/(k+1)) p_k (1 - q^{k+1}) / (1 - q^2)` with `q = 1 - theta~`.
///
/// Returns `(speed, supercritical)`; subcritical input yields `(0, false)`.
pub fn gw_speed(b: u32, p: f64) -> (f64, bool) {
    assert!(b >= 2);
    if p * b as f64 <= 1.0 {
        return (0.0, false);
    }
    let q = 1.0 - survival_probability(b, p);
    let denom = 1.0 - q * q;
    let mut v = 0.0;
    for k in 0..=b {
        let pk = binomial_coefficient(b, k) * p.powi(k as i32) * (1.0 - p).powi((b - k) as i32);
        let weight = (k as f64 - 1.0) / (k as f64 + 1.0);
        v += weight * pk * (1.0 - q.powi(k as i32 + 1)) / denom;
    }
    (v, true)
}

/// Speed of simple random walk on `T_d`: (d-2)/d.
pub fn srw_tree_speed(d: u32) -> f64 {
    assert!(d >= 3);
    (d as f64 - 2.0) / d as f64
}

/// Exact `P(Radi(C_o) >= r)` for critical percolation on `T_d`, from the
/// depth-r survival recursion of the b-ary tree:
/// `u_0 = 1`, `u_r = 1 - (1 - p_c u_{r-1})^b`, and the root sees
/// `1 - (1 - p_c u_{r-1})^d`. An exact finite-size oracle for the
/// simulated one-arm curve (the `C/r` law is only asymptotic).
pub fn critical_one_arm_exact(d: u32, radii: &[u32]) -> Vec<f64> {
    assert!(d >= 3);
    let b = (d - 1) as i32;
    let p_c = 1.0 / b as f64;
    let max_r = radii.iter().copied().max().unwrap_or(0);
    let mut root = vec![1.0f64; max_r as usize + 1];
    let mut u = 1.0f64;
    for r in 1..=max_r as usize {
        root[r] = 1.0 - (1.0 - p_c * u).powi(d as i32);
        u = 1.0 - (1.0 - p_c * u).powi(b);
    }
    radii.iter().map(|&r| root[r as usize]).collect()
}

/// The explicit bound formulas, evaluated exactly as printed.
///
/// These constants are far from sharp; they serve as one-sided consistency
/// audits against measured speeds, never as two-sided targets.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundSet {
    /// Upper slope for `v/mu` in the subcritical phase, instantiated on the
    /// tree via the first-moment radius tail (absent for p >= p_c).
    pub subcritical_upper_slope: Option<f64>,
    /// `c^3 p^3 Phi^2 / (48 e^2 log d)` with `c = int_0^1 (1-e^{-t/2}) dt`.
    pub large_mu_lower: f64,
    /// `mu * beta^3 Phi^2 / (12 e^2 d^2 log d)`.
    pub small_mu_lower: f64,
    /// Max of the two corollary values: the `c (mu ^ 1)` lower bound.
    pub general_lower: f64,
    /// `p^3 (p theta~)^9 / (48 e^2 d^3 log d)`; zero when p <= p_c.
    pub tree_lower: f64,
    /// `sqrt(mu log(1/mu))`, defined for mu <= 1/e.
    pub critical_envelope: Option<f64>,
    /// `beta = (p/2)(1 - e^{-1/2}) e^{-(1-p)/2}`.
    pub beta: f64,
    pub c_integral: f64,
}

/// Evaluates every named bound at `(d, p, mu)` with Cheeger constant `phi`.
pub fn paper_bounds(d: u32, p: f64, mu: f64, phi: f64) -> BoundSet {
    let e2 = std::f64::consts::E * std::f64::consts::E;
    let log_d = (d as f64).ln();
    let c_integral = 1.0 - 2.0 * (1.0 - (-0.5f64).exp());
    let beta = 0.5 * p * (1.0 - (-0.5f64).exp()) * (-(1.0 - p) / 2.0).exp();

    let large_mu_lower = c_integral.powi(3) * p.powi(3) * phi * phi / (48.0 * e2 * log_d);
    let small_mu_lower = mu * beta.powi(3) * phi * phi / (12.0 * e2 * (d * d) as f64 * log_d);
    let general_lower = large_mu_lower.max(small_mu_lower);

    let theta = survival_probability(d - 1, p);
    let tree_lower = p.powi(3) * (p * theta).powi(9) / (48.0 * e2 * (d as f64).powi(3) * log_d);

    let critical_envelope = if mu <= (-1.0f64).exp() {
        Some((mu * (1.0 / mu).ln()).sqrt())
    } else {
        None
    };

    let p_c = 1.0 / (d as f64 - 1.0);
    let subcritical_upper_slope = (p < p_c).then(|| {
        // Window length beta_w/mu chosen so the union-open parameter sits
        // halfway to p_c; radius tail bounded by the expected number of
        // open self-avoiding paths.
        let p_target = p + 0.5 * (p_c - p);
        let beta_w = ((1.0 - p) / (1.0 - p_target)).ln() / p;
        let b = (d - 1) as f64;
        let mut expected_radius = 0.0;
        let mut term = d as f64 * p_target; // E[# open paths to level 1]
        for _ in 1..10_000 {
            expected_radius += term.min(1.0);
            term *= b * p_target;
            if term < 1e-15 {
                break;
            }
        }
        2.0 * expected_radius / beta_w
    });

    BoundSet {
        subcritical_upper_slope,
        large_mu_lower,
        small_mu_lower,
        general_lower,
        tree_lower,
        critical_envelope,
        beta,
        c_integral,
    }
}

/// Outcome of a birth–death simulation (birth rate 1, death rate mu*n).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BirthDeathStats {
    /// Empirical mean of the gaps between returns to the empty state.
    pub mean_return: f64,
    pub n_cycles: u64,
    /// Time-weighted occupancy distribution (index = population).
    pub occupancy: Vec<f64>,
    pub occupancy_mean: f64,
    /// Closed forms: `e^{1/mu}` and the Poisson(1/mu) mean.
    pub expected_return: f64,
    pub expected_occupancy_mean: f64,
    /// Set when fewer than 10 cycles completed within the horizon.
    pub horizon_too_short: bool,
}

/// Simulates the birth–death chain dominating the memory set and reports
/// return-time and occupancy statistics next to their closed forms.
pub fn birth_death_stats(mu: f64, horizon: f64, rng: &mut StreamRng) -> BirthDeathStats {
    assert!(mu > 0.0 && horizon > 0.0);
    let mut t = 0.0f64;
    let mut n = 0u64;
    let mut occupancy = vec![0.0f64; 16];
    let mut gaps = Vec::new();
    let mut last_reset = 0.0f64;
    let mut weighted_sum = 0.0f64;
    loop {
        let total_rate = 1.0 + mu * n as f64;
        let hold = rng.exp(total_rate);
        let until = (t + hold).min(horizon);
        if n as usize >= occupancy.len() {
            occupancy.resize(n as usize + 1, 0.0);
        }
        occupancy[n as usize] += until - t;
        weighted_sum += (until - t) * n as f64;
        t += hold;
        if t > horizon {
            break;
        }
        if rng.bernoulli(1.0 / total_rate) {
            n += 1;
        } else {
            n -= 1;
            if n == 0 {
                gaps.push(t - last_reset);
                last_reset = t;
            }
        }
    }
    for w in &mut occupancy {
        *w /= horizon;
    }
    let n_cycles = gaps.len() as u64;
    let mean_return = if gaps.is_empty() {
        f64::NAN
    } else {
        gaps.iter().sum::<f64>() / gaps.len() as f64
    };
    BirthDeathStats {
        mean_return,
        n_cycles,
        occupancy,
        occupancy_mean: weighted_sum / horizon,
        expected_return: (1.0 / mu).exp(),
        expected_occupancy_mean: 1.0 / mu,
        horizon_too_short: n_cycles < 10,
    }
}

/// Monte Carlo speed of simple random walk on lazily generated GW trees
/// conditioned to reach `condition_depth`, as an oracle for [`gw_speed`].
///
/// Offspring counts are drawn on demand from per-vertex streams, so the
/// walk can roam far beyond any materialized ball. Returns (mean, stderr).
pub fn gw_walk_speed_mc(
    b: u32,
    p: f64,
    condition_depth: u32,
    steps: u64,
    n_walks: u64,
    seed: u64,
) -> (f64, f64) {
    use crate::graphs::{child_lanes, root_lanes, Lanes};
    use std::collections::HashMap;

    struct LazyGw {
        b: u32,
        p: f64,
        tree_seed: u64,
        counts: HashMap<u128, u8>,
    }

    impl LazyGw {
        fn offspring(&mut self, lanes: Lanes) -> u8 {
            let key = ((lanes.0 as u128) << 64) | lanes.1 as u128;
            let (b, p, seed) = (self.b, self.p, self.tree_seed);
            *self.counts.entry(key).or_insert_with(|| {
                let mut r = StreamRng::from_parts(seed, &[0x47, lanes.0, lanes.1]);
                r.binomial(b, p) as u8
            })
        }

        /// Depth-first check that the subtree rooted at `lanes` (at `depth`)
        /// reaches `target` depth; early exit on the first witness.
        fn reaches(&mut self, lanes: Lanes, depth: u32, target: u32) -> bool {
            let mut stack = vec![(lanes, depth)];
            while let Some((l, dep)) = stack.pop() {
                if dep >= target {
                    return true;
                }
                let k = self.offspring(l);
                for c in 0..k {
                    stack.push((child_lanes(l, c), dep + 1));
                }
            }
            false
        }
    }

    let mut speeds = Vec::with_capacity(n_walks as usize);
    let mut tree_index = 0u64;
    for walk in 0..n_walks {
        // Resample trees until one survives to the conditioning depth.
        let mut gw = loop {
            let mut gw = LazyGw {
                b,
                p,
                tree_seed: crate::rng::fold_key(seed, &[0x11, tree_index]),
                counts: HashMap::new(),
            };
            tree_index += 1;
            if gw.reaches(root_lanes(), 0, condition_depth) {
                break gw;
            }
        };
        let mut rng = StreamRng::from_parts(seed, &[0x22, walk]);
        let mut path: Vec<(Lanes, u8)> = Vec::new(); // (lanes, letter taken)
        let mut lanes = root_lanes();
        for _ in 0..steps {
            let k = gw.offspring(lanes) as u64;
            let deg = k + u64::from(!path.is_empty());
            if deg == 0 {
                continue; // isolated root, nothing to do
            }
            let dir = rng.below(deg);
            if !path.is_empty() && dir == k {
                lanes = path.pop().unwrap().0;
            } else {
                path.push((lanes, dir as u8));
                lanes = child_lanes(lanes, dir as u8);
            }
        }
        speeds.push(path.len() as f64 / steps as f64);
    }
    crate::stats::mean_stderr(&speeds)
}
