//! Static and interval-union percolation statistics on regular trees.
//!
//! Exploration randomness is keyed per edge: the uniform deciding an edge
//! is a pure function of `(sample seed, edge identity)`. Runs with the same
//! seed at different parameters therefore share their uniforms, which gives
//! pathwise monotonicity in `p` for free and makes `delta = 0` interval
//! clusters bit-identical to static ones.

use crate::dyn_env::interval_open_probability;
use crate::graphs::{child_lanes, root_lanes, Lanes, Word};
use crate::rng::StreamRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{HashSet, VecDeque};

const EDGE_TAG: u64 = 0x50;
const SAMPLE_TAG: u64 = 0x51;

#[inline]
fn edge_uniform(seed: u64, lanes: Lanes) -> f64 {
    StreamRng::from_parts(seed, &[EDGE_TAG, lanes.0, lanes.1]).uniform()
}

fn sample_seed(seed: u64, index: u64) -> u64 {
    crate::rng::fold_key(seed, &[SAMPLE_TAG, index])
}

/// Radius/size/truncation data for one sampled cluster. On trees the
/// intrinsic (chemical) and extrinsic (graph) radii coincide.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClusterStats {
    pub size: u64,
    pub radius_intrinsic: u32,
    pub radius_extrinsic: u32,
    /// The exploration hit the radius cap; both radii then equal the cap.
    pub truncated: bool,
    /// Exploration counters for the offspring sanity check: non-root
    /// vertices expanded below the cap, and open children found there.
    pub expansions: u64,
    pub open_children: u64,
}

/// Breadth-first exploration of the root's open cluster in `T_d`, each
/// candidate edge open independently with probability `p`, stopped at
/// radius `cap`.
pub fn sample_root_cluster(d: u32, p: f64, cap: u32, seed: u64) -> ClusterStats {
    assert!(d >= 3 && cap >= 1);
    let mut queue: VecDeque<(Lanes, u32)> = VecDeque::from([(root_lanes(), 0)]);
    let mut size = 1u64;
    let mut radius = 0u32;
    let mut expansions = 0u64;
    let mut open_children = 0u64;
    while let Some((lanes, depth)) = queue.pop_front() {
        if depth == cap {
            continue;
        }
        let branching = if depth == 0 { d } else { d - 1 };
        if depth > 0 {
            expansions += 1;
        }
        for letter in 0..branching {
            let child = child_lanes(lanes, letter as u8);
            if edge_uniform(seed, child) < p {
                size += 1;
                if depth > 0 {
                    open_children += 1;
                }
                radius = radius.max(depth + 1);
                queue.push_back((child, depth + 1));
            }
        }
    }
    let truncated = radius == cap;
    ClusterStats {
        size,
        radius_intrinsic: radius,
        radius_extrinsic: radius,
        truncated,
        expansions,
        open_children,
    }
}

/// Static percolation whose open set is "open at least once during a
/// window of length `delta`": a root cluster at the interval-union
/// parameter. `delta = 0` reproduces static percolation exactly (same
/// seed, same output).
pub fn interval_union_cluster(
    d: u32,
    p: f64,
    mu: f64,
    delta: f64,
    cap: u32,
    seed: u64,
) -> ClusterStats {
    sample_root_cluster(d, interval_open_probability(p, mu, delta), cap, seed)
}

/// One row of a survival curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SurvivalPoint {
    pub r: u32,
    pub estimate: f64,
    pub stderr: f64,
    pub n: u64,
}

fn survival_curve_at(d: u32, p: f64, radii: &[u32], n_samples: u64, seed: u64) -> Vec<SurvivalPoint> {
    let cap = *radii.iter().max().expect("nonempty radii");
    let histogram = (0..n_samples)
        .into_par_iter()
        .fold(
            || vec![0u64; cap as usize + 1],
            |mut h, i| {
                let stats = sample_root_cluster(d, p, cap, sample_seed(seed, i));
                h[stats.radius_intrinsic as usize] += 1;
                h
            },
        )
        .reduce(
            || vec![0u64; cap as usize + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    // Survival counts: # samples with radius >= r.
    let mut tail = vec![0u64; cap as usize + 2];
    for r in (0..=cap as usize).rev() {
        tail[r] = tail[r + 1] + histogram[r];
    }
    radii
        .iter()
        .map(|&r| {
            let hits = tail[r as usize];
            let est = hits as f64 / n_samples as f64;
            let se = (est * (1.0 - est) / n_samples as f64).sqrt();
            SurvivalPoint { r, estimate: est, stderr: se, n: n_samples }
        })
        .collect()
}

/// Monte Carlo survival curve of the critical cluster radius on `T_d`
/// (run at `p = p_c = 1/(d-1)`).
pub fn one_arm_curve(d: u32, radii: &[u32], n_samples: u64, seed: u64) -> Vec<SurvivalPoint> {
    let p_c = 1.0 / (d as f64 - 1.0);
    survival_curve_at(d, p_c, radii, n_samples, seed)
}

/// Survival curve of the cluster radius at an arbitrary parameter `p`
/// (subcritical tails, coupled-monotonicity studies).
pub fn radius_tail_curve(
    d: u32,
    p: f64,
    radii: &[u32],
    n_samples: u64,
    seed: u64,
) -> Vec<SurvivalPoint> {
    survival_curve_at(d, p, radii, n_samples, seed)
}

/// Edge predicate over the tree: receives the child-vertex word (as a
/// letter slice) identifying the edge, plus its hash lanes. The same edge
/// must always answer the same.
pub type TreeConfig<'a> = dyn FnMut(&[u8], Lanes) -> bool + 'a;

/// Does the open component of `start` in the tree minus the vertex `avoid`
/// contain a vertex at graph distance `target` from the root?
///
/// Iterative depth-first search with a single path cursor (O(1) moves, no
/// recursion), early exit on the first witness, and the came-from
/// direction skipped at every step, which on a tree visits each vertex at
/// most once. Openness of the edge from `avoid` into `start` is the
/// caller's business.
fn branch_reaches(
    d: u32,
    config: &mut TreeConfig<'_>,
    start: &Word,
    avoid: &Word,
    target: u32,
) -> bool {
    if start.depth() >= target {
        return true;
    }
    let mut letters = start.0.clone();
    let mut lanes: Vec<Lanes> = Vec::with_capacity(letters.len() + 1);
    lanes.push(root_lanes());
    for &c in &letters {
        lanes.push(child_lanes(*lanes.last().unwrap(), c));
    }

    #[derive(Clone, Copy)]
    enum Entered {
        Start,
        Down,
        Up(u8),
    }
    let mut frames: Vec<(u32, Entered)> = vec![(0, Entered::Start)];

    while let Some(&(next_dir, entered)) = frames.last() {
        let depth = letters.len() as u32;
        let has_parent = depth > 0;
        let branching = if depth == 0 { d } else { d - 1 };
        let total_dirs = branching + u32::from(has_parent);

        if next_dir >= total_dirs {
            frames.pop();
            match entered {
                Entered::Start => return false,
                Entered::Down => {
                    letters.pop();
                    lanes.pop();
                }
                Entered::Up(c) => {
                    lanes.push(child_lanes(*lanes.last().unwrap(), c));
                    letters.push(c);
                }
            }
            continue;
        }
        frames.last_mut().unwrap().0 += 1;

        if has_parent && next_dir == 0 {
            if matches!(entered, Entered::Down) {
                continue; // came from the parent
            }
            let parent_is_avoid =
                letters.len() == avoid.0.len() + 1 && letters[..avoid.0.len()] == avoid.0[..];
            if parent_is_avoid {
                continue;
            }
            // The edge to the parent is identified by the current word.
            if config(&letters, *lanes.last().unwrap()) {
                let c = letters.pop().unwrap();
                lanes.pop();
                frames.push((0, Entered::Up(c)));
            }
            continue;
        }

        let letter = (next_dir - u32::from(has_parent)) as u8;
        if matches!(entered, Entered::Up(c) if c == letter) {
            continue; // came from that child
        }
        let child_is_avoid = letters.len() + 1 == avoid.0.len()
            && letters[..] == avoid.0[..letters.len()]
            && avoid.0[letters.len()] == letter;
        if child_is_avoid {
            continue;
        }
        let child = child_lanes(*lanes.last().unwrap(), letter);
        letters.push(letter);
        if !config(&letters, child) {
            letters.pop();
            continue;
        }
        lanes.push(child);
        if letters.len() as u32 >= target {
            return true;
        }
        frames.push((0, Entered::Down));
    }
    false
}

/// Is `x` an R-trifurcation under `config`: do at least three of its
/// incident open edges lead to disjoint open components reaching graph
/// distance `r` from the root?
pub fn is_r_trifurcation(d: u32, config: &mut TreeConfig<'_>, x: &Word, r: u32) -> bool {
    let mut branches = 0u32;
    if let Some(parent) = x.parent() {
        if config(&x.0, x.lanes()) && branch_reaches(d, config, &parent, x, r) {
            branches += 1;
        }
    }
    let letters = if x.is_root() { d } else { d - 1 };
    for letter in 0..letters {
        let c = x.child(letter as u8);
        if config(&c.0, c.lanes()) && branch_reaches(d, config, &c, x, r) {
            branches += 1;
            if branches >= 3 {
                return true;
            }
        }
    }
    branches >= 3
}

/// Monte Carlo estimate of P(root is an R-trifurcation) under Bernoulli-p
/// percolation on `T_d`. Returns (estimate, stderr).
pub fn trifurcation_probe(d: u32, p: f64, r: u32, n_samples: u64, seed: u64) -> (f64, f64) {
    let hits: u64 = (0..n_samples)
        .into_par_iter()
        .filter(|&i| {
            let s = sample_seed(seed, i);
            let mut config = move |_: &[u8], lanes: Lanes| edge_uniform(s, lanes) < p;
            is_r_trifurcation(3.max(d), &mut config, &Word::root(), r)
        })
        .count() as u64;
    let est = hits as f64 / n_samples as f64;
    let se = (est * (1.0 - est) / n_samples as f64).sqrt();
    (est, se)
}

/// Result of one Burton–Keane inequality check.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BurtonKeaneCheck {
    pub open_boundary: u64,
    pub trifurcations: u64,
    /// Vacuously true when no trifurcation lies in S.
    pub pass: bool,
}

/// Verifies `|boundary_config(S)| >= #(R-trifurcations in S) + 2` whenever
/// S contains at least one R-trifurcation ("infinite" approximated by
/// "reaches graph distance `r` from the root").
pub fn burton_keane_check(
    d: u32,
    config: &mut TreeConfig<'_>,
    s_vertices: &[Word],
    r: u32,
) -> BurtonKeaneCheck {
    let in_s: HashSet<&[u8]> = s_vertices.iter().map(|w| w.0.as_slice()).collect();
    let mut open_boundary = 0u64;
    for v in s_vertices {
        if let Some(parent) = v.parent() {
            if !in_s.contains(parent.0.as_slice()) && config(&v.0, v.lanes()) {
                open_boundary += 1;
            }
        }
        let letters = if v.is_root() { d } else { d - 1 };
        for letter in 0..letters {
            let c = v.child(letter as u8);
            if !in_s.contains(c.0.as_slice()) && config(&c.0, c.lanes()) {
                open_boundary += 1;
            }
        }
    }
    let trifurcations = s_vertices
        .iter()
        .filter(|v| is_r_trifurcation(d, config, v, r))
        .count() as u64;
    let pass = trifurcations == 0 || open_boundary >= trifurcations + 2;
    BurtonKeaneCheck { open_boundary, trifurcations, pass }
}

/// A lazily sampled Bernoulli-p configuration usable as a [`TreeConfig`].
pub fn bernoulli_config(p: f64, config_seed: u64) -> impl FnMut(&[u8], Lanes) -> bool {
    move |_, lanes| edge_uniform(config_seed, lanes) < p
}

/// Per-sample configuration seed, exposed so sweeps can couple checks.
pub fn config_seed(seed: u64, index: u64) -> u64 {
    sample_seed(seed, index)
}

/// All vertices of the ball of radius `r` in `T_d`, as words.
pub fn ball_words(d: u32, r: u32) -> Vec<Word> {
    let mut out = vec![Word::root()];
    let mut frontier = vec![Word::root()];
    for depth in 0..r {
        let mut next = Vec::new();
        for w in &frontier {
            let letters = if depth == 0 { d } else { d - 1 };
            for letter in 0..letters {
                let c = w.child(letter as u8);
                out.push(c.clone());
                next.push(c);
            }
        }
        frontier = next;
    }
    out
}

/// Pooled mean offspring per explored (non-root) vertex across sampled
/// clusters, with its standard error; equals `p (d-1)` in law. Pooling
/// matters: per-cluster ratios are size-biased (small clusters stopped
/// because their vertices drew few children).
pub fn offspring_mean(d: u32, stats: &[ClusterStats]) -> (f64, f64) {
    let expansions: u64 = stats.iter().map(|s| s.expansions).sum();
    let opened: u64 = stats.iter().map(|s| s.open_children).sum();
    let trials = expansions * (d as u64 - 1);
    let phat = opened as f64 / trials as f64;
    let se = (phat * (1.0 - phat) / trials as f64).sqrt();
    ((d - 1) as f64 * phat, (d - 1) as f64 * se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::ks_two_sample;

    #[test]
    fn degenerate_parameters() {
        let s = sample_root_cluster(3, 0.0, 10, 1);
        assert_eq!((s.size, s.radius_intrinsic, s.truncated), (1, 0, false));
        let s = sample_root_cluster(3, 1.0, 8, 1);
        assert!(s.truncated);
        assert_eq!(s.radius_intrinsic, 8);
        assert_eq!(s.radius_extrinsic, 8);
        assert_eq!(s.size, 1 + 3 * (2u64.pow(8) - 1)); // full ball
    }

    #[test]
    fn radii_agree_on_trees() {
        for i in 0..200 {
            let s = sample_root_cluster(3, 0.55, 30, 7_000 + i);
            assert_eq!(s.radius_intrinsic, s.radius_extrinsic);
            if s.truncated {
                assert_eq!(s.radius_intrinsic, 30);
            }
        }
    }

    #[test]
    fn interval_union_delta_zero_is_static_bitwise() {
        for i in 0..300 {
            let a = sample_root_cluster(3, 0.4, 50, 12_345 + i);
            let b = interval_union_cluster(3, 0.4, 0.7, 0.0, 50, 12_345 + i);
            assert_eq!(a.size, b.size);
            assert_eq!(a.radius_intrinsic, b.radius_intrinsic);
            assert_eq!(a.truncated, b.truncated);
        }
    }

    #[test]
    fn interval_union_delta_zero_same_law_ks() {
        // Different seeds, distributional match at the 1% level.
        let n = 10_000u64;
        let mut a: Vec<u64> =
            (0..n).map(|i| sample_root_cluster(3, 0.45, 60, 50_000 + i).size).collect();
        let mut b: Vec<u64> =
            (0..n).map(|i| interval_union_cluster(3, 0.45, 1.3, 0.0, 60, 90_000 + i).size).collect();
        let dist = ks_two_sample(&mut a, &mut b);
        let crit = 1.628 * ((n + n) as f64 / (n * n) as f64).sqrt();
        assert!(dist < crit, "ks={dist} crit={crit}");
    }

    #[test]
    fn coupled_monotonicity_in_p() {
        // Shared uniforms: the subcritical radius never exceeds the
        // critical one, sample by sample.
        for i in 0..2_000 {
            let seed = sample_seed(4242, i);
            let low = sample_root_cluster(3, 0.35, 64, seed);
            let crit = sample_root_cluster(3, 0.5, 64, seed);
            assert!(low.radius_intrinsic <= crit.radius_intrinsic);
            assert!(low.size <= crit.size);
        }
    }

    #[test]
    fn survival_curve_monotone_and_starts_at_one() {
        let radii = [0, 1, 2, 4, 8, 16];
        let curve = one_arm_curve(3, &radii, 20_000, 31);
        assert_eq!(curve[0].estimate, 1.0);
        for w in curve.windows(2) {
            assert!(w[1].estimate <= w[0].estimate);
        }
    }

    #[test]
    fn offspring_mean_matches_p_times_b() {
        let p = 0.4;
        let stats: Vec<ClusterStats> =
            (0..30_000).map(|i| sample_root_cluster(3, p, 100, 77_000 + i)).collect();
        let (mean, se) = offspring_mean(3, &stats);
        let expect = p * 2.0;
        assert!((mean - expect).abs() < 3.0 * se, "mean={mean} se={se}");
    }

    #[test]
    fn all_open_trifurcations() {
        let mut config = |_: &[u8], _: Lanes| true;
        assert!(is_r_trifurcation(3, &mut config, &Word::root(), 40));
        // Interior vertex: the parent branch must climb around the root.
        let x = Word(vec![0, 1]);
        let mut config = |_: &[u8], _: Lanes| true;
        assert!(is_r_trifurcation(3, &mut config, &x, 40));
    }

    #[test]
    fn all_closed_no_trifurcation() {
        let mut config = |_: &[u8], _: Lanes| false;
        assert!(!is_r_trifurcation(3, &mut config, &Word::root(), 5));
    }

    #[test]
    fn parent_branch_explores_around_root() {
        // Component of the root avoiding x="0" must climb over the root
        // and descend "1" -> "10" -> "100" to reach depth 3, no further.
        let open: HashSet<Vec<u8>> =
            [vec![0], vec![1], vec![1, 0], vec![1, 0, 0]].into_iter().collect();
        let x = Word(vec![0]);
        let mut cfg = |w: &[u8], _: Lanes| open.contains(w);
        assert!(branch_reaches(3, &mut cfg, &Word::root(), &x, 3));
        let mut cfg = |w: &[u8], _: Lanes| open.contains(w);
        assert!(!branch_reaches(3, &mut cfg, &Word::root(), &x, 4));
    }

    #[test]
    fn branch_does_not_cross_avoid() {
        // Everything open: the component of "00" avoiding "0" is just the
        // subtree below "00"; reaching upward through "0" is forbidden.
        let mut cfg = |_: &[u8], _: Lanes| true;
        assert!(branch_reaches(3, &mut cfg, &Word(vec![0, 0]), &Word(vec![0]), 10));
        // Open only above x: the child branch of x="0" cannot reach.
        let mut cfg = |w: &[u8], _: Lanes| w.len() <= 1;
        assert!(!branch_reaches(3, &mut cfg, &Word(vec![0, 0]), &Word(vec![0]), 3));
    }

    #[test]
    fn trifurcation_probe_extremes_and_monotonicity() {
        let (est, _) = trifurcation_probe(3, 1.0, 16, 2_000, 5);
        assert_eq!(est, 1.0);
        // Coupled seeds: the indicator is monotone decreasing in R.
        for i in 0..500 {
            let s = config_seed(99, i);
            let hit = |r: u32| {
                let mut config = bernoulli_config(0.75, s);
                is_r_trifurcation(3, &mut config, &Word::root(), r)
            };
            if hit(32) {
                assert!(hit(16), "reach decreasing in R");
            }
        }
    }

    #[test]
    fn burton_keane_vacuous_without_trifurcations() {
        let mut config = |_: &[u8], _: Lanes| false;
        let s = ball_words(3, 2);
        let out = burton_keane_check(3, &mut config, &s, 8);
        assert_eq!(out.trifurcations, 0);
        assert!(out.pass);
    }

    #[test]
    fn burton_keane_hand_built_three_trifurcations() {
        // Three marked trifurcation points: root, "0", "1". All edges of
        // the radius-2 ball are open, plus the all-zero ray below every
        // depth-2 vertex, so each marked point carries three
        // boundary-reaching branches.
        let mut config = |w: &[u8], _: Lanes| {
            if w.len() <= 2 {
                true
            } else {
                w[2..].iter().all(|&c| c == 0)
            }
        };
        let s = vec![Word::root(), Word(vec![0]), Word(vec![1])];
        let out = burton_keane_check(3, &mut config, &s, 12);
        assert_eq!(out.trifurcations, 3);
        assert!(out.open_boundary >= 5, "boundary={}", out.open_boundary);
        assert!(out.pass);
    }

    #[test]
    fn burton_keane_random_supercritical_sweep() {
        let s = ball_words(3, 4);
        let fails = (0..1_000u64)
            .filter(|&i| {
                let mut config = bernoulli_config(0.75, config_seed(777, i));
                !burton_keane_check(3, &mut config, &s, 32).pass
            })
            .count();
        assert_eq!(fails, 0);
    }
}
