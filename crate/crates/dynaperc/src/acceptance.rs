//! The acceptance suite: every exit criterion as a callable check with a
//! frozen tolerance, runnable from the CLI (`dynaperc acceptance`) or the
//! `acceptance` integration test target.

use crate::analytic;
use crate::dyn_env::EnvConfig;
use crate::dyn_env::InitPolicy;
use crate::error::Result;
use crate::evolving_set::{
    check_supermartingale, df_step, evolving_set_law, set_size, step_kernel, DFState,
    PiecewiseEnvironment,
};
use crate::experiments::{
    run, Assertions, ExperimentConfig, ExperimentKind, HorizonPolicy,
};
use crate::graphs::{FiniteGraph, GraphSpec};
use crate::rng::StreamRng;
use crate::walker::estimate_speed;
use std::collections::HashMap;
use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[acceptance] C{:02} {:<34} {} ({})",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

fn result(id: u32, name: &'static str, pass: bool, detail: String) -> CriterionResult {
    CriterionResult { id, name, pass, detail }
}

/// C1: exact analytic oracles and near-critical expansion ratios.
pub fn criterion_1() -> CriterionResult {
    let mut pass = true;
    let mut detail = String::new();

    for p in [0.6, 0.75, 0.9] {
        let got = analytic::survival_probability(2, p);
        let expect = (2.0 * p - 1.0) / (p * p);
        pass &= (got - expect).abs() < 1e-10;
    }
    let density = analytic::root_cluster_density(3, 0.75);
    pass &= (density - 26.0 / 27.0).abs() < 1e-10;
    for b in [2u32, 3, 4] {
        let (v, _) = analytic::gw_speed(b, 1.0);
        pass &= (v - (b as f64 - 1.0) / (b as f64 + 1.0)).abs() < 1e-10;
    }
    let mut worst_ratio_err = 0.0f64;
    for b in [2u32, 3] {
        let pc = 1.0 / b as f64;
        let p = pc + 1e-3;
        let theta = analytic::survival_probability(b, p);
        let slope_limit = 2.0 * (b * b) as f64 / (b as f64 - 1.0);
        let r1 = theta / (slope_limit * 1e-3);
        let (v, _) = analytic::gw_speed(b, p);
        let taylor_limit = (b * (b - 1)) as f64 * pc * pc / 12.0;
        let r2 = v / (theta * theta) / taylor_limit;
        worst_ratio_err = worst_ratio_err.max((r1 - 1.0).abs()).max((r2 - 1.0).abs());
    }
    pass &= worst_ratio_err < 0.05;
    let _ = write!(detail, "max near-critical ratio error {worst_ratio_err:.4}");
    result(1, "analytic oracles", pass, detail)
}

/// C2: birth-death return times and occupancy vs closed forms.
pub fn criterion_2() -> CriterionResult {
    let mut pass = true;
    let mut detail = String::new();
    for mu in [0.5f64, 1.0, 2.0] {
        let expected = (1.0 / mu).exp();
        let horizon = 1.25e4 * expected;
        let mut rng = StreamRng::from_parts(0xbd, &[mu.to_bits()]);
        let stats = analytic::birth_death_stats(mu, horizon, &mut rng);
        let ok = stats.n_cycles >= 10_000
            && !stats.horizon_too_short
            && (stats.mean_return - expected).abs() / expected < 0.05
            && (stats.occupancy_mean - 1.0 / mu).abs() * mu < 0.05;
        pass &= ok;
        let _ = write!(
            detail,
            "mu={mu}: mean={:.3}/{expected:.3} occ={:.3}/{:.3}; ",
            stats.mean_return,
            stats.occupancy_mean,
            1.0 / mu
        );
    }
    result(2, "birth-death oracle", pass, detail)
}

/// C3: reset-time bound and memory-set domination on T_3.
pub fn criterion_3() -> CriterionResult {
    let mut cfg = ExperimentConfig::new(ExperimentKind::ResetTimes, 0x5273);
    cfg.p_grid = vec![0.5];
    cfg.mu_grid = vec![1.0];
    cfg.horizon = HorizonPolicy::Fixed { value: 4_000.0 };
    cfg.n_runs = 8;
    match run(&cfg) {
        Ok(m) => {
            let pass = m.all_checks_pass();
            let mean = m.summary.get("mean_reset_gap").copied().unwrap_or(f64::NAN);
            let n = m.summary.get("n_resets").copied().unwrap_or(0.0);
            result(
                3,
                "reset times on T_3",
                pass,
                format!("mean gap {mean:.4} vs e*1.05={:.4}, {n} resets", std::f64::consts::E * 1.05),
            )
        }
        Err(e) => result(3, "reset times on T_3", false, format!("error: {e}")),
    }
}

/// C4: exact evolving-set suite (closed forms, martingale, supermartingale
/// sweep, boundary-integral bound, Diaconis-Fill conditional uniformity).
pub fn criterion_4() -> CriterionResult {
    match criterion_4_inner() {
        Ok((pass, detail)) => result(4, "evolving-set exact suite", pass, detail),
        Err(e) => result(4, "evolving-set exact suite", false, format!("error: {e}")),
    }
}

fn criterion_4_inner() -> Result<(bool, String)> {
    let mut pass = true;
    let mut detail = String::new();

    // K_2 closed-form law to 1e-9.
    let k2 = FiniteGraph::new(vec![vec![1], vec![0]])?;
    let kernel = step_kernel(&k2, &PiecewiseEnvironment::all_open(1))?;
    let law = evolving_set_law(&kernel, 0b01)?;
    let p_xy = (1.0 - (-2.0f64).exp()) / 2.0;
    let e_m2 = (-2.0f64).exp();
    for (mask, expect) in [(0b11u64, p_xy), (0b01, e_m2), (0b00, p_xy)] {
        let got = law
            .outcomes
            .iter()
            .find(|&&(m, _)| m == mask)
            .map(|&(_, p)| p)
            .unwrap_or(0.0);
        pass &= (got - expect).abs() < 1e-9;
    }

    // 500 random piecewise environments x all nonempty proper sets on
    // K_2, the 4-cycle, and K_4: martingale identity, the one-step
    // supermartingale estimate, and the boundary-integral lower bound.
    let graphs = [
        FiniteGraph::new(vec![vec![1], vec![0]])?,
        FiniteGraph::cycle(4),
        FiniteGraph::complete(4),
    ];
    let e = std::f64::consts::E;
    let mut checks = 0u64;
    for graph in &graphs {
        let n_edges = graph.edge_list().len();
        let d = (0..graph.len() as u32).map(|v| graph.weight_degree(v)).max().unwrap() as f64;
        let mut rng = StreamRng::from_parts(0xe5, &[graph.len() as u64]);
        for _ in 0..500 {
            let env = PiecewiseEnvironment::random(n_edges, 0.5, &mut rng);
            let kernel = step_kernel(graph, &env)?;
            let full = (1u64 << graph.len()) - 1;
            for set in 1..full {
                let law = evolving_set_law(&kernel, set)?;
                pass &= (law.expected_size() - set_size(set) as f64).abs() < 1e-12;
                let (_, _, ok) = check_supermartingale(&kernel, set)?;
                pass &= ok;
                let lower = crate::evolving_set::boundary_integral(graph, &env, set)
                    / (d * e * set_size(set) as f64);
                pass &= crate::evolving_set::phi(&kernel, set)? >= lower - 1e-12;
                checks += 1;
            }
        }
    }
    let _ = write!(detail, "{checks} sweep checks; ");

    // Diaconis-Fill conditional uniformity over 1e5 coupled paths, n <= 5,
    // on K_2 and the 4-cycle, with a fixed environment sequence.
    let mut worst_z = 0.0f64;
    for (gi, graph) in [FiniteGraph::new(vec![vec![1], vec![0]])?, FiniteGraph::cycle(4)]
        .iter()
        .enumerate()
    {
        let n_edges = graph.edge_list().len();
        let mut env_rng = StreamRng::from_parts(0xdf, &[gi as u64]);
        let kernels: Vec<_> = (0..5)
            .map(|_| step_kernel(graph, &PiecewiseEnvironment::random(n_edges, 0.6, &mut env_rng)))
            .collect::<Result<_>>()?;
        // counts: set-path prefix -> (visits, per-vertex endpoint counts)
        let mut buckets: HashMap<Vec<u64>, (u64, Vec<u64>)> = HashMap::new();
        let n_paths = 100_000u64;
        for i in 0..n_paths {
            let mut rng = StreamRng::from_parts(0xdf51, &[gi as u64, i]);
            let mut state = DFState::start(0);
            let mut prefix = vec![state.set];
            for kernel in &kernels {
                state = df_step(kernel, state, &mut rng)?;
                prefix.push(state.set);
                let entry = buckets
                    .entry(prefix.clone())
                    .or_insert_with(|| (0, vec![0; graph.len()]));
                entry.0 += 1;
                entry.1[state.walker as usize] += 1;
            }
        }
        for (prefix, (visits, counts)) in &buckets {
            if *visits < 1_000 {
                continue;
            }
            let set = *prefix.last().unwrap();
            let u = 1.0 / set_size(set) as f64;
            let sigma = (u * (1.0 - u) / *visits as f64).sqrt();
            for y in 0..graph.len() {
                if set & (1 << y) == 0 {
                    continue;
                }
                let phat = counts[y] as f64 / *visits as f64;
                if sigma == 0.0 {
                    // Singleton set: the walker must sit on it exactly.
                    pass &= phat == 1.0;
                    continue;
                }
                let z = (phat - u).abs() / sigma;
                worst_z = worst_z.max(z);
                pass &= z <= 3.0;
            }
        }
    }
    let _ = write!(detail, "DF uniformity worst z={worst_z:.2}");
    Ok((pass, detail))
}

/// C5: fast-refresh limit matches the p-thinned simple random walk.
pub fn criterion_5() -> CriterionResult {
    let g = GraphSpec::regular_tree(3).expect("degree 3");
    let cfg = EnvConfig::new(0.7, 256.0, 0x0516);
    match estimate_speed(&g, &cfg, 1_000.0, 200) {
        Ok(est) => {
            let target = 0.7 / 3.0;
            let pass = (est.mean - target).abs() < 0.1 * target;
            result(
                5,
                "fast-refresh anchor",
                pass,
                format!("speed {:.4} +- {:.4} vs p(d-2)/d = {target:.4}", est.mean, est.stderr),
            )
        }
        Err(e) => result(5, "fast-refresh anchor", false, format!("error: {e}")),
    }
}

fn sweep_criterion(
    id: u32,
    name: &'static str,
    cfg: &ExperimentConfig,
    extra: impl FnOnce(&crate::experiments::RunManifest) -> String,
) -> CriterionResult {
    match run(cfg) {
        Ok(m) => {
            let pass = m.all_checks_pass();
            let mut detail = extra(&m);
            for c in m.checks.iter().filter(|c| !c.pass) {
                let _ = write!(detail, "; FAILED {}: {}", c.name, c.detail);
            }
            result(id, name, pass, detail)
        }
        Err(e) => result(id, name, false, format!("error: {e}")),
    }
}

/// C6: subcritical speed scales linearly in mu.
pub fn criterion_6() -> CriterionResult {
    let mut cfg = ExperimentConfig::new(ExperimentKind::SpeedSweep, 0x0601);
    cfg.p_grid = vec![0.3];
    cfg.mu_grid = vec![0.01, 0.02, 0.05, 0.1];
    cfg.horizon = HorizonPolicy::Auto { refresh_target: 1_000.0, min: 0.0 };
    cfg.n_runs = 200;
    sweep_criterion(6, "subcritical scaling", &cfg, |m| {
        let fit = &m.fits[0];
        format!("mu-exponent {:.3} +- {:.3}", fit.slope, fit.slope_stderr)
    })
}

/// C7: supercritical speed is flat in mu and above the printed bounds.
pub fn criterion_7() -> CriterionResult {
    let mut cfg = ExperimentConfig::new(ExperimentKind::SpeedSweep, 0x0701);
    cfg.p_grid = vec![0.7];
    cfg.mu_grid = vec![0.01, 0.1, 1.0];
    cfg.n_runs = 200;
    cfg.assertions = Some(Assertions {
        min_speed: Some(0.05),
        max_ratio_speed: Some(2.5),
        check_lower_bounds: true,
        ..Assertions::default()
    });
    sweep_criterion(7, "supercritical flatness", &cfg, |m| {
        let speeds: Vec<String> = m.tables[0]
            .rows
            .iter()
            .map(|r| format!("{:.3}", r[4].parse::<f64>().unwrap_or(f64::NAN)))
            .collect();
        format!("speeds [{}]", speeds.join(", "))
    })
}

/// C8: critical speed exponent window and single-constant envelope.
pub fn criterion_8() -> CriterionResult {
    let mut cfg = ExperimentConfig::new(ExperimentKind::CriticalExponent, 0x0801);
    cfg.mu_grid = vec![1e-3, 3e-3, 1e-2, 3e-2, 1e-1];
    cfg.n_runs = 300;
    sweep_criterion(8, "critical scaling", &cfg, |m| {
        let fit = &m.fits[0];
        let c = m.summary.get("envelope_c_fit").copied().unwrap_or(f64::NAN);
        format!("exponent {:.3} +- {:.3}, envelope C={c:.3}", fit.slope, fit.slope_stderr)
    })
}

/// C9: one-arm exponent at criticality.
pub fn criterion_9() -> CriterionResult {
    let mut cfg = ExperimentConfig::new(ExperimentKind::OneArm, 0x0901);
    cfg.n_samples = 1_000_000;
    sweep_criterion(9, "one-arm exponent", &cfg, |m| {
        let fit = &m.fits[0];
        let exact = m.summary.get("one_arm_exact_slope").copied().unwrap_or(f64::NAN);
        format!("log-log slope {:.3} +- {:.3} (exact curve: {exact:.3})", fit.slope, fit.slope_stderr)
    })
}

/// C10: subcritical radius tails are exponential.
pub fn criterion_10() -> CriterionResult {
    let mut cfg = ExperimentConfig::new(ExperimentKind::ClusterTails, 0x0a01);
    cfg.p_grid = vec![0.3];
    cfg.n_samples = 20_000_000;
    sweep_criterion(10, "subcritical tails", &cfg, |m| {
        let fit = &m.fits[0];
        format!("slope {:.3}, R^2 {:.5}", fit.slope, fit.r2.unwrap_or(f64::NAN))
    })
}

/// C11: trifurcation bound and Burton-Keane sweep.
pub fn criterion_11() -> CriterionResult {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Trifurcation, 0x0b01);
    cfg.p_grid = vec![0.75];
    cfg.trunc_radius = 64;
    cfg.n_samples = 100_000;
    sweep_criterion(11, "trifurcation bound", &cfg, |m| {
        let est = m.summary.get("trifurcation_estimate").copied().unwrap_or(f64::NAN);
        format!("estimate {est:.4} vs bound {:.4}", (0.75f64 * (8.0 / 9.0) * 0.75 * (8.0 / 9.0) * 0.75 * (8.0 / 9.0)))
    })
}

/// C12: speed is insensitive to the initial configuration.
pub fn criterion_12() -> CriterionResult {
    let g = GraphSpec::regular_tree(3).expect("degree 3");
    let horizon = 5_000.0;
    let n = 240;
    let stationary = estimate_speed(&g, &EnvConfig::new(0.7, 0.1, 0x0c01), horizon, n);
    let closed = estimate_speed(
        &g,
        &EnvConfig::new(0.7, 0.1, 0x0c02).with_init(InitPolicy::AllClosed),
        horizon,
        n,
    );
    match (stationary, closed) {
        (Ok(a), Ok(b)) => {
            let gap = (a.mean - b.mean).abs();
            let sigma = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
            result(
                12,
                "initial-configuration irrelevance",
                gap <= 2.0 * sigma,
                format!("stationary {:.4} vs all-closed {:.4}, gap/sigma={:.2}", a.mean, b.mean, gap / sigma),
            )
        }
        (Err(e), _) | (_, Err(e)) => {
            result(12, "initial-configuration irrelevance", false, format!("error: {e}"))
        }
    }
}

/// C13: worker count never changes CSV bodies.
pub fn criterion_13() -> CriterionResult {
    let base = std::env::temp_dir().join(format!("dynaperc-accept-{}", std::process::id()));
    let mut cfg = ExperimentConfig::new(ExperimentKind::SpeedSweep, 0x0d01);
    cfg.p_grid = vec![0.3, 0.7];
    cfg.mu_grid = vec![0.1, 0.5];
    cfg.horizon = HorizonPolicy::Fixed { value: 300.0 };
    cfg.n_runs = 16;
    cfg.assertions = Some(Assertions::default());

    let run_with = |workers: usize, dir: &std::path::Path| -> Result<String> {
        let mut c = cfg.clone();
        c.workers = workers;
        c.out_dir = Some(dir.to_path_buf());
        let m = run(&c)?;
        let mut bodies = String::new();
        for t in &m.tables {
            bodies.push_str(&t.to_csv(m.seed, &m.config_hash));
        }
        Ok(bodies)
    };
    let out = (|| -> Result<(String, String, String)> {
        let a = run_with(1, &base.join("w1"))?;
        let b = run_with(4, &base.join("w4"))?;
        // Also compare the files actually written to disk.
        let fa = std::fs::read_to_string(base.join("w1").join("speed.csv"))?;
        let fb = std::fs::read_to_string(base.join("w4").join("speed.csv"))?;
        std::fs::remove_dir_all(&base).ok();
        Ok((a, b, if fa == fb { String::new() } else { "file mismatch".into() }))
    })();
    match out {
        Ok((a, b, file_note)) => {
            let pass = a == b && file_note.is_empty();
            result(
                13,
                "worker-count determinism",
                pass,
                if pass { "1 vs 4 workers byte-identical".into() } else { "MISMATCH".into() },
            )
        }
        Err(e) => result(13, "worker-count determinism", false, format!("error: {e}")),
    }
}

/// Runs every criterion in order.
pub fn run_all() -> Vec<CriterionResult> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
        criterion_11(),
        criterion_12(),
        criterion_13(),
    ]
}
