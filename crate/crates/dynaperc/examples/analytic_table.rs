//! Closed-form oracle table: survival probabilities, cluster densities,
//! the Galton-Watson walk speed, and the printed bound formulas.
//!
//!     cargo run --release --example analytic_table

use dynaperc::analytic::{
    gw_speed, paper_bounds, root_cluster_density, srw_tree_speed, survival_probability,
    tree_cheeger,
};

fn main() {
    let d = 3;
    let phi = tree_cheeger(d);
    println!("T_{d}: p_c = {}, Phi = {phi:.4}, SRW speed = {:.4}", 1.0 / (d as f64 - 1.0), srw_tree_speed(d));
    println!();
    println!("{:>6} {:>10} {:>10} {:>10} {:>12} {:>12}", "p", "theta~", "theta", "gw_speed", "tree_lower", "general_lo");
    for p in [0.51, 0.6, 0.75, 0.9, 1.0] {
        let theta = survival_probability(d - 1, p);
        let density = root_cluster_density(d, p);
        let (v, _) = gw_speed(d - 1, p);
        let b = paper_bounds(d, p, 0.1, phi);
        println!(
            "{p:>6} {theta:>10.6} {density:>10.6} {v:>10.6} {:>12.3e} {:>12.3e}",
            b.tree_lower, b.general_lower
        );
    }
    println!();
    println!("critical envelope sqrt(mu log 1/mu):");
    for mu in [1e-3, 1e-2, 1e-1] {
        let b = paper_bounds(d, 0.5, mu, phi);
        println!("  mu={mu:<6} envelope={:.5}", b.critical_envelope.unwrap());
    }
}
