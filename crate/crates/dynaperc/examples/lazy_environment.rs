//! The dynamical environment up close: lazy materialization, interval
//! histories, the union-open probability, and stationarity rollup.
//!
//!     cargo run --release --example lazy_environment

use dynaperc::dyn_env::{interval_open_probability, EnvConfig, Environment};
use dynaperc::graphs::{EdgeRef, Word};

fn main() -> dynaperc::Result<()> {
    let cfg = EnvConfig::new(0.5, 0.2, 2024);
    let mut env = Environment::new(cfg)?;

    let edge = EdgeRef::Tree(Word(vec![0, 1]));
    for t in [0.0, 5.0, 10.0, 50.0] {
        println!("state at t={t:>4}: {}", if env.state_at(&edge, t)? { "open" } else { "closed" });
    }
    println!("records held: {}", env.record_count());

    // A fresh edge queried over a window partitions into maximal
    // constant-state pieces.
    let other = EdgeRef::Tree(Word(vec![2]));
    println!("\nhistory of a fresh edge over [0, 30]:");
    for (a, b, open) in env.open_history(&other, 0.0, 30.0)? {
        println!("  [{a:>6.2}, {b:>6.2}) {}", if open { "open" } else { "closed" });
    }

    let p_union = interval_open_probability(0.5, 0.2, 30.0);
    println!("\nP(open somewhere in a 30-unit window) = {p_union:.4}");

    // Rollup drops every record whose pending refresh fires before the
    // horizon; future queries re-materialize from the stationary law.
    let pruned = env.rollup(200.0)?;
    println!("\nrollup(200): pruned {pruned} of 2 records, {} left", env.record_count());
    println!("state at t=200.5: {}", env.state_at(&edge, 200.5)?);
    Ok(())
}
