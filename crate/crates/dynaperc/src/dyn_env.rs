//! Lazily materialized dynamical percolation.
//!
//! Each edge refreshes at rate `mu` and is open with probability `p` after
//! a refresh. Records exist only for touched edges, every edge owns a
//! counter-based stream keyed by its identity, and per-edge queries must be
//! monotone in time. Those three choices together make runs reproducible
//! under any parallel schedule and keep memory proportional to the set of
//! visited edges, not to elapsed time.
//!
//! Advancing a record to a query time normally skips ahead in O(1): if the
//! pending refresh fires before `t`, the state at `t` is a fresh
//! Bernoulli(p) draw and the next refresh after `t` is Exponential(mu) by
//! memorylessness, whatever the number of intervening refreshes. The law of
//! every observable is the same as replaying each refresh; environments
//! built with `record_history` do enumerate every refresh, which is what
//! interval partitions, refresh counting, and trajectory replay use.

use crate::error::{Error, Result};
use crate::graphs::{EdgeKey, EdgeRef};
use crate::rng::StreamRng;
use serde::{Deserialize, Serialize};
use std::collections::{BinaryHeap, HashMap, HashSet};

const EDGE_TAG: u64 = 0x45;

/// Initial bond configuration.
#[derive(Debug, Clone, Serialize, Deserialize, Default, PartialEq)]
pub enum InitPolicy {
    /// Every edge starts with an independent Bernoulli(p) state.
    #[default]
    Stationary,
    AllClosed,
    AllOpen,
    /// Listed edges start with the given state, all others Bernoulli(p).
    Explicit(Vec<(EdgeRef, bool)>),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EnvConfig {
    pub p: f64,
    pub mu: f64,
    #[serde(default)]
    pub init: InitPolicy,
    pub seed: u64,
    /// Retain every refresh event (testing/replay; incompatible with rollup).
    #[serde(default)]
    pub record_history: bool,
}

impl EnvConfig {
    pub fn new(p: f64, mu: f64, seed: u64) -> Self {
        EnvConfig { p, mu, init: InitPolicy::Stationary, seed, record_history: false }
    }

    pub fn with_init(mut self, init: InitPolicy) -> Self {
        self.init = init;
        self
    }

    pub fn with_history(mut self) -> Self {
        self.record_history = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::InvalidParameter(format!("p={} not in (0,1]", self.p)));
        }
        if !(self.mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu={} must be > 0", self.mu)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct EdgeRecord {
    state: bool,
    /// First refresh strictly after `last_query`.
    next_refresh: f64,
    last_query: f64,
    rng: StreamRng,
    refreshes: u64,
    /// (time, state-after-refresh) events, first entry is the initial state.
    events: Option<Vec<(f64, bool)>>,
}

/// Probability that a stationary edge is open at some point in a window of
/// length `delta`: `1 - (1-p) * exp(-mu * delta * p)`.
pub fn interval_open_probability(p: f64, mu: f64, delta: f64) -> f64 {
    assert!(delta >= 0.0, "delta must be nonnegative");
    1.0 - (1.0 - p) * (-mu * delta * p).exp()
}

#[derive(Debug)]
pub struct Environment {
    cfg: EnvConfig,
    records: HashMap<EdgeKey, EdgeRecord>,
    explicit: HashMap<EdgeKey, bool>,
    /// Queries below this time are illegal after a rollup.
    floor: f64,
    generation: u64,
}

impl Environment {
    pub fn new(cfg: EnvConfig) -> Result<Self> {
        cfg.validate()?;
        let explicit = match &cfg.init {
            InitPolicy::Explicit(list) => {
                list.iter().map(|(e, s)| (e.key(), *s)).collect()
            }
            _ => HashMap::new(),
        };
        Ok(Environment { cfg, records: HashMap::new(), explicit, floor: 0.0, generation: 0 })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn record_count(&self) -> usize {
        self.records.len()
    }

    fn edge_stream(&self, key: EdgeKey) -> StreamRng {
        let (a, b) = key.lanes();
        StreamRng::from_parts(self.cfg.seed, &[EDGE_TAG, a, b, self.generation])
    }

    fn materialize(&mut self, key: EdgeKey, t: f64) -> EdgeRecord {
        let (p, mu) = (self.cfg.p, self.cfg.mu);
        let mut rng = self.edge_stream(key);
        if self.generation == 0 {
            let init_state = match &self.cfg.init {
                InitPolicy::Stationary => rng.bernoulli(p),
                InitPolicy::AllClosed => false,
                InitPolicy::AllOpen => true,
                InitPolicy::Explicit(_) => {
                    self.explicit.get(&key).copied().unwrap_or_else(|| rng.bernoulli(p))
                }
            };
            if self.cfg.record_history {
                let mut rec = EdgeRecord {
                    state: init_state,
                    next_refresh: rng.exp(mu),
                    last_query: 0.0,
                    rng,
                    refreshes: 0,
                    events: Some(vec![(0.0, init_state)]),
                };
                advance_enumerate(&mut rec, t, p, mu, &mut None);
                rec
            } else {
                // The edge refreshed before t unless the first arrival of a
                // rate-mu Poisson process exceeds t.
                let untouched = rng.bernoulli((-mu * t).exp());
                let state = if untouched { init_state } else { rng.bernoulli(p) };
                let next_refresh = t + rng.exp(mu);
                EdgeRecord { state, next_refresh, last_query: t, rng, refreshes: 0, events: None }
            }
        } else {
            // Re-touch after a rollup: the pruned record had a refresh
            // pending before the rollup horizon, so the state at the floor
            // is Bernoulli(p) and the next refresh is memoryless from there.
            let state = rng.bernoulli(p);
            let mut rec = EdgeRecord {
                state,
                next_refresh: self.floor + rng.exp(mu),
                last_query: self.floor,
                rng,
                refreshes: 0,
                events: None,
            };
            advance_skip(&mut rec, t, p, mu);
            rec
        }
    }

    fn probe(&mut self, key: EdgeKey, t: f64) -> Result<&mut EdgeRecord> {
        if t < self.floor {
            return Err(Error::TimeRegression { t, clock: self.floor });
        }
        if let Some(rec) = self.records.get(&key) {
            if t < rec.last_query {
                return Err(Error::TimeRegression { t, clock: rec.last_query });
            }
        } else {
            let rec = self.materialize(key, t);
            self.records.insert(key, rec);
            return Ok(self.records.get_mut(&key).unwrap());
        }
        let (p, mu, hist) = (self.cfg.p, self.cfg.mu, self.cfg.record_history);
        let rec = self.records.get_mut(&key).unwrap();
        if hist {
            advance_enumerate(rec, t, p, mu, &mut None);
        } else {
            advance_skip(rec, t, p, mu);
        }
        Ok(rec)
    }

    /// State of edge `e` at time `t` (monotone per-edge clock).
    pub fn state_at(&mut self, e: &EdgeRef, t: f64) -> Result<bool> {
        self.state_at_key(e.key(), t)
    }

    pub fn state_at_key(&mut self, key: EdgeKey, t: f64) -> Result<bool> {
        Ok(self.probe(key, t)?.state)
    }

    /// State and pending refresh in one query, for attempt bookkeeping.
    pub fn attempt_key(&mut self, key: EdgeKey, t: f64) -> Result<(bool, f64)> {
        let rec = self.probe(key, t)?;
        Ok((rec.state, rec.next_refresh))
    }

    pub fn next_refresh_after(&mut self, e: &EdgeRef, t: f64) -> Result<f64> {
        Ok(self.probe(e.key(), t)?.next_refresh)
    }

    /// Number of refreshes this record has replayed (history environments).
    pub fn history(&self, e: &EdgeRef) -> Option<&[(f64, bool)]> {
        self.records.get(&e.key()).and_then(|r| r.events.as_deref())
    }

    /// State at a past time, reconstructed from retained events.
    pub fn history_state_at(&self, e: &EdgeRef, t: f64) -> Result<bool> {
        let rec = self
            .records
            .get(&e.key())
            .ok_or_else(|| Error::InvalidParameter("edge has no record".into()))?;
        let events = rec
            .events
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("environment does not record history".into()))?;
        if t > rec.last_query {
            return Err(Error::InvalidParameter(format!(
                "history only covers up to t={}, asked {t}",
                rec.last_query
            )));
        }
        let idx = events.partition_point(|&(s, _)| s <= t);
        Ok(events[idx - 1].1)
    }

    /// Partition of `[s, t]` into maximal constant-state subintervals.
    ///
    /// Needs `s` at or after the edge's clock (the usual forward-time use),
    /// or a history-recording environment for queries into the past.
    pub fn open_history(&mut self, e: &EdgeRef, s: f64, t: f64) -> Result<Vec<(f64, f64, bool)>> {
        if s > t {
            return Err(Error::InvalidParameter(format!("open_history with s={s} > t={t}")));
        }
        let key = e.key();
        if s < self.floor {
            return Err(Error::TimeRegression { t: s, clock: self.floor });
        }
        let past_query = self.records.get(&key).is_some_and(|rec| s < rec.last_query);
        if past_query {
            if !self.cfg.record_history {
                let clock = self.records[&key].last_query;
                return Err(Error::TimeRegression { t: s, clock });
            }
            // Advance to t if the record is not already past it, then cut
            // the partition out of the events.
            if self.records[&key].last_query < t {
                self.probe(key, t)?;
            }
            let rec = &self.records[&key];
            let events = rec.events.as_ref().expect("history environment");
            let mut out: Vec<(f64, f64, bool)> = Vec::new();
            let mut cur_start = s;
            let mut cur_state = {
                let idx = events.partition_point(|&(u, _)| u <= s);
                events[idx - 1].1
            };
            for &(u, st) in events.iter().filter(|&&(u, _)| u > s && u <= t) {
                if st != cur_state {
                    out.push((cur_start, u, cur_state));
                    cur_start = u;
                    cur_state = st;
                }
            }
            out.push((cur_start, t, cur_state));
            return Ok(out);
        }
        // Forward-time path: position the record at s, then replay refreshes.
        self.probe(key, s)?;
        let (p, mu) = (self.cfg.p, self.cfg.mu);
        let rec = self.records.get_mut(&key).unwrap();
        let mut out: Vec<(f64, f64, bool)> = Vec::new();
        let mut cur_start = s;
        let mut cur_state = rec.state;
        let mut transitions: Vec<(f64, bool)> = Vec::new();
        advance_enumerate(rec, t, p, mu, &mut Some(&mut transitions));
        for (u, st) in transitions {
            if st != cur_state {
                out.push((cur_start, u, cur_state));
                cur_start = u;
                cur_state = st;
            }
        }
        out.push((cur_start, t, cur_state));
        Ok(out)
    }

    /// Drops records whose pending refresh fires before `horizon`; they are
    /// re-materialized as fresh Bernoulli(p) edges if touched again. Legal
    /// only if every future query happens at or after `horizon`, which the
    /// new floor enforces. Returns the number of pruned records.
    pub fn rollup(&mut self, horizon: f64) -> Result<usize> {
        if self.cfg.record_history {
            return Err(Error::InvalidParameter("rollup is incompatible with record_history".into()));
        }
        if horizon < self.floor {
            return Err(Error::TimeRegression { t: horizon, clock: self.floor });
        }
        let before = self.records.len();
        self.records.retain(|_, rec| rec.next_refresh >= horizon);
        self.floor = horizon;
        self.generation += 1;
        Ok(before - self.records.len())
    }
}

fn advance_skip(rec: &mut EdgeRecord, t: f64, p: f64, mu: f64) {
    if rec.next_refresh <= t {
        rec.state = rec.rng.bernoulli(p);
        rec.next_refresh = t + rec.rng.exp(mu);
    }
    rec.last_query = t;
}

fn advance_enumerate(
    rec: &mut EdgeRecord,
    t: f64,
    p: f64,
    mu: f64,
    sink: &mut Option<&mut Vec<(f64, bool)>>,
) {
    while rec.next_refresh <= t {
        let at = rec.next_refresh;
        rec.state = rec.rng.bernoulli(p);
        rec.refreshes += 1;
        if let Some(events) = rec.events.as_mut() {
            events.push((at, rec.state));
        }
        if let Some(out) = sink.as_deref_mut() {
            out.push((at, rec.state));
        }
        rec.next_refresh = at + rec.rng.exp(mu);
    }
    rec.last_query = t;
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct QueueEntry {
    time: f64,
    key: EdgeKey,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Reversed: BinaryHeap is a max-heap, we want the earliest refresh.
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.key.cmp(&self.key))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Tracks the memory set: edges attempted since their last refresh. Reset
/// times are the returns of the set to empty from nonempty.
#[derive(Debug, Default)]
pub struct MemoryTracker {
    active: HashSet<EdgeKey>,
    queue: BinaryHeap<QueueEntry>,
    reset_times: Vec<f64>,
    last_time: f64,
    /// `|A|` observed just before each attempt (PASTA sampling).
    occupancy_samples: Vec<u32>,
    high_water: usize,
}

impl MemoryTracker {
    pub fn new() -> Self {
        MemoryTracker::default()
    }

    /// Removes queued refreshes up to `t`; returns a reset time if the set
    /// empties. Refreshes at exactly an attempt time are processed first.
    pub fn process_until(&mut self, t: f64) -> Option<f64> {
        let mut reset = None;
        while let Some(entry) = self.queue.peek() {
            if entry.time > t {
                break;
            }
            let entry = self.queue.pop().unwrap();
            if self.active.remove(&entry.key) && self.active.is_empty() {
                self.reset_times.push(entry.time);
                reset = Some(entry.time);
            }
        }
        reset
    }

    /// Records an attempt on `key` at time `t`; `next_refresh` is the
    /// pending refresh the environment reported for this edge.
    pub fn record_attempt(&mut self, key: EdgeKey, t: f64, next_refresh: f64) -> Result<Option<f64>> {
        if t < self.last_time {
            return Err(Error::TimeRegression { t, clock: self.last_time });
        }
        self.last_time = t;
        let reset = self.process_until(t);
        self.occupancy_samples.push(self.active.len() as u32);
        if self.active.insert(key) {
            self.queue.push(QueueEntry { time: next_refresh, key });
            self.high_water = self.high_water.max(self.active.len());
        }
        Ok(reset)
    }

    pub fn active_len(&self) -> usize {
        self.active.len()
    }

    pub fn reset_times(&self) -> &[f64] {
        &self.reset_times
    }

    pub fn occupancy_samples(&self) -> &[u32] {
        &self.occupancy_samples
    }

    pub fn high_water(&self) -> usize {
        self.high_water
    }
}
