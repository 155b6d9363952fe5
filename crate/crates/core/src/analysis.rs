//! Reductions over round records: payout and lifetime statistics, sweep
//! tables, and m-round transition graphs between strategy profiles.

use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::evolve::{RoundRecord, RunSummary};
use crate::game::{SourceSpec, StrategyProfile, Variant, NUM_PLAYERS, NUM_PROFILES};

pub const DEFAULT_NAMING_THRESHOLD: f64 = 0.01;
/// Edges rarer than this are ignored when extracting attractors.
pub const DEFAULT_EDGE_THRESHOLD: f64 = 0.05;

pub fn mean_total_payout(records: &[RoundRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::argument("mean payout of an empty record sequence"));
    }
    Ok(records.iter().map(RoundRecord::total_payout).sum::<f64>() / records.len() as f64)
}

/// Completed strategy lifetimes as `(agent, rounds)`: rounds from the one
/// after adoption through the mutation round. Initial moves count as adopted
/// at round 0 when the records start at round 1; a strategy whose adoption
/// or end lies outside the records is not counted.
pub fn lifetimes(records: &[RoundRecord]) -> Vec<(usize, u64)> {
    let mut tally = LifetimeTally::default();
    let mut out = Vec::new();
    for rec in records {
        tally.push_with(rec, |agent, len| out.push((agent, len)));
    }
    out
}

/// Mean completed lifetime over all mutation events, or `None` when no
/// lifetime completed. Fails if any lifetime is shorter than the trial
/// period allows.
pub fn mean_lifetime(records: &[RoundRecord], trial_period: u32) -> Result<Option<f64>> {
    let samples = lifetimes(records);
    if let Some((agent, len)) = samples.iter().find(|(_, len)| *len <= u64::from(trial_period)) {
        return Err(Error::validation(format!(
            "agent {} held a move for {len} rounds, less than trial period {trial_period} + 1",
            agent + 1
        )));
    }
    if samples.is_empty() {
        return Ok(None);
    }
    Ok(Some(samples.iter().map(|(_, l)| *l as f64).sum::<f64>() / samples.len() as f64))
}

#[derive(Debug, Clone, Default)]
struct LifetimeTally {
    last_mutation: [Option<u64>; NUM_PLAYERS],
    sum: [u64; NUM_PLAYERS],
    count: [u64; NUM_PLAYERS],
}

impl LifetimeTally {
    fn push_with(&mut self, rec: &RoundRecord, mut on_sample: impl FnMut(usize, u64)) {
        if rec.t == 1 {
            self.last_mutation = [Some(0); NUM_PLAYERS];
        }
        for agent in (0..NUM_PLAYERS).filter(|&i| rec.mutated[i]) {
            if let Some(t0) = self.last_mutation[agent] {
                let len = rec.t - t0;
                self.sum[agent] += len;
                self.count[agent] += 1;
                on_sample(agent, len);
            }
            self.last_mutation[agent] = Some(rec.t);
        }
    }

    fn mean(&self) -> Option<f64> {
        let n: u64 = self.count.iter().sum();
        (n > 0).then(|| self.sum.iter().sum::<u64>() as f64 / n as f64)
    }

    fn per_agent(&self) -> [Option<f64>; NUM_PLAYERS] {
        [0, 1, 2].map(|i| (self.count[i] > 0).then(|| self.sum[i] as f64 / self.count[i] as f64))
    }
}

/// Streaming reducer producing a [`RunSummary`].
#[derive(Debug, Clone)]
pub struct SummaryBuilder {
    rounds: u64,
    payout_sum: f64,
    mutation_count: u64,
    occupancy: [u64; NUM_PROFILES],
    lifetimes: LifetimeTally,
}

impl Default for SummaryBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl SummaryBuilder {
    pub fn new() -> Self {
        SummaryBuilder {
            rounds: 0,
            payout_sum: 0.0,
            mutation_count: 0,
            occupancy: [0; NUM_PROFILES],
            lifetimes: LifetimeTally::default(),
        }
    }

    pub fn push(&mut self, rec: &RoundRecord) {
        self.rounds += 1;
        self.payout_sum += rec.total_payout();
        self.mutation_count += rec.mutated.iter().filter(|&&m| m).count() as u64;
        self.occupancy[rec.profile.index()] += 1;
        self.lifetimes.push_with(rec, |_, _| {});
    }

    pub fn finish(&self) -> Result<RunSummary> {
        if self.rounds == 0 {
            return Err(Error::argument("cannot summarize zero rounds"));
        }
        let n = self.rounds as f64;
        Ok(RunSummary {
            rounds: self.rounds,
            mean_total_payout: self.payout_sum / n,
            mean_lifetime: self.lifetimes.mean(),
            lifetime_samples: self.lifetimes.count.iter().sum(),
            per_agent_lifetime: self.lifetimes.per_agent(),
            mutation_count: self.mutation_count,
            profile_occupancy: self.occupancy.iter().map(|&c| c as f64 / n).collect(),
        })
    }
}

/// Node of a transition graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Profile(StrategyProfile),
    /// Every profile below the naming threshold.
    Turbulent,
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Profile(p) => write!(f, "{p}"),
            Node::Turbulent => f.write_str("T"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionGraph {
    nodes: Vec<Node>,
    counts: Vec<Vec<u64>>,
    probabilities: Vec<Vec<f64>>,
    occupancy: Vec<f64>,
    samples: usize,
}

impl TransitionGraph {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn named_profiles(&self) -> Vec<StrategyProfile> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Profile(p) => Some(*p),
                Node::Turbulent => None,
            })
            .collect()
    }

    pub fn index_of(&self, node: Node) -> Option<usize> {
        self.nodes.iter().position(|&n| n == node)
    }

    pub fn count(&self, from: Node, to: Node) -> u64 {
        match (self.index_of(from), self.index_of(to)) {
            (Some(i), Some(j)) => self.counts[i][j],
            _ => 0,
        }
    }

    /// Row-normalized probability that `to` is sampled m rounds after `from`.
    pub fn probability(&self, from: Node, to: Node) -> f64 {
        match (self.index_of(from), self.index_of(to)) {
            (Some(i), Some(j)) => self.probabilities[i][j],
            _ => 0.0,
        }
    }

    pub fn occupancy(&self, node: Node) -> f64 {
        self.index_of(node).map_or(0.0, |i| self.occupancy[i])
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Edges with at least one observed transition, in node order.
    pub fn edges(&self) -> Vec<(Node, Node, u64, f64)> {
        let mut out = Vec::new();
        for (i, row) in self.counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c > 0 {
                    out.push((self.nodes[i], self.nodes[j], c, self.probabilities[i][j]));
                }
            }
        }
        out
    }

    /// Attractor cycles among the named profiles: strongly connected groups
    /// over edges with probability at least `edge_threshold`, either of two
    /// or more profiles or a single profile with a self-loop. The turbulence
    /// node is excluded.
    pub fn attractor_cycles(&self, edge_threshold: f64) -> Vec<Vec<StrategyProfile>> {
        let mut graph = DiGraph::<StrategyProfile, ()>::new();
        let mut handles = Vec::new();
        for node in &self.nodes {
            handles.push(match node {
                Node::Profile(p) => Some(graph.add_node(*p)),
                Node::Turbulent => None,
            });
        }
        let mut self_loop = vec![false; self.nodes.len()];
        for (i, row) in self.probabilities.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if p < edge_threshold || p == 0.0 {
                    continue;
                }
                if let (Some(a), Some(b)) = (handles[i], handles[j]) {
                    if i == j {
                        self_loop[i] = true;
                    } else {
                        graph.add_edge(a, b, ());
                    }
                }
            }
        }
        let mut cycles: Vec<Vec<StrategyProfile>> = tarjan_scc(&graph)
            .into_iter()
            .filter(|comp| {
                comp.len() > 1 || handles.iter().position(|h| *h == Some(comp[0])).is_some_and(|i| self_loop[i])
            })
            .map(|comp| {
                let mut members: Vec<_> = comp.into_iter().map(|n| graph[n]).collect();
                members.sort();
                members
            })
            .collect();
        cycles.sort();
        cycles
    }
}

/// Transition graph of the profile sampled every `m` rounds, starting at
/// round m.
pub fn attractor_transitions(
    series: &[StrategyProfile],
    m: usize,
    naming_threshold: f64,
) -> Result<TransitionGraph> {
    attractor_transitions_with_phase(series, m, naming_threshold, 0)
}

/// As [`attractor_transitions`], sampling at rounds m + phase, 2m + phase, …
/// where `series[0]` is round 1.
pub fn attractor_transitions_with_phase(
    series: &[StrategyProfile],
    m: usize,
    naming_threshold: f64,
    phase: usize,
) -> Result<TransitionGraph> {
    if m == 0 {
        return Err(Error::argument("window length m must be at least 1"));
    }
    if phase >= m {
        return Err(Error::argument(format!("sampling phase {phase} must be below m = {m}")));
    }
    if !(0.0..=1.0).contains(&naming_threshold) {
        return Err(Error::argument(format!("naming threshold {naming_threshold} outside [0, 1]")));
    }
    if series.len() < 2 * m + phase {
        return Err(Error::argument(format!(
            "series of {} rounds is too short for two windows of m = {m} (phase {phase})",
            series.len()
        )));
    }
    let sampled: Vec<StrategyProfile> = series[m - 1 + phase..].iter().step_by(m).copied().collect();
    let n = sampled.len();

    let mut hits = [0usize; NUM_PROFILES];
    for p in &sampled {
        hits[p.index()] += 1;
    }
    let mut nodes: Vec<Node> = StrategyProfile::all()
        .filter(|p| hits[p.index()] > 0 && hits[p.index()] as f64 / n as f64 >= naming_threshold)
        .map(Node::Profile)
        .collect();
    let named = |p: &StrategyProfile| nodes.iter().position(|&x| x == Node::Profile(*p));
    let mut node_of: Vec<Option<usize>> = StrategyProfile::all().map(|p| named(&p)).collect();
    if sampled.iter().any(|p| node_of[p.index()].is_none()) {
        let t = nodes.len();
        nodes.push(Node::Turbulent);
        for slot in node_of.iter_mut().filter(|s| s.is_none()) {
            *slot = Some(t);
        }
    }
    let id = |p: &StrategyProfile| node_of[p.index()].expect("every profile mapped");

    let k = nodes.len();
    let mut counts = vec![vec![0u64; k]; k];
    let mut visits = vec![0usize; k];
    for p in &sampled {
        visits[id(p)] += 1;
    }
    for pair in sampled.windows(2) {
        counts[id(&pair[0])][id(&pair[1])] += 1;
    }
    let probabilities = counts
        .iter()
        .map(|row| {
            let total: u64 = row.iter().sum();
            row.iter()
                .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
                .collect()
        })
        .collect();
    let occupancy = visits.iter().map(|&v| v as f64 / n as f64).collect();
    Ok(TransitionGraph {
        nodes,
        counts,
        probabilities,
        occupancy,
        samples: n,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub m: u32,
    pub variant: Variant,
    pub source: SourceSpec,
    pub seed: u64,
    pub steps: u64,
    pub mean_total_payout: f64,
    pub mean_lifetime: Option<f64>,
    pub mutation_count: u64,
}

/// Sweep rows ordered by (variant, source, m), one per cell.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn new(mut rows: Vec<SweepRow>) -> Result<Self> {
        rows.sort_by_key(|r| (r.variant, r.source, r.m));
        if let Some(w) = rows
            .windows(2)
            .find(|w| (w[0].variant, w[0].source, w[0].m) == (w[1].variant, w[1].source, w[1].m))
        {
            return Err(Error::argument(format!(
                "duplicate sweep cell m={} variant={} source={}",
                w[0].m, w[0].variant, w[0].source
            )));
        }
        Ok(SweepResult { rows })
    }

    pub fn rows(&self) -> &[SweepRow] {
        &self.rows
    }

    pub fn row(&self, m: u32, variant: Variant, source: SourceSpec) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.m == m && r.variant == variant && r.source == source)
    }
}
