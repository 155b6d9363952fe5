//! The iterated game: moving-average scores, threshold mutation with a trial
//! period, and the simulation loop.

use rand::Rng;

use crate::analysis::SummaryBuilder;
use crate::error::{Error, Result};
use crate::game::{
    CheckedTable, DistributionCache, Move, PayoffTable, SourceBit, SourceSpec, StrategyProfile,
    Variant, NUM_PLAYERS,
};
use crate::qcircuit::sample_outcome;
use crate::rng::RandomStream;

pub const DEFAULT_THRESHOLD: f64 = 3.0;
pub const DEFAULT_STEPS: u64 = 10_000_000;
/// Slack used by [`ThresholdRule::Inclusive`] so that a score which has
/// converged onto d up to rounding still counts as being at the threshold.
pub const THRESHOLD_TOL: f64 = 1e-9;

/// How an eligible agent's score is compared against the threshold d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdRule {
    /// Mutate when score < d.
    Strict,
    /// Mutate when score ≤ d (to within [`THRESHOLD_TOL`]).
    #[default]
    Inclusive,
}

impl ThresholdRule {
    pub fn triggers(self, score: f64, d: f64) -> bool {
        match self {
            ThresholdRule::Strict => score < d,
            ThresholdRule::Inclusive => score < d + THRESHOLD_TOL,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ThresholdRule::Strict => "strict",
            ThresholdRule::Inclusive => "inclusive",
        }
    }
}

impl std::str::FromStr for ThresholdRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "strict" | "<" => Ok(ThresholdRule::Strict),
            "inclusive" | "<=" => Ok(ThresholdRule::Inclusive),
            other => Err(Error::argument(format!(
                "unknown threshold rule '{other}' (expected strict or inclusive)"
            ))),
        }
    }
}

/// One step of the discounted score: ((m−1)/m)·prev + (1/m)·delta.
pub fn update_moving_average(prev: f64, delta: f64, m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::argument("memory m must be at least 1"));
    }
    Ok(MovingAverage::new(m).update(prev, delta))
}

#[derive(Debug, Clone, Copy)]
struct MovingAverage {
    keep: f64,
    gain: f64,
}

impl MovingAverage {
    fn new(m: u32) -> Self {
        let m = f64::from(m);
        MovingAverage {
            keep: (m - 1.0) / m,
            gain: 1.0 / m,
        }
    }

    #[inline]
    fn update(self, prev: f64, delta: f64) -> f64 {
        self.keep * prev + self.gain * delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub mv: Move,
    /// Moving average of this agent's payoffs.
    pub score: f64,
    /// Rounds left before the agent may mutate again.
    pub trial_remaining: u32,
    /// Rounds played with the current move since it was adopted.
    pub rounds_held: u64,
}

impl AgentState {
    pub fn new(mv: Move, score: f64, trial_remaining: u32) -> Self {
        AgentState {
            mv,
            score,
            trial_remaining,
            rounds_held: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionConfig {
    /// Memory m of the moving average.
    pub memory: u32,
    /// Mutation threshold d.
    pub threshold: f64,
    pub threshold_rule: ThresholdRule,
    /// Trial period Y.
    pub trial_period: u32,
    pub steps: u64,
    pub seed: u64,
    pub variant: Variant,
    pub source: SourceSpec,
    pub table: PayoffTable,
    pub burn_in: u64,
    pub allow_invalid_table: bool,
}

impl EvolutionConfig {
    /// Defaults: d = 3.0, Y = m, 10⁷ steps, seed 0, no burn-in.
    pub fn new(memory: u32, variant: Variant, source: SourceSpec, table: PayoffTable) -> Self {
        EvolutionConfig {
            memory,
            threshold: DEFAULT_THRESHOLD,
            threshold_rule: ThresholdRule::default(),
            trial_period: memory,
            steps: DEFAULT_STEPS,
            seed: 0,
            variant,
            source,
            table,
            burn_in: 0,
            allow_invalid_table: false,
        }
    }

    pub fn with_steps(mut self, steps: u64) -> Self {
        self.steps = steps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_threshold(mut self, d: f64) -> Self {
        self.threshold = d;
        self
    }

    pub fn with_threshold_rule(mut self, rule: ThresholdRule) -> Self {
        self.threshold_rule = rule;
        self
    }

    pub fn with_trial_period(mut self, y: u32) -> Self {
        self.trial_period = y;
        self
    }

    pub fn with_burn_in(mut self, burn_in: u64) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.memory < 1 {
            return Err(Error::config("memory m must be at least 1"));
        }
        if self.trial_period < 1 {
            return Err(Error::config("trial period must be at least 1"));
        }
        if self.steps < 1 {
            return Err(Error::config("steps must be at least 1"));
        }
        if !self.threshold.is_finite() {
            return Err(Error::config("threshold must be finite"));
        }
        Ok(())
    }

    /// Validated view of the payoff table, honouring `allow_invalid_table`.
    pub fn checked_table(&self) -> Result<CheckedTable> {
        if self.allow_invalid_table {
            Ok(CheckedTable::bypass(self.table.clone()))
        } else {
            CheckedTable::new(self.table.clone())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    /// Round number, starting at 1.
    pub t: u64,
    pub profile: StrategyProfile,
    pub outcome: usize,
    pub payoffs: [f64; NUM_PLAYERS],
    pub mutated: [bool; NUM_PLAYERS],
}

impl RoundRecord {
    pub fn total_payout(&self) -> f64 {
        self.payoffs.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub rounds: u64,
    pub mean_total_payout: f64,
    /// Mean completed strategy lifetime over all mutation events; `None` if
    /// no lifetime completed inside the window.
    pub mean_lifetime: Option<f64>,
    pub lifetime_samples: u64,
    pub per_agent_lifetime: [Option<f64>; NUM_PLAYERS],
    pub mutation_count: u64,
    /// Fraction of rounds spent in each profile, by profile index.
    pub profile_occupancy: Vec<f64>,
}

impl RunSummary {
    pub fn occupancy(&self, profile: &StrategyProfile) -> f64 {
        self.profile_occupancy[profile.index()]
    }
}

pub struct Simulation {
    agents: [AgentState; NUM_PLAYERS],
    t: u64,
    cache: DistributionCache,
    table: PayoffTable,
    source: SourceSpec,
    average: MovingAverage,
    threshold: f64,
    threshold_rule: ThresholdRule,
    trial_period: u32,
}

impl Simulation {
    /// Fresh simulation: moves drawn uniformly from `rng`, every score set to
    /// the threshold and every agent inside a full trial period.
    pub fn new(config: &EvolutionConfig, table: &CheckedTable, rng: &mut RandomStream) -> Result<Self> {
        config.validate()?;
        let agents = [(); NUM_PLAYERS].map(|_| {
            let mv = Move::ALL[rng.random_range(0..Move::ALL.len())];
            AgentState::new(mv, config.threshold, config.trial_period)
        });
        Ok(Self::with_agents(config, table, agents))
    }

    pub fn with_agents(config: &EvolutionConfig, table: &CheckedTable, agents: [AgentState; NUM_PLAYERS]) -> Self {
        Simulation {
            agents,
            t: 0,
            cache: DistributionCache::new(config.variant),
            table: table.table().clone(),
            source: config.source,
            average: MovingAverage::new(config.memory),
            threshold: config.threshold,
            threshold_rule: config.threshold_rule,
            trial_period: config.trial_period,
        }
    }

    pub fn agents(&self) -> &[AgentState; NUM_PLAYERS] {
        &self.agents
    }

    pub fn profile(&self) -> StrategyProfile {
        StrategyProfile(self.agents.map(|a| a.mv))
    }

    pub fn rounds_played(&self) -> u64 {
        self.t
    }

    /// Plays one round. Moves chosen by mutation apply from the next round.
    pub fn step(&mut self, rng: &mut RandomStream) -> RoundRecord {
        self.t += 1;
        let s = match self.source {
            SourceSpec::Fixed(s) => s,
            SourceSpec::Mix50 => {
                if rng.random::<bool>() {
                    SourceBit::One
                } else {
                    SourceBit::Zero
                }
            }
        };
        let profile = self.profile();
        let outcome = sample_outcome(self.cache.get(&profile, s), rng);
        let payoffs = self.table.payoff(outcome);

        let mut mutated = [false; NUM_PLAYERS];
        for (i, agent) in self.agents.iter_mut().enumerate() {
            agent.score = self.average.update(agent.score, payoffs[i]);
            agent.rounds_held += 1;
            if agent.trial_remaining == 0 && self.threshold_rule.triggers(agent.score, self.threshold) {
                let alternatives = agent.mv.alternatives();
                agent.mv = alternatives[usize::from(rng.random::<bool>())];
                agent.trial_remaining = self.trial_period;
                agent.rounds_held = 0;
                mutated[i] = true;
            } else if agent.trial_remaining > 0 {
                agent.trial_remaining -= 1;
            }
        }

        RoundRecord {
            t: self.t,
            profile,
            outcome,
            payoffs,
            mutated,
        }
    }
}

/// Runs `config.burn_in + config.steps` rounds and summarizes the last
/// `steps` of them.
pub fn run(config: &EvolutionConfig) -> Result<RunSummary> {
    run_with(config, |_| {})
}

/// Like [`run`], also handing every post-burn-in record to `observer`.
pub fn run_with<F>(config: &EvolutionConfig, mut observer: F) -> Result<RunSummary>
where
    F: FnMut(&RoundRecord),
{
    config.validate()?;
    let table = config.checked_table()?;
    let mut rng = RandomStream::new(config.seed);
    let mut sim = Simulation::new(config, &table, &mut rng)?;
    for _ in 0..config.burn_in {
        sim.step(&mut rng);
    }
    let mut summary = SummaryBuilder::new();
    for _ in 0..config.steps {
        let record = sim.step(&mut rng);
        summary.push(&record);
        observer(&record);
    }
    summary.finish()
}
