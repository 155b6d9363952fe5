use super::{CheckedTable, Move, PayoffTable, SourceBit, SourceSpec, StrategyProfile, Variant};
use super::{NUM_PLAYERS, NUM_PROFILES};
use crate::qcircuit::{self, Entangler, OutcomeDistribution, PureState, SingleQubitGate, DIM};

/// p = 1 → I, p = 0 → σx, p = 1/2 → (σx+σz)/√2.
pub fn move_unitary(mv: Move) -> SingleQubitGate {
    match mv {
        Move::Keep => SingleQubitGate::identity(),
        Move::Flip => SingleQubitGate::pauli_x(),
        Move::Half => SingleQubitGate::hadamard(),
    }
}

fn input_state(s: SourceBit) -> PureState {
    PureState::basis(if s == SourceBit::One { DIM - 1 } else { 0 }).expect("basis index in range")
}

fn apply_moves(state: &mut PureState, profile: &StrategyProfile) {
    for (i, mv) in profile.moves().into_iter().enumerate() {
        move_unitary(mv).apply_unchecked(state, i + 1);
    }
}

/// J† · (U₁⊗U₂⊗U₃) · J |sss⟩.
pub fn quantum_final_state(profile: &StrategyProfile, s: SourceBit) -> PureState {
    let mut state = input_state(s);
    Entangler::Forward.apply_unchecked(&mut state);
    apply_moves(&mut state, profile);
    Entangler::Inverse.apply_unchecked(&mut state);
    state
}

/// The quantum pipeline with both entangling gates removed.
pub fn unentangled_final_state(profile: &StrategyProfile, s: SourceBit) -> PureState {
    let mut state = input_state(s);
    apply_moves(&mut state, profile);
    state
}

/// Product distribution: player i's bit equals s with probability pᵢ.
pub fn classical_outcome_distribution(profile: &StrategyProfile, s: SourceBit) -> OutcomeDistribution {
    let moves = profile.moves();
    let mut probs = [0.0; DIM];
    for (k, prob) in probs.iter_mut().enumerate() {
        *prob = (0..NUM_PLAYERS)
            .map(|i| {
                let bit = (k >> (NUM_PLAYERS - 1 - i)) & 1;
                let p = moves[i].p();
                if bit == s.bit() {
                    p
                } else {
                    1.0 - p
                }
            })
            .product();
    }
    OutcomeDistribution::new(probs).expect("product of per-bit probabilities is normalized")
}

pub fn quantum_outcome_distribution(profile: &StrategyProfile, s: SourceBit) -> OutcomeDistribution {
    qcircuit::outcome_distribution(&quantum_final_state(profile, s))
        .expect("unitary pipeline preserves the norm")
}

pub fn outcome_distribution_for(
    variant: Variant,
    profile: &StrategyProfile,
    s: SourceBit,
) -> OutcomeDistribution {
    match variant {
        Variant::Classical => classical_outcome_distribution(profile, s),
        Variant::Quantum => quantum_outcome_distribution(profile, s),
    }
}

pub(crate) fn expectation(table: &PayoffTable, dist: &OutcomeDistribution) -> [f64; NUM_PLAYERS] {
    let mut e = [0.0; NUM_PLAYERS];
    for (k, &p) in dist.probabilities().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (ei, pay) in e.iter_mut().zip(table.payoff(k)) {
            *ei += p * pay;
        }
    }
    e
}

pub(crate) fn expected_unchecked(
    table: &PayoffTable,
    profile: &StrategyProfile,
    source: SourceSpec,
    variant: Variant,
) -> [f64; NUM_PLAYERS] {
    let at = |s| expectation(table, &outcome_distribution_for(variant, profile, s));
    match source {
        SourceSpec::Fixed(s) => at(s),
        SourceSpec::Mix50 => {
            let (a, b) = (at(SourceBit::Zero), at(SourceBit::One));
            [0, 1, 2].map(|i| (a[i] + b[i]) / 2.0)
        }
    }
}

/// Expected points per round for each player.
pub fn expected_payoffs(
    profile: &StrategyProfile,
    source: SourceSpec,
    variant: Variant,
    table: &CheckedTable,
) -> [f64; NUM_PLAYERS] {
    expected_unchecked(table.table(), profile, source, variant)
}

/// Outcome distributions for all 27 profiles and both source bits of one
/// variant, computed once up front.
#[derive(Debug, Clone)]
pub struct DistributionCache {
    variant: Variant,
    dists: Vec<[OutcomeDistribution; 2]>,
}

impl DistributionCache {
    pub fn new(variant: Variant) -> Self {
        let dists = StrategyProfile::all()
            .map(|p| SourceBit::BOTH.map(|s| outcome_distribution_for(variant, &p, s)))
            .collect::<Vec<_>>();
        debug_assert_eq!(dists.len(), NUM_PROFILES);
        DistributionCache { variant, dists }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn get(&self, profile: &StrategyProfile, s: SourceBit) -> &OutcomeDistribution {
        &self.dists[profile.index()][s.bit()]
    }
}
