use super::payoff::expected_unchecked;
use super::{CheckedTable, Move, SourceBit, SourceSpec, StrategyProfile, Variant};
use super::{NUM_PLAYERS, NUM_PROFILES};

/// Slack allowed when comparing expected payoffs of two moves.
const PAYOFF_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NashEquilibrium {
    pub profile: StrategyProfile,
    pub payoffs: [f64; NUM_PLAYERS],
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub variant: Variant,
    pub source: SourceBit,
    /// Expected payoffs indexed by `StrategyProfile::index`.
    pub payoffs: Vec<[f64; NUM_PLAYERS]>,
    /// A move that does at least as well as any other against all nine
    /// opposing move pairs, per player.
    pub dominant: [Option<Move>; NUM_PLAYERS],
    pub dse: Option<StrategyProfile>,
    pub nash: Vec<NashEquilibrium>,
}

/// Pure profiles where no player gains by a unilateral change of move.
pub(crate) fn nash_profiles(payoffs: &[[f64; NUM_PLAYERS]; NUM_PROFILES]) -> Vec<StrategyProfile> {
    StrategyProfile::all()
        .filter(|p| {
            (0..NUM_PLAYERS).all(|i| {
                let current = payoffs[p.index()][i];
                Move::ALL
                    .iter()
                    .all(|&m| payoffs[p.with_move(i, m).index()][i] <= current + PAYOFF_TOL)
            })
        })
        .collect()
}

fn dominant_move(payoffs: &[[f64; NUM_PLAYERS]; NUM_PROFILES], player: usize) -> Option<Move> {
    Move::ALL.into_iter().find(|&candidate| {
        StrategyProfile::all()
            .filter(|p| p.moves()[player] == candidate)
            .all(|p| {
                let mine = payoffs[p.index()][player];
                Move::ALL
                    .iter()
                    .all(|&m| payoffs[p.with_move(player, m).index()][player] <= mine + PAYOFF_TOL)
            })
    })
}

pub fn find_equilibria(variant: Variant, s: SourceBit, table: &CheckedTable) -> EquilibriumReport {
    let mut payoffs = [[0.0; NUM_PLAYERS]; NUM_PROFILES];
    for p in StrategyProfile::all() {
        payoffs[p.index()] = expected_unchecked(table.table(), &p, SourceSpec::Fixed(s), variant);
    }
    let dominant = [0, 1, 2].map(|i| dominant_move(&payoffs, i));
    let dse = match dominant {
        [Some(a), Some(b), Some(c)] => Some(StrategyProfile::new(a, b, c)),
        _ => None,
    };
    let nash = nash_profiles(&payoffs)
        .into_iter()
        .map(|profile| NashEquilibrium {
            profile,
            payoffs: payoffs[profile.index()],
        })
        .collect();
    EquilibriumReport {
        variant,
        source: s,
        payoffs: payoffs.to_vec(),
        dominant,
        dse,
        nash,
    }
}
