//! Game model: moves, strategy profiles, payoff tables and the static
//! quantum/classical analysis.

mod equilibrium;
mod payoff;
mod table;

use std::fmt;
use std::str::FromStr;

pub use equilibrium::{find_equilibria, EquilibriumReport, NashEquilibrium};
pub use payoff::{
    classical_outcome_distribution, expected_payoffs, move_unitary, outcome_distribution_for,
    quantum_final_state, quantum_outcome_distribution, unentangled_final_state,
    DistributionCache,
};
pub use table::{validate_table, CheckedTable, ConstraintCheck, PayoffTable, ValidationReport};

use crate::error::{Error, Result};

pub const NUM_PLAYERS: usize = 3;
pub const NUM_PROFILES: usize = 27;

/// A player's move, labelled by p, the probability of leaving the input bit
/// unflipped. In the quantum game the same labels name σx, I and (σx+σz)/√2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    /// p = 0: always flip.
    Flip,
    /// p = 1: never flip.
    Keep,
    /// p = 1/2.
    Half,
}

impl Move {
    pub const ALL: [Move; 3] = [Move::Flip, Move::Keep, Move::Half];

    pub fn p(self) -> f64 {
        match self {
            Move::Flip => 0.0,
            Move::Keep => 1.0,
            Move::Half => 0.5,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Move> {
        Move::ALL.get(i).copied()
    }

    /// The two moves a mutating agent can switch to.
    pub fn alternatives(self) -> [Move; 2] {
        match self {
            Move::Flip => [Move::Keep, Move::Half],
            Move::Keep => [Move::Flip, Move::Half],
            Move::Half => [Move::Flip, Move::Keep],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Move::Flip => "0",
            Move::Keep => "1",
            Move::Half => "1/2",
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Move {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0" | "0.0" => Ok(Move::Flip),
            "1" | "1.0" => Ok(Move::Keep),
            "1/2" | "0.5" | ".5" | "h" => Ok(Move::Half),
            other => Err(Error::argument(format!("unknown move {other:?} (expected 0, 1 or 1/2)"))),
        }
    }
}

/// Ordered triple of moves, player 1 first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrategyProfile(pub [Move; NUM_PLAYERS]);

impl StrategyProfile {
    pub fn new(a: Move, b: Move, c: Move) -> Self {
        StrategyProfile([a, b, c])
    }

    pub fn moves(&self) -> [Move; NUM_PLAYERS] {
        self.0
    }

    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, m| acc * 3 + m.index())
    }

    pub fn from_index(i: usize) -> Option<Self> {
        if i >= NUM_PROFILES {
            return None;
        }
        let m = |d: usize| Move::from_index(d % 3).expect("digit below 3");
        Some(StrategyProfile([m(i / 9), m(i / 3), m(i)]))
    }

    /// All 27 profiles in index order.
    pub fn all() -> impl Iterator<Item = StrategyProfile> {
        (0..NUM_PROFILES).map(|i| StrategyProfile::from_index(i).expect("index in range"))
    }

    pub fn with_move(mut self, player: usize, mv: Move) -> Self {
        self.0[player] = mv;
        self
    }

    /// Moves sorted; identifies the class under relabelling of players.
    pub fn canonical(&self) -> Self {
        let mut m = self.0;
        m.sort();
        StrategyProfile(m)
    }

    pub fn all_distinct(&self) -> bool {
        let [a, b, c] = self.0;
        a != b && b != c && a != c
    }

    pub fn permute(&self, perm: [usize; NUM_PLAYERS]) -> Self {
        StrategyProfile(perm.map(|i| self.0[i]))
    }
}

impl fmt::Display for StrategyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.0;
        write!(f, "({a},{b},{c})")
    }
}

impl FromStr for StrategyProfile {
    type Err = Error;

    /// Accepts `(0,1,1/2)`, `0,1,1/2` or whitespace-separated moves.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim();
        let body = body
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .unwrap_or(body);
        let parts: Vec<&str> = body
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .collect();
        if parts.len() != NUM_PLAYERS {
            return Err(Error::argument(format!("profile {s:?} must name exactly three moves")));
        }
        Ok(StrategyProfile([parts[0].parse()?, parts[1].parse()?, parts[2].parse()?]))
    }
}

/// Profiles equivalent under interchange of player labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileClass {
    pub representative: StrategyProfile,
    pub members: Vec<StrategyProfile>,
}

impl ProfileClass {
    pub fn multiplicity(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, profile: &StrategyProfile) -> bool {
        profile.canonical() == self.representative
    }
}

/// The ten classes over {0, 1, 1/2}³, ordered by sorted representative.
pub fn enumerate_profile_classes() -> Vec<ProfileClass> {
    let mut classes: Vec<ProfileClass> = Vec::new();
    for profile in StrategyProfile::all() {
        let key = profile.canonical();
        match classes.iter_mut().find(|c| c.representative == key) {
            Some(class) => class.members.push(profile),
            None => classes.push(ProfileClass {
                representative: key,
                members: vec![profile],
            }),
        }
    }
    classes.sort_by_key(|c| c.representative);
    classes
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Classical,
    Quantum,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Classical => "classical",
            Variant::Quantum => "quantum",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "classical" | "c" => Ok(Variant::Classical),
            "quantum" | "q" => Ok(Variant::Quantum),
            other => Err(Error::argument(format!("unknown variant {other:?}"))),
        }
    }
}

/// State emitted by the qubit source in a single round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SourceBit {
    Zero,
    One,
}

impl SourceBit {
    pub fn bit(self) -> usize {
        match self {
            SourceBit::Zero => 0,
            SourceBit::One => 1,
        }
    }

    pub const BOTH: [SourceBit; 2] = [SourceBit::Zero, SourceBit::One];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SourceSpec {
    Fixed(SourceBit),
    /// Fresh fair coin every round.
    Mix50,
}

impl SourceSpec {
    pub const ZERO: SourceSpec = SourceSpec::Fixed(SourceBit::Zero);
    pub const ONE: SourceSpec = SourceSpec::Fixed(SourceBit::One);

    pub fn name(self) -> &'static str {
        match self {
            SourceSpec::Fixed(SourceBit::Zero) => "0",
            SourceSpec::Fixed(SourceBit::One) => "1",
            SourceSpec::Mix50 => "mix50",
        }
    }

    /// Stable numeric key used when deriving per-cell seeds.
    pub(crate) fn key(self) -> u64 {
        match self {
            SourceSpec::Fixed(SourceBit::Zero) => 0,
            SourceSpec::Fixed(SourceBit::One) => 1,
            SourceSpec::Mix50 => 2,
        }
    }
}

impl fmt::Display for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SourceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "0" => Ok(SourceSpec::ZERO),
            "1" => Ok(SourceSpec::ONE),
            "mix50" | "mix" | "50:50" => Ok(SourceSpec::Mix50),
            other => Err(Error::argument(format!("unknown source {other:?} (expected 0, 1 or mix50)"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_index_round_trips() {
        for (i, p) in StrategyProfile::all().enumerate() {
            assert_eq!(p.index(), i);
            assert_eq!(p.to_string().parse::<StrategyProfile>().unwrap(), p);
        }
        assert_eq!(StrategyProfile::all().count(), 27);
        assert!(StrategyProfile::from_index(27).is_none());
    }

    #[test]
    fn ten_classes_with_expected_multiplicities() {
        let classes = enumerate_profile_classes();
        assert_eq!(classes.len(), 10);
        assert_eq!(classes.iter().map(|c| c.multiplicity()).sum::<usize>(), 27);
        for c in &classes {
            assert!([1, 3, 6].contains(&c.multiplicity()));
        }
        let all_flip = StrategyProfile::new(Move::Flip, Move::Flip, Move::Flip);
        let mixed = StrategyProfile::new(Move::Half, Move::Flip, Move::Keep);
        let find = |p: StrategyProfile| classes.iter().find(|c| c.contains(&p)).unwrap();
        assert_eq!(find(all_flip).multiplicity(), 1);
        assert_eq!(find(mixed).multiplicity(), 6);
    }

    #[test]
    fn alternatives_exclude_current() {
        for m in Move::ALL {
            assert!(!m.alternatives().contains(&m));
        }
    }

    #[test]
    fn parse_labels() {
        assert_eq!("0.5".parse::<Move>().unwrap(), Move::Half);
        assert!("2".parse::<Move>().is_err());
        assert_eq!(
            "0 1 h".parse::<StrategyProfile>().unwrap(),
            StrategyProfile::new(Move::Flip, Move::Keep, Move::Half)
        );
        assert!("(0,1)".parse::<StrategyProfile>().is_err());
        assert_eq!("mix50".parse::<SourceSpec>().unwrap(), SourceSpec::Mix50);
        assert_eq!("Quantum".parse::<Variant>().unwrap(), Variant::Quantum);
    }
}
