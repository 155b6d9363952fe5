//! Exact statevector engine for the three-qubit register.
//!
//! Basis index `k` in `0..8` encodes the measured bits with player 1's qubit
//! as the most significant bit, so `0b100` is "player 1 reads 1, the others
//! read 0".

use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::RandomStream;

pub const NUM_QUBITS: usize = 3;
pub const DIM: usize = 1 << NUM_QUBITS;

/// Tolerance used to reject unnormalized states and non-unitary gates.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance on the total mass of an outcome distribution.
pub const DIST_TOL: f64 = 1e-10;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Bit mask of `qubit` (1-based, player order) inside a basis index.
pub fn qubit_mask(qubit: usize) -> usize {
    1 << (NUM_QUBITS - qubit)
}

#[derive(Clone, Copy, PartialEq)]
pub struct PureState {
    amps: [Complex64; DIM],
}

impl PureState {
    /// Computational basis state `|k⟩`.
    pub fn basis(k: usize) -> Result<Self> {
        if k >= DIM {
            return Err(Error::argument(format!("basis index {k} out of range 0..{DIM}")));
        }
        let mut amps = [Complex64::new(0.0, 0.0); DIM];
        amps[k] = Complex64::new(1.0, 0.0);
        Ok(PureState { amps })
    }

    /// Wraps raw amplitudes. Normalization is checked by the operations that
    /// consume the state, not here.
    pub fn from_amplitudes(amps: [Complex64; DIM]) -> Self {
        PureState { amps }
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(amps: [Complex64; DIM]) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::validation("cannot normalize a zero or non-finite vector"));
        }
        Ok(PureState {
            amps: amps.map(|a| a / norm),
        })
    }

    pub fn amplitudes(&self) -> &[Complex64; DIM] {
        &self.amps
    }

    pub fn amplitude(&self, k: usize) -> Complex64 {
        self.amps[k]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Largest per-amplitude distance to `other`.
    pub fn max_distance(&self, other: &PureState) -> f64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn check_normalized(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > UNITARY_TOL || !n.is_finite() {
            return Err(Error::validation(format!("state norm² is {n}, expected 1")));
        }
        Ok(())
    }
}

impl fmt::Debug for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_map();
        for (k, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() > 0.0 {
                list.entry(&format_args!("{k:03b}"), a);
            }
        }
        list.finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleQubitGate {
    m: [[Complex64; 2]; 2],
}

impl SingleQubitGate {
    pub const fn from_matrix(m: [[Complex64; 2]; 2]) -> Self {
        SingleQubitGate { m }
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        SingleQubitGate {
            m: [[c(m[0][0]), c(m[0][1])], [c(m[1][0]), c(m[1][1])]],
        }
    }

    pub fn identity() -> Self {
        Self::from_real([[1.0, 0.0], [0.0, 1.0]])
    }

    pub fn pauli_x() -> Self {
        Self::from_real([[0.0, 1.0], [1.0, 0.0]])
    }

    pub fn pauli_z() -> Self {
        Self::from_real([[1.0, 0.0], [0.0, -1.0]])
    }

    /// (σx + σz)/√2.
    pub fn hadamard() -> Self {
        let h = FRAC_1_SQRT_2;
        Self::from_real([[h, h], [h, -h]])
    }

    pub fn matrix(&self) -> &[[Complex64; 2]; 2] {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        SingleQubitGate {
            m: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]],
        }
    }

    /// Largest entry of |G·G† − I|.
    pub fn unitarity_error(&self) -> f64 {
        let a = &self.m;
        let mut err: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let dot: Complex64 = (0..2).map(|k| a[i][k] * a[j][k].conj()).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((dot - target).norm());
            }
        }
        err
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_error() <= UNITARY_TOL
    }

    /// Gate application without validation; callers guarantee unitarity and
    /// the qubit range.
    pub(crate) fn apply_unchecked(&self, state: &mut PureState, qubit: usize) {
        let mask = qubit_mask(qubit);
        let [[g00, g01], [g10, g11]] = self.m;
        for k in (0..DIM).filter(|k| k & mask == 0) {
            let a0 = state.amps[k];
            let a1 = state.amps[k | mask];
            state.amps[k] = g00 * a0 + g01 * a1;
            state.amps[k | mask] = g10 * a0 + g11 * a1;
        }
    }
}

/// Direction of the entangling gate J = (I⊗I⊗I + i X⊗X⊗X)/√2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entangler {
    Forward,
    Inverse,
}

impl Entangler {
    /// J maps each basis state |b⟩ to (|b⟩ + i|b̄⟩)/√2; J† uses −i.
    pub(crate) fn apply_unchecked(self, state: &mut PureState) {
        let phase = match self {
            Entangler::Forward => Complex64::new(0.0, FRAC_1_SQRT_2),
            Entangler::Inverse => Complex64::new(0.0, -FRAC_1_SQRT_2),
        };
        let src = state.amps;
        for k in 0..DIM {
            state.amps[k] = src[k] * FRAC_1_SQRT_2 + phase * src[DIM - 1 - k];
        }
    }
}

/// Probabilities of the eight measurement outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeDistribution {
    probs: [f64; DIM],
}

impl OutcomeDistribution {
    pub fn new(probs: [f64; DIM]) -> Result<Self> {
        if let Some(k) = probs.iter().position(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::validation(format!(
                "probability of outcome {k:03b} is {}, outside [0, 1]",
                probs[k]
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > DIST_TOL {
            return Err(Error::validation(format!("probabilities sum to {total}")));
        }
        Ok(OutcomeDistribution { probs })
    }

    pub fn point_mass(k: usize) -> Result<Self> {
        if k >= DIM {
            return Err(Error::argument(format!("outcome {k} out of range 0..{DIM}")));
        }
        let mut probs = [0.0; DIM];
        probs[k] = 1.0;
        Ok(OutcomeDistribution { probs })
    }

    pub fn probabilities(&self) -> &[f64; DIM] {
        &self.probs
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.probs[k]
    }

    pub fn max_abs_diff(&self, other: &OutcomeDistribution) -> f64 {
        self.probs
            .iter()
            .zip(other.probs.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Inverse-CDF draw from a uniform variate in `[0, 1)`.
    pub(crate) fn index_for(&self, u: f64) -> usize {
        let mut acc = 0.0;
        let mut last = 0;
        for (k, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last = k;
                if u < acc {
                    return k;
                }
            }
        }
        // u landed in the rounding gap above the accumulated mass.
        last
    }
}

pub fn apply_gate(state: &PureState, gate: &SingleQubitGate, qubit: usize) -> Result<PureState> {
    if !(1..=NUM_QUBITS).contains(&qubit) {
        return Err(Error::argument(format!("qubit index {qubit} outside 1..={NUM_QUBITS}")));
    }
    let err = gate.unitarity_error();
    if err > UNITARY_TOL {
        return Err(Error::validation(format!("gate is not unitary (|GG†-I| = {err:e})")));
    }
    state.check_normalized()?;
    let mut out = *state;
    gate.apply_unchecked(&mut out, qubit);
    Ok(out)
}

pub fn apply_entangler(state: &PureState, direction: Entangler) -> Result<PureState> {
    state.check_normalized()?;
    let mut out = *state;
    direction.apply_unchecked(&mut out);
    Ok(out)
}

pub fn outcome_distribution(state: &PureState) -> Result<OutcomeDistribution> {
    state.check_normalized()?;
    let total = state.norm_sqr();
    // Absorb the sub-tolerance rounding so the result sums to 1.
    OutcomeDistribution::new(state.amps.map(|a| (a.norm_sqr() / total).min(1.0)))
}

pub fn sample_outcome(dist: &OutcomeDistribution, rng: &mut RandomStream) -> usize {
    dist.index_for(rng.random::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn arb_state() -> impl Strategy<Value = PureState> {
        proptest::collection::vec(-1.0f64..1.0, 2 * DIM)
            .prop_filter("non-zero", |v| v.iter().any(|x| x.abs() > 1e-3))
            .prop_map(|v| {
                let mut amps = [c(0.0, 0.0); DIM];
                for k in 0..DIM {
                    amps[k] = c(v[2 * k], v[2 * k + 1]);
                }
                PureState::normalized(amps).unwrap()
            })
    }

    #[test]
    fn x_on_first_qubit_flips_msb() {
        let s = apply_gate(&PureState::basis(0).unwrap(), &SingleQubitGate::pauli_x(), 1).unwrap();
        assert_eq!(s, PureState::basis(0b100).unwrap());
    }

    #[test]
    fn hadamard_on_first_qubit() {
        let s = apply_gate(&PureState::basis(0).unwrap(), &SingleQubitGate::hadamard(), 1).unwrap();
        let h = FRAC_1_SQRT_2;
        assert!((s.amplitude(0) - c(h, 0.0)).norm() < 1e-15);
        assert!((s.amplitude(0b100) - c(h, 0.0)).norm() < 1e-15);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entangler_on_basis_states() {
        let h = FRAC_1_SQRT_2;
        let s = apply_entangler(&PureState::basis(0).unwrap(), Entangler::Forward).unwrap();
        assert!((s.amplitude(0) - c(h, 0.0)).norm() < 1e-15);
        assert!((s.amplitude(7) - c(0.0, h)).norm() < 1e-15);

        let s = apply_entangler(&PureState::basis(7).unwrap(), Entangler::Forward).unwrap();
        assert!((s.amplitude(7) - c(h, 0.0)).norm() < 1e-15);
        assert!((s.amplitude(0) - c(0.0, h)).norm() < 1e-15);
    }

    #[test]
    fn distributions_of_simple_states() {
        let d = outcome_distribution(&PureState::basis(0).unwrap()).unwrap();
        assert_eq!(d, OutcomeDistribution::point_mass(0).unwrap());

        let ghz = apply_entangler(&PureState::basis(0).unwrap(), Entangler::Forward).unwrap();
        let d = outcome_distribution(&ghz).unwrap();
        for k in 0..DIM {
            let want = if k == 0 || k == 7 { 0.5 } else { 0.0 };
            assert!((d.prob(k) - want).abs() < 1e-15);
        }

        let u = (1.0 / DIM as f64).sqrt();
        let d = outcome_distribution(&PureState::from_amplitudes([c(u, 0.0); DIM])).unwrap();
        assert!(d.probabilities().iter().all(|p| (p - 0.125).abs() < 1e-15));
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = PureState::basis(0).unwrap();
        assert!(matches!(apply_gate(&s, &SingleQubitGate::identity(), 0), Err(Error::Argument(_))));
        assert!(matches!(apply_gate(&s, &SingleQubitGate::identity(), 4), Err(Error::Argument(_))));
        let bad = SingleQubitGate::from_real([[1.0, 1.0], [0.0, 1.0]]);
        assert!(matches!(apply_gate(&s, &bad, 1), Err(Error::Validation(_))));
        let unnormalized = PureState::from_amplitudes([c(1.0, 0.0); DIM]);
        assert!(matches!(outcome_distribution(&unnormalized), Err(Error::Validation(_))));
        assert!(apply_entangler(&unnormalized, Entangler::Forward).is_err());
        assert!(OutcomeDistribution::new([0.5; DIM]).is_err());
        assert!(OutcomeDistribution::new([-0.1, 1.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn point_mass_always_sampled() {
        let d = OutcomeDistribution::point_mass(0b011).unwrap();
        let mut rng = RandomStream::new(11);
        assert!((0..1000).all(|_| sample_outcome(&d, &mut rng) == 0b011));
    }

    #[test]
    fn sampling_replays_with_same_seed() {
        let d = OutcomeDistribution::new([0.125; DIM]).unwrap();
        let mut a = RandomStream::new(5);
        let mut b = RandomStream::new(5);
        let xs: Vec<_> = (0..1000).map(|_| sample_outcome(&d, &mut a)).collect();
        let ys: Vec<_> = (0..1000).map(|_| sample_outcome(&d, &mut b)).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn empirical_frequencies_converge() {
        let probs = [0.05, 0.2, 0.0, 0.15, 0.1, 0.3, 0.125, 0.075];
        let d = OutcomeDistribution::new(probs).unwrap();
        let mut rng = RandomStream::new(2024);
        let n = 1_000_000;
        let mut counts = [0u64; DIM];
        for _ in 0..n {
            counts[sample_outcome(&d, &mut rng)] += 1;
        }
        for k in 0..DIM {
            assert!((counts[k] as f64 / n as f64 - probs[k]).abs() < 5e-3);
        }
        assert_eq!(counts[2], 0);
    }

    proptest! {
        #[test]
        fn gates_preserve_norm(s in arb_state(), q in 1usize..=3) {
            for g in [SingleQubitGate::identity(), SingleQubitGate::pauli_x(),
                      SingleQubitGate::pauli_z(), SingleQubitGate::hadamard()] {
                let out = apply_gate(&s, &g, q).unwrap();
                prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn identity_is_a_no_op(s in arb_state(), q in 1usize..=3) {
            prop_assert_eq!(apply_gate(&s, &SingleQubitGate::identity(), q).unwrap(), s);
        }

        #[test]
        fn hadamard_is_an_involution(s in arb_state(), q in 1usize..=3) {
            let h = SingleQubitGate::hadamard();
            let twice = apply_gate(&apply_gate(&s, &h, q).unwrap(), &h, q).unwrap();
            prop_assert!(twice.max_distance(&s) < 1e-12);
        }

        #[test]
        fn entangler_round_trip(s in arb_state()) {
            let fwd = apply_entangler(&s, Entangler::Forward).unwrap();
            prop_assert!((fwd.norm_sqr() - 1.0).abs() < 1e-12);
            let back = apply_entangler(&fwd, Entangler::Inverse).unwrap();
            prop_assert!(back.max_distance(&s) < 1e-12);
        }

        #[test]
        fn distributions_sum_to_one(s in arb_state()) {
            let d = outcome_distribution(&s).unwrap();
            let total: f64 = d.probabilities().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
        }
    }
}
