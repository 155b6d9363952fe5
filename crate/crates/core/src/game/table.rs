use std::fmt::{self, Write as _};
use std::ops::Deref;
use std::path::Path;

use super::equilibrium::nash_profiles;
use super::payoff::expected_unchecked;
use super::{SourceSpec, StrategyProfile, Variant, NUM_PLAYERS, NUM_PROFILES};
use crate::error::{Error, Result};
use crate::qcircuit::DIM;

const REFERENCE_TABLE: &str = include_str!("../../tables/reference.txt");

/// Points paid at the all-flip outcome 111.
pub const DSE_PAYOFF: f64 = 2.0;
/// Flip probability of the cooperative profile that must beat the DSE.
pub const COOPERATIVE_FLIP_PROB: f64 = 0.8;
/// Sorted per-player payoffs of the coherent quantum equilibrium.
pub const CQE_PAYOFFS: [f64; NUM_PLAYERS] = [5.0, 5.0, 9.0];
pub const CQE_TOTAL: f64 = 19.0;
pub const CQE_TOL: f64 = 1e-9;

/// Per-player points for each of the eight measured outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffTable {
    payoffs: [[f64; NUM_PLAYERS]; DIM],
}

impl PayoffTable {
    pub fn new(payoffs: [[f64; NUM_PLAYERS]; DIM]) -> Self {
        PayoffTable { payoffs }
    }

    /// The table shipped in `tables/reference.txt`.
    pub fn reference() -> Self {
        Self::parse(REFERENCE_TABLE).expect("bundled reference table parses")
    }

    pub fn payoff(&self, outcome: usize) -> [f64; NUM_PLAYERS] {
        self.payoffs[outcome]
    }

    pub fn payoffs(&self) -> &[[f64; NUM_PLAYERS]; DIM] {
        &self.payoffs
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses eight `bbb π₁ π₂ π₃` lines. Blank lines and `#` comments are
    /// ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: [Option<[f64; NUM_PLAYERS]>; DIM] = [None; DIM];
        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let err = |message: String| Error::TableFormat {
                line: Some(line_no),
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 1 + NUM_PLAYERS {
                return Err(err(format!(
                    "expected an outcome and {NUM_PLAYERS} payoffs, found {} fields",
                    fields.len()
                )));
            }
            let outcome = parse_outcome(fields[0]).ok_or_else(|| {
                err(format!("outcome {:?} is not three binary digits", fields[0]))
            })?;
            let mut pay = [0.0; NUM_PLAYERS];
            for (slot, field) in pay.iter_mut().zip(&fields[1..]) {
                *slot = field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("payoff {field:?} is not a finite number")))?;
            }
            if rows[outcome].is_some() {
                return Err(err(format!("duplicate outcome {outcome:03b}")));
            }
            rows[outcome] = Some(pay);
        }
        let missing: Vec<String> = (0..DIM)
            .filter(|&k| rows[k].is_none())
            .map(|k| format!("{k:03b}"))
            .collect();
        if !missing.is_empty() {
            return Err(Error::TableFormat {
                line: None,
                message: format!("missing outcome(s) {}", missing.join(", ")),
            });
        }
        Ok(PayoffTable {
            payoffs: rows.map(|r| r.expect("checked above")),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, [a, b, c]) in self.payoffs.iter().enumerate() {
            let _ = writeln!(out, "{k:03b} {a} {b} {c}");
        }
        out
    }

    /// True when each player's payoff depends only on their own bit and how
    /// many of the other two bits are set.
    pub fn is_permutation_symmetric(&self) -> bool {
        let mut seen: [[Option<f64>; 3]; 2] = [[None; 3]; 2];
        for k in 0..DIM {
            for i in 0..NUM_PLAYERS {
                let own = bit(k, i);
                let others = (0..NUM_PLAYERS).filter(|&j| j != i).map(|j| bit(k, j)).sum::<usize>();
                let v = self.payoffs[k][i];
                match seen[own][others] {
                    Some(prev) if prev != v => return false,
                    _ => seen[own][others] = Some(v),
                }
            }
        }
        true
    }
}

fn parse_outcome(s: &str) -> Option<usize> {
    if s.len() != NUM_PLAYERS || !s.bytes().all(|b| b == b'0' || b == b'1') {
        return None;
    }
    usize::from_str_radix(s, 2).ok()
}

/// Bit of `player` (0-based) in outcome `k`.
fn bit(k: usize, player: usize) -> usize {
    (k >> (NUM_PLAYERS - 1 - player)) & 1
}

fn with_bit(k: usize, player: usize, b: usize) -> usize {
    let mask = 1 << (NUM_PLAYERS - 1 - player);
    if b == 1 {
        k | mask
    } else {
        k & !mask
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintCheck {
    pub name: &'static str,
    pub passed: bool,
    pub witness: String,
}

impl fmt::Display for ConstraintCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "pass" } else { "FAIL" };
        write!(f, "{} {}: {}", self.name, verdict, self.witness)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub dominance: ConstraintCheck,
    pub dse_value: ConstraintCheck,
    pub cooperation: ConstraintCheck,
    pub cqe_value: ConstraintCheck,
    /// Highest-paying quantum Nash profile at source 0, if any.
    pub cqe_profile: Option<(StrategyProfile, [f64; NUM_PLAYERS])>,
}

impl ValidationReport {
    pub fn checks(&self) -> [&ConstraintCheck; 4] {
        [&self.dominance, &self.dse_value, &self.cooperation, &self.cqe_value]
    }

    pub fn passed(&self) -> bool {
        self.checks().iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks()
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.to_string())
            .collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.checks() {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

fn check_dominance(table: &PayoffTable) -> ConstraintCheck {
    let mut violation = None;
    'outer: for i in 0..NUM_PLAYERS {
        for k in (0..DIM).filter(|&k| bit(k, i) == 0) {
            let keep = table.payoffs[k][i];
            let flip = table.payoffs[with_bit(k, i, 1)][i];
            if flip <= keep {
                violation = Some(format!(
                    "player {} at outcome {k:03b}: flipping pays {flip}, not flipping pays {keep}",
                    i + 1
                ));
                break 'outer;
            }
        }
    }
    ConstraintCheck {
        name: "dominance",
        passed: violation.is_none(),
        witness: violation.unwrap_or_else(|| "flipping strictly better for every player and context".into()),
    }
}

fn check_dse_value(table: &PayoffTable) -> ConstraintCheck {
    let pay = table.payoffs[DIM - 1];
    ConstraintCheck {
        name: "DSE value",
        passed: pay.iter().all(|&v| v == DSE_PAYOFF),
        witness: format!("outcome 111 pays ({}, {}, {})", pay[0], pay[1], pay[2]),
    }
}

fn check_cooperation(table: &PayoffTable) -> ConstraintCheck {
    let q = COOPERATIVE_FLIP_PROB;
    let mut e = [0.0; NUM_PLAYERS];
    for k in 0..DIM {
        let prob: f64 = (0..NUM_PLAYERS)
            .map(|i| if bit(k, i) == 1 { q } else { 1.0 - q })
            .product();
        for (acc, pay) in e.iter_mut().zip(table.payoffs[k]) {
            *acc += prob * pay;
        }
    }
    ConstraintCheck {
        name: "cooperation",
        passed: e.iter().all(|&v| v > DSE_PAYOFF),
        witness: format!(
            "flipping with probability {q} pays ({:.6}, {:.6}, {:.6})",
            e[0], e[1], e[2]
        ),
    }
}

fn check_cqe_value(table: &PayoffTable) -> (ConstraintCheck, Option<(StrategyProfile, [f64; NUM_PLAYERS])>) {
    let mut payoffs = [[0.0; NUM_PLAYERS]; NUM_PROFILES];
    for p in StrategyProfile::all() {
        payoffs[p.index()] = expected_unchecked(table, &p, SourceSpec::ZERO, Variant::Quantum);
    }
    let best = nash_profiles(&payoffs).into_iter().max_by(|a, b| {
        let ta: f64 = payoffs[a.index()].iter().sum();
        let tb: f64 = payoffs[b.index()].iter().sum();
        // Earliest profile wins ties.
        ta.total_cmp(&tb).then(b.index().cmp(&a.index()))
    });
    let Some(profile) = best else {
        let check = ConstraintCheck {
            name: "CQE value",
            passed: false,
            witness: "quantum game with source 0 has no pure Nash equilibrium".into(),
        };
        return (check, None);
    };
    let e = payoffs[profile.index()];
    let mut sorted = e;
    sorted.sort_by(f64::total_cmp);
    let total: f64 = e.iter().sum();
    let passed = sorted.iter().zip(CQE_PAYOFFS).all(|(a, b)| (a - b).abs() <= CQE_TOL)
        && (total - CQE_TOTAL).abs() <= CQE_TOL;
    let check = ConstraintCheck {
        name: "CQE value",
        passed,
        witness: format!(
            "best quantum Nash profile {profile} pays ({:.9}, {:.9}, {:.9}), total {total:.9}",
            e[0], e[1], e[2]
        ),
    };
    (check, Some((profile, e)))
}

/// Checks the four structural constraints a payoff table must satisfy.
pub fn validate_table(table: &PayoffTable) -> ValidationReport {
    let (cqe_value, cqe_profile) = check_cqe_value(table);
    ValidationReport {
        dominance: check_dominance(table),
        dse_value: check_dse_value(table),
        cooperation: check_cooperation(table),
        cqe_value,
        cqe_profile,
    }
}

/// A payoff table together with its validation report. Only obtainable by
/// passing validation or by an explicit bypass.
#[derive(Debug, Clone)]
pub struct CheckedTable {
    table: PayoffTable,
    report: ValidationReport,
}

impl CheckedTable {
    pub fn new(table: PayoffTable) -> Result<Self> {
        let report = validate_table(&table);
        if !report.passed() {
            return Err(Error::InvalidTable(Box::new(report)));
        }
        Ok(CheckedTable { table, report })
    }

    /// Accepts the table even if it fails validation.
    pub fn bypass(table: PayoffTable) -> Self {
        let report = validate_table(&table);
        CheckedTable { table, report }
    }

    pub fn reference() -> Self {
        Self::new(PayoffTable::reference()).expect("reference table passes validation")
    }

    pub fn table(&self) -> &PayoffTable {
        &self.table
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }
}

impl Deref for CheckedTable {
    type Target = PayoffTable;

    fn deref(&self) -> &PayoffTable {
        &self.table
    }
}
