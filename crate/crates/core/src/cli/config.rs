//! Run configuration files: flat TOML key/value documents.
//!
//! ```toml
//! variant = ["classical", "quantum"]
//! source = "0"
//! m_range = "1..50"
//! seed = 2024
//! steps = 1000000
//! outputs.summary = "summary.csv"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::analysis::DEFAULT_NAMING_THRESHOLD;
use crate::error::{Error, Result};
use crate::evolve::{EvolutionConfig, ThresholdRule, DEFAULT_STEPS, DEFAULT_THRESHOLD};
use crate::game::{PayoffTable, SourceSpec, Variant};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    fn items(&self) -> Vec<&str> {
        match self {
            OneOrMany::One(s) => s.split(',').map(str::trim).filter(|s| !s.is_empty()).collect(),
            OneOrMany::Many(v) => v.iter().map(|s| s.trim()).collect(),
        }
    }
}

/// Largest number of memory values a single sweep may name.
pub const MAX_M_VALUES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum MRange {
    /// `"a..b"` or `"a..=b"` (both inclusive) or a comma-separated list.
    Spec(String),
    List(Vec<u32>),
}

impl MRange {
    pub fn values(&self) -> Result<Vec<u32>> {
        let values = match self {
            MRange::List(v) => v.clone(),
            MRange::Spec(s) => parse_m_range(s)?,
        };
        if values.is_empty() {
            return Err(Error::config("m_range is empty"));
        }
        if values.len() > MAX_M_VALUES {
            return Err(Error::config(format!("m_range names more than {MAX_M_VALUES} values")));
        }
        if values.contains(&0) {
            return Err(Error::config("m_range values must be at least 1"));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("m_range values must be strictly increasing"));
        }
        Ok(values)
    }
}

fn parse_m_range(s: &str) -> Result<Vec<u32>> {
    let bad = || Error::config(format!("cannot parse m_range {s:?}"));
    let num = |t: &str| t.trim().parse::<u32>().map_err(|_| bad());
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (lo, hi) = (num(a)?, num(b)?);
        if lo > hi {
            return Err(bad());
        }
        if (hi - lo) as usize >= MAX_M_VALUES {
            return Err(Error::config(format!("m_range {s:?} names more than {MAX_M_VALUES} values")));
        }
        Ok((lo..=hi).collect())
    } else {
        s.split(',').map(num).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub summary: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub transitions: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub variant: Option<OneOrMany>,
    pub source: Option<OneOrMany>,
    pub m: Option<u32>,
    pub m_range: Option<MRange>,
    pub d: Option<f64>,
    /// "strict" (score < d) or "inclusive" (score ≤ d).
    pub threshold_rule: Option<String>,
    pub trial_period: Option<u32>,
    pub steps: Option<u64>,
    pub seed: Option<u64>,
    pub table_path: Option<PathBuf>,
    pub burn_in: Option<u64>,
    pub outputs: Option<Outputs>,
    pub naming_threshold: Option<f64>,
}

impl RunConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.message().to_string()))
    }

    /// Reads a config file; a relative `table_path` is resolved against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let (Some(table), Some(dir)) = (&cfg.table_path, path.parent()) {
            if table.is_relative() {
                cfg.table_path = Some(dir.join(table));
            }
        }
        Ok(cfg)
    }

    /// Fields set in `overrides` replace those in `self`. Setting either of
    /// `m` / `m_range` clears the other.
    pub fn merge(mut self, overrides: RunConfigFile) -> Self {
        if overrides.m.is_some() || overrides.m_range.is_some() {
            self.m = overrides.m;
            self.m_range = overrides.m_range;
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if overrides.$f.is_some() { self.$f = overrides.$f; } )* };
        }
        take!(variant, source, d, threshold_rule, trial_period, steps, seed, table_path, burn_in, naming_threshold);
        if let Some(o) = overrides.outputs {
            let mut out = self.outputs.take().unwrap_or_default();
            if o.summary.is_some() {
                out.summary = o.summary;
            }
            if o.trace.is_some() {
                out.trace = o.trace;
            }
            if o.transitions.is_some() {
                out.transitions = o.transitions;
            }
            self.outputs = Some(out);
        }
        self
    }

    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let missing = |k: &str| Error::config(format!("missing required key `{k}`"));
        let variants = self
            .variant
            .as_ref()
            .ok_or_else(|| missing("variant"))?
            .items()
            .into_iter()
            .map(|s| s.parse::<Variant>().map_err(|e| Error::config(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let sources = self
            .source
            .as_ref()
            .ok_or_else(|| missing("source"))?
            .items()
            .into_iter()
            .map(|s| s.parse::<SourceSpec>().map_err(|e| Error::config(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        if variants.is_empty() || sources.is_empty() {
            return Err(Error::config("variant and source must name at least one value"));
        }
        let ms = match (&self.m, &self.m_range) {
            (Some(_), Some(_)) => return Err(Error::config("set only one of `m` and `m_range`")),
            (Some(0), None) => return Err(Error::config("m must be at least 1")),
            (Some(m), None) => vec![*m],
            (None, Some(r)) => r.values()?,
            (None, None) => return Err(missing("m")),
        };
        let seed = self.seed.ok_or_else(|| missing("seed"))?;
        let threshold = self.d.unwrap_or(DEFAULT_THRESHOLD);
        if !threshold.is_finite() {
            return Err(Error::config("d must be finite"));
        }
        let threshold_rule = match &self.threshold_rule {
            Some(r) => r.parse::<ThresholdRule>().map_err(|e| Error::config(e.to_string()))?,
            None => ThresholdRule::default(),
        };
        if self.trial_period == Some(0) {
            return Err(Error::config("trial_period must be at least 1"));
        }
        let steps = self.steps.unwrap_or(DEFAULT_STEPS);
        if steps == 0 {
            return Err(Error::config("steps must be at least 1"));
        }
        let naming_threshold = self.naming_threshold.unwrap_or(DEFAULT_NAMING_THRESHOLD);
        if !(0.0..=1.0).contains(&naming_threshold) {
            return Err(Error::config("naming_threshold must lie in [0, 1]"));
        }
        Ok(ResolvedConfig {
            variants,
            sources,
            ms,
            threshold,
            threshold_rule,
            trial_period: self.trial_period,
            steps,
            seed,
            table_path: self.table_path.clone(),
            burn_in: self.burn_in.unwrap_or(0),
            outputs: self.outputs.clone().unwrap_or_default(),
            naming_threshold,
        })
    }
}

/// A configuration with defaults applied and values checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub variants: Vec<Variant>,
    pub sources: Vec<SourceSpec>,
    pub ms: Vec<u32>,
    pub threshold: f64,
    pub threshold_rule: ThresholdRule,
    /// `None` means Y = m.
    pub trial_period: Option<u32>,
    pub steps: u64,
    pub seed: u64,
    /// `None` selects the bundled reference table.
    pub table_path: Option<PathBuf>,
    pub burn_in: u64,
    pub outputs: Outputs,
    pub naming_threshold: f64,
}

/// One (m, variant, source) simulation of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub m: u32,
    pub variant: Variant,
    pub source: SourceSpec,
}

impl Cell {
    /// Seed of this cell's random stream; independent of which other cells
    /// exist.
    pub fn seed(&self, master: u64) -> u64 {
        let variant_key = match self.variant {
            Variant::Classical => 0,
            Variant::Quantum => 1,
        };
        derive_seed(master, &[u64::from(self.m), variant_key, self.source.key()])
    }
}

impl ResolvedConfig {
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &variant in &self.variants {
            for &source in &self.sources {
                for &m in &self.ms {
                    cells.push(Cell { m, variant, source });
                }
            }
        }
        cells
    }

    pub fn single_cell(&self) -> Result<Cell> {
        match self.cells().as_slice() {
            [cell] => Ok(*cell),
            cells => Err(Error::config(format!(
                "this command runs exactly one (m, variant, source) cell, configuration names {}",
                cells.len()
            ))),
        }
    }

    pub fn evolution_config(&self, cell: Cell, table: PayoffTable, allow_invalid_table: bool) -> EvolutionConfig {
        EvolutionConfig {
            memory: cell.m,
            threshold: self.threshold,
            threshold_rule: self.threshold_rule,
            trial_period: self.trial_period.unwrap_or(cell.m),
            steps: self.steps,
            seed: cell.seed(self.seed),
            variant: cell.variant,
            source: cell.source,
            table,
            burn_in: self.burn_in,
            allow_invalid_table,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_document() {
        let cfg = RunConfigFile::parse(
            r#"
            variant = ["classical", "quantum"]
            source = "0,1"
            m_range = "1..50"
            d = 3.0
            steps = 1000
            seed = 9
            burn_in = 10
            naming_threshold = 0.02
            outputs.summary = "out/summary.csv"
            "#,
        )
        .unwrap();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.variants, vec![Variant::Classical, Variant::Quantum]);
        assert_eq!(r.sources, vec![SourceSpec::ZERO, SourceSpec::ONE]);
        assert_eq!(r.ms.len(), 50);
        assert_eq!(r.cells().len(), 200);
        assert_eq!(r.outputs.summary, Some(PathBuf::from("out/summary.csv")));
        assert_eq!(r.trial_period, None);
    }

    #[test]
    fn defaults_applied() {
        let r = RunConfigFile::parse("variant='quantum'\nsource='0'\nm=7\nseed=1\n")
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(r.threshold, 3.0);
        assert_eq!(r.steps, 10_000_000);
        assert_eq!(r.burn_in, 0);
        let cfg = r.evolution_config(r.single_cell().unwrap(), PayoffTable::reference(), false);
        assert_eq!(cfg.trial_period, 7);
    }

    #[test]
    fn rejects_unknown_and_missing_keys() {
        assert!(matches!(RunConfigFile::parse("variant='quantum'\ncolour='red'\n"), Err(Error::Config(_))));
        assert!(matches!(RunConfigFile::parse("outputs.plot='x'\n"), Err(Error::Config(_))));
        let no_seed = RunConfigFile::parse("variant='quantum'\nsource='0'\nm=3\n").unwrap();
        assert!(matches!(no_seed.resolve(), Err(Error::Config(_))));
        let no_m = RunConfigFile::parse("variant='quantum'\nsource='0'\nseed=3\n").unwrap();
        assert!(no_m.resolve().is_err());
        let both = RunConfigFile::parse("variant='q'\nsource='0'\nseed=3\nm=2\nm_range='1..3'\n").unwrap();
        assert!(both.resolve().is_err());
    }

    #[test]
    fn threshold_rule_key() {
        let base = "variant='quantum'\nsource='0'\nm=3\nseed=1\n";
        let r = RunConfigFile::parse(base).unwrap().resolve().unwrap();
        assert_eq!(r.threshold_rule, ThresholdRule::Inclusive);
        let strict = RunConfigFile::parse(&format!("{base}threshold_rule='strict'\n")).unwrap().resolve().unwrap();
        assert_eq!(strict.threshold_rule, ThresholdRule::Strict);
        let cfg = strict.evolution_config(strict.single_cell().unwrap(), PayoffTable::reference(), false);
        assert_eq!(cfg.threshold_rule, ThresholdRule::Strict);
        let bad = RunConfigFile::parse(&format!("{base}threshold_rule='loose'\n")).unwrap();
        assert!(matches!(bad.resolve(), Err(Error::Config(_))));
    }

    #[test]
    fn m_range_forms() {
        assert_eq!(MRange::Spec("3..=5".into()).values().unwrap(), vec![3, 4, 5]);
        assert_eq!(MRange::Spec("4, 15,30".into()).values().unwrap(), vec![4, 15, 30]);
        assert_eq!(MRange::List(vec![1, 2]).values().unwrap(), vec![1, 2]);
        assert!(MRange::Spec("5..3".into()).values().is_err());
        assert!(MRange::Spec("0..3".into()).values().is_err());
        assert!(MRange::List(vec![2, 2]).values().is_err());
        assert!(MRange::Spec("1..4294967295".into()).values().is_err());
        assert_eq!(MRange::Spec("1..10000".into()).values().unwrap().len(), MAX_M_VALUES);
    }

    #[test]
    fn overrides_win() {
        let base = RunConfigFile::parse("variant='quantum'\nsource='0'\nm_range='1..4'\nseed=3\n").unwrap();
        let merged = base.merge(RunConfigFile {
            m: Some(9),
            seed: Some(4),
            ..Default::default()
        });
        let r = merged.resolve().unwrap();
        assert_eq!(r.ms, vec![9]);
        assert_eq!(r.seed, 4);
    }

    #[test]
    fn cell_seeds_are_stable_and_distinct() {
        let a = Cell { m: 30, variant: Variant::Quantum, source: SourceSpec::ZERO };
        let b = Cell { m: 30, variant: Variant::Quantum, source: SourceSpec::ONE };
        let c = Cell { m: 30, variant: Variant::Classical, source: SourceSpec::ZERO };
        assert_eq!(a.seed(1), a.seed(1));
        assert_ne!(a.seed(1), b.seed(1));
        assert_ne!(a.seed(1), c.seed(1));
        assert_ne!(a.seed(1), a.seed(2));
    }
}
