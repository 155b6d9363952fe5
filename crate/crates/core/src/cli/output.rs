//! CSV writers. All numbers go through [`format_sig`] so files are
//! locale-independent and byte-stable across runs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::analysis::{SweepResult, SweepRow, TransitionGraph};
use crate::error::{Error, Result};
use crate::evolve::RoundRecord;

use super::commands::StaticTableRow;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `%.12g`-style rendering: 12 significant digits, trailing zeros trimmed,
/// exponent form only for very large or small magnitudes.
pub fn format_sig(x: f64) -> String {
    format_sig_digits(x, SIGNIFICANT_DIGITS)
}

pub fn format_sig_digits(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let digits = digits.max(1);
    // Round first so the exponent reflects the rounded value (9.9999… → 10).
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn optional(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

pub const SUMMARY_HEADER: [&str; 8] = [
    "m",
    "variant",
    "source",
    "seed",
    "steps",
    "mean_total_payout",
    "mean_lifetime",
    "mutation_count",
];

fn summary_record(row: &SweepRow) -> [String; 8] {
    [
        row.m.to_string(),
        row.variant.to_string(),
        row.source.to_string(),
        row.seed.to_string(),
        row.steps.to_string(),
        format_sig(row.mean_total_payout),
        optional(row.mean_lifetime),
        row.mutation_count.to_string(),
    ]
}

pub fn write_summary<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(SUMMARY_HEADER)?;
    for row in rows {
        out.write_record(summary_record(row))?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_summary_file(path: &Path, result: &SweepResult) -> Result<()> {
    write_summary(create(path)?, result.rows())
}

pub fn write_transitions<W: Write>(w: W, graph: &TransitionGraph) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["from", "to", "count", "probability"])?;
    for (from, to, count, p) in graph.edges() {
        out.write_record([from.to_string(), to.to_string(), count.to_string(), format_sig(p)])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_transitions_file(path: &Path, graph: &TransitionGraph) -> Result<()> {
    write_transitions(create(path)?, graph)
}

pub fn write_static_table<W: Write>(w: W, rows: &[StaticTableRow]) -> Result<()> {
    let mut out = csv_writer(w);
    let mut header = vec!["variant".to_string(), "class".into(), "representative".into(), "multiplicity".into()];
    for input in ["s0", "s1", "mix"] {
        for player in 1..=3 {
            header.push(format!("e{player}_{input}"));
        }
    }
    header.extend(["avg_s0".into(), "avg_s1".into(), "avg_mix".into()]);
    out.write_record(&header)?;
    for row in rows {
        let mut rec = vec![
            row.variant.to_string(),
            row.class.to_string(),
            row.representative.to_string(),
            row.multiplicity.to_string(),
        ];
        for e in [row.source0, row.source1, row.mix] {
            rec.extend(e.iter().map(|&v| format_sig(v)));
        }
        rec.extend(row.average.iter().map(|&v| format_sig(v)));
        out.write_record(&rec)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_static_table_file(path: &Path, rows: &[StaticTableRow]) -> Result<()> {
    write_static_table(create(path)?, rows)
}

/// Per-round trace: t, profile, outcome bits, payoffs, mutation flags.
pub struct TraceWriter<W: Write> {
    out: csv::Writer<W>,
}

impl TraceWriter<BufWriter<File>> {
    pub fn create(path: &Path) -> Result<Self> {
        TraceWriter::new(create(path)?)
    }
}

impl<W: Write> TraceWriter<W> {
    pub fn new(w: W) -> Result<Self> {
        let mut out = csv_writer(w);
        out.write_record(["t", "profile", "outcome", "pay1", "pay2", "pay3", "mut1", "mut2", "mut3"])?;
        Ok(TraceWriter { out })
    }

    pub fn write(&mut self, rec: &RoundRecord) -> Result<()> {
        let flag = |b: bool| if b { "1" } else { "0" }.to_string();
        self.out.write_record([
            rec.t.to_string(),
            rec.profile.to_string(),
            format!("{:03b}", rec.outcome),
            format_sig(rec.payoffs[0]),
            format_sig(rec.payoffs[1]),
            format_sig(rec.payoffs[2]),
            flag(rec.mutated[0]),
            flag(rec.mutated[1]),
            flag(rec.mutated[2]),
        ])?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}
