use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::analysis::{attractor_transitions_with_phase, SweepResult, SweepRow, TransitionGraph};
use crate::error::{Error, Result};
use crate::evolve::{run_with, RunSummary};
use crate::game::{
    enumerate_profile_classes, expected_payoffs, find_equilibria, CheckedTable, EquilibriumReport,
    PayoffTable, SourceBit, SourceSpec, StrategyProfile, Variant, NUM_PLAYERS,
};

use super::config::{Cell, ResolvedConfig};
use super::output::{self, format_sig_digits, TraceWriter};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const TABLE_FORMAT: i32 = 3;
    pub const TABLE_CONSTRAINT: i32 = 4;
    pub const RUNTIME: i32 = 5;
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Argument(_) => exit::CONFIG,
        Error::TableFormat { .. } => exit::TABLE_FORMAT,
        Error::InvalidTable(_) => exit::TABLE_CONSTRAINT,
        Error::Validation(_) | Error::Io { .. } | Error::Csv(_) => exit::RUNTIME,
    }
}

/// Loads a payoff table (the bundled reference table when `path` is
/// `None`) and validates it. Constraint failures are fatal unless
/// `allow_invalid` is set, in which case they are only reported on stderr.
pub fn load_table(path: Option<&Path>, allow_invalid: bool) -> Result<CheckedTable> {
    let table = match path {
        Some(p) => PayoffTable::load(p).map_err(|e| match e {
            Error::Io { path, source } => Error::TableFormat {
                line: None,
                message: format!("cannot read {}: {source}", path.display()),
            },
            other => other,
        })?,
        None => PayoffTable::reference(),
    };
    if allow_invalid {
        let checked = CheckedTable::bypass(table);
        if !checked.report().passed() {
            eprintln!("warning: payoff table fails validation, continuing as requested");
            for f in checked.report().failures() {
                eprintln!("  {f}");
            }
        }
        Ok(checked)
    } else {
        CheckedTable::new(table)
    }
}

fn sweep_row(cell: Cell, master_seed: u64, steps: u64, summary: &RunSummary) -> SweepRow {
    SweepRow {
        m: cell.m,
        variant: cell.variant,
        source: cell.source,
        seed: master_seed,
        steps,
        mean_total_payout: summary.mean_total_payout,
        mean_lifetime: summary.mean_lifetime,
        mutation_count: summary.mutation_count,
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub cell: Cell,
    pub summary: RunSummary,
    pub transitions: Option<TransitionGraph>,
}

/// Runs the configuration's single cell, writing whichever outputs are
/// configured. The transition graph is built when `outputs.transitions` is
/// set or `force_transitions` is true.
pub fn cmd_run(
    config: &ResolvedConfig,
    table: &CheckedTable,
    phase: usize,
    force_transitions: bool,
) -> Result<RunOutput> {
    let cell = config.single_cell()?;
    let evo = config.evolution_config(cell, table.table().clone(), true);
    let want_graph = force_transitions || config.outputs.transitions.is_some();

    let mut trace = config.outputs.trace.as_deref().map(TraceWriter::create).transpose()?;
    let mut trace_err = None;
    let mut series: Vec<StrategyProfile> = Vec::new();
    if want_graph {
        series.reserve(evo.steps.min(1 << 26) as usize);
    }
    let summary = run_with(&evo, |rec| {
        if want_graph {
            series.push(rec.profile);
        }
        if let Some(t) = trace.as_mut() {
            if trace_err.is_none() {
                trace_err = t.write(rec).err();
            }
        }
    })?;
    if let Some(e) = trace_err {
        return Err(e);
    }
    if let Some(t) = trace {
        t.finish()?;
    }

    let transitions = if want_graph {
        let graph = attractor_transitions_with_phase(&series, cell.m as usize, config.naming_threshold, phase)?;
        if let Some(path) = &config.outputs.transitions {
            output::write_transitions_file(path, &graph)?;
        }
        Some(graph)
    } else {
        None
    };

    if let Some(path) = &config.outputs.summary {
        let result = SweepResult::new(vec![sweep_row(cell, config.seed, config.steps, &summary)])?;
        output::write_summary_file(path, &result)?;
    }
    Ok(RunOutput {
        cell,
        summary,
        transitions,
    })
}

fn partial_marker(summary: &Path) -> PathBuf {
    let mut name = summary.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".partial");
    summary.with_file_name(name)
}

/// Runs every (m, variant, source) cell on up to `jobs` threads and writes
/// `summary.csv`. If a cell fails, completed rows and the error go to a
/// `.partial` marker next to the summary path instead.
pub fn cmd_sweep(config: &ResolvedConfig, table: &CheckedTable, jobs: usize) -> Result<SweepResult> {
    let cells = config.cells();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::config(format!("cannot start {jobs} worker threads: {e}")))?;
    let results: Vec<(Cell, Result<RunSummary>)> = pool.install(|| {
        cells
            .par_iter()
            .map(|&cell| {
                let evo = config.evolution_config(cell, table.table().clone(), true);
                (cell, run_with(&evo, |_| {}))
            })
            .collect()
    });

    let mut rows = Vec::new();
    let mut first_err = None;
    for (cell, res) in results {
        match res {
            Ok(summary) => rows.push(sweep_row(cell, config.seed, config.steps, &summary)),
            Err(e) => {
                first_err.get_or_insert((cell, e));
            }
        }
    }
    if let Some((cell, err)) = first_err {
        if let Some(path) = &config.outputs.summary {
            let marker = partial_marker(path);
            let mut buf = Vec::new();
            output::write_summary(&mut buf, SweepResult::new(rows)?.rows())?;
            let note = format!(
                "# sweep aborted: cell m={} variant={} source={} failed: {err}\n",
                cell.m, cell.variant, cell.source
            );
            let mut contents = note.into_bytes();
            contents.extend(buf);
            std::fs::write(&marker, contents).map_err(|e| Error::io(&marker, e))?;
        }
        return Err(err);
    }
    let result = SweepResult::new(rows)?;
    if let Some(path) = &config.outputs.summary {
        output::write_summary_file(path, &result)?;
    }
    Ok(result)
}

/// One class row of the static expected-payoff table.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticTableRow {
    pub variant: Variant,
    /// 1-based position in the class enumeration.
    pub class: usize,
    pub representative: StrategyProfile,
    pub multiplicity: usize,
    pub source0: [f64; NUM_PLAYERS],
    pub source1: [f64; NUM_PLAYERS],
    pub mix: [f64; NUM_PLAYERS],
    /// Mean payoff per player for input 0, input 1 and the 50:50 mixture.
    pub average: [f64; 3],
}

pub fn cmd_static_table(variant: Variant, table: &CheckedTable) -> Vec<StaticTableRow> {
    enumerate_profile_classes()
        .into_iter()
        .enumerate()
        .map(|(i, class)| {
            let p = class.representative;
            let source0 = expected_payoffs(&p, SourceSpec::ZERO, variant, table);
            let source1 = expected_payoffs(&p, SourceSpec::ONE, variant, table);
            let mix = expected_payoffs(&p, SourceSpec::Mix50, variant, table);
            let mean = |e: [f64; 3]| e.iter().sum::<f64>() / 3.0;
            StaticTableRow {
                variant,
                class: i + 1,
                representative: p,
                multiplicity: class.multiplicity(),
                source0,
                source1,
                mix,
                average: [mean(source0), mean(source1), mean(mix)],
            }
        })
        .collect()
}

/// Aligned text: `(…)` input 0, `[…]` input 1, bare for the mixture.
pub fn render_static_table(rows: &[StaticTableRow]) -> String {
    let f = |x: f64| format_sig_digits(x, 4);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<9} {:<5} {:>2}  {:<22} {:<22} {:<22} {:<22}",
        "variant", "class", "C", "player 1", "player 2", "player 3", "average"
    );
    for r in rows {
        let cell = |i: usize| format!("({}) [{}] {}", f(r.source0[i]), f(r.source1[i]), f(r.mix[i]));
        let avg = format!("({}) [{}] {}", f(r.average[0]), f(r.average[1]), f(r.average[2]));
        let _ = writeln!(
            out,
            "{:<9} {:<5} {:>2}  {:<22} {:<22} {:<22} {:<22}   {}",
            r.variant.name(),
            r.class,
            r.multiplicity,
            cell(0),
            cell(1),
            cell(2),
            avg,
            r.representative
        );
    }
    out
}

pub fn cmd_equilibria(variant: Variant, s: SourceBit, table: &CheckedTable) -> EquilibriumReport {
    find_equilibria(variant, s, table)
}

pub fn render_equilibria(report: &EquilibriumReport) -> String {
    let f = |x: f64| format_sig_digits(x, 6);
    let mut out = String::new();
    let _ = writeln!(out, "variant {} source {}", report.variant, report.source.bit());
    for (i, d) in report.dominant.iter().enumerate() {
        let text = d.map_or("none".to_string(), |m| format!("p={m}"));
        let _ = writeln!(out, "dominant move, player {}: {text}", i + 1);
    }
    match report.dse {
        Some(p) => {
            let e = report.payoffs[p.index()];
            let _ = writeln!(out, "dominant strategy equilibrium: {p} pays ({}, {}, {})", f(e[0]), f(e[1]), f(e[2]));
        }
        None => {
            let _ = writeln!(out, "dominant strategy equilibrium: none");
        }
    }
    let _ = writeln!(out, "pure Nash equilibria: {}", report.nash.len());
    for eq in &report.nash {
        let e = eq.payoffs;
        let _ = writeln!(
            out,
            "  {} pays ({}, {}, {}), total {}",
            eq.profile,
            f(e[0]),
            f(e[1]),
            f(e[2]),
            f(e.iter().sum())
        );
    }
    out
}

pub fn render_transitions(graph: &TransitionGraph, edge_threshold: f64) -> String {
    let f = |x: f64| format_sig_digits(x, 4);
    let mut out = String::new();
    let _ = writeln!(out, "{} samples, {} nodes", graph.samples(), graph.nodes().len());
    for &n in graph.nodes() {
        let _ = writeln!(out, "  {n:<12} occupancy {}", f(graph.occupancy(n)));
    }
    for (from, to, count, p) in graph.edges() {
        let _ = writeln!(out, "  {from:<12} -> {to:<12} {count:>8}  p={}", f(p));
    }
    let _ = writeln!(out, "attractors (edges with p >= {}):", f(edge_threshold));
    for members in graph.attractor_cycles(edge_threshold) {
        let names: Vec<_> = members.iter().map(ToString::to_string).collect();
        let kind = if members.len() > 1 { "cycle" } else { "fixed" };
        let _ = writeln!(out, "  {kind:<5} {}", names.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::RunConfigFile;
    use crate::game::Move::Flip;

    #[test]
    fn static_table_has_ten_rows_and_known_values() {
        let table = CheckedTable::reference();
        for variant in [Variant::Classical, Variant::Quantum] {
            let rows = cmd_static_table(variant, &table);
            assert_eq!(rows.len(), 10);
            for r in &rows {
                for i in 0..3 {
                    assert!((r.mix[i] - (r.source0[i] + r.source1[i]) / 2.0).abs() < 1e-12);
                }
            }
        }
        let rows = cmd_static_table(Variant::Classical, &table);
        let all_flip = rows
            .iter()
            .find(|r| r.representative == StrategyProfile::new(Flip, Flip, Flip))
            .unwrap();
        assert_eq!(all_flip.source0, [2.0; 3]);
        assert_eq!(all_flip.multiplicity, 1);
        assert!(render_static_table(&rows).lines().count() == 11);
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            exit_code(&Error::Config(String::new())),
            exit_code(&Error::TableFormat { line: None, message: String::new() }),
            exit_code(&Error::InvalidTable(Box::new(crate::game::validate_table(&PayoffTable::new([[0.0; 3]; 8]))))),
            exit_code(&Error::Validation(String::new())),
        ];
        let mut sorted = codes.to_vec();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 4);
        assert!(!codes.contains(&exit::SUCCESS));
    }

    #[test]
    fn sweep_rows_follow_cells() {
        let cfg = RunConfigFile::parse("variant='quantum,classical'\nsource='0'\nm_range='1..5'\nseed=4\nsteps=200\n")
            .unwrap()
            .resolve()
            .unwrap();
        let res = cmd_sweep(&cfg, &CheckedTable::reference(), 2).unwrap();
        assert_eq!(res.rows().len(), 10);
        assert_eq!(res.rows()[0].variant, Variant::Classical);
        let again = cmd_sweep(&cfg, &CheckedTable::reference(), 1).unwrap();
        assert_eq!(res, again);
    }

    #[test]
    fn run_needs_a_single_cell() {
        let cfg = RunConfigFile::parse("variant='quantum'\nsource='0,1'\nm=3\nseed=4\nsteps=20\n")
            .unwrap()
            .resolve()
            .unwrap();
        assert!(matches!(cmd_run(&cfg, &CheckedTable::reference(), 0, false), Err(Error::Config(_))));
    }
}
