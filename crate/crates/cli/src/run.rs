//! Runs a validated experiment and writes `table.csv` and `report.json`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use b3fem::analysis::{ConvergenceTable, OrderMode};
use b3fem::problems::{
    bihar_matrices, solve_bihar_evp, solve_tep, tep_matrices, ProblemKind, Scheme, SourceExample, SourceSolution,
    SpectrumSolution,
};
use b3fem::{assembly, build_dofmap_for, CoefficientField, SparseMatrix};
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::CliError;

#[derive(Debug, Serialize)]
#[serde(rename_all = "snake_case")]
enum LevelOutcome {
    Source(SourceSolution),
    Spectrum(SpectrumSolution),
    Error(String),
}

#[derive(Debug, Serialize)]
struct LevelRecord {
    level: usize,
    subdivisions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    seconds: f64,
    #[serde(flatten)]
    outcome: LevelOutcome,
}

#[derive(Debug, Serialize)]
struct TableRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    final_orders: Vec<Option<f64>>,
    table: ConvergenceTable,
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    config: &'a ExperimentConfig,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    total_seconds: f64,
    levels: Vec<LevelRecord>,
    tables: Vec<TableRecord>,
}

/// Paths of the files a run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: PathBuf,
    pub report: PathBuf,
}

struct Runner<'a> {
    config: &'a ExperimentConfig,
    dump: Option<&'a Path>,
    started: Instant,
    levels: Vec<LevelRecord>,
    tables: Vec<(Option<f64>, ConvergenceTable)>,
}

fn columns(config: &ExperimentConfig) -> (Vec<String>, OrderMode) {
    let k = config.num_eigs;
    match config.kind {
        ExperimentKind::Source => {
            (["h2_error", "h1_error", "l2_error"].map(String::from).to_vec(), OrderMode::KnownExact)
        }
        ExperimentKind::Tep => ((1..=k).map(|i| format!("sqrt_tau_{i}")).collect(), OrderMode::Successive),
        ExperimentKind::BiharEvp => ((1..=k).map(|i| format!("lambda_{i}")).collect(), OrderMode::Successive),
        ExperimentKind::MorleySweep => {
            let prefix = if config.problem == Some(ProblemKind::Tep) { "sqrt_tau" } else { "lambda" };
            ((1..=k).map(|i| format!("{prefix}_{i}")).collect(), OrderMode::Successive)
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn dump_matrix(dir: &Path, stem: &str, m: &SparseMatrix) -> Result<(), CliError> {
    let path = dir.join(format!("{stem}.mtx"));
    let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
    let mut w = BufWriter::new(file);
    m.write_matrix_market(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(&path, e))
}

impl<'a> Runner<'a> {
    fn solve_level(&self, n: usize, scheme: Scheme, coeff: Option<&CoefficientField>) -> LevelOutcome {
        let c = self.config;
        let problem = match c.kind {
            ExperimentKind::Source => None,
            ExperimentKind::BiharEvp => Some(ProblemKind::Bihar),
            ExperimentKind::Tep => Some(ProblemKind::Tep),
            ExperimentKind::MorleySweep => c.problem,
        };
        let result = match (problem, coeff) {
            (Some(ProblemKind::Bihar), Some(delta)) => {
                solve_bihar_evp(c.domain, n, delta, c.num_eigs, scheme, &c.solver).map(LevelOutcome::Spectrum)
            }
            (Some(ProblemKind::Tep), Some(index)) => {
                solve_tep(c.domain, n, index, c.num_eigs, scheme, &c.solver).map(LevelOutcome::Spectrum)
            }
            _ => SourceExample::numbered(c.source_example.unwrap_or(0))
                .and_then(|ex| ex.solve(n))
                .map(LevelOutcome::Source),
        };
        result.unwrap_or_else(|e| LevelOutcome::Error(e.to_string()))
    }

    fn dump_level(
        &self,
        level: usize,
        n: usize,
        scheme: Scheme,
        coeff: Option<&CoefficientField>,
    ) -> Result<(), CliError> {
        let Some(dir) = self.dump else { return Ok(()) };
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let c = self.config;
        let solver = |e: b3fem::Error| CliError::Solver(e.to_string());
        let mesh = c.domain.build(n).map_err(solver)?;
        let map = build_dofmap_for(&mesh, scheme.element());
        let stem = match scheme.alpha() {
            Some(a) => format!("level{level}_n{n}_alpha{a}"),
            None => format!("level{level}_n{n}"),
        };
        match (c.kind, c.problem, coeff) {
            (ExperimentKind::Tep, _, Some(index))
            | (ExperimentKind::MorleySweep, Some(ProblemKind::Tep), Some(index)) => {
                let m = tep_matrices(&mesh, &map, index, scheme).map_err(solver)?;
                dump_matrix(dir, &format!("{stem}_A"), &m.a)?;
                dump_matrix(dir, &format!("{stem}_B"), &m.b)?;
                dump_matrix(dir, &format!("{stem}_C"), &m.c)?;
            }
            (_, _, Some(delta)) => {
                let (stiffness, mass) = bihar_matrices(&mesh, &map, delta, scheme).map_err(solver)?;
                dump_matrix(dir, &format!("{stem}_stiffness"), &stiffness)?;
                dump_matrix(dir, &format!("{stem}_mass"), &mass)?;
            }
            (_, _, None) => {
                let ex = SourceExample::numbered(c.source_example.unwrap_or(0)).map_err(solver)?;
                let stiffness = assembly::assemble_bilaplace(&mesh, &map, &ex.delta).map_err(solver)?;
                dump_matrix(dir, &format!("{stem}_stiffness"), &stiffness)?;
            }
        }
        Ok(())
    }

    /// Runs every level of one table; returns the first error message.
    fn run_table(&mut self, alpha: Option<f64>, coeff: Option<&CoefficientField>) -> Result<Option<String>, CliError> {
        let c = self.config;
        let scheme = alpha.map_or(c.scheme, |alpha| Scheme::Morley { alpha });
        let (names, mode) = columns(c);
        let mut table = ConvergenceTable::new(names, mode);
        let mut failure = None;
        for (i, n) in c.ladder().into_iter().enumerate() {
            let level = i + 1;
            self.dump_level(level, n, scheme, coeff)?;
            let t0 = Instant::now();
            let outcome = self.solve_level(n, scheme, coeff);
            let seconds = t0.elapsed().as_secs_f64();
            match &outcome {
                LevelOutcome::Source(s) => {
                    table.push(s.h, s.dofs, &s.errors.as_ref().map(|e| e.as_array().to_vec()).unwrap_or_default())
                }
                LevelOutcome::Spectrum(s) => table.push(s.h, s.dofs, s.reported()),
                LevelOutcome::Error(msg) => {
                    failure.get_or_insert_with(|| msg.clone());
                }
            }
            let tag = alpha.map(|a| format!(" alpha={a}")).unwrap_or_default();
            let status = if let LevelOutcome::Error(msg) = &outcome { format!("failed: {msg}") } else { "done".into() };
            eprintln!("{}{tag}: level {level} (n = {n}) {status} in {seconds:.2} s", c.name);
            let failed = matches!(outcome, LevelOutcome::Error(_));
            self.levels.push(LevelRecord { level, subdivisions: n, alpha, seconds, outcome });
            // a failed level breaks the ladder; a sweep moves on to the next alpha
            if failed {
                break;
            }
        }
        self.tables.push((alpha, table));
        Ok(failure)
    }

    fn csv(&self) -> String {
        match self.tables.as_slice() {
            [(None, t)] => t.to_csv(),
            tables => {
                let mut out = String::new();
                for (i, (alpha, t)) in tables.iter().enumerate() {
                    let a = alpha.map(|a| a.to_string()).unwrap_or_default();
                    for (j, line) in t.to_csv().lines().enumerate() {
                        match (i, j) {
                            (0, 0) => out.push_str(&format!("alpha,{line}\n")),
                            (_, 0) => {}
                            _ => out.push_str(&format!("{a},{line}\n")),
                        }
                    }
                }
                out
            }
        }
    }

    fn finish(self, error: Option<String>) -> Result<RunOutput, CliError> {
        let out = &self.config.out;
        let table = out.join("table.csv");
        let report_path = out.join("report.json");
        write_file(&table, &self.csv())?;
        let report = Report {
            config: self.config,
            status: if error.is_some() { "failed" } else { "ok" },
            error: error.clone(),
            total_seconds: self.started.elapsed().as_secs_f64(),
            levels: self.levels,
            tables: self
                .tables
                .into_iter()
                .map(|(alpha, table)| TableRecord { alpha, final_orders: table.last_orders(), table })
                .collect(),
        };
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        write_file(&report_path, &(json + "\n"))?;
        match error {
            Some(msg) => Err(CliError::Solver(msg)),
            None => Ok(RunOutput { table, report: report_path }),
        }
    }
}

/// Validates `config`, solves every level and writes the output files. On a
/// solver failure the completed levels are still written before the error
/// is returned.
pub fn run(config: &ExperimentConfig, dump: Option<&Path>) -> Result<RunOutput, CliError> {
    config.validate()?;
    let coeff = match config.kind {
        ExperimentKind::Source => None,
        _ => Some(config.coefficient_field()?),
    };
    fs::create_dir_all(&config.out).map_err(|e| CliError::io(&config.out, e))?;
    let mut runner = Runner { config, dump, started: Instant::now(), levels: Vec::new(), tables: Vec::new() };
    let mut first_error = None;
    if config.kind == ExperimentKind::MorleySweep {
        for &alpha in &config.alphas {
            let e = runner.run_table(Some(alpha), coeff.as_ref())?;
            first_error = first_error.or(e);
        }
    } else {
        first_error = runner.run_table(None, coeff.as_ref())?;
    }
    runner.finish(first_error)
}
