//! Command implementations behind the `sc3` binary: run a scenario, write
//! CSV tables (the contract) and SVG charts (a convenience).
//!
//! Every CSV starts with `# ` metadata lines carrying the tool version, the
//! scenario hash, the seed and the full normalized scenario, which is enough
//! to re-run it. Numbers use 17 significant digits and `inf` for infeasible.

pub mod svg;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::optimize::{
    contour_results, power_sweep, AllocationResult, Decision, MultiScheme, OptimizeError, SingleObjective,
    SolveStatus,
};
use crate::scenario::{load_scenario, Scenario, ScenarioError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("solver: {0}")]
    Optimize(#[from] OptimizeError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ReportError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ReportError::Scenario(_) | ReportError::Optimize(_) => 2,
            ReportError::Io { .. } => 4,
        }
    }
}

pub const EXIT_NON_CONVERGENT: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    CsvSvg,
}

/// What a command produced. Non-convergence is not an error: outputs are
/// still written, and the exit code reports it.
#[derive(Debug, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub non_converged: Vec<String>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.non_converged.is_empty() {
            0
        } else {
            EXIT_NON_CONVERGENT
        }
    }

    fn note(&mut self, label: String, r: &AllocationResult) {
        match r.status {
            SolveStatus::Converged => {}
            SolveStatus::AllInfeasible => self.warnings.push(format!("{label}: no feasible allocation")),
            SolveStatus::NonConvergent => self.non_converged.push(label),
        }
    }
}

/// Locale-independent, 17 significant digits; `inf` for infeasible values.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

pub fn scenario_hash(scenario: &Scenario) -> String {
    Sha256::digest(scenario.dump().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Metadata block (without comment markers).
pub fn metadata(scenario: &Scenario, command: &str) -> String {
    let mut m = String::new();
    let _ = writeln!(m, "tool: sc3 {VERSION}");
    let _ = writeln!(m, "command: {command}");
    let _ = writeln!(m, "scenario: {}", scenario.name);
    let _ = writeln!(m, "scenario_sha256: {}", scenario_hash(scenario));
    let _ = writeln!(m, "seed: {}", scenario.seed);
    if let Ok(e) = scenario.robot_elevations() {
        let list: Vec<String> = e.iter().map(|v| fmt_num(*v)).collect();
        let _ = writeln!(m, "robot_elevations_deg: {}", list.join(" "));
    }
    for (k, v) in scenario.assumed_defaults_in_use() {
        let _ = writeln!(m, "assumed default: {k} = {v}");
    }
    let _ = writeln!(m, "resolved scenario:");
    for line in scenario.dump().lines() {
        if line.is_empty() {
            m.push('\n');
        } else {
            let _ = writeln!(m, "  {line}");
        }
    }
    m
}

fn csv_header(meta: &str) -> String {
    meta.lines()
        .map(|l| {
            if l.is_empty() {
                "#\n".to_string()
            } else {
                format!("# {l}\n")
            }
        })
        .collect()
}

fn write_file(path: &Path, body: &str, summary: &mut RunSummary) -> Result<(), ReportError> {
    std::fs::write(path, body).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    summary.files.push(path.to_path_buf());
    Ok(())
}

fn prepare_dir(out: &Path) -> Result<(), ReportError> {
    std::fs::create_dir_all(out).map_err(|source| ReportError::Io {
        path: out.to_path_buf(),
        source,
    })
}

fn lqr_value(r: &AllocationResult) -> f64 {
    r.lqr.or_inf()
}

#[derive(Debug, Serialize)]
struct SchemeSummary {
    label: String,
    objective_value: f64,
    lqr: Option<f64>,
    status: String,
    iterations: usize,
    converged: bool,
}

impl SchemeSummary {
    fn new(label: String, r: &AllocationResult) -> Self {
        Self {
            label,
            objective_value: r.objective_value,
            lqr: r.lqr.value(),
            status: format!("{:?}", r.status),
            iterations: r.trace.iterations,
            converged: r.trace.converged,
        }
    }
}

#[derive(Debug, Serialize)]
struct RunRecord<'a> {
    tool_version: &'static str,
    command: &'a str,
    scenario_sha256: String,
    seed: u64,
    resolved_scenario: String,
    results: Vec<SchemeSummary>,
    wall_clock_s: f64,
}

fn write_record(
    out: &Path,
    scenario: &Scenario,
    command: &str,
    results: Vec<SchemeSummary>,
    started: Instant,
    summary: &mut RunSummary,
) -> Result<(), ReportError> {
    let record = RunRecord {
        tool_version: VERSION,
        command,
        scenario_sha256: scenario_hash(scenario),
        seed: scenario.seed,
        resolved_scenario: scenario.dump(),
        results,
        wall_clock_s: started.elapsed().as_secs_f64(),
    };
    let body = serde_json::to_string_pretty(&record).expect("run record serializes") + "\n";
    write_file(&out.join(format!("{command}.run.json")), &body, summary)
}

/// Uplink/downlink bandwidth split under every single-loop scheme.
pub fn cmd_single_loop(scenario: &Scenario, out: &Path, format: Format) -> Result<RunSummary, ReportError> {
    let started = Instant::now();
    prepare_dir(out)?;
    let base = scenario.single_loop_problem()?;
    let meta = metadata(scenario, "single-loop");
    let mut summary = RunSummary::default();
    let mut csv = csv_header(&meta);
    csv.push_str("scheme,B_up_hz,B_down_hz,R_up_bps,R_down_bps,t_up_s,t_comp_s,t_down_s,effective_bits,CNER_bps,LQR,stable,status\n");
    let mut bars = Vec::new();
    let mut records = Vec::new();
    for obj in SingleObjective::ALL {
        let r = base.with_objective(obj).solve();
        let Decision::Bandwidth {
            uplink_hz,
            downlink_hz,
            ..
        } = r.decision
        else {
            unreachable!("single-loop decisions are bandwidth splits")
        };
        let o = &r.per_loop_outcomes[0];
        let cols = [
            uplink_hz,
            downlink_hz,
            o.uplink_rate_bps,
            o.downlink_rate_bps,
            o.t_up_s,
            o.t_comp_s,
            o.t_down_s,
            o.effective_bits_per_cycle,
            o.cner_bps,
            lqr_value(&r),
        ];
        let nums: Vec<String> = cols.iter().map(|v| fmt_num(*v)).collect();
        let _ = writeln!(
            csv,
            "{},{},{},{:?}",
            obj.name(),
            nums.join(","),
            o.stable,
            r.status
        );
        summary.note(obj.name().to_string(), &r);
        bars.push((obj.name().to_string(), lqr_value(&r)));
        records.push(SchemeSummary::new(obj.name().to_string(), &r));
    }
    write_file(&out.join("single_loop.csv"), &csv, &mut summary)?;
    if format == Format::CsvSvg {
        let chart = svg::bar_chart(
            &meta,
            "Single-loop LQR cost by bandwidth allocation scheme",
            "LQR cost",
            &bars,
        );
        write_file(&out.join("single_loop.svg"), &chart, &mut summary)?;
    }
    write_record(out, scenario, "single-loop", records, started, &mut summary)?;
    Ok(summary)
}

/// Power sweep of every multi-loop scheme, plus the per-robot allocation at
/// the scenario's designated total power.
pub fn cmd_multi_loop(scenario: &Scenario, out: &Path, format: Format) -> Result<RunSummary, ReportError> {
    let started = Instant::now();
    prepare_dir(out)?;
    let problem = scenario.multi_loop_problem()?;
    let powers = scenario.sweeps.power_grid_w();
    let meta = metadata(scenario, "multi-loop");
    let mut summary = RunSummary::default();
    let mut records = Vec::new();

    let sweep = power_sweep(&problem, &powers)?;
    let mut csv = csv_header(&meta);
    let names: Vec<&str> = MultiScheme::ALL.iter().map(|s| s.name()).collect();
    let _ = writeln!(csv, "total_power_w,{}", names.join(","));
    for (p, row) in powers.iter().zip(&sweep) {
        let cols: Vec<String> = row.iter().map(|r| fmt_num(lqr_value(r))).collect();
        let _ = writeln!(csv, "{},{}", fmt_num(*p), cols.join(","));
        for (s, r) in MultiScheme::ALL.iter().zip(row) {
            let label = format!("{} @ {} W", s.name(), p);
            summary.note(label.clone(), r);
            records.push(SchemeSummary::new(label, r));
        }
    }
    write_file(&out.join("multi_loop_power_sweep.csv"), &csv, &mut summary)?;

    let at: Vec<AllocationResult> = MultiScheme::ALL
        .iter()
        .map(|&s| problem.with_scheme(s).solve())
        .collect();
    let elevations = scenario.robot_elevations()?;
    let mut alloc = csv_header(&meta);
    let _ = write!(alloc, "robot,elevation_deg");
    for key in ["power_w", "compute_cps", "effective_bits", "LQR"] {
        for n in &names {
            let _ = write!(alloc, ",{key}_{n}");
        }
    }
    alloc.push('\n');
    let decisions: Vec<(&[f64], &[f64])> = at
        .iter()
        .map(|r| match &r.decision {
            Decision::PowerCompute {
                powers_w,
                compute_cps,
            } => (powers_w.as_slice(), compute_cps.as_slice()),
            Decision::Bandwidth { .. } => unreachable!("multi-loop decisions are power/compute"),
        })
        .collect();
    for (i, e) in elevations.iter().enumerate() {
        let mut row = vec![fmt_num(*e)];
        row.extend(decisions.iter().map(|d| fmt_num(d.0[i])));
        row.extend(decisions.iter().map(|d| fmt_num(d.1[i])));
        row.extend(
            at.iter()
                .map(|r| fmt_num(r.per_loop_outcomes[i].effective_bits_per_cycle)),
        );
        row.extend(
            at.iter()
                .map(|r| fmt_num(r.per_loop_outcomes[i].lqr_cost.or_inf())),
        );
        let _ = writeln!(alloc, "{},{}", i + 1, row.join(","));
    }
    for (s, r) in MultiScheme::ALL.iter().zip(&at) {
        let label = format!("{} @ {} W (allocation)", s.name(), problem.total_power_w);
        summary.note(label.clone(), r);
        records.push(SchemeSummary::new(label, r));
    }
    write_file(&out.join("multi_loop_allocation.csv"), &alloc, &mut summary)?;

    if format == Format::CsvSvg {
        let series: Vec<svg::Series> = MultiScheme::ALL
            .iter()
            .enumerate()
            .map(|(k, s)| svg::Series {
                name: s.name().to_string(),
                points: powers
                    .iter()
                    .zip(&sweep)
                    .map(|(p, row)| (*p, lqr_value(&row[k])))
                    .collect(),
            })
            .collect();
        let chart = svg::line_chart(
            &meta,
            "Multi-loop LQR cost vs total transmit power",
            "total power (W)",
            "total LQR cost",
            &series,
        );
        write_file(&out.join("multi_loop_power_sweep.svg"), &chart, &mut summary)?;
        let groups: Vec<String> = (1..=elevations.len()).map(|i| format!("robot {i}")).collect();
        let bars: Vec<(String, Vec<f64>)> = names
            .iter()
            .zip(&decisions)
            .map(|(n, d)| (n.to_string(), d.0.to_vec()))
            .collect();
        let title = format!("Transmit power allocation at {} W", problem.total_power_w);
        let chart = svg::grouped_bars(&meta, &title, "power (W)", &groups, &bars);
        write_file(&out.join("multi_loop_allocation.svg"), &chart, &mut summary)?;
    }
    write_record(out, scenario, "multi-loop", records, started, &mut summary)?;
    Ok(summary)
}

/// Task-oriented total LQR cost over the power x compute grid.
pub fn cmd_contour(scenario: &Scenario, out: &Path, format: Format) -> Result<RunSummary, ReportError> {
    let started = Instant::now();
    prepare_dir(out)?;
    let problem = scenario.multi_loop_problem()?;
    let powers = scenario.sweeps.power_grid_w();
    let compute = scenario.sweeps.compute_grid_cps();
    let meta = metadata(scenario, "contour");
    let mut summary = RunSummary::default();
    let results = contour_results(&problem, &powers, &compute)?;
    let mut records = Vec::new();

    let mut csv = csv_header(&meta);
    csv.push_str("# rows: total_power_w, columns: total_compute_cps\n");
    let cols: Vec<String> = compute.iter().map(|c| fmt_num(*c)).collect();
    let _ = writeln!(csv, "total_power_w,{}", cols.join(","));
    let mut z = Vec::with_capacity(powers.len());
    for (p, row) in powers.iter().zip(&results) {
        let values: Vec<f64> = row.iter().map(|r| r.objective_value).collect();
        let cells: Vec<String> = values.iter().map(|v| fmt_num(*v)).collect();
        let _ = writeln!(csv, "{},{}", fmt_num(*p), cells.join(","));
        for (c, r) in compute.iter().zip(row) {
            let label = format!("task_oriented_joint @ {p} W, {c} cps");
            summary.note(label.clone(), r);
            records.push(SchemeSummary::new(label, r));
        }
        z.push(values);
    }
    write_file(&out.join("contour.csv"), &csv, &mut summary)?;
    if format == Format::CsvSvg {
        let gcps: Vec<f64> = compute.iter().map(|c| c / 1e9).collect();
        let chart = svg::contour(
            &meta,
            "Task-oriented LQR cost over power and compute",
            "total compute (GC/s)",
            "total power (W)",
            &gcps,
            &powers,
            &z,
            12,
        );
        write_file(&out.join("contour.svg"), &chart, &mut summary)?;
    }
    write_record(out, scenario, "contour", records, started, &mut summary)?;
    Ok(summary)
}

/// Load a scenario file (or the defaults when `path` is `None`) and apply a
/// seed override.
pub fn load(path: Option<&Path>, seed: Option<u64>) -> Result<Scenario, ReportError> {
    let scenario = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| ReportError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            load_scenario(&text)?
        }
        None => Scenario::default(),
    };
    Ok(match seed {
        Some(s) => scenario.with_seed(s)?,
        None => scenario,
    })
}
