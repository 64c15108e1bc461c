//! Command-line front end: `simulate`, `sweep` and `validate`.
//!
//! Exit codes: 0 on success, 1 on any validation error (nothing is written),
//! 2 when a run fails or a step does not converge (outputs are still written
//! and flag the failure).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::devices::{IbrKind, RegulatorTaps};
use crate::engine::{
    run_scenario, run_sweep, Dispatch, EngineError, PlrCase, Scenario, SimulationResult, StepLog,
    SweepMatrix, Timeline, TripRecord, STANDARD_LOCATIONS,
};
use crate::ingest::{
    load_network, read_scenario_file, resolve_scenario, Diagnostic, DiagnosticKind, Diagnostics, RooftopPlan,
};
use crate::metrics::{
    default_vuf_window, max_vuf_over_window, profile, trip_table, TripRow, VoltageProfile, VufReport,
};
use crate::netmodel::{FaultKind, FaultSpec, NetworkModel};
use crate::solver::SolveSettings;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

pub const TRIPS_CSV: &str = "trips.csv";
pub const VUF_CSV: &str = "vuf.csv";
pub const PROFILE_CSV: &str = "profile.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const MANIFEST_JSON: &str = "manifest.json";
pub const TRIP_TABLE_CSV: &str = "trip_table.csv";

const DEFAULT_OUT_DIR: &str = "out";

#[derive(Debug, Parser)]
#[command(name = "tdfault", version, about = "Unbalanced fault simulation of feeders with inverter-based resources")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write its reports.
    Simulate(SimulateArgs),
    /// Run a fault-kind × location × PLR matrix.
    Sweep(SweepArgs),
    /// Check a network (and optionally a scenario) and print every finding.
    Validate(ValidateArgs),
}

/// Settings shared by `simulate` and `sweep`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunOptions {
    /// Scenario file.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Network file, replacing the one named by the scenario.
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Force voltage regulation on.
    #[arg(long)]
    pub vr: bool,
    /// Time step in seconds.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Re-place the rooftop units with this shuffle seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Profile snapshot times in seconds, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub profile_times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub run: RunOptions,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunOptions,
    /// Fault kinds (SL2G, DL2G, L2L, 3L2G) or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub kinds: Vec<String>,
    /// Fault location names or bus ids, or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub locations: Vec<String>,
    /// PLR cases such as 0.5, 0.5vr, 300%.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.5vr,1.0,3.0")]
    pub plrs: Vec<String>,
    /// Concurrent cells; defaults to the available cores.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Network file.
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// Scenario file, checked together with its network.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Network file (alternative to --network).
    #[arg(conflicts_with = "network")]
    pub path: Option<PathBuf>,
}

/// Parse `args` (program name first) and run; returns the exit code.
pub fn main_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Validate(a) => cmd_validate(&a),
    }
}

fn report(diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{d}");
    }
}

fn invalid(diags: Vec<Diagnostic>) -> Diagnostics {
    Diagnostics(diags)
}

fn option_error(path: &str, message: impl Into<String>) -> Diagnostics {
    invalid(vec![Diagnostic::error(DiagnosticKind::Validation, path, message)])
}

/// A scenario prepared from files and flags, with the inputs it was read from.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub scenario: Scenario,
    pub inputs: Vec<PathBuf>,
    pub warnings: Vec<Diagnostic>,
}

/// Read the scenario and network named by `opts` and apply the flag
/// overrides. Without a scenario file, a network alone yields a default
/// SL2G fault at the first fault location (or the feeder head).
pub fn prepare(opts: &RunOptions) -> Result<Prepared, Diagnostics> {
    let mut inputs = Vec::new();
    let file = match &opts.scenario {
        Some(p) => {
            inputs.push(p.clone());
            Some(read_scenario_file(p)?)
        }
        None => None,
    };
    let net_path = match (&opts.network, &file, &opts.scenario) {
        (Some(p), _, _) => p.clone(),
        (None, Some(f), Some(sp)) => f.resolved_network_path(sp),
        _ => return Err(option_error("", "either --scenario or --network is required")),
    };
    inputs.push(net_path.clone());
    let net = load_network(&net_path).map_err(|d| {
        Diagnostics(
            d.0.into_iter()
                .map(|mut x| {
                    x.message = format!("{} (in {})", x.message, net_path.display());
                    x
                })
                .collect(),
        )
    })?;
    let net = match opts.seed {
        Some(seed) => Arc::new(replace_rooftops(&net, seed)?),
        None => Arc::new(net),
    };

    let (mut scenario, warnings) = match &file {
        Some(f) => resolve_scenario(f, net).into_result()?,
        None => (default_scenario(net), Vec::new()),
    };
    if opts.vr && !scenario.voltage_regulation {
        scenario.voltage_regulation = true;
        if file.as_ref().is_none_or(|f| f.label.is_none()) {
            scenario.label = scenario.default_label();
        }
    }
    if let Some(dt) = opts.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(option_error("--dt", "must be positive"));
        }
        scenario.timeline.dt_s = dt;
    }
    if let Some(times) = &opts.profile_times {
        scenario.outputs.profile_snapshot_times_s = times.clone();
    }
    check_profile_times(&scenario)?;
    Ok(Prepared {
        scenario,
        inputs,
        warnings,
    })
}

fn default_scenario(net: Arc<NetworkModel>) -> Scenario {
    let bus = net
        .fault_locations
        .first()
        .map(|l| l.bus.clone())
        .unwrap_or_else(|| net.feeder_head.clone());
    let fault = FaultSpec::new(FaultKind::SingleLineToGround, bus, FaultKind::SingleLineToGround.default_phases());
    Scenario::new(net, fault, 0.5, false)
}

/// Re-place the rooftop units with the same count, total rating, current
/// limit and curve, shuffled by `seed`.
fn replace_rooftops(net: &NetworkModel, seed: u64) -> Result<NetworkModel, Diagnostics> {
    let roofs: Vec<_> = net.ibrs.iter().filter(|u| u.kind == IbrKind::RooftopPv).collect();
    let Some(first) = roofs.first() else {
        return Err(option_error("--seed", "the network has no rooftop units to place"));
    };
    let plan = RooftopPlan {
        count: roofs.len(),
        total_kw: roofs.iter().map(|u| u.s_rated_kva).sum(),
        seed,
        i_limit_pu: first.i_limit_pu,
        frt_curve: first.frt_curve.clone(),
        ..RooftopPlan::default()
    };
    crate::ingest::place_rooftops(net, &plan).map_err(|e| option_error("--seed", e))
}

/// Sample times of a run on `sc`'s timeline, in order.
pub fn sample_times(sc: &Scenario) -> Vec<f64> {
    let t_on = sc.fault.t_on_s;
    let dt = sc.timeline.dt_s;
    let eps = 1e-9 * dt.max(1.0);
    let mut out = vec![t_on];
    let mut k = 1usize;
    loop {
        let t = t_on + k as f64 * dt;
        if t > sc.timeline.t_end_s + eps {
            return out;
        }
        out.push(t);
        k += 1;
    }
}

fn check_profile_times(sc: &Scenario) -> Result<(), Diagnostics> {
    let grid = sample_times(sc);
    let tol = 1e-6 * sc.timeline.dt_s;
    let mut diags = Vec::new();
    for (k, &t) in sc.outputs.profile_snapshot_times_s.iter().enumerate() {
        if !grid.iter().any(|g| (g - t).abs() <= tol) {
            diags.push(Diagnostic::error(
                DiagnosticKind::Validation,
                format!("outputs.profile_snapshot_times_s[{k}]"),
                format!(
                    "t = {t} s is not a sample time (samples start at {} s every {} s)",
                    sc.fault.t_on_s, sc.timeline.dt_s
                ),
            ));
        }
    }
    if diags.is_empty() {
        Ok(())
    } else {
        Err(invalid(diags))
    }
}

/// Snapshot times for a run: the requested ones, or pre-fault, the last
/// faulted sample and the final sample.
pub fn snapshot_times(sc: &Scenario, r: &SimulationResult) -> Vec<f64> {
    if !sc.outputs.profile_snapshot_times_s.is_empty() {
        return sc.outputs.profile_snapshot_times_s.clone();
    }
    let mut out = vec![r.times[0], r.times[r.sample_at(r.t_clear_s)], *r.times.last().expect("non-empty run")];
    out.dedup();
    out
}

/// `x` rounded to six significant digits, printed in shortest form.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let r: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    if r == 0.0 {
        "0".to_string()
    } else {
        format!("{r}")
    }
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn trips_csv(rows: &[TripRow]) -> String {
    csv_string(
        &["scenario", "fault_kind", "fault_bus", "plr", "vr", "category", "n_total", "n_tripped", "pct"],
        rows.iter().map(|r| {
            vec![
                r.scenario.clone(),
                r.fault_kind.clone(),
                r.fault_bus.clone(),
                fmt_sig(r.plr),
                r.vr.to_string(),
                r.category.to_string(),
                r.n_total.to_string(),
                r.n_tripped.to_string(),
                fmt_sig(r.pct),
            ]
        }),
    )
}

pub fn vuf_csv(report: &VufReport) -> String {
    csv_string(
        &["scenario", "node", "max_vuf", "exceeds_limit"],
        report.nodes.iter().map(|n| {
            vec![
                report.scenario.clone(),
                n.node.clone(),
                n.max_vuf.map(fmt_sig).unwrap_or_default(),
                n.exceeds_limit.to_string(),
            ]
        }),
    )
}

pub fn profile_csv(profiles: &[VoltageProfile]) -> String {
    csv_string(
        &["scenario", "time_s", "node", "phase", "v_pu", "angle_deg", "distance_km"],
        profiles.iter().flat_map(|p| {
            p.points.iter().map(move |pt| {
                vec![
                    p.scenario.clone(),
                    fmt_sig(p.time_s),
                    pt.node.clone(),
                    pt.phase.to_string(),
                    fmt_sig(pt.v_pu),
                    fmt_sig(pt.angle_deg),
                    fmt_sig(pt.distance_km),
                ]
            })
        }),
    )
}

/// Consolidated sweep table: one row per cell and category.
pub fn trip_table_csv(rows: &[(String, TripRow)]) -> String {
    csv_string(
        &[
            "scenario", "fault_kind", "location", "fault_bus", "plr", "vr", "category", "n_total", "n_tripped", "pct",
        ],
        rows.iter().map(|(loc, r)| {
            vec![
                r.scenario.clone(),
                r.fault_kind.clone(),
                loc.clone(),
                r.fault_bus.clone(),
                fmt_sig(r.plr),
                r.vr.to_string(),
                r.category.to_string(),
                r.n_total.to_string(),
                r.n_tripped.to_string(),
                fmt_sig(r.pct),
            ]
        }),
    )
}

/// Scenario settings as echoed in `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioEcho {
    pub label: String,
    pub fault: FaultSpec,
    pub plr: f64,
    pub voltage_regulation: bool,
    pub solver: SolveSettings,
    pub timeline: Timeline,
    pub profile_snapshot_times_s: Vec<f64>,
}

impl ScenarioEcho {
    pub fn new(sc: &Scenario) -> Self {
        Self {
            label: sc.label.clone(),
            fault: sc.fault.clone(),
            plr: sc.plr,
            voltage_regulation: sc.voltage_regulation,
            solver: sc.solver,
            timeline: sc.timeline,
            profile_snapshot_times_s: sc.outputs.profile_snapshot_times_s.clone(),
        }
    }
}

/// A run of consecutive steps sharing a convergence outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRange {
    pub from_s: f64,
    pub to_s: f64,
    pub converged: bool,
    pub steps: usize,
}

pub fn convergence_ranges(log: &[StepLog]) -> Vec<ConvergenceRange> {
    let mut out: Vec<ConvergenceRange> = Vec::new();
    for s in log {
        match out.last_mut() {
            Some(r) if r.converged == s.converged => {
                r.to_s = s.t_s;
                r.steps += 1;
            }
            _ => out.push(ConvergenceRange {
                from_s: s.t_s,
                to_s: s.t_s,
                converged: s.converged,
                steps: 1,
            }),
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub scenario: ScenarioEcho,
    pub converged: bool,
    pub error: Option<String>,
    pub dispatch: Option<Dispatch>,
    pub taps: Option<RegulatorTaps>,
    pub t_clear_s: f64,
    pub convergence: Vec<ConvergenceRange>,
    pub log: Vec<StepLog>,
    pub trips: Vec<TripRecord>,
    pub vuf_window_s: Option<(f64, f64)>,
    pub max_vuf: Option<f64>,
    pub warnings: Vec<String>,
}

impl Summary {
    fn failed(sc: &Scenario, e: &EngineError) -> Self {
        Self {
            scenario: ScenarioEcho::new(sc),
            converged: false,
            error: Some(e.to_string()),
            dispatch: None,
            taps: None,
            t_clear_s: sc.fault.t_clear_s(),
            convergence: Vec::new(),
            log: Vec::new(),
            trips: Vec::new(),
            vuf_window_s: None,
            max_vuf: None,
            warnings: Vec::new(),
        }
    }
}

/// Everything written for one scenario.
#[derive(Debug, Clone)]
pub struct Reports {
    pub trips: Vec<TripRow>,
    pub vuf: VufReport,
    pub profiles: Vec<VoltageProfile>,
    pub summary: Summary,
}

impl Reports {
    pub fn new(sc: &Scenario, r: &SimulationResult) -> Self {
        let window = default_vuf_window(r);
        let vuf = max_vuf_over_window(r, window, false);
        let profiles = snapshot_times(sc, r)
            .into_iter()
            .map(|t| profile(r, t).expect("snapshot times lie on the run grid"))
            .collect();
        let summary = Summary {
            scenario: ScenarioEcho::new(sc),
            converged: r.all_converged(),
            error: None,
            dispatch: Some(r.dispatch),
            taps: Some(r.taps.clone()),
            t_clear_s: r.t_clear_s,
            convergence: convergence_ranges(&r.log),
            log: r.log.clone(),
            trips: r.trips.clone(),
            vuf_window_s: Some(window),
            max_vuf: vuf.global_max,
            warnings: r.warnings.clone(),
        };
        Self {
            trips: trip_table([r]),
            vuf,
            profiles,
            summary,
        }
    }

    /// Write the four per-scenario files into `dir`; returns their names.
    pub fn write(&self, dir: &Path) -> io::Result<Vec<String>> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(TRIPS_CSV), trips_csv(&self.trips))?;
        fs::write(dir.join(VUF_CSV), vuf_csv(&self.vuf))?;
        fs::write(dir.join(PROFILE_CSV), profile_csv(&self.profiles))?;
        write_json(&dir.join(SUMMARY_JSON), &self.summary)?;
        Ok([TRIPS_CSV, VUF_CSV, PROFILE_CSV, SUMMARY_JSON].map(String::from).to_vec())
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance of one invocation's outputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub inputs: Vec<InputDigest>,
    pub scenarios: Vec<String>,
    /// Paths relative to the output directory.
    pub outputs: Vec<String>,
    pub wall_clock_s: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn new(inputs: &[PathBuf]) -> io::Result<Self> {
        let inputs = inputs
            .iter()
            .map(|p| {
                let bytes = fs::read(p)?;
                Ok(InputDigest {
                    path: p.display().to_string(),
                    sha256: format!("{:x}", Sha256::digest(&bytes)),
                })
            })
            .collect::<io::Result<Vec<_>>>()?;
        Ok(Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs,
            scenarios: Vec::new(),
            outputs: Vec::new(),
            wall_clock_s: BTreeMap::new(),
        })
    }

    pub fn write(&mut self, dir: &Path) -> io::Result<()> {
        self.outputs.push(MANIFEST_JSON.to_string());
        write_json(&dir.join(MANIFEST_JSON), self)
    }
}

fn out_dir(opts: &RunOptions, sc: &Scenario) -> PathBuf {
    opts.out
        .clone()
        .or_else(|| sc.outputs.directory.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn io_failure(dir: &Path, e: io::Error) -> i32 {
    eprintln!("error [io]: cannot write to {}: {e}", dir.display());
    EXIT_SOLVER
}

pub fn cmd_simulate(args: &SimulateArgs) -> i32 {
    if args.run.scenario.is_none() {
        report(&[Diagnostic::error(DiagnosticKind::Validation, "", "simulate needs --scenario")]);
        return EXIT_INVALID;
    }
    let prep = match prepare(&args.run) {
        Ok(p) => p,
        Err(d) => {
            report(&d.0);
            return EXIT_INVALID;
        }
    };
    report(&prep.warnings);
    let sc = &prep.scenario;
    let dir = out_dir(&args.run, sc);
    let mut manifest = match RunManifest::new(&prep.inputs) {
        Ok(m) => m,
        Err(e) => return io_failure(&dir, e),
    };

    let started = Instant::now();
    let outcome = run_scenario(sc);
    manifest.wall_clock_s.insert(sc.label.clone(), started.elapsed().as_secs_f64());
    manifest.scenarios.push(sc.label.clone());

    let (written, code) = match &outcome {
        Ok(r) => {
            for w in &r.warnings {
                eprintln!("warning: {}: {w}", sc.label);
            }
            let code = if r.all_converged() { EXIT_OK } else { EXIT_SOLVER };
            (Reports::new(sc, r).write(&dir), code)
        }
        Err(e) => {
            eprintln!("error [solver] {}: {e}", sc.label);
            let write = fs::create_dir_all(&dir)
                .and_then(|_| write_json(&dir.join(SUMMARY_JSON), &Summary::failed(sc, e)))
                .map(|_| vec![SUMMARY_JSON.to_string()]);
            (write, EXIT_SOLVER)
        }
    };
    match written {
        Ok(files) => manifest.outputs.extend(files),
        Err(e) => return io_failure(&dir, e),
    }
    if let Err(e) = manifest.write(&dir) {
        return io_failure(&dir, e);
    }
    code
}

/// Expand `all` and parse the matrix flags.
pub fn sweep_matrix(args: &SweepArgs, net: &NetworkModel) -> Result<SweepMatrix, Diagnostics> {
    let mut diags = Vec::new();
    let is_all = |v: &[String]| v.len() == 1 && v[0].eq_ignore_ascii_case("all");
    let kinds = if is_all(&args.kinds) {
        FaultKind::ALL.to_vec()
    } else {
        args.kinds
            .iter()
            .filter_map(|k| {
                let parsed = FaultKind::parse(k.trim());
                if parsed.is_none() {
                    diags.push(Diagnostic::error(
                        DiagnosticKind::Validation,
                        "--kinds",
                        format!("unknown fault kind \"{k}\""),
                    ));
                }
                parsed
            })
            .collect()
    };
    let locations: Vec<String> = if is_all(&args.locations) {
        let mut all: Vec<String> = STANDARD_LOCATIONS
            .iter()
            .filter(|s| net.resolve_location(s).is_some())
            .map(|s| s.to_string())
            .collect();
        for l in &net.fault_locations {
            if !all.iter().any(|s| s.eq_ignore_ascii_case(&l.name)) {
                all.push(l.name.clone());
            }
        }
        all
    } else {
        args.locations.iter().map(|s| s.trim().to_string()).collect()
    };
    for loc in &locations {
        if net.resolve_location(loc).is_none() {
            diags.push(Diagnostic::error(
                DiagnosticKind::Reference,
                "--locations",
                format!("unknown bus or fault location \"{loc}\""),
            ));
        }
    }
    let plr_cases = args
        .plrs
        .iter()
        .filter_map(|p| match p.parse::<PlrCase>() {
            Ok(mut c) => {
                c.voltage_regulation |= args.run.vr;
                Some(c)
            }
            Err(e) => {
                diags.push(Diagnostic::error(DiagnosticKind::Validation, "--plrs", e));
                None
            }
        })
        .collect();
    if !diags.is_empty() {
        return Err(invalid(diags));
    }
    Ok(SweepMatrix {
        kinds,
        locations,
        plr_cases,
    })
}

pub fn cmd_sweep(args: &SweepArgs) -> i32 {
    let prep = match prepare(&args.run) {
        Ok(p) => p,
        Err(d) => {
            report(&d.0);
            return EXIT_INVALID;
        }
    };
    report(&prep.warnings);
    let base = &prep.scenario;
    let matrix = match sweep_matrix(args, &base.network) {
        Ok(m) => m,
        Err(d) => {
            report(&d.0);
            return EXIT_INVALID;
        }
    };
    let dir = out_dir(&args.run, base);
    let mut manifest = match RunManifest::new(&prep.inputs) {
        Ok(m) => m,
        Err(e) => return io_failure(&dir, e),
    };
    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);

    let started = Instant::now();
    let outcomes = run_sweep(base, &matrix, jobs);
    manifest.wall_clock_s.insert("sweep".to_string(), started.elapsed().as_secs_f64());

    let mut code = EXIT_OK;
    let mut table = Vec::new();
    for o in &outcomes {
        let label = o.cell.label();
        manifest.scenarios.push(label.clone());
        let cell_dir = dir.join(&label);
        let written = match &o.result {
            Ok(r) => {
                let sc = o.cell.scenario(base).expect("a cell that ran has a scenario");
                for w in &r.warnings {
                    eprintln!("warning: {label}: {w}");
                }
                if !r.all_converged() {
                    code = EXIT_SOLVER;
                }
                let reports = Reports::new(&sc, r);
                table.extend(reports.trips.iter().map(|row| (o.cell.location.clone(), row.clone())));
                reports.write(&cell_dir)
            }
            Err(e) => {
                eprintln!("error [solver] {label}: {e}");
                code = EXIT_SOLVER;
                let sc = o.cell.scenario(base).unwrap_or_else(|_| Scenario {
                    label: label.clone(),
                    ..base.clone()
                });
                fs::create_dir_all(&cell_dir)
                    .and_then(|_| write_json(&cell_dir.join(SUMMARY_JSON), &Summary::failed(&sc, e)))
                    .map(|_| vec![SUMMARY_JSON.to_string()])
            }
        };
        match written {
            Ok(files) => manifest.outputs.extend(files.into_iter().map(|f| format!("{label}/{f}"))),
            Err(e) => return io_failure(&cell_dir, e),
        }
    }
    if let Err(e) = fs::write(dir.join(TRIP_TABLE_CSV), trip_table_csv(&table)) {
        return io_failure(&dir, e);
    }
    manifest.outputs.push(TRIP_TABLE_CSV.to_string());
    if let Err(e) = manifest.write(&dir) {
        return io_failure(&dir, e);
    }
    let failed = outcomes.iter().filter(|o| o.result.is_err()).count();
    eprintln!(
        "{} cells in {:.1} s, {failed} failed",
        outcomes.len(),
        started.elapsed().as_secs_f64()
    );
    code
}

pub fn cmd_validate(args: &ValidateArgs) -> i32 {
    let mut diags = Vec::new();
    let network = args.network.clone().or_else(|| args.path.clone());
    if network.is_none() && args.scenario.is_none() {
        report(&[Diagnostic::error(DiagnosticKind::Validation, "", "validate needs a network or --scenario")]);
        return EXIT_INVALID;
    }
    if let Some(p) = &network {
        match fs::read_to_string(p) {
            Ok(text) => {
                let parsed = crate::ingest::parse_network(&text);
                diags.extend(parsed.diagnostics);
            }
            Err(e) => diags.push(Diagnostic::error(
                DiagnosticKind::Io,
                "",
                format!("cannot read {}: {e}", p.display()),
            )),
        }
    }
    if let Some(sp) = &args.scenario {
        let opts = RunOptions {
            scenario: Some(sp.clone()),
            network: network.clone(),
            ..RunOptions::default()
        };
        match prepare(&opts) {
            Ok(p) => diags.extend(p.warnings),
            Err(d) => {
                for x in d.0 {
                    if !diags.contains(&x) {
                        diags.push(x);
                    }
                }
            }
        }
    }
    for d in &diags {
        println!("{d}");
    }
    let errors = diags.iter().filter(|d| d.is_error()).count();
    let warnings = diags.len() - errors;
    println!("{errors} error(s), {warnings} warning(s)");
    if errors == 0 {
        EXIT_OK
    } else {
        EXIT_INVALID
    }
}
