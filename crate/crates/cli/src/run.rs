//! Scenario execution and output files.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use rydsim::atomic::{self, HyperfineModel, RydbergManifoldModel, SManifold, TESLA_PER_GAUSS};
use rydsim::fidelity::{assemble_budget, compose_budgets, BudgetInputs, CompositeBudget, ErrorBudget};
use rydsim::gates::{run_cz_cross, run_cz_electronic, run_cz_nuclear, run_cz_tensor, GateOptions, GateResult};
use rydsim::protocols::{
    build_sin_excitation, build_single_field, build_two_step_deexcitation, build_two_step_excitation, FieldShape, PulseSchedule,
};
use rydsim::quantum::{Atom, Level};
use rydsim::sim::run_from_level;

use crate::config::{Drive, Physics, Scenario, ScenarioConfig};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Sim(rydsim::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use rydsim::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Sim(E::Param(_) | E::Unmatched(_) | E::Domain(_)) => 2,
            CliError::Sim(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "output error: {m}"),
            CliError::Sim(e) => write!(f, "{e}"),
        }
    }
}

impl From<rydsim::Error> for CliError {
    fn from(e: rydsim::Error) -> Self {
        CliError::Sim(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub struct Context {
    pub out: PathBuf,
    pub stem: String,
    pub tol: f64,
    pub format: Format,
}

/// JSON document with version stamps ahead of the payload.
#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    rydsim_version: &'static str,
    format_version: u32,
    scenario: &'a str,
    #[serde(flatten)]
    body: T,
}

impl Context {
    fn path(&self, suffix: &str) -> PathBuf {
        self.out.join(format!("{}{suffix}", self.stem))
    }

    fn write(&self, suffix: &str, contents: &str) -> Result<PathBuf> {
        let p = self.path(suffix);
        fs::write(&p, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?;
        Ok(p)
    }

    fn write_json<T: Serialize>(&self, suffix: &str, scenario: &str, body: T) -> Result<PathBuf> {
        let doc = Stamped { rydsim_version: rydsim_version(), format_version: FORMAT_VERSION, scenario, body };
        let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
        s.push('\n');
        self.write(suffix, &s)
    }
}

fn rydsim_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

fn scenario_name(s: Scenario) -> &'static str {
    match s {
        Scenario::ExciteSin => "excite-sin",
        Scenario::ExciteTwoStep => "excite-two-step",
        Scenario::CzElectronic => "cz-electronic",
        Scenario::CzNuclear => "cz-nuclear",
        Scenario::CzTensor => "cz-tensor",
        Scenario::CzCross => "cz-cross",
        Scenario::Levels => "levels",
        Scenario::Sweep => "sweep",
    }
}

/// Runs the scenario and returns the files written.
pub fn run(cfg: &ScenarioConfig, ctx: &Context) -> Result<Vec<PathBuf>> {
    if !(ctx.tol > 0.0 && ctx.tol < 1.0) {
        return Err(CliError::Config(format!("--tol must lie in (0, 1), got {}", ctx.tol)));
    }
    fs::create_dir_all(&ctx.out).map_err(|e| CliError::Io(format!("cannot create {}: {e}", ctx.out.display())))?;
    match cfg.scenario {
        Scenario::ExciteSin | Scenario::ExciteTwoStep => excite(cfg, ctx),
        Scenario::Levels => levels(cfg, ctx),
        Scenario::Sweep => sweep(cfg, ctx),
        s => gate(cfg, s, &cfg.physics, ctx),
    }
}

// ---- excitation time series ----

#[derive(Serialize)]
struct FinalState {
    drive: String,
    initial: String,
    duration_us: f64,
    dwell_us: f64,
    levels: Vec<String>,
    population: Vec<f64>,
    phase: Vec<f64>,
    file: String,
}

fn excite(cfg: &ScenarioConfig, ctx: &Context) -> Result<Vec<PathBuf>> {
    let p = &cfg.physics;
    let ex = &cfg.excite;
    let mut jobs = vec![];
    let drives: Vec<Option<Drive>> = match cfg.scenario {
        Scenario::ExciteSin => ex.drives.iter().copied().map(Some).collect(),
        _ => vec![None],
    };
    for d in drives {
        let schedule = match d {
            None => {
                let r = p.rect_pulse()?;
                let s = build_two_step_excitation(&r)?;
                if ex.deexcite {
                    s.then(build_two_step_deexcitation(&r, r.two_step_phase())?)
                } else {
                    s
                }
            }
            Some(Drive::TwoField) => build_sin_excitation(&p.sin_pulse(), ex.angle_over_pi * PI)?,
            Some(Drive::SingleResonant) => build_single_field(&p.sin_pulse(), FieldShape::Sinusoidal, false)?,
            Some(Drive::SingleDetuned) => build_single_field(&p.sin_pulse(), FieldShape::Sinusoidal, true)?,
            Some(Drive::RectDetuned) => build_single_field(&p.sin_pulse(), FieldShape::Rectangular, true)?,
        };
        let slug = d.map_or("two-step", Drive::slug);
        let touched = schedule.levels(Atom::Control);
        for init in &ex.initial {
            let level: Level = init.parse().map_err(|e: rydsim::Error| CliError::Config(e.to_string()))?;
            if !touched.contains(&level) {
                return Err(CliError::Config(format!("initial level {level} is not driven by `{slug}`")));
            }
            jobs.push((slug, level, schedule.clone()));
        }
    }
    let runs = jobs
        .par_iter()
        .map(|(slug, level, s)| time_series(s, *level, ex.samples, ctx.tol).map(|t| (*slug, *level, t)))
        .collect::<Vec<_>>();
    let mut written = vec![];
    let mut summary = vec![];
    for r in runs {
        let (slug, level, ts) = r?;
        let suffix = format!(".{slug}.{level}.{}", ctx.format.ext());
        let body = match ctx.format {
            Format::Csv => ts.csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&ts).map_err(|e| CliError::Io(e.to_string()))?;
                s.push('\n');
                s
            }
        };
        let path = ctx.write(&suffix, &body)?;
        let last = ts.population.last().expect("at least the end point is sampled");
        let last_phase = ts.phase.last().expect("at least the end point is sampled");
        summary.push(FinalState {
            drive: slug.into(),
            initial: level.to_string(),
            duration_us: *ts.t_us.last().expect("non-empty"),
            dwell_us: ts.dwell_us,
            levels: ts.levels.clone(),
            population: last.clone(),
            phase: last_phase.clone(),
            file: file_name(&path),
        });
        written.push(path);
    }
    #[derive(Serialize)]
    struct Summary {
        runs: Vec<FinalState>,
    }
    written.push(ctx.write_json(".summary.json", scenario_name(cfg.scenario), Summary { runs: summary })?);
    Ok(written)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

#[derive(Serialize)]
struct TimeSeries {
    levels: Vec<String>,
    t_us: Vec<f64>,
    /// |amplitude|² per sample and level.
    population: Vec<Vec<f64>>,
    /// arg(amplitude) in rad per sample and level.
    phase: Vec<Vec<f64>>,
    dwell_us: f64,
}

impl TimeSeries {
    fn csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
        let header = std::iter::once("t_us".to_string())
            .chain(self.levels.iter().map(|l| format!("P_{l}")))
            .chain(self.levels.iter().map(|l| format!("arg_{l}")));
        w.write_record(header).expect("in-memory write");
        for (k, t) in self.t_us.iter().enumerate() {
            let row = std::iter::once(*t).chain(self.population[k].iter().copied()).chain(self.phase[k].iter().copied());
            w.write_record(row.map(|x| format!("{x:e}"))).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }
}

fn time_series(s: &PulseSchedule, initial: Level, samples: usize, tol: f64) -> Result<TimeSeries> {
    let dt = s.duration() / samples as f64;
    let run = run_from_level(s, Atom::Control, initial, tol, Some(dt))?;
    let traj = run.trajectory.ok_or_else(|| CliError::Sim(rydsim::Error::Numerical("no trajectory recorded".into())))?;
    let levels = run.state.basis.labels().iter().map(|l| l.to_string()).collect();
    Ok(TimeSeries {
        levels,
        t_us: traj.times.iter().map(|t| t * 1e6).collect(),
        population: traj.amplitudes.iter().map(|a| a.iter().map(|z| z.norm_sqr()).collect()).collect(),
        phase: traj.amplitudes.iter().map(|a| a.iter().map(|z| if z.norm() > 0.0 { z.arg() } else { 0.0 }).collect()).collect(),
        dwell_us: run.dwell * 1e6,
    })
}

// ---- gates ----

enum GateRun {
    Single(Box<GateResult>, ErrorBudget),
    Tensor(Box<GateResult>, CompositeBudget),
}

/// One sweep point; composite gates report summed error terms.
#[derive(Serialize, Clone, Copy)]
struct SweepRow {
    value: f64,
    e_ro: f64,
    e_decay: f64,
    e_bl: f64,
    fidelity: f64,
    dwell: f64,
}

impl GateRun {
    fn row(&self, value: f64) -> SweepRow {
        match self {
            GateRun::Single(_, b) => {
                SweepRow { value, e_ro: b.e_ro, e_decay: b.e_decay, e_bl: b.e_bl, fidelity: b.fidelity, dwell: b.dwell }
            }
            GateRun::Tensor(_, c) => {
                let s = |f: fn(&ErrorBudget) -> f64| c.parts.iter().map(f).sum::<f64>();
                SweepRow {
                    value,
                    e_ro: s(|b| b.e_ro),
                    e_decay: s(|b| b.e_decay),
                    e_bl: s(|b| b.e_bl),
                    fidelity: c.fidelity,
                    dwell: s(|b| b.dwell),
                }
            }
        }
    }
}

fn budget_inputs(p: &Physics) -> BudgetInputs {
    let w = p.two_kappa0();
    BudgetInputs { tau: p.tau(), kappa0: w / 2.0, v: p.v(), detuning: p.detuning_ratio * w, delta_env: p.delta_ratio * w }
}

fn simulate_gate(cfg: &ScenarioConfig, scenario: Scenario, p: &Physics, tol: f64) -> Result<GateRun> {
    let m = &cfg.method;
    let opts = GateOptions { tol, sample_dt: None, compensation: m.compensation(p) };
    let blockade = m.blockade(p);
    let inputs = budget_inputs(p);
    let single = |r: GateResult| -> Result<GateRun> {
        let b = assemble_budget(&r, &r.ideal, &inputs)?;
        Ok(GateRun::Single(Box::new(r), b))
    };
    match scenario {
        Scenario::CzElectronic => single(run_cz_electronic(&m.electronic_method(p)?, &blockade, &opts)?),
        Scenario::CzNuclear => single(run_cz_nuclear(&m.nuclear_method(p)?, &blockade, &opts)?),
        Scenario::CzCross => single(run_cz_cross(&m.sin_gate(p), &blockade, &opts)?),
        Scenario::CzTensor => {
            let t = run_cz_tensor(&m.electronic_method(p)?, &m.nuclear_method(p)?, &blockade, &opts, m.nuclear_first)?;
            let be = assemble_budget(&t.electronic, &t.electronic.ideal, &inputs)?;
            let bn = assemble_budget(&t.nuclear, &t.nuclear.ideal, &inputs)?;
            let mut c = compose_budgets(vec![be, bn]);
            c.simulated_fidelity = Some(rydsim::fidelity::average_fidelity(&t.combined.ideal, &t.combined.matrix)?);
            Ok(GateRun::Tensor(Box::new(t.combined), c))
        }
        _ => unreachable!("not a gate scenario"),
    }
}

fn gate(cfg: &ScenarioConfig, scenario: Scenario, p: &Physics, ctx: &Context) -> Result<Vec<PathBuf>> {
    let run = simulate_gate(cfg, scenario, p, ctx.tol)?;
    let name = scenario_name(scenario);
    let (result, budget_path) = match &run {
        GateRun::Single(r, b) => (r.as_ref(), ctx.write_json(".budget.json", name, b)?),
        GateRun::Tensor(r, c) => (r.as_ref(), ctx.write_json(".budget.json", name, c)?),
    };
    let table = match ctx.format {
        Format::Csv => ctx.write(".gate.csv", &gate_table(result))?,
        Format::Json => ctx.write_json(".gate.json", name, result)?,
    };
    Ok(vec![budget_path, table])
}

fn gate_table(r: &GateResult) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    w.write_record([
        "input",
        "abs_diag",
        "arg_diag",
        "ideal_sign",
        "raw_phase",
        "compensation",
        "leakage",
        "dwell_us",
        "double_rydberg_us",
    ])
    .expect("in-memory write");
    for (k, label) in r.labels.iter().enumerate() {
        let d = r.matrix[(k, k)];
        let row = [
            label.clone(),
            format!("{:e}", d.norm()),
            format!("{:e}", d.arg()),
            format!("{}", r.ideal[(k, k)].re),
            format!("{:e}", r.raw_phases[k]),
            format!("{:e}", r.compensation[k]),
            format!("{:e}", r.leakage[k]),
            format!("{:e}", r.dwell_per_input[k] * 1e6),
            format!("{:e}", r.double_rydberg[k] * 1e6),
        ];
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 labels")
}

// ---- sweeps ----

fn sweep(cfg: &ScenarioConfig, ctx: &Context) -> Result<Vec<PathBuf>> {
    let s = cfg.sweep.as_ref().expect("validated");
    let points = s.points().map_err(CliError::Config)?;
    let rows: Vec<Result<SweepRow>> = points
        .par_iter()
        .map(|&v| {
            let mut p = cfg.physics.clone();
            p.set(&s.parameter, v).map_err(CliError::Config)?;
            Ok(simulate_gate(cfg, s.base, &p, ctx.tol)?.row(v))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let path = match ctx.format {
        Format::Csv => {
            let mut out = format!("{},e_ro,e_decay,e_bl,fidelity,dwell_us\n", s.parameter);
            for r in &rows {
                writeln!(out, "{},{:e},{:e},{:e},{:e},{:e}", r.value, r.e_ro, r.e_decay, r.e_bl, r.fidelity, r.dwell * 1e6)
                    .expect("String write");
            }
            ctx.write(".csv", &out)?
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Table<'a> {
                base: &'static str,
                parameter: &'a str,
                rows: Vec<SweepRow>,
            }
            ctx.write_json(".json", "sweep", Table { base: scenario_name(s.base), parameter: &s.parameter, rows })?
        }
    };
    Ok(vec![path])
}

// ---- atomic levels ----

#[derive(Serialize)]
struct LevelRow {
    state_label: String,
    f: f64,
    m_f: Option<f64>,
    b_gauss: f64,
    energy_mhz: f64,
}

fn manifold_model(cfg: &ScenarioConfig) -> rydsim::Result<RydbergManifoldModel> {
    let l = &cfg.levels;
    let mut m = atomic::sr87_n70_manifold()?;
    let ghz = 2.0 * PI * 1e9;
    if let Some(n) = l.rydberg_n {
        m.n = n;
    }
    if let Some(a) = l.a_prime_ghz {
        m.a_prime = a * ghz;
    }
    if let Some(d) = l.delta_st_ghz {
        m.delta_st = d * ghz;
    }
    if let Some(o) = l.overlap {
        m.overlap = o;
    }
    if let Some(i) = l.nuclear_spin {
        m.i = i;
    }
    Ok(m)
}

fn levels(cfg: &ScenarioConfig, ctx: &Context) -> Result<Vec<PathBuf>> {
    let base: HyperfineModel = atomic::sr87_intermediate(0.0)?;
    let label = "5s6p1P1";
    let manifold: Option<SManifold> =
        if cfg.levels.manifold { Some(atomic::rydberg_s_manifold(&manifold_model(cfg)?)?) } else { None };
    let path = match ctx.format {
        Format::Csv => {
            let mut out = atomic::level_diagram_csv(label, &base, &cfg.levels.fields_gauss)?;
            if let Some(m) = &manifold {
                out.extend(atomic::manifold_csv(m).lines().skip(1).map(|l| format!("{l}\n")));
            }
            ctx.write(".csv", &out)?
        }
        Format::Json => {
            let mhz = 2.0 * PI * 1e6;
            let mut rows = vec![];
            for &b in &cfg.levels.fields_gauss {
                let at = HyperfineModel { b_field: b * TESLA_PER_GAUSS, ..base };
                for (f, mf, w) in atomic::sublevels(&at)? {
                    rows.push(LevelRow { state_label: label.into(), f, m_f: Some(mf), b_gauss: b, energy_mhz: w / mhz });
                }
            }
            #[derive(Serialize)]
            struct Doc {
                intermediate: Vec<LevelRow>,
                manifold: Option<SManifold>,
            }
            ctx.write_json(".json", "levels", Doc { intermediate: rows, manifold })?
        }
    };
    Ok(vec![path])
}
