//! Command-line front end.
//!
//! Loads a model (from a file or a built-in generator), expands parameter
//! sweeps, runs every sweep point under the chosen schema and writes one
//! statistics CSV per point plus a flat `key=value` manifest.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Parser;
use thiserror::Error;

use crate::reducer::{format_sig9, write_csv};
use crate::rule::Model;
use crate::scheduler::{simulate, ScheduleError, SchedulerConfig, Schema, DEFAULT_QUANTUM};
use crate::syntax::{parse_model, ModelError};

/// Species counts accepted by the Lotka-Volterra generator.
pub const LV_SPECIES: [usize; 5] = [2, 4, 8, 16, 32];

pub const LV_BIRTH: f64 = 1.0;
pub const LV_PREDATION: f64 = 0.001;
pub const LV_DEATH: f64 = 1.0;
pub const LV_INITIAL: u64 = 1000;
pub const LV_T_STOP: f64 = 20.0;
pub const LV_DELTA: f64 = 0.1;

#[derive(Debug, Parser)]
#[command(name = "cwc-sim", version, about = "Multicore stochastic simulation of CWC models")]
pub struct Args {
    /// Model file.
    #[arg(short = 'm', long = "model", value_name = "PATH", conflicts_with = "builtin")]
    pub model: Option<PathBuf>,
    /// Built-in model, e.g. `lotka-volterra:2`.
    #[arg(long, value_name = "NAME:S")]
    pub builtin: Option<String>,
    /// Replicas per sweep point.
    #[arg(short = 'n', long = "instances", default_value_t = 1)]
    pub instances: usize,
    #[arg(long, default_value = "sliced")]
    pub schema: Schema,
    /// Worker threads; defaults to the available hardware parallelism.
    #[arg(short = 'w', long = "workers")]
    pub workers: Option<usize>,
    /// Slice length as a multiple of the sample period.
    #[arg(long, default_value_t = DEFAULT_QUANTUM, value_name = "MULT")]
    pub quantum: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Rate sweep `rI.k=start:stop:step`; repeat for a cartesian product.
    #[arg(long, value_name = "SPEC")]
    pub sweep: Vec<String>,
    #[arg(short = 'o', long = "outdir", default_value = ".")]
    pub outdir: PathBuf,
    /// Also write every raw trajectory.
    #[arg(long)]
    pub dump_raw: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSource {
    File(PathBuf),
    Builtin { name: String, species: usize },
}

/// One rule's kinetic constant swept over `start, start+step, ..., ≤ stop`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub rule: usize,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<SweepSpec, CliError> {
        let bad = |why: &str| CliError::Sweep(format!("`{text}`: {why}"));
        let (target, range) = text
            .split_once('=')
            .ok_or_else(|| bad("expected `rI.k=start:stop:step`"))?;
        let rule = target
            .strip_suffix(".k")
            .and_then(|r| r.strip_prefix('r'))
            .and_then(|r| r.parse::<usize>().ok())
            .ok_or_else(|| bad("the target must look like `r0.k`"))?;
        let parts: Vec<&str> = range.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(bad("the range must be `start:stop:step`"));
        };
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| bad(&format!("`{s}` is not a number")))
        };
        let spec = SweepSpec {
            rule,
            start: num(start)?,
            stop: num(stop)?,
            step: num(step)?,
        };
        if spec.step.is_nan() || spec.step <= 0.0 || spec.step.is_infinite() {
            return Err(bad("the step must be positive"));
        }
        if spec.start.is_nan() || spec.start > spec.stop || !spec.stop.is_finite() {
            return Err(bad("start must not exceed stop"));
        }
        if spec.start <= 0.0 {
            return Err(bad("rates must be positive"));
        }
        Ok(spec)
    }

    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as u64 + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// Cartesian product of the sweeps; a single empty point when there are none.
pub fn expand_sweeps(sweeps: &[SweepSpec]) -> Vec<Vec<(usize, f64)>> {
    let mut points = vec![Vec::new()];
    for s in sweeps {
        let values = s.values();
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push((s.rule, v));
                    q
                })
            })
            .collect();
    }
    points
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub source: ModelSource,
    pub instances: usize,
    pub schema: Schema,
    pub workers: usize,
    pub quantum: u64,
    pub master_seed: u64,
    pub sweeps: Vec<SweepSpec>,
    pub outdir: PathBuf,
    pub dump_raw: bool,
}

impl RunSpec {
    pub fn from_args(args: Args) -> Result<RunSpec, CliError> {
        let source = match (args.model, args.builtin) {
            (Some(p), None) => ModelSource::File(p),
            (None, Some(b)) => parse_builtin(&b)?,
            (None, None) => return Err(CliError::Config("either --model or --builtin is required".into())),
            (Some(_), Some(_)) => return Err(CliError::Config("--model and --builtin are exclusive".into())),
        };
        if args.instances == 0 {
            return Err(CliError::Config("--instances must be at least 1".into()));
        }
        let workers = args.workers.unwrap_or_else(default_workers);
        if workers == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        if args.quantum == 0 {
            return Err(CliError::Config("--quantum must be at least 1".into()));
        }
        let sweeps = args
            .sweep
            .iter()
            .map(|s| SweepSpec::parse(s))
            .collect::<Result<_, _>>()?;
        Ok(RunSpec {
            source,
            instances: args.instances,
            schema: args.schema,
            workers,
            quantum: args.quantum,
            master_seed: args.seed,
            sweeps,
            outdir: args.outdir,
            dump_raw: args.dump_raw,
        })
    }

    pub fn scheduler_config(&self) -> SchedulerConfig {
        SchedulerConfig::new(self.schema, self.workers)
            .seed(self.master_seed)
            .quantum(self.quantum)
            .keep_raw(self.dump_raw)
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn parse_builtin(text: &str) -> Result<ModelSource, CliError> {
    let (name, s) = text.split_once(':').unwrap_or((text, "2"));
    let species = s
        .parse()
        .map_err(|_| CliError::Config(format!("bad species count `{s}` in --builtin")))?;
    Ok(ModelSource::Builtin {
        name: name.to_string(),
        species,
    })
}

/// Generates a built-in model.
///
/// `lotka-volterra` with `s` species is a predation chain: `x0` reproduces,
/// each `x(i)` feeds on `x(i-1)`, and every predator dies. Rates and initial
/// populations are the `LV_*` defaults.
pub fn builtin_model(name: &str, species: usize) -> Result<Model, CliError> {
    if name != "lotka-volterra" {
        return Err(CliError::Config(format!("unknown built-in model `{name}`")));
    }
    if !LV_SPECIES.contains(&species) {
        return Err(CliError::Config(format!(
            "lotka-volterra supports {LV_SPECIES:?} species, not {species}"
        )));
    }
    let mut text = String::new();
    let _ = writeln!(text, "%name lv{species}");
    let initial: Vec<String> = (0..species).map(|i| format!("x{i}*{LV_INITIAL}")).collect();
    let _ = writeln!(text, "%term {}", initial.join(" "));
    let _ = writeln!(text, "%rule TOP : x0 $X => x0 x0 $X @ {LV_BIRTH}");
    for i in 1..species {
        let _ = writeln!(text, "%rule TOP : x{} x{i} $X => x{i} x{i} $X @ {LV_PREDATION}", i - 1);
    }
    for i in 1..species {
        let _ = writeln!(text, "%rule TOP : x{i} $X => $X @ {LV_DEATH}");
    }
    let _ = writeln!(text, "%tstop {LV_T_STOP}\n%delta {LV_DELTA}");
    parse_model(&text).map_err(|e| CliError::Config(format!("built-in model: {e}")))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("invalid sweep {0}")]
    Sweep(String),
    #[error("{path}: {source}")]
    Model { path: PathBuf, source: ModelError },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("sweep point {point}: {source}")]
    Run { point: usize, source: ScheduleError },
}

impl CliError {
    /// 1 for configuration and input problems, 2 for failures during the run.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Sweep(_) | CliError::Model { .. } | CliError::Read { .. } => 1,
            CliError::Write { .. } | CliError::Run { .. } => 2,
        }
    }
}

pub fn load_model(source: &ModelSource) -> Result<(Model, String), CliError> {
    match source {
        ModelSource::Builtin { name, species } => {
            let m = builtin_model(name, *species)?;
            let stem = m.name.clone();
            Ok((m, stem))
        }
        ModelSource::File(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Read {
                path: path.clone(),
                source,
            })?;
            let m = parse_model(&text).map_err(|source| CliError::Model {
                path: path.clone(),
                source,
            })?;
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| m.name.clone());
            Ok((m, stem))
        }
    }
}

/// Files written by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub stats: Vec<PathBuf>,
    pub raw: Vec<PathBuf>,
    pub manifest: PathBuf,
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, CliError> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        })
}

fn write_err(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    }
}

/// Runs every sweep point and writes the outputs.
pub fn run(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let (base, stem) = load_model(&spec.source)?;
    let mut variants = Vec::new();
    for point in expand_sweeps(&spec.sweeps) {
        let mut m = base.clone();
        for &(rule, k) in &point {
            m = m.with_rate(rule, k).ok_or_else(|| {
                CliError::Sweep(format!(
                    "rule r{rule} does not exist (the model has {} rules)",
                    base.rules.len()
                ))
            })?;
        }
        variants.push((point, m));
    }
    fs::create_dir_all(&spec.outdir).map_err(write_err(&spec.outdir))?;

    let config = spec.scheduler_config();
    let swept = !spec.sweeps.is_empty();
    let mut out = RunOutput {
        stats: Vec::new(),
        raw: Vec::new(),
        manifest: spec.outdir.join(format!("{stem}.manifest")),
    };
    let names = base.observable_names();
    for (i, (_, model)) in variants.iter().enumerate() {
        let tag = if swept {
            format!("{stem}.sweep{i}")
        } else {
            stem.clone()
        };
        let model = Arc::new(model.clone());
        let result = simulate(&model, spec.instances, &config).map_err(|source| CliError::Run { point: i, source })?;

        let path = spec.outdir.join(format!("{tag}.stats.csv"));
        let mut w = create(&path)?;
        write_csv(&names, &result.points, &mut w)
            .and_then(|_| w.flush())
            .map_err(write_err(&path))?;
        out.stats.push(path);

        if let Some(raw) = &result.raw {
            let path = spec.outdir.join(format!("{tag}.raw.csv"));
            let mut w = create(&path)?;
            let write = |w: &mut BufWriter<fs::File>| -> io::Result<()> {
                writeln!(w, "instance,time,{}", names.join(","))?;
                for s in raw.iter().flatten() {
                    let values: Vec<String> = s.values.iter().map(|v| v.to_string()).collect();
                    writeln!(w, "{},{},{}", s.instance, format_sig9(s.time), values.join(","))?;
                }
                w.flush()
            };
            write(&mut w).map_err(write_err(&path))?;
            out.raw.push(path);
        }
    }

    let manifest = manifest_text(
        spec,
        &stem,
        &variants.iter().map(|(p, _)| p.clone()).collect::<Vec<_>>(),
        &base,
    );
    fs::write(&out.manifest, manifest).map_err(write_err(&out.manifest))?;
    Ok(out)
}

fn manifest_text(spec: &RunSpec, stem: &str, points: &[Vec<(usize, f64)>], model: &Model) -> String {
    let mut m = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(m, "{k}={v}");
    };
    kv(
        "program",
        format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
    );
    match &spec.source {
        ModelSource::File(p) => kv("model", p.display().to_string()),
        ModelSource::Builtin { name, species } => kv("builtin", format!("{name}:{species}")),
    }
    kv("stem", stem.to_string());
    kv("instances", spec.instances.to_string());
    kv("schema", spec.schema.to_string());
    kv("workers", spec.workers.to_string());
    kv("quantum", spec.quantum.to_string());
    kv("seed", spec.master_seed.to_string());
    kv("t_stop", format_sig9(model.t_stop));
    kv("delta", format_sig9(model.delta));
    kv("rules", model.rules.len().to_string());
    kv("observables", model.observable_names().join(","));
    kv("dump_raw", spec.dump_raw.to_string());
    for s in &spec.sweeps {
        kv(
            "sweep",
            format!(
                "r{}.k={}:{}:{}",
                s.rule,
                format_sig9(s.start),
                format_sig9(s.stop),
                format_sig9(s.step)
            ),
        );
    }
    kv("sweep_points", points.len().to_string());
    if !spec.sweeps.is_empty() {
        for (i, p) in points.iter().enumerate() {
            let values: Vec<String> = p.iter().map(|(r, k)| format!("r{r}.k={}", format_sig9(*k))).collect();
            kv(&format!("sweep{i}"), values.join(" "));
        }
    }
    m
}

/// Parses `args` (including the program name), runs, and returns the exit
/// code. Errors are reported on stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = RunSpec::from_args(args).and_then(|spec| run(&spec));
    match result {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("cwc-sim: {e}");
            e.exit_code()
        }
    }
}
