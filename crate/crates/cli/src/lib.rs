//! Orchestration behind the `isospec` binary.
//!
//! Each command turns a [`RunConfig`] into a list of named [`Artifact`]s;
//! [`run`] writes them to the output directory and maps errors to exit codes
//! (0 analysis completed, 2 input or configuration error, 3 divergence).
//! Verdicts never change the exit code.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use isospec_core::catalog::{base_preset, resolve};
use isospec_core::curvature::{
    compare_ric_spectra, curvature_report, total_scal_integral, BaseGroupData, EIGEN_CLUSTER_GAP,
};
use isospec_core::flow::{genericity_check, integrate_flow, FlowTrajectory};
use isospec_core::heat::{
    c_ric_quadrature, c_ric_quadrature_difference, c_s_exact, heat_differences,
    MIN_QUADRATURE_SAMPLES,
};
use isospec_core::invariants::{dq_along_y, is_isospectral};
use isospec_core::JMap;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

pub const SCHEMA: &str = "isospec/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] isospec_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(isospec_core::Error::Divergence { .. }) => EXIT_DIVERGENCE,
            _ => EXIT_INPUT,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Where a map comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    File(PathBuf),
    Catalog(String),
}

impl Source {
    pub fn load(&self) -> CliResult<JMap> {
        match self {
            Source::File(p) => {
                let text = fs::read_to_string(p).map_err(|e| CliError::Io {
                    path: p.clone(),
                    source: e,
                })?;
                JMap::from_json(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
            }
            Source::Catalog(id) => Ok(resolve(id)?),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Source::File(p) => p.display().to_string(),
            Source::Catalog(id) => id.clone(),
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Certify,
    Flow,
    Report,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<Source>,
    pub input2: Option<Source>,
    pub base: String,
    pub tol_iso: f64,
    pub tol_verdict: f64,
    pub t_end: f64,
    pub dt: f64,
    pub drift_bound: f64,
    /// Monte-Carlo samples; quadrature is skipped when `None`.
    pub samples: Option<usize>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Also write every flow state as JSON under `states/`.
    pub write_states: bool,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            input: None,
            input2: None,
            base: "su2xsu2-unit".into(),
            tol_iso: 1e-8,
            tol_verdict: 1e-9,
            t_end: 0.1,
            dt: 1e-3,
            drift_bound: 1e-8,
            samples: None,
            seed: 0,
            out: None,
            write_states: false,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        for (name, v) in [
            ("--tol-iso", self.tol_iso),
            ("--tol-verdict", self.tol_verdict),
            ("--drift-bound", self.drift_bound),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!(
                    "{name} must be a positive number, got {v}"
                )));
            }
        }
        if self.command == Command::Flow {
            if !(self.dt > 0.0 && self.dt.is_finite()) {
                return Err(CliError::Config(format!(
                    "--dt must be positive, got {}",
                    self.dt
                )));
            }
            if !self.t_end.is_finite() {
                return Err(CliError::Config(format!(
                    "--t-end must be finite, got {}",
                    self.t_end
                )));
            }
        }
        if let Some(n) = self.samples {
            if n < MIN_QUADRATURE_SAMPLES {
                return Err(CliError::Config(format!(
                    "--samples must be at least {MIN_QUADRATURE_SAMPLES}, got {n}"
                )));
            }
        }
        if self.input.is_none() {
            return Err(CliError::Config(
                "an input map is required (--input or --catalog)".into(),
            ));
        }
        if self.command == Command::Certify && self.input2.is_none() {
            return Err(CliError::Config(
                "certify needs a second map (--input2 or --catalog2)".into(),
            ));
        }
        Ok(())
    }

    fn first(&self) -> CliResult<(JMap, String)> {
        let src = self.input.as_ref().expect("validated");
        Ok((src.load()?, src.label()))
    }

    fn base(&self) -> CliResult<BaseGroupData> {
        Ok(base_preset(&self.base)?)
    }
}

/// A named output file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    fn json(name: &str, value: &Value) -> Self {
        let mut contents = serde_json::to_string_pretty(value).expect("JSON values serialize");
        contents.push('\n');
        Artifact {
            name: name.into(),
            contents,
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn check_pair_shape(j: &JMap, j2: &JMap) -> CliResult<()> {
    if j.m() != j2.m() || j.r() != j2.r() {
        return Err(CliError::Config(format!(
            "maps have different shapes: m = {}, r = {} versus m = {}, r = {}",
            j.m(),
            j.r(),
            j2.m(),
            j2.r()
        )));
    }
    Ok(())
}

/// Isospectrality, non-isometry and heat-invariant comparison of two maps.
pub fn cmd_certify(config: &RunConfig) -> CliResult<Vec<Artifact>> {
    config.validate()?;
    let (j, label) = config.first()?;
    let src2 = config.input2.as_ref().expect("validated");
    let j2 = src2.load()?;
    check_pair_shape(&j, &j2)?;
    let base = config.base()?;

    let iso = is_isospectral(&j, &j2, config.tol_iso)?;
    let (nonisometry, one_form) = if iso.isospectral {
        let verdict = compare_ric_spectra(&j, &j2, EIGEN_CLUSTER_GAP);
        let mut heat = heat_differences(&j, &j2, &base, config.tol_verdict)?;
        if let Some(n) = config.samples {
            heat.quadrature = Some(c_ric_quadrature_difference(&j, &j2, &base, n, config.seed)?);
        }
        (to_value(&verdict), to_value(&heat))
    } else {
        (Value::Null, Value::Null)
    };
    let report = json!({
        "schema": SCHEMA,
        "command": "certify",
        "inputs": [label, src2.label()],
        "base": config.base,
        "m": j.m(),
        "isospectral": {
            "verdict": iso.isospectral,
            "tol": config.tol_iso,
            "max_deviation": iso.max_deviation,
            "worst": iso.worst,
        },
        "nonisometry": nonisometry,
        "one_form": one_form,
    });
    Ok(vec![Artifact::json("certify.json", &report)])
}

/// Largest stored window `[t_a, t_b] ∋ 0` on which `‖Ric_v‖²` is strictly
/// monotone. Ric_v has the same trace throughout, so states in the window have
/// pairwise distinct Ric_v spectra and hence distinct critical value sets.
fn monotone_window(tr: &FlowTrajectory) -> Option<(f64, f64)> {
    let s = &tr.ric_norm_series;
    let zero = tr.index_of(0.0)?;
    if s.len() < 2 {
        return None;
    }
    let sign = |i: usize| (s[i + 1].1 - s[i].1).signum();
    let dir = if zero + 1 < s.len() {
        sign(zero)
    } else {
        sign(zero - 1)
    };
    if dir == 0.0 {
        return None;
    }
    let monotone = |i: usize| s[i + 1].1 != s[i].1 && sign(i) == dir;
    let mut hi = zero;
    while hi + 1 < s.len() && monotone(hi) {
        hi += 1;
    }
    let mut lo = zero;
    while lo > 0 && monotone(lo - 1) {
        lo -= 1;
    }
    (hi > lo).then(|| (s[lo].0, s[hi].0))
}

/// Integrates the invariant-preserving flow; returns the trajectory CSV and a
/// summary.
pub fn cmd_flow(config: &RunConfig) -> CliResult<Vec<Artifact>> {
    config.validate()?;
    let (j, label) = config.first()?;
    let tr = integrate_flow(&j, config.t_end, config.dt, config.drift_bound)?;
    let first = tr.index_of(0.0).expect("t = 0 is stored");
    let last = if config.t_end < 0.0 {
        0
    } else {
        tr.states.len() - 1
    };
    let summary = json!({
        "schema": SCHEMA,
        "command": "flow",
        "input": label,
        "m": j.m(),
        "method": tr.method,
        "t_end": config.t_end,
        "dt": config.dt,
        "step_size": tr.step_size,
        "steps": tr.states.len() - 1,
        "drift_bound": config.drift_bound,
        "generic": genericity_check(&j, config.tol_verdict)?,
        "dq_along_y": dq_along_y(&j)?,
        "degraded": tr.degraded,
        "max_drift": tr.max_drift(),
        "max_skew_correction": tr.max_skew_correction,
        "q": { "start": tr.q_series[first].1, "end": tr.q_series[last].1 },
        "ric_norm_sq": { "start": tr.ric_norm_series[first].1, "end": tr.ric_norm_series[last].1 },
        "distinct_critical_values_window": monotone_window(&tr),
    });
    let mut out = vec![
        Artifact {
            name: "flow.csv".into(),
            contents: tr.to_csv(),
        },
        Artifact::json("flow_summary.json", &summary),
    ];
    if config.write_states {
        for (i, s) in tr.states.iter().enumerate() {
            let v = json!({ "schema": SCHEMA, "t": s.t, "j": to_value(&s.j) });
            out.push(Artifact::json(&format!("states/state_{i:05}.json"), &v));
        }
    }
    Ok(out)
}

/// Curvature report with the closed-form scalar-curvature integrals and an
/// optional `c_Ric` quadrature.
pub fn cmd_report(config: &RunConfig) -> CliResult<Vec<Artifact>> {
    config.validate()?;
    let (j, label) = config.first()?;
    let base = config.base()?;
    if base.rank() != j.r() {
        return Err(CliError::Config(format!(
            "base preset {} has rank {}, map has {} components",
            config.base,
            base.rank(),
            j.r()
        )));
    }
    let quadrature = match config.samples {
        Some(n) => to_value(&c_ric_quadrature(&j, &base, n, config.seed)?),
        None => Value::Null,
    };
    let report = json!({
        "schema": SCHEMA,
        "command": "report",
        "input": label,
        "base": config.base,
        "curvature": to_value(&curvature_report(&j, &base)),
        "c_s_exact": c_s_exact(&j, &base),
        "total_scal_integral": total_scal_integral(&j, &base),
        "c_ric_quadrature": quadrature,
    });
    Ok(vec![Artifact::json("report.json", &report)])
}

pub fn execute(config: &RunConfig) -> CliResult<Vec<Artifact>> {
    match config.command {
        Command::Certify => cmd_certify(config),
        Command::Flow => cmd_flow(config),
        Command::Report => cmd_report(config),
    }
}

pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> CliResult<()> {
    for a in artifacts {
        let path = dir.join(&a.name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::Io {
                path: parent.to_path_buf(),
                source: e,
            })?;
        }
        fs::write(&path, &a.contents).map_err(|e| CliError::Io { path, source: e })?;
    }
    Ok(())
}

/// Runs a command, writes its artifacts to `--out` (or the main JSON to
/// stdout), reports errors on stderr and returns the exit code.
pub fn run(config: &RunConfig) -> i32 {
    let result = execute(config).and_then(|artifacts| {
        match &config.out {
            Some(dir) => write_artifacts(dir, &artifacts)?,
            None => {
                if let Some(a) = artifacts.iter().find(|a| a.name.ends_with(".json")) {
                    print!("{}", a.contents);
                }
            }
        }
        Ok(())
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
