//! Job documents and deterministic reports for the command-line front-end.
//!
//! A job is a JSON document:
//!
//! ```json
//! {
//!   "coefficients": [[0.70710678118654752, 0.0], [0.0, 0.70710678118654752]],
//!   "mode": "full",
//!   "g_over_chi": 0.001,
//!   "guard": 10
//! }
//! ```
//!
//! Optional fields: `guard` (default 10), `sweep_ratios` (required for
//! `sweep`), `kappa_over_chi` (required for `lindblad`), `steps_per_pulse`,
//! `renormalize`, `convention` (`"propagator"` or `"reversed"`).
//!
//! Every float in a report is written with 17 significant digits so that
//! identical jobs give byte-identical output and the pulse table can be
//! read back losslessly.

use std::str::FromStr;

use serde::Deserialize;
use serde_json::{json, Map, Number, Value};

use crate::compiler::{compile_with, decompile_check, Pulse, PulseSequence, RotationConvention, TargetState};
use crate::decoherence::{evolve_lindblad_sequence, LossConfig};
use crate::error::{Error, Result};
use crate::fock::C64;
use crate::simulator::{evolve_full_sequence, evolve_rwa_sequence, rwa_error_sweep_with, SimConfig, DEFAULT_GUARD};

pub const REPORT_FORMAT: &str = "kerrfock-report/1";
pub const SWEEP_CSV_HEADER: &str = "ratio,infidelity,leakage";
pub const DEFAULT_STEPS_PER_PULSE: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Compile,
    Rwa,
    Full,
    Lindblad,
    Sweep,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Compile => "compile",
            Mode::Rwa => "rwa",
            Mode::Full => "full",
            Mode::Lindblad => "lindblad",
            Mode::Sweep => "sweep",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "compile" => Ok(Mode::Compile),
            "rwa" => Ok(Mode::Rwa),
            "full" => Ok(Mode::Full),
            "lindblad" => Ok(Mode::Lindblad),
            "sweep" => Ok(Mode::Sweep),
            other => Err(Error::Parse(format!(
                "field `mode`: unknown mode {other:?} (expected compile, rwa, full, lindblad or sweep)"
            ))),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJob {
    coefficients: Vec<[f64; 2]>,
    mode: Option<Mode>,
    g_over_chi: Option<f64>,
    guard: Option<usize>,
    sweep_ratios: Option<Vec<f64>>,
    kappa_over_chi: Option<f64>,
    renormalize: Option<bool>,
    steps_per_pulse: Option<usize>,
    convention: Option<RotationConvention>,
}

/// Command-line flags that take precedence over the document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JobOverrides {
    pub mode: Option<Mode>,
    pub guard: Option<usize>,
    pub renormalize: bool,
    pub sweep_ratios: Option<Vec<f64>>,
    pub kappa_over_chi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    /// Coefficients as given, before any renormalization.
    pub coefficients: Vec<[f64; 2]>,
    pub target: TargetState,
    pub mode: Mode,
    pub g_over_chi: Option<f64>,
    pub guard: usize,
    pub sweep_ratios: Option<Vec<f64>>,
    pub kappa_over_chi: Option<f64>,
    pub renormalize: bool,
    pub steps_per_pulse: usize,
    pub convention: RotationConvention,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobOutput {
    pub report: String,
    pub sweep_csv: Option<String>,
}

pub fn parse_jobspec(text: &str) -> Result<JobSpec> {
    parse_jobspec_with(text, &JobOverrides::default())
}

pub fn parse_jobspec_with(text: &str, overrides: &JobOverrides) -> Result<JobSpec> {
    let raw: RawJob = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;

    if raw.coefficients.is_empty() {
        return Err(Error::Parse("field `coefficients`: must not be empty".into()));
    }
    let mode = overrides
        .mode
        .or(raw.mode)
        .ok_or_else(|| Error::Parse("field `mode`: missing".into()))?;
    let guard = overrides.guard.or(raw.guard).unwrap_or(DEFAULT_GUARD);
    let renormalize = overrides.renormalize || raw.renormalize.unwrap_or(false);
    let sweep_ratios = overrides.sweep_ratios.clone().or(raw.sweep_ratios);
    let kappa_over_chi = overrides.kappa_over_chi.or(raw.kappa_over_chi);
    let steps_per_pulse = raw.steps_per_pulse.unwrap_or(DEFAULT_STEPS_PER_PULSE);

    if mode != Mode::Sweep {
        match raw.g_over_chi {
            None => return Err(Error::Parse(format!("field `g_over_chi`: required for mode {}", mode.as_str()))),
            Some(g) if !(g > 0.0) || !g.is_finite() => {
                return Err(Error::Parse(format!("field `g_over_chi`: must be positive, got {g}")))
            }
            _ => {}
        }
    }
    if mode == Mode::Sweep {
        match &sweep_ratios {
            None => return Err(Error::Parse("field `sweep_ratios`: required for mode sweep".into())),
            Some(r) if r.is_empty() => return Err(Error::Parse("field `sweep_ratios`: must not be empty".into())),
            Some(r) if r.iter().any(|x| !(*x > 0.0) || !x.is_finite()) => {
                return Err(Error::Parse("field `sweep_ratios`: entries must be positive".into()))
            }
            Some(r) if r.windows(2).any(|w| w[1] < w[0]) => {
                return Err(Error::Parse("field `sweep_ratios`: must be sorted ascending".into()))
            }
            _ => {}
        }
    }
    if mode == Mode::Lindblad {
        match kappa_over_chi {
            None => return Err(Error::Parse("field `kappa_over_chi`: required for mode lindblad".into())),
            Some(k) if !(k >= 0.0) || !k.is_finite() => {
                return Err(Error::Parse(format!("field `kappa_over_chi`: must be >= 0, got {k}")))
            }
            _ => {}
        }
    }

    let complex: Vec<C64> = raw.coefficients.iter().map(|[re, im]| C64::new(*re, *im)).collect();
    let target = if renormalize { TargetState::renormalized(complex) } else { TargetState::new(complex) }
        .map_err(|e| match e {
            Error::Normalization { .. } => e,
            other => Error::Parse(format!("field `coefficients`: {other}")),
        })?;

    Ok(JobSpec {
        coefficients: raw.coefficients,
        target,
        mode,
        g_over_chi: raw.g_over_chi,
        guard,
        sweep_ratios,
        kappa_over_chi,
        renormalize,
        steps_per_pulse,
        convention: raw.convention.unwrap_or_default(),
    })
}

/// Formats `x` with 17 significant digits; non-finite values become `null`.
pub fn fixed(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let n = Number::from_str(&format!("{x:.16e}")).expect("formatted float is a valid JSON number");
    Value::Number(n)
}

fn fixed_str(x: f64) -> String {
    format!("{x:.16e}")
}

fn complex_pair(c: &C64) -> Value {
    json!([fixed(c.re), fixed(c.im)])
}

fn job_echo(spec: &JobSpec) -> Value {
    let mut echo = Map::new();
    echo.insert("coefficients".into(), Value::Array(spec.coefficients.iter().map(|[re, im]| json!([fixed(*re), fixed(*im)])).collect()));
    echo.insert("mode".into(), json!(spec.mode.as_str()));
    echo.insert("g_over_chi".into(), spec.g_over_chi.map_or(Value::Null, fixed));
    echo.insert("guard".into(), json!(spec.guard));
    echo.insert(
        "sweep_ratios".into(),
        spec.sweep_ratios.as_ref().map_or(Value::Null, |r| Value::Array(r.iter().copied().map(fixed).collect())),
    );
    echo.insert("kappa_over_chi".into(), spec.kappa_over_chi.map_or(Value::Null, fixed));
    echo.insert("renormalize".into(), json!(spec.renormalize));
    echo.insert("steps_per_pulse".into(), json!(spec.steps_per_pulse));
    echo.insert("convention".into(), json!(spec.convention.as_str()));
    Value::Object(echo)
}

fn pulse_table(seq: &PulseSequence) -> Value {
    let kerr = seq.kerr();
    Value::Array(
        seq.pulses()
            .iter()
            .map(|p| {
                json!({
                    "index": p.index,
                    "detuning_over_chi": fixed(p.detuning / kerr),
                    "g_over_chi": fixed(p.amplitude / kerr),
                    "phase": fixed(p.phase),
                    "duration_chi": fixed(p.duration * kerr),
                })
            })
            .collect(),
    )
}

fn compile_log(seq: &PulseSequence) -> Value {
    let log = seq.compile_log();
    json!({
        "global_phase": fixed(log.global_phase),
        "records": log.records.iter().map(|r| json!({
            "index": r.index,
            "residual": fixed(r.residual),
            "accumulated_phase": fixed(r.accumulated_phase),
        })).collect::<Vec<_>>(),
    })
}

fn fixed_list(xs: &[f64]) -> Value {
    Value::Array(xs.iter().copied().map(fixed).collect())
}

/// Runs a parsed job. Time is measured in units of `1/chi`, so `chi = 1`.
pub fn run_job(spec: &JobSpec) -> Result<JobOutput> {
    let kerr = 1.0;
    let config = SimConfig::with_guard(spec.guard);

    let mut doc = Map::new();
    doc.insert("format".into(), json!(REPORT_FORMAT));
    doc.insert("job".into(), job_echo(spec));
    doc.insert("units".into(), json!({ "angle": "rad", "time": "1/chi", "rate": "chi" }));

    let mut sweep_csv = None;
    if spec.mode == Mode::Sweep {
        let ratios = spec.sweep_ratios.as_deref().unwrap_or_default();
        let rows = rwa_error_sweep_with(&spec.target, ratios, &config, spec.convention)?;
        doc.insert(
            "sweep".into(),
            Value::Array(
                rows.iter()
                    .map(|r| json!({ "ratio": fixed(r.ratio), "infidelity": fixed(r.infidelity), "leakage": fixed(r.leakage) }))
                    .collect(),
            ),
        );
        let mut csv = String::from(SWEEP_CSV_HEADER);
        csv.push('\n');
        for r in &rows {
            csv.push_str(&format!("{},{},{}\n", fixed_str(r.ratio), fixed_str(r.infidelity), fixed_str(r.leakage)));
        }
        sweep_csv = Some(csv);
    } else {
        let g = spec.g_over_chi.expect("validated at parse time") * kerr;
        let seq = compile_with(&spec.target, g, kerr, spec.convention)?;
        doc.insert("pulses".into(), pulse_table(&seq));
        doc.insert("compile_log".into(), compile_log(&seq));

        let dim = spec.target.n_max() + 1 + spec.guard;
        let metrics = match spec.mode {
            Mode::Compile => None,
            Mode::Rwa => {
                let psi = evolve_rwa_sequence(&seq, dim)?;
                let fid = crate::fock::fidelity(&psi, &spec.target.to_state(dim)?)?;
                Some(json!({
                    "fidelity": fixed(fid),
                    "leakage": fixed(psi.population_above(spec.target.n_max())),
                    "final_state": psi.amplitudes().iter().map(complex_pair).collect::<Vec<_>>(),
                }))
            }
            Mode::Full => {
                let report = evolve_full_sequence(&seq, &config, &spec.target)?;
                Some(json!({
                    "fidelity": fixed(report.fidelity_vs_target),
                    "leakage": fixed(report.leakage),
                    "per_pulse_fidelity": fixed_list(&report.per_pulse_fidelity),
                    "truncation_warning": report.truncation_warning,
                    "final_state": report.final_state.amplitudes().iter().map(complex_pair).collect::<Vec<_>>(),
                }))
            }
            Mode::Lindblad => {
                let loss = LossConfig {
                    kappa: spec.kappa_over_chi.expect("validated at parse time") * kerr,
                    steps_per_pulse: spec.steps_per_pulse,
                };
                let report = evolve_lindblad_sequence(&seq, &config, &loss, &spec.target)?;
                let populations: Vec<f64> = (0..report.final_state.dim()).map(|n| report.final_state.population(n)).collect();
                Some(json!({
                    "fidelity": fixed(report.fidelity_vs_target),
                    "leakage": fixed(report.leakage),
                    "per_pulse_fidelity": fixed_list(&report.per_pulse_fidelity),
                    "trace_drift": fixed(report.trace_drift),
                    "purity": fixed(report.purity),
                    "truncation_warning": report.truncation_warning,
                    "populations": fixed_list(&populations),
                }))
            }
            Mode::Sweep => unreachable!(),
        };
        if let Some(m) = metrics {
            doc.insert("metrics".into(), m);
        }
    }

    let mut report = serde_json::to_string_pretty(&Value::Object(doc)).expect("report serializes");
    report.push('\n');
    Ok(JobOutput { report, sweep_csv })
}

fn field<'a>(v: &'a Value, name: &str) -> Result<&'a Value> {
    v.get(name).ok_or_else(|| Error::Parse(format!("report field `{name}` missing")))
}

fn number(v: &Value, name: &str) -> Result<f64> {
    field(v, name)?
        .as_f64()
        .ok_or_else(|| Error::Parse(format!("report field `{name}` is not a number")))
}

/// Reads the pulse table of a report back into a sequence (`chi = 1`).
pub fn read_pulse_sequence(report: &str) -> Result<PulseSequence> {
    let doc: Value = serde_json::from_str(report).map_err(|e| Error::Parse(e.to_string()))?;
    let convention = match field(field(&doc, "job")?, "convention")?.as_str() {
        Some("reversed") => RotationConvention::Reversed,
        Some("propagator") => RotationConvention::Propagator,
        _ => return Err(Error::Parse("report field `convention` is invalid".into())),
    };
    let rows = field(&doc, "pulses")?
        .as_array()
        .ok_or_else(|| Error::Parse("report field `pulses` is not a list".into()))?;
    let pulses = rows
        .iter()
        .map(|row| {
            let index = field(row, "index")?
                .as_u64()
                .ok_or_else(|| Error::Parse("report field `index` is not an integer".into()))?;
            Ok(Pulse {
                index: index as usize,
                detuning: number(row, "detuning_over_chi")?,
                amplitude: number(row, "g_over_chi")?,
                phase: number(row, "phase")?,
                duration: number(row, "duration_chi")?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PulseSequence::new(pulses, 1.0, convention)
}

/// Global phase recorded in a report's compile log.
pub fn read_global_phase(report: &str) -> Result<f64> {
    let doc: Value = serde_json::from_str(report).map_err(|e| Error::Parse(e.to_string()))?;
    number(field(&doc, "compile_log")?, "global_phase")
}

/// Target reconstructed from a report's pulse table, with the recorded
/// global phase restored.
pub fn reconstruct_target(report: &str) -> Result<TargetState> {
    let seq = read_pulse_sequence(report)?;
    let rot = C64::from_polar(1.0, read_global_phase(report)?);
    let state = decompile_check(&seq);
    TargetState::new(state.coefficients().iter().map(|c| c * rot).collect())
}
