//! Run configuration: one JSON document with a flat section per module.
//!
//! Frequencies are in Hz, times in seconds, circuit energies in Hz (E/h) and
//! flux in units of the flux quantum. Every section is optional and falls
//! back to the reference device; keys inside a section that is present are
//! checked strictly.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use fluxsense::circuit::{BasisConfig, CircuitParams, FluxBias};
use fluxsense::electromech::MembraneParams;
use fluxsense::fitting::{PrepFidelity, ReadoutModel};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSection {
    pub e_j: f64,
    pub e_c: f64,
    pub e_l: f64,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default)]
    pub e_ja: Option<f64>,
    #[serde(default)]
    pub e_p: Option<f64>,
    #[serde(default)]
    pub n_array_junctions: Option<u32>,
}

fn default_dimension() -> usize {
    BasisConfig::default().dimension
}

impl Default for CircuitSection {
    fn default() -> Self {
        let p = CircuitParams::reference_device();
        Self {
            e_j: p.e_j,
            e_c: p.e_c,
            e_l: p.e_l,
            dimension: default_dimension(),
            e_ja: None,
            e_p: None,
            n_array_junctions: None,
        }
    }
}

impl CircuitSection {
    pub fn params(&self) -> CircuitParams {
        CircuitParams {
            e_j: self.e_j,
            e_c: self.e_c,
            e_l: self.e_l,
            e_ja: self.e_ja,
            e_p: self.e_p,
            n_array_junctions: self.n_array_junctions,
        }
    }
}

/// Uniform grid in units of Φ₀, endpoints included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluxGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Default for FluxGrid {
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: 1.0,
            points: 201,
        }
    }
}

impl FluxGrid {
    pub fn biases(&self) -> fluxsense::Result<Vec<FluxBias>> {
        linspace(self.start, self.stop, self.points)
            .into_iter()
            .map(FluxBias::from_flux_quanta)
            .collect()
    }
}

pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Operating point of the sensor qubit. Transition frequency and flux matrix
/// element are computed from the circuit unless given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QubitSection {
    pub flux: f64,
    pub f_ge: Option<f64>,
    pub phi_ge: Option<f64>,
    pub t1: f64,
    /// Transverse decay time; Γ_φ = Γ/2 when absent.
    pub t2: Option<f64>,
}

impl Default for QubitSection {
    fn default() -> Self {
        Self {
            flux: 0.5,
            f_ge: None,
            phi_ge: None,
            t1: 34e-6,
            t2: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SidebandChoice {
    Raise,
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CavitySection {
    pub kappa: f64,
    /// Effective sideband coupling g|c_x||α| at `compare_flux`, Hz. The map
    /// holds the implied g|α| fixed across flux.
    pub coupling: f64,
    pub fock_levels: usize,
    /// Δ_R grid of the cooling map, Hz.
    pub detuning_start: f64,
    pub detuning_stop: f64,
    pub detuning_points: usize,
    /// Flux (Φ₀) of the full-versus-eliminated comparison.
    pub compare_flux: f64,
    pub sideband: SidebandChoice,
    /// Trace length; five predicted time constants when absent.
    pub duration: Option<f64>,
    pub samples: usize,
}

impl Default for CavitySection {
    fn default() -> Self {
        Self {
            kappa: 2.4e6,
            coupling: 0.12e6,
            fock_levels: 6,
            detuning_start: -20e6,
            detuning_stop: 20e6,
            detuning_points: 161,
            compare_flux: 0.499,
            sideband: SidebandChoice::Lower,
            duration: None,
            samples: 200,
        }
    }
}

/// Flux ramp evaluated by `cool` after the cooling comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampSection {
    /// `(time s, flux Φ₀)` breakpoints.
    pub points: Vec<(f64, f64)>,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default)]
    pub initial_level: usize,
    #[serde(default = "default_ramp_samples")]
    pub samples: usize,
    #[serde(default)]
    pub dissipation: bool,
}

fn default_levels() -> usize {
    4
}

fn default_ramp_samples() -> usize {
    101
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChevronSection {
    pub n_drive: Vec<f64>,
    /// Drive detuning grid around f_ge, Hz.
    pub detuning_span: f64,
    pub detuning_points: usize,
    pub duration: f64,
    pub duration_points: usize,
    pub levels: usize,
    pub dissipation: bool,
    pub rtol: f64,
}

impl Default for ChevronSection {
    fn default() -> Self {
        Self {
            n_drive: vec![2e-3, 5e-3],
            detuning_span: 0.3e6,
            detuning_points: 61,
            duration: 50e-6,
            duration_points: 101,
            levels: 2,
            dissipation: false,
            rtol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub tau_i: f64,
    pub tau_prep: f64,
    pub n_window: usize,
    pub padding: usize,
    pub n_windows: usize,
    pub readout_scale: f64,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        let p = fluxsense::sensing::ProtocolConfig::default();
        Self {
            tau_i: p.tau_i,
            tau_prep: p.tau_prep,
            n_window: p.n_window,
            padding: p.padding,
            n_windows: p.n_windows,
            readout_scale: p.readout_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToneSection {
    pub n_drive: f64,
    /// Δ = ω_ge − ω_cal divided by 2π, Hz.
    pub delta: f64,
    pub phase: f64,
}

impl Default for ToneSection {
    fn default() -> Self {
        Self {
            n_drive: 8e-4,
            delta: 5e3,
            phase: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SenseSection {
    /// Also write the packed single-shot record.
    pub raw_record: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensitivitySection {
    pub tau_i_start: f64,
    pub tau_i_stop: f64,
    pub points: usize,
}

impl Default for SensitivitySection {
    fn default() -> Self {
        Self {
            tau_i_start: 1e-6,
            tau_i_stop: 100e-6,
            points: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitdemoSection {
    pub truth: PrepFidelity,
    pub theta_points: usize,
    pub shots: u64,
    pub bootstrap: usize,
    pub readout: ReadoutModel,
    /// Planted g, e, f, h populations of the single-shot histogram.
    pub populations: [f64; 4],
    pub iq_shots: usize,
    /// f_ef used for the manifold temperature, Hz.
    pub f_ef: f64,
    pub t1: f64,
    pub t2_star: f64,
    /// Ramsey fringe frequency, Hz.
    pub ramsey_frequency: f64,
    pub coherence_shots: u64,
}

impl Default for FitdemoSection {
    fn default() -> Self {
        Self {
            truth: PrepFidelity {
                p_left_g: 0.9404,
                p_left_e: 0.9587,
                p_left_h: 0.1099,
                prep_g: 0.9767,
                prep_e: 0.0231,
            },
            theta_points: 61,
            shots: 20_000,
            bootstrap: 200,
            readout: ReadoutModel::default(),
            populations: [0.45, 0.45, 0.05, 0.05],
            iq_shots: 200_000,
            f_ef: 3.7e9,
            t1: 34e-6,
            t2_star: 39.7e-6,
            ramsey_frequency: 1.8e6,
            coherence_shots: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingSection {
    /// Charge sensitivity entering δq²/2C, e/√Hz.
    pub delta_q: f64,
}

impl Default for CouplingSection {
    fn default() -> Self {
        Self { delta_q: 33e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub circuit: CircuitSection,
    pub flux: FluxGrid,
    pub qubit: QubitSection,
    pub cavity: CavitySection,
    pub ramp: Option<RampSection>,
    pub chevron: ChevronSection,
    pub protocol: ProtocolSection,
    pub tone: ToneSection,
    pub sense: SenseSection,
    pub sensitivity: SensitivitySection,
    pub fitdemo: FitdemoSection,
    pub membrane: MembraneParams,
    pub coupling: CouplingSection,
}

/// Apply a `--set` override of the form `a.b.c=value`. Values are read as
/// JSON, falling back to a plain string. Sections absent from `doc` are
/// first copied from `defaults`, so a single key can be overridden without
/// restating the rest of its section.
pub fn apply_override(doc: &mut Value, defaults: &Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::config(assignment, "override must have the form section.key=value"))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::config(key, "empty key in override"));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let mut fallback = Some(defaults);
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let map = match node {
            Value::Object(m) => m,
            _ => {
                return Err(CliError::config(
                    &parts[..i].join("."),
                    "cannot override a key inside a non-object value",
                ))
            }
        };
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        fallback = fallback.and_then(|d| d.get(part)).filter(|d| d.is_object());
        node = map
            .entry(part.to_string())
            .or_insert_with(|| fallback.cloned().unwrap_or_else(|| Value::Object(Map::new())));
    }
    unreachable!("override path has at least one component")
}

pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut doc = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::config("", format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::config("", format!("{}: {e}", p.display())))?
        }
        None => Value::Object(Map::new()),
    };
    if !doc.is_object() {
        return Err(CliError::config("", "config must be a JSON object"));
    }
    let defaults = serde_json::to_value(RunConfig::default()).expect("defaults serialize");
    for o in overrides {
        apply_override(&mut doc, &defaults, o)?;
    }
    let cfg: RunConfig = serde_path_to_error::deserialize(doc).map_err(|e| {
        let mut path = e.path().to_string();
        let msg = e.inner().to_string();
        if let Some(field) = msg.strip_prefix("missing field `").and_then(|s| s.split('`').next()) {
            path = if path == "." { field.to_string() } else { format!("{path}.{field}") };
        }
        CliError::config(&path, msg)
    })?;
    Ok(cfg)
}

impl RunConfig {
    /// SHA-256 of the canonical (sorted-key, compact) JSON of the resolved
    /// configuration. The output directory is excluded as it does not affect
    /// any result.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = None;
        hex::encode(Sha256::digest(canonical_json(&c).as_bytes()))
    }

    /// Seed for one named random stream of a run.
    pub fn stream_seed(&self, label: &str) -> u64 {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(label.as_bytes());
        let d = h.finalize();
        u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
    }
}

pub fn canonical_json<T: Serialize>(value: &T) -> String {
    // serde_json maps are ordered by key, so this is canonical.
    let v = serde_json::to_value(value).expect("config serializes");
    serde_json::to_string(&v).expect("value serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ExitKind;

    #[test]
    fn empty_config_is_reference() {
        let c = load(None, &[]).unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.membrane, MembraneParams::reference());
    }

    #[test]
    fn overrides_parse_json_values() {
        let c = load(None, &["circuit.dimension=80".into(), "qubit.f_ge=1.9e6".into(), "seed=7".into()]).unwrap();
        assert_eq!(c.circuit.dimension, 80);
        assert_eq!(c.qubit.f_ge, Some(1.9e6));
        assert_eq!(c.seed, 7);
    }

    #[test]
    fn override_keeps_rest_of_section() {
        let c = load(None, &["circuit.e_c=4e8".into(), "ramp.points=[[0,0.5],[1e-6,0.49]]".into()]).unwrap();
        assert_eq!(c.circuit.e_c, 4e8);
        assert_eq!(c.circuit.e_j, RunConfig::default().circuit.e_j);
        assert_eq!(c.ramp.unwrap().levels, 4);
    }

    #[test]
    fn unknown_key_rejected_with_path() {
        let e = load(None, &["protocol.tau=1".into()]).unwrap_err();
        assert_eq!(e.kind, ExitKind::Config);
        assert_eq!(e.path.as_deref(), Some("protocol.tau"));
    }

    #[test]
    fn missing_field_path_includes_field() {
        let e = load(None, &[r#"circuit={"e_j": 5e9, "e_l": 1.8e8}"#.into()]).unwrap_err();
        assert_eq!(e.path.as_deref(), Some("circuit.e_c"));
    }

    #[test]
    fn hash_tracks_semantics() {
        let a = load(None, &[]).unwrap();
        let b = load(None, &["tone.delta=5000.0".into(), "output_dir=\"elsewhere\"".into()]).unwrap();
        let c = load(None, &["tone.delta=5001".into()]).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn stream_seeds_differ() {
        let c = RunConfig::default();
        assert_ne!(c.stream_seed("a"), c.stream_seed("b"));
        assert_eq!(c.stream_seed("a"), c.clone().stream_seed("a"));
    }

    #[test]
    fn grid_edges() {
        assert!(linspace(0.0, 1.0, 0).is_empty());
        assert_eq!(linspace(0.3, 1.0, 1), vec![0.3]);
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }
}
