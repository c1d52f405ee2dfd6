//! One pipeline per subcommand. Each reads the resolved config and writes
//! its files through the run's [`OutputDir`].

mod circuit;
mod dynamics;
mod fitdemo;
mod membrane;
mod sensing;

use std::f64::consts::TAU;

use clap::ValueEnum;
use fluxsense::circuit::{BasisConfig, FluxBias, Fluxonium, Level};
use fluxsense::dynamics::QubitDissipation;
use fluxsense::sensing::{ProtocolConfig, SensorQubit};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, Context};
use crate::output::OutputDir;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Transition frequencies over the flux grid.
    Spectrum,
    /// Flux and charge matrix elements over the flux grid.
    Matel,
    /// Sideband-cooling map, full-versus-eliminated comparison and optional flux ramp.
    Cool,
    /// Rabi chevron of the projected qubit model.
    Chevron,
    /// Monte Carlo spectrum-analyzer run with calibration.
    Sense,
    /// Charge sensitivity against interrogation time.
    Sensitivity,
    /// Synthetic calibration data and fits against the planted truth.
    Fitdemo,
    /// Membrane pull-in, charge modulation and coupling figures.
    Membrane,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Matel => "matel",
            Command::Cool => "cool",
            Command::Chevron => "chevron",
            Command::Sense => "sense",
            Command::Sensitivity => "sensitivity",
            Command::Fitdemo => "fitdemo",
            Command::Membrane => "membrane",
        }
    }
}

pub fn run(command: Command, cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    match command {
        Command::Spectrum => circuit::spectrum(cfg, out),
        Command::Matel => circuit::matel(cfg, out),
        Command::Cool => dynamics::cool(cfg, out),
        Command::Chevron => dynamics::chevron(cfg, out),
        Command::Sense => sensing::sense(cfg, out),
        Command::Sensitivity => sensing::sensitivity(cfg, out),
        Command::Fitdemo => fitdemo::fitdemo(cfg, out),
        Command::Membrane => membrane::membrane(cfg, out),
    }
}

fn build_circuit(cfg: &RunConfig) -> CliResult<Fluxonium> {
    let params = cfg.circuit.params();
    params.validate().section("circuit")?;
    let basis = BasisConfig::new(cfg.circuit.dimension).section("circuit")?;
    let c = Fluxonium::new(params, basis).section("circuit")?;
    if !params.regime().heavy_fluxonium {
        log::warn!("circuit parameters are outside the heavy-fluxonium regime");
    }
    Ok(c)
}

fn flux_bias(section: &str, phi0: f64) -> CliResult<FluxBias> {
    FluxBias::from_flux_quanta(phi0).section(section)
}

/// Qubit frequency (Hz), flux matrix element and dissipation at the
/// configured operating point.
#[derive(Debug, Clone, Copy, serde::Serialize)]
struct OperatingPoint {
    f_ge: f64,
    phi_ge: f64,
    t1: f64,
    dissipation: QubitDissipation,
}

impl OperatingPoint {
    fn resolve(cfg: &RunConfig) -> CliResult<Self> {
        let q = &cfg.qubit;
        let (f_ge, phi_ge) = match (q.f_ge, q.phi_ge) {
            (Some(f), Some(p)) => (f, p),
            (f, p) => {
                let m = build_circuit(cfg)?
                    .matrix_elements(flux_bias("qubit", q.flux)?)
                    .section("qubit")?;
                (f.unwrap_or(m.f_ge), p.unwrap_or(m.phi(Level::E, Level::G).norm()))
            }
        };
        for (name, v) in [("f_ge", f_ge), ("phi_ge", phi_ge)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::config(&format!("qubit.{name}"), format!("must be finite and > 0, got {v}")));
            }
        }
        let mut dissipation = QubitDissipation::from_t1(q.t1).section("qubit")?;
        if let Some(t2) = q.t2 {
            let gamma_phi = 1.0 / t2 - dissipation.gamma;
            if !(t2 > 0.0 && gamma_phi >= 0.0) {
                return Err(CliError::config("qubit.t2", format!("need 0 < T2 <= 2 T1, got {t2}")));
            }
            dissipation.gamma_phi = gamma_phi;
        }
        Ok(Self {
            f_ge,
            phi_ge,
            t1: q.t1,
            dissipation,
        })
    }

    fn sensor(&self) -> SensorQubit {
        SensorQubit {
            omega_ge: TAU * self.f_ge,
            phi_ge: self.phi_ge,
            dissipation: self.dissipation,
        }
    }
}

fn protocol(cfg: &RunConfig, seed: u64) -> CliResult<ProtocolConfig> {
    let p = &cfg.protocol;
    let pc = ProtocolConfig {
        tau_i: p.tau_i,
        tau_prep: p.tau_prep,
        n_window: p.n_window,
        padding: p.padding,
        n_windows: p.n_windows,
        readout_scale: p.readout_scale,
        seed,
    };
    pc.validate().section("protocol")?;
    if pc.n_windows == 0 {
        return Err(CliError::config("protocol.n_windows", "need at least one window"));
    }
    Ok(pc)
}
