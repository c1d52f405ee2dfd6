use serde::Serialize;

use fluxsense::circuit::{matrix_elements, spectrum_vs_flux, sweep_solutions, FluxBias, Level, RegimeFlags, TransitionTable};

use super::build_circuit;
use crate::config::RunConfig;
use crate::error::{CliResult, Context};
use crate::output::{OutputDir, Table};

pub const SPECTRUM_COLUMNS: [&str; 7] = ["phi_ext_rad", "f_ge_Hz", "f_gf_Hz", "f_gh_Hz", "f_ef_Hz", "f_eh_Hz", "f_fh_Hz"];

const PAIRS: [(Level, Level); 6] = [
    (Level::G, Level::E),
    (Level::G, Level::F),
    (Level::G, Level::H),
    (Level::E, Level::F),
    (Level::E, Level::H),
    (Level::F, Level::H),
];

#[derive(Serialize)]
struct SpectrumSummary {
    regime: RegimeFlags,
    dimension: usize,
    points: usize,
    frustration: TransitionTable,
}

pub fn spectrum(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let c = build_circuit(cfg)?;
    let grid = cfg.flux.biases().section("flux")?;
    let mut table = Table::new(&SPECTRUM_COLUMNS);
    for t in spectrum_vs_flux(&c, &grid) {
        let t = t.section("circuit")?;
        let mut row = vec![t.phi_ext];
        row.extend(t.as_array());
        table.push(row);
    }
    out.write_csv("spectrum.csv", &table)?;
    out.write_json(
        "spectrum.json",
        &SpectrumSummary {
            regime: c.params.regime(),
            dimension: c.basis.dimension,
            points: grid.len(),
            frustration: c.transitions(FluxBias::FRUSTRATION).section("circuit")?,
        },
    )
}

pub fn matel_columns() -> Vec<String> {
    let mut cols = vec!["phi_ext_rad".to_string(), "f_ge_Hz".to_string()];
    for prefix in ["abs_phi", "abs_n"] {
        for (a, b) in PAIRS {
            cols.push(format!("{prefix}_{}{}", a.symbol(), b.symbol()));
        }
    }
    cols.extend(["c_0", "c_x", "c_z"].map(String::from));
    cols
}

pub fn matel(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let c = build_circuit(cfg)?;
    let grid = cfg.flux.biases().section("flux")?;
    let mut table = Table::new(&matel_columns());
    for (flux, sol) in grid.iter().zip(sweep_solutions(&c, &grid, 4)) {
        let m = matrix_elements(&sol.section("circuit")?, &c.ops, *flux);
        let mut row = vec![flux.radians(), m.f_ge];
        row.extend(PAIRS.iter().map(|&(a, b)| m.phi(a, b).norm()));
        row.extend(PAIRS.iter().map(|&(a, b)| m.charge(a, b).norm()));
        row.extend([m.c_0, m.c_x, m.c_z]);
        table.push(row);
    }
    out.write_csv("matel.csv", &table)
}
