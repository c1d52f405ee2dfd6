use serde::Serialize;

use fluxsense::electromech::{coupling_figures, membrane_report, CouplingReport, MembraneParams, MembraneReport};

use super::OperatingPoint;
use crate::config::RunConfig;
use crate::error::{CliResult, Context};
use crate::output::OutputDir;

#[derive(Serialize)]
struct MembraneSummary {
    params: MembraneParams,
    qubit: OperatingPoint,
    delta_q_e_per_rthz: f64,
    membrane: MembraneReport,
    coupling: CouplingReport,
}

pub fn membrane(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let p = cfg.membrane;
    let op = OperatingPoint::resolve(cfg)?;
    let report = membrane_report(&p).section("membrane")?;
    let coupling = coupling_figures(report.n_drive, op.f_ge, op.phi_ge, op.t1, p.capacitance, cfg.coupling.delta_q)
        .section("coupling")?;
    out.write_json(
        "membrane.json",
        &MembraneSummary {
            params: p,
            qubit: op,
            delta_q_e_per_rthz: cfg.coupling.delta_q,
            membrane: report,
            coupling,
        },
    )
}
