//! Mesh → assemble → solve → bounds, for one density or a refinement study.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::RunConfig;
use super::report::{format_sig, MeshStats, Rounding, RunReport, SolveSummary, StageError, SCHEMA_VERSION};
use crate::bounds::{combined_bounds, interpolation_constant, BoundRow};
use crate::eigsolve::{smallest_eigs, EigenResult};
use crate::fem_cecr::assemble_cecr;
use crate::fem_p1::assemble_p1;
use crate::mesh::{generate_polar_ring_mesh, mesh_quality, Mesh};
use crate::pencil::{BoundaryCondition, SparseSymmetricPencil};
use crate::potential::{element_minima, PotentialKind};
use crate::{Error, Result};

const FLOATING_POINT_NOTE: &str = "bounds are certified modulo floating-point rounding and the stated solver residuals";
const AGMON_NOTE: &str = "eigenfunctions decay like exp(-rho(x)) in the Agmon distance; no decay-based error prediction is made";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunFlags {
    /// Directed rounding of displayed bounds and an upward-rounded `C_h`.
    pub rigor: bool,
    pub export_mesh: bool,
    pub export_matrices: bool,
}

/// Artifacts kept alongside a report for export.
pub struct RunArtifacts {
    pub mesh: Option<Mesh>,
    pub upper_pencil: Option<SparseSymmetricPencil>,
    pub neumann_pencil: Option<SparseSymmetricPencil>,
}

fn stage_err(stage: &str, e: &Error) -> StageError {
    StageError { stage: stage.into(), message: e.to_string() }
}

fn summary(pencil: &SparseSymmetricPencil, res: &EigenResult) -> SolveSummary {
    SolveSummary {
        dofs: pencil.dim(),
        eigenvalues: res.eigenvalues.clone(),
        residuals: res.residuals.clone(),
        max_residual: res.max_residual(),
        diagnostics: res.diagnostics.clone(),
    }
}

fn label(cfg: &RunConfig) -> String {
    let name = match cfg.potential.kind {
        PotentialKind::RingV1 => format!("ring V1 (a = {})", cfg.potential.a),
        PotentialKind::DoubleWellV2 => format!("double well V2 (a = {})", cfg.potential.a),
        PotentialKind::Harmonic => "harmonic |x|^2".into(),
        PotentialKind::CustomPoly => "custom polynomial".into(),
    };
    format!("{name}, R = {}, k = {}", cfg.radius, cfg.k)
}

/// Runs both eigensolves and assembles the report. Stage failures are
/// recorded in the report rather than returned, so a partial report can
/// always be written.
pub fn compute(cfg: &RunConfig, flags: RunFlags) -> (RunReport, RunArtifacts) {
    let mut report = RunReport {
        schema_version: SCHEMA_VERSION,
        label: label(cfg),
        rigor: flags.rigor,
        config: cfg.clone(),
        mesh: None,
        sigma_r: None,
        h_max: None,
        ch: None,
        ch_sq: None,
        eigensolves: 0,
        upper_solve: None,
        neumann_solve: None,
        vbar_min: None,
        certified: false,
        rows: Vec::new(),
        all_valid: false,
        error: None,
        notes: vec![FLOATING_POINT_NOTE.into(), AGMON_NOTE.into()],
    };
    let mut artifacts = RunArtifacts { mesh: None, upper_pencil: None, neumann_pencil: None };
    let opts = cfg.solver_options();

    let mesh = match generate_polar_ring_mesh(cfg.radius, cfg.n_rings) {
        Ok(m) => m,
        Err(e) => {
            report.error = Some(stage_err("mesh", &e));
            return (report, artifacts);
        }
    };
    let quality = mesh_quality(&mesh);
    if quality.low_angle_warning {
        report.notes.push(format!(
            "minimum angle {:.2} deg is below 15 deg; the interpolation constant assumes shape-regular elements",
            quality.min_angle_deg
        ));
    }
    report.mesh = Some(MeshStats {
        n_rings: cfg.n_rings,
        radius: cfg.radius,
        contains_disk: mesh.contains_disk(),
        min_boundary_line_distance: mesh.min_boundary_line_distance(),
        total_area: mesh.total_area(),
        quality,
    });
    let (ch, ch_sq) = interpolation_constant(mesh.h_max(), flags.rigor);
    report.h_max = Some(mesh.h_max());
    report.ch = Some(ch);
    report.ch_sq = Some(ch_sq);

    let upper_pencil = match assemble_p1(&mesh, &cfg.potential, BoundaryCondition::Dirichlet) {
        Ok(p) => p,
        Err(e) => {
            report.error = Some(stage_err("assemble_p1", &e));
            artifacts.mesh = Some(mesh);
            return (report, artifacts);
        }
    };
    report.eigensolves += 1;
    let upper = match smallest_eigs(&upper_pencil, cfg.k, &opts) {
        Ok(r) => r,
        Err(e) => {
            report.error = Some(stage_err("upper_solve", &e));
            artifacts.mesh = Some(mesh);
            artifacts.upper_pencil = Some(upper_pencil);
            return (report, artifacts);
        }
    };
    report.upper_solve = Some(summary(&upper_pencil, &upper));
    artifacts.upper_pencil = Some(upper_pencil);

    let sigma_r = match cfg.potential.sigma_rule().eval(cfg.radius) {
        Ok(s) => Some(s),
        Err(e) => {
            report.notes.push(format!("lower bounds disabled: {e}"));
            None
        }
    };
    report.sigma_r = sigma_r;

    let neumann = element_minima(&mesh, &cfg.potential, cfg.refine_depth)
        .map_err(|e| stage_err("element_minima", &e))
        .and_then(|vbar| {
            report.vbar_min = vbar.iter().cloned().reduce(f64::min);
            assemble_cecr(&mesh, &vbar, BoundaryCondition::Neumann).map_err(|e| stage_err("assemble_cecr", &e))
        })
        .and_then(|pencil| {
            report.eigensolves += 1;
            let res = smallest_eigs(&pencil, cfg.k, &opts).map_err(|e| stage_err("neumann_solve", &e));
            artifacts.neumann_pencil = Some(pencil);
            res
        });

    let nu = match neumann {
        Ok(res) => {
            let pencil = artifacts.neumann_pencil.as_ref().expect("pencil kept");
            report.neumann_solve = Some(summary(pencil, &res));
            Some(res.eigenvalues)
        }
        Err(e) => {
            report.error = Some(e);
            None
        }
    };

    let residuals_ok = report.upper_solve.as_ref().is_some_and(|s| s.max_residual <= cfg.tol)
        && report.neumann_solve.as_ref().is_some_and(|s| s.max_residual <= cfg.tol);
    report.certified = residuals_ok && mesh.contains_disk();
    if !mesh.contains_disk() {
        report.notes.push("mesh containment of the disk is not certified; all lower bounds are marked invalid".into());
    }

    let upper_vals = upper.eigenvalues;
    let nu_vals = nu.unwrap_or_else(|| vec![f64::NAN; upper_vals.len()]);
    let mut bounds = combined_bounds(&nu_vals, &upper_vals, ch_sq, sigma_r.unwrap_or(f64::NAN));
    bounds.apply_certificate(report.certified);
    report.all_valid = bounds.all_valid();
    if let (Some(k), Some(s)) = (bounds.first_invalid_k(), sigma_r) {
        if bounds.rows[k - 1].exterior_factor <= 0.0 {
            report.notes.push(format!(
                "sigma(R) = {s} does not exceed the upper bound for k >= {k}; increase R to certify lower bounds there"
            ));
        }
    }
    report.rows = bounds.rows;
    artifacts.mesh = Some(mesh);
    (report, artifacts)
}

/// Writes the CSV and JSON reports plus any requested exports into `dir`.
pub fn write_outputs(report: &RunReport, artifacts: &RunArtifacts, flags: RunFlags, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let out = &report.config.output;
    std::fs::write(dir.join(&out.csv), report.to_csv())?;
    std::fs::write(dir.join(&out.json), report.to_json())?;
    if flags.export_mesh {
        if let Some(mesh) = &artifacts.mesh {
            mesh.write_text(&dir.join("mesh.txt"))?;
        }
    }
    if flags.export_matrices {
        if let Some(p) = &artifacts.upper_pencil {
            p.write_matrix_market(dir, "p1_dirichlet")?;
        }
        if let Some(p) = &artifacts.neumann_pencil {
            p.write_matrix_market(dir, "cecr_neumann")?;
        }
    }
    Ok(())
}

/// One certification run; writes reports to `out_dir` (or the configured
/// directory).
pub fn run_pipeline(cfg: &RunConfig, flags: RunFlags, out_dir: Option<&Path>) -> Result<RunReport> {
    let (report, artifacts) = compute(cfg, flags);
    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.dir.clone());
    write_outputs(&report, &artifacts, flags, &dir)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n_rings: usize,
    pub h_max: f64,
    pub k: usize,
    pub lower: Option<f64>,
    pub upper: f64,
    pub width: Option<f64>,
    pub rel_gap: Option<f64>,
    /// Width relative to the previous (coarser) run.
    pub width_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub schema_version: u32,
    pub runs: Vec<RunReport>,
    pub summary: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn exit_code(&self) -> i32 {
        let completed = self.runs.iter().filter(|r| r.exit_code() != 1).count();
        if completed < 2 {
            1
        } else if self.runs.iter().all(|r| r.exit_code() == 0) {
            0
        } else {
            2
        }
    }

    /// Relative gaps for index `k` across runs, coarse to fine.
    pub fn rel_gaps(&self, k: usize) -> Vec<Option<f64>> {
        self.summary.iter().filter(|r| r.k == k).map(|r| r.rel_gap).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n_rings,h_max,k,lower,upper,width,rel_gap_percent,width_ratio\n");
        let f = |x: Option<f64>| x.map(|v| format_sig(v, Rounding::Nearest)).unwrap_or_default();
        for r in &self.summary {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.n_rings,
                format_sig(r.h_max, Rounding::Nearest),
                r.k,
                f(r.lower),
                format_sig(r.upper, Rounding::Nearest),
                f(r.width),
                f(r.rel_gap.map(|g| 100.0 * g)),
                f(r.width_ratio)
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn valid_lower(row: &BoundRow) -> Option<f64> {
    row.lower.filter(|_| row.valid)
}

/// Runs every density concurrently; reports are ordered by decreasing
/// `h_max`.
pub fn run_convergence(cfg: &RunConfig, rings: &[usize], flags: RunFlags) -> Result<ConvergenceReport> {
    if rings.len() < 2 {
        return Err(Error::Config("convergence mode needs at least 2 mesh densities".into()));
    }
    let mut runs: Vec<RunReport> = rings.par_iter().map(|&n| compute(&cfg.with_rings(n), flags).0).collect();
    runs.sort_by(|a, b| {
        let h = |r: &RunReport| r.h_max.unwrap_or(f64::INFINITY);
        h(b).total_cmp(&h(a)).then(a.config.n_rings.cmp(&b.config.n_rings))
    });
    let mut summary = Vec::new();
    for k in 1..=cfg.k {
        let mut prev_width: Option<f64> = None;
        for run in runs.iter().filter(|r| r.exit_code() != 1) {
            let row = &run.rows[k - 1];
            let lower = valid_lower(row);
            let width = lower.map(|l| row.upper - l);
            summary.push(ConvergenceRow {
                n_rings: run.config.n_rings,
                h_max: run.h_max.unwrap_or(f64::NAN),
                k,
                lower,
                upper: row.upper,
                width,
                rel_gap: row.rel_gap.filter(|_| row.valid),
                width_ratio: width.zip(prev_width).map(|(w, p)| w / p),
            });
            prev_width = width;
        }
    }
    Ok(ConvergenceReport { schema_version: SCHEMA_VERSION, runs, summary })
}

/// Writes `convergence.csv` and `convergence.json`.
pub fn write_convergence(report: &ConvergenceReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("convergence.csv"), report.to_csv())?;
    std::fs::write(dir.join("convergence.json"), report.to_json())?;
    Ok(())
}
