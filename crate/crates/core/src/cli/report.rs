//! Run reports: JSON (full precision), CSV (6 significant digits) and the
//! per-k audit printed by the binary.

use std::fmt::Write as _;

use serde::Serialize;

use super::config::RunConfig;
use crate::bounds::BoundRow;
use crate::eigsolve::SolverDiagnostics;
use crate::mesh::QualityReport;

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: &str = "k,lower,nu_neumann,upper,rel_gap_percent,exterior_factor,liu_factor,valid";

const SIG_DIGITS: i32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Nearest,
    Down,
    Up,
}

/// `x` to 6 significant digits. Directed modes move to the neighbouring
/// representable decimal so the printed value never crosses `x`.
pub fn format_sig(x: f64, mode: Rounding) -> String {
    if !x.is_finite() {
        return String::new();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = SIG_DIGITS - 1 - exp;
    if !(0..=15).contains(&decimals) {
        return format_sig_sci(x, mode);
    }
    let scale = 10f64.powi(decimals);
    let scaled = x * scale;
    let mut units = match mode {
        Rounding::Nearest => scaled.round(),
        Rounding::Down => scaled.floor(),
        Rounding::Up => scaled.ceil(),
    };
    // Guard against the scaling step itself rounding across x.
    match mode {
        Rounding::Down if units / scale > x => units -= 1.0,
        Rounding::Up if units / scale < x => units += 1.0,
        _ => {}
    }
    let value = units / scale;
    // A carry such as 9.999995 -> 10.0000 adds a leading digit.
    let decimals = if value.abs() >= 10f64.powi(exp + 1) { (decimals - 1).max(0) } else { decimals };
    format!("{:.*}", decimals as usize, value)
}

fn format_sig_sci(x: f64, mode: Rounding) -> String {
    let nearest = format!("{:.*e}", (SIG_DIGITS - 1) as usize, x);
    let value: f64 = nearest.parse().unwrap_or(x);
    let ok = match mode {
        Rounding::Nearest => true,
        Rounding::Down => value <= x,
        Rounding::Up => value >= x,
    };
    if ok {
        return nearest;
    }
    let (mantissa, exp) = nearest.split_once('e').expect("scientific format");
    let m: f64 = mantissa.parse().expect("mantissa");
    let step = 10f64.powi(-(SIG_DIGITS - 1));
    let m = if mode == Rounding::Down { m - step.copysign(1.0) } else { m + step };
    format!("{:.*}e{exp}", (SIG_DIGITS - 1) as usize, m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshStats {
    pub n_rings: usize,
    pub radius: f64,
    pub contains_disk: bool,
    pub min_boundary_line_distance: f64,
    pub total_area: f64,
    #[serde(flatten)]
    pub quality: QualityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    pub dofs: usize,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub diagnostics: SolverDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

/// Everything written to the JSON report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub label: String,
    pub rigor: bool,
    pub config: RunConfig,
    pub mesh: Option<MeshStats>,
    pub sigma_r: Option<f64>,
    pub h_max: Option<f64>,
    pub ch: Option<f64>,
    pub ch_sq: Option<f64>,
    pub eigensolves: usize,
    pub upper_solve: Option<SolveSummary>,
    pub neumann_solve: Option<SolveSummary>,
    pub vbar_min: Option<f64>,
    pub certified: bool,
    pub rows: Vec<BoundRow>,
    pub all_valid: bool,
    pub error: Option<StageError>,
    pub notes: Vec<String>,
}

impl RunReport {
    /// 0 when every requested `k` is certified, 2 when only part of the
    /// table is, 1 when a stage failed.
    pub fn exit_code(&self) -> i32 {
        if self.error.is_some() || self.rows.is_empty() {
            1
        } else if self.all_valid {
            0
        } else {
            2
        }
    }

    fn lower_mode(&self) -> Rounding {
        if self.rigor { Rounding::Down } else { Rounding::Nearest }
    }

    fn upper_mode(&self) -> Rounding {
        if self.rigor { Rounding::Up } else { Rounding::Nearest }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for r in &self.rows {
            let lower = r.lower.filter(|_| r.valid).map(|l| format_sig(l, self.lower_mode())).unwrap_or_default();
            let gap = r
                .rel_gap
                .filter(|_| r.valid)
                .map(|g| format_sig(100.0 * g, self.upper_mode()))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.k,
                lower,
                format_sig(r.nu, Rounding::Nearest),
                format_sig(r.upper, self.upper_mode()),
                gap,
                format_sig(r.exterior_factor, Rounding::Nearest),
                format_sig(r.liu_factor, Rounding::Nearest),
                r.valid
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Human-readable bound chain `ν → Liu factor → exterior factor → λ̲`.
    pub fn audit(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.label);
        if let Some(m) = &self.mesh {
            let _ = writeln!(
                out,
                "mesh: {} rings, {} nodes, {} triangles, h_max = {:.6}, min angle = {:.2} deg, contains disk: {}",
                m.n_rings, m.quality.n_nodes, m.quality.n_triangles, m.quality.h_max, m.quality.min_angle_deg, m.contains_disk
            );
        }
        if let (Some(ch), Some(ch_sq)) = (self.ch, self.ch_sq) {
            let _ = writeln!(out, "C_h = {ch:.6e}, C_h^2 = {ch_sq:.6e}");
        }
        match self.sigma_r {
            Some(s) => {
                let _ = writeln!(out, "sigma(R) = {s}");
            }
            None => {
                let _ = writeln!(out, "sigma(R) unavailable");
            }
        }
        for (name, s) in [("upper (P1 Dirichlet)", &self.upper_solve), ("lower (CECR Neumann)", &self.neumann_solve)] {
            if let Some(s) = s {
                let _ = writeln!(out, "{name}: {} dofs, max residual {:.2e}", s.dofs, s.max_residual);
            }
        }
        for r in &self.rows {
            let lower = match r.lower.filter(|_| r.valid) {
                Some(l) => format_sig(l, self.lower_mode()),
                None => "invalid".into(),
            };
            let gap = r.rel_gap.filter(|_| r.valid).map(|g| format!("{:.2}%", 100.0 * g)).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "k={}: nu = {} -> liu x{} -> exterior x{} -> lower = {} <= lambda <= upper = {}  (gap {gap})",
                r.k,
                format_sig(r.nu, Rounding::Nearest),
                format_sig(r.liu_factor, Rounding::Nearest),
                format_sig(r.exterior_factor, Rounding::Nearest),
                lower,
                format_sig(r.upper, self.upper_mode()),
            );
        }
        if let Some(e) = &self.error {
            let _ = writeln!(out, "error in stage `{}`: {}", e.stage, e.message);
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}
