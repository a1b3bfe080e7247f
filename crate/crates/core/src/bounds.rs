//! Lower-bound corrections and the two-sided bound chain.
//!
//! `λ̲_k = ν_k / (1 + ν_k C_h²) · (1 - λ̄_k / σ(R))` with `C_h = 0.1490 h_max`.

use serde::Serialize;

/// Constant of the ECR interpolation estimate `C_h <= 0.1490 h_max`.
pub const ECR_CONSTANT: f64 = 0.1490;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiuInput {
    pub nu: f64,
    pub ch: f64,
    pub ch_sq: f64,
}

impl LiuInput {
    /// With `rigor`, `C_h` and `C_h²` are rounded up by one ulp.
    pub fn from_h_max(nu: f64, h_max: f64, rigor: bool) -> Self {
        let (ch, ch_sq) = interpolation_constant(h_max, rigor);
        Self { nu, ch, ch_sq }
    }

    pub fn lower(&self) -> f64 {
        liu_lower(self.nu, self.ch_sq)
    }
}

/// `(C_h, C_h²)` for a mesh size.
pub fn interpolation_constant(h_max: f64, rigor: bool) -> (f64, f64) {
    let ch = ECR_CONSTANT * h_max;
    if rigor {
        let ch = ch.next_up();
        (ch, (ch * ch).next_up())
    } else {
        (ch, ch * ch)
    }
}

/// `ν / (1 + ν C_h²)`; never exceeds `ν`.
pub fn liu_lower(nu: f64, ch_sq: f64) -> f64 {
    nu / (1.0 + nu * ch_sq)
}

pub fn liu_factor(nu: f64, ch_sq: f64) -> f64 {
    1.0 / (1.0 + nu * ch_sq)
}

/// `1 - λ̄_k / σ(R)`. A value `<= 0` means the exterior estimate does not
/// apply to this `k`.
pub fn exterior_factor(upper_k: f64, sigma_r: f64) -> f64 {
    1.0 - upper_k / sigma_r
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub k: usize,
    /// `None` when the exterior factor is not positive.
    pub lower: Option<f64>,
    pub nu: f64,
    pub upper: f64,
    pub rel_gap: Option<f64>,
    pub exterior_factor: f64,
    pub liu_factor: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub sigma_r: f64,
    pub ch_sq: f64,
    pub rows: Vec<BoundRow>,
}

impl BoundsReport {
    /// Clears the validity of every row when the surrounding certificate
    /// (solver residuals, disk containment) fails.
    pub fn apply_certificate(&mut self, certified: bool) {
        if !certified {
            self.rows.iter_mut().for_each(|r| r.valid = false);
        }
    }

    pub fn all_valid(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.valid)
    }

    /// First `k` whose lower bound is unavailable.
    pub fn first_invalid_k(&self) -> Option<usize> {
        self.rows.iter().find(|r| !r.valid).map(|r| r.k)
    }
}

/// Applies both corrections row by row. `nu` and `upper` must have equal
/// length.
pub fn combined_bounds(nu: &[f64], upper: &[f64], ch_sq: f64, sigma_r: f64) -> BoundsReport {
    assert_eq!(nu.len(), upper.len(), "nu and upper lists differ in length");
    let rows = nu
        .iter()
        .zip(upper)
        .enumerate()
        .map(|(i, (&nu_k, &upper_k))| {
            let ext = exterior_factor(upper_k, sigma_r);
            let liu = liu_factor(nu_k, ch_sq);
            let lower = (ext > 0.0).then(|| liu_lower(nu_k, ch_sq) * ext);
            let valid = lower.is_some_and(|l| l <= upper_k && l.is_finite());
            BoundRow {
                k: i + 1,
                lower,
                nu: nu_k,
                upper: upper_k,
                rel_gap: lower.filter(|l| *l > 0.0).map(|l| (upper_k - l) / l),
                exterior_factor: ext,
                liu_factor: liu,
                valid,
            }
        })
        .collect();
    BoundsReport { sigma_r, ch_sq, rows }
}
