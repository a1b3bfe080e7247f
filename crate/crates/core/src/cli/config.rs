//! Run configuration: TOML sections `[potential]`, `[domain]`,
//! `[discretization]`, `[solver]` and `[output]`.
//!
//! ```toml
//! [potential]
//! kind = "ring_v1"        # ring_v1 | double_well_v2 | harmonic | custom
//! a = 1.0
//! # monomials = ["2 0 1.0", "0 2 1.0"]   # custom: "i j coeff" for coeff x^i y^j
//! # sigma = 36.0                         # custom: asserted inf of V outside the disk
//!
//! [domain]
//! radius = 4.0
//! n_rings = 40
//!
//! [discretization]
//! refine_depth = 2
//! # convergence_rings = [10, 20, 40]
//!
//! [solver]
//! k = 5
//! tol = 1e-8
//! seed = 42
//!
//! [output]
//! dir = "out"
//! csv = "bounds.csv"
//! json = "bounds.json"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::eigsolve::SolverOptions;
use crate::potential::{PotentialKind, PotentialSpec, SigmaRule, MAX_DEGREE};
use crate::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    potential: RawPotential,
    domain: RawDomain,
    #[serde(default)]
    discretization: RawDiscretization,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    kind: String,
    a: Option<f64>,
    #[serde(default)]
    monomials: Vec<String>,
    sigma: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    radius: f64,
    n_rings: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiscretization {
    #[serde(default = "default_depth")]
    refine_depth: usize,
    convergence_rings: Option<Vec<usize>>,
}

impl Default for RawDiscretization {
    fn default() -> Self {
        Self { refine_depth: default_depth(), convergence_rings: None }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(default = "default_k")]
    k: usize,
    #[serde(default = "default_tol")]
    tol: f64,
    #[serde(default = "default_seed")]
    seed: u64,
}

impl Default for RawSolver {
    fn default() -> Self {
        Self { k: default_k(), tol: default_tol(), seed: default_seed() }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default = "default_dir")]
    dir: PathBuf,
    #[serde(default = "default_csv")]
    csv: String,
    #[serde(default = "default_json")]
    json: String,
}

impl Default for RawOutput {
    fn default() -> Self {
        Self { dir: default_dir(), csv: default_csv(), json: default_json() }
    }
}

fn default_depth() -> usize {
    2
}
fn default_k() -> usize {
    5
}
fn default_tol() -> f64 {
    1e-8
}
fn default_seed() -> u64 {
    42
}
fn default_dir() -> PathBuf {
    PathBuf::from("bound_out")
}
fn default_csv() -> String {
    "bounds.csv".into()
}
fn default_json() -> String {
    "bounds.json".into()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", content = "n_rings", rename_all = "snake_case")]
pub enum RunMode {
    Single,
    Convergence(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputPaths {
    pub dir: PathBuf,
    pub csv: String,
    pub json: String,
}

impl OutputPaths {
    pub fn csv_path(&self) -> PathBuf {
        self.dir.join(&self.csv)
    }

    pub fn json_path(&self) -> PathBuf {
        self.dir.join(&self.json)
    }
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub radius: f64,
    pub n_rings: usize,
    pub k: usize,
    pub refine_depth: usize,
    pub tol: f64,
    pub seed: u64,
    pub output: OutputPaths,
    pub mode: RunMode,
}

/// Recursion depth beyond which the element-minimum enclosure stops paying
/// off (`4^depth` leaves per element).
pub const MAX_REFINE_DEPTH: usize = 6;

impl RunConfig {
    /// Programmatic construction with default discretization, solver and
    /// output settings.
    pub fn new(potential: PotentialSpec, radius: f64, n_rings: usize, k: usize) -> Result<Self> {
        let cfg = Self {
            potential,
            radius,
            n_rings,
            k,
            refine_depth: default_depth(),
            tol: default_tol(),
            seed: default_seed(),
            output: OutputPaths { dir: default_dir(), csv: default_csv(), json: default_json() },
            mode: RunMode::Single,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let a = raw.potential.a;
        let potential = match raw.potential.kind.as_str() {
            "ring_v1" => PotentialSpec::ring_v1(require_a(a, "ring_v1")?),
            "double_well_v2" => PotentialSpec::double_well_v2(require_a(a, "double_well_v2")?),
            "harmonic" => PotentialSpec::harmonic(),
            "custom" => {
                let monomials = raw
                    .potential
                    .monomials
                    .iter()
                    .map(|s| parse_monomial(s))
                    .collect::<Result<Vec<_>>>()?;
                if monomials.is_empty() {
                    return Err(Error::Config("custom potential needs at least one monomial".into()));
                }
                PotentialSpec::custom(monomials, raw.potential.sigma)?
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown potential kind `{other}` (expected ring_v1, double_well_v2, harmonic or custom)"
                )))
            }
        };
        if potential.kind != PotentialKind::CustomPoly && (raw.potential.sigma.is_some() || !raw.potential.monomials.is_empty()) {
            return Err(Error::Config("`sigma` and `monomials` apply to custom potentials only".into()));
        }
        let mode = match raw.discretization.convergence_rings {
            Some(rings) => RunMode::Convergence(rings),
            None => RunMode::Single,
        };
        let cfg = Self {
            potential,
            radius: raw.domain.radius,
            n_rings: raw.domain.n_rings,
            k: raw.solver.k,
            refine_depth: raw.discretization.refine_depth,
            tol: raw.solver.tol,
            seed: raw.solver.seed,
            output: OutputPaths { dir: raw.output.dir, csv: raw.output.csv, json: raw.output.json },
            mode,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad(format!("radius must be positive, got {}", self.radius));
        }
        if !(self.potential.a > 0.0) && matches!(self.potential.kind, PotentialKind::RingV1 | PotentialKind::DoubleWellV2) {
            return bad(format!("a must be positive, got {}", self.potential.a));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.n_rings < 2 {
            return bad(format!("n_rings must be at least 2, got {}", self.n_rings));
        }
        if self.refine_depth > MAX_REFINE_DEPTH {
            return bad(format!("refine_depth must be at most {MAX_REFINE_DEPTH}"));
        }
        if let RunMode::Convergence(rings) = &self.mode {
            if rings.len() < 2 {
                return bad("convergence mode needs at least 2 mesh densities".into());
            }
            if let Some(&n) = rings.iter().find(|&&n| n < 2) {
                return bad(format!("convergence_rings entries must be at least 2, got {n}"));
            }
        }
        let rule = self.potential.sigma_rule();
        match rule {
            SigmaRule::RingV1 { .. } | SigmaRule::DoubleWellV2 { .. } if self.radius <= rule.min_radius() => bad(format!(
                "radius {} is outside the validity domain of sigma(R): need R > {:.6}",
                self.radius,
                rule.min_radius()
            )),
            SigmaRule::Asserted { value } if !(value > 0.0) => bad(format!("asserted sigma must be positive, got {value}")),
            _ => Ok(()),
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions { tol: self.tol, seed: self.seed, ..SolverOptions::default() }
    }

    /// The same configuration at another mesh density.
    pub fn with_rings(&self, n_rings: usize) -> Self {
        Self { n_rings, mode: RunMode::Single, ..self.clone() }
    }
}

fn require_a(a: Option<f64>, kind: &str) -> Result<f64> {
    a.ok_or_else(|| Error::Config(format!("potential `{kind}` needs the parameter `a`")))
}

/// `"i j coeff"` for `coeff x^i y^j`.
pub fn parse_monomial(s: &str) -> Result<((u32, u32), f64)> {
    let err = || Error::Config(format!("monomial `{s}` is not of the form \"i j coeff\""));
    let parts: Vec<&str> = s.split_whitespace().collect();
    let [i, j, c] = parts.as_slice() else { return Err(err()) };
    let i: u32 = i.parse().map_err(|_| err())?;
    let j: u32 = j.parse().map_err(|_| err())?;
    let c: f64 = c.parse().map_err(|_| err())?;
    if (i + j) as usize > MAX_DEGREE {
        return Err(Error::Degree { degree: (i + j) as usize, max: MAX_DEGREE });
    }
    if !c.is_finite() {
        return Err(err());
    }
    Ok(((i, j), c))
}
