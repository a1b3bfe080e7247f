//! Polynomial potentials, their exterior infimum `σ(R)` and per-element
//! Bernstein representations.

pub mod bernstein;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::mesh::{Mesh, Point};
use crate::{Error, Result};

pub use bernstein::{bernstein_integral, bernstein_max, bernstein_min, bernstein_product, BernsteinPoly};

pub const MAX_DEGREE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    /// `(|x|² - a²)²`
    RingV1,
    /// `(x₁² - a²)² + x₂²`
    DoubleWellV2,
    /// `|x|²`
    Harmonic,
    CustomPoly,
}

/// Polynomial potential of total degree at most four, stored as monomial
/// coefficients `(i, j) -> c` for `c x₁^i x₂^j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub a: f64,
    #[serde(serialize_with = "serialize_monomials")]
    pub monomial_coeffs: BTreeMap<(u32, u32), f64>,
    /// User-asserted lower bound of `V` outside the disk, custom potentials
    /// only.
    pub asserted_sigma: Option<f64>,
}

fn serialize_monomials<S: serde::Serializer>(
    map: &BTreeMap<(u32, u32), f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(map.len()))?;
    for (&(i, j), &c) in map {
        seq.serialize_element(&(i, j, c))?;
    }
    seq.end()
}

impl PotentialSpec {
    pub fn ring_v1(a: f64) -> Self {
        let a2 = a * a;
        let monomials = [((4, 0), 1.0), ((2, 2), 2.0), ((0, 4), 1.0), ((2, 0), -2.0 * a2), ((0, 2), -2.0 * a2), ((0, 0), a2 * a2)];
        Self {
            kind: PotentialKind::RingV1,
            a,
            monomial_coeffs: monomials.into_iter().collect(),
            asserted_sigma: None,
        }
    }

    pub fn double_well_v2(a: f64) -> Self {
        let a2 = a * a;
        let monomials = [((4, 0), 1.0), ((2, 0), -2.0 * a2), ((0, 0), a2 * a2), ((0, 2), 1.0)];
        Self {
            kind: PotentialKind::DoubleWellV2,
            a,
            monomial_coeffs: monomials.into_iter().collect(),
            asserted_sigma: None,
        }
    }

    pub fn harmonic() -> Self {
        Self {
            kind: PotentialKind::Harmonic,
            a: 0.0,
            monomial_coeffs: [((2, 0), 1.0), ((0, 2), 1.0)].into_iter().collect(),
            asserted_sigma: None,
        }
    }

    /// Custom polynomial; rejected if the degree exceeds four or a random
    /// sample finds a negative value.
    pub fn custom(monomials: impl IntoIterator<Item = ((u32, u32), f64)>, asserted_sigma: Option<f64>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for ((i, j), c) in monomials {
            if c != 0.0 {
                *map.entry((i, j)).or_insert(0.0) += c;
            }
        }
        let spec = Self {
            kind: PotentialKind::CustomPoly,
            a: 0.0,
            monomial_coeffs: map,
            asserted_sigma,
        };
        spec.check_degree()?;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..4096 {
            let x = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
            let v = spec.eval(x);
            if v < 0.0 {
                return Err(Error::Domain(format!(
                    "custom potential is negative ({v:e}) at ({}, {})",
                    x[0], x[1]
                )));
            }
        }
        Ok(spec)
    }

    pub fn degree(&self) -> usize {
        self.monomial_coeffs.keys().map(|&(i, j)| (i + j) as usize).max().unwrap_or(0)
    }

    fn check_degree(&self) -> Result<()> {
        let degree = self.degree();
        if degree > MAX_DEGREE {
            return Err(Error::Degree { degree, max: MAX_DEGREE });
        }
        Ok(())
    }

    pub fn eval(&self, x: Point) -> f64 {
        self.monomial_coeffs
            .iter()
            .map(|(&(i, j), &c)| c * x[0].powi(i as i32) * x[1].powi(j as i32))
            .sum()
    }

    pub fn sigma_rule(&self) -> SigmaRule {
        match self.kind {
            PotentialKind::RingV1 => SigmaRule::RingV1 { a: self.a },
            PotentialKind::DoubleWellV2 => SigmaRule::DoubleWellV2 { a: self.a },
            PotentialKind::Harmonic => SigmaRule::Harmonic,
            PotentialKind::CustomPoly => match self.asserted_sigma {
                Some(value) => SigmaRule::Asserted { value },
                None => SigmaRule::Unavailable,
            },
        }
    }
}

/// Closed-form infimum of `V` outside the disk of radius `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SigmaRule {
    RingV1 { a: f64 },
    DoubleWellV2 { a: f64 },
    Harmonic,
    /// A value supplied by the user for a custom potential at the configured
    /// radius.
    Asserted { value: f64 },
    Unavailable,
}

impl SigmaRule {
    /// Radii strictly above this value are inside the validity domain.
    pub fn min_radius(&self) -> f64 {
        match *self {
            SigmaRule::RingV1 { a } => a.abs(),
            SigmaRule::DoubleWellV2 { a } => (a * a + 0.5).sqrt(),
            SigmaRule::Harmonic | SigmaRule::Asserted { .. } | SigmaRule::Unavailable => 0.0,
        }
    }

    pub fn eval(&self, radius: f64) -> Result<f64> {
        if !(radius > self.min_radius()) || !radius.is_finite() {
            return Err(Error::Domain(format!(
                "sigma(R) needs R > {}, got R = {radius}",
                self.min_radius()
            )));
        }
        let r2 = radius * radius;
        match *self {
            SigmaRule::RingV1 { a } => Ok((r2 - a * a) * (r2 - a * a)),
            SigmaRule::DoubleWellV2 { a } => Ok(r2 - a * a - 0.25),
            SigmaRule::Harmonic => Ok(r2),
            SigmaRule::Asserted { value } => Ok(value),
            SigmaRule::Unavailable => Err(Error::Domain(
                "no sigma rule for this potential; the lower bound is disabled".into(),
            )),
        }
    }
}

pub fn sigma(spec: &PotentialSpec, radius: f64) -> Result<f64> {
    spec.sigma_rule().eval(radius)
}

/// Exact degree-4 Bernstein form of `V` on a triangle, by expanding the
/// monomials in the vertex coordinates.
pub fn to_bernstein(spec: &PotentialSpec, triangle: [Point; 3]) -> Result<BernsteinPoly> {
    spec.check_degree()?;
    let x = BernsteinPoly::linear([triangle[0][0], triangle[1][0], triangle[2][0]], triangle);
    let y = BernsteinPoly::linear([triangle[0][1], triangle[1][1], triangle[2][1]], triangle);
    let powers = |base: &BernsteinPoly| -> Result<Vec<BernsteinPoly>> {
        let mut out = vec![BernsteinPoly::constant(1.0, triangle)];
        for _ in 0..MAX_DEGREE {
            let next = out.last().expect("non-empty").product(base)?;
            out.push(next);
        }
        Ok(out)
    };
    let (xp, yp) = (powers(&x)?, powers(&y)?);
    let mut result = BernsteinPoly::new(MAX_DEGREE, vec![0.0; bernstein::n_coeffs(MAX_DEGREE)], triangle)?;
    for (&(i, j), &c) in &spec.monomial_coeffs {
        let term = xp[i as usize].product(&yp[j as usize])?;
        result.add_scaled(c, &term)?;
    }
    Ok(result)
}

/// Element-wise constant under-approximation `V̄`, clamped at zero.
pub fn element_minima(mesh: &Mesh, spec: &PotentialSpec, refine_depth: usize) -> Result<Vec<f64>> {
    (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| Ok(bernstein_min(&to_bernstein(spec, mesh.vertices(t))?, refine_depth).max(0.0)))
        .collect()
}

/// Element-wise constant over-approximation of `V`.
pub fn element_maxima(mesh: &Mesh, spec: &PotentialSpec, refine_depth: usize) -> Result<Vec<f64>> {
    (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| Ok(bernstein_max(&to_bernstein(spec, mesh.vertices(t))?, refine_depth)))
        .collect()
}
