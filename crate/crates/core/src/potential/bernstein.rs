//! Bivariate polynomials on a triangle in barycentric Bernstein form.
//!
//! Coefficients of degree `d` are stored for multi-indices `(i, j, k)` with
//! `i + j + k = d` in graded lexicographic order: `i` descending, then `j`
//! descending. For `d = 2` that is `200, 110, 101, 020, 011, 002`.

use crate::mesh::{signed_area, Point};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinPoly {
    degree: usize,
    coeffs: Vec<f64>,
    triangle: [Point; 3],
}

pub fn n_coeffs(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Position of multi-index `(i, j, d - i - j)` in the coefficient array.
pub fn index(degree: usize, i: usize, j: usize) -> usize {
    let r = degree - i;
    r * (r + 1) / 2 + (r - j)
}

/// Multi-indices of the given degree in storage order.
pub fn multi_indices(degree: usize) -> impl Iterator<Item = [usize; 3]> {
    (0..=degree)
        .rev()
        .flat_map(move |i| (0..=degree - i).rev().map(move |j| [i, j, degree - i - j]))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|m| m as f64).product()
}

/// `d! / (i! j! k!)`
pub fn multinomial(alpha: [usize; 3]) -> f64 {
    factorial(alpha[0] + alpha[1] + alpha[2]) / (factorial(alpha[0]) * factorial(alpha[1]) * factorial(alpha[2]))
}

impl BernsteinPoly {
    pub fn new(degree: usize, coeffs: Vec<f64>, triangle: [Point; 3]) -> Result<Self> {
        if coeffs.len() != n_coeffs(degree) {
            return Err(Error::InvalidArgument(format!(
                "degree {degree} needs {} coefficients, got {}",
                n_coeffs(degree),
                coeffs.len()
            )));
        }
        Ok(Self { degree, coeffs, triangle })
    }

    pub fn constant(value: f64, triangle: [Point; 3]) -> Self {
        Self { degree: 0, coeffs: vec![value], triangle }
    }

    /// Linear polynomial taking the given values at the three vertices.
    pub fn linear(values: [f64; 3], triangle: [Point; 3]) -> Self {
        Self { degree: 1, coeffs: values.to_vec(), triangle }
    }

    /// Barycentric coordinate `λ_m` as a degree-1 form.
    pub fn barycentric(m: usize, triangle: [Point; 3]) -> Self {
        let mut values = [0.0; 3];
        values[m] = 1.0;
        Self::linear(values, triangle)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn triangle(&self) -> &[Point; 3] {
        &self.triangle
    }

    pub fn coeff(&self, alpha: [usize; 3]) -> f64 {
        self.coeffs[index(self.degree, alpha[0], alpha[1])]
    }

    pub fn area(&self) -> f64 {
        let [a, b, c] = self.triangle;
        signed_area(a, b, c).abs()
    }

    /// Barycentric coordinates of `x` with respect to the triangle.
    pub fn barycentric_of(&self, x: Point) -> [f64; 3] {
        let [a, b, c] = self.triangle;
        let total = signed_area(a, b, c);
        let l1 = signed_area(x, b, c) / total;
        let l2 = signed_area(a, x, c) / total;
        [l1, l2, 1.0 - l1 - l2]
    }

    pub fn eval_barycentric(&self, lambda: [f64; 3]) -> f64 {
        // de Casteljau
        self.blossom(&vec![lambda; self.degree])
    }

    pub fn eval(&self, x: Point) -> f64 {
        self.eval_barycentric(self.barycentric_of(x))
    }

    /// Polar form evaluated at the given barycentric points, one per degree.
    fn blossom(&self, points: &[[f64; 3]]) -> f64 {
        debug_assert_eq!(points.len(), self.degree);
        let mut work = self.coeffs.clone();
        let mut level = self.degree;
        for mu in points {
            let next = level - 1;
            let mut out = vec![0.0; n_coeffs(next)];
            for (pos, alpha) in multi_indices(next).enumerate() {
                let [i, j, _] = alpha;
                out[pos] = mu[0] * work[index(level, i + 1, j)]
                    + mu[1] * work[index(level, i, j + 1)]
                    + mu[2] * work[index(level, i, j)];
            }
            work = out;
            level = next;
        }
        work[0]
    }

    /// Exact product via coefficient convolution with multinomial weights.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.triangle != other.triangle {
            return Err(Error::TriangleMismatch);
        }
        let degree = self.degree + other.degree;
        let mut coeffs = vec![0.0; n_coeffs(degree)];
        for (pa, a) in multi_indices(self.degree).enumerate() {
            let wa = multinomial(a) * self.coeffs[pa];
            if wa == 0.0 {
                continue;
            }
            for (pb, b) in multi_indices(other.degree).enumerate() {
                let g = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
                coeffs[index(degree, g[0], g[1])] += wa * multinomial(b) * other.coeffs[pb] / multinomial(g);
            }
        }
        Ok(Self { degree, coeffs, triangle: self.triangle })
    }

    /// Same polynomial written in degree `self.degree + by`.
    pub fn elevate(&self, by: usize) -> Self {
        if by == 0 {
            return self.clone();
        }
        let one = Self {
            degree: by,
            coeffs: vec![1.0; n_coeffs(by)],
            triangle: self.triangle,
        };
        self.product(&one).expect("same triangle")
    }

    pub fn add_scaled(&mut self, scale: f64, other: &Self) -> Result<()> {
        if self.triangle != other.triangle {
            return Err(Error::TriangleMismatch);
        }
        let target = self.degree.max(other.degree);
        if self.degree < target {
            *self = self.elevate(target - self.degree);
        }
        let other = other.elevate(target - other.degree);
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += scale * o;
        }
        Ok(())
    }

    /// `∫_K p = |K| Σ b_α / C(d+2, 2)`
    pub fn integral(&self) -> f64 {
        self.area() * self.coeffs.iter().sum::<f64>() / n_coeffs(self.degree) as f64
    }

    pub fn coeff_min(&self) -> f64 {
        self.coeffs.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn coeff_max(&self) -> f64 {
        self.coeffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Forms of the same polynomial on the four midpoint sub-triangles.
    pub fn subdivide(&self) -> [Self; 4] {
        const E1: [f64; 3] = [1.0, 0.0, 0.0];
        const E2: [f64; 3] = [0.0, 1.0, 0.0];
        const E3: [f64; 3] = [0.0, 0.0, 1.0];
        const M12: [f64; 3] = [0.5, 0.5, 0.0];
        const M13: [f64; 3] = [0.5, 0.0, 0.5];
        const M23: [f64; 3] = [0.0, 0.5, 0.5];
        let children = [[E1, M12, M13], [M12, E2, M23], [M13, M23, E3], [M23, M13, M12]];
        children.map(|w| self.restrict(w))
    }

    // restriction to the sub-triangle with the given barycentric vertices
    fn restrict(&self, w: [[f64; 3]; 3]) -> Self {
        let to_cartesian = |mu: [f64; 3]| -> Point {
            let [a, b, c] = self.triangle;
            [
                mu[0] * a[0] + mu[1] * b[0] + mu[2] * c[0],
                mu[0] * a[1] + mu[1] * b[1] + mu[2] * c[1],
            ]
        };
        let triangle = [to_cartesian(w[0]), to_cartesian(w[1]), to_cartesian(w[2])];
        let coeffs = multi_indices(self.degree)
            .map(|g| {
                let mut pts = Vec::with_capacity(self.degree);
                for (m, &count) in g.iter().enumerate() {
                    pts.extend(std::iter::repeat_n(w[m], count));
                }
                self.blossom(&pts)
            })
            .collect();
        Self { degree: self.degree, coeffs, triangle }
    }
}

/// Certified lower bound of `min_K p`: the smallest Bernstein coefficient
/// over all sub-triangles after `refine_depth` rounds of midpoint
/// subdivision. Never decreases with depth.
pub fn bernstein_min(p: &BernsteinPoly, refine_depth: usize) -> f64 {
    if refine_depth == 0 {
        return p.coeff_min();
    }
    p.subdivide()
        .iter()
        .map(|child| bernstein_min(child, refine_depth - 1))
        .fold(f64::INFINITY, f64::min)
}

/// Upper counterpart of [`bernstein_min`]; used to build element-wise
/// over-approximations in monotonicity checks.
pub fn bernstein_max(p: &BernsteinPoly, refine_depth: usize) -> f64 {
    if refine_depth == 0 {
        return p.coeff_max();
    }
    p.subdivide()
        .iter()
        .map(|child| bernstein_max(child, refine_depth - 1))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn bernstein_product(p: &BernsteinPoly, q: &BernsteinPoly) -> Result<BernsteinPoly> {
    p.product(q)
}

pub fn bernstein_integral(p: &BernsteinPoly) -> f64 {
    p.integral()
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

    #[test]
    fn index_matches_enumeration_order() {
        for d in 0..=8 {
            let all: Vec<_> = multi_indices(d).collect();
            assert_eq!(all.len(), n_coeffs(d));
            for (pos, a) in all.iter().enumerate() {
                assert_eq!(index(d, a[0], a[1]), pos);
            }
        }
        let d2: Vec<_> = multi_indices(2).collect();
        assert_eq!(d2, vec![[2, 0, 0], [1, 1, 0], [1, 0, 1], [0, 2, 0], [0, 1, 1], [0, 0, 2]]);
    }

    #[test]
    fn corner_coefficients_are_vertex_values() {
        let tri = [[0.3, -0.2], [1.4, 0.1], [0.5, 0.9]];
        let coeffs: Vec<f64> = (0..n_coeffs(4)).map(|i| (i as f64 * 0.37).sin()).collect();
        let p = BernsteinPoly::new(4, coeffs, tri).unwrap();
        assert!((p.eval(tri[0]) - p.coeff([4, 0, 0])).abs() < 1e-14);
        assert!((p.eval(tri[1]) - p.coeff([0, 4, 0])).abs() < 1e-14);
        assert!((p.eval(tri[2]) - p.coeff([0, 0, 4])).abs() < 1e-14);
    }

    #[test]
    fn barycentric_product_identity() {
        let l1 = BernsteinPoly::barycentric(0, UNIT);
        let l2 = BernsteinPoly::barycentric(1, UNIT);
        let p = bernstein_product(&l1, &l2).unwrap();
        assert_eq!(p.degree(), 2);
        for a in multi_indices(2) {
            let expected = if a == [1, 1, 0] { 0.5 } else { 0.0 };
            assert_eq!(p.coeff(a), expected);
        }
    }

    #[test]
    fn triangle_mismatch_rejected() {
        let p = BernsteinPoly::constant(1.0, UNIT);
        let q = BernsteinPoly::constant(1.0, [[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]]);
        assert!(matches!(p.product(&q), Err(Error::TriangleMismatch)));
    }

    #[test]
    fn integral_of_one_and_of_a_basis_function() {
        assert_eq!(bernstein_integral(&BernsteinPoly::constant(1.0, UNIT)), 0.5);
        let tri = [[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]];
        for pos in [0, 4, 14] {
            let mut coeffs = vec![0.0; 15];
            coeffs[pos] = 1.0;
            let p = BernsteinPoly::new(4, coeffs, tri).unwrap();
            assert!((bernstein_integral(&p) - 1.0 / 15.0).abs() < 1e-16);
        }
    }

    #[test]
    fn subdivision_reproduces_values() {
        let tri = [[0.1, 0.2], [1.3, -0.4], [0.7, 1.1]];
        let coeffs: Vec<f64> = (0..n_coeffs(4)).map(|i| (i as f64).cos()).collect();
        let p = BernsteinPoly::new(4, coeffs, tri).unwrap();
        for child in p.subdivide() {
            let [a, b, c] = *child.triangle();
            let x = [(a[0] + 2.0 * b[0] + c[0]) / 4.0, (a[1] + 2.0 * b[1] + c[1]) / 4.0];
            assert!((child.eval(x) - p.eval(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_min_is_exact_at_every_depth() {
        let p = BernsteinPoly::constant(2.5, UNIT).elevate(4);
        for depth in 0..4 {
            assert_eq!(bernstein_min(&p, depth), 2.5);
        }
    }
}
