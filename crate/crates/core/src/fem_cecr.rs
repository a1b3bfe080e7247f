//! Enriched Crouzeix–Raviart element and the composite (CECR) forms with a
//! piecewise-constant potential.
//!
//! The local space is `P1 + span{|x|²}` with three edge averages and the
//! cell average as degrees of freedom. The composite pairing `(u, Π₀u)`
//! is carried implicitly: the cell-average DOF already equals `Π₀u` on the
//! element, so the potential term `(V̄ Π₀u, Π₀v)` only touches the cell DOF.

use faer::sparse::Triplet;
use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use rayon::prelude::*;

use crate::eigsolve::{smallest_eigs, EigenResult, SolverOptions};
use crate::mesh::{dist, signed_area, Mesh, Point};
use crate::pencil::{BoundaryCondition, Dof, SparseSymmetricPencil};
use crate::potential::{element_minima, PotentialSpec};
use crate::{Error, Result};

pub type LocalMatrix4 = [[f64; 4]; 4];

/// Local DOF index of the cell average.
pub const CELL: usize = 3;

/// Symmetric 6-point rule exact for polynomials of degree 4, as
/// `(barycentric point, weight)` with weights summing to one.
pub fn degree4_rule() -> [([f64; 3], f64); 6] {
    let s10 = 10f64.sqrt();
    let inner = (38.0 - 44.0 * (0.4f64).sqrt()).sqrt();
    let a = (8.0 - s10 + inner) / 18.0;
    let b = (8.0 - s10 - inner) / 18.0;
    let root = (213_125.0 - 53_320.0 * s10).sqrt();
    let wa = (620.0 + root) / 3720.0;
    let wb = (620.0 - root) / 3720.0;
    let (ca, cb) = (1.0 - 2.0 * a, 1.0 - 2.0 * b);
    [
        ([ca, a, a], wa),
        ([a, ca, a], wa),
        ([a, a, ca], wa),
        ([cb, b, b], wb),
        ([b, cb, b], wb),
        ([b, b, cb], wb),
    ]
}

/// Nodal basis of the ECR element on one triangle.
///
/// Shape functions are stored in the scaled local monomials
/// `{1, ξ, η, ξ² + η²}` with `(ξ, η) = (x - c) / s`, `c` the centroid and `s`
/// the longest edge; this spans the same space as `{1, x, y, |x|²}`.
#[derive(Debug, Clone)]
pub struct EcrLocalBasis {
    vertices: [Point; 3],
    center: Point,
    scale: f64,
    area: f64,
    // coef[l][j]: coefficient of local monomial l in shape function j
    coef: [[f64; 4]; 4],
    dof_matrix: [[f64; 4]; 4],
}

fn sq(p: Point) -> f64 {
    p[0] * p[0] + p[1] * p[1]
}

impl EcrLocalBasis {
    pub fn new(vertices: [Point; 3]) -> Result<Self> {
        let area = signed_area(vertices[0], vertices[1], vertices[2]);
        if !(area > 0.0) {
            return Err(Error::DegenerateTriangle { index: 0, area });
        }
        let center = [
            (vertices[0][0] + vertices[1][0] + vertices[2][0]) / 3.0,
            (vertices[0][1] + vertices[1][1] + vertices[2][1]) / 3.0,
        ];
        let scale = (0..3)
            .map(|l| dist(vertices[l], vertices[(l + 1) % 3]))
            .fold(0.0, f64::max);
        let local = vertices.map(|v| [(v[0] - center[0]) / scale, (v[1] - center[1]) / scale]);

        let mut m = [[0.0; 4]; 4];
        for (l, row) in m.iter_mut().take(3).enumerate() {
            let (p, q) = (local[(l + 1) % 3], local[(l + 2) % 3]);
            let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
            *row = [1.0, mid[0], mid[1], (sq(p) + sq(q) + p[0] * q[0] + p[1] * q[1]) / 3.0];
        }
        let centroid = [
            (local[0][0] + local[1][0] + local[2][0]) / 3.0,
            (local[0][1] + local[1][1] + local[2][1]) / 3.0,
        ];
        m[CELL] = [1.0, centroid[0], centroid[1], Self::midpoint_average(&local, sq)];

        let dm = Mat::from_fn(4, 4, |i, j| m[i][j]);
        let det = dm.determinant();
        if !(det.abs() > 1e-12) {
            return Err(Error::DegenerateTriangle { index: 0, area });
        }
        let inv = dm.partial_piv_lu().inverse();
        let coef = std::array::from_fn(|l| std::array::from_fn(|j| inv[(l, j)]));
        Ok(Self {
            vertices,
            center,
            scale,
            area,
            coef,
            dof_matrix: m,
        })
    }

    // element average of a quadratic via the 3-midpoint rule
    fn midpoint_average(local: &[Point; 3], f: impl Fn(Point) -> f64) -> f64 {
        (0..3)
            .map(|l| {
                let (p, q) = (local[l], local[(l + 1) % 3]);
                f([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])])
            })
            .sum::<f64>()
            / 3.0
    }

    pub fn vertices(&self) -> &[Point; 3] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// `DOF_i(m_l)` for the scaled monomials.
    pub fn dof_matrix(&self) -> &[[f64; 4]; 4] {
        &self.dof_matrix
    }

    fn to_local(&self, x: Point) -> Point {
        [(x[0] - self.center[0]) / self.scale, (x[1] - self.center[1]) / self.scale]
    }

    pub fn eval(&self, j: usize, x: Point) -> f64 {
        let xi = self.to_local(x);
        let c = &self.coef;
        c[0][j] + c[1][j] * xi[0] + c[2][j] * xi[1] + c[3][j] * sq(xi)
    }

    pub fn grad(&self, j: usize, x: Point) -> [f64; 2] {
        let xi = self.to_local(x);
        let c = &self.coef;
        [
            (c[1][j] + 2.0 * c[3][j] * xi[0]) / self.scale,
            (c[2][j] + 2.0 * c[3][j] * xi[1]) / self.scale,
        ]
    }

    /// Coefficients of `N_j` in `{1, x, y, |x|²}`.
    pub fn monomial_coefficients(&self, j: usize) -> [f64; 4] {
        let (s, c) = (self.scale, self.center);
        let k = &self.coef;
        let d = k[3][j] / (s * s);
        [
            k[0][j] - (k[1][j] * c[0] + k[2][j] * c[1]) / s + d * sq(c),
            k[1][j] / s - 2.0 * d * c[0],
            k[2][j] / s - 2.0 * d * c[1],
            d,
        ]
    }

    /// `∫_K ∇N_a·∇N_b`; the gradients are affine so the 3-midpoint rule is
    /// exact.
    pub fn stiffness(&self) -> LocalMatrix4 {
        let mids: Vec<Point> = (0..3)
            .map(|l| {
                let (p, q) = (self.vertices[l], self.vertices[(l + 1) % 3]);
                [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
            })
            .collect();
        let grads: Vec<[[f64; 2]; 4]> = mids.iter().map(|&m| std::array::from_fn(|j| self.grad(j, m))).collect();
        let mut k = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in a..4 {
                let s: f64 = grads.iter().map(|g| g[a][0] * g[b][0] + g[a][1] * g[b][1]).sum();
                k[a][b] = self.area * s / 3.0;
                k[b][a] = k[a][b];
            }
        }
        k
    }

    /// `∫_K N_a N_b` with the degree-4 rule.
    pub fn mass(&self) -> LocalMatrix4 {
        let v = self.vertices;
        let mut m = [[0.0; 4]; 4];
        for (bary, w) in degree4_rule() {
            let x = [
                bary[0] * v[0][0] + bary[1] * v[1][0] + bary[2] * v[2][0],
                bary[0] * v[0][1] + bary[1] * v[1][1] + bary[2] * v[2][1],
            ];
            let vals: [f64; 4] = std::array::from_fn(|j| self.eval(j, x));
            for a in 0..4 {
                for b in a..4 {
                    m[a][b] += w * self.area * vals[a] * vals[b];
                }
            }
        }
        for a in 0..4 {
            for b in 0..a {
                m[a][b] = m[b][a];
            }
        }
        m
    }
}

pub fn ecr_local_basis(triangle: [Point; 3]) -> Result<EcrLocalBasis> {
    EcrLocalBasis::new(triangle)
}

/// Global numbering: edge DOFs first (interior edges only under Dirichlet),
/// then one cell DOF per triangle.
#[derive(Debug, Clone)]
pub struct CecrDofMap {
    pub edge_dof: Vec<Option<usize>>,
    pub cell_dof: Vec<usize>,
    pub boundary_edges: Vec<usize>,
    pub bc: BoundaryCondition,
    pub n_dofs: usize,
}

impl CecrDofMap {
    pub fn new(mesh: &Mesh, bc: BoundaryCondition) -> Self {
        let mut next = 0;
        let edge_dof = (0..mesh.n_edges())
            .map(|e| {
                if bc == BoundaryCondition::Dirichlet && mesh.is_boundary_edge(e) {
                    None
                } else {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect();
        let cell_dof = (0..mesh.n_triangles()).map(|t| next + t).collect();
        Self {
            edge_dof,
            cell_dof,
            boundary_edges: mesh.boundary_edges().to_vec(),
            bc,
            n_dofs: next + mesh.n_triangles(),
        }
    }

    /// Global DOFs of a triangle in local order (three edges, then cell).
    pub fn local_to_global(&self, mesh: &Mesh, t: usize) -> [Option<usize>; 4] {
        let te = mesh.triangle_edges()[t];
        [self.edge_dof[te[0]], self.edge_dof[te[1]], self.edge_dof[te[2]], Some(self.cell_dof[t])]
    }

    fn dof_entities(&self) -> Vec<Dof> {
        let mut out = vec![Dof::Cell(0); self.n_dofs];
        for (e, d) in self.edge_dof.iter().enumerate() {
            if let Some(d) = d {
                out[*d] = Dof::Edge(e);
            }
        }
        for (t, &d) in self.cell_dof.iter().enumerate() {
            out[d] = Dof::Cell(t);
        }
        out
    }
}

/// `A`: ECR stiffness plus `V̄_K |K|` on each cell DOF; `B`: full ECR mass.
pub fn assemble_cecr(mesh: &Mesh, vbar: &[f64], bc: BoundaryCondition) -> Result<SparseSymmetricPencil> {
    if vbar.len() != mesh.n_triangles() {
        return Err(Error::InvalidArgument(format!(
            "expected {} element potentials, got {}",
            mesh.n_triangles(),
            vbar.len()
        )));
    }
    if let Some((index, &value)) = vbar.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::NegativePotential { index, value });
    }
    let locals: Vec<(LocalMatrix4, LocalMatrix4)> = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let basis = EcrLocalBasis::new(mesh.vertices(t)).map_err(|e| match e {
                Error::DegenerateTriangle { area, .. } => Error::DegenerateTriangle { index: t, area },
                other => other,
            })?;
            let mut a = basis.stiffness();
            a[CELL][CELL] += vbar[t] * basis.area();
            Ok((a, basis.mass()))
        })
        .collect::<Result<_>>()?;

    let dofs = CecrDofMap::new(mesh, bc);
    let mut ta = Vec::with_capacity(16 * locals.len());
    let mut tb = Vec::with_capacity(16 * locals.len());
    for (t, (a, b)) in locals.iter().enumerate() {
        let g = dofs.local_to_global(mesh, t);
        for i in 0..4 {
            let Some(gi) = g[i] else { continue };
            for j in 0..4 {
                let Some(gj) = g[j] else { continue };
                ta.push(Triplet::new(gi, gj, a[i][j]));
                tb.push(Triplet::new(gi, gj, b[i][j]));
            }
        }
    }
    SparseSymmetricPencil::from_triplets(&ta, &tb, dofs.dof_entities())
}

/// Neumann CECR eigenvalues with the certified element minima of `V`
/// (clamped at zero); returns the potential field used as well.
pub fn neumann_cecr_eigs(
    mesh: &Mesh,
    spec: &PotentialSpec,
    k: usize,
    refine_depth: usize,
    opts: &SolverOptions,
) -> Result<(EigenResult, Vec<f64>)> {
    let vbar = element_minima(mesh, spec, refine_depth)?;
    let pencil = assemble_cecr(mesh, &vbar, BoundaryCondition::Neumann)?;
    Ok((smallest_eigs(&pencil, k, opts)?, vbar))
}
