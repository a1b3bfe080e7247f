//! Conforming P1 Lagrange discretization of `∫ ∇u·∇v + V u v` with exact
//! potential integration. Its Dirichlet eigenvalues are upper bounds.

use faer::sparse::Triplet;
use rayon::prelude::*;

use crate::eigsolve::{smallest_eigs, EigenResult, SolverOptions};
use crate::mesh::{signed_area, Mesh, Point};
use crate::pencil::{BoundaryCondition, Dof, SparseSymmetricPencil};
use crate::potential::{bernstein_integral, bernstein_product, to_bernstein, BernsteinPoly, PotentialSpec};
use crate::{Error, Result};

pub type LocalMatrix = [[f64; 3]; 3];

/// `∫_K ∇λ_a·∇λ_b` from the vertex coordinates.
pub fn element_stiffness(tri: [Point; 3]) -> Result<LocalMatrix> {
    let area = signed_area(tri[0], tri[1], tri[2]);
    if area <= 0.0 {
        return Err(Error::DegenerateTriangle { index: 0, area });
    }
    let mut grad = [[0.0; 2]; 3];
    for i in 0..3 {
        let (p, q) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
        grad[i] = [p[1] - q[1], q[0] - p[0]];
    }
    let mut k = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            k[a][b] = (grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1]) / (4.0 * area);
        }
    }
    Ok(k)
}

/// `(|K| / 12) [[2,1,1],[1,2,1],[1,1,2]]`
pub fn element_mass(tri: [Point; 3]) -> LocalMatrix {
    let area = signed_area(tri[0], tri[1], tri[2]).abs();
    let mut m = [[area / 12.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = area / 6.0;
    }
    m
}

/// `∫_K V λ_a λ_b`, integrated exactly in Bernstein form.
pub fn element_potential_mass(v: &BernsteinPoly) -> Result<LocalMatrix> {
    let tri = *v.triangle();
    let mut m = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in a..3 {
            let phi = bernstein_product(&BernsteinPoly::barycentric(a, tri), &BernsteinPoly::barycentric(b, tri))?;
            let value = bernstein_integral(&bernstein_product(v, &phi)?);
            m[a][b] = value;
            m[b][a] = value;
        }
    }
    Ok(m)
}

struct Local {
    a: LocalMatrix,
    b: LocalMatrix,
}

/// Stiffness plus potential mass in `A`, L² mass in `B`. Dirichlet drops
/// every node on a boundary edge.
pub fn assemble_p1(mesh: &Mesh, spec: &PotentialSpec, bc: BoundaryCondition) -> Result<SparseSymmetricPencil> {
    let locals: Vec<Local> = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let tri = mesh.vertices(t);
            let stiffness = element_stiffness(tri).map_err(|e| match e {
                Error::DegenerateTriangle { area, .. } => Error::DegenerateTriangle { index: t, area },
                other => other,
            })?;
            let pot = element_potential_mass(&to_bernstein(spec, tri)?)?;
            let mut a = stiffness;
            for i in 0..3 {
                for j in 0..3 {
                    a[i][j] += pot[i][j];
                }
            }
            Ok(Local { a, b: element_mass(tri) })
        })
        .collect::<Result<_>>()?;

    let drop = match bc {
        BoundaryCondition::Dirichlet => mesh.boundary_nodes(),
        BoundaryCondition::Neumann => vec![false; mesh.n_nodes()],
    };
    let mut global = vec![usize::MAX; mesh.n_nodes()];
    let mut dof_map = Vec::new();
    for (node, &dropped) in drop.iter().enumerate() {
        if !dropped {
            global[node] = dof_map.len();
            dof_map.push(Dof::Node(node));
        }
    }

    let mut ta = Vec::with_capacity(9 * locals.len());
    let mut tb = Vec::with_capacity(9 * locals.len());
    for (tri, local) in mesh.triangles().iter().zip(&locals) {
        for i in 0..3 {
            let gi = global[tri[i]];
            if gi == usize::MAX {
                continue;
            }
            for j in 0..3 {
                let gj = global[tri[j]];
                if gj == usize::MAX {
                    continue;
                }
                ta.push(Triplet::new(gi, gj, local.a[i][j]));
                tb.push(Triplet::new(gi, gj, local.b[i][j]));
            }
        }
    }
    SparseSymmetricPencil::from_triplets(&ta, &tb, dof_map)
}

/// The `k` smallest Dirichlet P1 eigenvalues, each an upper bound for the
/// corresponding full-space eigenvalue.
pub fn dirichlet_upper_eigs(mesh: &Mesh, spec: &PotentialSpec, k: usize, opts: &SolverOptions) -> Result<EigenResult> {
    if !mesh.contains_disk() {
        return Err(Error::InvalidMesh("mesh does not certify containment of the disk".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let pencil = assemble_p1(mesh, spec, BoundaryCondition::Dirichlet)?;
    smallest_eigs(&pencil, k, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pencil::{entry, symmetry_defect};

    const UNIT: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

    fn unit_mesh() -> Mesh {
        Mesh::from_parts(UNIT.to_vec(), vec![[0, 1, 2]], 0.1).unwrap()
    }

    fn zero() -> PotentialSpec {
        PotentialSpec::custom([], None).unwrap()
    }

    #[test]
    fn unit_triangle_stiffness_and_mass() {
        let p = assemble_p1(&unit_mesh(), &zero(), BoundaryCondition::Neumann).unwrap();
        let k = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((entry(p.a(), i, j) - k[i][j]).abs() < 1e-15);
                let m = if i == j { 2.0 } else { 1.0 } / 24.0;
                assert!((entry(p.b(), i, j) - m).abs() < 1e-16);
            }
        }
    }

    #[test]
    fn degenerate_element_aborts() {
        assert!(element_stiffness([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).is_err());
    }

    #[test]
    fn dirichlet_drops_boundary_nodes() {
        let mesh = crate::mesh::generate_polar_ring_mesh(1.0, 4).unwrap();
        let p = assemble_p1(&mesh, &PotentialSpec::harmonic(), BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(p.dim(), mesh.n_nodes() - 6 * 4);
        assert!(symmetry_defect(p.a()) < 1e-14);
        assert!(symmetry_defect(p.b()) < 1e-14);
    }

    #[test]
    fn potential_mass_rows_sum_to_moment() {
        // Σ_b ∫ V λ_a λ_b = ∫ V λ_a
        let tri = [[0.2, 0.1], [1.3, 0.4], [0.6, 1.5]];
        let v = to_bernstein(&PotentialSpec::ring_v1(1.0), tri).unwrap();
        let m = element_potential_mass(&v).unwrap();
        for a in 0..3 {
            let moment = bernstein_integral(&bernstein_product(&v, &BernsteinPoly::barycentric(a, tri)).unwrap());
            let row: f64 = m[a].iter().sum();
            assert!((row - moment).abs() < 1e-13 * moment.abs());
        }
    }
}
