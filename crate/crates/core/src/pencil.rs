//! Sparse symmetric matrix pairs `(A, B)` for `A x = λ B x`.

use std::fmt::Write as _;
use std::path::Path;

use faer::sparse::{SparseColMat, Triplet};

use crate::{Error, Result};

pub type SparseMatrix = SparseColMat<usize, f64>;

/// Mesh entity carrying a retained degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dof {
    Node(usize),
    Edge(usize),
    Cell(usize),
}

#[derive(Debug, Clone)]
pub struct SparseSymmetricPencil {
    a: SparseMatrix,
    b: SparseMatrix,
    dof_map: Vec<Dof>,
}

impl SparseSymmetricPencil {
    /// Duplicate triplets are summed.
    pub fn from_triplets(
        a: &[Triplet<usize, usize, f64>],
        b: &[Triplet<usize, usize, f64>],
        dof_map: Vec<Dof>,
    ) -> Result<Self> {
        let n = dof_map.len();
        let build = |t: &[Triplet<usize, usize, f64>]| {
            SparseMatrix::try_new_from_triplets(n, n, t)
                .map_err(|e| Error::InvalidArgument(format!("sparse assembly: {e:?}")))
        };
        Ok(Self { a: build(a)?, b: build(b)?, dof_map })
    }

    pub fn a(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn b(&self) -> &SparseMatrix {
        &self.b
    }

    pub fn dof_map(&self) -> &[Dof] {
        &self.dof_map
    }

    pub fn dim(&self) -> usize {
        self.dof_map.len()
    }

    /// Pencil with `A` replaced by `A + c B`.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        let mut trips: Vec<_> = triplets(&self.a).collect();
        trips.extend(triplets(&self.b).map(|t| Triplet::new(t.row, t.col, c * t.val)));
        let b: Vec<_> = triplets(&self.b).collect();
        Self::from_triplets(&trips, &b, self.dof_map.clone())
    }

    pub fn write_matrix_market(&self, dir: &Path, prefix: &str) -> Result<()> {
        std::fs::write(dir.join(format!("{prefix}_A.mtx")), matrix_market(&self.a))?;
        std::fs::write(dir.join(format!("{prefix}_B.mtx")), matrix_market(&self.b))?;
        Ok(())
    }
}

pub fn triplets(m: &SparseMatrix) -> impl Iterator<Item = Triplet<usize, usize, f64>> + '_ {
    let col_ptr = m.col_ptr();
    let rows = m.row_idx();
    let vals = m.val();
    (0..m.ncols()).flat_map(move |j| (col_ptr[j]..col_ptr[j + 1]).map(move |p| Triplet::new(rows[p], j, vals[p])))
}

/// `y = M x` for a sparse matrix stored by columns.
pub fn matvec(m: &SparseMatrix, x: &[f64], y: &mut [f64]) {
    y.iter_mut().for_each(|v| *v = 0.0);
    let col_ptr = m.col_ptr();
    let rows = m.row_idx();
    let vals = m.val();
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        for p in col_ptr[j]..col_ptr[j + 1] {
            y[rows[p]] += vals[p] * xj;
        }
    }
}

pub fn entry(m: &SparseMatrix, i: usize, j: usize) -> f64 {
    m.as_ref().get(i, j).copied().unwrap_or(0.0)
}

/// Largest `|M_ij - M_ji|`.
pub fn symmetry_defect(m: &SparseMatrix) -> f64 {
    triplets(m).map(|t| (t.val - entry(m, t.col, t.row)).abs()).fold(0.0, f64::max)
}

pub fn to_dense(m: &SparseMatrix) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; m.ncols()]; m.nrows()];
    for t in triplets(m) {
        d[t.row][t.col] += t.val;
    }
    d
}

/// Matrix Market symmetric coordinate text (lower triangle, 1-based).
pub fn matrix_market(m: &SparseMatrix) -> String {
    let lower: Vec<_> = triplets(m).filter(|t| t.row >= t.col).collect();
    let mut out = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
    let _ = writeln!(out, "{} {} {}", m.nrows(), m.ncols(), lower.len());
    for t in lower {
        let _ = writeln!(out, "{} {} {:e}", t.row + 1, t.col + 1, t.val);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}
