//! Smallest eigenpairs of a sparse symmetric pencil by shift-invert Lanczos.
//!
//! Each round runs a fully reorthogonalized Lanczos process on
//! `S = (A - σB)⁻¹ B` in the `B` inner product, deflated against every
//! eigenvector locked so far. A fresh random start per round recovers the
//! missing members of degenerate pairs. The run stops once `k + 2` values
//! are locked and a deflated round finds nothing below the `k`-th one; a
//! final Rayleigh–Ritz step on the locked basis polishes the pairs.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::LltError;
use faer::sparse::Triplet;
use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::pencil::{matvec, triplets, SparseMatrix, SparseSymmetricPencil};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Bound on the relative residual of every returned pair.
    pub tol: f64,
    pub seed: u64,
    /// Fixed shift; `None` picks a small negative shift from the pencil scale.
    pub shift: Option<f64>,
    pub max_rounds: usize,
    pub krylov_dim: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            seed: 42,
            shift: None,
            max_rounds: 60,
            krylov_dim: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverDiagnostics {
    pub shift: f64,
    pub rounds: usize,
    pub operator_applications: usize,
    pub locked: usize,
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    /// `B`-orthonormal.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖Ax - λBx‖₂ / max(‖Ax‖₂, 1e-6 ‖A‖₁ ‖x‖₂)`
    pub residuals: Vec<f64>,
    pub diagnostics: SolverDiagnostics,
}

impl EigenResult {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}

struct ShiftInvert<'a> {
    pencil: &'a SparseSymmetricPencil,
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
    shift: f64,
    applications: usize,
}

impl<'a> ShiftInvert<'a> {
    fn new(pencil: &'a SparseSymmetricPencil, shift: f64) -> Result<Self> {
        let mut trips: Vec<_> = triplets(pencil.a()).collect();
        if shift != 0.0 {
            trips.extend(triplets(pencil.b()).map(|t| Triplet::new(t.row, t.col, -shift * t.val)));
        }
        let n = pencil.dim();
        let shifted = SparseMatrix::try_new_from_triplets(n, n, &trips)
            .map_err(|e| Error::InvalidArgument(format!("shifted matrix: {e:?}")))?;
        let llt = shifted.sp_cholesky(Side::Lower).map_err(|e| match e {
            LltError::Numeric(faer::linalg::cholesky::llt::factor::LltError::NonPositivePivot { index }) => {
                Error::Factorization { pivot: index, shift }
            }
            other => Error::InvalidArgument(format!("factorization: {other:?}")),
        })?;
        Ok(Self { pencil, llt, shift, applications: 0 })
    }

    fn b(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        matvec(self.pencil.b(), x, &mut y);
        y
    }

    // (A - σB)⁻¹ rhs
    fn solve(&mut self, rhs: &[f64]) -> Vec<f64> {
        self.applications += 1;
        let mut m = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        self.llt.solve_in_place(m.as_mut());
        (0..rhs.len()).map(|i| m[(i, 0)]).collect()
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Largest absolute column sum.
fn norm_one(m: &SparseMatrix) -> f64 {
    let col_ptr = m.col_ptr();
    let vals = m.val();
    (0..m.ncols())
        .map(|j| vals[col_ptr[j]..col_ptr[j + 1]].iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn trace(m: &SparseMatrix) -> f64 {
    triplets(m).filter(|t| t.row == t.col).map(|t| t.val).sum()
}

struct Pair {
    lambda: f64,
    x: Vec<f64>,
    bx: Vec<f64>,
}

struct Ritz {
    lambda: f64,
    x: Vec<f64>,
    converged: bool,
}

// Vectors and their B-images.
type VectorGroup<'a> = (&'a [Vec<f64>], &'a [Vec<f64>]);

// Removes the B-components along each group of vectors (with precomputed
// B-images), in order, twice. The last group is left cleanest.
fn b_orthogonalize(w: &mut [f64], groups: &[VectorGroup]) {
    for _ in 0..2 {
        for (basis, basis_b) in groups {
            for (v, bv) in basis.iter().zip(basis_b.iter()) {
                let c = dot(w, bv);
                axpy(-c, v, w);
            }
        }
    }
}

fn lanczos_round(op: &mut ShiftInvert, locked: &[Pair], m: usize, lock_tol: f64, rng: &mut ChaCha8Rng) -> Vec<Ritz> {
    let n = op.pencil.dim();
    let locked_x: Vec<Vec<f64>> = locked.iter().map(|p| p.x.clone()).collect();
    let locked_bx: Vec<Vec<f64>> = locked.iter().map(|p| p.bx.clone()).collect();

    let mut q: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    b_orthogonalize(&mut q, &[(&locked_x, &locked_bx)]);
    let mut bq = op.b(&q);
    let nrm = dot(&q, &bq).sqrt();
    if !(nrm > 0.0) {
        return Vec::new();
    }
    q.iter_mut().for_each(|v| *v /= nrm);
    bq.iter_mut().for_each(|v| *v /= nrm);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut basis_b: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut alpha = Vec::with_capacity(m);
    let mut beta: Vec<f64> = Vec::with_capacity(m);
    for _ in 0..m {
        let mut w = op.solve(&bq);
        let a = dot(&w, &bq);
        basis.push(q);
        basis_b.push(bq);
        alpha.push(a);
        // Locked directions last: the basis carries rounding-level locked
        // components that shift-invert amplifies step by step.
        b_orthogonalize(&mut w, &[(&basis, &basis_b), (&locked_x, &locked_bx)]);
        let bw = op.b(&w);
        let b = dot(&w, &bw).max(0.0).sqrt();
        beta.push(b);
        if b <= 1e-12 * a.abs().max(f64::MIN_POSITIVE) || basis.len() == m {
            break;
        }
        q = w.into_iter().map(|v| v / b).collect();
        bq = bw.into_iter().map(|v| v / b).collect();
    }

    let size = alpha.len();
    let t = Mat::from_fn(size, size, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = t.self_adjoint_eigen(Side::Lower).expect("tridiagonal eigendecomposition");
    let (s, u) = (eig.S(), eig.U());
    let last_beta = beta[size - 1];
    let mut out: Vec<Ritz> = (0..size)
        .map(|i| {
            let theta = s[i];
            let estimate = (last_beta * u[(size - 1, i)]).abs() / theta.abs().max(f64::MIN_POSITIVE);
            let mut x = vec![0.0; n];
            for (j, v) in basis.iter().enumerate() {
                axpy(u[(j, i)], v, &mut x);
            }
            let lambda = if theta > 0.0 { op.shift + 1.0 / theta } else { f64::INFINITY };
            Ritz {
                lambda,
                x,
                converged: theta > 0.0 && estimate <= lock_tol,
            }
        })
        .collect();
    out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    out
}

/// The `k` algebraically smallest eigenpairs of `A x = λ B x`, ascending.
pub fn smallest_eigs(pencil: &SparseSymmetricPencil, k: usize, opts: &SolverOptions) -> Result<EigenResult> {
    let n = pencil.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= {n}, got k = {k}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("solver tolerance must be positive".into()));
    }
    let shift = opts.shift.unwrap_or_else(|| {
        let scale = trace(pencil.a()).abs() / trace(pencil.b()).abs().max(f64::MIN_POSITIVE);
        -1e-6 * scale.max(1.0)
    });
    let mut op = ShiftInvert::new(pencil, shift)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let lock_tol = (opts.tol * 1e-3).min(1e-10);
    let target = (k + 2).min(n);
    let mut m = opts.krylov_dim.unwrap_or((2 * target + 20).max(40)).clamp(1, n);

    let mut locked: Vec<Pair> = Vec::new();
    let mut rounds = 0;
    let mut done = false;
    while rounds < opts.max_rounds && locked.len() < n {
        rounds += 1;
        let avail = n - locked.len();
        let ritz = lanczos_round(&mut op, &locked, m.min(avail), lock_tol, &mut rng);
        if locked.len() >= target {
            let mut values: Vec<f64> = locked.iter().map(|p| p.lambda).collect();
            values.sort_by(f64::total_cmp);
            let kth = values[k - 1];
            match ritz.first() {
                None => {
                    done = true;
                    break;
                }
                Some(first) if first.converged && first.lambda > kth + 1e-9 * kth.abs().max(1e-12) => {
                    done = true;
                    break;
                }
                _ => {}
            }
        }
        let before = locked.len();
        for r in ritz.into_iter().take_while(|r| r.converged) {
            let bx = op.b(&r.x);
            locked.push(Pair { lambda: r.lambda, x: r.x, bx });
        }
        if locked.len() == before {
            m = (2 * m).min(n);
        }
    }
    if locked.len() == n {
        done = true;
    }
    if !done || locked.len() < k {
        let residuals = if locked.is_empty() {
            Vec::new()
        } else {
            rayleigh_ritz(pencil, &locked).2
        };
        return Err(Error::NoConvergence { rounds, residuals });
    }

    let (eigenvalues, eigenvectors, residuals) = rayleigh_ritz(pencil, &locked);
    let result = EigenResult {
        eigenvalues: eigenvalues[..k].to_vec(),
        eigenvectors: eigenvectors[..k].to_vec(),
        residuals: residuals[..k].to_vec(),
        diagnostics: SolverDiagnostics {
            shift,
            rounds,
            operator_applications: op.applications,
            locked: locked.len(),
        },
    };
    if result.max_residual() > opts.tol {
        return Err(Error::NoConvergence { rounds, residuals: result.residuals });
    }
    Ok(result)
}

// Projects the pencil on the span of the locked vectors and returns sorted
// values, B-orthonormal vectors and relative residuals.
fn rayleigh_ritz(pencil: &SparseSymmetricPencil, locked: &[Pair]) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let n = pencil.dim();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(locked.len());
    let mut basis_b: Vec<Vec<f64>> = Vec::with_capacity(locked.len());
    for p in locked {
        let mut v = p.x.clone();
        b_orthogonalize(&mut v, &[(&basis, &basis_b)]);
        let mut bv = vec![0.0; n];
        matvec(pencil.b(), &v, &mut bv);
        let nrm = dot(&v, &bv).max(0.0).sqrt();
        if nrm <= 1e-10 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= nrm);
        bv.iter_mut().for_each(|x| *x /= nrm);
        basis.push(v);
        basis_b.push(bv);
    }
    let size = basis.len();
    let basis_a: Vec<Vec<f64>> = basis
        .iter()
        .map(|v| {
            let mut av = vec![0.0; n];
            matvec(pencil.a(), v, &mut av);
            av
        })
        .collect();
    let g = Mat::from_fn(size, size, |i, j| 0.5 * (dot(&basis[i], &basis_a[j]) + dot(&basis[j], &basis_a[i])));
    let eig = g.self_adjoint_eigen(Side::Lower).expect("projected eigendecomposition");
    let (s, u) = (eig.S(), eig.U());
    let a_norm = norm_one(pencil.a());

    let mut values = Vec::with_capacity(size);
    let mut vectors = Vec::with_capacity(size);
    let mut residuals = Vec::with_capacity(size);
    for i in 0..size {
        let lambda = s[i];
        let mut x = vec![0.0; n];
        let mut ax = vec![0.0; n];
        let mut bx = vec![0.0; n];
        for j in 0..size {
            let c = u[(j, i)];
            axpy(c, &basis[j], &mut x);
            axpy(c, &basis_a[j], &mut ax);
            axpy(c, &basis_b[j], &mut bx);
        }
        let r: Vec<f64> = ax.iter().zip(&bx).map(|(a, b)| a - lambda * b).collect();
        let denom = norm(&ax).max(1e-6 * a_norm * norm(&x)).max(f64::MIN_POSITIVE);
        values.push(lambda);
        vectors.push(x);
        residuals.push(norm(&r) / denom);
    }
    (values, vectors, residuals)
}
