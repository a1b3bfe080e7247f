use eigbound::eigsolve::{smallest_eigs, SolverOptions};
use eigbound::pencil::{matvec, Dof, SparseSymmetricPencil};
use faer::sparse::Triplet;
use std::f64::consts::PI;

fn tridiag(n: usize) -> SparseSymmetricPencil {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..n {
        a.push(Triplet::new(i, i, 2.0));
        b.push(Triplet::new(i, i, 1.0));
        if i + 1 < n {
            a.push(Triplet::new(i, i + 1, -1.0));
            a.push(Triplet::new(i + 1, i, -1.0));
        }
    }
    SparseSymmetricPencil::from_triplets(&a, &b, (0..n).map(Dof::Node).collect()).unwrap()
}

/// `A` tridiagonal Laplacian, `B` a non-diagonal SPD mass-like matrix.
fn generalized(n: usize) -> SparseSymmetricPencil {
    let mut b = Vec::new();
    for i in 0..n {
        b.push(Triplet::new(i, i, 4.0 / 6.0));
        if i + 1 < n {
            b.push(Triplet::new(i, i + 1, 1.0 / 6.0));
            b.push(Triplet::new(i + 1, i, 1.0 / 6.0));
        }
    }
    let a: Vec<_> = eigbound::pencil::triplets(tridiag(n).a()).collect();
    SparseSymmetricPencil::from_triplets(&a, &b, (0..n).map(Dof::Node).collect()).unwrap()
}

#[test]
fn tridiagonal_closed_form() {
    let n = 50;
    let res = smallest_eigs(&tridiag(n), 5, &SolverOptions::default()).unwrap();
    for (j, &l) in res.eigenvalues.iter().enumerate() {
        let exact = 4.0 * (((j + 1) as f64) * PI / (2.0 * (n + 1) as f64)).sin().powi(2);
        assert!((l - exact).abs() < 1e-10, "{j}: {l} vs {exact}");
    }
    assert!(res.max_residual() <= 1e-8);
}

#[test]
fn generalized_closed_form() {
    // Linear FEM on a uniform grid: λ_j = 6 (1 - cos θ) / (2 + cos θ), θ = jπ/(n+1)
    let n = 60;
    let res = smallest_eigs(&generalized(n), 4, &SolverOptions::default()).unwrap();
    for (j, &l) in res.eigenvalues.iter().enumerate() {
        let th = (j + 1) as f64 * PI / (n + 1) as f64;
        let exact = 6.0 * (1.0 - th.cos()) / (2.0 + th.cos());
        assert!((l - exact).abs() < 1e-10, "{j}: {l} vs {exact}");
    }
}

#[test]
fn rayleigh_quotients_and_b_orthonormality() {
    let p = generalized(40);
    let res = smallest_eigs(&p, 4, &SolverOptions::default()).unwrap();
    let n = p.dim();
    let (mut ax, mut bx) = (vec![0.0; n], vec![0.0; n]);
    for (i, x) in res.eigenvectors.iter().enumerate() {
        matvec(p.a(), x, &mut ax);
        matvec(p.b(), x, &mut bx);
        let xax: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
        let xbx: f64 = x.iter().zip(&bx).map(|(a, b)| a * b).sum();
        assert!((xax / xbx - res.eigenvalues[i]).abs() < 1e-10);
        assert!((xbx - 1.0).abs() < 1e-10);
        for y in &res.eigenvectors[..i] {
            let ybx: f64 = y.iter().zip(&bx).map(|(a, b)| a * b).sum();
            assert!(ybx.abs() < 1e-9);
        }
    }
}

#[test]
fn shift_invariance() {
    let p = generalized(40);
    let base = smallest_eigs(&p, 3, &SolverOptions::default()).unwrap().eigenvalues;
    for shift in [-0.5, -1e-3, 0.001] {
        let opts = SolverOptions { shift: Some(shift), ..Default::default() };
        let got = smallest_eigs(&p, 3, &opts).unwrap().eigenvalues;
        for (a, b) in base.iter().zip(&got) {
            assert!((a - b).abs() < 1e-10, "shift {shift}: {a} {b}");
        }
    }
    let moved = smallest_eigs(&p.shifted(3.0).unwrap(), 3, &SolverOptions::default()).unwrap().eigenvalues;
    for (a, b) in base.iter().zip(&moved) {
        assert!((a + 3.0 - b).abs() < 1e-9);
    }
}

#[test]
fn deterministic_for_fixed_seed() {
    let p = tridiag(80);
    let a = smallest_eigs(&p, 4, &SolverOptions::default()).unwrap();
    let b = smallest_eigs(&p, 4, &SolverOptions::default()).unwrap();
    assert_eq!(a.eigenvalues, b.eigenvalues);
    assert_eq!(a.eigenvectors, b.eigenvectors);
    assert_eq!(a.diagnostics, b.diagnostics);
}
