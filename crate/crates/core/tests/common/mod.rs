#![allow(dead_code)]

use eigbound::mesh::Point;

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((1.0 - x) / 2.0, w / 2.0));
    }
    out
}

/// `∫_K f` by the collapsed (Duffy) tensor Gauss rule with `n` points per
/// direction; exact for polynomials of degree `<= 2n - 2`.
pub fn triangle_quadrature(tri: [Point; 3], n: usize, f: impl Fn(Point) -> f64) -> f64 {
    let gl = gauss_legendre(n);
    let [a, b, c] = tri;
    let jac = ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).abs();
    let mut sum = 0.0;
    for &(u, wu) in &gl {
        for &(v, wv) in &gl {
            let (s, t) = (u, v * (1.0 - u));
            let x = [a[0] + s * (b[0] - a[0]) + t * (c[0] - a[0]), a[1] + s * (b[1] - a[1]) + t * (c[1] - a[1])];
            sum += wu * wv * (1.0 - u) * f(x);
        }
    }
    sum * jac
}

/// `(1/|e|) ∫_e f` by Gauss–Legendre.
pub fn edge_average(p: Point, q: Point, n: usize, f: impl Fn(Point) -> f64) -> f64 {
    gauss_legendre(n)
        .iter()
        .map(|&(s, w)| w * f([p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]))
        .sum()
}

pub fn lambda_bar(i: usize, x: Point, tri: [Point; 3]) -> f64 {
    let [a, b, c] = tri;
    let area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let (p, q) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
    ((p[0] - x[0]) * (q[1] - x[1]) - (p[1] - x[1]) * (q[0] - x[0])) / area
}
