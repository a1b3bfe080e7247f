//! Triangulations of the truncated disk.
//!
//! The generator places concentric rings of nodes with `6 i` nodes on ring
//! `i`; the outermost ring is a regular polygon circumscribing the circle of
//! radius `R`, so the union of the triangles contains the closed disk.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::{Error, Result};

pub type Point = [f64; 2];

/// Conforming triangulation with edge topology and a disk-containment
/// certificate.
#[derive(Debug, Clone)]
pub struct Mesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    edge_triangles: Vec<(usize, Option<usize>)>,
    // local edge l is opposite local vertex l
    triangle_edges: Vec<[usize; 3]>,
    boundary_edges: Vec<usize>,
    h_max: f64,
    radius: f64,
    contains_disk: bool,
}

impl Mesh {
    /// Builds the edge topology of a triangle soup. Clockwise triangles are
    /// reoriented; zero-area triangles and non-manifold edges are rejected.
    pub fn from_parts(nodes: Vec<Point>, triangles: Vec<[usize; 3]>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidMesh(format!("radius must be positive, got {radius}")));
        }
        let mut triangles = triangles;
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&v| v >= nodes.len()) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing node")));
            }
            let area = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            if area == 0.0 || !area.is_finite() {
                return Err(Error::DegenerateTriangle { index: t, area });
            }
            if area < 0.0 {
                tri.swap(1, 2);
            }
        }

        let mut lookup: HashMap<[usize; 2], usize> = HashMap::with_capacity(triangles.len() * 2);
        let mut edges = Vec::new();
        let mut edge_triangles: Vec<(usize, Option<usize>)> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for (l, slot) in local.iter_mut().enumerate() {
                let (p, q) = (tri[(l + 1) % 3], tri[(l + 2) % 3]);
                let key = if p < q { [p, q] } else { [q, p] };
                let e = *lookup.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_triangles.push((t, None));
                    edges.len() - 1
                });
                if edge_triangles[e].0 != t {
                    match edge_triangles[e].1 {
                        None => edge_triangles[e].1 = Some(t),
                        Some(_) => {
                            return Err(Error::InvalidMesh(format!(
                                "edge {key:?} has more than two incident triangles"
                            )))
                        }
                    }
                }
                *slot = e;
            }
            triangle_edges.push(local);
        }

        let boundary_edges: Vec<usize> = edge_triangles
            .iter()
            .enumerate()
            .filter(|(_, (_, second))| second.is_none())
            .map(|(e, _)| e)
            .collect();

        let h_max = edges
            .iter()
            .map(|&[p, q]| dist(nodes[p], nodes[q]))
            .fold(0.0, f64::max);

        let mut mesh = Self {
            nodes,
            triangles,
            edges,
            edge_triangles,
            triangle_edges,
            boundary_edges,
            h_max,
            radius,
            contains_disk: false,
        };
        mesh.contains_disk = mesh.min_boundary_line_distance() >= radius;
        Ok(mesh)
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Incident triangles of every edge; the second entry is `None` on the
    /// boundary.
    pub fn edge_triangles(&self) -> &[(usize, Option<usize>)] {
        &self.edge_triangles
    }

    /// Global edge ids of each triangle, local edge `l` opposite vertex `l`.
    pub fn triangle_edges(&self) -> &[[usize; 3]] {
        &self.triangle_edges
    }

    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn contains_disk(&self) -> bool {
        self.contains_disk
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_triangles[e].1.is_none()
    }

    pub fn vertices(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.vertices(t);
        signed_area(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.area(t)).sum()
    }

    /// Nodes incident to a boundary edge.
    pub fn boundary_nodes(&self) -> Vec<bool> {
        let mut flags = vec![false; self.nodes.len()];
        for &e in &self.boundary_edges {
            let [p, q] = self.edges[e];
            flags[p] = true;
            flags[q] = true;
        }
        flags
    }

    /// Smallest distance from the origin to the line through a boundary
    /// edge; `+inf` for a mesh without boundary.
    pub fn min_boundary_line_distance(&self) -> f64 {
        self.boundary_edges
            .iter()
            .map(|&e| {
                let [p, q] = self.edges[e];
                line_distance_to_origin(self.nodes[p], self.nodes[q])
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Splits every triangle into four through its edge midpoints. The
    /// P1 space of the result contains the P1 space of `self`.
    pub fn refine_uniform(&self) -> Result<Self> {
        let mut nodes = self.nodes.clone();
        let midpoint: Vec<usize> = self
            .edges
            .iter()
            .map(|&[p, q]| {
                let (a, b) = (self.nodes[p], self.nodes[q]);
                nodes.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
                nodes.len() - 1
            })
            .collect();
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for (tri, te) in self.triangles.iter().zip(&self.triangle_edges) {
            let [v0, v1, v2] = *tri;
            let [m0, m1, m2] = [midpoint[te[0]], midpoint[te[1]], midpoint[te[2]]];
            triangles.push([v0, m2, m1]);
            triangles.push([m2, v1, m0]);
            triangles.push([m1, m0, v2]);
            triangles.push([m0, m1, m2]);
        }
        Self::from_parts(nodes, triangles, self.radius)
    }

    /// Mesh scaled about the origin; radius and `h_max` scale with it.
    pub fn dilate(&self, factor: f64) -> Result<Self> {
        let nodes = self.nodes.iter().map(|p| [p[0] * factor, p[1] * factor]).collect();
        Self::from_parts(nodes, self.triangles.clone(), self.radius * factor)
    }

    /// Plain-text export: `nodes N triangles T`, then `x y` lines, then
    /// 0-based `i j k` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "nodes {} triangles {}", self.nodes.len(), self.triangles.len());
        for p in &self.nodes {
            let _ = writeln!(out, "{:e} {:e}", p[0], p[1]);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
        }
        out
    }

    pub fn from_text(text: &str, radius: f64) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidMesh(format!("mesh text: {msg}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty input"))?.split_whitespace().collect();
        let (n, t) = match header.as_slice() {
            ["nodes", n, "triangles", t] => (
                n.parse::<usize>().map_err(|_| bad("node count"))?,
                t.parse::<usize>().map_err(|_| bad("triangle count"))?,
            ),
            _ => return Err(bad("expected header `nodes N triangles T`")),
        };
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            let line = lines.next().ok_or_else(|| bad("missing node line"))?;
            let v: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("node coordinate"))?;
            if v.len() != 2 {
                return Err(bad("node line must have two coordinates"));
            }
            nodes.push([v[0], v[1]]);
        }
        let mut triangles = Vec::with_capacity(t);
        for _ in 0..t {
            let line = lines.next().ok_or_else(|| bad("missing triangle line"))?;
            let v: Vec<usize> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("triangle index"))?;
            if v.len() != 3 {
                return Err(bad("triangle line must have three indices"));
            }
            triangles.push([v[0], v[1], v[2]]);
        }
        Self::from_parts(nodes, triangles, radius)
    }

    pub fn write_text(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Concentric-ring mesh of the disk of radius `radius` whose outer ring is a
/// regular polygon with `6 n_rings` vertices circumscribing that disk.
pub fn generate_polar_ring_mesh(radius: f64, n_rings: usize) -> Result<Mesh> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    if n_rings < 2 {
        return Err(Error::InvalidArgument(format!("n_rings must be at least 2, got {n_rings}")));
    }
    let n_outer = 6 * n_rings;
    // relative inflation absorbs cancellation in the floating-point line-distance check
    let poly_radius = radius / (PI / n_outer as f64).cos() * (1.0 + 1e-10);

    let ring_len = |i: usize| if i == 0 { 1 } else { 6 * i };
    let mut ring_start = Vec::with_capacity(n_rings + 1);
    let mut nodes = Vec::with_capacity(1 + 3 * n_rings * (n_rings + 1));
    for i in 0..=n_rings {
        ring_start.push(nodes.len());
        let r = poly_radius * i as f64 / n_rings as f64;
        let m = ring_len(i);
        for j in 0..m {
            if i == 0 {
                nodes.push([0.0, 0.0]);
            } else {
                let theta = 2.0 * PI * j as f64 / m as f64;
                nodes.push([r * theta.cos(), r * theta.sin()]);
            }
        }
    }

    let mut triangles = Vec::with_capacity(6 * n_rings * n_rings);
    for j in 0..6 {
        triangles.push([0, ring_start[1] + j, ring_start[1] + (j + 1) % 6]);
    }
    for i in 1..n_rings {
        let (a, b) = (ring_len(i), ring_len(i + 1));
        let (r_in, r_out) = (i as f64, (i + 1) as f64);
        let inner = |p: usize| ring_start[i] + p % a;
        let outer = |q: usize| ring_start[i + 1] + q % b;
        let (mut p, mut q) = (0usize, 0usize);
        while p < a || q < b {
            let advance_outer = if p == a {
                true
            } else if q == b {
                false
            } else {
                // diagonal lengths (in ring-spacing units) from exact integer
                // angle differences, so rotated sectors decide identically
                let d_outer = chord_sq(r_in, r_out, (q + 1) * a, p * b, a * b);
                let d_inner = chord_sq(r_in, r_out, (p + 1) * b, q * a, a * b);
                let rel = (d_outer - d_inner).abs() / d_outer.max(d_inner);
                if rel > 1e-12 {
                    d_outer < d_inner
                } else {
                    (q + 1) * a <= (p + 1) * b
                }
            };
            if advance_outer {
                triangles.push([inner(p), outer(q), outer(q + 1)]);
                q += 1;
            } else {
                triangles.push([inner(p), outer(q), inner(p + 1)]);
                p += 1;
            }
        }
    }
    Mesh::from_parts(nodes, triangles, radius)
}

// squared distance between points at radii r1, r2 whose angular offset is
// 2π (num1 - num2) / den
fn chord_sq(r1: f64, r2: f64, num1: usize, num2: usize, den: usize) -> f64 {
    let diff = num1 as f64 - num2 as f64;
    let angle = 2.0 * PI * diff / den as f64;
    r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * angle.cos()
}

pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub fn line_distance_to_origin(p: Point, q: Point) -> f64 {
    (p[0] * q[1] - p[1] * q[0]).abs() / dist(p, q)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityReport {
    pub min_angle_deg: f64,
    pub max_aspect_ratio: f64,
    pub h_max: f64,
    pub n_nodes: usize,
    pub n_triangles: usize,
    pub n_edges: usize,
    /// Set when the minimum angle falls below 15 degrees.
    pub low_angle_warning: bool,
}

/// Aspect ratio is the longest edge over `2√3` times the inradius, so an
/// equilateral triangle scores 1.
pub fn mesh_quality(mesh: &Mesh) -> QualityReport {
    let mut min_angle = f64::INFINITY;
    let mut max_aspect = 0.0f64;
    for t in 0..mesh.n_triangles() {
        let v = mesh.vertices(t);
        let len = [dist(v[1], v[2]), dist(v[2], v[0]), dist(v[0], v[1])];
        for l in 0..3 {
            let (opp, s1, s2) = (len[l], len[(l + 1) % 3], len[(l + 2) % 3]);
            let cos = ((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2)).clamp(-1.0, 1.0);
            min_angle = min_angle.min(cos.acos().to_degrees());
        }
        let perimeter: f64 = len.iter().sum();
        let inradius = 2.0 * mesh.area(t) / perimeter;
        let longest = len.iter().cloned().fold(0.0, f64::max);
        max_aspect = max_aspect.max(longest / (2.0 * 3f64.sqrt() * inradius));
    }
    QualityReport {
        min_angle_deg: min_angle,
        max_aspect_ratio: max_aspect,
        h_max: mesh.h_max(),
        n_nodes: mesh.n_nodes(),
        n_triangles: mesh.n_triangles(),
        n_edges: mesh.n_edges(),
        low_angle_warning: min_angle < 15.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_h_max(mesh: &Mesh) -> f64 {
        let mut h = 0.0f64;
        for t in 0..mesh.n_triangles() {
            let v = mesh.vertices(t);
            for l in 0..3 {
                h = h.max(dist(v[l], v[(l + 1) % 3]));
            }
        }
        h
    }

    #[test]
    fn rejects_too_few_rings() {
        assert!(generate_polar_ring_mesh(1.0, 1).is_err());
        assert!(generate_polar_ring_mesh(0.0, 4).is_err());
    }

    #[test]
    fn two_ring_mesh_circumscribes_unit_disk() {
        let mesh = generate_polar_ring_mesh(1.0, 2).unwrap();
        assert!(mesh.contains_disk());
        for &e in mesh.boundary_edges() {
            let [p, q] = mesh.edges()[e];
            assert!(line_distance_to_origin(mesh.nodes()[p], mesh.nodes()[q]) >= 1.0);
        }
        assert_eq!(mesh.boundary_edges().len(), 12);
        assert_eq!(mesh.n_nodes(), 1 + 6 + 12);
        assert_eq!(mesh.n_triangles(), 24);
    }

    #[test]
    fn counts_follow_ring_rule() {
        for n in [2usize, 3, 7, 12] {
            let mesh = generate_polar_ring_mesh(2.0, n).unwrap();
            assert_eq!(mesh.n_nodes(), 1 + 3 * n * (n + 1));
            assert_eq!(mesh.n_triangles(), 6 * n * n);
            // Euler characteristic of a disk
            let chi = mesh.n_nodes() as i64 - mesh.n_edges() as i64 + mesh.n_triangles() as i64;
            assert_eq!(chi, 1);
        }
    }

    #[test]
    fn h_max_matches_brute_force_for_forty_rings() {
        let mesh = generate_polar_ring_mesh(4.0, 40).unwrap();
        let oracle = brute_force_h_max(&mesh);
        assert_eq!(mesh.h_max(), oracle);
        // frozen from the brute-force oracle
        assert!((oracle - H_MAX_R4_N40).abs() < 1e-12, "{oracle:.15}");
    }

    const H_MAX_R4_N40: f64 = 0.143_857_591_380_149;

    #[test]
    fn incidence_and_orientation() {
        let mesh = generate_polar_ring_mesh(3.0, 9).unwrap();
        for t in 0..mesh.n_triangles() {
            assert!(mesh.area(t) > 0.0);
        }
        let mut count = vec![0usize; mesh.n_edges()];
        for te in mesh.triangle_edges() {
            for &e in te {
                count[e] += 1;
            }
        }
        for (e, &c) in count.iter().enumerate() {
            let expected = if mesh.is_boundary_edge(e) { 1 } else { 2 };
            assert_eq!(c, expected);
        }
    }

    #[test]
    fn area_covers_disk() {
        for (r, n) in [(1.0, 2), (4.0, 10), (8.0, 25)] {
            let mesh = generate_polar_ring_mesh(r, n).unwrap();
            let disk = PI * r * r;
            assert!(mesh.total_area() >= disk * (1.0 - 1e-10));
        }
    }

    #[test]
    fn refinement_shrinks_h_max() {
        for m in [2usize, 5, 10] {
            let coarse = generate_polar_ring_mesh(4.0, m).unwrap();
            let fine = generate_polar_ring_mesh(4.0, 2 * m).unwrap();
            assert!(fine.h_max() < coarse.h_max());
        }
    }

    #[test]
    fn uniform_refinement_keeps_certificate() {
        let mesh = generate_polar_ring_mesh(2.0, 3).unwrap();
        let fine = mesh.refine_uniform().unwrap();
        assert_eq!(fine.n_triangles(), 4 * mesh.n_triangles());
        assert!(fine.contains_disk());
        assert!((fine.h_max() - 0.5 * mesh.h_max()).abs() < 1e-12);
        assert!((fine.total_area() - mesh.total_area()).abs() < 1e-12);
    }

    #[test]
    fn dilation_scales_h_max() {
        let mesh = generate_polar_ring_mesh(4.0, 6).unwrap();
        let big = generate_polar_ring_mesh(8.0, 6).unwrap();
        assert!((big.h_max() - 2.0 * mesh.h_max()).abs() < 1e-12);
        let dilated = mesh.dilate(2.0).unwrap();
        assert!((dilated.h_max() - big.h_max()).abs() < 1e-12);
    }

    #[test]
    fn equilateral_quality() {
        let s = 3f64.sqrt() / 2.0;
        let mesh = Mesh::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [0.5, s]], vec![[0, 1, 2]], 0.1).unwrap();
        let q = mesh_quality(&mesh);
        assert!((q.min_angle_deg - 60.0).abs() < 1e-9);
        assert!((q.max_aspect_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn right_triangle_h_max() {
        let mesh = Mesh::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]], 0.1).unwrap();
        let q = mesh_quality(&mesh);
        assert!((q.h_max - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(q.h_max, mesh.h_max());
        assert!((q.min_angle_deg - 45.0).abs() < 1e-9);
    }

    #[test]
    fn clockwise_input_is_reoriented_and_degenerate_rejected() {
        let mesh = Mesh::from_parts(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]], vec![[0, 1, 2]], 0.1).unwrap();
        assert!(mesh.area(0) > 0.0);
        let err = Mesh::from_parts(vec![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]], vec![[0, 1, 2]], 0.1);
        assert!(matches!(err, Err(Error::DegenerateTriangle { index: 0, .. })));
    }

    #[test]
    fn large_mesh_counts() {
        // 164 rings gives the node/triangle budget of the published R = 4 run
        let mesh = generate_polar_ring_mesh(4.0, 164).unwrap();
        let q = mesh_quality(&mesh);
        assert!((q.n_nodes as f64 / 80_928.0 - 1.0).abs() < 0.01);
        assert!((q.n_triangles as f64 / 160_849.0 - 1.0).abs() < 0.01);
        assert!(mesh.contains_disk());
    }

    #[test]
    fn text_round_trip() {
        let mesh = generate_polar_ring_mesh(1.5, 3).unwrap();
        let text = mesh.to_text();
        assert!(text.starts_with("nodes 37 triangles 54\n"));
        let back = Mesh::from_text(&text, 1.5).unwrap();
        assert_eq!(back.triangles(), mesh.triangles());
        assert_eq!(back.nodes(), mesh.nodes());
        assert!(Mesh::from_text("nodes 1 triangles 0\n0 0 0\n", 1.0).is_err());
    }
}
