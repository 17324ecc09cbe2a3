//! Structured P1 triangulations of a rectangle.

use crate::scalar::{lit, Real};
use crate::tensor3::{Mat3, Vec3};

use super::FieldVec;

/// Conforming triangulation of `[0, lx] x [0, ly]` obtained by splitting each
/// cell of an `nx x ny` grid along its diagonal. Triangles are
/// counter-clockwise.
#[derive(Clone, Debug)]
pub struct Mesh<T> {
    pub nx: usize,
    pub ny: usize,
    pub lx: T,
    pub ly: T,
    /// Node coordinates, index `i + j * (nx + 1)`.
    pub nodes: Vec<[T; 2]>,
    /// Node-index triples, counter-clockwise.
    pub triangles: Vec<[usize; 3]>,
    /// Indices of nodes on the rectangle boundary, ascending.
    pub boundary_nodes: Vec<usize>,
    is_boundary: Vec<bool>,
}

/// Builds the structured triangulation: `2 nx ny` triangles on
/// `(nx + 1)(ny + 1)` nodes.
pub fn build_mesh<T: Real>(nx: usize, ny: usize, lx: T, ly: T) -> Mesh<T> {
    assert!(nx >= 1 && ny >= 1, "mesh needs at least one cell per side");
    assert!(lx > T::zero() && ly > T::zero());
    let hx = lx / lit::<T>(nx as f64);
    let hy = ly / lit::<T>(ny as f64);
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([hx * lit::<T>(i as f64), hy * lit::<T>(j as f64)]);
        }
    }
    let id = |i: usize, j: usize| i + j * (nx + 1);
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (n00, n10) = (id(i, j), id(i + 1, j));
            let (n01, n11) = (id(i, j + 1), id(i + 1, j + 1));
            triangles.push([n00, n10, n11]);
            triangles.push([n00, n11, n01]);
        }
    }
    let mut is_boundary = vec![false; nodes.len()];
    let mut boundary_nodes = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            if i == 0 || j == 0 || i == nx || j == ny {
                is_boundary[id(i, j)] = true;
                boundary_nodes.push(id(i, j));
            }
        }
    }
    Mesh {
        nx,
        ny,
        lx,
        ly,
        nodes,
        triangles,
        boundary_nodes,
        is_boundary,
    }
}

impl<T: Real> Mesh<T> {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_boundary_node(&self, node: usize) -> bool {
        self.is_boundary[node]
    }

    /// Signed doubled area of a triangle (positive for CCW).
    pub fn doubled_area(&self, tri: usize) -> T {
        let [a, b, c] = self.triangles[tri];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1])
    }

    pub fn area(&self, tri: usize) -> T {
        self.doubled_area(tri) * lit::<T>(0.5)
    }

    pub fn centroid(&self, tri: usize) -> [T; 2] {
        let [a, b, c] = self.triangles[tri];
        let third = lit::<T>(1.0 / 3.0);
        [
            (self.nodes[a][0] + self.nodes[b][0] + self.nodes[c][0]) * third,
            (self.nodes[a][1] + self.nodes[b][1] + self.nodes[c][1]) * third,
        ]
    }

    /// Gradients of the three nodal hat functions on a triangle, each `[d/dx1,
    /// d/dx2]`. Exact for P1.
    pub fn shape_gradients(&self, tri: usize) -> [[T; 2]; 3] {
        let [a, b, c] = self.triangles[tri];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        let inv2a = T::one() / self.doubled_area(tri);
        [
            [(pb[1] - pc[1]) * inv2a, (pc[0] - pb[0]) * inv2a],
            [(pc[1] - pa[1]) * inv2a, (pa[0] - pc[0]) * inv2a],
            [(pa[1] - pb[1]) * inv2a, (pb[0] - pa[0]) * inv2a],
        ]
    }

    /// Longest edge over the whole mesh.
    pub fn max_diameter(&self) -> T {
        let mut best = T::zero();
        for t in 0..self.n_elements() {
            let [a, b, c] = self.triangles[t];
            for (p, q) in [(a, b), (b, c), (c, a)] {
                let dx = self.nodes[p][0] - self.nodes[q][0];
                let dy = self.nodes[p][1] - self.nodes[q][1];
                best = best.max((dx * dx + dy * dy).sqrt());
            }
        }
        best
    }

    /// Total mesh area (sums the triangles).
    pub fn total_area(&self) -> T {
        (0..self.n_elements()).map(|t| self.area(t)).sum()
    }

    /// Element-wise constant gradient of a 3-component nodal field, as a 3x3
    /// matrix with rows = components and columns `d/dx1, d/dx2, 0`.
    pub fn element_gradient(&self, tri: usize, field: &FieldVec<T>) -> Mat3<T> {
        let grads = self.shape_gradients(tri);
        let mut g = Mat3::zero();
        for (local, &node) in self.triangles[tri].iter().enumerate() {
            let v = field.vec3(node);
            for comp in 0..3 {
                g.0[comp][0] = g.0[comp][0] + v.0[comp] * grads[local][0];
                g.0[comp][1] = g.0[comp][1] + v.0[comp] * grads[local][1];
            }
        }
        g
    }

    /// P1 interpolation of a nodal field at a point given by barycentric
    /// coordinates of a triangle.
    pub fn interpolate(&self, tri: usize, bary: [T; 3], field: &FieldVec<T>) -> Vec3<T> {
        let [a, b, c] = self.triangles[tri];
        let (va, vb, vc) = (field.vec3(a), field.vec3(b), field.vec3(c));
        va * bary[0] + vb * bary[1] + vc * bary[2]
    }
}

/// Per-element constant gradients for a whole field; third column always zero.
pub fn gradient_at_elements<T: Real>(mesh: &Mesh<T>, field: &FieldVec<T>) -> Vec<Mat3<T>> {
    assert_eq!(field.len(), 3 * mesh.n_nodes(), "field length mismatch");
    (0..mesh.n_elements())
        .map(|t| mesh.element_gradient(t, field))
        .collect()
}
