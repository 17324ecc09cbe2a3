//! Assembly of the coupled linear block in `(u, axl A)` for frozen plastic
//! strain, and the SPD solve.
//!
//! The bilinear form is the second variation of the stored energy:
//!
//! ```text
//! a((u,w),(v,s)) =  2 mu (eps(u), eps(v)) + lambda (tr eps(u), tr eps(v))
//!                 + 2 mu_c (skew grad u - A(w), skew grad v - A(s))
//!                 + 4 l_c (grad w, grad s)
//! ```
//!
//! with `w = axl A`. In axial-vector form the coupling term reads
//! `4 mu_c (axl skew grad u - w) . (axl skew grad v - s)`, and its strong form
//! recovers `-l_c Lap w = mu_c axl(skew grad u - A)` exactly. The load is
//! `(f, v) + 2 mu (eps_p, eps(v)) + lambda (tr eps_p, tr eps(v))`.
//!
//! All gradient terms are element-wise constant for P1; the terms involving
//! `w` itself are integrated exactly with the P1 mass matrix. Dirichlet dofs
//! (all six per boundary node) are eliminated symmetrically, which keeps the
//! reduced operator SPD.

use crate::constitutive::MaterialParams;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::tensor3::{Mat3, Vec3};

use super::mesh::Mesh;
use super::sparse::{pcg, solve_reduced, Csr, SparseSystem};

/// Dof values for a 3-component nodal field, node-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldVec<T> {
    data: Vec<T>,
}

impl<T: Real> FieldVec<T> {
    pub fn zeros(n_nodes: usize) -> Self {
        FieldVec {
            data: vec![T::zero(); 3 * n_nodes],
        }
    }

    pub fn from_raw(data: Vec<T>) -> Self {
        assert_eq!(data.len() % 3, 0);
        FieldVec { data }
    }

    /// Samples an analytic field at every mesh node.
    pub fn from_fn(mesh: &Mesh<T>, f: impl Fn([T; 2]) -> Vec3<T>) -> Self {
        let mut out = Self::zeros(mesh.n_nodes());
        for (n, &x) in mesh.nodes.iter().enumerate() {
            out.set_vec3(n, f(x));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn n_nodes(&self) -> usize {
        self.data.len() / 3
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn vec3(&self, node: usize) -> Vec3<T> {
        Vec3([
            self.data[3 * node],
            self.data[3 * node + 1],
            self.data[3 * node + 2],
        ])
    }

    pub fn set_vec3(&mut self, node: usize, v: Vec3<T>) {
        self.data[3 * node] = v.0[0];
        self.data[3 * node + 1] = v.0[1];
        self.data[3 * node + 2] = v.0[2];
    }

    pub fn norm(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Euclidean distance to another field.
    pub fn distance(&self, other: &Self) -> T {
        assert_eq!(self.len(), other.len());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<T>()
            .sqrt()
    }

    /// Component-wise `self - other`.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        FieldVec {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        FieldVec {
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }
}

const DOFS_PER_NODE: usize = 6;

/// Axial vector of the skew gradient of the shape-function/component pair:
/// `axl(skew(e_k (x) grad_a))` with the planar gradient `(g1, g2, 0)`.
#[inline]
fn basis_rotation_axial<T: Real>(comp: usize, g: [T; 2]) -> Vec3<T> {
    let half = lit::<T>(0.5);
    match comp {
        0 => Vec3::new(g[1] * half, T::zero(), T::zero()),
        1 => Vec3::new(-g[0] * half, T::zero(), T::zero()),
        _ => Vec3::new(T::zero(), -g[0] * half, -g[1] * half),
    }
}

fn check_plastic_field<T: Real>(eps_p: &[Mat3<T>], n_elements: usize) -> Result<()> {
    if eps_p.len() != n_elements {
        return Err(Error::FieldSizeMismatch {
            got: eps_p.len(),
            expected: n_elements,
        });
    }
    let tol = lit::<T>(1e-10);
    for (e, m) in eps_p.iter().enumerate() {
        let scale = T::one().max(m.norm());
        let sym_res = (*m - m.sym()).norm();
        let tr = m.trace().abs();
        if sym_res > tol * scale || tr > tol * scale {
            return Err(Error::InvalidPlasticField {
                element: e,
                detail: format!(
                    "symmetry residual {:.3e}, trace {:.3e}",
                    sym_res.to_f64().unwrap_or(f64::NAN),
                    tr.to_f64().unwrap_or(f64::NAN)
                ),
            });
        }
    }
    Ok(())
}

/// The coupled operator factorized out of the time loop: the stiffness does
/// not depend on the plastic strain (only the load does), so the reduced
/// matrix and the free/constrained bookkeeping are built once per mesh and
/// parameter set and reused for every right-hand side.
#[derive(Clone, Debug)]
pub struct CoupledOperator<T> {
    pub n_total: usize,
    /// Reduced SPD stiffness over the free dofs.
    pub matrix: Csr<T>,
    /// Free index of every global dof (`None` on the boundary).
    pub free_index: Vec<Option<usize>>,
    /// Constrained dofs, ascending.
    constrained_dofs: Vec<usize>,
    /// Couplings `(free row, constrained dof, value)` feeding eliminated
    /// Dirichlet values into the right-hand side.
    coupling: Vec<(usize, usize, T)>,
}

impl<T: Real> CoupledOperator<T> {
    pub fn new(mesh: &Mesh<T>, params: &MaterialParams<T>) -> Self {
        let n_nodes = mesh.n_nodes();
        let n_total = DOFS_PER_NODE * n_nodes;

        let mut is_constrained = vec![false; n_total];
        let mut constrained_dofs = Vec::with_capacity(6 * mesh.boundary_nodes.len());
        for &node in &mesh.boundary_nodes {
            for c in 0..6 {
                is_constrained[DOFS_PER_NODE * node + c] = true;
                constrained_dofs.push(DOFS_PER_NODE * node + c);
            }
        }
        constrained_dofs.sort_unstable();
        let mut free_index = vec![None; n_total];
        let mut n_free = 0;
        for dof in 0..n_total {
            if !is_constrained[dof] {
                free_index[dof] = Some(n_free);
                n_free += 1;
            }
        }

        let two = lit::<T>(2.0);
        let third = lit::<T>(1.0 / 3.0);
        let twelfth = lit::<T>(1.0 / 12.0);
        let four_mu_c = lit::<T>(4.0) * params.mu_c;
        let four_l_c = lit::<T>(4.0) * params.l_c;

        let mut triplets: Vec<(usize, usize, T)> = Vec::with_capacity(mesh.n_elements() * 144);
        let mut coupling: Vec<(usize, usize, T)> = Vec::new();

        let mut ke = [[T::zero(); 18]; 18];
        for elem in 0..mesh.n_elements() {
            let tri = mesh.triangles[elem];
            let area = mesh.area(elem);
            let grads = mesh.shape_gradients(elem);

            for row in ke.iter_mut() {
                for v in row.iter_mut() {
                    *v = T::zero();
                }
            }

            // planar gradients extended with a zero third component
            let gt = |a: usize| -> [T; 3] { [grads[a][0], grads[a][1], T::zero()] };

            for a in 0..3 {
                let ga = grads[a];
                let gta = gt(a);
                for b in 0..3 {
                    let gb = grads[b];
                    let gtb = gt(b);
                    let gab = ga[0] * gb[0] + ga[1] * gb[1];
                    let mass = area * twelfth * if a == b { two } else { T::one() };

                    for i in 0..3 {
                        let wa = basis_rotation_axial(i, ga);
                        for k in 0..3 {
                            let wb = basis_rotation_axial(k, gb);
                            // elastic part
                            let mut v =
                                params.mu * gtb[i] * gta[k] + params.lambda * gta[i] * gtb[k];
                            if i == k {
                                v = v + params.mu * gab;
                            }
                            // rotation-rotation coupling of the displacement basis
                            v = v + four_mu_c * wa.dot(&wb);
                            ke[a * 6 + i][b * 6 + k] = ke[a * 6 + i][b * 6 + k] + v * area;
                        }
                    }

                    // displacement test / microrotation trial and transpose
                    for i in 0..3 {
                        let wa = basis_rotation_axial(i, ga);
                        for j in 0..3 {
                            let v = -four_mu_c * wa.0[j] * area * third;
                            ke[a * 6 + i][b * 6 + 3 + j] = ke[a * 6 + i][b * 6 + 3 + j] + v;
                            ke[b * 6 + 3 + j][a * 6 + i] = ke[b * 6 + 3 + j][a * 6 + i] + v;
                        }
                    }

                    // microrotation block: mass coupling plus curvature stiffness
                    for j in 0..3 {
                        let v = four_mu_c * mass + four_l_c * gab * area;
                        ke[a * 6 + 3 + j][b * 6 + 3 + j] = ke[a * 6 + 3 + j][b * 6 + 3 + j] + v;
                    }
                }
            }

            // scatter with symmetric elimination
            let gdof = |a: usize, c: usize| DOFS_PER_NODE * tri[a] + c;
            for a in 0..3 {
                for ca in 0..6 {
                    let Some(ri) = free_index[gdof(a, ca)] else {
                        continue;
                    };
                    for b in 0..3 {
                        for cb in 0..6 {
                            let cbg = gdof(b, cb);
                            let v = ke[a * 6 + ca][b * 6 + cb];
                            if v == T::zero() {
                                continue;
                            }
                            match free_index[cbg] {
                                Some(ci) => triplets.push((ri, ci, v)),
                                None => coupling.push((ri, cbg, v)),
                            }
                        }
                    }
                }
            }
        }

        CoupledOperator {
            n_total,
            matrix: Csr::from_triplets(n_free, triplets),
            free_index,
            constrained_dofs,
            coupling,
        }
    }

    pub fn n_free(&self) -> usize {
        self.matrix.n
    }

    /// Values prescribed on the constrained dofs for given boundary data.
    pub fn boundary_values(
        &self,
        mesh: &Mesh<T>,
        g_d: &dyn Fn([T; 2]) -> Vec3<T>,
        a_d_axl: &dyn Fn([T; 2]) -> Vec3<T>,
    ) -> Vec<(usize, T)> {
        let mut out = Vec::with_capacity(self.constrained_dofs.len());
        for &node in &mesh.boundary_nodes {
            let x = mesh.nodes[node];
            let gu = g_d(x);
            let gw = a_d_axl(x);
            for c in 0..3 {
                out.push((DOFS_PER_NODE * node + c, gu.0[c]));
            }
            for c in 0..3 {
                out.push((DOFS_PER_NODE * node + 3 + c, gw.0[c]));
            }
        }
        out.sort_unstable_by_key(|&(dof, _)| dof);
        out
    }

    /// Reduced right-hand side: body force and plastic load minus the
    /// eliminated Dirichlet couplings.
    pub fn reduced_rhs(
        &self,
        mesh: &Mesh<T>,
        params: &MaterialParams<T>,
        eps_p: &[Mat3<T>],
        f: &dyn Fn([T; 2]) -> Vec3<T>,
        dirichlet: &[(usize, T)],
    ) -> Result<Vec<T>> {
        check_plastic_field(eps_p, mesh.n_elements())?;
        let two = lit::<T>(2.0);
        let twelfth = lit::<T>(1.0 / 12.0);
        let mut rhs = vec![T::zero(); self.n_free()];

        for elem in 0..mesh.n_elements() {
            let tri = mesh.triangles[elem];
            let area = mesh.area(elem);
            let grads = mesh.shape_gradients(elem);
            let ep = &eps_p[elem];
            let tr_ep = ep.trace();
            let f_nodes = [
                f(mesh.nodes[tri[0]]),
                f(mesh.nodes[tri[1]]),
                f(mesh.nodes[tri[2]]),
            ];
            for a in 0..3 {
                let gta = [grads[a][0], grads[a][1], T::zero()];
                for i in 0..3 {
                    let Some(ri) = self.free_index[DOFS_PER_NODE * tri[a] + i] else {
                        continue;
                    };
                    // body force through the P1 mass matrix
                    let mut v = T::zero();
                    for b in 0..3 {
                        let mass = area * twelfth * if a == b { two } else { T::one() };
                        v = v + mass * f_nodes[b].0[i];
                    }
                    // 2 mu (eps_p, eps(v)): eps_p symmetric, so the contraction
                    // collapses to row i of eps_p against the gradient
                    let mut pv = T::zero();
                    for j in 0..3 {
                        pv = pv + ep.0[i][j] * gta[j];
                    }
                    v = v + area * (two * params.mu * pv + params.lambda * tr_ep * gta[i]);
                    rhs[ri] = rhs[ri] + v;
                }
            }
        }

        // eliminated Dirichlet couplings
        let mut value_of = vec![T::zero(); self.n_total];
        for &(dof, v) in dirichlet {
            value_of[dof] = v;
        }
        for &(row, dof, v) in &self.coupling {
            rhs[row] = rhs[row] - v * value_of[dof];
        }
        Ok(rhs)
    }

    /// Solves for a given reduced rhs and Dirichlet values; returns the full
    /// nodal `(u, axl A)` fields with boundary values re-inserted.
    pub fn solve_fields(
        &self,
        rhs: &[T],
        dirichlet: &[(usize, T)],
        tol: T,
        guess: Option<(&FieldVec<T>, &FieldVec<T>)>,
    ) -> Result<(FieldVec<T>, FieldVec<T>)> {
        let reduced_guess = guess.map(|(u, w)| {
            let full = interleave(u, w);
            let mut out = vec![T::zero(); self.n_free()];
            for (dof, idx) in self.free_index.iter().enumerate() {
                if let Some(i) = idx {
                    out[*i] = full[dof];
                }
            }
            out
        });
        let x = pcg(&self.matrix, rhs, tol, reduced_guess.as_deref())?;
        let mut full = vec![T::zero(); self.n_total];
        for (dof, idx) in self.free_index.iter().enumerate() {
            if let Some(i) = idx {
                full[dof] = x[*i];
            }
        }
        for &(dof, v) in dirichlet {
            full[dof] = v;
        }
        Ok(split(&full))
    }
}

/// Assembles the coupled system with 6 dofs per node (3 displacement, 3
/// microrotation axial components). Dirichlet data from `g_d` / `a_d_axl`
/// is imposed on every boundary node and eliminated symmetrically.
pub fn assemble_coupled<T: Real>(
    mesh: &Mesh<T>,
    params: &MaterialParams<T>,
    eps_p: &[Mat3<T>],
    f: &dyn Fn([T; 2]) -> Vec3<T>,
    g_d: &dyn Fn([T; 2]) -> Vec3<T>,
    a_d_axl: &dyn Fn([T; 2]) -> Vec3<T>,
) -> Result<SparseSystem<T>> {
    let op = CoupledOperator::new(mesh, params);
    let dirichlet = op.boundary_values(mesh, g_d, a_d_axl);
    let rhs = op.reduced_rhs(mesh, params, eps_p, f, &dirichlet)?;
    Ok(SparseSystem {
        n_total: op.n_total,
        matrix: op.matrix,
        rhs,
        constrained: dirichlet,
        free_index: op.free_index,
    })
}

/// Solves the assembled system with diagonally preconditioned CG and returns
/// the full nodal `(u, axl A)` fields with Dirichlet values re-inserted.
pub fn solve_spd<T: Real>(system: &SparseSystem<T>, tol: T) -> Result<(FieldVec<T>, FieldVec<T>)> {
    solve_spd_with_guess(system, tol, None)
}

/// Same as [`solve_spd`] but warm-started from previous fields.
pub fn solve_spd_with_guess<T: Real>(
    system: &SparseSystem<T>,
    tol: T,
    guess: Option<(&FieldVec<T>, &FieldVec<T>)>,
) -> Result<(FieldVec<T>, FieldVec<T>)> {
    assert!(
        tol > T::zero() && tol <= lit(1e-4),
        "solver tolerance out of range"
    );
    let reduced_guess = guess.map(|(u, w)| {
        let full = interleave(u, w);
        system.restrict(&full)
    });
    let x = solve_reduced(system, tol, reduced_guess.as_deref())?;
    let full = system.expand(&x);
    Ok(split(&full))
}

/// Packs `(u, w)` nodal fields into the 6-dof-per-node layout.
pub fn interleave<T: Real>(u: &FieldVec<T>, w: &FieldVec<T>) -> Vec<T> {
    let n = u.n_nodes();
    assert_eq!(w.n_nodes(), n);
    let mut out = vec![T::zero(); 6 * n];
    for node in 0..n {
        let uv = u.vec3(node);
        let wv = w.vec3(node);
        for c in 0..3 {
            out[6 * node + c] = uv.0[c];
            out[6 * node + 3 + c] = wv.0[c];
        }
    }
    out
}

fn split<T: Real>(full: &[T]) -> (FieldVec<T>, FieldVec<T>) {
    let n = full.len() / 6;
    let mut u = FieldVec::zeros(n);
    let mut w = FieldVec::zeros(n);
    for node in 0..n {
        u.set_vec3(
            node,
            Vec3([full[6 * node], full[6 * node + 1], full[6 * node + 2]]),
        );
        w.set_vec3(
            node,
            Vec3([
                full[6 * node + 3],
                full[6 * node + 4],
                full[6 * node + 5],
            ]),
        );
    }
    (u, w)
}

/// Discrete harmonic extension of boundary data: solves the componentwise
/// Laplace equation with P1 elements and the given Dirichlet trace.
pub fn harmonic_extension<T: Real>(
    mesh: &Mesh<T>,
    boundary: &dyn Fn([T; 2]) -> Vec3<T>,
    tol: T,
) -> Result<FieldVec<T>> {
    let n_nodes = mesh.n_nodes();
    let mut free_index = vec![None; n_nodes];
    let mut n_free = 0;
    for node in 0..n_nodes {
        if !mesh.is_boundary_node(node) {
            free_index[node] = Some(n_free);
            n_free += 1;
        }
    }

    let mut triplets = Vec::new();
    let mut coupling: Vec<(usize, usize, T)> = Vec::new(); // (free row, boundary node, value)
    for elem in 0..mesh.n_elements() {
        let tri = mesh.triangles[elem];
        let area = mesh.area(elem);
        let grads = mesh.shape_gradients(elem);
        for a in 0..3 {
            let Some(ra) = free_index[tri[a]] else { continue };
            for b in 0..3 {
                let v = area * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                match free_index[tri[b]] {
                    Some(cb) => triplets.push((ra, cb, v)),
                    None => coupling.push((ra, tri[b], v)),
                }
            }
        }
    }
    let matrix = Csr::from_triplets(n_free, triplets);

    let mut out = FieldVec::zeros(n_nodes);
    for &node in &mesh.boundary_nodes {
        out.set_vec3(node, boundary(mesh.nodes[node]));
    }
    for comp in 0..3 {
        let mut rhs = vec![T::zero(); n_free];
        for &(row, bnode, v) in &coupling {
            rhs[row] = rhs[row] - v * out.vec3(bnode).0[comp];
        }
        let sys = SparseSystem {
            n_total: n_free,
            matrix: matrix.clone(),
            rhs,
            constrained: vec![],
            free_index: (0..n_free).map(Some).collect(),
        };
        let x = solve_reduced(&sys, tol, None)?;
        for node in 0..n_nodes {
            if let Some(i) = free_index[node] {
                let mut v = out.vec3(node);
                v.0[comp] = x[i];
                out.set_vec3(node, v);
            }
        }
    }
    Ok(out)
}
