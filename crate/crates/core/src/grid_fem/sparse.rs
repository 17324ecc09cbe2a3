//! Symmetric sparse systems with eliminated Dirichlet constraints and a
//! Jacobi-preconditioned conjugate-gradient solver.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Compressed sparse rows.
#[derive(Clone, Debug)]
pub struct Csr<T> {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Real> Csr<T> {
    /// Builds CSR from unordered triplets, summing duplicates.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_counts = vec![0usize; n];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut prev: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if prev == Some((r, c)) {
                let last = values.len() - 1;
                values[last] = values[last] + v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_counts[r] += 1;
                prev = Some((r, c));
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for r in 0..n {
            row_ptr[r + 1] = row_ptr[r] + row_counts[r];
        }
        Csr {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        for r in 0..self.n {
            let mut s = T::zero();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s = s + self.values[k] * x[self.col_idx[k]];
            }
            y[r] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.n];
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.col_idx[k] == r {
                    d[r] = self.values[k];
                }
            }
        }
        d
    }

    /// Largest relative symmetry defect, for diagnostics.
    pub fn symmetry_defect(&self) -> T {
        let mut max_abs = T::zero();
        let mut max_def = T::zero();
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                let v = self.values[k];
                max_abs = max_abs.max(v.abs());
                let mut vt = T::zero();
                for kk in self.row_ptr[c]..self.row_ptr[c + 1] {
                    if self.col_idx[kk] == r {
                        vt = self.values[kk];
                    }
                }
                max_def = max_def.max((v - vt).abs());
            }
        }
        if max_abs > T::zero() {
            max_def / max_abs
        } else {
            T::zero()
        }
    }
}

/// Assembled symmetric system over the free unknowns, with the constrained
/// values kept for re-insertion after the solve.
#[derive(Clone, Debug)]
pub struct SparseSystem<T> {
    /// Total number of unknowns including constrained ones.
    pub n_total: usize,
    /// Reduced SPD operator over the free unknowns.
    pub matrix: Csr<T>,
    /// Reduced right-hand side.
    pub rhs: Vec<T>,
    /// `(global dof, prescribed value)`, ascending by dof.
    pub constrained: Vec<(usize, T)>,
    /// Free index of every global dof (`None` for constrained dofs).
    pub free_index: Vec<Option<usize>>,
}

impl<T: Real> SparseSystem<T> {
    /// Scatters a reduced vector back to full size, filling constrained slots
    /// with their prescribed values.
    pub fn expand(&self, reduced: &[T]) -> Vec<T> {
        let mut full = vec![T::zero(); self.n_total];
        for (dof, idx) in self.free_index.iter().enumerate() {
            if let Some(i) = idx {
                full[dof] = reduced[*i];
            }
        }
        for &(dof, v) in &self.constrained {
            full[dof] = v;
        }
        full
    }

    /// Restriction of a full-length vector to the free unknowns.
    pub fn restrict(&self, full: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.matrix.n];
        for (dof, idx) in self.free_index.iter().enumerate() {
            if let Some(i) = idx {
                out[*i] = full[dof];
            }
        }
        out
    }

    /// Residual norm of a candidate reduced solution, relative to the rhs.
    pub fn relative_residual(&self, reduced: &[T]) -> T {
        let n = self.matrix.n;
        let mut ax = vec![T::zero(); n];
        self.matrix.matvec(reduced, &mut ax);
        let mut rr = T::zero();
        let mut bb = T::zero();
        for i in 0..n {
            let r = self.rhs[i] - ax[i];
            rr = rr + r * r;
            bb = bb + self.rhs[i] * self.rhs[i];
        }
        if bb > T::zero() {
            (rr / bb).sqrt()
        } else {
            rr.sqrt()
        }
    }
}

/// Diagonally preconditioned conjugate gradients.
///
/// Iterates until `||r|| / ||rhs|| <= tol`; the cap is
/// `max(10 * ndof, 10000)` iterations. A zero right-hand side returns the
/// zero vector immediately. `guess` warm-starts the iteration.
pub fn pcg<T: Real>(matrix: &Csr<T>, b: &[T], tol: T, guess: Option<&[T]>) -> Result<Vec<T>> {
    let n = matrix.n;
    assert_eq!(b.len(), n);
    let norm_b = b.iter().map(|&v| v * v).sum::<T>().sqrt();
    if n == 0 || norm_b == T::zero() {
        return Ok(vec![T::zero(); n]);
    }
    let mut x = match guess {
        Some(g) => {
            assert_eq!(g.len(), n);
            g.to_vec()
        }
        None => vec![T::zero(); n],
    };
    let diag = matrix.diagonal();
    let precond: Vec<T> = diag
        .iter()
        .map(|&d| if d > T::zero() { T::one() / d } else { T::one() })
        .collect();

    let mut r = vec![T::zero(); n];
    matrix.matvec(&x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let target = tol * norm_b;
    let mut z: Vec<T> = (0..n).map(|i| precond[i] * r[i]).collect();
    let mut p = z.clone();
    let mut rz: T = (0..n).map(|i| r[i] * z[i]).sum();
    let mut ap = vec![T::zero(); n];

    let max_iter = (10 * n).max(10_000);
    let mut res = r.iter().map(|&v| v * v).sum::<T>().sqrt();
    if res <= target {
        return Ok(x);
    }
    for iter in 0..max_iter {
        matrix.matvec(&p, &mut ap);
        let pap: T = (0..n).map(|i| p[i] * ap[i]).sum();
        if !(pap > T::zero()) {
            return Err(Error::SolverNoConvergence {
                iterations: iter,
                residual: (res / norm_b).to_f64().unwrap_or(f64::NAN),
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] = x[i] + alpha * p[i];
            r[i] = r[i] - alpha * ap[i];
        }
        res = r.iter().map(|&v| v * v).sum::<T>().sqrt();
        if res <= target {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = precond[i] * r[i];
        }
        let rz_new: T = (0..n).map(|i| r[i] * z[i]).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverNoConvergence {
        iterations: max_iter,
        residual: (res / norm_b).to_f64().unwrap_or(f64::NAN),
    })
}

/// [`pcg`] on an assembled system.
pub fn solve_reduced<T: Real>(
    system: &SparseSystem<T>,
    tol: T,
    guess: Option<&[T]>,
) -> Result<Vec<T>> {
    pcg(&system.matrix, &system.rhs, tol, guess)
}

/// Rayleigh quotient `v^T K v / v^T v` of the reduced operator, used for
/// coercivity probes.
pub fn rayleigh_quotient<T: Real>(system: &SparseSystem<T>, v: &[T]) -> T {
    let n = system.matrix.n;
    assert_eq!(v.len(), n);
    let mut av = vec![T::zero(); n];
    system.matrix.matvec(v, &mut av);
    let num: T = (0..n).map(|i| v[i] * av[i]).sum();
    let den: T = (0..n).map(|i| v[i] * v[i]).sum();
    num / den.max(lit(1e-300))
}
