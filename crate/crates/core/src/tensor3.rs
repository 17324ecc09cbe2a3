//! Exact 3x3 tensor algebra: symmetric/skew split, deviator, trace, Frobenius
//! products, and the axial-vector identification of skew matrices.
//!
//! The planar problems in this crate keep all three components of every field
//! (out-of-plane derivatives vanish, the tensors do not), so everything here
//! is honest 3x3 algebra.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Relative tolerance for accepting a matrix as skew-symmetric. Inputs are
/// produced by exact skew constructions; this only guards I/O round-trips.
pub const SKEW_REL_TOL: f64 = 1e-12;

/// Real 3x3 tensor, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

/// Real 3-vector.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3<T>(pub [T; 3]);

impl<T: Real> Mat3<T> {
    pub fn zero() -> Self {
        Mat3([[T::zero(); 3]; 3])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            m.0[i][i] = T::one();
        }
        m
    }

    pub fn diag(a: T, b: T, c: T) -> Self {
        let mut m = Self::zero();
        m.0[0][0] = a;
        m.0[1][1] = b;
        m.0[2][2] = c;
        m
    }

    /// Outer product `a b^T`.
    pub fn outer(a: Vec3<T>, b: Vec3<T>) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = a.0[i] * b.0[j];
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[j][i];
            }
        }
        m
    }

    pub fn trace(&self) -> T {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    /// Symmetric part `(M + M^T)/2`.
    pub fn sym(&self) -> Self {
        let half = lit::<T>(0.5);
        (*self + self.transpose()) * half
    }

    /// Skew part `(M - M^T)/2`.
    pub fn skew(&self) -> Self {
        let half = lit::<T>(0.5);
        (*self - self.transpose()) * half
    }

    /// Deviator `M - (tr M / 3) I`.
    pub fn dev(&self) -> Self {
        let third = self.trace() / lit::<T>(3.0);
        let mut m = *self;
        for i in 0..3 {
            m.0[i][i] = m.0[i][i] - third;
        }
        m
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &Self) -> T {
        let mut s = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                s = s + self.0[i][j] * other.0[i][j];
            }
        }
        s
    }

    /// Frobenius norm.
    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: Vec3<T>) -> Vec3<T> {
        let mut out = Vec3::zero();
        for i in 0..3 {
            out.0[i] = self.0[i][0] * v.0[0] + self.0[i][1] * v.0[1] + self.0[i][2] * v.0[2];
        }
        out
    }

    /// Residual of skew-symmetry, `||M + M^T||`.
    pub fn skew_residual(&self) -> T {
        (*self + self.transpose()).norm()
    }
}

impl<T: Real> Vec3<T> {
    pub fn zero() -> Self {
        Vec3([T::zero(); 3])
    }

    pub fn new(a: T, b: T, c: T) -> Self {
        Vec3([a, b, c])
    }

    pub fn dot(&self, other: &Self) -> T {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

macro_rules! impl_linear_ops {
    ($ty:ident, $wrap:expr) => {
        impl<T: Real> Add for $ty<T> {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                let mut out = self;
                out += rhs;
                out
            }
        }
        impl<T: Real> Sub for $ty<T> {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                let mut out = self;
                out -= rhs;
                out
            }
        }
        impl<T: Real> Mul<T> for $ty<T> {
            type Output = Self;
            fn mul(self, rhs: T) -> Self {
                let mut out = self;
                out.scale_in_place(rhs);
                out
            }
        }
        impl<T: Real> Neg for $ty<T> {
            type Output = Self;
            fn neg(self) -> Self {
                self * (-T::one())
            }
        }
    };
}

impl<T: Real> AddAssign for Mat3<T> {
    fn add_assign(&mut self, rhs: Self) {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] = self.0[i][j] + rhs.0[i][j];
            }
        }
    }
}

impl<T: Real> SubAssign for Mat3<T> {
    fn sub_assign(&mut self, rhs: Self) {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] = self.0[i][j] - rhs.0[i][j];
            }
        }
    }
}

impl<T: Real> Mat3<T> {
    fn scale_in_place(&mut self, s: T) {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] = self.0[i][j] * s;
            }
        }
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    fn add_assign(&mut self, rhs: Self) {
        for i in 0..3 {
            self.0[i] = self.0[i] + rhs.0[i];
        }
    }
}

impl<T: Real> SubAssign for Vec3<T> {
    fn sub_assign(&mut self, rhs: Self) {
        for i in 0..3 {
            self.0[i] = self.0[i] - rhs.0[i];
        }
    }
}

impl<T: Real> Vec3<T> {
    fn scale_in_place(&mut self, s: T) {
        for i in 0..3 {
            self.0[i] = self.0[i] * s;
        }
    }
}

impl_linear_ops!(Mat3, Mat3);
impl_linear_ops!(Vec3, Vec3);

/// Splits a matrix into its symmetric and skew parts; their sum reconstructs
/// the input to machine precision.
pub fn sym_skew_split<T: Real>(m: &Mat3<T>) -> (Mat3<T>, Mat3<T>) {
    (m.sym(), m.skew())
}

/// Axial vector of a skew matrix following the convention
/// `A = ((0, a, b), (-a, 0, c), (-b, -c, 0))  ->  (a, b, c)`.
///
/// Fails with [`Error::NotSkew`] if the symmetry residual exceeds
/// `1e-12 * ||A||`.
pub fn axl<T: Real>(a: &Mat3<T>) -> Result<Vec3<T>> {
    let residual = a.skew_residual();
    let tolerance = lit::<T>(SKEW_REL_TOL) * a.norm();
    if residual > tolerance {
        return Err(Error::NotSkew {
            residual: residual.to_f64().unwrap_or(f64::NAN),
            tolerance: tolerance.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(axl_unchecked(a))
}

/// Axial vector without the skew-symmetry check; averages the off-diagonal
/// pairs so exact skew inputs round-trip exactly.
pub fn axl_unchecked<T: Real>(a: &Mat3<T>) -> Vec3<T> {
    let half = lit::<T>(0.5);
    Vec3::new(
        (a.0[0][1] - a.0[1][0]) * half,
        (a.0[0][2] - a.0[2][0]) * half,
        (a.0[1][2] - a.0[2][1]) * half,
    )
}

/// Inverse of [`axl`]: builds the skew matrix with the given axial vector.
pub fn axl_inv<T: Real>(v: Vec3<T>) -> Mat3<T> {
    let mut m = Mat3::zero();
    m.0[0][1] = v.0[0];
    m.0[1][0] = -v.0[0];
    m.0[0][2] = v.0[1];
    m.0[2][0] = -v.0[1];
    m.0[1][2] = v.0[2];
    m.0[2][1] = -v.0[2];
    m
}
