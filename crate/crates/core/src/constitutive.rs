//! Pointwise material laws: elastic and total stress, yield excess, the
//! regularized flow rate, the implicit local update of (plastic strain,
//! backstress), free-energy density, and admissible-set membership.
//!
//! The flow rule is the Lipschitz regularization of the normality rule: the
//! plastic strain rate is `(1/nu) {|dev T_E - b| - sigma_y}_+` along the unit
//! relative deviator, and the backstress evolves as
//! `b_t = c eps_p_t - d |eps_p_t| b`, which saturates at `|b| = c/d`.

use crate::error::{Error, Result};
use crate::scalar::{lit, tol_floor, Real};
use crate::tensor3::Mat3;
use serde::{Deserialize, Serialize};

/// Relative tolerance of the scalar Newton solve in [`local_update`].
pub const NEWTON_REL_TOL: f64 = 1e-12;
/// Iteration cap of the scalar Newton solve.
pub const NEWTON_MAX_ITER: usize = 50;

/// Constitutive constants. All strictly positive, except `d >= 0`
/// (`d = 0` degenerates to linear kinematic hardening).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MaterialParams<T> {
    /// Shear modulus (Pa).
    pub mu: T,
    /// First Lame constant (Pa).
    pub lambda: T,
    /// Couple modulus coupling microrotations to the skew displacement
    /// gradient (Pa).
    pub mu_c: T,
    /// Internal length scale of the curvature stiffness (m^2).
    pub l_c: T,
    /// Backstress hardening modulus (Pa).
    pub c: T,
    /// Backstress recall (dynamic-recovery) coefficient, dimensionless.
    pub d: T,
    /// Yield limit (Pa).
    pub sigma_y: T,
    /// Viscous regularization parameter of the flow rule.
    pub nu: T,
    /// Mass density (kg/m^3), constant.
    pub rho: T,
}

impl<T: Real> MaterialParams<T> {
    /// Checks the sign constraints; returns the offending field names.
    pub fn validate(&self) -> std::result::Result<(), Vec<&'static str>> {
        let mut bad = Vec::new();
        let pos: [(&'static str, T); 8] = [
            ("mu", self.mu),
            ("lambda", self.lambda),
            ("mu_c", self.mu_c),
            ("l_c", self.l_c),
            ("c", self.c),
            ("sigma_y", self.sigma_y),
            ("nu", self.nu),
            ("rho", self.rho),
        ];
        for (name, v) in pos {
            if !(v > T::zero()) || !v.is_finite() {
                bad.push(name);
            }
        }
        if !(self.d >= T::zero()) || !self.d.is_finite() {
            bad.push("d");
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(bad)
        }
    }

    /// Backstress saturation radius `c/d` (infinite for `d = 0`).
    pub fn backstress_bound(&self) -> T {
        if self.d > T::zero() {
            self.c / self.d
        } else {
            T::infinity()
        }
    }
}

/// Internal variables at one material point: both symmetric and trace-free.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct LocalState<T> {
    pub eps_p: Mat3<T>,
    pub b: Mat3<T>,
}

impl<T: Real> LocalState<T> {
    pub fn zero() -> Self {
        LocalState {
            eps_p: Mat3::zero(),
            b: Mat3::zero(),
        }
    }

    /// Largest violation of symmetry/trace-freeness over both fields.
    pub fn invariant_residual(&self) -> T {
        let sym_res = (self.eps_p - self.eps_p.sym())
            .norm()
            .max((self.b - self.b.sym()).norm());
        sym_res.max(self.eps_p.trace().abs()).max(self.b.trace().abs())
    }
}

/// Elastic stress `T_E = 2 mu (eps - eps_p) + lambda tr(eps - eps_p) I`.
pub fn elastic_stress<T: Real>(eps: &Mat3<T>, eps_p: &Mat3<T>, p: &MaterialParams<T>) -> Mat3<T> {
    let e = *eps - *eps_p;
    e * (lit::<T>(2.0) * p.mu) + Mat3::identity() * (p.lambda * e.trace())
}

/// Total stress `T = T_E + 2 mu_c (skew grad_u - A)`.
///
/// `A` must be skew-symmetric.
pub fn total_stress<T: Real>(
    grad_u: &Mat3<T>,
    eps_p: &Mat3<T>,
    a: &Mat3<T>,
    p: &MaterialParams<T>,
) -> Result<Mat3<T>> {
    let res = a.skew_residual();
    let tol = lit::<T>(crate::tensor3::SKEW_REL_TOL) * a.norm();
    if res > tol {
        return Err(Error::NotSkew {
            residual: res.to_f64().unwrap_or(f64::NAN),
            tolerance: tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    let te = elastic_stress(&grad_u.sym(), eps_p, p);
    Ok(te + (grad_u.skew() - *a) * (lit::<T>(2.0) * p.mu_c))
}

/// Yield excess `{|dev T_E - b| - sigma_y}_+`; zero exactly on the admissible
/// set.
pub fn yield_excess<T: Real>(t_e: &Mat3<T>, b: &Mat3<T>, p: &MaterialParams<T>) -> T {
    ((t_e.dev() - *b).norm() - p.sigma_y).max(T::zero())
}

/// Regularized plastic strain rate
/// `(1/nu) {|dev T_E - b| - sigma_y}_+ unit(dev T_E - b)`.
///
/// Returns zero when the excess vanishes, including at the singular point
/// `dev T_E = b` (zero is the continuous extension there).
pub fn flow_rate<T: Real>(t_e: &Mat3<T>, b: &Mat3<T>, p: &MaterialParams<T>) -> Mat3<T> {
    let rel = t_e.dev() - *b;
    let norm = rel.norm();
    let excess = (norm - p.sigma_y).max(T::zero());
    if excess <= T::zero() || norm <= T::zero() {
        return Mat3::zero();
    }
    rel * (excess / (p.nu * norm))
}

/// Free-energy density
/// `mu |eps - eps_p|^2 + mu_c |skew grad_u - A|^2 + (lambda/2) tr(eps - eps_p)^2
///  + 2 l_c |grad axl A|^2 + |b|^2 / (2c)`.
pub fn free_energy_density<T: Real>(
    grad_u: &Mat3<T>,
    eps_p: &Mat3<T>,
    a: &Mat3<T>,
    grad_axl_a: &Mat3<T>,
    b: &Mat3<T>,
    p: &MaterialParams<T>,
) -> T {
    let e = grad_u.sym() - *eps_p;
    let rot = grad_u.skew() - *a;
    let tr = e.trace();
    p.mu * e.dot(&e)
        + p.mu_c * rot.dot(&rot)
        + lit::<T>(0.5) * p.lambda * tr * tr
        + lit::<T>(2.0) * p.l_c * grad_axl_a.dot(grad_axl_a)
        + b.dot(b) / (lit::<T>(2.0) * p.c)
}

/// Admissible sets tested by [`set_membership`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdmissibleSet {
    /// Elastic stresses: `|dev T_E - b| <= sigma_y`.
    K,
    /// Test set with the quadratic backstress penalty:
    /// `|dev T_E - b| + (d/2c) |b|^2 <= sigma_y`.
    KStar,
}

pub fn set_membership<T: Real>(
    which: AdmissibleSet,
    t_e: &Mat3<T>,
    b: &Mat3<T>,
    p: &MaterialParams<T>,
) -> bool {
    let rel = (t_e.dev() - *b).norm();
    match which {
        AdmissibleSet::K => rel <= p.sigma_y,
        AdmissibleSet::KStar => {
            rel + p.d / (lit::<T>(2.0) * p.c) * b.dot(b) <= p.sigma_y
        }
    }
}

/// One backward-Euler step of the local flow/backstress system at a frozen
/// total strain.
///
/// Solves the coupled implicit system
///
/// ```text
/// delta_eps_p = dt * flow_rate(T_E(eps_trial, eps_p_new), b_new)
/// b_new       = (b_n + c * delta_eps_p) / (1 + d * |delta_eps_p|)
/// ```
///
/// The deviatoric structure reduces it to one scalar equation for the plastic
/// multiplier `dg = |delta_eps_p|`: writing
/// `q(dg) = s_trial + (d dg / (1 + d dg)) b_n` with
/// `s_trial = dev T_E(eps_trial, eps_p_n) - b_n`, the flow direction is
/// `q/|q|` and `dg` solves
///
/// ```text
/// f(dg) = |q(dg)| - 2 mu dg - c dg / (1 + d dg) - sigma_y - nu dg / dt = 0.
/// ```
///
/// `f` is strictly decreasing (slope below `-2 mu - nu/dt`), so the root is
/// unique; a bisection-safeguarded Newton finds it. For `d = 0` the direction
/// is exactly the trial direction and `f` is affine.
///
/// The closed-form backstress update makes the saturation bound exact: if
/// `|b_n| <= c/d` then `|b_new| <= c/d` for any step.
pub fn local_update<T: Real>(
    eps_trial: &Mat3<T>,
    state_n: &LocalState<T>,
    dt: T,
    p: &MaterialParams<T>,
) -> Result<LocalState<T>> {
    let t_e_trial = elastic_stress(eps_trial, &state_n.eps_p, p);
    let s_trial = t_e_trial.dev() - state_n.b;
    let trial_excess = s_trial.norm() - p.sigma_y;
    if trial_excess <= T::zero() {
        return Ok(*state_n);
    }

    let two_mu = lit::<T>(2.0) * p.mu;
    let nu_dt = p.nu / dt;
    let b_n = state_n.b;

    let q = |dg: T| -> Mat3<T> {
        if p.d > T::zero() {
            let w = p.d * dg / (T::one() + p.d * dg);
            s_trial + b_n * w
        } else {
            s_trial
        }
    };
    let f = |dg: T| -> T {
        let denom = T::one() + p.d * dg;
        q(dg).norm() - two_mu * dg - p.c * dg / denom - p.sigma_y - nu_dt * dg
    };
    let f_prime = |dg: T| -> T {
        let denom = T::one() + p.d * dg;
        let qv = q(dg);
        let qn = qv.norm();
        let dq = if p.d > T::zero() && qn > T::zero() {
            qv.dot(&b_n) * p.d / (denom * denom * qn)
        } else {
            T::zero()
        };
        dq - two_mu - p.c / (denom * denom) - nu_dt
    };

    // Bracket the root. For |b_n| <= c/d the analytic bound below already
    // encloses it; otherwise grow the bracket.
    let mut lo = T::zero();
    let mut hi = trial_excess / (two_mu + nu_dt);
    let mut guard = 0;
    while f(hi) > T::zero() {
        hi = hi * lit(2.0);
        guard += 1;
        if guard > 200 {
            return Err(Error::NoConvergence {
                iterations: guard,
                residual: f(hi).to_f64().unwrap_or(f64::NAN),
            });
        }
    }

    let rel_tol = tol_floor::<T>(NEWTON_REL_TOL);
    let mut dg = hi.min(trial_excess / (two_mu + p.c + nu_dt));
    let mut converged = false;
    for _ in 0..NEWTON_MAX_ITER {
        let fv = f(dg);
        if fv > T::zero() {
            lo = dg;
        } else {
            hi = dg;
        }
        let fp = f_prime(dg);
        let newton = dg - fv / fp;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) * lit(0.5)
        };
        let step = (next - dg).abs();
        dg = next;
        if step <= rel_tol * dg.max(rel_tol) || fv == T::zero() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: NEWTON_MAX_ITER,
            residual: f(dg).to_f64().unwrap_or(f64::NAN),
        });
    }

    let qv = q(dg);
    let qn = qv.norm();
    debug_assert!(qn > T::zero());
    let dir = qv * (T::one() / qn);
    let delta = dir * dg;
    let denom = T::one() + p.d * dg;
    Ok(LocalState {
        eps_p: state_n.eps_p + delta,
        b: (b_n + delta * p.c) * (T::one() / denom),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor3::Vec3;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params() -> MaterialParams<f64> {
        MaterialParams {
            mu: 1.0,
            lambda: 1.5,
            mu_c: 0.5,
            l_c: 0.1,
            c: 0.8,
            d: 2.0,
            sigma_y: 0.3,
            nu: 0.2,
            rho: 1.0,
        }
    }

    /// Unit symmetric trace-free direction along the (1,2) shear component.
    fn shear_dir() -> Mat3<f64> {
        let mut m = Mat3::zero();
        let s = 1.0 / 2.0_f64.sqrt();
        m.0[0][1] = s;
        m.0[1][0] = s;
        m
    }

    #[test]
    fn elastic_stress_examples() {
        let p = params();
        assert_eq!(
            elastic_stress(&Mat3::zero(), &Mat3::zero(), &p),
            Mat3::zero()
        );
        let te = elastic_stress(&Mat3::identity(), &Mat3::zero(), &p);
        let expected = Mat3::identity() * (2.0 * p.mu + 3.0 * p.lambda);
        assert_relative_eq!((te - expected).norm(), 0.0, epsilon = 1e-14);
        // eps = deviatoric strain e, eps_p = e: elastic strain vanishes
        let e = shear_dir() * 0.1;
        assert_relative_eq!(elastic_stress(&e, &e, &p).norm(), 0.0);
    }

    #[test]
    fn total_stress_examples() {
        let p = params();
        let zero = total_stress(&Mat3::zero(), &Mat3::zero(), &Mat3::zero(), &p).unwrap();
        assert_eq!(zero, Mat3::zero());

        // skew gradient cancelled by matching microrotation
        let a = crate::tensor3::axl_inv(Vec3::new(0.3, -0.2, 0.1));
        let t = total_stress(&a, &Mat3::zero(), &a, &p).unwrap();
        assert_relative_eq!(t.norm(), 0.0, epsilon = 1e-15);

        // mu_c = 0 kills the coupling for any skew A
        let mut p0 = p;
        p0.mu_c = 0.0;
        let g = Mat3([[0.1, 0.2, 0.0], [0.0, -0.1, 0.3], [0.2, 0.0, 0.0]]);
        let t = total_stress(&g, &Mat3::zero(), &a, &p0).unwrap();
        let te = elastic_stress(&g.sym(), &Mat3::zero(), &p0);
        assert_relative_eq!((t - te).norm(), 0.0, epsilon = 1e-15);

        assert!(total_stress(&g, &Mat3::zero(), &Mat3::identity(), &p).is_err());
    }

    #[test]
    fn yield_excess_examples() {
        let p = params();
        assert_eq!(yield_excess(&Mat3::zero(), &Mat3::zero(), &p), 0.0);
        let on_boundary = shear_dir() * p.sigma_y;
        assert_relative_eq!(
            yield_excess(&on_boundary, &Mat3::zero(), &p),
            0.0,
            epsilon = 1e-15
        );
        let outside = shear_dir() * (p.sigma_y + 1.0);
        assert_relative_eq!(yield_excess(&outside, &Mat3::zero(), &p), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn flow_rate_examples() {
        let p = params();
        assert_eq!(flow_rate(&Mat3::zero(), &Mat3::zero(), &p), Mat3::zero());

        // excess exactly nu: unit rate along the relative deviator
        let b = shear_dir() * 0.05;
        let te = b + shear_dir() * (p.sigma_y + p.nu);
        let rate = flow_rate(&te, &b, &p);
        assert_relative_eq!((rate - shear_dir()).norm(), 0.0, epsilon = 1e-13);

        let te2 = shear_dir() * (2.0 * p.sigma_y);
        let rate2 = flow_rate(&te2, &Mat3::zero(), &p);
        assert_relative_eq!(
            (rate2 - shear_dir() * (p.sigma_y / p.nu)).norm(),
            0.0,
            epsilon = 1e-13
        );
        // symmetric and trace-free
        assert!(rate2.trace().abs() < 1e-15);
        assert!((rate2 - rate2.sym()).norm() < 1e-15);
    }

    #[test]
    fn free_energy_examples() {
        let p = params();
        assert_eq!(
            free_energy_density(
                &Mat3::zero(),
                &Mat3::zero(),
                &Mat3::zero(),
                &Mat3::zero(),
                &Mat3::zero(),
                &p
            ),
            0.0
        );
        let eps = Mat3::diag(0.1, -0.05, 0.02);
        let w = free_energy_density(&eps, &Mat3::zero(), &Mat3::zero(), &Mat3::zero(), &Mat3::zero(), &p);
        let tr = eps.trace();
        assert_relative_eq!(w, p.mu * eps.dot(&eps) + 0.5 * p.lambda * tr * tr, epsilon = 1e-15);

        let b = shear_dir() * 0.2;
        let wb = free_energy_density(&Mat3::zero(), &Mat3::zero(), &Mat3::zero(), &Mat3::zero(), &b, &p);
        assert_relative_eq!(wb, b.dot(&b) / (2.0 * p.c), epsilon = 1e-15);
    }

    #[test]
    fn set_membership_examples() {
        let p = params();
        assert!(set_membership(AdmissibleSet::K, &Mat3::zero(), &Mat3::zero(), &p));
        assert!(set_membership(AdmissibleSet::KStar, &Mat3::zero(), &Mat3::zero(), &p));

        // boundary of K with b = 0: quadratic term vanishes, both true
        let te = shear_dir() * p.sigma_y;
        assert!(set_membership(AdmissibleSet::K, &te, &Mat3::zero(), &p));
        assert!(set_membership(AdmissibleSet::KStar, &te, &Mat3::zero(), &p));

        // b with (d/2c)|b|^2 = sigma_y and dev T_E = b: K boundary trivially,
        // K* boundary exactly; any larger b fails K*
        let bn = (2.0 * p.c * p.sigma_y / p.d).sqrt();
        let b = shear_dir() * bn;
        assert!(set_membership(AdmissibleSet::K, &b, &b, &p));
        assert!(set_membership(AdmissibleSet::KStar, &b, &b, &p));
        let b_big = shear_dir() * (bn * 1.001);
        assert!(!set_membership(AdmissibleSet::KStar, &b_big, &b_big, &p));
    }

    #[test]
    fn local_update_elastic_step_unchanged() {
        let p = params();
        let state = LocalState {
            eps_p: shear_dir() * 0.01,
            b: shear_dir() * 0.05,
        };
        let eps = shear_dir() * 0.02; // small strain, below yield
        let next = local_update(&eps, &state, 0.1, &p).unwrap();
        assert_eq!(next.eps_p, state.eps_p);
        assert_eq!(next.b, state.b);
    }

    #[test]
    fn local_update_melan_prager_backstress() {
        // d = 0: b_next = b_n + c * delta_eps_p exactly
        let mut p = params();
        p.d = 0.0;
        let state = LocalState::zero();
        let eps = shear_dir() * 1.0;
        let next = local_update(&eps, &state, 0.5, &p).unwrap();
        let delta = next.eps_p - state.eps_p;
        assert!(delta.norm() > 0.0);
        assert_relative_eq!((next.b - (state.b + delta * p.c)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn local_update_satisfies_implicit_system() {
        let p = params();
        let state = LocalState {
            eps_p: Mat3::zero(),
            b: shear_dir() * 0.3,
        };
        // trial direction not aligned with b to exercise the coupled solve
        let mut eps = Mat3::zero();
        eps.0[0][0] = 0.4;
        eps.0[1][1] = -0.4;
        let dt = 0.2;
        let next = local_update(&eps, &state, dt, &p).unwrap();
        let te = elastic_stress(&eps, &next.eps_p, &p);
        let rate = flow_rate(&te, &next.b, &p);
        let delta = next.eps_p - state.eps_p;
        // vector backward-Euler residuals of both equations
        assert!((delta - rate * dt).norm() <= 1e-10 * delta.norm().max(1.0));
        let dg = delta.norm();
        let b_expect = (state.b + delta * p.c) * (1.0 / (1.0 + p.d * dg));
        assert!((next.b - b_expect).norm() <= 1e-12);
    }

    /// Independent oracle: fixed-step RK4 on the rate system at dt/1000.
    fn rk4_oracle(
        eps: Mat3<f64>,
        state0: LocalState<f64>,
        t_end: f64,
        n: usize,
        p: &MaterialParams<f64>,
    ) -> LocalState<f64> {
        let h = t_end / n as f64;
        let rhs = |s: &LocalState<f64>| -> (Mat3<f64>, Mat3<f64>) {
            let te = elastic_stress(&eps, &s.eps_p, p);
            let rel = te.dev() - s.b;
            let norm = rel.norm();
            let excess = (norm - p.sigma_y).max(0.0);
            let rate = if excess > 0.0 && norm > 0.0 {
                rel * (excess / (p.nu * norm))
            } else {
                Mat3::zero()
            };
            let b_dot = rate * p.c - s.b * (p.d * rate.norm());
            (rate, b_dot)
        };
        let mut s = state0;
        for _ in 0..n {
            let k1 = rhs(&s);
            let s2 = LocalState { eps_p: s.eps_p + k1.0 * (h / 2.0), b: s.b + k1.1 * (h / 2.0) };
            let k2 = rhs(&s2);
            let s3 = LocalState { eps_p: s.eps_p + k2.0 * (h / 2.0), b: s.b + k2.1 * (h / 2.0) };
            let k3 = rhs(&s3);
            let s4 = LocalState { eps_p: s.eps_p + k3.0 * h, b: s.b + k3.1 * h };
            let k4 = rhs(&s4);
            s = LocalState {
                eps_p: s.eps_p + (k1.0 + k2.0 * 2.0 + k3.0 * 2.0 + k4.0) * (h / 6.0),
                b: s.b + (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * (h / 6.0),
            };
        }
        s
    }

    #[test]
    fn repeated_updates_saturate_backstress_toward_ode() {
        // fixed trial strain well above yield, b grows monotonically toward c/d
        let p = params();
        let eps = shear_dir() * 2.0;
        let t_end = 4.0;
        let n_steps = 400;
        let dt = t_end / n_steps as f64;
        let mut s = LocalState::zero();
        let mut prev_b = 0.0;
        for _ in 0..n_steps {
            s = local_update(&eps, &s, dt, &p).unwrap();
            let bn = s.b.norm();
            assert!(bn >= prev_b - 1e-14, "backstress norm must grow");
            assert!(bn <= p.c / p.d + 1e-10, "saturation bound");
            prev_b = bn;
        }
        let oracle = rk4_oracle(eps, LocalState::zero(), t_end, n_steps * 1000, &p);
        // backward Euler at this dt tracks the ODE to O(dt)
        let err = (s.b - oracle.b).norm() / oracle.b.norm();
        assert!(err < 0.05, "b relative error vs ODE oracle: {err}");
        let err_p = (s.eps_p - oracle.eps_p).norm() / oracle.eps_p.norm();
        assert!(err_p < 0.05, "eps_p relative error vs ODE oracle: {err_p}");
    }

    #[test]
    fn consistency_rate_is_first_order() {
        // (update - state)/dt converges to the rate system at O(dt)
        let p = params();
        let eps = shear_dir() * 1.2;
        let state = LocalState {
            eps_p: shear_dir() * 0.05,
            b: shear_dir() * 0.1,
        };
        let t_end = 0.4;
        let oracle = rk4_oracle(eps, state, t_end, 400_000, &p);
        let mut errs = Vec::new();
        for n in [8usize, 16, 32, 64] {
            let dt = t_end / n as f64;
            let mut s = state;
            for _ in 0..n {
                s = local_update(&eps, &s, dt, &p).unwrap();
            }
            errs.push(((s.eps_p - oracle.eps_p).norm() + (s.b - oracle.b).norm()) / 2.0);
        }
        // successive halvings of dt should roughly halve the error
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 1.5 && ratio < 3.0, "convergence ratios {errs:?}");
        }
    }

    #[test]
    fn nu_limit_excess_scales_linearly() {
        // persistent flow under a constant strain rate: once the transient has
        // passed, the overstress settles at a value proportional to nu
        let base = params();
        let rate = 0.5;
        let mut excesses = Vec::new();
        for nu in [0.4, 0.2, 0.1, 0.05] {
            let mut p = base;
            p.nu = nu;
            let mut s = LocalState::zero();
            let dt = 0.01;
            let mut excess = 0.0;
            for k in 1..=2000 {
                let eps = shear_dir() * (rate * dt * k as f64);
                s = local_update(&eps, &s, dt, &p).unwrap();
                let te = elastic_stress(&eps, &s.eps_p, &p);
                excess = yield_excess(&te, &s.b, &p);
            }
            excesses.push(excess);
        }
        for w in excesses.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 2.0).abs() < 0.2, "excess ratios {excesses:?}");
        }
    }

    fn random_sym_dev(entries: [f64; 5]) -> Mat3<f64> {
        // symmetric trace-free basis combination
        let mut m = Mat3::zero();
        m.0[0][0] = entries[0];
        m.0[1][1] = entries[1];
        m.0[2][2] = -entries[0] - entries[1];
        m.0[0][1] = entries[2];
        m.0[1][0] = entries[2];
        m.0[0][2] = entries[3];
        m.0[2][0] = entries[3];
        m.0[1][2] = entries[4];
        m.0[2][1] = entries[4];
        m
    }

    proptest! {
        #[test]
        fn backstress_bound_is_preserved(
            b_raw in prop::array::uniform5(-1.0f64..1.0),
            e_raw in prop::array::uniform5(-1.0f64..1.0),
            ep_raw in prop::array::uniform5(-0.2f64..0.2),
            dt in 1e-3f64..1.0,
            scale in 0.1f64..5.0,
        ) {
            let p = params();
            let bound = p.c / p.d;
            let mut b = random_sym_dev(b_raw);
            let bn = b.norm();
            if bn > 0.0 {
                // scale inside the admissible ball
                b = b * ((bound * 0.999 * b_raw[0].abs()) / bn);
            }
            let state = LocalState { eps_p: random_sym_dev(ep_raw), b };
            let eps = random_sym_dev(e_raw) * scale;
            let next = local_update(&eps, &state, dt, &p).unwrap();
            prop_assert!(next.b.norm() <= bound + 1e-10);
            // symmetry/trace preservation
            prop_assert!(next.invariant_residual() <= 1e-10 * (1.0 + next.eps_p.norm() + next.b.norm()));
            // dissipation sign: <delta_eps_p, dev T_E_new - b_new> >= 0
            let delta = next.eps_p - state.eps_p;
            let te = elastic_stress(&eps, &next.eps_p, &p);
            let rel = te.dev() - next.b;
            prop_assert!(delta.dot(&rel) >= -1e-12 * (1.0 + delta.norm() * rel.norm()));
        }
    }
}
