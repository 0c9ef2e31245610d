//! Planar pendulum-type chain with three point masses.
//!
//! Segment `i+1` is attached a fraction `eps[i]` of the way along segment `i`:
//! `eps = [1, 1]` is the ordinary triple pendulum, `eps[0] = 0` decouples the
//! first mass from the remaining pair. Motion is simulated in Cartesian
//! coordinates with the rod constraints enforced by Lagrange multipliers.

use nalgebra::{DMatrix, DVector, Matrix3, SMatrix, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::OdeSystem;

pub type Vec2 = Vector2<f64>;

/// Dimension of the flattened Cartesian state (3 positions + 3 velocities).
pub const PENDULUM_DIM: usize = 12;

/// Relative pivot below which the multiplier matrix is treated as singular.
const SINGULAR_PIVOT: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumParams {
    pub lengths: [f64; 3],
    pub masses: [f64; 3],
    /// Attachment fractions `(eps1, eps2)`.
    pub eps: [f64; 2],
    pub gravity: f64,
}

impl Default for PendulumParams {
    fn default() -> Self {
        Self {
            lengths: [1.0; 3],
            masses: [1.0; 3],
            eps: [1.0, 1.0],
            gravity: 0.0,
        }
    }
}

impl PendulumParams {
    /// Unit masses and lengths, no gravity, with the given attachment fractions.
    pub fn with_eps(eps1: f64, eps2: f64) -> Result<Self> {
        let p = Self {
            eps: [eps1, eps2],
            ..Self::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, l) in self.lengths.iter().enumerate() {
            if !(l.is_finite() && *l > 0.0) {
                return Err(Error::InvalidParameter(format!("length l{} = {l} must be > 0", i + 1)));
            }
        }
        for (i, m) in self.masses.iter().enumerate() {
            if !(m.is_finite() && *m > 0.0) {
                return Err(Error::InvalidParameter(format!("mass m{} = {m} must be > 0", i + 1)));
            }
        }
        for (i, e) in self.eps.iter().enumerate() {
            if !(0.0..=1.0).contains(e) {
                return Err(Error::InvalidParameter(format!("eps{} = {e} must lie in [0, 1]", i + 1)));
            }
        }
        if !self.gravity.is_finite() {
            return Err(Error::InvalidParameter("gravity must be finite".into()));
        }
        Ok(())
    }

    /// Coefficients `C` with segment vector `d_i = sum_k C[i][k] r_k`.
    pub fn segment_coefficients(&self) -> [[f64; 3]; 3] {
        let [e1, e2] = self.eps;
        [
            [1.0, 0.0, 0.0],
            [-e1, 1.0, 0.0],
            [-e1 * (1.0 - e2), -e2, 1.0],
        ]
    }
}

/// Positions and velocities of the three masses; the fixed pivot is the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianState {
    pub t: f64,
    pub r: [Vec2; 3],
    pub v: [Vec2; 3],
}

impl CartesianState {
    pub fn new(t: f64, r: [Vec2; 3], v: [Vec2; 3]) -> Self {
        Self { t, r, v }
    }

    pub fn at_rest(t: f64, r: [Vec2; 3]) -> Self {
        Self { t, r, v: [Vec2::zeros(); 3] }
    }

    pub fn to_array(&self) -> [f64; PENDULUM_DIM] {
        let mut y = [0.0; PENDULUM_DIM];
        for k in 0..3 {
            y[2 * k] = self.r[k].x;
            y[2 * k + 1] = self.r[k].y;
            y[6 + 2 * k] = self.v[k].x;
            y[6 + 2 * k + 1] = self.v[k].y;
        }
        y
    }

    pub fn from_array(t: f64, y: &[f64; PENDULUM_DIM]) -> Self {
        let r = std::array::from_fn(|k| Vec2::new(y[2 * k], y[2 * k + 1]));
        let v = std::array::from_fn(|k| Vec2::new(y[6 + 2 * k], y[6 + 2 * k + 1]));
        Self { t, r, v }
    }

    /// Rotates positions and velocities about the pivot.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let rot = |u: &Vec2| Vec2::new(c * u.x - s * u.y, s * u.x + c * u.y);
        Self {
            t: self.t,
            r: self.r.map(|u| rot(&u)),
            v: self.v.map(|u| rot(&u)),
        }
    }
}

/// Segment vectors `d_i` (from attachment point to mass `i`) and their rates.
pub fn segments(params: &PendulumParams, s: &CartesianState) -> ([Vec2; 3], [Vec2; 3]) {
    let c = params.segment_coefficients();
    let d = std::array::from_fn(|i| c[i][0] * s.r[0] + c[i][1] * s.r[1] + c[i][2] * s.r[2]);
    let dd = std::array::from_fn(|i| c[i][0] * s.v[0] + c[i][1] * s.v[1] + c[i][2] * s.v[2]);
    (d, dd)
}

pub fn constraint_values(params: &PendulumParams, s: &CartesianState) -> [f64; 3] {
    let (d, _) = segments(params, s);
    std::array::from_fn(|i| d[i].norm_squared() - params.lengths[i] * params.lengths[i])
}

/// Time derivative of the constraints, `J v`.
pub fn constraint_rates(params: &PendulumParams, s: &CartesianState) -> [f64; 3] {
    let (d, dd) = segments(params, s);
    std::array::from_fn(|i| 2.0 * d[i].dot(&dd[i]))
}

/// `d phi_i / d (r1, r2, r3)`, columns ordered `r1x, r1y, r2x, r2y, r3x, r3y`.
pub fn constraint_jacobian(params: &PendulumParams, s: &CartesianState) -> SMatrix<f64, 3, 6> {
    let c = params.segment_coefficients();
    let (d, _) = segments(params, s);
    let mut jac = SMatrix::<f64, 3, 6>::zeros();
    for i in 0..3 {
        for k in 0..3 {
            let g = 2.0 * c[i][k] * d[i];
            jac[(i, 2 * k)] = g.x;
            jac[(i, 2 * k + 1)] = g.y;
        }
    }
    jac
}

/// `J M^-1 J^T` built directly from segment geometry.
fn multiplier_matrix(params: &PendulumParams, d: &[Vec2; 3]) -> Matrix3<f64> {
    let c = params.segment_coefficients();
    let m = params.masses;
    Matrix3::from_fn(|i, j| {
        let w: f64 = (0..3).map(|k| c[i][k] * c[j][k] / m[k]).sum();
        4.0 * d[i].dot(&d[j]) * w
    })
}

/// Solves a symmetric positive definite 3x3 system, rejecting near-singular pivots.
fn solve_spd(a: Matrix3<f64>, b: Vector3<f64>) -> Result<Vector3<f64>> {
    let scale = a.diagonal().amax();
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::SingularConstraintSystem { pivot_ratio: 0.0 });
    }
    let chol = a.cholesky().ok_or(Error::SingularConstraintSystem { pivot_ratio: 0.0 })?;
    let l = chol.l_dirty();
    let min_pivot = (0..3).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
    let ratio = min_pivot / scale;
    if ratio < SINGULAR_PIVOT {
        return Err(Error::SingularConstraintSystem { pivot_ratio: ratio });
    }
    Ok(chol.solve(&b))
}

/// Accelerations and multipliers from the Baumgarte-stabilized constraint
/// equation `phi'' = -2 gamma phi' - gamma^2 phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumAccel {
    pub accel: [Vec2; 3],
    pub lambda: [f64; 3],
}

pub fn pendulum_rhs(params: &PendulumParams, s: &CartesianState, gamma: f64) -> Result<PendulumAccel> {
    let c = params.segment_coefficients();
    let m = params.masses;
    let (d, dd) = segments(params, s);
    let gravity_acc = Vec2::new(0.0, -params.gravity);

    let a = multiplier_matrix(params, &d);
    let b = Vector3::from_fn(|i, _| {
        let phi = d[i].norm_squared() - params.lengths[i] * params.lengths[i];
        let phi_dot = 2.0 * d[i].dot(&dd[i]);
        // J M^-1 F: every mass feels the same gravitational acceleration.
        let jmf: f64 = (0..3).map(|k| 2.0 * c[i][k] * d[i].dot(&gravity_acc)).sum();
        -2.0 * gamma * phi_dot - gamma * gamma * phi - 2.0 * dd[i].norm_squared() - jmf
    });
    let lambda = solve_spd(a, b)?;

    let accel = std::array::from_fn(|k| {
        let mut f = Vec2::zeros();
        for i in 0..3 {
            f += lambda[i] * 2.0 * c[i][k] * d[i];
        }
        gravity_acc + f / m[k]
    });
    Ok(PendulumAccel {
        accel,
        lambda: [lambda[0], lambda[1], lambda[2]],
    })
}

pub fn pendulum_energy(params: &PendulumParams, s: &CartesianState) -> f64 {
    (0..3)
        .map(|k| 0.5 * params.masses[k] * s.v[k].norm_squared() + params.masses[k] * params.gravity * s.r[k].y)
        .sum()
}

pub fn pendulum_angular_momentum(params: &PendulumParams, s: &CartesianState) -> f64 {
    (0..3)
        .map(|k| params.masses[k] * (s.r[k].x * s.v[k].y - s.r[k].y * s.v[k].x))
        .sum()
}

/// Projects a state back onto the position and velocity constraint manifolds.
///
/// Positions: mass-weighted Gauss-Newton on `phi = 0`. Velocities: mass-weighted
/// orthogonal projection onto `J v = 0`.
pub fn project_to_manifold(
    params: &PendulumParams,
    s: &CartesianState,
    tol: f64,
    max_iter: usize,
) -> Result<CartesianState> {
    let c = params.segment_coefficients();
    let m = params.masses;
    let mut out = *s;

    let correct = |out: &mut CartesianState, d: &[Vec2; 3], rhs: Vector3<f64>| -> Result<()> {
        let mu = solve_spd(multiplier_matrix(params, d), rhs)?;
        for k in 0..3 {
            let mut delta = Vec2::zeros();
            for i in 0..3 {
                delta += mu[i] * 2.0 * c[i][k] * d[i];
            }
            out.r[k] -= delta / m[k];
        }
        Ok(())
    };

    let mut residual = max_abs(&constraint_values(params, &out));
    let mut iter = 0;
    while residual > tol {
        if iter == max_iter || !residual.is_finite() {
            return Err(Error::ProjectionDiverged { iterations: iter, residual });
        }
        let (d, _) = segments(params, &out);
        let phi = Vector3::from(constraint_values(params, &out));
        correct(&mut out, &d, phi)?;
        residual = max_abs(&constraint_values(params, &out));
        iter += 1;
    }

    let (d, dd) = segments(params, &out);
    let rate = Vector3::from_fn(|i, _| 2.0 * d[i].dot(&dd[i]));
    if max_abs(&[rate[0], rate[1], rate[2]]) > 0.0 {
        let mu = solve_spd(multiplier_matrix(params, &d), rate)?;
        for k in 0..3 {
            let mut delta = Vec2::zeros();
            for i in 0..3 {
                delta += mu[i] * 2.0 * c[i][k] * d[i];
            }
            out.v[k] -= delta / m[k];
        }
    }
    let vres = max_abs(&constraint_rates(params, &out));
    if vres > tol {
        return Err(Error::ProjectionDiverged { iterations: iter, residual: vres });
    }
    Ok(out)
}

/// Mass-weighted minimal velocity correction that keeps `J v = 0` and
/// restores the energy `e0` and, when given, the angular momentum `l0`.
///
/// Positions are untouched. When the correction directions are dependent
/// (e.g. at rest or in rigid rotation) the momentum and then the energy
/// condition are dropped.
pub fn restore_invariants(params: &PendulumParams, s: &CartesianState, e0: f64, l0: Option<f64>) -> Result<CartesianState> {
    let c = params.segment_coefficients();
    let m = params.masses;
    let (d, _) = segments(params, s);
    let mut out = *s;
    let candidates: &[usize] = if l0.is_some() { &[5, 4] } else { &[4] };
    for &rows in candidates {
        let mut trial = *s;
        let mut ok = true;
        for _ in 0..4 {
            // gradients with respect to the six velocity components
            let mut g = [[0.0; 6]; 5];
            for i in 0..3 {
                for k in 0..3 {
                    g[i][2 * k] = 2.0 * c[i][k] * d[i].x;
                    g[i][2 * k + 1] = 2.0 * c[i][k] * d[i].y;
                }
            }
            for k in 0..3 {
                g[3][2 * k] = m[k] * trial.v[k].x;
                g[3][2 * k + 1] = m[k] * trial.v[k].y;
                g[4][2 * k] = -m[k] * trial.r[k].y;
                g[4][2 * k + 1] = m[k] * trial.r[k].x;
            }
            let rate = constraint_rates(params, &trial);
            let mut res = [-rate[0], -rate[1], -rate[2], e0 - pendulum_energy(params, &trial), 0.0];
            if let Some(l0) = l0 {
                res[4] = l0 - pendulum_angular_momentum(params, &trial);
            }
            let scale = e0.abs().max(1.0);
            if res[..rows].iter().all(|r| r.abs() <= 1e-15 * scale) {
                break;
            }
            let a = DMatrix::from_fn(rows, rows, |p, q| (0..6).map(|j| g[p][j] * g[q][j] / m[j / 2]).sum::<f64>());
            let diag_max = (0..rows).map(|i| a[(i, i)]).fold(0.0, f64::max);
            let Some(chol) = a.clone().cholesky() else {
                ok = false;
                break;
            };
            let l = chol.l_dirty();
            let min_pivot = (0..rows).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
            if !(diag_max > 0.0) || min_pivot / diag_max < 1e-10 {
                ok = false;
                break;
            }
            let mu = chol.solve(&DVector::from_row_slice(&res[..rows]));
            for k in 0..3 {
                for (axis, comp) in [(0, 2 * k), (1, 2 * k + 1)] {
                    let dv: f64 = (0..rows).map(|p| mu[p] * g[p][comp]).sum::<f64>() / m[k];
                    trial.v[k][axis] += dv;
                }
            }
        }
        if ok {
            out = trial;
            break;
        }
    }
    Ok(out)
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// The pendulum chain packaged for the integrator.
#[derive(Debug, Clone, Copy)]
pub struct PendulumSystem {
    pub params: PendulumParams,
    pub gamma: f64,
    pub projection_tol: f64,
    pub projection_max_iter: usize,
}

impl PendulumSystem {
    pub fn new(params: PendulumParams, gamma: f64, projection_tol: f64) -> Self {
        Self {
            params,
            gamma,
            projection_tol,
            projection_max_iter: 20,
        }
    }
}

impl OdeSystem<PENDULUM_DIM> for PendulumSystem {
    fn rhs(&self, t: f64, y: &[f64; PENDULUM_DIM], dy: &mut [f64; PENDULUM_DIM]) -> Result<()> {
        let s = CartesianState::from_array(t, y);
        let acc = pendulum_rhs(&self.params, &s, self.gamma)?;
        dy[..6].copy_from_slice(&y[6..]);
        for k in 0..3 {
            dy[6 + 2 * k] = acc.accel[k].x;
            dy[6 + 2 * k + 1] = acc.accel[k].y;
        }
        Ok(())
    }

    fn has_projection(&self) -> bool {
        true
    }

    fn project(&self, t: f64, y: &mut [f64; PENDULUM_DIM]) -> Result<()> {
        let s = CartesianState::from_array(t, y);
        let p = project_to_manifold(&self.params, &s, self.projection_tol, self.projection_max_iter)?;
        *y = p.to_array();
        Ok(())
    }

    fn has_invariants(&self) -> bool {
        true
    }

    fn restore_invariants(&self, y: &mut [f64; PENDULUM_DIM], reference: &[f64; PENDULUM_DIM]) -> Result<()> {
        let r = CartesianState::from_array(0.0, reference);
        let e0 = pendulum_energy(&self.params, &r);
        let l0 = (self.params.gravity == 0.0).then(|| pendulum_angular_momentum(&self.params, &r));
        let s = restore_invariants(&self.params, &CartesianState::from_array(0.0, y), e0, l0)?;
        *y = s.to_array();
        Ok(())
    }

    fn energy(&self, y: &[f64; PENDULUM_DIM]) -> Option<f64> {
        Some(pendulum_energy(&self.params, &CartesianState::from_array(0.0, y)))
    }

    fn momentum(&self, y: &[f64; PENDULUM_DIM]) -> Option<f64> {
        if self.params.gravity == 0.0 {
            Some(pendulum_angular_momentum(&self.params, &CartesianState::from_array(0.0, y)))
        } else {
            None
        }
    }

    fn constraint_residual(&self, y: &[f64; PENDULUM_DIM]) -> Option<f64> {
        let s = CartesianState::from_array(0.0, y);
        Some(max_abs(&constraint_values(&self.params, &s)).max(max_abs(&constraint_rates(&self.params, &s))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(r: [(f64, f64); 3]) -> CartesianState {
        CartesianState::at_rest(0.0, r.map(|(x, y)| Vec2::new(x, y)))
    }

    fn stretched_rotating(omega: f64) -> CartesianState {
        let r = [Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(3.0, 0.0)];
        let v = r.map(|p| Vec2::new(-omega * p.y, omega * p.x));
        CartesianState::new(0.0, r, v)
    }

    #[test]
    fn constraint_examples() {
        let p = PendulumParams::with_eps(1.0, 1.0).unwrap();
        assert_eq!(constraint_values(&p, &chain([(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)])), [0.0; 3]);

        let p = PendulumParams::with_eps(0.0, 0.0).unwrap();
        assert_eq!(constraint_values(&p, &chain([(0.0, 1.0), (1.0, 0.0), (0.0, -1.0)])), [0.0; 3]);

        // attachment 2 at (0.5, 0); attachment 3 at 0.5 + 0.5*(1.5 - 0.5) = 1.0
        let p = PendulumParams::with_eps(0.5, 0.5).unwrap();
        let phi = constraint_values(&p, &chain([(1.0, 0.0), (1.5, 0.0), (2.0, 0.0)]));
        for v in phi {
            assert!(v.abs() < 1e-15, "{phi:?}");
        }
    }

    #[test]
    fn jacobian_rows() {
        let p = PendulumParams::with_eps(1.0, 1.0).unwrap();
        let j = constraint_jacobian(&p, &chain([(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]));
        let row: Vec<f64> = j.row(0).iter().copied().collect();
        assert_eq!(row, vec![2.0, 0.0, 0.0, 0.0, 0.0, 0.0]);

        let p = PendulumParams::with_eps(0.0, 0.3).unwrap();
        let j = constraint_jacobian(&p, &chain([(0.3, 0.9), (1.0, 0.2), (-0.4, 0.7)]));
        assert_eq!(j[(1, 0)], 0.0);
        assert_eq!(j[(1, 1)], 0.0);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = PendulumParams::with_eps(0.37, 0.81).unwrap();
        let s = chain([(0.3, -0.8), (1.1, 0.25), (-0.4, 0.7)]);
        let j = constraint_jacobian(&p, &s);
        let h = 1e-6;
        for col in 0..6 {
            let mut plus = s.to_array();
            let mut minus = s.to_array();
            plus[col] += h;
            minus[col] -= h;
            let fp = constraint_values(&p, &CartesianState::from_array(0.0, &plus));
            let fm = constraint_values(&p, &CartesianState::from_array(0.0, &minus));
            for i in 0..3 {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                assert!((fd - j[(i, col)]).abs() < 1e-6, "entry ({i},{col})");
            }
        }
    }

    #[test]
    fn rest_state_has_no_acceleration() {
        let p = PendulumParams::with_eps(0.6, 0.2).unwrap();
        let s = chain([(0.0, 1.0), (0.6 + 1.0, 1.0), (0.6 + 0.2, 1.0 - 1.0)]);
        let s = project_to_manifold(&p, &s, 1e-13, 20).unwrap();
        let acc = pendulum_rhs(&p, &s, 10.0).unwrap();
        for a in acc.accel {
            assert!(a.norm() < 1e-12);
        }
        for l in acc.lambda {
            assert!(l.abs() < 1e-12);
        }
    }

    #[test]
    fn rigid_rotation_is_centripetal() {
        let p = PendulumParams::default();
        let omega = 1.3;
        let s = stretched_rotating(omega);
        let acc = pendulum_rhs(&p, &s, 10.0).unwrap();
        for k in 0..3 {
            let expected = -omega * omega * s.r[k];
            assert!((acc.accel[k] - expected).norm() < 1e-12, "mass {k}: {:?}", acc.accel[k]);
        }
        // constraint acceleration is satisfied exactly
        let (d, _) = segments(&p, &s);
        let c = p.segment_coefficients();
        for i in 0..3 {
            let dd_acc: Vec2 = (0..3).map(|k| c[i][k] * acc.accel[k]).sum();
            let (_, dd) = segments(&p, &s);
            let phi_ddot = 2.0 * dd[i].norm_squared() + 2.0 * d[i].dot(&dd_acc);
            assert!(phi_ddot.abs() < 1e-12);
        }
    }

    #[test]
    fn energy_and_momentum_examples() {
        let p = PendulumParams::default();
        let rest = chain([(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]);
        assert_eq!(pendulum_energy(&p, &rest), 0.0);
        assert_eq!(pendulum_angular_momentum(&p, &rest), 0.0);

        let mut s = rest;
        s.v[0] = Vec2::new(1.0, 0.0);
        assert_eq!(pendulum_energy(&p, &s), 0.5);

        let rot = stretched_rotating(1.0);
        assert!((pendulum_energy(&p, &rot) - 7.0).abs() < 1e-15);
        assert!((pendulum_angular_momentum(&p, &rot) - 14.0).abs() < 1e-15);
        let mut back = rot;
        back.v = rot.v.map(|v| -v);
        assert_eq!(pendulum_angular_momentum(&p, &back), -14.0);
    }

    #[test]
    fn decoupled_first_mass() {
        let p = PendulumParams::with_eps(0.0, 0.4).unwrap();
        let base = crate::reduction::from_angles(&p, [0.3, -1.2, 2.0], [0.7, -0.2, 0.5]);
        let a = pendulum_rhs(&p, &base, 10.0).unwrap();
        let other = crate::reduction::from_angles(&p, [0.3, 0.9, -2.5], [0.7, 1.1, -0.8]);
        let b = pendulum_rhs(&p, &other, 10.0).unwrap();
        assert!((a.accel[0] - b.accel[0]).norm() < 1e-12);
    }

    #[test]
    fn singular_when_segment_collapses() {
        let p = PendulumParams::default();
        // second mass sits on the first: d2 = 0
        let s = chain([(1.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        assert!(matches!(pendulum_rhs(&p, &s, 10.0), Err(Error::SingularConstraintSystem { .. })));
    }

    #[test]
    fn projection_examples() {
        let p = PendulumParams::default();
        let on = stretched_rotating(0.5);
        let same = project_to_manifold(&p, &on, 1e-11, 20).unwrap();
        assert_eq!(same, on);

        let mut off = on;
        off.r[0] *= 1.001;
        let fixed = project_to_manifold(&p, &off, 1e-11, 20).unwrap();
        assert!(max_abs(&constraint_values(&p, &fixed)) <= 1e-11);
        for k in 0..3 {
            assert!((fixed.r[k] - off.r[k]).norm() < 2e-3);
        }

        let mut radial = on;
        radial.v[0] += Vec2::new(0.2, 0.0);
        let fixed = project_to_manifold(&p, &radial, 1e-11, 20).unwrap();
        assert!(constraint_rates(&p, &fixed)[0].abs() <= 1e-11);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(PendulumParams::with_eps(1.2, 0.0).is_err());
        let p = PendulumParams {
            masses: [1.0, 0.0, 1.0],
            ..PendulumParams::default()
        };
        assert!(p.validate().is_err());
    }
}
