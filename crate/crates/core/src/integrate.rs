//! Adaptive Dormand-Prince 5(4) integration with dense output.
//!
//! Systems with holonomic constraints are projected back onto their manifold
//! after every accepted step; the dense interpolant is rebuilt so that it
//! still hits the projected endpoint exactly.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Right-hand side of an autonomous or time-dependent ODE of fixed dimension.
pub trait OdeSystem<const N: usize>: Sync {
    fn rhs(&self, t: f64, y: &[f64; N], dy: &mut [f64; N]) -> Result<()>;

    /// Whether [`OdeSystem::project`] does anything.
    fn has_projection(&self) -> bool {
        false
    }

    /// Pulls `y` back onto the constraint manifold.
    fn project(&self, _t: f64, _y: &mut [f64; N]) -> Result<()> {
        Ok(())
    }

    /// Whether [`OdeSystem::restore_invariants`] does anything.
    fn has_invariants(&self) -> bool {
        false
    }

    /// Nudges `y` back onto the level sets of the first integrals that
    /// `reference` lies on.
    fn restore_invariants(&self, _y: &mut [f64; N], _reference: &[f64; N]) -> Result<()> {
        Ok(())
    }

    fn energy(&self, _y: &[f64; N]) -> Option<f64> {
        None
    }

    fn momentum(&self, _y: &[f64; N]) -> Option<f64> {
        None
    }

    fn constraint_residual(&self, _y: &[f64; N]) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub projection_tol: f64,
    pub baumgarte_gamma: f64,
    pub t_end: f64,
    /// Stop once the section planes have seen this many crossings in total (0 = no limit).
    pub max_crossings: usize,
    /// Hard cap on accepted steps (0 = no limit).
    pub max_steps: u64,
    /// Restore energy and momentum after every step.
    pub conserve_invariants: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.5,
            projection_tol: 1e-11,
            baumgarte_gamma: 10.0,
            t_end: 1000.0,
            max_crossings: 0,
            max_steps: 0,
            conserve_invariants: true,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("projection_tol", self.projection_tol),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be > 0")));
            }
        }
        if !(self.baumgarte_gamma.is_finite() && self.baumgarte_gamma >= 0.0) {
            return Err(Error::InvalidParameter("baumgarte_gamma must be >= 0".into()));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidParameter("t_end must be >= 0".into()));
        }
        Ok(())
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Continuous extension (Hairer, Norsett & Wanner).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const PI_BETA: f64 = 0.04;

/// Interpolant for one accepted step on `[t0, t0 + h]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseSegment<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub coeffs: [[f64; N]; 5],
}

impl<const N: usize> DenseSegment<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn start(&self) -> [f64; N] {
        self.coeffs[0]
    }

    pub fn end(&self) -> [f64; N] {
        std::array::from_fn(|i| self.coeffs[0][i] + self.coeffs[1][i])
    }

    /// State at fraction `theta` of the step (0 = start, 1 = end).
    pub fn eval(&self, theta: f64) -> [f64; N] {
        let th1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.coeffs;
        std::array::from_fn(|i| r1[i] + theta * (r2[i] + th1 * (r3[i] + theta * (r4[i] + th1 * r5[i]))))
    }

    pub fn eval_at(&self, t: f64) -> [f64; N] {
        if self.h == 0.0 {
            return self.start();
        }
        self.eval((t - self.t0) / self.h)
    }

    /// A straight-line segment, handy for tests and for zero-length steps.
    pub fn linear(t0: f64, h: f64, y0: [f64; N], y1: [f64; N]) -> Self {
        let mut coeffs = [[0.0; N]; 5];
        coeffs[0] = y0;
        coeffs[1] = std::array::from_fn(|i| y1[i] - y0[i]);
        Self { t0, h, coeffs }
    }
}

/// Stateful adaptive stepper.
pub struct Dopri5<'a, S, const N: usize> {
    system: &'a S,
    config: IntegratorConfig,
    t: f64,
    y: [f64; N],
    f: [f64; N],
    h: f64,
    fac_old: f64,
    reference: [f64; N],
    pub accepted: u64,
    pub rejected: u64,
}

impl<'a, S: OdeSystem<N>, const N: usize> Dopri5<'a, S, N> {
    pub fn new(system: &'a S, t0: f64, y0: [f64; N], config: IntegratorConfig) -> Result<Self> {
        config.validate()?;
        let mut y = y0;
        if system.has_projection() {
            system.project(t0, &mut y)?;
        }
        let mut f = [0.0; N];
        system.rhs(t0, &y, &mut f)?;
        let mut stepper = Self {
            system,
            config,
            t: t0,
            y,
            f,
            h: 0.0,
            fac_old: 1e-4,
            reference: y,
            accepted: 0,
            rejected: 0,
        };
        stepper.h = stepper.initial_step()?;
        Ok(stepper)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[f64; N] {
        &self.y
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    fn scale(&self, a: &[f64; N], b: &[f64; N]) -> [f64; N] {
        std::array::from_fn(|i| self.config.abs_tol + self.config.rel_tol * a[i].abs().max(b[i].abs()))
    }

    fn initial_step(&self) -> Result<f64> {
        let sk = self.scale(&self.y, &self.y);
        let norm = |v: &[f64; N]| (v.iter().zip(&sk).map(|(x, s)| (x / s).powi(2)).sum::<f64>() / N as f64).sqrt();
        let d0 = norm(&self.y);
        let d1 = norm(&self.f);
        let mut h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(self.config.max_step);
        let y1: [f64; N] = std::array::from_fn(|i| self.y[i] + h0 * self.f[i]);
        let mut f1 = [0.0; N];
        self.system.rhs(self.t + h0, &y1, &mut f1)?;
        let diff: [f64; N] = std::array::from_fn(|i| f1[i] - self.f[i]);
        let d2 = norm(&diff) / h0;
        let dmax = d1.max(d2);
        let h1 = if dmax <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / dmax).powf(0.2) };
        Ok((100.0 * h0).min(h1).min(self.config.max_step))
    }

    /// Takes one accepted step, never passing `t_stop`.
    pub fn step(&mut self, t_stop: f64) -> Result<DenseSegment<N>> {
        let sys = self.system;
        let y = self.y;
        let k1 = self.f;
        let mut k2 = [0.0; N];
        let mut k3 = [0.0; N];
        let mut k4 = [0.0; N];
        let mut k5 = [0.0; N];
        let mut k6 = [0.0; N];
        let mut k7 = [0.0; N];
        let mut last_reject = false;
        loop {
            let mut h = self.h.min(self.config.max_step);
            if self.t + h > t_stop {
                h = t_stop - self.t;
            }
            if h <= 16.0 * f64::EPSILON * self.t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t: self.t, h });
            }
            let t = self.t;
            let stage = |c: &[(f64, &[f64; N])]| -> [f64; N] {
                std::array::from_fn(|i| y[i] + h * c.iter().map(|(a, k)| a * k[i]).sum::<f64>())
            };
            sys.rhs(t + C2 * h, &stage(&[(A21, &k1)]), &mut k2)?;
            sys.rhs(t + C3 * h, &stage(&[(A31, &k1), (A32, &k2)]), &mut k3)?;
            sys.rhs(t + C4 * h, &stage(&[(A41, &k1), (A42, &k2), (A43, &k3)]), &mut k4)?;
            sys.rhs(t + C5 * h, &stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]), &mut k5)?;
            sys.rhs(
                t + h,
                &stage(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
                &mut k6,
            )?;
            let y1 = stage(&[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            sys.rhs(t + h, &y1, &mut k7)?;

            let sk = self.scale(&y, &y1);
            let mut err = 0.0;
            for i in 0..N {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                err += (e / sk[i]).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() {
                if y1.iter().all(|v| v.is_finite()) {
                    return Err(Error::NonFinite { t });
                }
                self.h = h * FAC_MIN;
                self.rejected += 1;
                last_reject = true;
                continue;
            }

            let fac11 = err.powf(0.2 - PI_BETA * 0.75);
            if err <= 1.0 {
                let fac = (fac11 / self.fac_old.powf(PI_BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut h_new = h / fac;
                if last_reject {
                    h_new = h_new.min(h);
                }
                self.fac_old = err.max(1e-4);

                let mut y_end = y1;
                let mut f_end = k7;
                let restore = self.config.conserve_invariants && sys.has_invariants();
                if sys.has_projection() {
                    sys.project(t + h, &mut y_end)?;
                }
                if restore {
                    sys.restore_invariants(&mut y_end, &self.reference)?;
                }
                if sys.has_projection() || restore {
                    sys.rhs(t + h, &y_end, &mut f_end)?;
                }
                if y_end.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite { t: t + h });
                }

                let mut coeffs = [[0.0; N]; 5];
                for i in 0..N {
                    let ydiff = y_end[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    coeffs[0][i] = y[i];
                    coeffs[1][i] = ydiff;
                    coeffs[2][i] = bspl;
                    coeffs[3][i] = ydiff - h * f_end[i] - bspl;
                    coeffs[4][i] =
                        h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * f_end[i]);
                }
                self.t = if t + h >= t_stop { t_stop } else { t + h };
                self.y = y_end;
                self.f = f_end;
                self.h = h_new;
                self.accepted += 1;
                return Ok(DenseSegment { t0: t, h, coeffs });
            }
            self.h = h / (fac11 / SAFETY).min(1.0 / FAC_MIN);
            self.rejected += 1;
            last_reject = true;
        }
    }
}

/// Outcome of [`integrate_trajectory`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySummary<const N: usize> {
    pub t_final: f64,
    pub final_state: [f64; N],
    pub steps: u64,
    pub rejected: u64,
    /// Largest `|E - E0| / |E0|` seen at accepted steps (absolute when `E0 = 0`).
    pub energy_drift: Option<f64>,
    /// Same for angular momentum, where the system conserves it.
    pub momentum_drift: Option<f64>,
    pub max_constraint_residual: Option<f64>,
    /// Whether the observer asked to stop before `t_end`.
    pub stopped_early: bool,
}

fn relative(value: f64, reference: f64) -> f64 {
    let d = (value - reference).abs();
    if reference.abs() > 0.0 {
        d / reference.abs()
    } else {
        d
    }
}

/// Integrates from `y0` at `t0` to `t0 + config.t_end`, feeding every
/// accepted step to `observer`.
pub fn integrate_trajectory<S, F, const N: usize>(
    system: &S,
    t0: f64,
    y0: [f64; N],
    config: &IntegratorConfig,
    mut observer: F,
) -> Result<TrajectorySummary<N>>
where
    S: OdeSystem<N>,
    F: FnMut(&DenseSegment<N>) -> Result<ControlFlow<()>>,
{
    let mut stepper = Dopri5::new(system, t0, y0, *config)?;
    let t_stop = t0 + config.t_end;
    let e0 = system.energy(stepper.state());
    let l0 = system.momentum(stepper.state());
    let mut energy_drift = e0.map(|_| 0.0);
    let mut momentum_drift = l0.map(|_| 0.0);
    let mut max_res = system.constraint_residual(stepper.state());
    let mut stopped_early = false;

    while stepper.t() < t_stop {
        if config.max_steps > 0 && stepper.accepted >= config.max_steps {
            break;
        }
        let seg = stepper.step(t_stop)?;
        let y = stepper.state();
        if let (Some(e0), Some(e)) = (e0, system.energy(y)) {
            energy_drift = energy_drift.map(|d: f64| d.max(relative(e, e0)));
        }
        if let (Some(l0), Some(l)) = (l0, system.momentum(y)) {
            momentum_drift = momentum_drift.map(|d: f64| d.max(relative(l, l0)));
        }
        if let Some(r) = system.constraint_residual(y) {
            max_res = max_res.map(|m: f64| m.max(r));
        }
        if observer(&seg)?.is_break() {
            stopped_early = true;
            break;
        }
    }

    Ok(TrajectorySummary {
        t_final: stepper.t(),
        final_state: *stepper.state(),
        steps: stepper.accepted,
        rejected: stepper.rejected,
        energy_drift,
        momentum_drift,
        max_constraint_residual: max_res,
        stopped_early,
    })
}
