//! Dynamically symmetric satellite on a circular orbit.
//!
//! The Euler angle `phi` is cyclic; with its momentum fixed to `alpha * beta`
//! the attitude motion has two degrees of freedom `(psi, theta)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::OdeSystem;
use crate::sections::PhaseMap;

/// Smallest admissible `|sin(theta)|`.
pub const THETA_MIN: f64 = 1e-8;

pub const SATELLITE_DIM: usize = 4;

/// Which closed form of the Hamiltonian to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SatelliteForm {
    /// Full orbital-frame Hamiltonian, valid for any `alpha`, `beta`.
    Orbital,
    /// Two-degree-of-freedom Hamiltonian for `alpha = 4/3`, `beta = 0`:
    /// `p_psi^2 / (2 sin^2 theta) + p_theta^2 / 2 - p_psi + sin^2 psi sin^2 theta / 2`.
    #[default]
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatelliteParams {
    /// Inertia ratio `C / A`.
    pub alpha: f64,
    /// Ratio of orbital angular velocity to the spin about the symmetry axis.
    pub beta: f64,
    #[serde(default)]
    pub form: SatelliteForm,
}

impl Default for SatelliteParams {
    fn default() -> Self {
        Self {
            alpha: 4.0 / 3.0,
            beta: 0.0,
            form: SatelliteForm::Reduced,
        }
    }
}

impl SatelliteParams {
    pub fn orbital(alpha: f64, beta: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            form: SatelliteForm::Orbital,
        };
        p.validate()?;
        Ok(p)
    }

    /// Fixed momentum of the cyclic angle.
    pub fn p_phi(&self) -> f64 {
        self.alpha * self.beta
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha = {} must be > 0", self.alpha)));
        }
        if !self.beta.is_finite() {
            return Err(Error::InvalidParameter("beta must be finite".into()));
        }
        if self.form == SatelliteForm::Reduced && (self.alpha != 4.0 / 3.0 || self.beta != 0.0) {
            return Err(Error::InvalidParameter(
                "the reduced form is only defined for alpha = 4/3, beta = 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatelliteState {
    pub psi: f64,
    pub theta: f64,
    pub p_psi: f64,
    pub p_theta: f64,
}

impl SatelliteState {
    pub fn new(psi: f64, theta: f64, p_psi: f64, p_theta: f64) -> Self {
        Self { psi, theta, p_psi, p_theta }
    }

    /// Initial point shown in the reference section figure for the reduced satellite.
    pub fn reference_point() -> Self {
        Self::new(0.28, 0.82, 0.15, 0.37)
    }

    pub fn to_array(&self) -> [f64; SATELLITE_DIM] {
        [self.psi, self.theta, self.p_psi, self.p_theta]
    }

    pub fn from_array(y: &[f64; SATELLITE_DIM]) -> Self {
        Self::new(y[0], y[1], y[2], y[3])
    }
}

fn guarded_sin(theta: f64) -> Result<(f64, f64)> {
    let (s, c) = theta.sin_cos();
    if s.abs() < THETA_MIN || !s.is_finite() {
        return Err(Error::CoordinateSingularity { sin_theta: s.abs() });
    }
    Ok((s, c))
}

pub fn satellite_hamiltonian(params: &SatelliteParams, st: &SatelliteState) -> Result<f64> {
    let (s, c) = guarded_sin(st.theta)?;
    let s2 = s * s;
    let (sp, cp) = st.psi.sin_cos();
    let (pp, pt) = (st.p_psi, st.p_theta);
    Ok(match params.form {
        SatelliteForm::Reduced => pp * pp / (2.0 * s2) + 0.5 * pt * pt - pp + 0.5 * sp * sp * s2,
        SatelliteForm::Orbital => {
            let k = params.p_phi();
            pp * pp / (2.0 * s2) + 0.5 * pt * pt - pp * (c / s) * cp - k * pp * c / s2 - pt * sp
                + k * cp / s
                + k * k / (2.0 * s2)
                + 1.5 * (params.alpha - 1.0) * c * c
        }
    })
}

/// Hamilton's equations `(psi', theta', p_psi', p_theta')` from analytic partials.
pub fn satellite_rhs(params: &SatelliteParams, st: &SatelliteState) -> Result<[f64; SATELLITE_DIM]> {
    let (s, c) = guarded_sin(st.theta)?;
    let s2 = s * s;
    let s3 = s2 * s;
    let (sp, cp) = st.psi.sin_cos();
    let (pp, pt) = (st.p_psi, st.p_theta);
    let (h_pp, h_pt, h_psi, h_theta) = match params.form {
        SatelliteForm::Reduced => (
            pp / s2 - 1.0,
            pt,
            sp * cp * s2,
            -pp * pp * c / s3 + sp * sp * s * c,
        ),
        SatelliteForm::Orbital => {
            let k = params.p_phi();
            (
                pp / s2 - (c / s) * cp - k * c / s2,
                pt - sp,
                pp * (c / s) * sp - pt * cp - k * sp / s,
                -pp * pp * c / s3 + pp * cp / s2 + k * pp * (s2 + 2.0 * c * c) / s3 - k * c * cp / s2
                    - k * k * c / s3
                    - 3.0 * (params.alpha - 1.0) * c * s,
            )
        }
    };
    Ok([h_pp, h_pt, -h_psi, -h_theta])
}

#[derive(Debug, Clone, Copy)]
pub struct SatelliteSystem {
    pub params: SatelliteParams,
}

impl OdeSystem<SATELLITE_DIM> for SatelliteSystem {
    fn rhs(&self, _t: f64, y: &[f64; SATELLITE_DIM], dy: &mut [f64; SATELLITE_DIM]) -> Result<()> {
        *dy = satellite_rhs(&self.params, &SatelliteState::from_array(y))?;
        Ok(())
    }

    fn has_invariants(&self) -> bool {
        true
    }

    /// Newton steps along the gradient of `H` back to the reference level.
    fn restore_invariants(&self, y: &mut [f64; SATELLITE_DIM], reference: &[f64; SATELLITE_DIM]) -> Result<()> {
        let h0 = satellite_hamiltonian(&self.params, &SatelliteState::from_array(reference))?;
        for _ in 0..3 {
            let st = SatelliteState::from_array(y);
            let dh = satellite_hamiltonian(&self.params, &st)? - h0;
            if dh.abs() <= 1e-15 * h0.abs().max(1e-3) {
                break;
            }
            let d = satellite_rhs(&self.params, &st)?;
            let grad = [-d[2], -d[3], d[0], d[1]];
            let g2: f64 = grad.iter().map(|g| g * g).sum();
            if g2 == 0.0 {
                break;
            }
            for i in 0..SATELLITE_DIM {
                y[i] -= dh * grad[i] / g2;
            }
        }
        Ok(())
    }

    fn energy(&self, y: &[f64; SATELLITE_DIM]) -> Option<f64> {
        satellite_hamiltonian(&self.params, &SatelliteState::from_array(y)).ok()
    }
}

impl PhaseMap<SATELLITE_DIM> for SatelliteSystem {
    fn phase(&self, _t: f64, y: &[f64; SATELLITE_DIM]) -> Result<[f64; 4]> {
        Ok([crate::reduction::wrap_angle(y[0]), y[1], y[2], y[3]])
    }

    /// Only `psi` wraps; `theta` stays inside `(0, pi)` away from the guard.
    fn angular_mask(&self) -> [bool; 4] {
        [true, false, false, false]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn fd_gradient(params: &SatelliteParams, st: &SatelliteState) -> [f64; 4] {
        let h = 1e-6;
        let y = st.to_array();
        std::array::from_fn(|i| {
            let mut p = y;
            let mut m = y;
            p[i] += h;
            m[i] -= h;
            let hp = satellite_hamiltonian(params, &SatelliteState::from_array(&p)).unwrap();
            let hm = satellite_hamiltonian(params, &SatelliteState::from_array(&m)).unwrap();
            (hp - hm) / (2.0 * h)
        })
    }

    #[test]
    fn reduced_values() {
        let p = SatelliteParams::default();
        let h0 = satellite_hamiltonian(&p, &SatelliteState::new(0.0, FRAC_PI_2, 0.0, 0.0)).unwrap();
        assert_eq!(h0, 0.0);
        let h1 = satellite_hamiltonian(&p, &SatelliteState::new(FRAC_PI_2, FRAC_PI_2, 0.0, 0.0)).unwrap();
        assert!((h1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reference_point_energy_is_frozen() {
        // direct evaluation of the reduced Hamiltonian at (0.28, 0.82, 0.15, 0.37)
        let (s, sp) = (0.82f64.sin(), 0.28f64.sin());
        let direct = 0.15 * 0.15 / (2.0 * s * s) + 0.37 * 0.37 / 2.0 - 0.15 + 0.5 * sp * sp * s * s;
        let h = satellite_hamiltonian(&SatelliteParams::default(), &SatelliteState::reference_point()).unwrap();
        assert!((h - direct).abs() < 1e-15);
        assert!((h - REFERENCE_ENERGY).abs() < 1e-12, "{h:.17}");
    }

    const REFERENCE_ENERGY: f64 = -0.040_091_844_147_004_63;

    #[test]
    fn reduced_rhs_at_equator() {
        let d = satellite_rhs(&SatelliteParams::default(), &SatelliteState::new(0.0, FRAC_PI_2, 0.0, 0.0)).unwrap();
        assert!((d[0] + 1.0).abs() < 1e-15);
        for v in &d[1..] {
            assert!(v.abs() < 1e-15);
        }
    }

    #[test]
    fn rhs_matches_finite_differences() {
        let cases = [
            (SatelliteParams::default(), SatelliteState::reference_point()),
            (SatelliteParams::orbital(1.7, 0.4).unwrap(), SatelliteState::new(-0.9, 2.1, 0.3, -0.8)),
            (SatelliteParams::orbital(0.6, -1.3).unwrap(), SatelliteState::new(2.5, 0.4, -0.2, 0.1)),
        ];
        for (p, st) in cases {
            let g = fd_gradient(&p, &st);
            let d = satellite_rhs(&p, &st).unwrap();
            let expected = [g[2], g[3], -g[0], -g[1]];
            for i in 0..4 {
                assert!((d[i] - expected[i]).abs() < 1e-6, "{p:?} component {i}: {} vs {}", d[i], expected[i]);
            }
        }
    }

    #[test]
    fn singularity_guard() {
        let p = SatelliteParams::default();
        let st = SatelliteState::new(0.1, 0.0, 0.1, 0.1);
        assert!(matches!(satellite_hamiltonian(&p, &st), Err(Error::CoordinateSingularity { .. })));
        assert!(matches!(satellite_rhs(&p, &st), Err(Error::CoordinateSingularity { .. })));
    }

    #[test]
    fn reduced_form_requires_its_parameters() {
        let p = SatelliteParams {
            alpha: 1.2,
            ..SatelliteParams::default()
        };
        assert!(p.validate().is_err());
        assert!(SatelliteParams::orbital(-1.0, 0.0).is_err());
    }
}
