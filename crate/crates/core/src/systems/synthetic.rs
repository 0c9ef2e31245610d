//! Quasi-periodic test flows with known section topology.
//!
//! Both flows wind linearly on a torus of angles and embed it in a
//! 4-dimensional phase space: [`TorusFlow`] sweeps a 2-torus (sections by a
//! generic plane are finitely many points), [`ShellFlow`] sweeps a
//! 3-dimensional manifold (sections are curves).

use crate::error::Result;
use crate::integrate::OdeSystem;
use crate::reduction::wrap_angle;
use crate::sections::PhaseMap;

/// Two incommensurate rotations; phase point
/// `(a, b, w1 + A sin b + A2 sin a, w2 + B cos a + B2 cos(b + 0.3))`.
#[derive(Debug, Clone, Copy)]
pub struct TorusFlow {
    pub freq: [f64; 2],
    pub offset: [f64; 2],
    pub amp: [f64; 2],
    pub mix: [f64; 2],
}

impl Default for TorusFlow {
    fn default() -> Self {
        Self {
            freq: [1.0, std::f64::consts::SQRT_2],
            offset: [0.4, -0.2],
            amp: [0.8, 0.6],
            mix: [0.3, 0.25],
        }
    }
}

impl OdeSystem<2> for TorusFlow {
    fn rhs(&self, _t: f64, _y: &[f64; 2], dy: &mut [f64; 2]) -> Result<()> {
        *dy = self.freq;
        Ok(())
    }
}

impl PhaseMap<2> for TorusFlow {
    fn phase(&self, _t: f64, y: &[f64; 2]) -> Result<[f64; 4]> {
        let [a, b] = *y;
        Ok([
            wrap_angle(a),
            wrap_angle(b),
            self.offset[0] + self.amp[0] * b.sin() + self.mix[0] * a.sin(),
            self.offset[1] + self.amp[1] * a.cos() + self.mix[1] * (b + 0.3).cos(),
        ])
    }

    fn angular_mask(&self) -> [bool; 4] {
        [true, true, false, false]
    }
}

/// Three incommensurate rotations; phase point
/// `(a, b, A sin c + A2 sin b, B cos(c + a) + B2 cos b)`.
#[derive(Debug, Clone, Copy)]
pub struct ShellFlow {
    pub freq: [f64; 3],
    pub amp: [f64; 2],
    pub mix: [f64; 2],
}

impl Default for ShellFlow {
    fn default() -> Self {
        Self {
            freq: [1.0, std::f64::consts::SQRT_2, 0.5 * (1.0 + 5f64.sqrt())],
            amp: [0.9, 0.7],
            mix: [0.2, 0.3],
        }
    }
}

impl OdeSystem<3> for ShellFlow {
    fn rhs(&self, _t: f64, _y: &[f64; 3], dy: &mut [f64; 3]) -> Result<()> {
        *dy = self.freq;
        Ok(())
    }
}

impl PhaseMap<3> for ShellFlow {
    fn phase(&self, _t: f64, y: &[f64; 3]) -> Result<[f64; 4]> {
        let [a, b, c] = *y;
        Ok([
            wrap_angle(a),
            wrap_angle(b),
            self.amp[0] * c.sin() + self.mix[0] * b.sin(),
            self.amp[1] * (c + a).cos() + self.mix[1] * b.cos(),
        ])
    }

    fn angular_mask(&self) -> [bool; 4] {
        [true, true, false, false]
    }
}
