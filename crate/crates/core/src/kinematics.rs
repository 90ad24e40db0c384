//! Rest-frame Zitterbewegung kinematics.
//!
//! Every axis oscillates as `(lambda_C / 4 pi) sum sigma A_i sin(4 pi t / T_Z + phi_i)`.
//! The prefactor `lambda_C / 4 pi` is kept as a separate `lambda_unit` so a
//! change of trial mass only touches that one field.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Result, ZbwError};
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationMode {
    #[serde(rename = "A")]
    pub amplitude: [f64; 3],
    #[serde(rename = "phi")]
    pub phase: [f64; 3],
    pub sigma: f64,
}

impl OscillationMode {
    /// Equal amplitude and phase on all axes: motion along the (1,1,1) diagonal.
    pub fn linear_diagonal(amplitude: f64, sigma: f64) -> Self {
        OscillationMode {
            amplitude: [amplitude; 3],
            phase: [0.0; 3],
            sigma,
        }
    }

    /// `phi_1 = phi_3 = pi/2`, `phi_2 = 0`: a turn in the x-y plane with an
    /// oscillation along z.
    pub fn cylinder(amplitude: f64, sigma: f64) -> Self {
        OscillationMode {
            amplitude: [amplitude; 3],
            phase: [PI / 2.0, 0.0, PI / 2.0],
            sigma,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(ZbwError::domain(format!(
                "mode sigma > 0 required, got {}",
                self.sigma
            )));
        }
        for a in self.amplitude {
            if !(a >= 0.0) || !a.is_finite() {
                return Err(ZbwError::domain(format!(
                    "mode amplitude A_i >= 0 required, got {a}"
                )));
            }
        }
        if self.phase.iter().any(|p| !p.is_finite()) {
            return Err(ZbwError::domain("mode phases must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeEnsemble {
    modes: Vec<OscillationMode>,
    lambda_unit: f64,
    c: f64,
}

impl ModeEnsemble {
    pub fn new(modes: Vec<OscillationMode>, lambda_unit: f64, c: f64) -> Result<ModeEnsemble> {
        if modes.is_empty() {
            return Err(ZbwError::domain("mode ensemble must be nonempty"));
        }
        for m in &modes {
            m.validate()?;
        }
        if !(lambda_unit > 0.0) || !lambda_unit.is_finite() {
            return Err(ZbwError::domain(format!(
                "lambda_unit > 0 required, got {lambda_unit}"
            )));
        }
        if !(c > 0.0) {
            return Err(ZbwError::domain(format!("c > 0 required, got {c}")));
        }
        Ok(ModeEnsemble {
            modes,
            lambda_unit,
            c,
        })
    }

    /// Ensemble with `lambda_unit = h / (4 pi mass c)`.
    pub fn for_mass(
        modes: Vec<OscillationMode>,
        mass: f64,
        consts: &PhysicalConstants,
    ) -> Result<ModeEnsemble> {
        let scales = consts.electron_scales(mass)?;
        ModeEnsemble::new(modes, scales.lambda_c / (4.0 * PI), consts.c)
    }

    pub fn modes(&self) -> &[OscillationMode] {
        &self.modes
    }

    pub fn lambda_unit(&self) -> f64 {
        self.lambda_unit
    }

    pub fn with_lambda_unit(&self, lambda_unit: f64) -> Result<ModeEnsemble> {
        ModeEnsemble::new(self.modes.clone(), lambda_unit, self.c)
    }

    /// `T_Z = h / m c^2 = 4 pi lambda_unit / c`.
    pub fn t_z(&self) -> f64 {
        4.0 * PI * self.lambda_unit / self.c
    }

    /// Closed period of the motion, `T_Z / 2`.
    pub fn period(&self) -> f64 {
        self.t_z() / 2.0
    }

    /// Upper bound on the per-axis excursion, `lambda_unit * sum sigma max_i A_i`.
    pub fn effective_lambda(&self) -> f64 {
        self.lambda_unit * self.amplitude_sum()
    }

    /// `sum sigma max_i A_i` (dimensionless).
    pub fn amplitude_sum(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| m.sigma * m.amplitude.iter().cloned().fold(0.0, f64::max))
            .sum()
    }

    /// Position in units of `lambda_unit` at beat phase `theta = 4 pi t / T_Z`.
    pub fn unit_position_at_phase(&self, theta: f64) -> Vec3 {
        let mut r = [0.0; 3];
        for m in &self.modes {
            for (i, ri) in r.iter_mut().enumerate() {
                *ri += m.sigma * m.amplitude[i] * (theta + m.phase[i]).sin();
            }
        }
        r
    }

    pub fn position(&self, t: f64) -> Vec3 {
        let theta = 4.0 * PI * t / self.t_z();
        vec3::scale(self.unit_position_at_phase(theta), self.lambda_unit)
    }
}

fn check_lambda(lambda: f64, t_z: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(ZbwError::domain(format!(
            "Lambda > 0 required, got {lambda}"
        )));
    }
    if !(t_z > 0.0) {
        return Err(ZbwError::domain(format!("T_Z > 0 required, got {t_z}")));
    }
    Ok(())
}

/// Oscillation along the (1,1,1) diagonal: `s = sqrt(3) Lambda sin(4 pi t / T_Z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearTrajectory {
    pub lambda: f64,
    pub t_z: f64,
}

impl LinearTrajectory {
    pub fn new(lambda: f64, t_z: f64) -> Result<Self> {
        check_lambda(lambda, t_z)?;
        Ok(LinearTrajectory { lambda, t_z })
    }

    pub fn for_electron(lambda: f64, consts: &PhysicalConstants) -> Result<Self> {
        Self::new(lambda, consts.electron_scales(consts.m_e)?.t_z)
    }

    pub fn s(&self, t: f64) -> f64 {
        3f64.sqrt() * self.lambda * (4.0 * PI * t / self.t_z).sin()
    }

    pub fn direction() -> Vec3 {
        [1.0 / 3f64.sqrt(); 3]
    }

    /// Angle between the motion axis and each coordinate axis, in degrees.
    pub fn axis_angle_deg() -> f64 {
        (1.0 / 3f64.sqrt()).acos().to_degrees()
    }

    pub fn position(&self, t: f64) -> Vec3 {
        [self.lambda * (4.0 * PI * t / self.t_z).sin(); 3]
    }
}

/// Helical turn on a cylinder of radius `Lambda` and height `2 Lambda`:
/// `r = Lambda`, `theta = 4 pi t / T_Z`, `z = Lambda cos(theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderTrajectory {
    pub lambda: f64,
    pub t_z: f64,
}

impl CylinderTrajectory {
    pub fn new(lambda: f64, t_z: f64) -> Result<Self> {
        check_lambda(lambda, t_z)?;
        Ok(CylinderTrajectory { lambda, t_z })
    }

    pub fn for_electron(lambda: f64, consts: &PhysicalConstants) -> Result<Self> {
        Self::new(lambda, consts.electron_scales(consts.m_e)?.t_z)
    }

    pub fn angular_rate(&self) -> f64 {
        4.0 * PI / self.t_z
    }

    /// Cylindrical coordinates `(r, theta, z)`.
    pub fn coords(&self, t: f64) -> (f64, f64, f64) {
        let theta = self.angular_rate() * t;
        (self.lambda, theta, self.lambda * theta.cos())
    }

    pub fn position(&self, t: f64) -> Vec3 {
        let (r, theta, z) = self.coords(t);
        [r * theta.cos(), r * theta.sin(), z]
    }

    /// Path speed `(4 pi / T_Z) sqrt(2 Lambda^2 - z^2)`.
    pub fn path_speed(&self, t: f64) -> f64 {
        let (_, _, z) = self.coords(t);
        self.speed_at_height(z)
    }

    pub fn speed_at_height(&self, z: f64) -> f64 {
        self.angular_rate() * (2.0 * self.lambda * self.lambda - z * z).max(0.0).sqrt()
    }
}
