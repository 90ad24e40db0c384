//! Gaussian-CGS constants, derived electron scales and the closed-form
//! moment and uncertainty relations.
//!
//! Values carry six significant digits. Rounded literature figures such as
//! `T_Z = 8.1e-21 s` are acceptance targets, never stored here.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZbwError};
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Elementary charge (statC).
    pub e: f64,
    /// Planck constant (erg s).
    pub h: f64,
    /// Speed of light (cm/s).
    pub c: f64,
    /// Electron rest mass (g).
    pub m_e: f64,
    /// Energy of one electron-volt in erg.
    pub erg_per_ev: f64,
}

impl PhysicalConstants {
    pub const CGS: PhysicalConstants = PhysicalConstants {
        e: 4.803_20e-10,
        h: 6.626_07e-27,
        c: 2.997_92e10,
        m_e: 9.109_38e-28,
        erg_per_ev: 1.602_18e-12,
    };

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("e > 0", self.e),
            ("h > 0", self.h),
            ("c > 0", self.c),
            ("m_e > 0", self.m_e),
            ("erg_per_ev > 0", self.erg_per_ev),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ZbwError::domain(format!("constant violates {name}: {v}")));
            }
        }
        Ok(())
    }

    /// Fine-structure constant `2 pi e^2 / (h c)`.
    pub fn alpha(&self) -> f64 {
        2.0 * PI * self.e * self.e / (self.h * self.c)
    }

    pub fn hbar(&self) -> f64 {
        self.h / (2.0 * PI)
    }

    /// Rest energy `m c^2` in erg.
    pub fn rest_energy(&self, mass: f64) -> f64 {
        mass * self.c * self.c
    }

    pub fn erg_to_ev(&self, erg: f64) -> f64 {
        erg / self.erg_per_ev
    }

    pub fn ev_to_erg(&self, ev: f64) -> f64 {
        ev * self.erg_per_ev
    }

    /// Compton wavelength, beat time, classical radius and Bohr magneton for
    /// a particle of the given mass (g).
    pub fn electron_scales(&self, mass: f64) -> Result<ElectronScales> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(ZbwError::domain(format!("mass > 0 required, got {mass}")));
        }
        let mc = mass * self.c;
        let mc2 = mc * self.c;
        Ok(ElectronScales {
            lambda_c: self.h / mc,
            t_z: self.h / mc2,
            r_classical: self.e * self.e / mc2,
            mu_b: self.e * self.h / (4.0 * PI * mc),
        })
    }

    /// Magnetic moment `-(e / m_e c) S` of a spin vector `S` (erg s).
    pub fn moment_from_spin(&self, spin: Vec3) -> Vec3 {
        vec3::scale(spin, -self.e / (self.m_e * self.c))
    }

    /// Bound-state moment `(1 + 2 sqrt(1 - alpha^2 Z^2)) / 3` in units of the
    /// Bohr magneton.
    pub fn moment_bound_state(&self, z: f64) -> Result<f64> {
        if !(z >= 0.0) {
            return Err(ZbwError::domain(format!("Z >= 0 required, got {z}")));
        }
        let az = self.alpha() * z;
        // Z = 1/alpha itself may round to alpha*Z = 1 + ulp.
        if az > 1.0 + 4.0 * f64::EPSILON {
            return Err(ZbwError::domain(format!(
                "alpha*Z <= 1 required, got alpha*Z = {az}"
            )));
        }
        let root = (1.0 - az * az).max(0.0).sqrt();
        Ok((1.0 + 2.0 * root) / 3.0)
    }

    /// Electric dipole `M x (v / c)` carried by a moving magnetic moment.
    pub fn dipole_moment(&self, moment: Vec3, velocity: Vec3) -> Result<Vec3> {
        let speed = vec3::norm(velocity);
        if speed > self.c {
            return Err(ZbwError::domain(format!(
                "|v| <= c required, got |v| = {speed:e} cm/s"
            )));
        }
        Ok(vec3::cross(moment, vec3::scale(velocity, 1.0 / self.c)))
    }

    /// Energy/time reciprocity `(dw / m_e c^2) (dt / T_Z) ~ 1` for an energy
    /// resolution given in erg.
    pub fn uncertainty_budget(&self, delta_w_erg: f64) -> Result<UncertaintyBudget> {
        if !(delta_w_erg > 0.0) || !delta_w_erg.is_finite() {
            return Err(ZbwError::domain(format!(
                "delta_w > 0 required, got {delta_w_erg}"
            )));
        }
        let energy_ratio = delta_w_erg / self.rest_energy(self.m_e);
        Ok(UncertaintyBudget {
            energy_ratio,
            time_ratio: 1.0 / energy_ratio,
        })
    }

    pub fn uncertainty_budget_ev(&self, delta_w_ev: f64) -> Result<UncertaintyBudget> {
        self.uncertainty_budget(self.ev_to_erg(delta_w_ev))
    }

    /// Light-crossing time of an object of the given size (cm).
    pub fn collision_time(&self, size: f64) -> f64 {
        size / self.c
    }

    /// Yukawa-type coupling `g = sqrt(2) m c^2 / v` with the vacuum
    /// expectation value `v` given in eV.
    pub fn higgs_coupling(&self, mass: f64, vev_ev: f64) -> Result<f64> {
        if !(mass >= 0.0) {
            return Err(ZbwError::domain(format!("mass >= 0 required, got {mass}")));
        }
        if !(vev_ev > 0.0) {
            return Err(ZbwError::domain(format!("vev > 0 required, got {vev_ev}")));
        }
        Ok(2f64.sqrt() * self.erg_to_ev(self.rest_energy(mass)) / vev_ev)
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CGS
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectronScales {
    /// Compton wavelength `h / m c` (cm).
    pub lambda_c: f64,
    /// Light-crossing time of the Compton wavelength, `h / m c^2` (s).
    /// Twice the Zitterbewegung period.
    pub t_z: f64,
    /// `e^2 / m c^2` (cm).
    pub r_classical: f64,
    /// `e h / 4 pi m c` (erg/G).
    pub mu_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyBudget {
    /// `dw / m_e c^2`.
    pub energy_ratio: f64,
    /// Lower bound on `dt / T_Z`.
    pub time_ratio: f64,
}
