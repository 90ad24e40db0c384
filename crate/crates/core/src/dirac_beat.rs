//! Expectation velocity and position of a free Dirac electron built from a
//! discretised momentum-space ensemble.
//!
//! The momentum integral is replaced by a weighted sum over cells. Each cell
//! carries four positive-energy amplitudes `a` and four negative-energy
//! amplitudes `b`. Interference between the two produces the beat
//! `c A cos(omega t + phi)` with `omega = 4 pi W / h`.
//!
//! Matrices use the Dirac-Pauli representation,
//! `alpha_i = [[0, sigma_i], [sigma_i, 0]]`.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Result, ZbwError};
use crate::vec3::Vec3;

pub type Spinor = [Complex64; 4];
pub type Matrix4 = [[Complex64; 4]; 4];

const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    /// Axis from a 1-based Dirac index.
    pub fn from_dirac_index(i: usize) -> Result<Axis> {
        match i {
            1 => Ok(Axis::X),
            2 => Ok(Axis::Y),
            3 => Ok(Axis::Z),
            _ => Err(ZbwError::domain(format!(
                "axis in {{1,2,3}} required, got {i}"
            ))),
        }
    }
}

impl FromStr for Axis {
    type Err = ZbwError;

    fn from_str(s: &str) -> Result<Axis> {
        match s {
            "x" | "X" | "1" => Ok(Axis::X),
            "y" | "Y" | "2" => Ok(Axis::Y),
            "z" | "Z" | "3" => Ok(Axis::Z),
            _ => Err(ZbwError::domain(format!(
                "axis must be x, y or z, got {s:?}"
            ))),
        }
    }
}

/// Dirac `alpha` matrix for the given axis (Dirac-Pauli representation).
pub fn alpha_matrix(axis: Axis) -> Matrix4 {
    let o = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let pauli = match axis {
        Axis::X => [[o, one], [one, o]],
        Axis::Y => [[o, -i], [i, o]],
        Axis::Z => [[one, o], [o, -one]],
    };
    let mut m = [[o; 4]; 4];
    for r in 0..2 {
        for c in 0..2 {
            m[r][c + 2] = pauli[r][c];
            m[r + 2][c] = pauli[r][c];
        }
    }
    m
}

/// `u^dagger M v`.
pub fn sandwich(u: &Spinor, m: &Matrix4, v: &Spinor) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (r, row) in m.iter().enumerate() {
        let mut mv = Complex64::new(0.0, 0.0);
        for (col, entry) in row.iter().enumerate() {
            mv += entry * v[col];
        }
        acc += u[r].conj() * mv;
    }
    acc
}

fn norm_sqr(s: &Spinor) -> f64 {
    s.iter().map(|z| z.norm_sqr()).sum()
}

/// One momentum-space cell of the Fourier expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumCell {
    /// Momentum (g cm/s).
    pub p: Vec3,
    /// Momentum-space volume weight.
    pub sigma: f64,
    pub a: Spinor,
    pub b: Spinor,
    /// `sqrt(m^2 c^4 + p^2 c^2)` (erg).
    pub energy: f64,
}

impl MomentumCell {
    pub fn new(
        p: Vec3,
        sigma: f64,
        a: Spinor,
        b: Spinor,
        mass: f64,
        consts: &PhysicalConstants,
    ) -> Result<MomentumCell> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(ZbwError::domain(format!(
                "sigma >= 0 required, got {sigma}"
            )));
        }
        if !(mass > 0.0) {
            return Err(ZbwError::domain(format!("mass > 0 required, got {mass}")));
        }
        let mc2 = consts.rest_energy(mass);
        let pc2 = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) * consts.c * consts.c;
        let energy = (mc2 * mc2 + pc2).sqrt();
        Ok(MomentumCell {
            p,
            sigma,
            a,
            b,
            energy,
        })
    }

    /// Beat angular frequency `4 pi W / h`.
    pub fn omega(&self, consts: &PhysicalConstants) -> f64 {
        4.0 * PI * self.energy / consts.h
    }

    /// `sigma * sum_k (|a_k|^2 + |b_k|^2)`.
    pub fn weight(&self) -> f64 {
        self.sigma * (norm_sqr(&self.a) + norm_sqr(&self.b))
    }

    /// Cross-term velocity `-c [a^+ alpha b e^{-i w t} + b^+ alpha a e^{+i w t}]`
    /// evaluated directly from the amplitudes, for one cell and unit weight.
    pub fn cross_term_velocity(&self, axis: Axis, t: f64, consts: &PhysicalConstants) -> f64 {
        let alpha = alpha_matrix(axis);
        let phase = Complex64::from_polar(1.0, -self.omega(consts) * t);
        let ab = sandwich(&self.a, &alpha, &self.b);
        let ba = sandwich(&self.b, &alpha, &self.a);
        let v = -consts.c * (ab * phase + ba * phase.conj());
        v.re
    }
}

/// The beat `c A cos(omega t + phi)` carried by one cell along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeatComponent {
    pub axis: Axis,
    /// Dimensionless amplitude, `A >= 0`.
    pub amplitude: f64,
    /// Phase in `(-pi, pi]`.
    pub phase: f64,
    /// Angular frequency (rad/s).
    pub omega: f64,
}

impl BeatComponent {
    /// `c A cos(omega t + phi)`.
    pub fn velocity(&self, t: f64, c: f64) -> f64 {
        c * self.amplitude * (self.omega * t + self.phase).cos()
    }

    /// Time integral of [`Self::velocity`]: `(c / omega) A sin(omega t + phi)`,
    /// i.e. `(h c / 4 pi W) A sin(...)`.
    pub fn displacement(&self, t: f64, c: f64) -> f64 {
        c / self.omega * self.amplitude * (self.omega * t + self.phase).sin()
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let mut p = phi.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// Amplitude and phase of the positive/negative energy beat of one cell.
///
/// With `M = a^+ alpha b = |M| e^{i theta}` the cross term equals
/// `-2c|M| cos(omega t - theta) = c A cos(omega t + phi)` where `A = 2|M|` and
/// `phi = pi - theta`.
pub fn beat_parameters(
    cell: &MomentumCell,
    axis: Axis,
    consts: &PhysicalConstants,
) -> BeatComponent {
    let m = sandwich(&cell.a, &alpha_matrix(axis), &cell.b);
    let amplitude = 2.0 * m.norm();
    let phase = if amplitude == 0.0 {
        0.0
    } else {
        wrap_phase(PI - m.arg())
    };
    BeatComponent {
        axis,
        amplitude,
        phase,
        omega: cell.omega(consts),
    }
}

#[derive(Debug, Clone)]
pub struct CellEnsemble {
    cells: Vec<MomentumCell>,
    consts: PhysicalConstants,
}

impl CellEnsemble {
    /// Wraps cells that already satisfy `sum sigma (|a|^2 + |b|^2) = 1`.
    pub fn new(cells: Vec<MomentumCell>, consts: PhysicalConstants) -> Result<CellEnsemble> {
        if cells.is_empty() {
            return Err(ZbwError::domain("ensemble must contain at least one cell"));
        }
        let total: f64 = cells.iter().map(MomentumCell::weight).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(ZbwError::domain(format!(
                "ensemble normalization sum sigma*(|a|^2+|b|^2) = 1 required, got {total}"
            )));
        }
        Ok(CellEnsemble { cells, consts })
    }

    /// Rescales all amplitudes by a common factor so the ensemble is normalized.
    pub fn normalized(
        mut cells: Vec<MomentumCell>,
        consts: PhysicalConstants,
    ) -> Result<CellEnsemble> {
        let total: f64 = cells.iter().map(MomentumCell::weight).sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(ZbwError::domain("ensemble has zero total weight"));
        }
        let k = 1.0 / total.sqrt();
        for cell in &mut cells {
            for z in cell.a.iter_mut().chain(cell.b.iter_mut()) {
                *z *= k;
            }
        }
        CellEnsemble::new(cells, consts)
    }

    /// `n` cells with momenta drawn from an isotropic Gaussian of width
    /// `p_width` (g cm/s), complex Gaussian amplitudes and equal weights.
    pub fn gaussian_ball(
        n: usize,
        p_width: f64,
        seed: u64,
        consts: PhysicalConstants,
    ) -> Result<CellEnsemble> {
        if n == 0 {
            return Err(ZbwError::domain("n >= 1 cells required"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
        let mut cells = Vec::with_capacity(n);
        for _ in 0..n {
            let p = [p_width * normal(), p_width * normal(), p_width * normal()];
            let mut spinor =
                || -> Spinor { std::array::from_fn(|_| Complex64::new(normal(), normal())) };
            let a = spinor();
            let b = spinor();
            cells.push(MomentumCell::new(
                p,
                1.0 / n as f64,
                a,
                b,
                consts.m_e,
                &consts,
            )?);
        }
        CellEnsemble::normalized(cells, consts)
    }

    pub fn cells(&self) -> &[MomentumCell] {
        &self.cells
    }

    pub fn consts(&self) -> &PhysicalConstants {
        &self.consts
    }

    /// Time-independent drift `sum sigma (p c^2 / W) sum_k (|a_k|^2 - |b_k|^2)`.
    pub fn mean_velocity(&self, axis: Axis) -> f64 {
        let c2 = self.consts.c * self.consts.c;
        self.cells
            .iter()
            .map(|cell| {
                let occupation = norm_sqr(&cell.a) - norm_sqr(&cell.b);
                cell.sigma * cell.p[axis.index()] * c2 / cell.energy * occupation
            })
            .sum()
    }

    pub fn beats(&self, axis: Axis) -> Vec<BeatComponent> {
        self.cells
            .iter()
            .map(|cell| beat_parameters(cell, axis, &self.consts))
            .collect()
    }

    /// Drift plus the sigma-weighted beat sum at each time.
    pub fn velocity_series(&self, axis: Axis, times: &[f64]) -> Vec<f64> {
        let drift = self.mean_velocity(axis);
        let beats = self.beats(axis);
        let c = self.consts.c;
        times
            .par_iter()
            .map(|&t| {
                drift
                    + self
                        .cells
                        .iter()
                        .zip(&beats)
                        .map(|(cell, beat)| cell.sigma * beat.velocity(t, c))
                        .sum::<f64>()
            })
            .collect()
    }

    /// Expected displacement `<v> t + sum sigma (h c / 4 pi W) A sin(omega t + phi)`.
    ///
    /// The oscillatory part is not re-referenced: at `t = 0` it equals
    /// `sum sigma (h c / 4 pi W) A sin(phi)`.
    pub fn expected_position_series(&self, axis: Axis, times: &[f64]) -> Result<Vec<f64>> {
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(ZbwError::domain("times must be sorted ascending"));
        }
        let drift = self.mean_velocity(axis);
        let beats = self.beats(axis);
        let c = self.consts.c;
        Ok(times
            .par_iter()
            .map(|&t| {
                drift * t
                    + self
                        .cells
                        .iter()
                        .zip(&beats)
                        .map(|(cell, beat)| cell.sigma * beat.displacement(t, c))
                        .sum::<f64>()
            })
            .collect())
    }
}
