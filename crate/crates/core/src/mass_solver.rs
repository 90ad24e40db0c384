//! Trial-mass fixed point `w_Z(mu) = mu c^2`.
//!
//! The physical pipeline builds the charge distribution for a trial mass
//! `mu` (length scale `h / 4 pi mu c`), evaluates its self-energy, and
//! compares it with `mu c^2`. Because every length in the distribution
//! scales as `1/mu` and Coulomb energy scales as inverse length, `w_Z` is
//! homogeneous of degree one in `mu`. The ratio `w_Z / mu c^2` is then a
//! constant and the equation holds either everywhere or nowhere. The solver
//! checks for this before looking for roots.
//!
//! Any [`SelfEnergyFunctional`] can be plugged in, which keeps root finding
//! testable apart from the physics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::density::{sample_time_marginal, shell_surface_grid, DensityGrid, GridSpec};
use crate::electrostatics::pairwise_self_energy;
use crate::error::{Result, ZbwError};
use crate::kinematics::{ModeEnsemble, OscillationMode};

/// Default sampling density of the sign-change scan.
pub const POINTS_PER_DECADE: usize = 64;
/// Number of log-spaced probes used to measure the homogeneity defect.
const HOMOGENEITY_PROBES: usize = 5;
const MAX_BISECTIONS: usize = 400;

/// Self-energy `w(mu)` (erg) as a function of trial mass (g).
pub trait SelfEnergyFunctional {
    fn self_energy(&self, mu: f64) -> Result<f64>;
}

/// Wraps a plain closure.
pub struct FnFunctional<F>(pub F);

impl<F: Fn(f64) -> f64> SelfEnergyFunctional for FnFunctional<F> {
    fn self_energy(&self, mu: f64) -> Result<f64> {
        Ok((self.0)(mu))
    }
}

/// `w(mu) = sum_i coeffs[i] mu^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl SelfEnergyFunctional for Polynomial {
    fn self_energy(&self, mu: f64) -> Result<f64> {
        Ok(self.coeffs.iter().rev().fold(0.0, |acc, &a| acc * mu + a))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryShape {
    /// Time-marginal of a mode superposition, sampled by Monte Carlo.
    Modes(Vec<OscillationMode>),
    /// Idealised spherical shell of radius `sigma_a * h / (4 pi mu c)`.
    Shell { sigma_a: f64 },
}

/// Scale-free description of the charge distribution of a trial mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub shape: GeometryShape,
    /// Grid cells per effective length `Lambda_eff`.
    pub cells_per_lambda: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl GeometrySpec {
    /// Distribution in units where `lambda_unit = 1`. Dilating it by
    /// `h / (4 pi mu c)` gives the distribution of trial mass `mu`.
    pub fn unit_distribution(&self, consts: &PhysicalConstants) -> Result<DensityGrid> {
        if !(self.cells_per_lambda >= 1.0) || !self.cells_per_lambda.is_finite() {
            return Err(ZbwError::domain(format!(
                "cells_per_lambda >= 1 required, got {}",
                self.cells_per_lambda
            )));
        }
        match &self.shape {
            GeometryShape::Modes(modes) => {
                let ensemble = ModeEnsemble::new(modes.clone(), 1.0, consts.c)?;
                let amplitude = ensemble.amplitude_sum();
                if !(amplitude > 0.0) {
                    return Err(ZbwError::domain(
                        "degenerate geometry: all mode amplitudes are zero",
                    ));
                }
                let spacing = amplitude / self.cells_per_lambda;
                let half_cells = (3f64.sqrt() * self.cells_per_lambda).ceil() as usize;
                let spec = GridSpec::new(
                    [2 * half_cells; 3],
                    [-(half_cells as f64) * spacing; 3],
                    spacing,
                )?;
                sample_time_marginal(&ensemble, self.n_samples, &spec, self.seed, consts)
            }
            GeometryShape::Shell { sigma_a } => {
                if !(*sigma_a > 0.0) {
                    return Err(ZbwError::domain(format!(
                        "degenerate geometry: shell sigma*A > 0 required, got {sigma_a}"
                    )));
                }
                let spacing = sigma_a / self.cells_per_lambda;
                let half_cells = self.cells_per_lambda.ceil() as usize + 1;
                let spec = GridSpec::new(
                    [2 * half_cells; 3],
                    [-(half_cells as f64) * spacing; 3],
                    spacing,
                )?;
                shell_surface_grid(*sigma_a, &spec, consts)
            }
        }
    }

    /// Charge distribution for trial mass `mu`.
    pub fn distribution(&self, mu: f64, consts: &PhysicalConstants) -> Result<DensityGrid> {
        Ok(self
            .unit_distribution(consts)?
            .dilated(lambda_unit(mu, consts)?))
    }
}

/// `h / (4 pi mu c)`.
pub fn lambda_unit(mu: f64, consts: &PhysicalConstants) -> Result<f64> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(ZbwError::domain(format!("mu > 0 required, got {mu}")));
    }
    Ok(consts.h / (4.0 * PI * mu * consts.c))
}

/// Self-energy of the trial-mass charge distribution.
pub fn w_z(mu: f64, geometry: &GeometrySpec, consts: &PhysicalConstants) -> Result<f64> {
    Ok(pairwise_self_energy(&geometry.distribution(mu, consts)?, consts)?.w)
}

/// The geometry pipeline as a functional of `mu`.
pub struct GeometryPipeline<'a> {
    pub geometry: &'a GeometrySpec,
    pub consts: &'a PhysicalConstants,
}

impl SelfEnergyFunctional for GeometryPipeline<'_> {
    fn self_energy(&self, mu: f64) -> Result<f64> {
        w_z(mu, self.geometry, self.consts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioProbe {
    pub mu_g: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    /// Mean of `w(mu) / mu c^2` over the probes.
    pub ratio: f64,
    /// `(max - min) / |mean|` over the probes.
    pub spread: f64,
    pub probes: Vec<RatioProbe>,
}

fn ratio_at<F: SelfEnergyFunctional + ?Sized>(
    f: &F,
    mu: f64,
    consts: &PhysicalConstants,
) -> Result<f64> {
    Ok(f.self_energy(mu)? / consts.rest_energy(mu))
}

fn estimate<F: SelfEnergyFunctional + ?Sized>(
    f: &F,
    mus: &[f64],
    consts: &PhysicalConstants,
) -> Result<RatioEstimate> {
    let probes = mus
        .iter()
        .map(|&mu| {
            Ok(RatioProbe {
                mu_g: mu,
                ratio: ratio_at(f, mu, consts)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = probes.iter().map(|p| p.ratio).sum::<f64>() / probes.len() as f64;
    let (lo, hi) = probes
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.ratio), hi.max(p.ratio))
        });
    let spread = if mean == 0.0 {
        if hi == lo {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (hi - lo) / mean.abs()
    };
    Ok(RatioEstimate {
        ratio: mean,
        spread,
        probes,
    })
}

/// `rho = w_Z(mu) / mu c^2` evaluated at `m_e / 10`, `m_e` and `10 m_e`.
pub fn dimensionless_ratio(
    geometry: &GeometrySpec,
    consts: &PhysicalConstants,
) -> Result<RatioEstimate> {
    let pipeline = GeometryPipeline { geometry, consts };
    estimate(
        &pipeline,
        &[consts.m_e / 10.0, consts.m_e, 10.0 * consts.m_e],
        consts,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictKind {
    /// `w / mu c^2` is constant over the range.
    Degenerate,
    Roots,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub mu_g: f64,
    /// `|w(mu) - mu c^2| / mu c^2`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointVerdict {
    pub kind: VerdictKind,
    /// Mean `w / mu c^2` over the homogeneity probes.
    pub ratio: f64,
    pub roots: Vec<Root>,
    pub homogeneity_defect: f64,
    pub probes: Vec<RatioProbe>,
}

impl FixedPointVerdict {
    /// For a degenerate verdict: whether the equation holds for every `mu`.
    pub fn holds_everywhere(&self, tolerance: f64) -> bool {
        self.kind == VerdictKind::Degenerate && (self.ratio - 1.0).abs() < tolerance
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

fn check_range(mu_min: f64, mu_max: f64, tolerance: f64) -> Result<()> {
    if !(mu_min > 0.0 && mu_min < mu_max) || !mu_max.is_finite() {
        return Err(ZbwError::domain(format!(
            "0 < mu_min < mu_max required, got mu_min = {mu_min:e}, mu_max = {mu_max:e}"
        )));
    }
    if !(tolerance > 0.0) {
        return Err(ZbwError::domain(format!(
            "tolerance > 0 required, got {tolerance}"
        )));
    }
    Ok(())
}

/// Solves `w(mu) = mu c^2` on `[mu_min, mu_max]`.
///
/// If the ratio `w / mu c^2` varies by less than `tolerance` across the
/// range, the verdict is degenerate and no roots are searched. Otherwise
/// sign changes of `w / mu c^2 - 1` are located on a log grid with
/// [`POINTS_PER_DECADE`] points per decade and refined by bisection.
pub fn solve_fixed_point<F: SelfEnergyFunctional + ?Sized>(
    functional: &F,
    mu_min: f64,
    mu_max: f64,
    tolerance: f64,
    consts: &PhysicalConstants,
) -> Result<FixedPointVerdict> {
    check_range(mu_min, mu_max, tolerance)?;
    let est = estimate(
        functional,
        &log_grid(mu_min, mu_max, HOMOGENEITY_PROBES),
        consts,
    )?;
    if est.spread < tolerance {
        return Ok(FixedPointVerdict {
            kind: VerdictKind::Degenerate,
            ratio: est.ratio,
            roots: Vec::new(),
            homogeneity_defect: est.spread,
            probes: est.probes,
        });
    }

    let residual = |mu: f64| -> Result<f64> { Ok(ratio_at(functional, mu, consts)? - 1.0) };
    let decades = (mu_max / mu_min).log10();
    let n = ((decades * POINTS_PER_DECADE as f64).ceil() as usize).max(2) + 1;
    let nodes = log_grid(mu_min, mu_max, n);
    let values = nodes
        .iter()
        .map(|&mu| residual(mu))
        .collect::<Result<Vec<_>>>()?;

    let mut roots = Vec::new();
    for i in 0..n {
        if values[i] == 0.0 {
            roots.push(Root {
                mu_g: nodes[i],
                residual: 0.0,
            });
            continue;
        }
        if i + 1 < n && values[i + 1] != 0.0 && (values[i] < 0.0) != (values[i + 1] < 0.0) {
            let (mu, r) = bisect(&residual, nodes[i], nodes[i + 1], values[i], values[i + 1])?;
            // A sign change without a small residual is a pole, not a root.
            if r < tolerance {
                roots.push(Root {
                    mu_g: mu,
                    residual: r,
                });
            }
        }
    }
    let kind = if roots.is_empty() {
        VerdictKind::None
    } else {
        VerdictKind::Roots
    };
    Ok(FixedPointVerdict {
        kind,
        ratio: est.ratio,
        roots,
        homogeneity_defect: est.spread,
        probes: est.probes,
    })
}

/// Bisects to adjacent floats and returns the bracket end with the smaller
/// residual, so steep roots still meet a tight residual bound.
fn bisect<G: Fn(f64) -> Result<f64>>(
    g: &G,
    mut lo: f64,
    mut hi: f64,
    mut g_lo: f64,
    mut g_hi: f64,
) -> Result<(f64, f64)> {
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid)?;
        if g_mid == 0.0 {
            return Ok((mid, 0.0));
        }
        if (g_mid < 0.0) == (g_lo < 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
    }
    Ok(if g_lo.abs() <= g_hi.abs() {
        (lo, g_lo.abs())
    } else {
        (hi, g_hi.abs())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlavourScan {
    /// Ascending.
    pub roots: Vec<Root>,
    pub degeneracy_note: Option<String>,
}

/// All bracketed solutions in the range, e.g. candidate heavier flavours.
pub fn flavour_scan<F: SelfEnergyFunctional + ?Sized>(
    functional: &F,
    mu_min: f64,
    mu_max: f64,
    tolerance: f64,
    consts: &PhysicalConstants,
) -> Result<FlavourScan> {
    let verdict = solve_fixed_point(functional, mu_min, mu_max, tolerance, consts)?;
    let degeneracy_note = (verdict.kind == VerdictKind::Degenerate).then(|| {
        format!(
            "w/(mu c^2) is constant ({:.6e}, defect {:.2e}): the equation holds for {} mu",
            verdict.ratio,
            verdict.homogeneity_defect,
            if verdict.holds_everywhere(tolerance) {
                "every"
            } else {
                "no"
            }
        )
    });
    let mut roots = verdict.roots;
    roots.sort_by(|a, b| a.mu_g.total_cmp(&b.mu_g));
    Ok(FlavourScan {
        roots,
        degeneracy_note,
    })
}
