//! Electrostatic self-energy: the analytic spherical shell and a pairwise
//! Coulomb sum over grid cells.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::density::DensityGrid;
use crate::error::{Result, ZbwError};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelfEnergyMethod {
    Analytic,
    Pairwise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfEnergyReport {
    /// Energy (erg).
    pub w: f64,
    pub w_ev: f64,
    pub method: SelfEnergyMethod,
    pub n_cells: usize,
    /// Grid spacing (cm); 0 for the analytic case.
    pub spacing: f64,
    /// Fewer than two occupied cells: the excluded self-cell term is all
    /// there is, so `w` carries no information.
    pub resolution_limited: bool,
}

/// `q^2 / (2 r0)`: a charge spread over a spherical surface of radius `r0`.
pub fn shell_self_energy(r0: f64, q: f64) -> Result<f64> {
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(ZbwError::domain(format!("r0 > 0 required, got {r0}")));
    }
    Ok(q * q / (2.0 * r0))
}

pub fn shell_report(r0: f64, q: f64, consts: &PhysicalConstants) -> Result<SelfEnergyReport> {
    let w = shell_self_energy(r0, q)?;
    Ok(SelfEnergyReport {
        w,
        w_ev: consts.erg_to_ev(w),
        method: SelfEnergyMethod::Analytic,
        n_cells: 0,
        spacing: 0.0,
        resolution_limited: false,
    })
}

const ROW_BLOCK: usize = 256;

/// `sum_{i<j} q_i q_j / |r_i - r_j|`.
///
/// Rows are summed in fixed blocks with a fixed inner order and the block
/// sums are combined in index order, so the result does not depend on the
/// thread count.
pub fn pair_energy(points: &[(Vec3, f64)]) -> f64 {
    let n = points.len();
    let blocks: Vec<f64> = (0..n.div_ceil(ROW_BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut block = 0.0;
            for i in b * ROW_BLOCK..((b + 1) * ROW_BLOCK).min(n) {
                let (ri, qi) = points[i];
                let mut row = 0.0;
                for &(rj, qj) in &points[i + 1..] {
                    let dx = ri[0] - rj[0];
                    let dy = ri[1] - rj[1];
                    let dz = ri[2] - rj[2];
                    row += qj / (dx * dx + dy * dy + dz * dz).sqrt();
                }
                block += qi * row;
            }
            block
        })
        .collect();
    blocks.iter().sum()
}

/// Self-energy of a grid with charges at cell centres. The self-cell term
/// is excluded; see [`convergence_study`] for approaching the continuum.
pub fn pairwise_self_energy(
    grid: &DensityGrid,
    consts: &PhysicalConstants,
) -> Result<SelfEnergyReport> {
    if grid.occupied() == 0 {
        return Err(ZbwError::domain(
            "grid must have at least one occupied cell",
        ));
    }
    let w = pair_energy(&grid.point_charges());
    Ok(SelfEnergyReport {
        w,
        w_ev: consts.erg_to_ev(w),
        method: SelfEnergyMethod::Pairwise,
        n_cells: grid.occupied(),
        spacing: grid.spec().spacing,
        resolution_limited: grid.occupied() < 2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub reports: Vec<SelfEnergyReport>,
    /// `(w_{k+1} - w_k) / w_k` for successive resolutions; NaN where `w_k = 0`.
    pub relative_changes: Vec<f64>,
    pub resolution_limited: bool,
}

/// Evaluates the same physical distribution at each spacing (strictly
/// decreasing) through `generator(spacing)`.
pub fn convergence_study<G>(
    generator: G,
    spacings: &[f64],
    consts: &PhysicalConstants,
) -> Result<ConvergenceStudy>
where
    G: Fn(f64) -> Result<DensityGrid>,
{
    if spacings.len() < 2 {
        return Err(ZbwError::domain("at least two spacings required"));
    }
    if spacings.windows(2).any(|w| !(w[1] < w[0])) || spacings.iter().any(|&h| !(h > 0.0)) {
        return Err(ZbwError::domain(
            "spacings must be positive and strictly decreasing",
        ));
    }
    let reports = spacings
        .iter()
        .map(|&h| pairwise_self_energy(&generator(h)?, consts))
        .collect::<Result<Vec<_>>>()?;
    let relative_changes = reports
        .windows(2)
        .map(|w| {
            if w[0].w == 0.0 {
                f64::NAN
            } else {
                (w[1].w - w[0].w) / w[0].w
            }
        })
        .collect();
    let resolution_limited = reports.iter().any(|r| r.resolution_limited);
    Ok(ConvergenceStudy {
        reports,
        relative_changes,
        resolution_limited,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::density::{shell_surface_grid, GridSpec};

    const K: PhysicalConstants = PhysicalConstants::CGS;

    #[test]
    fn shell_analytic_values() {
        let r_e = K.electron_scales(K.m_e).unwrap().r_classical;
        let w = shell_self_energy(r_e / 2.0, K.e).unwrap();
        assert!(((w - K.rest_energy(K.m_e)) / K.rest_energy(K.m_e)).abs() < 0.01);
        let w1 = shell_self_energy(1e-13, K.e).unwrap();
        // (4.80320e-10)^2 / 2e-13
        assert_relative_eq!(w1, 1.153_536_e-6, max_relative = 1e-6);
        assert_relative_eq!(
            shell_self_energy(1e-12, K.e).unwrap(),
            w1 / 10.0,
            max_relative = 1e-15
        );
        assert!(shell_self_energy(-1.0, K.e).unwrap_err().is_domain());
        assert!(shell_self_energy(0.0, K.e).is_err());
    }

    #[test]
    fn single_pair() {
        let spec = GridSpec::new([4, 1, 1], [0.0; 3], 0.5).unwrap();
        let q = -2.0;
        let cells = BTreeMap::from([([0, 0, 0], q), ([3, 0, 0], q)]);
        let g = DensityGrid::new(spec, cells, 2.0 * q).unwrap();
        let r = pairwise_self_energy(&g, &K).unwrap();
        assert_relative_eq!(r.w, q * q / 1.5, max_relative = 1e-15);
        assert!(!r.resolution_limited);
    }

    #[test]
    fn single_cell_is_resolution_limited() {
        let spec = GridSpec::cube(3, 1.0).unwrap();
        let g = DensityGrid::new(spec, BTreeMap::from([([1, 1, 1], -K.e)]), -K.e).unwrap();
        let r = pairwise_self_energy(&g, &K).unwrap();
        assert_eq!(r.w, 0.0);
        assert!(r.resolution_limited);

        let study = convergence_study(
            |h| {
                let spec = GridSpec::new([1; 3], [-h / 2.0; 3], h)?;
                DensityGrid::new(spec, BTreeMap::from([([0, 0, 0], -K.e)]), -K.e)
            },
            &[1.0, 0.5, 0.25],
            &K,
        )
        .unwrap();
        assert!(study.reports.iter().all(|r| r.w == 0.0));
        assert!(study.resolution_limited);
    }

    #[test]
    fn study_preconditions_and_determinism() {
        let gen = |h: f64| {
            let n = (2.4 / h).ceil() as usize;
            shell_surface_grid(1.0, &GridSpec::cube(n, n as f64 * h / 2.0)?, &K)
        };
        assert!(convergence_study(gen, &[0.2], &K).is_err());
        assert!(convergence_study(gen, &[0.2, 0.3], &K).is_err());
        assert!(convergence_study(gen, &[0.2, 0.2], &K).is_err());
        let a = pairwise_self_energy(&gen(0.2).unwrap(), &K).unwrap();
        let b = pairwise_self_energy(&gen(0.2).unwrap(), &K).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pair_sum_independent_of_threads() {
        let spec = GridSpec::cube(30, 1.0).unwrap();
        let g = shell_surface_grid(0.9, &spec, &K).unwrap();
        let pts = g.point_charges();
        let run = |n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap()
                .install(|| pair_energy(&pts))
        };
        assert_eq!(run(1).to_bits(), run(7).to_bits());
    }

    fn arb_points() -> impl Strategy<Value = Vec<(Vec3, f64)>> {
        proptest::collection::vec(
            (proptest::array::uniform3(-1.0f64..1.0), 0.1f64..1.0),
            2..40,
        )
    }

    fn rotate(p: Vec3, (a, b, c): (f64, f64, f64)) -> Vec3 {
        // z-y-z Euler rotation
        let rz = |p: Vec3, t: f64| {
            [
                t.cos() * p[0] - t.sin() * p[1],
                t.sin() * p[0] + t.cos() * p[1],
                p[2],
            ]
        };
        let ry = |p: Vec3, t: f64| {
            [
                t.cos() * p[0] + t.sin() * p[2],
                p[1],
                -t.sin() * p[0] + t.cos() * p[2],
            ]
        };
        rz(ry(rz(p, a), b), c)
    }

    proptest! {
        #[test]
        fn charge_scaling_is_quadratic(pts in arb_points(), k in 0.1f64..10.0) {
            let w = pair_energy(&pts);
            let scaled: Vec<_> = pts.iter().map(|&(r, q)| (r, q * k)).collect();
            prop_assert!((pair_energy(&scaled) / (w * k * k) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn dilation_divides_energy(pts in arb_points(), k in 0.01f64..100.0) {
            let w = pair_energy(&pts);
            let dilated: Vec<_> = pts.iter().map(|&(r, q)| (crate::vec3::scale(r, k), q)).collect();
            prop_assert!((pair_energy(&dilated) * k / w - 1.0).abs() < 1e-12);
        }

        #[test]
        fn rigid_motion_invariant(
            pts in arb_points(),
            shift in proptest::array::uniform3(-5.0f64..5.0),
            angles in (0.0f64..6.3, 0.0f64..3.2, 0.0f64..6.3),
        ) {
            let w = pair_energy(&pts);
            let moved: Vec<_> = pts
                .iter()
                .map(|&(r, q)| (crate::vec3::add(rotate(r, angles), shift), q))
                .collect();
            prop_assert!((pair_energy(&moved) / w - 1.0).abs() < 1e-10);
        }
    }
}
