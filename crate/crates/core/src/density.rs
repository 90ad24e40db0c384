//! Stationary charge distributions produced by time-marginalising the
//! oscillatory motion.
//!
//! Closed forms cover the two special trajectories. Arbitrary ensembles are
//! handled by Monte Carlo: times are drawn uniformly over one closed period
//! and the positions binned on a regular grid.
//!
//! # Random streams
//!
//! Samples are processed in fixed chunks of [`SAMPLE_CHUNK`]. Chunk `k`
//! draws from ChaCha8 seeded with `seed` on stream `k`. Chunks are
//! independent work items, so the grid does not depend on the number of
//! worker threads.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constants::PhysicalConstants;
use crate::error::{Result, ZbwError};
use crate::kinematics::ModeEnsemble;
use crate::vec3::{self, Vec3};

pub const SAMPLE_CHUNK: u64 = 1 << 16;

pub type CellIndex = [usize; 3];

/// Probability density of the linear oscillation over `s`:
/// `1 / (pi sqrt(3 Lambda^2 - s^2))` on the open interval `|s| < sqrt(3) Lambda`.
pub fn linear_pdf(s: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(ZbwError::domain(format!(
            "Lambda > 0 required, got {lambda}"
        )));
    }
    let half_width = 3f64.sqrt() * lambda;
    let a = s.abs();
    if !(a < half_width) {
        return Err(ZbwError::domain(format!(
            "|s| < sqrt(3)*Lambda required, got |s| = {a:e}, sqrt(3)*Lambda = {half_width:e}"
        )));
    }
    // Factored to keep precision next to the turning points.
    Ok(1.0 / (PI * ((half_width - a) * (half_width + a)).sqrt()))
}

/// Probability per unit path length on the cylinder trajectory:
/// `1 / (2 pi sqrt(2 Lambda^2 - z^2))` for `|z| <= Lambda`.
pub fn cylinder_pdf(z: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(ZbwError::domain(format!(
            "Lambda > 0 required, got {lambda}"
        )));
    }
    if !(z.abs() <= lambda) {
        return Err(ZbwError::domain(format!(
            "|z| <= Lambda required, got |z| = {:e}, Lambda = {lambda:e}",
            z.abs()
        )));
    }
    Ok(1.0 / (2.0 * PI * (2.0 * lambda * lambda - z * z).sqrt()))
}

/// Geometry of a regular grid of cubic cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n: [usize; 3],
    /// Corner of cell `(0, 0, 0)` (cm).
    pub origin: Vec3,
    /// Cell edge (cm).
    pub spacing: f64,
}

impl GridSpec {
    pub fn new(n: [usize; 3], origin: Vec3, spacing: f64) -> Result<GridSpec> {
        if n.contains(&0) {
            return Err(ZbwError::domain("grid needs at least one cell per axis"));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(ZbwError::domain(format!(
                "grid spacing > 0 required, got {spacing}"
            )));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(ZbwError::domain("grid origin must be finite"));
        }
        Ok(GridSpec { n, origin, spacing })
    }

    /// `n^3` cells covering `[-half_extent, half_extent]^3`.
    pub fn cube(n: usize, half_extent: f64) -> Result<GridSpec> {
        if !(half_extent > 0.0) {
            return Err(ZbwError::domain(format!(
                "extent > 0 required, got {half_extent}"
            )));
        }
        GridSpec::new([n; 3], [-half_extent; 3], 2.0 * half_extent / n as f64)
    }

    pub fn upper(&self) -> Vec3 {
        std::array::from_fn(|i| self.origin[i] + self.n[i] as f64 * self.spacing)
    }

    pub fn contains_box(&self, lo: Vec3, hi: Vec3) -> bool {
        let up = self.upper();
        (0..3).all(|i| lo[i] >= self.origin[i] && hi[i] <= up[i])
    }

    /// Cell containing `p`; the upper faces of the grid are closed.
    pub fn cell_of(&self, p: Vec3) -> Option<CellIndex> {
        let mut idx = [0usize; 3];
        for i in 0..3 {
            let u = (p[i] - self.origin[i]) / self.spacing;
            if !(u >= 0.0) {
                return None;
            }
            let k = u.floor() as usize;
            idx[i] = if k < self.n[i] {
                k
            } else if u <= self.n[i] as f64 {
                self.n[i] - 1
            } else {
                return None;
            };
        }
        Some(idx)
    }

    pub fn center(&self, idx: CellIndex) -> Vec3 {
        std::array::from_fn(|i| self.origin[i] + (idx[i] as f64 + 0.5) * self.spacing)
    }

    /// Same cell layout with every length multiplied by `k`.
    pub fn dilated(&self, k: f64) -> GridSpec {
        GridSpec {
            n: self.n,
            origin: vec3::scale(self.origin, k),
            spacing: self.spacing * k,
        }
    }
}

/// Signed charge per occupied cell of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    spec: GridSpec,
    cells: BTreeMap<CellIndex, f64>,
    total_charge: f64,
}

impl DensityGrid {
    /// Checks index bounds, single-species sign and charge conservation.
    pub fn new(
        spec: GridSpec,
        cells: BTreeMap<CellIndex, f64>,
        total_charge: f64,
    ) -> Result<DensityGrid> {
        for (idx, &q) in &cells {
            if (0..3).any(|i| idx[i] >= spec.n[i]) {
                return Err(ZbwError::domain(format!(
                    "cell index {idx:?} outside grid {:?}",
                    spec.n
                )));
            }
            if q == 0.0 || !q.is_finite() || (q > 0.0) != (total_charge > 0.0) {
                return Err(ZbwError::domain(format!(
                    "cell charge {q:e} at {idx:?} does not share the sign of total charge {total_charge:e}"
                )));
            }
        }
        let sum: f64 = cells.values().sum();
        if !cells.is_empty() && ((sum - total_charge) / total_charge).abs() > 1e-9 {
            return Err(ZbwError::domain(format!(
                "cell charges sum to {sum:e}, expected total charge {total_charge:e}"
            )));
        }
        Ok(DensityGrid {
            spec,
            cells,
            total_charge,
        })
    }

    /// Distributes `total_charge` over cells in proportion to hit counts.
    pub fn from_counts(
        spec: GridSpec,
        counts: BTreeMap<CellIndex, u64>,
        total_charge: f64,
    ) -> Result<DensityGrid> {
        let n: u64 = counts.values().sum();
        if n == 0 {
            return Err(ZbwError::domain("no samples to deposit"));
        }
        let per_hit = total_charge / n as f64;
        let cells = counts
            .into_iter()
            .filter(|&(_, k)| k > 0)
            .map(|(idx, k)| (idx, k as f64 * per_hit))
            .collect();
        DensityGrid::new(spec, cells, total_charge)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn total_charge(&self) -> f64 {
        self.total_charge
    }

    pub fn occupied(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> impl Iterator<Item = (CellIndex, f64)> + '_ {
        self.cells.iter().map(|(&idx, &q)| (idx, q))
    }

    pub fn charge_sum(&self) -> f64 {
        self.cells.values().sum()
    }

    /// Cell centers and charges, in index order.
    pub fn point_charges(&self) -> Vec<(Vec3, f64)> {
        self.cells()
            .map(|(idx, q)| (self.spec.center(idx), q))
            .collect()
    }

    /// Monopole moment `sum q`.
    pub fn monopole(&self) -> f64 {
        self.charge_sum()
    }

    /// Dipole moment `sum q r` about the coordinate origin.
    pub fn dipole(&self) -> Vec3 {
        self.cells().fold([0.0; 3], |acc, (idx, q)| {
            vec3::add(acc, vec3::scale(self.spec.center(idx), q))
        })
    }

    /// Every length multiplied by `k`; charges untouched.
    pub fn dilated(&self, k: f64) -> DensityGrid {
        DensityGrid {
            spec: self.spec.dilated(k),
            cells: self.cells.clone(),
            total_charge: self.total_charge,
        }
    }

    /// Every charge multiplied by `k`.
    pub fn charge_scaled(&self, k: f64) -> Result<DensityGrid> {
        DensityGrid::new(
            self.spec,
            self.cells.iter().map(|(&i, &q)| (i, q * k)).collect(),
            self.total_charge * k,
        )
    }

    /// Fraction of the total charge in each slab of width `spacing` along the
    /// given axis (index 0, 1 or 2).
    pub fn project(&self, axis: usize) -> Vec<f64> {
        let mut bins = vec![0.0; self.spec.n[axis]];
        for (idx, q) in self.cells() {
            bins[idx[axis]] += q / self.total_charge;
        }
        bins
    }

    /// Cellwise sum of two grids on the same layout with the same sign.
    pub fn merged(&self, other: &DensityGrid) -> Result<DensityGrid> {
        if self.spec != other.spec {
            return Err(ZbwError::domain(
                "cannot merge grids with different layouts",
            ));
        }
        let mut cells = self.cells.clone();
        for (idx, q) in other.cells() {
            *cells.entry(idx).or_insert(0.0) += q;
        }
        DensityGrid::new(self.spec, cells, self.total_charge + other.total_charge)
    }
}

fn count_chunk(
    ensemble: &ModeEnsemble,
    spec: &GridSpec,
    seed: u64,
    chunk: u64,
    len: u64,
) -> (HashMap<CellIndex, u64>, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let lambda_unit = ensemble.lambda_unit();
    let mut counts = HashMap::new();
    let mut escaped = 0;
    for _ in 0..len {
        // t = u T_Z / 2, so the beat phase 4 pi t / T_Z is 2 pi u.
        let u: f64 = rng.random();
        let p = vec3::scale(ensemble.unit_position_at_phase(2.0 * PI * u), lambda_unit);
        match spec.cell_of(p) {
            Some(idx) => *counts.entry(idx).or_insert(0) += 1,
            None => escaped += 1,
        }
    }
    (counts, escaped)
}

/// Hit counts of `n_samples` positions drawn at uniform times over one closed
/// period `T_Z / 2`.
pub fn sample_counts(
    ensemble: &ModeEnsemble,
    n_samples: u64,
    spec: &GridSpec,
    seed: u64,
) -> Result<BTreeMap<CellIndex, u64>> {
    if n_samples == 0 {
        return Err(ZbwError::domain("n_samples >= 1 required"));
    }
    let chunks = n_samples.div_ceil(SAMPLE_CHUNK);
    let parts: Vec<_> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let len = SAMPLE_CHUNK.min(n_samples - k * SAMPLE_CHUNK);
            count_chunk(ensemble, spec, seed, k, len)
        })
        .collect();
    let mut counts = BTreeMap::new();
    let mut escaped = 0;
    for (part, esc) in parts {
        escaped += esc;
        for (idx, k) in part {
            *counts.entry(idx).or_insert(0) += k;
        }
    }
    if escaped > 0 {
        return Err(ZbwError::SamplesEscaped {
            escaped,
            total: n_samples,
            fraction: escaped as f64 / n_samples as f64,
        });
    }
    Ok(counts)
}

/// Time-marginal charge distribution of an electron (total charge `-e`).
pub fn sample_time_marginal(
    ensemble: &ModeEnsemble,
    n_samples: u64,
    spec: &GridSpec,
    seed: u64,
    consts: &PhysicalConstants,
) -> Result<DensityGrid> {
    let counts = sample_counts(ensemble, n_samples, spec, seed)?;
    DensityGrid::from_counts(*spec, counts, -consts.e)
}

/// Charge `-e` spread uniformly over a sphere of radius `r0` centred on the
/// coordinate origin.
///
/// The surface is tiled by an equal-area `(z, phi)` lattice (area element
/// `r0 dz dphi`) about eight points per cell edge, and each lattice point
/// deposits an equal share into the cell that contains it.
pub fn shell_surface_grid(
    r0: f64,
    spec: &GridSpec,
    consts: &PhysicalConstants,
) -> Result<DensityGrid> {
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(ZbwError::domain(format!("r0 > 0 required, got {r0}")));
    }
    if !spec.contains_box([-r0; 3], [r0; 3]) {
        return Err(ZbwError::domain(format!(
            "sphere of radius r0 = {r0:e} must be contained in the grid"
        )));
    }
    const POINTS_PER_EDGE: f64 = 8.0;
    let step = spec.spacing / POINTS_PER_EDGE;
    let n_z = ((2.0 * r0 / step).ceil() as usize).max(16);
    let mut n_phi = ((2.0 * PI * r0 / step).ceil() as usize).max(16);
    n_phi += n_phi % 2;

    let parts: Vec<HashMap<CellIndex, u64>> = (0..n_z)
        .into_par_iter()
        .map(|i| {
            let z = r0 * (-1.0 + (2.0 * i as f64 + 1.0) / n_z as f64);
            let rho = (r0 * r0 - z * z).max(0.0).sqrt();
            let mut counts = HashMap::new();
            for j in 0..n_phi {
                let phi = 2.0 * PI * (j as f64 + 0.5) / n_phi as f64;
                let p = [rho * phi.cos(), rho * phi.sin(), z];
                // Containment was checked above; the closed upper face covers p = r0.
                if let Some(idx) = spec.cell_of(p) {
                    *counts.entry(idx).or_insert(0) += 1;
                }
            }
            counts
        })
        .collect();
    let mut counts = BTreeMap::new();
    for part in parts {
        for (idx, k) in part {
            *counts.entry(idx).or_insert(0) += k;
        }
    }
    DensityGrid::from_counts(*spec, counts, -consts.e)
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::kinematics::OscillationMode;

    const K: PhysicalConstants = PhysicalConstants::CGS;

    #[test]
    fn linear_pdf_values() {
        let l = 2.0;
        assert_relative_eq!(
            linear_pdf(0.0, l).unwrap(),
            1.0 / (PI * 3f64.sqrt() * l),
            max_relative = 1e-15
        );
        let edge = 3f64.sqrt() * l * (1.0 - 1e-12);
        let v = linear_pdf(edge, l).unwrap();
        assert!(v.is_finite() && v > 1e4);
        assert!(linear_pdf(3f64.sqrt() * l, l).unwrap_err().is_domain());
        assert!(linear_pdf(0.0, 0.0).is_err());
    }

    #[test]
    fn cylinder_pdf_values() {
        let l = 0.5;
        assert_relative_eq!(
            cylinder_pdf(0.0, l).unwrap(),
            1.0 / (2.0 * PI * 2f64.sqrt() * l),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            cylinder_pdf(l, l).unwrap(),
            1.0 / (2.0 * PI * l),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            cylinder_pdf(-l, l).unwrap(),
            1.0 / (2.0 * PI * l),
            max_relative = 1e-15
        );
        assert!(cylinder_pdf(1.0001 * l, l).is_err());
    }

    #[test]
    fn cell_lookup_closed_upper_face() {
        let g = GridSpec::cube(4, 1.0).unwrap();
        assert_eq!(g.cell_of([1.0, 1.0, 1.0]), Some([3, 3, 3]));
        assert_eq!(g.cell_of([-1.0, -1.0, -1.0]), Some([0, 0, 0]));
        assert_eq!(g.cell_of([1.0 + 1e-9, 0.0, 0.0]), None);
        assert_eq!(g.cell_of([0.1, -0.6, 0.0]), Some([2, 0, 2]));
        assert_eq!(g.center([0, 0, 0]), [-0.75; 3]);
    }

    #[test]
    fn single_sample_single_cell() {
        let ens =
            ModeEnsemble::for_mass(vec![OscillationMode::cylinder(1.0, 1.0)], K.m_e, &K).unwrap();
        let spec = GridSpec::cube(16, 2.0 * ens.effective_lambda()).unwrap();
        for seed in [0, 1, 99] {
            let g = sample_time_marginal(&ens, 1, &spec, seed, &K).unwrap();
            assert_eq!(g.occupied(), 1);
            assert_eq!(g.cells().next().unwrap().1, -K.e);
        }
    }

    #[test]
    fn escaped_samples_reported() {
        let ens =
            ModeEnsemble::for_mass(vec![OscillationMode::linear_diagonal(1.0, 1.0)], K.m_e, &K)
                .unwrap();
        let spec = GridSpec::cube(8, 0.5 * ens.effective_lambda()).unwrap();
        match sample_time_marginal(&ens, 10_000, &spec, 1, &K) {
            Err(ZbwError::SamplesEscaped { fraction, .. }) => {
                // arcsine law: P(|sin| > 1/2) = 2/3
                assert!((fraction - 2.0 / 3.0).abs() < 0.02, "{fraction}");
            }
            other => panic!("expected escape error, got {other:?}"),
        }
        assert!(sample_time_marginal(&ens, 0, &spec, 1, &K).is_err());
    }

    #[test]
    fn cylinder_mode_occupies_surface_cells() {
        let ens =
            ModeEnsemble::for_mass(vec![OscillationMode::cylinder(1.0, 1.0)], K.m_e, &K).unwrap();
        let lambda = ens.effective_lambda();
        let spec = GridSpec::cube(40, 3f64.sqrt() * lambda).unwrap();
        let g = sample_time_marginal(&ens, 200_000, &spec, 4, &K).unwrap();
        for (idx, _) in g.cells() {
            let c = spec.center(idx);
            let rho = (c[0] * c[0] + c[1] * c[1]).sqrt();
            assert!((rho - lambda).abs() < spec.spacing * 3f64.sqrt());
        }
        assert_relative_eq!(g.charge_sum(), -K.e, max_relative = 1e-12);
    }

    #[test]
    fn independent_of_thread_count() {
        let modes = vec![
            OscillationMode::cylinder(0.7, 0.5),
            OscillationMode {
                amplitude: [0.2, 0.5, 0.1],
                phase: [0.3, -1.0, 2.0],
                sigma: 0.5,
            },
        ];
        let ens = ModeEnsemble::for_mass(modes, K.m_e, &K).unwrap();
        let spec = GridSpec::cube(32, 3f64.sqrt() * ens.effective_lambda()).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sample_time_marginal(&ens, 300_000, &spec, 21, &K).unwrap())
        };
        let a = run(1);
        let b = run(5);
        assert_eq!(a, b);
        assert_eq!(
            a,
            sample_time_marginal(&ens, 300_000, &spec, 21, &K).unwrap()
        );
    }

    #[test]
    fn shell_grid_moments_and_support() {
        let r0 = 1e-12;
        let spec = GridSpec::cube(36, 1.05 * r0).unwrap();
        let g = shell_surface_grid(r0, &spec, &K).unwrap();
        assert_relative_eq!(g.monopole(), -K.e, max_relative = 1e-12);
        assert!(vec3::norm(g.dipole()) < 1e-3 * K.e * r0);
        for (idx, _) in g.cells() {
            let d = vec3::norm(spec.center(idx));
            assert!((d - r0).abs() < spec.spacing * 3f64.sqrt());
        }
    }

    #[test]
    fn shell_must_fit() {
        let spec = GridSpec::cube(10, 1.0).unwrap();
        assert!(shell_surface_grid(1.5, &spec, &K).unwrap_err().is_domain());
        assert!(shell_surface_grid(-1.0, &spec, &K).is_err());
    }

    #[test]
    fn grid_rejects_mixed_signs() {
        let spec = GridSpec::cube(2, 1.0).unwrap();
        let cells = BTreeMap::from([([0, 0, 0], -1.0), ([1, 1, 1], 0.5)]);
        assert!(DensityGrid::new(spec, cells, -0.5).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn pdfs_are_even(x in 0.0f64..0.999, l in 1e-13f64..1.0) {
            let s = x * 3f64.sqrt() * l;
            prop_assert_eq!(linear_pdf(s, l).unwrap(), linear_pdf(-s, l).unwrap());
            let z = x * l;
            prop_assert_eq!(cylinder_pdf(z, l).unwrap(), cylinder_pdf(-z, l).unwrap());
        }

        #[test]
        fn sampling_conserves_charge_and_is_deterministic(seed in 0u64..1000, n in 1u64..200_000) {
            let ens = ModeEnsemble::for_mass(
                vec![OscillationMode { amplitude: [0.3, 0.9, 0.5], phase: [1.0, 0.0, -0.4], sigma: 1.0 }],
                K.m_e, &K,
            ).unwrap();
            let spec = GridSpec::cube(24, 3f64.sqrt() * ens.effective_lambda()).unwrap();
            let g = sample_time_marginal(&ens, n, &spec, seed, &K).unwrap();
            prop_assert!(((g.charge_sum() + K.e) / K.e).abs() < 1e-9);
            prop_assert!(g.cells().all(|(_, q)| q < 0.0));
            prop_assert_eq!(g, sample_time_marginal(&ens, n, &spec, seed, &K).unwrap());
        }
    }
}
