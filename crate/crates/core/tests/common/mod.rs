//! Independent numerical oracles shared by the integration and acceptance
//! suites. Nothing here calls into the code paths it is used to check.

#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn gl_panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rule: &[(f64, f64)]) -> f64 {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    r * rule.iter().map(|&(x, w)| w * f(m + r * x)).sum::<f64>()
}

fn adapt(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    rule: &[(f64, f64)],
) -> f64 {
    let m = 0.5 * (a + b);
    let left = gl_panel(f, a, m, rule);
    let right = gl_panel(f, m, b, rule);
    if depth == 0 || (left + right - whole).abs() <= tol {
        return left + right;
    }
    adapt(f, a, m, left, tol / 2.0, depth - 1, rule)
        + adapt(f, m, b, right, tol / 2.0, depth - 1, rule)
}

/// Adaptive 10-point Gauss-Legendre quadrature to absolute tolerance `tol`.
/// Nodes are interior, so integrable endpoint singularities are never hit.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let rule = gauss_legendre(10);
    let whole = gl_panel(&f, a, b, &rule);
    adapt(&f, a, b, whole, tol, 40, &rule)
}

/// Least-squares fit of `y = k0 + p cos(w t) + q sin(w t)`; returns (k0, p, q).
pub fn fit_cosine(times: &[f64], ys: &[f64], omega: f64) -> (f64, f64, f64) {
    let basis = |t: f64| [1.0, (omega * t).cos(), (omega * t).sin()];
    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for (&t, &y) in times.iter().zip(ys) {
        let b = basis(t);
        for i in 0..3 {
            aty[i] += b[i] * y;
            for j in 0..3 {
                ata[i][j] += b[i] * b[j];
            }
        }
    }
    let x = solve3(ata, aty);
    (x[0], x[1], x[2])
}

fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, piv);
        v.swap(col, piv);
        for r in col + 1..3 {
            let f = m[r][col] / m[col][col];
            for c in col..3 {
                m[r][c] -= f * m[col][c];
            }
            v[r] -= f * v[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| m[r][c] * x[c]).sum();
        x[r] = (v[r] - s) / m[r][r];
    }
    x
}

/// Dirac-Pauli alpha matrices written out entry by entry.
pub fn alpha_explicit(axis: usize) -> [[Complex64; 4]; 4] {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match axis {
        0 => [
            [z, z, z, one],
            [z, z, one, z],
            [z, one, z, z],
            [one, z, z, z],
        ],
        1 => [[z, z, z, -i], [z, z, i, z], [z, -i, z, z], [i, z, z, z]],
        _ => [
            [z, z, one, z],
            [z, z, z, -one],
            [one, z, z, z],
            [z, -one, z, z],
        ],
    }
}

/// `-c sum_k [a_k^* (alpha b)_k e^{-i w t} + b_k^* (alpha a)_k e^{+i w t}]`.
pub fn beat_velocity_oracle(
    a: &[Complex64; 4],
    b: &[Complex64; 4],
    axis: usize,
    omega: f64,
    c: f64,
    t: f64,
) -> f64 {
    let m = alpha_explicit(axis);
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..4 {
        let mut ab = Complex64::new(0.0, 0.0);
        let mut ba = Complex64::new(0.0, 0.0);
        for l in 0..4 {
            ab += m[k][l] * b[l];
            ba += m[k][l] * a[l];
        }
        total += a[k].conj() * ab * Complex64::new(0.0, -omega * t).exp()
            + b[k].conj() * ba * Complex64::new(0.0, omega * t).exp();
    }
    -c * total.re
}

/// Probability mass of the arcsine law on `[-L, L]` falling in `[lo, hi]`,
/// from its closed-form CDF `1/2 + asin(x/L)/pi`.
pub fn arcsine_mass(lo: f64, hi: f64, half_width: f64) -> f64 {
    let cdf = |x: f64| 0.5 + (x / half_width).clamp(-1.0, 1.0).asin() / PI;
    cdf(hi) - cdf(lo)
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}
