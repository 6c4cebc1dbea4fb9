//! Fourier tables and Toeplitz cross-section profiles of the shear field.
//!
//! Conventions: `mu(x) = sum_g hat(g) exp(2 pi i g . x)` with
//! `hat(g) = int mu(x) exp(-2 pi i g . x) dx` over the unit cell. Shapes
//! centered at `(1/2, 1/2)` carry their `(-1)^(g1+g2)` centering phases; the
//! table matches the raw quadrature convention bit for bit.
//!
//! Coefficients are analytic (products of interval transforms) for every
//! variant except circles, whose radial factor is reduced to a smooth 1D
//! integral and evaluated by adaptive quadrature instead of pulling in a
//! Bessel-function dependency.

use alloc::vec::Vec;
use core::f64::consts::PI;
use thiserror::Error;

use crate::cell::{CellField, CellGeometry, StepProfile};
use crate::quad;
use crate::{C64, CMatrix};

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FourierError {
    #[error("window must be nonnegative, got {0}")]
    NegativeWindow(i32),
    #[error("truncation order must be nonnegative, got {0}")]
    NegativeOrder(i32),
    #[error("circle step count must be positive")]
    ZeroSteps,
    #[error("cross-section block is not positive definite")]
    NotPositiveDefinite,
    #[error("quadrature for a circle coefficient did not converge")]
    QuadratureFailed,
}

/// Table of 2D Fourier coefficients `hat(g)` on the window `|g_i| <= G`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierTable2D {
    window: i32,
    coeffs: Vec<C64>,
}

impl FourierTable2D {
    pub fn window(&self) -> i32 {
        self.window
    }

    /// Coefficient at `g = (g1, g2)`. Panics outside the window.
    pub fn get(&self, g1: i32, g2: i32) -> C64 {
        assert!(
            g1.abs() <= self.window && g2.abs() <= self.window,
            "index ({g1},{g2}) outside window {}",
            self.window
        );
        let side = (2 * self.window + 1) as usize;
        self.coeffs[(g1 + self.window) as usize * side + (g2 + self.window) as usize]
    }

    /// The mean `hat(0)`.
    pub fn zero_mode(&self) -> C64 {
        self.get(0, 0)
    }
}

/// `int_a^b exp(-2 pi i n x) dx`.
fn interval_hat(a: f64, b: f64, n: i32) -> C64 {
    if n == 0 {
        return C64::new(b - a, 0.0);
    }
    let w = 2.0 * PI * n as f64;
    (C64::from_polar(1.0, -w * a) - C64::from_polar(1.0, -w * b)) / C64::new(0.0, w)
}

/// Transform of the width-`w` interval centered at `1/2`; real by symmetry:
/// `w sinc(pi n w) (-1)^n`.
fn centered_interval_hat(width: f64, n: i32) -> f64 {
    if n == 0 {
        width
    } else {
        let s = sinc(PI * n as f64 * width);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        width * s * sign
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Transform of the radius-`r` disk at the origin, as a function of `|g|`.
/// Reduced to `2 r^2 int cos^2(t) cos(2 pi |g| r sin t) dt` over a half turn,
/// which is smooth and cheap to integrate adaptively.
fn disk_hat(r: f64, g_norm: f64) -> Result<f64, FourierError> {
    if g_norm == 0.0 {
        return Ok(PI * r * r);
    }
    let f = |t: f64| {
        let c = t.cos();
        C64::new(c * c * (2.0 * PI * g_norm * r * t.sin()).cos(), 0.0)
    };
    let v = quad::integrate(&f, -0.5 * PI, 0.5 * PI, &[], 1e-14, 1e-13)
        .map_err(|_| FourierError::QuadratureFailed)?;
    Ok(2.0 * r * r * v.re)
}

/// 2D Fourier table of the field's shear modulus on `|g_i| <= window`.
pub fn fourier2d(field: &CellField, window: i32) -> Result<FourierTable2D, FourierError> {
    if window < 0 {
        return Err(FourierError::NegativeWindow(window));
    }
    let side = (2 * window + 1) as usize;
    let mut coeffs = alloc::vec![C64::new(0.0, 0.0); side * side];
    let mut set = |g1: i32, g2: i32, v: C64| {
        coeffs[(g1 + window) as usize * side + (g2 + window) as usize] = v;
    };

    match field.geometry() {
        CellGeometry::Laminate { cuts, phases } => {
            let n = phases.len();
            for g1 in -window..=window {
                let mut acc = C64::new(0.0, 0.0);
                let mut prev = 0.0;
                for i in 0..n {
                    let end = if i == n - 1 { 1.0 } else { cuts[i] };
                    acc += field.phases()[phases[i]].shear_modulus()
                        * interval_hat(prev, end, g1);
                    prev = end;
                }
                set(g1, 0, acc);
            }
        }
        CellGeometry::NestedSquares { matrix_phase, shapes } => {
            let mu_mat = field.phases()[*matrix_phase].shear_modulus();
            for g1 in -window..=window {
                for g2 in -window..=window {
                    let mut v = if g1 == 0 && g2 == 0 { mu_mat } else { 0.0 };
                    let mut outer_mu = mu_mat;
                    for s in shapes {
                        let mu = field.phases()[s.phase].shear_modulus();
                        v += (mu - outer_mu)
                            * centered_interval_hat(s.size, g1)
                            * centered_interval_hat(s.size, g2);
                        outer_mu = mu;
                    }
                    set(g1, g2, C64::new(v, 0.0));
                }
            }
        }
        CellGeometry::NestedCircles { matrix_phase, shapes } => {
            let mu_mat = field.phases()[*matrix_phase].shear_modulus();
            for g1 in -window..=window {
                for g2 in 0..=window {
                    // hat depends on |g| only, up to the centering sign
                    let g_norm = ((g1 * g1 + g2 * g2) as f64).sqrt();
                    let mut v = if g1 == 0 && g2 == 0 { mu_mat } else { 0.0 };
                    let sign = if (g1 + g2) % 2 == 0 { 1.0 } else { -1.0 };
                    let mut outer_mu = mu_mat;
                    for s in shapes {
                        let mu = field.phases()[s.phase].shear_modulus();
                        v += (mu - outer_mu) * sign * disk_hat(s.size, g_norm)?;
                        outer_mu = mu;
                    }
                    set(g1, g2, C64::new(v, 0.0));
                    set(-g1, -g2, C64::new(v, 0.0));
                }
            }
        }
        CellGeometry::SeparableProduct { factor, .. } => {
            let hat1d: Vec<C64> = (-window..=window).map(|n| profile_hat(factor, n)).collect();
            for g1 in -window..=window {
                for g2 in -window..=window {
                    let v = hat1d[(g1 + window) as usize] * hat1d[(g2 + window) as usize];
                    set(g1, g2, v);
                }
            }
        }
        CellGeometry::Raster { size, cells } => {
            let m = *size;
            // per-axis interval transforms, then an O(M^2) sum per coefficient
            let axis: Vec<Vec<C64>> = (-window..=window)
                .map(|n| {
                    (0..m)
                        .map(|i| interval_hat(i as f64 / m as f64, (i + 1) as f64 / m as f64, n))
                        .collect()
                })
                .collect();
            for g1 in -window..=window {
                for g2 in -window..=window {
                    let mut v = C64::new(0.0, 0.0);
                    for ix in 0..m {
                        for iy in 0..m {
                            let mu = field.phases()[cells[ix * m + iy]].shear_modulus();
                            v += mu
                                * axis[(g1 + window) as usize][ix]
                                * axis[(g2 + window) as usize][iy];
                        }
                    }
                    set(g1, g2, v);
                }
            }
        }
    }

    Ok(FourierTable2D { window, coeffs })
}

fn profile_hat(profile: &StepProfile, n: i32) -> C64 {
    profile
        .pieces()
        .map(|(a, b, v)| v * interval_hat(a, b, n))
        .sum()
}

/// One piece of the cross-section operator: the Hermitian Toeplitz matrix of
/// `x2`-Fourier coefficients of `mu(x1, .)`, constant over `[start, end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSegment {
    pub start: f64,
    pub end: f64,
    pub matrix: CMatrix,
}

/// `x1 -> hat_mu_N(x1)`: the truncated Toeplitz cross-section operator,
/// represented piecewise in `x1`. Exact segments for laminates, squares,
/// separable products, and rasters; equal midpoint-sampled steps for circles
/// (each step's matrix is exact at its midpoint).
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzProfile {
    n: i32,
    segments: Vec<ProfileSegment>,
    stepped: bool,
}

impl ToeplitzProfile {
    pub fn order(&self) -> i32 {
        self.n
    }

    pub fn segments(&self) -> &[ProfileSegment] {
        &self.segments
    }

    /// True when the `x1` dependence was discretized into equal steps.
    pub fn is_stepped(&self) -> bool {
        self.stepped
    }
}

/// Exact 1D cross-section coefficients `hat_mu_n(x1)` for `|n| <= max_n`,
/// indexed `n + max_n`.
pub(crate) fn cross_section_coeffs(field: &CellField, x1: f64, max_n: i32) -> Vec<C64> {
    let len = (2 * max_n + 1) as usize;
    let mut out = alloc::vec![C64::new(0.0, 0.0); len];
    let d = (x1 - 0.5).abs();
    match field.geometry() {
        CellGeometry::Laminate { .. } => {
            out[max_n as usize] = C64::new(field.evaluate(x1, 0.0).0, 0.0);
        }
        CellGeometry::NestedSquares { matrix_phase, shapes } => {
            let mu_mat = field.phases()[*matrix_phase].shear_modulus();
            for n in -max_n..=max_n {
                let mut v = if n == 0 { mu_mat } else { 0.0 };
                let mut outer_mu = mu_mat;
                for s in shapes.iter().filter(|s| s.size / 2.0 > d) {
                    let mu = field.phases()[s.phase].shear_modulus();
                    v += (mu - outer_mu) * centered_interval_hat(s.size, n);
                    outer_mu = mu;
                }
                out[(n + max_n) as usize] = C64::new(v, 0.0);
            }
        }
        CellGeometry::NestedCircles { matrix_phase, shapes } => {
            let mu_mat = field.phases()[*matrix_phase].shear_modulus();
            for n in -max_n..=max_n {
                let mut v = if n == 0 { mu_mat } else { 0.0 };
                let mut outer_mu = mu_mat;
                for s in shapes.iter().filter(|s| s.size > d) {
                    let mu = field.phases()[s.phase].shear_modulus();
                    let width = 2.0 * (s.size * s.size - d * d).sqrt();
                    v += (mu - outer_mu) * centered_interval_hat(width, n);
                    outer_mu = mu;
                }
                out[(n + max_n) as usize] = C64::new(v, 0.0);
            }
        }
        CellGeometry::SeparableProduct { factor, .. } => {
            let g1 = factor.value_at(x1);
            for n in -max_n..=max_n {
                out[(n + max_n) as usize] = g1 * profile_hat(factor, n);
            }
        }
        CellGeometry::Raster { size, cells } => {
            let m = *size;
            let ix = ((x1 * m as f64) as usize).min(m - 1);
            for n in -max_n..=max_n {
                let mut v = C64::new(0.0, 0.0);
                for iy in 0..m {
                    v += field.phases()[cells[ix * m + iy]].shear_modulus()
                        * interval_hat(iy as f64 / m as f64, (iy + 1) as f64 / m as f64, n);
                }
                out[(n + max_n) as usize] = v;
            }
        }
    }
    out
}

fn toeplitz_from_coeffs(coeffs: &[C64], n: i32) -> CMatrix {
    let dim = (2 * n + 1) as usize;
    CMatrix::from_fn(dim, dim, |r, c| coeffs[(r as i32 - c as i32 + 2 * n) as usize])
}

/// Cross-section profile of the field at truncation order `N`. For circles,
/// `circle_steps` equal steps discretize the `x1` dependence; the parameter
/// is ignored for the exactly piecewise variants.
pub fn cross_section_profile(
    field: &CellField,
    n: i32,
    circle_steps: usize,
) -> Result<ToeplitzProfile, FourierError> {
    if n < 0 {
        return Err(FourierError::NegativeOrder(n));
    }
    let stepped = matches!(field.geometry(), CellGeometry::NestedCircles { .. });
    let edges: Vec<f64> = if stepped {
        if circle_steps == 0 {
            return Err(FourierError::ZeroSteps);
        }
        // steps never straddle a circle edge, and within each region they are
        // cosine-graded: the chord width varies like sqrt(distance) at the
        // edges, and clustering restores clean second-order convergence of
        // the stepped monodromy
        let mut regions = field.geometry().x1_breakpoints();
        regions.insert(0, 0.0);
        regions.push(1.0);
        let mut edges = alloc::vec![0.0];
        for w in regions.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let k = (((b - a) * circle_steps as f64).ceil() as usize).max(2);
            for j in 1..=k {
                if j == k {
                    edges.push(b);
                } else {
                    let t = j as f64 / k as f64;
                    let s = 0.5 * (1.0 - (core::f64::consts::PI * t).cos());
                    edges.push(a + (b - a) * s);
                }
            }
        }
        edges
    } else {
        let mut e = field.geometry().x1_breakpoints();
        e.insert(0, 0.0);
        e.push(1.0);
        e
    };
    let segments = edges
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let coeffs = cross_section_coeffs(field, mid, 2 * n);
            ProfileSegment { start: w[0], end: w[1], matrix: toeplitz_from_coeffs(&coeffs, n) }
        })
        .collect();
    Ok(ToeplitzProfile { n, segments, stepped })
}

/// Inverse of a Hermitian positive definite Toeplitz block.
pub fn toeplitz_inverse(block: &CMatrix) -> Result<CMatrix, FourierError> {
    let ch = nalgebra::Cholesky::new(block.clone()).ok_or(FourierError::NotPositiveDefinite)?;
    // the complex factorization completes on indefinite Hermitian input by
    // taking complex square roots; a genuine Cholesky factor has a real
    // positive diagonal
    let l = ch.l_dirty();
    for i in 0..l.nrows() {
        let d = l[(i, i)];
        if !(d.re > 0.0 && d.re.is_finite() && d.im.abs() <= 1e-12 * d.re) {
            return Err(FourierError::NotPositiveDefinite);
        }
    }
    Ok(ch.inverse())
}
