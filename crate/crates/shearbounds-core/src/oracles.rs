//! Independent reference computations used by the test suites: the separable
//! closed form, the laminate speed formula, a small-wavenumber eigenvalue
//! limit, and raw quadrature of the pointwise field.
//!
//! Everything here deliberately avoids the analytic coefficient formulas of
//! [`crate::fourier`] and the bound machinery of [`crate::pwe`] and
//! [`crate::mm`]; agreement between the two routes is what the tests check.

use alloc::vec::Vec;
use core::f64::consts::PI;
use thiserror::Error;

use crate::cell::{CellField, StepProfile};
use crate::fourier::{self, FourierError};
use crate::quad;
use crate::{C64, CMatrix};

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("separable factor must be even about the cell center")]
    NotEven,
    #[error("propagation direction must be a unit vector")]
    NotUnit,
    #[error("need at least two distinct wavenumbers in (0, 0.1]")]
    BadWavenumbers,
    #[error("eigenvalue iteration failed to converge")]
    EigenFailed,
    #[error("adaptive quadrature did not converge")]
    QuadratureFailed,
    #[error("truncation order must be nonnegative, got {0}")]
    NegativeOrder(i32),
    #[error(transparent)]
    Fourier(#[from] FourierError),
}

/// Effective modulus of the separable field `mu(x) = g(x1) g(x2)`:
/// `<g> <g^{-1}>^{-1}`, exact from the piecewise averages. The evenness of
/// `g` makes the product cubic-symmetric, so the value is direction-free.
pub fn separable_mu_eff(g: &StepProfile) -> Result<f64, OracleError> {
    if !g.is_even() {
        return Err(OracleError::NotEven);
    }
    Ok(g.mean() / g.mean_reciprocal())
}

/// Squared shear speed of an `x1`-laminate along the unit direction `kappa`:
/// `(<mu^{-1}>^{-1} k1^2 + <mu> k2^2) / rho_avg`.
pub fn laminate_speed_sq(
    profile: &StepProfile,
    rho_avg: f64,
    kappa: [f64; 2],
) -> Result<f64, OracleError> {
    let norm = (kappa[0] * kappa[0] + kappa[1] * kappa[1]).sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(OracleError::NotUnit);
    }
    let harmonic = 1.0 / profile.mean_reciprocal();
    let arithmetic = profile.mean();
    Ok((harmonic * kappa[0] * kappa[0] + arithmetic * kappa[1] * kappa[1]) / rho_avg)
}

/// Small-`k` limit of the lowest truncated-operator eigenvalue along `e1`:
/// assembles `(hat(g-g') (2 pi g + k e1) . (2 pi g' + k e1))`, takes its
/// smallest eigenvalue over the two smallest supplied wavenumbers, and
/// extrapolates `omega_1^2 / k^2` to `k -> 0`. Converges to the same value
/// as [`crate::pwe::pwe_upper_mu`] but through a completely different route.
pub fn direct_bnn(field: &CellField, order: i32, k_values: &[f64]) -> Result<f64, OracleError> {
    if order < 0 {
        return Err(OracleError::NegativeOrder(order));
    }
    let mut ks: Vec<f64> = k_values.to_vec();
    if ks.iter().any(|&k| !(k > 0.0 && k <= 0.1)) {
        return Err(OracleError::BadWavenumbers);
    }
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    if ks.len() < 2 {
        return Err(OracleError::BadWavenumbers);
    }

    let table = fourier::fourier2d(field, 2 * order)?;
    let n = order;
    let dim = ((2 * n + 1) * (2 * n + 1)) as usize;
    let flat = |g1: i32, g2: i32| ((g1 + n) * (2 * n + 1) + (g2 + n)) as usize;

    let ratio = |k: f64| -> Result<f64, OracleError> {
        let mut m = CMatrix::zeros(dim, dim);
        for g1 in -n..=n {
            for g2 in -n..=n {
                for h1 in -n..=n {
                    for h2 in -n..=n {
                        let dot = (2.0 * PI * g1 as f64 + k) * (2.0 * PI * h1 as f64 + k)
                            + (2.0 * PI * g2 as f64) * (2.0 * PI * h2 as f64);
                        m[(flat(g1, g2), flat(h1, h2))] =
                            table.get(g1 - h1, g2 - h2) * C64::new(dot, 0.0);
                    }
                }
            }
        }
        let eig = nalgebra::SymmetricEigen::try_new(m, 1e-13, 10_000)
            .ok_or(OracleError::EigenFailed)?;
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(min / (k * k))
    };

    // two smallest wavenumbers, eliminating the O(k^2) correction
    let k2 = ks[0];
    let k1 = ks[1];
    let r2 = ratio(k2)?;
    let r1 = ratio(k1)?;
    Ok((r2 * k1 * k1 - r1 * k2 * k2) / (k1 * k1 - k2 * k2))
}

/// Reference 2D Fourier coefficient by nested adaptive quadrature of the
/// pointwise field, seeded with the geometry's discontinuity lines.
pub fn quadrature_fourier(field: &CellField, g: [i32; 2]) -> Result<C64, OracleError> {
    let (_, mu_max) = field.mu_range();
    let scale = mu_max.max(1.0);
    let x1_breaks = field.geometry().x1_breakpoints();
    let outer = |x1: f64| -> C64 {
        let x2_breaks = field.geometry().x2_breakpoints(x1);
        let inner = |x2: f64| -> C64 {
            let (mu, _) = field.evaluate(x1, x2);
            C64::from_polar(mu, -2.0 * PI * (g[1] as f64) * x2)
        };
        let v = quad::integrate(&inner, 0.0, 1.0, &x2_breaks, 1e-13 * scale, 1e-13)
            .unwrap_or(C64::new(f64::NAN, f64::NAN));
        v * C64::from_polar(1.0, -2.0 * PI * (g[0] as f64) * x1)
    };
    let v = quad::integrate(&outer, 0.0, 1.0, &x1_breaks, 1e-11 * scale, 1e-11)
        .map_err(|_| OracleError::QuadratureFailed)?;
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(OracleError::QuadratureFailed);
    }
    Ok(v)
}

/// Reference 1D cross-section coefficient `int mu(x1, x2) e^{-2 pi i n x2} dx2`
/// by adaptive quadrature of the pointwise field.
pub fn quadrature_cross_section(field: &CellField, n: i32, x1: f64) -> Result<C64, OracleError> {
    let (_, mu_max) = field.mu_range();
    let scale = mu_max.max(1.0);
    let breaks = field.geometry().x2_breakpoints(x1);
    let f = |x2: f64| -> C64 {
        let (mu, _) = field.evaluate(x1, x2);
        C64::from_polar(mu, -2.0 * PI * (n as f64) * x2)
    };
    quad::integrate(&f, 0.0, 1.0, &breaks, 1e-13 * scale, 1e-13)
        .map_err(|_| OracleError::QuadratureFailed)
}

/// `<<mu>_2^{-1}>_1^{-1}` by nested quadrature of the pointwise field: the
/// harmonic `x1`-mean of arithmetic `x2`-means. This is the limit the
/// order-zero monodromy upper bound must reproduce.
pub fn nested_average_upper(field: &CellField) -> Result<f64, OracleError> {
    let (mu_min, _) = field.mu_range();
    let x1_breaks = field.geometry().x1_breakpoints();
    let f = |x1: f64| -> C64 {
        match quadrature_cross_section(field, 0, x1) {
            Ok(v) => C64::new(1.0 / v.re, 0.0),
            Err(_) => C64::new(f64::NAN, 0.0),
        }
    };
    let v = quad::integrate(&f, 0.0, 1.0, &x1_breaks, 1e-12 / mu_min, 1e-12)
        .map_err(|_| OracleError::QuadratureFailed)?;
    if !v.re.is_finite() {
        return Err(OracleError::QuadratureFailed);
    }
    Ok(1.0 / v.re)
}

/// `<<mu^{-1}>_2^{-1}>_1` by nested quadrature: the arithmetic `x1`-mean of
/// harmonic `x2`-means, matching the order-zero monodromy lower bound.
pub fn nested_average_lower(field: &CellField) -> Result<f64, OracleError> {
    let inv = field.inverted();
    let (mu_min, _) = field.mu_range();
    let x1_breaks = inv.geometry().x1_breakpoints();
    let f = |x1: f64| -> C64 {
        match quadrature_cross_section(&inv, 0, x1) {
            Ok(v) => C64::new(1.0 / v.re, 0.0),
            Err(_) => C64::new(f64::NAN, 0.0),
        }
    };
    let v = quad::integrate(&f, 0.0, 1.0, &x1_breaks, 1e-12 * mu_min, 1e-12)
        .map_err(|_| OracleError::QuadratureFailed)?;
    if !v.re.is_finite() {
        return Err(OracleError::QuadratureFailed);
    }
    Ok(v.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{CellGeometry, Material, NestedShape};
    use crate::pwe;
    use alloc::vec;

    fn mat(mu: f64) -> Material {
        Material::new(mu, 1.0).unwrap()
    }

    #[test]
    fn separable_examples() {
        let c = StepProfile::constant(3.0).unwrap();
        assert!((separable_mu_eff(&c).unwrap() - 9.0).abs() < 1e-15);

        let half = StepProfile::new(vec![0.25, 0.75], vec![1.0, 2.0, 1.0]).unwrap();
        assert!((separable_mu_eff(&half).unwrap() - 2.0).abs() < 1e-15);

        let wide = StepProfile::new(vec![0.375, 0.625], vec![1.0, 3.0, 1.0]).unwrap();
        assert!((separable_mu_eff(&wide).unwrap() - 1.8).abs() < 1e-15);

        let odd = StepProfile::new(vec![0.3], vec![1.0, 2.0]).unwrap();
        assert_eq!(separable_mu_eff(&odd), Err(OracleError::NotEven));
    }

    #[test]
    fn separable_duality_is_exact() {
        let g = StepProfile::new(vec![0.2, 0.8], vec![1.0, 5.0, 1.0]).unwrap();
        let a = separable_mu_eff(&g).unwrap();
        let b = separable_mu_eff(&g.reciprocal()).unwrap();
        assert!((a * b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn laminate_speed_anisotropy() {
        let p = StepProfile::new(vec![0.5], vec![1.0, 4.0]).unwrap();
        assert!((laminate_speed_sq(&p, 1.0, [1.0, 0.0]).unwrap() - 1.6).abs() < 1e-15);
        assert!((laminate_speed_sq(&p, 1.0, [0.0, 1.0]).unwrap() - 2.5).abs() < 1e-15);
        let s = 1.0 / 2.0f64.sqrt();
        assert!((laminate_speed_sq(&p, 1.0, [s, s]).unwrap() - 2.05).abs() < 1e-14);
        assert_eq!(laminate_speed_sq(&p, 1.0, [1.0, 1.0]), Err(OracleError::NotUnit));
    }

    #[test]
    fn direct_bnn_constant_field() {
        let f = CellField::constant(3.0, 1.0).unwrap();
        let b = direct_bnn(&f, 2, &[0.01, 0.005]).unwrap();
        // eigenvalue noise of order eps*|C|/k^2 limits the attainable accuracy
        assert!((b - 3.0).abs() < 1e-6, "{b}");
    }

    #[test]
    fn direct_bnn_order_zero_is_mean() {
        let f = CellField::new(
            CellGeometry::NestedSquares {
                matrix_phase: 0,
                shapes: vec![NestedShape { size: 0.5, phase: 1 }],
            },
            vec![mat(1.0), mat(4.0)],
        )
        .unwrap();
        let b = direct_bnn(&f, 0, &[0.02, 0.01]).unwrap();
        assert!((b - 1.75).abs() < 1e-10);
    }

    #[test]
    fn direct_bnn_rejects_bad_wavenumbers() {
        let f = CellField::constant(1.0, 1.0).unwrap();
        assert_eq!(direct_bnn(&f, 1, &[0.01]), Err(OracleError::BadWavenumbers));
        assert_eq!(direct_bnn(&f, 1, &[0.5, 0.2]), Err(OracleError::BadWavenumbers));
        assert_eq!(direct_bnn(&f, 1, &[0.01, 0.01]), Err(OracleError::BadWavenumbers));
    }

    #[test]
    fn direct_bnn_matches_pwe_on_square() {
        let f = CellField::new(
            CellGeometry::NestedSquares {
                matrix_phase: 0,
                shapes: vec![NestedShape { size: 0.5, phase: 1 }],
            },
            vec![mat(1.0), mat(4.0)],
        )
        .unwrap();
        let b = direct_bnn(&f, 2, &[0.01, 0.005]).unwrap();
        let mu = pwe::pwe_upper_mu(&f, 2).unwrap();
        assert!((b - mu).abs() <= 1e-4 * mu, "bnn {b} vs pwe {mu}");
    }

    #[test]
    fn quadrature_fourier_agrees_with_analytic_table() {
        let f = CellField::new(
            CellGeometry::NestedSquares {
                matrix_phase: 0,
                shapes: vec![NestedShape { size: 0.5, phase: 1 }],
            },
            vec![mat(1.0), mat(4.0)],
        )
        .unwrap();
        let q = quadrature_fourier(&f, [1, 0]).unwrap();
        let expect = -3.0 / (2.0 * PI);
        assert!((q.re - expect).abs() < 1e-10, "quadrature {q}");
        assert!(q.im.abs() < 1e-10);
        let t = fourier::fourier2d(&f, 1).unwrap();
        assert!((t.get(1, 0) - q).norm() < 1e-10);
    }

    #[test]
    fn quadrature_zero_mode_is_mean() {
        let f = CellField::constant(2.5, 1.0).unwrap();
        let q = quadrature_fourier(&f, [0, 0]).unwrap();
        assert!((q.re - 2.5).abs() < 1e-11);
    }

    #[test]
    fn cross_section_quadrature_matches_profile() {
        let f = CellField::new(
            CellGeometry::NestedSquares {
                matrix_phase: 0,
                shapes: vec![NestedShape { size: 0.5, phase: 1 }],
            },
            vec![mat(1.0), mat(4.0)],
        )
        .unwrap();
        // through the inclusion: diagonal 2.5, first coefficient -3/pi
        let c0 = quadrature_cross_section(&f, 0, 0.5).unwrap();
        assert!((c0.re - 2.5).abs() < 1e-12);
        let c1 = quadrature_cross_section(&f, 1, 0.5).unwrap();
        assert!((c1.re - (-3.0 / PI)).abs() < 1e-12, "{c1}");
    }

    #[test]
    fn nested_averages_on_square() {
        let f = CellField::new(
            CellGeometry::NestedSquares {
                matrix_phase: 0,
                shapes: vec![NestedShape { size: 0.5, phase: 1 }],
            },
            vec![mat(1.0), mat(4.0)],
        )
        .unwrap();
        let upper = nested_average_upper(&f).unwrap();
        assert!((upper - 1.0 / 0.7).abs() < 1e-10);
        let lower = nested_average_lower(&f).unwrap();
        assert!((lower - 1.3).abs() < 1e-10);
    }
}
