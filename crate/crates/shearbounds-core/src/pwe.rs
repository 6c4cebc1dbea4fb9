//! Plane-wave-expansion bounds.
//!
//! Truncating the shear operator onto the `(2N+1)^2` harmonics
//! `exp(2 pi i g . x)` turns the homogenized modulus into finite linear
//! algebra: an upper bound `<mu> - f . C0^{-1} f`, where `C0` couples
//! harmonics through `hat(g - g') (g . g')` and `f(g) = hat(g) g1`. The
//! matching lower bound is the reciprocal of the same functional applied to
//! the reciprocal field. Both converge monotonically to the effective
//! modulus as `N` grows.
//!
//! The `2 pi` factors of the physical wave vectors are omitted: the scalar
//! `f . C0^{-1} f` is invariant under rescaling `C0` and `f` by `(2 pi)^2`,
//! since `f` carries one factor per slot and `C0^{-1}` removes two. The
//! eigenvalue oracle in [`crate::oracles`], which needs a real wave number,
//! carries its `2 pi` explicitly.

use thiserror::Error;

use crate::cell::CellField;
use crate::fourier::{self, FourierError, FourierTable2D};
use crate::{C64, CMatrix, CVector};

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PweError {
    #[error("truncation order must be nonnegative, got {0}")]
    NegativeOrder(i32),
    #[error("table window {window} too small for order {order} (needs 2N)")]
    WindowTooSmall { window: i32, order: i32 },
    #[error("reduced system is not positive definite; the field is not strictly positive or the assembly is corrupted")]
    NotPositiveDefinite,
    #[error("field is not cubic-symmetric; the bound theory requires the cubic flag")]
    NotCubic,
    #[error(transparent)]
    Fourier(#[from] FourierError),
}

/// The truncated quadratic form `C0`, the source vector `f`, and the position
/// of the constant mode `g = 0` in the flattened index space.
#[derive(Debug, Clone, PartialEq)]
pub struct PweSystem {
    order: i32,
    matrix: CMatrix,
    source: CVector,
    constant_index: usize,
}

impl PweSystem {
    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn source(&self) -> &CVector {
        &self.source
    }

    pub fn constant_index(&self) -> usize {
        self.constant_index
    }
}

/// Flattened index of `g = (g1, g2)` with `|g_i| <= n`.
#[inline]
fn flat(g1: i32, g2: i32, n: i32) -> usize {
    ((g1 + n) * (2 * n + 1) + (g2 + n)) as usize
}

/// Assemble `C0[g, g'] = hat(g - g') (g . g')` and `f[g] = hat(g) g1` from a
/// table with window at least `2N`.
pub fn assemble_pwe(table: &FourierTable2D, order: i32) -> Result<PweSystem, PweError> {
    if order < 0 {
        return Err(PweError::NegativeOrder(order));
    }
    if table.window() < 2 * order {
        return Err(PweError::WindowTooSmall { window: table.window(), order });
    }
    let n = order;
    let dim = ((2 * n + 1) * (2 * n + 1)) as usize;
    let mut matrix = CMatrix::zeros(dim, dim);
    let mut source = CVector::zeros(dim);
    for g1 in -n..=n {
        for g2 in -n..=n {
            let row = flat(g1, g2, n);
            source[row] = table.get(g1, g2) * C64::new(g1 as f64, 0.0);
            for h1 in -n..=n {
                for h2 in -n..=n {
                    let col = flat(h1, h2, n);
                    let dot = (g1 * h1 + g2 * h2) as f64;
                    if dot != 0.0 {
                        matrix[(row, col)] = table.get(g1 - h1, g2 - h2) * C64::new(dot, 0.0);
                    }
                }
            }
        }
    }
    Ok(PweSystem { order: n, matrix, source, constant_index: flat(0, 0, n) })
}

/// The correction scalar `f . C0^{-1} f`, solved on the orthogonal complement
/// of the constant mode: the known one-dimensional kernel row and column are
/// deleted and the reduced Hermitian positive definite system is solved by
/// Cholesky factorization. Always nonnegative.
pub fn solve_constrained(system: &PweSystem) -> Result<f64, PweError> {
    let dim = system.matrix.nrows();
    if dim <= 1 {
        return Ok(0.0);
    }
    let c = system.constant_index;
    let keep: alloc::vec::Vec<usize> = (0..dim).filter(|&i| i != c).collect();
    let reduced = CMatrix::from_fn(dim - 1, dim - 1, |r, s| system.matrix[(keep[r], keep[s])]);
    let rhs = CVector::from_fn(dim - 1, |r, _| system.source[keep[r]]);
    let chol = nalgebra::Cholesky::new(reduced).ok_or(PweError::NotPositiveDefinite)?;
    let x = chol.solve(&rhs);
    let fx: C64 = rhs.dotc(&x);
    Ok(fx.re)
}

/// Upper bound `mu_NN = <mu> - f . C0^{-1} f` at truncation order `N`.
/// Requires the cubic flag; returns exactly `<mu>` at `N = 0` (the Voigt
/// bound).
pub fn pwe_upper_mu(field: &CellField, order: i32) -> Result<f64, PweError> {
    if !field.symmetry().cubic {
        return Err(PweError::NotCubic);
    }
    pwe_upper_mu_ungated(field, order)
}

/// Same as [`pwe_upper_mu`] without the cubic-symmetry gate; used by the
/// oracle paths that drive laminates through the `c^2(e1)` machinery.
pub fn pwe_upper_mu_ungated(field: &CellField, order: i32) -> Result<f64, PweError> {
    if order < 0 {
        return Err(PweError::NegativeOrder(order));
    }
    let table = fourier::fourier2d(field, 2 * order)?;
    let system = assemble_pwe(&table, order)?;
    let correction = solve_constrained(&system)?;
    Ok(table.zero_mode().re - correction)
}

/// Lower bound `~mu_NN = 1 / mu_NN(mu^{-1})`; at `N = 0` this is the Reuss
/// bound `<mu^{-1}>^{-1}`.
pub fn pwe_lower_mu(field: &CellField, order: i32) -> Result<f64, PweError> {
    if !field.symmetry().cubic {
        return Err(PweError::NotCubic);
    }
    Ok(1.0 / pwe_upper_mu_ungated(&field.inverted(), order)?)
}
