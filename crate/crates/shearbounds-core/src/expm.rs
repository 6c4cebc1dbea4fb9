//! Dense matrix exponential by scaling and squaring with diagonal Pade
//! approximants (degrees 3/5/7/9/13 chosen from the 1-norm, as in Higham,
//! SIAM J. Matrix Anal. Appl. 26(4), 2005).
//!
//! The input is balanced first (iterative radix-2 diagonal similarity), which
//! matters here: the generators fed in by the monodromy integrators carry
//! `mu` and `1/mu` blocks whose raw norms differ by many orders of magnitude
//! while their eigenvalues stay moderate.

use crate::{C64, CMatrix};

#[allow(unused_imports)]
use num_traits::Float;

const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_230e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068;
const THETA_13: f64 = 5.371_920_351_148_152;

fn one_norm(a: &CMatrix) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Radix-2 diagonal balancing (Parlett–Reinsch, no permutations).
/// Returns the scale vector `d` and overwrites `a` with `D^{-1} A D`.
pub(crate) fn balance(a: &mut CMatrix) -> alloc::vec::Vec<f64> {
    let n = a.nrows();
    let mut d = alloc::vec![1.0f64; n];
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c: f64 = (0..n).filter(|&k| k != i).map(|k| a[(k, i)].norm()).sum();
            let mut r: f64 = (0..n).filter(|&k| k != i).map(|k| a[(i, k)].norm()).sum();
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            while c < r / 2.0 {
                c *= 2.0;
                r /= 2.0;
                f *= 2.0;
            }
            while c >= r * 2.0 {
                c /= 2.0;
                r *= 2.0;
                f /= 2.0;
            }
            if c + r < 0.95 * s {
                converged = false;
                d[i] *= f;
                let inv = 1.0 / f;
                for k in 0..n {
                    a[(i, k)] *= inv;
                }
                for k in 0..n {
                    a[(k, i)] *= f;
                }
            }
        }
        if converged {
            return d;
        }
    }
}

fn pade_uv(a: &CMatrix, b: &[f64]) -> (CMatrix, CMatrix) {
    let n = a.nrows();
    let id = CMatrix::identity(n, n);
    let a2 = a * a;
    let mut even = &id * C64::new(b[0], 0.0);
    let mut odd = &id * C64::new(b[1], 0.0);
    let mut power = id;
    for k in (2..b.len()).step_by(2) {
        power = &power * &a2;
        even += &power * C64::new(b[k], 0.0);
        if k + 1 < b.len() {
            odd += &power * C64::new(b[k + 1], 0.0);
        }
    }
    (a * odd, even)
}

fn pade13_uv(a: &CMatrix) -> (CMatrix, CMatrix) {
    const B: [f64; 14] = [
        64_764_752_532_480_000.0,
        32_382_376_266_240_000.0,
        7_771_770_303_897_600.0,
        1_187_353_796_428_800.0,
        129_060_195_264_000.0,
        10_559_470_521_600.0,
        670_442_572_800.0,
        33_522_128_640.0,
        1_323_241_920.0,
        40_840_800.0,
        960_960.0,
        16_380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    let id = CMatrix::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_hi = &a6 * (&a6 * C64::new(B[13], 0.0) + &a4 * C64::new(B[11], 0.0) + &a2 * C64::new(B[9], 0.0));
    let u_lo = &a6 * C64::new(B[7], 0.0) + &a4 * C64::new(B[5], 0.0) + &a2 * C64::new(B[3], 0.0)
        + &id * C64::new(B[1], 0.0);
    let u = a * (u_hi + u_lo);
    let v_hi = &a6 * (&a6 * C64::new(B[12], 0.0) + &a4 * C64::new(B[10], 0.0) + &a2 * C64::new(B[8], 0.0));
    let v = v_hi
        + &a6 * C64::new(B[6], 0.0)
        + &a4 * C64::new(B[4], 0.0)
        + &a2 * C64::new(B[2], 0.0)
        + &id * C64::new(B[0], 0.0);
    (u, v)
}

/// `exp(A)` for a square complex matrix.
pub fn expm(a: &CMatrix) -> CMatrix {
    assert_eq!(a.nrows(), a.ncols(), "expm needs a square matrix");
    let n = a.nrows();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let mut ab = a.clone();
    let d = balance(&mut ab);
    let norm = one_norm(&ab);

    let (u, v, squarings) = if norm <= THETA_3 {
        let (u, v) = pade_uv(&ab, &[120.0, 60.0, 12.0, 1.0]);
        (u, v, 0)
    } else if norm <= THETA_5 {
        let (u, v) = pade_uv(&ab, &[30_240.0, 15_120.0, 3_360.0, 420.0, 30.0, 1.0]);
        (u, v, 0)
    } else if norm <= THETA_7 {
        let (u, v) = pade_uv(
            &ab,
            &[17_297_280.0, 8_648_640.0, 1_995_840.0, 277_200.0, 25_200.0, 1_512.0, 56.0, 1.0],
        );
        (u, v, 0)
    } else if norm <= THETA_9 {
        let (u, v) = pade_uv(
            &ab,
            &[
                17_643_225_600.0,
                8_821_612_800.0,
                2_075_673_600.0,
                302_702_400.0,
                30_270_240.0,
                2_162_160.0,
                110_880.0,
                3_960.0,
                90.0,
                1.0,
            ],
        );
        (u, v, 0)
    } else {
        let s = (norm / THETA_13).log2().ceil().max(0.0) as u32;
        let scaled = &ab * C64::new(0.5f64.powi(s as i32), 0.0);
        let (u, v) = pade13_uv(&scaled);
        (u, v, s)
    };

    let numer = &v + &u;
    let denom = &v - &u;
    let lu = denom.lu();
    let mut r = lu.solve(&numer).expect("Pade denominator is singular");
    for _ in 0..squarings {
        r = &r * &r;
    }
    // undo the balancing: exp(A) = D exp(D^{-1} A D) D^{-1}
    for i in 0..n {
        for j in 0..n {
            r[(i, j)] *= d[i] / d[j];
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = CMatrix::zeros(3, 3);
        assert!((expm(&z) - CMatrix::identity(3, 3)).norm() < 1e-15);
    }

    #[test]
    fn exp_of_nilpotent() {
        let a = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        let e = expm(&a);
        let expect = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)]);
        assert!((e - expect).norm() < 1e-15);
    }

    #[test]
    fn exp_of_diagonal() {
        let a = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![
            C64::new(1.0, 0.0),
            C64::new(-2.0, 0.5),
            C64::new(0.0, 3.0),
        ]));
        let e = expm(&a);
        for i in 0..3 {
            assert!((e[(i, i)] - a[(i, i)].exp()).norm() < 1e-14);
        }
    }

    #[test]
    fn exp_of_rotation_generator() {
        let th = 1.3;
        let a = CMatrix::from_row_slice(2, 2, &[c(0.0), c(-th), c(th), c(0.0)]);
        let e = expm(&a);
        assert!((e[(0, 0)].re - th.cos()).abs() < 1e-14);
        assert!((e[(1, 0)].re - th.sin()).abs() < 1e-14);
    }

    #[test]
    fn exp_of_hyperbolic_generator_with_wild_scales() {
        // [[0, 1/m], [m w^2, 0]] has exp with cosh/sinh blocks; m sets a huge
        // scale imbalance, exercising the balancer
        let m = 8e10;
        let w = 20.0;
        let a = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0 / m), c(m * w * w), c(0.0)]);
        let e = expm(&a);
        let (ch, sh) = (w.cosh(), w.sinh());
        assert!((e[(0, 0)].re - ch).abs() < 1e-9 * ch);
        assert!((e[(0, 1)].re - sh / (m * w)).abs() < 1e-9 * (sh / (m * w)));
        assert!((e[(1, 0)].re - m * w * sh).abs() < 1e-9 * (m * w * sh));
        assert!((e[(1, 1)].re - ch).abs() < 1e-9 * ch);
    }

    #[test]
    fn inverse_matches_exp_of_negation() {
        let a = CMatrix::from_fn(4, 4, |i, j| C64::new(0.3 * (i as f64 - j as f64), 0.1 * (i + j) as f64));
        let e = expm(&a);
        let em = expm(&(-&a));
        assert!((&e * &em - CMatrix::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn large_norm_triggers_squaring_and_stays_accurate() {
        let th = 150.0; // forces several squarings
        let a = CMatrix::from_row_slice(2, 2, &[c(0.0), c(-th), c(th), c(0.0)]);
        let e = expm(&a);
        assert!((e[(0, 0)].re - th.cos()).abs() < 1e-11);
        assert!((e[(0, 1)].re + th.sin()).abs() < 1e-11);
    }
}
