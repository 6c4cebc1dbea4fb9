//! Adaptive Gauss–Kronrod (G7, K15) quadrature.
//!
//! Worst-interval-first refinement with optional breakpoint seeding so that
//! integrands which are smooth between known discontinuities converge at the
//! Gauss rate. Used by the reference oracles and by the circle Fourier
//! coefficients.

use alloc::vec::Vec;

use crate::C64;

#[allow(unused_imports)]
use num_traits::Float;

/// Kronrod abscissae on [0,1] half-interval (symmetric).
const XK: [f64; 8] = [
    0.0,
    0.207_784_955_007_898_5,
    0.405_845_151_377_397_17,
    0.586_087_235_467_691_1,
    0.741_531_185_599_394_4,
    0.864_864_423_359_769_1,
    0.949_107_912_342_758_5,
    0.991_455_371_120_812_6,
];

/// Kronrod weights matching `XK`.
const WK: [f64; 8] = [
    0.209_482_141_084_727_83,
    0.204_432_940_075_298_9,
    0.190_350_578_064_785_4,
    0.169_004_726_639_267_9,
    0.140_653_259_715_525_92,
    0.104_790_010_322_250_18,
    0.063_092_092_629_978_56,
    0.022_935_322_010_529_225,
];

/// Gauss weights for the embedded 7-point rule (nodes XK[0], XK[2], XK[4], XK[6]).
const WG: [f64; 4] = [
    0.417_959_183_673_469_4,
    0.381_830_050_505_118_94,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_7,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct QuadNonConvergent;

struct Piece {
    a: f64,
    b: f64,
    value: C64,
    err: f64,
}

fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = C64::new(0.0, 0.0);
    let mut gauss = C64::new(0.0, 0.0);
    for i in 0..8 {
        let (lo, hi) = (f(c - h * XK[i]), f(c + h * XK[i]));
        let pair = if i == 0 { lo } else { lo + hi };
        kron += WK[i] * pair;
        if i % 2 == 0 {
            gauss += WG[i / 2] * pair;
        }
    }
    kron *= h;
    gauss *= h;
    (kron, (kron - gauss).norm())
}

/// Integrate `f` over `[a, b]`, splitting first at the given breakpoints.
/// The target is mixed: iteration stops once the accumulated error estimate
/// drops below `atol + rtol * |integral|`.
pub(crate) fn integrate<F: Fn(f64) -> C64>(
    f: &F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    atol: f64,
    rtol: f64,
) -> Result<C64, QuadNonConvergent> {
    const MAX_PIECES: usize = 4000;
    if b <= a {
        return Ok(C64::new(0.0, 0.0));
    }
    let mut edges: Vec<f64> = Vec::with_capacity(breakpoints.len() + 2);
    edges.push(a);
    edges.extend(breakpoints.iter().copied().filter(|&p| p > a && p < b));
    edges.push(b);
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let mut pieces: Vec<Piece> = edges
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(f, w[0], w[1]);
            Piece { a: w[0], b: w[1], value: v, err: e }
        })
        .collect();

    loop {
        let total: C64 = pieces.iter().map(|p| p.value).sum();
        let err: f64 = pieces.iter().map(|p| p.err).sum();
        if err <= atol + rtol * total.norm() {
            return Ok(total);
        }
        if pieces.len() >= MAX_PIECES {
            return Err(QuadNonConvergent);
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i)
            .unwrap();
        let Piece { a, b, .. } = pieces[worst];
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // interval exhausted at machine precision
            return Err(QuadNonConvergent);
        }
        let (v1, e1) = gk15(f, a, mid);
        let (v2, e2) = gk15(f, mid, b);
        pieces[worst] = Piece { a, b: mid, value: v1, err: e1 };
        pieces.push(Piece { a: mid, b, value: v2, err: e2 });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let f = |x: f64| C64::new(x * x * x - 2.0 * x + 1.0, 0.0);
        let got = integrate(&f, 0.0, 1.0, &[], 1e-14, 0.0).unwrap();
        assert!((got.re - 0.25).abs() < 1e-14);
        assert!(got.im.abs() < 1e-15);
    }

    #[test]
    fn oscillatory_complex_exponential() {
        // int_0^1 e^{-2 pi i 3 x} dx = 0
        let f = |x: f64| C64::from_polar(1.0, -2.0 * PI * 3.0 * x);
        let got = integrate(&f, 0.0, 1.0, &[], 1e-13, 0.0).unwrap();
        assert!(got.norm() < 1e-12);
    }

    #[test]
    fn step_with_seeded_breakpoint() {
        let f = |x: f64| C64::new(if x < 0.3 { 1.0 } else { 5.0 }, 0.0);
        let got = integrate(&f, 0.0, 1.0, &[0.3], 1e-14, 0.0).unwrap();
        assert!((got.re - (0.3 + 5.0 * 0.7)).abs() < 1e-13);
    }

    #[test]
    fn step_without_seed_still_converges() {
        let f = |x: f64| C64::new(if x < 1.0 / 3.0 { 1.0 } else { 5.0 }, 0.0);
        let got = integrate(&f, 0.0, 1.0, &[], 1e-10, 1e-12).unwrap();
        let exact = 1.0 / 3.0 + 5.0 * 2.0 / 3.0;
        assert!((got.re - exact).abs() < 1e-9);
    }
}
