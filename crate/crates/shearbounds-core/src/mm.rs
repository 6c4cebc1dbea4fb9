//! Monodromy-matrix bounds.
//!
//! With the `x2` dependence truncated to `2N+1` harmonics, the shear cell
//! becomes a linear ODE system in `x1` with the zero-trace block generator
//!
//! ```text
//! Q_N(x1) = [ 0                 inv(hat_mu_N) ]
//!           [ D_N hat_mu_N D_N  0             ],   D_N = 2 pi diag(-N..N),
//! ```
//!
//! whose multiplicative integral over one period is the monodromy matrix
//! `M_N`. The upper bound is the unique scalar `w2 . (M_N - I)^{-1} w1`
//! (the preimage is not unique, the scalar is), and the lower bound is the
//! reciprocal of the same functional on the reciprocal field. For fields
//! even in `x1` the half-period transfer matrix gives the same bound from a
//! smaller and much better conditioned solve, so it is the default there.
//!
//! Three integrator backends compute the multiplicative integral: exact
//! piecewise matrix exponentials, the first-order step product rule, and a
//! truncated Peano (iterated-integral) series; the latter two exist chiefly
//! as cross-checks of the first.

use alloc::vec::Vec;
use thiserror::Error;

use crate::cell::CellField;
use crate::expm::{balance, expm};
use crate::fourier::{self, FourierError, ToeplitzProfile};
use crate::{C64, CMatrix, CVector};

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MmError {
    #[error("truncation order must be nonnegative, got {0}")]
    NegativeOrder(i32),
    #[error("field is not cubic-symmetric; the bound theory requires the cubic flag")]
    NotCubic,
    #[error("half-period shortcut requires a field even in x1")]
    NotEvenX1,
    #[error("product rule needs at least one step")]
    BadStepCount,
    #[error("Peano series needs order >= 1")]
    BadSeriesOrder,
    #[error("integration interval must satisfy 0 <= a < b <= 1")]
    BadInterval,
    #[error("upper-right block of the half-period transfer matrix is singular")]
    SingularBlock,
    #[error("resolvent breakdown: {0}")]
    ResolventBreakdown(&'static str),
    #[error(transparent)]
    Fourier(#[from] FourierError),
}

/// Integrator backend for the multiplicative integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmBackend {
    /// Exact matrix exponential per constant piece (the default).
    PiecewiseExp,
    /// First-order product rule with the given number of steps.
    Product { steps: usize },
    /// Truncated iterated-integral series of the given order.
    Peano { order: usize },
}

impl MmBackend {
    pub fn tag(&self) -> &'static str {
        match self {
            MmBackend::PiecewiseExp => "piecewise_exp",
            MmBackend::Product { .. } => "product",
            MmBackend::Peano { .. } => "peano",
        }
    }
}

/// One constant piece of the generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSegment {
    pub start: f64,
    pub end: f64,
    pub q: CMatrix,
}

/// The `(4N+2) x (4N+2)` zero-trace generator `Q_N(x1)`, stored per profile
/// segment or step.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockHamiltonian {
    order: i32,
    segments: Vec<GeneratorSegment>,
    stepped: bool,
}

impl BlockHamiltonian {
    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn segments(&self) -> &[GeneratorSegment] {
        &self.segments
    }

    /// Full matrix dimension `4N + 2`.
    pub fn dim(&self) -> usize {
        2 * (2 * self.order + 1) as usize
    }

    fn half_dim(&self) -> usize {
        (2 * self.order + 1) as usize
    }

    /// Generator at `x1` (segments are half-open on the right).
    pub fn q_at(&self, x1: f64) -> &CMatrix {
        let i = self
            .segments
            .partition_point(|s| s.end <= x1)
            .min(self.segments.len() - 1);
        &self.segments[i].q
    }

    /// Power-of-two block scale that equalizes the norms of the two nonzero
    /// blocks; conjugating by `diag(g I, I)` is exact in floating point and
    /// keeps intermediate products on the physically meaningful scale.
    fn block_scale(&self) -> f64 {
        let d = self.half_dim();
        let mut up: f64 = 0.0;
        let mut lo: f64 = 0.0;
        for seg in &self.segments {
            up = up.max(seg.q.view((0, d), (d, d)).norm());
            lo = lo.max(seg.q.view((d, 0), (d, d)).norm());
        }
        if up == 0.0 || lo == 0.0 {
            1.0
        } else {
            (0.5 * (up / lo).log2()).round().exp2()
        }
    }
}

/// Assemble the generator from a cross-section profile. The upper-right
/// block is the inverse Toeplitz cross-section, the lower-left is
/// `D_N hat_mu_N D_N`; both diagonal blocks are zero, so the trace vanishes
/// identically.
pub fn build_q(profile: &ToeplitzProfile) -> Result<BlockHamiltonian, MmError> {
    let n = profile.order();
    let d = (2 * n + 1) as usize;
    let mut segments = Vec::with_capacity(profile.segments().len());
    for seg in profile.segments() {
        let inv = fourier::toeplitz_inverse(&seg.matrix)?;
        let mut q = CMatrix::zeros(2 * d, 2 * d);
        for i in 0..d {
            for j in 0..d {
                q[(i, d + j)] = inv[(i, j)];
                let wi = 2.0 * core::f64::consts::PI * (i as i32 - n) as f64;
                let wj = 2.0 * core::f64::consts::PI * (j as i32 - n) as f64;
                q[(d + i, j)] = seg.matrix[(i, j)] * C64::new(wi * wj, 0.0);
            }
        }
        segments.push(GeneratorSegment { start: seg.start, end: seg.end, q });
    }
    Ok(BlockHamiltonian { order: n, segments, stepped: profile.is_stepped() })
}

/// Transfer matrix of the cross-section system over `[interval.0, interval.1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    order: i32,
    interval: (f64, f64),
    matrix: CMatrix,
    backend: &'static str,
    integrator_steps: usize,
}

impl TransferMatrix {
    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn backend(&self) -> &'static str {
        self.backend
    }

    pub fn integrator_steps(&self) -> usize {
        self.integrator_steps
    }

    /// Index of the fixed vector `w1 = (e_(N); 0)`.
    pub fn w1_index(&self) -> usize {
        self.order as usize
    }

    /// Index of the left fixed vector `w2 = (0; e_(N))`.
    pub fn w2_index(&self) -> usize {
        (2 * self.order + 1) as usize + self.order as usize
    }
}

/// Scaled copy of the segments, conjugated by `diag(g I, I)`.
fn scaled_segments(h: &BlockHamiltonian, g: f64) -> Vec<GeneratorSegment> {
    let d = h.half_dim();
    h.segments
        .iter()
        .map(|seg| {
            let mut q = seg.q.clone();
            for i in 0..d {
                for j in 0..d {
                    q[(i, d + j)] *= 1.0 / g;
                    q[(d + i, j)] *= g;
                }
            }
            GeneratorSegment { start: seg.start, end: seg.end, q }
        })
        .collect()
}

/// Undo the block scaling on an accumulated transfer matrix.
fn unscale(mut m: CMatrix, half_dim: usize, g: f64) -> CMatrix {
    for i in 0..half_dim {
        for j in 0..half_dim {
            m[(i, half_dim + j)] *= g;
            m[(half_dim + i, j)] *= 1.0 / g;
        }
    }
    m
}

fn check_interval(interval: (f64, f64)) -> Result<(), MmError> {
    let (a, b) = interval;
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a >= b {
        return Err(MmError::BadInterval);
    }
    Ok(())
}

/// Growth scale of the generator: `sqrt(|Q^2|)` bounds the spectral radius
/// far more tightly than `|Q|` for these zero-diagonal block matrices (it
/// vanishes exactly on the nilpotent order-zero channel, whose norm can
/// still be enormous in raw units).
fn growth_scale(q: &CMatrix) -> f64 {
    one_norm(&(q * q)).sqrt()
}

fn compose(
    h: &BlockHamiltonian,
    interval: (f64, f64),
    backend: MmBackend,
) -> Result<TransferMatrix, MmError> {
    let g = h.block_scale();
    let (factors, tag, steps) = monodromy_factors(h, interval, Some(backend), g)?;
    let dim = h.dim();
    let mut m = CMatrix::identity(dim, dim);
    for f in &factors {
        m = f * m;
    }
    Ok(TransferMatrix {
        order: h.order,
        interval,
        matrix: unscale(m, h.half_dim(), g),
        backend: tag,
        integrator_steps: steps,
    })
}

/// Multiplicative integral by exact exponentials of the constant pieces,
/// composed right to left in increasing `x1`.
pub fn monodromy_piecewise_exp(
    h: &BlockHamiltonian,
    interval: (f64, f64),
) -> Result<TransferMatrix, MmError> {
    compose(h, interval, MmBackend::PiecewiseExp)
}

/// First-order product rule: `prod_j (I + (1/k) Q(x_j))` over `k` equal
/// steps, sampled at the left endpoint of each step and composed right to
/// left. Global error is `O(1/k)`.
pub fn monodromy_product(
    h: &BlockHamiltonian,
    interval: (f64, f64),
    steps: usize,
) -> Result<TransferMatrix, MmError> {
    compose(h, interval, MmBackend::Product { steps })
}

/// Truncated Peano (iterated-integral) series, evaluated per constant piece:
/// each piece is split into substeps with `|h Q| <= 1/2` and advanced by the
/// order-`p` Taylor polynomial of its exponential, which is exactly the
/// depth-`p` truncation of the iterated integrals on that piece.
pub fn monodromy_peano(
    h: &BlockHamiltonian,
    interval: (f64, f64),
    order: usize,
) -> Result<TransferMatrix, MmError> {
    compose(h, interval, MmBackend::Peano { order })
}

/// Normalized structural residuals of a transfer matrix: unit determinant,
/// the two fixed vectors, and the symplectic relation `M* J M = J` inherited
/// from the J-Hermitian generator. Residuals are scaled by the matrix
/// magnitude, which grows like `exp(2 pi N)` across one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferInvariants {
    pub det_deviation: f64,
    pub fixed_vector_residual: f64,
    pub left_vector_residual: f64,
    pub symplectic_residual: f64,
    /// Spectral condition number of `M`; entries of the transfer matrix grow
    /// like `exp(2 pi N)` over a period, and `n eps cond` is the floor below
    /// which the computed determinant of a unimodular matrix cannot be
    /// pinned in f64.
    pub condition: f64,
}

pub fn transfer_invariants(t: &TransferMatrix) -> TransferInvariants {
    let m = &t.matrix;
    let dim = m.nrows();
    let half = dim / 2;
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);

    let sv = m.clone().singular_values();
    let condition = sv.iter().cloned().fold(0.0, f64::max)
        / sv.iter().cloned().fold(f64::INFINITY, f64::min).max(f64::MIN_POSITIVE);

    let det = m.clone().lu().determinant();
    let det_deviation = (det - C64::new(1.0, 0.0)).norm();

    let c1 = t.w1_index();
    let c2 = t.w2_index();
    let mut w1_res: f64 = 0.0;
    let mut w2_res: f64 = 0.0;
    for i in 0..dim {
        let target = if i == c1 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        w1_res = w1_res.max((m[(i, c1)] - target).norm());
        let target = if i == c2 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        w2_res = w2_res.max((m[(c2, i)] - target).norm());
    }

    // J = [[0, I], [-I, 0]]
    let mut j = CMatrix::zeros(dim, dim);
    for i in 0..half {
        j[(i, half + i)] = C64::new(1.0, 0.0);
        j[(half + i, i)] = C64::new(-1.0, 0.0);
    }
    let sym = m.adjoint() * &j * m - &j;
    let sym_res = sym.iter().map(|z| z.norm()).fold(0.0, f64::max);

    TransferInvariants {
        det_deviation,
        fixed_vector_residual: w1_res / scale,
        left_vector_residual: w2_res / scale,
        symplectic_residual: sym_res / (scale * scale),
        condition,
    }
}

impl TransferInvariants {
    /// Tolerance floor for the determinant check: the requested tolerance
    /// plus the f64 attainability floor `n eps cond(M)`. A perturbation of
    /// relative size eps in a unimodular matrix already moves its
    /// determinant by up to `n eps cond`, so no algorithm can certify the
    /// determinant more tightly than this.
    pub fn det_tolerance(&self, requested: f64, dim: usize) -> f64 {
        requested + dim as f64 * f64::EPSILON * self.condition
    }
}

/// Evaluation options for the bound functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmOptions {
    /// Integrator; `None` picks the piecewise exponential.
    pub backend: Option<MmBackend>,
    /// Bypass the cubic-symmetry gate (laminate oracle tests).
    pub oracle_mode: bool,
    /// Initial `x1` step count for circle profiles.
    pub circle_steps: usize,
    /// Relative self-change threshold for the step-doubling refinement of
    /// circle profiles.
    pub refine_tol: f64,
    /// Cap on step doublings.
    pub max_refinements: u32,
}

impl Default for MmOptions {
    fn default() -> Self {
        Self {
            backend: None,
            oracle_mode: false,
            circle_steps: 64,
            refine_tol: 1e-8,
            max_refinements: 10,
        }
    }
}

/// Per-bound diagnostics surfaced to the sweep output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmDiagnostics {
    pub backend: &'static str,
    pub half_period: bool,
    pub profile_segments: usize,
    pub integrator_steps: usize,
    pub refinements: u32,
    pub condition_estimate: f64,
    /// Relative imaginary leakage of the extracted scalar.
    pub imaginary_residual: f64,
}

/// One evaluated bound with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmBound {
    pub value: f64,
    pub diagnostics: MmDiagnostics,
}

fn integrate(
    h: &BlockHamiltonian,
    interval: (f64, f64),
    backend: Option<MmBackend>,
) -> Result<TransferMatrix, MmError> {
    match backend.unwrap_or(MmBackend::PiecewiseExp) {
        MmBackend::PiecewiseExp => monodromy_piecewise_exp(h, interval),
        MmBackend::Product { steps } => monodromy_product(h, interval, steps),
        MmBackend::Peano { order } => monodromy_peano(h, interval, order),
    }
}

/// Collects multiplicative-integral factors left to right, sealing a chunk
/// whenever the running product's norm would outgrow the cap. The chunk list
/// represents `M = F_{K-1} ... F_0` with bounded per-factor dynamic range.
struct FactorChunker {
    chunks: Vec<CMatrix>,
    current: Option<CMatrix>,
    cap: f64,
}

impl FactorChunker {
    fn new() -> Self {
        // a chunk of norm c carries singular values down to 1/c, so its
        // spread is c^2; 1e6 keeps every chunk comfortably inside f64
        Self { chunks: Vec::new(), current: None, cap: 1e6 }
    }

    fn push(&mut self, f: &CMatrix) {
        match self.current.take() {
            None => self.current = Some(f.clone()),
            Some(cur) => {
                let candidate = f * &cur;
                if one_norm(&candidate) > self.cap {
                    self.chunks.push(cur);
                    self.current = Some(f.clone());
                } else {
                    self.current = Some(candidate);
                }
            }
        }
    }

    fn finish(mut self, dim: usize) -> Vec<CMatrix> {
        if let Some(cur) = self.current.take() {
            self.chunks.push(cur);
        }
        if self.chunks.is_empty() {
            self.chunks.push(CMatrix::identity(dim, dim));
        }
        self.chunks
    }
}

/// Factor stream of the multiplicative integral in block-scaled coordinates,
/// chunked to bounded norm. Returns `(factors, backend tag, step count)`.
fn monodromy_factors(
    h: &BlockHamiltonian,
    interval: (f64, f64),
    backend: Option<MmBackend>,
    scale: f64,
) -> Result<(Vec<CMatrix>, &'static str, usize), MmError> {
    check_interval(interval)?;
    let segs = scaled_segments(h, scale);
    let dim = h.dim();
    let mut chunker = FactorChunker::new();
    let mut count = 0usize;
    let backend = backend.unwrap_or(MmBackend::PiecewiseExp);
    match backend {
        MmBackend::PiecewiseExp => {
            for seg in &segs {
                let lo = seg.start.max(interval.0);
                let hi = seg.end.min(interval.1);
                if hi > lo {
                    // exp(l Q) = exp(l Q / m)^m; splitting keeps every pushed
                    // factor's own singular spread inside the chunk cap
                    let len = hi - lo;
                    let nsub = ((len * growth_scale(&seg.q)) / 13.8).ceil().max(1.0) as usize;
                    let e = expm(&(&seg.q * C64::new(len / nsub as f64, 0.0)));
                    for _ in 0..nsub {
                        chunker.push(&e);
                    }
                    count += 1;
                }
            }
        }
        MmBackend::Product { steps } => {
            if steps < 1 {
                return Err(MmError::BadStepCount);
            }
            let dx = (interval.1 - interval.0) / steps as f64;
            let q_at = |x: f64| -> &CMatrix {
                let i = segs.partition_point(|s| s.end <= x).min(segs.len() - 1);
                &segs[i].q
            };
            for j in 0..steps {
                let x = interval.0 + j as f64 * dx;
                chunker.push(&(CMatrix::identity(dim, dim) + q_at(x) * C64::new(dx, 0.0)));
                count += 1;
            }
        }
        MmBackend::Peano { order } => {
            if order < 1 {
                return Err(MmError::BadSeriesOrder);
            }
            let id = CMatrix::identity(dim, dim);
            for seg in &segs {
                let lo = seg.start.max(interval.0);
                let hi = seg.end.min(interval.1);
                if hi <= lo {
                    continue;
                }
                let nsub = ((hi - lo) * growth_scale(&seg.q) / 0.3).ceil().max(1.0) as usize;
                let hq = &seg.q * C64::new((hi - lo) / nsub as f64, 0.0);
                let mut step = id.clone();
                for j in (1..=order).rev() {
                    step = &id + (&hq * C64::new(1.0 / j as f64, 0.0)) * step;
                }
                for _ in 0..nsub {
                    chunker.push(&step);
                    count += 1;
                }
            }
        }
    }
    Ok((chunker.finish(dim), backend.tag(), count))
}

/// Solve `(M - I) x = w1` for `M = F_{K-1} ... F_0` and read off `w2 . x`,
/// which is independent of the kernel component of the preimage.
///
/// Composing the factors first would bury the `exp(-2 pi N)`-scale structure
/// of the monodromy below the f64 noise floor, so the preimage is instead
/// the block-cyclic linear system `F_k y_k = y_{k+1}` closed by
/// `F_{K-1} y_{K-1} - y_0 = w1`, whose conditioning follows a single chunk
/// rather than the whole period. `w1` and `w2` are coordinate vectors and
/// every integrator preserves the matching column and row of each factor
/// exactly, so the known one-dimensional kernel (`y_k = w1` for all `k`) and
/// the redundant left-kernel row are deflated exactly by deleting one
/// coordinate column and one row. The reduced system is balanced and solved
/// by a rank-revealing SVD with the minimal-norm solution; singular
/// directions below the `n eps sigma_max` noise floor carry no recoverable
/// information and are truncated, and a right-hand side that needs them is
/// reported as a breakdown instead of silently amplifying noise.
fn resolvent_scalar(factors: &[CMatrix], order: i32) -> Result<(C64, f64), MmError> {
    let dim = 2 * (2 * order + 1) as usize;
    let c1 = order as usize;
    let c2 = (2 * order + 1) as usize + order as usize;
    let k = factors.len();

    for f in factors {
        for i in 0..dim {
            let col = if i == c1 { f[(i, c1)] - C64::new(1.0, 0.0) } else { f[(i, c1)] };
            let row = if i == c2 { f[(c2, i)] - C64::new(1.0, 0.0) } else { f[(c2, i)] };
            if col.norm() > 1e-9 || row.norm() > 1e-9 {
                return Err(MmError::ResolventBreakdown("fixed-vector structure lost"));
            }
        }
    }

    // unknowns y_0 .. y_{K-1}; row block j: F_j y_j - y_{j+1 mod K} = w1 d_{j,K-1}
    // deleted: column (K-1) dim + c1 (pins the kernel) and row
    // (K-1) dim + c2 (exactly minus the sum of the other c2-rows)
    let big = k * dim;
    let del_col = (k - 1) * dim + c1;
    let del_row = (k - 1) * dim + c2;
    let n = big - 1;
    let col_of = |j: usize| if j < del_col { Some(j) } else if j == del_col { None } else { Some(j - 1) };
    let row_of = |i: usize| if i < del_row { Some(i) } else if i == del_row { None } else { Some(i - 1) };

    let mut a = CMatrix::zeros(n, n);
    for j in 0..k {
        let next = (j + 1) % k;
        for r in 0..dim {
            let Some(ri) = row_of(j * dim + r) else { continue };
            for c in 0..dim {
                if let Some(ci) = col_of(j * dim + c) {
                    a[(ri, ci)] += factors[j][(r, c)];
                }
                if r == c {
                    if let Some(ci) = col_of(next * dim + c) {
                        a[(ri, ci)] -= C64::new(1.0, 0.0);
                    }
                }
            }
        }
    }
    let d = balance(&mut a);
    let rhs_row = row_of((k - 1) * dim + c1).expect("rhs row kept");
    let rhs = CVector::from_fn(n, |i, _| {
        if i == rhs_row { C64::new(1.0 / d[rhs_row], 0.0) } else { C64::new(0.0, 0.0) }
    });

    let svd = a.svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let v_t = svd.v_t.as_ref().expect("svd with v_t");
    let sig = &svd.singular_values;
    let sigma_max = sig.iter().cloned().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return Err(MmError::ResolventBreakdown("reduced system vanished"));
    }
    let floor = n as f64 * f64::EPSILON * sigma_max;

    let y = u.adjoint() * &rhs;
    let mut sigma_min = f64::INFINITY;
    let mut dropped = 0.0f64;
    let out_col = col_of(c2).expect("output column kept");
    let mut out = C64::new(0.0, 0.0);
    for i in 0..n {
        if sig[i] <= floor {
            dropped += y[i].norm_sqr();
            continue;
        }
        sigma_min = sigma_min.min(sig[i]);
        out += y[i] / C64::new(sig[i], 0.0) * v_t[(i, out_col)].conj();
    }
    if dropped.sqrt() * d[rhs_row] > 1e-6 {
        return Err(MmError::ResolventBreakdown(
            "right-hand side needs directions below the f64 noise floor",
        ));
    }
    let scalar = out * C64::new(d[out_col], 0.0);
    Ok((scalar, sigma_max / sigma_min))
}

/// Extract the bound from the half-period matrix: `1/2 e . m^{-1} e` with
/// `m` the upper-right block. Rows are equilibrated by powers of two before
/// the LU solve.
fn half_period_scalar(t: &TransferMatrix) -> Result<(C64, f64), MmError> {
    let half = t.matrix.nrows() / 2;
    let n = t.order as usize;
    let mut m = t.matrix.view((0, half), (half, half)).clone_owned();
    let m_norm = one_norm(&m);
    let mut row_scale = alloc::vec![1.0f64; half];
    for i in 0..half {
        let r = (0..half).map(|j| m[(i, j)].norm()).fold(0.0, f64::max);
        if r > 0.0 {
            let s = (-r.log2().round()).exp2();
            row_scale[i] = s;
            for j in 0..half {
                m[(i, j)] *= s;
            }
        }
    }
    let lu = m.lu();
    let rhs = CVector::from_fn(half, |i, _| {
        if i == n { C64::new(row_scale[n], 0.0) } else { C64::new(0.0, 0.0) }
    });
    let z = lu.solve(&rhs).ok_or(MmError::SingularBlock)?;
    let inv = lu.try_inverse().ok_or(MmError::SingularBlock)?;
    // cond estimate of the unscaled block
    let mut inv_norm: f64 = 0.0;
    for j in 0..half {
        let col: f64 = (0..half).map(|i| (inv[(i, j)] * row_scale[i]).norm()).sum();
        inv_norm = inv_norm.max(col);
    }
    Ok((z[n] * C64::new(0.5, 0.0), m_norm * inv_norm))
}

fn one_norm(a: &CMatrix) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn evaluate_upper(
    field: &CellField,
    order: i32,
    opts: &MmOptions,
    half: bool,
) -> Result<MmBound, MmError> {
    if order < 0 {
        return Err(MmError::NegativeOrder(order));
    }
    if half && !field.symmetry().even_x1 {
        return Err(MmError::NotEvenX1);
    }
    if !opts.oracle_mode && !field.symmetry().cubic {
        return Err(MmError::NotCubic);
    }
    let interval = if half { (0.0, 0.5) } else { (0.0, 1.0) };

    let mut steps = opts.circle_steps.max(2);
    let mut prev_raw: Option<f64> = None;
    let mut prev_extrap: Option<f64> = None;
    let mut refinements = 0u32;
    loop {
        let profile = fourier::cross_section_profile(field, order, steps)?;
        let h = build_q(&profile)?;
        let (scalar, cond, tag, integrator_steps) = if half {
            let t = integrate(&h, interval, opts.backend)?;
            let (s, c) = half_period_scalar(&t)?;
            (s, c, t.backend(), t.integrator_steps())
        } else {
            // the solve runs on the factored integral in block-scaled
            // coordinates; S^{-1} w1 = w1 / g rescales the answer
            let g = h.block_scale();
            let (factors, tag, steps) = monodromy_factors(&h, interval, opts.backend, g)?;
            let (s, c) = resolvent_scalar(&factors, order)?;
            (s / g, c, tag, steps)
        };
        let raw = scalar.re;
        // the graded stepped profile converges at second order in the step
        // count, so one Richardson level cancels the leading error term
        let (value, converged) = match prev_raw {
            None => (raw, false),
            Some(p) => {
                let extrap = raw + (raw - p) / 3.0;
                let conv = prev_extrap
                    .map_or(false, |pe| (extrap - pe).abs() <= opts.refine_tol * extrap.abs())
                    || (raw - p).abs() <= opts.refine_tol * raw.abs();
                prev_extrap = Some(extrap);
                (extrap, conv)
            }
        };
        let bound = MmBound {
            value,
            diagnostics: MmDiagnostics {
                backend: tag,
                half_period: half,
                profile_segments: profile.segments().len(),
                integrator_steps,
                refinements,
                condition_estimate: cond,
                imaginary_residual: scalar.im.abs() / raw.abs().max(f64::MIN_POSITIVE),
            },
        };
        // exact piecewise profiles need no step refinement; explicit product
        // or Peano backends are single-shot diagnostics tools
        if !profile.is_stepped() || opts.backend.map_or(false, |b| b != MmBackend::PiecewiseExp) {
            return Ok(MmBound { value: raw, ..bound });
        }
        if converged || refinements >= opts.max_refinements {
            return Ok(bound);
        }
        prev_raw = Some(raw);
        steps *= 2;
        refinements += 1;
    }
}

/// Full-period upper bound `mu_N = w2 . (M_N - I)^{-1} w1`.
pub fn mm_upper_mu(field: &CellField, order: i32, opts: &MmOptions) -> Result<MmBound, MmError> {
    evaluate_upper(field, order, opts, false)
}

/// Full-period lower bound `~mu_N = 1 / mu_N(mu^{-1})`.
pub fn mm_lower_mu(field: &CellField, order: i32, opts: &MmOptions) -> Result<MmBound, MmError> {
    let b = mm_upper_mu(&field.inverted(), order, opts)?;
    Ok(MmBound { value: 1.0 / b.value, diagnostics: b.diagnostics })
}

/// Half-period upper bound `mu_N = 1/2 e . m_N^{-1} e` for fields even in
/// `x1`; agrees with [`mm_upper_mu`] and is much better conditioned.
pub fn mm_upper_mu_half(
    field: &CellField,
    order: i32,
    opts: &MmOptions,
) -> Result<MmBound, MmError> {
    evaluate_upper(field, order, opts, true)
}

/// Half-period lower bound `~mu_N = 2 (e . ~m_N^{-1} e)^{-1}`, realized as
/// the reciprocal of the half-period upper bound of the reciprocal field.
pub fn mm_lower_mu_half(
    field: &CellField,
    order: i32,
    opts: &MmOptions,
) -> Result<MmBound, MmError> {
    let b = mm_upper_mu_half(&field.inverted(), order, opts)?;
    Ok(MmBound { value: 1.0 / b.value, diagnostics: b.diagnostics })
}

/// Bound pair `(lower, upper)` using the half-period path when the field is
/// even in `x1` and the full-period resolvent otherwise.
pub fn mm_bounds(
    field: &CellField,
    order: i32,
    opts: &MmOptions,
) -> Result<(MmBound, MmBound), MmError> {
    if field.symmetry().even_x1 {
        Ok((mm_lower_mu_half(field, order, opts)?, mm_upper_mu_half(field, order, opts)?))
    } else {
        Ok((mm_lower_mu(field, order, opts)?, mm_upper_mu(field, order, opts)?))
    }
}
