//! Unit-cell model: materials, geometries, pointwise evaluation, exact
//! averages, filling fractions, and symmetry checks.
//!
//! All geometries live on the unit cell `[0,1]^2` and extend 1-periodically.
//! Averages and filling fractions are computed from analytic shape areas, so
//! the built-in variants carry no quadrature error.

use alloc::vec::Vec;
use thiserror::Error;

#[allow(unused_imports)]
use num_traits::Float;

/// Errors from cell-model construction and evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CellError {
    #[error("material constants must be positive and finite (mu = {mu}, rho = {rho})")]
    InvalidMaterial { mu: f64, rho: f64 },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(&'static str),
    #[error("phase id {id} out of range for {count} phases")]
    PhaseOutOfRange { id: usize, count: usize },
}

/// One phase: shear modulus (Pa) and mass density (kg/m^3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    shear_modulus: f64,
    density: f64,
}

impl Material {
    pub fn new(shear_modulus: f64, density: f64) -> Result<Self, CellError> {
        if !(shear_modulus > 0.0 && shear_modulus.is_finite())
            || !(density > 0.0 && density.is_finite())
        {
            return Err(CellError::InvalidMaterial { mu: shear_modulus, rho: density });
        }
        Ok(Self { shear_modulus, density })
    }

    pub fn shear_modulus(&self) -> f64 {
        self.shear_modulus
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    /// Same density, reciprocal shear modulus.
    fn inverted(&self) -> Self {
        Self { shear_modulus: 1.0 / self.shear_modulus, density: self.density }
    }
}

/// Positive piecewise-constant function on `[0,1]`.
///
/// `cuts` are the interior breakpoints (strictly increasing, inside `(0,1)`);
/// segment `i` is the half-open interval `[cuts[i-1], cuts[i])` with value
/// `values[i]`, so `values.len() == cuts.len() + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepProfile {
    cuts: Vec<f64>,
    values: Vec<f64>,
}

impl StepProfile {
    pub fn new(cuts: Vec<f64>, values: Vec<f64>) -> Result<Self, CellError> {
        if values.len() != cuts.len() + 1 {
            return Err(CellError::InvalidGeometry("profile needs one more value than cuts"));
        }
        if !cuts.windows(2).all(|w| w[0] < w[1]) {
            return Err(CellError::InvalidGeometry("profile cuts must be strictly increasing"));
        }
        if cuts.iter().any(|&c| !(c > 0.0 && c < 1.0)) {
            return Err(CellError::InvalidGeometry("profile cuts must lie inside (0,1)"));
        }
        if values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(CellError::InvalidGeometry("profile values must be positive and finite"));
        }
        Ok(Self { cuts, values })
    }

    /// Constant profile.
    pub fn constant(value: f64) -> Result<Self, CellError> {
        Self::new(Vec::new(), alloc::vec![value])
    }

    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at `x` (wrapped into `[0,1)`); segments are half-open on the right.
    pub fn value_at(&self, x: f64) -> f64 {
        let x = wrap_unit(x);
        let idx = self.cuts.partition_point(|&c| c <= x);
        self.values[idx]
    }

    /// Iterator over `(start, end, value)` triples covering `[0,1]`.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let n = self.values.len();
        (0..n).map(move |i| {
            let a = if i == 0 { 0.0 } else { self.cuts[i - 1] };
            let b = if i == n - 1 { 1.0 } else { self.cuts[i] };
            (a, b, self.values[i])
        })
    }

    pub fn mean(&self) -> f64 {
        self.pieces().map(|(a, b, v)| (b - a) * v).sum()
    }

    pub fn mean_reciprocal(&self) -> f64 {
        self.pieces().map(|(a, b, v)| (b - a) / v).sum()
    }

    /// Reciprocal profile with the same breakpoints.
    pub fn reciprocal(&self) -> Self {
        Self {
            cuts: self.cuts.clone(),
            values: self.values.iter().map(|v| 1.0 / v).collect(),
        }
    }

    /// True when the profile is mirror-symmetric about `x = 1/2`, i.e. even
    /// under `x -> -x` once extended periodically.
    pub fn is_even(&self) -> bool {
        let n = self.cuts.len();
        let tol = 1e-12;
        let cuts_ok = (0..n).all(|i| (self.cuts[i] - (1.0 - self.cuts[n - 1 - i])).abs() <= tol);
        let vals_ok = (0..self.values.len())
            .all(|i| self.values[i] == self.values[self.values.len() - 1 - i]);
        cuts_ok && vals_ok
    }
}

/// One nested inclusion: `size` is the full side length for squares or the
/// radius for circles; `phase` indexes the field's material table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestedShape {
    pub size: f64,
    pub phase: usize,
}

/// Unit-cell geometry variants.
#[derive(Debug, Clone, PartialEq)]
pub enum CellGeometry {
    /// Piecewise-constant in `x1` only; `cuts` as in [`StepProfile`],
    /// `phases[i]` is the phase of segment `i`.
    Laminate { cuts: Vec<f64>, phases: Vec<usize> },
    /// Concentric axis-aligned squares centered at `(1/2, 1/2)`, sides
    /// strictly decreasing, listed outermost first.
    NestedSquares { matrix_phase: usize, shapes: Vec<NestedShape> },
    /// Concentric circles centered at `(1/2, 1/2)`, radii strictly decreasing
    /// and at most `1/2`, listed outermost first.
    NestedCircles { matrix_phase: usize, shapes: Vec<NestedShape> },
    /// `mu(x) = g(x1) g(x2)` for an even positive step profile `g`, with a
    /// uniform density. The field carries no separate material table.
    SeparableProduct { factor: StepProfile, density: f64 },
    /// `size x size` grid of phase ids; cell `(i, j)` covers
    /// `[i/M, (i+1)/M) x [j/M, (j+1)/M)` in `(x1, x2)`.
    Raster { size: usize, cells: Vec<usize> },
}

impl CellGeometry {
    /// Area fraction of each region, in the documented per-variant order:
    /// laminate segments left to right; matrix then shapes outermost to
    /// innermost (net areas) for nested variants; distinct `mu` values in
    /// descending order for separable products; phase ids `0..=max` for
    /// rasters. Fractions sum to 1 within 1e-14.
    pub fn filling_fractions(&self) -> Vec<f64> {
        match self {
            CellGeometry::Laminate { cuts, phases } => {
                let mut out = Vec::with_capacity(phases.len());
                let mut prev = 0.0;
                for i in 0..phases.len() {
                    let end = if i == phases.len() - 1 { 1.0 } else { cuts[i] };
                    out.push(end - prev);
                    prev = end;
                }
                out
            }
            CellGeometry::NestedSquares { shapes, .. } => {
                nested_fractions(shapes, |s| s * s)
            }
            CellGeometry::NestedCircles { shapes, .. } => {
                nested_fractions(shapes, |r| core::f64::consts::PI * r * r)
            }
            CellGeometry::SeparableProduct { factor, .. } => {
                let mut by_value: Vec<(f64, f64)> = Vec::new();
                for (a1, b1, v1) in factor.pieces() {
                    for (a2, b2, v2) in factor.pieces() {
                        let mu = v1 * v2;
                        let area = (b1 - a1) * (b2 - a2);
                        match by_value.iter_mut().find(|(m, _)| *m == mu) {
                            Some((_, acc)) => *acc += area,
                            None => by_value.push((mu, area)),
                        }
                    }
                }
                by_value.sort_by(|a, b| b.0.total_cmp(&a.0));
                by_value.into_iter().map(|(_, a)| a).collect()
            }
            CellGeometry::Raster { size, cells } => {
                let nphase = cells.iter().copied().max().unwrap_or(0) + 1;
                let mut out = alloc::vec![0.0; nphase];
                let w = 1.0 / ((size * size) as f64);
                for &c in cells {
                    out[c] += w;
                }
                out
            }
        }
    }

    /// Breakpoints of the `x1`-dependence inside `(0,1)`, sorted.
    pub(crate) fn x1_breakpoints(&self) -> Vec<f64> {
        let mut pts = match self {
            CellGeometry::Laminate { cuts, .. } => cuts.clone(),
            CellGeometry::NestedSquares { shapes, .. } => shapes
                .iter()
                .flat_map(|s| [0.5 - s.size / 2.0, 0.5 + s.size / 2.0])
                .collect(),
            CellGeometry::NestedCircles { shapes, .. } => shapes
                .iter()
                .flat_map(|s| [0.5 - s.size, 0.5 + s.size])
                .collect(),
            CellGeometry::SeparableProduct { factor, .. } => factor.cuts().to_vec(),
            CellGeometry::Raster { size, .. } => {
                (1..*size).map(|i| i as f64 / *size as f64).collect()
            }
        };
        pts.retain(|&p| p > 0.0 && p < 1.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Breakpoints of the `x2`-cross-section at a fixed `x1`, sorted.
    pub(crate) fn x2_breakpoints(&self, x1: f64) -> Vec<f64> {
        let d = (x1 - 0.5).abs();
        let mut pts: Vec<f64> = match self {
            CellGeometry::Laminate { .. } => Vec::new(),
            CellGeometry::NestedSquares { shapes, .. } => shapes
                .iter()
                .filter(|s| s.size / 2.0 > d)
                .flat_map(|s| [0.5 - s.size / 2.0, 0.5 + s.size / 2.0])
                .collect(),
            CellGeometry::NestedCircles { shapes, .. } => shapes
                .iter()
                .filter(|s| s.size > d)
                .flat_map(|s| {
                    let h = (s.size * s.size - d * d).sqrt();
                    [0.5 - h, 0.5 + h]
                })
                .collect(),
            CellGeometry::SeparableProduct { factor, .. } => factor.cuts().to_vec(),
            CellGeometry::Raster { size, .. } => {
                (1..*size).map(|i| i as f64 / *size as f64).collect()
            }
        };
        pts.retain(|&p| p > 0.0 && p < 1.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

fn nested_fractions(shapes: &[NestedShape], area: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(shapes.len() + 1);
    let outer = shapes.first().map_or(0.0, |s| area(s.size));
    out.push(1.0 - outer);
    for i in 0..shapes.len() {
        let inner = shapes.get(i + 1).map_or(0.0, |s| area(s.size));
        out.push(area(shapes[i].size) - inner);
    }
    out
}

/// Symmetry metadata derived at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymmetryFlags {
    /// Invariant under the quarter turn about the cell center.
    pub cubic: bool,
    /// Even in `x1`: `mu(-x1, x2) = mu(x1, x2)`.
    pub even_x1: bool,
}

/// Exact area-weighted cell averages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellAverages {
    pub mu_avg: f64,
    pub mu_inv_avg: f64,
    pub rho_avg: f64,
}

/// A 1-periodic scalar shear field on the unit cell: geometry plus phase
/// values plus symmetry flags. Immutable after construction; all operations
/// are pure, so values are safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    geometry: CellGeometry,
    phases: Vec<Material>,
    symmetry: SymmetryFlags,
}

impl CellField {
    pub fn new(geometry: CellGeometry, phases: Vec<Material>) -> Result<Self, CellError> {
        validate_geometry(&geometry, &phases)?;
        let symmetry = derive_symmetry(&geometry, &phases);
        Ok(Self { geometry, phases, symmetry })
    }

    /// Uniform cell: one phase everywhere.
    pub fn constant(shear_modulus: f64, density: f64) -> Result<Self, CellError> {
        Self::new(
            CellGeometry::Laminate { cuts: Vec::new(), phases: alloc::vec![0] },
            alloc::vec![Material::new(shear_modulus, density)?],
        )
    }

    pub fn geometry(&self) -> &CellGeometry {
        &self.geometry
    }

    pub fn phases(&self) -> &[Material] {
        &self.phases
    }

    pub fn symmetry(&self) -> SymmetryFlags {
        self.symmetry
    }

    /// Pointwise `(mu, rho)` at `x = (x1, x2)`; coordinates are wrapped into
    /// `[0,1)`. Points on a phase boundary resolve to the innermost shape
    /// whose closed region contains them.
    pub fn evaluate(&self, x1: f64, x2: f64) -> (f64, f64) {
        let (x1, x2) = (wrap_unit(x1), wrap_unit(x2));
        match &self.geometry {
            CellGeometry::Laminate { cuts, phases } => {
                let idx = cuts.partition_point(|&c| c <= x1);
                let m = self.phases[phases[idx]];
                (m.shear_modulus, m.density)
            }
            CellGeometry::NestedSquares { matrix_phase, shapes } => {
                let d = (x1 - 0.5).abs().max((x2 - 0.5).abs());
                for s in shapes.iter().rev() {
                    if d <= s.size / 2.0 {
                        let m = self.phases[s.phase];
                        return (m.shear_modulus, m.density);
                    }
                }
                let m = self.phases[*matrix_phase];
                (m.shear_modulus, m.density)
            }
            CellGeometry::NestedCircles { matrix_phase, shapes } => {
                let d2 = (x1 - 0.5) * (x1 - 0.5) + (x2 - 0.5) * (x2 - 0.5);
                for s in shapes.iter().rev() {
                    if d2 <= s.size * s.size {
                        let m = self.phases[s.phase];
                        return (m.shear_modulus, m.density);
                    }
                }
                let m = self.phases[*matrix_phase];
                (m.shear_modulus, m.density)
            }
            CellGeometry::SeparableProduct { factor, density } => {
                (factor.value_at(x1) * factor.value_at(x2), *density)
            }
            CellGeometry::Raster { size, cells } => {
                let m = *size;
                let ix = ((x1 * m as f64) as usize).min(m - 1);
                let iy = ((x2 * m as f64) as usize).min(m - 1);
                let mat = self.phases[cells[ix * m + iy]];
                (mat.shear_modulus, mat.density)
            }
        }
    }

    /// Geometry unchanged, each phase's shear modulus replaced by its
    /// reciprocal, densities and symmetry flags preserved.
    pub fn inverted(&self) -> Self {
        let geometry = match &self.geometry {
            CellGeometry::SeparableProduct { factor, density } => CellGeometry::SeparableProduct {
                factor: factor.reciprocal(),
                density: *density,
            },
            g => g.clone(),
        };
        Self {
            geometry,
            phases: self.phases.iter().map(Material::inverted).collect(),
            symmetry: self.symmetry,
        }
    }

    /// Exact area-weighted averages of `mu`, `mu^{-1}`, and `rho`.
    pub fn averages(&self) -> CellAverages {
        let mut mu_avg = 0.0;
        let mut mu_inv_avg = 0.0;
        let mut rho_avg = 0.0;
        for (w, mu, rho) in self.regions() {
            mu_avg += w * mu;
            // written as a product so it matches the inverted field's mu_avg
            // bit for bit
            mu_inv_avg += w * (1.0 / mu);
            rho_avg += w * rho;
        }
        CellAverages { mu_avg, mu_inv_avg, rho_avg }
    }

    /// `(fraction, mu, rho)` for each constant region, in the same order as
    /// [`CellGeometry::filling_fractions`].
    pub fn regions(&self) -> Vec<(f64, f64, f64)> {
        let fracs = self.geometry.filling_fractions();
        match &self.geometry {
            CellGeometry::Laminate { phases, .. } => fracs
                .iter()
                .zip(phases)
                .map(|(&w, &p)| (w, self.phases[p].shear_modulus, self.phases[p].density))
                .collect(),
            CellGeometry::NestedSquares { matrix_phase, shapes }
            | CellGeometry::NestedCircles { matrix_phase, shapes } => {
                core::iter::once(*matrix_phase)
                    .chain(shapes.iter().map(|s| s.phase))
                    .zip(fracs)
                    .map(|(p, w)| (w, self.phases[p].shear_modulus, self.phases[p].density))
                    .collect()
            }
            CellGeometry::SeparableProduct { factor, density } => {
                let mut by_value: Vec<(f64, f64)> = Vec::new();
                for (a1, b1, v1) in factor.pieces() {
                    for (a2, b2, v2) in factor.pieces() {
                        let mu = v1 * v2;
                        let area = (b1 - a1) * (b2 - a2);
                        match by_value.iter_mut().find(|(m, _)| *m == mu) {
                            Some((_, acc)) => *acc += area,
                            None => by_value.push((mu, area)),
                        }
                    }
                }
                by_value.sort_by(|a, b| b.0.total_cmp(&a.0));
                by_value.into_iter().map(|(mu, w)| (w, mu, *density)).collect()
            }
            CellGeometry::Raster { cells, .. } => {
                let mut out: Vec<(f64, f64, f64)> = fracs
                    .iter()
                    .enumerate()
                    .map(|(p, &w)| {
                        let m = self.phases.get(p).copied().unwrap_or(self.phases[0]);
                        terms(w, m)
                    })
                    .collect();
                // phases may be referenced sparsely; drop unused ids
                let used: Vec<bool> = {
                    let n = fracs.len();
                    let mut u = alloc::vec![false; n];
                    for &c in cells {
                        u[c] = true;
                    }
                    u
                };
                let mut i = 0;
                out.retain(|_| {
                    let keep = used[i];
                    i += 1;
                    keep
                });
                out
            }
        }
    }

    /// Extremes of `mu` over the cell.
    pub fn mu_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (w, mu, _) in self.regions() {
            if w > 0.0 {
                lo = lo.min(mu);
                hi = hi.max(mu);
            }
        }
        (lo, hi)
    }

    /// Verify symmetries by sampling `mu` on the grid of cell centers
    /// `((i+1/2)/m, (j+1/2)/m)`: quarter-turn invariance about `(1/2,1/2)`
    /// and evenness in `x1`. Resolutions whose cell centers land exactly on
    /// phase boundaries follow the deterministic boundary tie-break.
    pub fn check_symmetries(&self, grid_resolution: usize) -> SymmetryFlags {
        let m = grid_resolution.max(2);
        let mut cubic = true;
        let mut even_x1 = true;
        for i in 0..m {
            for j in 0..m {
                let x1 = (i as f64 + 0.5) / m as f64;
                let x2 = (j as f64 + 0.5) / m as f64;
                let (mu, _) = self.evaluate(x1, x2);
                let (mu_rot, _) = self.evaluate(1.0 - x2, x1);
                let (mu_mir, _) = self.evaluate(1.0 - x1, x2);
                if mu_rot != mu {
                    cubic = false;
                }
                if mu_mir != mu {
                    even_x1 = false;
                }
            }
            if !cubic && !even_x1 {
                break;
            }
        }
        SymmetryFlags { cubic, even_x1 }
    }
}

fn terms(w: f64, m: Material) -> (f64, f64, f64) {
    (w, m.shear_modulus, m.density)
}

fn validate_geometry(geometry: &CellGeometry, phases: &[Material]) -> Result<(), CellError> {
    let check_phase = |id: usize| {
        if id >= phases.len() {
            Err(CellError::PhaseOutOfRange { id, count: phases.len() })
        } else {
            Ok(())
        }
    };
    match geometry {
        CellGeometry::Laminate { cuts, phases: seg } => {
            if seg.len() != cuts.len() + 1 {
                return Err(CellError::InvalidGeometry("laminate needs one phase per segment"));
            }
            if !cuts.windows(2).all(|w| w[0] < w[1])
                || cuts.iter().any(|&c| !(c > 0.0 && c < 1.0))
            {
                return Err(CellError::InvalidGeometry(
                    "laminate cuts must be strictly increasing inside (0,1)",
                ));
            }
            seg.iter().try_for_each(|&p| check_phase(p))
        }
        CellGeometry::NestedSquares { matrix_phase, shapes } => {
            check_phase(*matrix_phase)?;
            validate_nested(shapes, 1.0, "square side")?;
            shapes.iter().try_for_each(|s| check_phase(s.phase))
        }
        CellGeometry::NestedCircles { matrix_phase, shapes } => {
            check_phase(*matrix_phase)?;
            validate_nested(shapes, 0.5, "circle radius")?;
            shapes.iter().try_for_each(|s| check_phase(s.phase))
        }
        CellGeometry::SeparableProduct { factor, density } => {
            if !factor.is_even() {
                return Err(CellError::InvalidGeometry(
                    "separable factor must be even about the cell center",
                ));
            }
            if !(*density > 0.0 && density.is_finite()) {
                return Err(CellError::InvalidGeometry("separable density must be positive"));
            }
            if !phases.is_empty() {
                return Err(CellError::InvalidGeometry(
                    "separable product carries its own values; phase table must be empty",
                ));
            }
            Ok(())
        }
        CellGeometry::Raster { size, cells } => {
            if *size == 0 || cells.len() != size * size {
                return Err(CellError::InvalidGeometry("raster needs size^2 cells"));
            }
            cells.iter().try_for_each(|&c| check_phase(c))
        }
    }
}

fn validate_nested(shapes: &[NestedShape], max_size: f64, what: &'static str) -> Result<(), CellError> {
    if shapes.is_empty() {
        return Err(CellError::InvalidGeometry("nested geometry needs at least one shape"));
    }
    for s in shapes {
        if !(s.size > 0.0 && s.size <= max_size) {
            let _ = what;
            return Err(CellError::InvalidGeometry("shape size must fit inside the unit cell"));
        }
    }
    if !shapes.windows(2).all(|w| w[0].size > w[1].size) {
        return Err(CellError::InvalidGeometry("nested sizes must be strictly decreasing"));
    }
    Ok(())
}

fn derive_symmetry(geometry: &CellGeometry, phases: &[Material]) -> SymmetryFlags {
    match geometry {
        CellGeometry::Laminate { cuts, phases: seg } => {
            let constant = seg.windows(2).all(|w| {
                phases[w[0]].shear_modulus == phases[w[1]].shear_modulus
            });
            let n = cuts.len();
            let mirror_cuts =
                (0..n).all(|i| (cuts[i] - (1.0 - cuts[n - 1 - i])).abs() <= 1e-12);
            let mirror_vals = (0..seg.len()).all(|i| {
                phases[seg[i]].shear_modulus == phases[seg[seg.len() - 1 - i]].shear_modulus
            });
            SymmetryFlags { cubic: constant, even_x1: constant || (mirror_cuts && mirror_vals) }
        }
        CellGeometry::NestedSquares { .. } | CellGeometry::NestedCircles { .. } => {
            SymmetryFlags { cubic: true, even_x1: true }
        }
        // the factor is even by construction, which makes the product cubic
        CellGeometry::SeparableProduct { .. } => SymmetryFlags { cubic: true, even_x1: true },
        CellGeometry::Raster { size, cells } => {
            let m = *size;
            let val = |ix: usize, iy: usize| phases[cells[ix * m + iy]].shear_modulus;
            let mut cubic = true;
            let mut even = true;
            for ix in 0..m {
                for iy in 0..m {
                    if val(ix, iy) != val(m - 1 - iy, ix) {
                        cubic = false;
                    }
                    if val(ix, iy) != val(m - 1 - ix, iy) {
                        even = false;
                    }
                }
            }
            SymmetryFlags { cubic, even_x1: even }
        }
    }
}

#[inline]
pub(crate) fn wrap_unit(x: f64) -> f64 {
    let y = x - x.floor();
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(mu: f64) -> Material {
        Material::new(mu, 1.0).unwrap()
    }

    fn square_cell(side: f64, mu_in: f64, mu_out: f64) -> CellField {
        CellField::new(
            CellGeometry::NestedSquares {
                matrix_phase: 0,
                shapes: alloc::vec![NestedShape { size: side, phase: 1 }],
            },
            alloc::vec![mat(mu_out), mat(mu_in)],
        )
        .unwrap()
    }

    #[test]
    fn material_rejects_nonpositive() {
        assert!(Material::new(0.0, 1.0).is_err());
        assert!(Material::new(1.0, -2.0).is_err());
        assert!(Material::new(f64::NAN, 1.0).is_err());
        assert!(Material::new(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn constant_field_evaluates_everywhere() {
        let f = CellField::constant(2.0, 3.0).unwrap();
        assert_eq!(f.evaluate(0.1, 0.9), (2.0, 3.0));
        assert_eq!(f.evaluate(0.77, 0.13), (2.0, 3.0));
        assert_eq!(f.averages().rho_avg, 3.0);
    }

    #[test]
    fn square_evaluation_center_and_corner() {
        let f = square_cell(0.5, 4.0, 1.0);
        assert_eq!(f.evaluate(0.5, 0.5).0, 4.0);
        assert_eq!(f.evaluate(0.9, 0.9).0, 1.0);
        // boundary belongs to the innermost closed shape
        assert_eq!(f.evaluate(0.25, 0.5).0, 4.0);
    }

    #[test]
    fn invert_field_is_involution() {
        let f = square_cell(0.5, 4.0, 1.0);
        let ff = f.inverted().inverted();
        assert_eq!(f, ff);
        assert_eq!(f.inverted().evaluate(0.5, 0.5).0, 0.25);
        assert_eq!(f.inverted().symmetry(), f.symmetry());
    }

    #[test]
    fn averages_match_area_arithmetic() {
        let f = square_cell(0.5, 4.0, 1.0);
        let a = f.averages();
        assert!((a.mu_avg - 1.75).abs() < 1e-15);
        // <1/mu> = 0.75 + 0.25/4
        assert!((a.mu_inv_avg - 0.8125).abs() < 1e-15);

        let lam = CellField::new(
            CellGeometry::Laminate { cuts: alloc::vec![0.5], phases: alloc::vec![0, 1] },
            alloc::vec![mat(1.0), mat(4.0)],
        )
        .unwrap();
        let a = lam.averages();
        assert!((a.mu_avg - 2.5).abs() < 1e-15);
        assert!((a.mu_inv_avg - 0.625).abs() < 1e-15);
    }

    #[test]
    fn averages_of_inverted_swap_exactly() {
        let f = square_cell(0.7, 80e9, 1.48e9);
        let a = f.averages();
        let b = f.inverted().averages();
        assert_eq!(a.mu_inv_avg, b.mu_avg);
        assert_eq!(a.mu_avg, b.mu_inv_avg);
    }

    #[test]
    fn filling_fractions_examples() {
        let g = CellGeometry::NestedSquares {
            matrix_phase: 0,
            shapes: alloc::vec![NestedShape { size: 0.5, phase: 1 }],
        };
        let fr = g.filling_fractions();
        assert!((fr[0] - 0.75).abs() < 1e-15 && (fr[1] - 0.25).abs() < 1e-15);

        let g = CellGeometry::NestedCircles {
            matrix_phase: 0,
            shapes: alloc::vec![NestedShape { size: 0.25, phase: 1 }],
        };
        let fr = g.filling_fractions();
        let pi16 = core::f64::consts::PI / 16.0;
        assert!((fr[1] - pi16).abs() < 1e-15);
        assert!((fr[0] - (1.0 - pi16)).abs() < 1e-15);

        let g = CellGeometry::NestedSquares {
            matrix_phase: 0,
            shapes: alloc::vec![
                NestedShape { size: 0.8, phase: 1 },
                NestedShape { size: 0.4, phase: 2 },
            ],
        };
        let fr = g.filling_fractions();
        assert!((fr[0] - 0.36).abs() < 1e-15);
        assert!((fr[1] - 0.48).abs() < 1e-15);
        assert!((fr[2] - 0.16).abs() < 1e-15);
    }

    #[test]
    fn fractions_sum_to_one() {
        let cross = StepProfile::new(alloc::vec![0.25, 0.75], alloc::vec![1.0, 2.0, 1.0]).unwrap();
        let geoms = [
            CellGeometry::NestedSquares {
                matrix_phase: 0,
                shapes: alloc::vec![
                    NestedShape { size: 0.9, phase: 1 },
                    NestedShape { size: 0.3, phase: 0 },
                ],
            },
            CellGeometry::NestedCircles {
                matrix_phase: 0,
                shapes: alloc::vec![NestedShape { size: 0.41, phase: 1 }],
            },
            CellGeometry::SeparableProduct { factor: cross, density: 1.0 },
        ];
        for g in geoms {
            let s: f64 = g.filling_fractions().iter().sum();
            assert!((s - 1.0).abs() < 1e-14, "fractions of {g:?} sum to {s}");
        }
    }

    #[test]
    fn symmetry_flags_and_grid_check_agree() {
        let sq = square_cell(0.5, 4.0, 1.0);
        assert!(sq.symmetry().cubic && sq.symmetry().even_x1);
        let got = sq.check_symmetries(33);
        assert!(got.cubic && got.even_x1);

        let lam = CellField::new(
            CellGeometry::Laminate { cuts: alloc::vec![0.5], phases: alloc::vec![0, 1] },
            alloc::vec![mat(1.0), mat(4.0)],
        )
        .unwrap();
        assert!(!lam.symmetry().cubic);
        assert!(!lam.check_symmetries(16).cubic);

        let cross = StepProfile::new(alloc::vec![0.25, 0.75], alloc::vec![1.0, 2.0, 1.0]).unwrap();
        let sep = CellField::new(
            CellGeometry::SeparableProduct { factor: cross, density: 1.0 },
            Vec::new(),
        )
        .unwrap();
        let got = sep.check_symmetries(33);
        assert!(got.cubic && got.even_x1);
    }

    #[test]
    fn geometry_validation_rejects_bad_input() {
        assert!(CellField::new(
            CellGeometry::NestedSquares {
                matrix_phase: 0,
                shapes: alloc::vec![
                    NestedShape { size: 0.4, phase: 1 },
                    NestedShape { size: 0.4, phase: 1 },
                ],
            },
            alloc::vec![mat(1.0), mat(2.0)],
        )
        .is_err());
        assert!(CellField::new(
            CellGeometry::NestedCircles {
                matrix_phase: 0,
                shapes: alloc::vec![NestedShape { size: 0.6, phase: 1 }],
            },
            alloc::vec![mat(1.0), mat(2.0)],
        )
        .is_err());
        assert!(CellField::new(
            CellGeometry::Laminate { cuts: alloc::vec![0.5], phases: alloc::vec![0, 3] },
            alloc::vec![mat(1.0), mat(2.0)],
        )
        .is_err());
        // odd factor is rejected
        let odd = StepProfile::new(alloc::vec![0.3], alloc::vec![1.0, 2.0]).unwrap();
        assert!(CellField::new(
            CellGeometry::SeparableProduct { factor: odd, density: 1.0 },
            Vec::new(),
        )
        .is_err());
    }

    #[test]
    fn raster_symmetry_detection() {
        // 2x2 checkerboard: cubic under quarter turn? val(ix,iy) vs val(1-iy,ix):
        // (0,0)=a,(1,0)=b,(0,1)=b,(1,1)=a -> rotation maps (0,0)->(1,0): a vs b
        let f = CellField::new(
            CellGeometry::Raster { size: 2, cells: alloc::vec![0, 1, 1, 0] },
            alloc::vec![mat(1.0), mat(2.0)],
        )
        .unwrap();
        assert!(!f.symmetry().cubic);
        // uniform raster is cubic
        let f = CellField::new(
            CellGeometry::Raster { size: 2, cells: alloc::vec![0, 0, 0, 0] },
            alloc::vec![mat(1.0)],
        )
        .unwrap();
        assert!(f.symmetry().cubic && f.symmetry().even_x1);
    }
}
