//! Sweep configuration: a single versioned JSON document with fail-fast
//! validation (unknown keys are rejected).

use serde::Deserialize;
use std::path::PathBuf;
use thiserror::Error;

use shearbounds_core::cell::{CellField, CellGeometry, Material, NestedShape, StepProfile};
use shearbounds_core::mm::{MmBackend, MmOptions};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported schema_version {0} (expected 1)")]
    SchemaVersion(u32),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Conventional handbook constants for the named materials. These are
/// defaults of the config layer, not reference data.
pub const MATERIAL_TABLE: &[(&str, f64, f64)] = &[
    ("steel", 80e9, 7800.0),
    ("epoxy", 1.48e9, 1180.0),
    ("silicon", 68e9, 2330.0),
];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema_version: u32,
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub materials: Vec<MaterialConfig>,
    pub n_values: Vec<i32>,
    #[serde(default)]
    pub f_grid: Option<FGrid>,
    pub method: Method,
    #[serde(default)]
    pub backend: Option<Backend>,
    /// Product-rule step count, or Peano series order.
    #[serde(default)]
    pub steps: Option<usize>,
    /// Bypass the cubic-symmetry gate (laminate tests).
    #[serde(default)]
    pub oracle_mode: bool,
    /// Initial `x1` step count for circle profiles.
    #[serde(default)]
    pub circle_steps: Option<usize>,
    /// Relative self-change threshold for circle step refinement.
    #[serde(default)]
    pub refine_tol: Option<f64>,
    pub format: OutputFormatConfig,
    pub output: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometryConfig {
    /// Concentric squares. Give either explicit `sizes` (side lengths,
    /// strictly decreasing) or `size_ratios` to sweep: per filling fraction
    /// `f` the innermost side is `sqrt(f)` and the other sides scale
    /// proportionally (ratios are normalized so the last equals 1).
    NestedSquares {
        #[serde(default)]
        sizes: Option<Vec<f64>>,
        #[serde(default)]
        size_ratios: Option<Vec<f64>>,
    },
    /// Concentric circles; `sizes` are radii, and under `size_ratios` the
    /// innermost radius per `f` is `sqrt(f / pi)`.
    NestedCircles {
        #[serde(default)]
        sizes: Option<Vec<f64>>,
        #[serde(default)]
        size_ratios: Option<Vec<f64>>,
    },
    /// Piecewise in `x1`: `phases[i]` is the material of segment `i`.
    /// Not sweepable by filling fraction.
    Laminate { cuts: Vec<f64>, phases: Vec<usize> },
    /// `mu(x) = g(x1) g(x2)` with an even step profile `g`; carries its own
    /// uniform density, so `materials` must be empty. Not sweepable.
    SeparableProduct { cuts: Vec<f64>, values: Vec<f64>, density: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum MaterialConfig {
    Named { name: String },
    Explicit { mu: f64, rho: f64 },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pwe,
    Mm,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Exp,
    Product,
    Peano,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormatConfig {
    Csv,
    Json,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: SweepConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if self.schema_version != 1 {
            return Err(ConfigError::SchemaVersion(self.schema_version));
        }
        if self.n_values.is_empty() {
            return bad("n_values must not be empty".into());
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n < 0) {
            return bad(format!("truncation orders must be nonnegative, got {n}"));
        }
        if let Some(g) = &self.f_grid {
            if !(g.start > 0.0 && g.stop < 1.0 && g.start <= g.stop) || g.count == 0 {
                return bad(format!(
                    "f_grid must satisfy 0 < start <= stop < 1 and count >= 1, got {g:?}"
                ));
            }
        }
        match &self.geometry {
            GeometryConfig::NestedSquares { sizes, size_ratios }
            | GeometryConfig::NestedCircles { sizes, size_ratios } => {
                match (sizes, size_ratios) {
                    (Some(_), Some(_)) => {
                        return bad("give either sizes or size_ratios, not both".into())
                    }
                    (None, None) => {
                        return bad("nested geometry needs sizes or size_ratios".into())
                    }
                    (Some(s), None) => {
                        if self.f_grid.is_some() {
                            return bad(
                                "explicit sizes cannot be swept; drop f_grid or use size_ratios"
                                    .into(),
                            );
                        }
                        if s.is_empty() {
                            return bad("sizes must not be empty".into());
                        }
                    }
                    (None, Some(r)) => {
                        if self.f_grid.is_none() {
                            return bad("size_ratios needs an f_grid to sweep".into());
                        }
                        if r.is_empty() || r.iter().any(|&x| x <= 0.0) {
                            return bad("size_ratios must be positive".into());
                        }
                        if !r.windows(2).all(|w| w[0] > w[1]) {
                            return bad("size_ratios must be strictly decreasing".into());
                        }
                    }
                }
                let shells = match &self.geometry {
                    GeometryConfig::NestedSquares { sizes, size_ratios }
                    | GeometryConfig::NestedCircles { sizes, size_ratios } => {
                        sizes.as_ref().map(Vec::len).or(size_ratios.as_ref().map(Vec::len))
                    }
                    _ => None,
                }
                .unwrap_or(0);
                if self.materials.len() != shells + 1 {
                    return bad(format!(
                        "nested geometry with {shells} shapes needs {} materials (matrix first), got {}",
                        shells + 1,
                        self.materials.len()
                    ));
                }
            }
            GeometryConfig::Laminate { cuts, phases } => {
                if self.f_grid.is_some() {
                    return bad("laminates cannot be swept by filling fraction".into());
                }
                if phases.len() != cuts.len() + 1 {
                    return bad("laminate needs one phase id per segment".into());
                }
                if phases.iter().any(|&p| p >= self.materials.len()) {
                    return bad("laminate phase id out of range".into());
                }
            }
            GeometryConfig::SeparableProduct { .. } => {
                if self.f_grid.is_some() {
                    return bad("separable products cannot be swept by filling fraction".into());
                }
                if !self.materials.is_empty() {
                    return bad("separable products carry their own values; omit materials".into());
                }
            }
        }
        if matches!(self.backend, Some(Backend::Product)) && self.steps.is_none() {
            return bad("the product backend needs steps".into());
        }
        Ok(())
    }

    pub fn resolved_materials(&self) -> Result<Vec<Material>, ConfigError> {
        self.materials
            .iter()
            .map(|m| match m {
                MaterialConfig::Named { name } => MATERIAL_TABLE
                    .iter()
                    .find(|(n, _, _)| n == name)
                    .ok_or_else(|| ConfigError::Invalid(format!("unknown material {name:?}")))
                    .and_then(|&(_, mu, rho)| {
                        Material::new(mu, rho)
                            .map_err(|e| ConfigError::Invalid(e.to_string()))
                    }),
                MaterialConfig::Explicit { mu, rho } => Material::new(*mu, *rho)
                    .map_err(|e| ConfigError::Invalid(e.to_string())),
            })
            .collect()
    }

    /// The filling fractions this config runs at. Parameterized geometries
    /// enumerate the grid; explicit ones run at their single intrinsic `f`.
    pub fn f_values(&self) -> Vec<f64> {
        match (&self.f_grid, self.intrinsic_f()) {
            (Some(g), _) => {
                if g.count == 1 {
                    vec![g.start]
                } else {
                    (0..g.count)
                        .map(|i| {
                            g.start + (g.stop - g.start) * i as f64 / (g.count - 1) as f64
                        })
                        .collect()
                }
            }
            (None, f) => vec![f],
        }
    }

    /// Intrinsic filling fraction of an explicitly sized geometry: innermost
    /// shape area for nested variants, complement of the first segment for
    /// laminates, area at the top value for separable products.
    fn intrinsic_f(&self) -> f64 {
        match &self.geometry {
            GeometryConfig::NestedSquares { sizes: Some(s), .. } => {
                s.last().map_or(0.0, |a| a * a)
            }
            GeometryConfig::NestedCircles { sizes: Some(s), .. } => {
                s.last().map_or(0.0, |r| std::f64::consts::PI * r * r)
            }
            GeometryConfig::Laminate { cuts, .. } => {
                1.0 - cuts.first().copied().unwrap_or(1.0)
            }
            GeometryConfig::SeparableProduct { cuts, values, .. } => {
                StepProfile::new(cuts.clone(), values.clone())
                    .map(|g| {
                        let top = g.values().iter().cloned().fold(f64::MIN, f64::max);
                        let len: f64 = g
                            .pieces()
                            .filter(|&(_, _, v)| v == top)
                            .map(|(a, b, _)| b - a)
                            .sum();
                        len * len
                    })
                    .unwrap_or(0.0)
            }
            _ => 0.0,
        }
    }

    /// Build the unit cell at filling fraction `f`.
    pub fn realize(&self, f: f64) -> Result<CellField, String> {
        let materials = self.resolved_materials().map_err(|e| e.to_string())?;
        let geometry = match &self.geometry {
            GeometryConfig::NestedSquares { sizes, size_ratios } => {
                let sides = match (sizes, size_ratios) {
                    (Some(s), _) => s.clone(),
                    (_, Some(r)) => scaled_sizes(r, f.sqrt()),
                    _ => unreachable!("validated"),
                };
                CellGeometry::NestedSquares {
                    matrix_phase: 0,
                    shapes: shapes_from(&sides),
                }
            }
            GeometryConfig::NestedCircles { sizes, size_ratios } => {
                let radii = match (sizes, size_ratios) {
                    (Some(s), _) => s.clone(),
                    (_, Some(r)) => scaled_sizes(r, (f / std::f64::consts::PI).sqrt()),
                    _ => unreachable!("validated"),
                };
                CellGeometry::NestedCircles {
                    matrix_phase: 0,
                    shapes: shapes_from(&radii),
                }
            }
            GeometryConfig::Laminate { cuts, phases } => CellGeometry::Laminate {
                cuts: cuts.clone(),
                phases: phases.clone(),
            },
            GeometryConfig::SeparableProduct { cuts, values, density } => {
                let factor =
                    StepProfile::new(cuts.clone(), values.clone()).map_err(|e| e.to_string())?;
                CellGeometry::SeparableProduct { factor, density: *density }
            }
        };
        CellField::new(geometry, materials).map_err(|e| e.to_string())
    }

    pub fn mm_options(&self) -> MmOptions {
        let mut opts = MmOptions {
            oracle_mode: self.oracle_mode,
            ..MmOptions::default()
        };
        if let Some(k) = self.circle_steps {
            opts.circle_steps = k;
        }
        if let Some(t) = self.refine_tol {
            opts.refine_tol = t;
        }
        opts.backend = match self.backend {
            None | Some(Backend::Exp) => None,
            Some(Backend::Product) => Some(MmBackend::Product {
                steps: self.steps.unwrap_or(4096),
            }),
            Some(Backend::Peano) => Some(MmBackend::Peano {
                order: self.steps.unwrap_or(8),
            }),
        };
        opts
    }
}

fn scaled_sizes(ratios: &[f64], innermost: f64) -> Vec<f64> {
    let last = *ratios.last().expect("validated nonempty");
    ratios.iter().map(|r| r / last * innermost).collect()
}

fn shapes_from(sizes: &[f64]) -> Vec<NestedShape> {
    sizes
        .iter()
        .enumerate()
        .map(|(i, &size)| NestedShape { size, phase: i + 1 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> String {
        r#"{
            "schema_version": 1,
            "geometry": {"kind": "nested_squares", "size_ratios": [1.0]},
            "materials": [{"name": "steel"}, {"name": "epoxy"}],
            "n_values": [0, 1],
            "f_grid": {"start": 0.1, "stop": 0.5, "count": 3},
            "method": "both",
            "format": "csv",
            "output": "out.csv"
        }"#
        .into()
    }

    #[test]
    fn parses_and_realizes() {
        let cfg = SweepConfig::from_json(&base()).unwrap();
        let fs = cfg.f_values();
        assert_eq!(fs.len(), 3);
        for (got, want) in fs.iter().zip([0.1, 0.3, 0.5]) {
            assert!((got - want).abs() < 1e-15);
        }
        let field = cfg.realize(0.25).unwrap();
        assert_eq!(field.evaluate(0.5, 0.5).0, 1.48e9);
        assert_eq!(field.evaluate(0.01, 0.01).0, 80e9);
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = base().replace("\"method\"", "\"surprise\": 1, \"method\"");
        assert!(matches!(SweepConfig::from_json(&text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn rejects_bad_schema_version() {
        let text = base().replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(
            SweepConfig::from_json(&text),
            Err(ConfigError::SchemaVersion(2))
        ));
    }

    #[test]
    fn rejects_explicit_sizes_with_grid() {
        let text = base().replace("\"size_ratios\": [1.0]", "\"sizes\": [0.5]");
        assert!(matches!(SweepConfig::from_json(&text), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn rejects_grid_outside_open_interval() {
        let text = base().replace("\"start\": 0.1", "\"start\": 0.0");
        assert!(SweepConfig::from_json(&text).is_err());
    }

    #[test]
    fn rejects_wrong_material_count() {
        let text = base().replace(r#"[{"name": "steel"}, {"name": "epoxy"}]"#, r#"[{"name": "steel"}]"#);
        assert!(SweepConfig::from_json(&text).is_err());
    }

    #[test]
    fn unknown_material_is_rejected() {
        let text = base().replace("epoxy", "unobtainium");
        let cfg = SweepConfig::from_json(&text).unwrap();
        assert!(cfg.resolved_materials().is_err());
    }

    #[test]
    fn explicit_material_values() {
        let text = base().replace(
            r#"{"name": "epoxy"}"#,
            r#"{"mu": 2.0e9, "rho": 1000.0}"#,
        );
        let cfg = SweepConfig::from_json(&text).unwrap();
        let mats = cfg.resolved_materials().unwrap();
        assert_eq!(mats[1].shear_modulus(), 2.0e9);
    }
}
