//! TOML run configuration.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::amalgam::{AmalgamSpace, LocalComponent};
use crate::components::{DoublingProbes, GlobalComponent, WeightFunction};
use crate::convolution::{Pairing, RelationId};
use crate::discretization::{AxbLatticeSpec, BupuKind};
use crate::error::{Error, Result};
use crate::family::{FamilySpec, TestFunction};
use crate::grid::{AxisSpec, Grid};
use crate::group::GroupSpec;
use crate::window::Window;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Overrides the seeds of every family and estimator when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Refinement levels for commands that refine.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<AmalgamSpace>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<TestFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doubling: Option<DoublingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equivalence: Option<EquivalenceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axb: Option<AxbConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ReportConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub axes: Vec<AxisSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoublingConfig {
    pub weight: WeightFunction,
    /// Dimension of `ℝⁿ`; defaults to the group's `n`, else 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<DoublingProbes>,
}

/// Point set and partition for the discrete/continuous comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceConfig {
    /// Regular set `k·spacing`, `k ∈ [k_lo, k_hi]ⁿ` (abelian groups).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_range: Option<(i64, i64)>,
    /// Lattice on `ax+b`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<AxbLatticeSpec>,
    /// Window `U` of the partition.
    pub window: Window,
    #[serde(default = "default_bupu")]
    pub bupu: BupuKind,
    /// Fail when `max ratio / min ratio` exceeds this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_spread: Option<f64>,
}

fn default_bupu() -> BupuKind {
    BupuKind::Hats
}

/// All nonzero sequences on `{0,…,support-1}` with entries from `values`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumerateConfig {
    pub support: usize,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub relation: RelationId,
    /// Exponent of the algebra relation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Weight of the algebra relation, or of the right factor otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_bound: Option<f64>,
    #[serde(default)]
    pub pairing: Pairing,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumerate: Option<EnumerateConfig>,
    /// Family of right factors; defaults to the left family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right_family: Option<FamilySpec>,
    /// Doubling exponent for the `ax+b` relation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxbConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<AxbLatticeSpec>,
    #[serde(default = "default_weight")]
    pub weight: WeightFunction,
    #[serde(default = "one", with = "crate::components::exponent")]
    pub p: f64,
    #[serde(default = "one", with = "crate::components::exponent")]
    pub q: f64,
    /// Coefficients in lattice order for `discrete-norm`; random when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    /// Random coefficient vectors when `lambda` is absent.
    #[serde(default = "default_count")]
    pub count: usize,
    /// `(y, b)` for `translation-bound`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Window of the amalgam spaces in `verify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
}

fn default_weight() -> WeightFunction {
    WeightFunction::constant(1.0)
}
fn one() -> f64 {
    1.0
}
fn default_count() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    pub inputs: Vec<String>,
}

/// 1-based line of byte offset `pos`.
fn line_of(src: &str, pos: usize) -> usize {
    src[..pos.min(src.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

/// Line of the first table header or key assignment named `key`, else 1.
pub fn locate(src: &str, key: &str) -> usize {
    for (i, line) in src.lines().enumerate() {
        let t = line.trim_start();
        let header = t.strip_prefix("[[").or_else(|| t.strip_prefix('['));
        if let Some(h) = header {
            let name = h.trim_end_matches(']').trim();
            if name == key || name.starts_with(&format!("{key}.")) {
                return i + 1;
            }
        } else if let Some(rest) = t.strip_prefix(key) {
            if rest.trim_start().starts_with('=') {
                return i + 1;
            }
        }
    }
    1
}

impl RunConfig {
    pub fn parse(src: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| Error::Config {
            line: e.span().map_or(1, |s| line_of(src, s.start)),
            message: e.message().to_string(),
        })?;
        cfg.validate(src)?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config {
            line: 0,
            message: e.to_string(),
        })
    }

    /// Semantic checks, anchored at the offending section of `src`.
    pub fn validate(&self, src: &str) -> Result<()> {
        let at = |key: &str, e: Error| Error::Config {
            line: locate(src, key),
            message: e.to_string(),
        };
        if let Some(g) = self.group {
            g.validate().map_err(|e| at("group", e))?;
        }
        if self.grid.is_some() {
            self.build_grid().map_err(|e| at("grid", e))?;
        }
        if let Some(s) = &self.space {
            s.global.validate().map_err(|e| at("space", e))?;
            if let Some(g) = self.group {
                s.global.check_group(g).map_err(|e| at("space", e))?;
                s.window.validate(g).map_err(|e| at("space", e))?;
            }
        }
        for (key, w) in [
            ("doubling", self.doubling.as_ref().map(|d| &d.weight)),
            ("verify", self.verify.as_ref().and_then(|v| v.weight.as_ref())),
            ("axb", self.axb.as_ref().map(|a| &a.weight)),
        ] {
            if let Some(w) = w {
                w.validate().map_err(|e| at(key, e))?;
            }
        }
        if let Some(v) = &self.verify {
            if v.relation == RelationId::CorConvLp && v.p.is_some_and(|p| !(p > 0.0 && p <= 1.0)) {
                return Err(at("verify", Error::param("p", "the algebra property needs 0 < p ≤ 1")));
            }
        }
        Ok(())
    }

    pub fn group(&self) -> Result<GroupSpec> {
        self.group.ok_or_else(|| Error::Config {
            line: 1,
            message: "missing `group`".into(),
        })
    }

    pub fn build_grid(&self) -> Result<Arc<Grid>> {
        let g = self.grid.as_ref().ok_or_else(|| Error::Config {
            line: 1,
            message: "missing [grid]".into(),
        })?;
        Grid::new(self.group()?, g.axes.clone())
    }

    pub fn space(&self) -> Result<&AmalgamSpace> {
        self.space.as_ref().ok_or_else(|| Error::Config {
            line: 1,
            message: "missing [space]".into(),
        })
    }

    /// Explicit functions followed by the generated family.
    pub fn test_functions(&self) -> Result<Vec<TestFunction>> {
        let mut out = self.functions.clone();
        if let Some(f) = &self.family {
            out.extend(self.seeded(f).generate(self.group()?)?);
        }
        Ok(out)
    }

    /// `spec` with its seed replaced by the global override.
    pub fn seeded(&self, spec: &FamilySpec) -> FamilySpec {
        let mut s = spec.clone();
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        s
    }

    /// Configuration used by `verify cor_conv_Lp` without a config file:
    /// `ℓ^{1/2}` on `ℤ` over all sequences on three points with entries in
    /// `{-1, 0, 1, 2}`.
    pub fn default_algebra() -> RunConfig {
        RunConfig {
            seed: None,
            refine: None,
            group: Some(GroupSpec::Lattice(1)),
            grid: Some(GridConfig {
                axes: vec![AxisSpec::Integer { lo: -2, hi: 8 }],
            }),
            space: Some(AmalgamSpace::new(
                LocalComponent::Linf,
                GlobalComponent::lp(0.5),
                Window::singleton(1),
            )),
            functions: Vec::new(),
            family: None,
            doubling: None,
            equivalence: None,
            verify: Some(VerifyConfig {
                relation: RelationId::CorConvLp,
                p: Some(0.5),
                weight: Some(WeightFunction::constant(1.0)),
                expected_bound: Some(1.0),
                pairing: Pairing::Product,
                enumerate: Some(EnumerateConfig {
                    support: 3,
                    values: vec![-1.0, 0.0, 1.0, 2.0],
                }),
                right_family: None,
                alpha: None,
            }),
            axb: None,
            report: None,
        }
    }
}
