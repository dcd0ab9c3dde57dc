//! Convolution `(F*G)(z) = ∫ F(y) G(y⁻¹z) dy` by quadrature, and empirical
//! checks of convolution relations between amalgam spaces.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amalgam::{
    control_function, involution, translate, AmalgamSpace, DiscreteMeasure, Direction, Involution,
    LocalComponent,
};
use crate::components::{GlobalComponent, NormValue, WeightFunction};
use crate::error::{Error, Result};
use crate::family::TestFunction;
use crate::grid::{Axis, AxisSpec, Grid, SampledFunction, MAX_DIM};
use crate::group::GroupSpec;
use crate::window::Window;

/// Convolution result on the left factor's grid.
#[derive(Clone, Debug)]
pub struct Convolved {
    pub function: SampledFunction,
    /// `1 - ∫(|F|*|G|) / (∫|F|·∫|G|)`: the share of the product mass that
    /// fell outside the output grid (plus quadrature error).
    pub truncation: f64,
}

impl Convolved {
    pub fn warning(&self) -> Option<String> {
        (self.truncation > 1e-3).then(|| {
            format!(
                "output grid misses an estimated {:.3}% of the convolution mass",
                100.0 * self.truncation
            )
        })
    }
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `(step, first node number)` of an equispaced node axis.
fn node_axis(ax: &Axis) -> Option<(f64, i64)> {
    match ax.spec() {
        AxisSpec::Nodes { h, k_lo, .. } => Some((*h, *k_lo)),
        AxisSpec::Integer { lo, .. } => Some((1.0, *lo)),
        _ => None,
    }
}

fn log_node_axis(ax: &Axis) -> Option<(f64, i64)> {
    match ax.spec() {
        AxisSpec::GeometricNodes { log_step, k_lo, .. } => Some((*log_step, *k_lo)),
        _ => None,
    }
}

fn same_step(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

struct Nonzero {
    idx: usize,
    multi: [usize; MAX_DIM],
    fw: Complex64,
    aw: f64,
}

fn nonzeros(f: &SampledFunction) -> Vec<Nonzero> {
    let grid = f.grid();
    let dim = grid.dim();
    f.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != zero())
        .map(|(i, v)| {
            let mut multi = [0; MAX_DIM];
            multi[..dim].copy_from_slice(&grid.multi_index(i));
            let w = grid.weights()[i];
            Nonzero {
                idx: i,
                multi,
                fw: v * w,
                aw: v.norm() * w,
            }
        })
        .collect()
}

fn l1(f: &SampledFunction) -> f64 {
    f.abs()
        .iter()
        .zip(f.grid().weights())
        .filter(|(v, _)| **v > 0.0)
        .map(|(v, w)| v * w)
        .sum()
}

/// `F*G` evaluated at every sample of `F`'s grid.
pub fn convolve(f: &SampledFunction, g: &SampledFunction) -> Result<Convolved> {
    if f.group() != g.group() {
        return Err(Error::GroupMismatch(format!(
            "cannot convolve {} with {} data",
            f.group().name(),
            g.group().name()
        )));
    }
    let (vals, abs) = if let Some(r) = aligned_abelian(f, g) {
        r
    } else if let Some(r) = aligned_axb(f, g) {
        r
    } else {
        generic(f, g)
    };
    let total: f64 = abs.iter().zip(f.grid().weights()).map(|(a, w)| a * w).sum();
    let expected = l1(f) * l1(g);
    let truncation = if expected > 0.0 && expected.is_finite() {
        (1.0 - total / expected).max(0.0)
    } else {
        0.0
    };
    Ok(Convolved {
        function: SampledFunction::new(f.grid().clone(), vals)?,
        truncation,
    })
}

type Pair = (Vec<Complex64>, Vec<f64>);

/// Node grids with matching steps on `ℝⁿ` / `ℤⁿ`: `y⁻¹z` is a node of `G`.
fn aligned_abelian(f: &SampledFunction, g: &SampledFunction) -> Option<Pair> {
    let (fg, gg) = (f.grid(), g.grid());
    if !fg.group().is_in_group() {
        return None;
    }
    let dim = fg.dim();
    let mut g_first = [0i64; MAX_DIM];
    let mut g_len = [0usize; MAX_DIM];
    for d in 0..dim {
        let (hf, _) = node_axis(fg.axis(d))?;
        let (hg, kg) = node_axis(gg.axis(d))?;
        if !same_step(hf, hg) {
            return None;
        }
        g_first[d] = kg;
        g_len[d] = gg.axis(d).len();
    }
    let nz = nonzeros(f);
    let gv = g.values();
    let gs = gg.strides();
    let out: Vec<(Complex64, f64)> = (0..fg.len())
        .into_par_iter()
        .map(|i| {
            let m = fg.multi_index(i);
            let (mut acc, mut aacc) = (zero(), 0.0);
            'nz: for y in &nz {
                let mut gi = 0usize;
                for d in 0..dim {
                    let k = m[d] as i64 - y.multi[d] as i64 - g_first[d];
                    if k < 0 || k as usize >= g_len[d] {
                        continue 'nz;
                    }
                    gi += k as usize * gs[d];
                }
                let v = gv[gi];
                acc += y.fw * v;
                aacc += y.aw * v.norm();
            }
            (acc, aacc)
        })
        .collect();
    Some(out.into_iter().unzip())
}

/// `ax+b` with `n = 1`, node `x`-axes of equal step and log-node `a`-axes of
/// equal step: the dilation part of `y⁻¹z` is a node of `G`, the
/// translation part is interpolated linearly.
fn aligned_axb(f: &SampledFunction, g: &SampledFunction) -> Option<Pair> {
    let (fg, gg) = (f.grid(), g.grid());
    if fg.group() != GroupSpec::Axb(1) {
        return None;
    }
    let (hf, _) = node_axis(fg.axis(0))?;
    let (hg, kg) = node_axis(gg.axis(0))?;
    let (df, jf) = log_node_axis(fg.axis(1))?;
    let (dg, jg) = log_node_axis(gg.axis(1))?;
    if !same_step(hf, hg) || !same_step(df, dg) {
        return None;
    }
    let (nxf, naf) = (fg.axis(0).len(), fg.axis(1).len());
    let (nxg, nag) = (gg.axis(0).len(), gg.axis(1).len());
    let gv = g.values();
    let ga: Vec<f64> = g.abs();
    // per G row: nonzero x index range
    let g_rows: Vec<Option<(usize, usize)>> = (0..nag)
        .map(|r| {
            let row = &gv[r * nxg..(r + 1) * nxg];
            let first = row.iter().position(|v| *v != zero())?;
            let last = row.iter().rposition(|v| *v != zero())?;
            Some((first, last))
        })
        .collect();
    let nz = nonzeros(f);
    let mut by_row: Vec<Vec<&Nonzero>> = vec![Vec::new(); naf];
    for y in &nz {
        by_row[y.multi[1]].push(y);
    }
    let ymin: Vec<i64> = by_row.iter().map(|r| r.first().map_or(0, |y| y.multi[0] as i64)).collect();
    let ymax: Vec<i64> = by_row.iter().map(|r| r.last().map_or(0, |y| y.multi[0] as i64)).collect();
    let rows: Vec<Vec<(Complex64, f64)>> = (0..naf)
        .into_par_iter()
        .map(|iz| {
            let mut out = vec![(zero(), 0.0); nxf];
            let jz = jf + iz as i64;
            for (iy, ys) in by_row.iter().enumerate() {
                if ys.is_empty() {
                    continue;
                }
                let jy = jf + iy as i64;
                let r = jz - jy - jg;
                if r < 0 || r as usize >= nag {
                    continue;
                }
                let r = r as usize;
                let Some((gl, gh)) = g_rows[r] else { continue };
                let a_y = (jy as f64 * df).exp();
                let grow = &gv[r * nxg..(r + 1) * nxg];
                let arow = &ga[r * nxg..(r + 1) * nxg];
                // dilated kernel D[s] = G(s/a_y) for node offsets s = kz - ky
                // within one step of G's nonzero node range
                // and landing on the output row
                let s_lo = ((a_y * (kg + gl as i64 - 1) as f64).ceil() as i64).max(-ymax[iy]);
                let s_hi = ((a_y * (kg + gh as i64 + 1) as f64).floor() as i64).min(nxf as i64 - 1 - ymin[iy]);
                if s_lo > s_hi {
                    continue;
                }
                let kernel: Vec<(i64, Complex64, f64)> = (s_lo..=s_hi)
                    .filter_map(|s| {
                        let t = s as f64 / a_y - kg as f64;
                        // same convention as the generic interpolation: zero
                        // beyond the outer half cells, clamped inside them
                        if t < -0.5 || t > nxg as f64 - 0.5 {
                            return None;
                        }
                        let (v, av) = if t <= 0.0 {
                            (grow[0], arow[0])
                        } else if t >= (nxg - 1) as f64 {
                            (grow[nxg - 1], arow[nxg - 1])
                        } else {
                            let i0 = t.floor() as usize;
                            let w = t - i0 as f64;
                            (
                                grow[i0] * (1.0 - w) + grow[i0 + 1] * w,
                                arow[i0] * (1.0 - w) + arow[i0 + 1] * w,
                            )
                        };
                        (av != 0.0).then_some((s, v, av))
                    })
                    .collect();
                if kernel.is_empty() {
                    continue;
                }
                let (k_first, k_last) = (kernel[0].0, kernel[kernel.len() - 1].0);
                for y in ys {
                    let base = y.multi[0] as i64;
                    if base + k_last < 0 || base + k_first >= nxf as i64 {
                        continue;
                    }
                    for &(s, v, av) in &kernel {
                        let m = base + s;
                        if m < 0 || m >= nxf as i64 {
                            continue;
                        }
                        let o = &mut out[m as usize];
                        o.0 += y.fw * v;
                        o.1 += y.aw * av;
                    }
                }
            }
            out
        })
        .collect();
    Some(rows.into_iter().flatten().unzip())
}

fn generic(f: &SampledFunction, g: &SampledFunction) -> Pair {
    let (fg, gg) = (f.grid(), g.grid());
    let group = fg.group();
    let dim = fg.dim();
    let nz = nonzeros(f);
    let support = gg.metadata().support_window;
    let gabs: Vec<Complex64> = g.abs().into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    let out: Vec<(Complex64, f64)> = (0..fg.len())
        .into_par_iter()
        .map(|i| {
            let mut z = [0.0; MAX_DIM];
            let mut y = [0.0; MAX_DIM];
            let mut u = [0.0; MAX_DIM];
            fg.point_into(i, &mut z[..dim]);
            let (mut acc, mut aacc) = (zero(), 0.0);
            for p in &nz {
                fg.point_into(p.idx, &mut y[..dim]);
                group.left_quotient_into(&y[..dim], &z[..dim], &mut u[..dim]);
                let outside = u[..dim]
                    .iter()
                    .zip(&support)
                    .any(|(v, s)| *v < s[0] - 1e-9 * (1.0 + s[0].abs()) || *v > s[1] + 1e-9 * (1.0 + s[1].abs()));
                if outside {
                    continue;
                }
                acc += p.fw * gg.interpolate(g.values(), &u[..dim]);
                aacc += p.aw * gg.interpolate(&gabs, &u[..dim]).re;
            }
            (acc, aacc)
        })
        .collect();
    out.into_iter().unzip()
}

/// `μ*G = Σ m_k L_{a_k}G + (density)*G` on `G`'s grid.
pub fn convolve_measure(mu: &DiscreteMeasure, g: &SampledFunction) -> Result<Convolved> {
    if mu.group != g.group() {
        return Err(Error::GroupMismatch("measure and function live on different groups".into()));
    }
    let grid = g.grid().clone();
    let mut vals = vec![zero(); grid.len()];
    let mut cov = 1.0f64;
    for (a, m) in &mu.atoms {
        let t = translate(g, a, Direction::L)?;
        cov = cov.min(t.coverage);
        for (o, v) in vals.iter_mut().zip(t.function.values()) {
            *o += m * v;
        }
    }
    let mut truncation = 1.0 - cov;
    if let Some(d) = &mu.density {
        let d = if d.grid().same_as(&grid) { d.clone() } else { d.resample(&grid)? };
        let c = convolve(&d, g)?;
        truncation = truncation.max(c.truncation);
        for (o, v) in vals.iter_mut().zip(c.function.values()) {
            *o += v;
        }
    }
    Ok(Convolved {
        function: SampledFunction::new(grid, vals)?,
        truncation,
    })
}

/// Convolution relations that can be checked empirically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelationId {
    /// `W(M,Y) * W(L∞,L^r_w) ↪ W(L∞,Y)`, `w(x) ≥ ‖A_x | W(M,Y)‖`.
    #[serde(rename = "thm_conv_a")]
    ThmConvA,
    /// `W(L∞,Y) * W(L∞,L^r_v) ↪ W(L∞,Y)`, `v(x) ≥ Δ(x⁻¹)‖R_{x⁻¹} | W(L∞,Y)‖`.
    #[serde(rename = "thm_conv_b")]
    ThmConvB,
    /// `W(L∞,L^r_v) * W(L∞,Y^∨)^∨ ↪ W(L∞,Y)`, `v(x) ≥ ‖L_{x⁻¹} | W(L∞,Y)‖`.
    #[serde(rename = "thm_convYvee", alias = "thm_conv_yvee")]
    ThmConvYvee,
    /// `W(L∞,L^p_w) * W(L∞,L^p_w) ↪ W(L∞,L^p_w)` on abelian groups.
    #[serde(rename = "cor_conv_Lp", alias = "cor_conv_lp")]
    CorConvLp,
    /// `W(L∞,L^{p,q}(v)) * W(L∞,L^r_w) ↪ W(L∞,L^{p,q}(v))` on `ax+b`.
    #[serde(rename = "axb_relation")]
    AxbRelation,
}

impl RelationId {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationId::ThmConvA => "thm_conv_a",
            RelationId::ThmConvB => "thm_conv_b",
            RelationId::ThmConvYvee => "thm_convYvee",
            RelationId::CorConvLp => "cor_conv_Lp",
            RelationId::AxbRelation => "axb_relation",
        }
    }
}

impl std::str::FromStr for RelationId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::param("relation", format!("unknown relation '{s}'")))
    }
}

/// How a factor's quasi-norm is measured.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FactorNorm {
    Amalgam { space: AmalgamSpace },
    /// `‖G | W(B, Y^∨)^∨‖ = ‖K(G^∨, Q, B)^∨ | Y‖`.
    Involuted { space: AmalgamSpace },
}

impl FactorNorm {
    pub fn space(&self) -> &AmalgamSpace {
        match self {
            FactorNorm::Amalgam { space } | FactorNorm::Involuted { space } => space,
        }
    }

    pub fn norm(&self, f: &SampledFunction) -> Result<NormValue> {
        match self {
            FactorNorm::Amalgam { space } => space.norm(f),
            FactorNorm::Involuted { space } => {
                let fv = involution(f, Involution::Vee)?.function;
                let k = control_function(&fv, &space.window, space.local)?;
                let kv = involution(&k, Involution::Vee)?.function;
                space.global.norm_of_abs(f.grid(), &kv.abs())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// `(F_i, G_i)`.
    #[default]
    Zip,
    /// Every `(F_i, G_j)`.
    Product,
}

/// The three spaces of a relation `left * right ↪ target`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSetup {
    pub relation: RelationId,
    pub left: FactorNorm,
    pub right: FactorNorm,
    pub target: AmalgamSpace,
    /// When set, `C_emp` must not exceed it (up to `1e-9` relative).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_bound: Option<f64>,
    #[serde(default)]
    pub pairing: Pairing,
}

fn linf(y: GlobalComponent, q: &Window) -> AmalgamSpace {
    AmalgamSpace::new(LocalComponent::Linf, y, q.clone())
}

impl EmbeddingSetup {
    /// `W(L∞,L^p_w) * W(L∞,L^p_w) ↪ W(L∞,L^p_w)`, `0 < p ≤ 1`.
    pub fn cor_conv_lp(p: f64, w: WeightFunction, q: &Window) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::param("p", format!("the algebra property needs 0 < p ≤ 1, got {p}")));
        }
        let s = linf(GlobalComponent::weighted_lp(p, w), q);
        Ok(EmbeddingSetup {
            relation: RelationId::CorConvLp,
            left: FactorNorm::Amalgam { space: s.clone() },
            right: FactorNorm::Amalgam { space: s.clone() },
            target: s,
            expected_bound: None,
            pairing: Pairing::Zip,
        })
    }

    pub fn thm_conv_a(y: GlobalComponent, w: WeightFunction, q: &Window) -> Self {
        let r = y.r_exponent();
        EmbeddingSetup {
            relation: RelationId::ThmConvA,
            left: FactorNorm::Amalgam {
                space: AmalgamSpace::new(LocalComponent::M, y.clone(), q.clone()),
            },
            right: FactorNorm::Amalgam {
                space: linf(GlobalComponent::weighted_lp(r, w), q),
            },
            target: linf(y, q),
            expected_bound: None,
            pairing: Pairing::Zip,
        }
    }

    pub fn thm_conv_b(y: GlobalComponent, v: WeightFunction, q: &Window) -> Self {
        let r = y.r_exponent();
        EmbeddingSetup {
            relation: RelationId::ThmConvB,
            left: FactorNorm::Amalgam { space: linf(y.clone(), q) },
            right: FactorNorm::Amalgam {
                space: linf(GlobalComponent::weighted_lp(r, v), q),
            },
            target: linf(y, q),
            expected_bound: None,
            pairing: Pairing::Zip,
        }
    }

    pub fn thm_conv_yvee(y: GlobalComponent, v: WeightFunction, q: &Window) -> Self {
        let r = y.r_exponent();
        EmbeddingSetup {
            relation: RelationId::ThmConvYvee,
            left: FactorNorm::Amalgam {
                space: linf(GlobalComponent::weighted_lp(r, v), q),
            },
            right: FactorNorm::Involuted { space: linf(y.clone(), q) },
            target: linf(y, q),
            expected_bound: None,
            pairing: Pairing::Zip,
        }
    }

    /// `W(L∞,L^{p,q}(v)) * W(L∞,L^r_w) ↪ W(L∞,L^{p,q}(v))` with
    /// `r = min(1,p,q)` and `w` the given right-factor weight.
    pub fn axb_relation(y: GlobalComponent, w: WeightFunction, q: &Window) -> Self {
        let r = y.r_exponent();
        EmbeddingSetup {
            relation: RelationId::AxbRelation,
            left: FactorNorm::Amalgam { space: linf(y.clone(), q) },
            right: FactorNorm::Amalgam {
                space: linf(GlobalComponent::weighted_lp(r, w), q),
            },
            target: linf(y, q),
            expected_bound: None,
            pairing: Pairing::Zip,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub left: usize,
    pub right: usize,
    pub target: NormValue,
    pub product: f64,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementLevel {
    pub level: usize,
    pub samples: usize,
    pub c_emp: NormValue,
    pub worst_pair: Option<(usize, usize)>,
    pub max_truncation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub relation: RelationId,
    pub family: String,
    /// Pair records on the base grid.
    pub pairs: Vec<PairRecord>,
    /// `C_emp` on the finest grid.
    pub c_emp: NormValue,
    pub refinement: Vec<RefinementLevel>,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// Relative change of `C_emp` allowed between consecutive refinement levels.
pub const REFINEMENT_TOLERANCE: f64 = 0.25;

fn check_group(setup: &EmbeddingSetup, group: GroupSpec) -> Result<()> {
    match setup.relation {
        RelationId::CorConvLp if !group.is_in_group() => Err(Error::GroupMismatch(format!(
            "the algebra property is checked on abelian groups only, not on {}",
            group.name()
        ))),
        RelationId::AxbRelation if !matches!(group, GroupSpec::Axb(_)) => {
            Err(Error::GroupMismatch("the ax+b relation needs an ax+b grid".into()))
        }
        _ => Ok(()),
    }
}

fn level_pairs(
    setup: &EmbeddingSetup,
    lefts: &[SampledFunction],
    rights: &[SampledFunction],
    pairs: &[(usize, usize)],
) -> Result<(Vec<PairRecord>, f64)> {
    let lnorms: Vec<NormValue> = lefts.par_iter().map(|f| setup.left.norm(f)).collect::<Result<_>>()?;
    let rnorms: Vec<NormValue> = rights.par_iter().map(|f| setup.right.norm(f)).collect::<Result<_>>()?;
    let rec: Vec<(PairRecord, f64)> = pairs
        .par_iter()
        .map(|&(i, j)| -> Result<_> {
            let c = convolve(&lefts[i], &rights[j])?;
            let target = setup.target.norm(&c.function)?;
            let product = lnorms[i].as_f64() * rnorms[j].as_f64();
            let ratio = match target {
                NormValue::Finite(t) if product > 0.0 && product.is_finite() => Some(t / product),
                NormValue::Overflow if product.is_finite() => Some(f64::INFINITY),
                _ => None,
            };
            Ok((
                PairRecord {
                    left: i,
                    right: j,
                    target,
                    product,
                    ratio,
                },
                c.truncation,
            ))
        })
        .collect::<Result<_>>()?;
    let trunc = rec.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok((rec.into_iter().map(|r| r.0).collect(), trunc))
}

/// Computes `C_emp = max ‖F*G‖ / (‖F‖·‖G‖)` over the pairs on `grid` and on
/// `refinements` successively halved grids. Passes when every level is
/// finite, consecutive levels differ by at most [`REFINEMENT_TOLERANCE`]
/// relatively, and the optional expected bound holds.
pub fn verify_embedding(
    setup: &EmbeddingSetup,
    left: &[TestFunction],
    right: &[TestFunction],
    grid: &Arc<Grid>,
    refinements: usize,
) -> Result<EmbeddingReport> {
    let group = grid.group();
    check_group(setup, group)?;
    if left.is_empty() || right.is_empty() {
        return Err(Error::EmptyInput("test family"));
    }
    let pairs: Vec<(usize, usize)> = match setup.pairing {
        Pairing::Zip => (0..left.len().min(right.len())).map(|i| (i, i)).collect(),
        Pairing::Product => (0..left.len())
            .flat_map(|i| (0..right.len()).map(move |j| (i, j)))
            .collect(),
    };
    let discrete = grid.axes().iter().all(|a| a.is_integer());
    let levels = if discrete { 1 } else { refinements + 1 };
    let mut trace = Vec::with_capacity(levels);
    let mut base_pairs = Vec::new();
    let mut failure = None;
    for level in 0..levels {
        let g = if level == 0 { grid.clone() } else { grid.refined(1 << level)? };
        let lefts: Vec<SampledFunction> = left.iter().map(|f| f.sample(&g)).collect::<Result<_>>()?;
        let rights: Vec<SampledFunction> = right.iter().map(|f| f.sample(&g)).collect::<Result<_>>()?;
        let (rec, trunc) = level_pairs(setup, &lefts, &rights, &pairs)?;
        let mut worst = None;
        let mut c: f64 = 0.0;
        for r in &rec {
            if let Some(x) = r.ratio {
                if x > c || x.is_infinite() {
                    c = x;
                    worst = Some((r.left, r.right));
                }
            }
        }
        let c_emp = NormValue::from_raw(c);
        if c_emp.is_overflow() && failure.is_none() {
            failure = Some(format!(
                "overflow at refinement level {level} for pair {:?}",
                worst.unwrap_or((0, 0))
            ));
        }
        trace.push(RefinementLevel {
            level,
            samples: g.len(),
            c_emp,
            worst_pair: worst,
            max_truncation: trunc,
        });
        if level == 0 {
            base_pairs = rec;
        }
    }
    for w in trace.windows(2) {
        if let (Some(a), Some(b)) = (w[0].c_emp.value(), w[1].c_emp.value()) {
            if (b - a).abs() > REFINEMENT_TOLERANCE * a && failure.is_none() {
                failure = Some(format!(
                    "C_emp moved from {a:.6} to {b:.6} between levels {} and {}",
                    w[0].level, w[1].level
                ));
            }
        }
    }
    let c_emp = trace.last().map_or(NormValue::Finite(0.0), |l| l.c_emp);
    if let (Some(bound), Some(c)) = (setup.expected_bound, c_emp.value()) {
        if c > bound * (1.0 + 1e-9) && failure.is_none() {
            failure = Some(format!("C_emp = {c} exceeds the expected bound {bound}"));
        }
    }
    Ok(EmbeddingReport {
        relation: setup.relation,
        family: format!("{} left x {} right functions, {:?} pairing", left.len(), right.len(), setup.pairing),
        pairs: base_pairs,
        c_emp,
        refinement: trace,
        passed: failure.is_none(),
        failure,
    })
}

/// Growth factor per refinement step that counts as divergence.
pub const DIVERGENCE_RATIO: f64 = 1.8;
/// Number of consecutive growth steps required.
pub const DIVERGENCE_LEVELS: usize = 3;

/// Whether the sequence grows by at least [`DIVERGENCE_RATIO`] per step over
/// its last [`DIVERGENCE_LEVELS`] steps.
pub fn diverges(values: &[f64]) -> bool {
    if values.len() < DIVERGENCE_LEVELS + 1 {
        return false;
    }
    values[values.len() - DIVERGENCE_LEVELS - 1..]
        .windows(2)
        .all(|w| w[0] > 0.0 && w[1] >= DIVERGENCE_RATIO * w[0])
}

/// Outcome of the `p < 1` divergence demonstration for
/// `F(x) = x^{-3/2}·χ_{(0,1]}` and `G = χ_{[0,1]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureReport {
    pub p: f64,
    /// Quadrature value of `‖F‖_p` on a graded mesh.
    pub lp_norm: NormValue,
    /// `(1/(1 - 3p/2))^{1/p}` when finite.
    pub lp_norm_exact: Option<f64>,
    /// `(h, (F*G)(1))` per refinement level.
    pub convolution_at_one: Vec<(f64, f64)>,
    pub growth: Vec<f64>,
    pub convolution_diverges: bool,
    /// `‖F | W(L∞, L^p)‖` per refinement level.
    pub amalgam_trace: Vec<NormValue>,
    /// Overflow when the trace diverges.
    pub amalgam_norm: NormValue,
}

fn singular(x: f64) -> f64 {
    if x > 0.0 && x <= 1.0 {
        x.powf(-1.5)
    } else {
        0.0
    }
}

/// Runs the demonstration on node grids of step `h₀·4^{-k}`, `k ≤ levels`.
pub fn demonstrate_lp_failure(p: f64, h0: f64, levels: usize) -> Result<FailureReport> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param("p", format!("need 0 < p < 1, got {p}")));
    }
    if !(h0 > 0.0 && h0 <= 0.5) || levels < DIVERGENCE_LEVELS {
        return Err(Error::param("h0", "need 0 < h0 ≤ 1/2 and enough levels for the growth rule"));
    }
    // graded mesh: [0, 2^-60] then 64 cells per octave up to 1, one cell to 2
    let mut edges = vec![0.0];
    for k in (0..60 * 64).rev() {
        edges.push((-(k as f64 + 1.0) / 64.0 * std::f64::consts::LN_2).exp());
    }
    edges.push(1.0);
    edges.push(2.0);
    let graded = Grid::new(GroupSpec::Euclidean(1), vec![AxisSpec::Edges { edges }])?;
    let fg = SampledFunction::from_real_fn(graded.clone(), |x| singular(x[0]))?;
    let lp_norm = GlobalComponent::lp(p).norm_of_abs(&graded, &fg.abs())?;
    let lp_norm_exact = (1.5 * p < 1.0).then(|| (1.0 / (1.0 - 1.5 * p)).powf(1.0 / p));

    let space = linf(GlobalComponent::lp(p), &Window::interval(-0.5, 0.5));
    let mut conv = Vec::new();
    let mut amalgam_trace = Vec::new();
    for k in 0..=levels {
        let h = h0 / 4f64.powi(k as i32);
        let n = (2.0 / h).round() as i64;
        let grid = Grid::new(
            GroupSpec::Euclidean(1),
            vec![AxisSpec::Nodes {
                h,
                k_lo: -n / 2,
                k_hi: n,
            }],
        )?;
        let f = SampledFunction::from_real_fn(grid.clone(), |x| singular(x[0]))?;
        let g = SampledFunction::from_real_fn(grid.clone(), |x| if (0.0..=1.0).contains(&x[0]) { 1.0 } else { 0.0 })?;
        let c = convolve(&f, &g)?;
        let at_one = grid.index_of(&[1.0]).map(|i| c.function.values()[i].re).unwrap_or(f64::NAN);
        conv.push((h, at_one));
        amalgam_trace.push(space.norm(&f)?);
    }
    let vals: Vec<f64> = conv.iter().map(|c| c.1).collect();
    let growth: Vec<f64> = vals.windows(2).map(|w| w[1] / w[0]).collect();
    let at: Vec<f64> = amalgam_trace.iter().map(|v| v.as_f64()).collect();
    let amalgam_norm = if diverges(&at) || amalgam_trace.iter().any(|v| v.is_overflow()) {
        NormValue::Overflow
    } else {
        *amalgam_trace.last().unwrap()
    };
    Ok(FailureReport {
        p,
        lp_norm,
        lp_norm_exact,
        convolution_diverges: diverges(&vals),
        convolution_at_one: conv,
        growth,
        amalgam_trace,
        amalgam_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{Bump, TestFunction};

    fn seq(grid: &Arc<Grid>, v: &[f64]) -> SampledFunction {
        TestFunction::sequence(v).sample(grid).unwrap()
    }

    #[test]
    fn binomial_on_integers() {
        let g = Grid::lattice_1d(-4, 8).unwrap();
        let f = seq(&g, &[1.0, 1.0]);
        let c = convolve(&f, &f).unwrap();
        let want = seq(&g, &[1.0, 2.0, 1.0]);
        assert_eq!(c.function.values(), want.values());
        assert!(c.truncation < 1e-15);
    }

    #[test]
    fn box_with_box_is_a_hat() {
        let h = 1.0 / 256.0;
        let g = Grid::euclidean_nodes_1d(h, 3.0).unwrap();
        let chi = SampledFunction::from_real_fn(g.clone(), |x| if (0.0..=1.0).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap();
        let c = convolve(&chi, &chi).unwrap();
        for (k, v) in c.function.values().iter().enumerate() {
            let z = g.point(k)[0];
            let want = (1.0 - (z - 1.0).abs()).max(0.0);
            assert!((v.re - want).abs() <= 2.0 * h, "{z}");
        }
        let peak = c.function.values()[g.index_of(&[1.0]).unwrap()].re;
        assert!((peak - 1.0).abs() <= 2.0 * h);
    }

    #[test]
    fn fast_paths_match_generic() {
        let g = Grid::euclidean_nodes_1d(0.1, 3.0).unwrap();
        let f = SampledFunction::from_real_fn(g.clone(), |x| (-(x[0] - 0.3).powi(2)).exp()).unwrap();
        let k = SampledFunction::from_real_fn(g.clone(), |x| (x[0] * 2.0).sin() * (-x[0] * x[0]).exp()).unwrap();
        let (a, _) = aligned_abelian(&f, &k).unwrap();
        let (b, _) = generic(&f, &k);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
        let ga = Grid::axb_1d(0.25, 4.0, 2, 4).unwrap();
        let bump = |c: f64| TestFunction::Bumps {
            bumps: vec![Bump {
                center: vec![c, 0.2],
                width: vec![0.8, 0.5],
                amplitude: 1.0,
            }],
        };
        let f = bump(0.3).sample(&ga).unwrap();
        let k = bump(-0.5).sample(&ga).unwrap();
        let (a, aa) = aligned_axb(&f, &k).unwrap();
        let (b, ba) = generic(&f, &k);
        for ((x, y), (u, v)) in a.iter().zip(&b).zip(aa.iter().zip(&ba)) {
            assert!((x - y).norm() < 1e-12, "{x} {y}");
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn axb_bumps_converge_under_refinement() {
        let bump = |c: f64, l: f64| TestFunction::Bumps {
            bumps: vec![Bump {
                center: vec![c, l],
                width: vec![0.6, 0.4],
                amplitude: 1.0,
            }],
        };
        let (f, k) = (bump(0.2, 0.1), bump(-0.3, -0.2));
        let coarse = Grid::axb_1d(1.0 / 16.0, 6.0, 3, 16).unwrap();
        let fine = coarse.refined(2).unwrap();
        let cc = convolve(&f.sample(&coarse).unwrap(), &k.sample(&coarse).unwrap()).unwrap();
        let cf = convolve(&f.sample(&fine).unwrap(), &k.sample(&fine).unwrap()).unwrap();
        let peak = cf.function.sup_abs();
        let mut err: f64 = 0.0;
        for (i, v) in cc.function.values().iter().enumerate() {
            let p = coarse.point(i);
            err = err.max((v - cf.function.eval(&p)).norm());
        }
        assert!(err <= 1e-2 * peak, "{err} vs {peak}");
        assert!(cc.truncation < 1e-2);
    }

    #[test]
    fn measure_convolution() {
        let g = Grid::euclidean_nodes_1d(0.125, 6.0).unwrap();
        let k = SampledFunction::from_real_fn(g.clone(), |x| (-x[0] * x[0]).exp()).unwrap();
        let grp = GroupSpec::Euclidean(1);
        let e = DiscreteMeasure::dirac(grp, vec![0.0]).unwrap();
        assert_eq!(convolve_measure(&e, &k).unwrap().function.values(), k.values());
        let d = DiscreteMeasure::dirac(grp, vec![1.5]).unwrap();
        let lx = translate(&k, &[1.5], Direction::L).unwrap().function;
        assert_eq!(convolve_measure(&d, &k).unwrap().function.values(), lx.values());
        let two = DiscreteMeasure::atoms(
            grp,
            vec![(vec![0.0], Complex64::new(1.0, 0.0)), (vec![1.5], Complex64::new(2.0, 0.0))],
        )
        .unwrap();
        let c = convolve_measure(&two, &k).unwrap();
        for ((a, b), x) in c.function.values().iter().zip(k.values()).zip(lx.values()) {
            assert!((a - (b + x * 2.0)).norm() < 1e-15);
        }
        // density-only measure agrees with plain convolution
        let f = SampledFunction::from_real_fn(g.clone(), |x| if x[0].abs() < 1.0 { 1.0 } else { 0.0 }).unwrap();
        let m = convolve_measure(&DiscreteMeasure::from_density(f.clone()), &k).unwrap();
        let c = convolve(&f, &k).unwrap();
        assert_eq!(m.function.values(), c.function.values());
    }

    #[test]
    fn associativity_on_integers() {
        let g = Grid::lattice_1d(-2, 16).unwrap();
        let a = seq(&g, &[1.0, -1.0, 2.0]);
        let b = seq(&g, &[0.0, 2.0, 1.0, 1.0]);
        let c = seq(&g, &[2.0, 0.0, -1.0]);
        let l = convolve(&convolve(&a, &b).unwrap().function, &c).unwrap();
        let r = convolve(&a, &convolve(&b, &c).unwrap().function).unwrap();
        assert_eq!(l.function.values(), r.function.values());
    }

    #[test]
    fn two_deltas_in_ell_half() {
        let g = Grid::lattice_1d(-2, 6).unwrap();
        let setup = EmbeddingSetup::cor_conv_lp(0.5, WeightFunction::constant(1.0), &Window::singleton(1)).unwrap();
        let f = TestFunction::sequence(&[1.0, 1.0]);
        let r = verify_embedding(&setup, &[f.clone()], &[f], &g, 2).unwrap();
        let pr = &r.pairs[0];
        let want = (2.0 + 2f64.sqrt()).powi(2);
        assert!((pr.target.value().unwrap() - want).abs() < 1e-12);
        assert!((pr.product - 16.0).abs() < 1e-12);
        assert_eq!(r.refinement.len(), 1);
        assert!(r.passed);
    }

    #[test]
    fn algebra_needs_small_p_and_abelian_group() {
        assert!(EmbeddingSetup::cor_conv_lp(2.0, WeightFunction::constant(1.0), &Window::singleton(1)).is_err());
        let setup =
            EmbeddingSetup::cor_conv_lp(1.0, WeightFunction::constant(1.0), &Window::axb(1, 1.0, 2.0)).unwrap();
        let g = Grid::axb_1d(0.5, 2.0, 1, 2).unwrap();
        let f = TestFunction::Indicator {
            lo: vec![0.0, 1.0],
            hi: vec![1.0, 2.0],
            value: 1.0,
        };
        assert!(matches!(
            verify_embedding(&setup, &[f.clone()], &[f], &g, 0),
            Err(Error::GroupMismatch(_))
        ));
    }

    #[test]
    fn divergence_rule() {
        assert!(diverges(&[1.0, 2.0, 4.0, 8.0]));
        assert!(!diverges(&[1.0, 2.0, 3.0, 8.0]));
        assert!(!diverges(&[1.0, 2.0, 4.0]));
    }

    #[test]
    fn relation_ids_parse() {
        assert_eq!("cor_conv_Lp".parse::<RelationId>().unwrap(), RelationId::CorConvLp);
        assert_eq!("thm_convYvee".parse::<RelationId>().unwrap(), RelationId::ThmConvYvee);
        assert!("nope".parse::<RelationId>().is_err());
        for r in [
            RelationId::ThmConvA,
            RelationId::ThmConvB,
            RelationId::ThmConvYvee,
            RelationId::CorConvLp,
            RelationId::AxbRelation,
        ] {
            assert_eq!(r.as_str().parse::<RelationId>().unwrap(), r);
        }
    }
}
