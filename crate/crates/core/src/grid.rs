//! Structured, group-adapted sampling grids and functions tabulated on them.
//!
//! A grid is a tensor product of one-dimensional axes. Samples sit at cell
//! midpoints and carry midpoint-rule Haar weights: the coordinate volume of the
//! cell times the Haar density at the midpoint. On the `ax+b` group the
//! dilation axis is log-uniform and its midpoints are geometric means of the
//! cell edges.
//!
//! Flat indices run with axis 0 fastest, so on `ax+b` grids every fixed-`a`
//! row of `x` samples is contiguous.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GroupSpec;

/// Largest supported number of coordinates per grid.
pub const MAX_DIM: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AxisSpec {
    /// `cells` equal cells tiling `[lo, hi]`.
    Uniform { lo: f64, hi: f64, cells: usize },
    /// Samples at `k·h`, `k_lo ≤ k ≤ k_hi`, each owning `[kh - h/2, kh + h/2]`.
    Nodes { h: f64, k_lo: i64, k_hi: i64 },
    /// `cells` log-uniform cells tiling `[lo, hi]`, `0 < lo < hi`.
    Geometric { lo: f64, hi: f64, cells: usize },
    /// Samples at `e^{kδ}`, each owning `[e^{(k-1/2)δ}, e^{(k+1/2)δ}]`.
    GeometricNodes { log_step: f64, k_lo: i64, k_hi: i64 },
    /// Integer points `lo..=hi` with unit weight.
    Integer { lo: i64, hi: i64 },
    /// Arbitrary increasing cell edges.
    Edges { edges: Vec<f64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Interp {
    Linear,
    Log,
    Nearest,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    spec: AxisSpec,
    mids: Vec<f64>,
    edges: Vec<f64>,
    interp: Interp,
    /// `(first, step)` of the midpoints in interpolation coordinates when
    /// they are equispaced there.
    affine: Option<(f64, f64)>,
}

impl Axis {
    pub fn new(spec: AxisSpec) -> Result<Axis> {
        let (mids, edges, interp, affine) = match &spec {
            AxisSpec::Uniform { lo, hi, cells } => {
                check_interval(*lo, *hi)?;
                if *cells == 0 {
                    return Err(Error::EmptyGrid);
                }
                let h = (hi - lo) / *cells as f64;
                let edges: Vec<f64> = (0..=*cells).map(|i| lo + i as f64 * h).collect();
                let mids = (0..*cells).map(|i| lo + (i as f64 + 0.5) * h).collect();
                (mids, edges, Interp::Linear, Some((lo + 0.5 * h, h)))
            }
            AxisSpec::Nodes { h, k_lo, k_hi } => {
                if !(h.is_finite() && *h > 0.0) {
                    return Err(Error::param("h", "spacing must be positive"));
                }
                if k_hi < k_lo {
                    return Err(Error::EmptyGrid);
                }
                let mids: Vec<f64> = (*k_lo..=*k_hi).map(|k| k as f64 * h).collect();
                let edges = (*k_lo..=*k_hi + 1).map(|k| (k as f64 - 0.5) * h).collect();
                (mids, edges, Interp::Linear, Some((*k_lo as f64 * h, *h)))
            }
            AxisSpec::Geometric { lo, hi, cells } => {
                check_interval(*lo, *hi)?;
                if *lo <= 0.0 {
                    return Err(Error::param("lo", "geometric axis needs a positive lower edge"));
                }
                if *cells == 0 {
                    return Err(Error::EmptyGrid);
                }
                let (l0, l1) = (lo.ln(), hi.ln());
                let d = (l1 - l0) / *cells as f64;
                let edges = (0..=*cells).map(|i| (l0 + i as f64 * d).exp()).collect();
                let mids = (0..*cells).map(|i| (l0 + (i as f64 + 0.5) * d).exp()).collect();
                (mids, edges, Interp::Log, Some((l0 + 0.5 * d, d)))
            }
            AxisSpec::GeometricNodes {
                log_step,
                k_lo,
                k_hi,
            } => {
                if !(log_step.is_finite() && *log_step > 0.0) {
                    return Err(Error::param("log_step", "must be positive"));
                }
                if k_hi < k_lo {
                    return Err(Error::EmptyGrid);
                }
                let d = *log_step;
                let mids = (*k_lo..=*k_hi).map(|k| (k as f64 * d).exp()).collect();
                let edges = (*k_lo..=*k_hi + 1)
                    .map(|k| ((k as f64 - 0.5) * d).exp())
                    .collect();
                (mids, edges, Interp::Log, Some((*k_lo as f64 * d, d)))
            }
            AxisSpec::Integer { lo, hi } => {
                if hi < lo {
                    return Err(Error::EmptyGrid);
                }
                let mids = (*lo..=*hi).map(|k| k as f64).collect();
                let edges = (*lo..=*hi + 1).map(|k| k as f64 - 0.5).collect();
                (mids, edges, Interp::Nearest, Some((*lo as f64, 1.0)))
            }
            AxisSpec::Edges { edges } => {
                if edges.len() < 2 {
                    return Err(Error::EmptyGrid);
                }
                if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0])
                {
                    return Err(Error::param("edges", "must be finite and strictly increasing"));
                }
                let mids = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
                (mids, edges.clone(), Interp::Linear, None)
            }
        };
        Ok(Axis {
            spec,
            mids,
            edges,
            interp,
            affine,
        })
    }

    pub fn spec(&self) -> &AxisSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.mids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mids.is_empty()
    }

    pub fn mids(&self) -> &[f64] {
        &self.mids
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    pub fn is_integer(&self) -> bool {
        self.interp == Interp::Nearest
    }

    pub fn is_geometric(&self) -> bool {
        self.interp == Interp::Log
    }

    /// Equispaced step in interpolation coordinates (`x`, or `ln a`).
    pub fn step(&self) -> Option<f64> {
        self.affine.map(|(_, s)| s)
    }

    pub fn refined(&self, factor: usize) -> Result<Axis> {
        if factor == 0 {
            return Err(Error::param("factor", "refinement factor must be positive"));
        }
        let f = factor as i64;
        let spec = match &self.spec {
            AxisSpec::Uniform { lo, hi, cells } => AxisSpec::Uniform {
                lo: *lo,
                hi: *hi,
                cells: cells * factor,
            },
            AxisSpec::Nodes { h, k_lo, k_hi } => AxisSpec::Nodes {
                h: h / factor as f64,
                k_lo: k_lo * f,
                k_hi: k_hi * f,
            },
            AxisSpec::Geometric { lo, hi, cells } => AxisSpec::Geometric {
                lo: *lo,
                hi: *hi,
                cells: cells * factor,
            },
            AxisSpec::GeometricNodes {
                log_step,
                k_lo,
                k_hi,
            } => AxisSpec::GeometricNodes {
                log_step: log_step / factor as f64,
                k_lo: k_lo * f,
                k_hi: k_hi * f,
            },
            AxisSpec::Integer { .. } => self.spec.clone(),
            AxisSpec::Edges { edges } => {
                let mut out = Vec::with_capacity((edges.len() - 1) * factor + 1);
                for w in edges.windows(2) {
                    for s in 0..factor {
                        out.push(w[0] + (w[1] - w[0]) * s as f64 / factor as f64);
                    }
                }
                out.push(*edges.last().unwrap());
                AxisSpec::Edges { edges: out }
            }
        };
        Axis::new(spec)
    }

    fn tol(&self, v: f64) -> f64 {
        1e-9 * (1.0 + v.abs())
    }

    /// Inclusive index range of the samples lying in the closed interval
    /// `[lo, hi]`, or `None` if there are none.
    pub fn index_range(&self, lo: f64, hi: f64) -> Option<(usize, usize)> {
        let a = lo - self.tol(lo);
        let b = hi + self.tol(hi);
        let first = self.mids.partition_point(|&m| m < a);
        let end = self.mids.partition_point(|&m| m <= b);
        if first < end {
            Some((first, end - 1))
        } else {
            None
        }
    }

    /// Index of the sample at `v` if `v` is a sample position.
    pub fn exact_index(&self, v: f64) -> Option<usize> {
        self.index_range(v, v).map(|(i, _)| i)
    }

    /// Interpolation stencil `(i0, i1, t)` meaning `(1-t)·f[i0] + t·f[i1]`.
    /// Points beyond the outer cell edges give `None`.
    pub(crate) fn stencil(&self, v: f64) -> Option<(usize, usize, f64)> {
        let n = self.mids.len();
        let lo_edge = self.edges[0];
        let hi_edge = self.edges[n];
        if !(v >= lo_edge - self.tol(lo_edge) && v <= hi_edge + self.tol(hi_edge)) {
            return None;
        }
        if self.interp == Interp::Nearest {
            let i = (v - self.mids[0]).round();
            if i < 0.0 || i >= n as f64 {
                return None;
            }
            let i = i as usize;
            return Some((i, i, 0.0));
        }
        let t_coord = |x: f64| if self.interp == Interp::Log { x.ln() } else { x };
        let u = t_coord(v);
        let pos = match self.affine {
            Some((first, step)) => (u - first) / step,
            None => {
                let j = self.mids.partition_point(|&m| m <= v);
                if j == 0 {
                    -1.0
                } else if j >= n {
                    n as f64
                } else {
                    let (m0, m1) = (self.mids[j - 1], self.mids[j]);
                    (j - 1) as f64 + (v - m0) / (m1 - m0)
                }
            }
        };
        if pos <= 0.0 {
            return Some((0, 0, 0.0));
        }
        if pos >= (n - 1) as f64 {
            return Some((n - 1, n - 1, 0.0));
        }
        let i0 = pos.floor() as usize;
        let t = pos - i0 as f64;
        // snap to the sample when we are within rounding of it
        if t < 1e-12 {
            return Some((i0, i0, 0.0));
        }
        if t > 1.0 - 1e-12 {
            return Some((i0 + 1, i0 + 1, 0.0));
        }
        Some((i0, i0 + 1, t))
    }
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
        return Err(Error::param("interval", format!("need finite lo < hi, got [{lo}, {hi}]")));
    }
    Ok(())
}

#[derive(Debug, PartialEq)]
pub struct Grid {
    group: GroupSpec,
    axes: Vec<Axis>,
    strides: Vec<usize>,
    len: usize,
    weights: Vec<f64>,
}

/// Serializable description of a grid, embedded in reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub group: GroupSpec,
    pub axes: Vec<AxisSpec>,
    pub samples: usize,
    /// Coordinate box covered by the cells; everything outside is truncated.
    pub support_window: Vec<[f64; 2]>,
}

impl Grid {
    pub fn new(group: GroupSpec, specs: Vec<AxisSpec>) -> Result<Arc<Grid>> {
        group.validate()?;
        if specs.len() != group.dim() {
            return Err(Error::DimensionMismatch {
                expected: group.dim(),
                got: specs.len(),
            });
        }
        if specs.len() > MAX_DIM {
            return Err(Error::param("axes", format!("at most {MAX_DIM} coordinates supported")));
        }
        let axes = specs
            .into_iter()
            .map(Axis::new)
            .collect::<Result<Vec<_>>>()?;
        for (d, ax) in axes.iter().enumerate() {
            let ok = match group {
                GroupSpec::Lattice(_) => ax.is_integer(),
                GroupSpec::Euclidean(_) => !ax.is_integer() && !ax.is_geometric(),
                GroupSpec::Axb(n) if d == n => ax.is_geometric(),
                GroupSpec::Axb(_) => !ax.is_integer() && !ax.is_geometric(),
            };
            if !ok {
                return Err(Error::GroupMismatch(format!(
                    "axis {d} of type {:?} does not fit a {} grid",
                    ax.spec,
                    group.name()
                )));
            }
        }
        let mut strides = Vec::with_capacity(axes.len());
        let mut len = 1usize;
        for ax in &axes {
            strides.push(len);
            len *= ax.len();
        }
        if len == 0 {
            return Err(Error::EmptyGrid);
        }
        let mut grid = Grid {
            group,
            axes,
            strides,
            len,
            weights: Vec::new(),
        };
        let weights = (0..len)
            .into_par_iter()
            .map(|i| {
                let mut buf = [0.0; MAX_DIM];
                let p = &mut buf[..grid.dim()];
                grid.point_into(i, p);
                let mut vol = 1.0;
                let mut rem = i;
                for ax in &grid.axes {
                    let k = rem % ax.len();
                    rem /= ax.len();
                    vol *= ax.width(k);
                }
                vol * group.haar_density_raw(p)
            })
            .collect();
        grid.weights = weights;
        Ok(Arc::new(grid))
    }

    /// `[lo, hi]` split into `cells` cells on `ℝ`.
    pub fn euclidean_1d(lo: f64, hi: f64, cells: usize) -> Result<Arc<Grid>> {
        Grid::new(GroupSpec::Euclidean(1), vec![AxisSpec::Uniform { lo, hi, cells }])
    }

    /// Nodes `k·h`, `|k·h| ≤ half_width`, on `ℝ`.
    pub fn euclidean_nodes_1d(h: f64, half_width: f64) -> Result<Arc<Grid>> {
        let k = (half_width / h).round() as i64;
        Grid::new(
            GroupSpec::Euclidean(1),
            vec![AxisSpec::Nodes {
                h,
                k_lo: -k,
                k_hi: k,
            }],
        )
    }

    pub fn lattice_1d(lo: i64, hi: i64) -> Result<Arc<Grid>> {
        Grid::new(GroupSpec::Lattice(1), vec![AxisSpec::Integer { lo, hi }])
    }

    /// `ax+b` grid with `x` nodes `k·h`, `|x| ≤ x_half`, and dilation nodes
    /// `2^{m/levels_per_octave}` for `|m| ≤ octaves·levels_per_octave`.
    pub fn axb_1d(
        h: f64,
        x_half: f64,
        octaves: i64,
        levels_per_octave: i64,
    ) -> Result<Arc<Grid>> {
        let k = (x_half / h).round() as i64;
        let m = octaves * levels_per_octave;
        Grid::new(
            GroupSpec::Axb(1),
            vec![
                AxisSpec::Nodes {
                    h,
                    k_lo: -k,
                    k_hi: k,
                },
                AxisSpec::GeometricNodes {
                    log_step: std::f64::consts::LN_2 / levels_per_octave as f64,
                    k_lo: -m,
                    k_hi: m,
                },
            ],
        )
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, d: usize) -> &Axis {
        &self.axes[d]
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Haar quadrature weights, one per sample.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn point_into(&self, idx: usize, out: &mut [f64]) {
        let mut rem = idx;
        for (o, ax) in out.iter_mut().zip(&self.axes) {
            let k = rem % ax.len();
            rem /= ax.len();
            *o = ax.mids[k];
        }
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.dim()];
        self.point_into(idx, &mut p);
        p
    }

    pub fn multi_index(&self, idx: usize) -> Vec<usize> {
        let mut rem = idx;
        self.axes
            .iter()
            .map(|ax| {
                let k = rem % ax.len();
                rem /= ax.len();
                k
            })
            .collect()
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Flat index of the sample located exactly at `point`.
    pub fn index_of(&self, point: &[f64]) -> Option<usize> {
        let mut idx = 0;
        for ((ax, s), &v) in self.axes.iter().zip(&self.strides).zip(point) {
            idx += ax.exact_index(v)? * s;
        }
        Some(idx)
    }

    pub fn refined(&self, factor: usize) -> Result<Arc<Grid>> {
        let specs = self
            .axes
            .iter()
            .map(|a| a.refined(factor).map(|a| a.spec))
            .collect::<Result<Vec<_>>>()?;
        Grid::new(self.group, specs)
    }

    pub fn metadata(&self) -> GridMetadata {
        GridMetadata {
            group: self.group,
            axes: self.axes.iter().map(|a| a.spec.clone()).collect(),
            samples: self.len,
            support_window: self
                .axes
                .iter()
                .map(|a| [a.edges[0], *a.edges.last().unwrap()])
                .collect(),
        }
    }

    /// Index ranges of the samples inside the closed coordinate box
    /// `[lo, hi]`, or `None` if the box misses every sample.
    pub fn box_ranges(&self, lo: &[f64], hi: &[f64]) -> Option<Vec<(usize, usize)>> {
        self.axes
            .iter()
            .zip(lo.iter().zip(hi))
            .map(|(ax, (&l, &h))| ax.index_range(l, h))
            .collect()
    }

    /// Calls `f(flat_index)` for every sample inside the given index box.
    pub fn for_each_in_ranges(&self, ranges: &[(usize, usize)], mut f: impl FnMut(usize)) {
        let dim = ranges.len();
        let mut cur: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        loop {
            f(self.flat_index(&cur));
            let mut d = 0;
            loop {
                if d == dim {
                    return;
                }
                if cur[d] < ranges[d].1 {
                    cur[d] += 1;
                    break;
                }
                cur[d] = ranges[d].0;
                d += 1;
            }
        }
    }

    /// Multilinear interpolation of sampled `values` at an arbitrary point
    /// (linear in `log a` on dilation axes, nearest on integer axes).
    /// Zero outside the grid cells.
    pub fn interpolate(&self, values: &[Complex64], point: &[f64]) -> Complex64 {
        let dim = self.dim();
        let mut st = [(0usize, 0usize, 0.0f64); MAX_DIM];
        for d in 0..dim {
            match self.axes[d].stencil(point[d]) {
                Some(s) => st[d] = s,
                None => return Complex64::new(0.0, 0.0),
            }
        }
        let mut acc = Complex64::new(0.0, 0.0);
        'corner: for mask in 0..(1usize << dim) {
            let mut w = 1.0;
            let mut idx = 0;
            for (d, &(i0, i1, t)) in st.iter().enumerate().take(dim) {
                if mask & (1 << d) != 0 {
                    if t == 0.0 {
                        continue 'corner;
                    }
                    w *= t;
                    idx += i1 * self.strides[d];
                } else {
                    w *= 1.0 - t;
                    idx += i0 * self.strides[d];
                }
            }
            acc += values[idx] * w;
        }
        acc
    }

    pub fn same_as(self: &Arc<Self>, other: &Arc<Grid>) -> bool {
        Arc::ptr_eq(self, other) || **self == **other
    }
}

/// A complex-valued function tabulated at the samples of a grid.
#[derive(Clone, Debug)]
pub struct SampledFunction {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
}

impl SampledFunction {
    /// Infinite samples are allowed (norms report them as overflow); NaN is not.
    pub fn new(grid: Arc<Grid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::IndexMismatch(format!(
                "{} values for a grid of {} samples",
                values.len(),
                grid.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| v.re.is_nan() || v.im.is_nan()) {
            return Err(Error::NonFinite { index });
        }
        Ok(SampledFunction { grid, values })
    }

    pub fn from_real(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        SampledFunction::new(grid, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.len()];
        SampledFunction { grid, values }
    }

    pub fn from_fn<F>(grid: Arc<Grid>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let dim = grid.dim();
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let mut buf = [0.0; MAX_DIM];
                grid.point_into(i, &mut buf[..dim]);
                f(&buf[..dim])
            })
            .collect();
        SampledFunction::new(grid, values)
    }

    pub fn from_real_fn<F>(grid: Arc<Grid>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        SampledFunction::from_fn(grid, |p| Complex64::new(f(p), 0.0))
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn group(&self) -> GroupSpec {
        self.grid.group()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, point: &[f64]) -> Complex64 {
        self.grid.interpolate(&self.values, point)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> SampledFunction {
        SampledFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> SampledFunction {
        self.map(|v| v * s)
    }

    fn check_same_grid(&self, other: &SampledFunction) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn add(&self, other: &SampledFunction) -> Result<SampledFunction> {
        self.check_same_grid(other)?;
        Ok(SampledFunction {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn mul(&self, other: &SampledFunction) -> Result<SampledFunction> {
        self.check_same_grid(other)?;
        Ok(SampledFunction {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    /// Interpolates onto another grid of the same group.
    pub fn resample(&self, grid: &Arc<Grid>) -> Result<SampledFunction> {
        if grid.group() != self.group() {
            return Err(Error::GroupMismatch(format!(
                "cannot resample {} data onto a {} grid",
                self.group().name(),
                grid.group().name()
            )));
        }
        if self.grid.same_as(grid) {
            return Ok(self.clone());
        }
        let src = self;
        SampledFunction::from_fn(grid.clone(), |p| src.eval(p))
    }

    pub fn haar_integral(&self) -> Result<Complex64> {
        haar_integral(self)
    }
}

/// Midpoint-rule approximation of `∫_G F` against left Haar measure.
pub fn haar_integral(f: &SampledFunction) -> Result<Complex64> {
    if f.values.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if let Some(index) = f
        .values
        .iter()
        .position(|v| !(v.re.is_finite() && v.im.is_finite()))
    {
        return Err(Error::NonFinite { index });
    }
    Ok(f
        .values
        .iter()
        .zip(f.grid.weights())
        .map(|(v, w)| v * w)
        .sum())
}
