//! Control functions and Wiener amalgam quasi-norms.
//!
//! `K(F, Q, B)(x) = ‖χ_{xQ} F‖_B` is evaluated at every grid sample by
//! separable range reductions: a translate `xQ` of a coordinate box is again
//! a coordinate box on all three groups, so the reduction factors into
//! one-dimensional sliding maxima or sums. On `ax+b` the `x`-extent of `xQ`
//! scales with `a`, which is handled row by row.

pub mod estimator;
pub mod measure;
pub mod ops;

use std::collections::VecDeque;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::components::{step_function, GlobalComponent, NormValue};
use crate::discretization::{Bupu, WellSpreadSet};
use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction, MAX_DIM};
use crate::group::GroupSpec;
use crate::window::Window;

pub use estimator::{
    estimate_translation_operator_norm, EstimatorSetup, OperatorNormBounds,
};
pub use measure::DiscreteMeasure;
pub use ops::{involution, translate, translate_measure, Direction, Involution, Translated};

/// Local component `B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocalComponent {
    Linf,
    L1,
    /// Complex Radon measures; for functions this is the `L¹` norm.
    M,
}

/// `W(B, Y, Q)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmalgamSpace {
    pub local: LocalComponent,
    pub global: GlobalComponent,
    pub window: Window,
}

impl AmalgamSpace {
    pub fn new(local: LocalComponent, global: GlobalComponent, window: Window) -> Self {
        AmalgamSpace {
            local,
            global,
            window,
        }
    }

    pub fn r_exponent(&self) -> f64 {
        self.global.r_exponent()
    }

    pub fn norm(&self, f: &SampledFunction) -> Result<NormValue> {
        amalgam_norm(f, &self.window, self.local, &self.global)
    }

    pub fn norm_of_measure(&self, mu: &DiscreteMeasure, grid: &Arc<Grid>) -> Result<NormValue> {
        amalgam_norm_measure(mu, &self.window, &self.global, grid)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Op {
    Max,
    Sum,
}

const DIRECT_SUM_LEN: usize = 64;

fn is_monotone(ranges: &[Option<(usize, usize)>]) -> bool {
    let mut last = (0, 0);
    for r in ranges.iter().flatten() {
        if r.0 < last.0 || r.1 < last.1 {
            return false;
        }
        last = *r;
    }
    true
}

fn reduce_line(vals: &[f64], ranges: &[Option<(usize, usize)>], op: Op) -> Vec<f64> {
    let mut out = vec![0.0; ranges.len()];
    match op {
        Op::Sum => {
            let mut prefix = Vec::with_capacity(vals.len() + 1);
            let mut infs = Vec::with_capacity(vals.len() + 1);
            let (mut s, mut c) = (0.0, 0usize);
            prefix.push(0.0);
            infs.push(0);
            for &v in vals {
                if v.is_finite() {
                    s += v;
                } else {
                    c += 1;
                }
                prefix.push(s);
                infs.push(c);
            }
            for (o, r) in out.iter_mut().zip(ranges) {
                let Some((a, b)) = *r else { continue };
                *o = if b - a < DIRECT_SUM_LEN {
                    vals[a..=b].iter().sum()
                } else if infs[b + 1] > infs[a] {
                    f64::INFINITY
                } else {
                    (prefix[b + 1] - prefix[a]).max(0.0)
                };
            }
        }
        Op::Max if is_monotone(ranges) => {
            let mut dq: VecDeque<usize> = VecDeque::new();
            let mut next = 0;
            for (o, r) in out.iter_mut().zip(ranges) {
                let Some((a, b)) = *r else { continue };
                while next <= b {
                    while dq.back().is_some_and(|&k| vals[k] <= vals[next]) {
                        dq.pop_back();
                    }
                    dq.push_back(next);
                    next += 1;
                }
                while dq.front().is_some_and(|&k| k < a) {
                    dq.pop_front();
                }
                *o = dq.front().map_or(0.0, |&k| vals[k]);
            }
        }
        Op::Max => {
            for (o, r) in out.iter_mut().zip(ranges) {
                if let Some((a, b)) = *r {
                    *o = vals[a..=b].iter().fold(0.0, |m: f64, &v| m.max(v));
                }
            }
        }
    }
    out
}

/// One separable pass along `axis` of a tensor with the given `lens`.
fn reduce_axis(
    src: &[f64],
    lens: &[usize],
    axis: usize,
    ranges: &[Option<(usize, usize)>],
    op: Op,
) -> Vec<f64> {
    let stride: usize = lens[..axis].iter().product();
    let len = lens[axis];
    let lines = src.len() / len;
    let results: Vec<Vec<f64>> = (0..lines)
        .into_par_iter()
        .map(|l| {
            let inner = l % stride;
            let outer = l / stride;
            let base = outer * len * stride + inner;
            let vals: Vec<f64> = (0..len).map(|k| src[base + k * stride]).collect();
            reduce_line(&vals, ranges, op)
        })
        .collect();
    let mut out = vec![0.0; src.len()];
    for (l, res) in results.into_iter().enumerate() {
        let inner = l % stride;
        let outer = l / stride;
        let base = outer * len * stride + inner;
        for (k, v) in res.into_iter().enumerate() {
            out[base + k * stride] = v;
        }
    }
    out
}

fn axis_ranges(grid: &Grid, axis: usize, lo: f64, hi: f64, scale: f64) -> Vec<Option<(usize, usize)>> {
    let ax = grid.axis(axis);
    ax.mids()
        .iter()
        .map(|&m| ax.index_range(m + scale * lo, m + scale * hi))
        .collect()
}

/// `out(x) = op_{y ∈ xQ} src(y)` at every grid sample.
fn box_reduce(grid: &Grid, q: &Window, src: &[f64], op: Op) -> Vec<f64> {
    let lens: Vec<usize> = grid.axes().iter().map(|a| a.len()).collect();
    match grid.group() {
        GroupSpec::Euclidean(_) | GroupSpec::Lattice(_) => {
            let mut cur = src.to_vec();
            for d in 0..grid.dim() {
                let ranges = axis_ranges(grid, d, q.lo[d], q.hi[d], 1.0);
                cur = reduce_axis(&cur, &lens, d, &ranges, op);
            }
            cur
        }
        GroupSpec::Axb(n) => {
            let a_axis = grid.axis(n);
            let row = grid.strides()[n];
            let x_lens = &lens[..n];
            let rows: Vec<Vec<f64>> = (0..a_axis.len())
                .into_par_iter()
                .map(|i| {
                    let a = a_axis.mids()[i];
                    let mut acc = vec![0.0f64; row];
                    let Some((j0, j1)) = a_axis.index_range(a * q.lo[n], a * q.hi[n]) else {
                        return acc;
                    };
                    let ranges: Vec<_> = (0..n)
                        .map(|d| axis_ranges(grid, d, q.lo[d], q.hi[d], a))
                        .collect();
                    for j in j0..=j1 {
                        let mut cur = src[j * row..(j + 1) * row].to_vec();
                        for (d, r) in ranges.iter().enumerate() {
                            cur = reduce_axis(&cur, x_lens, d, r, op);
                        }
                        for (s, v) in acc.iter_mut().zip(cur) {
                            match op {
                                Op::Max => *s = s.max(v),
                                Op::Sum => *s += v,
                            }
                        }
                    }
                    acc
                })
                .collect();
            rows.concat()
        }
    }
}

fn local_source(f: &SampledFunction, b: LocalComponent) -> Vec<f64> {
    let abs = f.abs();
    match b {
        LocalComponent::Linf => abs,
        LocalComponent::L1 | LocalComponent::M => abs
            .iter()
            .zip(f.grid().weights())
            .map(|(v, w)| if *v == 0.0 { 0.0 } else { v * w })
            .collect(),
    }
}

/// `K(F, Q, B)(x) = ‖χ_{xQ}·F‖_B` at every sample of `F`'s grid. Windows are
/// closed; samples on the boundary of `xQ` count as inside.
pub fn control_function(f: &SampledFunction, q: &Window, b: LocalComponent) -> Result<SampledFunction> {
    let grid = f.grid();
    q.validate(grid.group())?;
    let src = local_source(f, b);
    let op = if b == LocalComponent::Linf { Op::Max } else { Op::Sum };
    SampledFunction::from_real(grid.clone(), box_reduce(grid, q, &src, op))
}

/// `K(μ, Q, M)(x) = |μ|(xQ)` at every sample of `grid`.
pub fn control_function_measure(mu: &DiscreteMeasure, q: &Window, grid: &Arc<Grid>) -> Result<SampledFunction> {
    let group = grid.group();
    if mu.group != group {
        return Err(Error::GroupMismatch(format!(
            "measure on {} but grid on {}",
            mu.group.name(),
            group.name()
        )));
    }
    q.validate(group)?;
    let mut out = match &mu.density {
        Some(d) => {
            if !d.grid().same_as(grid) {
                return Err(Error::GridMismatch);
            }
            let src = local_source(d, LocalComponent::M);
            box_reduce(grid, q, &src, Op::Sum)
        }
        None => vec![0.0; grid.len()],
    };
    if !mu.atoms.is_empty() {
        let dim = grid.dim();
        let add: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let mut x = [0.0; MAX_DIM];
                grid.point_into(i, &mut x[..dim]);
                mu.atoms
                    .iter()
                    .filter(|(pt, _)| q.translate_contains(group, &x[..dim], None, pt))
                    .map(|(_, m)| m.norm())
                    .sum()
            })
            .collect();
        for (o, a) in out.iter_mut().zip(add) {
            *o += a;
        }
    }
    SampledFunction::from_real(grid.clone(), out)
}

/// `‖F | W(B, Y, Q)‖ = ‖K(F, Q, B)‖_Y`.
pub fn amalgam_norm(
    f: &SampledFunction,
    q: &Window,
    b: LocalComponent,
    y: &GlobalComponent,
) -> Result<NormValue> {
    y.check_group(f.group())?;
    let k = control_function(f, q, b)?;
    y.norm_of_abs(f.grid(), &k.abs())
}

/// `‖μ | W(M, Y, Q)‖` with the control function sampled on `grid`.
pub fn amalgam_norm_measure(
    mu: &DiscreteMeasure,
    q: &Window,
    y: &GlobalComponent,
    grid: &Arc<Grid>,
) -> Result<NormValue> {
    y.check_group(grid.group())?;
    let k = control_function_measure(mu, q, grid)?;
    y.norm_of_abs(grid, &k.abs())
}

/// `(‖F·ψ_i‖_B)_i`.
pub fn local_norms(f: &SampledFunction, psi: &Bupu, b: LocalComponent) -> Result<Vec<f64>> {
    if !f.grid().same_as(&psi.grid) {
        return Err(Error::GridMismatch);
    }
    let src = local_source(f, b);
    Ok(psi
        .functions
        .par_iter()
        .map(|list| match b {
            LocalComponent::Linf => list.iter().fold(0.0, |m: f64, &(i, v)| m.max(src[i] * v)),
            _ => list.iter().map(|&(i, v)| src[i] * v).sum(),
        })
        .collect())
}

/// `(‖F·χ_{x_i Q}‖_B)_i`.
pub fn characteristic_local_norms(
    f: &SampledFunction,
    points: &[Vec<f64>],
    q: &Window,
    b: LocalComponent,
) -> Result<Vec<f64>> {
    let grid = f.grid();
    let group = grid.group();
    q.validate(group)?;
    let src = local_source(f, b);
    let dim = grid.dim();
    points
        .par_iter()
        .map(|p| {
            group.check_coords(p)?;
            let mut lo = [0.0; MAX_DIM];
            let mut hi = [0.0; MAX_DIM];
            q.left_translate_box(group, p, &mut lo[..dim], &mut hi[..dim]);
            let mut acc: f64 = 0.0;
            if let Some(r) = grid.box_ranges(&lo[..dim], &hi[..dim]) {
                grid.for_each_in_ranges(&r, |i| match b {
                    LocalComponent::Linf => acc = acc.max(src[i]),
                    _ => acc += src[i],
                });
            }
            Ok(acc)
        })
        .collect()
}

/// `‖(‖F·ψ_i‖_B)_i | Y_d(X, U)‖` with `U` the partition's window.
pub fn discrete_amalgam_norm(
    f: &SampledFunction,
    psi: &Bupu,
    b: LocalComponent,
    y: &GlobalComponent,
) -> Result<NormValue> {
    y.check_group(f.group())?;
    let c = local_norms(f, psi, b)?;
    let steps = step_function(f.grid(), &psi.points, &c, &psi.window, None)?;
    y.norm_of_abs(f.grid(), &steps)
}

/// `‖(‖F·χ_{x_i Q}‖_B)_i | Y_d(X, Q)‖`.
pub fn discrete_amalgam_norm_characteristic(
    f: &SampledFunction,
    x: &WellSpreadSet,
    q: &Window,
    b: LocalComponent,
    y: &GlobalComponent,
) -> Result<NormValue> {
    if x.group != f.group() {
        return Err(Error::GroupMismatch("point set and function differ".into()));
    }
    y.check_group(f.group())?;
    let c = characteristic_local_norms(f, &x.points, q, b)?;
    let steps = step_function(f.grid(), &x.points, &c, q, None)?;
    y.norm_of_abs(f.grid(), &steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{build_bupu, BupuKind};
    use crate::grid::AxisSpec;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn finite(v: NormValue) -> f64 {
        v.value().unwrap()
    }

    /// Direct double loop over the grid, used as an oracle.
    fn brute_control(f: &SampledFunction, q: &Window, b: LocalComponent) -> Vec<f64> {
        let g = f.grid();
        let group = g.group();
        (0..g.len())
            .map(|i| {
                let x = g.point(i);
                let mut acc: f64 = 0.0;
                for k in 0..g.len() {
                    let y = g.point(k);
                    if q.translate_contains(group, &x, None, &y) {
                        let v = f.values()[k].norm();
                        match b {
                            LocalComponent::Linf => acc = acc.max(v),
                            _ => acc += v * g.weights()[k],
                        }
                    }
                }
                acc
            })
            .collect()
    }

    #[test]
    fn singleton_window_on_integers() {
        let g = Grid::lattice_1d(-5, 5).unwrap();
        let f = SampledFunction::from_real_fn(g, |p| p[0] * 0.5 - 1.0).unwrap();
        for b in [LocalComponent::Linf, LocalComponent::L1, LocalComponent::M] {
            let k = control_function(&f, &Window::singleton(1), b).unwrap();
            for (a, v) in k.values().iter().zip(f.values()) {
                assert_eq!(a.re, v.norm());
            }
        }
    }

    #[test]
    fn interval_indicator_overlap() {
        let g = Grid::euclidean_1d(-3.0, 3.0, 600).unwrap();
        let f = SampledFunction::from_real_fn(g, |p| if p[0].abs() <= 0.5 { 1.0 } else { 0.0 }).unwrap();
        let k = control_function(&f, &Window::interval(-0.5, 0.5), LocalComponent::Linf).unwrap();
        for x in [-0.95, -0.3, 0.0, 0.7, 0.985] {
            assert_eq!(k.eval(&[x]).re, 1.0, "{x}");
        }
        for x in [-1.05, 1.2, 2.5] {
            assert_eq!(k.eval(&[x]).re, 0.0, "{x}");
        }
    }

    #[test]
    fn gaussian_control_matches_dense_sup() {
        let g = Grid::euclidean_nodes_1d(1e-3, 6.0).unwrap();
        let f = SampledFunction::from_real_fn(g, |p| (-p[0] * p[0]).exp()).unwrap();
        let k = control_function(&f, &Window::interval(-0.5, 0.5), LocalComponent::Linf).unwrap();
        for i in 0..20 {
            let x = -3.0 + 0.3 * i as f64 + 0.05;
            let dense = (0..=100_000)
                .map(|s| x - 0.5 + s as f64 * 1e-5)
                .map(|t| (-t * t).exp())
                .fold(0.0, f64::max);
            let got = k.eval(&[x]).re;
            assert!((got - dense).abs() <= 1e-6 * dense, "{x}: {got} vs {dense}");
        }
    }

    #[test]
    fn unit_indicator_amalgam_norm() {
        let g = Grid::euclidean_1d(-2.0, 3.0, 5000).unwrap();
        let f = SampledFunction::from_real_fn(g, |p| if (0.0..=1.0).contains(&p[0]) { 1.0 } else { 0.0 }).unwrap();
        let v = finite(
            amalgam_norm(&f, &Window::interval(0.0, 1.0), LocalComponent::Linf, &GlobalComponent::lp(1.0))
                .unwrap(),
        );
        assert!((v - 2.0).abs() <= 1e-3, "{v}");
    }

    #[test]
    fn matches_brute_force_on_the_line() {
        let g = Grid::euclidean_1d(-4.0, 4.0, 320).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let steps: Vec<f64> = (0..16).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let f = SampledFunction::from_real_fn(g, |p| steps[((p[0] + 4.0) * 2.0) as usize]).unwrap();
        let q = Window::interval(-0.25, 0.25);
        for b in [LocalComponent::Linf, LocalComponent::L1] {
            let fast = control_function(&f, &q, b).unwrap();
            let slow = brute_control(&f, &q, b);
            for (a, s) in fast.values().iter().zip(&slow) {
                assert!((a.re - s).abs() <= 1e-12 * (1.0 + s), "{b:?}");
            }
        }
        let y = GlobalComponent::lp(0.5);
        let fast = finite(amalgam_norm(&f, &q, LocalComponent::L1, &y).unwrap());
        let slow = finite(y.norm_of_abs(f.grid(), &brute_control(&f, &q, LocalComponent::L1)).unwrap());
        assert!((fast - slow).abs() <= 1e-6 * slow);
    }

    #[test]
    fn matches_brute_force_on_axb_and_the_plane() {
        let g = Grid::axb_1d(0.25, 3.0, 2, 4).unwrap();
        let f = SampledFunction::from_real_fn(g, |p| (p[0] * 1.3).sin() + p[1].ln() * 0.7).unwrap();
        let q = Window::axb(1, 0.6, 1.7);
        for b in [LocalComponent::Linf, LocalComponent::L1] {
            let fast = control_function(&f, &q, b).unwrap();
            let slow = brute_control(&f, &q, b);
            for (a, s) in fast.values().iter().zip(&slow) {
                assert!((a.re - s).abs() <= 1e-12 * (1.0 + s), "{b:?} {} {s}", a.re);
            }
        }
        let p = Grid::new(
            GroupSpec::Euclidean(2),
            vec![
                AxisSpec::Uniform { lo: -1.0, hi: 1.0, cells: 12 },
                AxisSpec::Uniform { lo: -1.0, hi: 2.0, cells: 9 },
            ],
        )
        .unwrap();
        let f = SampledFunction::from_real_fn(p, |x| x[0] * x[1] - 0.2).unwrap();
        let q = Window::new(vec![-0.3, 0.0], vec![0.2, 0.7]);
        for b in [LocalComponent::Linf, LocalComponent::L1] {
            let fast = control_function(&f, &q, b).unwrap();
            let slow = brute_control(&f, &q, b);
            for (a, s) in fast.values().iter().zip(&slow) {
                assert!((a.re - s).abs() <= 1e-12 * (1.0 + s));
            }
        }
    }

    #[test]
    fn discrete_norms_on_integers() {
        let g = Grid::lattice_1d(-6, 6).unwrap();
        let f = SampledFunction::from_real_fn(g.clone(), |p| if p[0].abs() <= 3.0 { p[0] + 0.5 } else { 0.0 }).unwrap();
        let x = WellSpreadSet::regular(GroupSpec::Lattice(1), 1.0, -6, 6).unwrap();
        let psi = build_bupu(&x, &Window::singleton(1), &g, BupuKind::Hats).unwrap();
        for p in [0.5, 1.0, 2.0] {
            let y = GlobalComponent::lp(p);
            let d = finite(discrete_amalgam_norm(&f, &psi, LocalComponent::Linf, &y).unwrap());
            let direct = finite(crate::components::quasi_norm(&y, &f).unwrap());
            assert!((d - direct).abs() <= 1e-12 * direct);
        }
    }

    #[test]
    fn hats_versus_continuous_norm() {
        let g = Grid::euclidean_1d(-3.0, 4.0, 700).unwrap();
        let f = SampledFunction::from_real_fn(g.clone(), |p| if (0.0..=1.0).contains(&p[0]) { 1.0 } else { 0.0 })
            .unwrap();
        let x = WellSpreadSet::regular(GroupSpec::Euclidean(1), 1.0, -4, 5).unwrap();
        let psi = build_bupu(&x, &Window::interval(-1.0, 1.0), &g, BupuKind::Hats).unwrap();
        let y = GlobalComponent::lp(1.0);
        let c = local_norms(&f, &psi, LocalComponent::Linf).unwrap();
        assert!((c[4] - 1.0).abs() < 1e-2 && (c[5] - 1.0).abs() < 1e-2);
        let d = finite(discrete_amalgam_norm(&f, &psi, LocalComponent::Linf, &y).unwrap());
        let a = finite(amalgam_norm(&f, &Window::interval(0.0, 1.0), LocalComponent::Linf, &y).unwrap());
        let r = d / a;
        assert!((0.25..=4.0).contains(&r), "{r}");
        let ch = finite(
            discrete_amalgam_norm_characteristic(&f, &x, &Window::interval(0.0, 1.0), LocalComponent::Linf, &y)
                .unwrap(),
        );
        assert!(ch > 0.0);
    }

    #[test]
    fn measure_control_counts_atoms() {
        let g = Grid::lattice_1d(-5, 5).unwrap();
        let mu = DiscreteMeasure::atoms(
            GroupSpec::Lattice(1),
            vec![(vec![0.0], Complex64::new(1.0, 0.0)), (vec![2.0], Complex64::new(0.0, -3.0))],
        )
        .unwrap();
        let k = control_function_measure(&mu, &Window::interval(-1.0, 1.0), &g).unwrap();
        let want = |x: f64| {
            let mut s = 0.0;
            if (x - 0.0).abs() <= 1.0 {
                s += 1.0;
            }
            if (x - 2.0).abs() <= 1.0 {
                s += 3.0;
            }
            s
        };
        for i in 0..g.len() {
            assert_eq!(k.values()[i].re, want(g.point(i)[0]));
        }
    }

    #[test]
    fn errors_propagate() {
        let g = Grid::euclidean_1d(0.0, 1.0, 10).unwrap();
        let f = SampledFunction::zeros(g);
        assert!(matches!(
            control_function(&f, &Window::interval(0.0, f64::INFINITY), LocalComponent::Linf),
            Err(Error::UnboundedWindow(_))
        ));
        assert!(matches!(
            amalgam_norm(
                &f,
                &Window::interval(0.0, 1.0),
                LocalComponent::Linf,
                &GlobalComponent::mixed(1.0, 1.0, crate::components::WeightFunction::constant(1.0))
            ),
            Err(Error::GroupMismatch(_))
        ));
    }
}
