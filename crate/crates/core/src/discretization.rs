//! Well-spread point sets and bounded uniform partitions of unity.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction, MAX_DIM};
use crate::group::GroupSpec;
use crate::window::Window;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationRecord {
    pub window: Window,
    pub constant: usize,
}

/// Labels `(k, j)` of the points `(a0·b0^{-j}·k, b0^{-j})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxbLattice {
    pub a0: f64,
    pub b0: f64,
    pub labels: Vec<(Vec<i64>, i64)>,
}

impl AxbLattice {
    /// Dilation `a_j = b0^{-j}`.
    pub fn scale(&self, j: i64) -> f64 {
        self.b0.powi(-(j as i32))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityCertificate {
    pub window: Window,
    pub probes: usize,
    /// Largest over probes of the smallest window gauge; `≤ 1` means covered.
    pub worst_gauge: f64,
}

/// A finite family of points with its density and separation records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WellSpreadSet {
    pub group: GroupSpec,
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityCertificate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub separation_constants: Vec<SeparationRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<AxbLattice>,
}

impl WellSpreadSet {
    pub fn new(group: GroupSpec, points: Vec<Vec<f64>>) -> Result<WellSpreadSet> {
        group.validate()?;
        for p in &points {
            group.check_coords(p)?;
        }
        Ok(WellSpreadSet {
            group,
            points,
            density: None,
            separation_constants: Vec::new(),
            lattice: None,
        })
    }

    /// `{spacing·k : k ∈ [k_lo, k_hi]ⁿ}` on `ℝⁿ` or `ℤⁿ`.
    pub fn regular(group: GroupSpec, spacing: f64, k_lo: i64, k_hi: i64) -> Result<WellSpreadSet> {
        if group.is_in_group() {
            let n = group.n();
            let side: Vec<f64> = (k_lo..=k_hi).map(|k| k as f64 * spacing).collect();
            let mut points = vec![Vec::new()];
            for _ in 0..n {
                points = points
                    .into_iter()
                    .flat_map(|p: Vec<f64>| {
                        side.iter().map(move |&s| {
                            let mut q = p.clone();
                            q.push(s);
                            q
                        })
                    })
                    .collect();
            }
            WellSpreadSet::new(group, points)
        } else {
            Err(Error::GroupMismatch(
                "regular sets are defined on ℝⁿ and ℤⁿ; use build_axb_lattice on ax+b".into(),
            ))
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Left translate `g·X`.
    pub fn left_translated(&self, g: &[f64]) -> Result<WellSpreadSet> {
        self.group.check_coords(g)?;
        let dim = self.group.dim();
        let points = self
            .points
            .iter()
            .map(|x| {
                let mut out = vec![0.0; dim];
                self.group.mul_into(g, x, &mut out);
                out
            })
            .collect();
        WellSpreadSet::new(self.group, points)
    }
}

fn boxes_meet(alo: &[f64], ahi: &[f64], blo: &[f64], bhi: &[f64]) -> bool {
    let tol = |v: f64| 1e-12 * (1.0 + v.abs());
    alo.iter()
        .zip(ahi)
        .zip(blo.iter().zip(bhi))
        .all(|((al, ah), (bl, bh))| *al <= bh + tol(*bh) && *bl <= ah + tol(*ah))
}

/// `max_j #{i : x_i K ∩ x_j K ≠ ∅}` by an all-pairs test of closed boxes;
/// touching boxes count as meeting. The value is stored on `x`.
pub fn check_relatively_separated(x: &mut WellSpreadSet, k: &Window) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::EmptyInput("point set"));
    }
    k.validate(x.group)?;
    let dim = x.group.dim();
    let boxes: Vec<(Vec<f64>, Vec<f64>)> = x
        .points
        .iter()
        .map(|p| {
            let mut lo = vec![0.0; dim];
            let mut hi = vec![0.0; dim];
            k.left_translate_box(x.group, p, &mut lo, &mut hi);
            (lo, hi)
        })
        .collect();
    let c = boxes
        .par_iter()
        .map(|(jl, jh)| {
            boxes
                .iter()
                .filter(|(il, ih)| boxes_meet(il, ih, jl, jh))
                .count()
        })
        .max()
        .unwrap_or(0);
    x.separation_constants.retain(|r| r.window != *k);
    x.separation_constants.push(SeparationRecord {
        window: k.clone(),
        constant: c,
    });
    Ok(c)
}

/// Index ranges of an `ax+b` lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxbLatticeSpec {
    pub n: usize,
    pub a0: f64,
    pub b0: f64,
    /// Inclusive range of every component of `k`.
    pub k_range: (i64, i64),
    /// Inclusive range of `j`.
    pub j_range: (i64, i64),
}

/// Points `(a0·b0^{-j}·k, b0^{-j})` for `k ∈ [k_lo, k_hi]ⁿ`, `j ∈ [j_lo, j_hi]`,
/// ordered by `j`, then `k` with the first component fastest.
pub fn build_axb_lattice(spec: &AxbLatticeSpec) -> Result<WellSpreadSet> {
    let AxbLatticeSpec {
        n,
        a0,
        b0,
        k_range,
        j_range,
    } = *spec;
    if !(a0.is_finite() && a0 > 0.0) {
        return Err(Error::param("a0", format!("need a0 > 0, got {a0}")));
    }
    if !(b0.is_finite() && b0 > 1.0) {
        return Err(Error::param("b0", format!("need b0 > 1, got {b0}")));
    }
    if k_range.1 < k_range.0 || j_range.1 < j_range.0 {
        return Err(Error::EmptyInput("lattice index range"));
    }
    let group = GroupSpec::Axb(n);
    group.validate()?;
    let side = (k_range.1 - k_range.0 + 1) as usize;
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for j in j_range.0..=j_range.1 {
        let a = b0.powi(-(j as i32));
        for flat in 0..side.pow(n as u32) {
            let mut rem = flat;
            let k: Vec<i64> = (0..n)
                .map(|_| {
                    let c = k_range.0 + (rem % side) as i64;
                    rem /= side;
                    c
                })
                .collect();
            let mut p: Vec<f64> = k.iter().map(|&c| a0 * a * c as f64).collect();
            p.push(a);
            points.push(p);
            labels.push((k, j));
        }
    }
    let mut set = WellSpreadSet::new(group, points)?;
    set.lattice = Some(AxbLattice { a0, b0, labels });
    Ok(set)
}

/// Checks that every sample of `probes` lies in some `x_i·V`; records the
/// certificate on success and names the first uncovered sample otherwise.
pub fn certify_density(x: &mut WellSpreadSet, v: &Window, probes: &Grid) -> Result<DensityCertificate> {
    if x.is_empty() {
        return Err(Error::EmptyInput("point set"));
    }
    if probes.group() != x.group {
        return Err(Error::GroupMismatch("probe grid and point set differ".into()));
    }
    v.validate(x.group)?;
    let group = x.group;
    let dim = group.dim();
    let boxes: Vec<(Vec<f64>, Vec<f64>)> = x
        .points
        .iter()
        .map(|p| {
            let mut lo = vec![0.0; dim];
            let mut hi = vec![0.0; dim];
            v.left_translate_box(group, p, &mut lo, &mut hi);
            (lo, hi)
        })
        .collect();
    let gauges: Vec<f64> = (0..probes.len())
        .into_par_iter()
        .map(|idx| {
            let mut y = [0.0; MAX_DIM];
            let mut u = [0.0; MAX_DIM];
            probes.point_into(idx, &mut y[..dim]);
            let mut best = f64::INFINITY;
            for (p, (lo, hi)) in x.points.iter().zip(&boxes) {
                if boxes_meet(lo, hi, &y[..dim], &y[..dim]) {
                    group.left_quotient_into(p, &y[..dim], &mut u[..dim]);
                    best = best.min(v.gauge(group, &u[..dim]));
                }
            }
            best
        })
        .collect();
    let tol = 1e-9;
    if let Some(idx) = gauges.iter().position(|&g| g > 1.0 + tol) {
        return Err(Error::NotDense {
            point: probes.point(idx),
        });
    }
    let cert = DensityCertificate {
        window: v.clone(),
        probes: probes.len(),
        worst_gauge: gauges.iter().cloned().fold(0.0, f64::max),
    };
    x.density = Some(cert.clone());
    Ok(cert)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BupuKind {
    /// Tensor-product tents in window coordinates, renormalized by their sum.
    Hats,
    /// Characteristic functions of Voronoi cells in the window gauge.
    Voronoi,
}

/// A bounded uniform partition of unity tabulated on a grid.
#[derive(Clone, Debug)]
pub struct Bupu {
    pub grid: Arc<Grid>,
    pub points: Vec<Vec<f64>>,
    pub window: Window,
    pub kind: BupuKind,
    /// For every point `x_i`, the nonzero samples `(grid index, ψ_i)`.
    pub functions: Vec<Vec<(usize, f64)>>,
}

/// Outcome of an independent re-check of the partition conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BupuCheck {
    pub min_value: f64,
    pub max_value: f64,
    pub max_sum_error: f64,
    pub support_violations: usize,
}

impl BupuCheck {
    pub fn passes(&self) -> bool {
        self.min_value >= 0.0
            && self.max_value <= 1.0 + 1e-12
            && self.max_sum_error <= 1e-12
            && self.support_violations == 0
    }
}

fn raw_value(kind: BupuKind, group: GroupSpec, window: &Window, u: &[f64]) -> f64 {
    match kind {
        BupuKind::Hats => window.tent(group, u),
        BupuKind::Voronoi => {
            let g = window.gauge(group, u);
            if g <= 1.0 + 1e-9 {
                // smaller gauge wins; stored negated so larger is better
                -g
            } else {
                f64::NEG_INFINITY
            }
        }
    }
}

/// Builds a partition of unity on every sample of `grid`, subordinate to the
/// translates `x_i·U`.
pub fn build_bupu(x: &WellSpreadSet, u: &Window, grid: &Arc<Grid>, kind: BupuKind) -> Result<Bupu> {
    if x.is_empty() {
        return Err(Error::EmptyInput("point set"));
    }
    if grid.group() != x.group {
        return Err(Error::GroupMismatch("grid and point set differ".into()));
    }
    let group = x.group;
    u.validate(group)?;
    let dim = group.dim();

    // per point: candidate samples with raw scores
    let raw: Vec<Vec<(usize, f64)>> = x
        .points
        .par_iter()
        .map(|p| {
            let mut out = Vec::new();
            let (lo, hi) = u.translate_bbox(group, p, None);
            if let Some(ranges) = grid.box_ranges(&lo, &hi) {
                let mut y = [0.0; MAX_DIM];
                let mut w = [0.0; MAX_DIM];
                grid.for_each_in_ranges(&ranges, |idx| {
                    grid.point_into(idx, &mut y[..dim]);
                    group.left_quotient_into(p, &y[..dim], &mut w[..dim]);
                    let s = raw_value(kind, group, u, &w[..dim]);
                    let keep = match kind {
                        BupuKind::Hats => s > 0.0,
                        BupuKind::Voronoi => s > f64::NEG_INFINITY,
                    };
                    if keep {
                        out.push((idx, s));
                    }
                });
            }
            out
        })
        .collect();

    let functions = match kind {
        BupuKind::Hats => {
            let mut sum = vec![0.0; grid.len()];
            for list in &raw {
                for &(idx, s) in list {
                    sum[idx] += s;
                }
            }
            if let Some(idx) = sum.iter().position(|&s| s <= 0.0) {
                return Err(Error::NotDense {
                    point: grid.point(idx),
                });
            }
            raw.into_iter()
                .map(|list| list.into_iter().map(|(idx, s)| (idx, s / sum[idx])).collect())
                .collect()
        }
        BupuKind::Voronoi => {
            let mut owner: Vec<Option<(f64, usize)>> = vec![None; grid.len()];
            for (i, list) in raw.iter().enumerate() {
                for &(idx, s) in list {
                    match owner[idx] {
                        Some((best, _)) if best >= s => {}
                        _ => owner[idx] = Some((s, i)),
                    }
                }
            }
            let mut functions = vec![Vec::new(); x.len()];
            for (idx, o) in owner.iter().enumerate() {
                match o {
                    Some((_, i)) => functions[*i].push((idx, 1.0)),
                    None => {
                        return Err(Error::NotDense {
                            point: grid.point(idx),
                        })
                    }
                }
            }
            functions
        }
    };
    Ok(Bupu {
        grid: grid.clone(),
        points: x.points.clone(),
        window: u.clone(),
        kind,
        functions,
    })
}

impl Bupu {
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// `ψ_i` as a sampled function.
    pub fn function(&self, i: usize) -> SampledFunction {
        let mut v = vec![0.0; self.grid.len()];
        for &(idx, s) in &self.functions[i] {
            v[idx] = s;
        }
        SampledFunction::from_real(self.grid.clone(), v).expect("finite partition values")
    }

    /// `ψ_i(y)` at an arbitrary point, from the same closed-form rule.
    pub fn value_at(&self, i: usize, y: &[f64]) -> f64 {
        let group = self.grid.group();
        let dim = group.dim();
        let mut w = [0.0; MAX_DIM];
        let scores: Vec<f64> = self
            .points
            .iter()
            .map(|p| {
                group.left_quotient_into(p, y, &mut w[..dim]);
                raw_value(self.kind, group, &self.window, &w[..dim])
            })
            .collect();
        match self.kind {
            BupuKind::Hats => {
                let total: f64 = scores.iter().sum();
                if total > 0.0 {
                    scores[i] / total
                } else {
                    0.0
                }
            }
            BupuKind::Voronoi => {
                let mut best = (f64::NEG_INFINITY, usize::MAX);
                for (k, &s) in scores.iter().enumerate() {
                    if s > best.0 {
                        best = (s, k);
                    }
                }
                if best.1 == i && best.0 > f64::NEG_INFINITY {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Independent re-check of `0 ≤ ψ_i ≤ 1`, `Σ ψ_i = 1` and
    /// `supp ψ_i ⊂ x_i·U`.
    pub fn check(&self) -> BupuCheck {
        let group = self.grid.group();
        let dim = group.dim();
        let mut sum = vec![0.0; self.grid.len()];
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut violations = 0;
        let mut y = [0.0; MAX_DIM];
        for (p, list) in self.points.iter().zip(&self.functions) {
            for &(idx, s) in list {
                sum[idx] += s;
                lo = lo.min(s);
                hi = hi.max(s);
                self.grid.point_into(idx, &mut y[..dim]);
                if s != 0.0 && !self.window.translate_contains(group, p, None, &y[..dim]) {
                    violations += 1;
                }
            }
        }
        BupuCheck {
            min_value: if lo.is_finite() { lo } else { 0.0 },
            max_value: hi.max(0.0),
            max_sum_error: sum.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max),
            support_violations: violations,
        }
    }

    /// CSV rows `point,lo…,hi…,grid_index,value` with a one-line header.
    pub fn to_csv(&self) -> String {
        let group = self.grid.group();
        let dim = group.dim();
        let mut s = String::from("point");
        for d in 0..dim {
            s.push_str(&format!(",lo{d}"));
        }
        for d in 0..dim {
            s.push_str(&format!(",hi{d}"));
        }
        s.push_str(",grid_index,value\n");
        for (i, (p, list)) in self.points.iter().zip(&self.functions).enumerate() {
            let (lo, hi) = self.window.translate_bbox(group, p, None);
            let bounds: Vec<String> = lo.iter().chain(&hi).map(|v| v.to_string()).collect();
            for &(idx, v) in list {
                s.push_str(&format!("{i},{},{idx},{v}\n", bounds.join(",")));
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::AxisSpec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn integers(lo: i64, hi: i64) -> WellSpreadSet {
        WellSpreadSet::regular(GroupSpec::Euclidean(1), 1.0, lo, hi).unwrap()
    }

    #[test]
    fn integer_overlap_count() {
        let mut x = integers(-10, 10);
        assert_eq!(check_relatively_separated(&mut x, &Window::interval(0.0, 1.0)).unwrap(), 3);
        assert_eq!(x.separation_constants.len(), 1);
        let mut one = WellSpreadSet::new(GroupSpec::Euclidean(1), vec![vec![0.0]]).unwrap();
        assert_eq!(check_relatively_separated(&mut one, &Window::interval(-5.0, 5.0)).unwrap(), 1);
        let mut empty = WellSpreadSet::new(GroupSpec::Euclidean(1), vec![]).unwrap();
        assert_eq!(
            check_relatively_separated(&mut empty, &Window::interval(0.0, 1.0)),
            Err(Error::EmptyInput("point set"))
        );
    }

    fn small_axb_lattice() -> WellSpreadSet {
        build_axb_lattice(&AxbLatticeSpec {
            n: 1,
            a0: 0.5,
            b0: 2.0,
            k_range: (-8, 8),
            j_range: (-2, 2),
        })
        .unwrap()
    }

    #[test]
    fn axb_lattice_overlap_matches_brute_force() {
        let mut x = small_axb_lattice();
        let k = Window::new(vec![0.0, 1.0], vec![0.5, 2.0]);
        let c = check_relatively_separated(&mut x, &k).unwrap();
        // oracle: intervals written out by hand from the group law
        let boxes: Vec<[f64; 4]> = x
            .points
            .iter()
            .map(|p| [p[0], p[0] + 0.5 * p[1], p[1], 2.0 * p[1]])
            .collect();
        let mut best = 0;
        for b in &boxes {
            let cnt = boxes
                .iter()
                .filter(|a| a[0] <= b[1] && b[0] <= a[1] && a[2] <= b[3] && b[2] <= a[3])
                .count();
            best = best.max(cnt);
        }
        assert_eq!(c, best);
    }

    #[test]
    fn separation_is_monotone_in_the_window() {
        let mut x = small_axb_lattice();
        let small = check_relatively_separated(&mut x, &Window::new(vec![0.0, 1.0], vec![0.25, 1.5])).unwrap();
        let big = check_relatively_separated(&mut x, &Window::new(vec![0.0, 1.0], vec![0.5, 2.0])).unwrap();
        assert!(small <= big);
    }

    #[test]
    fn axb_lattice_points() {
        let x = build_axb_lattice(&AxbLatticeSpec {
            n: 1,
            a0: 1.0,
            b0: 2.0,
            k_range: (-1, 1),
            j_range: (0, 0),
        })
        .unwrap();
        assert_eq!(x.points, vec![vec![-1.0, 1.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        let y = build_axb_lattice(&AxbLatticeSpec {
            n: 1,
            a0: 1.0,
            b0: 2.0,
            k_range: (3, 3),
            j_range: (1, 1),
        })
        .unwrap();
        assert_eq!(y.points, vec![vec![1.5, 0.5]]);
        assert!(build_axb_lattice(&AxbLatticeSpec {
            n: 1,
            a0: 0.0,
            b0: 2.0,
            k_range: (0, 0),
            j_range: (0, 0)
        })
        .is_err());
        assert!(build_axb_lattice(&AxbLatticeSpec {
            n: 1,
            a0: 1.0,
            b0: 1.0,
            k_range: (0, 0),
            j_range: (0, 0)
        })
        .is_err());
    }

    #[test]
    fn axb_density_certificate() {
        let mut x = build_axb_lattice(&AxbLatticeSpec {
            n: 1,
            a0: 0.5,
            b0: 2.0,
            k_range: (-40, 40),
            j_range: (-3, 3),
        })
        .unwrap();
        let probes = Grid::new(
            GroupSpec::Axb(1),
            vec![
                AxisSpec::Uniform { lo: -4.0, hi: 4.0, cells: 160 },
                AxisSpec::Geometric { lo: 0.25, hi: 4.0, cells: 80 },
            ],
        )
        .unwrap();
        let cert = certify_density(&mut x, &Window::axb(1, 1.0, 2.0), &probes).unwrap();
        assert!(cert.worst_gauge <= 1.0);
        assert!(x.density.is_some());
        // too few dilation levels leave the top of the window uncovered
        let mut thin = build_axb_lattice(&AxbLatticeSpec {
            n: 1,
            a0: 0.5,
            b0: 2.0,
            k_range: (-40, 40),
            j_range: (0, 3),
        })
        .unwrap();
        assert!(matches!(
            certify_density(&mut thin, &Window::axb(1, 1.0, 2.0), &probes),
            Err(Error::NotDense { .. })
        ));
    }

    #[test]
    fn integer_hats() {
        let x = integers(-3, 3);
        let g = Grid::euclidean_nodes_1d(0.125, 2.0).unwrap();
        let b = build_bupu(&x, &Window::interval(-1.0, 1.0), &g, BupuKind::Hats).unwrap();
        assert!(b.check().passes(), "{:?}", b.check());
        let psi0 = b.function(3);
        assert_eq!(psi0.eval(&[0.0]).re, 1.0);
        assert_eq!(psi0.eval(&[1.0]).re, 0.0);
        assert_eq!(psi0.eval(&[-1.0]).re, 0.0);
        assert!((psi0.eval(&[0.25]).re - 0.75).abs() < 1e-15);
        assert!((b.value_at(3, &[0.3]) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn voronoi_cells_are_indicators() {
        let x = integers(-3, 3);
        let g = Grid::euclidean_1d(-2.0, 2.0, 64).unwrap();
        let b = build_bupu(&x, &Window::interval(-1.0, 1.0), &g, BupuKind::Voronoi).unwrap();
        let c = b.check();
        assert!(c.passes(), "{c:?}");
        assert!(b.functions.iter().flatten().all(|&(_, v)| v == 1.0));
    }

    #[test]
    fn uncovered_points_are_reported() {
        let x = integers(0, 1);
        let g = Grid::euclidean_1d(-2.0, 3.0, 50).unwrap();
        match build_bupu(&x, &Window::interval(-1.0, 1.0), &g, BupuKind::Hats) {
            Err(Error::NotDense { point }) => assert!(point[0] < -1.0 || point[0] > 2.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn axb_hats_sum_to_one_at_random_samples() {
        let x = build_axb_lattice(&AxbLatticeSpec {
            n: 1,
            a0: 0.5,
            b0: 2.0,
            k_range: (-80, 80),
            j_range: (-3, 3),
        })
        .unwrap();
        let g = Grid::axb_1d(1.0 / 32.0, 4.0, 2, 16).unwrap();
        let b = build_bupu(&x, &Window::axb(1, 1.0, 2.0), &g, BupuKind::Hats).unwrap();
        let mut sum = vec![0.0; g.len()];
        for list in &b.functions {
            for &(idx, v) in list {
                assert!((0.0..=1.0).contains(&v));
                sum[idx] += v;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let idx = rng.gen_range(0..g.len());
            assert!((sum[idx] - 1.0).abs() <= 1e-12);
        }
        assert_eq!(b.check().support_violations, 0);
    }

    proptest! {
        #[test]
        fn partition_reconstructs_functions(vals in proptest::collection::vec(-5.0..5.0f64, 33), shift in 0.0..0.9f64) {
            let x = WellSpreadSet::new(
                GroupSpec::Euclidean(1),
                (-4..=4).map(|i| vec![i as f64 * 0.6 + shift]).collect(),
            ).unwrap();
            let g = Grid::euclidean_1d(-2.0, 2.0, 33).unwrap();
            let b = build_bupu(&x, &Window::interval(-0.7, 0.7), &g, BupuKind::Hats).unwrap();
            prop_assert!(b.check().passes());
            let mut rec = vec![0.0; g.len()];
            for list in &b.functions {
                for &(idx, v) in list {
                    rec[idx] += vals[idx] * v;
                }
            }
            for (r, v) in rec.iter().zip(&vals) {
                prop_assert!((r - v).abs() <= 1e-12 * (1.0 + v.abs()));
            }
        }
    }
}
