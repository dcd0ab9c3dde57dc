//! Two-sided certificates for operator norms of translations on `W(B, Y)`.
//!
//! The lower bound is the largest observed `‖T_g F‖ / ‖F‖` over a test
//! family. The upper bound compares sequence norms of translated cells: for
//! `R_g` the cells `x_i·U·g⁻¹` (where `R_g` moves a piece supported in
//! `x_i·U`), for `L_g` the shifted set `g·X`, and for `A_g = Δ(g⁻¹)R_{g⁻¹}`
//! the cells `x_i·U·g`. The worst ratio over unit and random coefficient
//! vectors is multiplied by the spread `max ρ / min ρ` of the
//! discrete-to-continuous norm ratios `ρ` observed on the family.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::components::{step_function, NormValue};
use crate::discretization::{Bupu, WellSpreadSet};
use crate::error::{Error, Result};
use crate::grid::{SampledFunction, MAX_DIM};

use super::{amalgam_norm, discrete_amalgam_norm, translate, AmalgamSpace, Direction};

/// Test family, partition and sampling parameters for the estimator.
#[derive(Clone, Debug)]
pub struct EstimatorSetup<'a> {
    pub family: &'a [SampledFunction],
    pub set: &'a WellSpreadSet,
    pub bupu: &'a Bupu,
    /// Random coefficient vectors in addition to the unit vectors.
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorNormBounds {
    pub lower: f64,
    pub upper: f64,
    /// `max ρ / min ρ` over the family.
    pub frame_constant: f64,
    /// Worst sequence-norm ratio of translated versus untranslated cells.
    pub sequence_factor: f64,
    /// Index of the family member attaining `lower`.
    pub witness: Option<usize>,
}

impl OperatorNormBounds {
    pub fn is_consistent(&self) -> bool {
        self.lower <= self.upper * (1.0 + 1e-9)
    }
}

fn finite(v: NormValue) -> Option<f64> {
    v.value().filter(|x| *x > 0.0)
}

/// Worst ratio `‖λ | Y_d(X', U·r)‖ / ‖λ | Y_d(X, U)‖` over unit vectors and
/// `trials` random nonnegative vectors, supported on the points whose cells
/// stay inside the grid.
#[allow(clippy::too_many_arguments)]
pub(crate) fn sequence_ratio(
    space: &AmalgamSpace,
    set: &WellSpreadSet,
    moved_points: &[Vec<f64>],
    window: &crate::window::Window,
    right: Option<&[f64]>,
    grid: &crate::grid::Grid,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let m = set.len();
    // cells cut by the grid boundary would compare truncated norms
    let group = grid.group();
    let support = grid.metadata().support_window;
    let inside = |lo: &[f64], hi: &[f64]| {
        support
            .iter()
            .zip(lo.iter().zip(hi))
            .all(|(s, (l, h))| *l >= s[0] && *h <= s[1])
    };
    let usable: Vec<usize> = (0..m)
        .filter(|&i| {
            let (l0, h0) = window.translate_bbox(group, &set.points[i], None);
            let (l1, h1) = window.translate_bbox(group, &moved_points[i], right);
            inside(&l0, &h0) && inside(&l1, &h1)
        })
        .collect();
    let mut vectors: Vec<Vec<f64>> = usable
        .iter()
        .map(|&i| {
            let mut e = vec![0.0; m];
            e[i] = 1.0;
            e
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let mut lam = vec![0.0; m];
        for &i in &usable {
            lam[i] = rng.gen::<f64>();
        }
        vectors.push(lam);
    }
    let ratios: Vec<Option<f64>> = vectors
        .par_iter()
        .map(|lam| -> Result<Option<f64>> {
            let base = step_function(grid, &set.points, lam, window, None)?;
            let moved = step_function(grid, moved_points, lam, window, right)?;
            let b = space.global.norm_of_abs(grid, &base)?;
            let t = space.global.norm_of_abs(grid, &moved)?;
            Ok(match (finite(b), t) {
                (Some(b), NormValue::Finite(t)) => Some(t / b),
                (Some(_), NormValue::Overflow) => Some(f64::INFINITY),
                _ => None,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ratios.into_iter().flatten().fold(0.0, f64::max))
}

/// `(lower, upper)` for `‖T_g | W(B, Y, Q)‖`, `T ∈ {L, R, A}`.
pub fn estimate_translation_operator_norm(
    space: &AmalgamSpace,
    g: &[f64],
    dir: Direction,
    setup: &EstimatorSetup<'_>,
) -> Result<OperatorNormBounds> {
    if setup.family.is_empty() {
        return Err(Error::EmptyInput("test family"));
    }
    let grid = setup.bupu.grid.clone();
    let group = grid.group();
    group.check_coords(g)?;
    if setup.set.group != group {
        return Err(Error::GroupMismatch("point set and grid differ".into()));
    }
    let per: Vec<(Option<f64>, Option<f64>)> = setup
        .family
        .par_iter()
        .map(|f| -> Result<_> {
            if !f.grid().same_as(&grid) {
                return Err(Error::GridMismatch);
            }
            let Some(n) = finite(space.norm(f)?) else {
                return Ok((None, None));
            };
            let t = translate(f, g, dir)?.function;
            let ratio = match space.norm(&t)? {
                NormValue::Finite(v) => v / n,
                NormValue::Overflow => f64::INFINITY,
            };
            let d = discrete_amalgam_norm(f, setup.bupu, space.local, &space.global)?;
            Ok((Some(ratio), d.value().map(|d| d / n)))
        })
        .collect::<Result<_>>()?;
    let mut lower: f64 = 0.0;
    let mut witness = None;
    let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
    for (i, (ratio, rho)) in per.iter().enumerate() {
        if let Some(r) = ratio {
            if *r > lower {
                lower = *r;
                witness = Some(i);
            }
        }
        if let Some(r) = rho.filter(|r| *r > 0.0) {
            rmin = rmin.min(r);
            rmax = rmax.max(r);
        }
    }
    let frame_constant = if rmax > 0.0 { rmax / rmin } else { f64::INFINITY };

    let dim = group.dim();
    let mut ginv = [0.0; MAX_DIM];
    group.inv_into(g, &mut ginv[..dim]);
    let window = &setup.bupu.window;
    let sequence_factor = match dir {
        Direction::R => sequence_ratio(
            space,
            setup.set,
            &setup.set.points,
            window,
            Some(&ginv[..dim]),
            &grid,
            setup.trials,
            setup.seed,
        )?,
        Direction::A => {
            group.modular_raw(&ginv[..dim])
                * sequence_ratio(space, setup.set, &setup.set.points, window, Some(g), &grid, setup.trials, setup.seed)?
        }
        Direction::L => {
            let moved = setup.set.left_translated(g)?;
            sequence_ratio(space, setup.set, &moved.points, window, None, &grid, setup.trials, setup.seed)?
        }
    };
    Ok(OperatorNormBounds {
        lower,
        upper: frame_constant * sequence_factor,
        frame_constant,
        sequence_factor,
        witness,
    })
}

/// `‖F | W₁‖ / ‖F | W₂‖`, or `None` when either side is zero or overflows.
pub fn amalgam_ratio(
    f: &SampledFunction,
    num: &AmalgamSpace,
    den: &AmalgamSpace,
) -> Result<Option<f64>> {
    let a = amalgam_norm(f, &num.window, num.local, &num.global)?;
    let b = amalgam_norm(f, &den.window, den.local, &den.global)?;
    Ok(match (a, finite(b)) {
        (NormValue::Finite(a), Some(b)) => Some(a / b),
        _ => None,
    })
}
