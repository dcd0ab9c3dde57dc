//! Sequence spaces `Y_d(X, U)`: `‖λ‖ = ‖Σ |λ_i| χ_{x_i U}‖_Y`.

use crate::discretization::WellSpreadSet;
use crate::error::{Error, Result};
use crate::grid::{Grid, MAX_DIM};
use crate::window::Window;

use super::{GlobalComponent, NormValue};

/// Coefficients indexed by a well-spread set, measured in `Y_d(X, U)`.
#[derive(Clone, Debug)]
pub struct DiscreteSequence<'a> {
    pub set: &'a WellSpreadSet,
    pub coefficients: Vec<f64>,
    pub component: GlobalComponent,
    pub window: Window,
}

impl<'a> DiscreteSequence<'a> {
    pub fn new(
        set: &'a WellSpreadSet,
        coefficients: Vec<f64>,
        component: GlobalComponent,
        window: Window,
    ) -> Result<Self> {
        if coefficients.len() != set.len() {
            return Err(Error::IndexMismatch(format!(
                "{} coefficients for {} points",
                coefficients.len(),
                set.len()
            )));
        }
        if let Some(i) = coefficients.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        Ok(DiscreteSequence {
            set,
            coefficients,
            component,
            window,
        })
    }

    pub fn norm(&self, grid: &Grid) -> Result<NormValue> {
        sequence_norm(self, grid)
    }
}

/// Samples of `Σ |λ_i| χ_{x_i·W·right}` on `grid`. Windows are closed.
pub fn step_function(
    grid: &Grid,
    points: &[Vec<f64>],
    coefficients: &[f64],
    window: &Window,
    right: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let group = grid.group();
    window.validate(group)?;
    if points.len() != coefficients.len() {
        return Err(Error::IndexMismatch(format!(
            "{} coefficients for {} points",
            coefficients.len(),
            points.len()
        )));
    }
    let dim = grid.dim();
    let mut out = vec![0.0; grid.len()];
    let mut buf = [0.0; MAX_DIM];
    for (x, &c) in points.iter().zip(coefficients) {
        group.check_coords(x)?;
        let c = c.abs();
        if c == 0.0 {
            continue;
        }
        let (lo, hi) = window.translate_bbox(group, x, right);
        let Some(ranges) = grid.box_ranges(&lo, &hi) else {
            continue;
        };
        match right {
            None => grid.for_each_in_ranges(&ranges, |i| out[i] += c),
            Some(r) => grid.for_each_in_ranges(&ranges, |i| {
                grid.point_into(i, &mut buf[..dim]);
                if window.translate_contains(group, x, Some(r), &buf[..dim]) {
                    out[i] += c;
                }
            }),
        }
    }
    Ok(out)
}

pub fn sequence_norm(s: &DiscreteSequence<'_>, grid: &Grid) -> Result<NormValue> {
    if s.set.group != grid.group() {
        return Err(Error::GroupMismatch(format!(
            "point set on {} but grid on {}",
            s.set.group.name(),
            grid.group().name()
        )));
    }
    if s.coefficients.len() != s.set.len() {
        return Err(Error::IndexMismatch(format!(
            "{} coefficients for {} points",
            s.coefficients.len(),
            s.set.len()
        )));
    }
    let steps = step_function(grid, &s.set.points, &s.coefficients, &s.window, None)?;
    s.component.norm_of_abs(grid, &steps)
}
