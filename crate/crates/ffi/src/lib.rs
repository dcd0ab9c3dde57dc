//! C ABI over `wiener-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new*`
//! functions and released by the matching `*_free`. Every fallible call
//! returns a [`WienerStatus`]; on failure the message is kept per thread and
//! read with [`wiener_last_error`]. Structured inputs (grids, spaces,
//! weights) are passed as JSON in the same schema as the CLI config.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use libc::{c_char, c_double, c_int, size_t};
use num_complex::Complex64;
use serde::Deserialize;

use wiener_core::amalgam::AmalgamSpace;
use wiener_core::components::{check_doubling, quasi_norm, DoublingProbes, NormValue, WeightFunction};
use wiener_core::convolution::convolve;
use wiener_core::{AxisSpec, Error, Grid, GroupSpec, SampledFunction};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WienerStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    GroupMismatch = 4,
    GridMismatch = 5,
    NonFinite = 6,
    Parse = 7,
    Io = 8,
    Panic = 9,
}

/// Tabulation grid.
pub struct WienerGrid(Arc<Grid>);
/// Complex samples on a grid.
pub struct WienerFunction(SampledFunction);
/// Amalgam space `W(B, Y, Q)`.
pub struct WienerSpace(AmalgamSpace);
/// Weight function.
pub struct WienerWeight(WeightFunction);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> WienerStatus {
    match e {
        Error::DimensionMismatch { .. } | Error::IndexMismatch(_) => WienerStatus::DimensionMismatch,
        Error::GroupMismatch(_) => WienerStatus::GroupMismatch,
        Error::GridMismatch => WienerStatus::GridMismatch,
        Error::NonFinite { .. } => WienerStatus::NonFinite,
        Error::Config { .. } => WienerStatus::Parse,
        Error::Io(_) => WienerStatus::Io,
        _ => WienerStatus::InvalidArgument,
    }
}

struct Fail(WienerStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> WienerStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            WienerStatus::Ok
        }
        Ok(Err(Fail(s, m))) => {
            set_error(m);
            s
        }
        Err(_) => {
            set_error("panic inside wiener-core".into());
            WienerStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(WienerStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn json_arg<'a, T: Deserialize<'a>>(s: *const c_char, what: &str) -> Result<T, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    let text = CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail(WienerStatus::Parse, format!("{what} is not UTF-8")))?;
    serde_json::from_str(text).map_err(|e| Fail(WienerStatus::Parse, format!("{what}: {e}")))
}

unsafe fn slice<'a, T>(p: *const T, len: size_t, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: size_t, what: &str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn wiener_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wiener_version() -> *const c_char {
    static V: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    V.as_ptr().cast()
}

#[derive(Deserialize)]
struct GridJson {
    group: GroupSpec,
    axes: Vec<AxisSpec>,
}

/// Grid from JSON `{"group": {...}, "axes": [...]}`.
#[no_mangle]
pub unsafe extern "C" fn wiener_grid_new_json(json: *const c_char, out: *mut *mut WienerGrid) -> WienerStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let g: GridJson = json_arg(json, "grid json")?;
        *out = boxed(WienerGrid(Grid::new(g.group, g.axes)?));
        Ok(())
    })
}

/// Nodes `k·h`, `|k·h| ≤ half_width`, on the line.
#[no_mangle]
pub unsafe extern "C" fn wiener_grid_new_line(h: c_double, half_width: c_double, out: *mut *mut WienerGrid) -> WienerStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed(WienerGrid(Grid::euclidean_nodes_1d(h, half_width)?));
        Ok(())
    })
}

/// Integers `lo..=hi`.
#[no_mangle]
pub unsafe extern "C" fn wiener_grid_new_integers(lo: i64, hi: i64, out: *mut *mut WienerGrid) -> WienerStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed(WienerGrid(Grid::lattice_1d(lo, hi)?));
        Ok(())
    })
}

/// `ax+b` grid, `x` nodes of step `h` up to `x_half`, dilations
/// `2^{m/levels}` for `|m| ≤ octaves·levels`.
#[no_mangle]
pub unsafe extern "C" fn wiener_grid_new_axb(
    h: c_double,
    x_half: c_double,
    octaves: i64,
    levels: i64,
    out: *mut *mut WienerGrid,
) -> WienerStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed(WienerGrid(Grid::axb_1d(h, x_half, octaves, levels)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn wiener_grid_free(grid: *mut WienerGrid) {
    free(grid)
}

/// Number of samples, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn wiener_grid_len(grid: *const WienerGrid) -> size_t {
    grid.as_ref().map_or(0, |g| g.0.len())
}

/// Coordinates per sample, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn wiener_grid_dim(grid: *const WienerGrid) -> size_t {
    grid.as_ref().map_or(0, |g| g.0.dim())
}

/// Writes all sample coordinates, sample-major, into `out[len]` with
/// `len = grid_len · grid_dim`.
#[no_mangle]
pub unsafe extern "C" fn wiener_grid_points(grid: *const WienerGrid, out: *mut c_double, len: size_t) -> WienerStatus {
    guard(|| {
        let g = &borrow(grid, "grid")?.0;
        let dim = g.dim();
        if len != g.len() * dim {
            return Err(Fail(
                WienerStatus::DimensionMismatch,
                format!("need {} doubles, got {len}", g.len() * dim),
            ));
        }
        let out = slice_mut(out, len, "out")?;
        for (i, chunk) in out.chunks_mut(dim).enumerate() {
            g.point_into(i, chunk);
        }
        Ok(())
    })
}

/// Function from real samples; `im` may be null.
#[no_mangle]
pub unsafe extern "C" fn wiener_function_new(
    grid: *const WienerGrid,
    re: *const c_double,
    im: *const c_double,
    len: size_t,
    out: *mut *mut WienerFunction,
) -> WienerStatus {
    guard(|| {
        let g = &borrow(grid, "grid")?.0;
        let out = out_ptr(out, "out")?;
        let re = slice(re, len, "re")?;
        let vals: Vec<Complex64> = if im.is_null() {
            re.iter().map(|r| Complex64::new(*r, 0.0)).collect()
        } else {
            let im = slice(im, len, "im")?;
            re.iter().zip(im).map(|(r, i)| Complex64::new(*r, *i)).collect()
        };
        if vals.len() != g.len() {
            return Err(Fail(
                WienerStatus::DimensionMismatch,
                format!("grid has {} samples, got {}", g.len(), vals.len()),
            ));
        }
        *out = boxed(WienerFunction(SampledFunction::new(g.clone(), vals)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn wiener_function_free(f: *mut WienerFunction) {
    free(f)
}

#[no_mangle]
pub unsafe extern "C" fn wiener_function_len(f: *const WienerFunction) -> size_t {
    f.as_ref().map_or(0, |f| f.0.values().len())
}

/// Copies the samples; either output may be null.
#[no_mangle]
pub unsafe extern "C" fn wiener_function_values(
    f: *const WienerFunction,
    re: *mut c_double,
    im: *mut c_double,
    len: size_t,
) -> WienerStatus {
    guard(|| {
        let f = &borrow(f, "function")?.0;
        if len != f.values().len() {
            return Err(Fail(
                WienerStatus::DimensionMismatch,
                format!("function has {} samples, got {len}", f.values().len()),
            ));
        }
        if !re.is_null() {
            for (o, v) in slice_mut(re, len, "re")?.iter_mut().zip(f.values()) {
                *o = v.re;
            }
        }
        if !im.is_null() {
            for (o, v) in slice_mut(im, len, "im")?.iter_mut().zip(f.values()) {
                *o = v.im;
            }
        }
        Ok(())
    })
}

/// Space from JSON `{"local": "linf", "global": {...}, "window": {...}}`.
#[no_mangle]
pub unsafe extern "C" fn wiener_space_new_json(json: *const c_char, out: *mut *mut WienerSpace) -> WienerStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let s: AmalgamSpace = json_arg(json, "space json")?;
        s.global.validate()?;
        *out = boxed(WienerSpace(s));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn wiener_space_free(s: *mut WienerSpace) {
    free(s)
}

unsafe fn write_norm(v: NormValue, value: *mut c_double, overflow: *mut c_int) -> Result<(), Fail> {
    *out_ptr(value, "value")? = v.as_f64();
    if !overflow.is_null() {
        *overflow = v.is_overflow() as c_int;
    }
    Ok(())
}

/// `‖F | W(B, Y, Q)‖`. On divergence `*value = +∞` and `*overflow = 1`;
/// `overflow` may be null.
#[no_mangle]
pub unsafe extern "C" fn wiener_amalgam_norm(
    space: *const WienerSpace,
    f: *const WienerFunction,
    value: *mut c_double,
    overflow: *mut c_int,
) -> WienerStatus {
    guard(|| {
        let s = &borrow(space, "space")?.0;
        let f = &borrow(f, "function")?.0;
        write_norm(s.norm(f)?, value, overflow)
    })
}

/// `‖F | Y‖` for the global component of `space`.
#[no_mangle]
pub unsafe extern "C" fn wiener_global_norm(
    space: *const WienerSpace,
    f: *const WienerFunction,
    value: *mut c_double,
    overflow: *mut c_int,
) -> WienerStatus {
    guard(|| {
        let s = &borrow(space, "space")?.0;
        let f = &borrow(f, "function")?.0;
        write_norm(quasi_norm(&s.global, f)?, value, overflow)
    })
}

/// `F * G` on `F`'s grid; `truncation` (nullable) receives the share of
/// mass outside the grid.
#[no_mangle]
pub unsafe extern "C" fn wiener_convolve(
    f: *const WienerFunction,
    g: *const WienerFunction,
    out: *mut *mut WienerFunction,
    truncation: *mut c_double,
) -> WienerStatus {
    guard(|| {
        let f = &borrow(f, "f")?.0;
        let g = &borrow(g, "g")?.0;
        let out = out_ptr(out, "out")?;
        let c = convolve(f, g)?;
        if !truncation.is_null() {
            *truncation = c.truncation;
        }
        *out = boxed(WienerFunction(c.function));
        Ok(())
    })
}

/// Weight from JSON, e.g. `{"family": "shifted-power", "s": 2.0}`.
#[no_mangle]
pub unsafe extern "C" fn wiener_weight_new_json(json: *const c_char, out: *mut *mut WienerWeight) -> WienerStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let w: WeightFunction = json_arg(json, "weight json")?;
        w.validate()?;
        *out = boxed(WienerWeight(w));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn wiener_weight_free(w: *mut WienerWeight) {
    free(w)
}

/// Doubling check on `ℝⁿ` with the standard probes. `*is_doubling` is 1 on
/// success, with `(c, α)` written; 0 on a growth witness.
#[no_mangle]
pub unsafe extern "C" fn wiener_check_doubling(
    w: *const WienerWeight,
    n: size_t,
    is_doubling: *mut c_int,
    c: *mut c_double,
    alpha: *mut c_double,
) -> WienerStatus {
    guard(|| {
        let w = &borrow(w, "weight")?.0;
        let flag = out_ptr(is_doubling, "is_doubling")?;
        if n == 0 {
            return Err(Fail(WienerStatus::InvalidArgument, "n must be positive".into()));
        }
        let v = check_doubling(w, &DoublingProbes::standard(n))?;
        *flag = v.is_doubling() as c_int;
        if let Some(cert) = v.certificate() {
            if !c.is_null() {
                *c = cert.c;
            }
            if !alpha.is_null() {
                *alpha = cert.alpha;
            }
        }
        Ok(())
    })
}

/// `b^{n(1+1/q)}·(1 + |y|/b)^{α/p}`.
#[no_mangle]
pub extern "C" fn wiener_axb_translation_bound(
    y: c_double,
    b: c_double,
    p: c_double,
    q: c_double,
    alpha: c_double,
    n: size_t,
) -> c_double {
    wiener_core::axb::right_translation_bound(y, b, p, q, alpha, n)
}
