//! C ABI over `mcjulia`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` or
//! producer functions and released with the matching `*_free`. Every fallible
//! function returns an [`McStatus`]; on failure the message is available from
//! [`mc_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use mcjulia::renderer::{export_grid, read_mcvox, render_slice_with, ExportFormat, GridSpec, RenderOptions};
use mcjulia::{
    class_count, classify, escape_time, DynamicsParams, Error, EscapeResult, Multicomplex,
    SliceCase, SliceTriple, UnitMask, VoxelGrid,
};

/// Escape code of a bounded point, in grids and from [`mc_escape_time`].
pub const MC_BOUNDED_CODE: u32 = 0xFFFF;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum McStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OrderOutOfRange = 3,
    NonRealParameter = 4,
    ClassMismatch = 5,
    MemoryBudget = 6,
    Io = 7,
    Format = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum McSliceCase {
    Even = 0,
    OddCZero = 1,
    OddCContainsOne = 2,
    OddCClosed = 3,
    OddCOpen = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum McFormat {
    Mcvox = 0,
    Ply = 1,
    PgmStack = 2,
}

/// Class descriptor filled by [`mc_classify`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McSliceClass {
    pub slice_case: McSliceCase,
    /// Sorted squares, each -1 or +1.
    pub squares: [i8; 3],
    pub representative_order: u32,
    pub representative_masks: [u32; 3],
}

/// Opaque multicomplex number.
pub struct McMulticomplex(Multicomplex);

/// Opaque iteration parameters.
pub struct McParams(DynamicsParams);

/// Opaque rendered voxel grid.
pub struct McGrid(VoxelGrid);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> McStatus {
    match e {
        Error::OrderOutOfRange(..) | Error::OrderMismatch { .. } => McStatus::OrderOutOfRange,
        Error::NonRealParameter => McStatus::NonRealParameter,
        Error::ClassMismatch { .. } => McStatus::ClassMismatch,
        Error::MemoryBudget { .. } => McStatus::MemoryBudget,
        Error::Io { .. } => McStatus::Io,
        Error::Format(_) => McStatus::Format,
        _ => McStatus::InvalidArgument,
    }
}

fn fail(status: McStatus, msg: impl Into<String>) -> McStatus {
    set_error(msg);
    status
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), McStatus>) -> McStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            McStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(McStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, McStatus>;
}

impl<T> OrStatus<T> for mcjulia::Result<T> {
    fn or_status(self) -> Result<T, McStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, McStatus> {
    p.as_ref()
        .ok_or_else(|| fail(McStatus::NullPointer, format!("{what} is null")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], McStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(McStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), McStatus> {
    if out.is_null() {
        return Err(fail(McStatus::NullPointer, "output pointer is null"));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_handle<T>(out: *mut *mut T, value: T) -> Result<(), McStatus> {
    put(out, Box::into_raw(Box::new(value)))
}

fn triple(order: u32, masks: [u32; 3]) -> Result<SliceTriple, McStatus> {
    SliceTriple::new(order, masks.map(UnitMask)).or_status()
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn mc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates an order-`order` number from `2^order` coefficients indexed by unit mask.
///
/// # Safety
/// `coeffs` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_multicomplex_new(
    order: u32,
    coeffs: *const f64,
    len: usize,
    out: *mut *mut McMulticomplex,
) -> McStatus {
    guard(|| {
        let c = slice(coeffs, len, "coeffs")?;
        let z = Multicomplex::from_coeffs(order, c.to_vec()).or_status()?;
        put_handle(out, McMulticomplex(z))
    })
}

/// # Safety
/// `z` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mc_multicomplex_free(z: *mut McMulticomplex) {
    if !z.is_null() {
        drop(Box::from_raw(z));
    }
}

/// # Safety
/// `z` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_multicomplex_order(z: *const McMulticomplex, out: *mut u32) -> McStatus {
    guard(|| put(out, deref(z, "z")?.0.order()))
}

/// Copies the coefficients into `out`, which must hold `2^order` doubles.
///
/// # Safety
/// `z` must be a live handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mc_multicomplex_coeffs(z: *const McMulticomplex, out: *mut f64, len: usize) -> McStatus {
    guard(|| {
        let c = deref(z, "z")?.0.coeffs();
        if len < c.len() {
            return Err(fail(
                McStatus::BufferTooSmall,
                format!("need {} doubles, got {len}", c.len()),
            ));
        }
        if out.is_null() {
            return Err(fail(McStatus::NullPointer, "out is null"));
        }
        ptr::copy_nonoverlapping(c.as_ptr(), out, c.len());
        Ok(())
    })
}

/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_multicomplex_mul(
    a: *const McMulticomplex,
    b: *const McMulticomplex,
    out: *mut *mut McMulticomplex,
) -> McStatus {
    guard(|| {
        let p = deref(a, "a")?.0.mul(&deref(b, "b")?.0).or_status()?;
        put_handle(out, McMulticomplex(p))
    })
}

/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_multicomplex_pow(
    a: *const McMulticomplex,
    m: u32,
    out: *mut *mut McMulticomplex,
) -> McStatus {
    guard(|| {
        let p = deref(a, "a")?.0.pow(m).or_status()?;
        put_handle(out, McMulticomplex(p))
    })
}

/// # Safety
/// `z` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_multicomplex_norm(z: *const McMulticomplex, out: *mut f64) -> McStatus {
    guard(|| put(out, deref(z, "z")?.0.norm()))
}

/// Parameters for `z^power + c`; `c` is copied.
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_params_new(
    power: u32,
    c: *const McMulticomplex,
    max_iter: u32,
    out: *mut *mut McParams,
) -> McStatus {
    guard(|| {
        let p = DynamicsParams::new(power, deref(c, "c")?.0.clone(), max_iter).or_status()?;
        put_handle(out, McParams(p))
    })
}

/// Parameters with a real `c` at the given order.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_params_new_real(
    order: u32,
    power: u32,
    c: f64,
    max_iter: u32,
    out: *mut *mut McParams,
) -> McStatus {
    guard(|| {
        let p = DynamicsParams::real(order, power, c, max_iter).or_status()?;
        put_handle(out, McParams(p))
    })
}

/// # Safety
/// `p` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mc_params_free(p: *mut McParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_params_escape_radius(p: *const McParams, out: *mut f64) -> McStatus {
    guard(|| put(out, deref(p, "params")?.0.escape_radius()))
}

/// Escape iteration of `z`, or [`MC_BOUNDED_CODE`].
///
/// # Safety
/// `z` and `params` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_escape_time(
    z: *const McMulticomplex,
    params: *const McParams,
    out: *mut u32,
) -> McStatus {
    guard(|| {
        let r = escape_time(&deref(z, "z")?.0, &deref(params, "params")?.0).or_status()?;
        put(
            out,
            match r {
                EscapeResult::Bounded => MC_BOUNDED_CODE,
                EscapeResult::Escaped(m) => m,
            },
        )
    })
}

/// Class of the slice spanned by the units `masks[0..3]` of `I(order)`.
///
/// # Safety
/// `masks` must point to 3 readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_classify(
    order: u32,
    masks: *const u32,
    power: u32,
    c: f64,
    out: *mut McSliceClass,
) -> McStatus {
    guard(|| {
        let m = slice(masks, 3, "masks")?;
        let t = triple(order, [m[0], m[1], m[2]])?;
        let class = classify(&t, power, c).or_status()?;
        let rep = class.representative;
        put(
            out,
            McSliceClass {
                slice_case: match class.case {
                    SliceCase::Even => McSliceCase::Even,
                    SliceCase::OddCZero => McSliceCase::OddCZero,
                    SliceCase::OddCContainsOne => McSliceCase::OddCContainsOne,
                    SliceCase::OddCClosed => McSliceCase::OddCClosed,
                    SliceCase::OddCOpen => McSliceCase::OddCOpen,
                },
                squares: class.squares.map(|s| s.to_i8()),
                representative_order: rep.order(),
                representative_masks: rep.units().map(|u| u.0),
            },
        )
    })
}

/// Number of slice classes among all triples of `I(n)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_class_count(n: u32, power: u32, c: f64, out: *mut usize) -> McStatus {
    guard(|| put(out, class_count(n, power, c).or_status()?))
}

/// Renders the slice with units `masks[0..3]` on a `dims[0] x dims[1] x dims[2]`
/// grid over `bounds = {xmin, xmax, ymin, ymax, zmin, zmax}`. `workers = 0`
/// uses `MCJULIA_WORKERS` or all cores.
///
/// # Safety
/// `params` must be a live handle; `masks` and `dims` must point to 3
/// readable values, `bounds` to 6; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_render(
    params: *const McParams,
    masks: *const u32,
    dims: *const u32,
    bounds: *const f64,
    workers: u32,
    out: *mut *mut McGrid,
) -> McStatus {
    guard(|| {
        let params = &deref(params, "params")?.0;
        let m = slice(masks, 3, "masks")?;
        let d = slice(dims, 3, "dims")?;
        let b = slice(bounds, 6, "bounds")?;
        let t = triple(params.order(), [m[0], m[1], m[2]])?;
        let spec = GridSpec::new(
            [d[0] as usize, d[1] as usize, d[2] as usize],
            [[b[0], b[1]], [b[2], b[3]], [b[4], b[5]]],
        )
        .or_status()?;
        let opts = RenderOptions {
            workers: (workers > 0).then_some(workers as usize),
            ..Default::default()
        };
        let grid = render_slice_with(&t, params, &spec, &opts).or_status()?;
        put_handle(out, McGrid(grid))
    })
}

/// # Safety
/// `g` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mc_grid_free(g: *mut McGrid) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live handle; `out` must point to 3 writable values.
#[no_mangle]
pub unsafe extern "C" fn mc_grid_dims(g: *const McGrid, out: *mut u32) -> McStatus {
    guard(|| {
        let d = deref(g, "grid")?.0.dims();
        if out.is_null() {
            return Err(fail(McStatus::NullPointer, "out is null"));
        }
        for (k, v) in d.iter().enumerate() {
            out.add(k).write(*v as u32);
        }
        Ok(())
    })
}

/// Borrowed pointer to the `nx * ny * nz` escape codes (x fastest), valid
/// while the grid lives. Null if `g` is null.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mc_grid_codes(g: *const McGrid, len: *mut usize) -> *const u16 {
    match g.as_ref() {
        Some(g) => {
            if !len.is_null() {
                len.write(g.0.codes().len());
            }
            g.0.codes().as_ptr()
        }
        None => {
            set_error("grid is null");
            ptr::null()
        }
    }
}

/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_grid_bounded_count(g: *const McGrid, out: *mut usize) -> McStatus {
    guard(|| put(out, deref(g, "grid")?.0.bounded_count()))
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a Path, McStatus> {
    if path.is_null() {
        return Err(fail(McStatus::NullPointer, "path is null"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(Path::new)
        .map_err(|_| fail(McStatus::InvalidArgument, "path is not UTF-8"))
}

/// Writes the grid; PGM stacks write one `<stem>_z####.pgm` per plane.
///
/// # Safety
/// `g` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mc_grid_export(g: *const McGrid, format: McFormat, path: *const c_char) -> McStatus {
    guard(|| {
        let g = deref(g, "grid")?;
        let format = match format {
            McFormat::Mcvox => ExportFormat::Mcvox,
            McFormat::Ply => ExportFormat::Ply,
            McFormat::PgmStack => ExportFormat::PgmStack,
        };
        export_grid(&g.0, format, path_arg(path)?).or_status()?;
        Ok(())
    })
}

/// Loads an MCVOX file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_grid_read_mcvox(path: *const c_char, out: *mut *mut McGrid) -> McStatus {
    guard(|| {
        let g = read_mcvox(path_arg(path)?).or_status()?;
        put_handle(out, McGrid(g))
    })
}
