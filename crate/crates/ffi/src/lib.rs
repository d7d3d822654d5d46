//! C interface to `fracseries`.
//!
//! Every fallible call returns an [`FsStatus`]; results go through out
//! pointers. On failure the message is kept per thread and can be copied
//! out with [`fs_last_error_message`]. Expansions and FDE reports are
//! opaque handles owned by the caller and released with their `_free`
//! function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fracseries::expansion::{frac_derivative, Definition, ExpansionConfig, Order, SeriesEvaluation};
use fracseries::fde::{solve_and_compare, FdeKind, FdeProblem, SolveConfig, SolveReport};
use fracseries::jets::CatalogFn;
use fracseries::specials;
use fracseries::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Pole = 4,
    Unsupported = 5,
    NonConvergence = 6,
    Overflow = 7,
    SingularCoefficient = 8,
    BracketFailure = 9,
    /// A Rust panic was caught at the boundary.
    Internal = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsDefinition {
    GrunwaldLetnikov = 0,
    RiemannLiouville = 1,
    Caputo = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsFdeKind {
    Constant = 0,
    Variable = 1,
}

/// Integration settings for [`fs_fde_solve`]; see [`fs_solve_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsSolveConfig {
    pub eps: f64,
    pub x_max: f64,
    pub steps: usize,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
}

/// Truncated series configuration bound to one catalog function.
pub struct FsExpansion {
    function: CatalogFn,
    config: ExpansionConfig,
}

/// Numeric solution and exact reference on a grid.
pub struct FsReport {
    report: SolveReport,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> FsStatus {
    match e {
        Error::Pole { .. } => FsStatus::Pole,
        Error::Domain(_) => FsStatus::Domain,
        Error::InvalidArgument(_) => FsStatus::InvalidArgument,
        Error::Unsupported(_) => FsStatus::Unsupported,
        Error::NonConvergence { .. } => FsStatus::NonConvergence,
        Error::Overflow(_) => FsStatus::Overflow,
        Error::SingularCoefficient { .. } => FsStatus::SingularCoefficient,
        Error::BracketFailure { .. } => FsStatus::BracketFailure,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `body`, records any failure and maps it to a status.
fn guard<F>(body: F) -> FsStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error(String::new());
            FsStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            FsStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            FsStatus::Internal
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `len` bytes, into `buf`. Returns the full message length
/// excluding the terminator, so a too-small buffer can be detected.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Static, NUL-terminated library version.
#[no_mangle]
pub extern "C" fn fs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn fs_gamma(z: f64, out: *mut f64) -> FsStatus {
    guard(|| {
        *out_ref(out, "out")? = specials::gamma(z)?;
        Ok(())
    })
}

/// 1/Γ(z); total, zero at the poles.
#[no_mangle]
pub extern "C" fn fs_recip_gamma(z: f64) -> f64 {
    specials::recip_gamma(z)
}

/// # Safety
/// `out` must be null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn fs_mittag_leffler(alpha: f64, beta: f64, z: f64, out: *mut f64) -> FsStatus {
    guard(|| {
        *out_ref(out, "out")? = specials::mittag_leffler(alpha, beta, z)?;
        Ok(())
    })
}

/// ₀Ψ₁[-; (1/2, -1/2)](z).
///
/// # Safety
/// `out` must be null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn fs_fox_wright_gaussian(z: f64, out: *mut f64) -> FsStatus {
    guard(|| {
        *out_ref(out, "out")? = specials::FoxWright::gaussian_reduction().evaluate(z)?.value;
        Ok(())
    })
}

/// Creates an expansion for the catalog function named by `function`
/// (`sech`, `tanh`, `sin`, `cos`, `gaussian`, `exp`, `power:<p>`,
/// `constant:<c>`).
///
/// # Safety
/// `function` must be null or a NUL-terminated string; `out` must be null
/// or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn fs_expansion_new(
    function: *const c_char,
    definition: FsDefinition,
    q: f64,
    base: f64,
    n_terms: usize,
    out: *mut *mut FsExpansion,
) -> FsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        if function.is_null() {
            return Err(Failure::Null("function"));
        }
        let name = CStr::from_ptr(function)
            .to_str()
            .map_err(|_| Error::InvalidArgument("function name is not UTF-8".into()))?;
        let def = match definition {
            FsDefinition::GrunwaldLetnikov => Definition::GrunwaldLetnikov,
            FsDefinition::RiemannLiouville => Definition::RiemannLiouville,
            FsDefinition::Caputo => Definition::Caputo,
        };
        let handle = FsExpansion {
            function: name.parse()?,
            config: ExpansionConfig::new(def, Order::new(q)?, base, n_terms)?,
        };
        *out = Box::into_raw(Box::new(handle));
        Ok(())
    })
}

unsafe fn evaluate(e: *const FsExpansion, x: f64) -> Result<SeriesEvaluation, Failure> {
    let e = e.as_ref().ok_or(Failure::Null("expansion"))?;
    Ok(frac_derivative(&e.function, x, &e.config)?)
}

/// Number of terms, equal to `n_terms` at creation; 0 for null.
///
/// # Safety
/// `e` must be null or a live handle from [`fs_expansion_new`].
#[no_mangle]
pub unsafe extern "C" fn fs_expansion_terms(e: *const FsExpansion) -> usize {
    e.as_ref().map_or(0, |e| e.config.n_terms)
}

/// # Safety
/// `e` must be null or a live handle; `out` must be null or valid for a
/// write.
#[no_mangle]
pub unsafe extern "C" fn fs_expansion_eval(e: *const FsExpansion, x: f64, out: *mut f64) -> FsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = evaluate(e, x)?.value;
        Ok(())
    })
}

/// Evaluates at `x` and writes the per-term weights and contributions.
/// Either array may be null; non-null arrays need `len >=` the term count.
///
/// # Safety
/// `e` must be null or a live handle; `value` must be null or valid for a
/// write; `weights` and `contributions` must be null or hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fs_expansion_eval_terms(
    e: *const FsExpansion,
    x: f64,
    value: *mut f64,
    weights: *mut f64,
    contributions: *mut f64,
    len: usize,
) -> FsStatus {
    guard(|| {
        let value = out_ref(value, "value")?;
        let s = evaluate(e, x)?;
        if len < s.terms.len() && !(weights.is_null() && contributions.is_null()) {
            return Err(Error::InvalidArgument(format!("term arrays hold {len}, need {}", s.terms.len())).into());
        }
        for (i, t) in s.terms.iter().enumerate() {
            if !weights.is_null() {
                *weights.add(i) = t.weight;
            }
            if !contributions.is_null() {
                *contributions.add(i) = t.contribution;
            }
        }
        *value = s.value;
        Ok(())
    })
}

/// # Safety
/// `e` must be null or a handle from [`fs_expansion_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fs_expansion_free(e: *mut FsExpansion) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

#[no_mangle]
pub extern "C" fn fs_solve_config_default() -> FsSolveConfig {
    let c = SolveConfig::default();
    FsSolveConfig {
        eps: c.eps,
        x_max: c.x_max,
        steps: c.steps,
        bracket_lo: c.bracket.0,
        bracket_hi: c.bracket.1,
    }
}

/// Solves the truncated FDE (q = 1/2, three terms) and compares it with
/// the exact solution at the `n` points of `grid`. A null `config` means
/// [`fs_solve_config_default`].
///
/// # Safety
/// `grid` must hold `n` doubles; `config` must be null or valid; `out`
/// must be null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn fs_fde_solve(
    kind: FsFdeKind,
    lambda: f64,
    grid: *const f64,
    n: usize,
    config: *const FsSolveConfig,
    out: *mut *mut FsReport,
) -> FsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        if grid.is_null() {
            return Err(Failure::Null("grid"));
        }
        let xs = std::slice::from_raw_parts(grid, n);
        let c = config.as_ref().copied().unwrap_or_else(|| fs_solve_config_default());
        let cfg = SolveConfig {
            eps: c.eps,
            x_max: c.x_max,
            steps: c.steps,
            bracket: (c.bracket_lo, c.bracket_hi),
        };
        let kind = match kind {
            FsFdeKind::Constant => FdeKind::ConstantCoeff,
            FsFdeKind::Variable => FdeKind::VariableCoeff,
        };
        let report = solve_and_compare(&FdeProblem::new(kind, lambda)?, xs, &cfg)?;
        *out = Box::into_raw(Box::new(FsReport { report }));
        Ok(())
    })
}

/// Grid length; 0 for null.
///
/// # Safety
/// `r` must be null or a live handle from [`fs_fde_solve`].
#[no_mangle]
pub unsafe extern "C" fn fs_report_len(r: *const FsReport) -> usize {
    r.as_ref().map_or(0, |r| r.report.grid.len())
}

/// Row `i`: grid point, numeric solution, exact solution, relative error.
/// Any out pointer may be null.
///
/// # Safety
/// `r` must be null or a live handle; non-null out pointers must be valid
/// for a write.
#[no_mangle]
pub unsafe extern "C" fn fs_report_row(
    r: *const FsReport,
    i: usize,
    x: *mut f64,
    numeric: *mut f64,
    exact: *mut f64,
    rel_error: *mut f64,
) -> FsStatus {
    guard(|| {
        let r = &r.as_ref().ok_or(Failure::Null("report"))?.report;
        if i >= r.grid.len() {
            return Err(Error::InvalidArgument(format!("row {i} out of range (len {})", r.grid.len())).into());
        }
        for (p, v) in [(x, r.grid[i]), (numeric, r.numeric[i]), (exact, r.exact[i]), (rel_error, r.rel_error[i])] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Largest |relative error| over the grid; NaN for null.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_report_max_error(r: *const FsReport) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.report.max_abs_error())
}

/// # Safety
/// `r` must be null or a handle from [`fs_fde_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fs_report_free(r: *mut FsReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numerical_errors_map_to_distinct_codes() {
        let cases = [
            (Error::Pole { z: 0.0 }, FsStatus::Pole),
            (Error::NonConvergence { terms: 3 }, FsStatus::NonConvergence),
            (Error::Overflow(String::new()), FsStatus::Overflow),
            (Error::SingularCoefficient { x: 0.0 }, FsStatus::SingularCoefficient),
            (Error::BracketFailure { lo: 0.0, hi: 1.0 }, FsStatus::BracketFailure),
        ];
        for (e, s) in cases {
            assert!(e.is_numerical() || s == FsStatus::Pole);
            assert_eq!(status_of(&e), s);
        }
    }

    #[test]
    fn panics_do_not_cross_the_boundary() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, FsStatus::Internal);
        assert_eq!(unsafe { fs_last_error_message(ptr::null_mut(), 0) }, "internal panic".len());
    }
}
