//! C ABI over `kleinian2`.
//!
//! Curves and evaluation contexts are opaque handles created by `*_new` and
//! released by `*_free`. Every fallible call returns a [`Kleinian2Status`];
//! the message of the most recent failure on the calling thread is available
//! from [`kleinian2_last_error_message`]. Strings handed out by the library
//! must be released with [`kleinian2_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kleinian2::curve::{CurveJson, DivisorJson};
use kleinian2::kleinian::{EvalBundleJson, KleinianContext};
use kleinian2::periods::{compute_period_data, PeriodDataJson, PeriodOptions};
use kleinian2::theta::Vec2;
use kleinian2::tol::Tolerances;
use kleinian2::verify::run_suite;
use kleinian2::{AdmissiblePolynomial, Complex64, Error};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kleinian2Status {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Degree = 3,
    RepeatedRoot = 4,
    NotOnCurve = 5,
    SpecialDivisor = 6,
    InfinitePoint = 7,
    Diagonal = 8,
    DegenerateGeometry = 9,
    Quadrature = 10,
    SheetTracking = 11,
    RiemannMatrix = 12,
    DeltaAmbiguity = 13,
    IllConditionedLattice = 14,
    TruncationRadius = 15,
    Normalization = 16,
    OnThetaDivisor = 17,
    RootSelectionAmbiguity = 18,
    NotWeierstrassForm = 19,
    OnSigmaDivisor = 20,
    SignResolution = 21,
    Convergence = 22,
    Io = 23,
    Panic = 99,
}

impl From<&Error> for Kleinian2Status {
    fn from(e: &Error) -> Self {
        use Kleinian2Status as S;
        match e {
            Error::Degree => S::Degree,
            Error::RepeatedRoot { .. } => S::RepeatedRoot,
            Error::Convergence(_) | Error::NewtonDivergence(_) => S::Convergence,
            Error::NotOnCurve { .. } => S::NotOnCurve,
            Error::SpecialDivisor(_) => S::SpecialDivisor,
            Error::InfinitePoint => S::InfinitePoint,
            Error::Diagonal => S::Diagonal,
            Error::DegenerateGeometry(_) => S::DegenerateGeometry,
            Error::Quadrature { .. } => S::Quadrature,
            Error::SheetTracking(_) => S::SheetTracking,
            Error::RiemannMatrix(_) => S::RiemannMatrix,
            Error::DeltaAmbiguity { .. } => S::DeltaAmbiguity,
            Error::IllConditionedLattice(_) => S::IllConditionedLattice,
            Error::TruncationRadius { .. } => S::TruncationRadius,
            Error::Normalization(_) => S::Normalization,
            Error::OnThetaDivisor(_) => S::OnThetaDivisor,
            Error::RootSelectionAmbiguity(..) => S::RootSelectionAmbiguity,
            Error::NotWeierstrassForm => S::NotWeierstrassForm,
            Error::OnSigmaDivisor(_) => S::OnSigmaDivisor,
            Error::SignResolution(_) => S::SignResolution,
            Error::InvalidInput(_) => S::InvalidInput,
            Error::Io(_) => S::Io,
        }
    }
}

/// A complex number as two doubles.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Kleinian2Complex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Kleinian2Complex {
    fn from(z: Complex64) -> Self {
        Kleinian2Complex { re: z.re, im: z.im }
    }
}

impl From<Kleinian2Complex> for Complex64 {
    fn from(z: Kleinian2Complex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// Opaque handle to a validated polynomial.
pub struct Kleinian2Curve {
    inner: AdmissiblePolynomial,
}

/// Opaque handle to certified period data plus normalization constants.
pub struct Kleinian2Context {
    inner: KleinianContext,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
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

/// Runs `body`, translating errors and panics into a status code.
fn guard<F>(body: F) -> Kleinian2Status
where
    F: FnOnce() -> Result<(), Failure>,
{
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => Kleinian2Status::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            Kleinian2Status::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(format!("{}: {e}", e.code()));
            Kleinian2Status::from(&e)
        }
        Err(_) => {
            set_last_error("internal panic".to_string());
            Kleinian2Status::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn read_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::InvalidInput(format!("{what} is not valid UTF-8"))))
}

unsafe fn read_z(z: *const Kleinian2Complex) -> Result<Vec2, Failure> {
    if z.is_null() {
        return Err(Failure::Null("z"));
    }
    let z = std::slice::from_raw_parts(z, 2);
    Ok(Vec2::new(z[0].into(), z[1].into()))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    let c = CString::new(s).map_err(|_| Failure::Lib(Error::InvalidInput("interior NUL".into())))?;
    *out = c.into_raw();
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string(v).map_err(|e| Failure::Lib(Error::from(e)))
}

// ------------------------------------------------------------------ errors

/// Message describing the last failure on this thread, or NULL. The pointer
/// stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn kleinian2_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static name of a status code, e.g. "RepeatedRoot".
#[no_mangle]
pub extern "C" fn kleinian2_status_name(status: Kleinian2Status) -> *const c_char {
    let name: &'static CStr = match status {
        Kleinian2Status::Ok => c"Ok",
        Kleinian2Status::NullPointer => c"NullPointer",
        Kleinian2Status::InvalidInput => c"InvalidInput",
        Kleinian2Status::Degree => c"Degree",
        Kleinian2Status::RepeatedRoot => c"RepeatedRoot",
        Kleinian2Status::NotOnCurve => c"NotOnCurve",
        Kleinian2Status::SpecialDivisor => c"SpecialDivisor",
        Kleinian2Status::InfinitePoint => c"InfinitePoint",
        Kleinian2Status::Diagonal => c"Diagonal",
        Kleinian2Status::DegenerateGeometry => c"DegenerateGeometry",
        Kleinian2Status::Quadrature => c"Quadrature",
        Kleinian2Status::SheetTracking => c"SheetTracking",
        Kleinian2Status::RiemannMatrix => c"RiemannMatrix",
        Kleinian2Status::DeltaAmbiguity => c"DeltaAmbiguity",
        Kleinian2Status::IllConditionedLattice => c"IllConditionedLattice",
        Kleinian2Status::TruncationRadius => c"TruncationRadius",
        Kleinian2Status::Normalization => c"Normalization",
        Kleinian2Status::OnThetaDivisor => c"OnThetaDivisor",
        Kleinian2Status::RootSelectionAmbiguity => c"RootSelectionAmbiguity",
        Kleinian2Status::NotWeierstrassForm => c"NotWeierstrassForm",
        Kleinian2Status::OnSigmaDivisor => c"OnSigmaDivisor",
        Kleinian2Status::SignResolution => c"SignResolution",
        Kleinian2Status::Convergence => c"Convergence",
        Kleinian2Status::Io => c"Io",
        Kleinian2Status::Panic => c"Panic",
    };
    name.as_ptr()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a pointer obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kleinian2_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ------------------------------------------------------------------- curve

/// Validates f(x) = Σ coeffs[k] xᵏ and returns a curve handle.
///
/// # Safety
/// `coeffs` must point to 7 readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kleinian2_curve_new(
    coeffs: *const Kleinian2Complex,
    out: *mut *mut Kleinian2Curve,
) -> Kleinian2Status {
    guard(|| {
        if coeffs.is_null() {
            return Err(Failure::Null("coeffs"));
        }
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let src = std::slice::from_raw_parts(coeffs, 7);
        let mut c = [Complex64::new(0.0, 0.0); 7];
        for (dst, s) in c.iter_mut().zip(src) {
            *dst = (*s).into();
        }
        let inner = AdmissiblePolynomial::new(c)?;
        *out = Box::into_raw(Box::new(Kleinian2Curve { inner }));
        Ok(())
    })
}

/// Parses `{"coeffs": [[re, im] × 7]}` and returns a curve handle.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kleinian2_curve_from_json(
    json: *const c_char,
    out: *mut *mut Kleinian2Curve,
) -> Kleinian2Status {
    guard(|| {
        let text = read_str(json, "json")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let cj: CurveJson = serde_json::from_str(text).map_err(Error::from)?;
        let inner = cj.to_poly()?;
        *out = Box::into_raw(Box::new(Kleinian2Curve { inner }));
        Ok(())
    })
}

/// Releases a curve handle. NULL is ignored.
///
/// # Safety
/// `curve` must be NULL or a handle from this library that was not freed.
#[no_mangle]
pub unsafe extern "C" fn kleinian2_curve_free(curve: *mut Kleinian2Curve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Degree of the polynomial (5 or 6), or 0 for NULL.
///
/// # Safety
/// `curve` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kleinian2_curve_degree(curve: *const Kleinian2Curve) -> u32 {
    curve.as_ref().map_or(0, |c| c.inner.degree() as u32)
}

/// Copies the finite branch points into `out` (capacity `cap`) and stores
/// their count in `len`.
///
/// # Safety
/// `out` must have room for `cap` values; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kleinian2_curve_branch_points(
    curve: *const Kleinian2Curve,
    out: *mut Kleinian2Complex,
    cap: usize,
    len: *mut usize,
) -> Kleinian2Status {
    guard(|| {
        let c = deref(curve, "curve")?;
        if len.is_null() {
            return Err(Failure::Null("len"));
        }
        let roots = c.inner.branch_points();
        *len = roots.len();
        if cap < roots.len() {
            return Err(Failure::Lib(Error::InvalidInput(format!(
                "buffer holds {cap} values, need {}",
                roots.len()
            ))));
        }
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        for (k, r) in roots.iter().enumerate() {
            *out.add(k) = (*r).into();
        }
        Ok(())
    })
}

// ----------------------------------------------------------------- context

/// Computes and certifies period data for `curve`, with default tolerances
/// adjusted by `KLEINIAN2_TOL`.
///
/// # Safety
/// `curve` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kleinian2_context_new(
    curve: *const Kleinian2Curve,
    out: *mut *mut Kleinian2Context,
) -> Kleinian2Status {
    guard(|| {
        let c = deref(curve, "curve")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let tol = Tolerances::from_env();
        let pd = compute_period_data(&c.inner, &PeriodOptions { chain: None, tolerances: tol })?;
        let inner = KleinianContext::with_tolerances(&c.inner, &pd, tol)?;
        *out = Box::into_raw(Box::new(Kleinian2Context { inner }));
        Ok(())
    })
}

/// Builds a context from period data previously produced by
/// [`kleinian2_context_periods_json`], re-certifying it against `curve`.
///
/// # Safety
/// `curve` must be a live handle, `json` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kleinian2_context_from_periods_json(
    curve: *const Kleinian2Curve,
    json: *const c_char,
    out: *mut *mut Kleinian2Context,
) -> Kleinian2Status {
    guard(|| {
        let c = deref(curve, "curve")?;
        let text = read_str(json, "json")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let pj: PeriodDataJson = serde_json::from_str(text).map_err(Error::from)?;
        let pd = pj.to_data(&c.inner)?;
        let inner = KleinianContext::with_tolerances(&c.inner, &pd, Tolerances::from_env())?;
        *out = Box::into_raw(Box::new(Kleinian2Context { inner }));
        Ok(())
    })
}

/// Releases a context handle. NULL is ignored.
///
/// # Safety
/// `ctx` must be NULL or a handle from this library that was not freed.
#[no_mangle]
pub unsafe extern "C" fn kleinian2_context_free(ctx: *mut Kleinian2Context) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

/// Period data as JSON; free the result with [`kleinian2_string_free`].
///
/// # Safety
/// `ctx` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kleinian2_context_periods_json(
    ctx: *const Kleinian2Context,
    out: *mut *mut c_char,
) -> Kleinian2Status {
    guard(|| {
        let k = deref(ctx, "ctx")?;
        let s = to_json(&PeriodDataJson::from_data(&k.inner.pd))?;
        write_string(out, s)
    })
}

/// The Riemann matrix Ω in row-major order.
///
/// # Safety
/// `ctx` must be a live handle; `out` must have room for 4 values.
#[no_mangle]
pub unsafe extern "C" fn kleinian2_context_omega(
    ctx: *const Kleinian2Context,
    out: *mut Kleinian2Complex,
) -> Kleinian2Status {
    guard(|| {
        let k = deref(ctx, "ctx")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let om = &k.inner.omega;
        for (i, v) in [om[(0, 0)], om[(0, 1)], om[(1, 0)], om[(1, 1)]].into_iter().enumerate() {
            *out.add(i) = v.into();
        }
        Ok(())
    })
}

// -------------------------------------------------------------- evaluation

/// Writes S, S11, S12, S22 at `z` into `out[0..4]`.
///
/// # Safety
/// `z` must point to 2 values, `out` must have room for 4.
#[no_mangle]
pub unsafe extern "C" fn kleinian2_eval_weight2(
    ctx: *const Kleinian2Context,
    z: *const Kleinian2Complex,
    out: *mut Kleinian2Complex,
) -> Kleinian2Status {
    guard(|| {
        let k = deref(ctx, "ctx")?;
        let z = read_z(z)?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let s = k.inner.s_eval(&z)?;
        let sjk = k.inner.s_jk_eval(&z)?;
        for (i, v) in [s, sjk[0], sjk[1], sjk[2]].into_iter().enumerate() {
            *out.add(i) = v.into();
        }
        Ok(())
    })
}

/// Writes ℘11, ℘12, ℘22 at `z` into `out[0..3]`.
///
/// # Safety
/// `z` must point to 2 values, `out` must have room for 3.
#[no_mangle]
pub unsafe extern "C" fn kleinian2_eval_wp(
    ctx: *const Kleinian2Context,
    z: *const Kleinian2Complex,
    out: *mut Kleinian2Complex,
) -> Kleinian2Status {
    guard(|| {
        let k = deref(ctx, "ctx")?;
        let z = read_z(z)?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        for (i, v) in k.inner.wp_eval(&z)?.into_iter().enumerate() {
            *out.add(i) = v.into();
        }
        Ok(())
    })
}

/// Writes σ(z) into `out`; Weierstrass-form curves only.
///
/// # Safety
/// `z` must point to 2 values, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kleinian2_eval_sigma(
    ctx: *const Kleinian2Context,
    z: *const Kleinian2Complex,
    out: *mut Kleinian2Complex,
) -> Kleinian2Status {
    guard(|| {
        let k = deref(ctx, "ctx")?;
        let z = read_z(z)?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = k.inner.sigma_eval(&z)?.into();
        Ok(())
    })
}

/// Every available value at `z` as JSON.
///
/// # Safety
/// `z` must point to 2 values, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kleinian2_eval_bundle_json(
    ctx: *const Kleinian2Context,
    z: *const Kleinian2Complex,
    with_sigma: bool,
    out: *mut *mut c_char,
) -> Kleinian2Status {
    guard(|| {
        let k = deref(ctx, "ctx")?;
        let z = read_z(z)?;
        let b = k.inner.eval_bundle(&z, with_sigma)?;
        write_string(out, to_json(&EvalBundleJson::from(&b))?)
    })
}

// ----------------------------------------------------- Abel map / inversion

/// Abel image of a divisor given as `{"p": point, "q": point}` JSON.
///
/// # Safety
/// `divisor_json` must be NUL-terminated; `out` must have room for 2 values.
#[no_mangle]
pub unsafe extern "C" fn kleinian2_abel(
    ctx: *const Kleinian2Context,
    divisor_json: *const c_char,
    out: *mut Kleinian2Complex,
) -> Kleinian2Status {
    guard(|| {
        let k = deref(ctx, "ctx")?;
        let text = read_str(divisor_json, "divisor_json")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let dj: DivisorJson = serde_json::from_str(text).map_err(Error::from)?;
        let d = dj.to_divisor(&k.inner.f)?;
        let z = k.inner.abel_forward(&d)?;
        *out = z[0].into();
        *out.add(1) = z[1].into();
        Ok(())
    })
}

/// Divisor D with Abel image `z`, as JSON.
///
/// # Safety
/// `z` must point to 2 values, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kleinian2_invert_json(
    ctx: *const Kleinian2Context,
    z: *const Kleinian2Complex,
    out: *mut *mut c_char,
) -> Kleinian2Status {
    guard(|| {
        let k = deref(ctx, "ctx")?;
        let z = read_z(z)?;
        let d = k.inner.jacobi_invert(&z)?;
        write_string(out, to_json(&DivisorJson::from_divisor(&d))?)
    })
}

// ---------------------------------------------------------------- verify

/// Runs the identity suite. `checks` is a comma-separated subset or NULL for
/// all checks. The report JSON goes to `out` and its overall verdict to
/// `passed`.
///
/// # Safety
/// `checks` must be NULL or NUL-terminated; `out` and `passed` writable.
#[no_mangle]
pub unsafe extern "C" fn kleinian2_verify_json(
    ctx: *const Kleinian2Context,
    seed: u64,
    checks: *const c_char,
    out: *mut *mut c_char,
    passed: *mut bool,
) -> Kleinian2Status {
    guard(|| {
        let k = deref(ctx, "ctx")?;
        if passed.is_null() {
            return Err(Failure::Null("passed"));
        }
        let list: Option<Vec<String>> = if checks.is_null() {
            None
        } else {
            let text = read_str(checks, "checks")?;
            Some(text.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
        };
        let report = run_suite(&k.inner, seed, list.as_deref())?;
        *passed = report.pass;
        write_string(out, to_json(&report)?)
    })
}
