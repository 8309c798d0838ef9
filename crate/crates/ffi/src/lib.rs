//! C ABI over the core toolkit: opaque handles, status codes, scalar
//! evaluators. Every function is panic-safe; panics surface as
//! `FRACSEP_STATUS_INTERNAL_ERROR` instead of unwinding across the
//! boundary.

use fracsep::continuum::{self, stable_mc, Profile};
use fracsep::jumplaw::JumpLaw;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FracsepStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InternalError = 3,
}

/// Opaque jump-law handle (single-jump probabilities and tail tables).
pub struct FracsepLaw {
    inner: JumpLaw,
}

/// Opaque stationary-profile handle.
pub struct FracsepProfile {
    inner: Profile,
}

fn guard<F: FnOnce() -> FracsepStatus>(f: F) -> FracsepStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => FracsepStatus::InternalError,
    }
}

unsafe fn write_out<T>(out: *mut T, value: T) -> FracsepStatus {
    if out.is_null() {
        return FracsepStatus::NullPointer;
    }
    unsafe { *out = value };
    FracsepStatus::Ok
}

/// Build a jump law for `gamma` in (1, 2) with a tail table of `k_max`
/// entries (pass 0 for the default table size). The handle must be
/// released with `fracsep_law_free`.
///
/// # Safety
/// `out_law` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fracsep_law_new(
    gamma: f64,
    k_max: usize,
    out_law: *mut *mut FracsepLaw,
) -> FracsepStatus {
    guard(|| {
        if out_law.is_null() {
            return FracsepStatus::NullPointer;
        }
        let built = if k_max == 0 {
            JumpLaw::with_default_tables(gamma)
        } else {
            JumpLaw::new(gamma, k_max)
        };
        match built {
            Ok(law) => {
                let boxed = Box::new(FracsepLaw { inner: law });
                unsafe { *out_law = Box::into_raw(boxed) };
                FracsepStatus::Ok
            }
            Err(_) => FracsepStatus::InvalidArgument,
        }
    })
}

/// Release a law handle. A null pointer is a no-op.
///
/// # Safety
/// `law` must have come from `fracsep_law_new` and not been freed.
#[no_mangle]
pub unsafe extern "C" fn fracsep_law_free(law: *mut FracsepLaw) {
    if !law.is_null() {
        drop(unsafe { Box::from_raw(law) });
    }
}

/// Normalizing constant `c_gamma = 1 / (2 zeta(1 + gamma))`.
///
/// # Safety
/// `law` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fracsep_law_c_gamma(
    law: *const FracsepLaw,
    out: *mut f64,
) -> FracsepStatus {
    guard(|| {
        if law.is_null() {
            return FracsepStatus::NullPointer;
        }
        let v = unsafe { &*law }.inner.c_gamma();
        unsafe { write_out(out, v) }
    })
}

/// Single-jump probability `p(z)`.
///
/// # Safety
/// `law` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fracsep_law_p(
    law: *const FracsepLaw,
    z: i64,
    out: *mut f64,
) -> FracsepStatus {
    guard(|| {
        if law.is_null() {
            return FracsepStatus::NullPointer;
        }
        let v = unsafe { &*law }.inner.p(z);
        unsafe { write_out(out, v) }
    })
}

/// Tail `T(k) = sum_{j >= k} p(j)`, `k >= 1`.
///
/// # Safety
/// `law` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fracsep_law_tail(
    law: *const FracsepLaw,
    k: usize,
    out: *mut f64,
) -> FracsepStatus {
    guard(|| {
        if law.is_null() {
            return FracsepStatus::NullPointer;
        }
        if k == 0 {
            return FracsepStatus::InvalidArgument;
        }
        let v = unsafe { &*law }.inner.tail(k);
        unsafe { write_out(out, v) }
    })
}

/// Hydrostatic limit of `N^{gamma-1} theta_N`.
///
/// # Safety
/// `law` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fracsep_law_theta_limit(
    law: *const FracsepLaw,
    alpha: f64,
    beta: f64,
    out: *mut f64,
) -> FracsepStatus {
    guard(|| {
        if law.is_null() {
            return FracsepStatus::NullPointer;
        }
        let v = fracsep::observables::theta_limit(&unsafe { &*law }.inner, alpha, beta);
        unsafe { write_out(out, v) }
    })
}

/// Build the stationary profile `rho_bar` for reservoir densities
/// `alpha`, `beta` in [0, 1]. Release with `fracsep_profile_free`.
///
/// # Safety
/// `out_profile` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fracsep_profile_new(
    gamma: f64,
    alpha: f64,
    beta: f64,
    out_profile: *mut *mut FracsepProfile,
) -> FracsepStatus {
    guard(|| {
        if out_profile.is_null() {
            return FracsepStatus::NullPointer;
        }
        match Profile::new(gamma, alpha, beta) {
            Ok(p) => {
                let boxed = Box::new(FracsepProfile { inner: p });
                unsafe { *out_profile = Box::into_raw(boxed) };
                FracsepStatus::Ok
            }
            Err(_) => FracsepStatus::InvalidArgument,
        }
    })
}

/// Release a profile handle. A null pointer is a no-op.
///
/// # Safety
/// `profile` must have come from `fracsep_profile_new` and not been freed.
#[no_mangle]
pub unsafe extern "C" fn fracsep_profile_free(profile: *mut FracsepProfile) {
    if !profile.is_null() {
        drop(unsafe { Box::from_raw(profile) });
    }
}

/// Evaluate `rho_bar(q)` (exterior data for q outside (0, 1)).
///
/// # Safety
/// `profile` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fracsep_profile_eval(
    profile: *const FracsepProfile,
    q: f64,
    out: *mut f64,
) -> FracsepStatus {
    guard(|| {
        if profile.is_null() {
            return FracsepStatus::NullPointer;
        }
        let v = unsafe { &*profile }.inner.eval(q);
        unsafe { write_out(out, v) }
    })
}

/// Right-exit probability `Psi(q)` of the gamma-stable process.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fracsep_psi(gamma: f64, q: f64, out: *mut f64) -> FracsepStatus {
    guard(|| match continuum::psi(gamma, q) {
        Ok(v) => unsafe { write_out(out, v) },
        Err(_) => FracsepStatus::InvalidArgument,
    })
}

/// Poisson kernel `P(q, y)` of the interval (0 for y inside [0, 1]).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fracsep_poisson_kernel(
    gamma: f64,
    q: f64,
    y: f64,
    out: *mut f64,
) -> FracsepStatus {
    guard(|| match continuum::poisson_kernel(gamma, q, y) {
        Ok(v) => unsafe { write_out(out, v) },
        Err(_) => FracsepStatus::InvalidArgument,
    })
}

/// Fractional Fick constant from the direct double-integral route at cut
/// point `x`, with quadrature tolerance `tol`.
///
/// # Safety
/// `profile` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fracsep_fick_rhs(
    profile: *const FracsepProfile,
    x: f64,
    tol: f64,
    out: *mut f64,
) -> FracsepStatus {
    guard(|| {
        if profile.is_null() {
            return FracsepStatus::NullPointer;
        }
        match continuum::fick_rhs(&unsafe { &*profile }.inner, x, tol) {
            Ok(v) => unsafe { write_out(out, v) },
            Err(_) => FracsepStatus::InvalidArgument,
        }
    })
}

/// Fractional Fick constant through the independent phi route.
///
/// # Safety
/// `law`, `profile`, and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fracsep_fick_via_phi(
    law: *const FracsepLaw,
    profile: *const FracsepProfile,
    tol: f64,
    out: *mut f64,
) -> FracsepStatus {
    guard(|| {
        if law.is_null() || profile.is_null() {
            return FracsepStatus::NullPointer;
        }
        let v = continuum::fick_via_phi(&unsafe { &*law }.inner, &unsafe { &*profile }.inner, tol);
        unsafe { write_out(out, v) }
    })
}

/// Monte Carlo estimate of `Psi(q)` by simulating stable-process exits;
/// writes the point estimate and its standard error.
///
/// # Safety
/// `out_p` and `out_stderr` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fracsep_exit_right_probability(
    gamma: f64,
    q: f64,
    walkers: u64,
    step_ratio: f64,
    seed: u64,
    out_p: *mut f64,
    out_stderr: *mut f64,
) -> FracsepStatus {
    guard(|| {
        if out_p.is_null() || out_stderr.is_null() {
            return FracsepStatus::NullPointer;
        }
        if !(gamma > 1.0 && gamma < 2.0) || !(q > 0.0 && q < 1.0) || !(step_ratio >= 2.0) {
            return FracsepStatus::InvalidArgument;
        }
        let est = stable_mc::exit_right_probability(gamma, q, walkers, step_ratio, seed);
        unsafe {
            *out_p = est.p_right;
            *out_stderr = est.stderr;
        }
        FracsepStatus::Ok
    })
}

/// NUL-terminated version string of the underlying library; static
/// storage, do not free.
#[no_mangle]
pub extern "C" fn fracsep_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn law_lifecycle_and_values() {
        let mut law: *mut FracsepLaw = ptr::null_mut();
        assert_eq!(
            unsafe { fracsep_law_new(1.5, 1 << 12, &mut law) },
            FracsepStatus::Ok
        );
        let mut v = 0.0;
        assert_eq!(unsafe { fracsep_law_c_gamma(law, &mut v) }, FracsepStatus::Ok);
        assert!((v - 0.372_720_648_144_388_6).abs() < 1e-14);
        assert_eq!(unsafe { fracsep_law_tail(law, 1, &mut v) }, FracsepStatus::Ok);
        assert!((v - 0.5).abs() < 1e-14);
        assert_eq!(unsafe { fracsep_law_tail(law, 0, &mut v) }, FracsepStatus::InvalidArgument);
        unsafe { fracsep_law_free(law) };
    }

    #[test]
    fn invalid_gamma_is_rejected_without_handle() {
        let mut law: *mut FracsepLaw = ptr::null_mut();
        assert_eq!(
            unsafe { fracsep_law_new(2.5, 0, &mut law) },
            FracsepStatus::InvalidArgument
        );
        assert!(law.is_null());
    }

    #[test]
    fn null_pointers_are_reported_not_dereferenced() {
        let mut v = 0.0;
        assert_eq!(
            unsafe { fracsep_law_c_gamma(ptr::null(), &mut v) },
            FracsepStatus::NullPointer
        );
        let mut law: *mut FracsepLaw = ptr::null_mut();
        unsafe { fracsep_law_new(1.5, 1 << 10, &mut law) };
        assert_eq!(
            unsafe { fracsep_law_c_gamma(law, ptr::null_mut()) },
            FracsepStatus::NullPointer
        );
        unsafe { fracsep_law_free(law) };
        unsafe { fracsep_law_free(ptr::null_mut()) };
        unsafe { fracsep_profile_free(ptr::null_mut()) };
    }

    #[test]
    fn profile_and_scalar_functions() {
        let mut profile: *mut FracsepProfile = ptr::null_mut();
        assert_eq!(
            unsafe { fracsep_profile_new(1.5, 0.2, 0.8, &mut profile) },
            FracsepStatus::Ok
        );
        let mut v = 0.0;
        assert_eq!(
            unsafe { fracsep_profile_eval(profile, 0.5, &mut v) },
            FracsepStatus::Ok
        );
        assert!((v - 0.5).abs() < 1e-9);

        let mut psi = 0.0;
        assert_eq!(unsafe { fracsep_psi(1.5, 0.25, &mut psi) }, FracsepStatus::Ok);
        assert!((psi - 0.286_523_695_044_399_72).abs() < 1e-9);
        assert_eq!(
            unsafe { fracsep_psi(1.5, 0.0, &mut psi) },
            FracsepStatus::InvalidArgument
        );

        let mut kern = -1.0;
        assert_eq!(
            unsafe { fracsep_poisson_kernel(1.5, 0.3, 0.7, &mut kern) },
            FracsepStatus::Ok
        );
        assert_eq!(kern, 0.0);

        let mut law: *mut FracsepLaw = ptr::null_mut();
        unsafe { fracsep_law_new(1.5, 1 << 16, &mut law) };
        let mut direct = 0.0;
        let mut via_phi = 0.0;
        assert_eq!(
            unsafe { fracsep_fick_rhs(profile, 0.5, 1e-9, &mut direct) },
            FracsepStatus::Ok
        );
        assert_eq!(
            unsafe { fracsep_fick_via_phi(law, profile, 1e-9, &mut via_phi) },
            FracsepStatus::Ok
        );
        assert!((direct - via_phi).abs() < 1e-4);
        unsafe { fracsep_law_free(law) };
        unsafe { fracsep_profile_free(profile) };
    }

    #[test]
    fn version_string_is_nul_terminated() {
        let ptr = fracsep_version();
        let s = unsafe { std::ffi::CStr::from_ptr(ptr) };
        assert_eq!(s.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn generated_header_exists_and_covers_the_surface() {
        let header = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/include/fracsep.h"
        ))
        .expect("header generated at build time");
        for symbol in [
            "fracsep_law_new",
            "fracsep_law_free",
            "fracsep_profile_eval",
            "fracsep_psi",
            "fracsep_exit_right_probability",
            "FracsepStatus",
        ] {
            assert!(header.contains(symbol), "missing {symbol}");
        }
    }
}
