use std::ffi::{CStr, CString};
use std::ptr;

use mcjulia_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(mc_last_error()) }.to_string_lossy().into_owned()
}

fn mc(order: u32, coeffs: &[f64]) -> *mut McMulticomplex {
    let mut h = ptr::null_mut();
    let s = unsafe { mc_multicomplex_new(order, coeffs.as_ptr(), coeffs.len(), &mut h) };
    assert_eq!(s, McStatus::Ok, "{}", last_error());
    h
}

#[test]
fn multicomplex_round_trip_and_product() {
    unsafe {
        let i1 = mc(2, &[0.0, 1.0, 0.0, 0.0]);
        let i2 = mc(2, &[0.0, 0.0, 1.0, 0.0]);
        let mut p = ptr::null_mut();
        assert_eq!(mc_multicomplex_mul(i1, i2, &mut p), McStatus::Ok);
        let mut out = [0.0; 4];
        assert_eq!(mc_multicomplex_coeffs(p, out.as_mut_ptr(), 4), McStatus::Ok);
        assert_eq!(out, [0.0, 0.0, 0.0, 1.0]);
        let mut order = 0;
        assert_eq!(mc_multicomplex_order(p, &mut order), McStatus::Ok);
        assert_eq!(order, 2);

        let mut sq = ptr::null_mut();
        assert_eq!(mc_multicomplex_pow(i1, 2, &mut sq), McStatus::Ok);
        assert_eq!(mc_multicomplex_coeffs(sq, out.as_mut_ptr(), 4), McStatus::Ok);
        assert_eq!(out, [-1.0, 0.0, 0.0, 0.0]);

        let mut small = [0.0; 2];
        assert_eq!(
            mc_multicomplex_coeffs(p, small.as_mut_ptr(), 2),
            McStatus::BufferTooSmall
        );
        assert!(last_error().contains("need 4"));
        for h in [i1, i2, p, sq] {
            mc_multicomplex_free(h);
        }
        mc_multicomplex_free(ptr::null_mut());
    }
}

#[test]
fn constructor_errors() {
    unsafe {
        let mut h = ptr::null_mut();
        let c = [1.0, 2.0, 3.0];
        assert_eq!(
            mc_multicomplex_new(1, c.as_ptr(), 3, &mut h),
            McStatus::InvalidArgument
        );
        assert!(h.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(
            mc_multicomplex_new(1, ptr::null(), 2, &mut h),
            McStatus::NullPointer
        );
        let c = [0.0; 2];
        assert_eq!(
            mc_multicomplex_new(1, c.as_ptr(), 2, ptr::null_mut()),
            McStatus::NullPointer
        );
        assert_eq!(
            mc_multicomplex_new(9, c.as_ptr(), 2, &mut h),
            McStatus::OrderOutOfRange
        );
        let mut norm = 0.0;
        assert_eq!(mc_multicomplex_norm(ptr::null(), &mut norm), McStatus::NullPointer);
    }
}

#[test]
fn escape_time_through_handles() {
    unsafe {
        let mut params = ptr::null_mut();
        assert_eq!(mc_params_new_real(1, 2, 0.0, 100, &mut params), McStatus::Ok);
        let mut r = 0.0;
        assert_eq!(mc_params_escape_radius(params, &mut r), McStatus::Ok);
        assert_eq!(r, 2.0);
        let origin = mc(1, &[0.0, 0.0]);
        let far = mc(1, &[2.5, 0.0]);
        let mut code = 0;
        assert_eq!(mc_escape_time(origin, params, &mut code), McStatus::Ok);
        assert_eq!(code, MC_BOUNDED_CODE);
        assert_eq!(mc_escape_time(far, params, &mut code), McStatus::Ok);
        assert_eq!(code, 1);
        let wrong = mc(2, &[0.0; 4]);
        assert_eq!(mc_escape_time(wrong, params, &mut code), McStatus::OrderOutOfRange);

        let c = mc(1, &[-1.0, 0.0]);
        let mut p2 = ptr::null_mut();
        assert_eq!(mc_params_new(2, c, 100, &mut p2), McStatus::Ok);
        let one = mc(1, &[1.0, 0.0]);
        assert_eq!(mc_escape_time(one, p2, &mut code), McStatus::Ok);
        assert_eq!(code, MC_BOUNDED_CODE);
        assert_eq!(mc_params_new(1, c, 100, &mut p2), McStatus::InvalidArgument);

        for h in [origin, far, wrong, c, one] {
            mc_multicomplex_free(h);
        }
        mc_params_free(params);
    }
}

#[test]
fn classification_calls() {
    unsafe {
        let mut count = 0usize;
        assert_eq!(mc_class_count(3, 3, 0.25, &mut count), McStatus::Ok);
        assert_eq!(count, 8);
        assert_eq!(mc_class_count(4, 3, 0.25, &mut count), McStatus::Ok);
        assert_eq!(count, 9);
        assert_eq!(mc_class_count(2, 3, 0.25, &mut count), McStatus::OrderOutOfRange);

        let mut class = std::mem::MaybeUninit::<McSliceClass>::uninit();
        let masks = [3u32, 5, 6];
        assert_eq!(mc_classify(3, masks.as_ptr(), 3, 0.25, class.as_mut_ptr()), McStatus::Ok);
        let class = class.assume_init();
        assert_eq!(class.slice_case, McSliceCase::OddCClosed);
        assert_eq!(class.squares, [1, 1, 1]);
        assert_eq!(class.representative_masks, [3, 5, 6]);

        let mut other = std::mem::MaybeUninit::<McSliceClass>::uninit();
        let dup = [1u32, 1, 2];
        assert_eq!(
            mc_classify(3, dup.as_ptr(), 2, 0.0, other.as_mut_ptr()),
            McStatus::InvalidArgument
        );
        assert!(last_error().contains("distinct"));
    }
}

#[test]
fn render_and_export() {
    let dir = tempfile::tempdir().unwrap();
    unsafe {
        let mut params = ptr::null_mut();
        assert_eq!(mc_params_new_real(3, 2, 0.25, 50, &mut params), McStatus::Ok);
        let masks = [0u32, 1, 2];
        let dims = [9u32, 9, 9];
        let bounds = [-2.0, 2.0, -2.0, 2.0, -2.0, 2.0];
        let mut g1 = ptr::null_mut();
        let mut g8 = ptr::null_mut();
        assert_eq!(
            mc_render(params, masks.as_ptr(), dims.as_ptr(), bounds.as_ptr(), 1, &mut g1),
            McStatus::Ok
        );
        assert_eq!(
            mc_render(params, masks.as_ptr(), dims.as_ptr(), bounds.as_ptr(), 8, &mut g8),
            McStatus::Ok
        );
        let mut n1 = 0;
        let mut n8 = 0;
        let c1 = std::slice::from_raw_parts(mc_grid_codes(g1, &mut n1), n1);
        let c8 = std::slice::from_raw_parts(mc_grid_codes(g8, &mut n8), n8);
        assert_eq!(n1, 729);
        assert_eq!(c1, c8);
        assert_eq!(c1[364], MC_BOUNDED_CODE as u16);
        let mut d = [0u32; 3];
        assert_eq!(mc_grid_dims(g1, d.as_mut_ptr()), McStatus::Ok);
        assert_eq!(d, dims);
        let mut bounded = 0;
        assert_eq!(mc_grid_bounded_count(g1, &mut bounded), McStatus::Ok);
        assert!(bounded > 0);

        let path = CString::new(dir.path().join("g.mcvox").to_str().unwrap()).unwrap();
        assert_eq!(mc_grid_export(g1, McFormat::Mcvox, path.as_ptr()), McStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(mc_grid_read_mcvox(path.as_ptr(), &mut back), McStatus::Ok);
        let mut nb = 0;
        let cb = std::slice::from_raw_parts(mc_grid_codes(back, &mut nb), nb);
        assert_eq!(cb, c1);

        let ply = CString::new(dir.path().join("g.ply").to_str().unwrap()).unwrap();
        assert_eq!(mc_grid_export(g1, McFormat::Ply, ply.as_ptr()), McStatus::Ok);
        let pgm = CString::new(dir.path().join("g.pgm").to_str().unwrap()).unwrap();
        assert_eq!(mc_grid_export(g1, McFormat::PgmStack, pgm.as_ptr()), McStatus::Ok);
        assert!(dir.path().join("g_z0008.pgm").exists());

        let missing = CString::new(dir.path().join("nope.mcvox").to_str().unwrap()).unwrap();
        assert_eq!(mc_grid_read_mcvox(missing.as_ptr(), &mut back), McStatus::Io);
        assert!(last_error().contains("nope.mcvox"));

        let huge = [100_000u32, 100_000, 100_000];
        let mut g = ptr::null_mut();
        assert_eq!(
            mc_render(params, masks.as_ptr(), huge.as_ptr(), bounds.as_ptr(), 1, &mut g),
            McStatus::MemoryBudget
        );
        assert!(mc_grid_codes(ptr::null(), ptr::null_mut()).is_null());

        for h in [g1, g8] {
            mc_grid_free(h);
        }
        mc_params_free(params);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(mc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
