//! Exercises the C ABI exactly as an external caller would: through
//! the exported symbols, raw pointers, and status codes.

use std::ffi::{CStr, CString};
use std::ptr;

use revlin_ffi::*;

fn parse(text: &str) -> *mut RevlinMatrix {
    let text = CString::new(text).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { revlin_matrix_parse(text.as_ptr(), &mut out) };
    assert_eq!(status, RevlinStatus::Ok);
    assert!(!out.is_null());
    out
}

fn format(matrix: *const RevlinMatrix) -> String {
    let raw = unsafe { revlin_matrix_format(matrix) };
    assert!(!raw.is_null());
    let text = unsafe { CStr::from_ptr(raw) }.to_str().unwrap().to_string();
    unsafe { revlin_string_free(raw) };
    text
}

fn last_error() -> String {
    let raw = revlin_last_error_message();
    assert!(!raw.is_null(), "an error message was recorded");
    let text = unsafe { CStr::from_ptr(raw) }.to_str().unwrap().to_string();
    unsafe { revlin_string_free(raw) };
    text
}

#[test]
fn matmul_through_the_c_abi() {
    let arena = revlin_arena_new();
    let a = parse("1 2\n3 4\n");
    let b = parse("5 6\n7 8\n");
    let mut product = ptr::null_mut();
    let mut report = RevlinReport::default();
    let status = unsafe { revlin_matmul(arena, a, b, &mut product, &mut report) };
    assert_eq!(status, RevlinStatus::Ok);
    assert_eq!(format(product), "19 22\n43 50\n");
    assert_eq!(report.primitive_ops, 24);
    assert_eq!(report.transient_peak, 1);
    assert_eq!(report.garbage_cells, 0);
    unsafe {
        revlin_matrix_free(a);
        revlin_matrix_free(b);
        revlin_matrix_free(product);
        revlin_arena_free(arena);
    }
}

#[test]
fn invert_reports_exact_values_and_dimensions() {
    let arena = revlin_arena_new();
    let a = parse("1 2\n3 4\n");
    let mut inverse = ptr::null_mut();
    let status = unsafe { revlin_invert(arena, a, &mut inverse, ptr::null_mut()) };
    assert_eq!(status, RevlinStatus::Ok);
    assert_eq!(unsafe { revlin_matrix_rows(inverse) }, 2);
    assert_eq!(unsafe { revlin_matrix_cols(inverse) }, 2);
    assert_eq!(format(inverse), "-2 1\n3/2 -1/2\n");
    unsafe {
        revlin_matrix_free(a);
        revlin_matrix_free(inverse);
        revlin_arena_free(arena);
    }
}

#[test]
fn zero_pivot_surfaces_as_singular_status_with_a_message() {
    let arena = revlin_arena_new();
    let perm = parse("0 1\n1 0\n");
    let mut inverse = ptr::null_mut();
    let status = unsafe { revlin_invert(arena, perm, &mut inverse, ptr::null_mut()) };
    assert_eq!(status, RevlinStatus::Singular);
    assert!(inverse.is_null(), "no output on failure");
    assert!(last_error().contains("pivot"), "message names the pivot");
    let name = unsafe { CStr::from_ptr(revlin_status_name(status)) };
    assert_eq!(name.to_str().unwrap(), "singular or pivot-blocked");
    unsafe {
        revlin_matrix_free(perm);
        revlin_arena_free(arena);
    }
}

#[test]
fn ols_fit_recovers_the_exact_line() {
    let arena = revlin_arena_new();
    // one point per column: x = 1, 2
    let x = parse("1 2\n");
    let y = parse("3 5\n");
    let mut theta = ptr::null_mut();
    let mut report = RevlinReport::default();
    let status =
        unsafe { revlin_ols_fit(arena, x, y, ptr::null(), 1, &mut theta, &mut report) };
    assert_eq!(status, RevlinStatus::Ok);
    assert_eq!(format(theta), "2\n1\n");
    assert_eq!(report.garbage_cells, 0);
    unsafe {
        revlin_matrix_free(x);
        revlin_matrix_free(y);
        revlin_matrix_free(theta);
        revlin_arena_free(arena);
    }
}

#[test]
fn ridge_lambda_is_parsed_from_text() {
    let arena = revlin_arena_new();
    let x = parse("1 1\n");
    let y = parse("1 1\n");
    let lambda = CString::new("1/2").unwrap();
    let mut theta = ptr::null_mut();
    let status = unsafe {
        revlin_ols_fit(arena, x, y, lambda.as_ptr(), 0, &mut theta, ptr::null_mut())
    };
    assert_eq!(status, RevlinStatus::Ok);
    assert_eq!(format(theta), "2/3\n");

    let bad = CString::new("-1").unwrap();
    let mut unused = ptr::null_mut();
    let status = unsafe {
        revlin_ols_fit(arena, x, y, bad.as_ptr(), 0, &mut unused, ptr::null_mut())
    };
    assert_eq!(status, RevlinStatus::ParseError);
    assert!(last_error().contains("nonnegative"));
    unsafe {
        revlin_matrix_free(x);
        revlin_matrix_free(y);
        revlin_matrix_free(theta);
        revlin_arena_free(arena);
    }
}

#[test]
fn bit_limit_guard_applies_to_later_calls() {
    let arena = revlin_arena_new();
    assert_eq!(
        unsafe { revlin_arena_set_bit_limit(arena, 2) },
        RevlinStatus::Ok
    );
    let a = parse("1 2\n3 4\n");
    let mut inverse = ptr::null_mut();
    let status = unsafe { revlin_invert(arena, a, &mut inverse, ptr::null_mut()) };
    assert_eq!(status, RevlinStatus::BitLimit);
    assert!(last_error().contains("exceeds limit"));

    // zero lifts the cap
    assert_eq!(
        unsafe { revlin_arena_set_bit_limit(arena, 0) },
        RevlinStatus::Ok
    );
    let status = unsafe { revlin_invert(arena, a, &mut inverse, ptr::null_mut()) };
    assert_eq!(status, RevlinStatus::Ok);
    unsafe {
        revlin_matrix_free(a);
        revlin_matrix_free(inverse);
        revlin_arena_free(arena);
    }
}

#[test]
fn roundtrip_verification_covers_all_program_families() {
    let arena = revlin_arena_new();
    for op in [RevlinOp::Matmul, RevlinOp::Invert, RevlinOp::Ols] {
        let status = unsafe { revlin_verify_roundtrip(arena, op, 4, 7) };
        assert_eq!(status, RevlinStatus::Ok);
    }
    assert_eq!(
        unsafe { revlin_verify_roundtrip(arena, RevlinOp::Matmul, 0, 7) },
        RevlinStatus::InvalidArgument
    );
    unsafe { revlin_arena_free(arena) };
}

#[test]
fn null_and_malformed_arguments_are_rejected() {
    let arena = revlin_arena_new();
    let mut out = ptr::null_mut();

    assert_eq!(
        unsafe { revlin_matrix_parse(ptr::null(), &mut out) },
        RevlinStatus::InvalidArgument
    );
    let bad = CString::new("1 2\n3\n").unwrap();
    assert_eq!(
        unsafe { revlin_matrix_parse(bad.as_ptr(), &mut out) },
        RevlinStatus::ParseError
    );

    let a = parse("1 2\n3 4\n");
    let mut product = ptr::null_mut();
    assert_eq!(
        unsafe { revlin_matmul(arena, a, ptr::null(), &mut product, ptr::null_mut()) },
        RevlinStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { revlin_matmul(ptr::null(), a, a, &mut product, ptr::null_mut()) },
        RevlinStatus::InvalidArgument
    );

    let wide = parse("1 2 3\n");
    assert_eq!(
        unsafe { revlin_matmul(arena, wide, wide, &mut product, ptr::null_mut()) },
        RevlinStatus::ShapeError
    );

    assert_eq!(unsafe { revlin_matrix_rows(ptr::null()) }, 0);
    unsafe {
        revlin_matrix_free(a);
        revlin_matrix_free(wide);
        revlin_matrix_free(ptr::null_mut());
        revlin_string_free(ptr::null_mut());
        revlin_arena_free(ptr::null_mut());
        revlin_arena_free(arena);
    }
}
