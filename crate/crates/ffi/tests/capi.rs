use std::ffi::CStr;
use std::process::Command;
use std::ptr;

use nullcode_ffi::*;

fn last_error() -> String {
    let p = nc_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn field_ops() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(nc_field_new(4, &mut f), NcStatus::Ok);
        let mut v = 0u32;
        assert_eq!(nc_field_mul(f, 1, 7, &mut v), NcStatus::Ok);
        assert_eq!(v, 7);
        let mut inv = 0u32;
        assert_eq!(nc_field_inv(f, 7, &mut inv), NcStatus::Ok);
        assert_eq!(nc_field_mul(f, 7, inv, &mut v), NcStatus::Ok);
        assert_eq!(v, 1);
        assert_eq!(nc_field_mul(f, 16, 1, &mut v), NcStatus::DomainMismatch);
        assert!(!last_error().is_empty());
        assert_ne!(nc_field_inv(f, 0, &mut v), NcStatus::Ok);
        assert_eq!(nc_field_trace(f, 1, &mut v), NcStatus::Ok);
        assert_eq!(v, 0);
        nc_field_free(f);
    }
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        assert_eq!(nc_field_new(4, ptr::null_mut()), NcStatus::NullPointer);
        assert!(last_error().contains("null"));
        let mut info = NcCodeInfo::default();
        assert_eq!(nc_code_info(ptr::null(), &mut info), NcStatus::NullPointer);
        nc_code_free(ptr::null_mut());
        nc_instance_free(ptr::null_mut());
        nc_string_free(ptr::null_mut());
    }
}

#[test]
fn toy_code_and_instances() {
    unsafe {
        let mut code = ptr::null_mut();
        assert_eq!(nc_code_toy(&mut code), NcStatus::Ok);
        let mut info = NcCodeInfo::default();
        assert_eq!(nc_code_info(code, &mut info), NcStatus::Ok);
        assert_eq!((info.len, info.n, info.m, info.q, info.dimension), (8, 4, 2, 2, 4));

        let zero = [0u32; 8];
        let mut ok = false;
        assert_eq!(nc_code_contains(code, zero.as_ptr(), 8, &mut ok), NcStatus::Ok);
        assert!(ok);
        assert_eq!(nc_code_contains(code, zero.as_ptr(), 3, &mut ok), NcStatus::Ok);
        assert!(!ok);

        let mut inst = ptr::null_mut();
        assert_eq!(nc_instance_constant(code, false, &mut inst), NcStatus::Ok);
        assert_eq!(nc_instance_verify(inst, zero.as_ptr(), 8, &mut ok), NcStatus::Ok);
        assert!(ok);
        let mut count = 0u64;
        assert_eq!(nc_instance_count_solutions(inst, &mut count), NcStatus::Ok);
        assert_eq!(count, 16);
        let mut summary = NcAlg1Summary::default();
        assert_eq!(nc_alg1_run(inst, &mut summary), NcStatus::Ok);
        assert!((summary.success_probability - 1.0).abs() < 1e-9);
        nc_instance_free(inst);

        let mut a = ptr::null_mut();
        let mut b = ptr::null_mut();
        assert_eq!(nc_instance_sample(code, 1, 4, 9, &mut a), NcStatus::Ok);
        assert_eq!(nc_instance_sample(code, 1, 4, 9, &mut b), NcStatus::Ok);
        let (mut ca, mut cb) = (0u64, 0u64);
        nc_instance_count_solutions(a, &mut ca);
        nc_instance_count_solutions(b, &mut cb);
        assert_eq!(ca, cb);
        nc_instance_free(a);
        nc_instance_free(b);

        assert_eq!(nc_instance_sample(code, 5, 4, 0, &mut a), NcStatus::InvalidArgument);
        nc_code_free(code);
    }
}

#[test]
fn code_json_round_trip() {
    unsafe {
        let mut code = ptr::null_mut();
        assert_eq!(nc_code_preset(1, &mut code), NcStatus::Ok);
        let mut json = ptr::null_mut();
        assert_eq!(nc_code_to_json(code, &mut json), NcStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(nc_code_from_json(json, &mut back), NcStatus::Ok);
        let (mut i1, mut i2) = (NcCodeInfo::default(), NcCodeInfo::default());
        nc_code_info(code, &mut i1);
        nc_code_info(back, &mut i2);
        assert_eq!((i1.len, i1.n, i1.q, i1.dimension), (i2.len, i2.n, i2.q, i2.dimension));
        nc_string_free(json);
        nc_code_free(back);
        nc_code_free(code);

        let bad = c"{not json";
        assert_eq!(nc_code_from_json(bad.as_ptr(), &mut back), NcStatus::Parse);
    }
}

#[test]
fn hashing_and_bounds() {
    unsafe {
        let mut fam = ptr::null_mut();
        assert_eq!(nc_hash_family_new(4, 2, 4, 4, &mut fam), NcStatus::Ok);
        let key = [0u32, 0];
        let mut v = 99u32;
        assert_eq!(nc_hash_eval(fam, key.as_ptr(), 2, 3, 1, &mut v), NcStatus::Ok);
        assert_eq!(v, 0);
        assert_eq!(nc_hash_eval(fam, key.as_ptr(), 1, 3, 1, &mut v), NcStatus::LengthMismatch);
        nc_hash_family_free(fam);
        assert_eq!(nc_hash_family_new(2, 2, 4, 8, &mut fam), NcStatus::InvalidArgument);
    }
    assert!((nc_union_bound(4, 2, 0.5) - 4.0).abs() < 1e-12);
    let v = unsafe { CStr::from_ptr(nc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/nullcode.h");
    let src = std::env::temp_dir().join(format!("nullcode_hdr_{}.c", std::process::id()));
    std::fs::write(&src, format!("#include \"{header}\"\nint main(void) {{ return nc_version() == 0; }}\n")).unwrap();
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-Wall"]).arg(&src).output() else {
        eprintln!("cc not available, skipping");
        return;
    };
    let _ = std::fs::remove_file(&src);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
