use std::path::Path;

#[test]
fn generated_header_declares_the_abi() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/geomech.h")).unwrap();
    for name in [
        "gm_expr_parse",
        "gm_expr_free",
        "gm_expr_equal",
        "gm_spec_load",
        "gm_spec_run",
        "gm_report_jsonl",
        "gm_last_error",
        "typedef struct GmExpr GmExpr",
        "GM_STATUS_PARSE_ERROR = 3",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn load_fixture_through_the_abi() {
    use geomech_ffi::*;
    use std::ffi::CString;
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/rescaled_oscillator.spec");
    let path = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        let mut spec = std::ptr::null_mut();
        assert_eq!(gm_spec_load(path.as_ptr(), &mut spec), GmStatus::Ok);
        let mut report = std::ptr::null_mut();
        assert_eq!(gm_spec_run(spec, std::ptr::null(), 7, 0, 0.0, &mut report), GmStatus::Ok);
        assert!(gm_report_len(report) > 0);
        assert_eq!(gm_report_all_pass(report), 1);
        gm_report_free(report);
        gm_spec_free(spec);
        let missing = CString::new("/nonexistent.spec").unwrap();
        let mut none = std::ptr::null_mut();
        assert_eq!(gm_spec_load(missing.as_ptr(), &mut none), GmStatus::SpecError);
        assert!(none.is_null());
    }
}
