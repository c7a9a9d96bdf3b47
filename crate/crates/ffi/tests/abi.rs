use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use vaxgame_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = vg_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn short_config() -> *mut VgConfig {
    let cfg = vg_config_new();
    unsafe {
        assert_eq!(vg_config_set(cfg, c("t_end").as_ptr(), c("50").as_ptr()), VgStatus::Ok);
    }
    cfg
}

#[test]
fn ne_run_exposes_trajectory() {
    let cfg = short_config();
    let mut run = ptr::null_mut();
    unsafe {
        assert_eq!(vg_ne_run(cfg, &mut run), VgStatus::Ok);
        assert_eq!(vg_run_len(run), 501);
        let mut st = VgState::default();
        assert_eq!(vg_run_state(run, 0, &mut st), VgStatus::Ok);
        assert_eq!((st.t, st.s, st.v, st.i, st.r, st.rate), (0.0, 0.98, 0.01, 0.01, 0.0, 0.1));
        assert_eq!(vg_run_state(run, 500, &mut st), VgStatus::Ok);
        assert_eq!(st.t, 50.0);
        assert!((st.s + st.v + st.i + st.r - 1.0).abs() < 1e-9);
        assert_eq!(vg_run_state(run, 501, &mut st), VgStatus::OutOfRange);
        assert!(last_error().contains("501"));
        let mut m = VgMetrics::default();
        assert_eq!(vg_run_metrics(run, &mut m), VgStatus::Ok);
        assert!(m.it > 0.0 && m.j.is_nan());
        assert_eq!(vg_run_iterations(run), 0);
        vg_run_free(run);
        vg_config_free(cfg);
    }
}

#[test]
fn so_run_respects_bounds() {
    let cfg = short_config();
    let mut run = ptr::null_mut();
    unsafe {
        assert_eq!(vg_so_run(cfg, &mut run), VgStatus::Ok);
        assert!(vg_run_converged(run));
        assert!(vg_run_iterations(run) >= 1);
        let mut st = VgState::default();
        for k in 0..vg_run_len(run) {
            vg_run_state(run, k, &mut st);
            assert!((0.0..=0.1).contains(&st.rate));
        }
        let mut m = VgMetrics::default();
        vg_run_metrics(run, &mut m);
        assert!(m.j > 0.0);
        vg_run_free(run);
        vg_config_free(cfg);
    }
}

#[test]
fn compare_fills_struct() {
    let cfg = short_config();
    let mut cmp = VgComparison::default();
    unsafe {
        assert_eq!(vg_compare(cfg, &mut cmp), VgStatus::Ok);
        vg_config_free(cfg);
    }
    assert_eq!(cmp.sed, cmp.so.asp - cmp.ne.asp);
    assert!(cmp.so.j > 0.0 && cmp.ne.j.is_nan());
    assert_eq!(cmp.ne.horizon, 50.0);
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let cfg = vg_config_new();
        assert_eq!(
            vg_config_set(cfg, c("bogus").as_ptr(), c("1").as_ptr()),
            VgStatus::InvalidArgument
        );
        assert!(last_error().contains("bogus"));
        assert_eq!(vg_config_set(cfg, c("beta").as_ptr(), c("-1").as_ptr()), VgStatus::Ok);
        assert_eq!(vg_config_validate(cfg), VgStatus::InvalidArgument);
        assert!(last_error().contains("beta"));
        let mut run = ptr::null_mut();
        assert_eq!(vg_ne_run(cfg, &mut run), VgStatus::InvalidArgument);
        assert!(run.is_null());

        let mut beta = 0.0;
        assert_eq!(vg_config_get_param(cfg, c("beta").as_ptr(), &mut beta), VgStatus::Ok);
        assert_eq!(beta, -1.0);

        assert_eq!(vg_config_set(ptr::null_mut(), c("beta").as_ptr(), c("1").as_ptr()), VgStatus::NullPointer);
        assert_eq!(vg_config_set(cfg, ptr::null(), c("1").as_ptr()), VgStatus::NullPointer);
        assert_eq!(vg_ne_run(cfg, ptr::null_mut()), VgStatus::NullPointer);
        assert_eq!(vg_run_len(ptr::null()), 0);
        vg_config_free(cfg);
        vg_config_free(ptr::null_mut());
        vg_run_free(ptr::null_mut());

        let mut loaded = ptr::null_mut();
        assert_eq!(vg_config_load(c("/no/such/file").as_ptr(), &mut loaded), VgStatus::Io);
    }
}

#[test]
fn config_file_and_multi_key_edits() {
    let dir = std::env::temp_dir().join(format!("vaxgame-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.cfg");
    std::fs::write(&path, "omega = 1/30\n").unwrap();
    unsafe {
        let mut cfg = ptr::null_mut();
        let p = c(path.to_str().unwrap());
        assert_eq!(vg_config_load(p.as_ptr(), &mut cfg), VgStatus::Ok);
        let mut omega = 0.0;
        vg_config_get_param(cfg, c("omega").as_ptr(), &mut omega);
        assert_eq!(omega, 1.0 / 30.0);
        vg_config_set(cfg, c("init.s").as_ptr(), c("0.97").as_ptr());
        assert_ne!(vg_config_validate(cfg), VgStatus::Ok);
        vg_config_set(cfg, c("init.r").as_ptr(), c("0.01").as_ptr());
        assert_eq!(vg_config_validate(cfg), VgStatus::Ok);
        vg_config_free(cfg);
    }
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn status_names_are_static() {
    let name = unsafe { CStr::from_ptr(vg_status_str(VgStatus::OutOfRange)) };
    assert_eq!(name.to_str().unwrap(), "out of range");
}

#[test]
fn header_declares_the_api() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/vaxgame.h");
    let text = std::fs::read_to_string(&header).expect("header generated by the build script");
    for symbol in [
        "typedef struct VgConfig VgConfig;",
        "typedef struct VgRun VgRun;",
        "VG_STATUS_OK = 0",
        "VgStatus vg_compare(",
        "size_t vg_run_len(",
        "const char *vg_last_error(void);",
    ] {
        assert!(text.contains(symbol), "missing `{symbol}`");
    }
}

#[test]
fn header_compiles_as_c() {
    let cc = which_cc().expect("a C compiler on PATH");
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = std::env::temp_dir().join(format!("vaxgame-hdr-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("use.c");
    std::fs::write(
        &src,
        "#include \"vaxgame.h\"\n\
         int main(void) {\n\
           VgConfig *cfg = vg_config_new();\n\
           VgComparison cmp;\n\
           VgStatus st = vg_compare(cfg, &cmp);\n\
           vg_config_free(cfg);\n\
           return st == VG_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .status()
        .unwrap();
    std::fs::remove_dir_all(dir).ok();
    assert!(status.success());
}

fn which_cc() -> Option<&'static str> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|cc| Command::new(cc).arg("--version").output().is_ok())
}
