use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use cutlab_ffi::*;

fn last_error() -> String {
    let p = cutlab_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { cutlab_string_free(p) };
    s
}

const P3: &str = r#"{"n":3,"root":1,"edges":[[1,2],[2,3]],"mode":"rank","cut_times":[1,2]}"#;

#[test]
fn generate_roundtrip_and_masses() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(cutlab_instance_generate(40, false, 7, &mut inst), CutlabStatus::Ok);
        assert_eq!(cutlab_instance_vertex_count(inst), 40);

        let mut json = ptr::null_mut();
        assert_eq!(cutlab_instance_to_json(inst, &mut json), CutlabStatus::Ok);
        let text = CString::new(take_string(json)).unwrap();
        let mut back = ptr::null_mut();
        assert_eq!(cutlab_instance_from_json(text.as_ptr(), &mut back), CutlabStatus::Ok);

        let mut len = 0usize;
        let mut buf = [0.0f64; 40];
        assert_eq!(cutlab_component_masses(inst, 20.5, buf.as_mut_ptr(), 40, &mut len), CutlabStatus::Ok);
        let a = buf[..len].to_vec();
        assert_eq!(cutlab_component_masses(back, 20.5, buf.as_mut_ptr(), 40, &mut len), CutlabStatus::Ok);
        assert_eq!(a, buf[..len].to_vec());
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(a.windows(2).all(|w| w[0] >= w[1]));

        cutlab_instance_free(back);
        cutlab_instance_free(inst);
    }
}

#[test]
fn excursions_match_masses() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(cutlab_instance_generate(60, true, 3, &mut inst), CutlabStatus::Ok);
        let mut f = ptr::null_mut();
        assert_eq!(cutlab_bertoin_function(inst, &mut f), CutlabStatus::Ok);
        let k = cutlab_function_len(f);
        let (mut h, mut v) = (vec![0.0; k], vec![0.0; k]);
        let mut len = 0;
        assert_eq!(cutlab_function_points(f, h.as_mut_ptr(), v.as_mut_ptr(), k, &mut len), CutlabStatus::Ok);
        assert_eq!(len, k);
        assert_eq!((h[0], v[0], h[k - 1], v[k - 1]), (0.0, 0.0, 1.0, 0.0));

        for t in [0.5, 3.0, 12.0] {
            let mut masses = vec![0.0; 60];
            let mut lengths = vec![0.0; 60];
            let (mut a, mut b) = (0, 0);
            assert_eq!(cutlab_component_masses(inst, t, masses.as_mut_ptr(), 60, &mut a), CutlabStatus::Ok);
            assert_eq!(cutlab_excursion_lengths(f, t, lengths.as_mut_ptr(), 60, &mut b), CutlabStatus::Ok);
            let mut lengths = lengths[..b].to_vec();
            lengths.sort_by(|x, y| y.total_cmp(x));
            assert_eq!(a, b);
            for (x, y) in masses[..a].iter().zip(&lengths) {
                assert!((x - y).abs() < 1e-9, "t={t}: {x} vs {y}");
            }
        }
        cutlab_function_free(f);
        cutlab_instance_free(inst);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut inst = ptr::null_mut();
        let bad = CString::new(r#"{"n":3,"root":1,"edges":[[1,2],[1,2]],"mode":"rank","cut_times":[1,2]}"#).unwrap();
        assert_eq!(cutlab_instance_from_json(bad.as_ptr(), &mut inst), CutlabStatus::InvalidInstance);
        assert!(inst.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(cutlab_instance_from_json(ptr::null(), &mut inst), CutlabStatus::NullPointer);

        let good = CString::new(P3).unwrap();
        assert_eq!(cutlab_instance_from_json(good.as_ptr(), &mut inst), CutlabStatus::Ok);
        assert!(cutlab_last_error().is_null());
        let mut len = 0;
        let status = cutlab_component_masses(inst, 0.0, ptr::null_mut(), 0, &mut len);
        assert_eq!((status, len), (CutlabStatus::BufferTooSmall, 1));
        cutlab_instance_free(inst);
        cutlab_instance_free(ptr::null_mut());
        cutlab_string_free(ptr::null_mut());
    }
}

#[test]
fn suite_runs_through_the_abi() {
    unsafe {
        let cfg = CString::new(r#"{"experiment":"prim-figure","seed":1}"#).unwrap();
        let mut report = ptr::null_mut();
        let mut pass = false;
        assert_eq!(cutlab_run_suite(cfg.as_ptr(), &mut report, &mut pass), CutlabStatus::Ok);
        assert!(pass);
        let v: serde_json::Value = serde_json::from_str(&take_string(report)).unwrap();
        assert_eq!(v["experiment"], "prim-figure");

        let cfg = CString::new(r#"{"experiment":"nope"}"#).unwrap();
        assert_eq!(cutlab_run_suite(cfg.as_ptr(), &mut report, &mut pass), CutlabStatus::InvalidArgument);
    }
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/cutlab.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["cutlab_instance_generate", "cutlab_run_suite", "cutlab_last_error", "CUTLAB_STATUS_OK"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(status) = Command::new("cc").args(["-fsyntax-only", "-x", "c"]).arg(&header).status() else {
        eprintln!("no C compiler; syntax check skipped");
        return;
    };
    assert!(status.success());
}
