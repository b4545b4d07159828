use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use homleap_ffi::*;

struct Handle(*mut HomleapDistribution);

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { homleap_distribution_free(self.0) };
    }
}

fn new(total: u32, delta: i64, r: f64, opts: Option<&HomleapOptions>) -> Result<Handle, HomleapStatus> {
    let mut out = ptr::null_mut();
    let st = unsafe { homleap_distribution_new(total, delta, r, opts.map_or(ptr::null(), |o| o as *const _), &mut out) };
    if st == HomleapStatus::Ok {
        Ok(Handle(out))
    } else {
        assert!(out.is_null());
        Err(st)
    }
}

fn rows(h: &Handle) -> Vec<(i64, f64)> {
    let n = unsafe { homleap_distribution_len(h.0) };
    (0..n)
        .map(|i| {
            let (mut d, mut p) = (0, 0.0);
            assert_eq!(unsafe { homleap_distribution_row(h.0, i, &mut d, &mut p) }, HomleapStatus::Ok);
            (d, p)
        })
        .collect()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(homleap_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn balanced_pair_bunches() {
    let h = new(2, 0, 0.5, None).unwrap();
    let got = rows(&h);
    assert_eq!(got.iter().map(|r| r.0).collect::<Vec<_>>(), [-2, 0, 2]);
    assert!((got[0].1 - 0.5).abs() < 1e-15 && got[1].1.abs() < 1e-15);
    let mut p = -1.0;
    assert_eq!(unsafe { homleap_distribution_probability(h.0, 7, &mut p) }, HomleapStatus::Ok);
    assert_eq!(p, 0.0);
}

#[test]
fn moments_follow_the_closed_form() {
    for (s, d, r) in [(20u32, -6i64, 0.2), (13, 5, 0.7), (50, 0, 0.5)] {
        let h = new(s, d, r, None).unwrap();
        let (mut mean, mut var, mut want) = (0.0, 0.0, 0.0);
        assert_eq!(unsafe { homleap_distribution_moments(h.0, &mut mean, &mut var) }, HomleapStatus::Ok);
        assert_eq!(unsafe { homleap_predicted_variance(s, d, r, &mut want) }, HomleapStatus::Ok);
        assert!((mean - d as f64 * (1.0 - 2.0 * r)).abs() < 1e-9);
        assert!((var - want).abs() < 1e-9, "{var} vs {want}");
    }
}

#[test]
fn options_reach_the_channels() {
    let mut o = homleap_options_default();
    o.detector_efficiency = 0.8;
    let lossy = rows(&new(10, -4, 0.2, Some(&o)).unwrap());
    assert_eq!(lossy.len(), 21);
    assert!((lossy.iter().map(|r| r.1).sum::<f64>() - 1.0).abs() < 1e-12);

    let mut o = homleap_options_default();
    o.distinguishability = std::f64::consts::FRAC_PI_2;
    let h = new(4, 0, 0.5, Some(&o)).unwrap();
    let mut p = 0.0;
    unsafe { homleap_distribution_probability(h.0, 0, &mut p) };
    assert!(p > 0.3, "orthogonal inputs lose the suppression at zero: {p}");

    // zero-initialised options mean an ideal run
    let zeroed: HomleapOptions = unsafe { std::mem::zeroed() };
    assert_eq!(rows(&new(6, 2, 0.3, Some(&zeroed)).unwrap()), rows(&new(6, 2, 0.3, None).unwrap()));

    let mut o = homleap_options_default();
    o.resolution = 20;
    let binned = rows(&new(50, 0, 0.5, Some(&o)).unwrap());
    assert_eq!(binned.iter().map(|r| r.0).collect::<Vec<_>>(), [-40, -20, 0, 20, 40, 60]);
}

#[test]
fn errors_carry_codes_and_messages() {
    assert_eq!(new(3, 0, 0.5, None).err(), Some(HomleapStatus::ParityMismatch));
    assert!(last_error().contains("parity"));
    assert_eq!(new(4, 0, 1.5, None).err(), Some(HomleapStatus::OutOfRange));
    let mut o = homleap_options_default();
    o.distinguishability = 0.3;
    o.detector_efficiency = 0.9;
    assert_eq!(new(4, 0, 0.5, Some(&o)).err(), Some(HomleapStatus::OutOfRange));

    let st = unsafe { homleap_distribution_new(2, 0, 0.5, ptr::null(), ptr::null_mut()) };
    assert_eq!(st, HomleapStatus::NullPointer);
    let h = new(2, 0, 0.5, None).unwrap();
    let (mut d, mut p) = (0, 0.0);
    assert_eq!(unsafe { homleap_distribution_row(h.0, 3, &mut d, &mut p) }, HomleapStatus::OutOfRange);
    assert_eq!(unsafe { homleap_distribution_moments(ptr::null(), ptr::null_mut(), ptr::null_mut()) }, HomleapStatus::NullPointer);
    assert_eq!(unsafe { homleap_distribution_len(ptr::null()) }, 0);
    unsafe { homleap_distribution_free(ptr::null_mut()) };

    let name = unsafe { CStr::from_ptr(homleap_status_name(HomleapStatus::OffLattice)) };
    assert_eq!(name.to_str().unwrap(), "off lattice");
}

#[test]
fn visibility_values() {
    let (mut v, mut nc) = (0.0, false);
    assert_eq!(unsafe { homleap_visibility(1, 1, 0.5, &mut v, &mut nc) }, HomleapStatus::Ok);
    assert!((v - 1.0).abs() < 1e-15 && nc);
    assert_eq!(unsafe { homleap_visibility(10, 10, 0.5, &mut v, ptr::null_mut()) }, HomleapStatus::Ok);
    assert!((v - 1.0 / 1.9).abs() < 1e-12);
    assert_eq!(unsafe { homleap_visibility(2, 2, 0.0, &mut v, ptr::null_mut()) }, HomleapStatus::OutOfRange);
    let version = unsafe { CStr::from_ptr(homleap_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/homleap.h")
}

#[test]
fn header_declares_the_exports() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "homleap_distribution_new",
        "homleap_distribution_free",
        "homleap_distribution_len",
        "homleap_distribution_row",
        "homleap_distribution_probability",
        "homleap_distribution_moments",
        "homleap_predicted_variance",
        "homleap_visibility",
        "homleap_last_error",
        "homleap_status_name",
        "homleap_options_default",
        "typedef struct HomleapDistribution HomleapDistribution;",
        "HOMLEAP_STATUS_PARITY_MISMATCH = 2",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let Ok(cc) = which("cc") else {
        eprintln!("no C compiler, skipping");
        return;
    };
    let dir = tempfile_dir();
    let src = dir.join("use.c");
    std::fs::write(
        &src,
        "#include \"homleap.h\"\nint main(void) {\n  HomleapOptions o = homleap_options_default();\n  HomleapDistribution *d = 0;\n  HomleapStatus s = homleap_distribution_new(2, 0, 0.5, &o, &d);\n  (void)s;\n  homleap_distribution_free(d);\n  return 0;\n}\n",
    )
    .unwrap();
    let include = header().parent().unwrap().to_path_buf();
    for (lang, std) in [("c", "-std=c99"), ("c++", "-std=c++11")] {
        let status = Command::new(&cc)
            .args(["-x", lang, std, "-Wall", "-Werror", "-fsyntax-only", "-I"])
            .arg(&include)
            .arg(&src)
            .status()
            .unwrap();
        assert!(status.success(), "header failed to compile as {lang}");
    }
    std::fs::remove_dir_all(dir).ok();
}

fn which(name: &str) -> Result<PathBuf, ()> {
    std::env::var_os("PATH")
        .iter()
        .flat_map(std::env::split_paths)
        .map(|p| p.join(name))
        .find(|p| p.is_file())
        .ok_or(())
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("homleap-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
