//! Exercises the C ABI end to end: config -> run handle -> index queries,
//! plus the error paths a C caller hits first.

use std::ffi::{CStr, CString};
use std::path::Path;

use surfnet_ffi::*;

fn write_fixture(dir: &Path) -> CString {
    let mut csv = String::from("car_id,time,lon,lat,speed,direction,is_load\n");
    for car in 0..40 {
        for trip in 0..4 {
            let base = 3600 + car * 60 + trip * 600;
            let (ox, oy) = (1000.0 + car as f64 * 7.0, 1000.0 + trip as f64 * 11.0);
            let (dx, dy) = (4000.0 + car as f64 * 5.0, 3800.0 + trip as f64 * 13.0);
            for (i, load, x, y) in [
                (0, 0, ox, oy),
                (1, 1, ox, oy),
                (2, 1, dx, dy),
                (3, 0, dx, dy),
            ] {
                let ts = base + i * 60;
                let (h, m, s) = (ts / 3600, (ts % 3600) / 60, ts % 60);
                csv.push_str(&format!(
                    "c{car},2013-05-10T{h:02}:{m:02}:{s:02},{x},{y},5,90,{load}\n"
                ));
            }
        }
    }
    std::fs::write(dir.join("fleet.csv"), csv).unwrap();
    std::fs::write(
        dir.join("region.geojson"),
        r#"{"type":"Polygon","coordinates":[[[0,0],[6000,0],[6000,6000],[0,6000],[0,0]]]}"#,
    )
    .unwrap();
    let config = r#"
input = ["fleet.csv"]
out_dir = "out"
coords = "meters"

[[region]]
name = "city"
geojson = "region.geojson"
"#;
    let path = dir.join("run.toml");
    std::fs::write(&path, config).unwrap();
    CString::new(path.to_str().unwrap()).unwrap()
}

#[test]
fn run_query_and_free_through_the_c_abi() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_fixture(dir.path());

    unsafe {
        let mut run: *mut SurfnetRun = std::ptr::null_mut();
        let status = surfnet_run_config_file(config_path.as_ptr(), &mut run);
        assert_eq!(status, SurfnetStatus::Ok);
        assert!(!run.is_null());

        assert_eq!(surfnet_run_region_count(run), 1);
        let name = surfnet_run_region_name(run, 0);
        assert!(!name.is_null());
        assert_eq!(CStr::from_ptr(name).to_str().unwrap(), "city");
        surfnet_string_free(name);

        let windows = surfnet_run_window_count(run, 0);
        assert!(windows >= 1);

        let mut indices = std::mem::MaybeUninit::<SurfnetIndices>::uninit();
        let status = surfnet_run_indices(run, 0, 0, indices.as_mut_ptr());
        assert_eq!(status, SurfnetStatus::Ok);
        let indices = indices.assume_init();
        assert!(indices.sa_km2 > 0.0);
        assert_eq!(indices.mu, indices.e as i64 - indices.v as i64 + indices.p as i64);

        let manifest = surfnet_run_manifest_path(run);
        assert!(!manifest.is_null());
        let manifest_path = CStr::from_ptr(manifest).to_str().unwrap().to_string();
        assert!(std::path::Path::new(&manifest_path).is_file());
        surfnet_string_free(manifest);

        // Out-of-range queries fail cleanly with a message.
        let mut out = std::mem::MaybeUninit::<SurfnetIndices>::uninit();
        let status = surfnet_run_indices(run, 0, windows + 10, out.as_mut_ptr());
        assert_eq!(status, SurfnetStatus::InvalidArgument);
        let message = surfnet_last_error_message();
        assert!(!message.is_null());
        surfnet_string_free(message);

        surfnet_run_free(run);
    }
}

#[test]
fn chart_through_the_c_abi() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_fixture(dir.path());
    unsafe {
        let mut run: *mut SurfnetRun = std::ptr::null_mut();
        assert_eq!(
            surfnet_run_config_file(config_path.as_ptr(), &mut run),
            SurfnetStatus::Ok
        );
        surfnet_run_free(run);
    }
    let csv = dir.path().join("out/city/indices.csv");
    let charts_dir = dir.path().join("charts");
    let csv_c = CString::new(csv.to_str().unwrap()).unwrap();
    let dir_c = CString::new(charts_dir.to_str().unwrap()).unwrap();
    unsafe {
        assert_eq!(
            surfnet_chart_csv(csv_c.as_ptr(), dir_c.as_ptr()),
            SurfnetStatus::Ok
        );
    }
    assert!(charts_dir.join("complexity.svg").is_file());
    assert!(charts_dir.join("connectivity.svg").is_file());
}

#[test]
fn errors_surface_as_status_codes_and_messages() {
    unsafe {
        // Null arguments.
        let mut run: *mut SurfnetRun = std::ptr::null_mut();
        assert_eq!(
            surfnet_run_config_file(std::ptr::null(), &mut run),
            SurfnetStatus::InvalidArgument
        );
        let message = surfnet_last_error_message();
        assert!(!message.is_null());
        surfnet_string_free(message);

        // Missing config file.
        let missing = CString::new("/nonexistent/surfnet.toml").unwrap();
        let status = surfnet_run_config_file(missing.as_ptr(), &mut run);
        assert_eq!(status, SurfnetStatus::Input);
        assert!(run.is_null());

        // Null handle queries are inert.
        assert_eq!(surfnet_run_region_count(std::ptr::null()), 0);
        assert_eq!(surfnet_run_window_count(std::ptr::null(), 0), 0);
        assert!(surfnet_run_manifest_path(std::ptr::null()).is_null());
        surfnet_run_free(std::ptr::null_mut());
        surfnet_string_free(std::ptr::null_mut());
    }
}

#[test]
fn generated_header_covers_the_surface() {
    let header = std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("include/surfnet.h"),
    )
    .unwrap();
    for symbol in [
        "surfnet_run_config_file",
        "surfnet_sweep_config_file",
        "surfnet_chart_csv",
        "surfnet_run_region_count",
        "surfnet_run_region_name",
        "surfnet_run_window_count",
        "surfnet_run_indices",
        "surfnet_run_manifest_path",
        "surfnet_run_free",
        "surfnet_string_free",
        "surfnet_last_error_message",
        "typedef struct SurfnetRun SurfnetRun",
        "SURFNET_STATUS_OK",
    ] {
        assert!(header.contains(symbol), "header missing `{symbol}`");
    }
}
