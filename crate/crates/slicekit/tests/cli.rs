//! End-to-end tests against the compiled binary.

use slicekit::mesh_io::write_binary_stl;
use slicekit::shapes::cuboid;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_slicekit"))
}

fn write_cube(dir: &Path, dims: (f64, f64, f64)) -> std::path::PathBuf {
    let path = dir.join("part.stl");
    let mesh = cuboid(dims.0, dims.1, dims.2);
    std::fs::write(&path, write_binary_stl(&mesh)).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn info_reports_dimensions_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let stl = write_cube(dir.path(), (10.0, 20.0, 5.0));
    let out = bin().arg("info").arg(&stl).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("10.00 x 20.00 x 5.00"), "{text}");
    assert!(text.contains("watertight:           true"), "{text}");
    assert!(text.contains("fits"), "{text}");
}

#[test]
fn info_oversized_part_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let stl = write_cube(dir.path(), (200.0, 10.0, 10.0));
    let out = bin().arg("info").arg(&stl).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("does not fit"));
}

#[test]
fn missing_file_exits_1() {
    let out = bin()
        .args(["info", "/nonexistent/part.stl"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn garbage_stl_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let stl = dir.path().join("junk.stl");
    std::fs::write(&stl, b"not an stl at all").unwrap();
    let out = bin().arg("info").arg(&stl).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn slice_writes_gcode_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let stl = write_cube(dir.path(), (10.0, 10.0, 4.0));
    let gcode = dir.path().join("out.gcode");
    let out = bin()
        .arg("slice")
        .arg(&stl)
        .arg("--output")
        .arg(&gcode)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.contains("Material Usage (gm):"), "{text}");
    assert!(text.contains("Built Time (min):"), "{text}");
    let program = std::fs::read_to_string(&gcode).unwrap();
    assert!(program.starts_with("; slicekit\n"));
    assert!(program.contains("G28\n"));
    assert!(program.trim_end().ends_with("M84"));
}

#[test]
fn slice_cube_matches_golden_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let stl = write_cube(dir.path(), (10.0, 10.0, 10.0));
    let gcode = dir.path().join("cube.gcode");
    let out = bin()
        .arg("slice")
        .arg(&stl)
        .arg("--output")
        .arg(&gcode)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let produced = std::fs::read_to_string(&gcode).unwrap();
    let golden = include_str!("fixtures/cube.gcode");
    assert_eq!(produced, golden);
}

#[test]
fn slice_density_flag_scales_mass() {
    let dir = tempfile::tempdir().unwrap();
    let stl = write_cube(dir.path(), (8.0, 8.0, 2.0));
    let mass_at = |density: Option<&str>| {
        let mut cmd = bin();
        cmd.arg("slice")
            .arg(&stl)
            .arg("--output")
            .arg(dir.path().join("out.gcode"))
            .arg("--json");
        if let Some(d) = density {
            cmd.args(["--density", d]);
        }
        let out = cmd.output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        v["mass_grams"].as_f64().unwrap()
    };
    let pla = mass_at(None);
    let doubled = mass_at(Some("2.48"));
    assert!((doubled - 2.0 * pla).abs() / pla < 1e-9);

    let out = bin()
        .arg("slice")
        .arg(&stl)
        .args(["--density", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn slice_json_estimate_parses() {
    let dir = tempfile::tempdir().unwrap();
    let stl = write_cube(dir.path(), (8.0, 8.0, 2.0));
    let gcode = dir.path().join("out.gcode");
    let out = bin()
        .arg("slice")
        .arg(&stl)
        .arg("--output")
        .arg(&gcode)
        .arg("--json")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["mass_grams"].as_f64().unwrap() > 0.0);
    assert!(v["motion_seconds"].as_f64().unwrap() > 0.0);
}

#[test]
fn slice_with_invalid_profile_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let stl = write_cube(dir.path(), (10.0, 10.0, 4.0));
    let profile = dir.path().join("bad.profile");
    std::fs::write(&profile, "[process]\nlayer_height = 0.3\n").unwrap();
    let out = bin()
        .arg("slice")
        .arg(&stl)
        .arg("--profile")
        .arg(&profile)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn profile_with_unknown_key_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let stl = write_cube(dir.path(), (10.0, 10.0, 4.0));
    let profile = dir.path().join("typo.profile");
    std::fs::write(&profile, "[process]\nlayer_hieght = 0.1\n").unwrap();
    let out = bin()
        .arg("slice")
        .arg(&stl)
        .arg("--profile")
        .arg(&profile)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("layer_hieght"));
}

#[test]
fn profile_resolved_from_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let stl = write_cube(dir.path(), (10.0, 10.0, 4.0));
    let profile_dir = dir.path().join("profiles");
    std::fs::create_dir(&profile_dir).unwrap();
    std::fs::write(
        profile_dir.join("fine.profile"),
        "[process]\nlayer_height = 0.1\n",
    )
    .unwrap();
    let out = bin()
        .arg("slice")
        .arg(&stl)
        .arg("--output")
        .arg(dir.path().join("out.gcode"))
        .args(["--profile", "fine.profile"])
        .env("SLICEKIT_PROFILE_DIR", &profile_dir)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn lint_clean_file_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let stl = write_cube(dir.path(), (10.0, 10.0, 4.0));
    let gcode = dir.path().join("out.gcode");
    let slice = bin()
        .arg("slice")
        .arg(&stl)
        .arg("--output")
        .arg(&gcode)
        .output()
        .unwrap();
    assert_eq!(slice.status.code(), Some(0));
    let out = bin().arg("lint").arg(&gcode).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("0 error(s)"));
}

#[test]
fn lint_bad_file_exits_2_and_reports_rules() {
    let dir = tempfile::tempdir().unwrap();
    let gcode = dir.path().join("bad.gcode");
    std::fs::write(
        &gcode,
        "M104 S230\nM109 S200\nG92 E0\nG1 X200 Y10 E1 F6000\n",
    )
    .unwrap();
    let out = bin().arg("lint").arg(&gcode).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    assert!(text.contains("error R2 line 1:"), "{text}");
    assert!(text.contains("error R1 line 4:"), "{text}");
}

#[test]
fn lint_json_output_parses() {
    let dir = tempfile::tempdir().unwrap();
    let gcode = dir.path().join("bad.gcode");
    std::fs::write(&gcode, "M104 S230\n").unwrap();
    let out = bin()
        .arg("lint")
        .arg(&gcode)
        .arg("--json")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v[0]["rule_id"], "R2");
    assert_eq!(v[0]["severity"], "Error");
}

#[test]
fn preview_writes_requested_layer_range() {
    let dir = tempfile::tempdir().unwrap();
    let stl = write_cube(dir.path(), (10.0, 10.0, 4.0));
    let svg_dir = dir.path().join("svg");
    let out = bin()
        .arg("preview")
        .arg(&stl)
        .arg("--output")
        .arg(&svg_dir)
        .args(["--layers", "2..5"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut names: Vec<_> = std::fs::read_dir(&svg_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        vec![
            "layer_0002.svg",
            "layer_0003.svg",
            "layer_0004.svg",
            "layer_0005.svg"
        ]
    );
}

#[test]
fn preview_range_out_of_bounds_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let stl = write_cube(dir.path(), (10.0, 10.0, 4.0));
    let out = bin()
        .arg("preview")
        .arg(&stl)
        .arg("--output")
        .arg(dir.path().join("svg"))
        .args(["--layers", "0..999"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn breakeven_table_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("costs.csv");
    let svg = dir.path().join("costs.svg");
    let out = bin()
        .args([
            "breakeven",
            "--setup",
            "1000",
            "--unit-traditional",
            "5",
            "--unit-print",
            "10",
            "--max-units",
            "300",
        ])
        .arg("--csv")
        .arg(&csv)
        .arg("--output")
        .arg(&svg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("break-even at 200 unit(s)"));
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with("units,printing_cost,traditional_cost\n"));
    assert_eq!(csv_text.lines().count(), 301);
    assert!(std::fs::read_to_string(&svg)
        .unwrap()
        .contains("break-even n=200"));
}

#[test]
fn breakeven_negative_cost_exits_1() {
    let out = bin()
        .args([
            "breakeven",
            "--setup=-5",
            "--unit-traditional",
            "5",
            "--unit-print",
            "10",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
