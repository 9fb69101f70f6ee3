use std::fs;
use std::path::Path;

use pantomorph::io::read_stmap;
use pantomorph::mapgen::apply_stmap;
use pantomorph::profile::{lookup_preset, LensProfile};
use pantomorph::raster::{grid_chart, RgbRaster};
use pantomorph::remap::axis_cube_panorama;
use pantomorph_cli::{bind_address, cli_main_with};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("pantomorph").chain(args.iter().copied());
    let code = cli_main_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn aov_prints_the_flying_angle() {
    let (code, out, _) = run(&["aov", "--k", "-0.5,0", "--focal", "1", "--ref-axis", "h"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("Ω_h=120.0°"));
    assert!(out.contains("Ω_v=") && out.contains("Ω_d="));
}

#[test]
fn aov_accepts_presets_and_sizes() {
    let (code, out, _) = run(&["aov", "--preset", "stereopsis", "--size", "1000x1000"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("Ω_h=181.9°"), "{out}");
    assert!(out.contains("Ω_d=outside the projection field"), "{out}");
}

#[test]
fn fov_and_focal_conflict() {
    let (code, _, err) = run(&["aov", "--k", "1,1", "--fov", "90", "--focal", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains("mutually exclusive"), "{err}");
}

#[test]
fn validation_and_io_errors_have_distinct_codes() {
    assert_eq!(run(&["aov", "--k", "2,0", "--focal", "1"]).0, 1);
    assert_eq!(run(&["aov", "--k", "1,1", "--fov", "200"]).0, 1);
    assert_eq!(run(&["aov", "--k", "a,b", "--focal", "1"]).0, 1);
    assert_eq!(run(&["aov", "--k", "1,1"]).0, 1);
    assert_eq!(run(&["stmap", "--k", "1,1", "--fov", "90", "--size", "0x4", "--out", "x.exr"]).0, 1);
    assert_eq!(run(&["nonsense"]).0, 1);
    assert_eq!(run(&["aov", "--profile", "/definitely/missing.json"]).0, 2);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("stmap"));
}

#[test]
fn preset_list_and_show() {
    let (code, out, _) = run(&["preset", "list"]);
    assert_eq!(code, 0);
    let names: Vec<_> = out.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(names, ["racing", "flying", "stereopsis", "first-person"]);

    let (code, out, _) = run(&["preset", "show", "racing"]);
    assert_eq!(code, 0);
    assert_eq!(LensProfile::from_json(&out).unwrap(), lookup_preset("racing").unwrap());
    assert_eq!(run(&["preset", "show", "macro"]).0, 1);
}

#[test]
fn exported_profiles_validate_and_drive_commands() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lens.json");
    let (_, json, _) = run(&["preset", "show", "first-person"]);
    fs::write(&path, &json).unwrap();
    let (code, out, _) = run(&["validate", path_str(&path)]);
    assert_eq!(code, 0, "{out}");

    let (code, out, _) = run(&["aov", "--profile", path_str(&path)]);
    assert_eq!(code, 0);
    assert!(out.starts_with("Ω_h=139.7°"), "{out}");

    fs::write(&path, json.replace("\"vignette\"", "\"vignete\"")).unwrap();
    let (code, _, err) = run(&["validate", path_str(&path)]);
    assert_eq!(code, 1);
    assert!(err.contains("vignete"), "{err}");
}

#[test]
fn rectilinear_stmap_reproduces_a_grid() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("identity.exr");
    let args = ["stmap", "--k", "1,1", "--fov", "90", "--size", "64x64", "--out", path_str(&map)];
    assert_eq!(run(&args).0, 0);
    let st = read_stmap(&map).unwrap();
    let chart = grid_chart(64, 64, 8);
    assert!(apply_stmap(&chart, &st).max_abs_diff(&chart).unwrap() < 1e-4);

    // The same through `remap --stmap` on an 8-bit grid image.
    let grid = dir.path().join("grid.png");
    chart.to_rgb8().save(&grid).unwrap();
    let out = dir.path().join("out.png");
    let args = ["remap", "--stmap", path_str(&map), "--input", path_str(&grid), "--out", path_str(&out)];
    assert_eq!(run(&args).0, 0);
    assert_eq!(image::open(&out).unwrap().to_rgb8(), image::open(&grid).unwrap().to_rgb8());
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let pano = dir.path().join("pano.png");
    axis_cube_panorama(128, 4).image().to_rgb8().save(&pano).unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let render = dir.path().join(format!("render{i}.png"));
        let rays = dir.path().join(format!("rays{i}.pfm"));
        let args = [
            "remap", "--preset", "racing", "--vignette", "--dispersion", "0.5", "--samples", "8", "--input",
            path_str(&pano), "--size", "64x36", "--out", path_str(&render),
        ];
        assert_eq!(run(&args).0, 0);
        assert_eq!(run(&["raymap", "--preset", "flying", "--size", "32x18", "--out", path_str(&rays)]).0, 0);
        outputs.push((fs::read(&render).unwrap(), fs::read(&rays).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let rendered = image::open(dir.path().join("render0.png")).unwrap();
    assert_eq!((rendered.width(), rendered.height()), (64, 36));
}

#[test]
fn odd_sample_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let pano = dir.path().join("pano.png");
    RgbRaster::filled(64, 32, [0.5; 3]).to_rgb8().save(&pano).unwrap();
    let out = dir.path().join("out.png");
    let args = [
        "remap", "--preset", "flying", "--samples", "7", "--input", path_str(&pano), "--size", "8x8", "--out",
        path_str(&out),
    ];
    let (code, _, err) = run(&args);
    assert_eq!(code, 1);
    assert!(err.contains("even"), "{err}");
    assert!(!out.exists());
}

#[test]
fn bind_address_from_environment_and_port() {
    assert_eq!(bind_address(None, None).unwrap().to_string(), "127.0.0.1:8080");
    assert_eq!(bind_address(Some("0.0.0.0:9000"), None).unwrap().to_string(), "0.0.0.0:9000");
    assert_eq!(bind_address(Some("0.0.0.0:9000"), Some(7000)).unwrap().to_string(), "0.0.0.0:7000");
    assert!(bind_address(Some("localhost"), None).is_err());
}
