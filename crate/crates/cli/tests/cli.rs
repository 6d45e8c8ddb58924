use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn slicegen(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slicegen"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {text}"))
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn generate(cwd: &Path, out: &str, extra: &[&str]) -> Output {
    let mut args = vec!["generate", "--count", "300", "--methods", "wallpaper,fractal", "--out", out];
    args.extend_from_slice(extra);
    slicegen(&args, cwd)
}

#[test]
fn generate_writes_method_dirs_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = generate(tmp.path(), "ds", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("eMBB   60") && stdout.contains("URLLC  30") && stdout.contains("mIoT   210"), "{stdout}");

    let ds = tmp.path().join("ds");
    for m in ["wallpaper", "fractal"] {
        for f in ["kpis.csv", "images.npy", "labels.npy"] {
            assert!(ds.join(m).join(f).is_file(), "{m}/{f}");
        }
    }
    assert!(!ds.join("perlin").exists());
    let m = manifest(&ds);
    assert_eq!(m["sample_count"], 300);
    assert_eq!(m["methods"], serde_json::json!(["wallpaper", "fractal"]));
    for key in ["format_version", "master_seed", "class_mix", "image_side", "checksums", "config_digest"] {
        assert!(m.get(key).is_some(), "manifest lacks {key}");
    }
}

#[test]
fn repeated_generation_reports_identical_checksums() {
    let tmp = tempfile::tempdir().unwrap();
    let a = generate(tmp.path(), "a", &["--workers", "1"]);
    let b = generate(tmp.path(), "b", &["--workers", "3"]);
    assert!(a.status.success() && b.status.success());
    let checksums = |o: &Output| {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .skip_while(|l| !l.starts_with("checksums"))
            .map(str::to_string)
            .collect::<Vec<_>>()
    };
    assert_eq!(checksums(&a), checksums(&b));
    assert_eq!(manifest(&tmp.path().join("a"))["checksums"], manifest(&tmp.path().join("b"))["checksums"]);
}

#[test]
fn existing_directory_needs_force() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(generate(tmp.path(), "ds", &[]).status.success());
    let before = fs::read(tmp.path().join("ds/manifest.json")).unwrap();
    let again = generate(tmp.path(), "ds", &["--seed", "9"]);
    assert_eq!(again.status.code(), Some(1));
    assert_eq!(stderr_json(&again)["error"]["kind"], "usage");
    assert_eq!(fs::read(tmp.path().join("ds/manifest.json")).unwrap(), before);
    assert!(generate(tmp.path(), "ds", &["--seed", "9", "--force"]).status.success());
    assert_eq!(manifest(&tmp.path().join("ds"))["master_seed"], 9);
}

#[test]
fn seed_override_is_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(generate(tmp.path(), "ds", &["--seed", "424242"]).status.success());
    assert_eq!(manifest(&tmp.path().join("ds"))["master_seed"], 424242);
    let cfg = fs::read_to_string(tmp.path().join("ds/config.toml")).unwrap();
    assert!(cfg.contains("seed = 424242"));
}

#[test]
fn nonexistent_config_exits_1_with_field() {
    let tmp = tempfile::tempdir().unwrap();
    let out = generate(tmp.path(), "ds", &["--config", "nope.toml"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_json(&out);
    assert_eq!(err["error"]["kind"], "config");
    assert_eq!(err["error"]["field"], "--config");
}

#[test]
fn invalid_config_value_names_field() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.toml"), "[noise]\nbeta = 1.5\n").unwrap();
    let out = generate(tmp.path(), "ds", &["--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"]["field"], "noise.beta");
    assert!(!tmp.path().join("ds").exists());
}

#[test]
fn init_config_round_trips_through_generate() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(slicegen(&["init-config", "--out", "c.toml"], tmp.path()).status.success());
    assert_eq!(slicegen(&["init-config", "--out", "c.toml"], tmp.path()).status.code(), Some(1));
    let out = generate(tmp.path(), "ds", &["--config", "c.toml"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let defaults = tempfile::tempdir().unwrap();
    assert!(generate(defaults.path(), "ds", &[]).status.success());
    assert_eq!(
        manifest(&tmp.path().join("ds"))["config_digest"],
        manifest(&defaults.path().join("ds"))["config_digest"]
    );
}

#[test]
fn preview_emits_png() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(generate(tmp.path(), "ds", &[]).status.success());
    let out = slicegen(&["preview", "ds", "--methods", "fractal", "--grid", "3x6", "--out", "pv"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = String::from_utf8_lossy(&out.stdout).trim().to_string();
    let name = Path::new(&path).file_name().unwrap().to_str().unwrap().to_string();
    assert!(name.starts_with("fractal_3x6_embb") && name.ends_with(".png"), "{name}");
    let bytes = fs::read(tmp.path().join(&path)).unwrap();
    assert_eq!(&bytes[..8], b"\x89PNG\r\n\x1a\n");
    // IHDR width and height.
    assert_eq!(u32::from_be_bytes(bytes[16..20].try_into().unwrap()), 6 * 16 * 8);
    assert_eq!(u32::from_be_bytes(bytes[20..24].try_into().unwrap()), 3 * 16 * 8);
}

#[test]
fn preview_on_corrupted_array_exits_3_naming_file() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(generate(tmp.path(), "ds", &[]).status.success());
    let npy = tmp.path().join("ds/fractal/images.npy");
    let mut bytes = fs::read(&npy).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] = bytes[mid].wrapping_add(1);
    fs::write(&npy, bytes).unwrap();
    let out = slicegen(&["preview", "ds", "--out", "pv"], tmp.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"]["file"], "fractal/images.npy");
}

#[test]
fn preview_grid_larger_than_dataset_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(generate(tmp.path(), "ds", &[]).status.success());
    let out = slicegen(&["preview", "ds", "--grid", "20x20", "--out", "pv"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"]["kind"], "usage");
}

#[test]
fn evaluate_reports_both_blocks_and_improvement() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(generate(tmp.path(), "ds", &[]).status.success());
    let out = slicegen(&["evaluate", "ds", "--methods", "raw,wallpaper"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    for needle in ["Features: raw", "Features: wallpaper", "k-NN", "Naive Bayes", "Logistic Reg.", "Improvement"] {
        assert!(text.contains(needle), "missing {needle}:\n{text}");
    }
}

#[test]
fn evaluate_json_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(generate(tmp.path(), "ds", &[]).status.success());
    let args = ["evaluate", "ds", "--methods", "raw,fractal", "--split-seed", "11", "--format", "json"];
    let a = slicegen(&args, tmp.path());
    let b = slicegen(&args, tmp.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let report: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["split"]["seed"], 11);
    assert_eq!(report["blocks"].as_array().unwrap().len(), 2);
    assert_eq!(report["blocks"][0]["results"][0]["classifier"], "k-NN");
    assert!(report["improvement"]["accuracy"]["percent"].is_number());
}

#[test]
fn unknown_method_lists_valid_ones() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(generate(tmp.path(), "ds", &[]).status.success());
    let out = slicegen(&["evaluate", "ds", "--methods", "raw,mosaic"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr_json(&out)["error"]["message"].as_str().unwrap().to_string();
    assert!(msg.contains("physical, perlin, wallpaper, fractal"), "{msg}");

    let out = generate(tmp.path(), "other", &["--methods", "mosaic"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_dataset_is_integrity_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let out = slicegen(&["evaluate", "nothing-here"], tmp.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"]["file"], "manifest.json");
}

#[test]
fn bad_arguments_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = slicegen(&["generate", "--count", "many", "--out", "x"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"]["kind"], "usage");
    assert!(slicegen(&["--help"], tmp.path()).status.success());
}

#[test]
fn unwritable_output_is_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("file"), "x").unwrap();
    let out = generate(tmp.path(), "file/ds", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["kind"], "io");
}
