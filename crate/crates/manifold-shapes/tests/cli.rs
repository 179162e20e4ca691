//! End-to-end checks of the `mshape` binary: a sample→render→embed→shape-dist
//! round trip, the config-driven runner, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_mshape");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn assert_code(out: &Output, want: i32) {
    let got = out.status.code().unwrap();
    assert_eq!(
        got,
        want,
        "exit {got}, wanted {want}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sample_render_embed_shape_dist_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    assert_code(
        &run(&["sample", "--topology", "so2", "--n", "24", "--out", path_str(&grid)]),
        0,
    );

    let mut latents = Vec::new();
    for sides in ["4", "6"] {
        let imgs = dir.path().join(format!("imgs{sides}"));
        let dists = dir.path().join(format!("d{sides}.csv"));
        assert_code(
            &run(&[
                "render",
                "--grid",
                path_str(&grid),
                "--object",
                &format!("prism:{sides}"),
                "--image-size",
                "32",
                "--out-dir",
                path_str(&imgs),
                "--distances",
                path_str(&dists),
            ]),
            0,
        );
        assert!(imgs.join("00000.pgm").exists());
        assert!(imgs.join("set.json").exists());
        let pgm = std::fs::read(imgs.join("00000.pgm")).unwrap();
        assert!(pgm.starts_with(b"P5"));

        let latent = dir.path().join(format!("z{sides}.csv"));
        assert_code(
            &run(&[
                "embed", "--method", "mds", "--dim", "3", "--seed", "0", "--in",
                path_str(&dists), "--out", path_str(&latent),
            ]),
            0,
        );
        let rows = std::fs::read_to_string(&latent).unwrap().lines().count();
        assert_eq!(rows, 24);
        let sidecar = std::fs::read_to_string(latent.with_extension("csv.json")).unwrap();
        assert!(sidecar.contains("\"method\": \"mds\""));
        latents.push(latent);
    }

    let result = dir.path().join("sd.json");
    assert_code(
        &run(&[
            "shape-dist",
            "--a",
            path_str(&latents[0]),
            "--b",
            path_str(&latents[1]),
            "--grid",
            path_str(&grid),
            "--out",
            path_str(&result),
        ]),
        0,
    );
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&result).unwrap()).unwrap();
    let d = json["distance"].as_f64().unwrap();
    assert!(d > 0.0 && d < 2.0_f64.sqrt() + 1e-9, "distance {d}");
}

#[test]
fn run_subcommand_drives_a_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp");
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{
                "kind": "simulation",
                "grid": {{ "n": 60 }},
                "embedding": {{ "method": "mds", "dim": 4, "seed": 0 }},
                "simulation": {{ "manifold": "double_saddle", "lift_dim": 32, "lift_seed": 1 }},
                "out_dir": {:?}
            }}"#,
            out
        ),
    )
    .unwrap();
    assert_code(&run(&["run", "--config", path_str(&cfg)]), 0);
    for artifact in ["grid.json", "truth.csv", "latent.csv", "table.csv", "manifest.json"] {
        assert!(out.join(artifact).exists(), "missing {artifact}");
    }
    assert!(!out.join("FAILED").exists());
}

#[test]
fn validation_errors_exit_1() {
    // unknown flag
    assert_code(&run(&["sample", "--topology", "so2", "--bogus"]), 1);
    // unknown topology
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    assert_code(&run(&["sample", "--topology", "moebius", "--out", path_str(&g)]), 1);
    // asymmetric distance matrix rejected by embed
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "0,1\n2,0\n").unwrap();
    let z = dir.path().join("z.csv");
    let out = run(&["embed", "--dim", "2", "--in", path_str(&bad), "--out", path_str(&z)]);
    assert_code(&out, 1);
}

#[test]
fn stage_failures_exit_2_and_leave_a_marker() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp");
    let cfg = dir.path().join("cfg.json");
    // the render stage fails: the mesh file does not exist
    std::fs::write(
        &cfg,
        format!(
            r#"{{
                "kind": "so2",
                "objects": [{{ "type": "mesh", "path": "/nonexistent/missing.obj" }}],
                "grid": {{ "n": 12 }},
                "out_dir": {:?}
            }}"#,
            out
        ),
    )
    .unwrap();
    let o = run(&["run", "--config", path_str(&cfg)]);
    assert_code(&o, 2);
    assert!(out.join("FAILED").exists());
}

#[test]
fn help_and_version_exit_0() {
    assert_code(&run(&["--help"]), 0);
    assert_code(&run(&["--version"]), 0);
    assert_code(&run(&["embed", "--help"]), 0);
}
