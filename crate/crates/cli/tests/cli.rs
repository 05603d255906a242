use std::path::Path;
use std::process::{Command, Output};

use stewart_cli::config::SimConfig;
use stewart_cli::csv_log::{self, COLUMNS};

fn stewart(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stewart"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn read_log(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    csv_log::read_csv(std::fs::File::open(path).unwrap()).unwrap()
}

#[test]
fn step_run_writes_full_log() {
    let dir = tempfile::tempdir().unwrap();
    let out = stewart(&["run", "--scenario", "step", "--out", "step.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_log(&dir.path().join("step.csv"));
    assert_eq!(header.len(), COLUMNS);
    assert_eq!(rows.len(), 6001);
    assert!(rows.iter().all(|r| r.len() == COLUMNS));
    assert_eq!(rows[0][0], 0.0);
    assert!((rows[6000][0] - 60.0).abs() < 1e-9);
}

#[test]
fn sinusoid_log_goes_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = stewart(&["run", "--scenario", "sinusoid"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_log::read_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(header[0], "t");
    assert_eq!(rows.len(), 2001);
    assert!(String::from_utf8_lossy(&out.stderr).contains("final_e_l"));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = stewart(&["run", "--config", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));

    std::fs::write(dir.path().join("bad.json"), r#"{"run":{"dt":-1}}"#).unwrap();
    let out = stewart(&["run", "--config", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("run.dt"));

    std::fs::write(dir.path().join("typo.json"), r#"{"mass":{"platform_mas":1}}"#).unwrap();
    let out = stewart(&["run", "--config", "typo.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("platform_mas"));

    let out = stewart(&["run", "--scenario", "circle"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn divergence_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("stiff.json"),
        r#"{"controller":{"state_weights":[1e12,1e12,1e12,1e12,1e12,1e12,0,0,0,0,0,0],"input_weights":[1,1,1,1,1,1]}}"#,
    )
    .unwrap();
    let out = stewart(
        &["run", "--config", "stiff.json", "--duration", "2", "--out", "x.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("simulation failed"));
}

#[test]
fn dump_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = stewart(&["dump-config"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(SimConfig::from_json(&text).unwrap(), SimConfig::default());
    assert_eq!(text, SimConfig::from_json("{}").unwrap().dump());

    std::fs::write(
        dir.path().join("c.json"),
        r#"{"noise":{"seed":5},"mass":{"top_mass":0.03}}"#,
    )
    .unwrap();
    let out = stewart(&["dump-config", "--config", "c.json"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    let c = SimConfig::from_json(&text).unwrap();
    assert_eq!(c.noise.seed, 5);
    assert_eq!(c.mass.top_mass, 0.03);
    assert_eq!(c.dump(), text);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.json"),
        r#"{"run":{"scenario":"sinusoid","duration":1.0}}"#,
    )
    .unwrap();
    let out = stewart(
        &["run", "--config", "c.json", "--duration", "0.5", "--out", "o.csv"],
        dir.path(),
    );
    assert!(out.status.success());
    let (header, rows) = read_log(&dir.path().join("o.csv"));
    assert_eq!(rows.len(), 51);
    let pitch = header.iter().position(|h| h == "theta_des").unwrap();
    assert!((rows[0][pitch] - 0.1).abs() < 1e-12);
}

#[test]
fn seeds_and_flags_change_output() {
    let dir = tempfile::tempdir().unwrap();
    for (name, seed) in [("a.csv", "1"), ("b.csv", "2")] {
        let out = stewart(&["run", "--duration", "1", "--seed", seed, "--out", name], dir.path());
        assert!(out.status.success());
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_ne!(a, b);

    let out = stewart(
        &["run", "--duration", "1", "--perfect-state", "--out", "p.csv"],
        dir.path(),
    );
    assert!(out.status.success());
}

#[test]
fn seed_sweep_writes_one_log_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = stewart(
        &[
            "run",
            "--duration",
            "1",
            "--seeds",
            "3..=5",
            "--out",
            "sweep.csv",
            "--plots",
            "plots",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for seed in 3..=5 {
        let (_, rows) = read_log(&dir.path().join(format!("sweep_seed{seed}.csv")));
        assert_eq!(rows.len(), 101);
        assert!(dir.path().join(format!("plots/seed{seed}/errors.svg")).exists());
    }
    let single = stewart(
        &["run", "--duration", "1", "--seed", "4", "--out", "single.csv"],
        dir.path(),
    );
    assert!(single.status.success());
    assert_eq!(
        std::fs::read(dir.path().join("single.csv")).unwrap(),
        std::fs::read(dir.path().join("sweep_seed4.csv")).unwrap()
    );

    let summary = stewart(&["run", "--duration", "1", "--seeds", "0..2"], dir.path());
    let text = String::from_utf8(summary.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("seed,"));

    let out = stewart(&["run", "--seeds", "4..4"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn plots_are_consistent_with_log() {
    let dir = tempfile::tempdir().unwrap();
    let out = stewart(&["run", "--out", "run.csv", "--plots", "figs"], dir.path());
    assert!(out.status.success());
    let (header, rows) = read_log(&dir.path().join("run.csv"));
    let e_l_col = header.iter().position(|h| h == "e_l").unwrap();
    let final_e_l = rows.last().unwrap()[e_l_col];

    for name in ["positions.svg", "forces.svg", "errors.svg"] {
        let text = std::fs::read_to_string(dir.path().join("figs").join(name)).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        assert!(text.contains("t [s]"));
    }

    let text = std::fs::read_to_string(dir.path().join("figs/positions.svg")).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    let polylines = doc.descendants().filter(|n| n.has_tag_name("polyline")).count();
    assert_eq!(polylines, 18);
    assert!(text.contains("x [m]") && text.contains("ψ [rad]"));

    let forces = std::fs::read_to_string(dir.path().join("figs/forces.svg")).unwrap();
    assert!(forces.contains("F [N]"));

    let text = std::fs::read_to_string(dir.path().join("figs/errors.svg")).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    let line = doc
        .descendants()
        .find(|n| n.has_tag_name("polyline") && n.attribute("data-label") == Some("e_l"))
        .unwrap();
    let last: f64 = line.attribute("data-last").unwrap().parse().unwrap();
    assert_eq!(last, final_e_l);

    let panel = line.parent().unwrap();
    let attr = |k: &str| -> f64 { panel.attribute(k).unwrap().parse().unwrap() };
    let (ymin, ymax, top, bottom) = (
        attr("data-ymin"),
        attr("data-ymax"),
        attr("data-top"),
        attr("data-bottom"),
    );
    let last_point = line.attribute("points").unwrap().split_whitespace().last().unwrap();
    let (px, py) = last_point.split_once(',').unwrap();
    let py: f64 = py.parse().unwrap();
    let value = ymin + (bottom - py) / (bottom - top) * (ymax - ymin);
    let pixel = (ymax - ymin) / (bottom - top);
    assert!((value - final_e_l).abs() <= pixel * 1e-2, "{value} vs {final_e_l}");
    assert_eq!(px.parse::<f64>().unwrap(), attr("data-right"));
}
