//! End-to-end checks of the `daysift` binary: the synth -> run -> report
//! pipeline, output shapes, and the exit-code contract (0 ok, 1 runtime
//! failure, 2 configuration or usage error).

use std::path::Path;
use std::process::{Command, Output};

fn daysift(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_daysift"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn assert_exit(out: &Output, code: i32, what: &str) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "{what}: expected exit {code}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

const SYNTH_TOML: &str = r#"
seed = 11
n_globals = 16
images_min = 8
images_max = 12
support_size = 4
routine_jitter = 0.2
novelty = 0.8

[[users]]
id = "a"
days = 10
outliers = 3

[[users]]
id = "b"
days = 8
outliers = 2
"#;

#[test]
fn synth_run_report_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("synth.toml"), SYNTH_TOML).unwrap();

    let out = daysift(
        &["synth", "--config", "synth.toml", "--out", "corpus"],
        dir,
    );
    assert_exit(&out, 0, "synth");
    assert!(dir.join("corpus").is_dir());

    std::fs::write(
        dir.join("run.toml"),
        "corpus = \"corpus\"\nseed = 3\nmethods = [\"isolation-forest\", \"dbscan\"]\nout = \"out\"\n",
    )
    .unwrap();
    let out = daysift(&["run", "--config", "run.toml"], dir);
    assert_exit(&out, 0, "run");

    // stdout mirrors results.csv: a header plus one row per cell
    // (2 methods x 3 feature modes since the corpus has globals).
    let stdout = String::from_utf8(out.stdout).unwrap();
    let csv = std::fs::read_to_string(dir.join("out/results.csv")).unwrap();
    assert_eq!(stdout, csv);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 3, "unexpected row count:\n{csv}");
    assert_eq!(
        lines[0],
        "method,features,accuracy,weighted_f,weighted_p,weighted_r,macro_f,macro_p,macro_r"
    );

    let manifest = dir.join("out/manifest.json");
    assert!(manifest.is_file());
    let plot_names = |dir: &Path| -> Vec<String> {
        let mut v: Vec<String> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        v.sort();
        v
    };
    let plots_before = plot_names(&dir.join("out/plots"));
    assert!(!plots_before.is_empty());

    // report re-renders everything below the manifest from the manifest
    // alone: wipe the rendered artifacts and check they come back identical.
    std::fs::remove_file(dir.join("out/results.csv")).unwrap();
    std::fs::remove_dir_all(dir.join("out/plots")).unwrap();
    let out = daysift(&["report", "--in", "out"], dir);
    assert_exit(&out, 0, "report");
    assert_eq!(String::from_utf8(out.stdout).unwrap(), csv);
    assert_eq!(
        std::fs::read_to_string(dir.join("out/results.csv")).unwrap(),
        csv
    );
    assert_eq!(plot_names(&dir.join("out/plots")), plots_before);
}

#[test]
fn config_and_usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    // Unknown config key.
    std::fs::write(dir.join("bad.toml"), "corpus = \"c\"\nbogus = 1\n").unwrap();
    let out = daysift(&["run", "--config", "bad.toml"], dir);
    assert_exit(&out, 2, "unknown config key");
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("bogus"),
        "error should name the offending key"
    );

    // Missing config file.
    let out = daysift(&["run", "--config", "nope.toml"], dir);
    assert_exit(&out, 2, "missing config");

    // Both data sources at once.
    std::fs::write(
        dir.join("two.toml"),
        "corpus = \"c\"\n[synth]\nseed = 1\n",
    )
    .unwrap();
    let out = daysift(&["run", "--config", "two.toml"], dir);
    assert_exit(&out, 2, "two data sources");

    // Out-of-range option via flag override.
    std::fs::write(dir.join("synth.toml"), SYNTH_TOML).unwrap();
    std::fs::write(dir.join("ok.toml"), "[synth]\nseed = 1\n").unwrap();
    let out = daysift(
        &["run", "--config", "ok.toml", "--contamination", "0.9"],
        dir,
    );
    assert_exit(&out, 2, "contamination out of range");

    // clap usage errors.
    let out = daysift(&["frobnicate"], dir);
    assert_exit(&out, 2, "unknown subcommand");
    let out = daysift(&["run"], dir);
    assert_exit(&out, 2, "missing required flag");
}

#[test]
fn runtime_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    // Config is fine, but the corpus directory does not exist.
    std::fs::write(dir.join("run.toml"), "corpus = \"missing\"\n").unwrap();
    let out = daysift(&["run", "--config", "run.toml"], dir);
    assert_exit(&out, 1, "missing corpus");

    // Report over a directory with no manifest.
    std::fs::create_dir(dir.join("empty")).unwrap();
    let out = daysift(&["report", "--in", "empty"], dir);
    assert_exit(&out, 1, "missing manifest");
}
