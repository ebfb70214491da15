use std::fs;
use std::path::Path;
use std::process::Command;

use cgqmc::instance_io::read_instance;
use cgqmc::output::{read_csv, SpectralRow};
use cgqmc::presets::{preset, Preset, Scale};
use cgqmc::ExperimentConfig;
use cgqmc_core::ising::generate_instance;
use cgqmc_core::ModelClass;

fn cgqmc(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cgqmc"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs");
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    (out.status.code().unwrap_or(-1), stderr)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_is_deterministic_and_parsable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let (code, err) = cgqmc(&["generate", "--n", "9", "--count", "3", "--seed", "11", "--out", path(d)]);
        assert_eq!(code, 0, "{err}");
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 3);
    for name in names {
        let x = fs::read(a.join(&name)).unwrap();
        let y = fs::read(b.join(&name)).unwrap();
        assert_eq!(x, y);
        let text = String::from_utf8(x).unwrap();
        let couplings = text
            .lines()
            .skip_while(|l| *l != "couplings")
            .skip(1)
            .filter(|l| !l.is_empty())
            .count();
        assert_eq!(couplings, 36);
        let inst = read_instance(&a.join(&name)).unwrap();
        let regenerated = generate_instance(9, ModelClass::FullyConnected, inst.seed()).unwrap();
        assert_eq!(inst, regenerated);
    }
}

const SWEEP: &str = r#"
kind = "spectral-sweep"
master_seed = 3

[instances]
n = [3]
count = 2

[[strategies]]
kind = "uniform"

[temperatures]
values = [1.0]
"#;

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");

    let (code, _) = cgqmc(&["spectral-sweep", "--out", path(dir.path())]);
    assert_eq!(code, 2, "missing --config");

    fs::write(&cfg, SWEEP.replace("n = [3]", "n = [11]")).unwrap();
    let (code, err) = cgqmc(&["spectral-sweep", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(code, 3, "{err}");

    let chain = SWEEP.replace("spectral-sweep", "chain-ensemble") + "\n[chain]\nsteps = 0\n";
    fs::write(&cfg, chain).unwrap();
    let (code, err) = cgqmc(&["chain-ensemble", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(code, 2);
    assert!(err.contains("at least one step"), "{err}");

    // A group larger than the instance fails its cell only.
    let partial = SWEEP.to_string() + "\n[[strategies]]\nkind = \"cg_naive_local_group\"\ngroup_size = 5\n";
    fs::write(&cfg, partial).unwrap();
    let out = dir.path().join("partial");
    let (code, err) = cgqmc(&["spectral-sweep", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(code, 4, "{err}");
    let rows: Vec<SpectralRow> = read_csv(&out.join("spectral.csv")).unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows.iter().filter(|r| !r.error.is_empty()).count(), 2);
    assert!(rows.iter().filter(|r| r.strategy == "uniform").all(|r| r.delta.is_some()));

    fs::write(&cfg, SWEEP).unwrap();
    let (code, _) = cgqmc(&["chain-ensemble", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(code, 2, "kind mismatch");
}

#[test]
fn sweep_then_refit_and_rerun_from_archive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, SWEEP.replace("n = [3]", "n = [3, 4, 5]")).unwrap();
    let first = dir.path().join("first");
    let (code, err) = cgqmc(&["spectral-sweep", "--config", path(&cfg), "--out", path(&first), "--seed", "8"]);
    assert_eq!(code, 0, "{err}");
    let archived = ExperimentConfig::load(&first.join("config.toml")).unwrap();
    assert_eq!(archived.master_seed, 8);

    let second = dir.path().join("second");
    let (code, err) = cgqmc(&[
        "spectral-sweep",
        "--config",
        path(&first.join("config.toml")),
        "--out",
        path(&second),
    ]);
    assert_eq!(code, 0, "{err}");
    for f in ["spectral.csv", "spectral_summary.csv", "fit.csv"] {
        assert_eq!(fs::read(first.join(f)).unwrap(), fs::read(second.join(f)).unwrap(), "{f}");
    }

    let refit = dir.path().join("refit");
    let (code, err) = cgqmc(&[
        "fit",
        "--input",
        path(&first.join("spectral_summary.csv")),
        "--out",
        path(&refit),
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(fs::read(first.join("fit.csv")).unwrap(), fs::read(refit.join("fit.csv")).unwrap());
}

#[test]
fn reproduce_writes_preset_config() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = cgqmc(&[
        "reproduce",
        "fig3",
        "--scale",
        "paper",
        "--config-only",
        "--emulator-mode",
        "trotter",
        "--trotter-slices",
        "50",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(code, 0, "{err}");
    let cfg = ExperimentConfig::load(&dir.path().join("config.toml")).unwrap();
    let mut expected = preset(Preset::Fig3, Scale::Paper);
    expected.emulator.mode = cgqmc::config::EmulatorModeName::Trotter;
    expected.emulator.trotter_slices = Some(50);
    assert_eq!(cfg, expected);

    let (code, _) = cgqmc(&["reproduce", "fig9", "--config-only", "--out", path(dir.path())]);
    assert_eq!(code, 2);
}
