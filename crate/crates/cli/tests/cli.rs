//! Runs the `photoconv` binary end to end on synthetic IDX data.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use photoconv_cli::output::decode_cmat;
use photoconv_core::trainer::{encode_idx_images, encode_idx_labels};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

const SMALL_RUN: &str = r#"
seed = 3

[data]
allow_nonstandard_size = true

[train]
epochs = 1

[noise]
sigmas = [0.0, 0.05]
kinds = ["phase"]
instances = 2

[retrain]
epochs = 1
"#;

fn photoconv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_photoconv"))
        .args(args)
        .env_remove("PHOTOCONV_DATA_DIR")
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(o: &Output, key: &str) -> String {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")).map(str::to_string))
        .unwrap_or_else(|| panic!("no `{key}` in output:\n{}", stdout(o)))
}

/// Writes a tiny MNIST-shaped data set: 64 training and 32 test images.
fn synthetic_mnist(dir: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for (prefix, count) in [("train", 64usize), ("t10k", 32)] {
        let labels: Vec<u8> = (0..count).map(|i| (i % 10) as u8).collect();
        let pixels: Vec<f64> = (0..count * 784)
            .map(|k| {
                let class = labels[k / 784] as usize;
                if (k % 784) / 78 == class { 1.0 } else { rng.random_range(0.0..0.3) }
            })
            .collect();
        fs::write(dir.join(format!("{prefix}-images-idx3-ubyte")), encode_idx_images(&pixels, count)).unwrap();
        fs::write(dir.join(format!("{prefix}-labels-idx1-ubyte")), encode_idx_labels(&labels)).unwrap();
    }
}

struct Workspace {
    tmp: TempDir,
    config: PathBuf,
    data: PathBuf,
}

impl Workspace {
    fn new() -> Self {
        let tmp = tempfile::tempdir().unwrap();
        let data = tmp.path().join("mnist");
        fs::create_dir(&data).unwrap();
        synthetic_mnist(&data);
        let config = tmp.path().join("run.toml");
        fs::write(&config, SMALL_RUN).unwrap();
        Self { tmp, config, data }
    }

    fn out(&self, name: &str) -> PathBuf {
        self.tmp.path().join(name)
    }

    fn run(&self, command: &[&str], out: &str) -> Output {
        let out = self.out(out);
        let mut args: Vec<&str> = command.to_vec();
        args.extend([
            "--config",
            self.config.to_str().unwrap(),
            "--data-dir",
            self.data.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        photoconv(&args)
    }
}

fn manifest(dir: &Path) -> String {
    fs::read_to_string(dir.join("manifest.txt")).unwrap()
}

#[test]
fn design_writes_matrix_manifest_and_resolved_config() {
    let ws = Workspace::new();
    let o = ws.run(&["design"], "design");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let f: f64 = value(&o, "F").parse().unwrap();
    assert!((f - 0.997).abs() <= 0.002);
    let dir = ws.out("design");
    let m = decode_cmat(fs::File::open(dir.join("coupling_matrix.cmat")).unwrap()).unwrap();
    assert_eq!(m.shape(), (21, 21));
    let listed = manifest(&dir);
    for name in ["config.resolved.toml", "coupling_matrix.cmat", "design.txt"] {
        assert!(listed.contains(name), "{listed}");
    }
    let resolved = fs::read_to_string(dir.join("config.resolved.toml")).unwrap();
    assert!(resolved.contains("seed = 3"));
}

#[test]
fn design_sweep_writes_tradeoff_table() {
    let ws = Workspace::new();
    let cfg = ws.tmp.path().join("sweep.toml");
    fs::write(&cfg, "[sweep]\nports = 16\ntheta_min_deg = 8.0\ntheta_max_deg = 12.0\nsteps = 3\n").unwrap();
    let out = ws.out("sweep");
    let o = photoconv(&["design", "--sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("tradeoff.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "theta_deg,R_m,R_norm_m,F,T");
    assert_eq!(lines.len(), 4);
}

#[test]
fn output_directory_is_never_reused() {
    let ws = Workspace::new();
    assert!(ws.run(&["footprint"], "fp").status.success());
    let before = manifest(&ws.out("fp"));
    let again = ws.run(&["footprint"], "fp");
    assert_eq!(again.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&again.stderr).contains("not empty"));
    assert_eq!(manifest(&ws.out("fp")), before);
}

#[test]
fn footprint_reports_mesh_and_star_sizes() {
    let ws = Workspace::new();
    let o = ws.run(&["footprint", "--ports", "256"], "fp256");
    assert!(o.status.success());
    assert_eq!(value(&o, "mzi_count"), "1024");
    assert_eq!(value(&o, "mzi_area_mm2"), "6.1440");
    let ratio: f64 = value(&o, "ratio").parse().unwrap();
    assert!((ratio / 34.0 - 1.0).abs() <= 0.1);
    let o = ws.run(&["footprint", "--ports", "100"], "fp100");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_errors_are_reported() {
    let ws = Workspace::new();
    let bad = ws.tmp.path().join("bad.toml");
    fs::write(&bad, "[train]\nepochs = 2\nbogus = 1\n").unwrap();
    let out = ws.out("bad");
    let o = photoconv(&["footprint", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
    assert!(!out.exists());

    let o = photoconv(&["train", "--preset", "pcnn-0-0", "--out", ws.out("p").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = photoconv(&["train", "--data-dir", ws.out("missing").to_str().unwrap(), "--out", ws.out("m").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing"));
}

#[test]
fn train_evaluate_noise_and_retrain_pipeline() {
    let ws = Workspace::new();
    let a = ws.run(&["train"], "train_a");
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = ws.run(&["train"], "train_b");
    assert!(b.status.success());
    // identical config and seed give byte-identical outputs
    assert_eq!(manifest(&ws.out("train_a")), manifest(&ws.out("train_b")));
    let c = ws.run(&["train", "--seed", "4"], "train_c");
    assert_ne!(manifest(&ws.out("train_a")), manifest(&ws.out("train_c")));
    let report = fs::read_to_string(ws.out("train_a").join("train_report.csv")).unwrap();
    assert!(report.starts_with("epoch,train_loss,train_acc,test_loss,test_acc\n"));
    assert_eq!(value(&c, "parameters"), "1224");

    let ckpt = ws.out("train_a").join("checkpoint.pcnn");
    let e = ws.run(&["evaluate", "--checkpoint", ckpt.to_str().unwrap()], "eval");
    assert!(e.status.success(), "{}", String::from_utf8_lossy(&e.stderr));
    assert_eq!(value(&e, "accuracy"), value(&a, "test_accuracy"));

    let n = ws.run(&["noise", "--checkpoint", ckpt.to_str().unwrap()], "noise");
    assert!(n.status.success(), "{}", String::from_utf8_lossy(&n.stderr));
    let table = fs::read_to_string(ws.out("noise").join("degradation.csv")).unwrap();
    let mut rows = table.lines();
    assert_eq!(rows.next(), Some("sigma,kind,mean_acc,std_acc,instances,seed"));
    let zero: Vec<&str> = rows.next().unwrap().split(',').collect();
    let clean: f64 = value(&a, "test_accuracy").parse().unwrap();
    assert_eq!(zero[2].parse::<f64>().unwrap(), clean);

    for scope in ["final", "full"] {
        let out = format!("retrain_{scope}");
        let r = ws.run(&["retrain", "--checkpoint", ckpt.to_str().unwrap(), "--scope", scope, "--sigma", "0.05"], &out);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
        assert_eq!(value(&r, "scope"), scope);
        let csv = fs::read_to_string(ws.out(&out).join("retrain_report.csv")).unwrap();
        assert!(csv.starts_with("scope,sigma,epoch,"));
    }
}

#[test]
fn gradcheck_passes_on_the_default_network() {
    let ws = Workspace::new();
    let o = ws.run(&["gradcheck"], "gc");
    assert!(o.status.success(), "{}\n{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    assert_eq!(value(&o, "passed"), "true");
    let err: f64 = value(&o, "max_relative_error").parse().unwrap();
    assert!(err < 1e-4);
}
