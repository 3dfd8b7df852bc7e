use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use photoconv_core::autograd::{check_gradients, read_checkpoint, write_checkpoint, ParamRole};
use photoconv_core::config::ExperimentConfig;
use photoconv_core::layers::{Layer, Network};
use photoconv_core::noise::{
    bias_noise_sweep, degradation_sweep, fidelity_accuracy_sweep, inject, retrain, write_bias_noise_csv,
    write_degradation_csv, write_fidelity_accuracy_csv, NoiseSpec, RetrainScope,
};
use photoconv_core::optics::{
    coupling_matrix, fidelity, footprint_compare, ideal_truncated_dft, normalized_radius, overlap_fidelity, transmission,
    tradeoff_sweep, write_tradeoff_csv, StarCouplerGeometry,
};
use photoconv_core::trainer::{
    build_network, calibrate_output_scale, evaluate, load_split, train, write_report_csv, Dataset, OpticsMode, Split, TrainSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::output::{encode_cmat, full, summary, RunDir};

pub const DEFAULT_DATA_DIR: &str = "data/mnist";
pub const DATA_DIR_ENV: &str = "PHOTOCONV_DATA_DIR";

/// Result of one subcommand: the lines it reports and the files it wrote.
#[derive(Debug)]
pub struct Outcome {
    pub lines: Vec<String>,
    /// False when the command ran but its check failed.
    pub passed: bool,
}

impl Outcome {
    fn from_pairs(pairs: &[(&str, String)]) -> Self {
        Self {
            lines: pairs.iter().map(|(k, v)| format!("{k} = {v}")).collect(),
            passed: true,
        }
    }
}

/// Resolved inputs shared by the commands.
pub struct RunContext {
    /// Fully resolved configuration.
    pub config: ExperimentConfig,
    pub data_dir: Option<PathBuf>,
}

impl RunContext {
    fn data_dir(&self) -> PathBuf {
        self.data_dir
            .clone()
            .or_else(|| self.config.data.dir.clone())
            .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_DIR))
    }

    fn load_data(&self) -> Result<(Dataset, Dataset)> {
        let dir = self.data_dir();
        let strict = !self.config.data.allow_nonstandard_size;
        let train = load_split(&dir, Split::Train, strict)
            .with_context(|| format!("loading training data from {}", dir.display()))?;
        let test = load_split(&dir, Split::Test, strict)
            .with_context(|| format!("loading test data from {}", dir.display()))?;
        Ok((train, test))
    }

    fn test_subset(&self, test: &Dataset) -> Dataset {
        match self.config.train.test_subset {
            Some(n) => test.head(n),
            None => test.clone(),
        }
    }
}

pub fn design(ctx: &RunContext, sweep: bool, run: &mut RunDir) -> Result<Outcome> {
    let cfg = &ctx.config;
    let optics = cfg.slab_optics();
    if sweep {
        let s = &cfg.sweep;
        let points = tradeoff_sweep(
            s.ports,
            (s.theta_min_deg.to_radians(), s.theta_max_deg.to_radians()),
            s.steps,
            optics,
            &cfg.quadrature,
            &cfg.paraxial,
        )?;
        let mut csv = Vec::new();
        write_tradeoff_csv(&mut csv, &points)?;
        run.write("tradeoff.csv", &csv)?;
        let first = points.first().expect("steps >= 2");
        let last = points.last().expect("steps >= 2");
        return Ok(Outcome::from_pairs(&[
            ("ports", s.ports.to_string()),
            ("points", points.len().to_string()),
            ("F_first", format!("{:.6}", first.fidelity)),
            ("F_last", format!("{:.6}", last.fidelity)),
            ("T_first", format!("{:.6}", first.transmission)),
            ("T_last", format!("{:.6}", last.transmission)),
            ("R_ratio", format!("{:.4}", first.radius_m / last.radius_m)),
        ]));
    }
    let c = &cfg.coupler;
    let outputs = c.outputs.unwrap_or(c.ports);
    let geometry = match (c.radius_m, c.theta_n0_deg) {
        (Some(r), None) => StarCouplerGeometry::dft(optics, r, c.ports, outputs, &cfg.paraxial)?,
        (None, Some(t)) => StarCouplerGeometry::from_edge_angle(optics, t.to_radians(), c.ports, outputs, &cfg.paraxial)?,
        _ => bail!("coupler: give exactly one of radius_m and theta_n0_deg"),
    };
    let k = coupling_matrix(&geometry, &cfg.quadrature)?;
    let ideal = ideal_truncated_dft(outputs, c.ports)?;
    let f = if outputs == c.ports {
        fidelity(&k.entries, &ideal.entries)?
    } else {
        overlap_fidelity(&k.entries, &ideal.entries)?
    };
    let t = if outputs == c.ports {
        transmission(&k.entries)?
    } else {
        k.entries.iter().map(|z| z.norm_sqr()).sum::<f64>() / c.ports as f64
    };
    run.write("coupling_matrix.cmat", &encode_cmat(&k.entries))?;
    let edge = geometry.edge_angle();
    let pairs = [
        ("inputs", c.ports.to_string()),
        ("outputs", outputs.to_string()),
        ("radius_m", full(geometry.radius_m)),
        ("edge_angle_deg", full(edge.to_degrees())),
        ("normalized_radius_m", full(normalized_radius(edge, optics.slab_wavelength()))),
        ("phase_kernel", format!("{:?}", cfg.quadrature.kernel).to_lowercase()),
        ("F", full(f)),
        ("T", full(t)),
    ];
    run.write("design.txt", summary(&pairs).as_bytes())?;
    Ok(Outcome::from_pairs(&pairs))
}

fn train_network(ctx: &RunContext, train_data: &Dataset, test_data: &Dataset, run: &mut RunDir, prefix: &str) -> Result<(Network, f64)> {
    let mut net = build_network(&ctx.config.network)?;
    let report = train(&mut net, train_data, test_data, &ctx.config.train)?;
    let mut csv = Vec::new();
    write_report_csv(&mut csv, &report, &[])?;
    run.write(&format!("{prefix}train_report.csv"), &csv)?;
    let mut ckpt = Vec::new();
    write_checkpoint(&net.params, &mut ckpt)?;
    run.write(&format!("{prefix}checkpoint.pcnn"), &ckpt)?;
    Ok((net, report.final_test_accuracy))
}

fn load_network(ctx: &RunContext, checkpoint: &Path) -> Result<Network> {
    let mut net = build_network(&ctx.config.network)?;
    let file = fs::File::open(checkpoint).with_context(|| format!("opening {}", checkpoint.display()))?;
    let store = read_checkpoint(std::io::BufReader::new(file))
        .with_context(|| format!("reading {}", checkpoint.display()))?;
    net.params.load_values_from(&store)?;
    Ok(net)
}

fn trained_network(
    ctx: &RunContext,
    checkpoint: Option<&Path>,
    train_data: &Dataset,
    test_data: &Dataset,
    run: &mut RunDir,
) -> Result<Network> {
    match checkpoint {
        Some(p) => load_network(ctx, p),
        None => Ok(train_network(ctx, train_data, test_data, run, "base_")?.0),
    }
}

pub fn train_cmd(ctx: &RunContext, run: &mut RunDir) -> Result<Outcome> {
    let (train_data, test_data) = ctx.load_data()?;
    let (net, acc) = train_network(ctx, &train_data, &test_data, run, "")?;
    let pairs = [
        ("network", net.name.clone()),
        ("layers", net.describe()),
        ("parameters", net.parameter_count().to_string()),
        ("output_scale", full(net.output_gain())),
        ("test_accuracy", full(acc)),
    ];
    run.write("summary.txt", summary(&pairs).as_bytes())?;
    Ok(Outcome::from_pairs(&pairs))
}

pub fn evaluate_cmd(ctx: &RunContext, checkpoint: &Path, run: &mut RunDir) -> Result<Outcome> {
    let net = load_network(ctx, checkpoint)?;
    let (_, test_data) = ctx.load_data()?;
    let test = ctx.test_subset(&test_data);
    let eval = evaluate(&net, &test)?;
    let mut csv = String::from("true_label");
    for p in 0..eval.confusion.len() {
        csv.push_str(&format!(",pred_{p}"));
    }
    csv.push('\n');
    for (t, row) in eval.confusion.iter().enumerate() {
        csv.push_str(&t.to_string());
        for v in row {
            csv.push_str(&format!(",{v}"));
        }
        csv.push('\n');
    }
    run.write("confusion.csv", csv.as_bytes())?;
    let pairs = [
        ("samples", eval.samples.to_string()),
        ("accuracy", full(eval.accuracy)),
        ("mean_loss", full(eval.mean_loss)),
    ];
    run.write("summary.txt", summary(&pairs).as_bytes())?;
    Ok(Outcome::from_pairs(&pairs))
}

pub fn noise_cmd(ctx: &RunContext, checkpoint: Option<&Path>, sigma: Option<f64>, run: &mut RunDir) -> Result<Outcome> {
    let cfg = &ctx.config;
    let (train_data, test_data) = ctx.load_data()?;
    let net = trained_network(ctx, checkpoint, &train_data, &test_data, run)?;
    let test = ctx.test_subset(&test_data);
    let clean = evaluate(&net, &test)?.accuracy;
    let sigmas = sigma.map(|s| vec![s]).unwrap_or_else(|| cfg.noise.sigmas.clone());
    let rows = degradation_sweep(&net, &sigmas, &cfg.noise.kinds, &cfg.noise.targets, cfg.noise.instances, &test, cfg.noise.seed)?;
    let mut csv = Vec::new();
    write_degradation_csv(&mut csv, &rows)?;
    run.write("degradation.csv", &csv)?;
    let mut lines = vec![format!("clean_accuracy = {}", full(clean))];
    for r in &rows {
        lines.push(format!(
            "sigma {} {}: mean {:.4} std {:.4}",
            r.sigma,
            r.kind.as_str(),
            r.mean_acc,
            r.std_acc
        ));
    }
    if !cfg.noise.bias_deltas.is_empty() {
        let bias_rows = bias_noise_sweep(&net, &cfg.noise.bias_deltas, cfg.noise.instances, &test, cfg.noise.seed)?;
        let mut csv = Vec::new();
        write_bias_noise_csv(&mut csv, &bias_rows)?;
        run.write("bias_noise.csv", &csv)?;
        for r in &bias_rows {
            lines.push(format!("delta_b {}: mean {:.4} std {:.4}", r.delta_b, r.mean_acc, r.std_acc));
        }
    }
    run.write("summary.txt", (lines.join("\n") + "\n").as_bytes())?;
    Ok(Outcome { lines, passed: true })
}

/// Snapshot of every fixed optical matrix in the network.
fn optics_snapshot(net: &Network) -> Vec<photoconv_core::ComplexMatrix> {
    let mut out = Vec::new();
    for layer in &net.layers {
        match layer {
            Layer::Convolution(c) => {
                out.push((*c.f_in.entries).clone());
                out.push((*c.f_out.entries).clone());
            }
            Layer::Diffractive(d) => out.push((*d.transform.entries).clone()),
            Layer::Transform(t) => out.push((*t.entries).clone()),
            Layer::FullyConnected(_) => {}
        }
    }
    out
}

pub fn retrain_cmd(
    ctx: &RunContext,
    checkpoint: Option<&Path>,
    sigma: Option<f64>,
    scope: Option<RetrainScope>,
    run: &mut RunDir,
) -> Result<Outcome> {
    let cfg = &ctx.config;
    let (train_data, test_data) = ctx.load_data()?;
    let net = trained_network(ctx, checkpoint, &train_data, &test_data, run)?;
    let test = ctx.test_subset(&test_data);
    let clean = evaluate(&net, &test)?.accuracy;
    let sigma = sigma.unwrap_or(cfg.retrain.sigma);
    let scope = scope.unwrap_or(cfg.retrain.scope);
    let mut noisy = inject(&net, &NoiseSpec::new(sigma, cfg.retrain.kind, cfg.retrain.seed))?;
    let noisy_acc = evaluate(&noisy, &test)?.accuracy;
    let optics_before = optics_snapshot(&noisy);
    let spec = TrainSpec {
        batch_size: cfg.retrain.batch_size,
        epochs: cfg.retrain.epochs,
        seed: cfg.retrain.seed,
        calibrate_output_scale: false,
        ..cfg.train.clone()
    };
    let report = retrain(&mut noisy, scope, &train_data, &test_data, &spec)?;
    if optics_snapshot(&noisy) != optics_before {
        bail!("retraining changed a star-coupler matrix");
    }
    let mut csv = Vec::new();
    write_report_csv(&mut csv, &report, &[("scope", scope.as_str().into()), ("sigma", full(sigma))])?;
    run.write("retrain_report.csv", &csv)?;
    let pairs = [
        ("scope", scope.as_str().to_string()),
        ("sigma", full(sigma)),
        ("kind", cfg.retrain.kind.as_str().to_string()),
        ("clean_accuracy", full(clean)),
        ("noisy_accuracy", full(noisy_acc)),
        ("retrained_accuracy", full(report.final_test_accuracy)),
    ];
    run.write("summary.txt", summary(&pairs).as_bytes())?;
    Ok(Outcome::from_pairs(&pairs))
}

pub fn footprint_cmd(ctx: &RunContext, ports: Option<usize>, run: &mut RunDir) -> Result<Outcome> {
    let f = &ctx.config.footprint;
    let n = ports.unwrap_or(f.ports);
    let r = footprint_compare(n, &f.model)?;
    let pairs = [
        ("ports", r.ports.to_string()),
        ("mzi_count", r.mzi_count.to_string()),
        ("mzi_area_mm2", format!("{:.4}", r.mzi_area_m2 * 1e6)),
        ("edge_angle_deg", format!("{:.4}", r.edge_angle_rad.to_degrees())),
        ("star_radius_um", format!("{:.2}", r.star_radius_m * 1e6)),
        ("star_length_mm", format!("{:.4}", r.star_length_m * 1e3)),
        ("star_width_mm", format!("{:.4}", r.star_width_m * 1e3)),
        ("star_area_mm2", format!("{:.6}", r.star_area_m2 * 1e6)),
        ("ratio", format!("{:.3}", r.ratio)),
    ];
    run.write("footprint.txt", summary(&pairs).as_bytes())?;
    Ok(Outcome::from_pairs(&pairs))
}

/// Maximum relative error and whether it is within tolerance.
pub struct GradcheckResult {
    pub max_relative_error: f64,
    pub passed: bool,
}

/// Gradient check of the configured network on one random sample with
/// randomised mask parameters and output gain.
pub fn gradcheck_network(ctx: &RunContext) -> Result<(photoconv_core::autograd::GradCheckReport, GradcheckResult)> {
    let cfg = &ctx.config;
    let mut net = build_network(&cfg.network)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.gradcheck.seed);
    for (_, p) in net.params.iter_mut() {
        match p.role {
            ParamRole::MaskPhase => p.values.iter_mut().for_each(|v| *v = rng.random()),
            ParamRole::MaskAmplitude => p.values.iter_mut().for_each(|v| *v = rng.random_range(0.5..1.0)),
            _ => {}
        }
    }
    let sample: Vec<f64> = (0..net.inputs()).map(|_| rng.random()).collect();
    let label = rng.random_range(0..net.classes());
    let probe = Dataset::new(sample.len(), net.classes(), sample.clone(), vec![label as u8])?;
    let gain = calibrate_output_scale(&mut net, &probe, 1)?;
    net.set_output_gain(gain * rng.random_range(0.8..1.25));
    let layers = net.layers.clone();
    let beta = net.output_scale;
    let report = check_gradients(
        |tape| {
            let mut x = tape.constant(Network::encode(&sample));
            for layer in &layers {
                x = layer.forward(tape, x)?;
            }
            tape.power_softmax_xent(x, beta, label)
        },
        &mut net.params,
        cfg.gradcheck.step,
    )?;
    let max = report.max_relative_error();
    Ok((
        report,
        GradcheckResult {
            max_relative_error: max,
            passed: max < cfg.gradcheck.tolerance,
        },
    ))
}

pub fn gradcheck_cmd(ctx: &RunContext, run: &mut RunDir) -> Result<Outcome> {
    let (report, result) = gradcheck_network(ctx)?;
    let mut csv =
        String::from("parameter,elements,max_relative_error,max_abs_gradient,worst_index,worst_analytic,worst_numeric\n");
    for e in &report.entries {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            e.name,
            e.elements,
            full(e.max_relative_error),
            full(e.max_abs_gradient),
            e.worst_index,
            full(e.worst_analytic),
            full(e.worst_numeric)
        ));
    }
    run.write("gradcheck.csv", csv.as_bytes())?;
    let pairs = [
        ("network", ctx.config.network.name()),
        ("step", full(ctx.config.gradcheck.step)),
        ("max_relative_error", full(result.max_relative_error)),
        ("tolerance", full(ctx.config.gradcheck.tolerance)),
        ("passed", result.passed.to_string()),
    ];
    run.write("summary.txt", summary(&pairs).as_bytes())?;
    Ok(Outcome {
        passed: result.passed,
        ..Outcome::from_pairs(&pairs)
    })
}

pub fn sweep_cmd(ctx: &RunContext, run: &mut RunDir) -> Result<Outcome> {
    let cfg = &ctx.config;
    let mut network = cfg.network.clone();
    if network.optics == OpticsMode::Ideal {
        network.optics = OpticsMode::Physical {
            theta_n0_deg: cfg.sweep.accuracy_thetas_deg.first().copied().unwrap_or(10.0),
            slab: cfg.slab_optics(),
            quadrature: cfg.quadrature,
            paraxial: cfg.paraxial,
        };
    }
    let (train_data, test_data) = ctx.load_data()?;
    let rows = fidelity_accuracy_sweep(&network, &cfg.sweep.accuracy_thetas_deg, &train_data, &test_data, &cfg.train)?;
    let mut csv = Vec::new();
    write_fidelity_accuracy_csv(&mut csv, &rows)?;
    run.write("fidelity_accuracy.csv", &csv)?;
    let lines = rows
        .iter()
        .map(|r| format!("theta {} deg: R {:.3e} m, F {:.5}, accuracy {:.4}", r.theta_deg, r.radius_m, r.fidelity, r.accuracy))
        .collect();
    Ok(Outcome { lines, passed: true })
}
