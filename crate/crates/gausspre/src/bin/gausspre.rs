//! Command-line surface: fits activation tables, runs Edge-of-Chaos and
//! fixed-point diagnostics, Monte-Carlo propagation experiments, and the
//! Mellin failure reproduction. All outputs are data files (CSV/JSON);
//! plotting is left to external tools.

use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use gausspre::activation_fit::{
    build_activation, fit, fit_loss, ActivationTable, FitConfig, GridConfig, TableConfig,
};
use gausspre::eoc::{
    eoc_curve, find_fixed_points, sigma_omega, variance_map, Activation, EocSetting, Identity,
    PhiDeltaOmega, Relu, Tanh,
};
use gausspre::kstest::ks_threshold;
use gausspre::mellin::{laguerre_coefficients, laguerre_inverse_eval, PrecisionMode};
use gausspre::propagation::{
    independence_experiment, layer_distribution_experiment, normalize_individual, product_test,
    Init, NetworkConfig,
};

#[derive(Parser)]
#[command(name = "gausspre", version, about = "Gaussian pre-activation construction and diagnostics")]
struct Cli {
    /// JSON config file; explicit flags override file values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: GAUSSPRE_THREADS or 1)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the density family for one shape and build the activation table
    Fit(FitArgs),
    /// Edge-of-Chaos curve for an activation
    Eoc(EocArgs),
    /// Per-layer propagation experiment
    Propagate(PropagateArgs),
    /// Oscillating-activation counterexample: sigma calibration and fixed points
    Counterexample(CounterexampleArgs),
    /// Laguerre inversion diagnostic for the Mellin route
    MellinDiagnose(MellinArgs),
    /// KS statistics of the one-neuron product across input counts
    KsProduct(KsProductArgs),
    /// Two-layer dependence experiment across width grids
    Independence(IndependenceArgs),
}

#[derive(Args, serde::Serialize)]
struct FitArgs {
    /// Shape parameter theta (> 2)
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, serde::Serialize)]
struct EocArgs {
    /// tanh | relu | identity | path to an activation table CSV
    #[arg(long)]
    activation: Option<String>,
    /// sigma_b grid as comma-separated values
    #[arg(long)]
    sigma_b_grid: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, serde::Serialize)]
struct PropagateArgs {
    /// Activation: tanh | relu | identity | path to table CSV
    #[arg(long)]
    activation: Option<String>,
    /// gaussian:<sigma_w>:<sigma_b> | weibull:<theta>
    #[arg(long)]
    init: Option<String>,
    /// Layer width
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    /// synthetic | csv:<path> (first column class label, rest features)
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, serde::Serialize)]
struct CounterexampleArgs {
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, serde::Serialize)]
struct MellinArgs {
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    /// Use the two-float accumulator
    #[arg(long)]
    extended: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, serde::Serialize)]
struct KsProductArgs {
    /// tanh | relu | path to table CSV
    #[arg(long)]
    activation: Option<String>,
    /// Input counts, comma-separated
    #[arg(long)]
    n_grid: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, serde::Serialize)]
struct IndependenceArgs {
    #[arg(long)]
    activation: Option<String>,
    /// First-layer widths, comma-separated
    #[arg(long)]
    n0_grid: Option<String>,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// 2 = usage error, 3 = numeric failure.
enum CliError {
    Usage(String),
    Numeric(String),
}

impl From<gausspre::Error> for CliError {
    fn from(e: gausspre::Error) -> Self {
        match e {
            gausspre::Error::InvalidParameter(_) | gausspre::Error::Malformed(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numeric(format!("io error: {e}"))
    }
}

type CliResult = Result<(), CliError>;

/// JSON config lookup helper: flags override file values, file values
/// override defaults.
struct ConfigFile {
    values: serde_json::Value,
}

impl ConfigFile {
    fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let values = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("bad config JSON: {e}")))?
            }
            None => serde_json::Value::Null,
        };
        Ok(Self { values })
    }

    fn get<T: serde::de::DeserializeOwned>(&self, key: &str) -> Option<T> {
        self.values
            .get(key)
            .cloned()
            .and_then(|v| serde_json::from_value(v).ok())
    }
}

fn resolve<T: serde::de::DeserializeOwned>(
    flag: Option<T>,
    cfg: &ConfigFile,
    key: &str,
    default: impl FnOnce() -> Option<T>,
) -> Result<T, CliError> {
    flag.or_else(|| cfg.get(key))
        .or_else(default)
        .ok_or_else(|| CliError::Usage(format!("missing required parameter `{key}`")))
}

fn out_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path)?;
    Ok(())
}

fn write_manifest(
    dir: &Path,
    subcommand: &str,
    config: serde_json::Value,
    seed: u64,
    artifacts: &[String],
) -> Result<(), CliError> {
    let manifest = serde_json::json!({
        "version": 1,
        "subcommand": subcommand,
        "seed": seed,
        "config": config,
        "artifacts": artifacts,
    });
    let mut f = std::fs::File::create(dir.join("manifest.json"))?;
    writeln!(f, "{}", serde_json::to_string_pretty(&manifest).unwrap())?;
    Ok(())
}

fn csv_writer(path: &Path, seed: u64, header: &str) -> Result<std::io::BufWriter<std::fs::File>, CliError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "# gausspre version=1 seed={seed}")?;
    writeln!(f, "{header}")?;
    Ok(f)
}

/// Resolves an activation argument into a trait object.
fn load_activation(spec: &str) -> Result<Box<dyn Activation>, CliError> {
    match spec {
        "tanh" => Ok(Box::new(Tanh)),
        "relu" => Ok(Box::new(Relu)),
        "identity" => Ok(Box::new(Identity)),
        path => {
            let table = ActivationTable::load(Path::new(path))
                .map_err(|e| CliError::Usage(format!("cannot load activation {path}: {e}")))?;
            Ok(Box::new(table))
        }
    }
}

fn parse_init(spec: &str) -> Result<Init, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["gaussian", sw, sb] => {
            let sigma_w = sw.parse().map_err(|_| CliError::Usage(format!("bad sigma_w `{sw}`")))?;
            let sigma_b = sb.parse().map_err(|_| CliError::Usage(format!("bad sigma_b `{sb}`")))?;
            Ok(Init::Gaussian { sigma_w, sigma_b })
        }
        ["weibull", th] => {
            let theta = th.parse().map_err(|_| CliError::Usage(format!("bad theta `{th}`")))?;
            Ok(Init::Weibull { theta })
        }
        ["rademacher"] => Ok(Init::Rademacher),
        _ => Err(CliError::Usage(format!(
            "bad init `{spec}` (expected gaussian:<sw>:<sb>, weibull:<theta>, or rademacher)"
        ))),
    }
}

fn parse_grid<T: std::str::FromStr>(spec: &str, what: &str) -> Result<Vec<T>, CliError> {
    spec.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<T>()
                .map_err(|_| CliError::Usage(format!("bad {what} entry `{tok}`")))
        })
        .collect()
}

fn cmd_fit(args: FitArgs, cfg: &ConfigFile) -> CliResult {
    let theta: f64 = resolve(args.theta, cfg, "theta", || None)?;
    if !(theta > 2.0) {
        return Err(CliError::Usage(format!("theta must be > 2, got {theta}")));
    }
    let epochs = resolve(args.epochs, cfg, "epochs", || Some(100))?;
    let seed = resolve(args.seed, cfg, "seed", || Some(0))?;
    let out = resolve(args.out, cfg, "out", || Some(PathBuf::from(".")))?;
    out_dir(&out)?;

    let fit_cfg = FitConfig { epochs, seed, ..FitConfig::default() };
    let (model, trace) = fit(theta, fit_cfg)?;
    let table = build_activation(&model, TableConfig::default())?;

    let table_file = format!("activation_theta{theta}.csv");
    table.save(&out.join(&table_file))?;

    let trace_file = "fit_trace.csv".to_string();
    let mut f = csv_writer(&out.join(&trace_file), seed, "epoch,loss,learning_rate,theta_prime")?;
    for row in &trace {
        writeln!(
            f,
            "{},{:e},{:e},{}",
            row.epoch, row.loss, row.learning_rate, row.theta_prime
        )?;
    }
    drop(f);

    let loss = fit_loss(&model, GridConfig::default())?;
    write_manifest(
        &out,
        "fit",
        serde_json::json!({
            "theta": theta,
            "epochs": epochs,
            "model": model,
            "fit_loss": loss,
        }),
        seed,
        &[table_file, trace_file],
    )?;
    eprintln!("fit theta={theta}: loss={loss:e}");
    Ok(())
}

fn cmd_eoc(args: EocArgs, cfg: &ConfigFile) -> CliResult {
    let activation: String = resolve(args.activation, cfg, "activation", || None)?;
    let out: PathBuf = resolve(args.out, cfg, "out", || Some(PathBuf::from(".")))?;
    out_dir(&out)?;
    let file = "eoc_curve.csv".to_string();
    let mut f = csv_writer(&out.join(&file), 0, "sigma_b,sigma_w,v_star,chi1")?;
    if activation == "relu" {
        // the ReLU EOC degenerates to the single point (0, sqrt(2))
        let act = Relu;
        let setting = EocSetting::new(2f64.sqrt(), 0.0, &act)?;
        let chi1 = gausspre::eoc::chi1(&setting)?;
        writeln!(f, "0,{},1,{chi1}", 2f64.sqrt())?;
    } else {
        let act = load_activation(&activation)?;
        let grid_spec: String =
            resolve(args.sigma_b_grid, cfg, "sigma_b_grid", || Some("0.0,0.05,0.1,0.2,0.3".into()))?;
        let grid: Vec<f64> = parse_grid(&grid_spec, "sigma_b")?;
        let curve = eoc_curve(act.as_ref(), &grid)?;
        for p in &curve.points {
            writeln!(f, "{},{},{},{}", p.sigma_b, p.sigma_w, p.v_star, p.chi1)?;
        }
        for w in &curve.warnings {
            eprintln!("warning: {w}");
        }
    }
    drop(f);
    write_manifest(&out, "eoc", serde_json::json!({ "activation": activation }), 0, &[file])?;
    Ok(())
}

fn cmd_propagate(args: PropagateArgs, cfg: &ConfigFile) -> CliResult {
    let activation: String = resolve(args.activation, cfg, "activation", || None)?;
    let init_spec: String = resolve(args.init, cfg, "init", || None)?;
    let width = resolve(args.width, cfg, "width", || Some(100))?;
    let depth = resolve(args.depth, cfg, "depth", || Some(50))?;
    let input_spec: String = resolve(args.input, cfg, "input", || Some("synthetic".into()))?;
    let samples = resolve(args.samples, cfg, "samples", || Some(10_000))?;
    let seed = resolve(args.seed, cfg, "seed", || Some(0))?;
    let out: PathBuf = resolve(args.out, cfg, "out", || Some(PathBuf::from(".")))?;
    out_dir(&out)?;

    let act = load_activation(&activation)?;
    let init = parse_init(&init_spec)?;
    let input: Vec<f64> = if input_spec == "synthetic" {
        let raw = gausspre::distributions::std_normal_sample(seed, 0x696e707574, width);
        normalize_individual(&raw)?
    } else if let Some(path) = input_spec.strip_prefix("csv:") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))?;
        let first = text
            .lines()
            .find(|l| !l.is_empty() && !l.starts_with('#'))
            .ok_or_else(|| CliError::Usage("empty input CSV".into()))?;
        let mut fields = first.split(',');
        let _label = fields.next();
        let feats: Result<Vec<f64>, _> = fields.map(|v| v.trim().parse::<f64>()).collect();
        let feats = feats.map_err(|e| CliError::Usage(format!("bad input CSV: {e}")))?;
        if feats.len() != width {
            return Err(CliError::Usage(format!(
                "input has {} features but width is {width}",
                feats.len()
            )));
        }
        normalize_individual(&feats)?
    } else {
        return Err(CliError::Usage(format!(
            "bad input `{input_spec}` (expected synthetic or csv:<path>)"
        )));
    };

    let mut widths = vec![width; depth + 1];
    widths[0] = input.len();
    let config = NetworkConfig { widths, activation: act.as_ref(), init };
    let report = layer_distribution_experiment(&config, &input, samples, seed)?;

    let file = "propagation.csv".to_string();
    let mut f = csv_writer(
        &out.join(&file),
        seed,
        "layer,mean,std,ks_raw,ks_standardized,threshold",
    )?;
    for l in &report.layers {
        writeln!(
            f,
            "{},{},{},{},{},{}",
            l.layer, l.mean, l.std, l.ks_raw, l.ks_standardized, report.threshold
        )?;
    }
    drop(f);
    write_manifest(
        &out,
        "propagate",
        serde_json::json!({
            "activation": activation, "init": init_spec, "width": width,
            "depth": depth, "input": input_spec, "samples": samples,
        }),
        seed,
        &[file],
    )?;
    Ok(())
}

fn cmd_counterexample(args: CounterexampleArgs, cfg: &ConfigFile) -> CliResult {
    let delta = resolve(args.delta, cfg, "delta", || Some(0.99))?;
    let omega = resolve(args.omega, cfg, "omega", || Some(6.0))?;
    let out: PathBuf = resolve(args.out, cfg, "out", || Some(PathBuf::from(".")))?;
    out_dir(&out)?;

    let sigma = sigma_omega(delta, omega)?;
    let act = PhiDeltaOmega::new(delta, omega)?;
    let setting = EocSetting::new(sigma, 0.0, &act)?;

    let curve_file = "variance_curve.csv".to_string();
    let mut f = csv_writer(&out.join(&curve_file), 0, "v,variance_map")?;
    let steps = 400;
    for i in 0..=steps {
        let v = 10f64.powf(-2.0 + 3.5 * i as f64 / steps as f64);
        writeln!(f, "{},{}", v, variance_map(v, &setting)?)?;
    }
    drop(f);

    let report = find_fixed_points(&setting, 0.1, 20.0, 400)?;
    let fp_file = "fixed_points.csv".to_string();
    let mut f = csv_writer(&out.join(&fp_file), 0, "v,slope,stable")?;
    for p in &report.points {
        writeln!(f, "{},{},{}", p.v, p.slope, p.stable)?;
    }
    drop(f);

    write_manifest(
        &out,
        "counterexample",
        serde_json::json!({
            "delta": delta, "omega": omega, "sigma_omega": sigma,
            "degenerate_continuum": report.degenerate_continuum,
        }),
        0,
        &[curve_file, fp_file],
    )?;
    eprintln!("sigma_omega({delta}, {omega}) = {sigma}");
    Ok(())
}

fn cmd_mellin(args: MellinArgs, cfg: &ConfigFile) -> CliResult {
    let theta = resolve(args.theta, cfg, "theta", || Some(2.05))?;
    let k = resolve(args.k, cfg, "k", || Some(500))?;
    let out: PathBuf = resolve(args.out, cfg, "out", || Some(PathBuf::from(".")))?;
    out_dir(&out)?;
    let mode = if args.extended { PrecisionMode::Extended } else { PrecisionMode::Float64 };
    let series = laguerre_coefficients(theta, k, mode)?;

    let coef_file = "laguerre_coefficients.csv".to_string();
    let mut f = csv_writer(&out.join(&coef_file), 0, "k,c_k")?;
    for (i, c) in series.coefficients.iter().enumerate() {
        writeln!(f, "{},{:e}", i + 1, c)?;
    }
    drop(f);

    let rec_file = "reconstruction.csv".to_string();
    let mut f = csv_writer(&out.join(&rec_file), 0, "z,value")?;
    for i in 0..=500 {
        let z = i as f64 * 0.01;
        writeln!(f, "{},{:e}", z, laguerre_inverse_eval(&series, z)?)?;
    }
    drop(f);

    write_manifest(
        &out,
        "mellin-diagnose",
        serde_json::json!({
            "theta": theta, "k": k,
            "precision_mode": series.precision_mode,
            "divergence_index": series.divergence_index,
        }),
        0,
        &[coef_file, rec_file],
    )?;
    match series.divergence_index {
        Some(idx) => eprintln!("coefficient blow-up detected at k = {idx}"),
        None => eprintln!("no blow-up within K = {k}"),
    }
    Ok(())
}

fn cmd_ks_product(args: KsProductArgs, cfg: &ConfigFile) -> CliResult {
    let activation: String = resolve(args.activation, cfg, "activation", || None)?;
    let n_spec: String = resolve(args.n_grid, cfg, "n_grid", || Some("1,3,10,30,100".into()))?;
    let samples = resolve(args.samples, cfg, "samples", || Some(100_000))?;
    let seed = resolve(args.seed, cfg, "seed", || Some(0))?;
    let out: PathBuf = resolve(args.out, cfg, "out", || Some(PathBuf::from(".")))?;
    out_dir(&out)?;

    let act = load_activation(&activation)?;
    // Weibull weights for a fitted table, unit Gaussian weights otherwise
    let init = match activation.as_str() {
        "tanh" | "relu" | "identity" => Init::Gaussian { sigma_w: 1.0, sigma_b: 0.0 },
        path => {
            let table = ActivationTable::load(Path::new(path))?;
            Init::Weibull { theta: table.theta() }
        }
    };
    let grid: Vec<usize> = parse_grid(&n_spec, "n")?;

    let file = "ks_product.csv".to_string();
    let mut f = csv_writer(&out.join(&file), seed, "n,mean,std,ks_raw,ks_standardized,threshold")?;
    for &n in &grid {
        let r = product_test(n, act.as_ref(), init, samples, seed)?;
        writeln!(
            f,
            "{},{},{},{},{},{}",
            n, r.mean, r.std, r.ks_raw.statistic, r.ks_standardized.statistic,
            r.ks_standardized.threshold
        )?;
    }
    drop(f);
    write_manifest(
        &out,
        "ks-product",
        serde_json::json!({ "activation": activation, "n_grid": grid, "samples": samples }),
        seed,
        &[file],
    )?;
    Ok(())
}

fn cmd_independence(args: IndependenceArgs, cfg: &ConfigFile) -> CliResult {
    let activation: String = resolve(args.activation, cfg, "activation", || None)?;
    let n0_spec: String = resolve(args.n0_grid, cfg, "n0_grid", || Some("1,2,5,10,50".into()))?;
    let n1 = resolve(args.n1, cfg, "n1", || Some(10))?;
    let init_spec: String = resolve(args.init, cfg, "init", || None)?;
    let samples = resolve(args.samples, cfg, "samples", || Some(50_000))?;
    let seed = resolve(args.seed, cfg, "seed", || Some(0))?;
    let out: PathBuf = resolve(args.out, cfg, "out", || Some(PathBuf::from(".")))?;
    out_dir(&out)?;

    let act = load_activation(&activation)?;
    let init = parse_init(&init_spec)?;
    let grid: Vec<usize> = parse_grid(&n0_spec, "n0")?;

    let file = "independence.csv".to_string();
    let mut f = csv_writer(
        &out.join(&file),
        seed,
        "n0,n1,ks_standardized,threshold,reject,zero_fraction",
    )?;
    for &n0 in &grid {
        let r = independence_experiment(n0, n1, act.as_ref(), init, samples, seed)?;
        writeln!(
            f,
            "{},{},{},{},{},{}",
            n0, n1, r.ks_standardized.statistic, r.ks_standardized.threshold,
            r.ks_standardized.reject, r.zero_fraction
        )?;
    }
    drop(f);
    write_manifest(
        &out,
        "independence",
        serde_json::json!({
            "activation": activation, "n0_grid": grid, "n1": n1,
            "init": init_spec, "samples": samples,
        }),
        seed,
        &[file],
    )?;
    let _ = ks_threshold(samples, 0.05);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| std::env::var("GAUSSPRE_THREADS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(1);
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();

    let cfg = match ConfigFile::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(3);
        }
    };

    let result = match cli.command {
        Command::Fit(a) => cmd_fit(a, &cfg),
        Command::Eoc(a) => cmd_eoc(a, &cfg),
        Command::Propagate(a) => cmd_propagate(a, &cfg),
        Command::Counterexample(a) => cmd_counterexample(a, &cfg),
        Command::MellinDiagnose(a) => cmd_mellin(a, &cfg),
        Command::KsProduct(a) => cmd_ks_product(a, &cfg),
        Command::Independence(a) => cmd_independence(a, &cfg),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(msg)) => {
            let diag = serde_json::json!({ "error": "numeric", "message": msg });
            eprintln!("{diag}");
            ExitCode::from(3)
        }
    }
}
