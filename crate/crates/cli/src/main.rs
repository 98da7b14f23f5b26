//! `rrb` — seeded, file-based workflows over the benchmarking library.
//!
//! Subcommands: `haar sample`, `haar verify`, `decompose`, `rb run`,
//! `fit`, `noise scan`. Every run takes an explicit `--seed` (or opts in
//! to OS randomness with `--entropy`, in which case the drawn seed is
//! reported on stderr so the run can be repeated). `--threads` caps
//! worker parallelism without changing any output byte. Next to every
//! output file the tool writes a `<file>.manifest.json` sidecar recording
//! the command, the effective configuration, the seed, the tool version,
//! a timestamp, and SHA-256 digests of the outputs; the timestamp is the
//! only field that varies between identical reruns.
//!
//! Exit codes: 0 success, 1 invalid input or a failed verification,
//! 2 internal error. Diagnostics go to stderr; machine-readable output
//! goes to files or stdout.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::SystemTime;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::RngCore;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use rrb_core::analysis::fit_rb_result;
use rrb_core::analysis::scan::{gate_dependence_scan, ScanConfig};
use rrb_core::channels::{LambdaConvention, NoiseModel};
use rrb_core::haar::{
    frame_potential, haar_1q, haar_2q, qr_haar, spacing_report, verify_bloch_uniformity,
};
use rrb_core::linalg::ComplexMatrix;
use rrb_core::quantum::Unitary;
use rrb_core::rb::{default_lengths, run_rb, RBConfig, RBResult, Scheme};
use rrb_core::rng::RandomSource;
use rrb_core::synth::decompose_2q;

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (git ", env!("RRB_GIT_HASH"), ")");

/// Threshold on the eigenphase-spacing total-variation distance used by
/// `haar verify --test spacing`, calibrated against oracle-vs-oracle runs
/// at a sample size of 10^4.
const SPACING_TV_AT_CALIBRATION: f64 = 0.02;
const SPACING_CALIBRATION_COUNT: f64 = 10_000.0;

/// Two empirical histograms of matched ensembles differ by a TV noise
/// floor that shrinks like 1/sqrt(count), so the pass threshold scales
/// the same way around its calibration point.
fn spacing_threshold(count: usize) -> f64 {
    SPACING_TV_AT_CALIBRATION * (SPACING_CALIBRATION_COUNT / count as f64).sqrt()
}

#[derive(Parser)]
#[command(
    name = "rrb",
    version = VERSION,
    about = "Fixed-depth randomized benchmarking: sampling, simulation, fitting, analysis",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Master seed; all randomness in the run derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Draw the seed from OS entropy (it is printed on stderr for reruns).
    #[arg(long, global = true, conflicts_with = "seed")]
    entropy: bool,
    /// Cap worker threads. Outputs do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample Haar-random unitaries or verify their statistics.
    Haar {
        #[command(subcommand)]
        action: HaarAction,
    },
    /// Decompose a two-qubit unitary into fixed-template parameters.
    Decompose(DecomposeArgs),
    /// Run randomized benchmarking on the built-in simulator.
    Rb {
        #[command(subcommand)]
        action: RbAction,
    },
    /// Fit the exponential survival decay of a benchmarking result.
    Fit(FitArgs),
    /// Analyze gate dependence of effective noise channels.
    Noise {
        #[command(subcommand)]
        action: NoiseAction,
    },
}

#[derive(Subcommand)]
enum HaarAction {
    /// Sample unitaries through the fixed native-gate templates.
    Sample(HaarSampleArgs),
    /// Run a statistical check on the sampler; exits 1 if it fails.
    Verify(HaarVerifyArgs),
}

#[derive(Args)]
struct HaarSampleArgs {
    /// Register size: 1 or 2.
    #[arg(long)]
    qubits: usize,
    /// Number of unitaries to draw.
    #[arg(long)]
    count: usize,
    /// Output JSON file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct HaarVerifyArgs {
    /// Which statistic to test.
    #[arg(long, value_enum)]
    test: VerifyTest,
    /// Register size; defaults to the natural size for the test.
    #[arg(long)]
    qubits: Option<usize>,
    /// Sample size.
    #[arg(long)]
    count: usize,
    /// Significance level for the Bloch-uniformity KS tests.
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Also write the JSON report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyTest {
    /// KS tests of the Bloch-vector distribution (1 qubit).
    Bloch,
    /// Eigenphase-spacing histogram against a QR-sampled reference (2 qubits).
    Spacing,
    /// Frame potentials for t = 1, 2 (2 qubits).
    Frame,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Input JSON: a matrix `{"dim", "re", "im"}` or a sample file with
    /// a `unitaries` array.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output JSON file (one parameter object, or an array for sample files).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum RbAction {
    /// Generate, simulate, and aggregate survival data.
    Run(RbRunArgs),
}

#[derive(Args)]
struct RbRunArgs {
    /// Register size: 1 or 2.
    #[arg(long)]
    qubits: usize,
    /// Random-operation distribution for the sequence layers.
    #[arg(long, value_enum, default_value_t = SchemeArg::Restricted)]
    scheme: SchemeArg,
    /// Comma-separated sequence lengths; defaults to the built-in grid.
    #[arg(long)]
    lengths: Option<String>,
    /// Random sequences per length.
    #[arg(long, default_value_t = 200)]
    sequences: usize,
    /// Measurement shots per sequence.
    #[arg(long, default_value_t = 800)]
    shots: u64,
    /// Noise model JSON file; omitted means noiseless.
    #[arg(long)]
    noise: Option<PathBuf>,
    /// Output JSON file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Restricted,
    Clifford,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Restricted => Scheme::Restricted,
            SchemeArg::Clifford => Scheme::Clifford,
        }
    }
}

#[derive(Args)]
struct FitArgs {
    /// A result file produced by `rb run`.
    #[arg(long = "in")]
    input: PathBuf,
    /// Also write the fit JSON to this file (it always prints to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum NoiseAction {
    /// Scan mean diamond distance between effective noise channels over a
    /// depolarizing × damping parameter grid.
    Scan(NoiseScanArgs),
}

#[derive(Args)]
struct NoiseScanArgs {
    /// Depolarizing grid as `start:end:count` (inclusive) or one number.
    #[arg(long)]
    lambda: String,
    /// Amplitude-damping grid, same syntax.
    #[arg(long)]
    epsilon: String,
    /// Circuit pairs per cell.
    #[arg(long, default_value_t = 10)]
    pairs: usize,
    /// Whether `lambda` means the surviving fraction or the error strength.
    #[arg(long, value_enum, default_value_t = ConventionArg::Retention)]
    lambda_convention: ConventionArg,
    /// Output CSV file (columns lambda, epsilon, mean_diamond, stderr).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Retention,
    Strength,
}

impl From<ConventionArg> for LambdaConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Retention => LambdaConvention::Retention,
            ConventionArg::Strength => LambdaConvention::Strength,
        }
    }
}

/// Failures carry the exit code distinction: bad input vs broken tool.
enum Failure {
    Validation(anyhow::Error),
    Internal(anyhow::Error),
}

type CmdResult<T> = std::result::Result<T, Failure>;

fn invalid<T>(err: impl Into<anyhow::Error>) -> CmdResult<T> {
    Err(Failure::Validation(err.into()))
}

trait IntoCmdResult<T> {
    /// Classify an error as the user's fault (exit 1).
    fn or_invalid(self) -> CmdResult<T>;
    /// Classify an error as the tool's fault (exit 2).
    fn or_internal(self) -> CmdResult<T>;
}

impl<T, E: Into<anyhow::Error>> IntoCmdResult<T> for std::result::Result<T, E> {
    fn or_invalid(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Validation(e.into()))
    }
    fn or_internal(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Internal(e.into()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code: u8 = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(err)) => {
            eprintln!("internal error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> CmdResult<()> {
    let seed = match (cli.seed, cli.entropy) {
        (Some(s), false) => s,
        (None, true) => {
            let s = rand::rngs::OsRng.next_u64();
            eprintln!("entropy seed: {s} (pass --seed {s} to repeat this run)");
            s
        }
        (None, false) => {
            return invalid(anyhow!(
                "no seed given; pass --seed <u64>, or --entropy to use OS randomness"
            ))
        }
        (Some(_), true) => unreachable!("clap rejects --seed with --entropy"),
    };
    match cli.threads {
        None => dispatch(cli.command, seed),
        Some(0) => invalid(anyhow!("--threads must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .context("building worker pool")
                .or_internal()?;
            pool.install(|| dispatch(cli.command, seed))
        }
    }
}

fn dispatch(command: Command, seed: u64) -> CmdResult<()> {
    match command {
        Command::Haar { action: HaarAction::Sample(args) } => haar_sample(args, seed),
        Command::Haar { action: HaarAction::Verify(args) } => haar_verify(args, seed),
        Command::Decompose(args) => decompose(args, seed),
        Command::Rb { action: RbAction::Run(args) } => rb_run(args, seed),
        Command::Fit(args) => fit(args, seed),
        Command::Noise { action: NoiseAction::Scan(args) } => noise_scan(args, seed),
    }
}

// ---------------------------------------------------------------------------
// Output plumbing

#[derive(Serialize)]
struct OutputDigest {
    path: String,
    sha256: String,
}

/// Provenance sidecar written as `<file>.manifest.json` next to each
/// output file. `created_utc` is the only field that differs between
/// identical reruns.
#[derive(Serialize)]
struct RunManifest {
    command: String,
    config: serde_json::Value,
    seed: u64,
    tool_version: String,
    created_utc: String,
    outputs: Vec<OutputDigest>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().fold(String::with_capacity(64), |mut acc, b| {
        let _ = write!(acc, "{b:02x}");
        acc
    })
}

fn json_bytes<T: Serialize>(value: &T) -> CmdResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).context("serializing output").or_internal()?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes one data file plus its manifest sidecar.
fn emit(
    command: &str,
    config: serde_json::Value,
    seed: u64,
    path: &Path,
    bytes: &[u8],
) -> CmdResult<()> {
    std::fs::write(path, bytes)
        .with_context(|| format!("writing {}", path.display()))
        .or_invalid()?;
    let manifest = RunManifest {
        command: command.to_string(),
        config,
        seed,
        tool_version: VERSION.to_string(),
        created_utc: humantime::format_rfc3339_seconds(SystemTime::now()).to_string(),
        outputs: vec![OutputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        }],
    };
    let manifest_path = manifest_path_for(path);
    std::fs::write(&manifest_path, json_bytes(&manifest)?)
        .with_context(|| format!("writing {}", manifest_path.display()))
        .or_invalid()?;
    Ok(())
}

fn manifest_path_for(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn read_json_file<T: serde::de::DeserializeOwned>(path: &Path) -> CmdResult<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .or_invalid()?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .or_invalid()
}

// ---------------------------------------------------------------------------
// Subcommands

fn haar_sample(args: HaarSampleArgs, seed: u64) -> CmdResult<()> {
    if !(args.qubits == 1 || args.qubits == 2) {
        return invalid(anyhow!("--qubits must be 1 or 2, got {}", args.qubits));
    }
    if args.count == 0 {
        return invalid(anyhow!("--count must be at least 1"));
    }
    let mut rng = RandomSource::from_seed(seed);
    let unitaries: Vec<ComplexMatrix> = (0..args.count)
        .map(|_| {
            let u = match args.qubits {
                1 => haar_1q(&mut rng).1,
                _ => haar_2q(&mut rng).1,
            };
            u.matrix().clone()
        })
        .collect();
    let config = json!({"qubits": args.qubits, "count": args.count});
    let file = json!({
        "qubits": args.qubits,
        "count": args.count,
        "seed": seed,
        "unitaries": unitaries,
    });
    emit("haar sample", config, seed, &args.out, &json_bytes(&file)?)?;
    eprintln!("haar sample: wrote {} unitaries to {}", args.count, args.out.display());
    Ok(())
}

fn haar_verify(args: HaarVerifyArgs, seed: u64) -> CmdResult<()> {
    if args.count < 2 {
        return invalid(anyhow!("--count must be at least 2"));
    }
    if !(0.0 < args.alpha && args.alpha < 1.0) {
        return invalid(anyhow!("--alpha must lie strictly between 0 and 1"));
    }
    let natural = match args.test {
        VerifyTest::Bloch => 1,
        VerifyTest::Spacing | VerifyTest::Frame => 2,
    };
    let qubits = args.qubits.unwrap_or(natural);
    if qubits != natural {
        return invalid(anyhow!(
            "this test is defined for {natural}-qubit sampling, got --qubits {qubits}"
        ));
    }

    let (pass, report) = match args.test {
        VerifyTest::Bloch => {
            let mut rng = RandomSource::from_seed(seed);
            let rep = verify_bloch_uniformity(args.count, args.alpha, &mut rng).or_invalid()?;
            (
                rep.pass,
                json!({
                    "test": "bloch",
                    "count": args.count,
                    "alpha": args.alpha,
                    "pass": rep.pass,
                    "report": rep,
                }),
            )
        }
        VerifyTest::Spacing => {
            let mut rng = RandomSource::substream(seed, 1);
            let sample: Vec<Unitary> = (0..args.count).map(|_| haar_2q(&mut rng).1).collect();
            let mut rng = RandomSource::substream(seed, 2);
            let reference: Vec<Unitary> = (0..args.count)
                .map(|_| qr_haar(4, &mut rng))
                .collect::<Result<_, _>>()
                .or_internal()?;
            let rep = spacing_report(&sample, &reference).or_internal()?;
            let threshold = spacing_threshold(args.count);
            let pass = rep.tv <= threshold && !rep.is_degenerate();
            (
                pass,
                json!({
                    "test": "spacing",
                    "count": args.count,
                    "tv_threshold": threshold,
                    "pass": pass,
                    "report": rep,
                }),
            )
        }
        VerifyTest::Frame => {
            let mut rng = RandomSource::substream(seed, 1);
            let sample: Vec<Unitary> = (0..args.count).map(|_| haar_2q(&mut rng).1).collect();
            let (f1, se1) = frame_potential(1, &sample).or_internal()?;
            let (f2, se2) = frame_potential(2, &sample).or_internal()?;
            let z1 = (f1 - 1.0).abs() / se1.max(1e-12);
            let z2 = (f2 - 2.0).abs() / se2.max(1e-12);
            let pass = z1 <= 3.0 && z2 <= 3.0;
            (
                pass,
                json!({
                    "test": "frame",
                    "count": args.count,
                    "pass": pass,
                    "report": {
                        "t1": {"value": f1, "expected": 1.0, "stderr": se1, "z": z1},
                        "t2": {"value": f2, "expected": 2.0, "stderr": se2, "z": z2},
                    },
                }),
            )
        }
    };

    let bytes = json_bytes(&report)?;
    print!("{}", String::from_utf8_lossy(&bytes));
    if let Some(out) = &args.out {
        let config = json!({
            "test": match args.test {
                VerifyTest::Bloch => "bloch",
                VerifyTest::Spacing => "spacing",
                VerifyTest::Frame => "frame",
            },
            "qubits": qubits,
            "count": args.count,
            "alpha": args.alpha,
        });
        emit("haar verify", config, seed, out, &bytes)?;
    }
    if pass {
        Ok(())
    } else {
        invalid(anyhow!("verification failed; see the report above"))
    }
}

fn decompose(args: DecomposeArgs, seed: u64) -> CmdResult<()> {
    let raw: serde_json::Value = read_json_file(&args.input)?;
    let to_params = |value: serde_json::Value| -> CmdResult<_> {
        let m: ComplexMatrix =
            serde_json::from_value(value).context("reading matrix").or_invalid()?;
        if m.dim() != 4 {
            return invalid(anyhow!("expected a 4x4 unitary, got dimension {}", m.dim()));
        }
        let u = Unitary::new(m).or_invalid()?;
        decompose_2q(&u).or_invalid()
    };
    let (bytes, n) = match raw.get("unitaries").cloned() {
        Some(serde_json::Value::Array(items)) => {
            let n = items.len();
            let params = items.into_iter().map(to_params).collect::<CmdResult<Vec<_>>>()?;
            (json_bytes(&params)?, n)
        }
        Some(_) => return invalid(anyhow!("`unitaries` must be an array of matrices")),
        None => (json_bytes(&to_params(raw)?)?, 1),
    };
    let config = json!({"in": args.input.display().to_string()});
    emit("decompose", config, seed, &args.out, &bytes)?;
    eprintln!("decompose: wrote parameters for {n} unitaries to {}", args.out.display());
    Ok(())
}

fn parse_lengths(text: &str) -> anyhow::Result<Vec<usize>> {
    let lengths = text
        .split(',')
        .map(|part| part.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| anyhow!("bad --lengths entry: {e}"))?;
    if lengths.is_empty() || lengths.iter().any(|&m| m == 0) {
        return Err(anyhow!("--lengths entries must be positive"));
    }
    Ok(lengths)
}

fn rb_run(args: RbRunArgs, seed: u64) -> CmdResult<()> {
    if !(args.qubits == 1 || args.qubits == 2) {
        return invalid(anyhow!("--qubits must be 1 or 2, got {}", args.qubits));
    }
    let lengths = match &args.lengths {
        Some(text) => parse_lengths(text).or_invalid()?,
        None => default_lengths(),
    };
    let noise = match &args.noise {
        Some(path) => read_json_file::<NoiseModel>(path)?,
        None => NoiseModel::noiseless(),
    };
    let config = RBConfig {
        n_qubits: args.qubits,
        scheme: args.scheme.into(),
        lengths,
        sequences: args.sequences,
        shots: args.shots,
        noise,
        seed,
    };
    let result = run_rb(&config).or_invalid()?;
    let config_echo = serde_json::to_value(&config).or_internal()?;
    emit("rb run", config_echo, seed, &args.out, &json_bytes(&result)?)?;
    eprintln!(
        "rb run: {} lengths x {} sequences x {} shots, wrote {}",
        config.lengths.len(),
        config.sequences,
        config.shots,
        args.out.display()
    );
    Ok(())
}

fn fit(args: FitArgs, seed: u64) -> CmdResult<()> {
    let result: RBResult = read_json_file(&args.input)?;
    let decay = fit_rb_result(&result).or_invalid()?;
    let bytes = json_bytes(&decay)?;
    print!("{}", String::from_utf8_lossy(&bytes));
    if let Some(out) = &args.out {
        let config = json!({"in": args.input.display().to_string()});
        emit("fit", config, seed, out, &bytes)?;
    }
    Ok(())
}

/// Parses `start:end:count` (inclusive, `count` evenly spaced points) or a
/// single number.
fn parse_range(text: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| anyhow!("`{s}` is not a number in range `{text}`"))
    };
    match parts.as_slice() {
        [single] => Ok(vec![num(single)?]),
        [start, end, count] => {
            let (start, end) = (num(start)?, num(end)?);
            let count: usize =
                count.trim().parse().map_err(|_| anyhow!("bad point count in `{text}`"))?;
            match count {
                0 => Err(anyhow!("range `{text}` must have at least 1 point")),
                1 => {
                    if start == end {
                        Ok(vec![start])
                    } else {
                        Err(anyhow!("range `{text}` has 1 point but start != end"))
                    }
                }
                _ => {
                    let step = (end - start) / (count - 1) as f64;
                    Ok((0..count)
                        .map(|i| if i + 1 == count { end } else { start + step * i as f64 })
                        .collect())
                }
            }
        }
        _ => Err(anyhow!("range `{text}` must be `start:end:count` or a single number")),
    }
}

fn noise_scan(args: NoiseScanArgs, seed: u64) -> CmdResult<()> {
    let config = ScanConfig {
        lambdas: parse_range(&args.lambda).or_invalid()?,
        epsilons: parse_range(&args.epsilon).or_invalid()?,
        pairs: args.pairs,
        seed,
        lambda_convention: args.lambda_convention.into(),
    };
    let grid = gate_dependence_scan(&config).or_invalid()?;
    let mut csv = String::from("lambda,epsilon,mean_diamond,stderr\n");
    for cell in &grid.cells {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            cell.lambda, cell.epsilon, cell.mean_diamond, cell.stderr
        );
    }
    let config_echo = serde_json::to_value(&config).or_internal()?;
    emit("noise scan", config_echo, seed, &args.out, csv.as_bytes())?;
    eprintln!(
        "noise scan: {} x {} cells, {} pairs each, wrote {}",
        config.lambdas.len(),
        config.epsilons.len(),
        config.pairs,
        args.out.display()
    );
    Ok(())
}
