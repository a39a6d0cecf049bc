//! `frac-hopfield` command line front end.
//!
//! Every command reads a strict JSON config (unknown keys are rejected),
//! validates it completely, and only then computes. Outputs are written
//! through a temporary file in the target directory and renamed into place.
//! CSV outputs get a `<stem>.meta.json` sidecar next to them.
//!
//! Exit status: 0 on success, 1 on domain errors (degenerate spectra,
//! non-uniform coefficients, failed root finding), 2 on configuration
//! errors.

use crate::equilibrium::{find_equilibrium, EquilibriumState, DEDUP_RADIUS, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::Error;
use crate::hub::{hub_coefficients, hub_critical_order, HubAnalysis};
use crate::model::{NetworkSpec, TopologyTag};
use crate::ring::{
    circulant_eigenvalues, density_scan, ring_coefficients, ring_critical_order, ring_sufficient_stable,
    RingCoefficients,
};
use crate::sim::{
    abm_simulate, classify_tail, ring_attractor_check, MemoryPolicy, RingAttractorReport, SimConfig, TailClass,
    TailCriteria,
};
use crate::spectral::{analyze, JacobianM, StableFor, Verdict};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "frac-hopfield", version, about = "Stability and trajectories of complex-valued fractional-order Hopfield networks")]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stability report of one equilibrium.
    Analyze(AnalyzeArgs),
    /// Trajectory from the fractional integrator.
    Simulate(SimulateArgs),
    /// Critical-order density over the (theta1, theta2) torus for unit-circle rings.
    Scan(ScanArgs),
    /// Newton solves from a list of seeds.
    Equilibria(EquilibriaArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// JSON report path; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Closed-form analysis to run in addition to the dense spectrum.
    #[arg(long, value_enum, default_value_t = TopologyArg::Auto)]
    pub topology: TopologyArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TopologyArg {
    Auto,
    General,
    Hub,
    Ring,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for random initial perturbations.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Config with `n` and `resolution`; the flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EquilibriaArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for randomly drawn Newton starts.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Config(String),
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Domain(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidNetwork(_) | Error::InvalidArgument(_) | Error::StateLength { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Domain(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub network: NetworkSpec,
    /// Equilibrium to linearize at. When absent, Newton starts from `0`.
    #[serde(default)]
    pub equilibrium: Option<Vec<Complex64>>,
    /// Orders at which to report a verdict.
    #[serde(default)]
    pub q: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub network: NetworkSpec,
    pub q: f64,
    pub h: f64,
    pub t_end: f64,
    #[serde(default)]
    pub memory: MemoryPolicy,
    /// Explicit initial state.
    #[serde(default)]
    pub z0: Option<Vec<Complex64>>,
    /// Draw each component of `z0` uniformly from the square
    /// `[-r, r] x [-r, r]` using the seed.
    #[serde(default)]
    pub perturbation: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tail: Option<TailCriteria>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub n: usize,
    pub resolution: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSeeds {
    pub count: usize,
    pub radius: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriaConfig {
    pub network: NetworkSpec,
    #[serde(default)]
    pub seeds: Vec<Vec<Complex64>>,
    #[serde(default)]
    pub random_seeds: Option<RandomSeeds>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

pub fn read_config<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn check_network(spec: &NetworkSpec) -> CliResult<()> {
    let v = spec.validate();
    if v.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(format!("invalid network: {}", v.join("; "))))
    }
}

fn check_output(path: &Path) -> CliResult<()> {
    let dir = parent_dir(path);
    if !dir.is_dir() {
        return Err(CliError::Config(format!("output directory {} does not exist", dir.display())));
    }
    if path.is_dir() {
        return Err(CliError::Config(format!("output path {} is a directory", path.display())));
    }
    Ok(())
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Config(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(parent_dir(path)).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// `traj.csv` -> `traj.meta.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(value).expect("serializable report");
    s.push(b'\n');
    s
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize)]
struct VerdictAt {
    q: f64,
    verdict: Verdict,
}

#[derive(Serialize)]
struct RingReport {
    coefficients: RingCoefficients,
    eigenvalues: Vec<Complex64>,
    q_star: f64,
    sufficient_condition: bool,
}

#[derive(Serialize)]
struct AnalyzeReport {
    topology: TopologyTag,
    equilibrium: EquilibriumState,
    jacobian: Vec<Vec<Complex64>>,
    eigenvalues: Vec<Complex64>,
    args: Vec<f64>,
    q_star: Option<f64>,
    stable_for: StableFor,
    hopf_candidate: bool,
    degenerate: bool,
    verdict_at_q: Vec<VerdictAt>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hub: Option<HubAnalysis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ring: Option<RingReport>,
}

fn jacobian_rows(m: &JacobianM) -> Vec<Vec<Complex64>> {
    (0..m.m.nrows()).map(|i| m.m.row(i).iter().copied().collect()).collect()
}

pub fn run_analyze(args: &AnalyzeArgs) -> CliResult<()> {
    let cfg: AnalyzeConfig = read_config(&args.config)?;
    check_network(&cfg.network)?;
    if let Some(bad) = cfg.q.iter().find(|q| !(**q > 0.0 && **q < 1.0)) {
        return Err(CliError::Config(format!("q must lie in (0, 1), got {bad}")));
    }
    if let Some(out) = &args.out {
        check_output(out)?;
    }
    let spec = &cfg.network;
    let eq = match &cfg.equilibrium {
        Some(z) => EquilibriumState::evaluate(spec, z.clone())?,
        None => {
            let eq = find_equilibrium(spec, &vec![Complex64::new(0.0, 0.0); spec.n], DEFAULT_TOL, DEFAULT_MAX_ITER)?;
            if !eq.converged {
                return Err(CliError::Domain(format!(
                    "no equilibrium found from the origin (residual {:e})",
                    eq.residual_norm
                )));
            }
            eq
        }
    };
    let (m, report) = analyze(spec, &eq)?;
    let topology = spec.classify_topology();
    let want = match args.topology {
        TopologyArg::Auto => topology,
        TopologyArg::General => TopologyTag::General,
        TopologyArg::Hub => TopologyTag::Hub,
        TopologyArg::Ring => TopologyTag::Ring,
    };
    let hub = match want {
        TopologyTag::Hub => Some(hub_critical_order(&hub_coefficients(spec, &eq)?)?),
        _ => None,
    };
    let ring = match want {
        TopologyTag::Ring => {
            let k = ring_coefficients(spec, &eq)?;
            Some(RingReport {
                coefficients: k,
                eigenvalues: circulant_eigenvalues(&k),
                q_star: ring_critical_order(&k)?,
                sufficient_condition: ring_sufficient_stable(&k),
            })
        }
        _ => None,
    };
    let out = AnalyzeReport {
        topology,
        jacobian: jacobian_rows(&m),
        equilibrium: eq,
        verdict_at_q: cfg.q.iter().map(|&q| VerdictAt { q, verdict: report.verdict(q) }).collect(),
        eigenvalues: report.eigenvalues.clone(),
        args: report.args.clone(),
        q_star: report.q_star,
        stable_for: report.stable_for,
        hopf_candidate: report.hopf_candidate,
        degenerate: report.degenerate,
        hub,
        ring,
    };
    let bytes = to_json(&out);
    match &args.out {
        Some(p) => write_atomic(p, &bytes),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::Config(format!("stdout: {e}"))),
    }
}

/// Seeded initial state in the square of half-width `radius` around 0.
pub fn random_state(n: usize, radius: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-radius..=radius), rng.random_range(-radius..=radius)))
        .collect()
}

#[derive(Serialize)]
struct SimulateMeta {
    config: SimConfig,
    seed: Option<u64>,
    z0: Vec<Complex64>,
    samples: usize,
    diverged: bool,
    tail: TailCriteria,
    classification: Option<TailClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    classification_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ring_attractor: Option<RingAttractorReport>,
}

pub fn run_simulate(args: &SimulateArgs) -> CliResult<()> {
    let cfg: SimulateConfig = read_config(&args.config)?;
    check_network(&cfg.network)?;
    let sim = SimConfig {
        q: cfg.q,
        h: cfg.h,
        t_end: cfg.t_end,
        memory: cfg.memory,
    };
    sim.validate()?;
    let tail = cfg.tail.unwrap_or_default();
    if !(tail.window_fraction > 0.0 && tail.window_fraction < 1.0) {
        return Err(CliError::Config(format!(
            "window_fraction must lie in (0, 1), got {}",
            tail.window_fraction
        )));
    }
    check_output(&args.out)?;
    let n = cfg.network.n;
    let seed = args.seed.or(cfg.seed);
    let z0 = match (&cfg.z0, cfg.perturbation) {
        (Some(z), None) => {
            if z.len() != n {
                return Err(CliError::Config(format!("z0 has {} components, network has {n}", z.len())));
            }
            z.clone()
        }
        (None, Some(r)) if r > 0.0 && r.is_finite() => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
            random_state(n, r, &mut rng)
        }
        (None, Some(r)) => return Err(CliError::Config(format!("perturbation must be > 0, got {r}"))),
        _ => return Err(CliError::Config("give exactly one of z0 and perturbation".into())),
    };
    let seed = if cfg.perturbation.is_some() { Some(seed.unwrap_or(0)) } else { seed };

    let traj = abm_simulate(&cfg.network, &z0, &sim)?;
    let mut csv = String::from("t");
    for k in 1..=n {
        write!(csv, ",z{k}_re,z{k}_im").unwrap();
    }
    csv.push('\n');
    for (t, s) in traj.times.iter().zip(&traj.states) {
        csv.push_str(&fmt_f64(*t));
        for z in s {
            write!(csv, ",{},{}", fmt_f64(z.re), fmt_f64(z.im)).unwrap();
        }
        csv.push('\n');
    }
    let (classification, classification_error) = match classify_tail(&traj, &tail) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let ring_attractor = (cfg.network.classify_topology() == TopologyTag::Ring).then(|| ring_attractor_check(&traj));
    let meta = SimulateMeta {
        config: sim,
        seed,
        z0,
        samples: traj.len(),
        diverged: traj.diverged,
        tail,
        classification,
        classification_error,
        ring_attractor,
    };
    write_atomic(&args.out, csv.as_bytes())?;
    write_atomic(&sidecar_path(&args.out), &to_json(&meta))
}

#[derive(Serialize)]
struct ScanMeta {
    n: usize,
    resolution: usize,
    rows: usize,
    layout: &'static str,
    theta_min: f64,
    theta_max: f64,
    stable_cells: usize,
}

pub fn run_scan(args: &ScanArgs) -> CliResult<()> {
    let from_file: Option<ScanConfig> = args.config.as_deref().map(read_config).transpose()?;
    let n = args
        .n
        .or(from_file.as_ref().map(|c| c.n))
        .ok_or_else(|| CliError::Config("scan needs --n or a config".into()))?;
    let resolution = args
        .resolution
        .or(from_file.as_ref().map(|c| c.resolution))
        .ok_or_else(|| CliError::Config("scan needs --resolution or a config".into()))?;
    if n < 3 {
        return Err(CliError::Config(format!("a ring needs n >= 3, got {n}")));
    }
    if resolution < crate::ring::MIN_RESOLUTION {
        return Err(CliError::Config(format!(
            "resolution must be at least {}, got {resolution}",
            crate::ring::MIN_RESOLUTION
        )));
    }
    check_output(&args.out)?;
    let grid = density_scan(n, resolution)?;
    let mut csv = String::from("theta1,theta2,q_star,stable_all_q\n");
    let mut stable_cells = 0;
    for (t1, t2, q) in grid.cells() {
        let stable = q >= 1.0;
        stable_cells += stable as usize;
        writeln!(csv, "{},{},{},{stable}", fmt_f64(t1), fmt_f64(t2), fmt_f64(q)).unwrap();
    }
    let meta = ScanMeta {
        n,
        resolution,
        rows: resolution * resolution,
        layout: "row-major, theta1 outer, cell centers",
        theta_min: grid.thetas[0],
        theta_max: grid.thetas[resolution - 1],
        stable_cells,
    };
    write_atomic(&args.out, csv.as_bytes())?;
    write_atomic(&sidecar_path(&args.out), &to_json(&meta))
}

#[derive(Serialize)]
struct EquilibriaMeta {
    seed: Option<u64>,
    starts: usize,
    converged: usize,
    tol: f64,
    max_iter: usize,
    /// Converged roots, duplicates within the merge radius removed.
    distinct_roots: Vec<Vec<Complex64>>,
}

pub fn run_equilibria(args: &EquilibriaArgs) -> CliResult<()> {
    let cfg: EquilibriaConfig = read_config(&args.config)?;
    check_network(&cfg.network)?;
    let n = cfg.network.n;
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(CliError::Config(format!("tol must be > 0, got {}", cfg.tol)));
    }
    if let Some(bad) = cfg.seeds.iter().find(|s| s.len() != n) {
        return Err(CliError::Config(format!("seed has {} components, network has {n}", bad.len())));
    }
    let mut starts = cfg.seeds.clone();
    let seed = args.seed.or(cfg.seed);
    let mut used_seed = seed;
    if let Some(r) = &cfg.random_seeds {
        if !(r.radius > 0.0 && r.radius.is_finite()) {
            return Err(CliError::Config(format!("random_seeds.radius must be > 0, got {}", r.radius)));
        }
        let s = seed.unwrap_or(0);
        used_seed = Some(s);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        starts.extend((0..r.count).map(|_| random_state(n, r.radius, &mut rng)));
    }
    if starts.is_empty() {
        return Err(CliError::Config("no Newton starts: give seeds or random_seeds".into()));
    }
    check_output(&args.out)?;

    let mut csv = String::new();
    let header: Vec<String> = (1..=n)
        .flat_map(|k| [format!("seed{k}_re"), format!("seed{k}_im")])
        .chain((1..=n).flat_map(|k| [format!("root{k}_re"), format!("root{k}_im")]))
        .chain(["residual".to_string(), "converged".to_string()])
        .collect();
    csv.push_str(&header.join(","));
    csv.push('\n');
    let mut distinct: Vec<Vec<Complex64>> = Vec::new();
    let mut converged = 0;
    for s in &starts {
        let eq = find_equilibrium(&cfg.network, s, cfg.tol, cfg.max_iter)?;
        for z in s.iter().chain(&eq.z) {
            write!(csv, "{},{},", fmt_f64(z.re), fmt_f64(z.im)).unwrap();
        }
        writeln!(csv, "{},{}", fmt_f64(eq.residual_norm), eq.converged).unwrap();
        if eq.converged {
            converged += 1;
            let dup = distinct.iter().any(|d| {
                d.iter()
                    .zip(&eq.z)
                    .all(|(a, b)| (a.re - b.re).abs().max((a.im - b.im).abs()) < DEDUP_RADIUS)
            });
            if !dup {
                distinct.push(eq.z);
            }
        }
    }
    let meta = EquilibriaMeta {
        seed: used_seed,
        starts: starts.len(),
        converged,
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        distinct_roots: distinct,
    };
    write_atomic(&args.out, csv.as_bytes())?;
    write_atomic(&sidecar_path(&args.out), &to_json(&meta))
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Analyze(a) => run_analyze(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Scan(a) => run_scan(a),
        Command::Equilibria(a) => run_equilibria(a),
    })
}

/// Parses `args` (including the program name) and runs; returns the exit
/// status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
