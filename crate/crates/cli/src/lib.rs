//! `levymap` command-line workflows.
//!
//! Every command writes its outputs atomically and a `<out>.manifest.json` listing the
//! arguments, input hashes, seed and output hashes. Exit codes: 0 success, 1 negative
//! verdict (failed comparison or decision `no`), 2 usage error, 3 runtime error,
//! 4 inconclusive classification.

pub mod inputs;
pub mod io;
pub mod manifest;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use inputs::{load_dist, load_json, target_exponent, MapDescriptor};
use io::{exponent_csv, json_bytes, read_samples_csv, real_value, samples_csv};
use levymap::classify::{check_iv, corollary2_check, factorization_check, ClassifyOptions, Decision, RadiiGrid};
use levymap::simulate::{sample_increment, sample_integral, sample_maflp, SimConfig, SmallJumpMode};
use levymap::verify::compare;
use levymap::Descriptor;
use manifest::RunManifest;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ERROR: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "levymap", version, about = "Random integral mappings of infinitely divisible laws")]
pub struct Cli {
    /// Worker threads for sampling and quadrature.
    #[arg(long, global = true, env = "LEVYMAP_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply a mapping to a law; write the result and its exponent table.
    Transform(TransformArgs),
    /// Decide whether the mapped law of a distribution is selfdecomposable.
    Classify(ClassifyArgs),
    /// Sample increments or a random integral.
    Simulate(SimulateArgs),
    /// Sample the fractional process marginal Z(t) = V(t) + U(t).
    Maflp(MaflpArgs),
    /// Compare samples with a target law through the empirical characteristic function.
    Verify(VerifyArgs),
    /// Rerun a manifest and check that every output reproduces.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Distribution descriptor: JSON file, inline JSON, or `gaussian` / `gamma`.
    #[arg(long)]
    pub dist: String,
    /// Mapping descriptor, e.g. `{"map": "jbeta", "beta": 1}`.
    #[arg(long)]
    pub map: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Exponent table; defaults to the output path with a `.csv` extension.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub dist: String,
    #[arg(long)]
    pub beta: f64,
    /// Candidate witness to check against the distribution as well.
    #[arg(long)]
    pub witness: Option<String>,
    /// Radii per ray in the base grid.
    #[arg(long, default_value_t = 512)]
    pub points: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SmallJumps {
    DriftOnly,
    GaussianApprox,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long)]
    pub dist: String,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Small-jump truncation radius.
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    #[arg(long, default_value_t = 256)]
    pub steps: usize,
    /// Half-line truncation; derived from the tail certificate when absent.
    #[arg(long)]
    pub b_max: Option<f64>,
    #[arg(long, value_enum, default_value_t = SmallJumps::GaussianApprox)]
    pub small_jumps: SmallJumps,
    #[arg(long)]
    pub out: PathBuf,
}

impl SimArgs {
    fn config(&self) -> SimConfig {
        SimConfig {
            seed: self.seed,
            n_samples: self.n as usize,
            jump_truncation: self.eps,
            n_time_steps: self.steps,
            b_max: self.b_max,
            small_jump_mode: match self.small_jumps {
                SmallJumps::DriftOnly => SmallJumpMode::DriftOnly,
                SmallJumps::GaussianApprox => SmallJumpMode::GaussianApprox,
            },
            ..SimConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    /// Mapping to integrate; without it, increments over `--dt` are sampled.
    #[arg(long)]
    pub spec: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
}

#[derive(Debug, Args)]
pub struct MaflpArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub t: f64,
    /// Also write the V and U parts next to the output.
    #[arg(long)]
    pub parts: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub samples: PathBuf,
    /// Distribution descriptor or `{"law": ...}` target.
    #[arg(long)]
    pub target: String,
    #[arg(long, default_value_t = levymap::verify::DEFAULT_CONFIDENCE)]
    pub confidence: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

/// Run with full argument list (including the program name); returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let recorded: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    match pool.install(|| execute(cli.command, recorded)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn execute(command: Command, recorded: Vec<String>) -> Result<i32> {
    let mut m = RunManifest::new(recorded);
    let (code, primary) = match command {
        Command::Transform(a) => (transform(&a, &mut m)?, a.out),
        Command::Classify(a) => (classify(&a, &mut m)?, a.out),
        Command::Simulate(a) => (simulate(&a, &mut m)?, a.sim.out),
        Command::Maflp(a) => (maflp(&a, &mut m)?, a.sim.out),
        Command::Verify(a) => (verify(&a, &mut m)?, a.out),
        Command::Replay(a) => return replay(&a),
    };
    m.write(&RunManifest::path_for(&primary))?;
    Ok(code)
}

fn transform(a: &TransformArgs, m: &mut RunManifest) -> Result<i32> {
    let (nu, dist) = load_dist(&a.dist)?;
    let map_in = load_json(&a.map)?;
    m.input("dist", &dist.bytes);
    m.input("map", &map_in.bytes);
    let map = MapDescriptor::from_value(&map_in.value)?;
    let (result, method) = match map.closed_form(&nu) {
        Some(t) => (Some(t?), "closed_form"),
        None => (None, "quadrature"),
    };
    let phi = match &result {
        Some(t) => levymap::exponent_of(t)?,
        None => map.exponent(&nu)?,
    };
    let table_path = a.table.clone().unwrap_or_else(|| a.out.with_extension("csv"));
    m.emit(&table_path, &exponent_csv(phi.grid().points(), phi.probe_values()?)?)?;
    let out = json!({
        "input": dist.value,
        "map": map_in.value,
        "method": method,
        "result": result.as_ref().map(|t| Descriptor::of_triple(t).to_value()),
        "exponent_table": table_path,
    });
    m.emit(&a.out, &json_bytes(&out))?;
    Ok(EXIT_OK)
}

fn classify(a: &ClassifyArgs, m: &mut RunManifest) -> Result<i32> {
    let (nu, dist) = load_dist(&a.dist)?;
    m.input("dist", &dist.bytes);
    let opts = ClassifyOptions { grid: RadiiGrid { points: a.points, ..RadiiGrid::default() }, ..ClassifyOptions::default() };
    let r = check_iv(&nu, a.beta, &opts)?;
    let mut code = match r.decision {
        Decision::Yes => EXIT_OK,
        Decision::No => EXIT_NEGATIVE,
        Decision::Inconclusive => EXIT_INCONCLUSIVE,
    };
    let mut report = json!({
        "beta": a.beta,
        "decision": r.decision,
        "witness": r.witness.as_ref().map(|w| Descriptor::of_triple(w).to_value()),
        "failure_evidence": r.failure_evidence.as_ref().map(|f| json!({
            "ray": f.ray,
            "direction": f.direction,
            "interval": [f.interval_lo, f.interval_hi.map_or(json!("inf"), |h| json!(h))],
            "mass": f.mass,
        })),
        "log_moment_value": real_value(r.log_moment_value),
        "margins": r.margins,
        "refinement_hint": r.refinement_hint,
        "scope_note": r.scope_note,
    });
    if let Some(w) = &a.witness {
        let (rho, win) = load_dist(w)?;
        m.input("witness", &win.bytes);
        let fact = factorization_check(&nu, &rho, a.beta)?;
        let c2 = corollary2_check(&nu, &rho, a.beta)?;
        if !(fact.pass && c2.pass) {
            code = EXIT_NEGATIVE;
        }
        report["supplied_witness"] = json!({"factorization": fact, "triple_relations": c2});
    }
    m.emit(&a.out, &json_bytes(&report))?;
    Ok(code)
}

fn simulate(a: &SimulateArgs, m: &mut RunManifest) -> Result<i32> {
    let cfg = a.sim.config();
    let (nu, dist) = load_dist(&a.sim.dist)?;
    m.input("dist", &dist.bytes);
    m.seed = Some(cfg.seed);
    let batch = match &a.spec {
        Some(s) => {
            let spec_in = load_json(s)?;
            m.input("spec", &spec_in.bytes);
            sample_integral(&MapDescriptor::from_value(&spec_in.value)?.spec()?, &nu, &cfg)?
        }
        None => sample_increment(&nu, a.dt, &cfg, cfg.n_samples)?,
    };
    m.emit(&a.sim.out, &samples_csv(&batch)?)?;
    Ok(EXIT_OK)
}

fn sibling(out: &Path, part: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{part}.csv"))
}

fn maflp(a: &MaflpArgs, m: &mut RunManifest) -> Result<i32> {
    let cfg = a.sim.config();
    let (nu, dist) = load_dist(&a.sim.dist)?;
    m.input("dist", &dist.bytes);
    m.seed = Some(cfg.seed);
    let s = sample_maflp(&nu, a.alpha, a.t, &cfg)?;
    m.emit(&a.sim.out, &samples_csv(&s.z)?)?;
    if a.parts {
        m.emit(&sibling(&a.sim.out, "v"), &samples_csv(&s.v)?)?;
        m.emit(&sibling(&a.sim.out, "u"), &samples_csv(&s.u)?)?;
    }
    Ok(EXIT_OK)
}

fn verify(a: &VerifyArgs, m: &mut RunManifest) -> Result<i32> {
    let text = std::fs::read(&a.samples)?;
    m.input("samples", &text);
    let batch = read_samples_csv(std::str::from_utf8(&text)?)?;
    let target_in = load_json(&a.target).or_else(|e| {
        // bare distribution shorthands are accepted as targets too
        let v = Value::String(a.target.clone());
        target_exponent(&v).map(|_| inputs::JsonInput { bytes: a.target.as_bytes().to_vec(), value: v }).map_err(|_| e)
    })?;
    m.input("target", &target_in.bytes);
    let phi = target_exponent(&target_in.value)?;
    if phi.dim() != batch.dim() {
        bail!("target dimension {} does not match samples of dimension {}", phi.dim(), batch.dim());
    }
    let report = compare(&batch, &phi, a.confidence)?;
    let mut v = serde_json::to_value(&report)?;
    v["max_gap"] = json!(report.max_gap());
    v["failures"] = json!(report.failures());
    m.emit(&a.out, &json_bytes(&v))?;
    Ok(if report.pass { EXIT_OK } else { EXIT_NEGATIVE })
}

fn replay(a: &ReplayArgs) -> Result<i32> {
    let recorded = RunManifest::read(&a.manifest)?;
    let code = run(std::iter::once("levymap".to_string()).chain(recorded.command_line.iter().cloned()));
    if code == EXIT_ERROR || code == EXIT_USAGE {
        bail!("replayed command failed with exit code {code}");
    }
    let bad = recorded.mismatches();
    for p in &bad {
        eprintln!("output differs from manifest: {}", p.display());
    }
    // the replay rewrote the manifest; restore the recorded one
    recorded.write(&a.manifest)?;
    Ok(if bad.is_empty() { EXIT_OK } else { EXIT_NEGATIVE })
}
