use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use polarforge::decoder::{select_output, Algorithm, Decoder, DecoderConfig, FVariant, FastDecoder};
use polarforge::design::{design_nondecreasing, ga_density_evolution, merge_rows, nr_ranking, MergeMode};
use polarforge::experiment::{run_experiment, CodeSpec, Plan, RunOptions};
use polarforge::pretransform::complexity_metrics;
use polarforge::sim::{monte_carlo, union_bound, write_csv, SimConfig};
use polarforge::weight_enum::{code_error_coefficient, Provenance, SpectrumRecord};
use polarforge::BitVector;

const VERSION: &str = env!("POLARFORGE_VERSION");

#[derive(Parser)]
#[command(name = "polarforge", version = VERSION, about = "Pre-transformed polar code design, enumeration and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Non-decreasing row-merged design from a channel ranking
    Design(DesignArgs),
    /// Greedy row-merge selection on the spec's information set
    Merge(MergeArgs),
    /// Exact minimum-weight codeword count
    Enumerate(SpecArg),
    /// Monte-Carlo BLER/BER simulation
    Simulate(SimulateArgs),
    /// Truncated union bound from the enumerated error coefficient
    Bound(BoundArgs),
    /// Decode one frame of LLRs and print the ranked list
    Decode(DecodeArgs),
    /// Code parameters and decoder tree summary
    Info(SpecArg),
    /// Run a JSON experiment plan
    Run(RunArgs),
}

#[derive(Args)]
struct SpecArg {
    #[arg(long)]
    spec: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    Simplified,
}

impl From<ModeArg> for MergeMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => MergeMode::Full,
            ModeArg::Simplified => MergeMode::Simplified,
        }
    }
}

#[derive(Args)]
struct DesignArgs {
    /// log2 of the block length
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    dmin: usize,
    /// GA design Es/N0 in dB
    #[arg(long, conflicts_with = "nr")]
    snr: Option<f64>,
    /// Use the 5G NR reliability sequence
    #[arg(long)]
    nr: bool,
    #[arg(long, value_enum, default_value = "full")]
    mode: ModeArg,
    /// Write the designed code spec to DIR/spec.json
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MergeArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum, default_value = "full")]
    mode: ModeArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Sc,
    Scl,
    Fsscl,
}

#[derive(Clone, Copy, ValueEnum)]
enum FArg {
    MinSum,
    BoxPlus,
}

#[derive(Args)]
struct DecoderArgs {
    #[arg(long, default_value_t = 8)]
    list_size: usize,
    #[arg(long, value_enum, default_value = "fsscl")]
    algorithm: AlgorithmArg,
    #[arg(long = "f", value_enum, default_value = "min-sum")]
    f_variant: FArg,
}

impl DecoderArgs {
    fn config(&self) -> (DecoderConfig, Algorithm) {
        let cfg = DecoderConfig {
            list_size: self.list_size,
            f_variant: match self.f_variant {
                FArg::MinSum => FVariant::MinSum,
                FArg::BoxPlus => FVariant::BoxPlus,
            },
            ..DecoderConfig::default()
        };
        let alg = match self.algorithm {
            AlgorithmArg::Sc => Algorithm::Sc,
            AlgorithmArg::Scl => Algorithm::Scl,
            AlgorithmArg::Fsscl => Algorithm::Fsscl,
        };
        (cfg, alg)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Take the simulation parameters from this plan's "simulate" section
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Comma-separated Eb/N0 points in dB
    #[arg(long, value_delimiter = ',')]
    ebn0: Vec<f64>,
    #[command(flatten)]
    decoder: DecoderArgs,
    #[arg(long, default_value_t = 1000)]
    min_errors: u64,
    #[arg(long, default_value_t = 10_000_000)]
    max_frames: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Fill the seconds column
    #[arg(long)]
    time: bool,
    /// Write DIR/simulate.csv instead of printing
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    ebn0: Vec<f64>,
    /// Extra spectrum term WEIGHT:COUNT above the minimum weight
    #[arg(long = "term")]
    terms: Vec<String>,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    spec: PathBuf,
    /// LLRs as a JSON array or whitespace/comma separated text
    #[arg(long)]
    llr: PathBuf,
    #[command(flatten)]
    decoder: DecoderArgs,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn load_spec(path: &Path) -> Result<CodeSpec> {
    CodeSpec::load(path).with_context(|| format!("reading code spec {}", path.display()))
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_spec(dir: &Path, spec: &CodeSpec) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("spec.json"), serde_json::to_string_pretty(spec)? + "\n")?;
    Ok(())
}

fn bit_string(v: &BitVector) -> String {
    (0..v.len()).map(|i| if v.get(i) { '1' } else { '0' }).collect()
}

fn parse_llrs(text: &str) -> Result<Vec<f64>> {
    if text.trim_start().starts_with('[') {
        return Ok(serde_json::from_str(text)?);
    }
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("bad LLR value {s:?}")))
        .collect()
}

fn parse_term(s: &str) -> Result<SpectrumRecord> {
    let Some((w, c)) = s.split_once(':') else {
        bail!("spectrum term {s:?} is not WEIGHT:COUNT");
    };
    Ok(SpectrumRecord {
        weight: w.trim().parse()?,
        count: c.trim().parse()?,
        provenance: Provenance::Enumerated,
    })
}

fn design(args: DesignArgs) -> Result<()> {
    let ranking = match (args.snr, args.nr) {
        (_, true) => nr_ranking(args.n)?,
        (Some(snr), false) => ga_density_evolution(args.n, snr)?,
        (None, false) => bail!("either --snr or --nr is required"),
    };
    let result = design_nondecreasing(&ranking, args.k, args.dmin, args.mode.into())?;
    let spec = CodeSpec::row_merged(&result.profile, &result.merges);
    if let Some(dir) = &args.out {
        write_spec(dir, &spec)?;
    }
    print_json(&json!({
        "kappa": result.kappa,
        "w_min": result.w_min,
        "A_wmin": result.a_wmin,
        "dmin": result.dmin,
        "minimal_set": result.profile.minimal_set(),
        "spec": spec,
    }))
}

fn merge(args: MergeArgs) -> Result<()> {
    let code = load_spec(&args.spec)?.build()?;
    let result = merge_rows(code.profile(), args.mode.into())?;
    let spec = CodeSpec::row_merged(code.profile(), &result.merges);
    if let Some(dir) = &args.out {
        write_spec(dir, &spec)?;
    }
    print_json(&json!({
        "w_min": result.w_min,
        "A_wmin": result.a_wmin,
        "dmin": result.dmin(),
        "merges": result.merges.pairs(),
        "iterations": result.iterations,
    }))
}

fn enumerate(args: SpecArg) -> Result<()> {
    let code = load_spec(&args.spec)?.build()?;
    let count = code_error_coefficient(&code)?;
    print_json(&json!({
        "w_min": count.w_min,
        "A_wmin": count.count,
        "per_coset": count.per_coset,
    }))
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let code = load_spec(&args.spec)?.build()?;
    let (decoder, algorithm) = args.decoder.config();
    let mut config = SimConfig {
        min_errors: args.min_errors,
        max_frames: args.max_frames,
        seed: args.seed,
        workers: args.workers,
        algorithm,
        decoder,
        noiseless: false,
    };
    let mut points = args.ebn0.clone();
    if let Some(path) = &args.plan {
        let plan = Plan::load(path)?;
        let Some(sim) = plan.simulate else {
            bail!("plan {} has no \"simulate\" section", path.display());
        };
        config.min_errors = sim.min_errors;
        config.max_frames = sim.max_frames;
        config.algorithm = sim.algorithm;
        config.decoder = sim.decoder;
        if points.is_empty() {
            points = sim.ebn0_db;
        }
    }
    if points.is_empty() {
        bail!("no Eb/N0 points given");
    }
    let records = monte_carlo(&code, &points, &config)?;
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let file = fs::File::create(dir.join("simulate.csv"))?;
            write_csv(&records, file, args.time)?;
        }
        None => write_csv(&records, io::stdout().lock(), args.time)?,
    }
    Ok(())
}

fn bound(args: BoundArgs) -> Result<()> {
    let code = load_spec(&args.spec)?.build()?;
    let count = code_error_coefficient(&code)?;
    let mut spectrum = vec![SpectrumRecord {
        weight: count.w_min,
        count: count.count,
        provenance: Provenance::Enumerated,
    }];
    for t in &args.terms {
        spectrum.push(parse_term(t)?);
    }
    let rate = code.k() as f64 / code.len() as f64;
    let mut out = io::stdout().lock();
    writeln!(out, "ebn0_db,union_bound")?;
    for &snr in &args.ebn0 {
        writeln!(out, "{snr},{:e}", union_bound(&spectrum, rate, snr)?)?;
    }
    Ok(())
}

fn decode(args: DecodeArgs) -> Result<()> {
    let code = load_spec(&args.spec)?.build()?;
    let text = fs::read_to_string(&args.llr).with_context(|| format!("reading {}", args.llr.display()))?;
    let llr = parse_llrs(&text)?;
    let (cfg, alg) = args.decoder.config();
    let decoder = Decoder::new(code.clone(), cfg, alg)?;
    let list = decoder.decode(&llr)?;
    let (_, best) = select_output(&list, &code)?;
    let mut paths = Vec::with_capacity(list.len());
    for (rank, p) in list.iter().enumerate() {
        paths.push(json!({
            "rank": rank,
            "pm": p.pm,
            "u": bit_string(&p.u),
            "message": bit_string(&code.message_from_u(&p.u)?),
        }));
    }
    print_json(&json!({ "message": bit_string(&best), "paths": paths }))
}

fn info(args: SpecArg) -> Result<()> {
    let code = load_spec(&args.spec)?.build()?;
    let profile = code.profile();
    let metrics = complexity_metrics(code.transform(), profile)?;
    let fast = FastDecoder::new(&code, DecoderConfig::default())?;
    let mut nodes: BTreeMap<String, usize> = BTreeMap::new();
    for node in fast.tree().nodes() {
        *nodes.entry(format!("{:?}", node.kind).to_lowercase()).or_default() += 1;
    }
    print_json(&json!({
        "N": code.len(),
        "K": code.k(),
        "rate": code.k() as f64 / code.len() as f64,
        "w_min": profile.w_min(),
        "decreasing": profile.is_decreasing(),
        "minimal_set": profile.minimal_set(),
        "pretransform": code.transform().kind(),
        "dynamic_frozen": metrics.dynamic_frozen,
        "xor_ops": metrics.xor_ops,
        "decoder_nodes": nodes,
    }))
}

fn run(args: RunArgs) -> Result<()> {
    let spec = load_spec(&args.spec)?;
    let plan = Plan::load(&args.plan).with_context(|| format!("reading plan {}", args.plan.display()))?;
    let opts = RunOptions {
        out_dir: args.out,
        seed: args.seed,
        workers: args.workers,
        version: VERSION.to_string(),
    };
    let manifest = run_experiment(&spec, &plan, &opts)?;
    for f in manifest.outputs.iter().chain(std::iter::once(&"manifest.json".to_string())) {
        println!("{}", opts.out_dir.join(f).display());
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Design(a) => design(a),
        Command::Merge(a) => merge(a),
        Command::Enumerate(a) => enumerate(a),
        Command::Simulate(a) => simulate(a),
        Command::Bound(a) => bound(a),
        Command::Decode(a) => decode(a),
        Command::Info(a) => info(a),
        Command::Run(a) => run(a),
    }
}
