//! Command-line driver: argument model, config merging and record output.

mod commands;
mod report;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use nullcode::Budget;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(nullcode::Error),
}

impl From<nullcode::Error> for CliError {
    fn from(e: nullcode::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Lib(e.into())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Parser, Debug)]
#[command(name = "nullcode", version, about = "Experiments on the bipartite null-codeword problem")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Global {
    /// Base seed; trial `i` uses `seed + i`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1)]
    pub trials: usize,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Amplitude budget for simulated states.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Output path (JSON-lines records, generated file, or report directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// CSV summary of the emitted records.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// JSON object of flag values; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

impl Global {
    pub fn budget(&self) -> Budget {
        let b = Budget::default();
        match self.budget {
            Some(a) => b.with_amplitudes(a),
            None => b,
        }
    }
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Codes, duals, decoding and list recovery.
    #[command(subcommand)]
    Code(CodeCmd),
    /// Oracle instances.
    #[command(subcommand)]
    Instance(InstanceCmd),
    /// Exact quantum simulation.
    #[command(subcommand)]
    Qsim(QsimCmd),
    /// Classical protocol trees.
    #[command(subcommand)]
    Proto(ProtoCmd),
    /// Polynomial hash family.
    #[command(subcommand)]
    Hash(HashCmd),
    /// The total problem.
    #[command(subcommand)]
    Tbnc(TbncCmd),
    /// Aggregate JSON-lines result files.
    Report(ReportArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Toy {
    #[value(name = "self-dual-8-4")]
    #[serde(rename = "self-dual-8-4")]
    SelfDual84,
}

/// Code selection: exactly one of `--t`, `--toy`, `--code`.
#[derive(Args, Debug, Clone, Serialize)]
pub struct CodeArgs {
    /// Preset folded Reed-Solomon code.
    #[arg(long)]
    pub t: Option<u32>,
    #[arg(long, value_enum)]
    pub toy: Option<Toy>,
    /// Code description (JSON).
    #[arg(long)]
    pub code: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Good {
    SymbolWeight,
    Maximal,
}

impl From<Good> for nullcode::qsim::GoodSet {
    fn from(g: Good) -> Self {
        match g {
            Good::SymbolWeight => nullcode::qsim::GoodSet::SymbolWeight,
            Good::Maximal => nullcode::qsim::GoodSet::Maximal,
        }
    }
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeCmd {
    /// Parameters of the preset family.
    Preset {
        #[arg(long)]
        t: u32,
    },
    /// Dual code and its consistency checks.
    Dual {
        #[command(flatten)]
        code: CodeArgs,
    },
    /// Dual decoder on random noisy dual codewords, or on `--word`.
    Decode {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value = "2^-6")]
        p: String,
        #[arg(long, default_value_t = nullcode::codes::DEFAULT_EPSILON)]
        epsilon: f64,
        /// Comma-separated unfolded word.
        #[arg(long)]
        word: Option<String>,
    },
    /// Exact list-recovery counts for random candidate sets.
    Listrec {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value_t = 0.4)]
        zeta: f64,
        /// Candidate set size per coordinate.
        #[arg(long, default_value_t = 1)]
        ell: u64,
    },
    /// List-recoverability parameter inequalities.
    Lrcheck {
        #[arg(long = "big-n")]
        big_n: f64,
        #[arg(long)]
        m: f64,
        #[arg(long)]
        k: f64,
        #[arg(long)]
        ell: f64,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 0.4)]
        zeta: f64,
        #[arg(long)]
        q: f64,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceCmd {
    /// Sample an oracle instance and write it to `--out`.
    Gen {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value = "2^-6")]
        p: String,
        /// Also store uniform unfolded blocks (requires `p = 2^-b`).
        #[arg(long)]
        unfolded: bool,
    },
    /// Check a word against an instance.
    Verify {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        word: String,
    },
    /// Brute-force all solutions.
    Solve {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 16)]
        limit: usize,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QsimCmd {
    /// QFT unitarity, and the Fourier support of the code state.
    Qft {
        /// Field degrees `s` (q = 2^s) to check.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1u32, 2, 4])]
        s: Vec<u32>,
        #[command(flatten)]
        code: CodeArgs,
    },
    /// Exact error terms and distance of the processing stage.
    Lemma51 {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value = "1/16")]
        p: String,
        #[arg(long, value_enum, default_value = "symbol-weight")]
        good: Good,
    },
    /// Full protocol on sampled (or all-zero) oracles.
    Alg1 {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value = "1/16")]
        p: String,
        #[arg(long, value_enum, default_value = "symbol-weight")]
        good: Good,
        /// Use the all-zero oracle.
        #[arg(long)]
        zero: bool,
    },
    /// Mean of `|Ŵ(0)|^2` over biased tables.
    Claim66 {
        /// Field degree `s` with `Σ = F_{2^s}^m`.
        #[arg(long, default_value_t = 1)]
        s: u32,
        #[arg(long)]
        sigma: u64,
        #[arg(long)]
        p: String,
        /// Monte Carlo sample count (exact enumeration when absent).
        #[arg(long)]
        samples: Option<u64>,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtoCmd {
    /// Density-restoring partitions of random sets.
    Drp {
        #[arg(long, default_value_t = 12)]
        bits: u32,
        #[arg(long, default_value_t = 0.8)]
        gamma: f64,
        /// Inclusion probability of each point.
        #[arg(long, default_value_t = 0.5)]
        density: f64,
    },
    /// Subcube-like transformation of random trees.
    Transform {
        #[arg(long, default_value_t = 6)]
        bits: u32,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 0.8)]
        gamma: f64,
        #[arg(long, default_value_t = 4)]
        labels: u64,
        /// Sampled input pairs when exhaustive comparison is too large.
        #[arg(long, default_value_t = 100_000)]
        pairs: u64,
    },
    /// Abort and verification rounds on transformed zero-pair trees.
    Cleanup {
        #[arg(long, default_value_t = 6)]
        bits: u32,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 0.8)]
        gamma: f64,
        /// Abort parameter (default: the tree's measured error).
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Run a stored tree on one input pair.
    Run {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        x: u32,
        #[arg(long)]
        y: u32,
    },
    /// Dangerous-codeword sets along random trees.
    Danger {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Sampled input pairs when exhaustive runs are too large.
        #[arg(long, default_value_t = 4096)]
        inputs: usize,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HashCmd {
    /// Exact independence at the first `λ` points and key linearity.
    Check {
        #[arg(long, default_value_t = 4)]
        r: u32,
        #[arg(long, default_value_t = 2)]
        lambda: usize,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        sigma: u64,
    },
    /// Gaussian-elimination key recovery on single instances.
    Attack {
        #[command(flatten)]
        code: CodeArgs,
        /// Independence parameter (default `n^2`).
        #[arg(long)]
        lambda: Option<usize>,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TbncCmd {
    /// Sample an instance and write it to `--out`.
    Gen {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long = "copies", default_value_t = nullcode::tbnc::DEFAULT_T)]
        copies: usize,
        #[arg(long)]
        lambda: Option<usize>,
    },
    /// Check a key and solutions.
    Verify {
        #[arg(long)]
        file: PathBuf,
        /// Comma-separated key coefficients.
        #[arg(long)]
        key: String,
        /// Semicolon-separated unfolded words.
        #[arg(long)]
        solutions: String,
    },
    /// Quantum protocol for the total problem.
    Alg2 {
        #[command(flatten)]
        code: CodeArgs,
        /// Stored instance (otherwise one is sampled per trial).
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long = "copies", default_value_t = nullcode::tbnc::DEFAULT_T)]
        copies: usize,
        #[arg(long)]
        lambda: Option<usize>,
        /// All-zero oracles.
        #[arg(long)]
        zero_oracle: bool,
        /// Force the zero key.
        #[arg(long)]
        zero_key: bool,
        #[arg(long, default_value_t = nullcode::tbnc::DEFAULT_RETRY_CAP)]
        retry_cap: usize,
        #[arg(long, value_enum, default_value = "symbol-weight")]
        good: Good,
    },
    /// Existence of good keys over sampled inputs.
    Totality {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long = "copies", default_value_t = 1)]
        copies: usize,
        #[arg(long)]
        lambda: Option<usize>,
        #[arg(long, default_value_t = 200)]
        h_samples: usize,
        /// Uniform keys per input besides the zero key.
        #[arg(long, default_value_t = 0)]
        keys: usize,
        /// Scan the whole key space.
        #[arg(long)]
        all_keys: bool,
    },
    /// `2^r · suc^t`.
    UnionBound {
        #[arg(long)]
        r: u32,
        #[arg(long = "copies")]
        copies: u64,
        #[arg(long)]
        suc: f64,
    },
}

#[derive(Args, Debug, Serialize)]
pub struct ReportArgs {
    /// Glob of JSON-lines result files.
    #[arg(long)]
    pub glob: String,
}

/// Appends `--flag value` for every config entry whose flag is absent.
fn inject_config(mut argv: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let strs: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let path = strs.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            strs.get(i + 1).cloned()
        } else {
            a.strip_prefix("--config=").map(str::to_owned)
        }
    });
    let Some(path) = path else { return Ok(argv) };
    let text = std::fs::read_to_string(&path).map_err(|e| usage(format!("--config {path}: {e}")))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| usage(format!("--config {path}: {e}")))?;
    let Value::Object(map) = value else {
        return Err(usage(format!("--config {path}: expected a JSON object")));
    };
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        if strs.iter().any(|a| a == &flag || a.starts_with(&format!("{flag}="))) {
            continue;
        }
        let scalar = |v: &Value| match v {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            _ => Err(usage(format!("--config {path}: unsupported value for {flag}"))),
        };
        match &v {
            Value::Bool(true) => argv.push(flag.clone().into()),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts = items.iter().map(scalar).collect::<CliResult<Vec<_>>>()?;
                argv.push(flag.clone().into());
                argv.push(parts.join(",").into());
            }
            other => {
                argv.push(flag.clone().into());
                argv.push(scalar(other)?.into());
            }
        }
    }
    Ok(argv)
}

/// JSON-lines writer that also keeps results for the CSV summary.
pub struct Sink {
    out: Box<dyn Write>,
    command: String,
    config: Value,
    results: Vec<Value>,
}

impl Sink {
    pub fn new(command: &str, config: Value, out: Option<&PathBuf>) -> CliResult<Self> {
        let out: Box<dyn Write> = match out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        Ok(Sink { out, command: command.to_owned(), config, results: Vec::new() })
    }

    pub fn emit(&mut self, trial: usize, seed: u64, result: impl Serialize) -> CliResult<()> {
        let result = serde_json::to_value(result).map_err(nullcode::Error::from)?;
        let record = json!({
            "command": self.command,
            "trial": trial,
            "seed": seed,
            "config": self.config,
            "result": result,
        });
        writeln!(self.out, "{record}")?;
        self.results.push(result);
        Ok(())
    }

    pub fn finish(mut self, csv: Option<&PathBuf>) -> CliResult<()> {
        self.out.flush()?;
        if let Some(path) = csv {
            let rows = report::summarize(&self.command, &self.results);
            report::write_summary(path, &rows)?;
        }
        Ok(())
    }
}

fn command_name(cmd: &Command) -> String {
    let sub = match cmd {
        Command::Code(c) => match c {
            CodeCmd::Preset { .. } => "preset",
            CodeCmd::Dual { .. } => "dual",
            CodeCmd::Decode { .. } => "decode",
            CodeCmd::Listrec { .. } => "listrec",
            CodeCmd::Lrcheck { .. } => "lrcheck",
        },
        Command::Instance(c) => match c {
            InstanceCmd::Gen { .. } => "gen",
            InstanceCmd::Verify { .. } => "verify",
            InstanceCmd::Solve { .. } => "solve",
        },
        Command::Qsim(c) => match c {
            QsimCmd::Qft { .. } => "qft",
            QsimCmd::Lemma51 { .. } => "lemma51",
            QsimCmd::Alg1 { .. } => "alg1",
            QsimCmd::Claim66 { .. } => "claim66",
        },
        Command::Proto(c) => match c {
            ProtoCmd::Drp { .. } => "drp",
            ProtoCmd::Transform { .. } => "transform",
            ProtoCmd::Cleanup { .. } => "cleanup",
            ProtoCmd::Run { .. } => "run",
            ProtoCmd::Danger { .. } => "danger",
        },
        Command::Hash(c) => match c {
            HashCmd::Check { .. } => "check",
            HashCmd::Attack { .. } => "attack",
        },
        Command::Tbnc(c) => match c {
            TbncCmd::Gen { .. } => "gen",
            TbncCmd::Verify { .. } => "verify",
            TbncCmd::Alg2 { .. } => "alg2",
            TbncCmd::Totality { .. } => "totality",
            TbncCmd::UnionBound { .. } => "union-bound",
        },
        Command::Report(_) => return "report".into(),
    };
    let group = match cmd {
        Command::Code(_) => "code",
        Command::Instance(_) => "instance",
        Command::Qsim(_) => "qsim",
        Command::Proto(_) => "proto",
        Command::Hash(_) => "hash",
        Command::Tbnc(_) => "tbnc",
        Command::Report(_) => "report",
    };
    format!("{group} {sub}")
}

pub fn main() -> ExitCode {
    let argv = match inject_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => return fail(e),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(j) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            return fail(usage(format!("--jobs: {e}")));
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("assertion failed: see records");
            ExitCode::from(1)
        }
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    match e {
        CliError::Usage(m) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
        CliError::Lib(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Dispatches and returns whether every checked property held.
fn run(cli: Cli) -> CliResult<bool> {
    let name = command_name(&cli.command);
    log::info!("running {name}");
    match cli.command {
        Command::Report(args) => report::run(&args, &cli.global),
        cmd => commands::run(&name, cmd, &cli.global),
    }
}
