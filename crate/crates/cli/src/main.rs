use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rldel::channels::{
    make_threshold_channel, star_transition_dist, transition_dist, transmit_multi, ChannelSpec, TrimMode,
};
use rldel::harness::{random_message, run_trials_with, sweep_bounds_with, ExperimentConfig, Scheme};
use rldel::infotheory::{default_d_grid, dg_bound, greedy_search_with, rll_baseline, DEFAULT_BETA_STEP, DEFAULT_M_MAX};
use rldel::inner_codes::{build_dense_codebook, build_greedy_code};
use rldel::schemes::{SchemeKind, SchemeParams};
use rldel::{par, BitString, Exec};

const THREADS_ENV: &str = "RLDEL_THREADS";

#[derive(Parser)]
#[command(name = "rldel", version, about = "Runlength-dependent deletion channel toolkit")]
struct Cli {
    /// Worker threads (defaults to $RLDEL_THREADS, then the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    seq: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Capacity lower bounds.
    #[command(subcommand)]
    Bound(BoundCmd),
    /// Channel sampling and exact transition probabilities.
    #[command(subcommand)]
    Channel(ChannelCmd),
    /// Inner codebook construction.
    #[command(subcommand)]
    Code(CodeCmd),
    /// Concatenated coding schemes.
    #[command(subcommand)]
    Scheme(SchemeCmd),
    /// Empirical claim checks.
    #[command(subcommand)]
    Claims(ClaimsCmd),
}

#[derive(Subcommand)]
enum BoundCmd {
    /// Closed-form bound for the threshold channel.
    Dg {
        #[arg(long)]
        tau: usize,
        #[arg(long)]
        d: f64,
    },
    /// Best greedy-code rate over M and the beta grid.
    Greedy {
        #[arg(long)]
        tau: usize,
        #[arg(long)]
        d: f64,
        #[arg(long, default_value_t = DEFAULT_M_MAX)]
        m_max: usize,
        #[arg(long, default_value_t = DEFAULT_BETA_STEP)]
        beta_step: f64,
    },
    /// Writes the bound curves over the default d grid as CSV.
    Sweep {
        #[arg(long)]
        tau: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone)]
struct ChannelArgs {
    /// Channel config file (TOML); overrides --tau/--d.
    #[arg(long)]
    channel: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    tau: usize,
    #[arg(long, default_value_t = 0.2)]
    d: f64,
    #[arg(long, value_enum, default_value_t = Trim::None)]
    trim: Trim,
    #[arg(long, default_value_t = 1)]
    traces: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Trim {
    None,
    #[value(name = "00")]
    T00,
    #[value(name = "01")]
    T01,
    #[value(name = "10")]
    T10,
    #[value(name = "11")]
    T11,
}

impl From<Trim> for TrimMode {
    fn from(t: Trim) -> Self {
        match t {
            Trim::None => TrimMode::None,
            Trim::T00 => TrimMode::Trim00,
            Trim::T01 => TrimMode::Trim01,
            Trim::T10 => TrimMode::Trim10,
            Trim::T11 => TrimMode::Trim11,
        }
    }
}

impl ChannelArgs {
    fn spec(&self) -> Result<ChannelSpec> {
        let spec = match &self.channel {
            Some(p) => toml::from_str::<ChannelSpec>(&read(p)?)?,
            None => make_threshold_channel(self.tau, self.d)?
                .with_trim(self.trim.into())
                .with_traces(self.traces),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Subcommand)]
enum ChannelCmd {
    /// Prints one trace per line.
    Sample {
        #[command(flatten)]
        ch: ChannelArgs,
        #[arg(long)]
        input: BitString,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Prints every output with its exact probability.
    Oracle {
        #[command(flatten)]
        ch: ChannelArgs,
        #[arg(long)]
        input: BitString,
        /// Marginalize to the star channel (surviving run pattern only).
        #[arg(long)]
        star: bool,
    },
}

#[derive(Subcommand)]
enum CodeCmd {
    BuildDense {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0.5)]
        zeta: f64,
        #[arg(long, default_value_t = 0.2)]
        gamma: f64,
        #[arg(long)]
        prefix: Option<u8>,
        #[arg(long)]
        suffix: Option<u8>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    BuildGreedy {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        tau: usize,
        /// Comma-separated run-length fractions beta_1..beta_tau.
        #[arg(long, value_delimiter = ',')]
        beta: Vec<f64>,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config (TOML). Without it one is assembled from the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Kind::Single)]
    kind: Kind,
    #[arg(long, default_value_t = 2)]
    tau: usize,
    #[arg(long, default_value_t = 0.1)]
    d: f64,
    #[arg(long, default_value_t = 3)]
    traces: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the resolved config and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Single,
    Multi,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        if let Some(p) = &self.config {
            return Ok(toml::from_str(&read(p)?)?);
        }
        let channel = make_threshold_channel(self.tau, self.d)?;
        let d_m = channel.d_m();
        let (kind, mut scheme) = match self.kind {
            Kind::Single => (SchemeKind::Single, SchemeParams::single(12, 48, 1.0, d_m, 1.0)?),
            Kind::Multi => {
                let mut p = SchemeParams::multi(12, 6, 64, 12, d_m, 1.0, self.traces)?;
                p.delta_out = 0.5;
                (SchemeKind::Multi, p)
            }
        };
        scheme.eta = 0.8;
        scheme.sync_alphabet = 4;
        scheme.seed = self.seed;
        Ok(ExperimentConfig {
            channel,
            scheme,
            kind,
            trials: self.trials,
            seed: self.seed,
            output: None,
        })
    }
}

#[derive(Subcommand)]
enum SchemeCmd {
    /// Encodes a message and prints the codeword as a 0/1 line.
    Encode {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Comma-separated outer symbols; random (from --seed) if omitted.
        #[arg(long, value_delimiter = ',')]
        msg: Option<Vec<u64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decodes traces (one 0/1 line each) and prints a result record.
    Decode {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Trace file, one 0/1 line per trace.
        #[arg(long)]
        input: PathBuf,
        /// Expected message; a mismatch counts as failure.
        #[arg(long, value_delimiter = ',')]
        expect: Option<Vec<u64>>,
    },
    /// Monte Carlo encode/transmit/decode trials.
    Trial {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// CSV report path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encodes, transmits and decodes one random message.
    Transmit {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ClaimsCmd {
    /// Runs the quick claim suite; exits 1 if any claim fails.
    Check,
}

fn read(p: &Path) -> Result<String> {
    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct DecodeRecord {
    success: bool,
    msg: Option<Vec<u64>>,
    error: Option<String>,
    segments: usize,
    matched: usize,
    erasures: usize,
    build_seconds: f64,
    decode_seconds: f64,
}

fn read_traces(p: &Path) -> Result<Vec<BitString>> {
    read(p)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.parse::<BitString>().map_err(Into::into))
        .collect()
}

fn decode(cfg: &ExperimentConfig, traces: Vec<BitString>, expect: Option<&[u64]>) -> Result<DecodeRecord> {
    let t0 = Instant::now();
    let scheme = Scheme::build(cfg.kind, cfg.scheme.clone(), &cfg.channel)?;
    let build_seconds = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let mut rec = match &scheme {
        Scheme::Single(s) => {
            let Some(y) = traces.first() else {
                bail!("no trace given")
            };
            let r = s.decode_report(y);
            DecodeRecord {
                success: r.msg.is_some(),
                segments: r.segments.len(),
                matched: r.outer.matched,
                erasures: r.outer.erasures,
                msg: r.msg,
                error: r.error,
                build_seconds,
                decode_seconds: 0.0,
            }
        }
        Scheme::Multi(s) => {
            let ts = rldel::channels::TraceSet {
                origin_length: 0,
                traces,
            };
            let r = s.decode_report(&ts);
            DecodeRecord {
                success: r.msg.is_some(),
                segments: r.aligned.iter().sum(),
                matched: r.aligned.iter().copied().min().unwrap_or(0),
                erasures: r.erasures,
                msg: r.msg,
                error: r.error,
                build_seconds,
                decode_seconds: 0.0,
            }
        }
    };
    rec.decode_seconds = t1.elapsed().as_secs_f64();
    if let (Some(want), Some(got)) = (expect, &rec.msg) {
        if want != got.as_slice() {
            rec.success = false;
            rec.error = Some("decoded message differs from expected".into());
        }
    }
    Ok(rec)
}

fn encode(cfg: &ExperimentConfig, msg: Option<Vec<u64>>) -> Result<(Scheme, Vec<u64>, BitString)> {
    let scheme = Scheme::build(cfg.kind, cfg.scheme.clone(), &cfg.channel)?;
    let msg = msg.unwrap_or_else(|| random_message(scheme.message_len(), scheme.field_size(), cfg.seed));
    let x = match &scheme {
        Scheme::Single(s) => s.encode(&msg)?,
        Scheme::Multi(s) => s.encode(&msg)?,
    };
    Ok((scheme, msg, x))
}

fn join(msg: &[u64]) -> String {
    msg.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

fn claims(exec: Exec) -> Result<bool> {
    let mut all = true;
    let mut check = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        all &= ok;
    };
    for (d, want) in [
        (0.0, 0.6942),
        (0.1, 0.4587),
        (0.5, 0.2462),
        (0.9, 0.0550),
        (0.99, 0.0057),
    ] {
        let got = greedy_search_with(exec, 2, d, DEFAULT_M_MAX, DEFAULT_BETA_STEP)?.rate;
        check(
            "greedy tau=2",
            (got - want).abs() <= 0.005,
            format!("d={d} rate={got:.4} want {want}"),
        );
    }
    for (d, want) in [(0.1, 0.7622), (0.5, 0.697), (0.8, 0.6927)] {
        let got = greedy_search_with(exec, 3, d, DEFAULT_M_MAX, DEFAULT_BETA_STEP)?.rate;
        check(
            "greedy tau=3",
            (got - want).abs() <= 0.005,
            format!("d={d} rate={got:.4} want {want}"),
        );
    }
    let golden = ((1.0 + 5f64.sqrt()) / 2.0).log2();
    let base = rll_baseline(3);
    check("baseline tau=3", (base - golden).abs() <= 1e-6, format!("{base:.6}"));
    let dg = dg_bound(2, 0.2)?;
    check("dg tau=2 d=0.2", (dg - 0.39016).abs() <= 5e-6, format!("{dg:.5}"));
    for kind in [Kind::Single, Kind::Multi] {
        let args = ConfigArgs {
            config: None,
            kind,
            tau: 2,
            d: 0.0,
            traces: 1,
            trials: 20,
            seed: 7,
            print_config: false,
        };
        let mut cfg = args.resolve()?;
        cfg.channel = ChannelSpec::noiseless();
        let rep = run_trials_with(exec, &cfg)?;
        check(
            "noiseless round trip",
            rep.failures == 0,
            format!("{:?}: {}/{} failures", cfg.kind, rep.failures, rep.trials),
        );
    }
    Ok(all)
}

/// Ok(false) means a decode or verification failure.
fn run(cli: Cli) -> Result<bool> {
    let threads = cli
        .threads
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.parse().ok()));
    if let Some(n) = threads {
        par::set_threads(n);
    }
    let exec = if cli.seq { Exec::Seq } else { Exec::default() };
    match cli.cmd {
        Cmd::Bound(BoundCmd::Dg { tau, d }) => println!("{:.5}", dg_bound(tau, d)?),
        Cmd::Bound(BoundCmd::Greedy {
            tau,
            d,
            m_max,
            beta_step,
        }) => {
            let r = greedy_search_with(exec, tau, d, m_max, beta_step)?;
            let beta = r.beta.iter().map(|b| format!("{b:.4}")).collect::<Vec<_>>().join(",");
            println!("rate={:.6} M={} beta={beta}", r.rate, r.m);
        }
        Cmd::Bound(BoundCmd::Sweep { tau, out }) => {
            sweep_bounds_with(exec, tau, &default_d_grid(), &out)?;
            eprintln!("wrote {}", out.display());
        }
        Cmd::Channel(ChannelCmd::Sample { ch, input, seed }) => {
            for t in transmit_multi(&ch.spec()?, &input, seed).traces {
                println!("{t}");
            }
        }
        Cmd::Channel(ChannelCmd::Oracle { ch, input, star }) => {
            let spec = ch.spec()?;
            if star {
                for (z, p) in star_transition_dist(&spec, &input)?.sorted() {
                    println!("{}\t{}\t{}\t{p:.10}", z.body, z.first_run_len, z.last_run_len);
                }
            } else {
                for (y, p) in transition_dist(&spec, &input)?.sorted() {
                    println!(
                        "{}\t{p:.10}",
                        if y.is_empty() { "-".to_string() } else { y.to_string() }
                    );
                }
            }
        }
        Cmd::Code(CodeCmd::BuildDense {
            n,
            count,
            zeta,
            gamma,
            prefix,
            suffix,
            seed,
            out,
        }) => {
            let book = build_dense_codebook(n, count, zeta, gamma, prefix, suffix, seed)?;
            emit(out.as_deref(), &book.to_text())?;
        }
        Cmd::Code(CodeCmd::BuildGreedy {
            n,
            tau,
            beta,
            delta,
            out,
        }) => {
            let book = build_greedy_code(n, tau, &beta, delta)?;
            eprintln!("{} codewords, rate {:.4}", book.len(), book.rate());
            emit(out.as_deref(), &book.to_text())?;
        }
        Cmd::Scheme(sc) => return scheme(exec, sc),
        Cmd::Claims(ClaimsCmd::Check) => return claims(exec),
    }
    Ok(true)
}

fn scheme(exec: Exec, sc: SchemeCmd) -> Result<bool> {
    let args = match &sc {
        SchemeCmd::Encode { cfg, .. }
        | SchemeCmd::Decode { cfg, .. }
        | SchemeCmd::Trial { cfg, .. }
        | SchemeCmd::Transmit { cfg, .. } => cfg,
    };
    let cfg = args.resolve()?;
    let echo = toml::to_string(&cfg)?;
    if args.print_config {
        print!("{echo}");
        return Ok(true);
    }
    eprint!("{echo}");
    match sc {
        SchemeCmd::Encode { msg, out, .. } => {
            let (_, msg, x) = encode(&cfg, msg)?;
            eprintln!("msg={}", join(&msg));
            emit(out.as_deref(), &format!("{x}\n"))?;
        }
        SchemeCmd::Decode { input, expect, .. } => {
            let rec = decode(&cfg, read_traces(&input)?, expect.as_deref())?;
            print!("{}", toml::to_string(&rec)?);
            return Ok(rec.success);
        }
        SchemeCmd::Trial { out, .. } => {
            let cfg = ExperimentConfig {
                output: out.or(cfg.output),
                ..cfg
            };
            let rep = run_trials_with(exec, &cfg)?;
            print!("{}", toml::to_string(&rep)?);
        }
        SchemeCmd::Transmit { out, .. } => {
            let (scheme, msg, x) = encode(&cfg, None)?;
            let traces = match scheme {
                Scheme::Single(_) => 1,
                Scheme::Multi(s) => s.params.traces,
            };
            let ts = transmit_multi(&cfg.channel.clone().with_traces(traces), &x, cfg.seed ^ 0x5eed);
            let lines: String = ts.traces.iter().map(|t| format!("{t}\n")).collect();
            eprintln!("msg={}", join(&msg));
            emit(out.as_deref(), &lines)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
