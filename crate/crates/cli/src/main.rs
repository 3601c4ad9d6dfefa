//! `solidhull` command-line front end.
//!
//! Exit status: 0 on success, 1 when the library rejects the input (message on
//! stderr), 2 on a usage error.

mod repro;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use solidhull::assoc::{conjugate_sequence, ramification_check, sandwich_check, WeightFunctionGrid};
use solidhull::condition_b::{
    log_ab, log_ab_delta, search_lusky, verify_certificate, AbOracle, EntireOracle, SearchOutcome, SearchParams,
};
use solidhull::disk::{disk_block_stats, disk_geometry, disk_log_ab, disk_log_ab_direct, DiskOracle};
use solidhull::growth::{asymptotic_stats, structural_checks};
use solidhull::hull::{
    block_stats, coeff_class_bound, core_sup_grid, Anchor, BlockOptions, BlockReport, CoefficientPrefix,
};
use solidhull::io::{self, Cell, Norm, Table};
use solidhull::sequence::{family, FamilySpec, WeightSequence};

/// Horizon used for built-in families when `--horizon` is not given.
const DEFAULT_HORIZON: usize = 1000;

#[derive(Parser)]
#[command(name = "solidhull", version, about = "Weight sequences, Lusky numbers and solid hull/core block statistics")]
struct Cli {
    /// Number of quotients to generate (families) or keep (sequence files).
    #[arg(long, global = true)]
    horizon: Option<usize>,
    /// Tolerance for grid-based comparisons.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Format for tabular results; sequences and certificates are always JSON.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct SeqArgs {
    /// Built-in family: gevrey:s, harmonic:s, qgevrey:q, qalpha:q,alpha,
    /// steps:Q,D, dyadic:base, lusky:linear,C or lusky:g,C.
    #[arg(long, conflicts_with = "seq")]
    family: Option<String>,
    /// Sequence JSON file `{"name", "horizon", "lambda"}`.
    #[arg(long)]
    seq: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct BoundArgs {
    /// Lower bound b > 2 (linear scale).
    #[arg(long = "b", conflicts_with = "logb")]
    b: Option<f64>,
    /// Upper bound K >= b (linear scale).
    #[arg(long = "K", conflicts_with = "log_k")]
    k: Option<f64>,
    /// ln b, instead of --b.
    #[arg(long)]
    logb: Option<f64>,
    /// ln K, instead of --K.
    #[arg(long = "logK")]
    log_k: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormArg {
    Hull,
    Core,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AnchorArg {
    Start,
    Next,
}

#[derive(Args, Clone)]
struct BlockArgs {
    #[command(flatten)]
    seq: SeqArgs,
    /// Certificate JSON.
    #[arg(long)]
    cert: PathBuf,
    /// Coefficient JSON `{"logabs": [...]}`.
    #[arg(long)]
    coeffs: PathBuf,
    /// Scale c > 0.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Which quotient anchors a block.
    #[arg(long, value_enum, default_value_t = AnchorArg::Start)]
    anchor: AnchorArg,
    /// Columns to print (defaults to the subcommand's own norm).
    #[arg(long, value_enum)]
    norm: Option<NormArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a built-in sequence, or trace omega/h/Sigma at --t values.
    Family {
        #[command(flatten)]
        seq: SeqArgs,
        /// Points t > 0 for a `t,omega,logh,sigma` trace.
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
    },
    /// Structural and asymptotic property report.
    Props {
        #[command(flatten)]
        seq: SeqArgs,
        /// Ratio Q for beta1 / beta3.
        #[arg(long, default_value_t = 2)]
        q: usize,
        /// Share of the window used for limits inferior.
        #[arg(long, default_value_t = 0.5)]
        tail: f64,
    },
    /// ln A_M(k, l) and ln B_M(k, l).
    Ab {
        #[command(flatten)]
        seq: SeqArgs,
        /// Block start k (1-based).
        #[arg(long)]
        k: usize,
        /// Block end l > k.
        #[arg(long)]
        l: usize,
        /// Evaluate through the increments instead of the quotients.
        #[arg(long)]
        delta: bool,
    },
    /// Greedy search for Lusky numbers; prints a certificate or a failure trace.
    LuskySearch {
        #[command(flatten)]
        seq: SeqArgs,
        #[command(flatten)]
        bounds: BoundArgs,
        #[arg(long, default_value_t = 1)]
        a1: usize,
        #[arg(long, default_value_t = SearchParams::DEFAULT_GAP_MAX)]
        gap_max: usize,
        /// Use the disc-case block expressions.
        #[arg(long)]
        disk: bool,
    },
    /// Recompute a certificate against a sequence.
    Verify {
        #[command(flatten)]
        seq: SeqArgs,
        /// Certificate JSON from lusky-search.
        #[arg(long)]
        cert: PathBuf,
        /// Check the disc-case block expressions.
        #[arg(long)]
        disk: bool,
    },
    /// r-interpolating sequence.
    Interp {
        #[command(flatten)]
        seq: SeqArgs,
        /// Ramification index r >= 1.
        #[arg(long)]
        r: usize,
    },
    /// Compare omega_M(t^r) with omega of the r-interpolating sequence.
    RamifyCheck {
        #[command(flatten)]
        seq: SeqArgs,
        /// Ramification index r >= 1.
        #[arg(long)]
        r: usize,
        /// Sample points ln t; defaults to 20 points across the coverage.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        logt: Vec<f64>,
    },
    /// Weight grid to associated sequence (--grid), or sequence to grid (--range).
    Convert {
        /// Weight grid JSON `{"logt", "logv", "normalized"}`.
        #[arg(long, conflicts_with_all = ["family", "seq"])]
        grid: Option<PathBuf>,
        #[command(flatten)]
        seq: SeqArgs,
        /// `lo,hi,n`: sample v_M = exp(-omega_M) on n points of ln t in [lo, hi].
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        range: Vec<f64>,
    },
    /// Check omega_{M^v} <= omega^v <= 2 omega_{M^v} + ln A at the grid nodes.
    Sandwich {
        /// Weight grid JSON `{"logt", "logv", "normalized"}`.
        #[arg(long)]
        grid: PathBuf,
        #[command(flatten)]
        seq: SeqArgs,
    },
    /// Per-block l2 (hull) statistics.
    Hull(BlockArgs),
    /// Per-block l1 (core) statistics.
    Core(BlockArgs),
    /// sup over a radius grid of ln sum |b_j| r^j - omega_M(c r).
    CoreSup {
        #[command(flatten)]
        seq: SeqArgs,
        /// Coefficient JSON `{"logabs": [...]}`.
        #[arg(long)]
        coeffs: PathBuf,
        /// Weight parameter c > 0.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// `lo,hi,n` for ln r.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        logr: Vec<f64>,
    },
    /// ln D for the smallest D with |b_j| <= D c^j / M_j.
    CoeffBound {
        #[command(flatten)]
        seq: SeqArgs,
        /// Coefficient JSON `{"logabs": [...]}`.
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// Disc maximizer geometry `p,k_p,r,logv` for p = 1..p-max.
    DiskGeom {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Defaults to horizon - 1.
        #[arg(long)]
        p_max: Option<usize>,
    },
    /// Disc block expressions ln A_D(p, q), ln B_D(p, q).
    DiskAb {
        #[command(flatten)]
        seq: SeqArgs,
        /// Block start p >= 1.
        #[arg(long)]
        p: usize,
        /// Block end q > p.
        #[arg(long)]
        q: usize,
        /// Evaluate from the maximizer data instead of the closed forms.
        #[arg(long)]
        direct: bool,
    },
    /// Disc-case per-block statistics.
    DiskHull(BlockArgs),
    /// Run a named reproduction scenario (see `repro --help`).
    Repro(repro::ReproArgs),
}

/// A usage problem found after parsing; exits with status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_sequence(args: &SeqArgs, horizon: Option<usize>) -> Result<WeightSequence> {
    match (&args.family, &args.seq) {
        (Some(spec), None) => {
            let fam = spec.parse().map_err(|e: solidhull::Error| usage(e.to_string()))?;
            Ok(family(&FamilySpec::new(fam, horizon.unwrap_or(DEFAULT_HORIZON)))?)
        }
        (None, Some(path)) => {
            let ws = io::sequence_from_json(&read(path)?).with_context(|| format!("in {}", path.display()))?;
            match horizon {
                Some(h) if h < ws.horizon() => Ok(ws.truncate(h)?),
                Some(h) if h > ws.horizon() => {
                    bail!("--horizon {h} exceeds the {} quotients stored in {}", ws.horizon(), path.display())
                }
                _ => Ok(ws),
            }
        }
        _ => Err(usage("give exactly one of --family or --seq")),
    }
}

fn bounds(b: &BoundArgs) -> Result<(f64, f64)> {
    let logb = match (b.b, b.logb) {
        (Some(v), None) => v.ln(),
        (None, Some(v)) => v,
        _ => return Err(usage("give --b or --logb")),
    };
    let log_k = match (b.k, b.log_k) {
        (Some(v), None) => v.ln(),
        (None, Some(v)) => v,
        _ => return Err(usage("give --K or --logK")),
    };
    Ok((logb, log_k))
}

fn range(v: &[f64], flag: &str) -> Result<Vec<f64>> {
    match *v {
        [lo, hi, n] if lo < hi && n >= 2.0 && n.fract() == 0.0 => Ok(WeightFunctionGrid::uniform(lo, hi, n as usize)),
        _ => Err(usage(format!("{flag} needs lo,hi,n with lo < hi and an integer n >= 2"))),
    }
}

struct Ctx {
    format: Format,
}

impl Ctx {
    fn table(&self, t: &Table) -> Result<String> {
        Ok(match self.format {
            Format::Csv => t.to_csv()?,
            Format::Json => t.to_json()?,
        })
    }
}

fn flag(b: bool) -> Cell {
    Cell::Text(b.to_string())
}

fn ab_table(names: [&'static str; 2], (a, b): (f64, f64)) -> Table {
    let mut t = Table::new(names.to_vec());
    t.push(vec![Cell::Real(a), Cell::Real(b)]);
    t
}

fn scalar(name: &'static str, v: f64) -> Table {
    let mut t = Table::new(vec![name]);
    t.push(vec![Cell::Real(v)]);
    t
}

fn block_summary(rep: &BlockReport) {
    eprintln!(
        "sup log_hull = {}, sup log_core = {}; bounded: hull {}, core {}",
        io::fmt_real(rep.sup_hull),
        io::fmt_real(rep.sup_core),
        rep.bounded_hull,
        rep.bounded_core
    );
}

fn run_blocks(cli: &Cli, args: &BlockArgs, default: Norm, disk: bool) -> Result<String> {
    let ws = load_sequence(&args.seq, cli.horizon)?;
    let cert = io::certificate_from_json(&read(&args.cert)?)?;
    let coeffs = io::coefficients_from_json(&read(&args.coeffs)?)?;
    let opts = BlockOptions {
        anchor: match args.anchor {
            AnchorArg::Start => Anchor::Start,
            AnchorArg::Next => Anchor::Next,
        },
        ..BlockOptions::default()
    };
    let rep = if disk {
        disk_block_stats(&ws, &cert, args.c, &coeffs, opts)?
    } else {
        block_stats(&ws, &cert, args.c, &coeffs, opts)?
    };
    block_summary(&rep);
    let norm = match args.norm {
        Some(NormArg::Hull) => Norm::Hull,
        Some(NormArg::Core) => Norm::Core,
        Some(NormArg::Both) => Norm::Both,
        None => default,
    };
    Ctx { format: cli.format }.table(&io::block_table(&rep, norm))
}

fn run(cli: &Cli) -> Result<String> {
    let ctx = Ctx { format: cli.format };
    let h = cli.horizon;
    match &cli.command {
        Command::Family { seq, t } => {
            let ws = load_sequence(seq, h)?;
            if t.is_empty() {
                Ok(io::sequence_to_json(&ws)?)
            } else {
                ctx.table(&io::omega_trace(&ws, t)?)
            }
        }
        Command::Props { seq, q, tail } => {
            let ws = load_sequence(seq, h)?;
            let mut reps = structural_checks(&ws);
            reps.extend(asymptotic_stats(&ws, *q, *tail)?);
            for r in &reps {
                if let Some(note) = &r.note {
                    eprintln!("{}: {note}", r.property);
                }
            }
            ctx.table(&io::property_table(&reps))
        }
        Command::Ab { seq, k, l, delta } => {
            let ws = load_sequence(seq, h)?;
            let v = if *delta { log_ab_delta(&ws.deltas(), *k, *l)? } else { log_ab(&ws, *k, *l)? };
            ctx.table(&ab_table(["logA", "logB"], v))
        }
        Command::LuskySearch { seq, bounds: b, a1, gap_max, disk } => {
            let ws = load_sequence(seq, h)?;
            let (logb, log_k) = bounds(b)?;
            let params = SearchParams { logb, log_k, a1: *a1, gap_max: *gap_max };
            let oracle: &dyn AbOracle = if *disk { &DiskOracle(&ws) } else { &EntireOracle(&ws) };
            match search_lusky(oracle, params)? {
                SearchOutcome::Certificate(c) => {
                    eprintln!("certificate: {} anchors, last a = {}", c.a.len(), c.a[c.a.len() - 1]);
                    Ok(io::certificate_to_json(&c)?)
                }
                SearchOutcome::Failure(t) => {
                    eprintln!(
                        "no admissible gap up to {gap_max} after a_{} = {}; failure trace follows",
                        t.stuck_j, t.stuck_a
                    );
                    ctx.table(&io::failure_table(&t))
                }
            }
        }
        Command::Verify { seq, cert, disk } => {
            let ws = load_sequence(seq, h)?;
            let c = io::certificate_from_json(&read(cert)?)?;
            let v = if *disk {
                verify_certificate(&DiskOracle(&ws), &c)?
            } else {
                verify_certificate(&EntireOracle(&ws), &c)?
            };
            let mut t = Table::new(vec!["ok", "first_failure", "rows_match", "max_gap", "gaps_bounded", "solid"]);
            t.push(vec![
                flag(v.ok),
                v.first_failure.map_or(Cell::Empty, Cell::Int),
                flag(v.rows_match),
                Cell::Int(v.max_gap),
                Cell::Text(v.gaps_bounded.to_string()),
                flag(v.solid()),
            ]);
            let out = ctx.table(&t)?;
            if !v.ok {
                emit(cli, &out)?;
                bail!("certificate fails at row {} (0-based)", v.first_failure.unwrap_or(0));
            }
            Ok(out)
        }
        Command::Interp { seq, r } => Ok(io::sequence_to_json(&load_sequence(seq, h)?.interpolate(*r)?)?),
        Command::RamifyCheck { seq, r, logt } => {
            let ws = load_sequence(seq, h)?;
            let samples = if logt.is_empty() {
                let top = ws.lambda(ws.horizon()) / *r as f64;
                WeightFunctionGrid::uniform(-1.0f64.min(top - 1.0), top, 20)
            } else {
                logt.clone()
            };
            let rep = ramification_check(&ws, *r, &samples)?;
            eprintln!("{}", rep.note);
            ctx.table(&io::ramification_table(&rep))
        }
        Command::Convert { grid, seq, range: rg } => match grid {
            Some(path) => {
                let w = io::grid_from_json(&read(path)?)?;
                let horizon = h.ok_or_else(|| usage("convert --grid needs --horizon"))?;
                Ok(io::sequence_to_json(&conjugate_sequence(&w, horizon)?)?)
            }
            None => {
                if rg.is_empty() {
                    return Err(usage("convert needs --grid, or a sequence with --range lo,hi,n"));
                }
                let ws = load_sequence(seq, h)?;
                Ok(io::grid_to_json(&WeightFunctionGrid::from_sequence(&ws, range(rg, "--range")?)?)?)
            }
        },
        Command::Sandwich { grid, seq } => {
            let w = io::grid_from_json(&read(grid)?)?;
            let ws = load_sequence(seq, h)?;
            let top = ws.lambda(ws.horizon());
            let samples: Vec<f64> = w.logt().iter().copied().filter(|&x| x <= top).collect();
            let rep = sandwich_check(&w, &ws, &samples, cli.tol)?;
            ctx.table(&ab_table(["logA", "max_lower_violation"], (rep.log_a, rep.max_lower_violation)))
        }
        Command::Hull(args) => run_blocks(cli, args, Norm::Hull, false),
        Command::Core(args) => run_blocks(cli, args, Norm::Core, false),
        Command::DiskHull(args) => run_blocks(cli, args, Norm::Both, true),
        Command::CoreSup { seq, coeffs, c, logr } => {
            let ws = load_sequence(seq, h)?;
            let b = io::coefficients_from_json(&read(coeffs)?)?;
            ctx.table(&scalar("core_sup", core_sup_grid(&ws, *c, &b, &range(logr, "--logr")?)?))
        }
        Command::CoeffBound { seq, coeffs, c } => {
            let ws = load_sequence(seq, h)?;
            let b: CoefficientPrefix = io::coefficients_from_json(&read(coeffs)?)?;
            ctx.table(&scalar("logD", coeff_class_bound(&ws, *c, &b)?))
        }
        Command::DiskGeom { seq, c, p_max } => {
            let ws = load_sequence(seq, h)?;
            let top = p_max.unwrap_or(ws.horizon().saturating_sub(1));
            let rows = (1..=top).map(|p| disk_geometry(&ws, *c, p)).collect::<solidhull::Result<Vec<_>>>()?;
            ctx.table(&io::disk_table(&rows))
        }
        Command::DiskAb { seq, p, q, direct } => {
            let ws = load_sequence(seq, h)?;
            let v = if *direct { disk_log_ab_direct(&ws, *p, *q)? } else { disk_log_ab(&ws, *p, *q)? };
            ctx.table(&ab_table(["logA", "logB"], v))
        }
        Command::Repro(args) => ctx.table(&repro::run(args)?),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        eprintln!("error: --tol must be positive");
        return ExitCode::from(2);
    }
    match run(&cli).and_then(|out| emit(&cli, &out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
