//! The `otlab` command line.
//!
//! ```text
//! otlab metrics  (--family K [--param A] | --f-re X --f-im Y --g Z)
//! otlab curve    [--samples N]
//! otlab frontier [--grid-step S] [--bin-width W] [--tol T]
//! otlab simulate --mode honest|cheat-receiver|cheat-sender --trials N --seed S
//!                (--family K [--param A] | --f-re X --f-im Y --g Z)
//! ```
//!
//! Results go to stdout as CSV with a header row; lines starting with `#`
//! echo the configuration. Diagnostics go to stderr.
//!
//! Exit codes: 0 success, 1 output error, 2 usage error, 3 verification
//! failure, 4 infeasible overlaps.

use std::io::Write;

use clap::{Args, Parser, Subcommand};
use otlab_core::frontier::{min_frontier_margin, SearchConfig};
use otlab_core::metrics::{
    metrics_for_overlaps, qubit_pr_of_pf, ququart_pr_of_pf, qutrit_pr_of_pf, PF_BRANCH,
};
use otlab_core::sim::SimMode;
use otlab_core::{
    brute_force_frontier, classical_min_cheat, failure_probability, family_metrics,
    frontier_pr_of_pf, named_family, receiver_cheat, run_cheating_receiver, run_cheating_sender,
    run_honest, verify_frontier, Error, FamilyKind, NamedFamily, OverlapPair, ProtocolMetrics,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OUTPUT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

pub const THREADS_ENV: &str = "OTLAB_THREADS";

const GRAMMAR: &str = "\
usage:
  otlab metrics  (--family K [--param A] | --f-re X --f-im Y --g Z)
  otlab curve    [--samples N]
  otlab frontier [--grid-step S] [--bin-width W] [--tol T]
  otlab simulate --mode honest|cheat-receiver|cheat-sender --trials N --seed S
                 (--family K [--param A] | --f-re X --f-im Y --g Z)
families: wiesner (no --param), qubit, ququart, qutrit (--param a in [0, 1])";

#[derive(Parser, Debug)]
#[command(
    name = "otlab",
    version,
    about = "Oblivious transfer with symmetric pure states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Failure and cheating probabilities for one family.
    Metrics(InputArgs),
    /// Frontier, classical bound and family curves against 1 − p_f.
    Curve {
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Brute-force check of the optimal frontier.
    Frontier {
        #[arg(long, default_value_t = 0.01)]
        grid_step: f64,
        #[arg(long, default_value_t = 0.005)]
        bin_width: f64,
        #[arg(long, default_value_t = 0.005)]
        tol: f64,
    },
    /// Monte Carlo run of the protocol.
    Simulate {
        #[arg(long, value_parser = parse_mode)]
        mode: SimMode,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        input: InputArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    #[arg(long, value_parser = parse_family, conflicts_with_all = ["f_re", "f_im", "g"])]
    family: Option<FamilyKind>,
    #[arg(long, allow_negative_numbers = true, requires = "family")]
    param: Option<f64>,
    #[arg(long = "f-re", allow_negative_numbers = true)]
    f_re: Option<f64>,
    #[arg(long = "f-im", allow_negative_numbers = true)]
    f_im: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    g: Option<f64>,
}

fn parse_family(s: &str) -> Result<FamilyKind, String> {
    s.parse()
}

fn parse_mode(s: &str) -> Result<SimMode, String> {
    s.parse()
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Verify(String),
    Infeasible(String),
    Output(std::io::Error),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Output(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InfeasibleOverlaps(_) => Failure::Infeasible(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

/// Resolved input: a named family or raw overlaps.
#[derive(Debug, Clone, Copy)]
enum Input {
    Named(NamedFamily),
    Raw(OverlapPair),
}

impl Input {
    fn overlaps(&self) -> OverlapPair {
        match self {
            Input::Named(nf) => named_family(nf),
            Input::Raw(ov) => *ov,
        }
    }

    fn metrics(&self) -> ProtocolMetrics {
        match self {
            Input::Named(nf) => family_metrics(nf),
            Input::Raw(ov) => metrics_for_overlaps(ov),
        }
    }

    fn label(&self) -> (String, String) {
        match self {
            Input::Named(nf) if nf.kind() == FamilyKind::Wiesner => {
                ("wiesner".into(), String::new())
            }
            Input::Named(nf) => (nf.kind().name().into(), num(nf.param())),
            Input::Raw(_) => ("custom".into(), String::new()),
        }
    }
}

fn resolve_input(args: &InputArgs) -> Result<Input, Failure> {
    match (args.family, args.f_re, args.f_im, args.g) {
        (Some(FamilyKind::Wiesner), None, None, None) => match args.param {
            None => Ok(Input::Named(NamedFamily::wiesner())),
            Some(_) => Err(Failure::Usage("the wiesner family takes no --param".into())),
        },
        (Some(kind), None, None, None) => match args.param {
            Some(a) => NamedFamily::new(kind, a)
                .map(Input::Named)
                .map_err(Failure::from),
            None => Err(Failure::Usage(format!(
                "--family {} needs --param",
                kind.name()
            ))),
        },
        (None, Some(re), Some(im), Some(g)) => Ok(Input::Raw(OverlapPair::from_parts(re, im, g)?)),
        (None, None, None, None) => Err(Failure::Usage(
            "give either --family or all of --f-re, --f-im and --g".into(),
        )),
        (None, ..) => Err(Failure::Usage(
            "--f-re, --f-im and --g must be given together".into(),
        )),
        (Some(_), ..) => Err(Failure::Usage(
            "--family cannot be combined with raw overlaps".into(),
        )),
    }
}

fn num(x: f64) -> String {
    let s = format!("{x:.8}");
    // rounding-level negatives would otherwise print as -0.00000000
    if s == "-0.00000000" {
        "0.00000000".into()
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn cmd_metrics(args: &InputArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let input = resolve_input(args)?;
    let ov = input.overlaps();
    let m = input.metrics();
    let (family, param) = input.label();
    writeln!(out, "# otlab metrics")?;
    writeln!(
        out,
        "family,param,f_re,f_im,g,p_f,p_f0,p_f1,p_r,p_s,span_dim"
    )?;
    writeln!(
        out,
        "{family},{param},{},{},{},{},{},{},{},{},{}",
        num(ov.f().re),
        num(ov.f().im),
        num(ov.g()),
        num(m.p_f),
        num(m.p_f0),
        num(m.p_f1),
        num(m.p_r),
        num(m.p_s),
        m.span_dim
    )?;
    Ok(())
}

/// Success probabilities `1 − p_f` on a uniform grid over `[½, 1]`, with the
/// interior sample nearest the branch point moved onto it.
pub fn curve_grid(samples: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..samples)
        .map(|i| 0.5 + 0.5 * i as f64 / (samples - 1) as f64)
        .collect();
    let knot = 1.0 - PF_BRANCH;
    if samples > 2 {
        let nearest = (1..samples - 1)
            .min_by(|&a, &b| (xs[a] - knot).abs().total_cmp(&(xs[b] - knot).abs()))
            .expect("interior samples exist");
        xs[nearest] = knot;
    }
    xs
}

fn cmd_curve(samples: usize, out: &mut dyn Write) -> Result<(), Failure> {
    if samples < 2 {
        return Err(Failure::Usage(format!(
            "--samples must be at least 2 (got {samples})"
        )));
    }
    writeln!(out, "# otlab curve samples={samples}")?;
    writeln!(
        out,
        "success_prob,classical_min_pr,frontier_pr,qubit_pr,ququart_pr,qutrit_pr"
    )?;
    for s in curve_grid(samples) {
        let p_f = (1.0 - s).clamp(0.0, 0.5);
        writeln!(
            out,
            "{},{},{},{},{},{}",
            num(s),
            num(classical_min_cheat(p_f)?),
            num(frontier_pr_of_pf(p_f)?),
            opt(qubit_pr_of_pf(p_f)),
            opt(ququart_pr_of_pf(p_f)),
            opt(qutrit_pr_of_pf(p_f)),
        )?;
    }
    Ok(())
}

fn cmd_frontier(
    grid_step: f64,
    bin_width: f64,
    tol: f64,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Failure::Usage(format!(
            "--tol must be a non-negative number (got {tol})"
        )));
    }
    let cfg = SearchConfig::new(grid_step, bin_width)?;
    let points = brute_force_frontier(&cfg);
    let report = verify_frontier(&points, tol, cfg.grid_step())?;
    let margin = min_frontier_margin(&cfg);
    writeln!(
        out,
        "# otlab frontier grid_step={} bin_width={} tol={} subdivisions={}",
        num(cfg.grid_step()),
        num(cfg.pr_bin_width()),
        num(tol),
        cfg.subdivisions()
    )?;
    writeln!(
        out,
        "pr_bin_center,pr_found,min_pf_found,analytic_pf,gap,rank,lambda0,lambda1,lambda2,lambda3"
    )?;
    for p in &points {
        let [l0, l1, l2, l3] = p.achieving_spectrum.values();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            num(p.pr_bin_center),
            num(p.pr_found),
            num(p.min_pf_found),
            num(p.analytic_pf),
            num(p.gap),
            p.rank,
            num(l0),
            num(l1),
            num(l2),
            num(l3)
        )?;
    }
    let pass = report.pass && margin >= -tol;
    writeln!(
        out,
        "# {} worst_gap={} max_gap={} min_margin={} rank_checked_low={} rank_checked_high={} rank_mismatches={}",
        if pass { "PASS" } else { "FAIL" },
        num(report.worst_gap),
        num(report.max_gap),
        num(margin),
        report.rank_checked_low,
        report.rank_checked_high,
        report.rank_mismatches
    )?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Verify("frontier verification failed".into()))
    }
}

fn cmd_simulate(
    mode: SimMode,
    trials: u64,
    seed: u64,
    args: &InputArgs,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    if trials == 0 {
        return Err(Failure::Usage("--trials must be at least 1".into()));
    }
    let input = resolve_input(args)?;
    let ov = input.overlaps();
    let (family, param) = input.label();
    writeln!(
        out,
        "# otlab simulate mode={} family={family} param={param} f_re={} f_im={} g={} trials={trials} seed={seed}",
        mode.name(),
        num(ov.f().re),
        num(ov.f().im),
        num(ov.g())
    )?;
    match mode {
        SimMode::Honest => {
            let h = run_honest(&ov, trials, seed)?;
            writeln!(
                out,
                "mode,estimate,std_error,n_trials,seed,closed_form,p_f0,p_f0_std_error,p_f1,p_f1_std_error"
            )?;
            writeln!(
                out,
                "honest,{},{},{},{},{},{},{},{},{}",
                num(h.p_f.estimate),
                num(h.p_f.std_error),
                h.p_f.n_trials,
                seed,
                num(failure_probability(&ov)),
                num(h.p_f0.estimate),
                num(h.p_f0.std_error),
                num(h.p_f1.estimate),
                num(h.p_f1.std_error)
            )?;
        }
        SimMode::CheatReceiver => {
            let r = run_cheating_receiver(&ov, trials, seed)?;
            writeln!(out, "mode,estimate,std_error,n_trials,seed,closed_form")?;
            writeln!(
                out,
                "cheat-receiver,{},{},{},{},{}",
                num(r.estimate),
                num(r.std_error),
                r.n_trials,
                seed,
                num(receiver_cheat(&ov))
            )?;
        }
        SimMode::CheatSender => {
            let s = run_cheating_sender(&ov, trials, seed)?;
            writeln!(
                out,
                "mode,estimate,std_error,n_trials,seed,closed_form,transcript_mismatches"
            )?;
            writeln!(
                out,
                "cheat-sender,{},{},{},{},{},{}",
                num(s.p_s.estimate),
                num(s.p_s.std_error),
                s.p_s.n_trials,
                seed,
                num(0.5),
                s.transcript_mismatches
            )?;
            if s.transcript_mismatches > 0 {
                return Err(Failure::Verify(format!(
                    "sender view depended on the receiver's choice in {} trials",
                    s.transcript_mismatches
                )));
            }
        }
    }
    Ok(())
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Metrics(args) => cmd_metrics(&args, out),
        Command::Curve { samples } => cmd_curve(samples, out),
        Command::Frontier {
            grid_step,
            bin_width,
            tol,
        } => cmd_frontier(grid_step, bin_width, tol, out),
        Command::Simulate {
            mode,
            trials,
            seed,
            input,
        } => cmd_simulate(mode, trials, seed, &input, out),
    }
}

fn thread_pool(value: Option<String>) -> Result<Option<rayon::ThreadPool>, Failure> {
    let Some(v) = value else { return Ok(None) };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Usage(format!(
            "{THREADS_ENV} must be a positive integer (got '{v}')"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| Failure::Usage(format!("cannot start {n} threads: {e}")))
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_cli_with_threads(argv, std::env::var(THREADS_ENV).ok(), out, err)
}

/// [`run_cli`] with the thread setting given explicitly instead of read from the environment.
pub fn run_cli_with_threads<I, T>(
    argv: I,
    threads: Option<String>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    // output is buffered so the work can run inside the pool
    let mut buf: Vec<u8> = Vec::new();
    let result = thread_pool(threads).and_then(|pool| match pool {
        Some(pool) => pool.install(|| dispatch(cli, &mut buf)),
        None => dispatch(cli, &mut buf),
    });
    let written = out.write_all(&buf).and_then(|()| out.flush());
    let result = result.and_then(|()| written.map_err(Failure::Output));
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}\n\n{GRAMMAR}");
            EXIT_USAGE
        }
        Err(Failure::Verify(msg)) => {
            let _ = writeln!(err, "verification failed: {msg}");
            EXIT_VERIFY
        }
        Err(Failure::Infeasible(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INFEASIBLE
        }
        Err(Failure::Output(e)) => {
            let _ = writeln!(err, "error writing output: {e}");
            EXIT_OUTPUT
        }
    }
}
