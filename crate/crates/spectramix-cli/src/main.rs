mod config;
mod manifest;
mod run;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use run::{CliError, Format};

/// Seeded, replayable chaos and spectral-statistics experiments.
///
/// Artifacts go to stdout unless --out is given; with --out the run also
/// records a `<path>.manifest.json` that `replay` can verify bit-exactly.
/// Exit codes: 0 all tests pass, 1 a test failed, 2 usage, 3 numeric
/// failure, 4 I/O failure.
#[derive(Parser)]
#[command(name = "spectramix", version, max_term_width = 100)]
struct Cli {
    /// seed for every stochastic stage [default: 0]
    #[arg(long, global = true, allow_hyphen_values = true)]
    seed: Option<String>,

    /// write the artifact here instead of stdout and record a run manifest
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// artifact encoding: csv or json [default: csv]
    #[arg(long, global = true)]
    format: Option<String>,

    /// key=value file merged underneath the command-line flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Correlation decay C(T_t A, B) of two phase-space sets under a map
    /// (CSV columns: t,correlation)
    Mixing(MixingArgs),

    /// Factorization defect of a time-separated pair of sets against the
    /// invariant density (CSV columns: gap,defect)
    Factorization(FactorizationArgs),

    /// Discretized transfer matrix: column-stochasticity report plus the
    /// invariant density it fixes (CSV columns: q,p,value)
    Ulam(UlamArgs),

    /// Kicked-rotor experiments
    #[command(subcommand)]
    Qkr(QkrCmd),

    /// Phase-space transform checks
    #[command(subcommand)]
    Wigner(WignerCmd),

    /// Random-matrix ensembles: sampling and statistics screens
    #[command(subcommand)]
    Rmt(RmtCmd),

    /// Mixed state and projectors realizing prescribed measurement
    /// probabilities (always emits JSON)
    #[command(name = "appendix-e")]
    AppendixE(AppendixEArgs),

    /// Spacing verdict for kicked-rotor quasienergies: closer to the
    /// level-repulsion surmise or to independent levels?
    Bgs(BgsArgs),

    /// Re-execute a recorded run and verify its output digests
    Replay(ReplayArgs),
}

#[derive(Args)]
struct MixingArgs {
    /// map: cat, baker or standard:<k> [default: cat]
    #[arg(long)]
    map: Option<String>,
    /// first set, rect:q0,q1,p0,p1 half-open in [0,1) [default: rect:0,0.5,0,1]
    #[arg(long)]
    set_a: Option<String>,
    /// second set, same syntax [default: rect:0,0.5,0,1]
    #[arg(long)]
    set_b: Option<String>,
    /// largest time offset, inclusive [default: 20]
    #[arg(long)]
    t_max: Option<String>,
    /// cells per axis [default: 1024]
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Args)]
struct FactorizationArgs {
    /// map: cat, baker or standard:<k> [default: cat]
    #[arg(long)]
    map: Option<String>,
    /// first set, rect:q0,q1,p0,p1 [default: rect:0,0.5,0,1]
    #[arg(long)]
    set_a: Option<String>,
    /// second set, offset against the first [default: rect:0,0.5,0,1]
    #[arg(long)]
    set_b: Option<String>,
    /// largest offset gap, inclusive [default: 12]
    #[arg(long)]
    gap_max: Option<String>,
    /// cells per axis [default: 1024]
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Args)]
struct UlamArgs {
    /// map: cat, baker or standard:<k> [default: baker]
    #[arg(long)]
    map: Option<String>,
    /// cells per axis of the partition [default: 64]
    #[arg(long)]
    cells: Option<String>,
    /// map iterations per matrix application [default: 1]
    #[arg(long)]
    t: Option<String>,
}

#[derive(Subcommand)]
enum QkrCmd {
    /// Correlation of a momentum-window observable after each kick
    /// (CSV columns: kick,observable,value; value is the real part)
    Correlation(QkrCorrelationArgs),
    /// Momentum spread <L^2> after each kick (CSV columns: kick,L2)
    Spread(QkrSpreadArgs),
    /// Quasienergy phases of the one-period propagator
    /// (CSV columns: index,phase)
    Spectrum(QkrSpectrumArgs),
}

#[derive(Args)]
struct QkrCorrelationArgs {
    /// momentum lattice size, power of two [default: 256]
    #[arg(long)]
    n: Option<String>,
    /// kick strength, > 0 [default: 10]
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// kick period [default: 1]
    #[arg(long)]
    tau: Option<String>,
    /// effective Planck constant [default: 0.25]
    #[arg(long)]
    hbar: Option<String>,
    /// largest kick count, inclusive [default: 200]
    #[arg(long)]
    kicks: Option<String>,
    /// observable: projector onto momenta lo..=hi [default: -8,8]
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// initial momentum eigenstate index [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    initial: Option<String>,
}

#[derive(Args)]
struct QkrSpreadArgs {
    /// momentum lattice size, power of two [default: 256]
    #[arg(long)]
    n: Option<String>,
    /// kick strength, > 0 [default: 10]
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// kick period [default: 1]
    #[arg(long)]
    tau: Option<String>,
    /// effective Planck constant [default: 0.25]
    #[arg(long)]
    hbar: Option<String>,
    /// number of kicks [default: 200]
    #[arg(long)]
    kicks: Option<String>,
    /// initial momentum eigenstate index [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    initial: Option<String>,
}

#[derive(Args)]
struct QkrSpectrumArgs {
    /// momentum lattice size, power of two [default: 256]
    #[arg(long)]
    n: Option<String>,
    /// kick strength, > 0 [default: 10]
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// kick period [default: 1]
    #[arg(long)]
    tau: Option<String>,
    /// effective Planck constant [default: 0.25]
    #[arg(long)]
    hbar: Option<String>,
    /// second-harmonic kick amplitude, breaks parity [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    a2: Option<String>,
    /// second-harmonic phase [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    theta2: Option<String>,
    /// kick potential phase offset [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    theta0: Option<String>,
}

#[derive(Subcommand)]
enum WignerCmd {
    /// Trace rule, star-product scaling and quadratic-flow covariance
    /// reports (JSON or CSV report rows)
    Checks(WignerChecksArgs),
}

#[derive(Args)]
struct WignerChecksArgs {
    /// grid points per axis for the trace-rule check, power of two
    /// [default: 128]
    #[arg(long)]
    n: Option<String>,
    /// random state/observable pairs for the trace-rule check [default: 100]
    #[arg(long)]
    pairs: Option<String>,
    /// envelope modes spanning the band-limited subspace [default: 8]
    #[arg(long)]
    modes: Option<String>,
}

#[derive(Subcommand)]
enum RmtCmd {
    /// Draw ensemble matrices (CSV columns: sample,i,j,re,im; gse emits its
    /// full doubled realization)
    Sample(RmtCommonArgs),
    /// Entry-wise independence screens: worst pairwise correlation and a
    /// chi-square contingency scan (two reports)
    Randomness(RmtCommonArgs),
    /// Conjugation-invariance screen against fresh transforms of the same
    /// symmetry class (one report)
    Invariance(RmtCommonArgs),
    /// Unfolded bulk spacing statistics against the class surmise: report
    /// under json, pooled histogram under csv
    /// (CSV columns: bin_left,bin_right,density)
    Spacing(RmtSpacingArgs),
}

#[derive(Args)]
struct RmtCommonArgs {
    /// ensemble: goe, gue or gse [default: goe]
    #[arg(long)]
    ensemble: Option<String>,
    /// matrix dimension [default: 8]
    #[arg(long)]
    n: Option<String>,
    /// number of matrices [default: 1 for sample, 10000 otherwise]
    #[arg(long)]
    samples: Option<String>,
}

#[derive(Args)]
struct RmtSpacingArgs {
    /// ensemble: goe, gue or gse [default: goe]
    #[arg(long)]
    ensemble: Option<String>,
    /// matrix dimension [default: 200]
    #[arg(long)]
    n: Option<String>,
    /// number of matrices [default: 200]
    #[arg(long)]
    samples: Option<String>,
    /// unfolding: auto, semicircle or poly:<degree> [default: auto]
    #[arg(long)]
    method: Option<String>,
    /// histogram bins over [0, 4] for csv output [default: 40]
    #[arg(long)]
    bins: Option<String>,
}

#[derive(Args)]
struct AppendixEArgs {
    /// marginal probabilities, comma-separated, each in (0, 1/2)
    /// [default: 0.2,0.3]
    #[arg(long)]
    marginals: Option<String>,
    /// joint probability, in (0, 1/2) [default: 0.06]
    #[arg(long)]
    joint: Option<String>,
    /// Hilbert-space dimension, >= 3 [default: 4]
    #[arg(long)]
    dim: Option<String>,
    /// lower mixture weight, in (0, min p); auto interpolates below the
    /// smallest input [default: auto]
    #[arg(long)]
    alpha: Option<String>,
    /// upper mixture weight, in (max p, 1/2]; auto interpolates above the
    /// largest input [default: auto]
    #[arg(long)]
    beta: Option<String>,
}

#[derive(Args)]
struct BgsArgs {
    /// momentum lattice size, power of two [default: 512]
    #[arg(long)]
    n: Option<String>,
    /// kick strength, >= 0 (0 probes the integrable limit) [default: 10]
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// effective Planck constant [default: 0.2]
    #[arg(long)]
    hbar: Option<String>,
    /// kick periods pooled into one spacing sample [default: 1.0,1.1,1.3]
    #[arg(long)]
    taus: Option<String>,
    /// second-harmonic kick amplitude, breaks parity [default: 0.5]
    #[arg(long, allow_hyphen_values = true)]
    a2: Option<String>,
    /// second-harmonic phase [default: 0.7]
    #[arg(long, allow_hyphen_values = true)]
    theta2: Option<String>,
}

#[derive(Args)]
struct ReplayArgs {
    /// manifest recorded by a previous --out run
    manifest: PathBuf,
}

impl Command {
    /// canonical name plus explicit flag assignments, config/default gaps
    /// filled in later
    fn flags(&self) -> (&'static str, Vec<(&'static str, Option<String>)>) {
        match self {
            Command::Mixing(a) => (
                "mixing",
                vec![
                    ("map", a.map.clone()),
                    ("set-a", a.set_a.clone()),
                    ("set-b", a.set_b.clone()),
                    ("t-max", a.t_max.clone()),
                    ("grid", a.grid.clone()),
                ],
            ),
            Command::Factorization(a) => (
                "factorization",
                vec![
                    ("map", a.map.clone()),
                    ("set-a", a.set_a.clone()),
                    ("set-b", a.set_b.clone()),
                    ("gap-max", a.gap_max.clone()),
                    ("grid", a.grid.clone()),
                ],
            ),
            Command::Ulam(a) => (
                "ulam",
                vec![("map", a.map.clone()), ("cells", a.cells.clone()), ("t", a.t.clone())],
            ),
            Command::Qkr(QkrCmd::Correlation(a)) => (
                "qkr correlation",
                vec![
                    ("n", a.n.clone()),
                    ("lambda", a.lambda.clone()),
                    ("tau", a.tau.clone()),
                    ("hbar", a.hbar.clone()),
                    ("kicks", a.kicks.clone()),
                    ("window", a.window.clone()),
                    ("initial", a.initial.clone()),
                ],
            ),
            Command::Qkr(QkrCmd::Spread(a)) => (
                "qkr spread",
                vec![
                    ("n", a.n.clone()),
                    ("lambda", a.lambda.clone()),
                    ("tau", a.tau.clone()),
                    ("hbar", a.hbar.clone()),
                    ("kicks", a.kicks.clone()),
                    ("initial", a.initial.clone()),
                ],
            ),
            Command::Qkr(QkrCmd::Spectrum(a)) => (
                "qkr spectrum",
                vec![
                    ("n", a.n.clone()),
                    ("lambda", a.lambda.clone()),
                    ("tau", a.tau.clone()),
                    ("hbar", a.hbar.clone()),
                    ("a2", a.a2.clone()),
                    ("theta2", a.theta2.clone()),
                    ("theta0", a.theta0.clone()),
                ],
            ),
            Command::Wigner(WignerCmd::Checks(a)) => (
                "wigner checks",
                vec![
                    ("n", a.n.clone()),
                    ("pairs", a.pairs.clone()),
                    ("modes", a.modes.clone()),
                ],
            ),
            Command::Rmt(RmtCmd::Sample(a)) => ("rmt sample", rmt_common(a)),
            Command::Rmt(RmtCmd::Randomness(a)) => ("rmt randomness", rmt_common(a)),
            Command::Rmt(RmtCmd::Invariance(a)) => ("rmt invariance", rmt_common(a)),
            Command::Rmt(RmtCmd::Spacing(a)) => (
                "rmt spacing",
                vec![
                    ("ensemble", a.ensemble.clone()),
                    ("n", a.n.clone()),
                    ("samples", a.samples.clone()),
                    ("method", a.method.clone()),
                    ("bins", a.bins.clone()),
                ],
            ),
            Command::AppendixE(a) => (
                "appendix-e",
                vec![
                    ("marginals", a.marginals.clone()),
                    ("joint", a.joint.clone()),
                    ("dim", a.dim.clone()),
                    ("alpha", a.alpha.clone()),
                    ("beta", a.beta.clone()),
                ],
            ),
            Command::Bgs(a) => (
                "bgs",
                vec![
                    ("n", a.n.clone()),
                    ("lambda", a.lambda.clone()),
                    ("hbar", a.hbar.clone()),
                    ("taus", a.taus.clone()),
                    ("a2", a.a2.clone()),
                    ("theta2", a.theta2.clone()),
                ],
            ),
            Command::Replay(_) => ("replay", Vec::new()),
        }
    }
}

fn rmt_common(a: &RmtCommonArgs) -> Vec<(&'static str, Option<String>)> {
    vec![
        ("ensemble", a.ensemble.clone()),
        ("n", a.n.clone()),
        ("samples", a.samples.clone()),
    ]
}

fn main() {
    spectramix::init_threads();
    let cli = Cli::parse();
    let code = match real_main(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    };
    std::process::exit(i32::from(code));
}

fn real_main(cli: Cli) -> Result<u8, CliError> {
    let file_cfg = match &cli.config {
        Some(path) => config::load(path)?,
        None => Default::default(),
    };

    if let Command::Replay(args) = &cli.command {
        return manifest::replay(&args.manifest);
    }

    let seed_str = config::resolve_global(&cli.seed, &file_cfg, "seed", "0");
    let seed: u64 = seed_str
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid value for --seed: '{seed_str}'")))?;
    let format_str = config::resolve_global(&cli.format, &file_cfg, "format", "csv");
    let format = Format::parse(&format_str)?;

    let (sub, flags) = cli.command.flags();
    let mut params = config::resolve_params(sub, &flags, &file_cfg)?;
    params.insert("format".to_string(), format_str);

    let outcome = run::execute(sub, &params, seed, format)?;

    if outcome.echo_reports {
        for report in &outcome.reports {
            eprintln!(
                "{}",
                serde_json::to_string(report).map_err(|e| CliError::Io(e.to_string()))?
            );
        }
    }

    match &cli.out {
        Some(path) => {
            std::fs::write(path, &outcome.artifact)
                .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
            manifest::write(path, sub, &params, seed, &outcome.artifact)?;
        }
        None => {
            std::io::stdout()
                .write_all(&outcome.artifact)
                .map_err(|e| CliError::Io(format!("writing stdout: {e}")))?;
        }
    }
    Ok(outcome.exit)
}
