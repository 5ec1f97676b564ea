use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use specgraph::error::Error;
use specgraph::harness::{
    self, sweep_noise, sweep_sparsity, write_outputs, ExperimentConfig, SweepAxis,
};
use specgraph::learn::{
    estimate_sparsity, learn_eigenbasis, pseudo_error, LearnConfig, Sparsity,
};
use specgraph::metrics::{f_measure, GraphModel};
use specgraph::recover::{
    assemble_adjacency_lenient, binarize, build_adjacency_lp, solve_feasibility, RecoveryStatus,
    DEFAULT_BINARIZE_TAU, DEFAULT_FEASIBILITY_TOL,
};
use specgraph::synth::{make_ground_truth, SignalGenConfig};
use specgraph::{io, Eigenbasis};

/// Graph topology inference from spectrally sparse signals.
#[derive(Parser)]
#[command(name = "specgraph", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a ground-truth graph and a synthetic signal data set.
    Gen(GenArgs),
    /// Learn an orthonormal eigenbasis from an observation matrix.
    Learn(LearnArgs),
    /// Recover eigenvalues and an adjacency matrix from a basis.
    Recover(RecoverArgs),
    /// Score a learned edge list against a ground-truth edge list.
    Eval(EvalArgs),
    /// F-measure sweep over noise levels.
    SweepNoise(SweepArgs),
    /// F-measure sweep over exact spectral sparsities.
    SweepSparsity(SweepArgs),
    /// Re-run a recorded sweep from its manifest.
    Replay(ReplayArgs),
    /// Six-node end-to-end demonstration.
    Demo6(Demo6Args),
}

#[derive(Args)]
struct GenArgs {
    /// Graph model: RBF, ER, or BA.
    #[arg(long)]
    model: GraphModel,
    #[arg(long, default_value_t = 20)]
    n: usize,
    /// Number of signals.
    #[arg(long, default_value_t = 300)]
    m: usize,
    #[arg(long = "k-max", default_value_t = 5)]
    k_max: usize,
    /// Noise variance per entry.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LearnArgs {
    /// Observation matrix file (rows = vertices, columns = signals).
    #[arg(long)]
    input: PathBuf,
    /// Target sparsity: an integer or "auto".
    #[arg(long, default_value = "auto")]
    k: String,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    #[arg(long = "max-iters", default_value_t = 500)]
    max_iters: usize,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RecoverArgs {
    /// Eigenbasis matrix file.
    #[arg(long)]
    basis: PathBuf,
    #[arg(long, default_value_t = DEFAULT_FEASIBILITY_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_BINARIZE_TAU)]
    tau: f64,
    /// Minimize total off-diagonal weight instead of pure feasibility.
    #[arg(long = "sparse-objective")]
    sparse_objective: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Learned graph edge list.
    #[arg(long)]
    learned: PathBuf,
    /// Ground-truth edge list.
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Flat key = value config file; defaults apply for absent keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// Full-scale averaging: 100 graphs x 100 noise realizations.
    #[arg(long = "paper-scale")]
    paper_scale: bool,
    /// Overrides the learner sparsity: an integer or "auto".
    #[arg(long)]
    k: Option<String>,
    /// Overrides the binarization threshold.
    #[arg(long)]
    tau: Option<f64>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Replay only this model's rows.
    #[arg(long)]
    model: Option<GraphModel>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct Demo6Args {
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidInput(_) | Error::Parse { .. } | Error::Manifest(_) => 2,
        Error::NumericalFailure(_) | Error::FailedConvergence | Error::SvdFailure => 3,
        Error::Infeasible { .. } | Error::ValidityViolation { .. } => 4,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Learn(args) => cmd_learn(args),
        Command::Recover(args) => cmd_recover(args),
        Command::Eval(args) => cmd_eval(args),
        Command::SweepNoise(args) => cmd_sweep(args, SweepAxis::Noise),
        Command::SweepSparsity(args) => cmd_sweep(args, SweepAxis::Sparsity),
        Command::Replay(args) => cmd_replay(args),
        Command::Demo6(args) => cmd_demo6(args),
    }
}

fn cmd_gen(args: GenArgs) -> Result<(), Error> {
    let cfg = ExperimentConfig {
        n: args.n,
        m: args.m,
        k_max: args.k_max,
        models: vec![args.model],
        master_seed: args.seed,
        ..ExperimentConfig::default()
    };
    cfg.validate()?;
    let graph = cfg.generate_graph(args.model, args.seed)?;
    let scfg = SignalGenConfig::new(args.m, args.k_max, args.noise, args.seed);
    let gt = make_ground_truth(graph, &scfg)?;

    std::fs::create_dir_all(&args.out)?;
    io::write_graph(&args.out.join("graph.edges"), &gt.graph)?;
    io::write_matrix(&args.out.join("basis.mat"), gt.basis.matrix())?;
    io::write_matrix(&args.out.join("coefficients.mat"), &gt.signals.coefficients)?;
    io::write_matrix(&args.out.join("clean.mat"), &gt.signals.clean)?;
    io::write_matrix(&args.out.join("noisy.mat"), &gt.signals.noisy)?;
    let manifest = format!(
        "command = gen\nmodel = {}\nn = {}\nm = {}\nk_max = {}\nnoise = {}\nseed = {}\n",
        args.model, args.n, args.m, args.k_max, args.noise, args.seed
    );
    std::fs::write(args.out.join("gen_manifest.txt"), manifest)?;
    println!(
        "generated {} graph: {} vertices, {} edges, {} signals",
        args.model,
        gt.graph.n(),
        gt.graph.edge_count(),
        args.m
    );
    Ok(())
}

fn parse_sparsity(s: &str) -> Result<Sparsity, Error> {
    if s.eq_ignore_ascii_case("auto") {
        Ok(Sparsity::Auto)
    } else {
        s.parse::<usize>()
            .map(Sparsity::Fixed)
            .map_err(|_| Error::Config(format!("bad k: {s} (expected an integer or \"auto\")")))
    }
}

fn cmd_learn(args: LearnArgs) -> Result<(), Error> {
    let x = io::read_matrix(&args.input)?;
    let mut cfg = LearnConfig {
        k: parse_sparsity(&args.k)?,
        epsilon: args.epsilon,
        max_iters: args.max_iters,
        restarts: args.restarts,
        seed: args.seed,
    };

    let mut report = String::new();
    if let Sparsity::Auto = cfg.k {
        let (k, curve) = estimate_sparsity(&x, &cfg)?;
        report.push_str(&format!("estimated_k = {k}\n"));
        report.push_str("pseudo_error_curve =");
        for e in &curve {
            report.push_str(&format!(" {e:.6e}"));
        }
        report.push('\n');
        cfg.k = Sparsity::Fixed(k);
    }
    let run = learn_eigenbasis(&x, &cfg)?;
    let err = pseudo_error(&x, &run.basis, &run.coefficients)?;
    report.push_str(&format!(
        "iterations = {}\nconverged = {}\nfinal_objective = {:.6e}\npseudo_error = {:.6e}\n",
        run.iterations,
        run.converged,
        run.objective(),
        err
    ));
    report.push_str("objective_trace =");
    for o in &run.objective_trace {
        report.push_str(&format!(" {o:.6e}"));
    }
    report.push('\n');

    std::fs::create_dir_all(&args.out)?;
    io::write_matrix(&args.out.join("basis.mat"), run.basis.matrix())?;
    io::write_matrix(&args.out.join("coefficients.mat"), &run.coefficients)?;
    std::fs::write(args.out.join("learn_report.txt"), &report)?;
    print!("{report}");
    Ok(())
}

fn cmd_recover(args: RecoverArgs) -> Result<(), Error> {
    let basis = Eigenbasis::new(io::read_matrix(&args.basis)?)?;
    let lp = build_adjacency_lp(&basis, args.sparse_objective);
    let recovery = solve_feasibility(&lp, &basis, args.tol)?;
    let adjacency = assemble_adjacency_lenient(&basis, &recovery.eigenvalues);
    let graph = binarize(&adjacency, args.tau)?;

    std::fs::create_dir_all(&args.out)?;
    io::write_vector(&args.out.join("lambda.vec"), &recovery.eigenvalues)?;
    io::write_matrix(&args.out.join("adjacency.mat"), &adjacency)?;
    io::write_graph(&args.out.join("edges.txt"), &graph)?;
    let report = format!(
        "status = {:?}\nresidual = {:.6e}\npivots = {}\nedges = {}\n",
        recovery.status,
        recovery.residual,
        recovery.pivots,
        graph.edge_count()
    );
    std::fs::write(args.out.join("recover_report.txt"), &report)?;
    print!("{report}");
    if recovery.status != RecoveryStatus::Feasible {
        return Err(Error::Infeasible { residual: recovery.residual });
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), Error> {
    let learned = io::read_graph(&args.learned)?;
    let truth = io::read_graph(&args.truth)?;
    let score = f_measure(&learned, &truth)?;
    println!(
        "precision = {:.6}\nrecall = {:.6}\nf_measure = {:.6}\ntp = {} fp = {} fn = {}",
        score.precision,
        score.recall,
        score.f_measure,
        score.true_positives,
        score.false_positives,
        score.false_negatives
    );
    Ok(())
}

fn configure_jobs(jobs: Option<usize>) -> Result<(), Error> {
    if let Some(jobs) = jobs {
        if jobs == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs, axis: SweepAxis) -> Result<(), Error> {
    configure_jobs(args.jobs)?;
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::parse(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(k) = &args.k {
        cfg.learner.k = parse_sparsity(k)?;
    }
    if let Some(tau) = args.tau {
        cfg.tau = tau;
    }
    if args.paper_scale {
        cfg = cfg.paper_scale();
    }
    let result = match axis {
        SweepAxis::Noise => sweep_noise(&cfg)?,
        SweepAxis::Sparsity => sweep_sparsity(&cfg)?,
    };
    write_outputs(&args.out, &cfg, &result)?;
    print!("{}", result.table_csv());
    println!("trials: {} scheduled, {} failed", result.scheduled, result.failures);
    Ok(())
}

fn cmd_replay(args: ReplayArgs) -> Result<(), Error> {
    configure_jobs(args.jobs)?;
    let manifest = std::fs::read_to_string(&args.manifest)?;
    let result = harness::replay(&manifest, args.model)?;
    std::fs::create_dir_all(&args.out)?;
    std::fs::write(
        args.out.join(format!("{}_table.csv", result.axis)),
        result.table_csv(),
    )?;
    print!("{}", result.table_csv());
    Ok(())
}

fn cmd_demo6(args: Demo6Args) -> Result<(), Error> {
    // Small end-to-end run on a 6-vertex graph with wideband 2-sparse
    // spectra, printing truth and recovery side by side.
    let cfg = ExperimentConfig {
        n: 6,
        m: 60,
        k_max: 2,
        learner: LearnConfig { k: Sparsity::Fixed(2), ..LearnConfig::default() },
        ..ExperimentConfig::default()
    };
    let graph = cfg.generate_graph(GraphModel::Er, args.seed)?;
    let scfg = SignalGenConfig::new(cfg.m, cfg.k_max, 0.0, args.seed ^ 1);
    let gt = make_ground_truth(graph, &scfg)?;

    let lcfg = LearnConfig { seed: args.seed ^ 2, ..cfg.learner.clone() };
    let run = learn_eigenbasis(&gt.signals.noisy, &lcfg)?;
    let lp = build_adjacency_lp(&run.basis, false);
    let recovery = solve_feasibility(&lp, &run.basis, cfg.feasibility_tol)?;
    let adjacency = assemble_adjacency_lenient(&run.basis, &recovery.eigenvalues);
    let learned = binarize(&adjacency, cfg.tau)?;
    let score = f_measure(&learned, &gt.graph)?;

    println!("ground truth edges: {:?}", one_based(&gt.graph));
    println!("learned edges:      {:?}", one_based(&learned));
    println!(
        "learn objective = {:.3e}, recovery status = {:?}, residual = {:.3e}",
        run.objective(),
        recovery.status,
        recovery.residual
    );
    println!(
        "precision = {:.3}, recall = {:.3}, f_measure = {:.3}",
        score.precision, score.recall, score.f_measure
    );
    Ok(())
}

fn one_based(g: &specgraph::Graph) -> Vec<(usize, usize)> {
    g.edge_pairs().into_iter().map(|(i, j)| (i + 1, j + 1)).collect()
}
