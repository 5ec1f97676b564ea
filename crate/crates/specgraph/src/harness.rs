//! End-to-end experiment driver: generate → learn → recover → score, with
//! deterministic seeded sweeps over noise and sparsity and replayable
//! manifests.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::learn::{estimate_sparsity, learn_eigenbasis, LearnConfig, Sparsity};
use crate::metrics::{aggregate, f_measure, GraphModel, TrialRecord};
use crate::recover::{
    assemble_adjacency_lenient, binarize, build_adjacency_lp, solve_feasibility, Recovery,
};
use crate::seed;
use crate::synth::{
    gen_ba_graph, gen_er_graph, gen_rbf_graph, make_ground_truth, GroundTruth, SignalGenConfig,
    SparsityMode,
};

const MANIFEST_VERSION: u32 = 1;

// Sub-seed stream tags; see crate::seed for the mixing function.
const TAG_GRAPH: u64 = 1;
const TAG_SIGNALS: u64 = 2;
const TAG_LEARN: u64 = 3;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m: usize,
    pub models: Vec<GraphModel>,
    pub k_max: usize,
    /// Noise variances for the noise sweep.
    pub noise_levels: Vec<f64>,
    /// Exact per-column sparsities for the sparsity sweep.
    pub sparsity_levels: Vec<usize>,
    pub graphs_per_model: usize,
    pub noise_reps_per_graph: usize,
    pub learner: LearnConfig,
    /// Binarization threshold, relative to the largest recovered weight.
    pub tau: f64,
    pub master_seed: u64,
    pub rbf_sigma: f64,
    pub rbf_threshold: f64,
    pub er_p: f64,
    /// Tolerance for certifying the eigenvalue LP feasible.
    pub feasibility_tol: f64,
    /// Trials whose re-verified LP violation exceeds this fail outright.
    pub max_residual: f64,
    /// Noise variance used while sweeping sparsity.
    pub sparsity_sweep_noise: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 20,
            m: 300,
            models: GraphModel::ALL.to_vec(),
            k_max: 5,
            noise_levels: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            sparsity_levels: vec![1, 2, 4, 6, 8, 10, 12],
            graphs_per_model: 10,
            noise_reps_per_graph: 10,
            learner: LearnConfig { k: Sparsity::Fixed(5), ..LearnConfig::default() },
            tau: 0.35,
            master_seed: 0,
            rbf_sigma: crate::synth::DEFAULT_RBF_SIGMA,
            rbf_threshold: crate::synth::DEFAULT_RBF_THRESHOLD,
            er_p: crate::synth::DEFAULT_ER_P,
            feasibility_tol: crate::recover::DEFAULT_FEASIBILITY_TOL,
            max_residual: f64::INFINITY,
            sparsity_sweep_noise: 0.0,
        }
    }
}

impl ExperimentConfig {
    /// Full-scale averaging from the reference protocol (100 graphs x 100
    /// noise realizations).
    pub fn paper_scale(mut self) -> Self {
        self.graphs_per_model = 100;
        self.noise_reps_per_graph = 100;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.m < 1 || self.graphs_per_model < 1 || self.noise_reps_per_graph < 1 {
            return Err(Error::Config("all counts must be >= 1 (n >= 2)".into()));
        }
        if self.models.is_empty() {
            return Err(Error::Config("at least one graph model is required".into()));
        }
        if self.k_max < 1 || self.k_max > self.n {
            return Err(Error::Config(format!("k_max {} out of range 1..={}", self.k_max, self.n)));
        }
        if self.noise_levels.iter().any(|nl| *nl < 0.0) {
            return Err(Error::Config("noise levels must be nonnegative".into()));
        }
        if self.sparsity_levels.iter().any(|s| *s < 1 || *s > self.n) {
            return Err(Error::Config("sparsity levels must lie in 1..=n".into()));
        }
        if !(self.tau >= 0.0) {
            return Err(Error::Config("tau must be nonnegative".into()));
        }
        Ok(())
    }

    /// Flat `key = value` serialization; the exact inverse of [`ExperimentConfig::parse`].
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "m = {}", self.m);
        let _ = writeln!(s, "models = {}", join(self.models.iter()));
        let _ = writeln!(s, "k_max = {}", self.k_max);
        let _ = writeln!(s, "noise_levels = {}", join(self.noise_levels.iter()));
        let _ = writeln!(s, "sparsity_levels = {}", join(self.sparsity_levels.iter()));
        let _ = writeln!(s, "graphs_per_model = {}", self.graphs_per_model);
        let _ = writeln!(s, "noise_reps_per_graph = {}", self.noise_reps_per_graph);
        let k = match self.learner.k {
            Sparsity::Fixed(k) => k.to_string(),
            Sparsity::Auto => "auto".into(),
        };
        let _ = writeln!(s, "k = {k}");
        let _ = writeln!(s, "epsilon = {}", self.learner.epsilon);
        let _ = writeln!(s, "max_iters = {}", self.learner.max_iters);
        let _ = writeln!(s, "restarts = {}", self.learner.restarts);
        let _ = writeln!(s, "tau = {}", self.tau);
        let _ = writeln!(s, "master_seed = {}", self.master_seed);
        let _ = writeln!(s, "rbf_sigma = {}", self.rbf_sigma);
        let _ = writeln!(s, "rbf_threshold = {}", self.rbf_threshold);
        let _ = writeln!(s, "er_p = {}", self.er_p);
        let _ = writeln!(s, "feasibility_tol = {}", self.feasibility_tol);
        let _ = writeln!(s, "max_residual = {}", self.max_residual);
        let _ = writeln!(s, "sparsity_sweep_noise = {}", self.sparsity_sweep_noise);
        s
    }

    /// Parses the flat key = value form. Unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let kv = crate::io::parse_key_values(text)?;
        let mut cfg = ExperimentConfig::default();
        for (key, value) in &kv {
            match key.as_str() {
                "n" => cfg.n = parse_num(key, value)?,
                "m" => cfg.m = parse_num(key, value)?,
                "models" => {
                    cfg.models = value
                        .split(',')
                        .map(|tok| tok.trim().parse())
                        .collect::<Result<Vec<GraphModel>>>()?;
                }
                "k_max" => cfg.k_max = parse_num(key, value)?,
                "noise_levels" => cfg.noise_levels = parse_list(key, value)?,
                "sparsity_levels" => cfg.sparsity_levels = parse_list(key, value)?,
                "graphs_per_model" => cfg.graphs_per_model = parse_num(key, value)?,
                "noise_reps_per_graph" => cfg.noise_reps_per_graph = parse_num(key, value)?,
                "k" => {
                    cfg.learner.k = if value.eq_ignore_ascii_case("auto") {
                        Sparsity::Auto
                    } else {
                        Sparsity::Fixed(parse_num(key, value)?)
                    };
                }
                "epsilon" => cfg.learner.epsilon = parse_num(key, value)?,
                "max_iters" => cfg.learner.max_iters = parse_num(key, value)?,
                "restarts" => cfg.learner.restarts = parse_num(key, value)?,
                "tau" => cfg.tau = parse_num(key, value)?,
                "master_seed" => cfg.master_seed = parse_num(key, value)?,
                "rbf_sigma" => cfg.rbf_sigma = parse_num(key, value)?,
                "rbf_threshold" => cfg.rbf_threshold = parse_num(key, value)?,
                "er_p" => cfg.er_p = parse_num(key, value)?,
                "feasibility_tol" => cfg.feasibility_tol = parse_num(key, value)?,
                "max_residual" => cfg.max_residual = parse_num(key, value)?,
                "sparsity_sweep_noise" => cfg.sparsity_sweep_noise = parse_num(key, value)?,
                other => return Err(Error::Config(format!("unknown config key: {other}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn generate_graph(&self, model: GraphModel, graph_seed: u64) -> Result<crate::Graph> {
        match model {
            GraphModel::Rbf => gen_rbf_graph(self.n, self.rbf_sigma, self.rbf_threshold, graph_seed),
            GraphModel::Er => gen_er_graph(self.n, self.er_p, graph_seed),
            GraphModel::Ba => gen_ba_graph(self.n, graph_seed),
        }
    }
}

fn join<T: std::fmt::Display>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("bad value for {key}: {value}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').map(|tok| parse_num(key, tok.trim())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Noise,
    Sparsity,
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepAxis::Noise => "noise",
            SweepAxis::Sparsity => "sparsity",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub model: GraphModel,
    pub axis_value: f64,
    pub mean_f: f64,
    pub stddev_f: f64,
    pub count: usize,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
    pub records: Vec<TrialRecord>,
    pub scheduled: usize,
    pub failures: usize,
}

impl SweepResult {
    /// Deterministic CSV form of the aggregated table.
    pub fn table_csv(&self) -> String {
        let mut s = format!("model,{}_level,mean_f,stddev_f,count\n", self.axis);
        for row in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{:.6},{:.6},{}",
                row.model, row.axis_value, row.mean_f, row.stddev_f, row.count
            );
        }
        s
    }

    pub fn trials_csv(&self) -> String {
        let mut s = String::from(
            "model,noise_level,trial_seed,k_estimate,precision,recall,f_measure,runtime_ms\n",
        );
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{:.6},{:.6},{:.6},{}",
                r.graph_model,
                r.noise_level,
                r.seed,
                r.k_estimate,
                r.score.precision,
                r.score.recall,
                r.score.f_measure,
                r.runtime_ms
            );
        }
        s
    }

    pub fn mean_for(&self, model: GraphModel, axis_value: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.model == model && r.axis_value == axis_value)
            .map(|r| r.mean_f)
    }
}

/// Runs the full pipeline once: generate graph and signals, learn a basis,
/// recover eigenvalues, assemble, binarize, score against the ground truth.
pub fn run_trial(
    cfg: &ExperimentConfig,
    model: GraphModel,
    noise_level: f64,
    exact_sparsity: Option<usize>,
    graph_seed: u64,
    signal_seed: u64,
) -> Result<TrialRecord> {
    let started = Instant::now();
    let graph = cfg.generate_graph(model, graph_seed)?;

    let mut scfg = SignalGenConfig::new(cfg.m, cfg.k_max, noise_level, signal_seed);
    if let Some(level) = exact_sparsity {
        scfg.k_max = level;
        scfg.mode = SparsityMode::Exact;
    }
    let gt = make_ground_truth(graph, &scfg)?;

    let (basis, k_estimate) = learn_basis(cfg, &gt, exact_sparsity, signal_seed)?;
    let recovery = recover_eigenvalues(cfg, &basis)?;
    let adjacency = assemble_adjacency_lenient(&basis, &recovery.eigenvalues);
    let learned = binarize(&adjacency, cfg.tau)?;
    let score = f_measure(&learned, &gt.graph)?;

    Ok(TrialRecord {
        graph_model: model,
        noise_level,
        k_estimate,
        score,
        seed: signal_seed,
        runtime_ms: started.elapsed().as_millis() as u64,
    })
}

fn learn_basis(
    cfg: &ExperimentConfig,
    gt: &GroundTruth,
    exact_sparsity: Option<usize>,
    signal_seed: u64,
) -> Result<(crate::Eigenbasis, usize)> {
    let mut lcfg = cfg.learner.clone();
    lcfg.seed = seed::mix(signal_seed, TAG_LEARN);
    // Sparsity-sweep trials code at the generating sparsity.
    if let Some(level) = exact_sparsity {
        lcfg.k = Sparsity::Fixed(level);
    }
    let k = match lcfg.k {
        Sparsity::Fixed(k) => k,
        Sparsity::Auto => {
            let (k, _) = estimate_sparsity(&gt.signals.noisy, &lcfg)?;
            lcfg.k = Sparsity::Fixed(k);
            k
        }
    };
    let run = learn_eigenbasis(&gt.signals.noisy, &lcfg)?;
    Ok((run.basis, k))
}

fn recover_eigenvalues(cfg: &ExperimentConfig, basis: &crate::Eigenbasis) -> Result<Recovery> {
    let lp = build_adjacency_lp(basis, false);
    let recovery = solve_feasibility(&lp, basis, cfg.feasibility_tol)?;
    // A learned basis is rarely an exact eigenbasis, so the strict program
    // is typically infeasible; the least-violation eigenvalues still carry
    // the topology. Only residuals beyond the configured bound abort.
    if recovery.residual > cfg.max_residual {
        return Err(Error::Infeasible { residual: recovery.residual });
    }
    Ok(recovery)
}

fn run_cells(
    cfg: &ExperimentConfig,
    axis: SweepAxis,
    cells: &[(GraphModel, usize, f64, Option<usize>)],
) -> SweepResult {
    // One task per (cell, graph, rep); indices drive sub-seeds so the result
    // is independent of the execution order.
    let mut tasks = Vec::new();
    for &(model, model_idx, noise, sparsity) in cells {
        let axis_value = match axis {
            SweepAxis::Noise => noise,
            SweepAxis::Sparsity => sparsity.expect("sparsity cell") as f64,
        };
        let axis_idx = axis_value.to_bits();
        for g in 0..cfg.graphs_per_model {
            for r in 0..cfg.noise_reps_per_graph {
                let graph_seed =
                    seed::mix_all(cfg.master_seed, &[TAG_GRAPH, model_idx as u64, g as u64]);
                let signal_seed = seed::mix_all(
                    cfg.master_seed,
                    &[TAG_SIGNALS, model_idx as u64, g as u64, r as u64, axis_idx],
                );
                tasks.push((model, axis_value, noise, sparsity, graph_seed, signal_seed));
            }
        }
    }

    let outcomes: Vec<Result<TrialRecord>> = tasks
        .par_iter()
        .map(|&(model, axis_value, noise, sparsity, graph_seed, signal_seed)| {
            let mut rec = run_trial(cfg, model, noise, sparsity, graph_seed, signal_seed)?;
            // The table is keyed by the axis value.
            rec.noise_level = axis_value;
            Ok(rec)
        })
        .collect();

    let scheduled = outcomes.len();
    let records: Vec<TrialRecord> = outcomes.into_iter().filter_map(|r| r.ok()).collect();
    let failures = scheduled - records.len();
    let rows = match aggregate(&records) {
        Ok(cells) => cells
            .into_iter()
            .map(|c| SweepRow {
                model: c.model,
                axis_value: c.noise_level,
                mean_f: c.mean_f,
                stddev_f: c.stddev_f,
                count: c.count,
            })
            .collect(),
        Err(_) => Vec::new(),
    };
    SweepResult { axis, rows, records, scheduled, failures }
}

/// F-measure per (model, noise level), averaged over graphs and noise
/// realizations.
pub fn sweep_noise(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    if cfg.noise_levels.is_empty() {
        return Err(Error::Config("noise_levels must be nonempty".into()));
    }
    let mut cells = Vec::new();
    for (mi, &model) in cfg.models.iter().enumerate() {
        for &noise in &cfg.noise_levels {
            cells.push((model, mi, noise, None));
        }
    }
    Ok(run_cells(cfg, SweepAxis::Noise, &cells))
}

/// F-measure per (model, exact per-column sparsity).
pub fn sweep_sparsity(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    if cfg.sparsity_levels.is_empty() {
        return Err(Error::Config("sparsity_levels must be nonempty".into()));
    }
    let mut cells = Vec::new();
    for (mi, &model) in cfg.models.iter().enumerate() {
        for &level in &cfg.sparsity_levels {
            cells.push((model, mi, cfg.sparsity_sweep_noise, Some(level)));
        }
    }
    Ok(run_cells(cfg, SweepAxis::Sparsity, &cells))
}

/// Self-checksummed record of a completed sweep, sufficient to re-run it.
pub fn manifest_string(cfg: &ExperimentConfig, axis: SweepAxis) -> String {
    let mut body = String::new();
    let _ = writeln!(body, "manifest_version = {MANIFEST_VERSION}");
    let _ = writeln!(body, "command = sweep-{axis}");
    body.push_str(&cfg.serialize());
    let digest = Sha256::digest(body.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    let _ = writeln!(body, "checksum = {hex}");
    body
}

/// Re-executes the sweep recorded in a manifest. `model_filter` restricts
/// the replay to one model's rows.
pub fn replay(manifest: &str, model_filter: Option<GraphModel>) -> Result<SweepResult> {
    let Some((body, checksum_line)) = manifest.trim_end().rsplit_once('\n') else {
        return Err(Error::Manifest("manifest too short".into()));
    };
    let body = format!("{body}\n");
    let Some(stored) = checksum_line.trim().strip_prefix("checksum = ") else {
        return Err(Error::Manifest("missing checksum line".into()));
    };
    let digest = Sha256::digest(body.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    if hex != stored {
        return Err(Error::Manifest("checksum mismatch; manifest was modified".into()));
    }

    let mut kv = crate::io::parse_key_values(&body)?;
    let version = kv
        .remove("manifest_version")
        .ok_or_else(|| Error::Manifest("missing manifest_version".into()))?;
    if version.parse::<u32>().map_err(|_| Error::Manifest("bad manifest_version".into()))?
        != MANIFEST_VERSION
    {
        return Err(Error::Manifest(format!("unsupported manifest version {version}")));
    }
    let command =
        kv.remove("command").ok_or_else(|| Error::Manifest("missing command".into()))?;
    let cfg_text: String =
        kv.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    let cfg = ExperimentConfig::parse(&cfg_text)?;
    if let Some(model) = model_filter {
        if !cfg.models.contains(&model) {
            return Err(Error::Manifest(format!("model {model} not present in manifest")));
        }
        // Keep the original model index so sub-seeds match the full run.
        let idx = cfg.models.iter().position(|m| *m == model).expect("checked above");
        let axis = match command.as_str() {
            "sweep-noise" => SweepAxis::Noise,
            "sweep-sparsity" => SweepAxis::Sparsity,
            other => return Err(Error::Manifest(format!("unknown command {other}"))),
        };
        let mut cells = Vec::new();
        match axis {
            SweepAxis::Noise => {
                for &noise in &cfg.noise_levels {
                    cells.push((model, idx, noise, None));
                }
            }
            SweepAxis::Sparsity => {
                for &level in &cfg.sparsity_levels {
                    cells.push((model, idx, cfg.sparsity_sweep_noise, Some(level)));
                }
            }
        }
        cfg.validate()?;
        return Ok(run_cells(&cfg, axis, &cells));
    }
    match command.as_str() {
        "sweep-noise" => sweep_noise(&cfg),
        "sweep-sparsity" => sweep_sparsity(&cfg),
        other => Err(Error::Manifest(format!("unknown command {other}"))),
    }
}

/// Writes the table, per-trial records, per-model plot data, a gnuplot
/// script, and the replay manifest into `out_dir`.
pub fn write_outputs(out_dir: &Path, cfg: &ExperimentConfig, result: &SweepResult) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let axis = result.axis;
    std::fs::write(out_dir.join(format!("{axis}_table.csv")), result.table_csv())?;
    std::fs::write(out_dir.join(format!("{axis}_trials.csv")), result.trials_csv())?;
    std::fs::write(out_dir.join("manifest.txt"), manifest_string(cfg, axis))?;

    let mut plot = format!(
        "set xlabel '{axis} level'\nset ylabel 'mean F-measure'\nset yrange [0:1]\nplot \\\n"
    );
    let mut series = Vec::new();
    for &model in &cfg.models {
        let mut dat = String::new();
        for row in result.rows.iter().filter(|r| r.model == model) {
            let _ = writeln!(dat, "{} {:.6}", row.axis_value, row.mean_f);
        }
        let file = format!("{axis}_{model}.dat");
        std::fs::write(out_dir.join(&file), dat)?;
        series.push(format!("  '{file}' using 1:2 with linespoints title '{model}'"));
    }
    plot.push_str(&series.join(", \\\n"));
    plot.push('\n');
    std::fs::write(out_dir.join(format!("{axis}_plot.gnuplot")), plot)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            n: 8,
            m: 40,
            models: vec![GraphModel::Er],
            k_max: 2,
            noise_levels: vec![0.0],
            sparsity_levels: vec![2],
            graphs_per_model: 2,
            noise_reps_per_graph: 1,
            learner: LearnConfig {
                k: Sparsity::Fixed(2),
                restarts: 2,
                max_iters: 100,
                ..LearnConfig::default()
            },
            master_seed: 7,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn config_round_trip() {
        let cfg = tiny_config();
        let parsed = ExperimentConfig::parse(&cfg.serialize()).unwrap();
        assert_eq!(parsed.serialize(), cfg.serialize());
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        assert!(matches!(ExperimentConfig::parse("bogus = 1\n"), Err(Error::Config(_))));
        assert!(ExperimentConfig::parse("n = -3\n").is_err());
        assert!(ExperimentConfig::parse("models = XX\n").is_err());
        assert!(ExperimentConfig::parse("k_max = 99\n").is_err());
    }

    #[test]
    fn trial_is_deterministic() {
        let cfg = tiny_config();
        let a = run_trial(&cfg, GraphModel::Er, 0.0, None, 11, 12).unwrap();
        let b = run_trial(&cfg, GraphModel::Er, 0.0, None, 11, 12).unwrap();
        assert_eq!(a.score, b.score);
        assert_eq!(a.k_estimate, b.k_estimate);
        assert_eq!(a.seed, b.seed);
    }

    #[test]
    fn sweep_noise_accounting_and_determinism() {
        let cfg = tiny_config();
        let r1 = sweep_noise(&cfg).unwrap();
        assert_eq!(r1.scheduled, 2);
        assert_eq!(r1.records.len() + r1.failures, r1.scheduled);
        let r2 = sweep_noise(&cfg).unwrap();
        assert_eq!(r1.table_csv(), r2.table_csv());
    }

    #[test]
    fn sweep_requires_models_and_levels() {
        let mut cfg = tiny_config();
        cfg.models.clear();
        assert!(sweep_noise(&cfg).is_err());
        let mut cfg = tiny_config();
        cfg.noise_levels.clear();
        assert!(sweep_noise(&cfg).is_err());
        let mut cfg = tiny_config();
        cfg.sparsity_levels.clear();
        assert!(sweep_sparsity(&cfg).is_err());
    }

    #[test]
    fn replay_reproduces_table_bytes() {
        let cfg = tiny_config();
        let direct = sweep_noise(&cfg).unwrap();
        let manifest = manifest_string(&cfg, SweepAxis::Noise);
        let replayed = replay(&manifest, None).unwrap();
        assert_eq!(direct.table_csv(), replayed.table_csv());
    }

    #[test]
    fn replay_rejects_tampering() {
        let manifest = manifest_string(&tiny_config(), SweepAxis::Noise);
        let tampered = manifest.replace("master_seed = 7", "master_seed = 8");
        assert!(matches!(replay(&tampered, None), Err(Error::Manifest(_))));
        assert!(replay("junk\n", None).is_err());
    }

    #[test]
    fn replay_subset_matches_full_rows() {
        let mut cfg = tiny_config();
        cfg.models = vec![GraphModel::Er, GraphModel::Ba];
        let full = sweep_noise(&cfg).unwrap();
        let manifest = manifest_string(&cfg, SweepAxis::Noise);
        let subset = replay(&manifest, Some(GraphModel::Ba)).unwrap();
        let full_ba: Vec<&SweepRow> =
            full.rows.iter().filter(|r| r.model == GraphModel::Ba).collect();
        assert_eq!(subset.rows.len(), full_ba.len());
        for (a, b) in subset.rows.iter().zip(full_ba) {
            assert_eq!(a, b);
        }
        assert!(replay(&manifest, Some(GraphModel::Rbf)).is_err());
    }

    #[test]
    fn sparsity_sweep_uses_exact_support() {
        let cfg = tiny_config();
        let r = sweep_sparsity(&cfg).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].axis_value, 2.0);
        assert!(r.rows[0].count > 0);
    }
}
