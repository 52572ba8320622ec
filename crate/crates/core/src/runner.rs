//! Experiment orchestration and persistence.
//!
//! An output directory holds:
//!
//! * `manifest.json`: run metadata, including the canonical campaign config
//!   and its SHA-256, written before any battle runs and updated at the end.
//! * `results.jsonl`: one [`BattleResult`] per line, sorted by (trial, battle).
//! * `report.json`: the [`MetricReport`].
//! * `traces/`: optional per-battle tick traces.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::agents::make_agent;
use crate::campaign::{generate_battles, serialize_config, to_canonical_json, to_canonical_line, BattlePlan, CampaignConfig};
use crate::error::{Error, Result};
use crate::metrics::{compute_report, BattleResult, MetricReport};
use crate::scenario::run_battle;

/// Environment variable overriding the default worker count.
pub const PARALLEL_ENV: &str = "NOVELTY_HARNESS_PARALLEL";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const RESULTS_FILE: &str = "results.jsonl";
pub const REPORT_FILE: &str = "report.json";
pub const TRACE_DIR: &str = "traces";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub harness_version: String,
    pub config_sha256: String,
    pub master_seed: u64,
    pub agent: String,
    pub trials: u32,
    pub battles: u32,
    pub workers: usize,
    /// Seconds since the Unix epoch.
    pub started_at: u64,
    pub finished_at: Option<u64>,
    pub complete: bool,
    /// Set when a battle failed and the results file is partial.
    pub error: Option<String>,
    pub results: String,
    pub report: String,
    pub traces: Option<String>,
    pub config: CampaignConfig,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the environment override or the CPU count.
    pub parallel: Option<usize>,
    pub trace: bool,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Worker count from an explicit request, then the environment, then the CPU count.
pub fn resolve_workers(requested: Option<usize>) -> usize {
    requested
        .or_else(|| std::env::var(PARALLEL_ENV).ok().and_then(|v| v.parse().ok()))
        .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
        .unwrap_or(1)
        .max(1)
}

pub fn config_hash(config: &CampaignConfig) -> Result<String> {
    let digest = Sha256::digest(serialize_config(config)?.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn write_manifest(dir: &Path, m: &RunManifest) -> Result<()> {
    fs::write(dir.join(MANIFEST_FILE), to_canonical_json(m)?)?;
    Ok(())
}

/// Write results sorted by (trial, battle), one canonical record per line.
pub fn write_results(path: &Path, results: &[BattleResult]) -> Result<()> {
    let mut sorted: Vec<&BattleResult> = results.iter().collect();
    sorted.sort_by_key(|r| (r.trial, r.battle));
    let mut w = BufWriter::new(File::create(path)?);
    for r in sorted {
        writeln!(w, "{}", to_canonical_line(r)?)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<BattleResult>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Metrics(format!("{}:{}: {e}", path.display(), i + 1))))
        .collect()
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    Ok(serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?)
}

fn run_plan(plan: &BattlePlan, agent: &str, trace_dir: Option<&Path>) -> Result<BattleResult> {
    let mut a = make_agent(agent)?;
    let result = match trace_dir {
        Some(dir) => {
            let path = dir.join(format!("trial-{}-battle-{}.jsonl", plan.trial, plan.battle));
            let mut w = BufWriter::new(File::create(path)?);
            let (r, _) = run_battle(plan, a.as_mut(), plan.rng(), Some(&mut w))?;
            w.flush()?;
            r
        }
        None => run_battle(plan, a.as_mut(), plan.rng(), None)?.0,
    };
    Ok(result)
}

/// Run every battle of a campaign in memory, in (trial, battle) order.
pub fn run_plans(plans: &[BattlePlan], agent: &str, workers: usize) -> Result<Vec<BattleResult>> {
    make_agent(agent)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    pool.install(|| plans.par_iter().map(|p| run_plan(p, agent, None)).collect())
}

/// Generate, run and score a campaign, persisting everything under `out`.
pub fn run_experiment(config: &CampaignConfig, agent: &str, out: &Path, opts: &RunOptions) -> Result<MetricReport> {
    config.validate()?;
    make_agent(agent)?;
    let plans = generate_battles(config)?;
    let workers = resolve_workers(opts.parallel);

    fs::create_dir_all(out)?;
    let trace_dir: Option<PathBuf> = opts.trace.then(|| out.join(TRACE_DIR));
    if let Some(d) = &trace_dir {
        fs::create_dir_all(d)?;
    }
    let mut manifest = RunManifest {
        harness_version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: config_hash(config)?,
        master_seed: config.master_seed,
        agent: agent.into(),
        trials: config.trials,
        battles: config.battles,
        workers,
        started_at: now(),
        finished_at: None,
        complete: false,
        error: None,
        results: RESULTS_FILE.into(),
        report: REPORT_FILE.into(),
        traces: opts.trace.then(|| TRACE_DIR.into()),
        config: config.clone(),
    };
    write_manifest(out, &manifest)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let outcomes: Vec<Result<BattleResult>> =
        pool.install(|| plans.par_iter().map(|p| run_plan(p, agent, trace_dir.as_deref())).collect());

    let mut results = Vec::with_capacity(outcomes.len());
    let mut failure = None;
    for o in outcomes {
        match o {
            Ok(r) => results.push(r),
            Err(e) if failure.is_none() => failure = Some(e),
            Err(_) => {}
        }
    }
    write_results(&out.join(RESULTS_FILE), &results)?;
    manifest.finished_at = Some(now());
    if let Some(e) = failure {
        manifest.error = Some(e.to_string());
        write_manifest(out, &manifest)?;
        return Err(e);
    }
    let report = compute_report(&results, None)?;
    fs::write(out.join(REPORT_FILE), to_canonical_json(&report)?)?;
    manifest.complete = true;
    write_manifest(out, &manifest)?;
    Ok(report)
}

/// Recompute the report from a finished run directory.
pub fn recompute_report(dir: &Path, window: Option<usize>) -> Result<MetricReport> {
    let manifest = read_manifest(dir)?;
    let results = read_results(&dir.join(&manifest.results))?;
    compute_report(&results, window)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workers_resolution() {
        assert_eq!(resolve_workers(Some(3)), 3);
        assert_eq!(resolve_workers(Some(0)), 1);
        assert!(resolve_workers(None) >= 1);
    }

    #[test]
    fn small_run_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let config = CampaignConfig::new("t", 11, 2, 2);
        let report = run_experiment(&config, "baseline", dir.path(), &RunOptions { parallel: Some(2), trace: true }).unwrap();
        assert_eq!(report.cdt, 0.0);
        let m = read_manifest(dir.path()).unwrap();
        assert!(m.complete && m.error.is_none());
        assert_eq!(m.config_sha256, config_hash(&config).unwrap());
        assert_eq!(recompute_report(dir.path(), None).unwrap(), report);
        let lines = fs::read_to_string(dir.path().join(RESULTS_FILE)).unwrap();
        assert_eq!(lines.lines().count(), 4);
        assert!(dir.path().join(TRACE_DIR).join("trial-2-battle-1.jsonl").exists());
    }

    #[test]
    fn unknown_agent_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = run_experiment(&CampaignConfig::new("t", 1, 1, 1), "nobody", dir.path(), &RunOptions::default()).unwrap_err();
        assert!(err.is_config_error());
    }
}
