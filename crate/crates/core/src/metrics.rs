//! Battle scoring and campaign-level novelty metrics.
//!
//! Scores: a win is worth 1, an abort home with no casualties is worth 0.5
//! when novelty was active and the agent detected it, anything else is 0.
//!
//! Campaign metrics, computed per trial and then aggregated:
//!
//! * CDT: fraction of trials with no detection before the onset battle and
//!   at least one detection from the onset battle on.
//! * IDN: over correctly detected trials, mean of
//!   (first detecting battle − onset battle + 1).
//! * NRP: mean post-onset score over mean pre-onset score.
//! * ANRP: the same ratio using only the last `window` post-onset battles.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::agents::NoveltyReport;
use crate::campaign::BattlePlan;
use crate::error::{Error, Result};
use crate::novelty::NoveltyLevel;
use crate::scenario::{MissionStatus, WorldState};

/// Version of the metric formulas written into every report.
pub const METRICS_VERSION: &str = "1";
/// Default (and maximum default) ANRP window, in battles.
pub const DEFAULT_ANRP_WINDOW: usize = 10;

/// What an abort must show to earn half credit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoringMode {
    /// Any detection of active novelty.
    #[default]
    DetectionOnly,
    /// A detection whose level guess matches the active novelty.
    RequireCorrectLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BattleResult {
    pub trial: u32,
    pub battle: u32,
    pub mission_status: MissionStatus,
    pub targets_prosecuted: u32,
    pub friendly_casualties: u32,
    pub time_exceeded: bool,
    pub detected: bool,
    pub first_detection_tick: Option<u64>,
    pub level_guess: Option<NoveltyLevel>,
    pub novelty_active: bool,
    pub true_level: Option<NoveltyLevel>,
    pub novelties: Vec<String>,
    pub clamped_novelty: bool,
    pub ticks: u64,
    pub score: f64,
}

impl BattleResult {
    /// Assemble the record for a finished battle.
    pub fn from_battle(plan: &BattlePlan, world: &WorldState, reports: &[NoveltyReport]) -> Self {
        let first = reports.iter().find(|r| r.detected);
        let mut r = BattleResult {
            trial: plan.trial,
            battle: plan.battle,
            mission_status: world.status,
            targets_prosecuted: world.storage.destroyed as u32,
            friendly_casualties: (!world.jet.alive) as u32,
            time_exceeded: world.time_exceeded(),
            detected: first.is_some(),
            first_detection_tick: first.map(|r| r.tick),
            level_guess: first.and_then(|r| r.level_guess),
            novelty_active: !plan.applied.is_empty(),
            true_level: plan.applied.first().map(|a| a.level),
            novelties: plan.applied.iter().map(|a| a.id.clone()).collect(),
            clamped_novelty: plan.applied.iter().any(|a| a.clamped),
            ticks: world.tick,
            score: 0.0,
        };
        r.score = score_battle(&r, plan.scoring).unwrap_or(0.0);
        r
    }

    pub fn level_correct(&self) -> bool {
        self.level_guess.is_some() && self.level_guess == self.true_level
    }
}

/// Score one finished battle.
pub fn score_battle(r: &BattleResult, mode: ScoringMode) -> Result<f64> {
    Ok(match r.mission_status {
        MissionStatus::Ongoing => return Err(Error::Metrics("cannot score a battle that is still ongoing".into())),
        MissionStatus::Win => 1.0,
        MissionStatus::Abort => {
            let clean = r.targets_prosecuted == 0 && r.friendly_casualties == 0 && !r.time_exceeded;
            let justified = r.novelty_active
                && r.detected
                && (mode == ScoringMode::DetectionOnly || r.level_correct());
            if clean && justified {
                0.5
            } else {
                0.0
            }
        }
        MissionStatus::Fail => 0.0,
    })
}

fn onset_of(trial: &[BattleResult]) -> Option<u32> {
    trial.iter().filter(|r| r.novelty_active).map(|r| r.battle).min()
}

fn check_trials(trials: &[Vec<BattleResult>]) -> Result<Option<u32>> {
    let first = trials.first().ok_or_else(|| Error::Metrics("no trials".into()))?;
    let onset = onset_of(first);
    for t in trials {
        if t.len() != first.len() || onset_of(t) != onset {
            return Err(Error::Metrics("trials differ in battle count or onset".into()));
        }
    }
    Ok(onset)
}

fn correct_detection(trial: &[BattleResult], onset: Option<u32>) -> Option<u32> {
    let onset = onset?;
    if trial.iter().any(|r| r.battle < onset && r.detected) {
        return None;
    }
    trial.iter().filter(|r| r.battle >= onset && r.detected).map(|r| r.battle).min()
}

/// Correctly detected trials over all trials.
pub fn compute_cdt(trials: &[Vec<BattleResult>]) -> Result<f64> {
    let onset = check_trials(trials)?;
    let correct = trials.iter().filter(|t| correct_detection(t, onset).is_some()).count();
    Ok(correct as f64 / trials.len() as f64)
}

/// Mean battles to first detection over correctly detected trials.
pub fn compute_idn(trials: &[Vec<BattleResult>]) -> Result<Option<f64>> {
    let onset = check_trials(trials)?;
    let delays: Vec<f64> = trials
        .iter()
        .filter_map(|t| correct_detection(t, onset))
        .map(|b| (b - onset.expect("correct trials have an onset") + 1) as f64)
        .collect();
    Ok(mean(&delays))
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn split_scores(trial: &[BattleResult]) -> Result<(Vec<f64>, Vec<f64>)> {
    let onset = onset_of(trial).ok_or_else(|| Error::Metrics("trial has no post-onset battle".into()))?;
    let mut sorted: Vec<&BattleResult> = trial.iter().collect();
    sorted.sort_by_key(|r| r.battle);
    let pre: Vec<f64> = sorted.iter().filter(|r| r.battle < onset).map(|r| r.score).collect();
    let post: Vec<f64> = sorted.iter().filter(|r| r.battle >= onset).map(|r| r.score).collect();
    if pre.is_empty() {
        return Err(Error::Metrics("trial has no pre-onset battle".into()));
    }
    Ok((pre, post))
}

fn ratio(num: &[f64], den: &[f64]) -> Option<f64> {
    let d = mean(den)?;
    (d > 0.0).then(|| mean(num).unwrap_or(0.0) / d)
}

/// Post-onset mean score relative to pre-onset mean score.
pub fn compute_nrp(trial: &[BattleResult]) -> Result<Option<f64>> {
    let (pre, post) = split_scores(trial)?;
    Ok(ratio(&post, &pre))
}

/// Like NRP over the last `window` post-onset battles
/// (default: min(10, post-onset count)).
pub fn compute_anrp(trial: &[BattleResult], window: Option<usize>) -> Result<Option<f64>> {
    let (pre, post) = split_scores(trial)?;
    let w = window.unwrap_or(DEFAULT_ANRP_WINDOW).min(post.len());
    if w == 0 {
        return Err(Error::Metrics("ANRP window must be ≥ 1".into()));
    }
    Ok(ratio(&post[post.len() - w..], &pre))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub win: usize,
    pub abort: usize,
    pub fail: usize,
}

impl OutcomeCounts {
    fn add(&mut self, s: MissionStatus) {
        match s {
            MissionStatus::Win => self.win += 1,
            MissionStatus::Abort => self.abort += 1,
            MissionStatus::Fail | MissionStatus::Ongoing => self.fail += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.win + self.abort + self.fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricReport {
    pub metrics_version: String,
    pub trials: usize,
    pub battles: usize,
    pub onset_battle: Option<u32>,
    /// Scores of each trial's battles in battle order.
    pub trial_scores: Vec<Vec<f64>>,
    pub cdt: f64,
    pub idn: Option<f64>,
    /// Mean of the per-trial NRP values that are defined.
    pub nrp: Option<f64>,
    pub anrp: Option<f64>,
    pub anrp_window: usize,
    pub false_alarm_trials: usize,
    pub mean_pre_score: Option<f64>,
    pub mean_post_score: Option<f64>,
    pub pre: OutcomeCounts,
    pub post: OutcomeCounts,
}

/// Group results by trial, each sorted by battle.
pub fn group_trials(results: &[BattleResult]) -> Vec<Vec<BattleResult>> {
    let mut by: BTreeMap<u32, Vec<BattleResult>> = BTreeMap::new();
    for r in results {
        by.entry(r.trial).or_default().push(r.clone());
    }
    by.into_values()
        .map(|mut t| {
            t.sort_by_key(|r| r.battle);
            t
        })
        .collect()
}

/// All campaign metrics from persisted results.
pub fn compute_report(results: &[BattleResult], window: Option<usize>) -> Result<MetricReport> {
    let trials = group_trials(results);
    let onset = check_trials(&trials)?;
    let battles = trials[0].len();
    let post_count = onset.map_or(0, |o| trials[0].iter().filter(|r| r.battle >= o).count());
    let anrp_window = window.unwrap_or(DEFAULT_ANRP_WINDOW).min(post_count);

    let mut nrps = Vec::new();
    let mut anrps = Vec::new();
    let mut pre_scores = Vec::new();
    let mut post_scores = Vec::new();
    let mut pre = OutcomeCounts::default();
    let mut post = OutcomeCounts::default();
    let mut false_alarm_trials = 0;
    for t in &trials {
        let mut alarm = false;
        for r in t {
            if onset.is_some_and(|o| r.battle >= o) {
                post.add(r.mission_status);
                post_scores.push(r.score);
            } else {
                pre.add(r.mission_status);
                pre_scores.push(r.score);
                alarm |= r.detected;
            }
        }
        false_alarm_trials += alarm as usize;
        if onset.is_some_and(|o| o > 1) {
            nrps.extend(compute_nrp(t)?);
            if anrp_window > 0 {
                anrps.extend(compute_anrp(t, Some(anrp_window))?);
            }
        }
    }
    Ok(MetricReport {
        metrics_version: METRICS_VERSION.into(),
        trials: trials.len(),
        battles,
        onset_battle: onset,
        trial_scores: trials.iter().map(|t| t.iter().map(|r| r.score).collect()).collect(),
        cdt: compute_cdt(&trials)?,
        idn: compute_idn(&trials)?,
        nrp: mean(&nrps),
        anrp: mean(&anrps),
        anrp_window,
        false_alarm_trials,
        mean_pre_score: mean(&pre_scores),
        mean_post_score: mean(&post_scores),
        pre,
        post,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.3}"))
}

/// Human-readable summary table.
pub fn render_table(report: &MetricReport) -> String {
    let mut s = String::new();
    let onset = report.onset_battle.map_or_else(|| "none".into(), |o| o.to_string());
    let _ = writeln!(s, "trials {}  battles {}  onset {}", report.trials, report.battles, onset);
    let _ = writeln!(s, "{:<8}{:>6}{:>7}{:>6}{:>12}", "phase", "win", "abort", "fail", "mean score");
    let _ = writeln!(
        s,
        "{:<8}{:>6}{:>7}{:>6}{:>12}",
        "pre", report.pre.win, report.pre.abort, report.pre.fail, opt(report.mean_pre_score)
    );
    let _ = writeln!(
        s,
        "{:<8}{:>6}{:>7}{:>6}{:>12}",
        "post", report.post.win, report.post.abort, report.post.fail, opt(report.mean_post_score)
    );
    let _ = writeln!(
        s,
        "CDT {:.3}  IDN {}  NRP {}  ANRP({}) {}  false-alarm trials {}",
        report.cdt,
        opt(report.idn),
        opt(report.nrp),
        report.anrp_window,
        opt(report.anrp),
        report.false_alarm_trials
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn result(trial: u32, battle: u32, onset: u32, detected: bool, score: f64) -> BattleResult {
        BattleResult {
            trial,
            battle,
            mission_status: if score == 1.0 {
                MissionStatus::Win
            } else if score == 0.5 {
                MissionStatus::Abort
            } else {
                MissionStatus::Fail
            },
            targets_prosecuted: (score == 1.0) as u32,
            friendly_casualties: (score == 0.0) as u32,
            time_exceeded: false,
            detected,
            first_detection_tick: detected.then_some(10),
            level_guess: detected.then_some(NoveltyLevel::Agents),
            novelty_active: battle >= onset,
            true_level: (battle >= onset).then_some(NoveltyLevel::Agents),
            novelties: Vec::new(),
            clamped_novelty: false,
            ticks: 100,
            score,
        }
    }

    fn trial(t: u32, detect_at: Option<u32>, pre_alarm: bool) -> Vec<BattleResult> {
        (1..=10)
            .map(|b| {
                let det = detect_at.is_some_and(|d| b >= d) || (pre_alarm && b == 2);
                result(t, b, 6, det, 1.0)
            })
            .collect()
    }

    #[test]
    fn table_two_columns() {
        let mut r = result(1, 6, 6, true, 1.0);
        assert_eq!(score_battle(&r, ScoringMode::DetectionOnly).unwrap(), 1.0);
        r.mission_status = MissionStatus::Abort;
        r.targets_prosecuted = 0;
        assert_eq!(score_battle(&r, ScoringMode::DetectionOnly).unwrap(), 0.5);
        r.mission_status = MissionStatus::Fail;
        r.friendly_casualties = 1;
        assert_eq!(score_battle(&r, ScoringMode::DetectionOnly).unwrap(), 0.0);
        r.mission_status = MissionStatus::Ongoing;
        assert!(score_battle(&r, ScoringMode::DetectionOnly).is_err());
    }

    #[test]
    fn false_alarm_abort_scores_zero() {
        let mut r = result(1, 2, 6, true, 0.5);
        assert!(!r.novelty_active);
        assert_eq!(score_battle(&r, ScoringMode::DetectionOnly).unwrap(), 0.0);
        r.novelty_active = true;
        r.true_level = Some(NoveltyLevel::Rules);
        assert_eq!(score_battle(&r, ScoringMode::DetectionOnly).unwrap(), 0.5);
        assert_eq!(score_battle(&r, ScoringMode::RequireCorrectLevel).unwrap(), 0.0);
    }

    #[test]
    fn cdt_examples() {
        let trials = [trial(1, Some(6), false), trial(2, Some(7), false), trial(3, Some(6), true)];
        assert!((compute_cdt(&trials).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let all = vec![trial(1, Some(6), false), trial(2, Some(6), false)];
        assert_eq!(compute_cdt(&all).unwrap(), 1.0);
        let never = vec![trial(1, None, false)];
        assert_eq!(compute_cdt(&never).unwrap(), 0.0);
        assert!(compute_cdt(&[]).is_err());
    }

    #[test]
    fn idn_examples() {
        let at_onset = vec![trial(1, Some(6), false), trial(2, Some(6), false)];
        assert_eq!(compute_idn(&at_onset).unwrap(), Some(1.0));
        let spread = vec![trial(1, Some(6), false), trial(2, Some(8), false)];
        assert_eq!(compute_idn(&spread).unwrap(), Some(2.0));
        assert_eq!(compute_idn(&[trial(1, None, false)]).unwrap(), None);
    }

    #[test]
    fn nrp_examples() {
        let same: Vec<_> = (1..=10).map(|b| result(1, b, 6, false, 1.0)).collect();
        assert_eq!(compute_nrp(&same).unwrap(), Some(1.0));
        let half: Vec<_> = (1..=10)
            .map(|b| result(1, b, 6, true, if b < 6 { 1.0 } else { 0.5 }))
            .collect();
        assert_eq!(compute_nrp(&half).unwrap(), Some(0.5));
        let zero: Vec<_> = (1..=10).map(|b| result(1, b, 6, false, 0.0)).collect();
        assert_eq!(compute_nrp(&zero).unwrap(), None);
        let no_pre: Vec<_> = (1..=3).map(|b| result(1, b, 1, false, 1.0)).collect();
        assert!(compute_nrp(&no_pre).is_err());
    }

    #[test]
    fn anrp_uses_trailing_window() {
        let scores = [1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0];
        let t: Vec<_> = scores.iter().enumerate().map(|(i, &s)| result(1, i as u32 + 1, 3, false, s)).collect();
        assert_eq!(compute_anrp(&t, Some(2)).unwrap(), Some(1.0));
        assert_eq!(compute_anrp(&t, None).unwrap(), Some(0.4));
        assert!(compute_anrp(&t, Some(0)).is_err());
    }

    #[test]
    fn report_is_order_invariant() {
        let trials = [trial(1, Some(6), false), trial(2, Some(8), false), trial(3, None, true)];
        let flat: Vec<BattleResult> = trials.concat();
        let mut rev = flat.clone();
        rev.reverse();
        let a = compute_report(&flat, None).unwrap();
        assert_eq!(a, compute_report(&rev, None).unwrap());
        assert_eq!(a.false_alarm_trials, 1);
        assert_eq!(a.anrp_window, 5);
        assert!(render_table(&a).contains("CDT 0.667"));
    }

    #[test]
    fn scoring_mode_names() {
        assert_eq!(serde_json::to_string(&ScoringMode::RequireCorrectLevel).unwrap(), "\"require-correct-level\"");
    }
}
