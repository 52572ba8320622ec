//! Campaign configuration and battle generation.
//!
//! A campaign is a sequence of battles on one environment, replicated over
//! several trials. Every battle gets its own placement variations; the
//! configured novelties only switch on from their onset battle. Each plan is
//! a pure function of the config and its (trial, battle) position.

use serde::{Deserialize, Serialize};

use crate::agents::KnownWorld;
use crate::distributions::{sample, DifficultyTier, DistributionSpec};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::metrics::ScoringMode;
use crate::novelty::{apply_novelty, lookup, AppliedNovelty, NoveltySpec};
use crate::rng::RngState;
use crate::scenario::{EntityId, ScenarioConfig};

/// Rejection-sampling attempts for [`Variation::MoveNormalBox`] before clamping.
pub const NORMAL_BOX_TRIES: usize = 64;

/// Per-battle placement of one platform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Variation {
    MoveExact {
        platform: EntityId,
        pos: Vec2,
    },
    MoveUniformBox {
        platform: EntityId,
        min: Vec2,
        max: Vec2,
    },
    MoveNormalBox {
        platform: EntityId,
        mean: Vec2,
        std: Vec2,
        min: Vec2,
        max: Vec2,
    },
}

impl Variation {
    pub fn platform(&self) -> EntityId {
        match self {
            Variation::MoveExact { platform, .. }
            | Variation::MoveUniformBox { platform, .. }
            | Variation::MoveNormalBox { platform, .. } => *platform,
        }
    }

    fn check(&self, scenario: &ScenarioConfig) -> Result<()> {
        let platform = self.platform();
        let resolves = match platform {
            EntityId::Jet | EntityId::Storage => true,
            EntityId::Sam(i) => i < scenario.sams.len(),
            EntityId::RedFighter(_) => false,
        };
        if !resolves {
            return Err(Error::Config(format!("variation platform `{platform}` does not exist")));
        }
        let boxed = match self {
            Variation::MoveExact { pos, .. } => {
                if !pos.is_finite() {
                    return Err(Error::Config(format!("move_exact {platform}: position must be finite")));
                }
                None
            }
            Variation::MoveUniformBox { min, max, .. } => Some((*min, *max)),
            Variation::MoveNormalBox { std, min, max, .. } => {
                if !(std.x >= 0.0 && std.y >= 0.0) {
                    return Err(Error::Config(format!("move_normal_box {platform}: std must be ≥ 0")));
                }
                Some((*min, *max))
            }
        };
        if let Some((min, max)) = boxed {
            if !(min.is_finite() && max.is_finite() && min.x <= max.x && min.y <= max.y) {
                return Err(Error::Config(format!(
                    "variation {platform}: box min must be ≤ max componentwise"
                )));
            }
        }
        Ok(())
    }

    /// Draw this variation's position for one battle.
    pub fn sample_pos(&self, rng: &mut RngState) -> Result<Vec2> {
        match self {
            Variation::MoveExact { pos, .. } => Ok(*pos),
            Variation::MoveUniformBox { min, max, .. } => Ok(Vec2::new(
                sample(&DistributionSpec::uniform(min.x, max.x), rng)?,
                sample(&DistributionSpec::uniform(min.y, max.y), rng)?,
            )),
            Variation::MoveNormalBox { mean, std, min, max, .. } => {
                let axis = |m: f64, s: f64, rng: &mut RngState| {
                    if s == 0.0 {
                        Ok(m)
                    } else {
                        sample(&DistributionSpec::normal(m, s), rng)
                    }
                };
                let inside = |p: Vec2| p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
                let mut p = *mean;
                for _ in 0..NORMAL_BOX_TRIES {
                    p = Vec2::new(axis(mean.x, std.x, rng)?, axis(mean.y, std.y, rng)?);
                    if inside(p) {
                        return Ok(p);
                    }
                }
                Ok(Vec2::new(p.x.clamp(min.x, max.x), p.y.clamp(min.y, max.y)))
            }
        }
    }

    /// Move the platform in `scenario`. Moving the jet moves its base with it.
    pub fn apply(&self, scenario: &mut ScenarioConfig, rng: &mut RngState) -> Result<()> {
        let pos = self.sample_pos(rng)?;
        match self.platform() {
            EntityId::Jet => {
                scenario.jet.pos = pos;
                scenario.jet.base_pos = pos;
            }
            EntityId::Storage => scenario.storage.pos = pos,
            EntityId::Sam(i) => {
                let sam = scenario
                    .sams
                    .get_mut(i)
                    .ok_or_else(|| Error::Config(format!("variation platform `sam[{i}]` does not exist")))?;
                sam.pos = pos;
            }
            other => return Err(Error::Config(format!("variation platform `{other}` cannot be moved"))),
        }
        Ok(())
    }
}

/// A novelty named from the catalog or written out in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoveltyRef {
    Catalog(String),
    Custom(Box<NoveltySpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoveltyEntry {
    pub novelty: NoveltyRef,
    pub tier: DifficultyTier,
    /// Overrides the spec's own onset battle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub onset_battle: Option<u32>,
}

impl NoveltyEntry {
    /// The spec with this entry's onset applied.
    pub fn resolve(&self) -> Result<NoveltySpec> {
        let mut spec = match &self.novelty {
            NoveltyRef::Catalog(id) => {
                lookup(id).ok_or_else(|| Error::Config(format!("unknown novelty `{id}` (see the catalog)")))?
            }
            NoveltyRef::Custom(spec) => (**spec).clone(),
        };
        if let Some(onset) = self.onset_battle {
            spec.onset_battle = onset;
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub name: String,
    pub master_seed: u64,
    pub battles: u32,
    pub trials: u32,
    #[serde(default)]
    pub base_scenario: ScenarioConfig,
    #[serde(default)]
    pub variations: Vec<Variation>,
    #[serde(default)]
    pub novelties: Vec<NoveltyEntry>,
    #[serde(default)]
    pub scoring: ScoringMode,
}

impl CampaignConfig {
    pub fn new(name: impl Into<String>, master_seed: u64, battles: u32, trials: u32) -> Self {
        CampaignConfig {
            name: name.into(),
            master_seed,
            battles,
            trials,
            base_scenario: ScenarioConfig::default(),
            variations: Vec::new(),
            novelties: Vec::new(),
            scoring: ScoringMode::default(),
        }
    }

    /// Static checks: counts, scenario, platform references and novelties.
    pub fn validate(&self) -> Result<()> {
        if self.battles == 0 {
            return Err(Error::Config("battles must be ≥ 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be ≥ 1".into()));
        }
        let errs = self.base_scenario.validation_errors();
        if !errs.is_empty() {
            return Err(Error::Config(format!("base_scenario: {}", errs.join("; "))));
        }
        for v in &self.variations {
            v.check(&self.base_scenario)?;
        }
        for entry in &self.novelties {
            let spec = entry.resolve()?;
            spec.validate()?;
            if spec.onset_battle < 1 || spec.onset_battle > self.battles {
                return Err(Error::Config(format!(
                    "novelty `{}`: onset_battle {} outside [1, {}]",
                    spec.id, spec.onset_battle, self.battles
                )));
            }
            // dry run against the base scenario catches unresolvable targets
            let mut rng = RngState::from_seed(self.master_seed).derive("validate");
            apply_novelty(&self.base_scenario, &spec, entry.tier, spec.onset_battle, &mut rng)?;
        }
        Ok(())
    }

    /// First battle carrying any novelty.
    pub fn onset(&self) -> Option<u32> {
        self.novelties
            .iter()
            .filter_map(|e| e.resolve().ok())
            .map(|s| s.onset_battle)
            .min()
    }
}

/// Parse and validate a campaign document. Unknown fields are errors.
pub fn parse_campaign(text: &str) -> Result<CampaignConfig> {
    let config: CampaignConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

/// Everything needed to run one battle, with every random value resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BattlePlan {
    pub trial: u32,
    pub battle: u32,
    /// Seed of the battle's world stream.
    pub seed: u64,
    pub scenario: ScenarioConfig,
    /// The agent's book: the battle's configuration before novelties.
    pub known_world: KnownWorld,
    pub applied: Vec<AppliedNovelty>,
    pub scoring: ScoringMode,
}

impl BattlePlan {
    /// A single trial-1, battle-1 plan around a fixed scenario.
    pub fn standalone(scenario: ScenarioConfig, seed: u64) -> Self {
        BattlePlan {
            trial: 1,
            battle: 1,
            seed,
            known_world: KnownWorld::from_config(&scenario),
            scenario,
            applied: Vec::new(),
            scoring: ScoringMode::default(),
        }
    }

    pub fn rng(&self) -> RngState {
        RngState::from_seed(self.seed)
    }
}

/// Plan for one (trial, battle) position, both 1-based.
pub fn generate_battle(config: &CampaignConfig, trial: u32, battle: u32) -> Result<BattlePlan> {
    let stream = RngState::from_seed(config.master_seed).derive(&format!("trial-{trial}/battle-{battle}"));
    let mut scenario = config.base_scenario.clone();
    let mut vrng = stream.derive("variations");
    for v in &config.variations {
        v.apply(&mut scenario, &mut vrng)?;
    }
    let known_world = KnownWorld::from_config(&scenario);
    let mut applied = Vec::new();
    for (k, entry) in config.novelties.iter().enumerate() {
        let spec = entry.resolve()?;
        if battle < spec.onset_battle {
            continue;
        }
        let mut nrng = stream.derive(&format!("novelty-{k}"));
        let (next, record) = apply_novelty(&scenario, &spec, entry.tier, battle, &mut nrng)?;
        scenario = next;
        applied.push(record);
    }
    Ok(BattlePlan {
        trial,
        battle,
        seed: stream.derive("world").seed(),
        scenario,
        known_world,
        applied,
        scoring: config.scoring,
    })
}

/// All plans in (trial, battle) order.
pub fn generate_battles(config: &CampaignConfig) -> Result<Vec<BattlePlan>> {
    let mut plans = Vec::with_capacity(config.trials as usize * config.battles as usize);
    for trial in 1..=config.trials {
        for battle in 1..=config.battles {
            plans.push(generate_battle(config, trial, battle)?);
        }
    }
    Ok(plans)
}

/// Canonical text: keys sorted, two-space indent, trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

/// Canonical single-line form, used for results records.
pub fn to_canonical_line<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string(&serde_json::to_value(value)?)?)
}

pub fn serialize_config(config: &CampaignConfig) -> Result<String> {
    to_canonical_json(config)
}

pub fn serialize_plan(plan: &BattlePlan) -> Result<String> {
    to_canonical_json(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DifficultyTier;

    fn minimal() -> &'static str {
        r#"{"name":"m","master_seed":7,"battles":10,"trials":1}"#
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = parse_campaign(minimal()).unwrap();
        assert_eq!(c.base_scenario, ScenarioConfig::default());
        assert!(c.variations.is_empty() && c.novelties.is_empty());
        assert_eq!(c.scoring, ScoringMode::DetectionOnly);
    }

    #[test]
    fn unknown_fields_rejected_with_position() {
        let err = parse_campaign(r#"{"name":"m","master_seed":7,"battles":10,"trials":1,"trails":3}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("trails") && msg.contains("line 1"), "{msg}");
        assert!(err.is_config_error());
    }

    #[test]
    fn onset_out_of_range() {
        let text = r#"{"name":"m","master_seed":7,"battles":10,"trials":1,
            "novelties":[{"novelty":"sam_range_up","tier":"hard","onset_battle":11}]}"#;
        let msg = parse_campaign(text).unwrap_err().to_string();
        assert!(msg.contains("onset_battle 11"), "{msg}");
    }

    #[test]
    fn unknown_novelty_and_platform() {
        let text = r#"{"name":"m","master_seed":7,"battles":2,"trials":1,
            "novelties":[{"novelty":"sam_range_upp","tier":"hard"}]}"#;
        assert!(parse_campaign(text).unwrap_err().to_string().contains("sam_range_upp"));
        let text = r#"{"name":"m","master_seed":7,"battles":2,"trials":1,
            "variations":[{"op":"move_exact","platform":"sam[5]","pos":[0,0]}]}"#;
        assert!(parse_campaign(text).unwrap_err().to_string().contains("sam[5]"));
    }

    #[test]
    fn onset_six_of_ten() {
        let text = r#"{"name":"m","master_seed":7,"battles":10,"trials":1,
            "novelties":[{"novelty":"sam_range_up","tier":"hard","onset_battle":6}]}"#;
        let plans = generate_battles(&parse_campaign(text).unwrap()).unwrap();
        for p in &plans {
            assert_eq!(p.applied.is_empty(), p.battle < 6, "battle {}", p.battle);
            if p.battle >= 6 {
                assert_eq!(p.applied[0].tier, DifficultyTier::Hard);
                assert_eq!(p.known_world.sam_ranges, vec![50.0, 50.0]);
                assert!(p.scenario.sams.iter().all(|s| s.missile_range != 50.0));
            }
        }
    }

    #[test]
    fn nothing_varies_but_the_seed() {
        let mut c = CampaignConfig::new("x", 1, 3, 1);
        c.validate().unwrap();
        let plans = generate_battles(&c).unwrap();
        assert_eq!(plans.len(), 3);
        assert!(plans.iter().all(|p| p.scenario == plans[0].scenario));
        assert_ne!(plans[0].seed, plans[1].seed);
        assert_ne!(plans[1].seed, plans[2].seed);
        c.trials = 2;
        assert_eq!(generate_battles(&c).unwrap().len(), 6);
    }

    #[test]
    fn subset_determinism() {
        let mut c = parse_campaign(minimal()).unwrap();
        c.trials = 3;
        c.variations.push(Variation::MoveUniformBox {
            platform: EntityId::Jet,
            min: Vec2::new(-5.0, -5.0),
            max: Vec2::new(5.0, 5.0),
        });
        let all = generate_battles(&c).unwrap();
        let one = generate_battle(&c, 2, 7).unwrap();
        assert_eq!(all[10 + 6], one);
    }

    #[test]
    fn jet_move_carries_base() {
        let mut s = ScenarioConfig::default();
        let v = Variation::MoveExact {
            platform: EntityId::Jet,
            pos: Vec2::new(3.0, 4.0),
        };
        v.apply(&mut s, &mut RngState::from_seed(0)).unwrap();
        assert_eq!(s.jet.pos, Vec2::new(3.0, 4.0));
        assert_eq!(s.jet.base_pos, Vec2::new(3.0, 4.0));
    }

    #[test]
    fn normal_box_stays_inside() {
        let v = Variation::MoveNormalBox {
            platform: EntityId::Sam(0),
            mean: Vec2::new(100.0, 30.0),
            std: Vec2::new(50.0, 50.0),
            min: Vec2::new(99.0, 29.0),
            max: Vec2::new(101.0, 31.0),
        };
        let mut rng = RngState::from_seed(3);
        for _ in 0..500 {
            let p = v.sample_pos(&mut rng).unwrap();
            assert!((99.0..=101.0).contains(&p.x) && (29.0..=31.0).contains(&p.y));
        }
    }

    #[test]
    fn canonical_form_is_stable_and_round_trips() {
        let c = parse_campaign(minimal()).unwrap();
        let a = serialize_config(&c).unwrap();
        assert_eq!(a, serialize_config(&c).unwrap());
        assert_eq!(parse_campaign(&a).unwrap(), c);
        let keys: Vec<&str> = a.lines().filter(|l| l.starts_with("  \"")).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn plans_serialize_resolved_values() {
        let text = r#"{"name":"m","master_seed":7,"battles":1,"trials":1,
            "novelties":[{"novelty":"sam_range_up","tier":"hard"}]}"#;
        let plan = generate_battle(&parse_campaign(text).unwrap(), 1, 1).unwrap();
        let s = serialize_plan(&plan).unwrap();
        assert!(!s.contains("\"dist\""));
        let back: BattlePlan = serde_json::from_str(&s).unwrap();
        assert_eq!(back, plan);
    }
}
