//! Parametric value generators used to model novelty and variation.
//!
//! A [`DistributionSpec`] describes one random quantity (a missile range, a
//! survivability probability, a sensor failure count). A [`TieredSpec`] holds
//! three versions of the same quantity, one per [`DifficultyTier`].
//!
//! In configuration files a spec is a tagged record:
//!
//! ```json
//! {"dist": "normal", "mean": 50.0, "std": 2.0}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngState;

/// Largest Poisson mean sampled by Knuth's multiplication method; above it a
/// rounded normal approximation is used.
const POISSON_KNUTH_MAX: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Constant { value: f64 },
    Normal { mean: f64, std: f64 },
    Uniform { lo: f64, hi: f64 },
    DiscreteUniform { values: Vec<f64> },
    Bernoulli { p: f64 },
    Poisson { lambda: f64 },
}

impl DistributionSpec {
    pub fn constant(value: f64) -> Self {
        DistributionSpec::Constant { value }
    }

    pub fn normal(mean: f64, std: f64) -> Self {
        DistributionSpec::Normal { mean, std }
    }

    pub fn uniform(lo: f64, hi: f64) -> Self {
        DistributionSpec::Uniform { lo, hi }
    }

    pub fn validate(&self) -> Result<()> {
        validate_spec(self)
    }

    /// Mean of the distribution, used for documentation and tier ordering checks.
    pub fn mean(&self) -> f64 {
        match self {
            DistributionSpec::Constant { value } => *value,
            DistributionSpec::Normal { mean, .. } => *mean,
            DistributionSpec::Uniform { lo, hi } => 0.5 * (lo + hi),
            DistributionSpec::DiscreteUniform { values } => {
                values.iter().sum::<f64>() / values.len() as f64
            }
            DistributionSpec::Bernoulli { p } => *p,
            DistributionSpec::Poisson { lambda } => *lambda,
        }
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{name} must be finite")))
    }
}

pub fn validate_spec(spec: &DistributionSpec) -> Result<()> {
    match spec {
        DistributionSpec::Constant { value } => finite("Constant value", *value),
        DistributionSpec::Normal { mean, std } => {
            finite("Normal mean", *mean)?;
            finite("Normal std", *std)?;
            if *std > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidSpec("Normal std must be > 0".into()))
            }
        }
        DistributionSpec::Uniform { lo, hi } => {
            finite("Uniform lo", *lo)?;
            finite("Uniform hi", *hi)?;
            if lo <= hi {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!(
                    "Uniform lo ≤ hi violated ({lo} > {hi})"
                )))
            }
        }
        DistributionSpec::DiscreteUniform { values } => {
            if values.is_empty() {
                return Err(Error::InvalidSpec(
                    "DiscreteUniform values must be non-empty".into(),
                ));
            }
            values
                .iter()
                .try_for_each(|v| finite("DiscreteUniform value", *v))
        }
        DistributionSpec::Bernoulli { p } => {
            if (0.0..=1.0).contains(p) {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!(
                    "Bernoulli p must be in [0,1] (got {p})"
                )))
            }
        }
        DistributionSpec::Poisson { lambda } => {
            finite("Poisson lambda", *lambda)?;
            if *lambda > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidSpec("Poisson lambda must be > 0".into()))
            }
        }
    }
}

/// Draw one value. Fails without touching `rng` if the spec is invalid.
pub fn sample(spec: &DistributionSpec, rng: &mut RngState) -> Result<f64> {
    validate_spec(spec)?;
    Ok(match spec {
        DistributionSpec::Constant { value } => *value,
        DistributionSpec::Normal { mean, std } => mean + std * standard_normal(rng),
        DistributionSpec::Uniform { lo, hi } => uniform(*lo, *hi, rng),
        DistributionSpec::DiscreteUniform { values } => {
            let n = values.len();
            let idx = ((rng.next_f64() * n as f64) as usize).min(n - 1);
            values[idx]
        }
        DistributionSpec::Bernoulli { p } => {
            if rng.chance(*p) {
                1.0
            } else {
                0.0
            }
        }
        DistributionSpec::Poisson { lambda } => poisson(*lambda, rng),
    })
}

/// Half-open uniform on [lo, hi); degenerate intervals return `lo`.
fn uniform(lo: f64, hi: f64, rng: &mut RngState) -> f64 {
    if lo == hi {
        return lo;
    }
    loop {
        let x = lo + (hi - lo) * rng.next_f64();
        // rounding can land exactly on hi for very narrow intervals
        if x < hi {
            return x;
        }
    }
}

/// Marsaglia polar method. The second variate of each accepted pair is
/// discarded so that a stream position maps to exactly one draw.
pub(crate) fn standard_normal(rng: &mut RngState) -> f64 {
    loop {
        let u = 2.0 * rng.next_f64() - 1.0;
        let v = 2.0 * rng.next_f64() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

fn poisson(lambda: f64, rng: &mut RngState) -> f64 {
    if lambda <= POISSON_KNUTH_MAX {
        let limit = (-lambda).exp();
        let mut k = 0u64;
        let mut prod = rng.next_f64_open0();
        while prod > limit {
            k += 1;
            prod *= rng.next_f64_open0();
        }
        k as f64
    } else {
        (lambda + lambda.sqrt() * standard_normal(rng)).round().max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DifficultyTier {
    Easy,
    Medium,
    Hard,
}

impl DifficultyTier {
    pub const ALL: [DifficultyTier; 3] = [
        DifficultyTier::Easy,
        DifficultyTier::Medium,
        DifficultyTier::Hard,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DifficultyTier::Easy => "easy",
            DifficultyTier::Medium => "medium",
            DifficultyTier::Hard => "hard",
        }
    }
}

impl std::fmt::Display for DifficultyTier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DifficultyTier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "easy" => Ok(DifficultyTier::Easy),
            "medium" => Ok(DifficultyTier::Medium),
            "hard" => Ok(DifficultyTier::Hard),
            other => Err(Error::Config(format!("unknown tier `{other}`"))),
        }
    }
}

/// Three versions of the same random quantity, one per difficulty tier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TieredSpec {
    pub easy: DistributionSpec,
    pub medium: DistributionSpec,
    pub hard: DistributionSpec,
}

impl TieredSpec {
    /// The same spec at every tier.
    pub fn uniform_across(spec: DistributionSpec) -> Self {
        TieredSpec {
            easy: spec.clone(),
            medium: spec.clone(),
            hard: spec,
        }
    }

    /// Missile range tiers: N(50, 2), N(55, 2.5) and N(60, 3) km.
    pub fn missile_range() -> Self {
        TieredSpec {
            easy: DistributionSpec::normal(50.0, 2.0),
            medium: DistributionSpec::normal(55.0, 2.5),
            hard: DistributionSpec::normal(60.0, 3.0),
        }
    }

    pub fn get(&self, tier: DifficultyTier) -> &DistributionSpec {
        match tier {
            DifficultyTier::Easy => &self.easy,
            DifficultyTier::Medium => &self.medium,
            DifficultyTier::Hard => &self.hard,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for tier in DifficultyTier::ALL {
            validate_spec(self.get(tier))
                .map_err(|e| Error::InvalidSpec(format!("{tier} tier: {e}")))?;
        }
        Ok(())
    }
}

pub fn sample_tier(tiered: &TieredSpec, tier: DifficultyTier, rng: &mut RngState) -> Result<f64> {
    sample(tiered.get(tier), rng)
}

/// Either a single spec shared by all tiers or a full tiered spec. Configs may
/// write whichever is shorter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueSpec {
    Tiered(TieredSpec),
    Single(DistributionSpec),
}

impl ValueSpec {
    pub fn constant(value: f64) -> Self {
        ValueSpec::Single(DistributionSpec::constant(value))
    }

    pub fn spec_for(&self, tier: DifficultyTier) -> &DistributionSpec {
        match self {
            ValueSpec::Tiered(t) => t.get(tier),
            ValueSpec::Single(s) => s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ValueSpec::Tiered(t) => t.validate(),
            ValueSpec::Single(s) => validate_spec(s),
        }
    }

    pub fn sample(&self, tier: DifficultyTier, rng: &mut RngState) -> Result<f64> {
        sample(self.spec_for(tier), rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng() -> RngState {
        RngState::from_seed(0x5eed)
    }

    #[test]
    fn validation_examples() {
        assert!(validate_spec(&DistributionSpec::normal(50.0, 2.0)).is_ok());
        let err = validate_spec(&DistributionSpec::uniform(5.0, 3.0)).unwrap_err();
        assert!(err.to_string().contains("lo ≤ hi violated"), "{err}");
        let err = validate_spec(&DistributionSpec::Bernoulli { p: 1.3 }).unwrap_err();
        assert!(err.to_string().contains("p must be in [0,1]"), "{err}");
        let err = validate_spec(&DistributionSpec::normal(50.0, 0.0)).unwrap_err();
        assert!(err.to_string().contains("Normal std must be > 0"), "{err}");
        assert!(validate_spec(&DistributionSpec::Poisson { lambda: 0.0 }).is_err());
        assert!(validate_spec(&DistributionSpec::DiscreteUniform { values: vec![] }).is_err());
        assert!(validate_spec(&DistributionSpec::constant(f64::NAN)).is_err());
    }

    #[test]
    fn invalid_spec_is_never_sampled() {
        let mut r = rng();
        let before = r.clone();
        assert!(sample(&DistributionSpec::uniform(5.0, 3.0), &mut r).is_err());
        assert_eq!(r, before);
    }

    #[test]
    fn trivial_samples() {
        let mut r = rng();
        assert_eq!(sample(&DistributionSpec::constant(50.0), &mut r).unwrap(), 50.0);
        assert_eq!(sample(&DistributionSpec::uniform(5.0, 5.0), &mut r).unwrap(), 5.0);
        assert_eq!(sample(&DistributionSpec::Bernoulli { p: 1.0 }, &mut r).unwrap(), 1.0);
        assert_eq!(sample(&DistributionSpec::Bernoulli { p: 0.0 }, &mut r).unwrap(), 0.0);
        let seven = TieredSpec::uniform_across(DistributionSpec::constant(7.0));
        for tier in DifficultyTier::ALL {
            assert_eq!(sample_tier(&seven, tier, &mut r).unwrap(), 7.0);
        }
    }

    #[test]
    fn discrete_uniform_hits_every_value() {
        let spec = DistributionSpec::DiscreteUniform { values: vec![1.0, 2.0, 3.0] };
        let mut r = rng();
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            let v = sample(&spec, &mut r).unwrap();
            counts[v as usize - 1] += 1;
        }
        for c in counts {
            // expected 10,000 each; binomial sd ≈ 82
            assert!((9_500..=10_500).contains(&c), "{counts:?}");
        }
    }

    #[test]
    fn poisson_large_lambda_uses_normal_branch() {
        let spec = DistributionSpec::Poisson { lambda: 100.0 };
        let mut r = rng();
        let n = 20_000;
        let mean = (0..n).map(|_| sample(&spec, &mut r).unwrap()).sum::<f64>() / n as f64;
        assert!((mean - 100.0).abs() < 0.5, "{mean}");
    }

    #[test]
    fn spec_json_encoding() {
        let spec: DistributionSpec =
            serde_json::from_str(r#"{"dist":"normal","mean":50.0,"std":2.0}"#).unwrap();
        assert_eq!(spec, DistributionSpec::normal(50.0, 2.0));
        let dis: DistributionSpec =
            serde_json::from_str(r#"{"dist":"discrete_uniform","values":[1,2]}"#).unwrap();
        assert_eq!(dis, DistributionSpec::DiscreteUniform { values: vec![1.0, 2.0] });
        assert!(serde_json::from_str::<DistributionSpec>(r#"{"dist":"normal","mean":1,"std":1,"x":1}"#).is_err());
        let v: ValueSpec = serde_json::from_str(r#"{"dist":"constant","value":3}"#).unwrap();
        assert_eq!(v, ValueSpec::constant(3.0));
        let t: ValueSpec = serde_json::from_str(
            r#"{"easy":{"dist":"constant","value":1},"medium":{"dist":"constant","value":2},"hard":{"dist":"constant","value":3}}"#,
        )
        .unwrap();
        assert!(matches!(t, ValueSpec::Tiered(_)));
    }
}
