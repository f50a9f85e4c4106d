use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::StatsError;

/// Shot counts keyed by classical bitstring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawEmpirical")]
pub struct EmpiricalDistribution {
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Deserialize)]
struct RawEmpirical {
    shots: u64,
    counts: BTreeMap<String, u64>,
    #[serde(default)]
    seed: Option<u64>,
}

impl TryFrom<RawEmpirical> for EmpiricalDistribution {
    type Error = StatsError;

    fn try_from(r: RawEmpirical) -> Result<Self, StatsError> {
        let e = EmpiricalDistribution::new(r.counts, r.seed)?;
        if e.shots != r.shots {
            return Err(StatsError::InvalidDistribution(format!(
                "counts sum to {}, not {}",
                e.shots, r.shots
            )));
        }
        Ok(e)
    }
}

impl EmpiricalDistribution {
    /// `shots` is the sum of the counts and must be positive.
    pub fn new(counts: BTreeMap<String, u64>, seed: Option<u64>) -> Result<Self, StatsError> {
        let shots: u64 = counts.values().sum();
        if shots == 0 {
            return Err(StatsError::InvalidDistribution("no shots".into()));
        }
        Ok(EmpiricalDistribution { shots, counts, seed })
    }

    pub fn from_outcomes<I: IntoIterator<Item = String>>(outcomes: I, seed: Option<u64>) -> Result<Self, StatsError> {
        let mut counts = BTreeMap::new();
        for o in outcomes {
            *counts.entry(o).or_insert(0) += 1;
        }
        Self::new(counts, seed)
    }

    pub fn count(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn frequency(&self, key: &str) -> f64 {
        self.count(key) as f64 / self.shots as f64
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serialisable")
    }

    pub fn from_json(text: &str) -> Result<Self, StatsError> {
        serde_json::from_str(text).map_err(|e| StatsError::InvalidDistribution(e.to_string()))
    }
}

/// Reference probabilities keyed by classical bitstring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawExpected")]
pub struct ExpectedDistribution {
    pub probs: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
struct RawExpected {
    probs: BTreeMap<String, f64>,
}

impl TryFrom<RawExpected> for ExpectedDistribution {
    type Error = StatsError;

    fn try_from(r: RawExpected) -> Result<Self, StatsError> {
        ExpectedDistribution::new(r.probs)
    }
}

impl ExpectedDistribution {
    /// Probabilities must be finite, non-negative and sum to 1 within 1e-9.
    pub fn new(probs: BTreeMap<String, f64>) -> Result<Self, StatsError> {
        if let Some((k, p)) = probs.iter().find(|(_, p)| !p.is_finite() || **p < 0.0) {
            return Err(StatsError::InvalidDistribution(format!("probability {p} for `{k}`")));
        }
        let total: f64 = probs.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(StatsError::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(ExpectedDistribution { probs })
    }

    pub fn uniform<S: Into<String>>(keys: impl IntoIterator<Item = S>) -> Result<Self, StatsError> {
        let keys: Vec<String> = keys.into_iter().map(Into::into).collect();
        let p = 1.0 / keys.len() as f64;
        Self::new(keys.into_iter().map(|k| (k, p)).collect())
    }

    pub fn prob(&self, key: &str) -> f64 {
        self.probs.get(key).copied().unwrap_or(0.0)
    }

    pub fn from_json(text: &str) -> Result<Self, StatsError> {
        serde_json::from_str(text).map_err(|e| StatsError::InvalidDistribution(e.to_string()))
    }
}
