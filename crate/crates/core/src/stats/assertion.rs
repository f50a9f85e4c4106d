use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{EmpiricalDistribution, ExpectedDistribution, StatsError};
use crate::wire::Num17;

/// Expected counts below this are pooled into a single chi-square bucket.
pub const POOL_BELOW: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Total variation distance against a threshold.
    Tv,
    /// Pearson chi-square test at significance `alpha`.
    Chi2,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Tv => "tv",
            Method::Chi2 => "chi2",
        })
    }
}

impl FromStr for Method {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, StatsError> {
        match s {
            "tv" => Ok(Method::Tv),
            "chi2" => Ok(Method::Chi2),
            _ => Err(StatsError::InvalidParameter(format!("unknown method `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AssertionVerdict {
    pub method: Method,
    pub statistic: Num17,
    /// TV threshold or chi-square significance level.
    pub param: Num17,
    /// Largest passing statistic: the threshold for TV, the chi-square
    /// quantile for chi2.
    pub critical: Num17,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dof: Option<usize>,
    pub pass: bool,
}

/// Compares shot counts against expected probabilities.
pub fn assert_distribution(
    e: &EmpiricalDistribution,
    x: &ExpectedDistribution,
    method: Method,
    param: f64,
) -> Result<AssertionVerdict, StatsError> {
    if !(param > 0.0 && param < 1.0) {
        return Err(StatsError::InvalidParameter(format!("{method} parameter {param} outside (0, 1)")));
    }
    match method {
        Method::Tv => Ok(tv(e, x, param)),
        Method::Chi2 => chi2(e, x, param),
    }
}

fn tv(e: &EmpiricalDistribution, x: &ExpectedDistribution, threshold: f64) -> AssertionVerdict {
    let keys: BTreeSet<&String> = e.counts.keys().chain(x.probs.keys()).collect();
    let stat = 0.5 * keys.iter().map(|k| (e.frequency(k) - x.prob(k)).abs()).sum::<f64>();
    AssertionVerdict {
        method: Method::Tv,
        statistic: Num17(stat),
        param: Num17(threshold),
        critical: Num17(threshold),
        dof: None,
        pass: stat <= threshold,
    }
}

fn chi2(e: &EmpiricalDistribution, x: &ExpectedDistribution, alpha: f64) -> Result<AssertionVerdict, StatsError> {
    if let Some(k) = e.counts.iter().find(|(k, &c)| c > 0 && x.prob(k) == 0.0).map(|(k, _)| k) {
        return Err(StatsError::DomainMismatch(k.clone()));
    }
    let n = e.shots as f64;
    // (observed, expected) per bucket, small buckets pooled into the last one
    let mut buckets: Vec<(f64, f64)> = Vec::new();
    let mut pool = (0.0, 0.0);
    for (k, &p) in x.probs.iter().filter(|(_, &p)| p > 0.0) {
        let obs = e.count(k) as f64;
        let exp = p * n;
        if exp < POOL_BELOW {
            pool.0 += obs;
            pool.1 += exp;
        } else {
            buckets.push((obs, exp));
        }
    }
    if pool.1 > 0.0 {
        buckets.push(pool);
    }
    let stat: f64 = buckets.iter().map(|(o, x)| (o - x) * (o - x) / x).sum();
    let dof = buckets.len().saturating_sub(1);
    let critical = if dof == 0 {
        0.0
    } else {
        ChiSquared::new(dof as f64)
            .map_err(|err| StatsError::InvalidParameter(err.to_string()))?
            .inverse_cdf(1.0 - alpha)
    };
    Ok(AssertionVerdict {
        method: Method::Chi2,
        statistic: Num17(stat),
        param: Num17(alpha),
        critical: Num17(critical),
        dof: Some(dof),
        // a single bucket carries no information; treat it as consistent
        pass: dof == 0 || stat <= critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn emp(pairs: &[(&str, u64)]) -> EmpiricalDistribution {
        EmpiricalDistribution::new(pairs.iter().map(|(k, c)| (k.to_string(), *c)).collect(), None).unwrap()
    }

    fn exp(pairs: &[(&str, f64)]) -> ExpectedDistribution {
        ExpectedDistribution::new(pairs.iter().map(|(k, p)| (k.to_string(), *p)).collect::<BTreeMap<_, _>>()).unwrap()
    }

    #[test]
    fn tv_exact_match_passes_with_zero() {
        let v = assert_distribution(&emp(&[("0", 50), ("1", 50)]), &exp(&[("0", 0.5), ("1", 0.5)]), Method::Tv, 0.05).unwrap();
        assert!(v.pass);
        assert_eq!(v.statistic.0, 0.0);
    }

    #[test]
    fn tv_disjoint_support_fails_with_one() {
        let v = assert_distribution(&emp(&[("1", 10)]), &exp(&[("0", 1.0)]), Method::Tv, 0.05).unwrap();
        assert!(!v.pass);
        assert_eq!(v.statistic.0, 1.0);
    }

    #[test]
    fn chi2_statistic_and_quantile() {
        // (55-50)^2/50 * 2 = 1.0; chi2(1) 0.99 quantile = 6.634896601...
        let v = assert_distribution(&emp(&[("0", 55), ("1", 45)]), &exp(&[("0", 0.5), ("1", 0.5)]), Method::Chi2, 0.01).unwrap();
        assert!((v.statistic.0 - 1.0).abs() < 1e-12);
        assert!((v.critical.0 - 6.634_896_601_021_214).abs() < 1e-6);
        assert_eq!(v.dof, Some(1));
        assert!(v.pass);
    }

    #[test]
    fn chi2_pools_small_buckets() {
        // expected counts 90, 4, 3, 3 -> buckets {90}, {10}
        let v = assert_distribution(
            &emp(&[("00", 90), ("01", 5), ("10", 2), ("11", 3)]),
            &exp(&[("00", 0.9), ("01", 0.04), ("10", 0.03), ("11", 0.03)]),
            Method::Chi2,
            0.05,
        )
        .unwrap();
        assert_eq!(v.dof, Some(1));
        assert!(v.statistic.0.abs() < 1e-12);
    }

    #[test]
    fn chi2_domain_mismatch() {
        let r = assert_distribution(&emp(&[("0", 9), ("1", 1)]), &exp(&[("0", 1.0)]), Method::Chi2, 0.01);
        assert_eq!(r.unwrap_err(), StatsError::DomainMismatch("1".into()));
    }

    #[test]
    fn parameter_range_checked() {
        let e = emp(&[("0", 1)]);
        let x = exp(&[("0", 1.0)]);
        assert!(assert_distribution(&e, &x, Method::Tv, 0.0).is_err());
        assert!(assert_distribution(&e, &x, Method::Chi2, 1.0).is_err());
        assert_eq!("chi2".parse::<Method>().unwrap(), Method::Chi2);
        assert!("ks".parse::<Method>().is_err());
    }
}
