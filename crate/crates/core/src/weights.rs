//! Admissible weight sequences.
//!
//! A weight is a positive sequence with `w[0] = 1` that satisfies the
//! doubling bound `C^-1 w[k] <= w[k+t] <= C w[k]` for `0 <= t <= k+1` and
//! whose consecutive ratios tend to one. Power weights `(k+1)^alpha` are the
//! main family; tables with an explicit tail rule cover everything else.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{OpaError, Result};

/// Default number of indices sampled when checking admissibility.
pub const DEFAULT_K_TEST: usize = 4096;

/// How a table weight is continued past its last explicit value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailRule {
    /// Repeat the last value.
    Constant,
    /// Continue as `w[K-1] * ((k+1)/K)^beta`, with `beta` read off the last
    /// two explicit values.
    Power,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    Power {
        alpha: f64,
    },
    Table {
        values: Vec<f64>,
        tail: TailRule,
        tail_exponent: f64,
    },
    /// `w~[t] = base[factor * t]`
    Dilated {
        base: Box<Weight>,
        factor: usize,
    },
    /// `w~[t] = base[t]^exponent`
    Powered {
        base: Box<Weight>,
        exponent: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    kind: WeightKind,
    doubling_constant: f64,
}

impl Weight {
    /// `w[k] = (k+1)^alpha`.
    pub fn power(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(OpaError::Argument(format!(
                "alpha must be finite, got {alpha}"
            )));
        }
        Ok(Weight {
            kind: WeightKind::Power { alpha },
            doubling_constant: 2f64.powf(alpha.abs()),
        })
    }

    /// The trivial weight `w = 1`.
    pub fn unit() -> Self {
        Weight {
            kind: WeightKind::Power { alpha: 0.0 },
            doubling_constant: 1.0,
        }
    }

    /// Table weight whose doubling constant is measured over the first
    /// [`DEFAULT_K_TEST`] indices.
    pub fn table(values: Vec<f64>, tail: TailRule) -> Result<Self> {
        Self::table_sampled(values, tail, DEFAULT_K_TEST)
    }

    pub fn table_sampled(values: Vec<f64>, tail: TailRule, k_test: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(OpaError::Admissibility("table weight has no values".into()));
        }
        if let Some((k, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(OpaError::Admissibility(format!(
                "value at index {k} is not a positive finite number ({v})"
            )));
        }
        if values[0] != 1.0 {
            return Err(OpaError::Admissibility(format!(
                "w[0] must equal 1, got {}",
                values[0]
            )));
        }
        let len = values.len();
        let tail_exponent = match tail {
            TailRule::Power if len >= 2 => {
                (values[len - 1] / values[len - 2]).ln() / (len as f64 / (len - 1) as f64).ln()
            }
            _ => 0.0,
        };
        let mut weight = Weight {
            kind: WeightKind::Table {
                values,
                tail,
                tail_exponent,
            },
            doubling_constant: f64::NAN,
        };
        weight.doubling_constant = sampled_doubling_constant(&weight, k_test.max(len));
        Ok(weight)
    }

    /// Table weight with a declared doubling constant, rejected if the
    /// explicit values violate it.
    pub fn table_with_constant(values: Vec<f64>, tail: TailRule, constant: f64) -> Result<Self> {
        let len = values.len();
        let mut weight = Self::table_sampled(values, tail, len)?;
        if !(constant >= 1.0) {
            return Err(OpaError::Admissibility(format!(
                "doubling constant must be at least 1, got {constant}"
            )));
        }
        let observed = weight.doubling_constant;
        if observed > constant * (1.0 + 1e-12) {
            return Err(OpaError::Admissibility(format!(
                "explicit values need doubling constant {observed}, declared {constant}"
            )));
        }
        weight.doubling_constant = constant;
        Ok(weight)
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    /// The exponent of a power weight.
    pub fn alpha(&self) -> Option<f64> {
        match self.kind {
            WeightKind::Power { alpha } => Some(alpha),
            _ => None,
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self.kind, WeightKind::Power { alpha } if alpha == 0.0)
    }

    pub fn at(&self, k: usize) -> f64 {
        match &self.kind {
            WeightKind::Power { alpha } => {
                if *alpha == 0.0 {
                    1.0
                } else {
                    (k as f64 + 1.0).powf(*alpha)
                }
            }
            WeightKind::Table {
                values,
                tail,
                tail_exponent,
            } => match values.get(k) {
                Some(v) => *v,
                None => {
                    let last = values[values.len() - 1];
                    match tail {
                        TailRule::Constant => last,
                        TailRule::Power => {
                            last * ((k as f64 + 1.0) / values.len() as f64).powf(*tail_exponent)
                        }
                    }
                }
            },
            WeightKind::Dilated { base, factor } => base.at(k * factor),
            WeightKind::Powered { base, exponent } => base.at(k).powf(*exponent),
        }
    }

    /// `[w[0], ..., w[len-1]]`
    pub fn values(&self, len: usize) -> Vec<f64> {
        (0..len).map(|k| self.at(k)).collect()
    }

    pub fn doubling_constant(&self) -> f64 {
        self.doubling_constant
    }

    /// `w~[t] = w[d t]`.
    pub fn dilate(&self, d: usize) -> Result<Weight> {
        if d == 0 {
            return Err(OpaError::Argument(
                "dilation factor must be positive".into(),
            ));
        }
        if d == 1 {
            return Ok(self.clone());
        }
        if self.is_unit() {
            return Ok(Weight::unit());
        }
        let mut weight = Weight {
            kind: WeightKind::Dilated {
                base: Box::new(self.clone()),
                factor: d,
            },
            doubling_constant: f64::NAN,
        };
        weight.doubling_constant = match self.kind {
            // the window ratio ((2dk+d+1)/(dk+1))^|alpha| peaks at k = 0
            WeightKind::Power { alpha } => (d as f64 + 1.0).powf(alpha.abs()),
            _ => sampled_doubling_constant(&weight, DEFAULT_K_TEST),
        };
        Ok(weight)
    }

    /// `w~[t] = w[t]^exponent`; for a power weight this is again a power weight.
    pub fn powered(&self, exponent: f64) -> Result<Weight> {
        if !exponent.is_finite() {
            return Err(OpaError::Argument(format!(
                "exponent must be finite, got {exponent}"
            )));
        }
        if exponent == 1.0 {
            return Ok(self.clone());
        }
        match self.kind {
            WeightKind::Power { alpha } => Weight::power(alpha * exponent),
            _ => Ok(Weight {
                kind: WeightKind::Powered {
                    base: Box::new(self.clone()),
                    exponent,
                },
                doubling_constant: self.doubling_constant.powf(exponent.abs()),
            }),
        }
    }

    pub fn check_admissibility(&self, k_test: usize) -> AdmissibilityReport {
        let observed = sampled_doubling_constant(self, k_test);
        let start = k_test / 2;
        let tail_ratio_deviation = (start..k_test)
            .map(|k| (self.at(k + 1) / self.at(k) - 1.0).abs())
            .fold(0.0, f64::max);
        AdmissibilityReport {
            k_test,
            observed_doubling: observed,
            doubling_holds: observed <= self.doubling_constant * (1.0 + 1e-12),
            tail_ratio_deviation,
            first_value: self.at(0),
        }
    }
}

/// Sampled evidence that a weight satisfies the doubling and ratio
/// conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub k_test: usize,
    pub observed_doubling: f64,
    pub doubling_holds: bool,
    /// `max |w[k+1]/w[k] - 1|` over `k_test/2 <= k < k_test`.
    pub tail_ratio_deviation: f64,
    pub first_value: f64,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self, ratio_tol: f64) -> bool {
        self.doubling_holds && self.tail_ratio_deviation <= ratio_tol && self.first_value == 1.0
    }
}

/// Smallest `C` with `C^-1 w[k] <= w[k+t] <= C w[k]` for all `k < k_test`,
/// `0 <= t <= k+1`. Sliding-window extrema over `[k, 2k+1]`, linear time.
fn sampled_doubling_constant(weight: &Weight, k_test: usize) -> f64 {
    let values = weight.values(2 * k_test + 2);
    let mut max_q: VecDeque<usize> = VecDeque::new();
    let mut min_q: VecDeque<usize> = VecDeque::new();
    let mut right = 0usize;
    let mut worst = 1.0f64;
    for k in 0..k_test {
        while right <= 2 * k + 1 {
            while max_q.back().is_some_and(|&j| values[j] <= values[right]) {
                max_q.pop_back();
            }
            max_q.push_back(right);
            while min_q.back().is_some_and(|&j| values[j] >= values[right]) {
                min_q.pop_back();
            }
            min_q.push_back(right);
            right += 1;
        }
        while max_q.front().is_some_and(|&j| j < k) {
            max_q.pop_front();
        }
        while min_q.front().is_some_and(|&j| j < k) {
            min_q.pop_front();
        }
        let hi = values[*max_q.front().unwrap()] / values[k];
        let lo = values[k] / values[*min_q.front().unwrap()];
        worst = worst.max(hi).max(lo);
    }
    worst
}

/// Weight description as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum WeightSpec {
    Power {
        alpha: f64,
    },
    Table {
        values: Vec<f64>,
        #[serde(default = "default_tail")]
        tail: TailRule,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        doubling_constant: Option<f64>,
    },
}

fn default_tail() -> TailRule {
    TailRule::Constant
}

impl WeightSpec {
    pub fn build(&self) -> Result<Weight> {
        match self {
            WeightSpec::Power { alpha } => Weight::power(*alpha),
            WeightSpec::Table {
                values,
                tail,
                doubling_constant: Some(c),
            } => Weight::table_with_constant(values.clone(), *tail, *c),
            WeightSpec::Table {
                values,
                tail,
                doubling_constant: None,
            } => Weight::table(values.clone(), *tail),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force `max w[k+t]/w[k]` and `max w[k]/w[k+t]`.
    fn brute_doubling(weight: &Weight, k_max: usize) -> f64 {
        let mut worst = 1.0f64;
        for k in 0..=k_max {
            let wk = weight.at(k);
            for t in 0..=k + 1 {
                let wkt = weight.at(k + t);
                worst = worst.max(wkt / wk).max(wk / wkt);
            }
        }
        worst
    }

    #[test]
    fn power_weight_values() {
        assert_eq!(Weight::power(0.0).unwrap().at(17), 1.0);
        assert_eq!(Weight::power(1.0).unwrap().at(3), 4.0);
        assert_eq!(Weight::power(-1.0).unwrap().at(3), 0.25);
    }

    #[test]
    fn power_doubling_constants() {
        assert_eq!(Weight::power(0.0).unwrap().doubling_constant(), 1.0);
        assert_eq!(Weight::power(1.0).unwrap().doubling_constant(), 2.0);
        assert_eq!(Weight::power(-2.0).unwrap().doubling_constant(), 4.0);
    }

    #[test]
    fn negative_alpha_constant_matches_brute_force() {
        let w = Weight::power(-2.0).unwrap();
        let brute = brute_doubling(&w, 2000);
        // supremum approached as k grows: ((2k+2)/(k+1))^2 = 4 exactly at t = k+1
        assert!((brute - 4.0).abs() < 1e-12, "{brute}");
    }

    #[test]
    fn sliding_window_agrees_with_brute_force() {
        let values: Vec<f64> = (0..50).map(|k| 1.0 + ((k * 7) % 5) as f64 * 0.3).collect();
        let w = Weight::table_sampled(values, TailRule::Constant, 300).unwrap();
        let brute = brute_doubling(&w, 299);
        assert!((w.doubling_constant() - brute).abs() < 1e-14);
    }

    #[test]
    fn dilation() {
        let w1 = Weight::power(1.0).unwrap();
        assert_eq!(w1.dilate(2).unwrap().at(2), 5.0);
        let w2 = Weight::power(2.0).unwrap();
        assert_eq!(w2.dilate(2).unwrap().at(1), 9.0);
        let unit = Weight::power(0.0).unwrap().dilate(3).unwrap();
        assert!((0..40).all(|k| unit.at(k) == 1.0));
        assert!(w1.dilate(0).is_err());
        for k in 0..100 {
            assert_eq!(w1.dilate(1).unwrap().at(k), w1.at(k));
        }
    }

    #[test]
    fn dilated_constant_is_valid() {
        for alpha in [-1.5, -1.0, 0.5, 2.0] {
            let w = Weight::power(alpha).unwrap().dilate(3).unwrap();
            let brute = brute_doubling(&w, 500);
            assert!(brute <= w.doubling_constant() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn reciprocal_power_weights() {
        let a = Weight::power(0.7).unwrap();
        let b = Weight::power(-0.7).unwrap();
        for k in 0..1000 {
            assert!((a.at(k) * b.at(k) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn doubling_bound_on_grid() {
        let weights = [
            Weight::power(-1.0).unwrap(),
            Weight::power(0.5).unwrap(),
            Weight::power(3.0).unwrap(),
            Weight::table(vec![1.0, 2.0, 2.5, 3.0, 3.2], TailRule::Power).unwrap(),
        ];
        for w in &weights {
            let c = w.doubling_constant();
            for k in 0..300 {
                for t in 0..=k + 1 {
                    let (wk, wkt) = (w.at(k), w.at(k + t));
                    assert!(wk <= c * wkt * (1.0 + 1e-12) && wkt <= c * wk * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn table_validation() {
        assert!(Weight::table(vec![], TailRule::Constant).is_err());
        assert!(Weight::table(vec![2.0, 1.0], TailRule::Constant).is_err());
        assert!(Weight::table(vec![1.0, -1.0], TailRule::Constant).is_err());
        assert!(Weight::table_with_constant(vec![1.0, 10.0], TailRule::Constant, 2.0).is_err());
        let ok = Weight::table_with_constant(vec![1.0, 1.5], TailRule::Constant, 2.0).unwrap();
        assert_eq!(ok.doubling_constant(), 2.0);
    }

    #[test]
    fn power_tail_extrapolates() {
        let values: Vec<f64> = (0..10).map(|k| (k as f64 + 1.0).powf(1.5)).collect();
        let w = Weight::table(values, TailRule::Power).unwrap();
        for k in 10..200 {
            let exact = (k as f64 + 1.0).powf(1.5);
            assert!((w.at(k) / exact - 1.0).abs() < 1e-10);
        }
        let report = w.check_admissibility(4096);
        assert!(report.is_admissible(1e-3));
    }

    #[test]
    fn powered_weight() {
        let w = Weight::power(2.0).unwrap().powered(0.5).unwrap();
        assert_eq!(w.alpha(), Some(1.0));
        let t = Weight::table(vec![1.0, 4.0], TailRule::Constant)
            .unwrap()
            .powered(0.5)
            .unwrap();
        assert_eq!(t.at(1), 2.0);
        assert_eq!(t.at(7), 2.0);
    }

    #[test]
    fn spec_round_trip() {
        let spec: WeightSpec = serde_json::from_str(r#"{"kind":"power","alpha":0.5}"#).unwrap();
        assert_eq!(spec.build().unwrap().alpha(), Some(0.5));
        let spec: WeightSpec =
            serde_json::from_str(r#"{"kind":"table","values":[1,2,3],"tail":"power"}"#).unwrap();
        let w = spec.build().unwrap();
        assert_eq!(w.at(2), 3.0);
        assert!(serde_json::from_str::<WeightSpec>(r#"{"kind":"geometric"}"#).is_err());
    }
}
