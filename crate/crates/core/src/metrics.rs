//! Regret and reward curves, and their aggregation over seeds.

use serde::{Deserialize, Serialize};

use crate::engine::RoundRecord;
use crate::error::{McboError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    CumRegret,
    AvgReward,
    AvgRewardSum,
    BestReward,
    InfoGain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub kind: CurveKind,
    pub values: Vec<f64>,
}

impl Curve {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }
}

fn rewards(records: &[RoundRecord]) -> impl Iterator<Item = f64> + '_ {
    records.iter().map(|r| r.expected_reward)
}

fn running_sum(xs: impl Iterator<Item = f64>) -> Vec<f64> {
    xs.scan(0.0, |acc, x| {
        *acc += x;
        Some(*acc)
    })
    .collect()
}

/// `R_t = sum_{s <= t} (optimum - E[y | a_s])`.
pub fn cumulative_regret(records: &[RoundRecord], optimum: f64) -> Curve {
    regret_from_rewards(rewards(records), optimum)
}

pub fn regret_from_rewards(rewards: impl Iterator<Item = f64>, optimum: f64) -> Curve {
    Curve {
        kind: CurveKind::CumRegret,
        values: running_sum(rewards.map(|r| optimum - r)),
    }
}

/// Running mean of the expected rewards.
pub fn average_reward(records: &[RoundRecord]) -> Curve {
    average_from_rewards(rewards(records))
}

pub fn average_from_rewards(rewards: impl Iterator<Item = f64>) -> Curve {
    let values = running_sum(rewards)
        .into_iter()
        .enumerate()
        .map(|(t, s)| s / (t + 1) as f64)
        .collect();
    Curve {
        kind: CurveKind::AvgReward,
        values,
    }
}

/// Running sum of the expected rewards.
pub fn average_reward_sum(records: &[RoundRecord]) -> Curve {
    Curve {
        kind: CurveKind::AvgRewardSum,
        values: running_sum(rewards(records)),
    }
}

/// Running maximum of the expected rewards.
pub fn best_reward(records: &[RoundRecord]) -> Curve {
    best_from_rewards(rewards(records))
}

pub fn best_from_rewards(rewards: impl Iterator<Item = f64>) -> Curve {
    let values = rewards
        .scan(f64::NEG_INFINITY, |m, r| {
            *m = m.max(r);
            Some(*m)
        })
        .collect();
    Curve {
        kind: CurveKind::BestReward,
        values,
    }
}

/// Cumulative realized information gain.
pub fn info_gain(records: &[RoundRecord]) -> Curve {
    Curve {
        kind: CurveKind::InfoGain,
        values: running_sum(records.iter().map(|r| r.info_gain)),
    }
}

/// Pointwise mean and standard error (sample standard deviation over
/// `sqrt(n)`; zero for a single curve).
pub fn aggregate_seeds(curves: &[Curve]) -> Result<(Curve, Curve)> {
    let first = curves.first().ok_or(McboError::LengthMismatch(0, 1))?;
    let len = first.len();
    for c in curves {
        if c.len() != len {
            return Err(McboError::LengthMismatch(c.len(), len));
        }
    }
    let n = curves.len() as f64;
    let mut mean = vec![0.0; len];
    let mut stderr = vec![0.0; len];
    for t in 0..len {
        let m = curves.iter().map(|c| c.values[t]).sum::<f64>() / n;
        mean[t] = m;
        if curves.len() > 1 {
            let var = curves.iter().map(|c| (c.values[t] - m).powi(2)).sum::<f64>() / (n - 1.0);
            stderr[t] = (var / n).sqrt();
        }
    }
    Ok((
        Curve {
            kind: first.kind,
            values: mean,
        },
        Curve {
            kind: first.kind,
            values: stderr,
        },
    ))
}

/// Median of a slice; `NaN` when empty.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::{Intervention, Sample};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn records(rs: &[f64]) -> Vec<RoundRecord> {
        rs.iter()
            .enumerate()
            .map(|(t, &r)| RoundRecord {
                t: t + 1,
                intervention: Intervention::Observational,
                sample: Sample {
                    obs: vec![vec![r]],
                    reward: r,
                },
                expected_reward: r,
                acq_value: 0.0,
                wall_ms: 0,
                info_gain: 0.0,
            })
            .collect()
    }

    #[test]
    fn regret_examples() {
        assert_eq!(cumulative_regret(&records(&[3.0; 3]), 3.0).values, vec![0.0; 3]);
        assert_eq!(cumulative_regret(&records(&[1.0, 2.0, 3.0]), 3.0).values, vec![2.0, 3.0, 3.0]);
    }

    #[test]
    fn average_examples() {
        assert_eq!(average_reward(&records(&[3.0; 3])).values, vec![3.0; 3]);
        assert_eq!(average_reward(&records(&[0.0, 6.0])).values, vec![0.0, 3.0]);
        assert_eq!(average_reward_sum(&records(&[0.0, 6.0])).values, vec![0.0, 6.0]);
    }

    #[test]
    fn best_examples() {
        assert_eq!(best_reward(&records(&[1.0, 3.0, 2.0])).values, vec![1.0, 3.0, 3.0]);
        assert_eq!(best_reward(&records(&[2.0; 4])).values, vec![2.0; 4]);
    }

    #[test]
    fn aggregate_examples() {
        let c = |v: Vec<f64>| Curve {
            kind: CurveKind::AvgReward,
            values: v,
        };
        let (m, s) = aggregate_seeds(&[c(vec![1.0, 2.0]), c(vec![1.0, 2.0])]).unwrap();
        assert_eq!(m.values, vec![1.0, 2.0]);
        assert_eq!(s.values, vec![0.0, 0.0]);
        let (m, s) = aggregate_seeds(&[c(vec![0.0]), c(vec![2.0])]).unwrap();
        assert_eq!(m.values, vec![1.0]);
        assert_relative_eq!(s.values[0], 1.0, epsilon = 1e-15);
        let (m, s) = aggregate_seeds(&[c(vec![4.0, 5.0])]).unwrap();
        assert_eq!(m.values, vec![4.0, 5.0]);
        assert_eq!(s.values, vec![0.0, 0.0]);
        assert!(matches!(
            aggregate_seeds(&[c(vec![0.0]), c(vec![0.0, 1.0])]),
            Err(McboError::LengthMismatch(2, 1))
        ));
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    proptest! {
        #[test]
        fn regret_average_identity(rs in prop::collection::vec(-5.0f64..5.0, 1..40)) {
            let opt = rs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let recs = records(&rs);
            let regret = cumulative_regret(&recs, opt);
            let avg = average_reward(&recs);
            let sum = average_reward_sum(&recs);
            let best = best_reward(&recs);
            for t in 0..rs.len() {
                let k = (t + 1) as f64;
                prop_assert!((opt * k - sum.values[t] - regret.values[t]).abs() <= 1e-12);
                prop_assert!((opt - avg.values[t] - regret.values[t] / k).abs() <= 1e-12);
                prop_assert!(best.values[t] >= avg.values[t] - 1e-12);
                if t > 0 {
                    prop_assert!(regret.values[t] >= regret.values[t - 1]);
                    prop_assert!(best.values[t] >= best.values[t - 1]);
                }
            }
        }
    }
}
