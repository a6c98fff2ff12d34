//! Geometric-decay check of the logged volume surrogate.

use serde::{Deserialize, Serialize};

use super::trace::Trace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayViolation {
    pub t: u64,
    /// `exp(new - old)`.
    pub ratio: f64,
    /// Whether the round was a flagged (recompute) round.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    /// False when the learner logs no volume surrogate.
    pub applicable: bool,
    pub c: f64,
    pub slack: f64,
    pub flagged_rounds: u64,
    /// Largest ratio seen on a flagged round.
    pub worst_ratio: f64,
    pub violations: Vec<DecayViolation>,
}

impl DecayReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `log_volumes[0]` is the value before round 1; `flagged[t - 1]` marks round `t`.
/// Flagged rounds must shrink the volume by at least `c + slack`; all other
/// rounds must not increase it.
pub fn decay_check(log_volumes: &[f64], flagged: &[bool], c: f64, slack: f64) -> DecayReport {
    assert_eq!(
        log_volumes.len(),
        flagged.len() + 1,
        "one volume per round plus the initial one"
    );
    let applicable = log_volumes.iter().all(|v| v.is_finite());
    let mut rep = DecayReport {
        applicable,
        c,
        slack,
        flagged_rounds: 0,
        worst_ratio: 0.0,
        violations: vec![],
    };
    if !applicable {
        return rep;
    }
    let limit = (c + slack).ln();
    for (i, &f) in flagged.iter().enumerate() {
        let (old, new) = (log_volumes[i], log_volumes[i + 1]);
        let diff = new - old;
        let t = i as u64 + 1;
        if f {
            rep.flagged_rounds += 1;
            rep.worst_ratio = rep.worst_ratio.max(diff.exp());
            if diff > limit {
                rep.violations.push(DecayViolation {
                    t,
                    ratio: diff.exp(),
                    flagged: true,
                });
            }
        } else if diff > 1e-12 * old.abs().max(1.0) {
            rep.violations.push(DecayViolation {
                t,
                ratio: diff.exp(),
                flagged: false,
            });
        }
    }
    rep
}

/// Decay check of a trace, flagged on its recompute rounds.
pub fn trace_decay(trace: &Trace, c: f64, slack: f64) -> DecayReport {
    let mut vols = vec![trace.initial_log_volume];
    vols.extend(trace.rounds.iter().map(|r| r.log_volume));
    let flagged: Vec<bool> = trace.rounds.iter().map(|r| r.recompute).collect();
    decay_check(&vols, &flagged, c, slack)
}
