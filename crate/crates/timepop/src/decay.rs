//! Temporal decay of precursor contributions.
//!
//! The elapsed time combines two anchors: how long ago the contributing
//! user was last active, and how old their rating of the item is. Both an
//! inactive user and a stale rating push the weight down.

use crate::error::{Error, Result};

/// Seconds in one day; elapsed times are expressed in days before decaying.
pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// Shape of the decay law applied to elapsed days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecayKind {
    /// w = e^(-beta * days)
    #[default]
    Exponential,
    /// w = max(0, 1 - beta * days)
    Linear,
    /// w = 1 regardless of age
    None,
}

/// Decay rate per day plus the functional form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayParams {
    /// Per-day rate; must be positive.
    pub beta: f64,
    pub kind: DecayKind,
}

impl Default for DecayParams {
    fn default() -> Self {
        DecayParams {
            beta: 1.0 / 200.0,
            kind: DecayKind::Exponential,
        }
    }
}

impl DecayParams {
    pub fn exponential(beta: f64) -> Self {
        DecayParams {
            beta,
            kind: DecayKind::Exponential,
        }
    }

    /// Weight for an elapsed time in days.
    pub fn weight(&self, delta_days: f64) -> Result<f64> {
        decay_weight(delta_days, self)
    }
}

/// Elapsed time in days between the reference timestamp and a rating,
/// penalizing both user inactivity and rating age:
/// |t0 - 2 * last_activity + rating_time| / 86400.
///
/// Requires rating_time <= last_activity <= t0.
pub fn delta_t_days(t0: i64, last_activity: i64, rating_time: i64) -> Result<f64> {
    if rating_time > last_activity || last_activity > t0 {
        return Err(Error::NonCausalTimestamps {
            t0,
            last_activity,
            rating_time,
        });
    }
    let delta = (t0 - 2 * last_activity + rating_time).abs();
    Ok(delta as f64 / SECONDS_PER_DAY)
}

/// Decay weight for an elapsed time in days. Exponential decay maps 0 days
/// to exactly 1.0 and stays in (0, 1].
pub fn decay_weight(delta_days: f64, params: &DecayParams) -> Result<f64> {
    if delta_days < 0.0 || delta_days.is_nan() {
        return Err(Error::NegativeElapsed(delta_days));
    }
    Ok(match params.kind {
        DecayKind::Exponential => (-params.beta * delta_days).exp(),
        DecayKind::Linear => (1.0 - params.beta * delta_days).max(0.0),
        DecayKind::None => 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const DAY: i64 = 86_400;

    #[test]
    fn all_anchors_equal_gives_zero() {
        assert_eq!(delta_t_days(100, 100, 100).unwrap(), 0.0);
    }

    #[test]
    fn old_user_recent_item() {
        // Last activity coincides with the rating: elapsed = t0 - last.
        let d = delta_t_days(100 * DAY, 40 * DAY, 40 * DAY).unwrap();
        assert_eq!(d, 60.0);
    }

    #[test]
    fn recent_user_old_item() {
        // User active at t0, rating is old: elapsed = last - rating.
        let d = delta_t_days(100 * DAY, 100 * DAY, 40 * DAY).unwrap();
        assert_eq!(d, 60.0);
    }

    #[test]
    fn symmetric_gaps_cancel() {
        // t0 - last == last - rating makes the two anchors cancel exactly.
        let d = delta_t_days(100 * DAY, 70 * DAY, 40 * DAY).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn non_causal_timestamps_are_rejected() {
        assert!(delta_t_days(10, 20, 5).is_err());
        assert!(delta_t_days(10, 5, 7).is_err());
    }

    #[test]
    fn zero_elapsed_weight_is_exactly_one() {
        let p = DecayParams::default();
        assert_eq!(decay_weight(0.0, &p).unwrap(), 1.0);
    }

    #[test]
    fn default_rate_reaches_inverse_e_at_200_days() {
        let p = DecayParams::default();
        let w = decay_weight(200.0, &p).unwrap();
        assert!((w - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn half_life_at_default_rate() {
        let p = DecayParams::default();
        let half_life = 200.0 * 2.0f64.ln();
        let w = decay_weight(half_life, &p).unwrap();
        assert!((w - 0.5).abs() < 1e-12);
    }

    #[test]
    fn negative_elapsed_is_rejected() {
        assert!(decay_weight(-0.1, &DecayParams::default()).is_err());
        assert!(decay_weight(f64::NAN, &DecayParams::default()).is_err());
    }

    #[test]
    fn linear_clamps_at_zero() {
        let p = DecayParams {
            beta: 0.1,
            kind: DecayKind::Linear,
        };
        assert_eq!(decay_weight(5.0, &p).unwrap(), 0.5);
        assert_eq!(decay_weight(20.0, &p).unwrap(), 0.0);
    }

    #[test]
    fn flat_kind_ignores_age() {
        let p = DecayParams {
            beta: 1.0,
            kind: DecayKind::None,
        };
        assert_eq!(decay_weight(1e6, &p).unwrap(), 1.0);
    }
}
