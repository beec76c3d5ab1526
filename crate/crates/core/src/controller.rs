//! Local extrapolation with a third/fourth order pair and stepsize selection.
//!
//! The difference of the two results estimates the local error of the
//! third-order method; the fourth-order result is the one that is propagated.

use crate::tableau::ButcherTableau;
use crate::{max_norm, Error, Result, StateVector};

pub const SAFETY: f64 = 0.9;
pub const MIN_FACTOR: f64 = 0.2;
pub const MAX_FACTOR: f64 = 5.0;
const ERR_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToleranceMode {
    Absolute,
    Relative,
}

/// Absolute tolerance `delta_abs` and optional relative tolerance `delta_rel`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceSpec {
    delta_abs: f64,
    delta_rel: f64,
}

impl ToleranceSpec {
    pub fn absolute(delta_abs: f64) -> Result<Self> {
        Self::new(delta_abs, 0.0)
    }

    /// `delta_rel == 0` selects absolute-only control.
    pub fn new(delta_abs: f64, delta_rel: f64) -> Result<Self> {
        if !(delta_abs > 0.0 && delta_abs.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "absolute tolerance must be positive, got {delta_abs}"
            )));
        }
        if !(delta_rel >= 0.0 && delta_rel.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "relative tolerance must be non-negative, got {delta_rel}"
            )));
        }
        Ok(Self {
            delta_abs,
            delta_rel,
        })
    }

    pub fn delta_abs(&self) -> f64 {
        self.delta_abs
    }

    pub fn delta_rel(&self) -> f64 {
        self.delta_rel
    }

    pub fn mode(&self) -> ToleranceMode {
        if self.delta_rel == 0.0 {
            ToleranceMode::Absolute
        } else {
            ToleranceMode::Relative
        }
    }
}

/// Tolerance at a node: `delta_abs`, or in relative mode
/// `min_i max(delta_abs, delta_rel |y_i|)`.
pub fn tolerance_at(y: &[f64], spec: &ToleranceSpec) -> f64 {
    match spec.mode() {
        ToleranceMode::Absolute => spec.delta_abs,
        ToleranceMode::Relative => y
            .iter()
            .map(|yi| spec.delta_abs.max(spec.delta_rel * yi.abs()))
            .fold(f64::INFINITY, f64::min),
    }
}

/// Result of one attempted pair step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepAttempt {
    pub y_low: StateVector,
    pub y_high: StateVector,
    /// `|y_high - y_low|`, componentwise.
    pub local_error_estimate: StateVector,
    pub h_used: f64,
    pub accepted: bool,
    pub h_next: f64,
}

impl StepAttempt {
    pub fn error_norm(&self) -> f64 {
        max_norm(&self.local_error_estimate)
    }

    /// Fills in `accepted` and `h_next` for tolerance `delta`.
    pub fn decide(&mut self, delta: f64, order_low: u32) {
        let (accepted, h_next) = adapt_step(self.error_norm(), self.h_used, delta, order_low);
        self.accepted = accepted;
        self.h_next = h_next;
    }
}

/// Steps both members of the pair from the same state. The acceptance fields
/// are left undecided (`accepted = false`, `h_next = h`).
pub fn pair_step<F>(
    low: &ButcherTableau,
    high: &ButcherTableau,
    rhs: &F,
    t: f64,
    y: &[f64],
    h: f64,
) -> Result<StepAttempt>
where
    F: Fn(f64, &[f64]) -> StateVector + ?Sized,
{
    let y_low = low.rk_step(rhs, t, y, h)?;
    let y_high = high.rk_step(rhs, t, y, h)?;
    let local_error_estimate = y_high
        .iter()
        .zip(&y_low)
        .map(|(a, b)| (a - b).abs())
        .collect();
    Ok(StepAttempt {
        y_low,
        y_high,
        local_error_estimate,
        h_used: h,
        accepted: false,
        h_next: h,
    })
}

/// Elementary controller: accept iff `err <= delta`, and scale the step by
/// `0.9 (delta/err)^(1/(r+1))` clamped to `[1/5, 5]`.
pub fn adapt_step(err: f64, h: f64, delta: f64, order_low: u32) -> (bool, f64) {
    let accepted = err <= delta;
    let ratio = delta / err.max(ERR_FLOOR);
    let factor =
        (SAFETY * ratio.powf(1.0 / (order_low as f64 + 1.0))).clamp(MIN_FACTOR, MAX_FACTOR);
    (accepted, h * factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn tolerance_modes() {
        let abs = ToleranceSpec::absolute(1e-6).unwrap();
        assert_eq!(abs.mode(), ToleranceMode::Absolute);
        assert_eq!(tolerance_at(&[123.0, -4.0], &abs), 1e-6);

        let rel = ToleranceSpec::new(1e-6, 1e-3).unwrap();
        assert_eq!(rel.mode(), ToleranceMode::Relative);
        assert_relative_eq!(tolerance_at(&[2.0, 0.5], &rel), 5e-4, max_relative = 1e-15);
        assert_eq!(tolerance_at(&[0.0, 0.0], &rel), 1e-6);
    }

    #[test]
    fn tolerance_spec_validation() {
        assert!(ToleranceSpec::absolute(0.0).is_err());
        assert!(ToleranceSpec::absolute(f64::NAN).is_err());
        assert!(ToleranceSpec::new(1e-6, -1.0).is_err());
    }

    #[test]
    fn zero_and_constant_rhs_give_zero_estimate() {
        let (rk3, rk4) = (ButcherTableau::kutta3(), ButcherTableau::classical_rk4());
        let zero = |_t: f64, _y: &[f64]| vec![0.0, 0.0];
        let a = pair_step(&rk3, &rk4, &zero, 0.0, &[0.3, 0.4], 0.1).unwrap();
        assert_eq!(a.y_low, vec![0.3, 0.4]);
        assert_eq!(a.y_high, vec![0.3, 0.4]);
        assert_eq!(a.local_error_estimate, vec![0.0, 0.0]);

        let constant = |_t: f64, _y: &[f64]| vec![0.5, -2.0];
        let a = pair_step(&rk3, &rk4, &constant, 1.0, &[0.0, 0.0], 0.25).unwrap();
        assert_eq!(a.local_error_estimate, vec![0.0, 0.0]);
    }

    #[test]
    fn estimate_on_exponential_is_h4_over_24() {
        let (rk3, rk4) = (ButcherTableau::kutta3(), ButcherTableau::classical_rk4());
        let exp = |_t: f64, y: &[f64]| y.to_vec();
        let a = pair_step(&rk3, &rk4, &exp, 0.0, &[1.0], 0.1).unwrap();
        assert_relative_eq!(a.local_error_estimate[0], 1e-4 / 24.0, max_relative = 1e-9);
    }

    #[test]
    fn estimate_tracks_true_rk3_local_error() {
        let (rk3, rk4) = (ButcherTableau::kutta3(), ButcherTableau::classical_rk4());
        let exp = |_t: f64, y: &[f64]| y.to_vec();
        for h in [0.1, 0.05, 0.02, 0.01] {
            let a = pair_step(&rk3, &rk4, &exp, 0.0, &[1.0], h).unwrap();
            assert_relative_eq!(
                a.local_error_estimate[0] / h.powi(4),
                1.0 / 24.0,
                max_relative = 0.01
            );
        }
        // The true error carries an extra h^5/120 term, about h/5 relative.
        for h in [0.02, 0.01, 0.005] {
            let a = pair_step(&rk3, &rk4, &exp, 0.0, &[1.0], h).unwrap();
            let true_err = (f64::exp(h) - a.y_low[0]).abs();
            assert_relative_eq!(a.local_error_estimate[0], true_err, max_relative = 0.01);
        }
    }

    #[test]
    fn adapt_step_examples() {
        let (acc, h) = adapt_step(1e-6, 0.05, 1e-6, 3);
        assert!(acc);
        assert_relative_eq!(h, 0.045, max_relative = 1e-14);

        let (acc, h) = adapt_step(16e-6, 0.05, 1e-6, 3);
        assert!(!acc);
        assert_relative_eq!(h, 0.0225, max_relative = 1e-14);

        let (acc, h) = adapt_step(0.0, 0.05, 1e-6, 3);
        assert!(acc);
        assert_relative_eq!(h, 0.25, max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn growth_is_clamped(err in 0.0..1.0f64, h in 1e-6..1.0f64, delta in 1e-12..1e-2f64) {
            let (_, h_next) = adapt_step(err, h, delta, 3);
            let ratio = h_next / h;
            prop_assert!((MIN_FACTOR * (1.0 - 1e-12)..=MAX_FACTOR * (1.0 + 1e-12)).contains(&ratio));
        }

        #[test]
        fn relative_tolerance_is_scale_monotone(
            q in -10.0..10.0f64, p in -10.0..10.0f64, s in 1.0..10.0f64,
            da in 1e-9..1e-3f64, dr in 1e-9..1e-2f64,
        ) {
            let spec = ToleranceSpec::new(da, dr).unwrap();
            let base = tolerance_at(&[q, p], &spec);
            prop_assert!(tolerance_at(&[q * s, p], &spec) >= base);
            prop_assert!(tolerance_at(&[q, p * s], &spec) >= base);
            prop_assert!(base >= da);
        }
    }
}
