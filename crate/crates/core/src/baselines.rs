//! Asocial belief-adjustment models: anchor-and-adjust (fixed reference
//! point 0) and minimum acceptable strength (free reference point).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Centered logistic map from stick length to evidence strength in `(-0.5, 0.5)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrengthMap {
    pub growth_rate: f64,
    pub center: f64,
}

impl StrengthMap {
    pub fn new(growth_rate: f64, center: f64) -> Result<Self> {
        if !(growth_rate >= 0.0) || !center.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "growth rate must be >= 0 (got {growth_rate}) and center finite"
            )));
        }
        Ok(Self { growth_rate, center })
    }

    pub fn strength(&self, u: f64) -> f64 {
        evidence_strength(u, self)
    }
}

impl Default for StrengthMap {
    fn default() -> Self {
        Self {
            growth_rate: 1.0,
            center: 5.0,
        }
    }
}

pub fn evidence_strength(u: f64, map: &StrengthMap) -> f64 {
    // 1/(1+e^-x) - 1/2 == tanh(x/2)/2, which is exactly odd in x
    0.5 * (0.5 * map.growth_rate * (u - map.center)).tanh()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdjustVariant {
    Aa,
    Mas,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjustParams {
    pub reference: f64,
    pub initial_belief: f64,
    pub variant: AdjustVariant,
}

impl AdjustParams {
    /// Anchor-and-adjust: reference point fixed at 0.
    pub fn aa() -> Self {
        Self {
            reference: 0.0,
            initial_belief: 0.5,
            variant: AdjustVariant::Aa,
        }
    }

    pub fn mas(reference: f64) -> Self {
        Self {
            reference,
            initial_belief: 0.5,
            variant: AdjustVariant::Mas,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.variant == AdjustVariant::Aa && self.reference != 0.0 {
            return Err(Error::InvalidParameter(
                "anchor-and-adjust fixes the reference point at 0".into(),
            ));
        }
        if !(-1.0..=1.0).contains(&self.reference) {
            return Err(Error::InvalidParameter(format!(
                "reference point {} outside [-1, 1]",
                self.reference
            )));
        }
        if !(0.0..=1.0).contains(&self.initial_belief) {
            return Err(Error::InvalidParameter(format!(
                "initial belief {} outside [0, 1]",
                self.initial_belief
            )));
        }
        Ok(())
    }
}

/// One adding-rule update. The weight is the room left to move in the
/// direction of the adjustment: `C` when moving down, `1 - C` when moving up.
pub fn adjust_update(previous: f64, strength: f64, params: &AdjustParams) -> f64 {
    let r = params.reference;
    if strength == r {
        return previous;
    }
    let weight = if strength <= r { previous } else { 1.0 - previous };
    (previous + weight * (strength - r)).clamp(0.0, 1.0)
}

/// Beliefs after each observation, starting with the initial belief.
/// The reference point is held constant across the sequence.
pub fn adjust_sequence(observations: &[f64], map: &StrengthMap, params: &AdjustParams) -> Vec<f64> {
    let mut out = Vec::with_capacity(observations.len() + 1);
    let mut c = params.initial_belief;
    out.push(c);
    for &u in observations {
        c = adjust_update(c, evidence_strength(u, map), params);
        out.push(c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn strength_examples() {
        let m = StrengthMap::default();
        assert_eq!(evidence_strength(5.0, &m), 0.0);
        let expected = 1.0 / (1.0 + (-1.0f64).exp()) - 0.5;
        assert!((evidence_strength(6.0, &m) - expected).abs() < 1e-15);
        let steep = StrengthMap::new(1e6, 5.0).unwrap();
        assert_eq!(evidence_strength(9.0, &steep), 0.5);
        assert!(StrengthMap::new(-1.0, 5.0).is_err());
    }

    #[test]
    fn update_examples() {
        assert!((adjust_update(0.5, 0.2, &AdjustParams::aa()) - 0.6).abs() < 1e-15);
        assert_eq!(adjust_update(0.37, 0.3, &AdjustParams::mas(0.3)), 0.37);
        assert!((adjust_update(0.5, 0.1, &AdjustParams::mas(0.3)) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn update_clamps() {
        let p = AdjustParams::mas(-1.0);
        assert!(adjust_update(1.0, 1.0, &p) <= 1.0);
        assert!(adjust_update(0.0, -1.0, &AdjustParams::mas(1.0)) >= 0.0);
    }

    #[test]
    fn sequence_examples() {
        let m = StrengthMap::default();
        assert_eq!(adjust_sequence(&[], &m, &AdjustParams::aa()), vec![0.5]);
        let one = adjust_sequence(&[7.0], &m, &AdjustParams::aa());
        assert_eq!(one[1], adjust_update(0.5, evidence_strength(7.0, &m), &AdjustParams::aa()));

        // hand fold: s(6) = s, s(4) = -s
        let s = 1.0 / (1.0 + (-1.0f64).exp()) - 0.5;
        let c1 = 0.5 + 0.5 * s;
        let c2 = c1 + c1 * (-s);
        let two = adjust_sequence(&[6.0, 4.0], &m, &AdjustParams::aa());
        assert!((two[1] - c1).abs() < 1e-15);
        assert!((two[2] - c2).abs() < 1e-15);
    }

    #[test]
    fn params_validation() {
        assert!(AdjustParams::aa().validate().is_ok());
        let mut bad = AdjustParams::aa();
        bad.reference = 0.2;
        assert!(bad.validate().is_err());
        assert!(AdjustParams::mas(1.5).validate().is_err());
    }

    proptest! {
        #[test]
        fn strength_is_odd(b in 0.0..10.0f64, d in 0.0..8.0f64) {
            let m = StrengthMap::new(b, 5.0).unwrap();
            // (5 + d) - 5 and 5 - (5 - d) can differ in the last bit
            let gap = (evidence_strength(5.0 + d, &m) + evidence_strength(5.0 - d, &m)).abs();
            prop_assert!(gap < 1e-15);
        }

        #[test]
        fn strength_bounded_and_monotone(b in 0.01..10.0f64, u in 0.0..10.0f64, du in 0.001..5.0f64) {
            let m = StrengthMap::new(b, 5.0).unwrap();
            let s = evidence_strength(u, &m);
            prop_assert!(s.abs() <= 0.5);
            prop_assert!(evidence_strength(u + du, &m) >= s);
        }

        #[test]
        fn update_stays_in_unit_interval(c in 0.0..=1.0f64, s in -1.0..=1.0f64, r in -1.0..=1.0f64) {
            let out = adjust_update(c, s, &AdjustParams::mas(r));
            prop_assert!((0.0..=1.0).contains(&out));
        }

        #[test]
        fn mas_backfires_exactly_below_reference(c in 0.01..0.99f64, s in 0.001..0.5f64, r in -1.0..=1.0f64) {
            let out = adjust_update(c, s, &AdjustParams::mas(r));
            prop_assert_eq!(out < c, s < r);
        }
    }
}
