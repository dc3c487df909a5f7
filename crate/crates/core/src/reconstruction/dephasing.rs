//! Pure-dephasing shortcuts.
//!
//! With only `S_z ⊗ B_z` coupling, a slot prepared along `x` and read out
//! along `y` picks up `C^+_z` alone, and one read out along `z` picks up
//! `C^-_z` alone, so a single sequence gives
//! `C^{η_N…η_1}_{z…z} = G / Π δt` directly. Flipping the preparation of an
//! anticommutator slot flips the sign of `G`; flipping a commutator slot
//! leaves it unchanged. Those identities are checked when the flipped
//! variants are supplied.

use super::{GEstimate, Variant};
use crate::bath::{Bath, SystemSpec};
use crate::correlations::{CorrelationIndex, CorrelationTensor, CorrelationValue};
use crate::error::{Error, Result};
use crate::measurement::MeasurementConfig;
use crate::operator::SuperSign;
use crate::spin::Axis;

/// Sequences measuring one all-`z` correlation.
#[derive(Clone, Debug)]
pub struct DephasingSet {
    target: CorrelationIndex,
    variants: Vec<Variant>,
}

impl DephasingSet {
    /// `signs` are earliest first and must end in `+`. With `with_flips`
    /// every preparation-sign pattern on the earlier slots is included
    /// (variant 0 unflipped); otherwise only variant 0.
    pub fn new(times: &[f64], delta_t: f64, signs: &[SuperSign], with_flips: bool) -> Result<Self> {
        let n = times.len();
        if signs.len() != n || n == 0 {
            return Err(Error::InvalidConfig(format!(
                "{} signs for {n} times",
                signs.len()
            )));
        }
        if signs[n - 1] == SuperSign::Minus {
            return Err(Error::InvalidConfig(
                "a commutator at the latest time vanishes identically".into(),
            ));
        }
        let target = CorrelationIndex::from_parts(&vec![Axis::Z; n], signs, times)?;
        let count = if with_flips { 1usize << (n - 1) } else { 1 };
        let variants = (0..count)
            .map(|mask| {
                let flips: Vec<i8> = (0..n)
                    .map(|k| {
                        if k + 1 < n && mask >> k & 1 == 1 {
                            -1
                        } else {
                            1
                        }
                    })
                    .collect();
                let configs = (0..n)
                    .map(|k| {
                        let measure = match signs[k] {
                            SuperSign::Plus => Axis::Y,
                            SuperSign::Minus => Axis::Z,
                        };
                        MeasurementConfig::along(
                            times[k],
                            Axis::X,
                            flips[k] as f64,
                            measure,
                            delta_t,
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Variant {
                    configs,
                    flips: Some(flips),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DephasingSet { target, variants })
    }

    pub fn target(&self) -> &CorrelationIndex {
        &self.target
    }

    pub fn variants(&self) -> &[Variant] {
        &self.variants
    }

    /// Expected ratio `G_v / G_0` at leading order.
    pub fn expected_sign(&self, variant: usize) -> f64 {
        let flips = self.variants[variant]
            .flips
            .as_ref()
            .expect("built with flips");
        self.target
            .signs()
            .iter()
            .zip(flips)
            .filter(|(s, _)| **s == SuperSign::Plus)
            .map(|(_, &f)| f as f64)
            .product()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignViolation {
    pub variant: usize,
    pub expected: f64,
    pub observed: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Default)]
pub struct ShortcutReport {
    pub entries: CorrelationTensor,
    pub violations: Vec<SignViolation>,
}

/// Reads `C^{…}_{z…z} = G_0 / Π δt` and checks the flip identities beyond
/// `4·stderr`.
pub fn dephasing_shortcuts(
    system: &SystemSpec,
    bath: &Bath,
    set: &DephasingSet,
    estimates: &[GEstimate],
) -> Result<ShortcutReport> {
    if !system.is_pure_dephasing(bath) {
        return Err(Error::NotPureDephasing(
            "transverse noise fields couple to the spin".into(),
        ));
    }
    let by_variant = |v: usize| {
        estimates
            .iter()
            .find(|e| e.variant == v)
            .ok_or_else(|| Error::InvalidConfig(format!("missing estimate for variant {v}")))
    };
    let g0 = by_variant(0)?;
    let scale = set.variants[0].scale();
    let mut report = ShortcutReport::default();
    report.entries.insert(
        set.target.clone(),
        CorrelationValue::reconstructed(g0.value / scale, g0.stderr / scale),
    );
    for v in 1..set.variants.len() {
        let Ok(g) = by_variant(v) else { continue };
        let expected = set.expected_sign(v) * g0.value;
        let tolerance = (4.0 * (g.stderr.powi(2) + g0.stderr.powi(2)).sqrt()).max(1e-12);
        if (g.value - expected).abs() > tolerance {
            log::warn!(
                "sign identity violated for {} variant {v}: {} vs {expected}",
                set.target,
                g.value
            );
            report.violations.push(SignViolation {
                variant: v,
                expected,
                observed: g.value,
                tolerance,
            });
        }
    }
    Ok(report)
}
