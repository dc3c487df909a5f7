use serde::{Deserialize, Serialize};

use super::ConfigSet;
use crate::error::{Error, Result};
use crate::measurement::{MeasurementRecord, Protocol, SlotPlan};

/// Estimated measurement correlation of one variant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GEstimate {
    pub value: f64,
    /// Sample standard deviation of the outcome product over `√samples`.
    pub stderr: f64,
    /// Number of products averaged; 0 for exact values.
    pub samples: usize,
    pub variant: usize,
}

impl GEstimate {
    /// A noise-free value.
    pub fn exact(value: f64, variant: usize) -> Self {
        GEstimate {
            value,
            stderr: 0.0,
            samples: 0,
            variant,
        }
    }

    /// Mean and standard error of `±1` products.
    pub fn from_products(products: impl Iterator<Item = f64>, variant: usize) -> Self {
        let (mut n, mut sum, mut sum_sq) = (0usize, 0.0, 0.0);
        for p in products {
            n += 1;
            sum += p;
            sum_sq += p * p;
        }
        let mean = if n > 0 { sum / n as f64 } else { 0.0 };
        let stderr = if n > 1 {
            let var = ((sum_sq - n as f64 * mean * mean) / (n - 1) as f64).max(0.0);
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        GEstimate {
            value: mean,
            stderr,
            samples: n,
            variant,
        }
    }
}

const TIME_TOL: f64 = 1e-9;

fn same_axes(a: [f64; 3], b: [f64; 3]) -> bool {
    a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12)
}

/// Averages the outcome product over `subset` for `variant` of `set`.
///
/// For unit records `subset` lists slot positions in the plan and every
/// shot contributes one product. For streaming records `subset` lists
/// offsets inside the pattern window and every window of every trajectory
/// contributes one product; the variant's times are then matched by their
/// differences, which presumes a stationary bath state.
pub fn estimate_g(
    record: &MeasurementRecord,
    plan: &SlotPlan,
    subset: &[usize],
    set: &ConfigSet,
    variant: usize,
) -> Result<GEstimate> {
    record.check_plan(plan)?;
    let v = set
        .variants()
        .get(variant)
        .ok_or_else(|| Error::SubsetMismatch(format!("no variant {variant}")))?;
    if subset.len() != v.configs.len() {
        return Err(Error::SubsetMismatch(format!(
            "subset of {} slots for a variant of order {}",
            subset.len(),
            v.configs.len()
        )));
    }
    let bound = match plan.protocol() {
        Protocol::Unit => plan.len(),
        Protocol::Streaming => plan.window(),
    };
    if subset.windows(2).any(|w| w[0] >= w[1]) || subset.iter().any(|&k| k >= bound) {
        return Err(Error::SubsetMismatch(format!(
            "subset {subset:?} must be increasing positions below {bound}"
        )));
    }
    let t0 = plan.slots()[subset[0]].config.time();
    let v0 = v.configs[0].time();
    for (&k, c) in subset.iter().zip(&v.configs) {
        let slot = &plan.slots()[k];
        if !slot.used {
            return Err(Error::SubsetMismatch(format!("slot {k} is idle")));
        }
        let time_ok = match plan.protocol() {
            Protocol::Unit => (slot.config.time() - c.time()).abs() < TIME_TOL,
            Protocol::Streaming => ((slot.config.time() - t0) - (c.time() - v0)).abs() < TIME_TOL,
        };
        if !time_ok
            || !same_axes(slot.config.prep(), c.prep())
            || !same_axes(slot.config.measure(), c.measure())
            || (slot.config.delta_t() - c.delta_t()).abs() > 1e-15
        {
            return Err(Error::SubsetMismatch(format!(
                "slot {k} ({:?}) does not realise variant {variant} config {c:?}",
                slot.config
            )));
        }
    }
    let product = |shot: usize, offset: usize| -> f64 {
        subset
            .iter()
            .map(|&k| record.outcome(shot, offset + k) as f64)
            .product()
    };
    Ok(match plan.protocol() {
        Protocol::Unit => {
            GEstimate::from_products((0..record.shots()).map(|s| product(s, 0)), variant)
        }
        Protocol::Streaming => {
            let w = plan.window();
            let windows = plan.num_windows();
            GEstimate::from_products(
                (0..record.shots())
                    .flat_map(|s| (0..windows).map(move |j| (s, j * w)))
                    .map(|(s, o)| product(s, o)),
                variant,
            )
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::ChannelMode;
    use crate::reconstruction::{build_config_set, SlotBasis};

    #[test]
    fn all_plus_record() {
        let set = build_config_set(&[0.1, 0.2], 0.01, &[SlotBasis::XY; 2]).unwrap();
        let plan = SlotPlan::unit(set.variants()[0].configs.clone()).unwrap();
        let rec = MeasurementRecord::from_rows(
            &plan,
            0,
            ChannelMode::ExactUnitary,
            &vec![vec![1, 1]; 10],
        )
        .unwrap();
        let g = estimate_g(&rec, &plan, &[0, 1], &set, 0).unwrap();
        assert_eq!((g.value, g.stderr, g.samples), (1.0, 0.0, 10));
    }

    #[test]
    fn sample_statistics() {
        let g = GEstimate::from_products([1.0, -1.0, 1.0, 1.0].into_iter(), 0);
        assert_eq!(g.value, 0.5);
        // Sample variance 1, so stderr = 1/2.
        assert!((g.stderr - 0.5).abs() < 1e-15);
    }

    #[test]
    fn wrong_variant_rejected() {
        let set = build_config_set(&[0.1, 0.2], 0.01, &[SlotBasis::XY; 2]).unwrap();
        let plan = SlotPlan::unit(set.variants()[0].configs.clone()).unwrap();
        let rec = MeasurementRecord::from_rows(&plan, 0, ChannelMode::ExactUnitary, &[vec![1, -1]])
            .unwrap();
        assert!(matches!(
            estimate_g(&rec, &plan, &[0, 1], &set, 1),
            Err(Error::SubsetMismatch(_))
        ));
        assert!(matches!(
            estimate_g(&rec, &plan, &[0], &set, 0),
            Err(Error::SubsetMismatch(_))
        ));
    }
}
