use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::slot_terms;
use crate::correlations::{CorrelationIndex, IndexEntry};
use crate::error::{Error, Result};
use crate::measurement::MeasurementConfig;
use crate::operator::SuperSign;
use crate::spin::{cross, Axis};

/// Preparation and readout axes of a slot.
///
/// | basis | commutator part | anticommutator part |
/// |-------|-----------------|---------------------|
/// | `xy`  | `y`             | `z`                 |
/// | `yz`  | `z`             | `x`                 |
/// | `zx`  | `x`             | `y`                 |
/// | `xz`  | `z`             | `−y`                |
/// | `yx`  | `x`             | `−z`                |
/// | `zy`  | `y`             | `−x`                |
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SlotBasis {
    pub prep: Axis,
    pub measure: Axis,
}

impl SlotBasis {
    pub const XY: SlotBasis = SlotBasis {
        prep: Axis::X,
        measure: Axis::Y,
    };
    pub const YZ: SlotBasis = SlotBasis {
        prep: Axis::Y,
        measure: Axis::Z,
    };
    pub const ZX: SlotBasis = SlotBasis {
        prep: Axis::Z,
        measure: Axis::X,
    };
    pub const XZ: SlotBasis = SlotBasis {
        prep: Axis::X,
        measure: Axis::Z,
    };

    pub fn new(prep: Axis, measure: Axis) -> Result<Self> {
        if prep == measure {
            return Err(Error::BackgroundCondition(1.0));
        }
        Ok(SlotBasis { prep, measure })
    }

    /// Axis whose commutator component the slot probes.
    pub fn commutator_axis(self) -> Axis {
        self.measure
    }

    /// Axis and sign of `r×m`, which carries the anticommutator component.
    pub fn anticommutator_axis(self) -> (Axis, f64) {
        let v = cross(self.prep.unit(), self.measure.unit());
        let k = (0..3).find(|&k| v[k] != 0.0).expect("orthogonal unit axes");
        (Axis::from_index(k).expect("index < 3"), v[k])
    }

    /// Probed axis for a correlation sign at this slot.
    pub fn axis_for(self, sign: SuperSign) -> Axis {
        match sign {
            SuperSign::Plus => self.anticommutator_axis().0,
            SuperSign::Minus => self.commutator_axis(),
        }
    }
}

impl TryFrom<String> for SlotBasis {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 2 {
            return Err(Error::InvalidConfig(format!(
                "slot basis `{s}` must be two axes like `xy`"
            )));
        }
        let parse = |c: char| {
            Axis::try_from(c)
                .map_err(|_| Error::InvalidConfig(format!("bad axis `{c}` in slot basis `{s}`")))
        };
        SlotBasis::new(parse(chars[0])?, parse(chars[1])?)
    }
}

impl From<SlotBasis> for String {
    fn from(b: SlotBasis) -> String {
        format!("{}{}", b.prep.as_char(), b.measure.as_char())
    }
}

/// One protocol variant: a config per slot, earliest first.
#[derive(Clone, Debug, PartialEq)]
pub struct Variant {
    pub configs: Vec<MeasurementConfig>,
    /// Preparation signs per slot for sets built by [`build_config_set`].
    pub flips: Option<Vec<i8>>,
}

impl Variant {
    pub fn times(&self) -> Vec<f64> {
        self.configs.iter().map(|c| c.time()).collect()
    }

    /// `Π_n δt_n`, the factor divided out of `G` before solving.
    pub fn scale(&self) -> f64 {
        self.configs.iter().map(|c| c.delta_t()).product()
    }
}

/// Variants, targeted correlation indices and the design matrix linking
/// them: `G_v / scale_v = Σ_j D[v, j] C_j`.
#[derive(Clone, Debug)]
pub struct ConfigSet {
    variants: Vec<Variant>,
    targets: Vec<CorrelationIndex>,
    design: DMatrix<f64>,
    hadamard: bool,
}

fn design_entry(variant: &Variant, target: &CorrelationIndex) -> f64 {
    variant
        .configs
        .iter()
        .zip(target.entries())
        .map(|(c, e)| c.coefficient(e.axis, e.sign.bar()))
        .product()
}

/// Singular-value cutoff relative to the largest singular value.
pub(crate) const RANK_TOL: f64 = 1e-10;

impl ConfigSet {
    /// Arbitrary variants against arbitrary targets. Every variant must share
    /// the targets' times; the design matrix must have full column rank.
    pub fn custom(
        variants: Vec<Vec<MeasurementConfig>>,
        targets: Vec<CorrelationIndex>,
    ) -> Result<Self> {
        let variants: Vec<Variant> = variants
            .into_iter()
            .map(|configs| Variant {
                configs,
                flips: None,
            })
            .collect();
        Self::assemble(variants, targets, false)
    }

    fn assemble(
        variants: Vec<Variant>,
        targets: Vec<CorrelationIndex>,
        hadamard: bool,
    ) -> Result<Self> {
        let first = variants
            .first()
            .ok_or_else(|| Error::InvalidConfig("config set has no variants".into()))?;
        let times = first.times();
        let n = times.len();
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::UnsortedTimes(times));
        }
        for v in &variants {
            if v.times() != times {
                return Err(Error::InvalidConfig(format!(
                    "variant times {:?} differ from {:?}",
                    v.times(),
                    times
                )));
            }
        }
        for t in &targets {
            if t.times() != times {
                return Err(Error::InvalidConfig(format!(
                    "target {t} is not on the slot times {times:?}"
                )));
            }
        }
        let design = DMatrix::from_fn(variants.len(), targets.len(), |i, j| {
            design_entry(&variants[i], &targets[j])
        });
        let set = ConfigSet {
            variants,
            targets,
            design,
            hadamard,
        };
        set.check_rank()?;
        debug_assert!(set.variants.iter().all(|v| v.configs.len() == n));
        Ok(set)
    }

    fn check_rank(&self) -> Result<()> {
        let needed = self.targets.len();
        if needed == 0 {
            return Err(Error::InvalidConfig(
                "config set has no target correlations".into(),
            ));
        }
        let svd = self.design.clone().svd(false, true);
        let smax = svd.singular_values.max();
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&s| s > RANK_TOL * smax.max(1.0))
            .count();
        if rank >= needed {
            return Ok(());
        }
        // Unidentifiable targets have weight in the null space of the design.
        let v_t = svd.v_t.expect("requested");
        let mut null_weight = vec![0.0f64; needed];
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if s <= RANK_TOL * smax.max(1.0) {
                for j in 0..needed {
                    null_weight[j] += v_t[(k, j)].powi(2);
                }
            }
        }
        // Fewer rows than columns leaves extra null directions outside the SVD.
        if self.design.nrows() < needed {
            let row_space: Vec<f64> = (0..needed)
                .map(|j| {
                    (0..v_t.nrows())
                        .filter(|&k| svd.singular_values[k] > RANK_TOL * smax.max(1.0))
                        .map(|k| v_t[(k, j)].powi(2))
                        .sum()
                })
                .collect();
            for j in 0..needed {
                null_weight[j] = 1.0 - row_space[j];
            }
        }
        let unidentifiable = self
            .targets
            .iter()
            .zip(&null_weight)
            .filter(|(_, &w)| w > 1e-8)
            .map(|(t, _)| t.to_string())
            .collect();
        Err(Error::RankDeficient {
            rank,
            needed,
            unidentifiable,
        })
    }

    pub fn order(&self) -> usize {
        self.targets[0].order()
    }

    pub fn variants(&self) -> &[Variant] {
        &self.variants
    }

    pub fn targets(&self) -> &[CorrelationIndex] {
        &self.targets
    }

    /// Design matrix with the `δt` powers divided out.
    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn is_hadamard(&self) -> bool {
        self.hadamard
    }

    /// Nonzero leading-order terms of `variant` that are not targets. These
    /// leak into the estimate as bias.
    pub fn untargeted_terms(&self, variant: usize) -> Vec<CorrelationIndex> {
        let v = &self.variants[variant];
        let n = v.configs.len();
        let terms: Vec<_> = v
            .configs
            .iter()
            .enumerate()
            .map(|(k, c)| slot_terms(c, k + 1 == n))
            .collect();
        let mut out = Vec::new();
        let mut stack = vec![(0usize, Vec::new())];
        while let Some((k, entries)) = stack.pop() {
            if k == n {
                let idx = CorrelationIndex::new(entries).expect("sorted slot times");
                if !self.targets.contains(&idx) {
                    out.push(idx);
                }
                continue;
            }
            for &(axis, sign, _) in &terms[k] {
                let mut e = entries.clone();
                e.push(IndexEntry::new(axis, sign, v.configs[k].time()));
                stack.push((k + 1, e));
            }
        }
        out.sort();
        out
    }
}

/// The `2^{N−1}` spin-1/2 variants for `times` (earliest first).
///
/// Slot `n < N` is prepared along `±` its basis preparation axis; the latest
/// slot keeps a single config. Targets are every sign pattern with `+` at
/// the latest slot, on the axes selected by each slot's basis.
pub fn build_config_set(times: &[f64], delta_t: f64, bases: &[SlotBasis]) -> Result<ConfigSet> {
    let n = times.len();
    if n == 0 {
        return Err(Error::InvalidConfig("order must be >= 1".into()));
    }
    if bases.len() != n {
        return Err(Error::InvalidConfig(format!(
            "{} slot bases for order {n}",
            bases.len()
        )));
    }
    let count = 1usize << (n - 1);
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
                    MeasurementConfig::along(
                        times[k],
                        bases[k].prep,
                        flips[k] as f64,
                        bases[k].measure,
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
    let targets = (0..count)
        .map(|mask| {
            let entries = (0..n)
                .map(|k| {
                    let sign = if k + 1 < n && mask >> k & 1 == 1 {
                        SuperSign::Minus
                    } else {
                        SuperSign::Plus
                    };
                    IndexEntry::new(bases[k].axis_for(sign), sign, times[k])
                })
                .collect();
            CorrelationIndex::new(entries)
        })
        .collect::<Result<Vec<_>>>()?;
    ConfigSet::assemble(variants, targets, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_table() {
        assert_eq!(SlotBasis::XY.anticommutator_axis(), (Axis::Z, 1.0));
        assert_eq!(SlotBasis::YZ.anticommutator_axis(), (Axis::X, 1.0));
        assert_eq!(SlotBasis::ZX.anticommutator_axis(), (Axis::Y, 1.0));
        assert_eq!(SlotBasis::XZ.anticommutator_axis(), (Axis::Y, -1.0));
        assert_eq!(SlotBasis::XZ.commutator_axis(), Axis::Z);
        assert!(SlotBasis::new(Axis::X, Axis::X).is_err());
        let b: SlotBasis = serde_json::from_str("\"zy\"").unwrap();
        assert_eq!(b.anticommutator_axis(), (Axis::X, -1.0));
    }

    #[test]
    fn variant_counts() {
        for n in 1..=4 {
            let times: Vec<f64> = (0..n).map(|k| k as f64 * 0.5).collect();
            let set = build_config_set(&times, 0.01, &vec![SlotBasis::XY; n]).unwrap();
            assert_eq!(set.variants().len(), 1 << (n - 1));
            assert_eq!(set.targets().len(), 1 << (n - 1));
        }
    }

    #[test]
    fn second_order_set() {
        let set = build_config_set(&[0.1, 0.4], 0.01, &[SlotBasis::XY; 2]).unwrap();
        let names: Vec<String> = set
            .targets()
            .iter()
            .map(|t| format!("{}{}", t.axes_string(), t.signs_string()))
            .collect();
        assert_eq!(names, vec!["zz++", "yz-+"]);
        assert_eq!(set.variants()[1].configs[0].prep(), [-1.0, 0.0, 0.0]);
        assert_eq!(
            set.design(),
            &DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, 1.0])
        );
        assert!(set.untargeted_terms(0).is_empty());
    }

    #[test]
    fn rank_deficient_custom_set_names_indices() {
        let c = |t| MeasurementConfig::along(t, Axis::X, 1.0, Axis::Y, 0.01).unwrap();
        let targets = vec![
            CorrelationIndex::from_parts(&[Axis::Z, Axis::Z], &[SuperSign::Plus; 2], &[0.1, 0.2])
                .unwrap(),
            CorrelationIndex::from_parts(
                &[Axis::Y, Axis::Z],
                &[SuperSign::Minus, SuperSign::Plus],
                &[0.1, 0.2],
            )
            .unwrap(),
        ];
        // Two copies of the same variant cannot separate the two targets.
        let err = ConfigSet::custom(vec![vec![c(0.1), c(0.2)], vec![c(0.1), c(0.2)]], targets)
            .unwrap_err();
        match err {
            Error::RankDeficient {
                rank,
                needed,
                unidentifiable,
            } => {
                assert_eq!((rank, needed), (1, 2));
                assert_eq!(unidentifiable.len(), 2);
                assert!(unidentifiable[0].contains("zz;++"));
            }
            other => panic!("unexpected {other}"),
        }
    }
}
