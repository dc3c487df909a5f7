//! Time-ordered bath correlations
//!
//! `C^{η_N…η_1}_{α_N…α_1}(t_N,…,t_1) = Tr[B^{η_N}_{α_N}(t_N) ⋯ B^{η_1}_{α_1}(t_1) ρ_B]`
//!
//! with the earliest superoperator applied first. Indices are stored
//! earliest-first: entry 0 is `(α_1, η_1, t_1)`.

mod cumulant;
mod exact;
mod io;

pub use cumulant::{cumulant_step, cumulants_from_moments, set_partitions};
pub(crate) use exact::chain_value;
pub use exact::{bath_correlation, correlations_up_to, FieldCache};
pub use io::{read_csv, read_json, write_csv, write_json};

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::SuperSign;
use crate::spin::Axis;

/// One `(α, η, t)` slot of a correlation index.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct IndexEntry {
    pub axis: Axis,
    pub sign: SuperSign,
    pub time: f64,
}

impl IndexEntry {
    pub fn new(axis: Axis, sign: SuperSign, time: f64) -> Self {
        IndexEntry { axis, sign, time }
    }
}

/// Ordered list of `(α, η, t)`, earliest first, with strictly increasing times.
#[derive(Clone, Debug)]
pub struct CorrelationIndex {
    entries: Vec<IndexEntry>,
}

impl CorrelationIndex {
    pub fn new(entries: Vec<IndexEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidConfig(
                "correlation order must be >= 1".into(),
            ));
        }
        if entries.iter().any(|e| !e.time.is_finite())
            || entries.windows(2).any(|w| !(w[0].time < w[1].time))
        {
            return Err(Error::UnsortedTimes(
                entries.iter().map(|e| e.time).collect(),
            ));
        }
        Ok(CorrelationIndex { entries })
    }

    /// Builds an index from parallel slices, earliest first.
    pub fn from_parts(axes: &[Axis], signs: &[SuperSign], times: &[f64]) -> Result<Self> {
        if axes.len() != signs.len() || axes.len() != times.len() {
            return Err(Error::InvalidConfig(format!(
                "index parts have lengths {}, {}, {}",
                axes.len(),
                signs.len(),
                times.len()
            )));
        }
        Self::new(
            axes.iter()
                .zip(signs)
                .zip(times)
                .map(|((&a, &s), &t)| IndexEntry::new(a, s, t))
                .collect(),
        )
    }

    pub fn order(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    pub fn times(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.time).collect()
    }

    pub fn axes(&self) -> Vec<Axis> {
        self.entries.iter().map(|e| e.axis).collect()
    }

    pub fn signs(&self) -> Vec<SuperSign> {
        self.entries.iter().map(|e| e.sign).collect()
    }

    pub fn latest_sign(&self) -> SuperSign {
        self.entries.last().expect("order >= 1").sign
    }

    /// Sub-index at the given (ascending) positions, keeping internal order.
    pub fn sub_index(&self, positions: &[usize]) -> CorrelationIndex {
        CorrelationIndex {
            entries: positions.iter().map(|&p| self.entries[p]).collect(),
        }
    }

    /// Earliest-first axis string, e.g. `"zyz"`.
    pub fn axes_string(&self) -> String {
        self.entries.iter().map(|e| e.axis.as_char()).collect()
    }

    /// Earliest-first sign string, e.g. `"+-+"`.
    pub fn signs_string(&self) -> String {
        self.entries.iter().map(|e| e.sign.as_char()).collect()
    }

    pub fn classify(&self) -> CorrelationClass {
        classify(self)
    }
}

impl fmt::Display for CorrelationIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "C[{};{}]({})",
            self.axes_string(),
            self.signs_string(),
            self.times()
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

impl Ord for CorrelationIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| {
                self.entries
                    .iter()
                    .zip(&other.entries)
                    .map(|(a, b)| a.time.total_cmp(&b.time))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
            })
            .then_with(|| self.axes().cmp(&other.axes()))
            .then_with(|| self.signs().cmp(&other.signs()))
    }
}

impl PartialOrd for CorrelationIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for CorrelationIndex {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for CorrelationIndex {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorrelationClass {
    Classical,
    Quantum,
}

/// Quantum iff any superoperator is a commutator.
pub fn classify(idx: &CorrelationIndex) -> CorrelationClass {
    if idx.entries.iter().any(|e| e.sign == SuperSign::Minus) {
        CorrelationClass::Quantum
    } else {
        CorrelationClass::Classical
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Exact,
    Reconstructed,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Exact => "exact",
            Source::Reconstructed => "reconstructed",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationValue {
    pub value: f64,
    pub source: Source,
    pub stderr: f64,
}

impl CorrelationValue {
    pub fn exact(value: f64) -> Self {
        CorrelationValue {
            value,
            source: Source::Exact,
            stderr: 0.0,
        }
    }

    pub fn reconstructed(value: f64, stderr: f64) -> Self {
        CorrelationValue {
            value,
            source: Source::Reconstructed,
            stderr,
        }
    }
}

/// Map from correlation index to real value with provenance.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CorrelationTensor {
    values: BTreeMap<CorrelationIndex, CorrelationValue>,
}

impl CorrelationTensor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, idx: CorrelationIndex, value: CorrelationValue) {
        self.values.insert(idx, value);
    }

    pub fn get(&self, idx: &CorrelationIndex) -> Option<&CorrelationValue> {
        self.values.get(idx)
    }

    /// Value at `idx`, or [`Error::MissingCorrelation`].
    pub fn value(&self, idx: &CorrelationIndex) -> Result<f64> {
        self.values
            .get(idx)
            .map(|v| v.value)
            .ok_or_else(|| Error::MissingCorrelation(idx.to_string()))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CorrelationIndex, &CorrelationValue)> {
        self.values.iter()
    }

    pub fn max_order(&self) -> usize {
        self.values.keys().map(|k| k.order()).max().unwrap_or(0)
    }

    /// Adds all entries of `other`, overwriting duplicates.
    pub fn merge(&mut self, other: CorrelationTensor) {
        self.values.extend(other.values);
    }
}

impl FromIterator<(CorrelationIndex, CorrelationValue)> for CorrelationTensor {
    fn from_iter<I: IntoIterator<Item = (CorrelationIndex, CorrelationValue)>>(iter: I) -> Self {
        CorrelationTensor {
            values: iter.into_iter().collect(),
        }
    }
}
