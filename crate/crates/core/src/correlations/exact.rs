use std::borrow::Cow;
use std::collections::HashMap;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{CorrelationIndex, CorrelationTensor, CorrelationValue, IndexEntry};
use crate::bath::Bath;
use crate::error::{Error, Result};
use crate::operator::{super_apply_matrix, Matrix, Operator, SuperSign, DEFAULT_TOL};
use crate::spin::Axis;

/// Interaction-picture fields `B̂_α(t)` precomputed on a set of times.
pub struct FieldCache<'a> {
    bath: &'a Bath,
    cache: HashMap<u64, [Matrix; 3]>,
}

impl<'a> FieldCache<'a> {
    pub fn new(bath: &'a Bath, times: &[f64]) -> Self {
        let cache = times
            .par_iter()
            .map(|&t| (t.to_bits(), Axis::ALL.map(|a| bath.field_matrix_at(a, t))))
            .collect();
        FieldCache { bath, cache }
    }

    pub fn bath(&self) -> &Bath {
        self.bath
    }

    /// `B̂_α(t)`, from the cache when available.
    pub fn field(&self, axis: Axis, t: f64) -> Cow<'_, Matrix> {
        match self.cache.get(&t.to_bits()) {
            Some(fields) => Cow::Borrowed(&fields[axis.index()]),
            None => Cow::Owned(self.bath.field_matrix_at(axis, t)),
        }
    }
}

/// Applies the superoperator chain earliest-first and returns the trace.
/// Time order is the caller's responsibility; ties are allowed here.
pub(crate) fn chain_value(entries: &[IndexEntry], fields: &FieldCache<'_>, rho: &Matrix) -> C64 {
    let mut x = rho.clone();
    for e in entries {
        let b = fields.field(e.axis, e.time);
        x = super_apply_matrix(e.sign, &b, &x);
    }
    x.trace()
}

fn checked_real(idx: &CorrelationIndex, value: C64) -> Result<f64> {
    // Each superoperator maps Hermitian to Hermitian, so the trace is real.
    let scale = 1.0f64.max(value.re.abs());
    if value.im.abs() > DEFAULT_TOL * scale {
        log::error!("imaginary residue {:.3e} at {idx}", value.im);
        return Err(Error::ImaginaryResidue(value.im));
    }
    Ok(value.re)
}

/// Exact `C` for one index.
pub fn bath_correlation(idx: &CorrelationIndex, bath: &Bath, rho_b: &Operator) -> Result<f64> {
    if rho_b.space() != bath.space() {
        return Err(Error::DimensionMismatch(format!(
            "bath state on {} for bath on {}",
            rho_b.space(),
            bath.space()
        )));
    }
    let fields = FieldCache::new(bath, &[]);
    checked_real(idx, chain_value(idx.entries(), &fields, rho_b.matrix()))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn cartesian<T: Copy>(choices: &[T], k: usize) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |&c| {
                    let mut p = prefix.clone();
                    p.push(c);
                    p
                })
            })
            .collect();
    }
    out
}

/// Every correlation of order `1..=max_order` whose times are a strictly
/// increasing subset of `times`, over all axis assignments from `axes` and all
/// sign patterns. Patterns with a commutator at the latest time are stored as
/// exact zeros without evaluation.
pub fn correlations_up_to(
    bath: &Bath,
    rho_b: &Operator,
    max_order: usize,
    times: &[f64],
    axes: &[Axis],
) -> Result<CorrelationTensor> {
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::UnsortedTimes(times.to_vec()));
    }
    let fields = FieldCache::new(bath, times);
    let mut indices = Vec::new();
    for n in 1..=max_order {
        let sign_patterns = cartesian(&[SuperSign::Plus, SuperSign::Minus], n);
        let axis_patterns = cartesian(axes, n);
        for subset in combinations(times.len(), n) {
            let ts: Vec<f64> = subset.iter().map(|&i| times[i]).collect();
            for ax in &axis_patterns {
                for sg in &sign_patterns {
                    indices.push(CorrelationIndex::from_parts(ax, sg, &ts)?);
                }
            }
        }
    }
    let rho = rho_b.matrix();
    let values: Vec<(CorrelationIndex, CorrelationValue)> = indices
        .into_par_iter()
        .map(|idx| {
            let value = if idx.latest_sign() == SuperSign::Minus {
                0.0
            } else {
                checked_real(&idx, chain_value(idx.entries(), &fields, rho))?
            };
            Ok((idx, CorrelationValue::exact(value)))
        })
        .collect::<Result<_>>()?;
    Ok(values.into_iter().collect())
}
