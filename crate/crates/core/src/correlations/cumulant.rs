//! Moment → cumulant conversion.
//!
//! `C̃(S) = C(S) − Σ_π Π_{B∈π} C̃(B)`, the sum running over every partition
//! `π` of the index positions `S` into at least two blocks. Each block keeps
//! the internal time order of its positions. For orders 2 and 3 this gives
//!
//! ```text
//! C̃(2,1)   = C(2,1) − C̃(2)C̃(1)
//! C̃(3,2,1) = C(3,2,1) − C̃(3,2)C̃(1) − C̃(3,1)C̃(2) − C̃(2,1)C̃(3) − C̃(3)C̃(2)C̃(1)
//! ```

use std::ops::{Mul, Sub};

use super::{CorrelationIndex, CorrelationTensor, CorrelationValue};
use crate::error::{Error, Result};

/// All set partitions of `{0, …, n−1}`. Blocks are ascending and ordered by
/// their smallest element.
pub fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    fn rec(i: usize, n: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == n {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(i);
            rec(i + 1, n, blocks, out);
            blocks[b].pop();
        }
        blocks.push(vec![i]);
        rec(i + 1, n, blocks, out);
        blocks.pop();
    }
    rec(0, n, &mut Vec::new(), &mut out);
    out
}

/// One recursion step: the cumulant of an order-`n` index from its moment and
/// the cumulants of its proper sub-blocks. Generic so it can run on numbers or
/// on symbolic placeholders.
pub fn cumulant_step<T, F>(moment: T, n: usize, mut cumulant_of: F) -> T
where
    T: Clone + Sub<Output = T> + Mul<Output = T>,
    F: FnMut(&[usize]) -> T,
{
    let mut acc = moment;
    for partition in set_partitions(n) {
        if partition.len() < 2 {
            continue;
        }
        let mut blocks = partition.iter();
        let first = cumulant_of(blocks.next().expect("non-empty"));
        let product = blocks.fold(first, |p, b| p * cumulant_of(b));
        acc = acc - product;
    }
    acc
}

/// Converts a moment tensor into the cumulant tensor over the same indices.
///
/// Every sub-index needed by the recursion must be present. Standard errors
/// are propagated to first order assuming independent input errors.
pub fn cumulants_from_moments(tensor: &CorrelationTensor) -> Result<CorrelationTensor> {
    let mut out = CorrelationTensor::new();
    // Iteration order is by increasing order, so sub-blocks are ready first.
    for (idx, moment) in tensor.iter() {
        let n = idx.order();
        let mut missing: Option<CorrelationIndex> = None;
        let mut lookup = |positions: &[usize]| -> (f64, f64) {
            let sub = idx.sub_index(positions);
            match out.get(&sub) {
                Some(v) => (v.value, v.stderr),
                None => {
                    missing.get_or_insert(sub);
                    (0.0, 0.0)
                }
            }
        };
        let value = cumulant_step(moment.value, n, |b| lookup(b).0);
        let mut var = moment.stderr * moment.stderr;
        for partition in set_partitions(n).iter().filter(|p| p.len() >= 2) {
            let parts: Vec<(f64, f64)> = partition.iter().map(|b| lookup(b)).collect();
            for k in 0..parts.len() {
                let others: f64 = parts
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .map(|(_, p)| p.0)
                    .product();
                var += (others * parts[k].1).powi(2);
            }
        }
        if let Some(sub) = missing {
            return Err(Error::MissingCorrelation(format!(
                "{sub} (needed by {idx})"
            )));
        }
        out.insert(
            idx.clone(),
            CorrelationValue {
                value,
                source: moment.source,
                stderr: var.sqrt(),
            },
        );
    }
    Ok(out)
}
