use nalgebra::DVector;

use super::config_set::RANK_TOL;
use super::{ConfigSet, GEstimate};
use crate::correlations::{CorrelationTensor, CorrelationValue};
use crate::error::{Error, Result};

/// Right-hand side `G_v / scale_v` and its standard errors, in variant order.
fn scaled_rhs(estimates: &[GEstimate], set: &ConfigSet) -> Result<(DVector<f64>, DVector<f64>)> {
    let n = set.variants().len();
    let mut values = vec![None; n];
    for e in estimates {
        let slot = values.get_mut(e.variant).ok_or_else(|| {
            Error::InvalidConfig(format!("estimate for unknown variant {}", e.variant))
        })?;
        if slot.replace(*e).is_some() {
            return Err(Error::InvalidConfig(format!(
                "duplicate estimate for variant {}",
                e.variant
            )));
        }
    }
    let mut b = DVector::zeros(n);
    let mut s = DVector::zeros(n);
    for (v, e) in values.into_iter().enumerate() {
        let e =
            e.ok_or_else(|| Error::InvalidConfig(format!("missing estimate for variant {v}")))?;
        let scale = set.variants()[v].scale();
        b[v] = e.value / scale;
        s[v] = e.stderr / scale;
    }
    Ok((b, s))
}

/// Least-squares solve of `D C = G/scale` through the SVD, with standard
/// errors propagated through the pseudo-inverse assuming independent
/// estimates.
pub fn reconstruct(estimates: &[GEstimate], set: &ConfigSet) -> Result<CorrelationTensor> {
    let (b, s) = scaled_rhs(estimates, set)?;
    let svd = set.design().clone().svd(true, true);
    let eps = RANK_TOL * svd.singular_values.max().max(1.0);
    let pinv = svd
        .pseudo_inverse(eps)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let c = &pinv * &b;
    Ok(set
        .targets()
        .iter()
        .enumerate()
        .map(|(j, idx)| {
            let var: f64 = (0..b.len()).map(|v| (pinv[(j, v)] * s[v]).powi(2)).sum();
            (
                idx.clone(),
                CorrelationValue::reconstructed(c[j], var.sqrt()),
            )
        })
        .collect())
}

/// The sum/difference formulas of the spin-1/2 set:
/// `C_p = 2^{−(N−1)} Σ_v D[v, p] G_v / scale_v`.
pub fn hadamard_closed_form(estimates: &[GEstimate], set: &ConfigSet) -> Result<CorrelationTensor> {
    if !set.is_hadamard() {
        return Err(Error::InvalidConfig(
            "closed form needs a spin-1/2 config set".into(),
        ));
    }
    let (b, s) = scaled_rhs(estimates, set)?;
    let d = set.design();
    let norm = d.nrows() as f64;
    Ok(set
        .targets()
        .iter()
        .enumerate()
        .map(|(j, idx)| {
            let value: f64 = (0..d.nrows()).map(|v| d[(v, j)] * b[v]).sum::<f64>() / norm;
            let var: f64 = (0..d.nrows())
                .map(|v| (d[(v, j)] * s[v] / norm).powi(2))
                .sum();
            (
                idx.clone(),
                CorrelationValue::reconstructed(value, var.sqrt()),
            )
        })
        .collect())
}
