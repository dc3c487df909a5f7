//! Inverse problem: from measurement correlations `G` back to bath
//! correlations `C`.
//!
//! To leading order in the window `δt`,
//!
//! ```text
//! G = Π_n δt_n · Σ_{α, η} Π_n A^{η̄_n}_{α_n}(n) · C^{η_N…η_1}_{α_N…α_1}(t_N,…,t_1)
//! ```
//!
//! with `A^η_α = 2 Tr[Λ S^η_α ρ_S]`. For a preparation `r` and readout `m`
//! this is `A^+_α = m_α` and `A^-_α = (r×m)_α`, so each slot probes two
//! components: the commutator part along `m` and the anticommutator part
//! along `r×m`. Indices with a commutator at the latest slot vanish and are
//! never unknowns.

mod config_set;
mod dephasing;
mod estimate;
mod solve;

pub use config_set::{build_config_set, ConfigSet, SlotBasis, Variant};
pub use dephasing::{dephasing_shortcuts, DephasingSet, ShortcutReport, SignViolation};
pub use estimate::{estimate_g, GEstimate};
pub use solve::{hadamard_closed_form, reconstruct};

use num_complex::Complex64 as C64;

use crate::correlations::{CorrelationIndex, CorrelationTensor, IndexEntry};
use crate::error::Result;
use crate::measurement::MeasurementConfig;
use crate::operator::{super_apply_matrix, SuperSign};
use crate::spin::{bloch_density, pauli, pauli_dot, Axis};

/// `2 Tr[Λ S^η_α ρ_S]` with `S_α = σ_α/2`, evaluated on 2×2 matrices.
pub fn coefficient_a(config: &MeasurementConfig, axis: Axis, sign: SuperSign) -> f64 {
    let s = pauli(axis) * C64::new(0.5, 0.0);
    let rho = bloch_density(config.prep());
    let lambda = pauli_dot(config.measure());
    2.0 * (lambda * super_apply_matrix(sign, &s, &rho)).trace().re
}

/// Nonzero `(axis, correlation sign, coefficient)` terms of one slot.
/// The coefficient of `C^η` is `A^{η̄}`.
fn slot_terms(config: &MeasurementConfig, latest: bool) -> Vec<(Axis, SuperSign, f64)> {
    let mut out = Vec::new();
    for axis in Axis::ALL {
        for sign in [SuperSign::Plus, SuperSign::Minus] {
            if latest && sign == SuperSign::Minus {
                continue;
            }
            let a = config.coefficient(axis, sign.bar());
            if a != 0.0 {
                out.push((axis, sign, a));
            }
        }
    }
    out
}

/// Leading-order `G` for one sequence of slot configs (earliest first).
pub fn forward_g(tensor: &CorrelationTensor, configs: &[MeasurementConfig]) -> Result<f64> {
    let n = configs.len();
    let terms: Vec<_> = configs
        .iter()
        .enumerate()
        .map(|(k, c)| slot_terms(c, k + 1 == n))
        .collect();
    let scale: f64 = configs.iter().map(|c| c.delta_t()).product();
    let mut total = 0.0;
    let mut choice = vec![0usize; n];
    if terms.iter().any(|t| t.is_empty()) {
        return Ok(0.0);
    }
    loop {
        let mut coeff = 1.0;
        let mut entries = Vec::with_capacity(n);
        for (k, &j) in choice.iter().enumerate() {
            let (axis, sign, a) = terms[k][j];
            coeff *= a;
            entries.push(IndexEntry::new(axis, sign, configs[k].time()));
        }
        total += coeff * tensor.value(&CorrelationIndex::new(entries)?)?;
        // Odometer increment over the per-slot term lists.
        let mut k = 0;
        loop {
            if k == n {
                return Ok(scale * total);
            }
            choice[k] += 1;
            if choice[k] < terms[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}
