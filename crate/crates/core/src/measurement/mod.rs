//! Weak-measurement protocol: per-slot Kraus maps on the bath, exact joint
//! outcome statistics, and seeded sampling of measurement records.
//!
//! A slot prepares the central spin in `(1 + r·σ)/2`, couples it to the bath
//! for a window `δt`, and reads out `Λ = m·σ` with outcome `λ = ±1`. The
//! conditional bath map is
//!
//! ```text
//! M_λ X = Tr_S[(|λ⟩⟨λ| ⊗ 1) e^{L δt} (ρ_S ⊗ X)]
//! ```
//!
//! evaluated either exactly (joint unitary over the window) or to first order
//! in `δt`. Everything here is in the bath interaction picture, so the bath
//! state does not move between slots.

mod map;
mod record;
mod sampling;
mod schedule;

pub use map::BathMap;
pub use record::{MeasurementRecord, SlotMeta};
pub use schedule::{PatternEntry, Protocol, ScheduleSpec, Slot, SlotPlan};

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bath::{Bath, SystemSpec};
use crate::error::{Error, Result};
use crate::operator::{
    super_apply_matrix, HermitianEigen, Matrix, Operator, SuperSign, DEFAULT_TOL,
};
use crate::spin::{bloch_density, bloch_ket, cross, dot, norm, pauli, Axis};

const UNIT_TOL: f64 = 1e-10;

/// Preparation, readout axis and window of one slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig", into = "RawConfig")]
pub struct MeasurementConfig {
    time: f64,
    prep: [f64; 3],
    measure: [f64; 3],
    delta_t: f64,
}

#[derive(Clone, Serialize, Deserialize)]
struct RawConfig {
    time: f64,
    prep: [f64; 3],
    measure: [f64; 3],
    delta_t: f64,
}

impl TryFrom<RawConfig> for MeasurementConfig {
    type Error = Error;
    fn try_from(r: RawConfig) -> Result<Self> {
        MeasurementConfig::new(r.time, r.prep, r.measure, r.delta_t)
    }
}

impl From<MeasurementConfig> for RawConfig {
    fn from(c: MeasurementConfig) -> Self {
        RawConfig {
            time: c.time,
            prep: c.prep,
            measure: c.measure,
            delta_t: c.delta_t,
        }
    }
}

impl MeasurementConfig {
    /// Validates unit vectors, the background condition `r·m = 0`, `δt > 0`.
    pub fn new(time: f64, prep: [f64; 3], measure: [f64; 3], delta_t: f64) -> Result<Self> {
        if !time.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "slot time {time} is not finite"
            )));
        }
        if !(delta_t > 0.0) || !delta_t.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "window δt = {delta_t} must be positive"
            )));
        }
        for (name, v) in [("preparation", prep), ("measurement", measure)] {
            if (norm(v) - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidConfig(format!(
                    "{name} axis {v:?} is not a unit vector"
                )));
            }
        }
        let rm = dot(prep, measure);
        if rm.abs() > UNIT_TOL {
            return Err(Error::BackgroundCondition(rm));
        }
        Ok(MeasurementConfig {
            time,
            prep,
            measure,
            delta_t,
        })
    }

    /// Same preparation and readout along coordinate axes, with the sign of
    /// the preparation given separately.
    pub fn along(
        time: f64,
        prep: Axis,
        prep_sign: f64,
        measure: Axis,
        delta_t: f64,
    ) -> Result<Self> {
        let r = prep.unit().map(|c| c * prep_sign);
        MeasurementConfig::new(time, r, measure.unit(), delta_t)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn prep(&self) -> [f64; 3] {
        self.prep
    }

    pub fn measure(&self) -> [f64; 3] {
        self.measure
    }

    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }

    pub fn with_time(&self, time: f64) -> Self {
        MeasurementConfig {
            time,
            ..self.clone()
        }
    }

    /// Closed form of `2 Tr[Λ S_α^η ρ_S]`: `m_α` for `+`, `(r×m)_α` for `−`.
    pub fn coefficient(&self, axis: Axis, sign: SuperSign) -> f64 {
        match sign {
            SuperSign::Plus => self.measure[axis.index()],
            SuperSign::Minus => cross(self.prep, self.measure)[axis.index()],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChannelMode {
    /// `e^{Lδt} ≈ 1 + Lδt`.
    FirstOrder,
    /// Joint unitary over the window.
    #[default]
    ExactUnitary,
}

impl ChannelMode {
    pub(crate) fn code(self) -> u8 {
        match self {
            ChannelMode::FirstOrder => 0,
            ChannelMode::ExactUnitary => 1,
        }
    }

    pub(crate) fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(ChannelMode::FirstOrder),
            1 => Some(ChannelMode::ExactUnitary),
            _ => None,
        }
    }
}

/// The two conditional maps of one slot.
#[derive(Clone, Debug)]
pub struct KrausPair {
    pub plus: BathMap,
    pub minus: BathMap,
}

impl KrausPair {
    pub fn outcome(&self, lambda: i8) -> &BathMap {
        if lambda > 0 {
            &self.plus
        } else {
            &self.minus
        }
    }

    /// Unconditional channel `M_+ + M_−`.
    pub fn average(&self) -> BathMap {
        self.plus.plus(&self.minus)
    }

    /// Outcome-weighted map `M_+ − M_−`.
    pub fn signed(&self) -> BathMap {
        self.plus.minus(&self.minus)
    }
}

/// Bath, coupling and channel settings shared by every slot.
#[derive(Clone, Debug)]
pub struct MeasurementModel<'a> {
    bath: &'a Bath,
    fields: [Matrix; 3],
    mode: ChannelMode,
    evolve_bath: bool,
}

impl<'a> MeasurementModel<'a> {
    pub fn new(bath: &'a Bath, system: &SystemSpec, mode: ChannelMode) -> Self {
        if system.hamiltonian != [0.0; 3] {
            log::warn!("experimental: static H_S is ignored inside measurement windows");
        }
        MeasurementModel {
            bath,
            fields: system.effective_fields(bath),
            mode,
            evolve_bath: false,
        }
    }

    /// Exact mode only: let `H_B` act during the window instead of freezing
    /// the fields at the slot start.
    pub fn with_bath_evolution(mut self, on: bool) -> Self {
        self.evolve_bath = on;
        self
    }

    pub fn mode(&self) -> ChannelMode {
        self.mode
    }

    pub fn bath(&self) -> &Bath {
        self.bath
    }

    fn field_at(&self, axis: Axis, t: f64) -> Matrix {
        self.bath
            .evolver()
            .heisenberg(&self.fields[axis.index()], t)
    }

    fn check_state(&self, rho: &Operator) -> Result<()> {
        if rho.space() != self.bath.space() {
            return Err(Error::DimensionMismatch(format!(
                "bath state on {} for bath on {}",
                rho.space(),
                self.bath.space()
            )));
        }
        Ok(())
    }

    pub fn kraus_pair(&self, config: &MeasurementConfig) -> Result<KrausPair> {
        match self.mode {
            ChannelMode::FirstOrder => Ok(self.first_order_pair(config)),
            ChannelMode::ExactUnitary => self.exact_pair(config),
        }
    }

    fn first_order_pair(&self, c: &MeasurementConfig) -> KrausPair {
        let d = self.bath.dim();
        let rho_s = bloch_density(c.prep);
        let fields: Vec<Matrix> = Axis::ALL
            .iter()
            .map(|&a| self.field_at(a, c.time))
            .collect();
        let map_for = |lambda: f64| {
            let proj = (Matrix::identity(2, 2)
                + crate::spin::pauli_dot(c.measure) * C64::new(lambda, 0.0))
                * C64::new(0.5, 0.0);
            let p0 = (&proj * &rho_s).trace().re;
            let mut left = Matrix::identity(d, d) * C64::new(p0 / 2.0, 0.0);
            let mut right = left.clone();
            for axis in Axis::ALL {
                let s = pauli(axis) * C64::new(0.5, 0.0);
                let coeff = |sign| 2.0 * (&proj * super_apply_matrix(sign, &s, &rho_s)).trace().re;
                let (ap, am) = (coeff(SuperSign::Plus), coeff(SuperSign::Minus));
                let b = &fields[axis.index()];
                // a⁺ B⁻ X + a⁻ B⁺ X with B⁻X = −(i/2)[B, X], B⁺X = ½{B, X}.
                left += b * (C64::new(0.5 * am, -0.5 * ap) * c.delta_t);
                right += b * (C64::new(0.5 * am, 0.5 * ap) * c.delta_t);
            }
            BathMap::left_right(left, right)
        };
        KrausPair {
            plus: map_for(1.0),
            minus: map_for(-1.0),
        }
    }

    fn exact_pair(&self, c: &MeasurementConfig) -> Result<KrausPair> {
        let d = self.bath.dim();
        let half = C64::new(0.5, 0.0);
        let u = if self.evolve_bath {
            let mut h = Matrix::identity(2, 2).kronecker(self.bath.hamiltonian().matrix());
            for axis in Axis::ALL {
                h += (pauli(axis) * half).kronecker(&self.fields[axis.index()]);
            }
            let window = HermitianEigen::new(&h, DEFAULT_TOL)?.propagator(c.delta_t);
            let eig = self.bath.evolver().eigen();
            let before = Matrix::identity(2, 2).kronecker(&eig.propagator(c.time));
            let after =
                Matrix::identity(2, 2).kronecker(&eig.propagator(c.time + c.delta_t).adjoint());
            after * window * before
        } else {
            let mut h = Matrix::zeros(2 * d, 2 * d);
            for axis in Axis::ALL {
                h += (pauli(axis) * half).kronecker(&self.field_at(axis, c.time));
            }
            HermitianEigen::new(&h, DEFAULT_TOL)?.propagator(c.delta_t)
        };
        let r = bloch_ket(c.prep, 1.0);
        let kraus = |lambda: f64| {
            let l = bloch_ket(c.measure, lambda);
            let mut k = Matrix::zeros(d, d);
            for i in 0..2 {
                for j in 0..2 {
                    let w = l[i].conj() * r[j];
                    k += u.view((i * d, j * d), (d, d)) * w;
                }
            }
            BathMap::conjugation(k)
        };
        Ok(KrausPair {
            plus: kraus(1.0),
            minus: kraus(-1.0),
        })
    }

    /// Joint outcome probabilities of the used slots, keyed earliest first.
    /// Idle slots act as the averaged channel.
    pub fn joint_probabilities(
        &self,
        slots: &[Slot],
        rho_b: &Operator,
    ) -> Result<BTreeMap<Vec<i8>, f64>> {
        self.check_state(rho_b)?;
        if slots
            .windows(2)
            .any(|w| !(w[0].config.time < w[1].config.time))
        {
            return Err(Error::UnsortedTimes(
                slots.iter().map(|s| s.config.time).collect(),
            ));
        }
        let pairs = slots
            .iter()
            .map(|s| self.kraus_pair(&s.config))
            .collect::<Result<Vec<_>>>()?;
        let mut probs = BTreeMap::new();
        let mut outcomes = Vec::new();
        self.branch(
            slots,
            &pairs,
            0,
            rho_b.matrix().clone(),
            &mut outcomes,
            &mut probs,
        );

        let negative = probs.values().cloned().fold(0.0f64, f64::min);
        match self.mode {
            ChannelMode::ExactUnitary => {
                if negative < -1e-10 {
                    return Err(Error::Numerical(format!(
                        "negative probability {negative:.3e}"
                    )));
                }
                probs.values_mut().for_each(|p| *p = p.max(0.0));
                let total: f64 = probs.values().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::Numerical(format!("probabilities sum to {total}")));
                }
            }
            ChannelMode::FirstOrder => {
                if negative < 0.0 {
                    log::warn!("first-order probabilities clamped (min {negative:.3e})");
                    probs.values_mut().for_each(|p| *p = p.max(0.0));
                    let total: f64 = probs.values().sum();
                    probs.values_mut().for_each(|p| *p /= total);
                }
            }
        }
        Ok(probs)
    }

    fn branch(
        &self,
        slots: &[Slot],
        pairs: &[KrausPair],
        k: usize,
        state: Matrix,
        outcomes: &mut Vec<i8>,
        out: &mut BTreeMap<Vec<i8>, f64>,
    ) {
        if k == slots.len() {
            out.insert(outcomes.clone(), state.trace().re);
            return;
        }
        if !slots[k].used {
            let next = pairs[k].average().apply(&state);
            self.branch(slots, pairs, k + 1, next, outcomes, out);
            return;
        }
        for lambda in [1i8, -1] {
            let next = pairs[k].outcome(lambda).apply(&state);
            outcomes.push(lambda);
            self.branch(slots, pairs, k + 1, next, outcomes, out);
            outcomes.pop();
        }
    }

    /// `G = Σ p(λ…) Π λ` over the used slots.
    pub fn exact_g(&self, slots: &[Slot], rho_b: &Operator) -> Result<f64> {
        let probs = self.joint_probabilities(slots, rho_b)?;
        Ok(probs
            .iter()
            .map(|(o, p)| p * o.iter().map(|&l| l as f64).product::<f64>())
            .sum())
    }

    /// Exact `G` of a streaming plan: the outcome product over the used
    /// offsets of each window, averaged over windows. Earlier windows enter
    /// through the unconditional channel.
    pub fn streaming_exact_g(&self, plan: &SlotPlan, rho_b: &Operator) -> Result<f64> {
        self.check_state(rho_b)?;
        let pairs = plan
            .slots()
            .iter()
            .map(|s| self.kraus_pair(&s.config))
            .collect::<Result<Vec<_>>>()?;
        let averaged: Vec<BathMap> = pairs.iter().map(KrausPair::average).collect();
        let w = plan.window();
        let mut state = rho_b.matrix().clone();
        let mut total = 0.0;
        for start in (0..plan.len()).step_by(w) {
            let mut x = state.clone();
            for k in start..start + w {
                x = if plan.slots()[k].used {
                    pairs[k].signed().apply(&x)
                } else {
                    averaged[k].apply(&x)
                };
            }
            total += x.trace().re;
            for map in &averaged[start..start + w] {
                state = map.apply(&state);
            }
        }
        Ok(total / plan.num_windows() as f64)
    }

    /// Trace distance `½‖Σ_λ M_λ ρ − ρ‖₁`.
    pub fn decoherence_norm(&self, config: &MeasurementConfig, rho_b: &Operator) -> Result<f64> {
        self.check_state(rho_b)?;
        let after = self.kraus_pair(config)?.average().apply(rho_b.matrix());
        let diff = rho_b.with_matrix(after - rho_b.matrix());
        Ok(0.5 * diff.trace_norm(1e-8)?)
    }
}
