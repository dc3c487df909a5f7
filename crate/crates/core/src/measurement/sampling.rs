use num_complex::Complex64 as C64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use super::{BathMap, ChannelMode, KrausPair, MeasurementModel, MeasurementRecord, SlotPlan};
use crate::error::{Error, Result};
use crate::operator::{Matrix, Operator};

/// Allowed accumulated `|p₊ + p₋ − 1|` per block of slots.
const DRIFT_TOL: f64 = 1e-8;
const DRIFT_BLOCK: usize = 1000;

/// Uniform draw in `[0, 1)` for `slot` on a generator whose stream is the
/// shot index. The word position is pinned to the slot, so the draw is keyed
/// by `(seed, shot, slot)` alone.
fn draw(rng: &mut ChaCha8Rng, slot: usize) -> f64 {
    rng.set_word_pos(2 * slot as u128);
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

struct Trajectory<'p> {
    pairs: &'p [KrausPair],
    averaged: &'p [BathMap],
    used: Vec<bool>,
    mode: ChannelMode,
}

impl Trajectory<'_> {
    fn run(&self, base: &ChaCha8Rng, shot: u64, rho: &Matrix, row: &mut [u8]) -> Result<()> {
        let mut state = rho.clone();
        let mut drift = 0.0;
        let mut rng = base.clone();
        rng.set_stream(shot);
        for (k, pair) in self.pairs.iter().enumerate() {
            if k > 0 && k % DRIFT_BLOCK == 0 {
                self.check_drift(drift, k)?;
                drift = 0.0;
            }
            if !self.used[k] {
                state = self.averaged[k].apply(&state);
                let tr = state.trace().re;
                drift += (tr - 1.0).abs();
                state = normalize(state, tr);
                row[k / 8] |= 1 << (k % 8);
                continue;
            }
            let mut p_plus = pair.plus.trace_of(&state).re;
            let mut p_minus = pair.minus.trace_of(&state).re;
            drift += (p_plus + p_minus - 1.0).abs();
            if self.mode == ChannelMode::FirstOrder && (p_plus < 0.0 || p_minus < 0.0) {
                log::warn!("first-order branch probability clamped at slot {k}");
                p_plus = p_plus.max(0.0);
                p_minus = p_minus.max(0.0);
            }
            let total = p_plus + p_minus;
            if !(total > 0.0) || p_plus < -1e-12 || p_minus < -1e-12 {
                return Err(Error::ZeroProbability {
                    slot: k,
                    p_plus,
                    p_minus,
                });
            }
            let u = draw(&mut rng, k);
            let (lambda, p) = if u < p_plus / total {
                (1i8, p_plus)
            } else {
                (-1i8, p_minus)
            };
            if !(p > 0.0) {
                return Err(Error::ZeroProbability {
                    slot: k,
                    p_plus,
                    p_minus,
                });
            }
            if lambda > 0 {
                row[k / 8] |= 1 << (k % 8);
            }
            state = normalize(pair.outcome(lambda).apply(&state), p);
        }
        self.check_drift(drift, self.pairs.len())
    }

    fn check_drift(&self, drift: f64, slot: usize) -> Result<()> {
        if drift > DRIFT_TOL {
            return Err(Error::Numerical(format!(
                "conditioned-state trace drift {drift:.3e} over the block ending at slot {slot}"
            )));
        }
        Ok(())
    }
}

fn normalize(state: Matrix, p: f64) -> Matrix {
    let s = &state * C64::new(0.5 / p, 0.0);
    &s + s.adjoint()
}

impl MeasurementModel<'_> {
    /// Samples `shots` outcome sequences over `plan`.
    ///
    /// Every shot starts from `rho_b`. For a unit plan a shot is one
    /// repetition of the sequence; for a streaming plan a shot is one long
    /// conditioned trajectory. Draws are keyed by `(seed, shot, slot)`, so the
    /// record does not depend on the thread count.
    pub fn sample_records(
        &self,
        plan: &SlotPlan,
        rho_b: &Operator,
        shots: usize,
        seed: u64,
    ) -> Result<MeasurementRecord> {
        self.check_state(rho_b)?;
        if shots == 0 {
            return Err(Error::InvalidConfig("shots must be >= 1".into()));
        }
        let pairs = plan
            .slots()
            .iter()
            .map(|s| self.kraus_pair(&s.config))
            .collect::<Result<Vec<_>>>()?;
        let averaged: Vec<BathMap> = pairs.iter().map(KrausPair::average).collect();
        let traj = Trajectory {
            pairs: &pairs,
            averaged: &averaged,
            used: plan.slots().iter().map(|s| s.used).collect(),
            mode: self.mode,
        };
        let base = ChaCha8Rng::seed_from_u64(seed);
        let rb = MeasurementRecord::row_bytes(plan.len());
        let mut bits = vec![0u8; shots * rb];
        let rho = rho_b.matrix();
        bits.par_chunks_mut(rb)
            .enumerate()
            .try_for_each(|(shot, row)| traj.run(&base, shot as u64, rho, row))?;
        Ok(MeasurementRecord::from_packed(
            plan, seed, self.mode, shots, bits,
        ))
    }
}
