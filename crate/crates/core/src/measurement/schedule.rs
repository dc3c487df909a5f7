use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::MeasurementConfig;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Independent repetitions of a short sequence, bath reset each shot.
    Unit,
    /// One long equally spaced sequence per trajectory, no resets.
    Streaming,
}

impl Protocol {
    pub(crate) fn code(self) -> u8 {
        match self {
            Protocol::Unit => 0,
            Protocol::Streaming => 1,
        }
    }

    pub(crate) fn from_code(c: u8) -> Option<Protocol> {
        match c {
            0 => Some(Protocol::Unit),
            1 => Some(Protocol::Streaming),
            _ => None,
        }
    }
}

/// A measurement slot. Idle slots act as the averaged channel `Σ_λ M_λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Slot {
    pub config: MeasurementConfig,
    pub config_id: u32,
    pub used: bool,
}

/// One position of a streaming pattern.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternEntry {
    pub prep: [f64; 3],
    pub measure: [f64; 3],
    pub used: bool,
}

/// Equally spaced schedule `t_k = kτ`, `k = 1…num_slots`, cycling through
/// `pattern`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub tau: f64,
    pub delta_t: f64,
    pub num_slots: usize,
    pub pattern: Vec<PatternEntry>,
}

/// Ordered slots plus the window length used to cut trajectories into
/// repetitions (the whole plan for unit sequences, the pattern period for
/// streaming).
#[derive(Clone, Debug, PartialEq)]
pub struct SlotPlan {
    protocol: Protocol,
    slots: Vec<Slot>,
    window: usize,
}

fn check_increasing(slots: &[Slot]) -> Result<()> {
    if slots
        .windows(2)
        .any(|w| !(w[0].config.time < w[1].config.time))
    {
        return Err(Error::UnsortedTimes(
            slots.iter().map(|s| s.config.time).collect(),
        ));
    }
    Ok(())
}

impl SlotPlan {
    /// A unit sequence: every config is a used slot with id equal to its position.
    pub fn unit(configs: Vec<MeasurementConfig>) -> Result<Self> {
        if configs.is_empty() {
            return Err(Error::InvalidSchedule("no measurement slots".into()));
        }
        let slots: Vec<Slot> = configs
            .into_iter()
            .enumerate()
            .map(|(i, config)| Slot {
                config,
                config_id: i as u32,
                used: true,
            })
            .collect();
        check_increasing(&slots)?;
        let window = slots.len();
        Ok(SlotPlan {
            protocol: Protocol::Unit,
            slots,
            window,
        })
    }

    /// A unit sequence with explicit used/idle marks.
    pub fn unit_with_idle(slots: Vec<Slot>) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::InvalidSchedule("no measurement slots".into()));
        }
        check_increasing(&slots)?;
        let window = slots.len();
        Ok(SlotPlan {
            protocol: Protocol::Unit,
            slots,
            window,
        })
    }

    pub fn streaming(spec: &ScheduleSpec) -> Result<Self> {
        if !(spec.tau > 0.0) || !spec.tau.is_finite() {
            return Err(Error::InvalidSchedule(format!(
                "spacing τ = {} must be positive",
                spec.tau
            )));
        }
        if spec.tau < spec.delta_t {
            return Err(Error::InvalidSchedule(format!(
                "spacing τ = {} is shorter than the window δt = {}",
                spec.tau, spec.delta_t
            )));
        }
        if spec.pattern.is_empty() {
            return Err(Error::InvalidSchedule("empty slot pattern".into()));
        }
        if spec.num_slots == 0 || !spec.num_slots.is_multiple_of(spec.pattern.len()) {
            return Err(Error::InvalidSchedule(format!(
                "num_slots = {} must be a positive multiple of the pattern length {}",
                spec.num_slots,
                spec.pattern.len()
            )));
        }
        if !spec.pattern.iter().any(|p| p.used) {
            return Err(Error::InvalidSchedule("pattern has no used slot".into()));
        }
        let period = spec.pattern.len();
        let slots = (0..spec.num_slots)
            .map(|k| {
                let entry = &spec.pattern[k % period];
                Ok(Slot {
                    config: MeasurementConfig::new(
                        (k + 1) as f64 * spec.tau,
                        entry.prep,
                        entry.measure,
                        spec.delta_t,
                    )?,
                    config_id: (k % period) as u32,
                    used: entry.used,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SlotPlan {
            protocol: Protocol::Streaming,
            slots,
            window: period,
        })
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn num_windows(&self) -> usize {
        self.slots.len() / self.window
    }

    /// Positions of used slots within one window.
    pub fn used_offsets(&self) -> Vec<usize> {
        (0..self.window).filter(|&k| self.slots[k].used).collect()
    }

    /// Stable 64-bit digest of the plan (first 8 bytes of a SHA-256).
    pub fn hash(&self) -> u64 {
        let mut h = Sha256::new();
        h.update([self.protocol.code()]);
        h.update((self.window as u64).to_le_bytes());
        for s in &self.slots {
            let c = &s.config;
            h.update(c.time.to_le_bytes());
            for v in c.prep.iter().chain(&c.measure) {
                h.update(v.to_le_bytes());
            }
            h.update(c.delta_t.to_le_bytes());
            h.update(s.config_id.to_le_bytes());
            h.update([s.used as u8]);
        }
        let digest = h.finalize();
        u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
    }
}
