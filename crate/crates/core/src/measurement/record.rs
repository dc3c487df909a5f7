//! Measurement records and their binary / CSV forms.
//!
//! Binary layout (little endian):
//!
//! ```text
//! magic    6 bytes  "QBREC" 0x01
//! seed     u64
//! mode     u8       0 first_order, 1 exact_unitary
//! protocol u8       0 unit, 1 streaming
//! schedule u64      plan digest
//! shots    u64
//! slots    u32
//! per slot: config id u32, used u8
//! outcome bits, row-major per shot, LSB first, 1 = +1, each row padded to a byte
//! ```

use std::io::{Read, Write};

use super::{ChannelMode, Protocol, SlotPlan};
use crate::error::{Error, Result};

const MAGIC: &[u8; 6] = b"QBREC\x01";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlotMeta {
    pub config_id: u32,
    pub used: bool,
}

/// `shots × slots` outcomes `±1`. Idle slots hold `+1` placeholders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementRecord {
    pub seed: u64,
    pub mode: ChannelMode,
    pub protocol: Protocol,
    pub schedule_hash: u64,
    slots: Vec<SlotMeta>,
    shots: usize,
    bits: Vec<u8>,
}

impl MeasurementRecord {
    pub(crate) fn row_bytes(slots: usize) -> usize {
        slots.div_ceil(8)
    }

    /// Builds a record from already packed rows.
    pub(crate) fn from_packed(
        plan: &SlotPlan,
        seed: u64,
        mode: ChannelMode,
        shots: usize,
        bits: Vec<u8>,
    ) -> Self {
        debug_assert_eq!(bits.len(), shots * Self::row_bytes(plan.len()));
        MeasurementRecord {
            seed,
            mode,
            protocol: plan.protocol(),
            schedule_hash: plan.hash(),
            slots: plan
                .slots()
                .iter()
                .map(|s| SlotMeta {
                    config_id: s.config_id,
                    used: s.used,
                })
                .collect(),
            shots,
            bits,
        }
    }

    /// Builds a record from explicit `±1` rows.
    pub fn from_rows(
        plan: &SlotPlan,
        seed: u64,
        mode: ChannelMode,
        rows: &[Vec<i8>],
    ) -> Result<Self> {
        let rb = Self::row_bytes(plan.len());
        let mut bits = vec![0u8; rows.len() * rb];
        for (s, row) in rows.iter().enumerate() {
            if row.len() != plan.len() {
                return Err(Error::Format(format!(
                    "row {s} has {} outcomes for {} slots",
                    row.len(),
                    plan.len()
                )));
            }
            for (k, &l) in row.iter().enumerate() {
                match l {
                    1 => bits[s * rb + k / 8] |= 1 << (k % 8),
                    -1 => {}
                    other => return Err(Error::Format(format!("outcome {other} is not ±1"))),
                }
            }
        }
        Ok(Self::from_packed(plan, seed, mode, rows.len(), bits))
    }

    pub fn shots(&self) -> usize {
        self.shots
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[SlotMeta] {
        &self.slots
    }

    pub fn outcome(&self, shot: usize, slot: usize) -> i8 {
        let rb = Self::row_bytes(self.slots.len());
        if self.bits[shot * rb + slot / 8] >> (slot % 8) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    /// Checks that the record was produced from `plan`.
    pub fn check_plan(&self, plan: &SlotPlan) -> Result<()> {
        if plan.hash() != self.schedule_hash || plan.len() != self.slots.len() {
            return Err(Error::SubsetMismatch(format!(
                "record schedule {:016x} does not match plan {:016x}",
                self.schedule_hash,
                plan.hash()
            )));
        }
        Ok(())
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&[self.mode.code(), self.protocol.code()])?;
        w.write_all(&self.schedule_hash.to_le_bytes())?;
        w.write_all(&(self.shots as u64).to_le_bytes())?;
        w.write_all(&(self.slots.len() as u32).to_le_bytes())?;
        for s in &self.slots {
            w.write_all(&s.config_id.to_le_bytes())?;
            w.write_all(&[s.used as u8])?;
        }
        w.write_all(&self.bits)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
            let mut b = [0u8; N];
            r.read_exact(&mut b)
                .map_err(|e| Error::Format(format!("truncated record: {e}")))?;
            Ok(b)
        }
        if &take::<6, _>(&mut r)? != MAGIC {
            return Err(Error::Format("not a measurement record (bad magic)".into()));
        }
        let seed = u64::from_le_bytes(take(&mut r)?);
        let [mode, protocol] = take::<2, _>(&mut r)?;
        let mode = ChannelMode::from_code(mode)
            .ok_or_else(|| Error::Format(format!("unknown channel mode {mode}")))?;
        let protocol = Protocol::from_code(protocol)
            .ok_or_else(|| Error::Format(format!("unknown protocol {protocol}")))?;
        let schedule_hash = u64::from_le_bytes(take(&mut r)?);
        let shots = u64::from_le_bytes(take(&mut r)?) as usize;
        let n = u32::from_le_bytes(take(&mut r)?) as usize;
        let mut slots = Vec::with_capacity(n);
        for _ in 0..n {
            let config_id = u32::from_le_bytes(take(&mut r)?);
            let [used] = take::<1, _>(&mut r)?;
            slots.push(SlotMeta {
                config_id,
                used: used != 0,
            });
        }
        let mut bits = vec![0u8; shots * Self::row_bytes(n)];
        r.read_exact(&mut bits)
            .map_err(|e| Error::Format(format!("truncated outcome block: {e}")))?;
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Format("trailing bytes after outcome block".into()));
        }
        Ok(MeasurementRecord {
            seed,
            mode,
            protocol,
            schedule_hash,
            slots,
            shots,
            bits,
        })
    }

    /// Wide CSV: `shot, s0, s1, …`; idle columns carry an `_idle` suffix and
    /// blank cells.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        let mut header = vec!["shot".to_string()];
        header.extend(self.slots.iter().enumerate().map(|(k, s)| {
            if s.used {
                format!("s{k}")
            } else {
                format!("s{k}_idle")
            }
        }));
        w.write_record(&header)?;
        for shot in 0..self.shots {
            let mut row = vec![shot.to_string()];
            row.extend(self.slots.iter().enumerate().map(|(k, s)| {
                if s.used {
                    self.outcome(shot, k).to_string()
                } else {
                    String::new()
                }
            }));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
