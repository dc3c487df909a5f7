//! Flat CSV and structured JSON forms of a [`CorrelationTensor`].
//!
//! CSV columns: `N, axes, signs, t1 … tK, value, source, stderr`, where `K`
//! is the largest order present and unused time cells are blank. Axis and
//! sign strings are earliest-first.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{CorrelationIndex, CorrelationTensor, CorrelationValue, Source};
use crate::error::{Error, Result};
use crate::operator::SuperSign;
use crate::spin::Axis;

fn parse_axes(s: &str) -> Result<Vec<Axis>> {
    s.chars()
        .map(|c| Axis::try_from(c).map_err(|_| Error::Format(format!("bad axis `{c}` in `{s}`"))))
        .collect()
}

fn parse_signs(s: &str) -> Result<Vec<SuperSign>> {
    s.chars()
        .map(|c| {
            SuperSign::from_char(c).ok_or_else(|| Error::Format(format!("bad sign `{c}` in `{s}`")))
        })
        .collect()
}

fn parse_source(s: &str) -> Result<Source> {
    match s {
        "exact" => Ok(Source::Exact),
        "reconstructed" => Ok(Source::Reconstructed),
        other => Err(Error::Format(format!("unknown source `{other}`"))),
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("not a number: `{s}`")))
}

pub fn write_csv<W: Write>(tensor: &CorrelationTensor, out: W) -> Result<()> {
    let k = tensor.max_order();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["N".to_string(), "axes".into(), "signs".into()];
    header.extend((1..=k).map(|i| format!("t{i}")));
    header.extend(["value".into(), "source".into(), "stderr".into()]);
    w.write_record(&header)?;
    for (idx, v) in tensor.iter() {
        let mut row = vec![
            idx.order().to_string(),
            idx.axes_string(),
            idx.signs_string(),
        ];
        let times = idx.times();
        row.extend((0..k).map(|i| times.get(i).map(|t| t.to_string()).unwrap_or_default()));
        row.extend([
            v.value.to_string(),
            v.source.as_str().into(),
            v.stderr.to_string(),
        ]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<CorrelationTensor> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let k = header.len().checked_sub(6).ok_or_else(|| {
        Error::Format(format!(
            "correlation CSV needs at least 6 columns, got {}",
            header.len()
        ))
    })?;
    let mut tensor = CorrelationTensor::new();
    for row in r.records() {
        let row = row?;
        let n: usize = row[0]
            .parse()
            .map_err(|_| Error::Format(format!("bad order `{}`", &row[0])))?;
        if n == 0 || n > k {
            return Err(Error::Format(format!("order {n} outside 1..={k}")));
        }
        let axes = parse_axes(&row[1])?;
        let signs = parse_signs(&row[2])?;
        let times = (0..n)
            .map(|i| parse_f64(&row[3 + i]))
            .collect::<Result<Vec<_>>>()?;
        let idx = CorrelationIndex::from_parts(&axes, &signs, &times)?;
        let value = CorrelationValue {
            value: parse_f64(&row[3 + k])?,
            source: parse_source(&row[4 + k])?,
            stderr: parse_f64(&row[5 + k])?,
        };
        tensor.insert(idx, value);
    }
    Ok(tensor)
}

#[derive(Serialize, Deserialize)]
struct JsonEntry {
    order: usize,
    axes: String,
    signs: String,
    times: Vec<f64>,
    value: f64,
    source: Source,
    stderr: f64,
}

#[derive(Serialize, Deserialize)]
struct JsonTensor {
    entries: Vec<JsonEntry>,
}

pub fn write_json<W: Write>(tensor: &CorrelationTensor, out: W) -> Result<()> {
    let doc = JsonTensor {
        entries: tensor
            .iter()
            .map(|(idx, v)| JsonEntry {
                order: idx.order(),
                axes: idx.axes_string(),
                signs: idx.signs_string(),
                times: idx.times(),
                value: v.value,
                source: v.source,
                stderr: v.stderr,
            })
            .collect(),
    };
    serde_json::to_writer_pretty(out, &doc)?;
    Ok(())
}

pub fn read_json<R: Read>(input: R) -> Result<CorrelationTensor> {
    let doc: JsonTensor = serde_json::from_reader(input)?;
    let mut tensor = CorrelationTensor::new();
    for e in doc.entries {
        if e.order != e.times.len() {
            return Err(Error::Format(format!(
                "order {} with {} times",
                e.order,
                e.times.len()
            )));
        }
        let idx =
            CorrelationIndex::from_parts(&parse_axes(&e.axes)?, &parse_signs(&e.signs)?, &e.times)?;
        tensor.insert(
            idx,
            CorrelationValue {
                value: e.value,
                source: e.source,
                stderr: e.stderr,
            },
        );
    }
    Ok(tensor)
}
