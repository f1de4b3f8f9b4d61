//! Text file formats.
//!
//! * parameter files: a `# ansatz n_qubits=… n_layers=… input=…` header
//!   line followed by one angle (radians) per line;
//! * two-column tab-separated tables, sorted by outcome index:
//!   `bitstring<TAB>probability` for distributions and
//!   `bitstring<TAB>count` for sample sets and datasets;
//! * training histories as comma-separated values with a header row.
//!
//! Floats are written in Rust's shortest round-trip form, so every file
//! parses back to bit-identical values. Lines starting with `#` in tables
//! are comments.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context};

use crate::ansatz::{InputKind, LayeredAnsatz, ParamVector};
use crate::datasets::Dataset;
use crate::mle::{IterationRecord, TrainHistory};
use crate::qgan::{QganHistory, QganRecord};
use crate::sampling::{Distribution, SampleSet};
use crate::statevector::BitString;

pub type Result<T> = anyhow::Result<T>;

const PARAM_HEADER: &str = "# ansatz";

pub fn ansatz_descriptor(ansatz: &LayeredAnsatz) -> String {
    format!(
        "n_qubits={} n_layers={} input={}",
        ansatz.n_qubits(),
        ansatz.n_layers(),
        ansatz.input()
    )
}

pub fn parse_ansatz_descriptor(s: &str) -> Result<LayeredAnsatz> {
    let (mut n_qubits, mut n_layers, mut input) = (None, None, InputKind::Zero);
    for field in s.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| anyhow!("malformed descriptor field {field:?}"))?;
        match k {
            "n_qubits" => n_qubits = Some(v.parse::<usize>()?),
            "n_layers" => n_layers = Some(v.parse::<usize>()?),
            "input" => input = v.parse()?,
            other => bail!("unknown descriptor key {other:?}"),
        }
    }
    Ok(LayeredAnsatz::new(
        n_qubits.ok_or_else(|| anyhow!("descriptor lacks n_qubits"))?,
        n_layers.ok_or_else(|| anyhow!("descriptor lacks n_layers"))?,
        input,
    )?)
}

pub fn format_params(ansatz: &LayeredAnsatz, params: &[f64]) -> String {
    let mut out = format!("{PARAM_HEADER} {}\n", ansatz_descriptor(ansatz));
    for p in params {
        out.push_str(&format!("{p}\n"));
    }
    out
}

pub fn parse_params(text: &str) -> Result<(LayeredAnsatz, ParamVector)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| anyhow!("empty parameter file"))?;
    let desc = header
        .strip_prefix(PARAM_HEADER)
        .ok_or_else(|| anyhow!("parameter file must start with {PARAM_HEADER:?}"))?;
    let ansatz = parse_ansatz_descriptor(desc)?;
    let values = lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            let v: f64 = l.trim().parse().with_context(|| format!("parameter line {}", i + 2))?;
            if !v.is_finite() {
                bail!("non-finite parameter on line {}", i + 2);
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    ansatz.check_params(&values)?;
    Ok((ansatz, ParamVector(values)))
}

pub fn write_params(path: &Path, ansatz: &LayeredAnsatz, params: &[f64]) -> Result<()> {
    fs::write(path, format_params(ansatz, params)).with_context(|| format!("writing {}", path.display()))
}

pub fn read_params(path: &Path) -> Result<(LayeredAnsatz, ParamVector)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_params(&text).with_context(|| format!("parsing {}", path.display()))
}

fn tsv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?)
}

fn tsv_rows(text: &str) -> Result<Vec<(BitString, String)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != 2 {
            bail!("expected two columns, got {}", rec.len());
        }
        rows.push((rec[0].parse()?, rec[1].to_string()));
    }
    Ok(rows)
}

fn table_width(rows: &[(BitString, String)]) -> Result<usize> {
    let n = rows.first().ok_or_else(|| anyhow!("empty table"))?.0.n_bits();
    if rows.iter().any(|(x, _)| x.n_bits() != n) {
        bail!("bitstrings of different lengths in one table");
    }
    Ok(n)
}

/// Every outcome, in index order.
pub fn format_distribution(dist: &Distribution) -> Result<String> {
    let mut w = tsv_writer();
    for (i, p) in dist.probs().iter().enumerate() {
        w.write_record([BitString::new(dist.n_bits(), i)?.to_string(), p.to_string()])?;
    }
    finish(w)
}

/// Unlisted outcomes have probability zero.
pub fn parse_distribution(text: &str) -> Result<Distribution> {
    let rows = tsv_rows(text)?;
    let n = table_width(&rows)?;
    let mut probs = vec![0.0; 1 << n];
    for (x, v) in rows {
        probs[x.index()] = v.parse().with_context(|| format!("probability for {x}"))?;
    }
    Ok(Distribution::new(n, probs)?)
}

/// Every outcome, in index order, zero counts included.
pub fn format_samples(samples: &SampleSet) -> Result<String> {
    let mut w = tsv_writer();
    for i in 0..1usize << samples.n_bits() {
        w.write_record([
            BitString::new(samples.n_bits(), i)?.to_string(),
            samples.count(i).to_string(),
        ])?;
    }
    finish(w)
}

pub fn parse_samples(text: &str) -> Result<SampleSet> {
    let rows = tsv_rows(text)?;
    let mut set = SampleSet::new(table_width(&rows)?)?;
    for (x, v) in rows {
        set.add(&x, v.parse().with_context(|| format!("count for {x}"))?)?;
    }
    Ok(set)
}

pub fn parse_dataset(text: &str) -> Result<Dataset> {
    Ok(Dataset::from_counts(&parse_samples(text)?)?)
}

const MLE_COLUMNS: [&str; 4] = ["iteration", "loss", "grad_norm", "clipped"];

/// MLE history; the `time_ms` column is only written when `with_time`.
pub fn format_mle_history(history: &TrainHistory, with_time: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = MLE_COLUMNS.to_vec();
    if with_time {
        header.push("time_ms");
    }
    w.write_record(&header)?;
    for r in &history.records {
        let mut row = vec![
            r.iteration.to_string(),
            r.loss.to_string(),
            r.grad_norm.to_string(),
            r.clipped.to_string(),
        ];
        if with_time {
            row.push(format!("{:.3}", r.time_ms));
        }
        w.write_record(&row)?;
    }
    finish(w)
}

pub fn parse_mle_history(text: &str) -> Result<Vec<IterationRecord>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    if headers.iter().take(4).ne(MLE_COLUMNS) {
        bail!("unexpected history header {headers:?}");
    }
    let timed = headers.get(4) == Some("time_ms");
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            Ok(IterationRecord {
                iteration: rec[0].parse()?,
                loss: rec[1].parse()?,
                grad_norm: rec[2].parse()?,
                clipped: rec[3].parse()?,
                time_ms: if timed { rec[4].parse()? } else { 0.0 },
            })
        })
        .collect()
}

const QGAN_COLUMNS: [&str; 6] = ["iteration", "d_loss", "g_loss", "js", "kl", "tv"];

pub fn format_qgan_history(history: &QganHistory) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(QGAN_COLUMNS)?;
    for r in &history.records {
        w.write_record([
            r.iteration.to_string(),
            r.d_loss.to_string(),
            r.g_loss.to_string(),
            r.js.to_string(),
            r.kl.to_string(),
            r.tv.to_string(),
        ])?;
    }
    finish(w)
}

pub fn parse_qgan_history(text: &str) -> Result<QganHistory> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    if rdr.headers()?.iter().ne(QGAN_COLUMNS) {
        bail!("unexpected QGAN history header");
    }
    let records = rdr
        .records()
        .map(|rec| {
            let rec = rec?;
            Ok(QganRecord {
                iteration: rec[0].parse()?,
                d_loss: rec[1].parse()?,
                g_loss: rec[2].parse()?,
                js: rec[3].parse()?,
                kl: rec[4].parse()?,
                tv: rec[5].parse()?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(QganHistory { records })
}
