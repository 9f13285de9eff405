//! Text file formats: the dataset CSV, JSON gallery snapshots, JSON reports
//! and the per-step curve CSV.
//!
//! Reals are written in the shortest decimal form that parses back to the same
//! bits, so every save/load cycle is exact.
//!
//! Dataset CSV:
//!
//! ```text
//! #dim=2,count=2
//! img1,A,1,0
//! img2,B,0.6,0.8
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedding::{Embedding, IdentityLabel, LabeledEmbedding};
use crate::error::{Error, Result};
use crate::gallery::{Gallery, GalleryEntry};
use crate::protocol::EvalReport;

pub const SNAPSHOT_FORMAT_VERSION: u32 = 1;

/// Rows whose raw norm is further than this from 1 are reported on load.
pub const NORM_WARNING_TOLERANCE: f64 = 1e-3;

/// A parsed dataset file.
#[derive(Clone, Debug)]
pub struct DatasetFile {
    pub dim: usize,
    pub items: Vec<LabeledEmbedding>,
    /// Line numbers of rows that needed noticeable renormalization.
    pub norm_warnings: Vec<usize>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| parse_err(1, "expected header `#dim=<d>,count=<n>`"))?;
    let (mut dim, mut count) = (None, None);
    for field in body.split(',') {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| parse_err(1, format!("malformed header field {field:?}")))?;
        let value: usize = value
            .trim()
            .parse()
            .map_err(|_| parse_err(1, format!("header {key} is not an integer")))?;
        match key.trim() {
            "dim" => dim = Some(value),
            "count" => count = Some(value),
            other => return Err(parse_err(1, format!("unknown header field {other:?}"))),
        }
    }
    match (dim, count) {
        (Some(0), _) => Err(parse_err(1, "dim must be positive")),
        (Some(d), Some(n)) => Ok((d, n)),
        _ => Err(parse_err(1, "header needs both dim and count")),
    }
}

/// Parses a dataset from any reader. Vectors are normalized.
pub fn read_dataset(reader: impl BufRead) -> Result<DatasetFile> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file"))?
        .map_err(|e| parse_err(1, e.to_string()))?;
    let (dim, count) = parse_header(header.trim_end_matches('\r'))?;

    let mut items = Vec::with_capacity(count);
    let mut norm_warnings = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let source_id = fields.next().unwrap_or_default();
        let label = fields
            .next()
            .ok_or_else(|| parse_err(lineno, "missing label"))?;
        let label = IdentityLabel::new(label).map_err(|e| parse_err(lineno, e.to_string()))?;
        let values = fields
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| parse_err(lineno, format!("not a number: {v:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != dim {
            return Err(parse_err(
                lineno,
                format!("expected {dim} values, found {}", values.len()),
            ));
        }
        let norm = values.iter().map(|x| x * x).sum::<f64>().sqrt();
        let embedding = Embedding::normalize(&values).map_err(|e| match e {
            Error::ZeroVector => Error::ZeroVector,
            other => parse_err(lineno, other.to_string()),
        })?;
        if (norm - 1.0).abs() > NORM_WARNING_TOLERANCE {
            log::warn!("line {lineno}: vector norm {norm} renormalized to 1");
            norm_warnings.push(lineno);
        }
        items.push(LabeledEmbedding::new(embedding, label, source_id));
    }
    if items.len() != count {
        return Err(parse_err(
            1,
            format!("header declares {count} rows, found {}", items.len()),
        ));
    }
    Ok(DatasetFile {
        dim,
        items,
        norm_warnings,
    })
}

pub fn load_dataset_file(path: impl AsRef<Path>) -> Result<DatasetFile> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(BufReader::new(file))
}

/// Loads a dataset, preserving row order.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<LabeledEmbedding>> {
    load_dataset_file(path).map(|d| d.items)
}

fn check_field(kind: &str, value: &str) -> Result<()> {
    if value.contains([',', '\n', '\r']) {
        return Err(Error::InvalidConfig(format!(
            "{kind} {value:?} cannot be written to CSV (contains a separator)"
        )));
    }
    Ok(())
}

pub fn write_dataset(mut w: impl Write, items: &[LabeledEmbedding]) -> Result<()> {
    let dim = crate::embedding::common_dim(items)?;
    let io = |e| Error::io("<dataset>", e);
    writeln!(w, "#dim={dim},count={}", items.len()).map_err(io)?;
    for item in items {
        check_field("source id", &item.source_id)?;
        check_field("label", item.label.as_str())?;
        write!(w, "{},{}", item.source_id, item.label).map_err(io)?;
        for v in item.embedding.values() {
            write!(w, ",{v}").map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    Ok(())
}

pub fn save_dataset(path: impl AsRef<Path>, items: &[LabeledEmbedding]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_dataset(&mut w, items)?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotEntry {
    reg_index: usize,
    source_id: String,
    label: IdentityLabel,
    vector: Vec<f64>,
    threshold: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct GallerySnapshot {
    format_version: u32,
    dim: Option<usize>,
    initial_threshold: f64,
    entries: Vec<SnapshotEntry>,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

pub fn gallery_to_json(gallery: &Gallery) -> Result<String> {
    let snapshot = GallerySnapshot {
        format_version: SNAPSHOT_FORMAT_VERSION,
        dim: gallery.dim(),
        initial_threshold: gallery.initial_threshold(),
        entries: gallery
            .entries()
            .iter()
            .map(|e| SnapshotEntry {
                reg_index: e.reg_index,
                source_id: e.source_id.clone(),
                label: e.label.clone(),
                vector: e.embedding.values().to_vec(),
                threshold: e.threshold,
            })
            .collect(),
    };
    let mut json = serde_json::to_string_pretty(&snapshot)?;
    json.push('\n');
    Ok(json)
}

/// Restores a gallery. Thresholds are taken as stored, not recomputed.
pub fn gallery_from_json(json: &str) -> Result<Gallery> {
    let probe: VersionProbe = serde_json::from_str(json)?;
    if probe.format_version != SNAPSHOT_FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            expected: SNAPSHOT_FORMAT_VERSION,
            found: probe.format_version,
        });
    }
    let snapshot: GallerySnapshot = serde_json::from_str(json)?;
    let entries = snapshot
        .entries
        .into_iter()
        .map(|e| {
            Ok(GalleryEntry {
                embedding: Embedding::from_unit(e.vector)
                    .map_err(|err| Error::InvalidSnapshot(format!("entry {}: {err}", e.reg_index)))?,
                label: e.label,
                source_id: e.source_id,
                threshold: e.threshold,
                reg_index: e.reg_index,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Gallery::from_parts(snapshot.initial_threshold, snapshot.dim, entries)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn save_gallery(path: impl AsRef<Path>, gallery: &Gallery) -> Result<()> {
    write_text(path.as_ref(), &gallery_to_json(gallery)?)
}

pub fn load_gallery(path: impl AsRef<Path>) -> Result<Gallery> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    gallery_from_json(&text)
}

/// Writes any report type as pretty JSON with a trailing newline.
pub fn save_report<T: Serialize>(path: impl AsRef<Path>, report: &T) -> Result<()> {
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    write_text(path.as_ref(), &json)
}

/// `step,temporary_accuracy,outcome`, one row per probe.
pub fn write_curve_csv(mut w: impl Write, report: &EvalReport) -> Result<()> {
    let io = |e| Error::io("<curve>", e);
    writeln!(w, "step,temporary_accuracy,outcome").map_err(io)?;
    for (o, acc) in report.outcomes.iter().zip(&report.temporary_accuracy) {
        let kind = serde_json::to_value(o.kind)?;
        writeln!(w, "{},{},{}", o.step, acc, kind.as_str().unwrap_or_default()).map_err(io)?;
    }
    Ok(())
}

pub fn save_curve(path: impl AsRef<Path>, report: &EvalReport) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_curve_csv(&mut w, report)?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::ThresholdPolicy;
    use crate::protocol::run_protocol;

    fn parse(text: &str) -> Result<DatasetFile> {
        read_dataset(text.as_bytes())
    }

    #[test]
    fn reads_single_row() {
        let d = parse("#dim=2,count=1\nimg1,A,1.0,0.0\n").unwrap();
        assert_eq!(d.items.len(), 1);
        assert_eq!(d.items[0].embedding.values(), &[1.0, 0.0]);
        assert_eq!(d.items[0].label.as_str(), "A");
        assert_eq!(d.items[0].source_id, "img1");
        assert!(d.norm_warnings.is_empty());
    }

    #[test]
    fn wrong_arity_reports_line() {
        let err = parse("#dim=2,count=2\nimg1,A,1.0,0.0\nimg2,B,1,2,3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn renormalizes_with_warning() {
        let d = parse("#dim=2,count=1\nimg2,B,3.0,4.0\n").unwrap();
        let v = d.items[0].embedding.values();
        assert!((v[0] - 0.6).abs() < 1e-15 && (v[1] - 0.8).abs() < 1e-15);
        assert_eq!(d.norm_warnings, vec![2]);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse(""), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("dim=2,count=1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("#dim=2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("#dim=2,count=2\na,A,1,0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("#dim=2,count=1\na,A,x,0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("#dim=2,count=1\na,,1,0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("#dim=2,count=1\na,A,0,0\n"), Err(Error::ZeroVector)));
        assert!(matches!(parse("#dim=2,count=1\na,A,NaN,0\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn writer_rejects_separators() {
        let item = LabeledEmbedding::from_raw(&[1.0, 0.0], "A,B", "x").unwrap();
        assert!(write_dataset(Vec::new(), &[item]).is_err());
    }

    #[test]
    fn unknown_snapshot_version() {
        let json = r#"{"format_version": 999, "dim": null, "initial_threshold": 0.5, "entries": []}"#;
        assert!(matches!(
            gallery_from_json(json),
            Err(Error::VersionMismatch { expected: 1, found: 999 })
        ));
    }

    #[test]
    fn snapshot_rejects_gaps_in_indices() {
        let json = r#"{"format_version": 1, "dim": 2, "initial_threshold": 0.5, "entries": [
            {"reg_index": 2, "source_id": "", "label": "A", "vector": [1.0, 0.0], "threshold": 0.5}
        ]}"#;
        assert!(matches!(gallery_from_json(json), Err(Error::InvalidSnapshot(_))));
    }

    #[test]
    fn snapshot_round_trip_is_exact() {
        let mut g = Gallery::new(0.3779).unwrap();
        for (v, l) in [([0.3, 0.7, 0.1], "A"), ([0.9, 0.1, 0.2], "B"), ([0.35, 0.6, 0.2], "A")] {
            g.register(LabeledEmbedding::from_raw(&v, l, format!("{l}.jpg")).unwrap()).unwrap();
        }
        let back = gallery_from_json(&gallery_to_json(&g).unwrap()).unwrap();
        assert_eq!(back.entries(), g.entries());
        let bits = |g: &Gallery| g.thresholds().iter().map(|t| t.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&g));
        assert_eq!(back.initial_threshold(), g.initial_threshold());
        assert_eq!(back.identity_count(), 2);
    }

    #[test]
    fn curve_csv_for_two_step_run() {
        let data = [
            LabeledEmbedding::from_raw(&[1.0, 0.0], "A", "a1").unwrap(),
            LabeledEmbedding::from_raw(&[1.0, 0.0], "A", "a2").unwrap(),
        ];
        let r = run_protocol(&data, ThresholdPolicy::Adaptive, 0.3779).unwrap();
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &r).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "step,temporary_accuracy,outcome\n1,1,true_reject\n2,1,true_accept\n"
        );
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"final_acc\":1.0"));
    }
}
