//! Text and binary file formats.
//!
//! * rankings: `#n=<count>` header, then one ranking per line (`2 < 0,1`);
//!   blank lines and other `#` lines are ignored
//! * labels: CSV `row_index,label`, labels in {−1, +1}
//! * features: CSV `id,f1,…,fd`, one row per object in id order
//! * edge list: `u v weight`, sorted by `(u, v)`
//! * feature maps: CSV `object_id,value`, or one matrix row per ranking
//! * Gram matrices: CSV, or binary: `GRAM`, version `u32`, `m` `u64`, then
//!   `m²` row-major `f64`, all little-endian
//!
//! Reals are written with 17 significant digits.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::classify::Label;
use crate::error::{Error, Result};
use crate::graph::InformationGraph;
use crate::isotonic::FeatureMap;
use crate::kernels::{GramMatrix, KernelKind};
use crate::ranking::{parse_ranking, OrderedPartition};

pub const GRAM_MAGIC: &[u8; 4] = b"GRAM";
pub const GRAM_VERSION: u32 = 1;

/// 17 significant digits, round-trip exact.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse { path: path.display().to_string(), line, message: message.into() }
}

/// Non-blank lines with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty())
}

pub fn format_rankings(n: usize, rankings: &[OrderedPartition]) -> String {
    let mut out = format!("#n={n}\n");
    for r in rankings {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

pub fn parse_rankings(text: &str, path: &Path) -> Result<(usize, Vec<OrderedPartition>)> {
    let mut n: Option<usize> = None;
    let mut rankings = Vec::new();
    for (line, content) in content_lines(text) {
        if let Some(rest) = content.strip_prefix("#n=") {
            if n.is_some() || !rankings.is_empty() {
                return Err(parse_err(path, line, "header #n=<count> must appear once, before any ranking"));
            }
            let count: usize =
                rest.trim().parse().map_err(|_| parse_err(path, line, format!("bad object count {rest:?}")))?;
            if count == 0 {
                return Err(parse_err(path, line, "object count must be positive"));
            }
            n = Some(count);
        } else if content.starts_with('#') {
            continue;
        } else {
            let count = n.ok_or_else(|| parse_err(path, line, "missing #n=<count> header"))?;
            let ranking = parse_ranking(content, count).map_err(|e| parse_err(path, line, e.to_string()))?;
            rankings.push(ranking);
        }
    }
    let n = n.ok_or_else(|| parse_err(path, 1, "missing #n=<count> header"))?;
    Ok((n, rankings))
}

pub fn save_rankings(path: &Path, n: usize, rankings: &[OrderedPartition]) -> Result<()> {
    if let Some(r) = rankings.iter().find(|r| r.n() != n) {
        return Err(Error::UniverseMismatch { expected: n, found: r.n() });
    }
    write_text(path, &format_rankings(n, rankings))
}

pub fn load_rankings(path: &Path) -> Result<(usize, Vec<OrderedPartition>)> {
    parse_rankings(&read(path)?, path)
}

pub fn save_labels(path: &Path, labels: &[Label]) -> Result<()> {
    let mut out = String::from("row_index,label\n");
    for (i, y) in labels.iter().enumerate() {
        out.push_str(&format!("{i},{y}\n"));
    }
    write_text(path, &out)
}

pub fn load_labels(path: &Path) -> Result<Vec<Label>> {
    let text = read(path)?;
    let mut labels = Vec::new();
    for (line, content) in content_lines(&text) {
        if line == 1 && content.starts_with("row_index") {
            continue;
        }
        let (idx, label) = content.split_once(',').ok_or_else(|| parse_err(path, line, "expected row_index,label"))?;
        let idx: usize = idx.trim().parse().map_err(|_| parse_err(path, line, "bad row index"))?;
        if idx != labels.len() {
            return Err(parse_err(path, line, format!("row index {idx} out of sequence")));
        }
        let label: Label = match label.trim() {
            "1" | "+1" => 1,
            "-1" => -1,
            other => return Err(parse_err(path, line, format!("label {other:?} is not +1 or -1"))),
        };
        labels.push(label);
    }
    Ok(labels)
}

pub fn save_features(path: &Path, features: &[Vec<f64>]) -> Result<()> {
    let d = features.first().map_or(0, Vec::len);
    let mut out = String::from("id");
    for k in 1..=d {
        out.push_str(&format!(",f{k}"));
    }
    out.push('\n');
    for (i, row) in features.iter().enumerate() {
        out.push_str(&i.to_string());
        for x in row {
            out.push(',');
            out.push_str(&fmt_real(*x));
        }
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn load_features(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = read(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (line, content) in content_lines(&text) {
        let mut fields = content.split(',').map(str::trim);
        let first = fields.next().unwrap_or_default();
        if width.is_none() {
            if first != "id" {
                return Err(parse_err(path, line, "expected header id,f1,…,fd"));
            }
            width = Some(fields.count());
            continue;
        }
        let id: usize = first.parse().map_err(|_| parse_err(path, line, format!("bad id {first:?}")))?;
        if id != rows.len() {
            return Err(parse_err(path, line, format!("id {id} out of sequence")));
        }
        let row = fields
            .map(|f| f.parse::<f64>().map_err(|_| parse_err(path, line, format!("bad value {f:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        if Some(row.len()) != width {
            return Err(parse_err(path, line, format!("expected {} features", width.unwrap_or(0))));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn format_edge_list(g: &InformationGraph) -> String {
    g.edges().iter().map(|&(u, v, w)| format!("{u} {v} {}\n", fmt_real(w))).collect()
}

pub fn save_edge_list(path: &Path, g: &InformationGraph) -> Result<()> {
    write_text(path, &format_edge_list(g))
}

pub fn load_edge_list(path: &Path, n: usize) -> Result<InformationGraph> {
    let text = read(path)?;
    let mut edges = Vec::new();
    for (line, content) in content_lines(&text) {
        let parts: Vec<&str> = content.split_whitespace().collect();
        let [u, v, w] = parts[..] else {
            return Err(parse_err(path, line, "expected `u v weight`"));
        };
        let u: usize = u.parse().map_err(|_| parse_err(path, line, "bad endpoint"))?;
        let v: usize = v.parse().map_err(|_| parse_err(path, line, "bad endpoint"))?;
        let w: f64 = w.parse().map_err(|_| parse_err(path, line, "bad weight"))?;
        edges.push((u, v, w));
    }
    InformationGraph::from_edges(n, &edges)
}

pub fn format_feature_map(phi: &FeatureMap) -> String {
    let mut out = String::from("object_id,value\n");
    for (j, v) in phi.values().iter().enumerate() {
        out.push_str(&format!("{j},{}\n", fmt_real(*v)));
    }
    out
}

fn format_matrix_rows<'a>(rows: impl Iterator<Item = &'a [f64]>) -> String {
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().map(|&x| fmt_real(x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// One row per ranking, one column per object.
pub fn format_feature_matrix(maps: &[FeatureMap]) -> String {
    format_matrix_rows(maps.iter().map(FeatureMap::values))
}

pub fn format_gram_csv(k: &GramMatrix) -> String {
    format_matrix_rows((0..k.size()).map(|i| k.row(i)))
}

pub fn save_gram_csv(path: &Path, k: &GramMatrix) -> Result<()> {
    write_text(path, &format_gram_csv(k))
}

pub fn parse_gram_csv(text: &str, path: &Path, kind: KernelKind) -> Result<GramMatrix> {
    let mut values = Vec::new();
    let mut m: Option<usize> = None;
    for (line, content) in content_lines(text) {
        let row = content
            .split(',')
            .map(|f| f.trim().parse::<f64>().map_err(|_| parse_err(path, line, format!("bad value {f:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        if *m.get_or_insert(row.len()) != row.len() {
            return Err(parse_err(path, line, "ragged Gram row"));
        }
        values.extend(row);
    }
    let m = m.unwrap_or(0);
    if values.len() != m * m {
        return Err(parse_err(path, 1, format!("expected a square matrix, got {} values for width {m}", values.len())));
    }
    GramMatrix::new(m, values, kind)
}

pub fn load_gram_csv(path: &Path, kind: KernelKind) -> Result<GramMatrix> {
    parse_gram_csv(&read(path)?, path, kind)
}

pub fn encode_gram_binary(k: &GramMatrix) -> Vec<u8> {
    let m = k.size();
    let mut out = Vec::with_capacity(16 + 8 * m * m);
    out.extend_from_slice(GRAM_MAGIC);
    out.extend_from_slice(&GRAM_VERSION.to_le_bytes());
    out.extend_from_slice(&(m as u64).to_le_bytes());
    for v in k.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_gram_binary(bytes: &[u8], kind: KernelKind) -> Result<GramMatrix> {
    let bad = |msg: &str| Error::InvalidArgument(format!("binary Gram: {msg}"));
    if bytes.len() < 16 || &bytes[..4] != GRAM_MAGIC {
        return Err(bad("missing GRAM header"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != GRAM_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let m = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = &bytes[16..];
    if m.checked_mul(m).and_then(|c| c.checked_mul(8)) != Some(body.len()) {
        return Err(bad(&format!("expected {m}x{m} values, found {} bytes", body.len())));
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    GramMatrix::new(m, values, kind)
}

pub fn save_gram_binary(path: &Path, k: &GramMatrix) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&encode_gram_binary(k)).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn load_gram_binary(path: &Path, kind: KernelKind) -> Result<GramMatrix> {
    decode_gram_binary(&fs::read(path).map_err(|e| Error::io(path, e))?, kind)
}
