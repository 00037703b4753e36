//! File formats.
//!
//! Complex (JSON):
//! `{"format": "dirac-complex", "version": 1, "nodes": N, "links": [[i, j], ...],
//! "triangles": [[i, j, k], ...], "meta": {...}}`. Simplices may be listed in
//! any order and orientation; they are canonicalized on load.
//!
//! CSV files allow `#` comment lines anywhere. Columns:
//! - link flow: `i,j,value`, one row per link; a row for `(j, i)` with `j > i`
//!   contributes `-value` to the link `(i, j)`
//! - signal: `block,index,value` with `block` one of `node`, `link`, `triangle`
//! - spectrum: `order,index,eigenvalue,class`
//! - trace: `t,m_hat,delta_s,rel_error`, empty cells where the truth is unknown

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::complex::{Link, SimplicialComplex, Triangle};
use crate::error::{Error, Result};
use crate::filter::RunTrace;
use crate::operators::Order;
use crate::scalar::Real;
use crate::spectral::SpectralBasis;
use crate::spinor::{Block, Layout, TopologicalSpinor};

pub const COMPLEX_FORMAT: &str = "dirac-complex";
pub const COMPLEX_VERSION: u32 = 1;
/// Version written into CSV headers.
pub const CSV_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexFile {
    pub format: String,
    pub version: u32,
    pub nodes: usize,
    pub links: Vec<Link>,
    #[serde(default)]
    pub triangles: Vec<Triangle>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub meta: serde_json::Value,
}

impl ComplexFile {
    pub fn from_complex(k: &SimplicialComplex, meta: serde_json::Value) -> Self {
        ComplexFile {
            format: COMPLEX_FORMAT.into(),
            version: COMPLEX_VERSION,
            nodes: k.node_count(),
            links: k.links().to_vec(),
            triangles: k.triangles().to_vec(),
            meta,
        }
    }

    pub fn to_complex(&self) -> Result<SimplicialComplex> {
        if self.format != COMPLEX_FORMAT {
            return Err(Error::Parse(format!("unknown complex format {:?}", self.format)));
        }
        if self.version != COMPLEX_VERSION {
            return Err(Error::Parse(format!("unsupported complex version {}", self.version)));
        }
        SimplicialComplex::new(self.nodes, &self.links, &self.triangles)
    }
}

pub fn parse_complex(text: &str) -> Result<(SimplicialComplex, serde_json::Value)> {
    let file: ComplexFile = serde_json::from_str(text)?;
    Ok((file.to_complex()?, file.meta))
}

pub fn load_complex(path: impl AsRef<Path>) -> Result<SimplicialComplex> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_complex(&text)?.0)
}

pub fn complex_to_json(k: &SimplicialComplex, meta: serde_json::Value) -> String {
    serde_json::to_string_pretty(&ComplexFile::from_complex(k, meta)).expect("complex serializes")
}

pub fn save_complex(path: impl AsRef<Path>, k: &SimplicialComplex, meta: serde_json::Value) -> Result<()> {
    let mut text = complex_to_json(k, meta);
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(r)
}

fn check_header<R: Read>(reader: &mut csv::Reader<R>, want: &[&str]) -> Result<()> {
    let header = reader.headers()?;
    if header.iter().ne(want.iter().copied()) {
        return Err(Error::Parse(format!(
            "expected columns {}, found {}",
            want.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

fn field<F: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<F> {
    let line = rec.position().map(|p| p.line()).unwrap_or(0);
    rec.get(i)
        .ok_or_else(|| Error::Parse(format!("line {line}: missing column {i}")))?
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad value {:?}", &rec[i])))
}

#[derive(Serialize)]
struct FlowRow {
    i: usize,
    j: usize,
    value: f64,
}

/// Reads an `i,j,value` link flow into a spinor on `k` that is zero on nodes
/// and triangles. Links of `k` without a row stay zero.
pub fn parse_flow<T: Real, R: Read>(r: R, k: &SimplicialComplex) -> Result<TopologicalSpinor<T>> {
    let mut reader = csv_reader(r);
    check_header(&mut reader, &["i", "j", "value"])?;
    let mut out = TopologicalSpinor::zeros(k.layout());
    let mut seen = vec![false; k.links().len()];
    for rec in reader.records() {
        let rec = rec?;
        let (i, j, v): (usize, usize, f64) = (field(&rec, 0)?, field(&rec, 1)?, field(&rec, 2)?);
        let l = k.link_index(i, j).ok_or(Error::UnknownLink(i, j))?;
        if std::mem::replace(&mut seen[l], true) {
            return Err(Error::Parse(format!("link ({i}, {j}) listed twice")));
        }
        let v = if i < j { v } else { -v };
        out.set(Block::Link, l, T::lit(v));
    }
    Ok(out)
}

pub fn load_flow<T: Real>(path: impl AsRef<Path>, k: &SimplicialComplex) -> Result<TopologicalSpinor<T>> {
    parse_flow(BufReader::new(File::open(path)?), k)
}

pub fn write_flow<T: Real, W: Write>(w: W, s: &TopologicalSpinor<T>, k: &SimplicialComplex) -> Result<()> {
    s.check_layout(k.layout())?;
    let mut writer = csv::Writer::from_writer(w);
    for (l, &[i, j]) in k.links().iter().enumerate() {
        writer.serialize(FlowRow {
            i,
            j,
            value: s.get(Block::Link, l).as_f64(),
        })?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes `# ` prefixed comment lines.
pub fn write_comments<W: Write>(w: &mut W, lines: &[String]) -> Result<()> {
    for line in lines {
        for part in line.lines() {
            writeln!(w, "# {part}")?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SignalRow {
    block: &'static str,
    index: usize,
    value: f64,
}

pub fn write_signal<T: Real, W: Write>(mut w: W, s: &TopologicalSpinor<T>, comments: &[String]) -> Result<()> {
    write_comments(&mut w, comments)?;
    let mut writer = csv_writer(w);
    writer.write_record(["block", "index", "value"])?;
    for block in Block::ALL {
        for (index, v) in s.block(block).iter().enumerate() {
            writer.serialize(SignalRow {
                block: block.name(),
                index,
                value: v.as_f64(),
            })?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Reads a signal written by [`write_signal`]. Entries not listed are zero.
pub fn parse_signal<T: Real, R: Read>(r: R, layout: Layout) -> Result<TopologicalSpinor<T>> {
    let mut reader = csv_reader(r);
    check_header(&mut reader, &["block", "index", "value"])?;
    let mut out = TopologicalSpinor::zeros(layout);
    for rec in reader.records() {
        let rec = rec?;
        let name: String = field(&rec, 0)?;
        let block = Block::parse(&name).ok_or_else(|| Error::Parse(format!("unknown block {name:?}")))?;
        let index: usize = field(&rec, 1)?;
        if index >= layout.len(block) {
            return Err(Error::DimensionMismatch {
                expected: layout.len(block),
                found: index + 1,
            });
        }
        out.set(block, index, T::lit(field(&rec, 2)?));
    }
    Ok(out)
}

pub fn load_signal<T: Real>(path: impl AsRef<Path>, layout: Layout) -> Result<TopologicalSpinor<T>> {
    parse_signal(BufReader::new(File::open(path)?), layout)
}

#[derive(Serialize)]
struct SpectrumRow {
    order: usize,
    index: usize,
    eigenvalue: f64,
    class: &'static str,
}

/// One row per nonzero eigenvalue of each basis, followed by one `harm` row
/// per harmonic dimension of `D_n` with eigenvalue 0.
pub fn write_spectrum<T: Real, W: Write>(
    mut w: W,
    bases: &[&SpectralBasis<T>],
    comments: &[String],
) -> Result<()> {
    write_comments(&mut w, comments)?;
    let mut writer = csv_writer(w);
    writer.write_record(["order", "index", "eigenvalue", "class"])?;
    for b in bases {
        let order = b.order().get();
        let mut index = 0;
        for (l, class) in b.classified_spectrum() {
            writer.serialize(SpectrumRow {
                order,
                index,
                eigenvalue: l.as_f64(),
                class: class.name(),
            })?;
            index += 1;
        }
        for _ in 0..b.harmonic_dim() {
            writer.serialize(SpectrumRow {
                order,
                index,
                eigenvalue: 0.0,
                class: crate::spectral::EigenClass::Harmonic.name(),
            })?;
            index += 1;
        }
    }
    writer.flush()?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Trace rows followed by a `# converged=... iterations=... final_m=...` line.
pub fn write_trace<W: Write>(mut w: W, trace: &RunTrace, comments: &[String]) -> Result<()> {
    write_comments(&mut w, comments)?;
    {
        let mut writer = csv::Writer::from_writer(&mut w);
        writer.write_record(["t", "m_hat", "delta_s", "rel_error"])?;
        for r in &trace.rows {
            writer.write_record([r.t.to_string(), r.m_hat.to_string(), opt(r.delta_s), opt(r.rel_error)])?;
        }
        writer.flush()?;
    }
    writeln!(
        w,
        "# converged={} iterations={} final_m={}",
        trace.converged,
        trace.iterations,
        trace.final_m()
    )?;
    Ok(())
}

/// Parses `order` as given on the command line or in a file.
pub fn parse_order(text: &str) -> Result<Order> {
    let n: usize = text
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("order must be 1 or 2, got {text:?}")))?;
    Order::new(n)
}

pub fn create(path: impl AsRef<Path>) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}
