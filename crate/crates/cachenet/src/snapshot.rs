//! Snapshot formats for audits.
//!
//! Placement text: a header line `n M K` followed by `n` lines of `M`
//! space-separated file ids.
//!
//! Placement binary, little-endian: magic `CNPL`, `u32` version (1),
//! `u64` n, `u32` M, `u32` K, then `n * M` `u32` file ids in node order.

use std::io::{BufRead, Write};

use cachenet_core::analysis::{ConfigGraph, VoronoiTessellation};
use cachenet_core::{NodeId, Placement, RequestStream};

use crate::error::{HarnessError, Result};

const MAGIC: &[u8; 4] = b"CNPL";
const VERSION: u32 = 1;

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::Snapshot(msg.into())
}

fn io(e: std::io::Error) -> HarnessError {
    HarnessError::Snapshot(e.to_string())
}

pub fn write_placement_text<W: Write>(p: &Placement, mut w: W) -> Result<()> {
    writeln!(w, "{} {} {}", p.n(), p.cache_size(), p.library_size()).map_err(io)?;
    for v in 0..p.n() {
        let row: Vec<String> = p.node_slots(NodeId(v as u32)).iter().map(u32::to_string).collect();
        writeln!(w, "{}", row.join(" ")).map_err(io)?;
    }
    Ok(())
}

pub fn read_placement_text<R: BufRead>(r: R) -> Result<Placement> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| bad("missing header"))?.map_err(io)?;
    let nums: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad(format!("bad header `{header}`"))))
        .collect::<Result<_>>()?;
    let [n, m, k] = nums[..] else {
        return Err(bad(format!("header needs `n M K`, got `{header}`")));
    };
    let mut slots = Vec::with_capacity(n.saturating_mul(m));
    for row in 0..n {
        let line = lines.next().ok_or_else(|| bad(format!("missing row {row}")))?.map_err(io)?;
        let before = slots.len();
        for t in line.split_whitespace() {
            slots.push(t.parse::<u32>().map_err(|_| bad(format!("row {row}: bad file id `{t}`")))?);
        }
        if slots.len() - before != m {
            return Err(bad(format!("row {row} has {} ids, expected {m}", slots.len() - before)));
        }
    }
    if lines.any(|l| l.map(|l| !l.trim().is_empty()).unwrap_or(true)) {
        return Err(bad("trailing data after the last row"));
    }
    Ok(Placement::from_slots(n, m, k, slots)?)
}

pub fn write_placement_binary<W: Write>(p: &Placement, mut w: W) -> Result<()> {
    let mut buf = Vec::with_capacity(24 + 4 * p.slots().len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(p.n() as u64).to_le_bytes());
    buf.extend_from_slice(&(p.cache_size() as u32).to_le_bytes());
    buf.extend_from_slice(&(p.library_size() as u32).to_le_bytes());
    for &f in p.slots() {
        buf.extend_from_slice(&f.to_le_bytes());
    }
    w.write_all(&buf).map_err(io)
}

pub fn read_placement_binary(bytes: &[u8]) -> Result<Placement> {
    if bytes.len() < 24 || &bytes[..4] != MAGIC {
        return Err(bad("not a placement snapshot"));
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    if u32_at(4) != VERSION {
        return Err(bad(format!("unsupported version {}", u32_at(4))));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let (m, k) = (u32_at(16) as usize, u32_at(20) as usize);
    let body = &bytes[24..];
    if n.checked_mul(m).and_then(|c| c.checked_mul(4)) != Some(body.len()) {
        return Err(bad(format!("body has {} bytes, expected {n} x {m} ids", body.len())));
    }
    let slots = body.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect();
    Ok(Placement::from_slots(n, m, k, slots)?)
}

fn finish<W: Write>(w: csv::Writer<W>) -> Result<()> {
    w.into_inner().map_err(|e| HarnessError::Csv(e.into_error().into()))?;
    Ok(())
}

/// `seq,origin,file`
pub fn write_requests_csv<W: Write>(s: &RequestStream, w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["seq", "origin", "file"])?;
    for r in s.requests() {
        w.write_record([r.seq.to_string(), r.origin.0.to_string(), r.file.to_string()])?;
    }
    finish(w)
}

pub fn read_requests_csv<R: std::io::Read>(n_nodes: usize, r: R) -> Result<RequestStream> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let field = |j: usize| -> Result<u32> {
            rec.get(j).and_then(|s| s.parse().ok()).ok_or_else(|| bad(format!("request row {i} is malformed")))
        };
        if field(0)? as usize != i {
            return Err(bad(format!("request row {i} is out of sequence")));
        }
        let origin = field(1)?;
        if origin as usize >= n_nodes {
            return Err(bad(format!("request row {i}: origin {origin} outside {n_nodes} nodes")));
        }
        out.push((NodeId(origin), field(2)?));
    }
    Ok(RequestStream::from_requests(n_nodes, out))
}

/// `node,owner,distance`
pub fn write_tessellation_csv<W: Write>(t: &VoronoiTessellation, w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["node", "owner", "distance"])?;
    for (v, (o, d)) in t.owner.iter().zip(&t.distance).enumerate() {
        w.write_record([v.to_string(), o.0.to_string(), d.to_string()])?;
    }
    finish(w)
}

/// `degree,count`, one row per degree from 0 to the maximum.
pub fn write_degree_histogram_csv<W: Write>(h: &ConfigGraph, w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["degree", "count"])?;
    for (d, c) in h.degree_histogram().iter().enumerate() {
        w.write_record([d.to_string(), c.to_string()])?;
    }
    finish(w)
}
