//! Binary snapshots: magic, little-endian u32 header length, JSON header, raw LE f64 arrays.
//!
//! Arrays are stored one per field in x-fastest point order, each with a SHA-256 checksum.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::evolution::{component_names, EvolutionState, NF};
use crate::grid::{Boundary, Grid};
use crate::initial_data::{DataGradients, DataPoint, DataSet};

pub const MAGIC: &[u8; 8] = b"EMGSNAP\0";
pub const VERSION: u32 = 1;
const MAX_HEADER: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnapshotKind {
    State,
    Dataset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub n: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub order: usize,
    pub boundary: Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldEntry {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub version: u32,
    pub kind: SnapshotKind,
    pub grid: GridHeader,
    pub t: f64,
    pub endianness: String,
    pub fields: Vec<FieldEntry>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn encode(kind: SnapshotKind, grid: &Grid, t: f64, fields: &[(String, Vec<f64>)]) -> Vec<u8> {
    let blobs: Vec<Vec<u8>> = fields
        .iter()
        .map(|(_, v)| v.iter().flat_map(|x| x.to_le_bytes()).collect())
        .collect();
    let header = Header {
        version: VERSION,
        kind,
        grid: GridHeader {
            n: grid.n,
            half_width: grid.half_width,
            order: grid.order,
            boundary: grid.boundary,
        },
        t,
        endianness: "LE".into(),
        fields: fields
            .iter()
            .zip(&blobs)
            .map(|((name, _), b)| FieldEntry {
                name: name.clone(),
                sha256: hex(&Sha256::digest(b)),
            })
            .collect(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(12 + json.len() + blobs.iter().map(Vec::len).sum::<usize>());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for b in blobs {
        out.extend_from_slice(&b);
    }
    out
}

fn decode(bytes: &[u8], expect: SnapshotKind) -> Result<(Header, Grid, Vec<Vec<f64>>)> {
    let bad = |m: String| Error::Snapshot(m);
    if bytes.len() < 12 || &bytes[..8] != MAGIC {
        return Err(bad("not a snapshot file (bad magic)".into()));
    }
    let hlen = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    if hlen > MAX_HEADER || 12 + hlen > bytes.len() {
        return Err(bad(format!("header length {hlen} is inconsistent with the file size")));
    }
    let header: Header =
        serde_json::from_slice(&bytes[12..12 + hlen]).map_err(|e| bad(format!("unreadable header: {e}")))?;
    if header.version > VERSION {
        return Err(bad(format!(
            "snapshot version {} is newer than the supported version {VERSION}",
            header.version
        )));
    }
    if header.endianness != "LE" {
        return Err(bad(format!("unsupported endianness marker {:?}", header.endianness)));
    }
    if header.kind != expect {
        return Err(bad(format!("expected a {expect:?} snapshot, found {:?}", header.kind)));
    }
    let g = &header.grid;
    let grid = Grid::new(g.n, g.half_width, g.order, g.boundary).map_err(|e| bad(format!("invalid grid: {e}")))?;
    let field_bytes = grid.len() * 8;
    let body = &bytes[12 + hlen..];
    if body.len() != field_bytes * header.fields.len() {
        return Err(bad(format!(
            "payload has {} bytes, expected {} for {} fields on {}³ points",
            body.len(),
            field_bytes * header.fields.len(),
            header.fields.len(),
            g.n
        )));
    }
    let mut arrays = Vec::with_capacity(header.fields.len());
    for (f, chunk) in header.fields.iter().zip(body.chunks_exact(field_bytes)) {
        if hex(&Sha256::digest(chunk)) != f.sha256 {
            return Err(bad(format!("checksum mismatch in field {}", f.name)));
        }
        arrays.push(
            chunk
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect(),
        );
    }
    Ok((header, grid, arrays))
}

fn check_grid(found: &Grid, expected: Option<&Grid>) -> Result<()> {
    if let Some(g) = expected {
        if g != found {
            return Err(Error::Snapshot(format!(
                "snapshot grid (n = {}, L = {}, order {}, {:?}) does not match the configured grid (n = {}, L = {}, order {}, {:?})",
                found.n, found.half_width, found.order, found.boundary, g.n, g.half_width, g.order, g.boundary
            )));
        }
    }
    Ok(())
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    // write-then-rename keeps an existing snapshot intact if the write fails
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn encode_state(grid: &Grid, state: &EvolutionState) -> Vec<u8> {
    let names = component_names();
    let mut fields = Vec::with_capacity(2 * NF);
    for (prefix, src) in [("", &state.u), ("dt_", &state.v)] {
        for (c, name) in names.iter().enumerate() {
            fields.push((format!("{prefix}{name}"), src.iter().map(|x| x[c]).collect()));
        }
    }
    encode(SnapshotKind::State, grid, state.t, &fields)
}

pub fn decode_state(bytes: &[u8], expected: Option<&Grid>) -> Result<(Grid, EvolutionState)> {
    let (header, grid, arrays) = decode(bytes, SnapshotKind::State)?;
    check_grid(&grid, expected)?;
    let names = component_names();
    let want: Vec<String> = ["", "dt_"]
        .iter()
        .flat_map(|p| names.iter().map(move |n| format!("{p}{n}")))
        .collect();
    let have: Vec<&str> = header.fields.iter().map(|f| f.name.as_str()).collect();
    if have != want {
        return Err(Error::Snapshot(format!("unexpected field list {have:?}")));
    }
    let mut state = EvolutionState::zeros(&grid);
    state.t = header.t;
    for c in 0..NF {
        for p in 0..grid.len() {
            state.u[p][c] = arrays[c][p];
            state.v[p][c] = arrays[NF + c][p];
        }
    }
    Ok((grid, state))
}

pub fn save_state(path: &Path, grid: &Grid, state: &EvolutionState) -> Result<()> {
    write(path, &encode_state(grid, state))
}

pub fn load_state(path: &Path, expected: Option<&Grid>) -> Result<(Grid, EvolutionState)> {
    decode_state(&read(path)?, expected)
}

const DATA_FIELDS: [&str; 20] = [
    "g11", "g12", "g13", "g22", "g23", "g33", "K11", "K12", "K13", "K22", "K23", "K33", "A1", "A2", "A3", "A0",
    "E1", "E2", "E3", "N",
];

fn data_values(d: &DataPoint) -> [f64; 20] {
    let mut v = [0.0; 20];
    v[..6].copy_from_slice(&d.gbar);
    v[6..12].copy_from_slice(&d.k);
    v[12..15].copy_from_slice(&d.a);
    v[15] = d.a0;
    v[16..19].copy_from_slice(&d.e);
    v[19] = d.lapse;
    v
}

fn gradient_values(g: &DataGradients) -> [f64; 33] {
    let mut v = [0.0; 33];
    for l in 0..3 {
        v[6 * l..6 * l + 6].copy_from_slice(&g.gbar[l]);
        v[18 + l] = g.lapse[l];
        v[21 + 3 * l..24 + 3 * l].copy_from_slice(&g.a[l]);
        v[30 + l] = g.a0[l];
    }
    v
}

fn gradient_names() -> Vec<String> {
    let mut names = Vec::with_capacity(33);
    for l in 1..=3 {
        names.extend(DATA_FIELDS[..6].iter().map(|n| format!("d{l}_{n}")));
    }
    names.extend((1..=3).map(|l| format!("d{l}_N")));
    for l in 1..=3 {
        names.extend(DATA_FIELDS[12..15].iter().map(|n| format!("d{l}_{n}")));
    }
    names.extend((1..=3).map(|l| format!("d{l}_A0")));
    names
}

/// A data set in the snapshot container; exact gradients are stored when present.
pub fn encode_dataset(data: &DataSet) -> Vec<u8> {
    let mut fields: Vec<(String, Vec<f64>)> = DATA_FIELDS
        .iter()
        .enumerate()
        .map(|(c, n)| (n.to_string(), data.points.iter().map(|d| data_values(d)[c]).collect()))
        .collect();
    if let Some(gr) = &data.gradients {
        for (c, n) in gradient_names().into_iter().enumerate() {
            fields.push((n, gr.iter().map(|g| gradient_values(g)[c]).collect()));
        }
    }
    encode(SnapshotKind::Dataset, &data.grid, 0.0, &fields)
}

pub fn decode_dataset(bytes: &[u8], expected: Option<&Grid>) -> Result<DataSet> {
    let (header, grid, arrays) = decode(bytes, SnapshotKind::Dataset)?;
    check_grid(&grid, expected)?;
    let names: Vec<&str> = header.fields.iter().map(|f| f.name.as_str()).collect();
    let with_gradients = names.len() == 20 + 33;
    if names[..20.min(names.len())] != DATA_FIELDS[..] || !(names.len() == 20 || with_gradients) {
        return Err(Error::Snapshot(format!("unexpected field list {names:?}")));
    }
    let points = (0..grid.len())
        .map(|p| {
            let v: [f64; 20] = std::array::from_fn(|c| arrays[c][p]);
            DataPoint {
                gbar: v[..6].try_into().expect("6"),
                k: v[6..12].try_into().expect("6"),
                a: v[12..15].try_into().expect("3"),
                a0: v[15],
                e: v[16..19].try_into().expect("3"),
                lapse: v[19],
            }
        })
        .collect();
    let gradients = with_gradients.then(|| {
        (0..grid.len())
            .map(|p| {
                let v: [f64; 33] = std::array::from_fn(|c| arrays[20 + c][p]);
                DataGradients {
                    gbar: std::array::from_fn(|l| v[6 * l..6 * l + 6].try_into().expect("6")),
                    lapse: [v[18], v[19], v[20]],
                    a: std::array::from_fn(|l| v[21 + 3 * l..24 + 3 * l].try_into().expect("3")),
                    a0: [v[30], v[31], v[32]],
                }
            })
            .collect()
    });
    let data = DataSet {
        grid,
        points,
        gradients,
    };
    data.validate()?;
    Ok(data)
}

pub fn save_dataset(path: &Path, data: &DataSet) -> Result<()> {
    write(path, &encode_dataset(data))
}

pub fn load_dataset(path: &Path, expected: Option<&Grid>) -> Result<DataSet> {
    decode_dataset(&read(path)?, expected)
}

/// Kind recorded in a snapshot file's header.
pub fn peek_kind(path: &Path) -> Result<SnapshotKind> {
    let bytes = read(path)?;
    for kind in [SnapshotKind::State, SnapshotKind::Dataset] {
        match decode(&bytes, kind) {
            Ok(_) => return Ok(kind),
            Err(Error::Snapshot(m)) if m.starts_with("expected a") => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Snapshot("unknown snapshot kind".into()))
}
