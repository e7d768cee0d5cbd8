//! SWS1 snapshot format.
//!
//! Little-endian throughout:
//!
//! | offset | size | field |
//! |-------:|-----:|-------|
//! | 0 | 4 | magic `SWS1` |
//! | 4 | 4 | u32 version (1) |
//! | 8 | 4 | u32 nx |
//! | 12 | 4 | u32 ny |
//! | 16 | 8 | f64 dx |
//! | 24 | 8 | f64 dy |
//! | 32 | 8 | f64 t |
//! | 40 | 8 | f64 g |
//! | 48 | 8·nx·ny each | f64 blocks z, h, qx, qy, row-major |
//!
//! Zero or more 12-byte trailing records may follow: a u32 tag and an
//! 8-byte payload. Tag 1 holds `dt_next` (f64), tag 2 the index of the next
//! step (u64). Readers skip unknown tags.

use std::io::{self, Read, Write};

use crate::grid::{FieldSet, GridSpec};

pub const MAGIC: [u8; 4] = *b"SWS1";
pub const VERSION: u32 = 1;
pub const HEADER_BYTES: usize = 48;
pub const RECORD_BYTES: usize = 12;

pub const TAG_DT_NEXT: u32 = 1;
pub const TAG_STEP_INDEX: u32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("bad magic at offset 0: expected \"SWS1\", found {found:?}")]
    BadMagic { found: [u8; 4] },
    #[error("unsupported version {found} at offset 4 (expected {VERSION})")]
    Version { found: u32 },
    #[error("truncated at offset {offset}: expected {expected} bytes, got {actual}")]
    Truncated { offset: usize, expected: usize, actual: usize },
    #[error("invalid header at offset {offset}: {reason}")]
    Header { offset: usize, reason: String },
    #[error("I/O: {0}")]
    Io(#[from] io::Error),
}

/// Contents of an SWS1 file.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub state: FieldSet,
    pub g: f64,
    pub dt_next: Option<f64>,
    pub step_index: Option<u64>,
}

/// Exact encoded size of a snapshot without trailing records.
pub fn snapshot_len(nx: usize, ny: usize) -> usize {
    HEADER_BYTES + 4 * nx * ny * 8
}

fn encode(fs: &FieldSet, g: f64, records: &[(u32, [u8; 8])]) -> Vec<u8> {
    let spec = fs.spec;
    let mut buf = Vec::with_capacity(snapshot_len(spec.nx, spec.ny) + records.len() * RECORD_BYTES);
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(spec.nx as u32).to_le_bytes());
    buf.extend_from_slice(&(spec.ny as u32).to_le_bytes());
    for v in [spec.dx, spec.dy, fs.t, g] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for field in [&fs.z, &fs.h, &fs.qx, &fs.qy] {
        for v in field.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    for (tag, payload) in records {
        buf.extend_from_slice(&tag.to_le_bytes());
        buf.extend_from_slice(payload);
    }
    buf
}

/// Encodes `fs` as SWS1 bytes.
pub fn snapshot_bytes(fs: &FieldSet, g: f64) -> Vec<u8> {
    encode(fs, g, &[])
}

/// Writes `fs` as SWS1 and returns the number of bytes written.
pub fn write_snapshot(fs: &FieldSet, g: f64, dest: &mut impl Write) -> Result<usize, SnapshotError> {
    let buf = snapshot_bytes(fs, g);
    dest.write_all(&buf)?;
    Ok(buf.len())
}

/// Writes a snapshot plus the trailing records needed to resume exactly.
pub fn write_checkpoint(
    fs: &FieldSet,
    g: f64,
    dt_next: f64,
    step_index: u64,
    dest: &mut impl Write,
) -> Result<usize, SnapshotError> {
    let buf = encode(fs, g, &[(TAG_DT_NEXT, dt_next.to_le_bytes()), (TAG_STEP_INDEX, step_index.to_le_bytes())]);
    dest.write_all(&buf)?;
    Ok(buf.len())
}

/// Reads an SWS1 stream to its end.
pub fn read_snapshot(src: &mut impl Read) -> Result<Snapshot, SnapshotError> {
    let mut buf = Vec::new();
    src.read_to_end(&mut buf)?;
    decode(&buf)
}

fn take<const N: usize>(buf: &[u8], offset: usize, expected: usize) -> Result<[u8; N], SnapshotError> {
    buf.get(offset..offset + N)
        .map(|s| s.try_into().expect("slice has length N"))
        .ok_or(SnapshotError::Truncated { offset: buf.len(), expected, actual: buf.len() })
}

/// Decodes SWS1 bytes.
pub fn decode(buf: &[u8]) -> Result<Snapshot, SnapshotError> {
    let magic: [u8; 4] = take(buf, 0, HEADER_BYTES)?;
    if magic != MAGIC {
        return Err(SnapshotError::BadMagic { found: magic });
    }
    let u32_at = |o: usize| take::<4>(buf, o, HEADER_BYTES).map(u32::from_le_bytes);
    let f64_at = |o: usize, expected: usize| take::<8>(buf, o, expected).map(f64::from_le_bytes);
    let version = u32_at(4)?;
    if version != VERSION {
        return Err(SnapshotError::Version { found: version });
    }
    if buf.len() < HEADER_BYTES {
        return Err(SnapshotError::Truncated { offset: buf.len(), expected: HEADER_BYTES, actual: buf.len() });
    }
    let nx = u32_at(8)? as usize;
    let ny = u32_at(12)? as usize;
    let dx = f64_at(16, HEADER_BYTES)?;
    let dy = f64_at(24, HEADER_BYTES)?;
    let t = f64_at(32, HEADER_BYTES)?;
    let g = f64_at(40, HEADER_BYTES)?;
    let spec = GridSpec::new(nx, ny, dx, dy)
        .map_err(|e| SnapshotError::Header { offset: 8, reason: e.to_string() })?;
    let expected = snapshot_len(nx, ny);
    if buf.len() < expected {
        return Err(SnapshotError::Truncated { offset: buf.len(), expected, actual: buf.len() });
    }
    let n = nx * ny;
    let block = |b: usize| -> Vec<f64> {
        buf[HEADER_BYTES + b * n * 8..HEADER_BYTES + (b + 1) * n * 8]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect()
    };
    let state = FieldSet { spec, z: block(0), h: block(1), qx: block(2), qy: block(3), t };

    let mut snap = Snapshot { state, g, dt_next: None, step_index: None };
    let mut offset = expected;
    while offset < buf.len() {
        let end = offset + RECORD_BYTES;
        if buf.len() < end {
            return Err(SnapshotError::Truncated { offset: buf.len(), expected: end, actual: buf.len() });
        }
        let tag = u32::from_le_bytes(buf[offset..offset + 4].try_into().expect("4 bytes"));
        let payload: [u8; 8] = buf[offset + 4..end].try_into().expect("8 bytes");
        match tag {
            TAG_DT_NEXT => snap.dt_next = Some(f64::from_le_bytes(payload)),
            TAG_STEP_INDEX => snap.step_index = Some(u64::from_le_bytes(payload)),
            _ => {}
        }
        offset = end;
    }
    Ok(snap)
}
