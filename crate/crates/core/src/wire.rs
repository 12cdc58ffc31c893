//! Versioned binary envelope for exchanging one sketch.
//!
//! Layout (all integers little-endian):
//!
//! | offset | size | field                                        |
//! |-------:|-----:|----------------------------------------------|
//! | 0      | 4    | magic `SKSM`                                 |
//! | 4      | 1    | version, `1`                                 |
//! | 5      | 1    | kind: 0 = BF, 1 = CBF, 2 = CMS               |
//! | 6      | 4    | width `w` / length `n`                       |
//! | 10     | 4    | depth `d` (1 for BF and CBF)                 |
//! | 14     | 4    | hash count `k` (1 for CMS)                   |
//! | 18     | 8    | hash seed                                    |
//! | 26     | 1    | counter width: 0 = packed bits, 2 = 32-bit   |
//! | 27     | ...  | payload                                      |
//!
//! The payload is the row-major counter table (`d · w` 32-bit counters), or
//! for a BF the bit vector packed least-significant-bit first and padded to
//! a whole byte. An empty CBF with `n = 128` therefore encodes to
//! `27 + 512 = 539` bytes.

use thiserror::Error;

use crate::metrics::{check_compatible, CompatibilityWitness, Mismatch};
use crate::sketches::{
    AnySketch, BloomFilter, CmsParams, CountMinSketch, CounterWidth, CountingBloomFilter,
    Descriptor, FilterParams, Sketch, SketchKind,
};

pub const MAGIC: [u8; 4] = *b"SKSM";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 27;

/// Decoded envelope header.
pub type Header = Descriptor;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("bad magic {found:02x?}, expected \"SKSM\"")]
    BadMagic { found: Vec<u8> },

    #[error("unsupported envelope version {0}")]
    UnsupportedVersion(u8),

    #[error("truncated envelope: expected {expected} bytes, got {actual}")]
    Truncated { expected: u64, actual: u64 },

    #[error("trailing bytes: expected {expected} bytes, got {actual}")]
    TrailingBytes { expected: u64, actual: u64 },

    #[error("unknown sketch kind {0}")]
    UnknownKind(u8),

    #[error("unknown counter width code {0}")]
    UnknownCounterWidth(u8),

    #[error("inconsistent header: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchEnvelope {
    pub header: Header,
    pub sketch: AnySketch,
}

/// Sketches that can be written into an envelope.
pub trait Encode: Sketch {
    fn write_payload(&self, out: &mut Vec<u8>);
}

fn write_counters(counters: &[u32], out: &mut Vec<u8>) {
    out.reserve(counters.len() * 4);
    for c in counters {
        out.extend_from_slice(&c.to_le_bytes());
    }
}

impl Encode for BloomFilter {
    fn write_payload(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_packed_bytes());
    }
}

impl Encode for CountingBloomFilter {
    fn write_payload(&self, out: &mut Vec<u8>) {
        write_counters(self.counters(), out);
    }
}

impl Encode for CountMinSketch {
    fn write_payload(&self, out: &mut Vec<u8>) {
        write_counters(self.table(), out);
    }
}

impl Encode for AnySketch {
    fn write_payload(&self, out: &mut Vec<u8>) {
        match self {
            AnySketch::Bloom(s) => s.write_payload(out),
            AnySketch::Counting(s) => s.write_payload(out),
            AnySketch::CountMin(s) => s.write_payload(out),
        }
    }
}

pub fn encode_header(header: &Header, out: &mut Vec<u8>) {
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(header.kind as u8);
    out.extend_from_slice(&header.width.to_le_bytes());
    out.extend_from_slice(&header.depth.to_le_bytes());
    out.extend_from_slice(&header.hashes.to_le_bytes());
    out.extend_from_slice(&header.seed.to_le_bytes());
    out.push(header.counter_width as u8);
}

pub fn encode<T: Encode + ?Sized>(sketch: &T) -> Vec<u8> {
    let header = sketch.descriptor();
    let mut out = Vec::with_capacity(HEADER_LEN + payload_len(&header) as usize);
    encode_header(&header, &mut out);
    sketch.write_payload(&mut out);
    out
}

/// Payload size in bytes implied by a header.
pub fn payload_len(header: &Header) -> u64 {
    let cells = header.width as u64 * header.depth as u64;
    match header.counter_width {
        CounterWidth::Bit => cells.div_ceil(8),
        CounterWidth::U32 => cells * 4,
    }
}

/// Total envelope size in bytes implied by a header.
pub fn envelope_len(header: &Header) -> u64 {
    HEADER_LEN as u64 + payload_len(header)
}

fn le_u32(b: &[u8]) -> u32 {
    u32::from_le_bytes(b.try_into().expect("4 bytes"))
}

/// Parses and validates the fixed-size header.
pub fn decode_header(bytes: &[u8]) -> Result<Header, WireError> {
    if bytes.len() < 4 || bytes[..4] != MAGIC {
        return Err(WireError::BadMagic {
            found: bytes[..bytes.len().min(4)].to_vec(),
        });
    }
    if bytes.len() < HEADER_LEN {
        if bytes.len() > 4 && bytes[4] != VERSION {
            return Err(WireError::UnsupportedVersion(bytes[4]));
        }
        return Err(WireError::Truncated {
            expected: HEADER_LEN as u64,
            actual: bytes.len() as u64,
        });
    }
    if bytes[4] != VERSION {
        return Err(WireError::UnsupportedVersion(bytes[4]));
    }
    let kind = match bytes[5] {
        0 => SketchKind::Bloom,
        1 => SketchKind::Counting,
        2 => SketchKind::CountMin,
        other => return Err(WireError::UnknownKind(other)),
    };
    let counter_width = match bytes[26] {
        0 => CounterWidth::Bit,
        2 => CounterWidth::U32,
        other => return Err(WireError::UnknownCounterWidth(other)),
    };
    let header = Header {
        kind,
        width: le_u32(&bytes[6..10]),
        depth: le_u32(&bytes[10..14]),
        hashes: le_u32(&bytes[14..18]),
        seed: u64::from_le_bytes(bytes[18..26].try_into().expect("8 bytes")),
        counter_width,
    };
    validate(&header)?;
    Ok(header)
}

fn validate(h: &Header) -> Result<(), WireError> {
    let fail = |msg: &str| Err(WireError::Inconsistent(format!("{} {msg}", h.kind.name())));
    if h.width == 0 || h.depth == 0 || h.hashes == 0 {
        return fail("with a zero dimension");
    }
    match h.kind {
        SketchKind::Bloom if h.counter_width != CounterWidth::Bit => fail("needs packed bits"),
        SketchKind::Counting | SketchKind::CountMin if h.counter_width != CounterWidth::U32 => {
            fail("needs 32-bit counters")
        }
        SketchKind::Bloom | SketchKind::Counting if h.depth != 1 => fail("with depth != 1"),
        SketchKind::CountMin if h.hashes != 1 => fail("with hash count != 1"),
        _ => Ok(()),
    }
}

pub fn decode(bytes: &[u8]) -> Result<SketchEnvelope, WireError> {
    let header = decode_header(bytes)?;
    let expected = envelope_len(&header);
    let actual = bytes.len() as u64;
    if actual < expected {
        return Err(WireError::Truncated { expected, actual });
    }
    if actual > expected {
        return Err(WireError::TrailingBytes { expected, actual });
    }
    let payload = &bytes[HEADER_LEN..];
    let counters = || -> Vec<u32> { payload.chunks_exact(4).map(le_u32).collect() };
    let inconsistent = |e: crate::Error| WireError::Inconsistent(e.to_string());
    let sketch = match header.kind {
        SketchKind::Bloom => {
            let params = FilterParams::new(header.width, header.hashes, header.seed)
                .map_err(inconsistent)?;
            AnySketch::Bloom(BloomFilter::from_packed_bytes(params, payload).map_err(inconsistent)?)
        }
        SketchKind::Counting => {
            let params = FilterParams::new(header.width, header.hashes, header.seed)
                .map_err(inconsistent)?;
            AnySketch::Counting(
                CountingBloomFilter::from_counters(params, counters()).map_err(inconsistent)?,
            )
        }
        SketchKind::CountMin => {
            let params =
                CmsParams::new(header.width, header.depth, header.seed).map_err(inconsistent)?;
            AnySketch::CountMin(
                CountMinSketch::from_table(params, counters()).map_err(inconsistent)?,
            )
        }
    };
    Ok(SketchEnvelope { header, sketch })
}

/// Witness iff kind, dimensions, hash count, seed and counter width agree;
/// otherwise the list of differing fields.
pub fn compatibility_check(a: &Header, b: &Header) -> Result<CompatibilityWitness, Mismatch> {
    check_compatible(a, b)
}
