//! On-disk layout of an encoded directory: `header.bin`, `manifest.txt`,
//! optional `coefficients.txt`, and one raw symbol file per node.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub const MAGIC: &[u8; 6] = b"ZZMDS1";
pub const VERSION: u8 = 1;
pub const HEADER_FILE: &str = "header.bin";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const TABLE_FILE: &str = "coefficients.txt";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("bad header: {0}")]
    Header(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("node file {path} has {got} bytes, expected {expected}")]
    Length {
        path: PathBuf,
        got: usize,
        expected: usize,
    },
    #[error("payload digit group {0} does not encode a byte")]
    Payload(u32),
}

pub fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripeFileHeader {
    pub m: u8,
    pub r: u8,
    pub s: u8,
    pub field: String,
    pub scheme: String,
    pub vectors: String,
    pub payload_len: u64,
    pub stripes: u32,
}

impl StripeFileHeader {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&[VERSION, self.m, self.r, self.s]);
        for s in [&self.field, &self.scheme, &self.vectors] {
            out.extend_from_slice(&(s.len() as u16).to_le_bytes());
            out.extend_from_slice(s.as_bytes());
        }
        out.extend_from_slice(&self.payload_len.to_le_bytes());
        out.extend_from_slice(&self.stripes.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<StripeFileHeader, StoreError> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(6)? != MAGIC {
            return Err(StoreError::Header("magic mismatch".into()));
        }
        let [version, m, r, s] = cur.take(4)? else { unreachable!() };
        if *version != VERSION {
            return Err(StoreError::Header(format!("unsupported version {version}")));
        }
        let (m, r, s) = (*m, *r, *s);
        let field = cur.string()?;
        let scheme = cur.string()?;
        let vectors = cur.string()?;
        let payload_len = u64::from_le_bytes(cur.take(8)?.try_into().unwrap());
        let stripes = u32::from_le_bytes(cur.take(4)?.try_into().unwrap());
        if cur.pos != bytes.len() {
            return Err(StoreError::Header("trailing bytes".into()));
        }
        Ok(StripeFileHeader {
            m,
            r,
            s,
            field,
            scheme,
            vectors,
            payload_len,
            stripes,
        })
    }

    pub fn manifest(&self, n: usize, symbol_width: usize) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "format = ZZMDS1 v{VERSION}");
        let _ = writeln!(out, "m = {}\nr = {}\ns = {}", self.m, self.r, self.s);
        let _ = writeln!(out, "field = {}\nscheme = {}", self.field, self.scheme);
        let _ = writeln!(out, "vectors = {}", self.vectors);
        let _ = writeln!(out, "payload_bytes = {}", self.payload_len);
        let _ = writeln!(out, "stripes = {}", self.stripes);
        let _ = writeln!(out, "nodes = {n}\nsymbol_bytes = {symbol_width}");
        out
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], StoreError> {
        let end = self.pos + len;
        let slice = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| StoreError::Header("truncated".into()))?;
        self.pos = end;
        Ok(slice)
    }

    fn string(&mut self) -> Result<String, StoreError> {
        let len = u16::from_le_bytes(self.take(2)?.try_into().unwrap()) as usize;
        String::from_utf8(self.take(len)?.to_vec()).map_err(|_| StoreError::Header("non-UTF-8 string".into()))
    }
}

/// Smallest `d` with `q^d >= 256`.
pub fn digits_per_byte(q: u32) -> usize {
    let mut d = 1;
    let mut span = q as u64;
    while span < 256 {
        span *= q as u64;
        d += 1;
    }
    d
}

/// Each byte becomes `digits_per_byte(q)` base-`q` digits, low digit first.
pub fn bytes_to_symbols(bytes: &[u8], q: u32) -> Vec<u32> {
    let d = digits_per_byte(q);
    let mut out = Vec::with_capacity(bytes.len() * d);
    for &b in bytes {
        let mut v = b as u32;
        for _ in 0..d {
            out.push(v % q);
            v /= q;
        }
    }
    out
}

/// Inverse of [`bytes_to_symbols`] for the first `len` bytes.
pub fn symbols_to_bytes(symbols: &[u32], q: u32, len: usize) -> Result<Vec<u8>, StoreError> {
    let d = digits_per_byte(q);
    symbols
        .chunks(d)
        .take(len)
        .map(|group| {
            let v = group.iter().rev().fold(0u32, |acc, &x| acc * q + x);
            u8::try_from(v).map_err(|_| StoreError::Payload(v))
        })
        .collect()
}

/// Bytes per stored symbol.
pub fn symbol_width(q: u32) -> usize {
    if q <= 256 {
        1
    } else {
        2
    }
}

pub fn node_path(dir: &Path, node: usize) -> PathBuf {
    dir.join(format!("node_{node:02}"))
}

pub fn write_node(path: &Path, symbols: &[u32], width: usize) -> Result<(), StoreError> {
    let bytes: Vec<u8> = if width == 1 {
        symbols.iter().map(|&s| s as u8).collect()
    } else {
        symbols.iter().flat_map(|&s| (s as u16).to_le_bytes()).collect()
    };
    fs::write(path, bytes).map_err(io_err(path))
}

/// `Ok(None)` if the file does not exist.
pub fn read_node(path: &Path, width: usize, count: usize) -> Result<Option<Vec<u32>>, StoreError> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(io_err(path)(e)),
    };
    if bytes.len() != count * width {
        return Err(StoreError::Length {
            path: path.to_path_buf(),
            got: bytes.len(),
            expected: count * width,
        });
    }
    Ok(Some(if width == 1 {
        bytes.iter().map(|&b| b as u32).collect()
    } else {
        bytes.chunks(2).map(|c| u16::from_le_bytes([c[0], c[1]]) as u32).collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> StripeFileHeader {
        StripeFileHeader {
            m: 2,
            r: 2,
            s: 1,
            field: "gf(3)".into(),
            scheme: "cons3".into(),
            vectors: "00,10,01".into(),
            payload_len: 1024,
            stripes: 57,
        }
    }

    #[test]
    fn header_round_trip() {
        let h = header();
        let bytes = h.to_bytes();
        assert_eq!(&bytes[..6], b"ZZMDS1");
        assert_eq!(bytes[6..10], [1, 2, 2, 1]);
        assert_eq!(StripeFileHeader::from_bytes(&bytes).unwrap(), h);
        let n = bytes.len();
        assert_eq!(bytes[n - 4..], 57u32.to_le_bytes());
        assert_eq!(bytes[n - 12..n - 4], 1024u64.to_le_bytes());
    }

    #[test]
    fn header_rejects_damage() {
        let bytes = header().to_bytes();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(StripeFileHeader::from_bytes(&bad).is_err());
        let mut bad = bytes.clone();
        bad[6] = 2;
        assert!(StripeFileHeader::from_bytes(&bad).is_err());
        assert!(StripeFileHeader::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(StripeFileHeader::from_bytes(&long).is_err());
    }

    #[test]
    fn digit_expansion() {
        assert_eq!(digits_per_byte(3), 6);
        assert_eq!(digits_per_byte(9), 3);
        assert_eq!(digits_per_byte(16), 2);
        assert_eq!(digits_per_byte(256), 1);
        assert_eq!(digits_per_byte(65521), 1);
        assert_eq!(bytes_to_symbols(&[255], 3), vec![0, 1, 1, 0, 0, 1]);
        let data: Vec<u8> = (0..=255).collect();
        for q in [2, 3, 5, 7, 9, 16, 257] {
            let sym = bytes_to_symbols(&data, q);
            assert!(sym.iter().all(|&s| s < q));
            assert_eq!(symbols_to_bytes(&sym, q, 256).unwrap(), data);
        }
        assert!(matches!(symbols_to_bytes(&[2, 2, 2, 2, 2, 2], 3, 1), Err(StoreError::Payload(728))));
    }
}
