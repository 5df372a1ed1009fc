//! Set file formats.
//!
//! Text: a `gf2set n=<n>` header, then one lowercase hex vector per line in
//! ascending order. Binary: `n` as 8 little-endian bytes, then the `2ⁿ`-bit
//! membership map, least-significant bit first, padded to whole bytes.

use std::fmt::Write as _;

use crate::error::{LabError, Result};

use super::set::Gf2Set;

const HEADER: &str = "gf2set n=";

impl Gf2Set {
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(16 + 8 * self.len() as usize);
        let _ = writeln!(out, "{HEADER}{}", self.dim());
        for x in self.iter() {
            let _ = writeln!(out, "{x:x}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| LabError::Parse("missing header".into()))?;
        let n = parse_header(header)?;
        let mut set = Gf2Set::empty(n)?;
        for line in lines {
            let x = u64::from_str_radix(line, 16)
                .map_err(|e| LabError::Parse(format!("bad vector {line:?}: {e}")))?;
            if !set.insert(x)? {
                return Err(LabError::Parse(format!("duplicate vector {line}")));
            }
        }
        Ok(set)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = byte_len(self.dim());
        let mut out = Vec::with_capacity(8 + nbytes);
        out.extend_from_slice(&(self.dim() as u64).to_le_bytes());
        let body = self.words().iter().flat_map(|w| w.to_le_bytes());
        out.extend(body.take(nbytes));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 {
            return Err(LabError::Parse("binary set shorter than its header".into()));
        }
        let n64 = u64::from_le_bytes(bytes[..8].try_into().expect("eight bytes"));
        let n = u32::try_from(n64).map_err(|_| LabError::Parse(format!("dimension {n64}")))?;
        let body = &bytes[8..];
        if body.len() != byte_len(n.min(63)) {
            return Err(LabError::Parse(format!(
                "expected {} bitmap bytes for n = {n}, got {}",
                byte_len(n.min(63)),
                body.len()
            )));
        }
        let words: Vec<u64> = body
            .chunks(8)
            .map(|c| {
                let mut buf = [0u8; 8];
                buf[..c.len()].copy_from_slice(c);
                u64::from_le_bytes(buf)
            })
            .collect();
        Gf2Set::from_words(n, words)
    }
}

impl Gf2Set {
    /// Reads a set file in either format, detected from the header.
    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes =
            std::fs::read(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        if is_text_format(&bytes) {
            let text = std::str::from_utf8(&bytes).map_err(|e| LabError::Parse(e.to_string()))?;
            Gf2Set::from_text(text)
        } else {
            Gf2Set::from_bytes(&bytes)
        }
    }
}

fn byte_len(n: u32) -> usize {
    (1usize << n).div_ceil(8)
}

fn parse_header(line: &str) -> Result<u32> {
    line.strip_prefix(HEADER)
        .and_then(|rest| rest.trim().parse::<u32>().ok())
        .ok_or_else(|| LabError::Parse(format!("bad header {line:?}")))
}

/// Whether `bytes` look like the text format.
pub fn is_text_format(bytes: &[u8]) -> bool {
    bytes.starts_with(HEADER.as_bytes())
}
