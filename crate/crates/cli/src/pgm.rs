//! Binary PGM (P5) images with 8-bit samples.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u8,
    /// Row-major samples.
    pub data: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmError(String);

impl fmt::Display for PgmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PGM: {}", self.0)
    }
}

fn err(msg: impl Into<String>) -> PgmError {
    PgmError(msg.into())
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&b| b != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, name: &str) -> Result<usize, PgmError> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(format!("bad {name}")))
    }
}

impl Pgm {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Self {
        assert_eq!(data.len(), width * height);
        Pgm {
            width,
            height,
            maxval: 255,
            data,
        }
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, PgmError> {
        if !bytes.starts_with(b"P5") {
            return Err(err("not a binary PGM (missing P5 magic)"));
        }
        let mut h = Header { bytes, pos: 2 };
        let width = h.number("width")?;
        let height = h.number("height")?;
        let maxval = h.number("maxval")?;
        if !(1..=255).contains(&maxval) {
            return Err(err(format!(
                "maxval {maxval} unsupported; only 8-bit samples are read"
            )));
        }
        if !bytes.get(h.pos).is_some_and(u8::is_ascii_whitespace) {
            return Err(err("header not terminated by whitespace"));
        }
        let start = h.pos + 1;
        let n = width * height;
        let data = bytes.get(start..start + n).ok_or_else(|| {
            err(format!(
                "expected {n} samples, found {}",
                bytes.len().saturating_sub(start)
            ))
        })?;
        if let Some(&v) = data.iter().find(|&&v| usize::from(v) > maxval) {
            return Err(err(format!("sample {v} exceeds maxval {maxval}")));
        }
        Ok(Pgm {
            width,
            height,
            maxval: maxval as u8,
            data: data.to_vec(),
        })
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n{}\n", self.width, self.height, self.maxval).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }
}
