//! `multipart/related` bodies as used by STOW-RS requests and WADO-RS
//! responses.

use rand::Rng;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MultipartError {
    #[error("content type {0:?} is not multipart/related")]
    NotMultipart(String),
    #[error("content type {0:?} has no boundary parameter")]
    NoBoundary(String),
    #[error("body does not start with the boundary delimiter")]
    MissingDelimiter,
    #[error("part {0} has no header terminator")]
    UnterminatedHeaders(usize),
    #[error("body ends without the closing delimiter")]
    Unterminated,
}

/// One body part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Part {
    pub content_type: String,
    pub body: Vec<u8>,
}

impl Part {
    pub fn dicom(body: Vec<u8>) -> Self {
        Part {
            content_type: "application/dicom".into(),
            body,
        }
    }
}

/// A random 32-hex-character boundary.
pub fn boundary() -> String {
    let bytes: [u8; 16] = rand::rng().random();
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// The Content-Type header for a body built with `boundary`.
pub fn content_type(boundary: &str, part_type: &str) -> String {
    format!("multipart/related; type=\"{part_type}\"; boundary={boundary}")
}

pub fn encode(parts: &[Part], boundary: &str) -> Vec<u8> {
    let mut out = Vec::new();
    for p in parts {
        out.extend_from_slice(
            format!("--{boundary}\r\nContent-Type: {}\r\n\r\n", p.content_type).as_bytes(),
        );
        out.extend_from_slice(&p.body);
        out.extend_from_slice(b"\r\n");
    }
    out.extend_from_slice(format!("--{boundary}--\r\n").as_bytes());
    out
}

/// Parameter value from a header such as `multipart/related; boundary=x`.
pub fn parameter(header: &str, name: &str) -> Option<String> {
    header.split(';').skip(1).find_map(|p| {
        let (k, v) = p.split_once('=')?;
        k.trim()
            .eq_ignore_ascii_case(name)
            .then(|| v.trim().trim_matches('"').to_string())
    })
}

fn find(hay: &[u8], needle: &[u8], from: usize) -> Option<usize> {
    hay.get(from..)?
        .windows(needle.len())
        .position(|w| w == needle)
        .map(|i| i + from)
}

/// Splits a body given the value of its Content-Type header.
pub fn decode(body: &[u8], content_type_header: &str) -> Result<Vec<Part>, MultipartError> {
    let media = content_type_header.split(';').next().unwrap_or("").trim();
    if !media.eq_ignore_ascii_case("multipart/related") {
        return Err(MultipartError::NotMultipart(content_type_header.into()));
    }
    let boundary = parameter(content_type_header, "boundary")
        .filter(|b| !b.is_empty())
        .ok_or_else(|| MultipartError::NoBoundary(content_type_header.into()))?;
    let default_type =
        parameter(content_type_header, "type").unwrap_or_else(|| "application/octet-stream".into());
    let delimiter = format!("--{boundary}").into_bytes();
    let separator = [b"\r\n".as_slice(), &delimiter].concat();

    // Any preamble before the first delimiter is ignored.
    let mut pos = find(body, &delimiter, 0).ok_or(MultipartError::MissingDelimiter)?;
    let mut parts = Vec::new();
    loop {
        pos += delimiter.len();
        if body[pos..].starts_with(b"--") {
            return Ok(parts);
        }
        // Skip transport padding and the line break after the delimiter.
        while body.get(pos).is_some_and(|&b| b == b' ' || b == b'\t') {
            pos += 1;
        }
        if body[pos..].starts_with(b"\r\n") {
            pos += 2;
        }
        let header_end = if body[pos..].starts_with(b"\r\n") {
            (pos, 2)
        } else {
            find(body, b"\r\n\r\n", pos)
                .map(|i| (i, 4))
                .ok_or(MultipartError::UnterminatedHeaders(parts.len() + 1))?
        };
        let headers = String::from_utf8_lossy(&body[pos..header_end.0]);
        let content_type = headers
            .lines()
            .find_map(|l| {
                let (k, v) = l.split_once(':')?;
                k.trim()
                    .eq_ignore_ascii_case("content-type")
                    .then(|| v.trim().to_string())
            })
            .unwrap_or_else(|| default_type.clone());
        let start = header_end.0 + header_end.1;
        let end = find(body, &separator, start).ok_or(MultipartError::Unterminated)?;
        parts.push(Part {
            content_type,
            body: body[start..end].to_vec(),
        });
        pos = end + 2;
    }
}
