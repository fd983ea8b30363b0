use super::decimal::DecimalString;
use super::part10::TransferSyntax;
use super::{dictionary, tags, DataElement, DataSet, Tag, Value, ValueKind, VR};

const UNDEFINED_LENGTH: u32 = 0xFFFF_FFFF;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("stream truncated at byte offset {offset}: needed {needed} more bytes")]
    Truncated { offset: usize, needed: usize },
    #[error("element {tag} at byte offset {offset} declares length {length} but only {available} bytes remain")]
    LengthOverrun {
        tag: Tag,
        offset: usize,
        length: u32,
        available: usize,
    },
    #[error("element {tag} at byte offset {offset} has undefined length but is not a sequence")]
    UndefinedLength { tag: Tag, offset: usize },
    #[error("element {tag} at byte offset {offset} has unrecognised VR {vr:?}")]
    InvalidVr {
        tag: Tag,
        offset: usize,
        vr: [u8; 2],
    },
    #[error("element {tag} at byte offset {offset}: {reason}")]
    InvalidValue {
        tag: Tag,
        offset: usize,
        reason: String,
    },
    #[error("unexpected {tag} at byte offset {offset}")]
    UnexpectedTag { tag: Tag, offset: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("element {tag}: {reason}")]
    InvalidValue { tag: Tag, reason: String },
    #[error("element {tag}: VR {vr} cannot hold a {found:?} value")]
    ValueKind { tag: Tag, vr: VR, found: ValueKind },
    #[error("element {tag}: value length {length} exceeds the {max}-byte limit of VR {vr}")]
    TooLong {
        tag: Tag,
        vr: VR,
        length: usize,
        max: usize,
    },
    #[error("private element {tag} cannot be written")]
    PrivateTag { tag: Tag },
    #[error("transfer syntax {0} is read-only")]
    UnsupportedWriteSyntax(String),
}

/// Decodes a stream of data elements in the given transfer syntax.
pub fn decode_dataset(bytes: &[u8], syntax: TransferSyntax) -> Result<DataSet, DecodeError> {
    decode_at(bytes, syntax, 0)
}

pub(crate) fn decode_at(
    bytes: &[u8],
    syntax: TransferSyntax,
    base: usize,
) -> Result<DataSet, DecodeError> {
    let mut reader = Reader {
        data: bytes,
        pos: 0,
        base,
        explicit: syntax.is_explicit_vr(),
    };
    reader.read_dataset(bytes.len(), false)
}

/// Encodes a data set with defined-length sequences and even value lengths.
pub fn encode_dataset(ds: &DataSet, syntax: TransferSyntax) -> Result<Vec<u8>, EncodeError> {
    if !syntax.is_writable() {
        return Err(EncodeError::UnsupportedWriteSyntax(
            syntax.uid().to_string(),
        ));
    }
    let mut out = Vec::new();
    write_dataset(ds, &mut out)?;
    Ok(out)
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
    base: usize,
    explicit: bool,
}

impl<'a> Reader<'a> {
    fn offset(&self) -> usize {
        self.base + self.pos
    }

    fn take(&mut self, n: usize, limit: usize) -> Result<&'a [u8], DecodeError> {
        if self.pos + n > limit {
            return Err(DecodeError::Truncated {
                offset: self.offset(),
                needed: self.pos + n - limit,
            });
        }
        let slice = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u16(&mut self, limit: usize) -> Result<u16, DecodeError> {
        let b = self.take(2, limit)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self, limit: usize) -> Result<u32, DecodeError> {
        let b = self.take(4, limit)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn tag(&mut self, limit: usize) -> Result<Tag, DecodeError> {
        let group = self.u16(limit)?;
        let element = self.u16(limit)?;
        Ok(Tag::new(group, element))
    }

    /// Reads elements until `limit`, or until an item delimiter when
    /// `delimited` is set.
    fn read_dataset(&mut self, limit: usize, delimited: bool) -> Result<DataSet, DecodeError> {
        let mut ds = DataSet::new();
        loop {
            if self.pos >= limit {
                if delimited {
                    return Err(DecodeError::Truncated {
                        offset: self.offset(),
                        needed: 8,
                    });
                }
                return Ok(ds);
            }
            let start = self.offset();
            let tag = self.tag(limit)?;
            if tag == tags::ITEM_DELIMITATION && delimited {
                self.u32(limit)?;
                return Ok(ds);
            }
            if tag.group == 0xFFFE {
                return Err(DecodeError::UnexpectedTag { tag, offset: start });
            }
            let element = self.read_element_body(tag, start, limit)?;
            ds.put(element);
        }
    }

    fn read_element_body(
        &mut self,
        tag: Tag,
        start: usize,
        limit: usize,
    ) -> Result<DataElement, DecodeError> {
        let (vr, length) = if self.explicit {
            let raw = self.take(2, limit)?;
            let raw = [raw[0], raw[1]];
            let vr = VR::from_bytes(raw).ok_or(DecodeError::InvalidVr {
                tag,
                offset: start,
                vr: raw,
            })?;
            let length = if vr.has_long_length() {
                self.take(2, limit)?;
                self.u32(limit)?
            } else {
                u32::from(self.u16(limit)?)
            };
            (vr, length)
        } else {
            let length = self.u32(limit)?;
            let vr = match dictionary::vr_of(tag) {
                Some(vr) => vr,
                None if length == UNDEFINED_LENGTH => VR::SQ,
                None => VR::UN,
            };
            (vr, length)
        };

        if vr == VR::SQ {
            let items = self.read_items(tag, start, length, limit)?;
            return Ok(DataElement::new(tag, vr, Value::Sequence(items)));
        }
        if length == UNDEFINED_LENGTH {
            return Err(DecodeError::UndefinedLength { tag, offset: start });
        }
        let available = limit.saturating_sub(self.pos);
        if length as usize > available {
            return Err(DecodeError::LengthOverrun {
                tag,
                offset: start,
                length,
                available,
            });
        }
        let bytes = self.take(length as usize, limit)?;
        let value = decode_value(vr, bytes).map_err(|reason| DecodeError::InvalidValue {
            tag,
            offset: start,
            reason,
        })?;
        Ok(DataElement::new(tag, vr, value))
    }

    fn read_items(
        &mut self,
        tag: Tag,
        start: usize,
        length: u32,
        limit: usize,
    ) -> Result<Vec<DataSet>, DecodeError> {
        let seq_limit = if length == UNDEFINED_LENGTH {
            limit
        } else {
            let available = limit.saturating_sub(self.pos);
            if length as usize > available {
                return Err(DecodeError::LengthOverrun {
                    tag,
                    offset: start,
                    length,
                    available,
                });
            }
            self.pos + length as usize
        };
        let mut items = Vec::new();
        loop {
            if length != UNDEFINED_LENGTH && self.pos >= seq_limit {
                return Ok(items);
            }
            let item_start = self.offset();
            let item_tag = self.tag(seq_limit)?;
            let item_len = self.u32(seq_limit)?;
            if item_tag == tags::SEQUENCE_DELIMITATION && length == UNDEFINED_LENGTH {
                return Ok(items);
            }
            if item_tag != tags::ITEM {
                return Err(DecodeError::UnexpectedTag {
                    tag: item_tag,
                    offset: item_start,
                });
            }
            let item = if item_len == UNDEFINED_LENGTH {
                self.read_dataset(seq_limit, true)?
            } else {
                let available = seq_limit.saturating_sub(self.pos);
                if item_len as usize > available {
                    return Err(DecodeError::LengthOverrun {
                        tag: item_tag,
                        offset: item_start,
                        length: item_len,
                        available,
                    });
                }
                let end = self.pos + item_len as usize;
                let item = self.read_dataset(end, false)?;
                self.pos = end;
                item
            };
            items.push(item);
        }
    }
}

fn decode_text(bytes: &[u8]) -> Result<String, String> {
    let s = std::str::from_utf8(bytes).map_err(|e| format!("invalid UTF-8: {e}"))?;
    Ok(s.trim_end_matches([' ', '\0']).to_string())
}

fn split_values(s: &str) -> Vec<String> {
    if s.is_empty() {
        Vec::new()
    } else {
        s.split('\\').map(str::to_string).collect()
    }
}

fn chunks<const N: usize>(
    bytes: &[u8],
    vr: VR,
) -> Result<impl Iterator<Item = [u8; N]> + '_, String> {
    if !bytes.len().is_multiple_of(N) {
        return Err(format!(
            "{vr} length {} is not a multiple of {N}",
            bytes.len()
        ));
    }
    Ok(bytes.chunks_exact(N).map(|c| {
        let mut a = [0u8; N];
        a.copy_from_slice(c);
        a
    }))
}

fn decode_value(vr: VR, bytes: &[u8]) -> Result<Value, String> {
    let value = match vr.kind() {
        ValueKind::Text => {
            let text = decode_text(bytes)?;
            if vr.is_single_valued_text() {
                if text.is_empty() {
                    Value::Text(Vec::new())
                } else {
                    Value::Text(vec![text])
                }
            } else {
                Value::Text(split_values(&text))
            }
        }
        ValueKind::PersonName => Value::PersonName(split_values(&decode_text(bytes)?)),
        ValueKind::Uid => Value::Uid(split_values(&decode_text(bytes)?)),
        ValueKind::Decimal => {
            let text = decode_text(bytes)?;
            let values = split_values(&text)
                .iter()
                .map(|v| DecimalString::new(v).map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            Value::Decimal(values)
        }
        ValueKind::Integer => match vr {
            VR::IS => {
                let text = decode_text(bytes)?;
                let values = split_values(&text)
                    .iter()
                    .map(|v| {
                        v.trim()
                            .parse::<i64>()
                            .map_err(|_| format!("{v:?} is not an integer string"))
                    })
                    .collect::<Result<_, _>>()?;
                Value::Int(values)
            }
            VR::US => Value::Int(
                chunks::<2>(bytes, vr)?
                    .map(|c| i64::from(u16::from_le_bytes(c)))
                    .collect(),
            ),
            VR::SS => Value::Int(
                chunks::<2>(bytes, vr)?
                    .map(|c| i64::from(i16::from_le_bytes(c)))
                    .collect(),
            ),
            VR::UL => Value::Int(
                chunks::<4>(bytes, vr)?
                    .map(|c| i64::from(u32::from_le_bytes(c)))
                    .collect(),
            ),
            VR::SL => Value::Int(
                chunks::<4>(bytes, vr)?
                    .map(|c| i64::from(i32::from_le_bytes(c)))
                    .collect(),
            ),
            _ => unreachable!("integer kinds are IS, US, SS, UL, SL"),
        },
        ValueKind::Float => match vr {
            VR::FL => Value::Float(
                chunks::<4>(bytes, vr)?
                    .map(|c| f64::from(f32::from_le_bytes(c)))
                    .collect(),
            ),
            _ => Value::Float(chunks::<8>(bytes, vr)?.map(f64::from_le_bytes).collect()),
        },
        ValueKind::Tag => Value::Tags(
            chunks::<4>(bytes, vr)?
                .map(|c| {
                    Tag::new(
                        u16::from_le_bytes([c[0], c[1]]),
                        u16::from_le_bytes([c[2], c[3]]),
                    )
                })
                .collect(),
        ),
        ValueKind::Bytes => Value::Bytes(bytes.to_vec()),
        ValueKind::Sequence => unreachable!("sequences are decoded as items"),
    };
    Ok(value)
}

fn write_dataset(ds: &DataSet, out: &mut Vec<u8>) -> Result<(), EncodeError> {
    for element in ds.iter() {
        write_element(element, out)?;
    }
    Ok(())
}

fn write_header(tag: Tag, vr: VR, length: usize, out: &mut Vec<u8>) -> Result<(), EncodeError> {
    out.extend_from_slice(&tag.group.to_le_bytes());
    out.extend_from_slice(&tag.element.to_le_bytes());
    out.extend_from_slice(vr.as_str().as_bytes());
    if vr.has_long_length() {
        let length = u32::try_from(length)
            .ok()
            .filter(|&l| l != UNDEFINED_LENGTH)
            .ok_or(EncodeError::TooLong {
                tag,
                vr,
                length,
                max: (UNDEFINED_LENGTH - 1) as usize,
            })?;
        out.extend_from_slice(&[0, 0]);
        out.extend_from_slice(&length.to_le_bytes());
    } else {
        let length = u16::try_from(length).map_err(|_| EncodeError::TooLong {
            tag,
            vr,
            length,
            max: 0xFFFE,
        })?;
        out.extend_from_slice(&length.to_le_bytes());
    }
    Ok(())
}

fn write_element(element: &DataElement, out: &mut Vec<u8>) -> Result<(), EncodeError> {
    let DataElement { tag, vr, value } = element;
    let (tag, vr) = (*tag, *vr);
    if tag.is_private() {
        return Err(EncodeError::PrivateTag { tag });
    }
    if value.kind() != vr.kind() {
        return Err(EncodeError::ValueKind {
            tag,
            vr,
            found: value.kind(),
        });
    }
    if let Value::Sequence(items) = value {
        let mut body = Vec::new();
        for item in items {
            let mut encoded = Vec::new();
            write_dataset(item, &mut encoded)?;
            let len = u32::try_from(encoded.len()).map_err(|_| EncodeError::TooLong {
                tag,
                vr,
                length: encoded.len(),
                max: (UNDEFINED_LENGTH - 1) as usize,
            })?;
            body.extend_from_slice(&tags::ITEM.group.to_le_bytes());
            body.extend_from_slice(&tags::ITEM.element.to_le_bytes());
            body.extend_from_slice(&len.to_le_bytes());
            body.extend_from_slice(&encoded);
        }
        write_header(tag, vr, body.len(), out)?;
        out.extend_from_slice(&body);
        return Ok(());
    }
    let mut bytes = encode_value(tag, vr, value)?;
    if bytes.len() % 2 == 1 {
        bytes.push(vr.padding());
    }
    write_header(tag, vr, bytes.len(), out)?;
    out.extend_from_slice(&bytes);
    Ok(())
}

fn invalid(tag: Tag, reason: impl Into<String>) -> EncodeError {
    EncodeError::InvalidValue {
        tag,
        reason: reason.into(),
    }
}

fn check_text_values(tag: Tag, vr: VR, values: &[String]) -> Result<(), EncodeError> {
    if vr.is_single_valued_text() && values.len() > 1 {
        return Err(invalid(tag, format!("{vr} holds a single value")));
    }
    for v in values {
        if !vr.is_single_valued_text() && v.contains('\\') {
            return Err(invalid(tag, format!("value {v:?} contains a backslash")));
        }
        if let Some(max) = vr.max_value_len() {
            let len = v.chars().count();
            if len > max {
                return Err(EncodeError::TooLong {
                    tag,
                    vr,
                    length: len,
                    max,
                });
            }
        }
    }
    Ok(())
}

fn encode_value(tag: Tag, vr: VR, value: &Value) -> Result<Vec<u8>, EncodeError> {
    let bytes = match value {
        Value::Text(values) | Value::PersonName(values) => {
            check_text_values(tag, vr, values)?;
            values.join("\\").into_bytes()
        }
        Value::Uid(values) => {
            check_text_values(tag, vr, values)?;
            for uid in values {
                if !crate::uid::is_valid_uid(uid) {
                    return Err(invalid(tag, format!("{uid:?} is not a valid UID")));
                }
            }
            values.join("\\").into_bytes()
        }
        Value::Decimal(values) => values
            .iter()
            .map(DecimalString::as_str)
            .collect::<Vec<_>>()
            .join("\\")
            .into_bytes(),
        Value::Int(values) => encode_ints(tag, vr, values)?,
        Value::Float(values) => {
            let mut out = Vec::new();
            for &v in values {
                if vr == VR::FL {
                    out.extend_from_slice(&(v as f32).to_le_bytes());
                } else {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
            out
        }
        Value::Tags(values) => values
            .iter()
            .flat_map(|t| {
                let mut b = t.group.to_le_bytes().to_vec();
                b.extend_from_slice(&t.element.to_le_bytes());
                b
            })
            .collect(),
        Value::Bytes(bytes) => {
            let unit = match vr {
                VR::OW => 2,
                VR::OF => 4,
                VR::OD => 8,
                _ => 1,
            };
            if bytes.len() % unit != 0 {
                return Err(invalid(
                    tag,
                    format!("{vr} length {} is not a multiple of {unit}", bytes.len()),
                ));
            }
            bytes.clone()
        }
        Value::Sequence(_) => unreachable!("sequences are written as items"),
    };
    Ok(bytes)
}

fn encode_ints(tag: Tag, vr: VR, values: &[i64]) -> Result<Vec<u8>, EncodeError> {
    let range = |lo: i64, hi: i64| {
        values
            .iter()
            .find(|&&v| v < lo || v > hi)
            .map_or(Ok(()), |v| {
                Err(invalid(tag, format!("{v} out of range for {vr}")))
            })
    };
    let mut out = Vec::new();
    match vr {
        VR::IS => {
            range(i64::from(i32::MIN), i64::from(i32::MAX))?;
            let text: Vec<String> = values.iter().map(i64::to_string).collect();
            out = text.join("\\").into_bytes();
        }
        VR::US => {
            range(0, i64::from(u16::MAX))?;
            for &v in values {
                out.extend_from_slice(&(v as u16).to_le_bytes());
            }
        }
        VR::SS => {
            range(i64::from(i16::MIN), i64::from(i16::MAX))?;
            for &v in values {
                out.extend_from_slice(&(v as i16).to_le_bytes());
            }
        }
        VR::UL => {
            range(0, i64::from(u32::MAX))?;
            for &v in values {
                out.extend_from_slice(&(v as u32).to_le_bytes());
            }
        }
        VR::SL => {
            range(i64::from(i32::MIN), i64::from(i32::MAX))?;
            for &v in values {
                out.extend_from_slice(&(v as i32).to_le_bytes());
            }
        }
        _ => unreachable!("integer kinds are IS, US, SS, UL, SL"),
    }
    Ok(out)
}
