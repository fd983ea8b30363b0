//! In-memory DICOM data sets and the Part 10 codec underneath every
//! derived object in this crate.
//!
//! A [`DataSet`] is an ordered map from [`Tag`] to [`DataElement`]. Values
//! stay close to their wire form: text is kept as strings, DS as
//! [`DecimalString`], and bulk data as raw bytes.

mod codec;
mod decimal;
pub mod dictionary;
mod part10;
pub mod tags;
mod vr;

use std::collections::BTreeMap;
use std::fmt;

pub use codec::{decode_dataset, encode_dataset, DecodeError, EncodeError};
pub use decimal::{DecimalError, DecimalString};
pub use part10::{read_part10, write_part10, FileMeta, Part10Error, TransferSyntax};
pub use vr::{ValueKind, VR};

/// A data element tag, ordered by (group, element).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tag {
    pub group: u16,
    pub element: u16,
}

impl Tag {
    pub const fn new(group: u16, element: u16) -> Self {
        Tag { group, element }
    }

    pub fn is_private(self) -> bool {
        self.group % 2 == 1
    }

    pub fn to_u32(self) -> u32 {
        (u32::from(self.group) << 16) | u32::from(self.element)
    }

    pub fn from_u32(v: u32) -> Self {
        Tag::new((v >> 16) as u16, v as u16)
    }

    /// Parses `GGGGEEEE`, `(GGGG,EEEE)` or `GGGG,EEEE` hexadecimal forms.
    pub fn parse_hex(s: &str) -> Option<Tag> {
        let cleaned: String = s
            .chars()
            .filter(|c| !matches!(c, '(' | ')' | ',' | ' '))
            .collect();
        if cleaned.len() != 8 || !cleaned.chars().all(|c| c.is_ascii_hexdigit()) {
            return None;
        }
        u32::from_str_radix(&cleaned, 16).ok().map(Tag::from_u32)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:04X},{:04X})", self.group, self.element)
    }
}

/// Payload of a data element.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    /// AE, AS, CS, DA, DT, LO, LT, SH, ST, TM, UC, UR, UT.
    Text(Vec<String>),
    PersonName(Vec<String>),
    Uid(Vec<String>),
    Decimal(Vec<DecimalString>),
    /// IS, SL, SS, UL, US.
    Int(Vec<i64>),
    /// FD, FL.
    Float(Vec<f64>),
    Tags(Vec<Tag>),
    /// OB, OD, OF, OW, UN.
    Bytes(Vec<u8>),
    Sequence(Vec<DataSet>),
}

impl Value {
    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Text(_) => ValueKind::Text,
            Value::PersonName(_) => ValueKind::PersonName,
            Value::Uid(_) => ValueKind::Uid,
            Value::Decimal(_) => ValueKind::Decimal,
            Value::Int(_) => ValueKind::Integer,
            Value::Float(_) => ValueKind::Float,
            Value::Tags(_) => ValueKind::Tag,
            Value::Bytes(_) => ValueKind::Bytes,
            Value::Sequence(_) => ValueKind::Sequence,
        }
    }

    /// Number of values (items, for sequences; bytes, for bulk data).
    pub fn multiplicity(&self) -> usize {
        match self {
            Value::Text(v) | Value::PersonName(v) | Value::Uid(v) => v.len(),
            Value::Decimal(v) => v.len(),
            Value::Int(v) => v.len(),
            Value::Float(v) => v.len(),
            Value::Tags(v) => v.len(),
            Value::Bytes(v) => v.len(),
            Value::Sequence(v) => v.len(),
        }
    }

    /// An empty value of the kind `vr` carries.
    pub fn empty(vr: VR) -> Value {
        match vr.kind() {
            ValueKind::Text => Value::Text(Vec::new()),
            ValueKind::PersonName => Value::PersonName(Vec::new()),
            ValueKind::Uid => Value::Uid(Vec::new()),
            ValueKind::Decimal => Value::Decimal(Vec::new()),
            ValueKind::Integer => Value::Int(Vec::new()),
            ValueKind::Float => Value::Float(Vec::new()),
            ValueKind::Tag => Value::Tags(Vec::new()),
            ValueKind::Bytes => Value::Bytes(Vec::new()),
            ValueKind::Sequence => Value::Sequence(Vec::new()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataElement {
    pub tag: Tag,
    pub vr: VR,
    pub value: Value,
}

impl DataElement {
    pub fn new(tag: Tag, vr: VR, value: Value) -> Self {
        DataElement { tag, vr, value }
    }

    pub fn empty(tag: Tag, vr: VR) -> Self {
        DataElement::new(tag, vr, Value::empty(vr))
    }

    pub fn is_empty(&self) -> bool {
        self.value.multiplicity() == 0
    }
}

/// Ordered collection of data elements, at most one per tag.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DataSet {
    elements: BTreeMap<Tag, DataElement>,
}

impl DataSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts an element, returning the one it replaced.
    pub fn put(&mut self, element: DataElement) -> Option<DataElement> {
        self.elements.insert(element.tag, element)
    }

    pub fn get(&self, tag: Tag) -> Option<&DataElement> {
        self.elements.get(&tag)
    }

    pub fn remove(&mut self, tag: Tag) -> Option<DataElement> {
        self.elements.remove(&tag)
    }

    pub fn contains(&self, tag: Tag) -> bool {
        self.elements.contains_key(&tag)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Elements in ascending tag order.
    pub fn iter(&self) -> impl Iterator<Item = &DataElement> {
        self.elements.values()
    }

    /// Maximum sequence nesting depth; 0 for a data set without sequences.
    pub fn depth(&self) -> usize {
        self.iter()
            .filter_map(|e| match &e.value {
                Value::Sequence(items) => {
                    Some(1 + items.iter().map(DataSet::depth).max().unwrap_or(0))
                }
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    // Typed accessors.

    /// First string value of a text, person-name or UID element.
    pub fn string(&self, tag: Tag) -> Option<&str> {
        self.strings(tag)?.first().map(String::as_str)
    }

    pub fn strings(&self, tag: Tag) -> Option<&[String]> {
        match &self.get(tag)?.value {
            Value::Text(v) | Value::PersonName(v) | Value::Uid(v) => Some(v),
            _ => None,
        }
    }

    pub fn int(&self, tag: Tag) -> Option<i64> {
        self.ints(tag)?.first().copied()
    }

    pub fn ints(&self, tag: Tag) -> Option<&[i64]> {
        match &self.get(tag)?.value {
            Value::Int(v) => Some(v),
            _ => None,
        }
    }

    /// Numeric values of a DS, FD or FL element as `f64`.
    pub fn floats(&self, tag: Tag) -> Option<Vec<f64>> {
        match &self.get(tag)?.value {
            Value::Decimal(v) => Some(v.iter().map(DecimalString::to_f64).collect()),
            Value::Float(v) => Some(v.clone()),
            Value::Int(v) => Some(v.iter().map(|&i| i as f64).collect()),
            _ => None,
        }
    }

    pub fn decimals(&self, tag: Tag) -> Option<&[DecimalString]> {
        match &self.get(tag)?.value {
            Value::Decimal(v) => Some(v),
            _ => None,
        }
    }

    pub fn bytes(&self, tag: Tag) -> Option<&[u8]> {
        match &self.get(tag)?.value {
            Value::Bytes(v) => Some(v),
            _ => None,
        }
    }

    pub fn sequence(&self, tag: Tag) -> Option<&[DataSet]> {
        match &self.get(tag)?.value {
            Value::Sequence(v) => Some(v),
            _ => None,
        }
    }

    /// First item of a sequence element.
    pub fn item(&self, tag: Tag) -> Option<&DataSet> {
        self.sequence(tag)?.first()
    }

    // Builders.

    pub fn set_text(&mut self, tag: Tag, vr: VR, value: impl Into<String>) -> &mut Self {
        let value = value.into();
        let value = match vr.kind() {
            ValueKind::PersonName => Value::PersonName(vec![value]),
            ValueKind::Uid => Value::Uid(vec![value]),
            _ => Value::Text(vec![value]),
        };
        self.put(DataElement::new(tag, vr, value));
        self
    }

    pub fn set_strings(&mut self, tag: Tag, vr: VR, values: Vec<String>) -> &mut Self {
        let value = match vr.kind() {
            ValueKind::PersonName => Value::PersonName(values),
            ValueKind::Uid => Value::Uid(values),
            _ => Value::Text(values),
        };
        self.put(DataElement::new(tag, vr, value));
        self
    }

    pub fn set_uid(&mut self, tag: Tag, uid: impl Into<String>) -> &mut Self {
        self.put(DataElement::new(tag, VR::UI, Value::Uid(vec![uid.into()])));
        self
    }

    pub fn set_int(&mut self, tag: Tag, vr: VR, value: i64) -> &mut Self {
        self.put(DataElement::new(tag, vr, Value::Int(vec![value])));
        self
    }

    pub fn set_ints(&mut self, tag: Tag, vr: VR, values: Vec<i64>) -> &mut Self {
        self.put(DataElement::new(tag, vr, Value::Int(values)));
        self
    }

    pub fn set_decimals(&mut self, tag: Tag, values: Vec<DecimalString>) -> &mut Self {
        self.put(DataElement::new(tag, VR::DS, Value::Decimal(values)));
        self
    }

    pub fn set_floats(&mut self, tag: Tag, vr: VR, values: Vec<f64>) -> &mut Self {
        self.put(DataElement::new(tag, vr, Value::Float(values)));
        self
    }

    pub fn set_bytes(&mut self, tag: Tag, vr: VR, bytes: Vec<u8>) -> &mut Self {
        self.put(DataElement::new(tag, vr, Value::Bytes(bytes)));
        self
    }

    pub fn set_sequence(&mut self, tag: Tag, items: Vec<DataSet>) -> &mut Self {
        self.put(DataElement::new(tag, VR::SQ, Value::Sequence(items)));
        self
    }

    pub fn set_empty(&mut self, tag: Tag, vr: VR) -> &mut Self {
        self.put(DataElement::empty(tag, vr));
        self
    }
}

impl FromIterator<DataElement> for DataSet {
    fn from_iter<I: IntoIterator<Item = DataElement>>(iter: I) -> Self {
        let mut ds = DataSet::new();
        for e in iter {
            ds.put(e);
        }
        ds
    }
}

impl<'a> IntoIterator for &'a DataSet {
    type Item = &'a DataElement;
    type IntoIter = std::collections::btree_map::Values<'a, Tag, DataElement>;

    fn into_iter(self) -> Self::IntoIter {
        self.elements.values()
    }
}
