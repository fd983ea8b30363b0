//! Coded concepts and the small built-in terminology tables.
//!
//! Two concepts are the same concept when their code value, coding scheme
//! designator and coding scheme version agree; the code meaning is only a
//! label and never takes part in comparison.

mod registry;

use std::fmt;
use std::hash::{Hash, Hasher};

use crate::dataset::{tags, DataSet, VR};

pub use registry::{codes, lookup, registry, Code, CodeRegistry};

/// Longest code value that fits the short Code Value attribute.
pub const SHORT_CODE_MAX: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodingError {
    #[error("unknown coding scheme {0:?}")]
    UnknownScheme(String),
    #[error("no code {key:?} in coding scheme {scheme}")]
    UnknownCode { scheme: String, key: String },
    #[error("malformed code: {0}")]
    Malformed(String),
}

/// A (code value, coding scheme designator, code meaning[, version]) concept.
#[derive(Debug, Clone)]
pub struct CodedConcept {
    value: String,
    scheme: String,
    meaning: String,
    version: Option<String>,
}

impl CodedConcept {
    /// # Panics
    ///
    /// If `value` or `scheme` is empty; use [`CodedConcept::try_new`] for
    /// untrusted input.
    pub fn new(
        value: impl Into<String>,
        scheme: impl Into<String>,
        meaning: impl Into<String>,
    ) -> Self {
        Self::try_new(value, scheme, meaning).expect("code value and scheme must be non-empty")
    }

    pub fn try_new(
        value: impl Into<String>,
        scheme: impl Into<String>,
        meaning: impl Into<String>,
    ) -> Result<Self, CodingError> {
        let value = value.into();
        let scheme = scheme.into();
        if value.is_empty() {
            return Err(CodingError::Malformed("empty code value".into()));
        }
        if scheme.is_empty() {
            return Err(CodingError::Malformed(format!(
                "empty coding scheme designator for code {value:?}"
            )));
        }
        Ok(CodedConcept {
            value,
            scheme,
            meaning: meaning.into(),
            version: None,
        })
    }

    pub fn with_version(mut self, version: impl Into<String>) -> Self {
        self.version = Some(version.into());
        self
    }

    pub fn value(&self) -> &str {
        &self.value
    }

    pub fn scheme(&self) -> &str {
        &self.scheme
    }

    pub fn meaning(&self) -> &str {
        &self.meaning
    }

    pub fn version(&self) -> Option<&str> {
        self.version.as_deref()
    }

    /// Whether the value needs the Long Code Value attribute.
    pub fn is_long(&self) -> bool {
        self.value.chars().count() > SHORT_CODE_MAX
    }

    /// Lenient match used by filters: a version only matters when both
    /// sides carry one.
    pub fn matches(&self, other: &CodedConcept) -> bool {
        self.value == other.value
            && self.scheme == other.scheme
            && match (&self.version, &other.version) {
                (Some(a), Some(b)) => a == b,
                _ => true,
            }
    }

    /// Serializes to the code sequence item attributes.
    pub fn to_items(&self) -> DataSet {
        let mut ds = DataSet::new();
        if self.is_long() {
            ds.set_text(tags::LONG_CODE_VALUE, VR::UC, &self.value);
        } else {
            ds.set_text(tags::CODE_VALUE, VR::SH, &self.value);
        }
        ds.set_text(tags::CODING_SCHEME_DESIGNATOR, VR::SH, &self.scheme);
        if let Some(version) = &self.version {
            ds.set_text(tags::CODING_SCHEME_VERSION, VR::SH, version);
        }
        ds.set_text(tags::CODE_MEANING, VR::LO, &self.meaning);
        ds
    }

    pub fn from_items(ds: &DataSet) -> Result<Self, CodingError> {
        let value = ds
            .string(tags::CODE_VALUE)
            .or_else(|| ds.string(tags::LONG_CODE_VALUE))
            .or_else(|| ds.string(tags::URN_CODE_VALUE))
            .filter(|v| !v.is_empty())
            .ok_or_else(|| CodingError::Malformed("code item has no code value".into()))?;
        let scheme = ds
            .string(tags::CODING_SCHEME_DESIGNATOR)
            .filter(|v| !v.is_empty())
            .ok_or_else(|| {
                CodingError::Malformed(format!("code {value:?} has no coding scheme designator"))
            })?;
        let meaning = ds.string(tags::CODE_MEANING).unwrap_or_default();
        let mut concept = CodedConcept::try_new(value, scheme, meaning)?;
        concept.version = ds
            .string(tags::CODING_SCHEME_VERSION)
            .filter(|v| !v.is_empty())
            .map(str::to_string);
        Ok(concept)
    }

    /// Meaning-preserving comparison, for round-trip checks.
    pub fn identical(&self, other: &CodedConcept) -> bool {
        self == other && self.meaning == other.meaning
    }
}

/// Equality over code value, scheme designator and scheme version.
pub fn concept_equals(a: &CodedConcept, b: &CodedConcept) -> bool {
    a.value == b.value && a.scheme == b.scheme && a.version == b.version
}

impl PartialEq for CodedConcept {
    fn eq(&self, other: &Self) -> bool {
        concept_equals(self, other)
    }
}

impl Eq for CodedConcept {}

impl Hash for CodedConcept {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.value.hash(state);
        self.scheme.hash(state);
        self.version.hash(state);
    }
}

impl fmt::Display for CodedConcept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, \"{}\")", self.value, self.scheme, self.meaning)
    }
}

impl From<Code> for CodedConcept {
    fn from(code: Code) -> Self {
        code.concept()
    }
}

/// Encodes a concept as the single item of a code sequence attribute.
pub fn code_sequence(concept: &CodedConcept) -> Vec<DataSet> {
    vec![concept.to_items()]
}

/// Decodes the first item of a code sequence attribute.
pub fn concept_at(
    ds: &DataSet,
    tag: crate::dataset::Tag,
) -> Result<Option<CodedConcept>, CodingError> {
    ds.item(tag).map(CodedConcept::from_items).transpose()
}
