//! Segmentation images: binary (bit-packed) and fractional segments over
//! the frames of one or more source images.

mod create;
pub mod pack;
mod read;

pub use create::{create_seg, SegMeta};
pub use read::{
    find_segments, label_map, open_seg, segment_pixels, FrameRecord, SegmentFilter, Segmentation,
};

use crate::coding::{code_sequence, concept_at, CodedConcept, CodingError};
use crate::common::{AlgorithmIdentification, IdentityError, TrackingIdentifier};
use crate::dataset::{tags, DataSet, VR};
use crate::geometry::GeometryError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SegError {
    #[error("no source images supplied")]
    MissingSource,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("mask value out of domain: {0}")]
    Domain(String),
    #[error("segment numbering: {0}")]
    Numbering(String),
    #[error("invalid segment description: {0}")]
    Description(String),
    #[error("source geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("source images span more than one study")]
    MixedStudies,
    #[error("SOP class {0:?} is not Segmentation Storage")]
    WrongSopClass(String),
    #[error("malformed segmentation: {0}")]
    Malformed(String),
    #[error("segment {0} is not described in this segmentation")]
    UnknownSegment(u16),
    #[error("source frame {frame} of instance {sop_instance_uid} is not referenced by this segmentation")]
    UnmappedFrame {
        sop_instance_uid: String,
        frame: u32,
    },
    #[error("label maps need a BINARY segmentation; threshold fractional segments first")]
    NotBinary,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Coding(#[from] CodingError),
    #[error(transparent)]
    Identity(#[from] IdentityError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FractionalType {
    Probability,
    Occupancy,
}

impl FractionalType {
    pub fn as_str(self) -> &'static str {
        match self {
            FractionalType::Probability => "PROBABILITY",
            FractionalType::Occupancy => "OCCUPANCY",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentationType {
    Binary,
    Fractional { kind: FractionalType, max_value: u8 },
}

impl SegmentationType {
    /// Fractional probability with the full 8-bit range.
    pub const PROBABILITY: SegmentationType = SegmentationType::Fractional {
        kind: FractionalType::Probability,
        max_value: 255,
    };

    pub fn fractional(kind: FractionalType, max_value: u8) -> Result<Self, SegError> {
        if max_value == 0 {
            return Err(SegError::Domain(
                "maximum fractional value must be 1..255".into(),
            ));
        }
        Ok(SegmentationType::Fractional { kind, max_value })
    }

    pub fn bits_allocated(self) -> u16 {
        match self {
            SegmentationType::Binary => 1,
            SegmentationType::Fractional { .. } => 8,
        }
    }

    /// Stored value of a mask value; `None` if outside the domain.
    pub(crate) fn quantize(self, v: f32) -> Option<u8> {
        match self {
            SegmentationType::Binary if v == 0.0 => Some(0),
            SegmentationType::Binary if v == 1.0 => Some(1),
            SegmentationType::Binary => None,
            SegmentationType::Fractional { max_value, .. } if (0.0..=1.0).contains(&v) => {
                Some((f64::from(v) * f64::from(max_value) + 0.5).floor() as u8)
            }
            SegmentationType::Fractional { .. } => None,
        }
    }

    pub(crate) fn rescale(self, stored: u8) -> f32 {
        match self {
            SegmentationType::Binary => f32::from(stored),
            SegmentationType::Fractional { max_value, .. } => {
                (f64::from(stored) / f64::from(max_value)) as f32
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmType {
    Automatic,
    Semiautomatic,
    Manual,
}

impl AlgorithmType {
    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmType::Automatic => "AUTOMATIC",
            AlgorithmType::Semiautomatic => "SEMIAUTOMATIC",
            AlgorithmType::Manual => "MANUAL",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "AUTOMATIC" => Some(AlgorithmType::Automatic),
            "SEMIAUTOMATIC" => Some(AlgorithmType::Semiautomatic),
            "MANUAL" => Some(AlgorithmType::Manual),
            _ => None,
        }
    }
}

/// One entry of the segment sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentDescription {
    pub number: u16,
    pub label: String,
    pub category: CodedConcept,
    pub property_type: CodedConcept,
    pub algorithm_type: AlgorithmType,
    pub algorithm: Option<AlgorithmIdentification>,
    pub anatomic_site: Option<CodedConcept>,
    pub tracking: Option<TrackingIdentifier>,
    pub description: Option<String>,
}

impl SegmentDescription {
    pub fn new(
        number: u16,
        label: impl Into<String>,
        category: impl Into<CodedConcept>,
        property_type: impl Into<CodedConcept>,
        algorithm_type: AlgorithmType,
    ) -> Self {
        SegmentDescription {
            number,
            label: label.into(),
            category: category.into(),
            property_type: property_type.into(),
            algorithm_type,
            algorithm: None,
            anatomic_site: None,
            tracking: None,
            description: None,
        }
    }

    pub fn with_algorithm(mut self, algorithm: AlgorithmIdentification) -> Self {
        self.algorithm = Some(algorithm);
        self
    }

    pub fn with_tracking(mut self, tracking: TrackingIdentifier) -> Self {
        self.tracking = Some(tracking);
        self
    }

    pub fn validate(&self) -> Result<(), SegError> {
        if self.label.trim().is_empty() {
            return Err(SegError::Description(format!(
                "segment {} has an empty label",
                self.number
            )));
        }
        match (&self.algorithm, self.algorithm_type) {
            (None, AlgorithmType::Automatic | AlgorithmType::Semiautomatic) => {
                return Err(SegError::Description(format!(
                    "segment {} is {} but has no algorithm identification",
                    self.number,
                    self.algorithm_type.as_str()
                )))
            }
            (Some(a), _) => a.validate()?,
            _ => {}
        }
        if let Some(t) = &self.tracking {
            if !crate::uid::is_valid_uid(&t.uid) {
                return Err(SegError::Description(format!(
                    "invalid tracking UID {:?}",
                    t.uid
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn to_item(&self) -> DataSet {
        let mut ds = DataSet::new();
        ds.set_int(tags::SEGMENT_NUMBER, VR::US, i64::from(self.number));
        ds.set_text(tags::SEGMENT_LABEL, VR::LO, &self.label);
        if let Some(d) = &self.description {
            ds.set_text(tags::SEGMENT_DESCRIPTION, VR::ST, d);
        }
        ds.set_sequence(
            tags::SEGMENTED_PROPERTY_CATEGORY_CODE_SEQUENCE,
            code_sequence(&self.category),
        );
        ds.set_sequence(
            tags::SEGMENTED_PROPERTY_TYPE_CODE_SEQUENCE,
            code_sequence(&self.property_type),
        );
        ds.set_text(
            tags::SEGMENT_ALGORITHM_TYPE,
            VR::CS,
            self.algorithm_type.as_str(),
        );
        if let Some(a) = &self.algorithm {
            ds.set_text(tags::SEGMENT_ALGORITHM_NAME, VR::LO, &a.name);
            let mut item = DataSet::new();
            item.set_sequence(
                tags::ALGORITHM_FAMILY_CODE_SEQUENCE,
                code_sequence(&crate::coding::codes::dcm::ARTIFICIAL_INTELLIGENCE.into()),
            );
            item.set_text(tags::ALGORITHM_NAME, VR::LO, &a.name);
            item.set_text(tags::ALGORITHM_VERSION, VR::LO, &a.version);
            if !a.parameters.is_empty() {
                item.set_text(tags::ALGORITHM_PARAMETERS, VR::LT, a.parameters_text());
            }
            ds.set_sequence(
                tags::SEGMENTATION_ALGORITHM_IDENTIFICATION_SEQUENCE,
                vec![item],
            );
        }
        if let Some(site) = &self.anatomic_site {
            ds.set_sequence(tags::ANATOMIC_REGION_SEQUENCE, code_sequence(site));
        }
        if let Some(t) = &self.tracking {
            ds.set_text(
                tags::TRACKING_ID,
                VR::UT,
                t.identifier.as_deref().unwrap_or(&t.uid),
            );
            ds.set_uid(tags::TRACKING_UID, &t.uid);
        }
        ds
    }

    pub(crate) fn from_item(ds: &DataSet) -> Result<Self, SegError> {
        let number = ds
            .int(tags::SEGMENT_NUMBER)
            .and_then(|n| u16::try_from(n).ok())
            .ok_or_else(|| {
                SegError::Malformed("segment item lacks a valid SegmentNumber".into())
            })?;
        let concept = |tag, what: &str| {
            concept_at(ds, tag)?
                .ok_or_else(|| SegError::Malformed(format!("segment {number} lacks {what}")))
        };
        let algorithm_type = ds
            .string(tags::SEGMENT_ALGORITHM_TYPE)
            .and_then(AlgorithmType::parse)
            .ok_or_else(|| {
                SegError::Malformed(format!(
                    "segment {number} lacks a valid SegmentAlgorithmType"
                ))
            })?;
        let algorithm = ds
            .item(tags::SEGMENTATION_ALGORITHM_IDENTIFICATION_SEQUENCE)
            .map(|a| AlgorithmIdentification {
                name: a
                    .string(tags::ALGORITHM_NAME)
                    .or(ds.string(tags::SEGMENT_ALGORITHM_NAME))
                    .unwrap_or_default()
                    .to_string(),
                version: a
                    .string(tags::ALGORITHM_VERSION)
                    .unwrap_or_default()
                    .to_string(),
                parameters: a
                    .string(tags::ALGORITHM_PARAMETERS)
                    .map(AlgorithmIdentification::parse_parameters)
                    .unwrap_or_default(),
            });
        let tracking = ds.string(tags::TRACKING_UID).map(|uid| TrackingIdentifier {
            uid: uid.to_string(),
            identifier: ds.string(tags::TRACKING_ID).map(str::to_string),
        });
        Ok(SegmentDescription {
            number,
            label: ds
                .string(tags::SEGMENT_LABEL)
                .unwrap_or_default()
                .to_string(),
            category: concept(
                tags::SEGMENTED_PROPERTY_CATEGORY_CODE_SEQUENCE,
                "a property category",
            )?,
            property_type: concept(
                tags::SEGMENTED_PROPERTY_TYPE_CODE_SEQUENCE,
                "a property type",
            )?,
            algorithm_type,
            algorithm,
            anatomic_site: concept_at(ds, tags::ANATOMIC_REGION_SEQUENCE)?,
            tracking,
            description: ds.string(tags::SEGMENT_DESCRIPTION).map(str::to_string),
        })
    }
}

/// A frame of a source image, by instance and 1-based frame number.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceFrameRef {
    pub sop_instance_uid: String,
    pub frame_number: u32,
}

impl SourceFrameRef {
    pub fn new(sop_instance_uid: impl Into<String>, frame_number: u32) -> Self {
        SourceFrameRef {
            sop_instance_uid: sop_instance_uid.into(),
            frame_number,
        }
    }
}
