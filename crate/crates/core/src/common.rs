//! Identification bundles and metadata shared by derived SR and SEG objects.

use crate::dataset::{tags, DataSet, Tag, VR};
use crate::uid::{generate_uid, is_valid_uid};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IdentityError {
    #[error("invalid UID {0:?}")]
    InvalidUid(String),
    #[error("algorithm {0} must not be empty")]
    EmptyAlgorithmField(&'static str),
    #[error("algorithm parameter {0:?} is not of the form key=value")]
    BadParameter(String),
}

/// Identifies an annotated object across documents and creation events.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TrackingIdentifier {
    pub uid: String,
    pub identifier: Option<String>,
}

impl TrackingIdentifier {
    pub fn new(uid: impl Into<String>, identifier: Option<String>) -> Result<Self, IdentityError> {
        let uid = uid.into();
        if !is_valid_uid(&uid) {
            return Err(IdentityError::InvalidUid(uid));
        }
        Ok(TrackingIdentifier { uid, identifier })
    }

    pub fn generate(identifier: Option<String>) -> Self {
        TrackingIdentifier {
            uid: generate_uid(),
            identifier,
        }
    }
}

/// Name, version and parameters of the algorithm that produced an annotation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgorithmIdentification {
    pub name: String,
    pub version: String,
    /// `key=value` strings.
    pub parameters: Vec<String>,
}

impl AlgorithmIdentification {
    pub fn new(name: impl Into<String>, version: impl Into<String>) -> Result<Self, IdentityError> {
        let a = AlgorithmIdentification {
            name: name.into(),
            version: version.into(),
            parameters: Vec::new(),
        };
        a.validate()?;
        Ok(a)
    }

    pub fn with_parameters(mut self, parameters: Vec<String>) -> Result<Self, IdentityError> {
        self.parameters = parameters;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), IdentityError> {
        if self.name.trim().is_empty() {
            return Err(IdentityError::EmptyAlgorithmField("name"));
        }
        if self.version.trim().is_empty() {
            return Err(IdentityError::EmptyAlgorithmField("version"));
        }
        for p in &self.parameters {
            match p.split_once('=') {
                Some((k, _)) if !k.trim().is_empty() => {}
                _ => return Err(IdentityError::BadParameter(p.clone())),
            }
        }
        Ok(())
    }

    /// Parameters joined as they are stored in a single text attribute.
    pub fn parameters_text(&self) -> String {
        self.parameters.join(",")
    }

    pub fn parse_parameters(text: &str) -> Vec<String> {
        text.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect()
    }
}

/// A reference to a composite instance within its study and series.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InstanceReference {
    pub study_instance_uid: String,
    pub series_instance_uid: String,
    pub sop_class_uid: String,
    pub sop_instance_uid: String,
}

impl InstanceReference {
    /// The reference to `ds` itself, if it carries all four UIDs.
    pub fn of(ds: &DataSet) -> Option<Self> {
        let get = |tag| ds.string(tag).filter(|s| !s.is_empty()).map(str::to_string);
        Some(InstanceReference {
            study_instance_uid: get(tags::STUDY_INSTANCE_UID)?,
            series_instance_uid: get(tags::SERIES_INSTANCE_UID)?,
            sop_class_uid: get(tags::SOP_CLASS_UID)?,
            sop_instance_uid: get(tags::SOP_INSTANCE_UID)?,
        })
    }
}

/// Patient and study attributes copied from source images into derived objects.
pub const PATIENT_STUDY: &[(Tag, VR)] = &[
    (tags::PATIENT_NAME, VR::PN),
    (tags::PATIENT_ID, VR::LO),
    (tags::PATIENT_BIRTH_DATE, VR::DA),
    (tags::PATIENT_SEX, VR::CS),
    (tags::STUDY_INSTANCE_UID, VR::UI),
    (tags::STUDY_ID, VR::SH),
    (tags::STUDY_DATE, VR::DA),
    (tags::STUDY_TIME, VR::TM),
    (tags::ACCESSION_NUMBER, VR::SH),
    (tags::REFERRING_PHYSICIAN_NAME, VR::PN),
];

/// Copies the patient/study attributes verbatim; absent ones are written
/// empty since they are required attributes. The specimen description
/// sequence is copied only when present.
pub fn copy_patient_study(source: &DataSet, target: &mut DataSet) {
    for &(tag, vr) in PATIENT_STUDY {
        match source.get(tag) {
            Some(e) => {
                target.put(e.clone());
            }
            None => {
                target.set_empty(tag, vr);
            }
        }
    }
    if let Some(e) = source.get(tags::SPECIMEN_DESCRIPTION_SEQUENCE) {
        target.put(e.clone());
    }
}

/// Current date and time as DICOM DA and TM strings (UTC).
pub fn now_da_tm() -> (String, String) {
    let now = chrono::Utc::now();
    (
        now.format("%Y%m%d").to_string(),
        now.format("%H%M%S").to_string(),
    )
}
