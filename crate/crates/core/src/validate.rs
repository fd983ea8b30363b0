//! Module-level conformance checks for Segmentation and Structured Report
//! instances (and basic identification checks for anything else).

use std::fmt;

use crate::common::PATIENT_STUDY;
use crate::dataset::{tags, DataSet, Tag};
use crate::seg::{open_seg, SegmentationType};
use crate::sr::document::referenced_instances;
use crate::sr::{open_sr, SrDocumentKind};
use crate::uid::{is_valid_uid, sop_class};

/// One conformance problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub module: &'static str,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.module, self.message)
    }
}

struct Checker {
    issues: Vec<Issue>,
}

impl Checker {
    fn fail(&mut self, module: &'static str, message: impl Into<String>) {
        self.issues.push(Issue {
            module,
            message: message.into(),
        });
    }

    fn present(&mut self, ds: &DataSet, module: &'static str, required: &[(Tag, &str)]) {
        for &(tag, keyword) in required {
            if !ds.contains(tag) {
                self.fail(module, format!("missing {keyword}"));
            }
        }
    }

    fn valued(&mut self, ds: &DataSet, module: &'static str, required: &[(Tag, &str)]) {
        for &(tag, keyword) in required {
            match ds.get(tag) {
                None => self.fail(module, format!("missing {keyword}")),
                Some(e) if e.is_empty() => self.fail(module, format!("{keyword} is empty")),
                Some(_) => {}
            }
        }
    }

    fn uids(&mut self, ds: &DataSet, module: &'static str, uids: &[(Tag, &str)]) {
        for &(tag, keyword) in uids {
            if let Some(u) = ds.string(tag) {
                if !is_valid_uid(u) {
                    self.fail(module, format!("{keyword} {u:?} is not a valid UID"));
                }
            }
        }
    }
}

const IDENTIFICATION: &[(Tag, &str)] = &[
    (tags::SOP_CLASS_UID, "SOPClassUID"),
    (tags::SOP_INSTANCE_UID, "SOPInstanceUID"),
    (tags::STUDY_INSTANCE_UID, "StudyInstanceUID"),
    (tags::SERIES_INSTANCE_UID, "SeriesInstanceUID"),
];

/// All conformance problems found; empty means the instance passes.
pub fn validate(ds: &DataSet) -> Vec<Issue> {
    let mut c = Checker { issues: Vec::new() };
    c.valued(ds, "SOP Common", IDENTIFICATION);
    c.uids(ds, "SOP Common", IDENTIFICATION);
    let class = ds.string(tags::SOP_CLASS_UID).unwrap_or_default();
    if class == sop_class::SEGMENTATION_STORAGE {
        check_seg(ds, &mut c);
    } else if SrDocumentKind::from_sop_class(class).is_some() {
        check_sr(ds, &mut c);
    }
    c.issues
}

fn patient_study(ds: &DataSet, c: &mut Checker) {
    for &(tag, _) in PATIENT_STUDY {
        if !ds.contains(tag) {
            let keyword = crate::dataset::dictionary::keyword_of(tag).unwrap_or("attribute");
            c.fail("Patient/Study", format!("missing {keyword}"));
        }
    }
}

fn check_seg(ds: &DataSet, c: &mut Checker) {
    patient_study(ds, c);
    c.valued(
        ds,
        "Segmentation Image",
        &[
            (tags::MODALITY, "Modality"),
            (tags::IMAGE_TYPE, "ImageType"),
            (tags::SEGMENTATION_TYPE, "SegmentationType"),
            (tags::CONTENT_LABEL, "ContentLabel"),
            (tags::SEGMENT_SEQUENCE, "SegmentSequence"),
            (tags::ROWS, "Rows"),
            (tags::COLUMNS, "Columns"),
            (tags::BITS_ALLOCATED, "BitsAllocated"),
            (tags::NUMBER_OF_FRAMES, "NumberOfFrames"),
            (tags::PIXEL_DATA, "PixelData"),
            (
                tags::SHARED_FUNCTIONAL_GROUPS_SEQUENCE,
                "SharedFunctionalGroupsSequence",
            ),
            (
                tags::PER_FRAME_FUNCTIONAL_GROUPS_SEQUENCE,
                "PerFrameFunctionalGroupsSequence",
            ),
            (tags::DIMENSION_INDEX_SEQUENCE, "DimensionIndexSequence"),
        ],
    );
    c.present(
        ds,
        "Segmentation Image",
        &[
            (tags::CONTENT_DESCRIPTION, "ContentDescription"),
            (tags::CONTENT_CREATOR_NAME, "ContentCreatorName"),
        ],
    );
    if ds.string(tags::MODALITY).is_some_and(|m| m != "SEG") {
        c.fail("Segmentation Series", "Modality must be SEG");
    }
    let seg = match open_seg(ds) {
        Ok(s) => s,
        Err(e) => return c.fail("Segmentation Image", e.to_string()),
    };
    let bits = ds.int(tags::BITS_ALLOCATED).unwrap_or_default();
    if bits != i64::from(seg.seg_type.bits_allocated()) {
        c.fail(
            "Segmentation Image",
            format!("BitsAllocated {bits} does not match the segmentation type"),
        );
    }
    if let SegmentationType::Fractional { .. } = seg.seg_type {
        if let Some(data) = ds.bytes(tags::PIXEL_DATA) {
            let max = ds.int(tags::MAXIMUM_FRACTIONAL_VALUE).unwrap_or(255);
            if let Some(v) = data
                .iter()
                .take(seg.rows * seg.columns * seg.frames.len())
                .find(|&&v| i64::from(v) > max)
            {
                c.fail(
                    "Segmentation Image",
                    format!("stored value {v} exceeds MaximumFractionalValue {max}"),
                );
            }
        }
    }
    for (i, d) in seg.descriptions.iter().enumerate() {
        if usize::from(d.number) != i + 1 {
            c.fail(
                "Segmentation Image",
                "segment numbers are not consecutive from 1",
            );
            break;
        }
        if let Err(e) = d.validate() {
            c.fail("Segmentation Image", e.to_string());
        }
    }
    for f in &seg.frames {
        match &f.source {
            None => c.fail(
                "Multi-frame Functional Groups",
                format!("frame {} has no source image reference", f.number),
            ),
            Some(s)
                if !seg
                    .referenced_instances
                    .iter()
                    .any(|r| r.sop_instance_uid == s.sop_instance_uid) =>
            {
                c.fail(
                    "Common Instance Reference",
                    format!(
                        "frame {} derives from {} which ReferencedSeriesSequence omits",
                        f.number, s.sop_instance_uid
                    ),
                )
            }
            Some(_) => {}
        }
    }
    if seg.frames.iter().any(|f| f.position.is_some()) && seg.frame_of_reference_uid.is_none() {
        c.fail(
            "Frame of Reference",
            "plane positions without FrameOfReferenceUID",
        );
    }
}

fn check_sr(ds: &DataSet, c: &mut Checker) {
    patient_study(ds, c);
    c.valued(
        ds,
        "SR Document General",
        &[
            (tags::MODALITY, "Modality"),
            (tags::COMPLETION_FLAG, "CompletionFlag"),
            (tags::VERIFICATION_FLAG, "VerificationFlag"),
            (tags::CONTENT_DATE, "ContentDate"),
            (tags::CONTENT_TIME, "ContentTime"),
        ],
    );
    c.present(
        ds,
        "SR Document General",
        &[
            (
                tags::REFERENCED_PERFORMED_PROCEDURE_STEP_SEQUENCE,
                "ReferencedPerformedProcedureStepSequence",
            ),
            (
                tags::PERFORMED_PROCEDURE_CODE_SEQUENCE,
                "PerformedProcedureCodeSequence",
            ),
        ],
    );
    if ds.string(tags::MODALITY).is_some_and(|m| m != "SR") {
        c.fail("SR Document Series", "Modality must be SR");
    }
    if ds.string(tags::VERIFICATION_FLAG) == Some("VERIFIED")
        && ds.item(tags::VERIFYING_OBSERVER_SEQUENCE).is_none()
    {
        c.fail(
            "SR Document General",
            "VERIFIED document lacks VerifyingObserverSequence",
        );
    }
    let doc = match open_sr(ds) {
        Ok(d) => d,
        Err(e) => return c.fail("SR Document Content", e.to_string()),
    };
    if let Some(item) = std::iter::once(&doc.content)
        .chain(doc.content.descendants())
        .find(|i| !doc.kind.permits(i.value_type()))
    {
        c.fail(
            "SR Document Content",
            format!(
                "{} items are not permitted in {}",
                item.value_type(),
                doc.kind.sop_class_uid()
            ),
        );
    }
    for r in referenced_instances(&doc.content) {
        if !doc
            .evidence
            .iter()
            .any(|e| e.sop_instance_uid == r.sop_instance_uid)
        {
            c.fail(
                "SR Document General",
                format!("instance {} is referenced but absent from CurrentRequestedProcedureEvidenceSequence", r.sop_instance_uid),
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::VR;

    #[test]
    fn bare_dataset_reports_identification() {
        let issues = validate(&DataSet::new());
        assert_eq!(issues.len(), 4);
        assert!(issues[0]
            .to_string()
            .starts_with("SOP Common: missing SOPClassUID"));
    }

    #[test]
    fn bad_uid_is_reported() {
        let mut d = DataSet::new();
        d.set_uid(tags::SOP_CLASS_UID, "1.2.3");
        d.set_uid(tags::SOP_INSTANCE_UID, "1.02.3");
        d.set_uid(tags::STUDY_INSTANCE_UID, "1.2.4");
        d.set_uid(tags::SERIES_INSTANCE_UID, "1.2.5");
        assert_eq!(validate(&d).len(), 1);
    }

    #[test]
    fn sr_without_content_fails() {
        let mut d = DataSet::new();
        d.set_uid(tags::SOP_CLASS_UID, sop_class::COMPREHENSIVE_SR_STORAGE);
        d.set_uid(tags::SOP_INSTANCE_UID, "1.2.3");
        d.set_uid(tags::STUDY_INSTANCE_UID, "1.2.4");
        d.set_uid(tags::SERIES_INSTANCE_UID, "1.2.5");
        d.set_text(tags::MODALITY, VR::CS, "SR");
        let issues = validate(&d);
        assert!(issues.iter().any(|i| i.module == "SR Document Content"));
        assert!(issues.iter().any(|i| i.message == "missing PatientID"));
    }
}
