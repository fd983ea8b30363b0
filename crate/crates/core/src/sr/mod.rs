//! Structured Reporting: content items, measurement templates and
//! Comprehensive (3D) SR documents.

pub mod content;
pub mod document;
pub mod templates;

pub use content::{
    ContentItem, ContentValue, GraphicType2D, GraphicType3D, ImageReference, ItemFilter,
    NumericValue, RelationshipType, Scoord, Scoord3d, ValueType,
};
pub use document::{
    create_sr, group_geometry, measurement_groups, open_sr, CompletionFlag, GroupFilter, GroupKind,
    MeasurementGroupView, RegionGeometry, SrDocument, SrDocumentKind, SrDocumentMeta,
    VerificationFlag, VerifyingObserver,
};
pub use templates::{
    build_measurement_group, build_measurement_report, build_planar_roi_group,
    build_volumetric_roi_group, DeviceObserver, GroupContent, Measurement, ObserverContext,
    QualitativeEvaluation, Region,
};

pub use crate::common::InstanceReference;

use crate::coding::{CodedConcept, CodingError};
use crate::common::IdentityError;
use crate::dataset::DecimalError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SrError {
    #[error("invalid graphic: {0}")]
    InvalidGraphic(String),
    #[error("invalid unit {0}: measurement units must use the UCUM coding scheme")]
    InvalidUnit(CodedConcept),
    #[error("invalid content item: {0}")]
    InvalidItem(String),
    #[error("template violation: {0}")]
    TemplateViolation(String),
    #[error("missing reference: {0}")]
    MissingReference(String),
    #[error("malformed SR content: {0}")]
    Malformed(String),
    #[error(transparent)]
    Coding(#[from] CodingError),
    #[error(transparent)]
    Decimal(#[from] DecimalError),
    #[error(transparent)]
    Identity(#[from] IdentityError),
    #[error("no evidence instances supplied")]
    MissingEvidence,
    #[error("evidence mismatch: {0}")]
    EvidenceMismatch(String),
    #[error("referenced instances missing from evidence: {}", .0.join(", "))]
    EvidenceIncomplete(Vec<String>),
    #[error("{value_type} items are not permitted in SOP class {sop_class}")]
    ValueTypeForbidden {
        value_type: ValueType,
        sop_class: String,
    },
    #[error("missing content: {0}")]
    MissingContent(String),
    #[error("SOP class {0:?} is not a supported SR storage class")]
    WrongSopClass(String),
    #[error("measurement group has no region geometry")]
    NoGeometry,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::codes::{dcm, sct, ucum};
    use crate::common::TrackingIdentifier;
    use crate::dataset::{tags, DataSet, DecimalString, VR};
    use crate::uid::sop_class;

    const STUDY: &str = "1.2.826.0.1.3680043.8.498.10";
    const FOR_UID: &str = "1.2.826.0.1.3680043.8.498.11";

    fn ct(series: &str, instance: &str) -> DataSet {
        let mut ds = DataSet::new();
        ds.set_uid(tags::SOP_CLASS_UID, sop_class::CT_IMAGE_STORAGE);
        ds.set_uid(tags::SOP_INSTANCE_UID, instance);
        ds.set_uid(tags::STUDY_INSTANCE_UID, STUDY);
        ds.set_uid(tags::SERIES_INSTANCE_UID, series);
        ds.set_text(tags::PATIENT_ID, VR::LO, "LIDC-0001");
        ds.set_text(tags::PATIENT_NAME, VR::PN, "Anon^Patient");
        ds
    }

    fn tracking(n: u32) -> TrackingIdentifier {
        TrackingIdentifier::new(format!("1.2.826.0.1.3680043.8.498.200.{n}"), None).unwrap()
    }

    fn polygon() -> Region {
        Region::Reference(
            Scoord3d::new(
                GraphicType3D::Polygon,
                vec![
                    [0.0, 0.0, 5.0],
                    [4.0, 0.0, 5.0],
                    [4.0, 4.0, 5.0],
                    [0.0, 4.0, 5.0],
                    [0.0, 0.0, 5.0],
                ],
                FOR_UID,
            )
            .unwrap(),
        )
    }

    fn report(groups: Vec<ContentItem>) -> ContentItem {
        build_measurement_report(
            &ObserverContext::Person {
                name: "Doe^Jane".into(),
            },
            &sct::COMPUTED_TOMOGRAPHY.into(),
            groups,
        )
        .unwrap()
    }

    fn nodule_groups(n: u32) -> Vec<ContentItem> {
        (0..n)
            .map(|i| {
                let mut c = GroupContent::new(tracking(i), sct::NODULE);
                c.finding_sites = vec![sct::LUNG.into()];
                c.measurements = vec![Measurement::new(
                    sct::DIAMETER,
                    DecimalString::new(&format!("{}.25", i + 3)).unwrap(),
                    ucum::MILLIMETER,
                )];
                build_planar_roi_group(&c, &[polygon()]).unwrap()
            })
            .collect()
    }

    #[test]
    fn copies_patient_and_groups_evidence() {
        let evidence = [
            ct("1.2.3.1", "1.2.3.1.1"),
            ct("1.2.3.1", "1.2.3.1.2"),
            ct("1.2.3.2", "1.2.3.2.1"),
        ];
        let ds = create_sr(
            SrDocumentKind::Comprehensive3d,
            &evidence,
            &report(nodule_groups(1)),
            &SrDocumentMeta::default(),
        )
        .unwrap();
        assert_eq!(ds.string(tags::PATIENT_ID), Some("LIDC-0001"));
        let ev = ds
            .sequence(tags::CURRENT_REQUESTED_PROCEDURE_EVIDENCE_SEQUENCE)
            .unwrap();
        assert_eq!(ev.len(), 1);
        let series = ev[0].sequence(tags::REFERENCED_SERIES_SEQUENCE).unwrap();
        assert_eq!(series.len(), 2);
        let total: usize = series
            .iter()
            .map(|s| s.sequence(tags::REFERENCED_SOP_SEQUENCE).unwrap().len())
            .sum();
        assert_eq!(total, 3);
        assert_eq!(ds.string(tags::COMPLETION_FLAG), Some("COMPLETE"));
        assert_eq!(ds.string(tags::VERIFICATION_FLAG), Some("UNVERIFIED"));
    }

    #[test]
    fn evidence_errors() {
        let tree = report(nodule_groups(1));
        let meta = SrDocumentMeta::default();
        assert_eq!(
            create_sr(SrDocumentKind::Comprehensive3d, &[], &tree, &meta),
            Err(SrError::MissingEvidence)
        );
        let mut other = ct("1.2.3.9", "1.2.3.9.1");
        other.set_uid(tags::STUDY_INSTANCE_UID, "1.2.3.999");
        assert!(matches!(
            create_sr(
                SrDocumentKind::Comprehensive3d,
                &[ct("1.2.3.1", "1.2.3.1.1"), other],
                &tree,
                &meta
            ),
            Err(SrError::EvidenceMismatch(_))
        ));
    }

    #[test]
    fn comprehensive_forbids_scoord3d() {
        let err = create_sr(
            SrDocumentKind::Comprehensive,
            &[ct("1.2.3.1", "1.2.3.1.1")],
            &report(nodule_groups(1)),
            &SrDocumentMeta::default(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            SrError::ValueTypeForbidden {
                value_type: ValueType::Scoord3d,
                ..
            }
        ));
    }

    #[test]
    fn references_must_be_in_evidence() {
        let seg = Region::Segment(
            ImageReference::new(sop_class::SEGMENTATION_STORAGE, "1.2.3.77").with_segment(2),
        );
        let group =
            build_volumetric_roi_group(&GroupContent::new(tracking(1), sct::NODULE), &[seg])
                .unwrap();
        let tree = report(vec![group]);
        let err = create_sr(
            SrDocumentKind::Comprehensive3d,
            &[ct("1.2.3.1", "1.2.3.1.1")],
            &tree,
            &SrDocumentMeta::default(),
        )
        .unwrap_err();
        assert_eq!(err, SrError::EvidenceIncomplete(vec!["1.2.3.77".into()]));
    }

    #[test]
    fn verified_requires_observer() {
        let meta = SrDocumentMeta {
            verification: VerificationFlag::Verified,
            ..Default::default()
        };
        let tree = report(nodule_groups(1));
        let evidence = [ct("1.2.3.1", "1.2.3.1.1")];
        assert!(create_sr(SrDocumentKind::Comprehensive3d, &evidence, &tree, &meta).is_err());
        let meta = SrDocumentMeta {
            verifying_observer: Some(VerifyingObserver {
                name: "Expert^Eve".into(),
                organization: "Hospital".into(),
                date_time: "20240101120000".into(),
            }),
            ..meta
        };
        let doc =
            open_sr(&create_sr(SrDocumentKind::Comprehensive3d, &evidence, &tree, &meta).unwrap())
                .unwrap();
        assert_eq!(doc.meta.verification, VerificationFlag::Verified);
        assert_eq!(doc.meta.verifying_observer, meta.verifying_observer);
    }

    #[test]
    fn open_round_trip_and_filters() {
        let tree = report(nodule_groups(3));
        let ds = create_sr(
            SrDocumentKind::Comprehensive3d,
            &[ct("1.2.3.1", "1.2.3.1.1")],
            &tree,
            &SrDocumentMeta::default(),
        )
        .unwrap();
        let doc = open_sr(&ds).unwrap();
        assert_eq!(doc.content, tree);
        assert_eq!(doc.evidence.len(), 1);

        let nodules = measurement_groups(
            &doc,
            &GroupFilter {
                finding: Some(sct::NODULE.into()),
                ..Default::default()
            },
        );
        assert_eq!(nodules.len(), 3);
        assert!(nodules.iter().all(|g| g.kind == GroupKind::Planar));
        assert_eq!(nodules[1].measurements[0].value.as_str(), "4.25");

        let one = measurement_groups(
            &doc,
            &GroupFilter {
                tracking_uid: Some(tracking(2).uid),
                ..Default::default()
            },
        );
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].tracking, Some(tracking(2)));

        let none = measurement_groups(
            &doc,
            &GroupFilter {
                finding: Some(sct::NEOPLASM.into()),
                ..Default::default()
            },
        );
        assert!(none.is_empty());

        let lung = measurement_groups(
            &doc,
            &GroupFilter {
                finding_site: Some(sct::LUNG.into()),
                ..Default::default()
            },
        );
        assert_eq!(lung.len(), 3);

        match group_geometry(&nodules[0]).unwrap() {
            [RegionGeometry::Reference {
                points,
                frame_of_reference_uid,
                ..
            }] => {
                assert_eq!(points.len(), 5);
                assert_eq!(points.first(), points.last());
                assert_eq!(frame_of_reference_uid, FOR_UID);
            }
            other => panic!("unexpected geometry {other:?}"),
        }
    }

    #[test]
    fn segment_and_image_level_geometry() {
        let seg_uid = "1.2.3.88";
        let seg = Region::Segment(
            ImageReference::new(sop_class::SEGMENTATION_STORAGE, seg_uid).with_segment(2),
        );
        let volumetric =
            build_volumetric_roi_group(&GroupContent::new(tracking(1), sct::NODULE), &[seg])
                .unwrap();
        let image_level =
            build_measurement_group(&GroupContent::new(tracking(2), sct::NEOPLASM), &[]).unwrap();
        let mut seg_ds = ct("1.2.3.5", seg_uid);
        seg_ds.set_uid(tags::SOP_CLASS_UID, sop_class::SEGMENTATION_STORAGE);
        let ds = create_sr(
            SrDocumentKind::Comprehensive,
            &[ct("1.2.3.1", "1.2.3.1.1"), seg_ds],
            &report(vec![volumetric, image_level]),
            &SrDocumentMeta::default(),
        )
        .unwrap();
        let doc = open_sr(&ds).unwrap();
        let groups = measurement_groups(&doc, &GroupFilter::default());
        assert_eq!(groups[0].kind, GroupKind::Volumetric);
        match group_geometry(&groups[0]).unwrap() {
            [RegionGeometry::Segment(r)] => {
                assert_eq!(
                    (r.sop_instance_uid.as_str(), r.segment_number),
                    (seg_uid, Some(2))
                );
            }
            other => panic!("unexpected geometry {other:?}"),
        }
        assert_eq!(groups[1].kind, GroupKind::ImageLevel);
        assert_eq!(group_geometry(&groups[1]), Err(SrError::NoGeometry));
        let image_only = measurement_groups(
            &doc,
            &GroupFilter {
                kind: Some(GroupKind::ImageLevel),
                ..Default::default()
            },
        );
        assert_eq!(image_only.len(), 1);
    }

    #[test]
    fn open_errors() {
        let mut ds = create_sr(
            SrDocumentKind::Comprehensive3d,
            &[ct("1.2.3.1", "1.2.3.1.1")],
            &report(nodule_groups(1)),
            &SrDocumentMeta::default(),
        )
        .unwrap();
        ds.remove(tags::CONTENT_SEQUENCE);
        match open_sr(&ds) {
            Err(SrError::MissingContent(msg)) => assert!(msg.contains("ContentSequence")),
            other => panic!("unexpected {other:?}"),
        }
        ds.set_uid(tags::SOP_CLASS_UID, sop_class::CT_IMAGE_STORAGE);
        assert!(matches!(open_sr(&ds), Err(SrError::WrongSopClass(_))));
    }

    #[test]
    fn root_must_be_measurement_report() {
        let root = ContentItem::container(dcm::IMAGE_LIBRARY.into(), None);
        let err = create_sr(
            SrDocumentKind::Comprehensive3d,
            &[ct("1.2.3.1", "1.2.3.1.1")],
            &root,
            &SrDocumentMeta::default(),
        )
        .unwrap_err();
        assert!(matches!(err, SrError::TemplateViolation(_)));
    }

    #[test]
    fn views_are_thread_safe() {
        fn check<T: Send + Sync>() {}
        check::<SrDocument>();
        check::<ContentItem>();
    }
}
