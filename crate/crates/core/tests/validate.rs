use dicom_annot::coding::codes::{sct, ucum};
use dicom_annot::common::TrackingIdentifier;
use dicom_annot::dataset::{read_part10, tags, write_part10, DataSet, DecimalString, FileMeta, VR};
use dicom_annot::seg::{create_seg, AlgorithmType, SegMeta, SegmentDescription, SegmentationType};
use dicom_annot::sr::*;
use dicom_annot::synthetic::{ct_series, SyntheticStudy};
use dicom_annot::validate::validate;
use ndarray::Array3;

fn reparse(ds: &DataSet) -> DataSet {
    let bytes = write_part10(&FileMeta::for_dataset(ds), ds).unwrap();
    read_part10(&bytes).unwrap().1
}

fn seg() -> (Vec<DataSet>, DataSet) {
    let src = ct_series(&SyntheticStudy::new("P1"), 3, 8, 8, 0.7, 1.25);
    let mut m = Array3::<f32>::zeros((3, 8, 8));
    m[[1, 3, 3]] = 1.0;
    let d = SegmentDescription::new(
        1,
        "nodule",
        sct::MORPHOLOGICALLY_ABNORMAL_STRUCTURE,
        sct::NODULE,
        AlgorithmType::Manual,
    );
    let seg = create_seg(
        &src,
        &[m],
        &[d],
        SegmentationType::Binary,
        true,
        &SegMeta::default(),
    )
    .unwrap();
    (src, seg)
}

fn sr(src: &[DataSet], kind: SrDocumentKind) -> Result<DataSet, SrError> {
    let source = ImageReference::to_instance(&src[0]).unwrap();
    let mut content = GroupContent::new(
        TrackingIdentifier::generate(Some("nodule 1".into())),
        sct::NODULE,
    );
    content.measurements.push(Measurement::new(
        sct::DIAMETER,
        DecimalString::new("4.2").unwrap(),
        ucum::MILLIMETER,
    ));
    let planar = build_planar_roi_group(
        &content,
        &[Region::Pixel {
            scoord: Scoord::new(
                GraphicType2D::Polyline,
                vec![[1.0, 1.0], [5.0, 1.0], [5.0, 5.0], [1.0, 1.0]],
            )
            .unwrap(),
            source: Some(source.clone()),
        }],
    )?;
    let image = build_measurement_group(
        &GroupContent::new(TrackingIdentifier::generate(None), sct::NEOPLASM),
        &[source],
    )?;
    let tree = build_measurement_report(
        &ObserverContext::Person {
            name: "Doe^Jane".into(),
        },
        &sct::COMPUTED_TOMOGRAPHY.into(),
        vec![planar, image],
    )?;
    create_sr(kind, src, &tree, &SrDocumentMeta::default())
}

#[test]
fn created_seg_passes() {
    let (_, seg) = seg();
    assert_eq!(validate(&seg), vec![]);
    assert_eq!(validate(&reparse(&seg)), vec![]);
}

#[test]
fn created_sr_passes_for_both_kinds() {
    let (src, _) = seg();
    for kind in [
        SrDocumentKind::Comprehensive,
        SrDocumentKind::Comprehensive3d,
    ] {
        let doc = sr(&src, kind).unwrap();
        assert_eq!(validate(&doc), vec![]);
        assert_eq!(validate(&reparse(&doc)), vec![]);
    }
}

#[test]
fn tampering_is_reported() {
    let (src, mut seg) = seg();
    seg.remove(tags::PATIENT_ID);
    seg.set_text(tags::MODALITY, VR::CS, "CT");
    let issues = validate(&seg);
    assert!(
        issues.iter().any(|i| i.message == "missing PatientID"),
        "{issues:?}"
    );
    assert!(issues.iter().any(|i| i.message == "Modality must be SEG"));

    let mut doc = sr(&src, SrDocumentKind::Comprehensive).unwrap();
    doc.remove(tags::CURRENT_REQUESTED_PROCEDURE_EVIDENCE_SEQUENCE);
    let issues = validate(&doc);
    assert!(
        issues.iter().any(|i| i
            .message
            .contains("absent from CurrentRequestedProcedureEvidenceSequence")),
        "{issues:?}"
    );

    let mut doc = sr(&src, SrDocumentKind::Comprehensive).unwrap();
    doc.remove(tags::CONTENT_SEQUENCE);
    assert!(!validate(&doc).is_empty());
}
