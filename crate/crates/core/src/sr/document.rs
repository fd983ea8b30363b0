//! Comprehensive SR and Comprehensive 3D SR instances.

use std::collections::HashSet;

use crate::coding::codes::{dcm, sct};
use crate::coding::CodedConcept;
use crate::common::{copy_patient_study, now_da_tm, InstanceReference, TrackingIdentifier};
use crate::dataset::{tags, DataSet, VR};
use crate::uid::{generate_uid, sop_class};

use super::content::{
    ContentItem, ContentValue, GraphicType2D, GraphicType3D, ImageReference, ItemFilter,
    RelationshipType, ValueType,
};
use super::templates::{
    Measurement, ObserverContext, QualitativeEvaluation, TID_MEASUREMENT_GROUP, TID_PLANAR_ROI,
    TID_VOLUMETRIC_ROI,
};
use super::SrError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrDocumentKind {
    /// Comprehensive SR: SCOORD only.
    Comprehensive,
    /// Comprehensive 3D SR: SCOORD and SCOORD3D.
    Comprehensive3d,
}

impl SrDocumentKind {
    pub fn sop_class_uid(self) -> &'static str {
        match self {
            SrDocumentKind::Comprehensive => sop_class::COMPREHENSIVE_SR_STORAGE,
            SrDocumentKind::Comprehensive3d => sop_class::COMPREHENSIVE_3D_SR_STORAGE,
        }
    }

    pub fn from_sop_class(uid: &str) -> Option<Self> {
        match uid {
            sop_class::COMPREHENSIVE_SR_STORAGE => Some(SrDocumentKind::Comprehensive),
            sop_class::COMPREHENSIVE_3D_SR_STORAGE => Some(SrDocumentKind::Comprehensive3d),
            _ => None,
        }
    }

    pub fn permits(self, value_type: ValueType) -> bool {
        !(self == SrDocumentKind::Comprehensive && value_type == ValueType::Scoord3d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompletionFlag {
    Partial,
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerificationFlag {
    Unverified,
    Verified,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyingObserver {
    pub name: String,
    pub organization: String,
    /// DICOM DT string.
    pub date_time: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SrDocumentMeta {
    pub series_instance_uid: String,
    pub sop_instance_uid: String,
    pub series_number: i64,
    pub instance_number: i64,
    pub series_description: Option<String>,
    pub completion: CompletionFlag,
    pub verification: VerificationFlag,
    pub verifying_observer: Option<VerifyingObserver>,
    pub predecessors: Vec<InstanceReference>,
    pub manufacturer: String,
    pub institution: Option<String>,
}

impl Default for SrDocumentMeta {
    fn default() -> Self {
        SrDocumentMeta {
            series_instance_uid: generate_uid(),
            sop_instance_uid: generate_uid(),
            series_number: 1,
            instance_number: 1,
            series_description: None,
            completion: CompletionFlag::Complete,
            verification: VerificationFlag::Unverified,
            verifying_observer: None,
            predecessors: Vec::new(),
            manufacturer: String::new(),
            institution: None,
        }
    }
}

type SeriesItems = (String, Vec<DataSet>);

/// Groups instance references by study, then series, keeping first-seen order.
pub(crate) fn hierarchical_references(refs: &[InstanceReference]) -> Vec<DataSet> {
    let mut studies: Vec<(String, Vec<SeriesItems>)> = Vec::new();
    let mut seen = HashSet::new();
    for r in refs {
        if !seen.insert(&r.sop_instance_uid) {
            continue;
        }
        let study = match studies.iter().position(|(s, _)| *s == r.study_instance_uid) {
            Some(i) => &mut studies[i].1,
            None => {
                studies.push((r.study_instance_uid.clone(), Vec::new()));
                &mut studies.last_mut().unwrap().1
            }
        };
        let series = match study.iter().position(|(s, _)| *s == r.series_instance_uid) {
            Some(i) => &mut study[i].1,
            None => {
                study.push((r.series_instance_uid.clone(), Vec::new()));
                &mut study.last_mut().unwrap().1
            }
        };
        let mut item = DataSet::new();
        item.set_uid(tags::REFERENCED_SOP_CLASS_UID, &r.sop_class_uid);
        item.set_uid(tags::REFERENCED_SOP_INSTANCE_UID, &r.sop_instance_uid);
        series.push(item);
    }
    studies
        .into_iter()
        .map(|(study_uid, series)| {
            let mut s = DataSet::new();
            s.set_uid(tags::STUDY_INSTANCE_UID, study_uid);
            let series_items = series
                .into_iter()
                .map(|(series_uid, instances)| {
                    let mut it = DataSet::new();
                    it.set_uid(tags::SERIES_INSTANCE_UID, series_uid);
                    it.set_sequence(tags::REFERENCED_SOP_SEQUENCE, instances);
                    it
                })
                .collect();
            s.set_sequence(tags::REFERENCED_SERIES_SEQUENCE, series_items);
            s
        })
        .collect()
}

fn parse_hierarchical(items: &[DataSet]) -> Vec<InstanceReference> {
    let mut out = Vec::new();
    for study in items {
        let study_uid = study.string(tags::STUDY_INSTANCE_UID).unwrap_or_default();
        for series in study
            .sequence(tags::REFERENCED_SERIES_SEQUENCE)
            .unwrap_or_default()
        {
            let series_uid = series.string(tags::SERIES_INSTANCE_UID).unwrap_or_default();
            for inst in series
                .sequence(tags::REFERENCED_SOP_SEQUENCE)
                .unwrap_or_default()
            {
                out.push(InstanceReference {
                    study_instance_uid: study_uid.to_string(),
                    series_instance_uid: series_uid.to_string(),
                    sop_class_uid: inst
                        .string(tags::REFERENCED_SOP_CLASS_UID)
                        .unwrap_or_default()
                        .to_string(),
                    sop_instance_uid: inst
                        .string(tags::REFERENCED_SOP_INSTANCE_UID)
                        .unwrap_or_default()
                        .to_string(),
                });
            }
        }
    }
    out
}

/// Every SOP instance referenced from IMAGE or COMPOSITE items of `tree`.
pub fn referenced_instances(tree: &ContentItem) -> Vec<&ImageReference> {
    std::iter::once(tree)
        .chain(tree.descendants())
        .filter_map(|item| match &item.value {
            ContentValue::Image(r) | ContentValue::Composite(r) => Some(r),
            _ => None,
        })
        .collect()
}

/// Assembles an SR instance from its evidence, content tree and metadata.
pub fn create_sr(
    kind: SrDocumentKind,
    evidence: &[DataSet],
    tree: &ContentItem,
    meta: &SrDocumentMeta,
) -> Result<DataSet, SrError> {
    let first = evidence.first().ok_or(SrError::MissingEvidence)?;
    let refs = evidence
        .iter()
        .map(|ds| {
            InstanceReference::of(ds).ok_or_else(|| {
                SrError::EvidenceMismatch(
                    "evidence instance lacks study, series, SOP class or SOP instance UID".into(),
                )
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let study = &refs[0].study_instance_uid;
    if let Some(other) = refs.iter().find(|r| r.study_instance_uid != *study) {
        return Err(SrError::EvidenceMismatch(format!(
            "evidence spans studies {study} and {}",
            other.study_instance_uid
        )));
    }

    tree.validate_tree(true)?;
    if tree.name != dcm::IMAGING_MEASUREMENT_REPORT {
        return Err(SrError::TemplateViolation(format!(
            "root concept is {}, expected a measurement report",
            tree.name
        )));
    }
    if let Some(item) = tree.descendants().find(|i| !kind.permits(i.value_type())) {
        return Err(SrError::ValueTypeForbidden {
            value_type: item.value_type(),
            sop_class: kind.sop_class_uid().to_string(),
        });
    }
    let known: HashSet<&str> = refs.iter().map(|r| r.sop_instance_uid.as_str()).collect();
    let missing: Vec<String> = referenced_instances(tree)
        .into_iter()
        .filter(|r| !known.contains(r.sop_instance_uid.as_str()))
        .map(|r| r.sop_instance_uid.clone())
        .collect();
    if !missing.is_empty() {
        return Err(SrError::EvidenceIncomplete(missing));
    }
    if meta.verification == VerificationFlag::Verified && meta.verifying_observer.is_none() {
        return Err(SrError::InvalidItem(
            "a VERIFIED document requires a verifying observer".into(),
        ));
    }

    let mut ds = DataSet::new();
    ds.set_text(tags::SPECIFIC_CHARACTER_SET, VR::CS, "ISO_IR 192");
    ds.set_uid(tags::SOP_CLASS_UID, kind.sop_class_uid());
    ds.set_uid(tags::SOP_INSTANCE_UID, &meta.sop_instance_uid);
    ds.set_text(tags::MODALITY, VR::CS, "SR");
    ds.set_uid(tags::SERIES_INSTANCE_UID, &meta.series_instance_uid);
    ds.set_int(tags::SERIES_NUMBER, VR::IS, meta.series_number);
    ds.set_int(tags::INSTANCE_NUMBER, VR::IS, meta.instance_number);
    if let Some(d) = &meta.series_description {
        ds.set_text(tags::SERIES_DESCRIPTION, VR::LO, d);
    }
    ds.set_text(tags::MANUFACTURER, VR::LO, &meta.manufacturer);
    if let Some(i) = &meta.institution {
        ds.set_text(tags::INSTITUTION_NAME, VR::LO, i);
    }
    let (date, time) = now_da_tm();
    ds.set_text(tags::CONTENT_DATE, VR::DA, &date);
    ds.set_text(tags::CONTENT_TIME, VR::TM, &time);
    ds.set_text(tags::INSTANCE_CREATION_DATE, VR::DA, &date);
    ds.set_text(tags::INSTANCE_CREATION_TIME, VR::TM, &time);
    copy_patient_study(first, &mut ds);
    ds.set_sequence(
        tags::REFERENCED_PERFORMED_PROCEDURE_STEP_SEQUENCE,
        Vec::new(),
    );
    ds.set_sequence(tags::PERFORMED_PROCEDURE_CODE_SEQUENCE, Vec::new());
    ds.set_text(
        tags::COMPLETION_FLAG,
        VR::CS,
        match meta.completion {
            CompletionFlag::Partial => "PARTIAL",
            CompletionFlag::Complete => "COMPLETE",
        },
    );
    ds.set_text(
        tags::VERIFICATION_FLAG,
        VR::CS,
        match meta.verification {
            VerificationFlag::Unverified => "UNVERIFIED",
            VerificationFlag::Verified => "VERIFIED",
        },
    );
    if let (VerificationFlag::Verified, Some(v)) = (meta.verification, &meta.verifying_observer) {
        let mut o = DataSet::new();
        o.set_text(tags::VERIFYING_OBSERVER_NAME, VR::PN, &v.name);
        o.set_sequence(
            tags::VERIFYING_OBSERVER_IDENTIFICATION_CODE_SEQUENCE,
            Vec::new(),
        );
        o.set_text(tags::VERIFYING_ORGANIZATION, VR::LO, &v.organization);
        o.set_text(tags::VERIFICATION_DATE_TIME, VR::DT, &v.date_time);
        ds.set_sequence(tags::VERIFYING_OBSERVER_SEQUENCE, vec![o]);
    }
    if !meta.predecessors.is_empty() {
        ds.set_sequence(
            tags::PREDECESSOR_DOCUMENTS_SEQUENCE,
            hierarchical_references(&meta.predecessors),
        );
    }
    ds.set_sequence(
        tags::CURRENT_REQUESTED_PROCEDURE_EVIDENCE_SEQUENCE,
        hierarchical_references(&refs),
    );
    tree.write_into(&mut ds);
    Ok(ds)
}

/// A parsed SR instance.
#[derive(Debug, Clone)]
pub struct SrDocument {
    pub kind: SrDocumentKind,
    pub meta: SrDocumentMeta,
    pub study_instance_uid: String,
    pub evidence: Vec<InstanceReference>,
    pub content: ContentItem,
    pub dataset: DataSet,
}

pub fn open_sr(ds: &DataSet) -> Result<SrDocument, SrError> {
    let class = ds.string(tags::SOP_CLASS_UID).unwrap_or_default();
    let kind = SrDocumentKind::from_sop_class(class)
        .ok_or_else(|| SrError::WrongSopClass(class.to_string()))?;
    if !ds.contains(tags::CONTENT_SEQUENCE) {
        return Err(SrError::MissingContent(
            "the document has no ContentSequence attribute, so its content items cannot be iterated; \
             the instance is not a conformant Structured Report"
                .into(),
        ));
    }
    let content = ContentItem::from_dataset(ds)?;
    content.validate_tree(true)?;
    let text = |tag| ds.string(tag).unwrap_or_default().to_string();
    let verifying_observer =
        ds.item(tags::VERIFYING_OBSERVER_SEQUENCE)
            .map(|o| VerifyingObserver {
                name: o
                    .string(tags::VERIFYING_OBSERVER_NAME)
                    .unwrap_or_default()
                    .to_string(),
                organization: o
                    .string(tags::VERIFYING_ORGANIZATION)
                    .unwrap_or_default()
                    .to_string(),
                date_time: o
                    .string(tags::VERIFICATION_DATE_TIME)
                    .unwrap_or_default()
                    .to_string(),
            });
    let meta = SrDocumentMeta {
        series_instance_uid: text(tags::SERIES_INSTANCE_UID),
        sop_instance_uid: text(tags::SOP_INSTANCE_UID),
        series_number: ds.int(tags::SERIES_NUMBER).unwrap_or_default(),
        instance_number: ds.int(tags::INSTANCE_NUMBER).unwrap_or_default(),
        series_description: ds.string(tags::SERIES_DESCRIPTION).map(str::to_string),
        completion: if ds.string(tags::COMPLETION_FLAG) == Some("PARTIAL") {
            CompletionFlag::Partial
        } else {
            CompletionFlag::Complete
        },
        verification: if ds.string(tags::VERIFICATION_FLAG) == Some("VERIFIED") {
            VerificationFlag::Verified
        } else {
            VerificationFlag::Unverified
        },
        verifying_observer,
        predecessors: parse_hierarchical(
            ds.sequence(tags::PREDECESSOR_DOCUMENTS_SEQUENCE)
                .unwrap_or_default(),
        ),
        manufacturer: text(tags::MANUFACTURER),
        institution: ds.string(tags::INSTITUTION_NAME).map(str::to_string),
    };
    Ok(SrDocument {
        kind,
        meta,
        study_instance_uid: text(tags::STUDY_INSTANCE_UID),
        evidence: parse_hierarchical(
            ds.sequence(tags::CURRENT_REQUESTED_PROCEDURE_EVIDENCE_SEQUENCE)
                .unwrap_or_default(),
        ),
        content,
        dataset: ds.clone(),
    })
}

impl SrDocument {
    pub fn observer_context(&self) -> Option<ObserverContext> {
        ObserverContext::from_items(&self.content.children)
    }

    pub fn find_items(&self, filter: &ItemFilter) -> Vec<&ContentItem> {
        self.content.find_items(filter)
    }

    /// Reference to this document, e.g. for use as a predecessor.
    pub fn reference(&self) -> InstanceReference {
        InstanceReference {
            study_instance_uid: self.study_instance_uid.clone(),
            series_instance_uid: self.meta.series_instance_uid.clone(),
            sop_class_uid: self.kind.sop_class_uid().to_string(),
            sop_instance_uid: self.meta.sop_instance_uid.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    Planar,
    Volumetric,
    ImageLevel,
}

/// Geometry of one region of a measurement group.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionGeometry {
    Pixel {
        graphic_type: GraphicType2D,
        points: Vec<[f32; 2]>,
        source: Option<ImageReference>,
    },
    Reference {
        graphic_type: GraphicType3D,
        points: Vec<[f32; 3]>,
        frame_of_reference_uid: String,
    },
    /// A segment (and possibly frames) of a segmentation instance.
    Segment(ImageReference),
}

/// Read-only projection of one measurement group subtree.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementGroupView {
    pub kind: GroupKind,
    pub tracking: Option<TrackingIdentifier>,
    pub finding: Option<CodedConcept>,
    pub finding_sites: Vec<CodedConcept>,
    pub regions: Vec<RegionGeometry>,
    pub measurements: Vec<Measurement>,
    pub evaluations: Vec<QualitativeEvaluation>,
    pub referenced_images: Vec<ImageReference>,
}

impl MeasurementGroupView {
    pub fn from_item(group: &ContentItem) -> Self {
        let mut view = MeasurementGroupView {
            kind: GroupKind::ImageLevel,
            tracking: None,
            finding: None,
            finding_sites: Vec::new(),
            regions: Vec::new(),
            measurements: Vec::new(),
            evaluations: Vec::new(),
            referenced_images: Vec::new(),
        };
        let mut tracking_uid = None;
        let mut tracking_text = None;
        let mut segment_style = None;
        for child in &group.children {
            let is_region_name =
                child.name == dcm::IMAGE_REGION || child.name == dcm::VOLUME_SURFACE;
            match (&child.value, child.relationship) {
                (ContentValue::UidRef(u), _) if child.name == dcm::TRACKING_UNIQUE_IDENTIFIER => {
                    tracking_uid = Some(u.clone())
                }
                (ContentValue::Text(t), _) if child.name == dcm::TRACKING_IDENTIFIER => {
                    tracking_text = Some(t.clone())
                }
                (ContentValue::Code(c), _) if child.name == dcm::FINDING => {
                    view.finding = Some(c.clone())
                }
                (ContentValue::Code(c), _) if child.name == sct::FINDING_SITE => {
                    view.finding_sites.push(c.clone())
                }
                (ContentValue::Scoord(s), _) if is_region_name => {
                    view.regions.push(RegionGeometry::Pixel {
                        graphic_type: s.graphic_type,
                        points: s.points.clone(),
                        source: child.children.iter().find_map(|c| {
                            match (&c.value, c.relationship) {
                                (ContentValue::Image(r), Some(RelationshipType::SelectedFrom)) => {
                                    Some(r.clone())
                                }
                                _ => None,
                            }
                        }),
                    })
                }
                (ContentValue::Scoord3d(s), _) if is_region_name => {
                    view.regions.push(RegionGeometry::Reference {
                        graphic_type: s.graphic_type,
                        points: s.points.clone(),
                        frame_of_reference_uid: s.frame_of_reference_uid.clone(),
                    })
                }
                (ContentValue::Image(r), _)
                    if child.name == dcm::REFERENCED_SEGMENT
                        || child.name == dcm::REFERENCED_SEGMENTATION_FRAME =>
                {
                    segment_style = Some(child.name == dcm::REFERENCED_SEGMENT);
                    view.regions.push(RegionGeometry::Segment(r.clone()))
                }
                (ContentValue::Image(r), _) if child.name == dcm::SOURCE_OF_MEASUREMENT => {
                    view.referenced_images.push(r.clone())
                }
                (ContentValue::Num(n), Some(RelationshipType::Contains)) => {
                    view.measurements.push(Measurement {
                        name: child.name.clone(),
                        value: n.value.clone(),
                        unit: n.unit.clone(),
                        qualifier: n.qualifier.clone(),
                    })
                }
                (ContentValue::Code(c), Some(RelationshipType::Contains)) => {
                    view.evaluations.push(QualitativeEvaluation {
                        name: child.name.clone(),
                        value: c.clone(),
                    })
                }
                _ => {}
            }
        }
        view.tracking = tracking_uid.map(|uid| TrackingIdentifier {
            uid,
            identifier: tracking_text,
        });
        view.kind = match group.template.as_deref() {
            Some(TID_PLANAR_ROI) => GroupKind::Planar,
            Some(TID_VOLUMETRIC_ROI) => GroupKind::Volumetric,
            Some(TID_MEASUREMENT_GROUP) => GroupKind::ImageLevel,
            _ => match (view.regions.len(), segment_style) {
                (0, _) => GroupKind::ImageLevel,
                (_, Some(true)) => GroupKind::Volumetric,
                (1, _) => GroupKind::Planar,
                _ => GroupKind::Volumetric,
            },
        };
        view
    }
}

/// Filters for [`measurement_groups`]; unset fields match anything.
#[derive(Debug, Clone, Default)]
pub struct GroupFilter {
    pub finding: Option<CodedConcept>,
    pub finding_site: Option<CodedConcept>,
    pub tracking_uid: Option<String>,
    pub kind: Option<GroupKind>,
}

impl GroupFilter {
    pub fn accepts(&self, g: &MeasurementGroupView) -> bool {
        self.finding
            .as_ref()
            .is_none_or(|f| g.finding.as_ref().is_some_and(|gf| f.matches(gf)))
            && self
                .finding_site
                .as_ref()
                .is_none_or(|s| g.finding_sites.iter().any(|gs| s.matches(gs)))
            && self
                .tracking_uid
                .as_ref()
                .is_none_or(|u| g.tracking.as_ref().is_some_and(|t| t.uid == *u))
            && self.kind.is_none_or(|k| k == g.kind)
    }
}

/// Measurement groups of `doc` satisfying `filter`, in document order.
pub fn measurement_groups(doc: &SrDocument, filter: &GroupFilter) -> Vec<MeasurementGroupView> {
    doc.content
        .find_items(
            &ItemFilter::new()
                .name(dcm::MEASUREMENT_GROUP)
                .value_type(ValueType::Container)
                .recursive(),
        )
        .into_iter()
        .map(MeasurementGroupView::from_item)
        .filter(|g| filter.accepts(g))
        .collect()
}

/// Regions of a group; image-level groups have none.
pub fn group_geometry(g: &MeasurementGroupView) -> Result<&[RegionGeometry], SrError> {
    if g.regions.is_empty() {
        Err(SrError::NoGeometry)
    } else {
        Ok(&g.regions)
    }
}
