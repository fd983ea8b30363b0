//! Builders for the measurement report (TID 1500) and its measurement
//! groups: planar ROI (TID 1410), volumetric ROI (TID 1411) and
//! image-level (TID 1501).

use crate::coding::codes::dcm;
use crate::coding::CodedConcept;
use crate::common::{AlgorithmIdentification, TrackingIdentifier};
use crate::dataset::DecimalString;

use super::content::{
    ContentItem, ContentValue, ImageReference, NumericValue, RelationshipType, Scoord, Scoord3d,
};
use super::SrError;

pub const TID_MEASUREMENT_REPORT: &str = "1500";
pub const TID_PLANAR_ROI: &str = "1410";
pub const TID_VOLUMETRIC_ROI: &str = "1411";
pub const TID_MEASUREMENT_GROUP: &str = "1501";

use RelationshipType::{Contains, HasConceptMod, HasObsContext, SelectedFrom};

/// Who (or what) made the observations in a report.
#[derive(Debug, Clone, PartialEq)]
pub enum ObserverContext {
    Person { name: String },
    Device(DeviceObserver),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceObserver {
    pub uid: String,
    pub name: Option<String>,
    pub manufacturer: Option<String>,
    pub model_name: Option<String>,
    pub algorithm: Option<AlgorithmIdentification>,
}

impl DeviceObserver {
    pub fn new(uid: impl Into<String>) -> Self {
        DeviceObserver {
            uid: uid.into(),
            name: None,
            manufacturer: None,
            model_name: None,
            algorithm: None,
        }
    }
}

impl ObserverContext {
    fn items(&self) -> Result<Vec<ContentItem>, SrError> {
        let mut items = Vec::new();
        match self {
            ObserverContext::Person { name } => {
                if name.trim().is_empty() {
                    return Err(SrError::TemplateViolation(
                        "person observer name is empty".into(),
                    ));
                }
                items.push(ContentItem::code(
                    dcm::OBSERVER_TYPE.into(),
                    dcm::PERSON.into(),
                    HasObsContext,
                ));
                items.push(ContentItem::new(
                    dcm::PERSON_OBSERVER_NAME.into(),
                    ContentValue::PName(name.clone()),
                    Some(HasObsContext),
                )?);
            }
            ObserverContext::Device(d) => {
                items.push(ContentItem::code(
                    dcm::OBSERVER_TYPE.into(),
                    dcm::DEVICE.into(),
                    HasObsContext,
                ));
                items.push(ContentItem::new(
                    dcm::DEVICE_OBSERVER_UID.into(),
                    ContentValue::UidRef(d.uid.clone()),
                    Some(HasObsContext),
                )?);
                let texts = [
                    (dcm::DEVICE_OBSERVER_NAME, &d.name),
                    (dcm::DEVICE_OBSERVER_MANUFACTURER, &d.manufacturer),
                    (dcm::DEVICE_OBSERVER_MODEL_NAME, &d.model_name),
                ];
                for (code, value) in texts {
                    if let Some(v) = value {
                        items.push(ContentItem::text(code.into(), v, HasObsContext));
                    }
                }
                if let Some(a) = &d.algorithm {
                    a.validate()?;
                    items.push(ContentItem::text(
                        dcm::ALGORITHM_NAME.into(),
                        &a.name,
                        HasObsContext,
                    ));
                    items.push(ContentItem::text(
                        dcm::ALGORITHM_VERSION.into(),
                        &a.version,
                        HasObsContext,
                    ));
                    for p in &a.parameters {
                        items.push(ContentItem::text(
                            dcm::ALGORITHM_PARAMETERS.into(),
                            p,
                            HasObsContext,
                        ));
                    }
                }
            }
        }
        Ok(items)
    }

    /// Reads the observer context back from the children of a report root.
    pub fn from_items(items: &[ContentItem]) -> Option<ObserverContext> {
        let context: Vec<&ContentItem> = items
            .iter()
            .filter(|i| i.relationship == Some(HasObsContext))
            .collect();
        let text = |code: crate::coding::Code| {
            context
                .iter()
                .find(|i| i.name == code)
                .and_then(|i| match &i.value {
                    ContentValue::Text(s) | ContentValue::PName(s) | ContentValue::UidRef(s) => {
                        Some(s.clone())
                    }
                    _ => None,
                })
        };
        let observer_type = context
            .iter()
            .find(|i| i.name == dcm::OBSERVER_TYPE)
            .and_then(|i| match &i.value {
                ContentValue::Code(c) => Some(c.clone()),
                _ => None,
            });
        match observer_type {
            Some(t) if t == dcm::DEVICE => {
                let algorithm = match (text(dcm::ALGORITHM_NAME), text(dcm::ALGORITHM_VERSION)) {
                    (Some(name), Some(version)) => Some(AlgorithmIdentification {
                        name,
                        version,
                        parameters: context
                            .iter()
                            .filter(|i| i.name == dcm::ALGORITHM_PARAMETERS)
                            .filter_map(|i| match &i.value {
                                ContentValue::Text(s) => Some(s.clone()),
                                _ => None,
                            })
                            .collect(),
                    }),
                    _ => None,
                };
                Some(ObserverContext::Device(DeviceObserver {
                    uid: text(dcm::DEVICE_OBSERVER_UID)?,
                    name: text(dcm::DEVICE_OBSERVER_NAME),
                    manufacturer: text(dcm::DEVICE_OBSERVER_MANUFACTURER),
                    model_name: text(dcm::DEVICE_OBSERVER_MODEL_NAME),
                    algorithm,
                }))
            }
            _ => text(dcm::PERSON_OBSERVER_NAME).map(|name| ObserverContext::Person { name }),
        }
    }
}

/// A measurement to be encoded as a NUM item.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub name: CodedConcept,
    pub value: DecimalString,
    pub unit: CodedConcept,
    pub qualifier: Option<CodedConcept>,
}

impl Measurement {
    pub fn new(
        name: impl Into<CodedConcept>,
        value: DecimalString,
        unit: impl Into<CodedConcept>,
    ) -> Self {
        Measurement {
            name: name.into(),
            value,
            unit: unit.into(),
            qualifier: None,
        }
    }

    fn item(&self) -> Result<ContentItem, SrError> {
        let mut num = NumericValue::new(self.value.clone(), self.unit.clone())?;
        num.qualifier = self.qualifier.clone();
        ContentItem::new(self.name.clone(), ContentValue::Num(num), Some(Contains))
    }
}

/// A qualitative evaluation to be encoded as a CODE item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QualitativeEvaluation {
    pub name: CodedConcept,
    pub value: CodedConcept,
}

impl QualitativeEvaluation {
    pub fn new(name: impl Into<CodedConcept>, value: impl Into<CodedConcept>) -> Self {
        QualitativeEvaluation {
            name: name.into(),
            value: value.into(),
        }
    }
}

/// Content common to all measurement group templates.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupContent {
    pub tracking: Option<TrackingIdentifier>,
    pub finding: CodedConcept,
    pub finding_sites: Vec<CodedConcept>,
    pub measurements: Vec<Measurement>,
    pub evaluations: Vec<QualitativeEvaluation>,
}

impl GroupContent {
    pub fn new(tracking: TrackingIdentifier, finding: impl Into<CodedConcept>) -> Self {
        GroupContent {
            tracking: Some(tracking),
            finding: finding.into(),
            finding_sites: Vec::new(),
            measurements: Vec::new(),
            evaluations: Vec::new(),
        }
    }
}

/// The region an ROI group is about.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Pixel coordinates in `source`.
    Pixel {
        scoord: Scoord,
        source: Option<ImageReference>,
    },
    /// Frame-of-reference coordinates.
    Reference(Scoord3d),
    /// A segment of a segmentation instance (`segment_number` set).
    Segment(ImageReference),
}

impl Region {
    fn form(&self) -> &'static str {
        match self {
            Region::Pixel { .. } => "SCOORD",
            Region::Reference(_) => "SCOORD3D",
            Region::Segment(_) => "segment",
        }
    }

    fn item(&self, segment_name: CodedConcept) -> Result<ContentItem, SrError> {
        match self {
            Region::Pixel { scoord, source } => {
                let source = source.as_ref().ok_or_else(|| {
                    SrError::MissingReference("SCOORD region needs a source image reference".into())
                })?;
                let source = ContentItem::new(
                    dcm::SOURCE_IMAGE.into(),
                    ContentValue::Image(source.clone()),
                    Some(SelectedFrom),
                )?;
                let mut item = ContentItem::new(
                    dcm::IMAGE_REGION.into(),
                    ContentValue::Scoord(scoord.clone()),
                    Some(Contains),
                )?;
                item.push(source)?;
                Ok(item)
            }
            Region::Reference(s) => ContentItem::new(
                dcm::IMAGE_REGION.into(),
                ContentValue::Scoord3d(s.clone()),
                Some(Contains),
            ),
            Region::Segment(r) => {
                if r.segment_number.is_none() {
                    return Err(SrError::MissingReference(
                        "segment reference lacks a segment number".into(),
                    ));
                }
                ContentItem::new(segment_name, ContentValue::Image(r.clone()), Some(Contains))
            }
        }
    }
}

fn group_container(template: &str, content: &GroupContent) -> Result<ContentItem, SrError> {
    let tracking = content.tracking.as_ref().ok_or_else(|| {
        SrError::TemplateViolation("measurement group requires a tracking identifier".into())
    })?;
    if !crate::uid::is_valid_uid(&tracking.uid) {
        return Err(SrError::InvalidItem(format!(
            "invalid tracking UID {:?}",
            tracking.uid
        )));
    }
    let mut group = ContentItem::container(dcm::MEASUREMENT_GROUP.into(), Some(Contains))
        .with_template(template);
    if let Some(id) = &tracking.identifier {
        group.push(ContentItem::text(
            dcm::TRACKING_IDENTIFIER.into(),
            id,
            HasObsContext,
        ))?;
    }
    group.push(ContentItem::new(
        dcm::TRACKING_UNIQUE_IDENTIFIER.into(),
        ContentValue::UidRef(tracking.uid.clone()),
        Some(HasObsContext),
    )?)?;
    Ok(group)
}

fn push_findings(group: &mut ContentItem, content: &GroupContent) -> Result<(), SrError> {
    group.push(ContentItem::code(
        dcm::FINDING.into(),
        content.finding.clone(),
        Contains,
    ))?;
    for site in &content.finding_sites {
        group.push(ContentItem::code(
            crate::coding::codes::sct::FINDING_SITE.into(),
            site.clone(),
            HasConceptMod,
        ))?;
    }
    for m in &content.measurements {
        group.push(m.item()?)?;
    }
    for e in &content.evaluations {
        group.push(ContentItem::code(e.name.clone(), e.value.clone(), Contains))?;
    }
    Ok(())
}

/// TID 1410: one region given as SCOORD (+ source image), SCOORD3D or a
/// segmentation frame reference.
pub fn build_planar_roi_group(
    content: &GroupContent,
    regions: &[Region],
) -> Result<ContentItem, SrError> {
    let region = match regions {
        [one] => one,
        [] => {
            return Err(SrError::TemplateViolation(
                "planar ROI group requires a region".into(),
            ))
        }
        many => {
            return Err(SrError::TemplateViolation(format!(
                "planar ROI group takes exactly one region, got {}",
                many.len()
            )))
        }
    };
    let mut group = group_container(TID_PLANAR_ROI, content)?;
    group.push(region.item(dcm::REFERENCED_SEGMENTATION_FRAME.into())?)?;
    push_findings(&mut group, content)?;
    Ok(group)
}

/// TID 1411: a referenced segment, or one or more contours of a single form.
pub fn build_volumetric_roi_group(
    content: &GroupContent,
    regions: &[Region],
) -> Result<ContentItem, SrError> {
    if regions.is_empty() {
        return Err(SrError::TemplateViolation(
            "volumetric ROI group requires a segment or at least one contour".into(),
        ));
    }
    let form = regions[0].form();
    if let Some(other) = regions.iter().find(|r| r.form() != form) {
        return Err(SrError::TemplateViolation(format!(
            "volumetric ROI group mixes {form} and {} regions",
            other.form()
        )));
    }
    if form == "segment" && regions.len() > 1 {
        return Err(SrError::TemplateViolation(
            "volumetric ROI group references at most one segment".into(),
        ));
    }
    let mut group = group_container(TID_VOLUMETRIC_ROI, content)?;
    for r in regions {
        group.push(r.item(dcm::REFERENCED_SEGMENT.into())?)?;
    }
    push_findings(&mut group, content)?;
    Ok(group)
}

/// TID 1501: measurements about whole images, no region.
pub fn build_measurement_group(
    content: &GroupContent,
    referenced_images: &[ImageReference],
) -> Result<ContentItem, SrError> {
    let mut group = group_container(TID_MEASUREMENT_GROUP, content)?;
    push_findings(&mut group, content)?;
    for r in referenced_images {
        group.push(ContentItem::new(
            dcm::SOURCE_OF_MEASUREMENT.into(),
            ContentValue::Image(r.clone()),
            Some(Contains),
        )?)?;
    }
    Ok(group)
}

/// TID 1500 root: observer context, procedure, image library, then groups.
pub fn build_measurement_report(
    context: &ObserverContext,
    procedure: &CodedConcept,
    groups: Vec<ContentItem>,
) -> Result<ContentItem, SrError> {
    if groups.is_empty() {
        return Err(SrError::TemplateViolation(
            "measurement report requires at least one measurement group".into(),
        ));
    }
    let mut root = ContentItem::container(dcm::IMAGING_MEASUREMENT_REPORT.into(), None)
        .with_template(TID_MEASUREMENT_REPORT);
    for item in context.items()? {
        root.push(item)?;
    }
    root.push(ContentItem::code(
        dcm::PROCEDURE_REPORTED.into(),
        procedure.clone(),
        HasConceptMod,
    ))?;
    root.push(ContentItem::container(
        dcm::IMAGE_LIBRARY.into(),
        Some(Contains),
    ))?;
    let mut measurements = ContentItem::container(dcm::IMAGING_MEASUREMENTS.into(), Some(Contains));
    for g in groups {
        if g.name != dcm::MEASUREMENT_GROUP || !g.is_container() {
            return Err(SrError::TemplateViolation(format!(
                "{} is not a measurement group container",
                g.name
            )));
        }
        if g.relationship != Some(Contains) {
            return Err(SrError::TemplateViolation(
                "measurement groups must be CONTAINS children".into(),
            ));
        }
        measurements.push(g)?;
    }
    root.push(measurements)?;
    Ok(root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::codes::{sct, ucum};
    use crate::sr::content::{GraphicType2D, GraphicType3D, ItemFilter, ValueType};

    const FOR_UID: &str = "1.2.826.0.1.3680043.8.498.7";

    fn tracking(n: u32) -> TrackingIdentifier {
        TrackingIdentifier::new(
            format!("1.2.826.0.1.3680043.8.498.100.{n}"),
            Some(format!("nodule {n}")),
        )
        .unwrap()
    }

    fn point3d() -> Region {
        Region::Reference(
            Scoord3d::new(GraphicType3D::Point, vec![[1.0, 2.0, 3.0]], FOR_UID).unwrap(),
        )
    }

    fn seg_ref(segment: u16) -> Region {
        Region::Segment(
            ImageReference::new(crate::uid::sop_class::SEGMENTATION_STORAGE, "1.2.3.4.5")
                .with_segment(segment),
        )
    }

    #[test]
    fn minimal_planar_group() {
        let g = build_planar_roi_group(&GroupContent::new(tracking(1), sct::NODULE), &[point3d()])
            .unwrap();
        assert_eq!(g.template.as_deref(), Some(TID_PLANAR_ROI));
        let order: Vec<_> = g
            .children
            .iter()
            .map(|c| c.name.value().to_string())
            .collect();
        assert_eq!(order, ["112039", "112040", "111030", "121071"]);
    }

    #[test]
    fn lidc_style_group() {
        let mut content = GroupContent::new(tracking(2), sct::NODULE);
        content.measurements = vec![
            Measurement::new(
                sct::VOLUME,
                DecimalString::new("1234.5").unwrap(),
                ucum::CUBIC_MILLIMETER,
            ),
            Measurement::new(
                sct::DIAMETER,
                DecimalString::new("7.5").unwrap(),
                ucum::MILLIMETER,
            ),
        ];
        let qualities = [
            "Subtlety",
            "Internal structure",
            "Calcification",
            "Sphericity",
            "Margin",
            "Lobulation",
            "Spiculation",
            "Texture",
            "Malignancy",
        ];
        content.evaluations = qualities
            .iter()
            .enumerate()
            .map(|(i, q)| {
                QualitativeEvaluation::new(
                    CodedConcept::new(format!("Q{i}"), "99LIDC", *q),
                    CodedConcept::new("3", "99LIDC", "Moderate"),
                )
            })
            .collect();
        let g = build_planar_roi_group(&content, &[seg_ref(1)]).unwrap();
        assert_eq!(
            g.find_items(&ItemFilter::new().value_type(ValueType::Num))
                .len(),
            2
        );
        let codes = g.find_items(
            &ItemFilter::new()
                .value_type(ValueType::Code)
                .relationship(Contains),
        );
        assert_eq!(codes.len(), 1 + qualities.len());
        let region = g.find_items(&ItemFilter::new().name(dcm::REFERENCED_SEGMENTATION_FRAME));
        assert_eq!(region.len(), 1);
    }

    #[test]
    fn planar_needs_exactly_one_region() {
        let content = GroupContent::new(tracking(3), sct::NODULE);
        assert!(matches!(
            build_planar_roi_group(&content, &[point3d(), seg_ref(1)]),
            Err(SrError::TemplateViolation(_))
        ));
        assert!(matches!(
            build_planar_roi_group(&content, &[]),
            Err(SrError::TemplateViolation(_))
        ));
    }

    #[test]
    fn missing_tracking_and_source() {
        let mut content = GroupContent::new(tracking(4), sct::NODULE);
        let pixel = Region::Pixel {
            scoord: Scoord::new(GraphicType2D::Point, vec![[3.0, 4.0]]).unwrap(),
            source: None,
        };
        assert!(matches!(
            build_planar_roi_group(&content, std::slice::from_ref(&pixel)),
            Err(SrError::MissingReference(_))
        ));
        content.tracking = None;
        assert!(matches!(
            build_planar_roi_group(&content, &[point3d()]),
            Err(SrError::TemplateViolation(_))
        ));
    }

    #[test]
    fn pixel_region_selects_from_source() {
        let content = GroupContent::new(tracking(5), sct::NODULE);
        let source = ImageReference::new(crate::uid::sop_class::CT_IMAGE_STORAGE, "1.2.3.9");
        let pixel = Region::Pixel {
            scoord: Scoord::new(GraphicType2D::Point, vec![[3.0, 4.0]]).unwrap(),
            source: Some(source.clone()),
        };
        let g = build_planar_roi_group(&content, &[pixel]).unwrap();
        let img = g.find_items(
            &ItemFilter::new()
                .value_type(ValueType::Image)
                .relationship(SelectedFrom)
                .recursive(),
        );
        assert_eq!(img.len(), 1);
        assert_eq!(img[0].value, ContentValue::Image(source));
    }

    #[test]
    fn volumetric_forms() {
        let content = GroupContent::new(tracking(6), sct::NODULE);
        let g = build_volumetric_roi_group(&content, &[seg_ref(1)]).unwrap();
        assert_eq!(
            g.find_items(&ItemFilter::new().name(dcm::REFERENCED_SEGMENT))
                .len(),
            1
        );
        let contour = |z: f32| {
            Region::Reference(
                Scoord3d::new(
                    GraphicType3D::Polygon,
                    vec![[0.0, 0.0, z], [1.0, 0.0, z], [1.0, 1.0, z], [0.0, 0.0, z]],
                    FOR_UID,
                )
                .unwrap(),
            )
        };
        let g = build_volumetric_roi_group(&content, &[contour(0.0), contour(1.0)]).unwrap();
        assert_eq!(
            g.find_items(&ItemFilter::new().value_type(ValueType::Scoord3d))
                .len(),
            2
        );
        assert!(build_volumetric_roi_group(&content, &[]).is_err());
        assert!(build_volumetric_roi_group(&content, &[contour(0.0), seg_ref(1)]).is_err());
    }

    #[test]
    fn pathology_measurement_group() {
        let mut content = GroupContent::new(tracking(7), sct::NEOPLASM);
        content.evaluations = vec![
            QualitativeEvaluation::new(
                sct::MORPHOLOGY,
                CodedConcept::new("8140/3", "ICDO3", "Adenocarcinoma, NOS"),
            ),
            QualitativeEvaluation::new(
                sct::TOPOGRAPHY,
                CodedConcept::new("C34.1", "I10C", "Upper lobe, lung"),
            ),
        ];
        content.measurements = vec![Measurement::new(
            CodedConcept::new("5432686", "caDSR", "Percent tumor cells"),
            DecimalString::new("85").unwrap(),
            ucum::PERCENT,
        )];
        let g = build_measurement_group(&content, &[]).unwrap();
        assert_eq!(g.template.as_deref(), Some(TID_MEASUREMENT_GROUP));
        let finding = g.find_items(&ItemFilter::new().name(dcm::FINDING));
        assert_eq!(finding.len(), 1);
        assert_eq!(finding[0].value, ContentValue::Code(sct::NEOPLASM.into()));
        let back = ContentItem::from_dataset(&g.to_dataset()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn report_structure() {
        let groups: Vec<_> = (0..3)
            .map(|i| {
                build_planar_roi_group(
                    &GroupContent::new(tracking(10 + i), sct::NODULE),
                    &[point3d()],
                )
                .unwrap()
            })
            .collect();
        let mut device = DeviceObserver::new("1.2.826.0.1.3680043.8.498.55");
        device.name = Some("detector".into());
        device.algorithm = Some(AlgorithmIdentification::new("RetinaNet", "1.2.0").unwrap());
        let context = ObserverContext::Device(device);
        let report =
            build_measurement_report(&context, &sct::COMPUTED_TOMOGRAPHY.into(), groups).unwrap();
        assert_eq!(report.name, dcm::IMAGING_MEASUREMENT_REPORT);
        assert!(report.relationship.is_none());
        assert_eq!(
            report
                .find_items(&ItemFilter::new().name(dcm::MEASUREMENT_GROUP).recursive())
                .len(),
            3
        );
        let ctx = report.find_items(&ItemFilter::new().relationship(HasObsContext));
        assert!(ctx
            .iter()
            .any(|i| i.name == dcm::ALGORITHM_NAME
                && i.value == ContentValue::Text("RetinaNet".into())));
        assert!(ctx
            .iter()
            .any(|i| i.name == dcm::ALGORITHM_VERSION
                && i.value == ContentValue::Text("1.2.0".into())));
        assert_eq!(ObserverContext::from_items(&report.children), Some(context));
        // Observer context, procedure, library, measurements.
        let tail: Vec<_> = report
            .children
            .iter()
            .rev()
            .take(3)
            .map(|c| c.name.value().to_string())
            .collect();
        assert_eq!(tail, ["126010", "111028", "121058"]);
        report.validate_tree(true).unwrap();
    }

    #[test]
    fn empty_report_is_rejected() {
        let context = ObserverContext::Person {
            name: "Doe^Jane".into(),
        };
        assert!(matches!(
            build_measurement_report(&context, &sct::COMPUTED_TOMOGRAPHY.into(), vec![]),
            Err(SrError::TemplateViolation(_))
        ));
    }
}
