//! The annotation document read by `mk-sr --spec`.

use std::path::{Path, PathBuf};

use dicom_annot::coding::{lookup, CodedConcept};
use dicom_annot::common::{AlgorithmIdentification, TrackingIdentifier};
use dicom_annot::dataset::{tags, DataSet, DecimalString};
use dicom_annot::sr::*;
use dicom_annot::uid::{generate_uid, sop_class};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationSpec {
    pub observer: ObserverSpec,
    #[serde(default = "default_procedure")]
    pub procedure: String,
    /// Source instances, relative to the spec file.
    pub evidence: Vec<PathBuf>,
    pub series_description: Option<String>,
    pub groups: Vec<GroupSpec>,
}

fn default_procedure() -> String {
    "SCT:ImagingProcedure".into()
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObserverSpec {
    Person {
        name: String,
    },
    Device {
        uid: Option<String>,
        name: Option<String>,
        manufacturer: Option<String>,
        model_name: Option<String>,
        algorithm_name: Option<String>,
        algorithm_version: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKindSpec {
    Planar,
    Volumetric,
    Image,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Text(String),
    Float(f64),
    Int(i64),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSpec {
    pub code: String,
    pub value: Number,
    pub unit: String,
    pub qualifier: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationSpec {
    pub code: String,
    pub value: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub kind: GroupKindSpec,
    pub tracking_id: Option<String>,
    pub tracking_uid: Option<String>,
    pub finding: String,
    #[serde(default)]
    pub finding_sites: Vec<String>,
    /// 1-based evidence index the region refers to.
    pub image: Option<usize>,
    /// Evidence indices of an image-level group.
    #[serde(default)]
    pub images: Vec<usize>,
    #[serde(default)]
    pub frames: Vec<u32>,
    pub graphic_type: Option<String>,
    pub polygon: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub polygons: Vec<Vec<Vec<f64>>>,
    pub segment: Option<u16>,
    #[serde(default)]
    pub measurements: Vec<MeasurementSpec>,
    #[serde(default)]
    pub evaluations: Vec<EvaluationSpec>,
}

/// `SCHEME:KEY` resolved against the built-in terminology (KEY is a keyword
/// or code value), or `SCHEME:VALUE:MEANING` taken verbatim.
pub fn parse_code(text: &str) -> Result<CodedConcept, String> {
    let mut it = text.splitn(3, ':');
    match (it.next(), it.next(), it.next()) {
        (Some(scheme), Some(key), None) => lookup(scheme, key).map_err(|e| e.to_string()),
        (Some(scheme), Some(value), Some(meaning)) => {
            CodedConcept::try_new(value, scheme, meaning).map_err(|e| e.to_string())
        }
        _ => Err(format!(
            "code {text:?} must be SCHEME:KEY or SCHEME:VALUE:MEANING"
        )),
    }
}

/// Units default to UCUM when no scheme is given.
pub fn parse_unit(text: &str) -> Result<CodedConcept, String> {
    if text.contains(':') {
        parse_code(text)
    } else {
        lookup("UCUM", text)
            .or_else(|_| CodedConcept::try_new(text, "UCUM", text))
            .map_err(|e| e.to_string())
    }
}

pub fn parse(text: &str) -> Result<AnnotationSpec, String> {
    let spec: AnnotationSpec = toml::from_str(text).map_err(|e| e.to_string())?;
    if spec.evidence.is_empty() {
        return Err("evidence must list at least one file".into());
    }
    if spec.groups.is_empty() {
        return Err("at least one [[groups]] entry is required".into());
    }
    Ok(spec)
}

impl AnnotationSpec {
    pub fn evidence_paths(&self, base: &Path) -> Vec<PathBuf> {
        self.evidence.iter().map(|p| base.join(p)).collect()
    }

    /// Builds the measurement report content tree over loaded evidence.
    pub fn build(&self, evidence: &[DataSet]) -> Result<ContentItem, String> {
        let observer = match &self.observer {
            ObserverSpec::Person { name } => ObserverContext::Person { name: name.clone() },
            ObserverSpec::Device {
                uid,
                name,
                manufacturer,
                model_name,
                algorithm_name,
                algorithm_version,
            } => {
                let mut d = DeviceObserver::new(uid.clone().unwrap_or_else(generate_uid));
                d.name = name.clone();
                d.manufacturer = manufacturer.clone();
                d.model_name = model_name.clone();
                d.algorithm = match (algorithm_name, algorithm_version) {
                    (Some(n), Some(v)) => {
                        Some(AlgorithmIdentification::new(n, v).map_err(|e| e.to_string())?)
                    }
                    (None, None) => None,
                    _ => {
                        return Err(
                            "observer algorithm_name and algorithm_version go together".into()
                        )
                    }
                };
                ObserverContext::Device(d)
            }
        };
        let procedure = parse_code(&self.procedure)?;
        let groups = self
            .groups
            .iter()
            .enumerate()
            .map(|(i, g)| {
                g.build(evidence)
                    .map_err(|e| format!("group {}: {e}", i + 1))
            })
            .collect::<Result<Vec<_>, _>>()?;
        build_measurement_report(&observer, &procedure, groups).map_err(|e| e.to_string())
    }
}

fn evidence_at(evidence: &[DataSet], index: usize) -> Result<&DataSet, String> {
    index
        .checked_sub(1)
        .and_then(|i| evidence.get(i))
        .ok_or_else(|| format!("evidence index {index} out of range 1..={}", evidence.len()))
}

fn is_segmentation(ds: &DataSet) -> bool {
    ds.string(tags::SOP_CLASS_UID) == Some(sop_class::SEGMENTATION_STORAGE)
}

impl GroupSpec {
    fn content(&self) -> Result<GroupContent, String> {
        let tracking = match &self.tracking_uid {
            Some(uid) => TrackingIdentifier::new(uid.clone(), self.tracking_id.clone())
                .map_err(|e| e.to_string())?,
            None => TrackingIdentifier::generate(self.tracking_id.clone()),
        };
        let mut c = GroupContent::new(tracking, parse_code(&self.finding)?);
        c.finding_sites = self
            .finding_sites
            .iter()
            .map(|s| parse_code(s))
            .collect::<Result<_, _>>()?;
        for m in &self.measurements {
            let text = match &m.value {
                Number::Text(s) => s.clone(),
                Number::Float(f) => f.to_string(),
                Number::Int(i) => i.to_string(),
            };
            let value = DecimalString::new(text.as_str()).map_err(|e| e.to_string())?;
            let mut measurement =
                Measurement::new(parse_code(&m.code)?, value, parse_unit(&m.unit)?);
            measurement.qualifier = m.qualifier.as_deref().map(parse_code).transpose()?;
            c.measurements.push(measurement);
        }
        for e in &self.evaluations {
            c.evaluations.push(QualitativeEvaluation::new(
                parse_code(&e.code)?,
                parse_code(&e.value)?,
            ));
        }
        Ok(c)
    }

    fn region(&self, evidence: &[DataSet], points: &[Vec<f64>]) -> Result<Region, String> {
        let image = evidence_at(evidence, self.image.unwrap_or(1))?;
        let dims: Vec<usize> = points.iter().map(Vec::len).collect();
        if dims.iter().all(|&d| d == 2) {
            let gt = self.graphic_type.as_deref().unwrap_or("POLYLINE");
            let gt: GraphicType2D = gt.parse().map_err(|e: SrError| e.to_string())?;
            let pts = points.iter().map(|p| [p[0] as f32, p[1] as f32]).collect();
            let scoord = Scoord::new(gt, pts).map_err(|e| e.to_string())?;
            let mut source = ImageReference::to_instance(image).map_err(|e| e.to_string())?;
            if !self.frames.is_empty() {
                source = source.with_frames(self.frames.clone());
            }
            Ok(Region::Pixel {
                scoord,
                source: Some(source),
            })
        } else if dims.iter().all(|&d| d == 3) {
            let gt = self.graphic_type.as_deref().unwrap_or("POLYGON");
            let gt: GraphicType3D = gt.parse().map_err(|e: SrError| e.to_string())?;
            let for_uid = image
                .string(tags::FRAME_OF_REFERENCE_UID)
                .ok_or("3D polygon needs an evidence image with a FrameOfReferenceUID")?;
            let pts = points
                .iter()
                .map(|p| [p[0] as f32, p[1] as f32, p[2] as f32])
                .collect();
            Ok(Region::Reference(
                Scoord3d::new(gt, pts, for_uid).map_err(|e| e.to_string())?,
            ))
        } else {
            Err(
                "polygon points must all have 2 (column, row) or all 3 (x, y, z) coordinates"
                    .into(),
            )
        }
    }

    fn regions(&self, evidence: &[DataSet]) -> Result<Vec<Region>, String> {
        let mut contours: Vec<&Vec<Vec<f64>>> = self.polygon.iter().collect();
        contours.extend(&self.polygons);
        match (self.segment, contours.is_empty()) {
            (Some(_), false) => Err("a group has either polygons or a segment, not both".into()),
            (Some(n), true) => {
                let seg = match self.image {
                    Some(i) => evidence_at(evidence, i)?,
                    None => evidence
                        .iter()
                        .find(|d| is_segmentation(d))
                        .ok_or("segment reference needs a segmentation in evidence")?,
                };
                if !is_segmentation(seg) {
                    return Err("segment reference must point at a segmentation".into());
                }
                let mut r = ImageReference::to_instance(seg)
                    .map_err(|e| e.to_string())?
                    .with_segment(n);
                if !self.frames.is_empty() {
                    r = r.with_frames(self.frames.clone());
                }
                Ok(vec![Region::Segment(r)])
            }
            (None, _) => contours.iter().map(|p| self.region(evidence, p)).collect(),
        }
    }

    fn build(&self, evidence: &[DataSet]) -> Result<ContentItem, String> {
        let content = self.content()?;
        let built = match self.kind {
            GroupKindSpec::Planar => build_planar_roi_group(&content, &self.regions(evidence)?),
            GroupKindSpec::Volumetric => {
                build_volumetric_roi_group(&content, &self.regions(evidence)?)
            }
            GroupKindSpec::Image => {
                if self.polygon.is_some() || !self.polygons.is_empty() || self.segment.is_some() {
                    return Err("image-level groups take no region".into());
                }
                let indices = if self.images.is_empty() {
                    vec![1]
                } else {
                    self.images.clone()
                };
                let refs = indices
                    .into_iter()
                    .map(|i| {
                        ImageReference::to_instance(evidence_at(evidence, i)?)
                            .map_err(|e| e.to_string())
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                build_measurement_group(&content, &refs)
            }
        };
        built.map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dicom_annot::coding::codes::{sct, ucum};

    #[test]
    fn code_syntax() {
        assert_eq!(parse_code("SCT:Nodule").unwrap(), sct::NODULE);
        assert_eq!(parse_code("SCT:27925004").unwrap(), sct::NODULE);
        let custom = parse_code("99LOCAL:A1:Odd: meaning").unwrap();
        assert_eq!(
            (custom.scheme(), custom.value(), custom.meaning()),
            ("99LOCAL", "A1", "Odd: meaning")
        );
        assert!(parse_code("Nodule").is_err());
        assert!(parse_code("SCT:NoSuchThing").is_err());
        assert_eq!(parse_unit("mm").unwrap(), ucum::MILLIMETER);
        assert_eq!(parse_unit("UCUM:mm3").unwrap(), ucum::CUBIC_MILLIMETER);
    }

    #[test]
    fn schema_is_strict() {
        let ok = r#"
            evidence = ["a.dcm"]
            [observer]
            type = "person"
            name = "Doe^Jane"
            [[groups]]
            kind = "planar"
            finding = "SCT:Nodule"
            polygon = [[1, 1], [4, 1], [4, 4], [1, 1]]
            [[groups.measurements]]
            code = "SCT:Diameter"
            value = "4.2"
            unit = "mm"
        "#;
        let spec = parse(ok).unwrap();
        assert_eq!(spec.groups[0].measurements.len(), 1);
        assert!(parse(&ok.replace("kind = \"planar\"", "kind = \"planar\"\ncolour = 3")).is_err());
        assert!(parse(&ok.replace("\"planar\"", "\"round\"")).is_err());
        assert!(parse(&ok.replace("[\"a.dcm\"]", "[]")).is_err());
    }
}
