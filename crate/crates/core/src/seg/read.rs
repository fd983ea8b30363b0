use std::collections::HashMap;

use ndarray::{Array2, Array3};

use crate::coding::CodedConcept;
use crate::common::InstanceReference;
use crate::dataset::{tags, DataSet};
use crate::geometry::{image_geometry, ImageGeometry, PlanePosition};
use crate::uid::sop_class;

use super::pack::{packed_len, unpack_bits};
use super::{FractionalType, SegError, SegmentDescription, SegmentationType, SourceFrameRef};

/// One stored frame of a segmentation.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    /// 1-based.
    pub number: u32,
    pub segment_number: u16,
    pub source: Option<SourceFrameRef>,
    pub position: Option<PlanePosition>,
}

/// A parsed Segmentation instance.
#[derive(Debug, Clone)]
pub struct Segmentation {
    pub sop_instance_uid: String,
    pub series_instance_uid: String,
    pub study_instance_uid: String,
    pub frame_of_reference_uid: Option<String>,
    pub seg_type: SegmentationType,
    pub rows: usize,
    pub columns: usize,
    pub descriptions: Vec<SegmentDescription>,
    pub frames: Vec<FrameRecord>,
    pub referenced_instances: Vec<InstanceReference>,
    pub geometry: ImageGeometry,
    pixel_data: Vec<u8>,
    lookup: HashMap<(u16, SourceFrameRef), usize>,
}

fn malformed(msg: impl Into<String>) -> SegError {
    SegError::Malformed(msg.into())
}

fn read_type(ds: &DataSet) -> Result<SegmentationType, SegError> {
    match ds.string(tags::SEGMENTATION_TYPE) {
        Some("BINARY") => Ok(SegmentationType::Binary),
        Some("FRACTIONAL") => {
            let kind = match ds.string(tags::SEGMENTATION_FRACTIONAL_TYPE) {
                Some("PROBABILITY") => FractionalType::Probability,
                Some("OCCUPANCY") => FractionalType::Occupancy,
                other => return Err(malformed(format!("SegmentationFractionalType {other:?}"))),
            };
            let max = ds
                .int(tags::MAXIMUM_FRACTIONAL_VALUE)
                .and_then(|v| u8::try_from(v).ok())
                .ok_or_else(|| malformed("MaximumFractionalValue missing or out of range"))?;
            SegmentationType::fractional(kind, max)
        }
        other => Err(malformed(format!("SegmentationType {other:?}"))),
    }
}

/// Parses a Segmentation instance.
pub fn open_seg(ds: &DataSet) -> Result<Segmentation, SegError> {
    match ds.string(tags::SOP_CLASS_UID) {
        Some(sop_class::SEGMENTATION_STORAGE) => {}
        other => return Err(SegError::WrongSopClass(other.unwrap_or("").to_string())),
    }
    let uid = |tag, name: &str| {
        ds.string(tag)
            .map(str::to_string)
            .ok_or_else(|| malformed(format!("missing {name}")))
    };
    let seg_type = read_type(ds)?;
    let geometry = image_geometry(ds)?;
    let (rows, columns) = (geometry.rows, geometry.columns);

    let descriptions = ds
        .sequence(tags::SEGMENT_SEQUENCE)
        .ok_or_else(|| malformed("missing SegmentSequence"))?
        .iter()
        .map(SegmentDescription::from_item)
        .collect::<Result<Vec<_>, _>>()?;

    let per_frame = ds
        .sequence(tags::PER_FRAME_FUNCTIONAL_GROUPS_SEQUENCE)
        .ok_or_else(|| malformed("missing PerFrameFunctionalGroupsSequence"))?;
    let n_frames = ds.int(tags::NUMBER_OF_FRAMES).unwrap_or(1);
    if n_frames < 0 || per_frame.len() != n_frames as usize {
        return Err(malformed(format!(
            "NumberOfFrames is {n_frames} but {} per-frame items are present",
            per_frame.len()
        )));
    }

    let referenced_instances: Vec<InstanceReference> = ds
        .sequence(tags::REFERENCED_SERIES_SEQUENCE)
        .unwrap_or(&[])
        .iter()
        .flat_map(|series| {
            let series_uid = series
                .string(tags::SERIES_INSTANCE_UID)
                .unwrap_or("")
                .to_string();
            let study_uid = ds
                .string(tags::STUDY_INSTANCE_UID)
                .unwrap_or("")
                .to_string();
            series
                .sequence(tags::REFERENCED_INSTANCE_SEQUENCE)
                .unwrap_or(&[])
                .iter()
                .map(move |inst| InstanceReference {
                    study_instance_uid: study_uid.clone(),
                    series_instance_uid: series_uid.clone(),
                    sop_class_uid: inst
                        .string(tags::REFERENCED_SOP_CLASS_UID)
                        .unwrap_or("")
                        .to_string(),
                    sop_instance_uid: inst
                        .string(tags::REFERENCED_SOP_INSTANCE_UID)
                        .unwrap_or("")
                        .to_string(),
                })
        })
        .collect();

    let mut frames = Vec::with_capacity(per_frame.len());
    for (i, item) in per_frame.iter().enumerate() {
        let number = i as u32 + 1;
        let segment_number = item
            .item(tags::SEGMENT_IDENTIFICATION_SEQUENCE)
            .and_then(|s| s.int(tags::REFERENCED_SEGMENT_NUMBER))
            .and_then(|n| u16::try_from(n).ok())
            .ok_or_else(|| {
                malformed(format!("frame {number} lacks a referenced segment number"))
            })?;
        if !descriptions.iter().any(|d| d.number == segment_number) {
            return Err(malformed(format!(
                "frame {number} references undescribed segment {segment_number}"
            )));
        }
        let source = item
            .item(tags::DERIVATION_IMAGE_SEQUENCE)
            .and_then(|d| d.item(tags::SOURCE_IMAGE_SEQUENCE))
            .and_then(|s| {
                let instance = s.string(tags::REFERENCED_SOP_INSTANCE_UID)?;
                let frame = s
                    .ints(tags::REFERENCED_FRAME_NUMBER)
                    .and_then(|v| v.first().copied())
                    .unwrap_or(1);
                Some(SourceFrameRef::new(instance, u32::try_from(frame).ok()?))
            });
        frames.push(FrameRecord {
            number,
            segment_number,
            source,
            position: geometry.frames.get(i).and_then(|f| f.position),
        });
    }

    let pixel_data = ds
        .bytes(tags::PIXEL_DATA)
        .ok_or_else(|| malformed("missing PixelData"))?
        .to_vec();
    let pixels = rows * columns * frames.len();
    let expected = match seg_type {
        SegmentationType::Binary => pixels.div_ceil(8),
        SegmentationType::Fractional { .. } => pixels,
    };
    let padded = match seg_type {
        SegmentationType::Binary => packed_len(pixels),
        SegmentationType::Fractional { .. } => pixels + pixels % 2,
    };
    if pixel_data.len() != expected && pixel_data.len() != padded {
        return Err(malformed(format!(
            "PixelData holds {} bytes; {} frames of {rows}x{columns} need {expected}",
            pixel_data.len(),
            frames.len()
        )));
    }

    let lookup = frames
        .iter()
        .enumerate()
        .filter_map(|(i, f)| f.source.clone().map(|s| ((f.segment_number, s), i)))
        .collect();

    Ok(Segmentation {
        sop_instance_uid: uid(tags::SOP_INSTANCE_UID, "SOPInstanceUID")?,
        series_instance_uid: uid(tags::SERIES_INSTANCE_UID, "SeriesInstanceUID")?,
        study_instance_uid: uid(tags::STUDY_INSTANCE_UID, "StudyInstanceUID")?,
        frame_of_reference_uid: ds.string(tags::FRAME_OF_REFERENCE_UID).map(str::to_string),
        seg_type,
        rows,
        columns,
        descriptions,
        frames,
        referenced_instances,
        geometry,
        pixel_data,
        lookup,
    })
}

impl Segmentation {
    pub fn description(&self, segment: u16) -> Option<&SegmentDescription> {
        self.descriptions.iter().find(|d| d.number == segment)
    }

    /// Stored values of a 0-based stored frame.
    fn stored(&self, index: usize) -> Vec<u8> {
        let n = self.rows * self.columns;
        match self.seg_type {
            SegmentationType::Binary => unpack_bits(&self.pixel_data, index * n, n),
            SegmentationType::Fractional { .. } => {
                self.pixel_data[index * n..(index + 1) * n].to_vec()
            }
        }
    }

    fn references_instance(&self, uid: &str) -> bool {
        self.referenced_instances
            .iter()
            .any(|r| r.sop_instance_uid == uid)
            || self
                .frames
                .iter()
                .any(|f| f.source.as_ref().is_some_and(|s| s.sop_instance_uid == uid))
    }

    fn check_source(&self, frame: &SourceFrameRef) -> Result<(), SegError> {
        if self.references_instance(&frame.sop_instance_uid) {
            Ok(())
        } else {
            Err(SegError::UnmappedFrame {
                sop_instance_uid: frame.sop_instance_uid.clone(),
                frame: frame.frame_number,
            })
        }
    }
}

/// Criteria for [`find_segments`]; unset fields match anything.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SegmentFilter {
    pub label: Option<String>,
    pub category: Option<CodedConcept>,
    pub property_type: Option<CodedConcept>,
    pub tracking_uid: Option<String>,
}

impl SegmentFilter {
    pub fn accepts(&self, d: &SegmentDescription) -> bool {
        self.label.as_ref().is_none_or(|l| *l == d.label)
            && self
                .category
                .as_ref()
                .is_none_or(|c| c.matches(&d.category))
            && self
                .property_type
                .as_ref()
                .is_none_or(|c| c.matches(&d.property_type))
            && self
                .tracking_uid
                .as_ref()
                .is_none_or(|u| d.tracking.as_ref().is_some_and(|t| t.uid == *u))
    }
}

/// Numbers of matching segments, ascending.
pub fn find_segments(seg: &Segmentation, filter: &SegmentFilter) -> Vec<u16> {
    let mut out: Vec<u16> = seg
        .descriptions
        .iter()
        .filter(|d| filter.accepts(d))
        .map(|d| d.number)
        .collect();
    out.sort_unstable();
    out
}

/// Pixels of one segment over the given source frames, as a
/// (frame, row, column) stack. Binary segments yield 0/1; fractional
/// segments yield stored values rescaled to [0, 1]. Source frames of
/// referenced instances with no stored frame are all zero.
pub fn segment_pixels(
    seg: &Segmentation,
    segment: u16,
    sources: &[SourceFrameRef],
) -> Result<Array3<f32>, SegError> {
    if seg.description(segment).is_none() {
        return Err(SegError::UnknownSegment(segment));
    }
    let mut out = Array3::zeros((sources.len(), seg.rows, seg.columns));
    for (k, src) in sources.iter().enumerate() {
        seg.check_source(src)?;
        if let Some(&i) = seg.lookup.get(&(segment, src.clone())) {
            let values = seg.stored(i);
            for (dst, v) in out
                .index_axis_mut(ndarray::Axis(0), k)
                .iter_mut()
                .zip(values)
            {
                *dst = seg.seg_type.rescale(v);
            }
        }
    }
    Ok(out)
}

/// Label map of a binary segmentation for one source frame: each pixel
/// holds the highest selected segment number covering it, or 0.
pub fn label_map(
    seg: &Segmentation,
    source: &SourceFrameRef,
    segments: Option<&[u16]>,
) -> Result<Array2<u16>, SegError> {
    if seg.seg_type != SegmentationType::Binary {
        return Err(SegError::NotBinary);
    }
    seg.check_source(source)?;
    let mut selected: Vec<u16> = match segments {
        Some(s) => {
            if let Some(&bad) = s.iter().find(|&&n| seg.description(n).is_none()) {
                return Err(SegError::UnknownSegment(bad));
            }
            s.to_vec()
        }
        None => seg.descriptions.iter().map(|d| d.number).collect(),
    };
    selected.sort_unstable();
    let mut out = Array2::zeros((seg.rows, seg.columns));
    for n in selected {
        if let Some(&i) = seg.lookup.get(&(n, source.clone())) {
            for (dst, v) in out.iter_mut().zip(seg.stored(i)) {
                if v != 0 {
                    *dst = n;
                }
            }
        }
    }
    Ok(out)
}
