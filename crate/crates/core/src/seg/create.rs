use std::collections::{BTreeSet, HashSet};

use ndarray::{Array3, ArrayView2};

use crate::coding::code_sequence;
use crate::coding::codes::dcm;
use crate::common::{copy_patient_study, now_da_tm, InstanceReference, PATIENT_STUDY};
use crate::dataset::{tags, DataElement, DataSet, Tag, Value, VR};
use crate::geometry::{ds, image_geometry, plane_position_item, ImageGeometry, PlanePosition};
use crate::uid::{generate_uid, sop_class};

use super::pack::pack_bits;
use super::{SegError, SegmentDescription, SegmentationType};

/// Identification of a new segmentation instance and its series.
#[derive(Debug, Clone, PartialEq)]
pub struct SegMeta {
    pub series_instance_uid: String,
    pub sop_instance_uid: String,
    pub series_number: i64,
    pub instance_number: i64,
    pub series_description: Option<String>,
    pub manufacturer: String,
    pub manufacturer_model_name: String,
    pub software_versions: String,
    pub device_serial_number: String,
    pub content_label: String,
    pub content_description: Option<String>,
    pub content_creator_name: Option<String>,
}

impl Default for SegMeta {
    fn default() -> Self {
        SegMeta {
            series_instance_uid: generate_uid(),
            sop_instance_uid: generate_uid(),
            series_number: 1,
            instance_number: 1,
            series_description: None,
            manufacturer: "dicom-annot".into(),
            manufacturer_model_name: "dicom-annot".into(),
            software_versions: env!("CARGO_PKG_VERSION").into(),
            device_serial_number: "1".into(),
            content_label: "SEGMENTATION".into(),
            content_description: None,
            content_creator_name: None,
        }
    }
}

struct SourceFrame<'a> {
    source: &'a InstanceReference,
    geometry: &'a ImageGeometry,
    frame_number: u32,
    position: Option<PlanePosition>,
}

fn tags_element(tag: Tag, values: Vec<Tag>) -> DataElement {
    DataElement::new(tag, VR::AT, Value::Tags(values))
}

/// 1-based ranks of distinct values, in ascending order.
fn ranks(values: &[i64]) -> impl Fn(i64) -> i64 {
    let distinct: Vec<i64> = values
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    move |v| {
        distinct
            .binary_search(&v)
            .map(|i| i as i64 + 1)
            .unwrap_or(0)
    }
}

/// Builds a Segmentation instance. `masks[i]` holds segment
/// `descriptions[i]` as a (frame, row, column) stack aligned with the
/// concatenated frames of `sources`.
pub fn create_seg(
    sources: &[DataSet],
    masks: &[Array3<f32>],
    descriptions: &[SegmentDescription],
    seg_type: SegmentationType,
    omit_empty: bool,
    meta: &SegMeta,
) -> Result<DataSet, SegError> {
    let first = sources.first().ok_or(SegError::MissingSource)?;
    let refs = sources
        .iter()
        .map(|s| {
            InstanceReference::of(s).ok_or_else(|| {
                SegError::Malformed(
                    "source image lacks study, series, SOP class or SOP instance UID".into(),
                )
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if refs
        .iter()
        .any(|r| r.study_instance_uid != refs[0].study_instance_uid)
    {
        return Err(SegError::MixedStudies);
    }
    let mut seen = HashSet::new();
    if let Some(dup) = refs.iter().find(|r| !seen.insert(&r.sop_instance_uid)) {
        return Err(SegError::Shape(format!(
            "source instance {} supplied twice",
            dup.sop_instance_uid
        )));
    }
    let geometries = sources
        .iter()
        .map(image_geometry)
        .collect::<Result<Vec<_>, _>>()?;
    let g0 = &geometries[0];
    for (g, r) in geometries.iter().zip(&refs).skip(1) {
        g0.compatible_with(g)
            .map_err(|e| SegError::GeometryMismatch(format!("{}: {e}", r.sop_instance_uid)))?;
    }
    let frames: Vec<SourceFrame> = geometries
        .iter()
        .zip(&refs)
        .flat_map(|(g, r)| {
            g.frames.iter().map(move |f| SourceFrame {
                source: r,
                geometry: g,
                frame_number: f.frame_number,
                position: f.position,
            })
        })
        .collect();
    let has_positions = frames.iter().all(|f| f.position.is_some());
    let (rows, cols) = (g0.rows, g0.columns);

    if masks.len() != descriptions.len() {
        return Err(SegError::Shape(format!(
            "{} mask stacks for {} segment descriptions",
            masks.len(),
            descriptions.len()
        )));
    }
    if descriptions.is_empty() {
        return Err(SegError::Numbering(
            "at least one segment is required".into(),
        ));
    }
    for (i, d) in descriptions.iter().enumerate() {
        if usize::from(d.number) != i + 1 {
            return Err(SegError::Numbering(format!(
                "segment numbers must be consecutive from 1; position {} has number {}",
                i + 1,
                d.number
            )));
        }
        d.validate()?;
    }
    for (d, m) in descriptions.iter().zip(masks) {
        if m.dim() != (frames.len(), rows, cols) {
            return Err(SegError::Shape(format!(
                "segment {} mask is {:?}, sources need ({}, {rows}, {cols})",
                d.number,
                m.dim(),
                frames.len()
            )));
        }
    }

    // Quantize everything first so domain errors surface before any output.
    let mut emitted: Vec<(usize, usize, Vec<u8>)> = Vec::new();
    for (s, m) in masks.iter().enumerate() {
        for (f, plane) in m.outer_iter().enumerate() {
            let stored = quantize_plane(plane, seg_type, descriptions[s].number, f + 1)?;
            if omit_empty && stored.iter().all(|&v| v == 0) {
                continue;
            }
            emitted.push((s, f, stored));
        }
    }
    if emitted.is_empty() {
        // A segmentation needs at least one frame.
        emitted.push((0, 0, vec![0; rows * cols]));
    }

    let mut out = DataSet::new();
    out.set_text(tags::SPECIFIC_CHARACTER_SET, VR::CS, "ISO_IR 192");
    out.set_strings(
        tags::IMAGE_TYPE,
        VR::CS,
        vec!["DERIVED".into(), "PRIMARY".into()],
    );
    out.set_uid(tags::SOP_CLASS_UID, sop_class::SEGMENTATION_STORAGE);
    out.set_uid(tags::SOP_INSTANCE_UID, &meta.sop_instance_uid);
    out.set_text(tags::MODALITY, VR::CS, "SEG");
    out.set_uid(tags::SERIES_INSTANCE_UID, &meta.series_instance_uid);
    out.set_int(tags::SERIES_NUMBER, VR::IS, meta.series_number);
    out.set_int(tags::INSTANCE_NUMBER, VR::IS, meta.instance_number);
    if let Some(d) = &meta.series_description {
        out.set_text(tags::SERIES_DESCRIPTION, VR::LO, d);
    }
    out.set_text(tags::MANUFACTURER, VR::LO, &meta.manufacturer);
    out.set_text(
        tags::MANUFACTURER_MODEL_NAME,
        VR::LO,
        &meta.manufacturer_model_name,
    );
    out.set_text(tags::SOFTWARE_VERSIONS, VR::LO, &meta.software_versions);
    out.set_text(
        tags::DEVICE_SERIAL_NUMBER,
        VR::LO,
        &meta.device_serial_number,
    );
    let (date, time) = now_da_tm();
    out.set_text(tags::CONTENT_DATE, VR::DA, &date);
    out.set_text(tags::CONTENT_TIME, VR::TM, &time);
    out.set_text(tags::INSTANCE_CREATION_DATE, VR::DA, &date);
    out.set_text(tags::INSTANCE_CREATION_TIME, VR::TM, &time);
    out.set_text(tags::CONTENT_LABEL, VR::CS, &meta.content_label);
    out.set_text(
        tags::CONTENT_DESCRIPTION,
        VR::LO,
        meta.content_description.as_deref().unwrap_or(""),
    );
    out.set_text(
        tags::CONTENT_CREATOR_NAME,
        VR::PN,
        meta.content_creator_name.as_deref().unwrap_or(""),
    );

    copy_patient_study(first, &mut out);
    debug_assert!(PATIENT_STUDY.iter().all(|(t, _)| out.contains(*t)));
    match &g0.frame_of_reference_uid {
        Some(uid) => {
            out.set_uid(tags::FRAME_OF_REFERENCE_UID, uid);
            out.set_text(tags::POSITION_REFERENCE_INDICATOR, VR::LO, "");
        }
        None if has_positions => {
            return Err(SegError::GeometryMismatch(
                "source images carry positions but no frame of reference".into(),
            ))
        }
        None => {}
    }
    if g0.slide {
        for tag in [
            tags::CONTAINER_IDENTIFIER,
            tags::SPECIMEN_DESCRIPTION_SEQUENCE,
            tags::TOTAL_PIXEL_MATRIX_ROWS,
            tags::TOTAL_PIXEL_MATRIX_COLUMNS,
        ] {
            if let Some(e) = first.get(tag) {
                out.put(e.clone());
            }
        }
        if let Some(o) = g0.orientation {
            out.set_decimals(tags::IMAGE_ORIENTATION_SLIDE, o.map(ds).to_vec());
        }
    }

    out.set_int(tags::SAMPLES_PER_PIXEL, VR::US, 1);
    out.set_text(tags::PHOTOMETRIC_INTERPRETATION, VR::CS, "MONOCHROME2");
    out.set_int(tags::ROWS, VR::US, rows as i64);
    out.set_int(tags::COLUMNS, VR::US, cols as i64);
    let bits = i64::from(seg_type.bits_allocated());
    out.set_int(tags::BITS_ALLOCATED, VR::US, bits);
    out.set_int(tags::BITS_STORED, VR::US, bits);
    out.set_int(tags::HIGH_BIT, VR::US, bits - 1);
    out.set_int(tags::PIXEL_REPRESENTATION, VR::US, 0);
    out.set_text(tags::LOSSY_IMAGE_COMPRESSION, VR::CS, "00");
    match seg_type {
        SegmentationType::Binary => {
            out.set_text(tags::SEGMENTATION_TYPE, VR::CS, "BINARY");
        }
        SegmentationType::Fractional { kind, max_value } => {
            out.set_text(tags::SEGMENTATION_TYPE, VR::CS, "FRACTIONAL");
            out.set_text(tags::SEGMENTATION_FRACTIONAL_TYPE, VR::CS, kind.as_str());
            out.set_int(tags::MAXIMUM_FRACTIONAL_VALUE, VR::US, i64::from(max_value));
        }
    }
    out.set_sequence(
        tags::SEGMENT_SEQUENCE,
        descriptions
            .iter()
            .map(SegmentDescription::to_item)
            .collect(),
    );

    // Dimensions: segment, then plane position.
    let dim_uid = generate_uid();
    let mut dim_org = DataSet::new();
    dim_org.set_uid(tags::DIMENSION_ORGANIZATION_UID, &dim_uid);
    out.set_sequence(tags::DIMENSION_ORGANIZATION_SEQUENCE, vec![dim_org]);
    let mut pointers = vec![(
        tags::REFERENCED_SEGMENT_NUMBER,
        tags::SEGMENT_IDENTIFICATION_SEQUENCE,
    )];
    if has_positions {
        if g0.slide {
            pointers.push((
                tags::COLUMN_POSITION_IN_TOTAL_IMAGE_PIXEL_MATRIX,
                tags::PLANE_POSITION_SLIDE_SEQUENCE,
            ));
            pointers.push((
                tags::ROW_POSITION_IN_TOTAL_IMAGE_PIXEL_MATRIX,
                tags::PLANE_POSITION_SLIDE_SEQUENCE,
            ));
        } else {
            pointers.push((tags::IMAGE_POSITION_PATIENT, tags::PLANE_POSITION_SEQUENCE));
        }
    }
    let dim_index = pointers
        .iter()
        .map(|&(pointer, group)| {
            let mut item = DataSet::new();
            item.set_uid(tags::DIMENSION_ORGANIZATION_UID, &dim_uid);
            item.put(tags_element(tags::DIMENSION_INDEX_POINTER, vec![pointer]));
            item.put(tags_element(tags::FUNCTIONAL_GROUP_POINTER, vec![group]));
            item
        })
        .collect();
    out.set_sequence(tags::DIMENSION_INDEX_SEQUENCE, dim_index);

    let mut shared = DataSet::new();
    if let Some(sp) = g0.spacing {
        let mut pm = DataSet::new();
        pm.set_decimals(tags::PIXEL_SPACING, vec![ds(sp.row), ds(sp.column)]);
        if let Some(e) = first.get(tags::SLICE_THICKNESS) {
            pm.put(e.clone());
        }
        shared.set_sequence(tags::PIXEL_MEASURES_SEQUENCE, vec![pm]);
    }
    if let (Some(o), false) = (g0.orientation, g0.slide) {
        let mut po = DataSet::new();
        po.set_decimals(tags::IMAGE_ORIENTATION_PATIENT, o.map(ds).to_vec());
        shared.set_sequence(tags::PLANE_ORIENTATION_SEQUENCE, vec![po]);
    }
    out.set_sequence(tags::SHARED_FUNCTIONAL_GROUPS_SEQUENCE, vec![shared]);

    let position_index = plane_indexer(&frames, g0);
    let per_frame = emitted
        .iter()
        .map(|&(s, f, _)| {
            let src = &frames[f];
            let mut item = DataSet::new();

            let mut source_image = DataSet::new();
            source_image.set_uid(tags::REFERENCED_SOP_CLASS_UID, &src.source.sop_class_uid);
            source_image.set_uid(
                tags::REFERENCED_SOP_INSTANCE_UID,
                &src.source.sop_instance_uid,
            );
            if src.geometry.multi_frame {
                source_image.set_ints(
                    tags::REFERENCED_FRAME_NUMBER,
                    VR::IS,
                    vec![i64::from(src.frame_number)],
                );
            }
            source_image.set_sequence(
                tags::PURPOSE_OF_REFERENCE_CODE_SEQUENCE,
                code_sequence(&dcm::SOURCE_IMAGE_FOR_PROCESSING.into()),
            );
            let mut derivation = DataSet::new();
            derivation.set_sequence(
                tags::DERIVATION_CODE_SEQUENCE,
                code_sequence(&dcm::SEGMENTATION.into()),
            );
            derivation.set_sequence(tags::SOURCE_IMAGE_SEQUENCE, vec![source_image]);
            item.set_sequence(tags::DERIVATION_IMAGE_SEQUENCE, vec![derivation]);

            let mut content = DataSet::new();
            let mut index = vec![i64::from(descriptions[s].number)];
            index.extend(position_index(f));
            content.set_ints(tags::DIMENSION_INDEX_VALUES, VR::UL, index);
            item.set_sequence(tags::FRAME_CONTENT_SEQUENCE, vec![content]);

            if let Some(p) = &src.position {
                let (tag, pos) = plane_position_item(p);
                item.set_sequence(tag, vec![pos]);
            }
            let mut ident = DataSet::new();
            ident.set_int(
                tags::REFERENCED_SEGMENT_NUMBER,
                VR::US,
                i64::from(descriptions[s].number),
            );
            item.set_sequence(tags::SEGMENT_IDENTIFICATION_SEQUENCE, vec![ident]);
            item
        })
        .collect();
    out.set_sequence(tags::PER_FRAME_FUNCTIONAL_GROUPS_SEQUENCE, per_frame);
    out.set_int(tags::NUMBER_OF_FRAMES, VR::IS, emitted.len() as i64);

    out.set_sequence(tags::REFERENCED_SERIES_SEQUENCE, referenced_series(&refs));

    let pixel_data = match seg_type {
        SegmentationType::Binary => {
            let bits: Vec<u8> = emitted
                .iter()
                .flat_map(|(_, _, v)| v.iter().copied())
                .collect();
            pack_bits(&bits)
        }
        SegmentationType::Fractional { .. } => emitted
            .iter()
            .flat_map(|(_, _, v)| v.iter().copied())
            .collect(),
    };
    out.set_bytes(tags::PIXEL_DATA, VR::OB, pixel_data);
    Ok(out)
}

fn quantize_plane(
    plane: ArrayView2<f32>,
    seg_type: SegmentationType,
    segment: u16,
    frame: usize,
) -> Result<Vec<u8>, SegError> {
    plane
        .iter()
        .map(|&v| {
            seg_type.quantize(v).ok_or_else(|| {
                let domain = match seg_type {
                    SegmentationType::Binary => "{0, 1}",
                    SegmentationType::Fractional { .. } => "[0, 1]",
                };
                SegError::Domain(format!(
                    "segment {segment}, source frame {frame}: value {v} is outside {domain}"
                ))
            })
        })
        .collect()
}

/// Dimension index values of the plane position for each source frame.
fn plane_indexer<'a>(
    frames: &'a [SourceFrame],
    g0: &ImageGeometry,
) -> Box<dyn Fn(usize) -> Vec<i64> + 'a> {
    if !frames.iter().all(|f| f.position.is_some()) {
        return Box::new(|_| Vec::new());
    }
    if g0.slide {
        let cols: Vec<i64> = frames
            .iter()
            .map(|f| match f.position {
                Some(PlanePosition::Slide { column, .. }) => column,
                _ => 0,
            })
            .collect();
        let rows: Vec<i64> = frames
            .iter()
            .map(|f| match f.position {
                Some(PlanePosition::Slide { row, .. }) => row,
                _ => 0,
            })
            .collect();
        let (rc, rr) = (ranks(&cols), ranks(&rows));
        Box::new(move |f| vec![rc(cols[f]), rr(rows[f])])
    } else {
        // Rank by distance along the plane normal, in micrometers.
        let normal = g0
            .orientation
            .map(|o| crate::spatial::cross([o[0], o[1], o[2]], [o[3], o[4], o[5]]))
            .unwrap_or([0.0, 0.0, 1.0]);
        let keys: Vec<i64> = frames
            .iter()
            .map(|f| {
                let p = f.position.map(|p| p.coordinates()).unwrap_or_default();
                (crate::spatial::dot(p, normal) * 1000.0).round() as i64
            })
            .collect();
        let r = ranks(&keys);
        Box::new(move |f| vec![r(keys[f])])
    }
}

fn referenced_series(refs: &[InstanceReference]) -> Vec<DataSet> {
    let mut series: Vec<(&str, Vec<DataSet>)> = Vec::new();
    for r in refs {
        let mut inst = DataSet::new();
        inst.set_uid(tags::REFERENCED_SOP_CLASS_UID, &r.sop_class_uid);
        inst.set_uid(tags::REFERENCED_SOP_INSTANCE_UID, &r.sop_instance_uid);
        match series.iter_mut().find(|(s, _)| *s == r.series_instance_uid) {
            Some((_, v)) => v.push(inst),
            None => series.push((&r.series_instance_uid, vec![inst])),
        }
    }
    series
        .into_iter()
        .map(|(uid, instances)| {
            let mut s = DataSet::new();
            s.set_uid(tags::SERIES_INSTANCE_UID, uid);
            s.set_sequence(tags::REFERENCED_INSTANCE_SEQUENCE, instances);
            s
        })
        .collect()
}
