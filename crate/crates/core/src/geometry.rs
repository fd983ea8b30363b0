//! Per-frame plane geometry of single- and multi-frame images, read from
//! root attributes or functional groups.

use crate::dataset::{tags, DataSet, DecimalString, Tag, VR};
use crate::spatial::{AffineMapper, PixelSpacing, PlaneGeometry, SpatialError};

/// Orientation and spacing agreement tolerance between images.
pub const GEOMETRY_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("image lacks {0}")]
    Missing(&'static str),
    #[error("image has malformed {0}")]
    Malformed(&'static str),
    #[error(transparent)]
    Spatial(#[from] SpatialError),
}

/// Where a frame sits: patient-based or slide-based coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlanePosition {
    Patient([f64; 3]),
    /// Slide coordinates of the top-left pixel, plus its 1-based
    /// (column, row) position in the total pixel matrix.
    Slide {
        offset: [f64; 3],
        column: i64,
        row: i64,
    },
}

impl PlanePosition {
    pub fn coordinates(&self) -> [f64; 3] {
        match *self {
            PlanePosition::Patient(p) => p,
            PlanePosition::Slide { offset, .. } => offset,
        }
    }
}

/// One frame of an image.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameGeometry {
    /// 1-based.
    pub frame_number: u32,
    pub position: Option<PlanePosition>,
}

/// Geometry of one image instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGeometry {
    pub sop_class_uid: String,
    pub sop_instance_uid: String,
    pub rows: usize,
    pub columns: usize,
    pub multi_frame: bool,
    pub slide: bool,
    pub orientation: Option<[f64; 6]>,
    pub spacing: Option<PixelSpacing>,
    pub frame_of_reference_uid: Option<String>,
    pub frames: Vec<FrameGeometry>,
}

fn floats(ds: &DataSet, tag: Tag) -> Option<Vec<f64>> {
    ds.floats(tag).filter(|v| !v.is_empty())
}

fn fixed<const N: usize>(
    ds: &DataSet,
    tag: Tag,
    name: &'static str,
) -> Result<Option<[f64; N]>, GeometryError> {
    match floats(ds, tag) {
        None => Ok(None),
        Some(v) => v
            .try_into()
            .map(Some)
            .map_err(|_| GeometryError::Malformed(name)),
    }
}

fn functional<'a>(
    shared: Option<&'a DataSet>,
    frame: Option<&'a DataSet>,
    seq: Tag,
) -> Option<&'a DataSet> {
    frame
        .and_then(|f| f.item(seq))
        .or_else(|| shared.and_then(|s| s.item(seq)))
}

fn slide_position(item: &DataSet) -> Result<PlanePosition, GeometryError> {
    let get = |tag, name| {
        floats(item, tag)
            .and_then(|v| v.first().copied())
            .ok_or(GeometryError::Missing(name))
    };
    Ok(PlanePosition::Slide {
        offset: [
            get(
                tags::X_OFFSET_IN_SLIDE_COORDINATE_SYSTEM,
                "XOffsetInSlideCoordinateSystem",
            )?,
            get(
                tags::Y_OFFSET_IN_SLIDE_COORDINATE_SYSTEM,
                "YOffsetInSlideCoordinateSystem",
            )?,
            get(
                tags::Z_OFFSET_IN_SLIDE_COORDINATE_SYSTEM,
                "ZOffsetInSlideCoordinateSystem",
            )
            .unwrap_or(0.0),
        ],
        column: item
            .int(tags::COLUMN_POSITION_IN_TOTAL_IMAGE_PIXEL_MATRIX)
            .ok_or(GeometryError::Missing(
                "ColumnPositionInTotalImagePixelMatrix",
            ))?,
        row: item
            .int(tags::ROW_POSITION_IN_TOTAL_IMAGE_PIXEL_MATRIX)
            .ok_or(GeometryError::Missing("RowPositionInTotalImagePixelMatrix"))?,
    })
}

/// Reads the geometry of an image. Position, orientation and spacing are
/// optional here; [`ImageGeometry::plane`] requires them.
pub fn image_geometry(ds: &DataSet) -> Result<ImageGeometry, GeometryError> {
    let rows = ds.int(tags::ROWS).ok_or(GeometryError::Missing("Rows"))?;
    let columns = ds
        .int(tags::COLUMNS)
        .ok_or(GeometryError::Missing("Columns"))?;
    if rows <= 0 || columns <= 0 {
        return Err(GeometryError::Malformed("Rows/Columns"));
    }
    let slide = ds.string(tags::MODALITY) == Some("SM");
    let shared = ds.item(tags::SHARED_FUNCTIONAL_GROUPS_SEQUENCE);
    let per_frame = ds.sequence(tags::PER_FRAME_FUNCTIONAL_GROUPS_SEQUENCE);
    let n_frames = match ds.int(tags::NUMBER_OF_FRAMES) {
        Some(n) if n >= 1 => n as usize,
        Some(_) => return Err(GeometryError::Malformed("NumberOfFrames")),
        None => 1,
    };
    let multi_frame = ds.contains(tags::NUMBER_OF_FRAMES) || per_frame.is_some();
    if let Some(pf) = per_frame {
        if pf.len() != n_frames {
            return Err(GeometryError::Malformed("PerFrameFunctionalGroupsSequence"));
        }
    }

    let first_frame = per_frame.and_then(|pf| pf.first());
    let orientation = if slide {
        fixed::<6>(ds, tags::IMAGE_ORIENTATION_SLIDE, "ImageOrientationSlide")?
    } else {
        match functional(shared, first_frame, tags::PLANE_ORIENTATION_SEQUENCE) {
            Some(item) => fixed::<6>(
                item,
                tags::IMAGE_ORIENTATION_PATIENT,
                "ImageOrientationPatient",
            )?,
            None => fixed::<6>(
                ds,
                tags::IMAGE_ORIENTATION_PATIENT,
                "ImageOrientationPatient",
            )?,
        }
    };
    let spacing = match functional(shared, first_frame, tags::PIXEL_MEASURES_SEQUENCE) {
        Some(item) => fixed::<2>(item, tags::PIXEL_SPACING, "PixelSpacing")?,
        None => fixed::<2>(ds, tags::PIXEL_SPACING, "PixelSpacing")?,
    }
    .map(|[row, column]| PixelSpacing { row, column });

    let mut frames = Vec::with_capacity(n_frames);
    for i in 0..n_frames {
        let frame = per_frame.map(|pf| &pf[i]);
        let position = if slide {
            match functional(shared, frame, tags::PLANE_POSITION_SLIDE_SEQUENCE) {
                Some(item) => Some(slide_position(item)?),
                None => None,
            }
        } else {
            let item = functional(shared, frame, tags::PLANE_POSITION_SEQUENCE);
            match item {
                Some(item) => {
                    fixed::<3>(item, tags::IMAGE_POSITION_PATIENT, "ImagePositionPatient")?
                }
                None => fixed::<3>(ds, tags::IMAGE_POSITION_PATIENT, "ImagePositionPatient")?,
            }
            .map(PlanePosition::Patient)
        };
        frames.push(FrameGeometry {
            frame_number: i as u32 + 1,
            position,
        });
    }

    Ok(ImageGeometry {
        sop_class_uid: ds
            .string(tags::SOP_CLASS_UID)
            .unwrap_or_default()
            .to_string(),
        sop_instance_uid: ds
            .string(tags::SOP_INSTANCE_UID)
            .unwrap_or_default()
            .to_string(),
        rows: rows as usize,
        columns: columns as usize,
        multi_frame,
        slide,
        orientation,
        spacing,
        frame_of_reference_uid: ds.string(tags::FRAME_OF_REFERENCE_UID).map(str::to_string),
        frames,
    })
}

impl ImageGeometry {
    /// Plane geometry of a 1-based frame.
    pub fn plane(&self, frame_number: u32) -> Result<PlaneGeometry, GeometryError> {
        let frame = frame_number
            .checked_sub(1)
            .and_then(|i| self.frames.get(i as usize))
            .ok_or(GeometryError::Malformed("frame number"))?;
        let position = frame
            .position
            .ok_or(GeometryError::Missing("plane position"))?;
        let orientation = self
            .orientation
            .ok_or(GeometryError::Missing("image orientation"))?;
        let spacing = self.spacing.ok_or(GeometryError::Missing("PixelSpacing"))?;
        Ok(PlaneGeometry::new(
            position.coordinates(),
            orientation,
            spacing,
        )?)
    }

    pub fn mapper(&self, frame_number: u32) -> Result<AffineMapper, GeometryError> {
        Ok(AffineMapper::from_geometry(&self.plane(frame_number)?)?)
    }

    /// Whether another image shares matrix size, orientation and spacing.
    pub fn compatible_with(&self, other: &ImageGeometry) -> Result<(), String> {
        if (self.rows, self.columns) != (other.rows, other.columns) {
            return Err(format!(
                "matrix {}x{} differs from {}x{}",
                self.rows, self.columns, other.rows, other.columns
            ));
        }
        if self.slide != other.slide {
            return Err("mixes slide-based and patient-based images".into());
        }
        if self.frame_of_reference_uid != other.frame_of_reference_uid {
            return Err("frame of reference differs".into());
        }
        let close = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .all(|(x, y)| (x - y).abs() <= GEOMETRY_TOLERANCE)
        };
        match (&self.orientation, &other.orientation) {
            (Some(a), Some(b)) if !close(a, b) => {
                return Err(format!("orientation {a:?} differs from {b:?}"))
            }
            (Some(_), None) | (None, Some(_)) => {
                return Err("orientation present on only some images".into())
            }
            _ => {}
        }
        match (self.spacing, other.spacing) {
            (Some(a), Some(b)) if !close(&[a.row, a.column], &[b.row, b.column]) => {
                Err(format!("pixel spacing {a:?} differs from {b:?}"))
            }
            (Some(_), None) | (None, Some(_)) => {
                Err("pixel spacing present on only some images".into())
            }
            _ => Ok(()),
        }
    }
}

/// Writes a plane position as the functional-group item it came from.
pub fn plane_position_item(position: &PlanePosition) -> (Tag, DataSet) {
    let mut item = DataSet::new();
    match *position {
        PlanePosition::Patient(p) => {
            item.set_decimals(
                tags::IMAGE_POSITION_PATIENT,
                p.iter().map(|&v| ds(v)).collect(),
            );
            (tags::PLANE_POSITION_SEQUENCE, item)
        }
        PlanePosition::Slide {
            offset,
            column,
            row,
        } => {
            item.set_decimals(
                tags::X_OFFSET_IN_SLIDE_COORDINATE_SYSTEM,
                vec![ds(offset[0])],
            );
            item.set_decimals(
                tags::Y_OFFSET_IN_SLIDE_COORDINATE_SYSTEM,
                vec![ds(offset[1])],
            );
            item.set_decimals(
                tags::Z_OFFSET_IN_SLIDE_COORDINATE_SYSTEM,
                vec![ds(offset[2])],
            );
            item.set_int(
                tags::COLUMN_POSITION_IN_TOTAL_IMAGE_PIXEL_MATRIX,
                VR::SL,
                column,
            );
            item.set_int(tags::ROW_POSITION_IN_TOTAL_IMAGE_PIXEL_MATRIX, VR::SL, row);
            (tags::PLANE_POSITION_SLIDE_SEQUENCE, item)
        }
    }
}

pub(crate) fn ds(v: f64) -> DecimalString {
    DecimalString::from_f64(v).expect("finite geometry value")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ct_slice(z: f64) -> DataSet {
        let mut d = DataSet::new();
        d.set_int(tags::ROWS, VR::US, 4);
        d.set_int(tags::COLUMNS, VR::US, 3);
        d.set_decimals(
            tags::IMAGE_POSITION_PATIENT,
            vec![ds(-10.0), ds(-20.0), ds(z)],
        );
        d.set_decimals(
            tags::IMAGE_ORIENTATION_PATIENT,
            [1.0, 0.0, 0.0, 0.0, 1.0, 0.0].map(ds).to_vec(),
        );
        d.set_decimals(tags::PIXEL_SPACING, vec![ds(0.5), ds(0.75)]);
        d
    }

    #[test]
    fn single_frame_root_attributes() {
        let g = image_geometry(&ct_slice(2.5)).unwrap();
        assert!(!g.multi_frame);
        assert_eq!(g.frames.len(), 1);
        let m = g.mapper(1).unwrap();
        // Column index moves by the column spacing (0.75), rows by 0.5.
        assert_eq!(m.pixel_to_reference([2.0, 2.0]), [-8.5, -19.0, 2.5]);
        assert!(g.plane(2).is_err());
    }

    #[test]
    fn multi_frame_functional_groups() {
        let mut d = DataSet::new();
        d.set_int(tags::ROWS, VR::US, 4);
        d.set_int(tags::COLUMNS, VR::US, 4);
        d.set_int(tags::NUMBER_OF_FRAMES, VR::IS, 2);
        let mut shared = DataSet::new();
        let mut pm = DataSet::new();
        pm.set_decimals(tags::PIXEL_SPACING, vec![ds(1.0), ds(1.0)]);
        shared.set_sequence(tags::PIXEL_MEASURES_SEQUENCE, vec![pm]);
        let mut po = DataSet::new();
        po.set_decimals(
            tags::IMAGE_ORIENTATION_PATIENT,
            [1.0, 0.0, 0.0, 0.0, 1.0, 0.0].map(ds).to_vec(),
        );
        shared.set_sequence(tags::PLANE_ORIENTATION_SEQUENCE, vec![po]);
        d.set_sequence(tags::SHARED_FUNCTIONAL_GROUPS_SEQUENCE, vec![shared]);
        let frames = [0.0, 3.0]
            .iter()
            .map(|&z| {
                let (tag, item) = plane_position_item(&PlanePosition::Patient([0.0, 0.0, z]));
                let mut f = DataSet::new();
                f.set_sequence(tag, vec![item]);
                f
            })
            .collect();
        d.set_sequence(tags::PER_FRAME_FUNCTIONAL_GROUPS_SEQUENCE, frames);
        let g = image_geometry(&d).unwrap();
        assert!(g.multi_frame);
        assert_eq!(
            g.frames[1].position,
            Some(PlanePosition::Patient([0.0, 0.0, 3.0]))
        );
        assert_eq!(
            g.mapper(2).unwrap().pixel_to_reference([1.0, 0.0]),
            [1.0, 0.0, 3.0]
        );
    }

    #[test]
    fn slide_positions() {
        let mut d = DataSet::new();
        d.set_text(tags::MODALITY, VR::CS, "SM");
        d.set_int(tags::ROWS, VR::US, 2);
        d.set_int(tags::COLUMNS, VR::US, 2);
        d.set_int(tags::NUMBER_OF_FRAMES, VR::IS, 1);
        d.set_decimals(
            tags::IMAGE_ORIENTATION_SLIDE,
            [0.0, -1.0, 0.0, -1.0, 0.0, 0.0].map(ds).to_vec(),
        );
        let pos = PlanePosition::Slide {
            offset: [20.0, 40.0, 0.0],
            column: 1,
            row: 1,
        };
        let (tag, item) = plane_position_item(&pos);
        let mut f = DataSet::new();
        f.set_sequence(tag, vec![item]);
        d.set_sequence(tags::PER_FRAME_FUNCTIONAL_GROUPS_SEQUENCE, vec![f]);
        let mut pm = DataSet::new();
        pm.set_decimals(tags::PIXEL_SPACING, vec![ds(0.001), ds(0.001)]);
        let mut shared = DataSet::new();
        shared.set_sequence(tags::PIXEL_MEASURES_SEQUENCE, vec![pm]);
        d.set_sequence(tags::SHARED_FUNCTIONAL_GROUPS_SEQUENCE, vec![shared]);
        let g = image_geometry(&d).unwrap();
        assert!(g.slide);
        assert_eq!(g.frames[0].position, Some(pos));
        let p = g.mapper(1).unwrap().pixel_to_reference([1.0, 0.0]);
        assert!((p[1] - 39.999).abs() < 1e-9);
    }

    #[test]
    fn compatibility() {
        let a = image_geometry(&ct_slice(0.0)).unwrap();
        let b = image_geometry(&ct_slice(1.0)).unwrap();
        assert!(a.compatible_with(&b).is_ok());
        let mut c = ct_slice(2.0);
        c.set_decimals(tags::PIXEL_SPACING, vec![ds(0.6), ds(0.75)]);
        assert!(a.compatible_with(&image_geometry(&c).unwrap()).is_err());
    }
}
