//! Synthetic source images (no pixel data) for demos and tests.

use crate::dataset::{tags, DataSet, VR};
use crate::geometry::{ds, plane_position_item, PlanePosition};
use crate::uid::{generate_uid, sop_class};

/// Patient and study identity shared by a synthetic series.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticStudy {
    pub patient_id: String,
    pub patient_name: String,
    pub study_instance_uid: String,
    pub accession_number: String,
    pub study_date: String,
}

impl SyntheticStudy {
    pub fn new(patient_id: impl Into<String>) -> Self {
        SyntheticStudy {
            patient_id: patient_id.into(),
            patient_name: "Synthetic^Patient".into(),
            study_instance_uid: generate_uid(),
            accession_number: "A0001".into(),
            study_date: "20200101".into(),
        }
    }

    fn write(&self, d: &mut DataSet) {
        d.set_text(tags::PATIENT_NAME, VR::PN, &self.patient_name);
        d.set_text(tags::PATIENT_ID, VR::LO, &self.patient_id);
        d.set_text(tags::PATIENT_BIRTH_DATE, VR::DA, "19700101");
        d.set_text(tags::PATIENT_SEX, VR::CS, "O");
        d.set_uid(tags::STUDY_INSTANCE_UID, &self.study_instance_uid);
        d.set_text(tags::STUDY_ID, VR::SH, "1");
        d.set_text(tags::STUDY_DATE, VR::DA, &self.study_date);
        d.set_text(tags::STUDY_TIME, VR::TM, "120000");
        d.set_text(tags::ACCESSION_NUMBER, VR::SH, &self.accession_number);
        d.set_text(tags::REFERRING_PHYSICIAN_NAME, VR::PN, "");
    }
}

/// An axial CT series of `slices` single-frame images, `thickness` mm
/// apart, with isotropic in-plane `spacing`.
pub fn ct_series(
    study: &SyntheticStudy,
    slices: usize,
    rows: u16,
    columns: u16,
    spacing: f64,
    thickness: f64,
) -> Vec<DataSet> {
    let series = generate_uid();
    let frame_of_reference = generate_uid();
    (0..slices)
        .map(|i| {
            let mut d = DataSet::new();
            d.set_uid(tags::SOP_CLASS_UID, sop_class::CT_IMAGE_STORAGE);
            d.set_uid(tags::SOP_INSTANCE_UID, generate_uid());
            d.set_text(tags::MODALITY, VR::CS, "CT");
            study.write(&mut d);
            d.set_uid(tags::SERIES_INSTANCE_UID, &series);
            d.set_int(tags::SERIES_NUMBER, VR::IS, 1);
            d.set_int(tags::INSTANCE_NUMBER, VR::IS, i as i64 + 1);
            d.set_uid(tags::FRAME_OF_REFERENCE_UID, &frame_of_reference);
            d.set_int(tags::ROWS, VR::US, i64::from(rows));
            d.set_int(tags::COLUMNS, VR::US, i64::from(columns));
            d.set_decimals(tags::PIXEL_SPACING, vec![ds(spacing), ds(spacing)]);
            d.set_decimals(tags::SLICE_THICKNESS, vec![ds(thickness)]);
            d.set_decimals(
                tags::IMAGE_ORIENTATION_PATIENT,
                [1.0, 0.0, 0.0, 0.0, 1.0, 0.0].map(ds).to_vec(),
            );
            d.set_decimals(
                tags::IMAGE_POSITION_PATIENT,
                vec![ds(-100.0), ds(-100.0), ds(i as f64 * thickness)],
            );
            d
        })
        .collect()
}

/// A tiled whole-slide image with a `tiles_across` x `tiles_down` grid of
/// `tile` x `tile` frames.
pub fn slide_image(
    study: &SyntheticStudy,
    tile: u16,
    tiles_across: u16,
    tiles_down: u16,
    spacing: f64,
) -> DataSet {
    let mut d = DataSet::new();
    d.set_uid(
        tags::SOP_CLASS_UID,
        sop_class::VL_WHOLE_SLIDE_MICROSCOPY_IMAGE_STORAGE,
    );
    d.set_uid(tags::SOP_INSTANCE_UID, generate_uid());
    d.set_text(tags::MODALITY, VR::CS, "SM");
    study.write(&mut d);
    d.set_uid(tags::SERIES_INSTANCE_UID, generate_uid());
    d.set_int(tags::SERIES_NUMBER, VR::IS, 1);
    d.set_int(tags::INSTANCE_NUMBER, VR::IS, 1);
    d.set_uid(tags::FRAME_OF_REFERENCE_UID, generate_uid());
    d.set_text(tags::CONTAINER_IDENTIFIER, VR::LO, "SLIDE-1");
    d.set_int(tags::ROWS, VR::US, i64::from(tile));
    d.set_int(tags::COLUMNS, VR::US, i64::from(tile));
    d.set_int(
        tags::TOTAL_PIXEL_MATRIX_ROWS,
        VR::UL,
        i64::from(tile) * i64::from(tiles_down),
    );
    d.set_int(
        tags::TOTAL_PIXEL_MATRIX_COLUMNS,
        VR::UL,
        i64::from(tile) * i64::from(tiles_across),
    );
    d.set_decimals(
        tags::IMAGE_ORIENTATION_SLIDE,
        [0.0, -1.0, 0.0, -1.0, 0.0, 0.0].map(ds).to_vec(),
    );
    let n = usize::from(tiles_across) * usize::from(tiles_down);
    d.set_int(tags::NUMBER_OF_FRAMES, VR::IS, n as i64);

    let mut pm = DataSet::new();
    pm.set_decimals(tags::PIXEL_SPACING, vec![ds(spacing), ds(spacing)]);
    let mut shared = DataSet::new();
    shared.set_sequence(tags::PIXEL_MEASURES_SEQUENCE, vec![pm]);
    d.set_sequence(tags::SHARED_FUNCTIONAL_GROUPS_SEQUENCE, vec![shared]);

    let per_frame = (0..n)
        .map(|i| {
            let (tx, ty) = (i % usize::from(tiles_across), i / usize::from(tiles_across));
            let column = (tx * usize::from(tile)) as i64 + 1;
            let row = (ty * usize::from(tile)) as i64 + 1;
            // Orientation maps increasing columns to -y and rows to -x.
            let offset = [
                20.0 - (row - 1) as f64 * spacing,
                40.0 - (column - 1) as f64 * spacing,
                0.0,
            ];
            let (tag, item) = plane_position_item(&PlanePosition::Slide {
                offset,
                column,
                row,
            });
            let mut f = DataSet::new();
            f.set_sequence(tag, vec![item]);
            f
        })
        .collect();
    d.set_sequence(tags::PER_FRAME_FUNCTIONAL_GROUPS_SEQUENCE, per_frame);
    d
}
