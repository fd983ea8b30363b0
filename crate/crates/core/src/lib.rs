//! Encoding and decoding of derived DICOM objects for image annotations and
//! machine-learning model outputs: Segmentation images, Comprehensive (3D)
//! Structured Reports following the TID 1500 measurement report template,
//! and the geometry and ROI utilities that connect them to source images.

pub mod coding;
pub mod common;
pub mod dataset;
pub mod geometry;
pub mod roi;
pub mod seg;
pub mod spatial;
pub mod sr;
pub mod synthetic;
pub mod uid;
pub mod validate;
