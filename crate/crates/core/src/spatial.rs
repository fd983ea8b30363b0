//! Affine mapping between image pixel coordinates and the 3D frame of
//! reference (patient- or slide-based), in millimeters.
//!
//! Pixel coordinates are `(column, row)`, zero-based, addressing pixel
//! centers. The reference position of a pixel is
//! `position + column * column_spacing * row_direction + row * row_spacing * column_direction`,
//! where `row_direction` is the first orientation triplet (the direction of
//! increasing column index) and `column_direction` the second.

/// Default off-plane tolerance for [`AffineMapper::reference_to_pixel`], in mm.
pub const DEFAULT_TOLERANCE: f64 = 1e-3;

const ORTHONORMAL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpatialError {
    #[error("invalid plane geometry: {0}")]
    Geometry(String),
    #[error("point is {distance} mm off the image plane (tolerance {tolerance} mm)")]
    OffPlane { distance: f64, tolerance: f64 },
}

/// Spacing between pixel centers, in mm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelSpacing {
    /// Distance between adjacent rows.
    pub row: f64,
    /// Distance between adjacent columns.
    pub column: f64,
}

/// Position, orientation and spacing of one image plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneGeometry {
    /// Reference position of the center of the top-left pixel.
    pub position: [f64; 3],
    /// Row direction cosines followed by column direction cosines.
    pub orientation: [f64; 6],
    pub spacing: PixelSpacing,
}

impl PlaneGeometry {
    pub fn new(
        position: [f64; 3],
        orientation: [f64; 6],
        spacing: PixelSpacing,
    ) -> Result<Self, SpatialError> {
        let g = PlaneGeometry {
            position,
            orientation,
            spacing,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn row_direction(&self) -> [f64; 3] {
        [
            self.orientation[0],
            self.orientation[1],
            self.orientation[2],
        ]
    }

    pub fn column_direction(&self) -> [f64; 3] {
        [
            self.orientation[3],
            self.orientation[4],
            self.orientation[5],
        ]
    }

    pub fn normal(&self) -> [f64; 3] {
        cross(self.row_direction(), self.column_direction())
    }

    pub fn validate(&self) -> Result<(), SpatialError> {
        if !self
            .position
            .iter()
            .chain(&self.orientation)
            .all(|v| v.is_finite())
        {
            return Err(SpatialError::Geometry(
                "non-finite position or orientation".into(),
            ));
        }
        let (r, c) = (self.row_direction(), self.column_direction());
        for (name, v) in [("row", r), ("column", c)] {
            let n = norm(v);
            if (n - 1.0).abs() > ORTHONORMAL_TOLERANCE {
                return Err(SpatialError::Geometry(format!(
                    "{name} direction cosines have norm {n}"
                )));
            }
        }
        let d = dot(r, c);
        if d.abs() > ORTHONORMAL_TOLERANCE {
            return Err(SpatialError::Geometry(format!(
                "row and column directions are not orthogonal (dot product {d})"
            )));
        }
        if !(self.spacing.row > 0.0 && self.spacing.column > 0.0) {
            return Err(SpatialError::Geometry(format!(
                "pixel spacing must be positive, got {:?}",
                self.spacing
            )));
        }
        Ok(())
    }
}

/// 3x4 affine matrix taking homogeneous `(column, row, 1)` to `(x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMapper {
    matrix: [[f64; 4]; 3],
}

impl AffineMapper {
    pub fn from_geometry(g: &PlaneGeometry) -> Result<Self, SpatialError> {
        g.validate()?;
        let (r, c) = (g.row_direction(), g.column_direction());
        let mut matrix = [[0.0; 4]; 3];
        for i in 0..3 {
            matrix[i][0] = r[i] * g.spacing.column;
            matrix[i][1] = c[i] * g.spacing.row;
            matrix[i][3] = g.position[i];
        }
        Ok(AffineMapper { matrix })
    }

    pub fn matrix(&self) -> &[[f64; 4]; 3] {
        &self.matrix
    }

    fn column_axis(&self) -> [f64; 3] {
        [self.matrix[0][0], self.matrix[1][0], self.matrix[2][0]]
    }

    fn row_axis(&self) -> [f64; 3] {
        [self.matrix[0][1], self.matrix[1][1], self.matrix[2][1]]
    }

    fn origin(&self) -> [f64; 3] {
        [self.matrix[0][3], self.matrix[1][3], self.matrix[2][3]]
    }

    pub fn pixel_to_reference(&self, pixel: [f64; 2]) -> [f64; 3] {
        let [col, row] = pixel;
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            let m = &self.matrix[i];
            *o = m[3] + m[0] * col + m[1] * row;
        }
        out
    }

    /// Inverse mapping; points further than `tolerance` mm from the plane
    /// are rejected, nearer ones are projected onto it.
    pub fn reference_to_pixel(
        &self,
        point: [f64; 3],
        tolerance: f64,
    ) -> Result<[f64; 2], SpatialError> {
        let (a, b) = (self.column_axis(), self.row_axis());
        let d = sub(point, self.origin());
        let n = cross(a, b);
        let distance = (dot(d, n) / norm(n)).abs();
        if distance > tolerance {
            return Err(SpatialError::OffPlane {
                distance,
                tolerance,
            });
        }
        Ok([dot(d, a) / dot(a, a), dot(d, b) / dot(b, b)])
    }
}

/// Convenience for [`AffineMapper::from_geometry`].
pub fn mapper_from_geometry(g: &PlaneGeometry) -> Result<AffineMapper, SpatialError> {
    AffineMapper::from_geometry(g)
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const IDENTITY: [f64; 6] = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0];

    fn mapper(position: [f64; 3], orientation: [f64; 6], row: f64, column: f64) -> AffineMapper {
        let g = PlaneGeometry::new(position, orientation, PixelSpacing { row, column }).unwrap();
        mapper_from_geometry(&g).unwrap()
    }

    #[test]
    fn identity_geometry() {
        let m = mapper([0.0; 3], IDENTITY, 1.0, 1.0);
        assert_eq!(m.pixel_to_reference([5.0, 7.0]), [5.0, 7.0, 0.0]);
    }

    #[test]
    fn offset_and_spacing() {
        let m = mapper([10.0, 20.0, 30.0], IDENTITY, 2.0, 2.0);
        assert_eq!(m.pixel_to_reference([3.0, 4.0]), [16.0, 28.0, 30.0]);
    }

    #[test]
    fn swapped_axes() {
        let m = mapper([0.0; 3], [0.0, 1.0, 0.0, 1.0, 0.0, 0.0], 1.0, 1.0);
        assert_eq!(m.pixel_to_reference([3.0, 4.0]), [4.0, 3.0, 0.0]);
    }

    #[test]
    fn anisotropic_spacing_uses_column_spacing_along_rows() {
        // Column index moves along the row direction by the column spacing.
        let m = mapper([0.0; 3], IDENTITY, 3.0, 0.5);
        assert_eq!(m.pixel_to_reference([2.0, 1.0]), [1.0, 3.0, 0.0]);
    }

    #[test]
    fn off_plane_rejection() {
        let m = mapper([1.0, 2.0, 3.0], IDENTITY, 1.0, 1.0);
        let on = m.pixel_to_reference([4.0, 5.0]);
        let far = [on[0], on[1], on[2] + 0.5];
        match m.reference_to_pixel(far, 0.1) {
            Err(SpatialError::OffPlane { distance, .. }) => assert!((distance - 0.5).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        let near = [on[0], on[1], on[2] + 0.05];
        let p = m.reference_to_pixel(near, 0.1).unwrap();
        assert!((p[0] - 4.0).abs() < 1e-12 && (p[1] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_geometries() {
        let spacing = PixelSpacing {
            row: 1.0,
            column: 1.0,
        };
        assert!(PlaneGeometry::new([0.0; 3], [1.0, 0.0, 0.0, 1.0, 0.0, 0.0], spacing).is_err());
        assert!(PlaneGeometry::new([0.0; 3], [2.0, 0.0, 0.0, 0.0, 1.0, 0.0], spacing).is_err());
        assert!(PlaneGeometry::new(
            [0.0; 3],
            IDENTITY,
            PixelSpacing {
                row: 0.0,
                column: 1.0
            }
        )
        .is_err());
    }

    fn rotation() -> impl Strategy<Value = [f64; 6]> {
        (
            0.0..std::f64::consts::TAU,
            -1.0f64..1.0,
            0.0..std::f64::consts::TAU,
        )
            .prop_map(|(a, z, b)| {
                // Random unit vector, then a random perpendicular.
                let s = (1.0 - z * z).sqrt();
                let u = [s * a.cos(), s * a.sin(), z];
                let helper = if u[0].abs() < 0.9 {
                    [1.0, 0.0, 0.0]
                } else {
                    [0.0, 1.0, 0.0]
                };
                let p = cross(u, helper);
                let pn = norm(p);
                let p = [p[0] / pn, p[1] / pn, p[2] / pn];
                let q = cross(u, p);
                let v = [
                    p[0] * b.cos() + q[0] * b.sin(),
                    p[1] * b.cos() + q[1] * b.sin(),
                    p[2] * b.cos() + q[2] * b.sin(),
                ];
                [u[0], u[1], u[2], v[0], v[1], v[2]]
            })
    }

    proptest! {
        #[test]
        fn inverse_then_forward(o in rotation(), pos in prop::array::uniform3(-500.0f64..500.0),
                                rs in 0.1f64..5.0, cs in 0.1f64..5.0,
                                col in -100.0f64..1000.0, row in -100.0f64..1000.0) {
            let m = mapper(pos, o, rs, cs);
            let p = m.reference_to_pixel(m.pixel_to_reference([col, row]), DEFAULT_TOLERANCE).unwrap();
            prop_assert!((p[0] - col).abs() < 1e-9 && (p[1] - row).abs() < 1e-9);
            prop_assert_eq!(m.pixel_to_reference([0.0, 0.0]), pos);
        }

        #[test]
        fn distances_scale_with_spacing(o in rotation(), rs in 0.1f64..5.0, cs in 0.1f64..5.0,
                                        p1 in prop::array::uniform2(0.0f64..100.0),
                                        p2 in prop::array::uniform2(0.0f64..100.0)) {
            let m = mapper([0.0; 3], o, rs, cs);
            let (a, b) = (m.pixel_to_reference(p1), m.pixel_to_reference(p2));
            let mm = norm(sub(a, b));
            let expected = (((p1[0] - p2[0]) * cs).powi(2) + ((p1[1] - p2[1]) * rs).powi(2)).sqrt();
            prop_assert!((mm - expected).abs() < 1e-9);
        }
    }
}
