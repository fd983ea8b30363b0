//! Mask post-processing: thresholding, connected components, outer
//! contour tracing and bounding boxes. Pixel coordinates are
//! `(column, row)`, zero-based, addressing pixel centers.

use std::collections::VecDeque;

use ndarray::{Array2, ArrayView2};

use crate::spatial::AffineMapper;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RoiError {
    #[error("threshold {0} is outside [0, 1]")]
    Threshold(f64),
    #[error("mask value {0} is not 0 or 1")]
    NotBinary(u8),
}

/// A 2D mask with values in {0, 1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    data: Array2<u8>,
}

impl BinaryMask {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BinaryMask {
            data: Array2::zeros((rows, cols)),
        }
    }

    pub fn from_array(data: Array2<u8>) -> Result<Self, RoiError> {
        if let Some(&bad) = data.iter().find(|&&v| v > 1) {
            return Err(RoiError::NotBinary(bad));
        }
        Ok(BinaryMask { data })
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.data[[row, col]] == 1
    }

    pub fn set(&mut self, row: usize, col: usize, on: bool) {
        self.data[[row, col]] = u8::from(on);
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v == 1).count()
    }

    pub fn as_array(&self) -> &Array2<u8> {
        &self.data
    }

    pub fn into_array(self) -> Array2<u8> {
        self.data
    }
}

/// Pixel is 1 iff `prob >= t`.
pub fn threshold(prob: ArrayView2<f32>, t: f64) -> Result<BinaryMask, RoiError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(RoiError::Threshold(t));
    }
    Ok(BinaryMask {
        data: prob.mapv(|p| u8::from(f64::from(p) >= t)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &[(-1, 0), (0, -1), (0, 1), (1, 0)],
            Connectivity::Eight => &[
                (-1, -1),
                (-1, 0),
                (-1, 1),
                (0, -1),
                (0, 1),
                (1, -1),
                (1, 0),
                (1, 1),
            ],
        }
    }
}

/// Component labels: 0 for background, 1..=count in row-major order of
/// each component's first pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledComponents {
    pub labels: Array2<u32>,
    pub count: u32,
    pub connectivity: Connectivity,
}

impl LabeledComponents {
    pub fn rows(&self) -> usize {
        self.labels.nrows()
    }

    pub fn cols(&self) -> usize {
        self.labels.ncols()
    }

    pub fn support(&self, label: u32) -> BinaryMask {
        BinaryMask {
            data: self.labels.mapv(|l| u8::from(l == label && label != 0)),
        }
    }
}

fn neighbor(
    rows: usize,
    cols: usize,
    r: usize,
    c: usize,
    (dr, dc): (isize, isize),
) -> Option<(usize, usize)> {
    let nr = r.checked_add_signed(dr)?;
    let nc = c.checked_add_signed(dc)?;
    (nr < rows && nc < cols).then_some((nr, nc))
}

pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> LabeledComponents {
    let (rows, cols) = (mask.rows(), mask.cols());
    let mut labels = Array2::<u32>::zeros((rows, cols));
    let mut count = 0;
    let mut queue = VecDeque::new();
    for r in 0..rows {
        for c in 0..cols {
            if !mask.get(r, c) || labels[[r, c]] != 0 {
                continue;
            }
            count += 1;
            labels[[r, c]] = count;
            queue.push_back((r, c));
            while let Some((pr, pc)) = queue.pop_front() {
                for &d in connectivity.offsets() {
                    if let Some((nr, nc)) = neighbor(rows, cols, pr, pc, d) {
                        if mask.get(nr, nc) && labels[[nr, nc]] == 0 {
                            labels[[nr, nc]] = count;
                            queue.push_back((nr, nc));
                        }
                    }
                }
            }
        }
    }
    LabeledComponents {
        labels,
        count,
        connectivity,
    }
}

/// Closed outer boundary of one component through boundary pixel centers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    pub label: u32,
    /// `(column, row)` vertices; the last equals the first.
    pub points: Vec<[usize; 2]>,
}

impl Contour {
    /// Rasterizes the contour and everything it encloses.
    pub fn fill(&self, rows: usize, cols: usize) -> BinaryMask {
        // Flood the outside from a one-pixel frame; the contour is the wall.
        let (h, w) = (rows + 2, cols + 2);
        let mut wall = Array2::<bool>::from_elem((h, w), false);
        for &[c, r] in &self.points {
            wall[[r + 1, c + 1]] = true;
        }
        let mut outside = Array2::<bool>::from_elem((h, w), false);
        let mut queue = VecDeque::from([(0, 0)]);
        outside[[0, 0]] = true;
        while let Some((r, c)) = queue.pop_front() {
            for &d in Connectivity::Four.offsets() {
                if let Some((nr, nc)) = neighbor(h, w, r, c, d) {
                    if !wall[[nr, nc]] && !outside[[nr, nc]] {
                        outside[[nr, nc]] = true;
                        queue.push_back((nr, nc));
                    }
                }
            }
        }
        let mut out = BinaryMask::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out.set(r, c, !outside[[r + 1, c + 1]]);
            }
        }
        out
    }

    pub fn to_polygon(&self) -> Vec<[f32; 2]> {
        self.points
            .iter()
            .map(|&[c, r]| [c as f32, r as f32])
            .collect()
    }
}

// Counterclockwise on screen, starting east.
const RING: [(isize, isize); 8] = [
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
];

fn ring_index(from: (usize, usize), to: (usize, usize)) -> usize {
    let d = (
        to.0 as isize - from.0 as isize,
        to.1 as isize - from.1 as isize,
    );
    RING.iter().position(|&o| o == d).expect("8-neighbor")
}

/// One outer contour per component, in label order.
pub fn trace_contours(lc: &LabeledComponents) -> Vec<Contour> {
    let (rows, cols) = (lc.rows(), lc.cols());
    let mut starts = vec![None; lc.count as usize];
    for ((r, c), &l) in lc.labels.indexed_iter() {
        if l != 0 && starts[l as usize - 1].is_none() {
            starts[l as usize - 1] = Some((r, c));
        }
    }
    let is =
        |p: Option<(usize, usize)>, label: u32| p.is_some_and(|(r, c)| lc.labels[[r, c]] == label);
    let step = |p: (usize, usize), k: usize| neighbor(rows, cols, p.0, p.1, RING[k % 8]);

    starts
        .into_iter()
        .enumerate()
        .map(|(i, start)| {
            let label = i as u32 + 1;
            let start = start.expect("every label has a pixel");
            let point = |p: (usize, usize)| [p.1, p.0];
            // The west neighbor of a raster-first pixel is never in the component.
            let west = 4;
            let first = (0..8)
                .map(|k| (west + 8 - k) % 8)
                .find(|&k| is(step(start, k), label));
            let Some(k1) = first else {
                return Contour {
                    label,
                    points: vec![point(start), point(start)],
                };
            };
            let p1 = step(start, k1).expect("in bounds");
            let mut points = vec![point(start)];
            let (mut prev, mut cur) = (p1, start);
            loop {
                let k0 = ring_index(cur, prev);
                let k = (1..=8)
                    .map(|k| (k0 + k) % 8)
                    .find(|&k| is(step(cur, k), label))
                    .expect("p1 qualifies");
                let n = step(cur, k).expect("in bounds");
                if n == start && cur == p1 {
                    break;
                }
                prev = cur;
                cur = n;
                points.push(point(cur));
            }
            // `cur` is p1 here; close on the start pixel.
            points.push(point(start));
            Contour { label, points }
        })
        .collect()
}

/// Inclusive pixel bounds of a component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub label: u32,
    pub min_col: usize,
    pub min_row: usize,
    pub max_col: usize,
    pub max_row: usize,
}

impl BoundingBox {
    /// Corner pixel centers, clockwise on screen from top-left.
    pub fn corners(&self) -> [[f64; 2]; 4] {
        let (x0, y0, x1, y1) = (
            self.min_col as f64,
            self.min_row as f64,
            self.max_col as f64,
            self.max_row as f64,
        );
        [[x0, y0], [x1, y0], [x1, y1], [x0, y1]]
    }

    /// Closed 5-vertex polygon of the corners in pixel coordinates.
    pub fn to_polygon(&self) -> Vec<[f32; 2]> {
        let c = self.corners();
        [c[0], c[1], c[2], c[3], c[0]]
            .iter()
            .map(|p| [p[0] as f32, p[1] as f32])
            .collect()
    }

    /// Closed 5-vertex polygon of the corners in reference coordinates.
    pub fn to_reference_polygon(&self, mapper: &AffineMapper) -> Vec<[f64; 3]> {
        let c = self.corners();
        [c[0], c[1], c[2], c[3], c[0]]
            .iter()
            .map(|&p| mapper.pixel_to_reference(p))
            .collect()
    }
}

/// Tight boxes per component, in label order.
pub fn bounding_boxes(lc: &LabeledComponents) -> Vec<BoundingBox> {
    let mut boxes: Vec<Option<BoundingBox>> = vec![None; lc.count as usize];
    for ((r, c), &l) in lc.labels.indexed_iter() {
        if l == 0 {
            continue;
        }
        let b = boxes[l as usize - 1].get_or_insert(BoundingBox {
            label: l,
            min_col: c,
            min_row: r,
            max_col: c,
            max_row: r,
        });
        b.min_col = b.min_col.min(c);
        b.min_row = b.min_row.min(r);
        b.max_col = b.max_col.max(c);
        b.max_row = b.max_row.max(r);
    }
    boxes.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn mask(a: Array2<u8>) -> BinaryMask {
        BinaryMask::from_array(a).unwrap()
    }

    #[test]
    fn threshold_is_inclusive() {
        let p = Array2::from_elem((2, 2), 0.5f32);
        assert_eq!(threshold(p.view(), 0.5).unwrap().count(), 4);
        assert_eq!(
            threshold(array![[0.4f32, 0.6]].view(), 0.5)
                .unwrap()
                .into_array(),
            array![[0u8, 1]]
        );
        assert_eq!(
            threshold(array![[0.0f32, 0.3]].view(), 0.0)
                .unwrap()
                .count(),
            2
        );
        assert_eq!(threshold(p.view(), 1.5), Err(RoiError::Threshold(1.5)));
        assert!(threshold(p.view(), f64::NAN).is_err());
    }

    #[test]
    fn diagonal_pair_depends_on_connectivity() {
        let m = mask(array![[1, 0], [0, 1]]);
        assert_eq!(connected_components(&m, Connectivity::Eight).count, 1);
        assert_eq!(connected_components(&m, Connectivity::Four).count, 2);
        assert_eq!(
            connected_components(&BinaryMask::zeros(3, 3), Connectivity::Eight).count,
            0
        );
        let full = connected_components(&mask(Array2::ones((3, 4))), Connectivity::Four);
        assert_eq!(full.count, 1);
        assert!(full.labels.iter().all(|&l| l == 1));
    }

    #[test]
    fn single_pixel_contour_and_box() {
        let mut m = BinaryMask::zeros(6, 6);
        m.set(3, 2, true);
        let lc = connected_components(&m, Connectivity::Eight);
        let contours = trace_contours(&lc);
        assert_eq!(contours[0].points, vec![[2, 3], [2, 3]]);
        assert_eq!(contours[0].fill(6, 6), m);
        let b = bounding_boxes(&lc)[0];
        assert_eq!((b.min_col, b.min_row, b.max_col, b.max_row), (2, 3, 2, 3));
    }

    #[test]
    fn solid_square_traces_its_ring() {
        let mut m = BinaryMask::zeros(5, 5);
        for r in 1..4 {
            for c in 1..4 {
                m.set(r, c, true);
            }
        }
        let lc = connected_components(&m, Connectivity::Eight);
        let c = &trace_contours(&lc)[0];
        assert_eq!(c.points.len(), 9);
        assert_eq!(c.points.first(), c.points.last());
        let ring: std::collections::BTreeSet<_> = c.points.iter().copied().collect();
        assert_eq!(ring.len(), 8);
        assert!(!ring.contains(&[2, 2]));
        assert_eq!(c.fill(5, 5), m);
    }

    #[test]
    fn l_shape_box() {
        // Rows 1..=4, columns 0..=2.
        let m = mask(array![
            [0, 0, 0],
            [1, 0, 0],
            [1, 0, 0],
            [1, 0, 0],
            [1, 1, 1],
        ]);
        let lc = connected_components(&m, Connectivity::Eight);
        let b = bounding_boxes(&lc)[0];
        assert_eq!((b.min_col, b.min_row, b.max_col, b.max_row), (0, 1, 2, 4));
        assert_eq!(trace_contours(&lc)[0].fill(5, 3), m);
        assert!(bounding_boxes(&connected_components(
            &BinaryMask::zeros(2, 2),
            Connectivity::Eight
        ))
        .is_empty());
    }

    #[test]
    fn two_components_two_contours() {
        let m = mask(array![[1, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 1]]);
        let lc = connected_components(&m, Connectivity::Eight);
        let cs = trace_contours(&lc);
        assert_eq!(cs.iter().map(|c| c.label).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(cs[0].points, vec![[0, 0], [1, 0], [0, 0]]);
    }

    #[test]
    fn non_binary_input_is_rejected() {
        assert_eq!(
            BinaryMask::from_array(array![[0, 2]]),
            Err(RoiError::NotBinary(2))
        );
    }
}
