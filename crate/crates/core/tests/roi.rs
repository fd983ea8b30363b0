use dicom_annot::roi::*;
use dicom_annot::spatial::{AffineMapper, PixelSpacing, PlaneGeometry};
use ndarray::Array2;
use proptest::prelude::*;

// Union-find over pixel indices, independent of the BFS labeling.
fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn union_find_count(m: &Array2<u8>, diagonal: bool) -> (usize, Vec<usize>) {
    let (rows, cols) = m.dim();
    let mut parent: Vec<usize> = (0..rows * cols).collect();
    for r in 0..rows {
        for c in 0..cols {
            if m[[r, c]] == 0 {
                continue;
            }
            let mut join = |r2: usize, c2: usize| {
                if m[[r2, c2]] == 1 {
                    let (a, b) = (
                        find(&mut parent, r * cols + c),
                        find(&mut parent, r2 * cols + c2),
                    );
                    parent[a] = b;
                }
            };
            if c + 1 < cols {
                join(r, c + 1);
            }
            if r + 1 < rows {
                join(r + 1, c);
                if diagonal && c + 1 < cols {
                    join(r + 1, c + 1);
                }
                if diagonal && c > 0 {
                    join(r + 1, c - 1);
                }
            }
        }
    }
    let roots: Vec<usize> = (0..rows * cols).map(|i| find(&mut parent, i)).collect();
    let mut distinct: Vec<usize> = (0..rows * cols)
        .filter(|&i| m[[i / cols, i % cols]] == 1)
        .map(|i| roots[i])
        .collect();
    distinct.sort_unstable();
    distinct.dedup();
    (distinct.len(), roots)
}

// Sets every background pixel not 4-reachable from outside the image.
fn fill_holes(m: &mut Array2<u8>) {
    let (rows, cols) = m.dim();
    let mut seen = Array2::from_elem((rows + 2, cols + 2), false);
    let mut stack = vec![(0usize, 0usize)];
    seen[[0, 0]] = true;
    let bg = |m: &Array2<u8>, r: usize, c: usize| {
        r == 0 || c == 0 || r == rows + 1 || c == cols + 1 || m[[r - 1, c - 1]] == 0
    };
    while let Some((r, c)) = stack.pop() {
        let mut next = vec![];
        if r > 0 {
            next.push((r - 1, c));
        }
        if c > 0 {
            next.push((r, c - 1));
        }
        if r + 1 < rows + 2 {
            next.push((r + 1, c));
        }
        if c + 1 < cols + 2 {
            next.push((r, c + 1));
        }
        for (nr, nc) in next {
            if !seen[[nr, nc]] && bg(m, nr, nc) {
                seen[[nr, nc]] = true;
                stack.push((nr, nc));
            }
        }
    }
    for r in 0..rows {
        for c in 0..cols {
            if !seen[[r + 1, c + 1]] {
                m[[r, c]] = 1;
            }
        }
    }
}

fn hole_free(size: usize) -> impl Strategy<Value = Array2<u8>> {
    (prop::collection::vec(0u8..=1, size * size), 0u32..4).prop_map(move |(bits, density)| {
        // Sparser masks make more, smaller components.
        let mut m = Array2::from_shape_vec((size, size), bits).unwrap();
        if density > 0 {
            m.iter_mut().enumerate().for_each(|(i, v)| {
                if !(i as u32)
                    .wrapping_mul(2_654_435_761)
                    .is_multiple_of(density + 1)
                {
                    *v = 0;
                }
            });
        }
        fill_holes(&mut m);
        m
    })
}

#[test]
fn bounding_box_reference_polygon_is_closed() {
    let g = PlaneGeometry::new(
        [10.0, 20.0, 30.0],
        [1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        PixelSpacing {
            row: 0.5,
            column: 2.0,
        },
    )
    .unwrap();
    let mapper = AffineMapper::from_geometry(&g).unwrap();
    let b = BoundingBox {
        label: 1,
        min_col: 1,
        min_row: 2,
        max_col: 3,
        max_row: 6,
    };
    let poly = b.to_reference_polygon(&mapper);
    assert_eq!(poly.len(), 5);
    assert_eq!(poly[0], poly[4]);
    assert_eq!(poly[0], [12.0, 21.0, 30.0]);
    assert_eq!(poly[2], [16.0, 23.0, 30.0]);
    assert_eq!(
        b.to_polygon(),
        vec![[1.0, 2.0], [3.0, 2.0], [3.0, 6.0], [1.0, 6.0], [1.0, 2.0]]
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn components_partition_the_foreground(m in hole_free(32), eight in any::<bool>()) {
        let conn = if eight { Connectivity::Eight } else { Connectivity::Four };
        let lc = connected_components(&BinaryMask::from_array(m.clone()).unwrap(), conn);
        let (expected, roots) = union_find_count(&m, eight);
        prop_assert_eq!(lc.count as usize, expected);
        let cols = m.ncols();
        let mut root_of_label = std::collections::HashMap::new();
        for ((r, c), &l) in lc.labels.indexed_iter() {
            prop_assert_eq!(l == 0, m[[r, c]] == 0);
            if l != 0 {
                let root = roots[r * cols + c];
                prop_assert_eq!(*root_of_label.entry(l).or_insert(root), root);
            }
        }
        // Labels appear in row-major first-encounter order.
        let mut next = 1;
        for &l in lc.labels.iter() {
            if l == next {
                next += 1;
            }
            prop_assert!(l < next);
        }
    }

    #[test]
    fn contours_fill_back_to_support(m in hole_free(32)) {
        let lc = connected_components(&BinaryMask::from_array(m).unwrap(), Connectivity::Eight);
        let contours = trace_contours(&lc);
        prop_assert_eq!(contours.len(), lc.count as usize);
        for c in &contours {
            prop_assert_eq!(c.points.first(), c.points.last());
            let support = lc.support(c.label);
            for &[x, y] in &c.points {
                prop_assert!(support.get(y, x));
            }
            prop_assert_eq!(c.fill(lc.rows(), lc.cols()), support);
        }
    }

    #[test]
    fn boxes_are_tight(m in hole_free(32)) {
        let lc = connected_components(&BinaryMask::from_array(m).unwrap(), Connectivity::Eight);
        let boxes = bounding_boxes(&lc);
        prop_assert_eq!(boxes.len(), lc.count as usize);
        for b in boxes {
            prop_assert!(b.min_col <= b.max_col && b.min_row <= b.max_row);
            let pixels: Vec<(usize, usize)> = lc.labels.indexed_iter().filter(|(_, &l)| l == b.label).map(|(p, _)| p).collect();
            prop_assert!(pixels.iter().all(|&(r, c)| (b.min_row..=b.max_row).contains(&r) && (b.min_col..=b.max_col).contains(&c)));
            prop_assert!(pixels.iter().any(|&(r, _)| r == b.min_row));
            prop_assert!(pixels.iter().any(|&(r, _)| r == b.max_row));
            prop_assert!(pixels.iter().any(|&(_, c)| c == b.min_col));
            prop_assert!(pixels.iter().any(|&(_, c)| c == b.max_col));
        }
    }

    #[test]
    fn threshold_is_monotone(p in prop::collection::vec(0.0f32..=1.0, 64), t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let p = Array2::from_shape_vec((8, 8), p).unwrap();
        let a = threshold(p.view(), lo).unwrap();
        let b = threshold(p.view(), hi).unwrap();
        for (x, y) in a.as_array().iter().zip(b.as_array()) {
            prop_assert!(y <= x);
        }
    }
}
