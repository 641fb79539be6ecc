use proptest::prelude::*;
mod common;

use common::brute_force;
use shapefit::{Bounds, RandomStream, Shape, ShapeKind};

fn span_pixels(shape: &Shape, bounds: Bounds) -> Vec<(u32, u32)> {
    shape.rasterize(bounds).pixels().collect()
}

#[test]
fn thousand_random_shapes_per_kind_match_brute_force() {
    let bounds = Bounds::new(32, 32);
    for kind in ShapeKind::ALL {
        let mut rng = RandomStream::new(0x5eed ^ kind as u64);
        let mut shape = Shape::random(kind, bounds, &mut rng);
        for i in 0..1000 {
            // Alternate fresh draws with mutation chains so clipped and thin shapes appear.
            shape = if i % 4 == 0 { Shape::random(kind, bounds, &mut rng) } else { shape.mutate(bounds, &mut rng) };
            assert_eq!(span_pixels(&shape, bounds), brute_force(&shape, bounds), "{shape:?}");
        }
    }
}

#[test]
fn spans_are_sorted_disjoint_rows_inside_bounds() {
    let bounds = Bounds::new(40, 24);
    let mut rng = RandomStream::new(11);
    for kind in ShapeKind::ALL {
        for _ in 0..200 {
            let spans = Shape::random(kind, bounds, &mut rng).rasterize(bounds);
            let rows: Vec<u32> = spans.iter().map(|s| s.y).collect();
            assert!(rows.windows(2).all(|w| w[0] < w[1]));
            for s in &spans {
                assert!(s.x1 <= s.x2 && s.x2 < bounds.width && s.y < bounds.height);
            }
        }
    }
}

fn any_shape() -> impl Strategy<Value = Shape> {
    let c = -20i32..60;
    let e = 0i32..50;
    let r = 1i32..50;
    prop_oneof![
        (c.clone(), c.clone(), c.clone(), c.clone(), c.clone(), c.clone())
            .prop_map(|(x1, y1, x2, y2, x3, y3)| Shape::Triangle { x1, y1, x2, y2, x3, y3 }),
        (c.clone(), c.clone(), c.clone(), c.clone()).prop_map(|(x1, y1, x2, y2)| Shape::Rectangle { x1, y1, x2, y2 }),
        (c.clone(), c.clone(), e.clone(), e.clone(), 0i32..360)
            .prop_map(|(cx, cy, w, h, angle)| Shape::RotatedRectangle { cx, cy, w, h, angle }),
        (c.clone(), c.clone(), r.clone(), r.clone()).prop_map(|(cx, cy, rx, ry)| Shape::Ellipse { cx, cy, rx, ry }),
        (c.clone(), c.clone(), r.clone(), r.clone(), 0i32..360)
            .prop_map(|(cx, cy, rx, ry, angle)| Shape::RotatedEllipse { cx, cy, rx, ry, angle }),
        (c.clone(), c, r).prop_map(|(cx, cy, r)| Shape::Circle { cx, cy, r }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn arbitrary_shapes_match_brute_force(shape in any_shape(), w in 1u32..48, h in 1u32..48) {
        let bounds = Bounds::new(w, h);
        prop_assert_eq!(span_pixels(&shape, bounds), brute_force(&shape, bounds));
    }

    #[test]
    fn mutation_stays_same_kind_and_changes_one_site(seed in any::<u64>(), kind_index in 0usize..6) {
        let bounds = Bounds::new(64, 48);
        let kind = ShapeKind::ALL[kind_index];
        let mut rng = RandomStream::new(seed);
        let shape = Shape::random(kind, bounds, &mut rng);
        let next = shape.mutate(bounds, &mut rng);
        prop_assert_eq!(next.kind(), kind);
        let changed = changed_sites(&shape, &next);
        prop_assert!(changed <= 1, "{:?} -> {:?}", shape, next);
    }

    #[test]
    fn random_shapes_are_deterministic(seed in any::<u64>(), kind_index in 0usize..6) {
        let bounds = Bounds::new(100, 70);
        let kind = ShapeKind::ALL[kind_index];
        let a = Shape::random(kind, bounds, &mut RandomStream::new(seed));
        let b = Shape::random(kind, bounds, &mut RandomStream::new(seed));
        prop_assert_eq!(a, b);
    }
}

/// Number of mutation sites that differ, grouping parameters the way a
/// single mutation moves them.
fn changed_sites(a: &Shape, b: &Shape) -> usize {
    let groups: Vec<(Vec<i32>, Vec<i32>)> = match (*a, *b) {
        (
            Shape::Triangle { x1, y1, x2, y2, x3, y3 },
            Shape::Triangle { x1: p1, y1: q1, x2: p2, y2: q2, x3: p3, y3: q3 },
        ) => vec![(vec![x1, y1], vec![p1, q1]), (vec![x2, y2], vec![p2, q2]), (vec![x3, y3], vec![p3, q3])],
        (Shape::Rectangle { x1, y1, x2, y2 }, Shape::Rectangle { x1: p1, y1: q1, x2: p2, y2: q2 }) => {
            // A translation moves both corners by the same offset.
            if (p1 - x1, q1 - y1) == (p2 - x2, q2 - y2) && (p1, q1) != (x1, y1) {
                return 1;
            }
            // Moving one corner keeps the other as a vertex; canonical order
            // may swap coordinates between the stored corners.
            let vertex = |x: i32, y: i32| (x == p1 || x == p2) && (y == q1 || y == q2);
            if (x1, y1, x2, y2) == (p1, q1, p2, q2) {
                return 0;
            }
            return if vertex(x1, y1) || vertex(x2, y2) { 1 } else { 2 };
        }
        (
            Shape::RotatedRectangle { cx, cy, w, h, angle },
            Shape::RotatedRectangle { cx: c2, cy: d2, w: w2, h: h2, angle: a2 },
        ) => vec![(vec![cx, cy], vec![c2, d2]), (vec![w, h], vec![w2, h2]), (vec![angle], vec![a2])],
        (Shape::Ellipse { cx, cy, rx, ry }, Shape::Ellipse { cx: c2, cy: d2, rx: r2, ry: s2 }) => {
            vec![(vec![cx, cy], vec![c2, d2]), (vec![rx], vec![r2]), (vec![ry], vec![s2])]
        }
        (
            Shape::RotatedEllipse { cx, cy, rx, ry, angle },
            Shape::RotatedEllipse { cx: c2, cy: d2, rx: r2, ry: s2, angle: a2 },
        ) => vec![(vec![cx, cy], vec![c2, d2]), (vec![rx, ry], vec![r2, s2]), (vec![angle], vec![a2])],
        (Shape::Circle { cx, cy, r }, Shape::Circle { cx: c2, cy: d2, r: r2 }) => {
            vec![(vec![cx, cy], vec![c2, d2]), (vec![r], vec![r2])]
        }
        _ => return usize::MAX,
    };
    groups.iter().filter(|(x, y)| x != y).count()
}

#[test]
fn fixed_seed_draws_are_frozen() {
    let bounds = Bounds::new(256, 256);
    let mut rng = RandomStream::new(20240917);
    let rect = Shape::random(ShapeKind::Rectangle, bounds, &mut rng);
    let small = Bounds::new(64, 64);
    let mut rng = RandomStream::new(77);
    let moved = Shape::Rectangle { x1: 10, y1: 10, x2: 20, y2: 20 }.mutate(small, &mut rng);
    assert_eq!(rect, Shape::Rectangle { x1: 106, y1: 98, x2: 121, y2: 122 });
    assert_eq!(moved, Shape::Rectangle { x1: 10, y1: 10, x2: 25, y2: 57 });
}
