use std::sync::Arc;

use hexgeom::construct::{self, hermitian_subquadrangle, split_cayley_hexagon, symplectic};
use hexgeom::field::Field;
use hexgeom::geometry::line_grassmannian;
use hexgeom::relations::OppositionSets;
use hexgeom::{BitSet, Geometry, Kind, PointId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn set(g: &Geometry, pts: &[PointId]) -> BitSet {
    BitSet::from_iter_with_len(g.point_count(), pts.iter().map(|&p| p as usize))
}

/// Collinearity recomputed from the line list alone.
fn collinearity_from_lines(g: &Geometry) -> Vec<Vec<bool>> {
    let n = g.point_count();
    let mut m = vec![vec![false; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = true;
    }
    for l in g.lines() {
        for &a in l {
            for &b in l {
                m[a as usize][b as usize] = true;
            }
        }
    }
    m
}

fn models() -> Vec<Geometry> {
    vec![
        construct::pg(2, 2).unwrap(),
        construct::pg(3, 2).unwrap(),
        construct::pg(2, 3).unwrap(),
        symplectic(3, 2).unwrap(),
        symplectic(5, 2).unwrap(),
        construct::hyperbolic_quadric(7, 2).unwrap(),
        construct::hermitian(3, 4).unwrap(),
        split_cayley_hexagon(2).unwrap(),
        split_cayley_hexagon(3).unwrap(),
    ]
}

#[test]
fn collinearity_matches_lines() {
    for g in models() {
        let m = collinearity_from_lines(&g);
        for x in 0..g.point_count() {
            for y in 0..g.point_count() {
                assert_eq!(g.collinear(x as PointId, y as PointId), m[x][y], "{} ({x},{y})", g.name());
            }
        }
    }
}

#[test]
fn every_model_validates() {
    for g in models() {
        let v = g.validate();
        assert!(v.is_valid(), "{}: {v:?}", g.name());
        assert!(v.thick, "{}", g.name());
    }
}

#[test]
fn projective_counts() {
    let cases = [((2, 2), 7, 7), ((3, 2), 15, 35), ((2, 3), 13, 13)];
    for ((n, q), pts, lines) in cases {
        let g = construct::pg(n, q).unwrap();
        assert_eq!((g.point_count(), g.line_count()), (pts, lines), "PG({n},{q})");
    }
}

#[test]
fn girth_and_diameter() {
    assert_eq!(construct::pg(2, 2).unwrap().incidence_girth_diameter().unwrap(), (6, 3));
    let w = symplectic(3, 2).unwrap();
    assert_eq!(w.incidence_girth_diameter().unwrap(), (8, 4));
    assert!(w.is_generalized_polygon(4));
    let h = split_cayley_hexagon(2).unwrap();
    assert_eq!(h.incidence_girth_diameter().unwrap(), (12, 6));
    assert!(h.is_generalized_polygon(6));
    assert!(!h.is_generalized_polygon(4));
}

#[test]
fn hexagon_point_graph_has_diameter_three() {
    for q in [2, 3] {
        let h = split_cayley_hexagon(q).unwrap();
        assert_eq!(h.point_graph_diameter().unwrap(), 3);
        assert_eq!(h.point_distance(0, 0).unwrap(), 0);
        let other = h.line_points(h.lines_through(0)[0])[1];
        assert_eq!(h.point_distance(0, other).unwrap(), 1);
    }
}

#[test]
fn split_cayley_points_are_the_quadric() {
    // x0x4 + x1x5 + x2x6 = x3², over every normalized vector of GF(q)^7.
    for q in [2usize, 3, 4] {
        let h = split_cayley_hexagon(q).unwrap();
        let f = Field::of_order(q).unwrap();
        let coords = h.coordinates().expect("coordinates");
        let on_quadric = |v: &[u8]| {
            let lhs = f.add_raw(f.add_raw(f.mul_raw(v[0], v[4]), f.mul_raw(v[1], v[5])), f.mul_raw(v[2], v[6]));
            lhs == f.mul_raw(v[3], v[3])
        };
        assert!(coords.vectors.iter().all(|v| on_quadric(v)), "H({q})");
        // Count the quadric independently over all vectors, one per projective point.
        let mut count = 0usize;
        let total = q.pow(7);
        for code in 1..total {
            let v: Vec<u8> = (0..7).map(|i| (code / q.pow(i) % q) as u8).collect();
            let lead = *v.iter().find(|&&x| x != 0).unwrap();
            if lead == 1 && on_quadric(&v) {
                count += 1;
            }
        }
        assert_eq!(count, h.point_count());
        assert_eq!(count, (1 + q) * (1 + q * q + q.pow(4)));
        assert_eq!(h.order(), Some((q, q)));
        assert!(h.is_generalized_polygon(6));
    }
}

#[test]
fn polar_spaces_are_proper_hyperplanes() {
    for g in [symplectic(3, 2).unwrap(), symplectic(5, 2).unwrap(), construct::hermitian(3, 4).unwrap()] {
        assert!(g.satisfies_one_or_all(), "{}", g.name());
        assert!(g.is_gamma_space());
        for x in 0..g.point_count() {
            assert!(g.perp(x as PointId).count() < g.point_count(), "{} point {x}", g.name());
        }
    }
}

#[test]
fn singular_planes() {
    assert!(symplectic(3, 2).unwrap().singular_planes().unwrap().is_empty());
    // Totally isotropic planes of W(5,2): (q+1)(q²+1)(q³+1).
    assert_eq!(symplectic(5, 2).unwrap().singular_planes().unwrap().len(), 3 * 5 * 9);
    let pg = construct::pg(3, 2).unwrap();
    let planes = pg.singular_subspaces_of_dim2().unwrap();
    assert_eq!(planes.len(), 15);
    assert!(planes.iter().all(|p| p.points.len() == 7 && p.dimension == 2));
}

#[test]
fn line_grassmannians() {
    let cases: [(Geometry, usize); 3] = [
        (construct::hyperbolic_quadric(7, 2).unwrap(), 1575),
        (symplectic(5, 2).unwrap(), 315),
        (construct::pg(3, 2).unwrap(), 35),
    ];
    for (g, n) in cases {
        let name = g.name().to_string();
        let gr = line_grassmannian(&Arc::new(g)).unwrap();
        assert_eq!(gr.point_count(), n, "{name}");
        assert_eq!(gr.kind(), Kind::Grassmannian);
        assert!(gr.validate().is_partial_linear(), "{name}");
        assert_eq!(gr.parent().unwrap().name(), name);
    }
    // Lines of a quadrangle lie in no plane.
    assert!(line_grassmannian(&Arc::new(symplectic(3, 2).unwrap())).is_err());
}

#[test]
fn point_residuals() {
    let w = symplectic(5, 2).unwrap();
    for p in [0, 17, 62] {
        let r = w.point_residual(p).unwrap();
        assert_eq!((r.point_count(), r.line_count(), r.order()), (15, 15, Some((2, 2))));
        assert!(r.is_generalized_polygon(4));
    }
    let pg = construct::pg(3, 2).unwrap();
    let r = pg.point_residual(3).unwrap();
    assert_eq!((r.point_count(), r.line_count()), (7, 7));
    assert!(symplectic(3, 2).unwrap().point_residual(0).is_err());

    let gr = line_grassmannian(&Arc::new(construct::hyperbolic_quadric(7, 2).unwrap())).unwrap();
    for p in [0, 800] {
        let r = gr.point_residual(p).unwrap();
        assert!(r.is_connected());
        assert!(r.validate().is_partial_linear());
    }
}

#[test]
fn convex_closure_examples() {
    let w = symplectic(3, 2).unwrap();
    assert_eq!(w.convex_closure(&set(&w, &[4])).to_vec(), vec![4]);
    let line = w.line_points(0).to_vec();
    let two = set(&w, &line[..2]);
    assert_eq!(w.convex_closure(&two), set(&w, &line));

    let gr = line_grassmannian(&Arc::new(construct::hyperbolic_quadric(7, 2).unwrap())).unwrap();
    let opp = OppositionSets::new(&gr).unwrap();
    let table = hexgeom::relations::RelationTable::new(&gr).unwrap();
    let partner = (1..gr.point_count() as PointId)
        .find(|&y| table.get(0, y) == hexgeom::relations::PairRelation::Symplectic)
        .expect("a symplectic pair");
    let symp = gr.convex_closure(&set(&gr, &[0, partner]));
    assert!(!opp.opposite(0, partner));
    // A polar space: inside the closure every point sees one or all points of each line.
    let inside: Vec<usize> =
        (0..gr.line_count()).filter(|&l| gr.line_points(l as u32).iter().all(|&p| symp.contains(p as usize))).collect();
    assert!(!inside.is_empty());
    for x in symp.iter() {
        for &l in &inside {
            let seen = gr.line_points(l as u32).iter().filter(|&&p| gr.collinear(x as PointId, p)).count();
            assert!(seen == 1 || seen == gr.line_points(l as u32).len(), "point {x}, line {l}");
        }
    }
    assert!(symp.count() < gr.point_count());
}

#[test]
fn convex_closure_is_idempotent_and_monotone() {
    let gr = line_grassmannian(&Arc::new(symplectic(5, 2).unwrap())).unwrap();
    let n = gr.point_count();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..20 {
        let a: Vec<PointId> = (0..2).map(|_| rng.gen_range(0..n as PointId)).collect();
        let seed = set(&gr, &a);
        let c = gr.convex_closure(&seed);
        assert!(seed.is_subset(&c));
        assert_eq!(gr.convex_closure(&c), c);
        let mut bigger = seed.clone();
        bigger.insert(rng.gen_range(0..n));
        assert!(c.is_subset(&gr.convex_closure(&bigger)));
    }
}

#[test]
fn every_s_points_of_a_hexagon_have_a_common_opposite() {
    let h2 = split_cayley_hexagon(2).unwrap();
    let o2 = OppositionSets::new(&h2).unwrap();
    let n = h2.point_count() as PointId;
    for a in 0..n {
        for b in a + 1..n {
            assert!(o2.common_opposite(&[a, b]).is_some(), "H(2) {a} {b}");
            // Some point is opposite a and not b.
            let mut only_a = o2.opp[a as usize].clone();
            only_a.difference_with(&o2.opp[b as usize]);
            assert!(!only_a.is_empty(), "H(2) {a} {b}");
        }
    }
    let h3 = split_cayley_hexagon(3).unwrap();
    let o3 = OppositionSets::new(&h3).unwrap();
    let n = h3.point_count();
    let blocked: usize = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut ab = BitSet::new(n);
            let mut bad = 0;
            for b in a + 1..n {
                ab.assign_and(&o3.opp[a], &o3.opp[b]);
                for c in b + 1..n {
                    if !ab.intersects(&o3.opp[c]) {
                        bad += 1;
                    }
                }
            }
            bad
        })
        .sum();
    assert_eq!(blocked, 0);
}

#[test]
fn subquadrangle_of_h34() {
    let h = construct::hermitian(3, 4).unwrap();
    assert_eq!((h.point_count(), h.line_count(), h.order()), (45, 27, Some((4, 2))));
    let sub = hermitian_subquadrangle(&h).unwrap();
    let g = &sub.geometry;
    assert_eq!((g.point_count(), g.line_count(), g.order()), (15, 15, Some((2, 2))));
    assert!(g.is_generalized_polygon(4));
    for p in 0..15 {
        assert_eq!(g.lines_through(p).len(), 3);
    }
    let pts = sub.point_set(h.point_count());
    // Each ambient line meeting the subquadrangle twice carries a sub-line.
    for l in h.lines() {
        let inside: Vec<PointId> = l.iter().copied().filter(|&p| pts.contains(p as usize)).collect();
        assert!(inside.len() <= 1 || inside.len() == 3, "{l:?}");
        if inside.len() == 3 {
            let local: Vec<PointId> =
                inside.iter().map(|p| sub.embedding.iter().position(|e| e == p).unwrap() as PointId).collect();
            assert!(g.find_line(&local).is_some());
        }
    }
    // Geodesically convex in the ambient quadrangle.
    assert_eq!(h.geodesic_closure(&pts), pts);
    // Odd characteristic gives a grid, not a quadrangle of order (q,q).
    assert!(hermitian_subquadrangle(&construct::hermitian(3, 9).unwrap()).is_err());
}

#[test]
fn hyperbolic_quadric_counts() {
    let q = construct::hyperbolic_quadric(7, 2).unwrap();
    assert_eq!((q.point_count(), q.line_count()), (135, 1575));
    assert_eq!(q.kind(), Kind::PolarSpace(4));
}
