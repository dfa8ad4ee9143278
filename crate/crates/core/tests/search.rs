use std::collections::BTreeSet;
use std::sync::Arc;

use hexgeom::construct::{hermitian, hermitian_subquadrangle, split_cayley_hexagon, symplectic};
use hexgeom::geometry::line_grassmannian;
use hexgeom::relations::{OppositionSets, PairRelation, RelationTable};
use hexgeom::search::*;
use hexgeom::{Geometry, PointId};

fn triples(n: PointId) -> impl Iterator<Item = [PointId; 3]> {
    (0..n).flat_map(move |a| (a + 1..n).flat_map(move |b| (b + 1..n).map(move |c| [a, b, c])))
}

#[test]
fn blocking_sets_of_h2_by_distances() {
    let h = split_cayley_hexagon(2).unwrap();
    let n = h.point_count() as PointId;
    let far: Vec<Vec<bool>> =
        (0..n).map(|x| (0..n).map(|y| h.point_distance(x, y).unwrap() == 3).collect()).collect();
    let brute: Vec<Vec<PointId>> = triples(n)
        .filter(|t| !(0..n as usize).any(|z| t.iter().all(|&p| far[p as usize][z])))
        .map(|t| t.to_vec())
        .collect();
    let opp = OppositionSets::new(&h).unwrap();
    let found = blocking_search(&opp, 3, BlockingOptions::default()).unwrap();
    assert!(found.complete);
    assert_eq!(found.sets, brute);
    assert_eq!(brute.len(), 651);
    // Every 2-set has a common opposite point.
    assert!(blocking_search(&opp, 2, BlockingOptions::default()).unwrap().sets.is_empty());
}

#[test]
fn dominating_triples_of_the_quadrangle() {
    let w = symplectic(3, 2).unwrap();
    let opp = OppositionSets::new(&w).unwrap();
    let brute: Vec<Vec<PointId>> = triples(15).map(|t| t.to_vec()).filter(|t| gq_dominating_check(&w, t)).collect();
    let found = blocking_search(&opp, 3, BlockingOptions::default()).unwrap();
    assert_eq!(found.sets, brute);
    for l in w.lines() {
        assert!(brute.contains(l));
    }
    assert!(gq_dominating_check(&w, w.line_points(0)));
}

#[test]
fn minimal_only_drops_supersets() {
    let w = symplectic(3, 2).unwrap();
    let opp = OppositionSets::new(&w).unwrap();
    let small: BTreeSet<Vec<PointId>> = blocking_search(&opp, 3, BlockingOptions::default()).unwrap().sets.into_iter().collect();
    let minimal = blocking_search(&opp, 4, BlockingOptions { minimal_only: true, budget: None }).unwrap();
    for s in &minimal.sets {
        for skip in 0..4 {
            let sub: Vec<PointId> = s.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &p)| p).collect();
            assert!(!small.contains(&sub), "{s:?}");
        }
    }
}

#[test]
fn budget_marks_partial() {
    let h = split_cayley_hexagon(2).unwrap();
    let opp = OppositionSets::new(&h).unwrap();
    let r = blocking_search(&opp, 3, BlockingOptions { minimal_only: false, budget: Some(10) }).unwrap();
    assert!(!r.complete);
    assert!(matches!(
        enumerate_blocking_sets(&opp, 3, BlockingOptions { minimal_only: false, budget: Some(10) }),
        Err(SearchError::BudgetExceeded { .. })
    ));
    assert!(matches!(blocking_search(&opp, 0, BlockingOptions::default()), Err(SearchError::BadSize { k: 0 })));
}

#[test]
fn thread_count_does_not_change_results() {
    let h = split_cayley_hexagon(2).unwrap();
    let opp = OppositionSets::new(&h).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            (blocking_search(&opp, 3, BlockingOptions::default()).unwrap().sets, enumerate_geometric_lines(&opp, RutScope::All))
        })
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn round_up_triples_by_example() {
    let h = split_cayley_hexagon(2).unwrap();
    let t = RelationTable::new(&h).unwrap();
    let opp = OppositionSets::from_table(&t);
    let l = h.line_points(0);
    assert!(is_round_up_triple(&opp, l[0], l[1], l[2]).unwrap());
    let special = (0..h.point_count() as PointId)
        .find(|&x| t.get(x, l[0]) == PairRelation::Special && h.perp(x).and_count(h.line_set(0)) == 0)
        .unwrap();
    assert!(!is_round_up_triple(&opp, l[0], l[1], special).unwrap());
    assert_eq!(is_round_up_triple(&opp, l[0], l[0], l[1]), Err(SearchError::NotDistinct));

    assert_eq!(geometric_line_closure(&opp, [l[0], l[1], l[2]]), Some(l.to_vec()));
    assert!(is_geometric_line(&opp, l));
    assert!(!is_geometric_line(&opp, &[l[0], l[1], special]));
}

#[test]
fn hyperbolic_lines_and_traces() {
    for (q, expected) in [(2, 3), (3, 4)] {
        let h = split_cayley_hexagon(q).unwrap();
        let t = RelationTable::new(&h).unwrap();
        let tools = HexagonTools::new(&t).unwrap();
        let lines = tools.all_hyperbolic_lines().unwrap();
        assert!(lines.iter().all(|x| x.points.len() == expected && x.regular), "q={q}");
        for x in lines.iter().step_by(11) {
            // The centre is collinear to every point, which are pairwise special.
            for (i, &a) in x.points.iter().enumerate() {
                assert!(h.collinear(a, x.center));
                for &b in &x.points[i + 1..] {
                    assert_eq!(t.get(a, b), PairRelation::Special);
                }
            }
        }
        let m = tools.lines_opposite(0)[0];
        let tr = tools.distance3_trace(0, m).unwrap();
        assert_eq!(tr.points.len(), q + 1);
        assert_eq!(tools.trace_of(&tr.points).map(|_| ()), Some(()));
        assert!(tools.trace_is_regular(0, m).unwrap());
        // Lines through a common point are not opposite.
        let p = h.line_points(0)[0];
        let near = *h.lines_through(p).iter().find(|&&k| k != 0).unwrap();
        assert_eq!(tools.distance3_trace(0, near), Err(SearchError::NotOpposite(0, near)));
    }
    let w = symplectic(3, 2).unwrap();
    let t = RelationTable::new(&w).unwrap();
    assert!(HexagonTools::new(&t).is_err());
}

#[test]
fn common_opposites_in_h2() {
    let h = split_cayley_hexagon(2).unwrap();
    let opp = OppositionSets::new(&h).unwrap();
    let l = h.line_points(0);
    assert_eq!(common_opposite(&opp, l), None);
    let p = common_opposite(&opp, &l[..2]).unwrap();
    assert!(h.point_distance(p, l[0]).unwrap() == 3 && h.point_distance(p, l[1]).unwrap() == 3);
}

#[test]
fn ovoids_of_w2_by_brute_force() {
    let w = symplectic(3, 2).unwrap();
    let mut brute = Vec::new();
    for a in 0..15 {
        for b in a + 1..15 {
            for c in b + 1..15 {
                for d in c + 1..15 {
                    for e in d + 1..15 {
                        let s = [a, b, c, d, e];
                        let pairwise = s.iter().enumerate().all(|(i, &x)| s[i + 1..].iter().all(|&y| !w.collinear(x, y)));
                        if pairwise {
                            brute.push(s.to_vec());
                        }
                    }
                }
            }
        }
    }
    assert_eq!(brute.len(), 6);
    assert_eq!(enumerate_ovoids(&w), brute);
    for o in &brute {
        assert!(is_ovoid(&w, o));
        assert!(gq_dominating_check(&w, o));
        assert!(!gq_dominating_check(&w, &o[..4]));
    }
    assert!(!is_ovoid(&w, w.line_points(0)));
}

#[test]
fn ovoids_of_the_hermitian_subquadrangle() {
    let h = hermitian(3, 4).unwrap();
    let sub = hermitian_subquadrangle(&h).unwrap();
    let ovoids = enumerate_ovoids(&sub.geometry);
    assert_eq!(ovoids.len(), 6);
    assert!(ovoids.iter().all(|o| is_ovoid(&sub.geometry, o)));
}

#[test]
fn hyperbolic_pencils_of_the_w52_grassmannian() {
    let g = line_grassmannian(&Arc::new(symplectic(5, 2).unwrap())).unwrap();
    let pencils = hyperbolic_pencils(&g).unwrap();
    assert_eq!(pencils.len(), 1260);
    assert!(pencils.iter().all(|p| is_hyperbolic_pencil(&g, p)));
    let l: Vec<PointId> = g.line_points(0).to_vec();
    assert!(!is_hyperbolic_pencil(&g, &l));
    let t = RelationTable::new(&g).unwrap();
    let rec = Recognizer::new(&t);
    // Lines of the Grassmannian are the planar pencils of the parent.
    assert_eq!(rec.classify(&l), BlockingClass::PlanarPencil);
    assert_eq!(rec.classify(&pencils[0]), BlockingClass::HyperbolicPencil);
    let plain: Geometry = symplectic(3, 2).unwrap();
    assert!(hyperbolic_pencils(&plain).is_err());
}
