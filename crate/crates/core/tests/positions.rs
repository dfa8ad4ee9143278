use std::sync::Arc;

use hexgeom::construct::hyperbolic_quadric;
use hexgeom::geometry::line_grassmannian;
use hexgeom::positions::{catalogue, lookup, table_level, PositionError, PositionTuple, Positions};
use hexgeom::relations::{PairRelation, RelationTable};
use hexgeom::{Geometry, LineId, PointId};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn model() -> Geometry {
    line_grassmannian(&Arc::new(hyperbolic_quadric(7, 2).unwrap())).unwrap()
}

fn tuple(s: &str) -> PositionTuple {
    s.parse().unwrap()
}

/// Some `m` with `δ(l, m) = t`; the model is line-transitive, so `l = 0` sees every position.
fn partner(pos: &Positions<'_, '_>, l: LineId, t: PositionTuple) -> Option<LineId> {
    (0..pos.geometry().line_count() as LineId).find(|&m| pos.try_tuple(l, m) == Some(t))
}

fn realized(pos: &Positions<'_, '_>) -> Vec<(PositionTuple, LineId)> {
    catalogue().iter().filter_map(|e| partner(pos, 0, e.tuple).map(|m| (e.tuple, m))).collect()
}

#[test]
fn equal_and_coplanar_lines() {
    let g = model();
    let t = RelationTable::new(&g).unwrap();
    let pos = Positions::new(&t).unwrap();
    assert_eq!(pos.tuple_of(5, 5).unwrap(), PositionTuple::EQUAL);
    assert!(pos.free_points(5, 5).is_empty());
    // Two lines through one point whose union is a singular set are coplanar.
    let x = g.line_points(0)[0];
    let coplanar = g
        .lines_through(x)
        .iter()
        .copied()
        .filter(|&m| m != 0)
        .find(|&m| g.line_points(0).iter().all(|&a| g.line_points(m).iter().all(|&b| g.collinear(a, b))))
        .expect("a coplanar line");
    assert_eq!(pos.tuple_of(0, coplanar).unwrap(), tuple("0111"));
    let mut free = pos.free_points(0, coplanar);
    free.sort_unstable();
    let expected: Vec<PointId> = g.line_points(0).iter().copied().filter(|&p| p != x).collect();
    assert_eq!(free, expected);
    assert!(!pos.locally_opposite_at(x, 0, coplanar).unwrap());
    assert!(!pos.locally_opposite_at(x, 0, 0).unwrap());
}

#[test]
fn opposite_lines_have_no_projection_point() {
    let g = model();
    let t = RelationTable::new(&g).unwrap();
    let pos = Positions::new(&t).unwrap();
    let m = partner(&pos, 0, PositionTuple::OPPOSITE).unwrap();
    assert_eq!(pos.projection_point(0, m), None);
    assert_eq!(pos.free_points(0, m), g.line_points(0).to_vec());
    assert_eq!(pos.level(0, m).unwrap(), 0);
    assert!(pos.comb_to_opposite(0, m).unwrap().steps.is_empty());
    assert!(matches!(pos.find_combing_line(0, m, g.line_points(0)[0]), Err(PositionError::Terminal(..))));
}

#[test]
fn locally_opposite_lines_meet_in_special_points() {
    let g = model();
    let t = RelationTable::new(&g).unwrap();
    let pos = Positions::new(&t).unwrap();
    let x = g.line_points(0)[0];
    let mut seen = 0;
    for &m in g.lines_through(x) {
        let others_special = g.line_points(0).iter().filter(|&&a| a != x).all(|&a| {
            g.line_points(m).iter().filter(|&&b| b != x).all(|&b| t.get(a, b) == PairRelation::Special)
        });
        assert_eq!(pos.locally_opposite_at(x, 0, m).unwrap(), m != 0 && others_special, "line {m}");
        seen += others_special as usize;
    }
    assert!(seen > 0);
    let off = (0..g.line_count() as LineId).find(|&m| g.line_points(m).binary_search(&x).is_err()).unwrap();
    assert!(matches!(pos.locally_opposite_at(x, 0, off), Err(PositionError::NotThrough(..))));
}

#[test]
fn inverse_law_on_a_sample() {
    let g = model();
    let t = RelationTable::new(&g).unwrap();
    let pos = Positions::new(&t).unwrap();
    let mut lines: Vec<LineId> = (0..g.line_count() as LineId).collect();
    lines.shuffle(&mut ChaCha8Rng::seed_from_u64(0));
    for &l in &lines[..40] {
        for &m in &lines[..400] {
            let a = pos.tuple_of(l, m).unwrap();
            assert_eq!(pos.tuple_of(m, l).unwrap(), a.inverse(), "{l} {m}");
            assert!(lookup(a.dual()).is_some());
        }
    }
}

#[test]
fn comb_traces_follow_table_one() {
    let g = model();
    let t = RelationTable::new(&g).unwrap();
    let pos = Positions::new(&t).unwrap();
    let trace: Vec<String> = pos.comb_to_opposite(0, 0).unwrap().positions().iter().map(|p| p.to_string()).collect();
    assert_eq!(trace, ["0110", "0112", "1223", "2332"]);
    assert_eq!(pos.level(0, 0).unwrap(), 3);

    let m = partner(&pos, 0, tuple("1 3/2 3/2 1")).unwrap();
    let trace: Vec<String> = pos.comb_to_opposite(0, m).unwrap().positions().iter().map(|p| p.to_string()).collect();
    assert_eq!(trace, ["1 3/2 3/2 1", "1 3/2 2 2", "2223", "2332"]);

    let m = partner(&pos, 0, tuple("1223")).unwrap();
    assert_eq!(pos.level(0, m).unwrap(), 1);

    for (t, m) in realized(&pos) {
        let trace = pos.comb_to_opposite(0, m).unwrap();
        assert!(trace.level() <= 3, "{t}");
        assert_eq!(Some(trace.level()), table_level(t), "{t}");
        let states = trace.positions();
        for w in states.windows(2) {
            assert_eq!(lookup(w[0]).unwrap().successor, Some(w[1]), "{t}");
        }
        assert_eq!(*states.last().unwrap(), PositionTuple::OPPOSITE);
    }
}

#[test]
fn combing_lines_by_example() {
    let g = model();
    let t = RelationTable::new(&g).unwrap();
    let pos = Positions::new(&t).unwrap();
    for (start, next) in [("0112", "1223"), ("0 1 1 3/2", "1 3/2 2 2")] {
        let m = partner(&pos, 0, tuple(start)).unwrap();
        let x = pos.free_points(0, m)[0];
        let c = pos.find_combing_line(0, m, x).unwrap();
        assert_eq!(c.k, 0, "{start}: K should be L itself");
        assert_eq!(c.local, PairRelation::Equal);
        for &l2 in &c.opposite_at_x {
            assert_eq!(pos.tuple_of(l2, m).unwrap(), tuple(next));
        }
    }
}

#[test]
fn combing_algorithm_examples() {
    let g = model();
    let t = RelationTable::new(&g).unwrap();
    let pos = Positions::new(&t).unwrap();
    let nl = g.line_count() as LineId;
    let opposite: Vec<LineId> = (0..nl).filter(|&m| pos.try_tuple(0, m) == Some(PositionTuple::OPPOSITE)).collect();

    // Opposite targets stay opposite.
    let mut ran = false;
    for w in opposite.chunks(3).take(50) {
        if let Ok(out) = pos.combing_algorithm_1(0, w) {
            assert!(w.iter().all(|&m| pos.tuple_of(out.line, m).unwrap() == PositionTuple::OPPOSITE));
            ran = true;
            break;
        }
    }
    assert!(ran);

    // A single target other than L drops exactly one level.
    for (tp, m) in realized(&pos) {
        let k = table_level(tp).unwrap();
        if k == 0 || m == 0 {
            continue;
        }
        let out = pos.combing_algorithm_1(0, &[m]).unwrap_or_else(|e| panic!("{tp}: {e}"));
        assert_eq!(pos.level(out.line, m).unwrap(), k - 1, "{tp}");
    }

    // Targets whose projection points cover L violate ALG1.
    let cover: Vec<LineId> = g
        .line_points(0)
        .iter()
        .map(|&p| {
            (0..nl)
                .find(|&m| pos.try_tuple(0, m) == Some(tuple("1223")) && pos.projection_point(0, m) == Some(p))
                .unwrap()
        })
        .collect();
    assert!(matches!(pos.combing_algorithm_1(0, &cover), Err(PositionError::Alg1Violation(0))));
    assert!(matches!(pos.combing_algorithm_1(0, &[0]), Err(PositionError::Alg1Violation(0))));

    // Combing back at an opposite target puts it at level 1.
    let mut ran = false;
    for w in opposite.chunks(2).take(200) {
        if let Ok(out) = pos.combing_algorithm_2(0, w, 0) {
            assert_eq!(pos.level(out.line, w[0]).unwrap(), 1);
            assert_eq!(pos.level(out.line, w[1]).unwrap(), 0);
            ran = true;
            break;
        }
    }
    assert!(ran);
}
