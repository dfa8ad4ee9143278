use hexgeom::feasibility::*;

/// Both multiplicities in machine integers; `None` unless `st` is a square.
fn oracle(s: u128, t: u128) -> Option<(bool, bool)> {
    let st = s * t;
    let r = (st as f64).sqrt().round() as u128;
    if r * r != st {
        return None;
    }
    let a = 1 + s + t + st;
    let plus = (st * a * (1 + r + st)) % (2 * (s + t + r)) == 0;
    let minus = (st * a * (1 + st - r)) % (2 * (s + t - r)) == 0;
    Some((plus, minus))
}

#[test]
fn examples() {
    assert!(feasible_hexagon_order(HexOrder::new(2, 2)));
    assert!(feasible_hexagon_order(HexOrder::new(1, 1)));
    assert!(!st_square_check(HexOrder::new(2, 3)));
    assert!(!feasible_hexagon_order(HexOrder::new(2, 3)));
    // 240 = 15 + 15², st = 60².
    assert_eq!(multiplicity_integrality(HexOrder::new(240, 15)), Ok((true, false)));
    let c = check_order(HexOrder::new(6, 2));
    assert_eq!((c.st_square, c.plus_integral, c.failed), (false, None, Some(Condition::StSquare)));
}

#[test]
fn agrees_with_machine_arithmetic() {
    for s in 1..=120u64 {
        for t in 1..=120u64 {
            let o = HexOrder::new(s, t);
            match oracle(s as u128, t as u128) {
                None => assert!(!st_square_check(o) && multiplicity_integrality(o).is_err()),
                Some(pm) => {
                    assert_eq!(multiplicity_integrality(o), Ok(pm), "({s},{t})");
                    assert_eq!(feasible_hexagon_order(o), pm == (true, true));
                }
            }
        }
    }
}

#[test]
fn square_cases_up_to_ten_thousand() {
    // st = t²(t+1) is a square exactly when t + 1 is.
    let mut seen = 0;
    for m in 2u64.. {
        let t = m * m - 1;
        if t > 10_000 {
            break;
        }
        let o = HexOrder::new(t + t * t, t);
        assert!(st_square_check(o));
        assert!(!feasible_hexagon_order(o), "t={t}");
        assert_eq!(oracle((t + t * t) as u128, t as u128).map(|pm| pm == (true, true)), Some(false));
        seen += 1;
    }
    assert_eq!(seen, 99);
}

#[test]
fn nonex_report() {
    let r = verify_nonex(1000);
    assert_eq!(r.checks.len(), 999);
    assert!(r.all_excluded());
    let squares: Vec<u64> = r.checks.iter().filter(|c| c.st_square).map(|c| c.t).collect();
    assert_eq!(squares, (2..=31).map(|m| m * m - 1).filter(|&t| t <= 1000).collect::<Vec<_>>());
    assert!(r.checks.iter().all(|c| !c.feasible && c.failed.is_some()));
}
