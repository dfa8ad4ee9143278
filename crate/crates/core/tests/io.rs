use std::sync::Arc;

use hexgeom::construct::{hermitian, split_cayley_hexagon, symplectic};
use hexgeom::geometry::line_grassmannian;
use hexgeom::io::*;
use hexgeom::relations::{OppositionSets, RelationTable};

#[test]
fn hexagon_round_trip_is_byte_identical() {
    let h = split_cayley_hexagon(2).unwrap();
    let s = export_geometry(&h);
    let (back, warnings) = import_geometry(&s).unwrap();
    assert!(warnings.is_empty());
    assert_eq!(export_geometry(&back), s);
    assert_eq!(back.lines(), h.lines());
    assert_eq!(back.order(), Some((2, 2)));
    assert_eq!(fingerprint(&h), fingerprint(&back));
    assert_eq!(fingerprint(&h), fingerprint(&split_cayley_hexagon(2).unwrap()));
    assert_ne!(fingerprint(&h).sha256, fingerprint(&split_cayley_hexagon(3).unwrap()).sha256);
    assert_eq!(fingerprint(&h).sha256.len(), 64);
}

#[test]
fn grassmannian_keeps_its_parent() {
    let g = line_grassmannian(&Arc::new(symplectic(5, 2).unwrap())).unwrap();
    let (back, warnings) = import_geometry(&export_geometry(&g)).unwrap();
    assert!(warnings.is_empty(), "{warnings:?}");
    assert_eq!(back.parent().unwrap().point_count(), 63);
    // Opposition needs the parent, so it survives the round trip too.
    let a = RelationTable::new(&g).unwrap().census();
    let b = RelationTable::new(&back).unwrap().census();
    assert_eq!(a, b);
    let stripped = export_geometry(&g).replacen(",\"parent\":", ",\"_parent\":", 1);
    let (orphan, warnings) = import_geometry(&stripped).unwrap();
    assert!(warnings.iter().any(|w| w.contains("without parent")));
    assert!(OppositionSets::new(&orphan).is_err());
}

#[test]
fn coordinates_survive() {
    let h = hermitian(3, 4).unwrap();
    let (back, _) = import_geometry(&export_geometry(&h)).unwrap();
    assert_eq!(back.coordinates().unwrap().vectors, h.coordinates().unwrap().vectors);
}

#[test]
fn malformed_inputs() {
    let dup = r#"{"name":"x","kind":"other","order":null,"points":4,"lines":[[0,1],[2,3],[1,0]]}"#;
    assert!(matches!(import_geometry(dup), Err(IoError::DuplicateLine(2))));
    let unsorted = r#"{"name":"x","kind":"other","order":null,"points":3,"lines":[[2,1,0]]}"#;
    let (g, warnings) = import_geometry(unsorted).unwrap();
    assert_eq!(g.lines(), &[vec![0, 1, 2]]);
    assert!(warnings.iter().any(|w| w.contains("points of 1 line")), "{warnings:?}");
    let kind = r#"{"name":"x","kind":"blob","order":null,"points":3,"lines":[[0,1,2]]}"#;
    assert!(matches!(import_geometry(kind), Err(IoError::Kind(_))));
    let range = r#"{"name":"x","kind":"other","order":null,"points":2,"lines":[[0,1,2]]}"#;
    assert!(matches!(import_geometry(range), Err(IoError::Geometry(_))));
    let order = export_geometry(&symplectic(3, 2).unwrap()).replace("\"order\":[2,2]", "\"order\":[2,3]");
    assert!(matches!(import_geometry(&order), Err(IoError::Order { .. })));
    let filled = export_geometry(&symplectic(3, 2).unwrap()).replace("\"order\":[2,2]", "\"order\":null");
    let (g, warnings) = import_geometry(&filled).unwrap();
    assert_eq!(g.order(), Some((2, 2)));
    assert!(warnings.iter().any(|w| w.contains("order")));
}
