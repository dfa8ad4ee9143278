//! JSON interchange format for geometries.
//!
//! `{"name", "kind", "order": [s,t] | null, "points", "lines"}` with 0-based
//! point ids and each line sorted ascending. Grassmannians carry their parent
//! under `"parent"`, and coordinatized models their vectors under
//! `"coordinates"`; both are optional.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::{Coordinates, Geometry, GeometryError, Kind, PointId};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown kind tag {0:?}")]
    Kind(String),
    #[error("line {0} appears twice")]
    DuplicateLine(usize),
    #[error("declared order {declared:?} differs from computed {computed:?}")]
    Order { declared: Option<(usize, usize)>, computed: Option<(usize, usize)> },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoordinatesFile {
    pub q: usize,
    pub vectors: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometryFile {
    pub name: String,
    pub kind: String,
    pub order: Option<(usize, usize)>,
    pub points: usize,
    pub lines: Vec<Vec<PointId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<CoordinatesFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<Box<GeometryFile>>,
}

impl GeometryFile {
    pub fn from_geometry(g: &Geometry) -> GeometryFile {
        GeometryFile {
            name: g.name().to_string(),
            kind: g.kind().tag(),
            order: g.order(),
            points: g.point_count(),
            lines: g.lines().to_vec(),
            coordinates: g.coordinates().map(|c| CoordinatesFile { q: c.q, vectors: c.vectors.clone() }),
            parent: g.parent().map(|p| Box::new(GeometryFile::from_geometry(p))),
        }
    }

    /// Builds the geometry; normalization steps are returned as warnings.
    pub fn into_geometry(self) -> Result<(Geometry, Vec<String>), IoError> {
        let mut warnings = Vec::new();
        let kind = Kind::parse(&self.kind).ok_or_else(|| IoError::Kind(self.kind.clone()))?;
        let mut seen = HashSet::new();
        let mut lines = Vec::with_capacity(self.lines.len());
        let mut unsorted = 0;
        for (i, mut l) in self.lines.into_iter().enumerate() {
            if l.windows(2).any(|w| w[0] > w[1]) {
                unsorted += 1;
                l.sort_unstable();
            }
            if !seen.insert(l.clone()) {
                return Err(IoError::DuplicateLine(i));
            }
            lines.push(l);
        }
        if unsorted > 0 {
            warnings.push(format!("sorted the points of {unsorted} line(s)"));
        }
        if lines.windows(2).any(|w| w[0] > w[1]) {
            warnings.push("sorted the line list".to_string());
        }
        let mut g = Geometry::new(self.name, kind, self.points, lines)?;
        match self.order {
            Some(_) if self.order != g.order() => {
                return Err(IoError::Order { declared: self.order, computed: g.order() });
            }
            None if g.order().is_some() => warnings.push("filled in the computed order".to_string()),
            _ => {}
        }
        if let Some(c) = self.coordinates {
            if c.vectors.len() != g.point_count() {
                return Err(IoError::Invalid("coordinate count does not match point count".into()));
            }
            g = g.with_coordinates(Coordinates { q: c.q, vectors: c.vectors });
        }
        if let Some(p) = self.parent {
            let (parent, w) = p.into_geometry()?;
            warnings.extend(w.into_iter().map(|w| format!("parent: {w}")));
            g = g.with_parent(Arc::new(parent))?;
        } else if kind == Kind::Grassmannian {
            warnings.push("Grassmannian without parent; opposition is unavailable".to_string());
        }
        for w in &warnings {
            log::warn!("{w}");
        }
        Ok((g, warnings))
    }
}

/// Canonical serialization: compact JSON with a trailing newline.
pub fn export_geometry(g: &Geometry) -> String {
    let mut s = serde_json::to_string(&GeometryFile::from_geometry(g)).expect("geometry serializes");
    s.push('\n');
    s
}

pub fn import_geometry(json: &str) -> Result<(Geometry, Vec<String>), IoError> {
    let file: GeometryFile = serde_json::from_str(json)?;
    file.into_geometry()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub points: usize,
    pub lines: usize,
    pub sha256: String,
}

/// Counts plus the SHA-256 of the canonical serialization.
pub fn fingerprint(g: &Geometry) -> Fingerprint {
    let digest = Sha256::digest(export_geometry(g).as_bytes());
    Fingerprint { points: g.point_count(), lines: g.line_count(), sha256: hex::encode(digest) }
}
