//! Finite incidence geometry: small Lie incidence geometries over GF(q), the
//! opposition relation on their points, mutual positions of line pairs, and
//! exhaustive searches for blocking sets and geometric lines.

pub mod bitset;
pub mod construct;
pub mod feasibility;
pub mod field;
pub mod geometry;
pub mod io;
pub mod positions;
pub mod recipes;
pub mod relations;
pub mod search;

pub use bitset::BitSet;
pub use geometry::{Geometry, GeometryError, Kind, LineId, PointId};
