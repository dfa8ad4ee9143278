//! Immutable point-line geometries with collinearity bitsets.
//!
//! Points are dense ids `0..n`. Lines are sorted point lists; `line_index[p]`
//! lists the lines through `p` in increasing id order. The collinearity sets
//! include the diagonal, so `perp(x)` is the paper-style `x^⊥`.

use std::collections::{BTreeSet, VecDeque};
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::bitset::BitSet;

pub type PointId = u32;
pub type LineId = u32;

pub const UNREACHABLE: u8 = u8::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("point {0} out of range (n = {1})")]
    PointOutOfRange(u32, usize),
    #[error("line {0} has fewer than two points")]
    DegenerateLine(usize),
    #[error("line {0} repeats a point")]
    RepeatedPoint(usize),
    #[error("lines {0} and {1} share two points")]
    NotPartialLinear(usize, usize),
    #[error("geometry is not a gamma space")]
    NotGammaSpace,
    #[error("line {0} lies in no singular plane")]
    LineInNoPlane(usize),
    #[error("point {0} lies in no singular plane")]
    PointInNoPlane(u32),
    #[error("the span of line {0} and point {1} is not a projective plane")]
    BadPlane(usize, u32),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    /// Generalised n-gon, with the gonality.
    GeneralizedPolygon(u32),
    /// Polar space of the given rank.
    PolarSpace(u32),
    /// Line-Grassmannian of the geometry stored in [`Geometry::grassmannian`].
    Grassmannian,
    Other,
}

impl Kind {
    pub fn tag(&self) -> String {
        match self {
            Kind::GeneralizedPolygon(n) => format!("polygon-{n}"),
            Kind::PolarSpace(r) => format!("polar-{r}"),
            Kind::Grassmannian => "grassmannian".into(),
            Kind::Other => "other".into(),
        }
    }

    pub fn parse(tag: &str) -> Option<Kind> {
        if let Some(n) = tag.strip_prefix("polygon-") {
            return n.parse().ok().map(Kind::GeneralizedPolygon);
        }
        if let Some(r) = tag.strip_prefix("polar-") {
            return r.parse().ok().map(Kind::PolarSpace);
        }
        match tag {
            "grassmannian" => Some(Kind::Grassmannian),
            "other" => Some(Kind::Other),
            _ => None,
        }
    }
}

/// Vector representatives of the points, over GF(q).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coordinates {
    pub q: usize,
    pub vectors: Vec<Vec<u8>>,
}

/// Link between a line-Grassmannian and the geometry it came from.
#[derive(Debug, Clone)]
pub struct GrassmannInfo {
    pub parent: Arc<Geometry>,
    /// Parent planes, as sorted point lists.
    pub planes: Vec<Vec<PointId>>,
    /// For each Grassmannian line: the parent vertex and plane of its pencil.
    pub pencils: Vec<(PointId, u32)>,
}

#[derive(Debug)]
pub struct Geometry {
    name: String,
    kind: Kind,
    n: usize,
    lines: Vec<Vec<PointId>>,
    line_index: Vec<Vec<LineId>>,
    coll: Vec<BitSet>,
    line_sets: Vec<BitSet>,
    order: Option<(usize, usize)>,
    coords: Option<Coordinates>,
    grass: Option<GrassmannInfo>,
    dist: OnceLock<Vec<u8>>,
    planes: OnceLock<Result<Vec<Vec<PointId>>, GeometryError>>,
}

impl Clone for Geometry {
    fn clone(&self) -> Geometry {
        Geometry {
            name: self.name.clone(),
            kind: self.kind,
            n: self.n,
            lines: self.lines.clone(),
            line_index: self.line_index.clone(),
            coll: self.coll.clone(),
            line_sets: self.line_sets.clone(),
            order: self.order,
            coords: self.coords.clone(),
            grass: self.grass.clone(),
            dist: OnceLock::new(),
            planes: OnceLock::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub points: usize,
    pub lines: usize,
    /// Pairs of lines meeting in two or more points.
    pub partial_linearity_violations: Vec<(usize, usize)>,
    pub min_line_size: usize,
    pub max_line_size: usize,
    pub min_point_degree: usize,
    pub max_point_degree: usize,
    pub connected: bool,
    pub order: Option<(usize, usize)>,
    pub thick: bool,
}

impl ValidationReport {
    pub fn is_partial_linear(&self) -> bool {
        self.partial_linearity_violations.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        self.is_partial_linear() && self.connected && self.min_line_size >= 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularSubspace {
    pub points: Vec<PointId>,
    pub dimension: u32,
}

impl Geometry {
    /// Builds a geometry and checks ids, line sizes and partial linearity.
    /// Lines are sorted internally; the list of lines is sorted too.
    pub fn new(name: impl Into<String>, kind: Kind, n: usize, lines: Vec<Vec<PointId>>) -> Result<Geometry, GeometryError> {
        let lines = normalize_lines(n, lines)?;
        let g = Geometry::assemble(name.into(), kind, n, lines);
        if let Some((a, b)) = g.first_partial_linearity_violation() {
            return Err(GeometryError::NotPartialLinear(a, b));
        }
        Ok(g)
    }

    /// Builds without the partial-linearity check, keeping the line order;
    /// used to let [`Geometry::validate`] report on broken inputs.
    pub fn new_unchecked(name: impl Into<String>, kind: Kind, n: usize, lines: Vec<Vec<PointId>>) -> Geometry {
        let lines = lines
            .into_iter()
            .map(|mut l| {
                l.sort_unstable();
                l
            })
            .collect();
        Geometry::assemble(name.into(), kind, n, lines)
    }

    fn assemble(name: String, kind: Kind, n: usize, lines: Vec<Vec<PointId>>) -> Geometry {
        let mut line_index = vec![Vec::new(); n];
        let mut coll: Vec<BitSet> = (0..n).map(|i| BitSet::from_iter_with_len(n, [i])).collect();
        let mut line_sets = Vec::with_capacity(lines.len());
        for (li, l) in lines.iter().enumerate() {
            for &p in l {
                line_index[p as usize].push(li as LineId);
                for &r in l {
                    coll[p as usize].insert(r as usize);
                }
            }
            line_sets.push(BitSet::from_iter_with_len(n, l.iter().map(|&p| p as usize)));
        }
        let order = uniform_order(&lines, &line_index);
        Geometry {
            name,
            kind,
            n,
            lines,
            line_index,
            coll,
            line_sets,
            order,
            coords: None,
            grass: None,
            dist: OnceLock::new(),
            planes: OnceLock::new(),
        }
    }

    pub fn with_coordinates(mut self, coords: Coordinates) -> Geometry {
        assert_eq!(coords.vectors.len(), self.n);
        self.coords = Some(coords);
        self
    }

    pub fn with_kind(mut self, kind: Kind) -> Geometry {
        self.kind = kind;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Geometry {
        self.name = name.into();
        self
    }

    /// Attaches a parent geometry; the pencils are recovered from the lines.
    pub fn with_parent(mut self, parent: Arc<Geometry>) -> Result<Geometry, GeometryError> {
        if parent.line_count() != self.n {
            return Err(GeometryError::Invalid("parent line count does not match point count".into()));
        }
        let planes = parent.singular_planes()?.to_vec();
        let mut plane_of: std::collections::HashMap<Vec<PointId>, u32> = std::collections::HashMap::new();
        for (i, pl) in planes.iter().enumerate() {
            plane_of.insert(pl.clone(), i as u32);
        }
        let mut pencils = Vec::with_capacity(self.lines.len());
        for l in &self.lines {
            let (vertex, plane) = pencil_of(&parent, l)
                .ok_or_else(|| GeometryError::Invalid("Grassmannian line is not a planar pencil".into()))?;
            let id = *plane_of
                .get(&plane)
                .ok_or_else(|| GeometryError::Invalid("pencil spans no parent plane".into()))?;
            pencils.push((vertex, id));
        }
        self.kind = Kind::Grassmannian;
        self.grass = Some(GrassmannInfo { parent, planes, pencils });
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn point_count(&self) -> usize {
        self.n
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    pub fn lines(&self) -> &[Vec<PointId>] {
        &self.lines
    }

    pub fn line_points(&self, l: LineId) -> &[PointId] {
        &self.lines[l as usize]
    }

    pub fn line_set(&self, l: LineId) -> &BitSet {
        &self.line_sets[l as usize]
    }

    pub fn lines_through(&self, p: PointId) -> &[LineId] {
        &self.line_index[p as usize]
    }

    pub fn order(&self) -> Option<(usize, usize)> {
        self.order
    }

    pub fn coordinates(&self) -> Option<&Coordinates> {
        self.coords.as_ref()
    }

    pub fn grassmannian(&self) -> Option<&GrassmannInfo> {
        self.grass.as_ref()
    }

    pub fn parent(&self) -> Option<&Arc<Geometry>> {
        self.grass.as_ref().map(|g| &g.parent)
    }

    /// `x^⊥`, including `x` itself.
    #[inline]
    pub fn perp(&self, x: PointId) -> &BitSet {
        &self.coll[x as usize]
    }

    #[inline]
    pub fn collinear(&self, x: PointId, y: PointId) -> bool {
        self.coll[x as usize].contains(y as usize)
    }

    /// Strict perp of a set: points collinear to every member (members included).
    pub fn perp_of(&self, points: impl IntoIterator<Item = PointId>) -> BitSet {
        let mut s = BitSet::full(self.n);
        for p in points {
            s.intersect_with(&self.coll[p as usize]);
        }
        s
    }

    /// The unique line through two distinct points, if they are collinear.
    pub fn line(&self, a: PointId, b: PointId) -> Option<LineId> {
        if a == b {
            return None;
        }
        let (la, lb) = (&self.line_index[a as usize], &self.line_index[b as usize]);
        let (mut i, mut j) = (0, 0);
        while i < la.len() && j < lb.len() {
            match la[i].cmp(&lb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return Some(la[i]),
            }
        }
        None
    }

    /// Id of a line given by its (unsorted) point set.
    pub fn find_line(&self, points: &[PointId]) -> Option<LineId> {
        let (&a, &b) = (points.first()?, points.get(1)?);
        let l = self.line(a, b)?;
        let mut sorted = points.to_vec();
        sorted.sort_unstable();
        (self.lines[l as usize] == sorted).then_some(l)
    }

    fn first_partial_linearity_violation(&self) -> Option<(usize, usize)> {
        self.partial_linearity_violations(1).into_iter().next()
    }

    fn partial_linearity_violations(&self, limit: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut owner = vec![u32::MAX; self.lines.len()];
        for (a, l) in self.lines.iter().enumerate() {
            // For each other line through a point of `l`, count meets.
            for &p in l {
                for &m in &self.line_index[p as usize] {
                    let m = m as usize;
                    if m <= a {
                        continue;
                    }
                    if owner[m] == a as u32 {
                        if !out.contains(&(a, m)) {
                            out.push((a, m));
                            if out.len() >= limit {
                                return out;
                            }
                        }
                    } else {
                        owner[m] = a as u32;
                    }
                }
            }
            // Reset the markers so a later `a` cannot collide.
            for &p in l {
                for &m in &self.line_index[p as usize] {
                    owner[m as usize] = u32::MAX;
                }
            }
        }
        out
    }

    pub fn validate(&self) -> ValidationReport {
        let violations = self.partial_linearity_violations(usize::MAX);
        let line_sizes = self.lines.iter().map(|l| l.len());
        let degrees = self.line_index.iter().map(|l| l.len());
        let min_line_size = line_sizes.clone().min().unwrap_or(0);
        let min_point_degree = degrees.clone().min().unwrap_or(0);
        ValidationReport {
            points: self.n,
            lines: self.lines.len(),
            partial_linearity_violations: violations,
            min_line_size,
            max_line_size: line_sizes.max().unwrap_or(0),
            min_point_degree,
            max_point_degree: degrees.max().unwrap_or(0),
            connected: self.is_connected(),
            order: self.order,
            thick: min_line_size >= 3 && min_point_degree >= 3,
        }
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        self.bfs_point_graph(0).iter().all(|&d| d != UNREACHABLE)
    }

    fn bfs_point_graph(&self, src: PointId) -> Vec<u8> {
        let mut dist = vec![UNREACHABLE; self.n];
        dist[src as usize] = 0;
        let mut visited = BitSet::from_iter_with_len(self.n, [src as usize]);
        let mut frontier = vec![src];
        let mut d = 0u8;
        while !frontier.is_empty() {
            d += 1;
            let mut next = BitSet::new(self.n);
            for &v in &frontier {
                next.union_with(&self.coll[v as usize]);
            }
            next.difference_with(&visited);
            visited.union_with(&next);
            frontier = next.iter().map(|i| i as PointId).collect();
            for &v in &frontier {
                dist[v as usize] = d;
            }
        }
        dist
    }

    /// Full point-graph distance matrix, computed once on first use.
    pub fn distances(&self) -> &[u8] {
        self.dist.get_or_init(|| {
            let mut m = Vec::with_capacity(self.n * self.n);
            for x in 0..self.n {
                m.extend(self.bfs_point_graph(x as PointId));
            }
            m
        })
    }

    #[inline]
    pub fn distance_raw(&self, x: PointId, y: PointId) -> u8 {
        self.distances()[x as usize * self.n + y as usize]
    }

    pub fn point_distance(&self, x: PointId, y: PointId) -> Result<u32, GeometryError> {
        match self.distance_raw(x, y) {
            UNREACHABLE => Err(GeometryError::Disconnected),
            d => Ok(d as u32),
        }
    }

    pub fn point_graph_diameter(&self) -> Result<u32, GeometryError> {
        let d = self.distances();
        if d.contains(&UNREACHABLE) {
            return Err(GeometryError::Disconnected);
        }
        Ok(d.iter().copied().max().unwrap_or(0) as u32)
    }

    /// Girth and diameter of the bipartite incidence graph.
    pub fn incidence_girth_diameter(&self) -> Result<(u32, u32), GeometryError> {
        let n = self.n;
        let total = n + self.lines.len();
        let neighbours = |v: usize| -> Box<dyn Iterator<Item = usize> + '_> {
            if v < n {
                Box::new(self.line_index[v].iter().map(move |&l| n + l as usize))
            } else {
                Box::new(self.lines[v - n].iter().map(|&p| p as usize))
            }
        };
        let mut girth = u32::MAX;
        let mut diameter = 0u32;
        let mut dist = vec![u32::MAX; total];
        let mut parent = vec![usize::MAX; total];
        let mut queue = VecDeque::new();
        for root in 0..total {
            dist.iter_mut().for_each(|d| *d = u32::MAX);
            dist[root] = 0;
            queue.clear();
            queue.push_back(root);
            let mut seen = 1;
            while let Some(u) = queue.pop_front() {
                for v in neighbours(u) {
                    if dist[v] == u32::MAX {
                        dist[v] = dist[u] + 1;
                        parent[v] = u;
                        seen += 1;
                        queue.push_back(v);
                    } else if parent[u] != v {
                        girth = girth.min(dist[u] + dist[v] + 1);
                    }
                }
            }
            if seen < total {
                return Err(GeometryError::Disconnected);
            }
            diameter = diameter.max(dist.iter().copied().max().unwrap_or(0));
        }
        Ok((girth, diameter))
    }

    pub fn is_generalized_polygon(&self, gonality: u32) -> bool {
        let report = self.validate();
        report.thick
            && report.is_partial_linear()
            && matches!(self.incidence_girth_diameter(), Ok((g, d)) if g == 2 * gonality && d == gonality)
    }

    /// Calls `f(x, line, |x^⊥ ∩ line|)` for every point and line, stopping at the first `false`.
    fn all_perp_counts(&self, mut f: impl FnMut(usize, usize, usize) -> bool) -> bool {
        let mut counts = vec![0u32; self.n];
        for (li, l) in self.lines.iter().enumerate() {
            counts.iter_mut().for_each(|c| *c = 0);
            for &p in l {
                for x in self.coll[p as usize].iter() {
                    counts[x] += 1;
                }
            }
            for (x, &c) in counts.iter().enumerate() {
                if !f(x, li, c as usize) {
                    return false;
                }
            }
        }
        true
    }

    /// Every point is collinear to none, one, or all points of each line.
    pub fn is_gamma_space(&self) -> bool {
        self.all_perp_counts(|_, l, c| c <= 1 || c == self.lines[l].len())
    }

    /// Every point is collinear to exactly one or all points of each line.
    pub fn satisfies_one_or_all(&self) -> bool {
        self.all_perp_counts(|_, l, c| c == 1 || c == self.lines[l].len())
    }

    /// Smallest subspace containing `seed`: lines meeting it twice are absorbed.
    pub fn subspace_closure(&self, seed: &BitSet) -> BitSet {
        let mut s = seed.clone();
        let mut queue: Vec<PointId> = s.iter().map(|p| p as PointId).collect();
        while let Some(x) = queue.pop() {
            for &l in &self.line_index[x as usize] {
                let ls = &self.line_sets[l as usize];
                if ls.and_count(&s) >= 2 && !ls.is_subset(&s) {
                    for &p in &self.lines[l as usize] {
                        if s.insert(p as usize) {
                            queue.push(p);
                        }
                    }
                }
            }
        }
        s
    }

    /// All singular planes, as sorted point lists in lexicographic order.
    pub fn singular_planes(&self) -> Result<&[Vec<PointId>], GeometryError> {
        self.planes.get_or_init(|| self.compute_planes()).as_deref().map_err(Clone::clone)
    }

    fn compute_planes(&self) -> Result<Vec<Vec<PointId>>, GeometryError> {
        if !self.is_gamma_space() {
            return Err(GeometryError::NotGammaSpace);
        }
        let mut found: BTreeSet<Vec<PointId>> = BTreeSet::new();
        for (li, l) in self.lines.iter().enumerate() {
            let s = l.len() - 1;
            let mut candidates = self.perp_of(l.iter().copied());
            candidates.difference_with(&self.line_sets[li]);
            while let Some(p) = candidates.first() {
                let mut seed = self.line_sets[li].clone();
                seed.insert(p);
                let plane = self.subspace_closure(&seed);
                let pts: Vec<PointId> = plane.iter().map(|i| i as PointId).collect();
                let clique = pts.iter().all(|&a| plane.is_subset(&self.coll[a as usize]));
                if pts.len() != s * s + s + 1 || !clique {
                    return Err(GeometryError::BadPlane(li, p as PointId));
                }
                candidates.difference_with(&plane);
                found.insert(pts);
            }
        }
        Ok(found.into_iter().collect())
    }

    pub fn singular_subspaces_of_dim2(&self) -> Result<Vec<SingularSubspace>, GeometryError> {
        Ok(self
            .singular_planes()?
            .iter()
            .map(|p| SingularSubspace { points: p.clone(), dimension: 2 })
            .collect())
    }

    /// Points `z` on some geodesic between two members, iterated to a fixed point.
    pub fn geodesic_closure(&self, seed: &BitSet) -> BitSet {
        let mut s = seed.clone();
        loop {
            let grown = self.geodesic_step(&s);
            if grown == s {
                return s;
            }
            s = grown;
        }
    }

    fn geodesic_step(&self, s: &BitSet) -> BitSet {
        let d = self.distances();
        let n = self.n;
        let members: Vec<usize> = s.iter().collect();
        let mut out = s.clone();
        for (i, &x) in members.iter().enumerate() {
            for &y in &members[i + 1..] {
                let dxy = d[x * n + y];
                if dxy <= 1 || dxy == UNREACHABLE {
                    continue;
                }
                for z in 0..n {
                    let (a, b) = (d[x * n + z], d[z * n + y]);
                    if a != UNREACHABLE && b != UNREACHABLE && a as u32 + b as u32 == dxy as u32 {
                        out.insert(z);
                    }
                }
            }
        }
        out
    }

    /// Smallest convex subspace containing `seed`.
    pub fn convex_closure(&self, seed: &BitSet) -> BitSet {
        let mut s = seed.clone();
        loop {
            let grown = self.subspace_closure(&self.geodesic_step(&s));
            if grown == s {
                return s;
            }
            s = grown;
        }
    }

    /// The residue at `p`: lines through `p`, with the planar pencils at `p` as lines.
    pub fn point_residual(&self, p: PointId) -> Result<Geometry, GeometryError> {
        let planes = self.singular_planes()?;
        let through = &self.line_index[p as usize];
        let local = |l: LineId| through.binary_search(&l).unwrap() as PointId;
        let mut lines = Vec::new();
        for plane in planes.iter().filter(|pl| pl.binary_search(&p).is_ok()) {
            let pencil: Vec<PointId> = through
                .iter()
                .filter(|&&l| self.lines[l as usize].iter().all(|q| plane.binary_search(q).is_ok()))
                .map(|&l| local(l))
                .collect();
            lines.push(pencil);
        }
        if lines.is_empty() {
            return Err(GeometryError::PointInNoPlane(p));
        }
        let kind = match self.kind {
            Kind::PolarSpace(r) if r > 2 => Kind::PolarSpace(r - 1),
            _ => Kind::Other,
        };
        Geometry::new(format!("Res({})[{}]", p, self.name), kind, through.len(), lines)
    }

    /// Lines of the singular plane `plane` (sorted point list) through `p`.
    pub fn pencil(&self, p: PointId, plane: &[PointId]) -> Vec<LineId> {
        self.line_index[p as usize]
            .iter()
            .copied()
            .filter(|&l| self.lines[l as usize].iter().all(|q| plane.binary_search(q).is_ok()))
            .collect()
    }
}

/// Line-Grassmannian: points are the lines of `g`, lines its planar pencils.
pub fn line_grassmannian(g: &Arc<Geometry>) -> Result<Geometry, GeometryError> {
    let planes = g.singular_planes()?.to_vec();
    let mut in_plane = vec![false; g.line_count()];
    let mut pencils = Vec::new();
    for (pi, plane) in planes.iter().enumerate() {
        for &p in plane {
            let pencil = g.pencil(p, plane);
            for &l in &pencil {
                in_plane[l as usize] = true;
            }
            pencils.push((pencil, (p, pi as u32)));
        }
    }
    if let Some(l) = in_plane.iter().position(|&b| !b) {
        return Err(GeometryError::LineInNoPlane(l));
    }
    pencils.sort();
    let (lines, data): (Vec<Vec<PointId>>, Vec<(PointId, u32)>) = pencils.into_iter().unzip();
    let mut grass = Geometry::new(format!("Lines({})", g.name()), Kind::Grassmannian, g.line_count(), lines)?;
    grass.grass = Some(GrassmannInfo { parent: Arc::clone(g), planes, pencils: data });
    Ok(grass)
}

/// Vertex and plane (sorted point list) of a pencil given by parent line ids.
fn pencil_of(parent: &Geometry, pencil: &[PointId]) -> Option<(PointId, Vec<PointId>)> {
    let (&a, &b) = (pencil.first()?, pencil.get(1)?);
    let la = parent.line_set(a);
    let vertex = la.and(parent.line_set(b)).first()? as PointId;
    let mut plane = BitSet::new(parent.point_count());
    for &l in pencil {
        if !parent.line_set(l).contains(vertex as usize) {
            return None;
        }
        plane.union_with(parent.line_set(l));
    }
    Some((vertex, plane.iter().map(|i| i as PointId).collect()))
}

fn normalize_lines(n: usize, lines: Vec<Vec<PointId>>) -> Result<Vec<Vec<PointId>>, GeometryError> {
    let mut out = Vec::with_capacity(lines.len());
    for (i, mut l) in lines.into_iter().enumerate() {
        if let Some(&bad) = l.iter().find(|&&p| p as usize >= n) {
            return Err(GeometryError::PointOutOfRange(bad, n));
        }
        l.sort_unstable();
        if l.windows(2).any(|w| w[0] == w[1]) {
            return Err(GeometryError::RepeatedPoint(i));
        }
        if l.len() < 2 {
            return Err(GeometryError::DegenerateLine(i));
        }
        out.push(l);
    }
    out.sort();
    Ok(out)
}

fn uniform_order(lines: &[Vec<PointId>], line_index: &[Vec<LineId>]) -> Option<(usize, usize)> {
    let s = lines.first()?.len();
    let t = line_index.first()?.len();
    if s < 2 || t < 1 || lines.iter().any(|l| l.len() != s) || line_index.iter().any(|l| l.len() != t) {
        return None;
    }
    Some((s - 1, t - 1))
}
