//! Conforming triangulations of axis-aligned rectangles.
//!
//! Nodes of a structured mesh are ordered lexicographically by `(y, x)` and every
//! grid cell is split along its lower-left to upper-right diagonal. Meshes produced
//! by adaptation reuse the same [`TriMesh`] type with arbitrary node order.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Side of the bounding rectangle an edge or node lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
            Side::Bottom => 2,
            Side::Top => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Bottom => "bottom",
            Side::Top => "top",
        }
    }

    pub fn parse(s: &str) -> Option<Side> {
        Side::ALL.into_iter().find(|side| side.name() == s)
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Rect {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        if !(xmax > xmin && ymax > ymin) || ![xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid(format!(
                "rectangle [{xmin}, {xmax}] x [{ymin}, {ymax}] has non-positive extent"
            )));
        }
        Ok(Rect { xmin, xmax, ymin, ymax })
    }

    pub fn area(&self) -> f64 {
        (self.xmax - self.xmin) * (self.ymax - self.ymin)
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    fn tolerance(&self) -> f64 {
        1e-12 * self.width().max(self.height()).max(1.0)
    }

    /// Sides the point lies on (up to roundoff).
    pub fn sides_of(&self, p: Point) -> impl Iterator<Item = Side> {
        let tol = self.tolerance();
        let flags = [
            (p[0] - self.xmin).abs() <= tol,
            (p[0] - self.xmax).abs() <= tol,
            (p[1] - self.ymin).abs() <= tol,
            (p[1] - self.ymax).abs() <= tol,
        ];
        Side::ALL.into_iter().filter(move |s| flags[s.index()])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub side: Side,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PeriodicDirections {
    X,
    Y,
    Both,
}

impl PeriodicDirections {
    pub fn has_x(self) -> bool {
        matches!(self, PeriodicDirections::X | PeriodicDirections::Both)
    }

    pub fn has_y(self) -> bool {
        matches!(self, PeriodicDirections::Y | PeriodicDirections::Both)
    }
}

/// Identification of slave nodes with master nodes on the opposite side.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicMap {
    pub directions: PeriodicDirections,
    /// `master[i] == i` for nodes that are not slaves.
    pub master: Vec<usize>,
}

impl PeriodicMap {
    pub fn is_slave(&self, node: usize) -> bool {
        self.master[node] != node
    }

    pub fn slave_count(&self) -> usize {
        self.master.iter().enumerate().filter(|(i, m)| *i != **m).count()
    }
}

/// Area and constant barycentric gradients of one P1 triangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementGeometry {
    pub area: f64,
    pub grad_lambda: [[f64; 2]; 3],
}

impl ElementGeometry {
    /// Signed area must be strictly positive (counterclockwise vertices).
    pub fn from_vertices(p: [Point; 3]) -> Option<Self> {
        let [p0, p1, p2] = p;
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        if !(det > 0.0) {
            return None;
        }
        let inv = 1.0 / det;
        Some(ElementGeometry {
            area: 0.5 * det,
            grad_lambda: [
                [(p1[1] - p2[1]) * inv, (p2[0] - p1[0]) * inv],
                [(p2[1] - p0[1]) * inv, (p0[0] - p2[0]) * inv],
                [(p0[1] - p1[1]) * inv, (p1[0] - p0[0]) * inv],
            ],
        })
    }

    /// Gradient of the P1 function with the given vertex values.
    #[inline]
    pub fn gradient(&self, values: [f64; 3]) -> [f64; 2] {
        let g = &self.grad_lambda;
        [
            values[0] * g[0][0] + values[1] * g[1][0] + values[2] * g[2][0],
            values[0] * g[0][1] + values[1] * g[1][1] + values[2] * g[2][1],
        ]
    }
}

fn signed_area(p: [Point; 3]) -> f64 {
    let [p0, p1, p2] = p;
    0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
}

#[derive(Clone, Debug)]
pub struct TriMesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    bounds: Rect,
    geometry: Vec<ElementGeometry>,
    periodic: Option<PeriodicMap>,
}

impl TriMesh {
    /// Validates triangle orientation and caches element geometry.
    pub fn new(
        nodes: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        bounds: Rect,
    ) -> Result<Self> {
        let mut geometry = Vec::with_capacity(triangles.len());
        for (index, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&n| n >= nodes.len()) {
                return Err(Error::invalid(format!("triangle {index} references a missing node")));
            }
            let p = [nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]];
            let geom = ElementGeometry::from_vertices(p).ok_or(Error::Geometry {
                index,
                area: signed_area(p),
            })?;
            geometry.push(geom);
        }
        Ok(TriMesh {
            nodes,
            triangles,
            boundary_edges,
            bounds,
            geometry,
            periodic: None,
        })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Point {
        self.nodes[i]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn periodic_map(&self) -> Option<&PeriodicMap> {
        self.periodic.as_ref()
    }

    pub fn element_geometry(&self, t: usize) -> &ElementGeometry {
        &self.geometry[t]
    }

    pub fn geometries(&self) -> &[ElementGeometry] {
        &self.geometry
    }

    pub fn vertices(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn total_area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }

    /// Longest edge of triangle `t`.
    pub fn diameter(&self, t: usize) -> f64 {
        let p = self.vertices(t);
        (0..3)
            .map(|k| dist(p[k], p[(k + 1) % 3]))
            .fold(0.0, f64::max)
    }

    /// Unique undirected edges as `(min, max)` node pairs, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| ordered(t[k], t[(k + 1) % 3])))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// Number of triangles sharing each edge.
    pub fn edge_multiplicity(&self) -> BTreeMap<(usize, usize), usize> {
        let mut counts = BTreeMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                *counts.entry(ordered(t[k], t[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Per-node bit set of the sides the node touches, taken from the boundary edges.
    pub fn node_sides(&self) -> Vec<[bool; 4]> {
        let mut sides = vec![[false; 4]; self.nodes.len()];
        for e in &self.boundary_edges {
            sides[e.a][e.side.index()] = true;
            sides[e.b][e.side.index()] = true;
        }
        sides
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edges()
            .into_iter()
            .map(|(a, b)| dist(self.nodes[a], self.nodes[b]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Copy of the mesh with a periodic identification attached.
    pub fn with_periodic(mut self, map: PeriodicMap) -> Self {
        self.periodic = Some(map);
        self
    }
}

pub(crate) fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Uniform `nx` by `ny` grid of the rectangle, two triangles per cell.
pub fn build_rect_mesh(xmin: f64, xmax: f64, ymin: f64, ymax: f64, nx: usize, ny: usize) -> Result<TriMesh> {
    let bounds = Rect::new(xmin, xmax, ymin, ymax)?;
    if nx == 0 || ny == 0 {
        return Err(Error::invalid(format!("subdivision counts must be positive, got {nx} x {ny}")));
    }
    let hx = bounds.width() / nx as f64;
    let hy = bounds.height() / ny as f64;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let y = if j == ny { ymax } else { ymin + j as f64 * hy };
        for i in 0..=nx {
            let x = if i == nx { xmax } else { xmin + i as f64 * hx };
            nodes.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (p00, p10, p01, p11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            triangles.push([p00, p10, p11]);
            triangles.push([p00, p11, p01]);
        }
    }
    let mut boundary_edges = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        boundary_edges.push(BoundaryEdge { a: id(i, 0), b: id(i + 1, 0), side: Side::Bottom });
        boundary_edges.push(BoundaryEdge { a: id(i + 1, ny), b: id(i, ny), side: Side::Top });
    }
    for j in 0..ny {
        boundary_edges.push(BoundaryEdge { a: id(0, j + 1), b: id(0, j), side: Side::Left });
        boundary_edges.push(BoundaryEdge { a: id(nx, j), b: id(nx, j + 1), side: Side::Right });
    }
    TriMesh::new(nodes, triangles, boundary_edges, bounds)
}

/// Pairs nodes on opposite sides of the rectangle.
///
/// Right-side nodes map to left-side nodes, top to bottom; all four corners end
/// up on the lower-left corner when both directions are periodic.
pub fn build_periodic_map(mesh: TriMesh, directions: PeriodicDirections) -> Result<TriMesh> {
    let bounds = mesh.bounds();
    let tol = 1e-12 * bounds.width().max(bounds.height()).max(1.0);
    let sides = mesh.node_sides();
    let on = |side: Side| -> Vec<usize> {
        (0..mesh.num_nodes()).filter(|&i| sides[i][side.index()]).collect()
    };
    let mut master: Vec<usize> = (0..mesh.num_nodes()).collect();

    let mut pair = |from: Side, to: Side, coord: usize| -> Result<()> {
        let mut targets = on(to);
        let mut sources = on(from);
        if targets.len() != sources.len() {
            return Err(Error::Periodicity(format!(
                "{} side has {} nodes but {} side has {}",
                from,
                sources.len(),
                to,
                targets.len()
            )));
        }
        let key = |n: &usize| mesh.node(*n)[coord];
        targets.sort_by(|a, b| key(a).total_cmp(&key(b)));
        sources.sort_by(|a, b| key(a).total_cmp(&key(b)));
        for (s, t) in sources.into_iter().zip(targets) {
            if (key(&s) - key(&t)).abs() > tol {
                return Err(Error::Periodicity(format!(
                    "node {s} on {from} side at {} has no partner on {to} side (nearest {})",
                    key(&s),
                    key(&t)
                )));
            }
            master[s] = t;
        }
        Ok(())
    };

    if directions.has_x() {
        pair(Side::Right, Side::Left, 1)?;
    }
    if directions.has_y() {
        pair(Side::Top, Side::Bottom, 0)?;
    }
    // resolve chains such as top-right -> bottom-right -> bottom-left
    for i in 0..master.len() {
        let mut m = master[i];
        while master[m] != m {
            m = master[m];
        }
        master[i] = m;
    }
    Ok(mesh.with_periodic(PeriodicMap { directions, master }))
}

/// Bucket grid over triangle bounding boxes for point location.
pub struct PointLocator<'a> {
    mesh: &'a TriMesh,
    origin: Point,
    cell: [f64; 2],
    dims: [usize; 2],
    buckets: Vec<Vec<u32>>,
}

/// Triangle containing a point together with its barycentric coordinates.
#[derive(Clone, Copy, Debug)]
pub struct Location {
    pub triangle: usize,
    pub bary: [f64; 3],
}

impl<'a> PointLocator<'a> {
    pub fn new(mesh: &'a TriMesh) -> Self {
        let b = mesh.bounds();
        let n = (mesh.num_triangles() as f64 / 2.0).sqrt().ceil().max(1.0) as usize;
        let dims = [n, n];
        let cell = [b.width() / n as f64, b.height() / n as f64];
        let mut buckets = vec![Vec::new(); n * n];
        for t in 0..mesh.num_triangles() {
            let p = mesh.vertices(t);
            let lo = [
                p.iter().map(|q| q[0]).fold(f64::INFINITY, f64::min),
                p.iter().map(|q| q[1]).fold(f64::INFINITY, f64::min),
            ];
            let hi = [
                p.iter().map(|q| q[0]).fold(f64::NEG_INFINITY, f64::max),
                p.iter().map(|q| q[1]).fold(f64::NEG_INFINITY, f64::max),
            ];
            let (i0, j0) = bucket_of([b.xmin, b.ymin], cell, dims, lo);
            let (i1, j1) = bucket_of([b.xmin, b.ymin], cell, dims, hi);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * n + i].push(t as u32);
                }
            }
        }
        PointLocator {
            mesh,
            origin: [b.xmin, b.ymin],
            cell,
            dims,
            buckets,
        }
    }

    /// Locates `p`; points outside the mesh are clamped to the closest element.
    pub fn locate(&self, p: Point) -> Location {
        let (i, j) = bucket_of(self.origin, self.cell, self.dims, p);
        let mut best = None::<Location>;
        let mut best_score = f64::NEG_INFINITY;
        let mut ring = 0usize;
        loop {
            let i0 = i.saturating_sub(ring);
            let j0 = j.saturating_sub(ring);
            let i1 = (i + ring).min(self.dims[0] - 1);
            let j1 = (j + ring).min(self.dims[1] - 1);
            for jj in j0..=j1 {
                for ii in i0..=i1 {
                    if ring > 0 && ii > i0 && ii < i1 && jj > j0 && jj < j1 {
                        continue;
                    }
                    for &t in &self.buckets[jj * self.dims[0] + ii] {
                        let bary = barycentric(self.mesh, t as usize, p);
                        let score = bary.iter().copied().fold(f64::INFINITY, f64::min);
                        if score > best_score {
                            best_score = score;
                            best = Some(Location { triangle: t as usize, bary });
                        }
                    }
                }
            }
            let exhausted = i0 == 0 && j0 == 0 && i1 == self.dims[0] - 1 && j1 == self.dims[1] - 1;
            if best_score >= -1e-10 || exhausted || (best.is_some() && ring >= 1) {
                break;
            }
            ring += 1;
        }
        let mut loc = best.expect("mesh has at least one triangle");
        if best_score < 0.0 {
            for w in loc.bary.iter_mut() {
                *w = w.max(0.0);
            }
            let s: f64 = loc.bary.iter().sum();
            for w in loc.bary.iter_mut() {
                *w /= s;
            }
        }
        loc
    }

    pub fn evaluate(&self, field: &[f64], p: Point) -> f64 {
        let loc = self.locate(p);
        let tri = self.mesh.triangles()[loc.triangle];
        (0..3).map(|k| loc.bary[k] * field[tri[k]]).sum()
    }
}

fn bucket_of(origin: Point, cell: [f64; 2], dims: [usize; 2], p: Point) -> (usize, usize) {
    let fi = ((p[0] - origin[0]) / cell[0]).floor();
    let fj = ((p[1] - origin[1]) / cell[1]).floor();
    let clamp = |f: f64, n: usize| -> usize {
        if f.is_nan() || f < 0.0 {
            0
        } else {
            (f as usize).min(n - 1)
        }
    };
    (clamp(fi, dims[0]), clamp(fj, dims[1]))
}

pub fn barycentric(mesh: &TriMesh, t: usize, p: Point) -> [f64; 3] {
    let [p0, p1, p2] = mesh.vertices(t);
    let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    let l1 = ((p[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p[1] - p0[1])) / det;
    let l2 = ((p1[0] - p0[0]) * (p[1] - p0[1]) - (p[0] - p0[0]) * (p1[1] - p0[1])) / det;
    [1.0 - l1 - l2, l1, l2]
}
