//! Newest-vertex bisection hierarchy over a rectangle.
//!
//! Each element stores its vertices as `(v0, v1, v2)` where `v0` is the newest
//! vertex and `v1 v2` is the refinement edge. Bisection inserts the midpoint `m`
//! of the refinement edge and creates `(m, v0, v1)` and `(m, v2, v0)`.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::mesh::{dist, ordered, BoundaryEdge, Point, Rect, Side, TriMesh};

#[derive(Clone, Debug)]
struct Elem {
    v: [usize; 3],
    parent: Option<usize>,
    children: Option<[usize; 2]>,
    alive: bool,
}

type Edge = (usize, usize);

/// Leaf counts touched by one adaptation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AdaptStats {
    pub refined: usize,
    pub coarsened: usize,
    pub saturated: bool,
}

#[derive(Clone, Debug)]
pub struct AdaptiveMesh {
    bounds: Rect,
    points: Vec<Point>,
    vertex_alive: Vec<bool>,
    free_vertices: Vec<usize>,
    elems: Vec<Elem>,
    free_elems: Vec<usize>,
    edge_mid: HashMap<Edge, usize>,
    /// Midpoint vertex -> elements bisected through it.
    splits: BTreeMap<usize, Vec<usize>>,
    edge_leaves: HashMap<Edge, Vec<usize>>,
    n_vertices: usize,
    /// Arena element of each triangle of the last compacted mesh.
    leaf_of_triangle: Vec<usize>,
    /// Arena vertex of each node of the last compacted mesh.
    vertex_of_node: Vec<usize>,
}

fn edges_of(v: [usize; 3]) -> [Edge; 3] {
    [ordered(v[0], v[1]), ordered(v[1], v[2]), ordered(v[2], v[0])]
}

impl AdaptiveMesh {
    /// Builds the hierarchy on a conforming mesh, marking the longest edge of
    /// every triangle for refinement.
    pub fn new(mesh: &TriMesh) -> Result<Self> {
        if mesh.periodic_map().is_some() {
            return Err(Error::Unsupported("mesh adaptation on periodic meshes".into()));
        }
        let n = mesh.num_nodes();
        let mut am = AdaptiveMesh {
            bounds: mesh.bounds(),
            points: mesh.nodes().to_vec(),
            vertex_alive: vec![true; n],
            free_vertices: Vec::new(),
            elems: Vec::with_capacity(mesh.num_triangles()),
            free_elems: Vec::new(),
            edge_mid: HashMap::new(),
            splits: BTreeMap::new(),
            edge_leaves: HashMap::new(),
            n_vertices: n,
            leaf_of_triangle: Vec::new(),
            vertex_of_node: Vec::new(),
        };
        for (t, &tri) in mesh.triangles().iter().enumerate() {
            let p = mesh.vertices(t);
            let lens = [dist(p[1], p[2]), dist(p[2], p[0]), dist(p[0], p[1])];
            // rotate so the longest edge is opposite v0; first maximum wins ties
            let mut k = 0;
            for i in 1..3 {
                if lens[i] > lens[k] * (1.0 + 1e-12) {
                    k = i;
                }
            }
            let v = [tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]];
            let id = am.alloc_elem(Elem {
                v,
                parent: None,
                children: None,
                alive: true,
            });
            am.link_leaf(id);
        }
        am.compact()?;
        Ok(am)
    }

    pub fn num_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn num_leaves(&self) -> usize {
        self.leaf_of_triangle.len()
    }

    pub fn leaf_of_triangle(&self) -> &[usize] {
        &self.leaf_of_triangle
    }

    pub fn vertex_of_node(&self) -> &[usize] {
        &self.vertex_of_node
    }

    /// Length of the refinement edge of an arena element.
    pub fn refinement_edge_length(&self, e: usize) -> f64 {
        let v = self.elems[e].v;
        dist(self.points[v[1]], self.points[v[2]])
    }

    /// Bisection depth below the base mesh.
    pub fn level(&self, mut e: usize) -> usize {
        let mut l = 0;
        while let Some(p) = self.elems[e].parent {
            e = p;
            l += 1;
        }
        l
    }

    fn alloc_elem(&mut self, el: Elem) -> usize {
        match self.free_elems.pop() {
            Some(i) => {
                self.elems[i] = el;
                i
            }
            None => {
                self.elems.push(el);
                self.elems.len() - 1
            }
        }
    }

    fn alloc_vertex(&mut self, p: Point) -> usize {
        self.n_vertices += 1;
        match self.free_vertices.pop() {
            Some(i) => {
                self.points[i] = p;
                self.vertex_alive[i] = true;
                i
            }
            None => {
                self.points.push(p);
                self.vertex_alive.push(true);
                self.points.len() - 1
            }
        }
    }

    fn link_leaf(&mut self, e: usize) {
        for edge in edges_of(self.elems[e].v) {
            self.edge_leaves.entry(edge).or_default().push(e);
        }
    }

    fn unlink_leaf(&mut self, e: usize) {
        for edge in edges_of(self.elems[e].v) {
            if let Some(list) = self.edge_leaves.get_mut(&edge) {
                list.retain(|&x| x != e);
                if list.is_empty() {
                    self.edge_leaves.remove(&edge);
                }
            }
        }
    }

    fn is_leaf(&self, e: usize) -> bool {
        self.elems[e].alive && self.elems[e].children.is_none()
    }

    fn ref_edge(&self, e: usize) -> Edge {
        let v = self.elems[e].v;
        ordered(v[1], v[2])
    }

    fn neighbor(&self, e: usize, edge: Edge) -> Option<usize> {
        self.edge_leaves
            .get(&edge)
            .and_then(|list| list.iter().copied().find(|&x| x != e))
    }

    fn bisect(&mut self, e: usize) {
        let [v0, v1, v2] = self.elems[e].v;
        let key = ordered(v1, v2);
        let m = match self.edge_mid.get(&key) {
            Some(&m) => m,
            None => {
                let (a, b) = (self.points[v1], self.points[v2]);
                let m = self.alloc_vertex([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
                self.edge_mid.insert(key, m);
                m
            }
        };
        self.unlink_leaf(e);
        let c0 = self.alloc_elem(Elem {
            v: [m, v0, v1],
            parent: Some(e),
            children: None,
            alive: true,
        });
        let c1 = self.alloc_elem(Elem {
            v: [m, v2, v0],
            parent: Some(e),
            children: None,
            alive: true,
        });
        self.elems[e].children = Some([c0, c1]);
        self.link_leaf(c0);
        self.link_leaf(c1);
        self.splits.entry(m).or_default().push(e);
    }

    /// Vertices that refining leaf `e` with conforming closure would create.
    pub fn closure_cost(&self, e: usize) -> usize {
        let edge = self.ref_edge(e);
        match self.neighbor(e, edge) {
            Some(n) if self.ref_edge(n) != edge => 1 + self.closure_cost(n),
            _ => 1,
        }
    }

    /// Bisects leaf `e` and whatever is needed to keep the mesh conforming.
    pub fn refine(&mut self, e: usize) {
        if !self.is_leaf(e) {
            return;
        }
        let edge = self.ref_edge(e);
        loop {
            match self.neighbor(e, edge) {
                None => {
                    self.bisect(e);
                    return;
                }
                Some(n) if self.ref_edge(n) == edge => {
                    self.bisect(e);
                    self.bisect(n);
                    return;
                }
                Some(n) => self.refine(n),
            }
        }
    }

    /// Midpoint vertices whose removal would restore unrefined parents made
    /// only of leaves accepted by `coarsen`.
    fn coarsening_candidates(&self, coarsen: impl Fn(usize) -> bool) -> Vec<usize> {
        self.splits
            .iter()
            .filter(|(_, parents)| {
                parents.iter().all(|&p| match self.elems[p].children {
                    Some(ch) => ch.iter().all(|&c| self.is_leaf(c) && coarsen(c)),
                    None => false,
                })
            })
            .map(|(&m, _)| m)
            .collect()
    }

    fn unrefine(&mut self, m: usize) {
        let parents = self.splits.remove(&m).unwrap_or_default();
        if let Some(&p) = parents.first() {
            let key = self.ref_edge(p);
            self.edge_mid.remove(&key);
        }
        for p in parents {
            let children = self.elems[p].children.take().expect("split parent has children");
            for c in children {
                self.unlink_leaf(c);
                self.elems[c].alive = false;
                self.free_elems.push(c);
            }
            self.link_leaf(p);
        }
        self.vertex_alive[m] = false;
        self.free_vertices.push(m);
        self.n_vertices -= 1;
    }

    /// One adaptation pass driven by per-triangle decisions on the last
    /// compacted mesh: `refine` triangles in the given priority order and
    /// coarsen where every sibling is accepted by `coarsen`.
    pub fn adapt_pass(
        &mut self,
        refine_order: &[usize],
        coarsen: &[bool],
        hmin: f64,
        nbvx: usize,
    ) -> Result<AdaptStats> {
        let mut stats = AdaptStats::default();
        let leaf_coarsen: HashMap<usize, bool> = self
            .leaf_of_triangle
            .iter()
            .zip(coarsen)
            .map(|(&e, &c)| (e, c))
            .collect();
        let candidates = self.coarsening_candidates(|e| leaf_coarsen.get(&e).copied().unwrap_or(false));
        for m in candidates {
            self.unrefine(m);
            stats.coarsened += 1;
        }
        let targets: Vec<usize> = refine_order.iter().map(|&t| self.leaf_of_triangle[t]).collect();
        for e in targets {
            if !self.is_leaf(e) {
                continue;
            }
            if 0.5 * self.refinement_edge_length(e) < hmin * (1.0 - 1e-9) {
                continue;
            }
            if self.n_vertices + self.closure_cost(e) > nbvx {
                stats.saturated = true;
                continue;
            }
            self.refine(e);
            stats.refined += 1;
        }
        self.compact()?;
        Ok(stats)
    }

    fn compact(&mut self) -> Result<()> {
        let mut node_of_vertex = vec![usize::MAX; self.points.len()];
        let mut vertex_of_node = Vec::with_capacity(self.n_vertices);
        for (v, &alive) in self.vertex_alive.iter().enumerate() {
            if alive {
                node_of_vertex[v] = vertex_of_node.len();
                vertex_of_node.push(v);
            }
        }
        let leaves: Vec<usize> = (0..self.elems.len()).filter(|&e| self.is_leaf(e)).collect();
        if leaves.iter().any(|&e| self.elems[e].v.iter().any(|&v| node_of_vertex[v] == usize::MAX)) {
            return Err(Error::invalid("leaf references a removed vertex"));
        }
        self.leaf_of_triangle = leaves;
        self.vertex_of_node = vertex_of_node;
        Ok(())
    }

    /// The current leaf mesh.
    pub fn to_mesh(&self) -> Result<TriMesh> {
        let mut node_of_vertex = vec![usize::MAX; self.points.len()];
        for (n, &v) in self.vertex_of_node.iter().enumerate() {
            node_of_vertex[v] = n;
        }
        let nodes: Vec<Point> = self.vertex_of_node.iter().map(|&v| self.points[v]).collect();
        let mut triangles = Vec::with_capacity(self.leaf_of_triangle.len());
        let mut boundary = Vec::new();
        let b = self.bounds;
        let tol = 1e-9 * b.width().max(b.height());
        for &e in &self.leaf_of_triangle {
            let v = self.elems[e].v;
            triangles.push(v.map(|x| node_of_vertex[x]));
            for k in 0..3 {
                let (a, c) = (v[k], v[(k + 1) % 3]);
                if self.edge_leaves.get(&ordered(a, c)).map_or(0, Vec::len) != 1 {
                    continue;
                }
                let (pa, pc) = (self.points[a], self.points[c]);
                let mid = [0.5 * (pa[0] + pc[0]), 0.5 * (pa[1] + pc[1])];
                let side = if (mid[1] - b.ymin).abs() <= tol {
                    Side::Bottom
                } else if (mid[1] - b.ymax).abs() <= tol {
                    Side::Top
                } else if (mid[0] - b.xmin).abs() <= tol {
                    Side::Left
                } else if (mid[0] - b.xmax).abs() <= tol {
                    Side::Right
                } else {
                    return Err(Error::invalid("interior edge with a single element"));
                };
                boundary.push(BoundaryEdge {
                    a: node_of_vertex[a],
                    b: node_of_vertex[c],
                    side,
                });
            }
        }
        boundary.sort();
        TriMesh::new(nodes, triangles, boundary, b)
    }

    /// Checks that every leaf edge has one or two leaves and no hanging vertex.
    pub fn is_conforming(&self) -> bool {
        self.leaf_of_triangle.iter().all(|&e| {
            edges_of(self.elems[e].v).iter().all(|edge| {
                let n = self.edge_leaves.get(edge).map_or(0, Vec::len);
                (n == 1 || n == 2) && !self.edge_mid.get(edge).is_some_and(|&m| self.vertex_alive[m])
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_rect_mesh;

    #[test]
    fn base_labels_use_the_diagonal() {
        let mesh = build_rect_mesh(0.0, 1.0, 0.0, 1.0, 1, 1).unwrap();
        let am = AdaptiveMesh::new(&mesh).unwrap();
        assert_eq!(am.ref_edge(0), (0, 3));
        assert_eq!(am.ref_edge(1), (0, 3));
        assert!(am.is_conforming());
    }

    #[test]
    fn closure_keeps_conformity() {
        let mesh = build_rect_mesh(0.0, 4.0, 0.0, 4.0, 4, 4).unwrap();
        let mut am = AdaptiveMesh::new(&mesh).unwrap();
        for _ in 0..5 {
            let n = am.num_leaves();
            let order: Vec<usize> = (0..n).filter(|t| t % 7 == 0).collect();
            am.adapt_pass(&order, &vec![false; n], 0.0, usize::MAX).unwrap();
            assert!(am.is_conforming());
            let m = am.to_mesh().unwrap();
            let total: f64 = m.geometries().iter().map(|g| g.area).sum();
            assert!((total - 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coarsening_undoes_refinement() {
        let mesh = build_rect_mesh(0.0, 2.0, 0.0, 2.0, 2, 2).unwrap();
        let mut am = AdaptiveMesh::new(&mesh).unwrap();
        let all: Vec<usize> = (0..am.num_leaves()).collect();
        am.adapt_pass(&all, &vec![false; all.len()], 0.0, usize::MAX).unwrap();
        assert!(am.num_vertices() > 9);
        for _ in 0..4 {
            let n = am.num_leaves();
            am.adapt_pass(&[], &vec![true; n], 0.0, usize::MAX).unwrap();
            assert!(am.is_conforming());
        }
        assert_eq!(am.num_vertices(), 9);
        assert_eq!(am.num_leaves(), 8);
    }

    #[test]
    fn vertex_budget_saturates() {
        let mesh = build_rect_mesh(0.0, 2.0, 0.0, 2.0, 2, 2).unwrap();
        let mut am = AdaptiveMesh::new(&mesh).unwrap();
        let all: Vec<usize> = (0..am.num_leaves()).collect();
        let stats = am.adapt_pass(&all, &vec![false; all.len()], 0.0, 11).unwrap();
        assert!(stats.saturated);
        assert!(am.num_vertices() <= 11);
    }
}
