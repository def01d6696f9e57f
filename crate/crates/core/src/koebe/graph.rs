//! Polyhedral graphs given by their oriented face cycles.

use std::collections::{HashMap, VecDeque};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euclidean::EuclideanPolytope;
use crate::lattice::FaceLattice;

/// Edge `{a, b}` with `a < b`, together with the faces on either side:
/// `left` traverses `a -> b` and `right` traverses `b -> a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub left: usize,
    pub right: usize,
}

/// A planar 3-connected graph with its faces listed as cycles that are
/// counterclockwise when seen from outside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct PolyhedralGraph {
    n: usize,
    faces: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    /// Directed edge `(u, v)` to the face traversing it.
    #[serde(skip)]
    half_edges: HashMap<(usize, usize), usize>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    faces: Vec<Vec<usize>>,
}

impl TryFrom<GraphFile> for PolyhedralGraph {
    type Error = Error;
    fn try_from(f: GraphFile) -> Result<Self> {
        PolyhedralGraph::from_faces(f.faces)
    }
}

impl From<PolyhedralGraph> for GraphFile {
    fn from(g: PolyhedralGraph) -> Self {
        GraphFile { faces: g.faces }
    }
}

impl PolyhedralGraph {
    /// Validates the face cycles: every directed edge is used by exactly one
    /// face and its reverse by another, vertex links are single cycles, the
    /// Euler relation holds and the graph is 3-connected.
    pub fn from_faces(faces: Vec<Vec<usize>>) -> Result<Self> {
        let bad = |m: String| Err(Error::NotPolyhedralGraph(m));
        let n = faces.iter().flatten().map(|&v| v + 1).max().unwrap_or(0);
        if n < 4 {
            return bad(format!("{n} vertices"));
        }
        let mut half_edges = HashMap::new();
        for (f, cycle) in faces.iter().enumerate() {
            if cycle.len() < 3 {
                return bad(format!("face {f} has {} vertices", cycle.len()));
            }
            let mut seen = cycle.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != cycle.len() {
                return bad(format!("face {f} repeats a vertex"));
            }
            for k in 0..cycle.len() {
                let e = (cycle[k], cycle[(k + 1) % cycle.len()]);
                if half_edges.insert(e, f).is_some() {
                    return bad(format!("directed edge {e:?} appears twice"));
                }
            }
        }
        let mut edges = Vec::new();
        for (&(u, v), &f) in &half_edges {
            match half_edges.get(&(v, u)) {
                None => return bad(format!("edge {{{u}, {v}}} lies in only one face")),
                Some(&g) if u < v => edges.push(Edge { a: u, b: v, left: f, right: g }),
                Some(_) => {}
            }
        }
        edges.sort_by_key(|e| (e.a, e.b));
        let g = Self { n, faces, edges, half_edges };

        if let Some(v) = (0..n).find(|&v| g.degree(v) == 0) {
            return bad(format!("vertex {v} is isolated"));
        }
        for v in 0..n {
            let ring = g.faces_around(v);
            if ring.len() != g.degree(v) {
                return bad(format!("faces around vertex {v} do not form a single cycle"));
            }
        }
        let euler = n as i64 - g.edges.len() as i64 + g.faces.len() as i64;
        if euler != 2 {
            return bad(format!("Euler characteristic {euler}"));
        }
        if let Some((u, v)) = g.separating_pair() {
            return bad(format!("removing vertices {u} and {v} disconnects the graph"));
        }
        Ok(g)
    }

    /// The graph of a 3-polytope, with its facet cycles.
    pub fn from_polytope(p: &EuclideanPolytope) -> Result<Self> {
        Self::from_faces(p.facet_cycles()?)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.a == v || e.b == v).count()
    }

    /// Face traversing the directed edge `u -> v`.
    pub fn face_of(&self, u: usize, v: usize) -> Option<usize> {
        self.half_edges.get(&(u, v)).copied()
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search_by_key(&key, |e| (e.a, e.b)).ok()
    }

    /// Faces around `v`, counterclockwise from outside.
    pub fn faces_around(&self, v: usize) -> Vec<usize> {
        let Some(start) = self.faces.iter().position(|f| f.contains(&v)) else {
            return Vec::new();
        };
        let mut ring = vec![start];
        let mut f = start;
        loop {
            let cycle = &self.faces[f];
            let k = cycle.iter().position(|&x| x == v).expect("v lies on f");
            let pred = cycle[(k + cycle.len() - 1) % cycle.len()];
            match self.face_of(v, pred) {
                Some(next) if next == start => return ring,
                Some(next) if ring.len() <= self.faces.len() => {
                    ring.push(next);
                    f = next;
                }
                _ => return ring,
            }
        }
    }

    /// Edge between consecutive faces `f` and `g` around `v`.
    pub fn edge_between(&self, v: usize, f: usize, g: usize) -> Option<usize> {
        let cycle = &self.faces[f];
        let k = cycle.iter().position(|&x| x == v)?;
        let pred = cycle[(k + cycle.len() - 1) % cycle.len()];
        (self.face_of(v, pred) == Some(g)).then(|| self.edge_index(v, pred)).flatten()
    }

    pub fn face_incidence(&self) -> Vec<FixedBitSet> {
        self.faces
            .iter()
            .map(|f| {
                let mut s = FixedBitSet::with_capacity(self.n);
                for &v in f {
                    s.insert(v);
                }
                s
            })
            .collect()
    }

    pub fn face_lattice(&self) -> FaceLattice {
        FaceLattice::from_incidence(self.n, &self.face_incidence())
    }

    fn separating_pair(&self) -> Option<(usize, usize)> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        let connected_without = |skip: &[usize]| {
            let start = (0..self.n).find(|v| !skip.contains(v)).expect("n >= 4");
            let mut seen = vec![false; self.n];
            for &s in skip {
                seen[s] = true;
            }
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            let mut count = skip.len() + 1;
            while let Some(u) = queue.pop_front() {
                for &w in &adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        count += 1;
                        queue.push_back(w);
                    }
                }
            }
            count == self.n
        };
        if !connected_without(&[]) {
            return Some((usize::MAX, usize::MAX));
        }
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !connected_without(&[u, v]) {
                    return Some((u, v));
                }
            }
        }
        None
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::fixtures;

    pub(crate) fn cube_graph() -> PolyhedralGraph {
        PolyhedralGraph::from_polytope(&fixtures::cube3()).unwrap()
    }

    #[test]
    fn standard_graphs() {
        let cube = cube_graph();
        assert_eq!((cube.n_vertices(), cube.edges().len(), cube.faces().len()), (8, 12, 6));
        let tet = PolyhedralGraph::from_polytope(&fixtures::tetrahedron()).unwrap();
        assert_eq!(tet.edges().len(), 6);
        let dodeca = PolyhedralGraph::from_polytope(&fixtures::dodecahedron()).unwrap();
        assert_eq!((dodeca.n_vertices(), dodeca.edges().len(), dodeca.faces().len()), (20, 30, 12));
        assert_eq!(dodeca.face_lattice().f_vector(), vec![20, 30, 12]);
    }

    #[test]
    fn rings_are_consistent() {
        let g = cube_graph();
        for v in 0..8 {
            let ring = g.faces_around(v);
            assert_eq!(ring.len(), 3);
            for k in 0..3 {
                let e = g.edge_between(v, ring[k], ring[(k + 1) % 3]).unwrap();
                let edge = g.edges()[e];
                assert!(edge.a == v || edge.b == v);
            }
        }
    }

    #[test]
    fn rejects_bad_graphs() {
        // Two triangles glued along their boundary.
        assert!(matches!(
            PolyhedralGraph::from_faces(vec![vec![0, 1, 2], vec![0, 2, 1]]),
            Err(Error::NotPolyhedralGraph(_))
        ));
        // Triangular bipyramid.
        let faces = vec![
            vec![0, 1, 2],
            vec![0, 2, 3],
            vec![0, 3, 1],
            vec![4, 2, 1],
            vec![4, 3, 2],
            vec![4, 1, 3],
        ];
        assert!(PolyhedralGraph::from_faces(faces).is_ok());
        let quad_pair = vec![vec![0, 1, 2, 3], vec![0, 3, 2, 1]];
        assert!(matches!(PolyhedralGraph::from_faces(quad_pair), Err(Error::NotPolyhedralGraph(_))));
        // A square with one diagonal: {0, 2} separates 1 from 3.
        let split = vec![vec![0, 1, 2], vec![0, 2, 3], vec![0, 3, 2, 1]];
        assert!(matches!(PolyhedralGraph::from_faces(split), Err(Error::NotPolyhedralGraph(_))));
        // A single orientation error.
        let faces = vec![vec![0, 1, 2], vec![0, 2, 3], vec![0, 3, 1], vec![1, 2, 3]];
        assert!(matches!(PolyhedralGraph::from_faces(faces), Err(Error::NotPolyhedralGraph(_))));
        let faces = vec![vec![0, 2, 1], vec![0, 3, 2], vec![0, 1, 3], vec![1, 2, 3]];
        assert!(PolyhedralGraph::from_faces(faces).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let g = cube_graph();
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.starts_with("{\"faces\":"));
        let back: PolyhedralGraph = serde_json::from_str(&s).unwrap();
        assert_eq!(back.faces(), g.faces());
        assert!(serde_json::from_str::<PolyhedralGraph>("{\"faces\":[[0,1,2],[0,2,1]]}").is_err());
    }
}
