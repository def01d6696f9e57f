//! Face lattices of polytopes, built from the vertex-facet incidence.
//!
//! Every proper face is an intersection of facets, so the lattice is the
//! closure of the facet vertex sets under intersection. Dimensions are
//! combinatorial (length of the longest chain from a vertex).

use std::collections::{HashMap, HashSet, VecDeque};

use fixedbitset::FixedBitSet;
use serde::Serialize;

/// One proper face: sorted vertex indices, sorted indices of the facets
/// containing it, and its dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LatticeFace {
    pub vertices: Vec<usize>,
    pub facets: Vec<usize>,
    pub dim: usize,
}

/// The proper faces of a polytope ordered by inclusion.
#[derive(Clone, Debug, Serialize)]
pub struct FaceLattice {
    n_vertices: usize,
    n_facets: usize,
    faces: Vec<LatticeFace>,
    by_dim: Vec<Vec<usize>>,
    /// `covers[i]` lists the faces covering face `i` (one dimension higher).
    covers: Vec<Vec<usize>>,
    #[serde(skip)]
    index: HashMap<Vec<usize>, usize>,
}

impl FaceLattice {
    /// Builds the lattice from `incidence[f]`, the vertex set of facet `f`.
    pub fn from_incidence(n_vertices: usize, incidence: &[FixedBitSet]) -> Self {
        let n_facets = incidence.len();
        let mut seen: HashSet<FixedBitSet> = HashSet::new();
        let mut sets: Vec<FixedBitSet> = Vec::new();
        let mut queue: VecDeque<FixedBitSet> = VecDeque::new();
        for f in incidence {
            if f.count_ones(..) > 0 && seen.insert(f.clone()) {
                queue.push_back(f.clone());
                sets.push(f.clone());
            }
        }
        while let Some(s) = queue.pop_front() {
            for f in incidence {
                let mut t = s.clone();
                t.intersect_with(f);
                if t.count_ones(..) > 0 && seen.insert(t.clone()) {
                    queue.push_back(t.clone());
                    sets.push(t);
                }
            }
        }

        // Smaller sets first so every subface precedes its superfaces.
        sets.sort_by(|a, b| {
            a.count_ones(..)
                .cmp(&b.count_ones(..))
                .then_with(|| a.ones().cmp(b.ones()))
        });
        let mut faces: Vec<LatticeFace> = sets
            .iter()
            .map(|s| LatticeFace {
                vertices: s.ones().collect(),
                facets: (0..n_facets).filter(|&f| s.is_subset(&incidence[f])).collect(),
                dim: 0,
            })
            .collect();

        let count = faces.len();
        let mut below: Vec<Vec<usize>> = vec![Vec::new(); count];
        for i in 0..count {
            for j in 0..i {
                if sets[j].count_ones(..) < sets[i].count_ones(..) && sets[j].is_subset(&sets[i]) {
                    below[i].push(j);
                }
            }
        }
        for i in 0..count {
            faces[i].dim = below[i].iter().map(|&j| faces[j].dim + 1).max().unwrap_or(0);
        }
        let top = faces.iter().map(|f| f.dim).max().unwrap_or(0);
        let mut by_dim = vec![Vec::new(); top + 1];
        for (i, f) in faces.iter().enumerate() {
            by_dim[f.dim].push(i);
        }
        let mut covers = vec![Vec::new(); count];
        for i in 0..count {
            for &j in &below[i] {
                if faces[j].dim + 1 == faces[i].dim {
                    covers[j].push(i);
                }
            }
        }
        let index = faces.iter().enumerate().map(|(i, f)| (f.vertices.clone(), i)).collect();
        Self { n_vertices, n_facets, faces, by_dim, covers, index }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_facets(&self) -> usize {
        self.n_facets
    }

    pub fn faces(&self) -> &[LatticeFace] {
        &self.faces
    }

    /// Indices into [`faces`](Self::faces) of the faces of dimension `k`.
    pub fn faces_of_dim(&self, k: usize) -> &[usize] {
        self.by_dim.get(k).map_or(&[], |v| v.as_slice())
    }

    pub fn covers(&self, face: usize) -> &[usize] {
        &self.covers[face]
    }

    /// Looks up a face by its sorted vertex set.
    pub fn find(&self, vertices: &[usize]) -> Option<&LatticeFace> {
        self.index.get(vertices).map(|&i| &self.faces[i])
    }

    pub fn position(&self, vertices: &[usize]) -> Option<usize> {
        self.index.get(vertices).copied()
    }

    /// Number of faces of each dimension `0..=d-1`.
    pub fn f_vector(&self) -> Vec<usize> {
        self.by_dim.iter().map(|v| v.len()).collect()
    }

    /// Vertex pairs forming the edges (1-faces).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.faces_of_dim(1)
            .iter()
            .filter_map(|&i| match self.faces[i].vertices.as_slice() {
                [a, b] => Some((*a, *b)),
                _ => None,
            })
            .collect()
    }

    fn facet_sets(&self) -> Vec<Vec<usize>> {
        let top = self.by_dim.len().saturating_sub(1);
        self.faces_of_dim(top).iter().map(|&i| self.faces[i].vertices.clone()).collect()
    }

    /// Searches for an inclusion-preserving bijection onto `other`. Returns
    /// the vertex map `self -> other` when the lattices are isomorphic.
    pub fn isomorphism(&self, other: &FaceLattice) -> Option<Vec<usize>> {
        if self.f_vector() != other.f_vector() || self.n_vertices != other.n_vertices {
            return None;
        }
        let mine = Signatures::new(self);
        let theirs = Signatures::new(other);
        let mut a = mine.sigs.clone();
        let mut b = theirs.sigs.clone();
        a.sort();
        b.sort();
        if a != b {
            return None;
        }

        let order = bfs_order(self.n_vertices, &mine.adjacency);
        let target_facets: HashSet<Vec<usize>> = theirs.facet_sets.iter().cloned().collect();
        let mut state = Search {
            src: &mine,
            dst: &theirs,
            order: &order,
            target_facets: &target_facets,
            map: vec![usize::MAX; self.n_vertices],
            used: vec![false; other.n_vertices],
        };
        if state.extend(0) {
            Some(state.map)
        } else {
            None
        }
    }
}

/// Per-vertex invariants used to prune the isomorphism search.
struct Signatures {
    adjacency: Vec<Vec<bool>>,
    sigs: Vec<(usize, Vec<usize>)>,
    facet_sets: Vec<Vec<usize>>,
    vertex_facets: Vec<Vec<usize>>,
}

impl Signatures {
    fn new(l: &FaceLattice) -> Self {
        let n = l.n_vertices;
        let mut adjacency = vec![vec![false; n]; n];
        for (a, b) in l.edges() {
            adjacency[a][b] = true;
            adjacency[b][a] = true;
        }
        let facet_sets = l.facet_sets();
        let mut vertex_facets = vec![Vec::new(); n];
        for (f, s) in facet_sets.iter().enumerate() {
            for &v in s {
                vertex_facets[v].push(f);
            }
        }
        let sigs = (0..n)
            .map(|v| {
                let degree = adjacency[v].iter().filter(|&&x| x).count();
                let mut sizes: Vec<usize> = vertex_facets[v].iter().map(|&f| facet_sets[f].len()).collect();
                sizes.sort();
                (degree, sizes)
            })
            .collect();
        Self { adjacency, sigs, facet_sets, vertex_facets }
    }
}

fn bfs_order(n: usize, adjacency: &[Vec<bool>]) -> Vec<usize> {
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for (w, &adj) in adjacency[v].iter().enumerate() {
                if adj && !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    order
}

struct Search<'a> {
    src: &'a Signatures,
    dst: &'a Signatures,
    order: &'a [usize],
    target_facets: &'a HashSet<Vec<usize>>,
    map: Vec<usize>,
    used: Vec<bool>,
}

impl Search<'_> {
    fn extend(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return self.src.facet_sets.iter().all(|f| {
                let mut img: Vec<usize> = f.iter().map(|&v| self.map[v]).collect();
                img.sort();
                self.target_facets.contains(&img)
            });
        }
        let v = self.order[depth];
        for w in 0..self.used.len() {
            if self.used[w] || self.src.sigs[v] != self.dst.sigs[w] {
                continue;
            }
            let consistent = self.order[..depth].iter().all(|&u| {
                self.src.adjacency[v][u] == self.dst.adjacency[w][self.map[u]]
            });
            if !consistent {
                continue;
            }
            self.map[v] = w;
            self.used[w] = true;
            if self.partial_facets_ok(v) && self.extend(depth + 1) {
                return true;
            }
            self.used[w] = false;
            self.map[v] = usize::MAX;
        }
        false
    }

    /// Every facet through `v` must map its already-placed vertices into a
    /// facet of the same size in the target.
    fn partial_facets_ok(&self, v: usize) -> bool {
        self.src.vertex_facets[v].iter().all(|&f| {
            let set = &self.src.facet_sets[f];
            let placed: Vec<usize> = set.iter().map(|&u| self.map[u]).filter(|&w| w != usize::MAX).collect();
            let image = self.map[v];
            self.dst.vertex_facets[image].iter().any(|&g| {
                let target = &self.dst.facet_sets[g];
                target.len() == set.len() && placed.iter().all(|w| target.binary_search(w).is_ok())
            })
        })
    }
}
