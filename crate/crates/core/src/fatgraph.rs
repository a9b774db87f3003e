//! Trivalent fat graphs: half-edges paired by `sigma`, counterclockwise
//! vertex rotation `nu`.
//!
//! Faces are the orbits of h ↦ ν(σ(h)); a path is a sequence of outgoing
//! half-edges, and a face boundary is the path that always turns left.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// On-disk graph description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub half_edges: usize,
    pub sigma: Vec<[usize; 2]>,
    pub nu: Vec<Vec<usize>>,
    /// Defaults to e0, e1, ... when absent.
    #[serde(default)]
    pub edge_labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FatGraph {
    sigma: Vec<usize>,
    nu: Vec<usize>,
    nu_inv: Vec<usize>,
    vertex: Vec<usize>,
    edge: Vec<usize>,
    ends: Vec<[usize; 2]>,
    labels: Vec<String>,
    num_vertices: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    /// Outgoing half-edges in boundary order.
    pub boundary: Vec<usize>,
    /// θ^i_α for every edge α.
    pub multiplicities: Vec<u32>,
}

/// The edge α together with its neighbours: β, γ are the ν-successor and
/// ν-predecessor at the source of α, δ, ε those at its target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Frame {
    pub alpha: usize,
    pub beta: usize,
    pub gamma: usize,
    pub delta: usize,
    pub epsilon: usize,
}

impl Frame {
    /// Neighbours receiving +log(1+e^x) under a move.
    pub fn plus(&self) -> [usize; 2] {
        [self.beta, self.delta]
    }

    /// Neighbours receiving −log(1+e^{−x}) under a move.
    pub fn minus(&self) -> [usize; 2] {
        [self.gamma, self.epsilon]
    }

    pub fn neighbours(&self) -> [usize; 4] {
        [self.beta, self.gamma, self.delta, self.epsilon]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Turn {
    L,
    R,
}

impl FatGraph {
    pub fn from_parts(sigma: &[[usize; 2]], nu: &[Vec<usize>], labels: Vec<String>) -> Result<FatGraph> {
        let n = 2 * sigma.len();
        let bad = |m: String| Err(Error::InvalidGraph(m));
        if labels.len() != sigma.len() {
            return bad(format!("{} labels for {} edges", labels.len(), sigma.len()));
        }
        let mut seen_labels = HashMap::new();
        for (e, l) in labels.iter().enumerate() {
            if let Some(prev) = seen_labels.insert(l.as_str(), e) {
                return bad(format!("label {l:?} used by edges {prev} and {e}"));
            }
        }
        let mut sig = vec![usize::MAX; n];
        let mut edge = vec![0; n];
        for (e, &[a, b]) in sigma.iter().enumerate() {
            if a >= n || b >= n {
                return bad(format!("sigma pair {e} references a half-edge out of range 0..{n}"));
            }
            if a == b {
                return bad(format!("sigma has a fixed point at half-edge {a}"));
            }
            for h in [a, b] {
                if sig[h] != usize::MAX {
                    return bad(format!("half-edge {h} appears twice in sigma"));
                }
            }
            sig[a] = b;
            sig[b] = a;
            edge[a] = e;
            edge[b] = e;
        }
        let mut nu_map = vec![usize::MAX; n];
        for (v, cyc) in nu.iter().enumerate() {
            if cyc.len() != 3 {
                return bad(format!("vertex {v} has valence {}", cyc.len()));
            }
            for (i, &h) in cyc.iter().enumerate() {
                if h >= n {
                    return bad(format!("vertex {v} references half-edge {h} out of range"));
                }
                if nu_map[h] != usize::MAX {
                    return bad(format!("half-edge {h} appears in two vertices"));
                }
                nu_map[h] = cyc[(i + 1) % 3];
            }
        }
        if let Some(h) = nu_map.iter().position(|&x| x == usize::MAX) {
            return bad(format!("half-edge {h} belongs to no vertex"));
        }
        let g = FatGraph::build(sig, nu_map, edge, sigma.to_vec(), labels);
        g.check_topology()?;
        Ok(g)
    }

    fn build(
        sigma: Vec<usize>,
        nu: Vec<usize>,
        edge: Vec<usize>,
        ends: Vec<[usize; 2]>,
        labels: Vec<String>,
    ) -> FatGraph {
        let n = sigma.len();
        let mut nu_inv = vec![0; n];
        for h in 0..n {
            nu_inv[nu[h]] = h;
        }
        let mut vertex = vec![usize::MAX; n];
        let mut nv = 0;
        for h in 0..n {
            if vertex[h] == usize::MAX {
                let mut x = h;
                while vertex[x] == usize::MAX {
                    vertex[x] = nv;
                    x = nu[x];
                }
                nv += 1;
            }
        }
        FatGraph { sigma, nu, nu_inv, vertex, edge, ends, labels, num_vertices: nv }
    }

    fn check_topology(&self) -> Result<()> {
        // Connectivity over vertices.
        let mut seen = vec![false; self.num_vertices];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for h in 0..self.num_half_edges() {
                if self.vertex[h] == v {
                    let w = self.vertex[self.sigma[h]];
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidGraph("graph is disconnected".into()));
        }
        let chi = self.num_vertices as i64 - self.num_edges() as i64 + self.faces().len() as i64;
        if chi > 2 || (2 - chi) % 2 != 0 {
            return Err(Error::InvalidGraph(format!("Euler characteristic {chi} of the closed surface")));
        }
        let (g, s) = (self.genus() as i64, self.punctures() as i64);
        if 2 * g - 2 + s <= 0 {
            return Err(Error::InvalidGraph(format!("(g, s) = ({g}, {s}) is not hyperbolic")));
        }
        Ok(())
    }

    pub fn from_file(f: &GraphFile) -> Result<FatGraph> {
        if f.half_edges != 2 * f.sigma.len() {
            return Err(Error::InvalidGraph(format!(
                "half_edges = {} but sigma has {} pairs",
                f.half_edges,
                f.sigma.len()
            )));
        }
        let labels = if f.edge_labels.is_empty() {
            (0..f.sigma.len()).map(|e| format!("e{e}")).collect()
        } else {
            f.edge_labels.clone()
        };
        FatGraph::from_parts(&f.sigma, &f.nu, labels)
    }

    pub fn from_json(s: &str) -> Result<FatGraph> {
        FatGraph::from_file(&serde_json::from_str(s)?)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            half_edges: self.num_half_edges(),
            sigma: self.ends.clone(),
            nu: self.vertices().into_iter().map(|v| v.to_vec()).collect(),
            edge_labels: self.labels.clone(),
        }
    }

    pub fn num_half_edges(&self) -> usize {
        self.sigma.len()
    }

    pub fn num_edges(&self) -> usize {
        self.ends.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn sigma(&self, h: usize) -> usize {
        self.sigma[h]
    }

    pub fn nu(&self, h: usize) -> usize {
        self.nu[h]
    }

    pub fn nu_inv(&self, h: usize) -> usize {
        self.nu_inv[h]
    }

    pub fn vertex_of(&self, h: usize) -> usize {
        self.vertex[h]
    }

    pub fn edge_of(&self, h: usize) -> usize {
        self.edge[h]
    }

    /// Source and target half-edges of an edge.
    pub fn ends(&self, e: usize) -> [usize; 2] {
        self.ends[e]
    }

    pub fn label(&self, e: usize) -> &str {
        &self.labels[e]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edge_index(&self, label: &str) -> Result<usize> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| Error::UnknownEdge(label.to_string()))
    }

    pub fn vertices(&self) -> Vec<[usize; 3]> {
        let mut out = vec![[usize::MAX; 3]; self.num_vertices];
        for h in 0..self.num_half_edges() {
            let v = self.vertex[h];
            if out[v][0] == usize::MAX {
                out[v] = [h, self.nu[h], self.nu[self.nu[h]]];
            }
        }
        out
    }

    pub fn faces(&self) -> Vec<Face> {
        let n = self.num_half_edges();
        let mut seen = vec![false; n];
        let mut faces = Vec::new();
        for h in 0..n {
            if seen[h] {
                continue;
            }
            let mut boundary = Vec::new();
            let mut multiplicities = vec![0; self.num_edges()];
            let mut x = h;
            while !seen[x] {
                seen[x] = true;
                boundary.push(x);
                multiplicities[self.edge[x]] += 1;
                x = self.nu[self.sigma[x]];
            }
            faces.push(Face { boundary, multiplicities });
        }
        faces
    }

    /// θ as an F × E integer matrix.
    pub fn theta(&self) -> Vec<Vec<i64>> {
        self.faces().into_iter().map(|f| f.multiplicities.into_iter().map(i64::from).collect()).collect()
    }

    pub fn punctures(&self) -> usize {
        self.faces().len()
    }

    pub fn genus(&self) -> usize {
        let chi = self.num_vertices as i64 - self.num_edges() as i64 + self.punctures() as i64;
        ((2 - chi) / 2) as usize
    }

    pub fn is_loop(&self, e: usize) -> bool {
        let [h, hp] = self.ends[e];
        self.vertex[h] == self.vertex[hp]
    }

    /// Number of distinct vertices shared by two edges.
    pub fn shared_vertices(&self, e1: usize, e2: usize) -> usize {
        let v1 = self.ends[e1].map(|h| self.vertex[h]);
        let v2 = self.ends[e2].map(|h| self.vertex[h]);
        let mut shared: Vec<usize> = v1.iter().copied().filter(|v| v2.contains(v)).collect();
        shared.dedup();
        shared.len()
    }

    pub fn frame(&self, alpha: usize) -> Result<Frame> {
        if alpha >= self.num_edges() {
            return Err(Error::UnknownEdge(alpha.to_string()));
        }
        if self.is_loop(alpha) {
            return Err(Error::LoopEdge(self.labels[alpha].clone()));
        }
        let [h, hp] = self.ends[alpha];
        Ok(Frame {
            alpha,
            beta: self.edge[self.nu[h]],
            gamma: self.edge[self.nu_inv[h]],
            delta: self.edge[self.nu[hp]],
            epsilon: self.edge[self.nu_inv[hp]],
        })
    }

    /// Collapse α and re-expand it the other way; labels are kept.
    pub fn whitehead(&self, alpha: usize) -> Result<(FatGraph, Frame)> {
        let frame = self.frame(alpha)?;
        let [h, hp] = self.ends[alpha];
        let (b, c) = (self.nu[h], self.nu_inv[h]);
        let (d, e) = (self.nu[hp], self.nu_inv[hp]);
        let mut nu = self.nu.clone();
        // New vertices (h, c, d) and (h', e, b).
        nu[h] = c;
        nu[c] = d;
        nu[d] = h;
        nu[hp] = e;
        nu[e] = b;
        nu[b] = hp;
        let g = FatGraph::build(self.sigma.clone(), nu, self.edge.clone(), self.ends.clone(), self.labels.clone());
        Ok((g, frame))
    }

    pub fn with_labels(&self, labels: Vec<String>) -> Result<FatGraph> {
        FatGraph::from_parts(&self.ends, &self.vertices().map_to_vec(), labels)
    }

    pub fn swap_labels(&self, e1: usize, e2: usize) -> FatGraph {
        let mut g = self.clone();
        g.labels.swap(e1, e2);
        g
    }

    /// The same graph with edge e renamed to `perm[e]`, its ends swapped
    /// where `flip[e]`, and half-edges renumbered so that edge i owns 2i and
    /// 2i + 1. Labels travel with their edges.
    pub fn renumber(&self, perm: &[usize], flip: &[bool]) -> Result<FatGraph> {
        let n = self.num_edges();
        if perm.len() != n || flip.len() != n {
            return Err(Error::Dimension { expected: n, got: perm.len().min(flip.len()) });
        }
        let mut hmap = vec![0; self.num_half_edges()];
        let mut labels = vec![String::new(); n];
        for e in 0..n {
            for (k, &h) in self.ends[e].iter().enumerate() {
                hmap[h] = 2 * perm[e] + (k ^ usize::from(flip[e]));
            }
            labels[perm[e]] = self.labels[e].clone();
        }
        let sigma: Vec<[usize; 2]> = (0..n).map(|i| [2 * i, 2 * i + 1]).collect();
        let nu: Vec<Vec<usize>> = self.vertices().iter().map(|v| v.iter().map(|&h| hmap[h]).collect()).collect();
        FatGraph::from_parts(&sigma, &nu, labels)
    }

    /// Hash of (sigma, nu, labels).
    pub fn fingerprint(&self) -> u64 {
        let mut s = DefaultHasher::new();
        self.sigma.hash(&mut s);
        self.nu.hash(&mut s);
        self.labels.hash(&mut s);
        s.finish()
    }

    /// A half-edge bijection f with f∘σ = σ′∘f and f∘ν = ν′∘f, optionally
    /// preserving edge labels.
    pub fn isomorphism(&self, other: &FatGraph, label_preserving: bool) -> Option<Vec<usize>> {
        let n = self.num_half_edges();
        if n != other.num_half_edges() || self.num_vertices != other.num_vertices {
            return None;
        }
        let candidates: Vec<usize> = if label_preserving {
            let e = other.edge_index(&self.labels[self.edge[0]]).ok()?;
            other.ends[e].to_vec()
        } else {
            (0..n).collect()
        };
        candidates.into_iter().find_map(|t| self.propagate(other, t, label_preserving))
    }

    fn propagate(&self, other: &FatGraph, target: usize, labels: bool) -> Option<Vec<usize>> {
        let n = self.num_half_edges();
        let mut map = vec![usize::MAX; n];
        let mut used = vec![false; n];
        let mut queue = VecDeque::from([(0, target)]);
        while let Some((h, t)) = queue.pop_front() {
            if map[h] != usize::MAX {
                if map[h] != t {
                    return None;
                }
                continue;
            }
            if used[t] || (labels && self.labels[self.edge[h]] != other.labels[other.edge[t]]) {
                return None;
            }
            map[h] = t;
            used[t] = true;
            queue.push_back((self.nu[h], other.nu[t]));
            queue.push_back((self.sigma[h], other.sigma[t]));
        }
        map.iter().all(|&x| x != usize::MAX).then_some(map)
    }

    pub fn is_isomorphic(&self, other: &FatGraph, label_preserving: bool) -> bool {
        self.isomorphism(other, label_preserving).is_some()
    }

    /// Turn taken at the end of the k-th step of a path.
    pub fn turn(&self, p: &EdgePath, k: usize) -> Result<Turn> {
        let n = p.len();
        if k >= n || (!p.closed && k + 1 >= n) {
            return Err(Error::NotIncident(k));
        }
        let incoming = self.sigma[p.hs[k]];
        let next = p.hs[(k + 1) % n];
        if next == self.nu[incoming] {
            Ok(Turn::L)
        } else if next == self.nu_inv[incoming] {
            Ok(Turn::R)
        } else if next == incoming {
            Err(Error::Backtrack(k))
        } else {
            Err(Error::NotIncident(k))
        }
    }

    pub fn turns(&self, p: &EdgePath) -> Result<Vec<Turn>> {
        let m = if p.closed { p.len() } else { p.len().saturating_sub(1) };
        (0..m).map(|k| self.turn(p, k)).collect()
    }
}

trait MapToVec {
    fn map_to_vec(self) -> Vec<Vec<usize>>;
}

impl MapToVec for Vec<[usize; 3]> {
    fn map_to_vec(self) -> Vec<Vec<usize>> {
        self.into_iter().map(|v| v.to_vec()).collect()
    }
}

/// A sequence of directed edges, each given by its outgoing half-edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgePath {
    pub hs: Vec<usize>,
    pub closed: bool,
}

impl EdgePath {
    pub fn closed(g: &FatGraph, hs: Vec<usize>) -> Result<EdgePath> {
        if hs.is_empty() {
            return Err(Error::OpenPath);
        }
        if let Some(&h) = hs.iter().find(|&&h| h >= g.num_half_edges()) {
            return Err(Error::UnknownEdge(format!("half-edge {h}")));
        }
        let p = EdgePath { hs, closed: true };
        g.turns(&p)?;
        Ok(p)
    }

    pub fn open(g: &FatGraph, hs: Vec<usize>) -> Result<EdgePath> {
        if let Some(&h) = hs.iter().find(|&&h| h >= g.num_half_edges()) {
            return Err(Error::UnknownEdge(format!("half-edge {h}")));
        }
        let p = EdgePath { hs, closed: false };
        g.turns(&p)?;
        Ok(p)
    }

    /// Parses a closed path from comma-separated labels; a leading `-`
    /// traverses the edge from its target to its source.
    pub fn parse(g: &FatGraph, text: &str) -> Result<EdgePath> {
        let mut hs = Vec::new();
        for tok in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (rev, name) = match tok.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, tok),
            };
            let e = g.edge_index(name)?;
            hs.push(g.ends(e)[usize::from(rev)]);
        }
        EdgePath::closed(g, hs)
    }

    pub fn face(g: &FatGraph, face: &Face) -> EdgePath {
        let _ = g;
        EdgePath { hs: face.boundary.clone(), closed: true }
    }

    pub fn len(&self) -> usize {
        self.hs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hs.is_empty()
    }

    pub fn edges(&self, g: &FatGraph) -> Vec<usize> {
        self.hs.iter().map(|&h| g.edge_of(h)).collect()
    }

    pub fn rotate(&self, k: usize) -> EdgePath {
        let mut hs = self.hs.clone();
        let n = hs.len().max(1);
        hs.rotate_left(k % n);
        EdgePath { hs, closed: self.closed }
    }

    pub fn reverse(&self, g: &FatGraph) -> EdgePath {
        EdgePath { hs: self.hs.iter().rev().map(|&h| g.sigma(h)).collect(), closed: self.closed }
    }

    /// `self` followed by `other`, as a closed path.
    pub fn concat(&self, g: &FatGraph, other: &EdgePath) -> Result<EdgePath> {
        let mut hs = self.hs.clone();
        hs.extend_from_slice(&other.hs);
        EdgePath::closed(g, hs)
    }

    pub fn display(&self, g: &FatGraph) -> String {
        self.hs
            .iter()
            .map(|&h| {
                let e = g.edge_of(h);
                if g.ends(e)[0] == h {
                    g.label(e).to_string()
                } else {
                    format!("-{}", g.label(e))
                }
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for EdgePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.hs)
    }
}

/// Cyclically cancels adjacent h, σ(h) pairs.
fn reduce_cyclic(g: &FatGraph, hs: Vec<usize>) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(hs.len());
    for h in hs {
        if out.last() == Some(&g.sigma(h)) {
            out.pop();
        } else {
            out.push(h);
        }
    }
    let (mut i, mut j) = (0, out.len());
    while j - i >= 2 && out[j - 1] == g.sigma(out[i]) {
        i += 1;
        j -= 1;
    }
    out[i..j].to_vec()
}

/// Carries a closed path across the Whitehead move `pre → post` at α.
///
/// Traversals of α are dropped, and α is re-inserted wherever two
/// consecutive half-edges end up on different vertices of `post`.
pub fn transport_path(pre: &FatGraph, post: &FatGraph, alpha: usize, p: &EdgePath) -> Result<EdgePath> {
    if !p.closed || p.is_empty() {
        return Err(Error::OpenPath);
    }
    pre.turns(p)?;
    let [h, hp] = pre.ends(alpha);
    let kept: Vec<usize> = p.hs.iter().copied().filter(|&o| pre.edge_of(o) != alpha).collect();
    if kept.is_empty() {
        return Err(Error::OpenPath);
    }
    let n = kept.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let (o, next) = (kept[i], kept[(i + 1) % n]);
        out.push(o);
        let v = post.vertex_of(post.sigma(o));
        if v != post.vertex_of(next) {
            let bridge = if post.vertex_of(h) == v {
                h
            } else if post.vertex_of(hp) == v {
                hp
            } else {
                return Err(Error::NotIncident(i));
            };
            out.push(bridge);
        }
    }
    EdgePath::closed(post, reduce_cyclic(post, out))
}

/// For each face of `pre`, the index of the corresponding face of `post`
/// after the move at α.
pub fn face_map(pre: &FatGraph, post: &FatGraph, alpha: usize) -> Result<Vec<usize>> {
    let faces_post: Vec<Vec<usize>> = post.faces().into_iter().map(|f| f.boundary).collect();
    pre.faces()
        .iter()
        .map(|f| {
            let q = transport_path(pre, post, alpha, &EdgePath::face(pre, f))?;
            faces_post
                .iter()
                .position(|b| b.len() == q.len() && (0..b.len()).any(|k| q.rotate(k).hs == *b))
                .ok_or_else(|| Error::InvalidGraph("face has no image after the move".into()))
        })
        .collect()
}

/// All reduced closed paths of length ≤ `max_len`, optionally starting with
/// the given half-edge.
pub fn closed_paths(g: &FatGraph, max_len: usize, start: Option<usize>) -> Vec<EdgePath> {
    fn rec(g: &FatGraph, p: &mut Vec<usize>, max_len: usize, out: &mut Vec<EdgePath>) {
        let last = *p.last().expect("non-empty");
        let incoming = g.sigma(last);
        if g.vertex_of(incoming) == g.vertex_of(p[0]) && incoming != p[0] {
            out.push(EdgePath { hs: p.clone(), closed: true });
        }
        if p.len() == max_len {
            return;
        }
        for next in [g.nu(incoming), g.nu_inv(incoming)] {
            p.push(next);
            rec(g, p, max_len, out);
            p.pop();
        }
    }
    let starts: Vec<usize> = match start {
        Some(h) => vec![h],
        None => (0..g.num_half_edges()).collect(),
    };
    let mut out = Vec::new();
    for h in starts {
        rec(g, &mut vec![h], max_len, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shipped;
    use proptest::prelude::*;

    fn dumbbell() -> FatGraph {
        // Two loops joined by a bridge: a thrice-punctured sphere.
        FatGraph::from_parts(
            &[[0, 1], [2, 3], [4, 5]],
            &[vec![0, 1, 2], vec![3, 4, 5]],
            vec!["p".into(), "q".into(), "r".into()],
        )
        .unwrap()
    }

    #[test]
    fn torus_faces() {
        let g = shipped::torus();
        let f = g.faces();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].multiplicities, vec![2, 2, 2]);
        assert_eq!((g.genus(), g.punctures(), g.num_edges(), g.num_vertices()), (1, 1, 3, 2));
    }

    #[test]
    fn sphere3_faces() {
        let g = shipped::sphere3();
        let f = g.faces();
        assert_eq!(f.len(), 3);
        for face in &f {
            assert_eq!(face.boundary.len(), 2);
            assert_eq!(face.multiplicities.iter().filter(|&&m| m == 1).count(), 2);
        }
        assert_eq!(g.genus(), 0);
    }

    #[test]
    fn shipped_counts() {
        for (name, g) in shipped::all() {
            let (gg, s) = (g.genus() as i64, g.punctures() as i64);
            assert_eq!(g.num_edges() as i64, 6 * gg - 6 + 3 * s, "{name}");
            assert_eq!(g.num_vertices() as i64, 4 * gg - 4 + 2 * s, "{name}");
            let total: usize = g.faces().iter().map(|f| f.boundary.len()).sum();
            assert_eq!(total, 2 * g.num_edges());
        }
        assert_eq!((shipped::sphere4().num_edges(), shipped::sphere4().punctures()), (6, 4));
        assert_eq!((shipped::genus2().genus(), shipped::genus2().punctures()), (2, 1));
    }

    #[test]
    fn validation_rejects_bad_graphs() {
        let l = |n: usize| (0..n).map(|i| format!("e{i}")).collect::<Vec<_>>();
        let fixed = FatGraph::from_parts(&[[0, 0], [2, 3], [4, 5]], &[vec![0, 2, 4], vec![1, 3, 5]], l(3));
        assert!(matches!(fixed, Err(Error::InvalidGraph(_))));
        let twice = FatGraph::from_parts(&[[0, 1], [1, 3], [4, 5]], &[vec![0, 2, 4], vec![1, 3, 5]], l(3));
        assert!(twice.is_err());
        let quad = FatGraph::from_parts(&[[0, 1], [2, 3]], &[vec![0, 1, 2, 3]], l(2));
        assert!(quad.is_err());
        // Two disjoint theta graphs.
        let disc = FatGraph::from_parts(
            &[[0, 1], [2, 3], [4, 5], [6, 7], [8, 9], [10, 11]],
            &[vec![0, 2, 4], vec![1, 5, 3], vec![6, 8, 10], vec![7, 11, 9]],
            l(6),
        );
        assert!(disc.is_err());
        let dup = FatGraph::from_parts(&[[0, 1], [2, 3], [4, 5]], &[vec![0, 2, 4], vec![1, 3, 5]], vec!["a".into(); 3]);
        assert!(dup.is_err());
    }

    #[test]
    fn json_round_trip() {
        for (_, g) in shipped::all() {
            let s = serde_json::to_string(&g.to_file()).unwrap();
            let h = FatGraph::from_json(&s).unwrap();
            assert!(g.is_isomorphic(&h, true));
            assert_eq!(g.fingerprint(), h.fingerprint());
        }
    }

    #[test]
    fn face_paths_turn_one_way() {
        for (_, g) in shipped::all() {
            for f in g.faces() {
                let p = EdgePath::closed(&g, f.boundary.clone()).unwrap();
                assert!(g.turns(&p).unwrap().iter().all(|&t| t == Turn::L));
                let r = p.reverse(&g);
                assert!(g.turns(&r).unwrap().iter().all(|&t| t == Turn::R));
            }
        }
    }

    #[test]
    fn torus_sample_turns() {
        let g = shipped::torus();
        let p = EdgePath::parse(&g, "a,-b").unwrap();
        assert_eq!(g.turns(&p).unwrap(), vec![Turn::L, Turn::R]);
        assert!(matches!(EdgePath::closed(&g, vec![0, 1]), Err(Error::Backtrack(0))));
    }

    #[test]
    fn frame_and_loops() {
        let g = shipped::torus();
        let f = g.frame(0).unwrap();
        assert_eq!((f.beta, f.gamma, f.delta, f.epsilon), (1, 2, 1, 2));
        let d = dumbbell();
        assert!(matches!(d.frame(0), Err(Error::LoopEdge(_))));
        assert!(d.whitehead(0).is_err());
        assert!(d.frame(1).is_ok());
    }

    #[test]
    fn whitehead_involutive_and_face_preserving() {
        for (_, g) in shipped::all() {
            for a in 0..g.num_edges() {
                if g.is_loop(a) {
                    continue;
                }
                let (g1, _) = g.whitehead(a).unwrap();
                assert_eq!(g1.punctures(), g.punctures());
                assert_eq!(g1.genus(), g.genus());
                let (g2, _) = g1.whitehead(a).unwrap();
                assert!(g2.is_isomorphic(&g, true));
            }
        }
    }

    #[test]
    fn torus_graph_is_unique() {
        let g = shipped::torus();
        for a in 0..3 {
            assert!(g.whitehead(a).unwrap().0.is_isomorphic(&g, false));
        }
    }

    #[test]
    fn transport_avoiding_paths_unchanged() {
        let g = shipped::genus2();
        let a = 0;
        let f = g.frame(a).unwrap();
        let (g1, _) = g.whitehead(a).unwrap();
        let touched = [f.alpha, f.beta, f.gamma, f.delta, f.epsilon];
        let mut n = 0;
        for p in closed_paths(&g, 6, None) {
            if p.edges(&g).iter().any(|e| touched.contains(e)) {
                continue;
            }
            assert_eq!(transport_path(&g, &g1, a, &p).unwrap(), p);
            n += 1;
        }
        assert!(n > 0);
    }

    #[test]
    fn transport_maps_faces_to_faces() {
        for (_, g) in shipped::all() {
            for a in 0..g.num_edges() {
                let (g1, _) = g.whitehead(a).unwrap();
                let faces1: Vec<Vec<usize>> = g1.faces().into_iter().map(|f| f.boundary).collect();
                for f in g.faces() {
                    let p = EdgePath::face(&g, &f);
                    let q = transport_path(&g, &g1, a, &p).unwrap();
                    let hit = faces1.iter().any(|b| b.len() == q.len() && (0..b.len()).any(|k| q.rotate(k).hs == *b));
                    assert!(hit, "face {:?} -> {:?}", p.hs, q.hs);
                }
            }
        }
    }

    #[test]
    fn disjoint_moves_commute_on_graphs() {
        for g in [shipped::sphere4(), shipped::genus2()] {
            let mut n = 0;
            for i in 0..g.num_edges() {
                for j in 0..i {
                    if g.shared_vertices(i, j) > 0 {
                        continue;
                    }
                    let gij = g.whitehead(i).unwrap().0.whitehead(j).unwrap().0;
                    let gji = g.whitehead(j).unwrap().0.whitehead(i).unwrap().0;
                    assert!(gij.is_isomorphic(&gji, true));
                    n += 1;
                }
            }
            assert!(n > 0);
        }
    }

    #[test]
    fn renumbering_is_isomorphic() {
        let g = shipped::genus2();
        let perm = vec![3, 0, 8, 1, 7, 2, 6, 4, 5];
        let flip = vec![true, false, true, true, false, false, true, false, true];
        let h = g.renumber(&perm, &flip).unwrap();
        assert!(h.is_isomorphic(&g, true));
        for e in 0..9 {
            let (fg, fh) = (g.frame(e).unwrap(), h.frame(perm[e]).unwrap());
            let mut plus_g = fg.plus().map(|x| perm[x]);
            let mut plus_h = fh.plus();
            plus_g.sort();
            plus_h.sort();
            assert_eq!(plus_g, plus_h);
        }
    }

    #[test]
    fn face_map_is_bijective() {
        for (_, g) in shipped::all() {
            for a in 0..g.num_edges() {
                let (g1, _) = g.whitehead(a).unwrap();
                let mut m = face_map(&g, &g1, a).unwrap();
                m.sort();
                assert_eq!(m, (0..g.punctures()).collect::<Vec<_>>());
            }
        }
    }

    proptest! {
        #[test]
        fn random_move_sequences_keep_topology(seq in prop::collection::vec(0usize..9, 1..12)) {
            let mut g = shipped::genus2();
            for a in seq {
                g = g.whitehead(a % g.num_edges()).map(|(h, _)| h).unwrap_or(g);
                prop_assert_eq!((g.genus(), g.punctures()), (2, 1));
                let total: u32 = g.faces().iter().flat_map(|f| f.multiplicities.clone()).sum();
                prop_assert_eq!(total as usize, 2 * g.num_edges());
                for e in 0..g.num_edges() {
                    let col: u32 = g.faces().iter().map(|f| f.multiplicities[e]).sum();
                    prop_assert_eq!(col, 2);
                }
            }
        }

        #[test]
        fn relabeling_is_natural(a in 0usize..9, rot in 1usize..9) {
            let g = shipped::genus2();
            let n = g.num_edges();
            let perm: Vec<String> = (0..n).map(|e| g.label((e + rot) % n).to_string()).collect();
            let h = g.with_labels(perm).unwrap();
            // Both sides move the same underlying edge.
            let lhs = h.whitehead(a).unwrap().0;
            let rhs = g.whitehead(a).unwrap().0.with_labels(h.labels().to_vec()).unwrap();
            prop_assert!(lhs.is_isomorphic(&rhs, true));
        }
    }
}
