//! Vertex and edge arithmetic of the n-dimensional hypercube `Q_n`,
//! decomposition into subcubes, and canonicalization under the hypercube
//! automorphism group.
//!
//! Vertices are n-bit strings stored as integers; bit `i` of the integer is
//! position `i` of the string (zero-based throughout). An edge joins two
//! vertices differing in exactly one bit, and carries that bit index as its
//! dimension.

use std::fmt;
use std::sync::OnceLock;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::structures::{FaultSet, Matching};

/// Largest supported number of bit positions.
pub const MAX_N: u32 = 16;

/// Largest dimension for which the automorphism group is enumerated in full.
pub const MAX_CANONICAL_N: u32 = 6;

/// A vertex of `Q_n`: an n-bit string stored as an integer in `[0, 2^n)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Vertex(pub u32);

impl Vertex {
    #[inline]
    pub fn bit(self, i: u32) -> u32 {
        (self.0 >> i) & 1
    }

    /// Number of 1-bits mod 2; `Q_n` is bipartite by this parity.
    #[inline]
    pub fn parity(self) -> u32 {
        self.0.count_ones() & 1
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// The binary-string form of the vertex, lowest position first.
    pub fn bits_string(self, n: u32) -> String {
        (0..n).map(|i| if self.bit(i) == 1 { '1' } else { '0' }).collect()
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An edge of `Q_n`, stored with `lo < hi` and its dimension cached.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Edge {
    lo: Vertex,
    hi: Vertex,
    dim: u32,
}

impl Edge {
    /// Builds an edge from two adjacent vertices, normalizing the order.
    pub fn new(a: Vertex, b: Vertex) -> Result<Edge> {
        let x = a.0 ^ b.0;
        if x == 0 || !x.is_power_of_two() {
            return Err(Error::invalid(format!(
                "vertices {} and {} do not span a hypercube edge",
                a.0, b.0
            )));
        }
        let dim = x.trailing_zeros();
        let (lo, hi) = if a.0 < b.0 { (a, b) } else { (b, a) };
        Ok(Edge { lo, hi, dim })
    }

    #[inline]
    pub fn lo(self) -> Vertex {
        self.lo
    }

    #[inline]
    pub fn hi(self) -> Vertex {
        self.hi
    }

    /// The single bit position where the endpoints differ.
    #[inline]
    pub fn dim(self) -> u32 {
        self.dim
    }

    #[inline]
    pub fn endpoints(self) -> [Vertex; 2] {
        [self.lo, self.hi]
    }

    #[inline]
    pub fn touches(self, v: Vertex) -> bool {
        self.lo == v || self.hi == v
    }

    /// The endpoint other than `v`; `v` must be an endpoint.
    #[inline]
    pub fn other(self, v: Vertex) -> Vertex {
        debug_assert!(self.touches(v));
        if self.lo == v {
            self.hi
        } else {
            self.lo
        }
    }

    #[inline]
    pub fn is_disjoint(self, other: Edge) -> bool {
        !self.touches(other.lo) && !self.touches(other.hi)
    }

    pub fn is_adjacent(self, other: Edge) -> bool {
        self != other && !self.is_disjoint(other)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo.0, self.hi.0)
    }
}

/// The ambient hypercube `Q_n`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Cube {
    n: u32,
}

impl Cube {
    pub fn new(n: u32) -> Result<Cube> {
        if n < 1 || n > MAX_N {
            return Err(Error::invalid(format!(
                "dimension {n} outside supported range 1..={MAX_N}"
            )));
        }
        Ok(Cube { n })
    }

    #[inline]
    pub fn n(self) -> u32 {
        self.n
    }

    #[inline]
    pub fn vertex_count(self) -> usize {
        1usize << self.n
    }

    #[inline]
    pub fn edge_count(self) -> usize {
        (self.n as usize) << (self.n - 1)
    }

    #[inline]
    pub fn contains(self, v: Vertex) -> bool {
        (v.0 as u64) < (1u64 << self.n)
    }

    pub fn check_vertex(self, v: Vertex) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::invalid(format!("vertex {} outside Q_{}", v.0, self.n)))
        }
    }

    pub fn check_edge(self, e: Edge) -> Result<()> {
        self.check_vertex(e.hi)
    }

    /// The vertex differing from `v` in exactly bit `i`.
    pub fn neighbor(self, v: Vertex, i: u32) -> Result<Vertex> {
        if i >= self.n {
            return Err(Error::invalid(format!(
                "dimension index {i} out of range for Q_{}",
                self.n
            )));
        }
        Ok(Vertex(v.0 ^ (1 << i)))
    }

    /// Graph distance in `Q_n`: the number of differing bits.
    #[inline]
    pub fn hamming_distance(self, u: Vertex, v: Vertex) -> u32 {
        (u.0 ^ v.0).count_ones()
    }

    /// `min{d(u,x), d(u,y), d(v,x), d(v,y)}` over the four endpoint pairs.
    pub fn edge_distance(self, e: Edge, f: Edge) -> u32 {
        e.endpoints()
            .into_iter()
            .cartesian_product(f.endpoints())
            .map(|(a, b)| self.hamming_distance(a, b))
            .min()
            .unwrap()
    }

    pub fn vertices(self) -> impl Iterator<Item = Vertex> {
        (0..self.vertex_count() as u32).map(Vertex)
    }

    /// All edges, sorted by `(lo, hi)`.
    pub fn edges(self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.edge_count());
        for v in self.vertices() {
            for i in 0..self.n {
                if v.bit(i) == 0 {
                    out.push(Edge::new(v, Vertex(v.0 | (1 << i))).unwrap());
                }
            }
        }
        out.sort();
        out
    }

    /// The dimension class `E_i`: all edges along bit `i`, a perfect matching.
    pub fn dimension_class(self, i: u32) -> Vec<Edge> {
        assert!(i < self.n);
        self.vertices()
            .filter(|v| v.bit(i) == 0)
            .map(|v| Edge::new(v, Vertex(v.0 | (1 << i))).unwrap())
            .collect()
    }

    pub fn edge(self, a: Vertex, b: Vertex) -> Result<Edge> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        Edge::new(a, b)
    }
}

/// Decomposition of `Q_n` by a dimension `j`: dropping `E_j` leaves two copies
/// of `Q_{n-1}` indexed by the value of bit `j`.
#[derive(Clone, Copy, Debug)]
pub struct SubcubeSplit {
    cube: Cube,
    j: u32,
}

impl SubcubeSplit {
    pub fn new(cube: Cube, j: u32) -> Result<SubcubeSplit> {
        if cube.n < 2 {
            return Err(Error::precondition("splitting needs n >= 2"));
        }
        if j >= cube.n {
            return Err(Error::invalid(format!(
                "split dimension {j} out of range for Q_{}",
                cube.n
            )));
        }
        Ok(SubcubeSplit { cube, j })
    }

    #[inline]
    pub fn dim(self) -> u32 {
        self.j
    }

    #[inline]
    pub fn cube(self) -> Cube {
        self.cube
    }

    /// The subcube both halves are isomorphic to.
    pub fn sub(self) -> Cube {
        Cube::new(self.cube.n - 1).unwrap()
    }

    /// Which half a vertex lies in: the value of bit `j`.
    #[inline]
    pub fn side(self, v: Vertex) -> u32 {
        v.bit(self.j)
    }

    /// Drops bit `j`, mapping a vertex into `Q_{n-1}` coordinates.
    #[inline]
    pub fn project(self, v: Vertex) -> Vertex {
        let low = v.0 & ((1 << self.j) - 1);
        let high = (v.0 >> (self.j + 1)) << self.j;
        Vertex(low | high)
    }

    /// Inserts bit `j` with the given value, inverse of `project`.
    #[inline]
    pub fn lift(self, v: Vertex, side: u32) -> Vertex {
        debug_assert!(side <= 1);
        let low = v.0 & ((1 << self.j) - 1);
        let high = (v.0 >> self.j) << (self.j + 1);
        Vertex(low | high | (side << self.j))
    }

    /// The unique neighbor of `v` across the split (flip bit `j`).
    #[inline]
    pub fn across(self, v: Vertex) -> Vertex {
        Vertex(v.0 ^ (1 << self.j))
    }

    /// The crossing edge `{v, v_across}` of `E_j` at `v`.
    pub fn crossing_edge(self, v: Vertex) -> Edge {
        Edge::new(v, self.across(v)).unwrap()
    }

    /// Projects an edge lying within one half into `Q_{n-1}` coordinates.
    pub fn project_edge(self, e: Edge) -> Edge {
        debug_assert_ne!(e.dim(), self.j, "crossing edges do not project");
        Edge::new(self.project(e.lo), self.project(e.hi)).unwrap()
    }

    /// Lifts a `Q_{n-1}` edge into the given half.
    pub fn lift_edge(self, e: Edge, side: u32) -> Edge {
        Edge::new(self.lift(e.lo, side), self.lift(e.hi, side)).unwrap()
    }

    /// The image of a half-edge in the opposite half (`uv -> u_1 v_1`).
    pub fn mirror_edge(self, e: Edge) -> Edge {
        debug_assert_ne!(e.dim(), self.j);
        Edge::new(self.across(e.lo), self.across(e.hi)).unwrap()
    }
}

/// The parts of a matching/fault pair under a subcube split: the two
/// projected halves (in `Q_{n-1}` coordinates) and the crossing edges
/// (in parent coordinates).
#[derive(Clone, Debug)]
pub struct SplitParts {
    pub split: SubcubeSplit,
    pub m0: Matching,
    pub m1: Matching,
    pub m_cross: Vec<Edge>,
    pub f0: FaultSet,
    pub f1: FaultSet,
    pub f_cross: Vec<Edge>,
}

/// Splits `(M, F)` by dimension `j`. Halves are re-expressed in `Q_{n-1}`
/// coordinates via `project`; crossing edges stay in parent coordinates.
pub fn split_instance(cube: Cube, j: u32, m: &Matching, f: &FaultSet) -> Result<SplitParts> {
    let split = SubcubeSplit::new(cube, j)?;
    let mut parts = SplitParts {
        split,
        m0: Matching::empty(),
        m1: Matching::empty(),
        m_cross: Vec::new(),
        f0: FaultSet::empty(),
        f1: FaultSet::empty(),
        f_cross: Vec::new(),
    };
    let mut m0 = Vec::new();
    let mut m1 = Vec::new();
    for &e in m.edges() {
        if e.dim() == j {
            parts.m_cross.push(e);
        } else if split.side(e.lo()) == 0 {
            m0.push(split.project_edge(e));
        } else {
            m1.push(split.project_edge(e));
        }
    }
    let mut f0 = Vec::new();
    let mut f1 = Vec::new();
    for &e in f.edges() {
        if e.dim() == j {
            parts.f_cross.push(e);
        } else if split.side(e.lo()) == 0 {
            f0.push(split.project_edge(e));
        } else {
            f1.push(split.project_edge(e));
        }
    }
    parts.m0 = Matching::try_new(m0)?;
    parts.m1 = Matching::try_new(m1)?;
    parts.f0 = FaultSet::new(f0);
    parts.f1 = FaultSet::new(f1);
    Ok(parts)
}

/// Finds a dimension `j` constant on both of two disjoint edges with the two
/// constants differing, so splitting by `j` separates them.
pub fn separate_disjoint_edges(cube: Cube, e: Edge, f: Edge) -> Result<u32> {
    if cube.n < 2 {
        return Err(Error::precondition("separation needs n >= 2"));
    }
    cube.check_edge(e)?;
    cube.check_edge(f)?;
    if !e.is_disjoint(f) {
        return Err(Error::precondition(format!(
            "edges {e} and {f} share a vertex"
        )));
    }
    for j in 0..cube.n {
        if j == e.dim() || j == f.dim() {
            continue;
        }
        if e.lo().bit(j) != f.lo().bit(j) {
            return Ok(j);
        }
    }
    Err(Error::internal(format!(
        "no separating dimension for disjoint edges {e}, {f} in Q_{}",
        cube.n
    )))
}

/// An automorphism of `Q_n`: a permutation of the bit positions followed by
/// complementation of a subset of positions. The group has order `2^n * n!`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Automorphism {
    n: u32,
    /// Bit `i` of the input moves to position `perm[i]`.
    perm: [u8; MAX_N as usize],
    /// XOR-ed onto the permuted value.
    mask: u32,
}

impl Automorphism {
    pub fn new(cube: Cube, perm: &[u8], mask: u32) -> Result<Automorphism> {
        let n = cube.n;
        if perm.len() != n as usize {
            return Err(Error::invalid("permutation length must equal n"));
        }
        let mut seen = 0u32;
        for &p in perm {
            if (p as u32) >= n || seen & (1 << p) != 0 {
                return Err(Error::invalid("not a permutation of bit positions"));
            }
            seen |= 1 << p;
        }
        if mask >= (1 << n) {
            return Err(Error::invalid("mask outside Q_n"));
        }
        let mut full = [0u8; MAX_N as usize];
        full[..perm.len()].copy_from_slice(perm);
        Ok(Automorphism { n, perm: full, mask })
    }

    pub fn identity(cube: Cube) -> Automorphism {
        let mut perm = [0u8; MAX_N as usize];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = i as u8;
        }
        Automorphism { n: cube.n, perm, mask: 0 }
    }

    fn permute_bits(&self, v: u32) -> u32 {
        let mut out = 0;
        for i in 0..self.n {
            if (v >> i) & 1 == 1 {
                out |= 1 << self.perm[i as usize];
            }
        }
        out
    }

    pub fn apply(&self, v: Vertex) -> Vertex {
        Vertex(self.permute_bits(v.0) ^ self.mask)
    }

    pub fn apply_edge(&self, e: Edge) -> Edge {
        Edge::new(self.apply(e.lo()), self.apply(e.hi())).unwrap()
    }

    /// `self.compose(other)` applies `other` first, then `self`.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        debug_assert_eq!(self.n, other.n);
        let mut perm = [0u8; MAX_N as usize];
        for i in 0..self.n as usize {
            perm[i] = self.perm[other.perm[i] as usize];
        }
        Automorphism {
            n: self.n,
            perm,
            mask: self.permute_bits(other.mask) ^ self.mask,
        }
    }

    pub fn inverse(&self) -> Automorphism {
        let mut inv = [0u8; MAX_N as usize];
        for i in 0..self.n as usize {
            inv[self.perm[i] as usize] = i as u8;
        }
        let mut out = Automorphism { n: self.n, perm: inv, mask: 0 };
        out.mask = out.permute_bits(self.mask);
        out
    }
}

/// The full automorphism group of `Q_n`, enumerated with per-element vertex
/// tables. Construction is limited to `n <= MAX_CANONICAL_N`.
pub struct AutGroup {
    cube: Cube,
    elements: Vec<Automorphism>,
    tables: Vec<Box<[u16]>>,
}

static GROUP_CACHE: [OnceLock<AutGroup>; (MAX_CANONICAL_N + 1) as usize] =
    [const { OnceLock::new() }; (MAX_CANONICAL_N + 1) as usize];

impl AutGroup {
    pub fn new(cube: Cube) -> Result<AutGroup> {
        if cube.n > MAX_CANONICAL_N {
            return Err(Error::Unsupported(format!(
                "automorphism enumeration limited to n <= {MAX_CANONICAL_N}, got {}",
                cube.n
            )));
        }
        let n = cube.n;
        let nv = cube.vertex_count();
        let mut elements = Vec::new();
        let mut tables = Vec::new();
        for perm in (0..n as u8).permutations(n as usize) {
            for mask in 0..(1u32 << n) {
                let a = Automorphism::new(cube, &perm, mask)?;
                let table: Box<[u16]> = (0..nv)
                    .map(|v| a.apply(Vertex(v as u32)).0 as u16)
                    .collect();
                elements.push(a);
                tables.push(table);
            }
        }
        Ok(AutGroup { cube, elements, tables })
    }

    /// Shared, lazily built group for small `n`.
    pub fn get(cube: Cube) -> Result<&'static AutGroup> {
        if cube.n > MAX_CANONICAL_N {
            return Err(Error::Unsupported(format!(
                "canonicalization limited to n <= {MAX_CANONICAL_N}, got {}",
                cube.n
            )));
        }
        Ok(GROUP_CACHE[cube.n as usize].get_or_init(|| AutGroup::new(cube).unwrap()))
    }

    pub fn cube(&self) -> Cube {
        self.cube
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Automorphism] {
        &self.elements
    }

    #[inline]
    pub fn apply_vertex(&self, idx: usize, v: Vertex) -> Vertex {
        Vertex(self.tables[idx][v.index()] as u32)
    }

    #[inline]
    pub fn apply_edge(&self, idx: usize, e: Edge) -> Edge {
        Edge::new(self.apply_vertex(idx, e.lo()), self.apply_vertex(idx, e.hi())).unwrap()
    }

    /// The image of an edge set, sorted into canonical order.
    pub fn apply_edges_sorted(&self, idx: usize, edges: &[Edge]) -> Vec<Edge> {
        let mut out: Vec<Edge> = edges.iter().map(|&e| self.apply_edge(idx, e)).collect();
        out.sort();
        out
    }

    /// Indices of group elements fixing the given edge set (as a set).
    pub fn stabilizer_of(&self, edges: &[Edge]) -> Vec<usize> {
        let mut sorted: Vec<Edge> = edges.to_vec();
        sorted.sort();
        (0..self.len())
            .filter(|&i| self.apply_edges_sorted(i, &sorted) == sorted)
            .collect()
    }
}

/// A canonical representative of `(Q_n, M, F)` under the automorphism group:
/// two instances get the same class exactly when some automorphism maps one
/// onto the other, matching M to M and F to F.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct InstanceClass {
    pub cube: Cube,
    pub matching: Matching,
    pub faults: FaultSet,
}

impl fmt::Display for InstanceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} m=", self.cube.n())?;
        if self.matching.is_empty() {
            write!(f, "-")?;
        } else {
            write!(f, "{}", self.matching.edges().iter().map(|e| e.to_string()).join(","))?;
        }
        write!(f, " f=")?;
        if self.faults.is_empty() {
            write!(f, "-")?;
        } else {
            write!(f, "{}", self.faults.edges().iter().map(|e| e.to_string()).join(","))?;
        }
        Ok(())
    }
}

/// Lexicographic minimum of `(g(M), g(F))` over the full automorphism group.
pub fn canonicalize(cube: Cube, m: &Matching, f: &FaultSet) -> Result<InstanceClass> {
    let group = AutGroup::get(cube)?;
    let mut best: Option<(Vec<Edge>, Vec<Edge>)> = None;
    for i in 0..group.len() {
        let mi = group.apply_edges_sorted(i, m.edges());
        if let Some((bm, _)) = &best {
            if mi > *bm {
                continue;
            }
            let fi = group.apply_edges_sorted(i, f.edges());
            if (&mi, &fi) < (bm, &best.as_ref().unwrap().1) {
                best = Some((mi, fi));
            }
        } else {
            let fi = group.apply_edges_sorted(i, f.edges());
            best = Some((mi, fi));
        }
    }
    let (bm, bf) = best.unwrap();
    Ok(InstanceClass {
        cube,
        matching: Matching::try_new(bm).expect("automorphism image of a matching"),
        faults: FaultSet::new(bf),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::is_matching;

    fn v(x: u32) -> Vertex {
        Vertex(x)
    }

    #[test]
    fn neighbor_flips_one_bit() {
        let q3 = Cube::new(3).unwrap();
        assert_eq!(q3.neighbor(v(0b000), 0).unwrap(), v(0b001));
        assert_eq!(q3.neighbor(v(0b101), 2).unwrap(), v(0b001));
        assert!(q3.neighbor(v(0), 3).is_err());
    }

    #[test]
    fn neighbor_is_an_involution() {
        let q4 = Cube::new(4).unwrap();
        for u in q4.vertices() {
            for i in 0..4 {
                let w = q4.neighbor(u, i).unwrap();
                assert_eq!(q4.neighbor(w, i).unwrap(), u);
                assert_eq!(q4.hamming_distance(u, w), 1);
            }
        }
    }

    #[test]
    fn hamming_examples() {
        let q3 = Cube::new(3).unwrap();
        let q4 = Cube::new(4).unwrap();
        assert_eq!(q3.hamming_distance(v(0b000), v(0b101)), 2);
        assert_eq!(q3.hamming_distance(v(0b011), v(0b011)), 0);
        assert_eq!(q4.hamming_distance(v(0b0110), v(0b1001)), 4);
    }

    #[test]
    fn hamming_equals_bfs_distance() {
        // Exhaustive for n <= 5: breadth-first search over the adjacency
        // structure must agree with popcount of the xor.
        for n in 1..=5 {
            let cube = Cube::new(n).unwrap();
            let nv = cube.vertex_count();
            for s in cube.vertices() {
                let mut dist = vec![u32::MAX; nv];
                let mut queue = std::collections::VecDeque::new();
                dist[s.index()] = 0;
                queue.push_back(s);
                while let Some(u) = queue.pop_front() {
                    for i in 0..n {
                        let w = cube.neighbor(u, i).unwrap();
                        if dist[w.index()] == u32::MAX {
                            dist[w.index()] = dist[u.index()] + 1;
                            queue.push_back(w);
                        }
                    }
                }
                for t in cube.vertices() {
                    assert_eq!(dist[t.index()], cube.hamming_distance(s, t));
                }
            }
        }
    }

    #[test]
    fn edge_normalization_and_errors() {
        let e = Edge::new(v(0b110), v(0b010)).unwrap();
        assert_eq!(e.lo(), v(0b010));
        assert_eq!(e.hi(), v(0b110));
        assert_eq!(e.dim(), 2);
        assert!(Edge::new(v(0), v(3)).is_err());
        assert!(Edge::new(v(5), v(5)).is_err());
    }

    #[test]
    fn edge_distance_examples() {
        let q3 = Cube::new(3).unwrap();
        let e = q3.edge(v(0b000), v(0b001)).unwrap();
        let f = q3.edge(v(0b000), v(0b010)).unwrap();
        let g = q3.edge(v(0b110), v(0b111)).unwrap();
        assert_eq!(q3.edge_distance(e, f), 0);
        assert_eq!(q3.edge_distance(e, g), 2);
    }

    #[test]
    fn q3_antipodal_edge_is_a_unique_fixed_point_free_involution() {
        // Every edge of Q_3 has exactly one partner at edge distance 2, and
        // the pairing is an involution without fixed points.
        let q3 = Cube::new(3).unwrap();
        let edges = q3.edges();
        let mut partner = std::collections::HashMap::new();
        for &e in &edges {
            let far: Vec<Edge> = edges
                .iter()
                .copied()
                .filter(|&f| q3.edge_distance(e, f) == 2)
                .collect();
            assert_eq!(far.len(), 1, "edge {e} should have one partner at distance 2");
            partner.insert(e, far[0]);
        }
        for (&e, &f) in &partner {
            assert_ne!(e, f);
            assert_eq!(partner[&f], e);
        }
    }

    #[test]
    fn split_projects_and_lifts() {
        for n in 2..=5 {
            let cube = Cube::new(n).unwrap();
            for j in 0..n {
                let split = SubcubeSplit::new(cube, j).unwrap();
                for u in cube.vertices() {
                    let side = split.side(u);
                    assert_eq!(split.lift(split.project(u), side), u);
                }
                for e in cube.edges() {
                    if e.dim() != j {
                        let side = split.side(e.lo());
                        assert_eq!(split.lift_edge(split.project_edge(e), side), e);
                    }
                }
            }
        }
    }

    #[test]
    fn split_instance_partitions_and_round_trips() {
        let q2 = Cube::new(2).unwrap();
        let m = Matching::try_new(vec![q2.edge(v(0b00), v(0b01)).unwrap()]).unwrap();
        let parts = split_instance(q2, 1, &m, &FaultSet::empty()).unwrap();
        assert_eq!(parts.m0.len(), 1);
        assert_eq!(parts.m0.edges()[0], Edge::new(v(0), v(1)).unwrap());
        assert!(parts.m1.is_empty());
        assert!(parts.m_cross.is_empty());

        // A perfect matching inside one dimension class crosses entirely.
        let q4 = Cube::new(4).unwrap();
        let m = Matching::try_new(q4.dimension_class(2)).unwrap();
        let parts = split_instance(q4, 2, &m, &FaultSet::empty()).unwrap();
        assert_eq!(parts.m_cross.len(), 8);
        assert!(parts.m0.is_empty() && parts.m1.is_empty());

        // Lifting both halves and the crossing edges reconstructs the input.
        let m = Matching::try_new(vec![
            q4.edge(v(0b0000), v(0b0001)).unwrap(),
            q4.edge(v(0b0010), v(0b1010)).unwrap(),
            q4.edge(v(0b0100), v(0b0101)).unwrap(),
        ])
        .unwrap();
        let f = FaultSet::new(vec![q4.edge(v(0b1000), v(0b1001)).unwrap()]);
        for j in 0..4 {
            let parts = split_instance(q4, j, &m, &f).unwrap();
            let mut rebuilt: Vec<Edge> = parts.m_cross.clone();
            for &e in parts.m0.edges() {
                rebuilt.push(parts.split.lift_edge(e, 0));
            }
            for &e in parts.m1.edges() {
                rebuilt.push(parts.split.lift_edge(e, 1));
            }
            rebuilt.sort();
            assert_eq!(rebuilt, m.edges());
            let mut rf: Vec<Edge> = parts.f_cross.clone();
            for &e in parts.f0.edges() {
                rf.push(parts.split.lift_edge(e, 0));
            }
            for &e in parts.f1.edges() {
                rf.push(parts.split.lift_edge(e, 1));
            }
            rf.sort();
            assert_eq!(rf, f.edges());
        }
    }

    #[test]
    fn separate_disjoint_edges_examples() {
        let q3 = Cube::new(3).unwrap();
        let e = q3.edge(v(0b000), v(0b001)).unwrap();
        let f = q3.edge(v(0b010), v(0b110)).unwrap();
        assert_eq!(separate_disjoint_edges(q3, e, f).unwrap(), 1);

        let q2 = Cube::new(2).unwrap();
        let e = q2.edge(v(0b00), v(0b01)).unwrap();
        let f = q2.edge(v(0b10), v(0b11)).unwrap();
        assert_eq!(separate_disjoint_edges(q2, e, f).unwrap(), 1);

        let g = q3.edge(v(0b000), v(0b010)).unwrap();
        assert!(separate_disjoint_edges(q3, e, g).is_err());
    }

    #[test]
    fn separate_disjoint_edges_exhaustive_small() {
        // Every disjoint pair in Q_3 and Q_4 admits a separating dimension
        // satisfying the stated post-condition.
        for n in [3, 4] {
            let cube = Cube::new(n).unwrap();
            let edges = cube.edges();
            for (i, &e) in edges.iter().enumerate() {
                for &f in &edges[i + 1..] {
                    if !e.is_disjoint(f) {
                        continue;
                    }
                    let j = separate_disjoint_edges(cube, e, f).unwrap();
                    assert_ne!(j, e.dim());
                    assert_ne!(j, f.dim());
                    assert_eq!(e.lo().bit(j), e.hi().bit(j));
                    assert_eq!(f.lo().bit(j), f.hi().bit(j));
                    assert_ne!(e.lo().bit(j), f.lo().bit(j));
                }
            }
        }
    }

    #[test]
    fn automorphism_algebra() {
        let q4 = Cube::new(4).unwrap();
        let a = Automorphism::new(q4, &[2, 0, 3, 1], 0b0110).unwrap();
        let b = Automorphism::new(q4, &[1, 3, 0, 2], 0b1001).unwrap();
        let ab = a.compose(&b);
        for u in q4.vertices() {
            assert_eq!(ab.apply(u), a.apply(b.apply(u)));
            assert_eq!(a.inverse().apply(a.apply(u)), u);
        }
        // Adjacency is preserved.
        for e in q4.edges() {
            let img = a.apply_edge(e);
            assert_eq!(q4.hamming_distance(img.lo(), img.hi()), 1);
        }
    }

    #[test]
    fn group_order_is_2n_factorial() {
        for n in 1..=4 {
            let cube = Cube::new(n).unwrap();
            let group = AutGroup::new(cube).unwrap();
            let expected = (1usize << n) * (1..=n as usize).product::<usize>();
            assert_eq!(group.len(), expected);
            let distinct: std::collections::HashSet<_> = group
                .elements()
                .iter()
                .map(|a| cube.vertices().map(|u| a.apply(u).0).collect::<Vec<_>>())
                .collect();
            assert_eq!(distinct.len(), expected, "elements act distinctly");
        }
    }

    #[test]
    fn canonicalize_is_constant_on_edge_orbits() {
        let q3 = Cube::new(3).unwrap();
        let m1 = Matching::try_new(vec![q3.edge(v(0b000), v(0b001)).unwrap()]).unwrap();
        let m2 = Matching::try_new(vec![q3.edge(v(0b010), v(0b110)).unwrap()]).unwrap();
        let c1 = canonicalize(q3, &m1, &FaultSet::empty()).unwrap();
        let c2 = canonicalize(q3, &m2, &FaultSet::empty()).unwrap();
        assert_eq!(c1, c2);
    }

    #[test]
    fn canonicalize_is_idempotent_and_orbit_invariant() {
        let q4 = Cube::new(4).unwrap();
        let group = AutGroup::get(q4).unwrap();
        let m = Matching::try_new(vec![
            q4.edge(v(0b0000), v(0b0001)).unwrap(),
            q4.edge(v(0b0110), v(0b1110)).unwrap(),
        ])
        .unwrap();
        let f = FaultSet::new(vec![q4.edge(v(0b0010), v(0b0011)).unwrap()]);
        let canon = canonicalize(q4, &m, &f).unwrap();
        let again = canonicalize(q4, &canon.matching, &canon.faults).unwrap();
        assert_eq!(canon, again);
        // Applying any automorphism first does not change the class; step
        // through a spread of the 384 group elements.
        for idx in (0..group.len()).step_by(17) {
            let mi = Matching::try_new(group.apply_edges_sorted(idx, m.edges())).unwrap();
            let fi = FaultSet::new(group.apply_edges_sorted(idx, f.edges()));
            assert_eq!(canonicalize(q4, &mi, &fi).unwrap(), canon);
        }
    }

    #[test]
    fn canonicalize_rejects_large_dimension() {
        let q7 = Cube::new(7).unwrap();
        let m = Matching::empty();
        match canonicalize(q7, &m, &FaultSet::empty()) {
            Err(Error::Unsupported(_)) => {}
            other => panic!("expected unsupported, got {other:?}"),
        }
    }

    #[test]
    fn matchings_of_q3_have_three_classes_at_sizes_two_and_three() {
        // Orbit counting for small matchings; sizes two and three both fall
        // into exactly three classes.
        let q3 = Cube::new(3).unwrap();
        let edges = q3.edges();
        for (size, expected) in [(2usize, 3usize), (3, 3)] {
            let mut classes = std::collections::BTreeSet::new();
            let mut stack: Vec<(usize, Vec<Edge>)> = vec![(0, Vec::new())];
            while let Some((start, chosen)) = stack.pop() {
                if chosen.len() == size {
                    if is_matching(&chosen) {
                        let m = Matching::try_new(chosen.clone()).unwrap();
                        classes.insert(canonicalize(q3, &m, &FaultSet::empty()).unwrap());
                    }
                    continue;
                }
                for i in start..edges.len() {
                    if chosen.iter().all(|&c| c.is_disjoint(edges[i])) {
                        let mut next = chosen.clone();
                        next.push(edges[i]);
                        stack.push((i + 1, next));
                    }
                }
            }
            assert_eq!(classes.len(), expected, "size-{size} matching classes in Q_3");
        }
    }
}
