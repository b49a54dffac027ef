//! Contract-checked building blocks: spanning paths and cycles of `Q_n`
//! through prescribed edges and around faulty ones, backed by a pruned
//! backtracking search.
//!
//! Each operation states a hypothesis under which a witness is known to
//! exist. Under its hypothesis an operation either returns a witness or
//! reports an internal invariant violation; it never calls an instance
//! infeasible. The raw `solve` entry point gives direct access to the
//! search, including certified infeasibility.

mod search;

use std::sync::atomic::{AtomicU64, Ordering};

use crate::cube::{Cube, Edge, Vertex};
use crate::error::{Error, Result};
use crate::structures::{
    FaultSet, HamCycle, HamPath, LinearForest, Matching, Path, SpanningPathPair,
};

pub use search::SOLVER_MAX_N;
use search::{solve_raw, RawMode, RawOutcome, RawQuery};

/// Default search budget: plenty for every guaranteed call in the supported
/// envelope, while still letting runaway queries fail loudly.
pub const DEFAULT_NODE_LIMIT: u64 = 100_000_000;

static CONFIGURED_LIMIT: AtomicU64 = AtomicU64::new(DEFAULT_NODE_LIMIT);

/// Overrides the default search budget process-wide (used by the CLI's
/// environment knob). Call before issuing queries.
pub fn set_default_node_limit(limit: u64) {
    CONFIGURED_LIMIT.store(limit.max(1), Ordering::Relaxed);
}

/// Cap on search-tree nodes explored by a single query.
#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    pub node_limit: u64,
}

impl Default for SearchBudget {
    fn default() -> SearchBudget {
        SearchBudget {
            node_limit: CONFIGURED_LIMIT.load(Ordering::Relaxed),
        }
    }
}

/// What a query asks for: a Hamiltonian cycle, or a Hamiltonian path with
/// fixed endpoints.
#[derive(Clone, Copy, Debug)]
pub enum QueryKind {
    Cycle,
    Path { from: Vertex, to: Vertex },
}

/// A Hamiltonian existence query with prescribed and forbidden edges.
#[derive(Clone, Debug)]
pub struct PathQuery {
    pub cube: Cube,
    pub kind: QueryKind,
    pub required: Vec<Edge>,
    pub forbidden: Vec<Edge>,
}

impl PathQuery {
    pub fn new(
        cube: Cube,
        kind: QueryKind,
        required: Vec<Edge>,
        forbidden: Vec<Edge>,
    ) -> Result<PathQuery> {
        for &e in required.iter().chain(forbidden.iter()) {
            cube.check_edge(e)?;
        }
        if let QueryKind::Path { from, to } = kind {
            cube.check_vertex(from)?;
            cube.check_vertex(to)?;
            if from == to {
                return Err(Error::invalid("path endpoints must be distinct"));
            }
        }
        if required.iter().any(|e| forbidden.contains(e)) {
            return Err(Error::invalid("an edge is both required and forbidden"));
        }
        Ok(PathQuery { cube, kind, required, forbidden })
    }

    pub fn cycle(cube: Cube, required: Vec<Edge>, forbidden: Vec<Edge>) -> Result<PathQuery> {
        PathQuery::new(cube, QueryKind::Cycle, required, forbidden)
    }
}

/// Result of a solve: a witness, or a certificate that the exhausted search
/// space contains none. Budget exhaustion is an error, distinguishing
/// "unknown" from "infeasible".
#[derive(Clone, Debug)]
pub enum SolveOutcome {
    Path(HamPath),
    Cycle(HamCycle),
    Infeasible,
}

/// Runs the backtracking search on a query.
pub fn solve(q: &PathQuery, budget: SearchBudget) -> Result<SolveOutcome> {
    let raw = RawQuery {
        cube: q.cube,
        mode: match q.kind {
            QueryKind::Cycle => RawMode::Cycle,
            QueryKind::Path { from, to } => RawMode::Path { from, to },
        },
        required: q.required.clone(),
        forbidden: q.forbidden.clone(),
        excluded: Vec::new(),
        virtual_edge: None,
    };
    match solve_raw(&raw, budget.node_limit)? {
        RawOutcome::Infeasible => Ok(SolveOutcome::Infeasible),
        RawOutcome::Found(seq) => Ok(match q.kind {
            QueryKind::Cycle => SolveOutcome::Cycle(HamCycle::try_new(q.cube, seq)?),
            QueryKind::Path { .. } => SolveOutcome::Path(HamPath::try_new(q.cube, seq)?),
        }),
    }
}

/// Maps outcomes of searches whose hypotheses guarantee a witness: both
/// infeasibility and budget exhaustion become internal invariant errors.
fn expect_cycle(cube: Cube, raw: &RawQuery, what: &str) -> Result<HamCycle> {
    match solve_raw(raw, SearchBudget::default().node_limit) {
        Ok(RawOutcome::Found(seq)) => HamCycle::try_new(cube, seq),
        Ok(RawOutcome::Infeasible) => Err(Error::internal(format!(
            "guaranteed cycle not found: {what}"
        ))),
        Err(Error::BudgetExceeded { explored }) => Err(Error::internal(format!(
            "budget exhausted ({explored} nodes) on guaranteed cycle: {what}"
        ))),
        Err(e) => Err(e),
    }
}

fn expect_path(raw: &RawQuery, what: &str) -> Result<Vec<Vertex>> {
    match solve_raw(raw, SearchBudget::default().node_limit) {
        Ok(RawOutcome::Found(seq)) => Ok(seq),
        Ok(RawOutcome::Infeasible) => Err(Error::internal(format!(
            "guaranteed path not found: {what}"
        ))),
        Err(Error::BudgetExceeded { explored }) => Err(Error::internal(format!(
            "budget exhausted ({explored} nodes) on guaranteed path: {what}"
        ))),
        Err(e) => Err(e),
    }
}

fn require_odd(cube: Cube, x: Vertex, y: Vertex) -> Result<()> {
    if cube.hamming_distance(x, y) % 2 == 0 {
        return Err(Error::precondition(format!(
            "vertices {x} and {y} must be an odd distance apart"
        )));
    }
    Ok(())
}

/// Hamiltonian path between two vertices at odd distance, for any `n >= 1`.
///
/// Built by direct recursion: split on a dimension where the endpoints
/// differ, route each half, and join across one crossing edge. No search.
pub fn havel_path(cube: Cube, x: Vertex, y: Vertex) -> Result<HamPath> {
    cube.check_vertex(x)?;
    cube.check_vertex(y)?;
    require_odd(cube, x, y)?;
    let seq = havel_seq(cube, x, y);
    let path = HamPath::try_new(cube, seq)?;
    debug_assert_eq!(path.first(), x);
    debug_assert_eq!(path.last(), y);
    Ok(path)
}

fn havel_seq(cube: Cube, x: Vertex, y: Vertex) -> Vec<Vertex> {
    if cube.n() == 1 {
        return vec![x, y];
    }
    let j = (x.0 ^ y.0).trailing_zeros();
    let split = crate::cube::SubcubeSplit::new(cube, j).unwrap();
    let side_x = split.side(x);
    // Any vertex in x's half with the parity of y, other than x itself,
    // leaves both halves with odd-distance endpoint pairs.
    let w = cube
        .vertices()
        .find(|&w| split.side(w) == side_x && w != x && w.parity() == y.parity())
        .expect("a crossing point always exists for n >= 2");
    let sub = split.sub();
    let first = havel_seq(sub, split.project(x), split.project(w));
    let second = havel_seq(sub, split.project(w), split.project(y));
    let mut seq: Vec<Vertex> = first.into_iter().map(|v| split.lift(v, side_x)).collect();
    seq.extend(second.into_iter().map(|v| split.lift(v, 1 - side_x)));
    seq
}

/// Hamiltonian path between odd-distance endpoints passing through one
/// prescribed edge (`n >= 2`, the edge distinct from the endpoint pair).
pub fn path_through_edge(cube: Cube, x: Vertex, y: Vertex, e: Edge) -> Result<HamPath> {
    if cube.n() < 2 {
        return Err(Error::precondition("needs n >= 2"));
    }
    cube.check_vertex(x)?;
    cube.check_vertex(y)?;
    cube.check_edge(e)?;
    require_odd(cube, x, y)?;
    if e.touches(x) && e.touches(y) {
        return Err(Error::precondition(format!(
            "prescribed edge {e} equals the endpoint pair"
        )));
    }
    let raw = RawQuery::path(cube, x, y, vec![e], Vec::new());
    let seq = expect_path(&raw, &format!("path {x}..{y} through {e}"))?;
    HamPath::try_new(cube, seq)
}

/// Hamiltonian path between odd-distance endpoints avoiding at most one
/// faulty edge (`n >= 3`).
pub fn path_avoiding_faults(cube: Cube, u: Vertex, v: Vertex, faults: &FaultSet) -> Result<HamPath> {
    if cube.n() < 3 {
        return Err(Error::precondition("needs n >= 3"));
    }
    if faults.len() > 1 {
        return Err(Error::precondition(format!(
            "at most one fault allowed, got {}",
            faults.len()
        )));
    }
    cube.check_vertex(u)?;
    cube.check_vertex(v)?;
    require_odd(cube, u, v)?;
    let raw = RawQuery::path(cube, u, v, Vec::new(), faults.edges().to_vec());
    let seq = expect_path(&raw, &format!("path {u}..{v} avoiding {} faults", faults.len()))?;
    HamPath::try_new(cube, seq)
}

/// Spanning path pair `(P_xy, P_uv)` of `Q_n` for pairwise distinct vertices
/// with both endpoint distances odd (`n >= 2`).
///
/// With `pin_xy`, the first path is exactly the edge `xy` (requires
/// `d(x,y) = 1`). That pinning is impossible in exactly one shape: `n = 3`,
/// `d(u,v) = 1` and the two edges at edge distance 2, reported as
/// `ExceptionalPair`.
pub fn spanning_two_paths(
    cube: Cube,
    x: Vertex,
    y: Vertex,
    u: Vertex,
    v: Vertex,
    pin_xy: bool,
) -> Result<SpanningPathPair> {
    if cube.n() < 2 {
        return Err(Error::precondition("needs n >= 2"));
    }
    for w in [x, y, u, v] {
        cube.check_vertex(w)?;
    }
    let mut distinct = vec![x, y, u, v];
    distinct.sort();
    distinct.dedup();
    if distinct.len() != 4 {
        return Err(Error::precondition("endpoints must be pairwise distinct"));
    }
    require_odd(cube, x, y)?;
    require_odd(cube, u, v)?;

    if pin_xy {
        if cube.hamming_distance(x, y) != 1 {
            return Err(Error::precondition("pinning requires d(x,y) = 1"));
        }
        let xy = Edge::new(x, y)?;
        if cube.n() == 3 && cube.hamming_distance(u, v) == 1 {
            let uv = Edge::new(u, v)?;
            if cube.edge_distance(xy, uv) == 2 {
                return Err(Error::ExceptionalPair { xy, uv });
            }
        }
        let raw = RawQuery {
            cube,
            mode: RawMode::Path { from: u, to: v },
            required: Vec::new(),
            forbidden: Vec::new(),
            excluded: vec![x, y],
            virtual_edge: None,
        };
        let seq = expect_path(&raw, &format!("pair pinning {xy} against {u}..{v}"))?;
        let p1 = Path::try_new(cube, vec![x, y])?;
        let p2 = Path::try_new(cube, seq)?;
        return SpanningPathPair::try_new(cube, p1, p2);
    }

    // General case: a Hamiltonian walk from x to v through a virtual edge
    // from y to u splits into the two spanning paths. The real edge yu, if
    // it exists, cannot appear in any valid pair, so forbid it. The walk
    // can equally be grown from the other pair of outer endpoints; ladder
    // the budget over both directions so a slow one cannot starve the
    // other.
    let forbidden = if cube.hamming_distance(y, u) == 1 {
        vec![Edge::new(y, u)?]
    } else {
        Vec::new()
    };
    let query = |from: Vertex, to: Vertex, hop: (Vertex, Vertex)| RawQuery {
        cube,
        mode: RawMode::Path { from, to },
        required: Vec::new(),
        forbidden: forbidden.clone(),
        excluded: Vec::new(),
        virtual_edge: Some(hop),
    };
    let directions = [query(x, v, (y, u)), query(v, x, (u, y))];
    let full_budget = SearchBudget::default().node_limit;
    let mut open = [true, true];
    let mut slice: u64 = 50_000;
    let mut spent: u64 = 0;
    let seq = 'ladder: loop {
        if !open[0] && !open[1] {
            return Err(Error::internal(format!(
                "guaranteed spanning pair missing: {x}..{y} / {u}..{v}"
            )));
        }
        for (i, raw) in directions.iter().enumerate() {
            if !open[i] {
                continue;
            }
            if spent >= full_budget {
                return Err(Error::internal(format!(
                    "budget exhausted on guaranteed spanning pair {x}..{y} / {u}..{v}"
                )));
            }
            match solve_raw(raw, slice.min(full_budget - spent)) {
                Ok(RawOutcome::Found(mut seq)) => {
                    if i == 1 {
                        seq.reverse();
                    }
                    break 'ladder seq;
                }
                Ok(RawOutcome::Infeasible) => open[i] = false,
                Err(Error::BudgetExceeded { explored }) => spent += explored,
                Err(e) => return Err(e),
            }
        }
        slice = slice.saturating_mul(8);
    };
    let cut = seq
        .windows(2)
        .position(|w| w[0] == y && w[1] == u)
        .ok_or_else(|| Error::internal("virtual edge missing from walk"))?;
    let p1 = Path::try_new(cube, seq[..=cut].to_vec())?;
    let p2 = Path::try_new(cube, seq[cut + 1..].to_vec())?;
    debug_assert_eq!((p1.first(), p1.last()), (x, y));
    debug_assert_eq!((p2.first(), p2.last()), (u, v));
    SpanningPathPair::try_new(cube, p1, p2)
}

/// Hamiltonian cycle through every edge of a linear forest of at most
/// `2n - 3` edges (`n >= 2`). The forest precondition is the exact
/// feasibility boundary: non-forests are rejected.
pub fn cycle_through_forest(cube: Cube, forest: &LinearForest) -> Result<HamCycle> {
    if cube.n() < 2 {
        return Err(Error::precondition("needs n >= 2"));
    }
    if forest.len() > (2 * cube.n() - 3) as usize {
        return Err(Error::precondition(format!(
            "forest of {} edges exceeds the 2n-3 bound",
            forest.len()
        )));
    }
    for &e in forest.edges() {
        cube.check_edge(e)?;
    }
    let raw = RawQuery::cycle(cube, forest.edges().to_vec(), Vec::new());
    expect_cycle(cube, &raw, &format!("cycle through forest of {}", forest.len()))
}

/// Hamiltonian cycle through one prescribed edge avoiding up to `n - 2`
/// faults (`n >= 3`).
pub fn cycle_avoiding_faults_through_edge(cube: Cube, e: Edge, faults: &FaultSet) -> Result<HamCycle> {
    if cube.n() < 3 {
        return Err(Error::precondition("needs n >= 3"));
    }
    if faults.len() > (cube.n() - 2) as usize {
        return Err(Error::precondition(format!(
            "{} faults exceed the n-2 bound",
            faults.len()
        )));
    }
    cube.check_edge(e)?;
    if faults.contains(e) {
        return Err(Error::precondition(format!("prescribed edge {e} is faulty")));
    }
    let raw = RawQuery::cycle(cube, vec![e], faults.edges().to_vec());
    expect_cycle(cube, &raw, &format!("cycle through {e} avoiding {} faults", faults.len()))
}

/// Hamiltonian cycle through a nonempty linear forest avoiding faults, with
/// the combined bound `|F| <= n - 2 - |E|/2` (`n >= 2`).
pub fn cycle_through_forest_avoiding_faults(
    cube: Cube,
    forest: &LinearForest,
    faults: &FaultSet,
) -> Result<HamCycle> {
    if cube.n() < 2 {
        return Err(Error::precondition("needs n >= 2"));
    }
    let n = cube.n() as i64;
    let len = forest.len() as i64;
    if len < 1 || len > 2 * n - 3 {
        return Err(Error::precondition(format!(
            "forest size {len} outside 1..=2n-3"
        )));
    }
    if (faults.len() as i64) > n - 2 - len / 2 {
        return Err(Error::precondition(format!(
            "{} faults exceed the n-2-|E|/2 bound",
            faults.len()
        )));
    }
    for &e in forest.edges() {
        cube.check_edge(e)?;
        if faults.contains(e) {
            return Err(Error::precondition(format!("prescribed edge {e} is faulty")));
        }
    }
    let raw = RawQuery::cycle(cube, forest.edges().to_vec(), faults.edges().to_vec());
    expect_cycle(
        cube,
        &raw,
        &format!("cycle through {} edges avoiding {} faults", forest.len(), faults.len()),
    )
}

/// Hamiltonian cycle alternating a perfect matching of `Q_n` with another
/// perfect matching of `Q_n` (`2 <= n <= 4`).
///
/// Any Hamiltonian cycle through a perfect matching alternates it with its
/// complement on the cycle, so the complement is automatically the second
/// perfect matching.
pub fn complementary_perfect_matching(cube: Cube, m: &Matching) -> Result<HamCycle> {
    if cube.n() < 2 {
        return Err(Error::precondition("needs n >= 2"));
    }
    if cube.n() > 4 {
        return Err(Error::Unsupported(
            "perfect-matching extension is only provided for n <= 4".into(),
        ));
    }
    if !m.is_perfect(cube) {
        return Err(Error::precondition(format!(
            "matching of {} edges is not perfect in Q_{}",
            m.len(),
            cube.n()
        )));
    }
    for &e in m.edges() {
        cube.check_edge(e)?;
    }
    let raw = RawQuery::cycle(cube, m.edges().to_vec(), Vec::new());
    let cycle = expect_cycle(cube, &raw, "cycle through a perfect matching")?;
    debug_assert!({
        let rest: Vec<Edge> = cycle
            .edges()
            .into_iter()
            .filter(|e| !m.contains(*e))
            .collect();
        crate::structures::is_matching(&rest) && rest.len() == m.len()
    });
    Ok(cycle)
}

/// Internal access for siblings needing excluded vertices or raw control.
pub(crate) fn raw_path_excluding(
    cube: Cube,
    from: Vertex,
    to: Vertex,
    required: Vec<Edge>,
    forbidden: Vec<Edge>,
    excluded: Vec<Vertex>,
    what: &str,
) -> Result<Vec<Vertex>> {
    let raw = RawQuery {
        cube,
        mode: RawMode::Path { from, to },
        required,
        forbidden,
        excluded,
        virtual_edge: None,
    };
    expect_path(&raw, what)
}

/// Cycle query returning feasibility instead of demanding existence.
pub(crate) fn try_cycle(
    cube: Cube,
    required: Vec<Edge>,
    forbidden: Vec<Edge>,
) -> Result<Option<HamCycle>> {
    let raw = RawQuery::cycle(cube, required, forbidden);
    match solve_raw(&raw, SearchBudget::default().node_limit)? {
        RawOutcome::Found(seq) => Ok(Some(HamCycle::try_new(cube, seq)?)),
        RawOutcome::Infeasible => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::validate_cycle;

    fn v(x: u32) -> Vertex {
        Vertex(x)
    }

    fn q(n: u32) -> Cube {
        Cube::new(n).unwrap()
    }

    fn e(a: u32, b: u32) -> Edge {
        Edge::new(v(a), v(b)).unwrap()
    }

    fn assert_ham_path(cube: Cube, p: &HamPath, x: Vertex, y: Vertex) {
        assert_eq!(p.first(), x);
        assert_eq!(p.last(), y);
        assert_eq!(p.seq().len(), cube.vertex_count());
    }

    #[test]
    fn havel_base_and_small() {
        let q1 = q(1);
        let p = havel_path(q1, v(0), v(1)).unwrap();
        assert_eq!(p.seq(), &[v(0), v(1)]);

        let q2 = q(2);
        let p = havel_path(q2, v(0b00), v(0b01)).unwrap();
        assert_ham_path(q2, &p, v(0b00), v(0b01));

        assert!(havel_path(q2, v(0b00), v(0b11)).is_err());
    }

    #[test]
    fn havel_exhaustive_small_dimensions() {
        for n in 1..=4 {
            let cube = q(n);
            for x in cube.vertices() {
                for y in cube.vertices() {
                    if cube.hamming_distance(x, y) % 2 == 1 {
                        let p = havel_path(cube, x, y).unwrap();
                        assert_ham_path(cube, &p, x, y);
                    }
                }
            }
        }
    }

    #[test]
    fn path_through_edge_unique_small_case() {
        // Q_2 from 00 to 01 through the opposite edge has a single witness.
        let q2 = q(2);
        let p = path_through_edge(q2, v(0b00), v(0b01), e(0b11, 0b10)).unwrap();
        assert_eq!(p.seq(), &[v(0b00), v(0b10), v(0b11), v(0b01)]);
        // The prescribed edge may not equal the endpoint pair.
        assert!(path_through_edge(q2, v(0b00), v(0b01), e(0b00, 0b01)).is_err());
    }

    #[test]
    fn path_through_edge_exhaustive_q3() {
        let q3 = q(3);
        for x in q3.vertices() {
            for y in q3.vertices() {
                if q3.hamming_distance(x, y) % 2 == 0 {
                    continue;
                }
                for edge in q3.edges() {
                    if edge.touches(x) && edge.touches(y) {
                        continue;
                    }
                    let p = path_through_edge(q3, x, y, edge).unwrap();
                    assert_ham_path(q3, &p, x, y);
                    assert!(p.contains_edge(edge));
                }
            }
        }
    }

    #[test]
    fn path_avoiding_faults_exhaustive_q3() {
        let q3 = q(3);
        // Empty fault set reduces to a plain spanning path.
        let p = path_avoiding_faults(q3, v(0), v(1), &FaultSet::empty()).unwrap();
        assert_ham_path(q3, &p, v(0), v(1));
        for u in q3.vertices() {
            for w in q3.vertices() {
                if q3.hamming_distance(u, w) % 2 == 0 {
                    continue;
                }
                for f in q3.edges() {
                    let faults = FaultSet::new(vec![f]);
                    let p = path_avoiding_faults(q3, u, w, &faults).unwrap();
                    assert_ham_path(q3, &p, u, w);
                    assert!(!p.contains_edge(f));
                }
            }
        }
        // Two faults violate the hypothesis.
        let faults = FaultSet::new(vec![e(0, 1), e(2, 3)]);
        assert!(path_avoiding_faults(q3, v(0), v(1), &faults).is_err());
    }

    #[test]
    fn spanning_pair_trivial_and_pinned() {
        let q2 = q(2);
        let pair =
            spanning_two_paths(q2, v(0b00), v(0b01), v(0b10), v(0b11), true).unwrap();
        assert_eq!(pair.p1.seq(), &[v(0b00), v(0b01)]);
        assert_eq!(pair.p2.seq(), &[v(0b10), v(0b11)]);
    }

    #[test]
    fn spanning_pair_exceptional_shape() {
        // d(x,y) = d(u,v) = 1 with the edges at distance 2 in Q_3: pinning
        // must fail, the free form must still succeed.
        let q3 = q(3);
        let (x, y) = (v(0b000), v(0b001));
        let (u, w) = (v(0b110), v(0b111));
        match spanning_two_paths(q3, x, y, u, w, true) {
            Err(Error::ExceptionalPair { .. }) => {}
            other => panic!("expected exceptional pair, got {other:?}"),
        }
        let pair = spanning_two_paths(q3, x, y, u, w, false).unwrap();
        assert_eq!((pair.p1.first(), pair.p1.last()), (x, y));
        assert_eq!((pair.p2.first(), pair.p2.last()), (u, w));
        assert_eq!(pair.p1.len() + pair.p2.len(), 8);
    }

    #[test]
    fn spanning_pair_exhaustive_q3() {
        // Existence for every valid endpoint quadruple in Q_3, pinning
        // whenever allowed.
        let q3 = q(3);
        let verts: Vec<Vertex> = q3.vertices().collect();
        for &x in &verts {
            for &y in &verts {
                if q3.hamming_distance(x, y) % 2 == 0 {
                    continue;
                }
                for &u in &verts {
                    for &w in &verts {
                        if q3.hamming_distance(u, w) % 2 == 0 {
                            continue;
                        }
                        let mut d = vec![x, y, u, w];
                        d.sort();
                        d.dedup();
                        if d.len() != 4 {
                            continue;
                        }
                        let pair = spanning_two_paths(q3, x, y, u, w, false).unwrap();
                        assert_eq!((pair.p1.first(), pair.p1.last()), (x, y));
                        assert_eq!((pair.p2.first(), pair.p2.last()), (u, w));

                        if q3.hamming_distance(x, y) == 1 {
                            let xy = Edge::new(x, y).unwrap();
                            let exceptional = q3.hamming_distance(u, w) == 1
                                && q3.edge_distance(xy, Edge::new(u, w).unwrap()) == 2;
                            let pinned = spanning_two_paths(q3, x, y, u, w, true);
                            if exceptional {
                                assert!(matches!(pinned, Err(Error::ExceptionalPair { .. })));
                            } else {
                                let pinned = pinned.unwrap();
                                assert_eq!(pinned.p1.len(), 2);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn forest_cycle_small_cases() {
        let q2 = q(2);
        let forest = LinearForest::try_new(vec![e(0b00, 0b01)]).unwrap();
        let c = cycle_through_forest(q2, &forest).unwrap();
        assert_eq!(c.seq(), &[v(0), v(1), v(3), v(2)]);

        // A 4-cycle is rejected by the forest precondition.
        assert!(LinearForest::try_new(vec![
            e(0b000, 0b001),
            e(0b001, 0b011),
            e(0b011, 0b010),
            e(0b010, 0b000),
        ])
        .is_err());
    }

    #[test]
    fn forest_cycle_exhaustive_q3() {
        // Every linear forest of at most 3 edges in Q_3 extends to a cycle.
        let q3 = q(3);
        let edges = q3.edges();
        let mut count = 0usize;
        for a in 0..edges.len() {
            for b in a..edges.len() {
                for c in b..edges.len() {
                    let mut set = vec![edges[a]];
                    if b > a {
                        set.push(edges[b]);
                    }
                    if c > b {
                        set.push(edges[c]);
                    }
                    set.dedup();
                    if !crate::structures::is_linear_forest(&set) {
                        continue;
                    }
                    let forest = LinearForest::try_new(set.clone()).unwrap();
                    let cycle = cycle_through_forest(q3, &forest).unwrap();
                    for edge in &set {
                        assert!(cycle.contains_edge(*edge));
                    }
                    count += 1;
                }
            }
        }
        assert!(count > 100, "swept {count} forests");
    }

    #[test]
    fn single_edge_fault_cycles_exhaustive_q3() {
        let q3 = q(3);
        for edge in q3.edges() {
            // Empty fault set agrees with the forest route.
            let c = cycle_avoiding_faults_through_edge(q3, edge, &FaultSet::empty()).unwrap();
            assert!(c.contains_edge(edge));
            for f in q3.edges() {
                if f == edge {
                    continue;
                }
                let faults = FaultSet::new(vec![f]);
                let c = cycle_avoiding_faults_through_edge(q3, edge, &faults).unwrap();
                assert!(c.contains_edge(edge));
                assert!(!c.contains_edge(f));
            }
        }
        // Bound n-2 = 1 is enforced.
        let faults = FaultSet::new(vec![e(0, 1), e(2, 3)]);
        assert!(cycle_avoiding_faults_through_edge(q3, e(4, 5), &faults).is_err());
    }

    #[test]
    fn forest_fault_bound_checks() {
        let q4 = q(4);
        let forest = LinearForest::try_new(vec![e(0, 1)]).unwrap();
        let faults = FaultSet::new(vec![e(2, 3), e(4, 5), e(8, 9)]);
        // n-2-|E|/2 = 2 for one edge in Q_4; three faults exceed it.
        assert!(cycle_through_forest_avoiding_faults(q4, &forest, &faults).is_err());
        let ok_faults = FaultSet::new(vec![e(2, 3), e(4, 5)]);
        let c = cycle_through_forest_avoiding_faults(q4, &forest, &ok_faults).unwrap();
        let m = Matching::try_new(vec![e(0, 1)]).unwrap();
        assert!(validate_cycle(q4, c.seq(), &m, &ok_faults).pass());
    }

    #[test]
    fn perfect_matching_cycles_q2_q3() {
        let q2 = q(2);
        let m = Matching::try_new(vec![e(0b00, 0b01), e(0b10, 0b11)]).unwrap();
        let c = complementary_perfect_matching(q2, &m).unwrap();
        assert_eq!(c.seq(), &[v(0), v(1), v(3), v(2)]);

        // All perfect matchings of Q_3.
        let q3 = q(3);
        let edges = q3.edges();
        let mut total = 0usize;
        let mut stack: Vec<(usize, Vec<Edge>)> = vec![(0, Vec::new())];
        while let Some((start, chosen)) = stack.pop() {
            if chosen.len() == 4 {
                let m = Matching::try_new(chosen.clone()).unwrap();
                let c = complementary_perfect_matching(q3, &m).unwrap();
                for edge in m.edges() {
                    assert!(c.contains_edge(*edge));
                }
                total += 1;
                continue;
            }
            for i in start..edges.len() {
                if chosen.iter().all(|&x| x.is_disjoint(edges[i])) {
                    let mut next = chosen.clone();
                    next.push(edges[i]);
                    stack.push((i + 1, next));
                }
            }
        }
        assert_eq!(total, 9, "Q_3 has nine perfect matchings");

        assert!(complementary_perfect_matching(
            q3,
            &Matching::try_new(vec![e(0, 1)]).unwrap()
        )
        .is_err());
    }

    #[test]
    fn solve_basics() {
        let q2 = q(2);
        let query = PathQuery::cycle(q2, Vec::new(), Vec::new()).unwrap();
        match solve(&query, SearchBudget::default()).unwrap() {
            SolveOutcome::Cycle(c) => assert_eq!(c.seq(), &[v(0), v(1), v(3), v(2)]),
            other => panic!("expected cycle, got {other:?}"),
        }

        // Required edges forming a vertex of degree three are infeasible
        // immediately.
        let q3 = q(3);
        let query =
            PathQuery::cycle(q3, vec![e(0, 1), e(1, 3), e(1, 5)], Vec::new()).unwrap();
        assert!(matches!(
            solve(&query, SearchBudget::default()).unwrap(),
            SolveOutcome::Infeasible
        ));
    }

    #[test]
    fn solve_respects_forbidden_edges() {
        let q3 = q(3);
        // Forbid all edges at vertex 0 except one: no cycle can exist.
        let forbidden = vec![e(0, 1), e(0, 2)];
        let query = PathQuery::cycle(q3, Vec::new(), forbidden).unwrap();
        match solve(&query, SearchBudget::default()).unwrap() {
            SolveOutcome::Infeasible => {}
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn solver_node_limit_is_an_error_not_infeasible() {
        let q5 = q(5);
        let query = PathQuery::cycle(q5, Vec::new(), Vec::new()).unwrap();
        match solve(&query, SearchBudget { node_limit: 3 }) {
            Err(Error::BudgetExceeded { .. }) => {}
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn solver_rejects_oversized_dimension() {
        let q8 = q(8);
        let query = PathQuery::cycle(q8, Vec::new(), Vec::new()).unwrap();
        assert!(matches!(
            solve(&query, SearchBudget::default()),
            Err(Error::Unsupported(_))
        ));
    }
}
