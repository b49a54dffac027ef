//! Depth-first Hamiltonian search over the implicit hypercube adjacency,
//! with prescribed edges, forbidden edges, excluded vertices and an optional
//! one-shot virtual edge.
//!
//! The search extends a single endpoint, ordering moves fail-first (fewest
//! onward continuations, ties by vertex index). Cuts: a vertex that must
//! still be visited needs enough usable incident edges; unused prescribed
//! edges at an abandoned vertex are fatal; bipartite parity counts must
//! stay balanced; everything unvisited must stay reachable. All state fits
//! in 128-bit sets, which caps the solver at dimension 7.

use crate::cube::{Cube, Edge, Vertex};
use crate::error::{Error, Result};

/// Dimensions above this exceed the 128-bit vertex sets the solver uses.
pub const SOLVER_MAX_N: u32 = 7;

#[derive(Clone, Copy, Debug)]
pub(crate) enum RawMode {
    Cycle,
    Path { from: Vertex, to: Vertex },
}

#[derive(Clone, Debug)]
pub(crate) struct RawQuery {
    pub cube: Cube,
    pub mode: RawMode,
    pub required: Vec<Edge>,
    pub forbidden: Vec<Edge>,
    /// Vertices the walk must not touch (treated as already visited).
    pub excluded: Vec<Vertex>,
    /// Extra adjacency traversable only from `.0` to `.1`; always required.
    pub virtual_edge: Option<(Vertex, Vertex)>,
}

impl RawQuery {
    pub fn cycle(cube: Cube, required: Vec<Edge>, forbidden: Vec<Edge>) -> RawQuery {
        RawQuery {
            cube,
            mode: RawMode::Cycle,
            required,
            forbidden,
            excluded: Vec::new(),
            virtual_edge: None,
        }
    }

    pub fn path(
        cube: Cube,
        from: Vertex,
        to: Vertex,
        required: Vec<Edge>,
        forbidden: Vec<Edge>,
    ) -> RawQuery {
        RawQuery {
            cube,
            mode: RawMode::Path { from, to },
            required,
            forbidden,
            excluded: Vec::new(),
            virtual_edge: None,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum RawOutcome {
    Found(Vec<Vertex>),
    Infeasible,
}

const VIRT_SLOT: u32 = u32::MAX - 1;

struct Search {
    n: u32,
    /// Usable hypercube neighbors (not forbidden, endpoints not excluded).
    nbr: Vec<u128>,
    /// Required dims per vertex.
    req_slots: Vec<u32>,
    /// Traversed dims per vertex.
    used_slots: Vec<u32>,
    /// Per dimension, vertices whose bit is 0.
    lo_mask: Vec<u128>,
    /// Forbidden edges bucketed by dimension, as index pairs (lo, hi).
    forb_by_dim: Vec<Vec<(usize, usize)>>,
    /// Vertices the walk may still enter (complement of excluded), fixed.
    domain: u128,
    virt: Option<(usize, usize)>,
    virt_used: bool,
    visited: u128,
    seq: Vec<Vertex>,
    target: usize,
    remaining: usize,
    parity_prune: bool,
    par_cnt: [i64; 2],
    /// Restricts the first move's dimension (cycle direction symmetry).
    first_dim_below: u32,
    /// Perturbs move-ordering ties; varied between budget rounds so one
    /// unlucky ordering cannot dominate the whole budget.
    salt: u32,
    nodes: u64,
    limit: u64,
}

#[inline]
fn bit(i: usize) -> u128 {
    1u128 << i
}

#[inline]
fn parity(v: usize) -> usize {
    (v.count_ones() & 1) as usize
}

impl Search {
    /// Unused prescribed incidences at `v`, virtual edge included.
    fn pending_count(&self, v: usize) -> u32 {
        let mut c = (self.req_slots[v] & !self.used_slots[v]).count_ones();
        if !self.virt_used {
            if let Some((y, u)) = self.virt {
                if v == y || v == u {
                    c += 1;
                }
            }
        }
        c
    }

    /// Continuation count used for fail-first ordering.
    fn avail(&self, v: usize) -> u32 {
        let mut a = (self.nbr[v] & !self.visited).count_ones();
        if !self.virt_used {
            if let Some((y, u)) = self.virt {
                if v == y && self.visited & bit(u) == 0 {
                    a += 1;
                }
            }
        }
        a
    }

    /// Degree feasibility for a vertex still to be visited: its future walk
    /// edges lead to unvisited vertices or the current head. Conservative:
    /// counts every potential slack source.
    fn degree_ok(&self, w: usize, head: usize) -> bool {
        let needed: u32 = if w == self.target { 1 } else { 2 };
        let mut slack = (self.nbr[w] & !self.visited).count_ones();
        if slack >= needed {
            return true;
        }
        if self.nbr[w] & bit(head) != 0 {
            slack += 1;
        }
        if !self.virt_used {
            if let Some((y, u)) = self.virt {
                if w == y || w == u {
                    slack += 1;
                }
            }
        }
        slack >= needed
    }

    fn degree_scan_touched(&self, old_head: usize, new_head: usize) -> bool {
        let mut touched = self.nbr[old_head] | self.nbr[new_head];
        if let Some((y, u)) = self.virt {
            if !self.virt_used && (old_head == y || new_head == y) {
                touched |= bit(u);
            }
        }
        let mut t = touched & !self.visited;
        while t != 0 {
            let w = t.trailing_zeros() as usize;
            t &= t - 1;
            if !self.degree_ok(w, new_head) {
                return false;
            }
        }
        true
    }

    fn degree_scan_all(&self, head: usize) -> bool {
        let mut t = self.domain & !self.visited;
        while t != 0 {
            let w = t.trailing_zeros() as usize;
            t &= t - 1;
            if !self.degree_ok(w, head) {
                return false;
            }
        }
        true
    }

    /// Bipartite counting: the rest of the walk alternates parity, so the
    /// unvisited parity counts are forced, as is the parity of the target.
    /// With a virtual edge the argument only applies once the hop is spent.
    fn parity_ok(&self, head: usize) -> bool {
        if self.virt.is_some() && !self.virt_used {
            return true;
        }
        if !self.parity_prune || self.remaining == 0 {
            return true;
        }
        let p = parity(head);
        let r = self.remaining as i64;
        if self.par_cnt[p ^ 1] != (r + 1) / 2 || self.par_cnt[p] != r / 2 {
            return false;
        }
        parity(self.target) == p ^ (self.remaining & 1)
    }

    /// Everything unvisited must be reachable from the head through
    /// unvisited territory (forbidden edges excluded, virtual hop allowed).
    fn connected(&self, head: usize) -> bool {
        let goal = self.domain & !self.visited;
        if goal == 0 {
            return true;
        }
        let mut seen: u128 = bit(head);
        let mut frontier: u128 = seen;
        loop {
            let mut next: u128 = 0;
            for i in 0..self.n as usize {
                let sh = 1usize << i;
                let lo = frontier & self.lo_mask[i];
                let hi = frontier & !self.lo_mask[i];
                let mut s = (lo << sh) | (hi >> sh);
                for &(a, b) in &self.forb_by_dim[i] {
                    if frontier & bit(a) != 0 {
                        s &= !bit(b);
                    }
                    if frontier & bit(b) != 0 {
                        s &= !bit(a);
                    }
                }
                next |= s;
            }
            if !self.virt_used {
                if let Some((y, u)) = self.virt {
                    if frontier & bit(y) != 0 {
                        next |= bit(u);
                    }
                    if frontier & bit(u) != 0 {
                        next |= bit(y);
                    }
                }
            }
            next &= goal & !seen;
            if next == 0 {
                break;
            }
            seen |= next;
            frontier = next;
        }
        seen & goal == goal
    }

    fn prunes_ok(&self, old_head: usize, head: usize) -> bool {
        self.parity_ok(head) && self.degree_scan_touched(old_head, head) && self.connected(head)
    }

    fn dfs(&mut self, head: usize) -> Result<bool> {
        // Departure rule: unused prescribed edges at the head must be taken
        // by the departing move; more than one pending is fatal.
        let pending = self.req_slots[head] & !self.used_slots[head];
        let virt_pending_here = !self.virt_used && self.virt.is_some_and(|(y, _)| y == head);
        if !self.virt_used && self.virt.is_some_and(|(_, u)| u == head) {
            // The virtual edge only enters its tail vertex; abandoning that
            // vertex strands the required virtual edge.
            return Ok(false);
        }
        if pending.count_ones() + virt_pending_here as u32 > 1 {
            return Ok(false);
        }
        let mut dims: u32 = if pending != 0 {
            pending
        } else if virt_pending_here {
            0
        } else {
            (1u32 << self.n) - 1
        };
        if self.seq.len() == 1 && self.first_dim_below < self.n {
            dims &= (1u32 << self.first_dim_below) - 1;
        }

        let mut cands: Vec<(u32, u32, usize)> = Vec::with_capacity(self.n as usize + 1);
        let mut rest = dims;
        while rest != 0 {
            let i = rest.trailing_zeros();
            rest &= rest - 1;
            let w = head ^ (1usize << i);
            if self.nbr[head] & bit(w) == 0 || self.visited & bit(w) != 0 {
                continue;
            }
            let is_target = w == self.target;
            if is_target && self.remaining > 1 {
                continue;
            }
            // Arrival rule: prescribed edges at the move target must fit in
            // its remaining walk slots.
            let arriving_required = self.req_slots[head] & (1 << i) != 0;
            let after = self.pending_count(w) - arriving_required as u32;
            if after > if is_target { 0 } else { 1 } {
                continue;
            }
            cands.push((i, 0, w));
        }
        if virt_pending_here && pending == 0 {
            let (_, u) = self.virt.unwrap();
            if self.visited & bit(u) == 0
                && (u != self.target || self.remaining == 1)
                && (self.pending_count(u) - 1) <= if u == self.target { 0 } else { 1 }
            {
                cands.push((VIRT_SLOT, 0, u));
            }
        }

        // Fail-first ordering: fewest onward continuations, ties by
        // (salted) index.
        for c in cands.iter_mut() {
            c.1 = self.avail(c.2);
        }
        cands.sort_unstable_by_key(|&(_, a, w)| (a, (w as u32) ^ self.salt));

        for (slot, _, w) in cands {
            self.nodes += 1;
            if self.nodes > self.limit {
                return Err(Error::BudgetExceeded { explored: self.nodes });
            }

            self.visited |= bit(w);
            self.remaining -= 1;
            self.par_cnt[parity(w)] -= 1;
            self.seq.push(Vertex(w as u32));
            let virt_move = slot == VIRT_SLOT;
            if virt_move {
                self.virt_used = true;
            } else {
                self.used_slots[head] |= 1 << slot;
                self.used_slots[w] |= 1 << slot;
            }

            let done = w == self.target && self.remaining == 0;
            let ok = if done {
                true
            } else if self.prunes_ok(head, w) {
                self.dfs(w)?
            } else {
                false
            };
            if ok {
                return Ok(true);
            }

            if virt_move {
                self.virt_used = false;
            } else {
                self.used_slots[head] &= !(1 << slot);
                self.used_slots[w] &= !(1 << slot);
            }
            self.seq.pop();
            self.par_cnt[parity(w)] += 1;
            self.remaining += 1;
            self.visited &= !bit(w);
        }
        Ok(false)
    }
}

struct Prepared {
    n: u32,
    nv: usize,
    full: u128,
    excluded_mask: u128,
    required: Vec<Edge>,
    forbidden: Vec<Edge>,
}

fn prepare(q: &RawQuery) -> Result<std::result::Result<Prepared, ()>> {
    let cube = q.cube;
    let n = cube.n();
    if n > SOLVER_MAX_N {
        return Err(Error::Unsupported(format!(
            "search limited to n <= {SOLVER_MAX_N}, got {n}"
        )));
    }
    let nv = cube.vertex_count();
    for &e in q.required.iter().chain(q.forbidden.iter()) {
        cube.check_edge(e)?;
    }
    for &v in &q.excluded {
        cube.check_vertex(v)?;
    }

    let mut required = q.required.clone();
    required.sort();
    required.dedup();
    let mut forbidden = q.forbidden.clone();
    forbidden.sort();
    forbidden.dedup();

    // A prescribed edge that is also forbidden, or a prescribed set that is
    // not a linear forest, cannot lie on any Hamiltonian walk.
    if required.iter().any(|e| forbidden.binary_search(e).is_ok()) {
        return Ok(Err(()));
    }
    if !crate::structures::is_linear_forest(&required) {
        return Ok(Err(()));
    }

    let mut excluded_mask: u128 = 0;
    for &v in &q.excluded {
        excluded_mask |= bit(v.index());
    }
    for &e in &required {
        if excluded_mask & (bit(e.lo().index()) | bit(e.hi().index())) != 0 {
            return Ok(Err(()));
        }
    }
    let full: u128 = if nv == 128 { u128::MAX } else { (1u128 << nv) - 1 };
    Ok(Ok(Prepared {
        n,
        nv,
        full,
        excluded_mask,
        required,
        forbidden,
    }))
}

enum RunResult {
    Found(Vec<Vertex>),
    /// The whole space under this query was exhausted.
    Exhausted(u64),
    /// The node budget ran out first.
    OutOfBudget(u64),
}

/// One target-directed path run against its own node budget.
#[allow(clippy::too_many_arguments)]
fn run_path(
    prep: &Prepared,
    from: Vertex,
    to: Vertex,
    required: &[Edge],
    forbidden: &[Edge],
    virt: Option<(Vertex, Vertex)>,
    first_dim_below: u32,
    salt: u32,
    budget: u64,
) -> Result<RunResult> {
    let n = prep.n;
    let nv = prep.nv;
    let start = from.index();
    let target = to.index();

    let mut forb_mask_at = vec![0u32; nv];
    let mut forb_by_dim: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n as usize];
    for &e in forbidden {
        forb_mask_at[e.lo().index()] |= 1 << e.dim();
        forb_mask_at[e.hi().index()] |= 1 << e.dim();
        forb_by_dim[e.dim() as usize].push((e.lo().index(), e.hi().index()));
    }
    let mut nbr = vec![0u128; nv];
    for (v, mask_out) in nbr.iter_mut().enumerate() {
        if prep.excluded_mask & bit(v) != 0 {
            continue;
        }
        let mut mask: u128 = 0;
        for i in 0..n {
            if forb_mask_at[v] & (1 << i) != 0 {
                continue;
            }
            let w = v ^ (1usize << i);
            if prep.excluded_mask & bit(w) == 0 {
                mask |= bit(w);
            }
        }
        *mask_out = mask;
    }
    let mut req_slots = vec![0u32; nv];
    for &e in required {
        req_slots[e.lo().index()] |= 1 << e.dim();
        req_slots[e.hi().index()] |= 1 << e.dim();
    }
    let mut lo_mask = vec![0u128; n as usize];
    for (i, m) in lo_mask.iter_mut().enumerate() {
        for v in 0..nv {
            if v & (1 << i) == 0 {
                *m |= bit(v);
            }
        }
    }

    let mut par_cnt = [0i64; 2];
    let mut remaining = 0usize;
    for v in 0..nv {
        if prep.excluded_mask & bit(v) == 0 && v != start {
            remaining += 1;
            par_cnt[parity(v)] += 1;
        }
    }

    let mut search = Search {
        n,
        nbr,
        req_slots,
        used_slots: vec![0u32; nv],
        lo_mask,
        forb_by_dim,
        domain: prep.full & !prep.excluded_mask,
        virt: virt.map(|(y, u)| (y.index(), u.index())),
        virt_used: false,
        visited: prep.excluded_mask | bit(start),
        seq: vec![from],
        target,
        remaining,
        parity_prune: true,
        par_cnt,
        first_dim_below,
        salt,
        nodes: 0,
        limit: budget,
    };

    if search.pending_count(start) > 1 || search.pending_count(target) > 1 {
        return Ok(RunResult::Exhausted(0));
    }
    if !search.parity_ok(start) || !search.degree_scan_all(start) || !search.connected(start) {
        return Ok(RunResult::Exhausted(0));
    }
    match search.dfs(start) {
        Ok(true) => Ok(RunResult::Found(std::mem::take(&mut search.seq))),
        Ok(false) => Ok(RunResult::Exhausted(search.nodes)),
        Err(Error::BudgetExceeded { explored }) => Ok(RunResult::OutOfBudget(explored)),
        Err(e) => Err(e),
    }
}

pub(crate) fn solve_raw(q: &RawQuery, node_limit: u64) -> Result<RawOutcome> {
    let prep = match prepare(q)? {
        Ok(p) => p,
        Err(()) => return Ok(RawOutcome::Infeasible),
    };
    let cube = q.cube;

    match q.mode {
        RawMode::Path { from, to } => {
            if from == to {
                return Err(Error::invalid("path endpoints must be distinct"));
            }
            if prep.excluded_mask & (bit(from.index()) | bit(to.index())) != 0 {
                return Err(Error::invalid("walk endpoint is excluded"));
            }
            if let Some((y, u)) = q.virtual_edge {
                cube.check_vertex(y)?;
                cube.check_vertex(u)?;
                if y == u {
                    return Err(Error::invalid("degenerate virtual edge"));
                }
                if [y, u].contains(&from) || [y, u].contains(&to) {
                    return Err(Error::invalid("virtual edge touches a walk endpoint"));
                }
                if prep.excluded_mask & (bit(y.index()) | bit(u.index())) != 0 {
                    return Ok(RawOutcome::Infeasible);
                }
            }
            // Ladder the budget over traversal directions and move-order
            // salts: exhausting the space under any one run certifies
            // infeasibility, while a run that merely hits its slice yields
            // to fresher orderings before growing the slice.
            let reversible = q.virtual_edge.is_none();
            let mut slice: u64 = 50_000;
            let mut spent: u64 = 0;
            let mut round: u32 = 0;
            loop {
                let dirs: &[bool] = if reversible { &[false, true] } else { &[false] };
                for &backward in dirs {
                    if spent >= node_limit {
                        return Err(Error::BudgetExceeded { explored: spent });
                    }
                    let (a, b) = if backward { (to, from) } else { (from, to) };
                    match run_path(
                        &prep,
                        a,
                        b,
                        &prep.required,
                        &prep.forbidden,
                        q.virtual_edge,
                        u32::MAX,
                        round.wrapping_mul(0x9e37_79b1),
                        slice.min(node_limit - spent),
                    )? {
                        RunResult::Found(mut seq) => {
                            if backward {
                                seq.reverse();
                            }
                            return Ok(RawOutcome::Found(seq));
                        }
                        RunResult::Exhausted(_) => return Ok(RawOutcome::Infeasible),
                        RunResult::OutOfBudget(consumed) => spent += consumed,
                    }
                }
                slice = slice.saturating_mul(8);
                round += 1;
            }
        }
        RawMode::Cycle => {
            if cube.n() < 2 {
                return Ok(RawOutcome::Infeasible);
            }
            if q.virtual_edge.is_some() {
                return Err(Error::invalid("virtual edges are only for path queries"));
            }
            if !q.excluded.is_empty() {
                return Err(Error::invalid("cycle queries do not take exclusions"));
            }
            let anchor = prep
                .required
                .iter()
                .map(|e| e.lo().index())
                .min()
                .unwrap_or(0);
            let av = Vertex(anchor as u32);
            let req_at_anchor: Vec<u32> = prep
                .required
                .iter()
                .filter(|e| e.touches(av))
                .map(|e| e.dim())
                .collect();
            let usable = |d: u32| {
                let z = Vertex((anchor ^ (1usize << d)) as u32);
                !prep
                    .forbidden
                    .iter()
                    .any(|e| e.touches(av) && e.touches(z))
            };
            // A cycle uses exactly two edges at the anchor. Fix the closing
            // edge and search a target-directed path for the rest; when the
            // anchor is unconstrained, breaking direction symmetry by
            // capping the first dimension below the closing one keeps each
            // cycle to a single orientation.
            let choices: Vec<(u32, u32)> = match req_at_anchor.len() {
                0 => (0..cube.n()).filter(|&d| usable(d)).map(|d| (d, d)).collect(),
                1 => {
                    let d0 = req_at_anchor[0];
                    (0..cube.n())
                        .filter(|&d| d != d0 && usable(d))
                        .map(|d| (d, u32::MAX))
                        .collect()
                }
                2 => {
                    let d = req_at_anchor[0].max(req_at_anchor[1]);
                    vec![(d, u32::MAX)]
                }
                _ => return Ok(RawOutcome::Infeasible),
            };

            // Ladder the budget across the closing choices in geometric
            // slices, so one slow choice cannot starve an easy one. A
            // choice whose space is exhausted within its slice is settled
            // and dropped; infeasibility is certified only when every
            // choice is settled.
            let mut active: Vec<(u32, u32)> = choices;
            let mut nodes_used: u64 = 0;
            let mut slice: u64 = 50_000;
            let mut round: u32 = 0;
            while !active.is_empty() {
                let mut still_open = Vec::new();
                for &(close_dim, first_below) in &active {
                    if nodes_used >= node_limit {
                        return Err(Error::BudgetExceeded { explored: nodes_used });
                    }
                    let z = Vertex((anchor ^ (1usize << close_dim)) as u32);
                    let closing = Edge::new(av, z)?;
                    let required: Vec<Edge> = prep
                        .required
                        .iter()
                        .copied()
                        .filter(|&e| e != closing)
                        .collect();
                    let mut forbidden = prep.forbidden.clone();
                    forbidden.push(closing);
                    let budget = slice.min(node_limit - nodes_used);
                    match run_path(
                        &prep,
                        av,
                        z,
                        &required,
                        &forbidden,
                        None,
                        first_below,
                        round.wrapping_mul(0x9e37_79b1),
                        budget,
                    )? {
                        RunResult::Found(seq) => return Ok(RawOutcome::Found(seq)),
                        RunResult::Exhausted(consumed) => nodes_used += consumed,
                        RunResult::OutOfBudget(consumed) => {
                            nodes_used += consumed;
                            still_open.push((close_dim, first_below));
                        }
                    }
                }
                if !still_open.is_empty() && nodes_used >= node_limit {
                    return Err(Error::BudgetExceeded { explored: nodes_used });
                }
                active = still_open;
                slice = slice.saturating_mul(8);
                round += 1;
            }
            Ok(RawOutcome::Infeasible)
        }
    }
}
