//! Phase 3: first-improvement hill climbing on BIC over connected DAGs,
//! with a single-depth tabu escape from local maxima.
//!
//! Moves are scanned in a fixed order (adds, then removals, then
//! reversals; lexicographic ordered node pairs within each) and the first
//! strictly improving move is taken, so runs are reproducible. Adds are
//! pruned on pairs whose score sits below the dependency floor or that
//! some conditioning node renders independent; every accepted graph stays
//! acyclic and weakly connected.

use crate::graph::Graph;
use crate::mmd::{MmdTable, DEPENDENCY_FLOOR};
use crate::pipeline::Deadline;
use crate::score::{score_gt, ScoreContext};
use std::collections::HashSet;

/// One structure move over directed edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Add(usize, usize),
    Remove(usize, usize),
    Reverse(usize, usize),
}

impl Move {
    pub fn describe(&self, g: &Graph) -> String {
        let (verb, f, t) = match *self {
            Move::Add(f, t) => ("add", f, t),
            Move::Remove(f, t) => ("remove", f, t),
            Move::Reverse(f, t) => ("reverse", f, t),
        };
        format!("{verb}:{}->{}", g.nodes()[f], g.nodes()[t])
    }
}

/// Add-move pruning derived from the score table: a pair is frozen out
/// when its score is below the floor or some conditioning node makes it
/// independent.
#[derive(Debug, Clone)]
pub struct MoveConstraints {
    n: usize,
    forbidden_add: Vec<bool>,
}

impl MoveConstraints {
    pub fn from_table(table: &MmdTable) -> Self {
        let n = table.n();
        let mut forbidden_add = vec![false; n * n.saturating_sub(1) / 2];
        for a in 0..n {
            for b in (a + 1)..n {
                let idx = crate::mmd::pair_index(n, a, b);
                forbidden_add[idx] =
                    table.pair(a, b) < DEPENDENCY_FLOOR || table.any_independent(a, b);
            }
        }
        MoveConstraints { n, forbidden_add }
    }

    pub fn unrestricted(n: usize) -> Self {
        MoveConstraints {
            n,
            forbidden_add: vec![false; n * n.saturating_sub(1) / 2],
        }
    }

    pub fn allows_add(&self, a: usize, b: usize) -> bool {
        !self.forbidden_add[crate::mmd::pair_index(self.n, a, b)]
    }
}

/// Apply a move to a copy of the graph. The move must be legal.
pub fn apply_move(g: &Graph, m: Move) -> Graph {
    let mut out = g.clone();
    match m {
        Move::Add(f, t) => out.add_directed(f, t).expect("legal add"),
        Move::Remove(f, t) => out.remove_edge(f, t).expect("legal remove"),
        Move::Reverse(f, t) => out.reverse_edge(f, t).expect("legal reverse"),
    }
    out
}

/// All moves whose result is acyclic, weakly connected, and (for adds) not
/// on a frozen pair. Order: adds, removals, reversals; ordered node pairs
/// within each.
pub fn legal_moves(g: &Graph, c: &MoveConstraints) -> Vec<Move> {
    let n = g.n();
    let mut moves = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || g.is_adjacent(i, j) {
                continue;
            }
            if c.allows_add(i, j) && !g.reaches_directed(j, i) {
                moves.push(Move::Add(i, j));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && g.has_directed(i, j) && g.stays_connected_without(i, j) {
                moves.push(Move::Remove(i, j));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j || !g.has_directed(i, j) {
                continue;
            }
            let mut probe = g.clone();
            probe.remove_edge(i, j).expect("edge exists");
            if !probe.reaches_directed(i, j) {
                moves.push(Move::Reverse(i, j));
            }
        }
    }
    moves
}

fn with_parent(parents: &[usize], p: usize) -> Vec<usize> {
    let mut v = parents.to_vec();
    v.push(p);
    v
}

fn without_parent(parents: &[usize], p: usize) -> Vec<usize> {
    parents.iter().copied().filter(|&x| x != p).collect()
}

/// BIC change of a move: only the affected families contribute.
fn move_delta(g: &Graph, ctx: &ScoreContext, m: Move) -> f64 {
    match m {
        Move::Add(f, t) => {
            let pt = g.parents(t);
            ctx.family_score(t, &with_parent(&pt, f)) - ctx.family_score(t, &pt)
        }
        Move::Remove(f, t) => {
            let pt = g.parents(t);
            ctx.family_score(t, &without_parent(&pt, f)) - ctx.family_score(t, &pt)
        }
        Move::Reverse(f, t) => {
            let pt = g.parents(t);
            let pf = g.parents(f);
            ctx.family_score(t, &without_parent(&pt, f)) - ctx.family_score(t, &pt)
                + ctx.family_score(f, &with_parent(&pf, t))
                - ctx.family_score(f, &pf)
        }
    }
}

#[cfg(feature = "parallel")]
fn first_improving(
    moves: &[Move],
    g: &Graph,
    ctx: &ScoreContext,
    bic: f64,
    stop: &Deadline,
    parallel: bool,
) -> Option<Move> {
    if parallel {
        use rayon::prelude::*;
        moves
            .par_iter()
            .find_first(|&&m| !stop.expired() && score_gt(bic + move_delta(g, ctx, m), bic))
            .copied()
    } else {
        moves
            .iter()
            .find(|&&m| !stop.expired() && score_gt(bic + move_delta(g, ctx, m), bic))
            .copied()
    }
}

#[cfg(not(feature = "parallel"))]
fn first_improving(
    moves: &[Move],
    g: &Graph,
    ctx: &ScoreContext,
    bic: f64,
    stop: &Deadline,
    _parallel: bool,
) -> Option<Move> {
    moves
        .iter()
        .find(|&&m| !stop.expired() && score_gt(bic + move_delta(g, ctx, m), bic))
        .copied()
}

fn hill_climb_impl(
    g0: &Graph,
    ctx: &ScoreContext,
    c: &MoveConstraints,
    stop: &Deadline,
    trace: &mut Vec<String>,
    parallel: bool,
) -> (Graph, bool) {
    let mut g = g0.clone();
    let mut bic = ctx.bic(&g);
    let mut step = 0usize;
    loop {
        if stop.expired() {
            return (g, true);
        }
        let moves = legal_moves(&g, c);
        match first_improving(&moves, &g, ctx, bic, stop, parallel) {
            Some(m) => {
                if stop.expired() {
                    return (g, true);
                }
                step += 1;
                let description = m.describe(&g);
                g = apply_move(&g, m);
                bic = ctx.bic(&g);
                trace.push(format!("{step},{description},{bic},1"));
            }
            None => return (g, stop.expired()),
        }
    }
}

/// First-improvement ascent; returns the fixed point and whether the
/// deadline interrupted the scan.
pub fn hill_climb(
    g0: &Graph,
    ctx: &ScoreContext,
    c: &MoveConstraints,
    stop: &Deadline,
    trace: &mut Vec<String>,
) -> (Graph, bool) {
    hill_climb_impl(g0, ctx, c, stop, trace, true)
}

/// Sequential twin of [`hill_climb`]; identical output.
pub fn hill_climb_seq(
    g0: &Graph,
    ctx: &ScoreContext,
    c: &MoveConstraints,
    stop: &Deadline,
    trace: &mut Vec<String>,
) -> (Graph, bool) {
    hill_climb_impl(g0, ctx, c, stop, trace, false)
}

#[derive(Debug)]
pub struct TabuOutcome {
    pub graph: Graph,
    pub escapes_used: usize,
    pub partial: bool,
}

/// Escape from a hill-climb fixed point: examine unvisited neighbours G'
/// from the smallest BIC decrease down; if some neighbour of G' beats the
/// fixed point, hill-climb from there and restart the ranking. Each
/// examined G' counts against the |V|(|V|-1) cap. Returns the best graph
/// seen.
pub fn tabu_escape(
    g: &Graph,
    ctx: &ScoreContext,
    c: &MoveConstraints,
    stop: &Deadline,
    trace: &mut Vec<String>,
) -> TabuOutcome {
    let cap = g.n() * g.n().saturating_sub(1);
    let mut visited: HashSet<Vec<(u16, u16, u8)>> = HashSet::new();
    let mut current = g.clone();
    let mut current_bic = ctx.bic(&current);
    visited.insert(current.canonical_key());
    let mut best = current.clone();
    let mut best_bic = current_bic;
    let mut escapes = 0usize;
    let mut partial = false;

    'outer: while escapes < cap {
        // rank unvisited neighbours by smallest BIC decrease, ties by move
        // order
        let moves = legal_moves(&current, c);
        let mut ranked: Vec<(f64, usize, Move)> = Vec::new();
        for (idx, &m) in moves.iter().enumerate() {
            let key = apply_move(&current, m).canonical_key();
            if !visited.contains(&key) {
                ranked.push((current_bic + move_delta(&current, ctx, m), idx, m));
            }
        }
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        if ranked.is_empty() {
            break;
        }
        let mut improved = false;
        for (step_bic, _, m) in ranked {
            if escapes >= cap {
                break 'outer;
            }
            if stop.expired() {
                partial = true;
                break 'outer;
            }
            let probe = apply_move(&current, m);
            visited.insert(probe.canonical_key());
            escapes += 1;
            trace.push(format!(
                "escape{escapes},{},{step_bic},1",
                m.describe(&current)
            ));
            let probe_moves = legal_moves(&probe, c);
            let rebound = probe_moves
                .iter()
                .find(|&&m2| score_gt(step_bic + move_delta(&probe, ctx, m2), current_bic))
                .copied();
            if let Some(m2) = rebound {
                let g3 = apply_move(&probe, m2);
                let (fixed, hc_partial) = hill_climb(&g3, ctx, c, stop, trace);
                current = fixed;
                current_bic = ctx.bic(&current);
                visited.insert(current.canonical_key());
                if score_gt(current_bic, best_bic) {
                    best = current.clone();
                    best_bic = current_bic;
                }
                if hc_partial {
                    partial = true;
                    break 'outer;
                }
                improved = true;
                break;
            }
        }
        if !improved {
            break;
        }
    }

    TabuOutcome {
        graph: best,
        escapes_used: escapes,
        partial,
    }
}

/// Hill climb then tabu escape. Output BIC never falls below the input's.
pub fn run_phase3(
    g0: &Graph,
    ctx: &ScoreContext,
    c: &MoveConstraints,
    stop: &Deadline,
    trace: &mut Vec<String>,
) -> (Graph, bool) {
    let (fixed, partial) = hill_climb(g0, ctx, c, stop, trace);
    if partial {
        return (fixed, true);
    }
    let outcome = tabu_escape(&fixed, ctx, c, stop, trace);
    (outcome.graph, outcome.partial)
}

/// Every DAG over `nodes` with exactly one weak component, by brute force
/// over all pair-mark assignments. Exponential in the pair count: intended
/// for validation at small sizes.
pub fn enumerate_connected_dags(nodes: &[String]) -> Vec<Graph> {
    let n = nodes.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
        .collect();
    let total = 3usize.pow(pairs.len() as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut g = Graph::new(nodes.to_vec()).expect("valid nodes");
        let mut k = code;
        for &(a, b) in &pairs {
            match k % 3 {
                0 => {}
                1 => g.add_directed(a, b).expect("fresh edge"),
                _ => g.add_directed(b, a).expect("fresh edge"),
            }
            k /= 3;
        }
        if g.is_acyclic() && g.is_weakly_connected() {
            out.push(g);
        }
    }
    out
}
