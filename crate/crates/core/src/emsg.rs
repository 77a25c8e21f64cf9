//! Phase 1 skeleton: thin the complete undirected graph using pair scores.
//!
//! Edges are visited from lowest to highest score; the visited edge is
//! dropped when some current common neighbour connects both endpoints more
//! strongly. Every removal leaves a two-edge detour in place, so the result
//! is always a single weakly connected component at least as dense as a
//! spanning tree.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::mmd::pair_index;

/// One removal sweep in ascending (score, name-pair) order. Removes edge
/// (a, b) iff a node c currently adjacent to both satisfies
/// score(a, c) > score(a, b) < score(b, c) strictly. Returns the number of
/// edges removed.
pub fn removal_pass(g: &mut Graph, pair: &[f64]) -> usize {
    let n = g.n();
    let mut order: Vec<(usize, usize)> = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if g.is_adjacent(a, b) {
                order.push((a, b));
            }
        }
    }
    order.sort_by(|&(a1, b1), &(a2, b2)| {
        let s1 = pair[pair_index(n, a1, b1)];
        let s2 = pair[pair_index(n, a2, b2)];
        s1.total_cmp(&s2).then_with(|| {
            let k1 = name_key(g, a1, b1);
            let k2 = name_key(g, a2, b2);
            k1.cmp(&k2)
        })
    });
    let mut removed = 0;
    for (a, b) in order {
        if !g.is_adjacent(a, b) {
            continue;
        }
        let s = pair[pair_index(n, a, b)];
        let witnessed = (0..n).any(|c| {
            c != a
                && c != b
                && g.is_adjacent(a, c)
                && g.is_adjacent(b, c)
                && pair[pair_index(n, a, c)] > s
                && pair[pair_index(n, b, c)] > s
        });
        if witnessed {
            g.remove_edge(a, b).expect("edge checked adjacent");
            removed += 1;
        }
    }
    removed
}

fn name_key(g: &Graph, a: usize, b: usize) -> (&str, &str) {
    let (na, nb) = (g.nodes()[a].as_str(), g.nodes()[b].as_str());
    if na <= nb {
        (na, nb)
    } else {
        (nb, na)
    }
}

/// Build the phase-1 skeleton from all-pairs scores (`pair` indexed by
/// [`pair_index`] over the node order).
pub fn build_emsg(nodes: &[String], pair: &[f64]) -> Result<Graph> {
    let n = nodes.len();
    if pair.len() != n * n.saturating_sub(1) / 2 {
        return Err(Error::Internal(format!(
            "expected {} pair scores, got {}",
            n * n.saturating_sub(1) / 2,
            pair.len()
        )));
    }
    let mut g = Graph::complete_undirected(nodes.to_vec())?;
    removal_pass(&mut g, pair);
    if !g.is_weakly_connected() {
        return Err(Error::Internal(
            "skeleton construction lost connectivity".to_string(),
        ));
    }
    Ok(g)
}
