//! BIC scoring: base-2 log-likelihood from empirical counts, a
//! free-parameter penalty, and a family-score cache shared across the
//! search.
//!
//! BIC(G) = LL(G) - (log2 N / 2) * p decomposes over families (node,
//! parent set), so every structure comparison reduces to a handful of
//! cached family lookups.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::graph::Graph;
use std::collections::HashMap;
use std::sync::Mutex;

/// Relative tolerance for score comparisons. Markov-equivalent structures
/// produce BIC values that agree only to rounding, so strict float
/// comparison would invent an ordering between them.
pub const SCORE_EPS: f64 = 1e-9;

/// Strictly greater under the relative tolerance.
pub fn score_gt(a: f64, b: f64) -> bool {
    a - b > SCORE_EPS * 1f64.max(a.abs()).max(b.abs())
}

/// Indistinguishable under the relative tolerance.
pub fn score_eq(a: f64, b: f64) -> bool {
    !score_gt(a, b) && !score_gt(b, a)
}

/// p = sum over nodes of (r_i - 1) * product of parent arities, using
/// declared arities.
pub fn free_parameters(g: &Graph, arities: &[usize]) -> Result<u64> {
    if arities.len() != g.n() {
        return Err(Error::Internal("arity list length mismatch".to_string()));
    }
    if !g.is_acyclic() {
        return Err(Error::Graph("free parameters need an acyclic graph".to_string()));
    }
    let mut p = 0u64;
    for v in 0..g.n() {
        let mut q = (arities[v] as u64) - 1;
        for parent in g.parents(v) {
            q *= arities[parent] as u64;
        }
        p += q;
    }
    Ok(p)
}

/// Log-likelihood and free-parameter count of one family (node plus sorted
/// parent list) on one dataset.
fn family_ll_params(d: &Dataset, node: usize, parents: &[usize]) -> (f64, u64) {
    let r = d.variable(node).arity();
    let mut q_total = 1u64;
    for &p in parents {
        q_total *= d.variable(p).arity() as u64;
    }
    let params = (r as u64 - 1) * q_total;
    let cells = q_total as usize * r;
    let mut counts = vec![0u64; cells];
    let node_col = d.column(node);
    for row in 0..d.n_rows() {
        let mut config = 0usize;
        for &p in parents {
            config = config * d.variable(p).arity() + d.column(p)[row] as usize;
        }
        counts[config * r + node_col[row] as usize] += 1;
    }
    let mut ll = 0.0;
    for j in 0..q_total as usize {
        let slice = &counts[j * r..(j + 1) * r];
        let nj: u64 = slice.iter().sum();
        if nj == 0 {
            continue;
        }
        for &njk in slice {
            if njk > 0 {
                ll += njk as f64 * (njk as f64 / nj as f64).log2();
            }
        }
    }
    (ll, params)
}

/// (node, sorted parents) → (family log-likelihood, parameter count).
type FamilyCache = HashMap<(usize, Vec<usize>), (f64, u64)>;

/// Dataset-bound scorer with a family cache. Cached entries are exact
/// recomputations; the cache only short-circuits repeated lookups.
pub struct ScoreContext<'a> {
    d: &'a Dataset,
    penalty_unit: f64,
    cache: Mutex<FamilyCache>,
}

impl<'a> ScoreContext<'a> {
    pub fn new(d: &'a Dataset) -> Self {
        ScoreContext {
            d,
            penalty_unit: (d.n_rows() as f64).log2() / 2.0,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn dataset(&self) -> &Dataset {
        self.d
    }

    /// log2(N) / 2: the per-parameter penalty.
    pub fn penalty_unit(&self) -> f64 {
        self.penalty_unit
    }

    fn family(&self, node: usize, parents: &[usize]) -> (f64, u64) {
        let mut sorted = parents.to_vec();
        sorted.sort_unstable();
        let key = (node, sorted);
        if let Some(&hit) = self.cache.lock().expect("cache lock").get(&key) {
            return hit;
        }
        let value = family_ll_params(self.d, node, &key.1);
        self.cache
            .lock()
            .expect("cache lock")
            .insert(key, value);
        value
    }

    /// BIC contribution of one family: LL minus the penalty on its
    /// parameters.
    pub fn family_score(&self, node: usize, parents: &[usize]) -> f64 {
        let (ll, params) = self.family(node, parents);
        ll - self.penalty_unit * params as f64
    }

    pub fn family_ll(&self, node: usize, parents: &[usize]) -> f64 {
        self.family(node, parents).0
    }

    /// Whole-graph BIC over the directed edges of `g` (undirected edges
    /// contribute no parents).
    pub fn bic(&self, g: &Graph) -> f64 {
        (0..g.n())
            .map(|v| self.family_score(v, &g.parents(v)))
            .sum()
    }

    pub fn log_likelihood(&self, g: &Graph) -> f64 {
        (0..g.n()).map(|v| self.family_ll(v, &g.parents(v))).sum()
    }
}

/// One-shot helpers for callers without a long-lived context.
pub fn log_likelihood(g: &Graph, d: &Dataset) -> f64 {
    ScoreContext::new(d).log_likelihood(g)
}

pub fn bic(g: &Graph, d: &Dataset) -> f64 {
    ScoreContext::new(d).bic(g)
}
