//! Accuracy of a learned graph against a ground-truth DAG.
//!
//! Edges are compared per unordered node pair with half credit for a
//! matched adjacency carrying the wrong or no direction: such an edge
//! splits as 0.5 true positive / 0.5 false negative and is never charged
//! as a false adjacency. All downstream metrics (F1, SHD = FP + FN, BSF)
//! inherit that convention, so a single reversed edge costs 0.5 SHD.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Fractional confusion counts over the pair universe; values move in half
/// units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionCounts {
    pub true_positive: f64,
    pub true_negative: f64,
    pub false_positive: f64,
    pub false_negative: f64,
}

impl ConfusionCounts {
    /// True edge count: tp + fn.
    pub fn actual_edges(&self) -> f64 {
        self.true_positive + self.false_negative
    }

    /// True independence count: tn + fp.
    pub fn actual_gaps(&self) -> f64 {
        self.true_negative + self.false_positive
    }
}

/// Per-pair edge marks of `truth` looked up by node name so the two graphs
/// may order their nodes differently.
fn truth_indices(learned: &Graph, truth: &Graph) -> Result<Vec<usize>> {
    if learned.n() != truth.n() {
        return Err(Error::NodeMismatch(format!(
            "learned has {} nodes, truth has {}",
            learned.n(),
            truth.n()
        )));
    }
    learned
        .nodes()
        .iter()
        .map(|name| {
            truth
                .node_index(name)
                .ok_or_else(|| Error::NodeMismatch(format!("node '{name}' missing from truth")))
        })
        .collect()
}

/// Orientation-aware confusion: exact directed match scores 1 true
/// positive; matched adjacency with wrong or undirected mark scores half;
/// unmatched edges score whole false positives/negatives.
pub fn confusion(learned: &Graph, truth: &Graph) -> Result<ConfusionCounts> {
    let map = truth_indices(learned, truth)?;
    let mut c = ConfusionCounts {
        true_positive: 0.0,
        true_negative: 0.0,
        false_positive: 0.0,
        false_negative: 0.0,
    };
    for a in 0..learned.n() {
        for b in (a + 1)..learned.n() {
            let (ta, tb) = (map[a], map[b]);
            let learned_adj = learned.is_adjacent(a, b);
            let truth_adj = truth.is_adjacent(ta, tb);
            match (learned_adj, truth_adj) {
                (true, true) => {
                    let matched = (learned.has_directed(a, b) && truth.has_directed(ta, tb))
                        || (learned.has_directed(b, a) && truth.has_directed(tb, ta))
                        || (learned.has_undirected(a, b) && truth.has_undirected(ta, tb));
                    if matched {
                        c.true_positive += 1.0;
                    } else {
                        c.true_positive += 0.5;
                        c.false_negative += 0.5;
                    }
                }
                (false, true) => c.false_negative += 1.0,
                (true, false) => c.false_positive += 1.0,
                (false, false) => c.true_negative += 1.0,
            }
        }
    }
    Ok(c)
}

/// Adjacency-only confusion: direction is ignored entirely.
pub fn skeleton_confusion(learned: &Graph, truth: &Graph) -> Result<ConfusionCounts> {
    let map = truth_indices(learned, truth)?;
    let mut c = ConfusionCounts {
        true_positive: 0.0,
        true_negative: 0.0,
        false_positive: 0.0,
        false_negative: 0.0,
    };
    for a in 0..learned.n() {
        for b in (a + 1)..learned.n() {
            match (learned.is_adjacent(a, b), truth.is_adjacent(map[a], map[b])) {
                (true, true) => c.true_positive += 1.0,
                (false, true) => c.false_negative += 1.0,
                (true, false) => c.false_positive += 1.0,
                (false, false) => c.true_negative += 1.0,
            }
        }
    }
    Ok(c)
}

/// Precision, recall, and their harmonic mean; all zero when no true
/// positives exist.
pub fn f1(c: &ConfusionCounts) -> (f64, f64, f64) {
    if c.true_positive == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let precision = c.true_positive / (c.true_positive + c.false_positive);
    let recall = c.true_positive / (c.true_positive + c.false_negative);
    let f = 2.0 * precision * recall / (precision + recall);
    (precision, recall, f)
}

/// Structural Hamming distance under the half-credit convention.
pub fn shd(c: &ConfusionCounts) -> f64 {
    c.false_positive + c.false_negative
}

/// Balanced score 0.5(TP/a + TN/i - FP/i - FN/a) where a is the true edge
/// count and i the true gap count. Undefined when either is zero.
pub fn bsf(c: &ConfusionCounts) -> Result<f64> {
    let a = c.actual_edges();
    let i = c.actual_gaps();
    if a == 0.0 {
        return Err(Error::MetricUndefined(
            "balanced score needs at least one true edge".to_string(),
        ));
    }
    if i == 0.0 {
        return Err(Error::MetricUndefined(
            "balanced score needs at least one true non-edge".to_string(),
        ));
    }
    Ok(0.5 * (c.true_positive / a + c.true_negative / i
        - c.false_positive / i
        - c.false_negative / a))
}

/// Learned edge count minus true edge count.
pub fn edge_delta(learned: &Graph, truth: &Graph) -> i64 {
    learned.n_edges() as i64 - truth.n_edges() as i64
}

/// One benchmark result row.
#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub case: String,
    pub n: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub shd: f64,
    pub bsf: f64,
    pub components: usize,
    pub edge_delta: i64,
    pub phase_fractions: [f64; 3],
    pub runtime_s: f64,
}

impl MetricsReport {
    pub fn from_graphs(
        case: impl Into<String>,
        n: usize,
        learned: &Graph,
        truth: &Graph,
        phase_fractions: [f64; 3],
        runtime_s: f64,
    ) -> Result<MetricsReport> {
        let c = confusion(learned, truth)?;
        let (precision, recall, f) = f1(&c);
        Ok(MetricsReport {
            case: case.into(),
            n,
            precision,
            recall,
            f1: f,
            shd: shd(&c),
            bsf: bsf(&c)?,
            components: learned.weak_components().0,
            edge_delta: edge_delta(learned, truth),
            phase_fractions,
            runtime_s,
        })
    }

    pub fn csv_header() -> &'static str {
        "case,n,f1,shd,bsf,components,delta,phase1_frac,phase2_frac,phase3_frac,runtime_s"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.3}",
            self.case,
            self.n,
            self.f1,
            self.shd,
            self.bsf,
            self.components,
            self.edge_delta,
            self.phase_fractions[0],
            self.phase_fractions[1],
            self.phase_fractions[2],
            self.runtime_s
        )
    }
}
