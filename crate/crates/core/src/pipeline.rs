//! End-to-end learner: phases 1-3 with per-phase timing and cooperative
//! timeout.
//!
//! Phase 1 scores every pair and triple and builds the association
//! skeleton; phase 2 orients it into a DAG; phase 3 hill-climbs with tabu
//! escapes under the independence constraints. A deadline is polled
//! between atomic steps. When it trips, the learner degrades instead of
//! erroring: before a skeleton exists the output is a chain over the
//! column order, after one exists the remaining work collapses to forced
//! orientation, and during search the best graph so far is returned. Such
//! outcomes carry `partial: true`.

use std::time::{Duration, Instant};

use crate::data::Dataset;
use crate::emsg::build_emsg;
use crate::error::Result;
use crate::graph::Graph;
use crate::mmd::{pair_scores, triple_scores, MmdTable};
use crate::orient::{force_orient, order_nodes, run_phase2};
use crate::score::ScoreContext;
use crate::search::{run_phase3, MoveConstraints};

/// Cooperative cutoff polled between atomic steps (one pair test, one
/// triple test, one search move). `none()` never expires.
#[derive(Debug, Clone, Copy)]
pub struct Deadline {
    at: Option<Instant>,
}

impl Deadline {
    pub fn none() -> Self {
        Deadline { at: None }
    }

    pub fn after(limit: Duration) -> Self {
        Deadline {
            at: Some(Instant::now() + limit),
        }
    }

    pub fn expired(&self) -> bool {
        self.at.is_some_and(|t| Instant::now() >= t)
    }
}

/// Marker returned by interruptible stages when the deadline passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Expired;

#[derive(Debug, Clone)]
pub struct LearnOptions {
    /// Wall-clock budget for the whole run; `None` never times out.
    pub timeout: Option<Duration>,
    /// Collect per-decision trace lines (orientations and search moves).
    pub trace: bool,
}

impl Default for LearnOptions {
    fn default() -> Self {
        LearnOptions {
            timeout: None,
            trace: true,
        }
    }
}

/// Wall-clock seconds spent in each phase.
#[derive(Debug, Clone, Copy)]
pub struct PhaseTiming {
    pub phase1_s: f64,
    pub phase2_s: f64,
    pub phase3_s: f64,
}

impl PhaseTiming {
    pub fn total_s(&self) -> f64 {
        self.phase1_s + self.phase2_s + self.phase3_s
    }

    /// Per-phase share of the total, summing to exactly 1. A zero total
    /// (degenerate inputs finish below timer resolution) is attributed
    /// entirely to phase 1.
    pub fn fractions(&self) -> [f64; 3] {
        let total = self.total_s();
        if total <= 0.0 {
            return [1.0, 0.0, 0.0];
        }
        let f1 = self.phase1_s / total;
        let f2 = self.phase2_s / total;
        [f1, f2, 1.0 - f1 - f2]
    }
}

#[derive(Debug, Clone)]
pub struct LearnOutcome {
    /// Fully directed, weakly connected DAG.
    pub graph: Graph,
    pub timing: PhaseTiming,
    /// True when the deadline cut any phase short.
    pub partial: bool,
    /// Pair tests performed by a completed phase 1, else 0.
    pub pair_tests: usize,
    /// Conditional (triple) tests performed by a completed phase 1, else 0.
    pub conditional_tests: usize,
    /// One line per orientation/search decision, empty unless requested.
    pub trace: Vec<String>,
    /// BIC of `graph` on the training data.
    pub bic: f64,
}

/// Chain over the column order: the connectivity-preserving stand-in when
/// the deadline expires before any association structure exists.
fn chain_fallback(names: Vec<String>) -> Result<Graph> {
    let mut g = Graph::new(names)?;
    for i in 1..g.n() {
        g.add_directed(i - 1, i)?;
    }
    Ok(g)
}

pub fn learn(d: &Dataset, opts: &LearnOptions) -> Result<LearnOutcome> {
    let stop = match opts.timeout {
        Some(limit) => Deadline::after(limit),
        None => Deadline::none(),
    };
    let mut trace = Vec::new();
    let ctx = ScoreContext::new(d);

    // Phase 1: association scores and skeleton.
    let t1 = Instant::now();
    let pair = match pair_scores(d, &stop) {
        Ok(pair) => pair,
        Err(Expired) => {
            let graph = chain_fallback(d.node_names())?;
            let bic = ctx.bic(&graph);
            return Ok(LearnOutcome {
                graph,
                timing: PhaseTiming {
                    phase1_s: t1.elapsed().as_secs_f64(),
                    phase2_s: 0.0,
                    phase3_s: 0.0,
                },
                partial: true,
                pair_tests: 0,
                conditional_tests: 0,
                trace,
                bic,
            });
        }
    };
    let skeleton = build_emsg(&d.node_names(), &pair)?;
    let triples = triple_scores(d, &pair, &stop);
    let phase1_s = t1.elapsed().as_secs_f64();

    let (table, triples_done) = match triples {
        Ok((triple, labels)) => (
            MmdTable::from_parts(d.n_vars(), pair, triple, labels),
            true,
        ),
        Err(Expired) => (
            MmdTable::from_parts(d.n_vars(), pair, Vec::new(), Vec::new()),
            false,
        ),
    };
    if !triples_done {
        // A skeleton exists but its conditional labels do not: force-orient
        // it and stop.
        let mut g = skeleton;
        let order = order_nodes(&g, table.pair_values());
        let t2 = Instant::now();
        force_orient(&mut g, &order, &mut trace)?;
        let bic = ctx.bic(&g);
        if !opts.trace {
            trace.clear();
        }
        return Ok(LearnOutcome {
            graph: g,
            timing: PhaseTiming {
                phase1_s,
                phase2_s: t2.elapsed().as_secs_f64(),
                phase3_s: 0.0,
            },
            partial: true,
            pair_tests: table.pair_tests(),
            conditional_tests: 0,
            trace,
            bic,
        });
    }

    // Phase 2: orientation.
    let t2 = Instant::now();
    let (directed, partial2) = run_phase2(&skeleton, &table, &ctx, &stop, &mut trace)?;
    let phase2_s = t2.elapsed().as_secs_f64();

    if partial2 {
        let bic = ctx.bic(&directed);
        if !opts.trace {
            trace.clear();
        }
        return Ok(LearnOutcome {
            graph: directed,
            timing: PhaseTiming {
                phase1_s,
                phase2_s,
                phase3_s: 0.0,
            },
            partial: true,
            pair_tests: table.pair_tests(),
            conditional_tests: table.conditional_tests(),
            trace,
            bic,
        });
    }

    // Phase 3: constrained search.
    let t3 = Instant::now();
    let constraints = MoveConstraints::from_table(&table);
    let (graph, partial3) = run_phase3(&directed, &ctx, &constraints, &stop, &mut trace);
    let phase3_s = t3.elapsed().as_secs_f64();

    let bic = ctx.bic(&graph);
    if !opts.trace {
        trace.clear();
    }
    Ok(LearnOutcome {
        graph,
        timing: PhaseTiming {
            phase1_s,
            phase2_s,
            phase3_s,
        },
        partial: partial3,
        pair_tests: table.pair_tests(),
        conditional_tests: table.conditional_tests(),
        trace,
        bic,
    })
}
