//! Pairwise and conditional marginal-discrepancy scores.
//!
//! The pair score MMD(A,B) averages four sub-scores: the mean and the max
//! absolute discrepancy between the marginal of one variable and its
//! conditional given each state of the other, in both directions, weighted
//! by 0.25. States with zero support are excluded from every average and
//! divisors shrink accordingly. The conditional score MMD(A,B|C) is the
//! support-weighted mean of the pair score within each stratum of C.

use crate::data::Dataset;
use crate::pipeline::{Deadline, Expired};

/// Scores at or below this floor are treated as no-dependency signals by
/// the skeleton and search constraints.
pub const DEPENDENCY_FLOOR: f64 = 0.05;

/// Outcome of comparing a conditional score against its pair score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TripleLabel {
    /// Conditioning induced dependency: conditional > 0.05 and more than
    /// 50% above the pair score.
    Dependent,
    /// Conditioning removed dependency: conditional < 0.05 and more than
    /// 50% below the pair score.
    Independent,
    /// Neither rule fired.
    Insignificant,
}

impl TripleLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            TripleLabel::Dependent => "dependent",
            TripleLabel::Independent => "independent",
            TripleLabel::Insignificant => "insignificant",
        }
    }
}

pub fn classify_triple(marginal: f64, conditional: f64) -> TripleLabel {
    if conditional > DEPENDENCY_FLOOR && conditional > 1.5 * marginal {
        TripleLabel::Dependent
    } else if conditional < DEPENDENCY_FLOOR && conditional < 0.5 * marginal {
        TripleLabel::Independent
    } else {
        TripleLabel::Insignificant
    }
}

/// Flat index of unordered pair (a, b), a < b, in ascending (a, b) order.
pub fn pair_index(n: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    a * n - a * (a + 1) / 2 + (b - a - 1)
}

fn cond_slot(a: usize, b: usize, c: usize) -> usize {
    c - (c > a) as usize - (c > b) as usize
}

/// Flat index of triple (pair {a,b}, conditioning node c).
pub fn triple_index(n: usize, a: usize, b: usize, c: usize) -> usize {
    pair_index(n, a, b) * (n - 2) + cond_slot(a.min(b), a.max(b), c)
}

/// Pair score from a joint count table (`counts[j * sb + i]` holds the
/// count of A = j, B = i). Zero-support rows and columns are excluded from
/// the averages.
fn mmd_from_counts(sa: usize, sb: usize, counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let row: Vec<u64> = (0..sa)
        .map(|j| (0..sb).map(|i| counts[j * sb + i]).sum())
        .collect();
    let col: Vec<u64> = (0..sb)
        .map(|i| (0..sa).map(|j| counts[j * sb + i]).sum())
        .collect();
    let sup_a: Vec<usize> = (0..sa).filter(|&j| row[j] > 0).collect();
    let sup_b: Vec<usize> = (0..sb).filter(|&i| col[i] > 0).collect();
    let pa: Vec<f64> = row.iter().map(|&c| c as f64 / n).collect();
    let pb: Vec<f64> = col.iter().map(|&c| c as f64 / n).collect();

    let forward = |sup_from: &[usize], sup_to: &[usize], p_to: &[f64], cell: &dyn Fn(usize, usize) -> u64, from_tot: &[u64]| {
        let mut mn = 0.0;
        let mut mx = 0.0;
        for &j in sup_from {
            let denom = from_tot[j] as f64;
            let mut sum = 0.0;
            let mut max = 0.0f64;
            for &i in sup_to {
                let d = (p_to[i] - cell(j, i) as f64 / denom).abs();
                sum += d;
                max = max.max(d);
            }
            mn += sum / sup_to.len() as f64;
            mx += max;
        }
        (mn / sup_from.len() as f64, mx / sup_from.len() as f64)
    };

    let (mn_ab, mx_ab) = forward(&sup_a, &sup_b, &pb, &|j, i| counts[j * sb + i], &row);
    let (mn_ba, mx_ba) = forward(&sup_b, &sup_a, &pa, &|i, j| counts[j * sb + i], &col);
    // grouped so the sum is bit-identical under argument swap
    0.25 * ((mn_ab + mn_ba) + (mx_ab + mx_ba))
}

fn joint_counts(d: &Dataset, a: usize, b: usize) -> (usize, usize, Vec<u64>) {
    let sa = d.variable(a).arity();
    let sb = d.variable(b).arity();
    let mut counts = vec![0u64; sa * sb];
    let (ca, cb) = (d.column(a), d.column(b));
    for r in 0..d.n_rows() {
        counts[ca[r] as usize * sb + cb[r] as usize] += 1;
    }
    (sa, sb, counts)
}

/// Marginal-discrepancy score of an unordered pair, in [0, 1]. Exactly
/// symmetric in its arguments.
pub fn mmd_pair(d: &Dataset, a: usize, b: usize) -> f64 {
    assert_ne!(a, b, "pair score needs two distinct variables");
    let (sa, sb, counts) = joint_counts(d, a, b);
    mmd_from_counts(sa, sb, &counts)
}

/// Conditional score: support-weighted mean over the states of `c` of the
/// pair score computed within each stratum. Zero-support strata are
/// skipped.
pub fn mmd_conditional(d: &Dataset, a: usize, b: usize, c: usize) -> f64 {
    assert!(a != b && b != c && a != c, "triple needs distinct variables");
    let sa = d.variable(a).arity();
    let sb = d.variable(b).arity();
    let sc = d.variable(c).arity();
    let mut strata = vec![0u64; sc * sa * sb];
    let mut stratum_rows = vec![0u64; sc];
    let (ca, cb, cc) = (d.column(a), d.column(b), d.column(c));
    for r in 0..d.n_rows() {
        let k = cc[r] as usize;
        strata[k * sa * sb + ca[r] as usize * sb + cb[r] as usize] += 1;
        stratum_rows[k] += 1;
    }
    let n = d.n_rows() as f64;
    let mut total = 0.0;
    for k in 0..sc {
        if stratum_rows[k] == 0 {
            continue;
        }
        let weight = stratum_rows[k] as f64 / n;
        let table = &strata[k * sa * sb..(k + 1) * sa * sb];
        total += weight * mmd_from_counts(sa, sb, table);
    }
    total
}

/// All pair and triple scores plus triple classifications for one dataset.
#[derive(Debug, Clone)]
pub struct MmdTable {
    n: usize,
    pair: Vec<f64>,
    triple: Vec<f64>,
    labels: Vec<TripleLabel>,
}

impl MmdTable {
    pub fn build(d: &Dataset) -> MmdTable {
        let pair = pair_scores(d, &Deadline::none()).expect("no deadline");
        let (triple, labels) = triple_scores(d, &pair, &Deadline::none()).expect("no deadline");
        MmdTable::from_parts(d.n_vars(), pair, triple, labels)
    }

    pub fn build_seq(d: &Dataset) -> MmdTable {
        let pair = pair_scores_seq(d, &Deadline::none()).expect("no deadline");
        let (triple, labels) =
            triple_scores_seq(d, &pair, &Deadline::none()).expect("no deadline");
        MmdTable::from_parts(d.n_vars(), pair, triple, labels)
    }

    pub fn from_parts(
        n: usize,
        pair: Vec<f64>,
        triple: Vec<f64>,
        labels: Vec<TripleLabel>,
    ) -> MmdTable {
        debug_assert_eq!(pair.len(), n * n.saturating_sub(1) / 2);
        debug_assert_eq!(triple.len(), labels.len());
        MmdTable {
            n,
            pair,
            triple,
            labels,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pair(&self, a: usize, b: usize) -> f64 {
        self.pair[pair_index(self.n, a, b)]
    }

    pub fn pair_values(&self) -> &[f64] {
        &self.pair
    }

    pub fn conditional(&self, a: usize, b: usize, c: usize) -> f64 {
        self.triple[triple_index(self.n, a, b, c)]
    }

    pub fn label(&self, a: usize, b: usize, c: usize) -> TripleLabel {
        self.labels[triple_index(self.n, a, b, c)]
    }

    /// True iff some conditioning node makes the pair conditionally
    /// independent.
    pub fn any_independent(&self, a: usize, b: usize) -> bool {
        (0..self.n)
            .filter(|&c| c != a && c != b)
            .any(|c| self.label(a, b, c) == TripleLabel::Independent)
    }

    /// Number of pair tests performed: |V|(|V|-1)/2.
    pub fn pair_tests(&self) -> usize {
        self.pair.len()
    }

    /// Number of conditional tests performed: |V|(|V|-1)(|V|-2)/2, counted
    /// per (pair, conditioning node).
    pub fn conditional_tests(&self) -> usize {
        self.triple.len()
    }
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            out.push((a, b));
        }
    }
    out
}

fn all_triples(n: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for (a, b) in all_pairs(n) {
        for c in 0..n {
            if c != a && c != b {
                out.push((a, b, c));
            }
        }
    }
    out
}

pub fn pair_scores_seq(d: &Dataset, stop: &Deadline) -> Result<Vec<f64>, Expired> {
    all_pairs(d.n_vars())
        .iter()
        .map(|&(a, b)| {
            if stop.expired() {
                Err(Expired)
            } else {
                Ok(mmd_pair(d, a, b))
            }
        })
        .collect()
}

pub fn triple_scores_seq(
    d: &Dataset,
    pair: &[f64],
    stop: &Deadline,
) -> Result<(Vec<f64>, Vec<TripleLabel>), Expired> {
    let n = d.n_vars();
    let scored: Result<Vec<(f64, TripleLabel)>, Expired> = all_triples(n)
        .iter()
        .map(|&(a, b, c)| {
            if stop.expired() {
                return Err(Expired);
            }
            let cond = mmd_conditional(d, a, b, c);
            Ok((cond, classify_triple(pair[pair_index(n, a, b)], cond)))
        })
        .collect();
    Ok(scored?.into_iter().unzip())
}

#[cfg(feature = "parallel")]
pub fn pair_scores(d: &Dataset, stop: &Deadline) -> Result<Vec<f64>, Expired> {
    use rayon::prelude::*;
    all_pairs(d.n_vars())
        .par_iter()
        .map(|&(a, b)| {
            if stop.expired() {
                Err(Expired)
            } else {
                Ok(mmd_pair(d, a, b))
            }
        })
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn pair_scores(d: &Dataset, stop: &Deadline) -> Result<Vec<f64>, Expired> {
    pair_scores_seq(d, stop)
}

#[cfg(feature = "parallel")]
pub fn triple_scores(
    d: &Dataset,
    pair: &[f64],
    stop: &Deadline,
) -> Result<(Vec<f64>, Vec<TripleLabel>), Expired> {
    use rayon::prelude::*;
    let n = d.n_vars();
    let scored: Result<Vec<(f64, TripleLabel)>, Expired> = all_triples(n)
        .par_iter()
        .map(|&(a, b, c)| {
            if stop.expired() {
                return Err(Expired);
            }
            let cond = mmd_conditional(d, a, b, c);
            Ok((cond, classify_triple(pair[pair_index(n, a, b)], cond)))
        })
        .collect();
    Ok(scored?.into_iter().unzip())
}

#[cfg(not(feature = "parallel"))]
pub fn triple_scores(
    d: &Dataset,
    pair: &[f64],
    stop: &Deadline,
) -> Result<(Vec<f64>, Vec<TripleLabel>), Expired> {
    triple_scores_seq(d, pair, stop)
}
