//! Forward sampling of synthetic datasets from a Bayesian network.
//!
//! Rows are drawn one at a time; within a row, nodes are visited in the
//! network's canonical order (depth, then name), so every parent is
//! realized before its children. A single seeded ChaCha8 stream drives the
//! whole dataset, making output a pure function of (network, n, seed).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::Result;
use crate::net::Network;

/// Identifies the sampling algorithm in dataset metadata; bump when the
/// draw order or RNG changes.
pub const GENERATOR_ID: &str = "chacha8-rowmajor-v1";

/// Draw `n` rows from `net`. Column order matches the network's variable
/// declaration order.
pub fn forward_sample(net: &Network, n: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = net.canonical_order();
    let k = net.n_vars();
    let mut columns = vec![Vec::with_capacity(n); k];
    let mut row = vec![0u16; k];
    for _ in 0..n {
        for &node in &order {
            let probs = net.cpt_row(node, &row);
            row[node] = pick(probs, rng.gen::<f64>());
        }
        for (node, col) in columns.iter_mut().enumerate() {
            col.push(row[node]);
        }
    }
    Dataset::from_parts(net.variables().to_vec(), columns)
}

fn pick(probs: &[f64], u: f64) -> u16 {
    let mut cumulative = 0.0;
    for (state, &p) in probs.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return state as u16;
        }
    }
    (probs.len() - 1) as u16
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::Network;

    fn chain() -> Network {
        Network::from_json_str(
            r#"{
                "variables": [
                    {"name": "a", "states": ["on", "off"]},
                    {"name": "b", "states": ["on", "off"]}
                ],
                "edges": [["a", "b"]],
                "cpts": {
                    "a": {"": [0.3, 0.7]},
                    "b": {"a=on": [0.9, 0.1], "a=off": [0.2, 0.8]}
                }
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn degenerate_root_yields_a_constant_column() {
        let net = Network::from_json_str(
            r#"{
                "variables": [{"name": "r", "states": ["s", "t"]}],
                "edges": [],
                "cpts": {"r": {"": [1.0, 0.0]}}
            }"#,
        )
        .unwrap();
        let d = forward_sample(&net, 500, 9).unwrap();
        assert!(d.column(0).iter().all(|&v| v == 0));
    }

    #[test]
    fn same_seed_reproduces_the_dataset_exactly() {
        let net = chain();
        let d1 = forward_sample(&net, 2000, 42).unwrap();
        let d2 = forward_sample(&net, 2000, 42).unwrap();
        assert_eq!(d1.column(0), d2.column(0));
        assert_eq!(d1.column(1), d2.column(1));
        let d3 = forward_sample(&net, 2000, 43).unwrap();
        assert_ne!(d1.column(0), d3.column(0));
    }

    #[test]
    fn binary_root_frequency_tracks_its_probability() {
        let net = chain();
        let d = forward_sample(&net, 100_000, 7).unwrap();
        let on = d.column(0).iter().filter(|&&v| v == 0).count() as f64;
        let freq = on / 100_000.0;
        assert!((freq - 0.3).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn conditional_frequencies_track_the_cpt() {
        let net = chain();
        let d = forward_sample(&net, 100_000, 11).unwrap();
        let (mut n_on, mut n_on_b_on) = (0u32, 0u32);
        for i in 0..d.n_rows() {
            if d.column(0)[i] == 0 {
                n_on += 1;
                if d.column(1)[i] == 0 {
                    n_on_b_on += 1;
                }
            }
        }
        let freq = n_on_b_on as f64 / n_on as f64;
        assert!((freq - 0.9).abs() < 0.02, "freq {freq}");
    }

    #[test]
    fn pairwise_joint_close_to_the_model_joint() {
        let net = chain();
        let n = 100_000usize;
        let d = forward_sample(&net, n, 3).unwrap();
        let exact = [[0.3 * 0.9, 0.3 * 0.1], [0.7 * 0.2, 0.7 * 0.8]];
        let mut counts = [[0usize; 2]; 2];
        for i in 0..n {
            counts[d.column(0)[i] as usize][d.column(1)[i] as usize] += 1;
        }
        let mut l1 = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                l1 += (counts[a][b] as f64 / n as f64 - exact[a][b]).abs();
            }
        }
        assert!(l1 < 0.02, "l1 {l1}");
    }

    #[test]
    fn children_declared_before_parents_still_copy_them() {
        // b is declared first but depends deterministically on a; correct
        // draw order makes the columns identical.
        let net = Network::from_json_str(
            r#"{
                "variables": [
                    {"name": "b", "states": ["on", "off"]},
                    {"name": "a", "states": ["on", "off"]}
                ],
                "edges": [["a", "b"]],
                "cpts": {
                    "a": {"": [0.4, 0.6]},
                    "b": {"a=on": [1.0, 0.0], "a=off": [0.0, 1.0]}
                }
            }"#,
        )
        .unwrap();
        let d = forward_sample(&net, 5000, 21).unwrap();
        let b = d.var_index("b").unwrap();
        let a = d.var_index("a").unwrap();
        assert_eq!(d.column(a), d.column(b));
        assert!(d.column(a).contains(&1));
    }

    #[test]
    fn state_picker_handles_rounding_at_the_top() {
        assert_eq!(pick(&[0.25, 0.75], 0.0), 0);
        assert_eq!(pick(&[0.25, 0.75], 0.2499), 0);
        assert_eq!(pick(&[0.25, 0.75], 0.25), 1);
        assert_eq!(pick(&[0.3, 0.3, 0.4], 0.99999), 2);
        // cumulative sums can fall a hair short of 1.0
        assert_eq!(pick(&[0.1, 0.2, 0.7], 1.0 - 1e-16), 2);
    }
}
