//! Discrete Bayesian networks loaded from JSON, used as ground truth for
//! sampling and evaluation.
//!
//! Document shape:
//!
//! ```json
//! {
//!   "variables": [{"name": "rain", "states": ["yes", "no"]}, ...],
//!   "edges": [["rain", "wet"], ...],
//!   "cpts": {"wet": {"rain=yes": [0.9, 0.1], "rain=no": [0.1, 0.9]}, ...}
//! }
//! ```
//!
//! A CPT row key lists `parent=state` pairs for every parent, parents
//! sorted by name, joined with commas; root nodes use the empty key.
//! Keys may optionally be wrapped in angle brackets. Row probabilities
//! follow the declared state order of the child and must sum to 1 within
//! 1e-9. Every parent-state combination must appear exactly once.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Variable;
use crate::error::{Error, Result};
use crate::graph::Graph;

const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawVariable {
    name: String,
    states: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawNetwork {
    variables: Vec<RawVariable>,
    edges: Vec<(String, String)>,
    cpts: BTreeMap<String, BTreeMap<String, Vec<f64>>>,
}

/// One node's conditional probability table, dense over parent
/// configurations.
#[derive(Debug, Clone)]
struct Cpt {
    /// Parent node indices sorted by parent name.
    parents: Vec<usize>,
    /// `table[config * arity + state]`; the last parent in `parents`
    /// varies fastest across configs.
    table: Vec<f64>,
}

/// A validated discrete Bayesian network.
#[derive(Debug, Clone)]
pub struct Network {
    variables: Vec<Variable>,
    graph: Graph,
    cpts: Vec<Cpt>,
}

fn strip_brackets(key: &str) -> &str {
    let key = key.trim();
    key.strip_prefix('<')
        .and_then(|k| k.strip_suffix('>'))
        .unwrap_or(key)
}

impl Network {
    pub fn load<P: AsRef<Path>>(path: P) -> Result<Network> {
        let file = File::open(path.as_ref())?;
        Network::from_reader(BufReader::new(file))
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Network> {
        let raw: RawNetwork = serde_json::from_reader(reader)?;
        Network::from_raw(raw)
    }

    pub fn from_json_str(text: &str) -> Result<Network> {
        let raw: RawNetwork = serde_json::from_str(text)?;
        Network::from_raw(raw)
    }

    fn from_raw(raw: RawNetwork) -> Result<Network> {
        if raw.variables.is_empty() {
            return Err(Error::Network("no variables declared".to_string()));
        }
        let mut variables = Vec::with_capacity(raw.variables.len());
        for v in &raw.variables {
            if v.states.len() < 2 {
                return Err(Error::Network(format!(
                    "variable '{}' needs at least two states",
                    v.name
                )));
            }
            let mut seen = v.states.clone();
            seen.sort();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Network(format!(
                    "variable '{}' declares a duplicate state",
                    v.name
                )));
            }
            variables.push(Variable {
                name: v.name.clone(),
                states: v.states.clone(),
            });
        }
        let names: Vec<String> = variables.iter().map(|v| v.name.clone()).collect();
        let mut graph = Graph::new(names)?;
        for (parent, child) in &raw.edges {
            let p = graph
                .node_index(parent)
                .ok_or_else(|| Error::Network(format!("edge names unknown variable '{parent}'")))?;
            let c = graph
                .node_index(child)
                .ok_or_else(|| Error::Network(format!("edge names unknown variable '{child}'")))?;
            graph
                .add_directed(p, c)
                .map_err(|e| Error::Network(format!("edge {parent}->{child}: {e}")))?;
        }
        if !graph.is_acyclic() {
            return Err(Error::Network("cyclic structure".to_string()));
        }
        for name in raw.cpts.keys() {
            if graph.node_index(name).is_none() {
                return Err(Error::Network(format!(
                    "cpt given for unknown variable '{name}'"
                )));
            }
        }

        let mut cpts = Vec::with_capacity(variables.len());
        for (node, var) in variables.iter().enumerate() {
            let mut parents = graph.parents(node);
            parents.sort_by(|&a, &b| variables[a].name.cmp(&variables[b].name));
            let n_configs: usize = parents.iter().map(|&p| variables[p].arity()).product();
            let arity = var.arity();
            let rows = raw
                .cpts
                .get(&var.name)
                .ok_or_else(|| Error::Network(format!("missing cpt for '{}'", var.name)))?;
            let mut table = vec![f64::NAN; n_configs * arity];
            let mut filled = vec![false; n_configs];
            for (key, probs) in rows {
                let config = parse_row_key(&variables, &parents, &var.name, key)?;
                if filled[config] {
                    return Err(Error::Network(format!(
                        "cpt for '{}' repeats combination '{}'",
                        var.name,
                        strip_brackets(key)
                    )));
                }
                filled[config] = true;
                if probs.len() != arity {
                    return Err(Error::Network(format!(
                        "cpt for '{}' row '{}' has {} probabilities, expected {}",
                        var.name,
                        strip_brackets(key),
                        probs.len(),
                        arity
                    )));
                }
                if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                    return Err(Error::Network(format!(
                        "cpt for '{}' row '{}' has a probability outside [0,1]",
                        var.name,
                        strip_brackets(key)
                    )));
                }
                let sum: f64 = probs.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    return Err(Error::Network(format!(
                        "cpt for '{}' row '{}' sums to {sum}, expected 1",
                        var.name,
                        strip_brackets(key)
                    )));
                }
                table[config * arity..(config + 1) * arity].copy_from_slice(probs);
            }
            if let Some(missing) = filled.iter().position(|&f| !f) {
                return Err(Error::Network(format!(
                    "cpt for '{}' is missing row '{}'",
                    var.name,
                    row_key(&variables, &parents, missing)
                )));
            }
            cpts.push(Cpt { parents, table });
        }
        Ok(Network {
            variables,
            graph,
            cpts,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, idx: usize) -> &Variable {
        &self.variables[idx]
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Parent indices of `node` sorted by parent name — the CPT's
    /// configuration order.
    pub fn parents_sorted(&self, node: usize) -> &[usize] {
        &self.cpts[node].parents
    }

    /// Probability row for `node` given a full sample vector (only the
    /// parent entries are read).
    pub fn cpt_row(&self, node: usize, sample: &[u16]) -> &[f64] {
        let cpt = &self.cpts[node];
        let mut config = 0usize;
        for &p in &cpt.parents {
            config = config * self.variables[p].arity() + sample[p] as usize;
        }
        let arity = self.variables[node].arity();
        &cpt.table[config * arity..(config + 1) * arity]
    }

    /// Independent parameters: for each node, (arity - 1) per parent
    /// configuration.
    pub fn free_parameters(&self) -> u64 {
        self.variables
            .iter()
            .enumerate()
            .map(|(node, v)| {
                let configs: u64 = self.cpts[node]
                    .parents
                    .iter()
                    .map(|&p| self.variables[p].arity() as u64)
                    .product();
                (v.arity() as u64 - 1) * configs
            })
            .sum()
    }

    /// Node depths: 0 for roots, else one past the deepest parent.
    pub fn depths(&self) -> Vec<usize> {
        let order = self
            .graph
            .topological_order()
            .expect("validated network is acyclic");
        let mut depth = vec![0usize; self.n_vars()];
        for &node in &order {
            depth[node] = self
                .graph
                .parents(node)
                .iter()
                .map(|&p| depth[p] + 1)
                .max()
                .unwrap_or(0);
        }
        depth
    }

    /// The fixed sampling order: stable sort of nodes by (depth, name).
    pub fn canonical_order(&self) -> Vec<usize> {
        let depth = self.depths();
        let mut order: Vec<usize> = (0..self.n_vars()).collect();
        order.sort_by(|&a, &b| {
            depth[a]
                .cmp(&depth[b])
                .then_with(|| self.variables[a].name.cmp(&self.variables[b].name))
        });
        order
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut cpts: BTreeMap<String, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
        for (node, var) in self.variables.iter().enumerate() {
            let cpt = &self.cpts[node];
            let n_configs: usize = cpt
                .parents
                .iter()
                .map(|&p| self.variables[p].arity())
                .product();
            let arity = var.arity();
            let mut rows = BTreeMap::new();
            for config in 0..n_configs {
                rows.insert(
                    row_key(&self.variables, &cpt.parents, config),
                    cpt.table[config * arity..(config + 1) * arity].to_vec(),
                );
            }
            cpts.insert(var.name.clone(), rows);
        }
        let raw = RawNetwork {
            variables: self
                .variables
                .iter()
                .map(|v| RawVariable {
                    name: v.name.clone(),
                    states: v.states.clone(),
                })
                .collect(),
            edges: self
                .graph
                .directed_edges()
                .into_iter()
                .map(|(p, c)| (self.variables[p].name.clone(), self.variables[c].name.clone()))
                .collect(),
            cpts,
        };
        Ok(serde_json::to_string_pretty(&raw)?)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut out = BufWriter::new(File::create(path.as_ref())?);
        out.write_all(self.to_json_string()?.as_bytes())?;
        out.write_all(b"\n")?;
        Ok(())
    }
}

/// Canonical key for a parent configuration, e.g. `"rain=yes,wind=no"`.
fn row_key(variables: &[Variable], parents: &[usize], config: usize) -> String {
    let mut states = vec![0usize; parents.len()];
    let mut rest = config;
    for (slot, &p) in parents.iter().enumerate().rev() {
        let arity = variables[p].arity();
        states[slot] = rest % arity;
        rest /= arity;
    }
    parents
        .iter()
        .zip(&states)
        .map(|(&p, &s)| format!("{}={}", variables[p].name, variables[p].states[s]))
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_row_key(
    variables: &[Variable],
    parents: &[usize],
    node: &str,
    key: &str,
) -> Result<usize> {
    let inner = strip_brackets(key);
    let parts: Vec<&str> = if inner.is_empty() {
        Vec::new()
    } else {
        inner.split(',').collect()
    };
    if parts.len() != parents.len() {
        return Err(Error::Network(format!(
            "cpt for '{node}' row '{inner}' names {} parents, expected {}",
            parts.len(),
            parents.len()
        )));
    }
    let mut config = 0usize;
    for (&p, part) in parents.iter().zip(&parts) {
        let (pname, state) = part.trim().split_once('=').ok_or_else(|| {
            Error::Network(format!("cpt for '{node}' row '{inner}': bad entry '{part}'"))
        })?;
        let var = &variables[p];
        if pname.trim() != var.name {
            return Err(Error::Network(format!(
                "cpt for '{node}' row '{inner}': expected parent '{}' (parents sorted by name), found '{pname}'",
                var.name
            )));
        }
        let s = var.state_index(state.trim()).ok_or_else(|| {
            Error::Network(format!(
                "cpt for '{node}' row '{inner}': '{}' is not a state of '{}'",
                state.trim(),
                var.name
            ))
        })?;
        config = config * var.arity() + s;
    }
    Ok(config)
}
