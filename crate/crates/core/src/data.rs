//! Complete discrete datasets: load, validate, and query empirical
//! marginal and conditional distributions.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::io::Read;

/// A named categorical variable with a fixed, ordered state list.
///
/// State order is frozen when the variable is created (first appearance in
/// the source file, or declaration order in a network file) and never
/// changes afterwards; every score in the crate indexes states by this
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub states: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, states: Vec<String>) -> Self {
        Variable {
            name: name.into(),
            states,
        }
    }

    pub fn arity(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }
}

/// A complete discrete data table, stored column-major.
///
/// Every cell holds the index of a declared state of its column's variable;
/// there are no missing values.
#[derive(Debug, Clone)]
pub struct Dataset {
    variables: Vec<Variable>,
    columns: Vec<Vec<u16>>,
    n_rows: usize,
}

impl Dataset {
    /// Build a dataset from pre-validated parts. Columns must be equal
    /// length and every cell must index a declared state.
    pub fn from_parts(variables: Vec<Variable>, columns: Vec<Vec<u16>>) -> Result<Self> {
        if variables.len() != columns.len() {
            return Err(Error::Internal(
                "variable/column count mismatch".to_string(),
            ));
        }
        let n_rows = columns.first().map_or(0, |c| c.len());
        if n_rows == 0 {
            return Err(Error::EmptyDataset);
        }
        for (v, col) in variables.iter().zip(&columns) {
            if col.len() != n_rows {
                return Err(Error::Internal(format!(
                    "column '{}' has {} rows, expected {}",
                    v.name,
                    col.len(),
                    n_rows
                )));
            }
            if v.arity() < 2 {
                return Err(Error::SingleStateColumn(v.name.clone()));
            }
            if let Some(&bad) = col.iter().find(|&&s| (s as usize) >= v.arity()) {
                return Err(Error::Internal(format!(
                    "cell value {} out of range for '{}'",
                    bad, v.name
                )));
            }
        }
        Ok(Dataset {
            variables,
            columns,
            n_rows,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
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

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn column(&self, idx: usize) -> &[u16] {
        &self.columns[idx]
    }

    pub fn node_names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    /// Write as CSV: header row of variable names, then one row per sample
    /// with state labels.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<&str> = self.variables.iter().map(|v| v.name.as_str()).collect();
        writeln!(out, "{}", header.join(","))?;
        for r in 0..self.n_rows {
            let mut line = String::new();
            for (c, var) in self.variables.iter().enumerate() {
                if c > 0 {
                    line.push(',');
                }
                line.push_str(&var.states[self.columns[c][r] as usize]);
            }
            writeln!(out, "{}", line)?;
        }
        Ok(())
    }
}

/// Parse a CSV dataset: first row is the header, every value is an opaque
/// category label. States are declared in first-appearance order.
pub fn load_dataset<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    {
        let mut seen = HashMap::new();
        for h in &headers {
            if seen.insert(h.clone(), ()).is_some() {
                return Err(Error::DuplicateHeader(h.clone()));
            }
        }
    }
    let n_cols = headers.len();
    let mut state_maps: Vec<HashMap<String, u16>> = vec![HashMap::new(); n_cols];
    let mut states: Vec<Vec<String>> = vec![Vec::new(); n_cols];
    let mut columns: Vec<Vec<u16>> = vec![Vec::new(); n_cols];

    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 2; // 1-based file line, after the header
        if record.len() != n_cols {
            return Err(Error::RaggedRow {
                row,
                found: record.len(),
                expected: n_cols,
            });
        }
        for (c, raw) in record.iter().enumerate() {
            let value = raw.trim();
            if value.is_empty() {
                return Err(Error::MissingCell {
                    row,
                    column: headers[c].clone(),
                });
            }
            let next = states[c].len() as u16;
            let idx = *state_maps[c].entry(value.to_string()).or_insert_with(|| {
                states[c].push(value.to_string());
                next
            });
            columns[c].push(idx);
        }
    }

    if columns.first().map_or(0, |c| c.len()) == 0 {
        return Err(Error::EmptyDataset);
    }
    for (c, s) in states.iter().enumerate() {
        if s.len() < 2 {
            return Err(Error::SingleStateColumn(headers[c].clone()));
        }
    }

    let variables = headers
        .into_iter()
        .zip(states)
        .map(|(name, states)| Variable { name, states })
        .collect();
    Dataset::from_parts(variables, columns)
}

/// An empirical distribution over one variable's states.
///
/// `support` is the number of rows the estimate is based on; a zero-support
/// conditioning event yields an empty-flagged distribution rather than an
/// error.
#[derive(Debug, Clone)]
pub struct Distribution {
    pub variable: String,
    pub probabilities: Vec<f64>,
    pub support: usize,
}

impl Distribution {
    pub fn is_empty(&self) -> bool {
        self.support == 0
    }
}

/// Empirical marginal distribution of variable `a`: raw frequencies, no
/// smoothing.
pub fn marginal(d: &Dataset, a: usize) -> Distribution {
    conditional(d, a, &[])
}

/// Empirical distribution of `target` restricted to rows matching `given`.
/// Zero matching rows is a flagged return, not an error.
pub fn conditional(d: &Dataset, target: usize, given: &[(usize, u16)]) -> Distribution {
    let arity = d.variable(target).arity();
    let mut counts = vec![0usize; arity];
    let mut support = 0usize;
    let target_col = d.column(target);
    'rows: for r in 0..d.n_rows() {
        for &(v, s) in given {
            if d.column(v)[r] != s {
                continue 'rows;
            }
        }
        counts[target_col[r] as usize] += 1;
        support += 1;
    }
    let probabilities = if support == 0 {
        vec![0.0; arity]
    } else {
        counts
            .iter()
            .map(|&c| c as f64 / support as f64)
            .collect()
    };
    Distribution {
        variable: d.variable(target).name.clone(),
        probabilities,
        support,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_col(rows: &[(&str, &str)]) -> Dataset {
        let mut csv = String::from("A,B\n");
        for (a, b) in rows {
            csv.push_str(&format!("{},{}\n", a, b));
        }
        load_dataset(csv.as_bytes()).unwrap()
    }

    #[test]
    fn load_two_binary_columns() {
        let d = two_col(&[("a", "x"), ("b", "y")]);
        assert_eq!(d.n_vars(), 2);
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.variable(0).states, vec!["a", "b"]);
        assert_eq!(d.variable(1).states, vec!["x", "y"]);
    }

    #[test]
    fn empty_cell_is_rejected_with_location() {
        let err = load_dataset("A,B\na,x\nb,\n".as_bytes()).unwrap_err();
        match err {
            Error::MissingCell { row, column } => {
                assert_eq!(row, 3);
                assert_eq!(column, "B");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn duplicate_header_is_rejected() {
        let err = load_dataset("A,A\na,x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::DuplicateHeader(_)));
    }

    #[test]
    fn single_state_column_is_rejected() {
        let err = load_dataset("A,B\na,x\na,y\n".as_bytes()).unwrap_err();
        match err {
            Error::SingleStateColumn(name) => assert_eq!(name, "A"),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn no_data_rows_is_rejected() {
        assert!(matches!(
            load_dataset("A,B\n".as_bytes()),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn eight_column_sample_loads() {
        let mut csv = String::from("v0,v1,v2,v3,v4,v5,v6,v7\n");
        for i in 0..100 {
            let row: Vec<String> = (0..8).map(|c| format!("s{}", (i + c) % 2)).collect();
            csv.push_str(&row.join(","));
            csv.push('\n');
        }
        let d = load_dataset(csv.as_bytes()).unwrap();
        assert_eq!(d.n_vars(), 8);
        assert_eq!(d.n_rows(), 100);
    }

    #[test]
    fn marginal_uniform_and_degenerate() {
        let d = two_col(&[("a", "x"), ("a", "y"), ("b", "x"), ("b", "y")]);
        let m = marginal(&d, 0);
        assert_eq!(m.probabilities, vec![0.5, 0.5]);

        // all-a rows with a declared b state
        let vars = vec![
            Variable::new("A", vec!["a".into(), "b".into()]),
            Variable::new("B", vec!["x".into(), "y".into()]),
        ];
        let d = Dataset::from_parts(vars, vec![vec![0, 0, 0, 0], vec![0, 1, 0, 1]]).unwrap();
        let m = marginal(&d, 0);
        assert_eq!(m.probabilities, vec![1.0, 0.0]);
    }

    #[test]
    fn marginal_matches_hand_tally_on_fixture() {
        // 20 rows, A has 7 p / 9 q / 4 r by construction.
        let mut csv = String::from("A,B\n");
        for _ in 0..7 {
            csv.push_str("p,x\n");
        }
        for _ in 0..9 {
            csv.push_str("q,y\n");
        }
        for _ in 0..4 {
            csv.push_str("r,x\n");
        }
        let d = load_dataset(csv.as_bytes()).unwrap();
        let m = marginal(&d, 0);
        assert_eq!(m.probabilities, vec![7.0 / 20.0, 9.0 / 20.0, 4.0 / 20.0]);
        let c = conditional(&d, 0, &[(1, 0)]);
        // B=x rows: 7 p, 4 r
        assert_eq!(c.support, 11);
        assert_eq!(c.probabilities, vec![7.0 / 11.0, 0.0, 4.0 / 11.0]);
    }

    #[test]
    fn conditional_equals_marginal_when_independent() {
        // population-exact independent table
        let d = two_col(&[("a", "x"), ("a", "y"), ("b", "x"), ("b", "y")]);
        let m = marginal(&d, 1);
        let c = conditional(&d, 1, &[(0, 0)]);
        assert_eq!(m.probabilities, c.probabilities);
    }

    #[test]
    fn conditional_of_deterministic_copy() {
        let d = two_col(&[("a", "x"), ("b", "y"), ("a", "x"), ("b", "y")]);
        let c = conditional(&d, 1, &[(0, 0)]);
        assert_eq!(c.probabilities, vec![1.0, 0.0]);
    }

    #[test]
    fn zero_support_event_is_flagged_empty() {
        let d = two_col(&[("a", "x"), ("b", "y")]);
        let c = conditional(&d, 1, &[(0, 0), (1, 1)]); // A=a AND B=y never co-occur
        assert!(c.is_empty());
        assert_eq!(c.support, 0);
    }

    proptest! {
        #[test]
        fn nonempty_conditionals_sum_to_one(rows in proptest::collection::vec((0u16..3, 0u16..2), 2..60)) {
            let vars = vec![
                Variable::new("A", vec!["a0".into(), "a1".into(), "a2".into()]),
                Variable::new("B", vec!["b0".into(), "b1".into()]),
            ];
            let cols = vec![
                rows.iter().map(|r| r.0).collect::<Vec<_>>(),
                rows.iter().map(|r| r.1).collect::<Vec<_>>(),
            ];
            let d = Dataset::from_parts(vars, cols).unwrap();
            for s in 0..3u16 {
                let c = conditional(&d, 1, &[(0, s)]);
                if !c.is_empty() {
                    let sum: f64 = c.probabilities.iter().sum();
                    prop_assert!((sum - 1.0).abs() < 1e-9);
                    prop_assert!(c.probabilities.iter().all(|&p| (0.0..=1.0).contains(&p)));
                }
            }
        }

        #[test]
        fn row_permutation_leaves_distributions_unchanged(
            rows in proptest::collection::vec((0u16..3, 0u16..2), 2..40),
            seed in 0u64..1000,
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let vars = || vec![
                Variable::new("A", vec!["a0".into(), "a1".into(), "a2".into()]),
                Variable::new("B", vec!["b0".into(), "b1".into()]),
            ];
            let mut shuffled = rows.clone();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            shuffled.shuffle(&mut rng);
            let build = |rs: &[(u16, u16)]| {
                Dataset::from_parts(vars(), vec![
                    rs.iter().map(|r| r.0).collect(),
                    rs.iter().map(|r| r.1).collect(),
                ]).unwrap()
            };
            let d1 = build(&rows);
            let d2 = build(&shuffled);
            for s in 0..3u16 {
                let c1 = conditional(&d1, 1, &[(0, s)]);
                let c2 = conditional(&d2, 1, &[(0, s)]);
                prop_assert_eq!(c1.probabilities, c2.probabilities);
            }
            prop_assert_eq!(marginal(&d1, 0).probabilities, marginal(&d2, 0).probabilities);
        }
    }
}
