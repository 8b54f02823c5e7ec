//! Exact assignment posteriors `p(s_a | x, t)` and the joint log-partition
//! `log Z(x, t) = log sum_s exp(-E(s)/lambda + sum_a log Z_a(x_a, t; s_a))`.
//!
//! [`brute_force`] enumerates all `m^n` labelings and serves as the oracle;
//! [`eliminate`] is the production path, exact sum-product over a clique tree
//! whose cost is exponential only in the induced width of the end-cost graph.

mod junction;
mod order;
mod table;

pub use order::{min_degree_order, EliminationOrder};

use crate::endcost::{decode_index, FactoredEndCost};
use crate::error::{Error, Result};

/// Largest number of labelings [`brute_force`] will enumerate.
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

/// Default cap on the number of entries of any clique table.
pub const DEFAULT_CLIQUE_CAP: usize = 100_000_000;

/// `log Z_a(x_a, t; s)` for every agent `a` and target `s`, shape `n x m`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnaryLogZTable {
    n: usize,
    m: usize,
    values: Vec<f64>,
}

impl UnaryLogZTable {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if n == 0 || m == 0 {
            return Err(Error::InvalidState("unary table must be at least 1 x 1".into()));
        }
        let mut values = Vec::with_capacity(n * m);
        for row in rows {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidState("non-finite unary log-partition".into()));
            }
            values.extend(row);
        }
        Ok(Self { n, m, values })
    }

    pub fn n_agents(&self) -> usize {
        self.n
    }
    pub fn n_targets(&self) -> usize {
        self.m
    }
    pub fn agent(&self, a: usize) -> &[f64] {
        &self.values[a * self.m..(a + 1) * self.m]
    }
    pub fn get(&self, a: usize, s: usize) -> f64 {
        self.values[a * self.m + s]
    }
}

/// Per-agent probability vectors over targets.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentMarginals {
    probs: Vec<Vec<f64>>,
}

impl AssignmentMarginals {
    pub(crate) fn new(probs: Vec<Vec<f64>>) -> Self {
        Self { probs }
    }

    pub fn agent(&self, a: usize) -> &[f64] {
        &self.probs[a]
    }
    pub fn n_agents(&self) -> usize {
        self.probs.len()
    }
    pub fn as_rows(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.probs
            .iter()
            .flatten()
            .zip(other.probs.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceResult {
    pub marginals: AssignmentMarginals,
    pub log_partition: f64,
}

fn check_shapes(tables: &UnaryLogZTable, end_cost: &FactoredEndCost, lambda: f64) -> Result<()> {
    if tables.n_targets() != end_cost.num_targets() {
        return Err(Error::DimensionMismatch {
            expected: end_cost.num_targets(),
            got: tables.n_targets(),
        });
    }
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::InvalidParam {
            field: "lambda",
            reason: format!("must be finite and > 0, got {lambda}"),
        });
    }
    end_cost.validate_agents(tables.n_agents())
}

/// Streaming log-sum-exp accumulator.
#[derive(Clone, Copy)]
struct LogAccumulator {
    max: f64,
    sum: f64,
}

impl LogAccumulator {
    const EMPTY: Self = Self {
        max: f64::NEG_INFINITY,
        sum: 0.0,
    };

    fn push(&mut self, v: f64) {
        if v <= self.max {
            self.sum += (v - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - v).exp() + 1.0;
            self.max = v;
        }
    }

    fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Exact marginals and `log Z` by enumerating all `m^n` labelings.
pub fn brute_force(
    tables: &UnaryLogZTable,
    end_cost: &FactoredEndCost,
    lambda: f64,
) -> Result<InferenceResult> {
    check_shapes(tables, end_cost, lambda)?;
    let (n, m) = (tables.n_agents(), tables.n_targets());
    let states = (m as f64).powi(n as i32);
    if states > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeGuard {
            states,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut total = LogAccumulator::EMPTY;
    let mut per_label = vec![LogAccumulator::EMPTY; n * m];
    let mut labels = vec![0; n];
    for idx in 0..states as usize {
        decode_index(idx, m, &mut labels);
        let unary: f64 = labels.iter().enumerate().map(|(a, &s)| tables.get(a, s)).sum();
        let lw = unary - end_cost.total(&labels)? / lambda;
        total.push(lw);
        for (a, &s) in labels.iter().enumerate() {
            per_label[a * m + s].push(lw);
        }
    }
    let log_partition = total.value();
    if !log_partition.is_finite() {
        return Err(Error::DegeneratePosterior);
    }
    let probs = (0..n)
        .map(|a| {
            (0..m)
                .map(|s| (per_label[a * m + s].value() - log_partition).exp())
                .collect::<Vec<_>>()
        })
        .map(|row| {
            let z: f64 = row.iter().sum();
            row.into_iter().map(|p| p / z).collect()
        })
        .collect();
    Ok(InferenceResult {
        marginals: AssignmentMarginals::new(probs),
        log_partition,
    })
}

/// Exact marginals and `log Z` by sum-product over the clique tree induced by
/// `order`.
pub fn eliminate(
    tables: &UnaryLogZTable,
    end_cost: &FactoredEndCost,
    lambda: f64,
    order: &EliminationOrder,
) -> Result<InferenceResult> {
    eliminate_with_cap(tables, end_cost, lambda, order, DEFAULT_CLIQUE_CAP)
}

/// [`eliminate`] with an explicit cap on clique-table size.
pub fn eliminate_with_cap(
    tables: &UnaryLogZTable,
    end_cost: &FactoredEndCost,
    lambda: f64,
    order: &EliminationOrder,
    max_clique_entries: usize,
) -> Result<InferenceResult> {
    check_shapes(tables, end_cost, lambda)?;
    junction::calibrate(tables, end_cost, lambda, order, max_clique_entries)
}

/// [`eliminate`] using a min-degree ordering of the end-cost graph.
pub fn infer(
    tables: &UnaryLogZTable,
    end_cost: &FactoredEndCost,
    lambda: f64,
) -> Result<InferenceResult> {
    let order = min_degree_order(&end_cost.scopes(), tables.n_agents())?;
    eliminate(tables, end_cost, lambda, &order)
}
