//! Factored end costs `E(s) = offset + sum_alpha E_alpha(s_alpha)` over
//! agent-to-target labelings, and the built-in cost families.
//!
//! Labels and agent indices are 0-based in this API; configuration files and
//! CSV output use 1-based labels.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// One term `E_alpha` of a factored end cost.
///
/// `table` is row-major over `m^|scope|` joint labels, first scope agent
/// varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct EndCostFactor {
    scope: Vec<usize>,
    table: Vec<f64>,
}

impl EndCostFactor {
    pub fn new(scope: Vec<usize>, table: Vec<f64>, m: usize) -> Result<Self> {
        if scope.is_empty() {
            return Err(Error::InvalidFactor("empty scope".into()));
        }
        let mut sorted = scope.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidFactor(format!("duplicate agent in scope {scope:?}")));
        }
        let expected = table_size(m, scope.len())?;
        if table.len() != expected {
            return Err(Error::InvalidFactor(format!(
                "scope {scope:?} needs {expected} table entries, got {}",
                table.len()
            )));
        }
        if table.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidFactor(format!("non-finite entry in factor {scope:?}")));
        }
        Ok(Self { scope, table })
    }

    /// Builds a factor from a function of the scope's labels.
    pub fn from_fn(scope: Vec<usize>, m: usize, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        let size = table_size(m, scope.len())?;
        let mut labels = vec![0; scope.len()];
        let mut table = Vec::with_capacity(size);
        for idx in 0..size {
            decode_index(idx, m, &mut labels);
            table.push(f(&labels));
        }
        Self::new(scope, table, m)
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }
    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Factor value for the labels of its scope, in scope order.
    pub fn value(&self, scope_labels: &[usize], m: usize) -> f64 {
        let idx = scope_labels.iter().fold(0, |acc, &s| acc * m + s);
        self.table[idx]
    }
}

fn table_size(m: usize, arity: usize) -> Result<usize> {
    u32::try_from(arity)
        .ok()
        .and_then(|a| m.checked_pow(a))
        .ok_or_else(|| Error::InvalidFactor(format!("table of {m}^{arity} entries is too large")))
}

/// Writes the row-major digits of `idx` in base `m` into `labels`.
pub(crate) fn decode_index(mut idx: usize, m: usize, labels: &mut [usize]) {
    for slot in labels.iter_mut().rev() {
        *slot = idx % m;
        idx /= m;
    }
}

/// `E(s) = constant_offset + sum_alpha E_alpha(s_alpha)` with `w(s) = exp(-E(s)/lambda)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredEndCost {
    num_targets: usize,
    factors: Vec<EndCostFactor>,
    constant_offset: f64,
}

impl FactoredEndCost {
    pub fn new(num_targets: usize, factors: Vec<EndCostFactor>, constant_offset: f64) -> Result<Self> {
        if num_targets == 0 {
            return Err(Error::InvalidFactor("at least one target required".into()));
        }
        if !constant_offset.is_finite() {
            return Err(Error::InvalidFactor("non-finite constant offset".into()));
        }
        for f in &factors {
            if f.table.len() != table_size(num_targets, f.scope.len())? {
                return Err(Error::InvalidFactor(format!(
                    "factor {:?} does not match {num_targets} targets",
                    f.scope
                )));
            }
        }
        Ok(Self {
            num_targets,
            factors,
            constant_offset,
        })
    }

    /// No coupling between agents: every labeling costs zero.
    pub fn zero(num_targets: usize) -> Result<Self> {
        Self::new(num_targets, Vec::new(), 0.0)
    }

    pub fn num_targets(&self) -> usize {
        self.num_targets
    }
    pub fn factors(&self) -> &[EndCostFactor] {
        &self.factors
    }
    pub fn constant_offset(&self) -> f64 {
        self.constant_offset
    }

    pub fn scopes(&self) -> Vec<Vec<usize>> {
        self.factors.iter().map(|f| f.scope.clone()).collect()
    }

    pub(crate) fn validate_agents(&self, n: usize) -> Result<()> {
        for f in &self.factors {
            if let Some(&bad) = f.scope.iter().find(|&&a| a >= n) {
                return Err(Error::InvalidFactor(format!(
                    "factor scope references agent {} but there are {n} agents",
                    bad + 1
                )));
            }
        }
        Ok(())
    }

    /// Total cost of a full labeling (0-based labels).
    pub fn total(&self, labels: &[usize]) -> Result<f64> {
        if let Some(&bad) = labels.iter().find(|&&s| s >= self.num_targets) {
            return Err(Error::LabelOutOfRange {
                label: bad + 1,
                m: self.num_targets,
            });
        }
        self.validate_agents(labels.len())?;
        let mut scope_labels = Vec::new();
        let mut total = self.constant_offset;
        for f in &self.factors {
            scope_labels.clear();
            scope_labels.extend(f.scope.iter().map(|&a| labels[a]));
            total += f.value(&scope_labels, self.num_targets);
        }
        Ok(total)
    }

    /// Adds `shift` to every entry of every factor table.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut out = self.clone();
        for f in &mut out.factors {
            for v in &mut f.table {
                *v += shift;
            }
        }
        out
    }
}

fn check_labels(s: &[usize], m: usize) -> Result<()> {
    match s.iter().find(|&&l| l >= m) {
        Some(&bad) => Err(Error::LabelOutOfRange { label: bad + 1, m }),
        None => Ok(()),
    }
}

/// Firemen cost via target occupancy, `c sum_f (count_f - n/m)^2`.
pub fn firemen_cost_dense(s: &[usize], m: usize, c: f64) -> Result<f64> {
    check_labels(s, m)?;
    let n = s.len() as f64;
    let mut counts = vec![0usize; m];
    for &l in s {
        counts[l] += 1;
    }
    let share = n / m as f64;
    let by_counts = c * counts.iter().map(|&k| (k as f64 - share).powi(2)).sum::<f64>();
    debug_assert!({
        let by_pairs = firemen_cost_pairwise(s, m, c)?;
        (by_counts - by_pairs).abs() <= 1e-9 * (1.0 + by_counts.abs())
    });
    Ok(by_counts)
}

/// Firemen cost via pair coincidences, `c (sum_{a,b} delta(s_a, s_b) - n^2/m)`.
pub fn firemen_cost_pairwise(s: &[usize], m: usize, c: f64) -> Result<f64> {
    check_labels(s, m)?;
    let n = s.len() as f64;
    let coincidences = s
        .iter()
        .map(|a| s.iter().filter(|b| *b == a).count())
        .sum::<usize>() as f64;
    Ok(c * (coincidences - n * n / m as f64))
}

/// Pairwise factorization of the firemen cost: `2c delta(s_a, s_b)` for every
/// unordered pair, with the diagonal and `-n^2/m` terms folded into the offset.
pub fn firemen_factors(n: usize, m: usize, c: f64) -> Result<FactoredEndCost> {
    let mut factors = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            factors.push(EndCostFactor::from_fn(vec![a, b], m, |l| {
                if l[0] == l[1] {
                    2.0 * c
                } else {
                    0.0
                }
            })?);
        }
    }
    let nf = n as f64;
    FactoredEndCost::new(m, factors, c * nf - c * nf * nf / m as f64)
}

/// A signed symmetric relation between two agents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Relation {
    pub a: usize,
    pub b: usize,
    pub strength: f64,
}

/// Undirected simple graph of agent relations; edges are stored with `a < b`
/// in sorted order.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationGraph {
    n: usize,
    edges: Vec<Relation>,
}

impl RelationGraph {
    pub fn new(n: usize, edges: Vec<Relation>) -> Result<Self> {
        let mut normalized = Vec::with_capacity(edges.len());
        for e in edges {
            if e.a == e.b {
                return Err(Error::InvalidGraph(format!("self-loop at node {}", e.a + 1)));
            }
            if e.a >= n || e.b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) outside {n} nodes",
                    e.a + 1,
                    e.b + 1
                )));
            }
            if !e.strength.is_finite() || e.strength == 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) has invalid strength {}",
                    e.a + 1,
                    e.b + 1,
                    e.strength
                )));
            }
            normalized.push(Relation {
                a: e.a.min(e.b),
                b: e.a.max(e.b),
                strength: e.strength,
            });
        }
        normalized.sort_by_key(|e| (e.a, e.b));
        if let Some(w) = normalized.windows(2).find(|w| (w[0].a, w[0].b) == (w[1].a, w[1].b)) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                w[0].a + 1,
                w[0].b + 1
            )));
        }
        Ok(Self {
            n,
            edges: normalized,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }
    pub fn edges(&self) -> &[Relation] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.a] += 1;
            deg[e.b] += 1;
        }
        deg
    }
}

/// One factor `-c_ab delta(s_a, s_b)` per related pair; unrelated pairs are free.
pub fn holiday_factors(graph: &RelationGraph, m: usize) -> Result<FactoredEndCost> {
    let factors = graph
        .edges()
        .iter()
        .map(|e| {
            EndCostFactor::from_fn(vec![e.a, e.b], m, |l| {
                if l[0] == l[1] {
                    -e.strength
                } else {
                    0.0
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    FactoredEndCost::new(m, factors, 0.0)
}

const PAIRING_ATTEMPTS: usize = 10_000;

/// Uniform simple `degree`-regular graph from the pairing model, rejecting
/// pairings with loops or multi-edges. Each edge gets strength
/// `+strength_magnitude` or `-strength_magnitude` with equal probability.
pub fn random_regular_graph(
    n: usize,
    degree: usize,
    strength_magnitude: f64,
    seed: u64,
) -> Result<RelationGraph> {
    if degree >= n {
        return Err(Error::InvalidGraph(format!(
            "degree {degree} must be smaller than the node count {n}"
        )));
    }
    if !(n * degree).is_multiple_of(2) {
        return Err(Error::InvalidGraph(format!(
            "n * degree = {} must be even",
            n * degree
        )));
    }
    if !strength_magnitude.is_finite() || strength_magnitude <= 0.0 {
        return Err(Error::InvalidGraph(format!(
            "strength magnitude must be > 0, got {strength_magnitude}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
    let mut adjacency = vec![Vec::with_capacity(degree); n];
    'attempt: for _ in 0..PAIRING_ATTEMPTS {
        points.shuffle(&mut rng);
        adjacency.iter_mut().for_each(Vec::clear);
        for pair in points.chunks_exact(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || adjacency[u].contains(&v) {
                continue 'attempt;
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut pairs: Vec<(usize, usize)> = points
            .chunks_exact(2)
            .map(|p| (p[0].min(p[1]), p[0].max(p[1])))
            .collect();
        pairs.sort_unstable();
        let edges = pairs
            .into_iter()
            .map(|(a, b)| Relation {
                a,
                b,
                strength: if rng.random_bool(0.5) {
                    strength_magnitude
                } else {
                    -strength_magnitude
                },
            })
            .collect();
        return RelationGraph::new(n, edges);
    }
    Err(Error::GraphGeneration {
        attempts: PAIRING_ATTEMPTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_labelings(n: usize, m: usize) -> impl Iterator<Item = Vec<usize>> {
        let total = m.pow(n as u32);
        (0..total).map(move |idx| {
            let mut l = vec![0; n];
            decode_index(idx, m, &mut l);
            l
        })
    }

    #[test]
    fn firemen_two_by_two_table() {
        assert_eq!(firemen_cost_dense(&[0, 1], 2, 1.0).unwrap(), 0.0);
        assert_eq!(firemen_cost_dense(&[1, 0], 2, 1.0).unwrap(), 0.0);
        assert_eq!(firemen_cost_dense(&[0, 0], 2, 1.0).unwrap(), 2.0);
        assert_eq!(firemen_cost_dense(&[1, 1], 2, 1.0).unwrap(), 2.0);
        assert_eq!(firemen_cost_dense(&[0, 1, 2, 0, 1, 2], 3, 1.0).unwrap(), 0.0);
        assert!(matches!(
            firemen_cost_dense(&[0, 2], 2, 1.0),
            Err(Error::LabelOutOfRange { label: 3, m: 2 })
        ));
    }

    #[test]
    fn firemen_factored_matches_dense() {
        let f = firemen_factors(2, 2, 1.0).unwrap();
        assert_eq!(f.total(&[0, 0]).unwrap(), 2.0);
        assert_eq!(f.total(&[0, 1]).unwrap(), 0.0);
        for n in 1..=5 {
            for m in 1..=3 {
                let f = firemen_factors(n, m, 1.7).unwrap();
                for s in all_labelings(n, m) {
                    let dense = firemen_cost_dense(&s, m, 1.7).unwrap();
                    let pairs = firemen_cost_pairwise(&s, m, 1.7).unwrap();
                    let fact = f.total(&s).unwrap();
                    assert!((dense - pairs).abs() < 1e-12, "{s:?}");
                    assert!((dense - fact).abs() < 1e-12, "{s:?}");
                }
            }
        }
    }

    #[test]
    fn firemen_minimum_is_balanced() {
        let f = firemen_factors(4, 2, 1.0).unwrap();
        let costs: Vec<(Vec<usize>, f64)> = all_labelings(4, 2)
            .map(|s| {
                let c = f.total(&s).unwrap();
                (s, c)
            })
            .collect();
        let min = costs.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        for (s, c) in costs {
            let ones = s.iter().filter(|&&l| l == 1).count();
            assert_eq!(c == min, ones == 2, "{s:?}");
        }
    }

    #[test]
    fn holiday_factor_signs() {
        let g = RelationGraph::new(
            3,
            vec![
                Relation { a: 0, b: 1, strength: 1.0 },
                Relation { a: 2, b: 1, strength: -1.0 },
            ],
        )
        .unwrap();
        let f = holiday_factors(&g, 3).unwrap();
        assert_eq!(f.factors().len(), 2);
        assert_eq!(f.constant_offset(), 0.0);
        assert_eq!(f.factors()[0].value(&[2, 2], 3), -1.0);
        assert_eq!(f.factors()[1].scope(), &[1, 2]);
        assert_eq!(f.factors()[1].value(&[0, 0], 3), 1.0);
        assert_eq!(f.factors()[1].value(&[0, 1], 3), 0.0);
        assert_eq!(f.total(&[0, 0, 0]).unwrap(), 0.0);
        assert_eq!(f.total(&[0, 0, 1]).unwrap(), -1.0);
    }

    #[test]
    fn graph_validation() {
        let e = |a, b, s| Relation { a, b, strength: s };
        assert!(RelationGraph::new(3, vec![e(0, 0, 1.0)]).is_err());
        assert!(RelationGraph::new(3, vec![e(0, 3, 1.0)]).is_err());
        assert!(RelationGraph::new(3, vec![e(0, 1, 0.0)]).is_err());
        assert!(RelationGraph::new(3, vec![e(0, 1, 1.0), e(1, 0, -1.0)]).is_err());
    }

    #[test]
    fn regular_graph_shape() {
        let g = random_regular_graph(42, 3, 1.0, 7).unwrap();
        assert_eq!(g.edges().len(), 63);
        assert!(g.degrees().iter().all(|&d| d == 3));
        assert!(g.edges().iter().all(|e| e.strength.abs() == 1.0));

        let g = random_regular_graph(4, 1, 1.0, 1).unwrap();
        assert_eq!(g.edges().len(), 2);
        assert!(g.degrees().iter().all(|&d| d == 1));

        assert!(matches!(random_regular_graph(3, 3, 1.0, 0), Err(Error::InvalidGraph(_))));
        assert!(matches!(random_regular_graph(5, 3, 1.0, 0), Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn regular_graph_is_seeded() {
        let a = random_regular_graph(20, 3, 1.0, 99).unwrap();
        let b = random_regular_graph(20, 3, 1.0, 99).unwrap();
        let c = random_regular_graph(20, 3, 1.0, 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn factor_validation() {
        assert!(EndCostFactor::new(vec![], vec![0.0], 2).is_err());
        assert!(EndCostFactor::new(vec![1, 1], vec![0.0; 4], 2).is_err());
        assert!(EndCostFactor::new(vec![0, 1], vec![0.0; 3], 2).is_err());
        assert!(EndCostFactor::new(vec![0], vec![f64::NAN, 0.0], 2).is_err());
    }
}
