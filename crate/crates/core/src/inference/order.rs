use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// A permutation of the agents together with the induced width of eliminating
/// them in that order (largest intermediate scope size minus one).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationOrder {
    order: Vec<usize>,
    induced_width: usize,
}

impl EliminationOrder {
    /// Computes the induced width of an arbitrary permutation.
    pub fn from_permutation(order: Vec<usize>, scopes: &[Vec<usize>], n: usize) -> Result<Self> {
        if order.len() != n {
            return Err(Error::InvalidOrder(format!(
                "order has {} entries for {n} agents",
                order.len()
            )));
        }
        let mut seen = vec![false; n];
        for &v in &order {
            if v >= n || seen[v] {
                return Err(Error::InvalidOrder(format!("{order:?} is not a permutation")));
            }
            seen[v] = true;
        }
        let mut graph = interaction_graph(scopes, n)?;
        let induced_width = order
            .iter()
            .map(|&v| eliminate_vertex(&mut graph, v))
            .max()
            .unwrap_or(0);
        Ok(Self {
            order,
            induced_width,
        })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }
    pub fn induced_width(&self) -> usize {
        self.induced_width
    }
}

pub(crate) fn interaction_graph(scopes: &[Vec<usize>], n: usize) -> Result<Vec<BTreeSet<usize>>> {
    let mut graph = vec![BTreeSet::new(); n];
    for scope in scopes {
        if let Some(&a) = scope.iter().find(|&&a| a >= n) {
            return Err(Error::InvalidFactor(format!(
                "scope {scope:?} references agent {} of {n}",
                a + 1
            )));
        }
        for (i, &a) in scope.iter().enumerate() {
            for &b in &scope[i + 1..] {
                if a != b {
                    graph[a].insert(b);
                    graph[b].insert(a);
                }
            }
        }
    }
    Ok(graph)
}

/// Removes `v`, connecting its neighbours pairwise. Returns its degree at removal.
pub(crate) fn eliminate_vertex(graph: &mut [BTreeSet<usize>], v: usize) -> usize {
    let neighbours: Vec<usize> = std::mem::take(&mut graph[v]).into_iter().collect();
    for (i, &a) in neighbours.iter().enumerate() {
        graph[a].remove(&v);
        for &b in &neighbours[i + 1..] {
            graph[a].insert(b);
            graph[b].insert(a);
        }
    }
    neighbours.len()
}

/// Greedy minimum-degree ordering; ties go to the lowest agent index.
pub fn min_degree_order(scopes: &[Vec<usize>], n: usize) -> Result<EliminationOrder> {
    let mut graph = interaction_graph(scopes, n)?;
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    let mut induced_width = 0;
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (graph[v].len(), v))
            .expect("a live vertex remains");
        alive[v] = false;
        induced_width = induced_width.max(eliminate_vertex(&mut graph, v));
        order.push(v);
    }
    Ok(EliminationOrder {
        order,
        induced_width,
    })
}
