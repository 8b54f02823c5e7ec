//! Sum-product over a clique tree built from an elimination order.
//!
//! Eliminating agent `v` creates the cluster `{v} ∪ neighbours(v)`; its
//! parent is the cluster of the neighbour eliminated next. An upward pass
//! in elimination order yields `log Z`, a downward pass calibrates every
//! cluster so that all single-agent marginals come out of one sweep.

use super::order::{eliminate_vertex, interaction_graph, EliminationOrder};
use super::table::LogTable;
use super::{AssignmentMarginals, InferenceResult, UnaryLogZTable};
use crate::endcost::FactoredEndCost;
use crate::error::{Error, Result};
use crate::math::normalize_log;

struct CliqueTree {
    /// Cluster variables, the eliminated agent first.
    clusters: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl CliqueTree {
    fn build(order: &[usize], scopes: &[Vec<usize>], n: usize, m: usize, cap: usize) -> Result<Self> {
        let mut position = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            position[v] = i;
        }
        let mut graph = interaction_graph(scopes, n)?;
        let mut clusters = Vec::with_capacity(n);
        let mut parent = Vec::with_capacity(n);
        for &v in order {
            let mut cluster = vec![v];
            cluster.extend(graph[v].iter().copied());
            let entries = (m as f64).powi(cluster.len() as i32);
            if entries > cap as f64 {
                let mut clique: Vec<usize> = cluster.iter().map(|a| a + 1).collect();
                clique.sort_unstable();
                return Err(Error::Treewidth {
                    clique,
                    entries,
                    cap,
                });
            }
            parent.push(cluster[1..].iter().map(|&u| position[u]).min());
            clusters.push(cluster);
            eliminate_vertex(&mut graph, v);
        }
        let mut children = vec![Vec::new(); n];
        for (i, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(i);
            }
        }
        Ok(Self {
            clusters,
            parent,
            children,
        })
    }

    fn separator(&self, i: usize) -> &[usize] {
        &self.clusters[i][1..]
    }
}

pub(super) fn calibrate(
    tables: &UnaryLogZTable,
    end_cost: &FactoredEndCost,
    lambda: f64,
    order: &EliminationOrder,
    cap: usize,
) -> Result<InferenceResult> {
    let n = tables.n_agents();
    let m = tables.n_targets();
    let order = order.order();
    if order.len() != n {
        return Err(Error::InvalidOrder(format!(
            "order covers {} of {n} agents",
            order.len()
        )));
    }
    let tree = CliqueTree::build(order, &end_cost.scopes(), n, m, cap)?;

    let mut position = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let mut potentials: Vec<LogTable> = tree
        .clusters
        .iter()
        .map(|c| LogTable::zeros(c.clone(), m))
        .collect();
    for (i, &v) in order.iter().enumerate() {
        potentials[i].add(&[v], tables.agent(v), m);
    }
    let mut scaled = Vec::new();
    for factor in end_cost.factors() {
        let home = factor
            .scope()
            .iter()
            .map(|&a| position[a])
            .min()
            .expect("factor scopes are non-empty");
        scaled.clear();
        scaled.extend(factor.table().iter().map(|e| -e / lambda));
        potentials[home].add(factor.scope(), &scaled, m);
    }

    // upward: children precede parents in elimination order
    let mut upward: Vec<Option<LogTable>> = vec![None; n];
    let mut log_partition = -end_cost.constant_offset() / lambda;
    for i in 0..n {
        let mut belief = potentials[i].clone();
        for &c in &tree.children[i] {
            belief.add_table(upward[c].as_ref().expect("child already sent"), m);
        }
        let message = belief.marginalize(tree.separator(i), m);
        if tree.parent[i].is_none() {
            log_partition += message.values[0];
        }
        upward[i] = Some(message);
    }
    if !log_partition.is_finite() {
        return Err(Error::DegeneratePosterior);
    }

    let mut downward: Vec<Option<LogTable>> = vec![None; n];
    let mut probs = vec![Vec::new(); n];
    for i in (0..n).rev() {
        let mut base = std::mem::replace(&mut potentials[i], LogTable::zeros(Vec::new(), m));
        if let Some(msg) = &downward[i] {
            base.add_table(msg, m);
        }
        let kids = &tree.children[i];
        for &c in kids {
            let mut outgoing = base.clone();
            for &other in kids.iter().filter(|&&o| o != c) {
                outgoing.add_table(upward[other].as_ref().expect("sent upward"), m);
            }
            downward[c] = Some(outgoing.marginalize(tree.separator(c), m));
        }
        for &c in kids {
            base.add_table(upward[c].as_ref().expect("sent upward"), m);
        }
        let v = order[i];
        let local = base.marginalize(&[v], m);
        probs[v] = normalize_log(&local.values).ok_or(Error::DegeneratePosterior)?;
    }

    Ok(InferenceResult {
        marginals: AssignmentMarginals::new(probs),
        log_partition,
    })
}
