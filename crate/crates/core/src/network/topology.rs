use std::collections::VecDeque;

use super::NetworkModel;
use crate::error::{Error, Result};

/// A line oriented from the parent bus (closer to the root) to the child.
/// Bus fields are positions in `NetworkModel::buses`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedLine {
    /// Index into `NetworkModel::lines`.
    pub line: usize,
    pub parent: usize,
    pub child: usize,
    pub r: f64,
    pub x: f64,
}

/// Rooted tree view of a radial network.
#[derive(Debug, Clone)]
pub struct Topology {
    pub root: usize,
    /// Lines in parent-before-child (breadth-first) order.
    pub order: Vec<OrientedLine>,
    /// For each bus, the position in `order` of the line feeding it.
    pub feeder: Vec<Option<usize>>,
    /// For each bus, the positions in `order` of the lines leaving it.
    pub downstream: Vec<Vec<usize>>,
    /// Cumulative resistance and reactance from the root to each bus.
    cum_r: Vec<f64>,
    cum_x: Vec<f64>,
    depth: Vec<usize>,
}

impl Topology {
    pub fn bus_count(&self) -> usize {
        self.feeder.len()
    }

    fn parent(&self, bus: usize) -> Option<usize> {
        self.feeder[bus].map(|k| self.order[k].parent)
    }

    /// Lowest common ancestor of two buses.
    pub fn common_ancestor(&self, mut a: usize, mut b: usize) -> usize {
        while self.depth[a] > self.depth[b] {
            a = self.parent(a).expect("non-root has a parent");
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent(b).expect("non-root has a parent");
        }
        while a != b {
            a = self.parent(a).expect("non-root has a parent");
            b = self.parent(b).expect("non-root has a parent");
        }
        a
    }

    /// Resistance and reactance of the path shared by root->a and root->b.
    pub fn shared_impedance(&self, a: usize, b: usize) -> (f64, f64) {
        let c = self.common_ancestor(a, b);
        (self.cum_r[c], self.cum_x[c])
    }

    /// True when `bus` lies in the subtree hanging below `ancestor` (inclusive).
    pub fn is_descendant(&self, mut bus: usize, ancestor: usize) -> bool {
        loop {
            if bus == ancestor {
                return true;
            }
            match self.parent(bus) {
                Some(p) => bus = p,
                None => return false,
            }
        }
    }
}

/// Orders the lines of a radial network from the root outward.
///
/// Fails when the lines do not form a spanning tree of the buses: a cycle, a
/// disconnected bus, or a line referencing an unknown bus.
pub fn validate_radial(model: &NetworkModel) -> Result<Topology> {
    let n = model.buses.len();
    let root = model
        .root_index()
        .ok_or_else(|| Error::Validation("no root bus".into()))?;

    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (k, line) in model.lines.iter().enumerate() {
        let from = model.bus_index(line.from).ok_or_else(|| {
            Error::Validation(format!("line {k} references unknown bus {}", line.from))
        })?;
        let to = model.bus_index(line.to).ok_or_else(|| {
            Error::Validation(format!("line {k} references unknown bus {}", line.to))
        })?;
        if from == to {
            return Err(Error::Validation(format!(
                "non-radial: line {k} is a self-loop on bus {}",
                line.from
            )));
        }
        adjacency[from].push((to, k));
        adjacency[to].push((from, k));
    }

    let mut feeder = vec![None; n];
    let mut downstream = vec![Vec::new(); n];
    let mut depth = vec![0usize; n];
    let mut cum_r = vec![0.0; n];
    let mut cum_x = vec![0.0; n];
    let mut visited = vec![false; n];
    let mut used_line = vec![false; model.lines.len()];
    let mut order = Vec::with_capacity(n.saturating_sub(1));
    let mut queue = VecDeque::from([root]);
    visited[root] = true;

    while let Some(bus) = queue.pop_front() {
        for &(next, k) in &adjacency[bus] {
            if used_line[k] {
                continue;
            }
            used_line[k] = true;
            if visited[next] {
                return Err(Error::Validation(format!(
                    "non-radial: line {k} ({}-{}) closes a cycle",
                    model.lines[k].from, model.lines[k].to
                )));
            }
            visited[next] = true;
            let line = &model.lines[k];
            let pos = order.len();
            order.push(OrientedLine {
                line: k,
                parent: bus,
                child: next,
                r: line.r,
                x: line.x,
            });
            feeder[next] = Some(pos);
            downstream[bus].push(pos);
            depth[next] = depth[bus] + 1;
            cum_r[next] = cum_r[bus] + line.r;
            cum_x[next] = cum_x[bus] + line.x;
            queue.push_back(next);
        }
    }

    if let Some(b) = visited.iter().position(|v| !v) {
        return Err(Error::Validation(format!(
            "bus {} is disconnected from the root",
            model.buses[b].id
        )));
    }
    debug_assert_eq!(order.len(), n - 1);

    Ok(Topology {
        root,
        order,
        feeder,
        downstream,
        cum_r,
        cum_x,
        depth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Bus, Line, TariffAndPolicy};

    fn model(n: usize, lines: &[(usize, usize)]) -> NetworkModel {
        let buses = (0..n)
            .map(|id| Bus {
                id,
                load_p: vec![0.0],
                load_q: vec![0.0],
                pv: None,
                bess: None,
                is_market_node: id == 0,
                is_root: id == 0,
            })
            .collect();
        NetworkModel {
            base: Default::default(),
            buses,
            lines: lines
                .iter()
                .map(|&(from, to)| Line { from, to, r: 0.01, x: 0.02 })
                .collect(),
            policy: TariffAndPolicy {
                buy_price: vec![1.0],
                sell_price: vec![0.5],
                ..Default::default()
            },
        }
    }

    fn pairs(t: &Topology, m: &NetworkModel) -> Vec<(usize, usize)> {
        t.order
            .iter()
            .map(|l| (m.buses[l.parent].id, m.buses[l.child].id))
            .collect()
    }

    #[test]
    fn two_bus() {
        let m = model(2, &[(0, 1)]);
        let t = validate_radial(&m).unwrap();
        assert_eq!(pairs(&t, &m), vec![(0, 1)]);
    }

    #[test]
    fn star_has_root_parents() {
        let m = model(4, &[(0, 1), (2, 0), (0, 3)]);
        let t = validate_radial(&m).unwrap();
        assert_eq!(t.order.len(), 3);
        assert!(t.order.iter().all(|l| l.parent == 0));
    }

    #[test]
    fn path_order_is_unique() {
        let m = model(4, &[(2, 3), (1, 2), (0, 1)]);
        let t = validate_radial(&m).unwrap();
        assert_eq!(pairs(&t, &m), vec![(0, 1), (1, 2), (2, 3)]);
        assert!((t.shared_impedance(3, 2).0 - 0.02).abs() < 1e-15);
        assert!(t.is_descendant(3, 1));
        assert!(!t.is_descendant(1, 3));
    }

    #[test]
    fn cycle_rejected() {
        let m = model(3, &[(0, 1), (1, 2), (2, 0)]);
        let err = validate_radial(&m).unwrap_err().to_string();
        assert!(err.contains("non-radial"), "{err}");
    }

    #[test]
    fn disconnected_rejected() {
        let m = model(3, &[(0, 1)]);
        let err = validate_radial(&m).unwrap_err().to_string();
        assert!(err.contains("disconnected"), "{err}");
    }
}
