//! Residual network with exact capacities: Edmonds–Karp max flow and
//! successive-shortest-path min-cost flow.

use std::collections::VecDeque;

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
struct Arc<S> {
    to: usize,
    /// Remaining residual capacity; `None` means unbounded.
    residual: Option<S>,
    cost: S,
}

#[derive(Debug, Clone)]
pub(crate) struct FlowNetwork<S> {
    arcs: Vec<Arc<S>>,
    adj: Vec<Vec<usize>>,
}

impl<S: Scalar> FlowNetwork<S> {
    pub(crate) fn new(nodes: usize) -> Self {
        FlowNetwork { arcs: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    /// Adds `from -> to` and its reverse residual arc; returns the arc id.
    pub(crate) fn add_arc(&mut self, from: usize, to: usize, capacity: Option<S>, cost: S) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, residual: capacity, cost: cost.clone() });
        self.arcs.push(Arc { to: from, residual: Some(S::zero()), cost: -cost });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Flow currently carried by forward arc `id`.
    pub(crate) fn flow(&self, id: usize) -> S {
        self.arcs[id ^ 1].residual.clone().unwrap_or_else(S::zero)
    }

    fn usable(&self, arc: usize) -> bool {
        match &self.arcs[arc].residual {
            None => true,
            Some(r) => r.is_pos(),
        }
    }

    fn push(&mut self, arc: usize, amount: &S) {
        if let Some(r) = &mut self.arcs[arc].residual {
            *r = r.clone() - amount.clone();
        }
        if let Some(r) = &mut self.arcs[arc ^ 1].residual {
            *r = r.clone() + amount.clone();
        }
    }

    fn bottleneck(&self, path: &[usize], limit: &S) -> S {
        path.iter().fold(limit.clone(), |acc, &a| match &self.arcs[a].residual {
            Some(r) => S::min_of(acc, r.clone()),
            None => acc,
        })
    }

    fn path_to(&self, pred: &[Option<usize>], source: usize, sink: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut v = sink;
        while v != source {
            let a = pred[v].expect("predecessor on path");
            path.push(a);
            v = self.arcs[a ^ 1].to;
        }
        path.reverse();
        path
    }

    /// Edmonds–Karp: breadth-first augmenting paths, arcs scanned in
    /// insertion order. Returns the flow value, capped at `limit`.
    pub(crate) fn max_flow(&mut self, source: usize, sink: usize, limit: &S) -> S {
        let mut total = S::zero();
        loop {
            let remaining = limit.clone() - total.clone();
            if !remaining.is_pos() {
                return total;
            }
            let mut pred = vec![None; self.adj.len()];
            let mut seen = vec![false; self.adj.len()];
            seen[source] = true;
            let mut queue = VecDeque::from([source]);
            while let Some(u) = queue.pop_front() {
                if u == sink {
                    break;
                }
                for &a in &self.adj[u] {
                    let v = self.arcs[a].to;
                    if !seen[v] && self.usable(a) {
                        seen[v] = true;
                        pred[v] = Some(a);
                        queue.push_back(v);
                    }
                }
            }
            if !seen[sink] {
                return total;
            }
            let path = self.path_to(&pred, source, sink);
            let delta = self.bottleneck(&path, &remaining);
            for &a in &path {
                self.push(a, &delta);
            }
            total = total + delta;
        }
    }

    /// Successive shortest paths (queue-based Bellman–Ford on the residual
    /// graph, so negative arc costs are allowed as long as the initial
    /// residual graph has no negative cycle). Sends up to `amount` and returns
    /// the amount actually sent.
    pub(crate) fn min_cost_flow(&mut self, source: usize, sink: usize, amount: &S) -> S {
        let n = self.adj.len();
        let mut sent = S::zero();
        loop {
            let remaining = amount.clone() - sent.clone();
            if !remaining.is_pos() {
                return sent;
            }
            let mut dist: Vec<Option<S>> = vec![None; n];
            let mut pred = vec![None; n];
            let mut in_queue = vec![false; n];
            dist[source] = Some(S::zero());
            let mut queue = VecDeque::from([source]);
            in_queue[source] = true;
            while let Some(u) = queue.pop_front() {
                in_queue[u] = false;
                let du = dist[u].clone().expect("queued node has a label");
                for &a in &self.adj[u] {
                    if !self.usable(a) {
                        continue;
                    }
                    let v = self.arcs[a].to;
                    let cand = du.clone() + self.arcs[a].cost.clone();
                    let better = match &dist[v] {
                        None => true,
                        Some(dv) => (dv.clone() - cand.clone()).is_pos(),
                    };
                    if better {
                        dist[v] = Some(cand);
                        pred[v] = Some(a);
                        if !in_queue[v] {
                            in_queue[v] = true;
                            queue.push_back(v);
                        }
                    }
                }
            }
            if dist[sink].is_none() {
                return sent;
            }
            let path = self.path_to(&pred, source, sink);
            let delta = self.bottleneck(&path, &remaining);
            for &a in &path {
                self.push(a, &delta);
            }
            sent = sent + delta;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn max_flow_with_fractional_capacities() {
        // s -> a -> t and s -> b -> t, with a bottleneck on b
        let mut net = FlowNetwork::new(4);
        net.add_arc(0, 1, Some(q(1, 3)), q(0, 1));
        net.add_arc(0, 2, Some(q(2, 3)), q(0, 1));
        net.add_arc(1, 3, None, q(0, 1));
        net.add_arc(2, 3, Some(q(1, 2)), q(0, 1));
        assert_eq!(net.max_flow(0, 3, &q(1, 1)), q(5, 6));
    }

    #[test]
    fn min_cost_flow_cancels_flow_on_second_path() {
        // first path s-a-b-t; the second path must undo a->b
        let mut net = FlowNetwork::new(4);
        net.add_arc(0, 1, Some(q(1, 1)), q(0, 1));
        let sb = net.add_arc(0, 2, Some(q(1, 1)), q(0, 1));
        let ab = net.add_arc(1, 2, Some(q(1, 1)), q(0, 1));
        let at = net.add_arc(1, 3, Some(q(1, 1)), q(2, 1));
        net.add_arc(2, 3, Some(q(1, 1)), q(0, 1));
        assert_eq!(net.min_cost_flow(0, 3, &q(2, 1)), q(2, 1));
        assert_eq!(net.flow(sb), q(1, 1));
        assert_eq!(net.flow(ab), q(0, 1));
        assert_eq!(net.flow(at), q(1, 1));
    }
}
