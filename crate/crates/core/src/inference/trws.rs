//! Sequential tree-reweighted max-product message passing (TRW-S) for
//! pairwise MRFs with per-node label sets.
//!
//! Nodes are processed in index order; edges are decomposed into monotonic
//! chains, each node `s` belonging to `n_s = max(#earlier nbrs, #later nbrs, 1)`
//! chains. Messages are averaged with weight `1 / n_s`. After every sweep the
//! lower bound is the sum of exact chain minima under the current
//! reparameterisation.

use thiserror::Error;

use crate::num::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrwsError {
    #[error("node {0} has no feasible label")]
    InfeasibleNode(usize),
    #[error("malformed problem: {0}")]
    Malformed(String),
}

/// Pairwise MRF with costs to minimise. Costs may be `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMrf<T> {
    unary: Vec<Vec<T>>,
    edges: Vec<(usize, usize)>,
    pairwise: Vec<Vec<T>>,
}

impl<T: Real> PairwiseMrf<T> {
    pub fn new(unary: Vec<Vec<T>>) -> Self {
        Self {
            unary,
            edges: Vec::new(),
            pairwise: Vec::new(),
        }
    }

    /// Adds edge `(a, b)` with a row-major table `cost[la * L_b + lb]`.
    pub fn add_edge(&mut self, a: usize, b: usize, table: Vec<T>) -> Result<(), TrwsError> {
        let n = self.unary.len();
        if a >= n || b >= n || a == b {
            return Err(TrwsError::Malformed(format!("edge ({a}, {b}) with {n} nodes")));
        }
        let (la, lb) = (self.unary[a].len(), self.unary[b].len());
        if table.len() != la * lb {
            return Err(TrwsError::Malformed(format!(
                "edge ({a}, {b}) table has {} entries, expected {la}x{lb}",
                table.len()
            )));
        }
        if a < b {
            self.edges.push((a, b));
            self.pairwise.push(table);
        } else {
            let mut t = vec![T::zero(); la * lb];
            for xa in 0..la {
                for xb in 0..lb {
                    t[xb * la + xa] = table[xa * lb + xb];
                }
            }
            self.edges.push((b, a));
            self.pairwise.push(t);
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.unary.len()
    }

    pub fn label_count(&self, i: usize) -> usize {
        self.unary[i].len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Energy of a full labeling.
    pub fn energy(&self, labels: &[usize]) -> T {
        let mut e = T::zero();
        for (i, &l) in labels.iter().enumerate() {
            e = e + self.unary[i][l];
        }
        for (&(a, b), table) in self.edges.iter().zip(&self.pairwise) {
            e = e + table[labels[a] * self.unary[b].len() + labels[b]];
        }
        e
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrwsOptions {
    pub max_sweeps: usize,
    /// Stop once `energy − bound <= gap_tolerance · max(1, |energy|)`.
    pub gap_tolerance: f64,
    /// Stop once a sweep raises the bound by at most
    /// `bound_tolerance · max(1, |bound|)`. Zero disables.
    pub bound_tolerance: f64,
}

impl Default for TrwsOptions {
    fn default() -> Self {
        Self {
            max_sweeps: 30,
            gap_tolerance: 1e-9,
            bound_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrwsSolution<T> {
    /// Best labeling found over all sweeps.
    pub labels: Vec<usize>,
    pub energy: T,
    /// Lower bound after the last sweep.
    pub lower_bound: T,
    /// Lower bound after each sweep.
    pub bound_history: Vec<T>,
}

struct Chain {
    nodes: Vec<usize>,
    edges: Vec<usize>,
}

/// Greedy monotonic-chain cover: every edge in exactly one chain, node `s`
/// in `max(in(s), out(s), 1)` chains.
fn build_chains(n: usize, edges: &[(usize, usize)]) -> (Vec<Chain>, Vec<usize>) {
    let mut fwd: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut n_in = vec![0usize; n];
    for (e, &(a, b)) in edges.iter().enumerate() {
        fwd[a].push(e);
        n_in[b] += 1;
    }
    let mut chains: Vec<Chain> = Vec::new();
    // chains currently waiting at each node (arrived via an in-edge)
    let mut arriving: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for s in 0..n {
        let mut waiting = std::mem::take(&mut arriving[s]);
        counts[s] = waiting.len().max(fwd[s].len()).max(1);
        debug_assert_eq!(waiting.len(), n_in[s]);
        if waiting.is_empty() && fwd[s].is_empty() {
            chains.push(Chain {
                nodes: vec![s],
                edges: Vec::new(),
            });
            continue;
        }
        for &e in &fwd[s] {
            let c = match waiting.pop() {
                Some(c) => c,
                None => {
                    chains.push(Chain {
                        nodes: vec![s],
                        edges: Vec::new(),
                    });
                    chains.len() - 1
                }
            };
            let t = edges[e].1;
            chains[c].edges.push(e);
            chains[c].nodes.push(t);
            arriving[t].push(c);
        }
        // remaining waiting chains end at s
    }
    (chains, counts)
}

/// Minimises a pairwise MRF with TRW-S.
pub fn trws_solve<T: Real>(mrf: &PairwiseMrf<T>, options: &TrwsOptions) -> Result<TrwsSolution<T>, TrwsError> {
    let n = mrf.node_count();
    if n == 0 {
        return Ok(TrwsSolution {
            labels: Vec::new(),
            energy: T::zero(),
            lower_bound: T::zero(),
            bound_history: Vec::new(),
        });
    }

    // Restrict each node to its finite-cost labels.
    let mut feasible: Vec<Vec<usize>> = Vec::with_capacity(n);
    for (i, u) in mrf.unary.iter().enumerate() {
        let f: Vec<usize> = (0..u.len()).filter(|&l| u[l].is_finite()).collect();
        if f.is_empty() {
            return Err(TrwsError::InfeasibleNode(i));
        }
        feasible.push(f);
    }
    let unary: Vec<Vec<T>> = feasible
        .iter()
        .enumerate()
        .map(|(i, f)| f.iter().map(|&l| mrf.unary[i][l]).collect())
        .collect();

    // Infinite pairwise entries become a penalty larger than any finite energy.
    let mut finite_span = T::zero();
    for u in &unary {
        finite_span = finite_span + u.iter().fold(T::zero(), |m, &c| m.max(c.abs()));
    }
    for t in &mrf.pairwise {
        finite_span = finite_span + t.iter().filter(|c| c.is_finite()).fold(T::zero(), |m, &c| m.max(c.abs()));
    }
    let big = T::lit(2.0) * finite_span + T::one();
    let pairwise: Vec<Vec<T>> = mrf
        .edges
        .iter()
        .zip(&mrf.pairwise)
        .map(|(&(a, b), t)| {
            let lb_full = mrf.unary[b].len();
            let mut out = Vec::with_capacity(feasible[a].len() * feasible[b].len());
            for &xa in &feasible[a] {
                for &xb in &feasible[b] {
                    let c = t[xa * lb_full + xb];
                    out.push(if c.is_finite() { c } else { big });
                }
            }
            out
        })
        .collect();
    let edges = &mrf.edges;
    let lc: Vec<usize> = unary.iter().map(|u| u.len()).collect();

    let (chains, counts) = build_chains(n, edges);
    let gamma: Vec<T> = counts.iter().map(|&c| T::one() / T::from_usize_lossy(c)).collect();

    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, &(a, b)) in edges.iter().enumerate() {
        incident[a].push(e);
        incident[b].push(e);
    }
    // msg_fwd[e]: a -> b (indexed by x_b); msg_bwd[e]: b -> a (indexed by x_a)
    let mut msg_fwd: Vec<Vec<T>> = edges.iter().map(|&(_, b)| vec![T::zero(); lc[b]]).collect();
    let mut msg_bwd: Vec<Vec<T>> = edges.iter().map(|&(a, _)| vec![T::zero(); lc[a]]).collect();

    let mut theta_hat: Vec<T> = Vec::new();
    let mut best: Option<(T, Vec<usize>)> = None;
    let mut bound_history = Vec::with_capacity(options.max_sweeps);

    let belief = |s: usize, msg_fwd: &[Vec<T>], msg_bwd: &[Vec<T>], out: &mut Vec<T>| {
        out.clear();
        out.extend_from_slice(&unary[s]);
        for &e in &incident[s] {
            let m = if edges[e].1 == s { &msg_fwd[e] } else { &msg_bwd[e] };
            for (o, v) in out.iter_mut().zip(m) {
                *o = *o + *v;
            }
        }
    };

    // edges leaving each node towards later / earlier nodes
    let mut out_fwd: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut out_bwd: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, &(a, b)) in edges.iter().enumerate() {
        out_fwd[a].push(e);
        out_bwd[b].push(e);
    }

    for _sweep in 0..options.max_sweeps.max(1) {
        for step in 0..n {
            let s = step;
            if out_fwd[s].is_empty() {
                continue;
            }
            belief(s, &msg_fwd, &msg_bwd, &mut theta_hat);
            for &e in &out_fwd[s] {
                let lb = lc[edges[e].1];
                let table = &pairwise[e];
                let (back, out) = (&msg_bwd[e], &mut msg_fwd[e]);
                out.fill(T::infinity());
                for (xa, (&th, &m)) in theta_hat.iter().zip(back.iter()).enumerate() {
                    let base = gamma[s] * th - m;
                    for (o, &c) in out.iter_mut().zip(&table[xa * lb..(xa + 1) * lb]) {
                        let v = base + c;
                        if v < *o {
                            *o = v;
                        }
                    }
                }
                normalize(out);
            }
        }
        for s in (0..n).rev() {
            if out_bwd[s].is_empty() {
                continue;
            }
            belief(s, &msg_fwd, &msg_bwd, &mut theta_hat);
            for &e in &out_bwd[s] {
                let lb = lc[s];
                let table = &pairwise[e];
                let (fwd, out) = (&msg_fwd[e], &mut msg_bwd[e]);
                let base: Vec<T> = theta_hat.iter().zip(fwd.iter()).map(|(&th, &m)| gamma[s] * th - m).collect();
                for (xa, o) in out.iter_mut().enumerate() {
                    let row = &table[xa * lb..(xa + 1) * lb];
                    let mut best = T::infinity();
                    for (&b, &c) in base.iter().zip(row) {
                        let v = b + c;
                        if v < best {
                            best = v;
                        }
                    }
                    *o = best;
                }
                normalize(out);
            }
        }

        // labeling: condition on earlier choices, use messages from later nodes
        let mut labels = vec![0usize; n];
        for s in 0..n {
            let mut cost = unary[s].clone();
            for &e in &incident[s] {
                let (a, b) = edges[e];
                if b == s {
                    let lb = lc[b];
                    let row = labels[a] * lb;
                    for (xb, c) in cost.iter_mut().enumerate() {
                        *c = *c + pairwise[e][row + xb];
                    }
                } else {
                    for (c, m) in cost.iter_mut().zip(&msg_bwd[e]) {
                        *c = *c + *m;
                    }
                }
            }
            labels[s] = argmin(&cost);
        }
        let energy = reduced_energy(&unary, edges, &pairwise, &lc, &labels);
        if best.as_ref().map_or(true, |(be, _)| energy < *be) {
            best = Some((energy, labels));
        }

        let bound = chain_bound(&chains, &counts, &unary, edges, &pairwise, &lc, &incident, &msg_fwd, &msg_bwd);
        let gain = bound_history.last().map(|&b| bound - b);
        bound_history.push(bound);

        let best_e = best.as_ref().map(|(e, _)| *e).unwrap_or(T::infinity());
        let tol = T::lit(options.gap_tolerance) * best_e.abs().max(T::one());
        if best_e - bound <= tol {
            break;
        }
        if options.bound_tolerance > 0.0
            && gain.is_some_and(|g| g <= T::lit(options.bound_tolerance) * bound.abs().max(T::one()))
        {
            break;
        }
    }

    let (_, reduced_labels) = best.expect("at least one sweep");
    let labels: Vec<usize> = reduced_labels.iter().enumerate().map(|(i, &l)| feasible[i][l]).collect();
    let energy = mrf.energy(&labels);
    let lower_bound = *bound_history.last().expect("at least one sweep");
    Ok(TrwsSolution {
        labels,
        energy,
        lower_bound,
        bound_history,
    })
}

fn normalize<T: Real>(v: &mut [T]) {
    let m = v.iter().fold(T::infinity(), |m, &x| m.min(x));
    if m.is_finite() {
        for x in v.iter_mut() {
            *x = *x - m;
        }
    }
}

fn argmin<T: Real>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}

fn reduced_energy<T: Real>(
    unary: &[Vec<T>],
    edges: &[(usize, usize)],
    pairwise: &[Vec<T>],
    lc: &[usize],
    labels: &[usize],
) -> T {
    let mut e = T::zero();
    for (i, &l) in labels.iter().enumerate() {
        e = e + unary[i][l];
    }
    for (k, &(a, b)) in edges.iter().enumerate() {
        e = e + pairwise[k][labels[a] * lc[b] + labels[b]];
    }
    e
}

#[allow(clippy::too_many_arguments)]
fn chain_bound<T: Real>(
    chains: &[Chain],
    counts: &[usize],
    unary: &[Vec<T>],
    edges: &[(usize, usize)],
    pairwise: &[Vec<T>],
    lc: &[usize],
    incident: &[Vec<usize>],
    msg_fwd: &[Vec<T>],
    msg_bwd: &[Vec<T>],
) -> T {
    // reparameterised node potentials, shared equally among a node's chains
    let node_share: Vec<Vec<T>> = (0..unary.len())
        .map(|s| {
            let mut v = unary[s].clone();
            for &e in &incident[s] {
                let m = if edges[e].1 == s { &msg_fwd[e] } else { &msg_bwd[e] };
                for (o, x) in v.iter_mut().zip(m) {
                    *o = *o + *x;
                }
            }
            let c = T::from_usize_lossy(counts[s]);
            v.iter_mut().for_each(|x| *x = *x / c);
            v
        })
        .collect();

    let mut total = T::zero();
    for chain in chains {
        let first = chain.nodes[0];
        let mut acc = node_share[first].clone();
        for (k, &e) in chain.edges.iter().enumerate() {
            let (a, b) = edges[e];
            debug_assert_eq!(a, chain.nodes[k]);
            let lb = lc[b];
            let mut next = vec![T::infinity(); lb];
            for (xa, &prev) in acc.iter().enumerate() {
                let base = prev - msg_bwd[e][xa];
                for xb in 0..lb {
                    let v = base + pairwise[e][xa * lb + xb] - msg_fwd[e][xb];
                    if v < next[xb] {
                        next[xb] = v;
                    }
                }
            }
            for (x, s) in next.iter_mut().zip(&node_share[b]) {
                *x = *x + *s;
            }
            acc = next;
        }
        total = total + acc.iter().fold(T::infinity(), |m, &x| m.min(x));
    }
    total
}
