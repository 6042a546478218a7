//! CART decision trees with Gini impurity over sparse rows.
//!
//! Split search only touches the nonzero entries of the samples in a node;
//! the implied zeros of a feature are handled as one aggregated block. A
//! feature that is zero for every sample of a node is constant there and is
//! never a candidate.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::sparse::SparseVec;

use super::argmax;

const K: usize = Label::COUNT;

/// How many features a split may look at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    /// `max(1, floor(sqrt(F)))`.
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let m = match self {
            MaxFeatures::All => n_features,
            MaxFeatures::Sqrt => (n_features as f64).sqrt().floor() as usize,
            MaxFeatures::Count(c) => c,
        };
        m.clamp(1, n_features.max(1))
    }
}

/// Growth limits shared by single trees, forests and stumps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
}

impl Default for GrowParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: MaxFeatures::All,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Weighted class totals of the training samples that reached the leaf.
    Leaf { counts: [f64; K] },
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    n_features: usize,
    nodes: Vec<Node>,
}

struct Candidate {
    proxy: f64,
    feature: u32,
    threshold: f64,
}

/// Per-tree scratch space indexed by feature.
struct Scratch {
    stamp: Vec<u32>,
    slot: Vec<u32>,
    counter: u32,
}

impl Scratch {
    fn next(&mut self) -> u32 {
        self.counter += 1;
        self.counter
    }
}

struct Builder<'a, R> {
    x: &'a [SparseVec],
    y: &'a [usize],
    w: &'a [f64],
    params: GrowParams,
    m: usize,
    rng: &'a mut R,
    scratch: Scratch,
    nodes: Vec<Node>,
}

fn proxy(c: &[f64; K], total: f64) -> f64 {
    c.iter().map(|v| v * v).sum::<f64>() / total
}

impl<'a, R: Rng> Builder<'a, R> {
    fn totals(&self, idx: &[u32]) -> [f64; K] {
        let mut t = [0.0; K];
        for &s in idx {
            t[self.y[s as usize]] += self.w[s as usize];
        }
        t
    }

    /// Best split on one feature given its sorted nonzero entries.
    /// Returns `None` when the feature is constant on the node.
    fn eval_feature(
        &self,
        bucket: &[(f64, u32)],
        n: usize,
        totals: &[f64; K],
    ) -> Option<Option<(f64, f64)>> {
        // (value, class weights, count) per distinct value, zeros as one group.
        let mut groups: Vec<(f64, [f64; K], usize)> = Vec::new();
        let push = |v: f64, c: usize, wt: f64, cnt: usize, groups: &mut Vec<(f64, [f64; K], usize)>| {
            match groups.last_mut() {
                Some(g) if g.0 == v => {
                    g.1[c] += wt;
                    g.2 += cnt;
                }
                _ => {
                    let mut cw = [0.0; K];
                    cw[c] += wt;
                    groups.push((v, cw, cnt));
                }
            }
        };
        let split_at = bucket.partition_point(|e| e.0 < 0.0);
        for &(v, s) in &bucket[..split_at] {
            push(v, self.y[s as usize], self.w[s as usize], 1, &mut groups);
        }
        let n_zero = n - bucket.len();
        if n_zero > 0 {
            let mut zw = *totals;
            for &(_, s) in bucket {
                zw[self.y[s as usize]] -= self.w[s as usize];
            }
            groups.push((0.0, zw.map(|v| v.max(0.0)), n_zero));
        }
        for &(v, s) in &bucket[split_at..] {
            push(v, self.y[s as usize], self.w[s as usize], 1, &mut groups);
        }
        if groups.len() < 2 {
            return None;
        }
        let total_w: f64 = totals.iter().sum();
        let min_leaf = self.params.min_samples_leaf;
        let mut left = [0.0; K];
        let mut left_n = 0usize;
        let mut best: Option<(f64, f64)> = None;
        for pair in groups.windows(2) {
            let (a, g, cnt) = (pair[0].0, pair[0].1, pair[0].2);
            for k in 0..K {
                left[k] += g[k];
            }
            left_n += cnt;
            let right_n = n - left_n;
            if left_n < min_leaf || right_n < min_leaf {
                continue;
            }
            let wl: f64 = left.iter().sum();
            let wr = total_w - wl;
            if wl <= 0.0 || wr <= 0.0 {
                continue;
            }
            let mut right = [0.0; K];
            for k in 0..K {
                right[k] = totals[k] - left[k];
            }
            let p = proxy(&left, wl) + proxy(&right, wr);
            if best.is_none_or(|(bp, _)| p > bp) {
                let b = pair[1].0;
                let mut t = a / 2.0 + b / 2.0;
                if !(t >= a && t < b) {
                    t = a;
                }
                best = Some((p, t));
            }
        }
        Some(best)
    }

    fn find_split(&mut self, idx: &[u32], totals: &[f64; K]) -> Option<Candidate> {
        let node_stamp = self.scratch.next();
        let mut pool: Vec<u32> = Vec::new();
        for &s in idx {
            for &f in &self.x[s as usize].indices {
                if self.scratch.stamp[f as usize] != node_stamp {
                    self.scratch.stamp[f as usize] = node_stamp;
                    pool.push(f);
                }
            }
        }
        pool.sort_unstable();
        let shuffle = self.m < self.x.first().map_or(0, |r| r.dim);
        let mut best: Option<Candidate> = None;
        let mut found = 0usize;
        let mut cursor = 0usize;
        while found < self.m && cursor < pool.len() {
            let take = (self.m - found).min(pool.len() - cursor);
            if shuffle {
                for i in cursor..cursor + take {
                    let j = self.rng.gen_range(i..pool.len());
                    pool.swap(i, j);
                }
            }
            let batch = &pool[cursor..cursor + take];
            cursor += take;
            let batch_stamp = self.scratch.next();
            for (b, &f) in batch.iter().enumerate() {
                self.scratch.stamp[f as usize] = batch_stamp;
                self.scratch.slot[f as usize] = b as u32;
            }
            let mut buckets: Vec<Vec<(f64, u32)>> = vec![Vec::new(); batch.len()];
            for &s in idx {
                for (f, v) in self.x[s as usize].iter() {
                    if self.scratch.stamp[f] == batch_stamp {
                        buckets[self.scratch.slot[f] as usize].push((v, s));
                    }
                }
            }
            for (b, &f) in batch.iter().enumerate() {
                let bucket = &mut buckets[b];
                bucket.sort_unstable_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
                match self.eval_feature(bucket, idx.len(), totals) {
                    None => {}
                    Some(result) => {
                        found += 1;
                        if let Some((p, t)) = result {
                            if best.as_ref().is_none_or(|c| p > c.proxy) {
                                best = Some(Candidate {
                                    proxy: p,
                                    feature: f,
                                    threshold: t,
                                });
                            }
                        }
                    }
                }
            }
        }
        best
    }

    fn build(&mut self, idx: &mut [u32], depth: usize) -> u32 {
        let id = self.nodes.len() as u32;
        let totals = self.totals(idx);
        self.nodes.push(Node::Leaf { counts: totals });
        let n = idx.len();
        let pure = totals.iter().filter(|&&v| v > 0.0).count() <= 1;
        if pure
            || self.params.max_depth.is_some_and(|d| depth >= d)
            || n < self.params.min_samples_split
            || n < 2 * self.params.min_samples_leaf
        {
            return id;
        }
        let Some(c) = self.find_split(idx, &totals) else {
            return id;
        };
        let f = c.feature as usize;
        let x = self.x;
        let mut lefts: Vec<u32> = Vec::with_capacity(n);
        let mut rights: Vec<u32> = Vec::with_capacity(n);
        for &s in idx.iter() {
            if x[s as usize].get(f) <= c.threshold {
                lefts.push(s);
            } else {
                rights.push(s);
            }
        }
        let n_left = lefts.len();
        idx[..n_left].copy_from_slice(&lefts);
        idx[n_left..].copy_from_slice(&rights);
        let (li, ri) = idx.split_at_mut(n_left);
        let left = self.build(li, depth + 1);
        let right = self.build(ri, depth + 1);
        self.nodes[id as usize] = Node::Split {
            feature: c.feature,
            threshold: c.threshold,
            left,
            right,
        };
        id
    }
}

impl DecisionTree {
    /// Grows a tree on rows `x` with class indices `y`.
    ///
    /// `weights` defaults to 1 per sample; samples with weight 0 are left
    /// out entirely. The rng is only drawn from when `max_features` is
    /// smaller than the row dimension.
    pub fn fit<R: Rng>(
        x: &[SparseVec],
        y: &[usize],
        weights: Option<&[f64]>,
        params: GrowParams,
        rng: &mut R,
    ) -> Self {
        let n_features = x.first().map_or(0, |r| r.dim);
        let ones;
        let w = match weights {
            Some(w) => w,
            None => {
                ones = vec![1.0; x.len()];
                &ones
            }
        };
        let mut idx: Vec<u32> = (0..x.len() as u32).filter(|&i| w[i as usize] > 0.0).collect();
        let mut b = Builder {
            x,
            y,
            w,
            params,
            m: params.max_features.resolve(n_features),
            rng,
            scratch: Scratch {
                stamp: vec![0; n_features],
                slot: vec![0; n_features],
                counter: 0,
            },
            nodes: Vec::new(),
        };
        b.build(&mut idx, 0);
        Self {
            n_features,
            nodes: b.nodes,
        }
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + walk(nodes, *left as usize).max(walk(nodes, *right as usize))
                }
            }
        }
        walk(&self.nodes, 0)
    }

    /// Class totals of the leaf that `x` falls into.
    pub fn leaf_counts(&self, x: &SparseVec) -> &[f64; K] {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf { counts } => return counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x.get(*feature as usize) <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn predict_class(&self, x: &SparseVec) -> usize {
        argmax(self.leaf_counts(x))
    }

    /// Leaf class distribution, normalized to sum to 1.
    pub fn scores(&self, x: &SparseVec) -> [f64; K] {
        let c = self.leaf_counts(x);
        let t: f64 = c.iter().sum();
        if t > 0.0 {
            c.map(|v| v / t)
        } else {
            *c
        }
    }
}
