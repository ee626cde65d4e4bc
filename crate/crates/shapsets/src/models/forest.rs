//! Bagged CART regression trees.
//!
//! Each tree is grown on a bootstrap sample (size N, with replacement) drawn
//! from a per-tree generator derived from the forest seed, so forests retrain
//! bit-identically and trees can be fitted in parallel. Splits greedily
//! minimize within-node squared error over ceil(J/3) candidate features
//! sampled per node; growth is best-first and stops at `max_leaf_nodes`
//! terminal nodes or when no split reduces the error.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::dataset::Dataset;
use crate::par;
use crate::rng::{stream_rng, streams};

#[derive(Debug, Clone)]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut idx = 0usize;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

pub fn train_forest(ds: &Dataset, n_trees: usize, max_leaf_nodes: usize, seed: u64) -> Vec<Tree> {
    par::map_range(n_trees, |t| {
        let mut rng = stream_rng(seed, streams::TREE, t as u64);
        grow_tree(ds, max_leaf_nodes, &mut rng)
    })
}

struct Candidate {
    gain: f64,
    node: usize,
    feature: usize,
    threshold: f64,
    left_rows: Vec<usize>,
    right_rows: Vec<usize>,
}

// max-heap ordering on (gain, oldest node first)
impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.gain == other.gain && self.node == other.node
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.gain
            .partial_cmp(&other.gain)
            .unwrap()
            .then_with(|| Reverse(self.node).cmp(&Reverse(other.node)))
    }
}

fn grow_tree(ds: &Dataset, max_leaf_nodes: usize, rng: &mut ChaCha12Rng) -> Tree {
    let n = ds.n();
    let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();

    let mut nodes = vec![Node::Leaf {
        value: mean_response(ds, &sample),
    }];
    let mut heap: BinaryHeap<Candidate> = BinaryHeap::new();
    if let Some(c) = best_split(ds, 0, &sample, rng) {
        heap.push(c);
    }

    let mut leaves = 1usize;
    while leaves < max_leaf_nodes {
        let Some(cand) = heap.pop() else { break };
        let left = nodes.len();
        let right = nodes.len() + 1;
        nodes.push(Node::Leaf {
            value: mean_response(ds, &cand.left_rows),
        });
        nodes.push(Node::Leaf {
            value: mean_response(ds, &cand.right_rows),
        });
        nodes[cand.node] = Node::Split {
            feature: cand.feature,
            threshold: cand.threshold,
            left,
            right,
        };
        leaves += 1;
        if let Some(c) = best_split(ds, left, &cand.left_rows, rng) {
            heap.push(c);
        }
        if let Some(c) = best_split(ds, right, &cand.right_rows, rng) {
            heap.push(c);
        }
    }
    Tree { nodes }
}

fn mean_response(ds: &Dataset, rows: &[usize]) -> f64 {
    let sum: f64 = rows.iter().map(|&i| ds.response()[i]).sum();
    sum / rows.len() as f64
}

fn node_sse(ds: &Dataset, rows: &[usize]) -> f64 {
    let mean = mean_response(ds, rows);
    rows.iter()
        .map(|&i| {
            let d = ds.response()[i] - mean;
            d * d
        })
        .sum()
}

/// Greedy best split over ceil(J/3) randomly chosen candidate features.
/// Returns `None` for pure or unsplittable nodes.
fn best_split(
    ds: &Dataset,
    node: usize,
    rows: &[usize],
    rng: &mut ChaCha12Rng,
) -> Option<Candidate> {
    if rows.len() < 2 {
        return None;
    }
    let j = ds.j();
    let mtry = j.div_ceil(3);
    let mut feature_pool: Vec<usize> = (0..j).collect();
    feature_pool.shuffle(rng);
    let candidates = &feature_pool[..mtry];

    let parent_sse = node_sse(ds, rows);
    if parent_sse <= 0.0 {
        return None; // pure node
    }

    let mut best: Option<(f64, usize, f64)> = None; // (children sse, feature, threshold)
    let mut order: Vec<usize> = Vec::with_capacity(rows.len());
    for &feature in candidates {
        order.clear();
        order.extend_from_slice(rows);
        order.sort_unstable_by(|&a, &b| {
            ds.row(a)[feature]
                .partial_cmp(&ds.row(b)[feature])
                .unwrap()
                .then(a.cmp(&b))
        });

        let total_sum: f64 = order.iter().map(|&i| ds.response()[i]).sum();
        let total_sq: f64 = order.iter().map(|&i| ds.response()[i].powi(2)).sum();
        let mut left_sum = 0.0;
        let mut left_sq = 0.0;
        for split_at in 1..order.len() {
            let y = ds.response()[order[split_at - 1]];
            left_sum += y;
            left_sq += y * y;
            let x_prev = ds.row(order[split_at - 1])[feature];
            let x_next = ds.row(order[split_at])[feature];
            if x_prev == x_next {
                continue; // cannot separate equal values
            }
            let n_l = split_at as f64;
            let n_r = (order.len() - split_at) as f64;
            let sse_l = left_sq - left_sum * left_sum / n_l;
            let sse_r = (total_sq - left_sq) - (total_sum - left_sum).powi(2) / n_r;
            let sse = sse_l + sse_r;
            let improves = match &best {
                None => true,
                Some((b, ..)) => sse < *b,
            };
            if improves {
                best = Some((sse, feature, 0.5 * (x_prev + x_next)));
            }
        }
    }

    let (sse, feature, threshold) = best?;
    let gain = parent_sse - sse;
    if gain <= 0.0 {
        return None;
    }
    let mut left_rows = Vec::new();
    let mut right_rows = Vec::new();
    for &i in rows {
        if ds.row(i)[feature] <= threshold {
            left_rows.push(i);
        } else {
            right_rows.push(i);
        }
    }
    Some(Candidate {
        gain,
        node,
        feature,
        threshold,
        left_rows,
        right_rows,
    })
}
