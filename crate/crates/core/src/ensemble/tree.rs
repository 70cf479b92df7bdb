//! Regression trees stored as a flat node arena and serialized as nested
//! node records.
//!
//! A sample goes left when `x[feature] <= threshold`. Two growers share the
//! arena: exhaustive CART (best threshold per feature, used by AdaBoost and
//! GBDT) and extremely randomized splitting (one uniform threshold per
//! feature, used by Extra Trees).

use serde::{Deserialize, Serialize};

use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq)]
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

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "NodeRecord", from = "NodeRecord")]
pub struct Tree {
    /// Root is node 0.
    pub nodes: Vec<Node>,
}

/// On-disk form of a tree: each split owns its children.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum NodeRecord {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<NodeRecord>,
        right: Box<NodeRecord>,
    },
}

impl Tree {
    fn record(&self, i: usize) -> NodeRecord {
        match self.nodes[i] {
            Node::Leaf { value } => NodeRecord::Leaf { value },
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => NodeRecord::Split {
                feature,
                threshold,
                left: Box::new(self.record(left)),
                right: Box::new(self.record(right)),
            },
        }
    }

    /// Appends `rec` in preorder and returns its index.
    fn push_record(nodes: &mut Vec<Node>, rec: NodeRecord) -> usize {
        let i = nodes.len();
        match rec {
            NodeRecord::Leaf { value } => nodes.push(Node::Leaf { value }),
            NodeRecord::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                nodes.push(Node::Leaf { value: 0.0 });
                let left = Self::push_record(nodes, *left);
                let right = Self::push_record(nodes, *right);
                nodes[i] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
            }
        }
        i
    }
}

impl From<Tree> for NodeRecord {
    fn from(tree: Tree) -> Self {
        tree.record(0)
    }
}

impl From<NodeRecord> for Tree {
    fn from(rec: NodeRecord) -> Self {
        let mut nodes = Vec::new();
        Tree::push_record(&mut nodes, rec);
        Tree { nodes }
    }
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        let mut deepest = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, d)) = stack.pop() {
            deepest = deepest.max(d);
            if let Node::Split { left, right, .. } = self.nodes[i] {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        deepest
    }

    /// Checks child indices point forward inside the arena (no cycles).
    pub fn is_well_formed(&self, n_features: usize) -> bool {
        !self.nodes.is_empty()
            && self.nodes.iter().enumerate().all(|(i, n)| match *n {
                Node::Leaf { value } => value.is_finite(),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    feature < n_features
                        && threshold.is_finite()
                        && left > i
                        && right > i
                        && left < self.nodes.len()
                        && right < self.nodes.len()
                }
            })
    }
}

fn mean_of(y: &[f64], idx: &[usize]) -> f64 {
    // running form: a pure leaf returns its value bit for bit
    idx.iter().enumerate().fold(0.0, |m, (k, &i)| m + (y[i] - m) / (k + 1) as f64)
}

fn is_pure(y: &[f64], idx: &[usize]) -> bool {
    let first = y[idx[0]];
    idx.iter().all(|&i| y[i] == first)
}

/// Sum-of-squares score `S_L²/n_L + S_R²/n_R`; larger is a better split.
fn split_score(sum_l: f64, n_l: usize, sum_r: f64, n_r: usize) -> f64 {
    sum_l * sum_l / n_l as f64 + sum_r * sum_r / n_r as f64
}

struct Chosen {
    feature: usize,
    threshold: f64,
}

trait Splitter {
    fn choose(&mut self, x: &[Vec<f64>], y: &[f64], idx: &[usize]) -> Option<Chosen>;
}

struct BestSplitter;

impl Splitter for BestSplitter {
    fn choose(&mut self, x: &[Vec<f64>], y: &[f64], idx: &[usize]) -> Option<Chosen> {
        let n = idx.len();
        let total: f64 = idx.iter().map(|&i| y[i]).sum();
        let parent = total * total / n as f64;
        let mut best: Option<(f64, Chosen)> = None;
        let mut order = idx.to_vec();
        for f in 0..x[0].len() {
            order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
            let mut sum_l = 0.0;
            for pos in 0..n - 1 {
                sum_l += y[order[pos]];
                let (lo, hi) = (x[order[pos]][f], x[order[pos + 1]][f]);
                if lo == hi {
                    continue;
                }
                let score = split_score(sum_l, pos + 1, total - sum_l, n - pos - 1);
                if best.as_ref().is_none_or(|(s, _)| score > *s) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some((score, Chosen { feature: f, threshold }));
                }
            }
        }
        let (score, chosen) = best?;
        (score > parent + 1e-12 * parent.abs()).then_some(chosen)
    }
}

struct RandomSplitter<'r> {
    rng: &'r mut SplitMix64,
}

impl Splitter for RandomSplitter<'_> {
    fn choose(&mut self, x: &[Vec<f64>], y: &[f64], idx: &[usize]) -> Option<Chosen> {
        let mut best: Option<(f64, Chosen)> = None;
        for f in 0..x[0].len() {
            let (lo, hi) = idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                (lo.min(x[i][f]), hi.max(x[i][f]))
            });
            if lo == hi {
                continue;
            }
            let mut threshold = lo + self.rng.next_f64() * (hi - lo);
            if threshold >= hi {
                threshold = lo;
            }
            let (mut sum_l, mut n_l, mut sum_r, mut n_r) = (0.0, 0, 0.0, 0);
            for &i in idx {
                if x[i][f] <= threshold {
                    sum_l += y[i];
                    n_l += 1;
                } else {
                    sum_r += y[i];
                    n_r += 1;
                }
            }
            let score = split_score(sum_l, n_l, sum_r, n_r);
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, Chosen { feature: f, threshold }));
            }
        }
        best.map(|(_, c)| c)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

fn grow(
    x: &[Vec<f64>],
    y: &[f64],
    idx: Vec<usize>,
    params: GrowParams,
    splitter: &mut dyn Splitter,
) -> Tree {
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    // (node slot, samples, depth); depth-first, left before right
    let mut work = vec![(0usize, idx, 0usize)];
    while let Some((slot, idx, depth)) = work.pop() {
        let leaf = Node::Leaf {
            value: mean_of(y, &idx),
        };
        let can_split = idx.len() >= params.min_samples_split.max(2)
            && params.max_depth.is_none_or(|d| depth < d)
            && !is_pure(y, &idx);
        let chosen = if can_split {
            splitter.choose(x, y, &idx)
        } else {
            None
        };
        let Some(Chosen { feature, threshold }) = chosen else {
            nodes[slot] = leaf;
            continue;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| x[i][feature] <= threshold);
        if left_idx.is_empty() || right_idx.is_empty() {
            nodes[slot] = leaf;
            continue;
        }
        let left = nodes.len();
        let right = left + 1;
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[slot] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        work.push((right, right_idx, depth + 1));
        work.push((left, left_idx, depth + 1));
    }
    Tree { nodes }
}

/// Exhaustive least-squares CART on the rows `idx` (duplicates allowed).
pub fn fit_cart(x: &[Vec<f64>], y: &[f64], idx: Vec<usize>, params: GrowParams) -> Tree {
    grow(x, y, idx, params, &mut BestSplitter)
}

/// Extremely randomized regression tree on all rows.
pub fn fit_extra_tree(
    x: &[Vec<f64>],
    y: &[f64],
    params: GrowParams,
    rng: &mut SplitMix64,
) -> Tree {
    grow(x, y, (0..y.len()).collect(), params, &mut RandomSplitter { rng })
}
