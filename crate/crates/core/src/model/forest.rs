//! Random forest: bootstrap-resampled Gini trees over random feature
//! subsets. Tree `i` draws its own generator from the master seed, so the
//! forest is identical no matter how tree fitting is scheduled.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::TrainConfig;
use crate::ingest::ClassLabel;
use crate::scalar::Scalar;
use crate::seeding;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode<S> {
    Split {
        feature: usize,
        threshold: S,
        left: usize,
        right: usize,
    },
    Leaf {
        prob_gang: S,
        prob_non_gang: S,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree<S> {
    nodes: Vec<TreeNode<S>>,
}

impl<S: Scalar> Tree<S> {
    pub fn nodes(&self) -> &[TreeNode<S>] {
        &self.nodes
    }

    #[cfg(test)]
    pub(crate) fn leaf_only(prob_gang: f64) -> Self {
        Tree {
            nodes: vec![TreeNode::Leaf {
                prob_gang: S::from_f64_cfg(prob_gang),
                prob_non_gang: S::from_f64_cfg(1.0 - prob_gang),
            }],
        }
    }

    /// Walk the tree; `x[feature] <= threshold` goes left.
    pub fn prob_gang(&self, row: &[S]) -> S {
        let mut node = 0usize;
        loop {
            match &self.nodes[node] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
                TreeNode::Leaf { prob_gang, .. } => return *prob_gang,
            }
        }
    }
}

pub(crate) fn train_forest<S: Scalar>(
    x: &[Vec<S>],
    y: &[ClassLabel],
    config: &TrainConfig,
) -> Vec<Tree<S>> {
    let d = x[0].len();
    let features_per_split = config
        .features_per_split
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
        .clamp(1, d);
    (0..config.trees)
        .map(|t| {
            let mut rng = seeding::rng_from_seed(seeding::derive_seed_indexed(
                config.seed,
                "tree",
                t as u64,
            ));
            let sample: Vec<usize> = (0..x.len()).map(|_| rng.random_range(0..x.len())).collect();
            let mut builder = TreeBuilder {
                x,
                y,
                features_per_split,
                max_depth: config.max_depth,
                nodes: Vec::new(),
                rng,
            };
            let root = builder.grow(sample, 0);
            debug_assert_eq!(root, 0);
            Tree {
                nodes: builder.nodes,
            }
        })
        .collect()
}

struct TreeBuilder<'a, S> {
    x: &'a [Vec<S>],
    y: &'a [ClassLabel],
    features_per_split: usize,
    max_depth: Option<usize>,
    nodes: Vec<TreeNode<S>>,
    rng: rand_chacha::ChaCha8Rng,
}

fn gini(gang: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = gang as f64 / total as f64;
    let q = 1.0 - p;
    1.0 - p * p - q * q
}

impl<S: Scalar> TreeBuilder<'_, S> {
    fn grow(&mut self, indices: Vec<usize>, depth: usize) -> usize {
        let gang = indices
            .iter()
            .filter(|&&i| self.y[i] == ClassLabel::Gang)
            .count();
        let total = indices.len();
        let depth_capped = self.max_depth.map_or(false, |limit| depth >= limit);
        if gang == 0 || gang == total || total < 2 || depth_capped {
            return self.push_leaf(gang, total);
        }
        match self.best_split(&indices) {
            None => self.push_leaf(gang, total),
            Some((feature, threshold)) => {
                let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
                    .into_iter()
                    .partition(|&i| self.x[i][feature] <= threshold);
                // reserve this node's slot before growing children
                let node = self.nodes.len();
                self.nodes.push(TreeNode::Leaf {
                    prob_gang: S::zero(),
                    prob_non_gang: S::zero(),
                });
                let left = self.grow(left_idx, depth + 1);
                let right = self.grow(right_idx, depth + 1);
                self.nodes[node] = TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                node
            }
        }
    }

    fn push_leaf(&mut self, gang: usize, total: usize) -> usize {
        let node = self.nodes.len();
        let p = if total == 0 {
            0.0
        } else {
            gang as f64 / total as f64
        };
        self.nodes.push(TreeNode::Leaf {
            prob_gang: S::from_f64_cfg(p),
            prob_non_gang: S::from_f64_cfg(1.0 - p),
        });
        node
    }

    /// Best (feature, threshold) by Gini gain over a random feature subset.
    /// Zero-gain splits are accepted (both sides are always non-empty), which
    /// keeps structure like XOR learnable; ties keep the first candidate in
    /// sampled order, then the lowest threshold.
    fn best_split(&mut self, indices: &[usize]) -> Option<(usize, S)> {
        let d = self.x[0].len();
        let candidates = self.sample_features(d);
        let total = indices.len();
        let gang_total = indices
            .iter()
            .filter(|&&i| self.y[i] == ClassLabel::Gang)
            .count();
        let parent = gini(gang_total, total);
        let mut best: Option<(f64, usize, S)> = None;

        let mut order: Vec<usize> = Vec::with_capacity(total);
        for &feature in &candidates {
            order.clear();
            order.extend_from_slice(indices);
            order.sort_by(|&a, &b| {
                self.x[a][feature]
                    .partial_cmp(&self.x[b][feature])
                    .expect("finite feature values")
            });
            let mut left_gang = 0usize;
            let mut left_total = 0usize;
            for w in 0..total - 1 {
                let i = order[w];
                if self.y[i] == ClassLabel::Gang {
                    left_gang += 1;
                }
                left_total += 1;
                let here = self.x[i][feature];
                let next = self.x[order[w + 1]][feature];
                if here == next {
                    continue;
                }
                let right_total = total - left_total;
                let right_gang = gang_total - left_gang;
                let weighted = (left_total as f64 * gini(left_gang, left_total)
                    + right_total as f64 * gini(right_gang, right_total))
                    / total as f64;
                let gain = parent - weighted;
                if best.as_ref().map_or(gain >= 0.0, |&(g, _, _)| gain > g) {
                    let two = S::from_f64_cfg(2.0);
                    best = Some((gain, feature, (here + next) / two));
                }
            }
        }
        best.map(|(_, feature, threshold)| (feature, threshold))
    }

    /// Distinct feature indices via partial Fisher-Yates; sampled order is
    /// the tie-break order.
    fn sample_features(&mut self, d: usize) -> Vec<usize> {
        let take = self.features_per_split.min(d);
        let mut pool: Vec<usize> = (0..d).collect();
        for i in 0..take {
            let j = self.rng.random_range(i..d);
            pool.swap(i, j);
        }
        pool.truncate(take);
        pool
    }
}
