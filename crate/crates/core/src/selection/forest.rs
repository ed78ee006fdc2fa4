use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::entropy::{scan_sorted, TIE_EPS};
use crate::error::{Error, Result};

/// How a node's information gain is added to its attribute's total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IgWeighting {
    /// Scaled by the node's share of the tree's (bootstrap) sample.
    #[default]
    NodeFraction,
    Unweighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Candidate attributes per split; `None` means `floor(sqrt(n_features))`.
    pub max_features_per_split: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub rng_seed: u64,
    pub weighting: IgWeighting,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 500,
            max_features_per_split: None,
            max_depth: None,
            min_samples_split: 2,
            rng_seed: 0,
            weighting: IgWeighting::NodeFraction,
        }
    }
}

impl ForestConfig {
    pub fn features_per_split(&self, n_features: usize) -> usize {
        self.max_features_per_split
            .unwrap_or_else(|| (n_features as f64).sqrt().floor() as usize)
            .clamp(1, n_features.max(1))
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be at least 1".into()));
        }
        if let Some(m) = self.max_features_per_split {
            if m == 0 || m > n_features {
                return Err(Error::Config(format!(
                    "max_features_per_split {m} outside 1..={n_features}"
                )));
            }
        }
        if self.min_samples_split < 2 {
            return Err(Error::Config("min_samples_split must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Split { .. })).count()
    }
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    mtry: usize,
    cfg: &'a ForestConfig,
    root_size: f64,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    ig: Vec<f64>,
}

impl TreeBuilder<'_> {
    fn majority(&self, idx: &[usize]) -> (usize, bool) {
        let mut counts = vec![0usize; self.n_classes];
        for &i in idx {
            counts[self.y[i]] += 1;
        }
        let best = counts
            .iter()
            .enumerate()
            .fold(0, |b, (c, &n)| if n > counts[b] { c } else { b });
        let pure = counts.iter().filter(|&&n| n > 0).count() <= 1;
        (best, pure)
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let (class, pure) = self.majority(&idx);
        self.nodes.push(Node::Leaf { class });
        if pure || idx.len() < self.cfg.min_samples_split || self.cfg.max_depth.is_some_and(|d| depth >= d) {
            return id;
        }

        let n_features = self.x[0].len();
        let mut candidates = sample(&mut self.rng, n_features, self.mtry).into_vec();
        candidates.sort_unstable();
        let mut best: Option<(usize, f64, f64)> = None;
        let mut order = idx.clone();
        for &f in &candidates {
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]));
            let column: Vec<f64> = order.iter().map(|&i| self.x[i][f]).collect();
            let labels: Vec<usize> = order.iter().map(|&i| self.y[i]).collect();
            let local: Vec<usize> = (0..order.len()).collect();
            let split = scan_sorted(&column, &labels, self.n_classes, &local);
            if split.ig > TIE_EPS && best.is_none_or(|(_, _, ig)| split.ig > ig + TIE_EPS) {
                best = Some((f, split.threshold, split.ig));
            }
        }
        let Some((feature, threshold, ig)) = best else {
            return id;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| self.x[i][feature] <= threshold);
        if left_idx.is_empty() || right_idx.is_empty() {
            return id;
        }
        self.ig[feature] += match self.cfg.weighting {
            IgWeighting::NodeFraction => ig * idx.len() as f64 / self.root_size,
            IgWeighting::Unweighted => ig,
        };
        let left = self.grow(left_idx, depth + 1);
        let right = self.grow(right_idx, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

/// Bagged ensemble of information-gain trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    pub n_classes: usize,
    pub n_features: usize,
}

impl RandomForest {
    /// Majority vote; ties go to the lower class index.
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut votes = vec![0usize; self.n_classes];
        for t in &self.trees {
            votes[t.predict(x)] += 1;
        }
        votes
            .iter()
            .enumerate()
            .fold(0, |b, (c, &n)| if n > votes[b] { c } else { b })
    }
}

/// Trains the forest and returns it with the per-attribute information gain
/// accumulated over every split of every tree. Trees are built in parallel
/// from per-tree seeds and summed in tree order, so the result is
/// bit-identical for a fixed seed regardless of thread count.
pub fn fit_forest(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    cfg: &ForestConfig,
) -> Result<(RandomForest, Vec<f64>)> {
    let n = x.len();
    let n_features = x.first().map_or(0, |r| r.len());
    if n_features == 0 || n != y.len() {
        return Err(Error::DegenerateDataset("empty feature matrix".into()));
    }
    cfg.validate(n_features)?;
    let mut counts = vec![0usize; n_classes];
    for &l in y {
        counts[l] += 1;
    }
    let present = counts.iter().filter(|&&c| c > 0).count();
    if present < 2 || counts.iter().any(|&c| c > 0 && c < 2) {
        return Err(Error::DegenerateDataset(
            "need at least two classes with two samples each".into(),
        ));
    }
    let mtry = cfg.features_per_split(n_features);
    let mut master = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let seeds: Vec<u64> = (0..cfg.n_trees).map(|_| master.gen()).collect();

    let grown: Vec<(DecisionTree, Vec<f64>)> = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let bootstrap: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let mut builder = TreeBuilder {
                x,
                y,
                n_classes,
                mtry,
                cfg,
                root_size: n as f64,
                rng,
                nodes: Vec::new(),
                ig: vec![0.0; n_features],
            };
            builder.grow(bootstrap, 0);
            (DecisionTree { nodes: builder.nodes }, builder.ig)
        })
        .collect();

    let mut total = vec![0.0; n_features];
    let mut trees = Vec::with_capacity(grown.len());
    for (tree, ig) in grown {
        for (t, v) in total.iter_mut().zip(&ig) {
            *t += v;
        }
        trees.push(tree);
    }
    Ok((
        RandomForest {
            trees,
            n_classes,
            n_features,
        },
        total,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_tree_learns_threshold() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, 0.0]).collect();
        let y: Vec<usize> = (0..20).map(|i| usize::from(i >= 10)).collect();
        let cfg = ForestConfig {
            n_trees: 1,
            max_features_per_split: Some(2),
            ..Default::default()
        };
        let (forest, ig) = fit_forest(&x, &y, 2, &cfg).unwrap();
        assert_eq!(ig[1], 0.0);
        assert!(ig[0] > 0.0);
        for (xi, &yi) in x.iter().zip(&y) {
            assert_eq!(forest.predict(xi), yi);
        }
    }

    #[test]
    fn rejects_single_class() {
        let x = vec![vec![1.0]; 4];
        assert!(fit_forest(&x, &[0, 0, 0, 0], 2, &ForestConfig::default()).is_err());
    }

    #[test]
    fn max_depth_limits_tree() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![(i % 7) as f64, (i % 5) as f64]).collect();
        let y: Vec<usize> = (0..40).map(|i| i % 3).collect();
        let cfg = ForestConfig {
            n_trees: 3,
            max_depth: Some(1),
            ..Default::default()
        };
        let (forest, _) = fit_forest(&x, &y, 3, &cfg).unwrap();
        assert!(forest.trees.iter().all(|t| t.n_splits() <= 1));
    }

    #[test]
    fn unweighted_sum_dominates_weighted() {
        let x: Vec<Vec<f64>> = (0..60)
            .map(|i| vec![((i * 37) % 11) as f64, ((i * 13) % 7) as f64])
            .collect();
        let y: Vec<usize> = (0..60).map(|i| (i * 7 % 3) as usize).collect();
        let base = ForestConfig {
            n_trees: 5,
            rng_seed: 4,
            ..Default::default()
        };
        let (_, w) = fit_forest(&x, &y, 3, &base).unwrap();
        let (_, u) = fit_forest(
            &x,
            &y,
            3,
            &ForestConfig {
                weighting: IgWeighting::Unweighted,
                ..base
            },
        )
        .unwrap();
        for (a, b) in w.iter().zip(&u) {
            assert!(a <= b);
        }
    }
}
