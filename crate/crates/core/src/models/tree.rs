//! CART regression trees with sum-squared-error split search.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::models::check_xy;

/// Stopping rules for tree growth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeConfig {
    /// Maximum number of edges on any root-to-leaf path; `None` grows until
    /// nodes are pure or too small.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
        }
    }
}

impl TreeConfig {
    fn validate(&self) -> Result<()> {
        if self.min_samples_split < 2 {
            return Err(Error::invalid("min_samples_split must be >= 2"));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::invalid("min_samples_leaf must be >= 1"));
        }
        Ok(())
    }
}

/// One node of a fitted tree. Children are indices into the node list;
/// a sample routes left iff `x[feature] <= threshold`.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        /// Mean of the training targets routed here (1 or 3 components).
        value: Vec<f64>,
        n_samples: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTreeModel {
    /// Nodes in preorder; the root is index 0.
    pub nodes: Vec<Node>,
    pub config: TreeConfig,
    pub target_dim: usize,
    pub n_features: usize,
}

impl DecisionTreeModel {
    pub fn predict(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.n_features {
            return Err(Error::shape(format!(
                "tree was fit on {} features, input has {}",
                self.n_features,
                x.ncols()
            )));
        }
        let n = x.nrows();
        let mut out = DMatrix::zeros(n, self.target_dim);
        for i in 0..n {
            let leaf = self.predict_row(|j| x[(i, j)]);
            for (k, &v) in leaf.iter().enumerate() {
                out[(i, k)] = v;
            }
        }
        Ok(out)
    }

    /// Route one sample (given by a feature accessor) to its leaf value.
    pub fn predict_row(&self, feature: impl Fn(usize) -> f64) -> &[f64] {
        let mut node = 0usize;
        loop {
            match &self.nodes[node] {
                Node::Split {
                    feature: f,
                    threshold,
                    left,
                    right,
                } => {
                    node = if feature(*f) <= *threshold { *left } else { *right };
                }
                Node::Leaf { value, .. } => return value,
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], idx: usize) -> usize {
            match &nodes[idx] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Fit a tree on all rows, considering every feature at every split.
pub fn fit_tree(x: &DMatrix<f64>, y: &DMatrix<f64>, config: &TreeConfig) -> Result<DecisionTreeModel> {
    check_xy(x, y)?;
    config.validate()?;
    let samples: Vec<usize> = (0..x.nrows()).collect();
    Ok(fit_tree_on_samples(x, y, config, samples, None))
}

/// Fit a tree on the given sample indices, optionally restricting every
/// split to a random subset of `m_try` features drawn from `rng`.
pub(crate) fn fit_tree_on_samples(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    config: &TreeConfig,
    samples: Vec<usize>,
    feature_sampling: Option<(usize, ChaCha8Rng)>,
) -> DecisionTreeModel {
    let mut builder = Builder {
        x,
        y,
        config,
        d: y.ncols(),
        p: x.ncols(),
        nodes: Vec::new(),
        feature_sampling,
    };
    builder.build(samples, 0);
    DecisionTreeModel {
        nodes: builder.nodes,
        config: config.clone(),
        target_dim: y.ncols(),
        n_features: x.ncols(),
    }
}

struct Builder<'a> {
    x: &'a DMatrix<f64>,
    y: &'a DMatrix<f64>,
    config: &'a TreeConfig,
    d: usize,
    p: usize,
    nodes: Vec<Node>,
    feature_sampling: Option<(usize, ChaCha8Rng)>,
}

struct BestSplit {
    reduction: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    /// Grow the subtree for `samples`, returning its root index. Nodes are
    /// laid out in preorder (parent, left subtree, right subtree), which
    /// fixes both the node numbering and the feature-subset draw order.
    fn build(&mut self, samples: Vec<usize>, depth: usize) -> usize {
        let m = samples.len();
        let (sum, sum_sq) = self.target_sums(&samples);
        let sse_node = sse_from_sums(&sum, &sum_sq, m, self.d);

        let depth_allows = self.config.max_depth.map_or(true, |limit| depth < limit);
        let size_allows = m >= self.config.min_samples_split && m >= 2 * self.config.min_samples_leaf;

        if depth_allows && size_allows && sse_node > 0.0 {
            if let Some(best) = self.search_split(&samples, sse_node, &sum, &sum_sq) {
                let (left_samples, right_samples): (Vec<usize>, Vec<usize>) = samples
                    .iter()
                    .partition(|&&s| self.x[(s, best.feature)] <= best.threshold);
                let idx = self.nodes.len();
                self.nodes.push(Node::Split {
                    feature: best.feature,
                    threshold: best.threshold,
                    left: 0,
                    right: 0,
                });
                let left = self.build(left_samples, depth + 1);
                let right = self.build(right_samples, depth + 1);
                if let Node::Split {
                    left: l, right: r, ..
                } = &mut self.nodes[idx]
                {
                    *l = left;
                    *r = right;
                }
                return idx;
            }
        }

        let value = (0..self.d).map(|k| sum[k] / m as f64).collect();
        let idx = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value,
            n_samples: m,
        });
        idx
    }

    fn target_sums(&self, samples: &[usize]) -> ([f64; 3], [f64; 3]) {
        let mut sum = [0.0; 3];
        let mut sum_sq = [0.0; 3];
        for &s in samples {
            for k in 0..self.d {
                let v = self.y[(s, k)];
                sum[k] += v;
                sum_sq[k] += v * v;
            }
        }
        (sum, sum_sq)
    }

    /// Scan every candidate `(feature, threshold)` pair and return the one
    /// with the largest positive SSE reduction. Candidate thresholds are
    /// midpoints between consecutive distinct sorted values. Features are
    /// visited in ascending index order and thresholds in ascending value
    /// order, and only a strictly better reduction replaces the incumbent,
    /// so ties resolve to the lowest feature index, then lowest threshold.
    fn search_split(
        &mut self,
        samples: &[usize],
        sse_node: f64,
        total: &[f64; 3],
        total_sq: &[f64; 3],
    ) -> Option<BestSplit> {
        let m = samples.len();
        let min_leaf = self.config.min_samples_leaf;
        let candidates = self.candidate_features();

        let mut best: Option<BestSplit> = None;
        let mut order: Vec<usize> = Vec::with_capacity(m);
        for &feature in &candidates {
            order.clear();
            order.extend_from_slice(samples);
            order.sort_by(|&a, &b| self.x[(a, feature)].total_cmp(&self.x[(b, feature)]));

            let mut sum_l = [0.0; 3];
            let mut sum_sq_l = [0.0; 3];
            for i in 0..m - 1 {
                let s = order[i];
                for k in 0..self.d {
                    let v = self.y[(s, k)];
                    sum_l[k] += v;
                    sum_sq_l[k] += v * v;
                }
                let here = self.x[(order[i], feature)];
                let next = self.x[(order[i + 1], feature)];
                if here < next {
                    let m_l = i + 1;
                    let m_r = m - m_l;
                    if m_l < min_leaf || m_r < min_leaf {
                        continue;
                    }
                    let mut sum_r = [0.0; 3];
                    let mut sum_sq_r = [0.0; 3];
                    for k in 0..self.d {
                        sum_r[k] = total[k] - sum_l[k];
                        sum_sq_r[k] = total_sq[k] - sum_sq_l[k];
                    }
                    let sse_l = sse_from_sums(&sum_l, &sum_sq_l, m_l, self.d);
                    let sse_r = sse_from_sums(&sum_r, &sum_sq_r, m_r, self.d);
                    let reduction = sse_node - sse_l - sse_r;
                    if reduction > 0.0 && best.as_ref().map_or(true, |b| reduction > b.reduction) {
                        let mut threshold = 0.5 * (here + next);
                        // Midpoints of adjacent floats can round up to the
                        // right value; keep the routing consistent with the
                        // training partition.
                        if threshold >= next {
                            threshold = here;
                        }
                        best = Some(BestSplit {
                            reduction,
                            feature,
                            threshold,
                        });
                    }
                }
            }
        }
        best
    }

    /// The feature indices considered at this node, ascending.
    fn candidate_features(&mut self) -> Vec<usize> {
        match &mut self.feature_sampling {
            Some((m_try, rng)) if *m_try < self.p => {
                // Partial Fisher-Yates draw of m_try distinct indices.
                let mut pool: Vec<usize> = (0..self.p).collect();
                for i in 0..*m_try {
                    let j = rng.gen_range(i..self.p);
                    pool.swap(i, j);
                }
                let mut chosen = pool[..*m_try].to_vec();
                chosen.sort_unstable();
                chosen
            }
            _ => (0..self.p).collect(),
        }
    }
}

fn sse_from_sums(sum: &[f64; 3], sum_sq: &[f64; 3], m: usize, d: usize) -> f64 {
    let mut sse = 0.0;
    for k in 0..d {
        sse += sum_sq[k] - sum[k] * sum[k] / m as f64;
    }
    sse
}
