//! Versioned structured-text serialization for fitted models.
//!
//! Trees are written as flat node lists with explicit child indices; all
//! coefficients carry 17 significant digits so a reloaded model predicts
//! bit-identically.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::models::{
    Aggregation, DecisionTreeModel, ForestConfig, ForestModel, KnnConfig, KnnModel, MaxFeatures,
    Model, Node, TreeConfig,
};
use crate::textio::{fmt_f64, parse_f64};

const MAGIC: &str = "magnav-model v1";

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    write_model(model, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let file = std::fs::File::open(path)?;
    read_model(BufReader::new(file))
}

pub fn write_model(model: &Model, w: &mut impl Write) -> Result<()> {
    match model {
        Model::Tree(tree) => {
            writeln!(w, "{MAGIC} tree")?;
            writeln!(w, "target_dim {}", tree.target_dim)?;
            writeln!(w, "n_features {}", tree.n_features)?;
            write_tree_config(w, &tree.config)?;
            write_nodes(w, tree)?;
        }
        Model::Forest(forest) => {
            writeln!(w, "{MAGIC} forest")?;
            writeln!(w, "target_dim {}", forest.target_dim)?;
            writeln!(w, "n_features {}", forest.n_features)?;
            writeln!(w, "n_estimators {}", forest.config.n_estimators)?;
            writeln!(w, "master_seed {}", forest.config.master_seed)?;
            let mf = match forest.config.max_features {
                MaxFeatures::All => "all".to_string(),
                MaxFeatures::Count(c) => format!("count {c}"),
                MaxFeatures::Fraction(f) => format!("fraction {}", fmt_f64(f)),
            };
            writeln!(w, "max_features {mf}")?;
            writeln!(w, "bootstrap {}", forest.config.bootstrap)?;
            writeln!(w, "aggregation {}", forest.config.aggregation.name())?;
            write_tree_config(w, &forest.config.tree)?;
            for (i, tree) in forest.trees.iter().enumerate() {
                writeln!(w, "tree {i} seed {} nodes {}", forest.tree_seeds[i], tree.nodes.len())?;
                for (idx, node) in tree.nodes.iter().enumerate() {
                    write_node(w, idx, node)?;
                }
            }
        }
        Model::Knn(knn) => {
            writeln!(w, "{MAGIC} knn")?;
            writeln!(w, "target_dim {}", knn.target_dim())?;
            writeln!(w, "n_features {}", knn.n_features())?;
            writeln!(w, "k {}", knn.config.k)?;
            writeln!(w, "aggregation {}", knn.config.aggregation.name())?;
            writeln!(w, "n_train {}", knn.n_train())?;
            for i in 0..knn.n_train() {
                let mut line = String::from("sample");
                for j in 0..knn.n_features() {
                    line.push(' ');
                    line.push_str(&fmt_f64(knn.train_x()[(i, j)]));
                }
                for k in 0..knn.target_dim() {
                    line.push(' ');
                    line.push_str(&fmt_f64(knn.train_y()[(i, k)]));
                }
                writeln!(w, "{line}")?;
            }
        }
    }
    writeln!(w, "end")?;
    Ok(())
}

fn write_tree_config(w: &mut impl Write, config: &TreeConfig) -> Result<()> {
    match config.max_depth {
        Some(d) => writeln!(w, "max_depth {d}")?,
        None => writeln!(w, "max_depth none")?,
    }
    writeln!(w, "min_samples_split {}", config.min_samples_split)?;
    writeln!(w, "min_samples_leaf {}", config.min_samples_leaf)?;
    Ok(())
}

fn write_nodes(w: &mut impl Write, tree: &DecisionTreeModel) -> Result<()> {
    writeln!(w, "nodes {}", tree.nodes.len())?;
    for (idx, node) in tree.nodes.iter().enumerate() {
        write_node(w, idx, node)?;
    }
    Ok(())
}

fn write_node(w: &mut impl Write, idx: usize, node: &Node) -> Result<()> {
    match node {
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => writeln!(w, "node {idx} split {feature} {} {left} {right}", fmt_f64(*threshold))?,
        Node::Leaf { value, n_samples } => {
            let mut line = format!("node {idx} leaf {n_samples}");
            for v in value {
                line.push(' ');
                line.push_str(&fmt_f64(*v));
            }
            writeln!(w, "{line}")?;
        }
    }
    Ok(())
}

// ── Reading ──────────────────────────────────────────────────────────────

struct Lines<R: BufRead> {
    reader: R,
    buf: String,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<&str> {
        loop {
            self.buf.clear();
            let n = self.reader.read_line(&mut self.buf)?;
            self.line_no += 1;
            if n == 0 {
                return Err(Error::ModelFormat("unexpected end of file".into()));
            }
            if !self.buf.trim().is_empty() {
                return Ok(self.buf.trim());
            }
        }
    }

    fn key_value(&mut self, key: &str) -> Result<String> {
        let line_no = self.line_no + 1;
        let line = self.next()?;
        let rest = line
            .strip_prefix(key)
            .ok_or_else(|| Error::ModelFormat(format!("line {line_no}: expected `{key} ...`")))?;
        Ok(rest.trim().to_string())
    }

    fn parse_usize(&mut self, key: &str) -> Result<usize> {
        let v = self.key_value(key)?;
        v.parse()
            .map_err(|_| Error::ModelFormat(format!("bad integer for `{key}`: {v}")))
    }
}

fn parse_float(token: &str) -> Result<f64> {
    parse_f64(token).ok_or_else(|| Error::ModelFormat(format!("bad float `{token}`")))
}

pub fn read_model(reader: impl BufRead) -> Result<Model> {
    let mut lines = Lines {
        reader,
        buf: String::new(),
        line_no: 0,
    };
    let header = lines.next()?.to_string();
    let kind = header
        .strip_prefix(MAGIC)
        .map(str::trim)
        .ok_or_else(|| Error::ModelFormat(format!("bad header `{header}`")))?
        .to_string();

    match kind.as_str() {
        "tree" => {
            let target_dim = lines.parse_usize("target_dim")?;
            let n_features = lines.parse_usize("n_features")?;
            let config = read_tree_config(&mut lines)?;
            let n_nodes = lines.parse_usize("nodes")?;
            let nodes = read_nodes(&mut lines, n_nodes, target_dim)?;
            expect_end(&mut lines)?;
            Ok(Model::Tree(DecisionTreeModel {
                nodes,
                config,
                target_dim,
                n_features,
            }))
        }
        "forest" => {
            let target_dim = lines.parse_usize("target_dim")?;
            let n_features = lines.parse_usize("n_features")?;
            let n_estimators = lines.parse_usize("n_estimators")?;
            let master_seed: u64 = lines
                .key_value("master_seed")?
                .parse()
                .map_err(|_| Error::ModelFormat("bad master_seed".into()))?;
            let mf_raw = lines.key_value("max_features")?;
            let max_features = parse_max_features(&mf_raw)?;
            let bootstrap = match lines.key_value("bootstrap")?.as_str() {
                "true" => true,
                "false" => false,
                other => return Err(Error::ModelFormat(format!("bad bootstrap `{other}`"))),
            };
            let aggregation = Aggregation::from_name(&lines.key_value("aggregation")?)
                .map_err(|e| Error::ModelFormat(e.to_string()))?;
            let tree_config = read_tree_config(&mut lines)?;

            let mut trees = Vec::with_capacity(n_estimators);
            let mut tree_seeds = Vec::with_capacity(n_estimators);
            for i in 0..n_estimators {
                let line = lines.next()?.to_string();
                let tokens: Vec<&str> = line.split_whitespace().collect();
                if tokens.len() != 6 || tokens[0] != "tree" || tokens[2] != "seed" || tokens[4] != "nodes" {
                    return Err(Error::ModelFormat(format!("bad tree header `{line}`")));
                }
                let idx: usize = tokens[1]
                    .parse()
                    .map_err(|_| Error::ModelFormat("bad tree index".into()))?;
                if idx != i {
                    return Err(Error::ModelFormat(format!("tree {idx} out of order")));
                }
                let seed: u64 = tokens[3]
                    .parse()
                    .map_err(|_| Error::ModelFormat("bad tree seed".into()))?;
                let n_nodes: usize = tokens[5]
                    .parse()
                    .map_err(|_| Error::ModelFormat("bad node count".into()))?;
                let nodes = read_nodes(&mut lines, n_nodes, target_dim)?;
                tree_seeds.push(seed);
                trees.push(DecisionTreeModel {
                    nodes,
                    config: tree_config.clone(),
                    target_dim,
                    n_features,
                });
            }
            expect_end(&mut lines)?;
            Ok(Model::Forest(ForestModel {
                trees,
                tree_seeds,
                config: ForestConfig {
                    n_estimators,
                    tree: tree_config,
                    master_seed,
                    max_features,
                    bootstrap,
                    aggregation,
                },
                target_dim,
                n_features,
            }))
        }
        "knn" => {
            let target_dim = lines.parse_usize("target_dim")?;
            let n_features = lines.parse_usize("n_features")?;
            let k = lines.parse_usize("k")?;
            let aggregation = Aggregation::from_name(&lines.key_value("aggregation")?)
                .map_err(|e| Error::ModelFormat(e.to_string()))?;
            let n_train = lines.parse_usize("n_train")?;
            let mut x = DMatrix::zeros(n_train, n_features);
            let mut y = DMatrix::zeros(n_train, target_dim);
            for i in 0..n_train {
                let line = lines.next()?.to_string();
                let tokens: Vec<&str> = line.split_whitespace().collect();
                if tokens.len() != 1 + n_features + target_dim || tokens[0] != "sample" {
                    return Err(Error::ModelFormat(format!("bad sample line `{line}`")));
                }
                for j in 0..n_features {
                    x[(i, j)] = parse_float(tokens[1 + j])?;
                }
                for d in 0..target_dim {
                    y[(i, d)] = parse_float(tokens[1 + n_features + d])?;
                }
            }
            expect_end(&mut lines)?;
            let model = KnnModel::from_parts(KnnConfig { k, aggregation }, x, y)?;
            Ok(Model::Knn(model))
        }
        other => Err(Error::ModelFormat(format!("unknown model kind `{other}`"))),
    }
}

fn parse_max_features(raw: &str) -> Result<MaxFeatures> {
    let tokens: Vec<&str> = raw.split_whitespace().collect();
    match tokens.as_slice() {
        ["all"] => Ok(MaxFeatures::All),
        ["count", c] => Ok(MaxFeatures::Count(
            c.parse()
                .map_err(|_| Error::ModelFormat("bad max_features count".into()))?,
        )),
        ["fraction", f] => Ok(MaxFeatures::Fraction(parse_float(f)?)),
        _ => Err(Error::ModelFormat(format!("bad max_features `{raw}`"))),
    }
}

fn read_tree_config(lines: &mut Lines<impl BufRead>) -> Result<TreeConfig> {
    let depth_raw = lines.key_value("max_depth")?;
    let max_depth = if depth_raw == "none" {
        None
    } else {
        Some(
            depth_raw
                .parse()
                .map_err(|_| Error::ModelFormat(format!("bad max_depth `{depth_raw}`")))?,
        )
    };
    Ok(TreeConfig {
        max_depth,
        min_samples_split: lines.parse_usize("min_samples_split")?,
        min_samples_leaf: lines.parse_usize("min_samples_leaf")?,
    })
}

fn read_nodes(lines: &mut Lines<impl BufRead>, n_nodes: usize, target_dim: usize) -> Result<Vec<Node>> {
    let mut nodes = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let line = lines.next()?.to_string();
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 3 || tokens[0] != "node" {
            return Err(Error::ModelFormat(format!("bad node line `{line}`")));
        }
        let idx: usize = tokens[1]
            .parse()
            .map_err(|_| Error::ModelFormat("bad node index".into()))?;
        if idx != i {
            return Err(Error::ModelFormat(format!("node {idx} out of order")));
        }
        match tokens[2] {
            "split" => {
                if tokens.len() != 7 {
                    return Err(Error::ModelFormat(format!("bad split line `{line}`")));
                }
                nodes.push(Node::Split {
                    feature: tokens[3]
                        .parse()
                        .map_err(|_| Error::ModelFormat("bad feature index".into()))?,
                    threshold: parse_float(tokens[4])?,
                    left: tokens[5]
                        .parse()
                        .map_err(|_| Error::ModelFormat("bad child index".into()))?,
                    right: tokens[6]
                        .parse()
                        .map_err(|_| Error::ModelFormat("bad child index".into()))?,
                });
            }
            "leaf" => {
                if tokens.len() != 4 + target_dim {
                    return Err(Error::ModelFormat(format!("bad leaf line `{line}`")));
                }
                let n_samples: usize = tokens[3]
                    .parse()
                    .map_err(|_| Error::ModelFormat("bad leaf count".into()))?;
                let mut value = Vec::with_capacity(target_dim);
                for t in &tokens[4..] {
                    value.push(parse_float(t)?);
                }
                nodes.push(Node::Leaf { value, n_samples });
            }
            other => return Err(Error::ModelFormat(format!("unknown node kind `{other}`"))),
        }
    }
    // Child indices must stay inside the node list.
    for node in &nodes {
        if let Node::Split { left, right, .. } = node {
            if *left >= n_nodes || *right >= n_nodes {
                return Err(Error::ModelFormat("child index out of range".into()));
            }
        }
    }
    Ok(nodes)
}

fn expect_end(lines: &mut Lines<impl BufRead>) -> Result<()> {
    let line = lines.next()?;
    if line != "end" {
        return Err(Error::ModelFormat(format!("expected `end`, got `{line}`")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{fit_forest, fit_knn, fit_tree};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn probe_matches(a: &Model, b: &Model, probe: &DMatrix<f64>) {
        let pa = a.predict(probe).unwrap();
        let pb = b.predict(probe).unwrap();
        for (u, v) in pa.iter().zip(pb.iter()) {
            assert_eq!(u.to_bits(), v.to_bits());
        }
    }

    fn round_trip(model: &Model) -> Model {
        let mut buf = Vec::new();
        write_model(model, &mut buf).unwrap();
        read_model(std::io::Cursor::new(buf)).unwrap()
    }

    #[test]
    fn tree_round_trip_predicts_identically() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = DMatrix::<f64>::from_fn(30, 3, |_, _| rng.gen_range(-1.0e3..1.0e3));
        let y = DMatrix::from_fn(30, 1, |i, _| x[(i, 0)] / 3.0 + x[(i, 2)].sin());
        let tree = Model::Tree(fit_tree(&x, &y, &TreeConfig::default()).unwrap());
        let probe = DMatrix::from_fn(10, 3, |_, _| rng.gen_range(-1.0e3..1.0e3));
        probe_matches(&tree, &round_trip(&tree), &probe);
    }

    #[test]
    fn forest_round_trip_predicts_identically() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = DMatrix::from_fn(40, 2, |_, _| rng.gen_range(0.0..1.0));
        let y = DMatrix::from_fn(40, 3, |i, k| x[(i, 0)] * (k as f64 + 1.0) + x[(i, 1)]);
        let config = ForestConfig {
            n_estimators: 7,
            master_seed: 11,
            max_features: MaxFeatures::Fraction(0.5),
            ..ForestConfig::default()
        };
        let forest = Model::Forest(fit_forest(&x, &y, &config).unwrap());
        let probe = DMatrix::from_fn(9, 2, |_, _| rng.gen_range(0.0..1.0));
        let loaded = round_trip(&forest);
        probe_matches(&forest, &loaded, &probe);
        match (forest, loaded) {
            (Model::Forest(a), Model::Forest(b)) => {
                assert_eq!(a.tree_seeds, b.tree_seeds);
                assert_eq!(a.config.max_features, b.config.max_features);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn knn_round_trip_predicts_identically() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = DMatrix::from_fn(20, 4, |_, _| rng.gen_range(-5.0..5.0));
        let y = DMatrix::from_fn(20, 1, |i, _| x[(i, 1)] * 0.25);
        let knn = Model::Knn(fit_knn(&x, &y, &KnnConfig::default()).unwrap());
        let probe = DMatrix::from_fn(6, 4, |_, _| rng.gen_range(-5.0..5.0));
        probe_matches(&knn, &round_trip(&knn), &probe);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let mut buf = Vec::new();
        let x = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let y = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let tree = Model::Tree(fit_tree(&x, &y, &TreeConfig::default()).unwrap());
        write_model(&tree, &mut buf).unwrap();
        buf.truncate(buf.len() / 2);
        assert!(read_model(std::io::Cursor::new(buf)).is_err());
    }

    #[test]
    fn wrong_header_is_rejected() {
        let err = read_model(std::io::Cursor::new(b"not-a-model\n".to_vec())).unwrap_err();
        assert!(matches!(err, Error::ModelFormat(_)));
    }
}
