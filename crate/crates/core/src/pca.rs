//! Principal-component analysis on the feature covariance matrix.
//!
//! The decomposition is computed on the p×p population covariance of the
//! centered data (p is small here), so the fit is exact and deterministic.
//! Components are sorted by descending explained variance; the sign of each
//! component is fixed so its largest-magnitude entry is positive, keeping
//! golden files stable.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct PcaModel {
    /// Per-feature mean of the fitted data (length p).
    pub mean: DVector<f64>,
    /// k×p matrix with orthonormal rows.
    pub components: DMatrix<f64>,
    /// Eigenvalues of the covariance matching the rows, non-increasing.
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.components.ncols()
    }

    /// Fraction of total variance captured by each component.
    pub fn explained_variance_ratio(&self, total_variance: f64) -> Vec<f64> {
        self.explained_variance
            .iter()
            .map(|&v| if total_variance > 0.0 { v / total_variance } else { 0.0 })
            .collect()
    }
}

/// Fit a PCA with `k` components on an n×p matrix. Requires `n ≥ 2` and
/// `1 ≤ k ≤ min(n−1, p)`.
pub fn fit_pca(matrix: &DMatrix<f64>, k: usize) -> Result<PcaModel> {
    let (n, p) = matrix.shape();
    if n < 2 {
        return Err(Error::invalid("PCA needs at least 2 rows"));
    }
    let k_max = p.min(n - 1);
    if k == 0 || k > k_max {
        return Err(Error::invalid(format!(
            "component count {k} out of range 1..={k_max}"
        )));
    }

    let mean = DVector::from_fn(p, |j, _| matrix.column(j).sum() / n as f64);
    let mut centered = matrix.clone();
    for j in 0..p {
        for i in 0..n {
            centered[(i, j)] -= mean[j];
        }
    }
    // Population covariance.
    let cov = centered.transpose() * &centered / n as f64;
    let eigen = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));

    let mut components = DMatrix::zeros(k, p);
    let mut explained = Vec::with_capacity(k);
    for (row, &src) in order.iter().take(k).enumerate() {
        explained.push(eigen.eigenvalues[src].max(0.0));
        let col = eigen.eigenvectors.column(src);
        // Sign convention: largest-magnitude entry positive.
        let mut arg = 0;
        for j in 1..p {
            if col[j].abs() > col[arg].abs() {
                arg = j;
            }
        }
        let sign = if col[arg] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..p {
            components[(row, j)] = sign * col[j];
        }
    }

    Ok(PcaModel {
        mean,
        components,
        explained_variance: explained,
    })
}

/// Project rows onto the component basis: `(X − mean)·componentsᵀ`.
pub fn project(model: &PcaModel, matrix: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if matrix.ncols() != model.n_features() {
        return Err(Error::shape(format!(
            "model has {} features, matrix has {} columns",
            model.n_features(),
            matrix.ncols()
        )));
    }
    let (n, p) = matrix.shape();
    let mut centered = matrix.clone();
    for j in 0..p {
        for i in 0..n {
            centered[(i, j)] -= model.mean[j];
        }
    }
    Ok(centered * model.components.transpose())
}

/// Map scores back to feature space: `scores·components + mean`.
pub fn reconstruct(model: &PcaModel, scores: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if scores.ncols() != model.n_components() {
        return Err(Error::shape(format!(
            "model has {} components, scores have {} columns",
            model.n_components(),
            scores.ncols()
        )));
    }
    let mut out = scores * &model.components;
    let (n, p) = out.shape();
    for j in 0..p {
        for i in 0..n {
            out[(i, j)] += model.mean[j];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rank_one_line_has_diagonal_first_component() {
        let m = DMatrix::from_row_slice(4, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0, -1.0, -1.0]);
        let model = fit_pca(&m, 1).unwrap();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(model.components[(0, 0)], inv_sqrt2, epsilon = 1e-12);
        assert_relative_eq!(model.components[(0, 1)], inv_sqrt2, epsilon = 1e-12);

        let total = model.explained_variance[0];
        assert_relative_eq!(model.explained_variance_ratio(total)[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hand_computed_two_by_two_eigenvalues() {
        // Column variances (population): 0.5 and 2 → eigenvalues {2, 0.5}.
        let m = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 2.0, 0.0, -2.0]);
        let model = fit_pca(&m, 2).unwrap();
        assert!((model.explained_variance[0] - 2.0).abs() < 1e-12);
        assert!((model.explained_variance[1] - 0.5).abs() < 1e-12);
        assert_relative_eq!(model.components[(0, 0)], 0.0, epsilon = 1e-12);
        assert_relative_eq!(model.components[(0, 1)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn full_rank_reconstruction_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let m = DMatrix::from_fn(12, 4, |_, _| rng.gen_range(-3.0..3.0));
        let model = fit_pca(&m, 4).unwrap();
        let back = reconstruct(&model, &project(&model, &m).unwrap()).unwrap();
        for (a, b) in m.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn projecting_the_mean_gives_zero_scores() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let m = DMatrix::from_fn(9, 3, |_, _| rng.gen_range(0.0..10.0));
        let model = fit_pca(&m, 2).unwrap();
        let mean_row = DMatrix::from_fn(1, 3, |_, j| model.mean[j]);
        let score = project(&model, &mean_row).unwrap();
        for &v in score.as_slice() {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn projection_contracts_row_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let m = DMatrix::from_fn(20, 5, |_, _| rng.gen_range(-1.0..1.0));
        let model = fit_pca(&m, 3).unwrap();
        let scores = project(&model, &m).unwrap();
        for i in 0..20 {
            let centered_norm: f64 = (0..5)
                .map(|j| (m[(i, j)] - model.mean[j]).powi(2))
                .sum::<f64>()
                .sqrt();
            let score_norm: f64 = (0..3).map(|j| scores[(i, j)].powi(2)).sum::<f64>().sqrt();
            assert!(score_norm <= centered_norm + 1e-9);
        }
    }

    #[test]
    fn components_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let m = DMatrix::from_fn(30, 6, |_, _| rng.gen_range(-2.0..2.0));
        let model = fit_pca(&m, 4).unwrap();
        let gram = &model.components * model.components.transpose();
        for a in 0..4 {
            for b in 0..4 {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((gram[(a, b)] - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn scores_have_zero_mean_and_diagonal_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let n = 100;
        let m = DMatrix::from_fn(n, 4, |_, j| rng.gen_range(-1.0..1.0) * (j as f64 + 1.0));
        let model = fit_pca(&m, 4).unwrap();
        let scores = project(&model, &m).unwrap();
        for a in 0..4 {
            let mean: f64 = scores.column(a).sum() / n as f64;
            assert!(mean.abs() < 1e-9);
        }
        for a in 0..4 {
            for b in 0..4 {
                let cov: f64 = (0..n).map(|i| scores[(i, a)] * scores[(i, b)]).sum::<f64>() / n as f64;
                let expect = if a == b { model.explained_variance[a] } else { 0.0 };
                assert!((cov - expect).abs() < 1e-6, "cov[{a},{b}] = {cov}, expect {expect}");
            }
        }
    }

    #[test]
    fn explained_variance_sums_to_total_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let n = 50;
        let m = DMatrix::from_fn(n, 5, |_, _| rng.gen_range(-4.0..4.0));
        let model = fit_pca(&m, 5).unwrap();
        let mut total = 0.0;
        for j in 0..5 {
            let mu = m.column(j).sum() / n as f64;
            total += m.column(j).iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n as f64;
        }
        let sum: f64 = model.explained_variance.iter().sum();
        assert!((sum - total).abs() < 1e-9);
    }

    #[test]
    fn fit_is_bit_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let m = DMatrix::from_fn(25, 4, |_, _| rng.gen_range(-1.0..1.0));
        let a = fit_pca(&m, 3).unwrap();
        let b = fit_pca(&m, 3).unwrap();
        assert_eq!(a.components, b.components);
        for (x, y) in a.explained_variance.iter().zip(&b.explained_variance) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn component_count_bounds_are_enforced() {
        let m = DMatrix::zeros(3, 5);
        assert!(fit_pca(&m, 0).is_err());
        assert!(fit_pca(&m, 3).is_err()); // k ≤ n−1 = 2
        let tall = DMatrix::zeros(10, 2);
        assert!(fit_pca(&tall, 3).is_err()); // k ≤ p = 2
    }
}
