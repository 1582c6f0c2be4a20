use nalgebra::DMatrix;

use crate::tensor_nn::{matmul, DenseMatrix, Op};
use crate::{Error, Result};

/// Principal subspace of a data matrix (rows are samples).
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: Vec<f64>,
    /// `D × d`, orthonormal columns.
    components: DenseMatrix<f64>,
    /// Variances along the components, nonincreasing.
    eigenvalues: Vec<f64>,
    /// Every singular value of the centred data, nonincreasing.
    singular_values: Vec<f64>,
    n_samples: usize,
}

fn orthonormalize_columns(m: &mut DenseMatrix<f64>) {
    let (rows, cols) = m.shape();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cols);
    let mut next_unit = 0;
    for j in 0..cols {
        let mut v: Vec<f64> = (0..rows).map(|i| m.get(i, j)).collect();
        loop {
            for _ in 0..2 {
                for b in &basis {
                    let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                    v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-8 {
                v.iter_mut().for_each(|x| *x /= norm);
                break;
            }
            // degenerate direction: try the next coordinate axis instead
            v = vec![0.0; rows];
            v[next_unit % rows] = 1.0;
            next_unit += 1;
        }
        for (i, x) in v.iter().enumerate() {
            m.set(i, j, *x);
        }
        basis.push(v);
    }
}

/// Mean-centred SVD keeping the top `d` right singular vectors. Directions
/// beyond the rank of the data are completed to an orthonormal set with zero
/// variance.
pub fn fit_pca(data: &DenseMatrix<f64>, d: usize) -> Result<PcaModel> {
    let (n, dim) = data.shape();
    if n < 2 {
        return Err(Error::Config(format!("PCA needs at least 2 samples, got {n}")));
    }
    if d == 0 || d > n.min(dim) {
        return Err(Error::Config(format!(
            "PCA dimension {d} must lie in 1..={}",
            n.min(dim)
        )));
    }
    let mut mean = vec![0.0; dim];
    for row in data.iter_rows() {
        mean.iter_mut().zip(row).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centred = DMatrix::from_fn(n, dim, |i, j| data.get(i, j) - mean[j]);
    let svd = centred.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Config("SVD did not produce right singular vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();

    let mut components = DenseMatrix::zeros(dim, d);
    for (c, &k) in order.iter().take(d).enumerate() {
        for i in 0..dim {
            components.set(i, c, v_t[(k, i)]);
        }
    }
    orthonormalize_columns(&mut components);
    let eigenvalues = singular_values
        .iter()
        .take(d)
        .map(|s| s * s / (n - 1) as f64)
        .collect();
    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
        singular_values,
        n_samples: n,
    })
}

impl PcaModel {
    pub(crate) fn from_parts(
        mean: Vec<f64>,
        components: DenseMatrix<f64>,
        eigenvalues: Vec<f64>,
        singular_values: Vec<f64>,
        n_samples: usize,
    ) -> Result<Self> {
        let (dim, d) = components.shape();
        if mean.len() != dim || eigenvalues.len() != d || singular_values.len() < d {
            return Err(Error::Dimension(format!(
                "PCA parts: mean {}, components {dim}x{d}, {} eigenvalues, {} singular values",
                mean.len(),
                eigenvalues.len(),
                singular_values.len()
            )));
        }
        Ok(Self {
            mean,
            components,
            eigenvalues,
            singular_values,
            n_samples,
        })
    }

    pub fn dim(&self) -> usize {
        self.components.cols()
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn components(&self) -> &DenseMatrix<f64> {
        &self.components
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Variances of every direction (captured and discarded).
    pub fn full_spectrum(&self) -> Vec<f64> {
        let denom = (self.n_samples - 1) as f64;
        self.singular_values.iter().map(|s| s * s / denom).collect()
    }

    /// The same model keeping only the leading `d` components.
    pub fn truncated(&self, d: usize) -> Result<Self> {
        if d == 0 || d > self.dim() {
            return Err(Error::Config(format!("cannot truncate {} components to {d}", self.dim())));
        }
        let idx: Vec<usize> = (0..d).collect();
        let components = self.components.transpose().select_rows(&idx).transpose();
        Ok(Self {
            mean: self.mean.clone(),
            components,
            eigenvalues: self.eigenvalues[..d].to_vec(),
            singular_values: self.singular_values.clone(),
            n_samples: self.n_samples,
        })
    }

    fn check_cols(&self, m: &DenseMatrix<f64>, expected: usize, what: &str) -> Result<()> {
        if m.cols() != expected {
            return Err(Error::Dimension(format!("{what}: {} columns, expected {expected}", m.cols())));
        }
        Ok(())
    }

    /// `(u − mean)·C` row by row.
    pub fn encode_batch(&self, u: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
        self.check_cols(u, self.input_dim(), "PCA encode")?;
        let mut centred = u.clone();
        for r in 0..centred.rows() {
            centred.row_mut(r).iter_mut().zip(&self.mean).for_each(|(x, m)| *x -= m);
        }
        Ok(matmul(&centred, Op::N, &self.components, Op::N))
    }

    /// `mean + z·Cᵀ` row by row.
    pub fn decode_batch(&self, z: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
        self.check_cols(z, self.dim(), "PCA decode")?;
        let mut out = matmul(z, Op::N, &self.components, Op::T);
        for r in 0..out.rows() {
            out.row_mut(r).iter_mut().zip(&self.mean).for_each(|(x, m)| *x += m);
        }
        Ok(out)
    }

    pub fn encode(&self, u: &[f64]) -> Result<Vec<f64>> {
        let m = DenseMatrix::from_vec(1, u.len(), u.to_vec())?;
        Ok(self.encode_batch(&m)?.into_vec())
    }

    pub fn decode(&self, z: &[f64]) -> Result<Vec<f64>> {
        let m = DenseMatrix::from_vec(1, z.len(), z.to_vec())?;
        Ok(self.decode_batch(&m)?.into_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn plane_data(n: usize) -> DenseMatrix<f64> {
        let mut rng = crate::rng::stream_rng(4, &[]);
        let a = [1.0, 2.0, 0.0, -1.0, 0.5];
        let b = [0.0, 1.0, 1.0, 1.0, -2.0];
        let mean = [3.0, -1.0, 0.5, 0.0, 2.0];
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let (s, t): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                (0..5).map(|j| mean[j] + s * a[j] + t * b[j]).collect()
            })
            .collect();
        DenseMatrix::from_rows(&rows).unwrap()
    }

    fn max_diff(a: &DenseMatrix<f64>, b: &DenseMatrix<f64>) -> f64 {
        a.as_slice().iter().zip(b.as_slice()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn exact_on_a_plane() {
        let x = plane_data(50);
        let pca = fit_pca(&x, 2).unwrap();
        let back = pca.decode_batch(&pca.encode_batch(&x).unwrap()).unwrap();
        assert!(max_diff(&x, &back) < 1e-10);
        assert!(pca.singular_values()[2] < 1e-10);
    }

    #[test]
    fn components_are_orthonormal_and_sorted() {
        let x = plane_data(30);
        // rank 2 data, ask for 5: completion needed
        let pca = fit_pca(&x, 5).unwrap();
        let c = pca.components();
        let g = matmul(c, Op::T, c, Op::N);
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g.get(i, j) - want).abs() < 1e-10);
            }
        }
        assert!(pca.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
        assert!(pca.eigenvalues().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn mean_maps_to_origin() {
        let x = plane_data(20);
        let pca = fit_pca(&x, 2).unwrap();
        let z = pca.encode(pca.mean()).unwrap();
        assert!(z.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn isotropic_eigenvalues_are_close() {
        let mut rng = crate::rng::stream_rng(8, &[]);
        let rows: Vec<Vec<f64>> = (0..5000)
            .map(|_| (0..4).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let pca = fit_pca(&DenseMatrix::from_rows(&rows).unwrap(), 4).unwrap();
        for e in pca.eigenvalues() {
            assert!((e - 1.0).abs() < 0.1, "{e}");
        }
    }

    #[test]
    fn residual_equals_discarded_variance() {
        let mut rng = crate::rng::stream_rng(9, &[]);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..12).map(|j| Distribution::<f64>::sample(&StandardNormal, &mut rng) * (1.0 + j as f64)).collect::<Vec<f64>>())
            .collect();
        let x = DenseMatrix::from_rows(&rows).unwrap();
        for d in [1, 3, 7] {
            let pca = fit_pca(&x, d).unwrap();
            let back = pca.decode_batch(&pca.encode_batch(&x).unwrap()).unwrap();
            let resid: f64 = x.as_slice().iter().zip(back.as_slice()).map(|(a, b)| (a - b).powi(2)).sum();
            let discarded: f64 = pca.full_spectrum()[d..].iter().sum::<f64>() * 39.0;
            assert!((resid - discarded).abs() <= 1e-8 * discarded, "d={d}: {resid} vs {discarded}");
        }
    }

    #[test]
    fn truncation_matches_refit() {
        let x = plane_data(25);
        let a = fit_pca(&x, 4).unwrap().truncated(2).unwrap();
        let b = fit_pca(&x, 2).unwrap();
        assert!(max_diff(&a.components().map(|v| v.abs()), &b.components().map(|v| v.abs())) < 1e-10);
    }

    #[test]
    fn bad_requests() {
        let x = plane_data(5);
        assert!(fit_pca(&x, 0).is_err());
        assert!(fit_pca(&x, 6).is_err());
        assert!(fit_pca(&x.select_rows(&[0]), 1).is_err());
        let pca = fit_pca(&x, 2).unwrap();
        assert!(pca.encode(&[1.0, 2.0]).is_err());
        assert!(pca.decode(&[1.0]).is_err());
    }
}
