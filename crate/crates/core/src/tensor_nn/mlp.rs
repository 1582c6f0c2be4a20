use rand::Rng;

use super::matrix::{gemm_view, DenseMatrix, Op, Real, View};
use crate::rng::{stream, stream_rng};
use crate::{Error, Result};

/// ReLU feedforward network `W_L·ReLU(W_{L-1}···ReLU(W_1 x + b_1)···) + b_L`.
///
/// All parameters live in one buffer; layer `l` maps `dims[l] → dims[l+1]`
/// and stores its weight (`dims[l+1] × dims[l]`, row-major) followed by its
/// bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    dims: Vec<usize>,
    offsets: Vec<usize>,
    params: Vec<T>,
}

/// Intermediate values kept by [`Mlp::forward_cached`] for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    /// `acts[0]` is the input; `acts[l]` the (post-ReLU) output of layer `l`
    /// for hidden layers and the affine output for the last one.
    acts: Vec<DenseMatrix<T>>,
}

impl<T: Real> ForwardCache<T> {
    pub fn output(&self) -> &DenseMatrix<T> {
        self.acts.last().expect("cache holds the input at least")
    }
}

fn layout(dims: &[usize]) -> (Vec<usize>, usize) {
    let mut offsets = Vec::with_capacity(dims.len());
    let mut total = 0;
    for w in dims.windows(2) {
        offsets.push(total);
        total += w[0] * w[1] + w[1];
    }
    (offsets, total)
}

impl<T: Real> Mlp<T> {
    /// He-uniform initialisation (`U(±sqrt(6/fan_in))`), zero biases.
    pub fn init(dims: &[usize], seed: u64) -> Result<Self> {
        let mut net = Self::zeros(dims)?;
        let mut rng = stream_rng(seed, &[stream::INIT]);
        for l in 0..net.num_layers() {
            let fan_in = dims[l];
            let bound = (6.0 / fan_in as f64).sqrt();
            let (w, _) = net.layer_mut(l);
            for v in w.iter_mut() {
                *v = T::of_f64(rng.random_range(-bound..bound));
            }
        }
        Ok(net)
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Config(format!(
                "network needs at least input and output dims, got {dims:?}"
            )));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::Config(format!("network dims must be positive, got {dims:?}")));
        }
        let (offsets, total) = layout(dims);
        Ok(Self {
            dims: dims.to_vec(),
            offsets,
            params: vec![T::zero(); total],
        })
    }

    /// Rebuilds a network from its dims and a flat parameter buffer.
    pub fn from_params(dims: &[usize], params: Vec<T>) -> Result<Self> {
        let mut net = Self::zeros(dims)?;
        if params.len() != net.params.len() {
            return Err(Error::Dimension(format!(
                "{} parameters for dims {dims:?} (expected {})",
                params.len(),
                net.params.len()
            )));
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("non-finite network parameter".into()));
        }
        net.params = params;
        Ok(net)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    /// Number of affine layers.
    pub fn num_layers(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    /// `(weight, bias)` slices of layer `l`.
    pub fn layer(&self, l: usize) -> (&[T], &[T]) {
        let (start, wlen, blen) = self.layer_span(l);
        let (w, b) = self.params[start..start + wlen + blen].split_at(wlen);
        (w, b)
    }

    pub fn layer_mut(&mut self, l: usize) -> (&mut [T], &mut [T]) {
        let (start, wlen, blen) = self.layer_span(l);
        self.params[start..start + wlen + blen].split_at_mut(wlen)
    }

    fn layer_span(&self, l: usize) -> (usize, usize, usize) {
        let (fan_in, fan_out) = (self.dims[l], self.dims[l + 1]);
        (self.offsets[l], fan_in * fan_out, fan_out)
    }

    /// Overwrites layer `l`; `weight` is row-major `out × in`.
    pub fn set_layer(&mut self, l: usize, weight: &[T], bias: &[T]) -> Result<()> {
        if l >= self.num_layers() {
            return Err(Error::Dimension(format!("no layer {l}")));
        }
        let (w, b) = self.layer_mut(l);
        if weight.len() != w.len() || bias.len() != b.len() {
            return Err(Error::Dimension(format!(
                "layer {l} expects {} weights and {} biases",
                w.len(),
                b.len()
            )));
        }
        w.copy_from_slice(weight);
        b.copy_from_slice(bias);
        Ok(())
    }

    fn check_input(&self, x: &DenseMatrix<T>) -> Result<()> {
        if x.cols() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "input has {} columns, network expects {}",
                x.cols(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    fn affine(&self, l: usize, x: &DenseMatrix<T>) -> DenseMatrix<T> {
        let (fan_in, fan_out) = (self.dims[l], self.dims[l + 1]);
        let (w, b) = self.layer(l);
        let mut z = DenseMatrix::zeros(x.rows(), fan_out);
        for r in 0..x.rows() {
            z.row_mut(r).copy_from_slice(b);
        }
        gemm_view(
            T::one(),
            View::of(x, Op::N),
            View::new(w, fan_out, fan_in, Op::T),
            T::one(),
            z.as_mut_slice(),
        );
        z
    }

    /// Batched forward pass; rows of `x` are independent samples.
    pub fn forward(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        self.check_input(x)?;
        let mut h = self.affine(0, x);
        for l in 1..self.num_layers() {
            relu_in_place(&mut h);
            h = self.affine(l, &h);
        }
        Ok(h)
    }

    pub fn forward_vec(&self, x: &[T]) -> Result<Vec<T>> {
        let m = DenseMatrix::from_vec(1, x.len(), x.to_vec())?;
        Ok(self.forward(&m)?.into_vec())
    }

    pub fn forward_cached(&self, x: &DenseMatrix<T>) -> Result<ForwardCache<T>> {
        self.check_input(x)?;
        let mut acts = Vec::with_capacity(self.dims.len());
        acts.push(x.clone());
        for l in 0..self.num_layers() {
            let mut z = self.affine(l, &acts[l]);
            if l + 1 < self.num_layers() {
                relu_in_place(&mut z);
            }
            acts.push(z);
        }
        Ok(ForwardCache { acts })
    }

    /// Reverse-mode pass. Adds `∂loss/∂θ` into `grads` (same layout as
    /// [`Mlp::params`]) given `d_out = ∂loss/∂output`, and returns
    /// `∂loss/∂input` when `want_input_grad` is set.
    pub fn backward(
        &self,
        cache: &ForwardCache<T>,
        d_out: &DenseMatrix<T>,
        grads: &mut [T],
        want_input_grad: bool,
    ) -> Option<DenseMatrix<T>> {
        assert_eq!(grads.len(), self.params.len());
        let mut dz = d_out.clone();
        for l in (0..self.num_layers()).rev() {
            let (fan_in, fan_out) = (self.dims[l], self.dims[l + 1]);
            let a_prev = &cache.acts[l];
            let (start, wlen, _) = self.layer_span(l);

            // dW += dZ^T · A_prev
            gemm_view(
                T::one(),
                View::of(&dz, Op::T),
                View::of(a_prev, Op::N),
                T::one(),
                &mut grads[start..start + wlen],
            );

            let db = &mut grads[start + wlen..start + wlen + fan_out];
            for r in 0..dz.rows() {
                for (g, v) in db.iter_mut().zip(dz.row(r)) {
                    *g = *g + *v;
                }
            }

            if l == 0 && !want_input_grad {
                return None;
            }
            let (w, _) = self.layer(l);
            let mut da = DenseMatrix::zeros(dz.rows(), fan_in);
            gemm_view(
                T::one(),
                View::of(&dz, Op::N),
                View::new(w, fan_out, fan_in, Op::N),
                T::zero(),
                da.as_mut_slice(),
            );
            if l == 0 {
                return Some(da);
            }
            // ReLU mask: the cached activation is positive exactly where the
            // pre-activation was.
            for (g, a) in da.as_mut_slice().iter_mut().zip(a_prev.as_slice()) {
                if *a <= T::zero() {
                    *g = T::zero();
                }
            }
            dz = da;
        }
        None
    }

    /// Converts the parameters to another float width.
    pub fn cast<U: Real>(&self) -> Mlp<U> {
        Mlp {
            dims: self.dims.clone(),
            offsets: self.offsets.clone(),
            params: self.params.iter().map(|v| U::of_f64(v.as_f64())).collect(),
        }
    }
}

pub(crate) fn relu_in_place<T: Real>(m: &mut DenseMatrix<T>) {
    for v in m.as_mut_slice() {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
}

/// `(1/B)·Σ_b Σ_j w_j (pred - target)²` and its derivative with respect to
/// `pred`. Missing weights mean `w_j = 1`.
pub fn weighted_squared_loss<T: Real>(
    pred: &DenseMatrix<T>,
    target: &DenseMatrix<T>,
    weights: Option<&[T]>,
) -> Result<(f64, DenseMatrix<T>)> {
    if pred.shape() != target.shape() {
        return Err(Error::Dimension(format!(
            "prediction {:?} vs target {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    if pred.rows() == 0 {
        return Err(Error::Empty("loss over an empty batch".into()));
    }
    if let Some(w) = weights {
        if w.len() != pred.cols() {
            return Err(Error::Dimension(format!(
                "{} loss weights for {} outputs",
                w.len(),
                pred.cols()
            )));
        }
    }
    let batch = pred.rows() as f64;
    let scale = T::of_f64(2.0 / batch);
    let mut grad = DenseMatrix::zeros(pred.rows(), pred.cols());
    let mut loss = 0.0f64;
    for r in 0..pred.rows() {
        let (p, t) = (pred.row(r), target.row(r));
        let g = grad.row_mut(r);
        for j in 0..p.len() {
            let diff = p[j] - t[j];
            let w = weights.map_or(T::one(), |w| w[j]);
            loss += (w * diff * diff).as_f64();
            g[j] = scale * w * diff;
        }
    }
    Ok((loss / batch, grad))
}

/// Loss of `net` on a batch together with the full parameter gradient.
pub fn mse_and_grad<T: Real>(
    net: &Mlp<T>,
    inputs: &DenseMatrix<T>,
    targets: &DenseMatrix<T>,
    sample_weights: Option<&[T]>,
) -> Result<(f64, Vec<T>)> {
    if inputs.rows() != targets.rows() {
        return Err(Error::Dimension(format!(
            "{} inputs vs {} targets",
            inputs.rows(),
            targets.rows()
        )));
    }
    if let Some(w) = sample_weights {
        if w.iter().any(|v| *v <= T::zero()) {
            return Err(Error::Config("loss weights must be positive".into()));
        }
    }
    let cache = net.forward_cached(inputs)?;
    let (loss, d_out) = weighted_squared_loss(cache.output(), targets, sample_weights)?;
    let mut grads = vec![T::zero(); net.num_params()];
    net.backward(&cache, &d_out, &mut grads, false);
    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: &[f64]) -> DenseMatrix<f64> {
        DenseMatrix::from_vec(1, v.len(), v.to_vec()).unwrap()
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let a = Mlp::<f64>::init(&[3, 1], 42).unwrap();
        let b = Mlp::<f64>::init(&[3, 1], 42).unwrap();
        let c = Mlp::<f64>::init(&[3, 1], 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let bound = (6.0f64 / 3.0).sqrt();
        let (w, bias) = a.layer(0);
        assert!(w.iter().all(|v| v.abs() <= bound));
        assert!(bias.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn reference_encoder_shape() {
        let dims = [512, 500, 500, 500, 500, 2];
        let net = Mlp::<f32>::init(&dims, 0).unwrap();
        assert_eq!(net.num_layers(), 5);
        assert_eq!(net.input_dim(), 512);
        assert_eq!(net.output_dim(), 2);
        assert_eq!(net.num_params(), 512 * 500 + 500 + 3 * (500 * 500 + 500) + 500 * 2 + 2);
    }

    #[test]
    fn rejects_bad_dims() {
        assert!(matches!(Mlp::<f64>::init(&[], 0), Err(Error::Config(_))));
        assert!(Mlp::<f64>::init(&[4], 0).is_err());
        assert!(Mlp::<f64>::init(&[4, 0, 1], 0).is_err());
    }

    #[test]
    fn identity_layer() {
        let mut net = Mlp::<f64>::zeros(&[2, 2]).unwrap();
        net.set_layer(0, &[1.0, 0.0, 0.0, 1.0], &[0.0, 0.0]).unwrap();
        assert_eq!(net.forward_vec(&[0.5, 2.0]).unwrap(), vec![0.5, 2.0]);
    }

    #[test]
    fn forward_examples() {
        let zero = Mlp::<f64>::zeros(&[3, 4, 2]).unwrap();
        let mut z = zero.clone();
        z.set_layer(1, &[0.0; 8], &[1.5, -2.0]).unwrap();
        assert_eq!(z.forward_vec(&[1.0, 2.0, 3.0]).unwrap(), vec![1.5, -2.0]);

        let mut affine = Mlp::<f64>::zeros(&[1, 1]).unwrap();
        affine.set_layer(0, &[2.0], &[1.0]).unwrap();
        assert_eq!(affine.forward_vec(&[3.0]).unwrap(), vec![7.0]);

        // identity hidden layer followed by identity output: ReLU(x)
        let mut relu = Mlp::<f64>::zeros(&[1, 1, 1]).unwrap();
        relu.set_layer(0, &[1.0], &[0.0]).unwrap();
        relu.set_layer(1, &[1.0], &[0.0]).unwrap();
        assert_eq!(relu.forward_vec(&[-1.0]).unwrap(), vec![0.0]);
        assert_eq!(relu.forward_vec(&[2.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let net = Mlp::<f64>::zeros(&[3, 2]).unwrap();
        assert!(matches!(net.forward(&row(&[1.0, 2.0])), Err(Error::Dimension(_))));
    }

    #[test]
    fn batch_rows_are_independent() {
        let net = Mlp::<f64>::init(&[3, 5, 2], 9).unwrap();
        let xs = [[0.1, -0.4, 2.0], [1.0, 1.0, -1.0]];
        let batch = DenseMatrix::from_rows(&xs).unwrap();
        let out = net.forward(&batch).unwrap();
        for (i, x) in xs.iter().enumerate() {
            assert_eq!(out.row(i), net.forward_vec(x).unwrap().as_slice());
        }
    }

    #[test]
    fn scalar_loss_and_gradient_by_hand() {
        let mut net = Mlp::<f64>::zeros(&[1, 1]).unwrap();
        net.set_layer(0, &[2.0], &[0.0]).unwrap();
        let (loss, g) = mse_and_grad(&net, &row(&[1.0]), &row(&[0.0]), None).unwrap();
        assert_eq!(loss, 4.0);
        assert_eq!(g, vec![4.0, 4.0]); // dL/dw = 2·(2-0)·1, dL/db = 2·(2-0)
    }

    #[test]
    fn perfect_fit_has_zero_loss_and_gradient() {
        let net = Mlp::<f64>::init(&[2, 3, 2], 5).unwrap();
        let x = DenseMatrix::from_rows(&[[0.3, -0.2], [1.0, 0.5]]).unwrap();
        let y = net.forward(&x).unwrap();
        let (loss, g) = mse_and_grad(&net, &x, &y, None).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_batch_is_an_error() {
        let net = Mlp::<f64>::zeros(&[2, 1]).unwrap();
        let x = DenseMatrix::zeros(0, 2);
        let y = DenseMatrix::zeros(0, 1);
        assert!(matches!(mse_and_grad(&net, &x, &y, None), Err(Error::Empty(_))));
    }

    #[test]
    fn uniform_weights_scale_the_loss() {
        let net = Mlp::<f64>::init(&[3, 4, 5], 1).unwrap();
        let x = DenseMatrix::from_rows(&[[0.3, -0.2, 0.9], [1.0, 0.5, -0.1]]).unwrap();
        let y = DenseMatrix::from_rows(&[[1.0, 0.0, -1.0, 0.5, 2.0], [0.0, 0.0, 0.0, 0.0, 0.0]]).unwrap();
        let w = 0.25;
        let (plain, _) = mse_and_grad(&net, &x, &y, None).unwrap();
        let (weighted, _) = mse_and_grad(&net, &x, &y, Some(&[w; 5])).unwrap();
        assert_eq!(weighted, w * plain);
    }

    #[test]
    fn relu_positive_homogeneity_without_biases() {
        let net = Mlp::<f64>::init(&[4, 6, 6, 3], 77).unwrap();
        let x = [0.2, -1.3, 0.7, 2.2];
        let base = net.forward_vec(&x).unwrap();
        for alpha in [0.5, 3.0, 17.25] {
            let scaled: Vec<f64> = x.iter().map(|v| v * alpha).collect();
            let out = net.forward_vec(&scaled).unwrap();
            for (o, b) in out.iter().zip(&base) {
                assert!((o - alpha * b).abs() <= 1e-12 * (1.0 + o.abs()));
            }
        }
    }
}
