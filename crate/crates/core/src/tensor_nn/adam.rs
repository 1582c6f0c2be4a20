use super::matrix::Real;
use crate::{Error, Result};

/// Adam moments for a list of parameter blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub m: Vec<Vec<T>>,
    pub v: Vec<Vec<T>>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl<T: Real> AdamState<T> {
    /// Fresh state with zero moments shaped like `block_sizes`.
    pub fn new(block_sizes: &[usize]) -> Self {
        Self {
            m: block_sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
            v: block_sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One bias-corrected Adam update over every block.
pub fn adam_step<T: Real>(
    params: &mut [&mut [T]],
    grads: &[Vec<T>],
    state: &mut AdamState<T>,
    lr: f64,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::Dimension(format!(
            "{} parameter blocks, {} gradient blocks, {} moment blocks",
            params.len(),
            grads.len(),
            state.m.len()
        )));
    }
    for (i, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.len() != g.len() || p.len() != state.m[i].len() {
            return Err(Error::Dimension(format!(
                "block {i}: {} parameters, {} gradients, {} moments",
                p.len(),
                g.len(),
                state.m[i].len()
            )));
        }
    }
    state.t += 1;
    let t = state.t as i32;
    let b1 = T::of_f64(state.beta1);
    let b2 = T::of_f64(state.beta2);
    let one = T::one();
    let c1 = T::of_f64(1.0 / (1.0 - state.beta1.powi(t)));
    let c2 = T::of_f64(1.0 / (1.0 - state.beta2.powi(t)));
    let lr = T::of_f64(lr);
    let eps = T::of_f64(state.eps);
    let tiny = T::min_positive_value();
    // subnormal moments of inactive units are flushed to zero; they are
    // orders of magnitude too small to move a weight but slow every step
    let flush = |x: T| if x.abs() < tiny { T::zero() } else { x };
    for (i, p) in params.iter_mut().enumerate() {
        let (m, v) = (&mut state.m[i], &mut state.v[i]);
        for (((w, &g), mi), vi) in p.iter_mut().zip(&grads[i]).zip(m.iter_mut()).zip(v.iter_mut()) {
            *mi = flush(b1 * *mi + (one - b1) * g);
            *vi = flush(b2 * *vi + (one - b2) * g * g);
            let m_hat = *mi * c1;
            let v_hat = *vi * c2;
            *w = *w - lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut p = vec![1.0f64, -2.0];
        let mut s = AdamState::<f64>::new(&[2]);
        adam_step(&mut [&mut p[..]], &[vec![0.0, 0.0]], &mut s, 1e-3).unwrap();
        assert_eq!(p, vec![1.0, -2.0]);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // m̂ = g, v̂ = g², so the step is lr·g/(|g| + eps)
        let mut p = vec![1.0f64];
        let mut s = AdamState::<f64>::new(&[1]);
        adam_step(&mut [&mut p[..]], &[vec![2.0]], &mut s, 1e-3).unwrap();
        let expected = 1.0 - 1e-3 * 2.0 / (2.0 + 1e-8);
        assert!((p[0] - expected).abs() < 1e-15);
        assert!((p[0] - 0.999).abs() < 1e-9);
    }

    #[test]
    fn constant_gradient_moves_monotonically() {
        let mut p = vec![0.0f64];
        let mut s = AdamState::<f64>::new(&[1]);
        let mut prev = p[0];
        for _ in 0..5 {
            adam_step(&mut [&mut p[..]], &[vec![-0.5]], &mut s, 1e-2).unwrap();
            assert!(p[0] > prev);
            prev = p[0];
        }
    }

    #[test]
    fn shape_mismatch() {
        let mut p = vec![0.0f64; 3];
        let mut s = AdamState::<f64>::new(&[2]);
        assert!(adam_step(&mut [&mut p[..]], &[vec![0.0; 3]], &mut s, 1e-3).is_err());
    }
}
