use aenet::rng::stream_rng;
use aenet::tensor_nn::{
    load_mlp, matmul, read_loss_history, save_mlp, train, weighted_squared_loss, write_loss_history, DenseMatrix,
    Mlp, Op, TrainConfig,
};
use rand::Rng;

fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DenseMatrix<f64> {
    DenseMatrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn jittered_net<R: Rng>(dims: &[usize], seed: u64, rng: &mut R) -> Mlp<f64> {
    let mut net = Mlp::<f64>::init(dims, seed).unwrap();
    for p in net.params_mut() {
        *p += rng.random_range(-0.3..0.3);
    }
    net
}

#[test]
fn parameter_gradients_match_central_differences() {
    let mut rng = stream_rng(21, &[]);
    for k in 0..20 {
        let depth = rng.random_range(1..=4);
        let dims: Vec<usize> = (0..=depth).map(|_| rng.random_range(1..=6)).collect();
        let net = jittered_net(&dims, k, &mut rng);
        let x = random_matrix(3, dims[0], &mut rng);
        let y = random_matrix(3, *dims.last().unwrap(), &mut rng);
        let w: Vec<f64> = (0..y.cols()).map(|_| rng.random_range(0.1..2.0)).collect();

        let cache = net.forward_cached(&x).unwrap();
        let (_, d_out) = weighted_squared_loss(cache.output(), &y, Some(&w)).unwrap();
        let mut grads = vec![0.0; net.num_params()];
        net.backward(&cache, &d_out, &mut grads, false);

        let loss = |n: &Mlp<f64>| weighted_squared_loss(&n.forward(&x).unwrap(), &y, Some(&w)).unwrap().0;
        let h = 1e-6;
        let (mut diff, mut norm) = (0.0, 0.0);
        for (i, g) in grads.iter().enumerate() {
            let (mut a, mut b) = (net.clone(), net.clone());
            a.params_mut()[i] += h;
            b.params_mut()[i] -= h;
            let fd = (loss(&a) - loss(&b)) / (2.0 * h);
            diff += (g - fd) * (g - fd);
            norm += fd * fd;
        }
        assert!(diff.sqrt() <= 1e-5 * norm.sqrt().max(1e-12), "net {k} {dims:?}");
    }
}

#[test]
fn input_gradient_matches_central_differences() {
    let mut rng = stream_rng(22, &[]);
    let net = jittered_net(&[4, 7, 5, 3], 1, &mut rng);
    let x = random_matrix(2, 4, &mut rng);
    let y = random_matrix(2, 3, &mut rng);
    let cache = net.forward_cached(&x).unwrap();
    let (_, d_out) = weighted_squared_loss(cache.output(), &y, None).unwrap();
    let mut grads = vec![0.0; net.num_params()];
    let dx = net.backward(&cache, &d_out, &mut grads, true).unwrap();
    let loss = |x: &DenseMatrix<f64>| weighted_squared_loss(&net.forward(x).unwrap(), &y, None).unwrap().0;
    for i in 0..2 {
        for j in 0..4 {
            let (mut a, mut b) = (x.clone(), x.clone());
            a.set(i, j, a.get(i, j) + 1e-6);
            b.set(i, j, b.get(i, j) - 1e-6);
            let fd = (loss(&a) - loss(&b)) / 2e-6;
            assert!((dx.get(i, j) - fd).abs() <= 1e-6 * (1.0 + fd.abs()));
        }
    }
}

#[test]
fn loss_is_the_weighted_mean_square() {
    let p = DenseMatrix::from_rows(&[[1.0, 2.0], [0.0, -1.0]]).unwrap();
    let t = DenseMatrix::from_rows(&[[0.0, 2.0], [1.0, 1.0]]).unwrap();
    let (loss, grad) = weighted_squared_loss(&p, &t, Some(&[2.0, 0.5])).unwrap();
    // (2·1 + 0 + 2·1 + 0.5·4) / 2
    assert!((loss - 3.0).abs() < 1e-15);
    assert_eq!(grad.as_slice(), &[2.0, 0.0, -2.0, -1.0]);
}

#[test]
fn matmul_agrees_with_the_naive_product() {
    let mut rng = stream_rng(23, &[]);
    let a = random_matrix(5, 7, &mut rng);
    let b = random_matrix(7, 3, &mut rng);
    let c = matmul(&a, Op::N, &b, Op::N);
    let ct = matmul(&b, Op::T, &a, Op::T);
    for i in 0..5 {
        for j in 0..3 {
            let naive: f64 = (0..7).map(|k| a.get(i, k) * b.get(k, j)).sum();
            assert!((c.get(i, j) - naive).abs() < 1e-12);
            assert!((ct.get(j, i) - naive).abs() < 1e-12);
        }
    }
}

#[test]
fn adam_fits_a_smooth_function() {
    let mut rng = stream_rng(24, &[]);
    let xs: Vec<[f32; 1]> = (0..256).map(|_| [rng.random_range(-1.0f32..1.0)]).collect();
    let ys: Vec<[f32; 1]> = xs.iter().map(|x| [(2.0 * x[0]).sin()]).collect();
    let x = DenseMatrix::from_rows(&xs).unwrap();
    let y = DenseMatrix::from_rows(&ys).unwrap();
    let mut net = Mlp::<f32>::init(&[1, 32, 32, 1], 5).unwrap();
    let cfg = TrainConfig {
        epochs: 300,
        learning_rate: 3e-3,
        batch_size: 32,
        ..Default::default()
    };
    let history = train(&mut net, &x, &y, &cfg, None).unwrap();
    assert_eq!(history.len(), 300);
    assert!(history[299] < 1e-3 && history[299] < 0.01 * history[0], "{} -> {}", history[0], history[299]);
}

#[test]
fn training_is_deterministic_for_a_seed() {
    let mut rng = stream_rng(25, &[]);
    let x = random_matrix(40, 3, &mut rng).cast::<f32>();
    let y = random_matrix(40, 2, &mut rng).cast::<f32>();
    let cfg = TrainConfig {
        epochs: 5,
        batch_size: 8,
        seed: 9,
        ..Default::default()
    };
    let run = || {
        let mut net = Mlp::<f32>::init(&[3, 10, 2], 3).unwrap();
        let h = train(&mut net, &x, &y, &cfg, None).unwrap();
        (net, h)
    };
    let (a, ha) = run();
    let (b, hb) = run();
    assert_eq!(a.params(), b.params());
    assert_eq!(ha, hb);
}

#[test]
fn checkpoints_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let net = Mlp::<f32>::init(&[6, 9, 2], 77).unwrap();
    let path = dir.path().join("net.bin");
    save_mlp(&net, &path).unwrap();
    let back: Mlp<f32> = load_mlp(&path).unwrap();
    assert_eq!(back, net);

    let losses = vec![1.0, 0.5, 0.125, 1e-9];
    let lp = dir.path().join("loss.csv");
    write_loss_history(&losses, &lp).unwrap();
    assert_eq!(read_loss_history(&lp).unwrap(), losses);
}

#[test]
fn casting_preserves_the_function() {
    let mut rng = stream_rng(26, &[]);
    let net = jittered_net(&[5, 8, 3], 4, &mut rng);
    let x = random_matrix(4, 5, &mut rng);
    let a = net.forward(&x).unwrap();
    let b = net.cast::<f32>().forward(&x.cast()).unwrap();
    for (u, v) in a.as_slice().iter().zip(b.as_slice()) {
        assert!((u - *v as f64).abs() < 1e-5);
    }
}
