use aenet::discretization::{box_counting_dimension, geometric_scales, make_quadrature, QuadratureKind};
use aenet::model_reduction::{
    fit_pca, latent_features, load_autoencoder, load_pca, projection_error, radial_histogram, save_autoencoder,
    save_pca, train_autoencoder, AeArch,
};
use aenet::pde_data::{make_dataset, DataGenerator, Family, PdeSettings, Split};
use aenet::tensor_nn::TrainConfig;

#[test]
fn pca_residual_is_the_discarded_variance() {
    let grid = Family::Burgers.grid(128).unwrap();
    let gen = DataGenerator::new(Family::Burgers, 2, 128, PdeSettings::default()).unwrap();
    let x = gen.split(Split::Train, 150, &grid, &grid).unwrap().input_matrix().unwrap();
    for d in [1, 3, 8, 30] {
        let pca = fit_pca(&x, d).unwrap();
        let back = pca.decode_batch(&pca.encode_batch(&x).unwrap()).unwrap();
        let resid: f64 = x.as_slice().iter().zip(back.as_slice()).map(|(a, b)| (a - b).powi(2)).sum();
        let discarded: f64 = pca.full_spectrum()[d..].iter().sum::<f64>() * 149.0;
        assert!((resid - discarded).abs() <= 1e-8 * discarded, "d={d}");
    }
}

#[test]
fn pca_projection_error_is_nonincreasing_and_vanishes_at_full_rank() {
    let grid = Family::Transport.grid(64).unwrap();
    let (train, _) = make_dataset(Family::Transport, 40, 5, &grid, &grid, 0.0, 1).unwrap();
    let x = train.input_matrix().unwrap();
    let rule = make_quadrature(&grid, QuadratureKind::Midpoint).unwrap();
    let mut prev = f64::INFINITY;
    for d in [1, 2, 4, 8, 16, 40] {
        let e = projection_error(&fit_pca(&x, d).unwrap(), &x, &rule).unwrap().mean;
        assert!(e <= prev + 1e-12, "d={d}: {e} > {prev}");
        prev = e;
    }
    assert!(prev < 1e-10, "{prev}");
}

#[test]
fn autoencoder_beats_pca_at_the_intrinsic_dimension() {
    let grid = Family::Transport.grid(64).unwrap();
    let (train, _) = make_dataset(Family::Transport, 256, 8, &grid, &grid, 0.0, 4).unwrap();
    let x = train.input_matrix().unwrap();
    let rule = make_quadrature(&grid, QuadratureKind::Midpoint).unwrap();
    let cfg = TrainConfig {
        epochs: 150,
        batch_size: 32,
        ..Default::default()
    };
    let (ae, history) = train_autoencoder(&x, 2, &AeArch::uniform(64), &cfg, &rule).unwrap();
    assert!(history.last().unwrap() < &history[0]);
    let ae_err = projection_error(&ae, &x, &rule).unwrap().mean;
    let pca_err = projection_error(&fit_pca(&x, 2).unwrap(), &x, &rule).unwrap().mean;
    assert!(ae_err < pca_err, "AE {ae_err} vs PCA {pca_err}");

    let table = latent_features(&ae, &x, &train.params).unwrap();
    assert_eq!(table.len(), 256);
    assert_eq!(table.header(), vec!["z1", "z2", "a", "h"]);
    let hist = radial_histogram(&table.latent, 10).unwrap();
    assert_eq!(hist.counts.iter().sum::<usize>(), 256);
}

#[test]
fn reductions_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Family::Transport.grid(32).unwrap();
    let (train, _) = make_dataset(Family::Transport, 20, 2, &grid, &grid, 0.0, 5).unwrap();
    let x = train.input_matrix().unwrap();
    let rule = make_quadrature(&grid, QuadratureKind::Midpoint).unwrap();

    let pca = fit_pca(&x, 3).unwrap();
    save_pca(&pca, "abc", &dir.path().join("pca.bin")).unwrap();
    let (back, meta) = load_pca(&dir.path().join("pca.bin")).unwrap();
    assert_eq!(back, pca);
    assert_eq!(meta.fingerprint, "abc");

    let cfg = TrainConfig {
        epochs: 2,
        batch_size: 5,
        ..Default::default()
    };
    let (ae, _) = train_autoencoder(&x, 2, &AeArch::uniform(8), &cfg, &rule).unwrap();
    save_autoencoder(&ae, "def", &dir.path().join("ae.bin")).unwrap();
    let (back, meta) = load_autoencoder(&dir.path().join("ae.bin")).unwrap();
    assert_eq!(meta.latent_dim, 2);
    assert_eq!(back.encode_batch(&x).unwrap(), ae.encode_batch(&x).unwrap());
}

#[test]
fn transport_inputs_form_a_two_dimensional_set() {
    let grid = Family::Transport.grid(256).unwrap();
    let gen = DataGenerator::new(Family::Transport, 1, 256, PdeSettings::default()).unwrap();
    let x = gen.split(Split::Train, 2000, &grid, &grid).unwrap().input_matrix().unwrap();
    let pca = fit_pca(&x, 3).unwrap();
    let z = pca.encode_batch(&x).unwrap();
    let points: Vec<Vec<f64>> = z.iter_rows().map(|r| r.to_vec()).collect();
    let s = pca.eigenvalues()[0].sqrt();
    let d = box_counting_dimension(&points, &geometric_scales(s / 8.0, 1.25 * s, 6)).unwrap();
    assert!((1.5..=2.6).contains(&d), "estimate {d}");
}
