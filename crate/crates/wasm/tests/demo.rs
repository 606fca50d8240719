use rfpca_wasm::Demo;

fn points(flat: &[f64]) -> Vec<&[f64]> {
    flat.chunks(3).collect()
}

fn distance(p: &[f64], q: &[f64]) -> f64 {
    let norm = |sign: f64| p.iter().zip(q).map(|(a, b)| (a + sign * b).powi(2)).sum::<f64>().sqrt();
    2.0 * norm(-1.0).atan2(norm(1.0))
}

#[test]
fn fit_exposes_a_monotone_fve_curve() {
    let demo = Demo::try_new(80, 4, 6).unwrap();
    assert_eq!(demo.subjects(), 80);
    assert_eq!(demo.grid_size(), 20);
    assert_eq!(demo.k_max(), 6);
    let fve = demo.fve();
    assert_eq!(fve.len(), 6);
    assert!(fve.windows(2).all(|w| w[0] <= w[1]));
    assert!(fve[demo.selected_k() - 1] >= 0.95);
    assert_eq!(demo.mean().len(), 60);
}

#[test]
fn reconstructions_approach_the_observed_curve() {
    let demo = Demo::try_new(60, 8, 8).unwrap();
    let observed = demo.observed(3);
    let error = |k: usize| {
        let rebuilt = demo.try_reconstruct(3, k).unwrap();
        points(&observed).iter().zip(points(&rebuilt)).map(|(p, q)| distance(p, q)).fold(0.0, f64::max)
    };
    let errors: Vec<f64> = (0..=8).map(error).collect();
    assert!(errors[8] < errors[0] * 0.2, "{errors:?}");
    let zero = demo.try_reconstruct(3, 0).unwrap();
    assert!(points(&zero).iter().zip(points(&demo.mean())).all(|(p, q)| distance(p, q) < 1e-12));
}

#[test]
fn modes_are_symmetric_about_the_mean() {
    let demo = Demo::try_new(60, 2, 4).unwrap();
    let mean = demo.mean();
    let plus = demo.try_mode(1, 2.0).unwrap();
    let minus = demo.try_mode(1, -2.0).unwrap();
    for ((m, p), q) in points(&mean).iter().zip(points(&plus)).zip(points(&minus)) {
        assert!((distance(m, p) - distance(m, q)).abs() < 1e-9);
        assert!((p.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn bad_requests_are_errors() {
    assert!(Demo::try_new(1, 0, 3).is_err());
    assert!(Demo::try_new(10_000, 0, 3).is_err());
    let demo = Demo::try_new(20, 1, 3).unwrap();
    assert!(demo.try_reconstruct(20, 1).is_err());
    assert!(demo.try_mode(0, 1.0).is_err());
    assert!(demo.try_mode(4, 1.0).is_err());
    assert!(demo.observed(99).is_empty());
}
