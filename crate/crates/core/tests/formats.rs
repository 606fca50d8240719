mod common;

use common::s2;
use rfpca::io::{
    read_counts_csv, read_model_json, read_proportions_csv, read_trajectories_csv, to_json_string, write_model_json,
    write_proportions_csv, write_trajectories_csv,
};
use rfpca::{fit_rfpca, gen_samples, CompositionCurve, Error, FrechetConfig, ManifoldSpec, SimConfig};

#[test]
fn trajectories_round_trip_exactly() {
    for spec in [s2(), ManifoldSpec::so3()] {
        let data = gen_samples(&SimConfig::new(spec, 4, 1)).unwrap();
        let mut buf = Vec::new();
        write_trajectories_csv(&mut buf, &data.samples).unwrap();
        let back = read_trajectories_csv(buf.as_slice(), &spec).unwrap();
        assert_eq!(back.len(), 4);
        for (a, b) in back.iter().zip(&data.samples) {
            assert_eq!(a.subject_id, b.subject_id);
            assert_eq!(a.grid, b.grid);
            for (p, q) in a.points.iter().zip(&b.points) {
                assert!(spec.distance(&p.coords, &q.coords) < 1e-15);
            }
        }
        let mut again = Vec::new();
        write_trajectories_csv(&mut again, &back).unwrap();
        let third = read_trajectories_csv(again.as_slice(), &spec).unwrap();
        assert_eq!(third, back);
    }
}

#[test]
fn small_deviations_are_projected_and_large_ones_rejected() {
    let text = "id,t,x1,x2,x3\na,0,0,0,1.000001\na,1,1,0,0\n";
    let samples = read_trajectories_csv(text.as_bytes(), &s2()).unwrap();
    assert_eq!(samples[0].points[0].coords, vec![0.0, 0.0, 1.0]);
    let text = "id,t,x1,x2,x3\na,0,0,0,1.01\na,1,1,0,0\n";
    assert!(matches!(read_trajectories_csv(text.as_bytes(), &s2()), Err(Error::OffManifold { .. })));
}

#[test]
fn csv_errors_name_their_location() {
    let bad_number = "id,t,x1,x2,x3\na,0,0,0,1\na,1,zero,0,1\n";
    assert!(matches!(read_trajectories_csv(bad_number.as_bytes(), &s2()), Err(Error::Parse { row: 3, column: 3, .. })));
    let bad_header = "id,t,y1,y2,y3\n";
    assert!(matches!(read_trajectories_csv(bad_header.as_bytes(), &s2()), Err(Error::Parse { row: 1, .. })));
    let grids = "id,t,x1,x2,x3\na,0,0,0,1\na,1,0,0,1\nb,0,0,0,1\nb,0.5,0,0,1\nb,1,0,0,1\n";
    match read_trajectories_csv(grids.as_bytes(), &s2()) {
        Err(Error::GridMismatch(msg)) => assert!(msg.contains('a') && msg.contains('b'), "{msg}"),
        other => panic!("{other:?}"),
    }
    let split = "id,t,x1,x2,x3\na,0,0,0,1\nb,0,0,0,1\na,1,0,0,1\n";
    assert!(matches!(read_trajectories_csv(split.as_bytes(), &s2()), Err(Error::Parse { row: 4, .. })));
}

#[test]
fn model_json_round_trips_bitwise() {
    let spec = s2();
    let data = gen_samples(&SimConfig::new(spec, 12, 2)).unwrap();
    let model = fit_rfpca(&spec, &data.samples, &FrechetConfig::default(), 3).unwrap();
    let mut buf = Vec::new();
    write_model_json(&mut buf, &model).unwrap();
    let back = read_model_json(buf.as_slice()).unwrap();
    assert_eq!(back.eigenvalues, model.eigenvalues);
    assert_eq!(back.eigenfunctions, model.eigenfunctions);
    assert_eq!(back.scores, model.scores);
    assert_eq!(back.mean_curve, model.mean_curve);
    assert_eq!(back.fve, model.fve);
    assert_eq!(back.subject_ids, model.subject_ids);
}

#[test]
fn floats_use_seventeen_significant_digits() {
    let s = to_json_string(&vec![0.1f64, 1.0 / 3.0]).unwrap();
    assert_eq!(s, "[1.0000000000000001e-1,3.3333333333333331e-1]");
    let nan = to_json_string(&vec![Some(0.5f64), None]).unwrap();
    assert_eq!(nan, "[5.0000000000000000e-1,null]");
}

#[test]
fn count_and_proportion_files() {
    let counts = "id,t,c1,c2\nf1,0,3,1\nf1,2,0,4\nf2,0,1,1\n";
    let panels = read_counts_csv(counts.as_bytes()).unwrap();
    assert_eq!(panels.len(), 2);
    assert_eq!(panels[0].counts[1], vec![0.0, 4.0]);
    let negative = "id,t,c1,c2\nf1,0,-3,1\n";
    assert!(read_counts_csv(negative.as_bytes()).is_err());

    let curves = vec![CompositionCurve {
        subject_id: "f".into(),
        times: vec![0.0, 0.5],
        proportions: vec![vec![0.25, 0.75], vec![1.0, 0.0]],
    }];
    let mut buf = Vec::new();
    write_proportions_csv(&mut buf, &curves).unwrap();
    assert_eq!(read_proportions_csv(buf.as_slice()).unwrap(), curves);
}
