use citymst_core::occupancy::edge_locality_violations;
use citymst_core::sampling::{sample_unit_square, DensitySpec};
use citymst_core::trials::one_point_trial;
use citymst_core::{detect_ztot, exact_mst, StreamSeed};

#[test]
fn ztot_is_likely_at_three_log_scale() {
    let (n, m, trials) = (16_000u64, 3.0, 200u64);
    let f = DensitySpec::Uniform;
    let mut held = 0;
    for t in 0..trials {
        let batch = sample_unit_square(n as usize, &f, StreamSeed::replication(41, t)).unwrap();
        let z = detect_ztot(&batch.points, n, m, &f);
        assert_eq!(z.grid.cells_per_side, 16);
        if z.holds {
            held += 1;
            let tree = exact_mst(&batch.points).unwrap();
            assert_eq!(edge_locality_violations(&tree, &batch.points, &z.grid), 0);
        }
    }
    assert!(held as f64 / trials as f64 >= 0.9, "{held}/{trials}");
}

#[test]
fn add_and_remove_under_ztot() {
    let f = DensitySpec::cosine(0.4).unwrap();
    let mut held = 0;
    for t in 0..40 {
        let trial = one_point_trial(16_000, 3.0, &f, StreamSeed::replication(42, t)).unwrap();
        if trial.ztot {
            held += 1;
            assert!(trial.add_diff() <= trial.add_bound(), "trial {t}");
            assert_eq!(trial.locality_violations, 0);
        }
    }
    assert!(held > 0);
}
