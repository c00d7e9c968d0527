use fpwalk::ancona::{sample_triples, strong_ancona_fit, weak_ancona_scan};
use fpwalk::product_green::FreeProductWalk;

#[test]
fn prefix_cut_points_factorise_for_every_r() {
    for (ranks, alpha) in [(vec![1usize, 1], vec![0.5, 0.5]), (vec![3, 1], vec![0.5, 0.5]), (vec![2, 1, 1], vec![0.2, 0.4, 0.4])] {
        let w = FreeProductWalk::srw(&ranks, &alpha).unwrap();
        let big_r = w.radius().unwrap();
        let grid: Vec<f64> = (0..=5).map(|i| big_r * (0.5 + 0.1 * i as f64)).collect();
        let triples = sample_triples(w.spec(), 80, 5, 7, 2).unwrap();
        let rep = weak_ancona_scan(&w, &grid, &triples, 5).unwrap();
        for l in &rep.levels {
            assert!(l.prefix_identity_error < 1e-10, "{ranks:?}: {l:?}");
        }
        assert!(rep.levels.iter().all(|l| l.c_hat.is_finite() && l.c_hat >= 1.0 / (1.0 + 1e-12)));
    }
}

#[test]
fn worst_detour_constant_on_the_tree() {
    // a two-step detour off the geodesic costs F(r)^-4 with F the one-step first-passage value
    let w = FreeProductWalk::srw(&[1, 1], &[0.5, 0.5]).unwrap();
    let big_r = w.radius().unwrap();
    let triples = sample_triples(w.spec(), 400, 11, 6, 2).unwrap();
    let grid: Vec<f64> = (0..=5).map(|i| big_r * (0.5 + 0.1 * i as f64)).collect();
    let rep = weak_ancona_scan(&w, &grid, &triples, 11).unwrap();
    for l in &rep.levels {
        let q = (1.0 - 0.75 * l.r * l.r).max(0.0).sqrt();
        let f = 2.0 * (1.0 - q) / (3.0 * l.r);
        let gee = 3.0 / (1.0 + 2.0 * q);
        assert!((l.c_hat * gee * f.powi(4) - 1.0).abs() < 1e-9, "{l:?}");
    }
}

#[test]
fn ancona_constant_is_stable_under_doubling() {
    let w = FreeProductWalk::srw(&[1, 1], &[0.5, 0.5]).unwrap();
    let a = weak_ancona_scan(&w, &[0.5], &sample_triples(w.spec(), 400, 9, 6, 2).unwrap(), 9).unwrap();
    let b = weak_ancona_scan(&w, &[0.5], &sample_triples(w.spec(), 800, 9, 6, 2).unwrap(), 9).unwrap();
    assert!((a.c_hat / b.c_hat - 1.0).abs() <= 0.1, "{} {}", a.c_hat, b.c_hat);
}

#[test]
fn strong_deviations_do_not_grow_with_depth() {
    let w = FreeProductWalk::srw(&[1, 1], &[0.5, 0.5]).unwrap();
    for r in [0.5, w.radius().unwrap()] {
        let fit = strong_ancona_fit(&w, r, &[1, 2, 3, 4], 50, 2, 2).unwrap();
        assert!(fit.median_non_increasing, "{fit:?}");
        assert!(fit.levels.iter().all(|l| l.median >= 0.0));
    }
}
