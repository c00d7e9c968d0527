use fpwalk::group::{enumerate_ball, GroupElement, Metric};
use fpwalk::measures::ConvolutionTable;
use fpwalk::product_green::{direct_series_green, gerl_r_estimate, lazy_radius, FreeProductWalk};
use proptest::prelude::*;

fn walks() -> Vec<FreeProductWalk> {
    vec![
        FreeProductWalk::srw(&[1, 1], &[0.5, 0.5]).unwrap(),
        FreeProductWalk::srw(&[3, 1], &[0.5, 0.5]).unwrap(),
        FreeProductWalk::srw(&[2, 1], &[0.3, 0.7]).unwrap(),
        FreeProductWalk::srw(&[5, 1], &[0.6, 0.4]).unwrap(),
        FreeProductWalk::srw(&[1, 1, 1], &[0.2, 0.3, 0.5]).unwrap(),
    ]
}

#[test]
fn phi_fixed_point_on_r_grid() {
    for w in walks() {
        let big_r = w.radius().unwrap();
        for i in 1..=10 {
            let r = big_r * i as f64 / 10.0;
            let g = w.phi(w.u_of_r(r).unwrap()).unwrap();
            assert!((g - w.phi(r * g).unwrap()).abs() <= 1e-8 * g, "{w:?} r={r}");
        }
    }
}

#[test]
fn zeta_stays_below_one_inside_the_disc() {
    for w in walks() {
        let big_r = w.radius().unwrap();
        for frac in [0.1, 0.5, 0.9, 0.999] {
            for i in 0..w.num_factors() {
                let z = w.zeta(i, frac * big_r).unwrap();
                assert!(z > 0.0 && z < 1.0, "{w:?} factor {i} at {frac}R: {z}");
            }
        }
    }
}

fn lazy_returns(w: &FreeProductWalk, n: usize) -> Vec<f64> {
    let mut t = ConvolutionTable::new(w.measure().lift().lazy(0.25).unwrap(), 1 << 24);
    t.extend_to(n.div_ceil(2)).unwrap();
    (0..=n).map(|k| t.returns_extended(k).unwrap()).collect()
}

#[test]
fn ratio_estimate_matches_radius() {
    for (ranks, n) in [(vec![1usize, 1], 14usize), (vec![3, 1], 16)] {
        let w = FreeProductWalk::srw(&ranks, &[0.5, 0.5]).unwrap();
        let target = lazy_radius(w.radius().unwrap(), 0.25);
        let est = gerl_r_estimate(&lazy_returns(&w, n), 1.5).unwrap();
        assert!((est.r - target).abs() < 1e-2, "{ranks:?}: {} vs {target}", est.r);
    }
}

#[test]
fn factorised_green_within_series_bracket() {
    let w = FreeProductWalk::srw(&[1, 1], &[0.5, 0.5]).unwrap();
    let big_r = w.radius().unwrap();
    let mut t = ConvolutionTable::new(w.measure().lift(), 1 << 23);
    t.extend_to(12).unwrap();
    let e = GroupElement::identity();
    for y in enumerate_ball(w.spec(), 3, Metric::Word, 1000).unwrap() {
        let coeffs: Vec<f64> = (0..=12).map(|n| t.power_at(n, &y)).collect();
        for frac in [0.5, 0.8] {
            let r = frac * big_r;
            let s = direct_series_green(&coeffs, r).unwrap();
            let g = w.at(r, 0).unwrap().green_value(&e, &y).unwrap();
            assert!(s.brackets(g, 0.01), "{y} at {frac}R: {g} vs {s:?}");
        }
    }
}

#[test]
fn first_iterated_sum_diverges_only_without_degeneracy() {
    let e = GroupElement::identity();
    let f1 = |w: &FreeProductWalk, gap: f64| {
        let r = w.radius().unwrap() * (1.0 - gap);
        w.at(r, 1).unwrap().f_k(1, &e, &e).unwrap()
    };
    let gaps = [1e-2, 1e-4, 1e-6, 1e-8];
    let snd = FreeProductWalk::srw(&[1, 1], &[0.5, 0.5]).unwrap();
    let v: Vec<f64> = gaps.iter().map(|&g| f1(&snd, g)).collect();
    assert!(v.windows(2).all(|p| p[1] > 3.0 * p[0]), "{v:?}");
    let conv = FreeProductWalk::srw(&[5, 1], &[0.6, 0.4]).unwrap();
    let v: Vec<f64> = gaps.iter().map(|&g| f1(&conv, g)).collect();
    // increments shrink like √(R−r)
    assert!(v.windows(2).all(|p| p[1] > p[0]), "{v:?}");
    let inc: Vec<f64> = v.windows(2).map(|p| p[1] - p[0]).collect();
    assert!(inc.windows(2).all(|p| p[1] < 0.2 * p[0]), "{v:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn green_is_invariant_and_symmetric(ax in -2i32..=2, bx in -2i32..=2, ay in -2i32..=2, by in -2i32..=2, frac in 0.05f64..1.0) {
        let w = FreeProductWalk::srw(&[2, 1], &[0.4, 0.6]).unwrap();
        let r = frac * w.radius().unwrap();
        let snap = w.at(r, 0).unwrap();
        let x = GroupElement::from_syllables([
            fpwalk::group::Syllable { factor: 0, vector: vec![ax, bx] },
            fpwalk::group::Syllable { factor: 1, vector: vec![ay] },
        ]);
        let y = GroupElement::from_syllables([
            fpwalk::group::Syllable { factor: 1, vector: vec![by] },
            fpwalk::group::Syllable { factor: 0, vector: vec![ay, ax] },
        ]);
        let g = snap.green_value(&x, &y).unwrap();
        prop_assert!(g > 0.0);
        prop_assert!((g - snap.green_value(&y, &x).unwrap()).abs() <= 1e-12 * g);
        let e = GroupElement::identity();
        prop_assert!(g <= snap.green_value(&e, &e).unwrap() * (1.0 + 1e-12));
    }
}
