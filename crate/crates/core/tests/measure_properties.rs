use fpwalk::group::{enumerate_ball, FreeProductSpec, GroupElement, Metric};
use fpwalk::measures::{AdaptedMeasure, ConvolutionTable, ExactMeasure, LatticeMeasure};
use num_rational::Ratio;

fn f2_table(lazy: Option<f64>, n: usize) -> ConvolutionTable {
    let spec = FreeProductSpec::from_ranks(&[1, 1]).unwrap();
    let mut mu = AdaptedMeasure::srw(&spec, vec![0.5, 0.5]).unwrap().lift();
    if let Some(eps) = lazy {
        mu = mu.lazy(eps).unwrap();
    }
    let mut t = ConvolutionTable::new(mu, 1 << 22);
    t.extend_to(n).unwrap();
    t
}

#[test]
fn cached_powers_conserve_mass() {
    let t = f2_table(Some(0.25), 10);
    for n in 0..=10 {
        assert!((t.mass(n) - 1.0).abs() < 1e-12, "n = {n}");
    }
    let spec = FreeProductSpec::from_ranks(&[2, 1]).unwrap();
    let mu = AdaptedMeasure::new(
        &spec,
        vec![0.3, 0.7],
        vec![
            LatticeMeasure::from_weights(2, vec![(vec![1, 0], 1.0), (vec![-1, 0], 1.0), (vec![1, 1], 2.0), (vec![-1, -1], 2.0)]).unwrap(),
            LatticeMeasure::srw(1),
        ],
    )
    .unwrap();
    let mut t = ConvolutionTable::new(mu.lift(), 1 << 22);
    t.extend_to(7).unwrap();
    for n in 0..=7 {
        assert!((t.mass(n) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn symmetric_powers_are_symmetric() {
    let t = f2_table(Some(0.25), 8);
    let spec = FreeProductSpec::from_ranks(&[1, 1]).unwrap();
    let ball = enumerate_ball(&spec, 3, Metric::Word, 1000).unwrap();
    for x in ball.iter().step_by(5) {
        for y in ball.iter().step_by(7) {
            for n in [3, 6, 8] {
                let a = t.transition(x, y, n).unwrap();
                let b = t.transition(y, x, n).unwrap();
                assert!((a - b).abs() <= 1e-15 * a.max(1e-300), "{x} {y} {n}");
            }
        }
    }
}

#[test]
fn non_lazy_free_group_is_periodic() {
    let t = f2_table(None, 11);
    let e = GroupElement::identity();
    for n in (1..=11).step_by(2) {
        assert_eq!(t.power_at(n, &e), 0.0);
    }
    assert!(t.power_at(10, &e) > 0.0);
}

#[test]
fn embedded_integer_walk_matches_binomials() {
    // simple walk on the first factor, in exact arithmetic
    let step = |v| GroupElement::syllable(0, vec![v]);
    let mu = ExactMeasure::from_integer_weights(vec![(step(1), 1), (step(-1), 1)]);
    let mut p = ExactMeasure::identity();
    let e = GroupElement::identity();
    for n in 1..=20usize {
        p = p.convolve(&mu);
        if n % 2 == 0 {
            let mut c: i128 = 1;
            for k in 0..n / 2 {
                c = c * (n - k) as i128 / (k + 1) as i128;
            }
            assert_eq!(p.mass(&e), Ratio::new(c, 1i128 << n));
        } else {
            assert_eq!(p.mass(&e), Ratio::from_integer(0));
        }
    }
}

#[test]
fn extended_returns_match_direct_powers() {
    let t = f2_table(Some(0.25), 10);
    let half = f2_table(Some(0.25), 5);
    for y in ["e", "f1:(1)", "f1:(1).f2:(-1)"] {
        let y: GroupElement = y.parse().unwrap();
        for n in 6..=10 {
            let a = half.return_extended(&y, n).unwrap();
            let b = t.power_at(n, &y);
            assert!((a - b).abs() <= 1e-14 * b.max(1e-300), "{y} {n}: {a} {b}");
        }
    }
    for y in ["e", "f1:(1)", "f1:(1).f2:(-1)", "f2:(2)"] {
        let y: GroupElement = y.parse().unwrap();
        let ext = half.series_extended(&y, 10).unwrap();
        for (n, a) in ext.iter().enumerate() {
            let b = t.power_at(n, &y);
            assert!((a - b).abs() <= 1e-14 * b.max(1e-300), "{y} {n}: {a} {b}");
        }
    }
    for n in 0..=10 {
        let a = half.returns_extended(n).unwrap();
        let b = t.power_at(n, &GroupElement::identity());
        assert!((a - b).abs() <= 1e-14 * b);
    }
}
