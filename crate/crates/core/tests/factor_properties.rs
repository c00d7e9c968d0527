use fpwalk::factor_green::{FactorGreen, GreenMode};
use fpwalk::measures::LatticeMeasure;
use proptest::prelude::*;

fn laplace(d: usize) -> FactorGreen {
    FactorGreen::new(LatticeMeasure::srw(d), GreenMode::Laplace).unwrap()
}

#[test]
fn quadrature_within_series_tail_plus_error() {
    for d in [1usize, 2, 3] {
        let m = LatticeMeasure::srw(d);
        let quad = FactorGreen::new(m.clone(), GreenMode::Quadrature { nodes: if d == 3 { 32 } else { 128 } }).unwrap();
        let series = FactorGreen::new(m, GreenMode::Series { n_max: if d == 3 { 80 } else { 200 } }).unwrap();
        for t in [0.1, 0.5, 0.9] {
            for g in [vec![0; d], { let mut v = vec![0; d]; v[0] = 1; v }, { let mut v = vec![1; d]; v[0] = 2; v }] {
                let q = quad.green(&g, t).unwrap();
                let s = series.green(&g, t).unwrap();
                assert!((q.value - s.value).abs() <= s.error + q.error + 1e-12, "d={d} t={t} g={g:?}: {q:?} {s:?}");
            }
        }
    }
}

#[test]
fn green_is_increasing_in_t() {
    for d in [1usize, 3, 5] {
        let f = laplace(d);
        let zero = vec![0; d];
        let grid: Vec<f64> = (1..=20).map(|i| i as f64 * 0.0495).collect();
        let vals: Vec<f64> = grid.iter().map(|&t| f.green(&zero, t).unwrap().value).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]), "d = {d}");
    }
}

#[test]
fn psi_equals_phi_minus_s_phi_prime() {
    for d in [1usize, 3, 5] {
        let f = laplace(d);
        let top = f.theta().unwrap().min(4.0);
        for frac in [0.2, 0.5, 0.8] {
            let s = frac * top;
            let h = 1e-4 * s;
            let dphi = (f.phi(s + h).unwrap() - f.phi(s - h).unwrap()) / (2.0 * h);
            let psi = f.psi(s).unwrap();
            assert!((psi - (f.phi(s).unwrap() - s * dphi)).abs() < 1e-4, "d={d} s={s}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn green_is_even_in_g(a in -3i32..=3, b in -3i32..=3, c in -3i32..=3, t in 0.05f64..0.999) {
        let f = laplace(3);
        let g = f.green(&[a, b, c], t).unwrap().value;
        let h = f.green(&[-a, -b, -c], t).unwrap().value;
        prop_assert_eq!(g, h);
    }

    #[test]
    fn tau_inverts_sigma(frac in 0.01f64..0.999) {
        let f = laplace(3);
        let sigma = frac * f.theta().unwrap();
        let t = f.tau(sigma).unwrap();
        prop_assert!(t > 0.0 && t < 1.0);
        let back = t * f.green(&[0, 0, 0], t).unwrap().value;
        prop_assert!((back - sigma).abs() <= 1e-12 * sigma);
    }
}
