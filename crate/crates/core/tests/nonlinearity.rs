mod common;

use common::simpson;
use proptest::prelude::*;
use sdrd_core::nonlinearity::*;
use sdrd_core::Error;

fn integrand(a: f64, b: f64) -> impl Fn(f64) -> f64 {
    move |s: f64| s.powf(b) / (1.0 - s).powf(a)
}

fn phi_ref(a: f64, b: f64, z: f64) -> f64 {
    simpson(&integrand(a, b), 0.0, z, 1e-14)
}

#[test]
fn phi_vanishes_at_zero() {
    let p = PhiSpec::biofilm(1.0, 1.0).unwrap();
    assert_eq!(p.phi(0.0).unwrap(), 0.0);
    assert_eq!(p.primitive(0.0).unwrap(), 0.0);
}

#[test]
fn phi_matches_quadrature_reference() {
    let p = PhiSpec::biofilm(1.0, 1.0).unwrap();
    let v = p.phi(0.5).unwrap();
    assert!((v - phi_ref(1.0, 1.0, 0.5)).abs() < 1e-12);
    assert!((v - 0.193147).abs() < 1e-6);

    let q = PhiSpec::biofilm(2.0, 2.0).unwrap();
    let r = phi_ref(2.0, 2.0, 0.9);
    assert!((q.phi(0.9).unwrap() - r).abs() <= 1e-8 * r);
}

#[test]
fn non_integer_exponents_use_quadrature() {
    for &(a, b) in &[(1.5, 0.7), (2.3, 1.25), (1.0, 2.5)] {
        let p = PhiSpec::biofilm(a, b).unwrap();
        for &z in &[0.2, 0.5, 0.75, 0.95] {
            let r = phi_ref(a, b, z);
            let v = p.phi(z).unwrap();
            assert!((v - r).abs() <= 1e-9 * r, "a={a} b={b} z={z}: {v} vs {r}");
        }
    }
}

#[test]
fn primitive_matches_nested_quadrature() {
    let p = PhiSpec::biofilm(1.0, 1.0).unwrap();
    let inner = |s: f64| -s - (1.0 - s).ln();
    let r = simpson(&inner, 0.0, 0.5, 1e-15);
    assert!((p.primitive(0.5).unwrap() - r).abs() < 1e-12);

    let q = PhiSpec::biofilm(2.0, 1.5).unwrap();
    let nested = |s: f64| phi_ref(2.0, 1.5, s);
    let r = simpson(&nested, 0.0, 0.8, 1e-12);
    assert!((q.primitive(0.8).unwrap() - r).abs() <= 1e-8 * r);
}

#[test]
fn primitive_dominates_half_point_rectangle() {
    let p = PhiSpec::biofilm(1.3, 0.8).unwrap();
    for k in 1..20 {
        let z = k as f64 / 20.0;
        assert!(p.primitive(z).unwrap() >= p.phi(z / 2.0).unwrap() * z / 2.0);
    }
}

#[test]
fn domain_is_the_open_unit_interval() {
    let p = PhiSpec::biofilm(1.0, 1.0).unwrap().with_symmetric_extension(true);
    assert!(matches!(p.phi(1.0), Err(Error::Domain { .. })));
    assert!(p.phi(-1.0).is_err());
    assert!(p.primitive(1.2).is_err());
    assert!((p.phi(-0.5).unwrap() + p.phi(0.5).unwrap()).abs() < 1e-15);
}

#[test]
fn biofilm_structure_holds() {
    for &(a, b) in &[(1.0, 1.0), (2.0, 2.0), (1.5, 0.5)] {
        let rep = PhiSpec::biofilm(a, b).unwrap().check_structure();
        assert!(rep.strictly_increasing && rep.degenerate_at_zero && rep.singular_at_one);
        assert!(rep.convex_concave_split);
        let (c1, c2, e) = rep.growth_bound.unwrap();
        let p = PhiSpec::biofilm(a, b).unwrap();
        for &z in &[0.9, 0.99, 0.999] {
            assert!(p.phi(z).unwrap() <= c1 * (1.0 - z).powf(1.0 - e) + c2 + 1e-12);
        }
    }
}

#[test]
fn regularization_floor_keeps_slope_positive() {
    let p = regularize(&PhiSpec::biofilm(1.0, 1.0).unwrap(), 10.0).unwrap();
    let (m, _) = p.slope_bounds();
    assert!(m > 0.0);
    assert!(p.derivative(0.0) >= m);
}

#[test]
fn regularization_converges_uniformly_on_compacts() {
    let base = PhiSpec::biofilm(1.0, 1.0).unwrap().with_symmetric_extension(true);
    let gap = |r: f64| {
        let p = regularize(&base, r).unwrap();
        (0..=1600)
            .map(|k| -0.8 + 1.6 * k as f64 / 1600.0)
            .map(|z| (p.value(z) - base.phi(z).unwrap()).abs())
            .fold(0.0, f64::max)
    };
    let g: Vec<f64> = [10.0, 100.0, 1000.0].iter().map(|&r| gap(r)).collect();
    assert!(g[0] > g[1] && g[1] > g[2], "{g:?}");
}

#[test]
fn regularization_stays_close_on_the_inner_interval() {
    let base = PhiSpec::biofilm(1.0, 1.0).unwrap().with_symmetric_extension(true);
    let p = regularize(&base, 10.0).unwrap();
    assert!(p.value(0.5).abs() <= base.phi(0.5).unwrap().abs() + 0.5 / 10.0);
    for &r in &[10.0, 100.0, 1000.0] {
        let p = regularize(&base, r).unwrap();
        let lim = 1.0 - 1.0 / r;
        for k in 0..=4000 {
            let z = -lim + 2.0 * lim * k as f64 / 4000.0;
            assert!(p.value(z).abs() <= base.phi(z).unwrap().abs() + z.abs() / r + 1e-14, "R={r} z={z}");
        }
    }
}

#[test]
fn regularized_slopes_and_shape_on_lattice() {
    for &(a, b) in &[(1.0, 1.0), (2.0, 2.0), (1.5, 0.5)] {
        let base = PhiSpec::biofilm(a, b).unwrap();
        for &r in &[10.0, 100.0, 1e4] {
            let p = regularize(&base, r).unwrap();
            let (m, big) = p.slope_bounds();
            let zs: Vec<f64> = (0..=10_000).map(|k| -1.5 + 3.0 * k as f64 / 10_000.0).collect();
            for &z in &zs {
                let d = p.derivative(z);
                assert!(d >= m * (1.0 - 1e-12) && d <= big * (1.0 + 1e-12), "a={a} b={b} R={r} z={z}: {d}");
            }
            // convex on [0, inf), odd
            let pos: Vec<f64> = (0..=10_000).map(|k| 1.2 * k as f64 / 10_000.0).collect();
            for w in pos.windows(3) {
                let (f0, f1, f2) = (p.value(w[0]), p.value(w[1]), p.value(w[2]));
                assert!(f2 - 2.0 * f1 + f0 >= -1e-8 * f1.abs().max(1e-300), "a={a} b={b} R={r} z={}", w[1]);
                assert_eq!(p.value(-w[1]), -f1);
            }
        }
    }
}

#[test]
fn regularize_rejects_small_index() {
    assert!(matches!(
        regularize(&PhiSpec::biofilm(1.0, 1.0).unwrap(), 1.0),
        Err(Error::Parameter(_))
    ));
}

#[test]
fn reaction_examples() {
    let m = ReactionSpec::monod(1.0, 0.0, 1.0, 1.0, 1.0, 1.0).unwrap();
    let (f, g) = m.eval([0.0; 2], 0.5, 1.0).unwrap();
    assert!((f - 0.25).abs() < 1e-15 && (g + 0.25).abs() < 1e-15);
    let m = ReactionSpec::monod(0.3, 0.2, 0.9, 0.7, 1.0, 1.0).unwrap();
    assert_eq!(m.eval([0.0; 2], 0.0, 0.7).unwrap().0, 0.0);
    let s = ReactionSpec::scalar_decay(2.0).unwrap();
    assert!((s.eval([0.0; 2], 0.3, 0.0).unwrap().0 + 0.6).abs() < 1e-15);
    assert!(matches!(s.eval([0.0; 2], 1.5, 0.0), Err(Error::Domain { .. })));
}

#[test]
fn monod_sign_conditions_on_lattice() {
    let m = ReactionSpec::monod(0.8, 0.3, 1.7, 0.2, 1.0, 0.5).unwrap();
    for i in 0..100 {
        let u = i as f64 / 100.0;
        for j in 0..=100 {
            let v = j as f64 / 100.0;
            assert_eq!(m.eval([0.0; 2], 0.0, v).unwrap().0, 0.0);
            assert_eq!(m.eval([0.0; 2], u, 0.0).unwrap().1, 0.0);
            assert!(m.eval([0.0; 2], u, 1.0).unwrap().1 <= 1.0);
        }
    }
}

fn sampled_lipschitz(spec: &ReactionSpec) -> (f64, f64) {
    let n = 25;
    let pts: Vec<(f64, f64)> = (0..n)
        .flat_map(|i| (0..=n).map(move |j| (i as f64 / n as f64, j as f64 / n as f64)))
        .collect();
    let mut summed: f64 = 0.0;
    let mut maxnorm: f64 = 0.0;
    for (k, &(u1, v1)) in pts.iter().enumerate() {
        let (f1, g1) = spec.eval([0.0; 2], u1, v1).unwrap();
        for &(u2, v2) in &pts[k + 1..] {
            let (f2, g2) = spec.eval([0.0; 2], u2, v2).unwrap();
            let d1 = (u1 - u2).abs() + (v1 - v2).abs();
            let dinf = (u1 - u2).abs().max((v1 - v2).abs());
            summed = summed.max(((f1 - f2).abs() + (g1 - g2).abs()) / d1);
            maxnorm = maxnorm.max((f1 - f2).abs().max((g1 - g2).abs()) / dinf);
        }
    }
    (summed, maxnorm)
}

#[test]
fn lipschitz_bounds_dominate_difference_quotients() {
    assert_eq!(ReactionSpec::scalar_decay(2.0).unwrap().lipschitz_bound(), 2.0);
    assert_eq!(ReactionSpec::monod(0.0, 0.0, 0.0, 1.0, 1.0, 1.0).unwrap().lipschitz_bound(), 0.0);
    for k in [[1.0, 1.0, 1.0, 1.0], [0.4, 0.1, 1.0, 0.4], [2.0, 0.5, 3.0, 10.0], [0.1, 2.0, 0.3, 0.05]] {
        let spec = ReactionSpec::monod(k[0], k[1], k[2], k[3], 1.0, 1.0).unwrap();
        let (summed, maxnorm) = sampled_lipschitz(&spec);
        let l = spec.lipschitz_bound();
        assert!(summed <= l * (1.0 + 1e-9) && maxnorm <= l * (1.0 + 1e-9), "{k:?}: {summed} {maxnorm} vs {l}");
        assert_eq!(spec.lipschitz_l, l);
    }
}

#[test]
fn custom_reaction_lipschitz_from_lattice() {
    let c = CustomReaction::new("cubic", false, |_, u, _| (u - u * u * u, 0.0));
    let spec = ReactionSpec::custom(c, None);
    // sup |1 - 3u^2| on (-1, 1) is 2, approached at the lattice ends
    assert!(spec.lipschitz_l > 1.8 && spec.lipschitz_l <= 2.0 + 1e-6);
}

#[test]
fn tabulated_phi_interpolates_monotonically() {
    let z: Vec<f64> = (0..=20).map(|k| 0.045 * k as f64).collect();
    let v: Vec<f64> = z.iter().map(|&s| s * s * s).collect();
    let table = PhiTable::new(z, v).unwrap();
    let top = table.z_max();
    let p = PhiSpec::tabulated(table);
    let mut last = -1.0;
    for k in 0..=900 {
        let s = top * k as f64 / 900.0;
        let val = p.phi(s).unwrap();
        assert!(val >= last);
        last = val;
    }
    assert!((p.phi(0.5).unwrap() - 0.125).abs() < 2e-3);
}

proptest! {
    #[test]
    fn phi_is_increasing_and_primitive_convex(a in 1.0f64..3.0, b in 0.2f64..3.0, z in 0.01f64..0.97) {
        let p = PhiSpec::biofilm(a, b).unwrap();
        let dz = 1e-3;
        prop_assert!(p.phi(z + 0.01).unwrap() > p.phi(z).unwrap());
        let c = p.primitive(z + dz).unwrap() - 2.0 * p.primitive(z).unwrap() + p.primitive(z - dz).unwrap();
        prop_assert!(c >= -1e-12);
    }

    #[test]
    fn inverse_is_a_left_inverse(a in 1.0f64..3.0, b in 0.2f64..3.0, z in 0.0f64..0.99) {
        let p = PhiSpec::biofilm(a, b).unwrap();
        let y = p.phi(z).unwrap();
        prop_assert!((p.inverse(y).unwrap() - z).abs() < 1e-10);
    }
}
