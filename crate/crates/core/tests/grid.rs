mod common;

use proptest::prelude::*;
use sdrd_core::grid::*;

fn grid_1d() -> Grid {
    build_grid(1, &[1.0], &[31]).unwrap()
}

fn grid_2d() -> Grid {
    build_grid(2, &[1.0, 0.5], &[9, 6]).unwrap()
}

#[test]
fn laplacian_matches_written_out_stencil() {
    let g = grid_1d();
    let w: Vec<f64> = (0..g.len()).map(|k| (k as f64 * 0.37).sin()).collect();
    let reference = common::laplacian_1d(&w, g.spacing()[0]);
    let got = g.laplacian(&w).unwrap();
    for (a, b) in got.iter().zip(&reference) {
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
    }
    assert!(g.laplacian(&w[1..]).is_err());
}

#[test]
fn level_set_separation_respects_holder_bound() {
    // u0 = 0.5 sin(pi x) is Lipschitz with constant M = pi / 2
    let g = build_grid(1, &[1.0], &[399]).unwrap();
    let u0 = StateField::from_fn(g, RangeTag::Signed, |x| 0.5 * (std::f64::consts::PI * x[0]).sin()).unwrap();
    let m = 0.5 * std::f64::consts::PI;
    let measured = holder_seminorm_zero_extended(&g, u0.values(), 1.0).unwrap();
    assert!(measured <= m * (1.0 + 1e-9));
    for &(theta, delta) in &[(0.1, 0.05), (0.2, 0.1), (0.05, 0.3)] {
        let d = level_set_separation(&u0, theta, delta).unwrap().unwrap();
        assert!(d >= delta / m - g.h_min(), "theta={theta} delta={delta}: {d}");
    }
}

#[test]
fn level_set_separation_in_two_dimensions() {
    let g = build_grid(2, &[1.0, 1.0], &[59, 59]).unwrap();
    let pi = std::f64::consts::PI;
    let u0 = StateField::from_fn(g, RangeTag::Signed, |x| 0.8 * (pi * x[0]).sin() * (pi * x[1]).sin()).unwrap();
    // |grad u0| <= 0.8 pi
    let m = 0.8 * pi;
    let d = level_set_separation(&u0, 0.2, 0.2).unwrap().unwrap();
    assert!(d >= 0.2 / m - g.h_min());
}

#[test]
fn empty_large_set_for_zero_data() {
    let g = grid_2d();
    let sets = level_sets(&StateField::zeros(g, RangeTag::Signed), 0.1).unwrap();
    assert!(sets.l_mask.iter().all(|&b| !b));
    assert_eq!(level_set_separation(&StateField::zeros(g, RangeTag::Signed), 0.1, 0.1).unwrap(), None);
}

fn field(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, len)
}

proptest! {
    #[test]
    fn laplacian_is_symmetric(a in field(54), b in field(54)) {
        let g = grid_2d();
        let la = g.laplacian(&a).unwrap();
        let lb = g.laplacian(&b).unwrap();
        let lhs = g.inner(&la, &b);
        let rhs = g.inner(&a, &lb);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1.0));
    }

    #[test]
    fn laplacian_is_negative_semidefinite(a in field(31)) {
        let g = grid_1d();
        let la = g.laplacian(&a).unwrap();
        prop_assert!(g.inner(&la, &a) <= 1e-12);
        prop_assert!((g.inner(&la, &a) + g.h1_semi_sq(&a)).abs() <= 1e-10 * g.h1_semi_sq(&a).max(1.0));
    }

    #[test]
    fn l1_triangle_inequality(a in field(54), b in field(54), c in field(54)) {
        let g = grid_2d();
        let diff = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(p, q)| p - q).collect() };
        let ac = g.norm(&diff(&a, &c), NormKind::L1);
        let ab = g.norm(&diff(&a, &b), NormKind::L1);
        let bc = g.norm(&diff(&b, &c), NormKind::L1);
        prop_assert!(ac <= ab + bc + 1e-14);
    }

    #[test]
    fn level_sets_partition_nodes(a in prop::collection::vec(-0.99f64..0.99, 54), theta in 0.01f64..0.9) {
        let g = grid_2d();
        let u = StateField::new(g, a, RangeTag::Signed).unwrap();
        let sets = level_sets(&u, theta).unwrap();
        let mut seen = vec![0u8; g.len()];
        for k in 0..g.len() {
            if sets.l_mask[k] { seen[k] += 1; }
            if sets.s_mask[k] { seen[k] += 1; }
        }
        for &k in &sets.boundary_nodes { seen[k] += 1; }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }
}
