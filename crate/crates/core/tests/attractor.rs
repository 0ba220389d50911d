use sdrd_core::attractor::*;
use sdrd_core::grid::*;
use sdrd_core::initial::InitialSpec;
use sdrd_core::nonlinearity::*;
use sdrd_core::solver::*;

const EPS_LIST: [f64; 5] = [0.3, 0.15, 0.08, 0.05, 0.03];

fn line(n: usize) -> Grid {
    build_grid(1, &[4.0], &[n]).unwrap()
}

fn decay_problem(seed: u64) -> Problem {
    let g = line(100);
    let u0 = InitialSpec::Random {
        amplitude: 0.01,
        modes: 6,
        seed,
        nonnegative: false,
    }
    .build(&g, RangeTag::Signed)
    .unwrap();
    Problem {
        phi: PhiSpec::biofilm(1.0, 1.0).unwrap().with_symmetric_extension(true),
        reaction: ReactionSpec::scalar_decay(5.0).unwrap(),
        initial: State::Scalar(u0),
        config: SolverConfig {
            dt: 1e-2,
            t_end: 1.0,
            ..SolverConfig::default()
        }
        .with_snapshot_every(5),
    }
}

#[test]
fn single_point_needs_one_ball() {
    let g = line(10);
    let set = SnapshotSet::from_values(g, vec![vec![0.3; 10]], Metric::L1).unwrap();
    for eps in [1e-9, 0.1, 10.0] {
        assert_eq!(greedy_cover(&set, eps).unwrap().counts, vec![1]);
    }
    assert_eq!(epsilon_entropy(&set, 0.1).unwrap(), 0.0);
}

#[test]
fn two_points_split_below_their_distance() {
    let g = line(10);
    let h = g.cell_volume();
    let a = vec![0.0; 10];
    let mut b = vec![0.0; 10];
    b[3] = 1.0;
    let set = SnapshotSet::from_values(g, vec![a, b], Metric::L1).unwrap();
    let d = set.distance(0, 1);
    assert!((d - h).abs() < 1e-15);
    assert_eq!(greedy_cover(&set, 1.01 * d).unwrap().counts, vec![1]);
    assert_eq!(greedy_cover(&set, 0.99 * d).unwrap().counts, vec![2]);
    let l2 = SnapshotSet::from_values(g, set.points().to_vec(), Metric::L2).unwrap();
    assert!((l2.distance(0, 1) - h.sqrt()).abs() < 1e-15);
}

#[test]
fn segment_cover_counts_bracket_the_optimum() {
    // 50 evenly spaced points on a unit segment: an eps-ball holds at most
    // 2 floor(49 eps) + 1 of them, so the optimal cover has ceil(50 / that) balls
    let set = synthetic_family(&line(40), 1, 50).unwrap();
    let eps: f64 = 0.1;
    let d = set.distance(0, 49);
    assert!((d - 1.0).abs() < 1e-12);
    let per_ball = |e: f64| 2 * (e * 49.0 * (1.0 + 1e-12)).floor() as usize + 1;
    let optimum = 50_usize.div_ceil(per_ball(eps));
    let half = 50_usize.div_ceil(per_ball(0.5 * eps));
    let mc = greedy_cover_with(&set, eps, CoverStrategy::MaxCoverage).unwrap().counts[0];
    assert_eq!(mc, optimum);
    let fp = greedy_cover(&set, eps).unwrap().counts[0];
    assert!(fp >= optimum && fp <= half, "{fp} not in [{optimum}, {half}]");
    let entropy = epsilon_entropy(&set, eps).unwrap();
    assert!((entropy - (fp as f64).log2()).abs() < 1e-12);
    assert!((entropy - (optimum as f64).log2()).abs() <= 1.0);
}

#[test]
fn counts_grow_as_radii_shrink() {
    let set = synthetic_family(&line(40), 2, 30).unwrap();
    for strategy in [CoverStrategy::FarthestPoint, CoverStrategy::MaxCoverage] {
        let res = cover_counts(&set, &[0.03, 0.3, 0.08, 0.15, 0.05], strategy).unwrap();
        assert_eq!(res.eps_list, EPS_LIST.to_vec());
        assert!(res.counts.windows(2).all(|w| w[1] >= w[0]), "{:?}", res.counts);
        for (eps, centers) in res.eps_list.iter().zip(&res.centers) {
            for i in 0..set.len() {
                assert!(centers.iter().any(|&c| set.distance(i, c) <= *eps));
            }
        }
    }
}

#[test]
fn dimension_of_synthetic_families() {
    let g = line(40);
    let point = synthetic_family(&g, 0, 2).unwrap();
    assert_eq!(fractal_dimension(&point, &EPS_LIST).unwrap().dimension, 0.0);
    let seg = synthetic_family(&g, 1, 400).unwrap();
    let d1 = fractal_dimension(&seg, &EPS_LIST).unwrap();
    assert!((d1.dimension - 1.0).abs() <= 0.3, "{}", d1.dimension);
    let square = synthetic_family(&g, 2, 150).unwrap();
    let d2 = fractal_dimension(&square, &EPS_LIST).unwrap();
    assert!((d2.dimension - 2.0).abs() <= 0.3, "{}", d2.dimension);
    assert!(!d1.unstable && !d2.unstable);
    assert!(fractal_dimension(&seg, &[0.3, 0.2, 0.1]).is_err());
    assert!(fractal_dimension(&seg, &[0.3, 0.2, 0.1, 0.05]).is_err());
}

#[test]
fn decaying_runs_collapse_to_a_point() {
    let problems: Vec<Problem> = (0..3).map(|s| decay_problem(20 + s)).collect();
    let sample = sample_omega_limit(&problems, 3.0, 5, 0.5, Metric::L1).unwrap();
    assert!(sample.warnings.is_empty());
    assert_eq!(sample.set.len(), 15);
    assert_eq!(greedy_cover(&sample.set, 1e-6).unwrap().counts, vec![1]);
    assert!(sample.set.provenance.iter().all(|p| p.t >= 3.0 - 1e-9));

    let again = sample_omega_limit(&problems, 3.0, 5, 0.5, Metric::L1).unwrap();
    assert_eq!(sample.set, again.set);
}

#[test]
fn attraction_rate_of_linear_decay() {
    let lambda: f64 = 5.0;
    let dt = 1e-2;
    let trajs: Vec<Trajectory> = (0..2).map(|s| solve(&decay_problem(30 + s)).unwrap()).collect();
    let zero = SnapshotSet::from_values(line(100), vec![vec![0.0; 100]], Metric::L1).unwrap();
    let fit = fit_attraction_rate(&trajs, &zero).unwrap();
    let discrete = (1.0 + lambda * dt).ln() / dt;
    assert!(!fit.saturated && !fit.non_exponential);
    assert!((fit.alpha - lambda).abs() < 0.05 * lambda);
    assert!((fit.alpha - discrete).abs() < 1e-3 * discrete, "{} vs {discrete}", fit.alpha);
}

#[test]
fn attraction_fit_saturates_on_exact_hits() {
    let g = line(20);
    let p = Problem {
        phi: PhiSpec::biofilm(1.0, 1.0).unwrap().with_symmetric_extension(true),
        reaction: ReactionSpec::zero(),
        initial: State::Scalar(StateField::zeros(g, RangeTag::Signed)),
        config: SolverConfig {
            dt: 0.1,
            t_end: 1.0,
            ..SolverConfig::default()
        }
        .with_snapshot_every(1),
    };
    let traj = solve(&p).unwrap();
    let zero = SnapshotSet::from_values(g, vec![vec![0.0; 20]], Metric::L1).unwrap();
    let fit = fit_attraction_rate(&[traj], &zero).unwrap();
    assert!(fit.saturated);
    assert!(fit.alpha.is_infinite());
}

#[test]
fn porous_medium_decay_is_fitted_and_flagged() {
    let g = build_grid(1, &[1.0], &[100]).unwrap();
    let u0 = InitialSpec::Bump {
        center: vec![0.5],
        radius: 0.4,
        height: 0.8,
    }
    .build(&g, RangeTag::NonNegative)
    .unwrap();
    let p = Problem {
        phi: PhiSpec::power(2.0).unwrap(),
        reaction: ReactionSpec::zero(),
        initial: State::Scalar(u0),
        config: SolverConfig {
            dt: 1e-2,
            t_end: 5.0,
            ..SolverConfig::default()
        }
        .with_snapshot_every(10),
    };
    let traj = solve(&p).unwrap();
    let zero = SnapshotSet::from_values(g, vec![vec![0.0; 100]], Metric::L1).unwrap();
    let fit = fit_attraction_rate(&[traj], &zero).unwrap();
    assert!(fit.alpha > 0.0 && fit.alpha.is_finite());
    // algebraic decay d ~ t^-1 bends the log-linear fit
    let late = fit.samples.iter().filter(|(t, _)| *t >= 1.0).count();
    assert!(late > 10);
    let (t1, d1) = fit.samples[fit.samples.len() / 2];
    let (t2, d2) = *fit.samples.last().unwrap();
    let local_rate = (d1 / d2).ln() / (t2 - t1);
    assert!(local_rate < fit.alpha);
}
