use proptest::prelude::*;
use witten_core::decay::*;
use witten_core::lattice::{Lattice, SiteSet};
use witten_core::model::{max_admissible_kappa, Hamiltonian};
use witten_core::sampler::{correlation_matrix, run_chain, ChainConfig, CorrelationMatrix, Proposal};
use witten_core::witten_grid::{GridFunction, GridSpec, SolverOptions, WittenGrid};
use witten_core::{Error, Observable};

fn kac(m: usize, nu: f64) -> Hamiltonian<f64> {
    Hamiltonian::kac(Lattice::chain(m).unwrap(), nu).unwrap()
}

fn heat_bath(m: usize, n: usize, seed: u64) -> ChainConfig<f64> {
    ChainConfig {
        proposal: Proposal::SingleSiteIndependent,
        proposal_scale: 1.0,
        ..ChainConfig::new(m, n, seed)
    }
}

#[test]
fn weighted_bound_examples() {
    let opts = SolverOptions::default();
    let q = Hamiltonian::<f64>::quadratic(Lattice::chain(2).unwrap());
    let grid = WittenGrid::new(&q, GridSpec::new(8.0, 41, 2).unwrap()).unwrap();
    let spec = *grid.spec();
    let s0 = SiteSet::singleton(0);

    let c = GridFunction::constant(spec, 2.0);
    let r = weighted_gradient_bound(&grid, &c, &s0, 0.3, &opts).unwrap();
    assert_eq!(r.sup_weighted_norm, 0.0);
    assert!(r.pass);

    let x0 = GridFunction::from_fn(spec, |x| x[0]);
    let r = weighted_gradient_bound(&grid, &x0, &s0, 0.3, &opts).unwrap();
    assert_eq!(r.delta0, 1.0);
    assert!((r.sup_weighted_norm - 1.0).abs() < 1e-6, "{r:?}");
    assert!((r.rhs_bound - 1.0).abs() < 1e-12, "{r:?}");
    assert!(r.pass);

    let h = kac(3, 0.05);
    let grid = WittenGrid::new(&h, GridSpec::new(8.0, 21, 3).unwrap()).unwrap();
    let x0 = GridFunction::from_fn(*grid.spec(), |x| x[0]);
    let r = weighted_gradient_bound(&grid, &x0, &s0, 0.2, &opts).unwrap();
    assert!(r.pass && r.sup_weighted_norm < 0.8 * r.rhs_bound, "{r:?}");
}

#[test]
fn inadmissible_kappa_is_refused() {
    let h = kac(2, 0.05);
    let grid = WittenGrid::new(&h, GridSpec::new(8.0, 21, 2).unwrap()).unwrap();
    let x0 = GridFunction::from_fn(*grid.spec(), |x| x[0]);
    let r = weighted_gradient_bound(&grid, &x0, &SiteSet::singleton(0), 5.0, &SolverOptions::default());
    assert!(matches!(r, Err(Error::Inadmissible { .. })));
    let c = covariance_decay_check(
        &h,
        CovarianceRoute::Grid(&grid),
        &Observable::Coordinate(0),
        &Observable::Coordinate(1),
        5.0,
        None,
    );
    assert!(matches!(c, Err(Error::Inadmissible { .. })));
}

#[test]
fn weighted_bound_is_monotone_in_kappa_and_size_independent() {
    let nu = 0.05;
    let kmax = max_admissible_kappa(nu, 1, 0.05).unwrap();
    let kappas = [0.0, 0.1, 0.2, 0.5, 1.0, 1.5, kmax];
    let s0 = SiteSet::singleton(0);
    let mut at_kmax = Vec::new();
    for m in 2..=4 {
        let h = kac(m, nu);
        let grid = WittenGrid::new(&h, GridSpec::new(8.0, 15, m).unwrap()).unwrap();
        let g = GridFunction::from_fn(*grid.spec(), |x| x[0]);
        let f = grid.solve_zero_mean(&g, &SolverOptions::default()).unwrap().field;
        let (df, dg) = (f.gradient(), g.gradient());
        let reports: Vec<_> = kappas
            .iter()
            .map(|&k| weighted_gradient_report(&grid, &df, &dg, &s0, k).unwrap())
            .collect();
        for w in reports.windows(2) {
            assert!(w[1].sup_weighted_norm >= w[0].sup_weighted_norm);
            assert!(w[1].rhs_bound >= w[0].rhs_bound);
        }
        assert!(reports.iter().all(|r| r.pass), "{reports:?}");
        at_kmax.push(reports.last().unwrap().sup_weighted_norm);
    }
    for w in at_kmax.windows(2) {
        assert!(w[1] <= 1.05 * w[0], "{at_kmax:?}");
    }
}

#[test]
fn grid_decay_checks() {
    let q = Hamiltonian::<f64>::quadratic(Lattice::chain(2).unwrap());
    let grid = WittenGrid::new(&q, GridSpec::new(8.0, 81, 2).unwrap()).unwrap();
    let route = CovarianceRoute::Grid(&grid);
    let x0 = Observable::Coordinate(0);
    let x1 = Observable::Coordinate(1);
    let v = covariance_decay_check(&q, route, &x0, &x0, 0.3, None).unwrap();
    assert_eq!(v.distance, 0);
    assert!((v.lhs - 1.0).abs() < 1e-9 && (v.rhs - 1.0).abs() < 1e-12, "{v:?}");
    assert!(v.pass);
    let c = covariance_decay_check(&q, route, &x0, &x1, 0.3, None).unwrap();
    assert!(c.lhs < 1e-9 && c.pass, "{c:?}");
    assert!(matches!(
        covariance_decay_check(&q, route, &Observable::Product(0, 1), &x1, 0.3, None),
        Err(Error::OverlappingSupports)
    ));

    let h = kac(2, 0.1);
    let grid = WittenGrid::new(&h, GridSpec::new(8.0, 61, 2).unwrap()).unwrap();
    let kmax = max_admissible_kappa(0.1, 1, 0.05).unwrap();
    for k in [0.1, 0.3, kmax] {
        let c = covariance_decay_check(&h, CovarianceRoute::Grid(&grid), &x0, &x1, k, None).unwrap();
        assert!(c.pass && c.cov > 0.0, "{c:?}");
    }
    let tight = covariance_decay_check(&h, CovarianceRoute::Grid(&grid), &x0, &x1, 0.1, Some(1e-6)).unwrap();
    assert!(!tight.pass);
}

#[test]
fn chain_decay_check_and_profile_on_six_sites() {
    let nu = 0.05;
    let lat = Lattice::chain(6).unwrap();
    let h = Hamiltonian::kac(lat.clone(), nu).unwrap();
    let chain = run_chain(&h, &heat_bath(6, 1_000_000, 21)).unwrap();
    let kmax = max_admissible_kappa(nu, 1, 0.05).unwrap();
    let c = covariance_decay_check(
        &h,
        CovarianceRoute::Chain(&chain),
        &Observable::Coordinate(0),
        &Observable::Coordinate(5),
        kmax,
        None,
    )
    .unwrap();
    assert!(c.pass, "{c:?}");
    assert_eq!(c.distance, 5);

    let cm = correlation_matrix(&chain).unwrap();
    let p = correlation_profile(&cm, &lat, 0, Aggregation::Max).unwrap();
    assert!(p.entries.len() >= 2);
    assert!(p.entries.windows(2).all(|w| w[1].abs_correlation < w[0].abs_correlation));
    assert!(p.is_decreasing_within(3.0));
}

#[test]
fn profile_of_identity_stops_at_distance_one() {
    let lat = Lattice::chain(5).unwrap();
    let id = CorrelationMatrix::from_correlations(5, |i, j| if i == j { 1.0 } else { 0.0 });
    let p = correlation_profile(&id, &lat, 0, Aggregation::Max).unwrap();
    assert_eq!(p.entries.len(), 1);
    assert_eq!((p.entries[0].distance, p.entries[0].abs_correlation), (0, 1.0));
    assert_eq!(p.truncated_at, Some(1));
    assert!(matches!(fit_decay_rate(&p), Err(Error::TooFewFitPoints { got: 1 })));
}

#[test]
fn synthetic_profile_is_reproduced_and_inverted() {
    let lat = Lattice::new_box(&[4, 3]).unwrap();
    let corr = CorrelationMatrix::from_correlations(lat.len(), |i, j| {
        (-0.5 * lat.distance(i, j).unwrap() as f64).exp()
    });
    for agg in [Aggregation::Max, Aggregation::Mean] {
        let p = correlation_profile(&corr, &lat, 0, agg).unwrap();
        assert_eq!(p.entries.len(), 6);
        assert_eq!(p.truncated_at, None);
        for e in &p.entries {
            assert_eq!(e.abs_correlation, (-0.5 * e.distance as f64).exp());
        }
        let fit = fit_decay_rate(&p).unwrap();
        assert!((fit.kappa_fit - 0.5).abs() < 1e-14 && (fit.c_fit - 1.0).abs() < 1e-14);
        assert!((fit.r_squared - 1.0).abs() < 1e-14);
    }
}

#[test]
fn fit_examples() {
    let e = (-0.5f64).exp();
    let fit = fit_decay_rate(&DecayProfile::from_points(&[(0, 1.0, 0.0), (1, e, 0.0), (2, e * e, 0.0)])).unwrap();
    assert!((fit.kappa_fit - 0.5).abs() < 1e-15);
    assert!((fit.c_fit - 1.0).abs() < 1e-15);
    assert_eq!(fit.r_squared, 1.0);
    assert_eq!(fit.n_points, 3);

    let flat = fit_decay_rate(&DecayProfile::from_points(&[(0, 0.3, 0.0), (1, 0.3, 0.0), (2, 0.3, 0.0)])).unwrap();
    assert_eq!(flat.kappa_fit, 0.0);
    assert!((flat.c_fit - 0.3).abs() < 1e-15);

    assert!(matches!(
        fit_decay_rate(&DecayProfile::from_points(&[(0, 1.0, 0.0), (1, 0.5, 0.0)])),
        Err(Error::TooFewFitPoints { got: 2 })
    ));
}

#[test]
fn profile_and_fit_csv() {
    let p = DecayProfile::from_points(&[(0, 1.0, 0.0), (1, 0.25, 0.01), (2, 0.0625, 0.01)]);
    let mut buf = Vec::new();
    p.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("distance,abs_correlation,stderr,pairs"));
    assert_eq!(text.lines().nth(2), Some("1,2.5000000000000000e-1,1.0000000000000000e-2,1"));
    let mut buf = Vec::new();
    fit_decay_rate(&p).unwrap().write_csv(&mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("kappa_fit,c_fit,r_squared,n_points,kappa_stderr\n"));
}

proptest! {
    #[test]
    fn fit_inverts_log_linear_profiles(kappa in 0.01f64..3.0, c in 0.01f64..10.0, n in 3usize..10) {
        let pts: Vec<_> = (0..n).map(|d| (d, c * (-kappa * d as f64).exp(), 0.0)).collect();
        let fit = fit_decay_rate(&DecayProfile::from_points(&pts)).unwrap();
        prop_assert!((fit.kappa_fit - kappa).abs() <= 1e-12 * (1.0 + kappa));
        prop_assert!((fit.c_fit / c - 1.0).abs() <= 1e-12);
        prop_assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn fit_is_scale_covariant(
        ys in proptest::collection::vec(0.001f64..1.0, 3..8),
        s in 0.01f64..100.0,
    ) {
        let base: Vec<_> = ys.iter().enumerate().map(|(d, &y)| (d, y, 0.0)).collect();
        let scaled: Vec<_> = ys.iter().enumerate().map(|(d, &y)| (d, s * y, 0.0)).collect();
        let a = fit_decay_rate(&DecayProfile::from_points(&base)).unwrap();
        let b = fit_decay_rate(&DecayProfile::from_points(&scaled)).unwrap();
        prop_assert!((a.kappa_fit - b.kappa_fit).abs() <= 1e-12);
        prop_assert!((b.c_fit / (s * a.c_fit) - 1.0).abs() <= 1e-12);
        prop_assert!((a.r_squared - b.r_squared).abs() <= 1e-9);
    }
}
