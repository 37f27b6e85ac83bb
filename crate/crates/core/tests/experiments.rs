//! Reference-solution and sweep checks beyond the acceptance criteria.

use pdcp::experiments::{
    build_reference, build_reference_1d, convergence_sweep, estimate_order, Market, MethodRun, ReferenceProtocol,
    RegionOfInterest, Setup,
};
use pdcp::stepper::{solve_pdcp, GridKind, Method, SolverConfig, StepperSpec};
use pdcp::{MarketParams1D, MarketParams2D};

#[test]
fn exact_lcp_reference_matches_penalty_run_at_same_resolution() {
    let p = MarketParams1D::reference_put();
    let setup = Setup::new(Market::OneAsset(p), 200).unwrap();
    let reference = build_reference_1d(&p, 200).unwrap();
    let spec = StepperSpec::new(Method::DIRK_A, 2, GridKind::Quadratic, 2000);
    let (u, _) = solve_pdcp(&setup.problem, &spec, &SolverConfig::default()).unwrap();
    let roi = RegionOfInterest::default_for(&setup.market);
    let d = pdcp::roi_max_error(&reference.u_ref, &u, &setup.grids(), &roi).unwrap();
    assert!(d <= 1e-5 * p.strike, "{d}");
    let v = setup.value_at_strike(&reference.u_ref).unwrap();
    assert!(v > 0.0 && v < p.strike);
}

#[test]
fn swapping_the_assets_transposes_the_reference() {
    let p = MarketParams2D::reference_put_on_average();
    let q = MarketParams2D { sigma1: p.sigma2, sigma2: p.sigma1, ..p };
    let m = 50;
    let protocol = ReferenceProtocol::two_asset();
    let cfg = SolverConfig::default();
    let a = build_reference(&Setup::new(Market::TwoAsset(p), m).unwrap(), &protocol, &cfg).unwrap();
    let b = build_reference(&Setup::new(Market::TwoAsset(q), m).unwrap(), &protocol, &cfg).unwrap();
    for i in 0..m {
        for j in 0..m {
            assert!((a.u_ref[i * m + j] - b.u_ref[j * m + i]).abs() <= 1e-8, "({i}, {j})");
        }
    }
    let sym = MarketParams2D { sigma2: p.sigma1, ..p };
    let setup = Setup::new(Market::TwoAsset(sym), m).unwrap();
    let c = build_reference(&setup, &protocol, &cfg).unwrap();
    for i in 0..m {
        for j in 0..i {
            let d = (c.u_ref[i * m + j] - c.u_ref[j * m + i]).abs();
            assert!(d <= 1e-8, "({i}, {j}) {d:e}");
        }
    }
    for (x, g) in c.u_ref.iter().zip(&setup.problem.u0) {
        assert!(*x >= g - 1e-4 * sym.strike);
    }
}

#[test]
fn backward_euler_is_first_order_over_the_full_sweep() {
    let setup = Setup::new(Market::OneAsset(MarketParams1D::reference_put()), 200).unwrap();
    let reference = build_reference(&setup, &ReferenceProtocol::one_asset(), &SolverConfig::default()).unwrap();
    let ns: Vec<usize> = (10..=100).collect();
    let roi = RegionOfInterest::default_for(&setup.market);
    let rep = convergence_sweep(
        &setup,
        &reference,
        &[MethodRun::new(Method::BE, 2)],
        &ns,
        GridKind::Quadratic,
        &roi,
        &SolverConfig::default(),
    )
    .unwrap();
    assert_eq!(rep.rows.len(), 3 * ns.len());
    let p = estimate_order(&rep.series("be", "value")).unwrap().order;
    assert!((p - 1.0).abs() <= 0.15, "{p}");
    let fits = rep.fit_orders(Some((50, 100)));
    assert!(fits.iter().all(|f| f.n_min == 50 && f.n_max == 100 && f.estimate.is_ok()));
}
