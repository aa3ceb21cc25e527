use num_traits::ToPrimitive;
use sphere_bl::enumerate::{enumerate_symmetries, DEFAULT_CAP};
use sphere_bl::exponents::balanced_exponent;
use sphere_bl::extremal::{
    critical_gamma, default_eps_grid, extremal_function, local_growth_experiment, norm_boundary_scan,
    radial_oracle, sharpness_experiment, Classification, ExtremalParams, GrowthFunction,
};
use sphere_bl::numbers::to_rational;
use sphere_bl::quadrature::{holder_verify, Integrand};
use sphere_bl::{BalancedType, MultiIndex, QuadConfig, Symmetry};

fn cfg(samples: u64, seed: u64) -> QuadConfig {
    QuadConfig::new(samples, seed).with_shards(4)
}

fn bt(n: usize, l: &[usize]) -> BalancedType {
    BalancedType::new(n, l.to_vec()).unwrap()
}

fn grid(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}

#[test]
fn critical_gamma_matches_exponent_up_to_eight() {
    for n in 3..=8 {
        for t in BalancedType::all_for_dimension(n).unwrap() {
            let g = critical_gamma(&t).unwrap();
            assert_eq!(g.0.recip(), to_rational(&balanced_exponent(&t).unwrap()), "{t:?}");
            assert!((radial_oracle(&t, g.to_f64()) + 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn four_dimensional_pairs_diverge_at_critical_gamma() {
    let rep = sharpness_experiment(&bt(4, &[2, 2]), 3.6, Some(0.25), &default_eps_grid(), &cfg(200_000, 3)).unwrap();
    assert_eq!(rep.expected, Classification::DivergentLog);
    assert!(rep.rhs_relative_change.unwrap() < 0.05, "{rep:?}");
    assert!(rep.slope > 3.0 * rep.slope_stderr, "{} ± {}", rep.slope, rep.slope_stderr);
    assert!(rep.passed);
}

#[test]
fn lhs_grows_as_truncation_shrinks() {
    let rep = sharpness_experiment(&bt(3, &[2]), 1.8, None, &grid(3, 12), &cfg(100_000, 4)).unwrap();
    assert_eq!(rep.gamma, 0.5);
    for w in rep.lhs.windows(2) {
        assert!(w[1].value >= w[0].value - 3.0 * (w[0].stderr + w[1].stderr));
    }
}

#[test]
fn norm_ratios_approach_the_power_law() {
    // ‖f‖_2^2 grows like ε^{-(n-1)(γp-1)} = ε^{-1} for n = 3, γ = 3/4.
    let s = Symmetry::new(vec![MultiIndex::from_positions(3, [0, 1]).unwrap()]).unwrap();
    let rep = norm_boundary_scan(&s, 0.75, 2.0, &grid(8, 14), &cfg(200_000, 5)).unwrap();
    let tail = &rep.lhs[rep.lhs.len() - 3..];
    for w in tail.windows(2) {
        let ratio = w[1].value / w[0].value;
        assert!((ratio - 2.0).abs() < 0.2, "ratio {ratio}");
    }
    assert_eq!(rep.observed, Classification::DivergentPower);
}

#[test]
fn converged_norms_are_cauchy() {
    let s = Symmetry::new(vec![MultiIndex::from_positions(3, [0, 2]).unwrap()]).unwrap();
    let rep = norm_boundary_scan(&s, 0.25, 2.0, &grid(6, 14), &cfg(100_000, 6)).unwrap();
    let last = rep.lhs.len() - 1;
    let change = (rep.lhs[last].value - rep.lhs[last - 1].value).abs() / rep.lhs[last].value;
    assert!(change < 0.01, "{change}");
    assert!(rep.passed);
}

#[test]
fn inequality_holds_along_the_critical_family() {
    let t = bt(3, &[2]);
    let fams = enumerate_symmetries(&t, DEFAULT_CAP).unwrap();
    let p = balanced_exponent(&t).unwrap().to_f64().unwrap();
    for (k, eps) in grid(3, 15).into_iter().step_by(4).enumerate() {
        let fs: Vec<_> = fams
            .iter()
            .map(|s| extremal_function(s, ExtremalParams::new(1.0 / p, eps).unwrap()).unwrap())
            .collect();
        let refs: Vec<&dyn Integrand> = fs.iter().map(|f| f as &dyn Integrand).collect();
        let rec = holder_verify(&fams, &refs, &[p; 3], &cfg(200_000, 10 + k as u64)).unwrap();
        assert!(rec.pass, "eps {eps}: {rec:?}");
    }
}

#[test]
fn bumps_saturate() {
    let fams = enumerate_symmetries(&bt(3, &[2]), DEFAULT_CAP).unwrap();
    let rep =
        local_growth_experiment(&fams, None, 0.1, GrowthFunction::Bump, &[2.0, 4.0, 8.0, 16.0], &cfg(400_000, 7))
            .unwrap();
    assert!(rep.fitted_slope.abs() < 0.1 + 3.0 * rep.slope_stderr, "{rep:?}");
    assert!(rep.below_bound);
    assert_eq!(rep.attains, None);
}

#[test]
fn power_decay_stays_below_delta() {
    let t = bt(4, &[2, 2]);
    let fams = enumerate_symmetries(&t, DEFAULT_CAP).unwrap();
    let r: Vec<f64> = (0..=8).map(|k| 2f64.powi(k)).collect();
    let rep = local_growth_experiment(&fams, None, 0.1, GrowthFunction::PowerDecay, &r, &cfg(200_000, 8)).unwrap();
    assert_eq!(rep.delta_target.to_string(), "1");
    assert!(rep.fitted_slope <= 1.0 + 3.0 * rep.slope_stderr + 0.1, "{rep:?}");
}

#[test]
fn reports_round_trip_and_repeat() {
    let s = Symmetry::new(vec![MultiIndex::from_positions(3, [1, 2]).unwrap()]).unwrap();
    let a = norm_boundary_scan(&s, 0.5, 1.5, &grid(3, 8), &cfg(5_000, 9)).unwrap();
    let b = norm_boundary_scan(&s, 0.5, 1.5, &grid(3, 8), &cfg(5_000, 9)).unwrap();
    assert_eq!(a, b);
    let text = serde_json::to_string(&a).unwrap();
    assert_eq!(serde_json::from_str::<sphere_bl::extremal::DivergenceReport>(&text).unwrap(), a);
}
