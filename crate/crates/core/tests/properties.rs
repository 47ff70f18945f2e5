use num_complex::Complex;
use proptest::prelude::*;
use quasiprob::protocol::*;
use quasiprob::*;
use rand::SeedableRng;

fn grid() -> Grid1D {
    Grid1D::new(-12.0, 12.0, 256).unwrap()
}

fn gauss() -> impl Strategy<Value = WaveFunction> {
    (-2.0..2.0f64, -2.0..2.0f64, 0.5..1.2f64)
        .prop_map(|(x0, p0, s)| gaussian_state(&grid(), x0, p0, s, 1.0).unwrap())
}

fn direction() -> impl Strategy<Value = (f64, f64)> {
    (0.0..std::f64::consts::TAU, 0.3..2.0f64).prop_map(|(t, r)| (r * t.cos(), r * t.sin()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn inner_product_is_conjugate_symmetric(a in gauss(), b in gauss()) {
        let ab = a.inner_product(&b).unwrap();
        let ba = b.inner_product(&a).unwrap();
        prop_assert!((ab - ba.conj()).norm() < 1e-12);
        prop_assert!(ab.norm() <= 1.0 + 1e-9);
    }

    #[test]
    fn superposition_is_normalized(a in gauss(), b in gauss(), t in 0.1..3.0f64) {
        let c = Complex::from_polar(1.0, t);
        if let Ok(psi) = superpose(&a, &b, Complex::new(1.0, 0.0), c) {
            prop_assert!((psi.norm_squared() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fourier_preserves_norm(psi in gauss()) {
        let phi = fourier_state(&psi).unwrap();
        prop_assert!((phi.norm_squared() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rotations_compose(psi in gauss(), s in -3.0..3.0f64, t in -3.0..3.0f64) {
        let two = frft(&frft(&psi, s).unwrap(), t).unwrap();
        let one = frft(&psi, s + t).unwrap();
        prop_assert!(two.l2_distance(&one).unwrap() < 1e-8);
    }

    #[test]
    fn pushforward_preserves_mass_and_matches_spectral(psi in gauss(), (a, b) in direction()) {
        let w = wigner(&psi).unwrap();
        let image = pushforward_linear(&w, a, b).unwrap();
        prop_assert!((image.total_mass() - 1.0).abs() < 1e-6);
        let spectral = quadrature_distribution(&psi, QuadratureSpec::new(a, b).unwrap()).unwrap();
        prop_assert!(l1_distance(&image, spectral.as_signed()) < 1e-3);
    }

    #[test]
    fn samples_are_reproducible_and_reachable(psi in gauss(), (a, b) in direction(), seed in any::<u64>()) {
        let mu = quadrature_distribution(&psi, QuadratureSpec::new(a, b).unwrap()).unwrap();
        let draw = |seed| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (0..50).map(|_| mu.sample(&mut rng)).collect::<Vec<f64>>()
        };
        let xs = draw(seed);
        prop_assert_eq!(&xs, &draw(seed));
        let (lo, hi) = mu.support();
        prop_assert!(xs.iter().all(|x| (lo..=hi).contains(x)));
    }

    #[test]
    fn mixture_bets_are_always_admissible(
        psi in gauss(),
        (a, b) in direction(),
        square in any::<bool>(),
        outcomes in prop::collection::vec(-1.0..1.0f64, 1..30),
    ) {
        let mu = quadrature_distribution(&psi, QuadratureSpec::new(a, b).unwrap()).unwrap();
        let f = if square { Statistic::Square } else { Statistic::Identity };
        let c = f.deviation_bound(&mu, mu.expectation(|z| f.apply(z)));
        let mut sk = LlnSkeptic::new(f, c, 6).unwrap();
        let (lo, hi) = mu.support();
        for u in outcomes {
            let bet = sk.bet(1, &mu).unwrap();
            prop_assert!(validate_bet(&bet, &mu, 1e-12).is_ok());
            let r = lo + (u + 1.0) / 2.0 * (hi - lo);
            prop_assert!(bet.eval(r) >= 0.0);
            sk.settle(r);
        }
    }

    #[test]
    fn bets_round_trip_through_json(slope in -1.0..1.0f64, center in -5.0..5.0f64, square in any::<bool>()) {
        let statistic = if square { Statistic::Square } else { Statistic::Identity };
        let bet = Bet::Affine { statistic, slope, center };
        let text = serde_json::to_string(&bet).unwrap();
        prop_assert_eq!(serde_json::from_str::<Bet>(&text).unwrap(), bet);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn capital_follows_the_product_rule(seed in any::<u64>(), shift in -1.0..1.0f64) {
        let lab = Lab::new(grid(), 1.0).unwrap();
        let s = ProtocolSetup {
            protocol: 1,
            rounds: 100,
            experimenter: Schedule {
                states: vec!["fock:0".parse().unwrap(), "gauss:1,-0.5,0.8".parse().unwrap()],
                quads: QuadratureSpec::sweep(5),
            },
            forecaster: ForecasterSpec::Honest,
            skeptic: SkepticSpec::Lln { statistic: Statistic::Square, bound: Bound::Auto, depth: 5 },
            reality: RealitySpec::Shifted { delta: shift },
        };
        let t = s.run(&lab, RunSeed::new(seed, 0)).unwrap();
        t.check().unwrap();
        let mut prev = 0.0;
        for r in &t.rounds {
            prop_assert_eq!(r.log_capital, prev + r.bet_descriptor.eval(r.r).ln());
            prev = r.log_capital;
        }
        let again = s.run(&lab, RunSeed::new(seed, 0)).unwrap();
        prop_assert_eq!(again.log_capitals(), t.log_capitals());
    }
}
