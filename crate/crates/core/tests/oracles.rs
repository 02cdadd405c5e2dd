mod common;

use approx::assert_relative_eq;
use ruinpool::heavy_tail::rv_tail_approx;
use ruinpool::inversion::{moment_curves, ruin_curve, ruin_curve_raw, StehfestPlan};
use ruinpool::ladder::{atom_at_zero, drift_ladder, pi, pi_jet};
use ruinpool::phase_type::{running_max_ph, spectral_tail};
use ruinpool::simulate::{simulate_paths, Horizon, SimOptions};
use ruinpool::{ClaimDistribution, LevyRegime, ModelSpec};

/// One client, Exp(mu) claim, premium r before the claim and none after:
/// the maximum is (B - r T)^+ on {T < T_beta}, with r T ~ Exp(lambda / r).
fn single_client(lc: f64, r: f64, mu: f64) -> ModelSpec {
    ModelSpec::drift(vec![lc], ClaimDistribution::Exponential { mu }, vec![0.0, r]).unwrap()
}

#[test]
fn single_client_transform_closed_form() {
    for (lc, beta, r, mu) in [(1.0, 1.0, 1.0, 1.0), (0.3, 2.0, 0.7, 2.5), (4.0, 0.5, 3.0, 0.2)] {
        let model = single_client(lc, r, mu);
        let lam = lc + beta;
        let nu = lam / r;
        for a in [0.0, 0.3, 1.0, 7.0] {
            let exact = 1.0 - lc / lam + lc / lam * (mu / (nu + mu) + nu / (nu + mu) * mu / (mu + a));
            assert_relative_eq!(pi(&model, beta, 1, a).unwrap(), exact, max_relative = 1e-13);
        }
        // moments from E[(B - E)^+] = nu / (nu + mu) / mu and E[((B - E)^+)^2] = 2 nu / (nu + mu) / mu^2
        let jet = pi_jet(&model, beta, 1).unwrap();
        let p = lc / lam * nu / (nu + mu);
        assert_relative_eq!(-jet.d1, p / mu, max_relative = 1e-12);
        assert_relative_eq!(jet.d2, 2.0 * p / (mu * mu), max_relative = 1e-12);
    }
}

#[test]
fn single_client_moment_curves_closed_form() {
    // E Ybar(t) = int_0^t lc e^{-lc s} e^{-mu r s} / mu ds
    let (lc, r, mu) = (0.8, 1.5, 0.7);
    let model = single_client(lc, r, mu);
    let plan = StehfestPlan::default();
    let ts = [0.5, 2.0, 6.0];
    let curves = moment_curves(&model, &ts, &plan).unwrap();
    let k = lc + mu * r;
    for (i, t) in ts.iter().enumerate() {
        let mass = 1.0 - (-k * t).exp();
        let m1 = lc / (mu * k) * mass;
        let m2 = 2.0 * lc / (mu * mu * k) * mass;
        // N = 14 resolves these curves to about 1e-4
        assert!((curves.mean[i] - m1).abs() < 2e-4, "t {t}: {} vs {m1}", curves.mean[i]);
        assert!((curves.second[i] - m2).abs() < 2e-4);
        assert!((curves.var[i] - (m2 - m1 * m1)).abs() < 2e-4);
    }
}

#[test]
fn ruin_curve_matches_phase_type_tail() {
    let model = common::fig4_model();
    let beta = 0.5;
    let ph = running_max_ph(&model, beta, model.m()).unwrap();
    let us = [1.0, 5.0, 10.0];
    // the shoulder of this tail needs more terms than the default for 1e-4
    for (n, tol) in [(14, 1e-3), (20, 1e-4)] {
        let p = ruin_curve(&model, beta, &us, &StehfestPlan::new(n).unwrap()).unwrap();
        for (u, p) in us.iter().zip(&p) {
            assert!((p - ph.tail(*u)).abs() < tol, "N {n}, u {u}: {p} vs {}", ph.tail(*u));
        }
    }
}

#[test]
fn stehfest_order_is_stable() {
    let us = [0.5, 1.0, 5.0, 10.0];
    for (model, beta) in common::battery(12, 3, 4) {
        let a = ruin_curve_raw(&model, beta, &us, &StehfestPlan::new(14).unwrap()).unwrap();
        let b = ruin_curve_raw(&model, beta, &us, &StehfestPlan::new(16).unwrap()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-4, "{x} vs {y}");
            // near-zero tails come back as small negatives before clamping
            assert!((-1e-5..=1.0 + 1e-5).contains(x), "raw value {x} out of range");
        }
    }
}

#[test]
fn atom_matches_large_alpha_limit() {
    for (model, beta) in common::battery(30, 4, 8) {
        let spec = drift_ladder(&model, beta, model.m()).unwrap();
        let atom = atom_at_zero(&spec, model.m()).unwrap();
        let far = pi(&model, beta, model.m(), 1e9).unwrap();
        assert!((far - atom).abs() < 1e-6, "{far} vs {atom}");
    }
}

#[test]
fn spectral_tail_multiplicity() {
    for claim in [ClaimDistribution::Exponential { mu: 1.0 }, ClaimDistribution::Erlang { k: 2, mu: 1.0 }] {
        let d1 = claim.dominant_multiplicity().unwrap();
        for m in 1..=3 {
            let model =
                ModelSpec::drift((1..=m).map(|n| n as f64).collect(), claim.clone(), (0..=m).map(|n| n as f64).collect())
                    .unwrap();
            let ph = running_max_ph(&model, 1.0, m).unwrap();
            let st = spectral_tail(&ph, m, d1).unwrap();
            assert_eq!(st.mult, m * d1);
            assert!(st.stable_from.is_finite());
            for k in [1.0, 2.0, 4.0] {
                let r = st.ratio(&ph, k * st.stable_from);
                assert!((r - 1.0).abs() < 0.01, "m {m}: ratio {r}");
            }
        }
    }
}

#[test]
fn lomax_inversion_follows_asymptote() {
    let m = 3;
    let model = ModelSpec::drift(
        (1..=m).map(|n| n as f64).collect(),
        ClaimDistribution::Lomax { c: 1.0, eps: 1.5 },
        (0..=m).map(|n| (n * n) as f64).collect(),
    )
    .unwrap();
    let u = 100.0;
    let p = ruin_curve(&model, 0.0, &[u], &StehfestPlan::default()).unwrap()[0];
    let approx = rv_tail_approx(&model, 0.0, u).unwrap();
    assert!((p / approx - 1.0).abs() < 0.2, "{p} vs {approx}");
}

#[test]
fn monte_carlo_matches_brownian_model_moments() {
    // two clients with a Brownian small-client part in every regime
    let claim = ClaimDistribution::Exponential { mu: 0.5 };
    let model = ModelSpec::new(
        vec![0.5, 1.0],
        vec![claim.clone(), claim],
        (0..=2).map(|n| LevyRegime::BrownianDrift { r: 1.0 + n as f64, sigma2: 1.0 }).collect(),
    )
    .unwrap();
    let beta = 0.7;
    let jet = pi_jet(&model, beta, 2).unwrap();
    let opts = SimOptions { n_paths: 100_000, seed: 21, levels: vec![], alphas: vec![1.0], threads: None };
    let s = simulate_paths(&model, &Horizon::Killed { beta }, &opts).unwrap();
    assert!(s.max_moments[0].mean.covers(-jet.d1, 4.0), "{:?} vs {}", s.max_moments[0].mean, -jet.d1);
    assert!(s.max_moments[0].second.covers(jet.d2, 4.0));
    assert!(s.lst[0].covers(pi(&model, beta, 2, 1.0).unwrap(), 4.0));
}
