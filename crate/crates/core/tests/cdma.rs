//! CDMA network model: the large-M reduction against simulation, reference
//! values, monotonicity, the alpha search and the user-count optimum.

use laguerre_core::bounds::{peak_average_lower, MaxentDensity};
use laguerre_core::cdma::{cdma_lower_bound_at, simulate_interference};
use laguerre_core::verify::mi_monte_carlo;
use laguerre_core::{
    alpha_star, cdma_lower_bound, cdma_pmf_row, effective_params, optimal_users, sum_capacity, CdmaConfig,
    ChannelParams, NoiseTracking, PowerConstraints,
};

const N0: u32 = 31;
const CAP: NoiseTracking = NoiseTracking::Cap;

fn both(a: f64, e: f64) -> PowerConstraints {
    PowerConstraints::both(a, e).unwrap()
}

fn per_user(c: &PowerConstraints, m: u32) -> f64 {
    cdma_lower_bound(c, m, N0, CAP).unwrap().bound.value
}

#[test]
fn interference_sum_follows_the_large_m_reduction() {
    for (k, &m) in [100u32, 1000, 10_000].iter().enumerate() {
        let cfg = CdmaConfig::new(m, N0, 1.0).unwrap();
        let trials = if m == 10_000 { 2000 } else { 5000 };
        let (mean, se) = simulate_interference(&cfg, trials, 11 + k as u64).unwrap();
        let want = effective_params(&cfg).unwrap().noise_mean;
        assert!((mean - want).abs() <= 3.0 * se, "M={m}: {mean} vs {want} (se {se})");
    }
}

#[test]
fn effective_channel_examples() {
    let e = effective_params(&CdmaConfig::new(2, 1, 1.0).unwrap()).unwrap();
    assert_eq!((e.gain, e.noise_mean), (0.5, 0.5));
    let cfg = CdmaConfig::new(100, N0, 5.0).unwrap();
    let e = effective_params(&cfg).unwrap();
    assert!((e.noise_mean - 0.159_677_419_354_838_7).abs() < 1e-15);
    for &x in &[0.0, 3.0, 250.0] {
        let row = cdma_pmf_row(x, &cfg, 1e-12).unwrap();
        assert!((row.total() - 1.0).abs() < 1e-9);
        assert!((row.mean() - (x * e.gain + e.noise_mean)).abs() < 1e-6, "x={x}");
    }
}

// 40-digit evaluations of the printed expressions; the peak-form values are
// the maximum over a 400-point alpha grid, attained at alpha = E/A.
#[test]
fn reference_values() {
    let avg = PowerConstraints::new(None, Some(10.0)).unwrap();
    let v = per_user(&avg, 50);
    assert!((v - -1.018_097_135_026_755_7).abs() < 1e-9, "{v}");
    for (a, e, m, want) in [
        (100.0, 10.0, 10, -0.294_872_668_779_342_3),
        (1000.0, 100.0, 5, 0.397_585_898_724_451_9),
        (1e4, 1e3, 50, -0.642_495_614_736_145_4),
    ] {
        let b = cdma_lower_bound(&both(a, e), m, N0, CAP).unwrap();
        assert!((b.bound.value - want).abs() < 1e-9, "A={a} M={m}: {}", b.bound.value);
        assert!((b.alpha.unwrap() - e / a).abs() < 1e-12);
    }
}

#[test]
fn peak_form_is_the_independent_noise_bound_on_scaled_powers() {
    let (a, e, m) = (1000.0, 100.0, 5u32);
    let beta = (m as f64 - 1.0) / (m as f64 * N0 as f64);
    let direct = peak_average_lower(a / m as f64, e / m as f64, beta * e).unwrap().value;
    assert!((per_user(&both(a, e), m) - direct).abs() < 1e-12);
}

#[test]
fn nonincreasing_in_users() {
    for &(a, e) in &[(100.0, 10.0), (1000.0, 100.0), (1e4, 500.0), (1000.0, 900.0)] {
        let c = both(a, e);
        let vals: Vec<f64> = [2, 5, 10, 50, 200].iter().map(|&m| per_user(&c, m)).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0]), "A={a} E={e}: {vals:?}");
    }
    let avg = PowerConstraints::new(None, Some(10.0)).unwrap();
    let vals: Vec<f64> = [2, 5, 10, 50, 200].iter().map(|&m| per_user(&avg, m)).collect();
    assert!(vals.windows(2).all(|w| w[1] <= w[0]), "{vals:?}");
}

#[test]
fn nondecreasing_in_power() {
    for &m in &[2u32, 10, 50] {
        for &alpha in &[0.05, 0.2, 1.0 / 3.0] {
            let vals: Vec<f64> = (0..20)
                .map(|k| {
                    let a = 100.0 * 1.3f64.powi(k);
                    per_user(&both(a, alpha * a), m)
                })
                .collect();
            assert!(
                vals.windows(2).all(|w| w[1] >= w[0] - 1e-12),
                "M={m} alpha={alpha}: {vals:?}"
            );
        }
        // With the noise following the power actually used, a larger E only
        // widens the alpha range.
        let in_e: Vec<f64> = (1..20)
            .map(|k| {
                let c = both(500.0, 8.0 * k as f64);
                cdma_lower_bound(&c, m, N0, NoiseTracking::Realized)
                    .unwrap()
                    .bound
                    .value
            })
            .collect();
        assert!(in_e.windows(2).all(|w| w[1] >= w[0] - 1e-12), "M={m}: {in_e:?}");
    }
}

#[test]
fn cap_tracked_noise_can_make_more_power_worse() {
    // As printed, E also sets the interference level, and past some point
    // the extra noise outweighs the extra signal.
    let c = |e: f64| per_user(&both(500.0, e), 2);
    assert!((c(112.0) - 1.082_999_471_807_884_2).abs() < 1e-9);
    assert!((c(152.0) - 1.050_294_786_340_810_7).abs() < 1e-9);
    assert!(c(8.0) < c(16.0));
}

#[test]
fn raising_the_peak_alone_can_lower_the_bound() {
    // With E held fixed the shaping term loses more than the penalty term
    // gains, so the peak-form expression is not monotone in A even though
    // capacity is. Values from the 40-digit evaluation, maximised over alpha.
    let c = |a: f64| per_user(&both(a, 20.0), 2);
    assert!((c(100.0 * 1.3f64.powi(3)) - 0.764_226_861_685_170_1).abs() < 1e-9);
    assert!((c(100.0 * 1.3f64.powi(18)) - 0.760_925_823_945_025_8).abs() < 1e-9);
    assert!(c(100.0) < c(130.0));
}

#[test]
fn alpha_search() {
    let cases = [
        (100.0, 10.0, 10u32),
        (1000.0, 100.0, 5),
        (1e4, 500.0, 20),
        (60.0, 15.0, 3),
    ];
    for (a, e, m) in cases {
        let c = both(a, e);
        let cap = (e / a).min(1.0 / 3.0);
        let s = alpha_star(&c, m, N0, CAP).unwrap();
        assert!(s > 0.0 && s <= cap, "A={a} E={e}: {s}");
        let at = |x: f64| cdma_lower_bound_at(&c, m, N0, CAP, x).unwrap();
        let here = at(s);
        for x in [s - 0.005, s + 0.005] {
            if x > 0.0 && x <= cap {
                assert!(here >= at(x), "A={a} E={e}: alpha*={s} loses to {x}");
            }
        }
        // dominance of the maximised value over fixed alpha = E/A
        assert!(per_user(&c, m) >= at(cap) - 1e-12);
    }
    // One third when the average cap is slack or absent.
    assert_eq!(alpha_star(&both(90.0, 45.0), 10, N0, CAP).unwrap(), 1.0 / 3.0);
    let peak_only = PowerConstraints::new(Some(200.0), None).unwrap();
    assert_eq!(alpha_star(&peak_only, 10, N0, CAP).unwrap(), 1.0 / 3.0);
    assert!(alpha_star(&PowerConstraints::new(None, Some(1.0)).unwrap(), 10, N0, CAP).is_err());
}

#[test]
fn realized_noise_tracking_agrees_at_the_cap() {
    // With alpha* at the cap the realised average equals E.
    let c = both(1000.0, 100.0);
    let cap = cdma_lower_bound(&c, 5, N0, CAP).unwrap();
    let real = cdma_lower_bound(&c, 5, N0, NoiseTracking::Realized).unwrap();
    assert!(real.bound.value >= cap.bound.value - 1e-9);
    assert!(real.alpha.unwrap() <= 0.1);
}

#[test]
fn sum_capacity_and_optimal_users() {
    for &(a, e) in &[(1000.0, 100.0), (1e5, 1e4), (1e6, 2e5)] {
        let c = both(a, e);
        for m in [2u32, 7, 40] {
            let p = sum_capacity(&c, m, N0, CAP).unwrap();
            assert_eq!(p.value, m as f64 * p.per_user);
            assert_eq!(p.users, m);
        }
        let best = optimal_users(&c, N0, 200, CAP).unwrap();
        let value = |m: u32| sum_capacity(&c, m, N0, CAP).unwrap().value;
        assert!(value(best) >= value(best + 1), "A={a}: M*={best}");
        if best > 2 {
            assert!(value(best) >= value(best - 1), "A={a}: M*={best}");
        }
        if best < 200 {
            assert_eq!(optimal_users(&c, N0, 400, CAP).unwrap(), best, "A={a}");
        }
        assert_eq!(optimal_users(&c, N0, 2, CAP).unwrap(), 2);
    }
}

#[test]
fn simulation_dominates_the_bound() {
    // Effective channel: inputs on [0, A/M] with mean E/M, noise beta*E.
    for &(a, e, m) in &[(1000.0, 100.0, 5u32), (2000.0, 300.0, 3)] {
        let beta = (m as f64 - 1.0) / (m as f64 * N0 as f64);
        let mf = m as f64;
        let density = MaxentDensity::for_constraints(&both(a / mf, e / mf)).unwrap();
        let est = mi_monte_carlo(&density, ChannelParams::new(beta * e).unwrap(), 100_000, 5).unwrap();
        let lb = per_user(&both(a, e), m);
        assert!(lb > 0.0);
        assert!(est.value >= lb - 3.0 * est.stderr, "A={a} M={m}: {est:?} vs {lb}");
    }
}
