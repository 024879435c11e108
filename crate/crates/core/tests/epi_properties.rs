use flucast::epi::{integrate, reproduction_numbers, weekly_incidence, EpiParams, HolidayCalendar};
use proptest::prelude::*;

const N: f64 = 54_551_450.0;

fn params(pi: f64, i_tot0: f64, beta: f64, kappa: f64) -> EpiParams<f64> {
    EpiParams { pi, i_tot0, beta, kappa, sigma: 1.0, gamma: 0.5797, n_pop: N }
}

fn holidays() -> HolidayCalendar {
    HolidayCalendar::new(vec![(26, 34), (82, 97), (138, 146)]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_and_monotonicity(
        pi in 0.01f64..1.0,
        i_tot0 in 0.0f64..10_000.0,
        beta in 0.0f64..1.12,
        kappa in 0.01f64..2.0,
    ) {
        let traj = integrate(&params(pi, i_tot0, beta, kappa), &holidays(), 231, 0.1).unwrap();
        let mut prev = traj.states()[0];
        for st in traj.states() {
            prop_assert!((st.total() - N).abs() <= 1e-6 * N);
            prop_assert!(st.is_nonnegative());
            prop_assert!(st.s <= prev.s);
            prop_assert!(st.r >= prev.r);
            prev = *st;
        }
        let inc = weekly_incidence(&traj).unwrap();
        prop_assert!(inc.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn unit_kappa_ignores_the_calendar(pi in 0.1f64..1.0, i_tot0 in 1.0f64..10_000.0, beta in 0.1f64..1.12) {
        let p = params(pi, i_tot0, beta, 1.0);
        let with = integrate(&p, &holidays(), 231, 0.1).unwrap();
        let without = integrate(&p, &HolidayCalendar::empty(), 231, 0.1).unwrap();
        prop_assert_eq!(with, without);
    }

    #[test]
    fn per_capita_trajectory_is_scale_free(
        pi in 0.1f64..1.0,
        i_tot0 in 1.0f64..10_000.0,
        beta in 0.1f64..1.12,
        c in 0.01f64..100.0,
    ) {
        let p = params(pi, i_tot0, beta, 1.3);
        let scaled = EpiParams { i_tot0: c * i_tot0, n_pop: c * N, ..p };
        let a = integrate(&p, &holidays(), 231, 0.1).unwrap();
        let b = integrate(&scaled, &holidays(), 231, 0.1).unwrap();
        for (x, y) in a.states().iter().zip(b.states()) {
            for (u, v) in x.to_array().iter().zip(y.to_array()) {
                prop_assert!((u / N - v / (c * N)).abs() <= 1e-12, "{} vs {}", u / N, v / (c * N));
            }
        }
    }
}

#[test]
fn subcritical_season_stays_small() {
    let n = 5e7;
    let gamma = 0.5797;
    let pi = 0.5;
    // Rn = 2 * beta * pi / gamma = 0.8
    let beta = 0.8 * gamma / (2.0 * pi);
    let p = EpiParams { pi, i_tot0: 1000.0, beta, kappa: 1.0, sigma: 1.0, gamma, n_pop: n };
    let (_, rn): (f64, f64) = reproduction_numbers(&p);
    assert!((rn - 0.8).abs() < 1e-12);
    let traj = integrate(&p, &HolidayCalendar::empty(), 231, 0.1).unwrap();
    let total: f64 = weekly_incidence(&traj).unwrap().iter().sum();
    assert!(total < 0.05 * n, "{total}");
}

#[test]
fn halving_the_step_barely_moves_weekly_incidence() {
    let p = params(0.401, 800.0, 0.85, 1.2);
    let coarse = weekly_incidence(&integrate(&p, &holidays(), 231, 0.1).unwrap()).unwrap();
    let fine = weekly_incidence(&integrate(&p, &holidays(), 231, 0.05).unwrap()).unwrap();
    let peak = fine.iter().cloned().fold(0.0f64, f64::max);
    for (a, b) in coarse.iter().zip(&fine) {
        assert!((a - b).abs() <= 1e-5 * peak, "{a} vs {b}");
    }
}

/// Independent RK4 with cumulative infections `C' = lambda * S` carried as
/// an extra state, stepped at 0.01 day.
fn cumulative_infections_oracle(p: &EpiParams<f64>, cal: &HolidayCalendar, days: u32) -> Vec<f64> {
    let half = p.i_tot0 / 2.0;
    let r = (1.0 - p.pi) * p.n_pop;
    let mut y = [p.n_pop - 4.0 * half - r, half, half, half, half, r, 0.0];
    let f = |y: &[f64; 7], b: f64| {
        let inf = b * (y[3] + y[4]) / p.n_pop * y[0];
        [
            -inf,
            inf - p.sigma * y[1],
            p.sigma * (y[1] - y[2]),
            p.sigma * y[2] - p.gamma * y[3],
            p.gamma * (y[3] - y[4]),
            p.gamma * y[4],
            inf,
        ]
    };
    let h = 0.01;
    let mut out = vec![0.0];
    for day in 0..days {
        let b = if cal.contains_day(day) { p.kappa * p.beta } else { p.beta };
        for _ in 0..100 {
            let k1 = f(&y, b);
            let k2 = f(&std::array::from_fn(|i| y[i] + 0.5 * h * k1[i]), b);
            let k3 = f(&std::array::from_fn(|i| y[i] + 0.5 * h * k2[i]), b);
            let k4 = f(&std::array::from_fn(|i| y[i] + h * k3[i]), b);
            for i in 0..7 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        out.push(y[6]);
    }
    out
}

#[test]
fn weekly_incidence_matches_accumulated_force_of_infection() {
    for p in [params(0.401, 800.0, 0.85, 1.2), params(0.9, 50.0, 0.4, 0.7), params(0.546, 4106.0, 0.611, 1.185)] {
        let cal = holidays();
        let inc = weekly_incidence(&integrate(&p, &cal, 231, 0.1).unwrap()).unwrap();
        let c = cumulative_infections_oracle(&p, &cal, 231);
        for (v, x) in inc.iter().enumerate() {
            let oracle = c[7 * (v + 1)] - c[7 * v];
            assert!((x - oracle).abs() <= 1e-3 * oracle.max(1e-9), "week {v}: {x} vs {oracle}");
        }
    }
}
