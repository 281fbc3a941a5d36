use fracoint::critval::{CriticalValueTable, CvEntry};
use fracoint::hualde::{estimate_rank_hualde, StepDecision};
use fracoint::memory::{exact_local_whittle, local_whittle, Bounds, MeanHandling};
use fracoint::nielsen::{variance_ratio, DetCase};
use fracoint::rng::{replication_rng, standard_normals};
use fracoint::series::{simulate_arfima_stream, ArfimaSpec};
use fracoint::spectral::{cross_periodogram, periodogram};
use fracoint::xstar::{chi2_critical, xstar};
use fracoint::Panel;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn labels(p: usize) -> Vec<String> {
    (0..p).map(|i| format!("c{i}")).collect()
}

fn noise_panel(t: usize, d: &[f64], seed: u64) -> Panel {
    let cols: Vec<Vec<f64>> = d
        .iter()
        .enumerate()
        .map(|(i, &d)| simulate_arfima_stream(t, &ArfimaSpec::fractional_noise(d, 1.0).unwrap(), seed, i as u64).unwrap())
        .collect();
    Panel::from_columns(labels(d.len()), &cols).unwrap()
}

fn walks(t: usize, p: usize, seed: u64) -> Panel {
    let mut z = DMatrix::from_vec(t, p, standard_normals(&mut replication_rng(seed, 0), t * p));
    for j in 0..p {
        for i in 1..t {
            z[(i, j)] += z[(i - 1, j)];
        }
    }
    Panel::new(z, labels(p)).unwrap()
}

fn rescale(panel: &Panel, scales: &[f64]) -> Panel {
    let v = panel.values();
    Panel::new(DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * scales[j]), panel.labels().to_vec()).unwrap()
}

fn case() -> impl Strategy<Value = DetCase> {
    prop_oneof![Just(DetCase::None), Just(DetCase::Const), Just(DetCase::Trend)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulation_independent_of_worker_count(seed in any::<u64>(), d in -0.4f64..1.4, n in 1usize..6) {
        let spec = ArfimaSpec::new(d, vec![0.3], vec![0.2], 1.5).unwrap();
        let base = simulate_arfima_stream(300, &spec, seed, 2).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        let other = pool.install(|| simulate_arfima_stream(300, &spec, seed, 2).unwrap());
        prop_assert_eq!(base, other);
    }

    #[test]
    fn cross_periodogram_is_hermitian_psd(seed in any::<u64>(), t in 20usize..200, p in 1usize..5) {
        let d = vec![0.2; p];
        let panel = noise_panel(t, &d, seed);
        let m = (t - 1) / 2;
        let set = cross_periodogram(&panel, m, true).unwrap();
        for (j, mat) in set.matrices().iter().enumerate() {
            prop_assert!((mat - mat.adjoint()).iter().all(|z| z.norm() < 1e-12 * (1.0 + mat[(0, 0)].re)));
            let eig = nalgebra::SymmetricEigen::new(mat.map(|z| z.re)).eigenvalues;
            prop_assert!(eig.iter().all(|&e| e > -1e-10 * (1.0 + mat.trace().re)));
            for a in 0..p {
                let uni = periodogram(panel.column(a), m, true).unwrap();
                prop_assert!((mat[(a, a)].re - uni[j]).abs() <= 1e-10 * (1.0 + uni[j]));
            }
        }
    }

    #[test]
    fn whittle_argmin_is_scale_invariant(seed in any::<u64>(), d in -0.3f64..0.9, c in 1e-3f64..1e3) {
        let x = simulate_arfima_stream(256, &ArfimaSpec::fractional_noise(d, 1.0).unwrap(), seed, 0).unwrap();
        let y: Vec<f64> = x.iter().map(|v| v * c).collect();
        let a = local_whittle(&x, 36, Bounds::local_whittle()).unwrap().d_hat;
        let b = local_whittle(&y, 36, Bounds::local_whittle()).unwrap().d_hat;
        prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b);
        let a = exact_local_whittle(&x, 36, Bounds::exact_local_whittle(), MeanHandling::Demean).unwrap().d_hat;
        let b = exact_local_whittle(&y, 36, Bounds::exact_local_whittle(), MeanHandling::Demean).unwrap().d_hat;
        prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b);
    }

    #[test]
    fn xstar_scale_and_permutation(seed in any::<u64>(), s in prop::collection::vec(1e-3f64..1e3, 3)) {
        let panel = noise_panel(256, &[0.3, 0.1, 0.2], seed);
        let m = 36;
        let base = xstar(&panel, m, None).unwrap();
        let scaled = xstar(&rescale(&panel, &s), m, None).unwrap();
        prop_assert!((base.x_star - scaled.x_star).abs() < 1e-10 * (1.0 + base.x_star));
        let perm = xstar(&panel.select(&[2, 0, 1]).unwrap(), m, None).unwrap();
        prop_assert!((base.x_star - perm.x_star).abs() < 1e-12 * (1.0 + base.x_star));
        let p = 3.0;
        let tr_r2: f64 = base.r.iter().map(|v| v * v).sum();
        prop_assert!((p * p * tr_r2 / (p * p) - p) >= 0.0);
    }

    #[test]
    fn rank_trace_is_self_consistent(seed in any::<u64>(), p in 2usize..5) {
        let d: Vec<f64> = (0..p).map(|i| 0.1 + 0.07 * i as f64).collect();
        let panel = noise_panel(200, &d, seed);
        let trace = estimate_rank_hualde(&panel, 31, 0.05).unwrap();
        let cv = chi2_critical(0.05).unwrap();
        prop_assert!(trace.r_hat < p);
        let first_reject = trace.steps.iter().position(|s| s.decision == StepDecision::Rejected);
        match first_reject {
            Some(k) => {
                prop_assert_eq!(k + 1, trace.steps.len());
                prop_assert_eq!(trace.r_hat, p - trace.steps[k].step);
            }
            None => {
                prop_assert_eq!(trace.steps.len(), p - 1);
                prop_assert_eq!(trace.r_hat, 0);
            }
        }
        for s in &trace.steps {
            prop_assert_eq!(s.candidates.len(), p - s.step);
            let all = s.candidates.iter().all(|c| c.stat.is_some_and(|x| x > cv));
            prop_assert_eq!(s.decision == StepDecision::Rejected, all);
        }
    }

    #[test]
    fn variance_ratio_ordering_and_invariance(seed in any::<u64>(), p in 1usize..6, case in case(),
                                              shift in -50.0f64..50.0) {
        let panel = walks(120, p, seed);
        let vr = variance_ratio(&panel, 0.1, case).unwrap();
        prop_assert!(vr.eigenvalues.iter().all(|&e| e > 0.0));
        prop_assert!(vr.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let l = vr.lambda_by_r0();
        prop_assert!(l.windows(2).all(|w| w[0] > w[1]));

        let mix = DMatrix::from_fn(p, p, |i, j| if i == j { 2.0 } else { 0.3 * ((i + 2 * j) % 3) as f64 - 0.2 });
        let mixed = Panel::new(panel.values() * mix, panel.labels().to_vec()).unwrap();
        let lm = variance_ratio(&mixed, 0.1, case).unwrap().lambda_by_r0();
        for (a, b) in l.iter().zip(&lm) {
            prop_assert!((a - b).abs() <= 1e-8 * a.abs());
        }

        if case != DetCase::None {
            let shifted = Panel::new(panel.values().map(|v| v + shift), panel.labels().to_vec()).unwrap();
            let ls = variance_ratio(&shifted, 0.1, case).unwrap().lambda_by_r0();
            for (a, b) in l.iter().zip(&ls) {
                prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn table_csv_round_trip(cells in prop::collection::vec((case(), 0usize..3, 1usize..18, -1e6f64..1e6), 1..40),
                            t in 3usize..5000, d1 in 0.01f64..2.0, reps in 1000usize..1_000_000,
                            seed in prop::option::of(any::<u64>())) {
        let xis = [0.1, 0.05, 0.01];
        let mut entries: Vec<CvEntry> = Vec::new();
        for (case, x, p_r, cv) in cells {
            if !entries.iter().any(|e| e.case == case && e.xi == xis[x] && e.p_r == p_r) {
                entries.push(CvEntry { case, xi: xis[x], p_r, cv });
            }
        }
        let table = CriticalValueTable::new(d1, t, reps, seed, entries);
        let text = table.to_csv_string();
        let back = CriticalValueTable::from_csv_str(&text).unwrap();
        prop_assert_eq!(&back, &table);
        prop_assert_eq!(back.to_csv_string(), text);
    }
}
