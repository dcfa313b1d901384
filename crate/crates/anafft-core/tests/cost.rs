use anafft_core::cost::{
    count_conversions_direct, count_conversions_fft, count_twiddles_fft, digital_comparator, energy_estimate,
    plan_min_energy, report_csv, scaling_class, scaling_report, ConversionModel, DigitalFit, EnergyTable, Method,
    Workload, CSV_HEADER,
};
use anafft_core::plan::{plan_factorization, FactorPlan, PlanStrategy};
use anafft_core::Error;
use proptest::prelude::*;

const ONE: ConversionModel = ConversionModel(1);

fn chain(k: usize, s: u32) -> FactorPlan {
    plan_factorization(k.pow(s), k, &PlanStrategy::Explicit(vec![k; s as usize])).unwrap()
}

#[test]
fn closed_forms_at_k2_and_k4() {
    for k in [4u64, 16] {
        let ku = k as usize;
        let p2 = plan_factorization(ku * ku, ku, &PlanStrategy::MinDepth).unwrap();
        let p4 = plan_factorization(ku.pow(4), ku, &PlanStrategy::MinDepth).unwrap();
        assert_eq!(count_conversions_fft(&p2, ONE), 4 * k * k);
        assert_eq!(count_conversions_fft(&p4, ONE), 8 * k.pow(4));
        assert_eq!(count_twiddles_fft(&p2), k * k);
        assert_eq!(count_twiddles_fft(&p4), 3 * k.pow(4));
    }
}

#[test]
fn direct_counts() {
    assert_eq!(count_conversions_direct(256, 256, ONE), 512);
    assert_eq!(count_conversions_direct(65536, 256, ONE), 2 * 65536 * 256);
    assert_eq!(count_conversions_direct(300, 256, ConversionModel(3)), 2 * 300 * 2 * 3);
}

#[test]
fn leaf_energy() {
    let t = EnergyTable::standard();
    let r = energy_estimate(&Workload::Fft1d(FactorPlan::Leaf(256)), &t, ONE).unwrap();
    assert_eq!(r.energy_joules, 6.496e-9);
    assert_eq!((r.adc_conversions, r.twiddle_mults, r.buffer_accesses), (512, 0, 0));
    let d = energy_estimate(&Workload::Direct1d { n: 256, k_max: 256 }, &t, ONE).unwrap();
    assert_eq!(d.energy_joules, 6.496e-9);
    let big = energy_estimate(&Workload::Fft1d(FactorPlan::Leaf(512)), &t, ONE);
    assert_eq!(big, Err(Error::OutsideEnergyTable { size: 512, max: 256 }));
}

#[test]
fn split_energy_by_hand() {
    let t = EnergyTable::standard();
    let plan = chain(16, 2);
    let r = energy_estimate(&Workload::Fft1d(plan), &t, ONE).unwrap();
    let expect = 32.0 * 0.483e-9 + 256.0 * t.twiddle_mult_j + 512.0 * t.sram_per_value_j;
    assert!((r.energy_joules - expect).abs() < 1e-21);
    assert_eq!(r.buffer_accesses, 512);
}

#[test]
fn min_energy_plans() {
    let t = EnergyTable::standard();
    assert_eq!(plan_min_energy(256, 256, &t).unwrap(), FactorPlan::Leaf(256));
    let p = plan_min_energy(65536, 256, &t).unwrap();
    assert_eq!(p.size(), 65536);
    assert!(p.max_leaf() <= 256);
    let chosen = energy_estimate(&Workload::Fft1d(p), &t, ONE).unwrap().energy_joules;
    for f in [vec![256, 256], vec![16, 16, 16, 16], vec![64, 64, 16]] {
        let alt = plan_factorization(65536, 256, &PlanStrategy::Explicit(f)).unwrap();
        assert!(chosen <= energy_estimate(&Workload::Fft1d(alt), &t, ONE).unwrap().energy_joules * (1.0 + 1e-12));
    }
    assert!(matches!(plan_min_energy(257, 256, &t), Err(Error::Unfactorable { .. })));
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    cov / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
}

#[test]
fn energy_tracks_n_log_n() {
    let t = EnergyTable::standard();
    for k in [4usize, 16] {
        let e: Vec<f64> = (2..=4)
            .map(|s| energy_estimate(&Workload::Fft1d(chain(k, s)), &t, ONE).unwrap().energy_joules)
            .collect();
        let model: Vec<f64> = (2..=4).map(|s| (k.pow(s) * s as usize) as f64).collect();
        let ratios: Vec<f64> = e.iter().zip(&model).map(|(a, b)| a / b).collect();
        for r in &ratios {
            assert!((r / ratios[0] - 1.0).abs() < 0.2, "k = {k}: {ratios:?}");
        }
    }
}

#[test]
fn direct_slope_is_quadratic() {
    let ns: Vec<usize> = (12..=20).map(|e| 1usize << e).collect();
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = ns.iter().map(|&n| (count_conversions_direct(n, 256, ONE) as f64).ln()).collect();
    assert!((slope(&xs, &ys) - 2.0).abs() < 0.05);
}

#[test]
fn report_rows_and_csv() {
    let t = EnergyTable::standard();
    let rows = scaling_report(&[16, 256, 1024], &[4096], &t, ONE).unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!((rows[0].method, rows[1].method), (Method::Fft, Method::Direct));
    assert!(rows[0].energy_joules < rows[1].energy_joules);
    assert!(rows[4].energy_joules.is_finite() && rows[5].energy_joules.is_nan());
    let csv = report_csv(&rows);
    assert!(csv.starts_with(CSV_HEADER));
    assert_eq!(csv.lines().count(), 7);
    assert_eq!(scaling_class(Method::Direct).0, "N^2 / K");
}

#[test]
fn digital_comparator_examples() {
    let fit = DigitalFit { coefficient: 2.0, log_base: 2.0, dims: 1 };
    assert_eq!(digital_comparator(8, &fit).unwrap(), 48.0);
    let fit2 = DigitalFit { coefficient: 1.0, log_base: 2.0, dims: 2 };
    assert!((digital_comparator(4, &fit2).unwrap() - 32.0).abs() < 1e-12);
    assert_eq!(digital_comparator(1, &fit).unwrap(), 0.0);
    assert!(digital_comparator(0, &fit).is_err());
    assert!(digital_comparator(8, &DigitalFit { log_base: 1.0, ..fit }).is_err());
}

#[test]
fn two_dimensional_crossover() {
    let t = EnergyTable::standard();
    let e = |w: Workload| energy_estimate(&w, &t, ONE).unwrap().energy_joules;
    assert!(e(Workload::Direct2d { n: 64, k_max: 256 }) < e(Workload::VrFft2d { n: 64, k_max: 256 }));
    assert!(e(Workload::VrFft2d { n: 1024, k_max: 256 }) < e(Workload::Direct2d { n: 1024, k_max: 256 }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn tree_walk_matches_closed_form(factors in prop::collection::vec(prop::sample::select(vec![2usize, 3, 4, 5, 8, 16]), 1..=6)) {
        let n: usize = factors.iter().product();
        let plan = plan_factorization(n, 16, &PlanStrategy::Explicit(factors.clone())).unwrap();
        let s = factors.len() as u64;
        prop_assert_eq!(count_twiddles_fft(&plan), (s - 1) * n as u64);
        prop_assert_eq!(count_conversions_fft(&plan, ONE), 2 * s * n as u64);
    }

    #[test]
    fn fft_cheaper_with_larger_leaves(e in 3u32..=8) {
        let t = EnergyTable::standard();
        let n = 1usize << (2 * e);
        let small = plan_min_energy(n, 16, &t).unwrap();
        let large = plan_min_energy(n, 256, &t).unwrap();
        let cost = |p| energy_estimate(&Workload::Fft1d(p), &t, ONE).unwrap().energy_joules;
        prop_assert!(cost(large) <= cost(small));
    }
}
