//! Invariants checked on random inputs.

use num_traits::One;
use proptest::prelude::*;

use pcmax::baselines::{djms, ffd_pack, lpt, multifit, MultifitParams};
use pcmax::configip::{build_reduced_ip, enumerate_configs, expand_solution, irreducible_configs, reduce_solution, coverage};
use pcmax::convolution::{dft, fft_convolve, idft, naive_convolve, MultiArray};
use pcmax::instance::{lower_bound, PartialSchedule};
use pcmax::jrsolver::{brute_force_ip, satisfies, solve_ip, JrOptions, Strategy as JrStrategy};
use pcmax::preprocess::{assign_small_greedy, classify, pair_huge};
use pcmax::rounding::{round_jobs, standard_scheme, verify_scheme, RoundedInstance, RoundingScheme};
use pcmax::scalar::{parse_rational, ratio};
use pcmax::{exact_opt, parse_instance, write_instance, Instance, Rational};

fn eps_strategy() -> impl Strategy<Value = Rational> {
    prop_oneof![Just(ratio(1, 4)), Just(ratio(1, 5)), Just(ratio(1, 6)), Just(ratio(1, 8)), Just(ratio(2, 7)), Just(ratio(3, 10))]
}

fn instance_strategy(max_n: usize) -> impl Strategy<Value = Instance<Rational>> {
    (1usize..=4, prop::collection::vec(1i64..=30, 1..=max_n))
        .prop_map(|(m, p)| Instance::new(m, p.into_iter().map(|v| ratio(v, 1)).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn instance_text_round_trip(inst in instance_strategy(12)) {
        prop_assert_eq!(parse_instance(&write_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn rational_text_round_trip(n in -10_000i64..10_000, d in 1i64..500) {
        let r = ratio(n, d);
        prop_assert_eq!(parse_rational(&pcmax::scalar::format_rational(&r)), Some(r));
    }

    #[test]
    fn heuristics_are_valid_and_bounded(inst in instance_strategy(9)) {
        let opt = exact_opt(&inst).unwrap();
        let lb = lower_bound(&inst);
        prop_assert!(lb <= opt);
        for s in [lpt(&inst), multifit(&inst, MultifitParams::default()), djms(&inst)] {
            prop_assert!(s.is_valid_for(&inst));
            prop_assert!(s.makespan() >= opt.clone());
        }
        prop_assert!(lpt(&inst).makespan() <= ratio(4, 3) * &opt);
        prop_assert!(multifit(&inst, MultifitParams::default()).makespan() <= ratio(13, 11) * &opt);
        if let Some(s) = ffd_pack(&inst, &opt) {
            prop_assert!(s.makespan() <= opt);
        }
    }

    #[test]
    fn standard_schemes_verify(eps in eps_strategy(), t in 1i64..50) {
        let t = ratio(t, 1);
        let s = standard_scheme(&eps, &t).unwrap();
        prop_assert!(verify_scheme(&s, &eps, &t).ok());
        for tr in s.triples() {
            prop_assert_eq!(&s.sizes()[tr.a] + &s.sizes()[tr.b], s.sizes()[tr.target].clone());
        }
    }

    #[test]
    fn rounding_loses_at_most_eps(eps in eps_strategy(), num in 1i64..10_000) {
        let t = Rational::one();
        let s = standard_scheme(&eps, &t).unwrap();
        let lo = eps.clone();
        let hi = Rational::one() - ratio(2, 1) * &eps;
        let p = &lo + (&hi - &lo) * ratio(num, 10_001);
        if let Some(k) = s.round_down(&p) {
            let x = &s.sizes()[k];
            prop_assert!(x <= &p);
            prop_assert!(p <= (Rational::one() + &eps) * x);
        }
    }

    #[test]
    fn scheme_text_round_trip(eps in eps_strategy()) {
        let s = standard_scheme(&eps, &Rational::one()).unwrap();
        let back = RoundingScheme::from_text(&s.to_text()).unwrap();
        prop_assert_eq!(back.sizes(), s.sizes());
        prop_assert_eq!(back.triples(), s.triples());
        prop_assert_eq!(back.support(), s.support());
    }

    #[test]
    fn classification_partitions(inst in instance_strategy(12), eps in eps_strategy()) {
        let t = lower_bound(&inst);
        let part = classify(&inst, &t, &eps).unwrap();
        let mut all: Vec<usize> = part.small.iter().chain(&part.large).chain(&part.huge).copied().collect();
        all.sort();
        prop_assert_eq!(all, (0..inst.n()).collect::<Vec<_>>());
        let pairing = pair_huge(&inst, &part);
        let mut seen = std::collections::BTreeSet::new();
        for (h, partner) in &pairing.partner {
            if let Some(j) = partner {
                prop_assert!(seen.insert(*j));
                prop_assert!(&inst.p()[*h] + &inst.p()[*j] <= t);
            }
        }
    }

    #[test]
    fn greedy_small_jobs_balance(loads in prop::collection::vec(0i64..40, 1..5), small in prop::collection::vec(1i64..5, 0..20)) {
        // Machines preloaded by one job each, then the small jobs.
        let m = loads.len();
        let p: Vec<Rational> = loads.iter().chain(&small).map(|&v| ratio(v.max(1), 1)).collect();
        let inst = Instance::new(m, p).unwrap();
        let mut s = PartialSchedule::empty(&inst);
        for i in 0..m {
            s.assign(&inst, i, i);
        }
        let before = s.loads().iter().max().unwrap().clone();
        let ids: Vec<usize> = (m..inst.n()).collect();
        let s = assign_small_greedy(&inst, s, &ids).finish().unwrap();
        let after = s.makespan();
        if after > before {
            let min = s.loads().iter().min().unwrap().clone();
            let pmax_small = ids.iter().map(|&j| inst.p()[j].clone()).max().unwrap();
            prop_assert!(after - min <= pmax_small);
        }
    }

    #[test]
    fn convolution_matches_definition(
        dims in prop::collection::vec(1usize..=4, 1..=3),
        seed in any::<u64>(),
    ) {
        let len: usize = dims.iter().product();
        let vals = |s: u64| (0..len).map(|k| (((s >> (k % 60)) ^ k as u64) % 7) as f64 - 3.0).collect::<Vec<_>>();
        let f = MultiArray::<f64>::from_real(&dims, &vals(seed));
        let g = MultiArray::<f64>::from_real(&dims, &vals(seed.rotate_left(17)));
        let a = fft_convolve(&f, &g).unwrap();
        let b = naive_convolve(&f, &g).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            prop_assert!((x - y).norm() < 1e-8);
        }
        let rt = idft(&dft(&f));
        for (x, y) in rt.data().iter().zip(f.data()) {
            prop_assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn solver_agrees_with_enumeration(
        rows in 1usize..=3,
        cols in 1usize..=4,
        entries in prop::collection::vec(-2i64..=2, 12),
        rhs in prop::collection::vec(0i64..=8, 3),
    ) {
        let a: Vec<Vec<i64>> = (0..rows).map(|r| entries[r * 4..r * 4 + cols].to_vec()).collect();
        let b = &rhs[..rows];
        let bf = brute_force_ip(&a, b, 8);
        for strategy in [JrStrategy::Direct, JrStrategy::Fft] {
            let out = solve_ip(&a, b, &JrOptions::new(8).with_strategy(strategy)).unwrap();
            prop_assert_eq!(out.solution.is_some(), bf.is_some());
            if let Some(x) = &out.solution {
                prop_assert!(satisfies(&a, b, x));
            }
        }
    }

    #[test]
    fn reduced_ip_round_trip(eps in eps_strategy(), counts in prop::collection::vec(0usize..3, 8), m in 1usize..4) {
        let scheme = standard_scheme(&eps, &Rational::one()).unwrap();
        let keep: Vec<bool> = (0..scheme.d()).map(|k| k < counts.len() && counts[k] > 0).collect();
        prop_assume!(keep.iter().any(|&b| b));
        let (scheme, _) = scheme.restrict(&keep);
        let histogram: Vec<usize> = (0..keep.len()).filter(|&k| keep[k]).map(|k| counts[k]).collect();
        prop_assume!(scheme.d() <= 4);
        let rounded = RoundedInstance { histogram: histogram.clone(), job_map: vec![], m_effective: m };
        let ip = build_reduced_ip(&scheme, &rounded);
        let n: usize = histogram.iter().sum();
        let out = solve_ip(&ip.matrix(), ip.rhs(), &JrOptions::new((n + scheme.d() * n + m) as u64)).unwrap();
        if let Some(x) = out.solution {
            let conf = expand_solution(&ip, &x).unwrap();
            let (cov, machines) = coverage(&conf, scheme.d());
            prop_assert!(machines <= m as u64);
            prop_assert!(cov.iter().zip(&histogram).all(|(&c, &h)| c >= h as u64));
            prop_assert!(conf.iter().all(|(c, _)| c.load(scheme.sizes()) <= Rational::one()));
            let y = reduce_solution(&conf, &ip).unwrap();
            prop_assert!(ip.is_solution(&y));
        }
    }

    #[test]
    fn irreducible_configs_are_a_subset(eps in eps_strategy()) {
        let s = standard_scheme(&eps, &Rational::one()).unwrap();
        let all = enumerate_configs(&s, &Rational::one(), None);
        for c in irreducible_configs(&s, &Rational::one()) {
            prop_assert!(all.contains(&c));
            prop_assert!(c.l1() <= s.support());
        }
    }

    #[test]
    fn rounding_respects_large_range(eps in eps_strategy(), ps in prop::collection::vec(1i64..1000, 1..10)) {
        let t = ratio(1000, 1);
        let s = standard_scheme(&eps, &t).unwrap();
        let lo = &eps * &t;
        let hi = (Rational::one() - ratio(2, 1) * &eps) * &t;
        let jobs: Vec<(usize, Rational)> = ps.iter().enumerate().map(|(j, &p)| (j, ratio(p, 1))).filter(|(_, p)| *p > lo && *p < hi).collect();
        let r = round_jobs(&jobs, &s, 1).unwrap();
        prop_assert_eq!(r.histogram.iter().sum::<usize>(), jobs.len());
    }
}
