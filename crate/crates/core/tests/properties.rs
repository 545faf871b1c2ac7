//! Property tests for the exact algebra layers and for pipeline invariants.

use std::sync::Arc;

use num_traits::{One, Zero};
use proptest::prelude::*;

use crcartan::ambiguity::{column_weights_ok, inverse_row_weights_ok, Atom, ParamFraction, Reality};
use crcartan::cartan::vanish_params;
use crcartan::exactalg::linalg::{self, Solution};
use crcartan::exactalg::{GaussianRational as GR, Monomial, VariableTable, WPoly};
use crcartan::frame::duality_oracle;
use crcartan::freelie::{free_lie_dim, model_length};
use crcartan::report::{report_from_pipeline, AnalysisOptions, AnalysisReport, Pipeline};

fn gr() -> impl Strategy<Value = GR> {
    (-9i64..=9, 1i64..=6, -9i64..=9, 1i64..=6).prop_map(|(a, b, c, d)| GR::new(GR::from_ratio(a, b).re, GR::from_ratio(c, d).re))
}

fn table() -> Arc<VariableTable> {
    Arc::new(VariableTable::new(&[2]))
}

/// Polynomials in `z, zb, w1, wb1` with up to four terms.
fn wpoly(t: Arc<VariableTable>) -> impl Strategy<Value = WPoly> {
    prop::collection::vec(((0u16..3, 0u16..3, 0u16..2, 0u16..2), gr()), 0..4).prop_map(move |terms| {
        let mut p = WPoly::zero(&t);
        for ((a, b, c, d), coef) in terms {
            let m = Monomial::from_exps(&t, vec![a, b, c, d, 0]);
            p = &p + &WPoly::from_term(&t, m, coef);
        }
        p
    })
}

fn param(index: usize, weight: u32) -> ParamFraction {
    ParamFraction::atom(Atom::P { index, conj: false, weight, reality: Reality::Complex })
}

/// Laurent polynomials in `a1, ā1` with coefficients in `a2, ā2, a3`.
fn fraction() -> impl Strategy<Value = ParamFraction> {
    prop::collection::vec(((-2i32..3, -2i32..3, 0u32..2, 0u32..2, 0u32..2), gr()), 0..4).prop_map(|terms| {
        let mut f = ParamFraction::zero();
        for ((e1, e1b, n2, n2b, n3), c) in terms {
            let mut t = ParamFraction::a1_pow(e1, e1b).scale(&c);
            for _ in 0..n2 {
                t = &t * &param(2, 2);
            }
            for _ in 0..n2b {
                t = &t * &param(2, 2).conj();
            }
            for _ in 0..n3 {
                t = &t * &param(3, 3);
            }
            f = &f + &t;
        }
        f
    })
}

proptest! {
    #[test]
    fn gaussian_field_axioms(a in gr(), b in gr(), c in gr()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        prop_assert_eq!(a.conj().conj(), a.clone());
        prop_assert_eq!(&a * &a.conj(), GR::real(a.norm_sqr()));
        if !a.is_zero() {
            prop_assert!((&a * &a.inv()).is_one());
            prop_assert_eq!(&(&b / &a) * &a, b.clone());
        }
    }

    #[test]
    fn gaussian_display_round_trips(a in gr()) {
        let back: GR = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn wpoly_ring_and_conjugation(p in wpoly(table()), q in wpoly(table()), r in wpoly(table())) {
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert!((&p - &p).is_zero());
        prop_assert_eq!(p.conj().conj(), p.clone());
        prop_assert_eq!((&p * &q).conj(), &p.conj() * &q.conj());
        prop_assert!((&p * &p.conj()).is_real());
        prop_assert!((&p + &p.conj()).is_real());
    }

    #[test]
    fn wpoly_derivative_is_a_derivation(p in wpoly(table()), q in wpoly(table()), i in 0usize..4) {
        let lhs = (&p * &q).derivative(i);
        let rhs = &(&p.derivative(i) * &q) + &(&p * &q.derivative(i));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn wpoly_weights_add(p in wpoly(table()), q in wpoly(table())) {
        if let (Some((mp, _)), Some((mq, _))) = (p.leading(), q.leading()) {
            let (wp, wq) = (mp.weight(), mq.weight());
            let (hp, hq) = (p.is_homogeneous_of(wp), q.is_homogeneous_of(wq));
            if hp && hq {
                prop_assert!((&p * &q).is_homogeneous_of(wp + wq));
            }
        }
    }

    #[test]
    fn fraction_conjugation(a in fraction(), b in fraction()) {
        prop_assert_eq!(a.conj().conj(), a.clone());
        prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        prop_assert_eq!((&a + &b).conj(), &a.conj() + &b.conj());
        prop_assert_eq!(vanish_params(&a).conj(), vanish_params(&a.conj()));
    }

    #[test]
    fn fraction_weights_add(a in fraction(), b in fraction()) {
        if let (Some(wa), Some(wb)) = (a.weight(), b.weight()) {
            prop_assert!((&a * &b).is_homogeneous_of(wa + wb));
        }
    }

    #[test]
    fn solve_recovers_consistent_systems(rows in prop::collection::vec(prop::collection::vec(-4i64..=4, 3), 1..5), x in prop::collection::vec(gr(), 3)) {
        let a: Vec<Vec<GR>> = rows.iter().map(|r| r.iter().map(|&v| GR::from_int(v)).collect()).collect();
        let b: Vec<GR> = a.iter().map(|r| r.iter().zip(&x).fold(GR::zero(), |s, (u, v)| &s + &(u * v))).collect();
        let rank = linalg::rank(&a);
        match linalg::solve(&a, &b, 3) {
            Solution::Unique(y) => {
                prop_assert_eq!(rank, 3);
                prop_assert_eq!(y, x);
            }
            Solution::Family(y, free) => {
                prop_assert_eq!(free, 3 - rank);
                for (r, rhs) in a.iter().zip(&b) {
                    let lhs = r.iter().zip(&y).fold(GR::zero(), |s, (u, v)| &s + &(u * v));
                    prop_assert_eq!(&lhs, rhs);
                }
            }
            Solution::Inconsistent => prop_assert!(false, "consistent system reported inconsistent"),
        }
    }

    #[test]
    fn necklace_identity(n in 1u32..=20) {
        // sum over divisors d of n of d * m_d equals 2^n
        let total: u64 = (1..=n).filter(|d| n % d == 0).map(|d| d as u64 * free_lie_dim(d)).sum();
        prop_assert_eq!(total, 1u64 << n);
    }

    #[test]
    fn model_length_is_minimal_and_monotone(k in 1usize..40) {
        let (rho, strict) = model_length(k);
        let cum = |l: u32| (1..=l).map(free_lie_dim).sum::<u64>() as usize;
        prop_assert!(cum(rho as u32) >= 2 + k);
        prop_assert!(rho == 1 || cum(rho as u32 - 1) < 2 + k);
        prop_assert_eq!(strict, cum(rho as u32) > 2 + k);
        prop_assert!(model_length(k + 1).0 >= rho);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn pipeline_invariants(k in 2usize..=9) {
        let p = Pipeline::run(k, None).unwrap();
        prop_assert!(duality_oracle(&p.frame, &p.darboux).is_ok());
        prop_assert!(column_weights_ok(&p.frame, &p.g));
        prop_assert!(inverse_row_weights_ok(&p.frame, &p.ginv));
        for e in &p.system {
            prop_assert!(e.lhs().is_homogeneous_of(0));
        }
        prop_assert!(p.solution.values().all(GR::is_zero));
        let alg = &p.algebra;
        prop_assert!(alg.grading_closed() && alg.g0_abelian() && !alg.has_positive_part());
        prop_assert!(alg.dim() == 3 + k || alg.dim() == 4 + k);
        prop_assert_eq!(alg.dim(), p.final_structure.total_forms());
        prop_assert!(alg.negative_part_matches(&p.frame) && alg.generated_by_minus_one());
    }

    #[test]
    fn reports_are_deterministic_and_round_trip(k in 2usize..=7) {
        let p = Pipeline::run(k, None).unwrap();
        let opts = AnalysisOptions::default();
        let a = serde_json::to_string(&report_from_pipeline(&p, &opts)).unwrap();
        let b = serde_json::to_string(&report_from_pipeline(&Pipeline::run(k, None).unwrap(), &opts)).unwrap();
        prop_assert_eq!(&a, &b);
        let back: AnalysisReport = serde_json::from_str(&a).unwrap();
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), a);
    }
}
