//! Randomized law checks: polynomial and interval arithmetic, symmetry
//! transport, restriction lifting, and the decision procedure's
//! evidence discipline. Deterministic seeds keep runs reproducible.

use std::sync::OnceLock;

use proptest::prelude::*;

use kwfeas::feasibility::{
    decide, verify_certificate, verify_witness, SearchConfig, Status, Strategy as Engine,
};
use kwfeas::interval::{cmp_f64_rat, Interval};
use kwfeas::kw::{self, kw_system, lift_point, InequalitySystem, Restriction};
use kwfeas::model::{RegressionSpec, SupportSet};
use kwfeas::poly::{Monomial, Polynomial};
use kwfeas::symmetry::{group_elements, parameter_transport, SignedPermutation};
use kwfeas::Rat;

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

fn arb_rat() -> impl Strategy<Value = Rat> {
    (-24i64..=24, 1i64..=6).prop_map(|(n, d)| rat(n, d))
}

fn arb_pos_rat() -> impl Strategy<Value = Rat> {
    (1i64..=40, 1i64..=6).prop_map(|(n, d)| rat(n, d))
}

fn arb_poly(nvars: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(
        (prop::collection::vec(0u32..=3, nvars), arb_rat()),
        1..=5,
    )
    .prop_map(move |terms| {
        Polynomial::from_terms(
            nvars,
            terms.into_iter().map(|(e, c)| (Monomial::from_exps(e), c)),
        )
        .unwrap()
    })
}

fn arb_pos_point(nvars: usize) -> impl Strategy<Value = Vec<Rat>> {
    prop::collection::vec(arb_pos_rat(), nvars)
}

fn spec3() -> &'static RegressionSpec {
    static S: OnceLock<RegressionSpec> = OnceLock::new();
    S.get_or_init(|| RegressionSpec::new(3, 1).unwrap())
}

fn group3() -> &'static Vec<SignedPermutation> {
    static G: OnceLock<Vec<SignedPermutation>> = OnceLock::new();
    G.get_or_init(|| group_elements(3).unwrap())
}

fn nondeg_supports3() -> &'static Vec<SupportSet> {
    static S: OnceLock<Vec<SupportSet>> = OnceLock::new();
    S.get_or_init(|| spec3().enumerate_supports(true).collect())
}

fn corner_witness3() -> &'static (InequalitySystem, Vec<Rat>) {
    static W: OnceLock<(InequalitySystem, Vec<Rat>)> = OnceLock::new();
    W.get_or_init(|| {
        let sys = kw_system(spec3(), &spec3().corner_design()).unwrap();
        let v = decide(&sys, Engine::Auto, &SearchConfig::default());
        assert_eq!(v.status, Status::Feasible);
        (sys, v.witness.unwrap())
    })
}

/// Budgets small enough that a single case stays in the millisecond
/// range while every engine still gets to run.
fn tiny_cfg() -> SearchConfig {
    let mut cfg = SearchConfig::default();
    cfg.multistart = 8;
    cfg.iterations = 60;
    cfg.degree_bound = 2;
    cfg.order_bound = 1;
    cfg.box_budget = 200;
    cfg.trace_limit = 32;
    cfg
}

/// Hand-built system over the k=1 saturated support, for engine-level
/// properties where the constraints are the point.
fn sys1(constraints: Vec<Polynomial>) -> InequalitySystem {
    let spec = RegressionSpec::new(1, 1).unwrap();
    InequalitySystem::new(1, 1, spec.corner_design(), Vec::new(), constraints).unwrap()
}

const PERMS3: [[usize; 3]; 6] =
    [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn poly_display_parse_round_trip(p in arb_poly(3)) {
        let back = Polynomial::parse(&p.to_string(), 3).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn poly_eval_is_a_ring_homomorphism(
        a in arb_poly(2),
        b in arb_poly(2),
        x in arb_pos_point(2),
    ) {
        let va = a.eval_exact(&x).unwrap();
        let vb = b.eval_exact(&x).unwrap();
        prop_assert_eq!(a.add(&b).unwrap().eval_exact(&x).unwrap(), &va + &vb);
        prop_assert_eq!(a.sub(&b).unwrap().eval_exact(&x).unwrap(), &va - &vb);
        prop_assert_eq!(a.mul(&b).unwrap().eval_exact(&x).unwrap(), &va * &vb);
        prop_assert_eq!(a.neg().eval_exact(&x).unwrap(), -va);
    }

    #[test]
    fn poly_permute_vars_relabels_eval(
        p in arb_poly(3),
        pi in 0usize..6,
        x in arb_pos_point(3),
    ) {
        let perm = PERMS3[pi];
        let q = p.permute_vars(&perm).unwrap();
        // old variable j reads the new coordinate perm[j]
        let pulled: Vec<Rat> = (0..3).map(|j| x[perm[j]].clone()).collect();
        prop_assert_eq!(q.eval_exact(&x).unwrap(), p.eval_exact(&pulled).unwrap());
    }

    #[test]
    fn interval_eval_contains_exact_eval(
        p in arb_poly(2),
        sides in prop::collection::vec((arb_pos_rat(), arb_pos_rat(), 0i64..=16), 2),
    ) {
        let mut cube = Vec::new();
        let mut point = Vec::new();
        for (lo, width, t) in sides {
            let hi = &lo + &width;
            point.push(&lo + rat(t, 16) * &width);
            cube.push(Interval::from_rat_bounds(&lo, &hi).unwrap());
        }
        let exact = p.eval_exact(&point).unwrap();
        let iv = p.eval_interval(&cube).unwrap();
        prop_assert!(cmp_f64_rat(iv.lo(), &exact) != std::cmp::Ordering::Greater);
        prop_assert!(cmp_f64_rat(iv.hi(), &exact) != std::cmp::Ordering::Less);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn kw_systems_are_equivariant(si in 0usize..58, gi in 0usize..48) {
        let spec = spec3();
        let support = &nondeg_supports3()[si];
        let g = &group3()[gi];
        let direct = kw_system(spec, &g.act_support(support).unwrap()).unwrap();
        let pm = parameter_transport(g, spec).unwrap();
        let carried = kw::transport_system(&kw_system(spec, support).unwrap(), &pm).unwrap();
        prop_assert_eq!(direct.constraints(), carried.constraints());
    }

    #[test]
    fn witnesses_transport_along_the_group(gi in 0usize..48) {
        let spec = spec3();
        let (sys, w) = corner_witness3();
        let g = &group3()[gi];
        let image = kw_system(spec, &g.act_support(sys.support()).unwrap()).unwrap();
        let carried = parameter_transport(&g.inverse(), spec)
            .unwrap()
            .map_point(w)
            .unwrap();
        prop_assert!(verify_witness(&image, &carried).unwrap());
    }

    // Identify drops the left slot, so the reduced point is shorter;
    // Fix keeps its slot and lift_point overwrites it with the pin.
    #[test]
    fn restriction_lifting_preserves_satisfaction(
        li in 1usize..=3,
        ri in 1usize..=3,
        value in arb_pos_rat(),
        q3 in arb_pos_point(3),
        fix in any::<bool>(),
    ) {
        prop_assume!(li != ri);
        let base = &corner_witness3().0;
        let r = if fix {
            Restriction::Fix { var: li, value }
        } else {
            Restriction::Identify { left: li, right: ri }
        };
        let restricted = kw::restrict(base, std::slice::from_ref(&r)).unwrap();
        let expected_nvars = if fix { 3 } else { 2 };
        prop_assert_eq!(restricted.nvars(), expected_nvars);
        let q = q3[..expected_nvars].to_vec();
        let lifted = lift_point(&q, 3, std::slice::from_ref(&r)).unwrap();
        if let Restriction::Fix { var, value } = &r {
            prop_assert_eq!(&lifted[var - 1], value);
        }
        prop_assert_eq!(
            verify_witness(&restricted, &q).unwrap(),
            verify_witness(base, &lifted).unwrap()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn decide_is_deterministic_and_never_claims_without_evidence(
        cons in prop::collection::vec(arb_poly(1), 1..=3),
    ) {
        let sys = sys1(cons);
        let cfg = tiny_cfg();
        let v = decide(&sys, Engine::Auto, &cfg);
        prop_assert_eq!(&v, &decide(&sys, Engine::Auto, &cfg));
        match v.status {
            Status::Feasible => {
                prop_assert!(verify_witness(&sys, v.witness.as_ref().unwrap()).unwrap());
            }
            Status::Infeasible => {
                if let Some(c) = &v.certificate {
                    prop_assert!(verify_certificate(&sys, c));
                } else {
                    prop_assert!(v.boxlog.iter().any(|t| t.complete()));
                    prop_assert!(v.diagnostics.iter().any(|d| d.contains("no claim outside")));
                }
            }
            Status::Unknown => {
                prop_assert!(v.witness.is_none() && v.certificate.is_none());
            }
        }
        prop_assert!(!v.diagnostics.is_empty());
    }

    #[test]
    fn box_emptiness_claims_survive_point_sampling(
        cons in prop::collection::vec(arb_poly(2), 1..=2),
        sides in prop::collection::vec((arb_pos_rat(), arb_pos_rat()), 2),
        probes in prop::collection::vec((0i64..=16, 0i64..=16), 20),
    ) {
        let spec = RegressionSpec::new(2, 1).unwrap();
        let sys = InequalitySystem::new(2, 1, spec.corner_design(), Vec::new(), cons).unwrap();
        let region: Vec<(Rat, Rat)> =
            sides.iter().map(|(lo, w)| (lo.clone(), lo + w)).collect();
        let mut cfg = tiny_cfg();
        cfg.region = Some(region.clone());
        let v = decide(&sys, Engine::Bnb, &cfg);
        if v.status == Status::Infeasible {
            // preprocessing may settle it globally (all-nonnegative
            // constraint); otherwise the claim rests on a complete trace
            match &v.certificate {
                Some(c) => prop_assert!(verify_certificate(&sys, c)),
                None => prop_assert!(v.boxlog.iter().any(|t| t.complete())),
            }
            for (t1, t2) in probes {
                let q = vec![
                    &region[0].0 + rat(t1, 16) * (&region[0].1 - &region[0].0),
                    &region[1].0 + rat(t2, 16) * (&region[1].1 - &region[1].0),
                ];
                prop_assert!(
                    !verify_witness(&sys, &q).unwrap(),
                    "claimed-empty box contains satisfying point {:?}",
                    q
                );
            }
        } else if v.status == Status::Feasible {
            prop_assert!(verify_witness(&sys, v.witness.as_ref().unwrap()).unwrap());
        }
    }

    #[test]
    fn verdicts_and_systems_round_trip_through_json(
        cons in prop::collection::vec(arb_poly(1), 1..=2),
    ) {
        let sys = sys1(cons);
        let js = serde_json::to_string(&sys).unwrap();
        let back: InequalitySystem = serde_json::from_str(&js).unwrap();
        prop_assert_eq!(&back, &sys);
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), js);

        let v = decide(&sys, Engine::Auto, &tiny_cfg());
        let js = serde_json::to_string(&v).unwrap();
        let back: kwfeas::feasibility::Verdict = serde_json::from_str(&js).unwrap();
        prop_assert_eq!(back, v);
    }
}
