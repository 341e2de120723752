//! Property tests over random parameters and spectral variables.

use hecke_boundary::boundary_charges::build_boundary_charges;
use hecke_boundary::cli::{cluster, parse_complex};
use hecke_boundary::hecke_algebra::{build_bulk_generator, rep_boundary, rep_bulk};
use hecke_boundary::params::ModelParams;
use hecke_boundary::reflection_k::{build_k_explicit, reflection_residual};
use hecke_boundary::report::{Check, ParamsSnapshot, VerificationReport};
use hecke_boundary::spin_chain::{build_transfer, ChainSpec};
use hecke_boundary::tensor_core::{c, comm_residual, embed_at, kron, partial_trace_first, rel_diff, Operator, C64};
use hecke_boundary::yang_baxter::{build_r, Gauge};
use proptest::prelude::*;

fn operator(d: usize) -> impl Strategy<Value = Operator> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * d).prop_map(move |v| {
        let mut o = Operator::zeros(&[d]);
        for (k, (re, im)) in v.into_iter().enumerate() {
            o.set(k / d, k % d, c(re, im));
        }
        o
    })
}

fn model(sites: usize) -> impl Strategy<Value = ModelParams> {
    (2usize..=3, 0.15f64..1.2, -0.1f64..0.1, 0.3f64..2.0, -0.5f64..0.5, 0.3f64..2.0, -0.5f64..0.5)
        .prop_filter_map("generic parameters", move |(n, mr, mi, ar, ai, zr, zi)| {
            let p = ModelParams::new(n, c(mr, mi), c(ar, ai), c(zr, zi), sites).ok()?;
            p.validate_hamiltonian().ok().map(|_| p)
        })
}

fn spectral() -> impl Strategy<Value = C64> {
    (-0.8f64..0.8, -0.8f64..0.8).prop_map(|(a, b)| c(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn partial_trace_of_product(a in operator(2), b in operator(3)) {
        let t = partial_trace_first(&kron(&a, &b).with_dims(vec![2, 3]).unwrap()).unwrap();
        prop_assert!(rel_diff(&t, &b.scale(a.trace())) < 1e-12);
    }

    #[test]
    fn embed_adjacent_is_kron(a in operator(2), b in operator(2)) {
        let ab = kron(&a, &b).with_dims(vec![2, 2]).unwrap();
        let e = embed_at(&ab, &[1, 2], &[2, 2, 2]).unwrap();
        let want = kron(&Operator::identity(&[2]), &ab);
        prop_assert!(rel_diff(&e, &want) < 1e-14);
    }

    #[test]
    fn hecke_quadratic_and_braid(p in model(3)) {
        let u = build_bulk_generator(&p);
        let delta = p.hecke_constants().delta;
        prop_assert!(rel_diff(&(&u * &u), &u.scale(delta)) < 1e-10);
        let (a, b) = (rep_bulk(&p, 1).unwrap(), rep_bulk(&p, 2).unwrap());
        let aba = &(&a * &b) * &a;
        let lhs = &aba - &a;
        let rhs = &(&(&b * &a) * &b) - &b;
        prop_assert!((&lhs - &rhs).norm() / aba.norm().max(a.norm()) < 1e-10);
        prop_assert!(comm_residual(&rep_boundary(&p), &b) < 1e-10);
    }

    #[test]
    fn yang_baxter(p in model(1), l1 in spectral(), l2 in spectral(), principal in any::<bool>()) {
        let g = if principal { Gauge::Principal } else { Gauge::Homogeneous };
        let d = [p.n; 3];
        let r = |l: C64, s: [usize; 2]| embed_at(&build_r(&p, l, g), &s, &d).unwrap();
        let lhs = &(&r(l1 - l2, [0, 1]) * &r(l1, [0, 2])) * &r(l2, [1, 2]);
        let rhs = &(&r(l2, [1, 2]) * &r(l1, [0, 2])) * &r(l1 - l2, [0, 1]);
        prop_assert!(rel_diff(&lhs, &rhs) < 1e-9);
    }

    #[test]
    fn reflection_equation(p in model(1), l1 in spectral(), l2 in spectral()) {
        for g in Gauge::ALL {
            let k = |l: C64| build_k_explicit(&p, l, g);
            prop_assert!(reflection_residual(&p, g, &k, l1, l2) < 1e-9);
        }
    }

    #[test]
    fn open_transfer_commutes_and_charges_are_conserved(p in model(2), l1 in spectral(), l2 in spectral()) {
        let spec = ChainSpec::standard(p);
        let t1 = build_transfer(&spec, l1, false).unwrap();
        let t2 = build_transfer(&spec, l2, false).unwrap();
        prop_assert!(comm_residual(&t1, &t2) < 1e-9);
        for (_, q) in build_boundary_charges(&p, 2).entries {
            prop_assert!(comm_residual(&t1, &q) < 1e-9);
        }
    }

    #[test]
    fn complex_flag_round_trip(re in -1e3f64..1e3, im in -1e3f64..1e3) {
        let z = parse_complex(&format!("{re}{im:+}i")).unwrap();
        prop_assert_eq!(z, c(re, im));
    }

    #[test]
    fn clusters_cover_every_eigenvalue(v in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..40), tol in 1e-6f64..0.5) {
        let mut ev: Vec<C64> = v.into_iter().map(|(a, b)| c(a, b)).collect();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let cl = cluster(&ev, tol);
        prop_assert_eq!(cl.iter().map(|c| c.multiplicity).sum::<usize>(), ev.len());
    }

    #[test]
    fn report_pass_is_conjunction(passes in prop::collection::vec(any::<bool>(), 0..12)) {
        let checks: Vec<Check> = passes
            .iter()
            .enumerate()
            .map(|(k, &pass)| Check { id: format!("x.y.{k:02}"), residual: 0.0, scalar: None, pass, millis: 0 })
            .collect();
        let p = ModelParams::default();
        let r = VerificationReport::new("x", ParamsSnapshot::from_params(&p, 1, 0, 1e-9), checks);
        prop_assert_eq!(r.pass, passes.iter().all(|&b| b));
        let back: VerificationReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        prop_assert_eq!(back, r);
    }
}
