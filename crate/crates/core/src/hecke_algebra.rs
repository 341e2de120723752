//! Bulk and boundary Hecke generators and their N-site representation.

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::report::{CheckList, ParamsSnapshot, Rule, VerificationReport};
use crate::sampler::Sampler;
use crate::tensor_core::{comm_residual, embed_at, prop_check, rel_diff, Operator, C64, I};

/// U = Σ_{i≠j} (ê_ij ⊗ ê_ji − q^{−sgn(i−j)} ê_ii ⊗ ê_jj) on C^n ⊗ C^n.
pub fn build_bulk_generator(p: &ModelParams) -> Operator {
    bulk_generator_with_q(p.n, p.mu, 1.0)
}

/// Bulk generator with q replaced by q^{sign}.
pub(crate) fn bulk_generator_with_q(n: usize, mu: C64, sign: f64) -> Operator {
    let mut u = Operator::zeros(&[n, n]);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let s = if i > j { 1.0 } else { -1.0 };
            // ê_ij ⊗ ê_ji sits at row (i,j), column (j,i)
            u.set(i * n + j, j * n + i, C64::new(1.0, 0.0));
            let qpow = (I * mu * (-s * sign)).exp();
            let d = i * n + j;
            u.set(d, d, -qpow);
        }
    }
    u
}

/// ρ(U_l) on sites l, l+1 of the N-site space, 1 ≤ l ≤ N−1.
pub fn rep_bulk(p: &ModelParams, l: usize) -> Result<Operator> {
    if l < 1 || l + 1 > p.sites {
        return Err(Error::InvalidParams(format!("bulk index l = {l} outside 1..={}", p.sites.saturating_sub(1))));
    }
    embed_at(&build_bulk_generator(p), &[l - 1, l], &p.quantum_dims())
}

/// U₀ = −Q⁻¹ ê₁₁ − Q ê_nn + ê_1n + ê_n1 with Q = i e^{iμm}.
pub fn build_boundary_generator(p: &ModelParams) -> Operator {
    let n = p.n;
    let q = p.big_q();
    let mut u = Operator::zeros(&[n]);
    u.set(0, 0, -q.inv());
    u.set(n - 1, n - 1, -q);
    u.set(0, n - 1, u.get(0, n - 1) + 1.0);
    u.set(n - 1, 0, u.get(n - 1, 0) + 1.0);
    u
}

/// Single-site boundary generator U₀ / (2i sinh iμ).
pub fn boundary_generator_rescaled(p: &ModelParams) -> Operator {
    build_boundary_generator(p).scale((I * p.sinh_imu() * 2.0).inv())
}

/// ρ(U₀): the rescaled boundary generator on the first site.
pub fn rep_boundary(p: &ModelParams) -> Operator {
    embed_at(&boundary_generator_rescaled(p), &[0], &p.quantum_dims()).expect("site 0 always exists")
}

/// Hecke relation residuals at one parameter point; ids end in `tag`.
pub fn hecke_checks(p: &ModelParams, tol: f64, tag: &str) -> CheckList {
    let mut out = CheckList::new();
    let nsites = p.sites;
    let hc = p.hecke_constants();
    let bulk: Vec<Operator> = (1..nsites).map(|l| rep_bulk(p, l).expect("valid index")).collect();
    let u0 = rep_boundary(p);

    for (k, u) in bulk.iter().enumerate() {
        out.run(format!("hecke.quadratic.l{}{tag}", k + 1), Rule::AtMost(tol), || {
            (rel_diff(&(u * u), &u.scale(hc.delta)), None)
        });
    }
    for k in 0..bulk.len().saturating_sub(1) {
        let (a, b) = (&bulk[k], &bulk[k + 1]);
        out.run(format!("hecke.braid.l{}{tag}", k + 1), Rule::AtMost(tol), || {
            let aba = &(a * b) * a;
            let lhs = &aba - a;
            let rhs = &(&(b * a) * b) - b;
            // both sides vanish for n = 2, so scale by the cubic term
            ((&lhs - &rhs).norm() / aba.norm().max(a.norm()), None)
        });
    }
    for a in 0..bulk.len() {
        for b in a + 2..bulk.len() {
            out.run(format!("hecke.distant.l{}m{}{tag}", a + 1, b + 1), Rule::AtMost(tol), || {
                (comm_residual(&bulk[a], &bulk[b]), None)
            });
        }
    }
    for (k, u) in bulk.iter().enumerate().skip(1) {
        out.run(format!("hecke.boundary_distant.l{}{tag}", k + 1), Rule::AtMost(tol), || {
            (comm_residual(&u0, u), None)
        });
    }

    // quadratic boundary relation with the rescaled δ₀ fitted, then compared to its closed form
    let sq = &u0 * &u0;
    let fit = prop_check(&sq, &u0, tol).expect("boundary generator is nonzero");
    out.run(format!("hecke.boundary_quadratic.fit{tag}"), Rule::AtMost(tol), || (fit.residual, Some(fit.scalar)));
    out.run(format!("hecke.boundary_quadratic.closed_form{tag}"), Rule::AtMost(tol), || {
        let d = p.delta0_rescaled();
        ((fit.scalar - d).norm() / d.norm(), Some(d))
    });
    out.run(format!("hecke.raw_boundary_quadratic.u0{tag}"), Rule::AtMost(tol), || {
        let r = build_boundary_generator(p);
        (rel_diff(&(&r * &r), &r.scale(hc.delta0)), Some(hc.delta0))
    });

    if let Some(u1) = bulk.first() {
        let u10 = u1 * &u0;
        let u01 = &u0 * u1;
        let u1010 = &u10 * &u10;
        let u0101 = &u01 * &u01;
        let kfit = prop_check(&u1010, &u10, tol).expect("U1 U0 is nonzero");
        let kappa = p.kappa_rescaled();
        out.run(format!("hecke.kappa.fit{tag}"), Rule::AtMost(tol), || (kfit.residual, Some(kfit.scalar)));
        out.run(format!("hecke.kappa.closed_form{tag}"), Rule::AtMost(tol), || {
            ((kfit.scalar - kappa).norm() / kappa.norm(), Some(kappa))
        });
        out.run(format!("hecke.kappa.ratio_invariance{tag}"), Rule::AtMost(tol), || {
            let raw = hc.delta0 / hc.kappa;
            let resc = p.delta0_rescaled() / kfit.scalar;
            ((raw - resc).norm() / raw.norm(), Some(raw))
        });
        out.run(format!("hecke.mixed.l1{tag}"), Rule::AtMost(tol), || {
            let lhs = &u1010 - &u10.scale(kappa);
            let rhs = &u0101 - &u01.scale(kappa);
            let scale = u1010.norm().max(u10.norm() * kappa.norm());
            ((&lhs - &rhs).norm() / scale, None)
        });
        out.run(format!("hecke.quotient.u1u0{tag}"), Rule::AtMost(tol), || {
            (rel_diff(&u1010, &u10.scale(kappa)), None)
        });
        out.run(format!("hecke.quotient.u0u1{tag}"), Rule::AtMost(tol), || {
            (rel_diff(&u0101, &u01.scale(kappa)), None)
        });
    }
    out
}

/// All Hecke, B-type and quotient relations at `p` and at `samples − 1` further random (μ, m, ζ).
pub fn verify_hecke_suite_sampled(p: &ModelParams, samples: usize, seed: u64, tol: f64) -> Result<VerificationReport> {
    p.validate()?;
    let mut sampler = Sampler::new(seed);
    let mut out = CheckList::new();
    for s in 0..samples.max(1) {
        let ps = if s == 0 { *p } else { sampler.params(p.n, p.sites) };
        out.extend(hecke_checks(&ps, tol, &format!(".s{s}")));
    }
    Ok(out.into_report("hecke", ParamsSnapshot::from_params(p, samples, seed, tol)))
}

/// Relations at the given parameters only.
pub fn verify_hecke_suite(p: &ModelParams, tol: f64) -> Result<VerificationReport> {
    verify_hecke_suite_sampled(p, 1, 0, tol)
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::tensor_core::{c, kron, ONE, ZERO};

    fn params(n: usize, sites: usize) -> ModelParams {
        ModelParams::new(n, c(0.31, 0.0), c(0.8, 0.2), c(0.6, 0.1), sites).unwrap()
    }

    #[test]
    fn u_rank_two_explicit() {
        let p = params(2, 2);
        let u = build_bulk_generator(&p);
        let q = p.q();
        let want = [
            [ZERO, ZERO, ZERO, ZERO],
            [ZERO, -q, ONE, ZERO],
            [ZERO, ONE, -q.inv(), ZERO],
            [ZERO, ZERO, ZERO, ZERO],
        ];
        for r in 0..4 {
            for col in 0..4 {
                assert!((u.get(r, col) - want[r][col]).norm() < 1e-15, "entry {r},{col}");
            }
        }
    }

    #[test]
    fn u_squares_to_delta_u() {
        for n in 2..=4 {
            let p = params(n, 2);
            let u = build_bulk_generator(&p);
            assert!(rel_diff(&(&u * &u), &u.scale(p.hecke_constants().delta)) < 1e-12);
        }
    }

    #[test]
    fn u_rank_three_has_twelve_entries() {
        let p = ModelParams::new(3, c(0.37, 0.0), c(0.8, 0.2), c(0.6, 0.1), 2).unwrap();
        let u = build_bulk_generator(&p);
        let nz = u.matrix().iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nz, 12);
    }

    #[test]
    fn rep_bulk_embeddings() {
        let p = params(3, 2);
        assert_eq!(rep_bulk(&p, 1).unwrap().matrix(), build_bulk_generator(&p).matrix());
        let p3 = params(3, 3);
        let want = kron(&Operator::identity(&[3]), &build_bulk_generator(&p3));
        assert!(rel_diff(&rep_bulk(&p3, 2).unwrap(), &want) < 1e-15);
        assert!(rep_bulk(&p3, 3).is_err());
        assert!(rep_bulk(&p3, 0).is_err());
        let p4 = params(2, 4);
        let r = comm_residual(&rep_bulk(&p4, 1).unwrap(), &rep_bulk(&p4, 3).unwrap());
        assert!(r < 1e-14);
    }

    #[test]
    fn boundary_generator_forms() {
        let p = params(3, 1);
        let u0 = build_boundary_generator(&p);
        let q = p.big_q();
        let want = [[-q.inv(), ZERO, ONE], [ZERO, ZERO, ZERO], [ONE, ZERO, -q]];
        for r in 0..3 {
            for col in 0..3 {
                assert!((u0.get(r, col) - want[r][col]).norm() < 1e-15);
            }
        }
        let p2 = params(2, 1);
        let u0 = build_boundary_generator(&p2);
        assert_eq!(u0.get(0, 1), ONE);
        assert_eq!(u0.get(1, 0), ONE);
        let d0 = p.hecke_constants().delta0;
        let u0 = build_boundary_generator(&p);
        assert!(rel_diff(&(&u0 * &u0), &u0.scale(d0)) < 1e-13);
    }

    #[test]
    fn rep_boundary_single_site_and_locality() {
        let p = params(3, 1);
        let want = build_boundary_generator(&p).scale((I * p.sinh_imu() * 2.0).inv());
        assert!(rel_diff(&rep_boundary(&p), &want) < 1e-15);
        let p3 = params(3, 3);
        assert!(comm_residual(&rep_boundary(&p3), &rep_bulk(&p3, 2).unwrap()) < 1e-14);
        let r = rep_boundary(&p3);
        let sq = &r * &r;
        assert!(rel_diff(&sq, &r.scale(p3.delta0_rescaled())) < 1e-13);
    }

    #[test]
    fn suites_pass_at_desk_scale() {
        for (n, sites, bound) in [(2, 2, 1e-11), (3, 3, 1e-11), (4, 4, 1e-10)] {
            let r = verify_hecke_suite(&params(n, sites), bound).unwrap();
            assert!(r.pass, "{}", r.to_text());
        }
    }

    #[test]
    fn suite_accepts_one_site() {
        let r = verify_hecke_suite(&params(3, 1), 1e-9).unwrap();
        assert!(r.pass, "{}", r.to_text());
    }
}
