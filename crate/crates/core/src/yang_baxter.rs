//! Trigonometric R-matrices in the homogeneous and principal gradations.

use crate::error::{Error, Result};
use crate::hecke_algebra::build_bulk_generator;
use crate::params::ModelParams;
use crate::report::{CheckList, ParamsSnapshot, Rule, VerificationReport};
use crate::sampler::Sampler;
use crate::tensor_core::{
    comm_residual, embed_at, identity_defect, kron, partial_transpose, permutation_swap, prop_check, rel_diff,
    Operator, C64, I, ONE,
};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gauge {
    Homogeneous,
    Principal,
}

impl Gauge {
    pub const ALL: [Gauge; 2] = [Gauge::Homogeneous, Gauge::Principal];

    pub fn name(self) -> &'static str {
        match self {
            Gauge::Homogeneous => "homogeneous",
            Gauge::Principal => "principal",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Gauge::Homogeneous => "h",
            Gauge::Principal => "p",
        }
    }
}

impl fmt::Display for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Gauge {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "homogeneous" => Ok(Gauge::Homogeneous),
            "principal" => Ok(Gauge::Principal),
            _ => Err(Error::InvalidLabel(format!("gauge '{s}' (expected homogeneous|principal)"))),
        }
    }
}

/// Ř(λ) = sinh(λ+iμ) I + sinh(λ) U.
pub fn build_rcheck(p: &ModelParams, lambda: C64) -> Operator {
    let u = build_bulk_generator(p);
    let id = Operator::identity(&[p.n, p.n]);
    &id.scale((lambda + I * p.mu).sinh()) + &u.scale(lambda.sinh())
}

/// Ř(λ) in the given gradation, Ř = P R.
pub fn build_rcheck_gauged(p: &ModelParams, lambda: C64, gauge: Gauge) -> Operator {
    &permutation_swap(p.n) * &build_r(p, lambda, gauge)
}

fn off_diag_exponent(n: usize, i: usize, j: usize, gauge: Gauge) -> f64 {
    let s = if i > j { 1.0 } else { -1.0 };
    match gauge {
        Gauge::Homogeneous => -s,
        Gauge::Principal => (i as f64 - j as f64) * 2.0 / n as f64 - s,
    }
}

/// R(λ) with explicit entries: a on ê_ii⊗ê_ii, b on ê_ii⊗ê_jj, c·phase on ê_ij⊗ê_ji.
pub fn build_r(p: &ModelParams, lambda: C64, gauge: Gauge) -> Operator {
    r_with(p, lambda, gauge, false)
}

/// dR/dλ, entrywise.
pub fn build_r_derivative(p: &ModelParams, lambda: C64, gauge: Gauge) -> Operator {
    r_with(p, lambda, gauge, true)
}

fn r_with(p: &ModelParams, lambda: C64, gauge: Gauge, derivative: bool) -> Operator {
    let n = p.n;
    let (a, b) = if derivative {
        ((lambda + I * p.mu).cosh(), lambda.cosh())
    } else {
        ((lambda + I * p.mu).sinh(), lambda.sinh())
    };
    let cc = p.sinh_imu();
    let mut r = Operator::zeros(&[n, n]);
    for i in 0..n {
        for j in 0..n {
            let d = i * n + j;
            if i == j {
                r.set(d, d, a);
            } else {
                r.set(d, d, b);
                let e = off_diag_exponent(n, i, j, gauge);
                let v = cc * (lambda * e).exp() * if derivative { C64::new(e, 0.0) } else { ONE };
                r.set(d, j * n + i, v);
            }
        }
    }
    r
}

/// R̂ = P R P.
pub fn hat(r: &Operator) -> Operator {
    let pm = permutation_swap(r.dims()[0]);
    &(&pm * r) * &pm
}

/// 𝒱(λ) = diag(e^{2kλ/n}), k = 0…n−1.
pub fn build_gauge_v(p: &ModelParams, lambda: C64) -> Operator {
    let d: Vec<C64> = (0..p.n).map(|k| (lambda * (2.0 * k as f64 / p.n as f64)).exp()).collect();
    Operator::from_diag(&d)
}

/// Crossing matrix: diag(q^{n−2j+1}) homogeneous, identity principal.
pub fn build_m(p: &ModelParams, gauge: Gauge) -> Operator {
    match gauge {
        Gauge::Homogeneous => {
            let d: Vec<C64> = (1..=p.n).map(|j| p.q_pow((p.n as f64) - 2.0 * j as f64 + 1.0)).collect();
            Operator::from_diag(&d)
        }
        Gauge::Principal => Operator::identity(&[p.n]),
    }
}

/// R^{t₁}(λ) M₁ R^{t₂}(−λ−2iρ) M₁⁻¹.
pub fn crossing_product(p: &ModelParams, lambda: C64, rho: C64, gauge: Gauge) -> Operator {
    let m = build_m(p, gauge);
    let id = Operator::identity(&[p.n]);
    let m1 = kron(&m, &id);
    let m1i = kron(&m.inverse().expect("M is diagonal and invertible"), &id);
    let a = partial_transpose(&build_r(p, lambda, gauge), 0).expect("two factors");
    let b = partial_transpose(&build_r(p, -lambda - I * rho * 2.0, gauge), 1).expect("two factors");
    &(&(&a * &m1) * &b) * &m1i
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossingFit {
    pub rho: C64,
    pub residual: f64,
}

/// Fit ρ: scan ρ = sμ over real s, then polish by Gauss–Newton in complex ρ.
pub fn fit_crossing_rho(p: &ModelParams, lambda: C64, gauge: Gauge) -> CrossingFit {
    let defect = |rho: C64| identity_defect(&crossing_product(p, lambda, rho, gauge));
    let smax = p.n as f64 + 1.0;
    let steps = (smax * 100.0) as usize;
    let mut best = (C64::new(0.0, 0.0), f64::INFINITY);
    for k in 0..=steps {
        let rho = p.mu * (k as f64 * smax / steps as f64);
        let d = defect(rho);
        if d < best.1 {
            best = (rho, d);
        }
    }
    let resid = |rho: C64| -> Vec<C64> {
        let x = crossing_product(p, lambda, rho, gauge);
        let t = x.trace() / x.side() as f64;
        let mut v: Vec<C64> = x.matrix().iter().copied().collect();
        let d = x.side();
        for k in 0..d {
            v[k * d + k] -= t;
        }
        v
    };
    let mut rho = best.0;
    let h = 1e-6;
    for _ in 0..30 {
        let r0 = resid(rho);
        let rp = resid(rho + h);
        let rm = resid(rho - h);
        let jac: Vec<C64> = rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        let jj: f64 = jac.iter().map(|z| z.norm_sqr()).sum();
        if jj == 0.0 {
            break;
        }
        let jr: C64 = jac.iter().zip(&r0).map(|(j, r)| j.conj() * r).sum();
        let step = -jr / jj;
        rho += step;
        if step.norm() < 1e-15 * rho.norm().max(1.0) {
            break;
        }
    }
    let d = defect(rho);
    if d <= best.1 {
        CrossingFit { rho, residual: d }
    } else {
        CrossingFit { rho: best.0, residual: best.1 }
    }
}

/// YBE, braid YBE, unitarity, crossing and [M⊗M, R] = 0 over sampled spectral parameters.
pub fn verify_ybe_suite(p: &ModelParams, samples: usize, seed: u64, tol: f64) -> Result<VerificationReport> {
    p.validate()?;
    let mut out = CheckList::new();
    let n = p.n;
    let d3 = [n, n, n];
    let mut sampler = Sampler::new(seed);
    let pairs: Vec<(C64, C64)> = (0..samples.max(2)).map(|_| (sampler.lambda(p), sampler.lambda(p))).collect();
    let pm = permutation_swap(n);
    for gauge in Gauge::ALL {
        let g = gauge.short();
        let mm = {
            let m = build_m(p, gauge);
            kron(&m, &m)
        };
        let rho_fit = fit_crossing_rho(p, pairs[0].0, gauge);
        let rho_fit2 = fit_crossing_rho(p, pairs[1].0, gauge);
        out.run(format!("ybe.crossing_rho.{g}.fit"), Rule::AtMost(tol), || (rho_fit.residual, Some(rho_fit.rho)));
        out.run(format!("ybe.crossing_rho.{g}.drift"), Rule::AtMost(1e-8), || {
            ((rho_fit.rho - rho_fit2.rho).norm() / rho_fit.rho.norm(), Some(rho_fit2.rho))
        });
        out.run(format!("ybe.crossing_rho.{g}.vs_n_mu_half"), Rule::Info, || {
            let expect = p.mu * (n as f64 / 2.0);
            ((rho_fit.rho - expect).norm() / expect.norm(), Some(expect))
        });
        for (s, &(l1, l2)) in pairs.iter().enumerate().take(samples.max(1)) {
            let r12 = embed_at(&build_r(p, l1 - l2, gauge), &[0, 1], &d3)?;
            let r13 = embed_at(&build_r(p, l1, gauge), &[0, 2], &d3)?;
            let r23 = embed_at(&build_r(p, l2, gauge), &[1, 2], &d3)?;
            out.run(format!("ybe.ybe.{g}.s{s}"), Rule::AtMost(tol), || {
                (rel_diff(&(&(&r12 * &r13) * &r23), &(&(&r23 * &r13) * &r12)), None)
            });
            let c12 = |l: C64| embed_at(&build_rcheck_gauged(p, l, gauge), &[0, 1], &d3).expect("slots valid");
            let c23 = |l: C64| embed_at(&build_rcheck_gauged(p, l, gauge), &[1, 2], &d3).expect("slots valid");
            out.run(format!("ybe.braid.{g}.s{s}"), Rule::AtMost(tol), || {
                let lhs = &(&c12(l1 - l2) * &c23(l1)) * &c12(l2);
                let rhs = &(&c23(l2) * &c12(l1)) * &c23(l1 - l2);
                (rel_diff(&lhs, &rhs), None)
            });
            out.run(format!("ybe.unitarity_rcheck.{g}.s{s}"), Rule::AtMost(tol), || {
                let x = &build_rcheck_gauged(p, l1, gauge) * &build_rcheck_gauged(p, -l1, gauge);
                let f = prop_check(&x, &Operator::identity(&[n, n]), tol).expect("identity is nonzero");
                (f.residual, Some(f.scalar))
            });
            out.run(format!("ybe.unitarity_r.{g}.s{s}"), Rule::AtMost(tol), || {
                let x = &build_r(p, l1, gauge) * &hat(&build_r(p, -l1, gauge));
                let f = prop_check(&x, &Operator::identity(&[n, n]), tol).expect("identity is nonzero");
                (f.residual, Some(f.scalar))
            });
            out.run(format!("ybe.crossing.{g}.s{s}"), Rule::AtMost(tol), || {
                let x = crossing_product(p, l1, rho_fit.rho, gauge);
                let f = prop_check(&x, &Operator::identity(&[n, n]), tol).expect("identity is nonzero");
                (f.residual, Some(f.scalar))
            });
            out.run(format!("ybe.mm_commute.{g}.s{s}"), Rule::AtMost(tol), || {
                (comm_residual(&mm, &build_r(p, l1, gauge)), None)
            });
            if gauge == Gauge::Homogeneous {
                out.run(format!("ybe.p_rcheck.h.s{s}"), Rule::AtMost(tol), || {
                    (rel_diff(&(&pm * &build_rcheck(p, l1)), &build_r(p, l1, gauge)), None)
                });
                out.run(format!("ybe.gauge_covariance.s{s}"), Rule::AtMost(tol), || {
                    let id = Operator::identity(&[n]);
                    let v = kron(&build_gauge_v(p, l1), &id);
                    let vi = kron(&build_gauge_v(p, -l1), &id);
                    let conj = &(&v * &build_r(p, l1, Gauge::Homogeneous)) * &vi;
                    (rel_diff(&conj, &build_r(p, l1, Gauge::Principal)), None)
                });
            }
        }
    }
    Ok(out.into_report("ybe", ParamsSnapshot::from_params(p, samples, seed, tol)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_core::{c, ZERO};

    fn params(n: usize) -> ModelParams {
        ModelParams::new(n, c(0.37, 0.05), c(0.8, 0.2), c(0.6, 0.1), 2).unwrap()
    }

    #[test]
    fn rcheck_at_zero_is_scalar() {
        let p = params(3);
        let r = build_rcheck(&p, ZERO);
        assert!(rel_diff(&r, &Operator::identity(&[3, 3]).scale(p.sinh_imu())) < 1e-15);
    }

    #[test]
    fn rcheck_entry_rank_two() {
        let p = ModelParams::new(2, c(0.3, 0.0), c(0.8, 0.2), c(0.6, 0.0), 2).unwrap();
        let l = c(0.5, 0.0);
        let r = build_rcheck(&p, l);
        let want = (l + I * 0.3).sinh() - c(0.0, 0.3).exp() * l.sinh();
        assert!((r.get(1, 1) - want).norm() < 1e-15);
    }

    #[test]
    fn r_at_zero_is_swap() {
        let p = params(3);
        let r = build_r(&p, ZERO, Gauge::Homogeneous);
        assert!(rel_diff(&r, &permutation_swap(3).scale(p.sinh_imu())) < 1e-15);
    }

    #[test]
    fn m_matrix() {
        let p = params(2);
        let m = build_m(&p, Gauge::Homogeneous);
        assert!((m.get(0, 0) - p.q()).norm() < 1e-15);
        assert!((m.get(1, 1) - p.q().inv()).norm() < 1e-15);
        for n in 2..=4 {
            let p = params(n);
            let t = build_m(&p, Gauge::Homogeneous).trace();
            let want = (I * p.mu * n as f64).sinh() / p.sinh_imu();
            assert!((t - want).norm() < 1e-13);
            assert_eq!(build_m(&p, Gauge::Principal), Operator::identity(&[n]));
        }
    }

    #[test]
    fn gauge_v() {
        let p = params(2);
        let l = c(0.3, -0.2);
        let v = build_gauge_v(&p, l);
        assert!((v.get(1, 1) - l.exp()).norm() < 1e-15);
        assert!(rel_diff(&(&v * &build_gauge_v(&p, -l)), &Operator::identity(&[2])) < 1e-15);
        assert_eq!(build_gauge_v(&p, ZERO), Operator::identity(&[2]));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = params(3);
        for gauge in Gauge::ALL {
            let l = c(0.2, 0.1);
            let h = 1e-5;
            let fd = (&build_r(&p, l + h, gauge) - &build_r(&p, l - h, gauge)).scale(c(0.5 / h, 0.0));
            assert!(rel_diff(&fd, &build_r_derivative(&p, l, gauge)) < 1e-9);
        }
    }

    #[test]
    fn crossing_rho_is_n_mu_half() {
        for n in 2..=4 {
            let p = params(n);
            for gauge in Gauge::ALL {
                let f = fit_crossing_rho(&p, c(0.3, 0.1), gauge);
                assert!(f.residual < 1e-12, "n={n} {gauge}: {}", f.residual);
                assert!((f.rho - p.mu * (n as f64 / 2.0)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn suite_passes() {
        for n in 2..=4 {
            let r = verify_ybe_suite(&params(n), 4, 3, 1e-9).unwrap();
            assert!(r.pass, "{}", r.to_text());
        }
    }
}
