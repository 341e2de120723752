//! Boundary K-matrices: Hecke ansatz, explicit entries, diagonal family, left boundaries
//! and the comparison with an independent trigonometric parametrisation.

use crate::error::{Error, Result};
use crate::hecke_algebra::boundary_generator_rescaled;
use crate::params::ModelParams;
use crate::report::{CheckList, ParamsSnapshot, Rule, VerificationReport};
use crate::sampler::Sampler;
use crate::tensor_core::{kron, permutation_swap, prop_check, rel_diff, Operator, C64, I, ONE, ZERO};
use crate::yang_baxter::{build_gauge_v, build_m, build_r, hat, Gauge};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeftBoundaryKind {
    Identity,
    TransposeShift,
    AffineLimit,
}

impl LeftBoundaryKind {
    pub const ALL: [LeftBoundaryKind; 3] =
        [LeftBoundaryKind::Identity, LeftBoundaryKind::TransposeShift, LeftBoundaryKind::AffineLimit];

    pub fn name(self) -> &'static str {
        match self {
            LeftBoundaryKind::Identity => "identity",
            LeftBoundaryKind::TransposeShift => "transpose-shift",
            LeftBoundaryKind::AffineLimit => "affine-limit",
        }
    }
}

impl fmt::Display for LeftBoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LeftBoundaryKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(LeftBoundaryKind::Identity),
            "transpose-shift" | "transpose_shift" => Ok(LeftBoundaryKind::TransposeShift),
            "affine-limit" | "affine_limit" => Ok(LeftBoundaryKind::AffineLimit),
            _ => Err(Error::InvalidLabel(format!(
                "left boundary '{s}' (expected identity|transpose-shift|affine-limit)"
            ))),
        }
    }
}

/// K = x(λ) I + y(λ) ρ(U₀) on a single site.
pub fn build_k_ansatz(p: &ModelParams, lambda: C64) -> Operator {
    let id = Operator::identity(&[p.n]);
    &id.scale(p.x_of(lambda)) + &boundary_generator_rescaled(p).scale(p.y_of(lambda))
}

fn k_homogeneous(p: &ModelParams, lambda: C64, derivative: bool) -> Operator {
    let n = p.n;
    let chm = p.cosh_imum();
    let chz = p.cosh_2imuzeta();
    let l2 = lambda * 2.0;
    let mut k = Operator::zeros(&[n]);
    if derivative {
        k.set(0, 0, l2.exp() * chm * 2.0);
        k.set(n - 1, n - 1, -(-l2).exp() * chm * 2.0);
        for j in 1..n - 1 {
            k.set(j, j, (l2 + I * p.mu * p.m).sinh() * 2.0);
        }
        let off = -I * l2.cosh() * 2.0;
        k.set(0, n - 1, k.get(0, n - 1) + off);
        k.set(n - 1, 0, k.get(n - 1, 0) + off);
    } else {
        k.set(0, 0, l2.exp() * chm - chz);
        k.set(n - 1, n - 1, (-l2).exp() * chm - chz);
        for j in 1..n - 1 {
            k.set(j, j, (l2 + I * p.mu * p.m).cosh() - chz);
        }
        let off = -I * l2.sinh();
        k.set(0, n - 1, k.get(0, n - 1) + off);
        k.set(n - 1, 0, k.get(n - 1, 0) + off);
    }
    k
}

/// Explicit K-matrix entries; the principal form carries e^{2(a+b)λ/n} on entry (a, b), 0-based.
pub fn build_k_explicit(p: &ModelParams, lambda: C64, gauge: Gauge) -> Operator {
    let kh = k_homogeneous(p, lambda, false);
    match gauge {
        Gauge::Homogeneous => kh,
        Gauge::Principal => {
            let n = p.n;
            let mut k = kh;
            for a in 0..n {
                for b in 0..n {
                    let v = k.get(a, b);
                    if v != ZERO {
                        k.set(a, b, v * (lambda * (2.0 * (a + b) as f64 / n as f64)).exp());
                    }
                }
            }
            k
        }
    }
}

/// dK/dλ of the homogeneous explicit K-matrix.
pub fn build_k_explicit_derivative(p: &ModelParams, lambda: C64) -> Operator {
    k_homogeneous(p, lambda, true)
}

/// diag(α, …, α, β, …, β) with l entries α = sinh(−λ+iμξ)e^λ and β = sinh(λ+iμξ)e^{−λ}.
pub fn build_k_diagonal(p: &ModelParams, lambda: C64, l: usize, xi: C64) -> Result<Operator> {
    if l < 1 || l >= p.n {
        return Err(Error::InvalidParams(format!("diagonal block size l = {l} outside 1..={}", p.n - 1)));
    }
    let alpha = (-lambda + I * p.mu * xi).sinh() * lambda.exp();
    let beta = (lambda + I * p.mu * xi).sinh() * (-lambda).exp();
    let d: Vec<C64> = (0..p.n).map(|k| if k < l { alpha } else { beta }).collect();
    Ok(Operator::from_diag(&d))
}

/// Right-boundary K families selectable for a chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RightBoundary {
    Explicit,
    Ansatz,
    Diagonal { l: usize, xi: C64 },
    Trivial,
}

impl RightBoundary {
    pub fn name(&self) -> &'static str {
        match self {
            RightBoundary::Explicit => "explicit",
            RightBoundary::Ansatz => "ansatz",
            RightBoundary::Diagonal { .. } => "diagonal",
            RightBoundary::Trivial => "trivial",
        }
    }

    /// K^{(r)}(λ) in the given gradation. Ansatz and diagonal are homogeneous objects and are
    /// carried to the principal gradation by K ↦ 𝒱(λ) K 𝒱(λ).
    pub fn build(&self, p: &ModelParams, lambda: C64, gauge: Gauge) -> Result<Operator> {
        let kh = match *self {
            RightBoundary::Explicit => return Ok(build_k_explicit(p, lambda, gauge)),
            RightBoundary::Ansatz => build_k_ansatz(p, lambda),
            RightBoundary::Diagonal { l, xi } => build_k_diagonal(p, lambda, l, xi)?,
            RightBoundary::Trivial => Operator::identity(&[p.n]),
        };
        Ok(match gauge {
            Gauge::Homogeneous => kh,
            Gauge::Principal => {
                let v = build_gauge_v(p, lambda);
                &(&v * &kh) * &v
            }
        })
    }
}

/// diag(e^{−2λ−iμn}, …, e^{−2λ−iμn}, e^{2λ+iμn}).
pub fn affine_limit_diag(p: &ModelParams, lambda: C64) -> Operator {
    let s = lambda * 2.0 + I * p.mu * p.n as f64;
    let d: Vec<C64> = (0..p.n).map(|k| if k + 1 < p.n { (-s).exp() } else { s.exp() }).collect();
    Operator::from_diag(&d)
}

/// Homogeneous left boundary K^{(l)}(λ). `source` is the K family used by transpose-shift.
pub fn build_k_left(
    p: &ModelParams,
    lambda: C64,
    kind: LeftBoundaryKind,
    source: Option<&dyn Fn(C64) -> Operator>,
) -> Result<Operator> {
    match kind {
        LeftBoundaryKind::Identity => Ok(Operator::identity(&[p.n])),
        LeftBoundaryKind::TransposeShift => {
            let src = source.ok_or_else(|| Error::Missing("transpose-shift needs a source K family".into()))?;
            Ok(src(-lambda - I * p.mu * (p.n as f64 / 2.0)).transpose())
        }
        LeftBoundaryKind::AffineLimit => Ok(affine_limit_diag(p, lambda)),
    }
}

/// The factor F(λ) entering t(λ) = tr₀ F₀(λ) 𝒯₀(λ).
///
/// Homogeneous: F = M K^{(l)}. Principal: transpose-shift uses the principal source with M = I;
/// identity and affine-limit use the gauge image 𝒱(−λ) M K^{(l)}_h 𝒱(−λ).
pub fn left_factor(
    p: &ModelParams,
    lambda: C64,
    kind: LeftBoundaryKind,
    gauge: Gauge,
    source: Option<&dyn Fn(C64, Gauge) -> Operator>,
) -> Result<Operator> {
    let mh = build_m(p, Gauge::Homogeneous);
    match (gauge, kind) {
        (Gauge::Homogeneous, _) => {
            let src = source.map(|f| move |l: C64| f(l, Gauge::Homogeneous));
            let kl = match &src {
                Some(f) => build_k_left(p, lambda, kind, Some(f))?,
                None => build_k_left(p, lambda, kind, None)?,
            };
            Ok(&mh * &kl)
        }
        (Gauge::Principal, LeftBoundaryKind::TransposeShift) => {
            let f = source.ok_or_else(|| Error::Missing("transpose-shift needs a source K family".into()))?;
            Ok(f(-lambda - I * p.mu * (p.n as f64 / 2.0), Gauge::Principal).transpose())
        }
        (Gauge::Principal, _) => {
            let kl = build_k_left(p, lambda, kind, None)?;
            let v = build_gauge_v(p, -lambda);
            Ok(&(&(&v * &mh) * &kl) * &v)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigKParams {
    pub rho_a: C64,
    pub rho_b: C64,
    pub rho_c: C64,
    pub rho_d: C64,
    pub eps_plus: C64,
}

impl TrigKParams {
    /// ρ_c ρ_d − ρ_b (ρ_b + ρ_a e^{−ε₊}).
    pub fn constraint_defect(&self) -> C64 {
        self.rho_c * self.rho_d - self.rho_b * (self.rho_b + self.rho_a * (-self.eps_plus).exp())
    }
}

/// Identify (ρ_a, ρ_b, ε₊) with ρ_c = ρ_d = 1; ε₊ = ½ Log(cosh 2iμζ / cosh iμm).
pub fn map_trig_k(p: &ModelParams) -> Result<TrigKParams> {
    let chm = p.cosh_imum();
    let chz = p.cosh_2imuzeta();
    if chm.norm() < 1e-12 || chz.norm() < 1e-12 {
        return Err(Error::InvalidParams("cosh(i mu m) or cosh(2 i mu zeta) vanishes".into()));
    }
    let eps = (chz / chm).ln() * 0.5;
    Ok(TrigKParams {
        rho_a: -I * chm * eps.exp() * 2.0,
        rho_b: I * p.exp_imum(),
        rho_c: ONE,
        rho_d: ONE,
        eps_plus: eps,
    })
}

/// Independent trigonometric K-matrix at θ = 2λ/n multiplied by e^{nθ/2}/ρ_c.
pub fn build_k_trig(p: &ModelParams, ar: &TrigKParams, lambda: C64) -> Operator {
    let n = p.n;
    let nf = n as f64;
    let th = lambda * (2.0 / nf);
    let sh = (th * nf).sinh();
    let eps = ar.eps_plus;
    let mut k = Operator::zeros(&[n]);
    k.set(0, 0, ar.rho_a * (eps - th * (nf / 2.0)).sinh());
    k.set(n - 1, n - 1, ar.rho_a * (th * (nf - 2.0)).exp() * (eps + th * (nf / 2.0)).sinh());
    let corner = (th * (nf / 2.0 - 1.0)).exp() * sh;
    k.set(0, n - 1, k.get(0, n - 1) + ar.rho_d * corner);
    k.set(n - 1, 0, k.get(n - 1, 0) + ar.rho_c * corner);
    for j in 2..n {
        let jf = j as f64;
        let v = ar.rho_a * (th * (2.0 * jf - 2.0 - nf)).exp() * (eps + th * (nf / 2.0)).sinh()
            + ar.rho_b * (th * (2.0 * jf - 2.0 - nf / 2.0)).exp() * sh;
        k.set(j - 1, j - 1, v);
    }
    k.scale((th * (nf / 2.0)).exp() / ar.rho_c)
}

/// R₁₂(λ₁−λ₂) K₁(λ₁) R₂₁(λ₁+λ₂) K₂(λ₂) − K₂(λ₂) R₁₂(λ₁+λ₂) K₁(λ₁) R₂₁(λ₁−λ₂), relative.
pub fn reflection_residual(
    p: &ModelParams,
    gauge: Gauge,
    k: &dyn Fn(C64) -> Operator,
    l1: C64,
    l2: C64,
) -> f64 {
    let id = Operator::identity(&[p.n]);
    let r = |l: C64| build_r(p, l, gauge);
    let k1 = |l: C64| kron(&k(l), &id);
    let k2 = |l: C64| kron(&id, &k(l));
    let lhs = &(&(&r(l1 - l2) * &k1(l1)) * &hat(&r(l1 + l2))) * &k2(l2);
    let rhs = &(&(&k2(l2) * &r(l1 + l2)) * &k1(l1)) * &hat(&r(l1 - l2));
    rel_diff(&lhs, &rhs)
}

/// Ř-form: Ř(λ₁−λ₂) K₁(λ₁) Ř(λ₁+λ₂) K₁(λ₂) = K₁(λ₂) Ř(λ₁+λ₂) K₁(λ₁) Ř(λ₁−λ₂).
pub fn reflection_residual_rcheck(
    p: &ModelParams,
    gauge: Gauge,
    k: &dyn Fn(C64) -> Operator,
    l1: C64,
    l2: C64,
) -> f64 {
    let id = Operator::identity(&[p.n]);
    let pm = permutation_swap(p.n);
    let rc = |l: C64| &pm * &build_r(p, l, gauge);
    let k1 = |l: C64| kron(&k(l), &id);
    let lhs = &(&(&rc(l1 - l2) * &k1(l1)) * &rc(l1 + l2)) * &k1(l2);
    let rhs = &(&(&k1(l2) * &rc(l1 + l2)) * &k1(l1)) * &rc(l1 - l2);
    rel_diff(&lhs, &rhs)
}

/// Reflection equation for every K family, K-unitarity, ansatz/explicit equality,
/// gauge covariance and the match with the trigonometric family.
pub fn verify_reflection_suite(
    p: &ModelParams,
    samples: usize,
    seed: u64,
    tol: f64,
    diag_block: usize,
    xi: C64,
) -> Result<VerificationReport> {
    p.validate()?;
    build_k_diagonal(p, C64::new(0.1, 0.0), diag_block, xi)?;
    let mut out = CheckList::new();
    let n = p.n;
    let mut sampler = Sampler::new(seed);
    let pairs: Vec<(C64, C64)> =
        (0..samples.max(1)).map(|_| (sampler.lambda_small(p), sampler.lambda_small(p))).collect();

    type KFam<'a> = (&'a str, Gauge, Box<dyn Fn(C64) -> Operator + 'a>);
    let families: Vec<KFam> = vec![
        ("explicit", Gauge::Homogeneous, Box::new(|l| build_k_explicit(p, l, Gauge::Homogeneous))),
        ("explicit", Gauge::Principal, Box::new(|l| build_k_explicit(p, l, Gauge::Principal))),
        ("ansatz", Gauge::Homogeneous, Box::new(|l| build_k_ansatz(p, l))),
        (
            "diagonal",
            Gauge::Homogeneous,
            Box::new(move |l| build_k_diagonal(p, l, diag_block, xi).expect("block size validated")),
        ),
    ];
    let ar = map_trig_k(p)?;
    out.run("reflection.trig_k.constraint", Rule::AtMost(1e-10), || {
        (ar.constraint_defect().norm(), Some(ar.eps_plus))
    });
    let mut ar_scalars = Vec::new();
    for (s, &(l1, l2)) in pairs.iter().enumerate() {
        for (name, gauge, k) in &families {
            let g = gauge.short();
            out.run(format!("reflection.re.{name}.{g}.s{s}"), Rule::AtMost(tol), || {
                (reflection_residual(p, *gauge, k.as_ref(), l1, l2), None)
            });
            out.run(format!("reflection.re_rcheck.{name}.{g}.s{s}"), Rule::AtMost(tol), || {
                (reflection_residual_rcheck(p, *gauge, k.as_ref(), l1, l2), None)
            });
            out.run(format!("reflection.unitarity.{name}.{g}.s{s}"), Rule::AtMost(tol), || {
                let x = &k(l1) * &k(-l1);
                let f = prop_check(&x, &Operator::identity(&[n]), tol).expect("identity is nonzero");
                (f.residual, Some(f.scalar))
            });
        }
        out.run(format!("reflection.ansatz_vs_explicit.s{s}"), Rule::AtMost(1e-11), || {
            (rel_diff(&build_k_ansatz(p, l1), &build_k_explicit(p, l1, Gauge::Homogeneous)), None)
        });
        out.run(format!("reflection.gauge_covariance.s{s}"), Rule::AtMost(tol), || {
            let v = build_gauge_v(p, l1);
            let kp = &(&v * &build_k_explicit(p, l1, Gauge::Homogeneous)) * &v;
            (rel_diff(&kp, &build_k_explicit(p, l1, Gauge::Principal)), None)
        });
        let kar = build_k_trig(p, &ar, l1);
        let kp = build_k_explicit(p, l1, Gauge::Principal).scale(I);
        let f = prop_check(&kar, &kp, 1e-9).expect("principal K is nonzero");
        ar_scalars.push(f.scalar);
        out.run(format!("reflection.trig_k.proportional.s{s}"), Rule::AtMost(1e-9), || {
            (f.residual, Some(f.scalar))
        });
    }
    let s0 = ar_scalars[0];
    let drift = ar_scalars.iter().map(|z| (z - s0).norm()).fold(0.0, f64::max) / s0.norm();
    out.run("reflection.trig_k.scalar_drift", Rule::AtMost(1e-9), || (drift, Some(s0)));
    Ok(out.into_report("reflection", ParamsSnapshot::from_params(p, samples, seed, tol)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_core::c;

    fn params(n: usize) -> ModelParams {
        ModelParams::new(n, c(0.37, 0.05), c(0.8, 0.2), c(0.6, 0.1), 2).unwrap()
    }

    #[test]
    fn k_at_zero_is_scalar() {
        for n in 2..=4 {
            let p = params(n);
            let want = Operator::identity(&[n]).scale(p.x0());
            for g in Gauge::ALL {
                assert!(rel_diff(&build_k_explicit(&p, ZERO, g), &want) < 1e-14);
            }
            assert!(rel_diff(&build_k_ansatz(&p, ZERO), &want) < 1e-14);
        }
    }

    #[test]
    fn ansatz_equals_explicit() {
        for n in 2..=4 {
            let p = params(n);
            for l in [c(0.3, 0.1), c(-0.9, 0.4), c(1.2, -0.3)] {
                assert!(rel_diff(&build_k_ansatz(&p, l), &build_k_explicit(&p, l, Gauge::Homogeneous)) < 1e-11);
            }
        }
    }

    #[test]
    fn k_unitarity() {
        let p = params(3);
        let l = c(0.4, 0.2);
        let x = &build_k_ansatz(&p, l) * &build_k_ansatz(&p, -l);
        assert!(prop_check(&x, &Operator::identity(&[3]), 1e-12).unwrap().pass);
    }

    #[test]
    fn principal_rank_two_reflection() {
        let p = params(2);
        let k = |l| build_k_explicit(&p, l, Gauge::Principal);
        assert!(reflection_residual(&p, Gauge::Principal, &k, c(0.3, 0.2), c(-0.4, 0.1)) < 1e-10);
    }

    #[test]
    fn diagonal_family() {
        let p = params(3);
        let xi = c(0.7, 0.1);
        let k0 = build_k_diagonal(&p, ZERO, 1, xi).unwrap();
        assert!(rel_diff(&k0, &Operator::identity(&[3]).scale((I * p.mu * xi).sinh())) < 1e-15);
        let k = |l| build_k_diagonal(&p, l, 1, xi).unwrap();
        assert!(reflection_residual(&p, Gauge::Homogeneous, &k, c(0.3, 0.2), c(-0.4, 0.1)) < 1e-10);
        assert!(build_k_diagonal(&p, ZERO, 3, xi).is_err());
        assert!(build_k_diagonal(&p, ZERO, 0, xi).is_err());
        let l = c(0.3, 0.5);
        let (a, b) = (build_k_diagonal(&p, l, 1, xi).unwrap(), build_k_diagonal(&p, -l, 1, xi).unwrap());
        assert!((a.get(0, 0) * b.get(0, 0) - a.get(2, 2) * b.get(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn large_zeta_gives_minus_identity() {
        let mut p = params(3);
        p.zeta = c(0.0, 40.0);
        let k = build_k_explicit(&p, c(0.3, 0.1), Gauge::Homogeneous).scale(p.cosh_2imuzeta().inv());
        assert!(rel_diff(&k, &Operator::identity(&[3]).scale(-ONE)) < 1e-9);
    }

    #[test]
    fn left_boundaries() {
        let p = params(3);
        let l = c(0.2, 0.0);
        assert_eq!(build_k_left(&p, l, LeftBoundaryKind::Identity, None).unwrap(), Operator::identity(&[3]));
        let a = build_k_left(&p, l, LeftBoundaryKind::AffineLimit, None).unwrap();
        let e = (-(l * 2.0) - I * p.mu * 3.0).exp();
        assert!((a.get(0, 0) - e).norm() < 1e-14 && (a.get(1, 1) - e).norm() < 1e-14);
        assert!((a.get(2, 2) - e.inv()).norm() < 1e-14);
        assert!(build_k_left(&p, l, LeftBoundaryKind::TransposeShift, None).is_err());
        // the affine limit is the transpose-shifted K at large imaginary iμm
        let mut big = p;
        big.m = c(0.0, -40.0) / p.mu;
        let src = |x: C64| build_k_explicit(&big, x, Gauge::Homogeneous);
        let ts = build_k_left(&p, l, LeftBoundaryKind::TransposeShift, Some(&src)).unwrap();
        assert!(prop_check(&ts, &a, 1e-9).unwrap().pass);
    }

    #[test]
    fn trig_k_identifications() {
        for n in [2, 3] {
            let p = params(n);
            let ar = map_trig_k(&p).unwrap();
            assert!(ar.constraint_defect().norm() < 1e-10);
            let r1 = (-ar.eps_plus).exp() * ar.rho_a / ar.rho_c;
            assert!((r1 - (-I * p.cosh_imum() * 2.0)).norm() < 1e-12);
            let r2 = ar.eps_plus.exp() * ar.rho_a / ar.rho_c;
            assert!((r2 - (-I * p.cosh_2imuzeta() * 2.0)).norm() < 1e-12);
            let mut first = None;
            for l in [c(0.3, 0.1), c(-0.5, 0.2), c(0.9, 0.0)] {
                let f = prop_check(
                    &build_k_trig(&p, &ar, l),
                    &build_k_explicit(&p, l, Gauge::Principal).scale(I),
                    1e-9,
                )
                .unwrap();
                assert!(f.pass);
                let s = *first.get_or_insert(f.scalar);
                assert!((f.scalar - s).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn trig_k_at_m_equal_zeta() {
        let mut p = params(3);
        p.zeta = p.m;
        let ar = map_trig_k(&p).unwrap();
        let lhs = (ar.eps_plus * 2.0).exp();
        assert!((lhs - p.cosh_2imuzeta() / p.cosh_imum()).norm() < 1e-12);
    }

    #[test]
    fn suite_passes() {
        for n in 2..=4 {
            let r = verify_reflection_suite(&params(n), 3, 5, 1e-9, 1, c(0.3, 0.0)).unwrap();
            assert!(r.pass, "{}", r.to_text());
        }
    }
}
