//! Evaluation representations of U_q(ĝl_n), L-fold coproducts, the recursive elements
//! E_ij and the t-families, Lax operators and block forms of Δ′ on π_λ ⊗ π₀^{⊗N}.

use crate::boundary_charges::{build_affine_charge, build_boundary_charges};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::report::{CheckList, ParamsSnapshot, Rule, VerificationReport};
use crate::sampler::Sampler;
use crate::tensor_core::{
    comm_residual, embed_at, kron, kron_all, permutation_swap, prop_check, rel_diff, Operator, C64, I, ONE,
};
use crate::yang_baxter::{build_gauge_v, build_r, build_rcheck, Gauge};
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeneratorKind {
    /// e_i, i = n is affine
    E,
    /// f_i, i = n is affine
    F,
    /// q^{ε_i/2}
    KCartan,
    /// q^{h_i/2}, h_n = ε_n − ε_1
    HCartan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorLabel {
    pub kind: GeneratorKind,
    pub index: usize,
    pub inverse: bool,
}

impl GeneratorLabel {
    pub fn e(i: usize) -> Self {
        GeneratorLabel { kind: GeneratorKind::E, index: i, inverse: false }
    }
    pub fn f(i: usize) -> Self {
        GeneratorLabel { kind: GeneratorKind::F, index: i, inverse: false }
    }
    pub fn k(i: usize) -> Self {
        GeneratorLabel { kind: GeneratorKind::KCartan, index: i, inverse: false }
    }
    pub fn h(i: usize) -> Self {
        GeneratorLabel { kind: GeneratorKind::HCartan, index: i, inverse: false }
    }
    pub fn inv(self) -> Self {
        GeneratorLabel { inverse: !self.inverse, ..self }
    }

    fn is_cartan(&self) -> bool {
        matches!(self.kind, GeneratorKind::KCartan | GeneratorKind::HCartan)
    }

    pub fn tag(&self) -> String {
        let k = match self.kind {
            GeneratorKind::E => "e",
            GeneratorKind::F => "f",
            GeneratorKind::KCartan => "keps",
            GeneratorKind::HCartan => "kh",
        };
        format!("{k}{}{}", self.index, if self.inverse { "inv" } else { "" })
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.index < 1 || self.index > n {
            return Err(Error::InvalidLabel(format!("generator index {} outside 1..={n}", self.index)));
        }
        if self.inverse && !self.is_cartan() {
            return Err(Error::InvalidLabel("only Cartan generators have inverses".into()));
        }
        Ok(())
    }
}

/// Every Chevalley generator e_i, f_i, q^{±h_i/2}, q^{±ε_i/2}, including the affine ones.
pub fn all_generators(n: usize) -> Vec<GeneratorLabel> {
    let mut v = Vec::new();
    for i in 1..=n {
        v.push(GeneratorLabel::e(i));
        v.push(GeneratorLabel::f(i));
        v.push(GeneratorLabel::h(i));
        v.push(GeneratorLabel::h(i).inv());
        v.push(GeneratorLabel::k(i));
        v.push(GeneratorLabel::k(i).inv());
    }
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TFamily {
    T,
    TMinus,
    THat,
    THatMinus,
    T0N1,
    T0Hat1N,
    T0Minus1N,
    T0HatMinusN1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TElementLabel {
    pub family: TFamily,
    pub i: usize,
    pub j: usize,
}

impl TElementLabel {
    pub fn new(family: TFamily, i: usize, j: usize) -> Self {
        TElementLabel { family, i, j }
    }
    pub fn t(i: usize, j: usize) -> Self {
        Self::new(TFamily::T, i, j)
    }
    pub fn t_hat(i: usize, j: usize) -> Self {
        Self::new(TFamily::THat, i, j)
    }
    pub fn t_minus(i: usize, j: usize) -> Self {
        Self::new(TFamily::TMinus, i, j)
    }
    /// Affine elements carry no indices of their own.
    pub fn affine(family: TFamily) -> Self {
        Self::new(family, 0, 0)
    }

    fn validate(&self, n: usize) -> Result<()> {
        let in_range = |k: usize| k >= 1 && k <= n;
        let ok = match self.family {
            TFamily::T | TFamily::THatMinus => in_range(self.i) && in_range(self.j) && self.i <= self.j,
            TFamily::TMinus | TFamily::THat => in_range(self.i) && in_range(self.j) && self.i >= self.j,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidLabel(format!("{:?} with indices ({}, {})", self.family, self.i, self.j)))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoproductVariant {
    Delta,
    DeltaPrime,
}

/// Single-site evaluation representation π_λ (homogeneous) or π̃_λ (principal).
pub fn eval_generator(p: &ModelParams, label: GeneratorLabel, lambda: C64, gauge: Gauge) -> Result<Operator> {
    label.validate(p.n)?;
    let n = p.n;
    let i = label.index;
    let ip = i % n + 1;
    let sign = if label.inverse { -1.0 } else { 1.0 };
    let m = match label.kind {
        GeneratorKind::E => {
            if i < n {
                Operator::unit(n, i, ip)
            } else {
                Operator::unit(n, n, 1).scale((-lambda * 2.0).exp())
            }
        }
        GeneratorKind::F => {
            if i < n {
                Operator::unit(n, ip, i)
            } else {
                Operator::unit(n, 1, n).scale((lambda * 2.0).exp())
            }
        }
        GeneratorKind::HCartan => {
            let d: Vec<C64> = (1..=n)
                .map(|k| {
                    let w = (k == i) as i32 as f64 - (k == ip) as i32 as f64;
                    p.q_pow(0.5 * sign * w)
                })
                .collect();
            Operator::from_diag(&d)
        }
        GeneratorKind::KCartan => {
            let d: Vec<C64> = (1..=n).map(|k| p.q_pow(0.5 * sign * ((k == i) as i32 as f64))).collect();
            Operator::from_diag(&d)
        }
    };
    Ok(match gauge {
        Gauge::Homogeneous => m,
        Gauge::Principal => &(&build_gauge_v(p, lambda) * &m) * &build_gauge_v(p, -lambda),
    })
}

/// Images of algebra elements under (π_{λ₁} ⊗ … ⊗ π_{λ_L}) ∘ Δ^{(L)} or Δ′^{(L)}.
///
/// Recursive elements are memoised per instance.
pub struct CoproductRep {
    p: ModelParams,
    lambdas: Vec<C64>,
    variant: CoproductVariant,
    gauge: Gauge,
    e_cache: RefCell<HashMap<(usize, usize, bool), Operator>>,
}

impl CoproductRep {
    pub fn new(p: &ModelParams, lambdas: &[C64], variant: CoproductVariant, gauge: Gauge) -> Self {
        assert!(!lambdas.is_empty(), "need at least one site");
        CoproductRep {
            p: *p,
            lambdas: lambdas.to_vec(),
            variant,
            gauge,
            e_cache: RefCell::new(HashMap::new()),
        }
    }

    /// π₀^{⊗L} ∘ Δ^{(L)}, homogeneous.
    pub fn fundamental(p: &ModelParams, sites: usize) -> Self {
        Self::new(p, &vec![C64::new(0.0, 0.0); sites], CoproductVariant::Delta, Gauge::Homogeneous)
    }

    pub fn params(&self) -> &ModelParams {
        &self.p
    }

    pub fn sites(&self) -> usize {
        self.lambdas.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.p.n; self.lambdas.len()]
    }

    fn ev(&self, label: GeneratorLabel, site: usize) -> Operator {
        eval_generator(&self.p, label, self.lambdas[site], self.gauge).expect("validated label")
    }

    /// Explicit sum Σ_l q^{−h/2} ⊗ … ⊗ y_(l) ⊗ q^{h/2} ⊗ … over sites `from..`.
    fn delta_sum(&self, label: GeneratorLabel, from: usize) -> Operator {
        let l = self.lambdas.len();
        let h = GeneratorLabel::h(label.index);
        let mut acc: Option<Operator> = None;
        for pos in from..l {
            let factors: Vec<Operator> = (from..l)
                .map(|s| match s.cmp(&pos) {
                    std::cmp::Ordering::Less => self.ev(h.inv(), s),
                    std::cmp::Ordering::Equal => self.ev(label, s),
                    std::cmp::Ordering::Greater => self.ev(h, s),
                })
                .collect();
            let term = kron_all(&factors);
            acc = Some(match acc {
                None => term,
                Some(a) => &a + &term,
            });
        }
        acc.expect("at least one site")
    }

    fn group_like(&self, label: GeneratorLabel, from: usize) -> Operator {
        let factors: Vec<Operator> = (from..self.lambdas.len()).map(|s| self.ev(label, s)).collect();
        kron_all(&factors)
    }

    /// Image of a Chevalley generator.
    pub fn gen(&self, label: GeneratorLabel) -> Result<Operator> {
        label.validate(self.p.n)?;
        if label.is_cartan() {
            return Ok(self.group_like(label, 0));
        }
        Ok(match self.variant {
            CoproductVariant::Delta => self.delta_sum(label, 0),
            CoproductVariant::DeltaPrime => {
                if self.lambdas.len() == 1 {
                    self.ev(label, 0)
                } else {
                    // Δ′(y) = y ⊗ q^{−h/2} + q^{h/2} ⊗ y, then Δ^{(L−1)} on the tail
                    let h = GeneratorLabel::h(label.index);
                    let a = kron(&self.ev(label, 0), &self.group_like(h.inv(), 1));
                    let b = kron(&self.ev(h, 0), &self.delta_sum(label, 1));
                    &a + &b
                }
            }
        })
    }

    /// q^{k ε_i / 2} for integer k.
    pub fn eps_power(&self, i: usize, half_steps: i32) -> Operator {
        let g = if half_steps >= 0 { GeneratorLabel::k(i) } else { GeneratorLabel::k(i).inv() };
        self.gen(g).expect("valid index").powi(half_steps.unsigned_abs())
    }

    /// E_ij (or Ê_ij) by the averaged recursion; E_{i,i+1} = e_i, E_{i+1,i} = f_i.
    pub fn e_cal(&self, i: usize, j: usize, hat: bool) -> Result<Operator> {
        let n = self.p.n;
        if i == j || i < 1 || j < 1 || i > n || j > n {
            return Err(Error::InvalidLabel(format!("E_{{{i}{j}}}")));
        }
        if let Some(op) = self.e_cache.borrow().get(&(i, j, hat)) {
            return Ok(op.clone());
        }
        let r = if j == i + 1 {
            self.gen(GeneratorLabel::e(i))?
        } else if i == j + 1 {
            self.gen(GeneratorLabel::f(j))?
        } else {
            let (lo, hi) = (i.min(j), i.max(j));
            // q^{∓1} for j<k<i versus j>k>i; flipped for the hatted elements
            let mut s = if i > j { -1.0 } else { 1.0 };
            if hat {
                s = -s;
            }
            let qs = self.p.q_pow(s);
            let mut acc = Operator::zeros(&self.dims());
            for k in lo + 1..hi {
                let a = self.e_cal(i, k, hat)?;
                let b = self.e_cal(k, j, hat)?;
                acc = &acc + &(&(&a * &b) - &(&b * &a).scale(qs));
            }
            acc.scale(C64::new(1.0 / (hi - lo - 1) as f64, 0.0))
        };
        self.e_cache.borrow_mut().insert((i, j, hat), r.clone());
        Ok(r)
    }

    /// Single-k form E_ik E_kj − q^{∓1} E_kj E_ik for one intermediate k.
    pub fn e_cal_single(&self, i: usize, j: usize, k: usize, hat: bool) -> Result<Operator> {
        let mut s = if i > j { -1.0 } else { 1.0 };
        if hat {
            s = -s;
        }
        let a = self.e_cal(i, k, hat)?;
        let b = self.e_cal(k, j, hat)?;
        Ok(&(&a * &b) - &(&b * &a).scale(self.p.q_pow(s)))
    }

    /// The t-family elements.
    pub fn t(&self, label: TElementLabel) -> Result<Operator> {
        label.validate(self.p.n)?;
        let p = &self.p;
        let n = p.n;
        let w = p.w();
        let (i, j) = (label.i, label.j);
        let plus = |a: usize, b: usize| &self.eps_power(a, 1) * &self.eps_power(b, 1);
        let minus = |a: usize, b: usize| &self.eps_power(a, -1) * &self.eps_power(b, -1);
        let cp = w * p.q_pow(-0.5);
        let cm = -w * p.q_pow(0.5);
        Ok(match label.family {
            TFamily::T | TFamily::THat if i == j => self.eps_power(i, 2),
            TFamily::TMinus | TFamily::THatMinus if i == j => self.eps_power(i, -2),
            TFamily::T => (&plus(i, j) * &self.e_cal(j, i, false)?).scale(cp),
            TFamily::THat => (&plus(i, j) * &self.e_cal(j, i, true)?).scale(cp),
            TFamily::TMinus => (&minus(i, j) * &self.e_cal(j, i, false)?).scale(cm),
            TFamily::THatMinus => (&minus(i, j) * &self.e_cal(j, i, true)?).scale(cm),
            TFamily::T0N1 => (&plus(1, n) * &self.gen(GeneratorLabel::f(n))?).scale(cp),
            TFamily::T0Hat1N => (&plus(1, n) * &self.gen(GeneratorLabel::e(n))?).scale(cp),
            TFamily::T0Minus1N => (&minus(1, n) * &self.gen(GeneratorLabel::e(n))?).scale(cm),
            TFamily::T0HatMinusN1 => (&minus(1, n) * &self.gen(GeneratorLabel::f(n))?).scale(cm),
        })
    }
}

/// π-image of a generator under Δ^{(L)} or Δ′^{(L)}; `first_site_lambda` sets π_λ on site 1.
pub fn coproduct_rep(
    p: &ModelParams,
    label: GeneratorLabel,
    fold: usize,
    variant: CoproductVariant,
    first_site_lambda: Option<C64>,
    gauge: Gauge,
) -> Result<Operator> {
    if fold < 1 {
        return Err(Error::InvalidParams("coproduct fold L must be at least 1".into()));
    }
    let mut lams = vec![C64::new(0.0, 0.0); fold];
    if let Some(l) = first_site_lambda {
        lams[0] = l;
    }
    CoproductRep::new(p, &lams, variant, gauge).gen(label)
}

/// t-element pushed through Δ^{(L)}, optionally with π_λ on the first site.
pub fn t_element_rep(p: &ModelParams, label: TElementLabel, fold: usize, lambda_first: Option<C64>) -> Result<Operator> {
    if fold < 1 {
        return Err(Error::InvalidParams("coproduct fold L must be at least 1".into()));
    }
    let mut lams = vec![C64::new(0.0, 0.0); fold];
    if let Some(l) = lambda_first {
        lams[0] = l;
    }
    CoproductRep::new(p, &lams, CoproductVariant::Delta, Gauge::Homogeneous).t(label)
}

/// L⁺ = Σ_{i≤j} ê_ij ⊗ t_ij with the second factor in `rep`.
pub fn lax_plus(rep: &CoproductRep) -> Operator {
    let n = rep.params().n;
    let mut terms = Vec::new();
    for i in 1..=n {
        for j in i..=n {
            terms.push(kron(&Operator::unit(n, i, j), &rep.t(TElementLabel::t(i, j)).expect("valid")));
        }
    }
    sum_ops(&terms)
}

/// L⁻ = Σ_{i≥j} ê_ij ⊗ t⁻_ij.
pub fn lax_minus(rep: &CoproductRep) -> Operator {
    let n = rep.params().n;
    let mut terms = Vec::new();
    for i in 1..=n {
        for j in 1..=i {
            terms.push(kron(&Operator::unit(n, i, j), &rep.t(TElementLabel::t_minus(i, j)).expect("valid")));
        }
    }
    sum_ops(&terms)
}

fn sum_ops(ops: &[Operator]) -> Operator {
    let mut it = ops.iter();
    let first = it.next().expect("non-empty sum").clone();
    it.fold(first, |a, b| &a + b)
}

/// Lax operator with the algebra factor realised in `rep`.
pub fn build_lax_in(rep: &CoproductRep, lambda: C64, gauge: Gauge) -> Operator {
    let p = rep.params();
    let n = p.n;
    match gauge {
        Gauge::Homogeneous => &lax_plus(rep).scale(lambda.exp()) - &lax_minus(rep).scale((-lambda).exp()),
        Gauge::Principal => {
            let nf = n as f64;
            let mut terms = Vec::new();
            for i in 1..=n {
                let d = &rep.t(TElementLabel::t(i, i)).expect("valid").scale(lambda.exp())
                    - &rep.t(TElementLabel::t_minus(i, i)).expect("valid").scale((-lambda).exp());
                terms.push(kron(&Operator::unit(n, i, i), &d));
                for j in 1..=n {
                    let e = (i as f64 - j as f64) * 2.0 / nf;
                    if i < j && !(i == 1 && j == n) {
                        let t = rep.t(TElementLabel::t(i, j)).expect("valid");
                        terms.push(kron(&Operator::unit(n, i, j), &t).scale((lambda * (e + 1.0)).exp()));
                    }
                    if i > j && !(i == n && j == 1) {
                        let t = rep.t(TElementLabel::t_minus(i, j)).expect("valid");
                        terms.push(kron(&Operator::unit(n, i, j), &t).scale(-(lambda * (e - 1.0)).exp()));
                    }
                }
            }
            let t0 = rep.t(TElementLabel::affine(TFamily::T0N1)).expect("valid");
            terms.push(kron(&Operator::unit(n, n, 1), &t0).scale((lambda * (1.0 - 2.0 / nf)).exp()));
            let t0m = rep.t(TElementLabel::affine(TFamily::T0Minus1N)).expect("valid");
            terms.push(kron(&Operator::unit(n, 1, n), &t0m).scale(-(lambda * (2.0 / nf - 1.0)).exp()));
            sum_ops(&terms)
        }
    }
}

/// L(λ) on C^n ⊗ C^n with the quantum factor in π₀.
pub fn build_lax(p: &ModelParams, lambda: C64, gauge: Gauge) -> Operator {
    build_lax_in(&CoproductRep::fundamental(p, 1), lambda, gauge)
}

/// L̂(λ) = L(−λ)⁻¹, refusing ill-conditioned points.
pub fn build_lax_hat(p: &ModelParams, lambda: C64, gauge: Gauge) -> Result<Operator> {
    let l = build_lax(p, -lambda, gauge);
    let inv = l.inverse()?;
    let cond = l.norm() * inv.norm();
    if cond.is_nan() || cond >= 1e12 {
        return Err(Error::Singular(format!("L(-lambda) condition number {cond:.3e}")));
    }
    Ok(inv)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockForm {
    ChevalleyE(usize),
    ChevalleyF(usize),
    CartanEps(usize),
    Q11,
    Q12,
    Q21,
    Qnn,
}

/// Closed-form block matrices of (π_λ ⊗ π₀^{⊗N}) Δ′^{(N+1)}(·), first factor outermost.
pub fn block_form_rep(p: &ModelParams, which: BlockForm, sites: usize, lambda: C64) -> Result<Operator> {
    let n = p.n;
    let pn = p.with_sites(sites);
    let bulk = CoproductRep::fundamental(&pn, sites);
    let inner = pn.quantum_dims();
    let q = p.q();
    let w = p.w();
    let qh = p.q_pow(0.5);
    let e = |i: usize| bulk.t(TElementLabel::t(i, i)).expect("valid");
    let diag_pattern = |x: &Operator, first: usize, second: usize, a: C64, b: C64| -> Vec<((usize, usize), Operator)> {
        (1..=n)
            .map(|k| {
                let s = if k == first {
                    a
                } else if k == second {
                    b
                } else {
                    ONE
                };
                ((k, k), x.scale(s))
            })
            .collect()
    };
    let blocks = match which {
        BlockForm::ChevalleyE(i) | BlockForm::ChevalleyF(i) => {
            if i < 1 || i > n {
                return Err(Error::InvalidLabel(format!("Chevalley index {i}")));
            }
            let is_e = matches!(which, BlockForm::ChevalleyE(_));
            let y = bulk.gen(if is_e { GeneratorLabel::e(i) } else { GeneratorLabel::f(i) })?;
            let hinv = bulk.gen(GeneratorLabel::h(i).inv())?;
            if i < n {
                let mut b = diag_pattern(&y, i, i + 1, qh, qh.inv());
                let pos = if is_e { (i, i + 1) } else { (i + 1, i) };
                b.push((pos, hinv));
                b
            } else {
                // affine: q^{h_n/2} weighs the first diagonal slot by q^{-1/2} and the last by q^{1/2}
                let mut b = diag_pattern(&y, 1, n, qh.inv(), qh);
                let (pos, ph) = if is_e { ((n, 1), (-lambda * 2.0).exp()) } else { ((1, n), (lambda * 2.0).exp()) };
                b.push((pos, hinv.scale(ph)));
                b
            }
        }
        BlockForm::CartanEps(i) => {
            if i < 1 || i > n {
                return Err(Error::InvalidLabel(format!("Cartan index {i}")));
            }
            diag_pattern(&e(i), i, 0, q, ONE)
        }
        BlockForm::Qnn => {
            let aff = build_affine_charge(&pn, sites);
            let corner = &e(1) * &e(n);
            let mut b = diag_pattern(&aff, n, 0, q * q, ONE);
            let c1 = -I * (lambda * 2.0).exp() * q * w;
            let c2 = -I * (-lambda * 2.0).exp() * q * w;
            if n == 1 {
                unreachable!("rank at least two");
            }
            b.push(((1, n), corner.scale(c1)));
            b.push(((n, 1), corner.scale(c2)));
            b
        }
        BlockForm::Q11 | BlockForm::Q12 | BlockForm::Q21 => {
            if n != 3 {
                return Err(Error::InvalidLabel(format!("{which:?} closed form needs n = 3, got n = {n}")));
            }
            let ch = build_boundary_charges(&pn, sites);
            let em = p.exp_imum();
            let e13 = &e(1) * &e(3);
            let e22sq = &e(2) * &e(2);
            let t = |a: usize, b: usize| ch.entries[&(a, b)].clone();
            match which {
                BlockForm::Q11 => vec![
                    ((1, 1), t(1, 1).scale(q * q)),
                    ((1, 2), t(1, 2).scale(w * q)),
                    ((1, 3), e13.scale(-I * w * q)),
                    ((2, 1), t(2, 1).scale(w * q)),
                    ((2, 2), &t(1, 1) + &e22sq.scale(em * w * w)),
                    ((3, 1), e13.scale(-I * w * q)),
                    ((3, 3), t(1, 1)),
                ],
                BlockForm::Q12 => vec![
                    ((1, 1), t(1, 2).scale(q)),
                    ((2, 1), e22sq.scale(em * w)),
                    ((2, 2), t(1, 2).scale(q)),
                    ((2, 3), e13.scale(-I * w)),
                    ((3, 3), t(1, 2)),
                ],
                _ => vec![
                    ((1, 1), t(2, 1).scale(q)),
                    ((1, 2), e22sq.scale(em * w)),
                    ((2, 2), t(2, 1).scale(q)),
                    ((3, 2), e13.scale(-I * w)),
                    ((3, 3), t(2, 1)),
                ],
            }
        }
    };
    Ok(Operator::from_blocks(n, &inner, &blocks))
}

/// The same objects built generically from the Δ′ homomorphism on π_λ ⊗ π₀^{⊗N}.
pub fn block_form_construction(p: &ModelParams, which: BlockForm, sites: usize, lambda: C64) -> Result<Operator> {
    let mut lams = vec![C64::new(0.0, 0.0); sites + 1];
    lams[0] = lambda;
    let rep = CoproductRep::new(p, &lams, CoproductVariant::DeltaPrime, Gauge::Homogeneous);
    match which {
        BlockForm::ChevalleyE(i) => rep.gen(GeneratorLabel::e(i)),
        BlockForm::ChevalleyF(i) => rep.gen(GeneratorLabel::f(i)),
        BlockForm::CartanEps(i) => rep.t(TElementLabel::t(i, i)),
        BlockForm::Qnn => Ok(crate::boundary_charges::charges_in(&rep).affine),
        BlockForm::Q11 => Ok(crate::boundary_charges::charges_in(&rep).entries[&(1, 1)].clone()),
        BlockForm::Q12 => Ok(crate::boundary_charges::charges_in(&rep).entries[&(1, 2)].clone()),
        BlockForm::Q21 => Ok(crate::boundary_charges::charges_in(&rep).entries[&(2, 1)].clone()),
    }
}

/// Quantum binomial [m choose k] with [x] = (q^x − q^{−x})/(q − q⁻¹).
fn q_binomial(p: &ModelParams, m: usize, k: usize) -> C64 {
    let qn = |x: usize| (p.q_pow(x as f64) - p.q_pow(-(x as f64))) / (p.q() - p.q().inv());
    let fact = |x: usize| (1..=x).fold(ONE, |a, y| a * qn(y));
    fact(m) / (fact(k) * fact(m - k))
}

/// Cartan matrix entry of the affine algebra with n nodes.
fn cartan_entry(n: usize, i: usize, j: usize) -> i32 {
    if i == j {
        2
    } else if n == 2 {
        -2
    } else if (i % n) + 1 == j || (j % n) + 1 == i {
        -1
    } else {
        0
    }
}

/// Σ_k (−1)^k [1−a choose k] χ_i^{1−a−k} χ_j χ_i^k.
pub fn serre_residual(p: &ModelParams, xi: &Operator, xj: &Operator, a: i32) -> f64 {
    let m = (1 - a) as usize;
    let mut acc = Operator::zeros(xi.dims());
    let mut scale = 0.0f64;
    for k in 0..=m {
        let term = &(&xi.powi((m - k) as u32) * xj) * &xi.powi(k as u32);
        scale = scale.max(term.norm());
        let s = q_binomial(p, m, k) * if k % 2 == 0 { 1.0 } else { -1.0 };
        acc = &acc + &term.scale(s);
    }
    acc.norm() / scale.max(crate::tensor_core::NORM_FLOOR)
}

/// Right-hand side of the closed coproduct of E_ij, i − j > 1, on two sites.
pub fn coproduct_closed_form(p: &ModelParams, i: usize, j: usize) -> Result<Operator> {
    if i < j + 2 || i > p.n {
        return Err(Error::InvalidLabel(format!("closed coproduct needs i - j > 1, got ({i}, {j})")));
    }
    let one = CoproductRep::fundamental(p, 1);
    // q^{(ε_a − ε_b)/2} on one site
    let half = |a: usize, b: usize| &one.eps_power(a, 1) * &one.eps_power(b, -1);
    let e_ij = one.e_cal(i, j, false)?;
    let mut acc = &kron(&half(i, j), &e_ij) + &kron(&e_ij, &half(j, i));
    let c = p.q_pow(-0.5) * p.w();
    for k in j + 1..i {
        let left = &half(k, j) * &one.e_cal(i, k, false)?;
        let right = &half(k, i) * &one.e_cal(k, j, false)?;
        acc = &acc + &kron(&left, &right).scale(c);
    }
    Ok(acc)
}

/// Intertwining, bulk commutation, coproduct identities, Serre relations and Lax checks.
pub fn verify_algebra_suite(p: &ModelParams, samples: usize, seed: u64, tol: f64) -> Result<VerificationReport> {
    p.validate()?;
    let n = p.n;
    let mut out = CheckList::new();
    let mut sampler = Sampler::new(seed);
    let lams: Vec<C64> = (0..samples.max(1)).map(|_| sampler.lambda_small(p)).collect();
    let zero = C64::new(0.0, 0.0);

    // (π_λ ⊗ π₀) Δ′(x) R(λ) = R(λ) (π_λ ⊗ π₀) Δ(x)
    for (s, &l) in lams.iter().enumerate() {
        for gauge in Gauge::ALL {
            let r = build_r(p, l, gauge);
            let dp = CoproductRep::new(p, &[l, zero], CoproductVariant::DeltaPrime, gauge);
            let d = CoproductRep::new(p, &[l, zero], CoproductVariant::Delta, gauge);
            for g in all_generators(n) {
                out.run(format!("algebra.intertwine.{}.{}.s{s}", gauge.short(), g.tag()), Rule::AtMost(tol), || {
                    let a = dp.gen(g).expect("valid");
                    let b = d.gen(g).expect("valid");
                    (rel_diff(&(&a * &r), &(&r * &b)), None)
                });
            }
        }
        // mismatched pairing: homogeneous R with principal representations must fail for e_n
        out.run(format!("algebra.intertwine_cross_gauge.e{n}.s{s}"), Rule::Exceeds(1e-3), || {
            let r = build_r(p, l, Gauge::Homogeneous);
            let dp = CoproductRep::new(p, &[l, zero], CoproductVariant::DeltaPrime, Gauge::Principal);
            let d = CoproductRep::new(p, &[l, zero], CoproductVariant::Delta, Gauge::Principal);
            let g = GeneratorLabel::e(n);
            let a = dp.gen(g).expect("valid");
            let b = d.gen(g).expect("valid");
            (rel_diff(&(&a * &r), &(&r * &b)), None)
        });
    }

    // [Ř_{l,l+1}(λ), π₀^{⊗N} Δ^{(N)}(x)] = 0 for non-affine x
    let nsites = p.sites.max(2);
    let bulk = CoproductRep::fundamental(&p.with_sites(nsites), nsites);
    let qdims = vec![n; nsites];
    for (s, &l) in lams.iter().enumerate().take(2) {
        let rc = build_rcheck(p, l);
        for site in 0..nsites - 1 {
            let emb = embed_at(&rc, &[site, site + 1], &qdims)?;
            for g in all_generators(n).into_iter().filter(|g| g.index < n || g.kind == GeneratorKind::KCartan) {
                out.run(format!("algebra.coproduct_commutes.l{}.{}.s{s}", site + 1, g.tag()), Rule::AtMost(tol), || {
                    (comm_residual(&emb, &bulk.gen(g).expect("valid")), None)
                });
            }
        }
    }

    // closed coproduct of E_ij against the homomorphism construction
    let two = CoproductRep::fundamental(p, 2);
    for i in 1..=n {
        for j in 1..i.saturating_sub(1) {
            out.run(format!("algebra.coproduct_closed.E{i}{j}"), Rule::AtMost(tol), || {
                let lhs = two.e_cal(i, j, false).expect("valid");
                (rel_diff(&lhs, &coproduct_closed_form(p, i, j).expect("valid")), None)
            });
        }
    }

    // Serre relations in the two-site representation with an evaluation parameter on site 1
    let l0 = lams[0];
    let ev2 = CoproductRep::new(p, &[l0, zero], CoproductVariant::Delta, Gauge::Homogeneous);
    for i in 1..=n {
        for j in 1..=n {
            if i == j {
                continue;
            }
            let a = cartan_entry(n, i, j);
            for (nm, gi, gj) in [
                ("e", GeneratorLabel::e(i), GeneratorLabel::e(j)),
                ("f", GeneratorLabel::f(i), GeneratorLabel::f(j)),
            ] {
                out.run(format!("algebra.serre.{nm}{i}{j}"), Rule::AtMost(tol), || {
                    let xi = ev2.gen(gi).expect("valid");
                    let xj = ev2.gen(gj).expect("valid");
                    (serre_residual(p, &xi, &xj, a), None)
                });
            }
        }
    }

    // algebra relations in the coproduct representation
    let qq = p.q() - p.q().inv();
    for i in 1..=n {
        for j in 1..=n {
            out.run(format!("algebra.ef_relation.{i}{j}"), Rule::AtMost(tol), || {
                let e = ev2.gen(GeneratorLabel::e(i)).expect("valid");
                let f = ev2.gen(GeneratorLabel::f(j)).expect("valid");
                let c = &(&e * &f) - &(&f * &e);
                let want = if i == j {
                    let k = ev2.gen(GeneratorLabel::h(i)).expect("valid").powi(2);
                    let ki = ev2.gen(GeneratorLabel::h(i).inv()).expect("valid").powi(2);
                    (&k - &ki).scale(qq.inv())
                } else {
                    Operator::zeros(c.dims())
                };
                let scale = e.norm() * f.norm();
                ((&c - &want).norm() / scale, None)
            });
            out.run(format!("algebra.cartan_action.{i}{j}"), Rule::AtMost(tol), || {
                let k = ev2.gen(GeneratorLabel::h(i)).expect("valid");
                let ki = ev2.gen(GeneratorLabel::h(i).inv()).expect("valid");
                let e = ev2.gen(GeneratorLabel::e(j)).expect("valid");
                let a = cartan_entry(n, i, j) as f64;
                (rel_diff(&(&(&k * &e) * &ki), &e.scale(p.q_pow(a / 2.0))), None)
            });
        }
    }

    // coassociativity: explicit L-fold sums against the recursion (id ⊗ Δ^{(L−1)}) Δ
    for fold in 2..=3usize {
        let rep = CoproductRep::fundamental(&p.with_sites(fold), fold);
        let shorter = CoproductRep::fundamental(&p.with_sites(fold - 1), fold - 1);
        let one = CoproductRep::fundamental(p, 1);
        for i in 1..n {
            for g in [GeneratorLabel::e(i), GeneratorLabel::f(i)] {
                out.run(format!("algebra.coassoc.L{fold}.{}", g.tag()), Rule::AtMost(tol), || {
                    let h = GeneratorLabel::h(i);
                    let rec = &kron(&one.gen(h.inv()).expect("valid"), &shorter.gen(g).expect("valid"))
                        + &kron(&one.gen(g).expect("valid"), &shorter.gen(h).expect("valid"));
                    (rel_diff(&rep.gen(g).expect("valid"), &rec), None)
                });
            }
        }
    }

    // t-element coproducts against the homomorphism construction
    let one = CoproductRep::fundamental(p, 1);
    let t1 = |l: TElementLabel| one.t(l).expect("valid");
    for i in 1..=n {
        for j in i + 1..=n {
            out.run(format!("algebra.coproduct_t.t{i}{j}"), Rule::AtMost(tol), || {
                let rhs = sum_ops(
                    &(i..=j).map(|k| kron(&t1(TElementLabel::t(k, j)), &t1(TElementLabel::t(i, k)))).collect::<Vec<_>>(),
                );
                (rel_diff(&two.t(TElementLabel::t(i, j)).expect("valid"), &rhs), None)
            });
            out.run(format!("algebra.coproduct_t.that{j}{i}"), Rule::AtMost(tol), || {
                let rhs = sum_ops(
                    &(i..=j)
                        .map(|k| kron(&t1(TElementLabel::t_hat(j, k)), &t1(TElementLabel::t_hat(k, i))))
                        .collect::<Vec<_>>(),
                );
                (rel_diff(&two.t(TElementLabel::t_hat(j, i)).expect("valid"), &rhs), None)
            });
            out.run(format!("algebra.coproduct_t.tminus{j}{i}"), Rule::AtMost(tol), || {
                let rhs = sum_ops(
                    &(i..=j)
                        .map(|k| kron(&t1(TElementLabel::t_minus(k, i)), &t1(TElementLabel::t_minus(j, k))))
                        .collect::<Vec<_>>(),
                );
                (rel_diff(&two.t(TElementLabel::t_minus(j, i)).expect("valid"), &rhs), None)
            });
        }
    }
    for (fam, first, last) in [
        (TFamily::T0N1, TElementLabel::t(1, 1), TElementLabel::t(n, n)),
        (TFamily::T0Hat1N, TElementLabel::t(1, 1), TElementLabel::t(n, n)),
        (TFamily::T0Minus1N, TElementLabel::t_minus(n, n), TElementLabel::t_minus(1, 1)),
        (TFamily::T0HatMinusN1, TElementLabel::t_minus(n, n), TElementLabel::t_minus(1, 1)),
    ] {
        out.run(format!("algebra.coproduct_affine.{fam:?}"), Rule::AtMost(tol), || {
            let y = t1(TElementLabel::affine(fam));
            let rhs = &kron(&t1(first), &y) + &kron(&y, &t1(last));
            (rel_diff(&two.t(TElementLabel::affine(fam)).expect("valid"), &rhs), None)
        });
    }

    // Lax operators
    for gauge in Gauge::ALL {
        let g = gauge.short();
        let mut scalars = Vec::new();
        for (s, &l) in lams.iter().enumerate() {
            let f = prop_check(&build_lax(p, l, gauge), &build_r(p, l, gauge), tol).expect("R nonzero");
            scalars.push(f.scalar);
            out.run(format!("algebra.lax_vs_r.{g}.s{s}"), Rule::AtMost(tol), || (f.residual, Some(f.scalar)));
        }
        out.run(format!("algebra.lax_vs_r.{g}.scalar_is_two"), Rule::AtMost(tol), || {
            let worst = scalars.iter().map(|z| (z - 2.0).norm() / 2.0).fold(0.0, f64::max);
            (worst, Some(scalars[0]))
        });
        let (l1, l2) = (lams[0], *lams.get(1).unwrap_or(&(lams[0] * 0.5 + 0.1)));
        out.run(format!("algebra.rll.{g}"), Rule::AtMost(tol), || {
            let d = [n, n, n];
            let r = embed_at(&build_r(p, l1 - l2, gauge), &[0, 1], &d).expect("valid");
            let la = embed_at(&build_lax(p, l1, gauge), &[0, 2], &d).expect("valid");
            let lb = embed_at(&build_lax(p, l2, gauge), &[1, 2], &d).expect("valid");
            (rel_diff(&(&(&r * &la) * &lb), &(&(&lb * &la) * &r)), None)
        });
        out.run(format!("algebra.lax_hat_inverse.{g}"), Rule::AtMost(tol), || match build_lax_hat(p, l1, gauge) {
            Ok(h) => (rel_diff(&(&h * &build_lax(p, -l1, gauge)), &Operator::identity(&[n, n])), None),
            Err(_) => (f64::INFINITY, None),
        });
    }
    // coproduct law for the two asymptotic halves of L and of L̂
    let d3 = [n, n, n];
    for (nm, build) in [("plus", lax_plus as fn(&CoproductRep) -> Operator), ("minus", lax_minus)] {
        out.run(format!("algebra.lax_coproduct.{nm}"), Rule::AtMost(tol), || {
            let single = build(&one);
            let rhs = &embed_at(&single, &[0, 2], &d3).expect("valid") * &embed_at(&single, &[0, 1], &d3).expect("valid");
            (rel_diff(&build(&two), &rhs), None)
        });
        out.run(format!("algebra.lax_hat_coproduct.{nm}"), Rule::AtMost(tol), || {
            let single = build(&one).inverse().expect("triangular with invertible diagonal");
            let rhs = &embed_at(&single, &[0, 1], &d3).expect("valid") * &embed_at(&single, &[0, 2], &d3).expect("valid");
            (rel_diff(&build(&two).inverse().expect("invertible"), &rhs), None)
        });
    }
    out.run("algebra.lax_hat_asymptotic_lower", Rule::AtMost(1e-10), || {
        let l = C64::new(15.0, 0.0);
        let h = build_lax_hat(p, l, Gauge::Homogeneous).expect("regular at large lambda").scale(l.exp());
        let mut upper = 0.0f64;
        for i in 1..=n {
            for j in i + 1..=n {
                upper += h.block(i, j).norm().powi(2);
            }
        }
        (upper.sqrt() / h.norm(), None)
    });

    // recursive elements at one site and the single-k form
    for i in 1..=n {
        for j in 1..=n {
            if i == j {
                continue;
            }
            out.run(format!("algebra.evaluation.E{i}{j}"), Rule::AtMost(tol), || {
                let a = rel_diff(&one.e_cal(i, j, false).expect("valid"), &Operator::unit(n, i, j));
                let b = rel_diff(&one.e_cal(i, j, true).expect("valid"), &Operator::unit(n, i, j));
                (a.max(b), None)
            });
            let (lo, hi) = (i.min(j), i.max(j));
            for k in lo + 1..hi {
                out.run(format!("algebra.single_k.E{i}{j}.k{k}"), Rule::AtMost(tol), || {
                    let a = two.e_cal(i, j, false).expect("valid");
                    (rel_diff(&a, &two.e_cal_single(i, j, k, false).expect("valid")), None)
                });
            }
        }
    }
    Ok(out.into_report("algebra", ParamsSnapshot::from_params(p, samples, seed, tol)))
}

/// P conjugation realises Δ′ = Π ∘ Δ on two sites.
pub fn flip_two_sites(op: &Operator, n: usize) -> Operator {
    let pm = permutation_swap(n);
    &(&pm * op) * &pm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_core::{c, ZERO};

    fn params(n: usize) -> ModelParams {
        ModelParams::new(n, c(0.37, 0.05), c(0.8, 0.2), c(0.6, 0.1), 2).unwrap()
    }

    #[test]
    fn pi_zero_equals_principal_at_zero() {
        let p = params(3);
        for g in all_generators(3) {
            let a = eval_generator(&p, g, ZERO, Gauge::Homogeneous).unwrap();
            let b = eval_generator(&p, g, ZERO, Gauge::Principal).unwrap();
            assert!(rel_diff(&a, &b) < 1e-15);
        }
    }

    #[test]
    fn cartan_half_power() {
        let p = params(3);
        let h = eval_generator(&p, GeneratorLabel::h(1), c(0.4, 0.0), Gauge::Homogeneous).unwrap();
        let want = Operator::from_diag(&[p.q_pow(0.5), p.q_pow(-0.5), ONE]);
        assert!(rel_diff(&h, &want) < 1e-15);
    }

    #[test]
    fn ef_commutator_single_site() {
        let p = params(3);
        let l = c(0.3, 0.2);
        let e = eval_generator(&p, GeneratorLabel::e(1), l, Gauge::Homogeneous).unwrap();
        let f = eval_generator(&p, GeneratorLabel::f(1), l, Gauge::Homogeneous).unwrap();
        let k = eval_generator(&p, GeneratorLabel::h(1), l, Gauge::Homogeneous).unwrap().powi(2);
        let ki = k.inverse().unwrap();
        let rhs = (&k - &ki).scale((p.q() - p.q().inv()).inv());
        assert!(rel_diff(&(&(&e * &f) - &(&f * &e)), &rhs) < 1e-13);
    }

    #[test]
    fn invalid_labels() {
        let p = params(3);
        assert!(eval_generator(&p, GeneratorLabel::e(4), ZERO, Gauge::Homogeneous).is_err());
        assert!(eval_generator(&p, GeneratorLabel::e(1).inv(), ZERO, Gauge::Homogeneous).is_err());
        let one = CoproductRep::fundamental(&p, 1);
        assert!(one.t(TElementLabel::t(2, 1)).is_err());
        assert!(one.t(TElementLabel::t_hat(1, 2)).is_err());
        assert!(one.e_cal(2, 2, false).is_err());
    }

    #[test]
    fn fold_one_is_evaluation() {
        let p = params(3);
        let l = c(0.2, 0.1);
        for g in all_generators(3) {
            let a = coproduct_rep(&p, g, 1, CoproductVariant::Delta, Some(l), Gauge::Homogeneous).unwrap();
            let b = eval_generator(&p, g, l, Gauge::Homogeneous).unwrap();
            assert!(rel_diff(&a, &b) < 1e-15);
        }
    }

    #[test]
    fn delta_prime_is_flipped_delta() {
        let p = params(3);
        for g in all_generators(3) {
            let d = coproduct_rep(&p, g, 2, CoproductVariant::Delta, None, Gauge::Homogeneous).unwrap();
            let dp = coproduct_rep(&p, g, 2, CoproductVariant::DeltaPrime, None, Gauge::Homogeneous).unwrap();
            assert!(rel_diff(&flip_two_sites(&d, 3), &dp) < 1e-15);
        }
    }

    #[test]
    fn recursive_elements_in_fundamental() {
        let p = params(4);
        let one = CoproductRep::fundamental(&p, 1);
        for i in 1..=4 {
            for j in 1..=4 {
                if i != j {
                    assert!(rel_diff(&one.e_cal(i, j, false).unwrap(), &Operator::unit(4, i, j)) < 1e-14);
                }
            }
            let t = one.t(TElementLabel::t(i, i)).unwrap();
            let mut d = vec![ONE; 4];
            d[i - 1] = p.q();
            assert!(rel_diff(&t, &Operator::from_diag(&d)) < 1e-15);
        }
    }

    #[test]
    fn lax_is_twice_r() {
        for n in 2..=4 {
            let p = params(n);
            for gauge in Gauge::ALL {
                for l in [c(0.3, 0.2), c(-0.6, 0.1)] {
                    let f = prop_check(&build_lax(&p, l, gauge), &build_r(&p, l, gauge), 1e-10).unwrap();
                    assert!(f.pass);
                    assert!((f.scalar - 2.0).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn block_forms_match_construction() {
        for n in 2..=4 {
            let p = params(n);
            let l = c(0.3, 0.1);
            for sites in 1..=2 {
                let mut forms = vec![BlockForm::Qnn];
                for i in 1..=n {
                    forms.push(BlockForm::ChevalleyE(i));
                    forms.push(BlockForm::ChevalleyF(i));
                    forms.push(BlockForm::CartanEps(i));
                }
                if n == 3 {
                    forms.extend([BlockForm::Q11, BlockForm::Q12, BlockForm::Q21]);
                }
                for f in forms {
                    let a = block_form_rep(&p, f, sites, l).unwrap();
                    let b = block_form_construction(&p, f, sites, l).unwrap();
                    assert!(rel_diff(&a, &b) < 1e-11, "n={n} N={sites} {f:?}: {}", rel_diff(&a, &b));
                }
            }
        }
        assert!(block_form_rep(&params(4), BlockForm::Q12, 1, ZERO).is_err());
    }

    #[test]
    fn suite_passes() {
        for n in 2..=4 {
            let r = verify_algebra_suite(&params(n), 2, 9, 1e-9).unwrap();
            assert!(r.pass, "{}", r.failures().map(|c| format!("{} {:.2e}\n", c.id, c.residual)).collect::<String>());
        }
    }
}
