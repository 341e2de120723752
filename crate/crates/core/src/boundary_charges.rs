//! Bulk asymptotic charges, boundary non-local charges 𝒯^{+(N)}_ij, the affine charge and
//! the symmetry checks of the open chain.

use crate::error::{Error, Result};
use crate::hecke_algebra::{rep_boundary, rep_bulk};
use crate::params::ModelParams;
use crate::quantum_algebra::{
    block_form_construction, block_form_rep, BlockForm, CoproductRep, CoproductVariant, GeneratorLabel,
    TElementLabel, TFamily,
};
use crate::reflection_k::{LeftBoundaryKind, RightBoundary};
use crate::report::{CheckList, ParamsSnapshot, Rule, VerificationReport};
use crate::sampler::Sampler;
use crate::spin_chain::{
    build_double_row, build_hamiltonian, build_monodromy, build_transfer, ChainSpec, HamiltonianRoute,
};
use crate::tensor_core::{
    comm_residual, embed_at, kron, permutation_swap, prop_check, rel_diff, Operator, C64, I, NORM_FLOOR,
};
use crate::yang_baxter::Gauge;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChargeSign {
    Plus,
    Minus,
}

/// Asymptotic bulk charges of the monodromy matrix.
#[derive(Clone, Debug)]
pub struct BulkCharges {
    pub sign: ChargeSign,
    /// T^{+}_ij (i ≤ j) or T^{−}_ij (i ≥ j).
    pub t: BTreeMap<(usize, usize), Operator>,
    /// T̂^{+}_ij (i ≥ j) or T̂^{−}_ij (i ≤ j).
    pub t_hat: BTreeMap<(usize, usize), Operator>,
    /// D^{±}_ii = Δ(t_ii^{±1}).
    pub diag: Vec<Operator>,
    /// B^{+}: superdiagonal and (n,1) corner; B^{−}: subdiagonal and (1,n) corner.
    pub b: BTreeMap<(usize, usize), Operator>,
    /// B̂^{+}: subdiagonal and (1,n) corner; B̂^{−}: superdiagonal and (n,1) corner.
    pub b_hat: BTreeMap<(usize, usize), Operator>,
}

pub fn build_bulk_charges(p: &ModelParams, sites: usize, sign: ChargeSign) -> Result<BulkCharges> {
    if sites < 1 {
        return Err(Error::InvalidParams("need at least one site".into()));
    }
    let n = p.n;
    let rep = CoproductRep::fundamental(&p.with_sites(sites), sites);
    let mut t = BTreeMap::new();
    let mut t_hat = BTreeMap::new();
    let (fam, fam_hat) = match sign {
        ChargeSign::Plus => (TFamily::T, TFamily::THat),
        ChargeSign::Minus => (TFamily::TMinus, TFamily::THatMinus),
    };
    for i in 1..=n {
        for j in 1..=n {
            let upper = i <= j;
            let lower = i >= j;
            let (take, take_hat) = match sign {
                ChargeSign::Plus => (upper, lower),
                ChargeSign::Minus => (lower, upper),
            };
            if take {
                t.insert((i, j), rep.t(TElementLabel::new(fam, i, j))?);
            }
            if take_hat {
                t_hat.insert((i, j), rep.t(TElementLabel::new(fam_hat, i, j))?);
            }
        }
    }
    let diag: Vec<Operator> = (1..=n).map(|i| t[&(i, i)].clone()).collect();
    let mut b = BTreeMap::new();
    let mut b_hat = BTreeMap::new();
    match sign {
        ChargeSign::Plus => {
            for i in 1..n {
                b.insert((i, i + 1), t[&(i, i + 1)].clone());
                b_hat.insert((i + 1, i), t_hat[&(i + 1, i)].clone());
            }
            b.insert((n, 1), rep.t(TElementLabel::affine(TFamily::T0N1))?);
            b_hat.insert((1, n), rep.t(TElementLabel::affine(TFamily::T0Hat1N))?);
        }
        ChargeSign::Minus => {
            for i in 1..n {
                b.insert((i + 1, i), t[&(i + 1, i)].clone());
                b_hat.insert((i, i + 1), t_hat[&(i, i + 1)].clone());
            }
            b.insert((1, n), rep.t(TElementLabel::affine(TFamily::T0Minus1N))?);
            b_hat.insert((n, 1), rep.t(TElementLabel::affine(TFamily::T0HatMinusN1))?);
        }
    }
    Ok(BulkCharges { sign, t, t_hat, diag, b, b_hat })
}

/// Boundary non-local charges and the affine charge.
#[derive(Clone, Debug)]
pub struct ChargeSet {
    pub entries: BTreeMap<(usize, usize), Operator>,
    pub affine: Operator,
    pub n: usize,
    pub sites: usize,
}

impl ChargeSet {
    /// Every (label, operator) pair, affine last.
    pub fn labelled(&self) -> Vec<(String, &Operator)> {
        let mut v: Vec<(String, &Operator)> = self.entries.iter().map(|((i, j), o)| (format!("T{i}{j}"), o)).collect();
        v.push((format!("T{}{}", self.n, self.n), &self.affine));
        v
    }
}

/// Charges assembled from the t-family images in an arbitrary coproduct realisation.
pub fn charges_in(rep: &CoproductRep) -> ChargeSet {
    let p = *rep.params();
    let n = p.n;
    let t = |i: usize, j: usize| rep.t(TElementLabel::t(i, j)).expect("valid");
    let th = |i: usize, j: usize| rep.t(TElementLabel::t_hat(i, j)).expect("valid");
    let em = p.exp_imum();
    let zero = crate::tensor_core::Operator::zeros(&rep.dims());
    let sum = |it: &mut dyn Iterator<Item = Operator>| it.fold(zero.clone(), |a, b| &a + &b);
    let mut entries = BTreeMap::new();
    let head = &(&(&t(1, 1) * &th(1, 1)).scale(p.cosh_imum() * 2.0) - &(&t(1, n) * &th(1, 1)).scale(I))
        - &(&t(1, 1) * &th(n, 1)).scale(I);
    let mid = sum(&mut (2..n).map(|j| &t(1, j) * &th(j, 1))).scale(em);
    entries.insert((1, 1), &head + &mid);
    for i in 2..=n {
        let a = sum(&mut (i..n).map(|j| &t(1, j) * &th(j, i))).scale(em);
        entries.insert((1, i), &a - &(&t(1, 1) * &th(n, i)).scale(I));
        let b = sum(&mut (i..n).map(|j| &t(i, j) * &th(j, 1))).scale(em);
        entries.insert((i, 1), &b - &(&t(i, n) * &th(1, 1)).scale(I));
    }
    for k in 2..n {
        for l in 2..n {
            let v = sum(&mut (k.max(l)..n).map(|j| &t(k, j) * &th(j, l))).scale(em);
            entries.insert((k, l), v);
        }
    }
    let tnn = t(n, n);
    let affine = &(&(&tnn * &tnn).scale(-p.cosh_2imuzeta() * 2.0)
        - &(&tnn * &rep.t(TElementLabel::affine(TFamily::T0Hat1N)).expect("valid")).scale(I))
        - &(&rep.t(TElementLabel::affine(TFamily::T0N1)).expect("valid") * &th(n, n)).scale(I);
    ChargeSet { entries, affine, n, sites: rep.sites() }
}

/// 𝒯^{+(N)}_ij on π₀^{⊗N}.
pub fn build_boundary_charges(p: &ModelParams, sites: usize) -> ChargeSet {
    charges_in(&CoproductRep::fundamental(&p.with_sites(sites), sites))
}

/// 𝒯^{+(N)}_nn on π₀^{⊗N}.
pub fn build_affine_charge(p: &ModelParams, sites: usize) -> Operator {
    build_boundary_charges(p, sites).affine
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChargeLabel {
    Entry(usize, usize),
    Affine,
}

impl ChargeLabel {
    fn validate(&self, n: usize) -> Result<()> {
        match *self {
            ChargeLabel::Affine => Ok(()),
            ChargeLabel::Entry(i, j) => {
                let edge = (i == 1 && (1..=n).contains(&j)) || (j == 1 && (1..=n).contains(&i));
                let mid = (2..n).contains(&i) && (2..n).contains(&j);
                if edge || mid {
                    Ok(())
                } else {
                    Err(Error::InvalidLabel(format!("no boundary charge at ({i}, {j}) for n = {n}")))
                }
            }
        }
    }
}

/// Closed forms of π_λ(𝒬).
pub fn eval_q_rep(p: &ModelParams, label: ChargeLabel, lambda: C64) -> Result<Operator> {
    let n = p.n;
    label.validate(n)?;
    let s = p.sinh_imu();
    let em = p.exp_imum();
    let e = |i: usize, j: usize| Operator::unit(n, i, j);
    let qd = |f: &dyn Fn(usize) -> f64| Operator::from_diag(&(1..=n).map(|k| p.q_pow(f(k))).collect::<Vec<_>>());
    let q11nn = qd(&|k| ((k == 1) as i32 + (k == n) as i32) as f64);
    // q^{h_n} = q^{ê_nn − ê_11}
    let qhn = qd(&|k| ((k == n) as i32 - (k == 1) as i32) as f64);
    let pre = -I * s * 2.0;
    Ok(match label {
        ChargeLabel::Affine => {
            let inner = &(&qhn.scale(p.cosh_2imuzeta() / (I * s)) + &e(n, 1).scale((-lambda * 2.0).exp()))
                + &e(1, n).scale((lambda * 2.0).exp());
            (&q11nn * &inner).scale(pre)
        }
        ChargeLabel::Entry(1, 1) => {
            let mut inner = &(&qhn.inverse()?.scale(-p.cosh_imum() / (I * s)) + &e(n, 1)) + &e(1, n);
            for j in 2..n {
                inner = &inner + &e(j, j).scale(I * s * 2.0 * em);
            }
            (&q11nn * &inner).scale(pre)
        }
        ChargeLabel::Entry(1, j) | ChargeLabel::Entry(j, 1) if j == n => q11nn.scale(-I),
        ChargeLabel::Entry(1, i) => (&e(i, 1).scale(I * em) + &e(i, n)).scale(pre),
        ChargeLabel::Entry(i, 1) => (&e(1, i).scale(I * em) + &e(n, i)).scale(pre),
        ChargeLabel::Entry(k, l) => {
            // middle charges are λ-independent products of the gl_{n−2} images
            let one = CoproductRep::fundamental(&p.with_sites(1), 1);
            charges_in(&one).entries[&(k, l)].clone()
        }
    })
}

/// π_λ(𝒬) built from the t-family products with π_λ on the single site.
pub fn eval_q_construction(p: &ModelParams, label: ChargeLabel, lambda: C64) -> Result<Operator> {
    label.validate(p.n)?;
    let rep = CoproductRep::new(&p.with_sites(1), &[lambda], CoproductVariant::Delta, Gauge::Homogeneous);
    let set = charges_in(&rep);
    Ok(match label {
        ChargeLabel::Affine => set.affine,
        ChargeLabel::Entry(i, j) => set.entries[&(i, j)].clone(),
    })
}

/// Δ^{(L)}(𝒬) by the recursion charge ⊗ group-like plus cross terms, on π₀^{⊗L}.
///
/// Supports the edge charges (1,i), (i,1), (1,1) and the affine charge.
pub fn coproduct_charges(p: &ModelParams, fold: usize, label: ChargeLabel) -> Result<Operator> {
    let n = p.n;
    label.validate(n)?;
    if let ChargeLabel::Entry(i, j) = label {
        if i != 1 && j != 1 {
            return Err(Error::InvalidLabel(format!("recursion covers edge charges only, got ({i}, {j})")));
        }
    }
    if fold < 1 {
        return Err(Error::InvalidParams("coproduct fold L must be at least 1".into()));
    }
    let zero = C64::new(0.0, 0.0);
    if fold == 1 {
        return eval_q_rep(p, label, zero);
    }
    let a1 = CoproductRep::fundamental(&p.with_sites(1), 1);
    let ar = CoproductRep::fundamental(&p.with_sites(fold - 1), fold - 1);
    let t = |a: &CoproductRep, i: usize, j: usize| a.t(TElementLabel::t(i, j)).expect("valid");
    let th = |a: &CoproductRep, i: usize, j: usize| a.t(TElementLabel::t_hat(i, j)).expect("valid");
    let q1 = |i: usize, j: usize| eval_q_rep(p, ChargeLabel::Entry(i, j), zero).expect("valid");
    let em = p.exp_imum();
    let t11tnn = &t(&a1, 1, 1) * &t(&a1, n, n);
    let dims = vec![n; fold];
    let mut acc = Operator::zeros(&dims);
    let cross = |acc: &mut Operator, k: usize, j: usize, l: usize, left: Operator| {
        let x = &t(&a1, k, j) * &th(&a1, j, l);
        *acc = &*acc + &kron(&x, &left).scale(em);
    };
    match label {
        ChargeLabel::Affine => {
            let tnn = t(&ar, n, n);
            let first = &q1_affine(p) + &t11tnn.scale(p.cosh_2imuzeta() * 2.0);
            let rest = coproduct_charges(p, fold - 1, ChargeLabel::Affine)?;
            return Ok(&kron(&first, &(&tnn * &tnn)) + &kron(&t11tnn, &rest));
        }
        ChargeLabel::Entry(1, 1) => {
            for k in 1..n {
                acc = &acc + &kron(&q1(1, k), &(&t(&ar, 1, 1) * &th(&ar, k, 1)));
            }
            for k in 2..n {
                acc = &acc + &kron(&q1(k, 1), &(&t(&ar, 1, k) * &t(&ar, 1, 1)));
            }
            for j in 2..n {
                for k in 2..=j {
                    for l in 2..=j {
                        cross(&mut acc, k, j, l, &t(&ar, 1, k) * &th(&ar, l, 1));
                    }
                }
            }
            let tail = &(&t(&ar, 1, n) * &t(&ar, 1, 1)) + &(&t(&ar, 1, 1) * &th(&ar, n, 1));
            acc = &acc - &kron(&t11tnn, &tail).scale(I);
        }
        ChargeLabel::Entry(1, i) => {
            for k in i..=n {
                acc = &acc + &kron(&q1(1, k), &(&t(&ar, 1, 1) * &th(&ar, k, i)));
            }
            for j in i..n {
                for k in 2..=j {
                    for l in i..=j {
                        cross(&mut acc, k, j, l, &t(&ar, 1, k) * &th(&ar, l, i));
                    }
                }
            }
        }
        ChargeLabel::Entry(i, _) => {
            for k in i..=n {
                acc = &acc + &kron(&q1(k, 1), &(&t(&ar, i, k) * &t(&ar, 1, 1)));
            }
            for j in i..n {
                for k in i..=j {
                    for l in 2..=j {
                        cross(&mut acc, k, j, l, &t(&ar, i, k) * &th(&ar, l, 1));
                    }
                }
            }
        }
    }
    Ok(acc)
}

fn q1_affine(p: &ModelParams) -> Operator {
    eval_q_rep(p, ChargeLabel::Affine, C64::new(0.0, 0.0)).expect("affine label is always valid")
}

/// Δ′^{(2)}(𝒬) = Π ∘ Δ^{(2)}(𝒬).
pub fn coproduct_charges_prime(p: &ModelParams, label: ChargeLabel) -> Result<Operator> {
    let d = coproduct_charges(p, 2, label)?;
    let pm = permutation_swap(p.n);
    Ok(&(&pm * &d) * &pm)
}

/// Bulk generators of U_q(gl_{n−2}): e_i, f_i (2 ≤ i ≤ n−2) and q^{ε_i} (2 ≤ i ≤ n−1).
fn gl_n_minus_2(rep: &CoproductRep, n: usize) -> Vec<(String, Operator)> {
    let mut v = Vec::new();
    for i in 2..n.saturating_sub(1) {
        v.push((format!("e{i}"), rep.gen(GeneratorLabel::e(i)).expect("valid")));
        v.push((format!("f{i}"), rep.gen(GeneratorLabel::f(i)).expect("valid")));
    }
    for i in 2..n {
        v.push((format!("qeps{i}"), rep.t(TElementLabel::t(i, i)).expect("valid")));
    }
    v
}

/// Generators of U_q(gl_l) ⊗ U_q(gl_{n−l}); l = n gives all of U_q(gl_n).
fn block_generators(rep: &CoproductRep, n: usize, l: usize) -> Vec<(String, Operator)> {
    let mut v = Vec::new();
    for i in 1..n {
        if i == l {
            continue;
        }
        v.push((format!("e{i}"), rep.gen(GeneratorLabel::e(i)).expect("valid")));
        v.push((format!("f{i}"), rep.gen(GeneratorLabel::f(i)).expect("valid")));
    }
    for i in 1..=n {
        v.push((format!("qeps{i}"), rep.t(TElementLabel::t(i, i)).expect("valid")));
    }
    v
}

fn scaled(lhs: &Operator, rhs: &Operator, scale: f64) -> f64 {
    (lhs - rhs).norm() / scale.max(NORM_FLOOR)
}

fn comm(a: &Operator, b: &Operator) -> Operator {
    &(a * b) - &(b * a)
}

/// Right-hand side of the affine commutator identity.
pub fn affine_defect_rhs(p: &ModelParams, dr: &Operator, e11enn: &Operator, lambda: C64) -> Operator {
    let n = p.n;
    let c = I * p.w() * 2.0 * (lambda * 2.0 + I * p.mu * n as f64).sinh();
    (&(&dr.block(1, n) - &dr.block(n, 1)) * e11enn).scale(c)
}

/// Exchange relation residual R^±₁₂ 𝒯₁ R̂⁺₁₂ 𝒯₂ = 𝒯₂ R⁺₁₂ 𝒯₁ R̂^±₁₂ for the block matrix of charges.
pub fn exchange_residual(p: &ModelParams, set: &ChargeSet, minus: bool) -> f64 {
    let n = p.n;
    let dims_q = vec![n; set.sites];
    let blocks: Vec<((usize, usize), Operator)> = set.entries.iter().map(|(k, v)| (*k, v.clone())).collect();
    let tp = Operator::from_blocks(n, &dims_q, &blocks);
    let mut dims = vec![n, n];
    dims.extend(dims_q.iter().copied());
    let quantum: Vec<usize> = (2..set.sites + 2).collect();
    let slots1: Vec<usize> = std::iter::once(0).chain(quantum.iter().copied()).collect();
    let slots2: Vec<usize> = std::iter::once(1).chain(quantum.iter().copied()).collect();
    let t1 = embed_at(&tp, &slots1, &dims).expect("valid");
    let t2 = embed_at(&tp, &slots2, &dims).expect("valid");
    let g = &crate::hecke_algebra::build_bulk_generator(p) + &Operator::identity(&[n, n]).scale(p.q());
    let pm = permutation_swap(n);
    let rp = &pm * &g;
    let rm = &pm * &g.inverse().expect("g is invertible for generic q");
    let hat = |r: &Operator| &(&pm * r) * &pm;
    let e = |r: &Operator| embed_at(r, &[0, 1], &dims).expect("valid");
    let rs = if minus { &rm } else { &rp };
    let lhs = &(&(&e(rs) * &t1) * &e(&hat(&rp))) * &t2;
    let rhs = &(&(&t2 * &e(&rp)) * &t1) * &e(&hat(rs));
    rel_diff(&lhs, &rhs)
}

/// Charge conservation, affine defect, exchange relations and construction consistency.
pub fn verify_symmetry_suite(spec: &ChainSpec, samples: usize, seed: u64, tol: f64) -> Result<VerificationReport> {
    spec.validate()?;
    let p = spec.params;
    let n = p.n;
    let nsites = p.sites;
    let base = ChainSpec::standard(p);
    let mut out = CheckList::new();
    let mut sampler = Sampler::new(seed);
    let lams: Vec<C64> = (0..samples.max(1)).map(|_| sampler.lambda_small(&p)).collect();

    let set = build_boundary_charges(&p, nsites);
    let bulk = CoproductRep::fundamental(&p, nsites);
    let labelled = set.labelled();
    let entries: Vec<(String, &Operator)> = labelled[..labelled.len() - 1].to_vec();
    let e11enn = &bulk.t(TElementLabel::t(1, 1))? * &bulk.t(TElementLabel::t(n, n))?;

    // (a) charges commute with every ρ(U_l)
    let mut gens = vec![("U0".to_string(), rep_boundary(&p))];
    for l in 1..nsites {
        gens.push((format!("U{l}"), rep_bulk(&p, l)?));
    }
    for (gn, g) in &gens {
        for (cn, c) in &entries {
            out.run(format!("charges.hecke_commute.{gn}.{cn}"), Rule::AtMost(tol), || (comm_residual(g, c), None));
        }
    }

    // (b) charges commute with the Hamiltonian
    match build_hamiltonian(&base, HamiltonianRoute::HeckeForm) {
        Ok(h) => {
            for (cn, c) in &entries {
                out.run(format!("charges.hamiltonian_commute.{cn}"), Rule::AtMost(tol), || (comm_residual(&h, c), None));
            }
        }
        Err(e) => out.error("charges.hamiltonian_commute", &e),
    }

    let gl2 = gl_n_minus_2(&bulk, n);
    for (s, &lam) in lams.iter().enumerate() {
        let t = build_transfer(&base, lam, false)?;
        // (c) U_q(gl_{n−2}) symmetry
        for (gn, g) in &gl2 {
            out.run(format!("charges.gl_middle.{gn}.s{s}"), Rule::AtMost(tol), || (comm_residual(&t, g), None));
        }
        // (d) boundary charges
        for (cn, c) in &entries {
            out.run(format!("charges.charge_commute.{cn}.s{s}"), Rule::AtMost(tol), || (comm_residual(&t, c), None));
        }
        // (e) the affine charge fails to commute in a prescribed way
        let dr = build_double_row(&base, lam)?;
        let cm = comm(&t, &set.affine);
        let scale = t.norm() * set.affine.norm();
        let rhs = affine_defect_rhs(&p, &dr, &e11enn, lam);
        out.run(format!("charges.affine_defect.identity.s{s}"), Rule::AtMost(tol), || (scaled(&cm, &rhs, scale), None));
        out.run(format!("charges.affine_defect.nonzero.s{s}"), Rule::Exceeds(1e-3), || (cm.norm() / scale, None));
        // (f) affine-limit left boundary
        let ta = build_transfer(&base.with_left(LeftBoundaryKind::AffineLimit), lam, false)?;
        out.run(format!("charges.affine_left.T{n}{n}.s{s}"), Rule::AtMost(tol), || (comm_residual(&ta, &set.affine), None));
        for (gn, g) in &gl2 {
            out.run(format!("charges.affine_left.{gn}.s{s}"), Rule::AtMost(tol), || (comm_residual(&ta, g), None));
        }
        // (h) trivial right boundary: full U_q(gl_n)
        let tt = build_transfer(&base.with_right(RightBoundary::Trivial), lam, false)?;
        for (gn, g) in block_generators(&bulk, n, n) {
            out.run(format!("charges.trivial.{gn}.s{s}"), Rule::AtMost(tol), || (comm_residual(&tt, &g), None));
        }
        // (i) diagonal right boundary: U_q(gl_l) ⊗ U_q(gl_{n−l})
        let (l, xi) = match spec.right {
            RightBoundary::Diagonal { l, xi } => (l, xi),
            _ => (1, C64::new(0.3, 0.0)),
        };
        let td = build_transfer(&base.with_right(RightBoundary::Diagonal { l, xi }), lam, false)?;
        for (gn, g) in block_generators(&bulk, n, l) {
            out.run(format!("charges.diagonal.l{l}.{gn}.s{s}"), Rule::AtMost(tol), || (comm_residual(&td, &g), None));
        }
    }

    // (g) exchange relations; N = 2 is a diagnostic
    let set1 = build_boundary_charges(&p, 1);
    out.run("charges.exchange.plus", Rule::AtMost(tol), || (exchange_residual(&p, &set1, false), None));
    out.run("charges.exchange.minus", Rule::AtMost(tol), || (exchange_residual(&p, &set1, true), None));
    if n <= 3 {
        let set2 = build_boundary_charges(&p, 2);
        out.run("charges.exchange_n2.plus", Rule::Info, || (exchange_residual(&p, &set2, false), None));
        out.run("charges.exchange_n2.minus", Rule::Info, || (exchange_residual(&p, &set2, true), None));
    }

    // (j) block relations among the charges
    relation_checks(&mut out, &p, &base, &set, &bulk, lams[0], tol)?;

    // evaluation forms and their intertwining with K
    for &lam in lams.iter().take(2) {
        let k = RightBoundary::Explicit.build(&p, lam, Gauge::Homogeneous)?;
        let mut labels: Vec<ChargeLabel> = set.entries.keys().map(|&(i, j)| ChargeLabel::Entry(i, j)).collect();
        labels.push(ChargeLabel::Affine);
        for lb in labels {
            let name = match lb {
                ChargeLabel::Entry(i, j) => format!("T{i}{j}"),
                ChargeLabel::Affine => format!("T{n}{n}"),
            };
            let a = eval_q_rep(&p, lb, lam)?;
            let b = eval_q_construction(&p, lb, lam)?;
            let am = eval_q_rep(&p, lb, -lam)?;
            out.run(format!("charges.eval_q.{name}"), Rule::AtMost(1e-11), || (rel_diff(&a, &b), None));
            out.run(format!("charges.k_intertwines.{name}"), Rule::AtMost(1e-11), || (rel_diff(&(&a * &k), &(&k * &am)), None));
        }
    }

    // consistency: asymptotics, products and the coproduct recursion
    consistency_checks(&mut out, &p, &set)?;

    let mut snap = ParamsSnapshot::from_params(&p, samples, seed, tol);
    snap.gauge = spec.gauge.name().into();
    snap.left = spec.left.name().into();
    snap.right = spec.right.name().into();
    Ok(out.into_report("symmetry", snap))
}

fn relation_checks(
    out: &mut CheckList,
    p: &ModelParams,
    base: &ChainSpec,
    set: &ChargeSet,
    bulk: &CoproductRep,
    lam: C64,
    tol: f64,
) -> Result<()> {
    let n = p.n;
    let dr = build_double_row(base, lam)?;
    let a = |j: usize| dr.block(j, j);
    let bl = |i: usize, j: usize| dr.block(i, j);
    let eps = |i: usize| bulk.t(TElementLabel::t(i, i)).expect("valid");
    let q = p.q();
    let qh = p.q_pow(0.5);
    let w = p.w();
    let em = p.exp_imum();
    let qi = q.inv();
    let e11enn = &eps(1) * &eps(n);
    let mut rel = |id: String, lhs: Operator, rhs: Operator, scale: f64| {
        out.run(format!("charges.rel.{id}"), Rule::AtMost(tol), || (scaled(&lhs, &rhs, scale), None));
    };

    for j in 2..n.saturating_sub(1) {
        let e = bulk.gen(GeneratorLabel::e(j))?;
        let f = bulk.gen(GeneratorLabel::f(j))?;
        let hm = bulk.gen(GeneratorLabel::h(j).inv())?;
        let hp = bulk.gen(GeneratorLabel::h(j))?;
        let (c, b) = (bl(j + 1, j), bl(j, j + 1));
        for i in 1..=n {
            let se = e.norm() * a(i).norm();
            let sf = f.norm() * a(i).norm();
            let (re, rf) = if i == j {
                ((&hm * &c).scale(-qh.inv()), (&b * &hm).scale(qh.inv()))
            } else if i == j + 1 {
                ((&c * &hm).scale(qh), (&hm * &b).scale(-qh))
            } else {
                (Operator::zeros(e.dims()), Operator::zeros(e.dims()))
            };
            rel(format!("e_diag.e{j}.A{i}"), comm(&e, &a(i)), re, se);
            rel(format!("f_diag.f{j}.A{i}"), comm(&f, &a(i)), rf, sf);
        }
        let sb = hp.norm() * b.norm();
        let sc = hp.norm() * c.norm();
        rel(format!("cartan.B{j}.plus"), (&hp * &b).scale(qh), (&b * &hp).scale(qh.inv()), sb);
        rel(format!("cartan.B{j}.minus"), (&hm * &b).scale(qh.inv()), (&b * &hm).scale(qh), sb);
        rel(format!("cartan.C{j}.plus"), (&hp * &c).scale(qh.inv()), (&c * &hp).scale(qh), sc);
        rel(format!("cartan.C{j}.minus"), (&hm * &c).scale(qh), (&c * &hm).scale(qh.inv()), sc);
    }
    for j in 2..n {
        for i in 1..=n {
            let s = eps(j).norm() * a(i).norm();
            rel(format!("cartan.E{j}{j}.A{i}"), comm(&eps(j), &a(i)), Operator::zeros(a(i).dims()), s);
        }
    }

    // affine charge against the diagonal blocks
    let tnn = &set.affine;
    for i in 1..=n {
        let s = a(i).norm() * tnn.norm();
        let rhs = if i == 1 {
            let c = I * w * q * (lam * 2.0).exp();
            &(&bl(1, n) * &e11enn).scale(c) - &(&e11enn * &bl(n, 1)).scale(c)
        } else if i == n {
            let c = I * w * qi * (-lam * 2.0).exp();
            &(&bl(n, 1) * &e11enn).scale(c) - &(&e11enn * &bl(1, n)).scale(c)
        } else {
            Operator::zeros(tnn.dims())
        };
        rel(format!("affine.A{i}"), comm(&a(i), tnn), rhs, s);
    }
    for (nm, x) in [("B1n", bl(1, n)), ("Cn1", bl(n, 1))] {
        let s = e11enn.norm() * x.norm();
        rel(format!("corner.{nm}"), comm(&e11enn, &x), Operator::zeros(x.dims()), s);
    }

    if n == 3 {
        let e22sq = &eps(2) * &eps(2);
        let e13 = &e11enn;
        let t = |i: usize, j: usize| set.entries[&(i, j)].clone();
        let sc = |x: &Operator, y: &Operator| x.norm() * y.norm();
        // 𝒯₁₂ against the blocks
        rel("t12.A1".into(), comm(&a(1), &t(1, 2)), (&bl(1, 2) * &e22sq).scale(-em * w * qi), sc(&a(1), &t(1, 2)));
        rel("t12.A3".into(), comm(&a(3), &t(1, 2)), (&bl(3, 2) * e13).scale(I * w), sc(&a(3), &t(1, 2)));
        rel(
            "t12.A2".into(),
            comm(&a(2), &t(1, 2)),
            &(&e22sq * &bl(1, 2)).scale(em * w * qi) - &(e13 * &bl(3, 2)).scale(I * qi * w),
            sc(&a(2), &t(1, 2)),
        );
        rel(
            "t12.C21".into(),
            comm(&t(1, 2), &bl(2, 1)),
            &(&(e13 * &bl(3, 1)).scale(I * w * qi) - &(&e22sq * &a(1)).scale(qi * em * w))
                + &(&a(2) * &e22sq).scale(qi * em * w),
            sc(&t(1, 2), &bl(2, 1)),
        );
        // 𝒯₂₁ against the blocks
        rel("t21.A1".into(), comm(&a(1), &t(2, 1)), (&e22sq * &bl(2, 1)).scale(em * w * qi), sc(&a(1), &t(2, 1)));
        rel("t21.A3".into(), comm(&a(3), &t(2, 1)), (e13 * &bl(2, 3)).scale(-I * w), sc(&a(3), &t(2, 1)));
        rel(
            "t21.A2".into(),
            comm(&a(2), &t(2, 1)),
            &(&bl(2, 1) * &e22sq).scale(-em * w * qi) + &(&bl(2, 3) * e13).scale(I * qi * w),
            sc(&a(2), &t(2, 1)),
        );
        rel(
            "t21.B12".into(),
            comm(&t(2, 1), &bl(1, 2)),
            &(&(&bl(1, 3) * e13).scale(-I * w * qi) + &(&a(1) * &e22sq).scale(qi * em * w))
                - &(&e22sq * &a(2)).scale(qi * em * w),
            sc(&t(2, 1), &bl(1, 2)),
        );
        // 𝒯₁₁ against the blocks
        rel(
            "t11.A1".into(),
            comm(&a(1), &t(1, 1)),
            &(&(&(&bl(1, 2) * &t(2, 1)).scale(-w * qi) + &(&bl(1, 3) * e13).scale(I * w * qi))
                + &(&t(1, 2) * &bl(2, 1)).scale(w * qi))
                - &(e13 * &bl(3, 1)).scale(I * w * qi),
            sc(&a(1), &t(1, 1)),
        );
        rel(
            "t11.A2".into(),
            comm(&a(2), &t(1, 1)),
            &(&(&(&bl(2, 1) * &t(1, 2)).scale(-w * q) + &(&t(2, 1) * &bl(1, 2)).scale(w * q))
                + &(&e22sq * &a(2)).scale(em * w * w))
                - &(&a(2) * &e22sq).scale(em * w * w),
            sc(&a(2), &t(1, 1)),
        );
        rel(
            "t11.A3".into(),
            comm(&a(3), &t(1, 1)),
            &(e13 * &bl(1, 3)).scale(-I * w * q) + &(&bl(3, 1) * e13).scale(I * w * q),
            sc(&a(3), &t(1, 1)),
        );
        // weight relations
        rel("weights.C32".into(), (e13 * &bl(3, 2)).scale(q), &bl(3, 2) * e13, sc(e13, &bl(3, 2)));
        rel("weights.B12".into(), &e22sq * &bl(1, 2), (&bl(1, 2) * &e22sq).scale(q * q), sc(&e22sq, &bl(1, 2)));
        rel("weights.B23".into(), e13 * &bl(2, 3), (&bl(2, 3) * e13).scale(q), sc(e13, &bl(2, 3)));
        rel("weights.C21".into(), (&e22sq * &bl(2, 1)).scale(q * q), &bl(2, 1) * &e22sq, sc(&e22sq, &bl(2, 1)));
        for (nm, x) in [("B13", bl(1, 3)), ("C31", bl(3, 1))] {
            rel(format!("weights.{nm}"), comm(e13, &x), Operator::zeros(x.dims()), sc(e13, &x));
        }
    }
    Ok(())
}

fn consistency_checks(out: &mut CheckList, p: &ModelParams, set: &ChargeSet) -> Result<()> {
    let n = p.n;
    let nsites = set.sites;
    let big = C64::new(15.0, 0.0);
    let dr = build_double_row(&ChainSpec::standard(*p), big)?;
    let mut scalars = Vec::new();
    for (&(i, j), c) in &set.entries {
        let f = prop_check(&dr.block(i, j), c, 1e-8)?;
        scalars.push(f.scalar);
        out.run(format!("charges.asymptotic.T{i}{j}"), Rule::AtMost(1e-8), || (f.residual, Some(f.scalar)));
    }
    let s0 = scalars[0];
    out.run("charges.asymptotic.common_scalar", Rule::AtMost(1e-8), || {
        (scalars.iter().map(|s| (s - s0).norm() / s0.norm()).fold(0.0, f64::max), Some(s0))
    });
    out.run("charges.asymptotic.zero_blocks", Rule::AtMost(1e-8), || {
        let mut worst = 0.0f64;
        for i in 1..=n {
            for j in 1..=n {
                if !set.entries.contains_key(&(i, j)) && !(i == n && j == n) {
                    worst = worst.max(dr.block(i, j).norm() / dr.norm());
                }
            }
        }
        (worst, None)
    });

    // bulk asymptotics T(λ) ≈ 2^{−N} e^{Nλ} T⁺ and 2^{−N} (−e^{−λ})^N T⁻
    let spec = ChainSpec::standard(*p).with_sites(nsites);
    for (sign, lam) in [(ChargeSign::Plus, big), (ChargeSign::Minus, -big)] {
        let bc = build_bulk_charges(p, nsites, sign)?;
        let t = build_monodromy(&spec, lam);
        let norm = match sign {
            ChargeSign::Plus => (lam * nsites as f64).exp() / 2f64.powi(nsites as i32),
            ChargeSign::Minus => (-lam * nsites as f64).exp() * (-0.5f64).powi(nsites as i32),
        };
        let tag = if sign == ChargeSign::Plus { "plus" } else { "minus" };
        let mut worst = 0.0f64;
        for (&(i, j), c) in &bc.t {
            worst = worst.max(rel_diff(&t.block(i, j).scale(norm.inv()), c));
        }
        out.run(format!("charges.bulk_asymptotic.{tag}"), Rule::AtMost(1e-8), || (worst, None));
    }
    // principal gradation: diagonal blocks at e^{Nλ}, B⁺ blocks at e^{Nλ − 2λ/n}
    {
        let bc = build_bulk_charges(p, nsites, ChargeSign::Plus)?;
        let t = build_monodromy(&spec.with_gauge(Gauge::Principal), big);
        let lead = (big * nsites as f64).exp() / 2f64.powi(nsites as i32);
        let sub = lead * (-big * (2.0 / n as f64)).exp();
        let mut worst = 0.0f64;
        for (i, d) in bc.diag.iter().enumerate() {
            worst = worst.max(rel_diff(&t.block(i + 1, i + 1).scale(lead.inv()), d));
        }
        for (&(i, j), b) in &bc.b {
            worst = worst.max(rel_diff(&t.block(i, j).scale(sub.inv()), b));
        }
        out.run("charges.bulk_asymptotic.principal", Rule::AtMost(1e-8), || (worst, None));
    }

    // products against the coproduct recursion
    let mut labels: Vec<ChargeLabel> = set
        .entries
        .keys()
        .filter(|(i, j)| *i == 1 || *j == 1)
        .map(|&(i, j)| ChargeLabel::Entry(i, j))
        .collect();
    labels.push(ChargeLabel::Affine);
    for lb in labels {
        let (name, prod) = match lb {
            ChargeLabel::Entry(i, j) => (format!("T{i}{j}"), set.entries[&(i, j)].clone()),
            ChargeLabel::Affine => (format!("T{n}{n}"), set.affine.clone()),
        };
        let rec = coproduct_charges(p, nsites, lb)?;
        out.run(format!("charges.recursion.{name}"), Rule::AtMost(1e-11), || (rel_diff(&rec, &prod), None));
    }

    // closed block forms of Δ′ on π_λ ⊗ π₀^{⊗N}
    let lam = C64::new(0.3, 0.1);
    let ds = nsites.min(2);
    let mut forms = vec![BlockForm::Qnn];
    for i in 1..=n {
        forms.extend([BlockForm::ChevalleyE(i), BlockForm::ChevalleyF(i), BlockForm::CartanEps(i)]);
    }
    if n == 3 {
        forms.extend([BlockForm::Q11, BlockForm::Q12, BlockForm::Q21]);
    }
    for f in forms {
        let a = block_form_rep(p, f, ds, lam)?;
        let b = block_form_construction(p, f, ds, lam)?;
        out.run(format!("charges.block_forms.{f:?}"), Rule::AtMost(1e-11), || (rel_diff(&a, &b), None));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_core::c;

    fn params(n: usize, sites: usize) -> ModelParams {
        ModelParams::new(n, c(0.37, 0.05), c(0.8, 0.2), c(0.6, 0.1), sites).unwrap()
    }

    #[test]
    fn entry_layout() {
        for n in 2..=4 {
            let set = build_boundary_charges(&params(n, 1), 1);
            let mut want = vec![(1, 1)];
            for i in 2..=n {
                want.push((1, i));
                want.push((i, 1));
            }
            for k in 2..n {
                for l in 2..n {
                    want.push((k, l));
                }
            }
            want.sort();
            assert_eq!(set.entries.keys().copied().collect::<Vec<_>>(), want);
        }
    }

    #[test]
    fn single_site_charges_match_closed_forms() {
        for n in 2..=4 {
            let p = params(n, 1);
            let set = build_boundary_charges(&p, 1);
            for (&(i, j), c) in &set.entries {
                let e = eval_q_rep(&p, ChargeLabel::Entry(i, j), C64::new(0.0, 0.0)).unwrap();
                assert!(rel_diff(c, &e) < 1e-12, "n={n} ({i},{j})");
            }
        }
    }

    #[test]
    fn transpose_pairs() {
        let p = params(4, 1);
        let l = c(0.2, 0.1);
        for i in 2..4 {
            let a = eval_q_rep(&p, ChargeLabel::Entry(1, i), l).unwrap();
            let b = eval_q_rep(&p, ChargeLabel::Entry(i, 1), l).unwrap();
            assert!(rel_diff(&a, &b.transpose()) < 1e-15);
        }
    }

    #[test]
    fn affine_form_two_by_two() {
        let p = params(2, 1);
        let l = c(0.3, 0.1);
        let qa = eval_q_rep(&p, ChargeLabel::Affine, l).unwrap();
        let s = p.sinh_imu();
        let corner12 = -I * s * 2.0 * p.q() * (l * 2.0).exp();
        assert!((qa.get(0, 1) - corner12).norm() < 1e-14);
        assert!(eval_q_rep(&p, ChargeLabel::Entry(2, 2), l).is_err());
    }

    #[test]
    fn recursion_matches_products() {
        for n in [2, 3] {
            for sites in 2..=3 {
                let p = params(n, sites);
                let set = build_boundary_charges(&p, sites);
                for (&(i, j), c) in set.entries.iter().filter(|((i, j), _)| *i == 1 || *j == 1) {
                    let r = coproduct_charges(&p, sites, ChargeLabel::Entry(i, j)).unwrap();
                    assert!(rel_diff(&r, c) < 1e-11);
                }
                let r = coproduct_charges(&p, sites, ChargeLabel::Affine).unwrap();
                assert!(rel_diff(&r, &set.affine) < 1e-11);
            }
        }
    }

    #[test]
    fn suite_passes() {
        for (n, sites) in [(2, 2), (3, 2), (2, 3), (4, 2)] {
            let spec = ChainSpec::standard(params(n, sites));
            let r = verify_symmetry_suite(&spec, 2, 5, 1e-9).unwrap();
            assert!(r.pass, "{}", r.failures().map(|c| format!("{} {:.2e}\n", c.id, c.residual)).collect::<String>());
        }
    }
}
