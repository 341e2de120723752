//! Model parameters and the scalar functions derived from them.

use crate::error::{Error, Result};
use crate::tensor_core::{c, C64, I, ONE};
use serde::{Deserialize, Serialize};

/// Rank n, deformation μ (q = e^{iμ}), boundary parameters m and ζ, site count N.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub mu: C64,
    pub m: C64,
    pub zeta: C64,
    pub sites: usize,
}

/// Hecke-algebra constants for the unnormalised boundary generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeckeConstants {
    pub delta: C64,
    pub delta0: C64,
    pub kappa: C64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { n: 3, mu: c(0.41, 0.0), m: c(0.9, 0.2), zeta: c(0.6, 0.0), sites: 2 }
    }
}

impl ModelParams {
    pub fn new(n: usize, mu: C64, m: C64, zeta: C64, sites: usize) -> Result<Self> {
        let p = ModelParams { n, mu, m, zeta, sites };
        p.validate()?;
        Ok(p)
    }

    pub fn with_sites(&self, sites: usize) -> Self {
        ModelParams { sites, ..*self }
    }

    pub fn with_n(&self, n: usize) -> Self {
        ModelParams { n, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParams(format!("rank n = {} must be at least 2", self.n)));
        }
        if self.sites < 1 {
            return Err(Error::InvalidParams("site count N must be at least 1".into()));
        }
        for (name, v) in [("mu", self.mu), ("m", self.m), ("zeta", self.zeta)] {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} is not finite")));
            }
        }
        if self.sinh_imu().norm() <= 1e-8 {
            return Err(Error::InvalidParams(format!(
                "|sinh(i mu)| = {:.3e} must exceed 1e-8 (q = ±1 is excluded)",
                self.sinh_imu().norm()
            )));
        }
        for k in 1..=2 * self.n {
            let d = (self.q_pow(k as f64) - ONE).norm();
            if d <= 1e-6 {
                return Err(Error::InvalidParams(format!(
                    "|q^{k} - 1| = {d:.3e} must exceed 1e-6 (q near a root of unity)"
                )));
            }
        }
        Ok(())
    }

    /// Extra requirement for Hamiltonians: x(0) = cosh(iμm) − cosh(2iμζ) away from zero.
    pub fn validate_hamiltonian(&self) -> Result<()> {
        self.validate()?;
        let x0 = self.x0();
        if x0.norm() <= 1e-8 {
            return Err(Error::InvalidParams(format!(
                "|x(0)| = |cosh(i mu m) - cosh(2 i mu zeta)| = {:.3e} must exceed 1e-8",
                x0.norm()
            )));
        }
        Ok(())
    }

    /// q^x = e^{iμx}, principal branch through μ.
    pub fn q_pow(&self, x: f64) -> C64 {
        (I * self.mu * x).exp()
    }

    pub fn q(&self) -> C64 {
        self.q_pow(1.0)
    }

    /// Q = i e^{iμm}.
    pub fn big_q(&self) -> C64 {
        I * (I * self.mu * self.m).exp()
    }

    pub fn sinh_imu(&self) -> C64 {
        (I * self.mu).sinh()
    }

    /// w = 2 sinh(iμ) = q − q⁻¹.
    pub fn w(&self) -> C64 {
        self.sinh_imu() * 2.0
    }

    pub fn cosh_imum(&self) -> C64 {
        (I * self.mu * self.m).cosh()
    }

    pub fn cosh_2imuzeta(&self) -> C64 {
        (I * self.mu * self.zeta * 2.0).cosh()
    }

    pub fn exp_imum(&self) -> C64 {
        (I * self.mu * self.m).exp()
    }

    pub fn hecke_constants(&self) -> HeckeConstants {
        let q = self.q();
        let bq = self.big_q();
        HeckeConstants {
            delta: -(q + q.inv()),
            delta0: -(bq + bq.inv()),
            kappa: q * bq.inv() + q.inv() * bq,
        }
    }

    /// δ₀ in the normalisation of the boundary generator divided by 2i sinh(iμ).
    pub fn delta0_rescaled(&self) -> C64 {
        -(I * self.mu * self.m).sinh() / self.sinh_imu()
    }

    /// κ in the same normalisation.
    pub fn kappa_rescaled(&self) -> C64 {
        (I * self.mu * (self.m - 1.0)).sinh() / self.sinh_imu()
    }

    /// Scalar part x(λ) of the ansatz K = x I + y ρ(U₀).
    pub fn x_of(&self, lambda: C64) -> C64 {
        let d0 = self.delta0_rescaled();
        let k = self.kappa_rescaled();
        -d0 * (lambda * 2.0 + I * self.mu).cosh() - k * (lambda * 2.0).cosh() - self.cosh_2imuzeta()
    }

    /// Closed form x(λ) = cosh(2λ + iμm) − cosh(2iμζ).
    pub fn x_closed(&self, lambda: C64) -> C64 {
        (lambda * 2.0 + I * self.mu * self.m).cosh() - self.cosh_2imuzeta()
    }

    pub fn x0(&self) -> C64 {
        self.cosh_imum() - self.cosh_2imuzeta()
    }

    /// x′(0) = 2 sinh(iμm).
    pub fn x_prime0(&self) -> C64 {
        (I * self.mu * self.m).sinh() * 2.0
    }

    /// y(λ) = 2 sinh(2λ) sinh(iμ).
    pub fn y_of(&self, lambda: C64) -> C64 {
        (lambda * 2.0).sinh() * self.sinh_imu() * 2.0
    }

    /// y′(0) = 4 sinh(iμ).
    pub fn y_prime0(&self) -> C64 {
        self.sinh_imu() * 4.0
    }

    /// Boundary constant c₀ = −sinh(iμ(n−1))/sinh(iμn).
    pub fn c0(&self) -> C64 {
        let n = self.n as f64;
        -(I * self.mu * (n - 1.0)).sinh() / (I * self.mu * n).sinh()
    }

    /// Local space dims of the N-site quantum space.
    pub fn quantum_dims(&self) -> Vec<usize> {
        vec![self.n; self.sites]
    }

    /// Auxiliary space followed by the quantum spaces.
    pub fn chain_dims(&self) -> Vec<usize> {
        vec![self.n; self.sites + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> ModelParams {
        ModelParams::new(3, c(0.37, 0.05), c(0.8, 0.2), c(0.6, 0.1), 2).unwrap()
    }

    #[test]
    fn rejects_degenerate_mu() {
        let e = ModelParams::new(3, c(0.0, 0.0), c(0.9, 0.2), c(0.6, 0.0), 2).unwrap_err();
        assert!(e.to_string().contains("sinh(i mu)"));
        let e = ModelParams::new(2, c(std::f64::consts::PI / 2.0, 0.0), c(0.9, 0.2), c(0.6, 0.0), 2);
        assert!(e.unwrap_err().to_string().contains("root of unity"));
    }

    #[test]
    fn rejects_small_rank() {
        assert!(ModelParams::new(1, c(0.4, 0.0), c(0.9, 0.2), c(0.6, 0.0), 2).is_err());
    }

    #[test]
    fn rescaled_constants_match_raw() {
        let p = p();
        let h = p.hecke_constants();
        let s = I * p.sinh_imu() * 2.0;
        assert!((h.delta0 / s - p.delta0_rescaled()).norm() < 1e-14);
        assert!((h.kappa / s - p.kappa_rescaled()).norm() < 1e-14);
        let ratio = h.delta0 / h.kappa;
        assert!((ratio - p.delta0_rescaled() / p.kappa_rescaled()).norm() < 1e-13);
    }

    #[test]
    fn x_closed_form_agrees() {
        let p = p();
        for l in [c(0.0, 0.0), c(0.3, 0.1), c(-0.7, 0.4)] {
            assert!((p.x_of(l) - p.x_closed(l)).norm() < 1e-13);
        }
        assert!((p.x_of(c(0.0, 0.0)) - p.x0()).norm() < 1e-13);
    }

    #[test]
    fn x_prime_matches_central_difference() {
        let p = p();
        let h = 1e-4;
        let fd = (p.x_closed(c(h, 0.0)) - p.x_closed(c(-h, 0.0))) / (2.0 * h);
        let fd2 = (p.x_closed(c(h / 2.0, 0.0)) - p.x_closed(c(-h / 2.0, 0.0))) / h;
        let rich = (fd2 * 4.0 - fd) / 3.0;
        assert!((rich - p.x_prime0()).norm() < 1e-10);
    }

    #[test]
    fn c0_at_rank_two() {
        let p = p().with_n(2);
        let want = -(ONE / ((I * p.mu).cosh() * 2.0));
        assert!((p.c0() - want).norm() < 1e-14);
    }
}
