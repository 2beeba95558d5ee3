//! Thermodynamic material data for the two bulk phases and the interface.
//!
//! A `MaterialModel` holds the free energies `ψ_i` and conductivities `d_i`
//! of both phases together with the surface tension `σ`, surface
//! conductivity `d_Γ` and (optional) kinetic undercooling `γ`, all as
//! closed-form coefficient functions on the temperature interval `(0, u_c)`.
//! Everything the analysis needs is derived from these:
//!
//! - bulk: `η_i = -ψ_i'`, `ε_i = ψ_i + u η_i`, `κ_i = -u ψ_i''`,
//!   `φ = ψ_2 - ψ_1`, latent heat `l = u φ'`;
//! - interface: `η_Γ = -σ'`, `ε_Γ = σ + u η_Γ`, `κ_Γ = -u σ''`,
//!   `l_Γ = u σ'`, `λ = φ/σ`, `ω_Γ = u σ λ'² / κ_Γ`.

mod family;

pub use family::{CoefficientFunction, FamilySpec, Jet3};

use crate::num::quad::{adaptive_simpson, QuadError};
use crate::num::roots::{bisect, scan_brackets, Bracket};

/// Absolute tolerance for locating the melting temperature.
pub const U_M_TOL: f64 = 1e-12;
/// Absolute tolerance of the f_Γ / h_Γ quadratures.
pub const SURFACE_QUAD_TOL: f64 = 1e-10;
/// Grid size used for bracketing the zero of φ.
const U_M_GRID: usize = 1024;

/// Errors from material evaluation and validation.
#[derive(Debug, Clone, thiserror::Error)]
pub enum MaterialError {
    #[error("malformed coefficient family: {0}")]
    BadFamily(String),
    #[error("temperature {u} outside the open interval (0, {u_c})")]
    OutOfDomain { u: f64, u_c: f64 },
    #[error("phi has no sign change on (0, u_c): no melting temperature")]
    PhiNoSignChange,
    #[error("phi changes sign {count} times on (0, u_c): melting temperature not unique")]
    PhiMultipleZeros { count: usize },
    #[error("quadrature failure: {0}")]
    Quadrature(#[from] QuadError),
}

/// All coefficient functions of a two-phase material with variable surface
/// tension. `gamma == None` means kinetic undercooling is identically zero.
#[derive(Debug, Clone)]
pub struct MaterialModel {
    pub psi: [CoefficientFunction; 2],
    pub d: [CoefficientFunction; 2],
    pub sigma: CoefficientFunction,
    pub d_gamma: CoefficientFunction,
    pub gamma: Option<CoefficientFunction>,
    pub u_c: f64,
    u_m: Result<f64, UmIssue>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum UmIssue {
    NoSignChange,
    Multiple(usize),
}

/// Quantities derived from the model at a fixed temperature `u`.
#[derive(Debug, Clone, Copy)]
pub struct DerivedQuantities {
    pub u: f64,
    /// Internal energies `ε_i = ψ_i - u ψ_i'` per phase.
    pub eps: [f64; 2],
    /// Entropies `η_i = -ψ_i'`.
    pub eta: [f64; 2],
    /// Heat capacities `κ_i = -u ψ_i''`.
    pub kappa: [f64; 2],
    /// Bulk conductivities `d_i`.
    pub d: [f64; 2],
    /// Free-energy jump `φ = ψ_2 - ψ_1` and its first two derivatives.
    pub phi: f64,
    pub phi_p: f64,
    pub phi_pp: f64,
    /// Latent heat `l = u φ'`.
    pub latent: f64,
    /// Surface tension and derivatives.
    pub sigma: f64,
    pub sigma_p: f64,
    pub sigma_pp: f64,
    /// `λ = φ/σ` with first and second derivatives.
    pub lambda: f64,
    pub lambda_p: f64,
    pub lambda_pp: f64,
    /// Surface entropy `η_Γ = -σ'`.
    pub eta_gamma: f64,
    /// Surface internal energy `ε_Γ = σ + u η_Γ`.
    pub eps_gamma: f64,
    /// Surface heat capacity `κ_Γ = -u σ''`.
    pub kappa_gamma: f64,
    /// Surface conductivity `d_Γ` and its derivative.
    pub d_gamma: f64,
    pub d_gamma_p: f64,
    /// Surface latent heat `l_Γ = u σ'`.
    pub l_gamma: f64,
    /// `ω_Γ = u σ λ'² / κ_Γ` (IEEE semantics if `κ_Γ = 0`).
    pub omega_gamma: f64,
    /// Kinetic undercooling value `γ(u)` (0 for `γ ≡ 0`).
    pub gamma: f64,
}

/// One violated invariant found by `validate`.
#[derive(Debug, Clone)]
pub struct Violation {
    pub invariant: &'static str,
    pub u: f64,
    pub value: f64,
}

/// Outcome of `MaterialModel::validate`.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub phi_zero: Result<f64, MaterialError>,
    pub samples: usize,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.phi_zero.is_ok()
    }
}

impl MaterialModel {
    /// Assembles a model and locates the melting temperature (unique zero of
    /// φ) by sign-change bracketing on a 1024-point grid plus bisection.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        psi1: CoefficientFunction,
        psi2: CoefficientFunction,
        d1: CoefficientFunction,
        d2: CoefficientFunction,
        sigma: CoefficientFunction,
        d_gamma: CoefficientFunction,
        gamma: Option<CoefficientFunction>,
        u_c: f64,
    ) -> Self {
        let mut model = MaterialModel {
            psi: [psi1, psi2],
            d: [d1, d2],
            sigma,
            d_gamma,
            gamma,
            u_c,
            u_m: Err(UmIssue::NoSignChange),
        };
        model.u_m = model.locate_u_m();
        model
    }

    fn locate_u_m(&self) -> Result<f64, UmIssue> {
        let phi = |u: f64| self.psi[1].eval(u) - self.psi[0].eval(u);
        let grid: Vec<f64> = (1..=U_M_GRID)
            .map(|i| self.u_c * i as f64 / (U_M_GRID as f64 + 1.0))
            .collect();
        let brackets: Vec<Bracket> = scan_brackets(phi, &grid);
        match brackets.len() {
            0 => Err(UmIssue::NoSignChange),
            1 => Ok(bisect(phi, brackets[0], U_M_TOL)),
            k => Err(UmIssue::Multiple(k)),
        }
    }

    /// Melting temperature: the unique zero of `φ` on `(0, u_c)`.
    pub fn u_m(&self) -> Result<f64, MaterialError> {
        match self.u_m {
            Ok(v) => Ok(v),
            Err(UmIssue::NoSignChange) => Err(MaterialError::PhiNoSignChange),
            Err(UmIssue::Multiple(count)) => Err(MaterialError::PhiMultipleZeros { count }),
        }
    }

    /// Checks all model invariants on a dense grid of `samples` interior
    /// temperatures and reports every violation with its sample point.
    pub fn validate(&self, samples: usize) -> ValidationReport {
        let n = samples.max(8);
        let mut violations = Vec::new();
        let mut push = |invariant: &'static str, u: f64, value: f64| {
            violations.push(Violation { invariant, u, value });
        };
        for i in 1..=n {
            let u = self.u_c * i as f64 / (n as f64 + 1.0);
            for (phase, psi) in self.psi.iter().enumerate() {
                let kappa = -u * psi.jet(u)[2];
                if !(kappa > 0.0) {
                    push(if phase == 0 { "kappa1 > 0" } else { "kappa2 > 0" }, u, kappa);
                }
            }
            for (phase, d) in self.d.iter().enumerate() {
                let v = d.eval(u);
                if !(v > 0.0) {
                    push(if phase == 0 { "d1 > 0" } else { "d2 > 0" }, u, v);
                }
            }
            let sj = self.sigma.jet(u);
            if !(sj[0] > 0.0) {
                push("sigma > 0", u, sj[0]);
            }
            let kappa_gamma = -u * sj[2];
            if !(kappa_gamma > 0.0) {
                push("kappa_gamma > 0", u, kappa_gamma);
            }
            let dg = self.d_gamma.eval(u);
            if !(dg > 0.0) {
                push("d_gamma > 0", u, dg);
            }
            if let Some(g) = &self.gamma {
                let v = g.eval(u);
                if !(v > 0.0) {
                    push("gamma > 0 (or gamma identically 0)", u, v);
                }
            }
        }
        if let Ok(um) = self.u_m() {
            let s = self.sigma.eval(um);
            if !(s > 0.0) {
                push("sigma(u_m) > 0", um, s);
            }
        }
        ValidationReport {
            violations,
            phi_zero: self.u_m(),
            samples: n,
        }
    }

    fn check_domain(&self, u: f64) -> Result<(), MaterialError> {
        if u > 0.0 && u < self.u_c && u.is_finite() {
            Ok(())
        } else {
            Err(MaterialError::OutOfDomain { u, u_c: self.u_c })
        }
    }

    /// Evaluates every derived quantity at `u ∈ (0, u_c)`.
    pub fn derived(&self, u: f64) -> Result<DerivedQuantities, MaterialError> {
        self.check_domain(u)?;
        Ok(self.derived_unchecked(u))
    }

    /// As `derived`, without the domain check (hot path for the solvers).
    pub fn derived_unchecked(&self, u: f64) -> DerivedQuantities {
        let p1 = self.psi[0].jet(u);
        let p2 = self.psi[1].jet(u);
        let sj = self.sigma.jet(u);
        let dgj = self.d_gamma.jet(u);
        let (phi, phi_p, phi_pp) = (p2[0] - p1[0], p2[1] - p1[1], p2[2] - p1[2]);
        let (sigma, sigma_p, sigma_pp) = (sj[0], sj[1], sj[2]);
        let lambda = phi / sigma;
        let lambda_p = (phi_p * sigma - phi * sigma_p) / (sigma * sigma);
        let lambda_pp = phi_pp / sigma - phi * sigma_pp / (sigma * sigma)
            - 2.0 * sigma_p * (phi_p * sigma - phi * sigma_p) / (sigma * sigma * sigma);
        let kappa_gamma = -u * sigma_pp;
        let eta_gamma = -sigma_p;
        DerivedQuantities {
            u,
            eps: [p1[0] - u * p1[1], p2[0] - u * p2[1]],
            eta: [-p1[1], -p2[1]],
            kappa: [-u * p1[2], -u * p2[2]],
            d: [self.d[0].eval(u), self.d[1].eval(u)],
            phi,
            phi_p,
            phi_pp,
            latent: u * phi_p,
            sigma,
            sigma_p,
            sigma_pp,
            lambda,
            lambda_p,
            lambda_pp,
            eta_gamma,
            eps_gamma: sigma + u * eta_gamma,
            kappa_gamma,
            d_gamma: dgj[0],
            d_gamma_p: dgj[1],
            l_gamma: u * sigma_p,
            omega_gamma: u * sigma * lambda_p * lambda_p / kappa_gamma,
            gamma: self.gamma.as_ref().map_or(0.0, |g| g.eval(u)),
        }
    }

    /// `f_Γ(s) = ∫_{u_m}^{s} λ(τ) (d_Γ/κ_Γ)'(τ) dτ`, vanishing at `u_m`.
    pub fn f_gamma(&self, s: f64) -> Result<f64, MaterialError> {
        self.check_domain(s)?;
        let um = self.u_m()?;
        let integrand = |t: f64| {
            let q = self.derived_unchecked(t);
            // (d_Γ/κ_Γ)' with κ_Γ = -t σ'' and κ_Γ' = -σ'' - t σ'''.
            let sj = self.sigma.jet(t);
            let kappa_g = -t * sj[2];
            let kappa_g_p = -sj[2] - t * sj[3];
            q.lambda * (q.d_gamma_p * kappa_g - q.d_gamma * kappa_g_p) / (kappa_g * kappa_g)
        };
        Ok(adaptive_simpson(integrand, um, s, SURFACE_QUAD_TOL)?)
    }

    /// `h_Γ(s) = ∫_{u_m}^{s} (d_Γ λ' / κ_Γ)(τ) dτ`, vanishing at `u_m`.
    pub fn h_gamma(&self, s: f64) -> Result<f64, MaterialError> {
        self.check_domain(s)?;
        let um = self.u_m()?;
        let integrand = |t: f64| {
            let q = self.derived_unchecked(t);
            q.d_gamma * q.lambda_p / q.kappa_gamma
        };
        Ok(adaptive_simpson(integrand, um, s, SURFACE_QUAD_TOL)?)
    }
}
