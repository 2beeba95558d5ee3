//! Sphere equilibria of the Stefan problem with variable surface tension.
//!
//! An equilibrium at temperature `u` consists of `m` disjoint spheres of the
//! radius `R(u) = (n-1) σ(u) / φ(u)` inside Ω. This module evaluates the
//! equilibrium energy curve `E_e(u) = δ(u) - u δ'(u)` with
//! `δ(u) = |Ω| ψ₂(u) + c_{n,m} σ(u)ⁿ / φ(u)^{n-1}`, its closed-form
//! derivative, and the stability/well-posedness indicators
//!
//! - `l* = σ λ'(u)`,
//! - `ζ* = (n-1) σ [(κ|1)_Ω + κ_Γ |Γ|] / (u l*² R² |Γ|)`,
//! - `η* = (n-1) σ κ_Γ / (u l*² R²)`,
//!
//! together with the positive-eigenvalue count the linearized theory
//! predicts from them.

use serde::{Deserialize, Serialize};

use crate::material::{MaterialError, MaterialModel};
use crate::num::roots::{bisect, scan_brackets};
use crate::num::special::{ball_volume, sphere_area, unit_sphere_area};

/// Number of scan samples used by `solve_for_energy`.
const ENERGY_SCAN_GRID: usize = 2048;
/// Bisection tolerance for energy roots (absolute, in temperature units).
const ENERGY_ROOT_TOL: f64 = 1e-12;
/// Indicators within this distance of their degenerate value are reported as
/// degenerate rather than classified.
const DEGENERACY_REL_TOL: f64 = 1e-9;

/// Errors from equilibrium evaluation.
#[derive(Debug, Clone, thiserror::Error)]
pub enum EquilibriumError {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error("phi({u}) = 0: equilibrium radius has a pole at the melting temperature")]
    PhiPole { u: f64 },
    #[error("sigma/phi <= 0 at u = {u}: no equilibrium radius")]
    NoEquilibrium { u: f64 },
    #[error("degenerate indicator ({which} = 1) at u = {u}: excluded from classification")]
    Degenerate { which: &'static str, u: f64 },
}

/// The fixed container Ω seen by the equilibrium analysis.
///
/// `r_m` is the largest radius such that Ω still contains `m` disjoint balls;
/// it is supplied by the caller (packing radii are not computed). For the
/// built-in concentric geometry `r_m = R_Ω` and `|Ω|` is the ball volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub n: usize,
    pub omega_volume: f64,
    pub r_m: f64,
}

impl DomainSpec {
    /// Ball of radius `r_omega` in `R^n` with one concentric equilibrium
    /// sphere allowed anywhere inside it.
    pub fn concentric(n: usize, r_omega: f64) -> Self {
        DomainSpec { n, omega_volume: ball_volume(n, r_omega), r_m: r_omega }
    }
}

/// An equilibrium point with its derived stability indicators.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    pub u_star: f64,
    pub m: usize,
    pub r_star: f64,
    /// `l* = σ(u*) λ'(u*)`.
    pub l_star: f64,
    pub zeta_star: f64,
    pub eta_star: f64,
    pub gamma_star: f64,
    /// `l* ≠ 0` (first well-posedness flag).
    pub well_posed_l: bool,
    /// For `γ ≡ 0`: `η* ≠ 1`; trivially true when undercooling is present.
    pub well_posed_eta: bool,
    /// Count of positive eigenvalues of -L predicted by the linearized
    /// theory; `None` when an indicator is degenerate.
    pub predicted_positive_eigenvalues: Option<usize>,
    /// `|Γ*| = m ω_n R*^{n-1}`.
    pub interface_area: f64,
    /// `|Ω₁| = m ω_n R*^n / n`.
    pub disperse_volume: f64,
    pub feasible: bool,
}

impl EquilibriumPoint {
    pub fn well_posed(&self) -> bool {
        self.well_posed_l && self.well_posed_eta
    }
}

/// `R(u) = (n-1) σ(u) / φ(u)`; errors on the φ pole and on σ/φ ≤ 0.
pub fn equilibrium_radius(model: &MaterialModel, n: usize, u: f64) -> Result<f64, EquilibriumError> {
    let q = model.derived(u)?;
    if q.phi == 0.0 {
        return Err(EquilibriumError::PhiPole { u });
    }
    let ratio = q.sigma / q.phi;
    if ratio <= 0.0 {
        return Err(EquilibriumError::NoEquilibrium { u });
    }
    Ok((n as f64 - 1.0) * ratio)
}

/// `δ(u)` and its derivative, both in closed form from the family jets.
fn delta_and_derivative(
    model: &MaterialModel,
    domain: &DomainSpec,
    u: f64,
    m: usize,
) -> Result<(f64, f64), EquilibriumError> {
    let q = model.derived(u)?;
    let n = domain.n as f64;
    let c_nm = m as f64 * unit_sphere_area(domain.n) * (n - 1.0).powi(domain.n as i32 - 1) / n;
    let psi2 = model.psi[1].jet(u);
    let ratio = q.sigma / q.phi;
    // d/du [σ^n / φ^{n-1}] = (σ/φ)^{n-1} [n σ' - (n-1) σ φ'/φ]
    let surf = q.sigma.powi(domain.n as i32) / q.phi.powi(domain.n as i32 - 1);
    let surf_p =
        ratio.powi(domain.n as i32 - 1) * (n * q.sigma_p - (n - 1.0) * q.sigma * q.phi_p / q.phi);
    Ok((
        domain.omega_volume * psi2[0] + c_nm * surf,
        domain.omega_volume * psi2[1] + c_nm * surf_p,
    ))
}

/// Equilibrium energy `E_e(u) = δ(u) - u δ'(u)`.
pub fn equilibrium_energy(
    model: &MaterialModel,
    domain: &DomainSpec,
    u: f64,
    m: usize,
) -> Result<f64, EquilibriumError> {
    equilibrium_radius(model, domain.n, u)?;
    let (delta, delta_p) = delta_and_derivative(model, domain, u, m)?;
    Ok(delta - u * delta_p)
}

/// Closed-form `E_e'(u) = [(κ|1)_Ω + |Γ| κ_Γ] - (R²|Γ|/((n-1)σ)) · u · l*(u)²`
/// with `l*(u) = [[ψ'(u)]] + σ'(u) H(Γ)` and `H(Γ) = -(n-1)/R(u)`.
pub fn equilibrium_energy_derivative(
    model: &MaterialModel,
    domain: &DomainSpec,
    u: f64,
    m: usize,
) -> Result<f64, EquilibriumError> {
    let q = model.derived(u)?;
    let n = domain.n as f64;
    let r = equilibrium_radius(model, domain.n, u)?;
    let area = m as f64 * sphere_area(domain.n, r);
    let vol1 = m as f64 * ball_volume(domain.n, r);
    let kappa_bulk = q.kappa[0] * vol1 + q.kappa[1] * (domain.omega_volume - vol1);
    let h = -(n - 1.0) / r;
    let l_of_u = q.phi_p + q.sigma_p * h;
    Ok(kappa_bulk + area * q.kappa_gamma
        - (r * r * area / ((n - 1.0) * q.sigma)) * u * l_of_u * l_of_u)
}

/// Fills every indicator of the equilibrium at `(u, m)`.
pub fn indicators(
    model: &MaterialModel,
    domain: &DomainSpec,
    u: f64,
    m: usize,
) -> Result<EquilibriumPoint, EquilibriumError> {
    let q = model.derived(u)?;
    let n = domain.n as f64;
    let r = equilibrium_radius(model, domain.n, u)?;
    let feasible = r < domain.r_m && m as f64 * ball_volume(domain.n, r) < domain.omega_volume;
    let area = m as f64 * sphere_area(domain.n, r);
    let vol1 = m as f64 * ball_volume(domain.n, r);
    let kappa_bulk = q.kappa[0] * vol1 + q.kappa[1] * (domain.omega_volume - vol1);
    let l_star = q.sigma * q.lambda_p;
    let denom = u * l_star * l_star * r * r;
    let eta_star = (n - 1.0) * q.sigma * q.kappa_gamma / denom;
    let zeta_star = (n - 1.0) * q.sigma * (kappa_bulk + q.kappa_gamma * area) / (denom * area);
    let gamma_zero = model.gamma.is_none();
    let well_posed_l = l_star != 0.0;
    let well_posed_eta = !gamma_zero || (eta_star - 1.0).abs() > DEGENERACY_REL_TOL;

    let zeta_degenerate = (zeta_star - 1.0).abs() <= DEGENERACY_REL_TOL;
    let predicted = if zeta_degenerate || (gamma_zero && !well_posed_eta) {
        None
    } else if gamma_zero && eta_star > 1.0 {
        Some(0)
    } else if zeta_star > 1.0 {
        Some(m)
    } else {
        Some(m - 1)
    };

    Ok(EquilibriumPoint {
        u_star: u,
        m,
        r_star: r,
        l_star,
        zeta_star,
        eta_star,
        gamma_star: q.gamma,
        well_posed_l,
        well_posed_eta,
        predicted_positive_eigenvalues: predicted,
        interface_area: area,
        disperse_volume: vol1,
        feasible,
    })
}

/// All solutions of `E_e(u) = e0` on the feasible window, located by a sign
/// scan on a 2048-point grid plus bisection, classified via `indicators`.
///
/// An empty feasible window or no crossing yields an empty list, not an
/// error.
pub fn solve_for_energy(
    model: &MaterialModel,
    domain: &DomainSpec,
    e0: f64,
    m: usize,
) -> Result<Vec<EquilibriumPoint>, EquilibriumError> {
    let g = |u: f64| -> f64 {
        match indicators(model, domain, u, m) {
            Ok(p) if p.feasible => match equilibrium_energy(model, domain, u, m) {
                Ok(e) => e - e0,
                Err(_) => f64::NAN,
            },
            _ => f64::NAN,
        }
    };
    let samples: Vec<f64> = (1..=ENERGY_SCAN_GRID)
        .map(|i| model.u_c * i as f64 / (ENERGY_SCAN_GRID as f64 + 1.0))
        .collect();
    let mut out = Vec::new();
    for bracket in scan_brackets(g, &samples) {
        let root = bisect(g, bracket, ENERGY_ROOT_TOL);
        out.push(indicators(model, domain, root, m)?);
    }
    Ok(out)
}

/// One row of the bifurcation diagram CSV.
#[derive(Debug, Clone, Serialize)]
pub struct CurveRow {
    pub u: f64,
    pub r: f64,
    pub e_e: f64,
    pub e_e_prime: f64,
    pub zeta: f64,
    pub eta: f64,
    pub l_star: f64,
    pub feasible: bool,
    pub predicted_unstable: Option<usize>,
}

/// Samples the equilibrium branch over `(0, u_c)`; temperatures where no
/// equilibrium exists are skipped.
pub fn bifurcation_curve(
    model: &MaterialModel,
    domain: &DomainSpec,
    m: usize,
    samples: usize,
) -> Vec<CurveRow> {
    let n = samples.max(16);
    let mut rows = Vec::new();
    for i in 1..=n {
        let u = model.u_c * i as f64 / (n as f64 + 1.0);
        let Ok(point) = indicators(model, domain, u, m) else { continue };
        let Ok(e) = equilibrium_energy(model, domain, u, m) else { continue };
        let Ok(ep) = equilibrium_energy_derivative(model, domain, u, m) else { continue };
        rows.push(CurveRow {
            u,
            r: point.r_star,
            e_e: e,
            e_e_prime: ep,
            zeta: point.zeta_star,
            eta: point.eta_star,
            l_star: point.l_star,
            feasible: point.feasible,
            predicted_unstable: point.predicted_positive_eigenvalues,
        });
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::CoefficientFunction;

    /// φ = 1 - u - u ln u (zero at 1), σ = 0.2 (1 - u²/4) on u_c = 2.
    fn model(kappa: f64, gamma: Option<f64>) -> MaterialModel {
        MaterialModel::new(
            CoefficientFunction::ULogU(0.0, 0.0, -kappa),
            CoefficientFunction::ULogU(1.0, -1.0, -kappa),
            CoefficientFunction::Constant(0.2),
            CoefficientFunction::Constant(0.2),
            CoefficientFunction::SigmaConcave { sigma0: 0.2, p: 2.0, u_c: 2.0 },
            CoefficientFunction::Constant(0.05),
            gamma.map(CoefficientFunction::Constant),
            2.0,
        )
    }

    fn domain() -> DomainSpec {
        DomainSpec::concentric(3, 1.5)
    }

    #[test]
    fn radius_defining_identity_exact() {
        let m = model(0.5, None);
        for i in 1..=50 {
            let u = 0.2 + 0.6 * i as f64 / 51.0;
            let q = m.derived(u).unwrap();
            let r = equilibrium_radius(&m, 3, u).unwrap();
            assert!((r * q.phi - 2.0 * q.sigma).abs() <= 1e-14 * (1.0 + q.sigma.abs()));
        }
    }

    #[test]
    fn radius_pole_at_melting_temperature() {
        let m = model(0.5, None);
        let um = m.u_m().unwrap();
        match equilibrium_radius(&m, 3, um) {
            Err(EquilibriumError::PhiPole { .. }) => {}
            // u_m is located to 1e-12; φ may not vanish to the last bit.
            Ok(r) => assert!(r.abs() > 1e8, "radius should blow up near u_m, got {r}"),
            Err(e) => panic!("unexpected error {e:?}"),
        }
    }

    #[test]
    fn radius_rejects_negative_ratio() {
        let m = model(0.5, None);
        // Above u_m, φ < 0 while σ > 0.
        assert!(matches!(
            equilibrium_radius(&m, 3, 1.5),
            Err(EquilibriumError::NoEquilibrium { .. })
        ));
    }

    #[test]
    fn energy_matches_term_by_term_assembly() {
        // Independent oracle: E_e = ε₂|Ω| - |Ω₁| [[ε]] + ε_Γ |Γ|.
        let m = model(0.5, None);
        let d = domain();
        for &u in &[0.35, 0.5, 0.65, 0.8] {
            for &mm in &[1usize, 2] {
                let e = equilibrium_energy(&m, &d, u, mm).unwrap();
                let q = m.derived(u).unwrap();
                let r = equilibrium_radius(&m, 3, u).unwrap();
                let area = mm as f64 * sphere_area(3, r);
                let vol1 = mm as f64 * ball_volume(3, r);
                let oracle =
                    q.eps[1] * d.omega_volume - vol1 * (q.eps[1] - q.eps[0]) + q.eps_gamma * area;
                assert!(
                    (e - oracle).abs() < 1e-9 * (1.0 + oracle.abs()),
                    "u={u} m={mm}: {e} vs oracle {oracle}"
                );
            }
        }
    }

    #[test]
    fn doubling_m_doubles_surface_contribution() {
        let m = model(0.5, None);
        let d = domain();
        let u = 0.5;
        let q = m.derived(u).unwrap();
        let bulk = q.eps[1] * d.omega_volume;
        let e1 = equilibrium_energy(&m, &d, u, 1).unwrap();
        let e2 = equilibrium_energy(&m, &d, u, 2).unwrap();
        assert!(((e2 - bulk) - 2.0 * (e1 - bulk)).abs() < 1e-10 * (1.0 + e1.abs()));
    }

    #[test]
    fn unit_sphere_area_enters_interface_area() {
        let m = model(0.5, None);
        let d = domain();
        let p = indicators(&m, &d, 0.5, 1).unwrap();
        let expect = 4.0 * std::f64::consts::PI * p.r_star * p.r_star;
        assert!((p.interface_area - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn energy_derivative_identity_theorem_4_4_i() {
        let m = model(0.5, None);
        let d = domain();
        for i in 1..=20 {
            let u = 0.3 + 0.5 * i as f64 / 21.0;
            let p = indicators(&m, &d, u, 1).unwrap();
            let ep = equilibrium_energy_derivative(&m, &d, u, 1).unwrap();
            let rhs = (p.zeta_star - 1.0) * u * p.l_star * p.l_star * p.r_star * p.r_star
                * p.interface_area
                / (2.0 * m.derived(u).unwrap().sigma);
            assert!(
                (ep - rhs).abs() <= 1e-9 * (1.0 + ep.abs()),
                "u={u}: E' {ep} vs (zeta-1) form {rhs}"
            );
        }
    }

    #[test]
    fn energy_derivative_matches_finite_difference() {
        let m = model(0.5, None);
        let d = domain();
        for &u in &[0.35, 0.5, 0.7] {
            let h = 1e-6 * u;
            let ep = equilibrium_energy_derivative(&m, &d, u, 1).unwrap();
            let fd = (equilibrium_energy(&m, &d, u + h, 1).unwrap()
                - equilibrium_energy(&m, &d, u - h, 1).unwrap())
                / (2.0 * h);
            assert!(
                (ep - fd).abs() <= 1e-5 * (1.0 + ep.abs()),
                "u={u}: closed {ep} vs fd {fd}"
            );
        }
    }

    #[test]
    fn sign_of_energy_derivative_follows_zeta() {
        let m = model(0.5, None);
        let d = domain();
        for i in 1..=40 {
            let u = 0.25 + 0.6 * i as f64 / 41.0;
            let p = indicators(&m, &d, u, 1).unwrap();
            if (p.zeta_star - 1.0).abs() < 1e-6 {
                continue;
            }
            let ep = equilibrium_energy_derivative(&m, &d, u, 1).unwrap();
            assert_eq!(ep.signum(), (p.zeta_star - 1.0).signum(), "u = {u}");
        }
    }

    #[test]
    fn prediction_table_matches_linearized_theory() {
        let d = domain();
        // ζ* scales with the bulk heat capacity but also inversely with the
        // total interface area, so the m = 2 unstable case needs more κ.
        let unstable = model(1.0, Some(0.1));
        let stable = model(0.1, Some(0.1));
        let p = indicators(&unstable, &d, 0.5, 2).unwrap();
        assert!(p.zeta_star > 1.0);
        assert_eq!(p.predicted_positive_eigenvalues, Some(2));
        let p = indicators(&stable, &d, 0.5, 2).unwrap();
        assert!(p.zeta_star < 1.0);
        assert_eq!(p.predicted_positive_eigenvalues, Some(1));
        let p = indicators(&stable, &d, 0.5, 1).unwrap();
        assert_eq!(p.predicted_positive_eigenvalues, Some(0));
        // γ ≡ 0 with small η: counts follow ζ as well.
        let p = indicators(&model(0.5, None), &d, 0.5, 1).unwrap();
        assert!(p.eta_star < 1.0 && p.zeta_star > 1.0);
        assert_eq!(p.predicted_positive_eigenvalues, Some(1));
    }

    #[test]
    fn zeta_splits_into_eta_and_bulk_term() {
        let m = model(0.5, None);
        let d = domain();
        let u = 0.5;
        let p = indicators(&m, &d, u, 1).unwrap();
        let q = m.derived(u).unwrap();
        let vol1 = p.disperse_volume;
        let kappa_bulk = q.kappa[0] * vol1 + q.kappa[1] * (d.omega_volume - vol1);
        let bulk_only = 2.0 * q.sigma * kappa_bulk
            / (u * p.l_star * p.l_star * p.r_star * p.r_star * p.interface_area);
        assert!((p.zeta_star - p.eta_star - bulk_only).abs() < 1e-12 * (1.0 + p.zeta_star));
    }

    #[test]
    fn solve_for_energy_round_trip() {
        let m = model(0.5, None);
        let d = domain();
        let u0 = 0.55;
        let e0 = equilibrium_energy(&m, &d, u0, 1).unwrap();
        let roots = solve_for_energy(&m, &d, e0, 1).unwrap();
        assert!(
            roots.iter().any(|p| (p.u_star - u0).abs() < 1e-10),
            "roots: {:?}",
            roots.iter().map(|p| p.u_star).collect::<Vec<_>>()
        );
    }

    #[test]
    fn solve_for_energy_no_crossing_gives_empty_list() {
        let m = model(0.5, None);
        let d = domain();
        assert!(solve_for_energy(&m, &d, 1e9, 1).unwrap().is_empty());
    }

    #[test]
    fn energy_roots_classified_by_derivative_sign() {
        let m = model(0.5, None);
        let d = domain();
        let rows = bifurcation_curve(&m, &d, 1, 400);
        let feasible: Vec<_> = rows.iter().filter(|r| r.feasible).collect();
        assert!(feasible.len() > 20, "only {} feasible rows", feasible.len());
        let emin = feasible.iter().map(|r| r.e_e).fold(f64::INFINITY, f64::min);
        let emax = feasible.iter().map(|r| r.e_e).fold(f64::NEG_INFINITY, f64::max);
        let e0 = 0.5 * (emin + emax);
        let roots = solve_for_energy(&m, &d, e0, 1).unwrap();
        assert!(!roots.is_empty());
        for p in &roots {
            let h = 1e-6 * p.u_star;
            let fd = (equilibrium_energy(&m, &d, p.u_star + h, 1).unwrap()
                - equilibrium_energy(&m, &d, p.u_star - h, 1).unwrap())
                / (2.0 * h);
            if (p.zeta_star - 1.0).abs() > 1e-6 {
                assert_eq!(fd.signum(), (p.zeta_star - 1.0).signum(), "u* = {}", p.u_star);
            }
        }
    }
}
