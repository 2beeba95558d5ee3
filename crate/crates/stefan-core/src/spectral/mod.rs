//! Eigenvalue reduction of the linearization at a concentric sphere
//! equilibrium.
//!
//! For each spherical-harmonic degree `l` the linearized operator reduces to
//! the scalar function
//!
//! `B_{λ,l} = u* l*² λ T_{λ,l} + γ* λ + σ* a_l`,
//!
//! where `T_{λ,l} = 1 / (λ κ_Γ* + d_Γ* μ_l + D_{λ,l})`, `μ_l = l(l+n-2)/R*²`,
//! `a_l = (l(l+n-2) - (n-1))/R*²`, and `D_{λ,l}` is the Dirichlet-to-Neumann
//! value of the bulk transmission problem. `λ > 0` is an eigenvalue of `-L`
//! exactly when `B_{λ,l} = 0` for some mode, so positive eigenvalues are
//! found by sign-scanning `B` over a logarithmic λ grid and bisecting.

pub mod transmission;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{indicators, DomainSpec, EquilibriumError};
use crate::material::{MaterialError, MaterialModel};
use crate::num::roots::log_grid;
use crate::num::special::{ball_volume, harmonic_multiplicity, sphere_area};

pub use transmission::{BulkCoefficients, ModeOperator, Resolution, TransmissionSolution};

/// Relative bisection tolerance for eigenvalue roots.
const ROOT_REL_TOL: f64 = 1e-10;
/// Default number of λ scan points per mode.
const SCAN_POINTS: usize = 400;
/// Lower end of the λ scan grid.
const SCAN_LAMBDA_MIN: f64 = 1e-6;

/// Errors from the spectral module.
#[derive(Debug, Clone, thiserror::Error)]
pub enum SpectralError {
    #[error("invalid radial geometry: {0}")]
    Geometry(String),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error("transmission solve failed for l = {l}, lambda = {lambda}: {detail}")]
    Solver { l: usize, lambda: f64, detail: String },
    #[error("T_lambda is singular at l = 0, lambda = 0")]
    SingularTZero,
}

/// Concentric configuration: one sphere of radius `r_star` inside the ball
/// of radius `r_omega`, both centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGeometry {
    pub n: usize,
    pub r_star: f64,
    pub r_omega: f64,
}

impl RadialGeometry {
    pub fn check(&self) -> Result<(), SpectralError> {
        if self.n < 2 {
            return Err(SpectralError::Geometry(format!("n = {} must be >= 2", self.n)));
        }
        if !(self.r_star > 0.0 && self.r_star < self.r_omega) {
            return Err(SpectralError::Geometry(format!(
                "need 0 < R* < R_Omega, got R* = {}, R_Omega = {}",
                self.r_star, self.r_omega
            )));
        }
        Ok(())
    }

    /// The matching concentric domain spec for the equilibrium module.
    pub fn domain(&self) -> DomainSpec {
        DomainSpec::concentric(self.n, self.r_omega)
    }
}

/// All coefficient values frozen at the equilibrium temperature `u*`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FrozenCoefficients {
    pub u_star: f64,
    pub kappa: [f64; 2],
    pub d: [f64; 2],
    pub kappa_gamma: f64,
    pub d_gamma: f64,
    pub sigma: f64,
    pub gamma: f64,
    /// `l* = σ* λ'(u*)`.
    pub l_star: f64,
}

impl FrozenCoefficients {
    pub fn from_model(model: &MaterialModel, u_star: f64) -> Result<Self, MaterialError> {
        let q = model.derived(u_star)?;
        Ok(FrozenCoefficients {
            u_star,
            kappa: q.kappa,
            d: q.d,
            kappa_gamma: q.kappa_gamma,
            d_gamma: q.d_gamma,
            sigma: q.sigma,
            gamma: q.gamma,
            l_star: q.sigma * q.lambda_p,
        })
    }

    fn bulk(&self) -> BulkCoefficients {
        BulkCoefficients { kappa: self.kappa, d: self.d }
    }
}

/// One spherical-harmonic mode over the equilibrium sphere.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Mode {
    pub l: usize,
    pub multiplicity: usize,
    /// Laplace–Beltrami eigenvalue magnitude `l(l+n-2)/R*²`.
    pub mu: f64,
    /// Eigenvalue of `A* = -((n-1)/R*² + Δ*)`: `(l(l+n-2) - (n-1))/R*²`.
    pub a: f64,
}

impl Mode {
    pub fn new(n: usize, l: usize, r_star: f64) -> Self {
        let ll = (l * (l + n - 2)) as f64;
        let r2 = r_star * r_star;
        Mode {
            l,
            multiplicity: harmonic_multiplicity(n, l),
            mu: ll / r2,
            a: (ll - (n as f64 - 1.0)) / r2,
        }
    }
}

/// Convenience one-shot transmission solve (`ModeOperator` reuses assembly
/// when many λ are needed).
pub fn radial_transmission_solve(
    geom: &RadialGeometry,
    coeffs: &FrozenCoefficients,
    l: usize,
    lambda: f64,
    res: Resolution,
) -> Result<TransmissionSolution, SpectralError> {
    ModeOperator::new(geom, coeffs.bulk(), l, res)?.solve(lambda)
}

/// Per-mode Dirichlet-to-Neumann solve; `dtn_value()` on the result gives
/// `D_{λ,l}` and the quadratures feed the energy-identity check.
pub fn dtn(
    geom: &RadialGeometry,
    coeffs: &FrozenCoefficients,
    l: usize,
    lambda: f64,
    res: Resolution,
) -> Result<TransmissionSolution, SpectralError> {
    radial_transmission_solve(geom, coeffs, l, lambda, res)
}

fn t_of_solution(
    coeffs: &FrozenCoefficients,
    mode: &Mode,
    sol: &TransmissionSolution,
) -> Result<f64, SpectralError> {
    let denom = sol.lambda * coeffs.kappa_gamma + coeffs.d_gamma * mode.mu + sol.dtn_value();
    if denom == 0.0 {
        return Err(SpectralError::SingularTZero);
    }
    Ok(1.0 / denom)
}

/// `T_{λ,l} = 1 / (λ κ_Γ* + d_Γ* μ_l + D_{λ,l})`.
pub fn t_lambda(
    geom: &RadialGeometry,
    coeffs: &FrozenCoefficients,
    l: usize,
    lambda: f64,
    res: Resolution,
) -> Result<f64, SpectralError> {
    if lambda == 0.0 && l == 0 {
        return Err(SpectralError::SingularTZero);
    }
    let mode = Mode::new(geom.n, l, geom.r_star);
    let sol = radial_transmission_solve(geom, coeffs, l, lambda, res)?;
    t_of_solution(coeffs, &mode, &sol)
}

/// `B_{λ,l} = u* l*² λ T_{λ,l} + γ* λ + σ* a_l`.
pub fn b_lambda(
    geom: &RadialGeometry,
    coeffs: &FrozenCoefficients,
    l: usize,
    lambda: f64,
    res: Resolution,
) -> Result<f64, SpectralError> {
    let mode = Mode::new(geom.n, l, geom.r_star);
    let t = t_lambda(geom, coeffs, l, lambda, res)?;
    Ok(coeffs.u_star * coeffs.l_star * coeffs.l_star * lambda * t
        + coeffs.gamma * lambda
        + coeffs.sigma * mode.a)
}

/// Stability indicators (ζ*, η*) recomputed from the concentric geometry
/// (m = 1).
pub fn concentric_indicators(geom: &RadialGeometry, coeffs: &FrozenCoefficients) -> (f64, f64) {
    let n = geom.n as f64;
    let r2 = geom.r_star * geom.r_star;
    let area = sphere_area(geom.n, geom.r_star);
    let vol1 = ball_volume(geom.n, geom.r_star);
    let vol = ball_volume(geom.n, geom.r_omega);
    let kappa_bulk = coeffs.kappa[0] * vol1 + coeffs.kappa[1] * (vol - vol1);
    let denom = coeffs.u_star * coeffs.l_star * coeffs.l_star * r2;
    let eta = (n - 1.0) * coeffs.sigma * coeffs.kappa_gamma / denom;
    let zeta =
        (n - 1.0) * coeffs.sigma * (kappa_bulk + coeffs.kappa_gamma * area) / (denom * area);
    (zeta, eta)
}

/// `a0 = |Γ*| / [(κ*|1)_Ω + κ_Γ* |Γ*|]`, the λ→0 limit of `λ T_{λ,0}`.
pub fn a0_limit(geom: &RadialGeometry, coeffs: &FrozenCoefficients) -> f64 {
    let area = sphere_area(geom.n, geom.r_star);
    let vol1 = ball_volume(geom.n, geom.r_star);
    let vol = ball_volume(geom.n, geom.r_omega);
    let kappa_bulk = coeffs.kappa[0] * vol1 + coeffs.kappa[1] * (vol - vol1);
    area / (kappa_bulk + coeffs.kappa_gamma * area)
}

/// Options of the spectrum scan.
#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub l_max: usize,
    /// Upper end of the λ grid; `None` picks `1e4 d_Γ*/(κ_Γ* R*²)`.
    pub lambda_max: Option<f64>,
    pub scan_points: usize,
    pub resolution: Resolution,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            l_max: 8,
            lambda_max: None,
            scan_points: SCAN_POINTS,
            resolution: Resolution::default(),
        }
    }
}

impl ScanOptions {
    pub fn lambda_max_for(&self, geom: &RadialGeometry, coeffs: &FrozenCoefficients) -> f64 {
        self.lambda_max.unwrap_or_else(|| {
            1e4 * coeffs.d_gamma / (coeffs.kappa_gamma * geom.r_star * geom.r_star)
        })
    }
}

/// A located positive eigenvalue of `-L`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EigenvalueHit {
    pub lambda: f64,
    pub l: usize,
    pub multiplicity: usize,
}

/// Outcome of the positive-spectrum enumeration at one equilibrium.
#[derive(Debug, Clone, Serialize)]
pub struct EigenReport {
    /// Roots in increasing λ order (all real by construction: the search is
    /// scalar bisection on real B values).
    pub positive: Vec<EigenvalueHit>,
    /// Total count including harmonic multiplicities.
    pub total_positive: usize,
    /// Kernel dimension at λ = 0 (translations plus the scalar pair).
    pub kernel_dim: usize,
    /// Number of degree-one translation modes (n for m = 1).
    pub kernel_translations: usize,
    /// Whether the one-dimensional (v, ρ) kernel pair exists (`l* ≠ 0`).
    pub kernel_pair: bool,
    /// Prediction from the stability indicators; `None` when degenerate.
    pub predicted: Option<usize>,
    /// `total_positive == predicted` (when a prediction exists).
    pub matches_prediction: Option<bool>,
    /// Modes `l >= 1` whose `B_{λ,l}` stayed strictly positive on the grid.
    pub strictly_positive_modes: Vec<usize>,
    /// Set when a root lies in the last grid interval, suggesting a larger
    /// `lambda_max`.
    pub inconclusive_near_lambda_max: bool,
    pub zeta_star: f64,
    pub eta_star: f64,
    pub lambda_max: f64,
}

/// Scans `B_{λ,l}` for all `l <= l_max` over a logarithmic grid in
/// `(0, λ_max]`, bisects every sign change to relative tolerance `1e-10`,
/// and assembles the eigenvalue report with the kernel count at λ = 0.
pub fn find_spectrum(
    geom: &RadialGeometry,
    coeffs: &FrozenCoefficients,
    opts: ScanOptions,
) -> Result<EigenReport, SpectralError> {
    geom.check()?;
    let lambda_max = opts.lambda_max_for(geom, coeffs);
    let grid = log_grid(SCAN_LAMBDA_MIN, lambda_max, opts.scan_points.max(16));
    let (zeta, eta) = concentric_indicators(geom, coeffs);

    let per_mode: Vec<(usize, Vec<f64>, ModeOperator)> = (0..=opts.l_max)
        .into_par_iter()
        .map(|l| -> Result<_, SpectralError> {
            let op = ModeOperator::new(geom, coeffs.bulk(), l, opts.resolution)?;
            let mode = Mode::new(geom.n, l, geom.r_star);
            let mut values = Vec::with_capacity(grid.len());
            for &lambda in &grid {
                let sol = op.solve(lambda)?;
                let t = t_of_solution(coeffs, &mode, &sol)?;
                values.push(
                    coeffs.u_star * coeffs.l_star * coeffs.l_star * lambda * t
                        + coeffs.gamma * lambda
                        + coeffs.sigma * mode.a,
                );
            }
            Ok((l, values, op))
        })
        .collect::<Result<_, _>>()?;

    let mut hits: Vec<EigenvalueHit> = Vec::new();
    let mut strictly_positive_modes = Vec::new();
    let mut inconclusive = false;
    for (l, values, op) in &per_mode {
        let mode = Mode::new(geom.n, *l, geom.r_star);
        let b_at = |lambda: f64| -> Result<f64, SpectralError> {
            let sol = op.solve(lambda)?;
            let t = t_of_solution(coeffs, &mode, &sol)?;
            Ok(coeffs.u_star * coeffs.l_star * coeffs.l_star * lambda * t
                + coeffs.gamma * lambda
                + coeffs.sigma * mode.a)
        };
        for i in 0..grid.len() - 1 {
            if values[i] == 0.0 {
                continue; // exact grid hit is caught by the neighbor interval
            }
            if values[i].signum() != values[i + 1].signum() {
                let (mut a, mut b) = (grid[i], grid[i + 1]);
                let mut fa = values[i];
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if (b - a) <= ROOT_REL_TOL * mid {
                        break;
                    }
                    let fm = b_at(mid)?;
                    if fm == 0.0 {
                        a = mid;
                        b = mid;
                        break;
                    }
                    if fm.signum() == fa.signum() {
                        a = mid;
                        fa = fm;
                    } else {
                        b = mid;
                    }
                }
                let root = 0.5 * (a + b);
                if i + 2 == grid.len() {
                    inconclusive = true;
                }
                hits.push(EigenvalueHit { lambda: root, l: *l, multiplicity: mode.multiplicity });
            }
        }
        if *l >= 1 && values.iter().all(|&v| v > 0.0) {
            strictly_positive_modes.push(*l);
        }
    }
    hits.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let total_positive: usize = hits.iter().map(|h| h.multiplicity).sum();

    // Kernel at λ = 0: a_1 = 0 makes every degree-one harmonic neutral
    // (n translations for m = 1), and for l* ≠ 0 the constant pair
    // (σ*(n-1)/R*², -l*) direction solves the stationary Gibbs-Thomson
    // relation, adding one dimension.
    let kernel_translations = harmonic_multiplicity(geom.n, 1);
    let kernel_pair = coeffs.l_star != 0.0;
    let kernel_dim = kernel_translations + usize::from(kernel_pair);

    let gamma_zero = coeffs.gamma == 0.0;
    let degenerate = (zeta - 1.0).abs() <= 1e-9 || (gamma_zero && (eta - 1.0).abs() <= 1e-9);
    let predicted = if degenerate {
        None
    } else if gamma_zero && eta > 1.0 {
        Some(0)
    } else if zeta > 1.0 {
        Some(1)
    } else {
        Some(0)
    };
    let matches_prediction = predicted.map(|p| p == total_positive);

    Ok(EigenReport {
        positive: hits,
        total_positive,
        kernel_dim,
        kernel_translations,
        kernel_pair,
        predicted,
        matches_prediction,
        strictly_positive_modes,
        inconclusive_near_lambda_max: inconclusive,
        zeta_star: zeta,
        eta_star: eta,
        lambda_max,
    })
}

/// Signed principal rate of the radial (l = 0) sector: the root of `B_{μ,0}`
/// nearest zero, searched on both sides of 0. Positive means growth of the
/// radial perturbation, negative means decay. `None` if no root was found
/// inside the pole-free window.
pub fn principal_radial_rate(
    geom: &RadialGeometry,
    coeffs: &FrozenCoefficients,
    opts: ScanOptions,
) -> Result<Option<f64>, SpectralError> {
    let report = find_spectrum(geom, coeffs, ScanOptions { l_max: 0, ..opts })?;
    if let Some(hit) = report.positive.first() {
        return Ok(Some(hit.lambda));
    }
    // Stable side: continue B to μ < 0, stopping at the first sign of a pole
    // of T (denominator sign change or blow-up) or of the bulk resolvent.
    let op = ModeOperator::new(geom, coeffs.bulk(), 0, opts.resolution)?;
    let mode = Mode::new(geom.n, 0, geom.r_star);
    let lambda_max = opts.lambda_max_for(geom, coeffs);
    let grid = log_grid(SCAN_LAMBDA_MIN, lambda_max, opts.scan_points.max(16));
    let b_of = |mu: f64| -> Option<(f64, f64)> {
        let sol = op.solve(mu).ok()?;
        let denom = mu * coeffs.kappa_gamma + sol.dtn_value();
        let b = coeffs.u_star * coeffs.l_star * coeffs.l_star * mu / denom
            + coeffs.gamma * mu
            + coeffs.sigma * mode.a;
        b.is_finite().then_some((b, denom))
    };
    let b_scale = coeffs.sigma * (geom.n as f64 - 1.0) / (geom.r_star * geom.r_star);
    let mut prev: Option<(f64, f64)> = None;
    let mut denom_prev: Option<f64> = None;
    for &mag in &grid {
        let mu = -mag;
        let Some((b, denom)) = b_of(mu) else { break };
        if let Some(dp) = denom_prev {
            if dp.signum() != denom.signum() {
                break; // pole of T crossed
            }
        }
        denom_prev = Some(denom);
        if b.abs() > 1e8 * b_scale.abs() {
            break;
        }
        if let Some((mu_prev, b_prev)) = prev {
            if b_prev.signum() != b.signum() {
                let (mut a, mut c) = (mu, mu_prev);
                let mut fa = b;
                for _ in 0..200 {
                    if (c - a).abs() <= ROOT_REL_TOL * a.abs() {
                        break;
                    }
                    let mid = 0.5 * (a + c);
                    let Some((fm, _)) = b_of(mid) else { break };
                    if fm == 0.0 {
                        a = mid;
                        c = mid;
                        break;
                    }
                    if fm.signum() == fa.signum() {
                        a = mid;
                        fa = fm;
                    } else {
                        c = mid;
                    }
                }
                return Ok(Some(0.5 * (a + c)));
            }
        }
        prev = Some((mu, b));
    }
    Ok(None)
}

/// Closed-form mean-mode (B₀ limit) analysis for `m >= 1` equal spheres.
#[derive(Debug, Clone, Serialize)]
pub struct MeanModeReport {
    pub m: usize,
    pub zeta_star: f64,
    pub eta_star: f64,
    /// `u* l*² |Γ*| / [(κ*|1)_Ω + κ_Γ* |Γ*|] - (n-1) σ*/R*²` (multiplicity 1).
    pub zeta_mode_eigenvalue: f64,
    /// `-(n-1) σ*/R*²`, carried by the zero-sum constants (multiplicity m-1).
    pub zero_sum_eigenvalue: f64,
    pub zero_sum_multiplicity: usize,
    /// Instability count implied by the linearized theory.
    pub implied_unstable: Option<usize>,
}

/// Evaluates the λ→0 limit eigenvalues of `B₀` for `m` equal spheres and the
/// implied instability count; no bulk solve is performed for `m >= 2`.
pub fn multi_sphere_mean_mode(
    model: &MaterialModel,
    domain: &DomainSpec,
    u_star: f64,
    m: usize,
) -> Result<MeanModeReport, SpectralError> {
    let point = indicators(model, domain, u_star, m)?;
    let q = model.derived(u_star)?;
    let n = domain.n as f64;
    let area = point.interface_area;
    let vol1 = point.disperse_volume;
    let kappa_bulk = q.kappa[0] * vol1 + q.kappa[1] * (domain.omega_volume - vol1);
    let l_star = point.l_star;
    let zeta_mode = u_star * l_star * l_star * area / (kappa_bulk + q.kappa_gamma * area)
        - (n - 1.0) * q.sigma / (point.r_star * point.r_star);
    Ok(MeanModeReport {
        m,
        zeta_star: point.zeta_star,
        eta_star: point.eta_star,
        zeta_mode_eigenvalue: zeta_mode,
        zero_sum_eigenvalue: -(n - 1.0) * q.sigma / (point.r_star * point.r_star),
        zero_sum_multiplicity: m - 1,
        implied_unstable: point.predicted_positive_eigenvalues,
    })
}

/// Numerical verification of the two T_λ limits from the linearized theory.
#[derive(Debug, Clone, Serialize)]
pub struct LimitChecks {
    pub a0_expected: f64,
    pub a0_extrapolated: f64,
    pub a0_rel_error: f64,
    pub kappa_inv_expected: f64,
    pub kappa_inv_extrapolated: f64,
    pub kappa_inv_rel_error: f64,
}

/// Extrapolates `λ T_{λ,0}` to λ→0 (expected `a0`) and to λ→∞ (expected
/// `1/κ_Γ*`).
pub fn limit_checks(
    geom: &RadialGeometry,
    coeffs: &FrozenCoefficients,
    res: Resolution,
) -> Result<LimitChecks, SpectralError> {
    let op = ModeOperator::new(geom, coeffs.bulk(), 0, res)?;
    let mode = Mode::new(geom.n, 0, geom.r_star);
    let lam_t = |lambda: f64| -> Result<f64, SpectralError> {
        let sol = op.solve(lambda)?;
        Ok(lambda * t_of_solution(coeffs, &mode, &sol)?)
    };

    // λ→0: λT_{λ,0} is smooth in λ; Neville extrapolation from the decade
    // ladder 1e-4, 1e-5, 1e-6.
    let mut pts = Vec::new();
    for k in 4..=6 {
        let lam = 10f64.powi(-k);
        pts.push((lam, lam_t(lam)?));
    }
    let a0_extrap = neville_at_zero(&pts);
    let a0 = a0_limit(geom, coeffs);

    // λ→∞: correction is O(λ^{-1/2}); extrapolate in x = λ^{-1/2}.
    let mut pts = Vec::new();
    for lam in [1e5f64, 4e5, 1.6e6] {
        pts.push((lam.sqrt().recip(), lam_t(lam)?));
    }
    let kinv_extrap = neville_at_zero(&pts);
    let kinv = coeffs.kappa_gamma.recip();

    Ok(LimitChecks {
        a0_expected: a0,
        a0_extrapolated: a0_extrap,
        a0_rel_error: (a0_extrap - a0).abs() / a0.abs(),
        kappa_inv_expected: kinv,
        kappa_inv_extrapolated: kinv_extrap,
        kappa_inv_rel_error: (kinv_extrap - kinv).abs() / kinv.abs(),
    })
}

/// Neville polynomial extrapolation of `(x_i, v_i)` to `x = 0`.
fn neville_at_zero(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len();
    let mut v: Vec<f64> = pts.iter().map(|p| p.1).collect();
    for stage in 1..n {
        for i in 0..n - stage {
            let (xi, xj) = (pts[i].0, pts[i + stage].0);
            v[i] = (xj * v[i] - xi * v[i + 1]) / (xj - xi);
        }
    }
    v[0]
}
