//! Height-function geometry kernels over a reference sphere.
//!
//! A nearby interface is written as `Γ_ρ = { p + ρ(p) ν_Σ(p) : p ∈ Σ }` over
//! the reference sphere Σ of radius `R_Σ`. With the Weingarten map
//! `L_Σ = -∇_Σ ν_Σ` (so `L_Σ = -(1/R_Σ) I` on the tangent space for the
//! outward normal) the kernels are
//!
//! - `M₀(ρ) = (I - ρ L_Σ)⁻¹`, scalar `1/(1 + ρ/R_Σ)` on the sphere;
//! - `α(ρ) = M₀(ρ) ∇_Σ ρ`, `β(ρ) = (1 + |α|²)^{-1/2}`;
//! - `ν_Γ(ρ) = β(ρ)(ν_Σ - α(ρ))`;
//! - `H(ρ) = β { tr[M₀(L_Σ + ∇_Σ α)] - β² (M₀ α | [∇_Σ α] α) }`, which on
//!   the sphere reduces to
//!   `β m₀ [ -(n-1)/R_Σ + div_Σ α ] - β³ m₀ (α · ∇_Σ |α|²) / 2`;
//! - `H'(0) = tr L_Σ² + Δ_Σ = (n-1)/R_Σ² + Δ_Σ`.
//!
//! The sign convention is `H = -div_Γ ν`: a sphere of radius `R` has
//! `H = -(n-1)/R`, so positive height inflates the sphere and lowers `|H|`.

mod grid;

use serde::Serialize;

pub use grid::SphereGrid;

/// Admissible-height gates: `|ρ|_∞ <= R_Σ/4`, `|∇_Σ ρ|_∞ <= 1/8`.
pub const RHO_SUP_FRACTION: f64 = 0.25;
pub const GRAD_SUP_LIMIT: f64 = 0.125;

/// Errors from the geometry kernels.
#[derive(Debug, Clone, thiserror::Error)]
pub enum HanzawaError {
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("height field outside the tubular gates: |rho|_inf = {rho_sup}, |grad rho|_inf = {grad_sup} (limits {rho_limit}, 0.125)")]
    GateViolation { rho_sup: f64, grad_sup: f64, rho_limit: f64 },
}

/// Normal field data of the perturbed surface.
#[derive(Debug, Clone)]
pub struct NormalField {
    /// Unit normal per grid point (x, y, z; z unused for n = 2).
    pub nu: Vec<[f64; 3]>,
    pub beta: Vec<f64>,
    /// Tangent-frame components of α.
    pub alpha_theta: Vec<f64>,
    pub alpha_phi: Vec<f64>,
}

fn check_gates(grid: &SphereGrid, rho: &[f64]) -> Result<(Vec<f64>, Vec<f64>), HanzawaError> {
    let rho_sup = rho.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (gt, gp) = grid.surface_gradient(rho);
    let grad_sup = gt
        .iter()
        .zip(&gp)
        .fold(0.0f64, |m, (a, b)| m.max((a * a + b * b).sqrt()));
    let rho_limit = RHO_SUP_FRACTION * grid.radius;
    if rho_sup > rho_limit || grad_sup > GRAD_SUP_LIMIT {
        return Err(HanzawaError::GateViolation { rho_sup, grad_sup, rho_limit });
    }
    Ok((gt, gp))
}

/// `ν_Γ(ρ) = β(ν_Σ - α)` with `α = M₀ ∇_Σ ρ`, `β = (1+|α|²)^{-1/2}`.
pub fn normal_and_beta(grid: &SphereGrid, rho: &[f64]) -> Result<NormalField, HanzawaError> {
    let (gt, gp) = check_gates(grid, rho)?;
    let npts = rho.len();
    let mut nu = vec![[0.0; 3]; npts];
    let mut beta = vec![0.0; npts];
    let mut at = vec![0.0; npts];
    let mut ap = vec![0.0; npts];
    for i in 0..grid.n_theta {
        for j in 0..grid.n_phi {
            let k = grid.idx(i, j);
            let m0 = 1.0 / (1.0 + rho[k] / grid.radius);
            let a_t = m0 * gt[k];
            let a_p = m0 * gp[k];
            let b = 1.0 / (1.0 + a_t * a_t + a_p * a_p).sqrt();
            at[k] = a_t;
            ap[k] = a_p;
            beta[k] = b;
            let theta = grid.theta[i];
            if grid.n == 2 {
                let (nu_x, nu_y) = (theta.cos(), theta.sin());
                let (et_x, et_y) = (-theta.sin(), theta.cos());
                nu[k] = [b * (nu_x - a_t * et_x), b * (nu_y - a_t * et_y), 0.0];
            } else {
                let phi = j as f64 * grid.h_phi;
                let (st, ct) = (theta.sin(), theta.cos());
                let (sp, cp) = (phi.sin(), phi.cos());
                let nu_s = [st * cp, st * sp, ct];
                let e_t = [ct * cp, ct * sp, -st];
                let e_p = [-sp, cp, 0.0];
                nu[k] = [
                    b * (nu_s[0] - a_t * e_t[0] - a_p * e_p[0]),
                    b * (nu_s[1] - a_t * e_t[1] - a_p * e_p[1]),
                    b * (nu_s[2] - a_t * e_t[2] - a_p * e_p[2]),
                ];
            }
        }
    }
    Ok(NormalField { nu, beta, alpha_theta: at, alpha_phi: ap })
}

/// Mean curvature `H(ρ)` of the perturbed surface on the grid.
pub fn mean_curvature(grid: &SphereGrid, rho: &[f64]) -> Result<Vec<f64>, HanzawaError> {
    let field = normal_and_beta(grid, rho)?;
    let div_alpha = grid.surface_divergence(&field.alpha_theta, &field.alpha_phi);
    // |α|² and its surface gradient for the quadratic correction term.
    let alpha_sq: Vec<f64> = field
        .alpha_theta
        .iter()
        .zip(&field.alpha_phi)
        .map(|(a, b)| a * a + b * b)
        .collect();
    let (gt, gp) = grid.surface_gradient(&alpha_sq);
    let tr_l = -(grid.n as f64 - 1.0) / grid.radius;
    let mut h = vec![0.0; rho.len()];
    for k in 0..rho.len() {
        let m0 = 1.0 / (1.0 + rho[k] / grid.radius);
        let b = field.beta[k];
        let adot = field.alpha_theta[k] * gt[k] + field.alpha_phi[k] * gp[k];
        h[k] = b * m0 * (tr_l + div_alpha[k]) - 0.5 * b * b * b * m0 * adot;
    }
    Ok(h)
}

/// `H'(0) ρ = ((n-1)/R_Σ² + Δ_Σ) ρ` through the grid Laplace–Beltrami.
pub fn linearized_curvature(grid: &SphereGrid, rho_dir: &[f64]) -> Vec<f64> {
    let lap = grid.laplace_beltrami(rho_dir);
    let c = (grid.n as f64 - 1.0) / (grid.radius * grid.radius);
    rho_dir.iter().zip(lap).map(|(r, l)| c * r + l).collect()
}

/// Height field of a sphere of the same radius displaced by `delta` along
/// the polar axis (n = 3) / the x-axis (n = 2):
/// `ρ(θ) = δ cosθ + sqrt(R² - δ² sin²θ) - R`.
pub fn shifted_sphere_height(grid: &SphereGrid, delta: f64) -> Vec<f64> {
    let r = grid.radius;
    let mut rho = vec![0.0; grid.len()];
    for i in 0..grid.n_theta {
        let t = grid.theta[i];
        let val = delta * t.cos() + (r * r - delta * delta * t.sin() * t.sin()).sqrt() - r;
        for j in 0..grid.n_phi {
            rho[grid.idx(i, j)] = val;
        }
    }
    rho
}

/// Exact outward normal of the shifted sphere at the surface point above
/// grid point `k`.
pub fn shifted_sphere_normal(grid: &SphereGrid, delta: f64, rho: &[f64], k: usize) -> [f64; 3] {
    let (i, j) = (k / grid.n_phi, k % grid.n_phi);
    let t = grid.theta[i];
    let r = grid.radius + rho[k];
    let (x, y, z);
    if grid.n == 2 {
        x = r * t.cos() - delta;
        y = r * t.sin();
        z = 0.0;
    } else {
        let p = j as f64 * grid.h_phi;
        x = r * t.sin() * p.cos();
        y = r * t.sin() * p.sin();
        z = r * t.cos() - delta;
    }
    let norm = (x * x + y * y + z * z).sqrt();
    [x / norm, y / norm, z / norm]
}

/// One check of the verification battery.
#[derive(Debug, Clone, Serialize)]
pub struct BatteryCheck {
    pub name: String,
    pub observed: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Convergence rate across the two grid levels, when measured.
    pub rate: Option<f64>,
}

/// Result of the full geometry-kernel verification battery.
#[derive(Debug, Clone, Serialize)]
pub struct BatteryReport {
    pub n: usize,
    pub radius: f64,
    pub n_theta: usize,
    pub n_phi: usize,
    pub checks: Vec<BatteryCheck>,
}

impl BatteryReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn make_grid(n: usize, radius: f64, n_theta: usize, n_phi: usize) -> Result<SphereGrid, HanzawaError> {
    if n == 2 {
        SphereGrid::circle(radius, n_theta)
    } else {
        SphereGrid::sphere(radius, n_theta, n_phi)
    }
}

/// Zonal (degree-l Legendre) harmonic sampled on the grid; for n = 2 the
/// Fourier mode `cos(lθ)`.
pub fn zonal_harmonic(grid: &SphereGrid, l: usize) -> Vec<f64> {
    let mut f = vec![0.0; grid.len()];
    for i in 0..grid.n_theta {
        let v = if grid.n == 2 {
            (l as f64 * grid.theta[i]).cos()
        } else {
            legendre(l, grid.theta[i].cos())
        };
        for j in 0..grid.n_phi {
            f[grid.idx(i, j)] = v;
        }
    }
    f
}

fn legendre(l: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return 1.0;
    }
    for k in 1..l {
        let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Runs the whole closed-form verification battery at `(n_theta, n_phi)` and
/// half resolution, reporting observed errors and convergence rates.
pub fn verification_battery(
    n: usize,
    radius: f64,
    n_theta: usize,
    n_phi: usize,
) -> Result<BatteryReport, HanzawaError> {
    let grid = make_grid(n, radius, n_theta, n_phi)?;
    let coarse = make_grid(n, radius, n_theta / 2, (n_phi / 2).max(8))?;
    let nm1 = n as f64 - 1.0;
    let mut checks = Vec::new();

    // Reference sphere: H(0) = -(n-1)/R exactly.
    let h0 = mean_curvature(&grid, &vec![0.0; grid.len()])?;
    let err = max_abs(h0.iter().map(|v| v + nm1 / radius));
    checks.push(BatteryCheck {
        name: "reference_sphere_curvature".into(),
        observed: err,
        threshold: 1e-13,
        pass: err <= 1e-13,
        rate: None,
    });

    // Concentric sphere: H(c) = -(n-1)/(R+c), exact up to round-off because
    // all angular derivatives vanish.
    let c = 0.2 * radius;
    let hc = mean_curvature(&grid, &vec![c; grid.len()])?;
    let err = max_abs(hc.iter().map(|v| v + nm1 / (radius + c)));
    checks.push(BatteryCheck {
        name: "concentric_sphere_curvature".into(),
        observed: err,
        threshold: 1e-12,
        pass: err <= 1e-12,
        rate: None,
    });

    // Shifted sphere: H constant despite a nonconstant height field, with a
    // grid convergence rate of at least 2.
    let delta = radius / 16.0;
    let err_at = |g: &SphereGrid| -> Result<f64, HanzawaError> {
        let rho = shifted_sphere_height(g, delta);
        let h = mean_curvature(g, &rho)?;
        Ok(max_abs(h.iter().map(|v| v + nm1 / radius)))
    };
    let fine_err = err_at(&grid)?;
    let coarse_err = err_at(&coarse)?;
    let rate = (coarse_err / fine_err).log2();
    checks.push(BatteryCheck {
        name: "shifted_sphere_curvature_constant".into(),
        observed: fine_err,
        threshold: 1e-5 * nm1 / radius,
        pass: fine_err <= 1e-5 * nm1 / radius && rate >= 2.0,
        rate: Some(rate),
    });

    // Shifted sphere normals against the exact closed form.
    let rho = shifted_sphere_height(&grid, delta);
    let nf = normal_and_beta(&grid, &rho)?;
    let mut nerr = 0.0f64;
    let mut unit_err = 0.0f64;
    for k in 0..grid.len() {
        let exact = shifted_sphere_normal(&grid, delta, &rho, k);
        let got = nf.nu[k];
        for c in 0..3 {
            nerr = nerr.max((got[c] - exact[c]).abs());
        }
        let norm = (got[0] * got[0] + got[1] * got[1] + got[2] * got[2]).sqrt();
        unit_err = unit_err.max((norm - 1.0).abs());
    }
    checks.push(BatteryCheck {
        name: "shifted_sphere_normal".into(),
        observed: nerr,
        threshold: 1e-5,
        pass: nerr <= 1e-5,
        rate: None,
    });
    checks.push(BatteryCheck {
        name: "unit_normal_pointwise".into(),
        observed: unit_err,
        threshold: 1e-12,
        pass: unit_err <= 1e-12,
        rate: None,
    });

    // Linearized curvature on harmonics: eigenvalue ((n-1) - l(l+n-2))/R².
    let mut worst_eig = 0.0f64;
    for l in 0..=6usize {
        let y = zonal_harmonic(&grid, l);
        let hy = linearized_curvature(&grid, &y);
        let expect = (nm1 - (l * (l + n - 2)) as f64) / (radius * radius);
        // Compare where the harmonic is not tiny to keep this a relative
        // eigenvalue check.
        let mut err = 0.0f64;
        for k in 0..grid.len() {
            if y[k].abs() > 0.3 {
                err = err.max((hy[k] - expect * y[k]).abs() / y[k].abs());
            }
        }
        worst_eig = worst_eig.max(err / (1.0 + expect.abs()));
    }
    checks.push(BatteryCheck {
        name: "linearized_curvature_harmonic_eigenvalues".into(),
        observed: worst_eig,
        threshold: 1e-4,
        pass: worst_eig <= 1e-4,
        rate: None,
    });

    // Constant direction: H'(0)·1 = (n-1)/R², the derivative of the
    // concentric-sphere curvature at c = 0.
    let ones = vec![1.0; grid.len()];
    let lin = linearized_curvature(&grid, &ones);
    let err = max_abs(lin.iter().map(|v| v - nm1 / (radius * radius)));
    checks.push(BatteryCheck {
        name: "linearized_curvature_constant_direction".into(),
        observed: err,
        threshold: 1e-11,
        pass: err <= 1e-11,
        rate: None,
    });

    // Finite-difference linearization: ||(H(ερ) - H(0))/ε - H'(0)ρ||_∞
    // decays linearly in ε.
    let dir = zonal_harmonic(&grid, 3);
    let lin = linearized_curvature(&grid, &dir);
    let h_base = mean_curvature(&grid, &vec![0.0; grid.len()])?;
    let fd_gap = |eps: f64| -> Result<f64, HanzawaError> {
        let rho: Vec<f64> = dir.iter().map(|v| eps * v).collect();
        let h = mean_curvature(&grid, &rho)?;
        Ok(max_abs(
            (0..grid.len()).map(|k| (h[k] - h_base[k]) / eps - lin[k]),
        ))
    };
    let lin_scale = max_abs(lin.iter().copied()).max(1e-300);
    let (e1, e2) = (0.04 * radius, 0.004 * radius);
    let g1 = fd_gap(e1)? / lin_scale;
    let g2 = fd_gap(e2)? / lin_scale;
    let rate = (g1 / g2).log10();
    checks.push(BatteryCheck {
        name: "fd_linearization_linear_in_eps".into(),
        observed: g2,
        threshold: 0.01,
        pass: g2 <= 0.01 && rate >= 0.85,
        rate: Some(rate),
    });

    Ok(BatteryReport { n, radius, n_theta, n_phi, checks })
}

#[cfg(test)]
mod tests;
