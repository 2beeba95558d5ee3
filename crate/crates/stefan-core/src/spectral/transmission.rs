//! Radial transmission solves behind the per-mode Dirichlet-to-Neumann value.
//!
//! For spherical-harmonic degree `l` and spectral parameter `λ`, the profile
//! `w(r)` solves
//!
//! `κ λ w - d (w'' + (n-1) w'/r) + d l(l+n-2) w / r² = 0`
//!
//! on `(0, R*)` and `(R*, R_Ω)` with `w ~ r^l` at the origin, `w(R*) = 1`
//! from both sides and `∂_r w(R_Ω) = 0`. The inner region is solved in the
//! substituted variable `ŵ = w / r^l`, which turns the mode term into a
//! radial Laplacian in effective dimension `2l + n` and removes the
//! coordinate singularity (`ŵ'(0) = 0`).
//!
//! The conservative finite-volume assembly makes the discrete energy
//! identity
//!
//! `D_{λ,l} R*^{n-1} = λ ∫ κ w² r^{n-1} dr + ∫ d (w'² + l(l+n-2) w²/r²) r^{n-1} dr`
//!
//! hold to solver round-off when the right side is quadratured with the
//! scheme's own volumes and face fluxes; the quadratures are exposed on the
//! solution for exactly that check.

use crate::num::mesh::graded_nodes;
use crate::num::tridiag::Tridiag;

use super::{RadialGeometry, SpectralError};

/// Discretization parameters of the radial solves.
#[derive(Debug, Clone, Copy)]
pub struct Resolution {
    pub cells_per_phase: usize,
    /// Two-sided tanh clustering strength of the graded meshes.
    pub grading: f64,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution { cells_per_phase: 2000, grading: 6.0 }
    }
}

impl Resolution {
    pub fn with_cells(cells_per_phase: usize) -> Self {
        Resolution { cells_per_phase, ..Default::default() }
    }

    pub fn halved(&self) -> Self {
        Resolution { cells_per_phase: (self.cells_per_phase / 2).max(8), grading: self.grading }
    }
}

/// Solution of one transmission problem, with the scheme-consistent
/// quadratures entering the energy identity.
#[derive(Debug, Clone)]
pub struct TransmissionSolution {
    pub l: usize,
    pub lambda: f64,
    /// `d₁ ∂_r w` at `R*⁻`.
    pub inner_flux: f64,
    /// `d₂ ∂_r w` at `R*⁺`.
    pub outer_flux: f64,
    /// `∫ κ w² r^{n-1} dr` over both phases.
    pub mass: f64,
    /// `∫ d (w'² + l(l+n-2) w²/r²) r^{n-1} dr` over both phases.
    pub dirichlet_energy: f64,
    /// Interface area factor `R*^{n-1}`.
    pub area_factor: f64,
    /// Inner profile `(r, w)`, already mapped back from `ŵ`.
    pub inner: Vec<(f64, f64)>,
    /// Outer profile `(r, w)`.
    pub outer: Vec<(f64, f64)>,
}

impl TransmissionSolution {
    /// `D_{λ,l} = -(d₂ ∂_r w|₊ - d₁ ∂_r w|₋)`.
    pub fn dtn_value(&self) -> f64 {
        self.inner_flux - self.outer_flux
    }

    /// Relative gap of the per-mode energy identity (Lemma-style check).
    pub fn identity_gap(&self) -> f64 {
        let lhs = self.dtn_value() * self.area_factor;
        let rhs = self.lambda * self.mass + self.dirichlet_energy;
        (lhs - rhs).abs() / (1.0 + lhs.abs())
    }
}

/// Frozen per-phase coefficients seen by the solver.
#[derive(Debug, Clone, Copy)]
pub struct BulkCoefficients {
    pub kappa: [f64; 2],
    pub d: [f64; 2],
}

struct RegionAssembly {
    nodes: Vec<f64>,
    /// Conductance `d A_f / h` per face.
    cond: Vec<f64>,
    /// `κ V_i` per node (mass weight).
    mass_w: Vec<f64>,
    /// `d μ̃ ∫ r^{n-3}` per node (curvature-energy weight, outer region only).
    curv_w: Vec<f64>,
}

/// Pre-assembled operator for one mode `l`; `solve(λ)` then costs one
/// tridiagonal solve. The stiffness part is λ-independent, so scans over λ
/// reuse the assembly.
pub struct ModeOperator {
    pub n: usize,
    pub l: usize,
    geom: RadialGeometry,
    coeffs: BulkCoefficients,
    inner: RegionAssembly,
    outer: RegionAssembly,
    /// Half-cell `κ V` weight at the interface nodes (inner, outer).
    iface_mass: [f64; 2],
    /// Half-cell curvature weight at the outer interface node.
    iface_curv: f64,
    /// `ŵ(R*) = R*^{-l}`.
    w_hat_iface: f64,
}

impl ModeOperator {
    pub fn new(
        geom: &RadialGeometry,
        coeffs: BulkCoefficients,
        l: usize,
        res: Resolution,
    ) -> Result<Self, SpectralError> {
        geom.check()?;
        let n = geom.n;
        let neff = (2 * l + n) as i32;
        let cells = res.cells_per_phase.max(8);

        // Inner region in ŵ with weight r^{neff-1}.
        let nodes_in = graded_nodes(0.0, geom.r_star, cells, res.grading);
        let inner = assemble_region(&nodes_in, coeffs.d[0], coeffs.kappa[0], neff, 0.0);

        // Outer region in w with weight r^{n-1} and the mode term
        // d μ̃ w / r² as a zeroth-order weight ∫ r^{n-3}.
        let mu_tilde = (l * (l + n - 2)) as f64;
        let nodes_out = graded_nodes(geom.r_star, geom.r_omega, cells, res.grading);
        let outer =
            assemble_region(&nodes_out, coeffs.d[1], coeffs.kappa[1], n as i32, coeffs.d[1] * mu_tilde);

        // Interface half cells: inner node N owns [f_{N-1}, R*], outer node 0
        // owns [R*, f_0].
        let f_last = 0.5 * (nodes_in[cells - 1] + nodes_in[cells]);
        let iface_mass_in = coeffs.kappa[0] * shell_volume(f_last, geom.r_star, neff);
        let f_first = 0.5 * (nodes_out[0] + nodes_out[1]);
        let iface_mass_out = coeffs.kappa[1] * shell_volume(geom.r_star, f_first, n as i32);
        let iface_curv =
            coeffs.d[1] * mu_tilde * shell_volume_pow(geom.r_star, f_first, n as i32 - 3);

        Ok(ModeOperator {
            n,
            l,
            geom: *geom,
            coeffs,
            inner,
            outer,
            iface_mass: [iface_mass_in, iface_mass_out],
            iface_curv,
            w_hat_iface: geom.r_star.powi(-(l as i32)),
        })
    }

    /// Solves the transmission problem at spectral parameter `lambda`
    /// (negative values admitted for resolvent continuation).
    ///
    /// Both regions are solved for the deviation from the interface value
    /// (`v = ŵ - ŵ(R*)` inside, `v = w - 1` outside), so the O(λ) fluxes at
    /// small λ are not lost to cancellation against the O(1) background.
    pub fn solve(&self, lambda: f64) -> Result<TransmissionSolution, SpectralError> {
        let l = self.l;
        let n = self.n;
        let r_star = self.geom.r_star;
        let nin = self.inner.nodes.len() - 1;
        let solve =
            |a: &Tridiag, rhs: &[f64]| -> Result<Vec<f64>, crate::num::tridiag::SingularError> {
                // λ >= 0 gives an SPD M-matrix where unpivoted elimination is
                // componentwise clean; the indefinite continuation needs
                // pivoting.
                if lambda >= 0.0 {
                    a.solve_unpivoted(rhs)
                } else {
                    a.solve(rhs)
                }
            };

        // ---- inner solve: v[i] = ŵ[i] - ŵ(R*), v[nin] = 0 ----
        let mut a = Tridiag::zeros(nin);
        let mut rhs = vec![0.0; nin];
        for i in 0..nin {
            let mut diag = lambda * self.inner.mass_w[i] + self.inner.curv_w[i];
            if i > 0 {
                diag += self.inner.cond[i - 1];
                a.lower[i] = -self.inner.cond[i - 1];
            }
            diag += self.inner.cond[i];
            if i + 1 < nin {
                a.upper[i] = -self.inner.cond[i];
            }
            a.diag[i] = diag;
            rhs[i] = -lambda * self.inner.mass_w[i] * self.w_hat_iface;
        }
        let mut v_in = solve(&a, &rhs).map_err(|e| SpectralError::Solver {
            l,
            lambda,
            detail: e.to_string(),
        })?;
        v_in.push(0.0);
        let w_hat: Vec<f64> = v_in.iter().map(|v| v + self.w_hat_iface).collect();

        // Discrete interface flux of the transformed variable, corrected by
        // the Dirichlet node's half-cell mass so it is second order at R*.
        let cond_last = self.inner.cond[nin - 1];
        let trans_flux =
            -cond_last * v_in[nin - 1] + lambda * self.iface_mass[0] * self.w_hat_iface;
        // Physical flux d₁ ∂_r w(R*⁻) for w = r^l ŵ with w(R*) = 1.
        let neff = (2 * l + n) as i32;
        let inner_flux = self.coeffs.d[0] * l as f64 / r_star
            + trans_flux * r_star.powi(l as i32) / r_star.powi(neff - 1);

        // Scheme-consistent inner quadratures (physical form).
        let mut mass = 0.0;
        for i in 0..nin {
            mass += self.inner.mass_w[i] * w_hat[i] * w_hat[i];
        }
        mass += self.iface_mass[0] * self.w_hat_iface * self.w_hat_iface;
        let mut dirichlet = 0.0;
        for i in 0..nin {
            let dv = v_in[i + 1] - v_in[i];
            dirichlet += self.inner.cond[i] * dv * dv;
        }
        dirichlet += self.coeffs.d[0]
            * l as f64
            * r_star.powi(2 * l as i32 + n as i32 - 2)
            * self.w_hat_iface
            * self.w_hat_iface;

        // ---- outer solve: v[i] = w[i] - 1, v[0] = 0 ----
        let nout = self.outer.nodes.len() - 1;
        let mut a = Tridiag::zeros(nout);
        let mut rhs = vec![0.0; nout];
        for k in 0..nout {
            let i = k + 1; // node index
            let source = lambda * self.outer.mass_w[i] + self.outer.curv_w[i];
            let mut diag = source + self.outer.cond[i - 1];
            if k > 0 {
                a.lower[k] = -self.outer.cond[i - 1];
            }
            if i < nout {
                diag += self.outer.cond[i];
                a.upper[k] = -self.outer.cond[i];
            }
            a.diag[k] = diag;
            rhs[k] = -source;
        }
        let sol = solve(&a, &rhs).map_err(|e| SpectralError::Solver {
            l,
            lambda,
            detail: e.to_string(),
        })?;
        let mut v_out = Vec::with_capacity(nout + 1);
        v_out.push(0.0);
        v_out.extend(sol);
        let w_out: Vec<f64> = v_out.iter().map(|v| v + 1.0).collect();

        let iface_source = lambda * self.iface_mass[1] + self.iface_curv;
        let outer_flux_scaled = self.outer.cond[0] * v_out[1] - iface_source;
        let outer_flux = outer_flux_scaled / r_star.powi(n as i32 - 1);

        let mut mass_out = 0.0;
        let mut dir_out = 0.0;
        for (i, &w) in w_out.iter().enumerate() {
            let mw = if i == 0 { self.iface_mass[1] } else { self.outer.mass_w[i] };
            let cw = if i == 0 { self.iface_curv } else { self.outer.curv_w[i] };
            mass_out += mw * w * w;
            dir_out += cw * w * w;
        }
        for i in 0..nout {
            let dv = v_out[i + 1] - v_out[i];
            dir_out += self.outer.cond[i] * dv * dv;
        }

        let inner_profile: Vec<(f64, f64)> = self
            .inner
            .nodes
            .iter()
            .zip(&w_hat)
            .map(|(&r, &wh)| (r, wh * r.powi(l as i32)))
            .collect();
        let outer_profile: Vec<(f64, f64)> =
            self.outer.nodes.iter().zip(&w_out).map(|(&r, &w)| (r, w)).collect();

        Ok(TransmissionSolution {
            l,
            lambda,
            inner_flux,
            outer_flux,
            mass: mass + mass_out,
            dirichlet_energy: dirichlet + dir_out,
            area_factor: r_star.powi(n as i32 - 1),
            inner: inner_profile,
            outer: outer_profile,
        })
    }
}

fn shell_volume(a: f64, b: f64, pow: i32) -> f64 {
    (b.powi(pow) - a.powi(pow)) / pow as f64
}

/// `∫_a^b r^pow dr` for the curvature weight (handles the n = 2 logarithm).
fn shell_volume_pow(a: f64, b: f64, pow: i32) -> f64 {
    if pow == -1 {
        (b / a).ln()
    } else {
        (b.powi(pow + 1) - a.powi(pow + 1)) / (pow + 1) as f64
    }
}

fn assemble_region(
    nodes: &[f64],
    d: f64,
    kappa: f64,
    weight_pow: i32,
    curv_coeff: f64,
) -> RegionAssembly {
    let n_nodes = nodes.len();
    let faces: Vec<f64> = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let cond: Vec<f64> = faces
        .iter()
        .zip(nodes.windows(2))
        .map(|(&f, w)| d * f.powi(weight_pow - 1) / (w[1] - w[0]))
        .collect();
    let mut mass_w = vec![0.0; n_nodes];
    let mut curv_w = vec![0.0; n_nodes];
    for i in 0..n_nodes {
        let lo = if i == 0 { nodes[0] } else { faces[i - 1] };
        let hi = if i + 1 == n_nodes { nodes[n_nodes - 1] } else { faces[i] };
        if hi > lo {
            mass_w[i] = kappa * shell_volume(lo, hi, weight_pow);
            if curv_coeff != 0.0 {
                curv_w[i] = curv_coeff * shell_volume_pow(lo, hi, weight_pow - 3);
            }
        }
    }
    RegionAssembly { nodes: nodes.to_vec(), cond, mass_w, curv_w }
}

