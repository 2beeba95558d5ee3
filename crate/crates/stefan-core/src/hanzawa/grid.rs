//! Structured angular grids over a reference circle (n = 2) or sphere
//! (n = 3) with fourth-order periodic/pole-reflected difference stencils.
//!
//! The n = 3 grid is cell-centered in colatitude, `θ_i = (i + 1/2) π / N_θ`,
//! so no node sits on a pole; ghost values across a pole use the exact
//! scalar identity `f(-θ, φ) = f(θ, φ + π)` (which is why `N_φ` must be
//! even). The n = 2 grid is a uniform periodic parameterization of the
//! circle.

use super::HanzawaError;

/// Angular grid over the reference surface.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub n: usize,
    pub radius: f64,
    pub n_theta: usize,
    pub n_phi: usize,
    /// Colatitudes (n = 3) or circle angles (n = 2).
    pub theta: Vec<f64>,
    pub h_theta: f64,
    pub h_phi: f64,
}

impl SphereGrid {
    /// Latitude–longitude grid on the sphere of the given radius in R³.
    pub fn sphere(radius: f64, n_theta: usize, n_phi: usize) -> Result<Self, HanzawaError> {
        if radius <= 0.0 {
            return Err(HanzawaError::BadGrid("radius must be positive".into()));
        }
        if n_theta < 8 || n_phi < 8 || n_phi % 2 != 0 {
            return Err(HanzawaError::BadGrid(
                "need n_theta >= 8 and even n_phi >= 8".into(),
            ));
        }
        let h_theta = std::f64::consts::PI / n_theta as f64;
        let theta = (0..n_theta).map(|i| (i as f64 + 0.5) * h_theta).collect();
        Ok(SphereGrid {
            n: 3,
            radius,
            n_theta,
            n_phi,
            theta,
            h_theta,
            h_phi: 2.0 * std::f64::consts::PI / n_phi as f64,
        })
    }

    /// Uniform periodic grid on the circle of the given radius in R².
    pub fn circle(radius: f64, points: usize) -> Result<Self, HanzawaError> {
        if radius <= 0.0 {
            return Err(HanzawaError::BadGrid("radius must be positive".into()));
        }
        if points < 16 {
            return Err(HanzawaError::BadGrid("need at least 16 circle points".into()));
        }
        let h = 2.0 * std::f64::consts::PI / points as f64;
        Ok(SphereGrid {
            n: 2,
            radius,
            n_theta: points,
            n_phi: 1,
            theta: (0..points).map(|i| i as f64 * h).collect(),
            h_theta: h,
            h_phi: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_phi + j
    }

    /// Field value with pole reflection (n = 3) or periodic wrap (n = 2) in
    /// the θ index, and periodic wrap in φ.
    #[inline]
    fn value(&self, f: &[f64], i: isize, j: isize) -> f64 {
        let nt = self.n_theta as isize;
        let np = self.n_phi as isize;
        if self.n == 2 {
            let i = i.rem_euclid(nt);
            return f[i as usize];
        }
        let (mut i, mut j) = (i, j.rem_euclid(np));
        if i < 0 {
            i = -1 - i;
            j = (j + np / 2).rem_euclid(np);
        } else if i >= nt {
            i = 2 * nt - 1 - i;
            j = (j + np / 2).rem_euclid(np);
        }
        f[self.idx(i as usize, j as usize)]
    }

    /// Fourth-order ∂/∂θ.
    pub fn d_theta(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        let c = 1.0 / (12.0 * self.h_theta);
        for i in 0..self.n_theta as isize {
            for j in 0..self.n_phi as isize {
                let v = self.value(f, i - 2, j) - 8.0 * self.value(f, i - 1, j)
                    + 8.0 * self.value(f, i + 1, j)
                    - self.value(f, i + 2, j);
                out[self.idx(i as usize, j as usize)] = v * c;
            }
        }
        out
    }

    /// Fourth-order ∂²/∂θ².
    pub fn d2_theta(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        let c = 1.0 / (12.0 * self.h_theta * self.h_theta);
        for i in 0..self.n_theta as isize {
            for j in 0..self.n_phi as isize {
                let v = -self.value(f, i - 2, j) + 16.0 * self.value(f, i - 1, j)
                    - 30.0 * self.value(f, i, j)
                    + 16.0 * self.value(f, i + 1, j)
                    - self.value(f, i + 2, j);
                out[self.idx(i as usize, j as usize)] = v * c;
            }
        }
        out
    }

    /// Fourth-order ∂/∂φ (zero for n = 2).
    pub fn d_phi(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        if self.n == 2 {
            return out;
        }
        let c = 1.0 / (12.0 * self.h_phi);
        for i in 0..self.n_theta as isize {
            for j in 0..self.n_phi as isize {
                let v = self.value(f, i, j - 2) - 8.0 * self.value(f, i, j - 1)
                    + 8.0 * self.value(f, i, j + 1)
                    - self.value(f, i, j + 2);
                out[self.idx(i as usize, j as usize)] = v * c;
            }
        }
        out
    }

    /// Fourth-order ∂²/∂φ² (zero for n = 2).
    pub fn d2_phi(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        if self.n == 2 {
            return out;
        }
        let c = 1.0 / (12.0 * self.h_phi * self.h_phi);
        for i in 0..self.n_theta as isize {
            for j in 0..self.n_phi as isize {
                let v = -self.value(f, i, j - 2) + 16.0 * self.value(f, i, j - 1)
                    - 30.0 * self.value(f, i, j)
                    + 16.0 * self.value(f, i, j + 1)
                    - self.value(f, i, j + 2);
                out[self.idx(i as usize, j as usize)] = v * c;
            }
        }
        out
    }

    /// Surface gradient components `(g_θ, g_φ)` of a scalar field, in the
    /// orthonormal frame `e_θ, e_φ`.
    pub fn surface_gradient(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let ft = self.d_theta(f);
        let gt: Vec<f64> = ft.iter().map(|v| v / self.radius).collect();
        let mut gp = vec![0.0; f.len()];
        if self.n == 3 {
            let fp = self.d_phi(f);
            for i in 0..self.n_theta {
                let s = self.theta[i].sin();
                for j in 0..self.n_phi {
                    gp[self.idx(i, j)] = fp[self.idx(i, j)] / (self.radius * s);
                }
            }
        }
        (gt, gp)
    }

    /// Surface divergence of a tangent field given in the orthonormal frame.
    pub fn surface_divergence(&self, a_theta: &[f64], a_phi: &[f64]) -> Vec<f64> {
        if self.n == 2 {
            return self.d_theta(a_theta).iter().map(|v| v / self.radius).collect();
        }
        // div a = (1/(R sinθ)) [∂_θ(sinθ a_θ) + ∂_φ a_φ].
        // a_θ is odd across a pole while sinθ flips sign too, so the product
        // reflects like a scalar and the plain stencil applies.
        let mut sa: Vec<f64> = vec![0.0; a_theta.len()];
        for i in 0..self.n_theta {
            let s = self.theta[i].sin();
            for j in 0..self.n_phi {
                sa[self.idx(i, j)] = s * a_theta[self.idx(i, j)];
            }
        }
        let dsa = self.d_theta(&sa);
        let dap = self.d_phi(a_phi);
        let mut out = vec![0.0; a_theta.len()];
        for i in 0..self.n_theta {
            let s = self.theta[i].sin();
            for j in 0..self.n_phi {
                let k = self.idx(i, j);
                out[k] = (dsa[k] + dap[k]) / (self.radius * s);
            }
        }
        out
    }

    /// Laplace–Beltrami of a scalar field, in the expanded form
    /// `(f_θθ + cotθ f_θ + f_φφ / sin²θ) / R²` (n = 3) or `f_θθ / R²`
    /// (n = 2), with direct fourth-order second-derivative stencils.
    pub fn laplace_beltrami(&self, f: &[f64]) -> Vec<f64> {
        let ftt = self.d2_theta(f);
        let r2 = self.radius * self.radius;
        if self.n == 2 {
            return ftt.iter().map(|v| v / r2).collect();
        }
        let ft = self.d_theta(f);
        let fpp = self.d2_phi(f);
        let mut out = vec![0.0; f.len()];
        for i in 0..self.n_theta {
            let t = self.theta[i];
            let (s, c) = (t.sin(), t.cos());
            for j in 0..self.n_phi {
                let k = self.idx(i, j);
                out[k] = (ftt[k] + c / s * ft[k] + fpp[k] / (s * s)) / r2;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zonal(grid: &SphereGrid, g: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut f = vec![0.0; grid.len().max(grid.n_theta)];
        for i in 0..grid.n_theta {
            for j in 0..grid.n_phi.max(1) {
                let k = if grid.n == 3 { grid.idx(i, j) } else { i };
                f[k] = g(grid.theta[i]);
            }
        }
        f
    }

    #[test]
    fn circle_laplacian_of_fourier_mode() {
        let grid = SphereGrid::circle(2.0, 256).unwrap();
        let f = zonal(&grid, |t| (3.0 * t).cos());
        let lap = grid.laplace_beltrami(&f);
        for (k, v) in lap.iter().enumerate() {
            let expect = -9.0 / 4.0 * f[k];
            assert!((v - expect).abs() < 1e-6, "at {k}: {v} vs {expect}");
        }
    }

    #[test]
    fn sphere_laplacian_of_degree_two_zonal_harmonic() {
        let grid = SphereGrid::sphere(1.5, 64, 128).unwrap();
        // P₂(cosθ): eigenvalue -l(l+1)/R² with l = 2.
        let f = zonal(&grid, |t| 0.5 * (3.0 * t.cos() * t.cos() - 1.0));
        let lap = grid.laplace_beltrami(&f);
        for k in 0..grid.len() {
            let expect = -6.0 / (1.5 * 1.5) * f[k];
            assert!(
                (lap[k] - expect).abs() < 2e-5,
                "at {k}: {} vs {expect}",
                lap[k]
            );
        }
    }

    #[test]
    fn sphere_laplacian_of_sectoral_harmonic() {
        let grid = SphereGrid::sphere(1.0, 72, 144).unwrap();
        // Y = sin²θ cos(2φ): degree-2 harmonic, eigenvalue -6/R².
        let mut f = vec![0.0; grid.len()];
        for i in 0..grid.n_theta {
            for j in 0..grid.n_phi {
                let t = grid.theta[i];
                let p = j as f64 * grid.h_phi;
                f[grid.idx(i, j)] = t.sin() * t.sin() * (2.0 * p).cos();
            }
        }
        let lap = grid.laplace_beltrami(&f);
        let mut worst = 0.0f64;
        for k in 0..grid.len() {
            worst = worst.max((lap[k] + 6.0 * f[k]).abs());
        }
        assert!(worst < 5e-6, "worst abs error {worst}");
    }

    #[test]
    fn derivative_converges_at_fourth_order() {
        let err = |nt: usize| -> f64 {
            let grid = SphereGrid::sphere(1.0, nt, 2 * nt).unwrap();
            // cos(2θ) is even across the poles, hence smooth as a sphere
            // function; sin(2θ) would have a cone there.
            let f = zonal(&grid, |t| (2.0 * t).cos());
            let d = grid.d_theta(&f);
            let mut worst = 0.0f64;
            for i in 0..grid.n_theta {
                let expect = -2.0 * (2.0 * grid.theta[i]).sin();
                worst = worst.max((d[grid.idx(i, 0)] - expect).abs());
            }
            worst
        };
        let (e1, e2) = (err(24), err(48));
        let rate = (e1 / e2).log2();
        assert!(rate > 3.7, "observed rate {rate} (errors {e1:e}, {e2:e})");
    }
}
