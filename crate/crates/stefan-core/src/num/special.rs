//! Sphere geometry helpers: unit-sphere areas, ball volumes, spherical
//! harmonic multiplicities.

use std::f64::consts::PI;

/// Gamma function at integer or half-integer arguments `z = k/2`, `k >= 1`.
///
/// Exact closed forms: `Γ(m) = (m-1)!` and `Γ(m + 1/2) = (2m)!√π / (4^m m!)`.
pub fn gamma_half_integer(twice_z: u32) -> f64 {
    assert!(twice_z >= 1, "gamma argument must be >= 1/2");
    if twice_z % 2 == 0 {
        let m = twice_z / 2;
        (1..m).map(|i| i as f64).product::<f64>()
    } else {
        // Γ(1/2) = √π, then Γ(z+1) = z Γ(z).
        let mut v = PI.sqrt();
        for i in 0..(twice_z - 1) / 2 {
            v *= i as f64 + 0.5;
        }
        v
    }
}

/// Area of the unit sphere `S^{n-1}` in `R^n`: `ω_n = 2 π^{n/2} / Γ(n/2)`.
pub fn unit_sphere_area(n: usize) -> f64 {
    assert!(n >= 2);
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half_integer(n as u32)
}

/// Area of the sphere of radius `r` in `R^n`.
pub fn sphere_area(n: usize, r: f64) -> f64 {
    unit_sphere_area(n) * r.powi(n as i32 - 1)
}

/// Volume of the ball of radius `r` in `R^n`: `ω_n r^n / n`.
pub fn ball_volume(n: usize, r: f64) -> f64 {
    unit_sphere_area(n) * r.powi(n as i32) / n as f64
}

/// Number of linearly independent spherical harmonics of degree `l` on
/// `S^{n-1}`: `C(n+l-1, l) - C(n+l-3, l-2)`.
pub fn harmonic_multiplicity(n: usize, l: usize) -> usize {
    if l == 0 {
        return 1;
    }
    binomial(n + l - 1, l) - if l >= 2 { binomial(n + l - 3, l - 2) } else { 0 }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut v: u128 = 1;
    for i in 0..k {
        v = v * (n - i) as u128 / (i + 1) as u128;
    }
    v as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_sphere_constants() {
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((ball_volume(3, 1.0) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((ball_volume(2, 2.0) - 4.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn harmonic_multiplicities() {
        // n = 3: 2l + 1; n = 2: two Fourier modes per l >= 1.
        for l in 0..8 {
            assert_eq!(harmonic_multiplicity(3, l), 2 * l + 1);
        }
        assert_eq!(harmonic_multiplicity(2, 0), 1);
        for l in 1..8 {
            assert_eq!(harmonic_multiplicity(2, l), 2);
        }
        assert_eq!(harmonic_multiplicity(4, 1), 4);
        assert_eq!(harmonic_multiplicity(4, 2), 9);
    }
}
