//! Adaptive Simpson quadrature.

/// Error raised when the adaptive subdivision cannot reach the requested
/// absolute tolerance within the depth limit.
#[derive(Debug, Clone, thiserror::Error)]
#[error("adaptive Simpson did not converge to {tol:e} on [{a}, {b}]")]
pub struct QuadError {
    pub a: f64,
    pub b: f64,
    pub tol: f64,
}

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` with adaptive Simpson to absolute tolerance `tol`.
///
/// `a > b` is allowed and gives the signed integral.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, QuadError> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    step(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH).ok_or(QuadError { a, b, tol })
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Option<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // Richardson: Simpson halving error contracts by 15.
    if delta.abs() <= 15.0 * tol {
        return Some(left + right + delta / 15.0);
    }
    if depth == 0 {
        return None;
    }
    let l = step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Some(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        // Simpson is exact on cubics.
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 0.0).abs() < 1e-12);
    }

    #[test]
    fn integrates_transcendental() {
        let v = adaptive_simpson(|x| x.exp(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-11);
    }

    #[test]
    fn signed_orientation() {
        let fwd = adaptive_simpson(|x| x.sin(), 0.0, 1.0, 1e-12).unwrap();
        let bwd = adaptive_simpson(|x| x.sin(), 1.0, 0.0, 1e-12).unwrap();
        assert!((fwd + bwd).abs() < 1e-14);
    }
}
