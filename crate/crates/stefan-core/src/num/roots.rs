//! Bracketing scans and bisection for scalar root finding.

/// A bracket `[a, b]` with a sign change: `f(a)` and `f(b)` have opposite signs.
#[derive(Debug, Clone, Copy)]
pub struct Bracket {
    pub a: f64,
    pub b: f64,
    pub fa: f64,
    pub fb: f64,
}

/// Scans `f` over the given sample points and collects all sign-change brackets.
///
/// Samples where `f` is non-finite break the scan (no bracket may span them),
/// and exact zeros are returned as degenerate brackets `[x, x]`.
pub fn scan_brackets<F: Fn(f64) -> f64>(f: F, samples: &[f64]) -> Vec<Bracket> {
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &x in samples {
        let fx = f(x);
        if !fx.is_finite() {
            prev = None;
            continue;
        }
        if fx == 0.0 {
            out.push(Bracket { a: x, b: x, fa: 0.0, fb: 0.0 });
            prev = None;
            continue;
        }
        if let Some((xp, fp)) = prev {
            if fp.signum() != fx.signum() {
                out.push(Bracket { a: xp, b: x, fa: fp, fb: fx });
            }
        }
        prev = Some((x, fx));
    }
    out
}

/// Bisection on a sign-change bracket to absolute x-tolerance `tol`.
///
/// Returns the midpoint of the final bracket. A degenerate bracket is
/// returned as-is.
pub fn bisect<F: Fn(f64) -> f64>(f: F, bracket: Bracket, tol: f64) -> f64 {
    let Bracket { mut a, mut b, fa, .. } = bracket;
    if a == b {
        return a;
    }
    let mut sa = fa.signum();
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == sa {
            a = m;
            sa = fm.signum();
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Uniform grid of `count` points on the open interval `(a, b)`.
///
/// Endpoints are excluded: coefficient functions are only defined on the
/// open temperature interval.
pub fn open_grid(a: f64, b: f64, count: usize) -> Vec<f64> {
    let n = count.max(2);
    let h = (b - a) / (n as f64 + 1.0);
    (1..=n).map(|i| a + h * i as f64).collect()
}

/// Logarithmically spaced grid of `count` points on `[a, b]`, `0 < a < b`.
pub fn log_grid(a: f64, b: f64, count: usize) -> Vec<f64> {
    let n = count.max(2);
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
