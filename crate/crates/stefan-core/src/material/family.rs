//! Parametric coefficient families with closed-form derivatives to order 3.
//!
//! All thermodynamic coefficient functions (free energies, conductivities,
//! surface tension, kinetic undercooling) are drawn from a fixed set of
//! named families so that third derivatives are exact, never differenced.

use serde::{Deserialize, Serialize};

use super::MaterialError;

/// Value and derivatives of a scalar function at a point: `[f, f', f'', f''']`.
pub type Jet3 = [f64; 4];

/// Wire form of a coefficient function: `{"family": <name>, "params": [..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: String,
    pub params: Vec<f64>,
}

/// A coefficient function from one of the named parametric families,
/// restricted to the open temperature interval `(0, u_c)`.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientFunction {
    /// `c`
    Constant(f64),
    /// `a0 + a1 u`
    Affine(f64, f64),
    /// `a0 + a1 u + c·u ln u` — constant heat capacity `-c` when used as a
    /// free energy (κ = -u ψ'' = -c).
    ULogU(f64, f64, f64),
    /// `a0 + a1 u + a2 u² + a3 u³ + a4 u⁴`
    Poly(f64, f64, f64, f64, f64),
    /// Concave surface tension `σ0 (1 - (u/u_c)^p)`, `p >= 2`; `u_c` is the
    /// model's critical temperature.
    SigmaConcave { sigma0: f64, p: f64, u_c: f64 },
}

impl CoefficientFunction {
    /// Evaluates the function and its first three derivatives at `u`.
    ///
    /// Pure and deterministic; `u` must lie in the open domain when the
    /// family involves `ln u` or fractional powers.
    pub fn jet(&self, u: f64) -> Jet3 {
        match *self {
            CoefficientFunction::Constant(c) => [c, 0.0, 0.0, 0.0],
            CoefficientFunction::Affine(a0, a1) => [a0 + a1 * u, a1, 0.0, 0.0],
            CoefficientFunction::ULogU(a0, a1, c) => {
                let ln = u.ln();
                [
                    a0 + a1 * u + c * u * ln,
                    a1 + c * (ln + 1.0),
                    c / u,
                    -c / (u * u),
                ]
            }
            CoefficientFunction::Poly(a0, a1, a2, a3, a4) => [
                a0 + u * (a1 + u * (a2 + u * (a3 + u * a4))),
                a1 + u * (2.0 * a2 + u * (3.0 * a3 + u * 4.0 * a4)),
                2.0 * a2 + u * (6.0 * a3 + u * 12.0 * a4),
                6.0 * a3 + u * 24.0 * a4,
            ],
            CoefficientFunction::SigmaConcave { sigma0, p, u_c } => {
                let x = u / u_c;
                let xp = x.powf(p);
                let f = sigma0 * (1.0 - xp);
                let d1 = -sigma0 * p * xp / u;
                let d2 = d1 * (p - 1.0) / u;
                let d3 = d2 * (p - 2.0) / u;
                [f, d1, d2, d3]
            }
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.jet(u)[0]
    }

    /// Checks the parameter-level constraints of the family.
    pub fn check_params(&self) -> Result<(), MaterialError> {
        if let CoefficientFunction::SigmaConcave { p, u_c, .. } = *self {
            if p < 2.0 {
                return Err(MaterialError::BadFamily(format!(
                    "sigma_concave exponent p = {p} must be >= 2"
                )));
            }
            if u_c <= 0.0 {
                return Err(MaterialError::BadFamily(format!(
                    "sigma_concave u_c = {u_c} must be positive"
                )));
            }
        }
        Ok(())
    }

    /// Builds a coefficient function from its wire form. `u_c` supplies the
    /// critical temperature needed by the `sigma_concave` family.
    pub fn from_spec(spec: &FamilySpec, u_c: f64) -> Result<Self, MaterialError> {
        let p = &spec.params;
        let want = |n: usize| -> Result<(), MaterialError> {
            if p.len() == n {
                Ok(())
            } else {
                Err(MaterialError::BadFamily(format!(
                    "family '{}' takes {} params, got {}",
                    spec.family,
                    n,
                    p.len()
                )))
            }
        };
        let f = match spec.family.as_str() {
            "constant" => {
                want(1)?;
                CoefficientFunction::Constant(p[0])
            }
            "affine" => {
                want(2)?;
                CoefficientFunction::Affine(p[0], p[1])
            }
            "ulogu" => {
                want(3)?;
                CoefficientFunction::ULogU(p[0], p[1], p[2])
            }
            "poly" => {
                if p.is_empty() || p.len() > 5 {
                    return Err(MaterialError::BadFamily(format!(
                        "family 'poly' takes 1..=5 params, got {}",
                        p.len()
                    )));
                }
                let a = |i: usize| p.get(i).copied().unwrap_or(0.0);
                CoefficientFunction::Poly(a(0), a(1), a(2), a(3), a(4))
            }
            "sigma_concave" => {
                want(2)?;
                CoefficientFunction::SigmaConcave { sigma0: p[0], p: p[1], u_c }
            }
            other => {
                return Err(MaterialError::BadFamily(format!("unknown family '{other}'")))
            }
        };
        f.check_params()?;
        Ok(f)
    }

    /// Wire form of this function.
    pub fn to_spec(&self) -> FamilySpec {
        match *self {
            CoefficientFunction::Constant(c) => FamilySpec {
                family: "constant".into(),
                params: vec![c],
            },
            CoefficientFunction::Affine(a0, a1) => FamilySpec {
                family: "affine".into(),
                params: vec![a0, a1],
            },
            CoefficientFunction::ULogU(a0, a1, c) => FamilySpec {
                family: "ulogu".into(),
                params: vec![a0, a1, c],
            },
            CoefficientFunction::Poly(a0, a1, a2, a3, a4) => FamilySpec {
                family: "poly".into(),
                params: vec![a0, a1, a2, a3, a4],
            },
            CoefficientFunction::SigmaConcave { sigma0, p, .. } => FamilySpec {
                family: "sigma_concave".into(),
                params: vec![sigma0, p],
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_jet(f: &CoefficientFunction, u: f64, h: f64) -> [f64; 4] {
        let v = |x: f64| f.eval(x);
        [
            v(u),
            (v(u + h) - v(u - h)) / (2.0 * h),
            (v(u + h) - 2.0 * v(u) + v(u - h)) / (h * h),
            (v(u + 2.0 * h) - 2.0 * v(u + h) + 2.0 * v(u - h) - v(u - 2.0 * h))
                / (2.0 * h * h * h),
        ]
    }

    #[test]
    fn jets_match_finite_differences() {
        let fns = [
            CoefficientFunction::Constant(1.7),
            CoefficientFunction::Affine(0.3, -1.2),
            CoefficientFunction::ULogU(0.5, -1.0, -2.0),
            CoefficientFunction::Poly(1.0, -0.5, 0.25, -0.125, 0.0625),
            CoefficientFunction::SigmaConcave { sigma0: 0.2, p: 2.0, u_c: 2.0 },
            CoefficientFunction::SigmaConcave { sigma0: 1.5, p: 3.5, u_c: 1.3 },
        ];
        for f in &fns {
            for &u in &[0.31, 0.5, 0.85, 1.0] {
                let exact = f.jet(u);
                let approx = fd_jet(f, u, 1e-4);
                for k in 0..4 {
                    let scale = 1.0 + exact[k].abs();
                    let tol = match k {
                        0 => 1e-14,
                        1 => 1e-7,
                        2 => 1e-5,
                        _ => 1e-3,
                    };
                    assert!(
                        (exact[k] - approx[k]).abs() < tol * scale,
                        "{f:?} derivative {k} at u={u}: exact {} vs fd {}",
                        exact[k],
                        approx[k]
                    );
                }
            }
        }
    }

    #[test]
    fn sigma_concave_vanishes_at_u_c() {
        let s = CoefficientFunction::SigmaConcave { sigma0: 0.2, p: 2.0, u_c: 2.0 };
        assert!(s.eval(2.0).abs() < 1e-15);
        assert!((s.eval(1.0) - 0.15).abs() < 1e-15);
    }

    #[test]
    fn spec_round_trip() {
        let s = CoefficientFunction::SigmaConcave { sigma0: 0.2, p: 2.0, u_c: 2.0 };
        let wire = serde_json::to_string(&s.to_spec()).unwrap();
        assert_eq!(wire, r#"{"family":"sigma_concave","params":[0.2,2.0]}"#);
        let spec: FamilySpec = serde_json::from_str(&wire).unwrap();
        let back = CoefficientFunction::from_spec(&spec, 2.0).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn rejects_shallow_concavity() {
        let spec = FamilySpec { family: "sigma_concave".into(), params: vec![0.2, 1.5] };
        assert!(CoefficientFunction::from_spec(&spec, 2.0).is_err());
    }
}
