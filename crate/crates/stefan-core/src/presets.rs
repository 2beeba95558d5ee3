//! Built-in parameter sets realizing each stability/well-posedness regime of
//! the concentric single-sphere configuration.
//!
//! Anywhere the CLI accepts a model file, `preset:<name>` selects one of
//! these instead. The same fixtures drive the acceptance suite, so the five
//! regimes of the eigenvalue-count matrix are always reproducible:
//!
//! | name                  | γ      | ζ*      | η*     | expected unstable |
//! |-----------------------|--------|---------|--------|-------------------|
//! | gamma-unstable        | 0.1    | ≈ 1.86  | ≈ 0.09 | 1                 |
//! | gamma-stable          | 0.1    | ≈ 0.44  | ≈ 0.09 | 0                 |
//! | nogamma-high-surface  | 0      | ≈ 5.2   | ≈ 2.0  | 0                 |
//! | nogamma-unstable      | 0      | ≈ 1.86  | ≈ 0.09 | 1                 |
//! | nogamma-stable        | 0      | ≈ 0.44  | ≈ 0.09 | 0                 |

use crate::equilibrium::DomainSpec;
use crate::material::{CoefficientFunction, MaterialModel};
use crate::spectral::RadialGeometry;

/// A named, fully specified test case: material, concentric geometry, and
/// the equilibrium temperature.
#[derive(Debug, Clone)]
pub struct PresetCase {
    pub name: &'static str,
    pub description: &'static str,
    pub model: MaterialModel,
    pub geometry: RadialGeometry,
    pub u_star: f64,
}

impl PresetCase {
    pub fn domain(&self) -> DomainSpec {
        self.geometry.domain()
    }
}

/// Base family: φ(u) = 1 - u - u ln u (melting temperature 1),
/// σ(u) = 0.2 (1 - u²/4) on u_c = 2, equilibrium at u* = 0.5 with R* = 0.75.
fn base_model(kappa: f64, gamma: Option<f64>) -> MaterialModel {
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

/// High surface heat capacity family: φ(u) = 0.5 - u, σ(u) = B(0.27 - u²)
/// with B = 5/12, so η* = 2 at u* = 0.3 and R* = 0.75; u_c = √0.27.
fn high_surface_model() -> MaterialModel {
    let b = 5.0 / 12.0;
    MaterialModel::new(
        CoefficientFunction::ULogU(0.0, 0.0, -0.2),
        CoefficientFunction::ULogU(0.5, -1.0, -0.2),
        CoefficientFunction::Constant(0.2),
        CoefficientFunction::Constant(0.2),
        CoefficientFunction::Poly(0.27 * b, 0.0, -b, 0.0, 0.0),
        CoefficientFunction::Constant(0.05),
        None,
        0.27f64.sqrt(),
    )
}

fn case(
    name: &'static str,
    description: &'static str,
    model: MaterialModel,
    u_star: f64,
    r_omega: f64,
) -> PresetCase {
    let r_star = crate::equilibrium::equilibrium_radius(&model, 3, u_star)
        .expect("preset equilibria exist by construction");
    PresetCase {
        name,
        description,
        model,
        geometry: RadialGeometry { n: 3, r_star, r_omega },
        u_star,
    }
}

/// Looks up a preset case by name.
pub fn preset(name: &str) -> Option<PresetCase> {
    let built = match name {
        "gamma-unstable" => case(
            "gamma-unstable",
            "kinetic undercooling, zeta* > 1: one unstable radial mode",
            base_model(0.5, Some(0.1)),
            0.5,
            1.5,
        ),
        "gamma-stable" => case(
            "gamma-stable",
            "kinetic undercooling, zeta* < 1: stable",
            base_model(0.1, Some(0.1)),
            0.5,
            1.5,
        ),
        "nogamma-high-surface" => case(
            "nogamma-high-surface",
            "no undercooling, eta* > 1: stabilized by surface heat capacity",
            high_surface_model(),
            0.3,
            1.5,
        ),
        "nogamma-unstable" => case(
            "nogamma-unstable",
            "no undercooling, eta* < 1 < zeta*: one unstable radial mode",
            base_model(0.5, None),
            0.5,
            1.5,
        ),
        "nogamma-stable" => case(
            "nogamma-stable",
            "no undercooling, zeta* < 1: stable",
            base_model(0.1, None),
            0.5,
            1.5,
        ),
        "validation-demo" => case(
            "validation-demo",
            "two log-type free energies with a concave surface tension",
            MaterialModel::new(
                CoefficientFunction::ULogU(0.0, 0.0, -1.0),
                CoefficientFunction::ULogU(1.0, -1.0, -2.0),
                CoefficientFunction::Constant(1.0),
                CoefficientFunction::Constant(1.0),
                CoefficientFunction::SigmaConcave { sigma0: 1.0, p: 2.0, u_c: 2.0 },
                CoefficientFunction::Constant(1.0),
                None,
                2.0,
            ),
            0.2,
            3.0,
        ),
        _ => return None,
    };
    Some(built)
}

/// Names of all built-in cases, in the order of the regime table.
pub const PRESET_NAMES: [&str; 6] = [
    "gamma-unstable",
    "gamma-stable",
    "nogamma-high-surface",
    "nogamma-unstable",
    "nogamma-stable",
    "validation-demo",
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::indicators;

    #[test]
    fn presets_realize_their_regimes() {
        for (name, gamma_pos, zeta_above, eta_above, expect) in [
            ("gamma-unstable", true, true, false, Some(1)),
            ("gamma-stable", true, false, false, Some(0)),
            ("nogamma-high-surface", false, true, true, Some(0)),
            ("nogamma-unstable", false, true, false, Some(1)),
            ("nogamma-stable", false, false, false, Some(0)),
        ] {
            let case = preset(name).unwrap();
            assert!(case.model.validate(256).passed(), "{name} model invalid");
            let p = indicators(&case.model, &case.domain(), case.u_star, 1).unwrap();
            assert!(p.feasible, "{name} not feasible");
            assert!(p.well_posed(), "{name} not well posed");
            assert_eq!(p.gamma_star > 0.0, gamma_pos, "{name} gamma sign");
            assert_eq!(p.zeta_star > 1.0, zeta_above, "{name}: zeta = {}", p.zeta_star);
            assert_eq!(p.eta_star > 1.0, eta_above, "{name}: eta = {}", p.eta_star);
            assert_eq!(p.predicted_positive_eigenvalues, expect, "{name}");
            assert!(
                (p.r_star - case.geometry.r_star).abs() < 1e-12,
                "{name}: R* = {} vs geometry {}",
                p.r_star,
                case.geometry.r_star
            );
        }
    }

    #[test]
    fn unknown_preset_is_none() {
        assert!(preset("no-such-case").is_none());
    }
}
