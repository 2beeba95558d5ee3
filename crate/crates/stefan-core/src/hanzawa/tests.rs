use super::*;

#[test]
fn zero_height_gives_reference_normal_and_unit_beta() {
    for (n, grid) in [
        (2, SphereGrid::circle(1.3, 128).unwrap()),
        (3, SphereGrid::sphere(1.3, 48, 96).unwrap()),
    ] {
        let rho = vec![0.0; grid.len()];
        let f = normal_and_beta(&grid, &rho).unwrap();
        for k in 0..grid.len() {
            assert_eq!(f.beta[k], 1.0);
            assert_eq!(f.alpha_theta[k], 0.0);
            let norm: f64 = f.nu[k].iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-15, "n={n}");
        }
    }
}

#[test]
fn constant_height_is_concentric() {
    let grid = SphereGrid::sphere(1.0, 48, 96).unwrap();
    let rho = vec![0.2; grid.len()];
    let f = normal_and_beta(&grid, &rho).unwrap();
    for k in 0..grid.len() {
        // Stencils of a constant cancel only to the last bit, not exactly.
        assert!((f.beta[k] - 1.0).abs() < 1e-13);
        assert!(f.alpha_theta[k].abs() < 1e-13);
        assert!(f.alpha_phi[k].abs() < 1e-13);
    }
    let h = mean_curvature(&grid, &rho).unwrap();
    for v in &h {
        assert!((v + 2.0 / 1.2).abs() < 1e-13, "H = {v}");
    }
}

#[test]
fn curvature_sign_convention() {
    // Sphere of radius R has H = -(n-1)/R.
    let grid = SphereGrid::circle(2.0, 128).unwrap();
    let h = mean_curvature(&grid, &vec![0.0; grid.len()]).unwrap();
    for v in &h {
        assert!((v + 0.5).abs() < 1e-14);
    }
}

#[test]
fn shifted_sphere_has_constant_curvature_and_exact_normals() {
    for (n, fine, coarse) in [
        (2usize, SphereGrid::circle(1.0, 256).unwrap(), SphereGrid::circle(1.0, 128).unwrap()),
        (3, SphereGrid::sphere(1.0, 96, 192).unwrap(), SphereGrid::sphere(1.0, 48, 96).unwrap()),
    ] {
        let delta = 1.0 / 16.0;
        let err = |g: &SphereGrid| {
            let rho = shifted_sphere_height(g, delta);
            let h = mean_curvature(g, &rho).unwrap();
            h.iter().map(|v| (v + (n as f64 - 1.0)).abs()).fold(0.0f64, f64::max)
        };
        let (ef, ec) = (err(&fine), err(&coarse));
        let rate = (ec / ef).log2();
        assert!(ef < 1e-6, "n={n}: fine error {ef}");
        assert!(rate > 2.0, "n={n}: rate {rate} ({ec:e} -> {ef:e})");

        let rho = shifted_sphere_height(&fine, delta);
        let nf = normal_and_beta(&fine, &rho).unwrap();
        for k in 0..fine.len() {
            let exact = shifted_sphere_normal(&fine, delta, &rho, k);
            for c in 0..3 {
                assert!(
                    (nf.nu[k][c] - exact[c]).abs() < 1e-6,
                    "n={n} k={k}: component {c}"
                );
            }
        }
    }
}

#[test]
fn linearized_curvature_eigenvalues_to_degree_six() {
    let grid = SphereGrid::sphere(1.4, 96, 192).unwrap();
    let r2 = 1.4 * 1.4;
    for l in 0..=6usize {
        let y = zonal_harmonic(&grid, l);
        let hy = linearized_curvature(&grid, &y);
        let expect = (2.0 - (l * (l + 1)) as f64) / r2;
        for k in 0..grid.len() {
            if y[k].abs() > 0.3 {
                let got = hy[k] / y[k];
                assert!(
                    (got - expect).abs() < 1e-4 * (1.0 + expect.abs()),
                    "l={l}: {got} vs {expect}"
                );
            }
        }
    }
    // Degree one is neutral.
    let y = zonal_harmonic(&grid, 1);
    let hy = linearized_curvature(&grid, &y);
    for v in &hy {
        assert!(v.abs() < 1e-7);
    }
}

#[test]
fn fd_linearization_first_order_in_eps() {
    let grid = SphereGrid::sphere(1.0, 64, 128).unwrap();
    let dir = zonal_harmonic(&grid, 2);
    let lin = linearized_curvature(&grid, &dir);
    let h0 = mean_curvature(&grid, &vec![0.0; grid.len()]).unwrap();
    let gap = |eps: f64| {
        let rho: Vec<f64> = dir.iter().map(|v| eps * v).collect();
        let h = mean_curvature(&grid, &rho).unwrap();
        (0..grid.len())
            .map(|k| ((h[k] - h0[k]) / eps - lin[k]).abs())
            .fold(0.0f64, f64::max)
    };
    let (g1, g2) = (gap(0.05), gap(0.005));
    let rate = (g1 / g2).log10();
    assert!(rate > 0.9 && rate < 1.3, "rate {rate} ({g1:e} -> {g2:e})");
    // Spec-level spot check: ε = 1e-4 agrees within 1e-3 relative to |H'(0)ρ| scale.
    let lin_scale = lin.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(gap(1e-4) <= 1e-3 * lin_scale, "gap {} vs scale {}", gap(1e-4), lin_scale);
}

#[test]
fn gates_reject_large_heights() {
    let grid = SphereGrid::sphere(1.0, 32, 64).unwrap();
    let too_tall = vec![0.3; grid.len()];
    assert!(matches!(
        normal_and_beta(&grid, &too_tall),
        Err(HanzawaError::GateViolation { .. })
    ));
    let steep = zonal_harmonic(&grid, 6).iter().map(|v| 0.2 * v).collect::<Vec<_>>();
    assert!(matches!(
        mean_curvature(&grid, &steep),
        Err(HanzawaError::GateViolation { .. })
    ));
}

#[test]
fn battery_passes_for_both_dimensions() {
    let report = verification_battery(3, 1.0, 96, 192).unwrap();
    assert!(report.passed(), "checks: {:#?}", report.checks);
    let report = verification_battery(2, 1.0, 512, 1).unwrap();
    assert!(report.passed(), "checks: {:#?}", report.checks);
}
