use obstacle_core::spectral::{eigenvalue_min, rayleigh_quotient, SphereMesh};
use proptest::prelude::*;

#[test]
fn arc_eigenvalue_converges_quadratically() {
    let errors: Vec<f64> = [64, 128, 256]
        .iter()
        .map(|&n| {
            let mesh = SphereMesh::<f64>::arc(n).unwrap();
            (eigenvalue_min(&mesh, 1e-12, 200).unwrap().lambda - 0.25).abs()
        })
        .collect();
    assert!(errors[1] < errors[0] / 3.0 && errors[2] < errors[1] / 3.0, "{errors:?}");
}

#[test]
fn eigenvector_attains_its_quotient() {
    let mesh = SphereMesh::<f64>::hemisphere(32, 32).unwrap();
    let pair = eigenvalue_min(&mesh, 1e-12, 200).unwrap();
    let q = rayleigh_quotient(&mesh, &pair.vector).unwrap();
    assert!((q - pair.lambda).abs() < 1e-9 * pair.lambda);
    let norm: f64 = pair.vector.iter().zip(mesh.mass()).map(|(v, m)| m * v * v).sum();
    assert!((norm - 1.0).abs() < 1e-9);
    assert!(pair.vector.iter().zip(mesh.dirichlet()).all(|(v, d)| !d || *v == 0.0));
}

#[test]
fn larger_dirichlet_set_raises_the_eigenvalue() {
    let mesh = SphereMesh::<f64>::hemisphere(32, 32).unwrap();
    let base = eigenvalue_min(&mesh, 1e-10, 200).unwrap().lambda;
    let whole: Vec<bool> = (0..mesh.len()).map(|i| mesh.is_equatorial(i)).collect();
    let full = eigenvalue_min(&mesh.with_dirichlet(whole).unwrap(), 1e-10, 200).unwrap().lambda;
    assert!(full >= base);
    // Full Dirichlet equator on the half sphere: the first eigenvalue is 2.
    assert!((full - 2.0).abs() < 0.05, "{full}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn admissible_vectors_stay_above_the_eigenvalue(coeffs in prop::collection::vec(-1.0f64..1.0, 4)) {
        let mesh = SphereMesh::<f64>::arc(128).unwrap();
        let lambda = eigenvalue_min(&mesh, 1e-12, 200).unwrap().lambda;
        // Combinations of admissible modes cos((k + 1/2) theta).
        let w = mesh.sample(|p| {
            let theta = p[1].atan2(p[0]).abs().min(std::f64::consts::PI);
            coeffs.iter().enumerate().map(|(k, c)| c * ((k as f64 + 0.5) * theta).cos()).sum()
        });
        prop_assume!(w.iter().any(|v| v.abs() > 1e-3));
        let w: Vec<f64> = w.iter().zip(mesh.dirichlet()).map(|(v, d)| if *d { 0.0 } else { *v }).collect();
        let q = rayleigh_quotient(&mesh, &w).unwrap();
        prop_assert!(q >= lambda - 1e-9, "{} < {}", q, lambda);
    }
}
