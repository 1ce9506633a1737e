use num_complex::Complex64;

use bloch_dno::{
    apply_dno_oracle, assemble_g_theta, BathymetryProfile, FourierField, OracleResolution, Preset,
    Truncation,
};

fn probe(trunc: Truncation) -> FourierField {
    let mut psi = FourierField::zeros(trunc);
    for j in -3i64..=3 {
        let c = Complex64::new(1.0 / (1.0 + j.abs() as f64), 0.3 * j as f64);
        psi.set_coeff(j, c).unwrap();
    }
    psi
}

#[test]
fn series_error_drops_with_order() {
    let prof = BathymetryProfile::preset(Preset::Cos13, 1.0, 0.03).unwrap();
    let trunc = Truncation::new(8).unwrap();
    let psi = probe(trunc);
    let theta = -0.21;
    let oracle =
        apply_dno_oracle(&prof, theta, &psi, OracleResolution::new(35, 24).unwrap()).unwrap();
    let errors: Vec<f64> = (1..=4)
        .map(|p| {
            let series = assemble_g_theta(&prof, theta, trunc, p)
                .unwrap()
                .apply(&psi);
            series.sub(&oracle).norm_l2() / oracle.norm_l2()
        })
        .collect();
    for w in errors.windows(2) {
        assert!(w[1] < 0.5 * w[0], "{errors:?}");
    }
    assert!(errors[3] < 1e-5, "{errors:?}");
}

#[test]
fn error_scales_with_next_power_of_eps() {
    // Order-2 series error should fall by about 2³ when ε halves.
    let trunc = Truncation::new(8).unwrap();
    let psi = probe(trunc);
    let err = |eps: f64| {
        let prof = BathymetryProfile::preset(Preset::Cosx, 1.0, eps).unwrap();
        let oracle = apply_dno_oracle(&prof, 0.1, &psi, OracleResolution::default()).unwrap();
        let series = assemble_g_theta(&prof, 0.1, trunc, 2).unwrap().apply(&psi);
        series.sub(&oracle).norm_l2()
    };
    let ratio = err(0.08) / err(0.04);
    assert!(
        (ratio.log2() - 3.0).abs() < 0.3,
        "observed order {}",
        ratio.log2()
    );
}

#[test]
fn flat_bottom_oracle_is_diagonal() {
    let prof = BathymetryProfile::flat(0.7).unwrap();
    let trunc = Truncation::new(6).unwrap();
    let psi = probe(trunc);
    let oracle = apply_dno_oracle(&prof, 0.35, &psi, OracleResolution::default()).unwrap();
    let series = assemble_g_theta(&prof, 0.35, trunc, 1).unwrap().apply(&psi);
    assert!(series.sub(&oracle).max_abs() < 1e-10);
}
