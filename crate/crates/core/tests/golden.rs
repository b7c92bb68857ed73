use doublet_core::doublet::vacuum_amplitude;
use doublet_core::response::solve_at_field;
use doublet_core::scenario;
use serde_json::Value;

fn golden() -> Value {
    serde_json::from_str(include_str!("fixtures/golden.json")).unwrap()
}

#[test]
fn vacuum_amplitude_matches_fixture() {
    let g = &golden()["vacuum_amplitude"];
    let v = vacuum_amplitude(
        g["freq_hz"].as_f64().unwrap(),
        g["mode_volume"].as_f64().unwrap(),
        g["epsilon"].as_f64().unwrap(),
    )
    .unwrap();
    let expected = g["value"].as_f64().unwrap();
    assert!((v / expected - 1.0).abs() < 1e-14, "{v} vs {expected}");
}

#[test]
fn reference_doublet_at_crossing() {
    let g = &golden()["reference_doublet"];
    let b0 = g["b0_t"].as_f64().unwrap();
    let p = solve_at_field(&scenario::medium(), &scenario::cavity(), b0).unwrap();
    assert_eq!(scenario::F_C_HZ, g["f_c_hz"].as_f64().unwrap());
    assert!((p.doublet.splitting - g["min_splitting_hz"].as_f64().unwrap()).abs() < 1e-6);
    let fwhm = g["fwhm_hz"].as_f64().unwrap();
    // Spin absorption adds well under a hertz on top of the intrinsic width.
    assert!(p.plus.fwhm - fwhm > 0.0 && p.plus.fwhm - fwhm < 1.0);
    let ratio = p.doublet.splitting / p.plus.fwhm;
    assert!((ratio - g["ratio_g_delta"].as_f64().unwrap()).abs() < 0.1);
}
