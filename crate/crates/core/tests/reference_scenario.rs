use doublet_core::medium::permeability_perturbation;
use doublet_core::response::{linspace, sweep};
use doublet_core::scenario;

#[test]
fn gyrotropy_vanishes_at_crossing_field() {
    let m = scenario::medium();
    let nu = permeability_perturbation(&m, -0.5e-3, scenario::F_C_HZ).unwrap().nu;
    assert!((nu.m22() + m.eta.m22()).abs() < 1e-18);
}

#[test]
fn minimum_separation_near_crossing() {
    let b = linspace(-2e-3, 1e-3, 3001);
    let s = sweep(&scenario::medium(), &scenario::cavity(), &b).unwrap();
    let best = s
        .points
        .iter()
        .min_by(|a, b| a.doublet.splitting.total_cmp(&b.doublet.splitting))
        .unwrap();
    assert!((best.b + 0.5e-3).abs() <= 1e-6);
    assert!((best.doublet.splitting - 6460.0).abs() < 1e-3);
}

#[test]
fn dressed_and_bare_obey_hyperbola_identity() {
    let b = linspace(-2e-3, 1e-3, 301);
    let s = sweep(&scenario::medium(), &scenario::cavity(), &b).unwrap();
    let g2 = (2.0 * scenario::G_HZ).powi(2);
    for p in &s.points {
        // Work from the Bloch vector: absolute frequencies would cancel badly.
        let w = p.bloch.omega0;
        let dressed = 2.0 * w * p.bloch.radius();
        let bare = 2.0 * w * p.bloch.az.abs();
        let diff = dressed * dressed - bare * bare;
        assert!((diff / g2 - 1.0).abs() < 1e-9, "{}", diff / g2 - 1.0);
    }
}
