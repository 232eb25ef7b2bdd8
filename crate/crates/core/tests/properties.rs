//! Property tests across modules.

use std::sync::Arc;

use patchflow::fields::{MeshSpec, Part, PiecewiseField};
use patchflow::flow::{polygon_area, restart_amplitude};
use patchflow::geometry::{PatchDomain, Side};
use patchflow::io::{field_extra, field_rows, read_field, write_table, Sidecar, FIELD_COLUMNS};
use patchflow::quadrature::QuadratureSpec;
use patchflow::series::rotation_coefficient;
use patchflow::transforms::TransformBackend;
use patchflow::C64;
use proptest::prelude::*;

fn disk() -> Arc<PatchDomain> {
    Arc::new(PatchDomain::unit_disk(0.5))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // B̄ and C̄ are linear in the density
    #[test]
    fn disk_indicator_scales(re in -3.0..3.0f64, im in -3.0..3.0f64, r in 1.2..4.0f64, th in 0.0..6.28f64) {
        let d = disk();
        let b = TransformBackend::quadrature(d.clone(), QuadratureSpec::default());
        let a = C64::new(re, im);
        let z = C64::from_polar(r, th);
        let (cv, bv) = b.both(&PiecewiseField::indicator(d, a), z).unwrap();
        let cz = z.conj();
        prop_assert!((cv - a / cz).norm() <= 1e-7 * (1.0 + a.norm()));
        prop_assert!((bv + a / (cz * cz)).norm() <= 1e-7 * (1.0 + a.norm()));
    }

    // collapse restarts compose: c -> c/(1 - c t1) -> ... equals one step of t1 + t2
    #[test]
    fn restart_amplitude_semigroup(c in 0.1..3.0f64, u in 0.0..0.45f64, v in 0.0..0.45f64) {
        let (t1, t2) = (u / c, v / c);
        let two = restart_amplitude(restart_amplitude(c, t1), t2);
        let one = restart_amplitude(c, t1 + t2);
        prop_assert!((two - one).abs() <= 1e-12 * one);
    }

    // Σ (iω̂t/2)^s/s! = e^{iω̂t/2}
    #[test]
    fn rotation_series_sums_to_exponential(w in -4.0..4.0f64, t in -0.5..0.5f64) {
        let sum: C64 = (0..40).map(|s| rotation_coefficient(w, s) * t.powi(s as i32)).sum();
        prop_assert!((sum - C64::from_polar(1.0, 0.5 * w * t)).norm() <= 1e-13);
    }

    #[test]
    fn ellipse_polygon_area(a in 0.5..3.0f64, b in 0.5..3.0f64) {
        let d = PatchDomain::ellipse(C64::new(0.0, 0.0), a, b, 0.5).unwrap();
        let n = 4096;
        let pts: Vec<C64> = (0..n).map(|k| d.boundary_point(std::f64::consts::TAU * k as f64 / n as f64)).collect();
        let exact = std::f64::consts::PI * a * b;
        prop_assert!((polygon_area(&pts) - exact).abs() <= 1e-5 * exact);
    }

    // a field written at mesh nodes reads back with the same node values
    #[test]
    fn field_csv_round_trip(k in 0.1..2.0f64, p in 0.5..1.5f64) {
        let d = disk();
        let mesh = MeshSpec { n_radial: 4, n_theta: 8, stencil: 8 };
        let f = PiecewiseField::new(
            d.clone(),
            Part::func(move |z| C64::new(k * z.re, z.im * z.im)),
            Part::func(move |z| C64::new(p, 0.0) / (z * z)),
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let sc = Sidecar::new(&FIELD_COLUMNS, "h", &QuadratureSpec::default()).with_extra(field_extra(&mesh, 0));
        write_table(&path, &sc, &field_rows(&f, &mesh)).unwrap();
        let g = read_field(&path, d.clone()).unwrap();
        for side in [Side::Interior, Side::Exterior] {
            for z in patchflow::fields::MeshPart::node_positions(&d, side, &mesh) {
                prop_assert!((g.side_value(side, z) - f.side_value(side, z)).norm() <= 1e-11 * (1.0 + f.side_value(side, z).norm()));
            }
        }
    }
}
