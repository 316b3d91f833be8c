use std::f64::consts::PI;

use proptest::prelude::*;
use wgcloak::asymptotics::one_resonator_limit;
use wgcloak::design::fit_circle;
use wgcloak::{
    add_resonator, generate_mesh, make_geometry, resonant_length, scattering_matrix, Complex64, Geometry, Polygon, Resonator,
    SolverParams, Wall,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Symmetric unitary 2x2 matrix e^{iφ}[[cos θ e^{iψ}, i sin θ], [i sin θ, cos θ e^{-iψ}]].
fn unitary(phi: f64, theta: f64, psi: f64) -> (Complex64, Complex64, Complex64) {
    let g = Complex64::from_polar(1.0, phi);
    (g * Complex64::from_polar(theta.cos(), psi), g * I * theta.sin(), g * Complex64::from_polar(theta.cos(), -psi))
}

fn wall() -> impl Strategy<Value = Wall> {
    prop_oneof![Just(Wall::Top), Just(Wall::Bottom)]
}

proptest! {
    #[test]
    fn resonant_length_period(omega in 0.1f64..3.1, m in 0u32..20) {
        let step = resonant_length(omega, m + 1) - resonant_length(omega, m);
        prop_assert!((step - PI / omega).abs() < 1e-12 * (1.0 + resonant_length(omega, m + 1)));
    }

    #[test]
    fn insertion_order_irrelevant(
        rs in prop::collection::vec((-6.0f64..6.0, 0.01f64..0.6, 0.1f64..1.5, wall()), 1..4),
    ) {
        let res: Vec<Resonator> = rs.iter().map(|&(p, e, l, w)| Resonator::new(p, e, l, w)).collect();
        let build = |order: &mut dyn Iterator<Item = &Resonator>| -> Result<Geometry, String> {
            let mut g = Geometry::bare_strip(1.0);
            for r in order {
                g = add_resonator(&g, *r).map_err(|e| e.to_string())?;
            }
            Ok(g)
        };
        let fwd = build(&mut res.iter());
        let rev = build(&mut res.iter().rev());
        prop_assert_eq!(fwd.is_ok(), rev.is_ok());
        if let (Ok(a), Ok(b)) = (fwd, rev) {
            let mut pa: Vec<f64> = a.resonators.iter().map(|r| r.p).collect();
            let mut pb: Vec<f64> = b.resonators.iter().map(|r| r.p).collect();
            pa.sort_by(f64::total_cmp);
            pb.sort_by(f64::total_cmp);
            prop_assert_eq!(pa, pb);
        }
    }

    /// With far-field traces W₊ = e^{iωp} + R₊e^{−iωp}, W₋ = Te^{−iωp} of any
    /// symmetric unitary S, the one-resonator limit conserves energy for every η.
    #[test]
    fn one_resonator_limit_conserves_energy(
        phi in 0.0f64..2.0 * PI, theta in 0.0f64..PI, psi in 0.0f64..2.0 * PI,
        p in -8.0f64..-2.0, eta in -20.0f64..20.0,
    ) {
        let w = 0.8 * PI;
        let (rp, t, _) = unitary(phi, theta, psi);
        let wp = Complex64::from_polar(1.0, w * p) + rp * Complex64::from_polar(1.0, -w * p);
        let wm = t * Complex64::from_polar(1.0, -w * p);
        prop_assume!(wp.norm() + wm.norm() > 1e-6);
        let lp = one_resonator_limit(rp, t, wp, wm, eta).unwrap();
        prop_assert!(lp.energy_defect() < 1e-12, "defect {}", lp.energy_defect());
    }

    /// R⁰(η) is a Möbius image of the real line, so four samples are concyclic.
    #[test]
    fn one_resonator_limit_on_circle(
        phi in 0.0f64..2.0 * PI, theta in 0.1f64..1.4, psi in 0.0f64..2.0 * PI, p in -8.0f64..-2.0,
        etas in prop::collection::btree_set(-300i32..300, 4),
    ) {
        let w = 0.8 * PI;
        let (rp, t, _) = unitary(phi, theta, psi);
        let wp = Complex64::from_polar(1.0, w * p) + rp * Complex64::from_polar(1.0, -w * p);
        let wm = t * Complex64::from_polar(1.0, -w * p);
        prop_assume!(wp.norm_sqr() + wm.norm_sqr() > 1e-3);
        let pts: Vec<Complex64> = etas.iter().map(|&k| one_resonator_limit(rp, t, wp, wm, k as f64 / 30.0).unwrap().r0).collect();
        let c = fit_circle(&pts).unwrap();
        prop_assert!(c.residual < 1e-8 * (1.0 + c.radius), "residual {}", c.residual);
    }

    #[test]
    fn circle_fit_recovers_circle(
        cx in -2.0f64..2.0, cy in -2.0f64..2.0, r in 0.05f64..3.0,
        angles in prop::collection::vec(0.0f64..2.0 * PI, 5..20),
    ) {
        let c0 = Complex64::new(cx, cy);
        let mut a = angles;
        a.sort_by(f64::total_cmp);
        prop_assume!(a[a.len() - 1] - a[0] > 0.5);
        let pts: Vec<Complex64> = a.iter().map(|&t| c0 + Complex64::from_polar(r, t)).collect();
        let c = fit_circle(&pts).unwrap();
        prop_assert!((c.center - c0).norm() < 1e-8 * (1.0 + r));
        prop_assert!((c.radius - r).abs() < 1e-8 * (1.0 + r));
    }
}

fn triangle() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-0.8f64..0.8, 0.15f64..0.85), 3)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn mesh_area_matches_domain(tri in triangle(), eps in 0.02f64..0.3, len in 0.2f64..1.0) {
        let Ok(poly) = Polygon::from_coords(&tri) else { return Ok(()) };
        prop_assume!(poly.area() > 0.02);
        let area = poly.area();
        let g = make_geometry(1.5, vec![poly], vec![]).unwrap();
        let g = add_resonator(&g, Resonator::new(-2.5, eps, len, Wall::Top)).unwrap();
        let x_t = g.d + 2.0;
        let m = generate_mesh(&g, 0.1, x_t).unwrap();
        let expected = 2.0 * x_t - area + eps * len;
        prop_assert!((m.total_area() - expected).abs() < 1e-10 * expected);
    }

    #[test]
    fn scattering_unitary_and_reciprocal(tri in triangle()) {
        let Ok(poly) = Polygon::from_coords(&tri) else { return Ok(()) };
        prop_assume!(poly.area() > 0.02);
        let g = make_geometry(1.5, vec![poly], vec![]).unwrap();
        let params = SolverParams { h: 0.1, ..SolverParams::default() };
        let s = scattering_matrix(&g, &params).unwrap();
        prop_assert!(s.energy_defect() < 1e-10, "energy defect {}", s.energy_defect());
        prop_assert!(s.unitarity_defect() < 1e-10, "unitarity defect {}", s.unitarity_defect());
        prop_assert!(s.reciprocity_defect < 1e-8, "reciprocity defect {}", s.reciprocity_defect);
    }

    #[test]
    fn mirror_symmetric_reflections_agree(half in prop::collection::vec((0.05f64..0.8, 0.15f64..0.85), 2)) {
        let (a, b) = (half[0], half[1]);
        prop_assume!((a.1 - b.1).abs() > 0.1);
        let (lo, hi) = if a.1 < b.1 { (a, b) } else { (b, a) };
        let quad = Polygon::from_coords(&[(-lo.0, lo.1), (lo.0, lo.1), (hi.0, hi.1), (-hi.0, hi.1)]).unwrap();
        let g = make_geometry(1.5, vec![quad], vec![]).unwrap();
        prop_assert!(g.fully_symmetric());
        let params = SolverParams { h: 0.1, ..SolverParams::default() };
        let s = scattering_matrix(&g, &params).unwrap();
        prop_assert!((s.r_plus - s.r_minus).norm() < 1e-8, "R+ {} R- {}", s.r_plus, s.r_minus);
    }
}
