//! Acceptance suite: one pass/fail line per criterion.
//!
//! `cargo test -p wgcloak --test acceptance` runs everything; numeric
//! arguments select criteria (`-- 1 5 11`). The process exits non-zero on a
//! failed criterion only when ACCEPTANCE_STRICT=1.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wgcloak::asymptotics::{compute_asymptotic_data, default_constants_path, load_or_compute_profile_constant, validate_resonators};
use wgcloak::design::{
    default_window, procedure_cloak_three, procedure_cloak_two, procedure_phase_shifter, procedure_zero_reflection,
    procedure_zero_transmission, sweep, DesignOptions, SearchSettings,
};
use wgcloak::geometry::{add_resonator, make_geometry, Geometry, Point, Polygon, Resonator, Wall};
use wgcloak::scattering::{half_guide_reflections, solve_scattering_pair, structure_residual};
use wgcloak::{scattering_matrix, shapes, Complex64, Result, SolverParams};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn triangle() -> Geometry {
    let t = Polygon::from_coords(&[(-0.5, 0.2), (0.1, 0.8), (0.4, 0.3)]).unwrap();
    make_geometry(1.5, vec![t], vec![]).unwrap()
}

fn params(h: f64) -> SolverParams {
    SolverParams { h, ..Default::default() }
}

fn c_xi() -> Result<f64> {
    Ok(load_or_compute_profile_constant(&default_constants_path())?.value)
}

type Check = fn() -> Result<(bool, String)>;

fn bare_strip_exactness() -> Result<(bool, String)> {
    let t0 = Instant::now();
    let s = scattering_matrix(&Geometry::bare_strip(1.0), &SolverParams { h: 0.02, x_t: Some(3.0), ..Default::default() })?;
    let secs = t0.elapsed().as_secs_f64();
    let (r, t) = (s.r_plus.norm().max(s.r_minus.norm()), (s.t - 1.0).norm());
    Ok((r < 1e-6 && t < 1e-4 && secs < 10.0, format!("|R| {r:.2e} (< 1e-6), |T-1| {t:.2e} (< 1e-4), {secs:.1} s (< 10 s)")))
}

fn unitarity() -> Result<(bool, String)> {
    let g = triangle();
    let coarse = scattering_matrix(&g, &params(0.02))?.unitarity_defect();
    let fine = scattering_matrix(&g, &params(0.01))?.unitarity_defect();
    let ratio = coarse / fine;
    // The discrete problem conserves energy exactly, so both defects can sit at roundoff.
    let decreasing = ratio >= 3.0 || fine < 1e-10;
    Ok((
        coarse < 1e-3 && decreasing,
        format!("defect h=0.02 {coarse:.2e} (< 1e-3), h=0.01 {fine:.2e}, ratio {ratio:.2} (>= 3 or roundoff)"),
    ))
}

fn reciprocity() -> Result<(bool, String)> {
    let s = scattering_matrix(&triangle(), &params(0.02))?;
    Ok((s.reciprocity_defect < 1e-8, format!("|T_left - T_right| {:.2e} (< 1e-8)", s.reciprocity_defect)))
}

fn structure_identity() -> Result<(bool, String)> {
    let g = triangle();
    let sc = solve_scattering_pair(&g, &params(0.02))?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut pts = Vec::new();
    while pts.len() < 100 {
        let p = Point::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.0..1.0));
        if g.obstacles.iter().all(|o| !o.contains(p)) {
            pts.push(p);
        }
    }
    let res = structure_residual(&sc.w_plus, &sc.w_minus, &sc.s, &pts)?;
    Ok((res < 1e-3, format!("max residual over 100 points {res:.2e} (< 1e-3)")))
}

fn analytic_identities() -> Result<(bool, String)> {
    let g = triangle();
    let junctions = [Point::new(-2.5, 1.0), Point::new(2.0, 1.0)];
    let data = compute_asymptotic_data(&g, &junctions, &params(0.05))?;
    let w = data.omega;
    let mut im_gamma: f64 = 0.0;
    let mut far: f64 = 0.0;
    for j in 0..2 {
        let (wp, wm) = (data.w_plus[j], data.w_minus[j]);
        let expect = (wp.norm_sqr() + wm.norm_sqr()) / 4.0;
        im_gamma = im_gamma.max(((w * data.gamma[j]).im - expect).abs() / expect);
        let (sp, sm) = data.far_field[j];
        far = far.max((sp - I * wm / (2.0 * w)).norm() / (wm / (2.0 * w)).norm());
        far = far.max((sm - I * wp / (2.0 * w)).norm() / (wp / (2.0 * w)).norm());
    }
    let sym = (data.coupling[0][1] - data.coupling[1][0]).norm();
    let c = load_or_compute_profile_constant(&default_constants_path())?;
    let drift = (c.value - c.coarse_value).abs();
    let pass = im_gamma < 0.02 && far < 0.02 && sym < 1e-4 && c.imag < 1e-10 && drift < 5e-4;
    Ok((
        pass,
        format!(
            "Im(wG) rel {im_gamma:.2e} (< 2%), s± rel {far:.2e} (< 2%), |g1(A2)-g2(A1)| {sym:.2e} (< 1e-4), Im C {:.1e} (< 1e-10), C {:.5} drift {drift:.1e} (< 5e-4)",
            c.imag, c.value
        ),
    ))
}

fn asymptotic_consistency() -> Result<(bool, String)> {
    let eps = [0.3, 0.1, 0.03, 0.01];
    let etas: Vec<Vec<f64>> = (0..21).map(|k| vec![-5.0 + 0.5 * k as f64]).collect();
    let v = validate_resonators(&Geometry::bare_strip(1.0), &[0.0], Wall::Top, &eps, &etas, 1, c_xi()?, &SearchSettings::default())?;
    let errs: Vec<f64> = eps
        .iter()
        .map(|&e| {
            v.points
                .iter()
                .filter(|p| p.eps == e)
                .map(|p| (p.fem.r_plus - (-I / (2.0 * p.etas[0] + I))).norm())
                .fold(0.0, f64::max)
        })
        .collect();
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let last = errs[errs.len() - 1];
    let shown: Vec<String> = errs.iter().map(|e| format!("{e:.4}")).collect();
    Ok((decreasing && last < 0.1, format!("max errors {} (strictly decreasing, last < 0.1)", shown.join(" "))))
}

fn circle_loci() -> Result<(bool, String)> {
    let settings = SearchSettings::default();
    let g = add_resonator(&Geometry::bare_strip(1.0), Resonator::top(0.0, 0.3, 0.625))?;
    let (a, b) = default_window(settings.params.omega, 0, 0.3);
    let tr = sweep(&g, &[0], a, b, 41, &settings)?;
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, fit, centre) in [("R", tr.r_fit, -0.5), ("T", tr.t_fit, 0.5)] {
        let Some(f) = fit else {
            return Ok((false, format!("{name} trace is not a circle")));
        };
        let rel = f.residual / f.radius;
        let dc = (f.center - centre).norm() / 0.5;
        let dr = (f.radius - 0.5).abs() / 0.5;
        pass &= rel < 0.05 && dc < 0.05 && dr < 0.05;
        detail.push(format!("{name}: residual {:.1}% center {:.1}% radius {:.1}%", 100.0 * rel, 100.0 * dc, 100.0 * dr));
    }
    Ok((pass, format!("{} (all < 5%)", detail.join(", "))))
}

fn zero_transmission() -> Result<(bool, String)> {
    let r = procedure_zero_transmission(&Geometry::bare_strip(1.0), 0.01, 0.0, &DesignOptions::default())?;
    let s = r.achieved;
    let (t, rr) = (s.t.norm(), (s.r_plus + 1.0).norm());
    Ok((t < 1e-2 && rr < 0.05, format!("min |T| {t:.2e} (< 1e-2), |R+1| {rr:.2e} (< 0.05), length {:.6}", r.final_geometry.resonators[0].length)))
}

fn zero_reflection_fish() -> Result<(bool, String)> {
    let fish = shapes::fish();
    let opts = DesignOptions::default();
    let first = procedure_zero_reflection(&fish, 0.01, &opts)?;
    let p = first.final_geometry.resonators[0].p;
    let fixed = DesignOptions { placement: Some(p), ..opts };
    let mut lengths = Vec::new();
    for eps in [0.1, 0.03] {
        lengths.push(procedure_zero_reflection(&fish, eps, &fixed)?.final_geometry.resonators[0].length);
    }
    let l = first.final_geometry.resonators[0].length;
    lengths.push(l);
    let s = first.achieved;
    let trend = lengths.windows(2).all(|w| w[0] < w[1]) && l < 0.625;
    Ok((
        s.r_plus.norm() < 0.05 && s.t.norm() > 0.99 && trend,
        format!(
            "p {p:.4}: |R| {:.2e} (< 0.05), |T| {:.6} (> 0.99); l* at eps 0.1/0.03/0.01 = {:.4}/{:.4}/{:.4} (increasing, < 0.625)",
            s.r_plus.norm(),
            s.t.norm(),
            lengths[0],
            lengths[1],
            lengths[2]
        ),
    ))
}

fn symmetric_crossing() -> Result<(bool, String)> {
    let opts = DesignOptions { placement: Some(0.0), ..Default::default() };
    let r = procedure_zero_reflection(&shapes::star(), 0.3, &opts)?;
    let (rn, rd) = half_guide_reflections(&r.final_geometry, opts.params())?;
    let s = r.achieved;
    let id = (s.r_plus - 0.5 * (rn + rd)).norm();
    let (un, ud) = ((rn.norm() - 1.0).abs(), (rd.norm() - 1.0).abs());
    Ok((
        s.r_plus.norm() < 1e-3 && id < 1e-3 && un < 1e-3 && ud < 1e-3,
        format!("min |R| {:.2e}, |R-(RN+RD)/2| {id:.2e}, ||RN|-1| {un:.1e}, ||RD|-1| {ud:.1e} (all < 1e-3)", s.r_plus.norm()),
    ))
}

fn phase_shifter() -> Result<(bool, String)> {
    let r = procedure_phase_shifter(PI / 4.0, 0.01, &DesignOptions::default())?;
    let s = r.achieved;
    let res = &r.final_geometry.resonators;
    let equal = res.len() == 2 && res[0].length == res[1].length && r.steps.len() == 1 && r.steps[0].resonators.len() == 2;
    let dt = (s.t - Complex64::from_polar(1.0, PI / 4.0)).norm();
    Ok((
        s.r_plus.norm() < 0.05 && dt < 0.05 && equal,
        format!("|R| {:.2e} (< 0.05), |T-e^(i pi/4)| {dt:.2e} (< 0.05), single shared length {:.6}: {equal}", s.r_plus.norm(), res[0].length),
    ))
}

fn cloaking() -> Result<(bool, String)> {
    let opts = DesignOptions::default();
    let t0 = Instant::now();
    let two = procedure_cloak_two(&shapes::penetrable_fish(6.0)?, 0.01, &opts)?;
    let s2 = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let three = procedure_cloak_three(&shapes::dino(), 0.01, &opts)?;
    let s3 = t1.elapsed().as_secs_f64();
    let (e2, e3) = ((two.achieved.t - 1.0).norm(), (three.achieved.t - 1.0).norm());
    Ok((
        e2 < 0.05 && e3 < 0.05 && s2 < 1800.0 && s3 < 1800.0,
        format!("two resonators, penetrable fish: |T-1| {e2:.2e} in {s2:.0} s; three resonators, dino: |T-1| {e3:.2e} in {s3:.0} s (< 0.05, < 30 min)"),
    ))
}

fn two_resonator_limit() -> Result<(bool, String)> {
    let omega = 0.8 * PI;
    let p2 = (PI - PI / 4.0) / (2.0 * omega) + 2.0 * PI / omega;
    let etas: Vec<Vec<f64>> = (0..21).map(|k| vec![-5.0 + 0.5 * k as f64; 2]).collect();
    let v = validate_resonators(&Geometry::bare_strip(0.5), &[0.0, p2], Wall::Top, &[0.01], &etas, 0, c_xi()?, &SearchSettings::default())?;
    let (_, er, et) = v.max_errors()[0];
    Ok((er.max(et) < 0.15, format!("p2 {p2}: max |R-R0| {er:.4}, max |T-T0| {et:.4} (< 0.15)")))
}

fn main() {
    let criteria: [(&str, Check); 13] = [
        ("bare strip exactness", bare_strip_exactness),
        ("unitarity", unitarity),
        ("reciprocity", reciprocity),
        ("structure identity", structure_identity),
        ("analytic identities", analytic_identities),
        ("asymptotic consistency", asymptotic_consistency),
        ("circle loci", circle_loci),
        ("zero transmission", zero_transmission),
        ("zero reflection (fish)", zero_reflection_fish),
        ("symmetric exact crossing", symmetric_crossing),
        ("phase shifter", phase_shifter),
        ("cloaking", cloaking),
        ("two-resonator limit", two_resonator_limit),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        ran += 1;
        let t = Instant::now();
        let (ok, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!("{} {id:>2} {name}: {detail} [{:.0} s]", if ok { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    }
    println!("acceptance: {}/{ran} criteria passed", ran - failed);
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
