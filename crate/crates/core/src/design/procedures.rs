//! Composite design procedures built from placement and length tuning.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::placement::{guide_fields, placement_unit_transmission, placement_zero_reflection, refine_placement_exact, wall_traces, Placement, PlacementRule};
use super::tuning::{circle_membership, evaluate_lengths, refine, refine_interior, scan_resonance, tune_length, Membership, SweepRow};
use super::{DesignOptions, DesignReport, DesignStep, Objective, Side};
use crate::asymptotics::{limit_circle, Coefficient};
use crate::error::{Error, Result};
use crate::geometry::{add_resonator, resonant_length, Geometry, Resonator};
use crate::scattering::{scattering_matrix, SMatrix};

fn p_min(g: &Geometry, opts: &DesignOptions) -> f64 {
    opts.p_min.unwrap_or(g.d + 2.0)
}

fn base_length(opts: &DesignOptions) -> f64 {
    resonant_length(opts.params().omega, opts.m)
}

/// Largest x covered by obstacles, index regions or resonator feet.
fn right_extent(g: &Geometry) -> f64 {
    let obs = g.obstacle_extent().map_or(f64::NEG_INFINITY, |e| e.1);
    g.resonators.iter().map(|r| r.foot().1).fold(obs, f64::max).max(0.0)
}

fn reflection(s: &SMatrix) -> f64 {
    s.r_plus.norm()
}

/// Adds one resonator at the best zero-reflection placement and tunes it.
fn zero_reflection_step(g: &Geometry, eps: f64, opts: &DesignOptions, label: &str) -> Result<(Geometry, DesignStep)> {
    let params = opts.params();
    let s = scattering_matrix(g, params)?;
    if s.t.norm() < 0.1 {
        return Err(Error::SmallTransmission(s.t.norm()));
    }
    let candidates = match opts.placement {
        Some(p) => vec![Placement::fixed(p)],
        None => {
            let c = placement_zero_reflection(&s, opts.side, p_min(g, opts), 2)?;
            if opts.exact_placement {
                refine_placement_exact(g, &c, opts.wall, params)?
            } else {
                c
            }
        }
    };
    let j = g.resonators.len();
    let window = opts.window_for(eps);
    let mut best: Option<(f64, Placement, Geometry, Vec<SweepRow>)> = None;
    for c in candidates {
        let gc = add_resonator(g, Resonator::new(c.p, eps, base_length(opts), opts.wall))?;
        let rows = scan_resonance(&gc, &[j], window, &opts.search)?;
        let v = rows.iter().map(|r| reflection(&r.s)).fold(f64::INFINITY, f64::min);
        log::info!("placement p = {:.6}: coarse min |R| = {v:.4e}", c.p);
        if best.as_ref().is_none_or(|b| v < b.0) {
            best = Some((v, c, gc, rows));
        }
    }
    let (_, c, gc, rows) = best.expect("at least one placement candidate");
    let t = refine(&gc, &[j], &reflection, rows, eps, &opts.search)?;
    let step = DesignStep {
        label: label.to_string(),
        resonators: vec![j],
        placements: vec![c],
        length: t.length,
        value: t.value,
        s: t.s,
        trace: t.trace,
    };
    Ok((gc.with_lengths(&[j], t.length), step))
}

/// One resonator tuned for |R₊| → 0, placed far from the obstacle on
/// `opts.side` (or at `opts.placement`).
pub fn procedure_zero_reflection(g: &Geometry, eps: f64, opts: &DesignOptions) -> Result<DesignReport> {
    let (fin, step) = zero_reflection_step(g, eps, opts, "zero_reflection")?;
    let s = step.s;
    Ok(DesignReport {
        final_geometry: fin,
        objective: Objective::ZeroReflection,
        achieved: s,
        tolerances: vec![("|R| < 0.05".into(), s.r_plus.norm() < 0.05), ("|T| > 0.99".into(), s.t.norm() > 0.99)],
        steps: vec![step],
        notes: vec![],
    })
}

/// One resonator at `p` tuned for |T| → 0.
pub fn procedure_zero_transmission(g: &Geometry, eps: f64, p: f64, opts: &DesignOptions) -> Result<DesignReport> {
    let j = g.resonators.len();
    let gc = add_resonator(g, Resonator::new(p, eps, base_length(opts), opts.wall))?;
    let f = |s: &SMatrix| s.t.norm();
    let t = tune_length(&gc, &[j], &f, eps, opts.window_for(eps), &opts.search)?;
    let s = t.s;
    Ok(DesignReport {
        final_geometry: gc.with_lengths(&[j], t.length),
        objective: Objective::ZeroTransmission,
        achieved: s,
        tolerances: vec![("|T| < 1e-2".into(), s.t.norm() < 1e-2)],
        steps: vec![DesignStep {
            label: "zero_transmission".into(),
            resonators: vec![j],
            placements: vec![Placement::fixed(p)],
            length: t.length,
            value: t.value,
            s,
            trace: t.trace,
        }],
        notes: vec![],
    })
}

/// μ moved away from π, where the construction degenerates.
fn usable_phase(mu: f64) -> Result<(f64, Option<String>)> {
    if !(mu > 0.0 && mu < 2.0 * PI) {
        return Err(Error::Degenerate(format!("phase {mu} must lie in (0, 2 pi)")));
    }
    if (mu - PI).abs() > 0.05 {
        return Ok((mu, None));
    }
    let moved = if mu >= PI { PI + 0.05 } else { PI - 0.05 };
    Ok((moved, Some(format!("phase {mu:.6} is within 0.05 of pi; using {moved:.6}"))))
}

/// Spacing (π − μ)/(2ω) + kπ/ω of the two phase-shifter resonators.
fn phase_spacing(mu: f64, omega: f64, extra: Option<u32>) -> (f64, i64) {
    let period = PI / omega;
    let offset = ((PI - mu) / (2.0 * omega)).rem_euclid(period);
    let k = extra.map_or_else(|| ((2.0 - offset) / period).ceil().max(0.0) as i64, |k| k as i64);
    (offset + k as f64 * period, k)
}

/// Appends a phase shifter at p₁ and p₂ = p₁ + spacing to `g`. With
/// `corrections` > 0 the equal-length shifter is re-placed after tuning:
/// arg T moves by −2ω Δp₂, so p₂ is shifted by the measured phase error of
/// the total T against `goal` and the common length is tuned again.
#[allow(clippy::too_many_arguments)]
fn phase_shifter_on(
    g: &Geometry,
    p1: f64,
    mu: f64,
    eps: f64,
    opts: &DesignOptions,
    two_step: bool,
    goal: Complex64,
    corrections: u32,
) -> Result<(Geometry, Vec<DesignStep>)> {
    let w = opts.params().omega;
    let (spacing, k) = phase_spacing(mu, w, opts.extra_periods);
    let p2 = p1 + spacing;
    let l0 = base_length(opts);
    let window = opts.window_for(eps);
    let j = g.resonators.len();
    let pl1 = Placement::fixed(p1);
    if !two_step {
        let mut steps: Vec<DesignStep> = Vec::new();
        let mut best: Option<(f64, Geometry)> = None;
        let mut p2 = p2;
        for pass in 0..=corrections {
            let g2 = add_resonator(&add_resonator(g, Resonator::new(p1, eps, l0, opts.wall))?, Resonator::new(p2, eps, l0, opts.wall))?;
            // Far from resonance the bare strip is transparent as well; look for the dip.
            let coarse = scan_resonance(&g2, &[j, j + 1], window, &opts.search)?;
            let t = refine_interior(&g2, &[j, j + 1], &reflection, coarse, eps, &opts.search)?;
            let miss = (t.s.t - goal).norm();
            if best.as_ref().is_none_or(|b| miss < b.0) {
                best = Some((miss, g2.with_lengths(&[j, j + 1], t.length)));
            }
            let rule = if pass == 0 { PlacementRule::PhaseShift } else { PlacementRule::PhaseCorrection };
            steps.push(DesignStep {
                label: if pass == 0 { "phase_shift_equal_lengths".into() } else { format!("phase_shift_correction_{pass}") },
                resonators: vec![j, j + 1],
                placements: vec![pl1, Placement { p: p2, rule, branch: 0, period: k }],
                length: t.length,
                value: t.value,
                s: t.s,
                trace: t.trace,
            });
            if miss < 0.01 {
                break;
            }
            p2 -= (goal / t.s.t).arg() / (2.0 * w);
        }
        let (miss, fin) = best.unwrap();
        // Report the best pass last so that it is the achieved state.
        let at = steps.iter().position(|st| (st.s.t - goal).norm() == miss).unwrap();
        let chosen = steps.remove(at);
        steps.push(chosen);
        return Ok((fin, steps));
    }
    let pl2 = Placement { p: p2, rule: PlacementRule::PhaseShift, branch: 0, period: k };
    // First resonator alone: reflection −cos θ₁ e^{iθ₁} (shifted to p₁), θ₁ = (μ + π)/2.
    let th = 0.5 * (mu + PI);
    let target = -th.cos() * Complex64::from_polar(1.0, th) * Complex64::from_polar(1.0, 2.0 * w * p1);
    let g1 = add_resonator(g, Resonator::new(p1, eps, l0, opts.wall))?;
    let f1 = move |s: &SMatrix| (s.r_plus - target).norm();
    let t1 = tune_length(&g1, &[j], &f1, eps, window, &opts.search)?;
    let g1 = g1.with_lengths(&[j], t1.length);
    let g2 = add_resonator(&g1, Resonator::new(p2, eps, l0, opts.wall))?;
    let t2 = tune_length(&g2, &[j + 1], &reflection, eps, window, &opts.search)?;
    let steps = vec![
        DesignStep { label: "phase_shift_target_reflection".into(), resonators: vec![j], placements: vec![pl1], length: t1.length, value: t1.value, s: t1.s, trace: t1.trace },
        DesignStep { label: "phase_shift_zero_reflection".into(), resonators: vec![j + 1], placements: vec![pl2], length: t2.length, value: t2.value, s: t2.s, trace: t2.trace },
    ];
    Ok((g2.with_lengths(&[j + 1], t2.length), steps))
}

/// Two resonators on the bare strip, at 0 and (π − μ)/(2ω) + kπ/ω, tuned for
/// zero reflection so that T ≈ e^{iμ}.
pub fn procedure_phase_shifter(mu: f64, eps: f64, opts: &DesignOptions) -> Result<DesignReport> {
    let (mu_used, note) = usable_phase(mu)?;
    let target = Complex64::from_polar(1.0, mu);
    let corrections = opts.phase_corrections.unwrap_or(0);
    let (fin, steps) = phase_shifter_on(&Geometry::bare_strip(0.5), 0.0, mu_used, eps, opts, opts.phase_two_step, target, corrections)?;
    let s = steps.last().unwrap().s;
    let mut notes: Vec<String> = note.into_iter().collect();
    if !opts.phase_two_step {
        notes.push("both resonators share one tuned length".into());
    }
    Ok(DesignReport {
        final_geometry: fin,
        objective: Objective::PhaseShift(mu),
        achieved: s,
        tolerances: vec![
            ("|R| < 0.05".into(), s.r_plus.norm() < 0.05),
            ("|T - exp(i mu)| < 0.05".into(), (s.t - target).norm() < 0.05),
        ],
        steps,
        notes,
    })
}

/// Distance from the obstacle to the first phase-shifter resonator.
pub const SHIFTER_GAP: f64 = 4.0;

fn cloak_tolerances(s: &SMatrix) -> Vec<(String, bool)> {
    vec![("|T - 1| < 0.05".into(), (s.t - 1.0).norm() < 0.05)]
}

/// Zero reflection, then a downstream phase shifter compensating arg T.
pub fn procedure_cloak_three(g: &Geometry, eps: f64, opts: &DesignOptions) -> Result<DesignReport> {
    let (g1, st1) = zero_reflection_step(g, eps, opts, "zero_reflection")?;
    let mu = (-st1.s.t.arg()).rem_euclid(2.0 * PI);
    let mut steps = vec![st1];
    let mut notes = Vec::new();
    if mu.min(2.0 * PI - mu) < 0.05 {
        notes.push(format!("transmission phase {:.4} is already close to zero; phase shifter skipped", -mu));
        let s = steps[0].s;
        return Ok(DesignReport { final_geometry: g1, objective: Objective::Cloak, achieved: s, tolerances: cloak_tolerances(&s), steps, notes });
    }
    let (mu_used, note) = usable_phase(mu)?;
    notes.extend(note);
    notes.push(format!("compensated phase mu = {mu_used:.6}"));
    // The shifter's dip is sharp; at a gap of 2 the first evanescent mode
    // (decay 0.6π at ω = 0.8π) still couples it to the obstacle by ~2%.
    let p1 = right_extent(&g1) + SHIFTER_GAP;
    let corrections = opts.phase_corrections.unwrap_or(2);
    let (fin, more) = phase_shifter_on(&g1, p1, mu_used, eps, opts, false, Complex64::new(1.0, 0.0), corrections)?;
    steps.extend(more);
    let s = steps.last().unwrap().s;
    Ok(DesignReport { final_geometry: fin, objective: Objective::Cloak, achieved: s, tolerances: cloak_tolerances(&s), steps, notes })
}

/// First resonator: placed where the predicted T-circle center is furthest
/// from the real axis, length chosen where T crosses 𝒞(½, ½).
fn cloak_step_one(g: &Geometry, eps: f64, opts: &DesignOptions) -> Result<(Geometry, DesignStep)> {
    let params = opts.params();
    let period = PI / params.omega;
    let pm = p_min(g, opts);
    let n = 24;
    let ps: Vec<f64> = (0..n)
        .map(|k| {
            let off = pm + period * k as f64 / n as f64;
            if opts.side == Side::Left {
                -off
            } else {
                off
            }
        })
        .collect();
    let p = match opts.placement {
        Some(p) => Placement::fixed(p),
        None => {
            let sc = guide_fields(g, pm + period, params)?;
            let traces = wall_traces(&sc, opts.wall, &ps)?;
            let mut best = (f64::NEG_INFINITY, 0);
            for (k, &(wp, wm)) in traces.iter().enumerate() {
                let Ok((c, _)) = limit_circle(sc.s.r_plus, sc.s.t, wp, wm, Coefficient::Transmission) else { continue };
                if c.im.abs() > best.0 {
                    best = (c.im.abs(), k);
                }
            }
            Placement { p: ps[best.1], rule: PlacementRule::CenterSearch, branch: 0, period: 0 }
        }
    };
    let j = g.resonators.len();
    let gc = add_resonator(g, Resonator::new(p.p, eps, base_length(opts), opts.wall))?;
    let mut trace = scan_resonance(&gc, &[j], opts.window_for(eps), &opts.search)?;
    let f = |s: &SMatrix| (s.t - 0.5).norm() - 0.5;
    let brackets: Vec<(SweepRow, SweepRow)> = trace
        .windows(2)
        .filter(|w| f(&w[0].s).signum() != f(&w[1].s).signum() && w[0].s.t.norm().max(w[1].s.t.norm()) > 0.1)
        .map(|w| (w[0], w[1]))
        .collect();
    let mut hits: Vec<SweepRow> = Vec::new();
    for (mut a, mut b) in brackets {
        while b.length - a.length > 1e-7 * eps {
            let m = evaluate_lengths(&gc, &[j], &[0.5 * (a.length + b.length)], &opts.search)?[0];
            trace.push(m);
            if f(&m.s).signum() == f(&a.s).signum() {
                a = m;
            } else {
                b = m;
            }
            if f(&m.s).abs() < 1e-9 {
                break;
            }
        }
        let hit = if f(&a.s).abs() < f(&b.s).abs() { a } else { b };
        if matches!(circle_membership(hit.s.t, 0.02), Membership::On { .. }) && hit.s.t.norm() > 0.1 {
            hits.push(hit);
        }
    }
    trace.sort_by(|x, y| x.length.total_cmp(&y.length));
    let Some(hit) = hits.into_iter().max_by(|x, y| x.s.t.norm().total_cmp(&y.s.t.norm())) else {
        return Err(Error::Step1Failure(format!(
            "no length puts T on C(1/2,1/2) away from 0 and 1 for p = {:.6}; try the three-resonator procedure",
            p.p
        )));
    };
    let step = DesignStep {
        label: "cloak_circle".into(),
        resonators: vec![j],
        placements: vec![p],
        length: hit.length,
        value: f(&hit.s),
        s: hit.s,
        trace,
    };
    Ok((gc.with_lengths(&[j], hit.length), step))
}

/// Two resonators: the first moves T onto 𝒞(½, ½), the second cancels the
/// reflection at a position where the limit transmission is then one.
pub fn procedure_cloak_two(g: &Geometry, eps: f64, opts: &DesignOptions) -> Result<DesignReport> {
    let params = opts.params();
    let s0 = scattering_matrix(g, params)?;
    let mut notes = Vec::new();
    if (s0.t - 1.0).norm() < 1e-3 {
        notes.push("guide is already transparent; nothing to do".into());
        return Ok(DesignReport { final_geometry: g.clone(), objective: Objective::Cloak, achieved: s0, tolerances: cloak_tolerances(&s0), steps: vec![], notes });
    }
    if s0.t.norm() < 0.1 {
        return Err(Error::SmallTransmission(s0.t.norm()));
    }
    let mut steps = Vec::new();
    let (g1, s1) = if matches!(circle_membership(s0.t, 0.02), Membership::On { .. }) {
        notes.push("T already lies on C(1/2,1/2); first step skipped".into());
        (g.clone(), s0)
    } else {
        let (g1, st) = cloak_step_one(g, eps, opts)?;
        let s1 = st.s;
        steps.push(st);
        (g1, s1)
    };
    let Membership::On { tau } = circle_membership(s1.t, 0.02) else {
        return Err(Error::Step1Failure(format!("T = {} is not on C(1/2,1/2)", s1.t)));
    };
    let pl = placement_unit_transmission(&s1, opts.side, tau, p_min(&g1, opts), 1)?[0];
    let j = g1.resonators.len();
    let gc = add_resonator(&g1, Resonator::new(pl.p, eps, base_length(opts), opts.wall))?;
    let t = tune_length(&gc, &[j], &reflection, eps, opts.window_for(eps), &opts.search)?;
    let s = t.s;
    steps.push(DesignStep { label: "cloak_zero_reflection".into(), resonators: vec![j], placements: vec![pl], length: t.length, value: t.value, s, trace: t.trace });
    Ok(DesignReport { final_geometry: gc.with_lengths(&[j], t.length), objective: Objective::Cloak, achieved: s, tolerances: cloak_tolerances(&s), steps, notes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_spacing_examples() {
        let w = 0.8 * PI;
        let (s, k) = phase_spacing(PI / 4.0, w, None);
        assert!((s - 2.96875).abs() < 1e-12 && k == 2);
        let (s, _) = phase_spacing(PI / 4.0, w, Some(0));
        assert!((s - 0.46875).abs() < 1e-12);
        // μ > π wraps into [0, π/ω).
        let (s, _) = phase_spacing(1.5 * PI, w, Some(0));
        assert!((s - (1.25 - 0.3125)).abs() < 1e-12);
    }

    #[test]
    fn phases_near_pi_are_moved() {
        assert_eq!(usable_phase(1.0).unwrap(), (1.0, None));
        let (m, note) = usable_phase(PI + 0.01).unwrap();
        assert!((m - PI - 0.05).abs() < 1e-15 && note.is_some());
        assert!(usable_phase(0.0).is_err() && usable_phase(7.0).is_err());
    }
}
