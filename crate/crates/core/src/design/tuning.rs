//! One-dimensional length searches and sweeps against the FEM solver.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{resonant_length, Geometry};
use crate::helmholtz::SolverParams;
use crate::scattering::{scattering_matrix, SMatrix};

/// Scalar functional of the scattering coefficients to be minimized.
pub type Functional = dyn Fn(&SMatrix) -> f64 + Sync;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub length: f64,
    pub s: SMatrix,
}

/// Settings shared by sweeps and tuning.
#[derive(Debug, Clone)]
pub struct SearchSettings {
    pub params: SolverParams,
    /// Cap on concurrent solves; `None` uses the global rayon pool.
    pub jobs: Option<usize>,
    pub coarse_points: usize,
    pub zoom_points: usize,
    /// Golden-section stops once the bracket is shorter than `length_tol * eps`.
    pub length_tol: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings { params: SolverParams::default(), jobs: None, coarse_points: 41, zoom_points: 21, length_tol: 1e-4 }
    }
}

/// Runs `f` inside a pool of `jobs` threads (the global pool for `None`).
pub fn with_pool<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match jobs {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Io(format!("thread pool: {e}")))?
            .install(f)),
        None => Ok(f()),
    }
}

/// 𝕊 of `g` with the resonators in `indices` all set to each length.
pub fn evaluate_lengths(g: &Geometry, indices: &[usize], lengths: &[f64], settings: &SearchSettings) -> Result<Vec<SweepRow>> {
    with_pool(settings.jobs, || {
        lengths
            .par_iter()
            .map(|&l| Ok(SweepRow { length: l, s: scattering_matrix(&g.with_lengths(indices, l), &settings.params)? }))
            .collect()
    })?
}

/// [ℓ₀ − 15ε, ℓ₀ + 5ε] around ℓ₀ = π(m + ½)/ω, clamped to ℓ₀ ± 0.45π/ω so
/// that it never reaches a neighboring resonance.
pub fn default_window(omega: f64, m: u32, eps: f64) -> (f64, f64) {
    let l0 = resonant_length(omega, m);
    let reach = 0.9 * PI / (2.0 * omega);
    ((l0 - 15.0 * eps).max(l0 - reach), (l0 + 5.0 * eps).min(l0 + reach))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// Evenly spaced coarse scan of a window.
pub fn scan(g: &Geometry, indices: &[usize], window: (f64, f64), settings: &SearchSettings) -> Result<Vec<SweepRow>> {
    evaluate_lengths(g, indices, &linspace(window.0, window.1, settings.coarse_points), settings)
}

/// Coarse scan followed by two zooms onto the steepest change of (R₊, T).
/// At small ε the resonance is narrower than the coarse spacing.
pub fn scan_resonance(g: &Geometry, indices: &[usize], window: (f64, f64), settings: &SearchSettings) -> Result<Vec<SweepRow>> {
    let mut trace = scan(g, indices, window, settings)?;
    let jump = |a: &SweepRow, b: &SweepRow| (b.s.r_plus - a.s.r_plus).norm() + (b.s.t - a.s.t).norm();
    for _ in 0..2 {
        let n = trace.len();
        let i = (0..n - 1).max_by(|&a, &b| jump(&trace[a], &trace[a + 1]).total_cmp(&jump(&trace[b], &trace[b + 1]))).unwrap();
        let (lo, hi) = (trace[i.saturating_sub(1)].length, trace[(i + 2).min(n - 1)].length);
        let fine = linspace(lo, hi, settings.zoom_points + 8);
        trace.extend(evaluate_lengths(g, indices, &fine[1..fine.len() - 1], settings)?);
        trace.sort_by(|x, y| x.length.total_cmp(&y.length));
        trace.dedup_by(|x, y| x.length == y.length);
    }
    Ok(trace)
}

#[derive(Debug, Clone)]
pub struct Tuning {
    pub length: f64,
    pub value: f64,
    pub s: SMatrix,
    /// Every evaluation, sorted by length.
    pub trace: Vec<SweepRow>,
}

fn argmin(rows: &[SweepRow], f: &Functional) -> usize {
    (0..rows.len()).min_by(|&a, &b| f(&rows[a].s).total_cmp(&f(&rows[b].s))).unwrap()
}

/// Minimizes `f` from a coarse scan: a finer grid between the neighbors of
/// the best coarse point, then golden section.
pub fn refine(g: &Geometry, indices: &[usize], f: &Functional, coarse: Vec<SweepRow>, eps: f64, settings: &SearchSettings) -> Result<Tuning> {
    let i = argmin(&coarse, f);
    refine_at(g, indices, f, coarse, i, eps, settings)
}

/// Like [`refine`] but starts from the lowest interior local minimum of the
/// coarse scan. Used when the objective also vanishes far from resonance.
pub fn refine_interior(g: &Geometry, indices: &[usize], f: &Functional, coarse: Vec<SweepRow>, eps: f64, settings: &SearchSettings) -> Result<Tuning> {
    let v: Vec<f64> = coarse.iter().map(|r| f(&r.s)).collect();
    let i = (1..v.len().saturating_sub(1))
        .filter(|&k| v[k] <= v[k - 1] && v[k] <= v[k + 1])
        .min_by(|&a, &b| v[a].total_cmp(&v[b]))
        .unwrap_or(0);
    refine_at(g, indices, f, coarse, i, eps, settings)
}

fn refine_at(g: &Geometry, indices: &[usize], f: &Functional, coarse: Vec<SweepRow>, i: usize, eps: f64, settings: &SearchSettings) -> Result<Tuning> {
    let n = coarse.len();
    if i == 0 || i + 1 == n {
        let (lo, hi) = (coarse[0].length, coarse[n - 1].length);
        if f(&coarse[0].s).max(f(&coarse[n - 1].s)) < 1e-3 {
            return Err(Error::Degenerate(format!(
                "objective is already below 1e-3 off resonance; the minimum sits on the window edge [{lo}, {hi}]"
            )));
        }
        return Err(Error::WindowTooNarrow(lo, hi));
    }
    let (coarse_lo, coarse_hi) = (coarse[i - 1].length, coarse[i + 1].length);
    let zoom = evaluate_lengths(g, indices, &linspace(coarse_lo, coarse_hi, settings.zoom_points), settings)?;
    let j = argmin(&zoom, f).clamp(1, zoom.len() - 2);
    let mut trace = coarse;
    trace.extend(zoom.iter().copied());
    let (mut a, mut b) = (zoom[j - 1].length, zoom[j + 1].length);
    let mid = f(&zoom[j].s);
    if f(&zoom[j - 1].s) < mid || f(&zoom[j + 1].s) < mid {
        log::warn!("golden-section bracket [{a}, {b}] is not unimodal");
    }
    let eval = |l: f64| -> Result<SweepRow> { Ok(SweepRow { length: l, s: scattering_matrix(&g.with_lengths(indices, l), &settings.params)? }) };
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let tol = settings.length_tol * eps;
    let mut c = eval(b - gr * (b - a))?;
    let mut d = eval(a + gr * (b - a))?;
    trace.push(c);
    trace.push(d);
    while b - a > tol {
        if f(&c.s) < f(&d.s) {
            b = d.length;
            d = c;
            c = eval(b - gr * (b - a))?;
            trace.push(c);
        } else {
            a = c.length;
            c = d;
            d = eval(a + gr * (b - a))?;
            trace.push(d);
        }
    }
    trace.sort_by(|x, y| x.length.total_cmp(&y.length));
    let (lo, hi) = (coarse_lo, coarse_hi);
    let near: Vec<SweepRow> = trace.iter().copied().filter(|r| r.length >= lo && r.length <= hi).collect();
    let best = near[argmin(&near, f)];
    Ok(Tuning { length: best.length, value: f(&best.s), s: best.s, trace })
}

/// Two-stage minimization of `f` over the common length of the resonators in
/// `indices`. Each evaluation is one FEM solve.
pub fn tune_length(
    g: &Geometry,
    indices: &[usize],
    f: &Functional,
    eps: f64,
    window: (f64, f64),
    settings: &SearchSettings,
) -> Result<Tuning> {
    let coarse = scan_resonance(g, indices, window, settings)?;
    refine(g, indices, f, coarse, eps, settings)
}

/// Least-squares circle: algebraic fit followed by Gauss-Newton on the
/// geometric distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleFit {
    pub center: Complex64,
    pub radius: f64,
    /// max | |z − center| − radius | over the points.
    pub residual: f64,
}

pub fn fit_circle(points: &[Complex64]) -> Result<CircleFit> {
    let n = points.len();
    if n < 3 {
        return Err(Error::Degenerate("a circle fit needs three points".into()));
    }
    let a = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 2.0 * points[i].re,
        1 => 2.0 * points[i].im,
        _ => 1.0,
    });
    let b = DVector::from_fn(n, |i, _| points[i].norm_sqr());
    let svd = a.svd(true, true);
    if svd.singular_values.min() < 1e-12 * svd.singular_values.max() {
        return Err(Error::Degenerate("points are collinear or coincide".into()));
    }
    let x = svd.solve(&b, 1e-14).map_err(|e| Error::Degenerate(e.to_string()))?;
    let mut c = Complex64::new(x[0], x[1]);
    let mut r = (x[2] + c.norm_sqr()).sqrt();
    for _ in 0..20 {
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for z in points {
            let d = (z - c).norm();
            if d == 0.0 {
                continue;
            }
            let row = Vector3::new(-(z.re - c.re) / d, -(z.im - c.im) / d, -1.0);
            jtj += row * row.transpose();
            jtr += row * (d - r);
        }
        let Some(step) = jtj.lu().solve(&jtr) else { break };
        c -= Complex64::new(step[0], step[1]);
        r -= step[2];
        if step.norm() < 1e-15 * (1.0 + r) {
            break;
        }
    }
    let residual = points.iter().map(|z| ((z - c).norm() - r).abs()).fold(0.0, f64::max);
    Ok(CircleFit { center: c, radius: r.abs(), residual })
}

#[derive(Debug, Clone)]
pub struct SweepTrace {
    pub indices: Vec<usize>,
    pub rows: Vec<SweepRow>,
    pub r_fit: Option<CircleFit>,
    pub t_fit: Option<CircleFit>,
}

impl SweepTrace {
    pub fn csv(&self) -> String {
        let mut s = format!("length,{}\n", SMatrix::csv_header().trim_start_matches("omega,"));
        for row in &self.rows {
            let full = row.s.csv_row();
            let rest = full.split_once(',').map_or("", |x| x.1);
            let _ = writeln!(s, "{:.17e},{rest}", row.length);
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for (name, fit) in [("R", &self.r_fit), ("T", &self.t_fit)] {
            match fit {
                Some(c) => {
                    let _ = writeln!(
                        s,
                        "{name}: center {:.6} {:+.6}i radius {:.6} residual {:.3e}",
                        c.center.re, c.center.im, c.radius, c.residual
                    );
                }
                None => {
                    let _ = writeln!(s, "{name}: no circle fit");
                }
            }
        }
        let min_t = self.rows.iter().map(|r| r.s.t.norm()).fold(f64::INFINITY, f64::min);
        let min_r = self.rows.iter().map(|r| r.s.r_plus.norm()).fold(f64::INFINITY, f64::min);
        let _ = writeln!(s, "min |R| {min_r:.6e}\nmin |T| {min_t:.6e}");
        s
    }
}

/// `steps` solves with equally spaced lengths in [from, to] plus circle fits
/// of the R₊ and T traces.
pub fn sweep(g: &Geometry, indices: &[usize], from: f64, to: f64, steps: usize, settings: &SearchSettings) -> Result<SweepTrace> {
    if steps < 2 {
        return Err(Error::Degenerate("a sweep needs at least two steps".into()));
    }
    let rows = evaluate_lengths(g, indices, &linspace(from, to, steps), settings)?;
    let rs: Vec<Complex64> = rows.iter().map(|r| r.s.r_plus).collect();
    let ts: Vec<Complex64> = rows.iter().map(|r| r.s.t).collect();
    Ok(SweepTrace { indices: indices.to_vec(), r_fit: fit_circle(&rs).ok(), t_fit: fit_circle(&ts).ok(), rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Membership {
    /// On 𝒞(½, ½) away from 0 and 1; τ = sign(Im T).
    On { tau: f64 },
    /// Within tolerance of 0 or 1, the two excluded points of the circle.
    Excluded,
    Off,
}

/// Whether T lies on the circle 𝒞(½, ½) ∖ {0, 1}.
pub fn circle_membership(t: Complex64, tol: f64) -> Membership {
    if ((t - 0.5).norm() - 0.5).abs() > tol {
        return Membership::Off;
    }
    if t.norm() <= tol || (t - 1.0).norm() <= tol {
        return Membership::Excluded;
    }
    Membership::On { tau: if t.im >= 0.0 { 1.0 } else { -1.0 } }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_fit_recovers_exact_circle() {
        let c = Complex64::new(-0.5, 0.2);
        let pts: Vec<Complex64> = (0..12).map(|k| c + Complex64::from_polar(0.7, 0.3 + 0.2 * k as f64)).collect();
        let fit = fit_circle(&pts).unwrap();
        assert!((fit.center - c).norm() < 1e-12 && (fit.radius - 0.7).abs() < 1e-12 && fit.residual < 1e-12);
        let line: Vec<Complex64> = (0..5).map(|k| Complex64::new(k as f64, 2.0 * k as f64)).collect();
        assert!(fit_circle(&line).is_err());
    }

    #[test]
    fn membership_examples() {
        let rho: f64 = 0.6;
        let t = Complex64::new(1.0 - rho * rho, rho * (1.0 - rho * rho).sqrt());
        assert_eq!(circle_membership(t, 1e-12), Membership::On { tau: 1.0 });
        assert_eq!(circle_membership(t.conj(), 1e-12), Membership::On { tau: -1.0 });
        assert_eq!(circle_membership(Complex64::new(1.0, 0.0), 1e-9), Membership::Excluded);
        assert_eq!(circle_membership(Complex64::new(-0.5, 0.0), 1e-3), Membership::Off);
    }

    #[test]
    fn default_window_brackets_the_resonance() {
        let w = 0.8 * PI;
        let (a, b) = default_window(w, 0, 0.01);
        assert!((a - 0.475).abs() < 1e-12 && (b - 0.675).abs() < 1e-12);
        let (a, b) = default_window(w, 0, 0.3);
        assert!((a - 0.0625).abs() < 1e-12 && (b - 1.1875).abs() < 1e-12);
    }
}
