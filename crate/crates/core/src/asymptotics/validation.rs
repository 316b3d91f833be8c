//! FEM scattering coefficients of guides with thin resonators compared with
//! the limit formulas on a grid of detunings η.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{compute_asymptotic_data, eta_to_length, one_resonator_limit, two_resonator_limit, AsymptoticData, LimitPrediction};
use crate::design::{with_pool, SearchSettings};
use crate::error::{Error, Result};
use crate::geometry::{add_resonator, Geometry, Point, Resonator, Wall};
use crate::scattering::{scattering_matrix, SMatrix};

#[derive(Debug, Clone)]
pub struct ValidationPoint {
    pub eps: f64,
    /// Detuning of each resonator.
    pub etas: Vec<f64>,
    pub lengths: Vec<f64>,
    pub fem: SMatrix,
    pub limit: LimitPrediction,
}

impl ValidationPoint {
    pub fn r_error(&self) -> f64 {
        (self.fem.r_plus - self.limit.r0).norm()
    }

    pub fn t_error(&self) -> f64 {
        (self.fem.t - self.limit.t0).norm()
    }
}

#[derive(Debug, Clone)]
pub struct Validation {
    pub c_xi: f64,
    pub data: AsymptoticData,
    pub points: Vec<ValidationPoint>,
}

impl Validation {
    /// (ε, max |R^ε − R⁰|, max |T^ε − T⁰|) in the order the ε were given.
    pub fn max_errors(&self) -> Vec<(f64, f64, f64)> {
        let mut out: Vec<(f64, f64, f64)> = Vec::new();
        for p in &self.points {
            match out.iter_mut().find(|e| e.0 == p.eps) {
                Some(e) => {
                    e.1 = e.1.max(p.r_error());
                    e.2 = e.2.max(p.t_error());
                }
                None => out.push((p.eps, p.r_error(), p.t_error())),
            }
        }
        out
    }

    pub fn csv(&self) -> String {
        let nr = self.points.first().map_or(0, |p| p.etas.len());
        let mut s = String::from("eps");
        for j in 0..nr {
            let _ = write!(s, ",eta{j},length{j}");
        }
        s.push_str(",re_r,im_r,re_t,im_t,re_r0,im_r0,re_t0,im_t0,r_error,t_error\n");
        for p in &self.points {
            let _ = write!(s, "{:.17e}", p.eps);
            for j in 0..nr {
                let _ = write!(s, ",{:.17e},{:.17e}", p.etas[j], p.lengths[j]);
            }
            let _ = writeln!(
                s,
                ",{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                p.fem.r_plus.re,
                p.fem.r_plus.im,
                p.fem.t.re,
                p.fem.t.im,
                p.limit.r0.re,
                p.limit.r0.im,
                p.limit.t0.re,
                p.limit.t0.im,
                p.r_error(),
                p.t_error()
            );
        }
        s
    }

    pub fn table(&self) -> String {
        let mut s = String::from("eps        max|R-R0|     max|T-T0|\n");
        for (e, r, t) in self.max_errors() {
            let _ = writeln!(s, "{e:<10} {r:<13.6e} {t:.6e}");
        }
        s
    }
}

/// Compares FEM and limit coefficients for one or two resonators at
/// positions `ps` on `wall`. Each row of `eta_grid` gives the detunings of
/// all resonators; lengths follow from the length law with `c_xi` and Re Γ_j.
#[allow(clippy::too_many_arguments)]
pub fn validate_resonators(
    g: &Geometry,
    ps: &[f64],
    wall: Wall,
    eps_list: &[f64],
    eta_grid: &[Vec<f64>],
    m: u32,
    c_xi: f64,
    settings: &SearchSettings,
) -> Result<Validation> {
    if ps.is_empty() || ps.len() > 2 {
        return Err(Error::Degenerate(format!("limit formulas are implemented for one or two resonators, got {}", ps.len())));
    }
    if eta_grid.iter().any(|row| row.len() != ps.len()) {
        return Err(Error::Degenerate("each detuning row needs one value per resonator".into()));
    }
    let base = g.without_resonators();
    let junctions: Vec<Point> = ps.iter().map(|&p| Point::new(p, wall.y())).collect();
    let mut prm = settings.params.clone();
    let reach = ps.iter().map(|p| p.abs()).fold(0.0, f64::max);
    prm.x_t = Some(prm.truncation(&base).max(reach + 2.0));
    let data = compute_asymptotic_data(&base, &junctions, &prm)?;
    let omega = settings.params.omega;
    let tasks: Vec<(f64, &Vec<f64>)> = eps_list.iter().flat_map(|&e| eta_grid.iter().map(move |row| (e, row))).collect();
    let points = with_pool(settings.jobs, || {
        tasks
            .par_iter()
            .map(|&(eps, etas)| -> Result<ValidationPoint> {
                let lengths: Vec<f64> = etas.iter().zip(&data.gamma).map(|(&eta, gm)| eta_to_length(eta, eps, m, omega, c_xi, gm.re)).collect();
                let mut gg = base.clone();
                for (&p, &l) in ps.iter().zip(&lengths) {
                    gg = add_resonator(&gg, Resonator::new(p, eps, l, wall))?;
                }
                let fem = scattering_matrix(&gg, &settings.params)?;
                let limit = if ps.len() == 1 {
                    one_resonator_limit(data.s.r_plus, data.s.t, data.w_plus[0], data.w_minus[0], etas[0])?
                } else {
                    let og: Complex64 = omega * data.coupling[0][1];
                    two_resonator_limit(
                        data.s.r_plus,
                        data.s.t,
                        [data.w_plus[0], data.w_plus[1]],
                        [data.w_minus[0], data.w_minus[1]],
                        og,
                        [etas[0], etas[1]],
                    )?
                };
                Ok(ValidationPoint { eps, etas: etas.clone(), lengths, fem, limit })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(Validation { c_xi, data, points })
}
