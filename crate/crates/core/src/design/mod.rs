//! Placement and length tuning of thin resonators for zero reflection, zero
//! transmission, phase shifting and cloaking.

pub mod placement;
pub mod procedures;
pub mod tuning;

use std::fmt::Write as _;

use crate::geometry::{Geometry, Wall};
use crate::helmholtz::SolverParams;
use crate::scattering::{scattering_matrix, SMatrix};

pub use placement::{
    guide_fields, placement_function, placement_unit_transmission, placement_zero_reflection, refine_placement_exact,
    wall_traces, Placement, PlacementRule, Side,
};
pub use procedures::{
    procedure_cloak_three, procedure_cloak_two, procedure_phase_shifter, procedure_zero_reflection,
    procedure_zero_transmission,
};
pub use tuning::{
    circle_membership, default_window, evaluate_lengths, fit_circle, refine, refine_interior, scan, scan_resonance, sweep, tune_length, CircleFit, Functional,
    with_pool, Membership, SearchSettings, SweepRow, SweepTrace, Tuning,
};

#[derive(Debug, Clone)]
pub struct DesignOptions {
    pub search: SearchSettings,
    /// Resonance order: lengths near π(m + ½)/ω.
    pub m: u32,
    pub side: Side,
    pub wall: Wall,
    /// Resonators go to |p| ≥ p_min; `None` means d + 2.
    pub p_min: Option<f64>,
    /// Refine closed-form placements on the exact criterion 𝓕(p) = 0.
    pub exact_placement: bool,
    /// Fixed position for the first added resonator.
    pub placement: Option<f64>,
    pub window: Option<(f64, f64)>,
    /// Phase shifter built in two steps (target reflection, then zero reflection)
    /// instead of two resonators of equal length.
    pub phase_two_step: bool,
    /// Periods π/ω added to the phase-shifter spacing; `None` picks the
    /// smallest spacing of at least 2.
    pub extra_periods: Option<u32>,
    /// Re-placement passes of the equal-length phase shifter against the
    /// measured phase; `None` means 0 for a standalone shifter and 2 inside
    /// the three-resonator cloak.
    pub phase_corrections: Option<u32>,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions {
            search: SearchSettings::default(),
            m: 0,
            side: Side::Left,
            wall: Wall::Top,
            p_min: None,
            exact_placement: false,
            placement: None,
            window: None,
            phase_two_step: false,
            extra_periods: None,
            phase_corrections: None,
        }
    }
}

impl DesignOptions {
    pub fn with_params(params: SolverParams) -> Self {
        DesignOptions { search: SearchSettings { params, ..Default::default() }, ..Default::default() }
    }

    pub fn params(&self) -> &SolverParams {
        &self.search.params
    }

    pub fn window_for(&self, eps: f64) -> (f64, f64) {
        self.window.unwrap_or_else(|| default_window(self.search.params.omega, self.m, eps))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    ZeroReflection,
    ZeroTransmission,
    PhaseShift(f64),
    Cloak,
}

impl Objective {
    pub fn name(&self) -> String {
        match self {
            Objective::ZeroReflection => "zero_reflection".into(),
            Objective::ZeroTransmission => "zero_transmission".into(),
            Objective::PhaseShift(mu) => format!("phase_shift({mu})"),
            Objective::Cloak => "cloak".into(),
        }
    }
}

/// One placement-and-tuning step of a procedure.
#[derive(Debug, Clone)]
pub struct DesignStep {
    pub label: String,
    /// Resonators (indices into the final geometry) whose length was tuned.
    pub resonators: Vec<usize>,
    pub placements: Vec<Placement>,
    pub length: f64,
    /// Value of the tuned functional at `length`.
    pub value: f64,
    pub s: SMatrix,
    pub trace: Vec<SweepRow>,
}

#[derive(Debug, Clone)]
pub struct DesignReport {
    pub final_geometry: Geometry,
    pub objective: Objective,
    pub achieved: SMatrix,
    pub steps: Vec<DesignStep>,
    /// (description, met).
    pub tolerances: Vec<(String, bool)>,
    pub notes: Vec<String>,
}

impl DesignReport {
    pub fn all_met(&self) -> bool {
        self.tolerances.iter().all(|t| t.1)
    }

    /// Largest change of R₊, R₋ or T when 𝕊 is recomputed from the final geometry.
    pub fn recheck(&self, params: &SolverParams) -> crate::Result<f64> {
        let s = scattering_matrix(&self.final_geometry, params)?;
        Ok((s.r_plus - self.achieved.r_plus)
            .norm()
            .max((s.r_minus - self.achieved.r_minus).norm())
            .max((s.t - self.achieved.t).norm()))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "objective: {}", self.objective.name());
        let _ = writeln!(s, "d: {}", self.final_geometry.d);
        for (k, r) in self.final_geometry.resonators.iter().enumerate() {
            let _ = writeln!(s, "resonator {k}: p {:.12} eps {} length {:.12} wall {:?}", r.p, r.eps, r.length, r.wall);
        }
        for st in &self.steps {
            let _ = writeln!(s, "step {}: resonators {:?} length {:.12} value {:.6e} ({} solves)", st.label, st.resonators, st.length, st.value, st.trace.len());
            for p in &st.placements {
                let _ = writeln!(s, "  placement p {:.12} rule {} branch {} period {}", p.p, p.rule.name(), p.branch, p.period);
            }
        }
        let a = &self.achieved;
        let _ = writeln!(s, "R+: {:.10} {:+.10}i  |R+| {:.6e}", a.r_plus.re, a.r_plus.im, a.r_plus.norm());
        let _ = writeln!(s, "R-: {:.10} {:+.10}i  |R-| {:.6e}", a.r_minus.re, a.r_minus.im, a.r_minus.norm());
        let _ = writeln!(s, "T:  {:.10} {:+.10}i  |T| {:.6e}  |T-1| {:.6e}", a.t.re, a.t.im, a.t.norm(), (a.t - 1.0).norm());
        let _ = writeln!(s, "energy defect: {:.3e}", a.energy_defect());
        for (name, ok) in &self.tolerances {
            let _ = writeln!(s, "{} {name}", if *ok { "met" } else { "NOT met" });
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        s
    }

    /// All sweep traces, one row per FEM evaluation.
    pub fn traces_csv(&self) -> String {
        let mut s = String::from("step,length,re_r_plus,im_r_plus,re_r_minus,im_r_minus,re_t,im_t\n");
        for st in &self.steps {
            for row in &st.trace {
                let _ = writeln!(
                    s,
                    "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                    st.label, row.length, row.s.r_plus.re, row.s.r_plus.im, row.s.r_minus.re, row.s.r_minus.im, row.s.t.re, row.s.t.im
                );
            }
        }
        s
    }
}
