use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wgcloak::asymptotics::{compute_profile_constant, load_or_compute_profile_constant, profile, validate_resonators};
use wgcloak::config::{DesignObjective, RunConfig};
use wgcloak::design::{
    procedure_cloak_three, procedure_cloak_two, procedure_phase_shifter, procedure_zero_reflection, procedure_zero_transmission,
    sweep, DesignReport,
};
use wgcloak::scattering::solve_scattering_pair;
use wgcloak::{Error, ErrorClass, Geometry, SMatrix, SolverParams};

#[derive(Parser)]
#[command(name = "wgcloak", version, about = "Waveguide scattering with thin resonators: solve, sweep, design, validate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration; without it the bare strip with default solver settings is used.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides [output] dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Maximum number of concurrent solves.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct FieldFlags {
    /// Write sampled fields W+ and W- as CSV.
    #[arg(long)]
    dump_field: bool,
    /// Write grayscale PGM images of Re W+ and Re W-.
    #[arg(long)]
    heatmap: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Scattering matrix of the configured geometry.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        field: FieldFlags,
    },
    /// Sweep the common length of some resonators and fit circles to R and T.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Place and tune resonators for a design objective.
    Design {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        field: FieldFlags,
        /// zero_reflection, zero_transmission, phase_shift or cloak.
        #[arg(long)]
        objective: Option<String>,
        /// Resonator count for cloaking (2 or 3).
        #[arg(long)]
        resonators: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Compare FEM coefficients with the limit formulas over a detuning grid.
    ValidateAsymptotics {
        #[command(flatten)]
        common: Common,
        /// Comma separated widths, e.g. 0.3,0.1,0.03,0.01.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        /// Cached profile constant (computed and written if missing).
        #[arg(long)]
        constants: Option<PathBuf>,
    },
    /// Compute the profile constant C_Xi on growing truncations.
    Constants {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Mesh size at the slot corners.
        #[arg(long, default_value_t = profile::PROFILE_CORNER_SIZE)]
        corner_size: f64,
    },
}

/// Failure of a run: an error class plus a message.
struct Failure(ErrorClass, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.class(), e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(ErrorClass::Config, format!("i/o error: {e}"))
    }
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Config => 2,
        ErrorClass::Numerical => 3,
        ErrorClass::Design => 4,
    }
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf), Failure> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p).map_err(|e| match e {
            Error::Config { line, msg } => Failure(ErrorClass::Config, format!("{}:{line}: {msg}", p.display())),
            e => e.into(),
        })?,
        None => RunConfig::parse("")?,
    };
    if let Some(j) = common.jobs {
        if j == 0 {
            return Err(Failure(ErrorClass::Config, "--jobs must be at least 1".into()));
        }
        cfg.design.options.search.jobs = Some(j);
    }
    cfg.design.options.search.params = cfg.solver.clone();
    let out = common.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    fs::create_dir_all(&out)?;
    Ok((cfg, out))
}

fn write(dir: &Path, name: &str, data: impl AsRef<[u8]>) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, data)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn smatrix_csv(s: &SMatrix) -> String {
    format!("{}\n{}\n", SMatrix::csv_header(), s.csv_row())
}

fn print_smatrix(s: &SMatrix) {
    println!("R+ = {:.10} {:+.10}i", s.r_plus.re, s.r_plus.im);
    println!("R- = {:.10} {:+.10}i", s.r_minus.re, s.r_minus.im);
    println!("T  = {:.10} {:+.10}i", s.t.re, s.t.im);
    println!("energy defect {:.3e}, reciprocity defect {:.3e}", s.energy_defect(), s.reciprocity_defect);
}

fn fields(g: &Geometry, params: &SolverParams, cfg: &RunConfig, flags: &FieldFlags, out: &Path) -> Result<(), Failure> {
    if !flags.dump_field && !flags.heatmap {
        return Ok(());
    }
    let sc = solve_scattering_pair(g, params)?;
    let (nx, ny) = (cfg.output.field_nx, cfg.output.field_ny);
    for (name, f) in [("w_plus", &sc.w_plus), ("w_minus", &sc.w_minus)] {
        if flags.dump_field {
            write(out, &format!("field_{name}.csv"), f.sample_csv(nx, ny))?;
        }
        if flags.heatmap {
            write(out, &format!("field_{name}.pgm"), f.heatmap_pgm(nx, ny))?;
        }
    }
    Ok(())
}

fn solve(common: &Common, flags: &FieldFlags) -> Result<(), Failure> {
    let (cfg, out) = load(common)?;
    let sc = solve_scattering_pair(&cfg.geometry, &cfg.solver)?;
    print_smatrix(&sc.s);
    write(&out, "smatrix.csv", smatrix_csv(&sc.s))?;
    fields(&cfg.geometry, &cfg.solver, &cfg, flags, &out)
}

fn run_sweep(common: &Common) -> Result<(), Failure> {
    let (cfg, out) = load(common)?;
    let sw = cfg.sweep.as_ref().ok_or_else(|| Failure(ErrorClass::Config, "no [sweep] section in the configuration".into()))?;
    let n = cfg.geometry.resonators.len();
    if n == 0 {
        return Err(Failure(ErrorClass::Config, "sweep needs at least one [resonator]".into()));
    }
    let indices = if sw.resonators.is_empty() { vec![n - 1] } else { sw.resonators.clone() };
    if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
        return Err(Failure(ErrorClass::Config, format!("sweep resonator index {bad} out of range (have {n})")));
    }
    let tr = sweep(&cfg.geometry, &indices, sw.from, sw.to, sw.steps, &cfg.design.options.search)?;
    print!("{}", tr.summary());
    write(&out, "sweep.csv", tr.csv())?;
    write(&out, "sweep_summary.txt", tr.summary())
}

fn design(common: &Common, flags: &FieldFlags, objective: Option<&str>, resonators: Option<usize>, eps: Option<f64>) -> Result<(), Failure> {
    let (mut cfg, out) = load(common)?;
    if let Some(o) = objective {
        cfg.design.objective = DesignObjective::parse(o).map_err(|m| Failure(ErrorClass::Config, m))?;
    }
    if let Some(r) = resonators {
        cfg.design.resonators = r;
    }
    if let Some(e) = eps {
        cfg.design.eps = e;
    }
    let d = &cfg.design;
    if !(d.eps > 0.0 && d.eps < 1.0) {
        return Err(Failure(ErrorClass::Config, format!("eps = {} must lie in (0, 1)", d.eps)));
    }
    let g = &cfg.geometry;
    let report: DesignReport = match d.objective {
        DesignObjective::ZeroReflection => procedure_zero_reflection(g, d.eps, &d.options)?,
        DesignObjective::ZeroTransmission => procedure_zero_transmission(g, d.eps, d.p.unwrap_or(-(g.d + 2.0)), &d.options)?,
        DesignObjective::PhaseShift => procedure_phase_shifter(d.mu, d.eps, &d.options)?,
        DesignObjective::Cloak => match d.resonators {
            2 => procedure_cloak_two(g, d.eps, &d.options)?,
            3 => procedure_cloak_three(g, d.eps, &d.options)?,
            r => return Err(Failure(ErrorClass::Config, format!("cloaking uses 2 or 3 resonators, got {r}"))),
        },
    };
    print!("{}", report.to_text());
    write(&out, "design_report.txt", report.to_text())?;
    write(&out, "design_traces.csv", report.traces_csv())?;
    write(&out, "design_smatrix.csv", smatrix_csv(&report.achieved))?;
    fields(&report.final_geometry, &cfg.solver, &cfg, flags, &out)?;
    if !report.all_met() {
        return Err(Failure(ErrorClass::Design, "design tolerances not met".into()));
    }
    Ok(())
}

fn validate(common: &Common, eps: Option<Vec<f64>>, constants: Option<PathBuf>) -> Result<(), Failure> {
    let (cfg, out) = load(common)?;
    let v = &cfg.validate;
    let eps = eps.unwrap_or_else(|| v.eps.clone());
    if eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(Failure(ErrorClass::Config, "every eps must lie in (0, 1)".into()));
    }
    let path = constants.unwrap_or_else(|| out.join("constants.txt"));
    let c = load_or_compute_profile_constant(&path)?;
    let rows: Vec<Vec<f64>> = v.etas.iter().map(|&e| vec![e]).collect();
    let res = validate_resonators(&cfg.geometry, &[v.p], v.wall, &eps, &rows, v.m, c.value, &cfg.design.options.search)?;
    print!("{}", res.table());
    write(&out, "validation.csv", res.csv())?;
    write(&out, "validation.txt", res.table())
}

fn constants(out: Option<PathBuf>, corner: f64) -> Result<(), Failure> {
    let out = out.unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out)?;
    let c = compute_profile_constant(corner)?;
    for (rho, h, v) in &c.table {
        println!("rho = {rho:>4}, H = {h:>4}: C = {v:.10}");
    }
    println!("extrapolated C_Xi = {:.10} (coarser pair {:.10}), |Im| = {:.1e}", c.value, c.coarse_value, c.imag);
    write(&out, "constants.txt", c.to_text())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { common, field } => solve(common, field),
        Command::Sweep { common } => run_sweep(common),
        Command::Design { common, field, objective, resonators, eps } => design(common, field, objective.as_deref(), *resonators, *eps),
        Command::ValidateAsymptotics { common, eps, constants: c } => validate(common, eps.clone(), c.clone()),
        Command::Constants { out, corner_size } => constants(out.clone(), *corner_size),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(class, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(exit_code(class))
        }
    }
}
