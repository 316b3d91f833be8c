//! Run configuration: a sectioned key = value text format.
//!
//! ```text
//! [solver]
//! h = 0.05
//! omega = 0.8pi
//! [geometry]
//! shape = fish          # or d = ... plus [obstacle]/[index_region] sections
//! [obstacle]
//! vertices = -0.3 0.2  0.3 0.2  0 0.6
//! [resonator]
//! p = 0
//! eps = 0.01
//! length = 0.62
//! ```
//!
//! `[obstacle]`, `[index_region]` and `[resonator]` may repeat. Numbers accept
//! a `pi` factor (`0.8pi`, `pi/4`).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use crate::design::{DesignOptions, SearchSettings, Side};
use crate::error::{Error, Result};
use crate::geometry::{add_resonator, make_geometry, Geometry, IndexRegion, Point, Polygon, Resonator, Wall};
use crate::helmholtz::SolverParams;
use crate::shapes::shape_by_name;

#[derive(Debug, Clone)]
struct Section {
    name: String,
    line: usize,
    entries: Vec<(String, String, usize)>,
}

impl Section {
    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.entries.iter().rev().find(|e| e.0 == key).map(|e| (e.1.as_str(), e.2))
    }

    fn num(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|(v, l)| parse_number(v).map_err(|m| bad(l, key, &m))).transpose()
    }

    fn req(&self, key: &str) -> Result<f64> {
        self.num(key)?.ok_or_else(|| bad(self.line, key, &format!("missing in [{}]", self.name)))
    }

    fn uint(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|(v, l)| v.parse::<usize>().map_err(|_| bad(l, key, &format!("{v:?} is not a non-negative integer"))))
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<Option<bool>> {
        self.get(key)
            .map(|(v, l)| match v {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(bad(l, key, &format!("{v:?} is not a boolean"))),
            })
            .transpose()
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|(v, l)| {
                v.split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_number(s).map_err(|m| bad(l, key, &m)))
                    .collect()
            })
            .transpose()
    }
}

fn bad(line: usize, key: &str, msg: &str) -> Error {
    Error::Config { line, msg: format!("{key}: {msg}") }
}

/// Plain number, optionally with a `pi` factor: `2.5`, `0.8pi`, `pi`, `pi/4`, `-pi/2`.
pub fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    let err = || format!("{t:?} is not a number");
    let Some(pos) = t.find("pi") else { return t.parse::<f64>().map_err(|_| err()) };
    let (pre, post) = (t[..pos].trim().trim_end_matches('*'), &t[pos + 2..]);
    let factor = match pre {
        "" | "+" => 1.0,
        "-" => -1.0,
        p => p.parse::<f64>().map_err(|_| err())?,
    };
    let div = match post.trim() {
        "" => 1.0,
        q => q.strip_prefix('/').and_then(|d| d.trim().parse::<f64>().ok()).ok_or_else(err)?,
    };
    Ok(factor * PI / div)
}

fn tokenize(text: &str) -> Result<Vec<Section>> {
    let mut out = vec![Section { name: String::new(), line: 0, entries: vec![] }];
    for (k, raw) in text.lines().enumerate() {
        let ln = k + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or(Error::Config { line: ln, msg: "unterminated section header".into() })?;
            out.push(Section { name: name.trim().to_string(), line: ln, entries: vec![] });
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(Error::Config { line: ln, msg: format!("expected key = value, got {line:?}") })?;
        out.last_mut().unwrap().entries.push((key.trim().to_string(), value.trim().to_string(), ln));
    }
    if !out[0].entries.is_empty() {
        return Err(Error::Config { line: out[0].entries[0].2, msg: "entry outside of any section".into() });
    }
    out.remove(0);
    Ok(out)
}

const KNOWN: &[(&str, &[&str])] = &[
    ("solver", &["h", "x_t", "n_modes", "omega", "junction_size"]),
    ("geometry", &["shape", "d", "n"]),
    ("obstacle", &["vertices"]),
    ("index_region", &["vertices", "n"]),
    ("resonator", &["p", "eps", "length", "wall"]),
    ("sweep", &["resonators", "from", "to", "steps"]),
    (
        "design",
        &["objective", "resonators", "eps", "m", "side", "wall", "mu", "p", "p_min", "exact_placement", "two_step", "extra_periods", "phase_corrections", "window"],
    ),
    ("validate", &["eps", "eta_min", "eta_max", "eta_points", "p", "m", "wall"]),
    ("output", &["dir", "field_nx", "field_ny"]),
];

#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Resonators whose common length is swept; empty means the last one.
    pub resonators: Vec<usize>,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DesignObjective {
    ZeroReflection,
    ZeroTransmission,
    PhaseShift,
    Cloak,
}

impl DesignObjective {
    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        match s {
            "zero_reflection" => Ok(DesignObjective::ZeroReflection),
            "zero_transmission" => Ok(DesignObjective::ZeroTransmission),
            "phase_shift" | "phase_shifter" => Ok(DesignObjective::PhaseShift),
            "cloak" => Ok(DesignObjective::Cloak),
            _ => Err(format!("unknown objective {s:?} (zero_reflection, zero_transmission, phase_shift, cloak)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DesignConfig {
    pub objective: DesignObjective,
    /// Number of resonators for cloaking (2 or 3).
    pub resonators: usize,
    pub eps: f64,
    pub mu: f64,
    /// Position for the zero-transmission resonator.
    pub p: Option<f64>,
    pub options: DesignOptions,
}

#[derive(Debug, Clone)]
pub struct ValidateConfig {
    pub eps: Vec<f64>,
    pub etas: Vec<f64>,
    pub p: f64,
    pub m: u32,
    pub wall: Wall,
}

#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub field_nx: usize,
    pub field_ny: usize,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub geometry: Geometry,
    pub solver: SolverParams,
    pub sweep: Option<SweepConfig>,
    pub design: DesignConfig,
    pub validate: ValidateConfig,
    pub output: OutputConfig,
}

fn vertices(sec: &Section) -> Result<Polygon> {
    let (_, line) = sec.get("vertices").ok_or_else(|| bad(sec.line, "vertices", "missing"))?;
    let v = sec.list("vertices")?.unwrap();
    if v.len() % 2 != 0 || v.len() < 6 {
        return Err(bad(line, "vertices", "need at least three x y pairs"));
    }
    Polygon::new(v.chunks(2).map(|c| Point::new(c[0], c[1])).collect()).map_err(|e| bad(line, "vertices", &e.to_string()))
}

fn wall(sec: &Section) -> Result<Wall> {
    match sec.get("wall") {
        None | Some(("top", _)) => Ok(Wall::Top),
        Some(("bottom", _)) => Ok(Wall::Bottom),
        Some((v, l)) => Err(bad(l, "wall", &format!("{v:?} is not top or bottom"))),
    }
}

fn side(sec: &Section) -> Result<Side> {
    match sec.get("side") {
        None | Some(("left", _)) => Ok(Side::Left),
        Some(("right", _)) => Ok(Side::Right),
        Some((v, l)) => Err(bad(l, "side", &format!("{v:?} is not left or right"))),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let sections = tokenize(text)?;
        let known: HashMap<&str, &[&str]> = KNOWN.iter().copied().collect();
        for s in &sections {
            let keys = known.get(s.name.as_str()).ok_or(Error::Config { line: s.line, msg: format!("unknown section [{}]", s.name) })?;
            for (k, _, l) in &s.entries {
                if !keys.contains(&k.as_str()) {
                    return Err(Error::Config { line: *l, msg: format!("unknown key {k:?} in [{}]", s.name) });
                }
            }
        }
        let empty = Section { name: String::new(), line: 0, entries: vec![] };
        let single = |name: &str| -> Result<&Section> {
            let mut it = sections.iter().filter(|s| s.name == name);
            let first = it.next();
            if let Some(dup) = it.next() {
                return Err(Error::Config { line: dup.line, msg: format!("section [{name}] given twice") });
            }
            Ok(first.unwrap_or(&empty))
        };
        let all = |name: &'static str| sections.iter().filter(move |s| s.name == name);

        let sol = single("solver")?;
        let mut solver = SolverParams::default();
        if let Some(h) = sol.num("h")? {
            solver.h = h;
        }
        solver.x_t = sol.num("x_t")?;
        if let Some(n) = sol.uint("n_modes")? {
            solver.n_modes = n;
        }
        if let Some(w) = sol.num("omega")? {
            solver.omega = w;
        }
        solver.mesh.junction_size = sol.num("junction_size")?;
        let line_of = |k: &str| sol.get(k).map_or(sol.line, |x| x.1);
        if !(solver.h > 0.0) {
            return Err(bad(line_of("h"), "h", "must be positive"));
        }
        if !(solver.omega > 0.0 && solver.omega < PI) {
            return Err(bad(line_of("omega"), "omega", "must lie in (0, pi)"));
        }
        if solver.n_modes < 1 {
            return Err(bad(line_of("n_modes"), "n_modes", "must be at least 1"));
        }

        let geo = single("geometry")?;
        let mut geometry = match geo.get("shape") {
            Some((name, l)) => shape_by_name(name).map_err(|e| bad(l, "shape", &e.to_string()))?,
            None => {
                let obstacles = all("obstacle").map(vertices).collect::<Result<Vec<_>>>()?;
                let regions = all("index_region").map(|s| Ok(IndexRegion { polygon: vertices(s)?, n: s.req("n")? })).collect::<Result<Vec<_>>>()?;
                let d = geo.num("d")?.unwrap_or(1.0);
                make_geometry(d, obstacles, regions).map_err(|e| Error::Config { line: geo.line, msg: e.to_string() })?
            }
        };
        if let (Some(n), Some(_)) = (geo.num("n")?, geo.get("shape")) {
            for r in &mut geometry.index_regions {
                r.n = n;
            }
        }
        for s in all("resonator") {
            let r = Resonator::new(s.req("p")?, s.req("eps")?, s.req("length")?, wall(s)?);
            geometry = add_resonator(&geometry, r).map_err(|e| Error::Config { line: s.line, msg: e.to_string() })?;
        }

        let sw = single("sweep")?;
        let sweep = if sw.entries.is_empty() {
            None
        } else {
            Some(SweepConfig {
                resonators: sw.list("resonators")?.unwrap_or_default().into_iter().map(|x| x as usize).collect(),
                from: sw.req("from")?,
                to: sw.req("to")?,
                steps: sw.uint("steps")?.unwrap_or(41),
            })
        };

        let de = single("design")?;
        let objective = match de.get("objective") {
            Some((v, l)) => DesignObjective::parse(v).map_err(|m| bad(l, "objective", &m))?,
            None => DesignObjective::ZeroReflection,
        };
        let window = match de.list("window")? {
            None => None,
            Some(w) if w.len() == 2 => Some((w[0], w[1])),
            Some(_) => return Err(bad(de.get("window").unwrap().1, "window", "needs two lengths")),
        };
        let options = DesignOptions {
            search: SearchSettings { params: solver.clone(), ..Default::default() },
            m: de.uint("m")?.unwrap_or(0) as u32,
            side: side(de)?,
            wall: wall(de)?,
            p_min: de.num("p_min")?,
            exact_placement: de.flag("exact_placement")?.unwrap_or(false),
            placement: if objective == DesignObjective::ZeroTransmission { None } else { de.num("p")? },
            window,
            phase_two_step: de.flag("two_step")?.unwrap_or(false),
            extra_periods: de.uint("extra_periods")?.map(|k| k as u32),
            phase_corrections: de.uint("phase_corrections")?.map(|k| k as u32),
        };
        let design = DesignConfig {
            objective,
            resonators: de.uint("resonators")?.unwrap_or(2),
            eps: de.num("eps")?.unwrap_or(0.01),
            mu: de.num("mu")?.unwrap_or(PI / 4.0),
            p: if objective == DesignObjective::ZeroTransmission { de.num("p")? } else { None },
            options,
        };

        let va = single("validate")?;
        let eta_min = va.num("eta_min")?.unwrap_or(-5.0);
        let eta_max = va.num("eta_max")?.unwrap_or(5.0);
        let n_eta = va.uint("eta_points")?.unwrap_or(21).max(2);
        let validate = ValidateConfig {
            eps: va.list("eps")?.unwrap_or_else(|| vec![0.3, 0.1, 0.03, 0.01]),
            etas: (0..n_eta).map(|k| eta_min + (eta_max - eta_min) * k as f64 / (n_eta - 1) as f64).collect(),
            p: va.num("p")?.unwrap_or(0.0),
            m: va.uint("m")?.unwrap_or(1) as u32,
            wall: wall(va)?,
        };

        let ou = single("output")?;
        let output = OutputConfig {
            dir: PathBuf::from(ou.get("dir").map_or("out", |x| x.0)),
            field_nx: ou.uint("field_nx")?.unwrap_or(400),
            field_ny: ou.uint("field_ny")?.unwrap_or(50),
        };
        Ok(RunConfig { geometry, solver, sweep, design, validate, output })
    }

    pub fn load(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_with_pi() {
        assert_eq!(parse_number("2.5").unwrap(), 2.5);
        assert!((parse_number("0.8pi").unwrap() - 0.8 * PI).abs() < 1e-15);
        assert!((parse_number("pi/4").unwrap() - PI / 4.0).abs() < 1e-15);
        assert!((parse_number("-pi/2").unwrap() + PI / 2.0).abs() < 1e-15);
        assert!((parse_number("0.25*pi").unwrap() - PI / 4.0).abs() < 1e-15);
        assert!(parse_number("pie").is_err() && parse_number("x").is_err());
    }

    #[test]
    fn full_config() {
        let text = "
# bare strip with a triangle and one resonator
[solver]
h = 0.04
omega = 0.8pi
[geometry]
d = 1.5
[obstacle]
vertices = -0.5 0.2  0.1 0.8  0.4 0.3
[resonator]
p = -1.2
eps = 0.01
length = 0.62
[sweep]
from = 0.5
to = 0.7
steps = 11
[design]
objective = cloak
resonators = 3
[validate]
eps = 0.3, 0.1
";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.solver.h, 0.04);
        assert_eq!(c.geometry.obstacles.len(), 1);
        assert_eq!(c.geometry.resonators.len(), 1);
        assert_eq!(c.sweep.as_ref().unwrap().steps, 11);
        assert_eq!(c.design.objective, DesignObjective::Cloak);
        assert_eq!(c.design.resonators, 3);
        assert_eq!(c.validate.eps, vec![0.3, 0.1]);
        assert_eq!(c.validate.etas.len(), 21);
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let err = |t: &str| match RunConfig::parse(t) {
            Err(Error::Config { line, msg }) => (line, msg),
            other => panic!("{other:?}"),
        };
        assert_eq!(err("[solver]\nh = -1\n").0, 2);
        assert_eq!(err("[solver]\n\nomega = 4\n").0, 3);
        assert_eq!(err("[solver]\nfoo = 1\n").0, 2);
        assert_eq!(err("[nope]\n").0, 1);
        assert_eq!(err("[solver]\nh 0.05\n").0, 2);
        assert_eq!(err("[geometry]\nshape = whale\n").0, 2);
        assert_eq!(err("[obstacle]\nvertices = 0 0.2 0.1\n").0, 2);
        assert!(err("[solver]\nn_modes = 0\n").1.contains("n_modes"));
    }

    #[test]
    fn shape_with_index_override() {
        let c = RunConfig::parse("[geometry]\nshape = penetrable_fish\nn = 3\n").unwrap();
        assert_eq!(c.geometry.index_regions[0].n, 3.0);
    }
}
