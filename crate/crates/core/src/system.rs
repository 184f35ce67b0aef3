//! Physical system description and the `section.key = value` run
//! configuration format.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{Grid1D, Stencil};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Fermion,
    Boson,
}

impl Statistics {
    fn name(&self) -> &'static str {
        match self {
            Statistics::Fermion => "fermion",
            Statistics::Boson => "boson",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesSpec {
    pub label: String,
    pub count: usize,
    pub mass: f64,
    pub statistics: Statistics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    None,
    Gaussian { amplitude: f64, range: f64 },
    SoftCoulomb { amplitude: f64, softening: f64 },
    Harmonic { k: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InternalPotentialSpec {
    None,
    HarmonicTrap { k: f64 },
    GaussianWell { amplitude: f64, range: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub stencil: Stencil,
}

impl GridSpec {
    pub fn grid(&self) -> Grid1D {
        Grid1D::new(self.x_min, self.x_max, self.n).expect("validated at construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    pub tol: f64,
    pub mix: f64,
    pub max_iter: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self { tol: 1e-8, mix: 0.3, max_iter: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub species: [SpeciesSpec; 2],
    pub u11: PotentialSpec,
    pub u22: PotentialSpec,
    pub u12: PotentialSpec,
    pub v_int: [InternalPotentialSpec; 2],
    pub grid: GridSpec,
    pub solver: SolverSpec,
}

impl Default for SystemSpec {
    fn default() -> Self {
        Self {
            species: [
                SpeciesSpec { label: "species1".into(), count: 1, mass: 1.0, statistics: Statistics::Fermion },
                SpeciesSpec { label: "species2".into(), count: 0, mass: 1.0, statistics: Statistics::Fermion },
            ],
            u11: PotentialSpec::None,
            u22: PotentialSpec::None,
            u12: PotentialSpec::None,
            v_int: [InternalPotentialSpec::None; 2],
            grid: GridSpec { x_min: -10.0, x_max: 10.0, n: 201, stencil: Stencil::Three },
            solver: SolverSpec::default(),
        }
    }
}

impl PotentialSpec {
    pub fn eval(&self, x: f64) -> f64 {
        eval_pair_potential(self, x)
    }

    pub fn is_none(&self) -> bool {
        matches!(self, PotentialSpec::None)
    }

    /// Same shape with the strength multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            PotentialSpec::None => PotentialSpec::None,
            PotentialSpec::Gaussian { amplitude, range } => PotentialSpec::Gaussian { amplitude: amplitude * factor, range },
            PotentialSpec::SoftCoulomb { amplitude, softening } => {
                PotentialSpec::SoftCoulomb { amplitude: amplitude * factor, softening }
            }
            PotentialSpec::Harmonic { k } => PotentialSpec::Harmonic { k: k * factor },
        }
    }
}

impl InternalPotentialSpec {
    pub fn eval(&self, r: f64) -> f64 {
        eval_internal_potential(self, r)
    }

    pub fn is_none(&self) -> bool {
        matches!(self, InternalPotentialSpec::None)
    }
}

pub fn eval_pair_potential(p: &PotentialSpec, x: f64) -> f64 {
    match *p {
        PotentialSpec::None => 0.0,
        PotentialSpec::Gaussian { amplitude, range } => amplitude * (-x * x / (2.0 * range * range)).exp(),
        PotentialSpec::SoftCoulomb { amplitude, softening } => amplitude / (x * x + softening * softening).sqrt(),
        PotentialSpec::Harmonic { k } => 0.5 * k * x * x,
    }
}

/// Argument is the center-of-mass-frame coordinate r − R.
pub fn eval_internal_potential(p: &InternalPotentialSpec, r: f64) -> f64 {
    match *p {
        InternalPotentialSpec::None => 0.0,
        InternalPotentialSpec::HarmonicTrap { k } => 0.5 * k * r * r,
        InternalPotentialSpec::GaussianWell { amplitude, range } => amplitude * (-r * r / (2.0 * range * range)).exp(),
    }
}

impl SystemSpec {
    pub fn counts(&self) -> (usize, usize) {
        (self.species[0].count, self.species[1].count)
    }

    pub fn masses(&self) -> (f64, f64) {
        (self.species[0].mass, self.species[1].mass)
    }

    pub fn n_particles(&self) -> usize {
        self.species[0].count + self.species[1].count
    }

    pub fn intra(&self, l: usize) -> &PotentialSpec {
        if l == 0 {
            &self.u11
        } else {
            &self.u22
        }
    }

    pub fn grid(&self) -> Grid1D {
        self.grid.grid()
    }

    /// Species (1) and (2) exchanged.
    pub fn relabeled(&self) -> Self {
        let mut s = self.clone();
        s.species.swap(0, 1);
        s.species[0].label = "species1".into();
        s.species[1].label = "species2".into();
        std::mem::swap(&mut s.u11, &mut s.u22);
        s.v_int.swap(0, 1);
        s
    }

    /// True when exchanging the species leaves the specification unchanged.
    pub fn is_exchange_symmetric(&self) -> bool {
        let (a, b) = (&self.species[0], &self.species[1]);
        a.count == b.count
            && a.mass == b.mass
            && a.statistics == b.statistics
            && self.u11 == self.u22
            && self.v_int[0] == self.v_int[1]
    }

    pub fn validate(&self) -> Result<()> {
        let val = |field: &str, msg: &str| Error::Validation { field: field.into(), msg: msg.into() };
        for (l, s) in self.species.iter().enumerate() {
            let sec = format!("species{}", l + 1);
            if !(s.mass > 0.0 && s.mass.is_finite()) {
                return Err(val(&format!("{sec}.mass"), "mass must be positive and finite"));
            }
            if l == 0 && s.count < 1 {
                return Err(val("species1.count", "species1 needs at least one particle"));
            }
        }
        for (name, p) in [("u11", &self.u11), ("u22", &self.u22), ("u12", &self.u12)] {
            match *p {
                PotentialSpec::Gaussian { amplitude, range } => {
                    finite(&format!("{name}.A"), amplitude)?;
                    positive(&format!("{name}.s"), range)?;
                }
                PotentialSpec::SoftCoulomb { amplitude, softening } => {
                    finite(&format!("{name}.A"), amplitude)?;
                    positive(&format!("{name}.a"), softening)?;
                }
                PotentialSpec::Harmonic { k } => finite(&format!("{name}.k"), k)?,
                PotentialSpec::None => {}
            }
        }
        for (name, p) in [("vint1", &self.v_int[0]), ("vint2", &self.v_int[1])] {
            match *p {
                InternalPotentialSpec::HarmonicTrap { k } => finite(&format!("{name}.k"), k)?,
                InternalPotentialSpec::GaussianWell { amplitude, range } => {
                    finite(&format!("{name}.A"), amplitude)?;
                    positive(&format!("{name}.s"), range)?;
                }
                InternalPotentialSpec::None => {}
            }
        }
        Grid1D::new(self.grid.x_min, self.grid.x_max, self.grid.n).map_err(|e| {
            let field = if self.grid.n < crate::grid::MIN_POINTS { "grid.n" } else { "grid.xmax" };
            val(field, &e.to_string())
        })?;
        positive("solver.tol", self.solver.tol)?;
        if !(self.solver.mix > 0.0 && self.solver.mix <= 1.0) {
            return Err(val("solver.mix", "mixing must lie in (0, 1]"));
        }
        if self.solver.max_iter < 1 {
            return Err(val("solver.max_iter", "must be at least 1"));
        }
        Ok(())
    }

    /// Canonical configuration text; `parse_config` of the output returns `self`.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for (l, s) in self.species.iter().enumerate() {
            let sec = format!("species{}", l + 1);
            let _ = writeln!(out, "{sec}.count = {}", s.count);
            let _ = writeln!(out, "{sec}.mass = {:?}", s.mass);
            let _ = writeln!(out, "{sec}.statistics = {}", s.statistics.name());
        }
        for (name, p) in [("u11", &self.u11), ("u22", &self.u22), ("u12", &self.u12)] {
            match *p {
                PotentialSpec::None => {
                    let _ = writeln!(out, "{name}.kind = none");
                }
                PotentialSpec::Gaussian { amplitude, range } => {
                    let _ = writeln!(out, "{name}.kind = gaussian\n{name}.A = {amplitude:?}\n{name}.s = {range:?}");
                }
                PotentialSpec::SoftCoulomb { amplitude, softening } => {
                    let _ = writeln!(out, "{name}.kind = soft_coulomb\n{name}.A = {amplitude:?}\n{name}.a = {softening:?}");
                }
                PotentialSpec::Harmonic { k } => {
                    let _ = writeln!(out, "{name}.kind = harmonic\n{name}.k = {k:?}");
                }
            }
        }
        for (name, p) in [("vint1", &self.v_int[0]), ("vint2", &self.v_int[1])] {
            match *p {
                InternalPotentialSpec::None => {
                    let _ = writeln!(out, "{name}.kind = none");
                }
                InternalPotentialSpec::HarmonicTrap { k } => {
                    let _ = writeln!(out, "{name}.kind = harmonic_trap\n{name}.k = {k:?}");
                }
                InternalPotentialSpec::GaussianWell { amplitude, range } => {
                    let _ = writeln!(out, "{name}.kind = gaussian_well\n{name}.A = {amplitude:?}\n{name}.s = {range:?}");
                }
            }
        }
        let g = &self.grid;
        let _ = writeln!(out, "grid.xmin = {:?}\ngrid.xmax = {:?}\ngrid.n = {}", g.x_min, g.x_max, g.n);
        let _ = writeln!(out, "grid.stencil = {}", g.stencil.points());
        let s = &self.solver;
        let _ = writeln!(out, "solver.tol = {:?}\nsolver.mix = {:?}\nsolver.max_iter = {}", s.tol, s.mix, s.max_iter);
        out
    }
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation { field: field.into(), msg: "must be finite".into() })
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation { field: field.into(), msg: "must be positive".into() })
    }
}

const SECTIONS: [&str; 9] = ["species1", "species2", "u11", "u22", "u12", "vint1", "vint2", "grid", "solver"];

fn allowed_keys(section: &str) -> &'static [&'static str] {
    match section {
        "species1" | "species2" => &["count", "mass", "statistics"],
        "u11" | "u22" | "u12" | "vint1" | "vint2" => &["kind", "A", "s", "a", "k"],
        "grid" => &["xmin", "xmax", "n", "stencil"],
        "solver" => &["tol", "mix", "max_iter"],
        _ => &[],
    }
}

struct Entry {
    line: usize,
    value: String,
}

type Table = BTreeMap<(String, String), Entry>;

fn get_f64(t: &Table, sec: &str, key: &str) -> Result<Option<f64>> {
    match t.get(&(sec.to_string(), key.to_string())) {
        None => Ok(None),
        Some(e) => e.value.parse::<f64>().map(Some).map_err(|_| Error::Parse {
            line: e.line,
            msg: format!("`{sec}.{key}` expects a number, got `{}`", e.value),
        }),
    }
}

fn get_int(t: &Table, sec: &str, key: &str) -> Result<Option<i64>> {
    match t.get(&(sec.to_string(), key.to_string())) {
        None => Ok(None),
        Some(e) => e.value.parse::<i64>().map(Some).map_err(|_| Error::Parse {
            line: e.line,
            msg: format!("`{sec}.{key}` expects an integer, got `{}`", e.value),
        }),
    }
}

fn get_str<'a>(t: &'a Table, sec: &str, key: &str) -> Option<&'a str> {
    t.get(&(sec.to_string(), key.to_string())).map(|e| e.value.as_str())
}

fn require(t: &Table, sec: &str, key: &str) -> Result<f64> {
    get_f64(t, sec, key)?
        .ok_or_else(|| Error::Validation { field: format!("{sec}.{key}"), msg: "required by this kind".into() })
}

fn reject_extra(t: &Table, sec: &str, used: &[&str]) -> Result<()> {
    for (s, k) in t.keys() {
        if s == sec && !used.contains(&k.as_str()) {
            return Err(Error::Validation {
                field: format!("{sec}.{k}"),
                msg: "parameter not used by the selected kind".into(),
            });
        }
    }
    Ok(())
}

fn parse_pair(t: &Table, sec: &str) -> Result<PotentialSpec> {
    let kind = get_str(t, sec, "kind").unwrap_or("none");
    let p = match kind {
        "none" => {
            reject_extra(t, sec, &["kind"])?;
            PotentialSpec::None
        }
        "gaussian" => {
            reject_extra(t, sec, &["kind", "A", "s"])?;
            PotentialSpec::Gaussian { amplitude: require(t, sec, "A")?, range: require(t, sec, "s")? }
        }
        "soft_coulomb" => {
            reject_extra(t, sec, &["kind", "A", "a"])?;
            PotentialSpec::SoftCoulomb { amplitude: require(t, sec, "A")?, softening: require(t, sec, "a")? }
        }
        "harmonic" => {
            reject_extra(t, sec, &["kind", "k"])?;
            PotentialSpec::Harmonic { k: require(t, sec, "k")? }
        }
        other => {
            return Err(Error::Validation {
                field: format!("{sec}.kind"),
                msg: format!("unknown kind `{other}` (gaussian, soft_coulomb, harmonic, none)"),
            })
        }
    };
    Ok(p)
}

fn parse_internal(t: &Table, sec: &str) -> Result<InternalPotentialSpec> {
    let kind = get_str(t, sec, "kind").unwrap_or("none");
    let p = match kind {
        "none" => {
            reject_extra(t, sec, &["kind"])?;
            InternalPotentialSpec::None
        }
        "harmonic_trap" => {
            reject_extra(t, sec, &["kind", "k"])?;
            InternalPotentialSpec::HarmonicTrap { k: require(t, sec, "k")? }
        }
        "gaussian_well" => {
            reject_extra(t, sec, &["kind", "A", "s"])?;
            InternalPotentialSpec::GaussianWell { amplitude: require(t, sec, "A")?, range: require(t, sec, "s")? }
        }
        other => {
            return Err(Error::Validation {
                field: format!("{sec}.kind"),
                msg: format!("unknown kind `{other}` (harmonic_trap, gaussian_well, none)"),
            })
        }
    };
    Ok(p)
}

pub fn parse_config(text: &str) -> Result<SystemSpec> {
    let mut table = Table::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (lhs, rhs) = content
            .split_once('=')
            .ok_or_else(|| Error::Parse { line, msg: "expected `section.key = value`".into() })?;
        let (sec, key) = lhs
            .trim()
            .split_once('.')
            .ok_or_else(|| Error::Parse { line, msg: format!("key `{}` lacks a section", lhs.trim()) })?;
        let (sec, key, value) = (sec.trim(), key.trim(), rhs.trim());
        if !SECTIONS.contains(&sec) {
            return Err(Error::Parse { line, msg: format!("unknown section `{sec}`") });
        }
        if !allowed_keys(sec).contains(&key) {
            return Err(Error::Parse { line, msg: format!("unknown key `{sec}.{key}`") });
        }
        if value.is_empty() {
            return Err(Error::Parse { line, msg: format!("`{sec}.{key}` has no value") });
        }
        if table.insert((sec.into(), key.into()), Entry { line, value: value.into() }).is_some() {
            return Err(Error::Parse { line, msg: format!("duplicate key `{sec}.{key}`") });
        }
    }

    let mut spec = SystemSpec::default();
    for l in 0..2 {
        let sec = SECTIONS[l];
        let s = &mut spec.species[l];
        if let Some(c) = get_int(&table, sec, "count")? {
            if c < 0 {
                return Err(Error::Validation { field: format!("{sec}.count"), msg: "must be non-negative".into() });
            }
            s.count = c as usize;
        } else if l == 0 {
            return Err(Error::Validation { field: "species1.count".into(), msg: "required".into() });
        }
        if let Some(m) = get_f64(&table, sec, "mass")? {
            s.mass = m;
        } else if l == 0 || s.count > 0 {
            return Err(Error::Validation { field: format!("{sec}.mass"), msg: "required".into() });
        }
        if let Some(st) = get_str(&table, sec, "statistics") {
            s.statistics = match st {
                "fermion" => Statistics::Fermion,
                "boson" => Statistics::Boson,
                other => {
                    return Err(Error::Validation {
                        field: format!("{sec}.statistics"),
                        msg: format!("expected fermion or boson, got `{other}`"),
                    })
                }
            };
        }
    }
    spec.u11 = parse_pair(&table, "u11")?;
    spec.u22 = parse_pair(&table, "u22")?;
    spec.u12 = parse_pair(&table, "u12")?;
    spec.v_int = [parse_internal(&table, "vint1")?, parse_internal(&table, "vint2")?];
    if let Some(v) = get_f64(&table, "grid", "xmin")? {
        spec.grid.x_min = v;
    }
    if let Some(v) = get_f64(&table, "grid", "xmax")? {
        spec.grid.x_max = v;
    }
    if let Some(v) = get_int(&table, "grid", "n")? {
        if v < 0 {
            return Err(Error::Validation { field: "grid.n".into(), msg: "must be positive".into() });
        }
        spec.grid.n = v as usize;
    }
    if let Some(v) = get_int(&table, "grid", "stencil")? {
        spec.grid.stencil = Stencil::from_points(v)
            .ok_or_else(|| Error::Validation { field: "grid.stencil".into(), msg: "must be 3 or 5".into() })?;
    }
    if let Some(v) = get_f64(&table, "solver", "tol")? {
        spec.solver.tol = v;
    }
    if let Some(v) = get_f64(&table, "solver", "mix")? {
        spec.solver.mix = v;
    }
    if let Some(v) = get_int(&table, "solver", "max_iter")? {
        if v < 0 {
            return Err(Error::Validation { field: "solver.max_iter".into(), msg: "must be positive".into() });
        }
        spec.solver.max_iter = v as usize;
    }
    spec.validate()?;
    Ok(spec)
}
