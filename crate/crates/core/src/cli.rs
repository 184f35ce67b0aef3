//! Command-line driver: runs one subcommand from a configuration file and
//! writes `result.json` plus CSV tables into the output directory.

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::energy::EnergyBreakdown;
use crate::error::{Error, Result};
use crate::exact::{
    build_internal_hamiltonian, energy_breakdown_exact, extract_densities, momentum_density, solve_ground, DensitySet,
    InternalHamiltonian, InternalWavefunction, SolveOptions, Table2D, DEFAULT_SEED,
};
use crate::grid::GridFunction;
use crate::jacobi::{build_jacobi_map, kinetic_split_residual};
use crate::ks::{
    invert_ks_single_orbital, ks_energy, resolve_inversion, scf_solve, state_from_inversion, Channel, ExactOracle,
    FunctionalSpec, KSState, ScfOptions,
};
use crate::limits::{self, LimitReport};
use crate::system::{parse_config, Statistics, SystemSpec};

/// Pair tables above this many entries are not written.
pub const MAX_TABLE: usize = 2_000_000;

#[derive(Debug, Parser)]
#[command(name = "idft", about = "Internal-frame density functional lab for 1D few-body systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (`section.key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Override grid.n.
    #[arg(long, global = true)]
    pub grid_n: Option<usize>,
    /// Override the solver tolerance (SCF density residual and eigensolver).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value = "hartree")]
    pub functional: FunctionalArg,
    /// Comma-separated sweep values (mass ratios, stiffnesses or separations).
    #[arg(long, global = true, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Exact internal ground state, densities, pair densities and energy terms
    SolveExact,
    /// Self-consistent Kohn-Sham solve with the chosen functional
    SolveKs,
    /// Kohn-Sham potentials that reproduce the exact densities
    InvertKs,
    /// Exact vs Kohn-Sham energies and densities
    Compare,
    /// Heavy-mass limit sweep over mass ratios m1/m2
    SweepMassRatio,
    /// Classical limit sweep over the heavy-pair spring constant
    SweepClassical,
    /// Light-species energy curve over clamped heavy-pair separations
    ClampedScan,
    /// Built-in invariant checks, plus config checks when --config is given
    Check,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FunctionalArg {
    None,
    Hartree,
    Sic,
    ExactOracle,
}

impl FunctionalArg {
    fn channel(self) -> Channel {
        match self {
            FunctionalArg::None => Channel::None,
            FunctionalArg::Hartree => Channel::Hartree,
            FunctionalArg::Sic => Channel::Sic,
            FunctionalArg::ExactOracle => Channel::ExactOracle,
        }
    }

    fn name(self) -> &'static str {
        match self {
            FunctionalArg::None => "none",
            FunctionalArg::Hartree => "hartree",
            FunctionalArg::Sic => "sic",
            FunctionalArg::ExactOracle => "exact-oracle",
        }
    }
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::SolveExact => "solve-exact",
            Command::SolveKs => "solve-ks",
            Command::InvertKs => "invert-ks",
            Command::Compare => "compare",
            Command::SweepMassRatio => "sweep-mass-ratio",
            Command::SweepClassical => "sweep-classical",
            Command::ClampedScan => "clamped-scan",
            Command::Check => "check",
        }
    }
}

/// Exit status for an error: 2 for numerical failures, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        2
    } else {
        1
    }
}

/// One-line JSON error record for the diagnostic stream.
pub fn error_record(e: &Error) -> String {
    json!({ "error": e.kind(), "message": e.to_string(), "exit_code": exit_code(e) }).to_string()
}

struct Run {
    cli_out: PathBuf,
    spec: SystemSpec,
    meta: Map<String, Value>,
    exact_tol: f64,
}

fn load(cli: &Cli) -> Result<Run> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Validation { field: "--config".into(), msg: "required".into() })?;
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Error::Parse { line: 0, msg: "config is not UTF-8".into() })?;
    let mut spec = parse_config(&text)?;
    if let Some(n) = cli.grid_n {
        spec.grid.n = n;
    }
    let mut exact_tol = SolveOptions::default().tol;
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Validation { field: "--tol".into(), msg: "must be positive".into() });
        }
        spec.solver.tol = t;
        exact_tol = t;
    }
    spec.validate()?;
    let mut meta = Map::new();
    meta.insert("command".into(), json!(cli.command.name()));
    meta.insert("config_sha256".into(), json!(hex(&Sha256::digest(&bytes))));
    meta.insert("seed".into(), json!(DEFAULT_SEED));
    meta.insert("functional".into(), json!(cli.functional.name()));
    meta.insert(
        "grid".into(),
        json!({ "x_min": spec.grid.x_min, "x_max": spec.grid.x_max, "n": spec.grid.n, "stencil": spec.grid.stencil.points() }),
    );
    meta.insert("solver_tol".into(), json!(spec.solver.tol));
    meta.insert("eigensolver_tol".into(), json!(exact_tol));
    Ok(Run { cli_out: cli.out.clone(), spec, meta, exact_tol })
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let p = dir.join(name);
    std::fs::write(&p, contents).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}

fn density_csv(rho: &GridFunction) -> String {
    let mut s = String::from("r,rho\n");
    for (i, v) in rho.values.iter().enumerate() {
        let _ = writeln!(s, "{:.16e},{:.16e}", rho.grid.x(i), v);
    }
    s
}

fn table_csv(t: &Table2D) -> String {
    let g = t.grid;
    let n = g.n_points;
    let mut s = String::from("r,rp,value\n");
    for i in 0..n {
        for j in 0..n {
            let _ = writeln!(s, "{:.16e},{:.16e},{:.16e}", g.x(i), g.x(j), t.values[i * n + j]);
        }
    }
    s
}

fn breakdown_json(e: &EnergyBreakdown) -> Value {
    let mut m = Map::new();
    for (k, v) in e.named() {
        m.insert(k.into(), json!(v));
    }
    m.insert("kinetic_ks_available".into(), json!(e.kinetic_ks_available));
    Value::Object(m)
}

fn finish(run: Run, mut body: Map<String, Value>, started: Instant) -> Result<()> {
    let mut meta = run.meta;
    // The only non-reproducible field in any output.
    meta.insert("wall_clock_seconds_nondeterministic".into(), json!(started.elapsed().as_secs_f64()));
    body.insert("metadata".into(), Value::Object(meta));
    let text = serde_json::to_string_pretty(&Value::Object(body)).map_err(|e| Error::Io(e.to_string()))?;
    write_file(&run.cli_out, "result.json", &(text + "\n"))
}

fn exact_solve(run: &Run) -> Result<(InternalHamiltonian, InternalWavefunction)> {
    let map = build_jacobi_map(run.spec.counts(), run.spec.masses())?;
    let h = build_internal_hamiltonian(&run.spec, &map)?;
    let psi = solve_ground(&h, &SolveOptions { tol: run.exact_tol, ..Default::default() })?;
    Ok((h, psi))
}

fn write_densities(dir: &Path, spec: &SystemSpec, d: &DensitySet) -> Result<()> {
    for l in 0..2 {
        if let Some(r) = &d.rho[l] {
            write_file(dir, &format!("rho_{}.csv", spec.species[l].label), &density_csv(r))?;
        }
        if let Some(g) = &d.gamma[l] {
            write_file(dir, &format!("gamma_{0}{0}.csv", l + 1), &table_csv(g))?;
        }
    }
    if let Some(g) = &d.gamma12 {
        write_file(dir, "gamma_12.csv", &table_csv(g))?;
    }
    Ok(())
}

fn ks_state_json(state: &KSState, spec: &SystemSpec) -> Value {
    let mut m = Map::new();
    for l in 0..2 {
        if let Some(s) = &state.species[l] {
            m.insert(
                spec.species[l].label.clone(),
                json!({ "eigenvalues": s.eigenvalues, "occupations": s.occupations, "kinetic": s.kinetic }),
            );
        }
    }
    json!({ "species": m, "iterations": state.iterations, "residual": state.residual })
}

fn solve_exact_cmd(run: Run, started: Instant) -> Result<()> {
    let (h, psi) = exact_solve(&run)?;
    let d = extract_densities(&psi, MAX_TABLE);
    let rho = [d.rho[0].as_ref(), d.rho[1].as_ref()];
    let e = energy_breakdown_exact(&h, &psi, rho, None);
    let mut body = Map::new();
    body.insert("internal_energy".into(), json!(psi.energy));
    body.insert("eigen_residual".into(), json!(psi.residual));
    body.insert("iterations".into(), json!(psi.iterations));
    body.insert("sector_weight".into(), json!(psi.sector_weight));
    body.insert("energy_terms".into(), breakdown_json(&e));
    let mut mom = Map::new();
    for l in 0..2 {
        if d.rho[l].is_some() {
            let m = momentum_density(&psi, l);
            mom.insert(run.spec.species[l].label.clone(), json!({ "mean": m.mean, "kinetic": m.kinetic }));
        }
    }
    body.insert("momentum".into(), Value::Object(mom));
    write_densities(&run.cli_out, &run.spec, &d)?;
    finish(run, body, started)
}

fn functional(cli: &Cli) -> FunctionalSpec {
    FunctionalSpec::uniform(cli.functional.channel())
}

fn solve_ks_cmd(cli: &Cli, run: Run, started: Instant) -> Result<()> {
    let f = functional(cli);
    if f.species.contains(&Channel::ExactOracle) {
        return Err(Error::Validation {
            field: "--functional".into(),
            msg: "exact-oracle has no potential; use compare or invert-ks".into(),
        });
    }
    let state = scf_solve(&run.spec, &f, &ScfOptions::from_spec(&run.spec))?;
    let e = ks_energy(&state, &f, &run.spec)?;
    let mut body = Map::new();
    body.insert("internal_energy".into(), json!(e.total));
    body.insert("energy_terms".into(), breakdown_json(&e));
    body.insert("ks".into(), ks_state_json(&state, &run.spec));
    body.insert("residual_history".into(), json!(state.history));
    for l in 0..2 {
        if let Some(r) = state.density(l) {
            write_file(&run.cli_out, &format!("rho_{}.csv", run.spec.species[l].label), &density_csv(r))?;
        }
    }
    finish(run, body, started)
}

/// One shared orbital per species only reproduces bosons or single particles.
fn check_invertible(spec: &SystemSpec) -> Result<()> {
    for s in &spec.species {
        if s.count > 1 && s.statistics == Statistics::Fermion {
            return Err(Error::Validation {
                field: format!("{}.statistics", s.label),
                msg: "single-orbital inversion needs bosons or one particle".into(),
            });
        }
    }
    Ok(())
}

fn invert_ks_cmd(run: Run, started: Instant) -> Result<()> {
    check_invertible(&run.spec)?;
    let (h, psi) = exact_solve(&run)?;
    let d = extract_densities(&psi, 0);
    let rho = [d.rho[0].as_ref(), d.rho[1].as_ref()];
    let state = state_from_inversion(&run.spec, rho)?;
    let mut per = Map::new();
    let mut tks = [0.0; 2];
    for l in 0..2 {
        let Some(r) = rho[l] else { continue };
        let sp = &run.spec.species[l];
        let s = state.species[l].as_ref().ok_or(Error::MissingSpecies)?;
        tks[l] = s.kinetic;
        let l1 = s.density.l1_distance(r);
        let unit = GridFunction { grid: r.grid, values: r.values.iter().map(|v| v / sp.count as f64).collect() };
        let inv = invert_ks_single_orbital(&unit, sp.mass, run.spec.grid.stencil)?;
        let (eps, _) = resolve_inversion(&inv, &r.grid)?;
        let mut vs = GridFunction::zeros(r.grid);
        vs.values[inv.offset..inv.offset + inv.potential.grid.n_points].copy_from_slice(&inv.potential.values);
        let mut csv = String::from("r,v_s\n");
        for i in inv.offset..inv.offset + inv.potential.grid.n_points {
            let _ = writeln!(csv, "{:.16e},{:.16e}", r.grid.x(i), vs.values[i]);
        }
        write_file(&run.cli_out, &format!("vs_{}.csv", sp.label), &csv)?;
        write_file(&run.cli_out, &format!("rho_{}.csv", sp.label), &density_csv(r))?;
        per.insert(sp.label.clone(), json!({ "epsilon": eps, "kinetic_ks": s.kinetic, "density_l1_after_resolve": l1 }));
    }
    let e = energy_breakdown_exact(&h, &psi, rho, Some(tks));
    let mut body = Map::new();
    body.insert("internal_energy".into(), json!(psi.energy));
    body.insert("energy_terms".into(), breakdown_json(&e));
    body.insert("inversion".into(), Value::Object(per));
    finish(run, body, started)
}

fn compare_cmd(cli: &Cli, run: Run, started: Instant) -> Result<()> {
    let (h, psi) = exact_solve(&run)?;
    let d = extract_densities(&psi, 0);
    let (state, f) = if cli.functional == FunctionalArg::ExactOracle {
        // The oracle has no potential: use the KS state that reproduces the
        // exact densities and evaluate the oracle energy on it.
        check_invertible(&run.spec)?;
        let state = state_from_inversion(&run.spec, [d.rho[0].as_ref(), d.rho[1].as_ref()])?;
        (state, FunctionalSpec::uniform(Channel::ExactOracle).with_oracle(ExactOracle::from_exact(&h, &psi)))
    } else {
        let f = functional(cli);
        (scf_solve(&run.spec, &f, &ScfOptions::from_spec(&run.spec))?, f)
    };
    let e = ks_energy(&state, &f, &run.spec)?;
    let mut l1 = Map::new();
    for l in 0..2 {
        if let (Some(a), Some(b)) = (state.density(l), d.rho[l].as_ref()) {
            l1.insert(run.spec.species[l].label.clone(), json!(a.l1_distance(b)));
        }
    }
    let mut body = Map::new();
    body.insert("exact_energy".into(), json!(psi.energy));
    body.insert("ks_energy".into(), json!(e.total));
    body.insert("energy_gap".into(), json!(e.total - psi.energy));
    body.insert("density_l1".into(), Value::Object(l1));
    body.insert("ks_energy_terms".into(), breakdown_json(&e));
    body.insert("ks".into(), ks_state_json(&state, &run.spec));
    finish(run, body, started)
}

fn report_json(r: &LimitReport) -> Value {
    serde_json::to_value(r).unwrap_or(Value::Null)
}

fn sweep_cmd(cli: &Cli, run: Run, started: Instant) -> Result<()> {
    let report = match cli.command {
        Command::SweepMassRatio => {
            let v = cli.values.clone().unwrap_or_else(|| vec![10.0, 100.0, 1000.0, 10000.0]);
            limits::mass_ratio_sweep(&run.spec, &v)?
        }
        _ => {
            let v = cli.values.clone().unwrap_or_else(|| vec![1.0, 10.0, 100.0]);
            limits::classical_limit_sweep(&run.spec, &v)?
        }
    };
    write_file(&run.cli_out, "sweep.csv", &report.to_csv())?;
    let mut body = Map::new();
    body.insert("report".into(), report_json(&report));
    body.insert("pass".into(), json!(report.pass));
    finish(run, body, started)
}

fn clamped_cmd(cli: &Cli, run: Run, started: Instant) -> Result<()> {
    let ds = cli.values.clone().unwrap_or_else(|| (0..=45).map(|i| 0.5 + 0.1 * i as f64).collect());
    let scan = limits::clamped_scan(&run.spec, &ds)?;
    let mut csv = String::from("param,energy\n");
    for (d, e) in &scan {
        let _ = writeln!(csv, "{d:.16e},{e:.16e}");
    }
    write_file(&run.cli_out, "sweep.csv", &csv)?;
    let mut body = Map::new();
    body.insert("separations".into(), json!(ds));
    body.insert("energies".into(), json!(scan.iter().map(|p| p.1).collect::<Vec<_>>()));
    body.insert("local_minima".into(), json!(limits::count_minima(&scan)));
    body.insert("minimum_separation".into(), json!(limits::parabolic_min(&scan)));
    finish(run, body, started)
}

/// Fast invariant checks; returns (name, passed, detail) rows.
pub fn invariant_suite() -> Vec<(String, bool, String)> {
    use rand::{Rng, SeedableRng};
    let mut rows = Vec::new();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut worst = 0.0f64;
    for _ in 0..2000 {
        let n1 = rng.gen_range(1..=4);
        let n2 = rng.gen_range(0..=4);
        if n1 + n2 < 2 {
            continue;
        }
        let m = (rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0));
        let map = build_jacobi_map((n1, n2), m).expect("valid counts");
        let p: Vec<f64> = (0..n1 + n2).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let scale: f64 = p.iter().zip(&map.masses).map(|(p, m)| p * p / (2.0 * m)).sum();
        let r = kinetic_split_residual(&map, &p).unwrap_or(f64::INFINITY);
        let x: Vec<f64> = (0..n1 + n2).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let (cm, xi) = map.to_internal(&x).expect("length matches");
        let back = map.from_internal(cm, &xi).expect("length matches");
        let trip = x.iter().zip(&back).fold(0.0f64, |a, (u, v)| a.max((u - v).abs()));
        worst = worst.max(r / scale.max(1e-300)).max(trip);
    }
    rows.push(("kinetic_split_and_map_round_trip".into(), worst <= 1e-12, format!("worst {worst:.3e}")));

    let spec = SystemSpec {
        species: [
            crate::system::SpeciesSpec { label: "species1".into(), count: 1, mass: 1.0, statistics: Statistics::Fermion },
            crate::system::SpeciesSpec { label: "species2".into(), count: 1, mass: 1.0, statistics: Statistics::Fermion },
        ],
        u12: crate::system::PotentialSpec::Harmonic { k: 1.0 },
        grid: crate::system::GridSpec { x_min: -8.0, x_max: 8.0, n: 321, stencil: crate::grid::Stencil::Five },
        ..Default::default()
    };
    let text = spec.to_config_string();
    let round = parse_config(&text).map(|s| s == spec).unwrap_or(false);
    rows.push(("config_round_trip".into(), round, String::new()));

    match crate::exact::solve_spec(&spec) {
        Ok((_, psi)) => {
            let d = extract_densities(&psi, MAX_TABLE);
            let n1 = d.rho[0].as_ref().map(|r| r.integrate()).unwrap_or(f64::NAN);
            let g12 = d.gamma12.as_ref().map(|g| g.integrate()).unwrap_or(f64::NAN);
            let e = (psi.energy - std::f64::consts::FRAC_1_SQRT_2).abs();
            rows.push(("harmonic_pair_energy".into(), e < 1e-6, format!("|E - 1/sqrt2| = {e:.3e}")));
            rows.push(("density_normalization".into(), (n1 - 1.0).abs() < 1e-8, format!("{n1:.12}")));
            rows.push(("coupling_pair_normalization".into(), (g12 - 1.0).abs() < 1e-6, format!("{g12:.12}")));
        }
        Err(e) => rows.push(("harmonic_pair_solve".into(), false, e.to_string())),
    }
    rows
}

fn check_cmd(cli: &Cli, started: Instant) -> Result<bool> {
    let rows = invariant_suite();
    let mut all = true;
    let mut csv = String::from("check,pass,detail\n");
    for (name, ok, detail) in &rows {
        println!("{} {name} {detail}", if *ok { "PASS" } else { "FAIL" });
        let _ = writeln!(csv, "{name},{ok},{detail}");
        all &= ok;
    }
    if cli.config.is_some() {
        let run = load(cli)?;
        let mut body = Map::new();
        body.insert("pass".into(), json!(all));
        let dir = run.cli_out.clone();
        finish(run, body, started)?;
        write_file(&dir, "checks.csv", &csv)?;
    }
    Ok(all)
}

/// Runs the parsed command; returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let started = Instant::now();
    let result = match cli.command {
        Command::Check => check_cmd(cli, started).map(|ok| if ok { 0 } else { 1 }),
        cmd => load(cli).and_then(|run| {
            match cmd {
                Command::SolveExact => solve_exact_cmd(run, started),
                Command::SolveKs => solve_ks_cmd(cli, run, started),
                Command::InvertKs => invert_ks_cmd(run, started),
                Command::Compare => compare_cmd(cli, run, started),
                Command::SweepMassRatio | Command::SweepClassical => sweep_cmd(cli, run, started),
                Command::ClampedScan => clamped_cmd(cli, run, started),
                Command::Check => unreachable!(),
            }
            .map(|_| 0)
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", error_record(&e));
            exit_code(&e)
        }
    }
}
