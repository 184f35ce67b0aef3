//! Internal Kohn-Sham scheme: one noninteracting system per species in the
//! c.m. frame, coupled through density-dependent potentials.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::eigen::{lobpcg, EigenOptions};
use crate::energy::{EnergyBreakdown, XcParts};
use crate::error::{Error, Result};
use crate::exact::{
    extract_densities, species_kinetic, DensitySet, InternalHamiltonian, InternalWavefunction,
};
use crate::grid::{integrate, Grid1D, GridFunction, Stencil};
use crate::hartree::{hartree_energy, hartree_potential};
use crate::system::{InternalPotentialSpec, PotentialSpec, Statistics, SystemSpec};
use crate::tensor::{ShiftedKinetic, TensorGrid, TensorHamiltonian};

/// Largest interior size handled by dense diagonalization.
const DENSE_LIMIT: usize = 120;
pub const FERMI_GAP_TOL: f64 = 1e-10;
pub const INVERSION_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Channel {
    None,
    Hartree,
    Sic,
    ExactOracle,
}

impl Channel {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Channel::None),
            "hartree" | "hartree_only" | "hartree-only" => Ok(Channel::Hartree),
            "sic" => Ok(Channel::Sic),
            "exact-oracle" | "exact_oracle" => Ok(Channel::ExactOracle),
            _ => Err(Error::Validation { field: "functional".into(), msg: format!("unknown functional `{s}`") }),
        }
    }

    fn has_hartree(self) -> bool {
        self != Channel::None
    }
}

/// Exact reference quantities for the oracle channels. Interaction and
/// kinetic energies are ξ-space expectation values of the exact state.
#[derive(Debug, Clone)]
pub struct ExactOracle {
    pub densities: DensitySet,
    /// ⟨U^(l)⟩.
    pub interaction: [f64; 2],
    /// ⟨U^(12)⟩.
    pub coupling: f64,
    /// Interacting kinetic energy per species.
    pub kinetic: [f64; 2],
    pub energy: f64,
}

impl ExactOracle {
    pub fn from_exact(h: &InternalHamiltonian, psi: &InternalWavefunction) -> Self {
        let a = &psi.amplitudes;
        let counts = [psi.map.counts.0, psi.map.counts.1];
        Self {
            densities: extract_densities(psi, 2_000_000),
            interaction: [0, 1].map(|l| h.expectation(a, &h.terms.intra[l])),
            coupling: h.expectation(a, &h.terms.coupling),
            kinetic: [0, 1].map(|l| if counts[l] > 0 { species_kinetic(h, psi, l) } else { 0.0 }),
            energy: psi.energy,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FunctionalSpec {
    pub species: [Channel; 2],
    pub coupling: Channel,
    pub oracle: Option<Box<ExactOracle>>,
}

impl FunctionalSpec {
    pub fn uniform(c: Channel) -> Self {
        let coupling = if c == Channel::Sic { Channel::Hartree } else { c };
        Self { species: [c, c], coupling, oracle: None }
    }

    pub fn with_oracle(mut self, oracle: ExactOracle) -> Self {
        self.oracle = Some(Box::new(oracle));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.coupling == Channel::Sic {
            return Err(Error::Validation { field: "functional.coupling".into(), msg: "sic applies to a single species".into() });
        }
        let uses_oracle = self.coupling == Channel::ExactOracle || self.species.contains(&Channel::ExactOracle);
        if uses_oracle && self.oracle.is_none() {
            return Err(Error::MissingOracle);
        }
        Ok(())
    }

    /// True when every channel has a potential.
    pub fn is_differentiable(&self) -> bool {
        self.coupling != Channel::ExactOracle && !self.species.contains(&Channel::ExactOracle)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesState {
    pub mass: f64,
    pub count: usize,
    pub statistics: Statistics,
    pub orbitals: Vec<GridFunction>,
    pub eigenvalues: Vec<f64>,
    pub occupations: Vec<f64>,
    /// Σ_i n_i |φ_i|².
    pub density: GridFunction,
    /// Σ_i n_i ⟨φ_i| −∇²/2m |φ_i⟩.
    pub kinetic: f64,
}

impl SpeciesState {
    /// Occupies `orbitals` per the statistics and computes density and kinetic energy.
    pub fn from_orbitals(
        mass: f64,
        count: usize,
        statistics: Statistics,
        stencil: Stencil,
        orbitals: Vec<GridFunction>,
        eigenvalues: Vec<f64>,
    ) -> Self {
        let occupations: Vec<f64> =
            if statistics == Statistics::Boson { vec![count as f64] } else { vec![1.0; orbitals.len()] };
        let grid = orbitals[0].grid;
        let mut density = vec![0.0; grid.n_points];
        let mut kinetic = 0.0;
        for (o, w) in orbitals.iter().zip(&occupations) {
            add(&mut density, &o.values.iter().map(|x| x * x).collect::<Vec<f64>>(), *w);
            kinetic += w * kinetic_of(&grid, mass, stencil, &o.values);
        }
        Self {
            mass,
            count,
            statistics,
            orbitals,
            eigenvalues,
            occupations,
            density: GridFunction { grid, values: density },
            kinetic,
        }
    }

    /// Density of a single particle in orbital i.
    pub fn orbital_density(&self, i: usize) -> GridFunction {
        let o = &self.orbitals[i];
        GridFunction { grid: o.grid, values: o.values.iter().map(|v| v * v).collect() }
    }

    /// One entry per particle: the density each particle carries.
    fn particle_densities(&self) -> Vec<(f64, GridFunction)> {
        (0..self.orbitals.len()).map(|i| (self.occupations[i], self.orbital_density(i))).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSState {
    pub species: [Option<SpeciesState>; 2],
    pub grid: Grid1D,
    pub stencil: Stencil,
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<f64>,
}

impl KSState {
    pub fn density(&self, l: usize) -> Option<&GridFunction> {
        self.species[l].as_ref().map(|s| &s.density)
    }
}

/// KS equations live on the same grid as the exact internal densities.
pub fn ks_grid(spec: &SystemSpec) -> Grid1D {
    spec.grid().refined(2)
}

/// Lowest `k` eigenpairs of −∇²/2m + v with Dirichlet ends; orbitals are
/// normalized to Σφ²h = 1 with a positive first lobe.
pub fn lowest_states(grid: &Grid1D, mass: f64, v: &[f64], stencil: Stencil, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    lowest_states_from(grid, mass, v, stencil, k, &[])
}

/// As [`lowest_states`], seeding the iterative path with `warm` vectors.
/// One extra state beyond `k` is always returned.
pub fn lowest_states_from(
    grid: &Grid1D,
    mass: f64,
    v: &[f64],
    stencil: Stencil,
    k: usize,
    warm: &[Vec<f64>],
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = grid.n_points;
    let m = n - 2;
    let op = TensorHamiltonian::new(TensorGrid::new(vec![*grid]), &[mass], v.to_vec(), stencil);
    let (values, mut vectors) = if m <= DENSE_LIMIT {
        let mut a = DMatrix::zeros(m, m);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..m {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j + 1] = 1.0;
            op.apply(&e, &mut col);
            for i in 0..m {
                a[(i, j)] = col[i + 1];
            }
        }
        let a = 0.5 * (&a + a.transpose());
        let eig = SymmetricEigen::new(a);
        let mut idx: Vec<usize> = (0..m).collect();
        idx.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
        let take = (k + 1).min(m);
        let vals: Vec<f64> = idx[..take].iter().map(|&j| eig.eigenvalues[j]).collect();
        let vecs: Vec<Vec<f64>> = idx[..take]
            .iter()
            .map(|&j| {
                let mut f = vec![0.0; n];
                for i in 0..m {
                    f[i + 1] = eig.eigenvectors[(i, j)];
                }
                f
            })
            .collect();
        (vals, vecs)
    } else {
        let pre = ShiftedKinetic::new(&op);
        let width = 0.5 * (grid.x_max - grid.x_min);
        let mut start: Vec<Vec<f64>> = warm.iter().take(k + 3).cloned().collect();
        start.extend((start.len()..k + 3).map(|s| {
                let mut f: Vec<f64> = (0..n)
                    .map(|i| {
                        let x = (grid.x(i) - 0.5 * (grid.x_min + grid.x_max)) / width;
                        (-(x * x) * 8.0).exp() * (1.0 + x).powi(s as i32)
                    })
                    .collect();
                f[0] = 0.0;
                f[n - 1] = 0.0;
                f
            }));
        let mask = |f: &mut [f64]| {
            f[0] = 0.0;
            let l = f.len() - 1;
            f[l] = 0.0;
        };
        let opts = EigenOptions { n_eig: k + 1, guard: 2, tol: 1e-10, max_iter: 5000, reproject_every: 10 };
        let res = lobpcg(&op, &pre, &mask, start, &opts)?;
        (res.values, res.vectors)
    };
    for f in vectors.iter_mut() {
        let norm = (f.iter().map(|x| x * x).sum::<f64>() * grid.spacing).sqrt();
        let lead = f.iter().find(|x| x.abs() > 1e-8 * norm / grid.spacing.sqrt()).copied().unwrap_or(1.0);
        let s = lead.signum() / norm;
        f.iter_mut().for_each(|x| *x *= s);
    }
    Ok((values, vectors))
}

fn kinetic_of(grid: &Grid1D, mass: f64, stencil: Stencil, f: &[f64]) -> f64 {
    let d2 = crate::grid::second_derivative(f, grid.spacing, stencil);
    -0.5 / mass * f.iter().zip(&d2).map(|(a, b)| a * b).sum::<f64>() * grid.spacing
}

fn internal_potential(grid: &Grid1D, v: &InternalPotentialSpec) -> Vec<f64> {
    grid.points().iter().map(|&r| v.eval(r)).collect()
}

fn add(a: &mut [f64], b: &[f64], s: f64) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += s * y);
}

/// Orbital-independent part of v_S^(l) for the given densities.
fn common_potential(spec: &SystemSpec, f: &FunctionalSpec, l: usize, rho: [Option<&GridFunction>; 2], grid: &Grid1D) -> Result<Vec<f64>> {
    if !f.is_differentiable() {
        return Err(Error::NotDifferentiable);
    }
    let mut v = internal_potential(grid, &spec.v_int[l]);
    if let Some(r) = rho[l] {
        if f.species[l].has_hartree() {
            add(&mut v, &hartree_potential(r, spec.intra(l)).values, 1.0);
        }
    }
    if let Some(r) = rho[1 - l] {
        if f.coupling.has_hartree() {
            add(&mut v, &hartree_potential(r, &spec.u12).values, 1.0);
        }
    }
    Ok(v)
}

/// U^(l/l) for orbital `i`: zero except for sic, where it is −v_H of the
/// orbital's own density.
pub fn xc_potential(f: &FunctionalSpec, spec: &SystemSpec, state: &SpeciesState, l: usize, i: usize) -> Result<GridFunction> {
    let g = state.density.grid;
    match f.species[l] {
        Channel::ExactOracle => Err(Error::NotDifferentiable),
        Channel::Sic => {
            let v = hartree_potential(&state.orbital_density(i), spec.intra(l));
            Ok(GridFunction { grid: g, values: v.values.iter().map(|x| -x).collect() })
        }
        _ => Ok(GridFunction::zeros(g)),
    }
}

/// v_S^(l) acting on orbital `i` of species l.
pub fn ks_potential(l: usize, i: usize, state: &KSState, spec: &SystemSpec, f: &FunctionalSpec) -> Result<GridFunction> {
    let s = state.species[l].as_ref().ok_or(Error::MissingSpecies)?;
    let mut v = common_potential(spec, f, l, [state.density(0), state.density(1)], &state.grid)?;
    add(&mut v, &xc_potential(f, spec, s, l, i)?.values, 1.0);
    Ok(GridFunction { grid: state.grid, values: v })
}

fn occupy(
    l: usize,
    count: usize,
    stats: Statistics,
    mass: f64,
    grid: &Grid1D,
    stencil: Stencil,
    common: &[f64],
    sic: Option<(&PotentialSpec, &[GridFunction])>,
    warm: &mut Vec<Vec<Vec<f64>>>,
) -> Result<SpeciesState> {
    let n_orb = if stats == Statistics::Boson { 1 } else { count };
    let n_sets = if sic.is_some() { n_orb } else { 1 };
    warm.resize(n_sets, Vec::new());
    let (eps, orbitals) = match sic {
        None => {
            let (vals, vecs) = lowest_states_from(grid, mass, common, stencil, n_orb, &warm[0])?;
            warm[0] = vecs.clone();
            if stats == Statistics::Fermion && vals.len() > n_orb {
                let gap = vals[n_orb] - vals[n_orb - 1];
                if gap < FERMI_GAP_TOL {
                    return Err(Error::DegenerateFermiLevel { species: l + 1, gap });
                }
            }
            (vals[..n_orb].to_vec(), vecs[..n_orb].to_vec())
        }
        Some((u, prev)) => {
            // Each orbital sees the common potential minus its own Hartree
            // field; orbital i is the i-th state of its own Hamiltonian.
            let mut eps = Vec::new();
            let mut orbs: Vec<Vec<f64>> = Vec::new();
            for (i, pd) in prev.iter().enumerate().take(n_orb) {
                let mut v = common.to_vec();
                add(&mut v, &hartree_potential(pd, u).values, -1.0);
                let (vals, vecs) = lowest_states_from(grid, mass, &v, stencil, i + 1, &warm[i])?;
                eps.push(vals[i]);
                orbs.push(vecs[i].clone());
                warm[i] = vecs;
            }
            // Orthonormalize in order.
            for i in 0..orbs.len() {
                for j in 0..i {
                    let c = orbs[i].iter().zip(&orbs[j]).map(|(a, b)| a * b).sum::<f64>() * grid.spacing;
                    let oj = orbs[j].clone();
                    add(&mut orbs[i], &oj, -c);
                }
                let nrm = (orbs[i].iter().map(|x| x * x).sum::<f64>() * grid.spacing).sqrt();
                orbs[i].iter_mut().for_each(|x| *x /= nrm);
            }
            (eps, orbs)
        }
    };
    let orbitals = orbitals.into_iter().map(|values| GridFunction { grid: *grid, values }).collect();
    Ok(SpeciesState::from_orbitals(mass, count, stats, stencil, orbitals, eps))
}

fn l1(a: &GridFunction, b: &GridFunction) -> f64 {
    a.l1_distance(b)
}

fn mix(old: &GridFunction, new: &GridFunction, alpha: f64) -> GridFunction {
    GridFunction { grid: old.grid, values: old.values.iter().zip(&new.values).map(|(o, n)| (1.0 - alpha) * o + alpha * n).collect() }
}

#[derive(Debug, Clone, Copy)]
pub struct ScfOptions {
    pub tol: f64,
    pub mix: f64,
    pub max_iter: usize,
}

impl ScfOptions {
    pub fn from_spec(spec: &SystemSpec) -> Self {
        Self { tol: spec.solver.tol, mix: spec.solver.mix, max_iter: spec.solver.max_iter }
    }
}

/// Self-consistent solution with linear density mixing.
pub fn scf_solve(spec: &SystemSpec, f: &FunctionalSpec, opts: &ScfOptions) -> Result<KSState> {
    scf_solve_external(spec, f, opts, [None, None])
}

/// As [`scf_solve`] with a fixed extra one-body potential per species,
/// sampled on [`ks_grid`].
pub fn scf_solve_external(
    spec: &SystemSpec,
    f: &FunctionalSpec,
    opts: &ScfOptions,
    external: [Option<&[f64]>; 2],
) -> Result<KSState> {
    f.validate()?;
    if !f.is_differentiable() {
        return Err(Error::NotDifferentiable);
    }
    let grid = ks_grid(spec);
    let stencil = spec.grid.stencil;
    let counts = [spec.species[0].count, spec.species[1].count];
    let active: Vec<usize> = (0..2).filter(|&l| counts[l] > 0).collect();
    let sp = |l: usize| &spec.species[l];

    // Start: v_int-only solutions, or a normalized Gaussian guess when v_int is none.
    let mut rho: [Option<GridFunction>; 2] = [None, None];
    let mut orb_rho: [Vec<GridFunction>; 2] = [Vec::new(), Vec::new()];
    let mut warm: [Vec<Vec<Vec<f64>>>; 2] = [Vec::new(), Vec::new()];
    for &l in &active {
        let n_orb = if sp(l).statistics == Statistics::Boson { 1 } else { counts[l] };
        if let Some(ext) = external[l] {
            if ext.len() != grid.n_points {
                return Err(Error::DimensionMismatch { expected: grid.n_points, got: ext.len() });
            }
        }
        if !spec.v_int[l].is_none() || external[l].is_some() {
            let mut v = internal_potential(&grid, &spec.v_int[l]);
            if let Some(ext) = external[l] {
                add(&mut v, ext, 1.0);
            }
            let s = occupy(l, counts[l], sp(l).statistics, sp(l).mass, &grid, stencil, &v, None, &mut warm[l])?;
            orb_rho[l] = (0..n_orb).map(|i| s.orbital_density(i)).collect();
            rho[l] = Some(s.density);
        } else {
            let w = 0.1 * (grid.x_max - grid.x_min);
            let c = 0.5 * (grid.x_max + grid.x_min);
            let g = GridFunction::from_fn(grid, |r| (-(r - c).powi(2) / (2.0 * w * w)).exp());
            let norm = g.integrate();
            let unit = GridFunction { grid, values: g.values.iter().map(|v| v / norm).collect() };
            orb_rho[l] = vec![unit.clone(); n_orb];
            rho[l] = Some(GridFunction { grid, values: unit.values.iter().map(|v| v * counts[l] as f64).collect() });
        }
    }

    let mut history = Vec::new();
    for it in 1..=opts.max_iter {
        let mut new: [Option<SpeciesState>; 2] = [None, None];
        for &l in &active {
            let mut common = common_potential(spec, f, l, [rho[0].as_ref(), rho[1].as_ref()], &grid)?;
            if let Some(ext) = external[l] {
                add(&mut common, ext, 1.0);
            }
            let sic = (f.species[l] == Channel::Sic).then(|| (spec.intra(l), orb_rho[l].as_slice()));
            new[l] = Some(occupy(l, counts[l], sp(l).statistics, sp(l).mass, &grid, stencil, &common, sic, &mut warm[l])?);
        }
        let residual = active
            .iter()
            .map(|&l| l1(&new[l].as_ref().unwrap().density, rho[l].as_ref().unwrap()))
            .fold(0.0, f64::max);
        history.push(residual);
        if residual <= opts.tol {
            return Ok(KSState { species: new, grid, stencil, iterations: it, residual, history });
        }
        for &l in &active {
            let s = new[l].as_ref().unwrap();
            rho[l] = Some(mix(rho[l].as_ref().unwrap(), &s.density, opts.mix));
            orb_rho[l] = orb_rho[l].iter().enumerate().map(|(i, o)| mix(o, &s.orbital_density(i), opts.mix)).collect();
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, last: *history.last().unwrap_or(&f64::NAN), history })
}

/// XC and coupling-correlation energies for each channel.
pub fn xc_energy(f: &FunctionalSpec, state: &KSState, spec: &SystemSpec) -> Result<([XcParts; 2], f64)> {
    f.validate()?;
    let mut xc = [XcParts::default(); 2];
    for l in 0..2 {
        let Some(s) = state.species[l].as_ref() else { continue };
        let u = spec.intra(l);
        match f.species[l] {
            Channel::None | Channel::Hartree => {}
            Channel::Sic => {
                let e: f64 = s.particle_densities().iter().map(|(n, r)| n * hartree_energy(r, r, u, true)).sum();
                xc[l].interaction = -e;
            }
            Channel::ExactOracle => {
                let o = f.oracle.as_ref().ok_or(Error::MissingOracle)?;
                xc[l].interaction = o.interaction[l] - hartree_energy(&s.density, &s.density, u, true);
                xc[l].kinetic = o.kinetic[l] - s.kinetic;
            }
        }
    }
    let mut c12 = 0.0;
    if f.coupling == Channel::ExactOracle {
        let o = f.oracle.as_ref().ok_or(Error::MissingOracle)?;
        if let (Some(a), Some(b)) = (state.density(0), state.density(1)) {
            c12 = o.coupling - hartree_energy(a, b, &spec.u12, false);
        }
    }
    Ok((xc, c12))
}

/// Internal energy of the KS state under the chosen functional.
pub fn ks_energy(state: &KSState, f: &FunctionalSpec, spec: &SystemSpec) -> Result<EnergyBreakdown> {
    let (xc, c12) = xc_energy(f, state, spec)?;
    let mut e = EnergyBreakdown { kinetic_ks_available: true, xc, c12, ..Default::default() };
    for l in 0..2 {
        let Some(s) = state.species[l].as_ref() else { continue };
        e.kinetic_ks[l] = s.kinetic;
        if f.species[l].has_hartree() {
            e.hartree[l] = hartree_energy(&s.density, &s.density, spec.intra(l), true);
        }
        let v = internal_potential(&state.grid, &spec.v_int[l]);
        let w: Vec<f64> = v.iter().zip(&s.density.values).map(|(a, b)| a * b).collect();
        e.v_int[l] = integrate(&state.grid, &w);
    }
    if let (Some(a), Some(b)) = (state.density(0), state.density(1)) {
        if f.coupling.has_hartree() {
            e.hartree_12 = hartree_energy(a, b, &spec.u12, false);
        }
    }
    Ok(e.finalize())
}

/// Potential whose single-orbital ground state reproduces a density.
#[derive(Debug, Clone, PartialEq)]
pub struct Inversion {
    /// v_S on the retained subgrid (its end nodes are Dirichlet nodes).
    pub potential: GridFunction,
    /// Index of the subgrid's first node in the original grid.
    pub offset: usize,
    /// Orbital energy with the chosen constant.
    pub epsilon: f64,
    pub mass: f64,
    pub stencil: Stencil,
}

/// v_S = ε + (D²√ρ)/(2m√ρ) on the retained support ρ ≥ 1e−10 max ρ, with
/// the constant fixed so that v_S vanishes (on average) at the two retained
/// edges. The re-solve uses the same stencil, so √ρ is an eigenvector of the
/// returned potential up to the density cut at the retained edges.
pub fn invert_ks_single_orbital(rho: &GridFunction, mass: f64, stencil: Stencil) -> Result<Inversion> {
    let g = rho.grid;
    let max = rho.values.iter().cloned().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::UnstableInversion("density is not positive anywhere".into()));
    }
    let cut = INVERSION_CUTOFF * max;
    let keep: Vec<bool> = rho.values.iter().map(|&v| v >= cut).collect();
    let first = keep.iter().position(|&k| k).unwrap();
    let last = keep.iter().rposition(|&k| k).unwrap();
    if let Some(i) = (first..=last).find(|&i| !keep[i]) {
        return Err(Error::UnstableInversion(format!("density falls below the cutoff inside its support at r = {}", g.x(i))));
    }
    // Dirichlet nodes on either side of the retained block.
    let lo = first.saturating_sub(1);
    let hi = (last + 1).min(g.n_points - 1);
    let n = hi - lo + 1;
    if n < 8 {
        return Err(Error::UnstableInversion("retained support is too narrow".into()));
    }
    let sub = Grid1D::new(g.x(lo), g.x(hi), n)?;
    // Derivatives use the full density, so the truncation does not leak
    // into the potential near the retained edges.
    let phi: Vec<f64> = rho.values.iter().map(|v| v.max(0.0).sqrt()).collect();
    let d2 = crate::grid::second_derivative(&phi, g.spacing, stencil);
    let mut v = vec![0.0; n];
    for i in 1..n - 1 {
        v[i] = d2[lo + i] / (2.0 * mass * phi[lo + i]);
    }
    let edge = 0.5 * (v[1] + v[n - 2]);
    v.iter_mut().skip(1).take(n - 2).for_each(|x| *x -= edge);
    v[0] = 0.0;
    v[n - 1] = 0.0;
    Ok(Inversion { potential: GridFunction { grid: sub, values: v }, offset: lo, epsilon: -edge, mass, stencil })
}

/// Ground orbital energy and orbital of an inverted potential, embedded
/// back into the full grid.
pub fn resolve_inversion(inv: &Inversion, full: &Grid1D) -> Result<(f64, GridFunction)> {
    let sub = inv.potential.grid;
    let (vals, vecs) = lowest_states(&sub, inv.mass, &inv.potential.values, inv.stencil, 1)?;
    let mut out = vec![0.0; full.n_points];
    out[inv.offset..inv.offset + sub.n_points].copy_from_slice(&vecs[0]);
    Ok((vals[0], GridFunction { grid: *full, values: out }))
}

/// KS state with one orbital per species taken from inverted densities;
/// `count` particles share the orbital.
pub fn state_from_inversion(spec: &SystemSpec, rho: [Option<&GridFunction>; 2]) -> Result<KSState> {
    let grid = ks_grid(spec);
    let stencil = spec.grid.stencil;
    let mut species: [Option<SpeciesState>; 2] = [None, None];
    for l in 0..2 {
        let Some(r) = rho[l] else { continue };
        let sp = &spec.species[l];
        let per = GridFunction { grid: r.grid, values: r.values.iter().map(|v| v / sp.count as f64).collect() };
        let inv = invert_ks_single_orbital(&per, sp.mass, stencil)?;
        let (eps, orbital) = resolve_inversion(&inv, &grid)?;
        species[l] = Some(SpeciesState::from_orbitals(sp.mass, sp.count, Statistics::Boson, stencil, vec![orbital], vec![eps]));
    }
    Ok(KSState { species, grid, stencil, iterations: 0, residual: 0.0, history: vec![] })
}

#[cfg(test)]
mod tests;
