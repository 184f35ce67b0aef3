//! Exact internal ground state on the relative-coordinate tensor grid.
//!
//! The center of mass is fixed at zero structurally: the state lives on the
//! ξ grid and every laboratory quantity is obtained by mapping ξ through the
//! inverse coordinate map with R = 0.

pub mod density;
pub mod lab;
pub mod symmetry;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::eigen::{lobpcg, EigenOptions};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::jacobi::JacobiMap;
use crate::system::{Statistics, SystemSpec};
use crate::tensor::{ShiftedKinetic, TensorGrid, TensorHamiltonian};

pub use density::{
    axis_kinetic, coupling_pair_density, energy_breakdown_exact, extract_densities, interacting_kinetic,
    internal_density, kinetic_matrix, momentum_density, pair_density, pair_interaction, species_kinetic,
    spectral_kinetic, DensitySet, MomentumDensity, Table2D,
};
pub use lab::{lab_density_convolve, lab_two_body_solve, CMWavepacket, LabSolution};
pub use symmetry::{symmetry_project, SymmetryGroup};

pub const MAX_PARTICLES: usize = 4;
pub const DEGENERACY_TOL: f64 = 1e-6;
pub const EDGE_LIMIT: f64 = 1e-10;
pub const DEFAULT_SEED: u64 = 0x5eed_1dff;

/// Potential energy pieces sampled on the ξ grid.
#[derive(Debug, Clone)]
pub struct PotentialTerms {
    /// Intra-species pair sums U^(1), U^(2).
    pub intra: [Vec<f64>; 2],
    /// Inter-species pair sum U^(12).
    pub coupling: Vec<f64>,
    /// Internal one-body potentials V_int^(1), V_int^(2).
    pub internal: [Vec<f64>; 2],
}

#[derive(Debug, Clone)]
pub struct InternalHamiltonian {
    pub spec: SystemSpec,
    pub map: JacobiMap,
    pub op: TensorHamiltonian,
    pub terms: PotentialTerms,
    pub group: SymmetryGroup,
    /// Grid for the one- and two-body densities in r − R.
    pub density_grid: Grid1D,
}

#[derive(Debug, Clone)]
pub struct InternalWavefunction {
    pub map: JacobiMap,
    pub grid: TensorGrid,
    /// Real amplitudes normalized as Σ|ψ|² ΔV = 1.
    pub amplitudes: Vec<f64>,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    /// ⟨ψ|P|ψ⟩ for the full (interpolated) symmetry projector.
    pub sector_weight: f64,
    pub density_grid: Grid1D,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub check_edges: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 4000, seed: DEFAULT_SEED, check_edges: true }
    }
}

/// Builds H_int on the configured grid (the same grid on every ξ axis);
/// densities use the same extent at half the spacing.
pub fn build_internal_hamiltonian(spec: &SystemSpec, map: &JacobiMap) -> Result<InternalHamiltonian> {
    let g = spec.grid();
    let d = map.n_relative();
    build_internal_hamiltonian_on(spec, map, vec![g; d], g.refined(2))
}

pub fn build_internal_hamiltonian_on(
    spec: &SystemSpec,
    map: &JacobiMap,
    axes: Vec<Grid1D>,
    density_grid: Grid1D,
) -> Result<InternalHamiltonian> {
    let n = map.n_particles();
    if n > MAX_PARTICLES {
        return Err(Error::SizeExceeded(n));
    }
    if n < 2 {
        return Err(Error::InvalidCount(format!("{n} particles")));
    }
    if spec.counts() != map.counts {
        return Err(Error::Validation { field: "species.count".into(), msg: "map and spec disagree".into() });
    }
    if axes.len() != n - 1 {
        return Err(Error::DimensionMismatch { expected: n - 1, got: axes.len() });
    }
    let grid = TensorGrid::new(axes);
    let b = map.position_coeffs();
    let species: Vec<usize> = (0..n).map(|i| map.species_of(i)).collect();
    let d = n - 1;
    let samples: Vec<[f64; 5]> = (0..grid.len)
        .into_par_iter()
        .map(|p| {
            let mut xi = [0.0; 3];
            grid.coords(p, &mut xi[..d]);
            let mut x = [0.0; 4];
            for i in 0..n {
                x[i] = (0..d).map(|a| b[(i, a)] * xi[a]).sum();
            }
            let mut out = [0.0; 5];
            for i in 0..n {
                out[3 + species[i]] += spec.v_int[species[i]].eval(x[i]);
                for j in i + 1..n {
                    let r = x[i] - x[j];
                    match (species[i], species[j]) {
                        (0, 0) => out[0] += spec.u11.eval(r),
                        (1, 1) => out[1] += spec.u22.eval(r),
                        _ => out[2] += spec.u12.eval(r),
                    }
                }
            }
            out
        })
        .collect();
    let col = |k: usize| samples.iter().map(|s| s[k]).collect::<Vec<f64>>();
    let terms = PotentialTerms { intra: [col(0), col(1)], coupling: col(2), internal: [col(3), col(4)] };
    let potential = samples.iter().map(|s| s.iter().sum()).collect();
    let op = TensorHamiltonian::new(grid.clone(), &map.reduced_masses, potential, spec.grid.stencil);
    let stats = [spec.species[0].statistics, spec.species[1].statistics];
    let mut group = SymmetryGroup::new(map, stats, &grid);
    if spec.is_exchange_symmetric() {
        group = group.with_exchange(map);
    }
    Ok(InternalHamiltonian { spec: spec.clone(), map: map.clone(), op, terms, group, density_grid })
}

impl InternalHamiltonian {
    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * self.op.grid.cell_volume()
    }

    /// ⟨ψ|f|ψ⟩ for a multiplicative operator sampled on the grid.
    pub fn expectation(&self, psi: &[f64], f: &[f64]) -> f64 {
        psi.iter().zip(f).map(|(p, v)| p * p * v).sum::<f64>() * self.op.grid.cell_volume()
    }

    fn start_vectors(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let g = &self.op.grid;
        let d = g.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let centre: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.2..0.2)).collect();
                let tilt: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let mut v: Vec<f64> = (0..g.len)
                    .map(|p| {
                        let mut xi = [0.0; 3];
                        g.coords(p, &mut xi[..d]);
                        let mut e = 0.0;
                        let mut lin = 1.0;
                        for a in 0..d {
                            let half = 0.5 * (g.axes[a].x_max - g.axes[a].x_min);
                            let s = (xi[a] - centre[a] * half) / (0.25 * half);
                            e += s * s;
                            lin += tilt[a] * s;
                        }
                        (-0.5 * e).exp() * lin
                    })
                    .collect();
                self.group.project_full(&mut v);
                v
            })
            .collect()
    }
}

/// Lowest eigenstate in the permutation-symmetry sector set by the species statistics.
pub fn solve_ground(h: &InternalHamiltonian, opts: &SolveOptions) -> Result<InternalWavefunction> {
    let grid = &h.op.grid;
    let pre = ShiftedKinetic::new(&h.op);
    let project = |v: &mut [f64]| {
        h.group.project_exact(v);
        grid.mask(v);
    };
    let all_exact = h.group.all_exact();
    let mut n_eig = if all_exact { 2 } else { 4 };
    let (e0, e1, mut psi, iterations, weight) = loop {
        let eopts = EigenOptions { n_eig, guard: 2, tol: opts.tol, max_iter: opts.max_iter, reproject_every: 10 };
        let start = h.start_vectors(n_eig + 2, opts.seed);
        let res = lobpcg(&h.op, &pre, &project, start, &eopts)?;
        if all_exact {
            break (res.values[0], res.values[1], res.vectors[0].clone(), res.iterations, 1.0);
        }
        // Classify by the weight in the full sector; exact symmetries alone
        // admit states of mixed symmetry.
        let weights: Vec<f64> = res
            .vectors
            .iter()
            .map(|v| {
                let mut pv = v.clone();
                h.group.project_full(&mut pv);
                pv.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / v.iter().map(|x| x * x).sum::<f64>()
            })
            .collect();
        let hits: Vec<usize> = (0..weights.len()).filter(|&j| weights[j] > 0.5).collect();
        if hits.len() >= 2 {
            let (a, b) = (hits[0], hits[1]);
            break (res.values[a], res.values[b], res.vectors[a].clone(), res.iterations, weights[a]);
        }
        if n_eig >= 32 {
            return Err(Error::NoConvergence { iterations: res.iterations, last: f64::NAN, history: res.history });
        }
        n_eig *= 2;
    };
    if (e1 - e0).abs() < DEGENERACY_TOL {
        return Err(Error::DegenerateGroundState { e0, e1 });
    }
    h.group.symmetrize_extra(&mut psi);
    let norm = h.dot(&psi, &psi).sqrt();
    psi.iter_mut().for_each(|x| *x /= norm);
    // Fix the overall sign deterministically.
    let (imax, _) = psi.iter().enumerate().fold((0, 0.0), |(k, m), (i, v)| if v.abs() > m { (i, v.abs()) } else { (k, m) });
    if psi[imax] < 0.0 {
        psi.iter_mut().for_each(|x| *x = -*x);
    }
    let mut hpsi = vec![0.0; psi.len()];
    h.op.apply(&psi, &mut hpsi);
    let energy = h.dot(&psi, &hpsi);
    let r: Vec<f64> = hpsi.iter().zip(&psi).map(|(a, b)| a - energy * b).collect();
    let residual_after = h.dot(&r, &r).sqrt();
    if opts.check_edges {
        let edge = edge_density(grid, &psi);
        if edge > EDGE_LIMIT {
            return Err(Error::BoxTooSmall { edge, limit: EDGE_LIMIT });
        }
    }
    Ok(InternalWavefunction {
        map: h.map.clone(),
        grid: grid.clone(),
        amplitudes: psi,
        energy,
        residual: residual_after,
        iterations,
        sector_weight: weight,
        density_grid: h.density_grid,
        seed: opts.seed,
    })
}

/// Largest |ψ|² on the outermost interior layer relative to the maximum.
pub fn edge_density(grid: &TensorGrid, psi: &[f64]) -> f64 {
    let max = psi.iter().fold(0.0f64, |m, v| m.max(v * v));
    if max == 0.0 {
        return 0.0;
    }
    let mut edge = 0.0f64;
    for (p, v) in psi.iter().enumerate() {
        let on_edge = (0..grid.dim()).any(|a| {
            let i = grid.index_of(p, a);
            i == 1 || i + 2 == grid.axes[a].n_points
        });
        if on_edge {
            edge = edge.max(v * v);
        }
    }
    edge / max
}

/// Convenience: standard map, default grid, solve.
pub fn solve_spec(spec: &SystemSpec) -> Result<(InternalHamiltonian, InternalWavefunction)> {
    let map = crate::jacobi::build_jacobi_map(spec.counts(), spec.masses())?;
    let h = build_internal_hamiltonian(spec, &map)?;
    let psi = solve_ground(&h, &SolveOptions::default())?;
    Ok((h, psi))
}

pub(crate) fn is_fermion(s: Statistics) -> bool {
    s == Statistics::Fermion
}

#[cfg(test)]
mod tests;
