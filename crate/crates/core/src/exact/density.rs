//! Densities, kinetic energies and the energy decomposition from an exact
//! internal state.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::energy::{EnergyBreakdown, XcParts};
use crate::error::{Error, Result};
use crate::grid::{fft_index, Grid1D, GridFunction};
use crate::hartree::hartree_energy;

use super::{InternalHamiltonian, InternalWavefunction};

const CHUNKS: usize = 16;

/// Square table f(r, r′) on one grid, row index r.
#[derive(Debug, Clone, PartialEq)]
pub struct Table2D {
    pub grid: Grid1D,
    pub values: Vec<f64>,
}

impl Table2D {
    pub fn zeros(grid: Grid1D) -> Self {
        Self { grid, values: vec![0.0; grid.n_points * grid.n_points] }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n_points + j]
    }

    /// Trapezoid rule in both variables.
    pub fn integrate(&self) -> f64 {
        let w = self.grid.trapezoid_weights();
        let n = self.grid.n_points;
        (0..n).map(|i| w[i] * (0..n).map(|j| w[j] * self.at(i, j)).sum::<f64>()).sum()
    }

    /// ∫ f(r, r′) dr′ as a function of r.
    pub fn marginal(&self) -> GridFunction {
        let w = self.grid.trapezoid_weights();
        let n = self.grid.n_points;
        let values = (0..n).map(|i| (0..n).map(|j| w[j] * self.at(i, j)).sum()).collect();
        GridFunction { grid: self.grid, values }
    }

    pub fn transpose(&self) -> Self {
        let n = self.grid.n_points;
        let mut t = Self::zeros(self.grid);
        for i in 0..n {
            for j in 0..n {
                t.values[j * n + i] = self.at(i, j);
            }
        }
        t
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// ∬|a − b| with the trapezoid weights.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        let w = self.grid.trapezoid_weights();
        let n = self.grid.n_points;
        (0..n)
            .map(|i| w[i] * (0..n).map(|j| w[j] * (self.at(i, j) - other.at(i, j)).abs()).sum::<f64>())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentumDensity {
    pub density: GridFunction,
    /// ∫ p ρ(p) dp from the unbinned spectrum.
    pub mean: f64,
    /// Σ_i ⟨p_i²⟩/2m_i over the species, from the unbinned spectrum.
    pub kinetic: f64,
}

/// All density objects for both species. Entries are absent when the
/// species is empty (or has a single particle, for the pair density).
#[derive(Debug, Clone)]
pub struct DensitySet {
    pub rho: [Option<GridFunction>; 2],
    pub gamma: [Option<Table2D>; 2],
    pub gamma12: Option<Table2D>,
    pub rho_p: [Option<GridFunction>; 2],
}

impl DensitySet {
    pub fn rho(&self, l: usize) -> Result<&GridFunction> {
        self.rho[l].as_ref().ok_or(Error::MissingSpecies)
    }
}

/// Probability weight |ψ|²ΔV and laboratory positions r_i − R for every
/// interior ξ node, split into a fixed number of chunks.
fn weighted_positions(psi: &InternalWavefunction, particles: &[usize]) -> Vec<Vec<(f64, [f64; 4])>> {
    let g = &psi.grid;
    let d = g.dim();
    let b = psi.map.position_coeffs();
    let dv = g.cell_volume();
    let len = g.len;
    let chunk = len.div_ceil(CHUNKS);
    (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut out = Vec::new();
            let mut xi = [0.0; 3];
            for p in c * chunk..((c + 1) * chunk).min(len) {
                let a = psi.amplitudes[p];
                if a == 0.0 || !g.is_interior(p) {
                    continue;
                }
                g.coords(p, &mut xi[..d]);
                let mut r = [0.0; 4];
                for (k, &i) in particles.iter().enumerate() {
                    r[k] = (0..d).map(|al| b[(i, al)] * xi[al]).sum();
                }
                out.push((a * a * dv, r));
            }
            out
        })
        .collect()
}

fn cic(grid: &Grid1D, x: f64) -> Option<(usize, f64)> {
    let (i, t) = grid.locate(x)?;
    Some((i, t))
}

fn species_indices(psi: &InternalWavefunction, l: usize) -> Vec<usize> {
    psi.map.species_particles(l).collect()
}

/// ρ_int^(l)(r) by cloud-in-cell binning of r_i − R over species-l particles.
pub fn internal_density(psi: &InternalWavefunction, l: usize) -> GridFunction {
    let rg = psi.density_grid;
    let idx = species_indices(psi, l);
    let chunks = weighted_positions(psi, &idx);
    let partial: Vec<Vec<f64>> = chunks
        .par_iter()
        .map(|ch| {
            let mut bins = vec![0.0; rg.n_points];
            for (w, r) in ch {
                for x in r.iter().take(idx.len()) {
                    if let Some((i, t)) = cic(&rg, *x) {
                        bins[i] += w * (1.0 - t);
                        if t > 0.0 {
                            bins[i + 1] += w * t;
                        }
                    }
                }
            }
            bins
        })
        .collect();
    let mut values = vec![0.0; rg.n_points];
    for b in partial {
        values.iter_mut().zip(b).for_each(|(v, x)| *v += x);
    }
    values.iter_mut().for_each(|v| *v /= rg.spacing);
    GridFunction { grid: rg, values }
}

fn bin_pairs(psi: &InternalWavefunction, particles: &[usize], pairs: &[(usize, usize)]) -> Table2D {
    let rg = psi.density_grid;
    let n = rg.n_points;
    let chunks = weighted_positions(psi, particles);
    let partial: Vec<Vec<f64>> = chunks
        .par_iter()
        .map(|ch| {
            let mut t = vec![0.0; n * n];
            for (w, r) in ch {
                for &(a, b) in pairs {
                    let (Some((i, ti)), Some((j, tj))) = (cic(&rg, r[a]), cic(&rg, r[b])) else {
                        continue;
                    };
                    for (di, wi) in [(0, 1.0 - ti), (1, ti)] {
                        if wi == 0.0 {
                            continue;
                        }
                        for (dj, wj) in [(0, 1.0 - tj), (1, tj)] {
                            if wj != 0.0 {
                                t[(i + di) * n + j + dj] += w * wi * wj;
                            }
                        }
                    }
                }
            }
            t
        })
        .collect();
    let mut values = vec![0.0; n * n];
    for p in partial {
        values.iter_mut().zip(p).for_each(|(v, x)| *v += x);
    }
    let s = 1.0 / (rg.spacing * rg.spacing);
    values.iter_mut().for_each(|v| *v *= s);
    Table2D { grid: rg, values }
}

/// γ^(l)(r, r′) over ordered pairs of distinct species-l particles.
pub fn pair_density(psi: &InternalWavefunction, l: usize) -> Result<Table2D> {
    let idx = species_indices(psi, l);
    if idx.len() < 2 {
        return Err(Error::TooFewParticles { species: l + 1, count: idx.len() });
    }
    let k = idx.len();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|a| (0..k).filter(move |&b| b != a).map(move |b| (a, b))).collect();
    Ok(bin_pairs(psi, &idx, &pairs))
}

/// γ^(12)(r, r′), r for species 1 and r′ for species 2.
pub fn coupling_pair_density(psi: &InternalWavefunction) -> Result<Table2D> {
    let (n1, n2) = psi.map.counts;
    if n1 == 0 || n2 == 0 {
        return Err(Error::MissingSpecies);
    }
    let idx: Vec<usize> = (0..n1 + n2).collect();
    let pairs: Vec<(usize, usize)> = (0..n1).flat_map(|a| (n1..n1 + n2).map(move |b| (a, b))).collect();
    Ok(bin_pairs(psi, &idx, &pairs))
}

/// |ψ̃(κ)|² on the DFT momenta of every axis, normalized so Σ|ψ̃|² Δκ = 1.
fn momentum_probability(psi: &InternalWavefunction) -> (Vec<f64>, Vec<Vec<f64>>, f64) {
    let g = &psi.grid;
    let d = g.dim();
    let mut buf: Vec<Complex64> = psi.amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect();
    let mut planner = FftPlanner::new();
    for a in 0..d {
        let n = g.axes[a].n_points;
        let s = g.strides[a];
        let fft = planner.plan_fft_forward(n);
        let block = s * n;
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for o in 0..g.len / block {
            for i in 0..s {
                let base = o * block + i;
                for k in 0..n {
                    line[k] = buf[base + k * s];
                }
                fft.process(&mut line);
                for k in 0..n {
                    buf[base + k * s] = line[k];
                }
            }
        }
    }
    let kappas: Vec<Vec<f64>> = g
        .axes
        .iter()
        .map(|ax| {
            let dk = 2.0 * PI / (ax.n_points as f64 * ax.spacing);
            (0..ax.n_points).map(|m| fft_index(m, ax.n_points) as f64 * dk).collect()
        })
        .collect();
    let dkappa: f64 = g.axes.iter().map(|ax| 2.0 * PI / (ax.n_points as f64 * ax.spacing)).product();
    let scale = (g.cell_volume() * g.cell_volume()) / (2.0 * PI).powi(d as i32);
    let prob = buf.iter().map(|v| v.norm_sqr() * scale).collect();
    (prob, kappas, dkappa)
}

/// ρ_int^(l)(p): the transformed state binned by the laboratory momenta
/// p_i = Σ_α C_iα κ_α of species-l particles on the P = 0 slice.
pub fn momentum_density(psi: &InternalWavefunction, l: usize) -> MomentumDensity {
    let g = &psi.grid;
    let d = g.dim();
    let (prob, kappas, dkappa) = momentum_probability(psi);
    let c = psi.map.momentum_coeffs();
    let idx = species_indices(psi, l);
    let dk_min = g.axes.iter().map(|ax| 2.0 * PI / (ax.n_points as f64 * ax.spacing)).fold(f64::INFINITY, f64::min);
    let pmax: f64 = idx
        .iter()
        .map(|&i| (0..d).map(|a| c[(i, a)].abs() * kappas[a].iter().fold(0.0f64, |m, k| m.max(k.abs()))).sum::<f64>())
        .fold(0.0, f64::max);
    let dp = 0.5 * dk_min;
    let half = (pmax / dp).ceil() as usize + 1;
    let pg = Grid1D::new(-(half as f64) * dp, half as f64 * dp, 2 * half + 1).expect("momentum grid");
    let mut bins = vec![0.0; pg.n_points];
    let (mut mean, mut kin) = (0.0, 0.0);
    for (p, w) in prob.iter().enumerate() {
        let w = w * dkappa;
        if w == 0.0 {
            continue;
        }
        for &i in &idx {
            let pi: f64 = (0..d).map(|a| c[(i, a)] * kappas[a][g.index_of(p, a)]).sum();
            mean += w * pi;
            kin += w * pi * pi / (2.0 * psi.map.masses[i]);
            if let Some((k, t)) = pg.locate(pi) {
                bins[k] += w * (1.0 - t);
                if t > 0.0 {
                    bins[k + 1] += w * t;
                }
            }
        }
    }
    bins.iter_mut().for_each(|v| *v /= dp);
    MomentumDensity { density: GridFunction { grid: pg, values: bins }, mean, kinetic: kin }
}

/// Σ_α ⟨τ_α²⟩/2μ_α from the spectrum.
pub fn spectral_kinetic(psi: &InternalWavefunction) -> f64 {
    let g = &psi.grid;
    let (prob, kappas, dkappa) = momentum_probability(psi);
    prob.iter()
        .enumerate()
        .map(|(p, w)| {
            (0..g.dim()).map(|a| kappas[a][g.index_of(p, a)].powi(2) / (2.0 * psi.map.reduced_masses[a])).sum::<f64>()
                * w
                * dkappa
        })
        .sum()
}

/// K_αβ = ⟨∂_α ψ, ∂_β ψ⟩ with the stencil derivatives (second derivative on
/// the diagonal, so Σ K_αα/2μ_α is exactly the stencil kinetic energy).
pub fn kinetic_matrix(h: &InternalHamiltonian, psi: &InternalWavefunction) -> Vec<Vec<f64>> {
    let d = psi.grid.dim();
    let n = psi.grid.len;
    let v = &psi.amplitudes;
    let dv = psi.grid.cell_volume();
    let mut firsts = Vec::new();
    let mut k = vec![vec![0.0; d]; d];
    for a in 0..d {
        let mut tmp = vec![0.0; n];
        h.op.second_derivative(v, a, &mut tmp);
        k[a][a] = -v.iter().zip(&tmp).map(|(x, y)| x * y).sum::<f64>() * dv;
        if d > 1 {
            h.op.first_derivative(v, a, &mut tmp);
            firsts.push(tmp);
        }
    }
    for a in 0..d {
        for b in a + 1..d {
            let s = firsts[a].iter().zip(&firsts[b]).map(|(x, y)| x * y).sum::<f64>() * dv;
            k[a][b] = s;
            k[b][a] = s;
        }
    }
    k
}

/// Per-axis kinetic energies ⟨τ_α²⟩/2μ_α with the stencil.
pub fn axis_kinetic(h: &InternalHamiltonian, psi: &InternalWavefunction) -> Vec<f64> {
    let k = kinetic_matrix(h, psi);
    (0..k.len()).map(|a| k[a][a] / (2.0 * psi.map.reduced_masses[a])).collect()
}

/// Σ_α ⟨τ_α²/2μ_α⟩ with the stencil.
pub fn interacting_kinetic(h: &InternalHamiltonian, psi: &InternalWavefunction) -> f64 {
    axis_kinetic(h, psi).iter().sum()
}

/// Interacting kinetic energy carried by species l: Σ_{i∈l} ⟨p_i²⟩/2m_i
/// on the P = 0 slice, written through the stencil derivatives.
pub fn species_kinetic(h: &InternalHamiltonian, psi: &InternalWavefunction, l: usize) -> f64 {
    let k = kinetic_matrix(h, psi);
    let c = psi.map.momentum_coeffs();
    let d = k.len();
    let mut t = 0.0;
    for i in psi.map.species_particles(l) {
        let inv = 0.5 / psi.map.masses[i];
        for a in 0..d {
            for b in 0..d {
                t += inv * c[(i, a)] * c[(i, b)] * k[a][b];
            }
        }
    }
    t
}

/// Options for [`extract_densities`]: pair tables are skipped when they would
/// exceed `max_table` entries.
pub fn extract_densities(psi: &InternalWavefunction, max_table: usize) -> DensitySet {
    let (n1, n2) = psi.map.counts;
    let counts = [n1, n2];
    let small = psi.density_grid.n_points.pow(2) <= max_table;
    let rho = [0, 1].map(|l| (counts[l] > 0).then(|| internal_density(psi, l)));
    let gamma = [0, 1].map(|l| if small && counts[l] >= 2 { pair_density(psi, l).ok() } else { None });
    let gamma12 = if small && n1 > 0 && n2 > 0 { coupling_pair_density(psi).ok() } else { None };
    let rho_p = [0, 1].map(|l| (counts[l] > 0).then(|| momentum_density(psi, l).density));
    DensitySet { rho, gamma, gamma12, rho_p }
}

/// Every term of the internal energy decomposition from the exact state.
/// The interaction energies are ξ-space expectation values; the Hartree
/// terms use the binned one-body densities. `kinetic_ks` supplies the
/// reference noninteracting kinetic energies when available.
pub fn energy_breakdown_exact(
    h: &InternalHamiltonian,
    psi: &InternalWavefunction,
    rho: [Option<&GridFunction>; 2],
    kinetic_ks: Option<[f64; 2]>,
) -> EnergyBreakdown {
    let spec = &h.spec;
    let a = &psi.amplitudes;
    let mut e = EnergyBreakdown { kinetic_ks_available: kinetic_ks.is_some(), ..Default::default() };
    let tks = kinetic_ks.unwrap_or([0.0; 2]);
    for l in 0..2 {
        let Some(r) = rho[l] else { continue };
        let t_int = species_kinetic(h, psi, l);
        let u = h.expectation(a, &h.terms.intra[l]);
        let eh = hartree_energy(r, r, spec.intra(l), true);
        e.kinetic_ks[l] = tks[l];
        e.hartree[l] = eh;
        e.xc[l] = XcParts { interaction: u - eh, kinetic: t_int - tks[l] };
        e.v_int[l] = h.expectation(a, &h.terms.internal[l]);
    }
    if let (Some(r1), Some(r2)) = (rho[0], rho[1]) {
        let eh = hartree_energy(r1, r2, &spec.u12, false);
        e.hartree_12 = eh;
        e.c12 = if spec.u12.is_none() { 0.0 } else { h.expectation(a, &h.terms.coupling) - eh };
    }
    e.finalize()
}

/// ½∬ γ(r, r′) u(r − r′): interaction energy from a pair table.
pub fn pair_interaction(gamma: &Table2D, u: &crate::system::PotentialSpec, factor: f64) -> f64 {
    let g = gamma.grid;
    let n = g.n_points;
    let w = g.trapezoid_weights();
    let table: Vec<f64> = (0..n).map(|k| u.eval(k as f64 * g.spacing)).collect();
    factor * (0..n).map(|i| w[i] * (0..n).map(|j| w[j] * gamma.at(i, j) * table[i.abs_diff(j)]).sum::<f64>()).sum::<f64>()
}
