//! Mean-field (Hartree) potentials and energies on a 1D grid.

use crate::grid::{integrate, GridFunction};
use crate::system::PotentialSpec;

/// v(r) = ∫ dr′ ρ(r′) u(r − r′) by trapezoidal quadrature.
pub fn hartree_potential(rho: &GridFunction, u: &PotentialSpec) -> GridFunction {
    let g = rho.grid;
    let n = g.n_points;
    if u.is_none() {
        return GridFunction::zeros(g);
    }
    // u depends only on the index offset.
    let table: Vec<f64> = (0..n).map(|k| u.eval(k as f64 * g.spacing)).collect();
    let w = g.trapezoid_weights();
    let wr: Vec<f64> = rho.values.iter().zip(&w).map(|(r, w)| r * w).collect();
    let values = (0..n)
        .map(|i| wr.iter().enumerate().map(|(j, x)| x * table[i.abs_diff(j)]).sum())
        .collect();
    GridFunction { grid: g, values }
}

/// ½∬ρ_a ρ_b u for one species, ∬ρ_a ρ_b u between species.
pub fn hartree_energy(rho_a: &GridFunction, rho_b: &GridFunction, u: &PotentialSpec, same_species: bool) -> f64 {
    if u.is_none() {
        return 0.0;
    }
    let v = hartree_potential(rho_b, u);
    let f: Vec<f64> = rho_a.values.iter().zip(&v.values).map(|(a, b)| a * b).collect();
    let e = integrate(&rho_a.grid, &f);
    if same_species {
        0.5 * e
    } else {
        e
    }
}
