//! Center-of-mass wave packets, laboratory densities by convolution, and a
//! direct laboratory-frame solve for two distinguishable particles.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::eigen::{lobpcg, EigenOptions};
use crate::error::{Error, Result};
use crate::grid::{Grid1D, GridFunction};
use crate::system::SystemSpec;
use crate::tensor::{ShiftedKinetic, TensorGrid, TensorHamiltonian};

/// Γ(R) = (2πw²)^{-1/4} exp(−(R − c)²/4w²) e^{ikR}; |Γ|² has standard deviation w.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CMWavepacket {
    pub center: f64,
    pub width: f64,
    pub momentum: f64,
}

impl CMWavepacket {
    pub fn new(center: f64, width: f64, momentum: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::Validation { field: "width".into(), msg: "must be positive".into() });
        }
        Ok(Self { center, width, momentum })
    }

    /// Ground state of a harmonic c.m. trap ½ K M R² for total mass M.
    pub fn harmonic_ground(total_mass: f64, k: f64) -> Self {
        // P²/2M + ½ K M R² oscillates at ω = √K.
        let omega = k.sqrt();
        Self { center: 0.0, width: (1.0 / (2.0 * total_mass * omega)).sqrt(), momentum: 0.0 }
    }

    pub fn amplitude(&self, r: f64) -> Complex64 {
        let w2 = self.width * self.width;
        let a = (2.0 * PI * w2).powf(-0.25) * (-(r - self.center).powi(2) / (4.0 * w2)).exp();
        Complex64::from_polar(a, self.momentum * r)
    }

    pub fn probability(&self, r: f64) -> f64 {
        self.amplitude(r).norm_sqr()
    }

    /// ⟨P²⟩/2M for total mass M.
    pub fn kinetic_energy(&self, total_mass: f64) -> f64 {
        (self.momentum * self.momentum + 0.25 / (self.width * self.width)) / (2.0 * total_mass)
    }
}

/// ρ(r) = ∫ dR |Γ(R)|² ρ_int(r − R), with R restricted to multiples of the
/// grid spacing and the kernel weights normalized to one.
pub fn lab_density_convolve(rho_int: &GridFunction, gamma: &CMWavepacket) -> GridFunction {
    let g = rho_int.grid;
    let n = g.n_points as isize;
    let h = g.spacing;
    let reach = ((gamma.center.abs() + 12.0 * gamma.width) / h).ceil() as isize;
    let reach = reach.min(n);
    let mut kernel: Vec<(isize, f64)> = (-reach..=reach).map(|k| (k, gamma.probability(k as f64 * h))).collect();
    let total: f64 = kernel.iter().map(|(_, w)| w).sum();
    if total > 0.0 {
        kernel.iter_mut().for_each(|(_, w)| *w /= total);
    } else {
        // Width far below the spacing: all weight on the nearest offset.
        let k0 = (gamma.center / h).round() as isize;
        kernel = vec![(k0, 1.0)];
    }
    let values = (0..n)
        .map(|i| {
            kernel
                .iter()
                .filter_map(|&(k, w)| {
                    let j = i - k;
                    (0..n).contains(&j).then(|| w * rho_int.values[j as usize])
                })
                .sum()
        })
        .collect();
    GridFunction { grid: g, values }
}

#[derive(Debug, Clone)]
pub struct LabSolution {
    pub energy: f64,
    pub density: [GridFunction; 2],
    pub packet: CMWavepacket,
}

/// Ground state of one particle of each species on the laboratory grid
/// (r₁, r₂), with a harmonic trap ½ K M R² on the center of mass.
pub fn lab_two_body_solve(spec: &SystemSpec, grid: Grid1D, cm_k: f64, tol: f64) -> Result<LabSolution> {
    if spec.counts() != (1, 1) {
        return Err(Error::InvalidCount("laboratory solve needs exactly one particle per species".into()));
    }
    let (m1, m2) = spec.masses();
    let total = m1 + m2;
    let tg = TensorGrid::new(vec![grid, grid]);
    let potential: Vec<f64> = (0..tg.len)
        .map(|p| {
            let mut x = [0.0; 2];
            tg.coords(p, &mut x);
            let r = (m1 * x[0] + m2 * x[1]) / total;
            spec.u12.eval(x[0] - x[1])
                + 0.5 * cm_k * total * r * r
                + spec.v_int[0].eval(x[0] - r)
                + spec.v_int[1].eval(x[1] - r)
        })
        .collect();
    let op = TensorHamiltonian::new(tg.clone(), &[m1, m2], potential, spec.grid.stencil);
    let pre = ShiftedKinetic::new(&op);
    let start: Vec<Vec<f64>> = (0..3)
        .map(|s| {
            (0..tg.len)
                .map(|p| {
                    let mut x = [0.0; 2];
                    tg.coords(p, &mut x);
                    let e = (-(x[0] * x[0] + x[1] * x[1]) / 4.0).exp();
                    e * (1.0 + 0.3 * s as f64 * x[0] - 0.2 * s as f64 * x[1])
                })
                .collect()
        })
        .collect();
    let mask = |v: &mut [f64]| tg.mask(v);
    let opts = EigenOptions { n_eig: 1, guard: 2, tol, max_iter: 4000, reproject_every: 10 };
    let res = lobpcg(&op, &pre, &mask, start, &opts)?;
    let psi = &res.vectors[0];
    let n = grid.n_points;
    let h = grid.spacing;
    let norm: f64 = psi.iter().map(|v| v * v).sum::<f64>() * h * h;
    let mut rho1 = vec![0.0; n];
    let mut rho2 = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            let w = psi[i * n + j].powi(2) / norm;
            rho1[i] += w * h;
            rho2[j] += w * h;
        }
    }
    Ok(LabSolution {
        energy: res.values[0],
        density: [GridFunction { grid, values: rho1 }, GridFunction { grid, values: rho2 }],
        packet: CMWavepacket::harmonic_ground(total, cm_k),
    })
}
