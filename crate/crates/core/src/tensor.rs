//! Tensor-product grids in up to three relative coordinates, the
//! finite-difference Hamiltonian on them, and a fast-diagonalization
//! kinetic preconditioner.
//!
//! Flat storage is row-major (last axis fastest). Nodes on any face are
//! Dirichlet nodes and always hold zero.

use rayon::prelude::*;
use std::f64::consts::PI;

use crate::grid::{Grid1D, Stencil};

#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    pub axes: Vec<Grid1D>,
    pub strides: Vec<usize>,
    pub len: usize,
}

impl TensorGrid {
    pub fn new(axes: Vec<Grid1D>) -> Self {
        let d = axes.len();
        let mut strides = vec![1; d];
        for a in (0..d.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * axes[a + 1].n_points;
        }
        let len = axes.iter().map(|g| g.n_points).product();
        Self { axes, strides, len }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|g| g.spacing).product()
    }

    pub fn index_of(&self, flat: usize, axis: usize) -> usize {
        (flat / self.strides[axis]) % self.axes[axis].n_points
    }

    pub fn coords(&self, flat: usize, out: &mut [f64]) {
        for (a, o) in out.iter_mut().enumerate() {
            *o = self.axes[a].x(self.index_of(flat, a));
        }
    }

    pub fn is_interior(&self, flat: usize) -> bool {
        (0..self.dim()).all(|a| {
            let i = self.index_of(flat, a);
            i > 0 && i + 1 < self.axes[a].n_points
        })
    }

    pub fn mask(&self, v: &mut [f64]) {
        for (p, x) in v.iter_mut().enumerate() {
            if !self.is_interior(p) {
                *x = 0.0;
            }
        }
    }

    /// Multilinear interpolation of `v` at point `x`; zero outside the box.
    pub fn interpolate(&self, v: &[f64], x: &[f64]) -> f64 {
        let d = self.dim();
        let mut base = 0usize;
        let mut frac = [0.0f64; 3];
        for a in 0..d {
            match self.axes[a].locate(x[a]) {
                Some((i, t)) => {
                    base += i * self.strides[a];
                    frac[a] = t;
                }
                None => return 0.0,
            }
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut off = 0;
            for (a, f) in frac.iter().enumerate().take(d) {
                if corner >> a & 1 == 1 {
                    if *f == 0.0 {
                        w = 0.0;
                        break;
                    }
                    w *= f;
                    off += self.strides[a];
                } else {
                    w *= 1.0 - f;
                }
            }
            if w != 0.0 {
                acc += w * v[base + off];
            }
        }
        acc
    }
}

/// Value of `v` at `p` shifted by `k` along an axis, with the Dirichlet odd
/// reflection used by the wide stencil.
#[inline]
fn shifted(v: &[f64], p: usize, i: usize, k: isize, n: usize, stride: usize) -> f64 {
    let last = n as isize - 1;
    let j = i as isize + k;
    let (j, sign) = if j < 0 {
        (-j, -1.0)
    } else if j > last {
        (2 * last - j, -1.0)
    } else {
        (j, 1.0)
    };
    if j <= 0 || j >= last {
        return 0.0;
    }
    let q = (p as isize + (j - i as isize) * stride as isize) as usize;
    sign * v[q]
}

/// Σ_α −(1/2μ_α) ∂²_α + V on a tensor grid.
#[derive(Debug, Clone)]
pub struct TensorHamiltonian {
    pub grid: TensorGrid,
    pub inv_two_mass: Vec<f64>,
    pub potential: Vec<f64>,
    pub stencil: Stencil,
}

impl TensorHamiltonian {
    pub fn new(grid: TensorGrid, masses: &[f64], potential: Vec<f64>, stencil: Stencil) -> Self {
        assert_eq!(masses.len(), grid.dim());
        assert_eq!(potential.len(), grid.len);
        Self { inv_two_mass: masses.iter().map(|m| 0.5 / m).collect(), grid, potential, stencil }
    }

    pub fn len(&self) -> usize {
        self.grid.len
    }

    pub fn is_empty(&self) -> bool {
        self.grid.len == 0
    }

    /// ∂²_axis v at interior nodes (zero on faces).
    pub fn second_derivative(&self, v: &[f64], axis: usize, out: &mut [f64]) {
        let c = self.stencil.second();
        let g = &self.grid;
        let (n, s, h) = (g.axes[axis].n_points, g.strides[axis], g.axes[axis].spacing);
        let inv = 1.0 / (h * h);
        out.par_iter_mut().enumerate().for_each(|(p, o)| {
            if !g.is_interior(p) {
                *o = 0.0;
                return;
            }
            let i = g.index_of(p, axis);
            let mut acc = c[0] * v[p] + c[1] * (shifted(v, p, i, -1, n, s) + shifted(v, p, i, 1, n, s));
            if c[2] != 0.0 {
                acc += c[2] * (shifted(v, p, i, -2, n, s) + shifted(v, p, i, 2, n, s));
            }
            *o = acc * inv;
        });
    }

    /// Central first derivative along `axis` with the matching order.
    pub fn first_derivative(&self, v: &[f64], axis: usize, out: &mut [f64]) {
        let c = self.stencil.first();
        let g = &self.grid;
        let (n, s, h) = (g.axes[axis].n_points, g.strides[axis], g.axes[axis].spacing);
        out.par_iter_mut().enumerate().for_each(|(p, o)| {
            if !g.is_interior(p) {
                *o = 0.0;
                return;
            }
            let i = g.index_of(p, axis);
            let mut acc = c[0] * (shifted(v, p, i, 1, n, s) - shifted(v, p, i, -1, n, s));
            if c[1] != 0.0 {
                acc += c[1] * (shifted(v, p, i, 2, n, s) - shifted(v, p, i, -2, n, s));
            }
            *o = acc / h;
        });
    }

    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        let c = self.stencil.second();
        let g = &self.grid;
        let d = g.dim();
        let coef: Vec<f64> = (0..d).map(|a| -self.inv_two_mass[a] / (g.axes[a].spacing * g.axes[a].spacing)).collect();
        out.par_iter_mut().enumerate().for_each(|(p, o)| {
            if !g.is_interior(p) {
                *o = 0.0;
                return;
            }
            let mut acc = self.potential[p] * v[p];
            for a in 0..d {
                let (n, s) = (g.axes[a].n_points, g.strides[a]);
                let i = g.index_of(p, a);
                let mut t = c[0] * v[p] + c[1] * (shifted(v, p, i, -1, n, s) + shifted(v, p, i, 1, n, s));
                if c[2] != 0.0 {
                    t += c[2] * (shifted(v, p, i, -2, n, s) + shifted(v, p, i, 2, n, s));
                }
                acc += coef[a] * t;
            }
            *o = acc;
        });
    }

    pub fn potential_min(&self) -> f64 {
        (0..self.len()).filter(|&p| self.grid.is_interior(p)).map(|p| self.potential[p]).fold(f64::INFINITY, f64::min)
    }
}

/// Exact inverse of (K + σ) for the kinetic part K, using the sine basis
/// that diagonalizes the Dirichlet stencil on each axis.
#[derive(Debug, Clone)]
pub struct KineticPreconditioner {
    grid: TensorGrid,
    /// Per axis: interior size m and the m×m orthogonal sine matrix.
    bases: Vec<(usize, Vec<f64>)>,
    /// Per axis kinetic eigenvalues.
    eigen: Vec<Vec<f64>>,
}

impl KineticPreconditioner {
    pub fn new(h: &TensorHamiltonian) -> Self {
        let mut bases = Vec::new();
        let mut eigen = Vec::new();
        for (a, ax) in h.grid.axes.iter().enumerate() {
            let m = ax.n_points - 2;
            let norm = (2.0 / (m + 1) as f64).sqrt();
            let mut s = vec![0.0; m * m];
            for j in 0..m {
                for k in 0..m {
                    s[j * m + k] = norm * (PI * ((j + 1) * (k + 1)) as f64 / (m + 1) as f64).sin();
                }
            }
            let ev = (0..m)
                .map(|j| {
                    let theta = PI * (j + 1) as f64 / (m + 1) as f64;
                    h.inv_two_mass[a] * h.stencil.symbol(theta) / (ax.spacing * ax.spacing)
                })
                .collect();
            bases.push((m, s));
            eigen.push(ev);
        }
        Self { grid: h.grid.clone(), bases, eigen }
    }

    /// Smallest kinetic eigenvalue (lowest sine mode on every axis).
    pub fn kinetic_floor(&self) -> f64 {
        self.eigen.iter().map(|e| e[0]).sum()
    }

    /// Transform the interior block along `axis` by the (symmetric) sine matrix.
    fn transform(&self, v: &mut [f64], axis: usize) {
        let g = &self.grid;
        let (m, s) = (&self.bases[axis].0, &self.bases[axis].1);
        let m = *m;
        let stride = g.strides[axis];
        let n = g.axes[axis].n_points;
        let block = stride * n;
        let outer = g.len / block;
        let lines: Vec<(usize, usize)> = (0..outer).flat_map(|o| (0..stride).map(move |i| (o, i))).collect();
        let results: Vec<Vec<f64>> = lines
            .par_iter()
            .map(|&(o, i)| {
                let base = o * block + i;
                let line: Vec<f64> = (1..=m).map(|k| v[base + k * stride]).collect();
                (0..m).map(|j| s[j * m..(j + 1) * m].iter().zip(&line).map(|(a, b)| a * b).sum()).collect()
            })
            .collect();
        for (&(o, i), r) in lines.iter().zip(results) {
            let base = o * block + i;
            for (k, val) in r.into_iter().enumerate() {
                v[base + (k + 1) * stride] = val;
            }
        }
    }

    pub fn apply(&self, r: &[f64], shift: f64, out: &mut [f64]) {
        out.copy_from_slice(r);
        self.grid.mask(out);
        let d = self.grid.dim();
        for a in 0..d {
            self.transform(out, a);
        }
        let g = &self.grid;
        out.par_iter_mut().enumerate().for_each(|(p, v)| {
            if !g.is_interior(p) {
                return;
            }
            let mut lam = shift;
            for a in 0..d {
                lam += self.eigen[a][g.index_of(p, a) - 1];
            }
            *v /= lam;
        });
        for a in 0..d {
            self.transform(out, a);
        }
    }
}

impl crate::eigen::Operator for TensorHamiltonian {
    fn dim(&self) -> usize {
        self.grid.len
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        TensorHamiltonian::apply(self, x, y)
    }
}

/// (K + σ)^{-1} with σ = λ − min V, floored at the lowest kinetic eigenvalue.
pub struct ShiftedKinetic {
    pub inner: KineticPreconditioner,
    pub v_min: f64,
}

impl ShiftedKinetic {
    pub fn new(h: &TensorHamiltonian) -> Self {
        Self { inner: KineticPreconditioner::new(h), v_min: h.potential_min() }
    }
}

impl crate::eigen::Preconditioner for ShiftedKinetic {
    fn apply(&self, r: &[f64], ritz: f64, out: &mut [f64]) {
        let floor = self.inner.kinetic_floor();
        let shift = (ritz - self.v_min - floor).max(floor);
        self.inner.apply(r, shift, out)
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ham(stencil: Stencil) -> TensorHamiltonian {
        let axes = vec![Grid1D::new(-2.0, 2.0, 13).unwrap(), Grid1D::new(-1.0, 3.0, 11).unwrap(), Grid1D::new(-1.5, 1.5, 9).unwrap()];
        let g = TensorGrid::new(axes);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = (0..g.len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        TensorHamiltonian::new(g, &[0.5, 2.0, 0.3], v, stencil)
    }

    fn random_interior(h: &TensorHamiltonian, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<f64> = (0..h.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        h.grid.mask(&mut v);
        v
    }

    #[test]
    fn hamiltonian_is_symmetric() {
        for st in [Stencil::Three, Stencil::Five] {
            let h = ham(st);
            let (x, y) = (random_interior(&h, 1), random_interior(&h, 2));
            let (mut hx, mut hy) = (vec![0.0; h.len()], vec![0.0; h.len()]);
            h.apply(&x, &mut hx);
            h.apply(&y, &mut hy);
            let a: f64 = y.iter().zip(&hx).map(|(p, q)| p * q).sum();
            let b: f64 = x.iter().zip(&hy).map(|(p, q)| p * q).sum();
            assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn preconditioner_inverts_kinetic_operator() {
        for st in [Stencil::Three, Stencil::Five] {
            let mut h = ham(st);
            h.potential.iter_mut().for_each(|v| *v = 0.7);
            let pc = KineticPreconditioner::new(&h);
            let x = random_interior(&h, 3);
            let mut hx = vec![0.0; h.len()];
            h.apply(&x, &mut hx);
            let mut back = vec![0.0; h.len()];
            pc.apply(&hx, 0.7, &mut back);
            for (a, b) in x.iter().zip(&back) {
                assert!((a - b).abs() < 1e-10, "{st:?}");
            }
        }
    }

    #[test]
    fn interpolation_is_exact_on_nodes_and_linear_between() {
        let g = TensorGrid::new(vec![Grid1D::new(0.0, 1.0, 11).unwrap(), Grid1D::new(0.0, 2.0, 21).unwrap()]);
        let v: Vec<f64> = (0..g.len)
            .map(|p| {
                let mut x = [0.0; 2];
                g.coords(p, &mut x);
                1.0 + 2.0 * x[0] - 3.0 * x[1] + x[0] * x[1]
            })
            .collect();
        let f = |x: f64, y: f64| 1.0 + 2.0 * x - 3.0 * y + x * y;
        assert!((g.interpolate(&v, &[0.3, 0.7]) - f(0.3, 0.7)).abs() < 1e-12);
        assert!((g.interpolate(&v, &[0.33, 1.77]) - f(0.33, 1.77)).abs() < 1e-12);
        assert_eq!(g.interpolate(&v, &[1.5, 0.0]), 0.0);
    }
}
