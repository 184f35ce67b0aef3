//! Uniform 1D grids, finite-difference kinetic operators, trapezoidal
//! quadrature and a unitary discrete Fourier transform.
//!
//! Boundary nodes are Dirichlet nodes: operators ignore the values stored
//! there and return zero at them, so every operator is symmetric on the
//! interior subspace.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub spacing: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidExtent(format!("x_max {x_max} must exceed x_min {x_min}")));
        }
        if n < MIN_POINTS {
            return Err(Error::InvalidExtent(format!("n = {n} < {MIN_POINTS}")));
        }
        Ok(Self { x_min, x_max, n_points: n, spacing: (x_max - x_min) / (n - 1) as f64 })
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> f64 {
        // Anchor on whichever end is closer to keep symmetric grids symmetric bitwise.
        if 2 * i + 1 == self.n_points {
            0.5 * (self.x_min + self.x_max)
        } else if 2 * i < self.n_points {
            self.x_min + i as f64 * self.spacing
        } else {
            self.x_max - (self.n_points - 1 - i) as f64 * self.spacing
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Same extent with the spacing divided by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        let n = (self.n_points - 1) * factor + 1;
        Self { n_points: n, spacing: (self.x_max - self.x_min) / (n - 1) as f64, ..*self }
    }

    pub fn is_symmetric(&self) -> bool {
        (self.x_min + self.x_max).abs() <= 1e-12 * self.x_max.abs().max(1.0)
    }

    /// Fractional index of `x`, or `None` when outside the grid.
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let s = (x - self.x_min) / self.spacing;
        let last = (self.n_points - 1) as f64;
        if !(s > -1e-9 && s < last + 1e-9) {
            return None;
        }
        let s = s.clamp(0.0, last);
        let mut i = s.floor() as usize;
        let mut t = s - i as f64;
        // Snap to nodes so exact grid maps stay exact.
        if t < 1e-9 {
            t = 0.0;
        } else if t > 1.0 - 1e-9 {
            t = 0.0;
            i += 1;
        }
        if i >= self.n_points - 1 {
            return Some((self.n_points - 2, if i == self.n_points - 1 && t == 0.0 { 1.0 } else { t }));
        }
        Some((i, t))
    }

    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let mut w = vec![self.spacing; self.n_points];
        w[0] *= 0.5;
        w[self.n_points - 1] *= 0.5;
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Stencil {
    #[default]
    Three,
    Five,
}

impl Stencil {
    pub fn from_points(p: i64) -> Option<Self> {
        match p {
            3 => Some(Stencil::Three),
            5 => Some(Stencil::Five),
            _ => None,
        }
    }

    pub fn points(&self) -> usize {
        match self {
            Stencil::Three => 3,
            Stencil::Five => 5,
        }
    }

    /// Second-derivative weights for offsets 0, 1, 2 (symmetric), unscaled by h².
    pub fn second(&self) -> [f64; 3] {
        match self {
            Stencil::Three => [-2.0, 1.0, 0.0],
            Stencil::Five => [-30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0],
        }
    }

    /// First-derivative weights for offsets 1, 2 (antisymmetric), unscaled by h.
    pub fn first(&self) -> [f64; 2] {
        match self {
            Stencil::Three => [0.5, 0.0],
            Stencil::Five => [8.0 / 12.0, -1.0 / 12.0],
        }
    }

    /// Fourier symbol of −d²/dx² at angle θ = k·h, times h².
    pub fn symbol(&self, theta: f64) -> f64 {
        let c = self.second();
        -(c[0] + 2.0 * c[1] * theta.cos() + 2.0 * c[2] * (2.0 * theta).cos())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T = f64> {
    pub grid: Grid1D,
    pub values: Vec<T>,
}

impl<T: Clone> GridFunction<T> {
    pub fn new(grid: Grid1D, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::DimensionMismatch { expected: grid.n_points, got: values.len() });
        }
        Ok(Self { grid, values })
    }
}

impl GridFunction<f64> {
    pub fn from_fn(grid: Grid1D, f: impl FnMut(f64) -> f64) -> Self {
        let values = grid.points().into_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self { grid, values: vec![0.0; grid.n_points] }
    }

    pub fn integrate(&self) -> f64 {
        integrate(&self.grid, &self.values)
    }

    pub fn l1_distance(&self, other: &Self) -> f64 {
        let d: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).collect();
        integrate(&self.grid, &d)
    }
}

/// Trapezoidal rule.
pub fn integrate(grid: &Grid1D, f: &[f64]) -> f64 {
    let n = f.len();
    if n == 0 {
        return 0.0;
    }
    let inner: f64 = f[1..n - 1].iter().sum();
    grid.spacing * (inner + 0.5 * (f[0] + f[n - 1]))
}

fn val(f: &[f64], j: isize, last: isize) -> f64 {
    if j <= 0 || j >= last {
        0.0
    } else {
        f[j as usize]
    }
}

/// f″ on interior nodes with Dirichlet boundary nodes; boundary values of
/// `f` are treated as zero and the output vanishes there.
pub fn second_derivative(f: &[f64], h: f64, stencil: Stencil) -> Vec<f64> {
    let n = f.len();
    let c = stencil.second();
    let inv = 1.0 / (h * h);
    let last = n as isize - 1;
    // Odd reflection through the boundary nodes keeps the wide stencil
    // symmetric and diagonal in the sine basis.
    let at = |j: isize| -> f64 {
        let j = if j < 0 {
            return -val(f, -j, last);
        } else if j > last {
            return -val(f, 2 * last - j, last);
        } else {
            j
        };
        val(f, j, last)
    };
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate().take(n.saturating_sub(1)).skip(1) {
        let i = i as isize;
        let mut s = c[0] * at(i) + c[1] * (at(i - 1) + at(i + 1));
        if c[2] != 0.0 {
            s += c[2] * (at(i - 2) + at(i + 2));
        }
        *o = s * inv;
    }
    out
}

/// −f″/(2m) with ħ = 1.
pub fn kinetic_apply(f: &GridFunction, mass: f64, stencil: Stencil) -> Result<GridFunction> {
    if !(mass > 0.0) {
        return Err(Error::Validation { field: "mass".into(), msg: "must be positive".into() });
    }
    let d2 = second_derivative(&f.values, f.grid.spacing, stencil);
    let k = -0.5 / mass;
    Ok(GridFunction { grid: f.grid, values: d2.into_iter().map(|v| k * v).collect() })
}

/// Momentum-space samples produced by [`fourier`], ascending in p.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub dp: f64,
    pub momenta: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Position of the first real-space sample (needed for the phase).
    pub x_min: f64,
}

impl Spectrum {
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dp
    }
}

/// Signed DFT frequency index for bin `m` of an `n`-point transform.
pub fn fft_index(m: usize, n: usize) -> i64 {
    if m < n.div_ceil(2) {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Unitary transform f̃(p) = (2π)^(-1/2) ∫ e^{-ipx} f(x) dx sampled on the DFT momenta.
/// The discrete norms satisfy Σ|f|² h = Σ|f̃|² dp exactly.
pub fn fourier(f: &GridFunction<Complex64>) -> Spectrum {
    let n = f.grid.n_points;
    let h = f.grid.spacing;
    let dp = 2.0 * PI / (n as f64 * h);
    let mut buf = f.values.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = h / (2.0 * PI).sqrt();
    let mut pairs: Vec<(i64, Complex64)> = buf
        .into_iter()
        .enumerate()
        .map(|(m, v)| {
            let k = fft_index(m, n);
            let p = k as f64 * dp;
            (k, v * Complex64::from_polar(scale, -p * f.grid.x_min))
        })
        .collect();
    pairs.sort_by_key(|(k, _)| *k);
    Spectrum {
        dp,
        momenta: pairs.iter().map(|(k, _)| *k as f64 * dp).collect(),
        values: pairs.into_iter().map(|(_, v)| v).collect(),
        x_min: f.grid.x_min,
    }
}

pub fn inverse_fourier(s: &Spectrum, grid: &Grid1D) -> GridFunction<Complex64> {
    let n = grid.n_points;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (p, v) in s.momenta.iter().zip(&s.values) {
        let k = (p / s.dp).round() as i64;
        let m = k.rem_euclid(n as i64) as usize;
        buf[m] = v * Complex64::from_polar(1.0, p * s.x_min);
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = s.dp / (2.0 * PI).sqrt();
    GridFunction { grid: *grid, values: buf.into_iter().map(|v| v * scale).collect() }
}

/// Largest of the two end values relative to the maximum.
pub fn edge_fraction(values: &[f64]) -> f64 {
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return 0.0;
    }
    let n = values.len();
    let k = 2.min(n / 2);
    let edge = values[..k].iter().chain(&values[n - k..]).fold(0.0f64, |m, v| m.max(v.abs()));
    edge / max
}
