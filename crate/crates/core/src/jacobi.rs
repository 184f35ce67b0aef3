//! Linear maps between laboratory coordinates and (center of mass, relative
//! coordinates). Particles are ordered species 1 first, then species 2.
//!
//! Momenta transform with the inverse transpose of the coordinate matrix, so
//! (P, τ) = F^{-T} p and p = F^T (P, τ).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapKind {
    /// Sequential Jacobi set over all particles.
    Standard,
    /// Per-species Jacobi sets plus R^(2) − R^(1).
    Alternative,
    /// Heavy-species approximation: reference point R^(1), light particles relative to it.
    HeavyMass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobiMap {
    pub kind: MapKind,
    pub counts: (usize, usize),
    pub masses: Vec<f64>,
    /// Row 0 is the reference (center of mass), rows 1.. the relative coordinates.
    pub forward: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub reduced_masses: Vec<f64>,
    pub total_mass: f64,
}

/// Same shape as [`JacobiMap`]; built by [`build_alt_jacobi_map`].
pub type AltJacobiMap = JacobiMap;

fn particle_masses(counts: (usize, usize), masses: (f64, f64)) -> Result<Vec<f64>> {
    let (n1, n2) = counts;
    if n1 < 1 || n1 + n2 < 2 {
        return Err(Error::InvalidCount(format!("need N1 >= 1 and N1 + N2 >= 2, got ({n1}, {n2})")));
    }
    if !(masses.0 > 0.0 && masses.0.is_finite()) || (n2 > 0 && !(masses.1 > 0.0 && masses.1.is_finite())) {
        return Err(Error::Validation { field: "mass".into(), msg: "masses must be positive".into() });
    }
    Ok(std::iter::repeat_n(masses.0, n1).chain(std::iter::repeat_n(masses.1, n2)).collect())
}

/// Sequential Jacobi rows for particles `idx` (in order), written into `f`
/// starting at `row`. Returns the reduced masses.
fn jacobi_rows(f: &mut DMatrix<f64>, row: usize, idx: &[usize], m: &[f64]) -> Vec<f64> {
    let mut mu = Vec::new();
    let mut acc = m[idx[0]];
    for (a, &p) in idx.iter().enumerate().skip(1) {
        let r = row + a - 1;
        for &q in &idx[..a] {
            f[(r, q)] = -m[q] / acc;
        }
        f[(r, p)] = 1.0;
        mu.push(m[p] * acc / (acc + m[p]));
        acc += m[p];
    }
    mu
}

fn finish(kind: MapKind, counts: (usize, usize), masses: Vec<f64>, forward: DMatrix<f64>, mu: Vec<f64>) -> JacobiMap {
    let inverse = forward.clone().try_inverse().expect("coordinate map is invertible by construction");
    let total_mass = masses.iter().sum();
    JacobiMap { kind, counts, masses, forward, inverse, reduced_masses: mu, total_mass }
}

pub fn build_jacobi_map(counts: (usize, usize), masses: (f64, f64)) -> Result<JacobiMap> {
    let m = particle_masses(counts, masses)?;
    let n = m.len();
    let total: f64 = m.iter().sum();
    let mut f = DMatrix::zeros(n, n);
    for i in 0..n {
        f[(0, i)] = m[i] / total;
    }
    let all: Vec<usize> = (0..n).collect();
    let mu = jacobi_rows(&mut f, 1, &all, &m);
    Ok(finish(MapKind::Standard, counts, m, f, mu))
}

pub fn build_alt_jacobi_map(counts: (usize, usize), masses: (f64, f64)) -> Result<AltJacobiMap> {
    let m = particle_masses(counts, masses)?;
    let (n1, n2) = counts;
    if n2 == 0 {
        let mut map = build_jacobi_map(counts, masses)?;
        map.kind = MapKind::Alternative;
        return Ok(map);
    }
    let n = m.len();
    let total: f64 = m.iter().sum();
    let (big1, big2) = (n1 as f64 * masses.0, n2 as f64 * masses.1);
    let mut f = DMatrix::zeros(n, n);
    for i in 0..n {
        f[(0, i)] = m[i] / total;
    }
    let s1: Vec<usize> = (0..n1).collect();
    let s2: Vec<usize> = (n1..n).collect();
    let mut mu = jacobi_rows(&mut f, 1, &s1, &m);
    mu.extend(jacobi_rows(&mut f, n1, &s2, &m));
    for i in 0..n {
        f[(n - 1, i)] = if i < n1 { -m[i] / big1 } else { m[i] / big2 };
    }
    mu.push(big1 * big2 / total);
    Ok(finish(MapKind::Alternative, counts, m, f, mu))
}

/// Heavy-species simplification: reference R^(1), species-1 Jacobi set, and
/// light coordinates r^(2)_i − R^(1) with mass m^(2).
pub fn heavy_mass_map(counts: (usize, usize), masses: (f64, f64)) -> Result<JacobiMap> {
    let m = particle_masses(counts, masses)?;
    let (n1, _) = counts;
    let n = m.len();
    let big1 = n1 as f64 * masses.0;
    let mut f = DMatrix::zeros(n, n);
    for i in 0..n1 {
        f[(0, i)] = m[i] / big1;
    }
    let mut mu = if n1 > 1 { jacobi_rows(&mut f, 1, &(0..n1).collect::<Vec<_>>(), &m) } else { Vec::new() };
    for p in n1..n {
        let r = p;
        for q in 0..n1 {
            f[(r, q)] = -m[q] / big1;
        }
        f[(r, p)] = 1.0;
        mu.push(m[p]);
    }
    Ok(finish(MapKind::HeavyMass, counts, m, f, mu))
}

impl JacobiMap {
    pub fn n_particles(&self) -> usize {
        self.masses.len()
    }

    pub fn n_relative(&self) -> usize {
        self.masses.len() - 1
    }

    pub fn species_of(&self, particle: usize) -> usize {
        if particle < self.counts.0 {
            0
        } else {
            1
        }
    }

    pub fn species_particles(&self, species: usize) -> std::ops::Range<usize> {
        if species == 0 {
            0..self.counts.0
        } else {
            self.counts.0..self.counts.0 + self.counts.1
        }
    }

    pub fn reduced_masses(&self) -> &[f64] {
        &self.reduced_masses
    }

    pub fn to_internal(&self, lab: &[f64]) -> Result<(f64, Vec<f64>)> {
        let n = self.n_particles();
        if lab.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: lab.len() });
        }
        let y = &self.forward * DVector::from_column_slice(lab);
        Ok((y[0], y.as_slice()[1..].to_vec()))
    }

    pub fn from_internal(&self, r: f64, xi: &[f64]) -> Result<Vec<f64>> {
        let n = self.n_particles();
        if xi.len() + 1 != n {
            return Err(Error::DimensionMismatch { expected: n - 1, got: xi.len() });
        }
        let mut y = DVector::zeros(n);
        y[0] = r;
        y.as_mut_slice()[1..].copy_from_slice(xi);
        Ok((&self.inverse * y).as_slice().to_vec())
    }

    /// (P, τ) conjugate to (R, ξ).
    pub fn internal_momenta(&self, lab_p: &[f64]) -> Result<(f64, Vec<f64>)> {
        let n = self.n_particles();
        if lab_p.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: lab_p.len() });
        }
        let y = self.inverse.transpose() * DVector::from_column_slice(lab_p);
        Ok((y[0], y.as_slice()[1..].to_vec()))
    }

    /// Positions r_i − R as linear functions of ξ: row i holds the coefficients.
    pub fn position_coeffs(&self) -> DMatrix<f64> {
        self.inverse.columns(1, self.n_relative()).into_owned()
    }

    /// Laboratory momenta on the P = 0 slice as linear functions of τ.
    pub fn momentum_coeffs(&self) -> DMatrix<f64> {
        self.forward.rows(1, self.n_relative()).transpose()
    }

    /// Action of a particle permutation on ξ: ξ' = A ξ where the permuted
    /// configuration has x'_i = x_{perm[i]}.
    pub fn permutation_action(&self, perm: &[usize]) -> DMatrix<f64> {
        let n = self.n_particles();
        let mut p = DMatrix::zeros(n, n);
        for (i, &j) in perm.iter().enumerate() {
            p[(i, j)] = 1.0;
        }
        let full = &self.forward * p * &self.inverse;
        full.view((1, 1), (n - 1, n - 1)).into_owned()
    }
}

/// |Σ p²/2m − P²/2M − Σ τ²/2μ| for the given laboratory momenta.
pub fn kinetic_split_residual(map: &JacobiMap, lab_p: &[f64]) -> Result<f64> {
    let (p_cm, tau) = map.internal_momenta(lab_p)?;
    let lab: f64 = lab_p.iter().zip(&map.masses).map(|(p, m)| p * p / (2.0 * m)).sum();
    let internal: f64 = tau.iter().zip(&map.reduced_masses).map(|(t, mu)| t * t / (2.0 * mu)).sum();
    Ok((lab - p_cm * p_cm / (2.0 * map.total_mass) - internal).abs())
}

/// Largest entrywise difference between two forward matrices.
pub fn forward_difference(a: &JacobiMap, b: &JacobiMap) -> f64 {
    (&a.forward - &b.forward).iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn row(m: &JacobiMap, r: usize) -> Vec<f64> {
        m.forward.row(r).iter().copied().collect()
    }

    #[test]
    fn two_identical_particles() {
        let m = build_jacobi_map((2, 0), (1.0, 1.0)).unwrap();
        assert_eq!(row(&m, 1), vec![-1.0, 1.0]);
        assert_eq!(row(&m, 0), vec![0.5, 0.5]);
        assert_eq!(m.reduced_masses, vec![0.5]);
        let (r, xi) = m.to_internal(&[-1.0, 1.0]).unwrap();
        assert_eq!((r, xi[0]), (0.0, 2.0));
        let (r, xi) = m.to_internal(&[0.0, 2.0]).unwrap();
        assert_eq!((r, xi[0]), (1.0, 2.0));
    }

    #[test]
    fn unequal_pair() {
        let m = build_jacobi_map((1, 1), (3.0, 1.0)).unwrap();
        assert_eq!(row(&m, 1), vec![-1.0, 1.0]);
        assert_eq!(row(&m, 0), vec![0.75, 0.25]);
        let e = build_jacobi_map((1, 1), (1.0, 1.0)).unwrap();
        assert_eq!(e.reduced_masses, vec![0.5]);
    }

    #[test]
    fn reduced_mass_regimes() {
        let m = build_jacobi_map((2, 1), (1.0, 1.0)).unwrap();
        assert!((m.reduced_masses[0] - 0.5).abs() < 1e-15);
        assert!((m.reduced_masses[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn reduced_masses_match_closed_form() {
        for n1 in 1..=4 {
            for n2 in 0..=4 {
                if n1 + n2 < 2 {
                    continue;
                }
                let (m1, m2) = (1.7, 0.3);
                let map = build_jacobi_map((n1, n2), (m1, m2)).unwrap();
                let big1 = n1 as f64 * m1;
                for a in 1..n1 + n2 {
                    let expect = if a < n1 {
                        a as f64 / (a as f64 + 1.0) * m1
                    } else {
                        let k = (a - n1) as f64;
                        (big1 + k * m2) * m2 / (big1 + (k + 1.0) * m2)
                    };
                    assert!((map.reduced_masses[a - 1] - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn row_sums_and_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let n1 = rng.gen_range(1..=4);
            let n2 = rng.gen_range(if n1 == 1 { 1 } else { 0 }..=4);
            let masses = (rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0));
            for map in [build_jacobi_map((n1, n2), masses).unwrap(), build_alt_jacobi_map((n1, n2), masses).unwrap()] {
                let n = n1 + n2;
                assert!((map.forward.row(0).sum() - 1.0).abs() < 1e-12);
                for r in 1..n {
                    assert!(map.forward.row(r).sum().abs() < 1e-12);
                }
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
                let (r, xi) = map.to_internal(&x).unwrap();
                let back = map.from_internal(r, &xi).unwrap();
                for (a, b) in x.iter().zip(&back) {
                    assert!((a - b).abs() < 1e-12);
                }
                let shifted: Vec<f64> = x.iter().map(|v| v + 1.25).collect();
                let (r2, xi2) = map.to_internal(&shifted).unwrap();
                assert!((r2 - r - 1.25).abs() < 1e-12);
                for (a, b) in xi.iter().zip(&xi2) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rigid_translation_has_zero_relative_coordinates() {
        let map = build_jacobi_map((2, 2), (1.0, 1.0)).unwrap();
        let (r, xi) = map.to_internal(&[0.3; 4]).unwrap();
        assert!((r - 0.3).abs() < 1e-15);
        assert!(xi.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn dimension_mismatch() {
        let map = build_jacobi_map((2, 1), (1.0, 1.0)).unwrap();
        assert!(matches!(map.to_internal(&[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(build_jacobi_map((1, 0), (1.0, 1.0)), Err(Error::InvalidCount(_))));
    }

    #[test]
    fn boost_and_rest_frame() {
        let map = build_jacobi_map((3, 1), (1.0, 1.0)).unwrap();
        let (p, tau) = map.internal_momenta(&[0.7; 4]).unwrap();
        assert!((p - 2.8).abs() < 1e-14);
        assert!(tau.iter().all(|t| t.abs() < 1e-14));
        let lab = [0.5, -0.2, 0.4, -0.7];
        let (p, tau) = map.internal_momenta(&lab).unwrap();
        assert!(p.abs() < 1e-14);
        let internal: f64 = tau.iter().zip(&map.reduced_masses).map(|(t, mu)| t * t / (2.0 * mu)).sum();
        let total: f64 = lab.iter().map(|p| p * p / 2.0).sum();
        assert!((internal - total).abs() < 1e-14);
    }

    #[test]
    fn alternative_map_rows() {
        let m = build_alt_jacobi_map((1, 1), (1.0, 1.0)).unwrap();
        assert_eq!(row(&m, 1), vec![-1.0, 1.0]);
        let m = build_alt_jacobi_map((2, 2), (2.0, 0.5)).unwrap();
        assert!((m.reduced_masses[2] - 4.0 * 1.0 / 5.0).abs() < 1e-14);
        assert!((m.reduced_masses[0] - 1.0).abs() < 1e-14);
        assert!((m.reduced_masses[1] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn heavy_map_rows() {
        let m = heavy_mass_map((2, 1), (100.0, 1.0)).unwrap();
        assert_eq!(row(&m, 2), vec![-0.5, -0.5, 1.0]);
        assert_eq!(m.reduced_masses[1], 1.0);
        let equal = heavy_mass_map((2, 1), (1.0, 1.0)).unwrap();
        let full = build_jacobi_map((2, 1), (1.0, 1.0)).unwrap();
        assert!(forward_difference(&equal, &full) > 0.1);
    }

    #[test]
    fn heavy_map_converges_like_inverse_ratio() {
        let mut prev = f64::INFINITY;
        for ratio in [10.0, 100.0, 1000.0, 10000.0] {
            let d = forward_difference(
                &heavy_mass_map((2, 1), (ratio, 1.0)).unwrap(),
                &build_jacobi_map((2, 1), (ratio, 1.0)).unwrap(),
            );
            assert!(d < prev);
            assert!((d * ratio * 2.0 - 1.0).abs() < 0.1, "{d}");
            prev = d;
        }
    }

    #[test]
    fn swap_of_two_identical_is_reflection() {
        let map = build_jacobi_map((2, 1), (1.0, 3.0)).unwrap();
        let a = map.permutation_action(&[1, 0, 2]);
        assert!((a[(0, 0)] + 1.0).abs() < 1e-14);
        assert!(a[(0, 1)].abs() < 1e-14 && a[(1, 0)].abs() < 1e-14);
        assert!((a[(1, 1)] - 1.0).abs() < 1e-14);
    }
}
