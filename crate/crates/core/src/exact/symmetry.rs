//! Same-species permutations acting on the ξ grid.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::jacobi::JacobiMap;
use crate::system::Statistics;
use crate::tensor::TensorGrid;

use super::is_fermion;

#[derive(Debug, Clone)]
pub struct GroupElement {
    pub perm: Vec<usize>,
    pub sign: f64,
    pub action: DMatrix<f64>,
    /// Node-to-node image when the action maps grid nodes onto grid nodes.
    pub index_map: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct SymmetryGroup {
    pub grid: TensorGrid,
    pub elements: Vec<GroupElement>,
    /// Extra symmetries of H (global parity, species exchange) used to clean
    /// up the converged state. Never used to select a sector.
    pub extra: Vec<GroupElement>,
}

fn permutations(items: &[usize]) -> Vec<(Vec<usize>, f64)> {
    if items.len() <= 1 {
        return vec![(items.to_vec(), 1.0)];
    }
    let mut out = Vec::new();
    for k in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for (mut tail, s) in permutations(&rest) {
            let mut p = vec![head];
            p.append(&mut tail);
            out.push((p, sign * s));
        }
    }
    out
}

/// Index map of ξ → Aξ if every interior node lands on a node.
fn node_map(grid: &TensorGrid, a: &DMatrix<f64>) -> Option<Vec<usize>> {
    let d = grid.dim();
    let mut out = vec![0usize; grid.len];
    let mut xi = [0.0; 3];
    for (p, o) in out.iter_mut().enumerate() {
        if !grid.is_interior(p) {
            *o = p;
            continue;
        }
        grid.coords(p, &mut xi[..d]);
        let mut q = 0;
        for b in 0..d {
            let y: f64 = (0..d).map(|c| a[(b, c)] * xi[c]).sum();
            match grid.axes[b].locate(y) {
                Some((i, 0.0)) => q += i * grid.strides[b],
                _ => return None,
            }
        }
        *o = q;
    }
    Some(out)
}

fn element(grid: &TensorGrid, perm: Vec<usize>, sign: f64, action: DMatrix<f64>) -> GroupElement {
    let index_map = node_map(grid, &action);
    GroupElement { perm, sign, action, index_map }
}

impl GroupElement {
    /// (g v)(ξ) = v(Aξ).
    pub fn act(&self, grid: &TensorGrid, v: &[f64]) -> Vec<f64> {
        match &self.index_map {
            Some(m) => m.iter().map(|&q| v[q]).collect(),
            None => {
                let d = grid.dim();
                (0..grid.len)
                    .into_par_iter()
                    .map(|p| {
                        if !grid.is_interior(p) {
                            return 0.0;
                        }
                        let mut xi = [0.0; 3];
                        grid.coords(p, &mut xi[..d]);
                        let mut y = [0.0; 3];
                        for b in 0..d {
                            y[b] = (0..d).map(|c| self.action[(b, c)] * xi[c]).sum();
                        }
                        grid.interpolate(v, &y[..d])
                    })
                    .collect()
            }
        }
    }
}

impl SymmetryGroup {
    pub fn new(map: &JacobiMap, stats: [Statistics; 2], grid: &TensorGrid) -> Self {
        let (n1, n2) = map.counts;
        let s1: Vec<usize> = (0..n1).collect();
        let s2: Vec<usize> = (n1..n1 + n2).collect();
        let mut elements = Vec::new();
        for (p1, sg1) in permutations(&s1) {
            for (p2, sg2) in permutations(&s2) {
                let mut sign = 1.0;
                if is_fermion(stats[0]) {
                    sign *= sg1;
                }
                if is_fermion(stats[1]) {
                    sign *= sg2;
                }
                let perm: Vec<usize> = p1.iter().chain(&p2).copied().collect();
                let action = map.permutation_action(&perm);
                elements.push(element(grid, perm, sign, action));
            }
        }
        let d = grid.dim();
        let mut extra = Vec::new();
        let parity = element(grid, vec![], 1.0, -DMatrix::<f64>::identity(d, d));
        if parity.index_map.is_some() {
            extra.push(parity);
        }
        // Species exchange only makes sense with equal populations and masses;
        // whether H commutes with it is decided by the caller via `with_exchange`.
        Self { grid: grid.clone(), elements, extra }
    }

    /// Adds the species exchange 1 ↔ 2 (only valid when H is exchange symmetric).
    pub fn with_exchange(mut self, map: &JacobiMap) -> Self {
        let grid = &self.grid;
        let (n1, n2) = map.counts;
        if n1 != n2 {
            return self;
        }
        let perm: Vec<usize> = (n1..n1 + n2).chain(0..n1).collect();
        let swap = element(grid, perm.clone(), 1.0, map.permutation_action(&perm));
        if swap.index_map.is_some() {
            self.extra.push(swap);
        }
        self
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn all_exact(&self) -> bool {
        self.elements.iter().all(|g| g.index_map.is_some())
    }

    /// Projector over the node-exact elements (a subgroup).
    pub fn project_exact(&self, v: &mut [f64]) {
        let exact: Vec<&GroupElement> = self.elements.iter().filter(|g| g.index_map.is_some()).collect();
        if exact.len() <= 1 {
            return;
        }
        let src = v.to_vec();
        let w = 1.0 / exact.len() as f64;
        v.iter_mut().for_each(|x| *x = 0.0);
        for g in exact {
            let m = g.index_map.as_ref().unwrap();
            for (p, x) in v.iter_mut().enumerate() {
                *x += w * g.sign * src[m[p]];
            }
        }
    }

    /// Full (anti)symmetrizer; interpolates for elements that are not node exact.
    pub fn project_full(&self, v: &mut [f64]) {
        if self.elements.len() <= 1 {
            return;
        }
        let mut acc = vec![0.0; v.len()];
        let w = 1.0 / self.elements.len() as f64;
        for g in &self.elements {
            let gv = g.act(&self.grid, v);
            acc.iter_mut().zip(&gv).for_each(|(a, b)| *a += w * g.sign * b);
        }
        v.copy_from_slice(&acc);
    }

    /// Symmetrize under each extra symmetry with the sign the state already has.
    pub fn symmetrize_extra(&self, v: &mut [f64]) {
        for g in &self.extra {
            let m = g.index_map.as_ref().unwrap();
            let gv: Vec<f64> = m.iter().map(|&q| v[q]).collect();
            let nn: f64 = v.iter().map(|x| x * x).sum();
            let c: f64 = v.iter().zip(&gv).map(|(a, b)| a * b).sum::<f64>() / nn;
            if c.abs() > 0.99 {
                let s = c.signum();
                v.iter_mut().zip(&gv).for_each(|(a, b)| *a = 0.5 * (*a + s * b));
            }
        }
    }
}

/// Projects `amplitudes` onto the sector of the species statistics.
pub fn symmetry_project(amplitudes: &[f64], stats: [Statistics; 2], map: &JacobiMap, grid: &TensorGrid) -> Vec<f64> {
    let g = SymmetryGroup::new(map, stats, grid);
    let mut v = amplitudes.to_vec();
    g.project_full(&mut v);
    v
}
