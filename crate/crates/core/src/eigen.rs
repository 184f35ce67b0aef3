//! Block preconditioned eigensolver (LOBPCG) for the lowest eigenpairs of a
//! real symmetric operator that is only available through products.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub trait Operator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

pub trait Preconditioner: Sync {
    /// Approximate (A − λ)^{-1} r for the current Ritz value λ.
    fn apply(&self, r: &[f64], ritz: f64, out: &mut [f64]);
}

#[derive(Debug, Clone)]
pub struct EigenOptions {
    pub n_eig: usize,
    pub guard: usize,
    /// Bound on ‖Ax − λx‖ for unit x.
    pub tol: f64,
    pub max_iter: usize,
    /// The projector is reapplied to the iterate every this many steps.
    pub reproject_every: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { n_eig: 2, guard: 2, tol: 1e-9, max_iter: 5000, reproject_every: 10 }
    }
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthonormalize `z` against the orthonormal set `q` and among itself;
/// directions that become numerically dependent are dropped.
fn orthonormalize(q: &[Vec<f64>], mut z: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    for _ in 0..2 {
        for v in z.iter_mut() {
            for u in q {
                let c = dot(u, v);
                axpy(-c, u, v);
            }
        }
    }
    let mut out: Vec<Vec<f64>> = Vec::new();
    for mut v in z {
        let n0 = norm(&v);
        if n0 == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= n0);
        for _ in 0..2 {
            for u in q.iter().chain(out.iter()) {
                let c = dot(u, &v);
                axpy(-c, u, &mut v);
            }
        }
        let n1 = norm(&v);
        if n1 > 1e-10 {
            v.iter_mut().for_each(|x| *x /= n1);
            out.push(v);
        }
    }
    out
}

fn combine(basis: &[&Vec<f64>], coeffs: &DMatrix<f64>, col: usize, skip: usize, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    for (k, b) in basis.iter().enumerate().skip(skip) {
        let c = coeffs[(k, col)];
        if c != 0.0 {
            axpy(c, b, &mut v);
        }
    }
    v
}

/// Lowest `opts.n_eig` eigenpairs within the range of `project`, which must
/// commute with the operator and the preconditioner.
pub fn lobpcg(
    op: &dyn Operator,
    pre: &dyn Preconditioner,
    project: &dyn Fn(&mut [f64]),
    start: Vec<Vec<f64>>,
    opts: &EigenOptions,
) -> Result<EigenResult> {
    let n = op.dim();
    let b = opts.n_eig + opts.guard;
    let mut x0 = start;
    x0.truncate(b);
    for v in x0.iter_mut() {
        project(v);
    }
    let mut x = orthonormalize(&[], x0);
    if x.len() < opts.n_eig {
        return Err(Error::NoConvergence { iterations: 0, last: f64::INFINITY, history: vec![] });
    }
    let b = x.len();
    let matvec = |v: &[f64]| {
        let mut y = vec![0.0; n];
        op.apply(v, &mut y);
        y
    };
    let mut ax: Vec<Vec<f64>> = x.iter().map(|v| matvec(v)).collect();
    let mut lambda: Vec<f64> = x.iter().zip(&ax).map(|(v, a)| dot(v, a)).collect();
    let mut p: Vec<Vec<f64>> = Vec::new();
    let mut history = Vec::new();
    let mut residuals = vec![f64::INFINITY; b];

    for it in 0..=opts.max_iter {
        if it > 0 && it % opts.reproject_every == 0 {
            for v in x.iter_mut() {
                project(v);
            }
            x = orthonormalize(&[], x);
            ax = x.iter().map(|v| matvec(v)).collect();
            lambda = x.iter().zip(&ax).map(|(v, a)| dot(v, a)).collect();
            p.clear();
        }
        let r: Vec<Vec<f64>> = (0..x.len())
            .map(|j| {
                let mut rj = ax[j].clone();
                axpy(-lambda[j], &x[j], &mut rj);
                rj
            })
            .collect();
        residuals = r.iter().map(|v| norm(v)).collect();
        let worst = residuals[..opts.n_eig].iter().cloned().fold(0.0, f64::max);
        history.push(worst);
        if worst <= opts.tol {
            let order: Vec<usize> = (0..opts.n_eig).collect();
            return Ok(EigenResult {
                values: order.iter().map(|&j| lambda[j]).collect(),
                vectors: order.iter().map(|&j| x[j].clone()).collect(),
                residuals: order.iter().map(|&j| residuals[j]).collect(),
                iterations: it,
                history,
            });
        }
        if it == opts.max_iter {
            break;
        }
        let active: Vec<usize> = (0..x.len()).filter(|&j| residuals[j] > 0.1 * opts.tol).collect();
        let w: Vec<Vec<f64>> = active
            .iter()
            .map(|&j| {
                let mut wj = vec![0.0; n];
                pre.apply(&r[j], lambda[j], &mut wj);
                project(&mut wj);
                wj
            })
            .collect();
        let mut extra = w;
        extra.extend(p.iter().cloned());
        let z = orthonormalize(&x, extra);
        let az: Vec<Vec<f64>> = z.iter().map(|v| matvec(v)).collect();

        let basis: Vec<&Vec<f64>> = x.iter().chain(z.iter()).collect();
        let abasis: Vec<&Vec<f64>> = ax.iter().chain(az.iter()).collect();
        let k = basis.len();
        let mut g = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = 0.5 * (dot(basis[i], abasis[j]) + dot(basis[j], abasis[i]));
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(g);
        let mut idx: Vec<usize> = (0..k).collect();
        idx.sort_by(|&a, &c| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[c]));
        let c = eig.eigenvectors.select_columns(&idx[..b]);
        let nx = x.len();
        let new_x: Vec<Vec<f64>> = (0..b).map(|j| combine(&basis, &c, j, 0, n)).collect();
        let new_ax: Vec<Vec<f64>> = (0..b).map(|j| combine(&abasis, &c, j, 0, n)).collect();
        p = (0..b).map(|j| combine(&basis, &c, j, nx, n)).collect();
        p.retain(|v| norm(v) > 1e-14);
        x = new_x;
        ax = new_ax;
        // Refresh products now and then to stop drift in the tracked A·X.
        if it % 25 == 24 {
            x = orthonormalize(&[], x);
            ax = x.iter().map(|v| matvec(v)).collect();
        }
        lambda = x.iter().zip(&ax).map(|(v, a)| dot(v, a)).collect();
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        last: residuals[..opts.n_eig.min(residuals.len())].iter().cloned().fold(0.0, f64::max),
        history,
    })
}
