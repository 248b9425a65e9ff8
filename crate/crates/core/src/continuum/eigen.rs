//! Eigenvalues of bounded domains by shift-invert Lanczos.

use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg;

use super::geometry::{JunctionGeometry, Layout, WallBc};

#[derive(Debug, Clone, PartialEq)]
pub struct EigenOptions {
    /// Shift `σ`; eigenvalues are returned in increasing order starting at
    /// the first one above `σ`. Defaults to half the channel threshold.
    pub shift: Option<f64>,
    /// Convergence test `|β_m y_m| ≤ tolerance·|θ|` on Ritz pairs.
    pub tolerance: f64,
    pub max_krylov: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            shift: None,
            tolerance: 1e-12,
            max_krylov: 1500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Spectrum2d {
    pub eigenvalues: Vec<f64>,
    /// Explicit residuals `‖A x − λ x‖` for unit `x`.
    pub residuals: Vec<f64>,
    pub shift: f64,
    /// Lanczos steps taken.
    pub iterations: usize,
    pub unknowns: usize,
    pub h: f64,
}

/// Channel threshold `λ0` at reference scale: lowest transverse eigenvalue of
/// the narrowest lead, or of the narrowest rectangle side without leads.
fn reference_threshold(geometry: &JunctionGeometry) -> f64 {
    let w = if geometry.leads.is_empty() {
        geometry
            .rectangles
            .iter()
            .map(|r| (r[2] - r[0]).min(r[3] - r[1]))
            .fold(f64::INFINITY, f64::min)
    } else {
        geometry
            .leads
            .iter()
            .map(|l| l.width)
            .fold(f64::INFINITY, f64::min)
    };
    match geometry.wall {
        WallBc::Dirichlet => (std::f64::consts::PI / w).powi(2),
        WallBc::Neumann => 0.0,
    }
}

/// `count` eigenvalues of `scale²(−Δ_h)` on the geometry with lead lengths
/// multiplied by `length_scale`. All leads must be closed.
pub fn domain_eigenvalues(
    geometry: &JunctionGeometry,
    scale: f64,
    length_scale: f64,
    h: f64,
    count: usize,
    options: &EigenOptions,
) -> Result<Spectrum2d> {
    if geometry.leads.iter().any(|l| l.end.is_open()) {
        return Err(Error::Unsupported(
            "domain has open leads; eigenvalues need a bounded domain".into(),
        ));
    }
    if count == 0 {
        return Err(Error::OutOfRange("count must be positive".into()));
    }
    let layout = Layout::new(geometry, scale, length_scale, h)?;
    let n = layout.len();
    let mut entries = layout.laplacian();
    entries.sort_unstable_by_key(|e| (e.0, e.1));
    let l0 = reference_threshold(geometry);
    let shift = options
        .shift
        .unwrap_or(if l0 > 0.0 { 0.5 * l0 } else { -1.0 });
    let mut shifted = entries.clone();
    for i in 0..n {
        shifted.push((i, i, -shift));
    }
    let lu = linalg::sparse_lu(n, shifted)?;
    let apply = |x: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; n];
        for &(i, j, v) in &entries {
            y[i] += v * x[j];
        }
        y
    };

    let want = count.min(n);
    let max_m = options.max_krylov.min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_m + 1);
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    // deterministic, non-symmetric start vector
    let mut q: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * (0.7 * i as f64).sin()).collect();
    normalize(&mut q);
    basis.push(q);
    let check_every = 10;
    let mut converged: Option<(Vec<f64>, Mat<f64>)> = None;
    let mut steps = 0;
    while steps < max_m {
        let qj = &basis[steps];
        let rhs = Mat::from_fn(n, 1, |i, _| qj[i]);
        let sol = lu.solve(&rhs);
        let mut w: Vec<f64> = (0..n).map(|i| sol[(i, 0)]).collect();
        let a = dot(&w, qj);
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let p = dot(&w, b);
                axpy(&mut w, -p, b);
            }
        }
        let b = norm(&w);
        beta.push(b);
        steps += 1;
        // exact invariant subspace: the Ritz values are eigenvalues
        let breakdown = b <= 1e-14 * a.abs().max(1e-300);
        if breakdown || steps % check_every == 0 || steps == max_m {
            let (theta, y) = tridiagonal_eigen(&alpha, &beta[..steps - 1])?;
            // Ritz values largest first (closest above the shift)
            let ok = steps >= want
                && (0..steps).rev().take(want).all(|i| {
                    theta[i] > 0.0 && (b * y[(steps - 1, i)]).abs() <= options.tolerance * theta[i]
                });
            if ok || breakdown {
                converged = Some((theta, y));
                break;
            }
        }
        if steps == max_m {
            break;
        }
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(w);
    }
    let (theta, y) = converged.ok_or_else(|| {
        Error::Numerical(format!(
            "Lanczos did not converge for {want} eigenvalues in {steps} steps (n = {n})"
        ))
    })?;
    let m = theta.len();
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(want);
    for i in (0..m).rev().take(want) {
        if theta[i] <= 0.0 {
            break;
        }
        let mut x = vec![0.0; n];
        for (j, b) in basis.iter().take(m).enumerate() {
            axpy(&mut x, y[(j, i)], b);
        }
        normalize(&mut x);
        let lambda = shift + 1.0 / theta[i];
        let ax = apply(&x);
        let r = ax
            .iter()
            .zip(&x)
            .map(|(p, q)| (p - lambda * q).powi(2))
            .sum::<f64>()
            .sqrt();
        pairs.push((lambda, r));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(Spectrum2d {
        eigenvalues: pairs.iter().map(|p| p.0).collect(),
        residuals: pairs.iter().map(|p| p.1).collect(),
        shift,
        iterations: steps,
        unknowns: n,
        h,
    })
}

/// Eigenvalues of `ε²(−Δ_h)` on the network whose junction and channel
/// widths are scaled by `ε` while channel lengths stay at their axis length.
pub fn network_eigenvalues_2d(
    geometry: &JunctionGeometry,
    epsilon: f64,
    h: f64,
    count: usize,
    options: &EigenOptions,
) -> Result<Spectrum2d> {
    if !(epsilon > 0.0) {
        return Err(Error::OutOfRange(format!(
            "epsilon = {epsilon} must be positive"
        )));
    }
    if h > epsilon / 10.0 * (1.0 + 1e-12) {
        return Err(Error::Resolution(format!(
            "h = {h} exceeds epsilon/10 = {}",
            epsilon / 10.0
        )));
    }
    domain_eigenvalues(geometry, epsilon, 1.0, h, count, options)
}

fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> Result<(Vec<f64>, Mat<f64>)> {
    let m = alpha.len();
    let t = Mat::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    linalg::symmetric_eigen(&t)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &mut [f64]) {
    let n = norm(a);
    a.iter_mut().for_each(|x| *x /= n);
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(p, q)| *p += a * q);
}
