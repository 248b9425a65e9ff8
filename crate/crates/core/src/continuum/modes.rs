//! Transverse eigenmodes of a channel cross-section.

use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::WallBc;

/// Continuous modes of `−d²/dy²` on `(0, w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBasis {
    pub width: f64,
    pub wall: WallBc,
    pub eigenvalues: Vec<f64>,
}

impl ModeBasis {
    fn index(&self, n: usize) -> f64 {
        match self.wall {
            WallBc::Dirichlet => (n + 1) as f64,
            WallBc::Neumann => n as f64,
        }
    }

    /// `φ_n(y)`, orthonormal in `L²(0, w)`.
    pub fn eval(&self, n: usize, y: f64) -> f64 {
        let w = self.width;
        let a = self.index(n) * PI / w;
        match self.wall {
            WallBc::Dirichlet => (2.0 / w).sqrt() * (a * y).sin(),
            WallBc::Neumann if n == 0 => (1.0 / w).sqrt(),
            WallBc::Neumann => (2.0 / w).sqrt() * (a * y).cos(),
        }
    }

    /// `k_n(λ) = √(λ − λ_n)` on the branch `Im k_n ≥ 0`, as `(re, im)`.
    pub fn wavenumber(&self, n: usize, lambda: f64) -> (f64, f64) {
        let d = lambda - self.eigenvalues[n];
        if d >= 0.0 {
            (d.sqrt(), 0.0)
        } else {
            (0.0, (-d).sqrt())
        }
    }

    /// Samples of the modes at the cell centers of a grid with `width/h` cells.
    pub fn discrete(&self, h: f64) -> Result<DiscreteModes> {
        let m = (self.width / h).round();
        if !(m >= 1.0) || ((self.width / h) - m).abs() > 1e-9 * m {
            return Err(Error::Resolution(format!(
                "width {} is not a multiple of the spacing {h}",
                self.width
            )));
        }
        Ok(DiscreteModes::new(m as usize, h, 1.0, self.wall))
    }
}

pub fn transverse_modes(width: f64, wall: WallBc, n_modes: usize) -> Result<ModeBasis> {
    if !(width > 0.0) || n_modes == 0 {
        return Err(Error::OutOfRange(format!(
            "need width > 0 and at least one mode, got width = {width}, modes = {n_modes}"
        )));
    }
    let mut basis = ModeBasis {
        width,
        wall,
        eigenvalues: Vec::with_capacity(n_modes),
    };
    for n in 0..n_modes {
        let a = basis.index(n) * PI / width;
        basis.eigenvalues.push(a * a);
    }
    Ok(basis)
}

/// Exact eigenvectors of the cell-centered transverse stencil with `m`
/// cells: `φ_n(j) ∝ sin((n+1)π(j+½)/m)` (Dirichlet) or `cos(nπ(j+½)/m)`
/// (Neumann), normalized so `Σ_j φ_n(j)² h = 1`.
#[derive(Debug, Clone)]
pub struct DiscreteModes {
    pub cells: usize,
    pub h: f64,
    /// `scale² (4/h²) sin²(...)`: eigenvalues of the scaled transverse operator.
    pub eigenvalues: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl DiscreteModes {
    pub fn new(cells: usize, h: f64, scale: f64, wall: WallBc) -> Self {
        let m = cells as f64;
        let mut eigenvalues = Vec::with_capacity(cells);
        let mut vectors = Vec::with_capacity(cells);
        for n in 0..cells {
            let idx = match wall {
                WallBc::Dirichlet => (n + 1) as f64,
                WallBc::Neumann => n as f64,
            };
            let s = (idx * PI / (2.0 * m)).sin();
            eigenvalues.push(scale * scale * 4.0 / (h * h) * s * s);
            let mut v: Vec<f64> = (0..cells)
                .map(|j| {
                    let arg = idx * PI * (j as f64 + 0.5) / m;
                    match wall {
                        WallBc::Dirichlet => arg.sin(),
                        WallBc::Neumann => arg.cos(),
                    }
                })
                .collect();
            let norm = (v.iter().map(|x| x * x).sum::<f64>() * h).sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            vectors.push(v);
        }
        DiscreteModes {
            cells,
            h,
            eigenvalues,
            vectors,
        }
    }

    /// `⟨u, φ_n⟩ = Σ_j u_j φ_n(j) h`.
    pub fn project(&self, n: usize, u: &[faer::c64]) -> faer::c64 {
        let phi = &self.vectors[n];
        let mut s = faer::c64::new(0.0, 0.0);
        for (x, p) in u.iter().zip(phi) {
            s += x * *p;
        }
        s * self.h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuous_examples() {
        let d = transverse_modes(1.0, WallBc::Dirichlet, 3).unwrap();
        for (n, l) in d.eigenvalues.iter().enumerate() {
            let exact = PI * PI * ((n + 1) * (n + 1)) as f64;
            assert!((l - exact).abs() < 1e-12);
        }
        let nm = transverse_modes(1.0, WallBc::Neumann, 2).unwrap();
        assert_eq!(nm.eigenvalues[0], 0.0);
        assert!((nm.eigenvalues[1] - PI * PI).abs() < 1e-12);
        assert!(transverse_modes(0.0, WallBc::Dirichlet, 1).is_err());
    }

    #[test]
    fn orthonormal_at_fine_grid() {
        let h = 1.0 / 256.0;
        for wall in [WallBc::Dirichlet, WallBc::Neumann] {
            let basis = transverse_modes(1.0, wall, 2).unwrap();
            let dot = |a: usize, b: usize| -> f64 {
                (0..256)
                    .map(|j| {
                        let y = (j as f64 + 0.5) * h;
                        basis.eval(a, y) * basis.eval(b, y) * h
                    })
                    .sum()
            };
            assert!(dot(0, 1).abs() <= 1e-12);
            assert!((dot(0, 0) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn discrete_modes_are_stencil_eigenvectors() {
        for wall in [WallBc::Dirichlet, WallBc::Neumann] {
            let m = 12;
            let h = 0.25;
            let modes = DiscreteModes::new(m, h, 1.0, wall);
            let ghost = match wall {
                WallBc::Dirichlet => -1.0,
                WallBc::Neumann => 1.0,
            };
            for n in 0..m {
                let v = &modes.vectors[n];
                for j in 0..m {
                    let left = if j == 0 { ghost * v[0] } else { v[j - 1] };
                    let right = if j + 1 == m {
                        ghost * v[m - 1]
                    } else {
                        v[j + 1]
                    };
                    let lap = (2.0 * v[j] - left - right) / (h * h);
                    assert!((lap - modes.eigenvalues[n] * v[j]).abs() < 1e-10);
                }
            }
        }
    }
}
