//! Junction scattering matrices from the discrete Helmholtz problem.
//!
//! Each open lead is cut after `L` and closed by the exact outgoing
//! condition of the discretized channel: in a straight grid channel the
//! transverse modes `φ_n` of the stencil decouple and each modal amplitude
//! obeys `v_{m+1} + v_{m−1} = 2β_n v_m`, so the outgoing root `z_n` of
//! `z + 1/z = 2β_n` gives the ghost layer exactly.

use std::path::Path;

use faer::linalg::solvers::Solve;
use faer::{c64, Mat};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::vertex::{self, Table, TableDocument};

use super::geometry::{JunctionGeometry, Layout};
use super::modes::{transverse_modes, DiscreteModes};

#[derive(Debug, Clone, PartialEq)]
pub struct JunctionOptions {
    /// Grid spacing in the scaled geometry.
    pub h: f64,
    /// Modes kept in the radiation condition (capped at the cells across).
    pub n_modes: usize,
    /// Transverse scale `s`: widths and junction are multiplied by `s`, the
    /// operator is `s²(−Δ_h)`.
    pub scale: f64,
    /// Factor applied to lead lengths.
    pub length_scale: f64,
    /// Minimum grid points per longitudinal wavelength.
    pub min_points_per_wavelength: f64,
    /// Keep the full fields in the solution (needed for profiles).
    pub keep_fields: bool,
}

impl JunctionOptions {
    pub fn new(h: f64) -> Self {
        JunctionOptions {
            h,
            n_modes: 8,
            scale: 1.0,
            length_scale: 1.0,
            min_points_per_wavelength: 12.0,
            keep_fields: true,
        }
    }

    /// Geometry scaled by `s` in every direction.
    pub fn scaled(mut self, s: f64) -> Self {
        self.scale = s;
        self.length_scale = s;
        self
    }
}

#[derive(Debug, Clone)]
pub struct JunctionDiagnostics {
    /// `‖T T* − I‖₂`.
    pub unitarity: f64,
    /// `‖T − Tᵀ‖₂`.
    pub asymmetry: f64,
    /// `Σ_j |t_{p,j}|²` per incident lead.
    pub flux: Vec<f64>,
    /// Largest `|c_n|`, `n ≥ 1`, on a truncation face relative to `max |c_0|`.
    pub evanescent: f64,
    pub unknowns: usize,
    /// First two thresholds of the discrete channel.
    pub discrete_thresholds: (f64, f64),
}

/// Total field of one scattering solve and the lead bookkeeping needed to
/// take modal traces.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    pub h: f64,
    pub lambda: f64,
    pub incident: String,
    pub values: Vec<c64>,
    /// Discrete longitudinal wavenumber of mode 0.
    pub k_discrete: f64,
    pub(crate) leads: Vec<FieldLead>,
}

#[derive(Debug, Clone)]
pub(crate) struct FieldLead {
    pub id: String,
    pub cells: Vec<Vec<usize>>,
    pub modes: DiscreteModes,
}

impl DiscreteField {
    fn lead(&self, id: &str) -> Result<&FieldLead> {
        self.leads
            .iter()
            .find(|l| l.id == id)
            .ok_or_else(|| Error::OutOfRange(format!("no lead `{id}` in the field")))
    }

    /// Modal trace `c_n(t_m) = ⟨u(t_m, ·), φ_n⟩` at the cell layers `t_m = (m + ½)h`.
    pub fn trace(&self, lead: &str, n: usize) -> Result<Vec<c64>> {
        let l = self.lead(lead)?;
        if n >= l.modes.cells {
            return Err(Error::OutOfRange(format!(
                "mode {n} is not resolved on lead `{lead}`"
            )));
        }
        Ok(l.cells
            .iter()
            .map(|layer| {
                let u: Vec<c64> = layer.iter().map(|&i| self.values[i]).collect();
                l.modes.project(n, &u)
            })
            .collect())
    }

    pub fn lead_ids(&self) -> Vec<String> {
        self.leads.iter().map(|l| l.id.clone()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct JunctionSolution {
    pub lambda: f64,
    /// Open lead ids in matrix order.
    pub leads: Vec<String>,
    /// `matrix[(j, p)] = t_{p,j}`: column `p` holds the response to a unit
    /// mode-0 wave incident along lead `p`.
    pub matrix: CMat,
    pub diagnostics: JunctionDiagnostics,
    /// One field per incident lead (empty unless `keep_fields`).
    pub fields: Vec<DiscreteField>,
}

/// Lowest two thresholds of the discrete channel for the open leads.
pub fn discrete_thresholds(
    geometry: &JunctionGeometry,
    options: &JunctionOptions,
) -> Result<(f64, f64)> {
    let layout = Layout::new(geometry, options.scale, options.length_scale, options.h)?;
    let lead = layout
        .leads
        .iter()
        .find(|l| l.open)
        .ok_or_else(|| Error::Unsupported("geometry has no open leads".into()))?;
    let modes = DiscreteModes::new(lead.width_cells, options.h, options.scale, geometry.wall);
    Ok((
        modes.eigenvalues[0],
        modes.eigenvalues.get(1).copied().unwrap_or(f64::INFINITY),
    ))
}

/// Outgoing root of `z + 1/z = 2β` for a channel mode with threshold `mu`.
fn outgoing_root(lambda: f64, mu: f64, h: f64, scale: f64) -> Result<c64> {
    let beta = 1.0 - (h * h / (scale * scale)) * (lambda - mu) / 2.0;
    if beta < -1.0 {
        return Err(Error::Resolution(format!(
            "lambda = {lambda} is beyond the grid's propagation band for threshold {mu}"
        )));
    }
    Ok(if beta <= 1.0 {
        c(beta, (1.0 - beta * beta).sqrt())
    } else {
        c(beta - (beta * beta - 1.0).sqrt(), 0.0)
    })
}

pub fn junction_smatrix(
    geometry: &JunctionGeometry,
    lambda: f64,
    h: f64,
    n_modes: usize,
) -> Result<JunctionSolution> {
    let mut options = JunctionOptions::new(h);
    options.n_modes = n_modes;
    junction_smatrix_with(geometry, lambda, &options)
}

pub fn junction_smatrix_with(
    geometry: &JunctionGeometry,
    lambda: f64,
    options: &JunctionOptions,
) -> Result<JunctionSolution> {
    let open: Vec<usize> = (0..geometry.leads.len())
        .filter(|&k| geometry.leads[k].end.is_open())
        .collect();
    if open.is_empty() {
        return Err(Error::Unsupported("geometry has no open leads".into()));
    }
    let width = geometry.leads[open[0]].width;
    if open
        .iter()
        .any(|&k| (geometry.leads[k].width - width).abs() > 1e-12 * width)
    {
        return Err(Error::Unsupported("open leads must share one width".into()));
    }
    transverse_modes(width, geometry.wall, 2)?;
    let (h, s) = (options.h, options.scale);
    let layout = Layout::new(geometry, s, options.length_scale, h)?;
    let cells = layout.leads[open[0]].width_cells;
    let modes = DiscreteModes::new(cells, h, s, geometry.wall);
    let mu0 = modes.eigenvalues[0];
    let mu1 = modes.eigenvalues.get(1).copied().unwrap_or(f64::INFINITY);
    if !(lambda > mu0 && lambda < mu1) {
        return Err(Error::OutOfRange(format!(
            "lambda = {lambda} is outside the single-mode band ({mu0}, {mu1}) of the grid channel"
        )));
    }
    let ppw = 2.0 * std::f64::consts::PI * s / (h * (lambda - mu0).sqrt());
    if ppw < options.min_points_per_wavelength {
        return Err(Error::Resolution(format!(
            "{ppw:.1} points per wavelength, need {}",
            options.min_points_per_wavelength
        )));
    }
    let kept = options.n_modes.max(1).min(cells);
    let roots = (0..kept)
        .map(|n| outgoing_root(lambda, modes.eigenvalues[n], h, s))
        .collect::<Result<Vec<_>>>()?;
    let theta = roots[0].arg();
    let zpow = |a: f64| c64::from_polar(1.0, a * theta);

    let n = layout.len();
    let w = s * s / (h * h);
    let mut entries: Vec<(usize, usize, c64)> = layout
        .laplacian()
        .into_iter()
        .map(|(i, j, v)| (i, j, c(v, 0.0)))
        .collect();
    for i in 0..n {
        entries.push((i, i, c(-lambda, 0.0)));
    }
    for &k in &open {
        let last = layout.leads[k]
            .cells
            .last()
            .expect("leads have at least one layer");
        for (a, &ra) in last.iter().enumerate() {
            for (b, &rb) in last.iter().enumerate() {
                let mut v = c(0.0, 0.0);
                for (nn, z) in roots.iter().enumerate() {
                    v += z * (modes.vectors[nn][a] * modes.vectors[nn][b] * h);
                }
                entries.push((ra, rb, -v * w));
            }
        }
    }
    let lu = linalg::sparse_lu(n, entries)?;

    let d = open.len();
    let mut rhs = Mat::<c64>::zeros(n, d);
    for (p, &k) in open.iter().enumerate() {
        let lead = &layout.leads[k];
        let mt = lead.cells.len() as f64;
        let g = zpow(-(mt + 0.5)) - zpow(-(mt - 1.5));
        for (j, &cell) in lead.cells.last().unwrap().iter().enumerate() {
            rhs[(cell, p)] = g * (modes.vectors[0][j] * w);
        }
    }
    let sol = lu.solve(&rhs);

    let mut t = Mat::<c64>::zeros(d, d);
    let mut evanescent = 0.0f64;
    let mut c0_max = 0.0f64;
    for p in 0..d {
        for (jj, &k) in open.iter().enumerate() {
            let lead = &layout.leads[k];
            let trace = |m: usize, nn: usize| -> c64 {
                let u: Vec<c64> = lead.cells[m].iter().map(|&i| sol[(i, p)]).collect();
                modes.project(nn, &u)
            };
            let c0 = trace(0, 0);
            let direct = if jj == p { zpow(-0.5) } else { c(0.0, 0.0) };
            t[(jj, p)] = (c0 - direct) * zpow(-0.5);
            let face = lead.cells.len() - 1;
            c0_max = c0_max.max(trace(face, 0).norm());
            for nn in 1..kept {
                evanescent = evanescent.max(trace(face, nn).norm());
            }
        }
    }
    let unitarity = vertex::unitarity_deviation(&t)?;
    let asymmetry = vertex::asymmetry(&t)?;
    let flux = (0..d)
        .map(|p| (0..d).map(|j| t[(j, p)].norm_sqr()).sum())
        .collect();

    let leads: Vec<String> = open.iter().map(|&k| geometry.leads[k].id.clone()).collect();
    let fields = if options.keep_fields {
        let field_leads: Vec<FieldLead> = open
            .iter()
            .map(|&k| FieldLead {
                id: geometry.leads[k].id.clone(),
                cells: layout.leads[k].cells.clone(),
                modes: modes.clone(),
            })
            .collect();
        (0..d)
            .map(|p| DiscreteField {
                h,
                lambda,
                incident: leads[p].clone(),
                values: (0..n).map(|i| sol[(i, p)]).collect(),
                k_discrete: theta / h,
                leads: field_leads.clone(),
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(JunctionSolution {
        lambda,
        leads,
        matrix: t,
        diagnostics: JunctionDiagnostics {
            unitarity,
            asymmetry,
            flux,
            evanescent: if c0_max > 0.0 {
                evanescent / c0_max
            } else {
                evanescent
            },
            unknowns: n,
            discrete_thresholds: (mu0, mu1),
        },
        fields,
    })
}

// ---------------------------------------------------------------------------
// Tables.

#[derive(Debug, Clone)]
pub struct TabulatedJunction {
    pub leads: Vec<String>,
    /// Symmetrized matrices; thresholds are those of the discrete channel.
    pub table: Table,
    /// Unitarity deviation of the raw matrix at each node.
    pub unitarity: Vec<f64>,
    /// `‖T − Tᵀ‖₂` of the raw matrix at each node.
    pub asymmetry: Vec<f64>,
}

impl TabulatedJunction {
    pub fn document(&self) -> TableDocument {
        let mut doc = TableDocument::from_table(&self.table);
        for (e, (u, a)) in doc
            .entries
            .iter_mut()
            .zip(self.unitarity.iter().zip(&self.asymmetry))
        {
            e.unitarity_deviation = Some(*u);
            e.asymmetry = Some(*a);
        }
        doc
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.document())?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

pub fn tabulate_junction(
    geometry: &JunctionGeometry,
    lambdas: &[f64],
    h: f64,
    n_modes: usize,
) -> Result<TabulatedJunction> {
    let mut options = JunctionOptions::new(h);
    options.n_modes = n_modes;
    tabulate_junction_with(geometry, lambdas, &options)
}

pub fn tabulate_junction_with(
    geometry: &JunctionGeometry,
    lambdas: &[f64],
    options: &JunctionOptions,
) -> Result<TabulatedJunction> {
    if lambdas.is_empty() {
        return Err(Error::OutOfRange("empty lambda grid".into()));
    }
    let mut options = options.clone();
    options.keep_fields = false;
    let solutions = lambdas
        .par_iter()
        .map(|&l| junction_smatrix_with(geometry, l, &options))
        .collect::<Result<Vec<_>>>()?;
    let mut matrices = Vec::with_capacity(solutions.len());
    let mut unitarity = Vec::with_capacity(solutions.len());
    let mut asymmetry = Vec::with_capacity(solutions.len());
    for sol in &solutions {
        let m = &sol.matrix;
        let sym = Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)]) * 0.5);
        log::info!(
            "lambda = {:.6}: asymmetry {:.3e}, unitarity {:.3e}",
            sol.lambda,
            sol.diagnostics.asymmetry,
            sol.diagnostics.unitarity
        );
        matrices.push(sym);
        unitarity.push(sol.diagnostics.unitarity);
        asymmetry.push(sol.diagnostics.asymmetry);
    }
    let (mu0, mu1) = solutions[0].diagnostics.discrete_thresholds;
    let mut table = Table::new(solutions[0].leads.len(), mu0, lambdas.to_vec(), matrices)?;
    table.lambda1 = Some(mu1);
    table.spacing = Some(options.h);
    Ok(TabulatedJunction {
        leads: solutions[0].leads.clone(),
        table,
        unitarity,
        asymmetry,
    })
}

// ---------------------------------------------------------------------------
// Scale invariance.

#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub scale: f64,
    /// Max entry deviation with the spacing scaled along (`s·h`).
    pub grid_exact: f64,
    /// Max entry deviation with the reference spacing kept (`h`).
    pub unscaled: f64,
}

/// Compares `T` of the geometry scaled by `s` against the reference `T`.
pub fn scaling_invariance_check(
    geometry: &JunctionGeometry,
    lambda: f64,
    s: f64,
    options: &JunctionOptions,
) -> Result<ScalingReport> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::OutOfRange(format!("scale {s} must lie in (0, 1]")));
    }
    let mut base = options.clone();
    base.keep_fields = false;
    base.scale = 1.0;
    base.length_scale = 1.0;
    let mut exact = base.clone().scaled(s);
    exact.h = s * base.h;
    let unscaled = base.clone().scaled(s);
    let runs = [base, exact, unscaled];
    let sols = runs
        .par_iter()
        .map(|o| junction_smatrix_with(geometry, lambda, o))
        .collect::<Result<Vec<_>>>()?;
    let dev = |a: &CMat, b: &CMat| linalg::max_abs(&linalg::sub(a, b));
    Ok(ScalingReport {
        scale: s,
        grid_exact: dev(&sols[0].matrix, &sols[1].matrix),
        unscaled: dev(&sols[0].matrix, &sols[2].matrix),
    })
}

// ---------------------------------------------------------------------------
// Mode-0 profiles.

#[derive(Debug, Clone)]
pub struct Profile {
    pub lead: String,
    /// Distance of each cell layer from the mouth.
    pub t: Vec<f64>,
    pub c0: Vec<c64>,
    /// `‖u(t, ·) − c_0(t) φ_0‖` on each cross-section.
    pub residual: Vec<f64>,
    pub k_discrete: f64,
}

impl Profile {
    /// Least-squares slope of `ln residual` against `t` over `[t_min, t_max]`.
    pub fn log_residual_slope(&self, t_min: f64, t_max: f64) -> Result<f64> {
        let pts: Vec<(f64, f64)> = self
            .t
            .iter()
            .zip(&self.residual)
            .filter(|(t, r)| **t >= t_min && **t <= t_max && **r > 0.0)
            .map(|(t, r)| (*t, r.ln()))
            .collect();
        if pts.len() < 2 {
            return Err(Error::OutOfRange(
                "fewer than two points in the slope window".into(),
            ));
        }
        let nf = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        Ok(sxy / sxx)
    }
}

pub fn mode0_profile(field: &DiscreteField, lead: &str) -> Result<Profile> {
    let l = field.lead(lead)?;
    let h = field.h;
    let phi0 = &l.modes.vectors[0];
    let mut t = Vec::with_capacity(l.cells.len());
    let mut c0 = Vec::with_capacity(l.cells.len());
    let mut residual = Vec::with_capacity(l.cells.len());
    for (m, layer) in l.cells.iter().enumerate() {
        let u: Vec<c64> = layer.iter().map(|&i| field.values[i]).collect();
        let a = l.modes.project(0, &u);
        let r: f64 = u
            .iter()
            .zip(phi0)
            .map(|(x, p)| (x - a * *p).norm_sqr())
            .sum::<f64>()
            * h;
        t.push((m as f64 + 0.5) * h);
        c0.push(a);
        residual.push(r.sqrt());
    }
    Ok(Profile {
        lead: lead.to_string(),
        t,
        c0,
        residual,
        k_discrete: field.k_discrete,
    })
}

#[derive(Debug, Clone)]
pub struct Mode0Fit {
    /// Coefficient of `e^{ikt}`.
    pub outgoing: c64,
    /// Coefficient of `e^{−ikt}`.
    pub incoming: c64,
    pub k: f64,
    /// `max |c_0(t) − fit(t)|` over the fitted points.
    pub max_error: f64,
    pub points: usize,
}

/// Two-parameter least-squares fit `c_0(t) ≈ a e^{ikt} + b e^{−ikt}` over
/// `t ≥ t_min`, with the discrete wavenumber of the profile.
pub fn fit_mode0(profile: &Profile, t_min: f64) -> Result<Mode0Fit> {
    let k = profile.k_discrete;
    let rows: Vec<(c64, c64, c64)> = profile
        .t
        .iter()
        .zip(&profile.c0)
        .filter(|(t, _)| **t >= t_min)
        .map(|(&t, &v)| (c64::from_polar(1.0, k * t), c64::from_polar(1.0, -k * t), v))
        .collect();
    if rows.len() < 2 {
        return Err(Error::OutOfRange(format!(
            "fewer than two profile points beyond t = {t_min}"
        )));
    }
    let a = Mat::from_fn(
        rows.len(),
        2,
        |i, j| if j == 0 { rows[i].0 } else { rows[i].1 },
    );
    let b = Mat::from_fn(rows.len(), 1, |i, _| rows[i].2);
    let ah = linalg::adjoint(&a);
    let coef = linalg::solve_many(&linalg::matmul(&ah, &a), &linalg::matmul(&ah, &b));
    let (p, q) = (coef[(0, 0)], coef[(1, 0)]);
    let max_error = rows
        .iter()
        .map(|(e, f, v)| (v - (p * e + q * f)).norm())
        .fold(0.0, f64::max);
    Ok(Mode0Fit {
        outgoing: p,
        incoming: q,
        k,
        max_error,
        points: rows.len(),
    })
}
