//! Vertex gluing data: scattering matrices `T_v(λ)` attached to junctions.
//!
//! A junction of degree `d` carries a `d×d` matrix whose row/column order is
//! the vertex's channel order. Three representations are supported: the
//! Kirchhoff closed form, a λ-independent matrix, and a table of matrices on
//! an increasing λ grid with entrywise linear interpolation.
//!
//! The module also computes the threshold eigenprojections of `T_v(λ0)`,
//! which turn the gluing condition into `k` Dirichlet-type and `d − k`
//! Neumann-type conditions at `λ = λ0`.

use std::fs;
use std::path::{Path, PathBuf};

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};

/// Default unitarity/symmetry tolerance for closed-form vertex data.
pub const ANALYTIC_TOLERANCE: f64 = 1e-10;
/// Default tolerance for matrices produced by the continuum solver.
pub const TABULATED_TOLERANCE: f64 = 1e-6;
/// Default distance within which eigenvalues of `T(λ0)` are snapped to ±1.
pub const SNAP_TOLERANCE: f64 = 1e-6;
/// Entrywise positivity threshold for the Kirchhoff-type weight vector.
pub const POSITIVITY_THRESHOLD: f64 = 1e-10;

/// The Kirchhoff scattering matrix of a degree-`d` vertex: `2/d − δ_ij`.
pub fn kirchhoff_matrix(d: usize) -> Result<Mat<f64>> {
    if d < 2 {
        return Err(Error::invariant(
            "vertex",
            format!("degree {d}"),
            "kirchhoff vertex needs degree >= 2",
        ));
    }
    let off = 2.0 / d as f64;
    Ok(Mat::from_fn(
        d,
        d,
        |i, j| if i == j { off - 1.0 } else { off },
    ))
}

pub fn to_complex(m: &Mat<f64>) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| c(m[(i, j)], 0.0))
}

/// λ-tabulated scattering matrices with linear interpolation.
#[derive(Debug, Clone)]
pub struct Table {
    pub degree: usize,
    /// Branch point of the tabulated family.
    pub lambda0: f64,
    pub lambda1: Option<f64>,
    /// Grid spacing of the solver run that produced the table, if known.
    pub spacing: Option<f64>,
    pub lambdas: Vec<f64>,
    pub matrices: Vec<CMat>,
    /// Where the table was loaded from; kept so graphs re-serialize by reference.
    pub source: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub enum VertexCondition {
    Kirchhoff { degree: usize },
    Constant(CMat),
    Tabulated(Table),
}

impl VertexCondition {
    pub fn degree(&self) -> usize {
        match self {
            VertexCondition::Kirchhoff { degree } => *degree,
            VertexCondition::Constant(m) => m.nrows(),
            VertexCondition::Tabulated(t) => t.degree,
        }
    }

    /// True when the matrix does not depend on λ.
    pub fn is_constant(&self) -> bool {
        !matches!(self, VertexCondition::Tabulated(_))
    }

    /// `T_v(λ)`. Errors if `λ ≥ λ1` or, for tables, outside the tabulated range.
    pub fn evaluate(&self, lambda: f64, lambda1: f64) -> Result<CMat> {
        if !(lambda < lambda1) {
            return Err(Error::OutOfRange(format!(
                "lambda = {lambda} is not below lambda1 = {lambda1}"
            )));
        }
        self.evaluate_unchecked(lambda)
    }

    fn evaluate_unchecked(&self, lambda: f64) -> Result<CMat> {
        match self {
            VertexCondition::Kirchhoff { degree } => Ok(to_complex(&kirchhoff_matrix(*degree)?)),
            VertexCondition::Constant(m) => Ok(m.clone()),
            VertexCondition::Tabulated(t) => t.interpolate(lambda),
        }
    }
}

impl Table {
    pub fn new(
        degree: usize,
        lambda0: f64,
        lambdas: Vec<f64>,
        matrices: Vec<CMat>,
    ) -> Result<Self> {
        let table = Table {
            degree,
            lambda0,
            lambda1: None,
            spacing: None,
            lambdas,
            matrices,
            source: None,
        };
        table.check()?;
        Ok(table)
    }

    fn check(&self) -> Result<()> {
        if self.lambdas.is_empty() {
            return Err(Error::Schema("table has no entries".into()));
        }
        if self.lambdas.len() != self.matrices.len() {
            return Err(Error::Schema("table grid and matrix counts differ".into()));
        }
        if self.lambdas.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Schema(
                "table lambda values must be strictly increasing".into(),
            ));
        }
        for (l, m) in self.lambdas.iter().zip(&self.matrices) {
            if m.nrows() != self.degree || m.ncols() != self.degree {
                return Err(Error::Schema(format!(
                    "table entry at lambda = {l} is {}x{}, expected {}x{}",
                    m.nrows(),
                    m.ncols(),
                    self.degree,
                    self.degree
                )));
            }
        }
        Ok(())
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lambdas[0], *self.lambdas.last().unwrap())
    }

    pub fn interpolate(&self, lambda: f64) -> Result<CMat> {
        let (lo, hi) = self.range();
        // absorb rounding from λ ↔ k conversions at the table ends
        let slack = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
        if !(lambda >= lo - slack && lambda <= hi + slack) {
            return Err(Error::OutOfRange(format!(
                "lambda = {lambda} outside tabulated range [{lo}, {hi}]"
            )));
        }
        let lambda = lambda.clamp(lo, hi);
        let i = self.lambdas.partition_point(|&x| x <= lambda);
        if i == 0 {
            return Ok(self.matrices[0].clone());
        }
        if i == self.lambdas.len() {
            return Ok(self.matrices[i - 1].clone());
        }
        let (l0, l1) = (self.lambdas[i - 1], self.lambdas[i]);
        if lambda == l0 {
            return Ok(self.matrices[i - 1].clone());
        }
        let w = (lambda - l0) / (l1 - l0);
        let (a, b) = (&self.matrices[i - 1], &self.matrices[i]);
        Ok(Mat::from_fn(self.degree, self.degree, |r, s| {
            a[(r, s)] * (1.0 - w) + b[(r, s)] * w
        }))
    }

    /// `T(λ0)` by quadratic extrapolation in `√(λ − λ0)` from the three
    /// lowest grid points. `T` is analytic in that variable near the threshold.
    pub fn extrapolate_to_threshold(&self) -> Result<CMat> {
        if self.lambdas.len() < 3 {
            return Err(Error::Decomposition(
                "threshold extrapolation needs at least three table entries".into(),
            ));
        }
        let k: Vec<f64> = self.lambdas[..3]
            .iter()
            .map(|&l| (l - self.lambda0).max(0.0).sqrt())
            .collect();
        if k.windows(2).any(|w| (w[1] - w[0]).abs() < 1e-300) {
            return Err(Error::Decomposition(
                "degenerate extrapolation nodes".into(),
            ));
        }
        // Lagrange weights at k = 0.
        let w = [
            k[1] * k[2] / ((k[0] - k[1]) * (k[0] - k[2])),
            k[0] * k[2] / ((k[1] - k[0]) * (k[1] - k[2])),
            k[0] * k[1] / ((k[2] - k[0]) * (k[2] - k[1])),
        ];
        let m = &self.matrices;
        Ok(Mat::from_fn(self.degree, self.degree, |r, s| {
            m[0][(r, s)] * w[0] + m[1][(r, s)] * w[1] + m[2][(r, s)] * w[2]
        }))
    }
}

// ---------------------------------------------------------------------------
// Table file format.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableDocument {
    pub degree: usize,
    pub lambda0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    pub entries: Vec<TableEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableEntry {
    pub lambda: f64,
    pub matrix: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitarity_deviation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asymmetry: Option<f64>,
}

pub fn matrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Schema(format!("matrix is not square ({n} rows)")));
    }
    Ok(Mat::from_fn(n, n, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

pub fn matrix_to_pairs(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

impl TableDocument {
    pub fn into_table(self) -> Result<Table> {
        let mut lambdas = Vec::with_capacity(self.entries.len());
        let mut matrices = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            lambdas.push(e.lambda);
            matrices.push(matrix_from_pairs(&e.matrix)?);
        }
        let mut table = Table::new(self.degree, self.lambda0, lambdas, matrices)?;
        table.lambda1 = self.lambda1;
        table.spacing = self.spacing;
        Ok(table)
    }

    pub fn from_table(table: &Table) -> Self {
        TableDocument {
            degree: table.degree,
            lambda0: table.lambda0,
            lambda1: table.lambda1,
            spacing: table.spacing,
            entries: table
                .lambdas
                .iter()
                .zip(&table.matrices)
                .map(|(&lambda, m)| TableEntry {
                    lambda,
                    matrix: matrix_to_pairs(m),
                    unitarity_deviation: None,
                    asymmetry: None,
                })
                .collect(),
        }
    }
}

pub fn load_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: TableDocument = serde_json::from_str(&text)?;
    let mut table = doc.into_table()?;
    table.source = Some(path.to_path_buf());
    Ok(table)
}

// ---------------------------------------------------------------------------
// Validation.

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// `max ‖T T* − I‖₂` over samples in `(λ0, λ1)`.
    pub unitarity: f64,
    /// `max ‖T − Tᵀ‖₂` over samples in `(λ0, λ1)`.
    pub asymmetry: f64,
    /// `max ‖Im T‖₂` over samples below `λ0`.
    pub imaginary: f64,
    /// `max ‖T Tᵀ − I‖₂` over samples below `λ0`.
    pub orthogonality: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Deviation norms of a matrix from the unitary/symmetric (above threshold)
/// or real-orthogonal (below threshold) class.
pub fn unitarity_deviation(t: &CMat) -> Result<f64> {
    let n = t.nrows();
    linalg::norm2(&linalg::sub(
        &linalg::matmul(t, &linalg::adjoint(t)),
        &linalg::identity(n),
    ))
}

pub fn asymmetry(t: &CMat) -> Result<f64> {
    linalg::norm2(&linalg::sub(t, &linalg::transpose(t)))
}

pub fn imaginary_part_norm(t: &CMat) -> Result<f64> {
    let im = Mat::from_fn(t.nrows(), t.ncols(), |i, j| c(t[(i, j)].im, 0.0));
    linalg::norm2(&im)
}

pub fn orthogonality_deviation(t: &CMat) -> Result<f64> {
    let n = t.nrows();
    linalg::norm2(&linalg::sub(
        &linalg::matmul(t, &linalg::transpose(t)),
        &linalg::identity(n),
    ))
}

/// Samples at or above `λ1`, or outside a table's range, are skipped.
pub fn validate_condition(
    condition: &VertexCondition,
    lambda_samples: &[f64],
    lambda0: f64,
    lambda1: f64,
    tolerance: f64,
) -> Result<ValidationReport> {
    let mut report = ValidationReport {
        unitarity: 0.0,
        asymmetry: 0.0,
        imaginary: 0.0,
        orthogonality: 0.0,
        tolerance,
        passed: true,
    };
    for &lambda in lambda_samples {
        let t = match condition.evaluate(lambda, lambda1) {
            Ok(t) => t,
            Err(Error::OutOfRange(_)) => continue,
            Err(e) => return Err(e),
        };
        if lambda > lambda0 {
            report.unitarity = report.unitarity.max(unitarity_deviation(&t)?);
            report.asymmetry = report.asymmetry.max(asymmetry(&t)?);
        } else if lambda < lambda0 {
            report.imaginary = report.imaginary.max(imaginary_part_norm(&t)?);
            report.orthogonality = report.orthogonality.max(orthogonality_deviation(&t)?);
        }
    }
    report.passed = report.unitarity <= tolerance
        && report.asymmetry <= tolerance
        && report.imaginary <= tolerance
        && report.orthogonality <= tolerance;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Threshold decomposition.

#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdClass {
    /// `k = d`: every channel sees a Dirichlet condition.
    DirichletType,
    /// `k = d − 1` with an entrywise positive `+1` eigenvector (the weights).
    KirchhoffType {
        weights: Vec<f64>,
    },
    Mixed,
}

#[derive(Debug, Clone)]
pub struct ThresholdDecomposition {
    pub degree: usize,
    /// Projection onto the `−1` eigenspace of `T(λ0)`.
    pub p: Mat<f64>,
    /// Projection onto the `+1` eigenspace.
    pub p_perp: Mat<f64>,
    pub k: usize,
    pub classification: ThresholdClass,
    /// Eigenvalues of `sym(Re T(λ0))` before snapping.
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct ThresholdOptions {
    pub snap_tolerance: f64,
    /// Allowed `‖T − Tᵀ‖` at the threshold.
    pub symmetry_tolerance: f64,
    /// Permit quadratic extrapolation of a table whose grid starts above `λ0`.
    pub extrapolate: bool,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        ThresholdOptions {
            snap_tolerance: SNAP_TOLERANCE,
            symmetry_tolerance: SNAP_TOLERANCE,
            extrapolate: false,
        }
    }
}

/// `T_v(λ0)` as used by the threshold problem.
pub fn threshold_matrix(
    condition: &VertexCondition,
    lambda0: f64,
    extrapolate: bool,
) -> Result<CMat> {
    match condition {
        VertexCondition::Tabulated(t) => {
            let (lo, hi) = t.range();
            if lo <= lambda0 && lambda0 <= hi {
                t.interpolate(lambda0)
            } else if extrapolate && lo > lambda0 {
                t.extrapolate_to_threshold()
            } else {
                Err(Error::Decomposition(format!(
                    "table range [{lo}, {hi}] does not reach lambda0 = {lambda0} and extrapolation is disabled"
                )))
            }
        }
        other => other.evaluate_unchecked(lambda0),
    }
}

pub fn threshold_decomposition(
    condition: &VertexCondition,
    lambda0: f64,
    options: ThresholdOptions,
) -> Result<ThresholdDecomposition> {
    let t = threshold_matrix(condition, lambda0, options.extrapolate)?;
    decompose_threshold_matrix(&t, options)
}

pub fn decompose_threshold_matrix(
    t: &CMat,
    options: ThresholdOptions,
) -> Result<ThresholdDecomposition> {
    let d = t.nrows();
    let asym = asymmetry(t)?;
    if asym > options.symmetry_tolerance {
        return Err(Error::Decomposition(format!(
            "T(lambda0) is not symmetric (||T - T^T|| = {asym:.3e})"
        )));
    }
    let sym = Mat::from_fn(d, d, |i, j| 0.5 * (t[(i, j)].re + t[(j, i)].re));
    let (vals, vecs) = linalg::symmetric_eigen(&sym)?;
    let mut p = Mat::<f64>::zeros(d, d);
    let mut p_perp = Mat::<f64>::zeros(d, d);
    let mut k = 0;
    let mut plus_vectors = Vec::new();
    for (idx, &ev) in vals.iter().enumerate() {
        let target = if (ev + 1.0).abs() <= options.snap_tolerance {
            k += 1;
            &mut p
        } else if (ev - 1.0).abs() <= options.snap_tolerance {
            plus_vectors.push(idx);
            &mut p_perp
        } else {
            return Err(Error::Decomposition(format!(
                "eigenvalue {ev} of T(lambda0) is not within {} of +-1",
                options.snap_tolerance
            )));
        };
        for i in 0..d {
            for j in 0..d {
                target[(i, j)] += vecs[(i, idx)] * vecs[(j, idx)];
            }
        }
    }
    let classification = if k == d {
        ThresholdClass::DirichletType
    } else if k + 1 == d {
        let idx = plus_vectors[0];
        let sign = if vecs[(0, idx)] < 0.0 { -1.0 } else { 1.0 };
        let weights: Vec<f64> = (0..d).map(|i| sign * vecs[(i, idx)]).collect();
        if weights.iter().all(|&w| w > POSITIVITY_THRESHOLD) {
            ThresholdClass::KirchhoffType { weights }
        } else {
            ThresholdClass::Mixed
        }
    } else {
        ThresholdClass::Mixed
    };
    Ok(ThresholdDecomposition {
        degree: d,
        p,
        p_perp,
        k,
        classification,
        eigenvalues: vals,
    })
}

impl ThresholdDecomposition {
    pub fn rank_perp(&self) -> usize {
        self.degree - self.k
    }
}

/// Rows `X ς(0) + Y ς'(0)/k = 0` for the scattering form of the gluing
/// condition: `X = (I − T)/2`, `Y = −(i/2)(I + T)`.
pub(crate) fn scattering_rows(t: &CMat) -> (CMat, CMat) {
    let d = t.nrows();
    let half = c(0.5, 0.0);
    let mhalf_i = c(0.0, -0.5);
    let x = Mat::from_fn(d, d, |i, j| {
        let id = if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) };
        (id - t[(i, j)]) * half
    });
    let y = Mat::from_fn(d, d, |i, j| {
        let id = if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) };
        (id + t[(i, j)]) * mhalf_i
    });
    (x, y)
}

#[cfg(test)]
pub(crate) fn zero() -> faer::c64 {
    c(0.0, 0.0)
}
