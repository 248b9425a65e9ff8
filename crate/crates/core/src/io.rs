//! Command implementations and output formatting for the `fibernet` binary.
//!
//! Every command returns a [`Csv`] document whose `#` header echoes the
//! tool version, the command line and the tolerances in force, so a file
//! carries what is needed to rerun it. Floats are printed with `{:.12e}`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::assembly::{self, Point, SpectralContext, SINGULARITY_TOLERANCE};
use crate::continuum::{self, ConvergenceOptions, JunctionGeometry, JunctionOptions};
use crate::error::{Error, Result};
use crate::graph::{self, MetricGraph};
use crate::spectral::{self, SearchOptions};
use crate::threshold::{self, ThresholdProblem};
use crate::vertex::{
    self, ThresholdOptions, ANALYTIC_TOLERANCE, SNAP_TOLERANCE, TABULATED_TOLERANCE,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable holding the default worker count.
pub const THREADS_VAR: &str = "FIBERNET_THREADS";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub singularity: f64,
    /// Overrides the analytic/tabulated default when set.
    pub validation: Option<f64>,
    pub snap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            singularity: SINGULARITY_TOLERANCE,
            validation: None,
            snap: SNAP_TOLERANCE,
        }
    }
}

/// Settings shared by all commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// The command line as typed, echoed into output headers.
    pub argv: Vec<String>,
    pub tolerances: Tolerances,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(argv: Vec<String>) -> Self {
        RunConfig {
            argv,
            tolerances: Tolerances::default(),
            out: None,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        let ok = t.singularity > 0.0 && t.snap > 0.0 && t.validation.map_or(true, |v| v > 0.0);
        if !ok {
            return Err(Error::OutOfRange("tolerances must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::OutOfRange("thread count must be positive".into()));
        }
        Ok(())
    }

    /// Worker count: explicit setting, else the environment, else rayon's default.
    pub fn resolved_threads(&self) -> Option<usize> {
        self.threads
            .or_else(|| std::env::var(THREADS_VAR).ok().and_then(|v| v.parse().ok()))
            .filter(|&n| n > 0)
    }

    fn search(&self) -> SearchOptions {
        SearchOptions {
            tolerance: self.tolerances.singularity,
            ..SearchOptions::default()
        }
    }

    fn threshold_options(&self) -> ThresholdOptions {
        ThresholdOptions {
            snap_tolerance: self.tolerances.snap,
            ..ThresholdOptions::default()
        }
    }

    fn csv(&self) -> Csv {
        let mut csv = Csv::new();
        csv.meta("fibernet", VERSION);
        csv.meta("command", &shell_join(&self.argv));
        csv.meta("singularity_tolerance", &num(self.tolerances.singularity));
        csv.meta("snap_tolerance", &num(self.tolerances.snap));
        if let Some(v) = self.tolerances.validation {
            csv.meta("validation_tolerance", &num(v));
        }
        csv
    }
}

fn shell_join(argv: &[String]) -> String {
    argv.iter()
        .map(|a| {
            if !a.is_empty()
                && a.chars()
                    .all(|c| c.is_ascii_alphanumeric() || "-_./:,=+".contains(c))
            {
                a.clone()
            } else {
                format!("'{}'", a.replace('\'', r"'\''"))
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Process exit status for an error: 1 input, 2 usage, 3 numerical.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Schema(_) | Error::Invariant { .. } | Error::Io { .. } | Error::Json(_) => 1,
        Error::Unsupported(_) | Error::OutOfRange(_) => 2,
        Error::SpectralPoint { .. }
        | Error::Decomposition(_)
        | Error::Ambiguous(_)
        | Error::Resolution(_)
        | Error::Numerical(_) => 3,
    }
}

pub fn num(x: f64) -> String {
    format!("{x:.12e}")
}

// ---------------------------------------------------------------------------
// CSV.

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Csv {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new() -> Self {
        Csv::default()
    }

    pub fn meta(&mut self, key: &str, value: &str) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn columns(&mut self, cols: &[&str]) {
        self.columns = cols.iter().map(|c| c.to_string()).collect();
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}: {v}");
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        // writing into a Vec cannot fail
        w.write_record(&self.columns).expect("in-memory csv");
        for r in &self.rows {
            w.write_record(r).expect("in-memory csv");
        }
        s.push_str(&String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 fields"));
        s
    }

    /// Writes to `path`, or returns the text for stdout when `path` is `None`.
    pub fn emit(&self, path: Option<&Path>) -> Result<Option<String>> {
        let text = self.render();
        match path {
            Some(p) => {
                fs::write(p, text).map_err(|e| Error::io(p, e))?;
                Ok(None)
            }
            None => Ok(Some(text)),
        }
    }
}

// ---------------------------------------------------------------------------
// Argument parsing helpers.

/// `a:b:n` (n points from a to b inclusive) or a comma list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::OutOfRange(format!("cannot parse grid `{text}`"));
    let grid: Vec<f64> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        match n {
            0 => Vec::new(),
            1 => vec![a],
            _ => (0..n)
                .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    } else {
        text.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    check_grid(&grid, text)?;
    Ok(grid)
}

/// Comma list of positive `ε` values, returned from coarse to fine.
pub fn parse_eps_list(text: &str) -> Result<Vec<f64>> {
    let mut v = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| *x > 0.0 && x.is_finite())
                .ok_or_else(|| Error::OutOfRange(format!("bad epsilon `{s}` in `{text}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    v.sort_by(|a, b| b.total_cmp(a));
    v.dedup();
    if v.is_empty() {
        return Err(Error::OutOfRange("epsilon list is empty".into()));
    }
    Ok(v)
}

fn check_grid(grid: &[f64], name: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::OutOfRange(format!("grid `{name}` is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::OutOfRange(format!(
            "grid `{name}` must be finite and strictly increasing"
        )));
    }
    Ok(())
}

/// `edge:t` with the edge given by id.
pub fn parse_point(graph: &MetricGraph, text: &str) -> Result<Point> {
    let (id, t) = text
        .rsplit_once(':')
        .ok_or_else(|| Error::OutOfRange(format!("point `{text}` is not of the form edge:t")))?;
    let edge = graph
        .edge_index(id)
        .ok_or_else(|| Error::OutOfRange(format!("no edge `{id}`")))?;
    let t: f64 = t
        .parse()
        .map_err(|_| Error::OutOfRange(format!("bad coordinate in `{text}`")))?;
    Ok(Point { edge, t })
}

// ---------------------------------------------------------------------------
// Commands.

#[derive(Debug, Clone)]
pub struct ValidateOutcome {
    pub valid: bool,
    pub messages: Vec<String>,
}

/// Parses and checks a graph file; structural errors are returned as `Err`,
/// vertex data outside tolerance as `valid = false`.
pub fn cmd_validate(path: &Path, config: &RunConfig) -> Result<ValidateOutcome> {
    let g = graph::load_graph(path)?;
    let mut messages = Vec::new();
    let mut valid = true;
    for v in &g.vertices {
        let Some(cond) = v.condition() else { continue };
        let tol = config
            .tolerances
            .validation
            .unwrap_or(if cond.is_constant() {
                ANALYTIC_TOLERANCE
            } else {
                TABULATED_TOLERANCE
            });
        let samples = validation_samples(&g, cond);
        let report = vertex::validate_condition(cond, &samples, g.lambda0, g.lambda1, tol)?;
        if report.passed {
            messages.push(format!("vertex `{}`: ok", v.id));
        } else {
            valid = false;
            messages.push(format!(
                "vertex `{}`: unitarity {:.3e}, asymmetry {:.3e}, imaginary {:.3e}, orthogonality {:.3e} exceed {:.1e}",
                v.id, report.unitarity, report.asymmetry, report.imaginary, report.orthogonality, tol
            ));
        }
    }
    messages.push(format!(
        "{} vertices, {} edges ({} leads): {}",
        g.vertices.len(),
        g.edges.len(),
        g.lead_count(),
        if valid { "valid" } else { "invalid" }
    ));
    Ok(ValidateOutcome { valid, messages })
}

fn validation_samples(g: &MetricGraph, cond: &vertex::VertexCondition) -> Vec<f64> {
    match cond {
        vertex::VertexCondition::Tabulated(t) => t.lambdas.clone(),
        _ => {
            let (l0, l1) = (g.lambda0, g.lambda1);
            let mut s: Vec<f64> = (1..10).map(|i| l0 + (l1 - l0) * i as f64 / 10.0).collect();
            s.extend((1..4).map(|i| l0 - i as f64));
            s
        }
    }
}

pub fn cmd_spectrum(
    path: &Path,
    epsilon: f64,
    lmin: f64,
    lmax: f64,
    config: &RunConfig,
) -> Result<Csv> {
    let g = graph::load_graph(path)?;
    if !g.is_bounded() {
        return Err(Error::Unsupported(
            "graph has leads and no discrete spectrum to list; use smatrix".into(),
        ));
    }
    let mut csv = config.csv();
    csv.meta("epsilon", &num(epsilon));
    csv.meta("interval", &format!("{},{}", num(lmin), num(lmax)));
    csv.columns(&["lambda", "k", "multiplicity", "sigma_min"]);
    if lmin >= lmax {
        return Ok(csv);
    }
    let list = spectral::find_eigenvalues(&g, epsilon, (lmin, lmax), config.search())?;
    for e in &list.eigenvalues {
        csv.push(vec![
            num(e.lambda),
            num(e.k),
            e.multiplicity.to_string(),
            num(e.sigma_min),
        ]);
    }
    Ok(csv)
}

pub fn cmd_smatrix(path: &Path, epsilon: f64, lambdas: &[f64], config: &RunConfig) -> Result<Csv> {
    use rayon::prelude::*;
    check_grid(lambdas, "lambda-grid")?;
    let g = graph::load_graph(path)?;
    let leads = g.leads();
    if leads.is_empty() {
        return Err(Error::Unsupported(
            "graph has no leads; use spectrum".into(),
        ));
    }
    let mut csv = config.csv();
    csv.meta("epsilon", &num(epsilon));
    csv.meta(
        "leads",
        &leads
            .iter()
            .map(|&e| g.edges[e].id.clone())
            .collect::<Vec<_>>()
            .join(" "),
    );
    let mut cols = vec![
        "lambda".to_string(),
        "singular".into(),
        "unitarity".into(),
        "asymmetry".into(),
        "imaginary".into(),
        "orthogonality".into(),
    ];
    for j in 0..leads.len() {
        for p in 0..leads.len() {
            cols.push(format!("s{j}{p}_re"));
            cols.push(format!("s{j}{p}_im"));
        }
    }
    csv.columns = cols;
    let results: Vec<Result<Option<spectral::NetworkSMatrix>>> = lambdas
        .par_iter()
        .map(|&l| {
            let ctx = SpectralContext::new(&g, l, epsilon)?;
            match spectral::network_smatrix(&g, &ctx) {
                Ok(s) => Ok(Some(s)),
                Err(Error::SpectralPoint { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let n = leads.len();
    for (&l, r) in lambdas.iter().zip(results) {
        let mut row = vec![num(l)];
        match r? {
            Some(s) => {
                row.push("0".into());
                let rep = s.report;
                for x in [
                    rep.unitarity,
                    rep.asymmetry,
                    rep.imaginary,
                    rep.orthogonality,
                ] {
                    row.push(num(x));
                }
                for j in 0..n {
                    for p in 0..n {
                        row.push(num(s.matrix[(j, p)].re));
                        row.push(num(s.matrix[(j, p)].im));
                    }
                }
            }
            None => {
                log::warn!("lambda = {l} is a spectral point; row flagged");
                row.push("1".into());
                row.extend(std::iter::repeat(num(f64::NAN)).take(4 + 2 * n * n));
            }
        }
        csv.push(row);
    }
    Ok(csv)
}

pub fn cmd_green(
    path: &Path,
    epsilon: f64,
    lambda: f64,
    source: &str,
    targets: &[String],
    config: &RunConfig,
) -> Result<Csv> {
    let g = graph::load_graph(path)?;
    let src = parse_point(&g, source)?;
    let ctx = SpectralContext::new(&g, lambda, epsilon)?;
    let green = assembly::green_solve(&g, &ctx, src)?;
    let mut csv = config.csv();
    csv.meta("epsilon", &num(epsilon));
    csv.meta("lambda", &num(lambda));
    csv.meta("source", source);
    csv.columns(&["edge", "t", "re", "im"]);
    for t in targets {
        let p = parse_point(&g, t)?;
        let e = &g.edges[p.edge];
        if !(p.t >= 0.0 && p.t <= e.length) {
            return Err(Error::OutOfRange(format!("target `{t}` is off its edge")));
        }
        let v = green.value(p);
        csv.push(vec![e.id.clone(), num(p.t), num(v.re), num(v.im)]);
    }
    Ok(csv)
}

pub fn cmd_threshold(
    path: &Path,
    count: usize,
    eps_list: &[f64],
    config: &RunConfig,
) -> Result<Csv> {
    let g = graph::load_graph(path)?;
    let problem = ThresholdProblem::new(&g, config.threshold_options())?;
    let report = threshold::classify_limit(&problem);
    let mut csv = config.csv();
    csv.meta("limit", &format!("{:?}", report.label));
    for j in &report.junctions {
        csv.meta(
            &format!("vertex {}", j.vertex),
            &format!("degree {} k {}", j.degree, j.k),
        );
    }
    csv.columns(&["epsilon", "index", "mu", "deviation"]);
    if eps_list.is_empty() {
        let limits = threshold::limiting_eigenvalues(&problem, count, config.search())?;
        for (i, m) in limits.iter().enumerate() {
            csv.push(vec![num(0.0), i.to_string(), num(*m), num(0.0)]);
        }
        return Ok(csv);
    }
    let family = threshold::eps_family_with(
        &g,
        eps_list,
        count,
        config.search(),
        config.threshold_options(),
    )?;
    for (i, m) in family.limits.iter().enumerate() {
        csv.push(vec![num(0.0), i.to_string(), num(*m), num(0.0)]);
    }
    for row in &family.rows {
        for (i, (m, l)) in row.mu.iter().zip(&family.limits).enumerate() {
            csv.push(vec![
                num(row.epsilon),
                i.to_string(),
                num(*m),
                num((m - l).abs()),
            ]);
        }
    }
    if eps_list.len() >= 2 {
        let orders: Vec<String> = family
            .fitted_orders()
            .iter()
            .map(|o| format!("{o:.4}"))
            .collect();
        csv.meta("fitted_orders", &orders.join(" "));
    }
    Ok(csv)
}

/// Tabulates a junction and writes the table to `table_out`; returns the
/// per-node diagnostics.
pub fn cmd_junction(
    geometry: &Path,
    lambdas: &[f64],
    h: f64,
    n_modes: usize,
    table_out: &Path,
    config: &RunConfig,
) -> Result<Csv> {
    check_grid(lambdas, "lambda-grid")?;
    let geom = JunctionGeometry::load(geometry)?;
    let mut opts = JunctionOptions::new(h);
    opts.n_modes = n_modes;
    let tab = continuum::tabulate_junction_with(&geom, lambdas, &opts)?;
    tab.write(table_out)?;
    let mut csv = config.csv();
    csv.meta("h", &num(h));
    csv.meta("modes", &n_modes.to_string());
    csv.meta("leads", &tab.leads.join(" "));
    csv.meta("table", &table_out.display().to_string());
    csv.columns(&["lambda", "unitarity", "asymmetry"]);
    for ((l, u), a) in lambdas.iter().zip(&tab.unitarity).zip(&tab.asymmetry) {
        csv.push(vec![num(*l), num(*u), num(*a)]);
    }
    Ok(csv)
}

pub fn cmd_converge(
    geometry: &Path,
    eps_list: &[f64],
    points_per_width: usize,
    count: usize,
    config: &RunConfig,
) -> Result<Csv> {
    let geom = JunctionGeometry::load(geometry)?;
    let opts = ConvergenceOptions {
        eps_list: eps_list.to_vec(),
        points_per_width,
        count,
        ..ConvergenceOptions::default()
    };
    let report = continuum::convergence_study(&geom, &opts)?;
    let mut csv = config.csv();
    csv.meta("points_per_width", &points_per_width.to_string());
    csv.meta(
        "grid_thresholds",
        &format!("{},{}", num(report.thresholds.0), num(report.thresholds.1)),
    );
    csv.meta("graph_search_tolerance", &num(report.search_tolerance));
    csv.meta(
        "strictly_decreasing",
        &report.strictly_decreasing().to_string(),
    );
    csv.columns(&[
        "epsilon",
        "index",
        "lambda_2d",
        "lambda_graph",
        "distance",
        "residual",
    ]);
    for r in &report.rows {
        csv.push(vec![
            num(r.epsilon),
            r.index.to_string(),
            num(r.lambda_2d),
            num(r.lambda_graph),
            num(r.distance),
            num(r.residual),
        ]);
    }
    Ok(csv)
}
