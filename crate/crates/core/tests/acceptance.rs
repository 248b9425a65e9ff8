//! Acceptance checks. Each test prints one `criterion N: PASS|FAIL` line
//! with the measured quantities, then asserts.
//!
//! Run with `cargo test --test acceptance -- --nocapture --test-threads 1`
//! to see the lines in order.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use faer::{c64, Mat};
use fibernet::assembly::{self, green_solve, Point, Side, SpectralContext};
use fibernet::continuum::{
    convergence_study, fit_mode0, junction_smatrix, mode0_profile, scaling_invariance_check,
    straight_channel_order, ConvergenceOptions, JunctionGeometry, JunctionOptions,
};
use fibernet::graph::{segment, spider, star, Edge, Vertex, VertexKind};
use fibernet::linalg::{self, CMat};
use fibernet::spectral::{self, SearchOptions};
use fibernet::threshold::{self, classify_limit, LimitLabel, ThresholdProblem};
use fibernet::vertex::{self, kirchhoff_matrix, Table, ThresholdOptions};
use fibernet::{FreeEndBc, MetricGraph, VertexCondition};
use rand::Rng;

use common::{LAMBDA0, LAMBDA1};

fn report(n: usize, pass: bool, detail: String) {
    println!(
        "criterion {n:>2}: {} {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} failed: {detail}");
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

#[test]
fn criterion_01_separable_oracle() {
    let start = Instant::now();
    let eps = 0.1;
    let g = segment(LAMBDA0, LAMBDA1, 1.0, FreeEndBc::Dirichlet, FreeEndBc::Dirichlet).unwrap();
    let top = LAMBDA0 + eps * eps * PI * PI * 30.0;
    let eigs = spectral::find_eigenvalues(&g, eps, (LAMBDA0, top), SearchOptions::default())
        .unwrap()
        .flattened();
    let elapsed = start.elapsed();
    let mut worst = 0.0f64;
    for m in 1..=5 {
        let exact = LAMBDA0 + eps * eps * PI * PI * (m * m) as f64;
        let got = eigs.get(m - 1).copied().unwrap_or(f64::NAN);
        worst = worst.max(((got - exact) / exact).abs());
    }
    let pass = eigs.len() >= 5 && worst <= 1e-10 && elapsed < Duration::from_secs(1);
    report(
        1,
        pass,
        format!("max rel error {worst:.2e} (tol 1e-10), {:.3} s (limit 1 s)", secs(elapsed)),
    );
}

#[test]
fn criterion_02_kirchhoff_spider() {
    let g = spider(LAMBDA0, LAMBDA1, VertexCondition::Kirchhoff { degree: 3 }).unwrap();
    let t = vertex::to_complex(&kirchhoff_matrix(3).unwrap());
    let mut worst = 0.0f64;
    for i in 0..20 {
        let lambda = LAMBDA0 + (LAMBDA1 - LAMBDA0) * (i as f64 + 0.5) / 20.0;
        for eps in [0.05, 0.3] {
            let ctx = SpectralContext::new(&g, lambda, eps).unwrap();
            let s = spectral::network_smatrix(&g, &ctx).unwrap();
            worst = worst.max(common::max_entry_diff(&s.matrix, &t));
        }
    }
    report(
        2,
        worst <= 1e-12,
        format!("max entry deviation {worst:.2e} (tol 1e-12) over 20 lambdas"),
    );
}

#[test]
fn criterion_03_smatrix_properties() {
    let start = Instant::now();
    let mut rng = common::rng(3);
    let (mut unit, mut asym, mut imag) = (0.0f64, 0.0f64, 0.0f64);
    let mut below = 0;
    for n in 0..50 {
        let real = n % 2 == 0;
        let g = common::random_graph(&mut rng, true, real);
        let eps = rng.gen_range(0.05..0.5);
        // above threshold, off the graph spectrum
        let mut hits = 0;
        while hits < 4 {
            let lambda = rng.gen_range(LAMBDA0..LAMBDA1);
            let Ok(ctx) = SpectralContext::new(&g, lambda, eps) else {
                continue;
            };
            let Ok(s) = spectral::network_smatrix(&g, &ctx) else {
                continue;
            };
            unit = unit.max(s.report.unitarity);
            asym = asym.max(s.report.asymmetry);
            hits += 1;
        }
        // below threshold only real data is physical
        if real {
            for _ in 0..4 {
                let lambda = LAMBDA0 - rng.gen_range(0.01..5.0);
                let ctx = SpectralContext::new(&g, lambda, eps).unwrap();
                let s = spectral::network_smatrix(&g, &ctx).unwrap();
                imag = imag.max(s.report.imaginary);
                below += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = unit <= 1e-10 && asym <= 1e-10 && imag <= 1e-10 && elapsed < Duration::from_secs(30);
    report(
        3,
        pass,
        format!(
            "50 graphs: ||SS*-I|| {unit:.2e}, ||S-S^T|| {asym:.2e}, ||Im S|| {imag:.2e} over {below} sub-threshold samples (tol 1e-10), {:.2} s (limit 30 s)",
            secs(elapsed)
        ),
    );
}

/// Random interior point of a random edge; leads are sampled on `[0, 3]`.
fn random_point(rng: &mut rand_chacha::ChaCha8Rng, g: &MetricGraph) -> Point {
    let edge = rng.gen_range(0..g.edge_count());
    let l = g.edges[edge].length.min(3.0);
    Point {
        edge,
        t: rng.gen_range(0.05..0.95) * l,
    }
}

#[test]
fn criterion_04_green_symmetry_and_defect() {
    let mut rng = common::rng(4);
    let (mut sym, mut defect, mut jump) = (0.0f64, 0.0f64, 0.0f64);
    let mut cases = 0;
    while cases < 20 {
        let g = common::random_graph(&mut rng, cases % 2 == 0, cases % 4 < 2);
        let eps = rng.gen_range(0.1..0.5);
        let lambda = rng.gen_range(LAMBDA0..LAMBDA1);
        let xi = random_point(&mut rng, &g);
        let gamma = random_point(&mut rng, &g);
        if xi.edge == gamma.edge && (xi.t - gamma.t).abs() < 1e-3 {
            continue;
        }
        let Ok(ctx) = SpectralContext::new(&g, lambda, eps) else {
            continue;
        };
        if assembly::singularity_proximity(&g, &ctx).unwrap() < 1e-6 {
            continue;
        }
        let (Ok(gx), Ok(gg)) = (green_solve(&g, &ctx, xi), green_solve(&g, &ctx, gamma)) else {
            continue;
        };
        cases += 1;
        let k = ctx.k;

        // scale: largest |g| over a sample of every edge
        let mut scale = 0.0f64;
        for e in 0..g.edge_count() {
            let l = g.edges[e].length.min(3.0);
            for i in 0..=40 {
                let p = Point { edge: e, t: l * i as f64 / 40.0 };
                scale = scale.max(gx.value(p).norm()).max(gg.value(p).norm());
            }
        }
        sym = sym.max((gx.value(gamma) - gg.value(xi)).norm() / scale);

        // exact propagator of ς'' + k²ς = 0 between points on one side of the source
        for e in 0..g.edge_count() {
            let l = g.edges[e].length.min(3.0);
            let pieces: Vec<(f64, f64)> = if e == xi.edge {
                vec![(0.0, xi.t), (xi.t, l)]
            } else {
                vec![(0.0, l)]
            };
            for (a, b) in pieces {
                let side = |t: f64| if e == xi.edge && t <= xi.t { Side::Below } else { Side::Above };
                let (t1, t2) = (a + 0.1 * (b - a), b - 0.1 * (b - a));
                let p1 = Point { edge: e, t: t1 };
                let p2 = Point { edge: e, t: t2 };
                let side1 = if t2 <= xi.t || e != xi.edge { side(t1) } else { Side::Above };
                let (v1, d1) = (gx.value(p1), gx.derivative(p1, side1));
                let dt = t2 - t1;
                let predicted = v1 * (k * dt).cos() + d1 * (k * dt).sin() / k;
                defect = defect.max((predicted - gx.value(p2)).norm() / scale);
            }
        }
        let e2 = eps * eps;
        let dg = gx.derivative(xi, Side::Above) - gx.derivative(xi, Side::Below);
        jump = jump.max((dg * e2 + 1.0).norm());
    }
    let pass = sym <= 1e-10 && defect <= 1e-8 && jump <= 1e-8;
    report(
        4,
        pass,
        format!(
            "20 cases: symmetry {sym:.2e} (tol 1e-10), ODE defect {defect:.2e} (tol 1e-8), jump {jump:.2e} (tol 1e-8)"
        ),
    );
}

/// Bounded and open graphs with real vertex data.
fn test_graphs() -> Vec<(String, MetricGraph)> {
    let k = |d| VertexCondition::Kirchhoff { degree: d };
    let mut out = vec![
        (
            "dirichlet edge".to_string(),
            segment(LAMBDA0, LAMBDA1, 1.0, FreeEndBc::Dirichlet, FreeEndBc::Dirichlet).unwrap(),
        ),
        (
            "neumann edge".into(),
            segment(LAMBDA0, LAMBDA1, 1.3, FreeEndBc::Neumann, FreeEndBc::Neumann).unwrap(),
        ),
        (
            "robin edge".into(),
            segment(LAMBDA0, LAMBDA1, 0.7, FreeEndBc::Robin(0.5), FreeEndBc::Dirichlet).unwrap(),
        ),
        (
            "kirchhoff star".into(),
            star(LAMBDA0, LAMBDA1, k(3), &[1.0, 0.6, 1.4], FreeEndBc::Neumann).unwrap(),
        ),
        ("kirchhoff spider".into(), spider(LAMBDA0, LAMBDA1, k(4)).unwrap()),
    ];
    let mut rng = common::rng(5);
    for i in 0..10 {
        out.push((format!("random graph {i}"), common::random_graph(&mut rng, i % 2 == 0, true)));
    }
    out
}

#[test]
fn criterion_05_below_threshold_nonvanishing() {
    let mut worst = f64::INFINITY;
    let mut at = String::new();
    let graphs = test_graphs();
    for (name, g) in &graphs {
        for eps in [0.1, 0.4] {
            for i in 0..500 {
                let lambda = LAMBDA0 - 5.0 + (5.0 - 0.01) * (i as f64 + 0.5) / 500.0;
                let ctx = SpectralContext::new(g, lambda, eps).unwrap();
                let sys = assembly::build_system(g, &ctx).unwrap();
                let sigma = sys.singular_values().unwrap().last().copied().unwrap();
                if sigma < worst {
                    worst = sigma;
                    at = format!("{name}, eps {eps}, lambda {lambda:.4}");
                }
            }
        }
    }
    report(
        5,
        worst > 1e-6,
        format!("{} graphs: min sigma_min {worst:.3e} (> 1e-6) at {at}", graphs.len()),
    );
}

#[test]
fn criterion_06_scattering_green() {
    let mut rng = common::rng(6);
    let mut worst = 0.0f64;
    let mut pairs = 0;
    while pairs < 20 {
        let g = common::random_spider(&mut rng);
        let eps = rng.gen_range(0.05..0.5);
        let lambda = rng.gen_range(LAMBDA0..LAMBDA1);
        let ctx = SpectralContext::new(&g, lambda, eps).unwrap();
        let source = Point {
            edge: rng.gen_range(0..g.edge_count()),
            t: rng.gen_range(0.1..2.0),
        };
        let target = Point {
            edge: rng.gen_range(0..g.edge_count()),
            t: rng.gen_range(0.0..3.0),
        };
        let direct = assembly::green_function(&g, &ctx, source, target).unwrap();
        let via = spectral::green_via_scattering(&g, &ctx, source, target).unwrap();
        worst = worst.max((direct - via.value).norm() / direct.norm());
        pairs += 1;
    }
    report(6, worst <= 1e-10, format!("20 pairs: max rel difference {worst:.2e} (tol 1e-10)"));
}

/// lead0 - J1 - edge of length `l` - J2 - lead1 with constant 2x2 data.
fn chain(t1: &CMat, t2: &CMat, l: f64) -> MetricGraph {
    let vertices = vec![
        Vertex {
            id: "J1".into(),
            kind: VertexKind::Junction(VertexCondition::Constant(t1.clone())),
            order: vec![0, 1],
        },
        Vertex {
            id: "J2".into(),
            kind: VertexKind::Junction(VertexCondition::Constant(t2.clone())),
            order: vec![1, 2],
        },
    ];
    let edges = vec![
        Edge { id: "in".into(), start: 0, end: None, length: f64::INFINITY },
        Edge { id: "mid".into(), start: 0, end: Some(1), length: l },
        Edge { id: "out".into(), start: 1, end: None, length: f64::INFINITY },
    ];
    MetricGraph::new(LAMBDA0, LAMBDA1, vertices, edges).unwrap()
}

/// Star product of two two-ports joined through a line with phase `phi`.
/// Port 2 of `a` faces port 1 of `b`.
fn redheffer(a: &CMat, b: &CMat, phi: c64) -> CMat {
    let one = c64::new(1.0, 0.0);
    let den = one - a[(1, 1)] * phi * b[(0, 0)] * phi;
    let mut s = Mat::<c64>::zeros(2, 2);
    s[(0, 0)] = a[(0, 0)] + a[(0, 1)] * phi * b[(0, 0)] * phi * a[(1, 0)] / den;
    s[(1, 0)] = b[(1, 0)] * phi * a[(1, 0)] / den;
    s[(0, 1)] = a[(0, 1)] * phi * b[(0, 1)] / den;
    s[(1, 1)] = b[(1, 1)] + b[(1, 0)] * phi * a[(1, 1)] * phi * b[(0, 1)] / den;
    s
}

#[test]
fn criterion_07_redheffer_composition() {
    let mut rng = common::rng(7);
    let t1 = common::random_vertex_matrix(&mut rng, 2, false);
    let t2 = common::random_vertex_matrix(&mut rng, 2, false);
    let l = 0.83;
    let g = chain(&t1, &t2, l);
    let eps = 0.2;
    let mut worst = 0.0f64;
    for i in 0..10 {
        let lambda = LAMBDA0 + (LAMBDA1 - LAMBDA0) * (i as f64 + 0.37) / 10.0;
        let ctx = SpectralContext::new(&g, lambda, eps).unwrap();
        let s = spectral::network_smatrix(&g, &ctx).unwrap();
        let phi = (ctx.k * c64::new(0.0, l)).exp();
        let oracle = redheffer(&t1, &t2, phi);
        worst = worst.max(common::max_entry_diff(&s.matrix, &oracle));
    }
    report(7, worst <= 1e-10, format!("10 lambdas: max entry deviation {worst:.2e} (tol 1e-10)"));
}

#[test]
fn criterion_08_threshold_classification() {
    let opts = ThresholdOptions::default();
    let mut ks = Vec::new();
    for d in 2..=6 {
        let dk = vertex::threshold_decomposition(&VertexCondition::Kirchhoff { degree: d }, LAMBDA0, opts)
            .unwrap();
        let mut minus = linalg::identity(d);
        for i in 0..d {
            minus[(i, i)] = c64::new(-1.0, 0.0);
        }
        let dd = vertex::decompose_threshold_matrix(&minus, opts).unwrap();
        ks.push((d, dk.k, dd.k));
    }
    let ks_ok = ks.iter().all(|&(d, a, b)| a == d - 1 && b == d);

    let minus3 = {
        let mut m = linalg::identity(3);
        for i in 0..3 {
            m[(i, i)] = c64::new(-1.0, 0.0);
        }
        m
    };
    let g = star(LAMBDA0, LAMBDA1, VertexCondition::Constant(minus3), &[1.0; 3], FreeEndBc::Dirichlet)
        .unwrap();
    let problem = ThresholdProblem::new(&g, opts).unwrap();
    let mu = threshold::limiting_eigenvalues(&problem, 9, SearchOptions::default()).unwrap();
    let mut worst = 0.0f64;
    for (i, v) in mu.iter().enumerate() {
        let m = (i / 3 + 1) as f64;
        let exact = PI * PI * m * m;
        worst = worst.max((v - exact).abs() / exact);
    }
    let label = classify_limit(&problem).label;
    let pass = ks_ok && mu.len() == 9 && worst <= 1e-10 && label == LimitLabel::Dirichlet;
    report(
        8,
        pass,
        format!("(d, k kirchhoff, k -I) = {ks:?}; Dirichlet 3-star first 9 limits rel error {worst:.2e}, label {label:?}"),
    );
}

/// `Q diag(e^{iθ_j(λ)}) Qᵀ` with `θ_j` linear in `λ`, equal to the Kirchhoff
/// matrix at `λ0`, tabulated on a fine grid.
fn linear_family_table() -> Table {
    let s = 1.0 / 3f64.sqrt();
    let a = 1.0 / 2f64.sqrt();
    let b = 1.0 / 6f64.sqrt();
    let q = Mat::from_fn(3, 3, |i, j| {
        [[s, a, b], [s, -a, b], [s, 0.0, -2.0 * b]][i][j]
    });
    let theta0 = [0.0, PI, PI];
    let slope = [0.02, -0.015, 0.01];
    let lambdas: Vec<f64> = (0..=400).map(|i| LAMBDA0 + 0.01 * i as f64).collect();
    let matrices = lambdas
        .iter()
        .map(|l| {
            let ph: Vec<f64> = (0..3).map(|j| theta0[j] + slope[j] * (l - LAMBDA0)).collect();
            common::symmetric_unitary(&q, &ph)
        })
        .collect();
    Table::new(3, LAMBDA0, lambdas, matrices).unwrap()
}

#[test]
fn criterion_09_eps_family_order() {
    let start = Instant::now();
    let g = star(
        LAMBDA0,
        LAMBDA1,
        VertexCondition::Tabulated(linear_family_table()),
        &[1.0, 1.3, 0.7],
        FreeEndBc::Dirichlet,
    )
    .unwrap();
    let fam = threshold::eps_family(&g, &[0.1, 0.05, 0.025], 3, SearchOptions::default()).unwrap();
    let orders = fam.fitted_orders();
    let elapsed = start.elapsed();
    let pass = orders.len() == 3
        && orders.iter().all(|&o| o >= 0.9)
        && elapsed < Duration::from_secs(10);
    report(
        9,
        pass,
        format!(
            "limits {:?}, deviations {:?}, fitted orders {orders:?} (>= 0.9), {:.2} s (limit 10 s)",
            fam.limits,
            fam.deviations(),
            secs(elapsed)
        ),
    );
}

fn t_junction() -> JunctionGeometry {
    JunctionGeometry::t_junction(2.0).unwrap()
}

#[test]
fn criterion_10_continuum_unitarity() {
    let start = Instant::now();
    let g = t_junction();
    let lambda = 2.5 * PI * PI;
    let coarse = junction_smatrix(&g, lambda, 1.0 / 64.0, 8).unwrap();
    let fine = junction_smatrix(&g, lambda, 1.0 / 128.0, 8).unwrap();
    let elapsed = start.elapsed();
    // lead "1" is the first open lead; its column is the incident wave
    let flux = |m: &CMat| (0..m.nrows()).map(|j| m[(j, 0)].norm_sqr()).sum::<f64>();
    let (fc, ff) = (flux(&coarse.matrix), flux(&fine.matrix));
    let recip = fine.diagnostics.asymmetry;
    let pass = (fc - 1.0).abs() <= 1e-3
        && (ff - 1.0).abs() <= 1e-4
        && recip <= 1e-4
        && elapsed < Duration::from_secs(120);
    report(
        10,
        pass,
        format!(
            "flux-1 {:.2e} at h=1/64 (tol 1e-3), {:.2e} at h=1/128 (tol 1e-4), ||T-T^T|| {recip:.2e} (tol 1e-4), {:.1} s (limit 120 s)",
            fc - 1.0,
            ff - 1.0,
            secs(elapsed)
        ),
    );
}

#[test]
fn criterion_11_scale_invariance() {
    let g = t_junction();
    let lambda = 2.5 * PI * PI;
    // the unscaled half-width solve has 128 cells across its width
    let mut opts = JunctionOptions::new(1.0 / 256.0);
    opts.keep_fields = false;
    let r = scaling_invariance_check(&g, lambda, 0.5, &opts).unwrap();
    let pass = r.grid_exact <= 1e-10 && r.unscaled <= 1e-3;
    report(
        11,
        pass,
        format!(
            "s = 1/2, reference h = 1/256: grid-exact {:.2e} (tol 1e-10), unscaled {:.2e} (tol 1e-3)",
            r.grid_exact, r.unscaled
        ),
    );
}

#[test]
fn criterion_12_convergence_study() {
    let start = Instant::now();
    let network = JunctionGeometry::l_bend(fibernet::continuum::LeadEnd::Closed(1.0)).unwrap();
    let report12 = convergence_study(&network, &ConvergenceOptions::default()).unwrap();
    let rich = straight_channel_order(0.1, 10, 3).unwrap();
    let elapsed = start.elapsed();
    let distances: Vec<Vec<f64>> = (0..3).map(|i| report12.distances(i)).collect();
    let min_order = rich.orders.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = report12.strictly_decreasing()
        && distances.iter().all(|d| d.len() == 3)
        && min_order >= 1.8
        && elapsed < Duration::from_secs(900);
    report(
        12,
        pass,
        format!(
            "distances per eigenvalue over eps 0.2/0.1/0.05 {}, strictly decreasing {}, Richardson orders {:.3?} (>= 1.8), {:.1} s (limit 900 s)",
            distances
                .iter()
                .map(|d| d.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join("/"))
                .collect::<Vec<_>>()
                .join(", "),
            report12.strictly_decreasing(),
            rich.orders,
            secs(elapsed)
        ),
    );
}

#[test]
fn criterion_13_mode0_asymptotics() {
    let g = t_junction();
    let lambda = 2.5 * PI * PI;
    let h = 1.0 / 128.0;
    let sol = junction_smatrix(&g, lambda, h, 8).unwrap();
    let (_, mu1) = sol.diagnostics.discrete_thresholds;
    let bound = -0.9 * (4.0 * PI * PI - lambda).sqrt();
    let (mut fit_err, mut coef_err, mut worst_slope) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    for (p, field) in sol.fields.iter().enumerate() {
        for (j, id) in sol.leads.iter().enumerate() {
            let profile = mode0_profile(field, id).unwrap();
            // one width from the mouth
            let fit = fit_mode0(&profile, 1.0).unwrap();
            fit_err = fit_err.max(fit.max_error);
            let delta = if j == p { 1.0 } else { 0.0 };
            coef_err = coef_err
                .max((fit.incoming - delta).norm())
                .max((fit.outgoing - sol.matrix[(j, p)]).norm());
            worst_slope = worst_slope.max(profile.log_residual_slope(0.5, 2.0).unwrap());
        }
    }
    let pass = fit_err <= 1e-6 && coef_err <= 1e-6 && worst_slope <= bound;
    report(
        13,
        pass,
        format!(
            "h = 1/128: fit residual {fit_err:.2e} (tol 1e-6), coefficient mismatch {coef_err:.2e}, worst log-slope {worst_slope:.3} (<= {bound:.3}; discrete mu1 {mu1:.4})"
        ),
    );
}
