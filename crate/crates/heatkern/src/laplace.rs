//! Laplace-method engine for integrals of the form
//! (4 pi t)^{-N/2} int e^{-phi/2t} a(t,x) dx with a non-degenerate critical
//! manifold, plus its application to piecewise-geodesic path spaces: the
//! repeated-convolution kernel is such an integral, and its short-time
//! coefficients at the cut locus come out of the same machinery.

use crate::convolution::Partition;
use crate::error::{Error, Result};
use crate::fit::ls_line;
use crate::geometry::{ManifoldModel, MinimizingGeodesics, Point, QuadratureGrid};
use crate::kernels::{
    cutoff, euclidean_kernel_r, fmt17, heat_coefficient, CutoffProfile,
    OperatorSpec,
};
use crate::quadrature::gauss_legendre_cached;
use nalgebra::DMatrix;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

type RealFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type AmplitudeFn = dyn Fn(f64, &[f64]) -> f64 + Send + Sync;

/// Axis-aligned integration domain in R^N.
#[derive(Debug, Clone)]
pub struct RectDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl RectDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert!(lo.iter().zip(&hi).all(|(a, b)| a < b));
        Self { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

/// Integrand data: nonnegative phase, amplitude a(t, x), optional measure
/// density (for curvilinear charts such as polar coordinates).
pub struct IntegrandSpec {
    pub domain: RectDomain,
    pub phase: Arc<RealFn>,
    pub amplitude: Arc<AmplitudeFn>,
    pub measure: Option<Arc<RealFn>>,
}

impl IntegrandSpec {
    pub fn new<P, A>(domain: RectDomain, phase: P, amplitude: A) -> Self
    where
        P: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        A: Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            domain,
            phase: Arc::new(phase),
            amplitude: Arc::new(amplitude),
            measure: None,
        }
    }

    pub fn with_measure<M>(mut self, measure: M) -> Self
    where
        M: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        self.measure = Some(Arc::new(measure));
        self
    }

    fn density(&self, x: &[f64]) -> f64 {
        self.measure.as_ref().map_or(1.0, |m| m(x))
    }
}

/// Sampled critical set: points on Gamma with quadrature weights for the
/// induced measure. A zero-dimensional component is one point of weight 1.
#[derive(Debug, Clone)]
pub struct CriticalManifold {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl CriticalManifold {
    pub fn point(p: Vec<f64>) -> Self {
        Self { dim: 0, points: vec![p], weights: vec![1.0] }
    }

    /// Closed curve sampled at m equispaced parameter values; weights are
    /// speed * 2 pi / m, so they integrate the induced arc measure.
    pub fn closed_curve<F>(m: usize, chart: F) -> Self
    where
        F: Fn(f64) -> Vec<f64>,
    {
        let mut points = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        let h = 1e-6;
        for k in 0..m {
            let psi = 2.0 * PI * k as f64 / m as f64;
            let p = chart(psi);
            let plus = chart(psi + h);
            let minus = chart(psi - h);
            let speed = plus
                .iter()
                .zip(&minus)
                .map(|(a, b)| ((a - b) / (2.0 * h)).powi(2))
                .sum::<f64>()
                .sqrt();
            points.push(p);
            weights.push(speed * 2.0 * PI / m as f64);
        }
        Self { dim: 1, points, weights }
    }

    /// Check phi = 0 and grad phi = 0 along the samples.
    pub fn validate(&self, spec: &IntegrandSpec) -> Result<()> {
        for p in &self.points {
            let phi = (spec.phase)(p);
            if phi.abs() > 1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "phase is {phi} on the declared critical set"
                )));
            }
            let h = 1e-6;
            for i in 0..p.len() {
                let mut a = p.clone();
                let mut b = p.clone();
                a[i] += h;
                b[i] -= h;
                let g = ((spec.phase)(&a) - (spec.phase)(&b)) / (2.0 * h);
                if g.abs() > 1e-8 * (1.0 + phi.abs()) {
                    return Err(Error::InvalidArgument(format!(
                        "phase gradient component {g} does not vanish on the critical set"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Tensor Gauss-Legendre quadrature of the full integral, node count doubled
/// until the relative change drops below 1e-10.
pub fn brute_force_integral(spec: &IntegrandSpec, t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::NonpositiveTime(t));
    }
    let dim = spec.domain.dim();
    let cap = match dim {
        1 => 8192,
        2 => 4096,
        _ => 256,
    };
    let eval = |n: usize| -> f64 {
        let (xs, ws) = gauss_legendre_cached(n);
        let mut scaled: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(dim);
        for k in 0..dim {
            let (lo, hi) = (spec.domain.lo[k], spec.domain.hi[k]);
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            scaled.push((
                xs.iter().map(|&x| mid + half * x).collect(),
                ws.iter().map(|&w| half * w).collect(),
            ));
        }
        let mut point = vec![0.0; dim];
        let mut total = 0.0;
        let mut idx = vec![0usize; dim];
        'outer: loop {
            let mut w = 1.0;
            for k in 0..dim {
                point[k] = scaled[k].0[idx[k]];
                w *= scaled[k].1[idx[k]];
            }
            let phi = (spec.phase)(&point);
            total += w
                * (-phi / (2.0 * t)).exp()
                * (spec.amplitude)(t, &point)
                * spec.density(&point);
            for k in (0..dim).rev() {
                idx[k] += 1;
                if idx[k] < n {
                    continue 'outer;
                }
                idx[k] = 0;
                if k == 0 {
                    break 'outer;
                }
            }
        }
        (4.0 * PI * t).powf(-(dim as f64) / 2.0) * total
    };
    let mut n = 16;
    let mut prev = eval(n);
    loop {
        n *= 2;
        let cur = eval(n);
        let change = (cur - prev).abs();
        if change <= 1e-10 * cur.abs().max(1e-300) {
            return Ok(cur);
        }
        if n >= cap {
            return Err(Error::QuadratureNotConverged { last_change: change });
        }
        prev = cur;
    }
}

/// Central-difference Hessian with per-coordinate steps; one Richardson
/// extrapolation level when `richardson` is set.
fn fd_hessian<F: Fn(&[f64]) -> f64>(
    f: &F,
    x: &[f64],
    steps: &[f64],
    richardson: bool,
) -> DMatrix<f64> {
    let assemble = |scale: f64| -> DMatrix<f64> {
        let d = x.len();
        let mut h = DMatrix::zeros(d, d);
        let f0 = f(x);
        for i in 0..d {
            let hi = steps[i] * scale;
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += hi;
            xm[i] -= hi;
            h[(i, i)] = (f(&xp) - 2.0 * f0 + f(&xm)) / (hi * hi);
            for j in (i + 1)..d {
                let hj = steps[j] * scale;
                let mut pp = x.to_vec();
                let mut pm = x.to_vec();
                let mut mp = x.to_vec();
                let mut mm = x.to_vec();
                pp[i] += hi;
                pp[j] += hj;
                pm[i] += hi;
                pm[j] -= hj;
                mp[i] -= hi;
                mp[j] += hj;
                mm[i] -= hi;
                mm[j] -= hj;
                let val = (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * hi * hj);
                h[(i, j)] = val;
                h[(j, i)] = val;
            }
        }
        h
    };
    if richardson {
        let coarse = assemble(1.0);
        let fine = assemble(0.5);
        (fine * 4.0 - coarse) / 3.0
    } else {
        assemble(1.0)
    }
}

const ZERO_MODE_REL_THRESHOLD: f64 = 1e-6;

/// Split the Hessian spectrum into zero modes (tangent directions) and the
/// normal part; returns the determinant of the normal part.
fn normal_determinant(h: &DMatrix<f64>, expected_zero: usize) -> Result<f64> {
    let eig = h.clone().symmetric_eigen();
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
    let max_abs = ev.last().map(|v| v.abs()).unwrap_or(0.0);
    if max_abs == 0.0 {
        return Err(Error::DegenerateHessian { found: ev.len(), expected: expected_zero });
    }
    let zero_count = ev
        .iter()
        .filter(|v| v.abs() < ZERO_MODE_REL_THRESHOLD * max_abs)
        .count();
    if zero_count != expected_zero {
        return Err(Error::DegenerateHessian { found: zero_count, expected: expected_zero });
    }
    let mut det = 1.0;
    for &v in &ev[expected_zero..] {
        if v <= 0.0 {
            return Err(Error::NegativeEigenvalue(v));
        }
        det *= v;
    }
    Ok(det)
}

/// Normal Hessian data at a critical point, kept for the first-order term.
struct HessianSplit {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<f64>>,
    det: f64,
}

fn normal_split(h: &DMatrix<f64>, expected_zero: usize) -> Result<HessianSplit> {
    let det = normal_determinant(h, expected_zero)?;
    let eig = h.clone().symmetric_eigen();
    let d = h.nrows();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .abs()
            .partial_cmp(&eig.eigenvalues[b].abs())
            .unwrap()
    });
    let mut eigenvalues = Vec::new();
    let mut eigenvectors = Vec::new();
    for &idx in order.iter().skip(expected_zero) {
        eigenvalues.push(eig.eigenvalues[idx]);
        eigenvectors.push(eig.eigenvectors.column(idx).iter().copied().collect());
    }
    Ok(HessianSplit { eigenvalues, eigenvectors, det })
}

/// Leading Laplace coefficient: int_Gamma a(0,x) rho(x) / det^{1/2}.
pub fn laplace_leading_term(spec: &IntegrandSpec, gamma: &CriticalManifold) -> Result<f64> {
    let dim = spec.domain.dim();
    let steps: Vec<f64> = (0..dim)
        .map(|k| 1e-4 * (spec.domain.hi[k] - spec.domain.lo[k]))
        .collect();
    let mut total = 0.0;
    for (p, &w) in gamma.points.iter().zip(&gamma.weights) {
        let h = fd_hessian(&|v: &[f64]| (spec.phase)(v), p, &steps, false);
        let det = normal_determinant(&h, gamma.dim)?;
        total += w * (spec.amplitude)(0.0, p) * spec.density(p) / det.sqrt();
    }
    Ok(total)
}

/// First-order Laplace coefficient, built from the normal-Hessian Laplacian
/// applied to the amplitude plus the amplitude's t-derivative. The chart
/// correction of the exact normal-form diffeomorphism is not computable
/// numerically, so the chart is taken as the identity; the report pairs this
/// value with a brute-force fit rather than asserting it.
pub fn laplace_first_order(spec: &IntegrandSpec, gamma: &CriticalManifold) -> Result<f64> {
    let dim = spec.domain.dim();
    let steps: Vec<f64> = (0..dim)
        .map(|k| 1e-4 * (spec.domain.hi[k] - spec.domain.lo[k]))
        .collect();
    let mut total = 0.0;
    for (p, &w) in gamma.points.iter().zip(&gamma.weights) {
        let h = fd_hessian(&|v: &[f64]| (spec.phase)(v), p, &steps, false);
        let split = normal_split(&h, gamma.dim)?;
        // <Q^{-1}, D^2 a> over the normal directions
        let a0 = |v: &[f64]| (spec.amplitude)(0.0, v) * spec.density(v);
        let mut q_lap = 0.0;
        for (lam, dir) in split.eigenvalues.iter().zip(&split.eigenvectors) {
            let hstep = 1e-4;
            let mut vp = p.clone();
            let mut vm = p.clone();
            for k in 0..dim {
                vp[k] += hstep * dir[k];
                vm[k] -= hstep * dir[k];
            }
            let second = (a0(&vp) - 2.0 * a0(p) + a0(&vm)) / (hstep * hstep);
            q_lap += second / lam;
        }
        // forward t-derivative of a at t = 0 (t may not go negative)
        let ht = 1e-5;
        let da_dt = (-3.0 * (spec.amplitude)(0.0, p) + 4.0 * (spec.amplitude)(ht, p)
            - (spec.amplitude)(2.0 * ht, p))
            / (2.0 * ht)
            * spec.density(p);
        total += w * (q_lap + da_dt) / split.det.sqrt();
    }
    Ok(total)
}

/// Per-component expansion data with the brute-force cross-check.
#[derive(Debug, Clone)]
pub struct ComponentReport {
    pub dim: usize,
    pub coeff_leading: f64,
    pub coeff_next: Option<f64>,
    pub coeff_fitted: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ExpansionReport {
    pub components: Vec<ComponentReport>,
}

impl ExpansionReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "component,dim,coeff_leading,coeff_fitted,rel_err")?;
        for (i, c) in self.components.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{}",
                i,
                c.dim,
                fmt17(c.coeff_leading),
                fmt17(c.coeff_fitted),
                fmt17(c.rel_err)
            )?;
        }
        Ok(())
    }

    pub fn render_table(&self) -> String {
        let mut out = String::from(
            "component  dim  coeff_leading        coeff_fitted         rel_err\n",
        );
        for (i, c) in self.components.iter().enumerate() {
            out.push_str(&format!(
                "{:<9}  {:<3}  {:<19.12e}  {:<19.12e}  {:.3e}\n",
                i, c.dim, c.coeff_leading, c.coeff_fitted, c.rel_err
            ));
        }
        out
    }
}

/// Leading term vs the fitted limit of (4 pi t)^{d/2} I(t, a) as t -> 0.
pub fn expansion_report(
    spec: &IntegrandSpec,
    gamma: &CriticalManifold,
    fit_times: &[f64],
) -> Result<ExpansionReport> {
    gamma.validate(spec)?;
    let leading = laplace_leading_term(spec, gamma)?;
    let next = laplace_first_order(spec, gamma).ok();
    let mut scaled = Vec::with_capacity(fit_times.len());
    for &t in fit_times {
        let i = brute_force_integral(spec, t)?;
        scaled.push((4.0 * PI * t).powf(gamma.dim as f64 / 2.0) * i);
    }
    let (fitted, _slope) = ls_line(fit_times, &scaled);
    let rel_err = (fitted - leading).abs() / leading.abs().max(1e-300);
    Ok(ExpansionReport {
        components: vec![ComponentReport {
            dim: gamma.dim,
            coeff_leading: leading,
            coeff_next: next,
            coeff_fitted: fitted,
            rel_err,
        }],
    })
}

/// Finite-dimensional path space: piecewise minimizing geodesics with nodes
/// at the partition times, coordinatized by the interior points.
#[derive(Debug, Clone)]
pub struct PathSpaceDomain {
    pub model: ManifoldModel,
    pub x: Point,
    pub y: Point,
    /// Partition of [0, 1].
    pub partition: Partition,
}

impl PathSpaceDomain {
    pub fn new(model: ManifoldModel, x: Point, y: Point, partition: Partition) -> Result<Self> {
        if (partition.total() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPartition(
                "path-space partitions run over [0, 1]".into(),
            ));
        }
        Ok(Self {
            model,
            x: model.normalize(x),
            y: model.normalize(y),
            partition,
        })
    }

    pub fn interior_count(&self) -> usize {
        self.partition.steps() - 1
    }

    fn node_sequence<'a>(&'a self, interior: &'a [Point]) -> Vec<&'a Point> {
        let mut seq = Vec::with_capacity(interior.len() + 2);
        seq.push(&self.x);
        seq.extend(interior.iter());
        seq.push(&self.y);
        seq
    }
}

/// Interior nodes (x_1, ..., x_{N-1}).
#[derive(Debug, Clone)]
pub struct PathNodes(pub Vec<Point>);

/// Discrete path energy E = 1/2 sum d(x_{j-1}, x_j)^2 / Delta_j.
pub fn path_energy(domain: &PathSpaceDomain, nodes: &PathNodes) -> Result<f64> {
    let seq = domain.node_sequence(&nodes.0);
    if seq.len() != domain.partition.steps() + 1 {
        return Err(Error::InvalidArgument(format!(
            "expected {} interior nodes, got {}",
            domain.interior_count(),
            nodes.0.len()
        )));
    }
    let incs = domain.partition.increments();
    let mut energy = 0.0;
    for (j, pair) in seq.windows(2).enumerate() {
        if domain.model.is_cut_pair(pair[0], pair[1]) {
            return Err(Error::CutPair {
                distance: domain.model.distance(pair[0], pair[1]),
                inj: domain.model.injectivity_radius(),
            });
        }
        let d = domain.model.distance(pair[0], pair[1]);
        energy += 0.5 * d * d / incs[j];
    }
    Ok(energy)
}

/// Amplitude of the path-integral form:
/// product over hops of (Delta_j)^{-n/2} chi(d_j) sum_i (t Delta_j)^i Phi_i / i!.
pub fn upsilon(
    domain: &PathSpaceDomain,
    op: &OperatorSpec,
    nu: usize,
    profile: &CutoffProfile,
    t: f64,
    nodes: &PathNodes,
) -> Result<f64> {
    op.validate_on(&domain.model)?;
    let max = op.max_order(&domain.model);
    if nu > max {
        return Err(Error::OrderUnsupported { requested: nu, max });
    }
    let seq = domain.node_sequence(&nodes.0);
    let incs = domain.partition.increments();
    let n_half = domain.model.dim() as f64 / 2.0;
    let mut product = 1.0;
    for (j, pair) in seq.windows(2).enumerate() {
        let d = domain.model.distance(pair[0], pair[1]);
        if d >= profile.r1 {
            return Ok(0.0);
        }
        let chi = cutoff(profile, d);
        let mut series = 0.0;
        let mut pow_over_fact = 1.0;
        for i in 0..=nu {
            if i > 0 {
                pow_over_fact *= t * incs[j] / i as f64;
            }
            series += pow_over_fact * heat_coefficient(&domain.model, op, i, pair[0], pair[1])?;
        }
        product *= incs[j].powf(-n_half) * chi * series;
    }
    Ok(product)
}

/// Path-integral form of the convolution product: full tensor quadrature of
/// (4 pi t)^{-nN/2} e^{-E/2t} Upsilon over grid^{N-1}. Limited to N-1 <= 3
/// interior factors; larger products belong to the convolution module (the
/// two agree identically).
pub fn path_integral_form(
    domain: &PathSpaceDomain,
    op: &OperatorSpec,
    nu: usize,
    profile: &CutoffProfile,
    t: f64,
    grid: &QuadratureGrid,
) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::NonpositiveTime(t));
    }
    let interior = domain.interior_count();
    if interior > 3 {
        return Err(Error::DimensionTooLarge(interior));
    }
    let n = domain.model.dim() as f64;
    let steps = domain.partition.steps() as f64;
    let pref = (4.0 * PI * t).powf(-n * steps / 2.0);
    let mut total = 0.0;
    let mut nodes = PathNodes(vec![Point([0.0, 0.0]); interior]);
    let mut idx = vec![0usize; interior];
    if interior == 0 {
        let e = path_energy(domain, &nodes)?;
        let u = upsilon(domain, op, nu, profile, t, &nodes)?;
        return Ok(pref * (-e / (2.0 * t)).exp() * u);
    }
    'outer: loop {
        let mut w = 1.0;
        for (k, &node_idx) in idx.iter().enumerate() {
            nodes.0[k] = grid.nodes[node_idx];
            w *= grid.weights[node_idx];
        }
        let u = upsilon(domain, op, nu, profile, t, &nodes)?;
        if u != 0.0 {
            let e = path_energy(domain, &nodes)?;
            total += w * (-e / (2.0 * t)).exp() * u;
        }
        for k in (0..interior).rev() {
            idx[k] += 1;
            if idx[k] < grid.len() {
                continue 'outer;
            }
            idx[k] = 0;
            if k == 0 {
                break 'outer;
            }
        }
    }
    Ok(pref * total)
}

/// Leading coefficient of one critical component.
#[derive(Debug, Clone)]
pub struct ComponentCoefficient {
    pub dim: usize,
    pub coefficient: f64,
}

#[derive(Debug, Clone)]
pub struct CutLocusOptions {
    /// Samples along one-parameter families of minimizers.
    pub family_samples: usize,
    /// Base finite-difference step for the path-space Hessian.
    pub fd_step: f64,
}

impl Default for CutLocusOptions {
    fn default() -> Self {
        Self { family_samples: 16, fd_step: 1e-4 }
    }
}

/// Leading cut-locus coefficients: for each component of the minimizing set,
/// integrate Upsilon(0, .) / det(normal Hessian of E)^{1/2} over the
/// component. The returned coefficient is Phi_{0,l} in the convention
/// p_t/e_t ~ sum_l (4 pi t)^{-d_l/2} Phi_{0,l}.
pub fn cut_locus_coefficient(
    model: &ManifoldModel,
    op: &OperatorSpec,
    x: &Point,
    y: &Point,
    partition: &Partition,
    nu: usize,
    opts: &CutLocusOptions,
) -> Result<Vec<ComponentCoefficient>> {
    op.validate_on(model)?;
    let profile = CutoffProfile::default_for(model);
    let domain = PathSpaceDomain::new(*model, *x, *y, partition.clone())?;
    let tau: Vec<f64> = partition.nodes().to_vec();
    let interior_taus = &tau[1..tau.len() - 1];

    let geodesic_nodes = |g: &crate::geometry::Geodesic| -> Vec<Point> {
        interior_taus.iter().map(|&s| g.point_at(s)).collect()
    };
    let check_hops = |nodes: &[Point]| -> Result<()> {
        let seq = domain.node_sequence(nodes);
        for pair in seq.windows(2) {
            let d = model.distance(pair[0], pair[1]);
            if d >= profile.r0 {
                return Err(Error::PartitionTooCoarse { hop: d, limit: profile.r0 });
            }
        }
        Ok(())
    };

    let mut out = Vec::new();
    match model.minimizing_geodesics(x, y) {
        MinimizingGeodesics::Discrete(geods) => {
            for g in &geods {
                let nodes = geodesic_nodes(g);
                check_hops(&nodes)?;
                let (ups, det) = component_sample(&domain, op, nu, &profile, &nodes, 0, opts)?;
                out.push(ComponentCoefficient { dim: 0, coefficient: ups / det.sqrt() });
            }
        }
        MinimizingGeodesics::Family(family) => {
            let m = opts.family_samples;
            let mut coeff = 0.0;
            for k in 0..m {
                let psi = 2.0 * PI * k as f64 / m as f64;
                let g = family.at(psi);
                let nodes = geodesic_nodes(&g);
                check_hops(&nodes)?;
                let (ups, det) = component_sample(&domain, op, nu, &profile, &nodes, 1, opts)?;
                // speed of the evaluation map along the family parameter
                let h = 1e-5;
                let gp = family.at(psi + h);
                let gm = family.at(psi - h);
                let mut speed2 = 0.0;
                for (j, &s) in interior_taus.iter().enumerate() {
                    let _ = j;
                    let d = model.distance(&gp.point_at(s), &gm.point_at(s));
                    speed2 += (d / (2.0 * h)).powi(2);
                }
                coeff += (2.0 * PI / m as f64) * speed2.sqrt() * ups / det.sqrt();
            }
            out.push(ComponentCoefficient { dim: 1, coefficient: coeff });
        }
    }
    Ok(out)
}

/// Upsilon(0) and the normal-Hessian determinant of the energy at one
/// critical path, in product exponential-chart coordinates.
fn component_sample(
    domain: &PathSpaceDomain,
    op: &OperatorSpec,
    nu: usize,
    profile: &CutoffProfile,
    nodes: &[Point],
    expected_zero: usize,
    opts: &CutLocusOptions,
) -> Result<(f64, f64)> {
    let model = domain.model;
    let n = model.dim();
    let interior = nodes.len();
    let dim = n * interior;
    let charts: Vec<_> = nodes.iter().map(|p| model.chart_at(p)).collect();
    let energy_in_coords = |v: &[f64]| -> f64 {
        let pts: Vec<Point> = charts
            .iter()
            .enumerate()
            .map(|(j, c)| c.map(&v[j * n..(j + 1) * n]))
            .collect();
        path_energy(domain, &PathNodes(pts)).expect("hops stay non-cut near the critical path")
    };
    let steps = vec![opts.fd_step; dim];
    let origin = vec![0.0; dim];
    let h = fd_hessian(&energy_in_coords, &origin, &steps, true);
    let det = normal_determinant(&h, expected_zero)?;
    let ups = upsilon(domain, op, nu, profile, 0.0, &PathNodes(nodes.to_vec()))?;
    Ok((ups, det))
}

/// Finite-difference gradient norm of the path energy at the given nodes
/// (diagnostic for critical-set checks).
pub fn path_energy_gradient_norm(domain: &PathSpaceDomain, nodes: &[Point]) -> Result<f64> {
    let model = domain.model;
    let n = model.dim();
    let charts: Vec<_> = nodes.iter().map(|p| model.chart_at(p)).collect();
    let dim = n * nodes.len();
    let f = |v: &[f64]| -> Result<f64> {
        let pts: Vec<Point> = charts
            .iter()
            .enumerate()
            .map(|(j, c)| c.map(&v[j * n..(j + 1) * n]))
            .collect();
        path_energy(domain, &PathNodes(pts))
    };
    let h = 1e-6;
    let mut norm2 = 0.0;
    for i in 0..dim {
        let mut a = vec![0.0; dim];
        let mut b = vec![0.0; dim];
        a[i] += h;
        b[i] -= h;
        let g = (f(&a)? - f(&b)?) / (2.0 * h);
        norm2 += g * g;
    }
    Ok(norm2.sqrt())
}

/// Convenience: reference value of (4 pi t)^{d/2} p_t/e_t for cut-locus
/// comparisons (used by the CLI and the acceptance suite).
pub fn scaled_kernel_ratio(
    model: &ManifoldModel,
    op: &OperatorSpec,
    t: f64,
    x: &Point,
    y: &Point,
    family_dim: usize,
) -> Result<f64> {
    let p = crate::kernels::reference_kernel_entry(model, op, t, x, y)?;
    let e = euclidean_kernel_r(model.dim(), t, model.distance(x, y))?;
    Ok((4.0 * PI * t).powf(family_dim as f64 / 2.0) * p / e)
}
