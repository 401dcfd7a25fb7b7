//! Euclidean kernel, smooth cutoff, correction coefficients, approximate
//! heat kernels and independent reference kernels.

mod coefficients;
mod reference;

pub use coefficients::{heat_coefficient, heat_coefficient_radial};
pub use reference::{
    circle_fourier_entry, circle_image_entry, sphere_legendre_entry, sphere_theta_integral_entry,
    CircleSpectrum,
};

use crate::error::{Error, Result};
use crate::geometry::{ManifoldModel, Point, QuadratureGrid};
use crate::special::ln_gamma;
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

/// Trigonometric polynomial a0 + sum_k (a_k cos k.theta + b_k sin k.theta).
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    pub a0: f64,
    pub cos_coeffs: Vec<f64>,
    pub sin_coeffs: Vec<f64>,
}

impl TrigPolynomial {
    pub fn new(a0: f64, cos_coeffs: Vec<f64>, sin_coeffs: Vec<f64>) -> Self {
        Self { a0, cos_coeffs, sin_coeffs }
    }

    /// V(theta) = cos(theta), the default test potential.
    pub fn cosine() -> Self {
        Self::new(0.0, vec![1.0], vec![])
    }

    pub fn degree(&self) -> usize {
        self.cos_coeffs.len().max(self.sin_coeffs.len())
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut v = self.a0;
        for (i, &a) in self.cos_coeffs.iter().enumerate() {
            v += a * ((i + 1) as f64 * theta).cos();
        }
        for (i, &b) in self.sin_coeffs.iter().enumerate() {
            v += b * ((i + 1) as f64 * theta).sin();
        }
        v
    }

    /// d/dtheta as a trig polynomial.
    pub fn derivative(&self) -> TrigPolynomial {
        let deg = self.degree();
        let mut cos_coeffs = vec![0.0; deg];
        let mut sin_coeffs = vec![0.0; deg];
        for k in 1..=deg {
            let a = self.cos_coeffs.get(k - 1).copied().unwrap_or(0.0);
            let b = self.sin_coeffs.get(k - 1).copied().unwrap_or(0.0);
            cos_coeffs[k - 1] = k as f64 * b;
            sin_coeffs[k - 1] = -(k as f64) * a;
        }
        TrigPolynomial::new(0.0, cos_coeffs, sin_coeffs)
    }

    /// Antiderivative W with W(0) = -sum b_k/k (the a0*theta term makes W
    /// non-periodic, so this is a plain function, not a TrigPolynomial).
    pub fn antiderivative_at(&self, theta: f64) -> f64 {
        let mut w = self.a0 * theta;
        for (i, &a) in self.cos_coeffs.iter().enumerate() {
            let k = (i + 1) as f64;
            w += a * (k * theta).sin() / k;
        }
        for (i, &b) in self.sin_coeffs.iter().enumerate() {
            let k = (i + 1) as f64;
            w -= b * (k * theta).cos() / k;
        }
        w
    }

    /// Minimum over the circle, by dense sampling (8192 nodes). Adequate for
    /// the trig-polynomial potentials used here.
    pub fn min_value(&self) -> f64 {
        (0..8192)
            .map(|i| self.eval(2.0 * PI * i as f64 / 8192.0))
            .fold(f64::INFINITY, f64::min)
    }

    /// Max of |a_k| + |b_k| summed; crude sup-norm bound.
    pub fn sup_bound(&self) -> f64 {
        let mut s = self.a0.abs();
        for &a in &self.cos_coeffs {
            s += a.abs();
        }
        for &b in &self.sin_coeffs {
            s += b.abs();
        }
        s
    }
}

/// Scalar operator: Laplace-Beltrami, or a Schroedinger operator
/// L = Delta + V on the circle with a trig-polynomial potential.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    LaplaceBeltrami,
    SchroedingerOnCircle { potential: TrigPolynomial },
}

impl OperatorSpec {
    pub fn laplace() -> Self {
        OperatorSpec::LaplaceBeltrami
    }

    pub fn schroedinger(potential: TrigPolynomial) -> Self {
        OperatorSpec::SchroedingerOnCircle { potential }
    }

    pub fn label(&self) -> String {
        match self {
            OperatorSpec::LaplaceBeltrami => "laplace".into(),
            OperatorSpec::SchroedingerOnCircle { potential } => {
                let mut parts = vec![format!("{}", potential.a0)];
                let deg = potential.degree();
                for k in 0..deg {
                    parts.push(format!(
                        "{}",
                        potential.cos_coeffs.get(k).copied().unwrap_or(0.0)
                    ));
                    parts.push(format!(
                        "{}",
                        potential.sin_coeffs.get(k).copied().unwrap_or(0.0)
                    ));
                }
                format!("schroedinger:{}", parts.join(","))
            }
        }
    }

    /// Check the operator is defined on the model.
    pub fn validate_on(&self, model: &ManifoldModel) -> Result<()> {
        match (self, model) {
            (OperatorSpec::SchroedingerOnCircle { .. }, ManifoldModel::Circle { .. }) => Ok(()),
            (OperatorSpec::SchroedingerOnCircle { .. }, m) => Err(Error::OperatorModelMismatch {
                op: self.label(),
                model: m.name(),
            }),
            (OperatorSpec::LaplaceBeltrami, _) => Ok(()),
        }
    }

    /// Highest supported correction order on the given model.
    pub fn max_order(&self, model: &ManifoldModel) -> usize {
        match model {
            ManifoldModel::Sphere2 { .. } => 1,
            _ => 2,
        }
    }
}

/// Smooth cutoff: 1 on [0, r0], 0 on [r1, inf), C^inf bump in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProfile {
    pub r0: f64,
    pub r1: f64,
}

impl CutoffProfile {
    pub fn new(r0: f64, r1: f64) -> Self {
        assert!(0.0 < r0 && r0 < r1, "need 0 < r0 < r1");
        Self { r0, r1 }
    }

    /// Default for a model: r0 = 0.4 inj, r1 = 0.8 inj.
    pub fn default_for(model: &ManifoldModel) -> Self {
        let inj = model.injectivity_radius();
        Self::new(0.4 * inj, 0.8 * inj)
    }

    pub fn eval(&self, r: f64) -> f64 {
        cutoff(self, r)
    }
}

fn bump(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// The cutoff function chi(r).
pub fn cutoff(profile: &CutoffProfile, r: f64) -> f64 {
    assert!(r >= 0.0, "cutoff takes a nonnegative radius");
    if r <= profile.r0 {
        1.0
    } else if r >= profile.r1 {
        0.0
    } else {
        let u = (profile.r1 - r) / (profile.r1 - profile.r0);
        let b = bump(u);
        b / (b + bump(1.0 - u))
    }
}

/// Flat comparison kernel (4 pi t)^{-n/2} exp(-d^2/4t) in dimension n.
pub fn euclidean_kernel_r(dim: usize, t: f64, d: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::NonpositiveTime(t));
    }
    Ok((4.0 * PI * t).powf(-(dim as f64) / 2.0) * (-d * d / (4.0 * t)).exp())
}

/// Euclidean kernel between two manifold points.
pub fn euclidean_kernel(model: &ManifoldModel, t: f64, x: &Point, y: &Point) -> Result<f64> {
    euclidean_kernel_r(model.dim(), t, model.distance(x, y))
}

/// Correction-coefficient evaluator up to a fixed order.
#[derive(Debug, Clone)]
pub struct HeatCoefficients {
    pub model: ManifoldModel,
    pub op: OperatorSpec,
    pub max_order: usize,
}

impl HeatCoefficients {
    pub fn new(model: ManifoldModel, op: OperatorSpec) -> Result<Self> {
        op.validate_on(&model)?;
        let max_order = op.max_order(&model);
        Ok(Self { model, op, max_order })
    }

    pub fn eval(&self, j: usize, x: &Point, y: &Point) -> Result<f64> {
        heat_coefficient(&self.model, &self.op, j, x, y)
    }
}

/// Approximate heat kernel: cutoff * euclidean kernel * truncated series.
/// Returns 0 beyond the cutoff support.
pub fn approximate_kernel(
    model: &ManifoldModel,
    op: &OperatorSpec,
    nu: usize,
    profile: &CutoffProfile,
    t: f64,
    x: &Point,
    y: &Point,
) -> Result<f64> {
    if let OperatorSpec::LaplaceBeltrami = op {
        return approximate_kernel_radial(model, op, nu, profile, t, model.distance(x, y));
    }
    if t <= 0.0 {
        return Err(Error::NonpositiveTime(t));
    }
    op.validate_on(model)?;
    let max = op.max_order(model);
    if nu > max {
        return Err(Error::OrderUnsupported { requested: nu, max });
    }
    let d = model.distance(x, y);
    if d >= profile.r1 {
        return Ok(0.0);
    }
    let chi = cutoff(profile, d);
    let e = euclidean_kernel_r(model.dim(), t, d)?;
    let mut series = 0.0;
    let mut tj_over_fact = 1.0;
    for j in 0..=nu {
        if j > 0 {
            tj_over_fact *= t / j as f64;
        }
        series += tj_over_fact * heat_coefficient(model, op, j, x, y)?;
    }
    Ok(chi * e * series)
}

/// Approximate kernel for the (isometry-invariant) Laplace-Beltrami operator
/// as a function of distance.
pub fn approximate_kernel_radial(
    model: &ManifoldModel,
    op: &OperatorSpec,
    nu: usize,
    profile: &CutoffProfile,
    t: f64,
    d: f64,
) -> Result<f64> {
    if !matches!(op, OperatorSpec::LaplaceBeltrami) {
        return Err(Error::InvalidArgument(
            "radial kernel path requires the Laplace-Beltrami operator".into(),
        ));
    }
    if t <= 0.0 {
        return Err(Error::NonpositiveTime(t));
    }
    let max = op.max_order(model);
    if nu > max {
        return Err(Error::OrderUnsupported { requested: nu, max });
    }
    if d >= profile.r1 {
        return Ok(0.0);
    }
    let chi = cutoff(profile, d);
    let e = euclidean_kernel_r(model.dim(), t, d)?;
    let mut series = 0.0;
    let mut tj_over_fact = 1.0;
    for j in 0..=nu {
        if j > 0 {
            tj_over_fact *= t / j as f64;
        }
        series += tj_over_fact * heat_coefficient_radial(model, j, d)?;
    }
    Ok(chi * e * series)
}

/// p_t(x,y)/e_t(x,y) - sum_{j<=nu} t^j Phi_j / j!, with p_t from the
/// reference oracle.
pub fn expansion_remainder(
    model: &ManifoldModel,
    op: &OperatorSpec,
    nu: usize,
    t: f64,
    x: &Point,
    y: &Point,
) -> Result<f64> {
    let p = reference_kernel_entry(model, op, t, x, y)?;
    let e = euclidean_kernel(model, t, x, y)?;
    let mut series = 0.0;
    let mut tj_over_fact = 1.0;
    for j in 0..=nu {
        if j > 0 {
            tj_over_fact *= t / j as f64;
        }
        series += tj_over_fact * heat_coefficient(model, op, j, x, y)?;
    }
    Ok(p / e - series)
}

/// Values of a two-point kernel on a grid pair at a fixed time.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub grid: Arc<QuadratureGrid>,
    pub t: f64,
    pub values: Vec<f64>,
    pub op_label: String,
}

impl KernelMatrix {
    pub fn n(&self) -> usize {
        self.grid.len()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Build from a pairwise entry function, parallel over rows.
    pub fn build<F>(grid: &Arc<QuadratureGrid>, t: f64, op_label: &str, f: F) -> Result<Self>
    where
        F: Fn(&Point, &Point) -> Result<f64> + Sync,
    {
        let n = grid.len();
        let rows: Vec<Result<Vec<f64>>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = Vec::with_capacity(n);
                for j in 0..n {
                    row.push(f(&grid.nodes[i], &grid.nodes[j])?);
                }
                Ok(row)
            })
            .collect();
        let mut values = Vec::with_capacity(n * n);
        for r in rows {
            values.extend(r?);
        }
        Ok(Self {
            grid: Arc::clone(grid),
            t,
            values,
            op_label: op_label.to_string(),
        })
    }

    /// Build a kernel that depends only on distance; distinct distances are
    /// evaluated once (tensor grids repeat distances heavily).
    pub fn build_radial<F>(grid: &Arc<QuadratureGrid>, t: f64, op_label: &str, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        let n = grid.len();
        let model = grid.model;
        let dists: Vec<f64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let gi = grid.nodes[i];
                (0..n).map(move |j| model.distance(&gi, &grid.nodes[j]))
            })
            .collect();
        let mut uniq: HashMap<u64, f64> = HashMap::new();
        for &d in &dists {
            uniq.entry(d.to_bits()).or_insert(d);
        }
        let mut keys: Vec<u64> = uniq.keys().copied().collect();
        keys.sort_unstable();
        let vals: Vec<Result<f64>> = keys
            .par_iter()
            .map(|k| f(f64::from_bits(*k)))
            .collect();
        let mut table: HashMap<u64, f64> = HashMap::with_capacity(keys.len());
        for (k, v) in keys.iter().zip(vals) {
            table.insert(*k, v?);
        }
        let values = dists.iter().map(|d| table[&d.to_bits()]).collect();
        Ok(Self {
            grid: Arc::clone(grid),
            t,
            values,
            op_label: op_label.to_string(),
        })
    }

    /// CSV serialization: metadata header, then row-major entries with 17
    /// significant digits, rows in grid order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# model,op,t,grid")?;
        writeln!(
            w,
            "# {},{},{},{}",
            self.grid.model.name(),
            self.op_label,
            fmt17(self.t),
            self.n()
        )?;
        let n = self.n();
        for i in 0..n {
            let row: Vec<String> = self.row(i).iter().map(|v| fmt17(*v)).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// 17-significant-digit formatting used by all CSV writers.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Independent reference heat kernel as a matrix on the grid.
pub fn reference_kernel(
    model: &ManifoldModel,
    op: &OperatorSpec,
    t: f64,
    grid: &Arc<QuadratureGrid>,
) -> Result<KernelMatrix> {
    if t <= 0.0 {
        return Err(Error::NonpositiveTime(t));
    }
    op.validate_on(model)?;
    let label = op.label();
    match (model, op) {
        (ManifoldModel::Circle { radius }, OperatorSpec::LaplaceBeltrami) => {
            let radius = *radius;
            KernelMatrix::build_radial(grid, t, &label, |d| {
                reference::circle_dual_checked(radius, t, d)
            })
        }
        (ManifoldModel::FlatTorus2 { lengths }, OperatorSpec::LaplaceBeltrami) => {
            let [l1, l2] = *lengths;
            let model = *model;
            if let crate::geometry::GridLayout::TorusTensor { n1, n2 } = grid.layout {
                // the kernel factorizes and the tensor grid only realizes
                // n1 + n2 distinct axis offsets
                let axis_table = |l: f64, n: usize| -> Result<Vec<f64>> {
                    (0..n)
                        .map(|k| {
                            let raw = k as f64 * l / n as f64;
                            let d = (raw - l * (raw / l).round()).abs();
                            reference::circle_dual_checked(l / (2.0 * PI), t, d)
                        })
                        .collect()
                };
                let p1 = axis_table(l1, n1)?;
                let p2 = axis_table(l2, n2)?;
                let n = grid.len();
                let mut values = Vec::with_capacity(n * n);
                for a in 0..n {
                    let (i1, j1) = (a / n2, a % n2);
                    for b in 0..n {
                        let (i2, j2) = (b / n2, b % n2);
                        values.push(p1[(i2 + n1 - i1) % n1] * p2[(j2 + n2 - j1) % n2]);
                    }
                }
                Ok(KernelMatrix {
                    grid: Arc::clone(grid),
                    t,
                    values,
                    op_label: label,
                })
            } else {
                KernelMatrix::build(grid, t, &label, |x, y| {
                    reference::torus_entry(l1, l2, t, x, y, &model)
                })
            }
        }
        (ManifoldModel::Sphere2 { radius }, OperatorSpec::LaplaceBeltrami) => {
            let radius = *radius;
            KernelMatrix::build_radial(grid, t, &label, |d| {
                reference::sphere_entry(radius, t, d)
            })
        }
        (ManifoldModel::Circle { radius }, OperatorSpec::SchroedingerOnCircle { potential }) => {
            let spec = CircleSpectrum::schroedinger(*radius, potential, t)?;
            KernelMatrix::build(grid, t, &label, |x, y| {
                Ok(spec.kernel_entry(t, x.0[0], y.0[0]))
            })
        }
        _ => unreachable!("validate_on covers the remaining combinations"),
    }
}

/// Single reference-kernel value.
pub fn reference_kernel_entry(
    model: &ManifoldModel,
    op: &OperatorSpec,
    t: f64,
    x: &Point,
    y: &Point,
) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::NonpositiveTime(t));
    }
    op.validate_on(model)?;
    match (model, op) {
        (ManifoldModel::Circle { radius }, OperatorSpec::LaplaceBeltrami) => {
            reference::circle_dual_checked(*radius, t, model.distance(x, y))
        }
        (ManifoldModel::FlatTorus2 { lengths }, OperatorSpec::LaplaceBeltrami) => {
            reference::torus_entry(lengths[0], lengths[1], t, x, y, model)
        }
        (ManifoldModel::Sphere2 { radius }, OperatorSpec::LaplaceBeltrami) => {
            reference::sphere_entry(*radius, t, model.distance(x, y))
        }
        (ManifoldModel::Circle { radius }, OperatorSpec::SchroedingerOnCircle { potential }) => {
            let spec = CircleSpectrum::schroedinger(*radius, potential, t)?;
            Ok(spec.kernel_entry(t, x.0[0], y.0[0]))
        }
        _ => unreachable!(),
    }
}

/// Normalizing constant of the Riesz family, via log-gamma to avoid overflow:
/// C(alpha) = 2^{1-alpha} pi^{(1-n)/2} / (Gamma(alpha/2) Gamma((alpha-n+1)/2)).
pub fn riesz_constant(alpha: f64, dim: usize) -> f64 {
    let n = dim as f64;
    let log_c = (1.0 - alpha) * (2.0f64).ln() + (1.0 - n) / 2.0 * PI.ln()
        - ln_gamma(alpha / 2.0)
        - ln_gamma((alpha - n + 1.0) / 2.0);
    log_c.exp()
}
