//! Independent reference heat kernels.
//!
//! Circle and torus: Fourier eigen-sums cross-checked against method-of-images
//! sums (the torus kernel factorizes into two circle kernels). Sphere:
//! Legendre series where it is well conditioned, and a theta-function integral
//! representation (Mehler-Dirichlet kernel applied to the wrapped Gaussian)
//! for the small-time / large-distance regime where the Legendre series
//! cancels catastrophically in f64. Schroedinger on the circle: dense
//! Fourier-Galerkin eigendecomposition.

use crate::error::{Error, Result};
use crate::geometry::{ManifoldModel, Point};
use crate::kernels::TrigPolynomial;
use crate::quadrature::gl_integrate_adaptive;
use crate::special::sinc;
use nalgebra::DMatrix;
use std::f64::consts::PI;

const TAIL_TOL: f64 = 1e-15;
const TERM_TOL: f64 = 1e-16;
const MAX_TERMS: usize = 200_000;

/// Method-of-images heat kernel on the circle of radius R at distance d.
pub fn circle_image_entry(radius: f64, t: f64, d: f64) -> f64 {
    let period = 2.0 * PI * radius;
    let pref = (4.0 * PI * t).powf(-0.5);
    let term = |s: f64| (-s * s / (4.0 * t)).exp();
    let mut sum = term(d);
    for k in 1..=10_000 {
        let shift = period * k as f64;
        let add = term(d - shift) + term(d + shift);
        sum += add;
        if add < 1e-20 * sum {
            break;
        }
    }
    pref * sum
}

/// Fourier eigen-sum heat kernel on the circle, truncated when
/// e^{-k^2 t / R^2} drops below 1e-16.
pub fn circle_fourier_entry(radius: f64, t: f64, d: f64) -> Result<f64> {
    let mut sum = 1.0;
    let mut k = 1usize;
    loop {
        let lam = (k as f64 / radius).powi(2);
        let factor = (-lam * t).exp();
        if factor < TERM_TOL {
            break;
        }
        sum += 2.0 * factor * (k as f64 * d / radius).cos();
        k += 1;
        if k > MAX_TERMS {
            return Err(Error::TruncationNotConverged { t, max_terms: MAX_TERMS });
        }
    }
    Ok(sum / (2.0 * PI * radius))
}

/// Both circle routes, cross-checked to 1e-10 of the diagonal scale.
pub fn circle_dual_checked(radius: f64, t: f64, d: f64) -> Result<f64> {
    let img = circle_image_entry(radius, t, d);
    let four = circle_fourier_entry(radius, t, d)?;
    let scale = circle_image_entry(radius, t, 0.0);
    let diff = (img - four).abs();
    if diff > 1e-10 * scale {
        return Err(Error::OracleMismatch {
            context: format!("circle Fourier vs image sums at t={t}, d={d}"),
            diff,
        });
    }
    Ok(img)
}

/// Flat-torus kernel as the product of two circle kernels.
pub fn torus_entry(
    l1: f64,
    l2: f64,
    t: f64,
    x: &Point,
    y: &Point,
    model: &ManifoldModel,
) -> Result<f64> {
    let xn = model.normalize(*x);
    let yn = model.normalize(*y);
    let wrap = |d: f64, l: f64| (d - l * (d / l).round()).abs();
    let du = wrap(yn.0[0] - xn.0[0], l1);
    let dv = wrap(yn.0[1] - xn.0[1], l2);
    let p1 = circle_dual_checked(l1 / (2.0 * PI), t, du)?;
    let p2 = circle_dual_checked(l2 / (2.0 * PI), t, dv)?;
    Ok(p1 * p2)
}

/// Legendre eigen-sum on the sphere of radius R at geodesic distance d.
/// Tail criterion: (2l+1) e^{-l(l+1)t/R^2} < 1e-15.
pub fn sphere_legendre_entry(radius: f64, t: f64, d: f64) -> Result<f64> {
    let t_hat = t / (radius * radius);
    let x = (d / radius).cos();
    let mut sum = 0.0;
    let mut p_prev = 1.0; // P_0
    let mut p = x; // P_1
    let mut l = 0usize;
    loop {
        let lf = l as f64;
        let pl = if l == 0 {
            1.0
        } else if l == 1 {
            x
        } else {
            let next = ((2.0 * lf - 1.0) * x * p - (lf - 1.0) * p_prev) / lf;
            p_prev = p;
            p = next;
            next
        };
        let weight = (2.0 * lf + 1.0) * (-lf * (lf + 1.0) * t_hat).exp();
        sum += weight * pl;
        if weight < TAIL_TOL && l > 2 {
            break;
        }
        l += 1;
        if l > MAX_TERMS {
            return Err(Error::TruncationNotConverged { t, max_terms: MAX_TERMS });
        }
    }
    Ok(sum / (4.0 * PI * radius * radius))
}

/// Wrapped-image sum entering the theta-integral representation, with the
/// dominant Gaussian factored out to keep the integrand away from the
/// subnormal range deep in the tail:
/// f(s) e^{theta^2/4t} = sum_k (-1)^k (s-2 pi k) e^{-((s-2 pi k)^2 - theta^2)/4t}.
fn wrapped_odd_gaussian_scaled(s: f64, t_hat: f64, theta: f64) -> f64 {
    let reach = (4.0 * t_hat * 709.8).sqrt();
    let k_max = ((reach + PI) / (2.0 * PI)).ceil() as i64 + 1;
    let mut sum = 0.0;
    for k in -k_max..=k_max {
        let u = s - 2.0 * PI * k as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * u * (-(u * u - theta * theta) / (4.0 * t_hat)).exp();
    }
    sum
}

/// Theta-integral representation of the sphere kernel, valid for all
/// parameters and free of cancellation at small times:
///
///   p_t(theta) = sqrt(2) e^{t/4} (4 pi t)^{-3/2}
///                * int_theta^pi f(s) / sqrt(cos theta - cos s) ds
///
/// on the unit sphere, evaluated after the substitution
/// s = theta + (pi - theta) sin^2(chi), which removes both endpoint
/// singularities uniformly in theta (including the antipodal limit).
pub fn sphere_theta_integral_entry(radius: f64, t: f64, d: f64) -> Result<f64> {
    let t_hat = t / (radius * radius);
    let theta = (d / radius).clamp(0.0, PI);
    let a = 0.5 * (PI - theta);
    let integrand = |chi: f64| {
        let s2 = chi.sin().powi(2);
        let s = theta + 2.0 * a * s2;
        let sc1 = sinc(a * s2);
        let sc2 = sinc(a * (2.0 - s2));
        let denom = ((2.0 - s2) * sc1 * sc2).sqrt();
        if denom == 0.0 {
            return 0.0;
        }
        wrapped_odd_gaussian_scaled(s, t_hat, theta) * chi.cos() / denom
    };
    let integral = gl_integrate_adaptive(&integrand, 0.0, 0.5 * PI, 1e-12, 4096)?;
    // prefactor sqrt(2) * 2 sqrt(2) = 4 after the chi substitution; the
    // factored-out Gaussian comes back at the end
    let p_unit = 4.0 * (t_hat / 4.0).exp() * (4.0 * PI * t_hat).powf(-1.5) * integral
        * (-theta * theta / (4.0 * t_hat)).exp();
    Ok(p_unit / (radius * radius))
}

/// Sphere reference entry: Legendre series where well conditioned, the
/// theta-integral beyond (the series loses all accuracy once the Gaussian
/// suppression d^2/4t exceeds the f64 mantissa headroom).
pub fn sphere_entry(radius: f64, t: f64, d: f64) -> Result<f64> {
    let t_hat = t / (radius * radius);
    let r_hat = d / radius;
    if r_hat * r_hat / (4.0 * t_hat) > 8.0 {
        sphere_theta_integral_entry(radius, t, d)
    } else {
        sphere_legendre_entry(radius, t, d)
    }
}

const GALERKIN_K_CAP: usize = 1024;

/// Real Fourier basis spectral model of Delta (+ V) on the circle:
/// eigenvalues and eigenfunction coefficients in the orthonormal basis
/// { 1/sqrt(2 pi R), cos(k.)/sqrt(pi R), sin(k.)/sqrt(pi R) }.
#[derive(Debug, Clone)]
pub struct CircleSpectrum {
    pub radius: f64,
    pub eigenvalues: Vec<f64>,
    /// coeffs[m * dim + i] = coefficient of basis i in eigenfunction m.
    coeffs: Option<Vec<f64>>,
    k_max: usize,
}

fn basis_wavenumber(i: usize) -> usize {
    i.div_ceil(2)
}

impl CircleSpectrum {
    pub fn dim(&self) -> usize {
        2 * self.k_max + 1
    }

    fn k_for_time(radius: f64, t: f64, v_sup: f64) -> Result<usize> {
        let k = (radius * (37.0 / t).sqrt()).ceil() as usize + v_sup.sqrt().ceil() as usize + 2;
        if k > GALERKIN_K_CAP {
            return Err(Error::TruncationNotConverged { t, max_terms: GALERKIN_K_CAP });
        }
        Ok(k)
    }

    /// Pure Laplacian: the basis itself diagonalizes.
    pub fn laplace(radius: f64, t: f64) -> Result<Self> {
        let k_max = Self::k_for_time(radius, t, 0.0)?;
        let eigenvalues = (0..2 * k_max + 1)
            .map(|i| (basis_wavenumber(i) as f64 / radius).powi(2))
            .collect();
        Ok(Self { radius, eigenvalues, coeffs: None, k_max })
    }

    /// Fourier-Galerkin eigendecomposition of Delta + V.
    pub fn schroedinger(radius: f64, potential: &TrigPolynomial, t: f64) -> Result<Self> {
        let k_max = Self::k_for_time(radius, t, potential.sup_bound())?;
        Self::schroedinger_with_k(radius, potential, k_max)
    }

    pub fn schroedinger_with_k(
        radius: f64,
        potential: &TrigPolynomial,
        k_max: usize,
    ) -> Result<Self> {
        let dim = 2 * k_max + 1;
        // equispaced quadrature is exact for the trig-polynomial integrands
        let n_q = 4 * (k_max + potential.degree() + 2);
        let thetas: Vec<f64> = (0..n_q).map(|q| 2.0 * PI * q as f64 / n_q as f64).collect();
        let basis = basis_matrix(radius, k_max, &thetas);
        let w = 2.0 * PI * radius / n_q as f64;
        let vdiag: Vec<f64> = thetas.iter().map(|&th| potential.eval(th) * w).collect();
        // H = diag(k^2/R^2) + B^T diag(V w) B
        let mut weighted = basis.clone();
        for (q, mut row) in weighted.row_iter_mut().enumerate() {
            row *= vdiag[q];
        }
        let mut h = basis.transpose() * weighted;
        for i in 0..dim {
            h[(i, i)] += (basis_wavenumber(i) as f64 / radius).powi(2);
        }
        // symmetrize against quadrature round-off
        let h = 0.5 * (&h + h.transpose());
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let eigenvalues: Vec<f64> = order.iter().map(|&m| eig.eigenvalues[m]).collect();
        let mut coeffs = vec![0.0; dim * dim];
        for (m, &src) in order.iter().enumerate() {
            for i in 0..dim {
                coeffs[m * dim + i] = eig.eigenvectors[(i, src)];
            }
        }
        Ok(Self { radius, eigenvalues, coeffs: Some(coeffs), k_max })
    }

    /// Eigenfunction values at the given angles, as an (n x dim) matrix.
    pub fn eigenfunction_matrix(&self, thetas: &[f64]) -> DMatrix<f64> {
        let b = basis_matrix(self.radius, self.k_max, thetas);
        match &self.coeffs {
            None => b,
            Some(c) => {
                let dim = self.dim();
                let cmat = DMatrix::from_fn(dim, dim, |i, m| c[m * dim + i]);
                b * cmat
            }
        }
    }

    pub fn eigenfunction(&self, m: usize, theta: f64) -> f64 {
        self.eigenfunction_matrix(&[theta])[(0, m)]
    }

    /// Kernel value sum_m factor_m phi_m(x) phi_m(y).
    pub fn kernel_entry_with_factors(&self, factors: &[f64], tx: f64, ty: f64) -> f64 {
        let phis = self.eigenfunction_matrix(&[tx, ty]);
        let mut sum = 0.0;
        for (m, &f) in factors.iter().enumerate() {
            sum += f * phis[(0, m)] * phis[(1, m)];
        }
        sum
    }

    /// Heat-semigroup factors e^{-lambda t}, truncated below 1e-16.
    pub fn heat_factors(&self, t: f64) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .map(|&l| (-l * t).exp())
            .take_while(|&f| f >= TERM_TOL)
            .collect()
    }

    pub fn kernel_entry(&self, t: f64, tx: f64, ty: f64) -> f64 {
        self.kernel_entry_with_factors(&self.heat_factors(t), tx, ty)
    }

    /// Full kernel on a node set: Phi diag(factors) Phi^T.
    pub fn kernel_on_nodes_with_factors(&self, factors: &[f64], thetas: &[f64]) -> Vec<f64> {
        let phis = self.eigenfunction_matrix(thetas);
        let n = thetas.len();
        let mut scaled = phis.columns(0, factors.len()).into_owned();
        for (m, mut col) in scaled.column_iter_mut().enumerate() {
            col *= factors[m];
        }
        let kern = scaled * phis.columns(0, factors.len()).transpose();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = kern[(i, j)];
            }
        }
        out
    }

    pub fn kernel_on_nodes(&self, t: f64, thetas: &[f64]) -> Vec<f64> {
        self.kernel_on_nodes_with_factors(&self.heat_factors(t), thetas)
    }

    /// L^2 pairing of the constant function 1 with eigenfunction m:
    /// sqrt(2 pi R) times its constant-basis coefficient.
    pub fn constant_overlap(&self, m: usize) -> f64 {
        let c0 = match &self.coeffs {
            None => {
                if m == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Some(c) => c[m * self.dim()],
        };
        (2.0 * PI * self.radius).sqrt() * c0
    }

    /// Gram matrix of eigenfunctions under grid quadrature (orthonormality
    /// diagnostic).
    pub fn gram_matrix(&self, thetas: &[f64]) -> DMatrix<f64> {
        let phis = self.eigenfunction_matrix(thetas);
        let w = 2.0 * PI * self.radius / thetas.len() as f64;
        w * phis.transpose() * phis
    }
}

fn basis_matrix(radius: f64, k_max: usize, thetas: &[f64]) -> DMatrix<f64> {
    let dim = 2 * k_max + 1;
    let c0 = 1.0 / (2.0 * PI * radius).sqrt();
    let ck = 1.0 / (PI * radius).sqrt();
    DMatrix::from_fn(thetas.len(), dim, |q, i| {
        if i == 0 {
            c0
        } else {
            let k = basis_wavenumber(i) as f64;
            if i % 2 == 1 {
                ck * (k * thetas[q]).cos()
            } else {
                ck * (k * thetas[q]).sin()
            }
        }
    })
}
