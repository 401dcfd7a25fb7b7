//! Gauss–Legendre and Gauss–Hermite rules, plus adaptive doubling helpers.

use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Gauss–Legendre nodes (ascending) and weights on [-1, 1].
///
/// Newton iteration on the Legendre recurrence; 3-5 iterations from the
/// Chebyshev initial guess reaches machine accuracy for all practical n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P'_n(x)
            let mut pm = 1.0;
            let mut p = x;
            for k in 1..n {
                let kf = k as f64;
                let next = ((2.0 * kf + 1.0) * x * p - kf * pm) / (kf + 1.0);
                pm = p;
                p = next;
            }
            dp = nf * (x * p - pm) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

const GL_LADDER_BASE: usize = 8;
const GL_LADDER_MAX: usize = 8192;

/// Cached Gauss–Legendre rules of size 8, 16, ..., 8192 (the adaptive
/// doubling ladder); recomputing nodes per call dominates hot loops.
pub fn gauss_legendre_cached(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: [OnceLock<(Vec<f64>, Vec<f64>)>; 11] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    assert!(
        n.is_power_of_two() && (GL_LADDER_BASE..=GL_LADDER_MAX).contains(&n),
        "cached rule sizes are 8 << k, k <= 10"
    );
    let idx = (n / GL_LADDER_BASE).trailing_zeros() as usize;
    CACHE[idx].get_or_init(|| gauss_legendre(n))
}

/// Integrate f over [a, b] with an n-point Gauss–Legendre rule.
pub fn gl_integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let owned;
    let (xs, ws) = if n.is_power_of_two() && (GL_LADDER_BASE..=GL_LADDER_MAX).contains(&n) {
        let rule = gauss_legendre_cached(n);
        (&rule.0, &rule.1)
    } else {
        owned = gauss_legendre(n);
        (&owned.0, &owned.1)
    };
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (&x, &w) in xs.iter().zip(ws) {
        sum += w * f(mid + half * x);
    }
    half * sum
}

/// Gauss–Legendre with node doubling until the relative change drops below
/// `tol` (absolute floor `tol` for near-zero integrals).
pub fn gl_integrate_adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_nodes: usize,
) -> Result<f64> {
    let mut n = 32;
    let mut prev = gl_integrate(f, a, b, n);
    loop {
        n *= 2;
        let cur = gl_integrate(f, a, b, n);
        let change = (cur - prev).abs();
        if change <= tol * cur.abs().max(1e-300) || change <= tol {
            return Ok(cur);
        }
        if n >= max_nodes {
            return Err(Error::QuadratureNotConverged {
                last_change: change,
            });
        }
        prev = cur;
    }
}

/// Eigenvalues of a symmetric tridiagonal matrix by the implicit QL method.
/// `diag` has length n, `off` length n-1. Returns eigenvalues ascending.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert_eq!(off.len() + 1, n);
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 64, "QL iteration failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = 0.0;
                let _ = f;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    d
}

/// Gauss–Hermite rule for weight e^{-x^2} on the whole line.
///
/// Nodes are the eigenvalues of the Jacobi matrix; weights come from the
/// Christoffel–Darboux identity w_i = 1 / sum_k p_k(x_i)^2 evaluated with
/// Hermite *functions* to avoid overflow (weights at extreme nodes underflow
/// to zero harmlessly).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let nodes = tridiagonal_eigenvalues(&diag, &off);
    let weights = nodes
        .iter()
        .map(|&x| {
            // psi_k = orthonormal Hermite polynomial times e^{-x^2/2}
            let mut psi_prev = 0.0f64;
            let mut psi = PI.powf(-0.25) * (-0.5 * x * x).exp();
            let mut sum = psi * psi;
            for k in 0..n - 1 {
                let kf = k as f64;
                let next = x * (2.0 / (kf + 1.0)).sqrt() * psi
                    - (kf / (kf + 1.0)).sqrt() * psi_prev;
                psi_prev = psi;
                psi = next;
                sum += psi * psi;
            }
            let down = (-x * x).exp();
            if sum == 0.0 {
                0.0
            } else {
                down / sum
            }
        })
        .collect();
    (nodes, weights)
}

const HERMITE_LADDER_BASE: usize = 64;
pub const HERMITE_LADDER_MAX: usize = 4096;

/// Cached Gauss–Hermite rules of size 64, 128, ..., 4096.
pub fn hermite_rule_cached(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: [OnceLock<(Vec<f64>, Vec<f64>)>; 7] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    assert!(
        n.is_power_of_two() && (HERMITE_LADDER_BASE..=HERMITE_LADDER_MAX).contains(&n),
        "hermite ladder size must be 64 << k, k <= 6"
    );
    let idx = (n / HERMITE_LADDER_BASE).trailing_zeros() as usize;
    CACHE[idx].get_or_init(|| gauss_hermite(n))
}

/// Gauss–Hermite quadrature of f with node doubling from 64 until the value
/// stabilizes below `tol`, capped at 4096 nodes.
pub fn hermite_integrate_adaptive<F: Fn(f64) -> f64>(f: &F, tol: f64) -> Result<f64> {
    let eval = |n: usize| -> f64 {
        let (xs, ws) = hermite_rule_cached(n);
        xs.iter().zip(ws).map(|(&x, &w)| w * f(x)).sum()
    };
    let mut n = HERMITE_LADDER_BASE;
    let mut prev = eval(n);
    loop {
        n *= 2;
        let cur = eval(n);
        let change = (cur - prev).abs();
        if change <= tol {
            return Ok(cur);
        }
        if n >= HERMITE_LADDER_MAX {
            return Err(Error::QuadratureNotConverged {
                last_change: change,
            });
        }
        prev = cur;
    }
}
