//! Correction coefficients Phi_j of the short-time kernel expansion,
//! normalized so the series reads sum_j t^j Phi_j / j!.
//!
//! Phi_0 is the inverse square root of the Van Vleck factor. Higher orders
//! come from the standard radial (Minakshisundaram-Pleijel) transport
//! recursion along the unique minimizing geodesic,
//!
//!   u_j(x,y) = -Theta^{-1/2}(x,y) int_0^1 s^{j-1} Theta^{1/2}(gamma(s))
//!              (L u_{j-1})(gamma(s), y) ds,        Phi_j = j! u_j,
//!
//! evaluated in closed form where possible: on flat models with a potential
//! the inner Laplacian is differentiated analytically, on the sphere the
//! radial derivatives of Theta are analytic. Supported orders: j <= 2 on
//! flat models, j <= 1 on the sphere.

use crate::error::{Error, Result};
use crate::geometry::{ManifoldModel, Point};
use crate::kernels::{OperatorSpec, TrigPolynomial};
use crate::quadrature::gauss_legendre_cached;
use crate::special::{cot_minus_inv, csc2_minus_inv2};

/// Phi_j(x, y). Requires (x, y) away from the cut locus.
pub fn heat_coefficient(
    model: &ManifoldModel,
    op: &OperatorSpec,
    j: usize,
    x: &Point,
    y: &Point,
) -> Result<f64> {
    op.validate_on(model)?;
    let max = op.max_order(model);
    if j > max {
        return Err(Error::OrderUnsupported { requested: j, max });
    }
    if model.is_cut_pair(x, y) {
        return Err(Error::CutPair {
            distance: model.distance(x, y),
            inj: model.injectivity_radius(),
        });
    }
    match (model, op) {
        (_, OperatorSpec::LaplaceBeltrami) => match model {
            ManifoldModel::Circle { .. } | ManifoldModel::FlatTorus2 { .. } => {
                Ok(if j == 0 { 1.0 } else { 0.0 })
            }
            ManifoldModel::Sphere2 { radius } => {
                let r_hat = model.distance(x, y) / radius;
                match j {
                    0 => Ok(sphere_u0(r_hat)),
                    1 => Ok(sphere_u1(r_hat, *radius)),
                    _ => unreachable!(),
                }
            }
        },
        (ManifoldModel::Circle { radius }, OperatorSpec::SchroedingerOnCircle { potential }) => {
            let theta_x = model.normalize(*x).0[0];
            let theta_y = model.normalize(*y).0[0];
            // signed angular displacement from y to x, shortest arc
            let w = wrap_angle(theta_x - theta_y);
            match j {
                0 => Ok(1.0),
                1 => Ok(-potential_average(potential, theta_y, w)),
                2 => Ok(2.0 * flat_u2(potential, *radius, theta_y, w)),
                _ => unreachable!(),
            }
        }
        _ => unreachable!(),
    }
}

fn wrap_angle(d: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    d - two_pi * (d / two_pi).round()
}

/// Coefficient of the Laplace-Beltrami operator as a function of distance
/// alone (the operator is isometry-invariant on the model manifolds).
pub fn heat_coefficient_radial(model: &ManifoldModel, j: usize, r: f64) -> Result<f64> {
    let max = OperatorSpec::LaplaceBeltrami.max_order(model);
    if j > max {
        return Err(Error::OrderUnsupported { requested: j, max });
    }
    match model {
        ManifoldModel::Circle { .. } | ManifoldModel::FlatTorus2 { .. } => {
            Ok(if j == 0 { 1.0 } else { 0.0 })
        }
        ManifoldModel::Sphere2 { radius } => {
            if r >= model.injectivity_radius() - crate::geometry::CUT_MARGIN {
                return Err(Error::CutPair {
                    distance: r,
                    inj: model.injectivity_radius(),
                });
            }
            let r_hat = r / radius;
            Ok(match j {
                0 => sphere_u0(r_hat),
                1 => sphere_u1(r_hat, *radius),
                _ => unreachable!(),
            })
        }
    }
}

/// u0 on the sphere: (r/sin r)^{1/2} as a function of the angle.
pub(crate) fn sphere_u0(r_hat: f64) -> f64 {
    if r_hat < 1e-8 {
        1.0 + r_hat * r_hat / 12.0
    } else {
        (r_hat / r_hat.sin()).sqrt()
    }
}

/// Radial part of (Delta u0)/u0 on the unit sphere (geometer's sign),
/// i.e. Delta u0 = -u0(rho) * radial_term(rho) / R^2.
fn sphere_radial_term(rho: f64) -> f64 {
    let g1 = cot_minus_inv(rho);
    let g2 = csc2_minus_inv2(rho);
    let g1_over = if rho.abs() < 1e-12 { -1.0 / 3.0 } else { g1 / rho };
    0.5 * g2 - 0.25 * g1 * g1 - 0.5 * g1_over
}

/// First correction coefficient on the sphere of radius R at angle r_hat.
/// The Theta^{+-1/2} factors cancel inside the transport integral, leaving
/// u1(r) = u0(r_hat)/R^2 * int_0^1 radial_term(s r_hat) ds.
pub(crate) fn sphere_u1(r_hat: f64, radius: f64) -> f64 {
    let (xs, ws) = gauss_legendre_cached(64);
    let mut integral = 0.0;
    for (&xq, &wq) in xs.iter().zip(ws) {
        let s = 0.5 * (xq + 1.0);
        integral += 0.5 * wq * sphere_radial_term(s * r_hat);
    }
    sphere_u0(r_hat) / (radius * radius) * integral
}

/// Average of V along the arc from theta0 to theta0 + w.
pub(crate) fn potential_average(v: &TrigPolynomial, theta0: f64, w: f64) -> f64 {
    if w.abs() < 1e-3 {
        // sum_m V^(m)(theta0) w^m / (m+1)!
        let mut value = 0.0;
        let mut deriv = v.clone();
        let mut wm_over = 1.0; // w^m / (m+1)!
        for m in 0..=4 {
            if m > 0 {
                deriv = deriv.derivative();
                wm_over *= w / (m as f64 + 1.0);
            }
            value += deriv.eval(theta0) * wm_over;
        }
        value
    } else {
        (v.antiderivative_at(theta0 + w) - v.antiderivative_at(theta0)) / w
    }
}

/// Second derivative of h -> average of V over [theta0, theta0+h], at h.
fn potential_average_d2(v: &TrigPolynomial, derivs: &[TrigPolynomial], theta0: f64, h: f64) -> f64 {
    let k_max = v.degree().max(1) as f64;
    if h.abs() < 0.05 / k_max {
        // series: V''/3 + V'''h/4 + V''''h^2/10 + V^(5)h^3/36 + V^(6)h^4/168
        //         + V^(7)h^5/960 + V^(8)h^6/6480
        const DENOMS: [f64; 7] = [3.0, 4.0, 10.0, 36.0, 168.0, 960.0, 6480.0];
        let mut value = 0.0;
        let mut hp = 1.0;
        for (i, denom) in DENOMS.iter().enumerate() {
            value += derivs[i + 2].eval(theta0) * hp / denom;
            hp *= h;
        }
        value
    } else {
        let vt = v.eval(theta0 + h);
        let vpt = derivs[1].eval(theta0 + h);
        let dw = v.antiderivative_at(theta0 + h) - v.antiderivative_at(theta0);
        vpt / h - 2.0 * vt / (h * h) + 2.0 * dw / (h * h * h)
    }
}

/// u2 on the circle with potential V: transport integral of L u1 along the
/// geodesic, with the inner second derivative taken analytically.
pub(crate) fn flat_u2(v: &TrigPolynomial, radius: f64, theta_y: f64, w: f64) -> f64 {
    // precompute V and derivatives up to order 8
    let mut derivs: Vec<TrigPolynomial> = Vec::with_capacity(9);
    derivs.push(v.clone());
    for _ in 0..8 {
        derivs.push(derivs.last().unwrap().derivative());
    }
    let r2 = radius * radius;
    let (xs, ws) = gauss_legendre_cached(64);
    let mut integral = 0.0;
    for (&xq, &wq) in xs.iter().zip(ws) {
        let s = 0.5 * (xq + 1.0);
        let h = s * w;
        // (L u1)(gamma(s), y) with u1 = -A(h):
        //   = (1/R^2) A''(h) - V(theta_y + h) A(h)
        let a = potential_average(v, theta_y, h);
        let a2 = potential_average_d2(v, &derivs, theta_y, h);
        let lu1 = a2 / r2 - v.eval(theta_y + h) * a;
        integral += 0.5 * wq * s * lu1;
    }
    -integral
}
