//! Closed-form Riemannian primitives on the three model manifolds:
//! the circle, the flat 2-torus and the round 2-sphere.
//!
//! Everything here is exact (distances, geodesics, the Van Vleck factor) so
//! the kernel modules can be validated against honest oracles. Points carry
//! intrinsic coordinates; all operations normalize into the fundamental
//! domain first. All types are immutable and all functions are pure.

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::rng::SplitMix64;
use crate::special::sinc;
use std::f64::consts::PI;

/// Pairs at distance >= inj - CUT_MARGIN are treated as cut pairs.
pub const CUT_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ManifoldModel {
    /// Circle of radius R, coordinate theta in [0, 2*pi).
    Circle { radius: f64 },
    /// Flat torus with side lengths (L1, L2), coordinates in [0,L1) x [0,L2).
    FlatTorus2 { lengths: [f64; 2] },
    /// Round 2-sphere of radius R, coordinates (colatitude, longitude).
    Sphere2 { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConstants {
    pub dim: usize,
    pub inj: f64,
    pub diam: f64,
    pub vol: f64,
}

/// Intrinsic coordinates; the circle uses only the first slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point(pub [f64; 2]);

impl Point {
    pub fn angle(theta: f64) -> Self {
        Point([theta, 0.0])
    }
    pub fn uv(u: f64, v: f64) -> Self {
        Point([u, v])
    }
    /// Sphere point from colatitude in [0, pi] and longitude.
    pub fn sphere(theta: f64, phi: f64) -> Self {
        Point([theta, phi])
    }
}

fn wrap(d: f64, period: f64) -> f64 {
    d - period * (d / period).round()
}

fn rem_pos(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    if r == period {
        0.0
    } else {
        r
    }
}

pub(crate) fn unit_vec3(p: &Point) -> [f64; 3] {
    let (st, ct) = p.0[0].sin_cos();
    let (sp, cp) = p.0[1].sin_cos();
    [st * cp, st * sp, ct]
}

fn vec3_to_point(v: [f64; 3]) -> Point {
    let theta = (v[0] * v[0] + v[1] * v[1]).sqrt().atan2(v[2]);
    let phi = rem_pos(v[1].atan2(v[0]), 2.0 * PI);
    Point([theta, phi])
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn scale3(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn add3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn normalize3(a: [f64; 3]) -> [f64; 3] {
    scale3(a, 1.0 / norm3(a))
}

impl ManifoldModel {
    pub fn circle(radius: f64) -> Self {
        assert!(radius > 0.0, "circle radius must be positive");
        ManifoldModel::Circle { radius }
    }

    pub fn torus(l1: f64, l2: f64) -> Self {
        assert!(l1 > 0.0 && l2 > 0.0, "torus lengths must be positive");
        ManifoldModel::FlatTorus2 { lengths: [l1, l2] }
    }

    pub fn sphere(radius: f64) -> Self {
        assert!(radius > 0.0, "sphere radius must be positive");
        ManifoldModel::Sphere2 { radius }
    }

    pub fn dim(&self) -> usize {
        match self {
            ManifoldModel::Circle { .. } => 1,
            _ => 2,
        }
    }

    pub fn constants(&self) -> ModelConstants {
        match *self {
            ManifoldModel::Circle { radius } => ModelConstants {
                dim: 1,
                inj: PI * radius,
                diam: PI * radius,
                vol: 2.0 * PI * radius,
            },
            ManifoldModel::FlatTorus2 { lengths: [l1, l2] } => ModelConstants {
                dim: 2,
                inj: 0.5 * l1.min(l2),
                diam: 0.5 * (l1 * l1 + l2 * l2).sqrt(),
                vol: l1 * l2,
            },
            ManifoldModel::Sphere2 { radius } => ModelConstants {
                dim: 2,
                inj: PI * radius,
                diam: PI * radius,
                vol: 4.0 * PI * radius * radius,
            },
        }
    }

    pub fn injectivity_radius(&self) -> f64 {
        self.constants().inj
    }

    pub fn diameter(&self) -> f64 {
        self.constants().diam
    }

    pub fn volume(&self) -> f64 {
        self.constants().vol
    }

    pub fn name(&self) -> String {
        match *self {
            ManifoldModel::Circle { radius } => format!("circle:{radius}"),
            ManifoldModel::FlatTorus2 { lengths: [a, b] } => format!("torus:{a},{b}"),
            ManifoldModel::Sphere2 { radius } => format!("sphere:{radius}"),
        }
    }

    /// Map coordinates into the canonical fundamental domain.
    pub fn normalize(&self, p: Point) -> Point {
        match *self {
            ManifoldModel::Circle { .. } => Point([rem_pos(p.0[0], 2.0 * PI), 0.0]),
            ManifoldModel::FlatTorus2 { lengths: [l1, l2] } => {
                Point([rem_pos(p.0[0], l1), rem_pos(p.0[1], l2)])
            }
            ManifoldModel::Sphere2 { .. } => {
                let theta = p.0[0];
                if (0.0..=PI).contains(&theta) {
                    Point([theta, rem_pos(p.0[1], 2.0 * PI)])
                } else {
                    vec3_to_point(unit_vec3(&p))
                }
            }
        }
    }

    /// Geodesic distance between two points.
    pub fn distance(&self, x: &Point, y: &Point) -> f64 {
        let x = self.normalize(*x);
        let y = self.normalize(*y);
        match *self {
            ManifoldModel::Circle { radius } => radius * wrap(y.0[0] - x.0[0], 2.0 * PI).abs(),
            ManifoldModel::FlatTorus2 { lengths: [l1, l2] } => {
                let du = wrap(y.0[0] - x.0[0], l1);
                let dv = wrap(y.0[1] - x.0[1], l2);
                du.hypot(dv)
            }
            ManifoldModel::Sphere2 { radius } => {
                let a = unit_vec3(&x);
                let b = unit_vec3(&y);
                radius * norm3(cross(a, b)).atan2(dot(a, b))
            }
        }
    }

    /// Whether (x, y) fails to have a unique minimizing geodesic
    /// (within the CUT_MARGIN detection threshold).
    pub fn is_cut_pair(&self, x: &Point, y: &Point) -> bool {
        match *self {
            ManifoldModel::Circle { .. } | ManifoldModel::Sphere2 { .. } => {
                self.distance(x, y) >= self.injectivity_radius() - CUT_MARGIN
            }
            ManifoldModel::FlatTorus2 { lengths: [l1, l2] } => {
                let x = self.normalize(*x);
                let y = self.normalize(*y);
                let du = wrap(y.0[0] - x.0[0], l1).abs();
                let dv = wrap(y.0[1] - x.0[1], l2).abs();
                du >= 0.5 * l1 - CUT_MARGIN || dv >= 0.5 * l2 - CUT_MARGIN
            }
        }
    }

    /// All minimizing geodesics from x to y, or a one-parameter family
    /// descriptor for antipodal sphere pairs.
    pub fn minimizing_geodesics(&self, x: &Point, y: &Point) -> MinimizingGeodesics {
        let xn = self.normalize(*x);
        let yn = self.normalize(*y);
        match *self {
            ManifoldModel::Circle { radius } => {
                let delta = wrap(yn.0[0] - xn.0[0], 2.0 * PI);
                if (delta.abs() - PI).abs() * radius <= CUT_MARGIN {
                    MinimizingGeodesics::Discrete(vec![
                        self.circle_arc(xn, PI),
                        self.circle_arc(xn, -PI),
                    ])
                } else {
                    MinimizingGeodesics::Discrete(vec![self.circle_arc(xn, delta)])
                }
            }
            ManifoldModel::FlatTorus2 { lengths: [l1, l2] } => {
                let cands = |d: f64, l: f64| -> Vec<f64> {
                    let w = wrap(d, l);
                    if (w.abs() - 0.5 * l).abs() <= CUT_MARGIN {
                        vec![0.5 * l, -0.5 * l]
                    } else {
                        vec![w]
                    }
                };
                let mut geods = Vec::new();
                for &du in &cands(yn.0[0] - xn.0[0], l1) {
                    for &dv in &cands(yn.0[1] - xn.0[1], l2) {
                        geods.push(Geodesic {
                            model: *self,
                            from: xn,
                            to: yn,
                            length: du.hypot(dv),
                            data: GeodesicData::TorusLine {
                                start: [xn.0[0], xn.0[1]],
                                disp: [du, dv],
                            },
                        });
                    }
                }
                MinimizingGeodesics::Discrete(geods)
            }
            ManifoldModel::Sphere2 { radius } => {
                let d = self.distance(&xn, &yn);
                if d >= PI * radius - CUT_MARGIN {
                    let base = unit_vec3(&xn);
                    let (e1, e2) = orthonormal_frame(base);
                    MinimizingGeodesics::Family(GeodesicFamily {
                        model: *self,
                        from: xn,
                        to: yn,
                        base,
                        e1,
                        e2,
                    })
                } else {
                    let a = unit_vec3(&xn);
                    let b = unit_vec3(&yn);
                    let angle = d / radius;
                    let tangent = if angle < 1e-14 {
                        orthonormal_frame(a).0
                    } else {
                        // component of b orthogonal to a, normalized
                        normalize3(add3(b, scale3(a, -dot(a, b))))
                    };
                    MinimizingGeodesics::Discrete(vec![Geodesic {
                        model: *self,
                        from: xn,
                        to: yn,
                        length: d,
                        data: GeodesicData::SphereArc { base: a, tangent, angle },
                    }])
                }
            }
        }
    }

    fn circle_arc(&self, from: Point, arc: f64) -> Geodesic {
        let radius = match *self {
            ManifoldModel::Circle { radius } => radius,
            _ => unreachable!(),
        };
        Geodesic {
            model: *self,
            from,
            to: self.normalize(Point::angle(from.0[0] + arc)),
            length: radius * arc.abs(),
            data: GeodesicData::CircleArc { theta0: from.0[0], arc },
        }
    }

    /// Van Vleck determinant: 1 on flat models, sin(r/R)/(r/R) on the sphere.
    pub fn van_vleck_theta(&self, x: &Point, y: &Point) -> Result<f64> {
        match *self {
            ManifoldModel::FlatTorus2 { .. } => Ok(1.0),
            ManifoldModel::Circle { .. } => {
                if self.is_cut_pair(x, y) {
                    Err(Error::CutPair {
                        distance: self.distance(x, y),
                        inj: self.injectivity_radius(),
                    })
                } else {
                    Ok(1.0)
                }
            }
            ManifoldModel::Sphere2 { radius } => {
                if self.is_cut_pair(x, y) {
                    return Err(Error::CutPair {
                        distance: self.distance(x, y),
                        inj: self.injectivity_radius(),
                    });
                }
                let r_hat = self.distance(x, y) / radius;
                Ok(sinc(r_hat))
            }
        }
    }

    /// Quadrature grid approximating the Riemannian volume measure.
    ///
    /// Circle: equispaced; torus: equispaced product (resolution^2 nodes);
    /// sphere: Gauss-Legendre in cos(theta) crossed with 2*resolution
    /// equispaced longitudes.
    pub fn build_grid(&self, resolution: usize) -> Result<QuadratureGrid> {
        if resolution < 4 {
            return Err(Error::ResolutionTooSmall(resolution));
        }
        match *self {
            ManifoldModel::Circle { radius } => {
                let n = resolution;
                let w = 2.0 * PI * radius / n as f64;
                let nodes = (0..n)
                    .map(|i| Point::angle(2.0 * PI * i as f64 / n as f64))
                    .collect();
                Ok(QuadratureGrid {
                    model: *self,
                    nodes,
                    weights: vec![w; n],
                    layout: GridLayout::Circle { n },
                })
            }
            ManifoldModel::FlatTorus2 { lengths: [l1, l2] } => {
                let n = resolution;
                let w = l1 * l2 / (n * n) as f64;
                let mut nodes = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        nodes.push(Point::uv(l1 * i as f64 / n as f64, l2 * j as f64 / n as f64));
                    }
                }
                Ok(QuadratureGrid {
                    model: *self,
                    nodes,
                    weights: vec![w; n * n],
                    layout: GridLayout::TorusTensor { n1: n, n2: n },
                })
            }
            ManifoldModel::Sphere2 { radius } => {
                let n_lat = resolution;
                let n_phi = 2 * resolution;
                let (mu, glw) = gauss_legendre(n_lat);
                let ring_w: Vec<f64> = glw
                    .iter()
                    .map(|w| w * 2.0 * PI * radius * radius / n_phi as f64)
                    .collect();
                // list rings north to south: theta ascending = mu descending
                let mut nodes = Vec::with_capacity(n_lat * n_phi);
                let mut weights = Vec::with_capacity(n_lat * n_phi);
                for a in 0..n_lat {
                    let theta = mu[n_lat - 1 - a].acos();
                    for p in 0..n_phi {
                        nodes.push(Point::sphere(theta, 2.0 * PI * p as f64 / n_phi as f64));
                        weights.push(ring_w[n_lat - 1 - a]);
                    }
                }
                Ok(QuadratureGrid {
                    model: *self,
                    nodes,
                    weights,
                    layout: GridLayout::SphereRings { n_lat, n_phi },
                })
            }
        }
    }

    /// Uniformly distributed random point (with respect to the volume measure).
    pub fn random_point(&self, rng: &mut SplitMix64) -> Point {
        match *self {
            ManifoldModel::Circle { .. } => Point::angle(rng.uniform(0.0, 2.0 * PI)),
            ManifoldModel::FlatTorus2 { lengths: [l1, l2] } => {
                Point::uv(rng.uniform(0.0, l1), rng.uniform(0.0, l2))
            }
            ManifoldModel::Sphere2 { .. } => {
                let c = rng.uniform(-1.0, 1.0);
                Point::sphere(c.acos(), rng.uniform(0.0, 2.0 * PI))
            }
        }
    }

    /// Chart centered at `p` whose differential is an isometry at the center
    /// (arc-length chart on the circle, translation on the torus, exponential
    /// chart on the sphere). Used for finite-difference Hessians.
    pub fn chart_at(&self, p: &Point) -> Chart {
        Chart {
            model: *self,
            center: self.normalize(*p),
        }
    }
}

fn orthonormal_frame(n: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let pick = if n[2].abs() < 0.9 {
        [0.0, 0.0, 1.0]
    } else {
        [1.0, 0.0, 0.0]
    };
    let e1 = normalize3(cross(pick, n));
    let e2 = cross(n, e1);
    (e1, e2)
}

#[derive(Debug, Clone)]
enum GeodesicData {
    CircleArc { theta0: f64, arc: f64 },
    TorusLine { start: [f64; 2], disp: [f64; 2] },
    SphereArc { base: [f64; 3], tangent: [f64; 3], angle: f64 },
}

/// Constant-speed minimizing geodesic on [0, 1].
#[derive(Debug, Clone)]
pub struct Geodesic {
    pub model: ManifoldModel,
    pub from: Point,
    pub to: Point,
    pub length: f64,
    data: GeodesicData,
}

impl Geodesic {
    pub fn point_at(&self, s: f64) -> Point {
        match &self.data {
            GeodesicData::CircleArc { theta0, arc } => {
                self.model.normalize(Point::angle(theta0 + s * arc))
            }
            GeodesicData::TorusLine { start, disp } => self
                .model
                .normalize(Point::uv(start[0] + s * disp[0], start[1] + s * disp[1])),
            GeodesicData::SphereArc { base, tangent, angle } => {
                let a = s * angle;
                let v = add3(scale3(*base, a.cos()), scale3(*tangent, a.sin()));
                vec3_to_point(v)
            }
        }
    }
}

/// One-parameter family of minimizing geodesics (antipodal sphere pairs):
/// the initial direction cos(psi) e1 + sin(psi) e2 sweeps the whole circle.
#[derive(Debug, Clone)]
pub struct GeodesicFamily {
    pub model: ManifoldModel,
    pub from: Point,
    pub to: Point,
    base: [f64; 3],
    e1: [f64; 3],
    e2: [f64; 3],
}

impl GeodesicFamily {
    pub fn dimension(&self) -> usize {
        1
    }

    pub fn at(&self, psi: f64) -> Geodesic {
        let tangent = add3(scale3(self.e1, psi.cos()), scale3(self.e2, psi.sin()));
        Geodesic {
            model: self.model,
            from: self.from,
            to: self.to,
            length: self.model.distance(&self.from, &self.to),
            data: GeodesicData::SphereArc {
                base: self.base,
                tangent,
                angle: PI,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub enum MinimizingGeodesics {
    Discrete(Vec<Geodesic>),
    Family(GeodesicFamily),
}

impl MinimizingGeodesics {
    /// Number of connected components of the minimizing set.
    pub fn component_count(&self) -> usize {
        match self {
            MinimizingGeodesics::Discrete(v) => v.len(),
            MinimizingGeodesics::Family(_) => 1,
        }
    }
}

/// How grid nodes are arranged; structured convolution paths rely on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridLayout {
    Circle { n: usize },
    TorusTensor { n1: usize, n2: usize },
    SphereRings { n_lat: usize, n_phi: usize },
}

/// Nodes and positive weights that sum to vol(M).
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub model: ManifoldModel,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    pub layout: GridLayout,
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub(crate) fn same_grid(&self, other: &QuadratureGrid) -> bool {
        self.model == other.model && self.layout == other.layout && self.len() == other.len()
    }
}

/// Local chart with an isometric differential at its center.
#[derive(Debug, Clone)]
pub struct Chart {
    model: ManifoldModel,
    center: Point,
}

impl Chart {
    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    /// Map chart coordinates (lengths) to a manifold point.
    pub fn map(&self, v: &[f64]) -> Point {
        match self.model {
            ManifoldModel::Circle { radius } => self
                .model
                .normalize(Point::angle(self.center.0[0] + v[0] / radius)),
            ManifoldModel::FlatTorus2 { .. } => self
                .model
                .normalize(Point::uv(self.center.0[0] + v[0], self.center.0[1] + v[1])),
            ManifoldModel::Sphere2 { radius } => {
                let rho = v[0].hypot(v[1]) / radius;
                if rho < 1e-300 {
                    return self.center;
                }
                let n = unit_vec3(&self.center);
                let (e1, e2) = orthonormal_frame(n);
                let dir = normalize3(add3(scale3(e1, v[0]), scale3(e2, v[1])));
                vec3_to_point(add3(scale3(n, rho.cos()), scale3(dir, rho.sin())))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn model_constants_examples() {
        let c = ManifoldModel::circle(1.0).constants();
        assert_eq!(c.dim, 1);
        assert_abs_diff_eq!(c.inj, PI);
        assert_abs_diff_eq!(c.diam, PI);
        assert_abs_diff_eq!(c.vol, 2.0 * PI);

        let s = ManifoldModel::sphere(2.0).constants();
        assert_eq!(s.dim, 2);
        assert_abs_diff_eq!(s.inj, 2.0 * PI);
        assert_abs_diff_eq!(s.diam, 2.0 * PI);
        assert_abs_diff_eq!(s.vol, 16.0 * PI);

        let t = ManifoldModel::torus(1.0, 1.0).constants();
        assert_eq!(t.dim, 2);
        assert_abs_diff_eq!(t.inj, 0.5);
        assert_abs_diff_eq!(t.diam, (2.0f64).sqrt() / 2.0);
        assert_abs_diff_eq!(t.vol, 1.0);
    }

    #[test]
    fn distance_examples() {
        let c = ManifoldModel::circle(1.0);
        assert_abs_diff_eq!(
            c.distance(&Point::angle(0.0), &Point::angle(PI)),
            PI,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            c.distance(&Point::angle(0.0), &Point::angle(1.5 * PI)),
            0.5 * PI,
            epsilon = 1e-15
        );
        let s = ManifoldModel::sphere(1.0);
        assert_abs_diff_eq!(
            s.distance(&Point::sphere(0.5 * PI, 0.0), &Point::sphere(0.5 * PI, 0.5 * PI)),
            0.5 * PI,
            epsilon = 1e-14
        );
    }

    #[test]
    fn distance_symmetry_and_triangle_inequality() {
        let models = [
            ManifoldModel::circle(1.3),
            ManifoldModel::torus(1.0, 2.0),
            ManifoldModel::sphere(0.8),
        ];
        let mut rng = SplitMix64::new(2024);
        for m in &models {
            for _ in 0..1000 {
                let x = m.random_point(&mut rng);
                let y = m.random_point(&mut rng);
                let z = m.random_point(&mut rng);
                let dxy = m.distance(&x, &y);
                let dyx = m.distance(&y, &x);
                assert!((dxy - dyx).abs() <= 1e-12);
                assert!(dxy <= m.diameter() + 1e-12);
                assert!(dxy <= m.distance(&x, &z) + m.distance(&z, &y) + 1e-12);
            }
        }
    }

    #[test]
    fn geodesic_counts_and_lengths() {
        let c = ManifoldModel::circle(1.0);
        match c.minimizing_geodesics(&Point::angle(0.0), &Point::angle(0.5 * PI)) {
            MinimizingGeodesics::Discrete(g) => {
                assert_eq!(g.len(), 1);
                assert_abs_diff_eq!(g[0].length, 0.5 * PI, epsilon = 1e-14);
            }
            _ => panic!("expected discrete"),
        }
        match c.minimizing_geodesics(&Point::angle(0.0), &Point::angle(PI)) {
            MinimizingGeodesics::Discrete(g) => {
                assert_eq!(g.len(), 2);
                for gi in &g {
                    assert_abs_diff_eq!(gi.length, PI, epsilon = 1e-14);
                }
            }
            _ => panic!("expected discrete"),
        }
        let s = ManifoldModel::sphere(1.0);
        match s.minimizing_geodesics(&Point::sphere(0.0, 0.0), &Point::sphere(PI, 0.0)) {
            MinimizingGeodesics::Family(f) => {
                assert_eq!(f.dimension(), 1);
                let g = f.at(1.234);
                assert_abs_diff_eq!(g.length, PI, epsilon = 1e-12);
                // endpoints reproduced
                let p0 = g.point_at(0.0);
                let p1 = g.point_at(1.0);
                assert!(s.distance(&p0, &Point::sphere(0.0, 0.0)) < 1e-12);
                assert!(s.distance(&p1, &Point::sphere(PI, 0.0)) < 1e-12);
            }
            _ => panic!("expected family"),
        }
    }

    #[test]
    fn torus_lattice_shift_minimizers() {
        let t = ManifoldModel::torus(1.0, 1.0);
        // opposite corner: both axes tie -> 4 minimizers
        match t.minimizing_geodesics(&Point::uv(0.0, 0.0), &Point::uv(0.5, 0.5)) {
            MinimizingGeodesics::Discrete(g) => {
                assert_eq!(g.len(), 4);
                for gi in &g {
                    assert_abs_diff_eq!(gi.length, (0.5f64).hypot(0.5), epsilon = 1e-14);
                }
            }
            _ => panic!("expected discrete"),
        }
        // one axis ties -> 2 minimizers
        match t.minimizing_geodesics(&Point::uv(0.0, 0.0), &Point::uv(0.5, 0.2)) {
            MinimizingGeodesics::Discrete(g) => assert_eq!(g.len(), 2),
            _ => panic!("expected discrete"),
        }
    }

    #[test]
    fn geodesic_endpoints_and_midpoint_property() {
        let models = [
            ManifoldModel::circle(1.0),
            ManifoldModel::torus(1.0, 2.0),
            ManifoldModel::sphere(1.0),
        ];
        let mut rng = SplitMix64::new(99);
        for m in &models {
            for _ in 0..200 {
                let x = m.random_point(&mut rng);
                let y = m.random_point(&mut rng);
                if m.is_cut_pair(&x, &y) {
                    continue;
                }
                let geods = match m.minimizing_geodesics(&x, &y) {
                    MinimizingGeodesics::Discrete(g) => g,
                    MinimizingGeodesics::Family(_) => continue,
                };
                for g in &geods {
                    let d = m.distance(&x, &y);
                    assert_abs_diff_eq!(g.length, d, epsilon = 1e-12);
                    let p0 = g.point_at(0.0);
                    let p1 = g.point_at(1.0);
                    assert!(m.distance(&p0, &m.normalize(x)) < 1e-12);
                    assert!(m.distance(&p1, &m.normalize(y)) < 1e-12);
                    let mid = g.point_at(0.5);
                    assert_abs_diff_eq!(m.distance(&x, &mid), 0.5 * d, epsilon = 1e-10);
                    assert_abs_diff_eq!(m.distance(&mid, &y), 0.5 * d, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn van_vleck_flat_and_limits() {
        let t = ManifoldModel::torus(1.0, 2.0);
        let mut rng = SplitMix64::new(5);
        for _ in 0..50 {
            let x = t.random_point(&mut rng);
            let y = t.random_point(&mut rng);
            if !t.is_cut_pair(&x, &y) {
                assert_eq!(t.van_vleck_theta(&x, &y).unwrap(), 1.0);
            }
        }
        let s = ManifoldModel::sphere(1.0);
        let x = Point::sphere(0.3, 0.1);
        assert_abs_diff_eq!(s.van_vleck_theta(&x, &x).unwrap(), 1.0, epsilon = 1e-15);
        // r = pi/2 on the unit sphere
        let a = Point::sphere(0.5 * PI, 0.0);
        let b = Point::sphere(0.5 * PI, 0.5 * PI);
        assert_abs_diff_eq!(
            s.van_vleck_theta(&a, &b).unwrap(),
            2.0 / PI,
            epsilon = 1e-14
        );
        // cut pair errors
        let n = Point::sphere(0.0, 0.0);
        let sp = Point::sphere(PI, 0.0);
        assert!(matches!(
            s.van_vleck_theta(&n, &sp),
            Err(Error::CutPair { .. })
        ));
    }

    /// Independent oracle: integrate the Jacobi determinant ODE
    /// J'' = -K J along the geodesic and compare Theta = J(r)/r.
    fn theta_jacobi_oracle(radius: f64, r: f64) -> f64 {
        let k = 1.0 / (radius * radius);
        let n_steps = 4000;
        let h = r / n_steps as f64;
        let mut j = 0.0f64;
        let mut dj = 1.0f64;
        let f = |_: f64, j: f64| -k * j;
        let mut s = 0.0;
        for _ in 0..n_steps {
            // RK4 on (J, J')
            let k1 = (dj, f(s, j));
            let k2 = (dj + 0.5 * h * k1.1, f(s + 0.5 * h, j + 0.5 * h * k1.0));
            let k3 = (dj + 0.5 * h * k2.1, f(s + 0.5 * h, j + 0.5 * h * k2.0));
            let k4 = (dj + h * k3.1, f(s + h, j + h * k3.0));
            j += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            dj += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            s += h;
        }
        j / r
    }

    #[test]
    fn van_vleck_matches_jacobi_ode_oracle() {
        let s = ManifoldModel::sphere(1.0);
        let mut rng = SplitMix64::new(77);
        let mut tested = 0;
        while tested < 100 {
            let x = s.random_point(&mut rng);
            let y = s.random_point(&mut rng);
            if s.is_cut_pair(&x, &y) || s.distance(&x, &y) < 1e-3 {
                continue;
            }
            let theta = s.van_vleck_theta(&x, &y).unwrap();
            let oracle = theta_jacobi_oracle(1.0, s.distance(&x, &y));
            assert!(
                (theta - oracle).abs() / oracle.abs() < 1e-8,
                "theta {theta} vs oracle {oracle}"
            );
            tested += 1;
        }
        // non-unit radius
        let s2 = ManifoldModel::sphere(2.5);
        let x = Point::sphere(0.2, 0.0);
        let y = Point::sphere(1.4, 1.0);
        let theta = s2.van_vleck_theta(&x, &y).unwrap();
        let oracle = theta_jacobi_oracle(2.5, s2.distance(&x, &y));
        assert!((theta - oracle).abs() / oracle < 1e-8);
    }

    #[test]
    fn grid_examples_and_weight_sums() {
        let c = ManifoldModel::circle(1.0).build_grid(8).unwrap();
        assert_eq!(c.len(), 8);
        for w in &c.weights {
            assert_abs_diff_eq!(*w, PI / 4.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(c.weights.iter().sum::<f64>(), 2.0 * PI, epsilon = 1e-12);

        let t = ManifoldModel::torus(1.0, 2.0).build_grid(10).unwrap();
        assert_eq!(t.len(), 100);
        for w in &t.weights {
            assert_abs_diff_eq!(*w, 0.02, epsilon = 1e-16);
        }
        assert_abs_diff_eq!(t.weights.iter().sum::<f64>(), 2.0, epsilon = 1e-12);

        let s = ManifoldModel::sphere(1.0).build_grid(16).unwrap();
        assert_eq!(s.len(), 16 * 32);
        let sum: f64 = s.weights.iter().sum();
        assert!((sum - 4.0 * PI).abs() / (4.0 * PI) < 1e-10);

        for res in [4usize, 7, 23, 40] {
            for m in [
                ManifoldModel::circle(0.7),
                ManifoldModel::torus(2.0, 0.5),
                ManifoldModel::sphere(1.9),
            ] {
                let g = m.build_grid(res).unwrap();
                let sum: f64 = g.weights.iter().sum();
                assert!((sum - m.volume()).abs() / m.volume() < 1e-10);
                assert!(g.weights.iter().all(|w| *w > 0.0));
            }
        }

        assert!(matches!(
            ManifoldModel::circle(1.0).build_grid(3),
            Err(Error::ResolutionTooSmall(3))
        ));
    }

    #[test]
    fn chart_is_isometric_at_center() {
        let models = [
            ManifoldModel::circle(2.0),
            ManifoldModel::torus(1.0, 2.0),
            ManifoldModel::sphere(1.5),
        ];
        let mut rng = SplitMix64::new(31);
        for m in &models {
            for _ in 0..20 {
                let p = m.random_point(&mut rng);
                let chart = m.chart_at(&p);
                let h = 1e-5;
                let dim = chart.dim();
                for i in 0..dim {
                    let mut v = vec![0.0; dim];
                    v[i] = h;
                    let q = chart.map(&v);
                    // distance from center equals chart norm to second order
                    assert_abs_diff_eq!(m.distance(&p, &q), h, epsilon = 1e-12);
                }
                if dim == 2 {
                    // orthogonality: diagonal displacement has length h*sqrt(2)
                    let q = chart.map(&[h, h]);
                    assert_abs_diff_eq!(
                        m.distance(&p, &q),
                        h * (2.0f64).sqrt(),
                        epsilon = 1e-11
                    );
                }
            }
        }
    }

    #[test]
    fn normalization_idempotent_and_in_domain() {
        let s = ManifoldModel::sphere(1.0);
        let p = s.normalize(Point::sphere(-0.3, 7.0));
        assert!((0.0..=PI).contains(&p.0[0]));
        assert!((0.0..2.0 * PI).contains(&p.0[1]));
        let p2 = s.normalize(p);
        assert!(s.distance(&p, &p2) < 1e-12);

        let c = ManifoldModel::circle(1.0);
        let q = c.normalize(Point::angle(-0.5));
        assert!((0.0..2.0 * PI).contains(&q.0[0]));
        assert_abs_diff_eq!(q.0[0], 2.0 * PI - 0.5, epsilon = 1e-12);
    }
}
