//! Finite families of eigenmodes for the supported domains.
//!
//! Points are passed in the native coordinates of the domain:
//! Cartesian `(x_1, .., x_n)` on the orthotope `(0, pi)^n`, polar `(r, theta)`
//! on the disk, and `(r)` for the radial reduction.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::gamma_weight;
use crate::quadrature::{midpoints, CompositeGauss};
use crate::special_fn::{bessel_j, bessel_j_prime, BesselZeroTable};

/// A point in the native coordinates of a domain (unused slots are zero).
pub type Point = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DomainKind {
    Interval,
    Orthotope { dim: usize },
    Disk,
    DiskRadial,
    StokesDisk,
}

impl DomainKind {
    /// Lebesgue measure of the domain (the radial reduction uses `r dr`).
    pub fn measure(&self) -> f64 {
        match *self {
            DomainKind::Interval => PI,
            DomainKind::Orthotope { dim } => PI.powi(dim as i32),
            DomainKind::Disk | DomainKind::StokesDisk => PI,
            DomainKind::DiskRadial => 0.5,
        }
    }

    pub fn dimension(&self) -> usize {
        match *self {
            DomainKind::Interval | DomainKind::DiskRadial => 1,
            DomainKind::Orthotope { dim } => dim,
            DomainKind::Disk | DomainKind::StokesDisk => 2,
        }
    }

    pub fn is_disk_family(&self) -> bool {
        matches!(
            self,
            DomainKind::Disk | DomainKind::DiskRadial | DomainKind::StokesDisk
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Dirichlet,
    /// Neumann Laplacian restricted to zero-average functions.
    NeumannZeroAverage,
}

/// Mode counts per index family. On the orthotope every axis index runs up
/// to `j_max`; on the disk `j` runs over `0..=j_max` and `k` over
/// `1..=k_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub j_max: usize,
    pub k_max: usize,
}

impl Truncation {
    /// Truncation of order `n`: every index bounded by `n`.
    pub fn order(n: usize) -> Self {
        Self { j_max: n, k_max: n }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisSpec {
    pub domain: DomainKind,
    pub boundary: Boundary,
    pub alpha: f64,
    pub truncation: Truncation,
    /// Number of radial midpoint cells of the working quadrature used to
    /// normalize the disk radial profiles.
    pub radial_nodes: usize,
}

impl BasisSpec {
    pub fn new(domain: DomainKind, alpha: f64, order: usize) -> Self {
        Self {
            domain,
            boundary: Boundary::Dirichlet,
            alpha,
            truncation: Truncation::order(order),
            radial_nodes: 256,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::Config(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if self.truncation.j_max < 1 || self.truncation.k_max < 1 {
            return Err(Error::Config("truncation counts must be >= 1".into()));
        }
        if let DomainKind::Orthotope { dim } = self.domain {
            if dim < 1 {
                return Err(Error::Config("orthotope dimension must be >= 1".into()));
            }
        }
        if self.boundary == Boundary::NeumannZeroAverage
            && !matches!(
                self.domain,
                DomainKind::Orthotope { .. } | DomainKind::Interval
            )
        {
            return Err(Error::Config(
                "the zero-average Neumann basis is only available on the orthotope".into(),
            ));
        }
        if self.domain.is_disk_family() && self.radial_nodes < 8 {
            return Err(Error::Config("radial_nodes must be >= 8".into()));
        }
        Ok(())
    }
}

/// Label of an eigenmode.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModeIndex {
    /// `(j_1, .., j_n)` on the orthotope.
    Multi(Vec<usize>),
    /// `(j, k, m)` on the disk or for the Stokes disk.
    Disk { j: usize, k: usize, m: usize },
    /// `(j, k)` of the radial reduction.
    Radial { j: usize, k: usize },
}

impl ModeIndex {
    /// Whether the mode belongs to the truncation of order `n`.
    pub fn within_order(&self, n: usize) -> bool {
        match self {
            ModeIndex::Multi(js) => js.iter().all(|&j| j <= n),
            ModeIndex::Disk { j, k, .. } | ModeIndex::Radial { j, k } => *j <= n && *k <= n,
        }
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeIndex::Multi(js) => {
                let parts: Vec<String> = js.iter().map(|j| j.to_string()).collect();
                write!(f, "({})", parts.join(","))
            }
            ModeIndex::Disk { j, k, m } => write!(f, "({j},{k},{m})"),
            ModeIndex::Radial { j, k } => write!(f, "({j},{k})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Angular {
    /// `1 / (2 pi)` for `j = 0`.
    Constant,
    Cos,
    Sin,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    /// Products of `sqrt(2/pi) sin(j x)` (or cosines, `1/sqrt(pi)` for `j = 0`).
    Product { freqs: Vec<usize>, cosine: bool, scale: f64 },
    Disk { j: usize, zero: f64, inv_norm: f64, angular: Angular },
    Radial { j: usize, zero: f64, inv_norm: f64 },
    Stokes { j: usize, zero: f64, m: usize, inv_norm: f64 },
}

/// One eigenpair with its observation weight.
#[derive(Debug, Clone)]
pub struct EigenMode {
    pub index: ModeIndex,
    /// Eigenvalue `mu` of the (Dirichlet or Neumann) Laplacian.
    pub base_eigenvalue: f64,
    /// `lambda = mu^alpha`.
    pub eigenvalue: f64,
    /// `gamma(T)`; `None` when `exp(2 lambda T)` overflows.
    pub weight: Option<f64>,
    shape: Shape,
}

impl EigenMode {
    /// `|phi(x)|^2` (Euclidean norm squared for vector Stokes modes).
    pub fn sq_value(&self, p: &Point) -> f64 {
        match &self.shape {
            Shape::Stokes { j, zero, m, inv_norm } => {
                let (ur, ut) = stokes_components(*j, *zero, *m, p[0], p[1]);
                (ur * ur + ut * ut) * inv_norm
            }
            _ => {
                let v = self.scalar(p);
                v * v
            }
        }
    }

    /// Signed value of a scalar mode; `None` for vector-valued modes.
    pub fn value(&self, p: &Point) -> Option<f64> {
        match self.shape {
            Shape::Stokes { .. } => None,
            _ => Some(self.scalar(p)),
        }
    }

    pub fn is_scalar(&self) -> bool {
        !matches!(self.shape, Shape::Stokes { .. })
    }

    /// Velocity components `(u_x, u_y)` of a Stokes mode at `(r, theta)`.
    pub fn stokes_velocity(&self, p: &Point) -> Option<(f64, f64)> {
        match self.shape {
            Shape::Stokes { j, zero, m, inv_norm } => {
                let (ur, ut) = stokes_components(j, zero, m, p[0], p[1]);
                let s = inv_norm.sqrt();
                let (sin, cos) = p[1].sin_cos();
                Some((s * (ur * cos - ut * sin), s * (ur * sin + ut * cos)))
            }
            _ => None,
        }
    }

    fn scalar(&self, p: &Point) -> f64 {
        match &self.shape {
            Shape::Product { freqs, cosine, scale } => {
                let mut v = *scale;
                for (x, &j) in p.iter().zip(freqs) {
                    let jx = j as f64 * x;
                    v *= if *cosine { jx.cos() } else { jx.sin() };
                }
                v
            }
            Shape::Disk { j, zero, inv_norm, angular } => {
                let radial = bessel_j(*j, zero * p[0]).unwrap_or(0.0) * inv_norm.sqrt();
                let jt = *j as f64 * p[1];
                let ang = match angular {
                    Angular::Constant => (2.0 * PI).sqrt().recip(),
                    Angular::Cos => jt.cos() / PI.sqrt(),
                    Angular::Sin => jt.sin() / PI.sqrt(),
                };
                radial * ang
            }
            Shape::Radial { j, zero, inv_norm } => {
                bessel_j(*j, zero * p[0]).unwrap_or(0.0) * inv_norm.sqrt()
            }
            Shape::Stokes { .. } => f64::NAN,
        }
    }
}

/// Radial and angular velocity components of an unnormalized Stokes mode.
///
/// `j = 0`: azimuthal field `J_1(z r)`. `j >= 1`: with `f(r) = J_j(z r) - J_j(z) r^j`,
/// `u_r = j (-1)^(m+1) Y_m f / r` and `u_theta = -f' Y_(m+1)`, with the
/// cyclic convention `Y_3 = Y_1`.
fn stokes_components(j: usize, zero: f64, m: usize, r: f64, theta: f64) -> (f64, f64) {
    if j == 0 {
        return (0.0, bessel_j(1, zero * r).unwrap_or(0.0));
    }
    let jf = j as f64;
    let jt = jf * theta;
    let y = |mm: usize| if mm == 1 { jt.cos() } else { jt.sin() } / PI.sqrt();
    let next = if m == 1 { 2 } else { 1 };
    let sign = if m == 1 { 1.0 } else { -1.0 };
    let jz = bessel_j(j, zero).unwrap_or(0.0);
    let f_over_r = if r > 1e-12 {
        (bessel_j(j, zero * r).unwrap_or(0.0) - jz * r.powi(j as i32)) / r
    } else {
        // f(r)/r -> (z/2) for j = 1 and 0 otherwise.
        if j == 1 {
            0.5 * zero
        } else {
            0.0
        }
    };
    let df = zero * bessel_j_prime(j, zero * r).unwrap_or(0.0) - jf * jz * r.powi(j as i32 - 1);
    (jf * sign * y(m) * f_over_r, -df * y(next))
}

/// An ordered family of modes (nondecreasing eigenvalue, lexicographic ties).
#[derive(Debug, Clone)]
pub struct Basis {
    pub spec: BasisSpec,
    pub horizon: f64,
    pub modes: Vec<EigenMode>,
}

impl Basis {
    /// Builds the basis described by `spec` with weights at horizon `t`.
    pub fn build(spec: &BasisSpec, t: f64) -> Result<Self> {
        spec.validate()?;
        if !(t > 0.0) {
            return Err(Error::Config(format!("T must be > 0, got {t}")));
        }
        let modes = match spec.domain {
            DomainKind::Interval => make_orthotope_basis(spec, 1, t)?,
            DomainKind::Orthotope { dim } => make_orthotope_basis(spec, dim, t)?,
            DomainKind::Disk => make_disk_basis(spec, t)?,
            DomainKind::DiskRadial => make_radial_disk_basis(spec, t)?,
            DomainKind::StokesDisk => make_stokes_disk_basis(spec, t)?,
        };
        Ok(Self { spec: spec.clone(), horizon: t, modes })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

fn weight_of(lambda: f64, t: f64) -> Option<f64> {
    gamma_weight(lambda, t).ok()
}

fn sort_modes(modes: &mut [EigenMode]) {
    modes.sort_by(|a, b| {
        a.eigenvalue
            .partial_cmp(&b.eigenvalue)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.index.cmp(&b.index))
    });
}

/// Sine (Dirichlet) or zero-average cosine (Neumann) products on `(0, pi)^dim`.
pub fn make_orthotope_basis(spec: &BasisSpec, dim: usize, t: f64) -> Result<Vec<EigenMode>> {
    spec.validate()?;
    if dim < 1 {
        return Err(Error::Config("orthotope dimension must be >= 1".into()));
    }
    let cosine = spec.boundary == Boundary::NeumannZeroAverage;
    let lo = if cosine { 0 } else { 1 };
    let hi = spec.truncation.j_max;
    let mut modes = Vec::new();
    let mut idx = vec![lo; dim];
    loop {
        if !(cosine && idx.iter().all(|&j| j == 0)) {
            let mu: f64 = idx.iter().map(|&j| (j * j) as f64).sum();
            let lambda = mu.powf(spec.alpha);
            let scale: f64 = idx
                .iter()
                .map(|&j| {
                    if j == 0 {
                        PI.sqrt().recip()
                    } else {
                        (2.0 / PI).sqrt()
                    }
                })
                .product();
            modes.push(EigenMode {
                index: ModeIndex::Multi(idx.clone()),
                base_eigenvalue: mu,
                eigenvalue: lambda,
                weight: weight_of(lambda, t),
                shape: Shape::Product { freqs: idx.clone(), cosine, scale },
            });
        }
        // odometer over lo..=hi, last axis fastest
        let mut axis = dim;
        loop {
            if axis == 0 {
                sort_modes(&mut modes);
                return Ok(modes);
            }
            axis -= 1;
            if idx[axis] < hi {
                idx[axis] += 1;
                break;
            }
            idx[axis] = lo;
        }
    }
}

/// `int_0^1 J_j(z r)^2 r dr` on the working midpoint quadrature.
fn radial_norm(j: usize, zero: f64, nodes: usize) -> Result<f64> {
    let h = 1.0 / nodes as f64;
    let mut s = 0.0;
    for r in midpoints(0.0, 1.0, nodes) {
        let v = bessel_j(j, zero * r)?;
        s += v * v * r * h;
    }
    Ok(s)
}

fn zero_table(spec: &BasisSpec, order_shift: usize) -> Result<BesselZeroTable> {
    BesselZeroTable::build(spec.truncation.j_max + order_shift, spec.truncation.k_max)
}

/// Dirichlet disk modes `R_{j,k}(r) Y_{j,m}(theta)` with `lambda = z_{j,k}^(2 alpha)`.
pub fn make_disk_basis(spec: &BasisSpec, t: f64) -> Result<Vec<EigenMode>> {
    spec.validate()?;
    let zeros = zero_table(spec, 0)?;
    let mut modes = Vec::new();
    for j in 0..=spec.truncation.j_max {
        for k in 1..=spec.truncation.k_max {
            let zero = zeros.get(j, k).expect("table covers the truncation");
            let inv_norm = radial_norm(j, zero, spec.radial_nodes)?.recip();
            let mu = zero * zero;
            let lambda = mu.powf(spec.alpha);
            let weight = weight_of(lambda, t);
            let angulars: &[Angular] = if j == 0 {
                &[Angular::Constant]
            } else {
                &[Angular::Cos, Angular::Sin]
            };
            for (m, &angular) in angulars.iter().enumerate() {
                modes.push(EigenMode {
                    index: ModeIndex::Disk { j, k, m: m + 1 },
                    base_eigenvalue: mu,
                    eigenvalue: lambda,
                    weight,
                    shape: Shape::Disk { j, zero, inv_norm, angular },
                });
            }
        }
    }
    sort_modes(&mut modes);
    Ok(modes)
}

/// Radial profiles `R_{j,k}` for the reduced problem on `(0, 1)` with measure `r dr`.
pub fn make_radial_disk_basis(spec: &BasisSpec, t: f64) -> Result<Vec<EigenMode>> {
    spec.validate()?;
    let zeros = zero_table(spec, 0)?;
    let mut modes = Vec::new();
    for j in 0..=spec.truncation.j_max {
        for k in 1..=spec.truncation.k_max {
            let zero = zeros.get(j, k).expect("table covers the truncation");
            let inv_norm = radial_norm(j, zero, spec.radial_nodes)?.recip();
            let mu = zero * zero;
            let lambda = mu.powf(spec.alpha);
            modes.push(EigenMode {
                index: ModeIndex::Radial { j, k },
                base_eigenvalue: mu,
                eigenvalue: lambda,
                weight: weight_of(lambda, t),
                shape: Shape::Radial { j, zero, inv_norm },
            });
        }
    }
    sort_modes(&mut modes);
    Ok(modes)
}

/// Stokes eigenfields on the unit disk with `lambda_{j,k} = z_{j+1,k}^2`.
///
/// The closed-form fields are normalized to unit `L^2` norm by a
/// high-order radial Gauss rule.
pub fn make_stokes_disk_basis(spec: &BasisSpec, t: f64) -> Result<Vec<EigenMode>> {
    spec.validate()?;
    if spec.alpha != 1.0 {
        return Err(Error::Config("the Stokes basis is only defined for alpha = 1".into()));
    }
    let zeros = zero_table(spec, 1)?;
    let quad = CompositeGauss::new(0.0, 1.0, 64, 10);
    let mut modes = Vec::new();
    for j in 0..=spec.truncation.j_max {
        for k in 1..=spec.truncation.k_max {
            let zero = zeros.get(j + 1, k).expect("table covers the truncation");
            let lambda = zero * zero;
            let weight = weight_of(lambda, t);
            let ms: &[usize] = if j == 0 { &[1] } else { &[1, 2] };
            for &m in ms {
                // int Y^2 dtheta = 1; the j = 0 field has no angular factor.
                let norm = if j == 0 {
                    2.0 * PI
                        * quad.integrate(|r| {
                            let v = bessel_j(1, zero * r).unwrap_or(0.0);
                            v * v * r
                        })
                } else {
                    let jf = j as f64;
                    let jz = bessel_j(j, zero)?;
                    quad.integrate(|r| {
                        let f = bessel_j(j, zero * r).unwrap_or(0.0) - jz * r.powi(j as i32);
                        let df = zero * bessel_j_prime(j, zero * r).unwrap_or(0.0)
                            - jf * jz * r.powi(j as i32 - 1);
                        (jf * jf * f * f / (r * r) + df * df) * r
                    })
                };
                modes.push(EigenMode {
                    index: ModeIndex::Disk { j, k, m },
                    base_eigenvalue: lambda,
                    eigenvalue: lambda,
                    weight,
                    shape: Shape::Stokes { j, zero, m, inv_norm: norm.recip() },
                });
            }
        }
    }
    sort_modes(&mut modes);
    Ok(modes)
}
