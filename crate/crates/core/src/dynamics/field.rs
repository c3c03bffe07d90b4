//! Complex wave fields on the two supported geometries.

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fiber::FiberTriple;
use crate::grid::{FiniteVolume, RadialField, RadialGridSpec};
use crate::params::{Dim, ModelParams};
use crate::scalar::Scalar;

/// Spatial discretisation of a wave field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub enum DynamicsGrid<T> {
    /// `[-L, L)` with `points = 2^k` samples, 1D only.
    Periodic { half_length: T, points: usize },
    /// `r_j = j·R/(points-1)`, reflective origin, Dirichlet at `R`.
    Radial { dim: Dim, radius: T, points: usize },
}

impl<T: Scalar> DynamicsGrid<T> {
    /// `L = 40`, 4096 points in 1D; `R = 40`, 8192 points otherwise.
    pub fn default_for(dim: Dim) -> Self {
        match dim {
            Dim::One => DynamicsGrid::Periodic {
                half_length: T::lit(40.0),
                points: 4096,
            },
            _ => DynamicsGrid::Radial {
                dim,
                radius: T::lit(40.0),
                points: 8192,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DynamicsGrid::Periodic { half_length, points } => {
                if !points.is_power_of_two() || points < 16 {
                    return Err(Error::Validation(format!(
                        "periodic grid needs 2^k >= 16 points, got {points}"
                    )));
                }
                if !(half_length > T::zero()) || !half_length.is_finite() {
                    return Err(Error::Validation("periodic half length must be positive".into()));
                }
            }
            DynamicsGrid::Radial { radius, points, .. } => {
                RadialGridSpec::new(points, radius)?;
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> Dim {
        match *self {
            DynamicsGrid::Periodic { .. } => Dim::One,
            DynamicsGrid::Radial { dim, .. } => dim,
        }
    }

    pub fn points(&self) -> usize {
        match *self {
            DynamicsGrid::Periodic { points, .. } | DynamicsGrid::Radial { points, .. } => points,
        }
    }

    pub fn spacing(&self) -> T {
        match *self {
            DynamicsGrid::Periodic { half_length, points } => T::lit(2.0) * half_length / T::from_usize_lossy(points),
            DynamicsGrid::Radial { radius, points, .. } => radius / T::from_usize_lossy(points - 1),
        }
    }

    /// Largest resolved wavenumber `π/Δx`.
    pub fn k_max(&self) -> T {
        T::PI() / self.spacing()
    }

    /// Coordinate of sample `j` (signed `x` or radius `r`).
    pub fn coord(&self, j: usize) -> T {
        match *self {
            DynamicsGrid::Periodic { half_length, .. } => -half_length + T::from_usize_lossy(j) * self.spacing(),
            DynamicsGrid::Radial { .. } => T::from_usize_lossy(j) * self.spacing(),
        }
    }
}

/// Quadrature and derivative machinery for one grid.
#[derive(Clone)]
pub(crate) enum Geometry<T: Scalar> {
    Periodic {
        dx: T,
        k2: Vec<T>,
        fft: Arc<dyn Fft<T>>,
        ifft: Arc<dyn Fft<T>>,
    },
    Radial {
        fv: FiniteVolume<T>,
    },
}

impl<T: Scalar> Geometry<T> {
    pub(crate) fn new(grid: &DynamicsGrid<T>) -> Result<Self> {
        grid.validate()?;
        Ok(match *grid {
            DynamicsGrid::Periodic { half_length, points } => {
                let mut planner = FftPlanner::new();
                let two_pi = T::lit(2.0) * T::PI();
                let k2 = (0..points)
                    .map(|m| {
                        let m = if m <= points / 2 {
                            T::from_usize_lossy(m)
                        } else {
                            -T::from_usize_lossy(points - m)
                        };
                        let k = two_pi * m / (T::lit(2.0) * half_length);
                        k * k
                    })
                    .collect();
                Geometry::Periodic {
                    dx: grid.spacing(),
                    k2,
                    fft: planner.plan_fft_forward(points),
                    ifft: planner.plan_fft_inverse(points),
                }
            }
            DynamicsGrid::Radial { dim, radius, points } => Geometry::Radial {
                fv: FiniteVolume::new(dim, RadialGridSpec::new(points, radius)?),
            },
        })
    }

    fn weight(&self, j: usize) -> T {
        match self {
            Geometry::Periodic { dx, .. } => *dx,
            Geometry::Radial { fv } => fv.w[j],
        }
    }

    pub(crate) fn integrate(&self, g: impl Fn(usize) -> T, n: usize) -> T {
        (0..n).map(|j| self.weight(j) * g(j)).sum()
    }

    /// `|∇ψ|²`: spectral in the periodic case, the finite-volume Dirichlet
    /// form in the radial case.
    pub(crate) fn grad2(&self, v: &[Complex<T>]) -> T {
        match self {
            Geometry::Periodic { dx, k2, fft, .. } => {
                let mut buf = v.to_vec();
                fft.process(&mut buf);
                let n = T::from_usize_lossy(v.len());
                buf.iter().zip(k2).map(|(c, &k)| k * c.norm_sqr()).sum::<T>() * *dx / n
            }
            Geometry::Radial { fv } => fv.dirichlet(|j| (v[j + 1] - v[j]).norm_sqr()),
        }
    }

    /// H¹ inner product `⟨a, b⟩ = ∫ a b̄ + ∇a·∇b̄`.
    pub(crate) fn h1_inner(&self, a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
        match self {
            Geometry::Periodic { dx, k2, fft, .. } => {
                let (mut fa, mut fb) = (a.to_vec(), b.to_vec());
                fft.process(&mut fa);
                fft.process(&mut fb);
                let n = T::from_usize_lossy(a.len());
                fa.iter()
                    .zip(&fb)
                    .zip(k2)
                    .map(|((x, y), &k)| x * y.conj() * (T::one() + k))
                    .sum::<Complex<T>>()
                    * (*dx / n)
            }
            Geometry::Radial { fv } => {
                let l2: Complex<T> = (0..a.len()).map(|j| a[j] * b[j].conj() * fv.w[j]).sum();
                let d: Complex<T> = (0..a.len() - 1)
                    .map(|j| (a[j + 1] - a[j]) * (b[j + 1] - b[j]).conj() * fv.k[j])
                    .sum();
                l2 + d
            }
        }
    }

    /// `max_y |⟨ψ, g(· - y)⟩_{H¹}|` over grid shifts (periodic) or the
    /// plain inner product modulus (radial).
    pub(crate) fn best_overlap(&self, psi: &[Complex<T>], g: &[Complex<T>]) -> T {
        match self {
            Geometry::Periodic { dx, k2, fft, ifft } => {
                let (mut fa, mut fb) = (psi.to_vec(), g.to_vec());
                fft.process(&mut fa);
                fft.process(&mut fb);
                let n = T::from_usize_lossy(psi.len());
                let mut c: Vec<Complex<T>> = fa
                    .iter()
                    .zip(&fb)
                    .zip(k2)
                    .map(|((x, y), &k)| x * y.conj() * (T::one() + k))
                    .collect();
                ifft.process(&mut c);
                c.iter().map(|z| z.norm()).fold(T::zero(), T::max) * *dx / n
            }
            Geometry::Radial { .. } => self.h1_inner(psi, g).norm(),
        }
    }
}

/// Complex field `ψ` sampled on a [`DynamicsGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct WaveField<T> {
    pub grid: DynamicsGrid<T>,
    pub values: Vec<Complex<T>>,
}

impl<T: Scalar> WaveField<T> {
    pub fn new(grid: DynamicsGrid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.points() {
            return Err(Error::Validation(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.points()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("non-finite wave field".into()));
        }
        Ok(WaveField { grid, values })
    }

    /// Sample a radial profile: even extension in the periodic case (zero
    /// outside the profile's radius), interpolation in the radial case.
    pub fn from_radial(field: &RadialField<T>, grid: DynamicsGrid<T>) -> Result<Self> {
        if field.dim != grid.dim() {
            return Err(Error::Validation(format!(
                "profile in dimension {} on a grid for dimension {}",
                field.dim,
                grid.dim()
            )));
        }
        let rmax = field.radius();
        let last = grid.points() - 1;
        let values = (0..grid.points())
            .map(|j| {
                let r = grid.coord(j).abs();
                let pinned = matches!(grid, DynamicsGrid::Radial { .. }) && j == last;
                let v = if r <= rmax && !pinned { field.eval(r) } else { T::zero() };
                Complex::new(v, T::zero())
            })
            .collect();
        WaveField::new(grid, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> Dim {
        self.grid.dim()
    }

    pub(crate) fn geometry(&self) -> Result<Geometry<T>> {
        Geometry::new(&self.grid)
    }

    pub fn modulus(&self) -> Vec<T> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scaled(&self, c: T) -> Self {
        WaveField {
            grid: self.grid,
            values: self.values.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn observables(&self, params: &ModelParams<T>) -> Result<Observables<T>> {
        Ok(Observables::compute(&self.geometry()?, self, params))
    }
}

/// Conserved and monitored quantities of a wave field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Observables<T> {
    pub mass2: T,
    pub grad2: T,
    pub mq: T,
    pub mp: T,
    pub energy: T,
    /// `∫ |x|² |ψ|²`.
    pub virial: T,
    pub pohozaev: T,
}

impl<T: Scalar> Observables<T> {
    pub(crate) fn compute(geo: &Geometry<T>, psi: &WaveField<T>, params: &ModelParams<T>) -> Self {
        let v = &psi.values;
        let n = v.len();
        let (p, q) = (params.p.value(), params.q.value());
        let mod2: Vec<T> = v.iter().map(|z| z.norm_sqr()).collect();
        let half = T::lit(0.5);
        let mass2 = geo.integrate(|j| mod2[j], n);
        let mp = geo.integrate(|j| mod2[j].powf(p * half), n);
        let mq = geo.integrate(|j| mod2[j].powf(q * half), n);
        let virial = geo.integrate(
            |j| {
                let x = psi.grid.coord(j);
                x * x * mod2[j]
            },
            n,
        );
        let grad2 = geo.grad2(v);
        let tr = FiberTriple { grad2, mq, mp, mass2 };
        Observables {
            mass2,
            grad2,
            mq,
            mp,
            energy: crate::fiber::energy(&tr, params),
            virial,
            pohozaev: crate::fiber::pohozaev(&tr, params),
        }
    }

    pub fn triple(&self) -> FiberTriple<T> {
        FiberTriple {
            grad2: self.grad2,
            mq: self.mq,
            mp: self.mp,
            mass2: self.mass2,
        }
    }
}
