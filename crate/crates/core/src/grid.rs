//! Uniform radial grids and N-dimensional radial quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::FiberTriple;
use crate::params::Dim;
use crate::scalar::Scalar;

/// Grid on `[0, radius]` with `points` samples, `r_j = j·radius/(points-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RadialGridSpec<T> {
    pub points: usize,
    pub radius: T,
}

impl<T: Scalar> Default for RadialGridSpec<T> {
    fn default() -> Self {
        RadialGridSpec {
            points: 16384,
            radius: T::lit(40.0),
        }
    }
}

impl<T: Scalar> RadialGridSpec<T> {
    pub fn new(points: usize, radius: T) -> Result<Self> {
        if points < 8 || !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::Validation(format!(
                "grid needs >= 8 points and positive radius (got {points}, {radius})"
            )));
        }
        Ok(RadialGridSpec { points, radius })
    }

    /// Default grid for profiles decaying like `exp(-κ r)`:
    /// radius `max(30, 40/κ)`, point count grown with the radius so the
    /// spacing never exceeds the default one by more than a factor 16.
    pub fn for_decay_rate(kappa: T) -> Self {
        let base = Self::default();
        let radius = T::lit(30.0).max(T::lit(40.0) / kappa);
        let ratio = (radius / base.radius).to_f64_lossy();
        let points = if ratio > 16.0 {
            ((base.points as f64) * ratio / 16.0).ceil() as usize
        } else {
            base.points
        };
        RadialGridSpec {
            points: points.min(1 << 20),
            radius,
        }
    }

    pub fn spacing(&self) -> T {
        self.radius / T::from_usize_lossy(self.points - 1)
    }
}

/// Finite-volume measures on a radial grid: shell volumes `W_j` around
/// `r_j` and edge conductances `k_{j+½} = ω r_{j+½}^{N-1} / Δr`. The
/// discrete Laplacian `-W⁻¹K` is symmetric in the `W` inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteVolume<T> {
    pub w: Vec<T>,
    pub k: Vec<T>,
}

impl<T: Scalar> FiniteVolume<T> {
    pub fn new(dim: Dim, spec: RadialGridSpec<T>) -> Self {
        let n = dim.as_scalar::<T>();
        let omega = dim.sphere_measure::<T>();
        let h = spec.spacing();
        let half = T::lit(0.5);
        let ball = |r: T| omega * r.powf(n) / n;
        let w = (0..spec.points)
            .map(|j| {
                let r = T::from_usize_lossy(j) * h;
                if j == 0 {
                    ball(half * h)
                } else {
                    ball(r + half * h) - ball(r - half * h)
                }
            })
            .collect();
        let k = (0..spec.points - 1)
            .map(|j| omega * ((T::from_usize_lossy(j) + half) * h).powf(n - T::one()) / h)
            .collect();
        FiniteVolume { w, k }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// `Σ W_j g(j)`.
    pub fn sum(&self, g: impl Fn(usize) -> T) -> T {
        self.w.iter().enumerate().map(|(j, &w)| w * g(j)).sum()
    }

    /// `Σ k_{j+½} |u_{j+1} - u_j|²` for a field given by its squared jumps.
    pub fn dirichlet(&self, jump2: impl Fn(usize) -> T) -> T {
        self.k.iter().enumerate().map(|(j, &k)| k * jump2(j)).sum()
    }
}

/// Real radial profile sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RadialField<T> {
    pub dim: Dim,
    pub dr: T,
    pub values: Vec<T>,
}

impl<T: Scalar> RadialField<T> {
    pub fn zeros(dim: Dim, spec: RadialGridSpec<T>) -> Self {
        RadialField {
            dim,
            dr: spec.spacing(),
            values: vec![T::zero(); spec.points],
        }
    }

    pub fn from_fn(dim: Dim, spec: RadialGridSpec<T>, f: impl Fn(T) -> T) -> Self {
        let dr = spec.spacing();
        let values = (0..spec.points).map(|j| f(T::from_usize_lossy(j) * dr)).collect();
        RadialField { dim, dr, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn r(&self, j: usize) -> T {
        T::from_usize_lossy(j) * self.dr
    }

    pub fn radius(&self) -> T {
        self.r(self.len() - 1)
    }

    pub fn spec(&self) -> RadialGridSpec<T> {
        RadialGridSpec {
            points: self.len(),
            radius: self.radius(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `∫_{R^N} g(|x|) dx` for samples `g_j`, by the trapezoidal rule in `r`
    /// with weight `ω_{N-1} r^{N-1}` and the first Euler–Maclaurin endpoint
    /// correction (needed for `N = 2`, where `r·g` has nonzero slope at 0).
    pub fn integrate_samples(&self, g: &[T]) -> T {
        radial_integral(self.dim, self.dr, g)
    }

    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        let g: Vec<T> = self.values.iter().map(|&u| f(u)).collect();
        self.integrate_samples(&g)
    }

    pub fn mass2(&self) -> T {
        self.integrate(|u| u * u)
    }

    pub fn lp_pow(&self, p: T) -> T {
        self.integrate(|u| u.abs().powf(p))
    }

    /// `u'(r)`, fourth-order central differences with even reflection at the
    /// origin and one-sided second-order stencils at the outer edge.
    pub fn derivative(&self) -> Vec<T> {
        derivative_even(&self.values, self.dr)
    }

    pub fn grad2(&self) -> T {
        let d = self.derivative();
        let g: Vec<T> = d.iter().map(|&x| x * x).collect();
        self.integrate_samples(&g)
    }

    /// `∫ |x|² u²`.
    pub fn second_moment(&self) -> T {
        let g: Vec<T> = self
            .values
            .iter()
            .enumerate()
            .map(|(j, &u)| {
                let r = self.r(j);
                r * r * u * u
            })
            .collect();
        self.integrate_samples(&g)
    }

    /// Radial Laplacian `u'' + (N-1)/r u'` (fourth-order in the interior;
    /// `N·u''(0)` at the origin).
    pub fn laplacian(&self) -> Vec<T> {
        let n = self.len();
        let h = self.dr;
        let v = &self.values;
        let at = |i: isize| -> T {
            if i < 0 {
                v[(-i) as usize]
            } else if (i as usize) < n {
                v[i as usize]
            } else {
                T::zero()
            }
        };
        let d1 = self.derivative();
        let nm1 = self.dim.as_scalar::<T>() - T::one();
        let c12 = T::lit(12.0);
        (0..n)
            .map(|j| {
                let i = j as isize;
                let d2 = (-at(i - 2) + T::lit(16.0) * at(i - 1) - T::lit(30.0) * at(i) + T::lit(16.0) * at(i + 1)
                    - at(i + 2))
                    / (c12 * h * h);
                if j == 0 {
                    self.dim.as_scalar::<T>() * d2
                } else {
                    d2 + nm1 * d1[j] / self.r(j)
                }
            })
            .collect()
    }

    pub fn triple(&self, q: T, p: T) -> FiberTriple<T> {
        FiberTriple {
            grad2: self.grad2(),
            mq: self.lp_pow(q),
            mp: self.lp_pow(p),
            mass2: self.mass2(),
        }
    }

    /// Value at arbitrary radius: cubic Hermite interpolation with
    /// even reflection at the origin, zero beyond the grid.
    pub fn eval(&self, r: T) -> T {
        eval_even(&self.values, self.dr, r.abs())
    }

    /// Resample onto another grid of the same dimension.
    pub fn resample(&self, spec: RadialGridSpec<T>) -> Self {
        RadialField::from_fn(self.dim, spec, |r| self.eval(r))
    }

    /// Mass-preserving dilation `(s ⋆ u)(r) = e^{Ns/2} u(e^s r)`, resampled
    /// onto the same grid.
    pub fn dilate(&self, s: T) -> Self {
        let amp = (self.dim.as_scalar::<T>() * s / T::lit(2.0)).exp();
        let k = s.exp();
        RadialField::from_fn(self.dim, self.spec(), |r| amp * self.eval(k * r))
    }

    pub fn scaled_by(&self, c: T) -> Self {
        RadialField {
            dim: self.dim,
            dr: self.dr,
            values: self.values.iter().map(|&v| v * c).collect(),
        }
    }

    /// Rescale so that `|u|_2 = a`.
    pub fn normalized_to(&self, a: T) -> Result<Self> {
        let m = self.mass2();
        if !(m > T::zero()) {
            return Err(Error::Validation("cannot normalize a zero field".into()));
        }
        Ok(self.scaled_by(a / m.sqrt()))
    }

    /// `|u - v|_2`; `v` is interpolated when the grids differ.
    pub fn l2_distance(&self, other: &RadialField<T>) -> T {
        let same = other.len() == self.len() && (other.dr - self.dr).abs() <= T::epsilon() * self.dr;
        let g: Vec<T> = (0..self.len())
            .map(|j| {
                let v = if same { other.values[j] } else { other.eval(self.r(j)) };
                let d = self.values[j] - v;
                d * d
            })
            .collect();
        self.integrate_samples(&g).max(T::zero()).sqrt()
    }

    pub fn cast<U: Scalar>(&self) -> RadialField<U> {
        RadialField {
            dim: self.dim,
            dr: U::lit(self.dr.to_f64_lossy()),
            values: self.values.iter().map(|v| U::lit(v.to_f64_lossy())).collect(),
        }
    }
}

pub(crate) fn radial_integral<T: Scalar>(dim: Dim, h: T, g: &[T]) -> T {
    let n = g.len();
    if n < 3 {
        return T::zero();
    }
    let nm1 = dim.n() as i32 - 1;
    let weighted = |j: usize| -> T {
        let r = T::from_usize_lossy(j) * h;
        g[j] * r.powi(nm1)
    };
    let half = T::lit(0.5);
    let mut sum = half * (weighted(0) + weighted(n - 1));
    for j in 1..n - 1 {
        sum = sum + weighted(j);
    }
    let trap = sum * h;
    if n < 5 {
        return dim.sphere_measure::<T>() * trap;
    }
    // fourth-order one-sided slopes
    let one_sided = |w: [T; 5]| {
        (-T::lit(25.0) * w[0] + T::lit(48.0) * w[1] - T::lit(36.0) * w[2] + T::lit(16.0) * w[3] - T::lit(3.0) * w[4])
            / (T::lit(12.0) * h)
    };
    let slope0 = one_sided([weighted(0), weighted(1), weighted(2), weighted(3), weighted(4)]);
    let slope1 = -one_sided([
        weighted(n - 1),
        weighted(n - 2),
        weighted(n - 3),
        weighted(n - 4),
        weighted(n - 5),
    ]);
    let corrected = trap - h * h / T::lit(12.0) * (slope1 - slope0);
    dim.sphere_measure::<T>() * corrected
}

pub(crate) fn derivative_even<T: Scalar>(v: &[T], h: T) -> Vec<T> {
    let n = v.len();
    let at = |i: isize| -> T {
        if i < 0 {
            v[(-i) as usize]
        } else {
            v[i as usize]
        }
    };
    let c12 = T::lit(12.0);
    (0..n)
        .map(|j| {
            let i = j as isize;
            if j + 2 < n {
                (at(i - 2) - T::lit(8.0) * at(i - 1) + T::lit(8.0) * at(i + 1) - at(i + 2)) / (c12 * h)
            } else if j + 1 < n {
                (at(i + 1) - at(i - 1)) / (T::lit(2.0) * h)
            } else {
                (T::lit(3.0) * at(i) - T::lit(4.0) * at(i - 1) + at(i - 2)) / (T::lit(2.0) * h)
            }
        })
        .collect()
}

pub(crate) fn eval_even<T: Scalar>(v: &[T], h: T, r: T) -> T {
    let n = v.len();
    let x = r / h;
    let i = x.floor();
    let Some(i0) = i.to_usize() else {
        return T::zero();
    };
    if i0 + 1 >= n {
        return if i0 + 1 == n && x == i { v[n - 1] } else { T::zero() };
    }
    let t = x - i;
    let at = |k: isize| -> T {
        if k < 0 {
            v[(-k) as usize]
        } else if (k as usize) < n {
            v[k as usize]
        } else {
            T::zero()
        }
    };
    let k = i0 as isize;
    // cubic Hermite with fourth-order nodal slopes (in grid units)
    let slope =
        |m: isize| -> T { (at(m - 2) - T::lit(8.0) * at(m - 1) + T::lit(8.0) * at(m + 1) - at(m + 2)) / T::lit(12.0) };
    let (y0, y1) = (at(k), at(k + 1));
    let (m0, m1) = (slope(k), slope(k + 1));
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = two * t3 - three * t2 + T::one();
    let h10 = t3 - two * t2 + t;
    let h01 = -two * t3 + three * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1
}
