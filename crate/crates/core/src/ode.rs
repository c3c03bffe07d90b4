//! Adaptive Dormand–Prince 5(4) integration with dense output.

use crate::scalar::Scalar;

/// Outcome of a single `integrate` call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    /// Reached the end of the interval.
    End,
    /// The event callback asked to stop.
    Event,
    /// Step size fell below the floor.
    StepUnderflow,
    /// Non-finite state.
    NonFinite,
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    pub h0: T,
    pub h_max: T,
    pub max_steps: usize,
    /// Land exactly on every point of `t0 + k·h_max`.
    pub lattice: bool,
}

impl<T: Scalar> Default for OdeOptions<T> {
    fn default() -> Self {
        OdeOptions {
            rtol: T::tol(1e-11),
            atol: T::tol(1e-13),
            h0: T::lit(1e-3),
            h_max: T::lit(0.5),
            max_steps: 2_000_000,
            lattice: false,
        }
    }
}

/// One accepted step with enough data to interpolate inside it.
#[derive(Debug, Clone)]
pub struct DenseStep<T> {
    pub t0: T,
    pub h: T,
    coeffs: [Vec<T>; 5],
}

impl<T: Scalar> DenseStep<T> {
    pub fn t1(&self) -> T {
        self.t0 + self.h
    }

    pub fn eval(&self, t: T) -> Vec<T> {
        let th = (t - self.t0) / self.h;
        let one = T::one();
        let [r1, r2, r3, r4, r5] = &self.coeffs;
        (0..r1.len())
            .map(|i| r1[i] + th * (r2[i] + (one - th) * (r3[i] + th * (r4[i] + (one - th) * r5[i]))))
            .collect()
    }

    pub fn end_state(&self) -> Vec<T> {
        let [r1, r2, ..] = &self.coeffs;
        r1.iter().zip(r2).map(|(&a, &b)| a + b).collect()
    }
}

fn axpy<T: Scalar>(y: &[T], h: T, terms: &[(T, &[T])]) -> Vec<T> {
    (0..y.len())
        .map(|i| y[i] + h * terms.iter().fold(T::zero(), |acc, (c, k)| acc + *c * k[i]))
        .collect()
}

fn c<T: Scalar>(num: f64, den: f64) -> T {
    T::lit(num) / T::lit(den)
}

/// Integrate `y' = f(t, y)` from `t0` to `t1`. After every accepted step
/// `on_step` receives the dense step and returns `true` to stop.
pub fn integrate<T: Scalar>(
    f: impl Fn(T, &[T], &mut [T]),
    t0: T,
    y0: &[T],
    t1: T,
    opts: &OdeOptions<T>,
    mut on_step: impl FnMut(&DenseStep<T>) -> bool,
) -> (Stop, T, Vec<T>) {
    let n = y0.len();
    let a21 = c::<T>(1.0, 5.0);
    let (a31, a32) = (c::<T>(3.0, 40.0), c::<T>(9.0, 40.0));
    let (a41, a42, a43) = (c::<T>(44.0, 45.0), c::<T>(-56.0, 15.0), c::<T>(32.0, 9.0));
    let (a51, a52, a53, a54) = (
        c::<T>(19372.0, 6561.0),
        c::<T>(-25360.0, 2187.0),
        c::<T>(64448.0, 6561.0),
        c::<T>(-212.0, 729.0),
    );
    let (a61, a62, a63, a64, a65) = (
        c::<T>(9017.0, 3168.0),
        c::<T>(-355.0, 33.0),
        c::<T>(46732.0, 5247.0),
        c::<T>(49.0, 176.0),
        c::<T>(-5103.0, 18656.0),
    );
    let (b1, b3, b4, b5, b6) = (
        c::<T>(35.0, 384.0),
        c::<T>(500.0, 1113.0),
        c::<T>(125.0, 192.0),
        c::<T>(-2187.0, 6784.0),
        c::<T>(11.0, 84.0),
    );
    let (e1, e3, e4, e5, e6, e7) = (
        c::<T>(71.0, 57600.0),
        c::<T>(-71.0, 16695.0),
        c::<T>(71.0, 1920.0),
        c::<T>(-17253.0, 339200.0),
        c::<T>(22.0, 525.0),
        c::<T>(-1.0, 40.0),
    );
    let (d1, d3, d4, d5, d6, d7) = (
        c::<T>(-12715105075.0, 11282082432.0),
        c::<T>(87487479700.0, 32700410799.0),
        c::<T>(-10690763975.0, 1880347072.0),
        c::<T>(701980252875.0, 199316789632.0),
        c::<T>(-1453857185.0, 822651844.0),
        c::<T>(69997945.0, 29380423.0),
    );
    let (c2, c3, c4, c5) = (c::<T>(1.0, 5.0), c::<T>(3.0, 10.0), c::<T>(4.0, 5.0), c::<T>(8.0, 9.0));

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = opts.h0.min(opts.h_max).min(t1 - t0);
    let h_min = (t1 - t0).abs() * T::epsilon() * T::lit(16.0);
    let mut k1 = vec![T::zero(); n];
    f(t, &y, &mut k1);
    let mut k = vec![vec![T::zero(); n]; 6];
    let mut err_prev = T::lit(1e-4);
    for _ in 0..opts.max_steps {
        if t >= t1 {
            return (Stop::End, t, y);
        }
        if t + h > t1 {
            h = t1 - t;
        }
        let mut landing = None;
        if opts.lattice {
            let hl = opts.h_max;
            let mut next = t0 + ((t - t0) / hl).floor() * hl + hl;
            if next - t <= hl * T::lit(1e-9) {
                next = next + hl;
            }
            let next = next.min(t1);
            if t + h >= next - hl * T::lit(1e-9) {
                h = next - t;
                landing = Some(next);
            }
        }
        let y2 = axpy(&y, h, &[(a21, &k1)]);
        f(t + c2 * h, &y2, &mut k[0]);
        let y3 = axpy(&y, h, &[(a31, &k1), (a32, &k[0])]);
        f(t + c3 * h, &y3, &mut k[1]);
        let y4 = axpy(&y, h, &[(a41, &k1), (a42, &k[0]), (a43, &k[1])]);
        f(t + c4 * h, &y4, &mut k[2]);
        let y5 = axpy(&y, h, &[(a51, &k1), (a52, &k[0]), (a53, &k[1]), (a54, &k[2])]);
        f(t + c5 * h, &y5, &mut k[3]);
        let y6 = axpy(
            &y,
            h,
            &[(a61, &k1), (a62, &k[0]), (a63, &k[1]), (a64, &k[2]), (a65, &k[3])],
        );
        f(t + h, &y6, &mut k[4]);
        let ynew = axpy(&y, h, &[(b1, &k1), (b3, &k[1]), (b4, &k[2]), (b5, &k[3]), (b6, &k[4])]);
        f(t + h, &ynew, &mut k[5]);
        let mut err = T::zero();
        for i in 0..n {
            let e = h * (e1 * k1[i] + e3 * k[1][i] + e4 * k[2][i] + e5 * k[3][i] + e6 * k[4][i] + e7 * k[5][i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err = err + (e / sc) * (e / sc);
        }
        err = (err / T::from_usize_lossy(n)).sqrt();
        if !err.is_finite() || ynew.iter().any(|v| !v.is_finite()) {
            if h <= h_min {
                return (Stop::NonFinite, t, y);
            }
            h = h * T::lit(0.25);
            continue;
        }
        if err <= T::one() {
            let r2: Vec<T> = (0..n).map(|i| ynew[i] - y[i]).collect();
            let r3: Vec<T> = (0..n).map(|i| h * k1[i] - r2[i]).collect();
            let r4: Vec<T> = (0..n).map(|i| r2[i] - h * k[5][i] - r3[i]).collect();
            let r5: Vec<T> = (0..n)
                .map(|i| h * (d1 * k1[i] + d3 * k[1][i] + d4 * k[2][i] + d5 * k[3][i] + d6 * k[4][i] + d7 * k[5][i]))
                .collect();
            let step = DenseStep {
                t0: t,
                h,
                coeffs: [y.clone(), r2, r3, r4, r5],
            };
            t = landing.unwrap_or(t + h);
            y = ynew;
            k1.clone_from(&k[5]);
            if on_step(&step) {
                return (Stop::Event, t, y);
            }
            // PI controller
            let e = err.max(T::lit(1e-10));
            let fac = T::lit(0.9) * e.powf(T::lit(-0.7 / 5.0)) * err_prev.powf(T::lit(0.4 / 5.0));
            h = (h * fac.max(T::lit(0.2)).min(T::lit(5.0))).min(opts.h_max);
            err_prev = e;
        } else {
            let fac = T::lit(0.9) * err.powf(T::lit(-0.2));
            h = h * fac.max(T::lit(0.2));
        }
        if h < h_min {
            return (Stop::StepUnderflow, t, y);
        }
    }
    (Stop::StepUnderflow, t, y)
}
