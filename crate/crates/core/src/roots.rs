//! Scalar root finding and one-dimensional minimisation.

use crate::scalar::Scalar;

/// Bisection on a sign-changing bracket; stops when the bracket is below
/// `tol` relative to its magnitude or after 400 halvings.
pub fn bisect<T: Scalar>(f: impl Fn(T) -> T, lo: T, hi: T, tol: T) -> T {
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo);
    let half = T::lit(0.5);
    for _ in 0..400 {
        let mid = lo + (hi - lo) * half;
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= tol * lo.abs().max(hi.abs()) {
            break;
        }
    }
    lo + (hi - lo) * half
}

/// Bisection on a predicate that is false at `lo` and true at `hi`.
/// Returns the final `(lo, hi)` bracket.
/// Secant iteration from `x0`, `x1`. Returns the root and the last slope,
/// or `None` on a flat or non-finite step.
pub fn secant<T: Scalar>(f: impl Fn(T) -> T, x0: T, x1: T, tol: T, max_iter: usize) -> Option<(T, T)> {
    let (mut xa, mut xb) = (x0, x1);
    let (mut fa, mut fb) = (f(xa), f(xb));
    for _ in 0..max_iter {
        if !fa.is_finite() || !fb.is_finite() {
            return None;
        }
        let slope = (fb - fa) / (xb - xa);
        if !(slope.abs() > T::zero()) || !slope.is_finite() {
            return None;
        }
        let xn = xb - fb / slope;
        if !xn.is_finite() {
            return None;
        }
        if (xn - xb).abs() <= tol * xn.abs().max(T::one()) {
            return Some((xn, slope));
        }
        (xa, fa) = (xb, fb);
        xb = xn;
        fb = f(xb);
    }
    None
}

pub fn bisect_predicate<T: Scalar>(mut pred: impl FnMut(T) -> bool, lo: T, hi: T, tol: T) -> (T, T) {
    let (mut lo, mut hi) = (lo, hi);
    let half = T::lit(0.5);
    for _ in 0..400 {
        let mid = lo + (hi - lo) * half;
        if mid == lo || mid == hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo).abs() <= tol * T::one().max(lo.abs().max(hi.abs())) {
            break;
        }
    }
    (lo, hi)
}

/// Golden-section search for the minimum of a unimodal function on
/// `[lo, hi]`. Returns `(argmin, min)`.
pub fn golden_min<T: Scalar>(f: impl Fn(T) -> T, lo: T, hi: T, tol: T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..300 {
        if (b - a).abs() <= tol * T::one().max(a.abs().max(b.abs())) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn secant_converges_on_monotone_function() {
        let (x, slope) = secant(|x: f64| x.exp() - 3.0, 0.0, 0.1, 1e-15, 50).unwrap();
        assert!((x - 3f64.ln()).abs() < 1e-14);
        assert!((slope - 3.0).abs() < 1e-3);
        assert!(secant(|_x: f64| 1.0, 0.0, 1.0, 1e-12, 10).is_none());
    }

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-15);
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn predicate_bracket() {
        let (lo, hi) = bisect_predicate(|x: f64| x > 0.3, 0.0, 1.0, 1e-12);
        assert!(lo <= 0.3 && hi > 0.3 && hi - lo < 1e-11);
    }

    #[test]
    fn golden_quadratic() {
        let (x, v) = golden_min(|x: f64| (x - 1.5).powi(2) - 3.0, -4.0, 10.0, 1e-10);
        assert!((x - 1.5).abs() < 1e-7);
        assert!((v + 3.0).abs() < 1e-14);
    }
}
