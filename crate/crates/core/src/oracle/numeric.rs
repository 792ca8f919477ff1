//! Bracketed inversion of monotone maps and composite trapezoid quadrature.

use crate::error::{ModelError, Result};
use crate::scalar::Scalar;

const MAX_BISECTIONS: usize = 200;

/// Finds `x` in `[lo, hi]` with `|f(x) - target| <= tol` for a nondecreasing
/// `f`.
///
/// Every probe is checked against the current bracket values; a probe outside
/// `[f(lo), f(hi)]` means `f` is not monotone and is reported as an error
/// rather than bisected through.
pub fn bisect_monotone<T, F>(f: F, lo: T, hi: T, target: T, tol: T) -> Result<T>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    let bracket_err = |fa: T, fb: T| ModelError::Bracket {
        lo: lo.as_f64(),
        hi: hi.as_f64(),
        f_lo: fa.as_f64(),
        f_hi: fb.as_f64(),
        target: target.as_f64(),
    };
    if !(fa.is_finite() && fb.is_finite()) || a > b {
        return Err(bracket_err(fa, fb));
    }
    if (fa - target).abs() <= tol {
        return Ok(a);
    }
    if (fb - target).abs() <= tol {
        return Ok(b);
    }
    if !(fa <= target && target <= fb) {
        return Err(bracket_err(fa, fb));
    }
    let mut best = (a, (fa - target).abs());
    for _ in 0..MAX_BISECTIONS {
        let mid = a + (b - a) * T::lit(0.5);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if !(fm >= fa && fm <= fb) {
            return Err(ModelError::NonMonotone {
                at: mid.as_f64(),
                value: fm.as_f64(),
                f_lo: fa.as_f64(),
                f_hi: fb.as_f64(),
            });
        }
        let residual = (fm - target).abs();
        if residual < best.1 {
            best = (mid, residual);
        }
        if residual <= tol {
            return Ok(mid);
        }
        if fm < target {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    Err(ModelError::NoConvergence {
        iterations: MAX_BISECTIONS,
        residual: best.1.as_f64(),
    })
}

/// Composite trapezoid rule over the sorted union of `nodes` and `{a, b}`,
/// restricted to `[a, b]`.
pub fn quadrature<T, F>(f: F, a: T, b: T, nodes: &[T]) -> T
where
    T: Scalar,
    F: Fn(T) -> T,
{
    if b <= a {
        return T::zero();
    }
    let mut xs: Vec<T> = nodes.iter().copied().filter(|&x| x > a && x < b).collect();
    xs.push(a);
    xs.push(b);
    xs.sort_by(|x, y| x.partial_cmp(y).expect("finite quadrature node"));
    xs.dedup();
    let half = T::lit(0.5);
    let mut total = T::zero();
    let mut prev = (xs[0], f(xs[0]));
    for &x in &xs[1..] {
        let fx = f(x);
        total = total + half * (x - prev.0) * (fx + prev.1);
        prev = (x, fx);
    }
    total
}

/// Nodes `a, a + h, ...` strictly inside `(a, b)` merged with `mandatory`.
pub fn uniform_nodes<T: Scalar>(a: T, b: T, step: T, mandatory: &[T]) -> Vec<T> {
    let mut nodes: Vec<T> = mandatory.to_vec();
    if step > T::zero() && b > a {
        let n = ((b - a) / step).ceil().to_usize().unwrap_or(0);
        for i in 1..n {
            nodes.push(a + step * T::from_count(i));
        }
    }
    nodes
}

/// Integrates a function with jump discontinuities at `breaks`.
///
/// `f(t, cell_mid)` must evaluate the branch active at `cell_mid`, extended
/// continuously to the cell's closed ends, so one-sided limits are used on
/// both sides of every break.
pub fn piecewise_quadrature<T, F>(f: F, a: T, b: T, breaks: &[T], step: T) -> T
where
    T: Scalar,
    F: Fn(T, T) -> T,
{
    let mut cuts: Vec<T> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite break"));
    cuts.dedup();
    cuts.windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            let mid = lo + (hi - lo) * T::lit(0.5);
            let nodes = uniform_nodes(lo, hi, step, &[]);
            quadrature(|t| f(t, mid), lo, hi, &nodes)
        })
        .sum()
}
