//! Small numerical toolbox: adaptive Simpson quadrature and deterministic
//! summation. Nothing here knows about the network model.

use crate::error::{Error, Result};

/// Result of an adaptive quadrature run.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

const MAX_DEPTH: u32 = 50;

/// Adaptive Simpson integration of `f` over `[a, b]`.
///
/// The error budget starts at `max(abs_tol, rel_tol * scale)` with the
/// scale taken from an initial coarse pass, and halves on every interval
/// split, so accepted local errors sum to at most the global budget.
/// Returns an error if the depth cap is hit on a still-bad interval.
pub fn integrate<F>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("integration bounds must be finite"));
    }
    if !(abs_tol > 0.0 || rel_tol > 0.0) {
        return Err(Error::invalid("at least one tolerance must be positive"));
    }
    if a == b {
        return Ok(Quadrature { value: 0.0, error_estimate: 0.0, evaluations: 0 });
    }

    let fa = checked(&f, a)?;
    let fb = checked(&f, b)?;
    let m = 0.5 * (a + b);
    let fm = checked(&f, m)?;
    let whole = simpson(a, b, fa, fm, fb);

    // Coarse magnitude estimate for the relative part of the budget.
    let scale = whole
        .abs()
        .max((b - a).abs() * fa.abs().max(fm.abs()).max(fb.abs()) * 0.25);
    let eps = (abs_tol.max(rel_tol * scale)).max(f64::MIN_POSITIVE);

    let mut st = State { f: &f, evaluations: 3, error: 0.0 };
    let value = adapt(&mut st, a, b, fa, fm, fb, whole, eps, MAX_DEPTH)?;

    Ok(Quadrature { value, error_estimate: st.error, evaluations: st.evaluations })
}

struct State<'a, F> {
    f: &'a F,
    evaluations: usize,
    error: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn checked<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_nan() {
        return Err(Error::numerical(format!("integrand returned NaN at x = {x}")));
    }
    Ok(y)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    st: &mut State<F>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = checked(st.f, lm)?;
    let frm = checked(st.f, rm)?;
    st.evaluations += 2;

    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let refined = left + right;
    // Richardson: |S2 - S1|/15 estimates the error of S2.
    let err = (refined - whole).abs() / 15.0;

    if err <= eps || depth == 0 {
        if depth == 0 && err > eps * 16.0 {
            return Err(Error::numerical(format!(
                "quadrature failed to converge on [{a}, {b}] (err {err:.3e})"
            )));
        }
        st.error += err;
        return Ok(refined + (refined - whole) / 15.0);
    }

    let half = 0.5 * eps;
    let l = adapt(st, a, m, fa, flm, fm, left, half, depth - 1)?;
    let r = adapt(st, m, b, fm, frm, fb, right, half, depth - 1)?;
    Ok(l + r)
}

/// Pairwise (tree) summation. Deterministic for a fixed input order and
/// far more accurate than naive left-to-right on long Monte Carlo streams.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n if n <= 32 => {
            let mut s = 0.0;
            let mut c = 0.0;
            // Kahan at the leaves.
            for &x in xs {
                let y = x - c;
                let t = s + y;
                c = (t - s) - y;
                s = t;
            }
            s
        }
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Mean and standard error of the mean. Requires n >= 2.
pub fn mean_stderr(xs: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len();
    if n < 2 {
        return Err(Error::numerical("need at least 2 samples for a standard error"));
    }
    let nf = n as f64;
    let mean = pairwise_sum(xs) / nf;
    let sq: Vec<f64> = xs.iter().map(|&x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (nf - 1.0);
    Ok((mean, (var / nf).sqrt()))
}

/// Bisection for the smallest root of a monotone nondecreasing `g` on
/// `[lo, hi]`, assuming g(lo) <= 0 <= g(hi). Tolerance is absolute on x.
pub fn bisect_root<G>(g: G, mut lo: f64, mut hi: f64, x_tol: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    let glo = g(lo);
    let ghi = g(hi);
    if glo > 0.0 {
        return Ok(lo);
    }
    if ghi < 0.0 {
        return Err(Error::numerical("no sign change in bisection bracket"));
    }
    for _ in 0..200 {
        if (hi - lo).abs() <= x_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
