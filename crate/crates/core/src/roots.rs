/// Bisection on a bracket `[lo, hi]` whose endpoints have opposite signs.
///
/// Stops when the bracket is narrower than `x_tol` or cannot be split any
/// further in floating point. Returns the midpoint of the final bracket, or
/// `None` when the endpoints do not bracket a sign change.
pub fn bisect<F>(mut lo: f64, mut hi: f64, f: F, x_tol: f64) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return None;
    }
    while hi - lo > x_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Brackets of sign changes of `f` sampled on the ascending points `xs`.
pub fn sign_change_brackets<F>(xs: &[f64], f: F) -> Vec<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let mut brackets = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &x in xs {
        let fx = f(x);
        if let Some((xp, fp)) = prev {
            let crossing = fp != 0.0 && fx != 0.0 && fp.signum() != fx.signum();
            if crossing || fx == 0.0 {
                brackets.push((xp, x));
            }
        }
        prev = Some((x, fx));
    }
    brackets
}
