use crate::error::{Error, Result};

/// Non-negative root of `a·σ³ + b·σ − d = 0` for `a, b > 0`, `d ≥ 0`.
///
/// The cubic is strictly increasing, so the root is unique and bracketed by
/// `[0, min(d/b, (d/a)^{1/3})]`. Newton from the right end converges
/// monotonically (the function is convex on σ ≥ 0); a bisection step is
/// taken whenever Newton would leave the bracket.
pub fn solve_monotone_cubic(a: f64, b: f64, d: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && d >= 0.0) || !a.is_finite() || !b.is_finite() || !d.is_finite() {
        return Err(Error::invalid(format!(
            "monotone cubic needs a > 0, b > 0, d >= 0 (got a={a}, b={b}, d={d})"
        )));
    }
    if d == 0.0 {
        return Ok(0.0);
    }
    let f = |s: f64| a * s * s * s + b * s - d;
    let tol = 1e-12 * d.max(1.0);
    let mut lo = 0.0;
    let mut hi = (d / b).min((d / a).cbrt());
    let mut s = hi;
    for _ in 0..200 {
        let fs = f(s);
        if fs.abs() <= tol {
            return Ok(s);
        }
        if fs > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let step = s - fs / (3.0 * a * s * s + b);
        s = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    // Bracket collapsed to machine precision; accept the better end.
    let best = if f(lo).abs() < f(hi).abs() { lo } else { hi };
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trivial_roots() {
        assert_eq!(solve_monotone_cubic(3.0, 2.0, 0.0).unwrap(), 0.0);
        assert!((solve_monotone_cubic(1.0, 1.0, 2.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn matches_bisection() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let a: f64 = rng.random_range(1e-3..1e3);
            let b: f64 = rng.random_range(1e-3..1e3);
            let d: f64 = rng.random_range(0.0..1e3);
            let root = solve_monotone_cubic(a, b, d).unwrap();
            let (mut lo, mut hi) = (0.0, d / b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if a * mid * mid * mid + b * mid - d > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            assert!((root - 0.5 * (lo + hi)).abs() < 1e-12 * (1.0 + root), "{a} {b} {d}");
        }
    }

    #[test]
    fn rejects_bad_coefficients() {
        assert!(solve_monotone_cubic(0.0, 1.0, 1.0).is_err());
        assert!(solve_monotone_cubic(1.0, -1.0, 1.0).is_err());
        assert!(solve_monotone_cubic(1.0, 1.0, -1.0).is_err());
    }
}
