use num::{BigRational, Zero};

use crate::rational::{big, big_to_f64};

/// Evaluates `Σ a_k y^k` and its derivative.
pub fn horner(coeffs: &[f64], y: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for c in coeffs.iter().rev() {
        dp = dp * y + p;
        p = p * y + c;
    }
    (p, dp)
}

/// Simple real roots of `Σ a_k y^k`, ascending. Roots where the derivative
/// nearly vanishes are skipped.
pub fn real_simple_roots(coeffs: &[f64]) -> Vec<f64> {
    let Some(deg) = coeffs.iter().rposition(|c| *c != 0.0) else { return vec![] };
    if deg == 0 {
        return vec![];
    }
    let lead = coeffs[deg].abs();
    let bound = 1.0 + coeffs[..deg].iter().map(|c| c.abs() / lead).fold(0.0, f64::max);
    let scale: f64 = coeffs.iter().map(|c| c.abs()).sum();
    let steps = 4000;
    let h = 2.0 * bound / steps as f64;
    let mut roots: Vec<f64> = Vec::new();
    let mut prev_y = -bound;
    let mut prev = horner(coeffs, prev_y).0;
    for i in 1..=steps {
        let y = -bound + i as f64 * h;
        let v = horner(coeffs, y).0;
        if prev == 0.0 {
            roots.push(prev_y);
        } else if prev * v < 0.0 {
            let (mut a, mut b, mut fa) = (prev_y, y, prev);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = horner(coeffs, m).0;
                if fm == 0.0 || b - a < 1e-15 * (1.0 + m.abs()) {
                    a = m;
                    b = m;
                    break;
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_y = y;
        prev = v;
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    roots
        .into_iter()
        .filter(|&y| horner(coeffs, y).1.abs() > 1e-8 * scale.max(1.0) * (1.0 + y.abs()).powi(deg as i32))
        .collect()
}

/// Best rational approximation with denominator at most `max_den`.
pub fn rational_approx(x: f64, max_den: i64) -> BigRational {
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut v = x;
    for _ in 0..40 {
        let a = v.floor();
        if a.abs() > 1e12 {
            break;
        }
        let a = a as i64;
        let h2 = a.saturating_mul(h1).saturating_add(h0);
        let k2 = a.saturating_mul(k1).saturating_add(k0);
        if k2 > max_den || k2 <= 0 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = v - a as f64;
        if frac.abs() < 1e-13 {
            break;
        }
        v = 1.0 / frac;
    }
    big(h1, k1)
}

/// An exact rational root near `approx`, if the polynomial has one.
pub fn exact_rational_root(coeffs: &[BigRational], approx: f64) -> Option<BigRational> {
    let cand = rational_approx(approx, 1 << 20);
    let mut acc = BigRational::zero();
    for c in coeffs.iter().rev() {
        acc = acc * &cand + c;
    }
    (acc.is_zero() && (big_to_f64(&cand) - approx).abs() < 1e-8 * (1.0 + approx.abs())).then_some(cand)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_quadratics() {
        assert_eq!(real_simple_roots(&[-1.0, 0.0, 1.0]), vec![-1.0, 1.0]);
        assert!(real_simple_roots(&[1.0, 0.0, 1.0]).is_empty());
        // Double root at 1 is not simple.
        assert!(real_simple_roots(&[1.0, -2.0, 1.0]).is_empty());
        let r = real_simple_roots(&[-2.0, 0.0, 1.0]);
        assert!((r[1] - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rational_detection() {
        let c = [big(-1, 4), big(0, 1), big(1, 1)];
        assert_eq!(exact_rational_root(&c, 0.5), Some(big(1, 2)));
        let c = [big(-2, 1), big(0, 1), big(1, 1)];
        assert_eq!(exact_rational_root(&c, 2f64.sqrt()), None);
    }
}
