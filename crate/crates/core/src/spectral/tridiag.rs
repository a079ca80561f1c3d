//! Symmetric tridiagonal eigenpairs by Sturm bisection and inverse iteration.

const LANES: usize = 8;

/// `a` on the diagonal, `b` on the off-diagonal (`b.len() = a.len() - 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Number of eigenvalues strictly below `x` (Sylvester inertia of `T - x`).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.a.len() {
            let off = if i == 0 { 0.0 } else { self.b[i - 1] * self.b[i - 1] };
            d = self.a[i] - x - if i == 0 { 0.0 } else { off / d };
            if d == 0.0 {
                d = -f64::EPSILON * (self.a[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.a.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let rad = if i > 0 { self.b[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.b[i].abs() } else { 0.0 };
            lo = lo.min(self.a[i] - rad);
            hi = hi.max(self.a[i] + rad);
        }
        (lo, hi)
    }

    /// The `j`-th smallest eigenvalue (0-based) to relative accuracy `tol`.
    pub fn eigenvalue(&self, j: usize, tol: f64) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= tol * (lo.abs() + hi.abs()) + f64::MIN_POSITIVE {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Sylvester counts for up to `LANES` shifts in one sweep.
    fn count_below_many(&self, xs: &[f64; LANES]) -> [usize; LANES] {
        let mut count = [0usize; LANES];
        let mut d = [1.0f64; LANES];
        for i in 0..self.a.len() {
            let off = if i == 0 { 0.0 } else { self.b[i - 1] * self.b[i - 1] };
            for k in 0..LANES {
                let mut v = self.a[i] - xs[k] - off / d[k];
                if v == 0.0 {
                    v = -f64::EPSILON * (self.a[i].abs() + xs[k].abs()).max(f64::MIN_POSITIVE);
                }
                count[k] += (v < 0.0) as usize;
                d[k] = v;
            }
        }
        count
    }

    /// All eigenvalues below `cut`, increasing, to relative accuracy `tol`.
    ///
    /// Bisection on all eigenvalues at once: every Sylvester count narrows
    /// the bracket of each eigenvalue it separates.
    pub fn eigenvalues_below(&self, cut: f64, tol: f64) -> Vec<f64> {
        let m = self.count_below(cut);
        if m == 0 {
            return Vec::new();
        }
        let (gl, gh) = self.gershgorin();
        let mut lo = vec![gl; m];
        let mut hi = vec![cut.min(gh); m];
        let done = |l: f64, h: f64| h - l <= tol * (l.abs() + h.abs()) + f64::MIN_POSITIVE;
        loop {
            let mut xs = [f64::NAN; LANES];
            let mut used = 0;
            let mut j = 0;
            while j < m && used < LANES {
                if !done(lo[j], hi[j]) {
                    let x = 0.5 * (lo[j] + hi[j]);
                    if !xs[..used].contains(&x) {
                        xs[used] = x;
                        used += 1;
                    }
                }
                j += 1;
            }
            if used == 0 {
                break;
            }
            for k in used..LANES {
                xs[k] = xs[0];
            }
            let counts = self.count_below_many(&xs);
            for (x, c) in xs.iter().zip(counts).take(used) {
                for j in 0..c.min(m) {
                    hi[j] = hi[j].min(*x);
                }
                for j in c..m {
                    lo[j] = lo[j].max(*x);
                }
            }
        }
        lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    /// Unit eigenvector for the eigenvalue `lambda` by inverse iteration.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.a.len();
        let shift = lambda + 1e-12 * lambda.abs().max(1e-300);
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919 % 13) as f64 / 13.0)).collect();
        normalize(&mut v);
        for _ in 0..2 {
            v = self.solve_shifted(shift, &v);
            normalize(&mut v);
        }
        v
    }

    /// `(T - s)⁻¹ y` by the Thomas algorithm with a guard against tiny pivots.
    fn solve_shifted(&self, s: f64, y: &[f64]) -> Vec<f64> {
        let n = self.a.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let guard = |x: f64, scale: f64| if x.abs() < 1e-300 + 1e-18 * scale { 1e-18 * scale.max(1e-300) } else { x };
        let mut piv = guard(self.a[0] - s, self.a[0].abs() + s.abs());
        c[0] = if n > 1 { self.b[0] / piv } else { 0.0 };
        d[0] = y[0] / piv;
        for i in 1..n {
            piv = guard(self.a[i] - s - self.b[i - 1] * c[i - 1], self.a[i].abs() + s.abs());
            c[i] = if i + 1 < n { self.b[i] / piv } else { 0.0 };
            d[i] = (y[i] - self.b[i - 1] * d[i - 1]) / piv;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 && n.is_finite() {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_difference_spectrum() {
        let n = 50;
        let t = Tridiagonal { a: vec![2.0; n], b: vec![-1.0; n - 1] };
        for j in [0, 7, 49] {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * (j + 1) as f64 / (n + 1) as f64).cos();
            assert!((t.eigenvalue(j, 1e-15) - exact).abs() < 1e-12);
            let v = t.eigenvector(t.eigenvalue(j, 1e-15));
            let s: f64 = (0..n)
                .map(|i| v[i] * (std::f64::consts::PI * ((i + 1) * (j + 1)) as f64 / (n + 1) as f64).sin())
                .sum();
            assert!((s.abs() - ((n + 1) as f64 / 2.0).sqrt()).abs() < 1e-8);
        }
        let all = t.eigenvalues_below(5.0, 1e-15);
        assert_eq!(all.len(), n);
        for (j, v) in all.iter().enumerate() {
            assert!((v - t.eigenvalue(j, 1e-15)).abs() < 1e-12);
        }
        assert_eq!(t.count_below(0.0), 0);
        assert_eq!(t.count_below(5.0), n);
    }

    #[test]
    fn graded_diagonal_keeps_small_eigenvalues() {
        let mut a = vec![1e16, 1e12, 1e8];
        a.extend(vec![2.0; 20]);
        let n = a.len();
        let t = Tridiagonal { a, b: vec![-1.0; n - 1] };
        let lam = t.eigenvalue(0, 1e-15);
        assert!(lam > 0.0 && lam < 0.1);
        let v = t.eigenvector(lam);
        assert!(v[0].abs() < 1e-15);
    }
}
