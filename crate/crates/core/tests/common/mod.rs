//! Oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use ahis_core::puiseux::{CubeDomain, EtaPoly, PuiseuxSeries};
use ahis_core::rational::{big, qi};
use ahis_core::{ExponentVector, Polynomial, Q};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Determinant of an integer matrix by cofactor expansion.
fn det(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    if n == 1 {
        return m[0][0];
    }
    let mut acc = 0;
    for c in 0..n {
        if m[0][c] == 0 {
            continue;
        }
        let minor: Vec<Vec<i128>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| *v).collect())
            .collect();
        let s = if c % 2 == 0 { 1 } else { -1 };
        acc += s * m[0][c] * det(&minor);
    }
    acc
}

/// Generalized cross product of `n - 1` vectors in `Z^n`.
fn cross(rows: &[Vec<i128>], n: usize) -> Vec<i128> {
    (0..n)
        .map(|c| {
            let minor: Vec<Vec<i128>> = rows
                .iter()
                .map(|r| r.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| *v).collect())
                .collect();
            if c % 2 == 0 { det(&minor) } else { -det(&minor) }
        })
        .collect()
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = combinations(n - 1, k);
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out
}

/// Brute-force maximal compact faces as vertex index sets.
pub fn oracle_faces(pts: &[Vec<i128>], n: usize) -> Option<BTreeSet<BTreeSet<usize>>> {
    let dot = |a: &[i128], b: &[i128]| a.iter().zip(b).map(|(x, y)| x * y).sum::<i128>();
    let mut items: Vec<(Vec<i128>, bool)> = pts.iter().map(|p| (p.clone(), true)).collect();
    for j in 0..n {
        let mut e = vec![0; n];
        e[j] = 1;
        items.push((e, false));
    }
    let mut normals = BTreeSet::new();
    for base in 0..pts.len() {
        for combo in combinations(items.len(), n - 1) {
            let rows: Vec<Vec<i128>> = combo
                .iter()
                .map(|&i| {
                    let (v, is_pt) = &items[i];
                    if *is_pt { v.iter().zip(&pts[base]).map(|(a, b)| a - b).collect() } else { v.clone() }
                })
                .collect();
            let mut c = cross(&rows, n);
            if c.iter().all(|&x| x == 0) {
                continue;
            }
            if c.iter().any(|&x| x < 0) {
                if c.iter().any(|&x| x > 0) {
                    continue;
                }
                c.iter_mut().for_each(|x| *x = -*x);
            }
            let g = c.iter().fold(0, |g, &x| gcd(g, x));
            c.iter_mut().for_each(|x| *x /= g);
            let m = dot(&c, &pts[base]);
            if pts.iter().all(|p| dot(&c, p) >= m) {
                normals.insert(c);
            }
        }
    }
    let normals: Vec<Vec<i128>> = normals.into_iter().collect();
    if normals.len() > 14 {
        return None;
    }
    let mut faces = BTreeSet::new();
    for mask in 1u32..(1 << normals.len()) {
        let mut s = vec![0i128; n];
        for (i, nv) in normals.iter().enumerate() {
            if mask & (1 << i) != 0 {
                for (a, b) in s.iter_mut().zip(nv) {
                    *a += b;
                }
            }
        }
        if s.iter().any(|&x| x <= 0) {
            continue;
        }
        let m = pts.iter().map(|p| dot(&s, p)).min().unwrap();
        faces.insert((0..pts.len()).filter(|&i| dot(&s, &pts[i]) == m).collect::<BTreeSet<_>>());
    }
    let maximal = faces
        .iter()
        .filter(|f| !faces.iter().any(|g| g.len() > f.len() && f.is_subset(g)))
        .cloned()
        .collect();
    Some(maximal)
}

pub fn random_poly(rng: &mut ChaCha8Rng) -> Polynomial {
    let dim = rng.random_range(2..=4);
    let count = rng.random_range(1..=if dim == 4 { 10 } else { 20 });
    let mut p = Polynomial::zero(dim);
    for _ in 0..count {
        let e: Vec<u32> = (0..dim).map(|_| rng.random_range(0..=3)).collect();
        if e.iter().all(|&x| x == 0) {
            continue;
        }
        p.add_term(ExponentVector(e), big(rng.random_range(1..5), 1));
    }
    if p.is_zero() {
        p.add_term(ExponentVector::unit(dim, 0), big(1, 1));
    }
    p
}

/// Taylor polynomial of cos (shift 0) or sin (shift 1) in `η`.
fn trig(shift: u32, degree: u32) -> EtaPoly<f64> {
    let mut p = EtaPoly::zero(1);
    let mut fact = 1.0;
    for k in 0..=degree {
        if k > 0 {
            fact *= k as f64;
        }
        if k >= shift && (k - shift) % 2 == 0 {
            let sign = if ((k - shift) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            p.add_term(vec![k], sign / fact);
        }
    }
    p
}

fn constant_series(dom: CubeDomain, c: EtaPoly<f64>) -> PuiseuxSeries<f64> {
    PuiseuxSeries::monomial(dom, qi(8), Q::from_integer(0), c).unwrap().with_eta_cap(64)
}

/// `x = r^a cos θ, y = r^a sin θ, z = r`.
pub fn rotation_surface(a: Q, eps: f64) -> (Vec<Q>, Vec<PuiseuxSeries<f64>>) {
    let dom = CubeDomain::new(1, 0.5, eps).unwrap();
    let chi = vec![
        constant_series(dom, trig(0, 24)),
        constant_series(dom, trig(1, 24)),
        constant_series(dom, EtaPoly::constant(1, 1.0)),
    ];
    (vec![a, a, qi(1)], chi)
}
