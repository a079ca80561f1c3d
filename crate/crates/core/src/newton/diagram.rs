use std::collections::{BTreeMap, BTreeSet};

use num::{Integer, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::weights::WeightVector;
use crate::error::{Error, Result};
use crate::poly::{ExponentVector, Polynomial, MAX_DIM};
use crate::rational::{qi, Q};

/// A maximal compact face `Γ` of the Newton polyhedron, described by the
/// support points lying on it together with its weight vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewtonFace {
    pub vertices: Vec<ExponentVector>,
    pub weight: WeightVector,
}

impl NewtonFace {
    /// Dimension of the affine hull of the face points.
    pub fn dimension(&self) -> usize {
        let v = &self.vertices;
        if v.len() < 2 {
            return 0;
        }
        let rows: Vec<Vec<Q>> = v[1..]
            .iter()
            .map(|p| p.0.iter().zip(&v[0].0).map(|(&a, &b)| qi(a as i64 - b as i64)).collect())
            .collect();
        rank(rows)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewtonDiagram {
    pub dim: usize,
    pub faces: Vec<NewtonFace>,
}

struct Facet {
    normal: Vec<i64>,
    points: BTreeSet<usize>,
}

/// Computes all maximal compact faces of `N(f) = conv(supp f + R_{≥0}^{n+1})`.
///
/// Faces come out sorted by their vertex lists, so the output is
/// deterministic.
pub fn newton_diagram(f: &Polynomial) -> Result<NewtonDiagram> {
    let dim = f.dim();
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::UnsupportedDimension(dim));
    }
    if f.is_zero() {
        return Err(Error::EmptyPolynomial);
    }
    if !f.constant_term().is_zero() {
        return Err(Error::OriginInSupport);
    }
    let pts = f.support();
    let facets = facets(&pts, dim);

    // Every face is an intersection of facets; close the facet point sets
    // under intersection and keep the compact ones.
    let mut faces: BTreeSet<BTreeSet<usize>> = facets.iter().map(|f| f.points.clone()).collect();
    loop {
        let list: Vec<_> = faces.iter().cloned().collect();
        let mut grew = false;
        for (i, a) in list.iter().enumerate() {
            for b in &list[i + 1..] {
                let c: BTreeSet<usize> = a.intersection(b).copied().collect();
                if !c.is_empty() && faces.insert(c) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }

    let mut compact: Vec<(BTreeSet<usize>, Vec<i64>)> = Vec::new();
    for set in &faces {
        let containing: Vec<&Facet> = facets.iter().filter(|f| set.is_subset(&f.points)).collect();
        let mut sum = vec![0i64; dim];
        for f in &containing {
            for (s, v) in sum.iter_mut().zip(&f.normal) {
                *s += v;
            }
        }
        if sum.iter().all(|&s| s > 0) {
            // A compact facet carries its own normal; lower-dimensional faces
            // use the sum of the facet normals, which lies in the relative
            // interior of the normal cone.
            let normal = if containing.len() == 1 { containing[0].normal.clone() } else { primitive(&sum) };
            compact.push((set.clone(), normal));
        }
    }
    let maximal: Vec<_> = compact
        .iter()
        .filter(|(s, _)| !compact.iter().any(|(t, _)| t.len() > s.len() && s.is_subset(t)))
        .cloned()
        .collect();

    let mut out = Vec::with_capacity(maximal.len());
    for (set, normal) in maximal {
        let vertices: Vec<ExponentVector> = set.iter().map(|&i| pts[i].clone()).collect();
        let sigma: Vec<Q> = normal.iter().map(|&v| qi(v)).collect();
        let m = dot(&normal, &vertices[0]);
        out.push(NewtonFace { vertices, weight: WeightVector::new(sigma, qi(m))? });
    }
    out.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    Ok(NewtonDiagram { dim, faces: out })
}

/// Rejects germs that are regular or vanish to order < 2 at the origin.
pub fn check_singular_germ(f: &Polynomial) -> Result<()> {
    if f.is_zero() {
        return Err(Error::EmptyPolynomial);
    }
    if !f.constant_term().is_zero() {
        return Err(Error::OriginInSupport);
    }
    if f.terms().any(|(e, _)| e.total_degree() == 1) {
        return Err(Error::NotSingular);
    }
    Ok(())
}

/// Splits `f = f_Γ + R_Γ` where `f_Γ` collects the monomials on `Γ`.
pub fn face_polynomial(f: &Polynomial, face: &NewtonFace) -> Result<(Polynomial, Polynomial)> {
    if face.weight.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: face.weight.dim() });
    }
    let w = &face.weight;
    let m = w.weighted_degree;
    for v in &face.vertices {
        if f.coeff(&v.0).is_zero() || w.degree_of(v) != m {
            return Err(Error::ForeignFace(format!("vertex {:?} is not on the face", v.0)));
        }
    }
    if let Some((e, _)) = f.terms().find(|(e, _)| w.degree_of(e) < m) {
        return Err(Error::ForeignFace(format!("monomial {:?} lies below the face", e.0)));
    }
    let on: BTreeSet<&ExponentVector> = face.vertices.iter().collect();
    let fg = f.filter(|e| on.contains(e));
    let rg = f.filter(|e| !on.contains(e));
    Ok((fg, rg))
}

fn dot(n: &[i64], e: &ExponentVector) -> i64 {
    n.iter().zip(&e.0).map(|(a, &b)| a * b as i64).sum()
}

fn primitive(v: &[i64]) -> Vec<i64> {
    let g = v.iter().fold(0i64, |g, &x| g.gcd(&x));
    if g == 0 {
        return v.to_vec();
    }
    v.iter().map(|x| x / g).collect()
}

/// Enumerates supporting hyperplanes spanned by support points and
/// coordinate directions; those with nonnegative normal are the facets.
fn facets(pts: &[ExponentVector], dim: usize) -> Vec<Facet> {
    let mut found: BTreeMap<Vec<i64>, i64> = BTreeMap::new();
    // Items after the base point: other points, then coordinate directions.
    let n_items = pts.len() + dim;
    let item_row = |base: usize, item: usize| -> Vec<Q> {
        if item < pts.len() {
            pts[item].0.iter().zip(&pts[base].0).map(|(&a, &b)| qi(a as i64 - b as i64)).collect()
        } else {
            let mut r = vec![Q::zero(); dim];
            r[item - pts.len()] = qi(1);
            r
        }
    };
    let k = dim - 1;
    for base in 0..pts.len() {
        let mut idx: Vec<usize> = (0..k).collect();
        let candidates: Vec<usize> = (base + 1..n_items).collect();
        if candidates.len() < k {
            continue;
        }
        loop {
            let rows: Vec<Vec<Q>> = idx.iter().map(|&i| item_row(base, candidates[i])).collect();
            if let Some(n) = normal_of(rows, dim) {
                let m = dot(&n, &pts[base]);
                if pts.iter().all(|p| dot(&n, p) >= m) {
                    found.insert(n, m);
                }
            }
            if !next_combination(&mut idx, candidates.len()) {
                break;
            }
        }
    }
    found
        .into_iter()
        .map(|(normal, m)| {
            let points = (0..pts.len()).filter(|&i| dot(&normal, &pts[i]) == m).collect();
            Facet { normal, points }
        })
        .collect()
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Primitive nonnegative integer normal to the given rows, if the row
/// space has codimension one and the normal has no mixed signs.
fn normal_of(rows: Vec<Vec<Q>>, dim: usize) -> Option<Vec<i64>> {
    let ns = nullspace(rows, dim);
    if ns.len() != 1 {
        return None;
    }
    let v = &ns[0];
    let den = v.iter().fold(1i64, |l, x| l.lcm(x.denom()));
    let mut ints: Vec<i64> = v.iter().map(|x| (x * qi(den)).to_integer()).collect();
    if ints.iter().any(|x| x.is_negative()) {
        if ints.iter().any(|x| x.is_positive()) {
            return None;
        }
        ints.iter_mut().for_each(|x| *x = -*x);
    }
    Some(primitive(&ints))
}

fn row_reduce(mut rows: Vec<Vec<Q>>, dim: usize) -> (Vec<Vec<Q>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..dim {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = qi(1) / rows[r][c];
        for x in rows[r].iter_mut() {
            *x *= inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c];
                let pivot_row = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(pivot_row) {
                    *x -= f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    (rows, pivots)
}

fn rank(rows: Vec<Vec<Q>>) -> usize {
    let dim = rows.first().map_or(0, |r| r.len());
    row_reduce(rows, dim).1.len()
}

fn nullspace(rows: Vec<Vec<Q>>, dim: usize) -> Vec<Vec<Q>> {
    let (red, pivots) = row_reduce(rows, dim);
    let free: Vec<usize> = (0..dim).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![Q::zero(); dim];
            v[fc] = qi(1);
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -red[r][fc];
            }
            v
        })
        .collect()
}
