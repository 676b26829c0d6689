//! Tangent hyperplanes through `k − 2` points of an arc and the tangent functions they define.

use std::collections::HashMap;
use std::sync::{Arc as Shared, RwLock};

use crate::arcs::{dot, Arc, Basis, BasisRole};
use crate::combi::IndexSubset;
use crate::error::{Error, Result};
use crate::exactla::FqMatrix;
use crate::gf::{Fe, Field};

/// The `t` tangent functionals at `A`, each scaled so its first nonzero
/// coefficient is 1, sorted by encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TangentSystem {
    pub field: Field,
    pub a: IndexSubset,
    pub t: usize,
    pub functionals: Vec<Vec<Fe>>,
}

fn normalize_functional(f: &Field, mut phi: Vec<Fe>) -> Vec<Fe> {
    if let Some(&lead) = phi.iter().find(|x| !x.is_zero()) {
        let inv = f.inv(lead).expect("nonzero");
        f.scale(&mut phi, inv);
    }
    phi
}

pub fn tangent_count(s: &Arc) -> Result<usize> {
    usize::try_from(s.t()).map_err(|_| {
        Error::BadSizes(format!(
            "an arc of size {} exceeds q + k − 1 = {}",
            s.len(),
            s.field().q() as usize + s.k() - 1
        ))
    })
}

pub fn tangent_system(s: &Arc, a: IndexSubset) -> Result<TangentSystem> {
    let k = s.k();
    let f = s.field();
    if a.len() + 2 != k {
        return Err(Error::BadSizes(format!(
            "|A| = {} but k − 2 = {}",
            a.len(),
            k as i64 - 2
        )));
    }
    if let Some(i) = a.iter().find(|&i| i >= s.len()) {
        return Err(Error::IndexOutOfRange {
            index: i,
            ground: s.len(),
        });
    }
    let t = tangent_count(s)?;
    let rows: Vec<Vec<Fe>> = a.iter().map(|i| s.vector(i).to_vec()).collect();
    let null = if rows.is_empty() {
        FqMatrix::zeros(f, 0, k)
    } else {
        FqMatrix::from_rows(f, &rows)?
    }
    .nullspace();
    if null.len() != 2 {
        return Err(Error::CountMismatch {
            expected: 2,
            found: null.len(),
        });
    }
    let (phi1, phi2) = (&null[0].entries, &null[1].entries);
    let outside: Vec<usize> = (0..s.len()).filter(|&i| !a.contains(i)).collect();
    // the q + 1 hyperplanes through span(A): φ1 + λφ2 and φ2
    let pencil = f
        .elements()
        .map(|lambda| {
            phi1.iter()
                .zip(phi2)
                .map(|(&x, &y)| f.add(x, f.mul(lambda, y)))
                .collect::<Vec<_>>()
        })
        .chain(std::iter::once(phi2.clone()));
    let mut functionals: Vec<Vec<Fe>> = pencil
        .filter(|phi| outside.iter().all(|&i| !dot(f, phi, s.vector(i)).is_zero()))
        .map(|phi| normalize_functional(f, phi))
        .collect();
    if functionals.len() != t {
        return Err(Error::CountMismatch {
            expected: t,
            found: functionals.len(),
        });
    }
    functionals.sort();
    Ok(TangentSystem {
        field: f.clone(),
        a,
        t,
        functionals,
    })
}

impl TangentSystem {
    /// `f_{A,S}(x)`: the product of the tangent functionals at `x`.
    pub fn eval(&self, x: &[Fe]) -> Fe {
        let f = &self.field;
        f.product(self.functionals.iter().map(|phi| dot(f, phi, x)))
    }

    /// The same hyperplanes with each functional multiplied by a scalar.
    pub fn rescaled(&self, scalars: &[Fe]) -> TangentSystem {
        let f = &self.field;
        let functionals = self
            .functionals
            .iter()
            .zip(scalars)
            .map(|(phi, &c)| phi.iter().map(|&x| f.mul(x, c)).collect())
            .collect();
        TangentSystem {
            functionals,
            ..self.clone()
        }
    }
}

pub fn tangent_eval(ts: &TangentSystem, x: &[Fe]) -> Fe {
    ts.eval(x)
}

/// Tangent systems of one arc, built on first use and shared afterwards.
pub struct TangentCache<'a> {
    arc: &'a Arc,
    map: RwLock<HashMap<IndexSubset, Shared<TangentSystem>>>,
}

impl<'a> TangentCache<'a> {
    pub fn new(arc: &'a Arc) -> Self {
        TangentCache {
            arc,
            map: RwLock::new(HashMap::new()),
        }
    }

    pub fn arc(&self) -> &'a Arc {
        self.arc
    }

    pub fn get(&self, a: IndexSubset) -> Result<Shared<TangentSystem>> {
        if let Some(ts) = self.map.read().expect("poisoned").get(&a) {
            return Ok(ts.clone());
        }
        let ts = Shared::new(tangent_system(self.arc, a)?);
        Ok(self
            .map
            .write()
            .expect("poisoned")
            .entry(a)
            .or_insert(ts)
            .clone())
    }

    /// `f_{A,S}` at the arc member with index `x`.
    pub fn f(&self, a: IndexSubset, x: usize) -> Result<Fe> {
        Ok(self.get(a)?.eval(self.arc.vector(x)))
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `B(A) = (b_1, b_2, A)` with `b_1, b_2` the first two members outside `A`.
pub fn adapted_basis(s: &Arc, a: IndexSubset) -> Result<Basis> {
    let mut idx: Vec<usize> = (0..s.len()).filter(|&i| !a.contains(i)).take(2).collect();
    if idx.len() < 2 || a.len() + 2 != s.k() {
        return Err(Error::BadSizes(format!(
            "no adapted basis for |A| = {}",
            a.len()
        )));
    }
    idx.extend(a.iter());
    let vectors = idx.iter().map(|&i| s.vector(i).to_vec()).collect();
    Basis::new(s.field(), vectors, BasisRole::TangentAdapted)
}

/// A homogeneous bivariate form `Σ c_i X^i Y^{t−i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryForm {
    pub coeffs: Vec<Fe>,
}

impl BinaryForm {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, f: &Field, x: Fe, y: Fe) -> Fe {
        let t = self.degree() as i64;
        f.sum(self.coeffs.iter().enumerate().map(|(i, &c)| {
            let xi = f.pow(x, i as i64).expect("nonnegative");
            let yi = f.pow(y, t - i as i64).expect("nonnegative");
            f.mul(c, f.mul(xi, yi))
        }))
    }
}

fn cross(f: &Field, a: (Fe, Fe), b: (Fe, Fe)) -> Fe {
    f.sub(f.mul(a.0, b.1), f.mul(b.0, a.1))
}

/// The weights `w_i = Π_{j≠i} (x_i y_j − x_j y_i)^{−1}`.
pub fn interpolation_weights(f: &Field, points: &[(Fe, Fe)]) -> Result<Vec<Fe>> {
    let mut w = Vec::with_capacity(points.len());
    for (i, &p) in points.iter().enumerate() {
        let mut acc = Fe::ONE;
        for (j, &r) in points.iter().enumerate() {
            if i != j {
                let d = cross(f, p, r);
                if d.is_zero() {
                    return Err(Error::DegeneratePair(i.min(j), i.max(j)));
                }
                acc = f.mul(acc, d);
            }
        }
        w.push(f.inv(acc)?);
    }
    Ok(w)
}

/// `Σ_i f(x_i, y_i) Π_{j≠i} (x_i y_j − x_j y_i)^{−1}` over `t + 2` points; zero for every form of degree `t`.
pub fn check_interpolation(f: &Field, points: &[(Fe, Fe)], form: &BinaryForm) -> Result<Fe> {
    if points.len() != form.degree() + 2 {
        return Err(Error::BadSizes(format!(
            "{} points for a form of degree {}",
            points.len(),
            form.degree()
        )));
    }
    let w = interpolation_weights(f, points)?;
    Ok(f.sum(
        points
            .iter()
            .zip(&w)
            .map(|(&(x, y), &wi)| f.mul(form.eval(f, x, y), wi)),
    ))
}

/// `Σ_{x∈T} f_{A,S}(x) Π_{y∈T∖x} det(x, y, A)_B^{−1}` for a basis `B = (b_1, b_2, A)`.
pub fn check_homogtwovar(s: &Arc, a: IndexSubset, t_set: IndexSubset, b: &Basis) -> Result<Fe> {
    let k = s.k();
    let f = s.field();
    if b.k() != k || a.len() + 2 != k {
        return Err(Error::BadSizes(format!(
            "|A| = {} in dimension {k}",
            a.len()
        )));
    }
    if !a
        .iter()
        .zip(&b.vectors()[2..])
        .all(|(i, v)| s.vector(i) == v.as_slice())
    {
        return Err(Error::BasisNotAdapted);
    }
    let t = tangent_count(s)?;
    if t_set.len() != t + 2 || !t_set.is_disjoint(a) {
        return Err(Error::BadSizes(format!(
            "|T| = {} but t + 2 = {}",
            t_set.len(),
            t + 2
        )));
    }
    let ts = tangent_system(s, a)?;
    let mut total = Fe::ZERO;
    for x in t_set.iter() {
        let mut denom = Fe::ONE;
        for y in t_set.iter().filter(|&y| y != x) {
            let mut rows: Vec<&[Fe]> = vec![s.vector(x), s.vector(y)];
            rows.extend(a.iter().map(|i| s.vector(i)));
            denom = f.mul(denom, b.det_rows(&rows));
        }
        total = f.add(total, f.div(ts.eval(s.vector(x)), denom)?);
    }
    Ok(total)
}

fn segre_sets(s: &Arc, d: IndexSubset, u: usize, v: usize, w: usize) -> Result<()> {
    let k = s.k();
    if k < 3 || d.len() + 3 != k {
        return Err(Error::BadSizes(format!(
            "|D| = {} but k − 3 = {}",
            d.len(),
            k as i64 - 3
        )));
    }
    let uvw = IndexSubset::of(&[u, v, w]);
    if uvw.len() != 3 || !uvw.is_disjoint(d) || d.union(uvw).max().is_some_and(|m| m >= s.len()) {
        return Err(Error::BadSizes(
            "u, v, w must be distinct members outside D".into(),
        ));
    }
    Ok(())
}

/// Both sides of `f_{D∪u}(v) f_{D∪v}(w) f_{D∪w}(u) = (−1)^{t+1} f_{D∪u}(w) f_{D∪v}(u) f_{D∪w}(v)`.
pub fn check_segre(s: &Arc, d: IndexSubset, u: usize, v: usize, w: usize) -> Result<(Fe, Fe)> {
    segre_sets(s, d, u, v, w)?;
    let cache = TangentCache::new(s);
    segre_sides(&cache, d, u, v, w)
}

pub fn segre_sides(
    cache: &TangentCache,
    d: IndexSubset,
    u: usize,
    v: usize,
    w: usize,
) -> Result<(Fe, Fe)> {
    let s = cache.arc();
    segre_sets(s, d, u, v, w)?;
    let f = s.field();
    let t = tangent_count(s)?;
    let fv = |a: usize, x: usize| cache.f(d.with(a), x);
    let lhs = f.product([fv(u, v)?, fv(v, w)?, fv(w, u)?]);
    let rhs = f.mul(f.sign(t + 1), f.product([fv(u, w)?, fv(v, u)?, fv(w, v)?]));
    Ok((lhs, rhs))
}

/// With coordinates in the basis `(u, v, w, D)`, the `t` tangent slopes at
/// `D ∪ {w}` and the `|S| − k` secant slopes `x_2/x_1` partition the nonzero elements.
pub fn check_slope_partition(
    s: &Arc,
    d: IndexSubset,
    u: usize,
    v: usize,
    w: usize,
) -> Result<bool> {
    segre_sets(s, d, u, v, w)?;
    let f = s.field();
    let mut order = vec![u, v, w];
    order.extend(d.iter());
    let basis = Basis::from_arc(s, &order)?;
    let ts = tangent_system(s, d.with(w))?;
    let mut seen = vec![false; f.q() as usize];
    let mut mark = |x: Fe| -> bool {
        if x.is_zero() || seen[x.0 as usize] {
            return false;
        }
        seen[x.0 as usize] = true;
        true
    };
    let (bu, bv) = (s.vector(u), s.vector(v));
    for phi in &ts.functionals {
        let slope = f.neg(f.div(dot(f, phi, bu), dot(f, phi, bv))?);
        if !mark(slope) {
            return Ok(false);
        }
    }
    let basis_set = IndexSubset::of(&order);
    for x in (0..s.len()).filter(|&i| !basis_set.contains(i)) {
        let c = basis.coords(s.vector(x));
        if !mark(f.div(c[1], c[0])?) {
            return Ok(false);
        }
    }
    Ok(seen.iter().skip(1).all(|&b| b))
}
