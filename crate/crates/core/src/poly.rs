//! Polynomials over Gaussian rationals: multivariate polynomials in a fixed
//! ambient coordinate list, univariate polynomial curves in one parameter ζ,
//! and polynomial self-maps, with the calculus primitives the geometry needs
//! (partial derivatives, exact antiderivatives, substitution, certified sup
//! bounds on circles).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::exactnum::{ComplexFloat, GaussianRational};
use crate::Error;

/// An ordered list of coordinate names, shared by reference.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ambient(Arc<Vec<String>>);

impl Ambient {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        Ambient(Arc::new(names.into_iter().map(Into::into).collect()))
    }

    /// The standard Engel coordinates `(w, x, y, z)`.
    pub fn wxyz() -> Self {
        Ambient::new(["w", "x", "y", "z"])
    }

    /// Contact coordinates `(x, y, z)`.
    pub fn xyz() -> Self {
        Ambient::new(["x", "y", "z"])
    }

    /// Prolongation chart coordinates with fiber coordinate `t`.
    pub fn xyzt() -> Self {
        Ambient::new(["x", "y", "z", "t"])
    }

    /// Prolongation chart at infinity, fiber coordinate `s`.
    pub fn xyzs() -> Self {
        Ambient::new(["x", "y", "z", "s"])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn name(&self, i: usize) -> &str {
        &self.0[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    pub fn require(&self, name: &str) -> crate::Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::UnknownCoordinate(name.to_string()))
    }

    fn mismatch(&self, other: &Ambient) -> Error {
        Error::AmbientMismatch(self.0.as_ref().clone(), other.0.as_ref().clone())
    }
}

impl fmt::Debug for Ambient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.join(","))
    }
}

/// Dense exponent vector with graded-lexicographic order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Expt(pub Vec<u32>);

impl Expt {
    pub fn zero(n: usize) -> Self {
        Expt(vec![0; n])
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Expt) -> Expt {
        Expt(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Expt {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.total()
            .cmp(&other.total())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Expt {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A multivariate polynomial with Gaussian-rational coefficients.
///
/// Terms are kept in a graded-lex ordered map with no zero coefficients, so
/// equal polynomials are structurally equal.
#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    ambient: Ambient,
    terms: BTreeMap<Expt, GaussianRational>,
}

impl MultiPoly {
    pub fn zero(ambient: &Ambient) -> Self {
        MultiPoly { ambient: ambient.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ambient: &Ambient, c: GaussianRational) -> Self {
        let mut p = Self::zero(ambient);
        p.add_term(Expt::zero(ambient.len()), c);
        p
    }

    pub fn one(ambient: &Ambient) -> Self {
        Self::constant(ambient, GaussianRational::one())
    }

    /// The coordinate function `name`.
    pub fn var(ambient: &Ambient, name: &str) -> crate::Result<Self> {
        let idx = ambient.require(name)?;
        let mut e = Expt::zero(ambient.len());
        e.0[idx] = 1;
        let mut p = Self::zero(ambient);
        p.add_term(e, GaussianRational::one());
        Ok(p)
    }

    pub fn monomial(ambient: &Ambient, expt: Expt, coef: GaussianRational) -> crate::Result<Self> {
        if expt.0.len() != ambient.len() {
            return Err(Error::DimensionMismatch { expected: ambient.len(), got: expt.0.len() });
        }
        let mut p = Self::zero(ambient);
        p.add_term(expt, coef);
        Ok(p)
    }

    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Expt, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.total() == 0)
    }

    pub fn constant_part(&self) -> GaussianRational {
        self.terms
            .get(&Expt::zero(self.ambient.len()))
            .cloned()
            .unwrap_or_else(GaussianRational::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Expt::total).max().unwrap_or(0)
    }

    /// Leading coefficient in graded-lex order (zero polynomial gives zero).
    pub fn leading_coefficient(&self) -> GaussianRational {
        self.terms
            .iter()
            .next_back()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(GaussianRational::zero)
    }

    fn add_term(&mut self, e: Expt, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn try_add(&self, rhs: &Self) -> crate::Result<Self> {
        if self.ambient != rhs.ambient {
            return Err(self.ambient.mismatch(&rhs.ambient));
        }
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, rhs: &Self) -> crate::Result<Self> {
        self.try_add(&-rhs)
    }

    pub fn try_mul(&self, rhs: &Self) -> crate::Result<Self> {
        if self.ambient != rhs.ambient {
            return Err(self.ambient.mismatch(&rhs.ambient));
        }
        let mut out = Self::zero(&self.ambient);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea.mul(eb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ambient);
        }
        let mut out = Self::zero(&self.ambient);
        for (e, a) in &self.terms {
            out.terms.insert(e.clone(), a * c);
        }
        out
    }

    /// Exact partial derivative with respect to a named coordinate.
    pub fn differentiate(&self, var: &str) -> crate::Result<Self> {
        let idx = self.ambient.require(var)?;
        let mut out = Self::zero(&self.ambient);
        for (e, c) in &self.terms {
            let k = e.0[idx];
            if k == 0 {
                continue;
            }
            let mut de = e.clone();
            de.0[idx] = k - 1;
            out.add_term(de, c * &GaussianRational::from_int(k as i64));
        }
        Ok(out)
    }

    /// Exact evaluation at a point of matching dimension.
    pub fn evaluate(&self, point: &[GaussianRational]) -> crate::Result<GaussianRational> {
        if point.len() != self.ambient.len() {
            return Err(Error::DimensionMismatch { expected: self.ambient.len(), got: point.len() });
        }
        let mut acc = GaussianRational::zero();
        let mut powers: Vec<Vec<GaussianRational>> =
            point.iter().map(|p| vec![GaussianRational::one(), p.clone()]).collect();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (i, &k) in e.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while powers[i].len() <= k as usize {
                    let next = &powers[i][powers[i].len() - 1] * &point[i];
                    powers[i].push(next);
                }
                term = &term * &powers[i][k as usize];
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    /// Floating evaluation at a point of matching dimension.
    pub fn evaluate_float(&self, point: &[ComplexFloat]) -> crate::Result<ComplexFloat> {
        if point.len() != self.ambient.len() {
            return Err(Error::DimensionMismatch { expected: self.ambient.len(), got: point.len() });
        }
        let mut acc = ComplexFloat::zero();
        for (e, c) in &self.terms {
            let mut term = c.to_float();
            for (i, &k) in e.0.iter().enumerate() {
                for _ in 0..k {
                    term = term * point[i];
                }
            }
            acc = acc + term;
        }
        Ok(acc)
    }

    /// Exact substitution of a curve: the univariate polynomial `p(γ(ζ))`.
    ///
    /// The curve's target coordinates must cover this polynomial's ambient.
    pub fn compose_curve(&self, curve: &PolyCurve) -> crate::Result<UniPoly> {
        let comps: Vec<&UniPoly> = self
            .ambient
            .names()
            .iter()
            .map(|n| {
                curve
                    .ambient()
                    .index_of(n)
                    .map(|i| curve.component(i))
                    .ok_or_else(|| Error::UnknownCoordinate(n.clone()))
            })
            .collect::<crate::Result<_>>()?;
        let mut acc = UniPoly::zero();
        let mut powers: Vec<Vec<UniPoly>> =
            comps.iter().map(|u| vec![UniPoly::one(), (*u).clone()]).collect();
        for (e, c) in &self.terms {
            let mut term = UniPoly::constant(c.clone());
            for (i, &k) in e.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while powers[i].len() <= k as usize {
                    let next = &powers[i][powers[i].len() - 1] * comps[i];
                    powers[i].push(next);
                }
                term = &term * &powers[i][k as usize];
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    /// Re-express this polynomial in another ambient containing all of its
    /// coordinates (matching by name).
    pub fn into_ambient(&self, target: &Ambient) -> crate::Result<MultiPoly> {
        let positions: Vec<usize> = self
            .ambient
            .names()
            .iter()
            .map(|n| target.require(n))
            .collect::<crate::Result<_>>()?;
        let mut out = MultiPoly::zero(target);
        for (e, c) in &self.terms {
            let mut exp = vec![0u32; target.len()];
            for (src, &dst) in positions.iter().enumerate() {
                exp[dst] = e.0[src];
            }
            out.add_term(Expt(exp), c.clone());
        }
        Ok(out)
    }

    /// Exact substitution of one multivariate polynomial per coordinate.
    ///
    /// All `values` must share an ambient, which becomes the result's ambient.
    pub fn substitute(&self, values: &[MultiPoly]) -> crate::Result<MultiPoly> {
        if values.len() != self.ambient.len() {
            return Err(Error::DimensionMismatch { expected: self.ambient.len(), got: values.len() });
        }
        let target = values
            .first()
            .map(|v| v.ambient.clone())
            .unwrap_or_else(|| self.ambient.clone());
        for v in values {
            if v.ambient != target {
                return Err(target.mismatch(&v.ambient));
            }
        }
        let mut acc = MultiPoly::zero(&target);
        let mut powers: Vec<Vec<MultiPoly>> = values
            .iter()
            .map(|v| vec![MultiPoly::one(&target), v.clone()])
            .collect();
        for (e, c) in &self.terms {
            let mut term = MultiPoly::constant(&target, c.clone());
            for (i, &k) in e.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while powers[i].len() <= k as usize {
                    let next = powers[i][powers[i].len() - 1].try_mul(&values[i])?;
                    powers[i].push(next);
                }
                term = term.try_mul(&powers[i][k as usize])?;
            }
            acc = acc.try_add(&term)?;
        }
        Ok(acc)
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.try_add(rhs).expect("ambient mismatch")
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.try_sub(rhs).expect("ambient mismatch")
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.try_mul(rhs).expect("ambient mismatch")
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        let mut out = MultiPoly::zero(&self.ambient);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), -c);
        }
        out
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (i, &k) in e.0.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*{}", self.ambient.name(i))?,
                    _ => write!(f, "*{}^{}", self.ambient.name(i), k)?,
                }
            }
        }
        Ok(())
    }
}

/// A univariate polynomial in the parameter ζ.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct UniPoly {
    /// `coeffs[k]` multiplies ζ^k; no trailing zeros are stored.
    coeffs: Vec<GaussianRational>,
}

impl UniPoly {
    pub fn zero() -> Self {
        UniPoly::default()
    }

    pub fn one() -> Self {
        UniPoly::constant(GaussianRational::one())
    }

    pub fn constant(c: GaussianRational) -> Self {
        UniPoly::from_coeffs(vec![c])
    }

    /// The identity ζ.
    pub fn zeta() -> Self {
        UniPoly::from_coeffs(vec![GaussianRational::zero(), GaussianRational::one()])
    }

    /// `a + b·ζ`.
    pub fn affine(a: GaussianRational, b: GaussianRational) -> Self {
        UniPoly::from_coeffs(vec![a, b])
    }

    pub fn from_coeffs(mut coeffs: Vec<GaussianRational>) -> Self {
        while coeffs.last().is_some_and(GaussianRational::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[GaussianRational] {
        &self.coeffs
    }

    /// Coefficient of ζ^k (zero when k exceeds the degree).
    pub fn coeff(&self, k: usize) -> GaussianRational {
        self.coeffs.get(k).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return UniPoly::zero();
        }
        UniPoly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Exact derivative in ζ.
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return UniPoly::zero();
        }
        UniPoly::from_coeffs(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(k, c)| c * &GaussianRational::from_int((k + 1) as i64))
                .collect(),
        )
    }

    /// The primitive with zero constant term; exact.
    pub fn antiderivative(&self) -> Self {
        if self.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![GaussianRational::zero()];
        for (k, c) in self.coeffs.iter().enumerate() {
            out.push(c.checked_div(&GaussianRational::from_int((k + 1) as i64)).unwrap());
        }
        UniPoly::from_coeffs(out)
    }

    pub fn evaluate(&self, z: &GaussianRational) -> GaussianRational {
        let mut acc = GaussianRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * z) + c;
        }
        acc
    }

    pub fn evaluate_float(&self, z: ComplexFloat) -> ComplexFloat {
        let mut acc = ComplexFloat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c.to_float();
        }
        acc
    }

    /// Exact reparametrization `ζ ↦ u(a·ζ + b)`.
    pub fn compose_affine(&self, a: &GaussianRational, b: &GaussianRational) -> Self {
        let inner = UniPoly::affine(b.clone(), a.clone());
        let mut acc = UniPoly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &inner) + &UniPoly::constant(c.clone());
        }
        acc
    }

    /// Exact rational upper bound for `sup |u|` on the closed disc `|ζ| ≤ r`:
    /// the triangle-inequality bound `Σ |c_k| r^k` with validated coefficient
    /// bounds.
    pub fn sup_bound_exact(&self, r: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        let mut rk = BigRational::one();
        for c in &self.coeffs {
            acc += c.abs_upper_bound() * &rk;
            rk *= r;
        }
        acc
    }

    /// Exact rational lower bound for `inf |u|` on the closed disc `|ζ| ≤ r`:
    /// `|c_0| - Σ_{k≥1} |c_k| r^k` (may be negative, in which case it carries
    /// no information).
    pub fn inf_bound_exact(&self, r: &BigRational) -> BigRational {
        let Some(c0) = self.coeffs.first() else {
            return BigRational::zero();
        };
        let mut acc = c0.abs_lower_bound();
        let mut rk = BigRational::one();
        for c in &self.coeffs[1..] {
            rk *= r;
            acc -= c.abs_upper_bound() * &rk;
        }
        acc
    }

    /// Float coefficient-sum bound for `sup |u|` on `|ζ| ≤ r`.
    pub fn coeff_sum_bound(&self, r: f64) -> f64 {
        let mut acc = 0.0;
        let mut rk = 1.0;
        for c in &self.coeffs {
            acc += c.to_float().abs() * rk;
            rk *= r;
        }
        acc
    }
}

impl Add for &UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(&self.coeff(k) + &rhs.coeff(k));
        }
        UniPoly::from_coeffs(out)
    }
}

impl Sub for &UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: &UniPoly) -> UniPoly {
        self + &(-rhs)
    }
}

impl Mul for &UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: &UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![GaussianRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        UniPoly::from_coeffs(out)
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*zeta")?,
                _ => write!(f, "({c})*zeta^{k}")?,
            }
        }
        Ok(())
    }
}

/// Maximum of `|u|` over sampled points of the circle `|ζ| = r`, together
/// with a rigorous upper bound for the true sup.
///
/// The certificate adds the worst arc-step travel `(π r / samples)·L` to the
/// sampled maximum, where `L = Σ k|c_k| r^{k-1}` bounds `|u'|` on the closed
/// disc (mean value inequality along boundary arcs).
pub fn sup_on_circle(u: &UniPoly, r: f64, samples: usize) -> (f64, f64) {
    assert!(r > 0.0, "radius must be positive");
    let samples = samples.max(8);
    let mut numeric_max: f64 = 0.0;
    for k in 0..samples {
        let theta = 2.0 * std::f64::consts::PI * (k as f64) / (samples as f64);
        let v = u.evaluate_float(ComplexFloat::cis(theta).scale(r)).abs();
        numeric_max = numeric_max.max(v);
    }
    let deriv_bound = u.derivative().coeff_sum_bound(r);
    let certified_upper = numeric_max + std::f64::consts::PI * r / (samples as f64) * deriv_bound;
    (numeric_max, certified_upper)
}

/// Default sample count for [`sup_on_circle`]: arc-length certification
/// tightens with degree.
pub fn default_circle_samples(u: &UniPoly) -> usize {
    (8 * u.degree()).max(64)
}

/// A polynomial curve `ζ ↦ (γ_1(ζ), …, γ_n(ζ))` into an ambient space.
#[derive(Clone, PartialEq, Eq)]
pub struct PolyCurve {
    ambient: Ambient,
    components: Vec<UniPoly>,
}

impl PolyCurve {
    pub fn new(ambient: Ambient, components: Vec<UniPoly>) -> crate::Result<Self> {
        if components.len() != ambient.len() {
            return Err(Error::DimensionMismatch {
                expected: ambient.len(),
                got: components.len(),
            });
        }
        Ok(PolyCurve { ambient, components })
    }

    /// The constant curve at a point.
    pub fn constant(ambient: Ambient, point: &[GaussianRational]) -> crate::Result<Self> {
        let comps = point.iter().map(|c| UniPoly::constant(c.clone())).collect();
        PolyCurve::new(ambient, comps)
    }

    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    pub fn components(&self) -> &[UniPoly] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &UniPoly {
        &self.components[i]
    }

    pub fn component_by_name(&self, name: &str) -> crate::Result<&UniPoly> {
        Ok(&self.components[self.ambient.require(name)?])
    }

    /// Componentwise derivative in ζ.
    pub fn derivative(&self) -> PolyCurve {
        PolyCurve {
            ambient: self.ambient.clone(),
            components: self.components.iter().map(UniPoly::derivative).collect(),
        }
    }

    pub fn evaluate(&self, z: &GaussianRational) -> Vec<GaussianRational> {
        self.components.iter().map(|u| u.evaluate(z)).collect()
    }

    pub fn evaluate_float(&self, z: ComplexFloat) -> Vec<ComplexFloat> {
        self.components.iter().map(|u| u.evaluate_float(z)).collect()
    }

    /// The basepoint `γ(0)`.
    pub fn at_zero(&self) -> Vec<GaussianRational> {
        self.components.iter().map(|u| u.coeff(0)).collect()
    }

    pub fn is_constant(&self) -> bool {
        self.components.iter().all(UniPoly::is_constant)
    }

    pub fn degree(&self) -> usize {
        self.components.iter().map(UniPoly::degree).max().unwrap_or(0)
    }

    /// Exact reparametrization `ζ ↦ γ(a·ζ + b)`.
    pub fn compose_affine(&self, a: &GaussianRational, b: &GaussianRational) -> PolyCurve {
        PolyCurve {
            ambient: self.ambient.clone(),
            components: self.components.iter().map(|u| u.compose_affine(a, b)).collect(),
        }
    }
}

impl fmt::Debug for PolyCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "curve{:?}[", self.ambient)?;
        for (i, u) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}={:?}", self.ambient.name(i), u)?;
        }
        write!(f, "]")
    }
}

/// A polynomial map between ambient spaces: one source-ambient polynomial
/// per target coordinate.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyMap {
    source: Ambient,
    target: Ambient,
    components: Vec<MultiPoly>,
}

impl PolyMap {
    pub fn new(source: Ambient, target: Ambient, components: Vec<MultiPoly>) -> crate::Result<Self> {
        if components.len() != target.len() {
            return Err(Error::DimensionMismatch {
                expected: target.len(),
                got: components.len(),
            });
        }
        for c in &components {
            if c.ambient() != &source {
                return Err(source.mismatch(c.ambient()));
            }
        }
        Ok(PolyMap { source, target, components })
    }

    pub fn identity(ambient: &Ambient) -> Self {
        let components = ambient
            .names()
            .iter()
            .map(|n| MultiPoly::var(ambient, n).unwrap())
            .collect();
        PolyMap { source: ambient.clone(), target: ambient.clone(), components }
    }

    pub fn source(&self) -> &Ambient {
        &self.source
    }

    pub fn target(&self) -> &Ambient {
        &self.target
    }

    pub fn components(&self) -> &[MultiPoly] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &MultiPoly {
        &self.components[i]
    }

    pub fn apply(&self, point: &[GaussianRational]) -> crate::Result<Vec<GaussianRational>> {
        self.components.iter().map(|c| c.evaluate(point)).collect()
    }

    /// Composition `self ∘ inner` (apply `inner` first).
    pub fn compose(&self, inner: &PolyMap) -> crate::Result<PolyMap> {
        if self.source != inner.target {
            return Err(self.source.mismatch(&inner.target));
        }
        let components = self
            .components
            .iter()
            .map(|c| c.substitute(&inner.components))
            .collect::<crate::Result<Vec<_>>>()?;
        PolyMap::new(inner.source.clone(), self.target.clone(), components)
    }

    /// The matrix `J[i][j] = ∂(component_i)/∂(source_j)`.
    pub fn jacobian(&self) -> Vec<Vec<MultiPoly>> {
        self.components
            .iter()
            .map(|c| {
                self.source
                    .names()
                    .iter()
                    .map(|n| c.differentiate(n).unwrap())
                    .collect()
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && *self == PolyMap::identity(&self.source)
    }
}

// --- JSON schema ------------------------------------------------------
//
// {"ambient":["w","x","y","z"],"terms":[{"exp":[0,1,0,0],"coef":"1/2+i"}]}
// Curves and maps are objects of this schema keyed by target coordinate.

#[derive(Serialize, Deserialize)]
struct TermJson {
    exp: Vec<u32>,
    coef: GaussianRational,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    ambient: Vec<String>,
    terms: Vec<TermJson>,
}

impl Serialize for MultiPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyJson {
            ambient: self.ambient.names().to_vec(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| TermJson { exp: e.0.clone(), coef: c.clone() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = PolyJson::deserialize(d)?;
        let ambient = Ambient::new(raw.ambient);
        let mut p = MultiPoly::zero(&ambient);
        for t in raw.terms {
            if t.exp.len() != ambient.len() {
                return Err(serde::de::Error::custom(format!(
                    "exponent vector length {} does not match ambient size {}",
                    t.exp.len(),
                    ambient.len()
                )));
            }
            p.add_term(Expt(t.exp), t.coef);
        }
        Ok(p)
    }
}

const CURVE_PARAM: &str = "zeta";

impl Serialize for UniPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyJson {
            ambient: vec![CURVE_PARAM.to_string()],
            terms: self
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| TermJson { exp: vec![k as u32], coef: c.clone() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for UniPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = PolyJson::deserialize(d)?;
        if raw.ambient.len() != 1 {
            return Err(serde::de::Error::custom("univariate polynomial expects one parameter"));
        }
        let mut coeffs: Vec<GaussianRational> = Vec::new();
        for t in raw.terms {
            let [k] = t.exp[..] else {
                return Err(serde::de::Error::custom("univariate exponent must have length 1"));
            };
            let k = k as usize;
            if coeffs.len() <= k {
                coeffs.resize(k + 1, GaussianRational::zero());
            }
            coeffs[k] = &coeffs[k] + &t.coef;
        }
        Ok(UniPoly::from_coeffs(coeffs))
    }
}

#[derive(Serialize, Deserialize)]
struct CurveJson {
    ambient: Vec<String>,
    components: BTreeMap<String, UniPoly>,
}

impl Serialize for PolyCurve {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CurveJson {
            ambient: self.ambient.names().to_vec(),
            components: self
                .ambient
                .names()
                .iter()
                .cloned()
                .zip(self.components.iter().cloned())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyCurve {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = CurveJson::deserialize(d)?;
        let ambient = Ambient::new(raw.ambient);
        let mut components = Vec::with_capacity(ambient.len());
        for name in ambient.names() {
            let u = raw
                .components
                .get(name)
                .cloned()
                .ok_or_else(|| serde::de::Error::custom(format!("missing component `{name}`")))?;
            components.push(u);
        }
        PolyCurve::new(ambient, components).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct MapJson {
    source: Vec<String>,
    target: Vec<String>,
    components: BTreeMap<String, MultiPoly>,
}

impl Serialize for PolyMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MapJson {
            source: self.source.names().to_vec(),
            target: self.target.names().to_vec(),
            components: self
                .target
                .names()
                .iter()
                .cloned()
                .zip(self.components.iter().cloned())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = MapJson::deserialize(d)?;
        let source = Ambient::new(raw.source);
        let target = Ambient::new(raw.target);
        let mut components = Vec::with_capacity(target.len());
        for name in target.names() {
            let p = raw
                .components
                .get(name)
                .cloned()
                .ok_or_else(|| serde::de::Error::custom(format!("missing component `{name}`")))?;
            components.push(p);
        }
        PolyMap::new(source, target, components).map_err(serde::de::Error::custom)
    }
}

/// Parse a point given as comma-separated scalar literals.
pub fn parse_point(s: &str) -> crate::Result<Vec<GaussianRational>> {
    s.split(',').map(|part| part.trim().parse()).collect()
}

/// Parse a univariate polynomial given as comma-separated coefficients
/// (constant term first).
pub fn parse_unipoly(s: &str) -> crate::Result<UniPoly> {
    Ok(UniPoly::from_coeffs(
        s.split(',')
            .map(|part| part.trim().parse())
            .collect::<crate::Result<Vec<GaussianRational>>>()?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wxyz_poly(s: &str) -> MultiPoly {
        // tiny builder for tests: "y-z*x" style is overkill; build by hand
        match s {
            "y-zx" => {
                let a = Ambient::wxyz();
                let y = MultiPoly::var(&a, "y").unwrap();
                let z = MultiPoly::var(&a, "z").unwrap();
                let x = MultiPoly::var(&a, "x").unwrap();
                &y - &(&z * &x)
            }
            _ => panic!("unknown fixture"),
        }
    }

    fn gr(n: i64, d: i64) -> GaussianRational {
        GaussianRational::from_ratio(n, d)
    }

    #[test]
    fn ring_arithmetic_examples() {
        let a = Ambient::wxyz();
        let z = MultiPoly::var(&a, "z").unwrap();
        let x = MultiPoly::var(&a, "x").unwrap();
        let y = MultiPoly::var(&a, "y").unwrap();
        let w = MultiPoly::var(&a, "w").unwrap();

        let zx = &z * &x;
        assert_eq!(zx.total_degree(), 2);
        assert_eq!(&(&y + &zx) - &zx, y);

        let one_plus_w = &MultiPoly::one(&a) + &w;
        let sq = &one_plus_w * &one_plus_w;
        let expect = {
            let two_w = w.scale(&GaussianRational::from_int(2));
            let w2 = &w * &w;
            &(&MultiPoly::one(&a) + &two_w) + &w2
        };
        assert_eq!(sq, expect);
    }

    #[test]
    fn ambient_mismatch_is_an_error() {
        let p = MultiPoly::one(&Ambient::wxyz());
        let q = MultiPoly::one(&Ambient::xyz());
        assert!(matches!(p.try_add(&q), Err(Error::AmbientMismatch(..))));
    }

    #[test]
    fn differentiate_examples() {
        let a = Ambient::wxyz();
        let w = MultiPoly::var(&a, "w").unwrap();
        let z = MultiPoly::var(&a, "z").unwrap();
        let x = MultiPoly::var(&a, "x").unwrap();

        let wz = &w * &z;
        assert_eq!(wz.differentiate("w").unwrap(), z);
        assert!(MultiPoly::one(&a).differentiate("x").unwrap().is_zero());

        let z2x = &(&z * &z) * &x;
        let expect = (&z * &x).scale(&GaussianRational::from_int(2));
        assert_eq!(z2x.differentiate("z").unwrap(), expect);
        assert!(matches!(wz.differentiate("q"), Err(Error::UnknownCoordinate(_))));
    }

    #[test]
    fn antiderivative_has_zero_constant_and_inverts_derivative() {
        let u = UniPoly::from_coeffs(vec![gr(0, 1), gr(0, 1), gr(1, 1)]); // ζ²
        let v = u.antiderivative(); // ζ³/3
        assert_eq!(v.coeff(3), gr(1, 3));
        assert!(v.coeff(0).is_zero());
        assert_eq!(v.derivative(), u);
        assert!(UniPoly::zero().antiderivative().is_zero());
    }

    #[test]
    fn antiderivative_of_remark_integrand() {
        // v_x v_z + v_x² v_w ζ  →  v_x v_z ζ + v_x² v_w ζ²/2
        let vx = gr(3, 1);
        let vz = gr(5, 1);
        let vw = gr(7, 1);
        let integrand = UniPoly::from_coeffs(vec![&vx * &vz, &(&vx * &vx) * &vw]);
        let out = integrand.antiderivative();
        assert_eq!(out.coeff(1), &vx * &vz);
        assert_eq!(out.coeff(2), (&(&vx * &vx) * &vw).scale(&num_rational::BigRational::new(1.into(), 2.into())));
    }

    #[test]
    fn compose_curve_examples() {
        let a = Ambient::wxyz();
        let p = wxyz_poly("y-zx");
        // γ(ζ) = (0, ζ, 0, 0)
        let gamma = PolyCurve::new(
            a.clone(),
            vec![UniPoly::zero(), UniPoly::zeta(), UniPoly::zero(), UniPoly::zero()],
        )
        .unwrap();
        assert!(p.compose_curve(&gamma).unwrap().is_zero());
        let x = MultiPoly::var(&a, "x").unwrap();
        assert_eq!(x.compose_curve(&gamma).unwrap(), UniPoly::zeta());

        let zx = &MultiPoly::var(&a, "z").unwrap() * &x;
        assert!(zx.compose_curve(&gamma).unwrap().is_zero());
    }

    #[test]
    fn evaluate_examples() {
        let p = wxyz_poly("y-zx");
        let pt: Vec<GaussianRational> =
            [5, 1, 2, 2].iter().map(|&n| GaussianRational::from_int(n)).collect();
        assert!(p.evaluate(&pt).unwrap().is_zero());

        let a = Ambient::wxyz();
        let w = MultiPoly::var(&a, "w").unwrap();
        let e1: Vec<GaussianRational> =
            [1, 0, 0, 0].iter().map(|&n| GaussianRational::from_int(n)).collect();
        assert!(w.evaluate(&e1).unwrap().is_one());
        assert!(matches!(
            w.evaluate(&e1[..3]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sup_on_circle_examples() {
        let (m, c) = sup_on_circle(&UniPoly::zeta(), 1.0, 64);
        assert!((m - 1.0).abs() < 1e-12);
        assert!(c >= 1.0);

        let (m, c) = sup_on_circle(&UniPoly::constant(gr(-7, 2)), 1.0, 64);
        assert!((m - 3.5).abs() < 1e-12 && (c - 3.5).abs() < 1e-9);

        // ζ² + 1 on the unit circle: max 2 at ±1.
        let u = UniPoly::from_coeffs(vec![gr(1, 1), gr(0, 1), gr(1, 1)]);
        let (m, c) = sup_on_circle(&u, 1.0, 64);
        assert!((m - 2.0).abs() < 1e-9);
        assert!((2.0..=2.2).contains(&c));
    }

    #[test]
    fn exact_disc_bounds() {
        use num_traits::One;
        let u = UniPoly::from_coeffs(vec![gr(4, 1), gr(1, 2)]); // 4 + ζ/2
        let r = BigRational::one();
        assert_eq!(u.sup_bound_exact(&r), BigRational::new(9.into(), 2.into()));
        assert_eq!(u.inf_bound_exact(&r), BigRational::new(7.into(), 2.into()));
    }

    #[test]
    fn map_compose_and_jacobian() {
        let a = Ambient::wxyz();
        let id = PolyMap::identity(&a);
        assert!(id.is_identity());
        let j = id.jacobian();
        for (i, row) in j.iter().enumerate() {
            for (k, entry) in row.iter().enumerate() {
                assert_eq!(entry.is_zero(), i != k);
            }
        }
        assert_eq!(id.compose(&id).unwrap(), id);
    }

    #[test]
    fn json_round_trip() {
        let p = wxyz_poly("y-zx");
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"ambient\""));
        let q: MultiPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);

        let curve = PolyCurve::new(
            Ambient::wxyz(),
            vec![UniPoly::zero(), UniPoly::zeta(), UniPoly::zero(), UniPoly::constant(gr(1, 2))],
        )
        .unwrap();
        let s = serde_json::to_string(&curve).unwrap();
        let back: PolyCurve = serde_json::from_str(&s).unwrap();
        assert_eq!(curve, back);
    }

    mod properties {
        use super::*;
        use crate::exactnum::ratio_to_f64;
        use proptest::prelude::*;

        prop_compose! {
            fn arb_coeff()(n in -20i64..20, d in 1i64..6, im in -20i64..20) -> GaussianRational {
                GaussianRational::new(
                    BigRational::new(n.into(), d.into()),
                    BigRational::from_integer(im.into()),
                )
            }
        }

        prop_compose! {
            fn arb_unipoly()(coeffs in proptest::collection::vec(arb_coeff(), 0..6)) -> UniPoly {
                UniPoly::from_coeffs(coeffs)
            }
        }

        fn arb_multipoly() -> impl Strategy<Value = MultiPoly> {
            proptest::collection::vec((proptest::collection::vec(0u32..3, 4), arb_coeff()), 0..5)
                .prop_map(|terms| {
                    let a = Ambient::wxyz();
                    let mut p = MultiPoly::zero(&a);
                    for (e, c) in terms {
                        p.add_term(Expt(e), c);
                    }
                    p
                })
        }

        proptest! {
            #[test]
            fn derivative_inverts_antiderivative(u in arb_unipoly()) {
                prop_assert_eq!(u.antiderivative().derivative(), u);
            }

            #[test]
            fn compose_curve_is_multiplicative(p in arb_multipoly(), q in arb_multipoly(),
                                               gamma in proptest::collection::vec(arb_unipoly(), 4)) {
                let curve = PolyCurve::new(Ambient::wxyz(), gamma).unwrap();
                let lhs = (&p * &q).compose_curve(&curve).unwrap();
                let rhs = &p.compose_curve(&curve).unwrap() * &q.compose_curve(&curve).unwrap();
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn certified_upper_dominates_numeric_max(u in arb_unipoly(), samples in 8usize..128) {
                let (m, c) = sup_on_circle(&u, 1.0, samples);
                prop_assert!(c >= m);
                // doubling the samples never loosens the certificate much;
                // allow floating slack
                let (_, c2) = sup_on_circle(&u, 1.0, samples * 2);
                prop_assert!(c2 <= c + 1e-9);
            }

            #[test]
            fn exact_sup_bound_dominates_samples(u in arb_unipoly()) {
                let bound = ratio_to_f64(&u.sup_bound_exact(&BigRational::one()));
                let (m, _) = sup_on_circle(&u, 1.0, 32);
                prop_assert!(bound >= m - 1e-9);
            }
        }
    }
}
