//! Vector fields, differential forms and the exact distribution calculus:
//! Lie brackets, exterior derivative, wedge and interior products, generic
//! rank over the rational-function field, even-contact and Engel
//! verification, and the characteristic line field.
//!
//! Every decision here is symbolic. Point evaluation is only a fast path
//! for rank computations; rank deficiency is always certified by showing
//! that the relevant minors vanish identically.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::exactnum::GaussianRational;
use crate::poly::{Ambient, MultiPoly};
use crate::sample;
use crate::Error;

/// A polynomial vector field: one coefficient polynomial per coordinate.
#[derive(Clone, PartialEq, Eq)]
pub struct VectorField {
    ambient: Ambient,
    components: Vec<MultiPoly>,
}

impl VectorField {
    pub fn new(ambient: Ambient, components: Vec<MultiPoly>) -> crate::Result<Self> {
        if components.len() != ambient.len() {
            return Err(Error::DimensionMismatch {
                expected: ambient.len(),
                got: components.len(),
            });
        }
        for c in &components {
            if c.ambient() != &ambient {
                return Err(Error::AmbientMismatch(
                    ambient.names().to_vec(),
                    c.ambient().names().to_vec(),
                ));
            }
        }
        Ok(VectorField { ambient, components })
    }

    /// The coordinate field `∂/∂name`.
    pub fn coordinate(ambient: &Ambient, name: &str) -> crate::Result<Self> {
        let idx = ambient.require(name)?;
        let mut components = vec![MultiPoly::zero(ambient); ambient.len()];
        components[idx] = MultiPoly::one(ambient);
        Ok(VectorField { ambient: ambient.clone(), components })
    }

    pub fn zero(ambient: &Ambient) -> Self {
        VectorField {
            ambient: ambient.clone(),
            components: vec![MultiPoly::zero(ambient); ambient.len()],
        }
    }

    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    pub fn components(&self) -> &[MultiPoly] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &MultiPoly {
        &self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(MultiPoly::is_zero)
    }

    pub fn add(&self, rhs: &Self) -> crate::Result<Self> {
        if self.ambient != rhs.ambient {
            return Err(Error::AmbientMismatch(
                self.ambient.names().to_vec(),
                rhs.ambient.names().to_vec(),
            ));
        }
        VectorField::new(
            self.ambient.clone(),
            self.components
                .iter()
                .zip(&rhs.components)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn scale_poly(&self, f: &MultiPoly) -> Self {
        VectorField {
            ambient: self.ambient.clone(),
            components: self.components.iter().map(|c| c * f).collect(),
        }
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        VectorField {
            ambient: self.ambient.clone(),
            components: self.components.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// The directional derivative `X(f) = Σ X_j ∂f/∂x_j`.
    pub fn apply(&self, f: &MultiPoly) -> crate::Result<MultiPoly> {
        let mut acc = MultiPoly::zero(&self.ambient);
        for (j, name) in self.ambient.names().iter().enumerate() {
            let df = f.differentiate(name)?;
            if !df.is_zero() && !self.components[j].is_zero() {
                acc = acc.try_add(&self.components[j].try_mul(&df)?)?;
            }
        }
        Ok(acc)
    }

    pub fn evaluate(&self, point: &[GaussianRational]) -> crate::Result<Vec<GaussianRational>> {
        self.components.iter().map(|c| c.evaluate(point)).collect()
    }

    /// Divide by the graded-lex leading coefficient of the last nonzero
    /// component, the crate's canonical scaling for line-field generators.
    pub fn normalized(&self) -> Self {
        normalize_components(&self.ambient, self.components.clone())
    }
}

fn normalize_components(ambient: &Ambient, mut comps: Vec<MultiPoly>) -> VectorField {
    if let Some(last) = comps.iter().rfind(|c| !c.is_zero()) {
        let lead = last.leading_coefficient();
        let inv = lead.recip().expect("nonzero leading coefficient");
        comps = comps.iter().map(|c| c.scale(&inv)).collect();
    }
    VectorField { ambient: ambient.clone(), components: comps }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (i, c) in self.components.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if wrote {
                write!(f, " + ")?;
            }
            write!(f, "({c:?})∂_{}", self.ambient.name(i))?;
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// The Lie bracket `[X, Y]`, componentwise `X(Y_k) − Y(X_k)`; exact.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> crate::Result<VectorField> {
    if x.ambient != y.ambient {
        return Err(Error::AmbientMismatch(
            x.ambient.names().to_vec(),
            y.ambient.names().to_vec(),
        ));
    }
    let components = x
        .components
        .iter()
        .zip(&y.components)
        .map(|(xk, yk)| x.apply(yk)?.try_sub(&y.apply(xk)?))
        .collect::<crate::Result<Vec<_>>>()?;
    VectorField::new(x.ambient.clone(), components)
}

/// A differential form of fixed degree with polynomial coefficients,
/// stored on strictly increasing index tuples with no zero coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct DiffForm {
    ambient: Ambient,
    degree: usize,
    terms: BTreeMap<Vec<u8>, MultiPoly>,
}

impl DiffForm {
    pub fn zero(ambient: &Ambient, degree: usize) -> Self {
        DiffForm { ambient: ambient.clone(), degree, terms: BTreeMap::new() }
    }

    /// A 1-form from its coefficient list `Σ coeffs[i] dx_i`.
    pub fn one_form(ambient: &Ambient, coeffs: Vec<MultiPoly>) -> crate::Result<Self> {
        if coeffs.len() != ambient.len() {
            return Err(Error::DimensionMismatch { expected: ambient.len(), got: coeffs.len() });
        }
        let mut form = DiffForm::zero(ambient, 1);
        for (i, c) in coeffs.into_iter().enumerate() {
            form.add_term(vec![i as u8], c);
        }
        Ok(form)
    }

    /// The coordinate differential `dx_name`.
    pub fn coordinate_differential(ambient: &Ambient, name: &str) -> crate::Result<Self> {
        let idx = ambient.require(name)?;
        let mut coeffs = vec![MultiPoly::zero(ambient); ambient.len()];
        coeffs[idx] = MultiPoly::one(ambient);
        DiffForm::one_form(ambient, coeffs)
    }

    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u8>, &MultiPoly)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, index: &[u8]) -> MultiPoly {
        self.terms
            .get(index)
            .cloned()
            .unwrap_or_else(|| MultiPoly::zero(&self.ambient))
    }

    /// Coefficient list of a 1-form in coordinate order.
    pub fn one_form_coeffs(&self) -> crate::Result<Vec<MultiPoly>> {
        if self.degree != 1 {
            return Err(Error::WrongDegree { expected: 1, got: self.degree });
        }
        Ok((0..self.ambient.len() as u8)
            .map(|i| self.coefficient(&[i]))
            .collect())
    }

    fn add_term(&mut self, index: Vec<u8>, c: MultiPoly) {
        debug_assert!(index.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(index.len(), self.degree);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(index) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().try_add(&c).expect("shared ambient");
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
            return Err(Error::AmbientMismatch(
                self.ambient.names().to_vec(),
                rhs.ambient.names().to_vec(),
            ));
        }
        if self.degree != rhs.degree {
            return Err(Error::WrongDegree { expected: self.degree, got: rhs.degree });
        }
        let mut out = self.clone();
        for (i, c) in &rhs.terms {
            out.add_term(i.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        let mut out = DiffForm::zero(&self.ambient, self.degree);
        for (i, a) in &self.terms {
            out.add_term(i.clone(), a.scale(c));
        }
        out
    }

    pub fn scale_poly(&self, f: &MultiPoly) -> crate::Result<Self> {
        let mut out = DiffForm::zero(&self.ambient, self.degree);
        for (i, a) in &self.terms {
            out.add_term(i.clone(), a.try_mul(f)?);
        }
        Ok(out)
    }

    /// Value of a 1-form on a vector field.
    pub fn apply_to_field(&self, x: &VectorField) -> crate::Result<MultiPoly> {
        if self.degree != 1 {
            return Err(Error::WrongDegree { expected: 1, got: self.degree });
        }
        if self.ambient != x.ambient {
            return Err(Error::AmbientMismatch(
                self.ambient.names().to_vec(),
                x.ambient.names().to_vec(),
            ));
        }
        let mut acc = MultiPoly::zero(&self.ambient);
        for (i, a) in &self.terms {
            acc = acc.try_add(&a.try_mul(x.component(i[0] as usize))?)?;
        }
        Ok(acc)
    }

    /// Canonical scaling: the last index tuple's coefficient is made monic.
    pub fn normalized(&self) -> Self {
        if let Some((_, last)) = self.terms.iter().next_back() {
            let lead = last.leading_coefficient();
            let inv = lead.recip().expect("nonzero leading coefficient");
            return self.scale(&inv);
        }
        self.clone()
    }
}

impl fmt::Debug for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut wrote = false;
        for (i, c) in &self.terms {
            if wrote {
                write!(f, " + ")?;
            }
            write!(f, "({c:?})")?;
            for (pos, idx) in i.iter().enumerate() {
                let sep = if pos == 0 { " " } else { "∧" };
                write!(f, "{sep}d{}", self.ambient.name(*idx as usize))?;
            }
            wrote = true;
        }
        Ok(())
    }
}

/// Sign of the permutation sorting `indices`, or `None` when two entries
/// coincide.
fn sort_sign(indices: &mut [u8]) -> Option<i8> {
    let mut sign = 1i8;
    for i in 1..indices.len() {
        let mut j = i;
        while j > 0 && indices[j - 1] > indices[j] {
            indices.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if indices.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// Exact exterior derivative; degree raised by one.
pub fn exterior_derivative(omega: &DiffForm) -> crate::Result<DiffForm> {
    let n = omega.ambient.len();
    if omega.degree >= n {
        return Err(Error::DegreeOverflow { degree: omega.degree + 1, ambient: n });
    }
    let mut out = DiffForm::zero(&omega.ambient, omega.degree + 1);
    for (index, coeff) in &omega.terms {
        for (j, name) in omega.ambient.names().iter().enumerate() {
            let dc = coeff.differentiate(name)?;
            if dc.is_zero() {
                continue;
            }
            let mut merged = Vec::with_capacity(index.len() + 1);
            merged.push(j as u8);
            merged.extend_from_slice(index);
            if let Some(sign) = sort_sign(&mut merged) {
                let c = if sign > 0 { dc } else { -&dc };
                out.add_term(merged, c);
            }
        }
    }
    Ok(out)
}

/// Exact wedge product.
pub fn wedge(a: &DiffForm, b: &DiffForm) -> crate::Result<DiffForm> {
    if a.ambient != b.ambient {
        return Err(Error::AmbientMismatch(
            a.ambient.names().to_vec(),
            b.ambient.names().to_vec(),
        ));
    }
    let n = a.ambient.len();
    if a.degree + b.degree > n {
        return Err(Error::DegreeOverflow { degree: a.degree + b.degree, ambient: n });
    }
    let mut out = DiffForm::zero(&a.ambient, a.degree + b.degree);
    for (ia, ca) in &a.terms {
        for (ib, cb) in &b.terms {
            let mut merged = Vec::with_capacity(ia.len() + ib.len());
            merged.extend_from_slice(ia);
            merged.extend_from_slice(ib);
            if let Some(sign) = sort_sign(&mut merged) {
                let mut c = ca.try_mul(cb)?;
                if sign < 0 {
                    c = -&c;
                }
                out.add_term(merged, c);
            }
        }
    }
    Ok(out)
}

/// Exact interior product (contraction in the first slot).
pub fn interior_product(x: &VectorField, omega: &DiffForm) -> crate::Result<DiffForm> {
    if omega.degree == 0 {
        return Err(Error::WrongDegree { expected: 1, got: 0 });
    }
    if x.ambient != omega.ambient {
        return Err(Error::AmbientMismatch(
            x.ambient.names().to_vec(),
            omega.ambient.names().to_vec(),
        ));
    }
    let mut out = DiffForm::zero(&omega.ambient, omega.degree - 1);
    for (index, coeff) in &omega.terms {
        for (m, &idx) in index.iter().enumerate() {
            let xi = x.component(idx as usize);
            if xi.is_zero() {
                continue;
            }
            let mut c = coeff.try_mul(xi)?;
            if m % 2 == 1 {
                c = -&c;
            }
            let mut rest = index.clone();
            rest.remove(m);
            out.add_term(rest, c);
        }
    }
    Ok(out)
}

// --- exact linear algebra --------------------------------------------------

/// Rank of a matrix of exact scalars by Gaussian elimination.
pub fn scalar_rank(mut m: Vec<Vec<GaussianRational>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let Some(pivot) = (row..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, pivot);
        let inv = m[row][col].recip().expect("nonzero pivot");
        for r in (row + 1)..rows {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] * &inv;
            for c in col..cols {
                let sub = &factor * &m[row][c];
                m[r][c] = &m[r][c] - &sub;
            }
        }
        row += 1;
        rank += 1;
    }
    rank
}

/// Determinant of a small matrix of polynomials by Laplace expansion.
pub(crate) fn poly_det(m: &[Vec<&MultiPoly>]) -> MultiPoly {
    let n = m.len();
    let ambient = m[0][0].ambient().clone();
    match n {
        1 => m[0][0].clone(),
        _ => {
            let mut acc = MultiPoly::zero(&ambient);
            for (j, entry) in m[0].iter().enumerate() {
                if entry.is_zero() {
                    continue;
                }
                let minor: Vec<Vec<&MultiPoly>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != j)
                            .map(|(_, e)| *e)
                            .collect()
                    })
                    .collect();
                let mut term = entry.try_mul(&poly_det(&minor)).expect("shared ambient");
                if j % 2 == 1 {
                    term = -&term;
                }
                acc = acc.try_add(&term).expect("shared ambient");
            }
            acc
        }
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // advance the rightmost index that can still move
        let mut i = k;
        while i > 0 {
            i -= 1;
            if idx[i] < i + n - k {
                idx[i] += 1;
                for j in (i + 1)..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return out;
            }
        }
    }
}

fn component_matrix(fields: &[VectorField]) -> Vec<Vec<&MultiPoly>> {
    fields.iter().map(|f| f.components.iter().collect()).collect()
}

/// Whether some `size`-minor of the matrix is a nonzero polynomial.
fn has_nonzero_minor(matrix: &[Vec<&MultiPoly>], size: usize) -> bool {
    let rows = matrix.len();
    let cols = if rows == 0 { 0 } else { matrix[0].len() };
    if size == 0 {
        return true;
    }
    for rsel in combinations(rows, size) {
        for csel in combinations(cols, size) {
            let sub: Vec<Vec<&MultiPoly>> = rsel
                .iter()
                .map(|&r| csel.iter().map(|&c| matrix[r][c]).collect())
                .collect();
            if !poly_det(&sub).is_zero() {
                return true;
            }
        }
    }
    false
}

/// Generic rank of a family of vector fields over the rational-function
/// field.
///
/// Exact ranks at pseudorandom small-height rational points are certified
/// lower bounds (a nonzero numeric minor is a nonzero symbolic minor); if
/// they reach the dimension cap we are done. Otherwise the rank is settled
/// symbolically: the generic rank is the largest size admitting a minor
/// that is not the zero polynomial.
pub fn generic_rank(fields: &[VectorField]) -> usize {
    if fields.is_empty() {
        return 0;
    }
    let dim = fields[0].ambient.len();
    let rmax = fields.len().min(dim);
    let mut rng = sample::rng_for(0x9e37_79b9, 0);
    let mut best = 0;
    for _ in 0..5 {
        let point = sample::point(&mut rng, dim, 7);
        let rows: Vec<Vec<GaussianRational>> = fields
            .iter()
            .map(|f| f.evaluate(&point).expect("dimension checked"))
            .collect();
        best = best.max(scalar_rank(rows));
        if best == rmax {
            return rmax;
        }
    }
    let matrix = component_matrix(fields);
    for size in ((best + 1)..=rmax).rev() {
        if has_nonzero_minor(&matrix, size) {
            return size;
        }
    }
    best
}

/// Exact span membership over the rational-function field: adjoining `x`
/// must not raise the generic rank.
pub fn in_span(x: &VectorField, frame: &[VectorField]) -> bool {
    if x.is_zero() {
        return true;
    }
    let base = generic_rank(frame);
    let mut extended: Vec<VectorField> = frame.to_vec();
    extended.push(x.clone());
    generic_rank(&extended) == base
}

/// Whether two fields generate the same line: all 2x2 cross minors vanish.
/// (The zero field is proportional to everything.)
pub fn fields_proportional(x: &VectorField, y: &VectorField) -> bool {
    if x.ambient != y.ambient {
        return false;
    }
    let n = x.ambient.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let lhs = x.component(i).try_mul(y.component(j)).expect("shared ambient");
            let rhs = x.component(j).try_mul(y.component(i)).expect("shared ambient");
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

/// Whether two 1-forms are proportional over the function field.
pub fn forms_proportional(a: &DiffForm, b: &DiffForm) -> crate::Result<bool> {
    let ca = a.one_form_coeffs()?;
    let cb = b.one_form_coeffs()?;
    for i in 0..ca.len() {
        for j in (i + 1)..ca.len() {
            if ca[i].try_mul(&cb[j])? != ca[j].try_mul(&cb[i])? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

// --- frames and flags --------------------------------------------------------

/// A tuple of vector fields with a verified generic rank.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DistributionFrame {
    fields: Vec<VectorField>,
    claimed_rank: usize,
}

impl DistributionFrame {
    pub fn new(fields: Vec<VectorField>, claimed_rank: usize) -> crate::Result<Self> {
        if claimed_rank > fields.len() {
            return Err(Error::WrongRank { expected: claimed_rank, got: fields.len() });
        }
        let got = generic_rank(&fields);
        if got != claimed_rank {
            return Err(Error::WrongRank { expected: claimed_rank, got });
        }
        Ok(DistributionFrame { fields, claimed_rank })
    }

    pub fn fields(&self) -> &[VectorField] {
        &self.fields
    }

    pub fn rank(&self) -> usize {
        self.claimed_rank
    }

    pub fn ambient(&self) -> &Ambient {
        self.fields[0].ambient()
    }
}

/// The flag `W ⊂ D ⊂ E` of an Engel structure, with defining forms.
#[derive(Clone, Debug)]
pub struct EngelFlag {
    /// Generator of the characteristic line field.
    pub w: VectorField,
    /// The rank-2 Engel distribution.
    pub d: DistributionFrame,
    /// The associated even contact structure `E = D + [D, D]`.
    pub e: DistributionFrame,
    /// Two independent 1-forms annihilating `D`.
    pub d_forms: [DiffForm; 2],
    /// A 1-form annihilating `E`.
    pub e_form: DiffForm,
}

/// Why an Engel verification failed, by stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EngelFailure {
    /// `D + [D, D]` does not have generic rank 3.
    SquareRank(usize),
    /// `[E, E]` does not have generic rank 4.
    CubeRank(usize),
    /// The characteristic line field could not be derived.
    Characteristic(String),
    /// The characteristic field does not lie in `D`.
    CharacteristicNotInD,
}

impl fmt::Display for EngelFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngelFailure::SquareRank(r) => {
                write!(f, "D + [D,D] has generic rank {r}, expected 3")
            }
            EngelFailure::CubeRank(r) => write!(f, "[E,E] has generic rank {r}, expected 4"),
            EngelFailure::Characteristic(msg) => write!(f, "characteristic field: {msg}"),
            EngelFailure::CharacteristicNotInD => {
                write!(f, "characteristic field does not lie in D")
            }
        }
    }
}

/// Outcome of [`check_engel`]: a verified flag or a staged failure report.
pub type EngelOutcome = std::result::Result<EngelFlag, EngelFailure>;

/// The kernel covector of a rank-3 frame in dimension 4, by signed maximal
/// minors; the unique 1-form annihilating the frame, up to scale.
fn annihilator_of_rank3(frame: &[VectorField]) -> crate::Result<DiffForm> {
    let ambient = frame[0].ambient().clone();
    if ambient.len() != 4 || frame.len() != 3 {
        return Err(Error::DimensionMismatch { expected: 4, got: frame.len() });
    }
    let matrix = component_matrix(frame);
    let mut coeffs = Vec::with_capacity(4);
    for j in 0..4 {
        let cols: Vec<usize> = (0..4).filter(|&c| c != j).collect();
        let sub: Vec<Vec<&MultiPoly>> = matrix
            .iter()
            .map(|row| cols.iter().map(|&c| row[c]).collect())
            .collect();
        let mut det = poly_det(&sub);
        if j % 2 == 1 {
            det = -&det;
        }
        coeffs.push(det);
    }
    if coeffs.iter().all(MultiPoly::is_zero) {
        return Err(Error::WrongRank { expected: 3, got: generic_rank(frame) });
    }
    Ok(DiffForm::one_form(&ambient, coeffs)?.normalized())
}

/// Two independent 1-forms annihilating a rank-2 frame in dimension 4.
///
/// A pivot column pair with nonzero minor is fixed; each remaining column
/// yields a kernel covector by Cramer minors.
fn annihilators_of_rank2(frame: &[VectorField]) -> crate::Result<[DiffForm; 2]> {
    let ambient = frame[0].ambient().clone();
    if ambient.len() != 4 || frame.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: frame.len() });
    }
    let m = component_matrix(frame);
    let minor = |a: usize, b: usize| -> MultiPoly {
        let sub = vec![vec![m[0][a], m[0][b]], vec![m[1][a], m[1][b]]];
        poly_det(&sub)
    };
    let pivot = combinations(4, 2)
        .into_iter()
        .find(|sel| !minor(sel[0], sel[1]).is_zero())
        .ok_or(Error::WrongRank { expected: 2, got: generic_rank(frame) })?;
    let (pi, pj) = (pivot[0], pivot[1]);
    let mut forms = Vec::with_capacity(2);
    for k in (0..4).filter(|k| *k != pi && *k != pj) {
        let mut coeffs = vec![MultiPoly::zero(&ambient); 4];
        coeffs[pi] = minor(pj, k);
        coeffs[pj] = -&minor(pi, k);
        coeffs[k] = minor(pi, pj);
        forms.push(DiffForm::one_form(&ambient, coeffs)?.normalized());
    }
    let [a, b] = forms.try_into().expect("two free columns");
    Ok([a, b])
}

/// The characteristic line field of an even contact structure.
///
/// With `α` a defining 1-form of `E`, the generator solves `α(W) = 0`
/// together with `ι_W dα ∧ α = 0`; both conditions combine into
/// `ι_W (α ∧ dα) = 0`, whose solution line is read off from the components
/// of the nowhere-zero 3-form `α ∧ dα`. The bracket condition `[W, E] ⊂ E`
/// is then verified independently, symbolically.
pub fn characteristic_line_field(e: &DistributionFrame) -> crate::Result<VectorField> {
    if e.rank() != 3 || e.ambient().len() != 4 {
        return Err(Error::WrongRank { expected: 3, got: e.rank() });
    }
    let alpha = annihilator_of_rank3(e.fields())?;
    let beta = wedge(&alpha, &exterior_derivative(&alpha)?)?;
    if beta.is_zero() {
        return Err(Error::CharacteristicField(
            "α ∧ dα vanishes identically: E is not even contact".into(),
        ));
    }
    // ι_W (dx0∧dx1∧dx2∧dx3) = β  ⟺  W = (β_123, −β_023, β_013, −β_012),
    // and every such W satisfies ι_W β = 0.
    let comps = vec![
        beta.coefficient(&[1, 2, 3]),
        -&beta.coefficient(&[0, 2, 3]),
        beta.coefficient(&[0, 1, 3]),
        -&beta.coefficient(&[0, 1, 2]),
    ];
    let w = normalize_components(e.ambient(), comps);
    if w.is_zero() {
        return Err(Error::CharacteristicField("derived field is zero".into()));
    }
    for field in e.fields() {
        let bracket = lie_bracket(&w, field)?;
        if !in_span(&bracket, e.fields()) {
            return Err(Error::CharacteristicField(format!(
                "[W, {field:?}] leaves the span of E"
            )));
        }
    }
    Ok(w)
}

/// Whether a rank-3 frame on `C^4` is an even contact structure:
/// the frame plus its pairwise brackets must have generic rank 4.
pub fn check_even_contact(e: &DistributionFrame) -> crate::Result<bool> {
    if e.rank() != 3 || e.ambient().len() != 4 {
        return Err(Error::WrongRank { expected: 3, got: e.rank() });
    }
    let mut fields = e.fields().to_vec();
    for i in 0..3 {
        for j in (i + 1)..3 {
            fields.push(lie_bracket(&e.fields()[i], &e.fields()[j])?);
        }
    }
    Ok(generic_rank(&fields) == 4)
}

/// Verify the Engel condition for a rank-2 frame on `C^4` and derive the
/// full flag `W ⊂ D ⊂ E` with defining forms.
///
/// Returns a staged failure report (not an error) when a generic-rank
/// condition degenerates.
pub fn check_engel(d: &DistributionFrame) -> crate::Result<EngelOutcome> {
    if d.rank() != 2 || d.ambient().len() != 4 {
        return Err(Error::WrongRank { expected: 2, got: d.rank() });
    }
    let bracket = lie_bracket(&d.fields()[0], &d.fields()[1])?;
    let mut e_fields = d.fields().to_vec();
    e_fields.push(bracket);
    let e_rank = generic_rank(&e_fields);
    if e_rank != 3 {
        return Ok(Err(EngelFailure::SquareRank(e_rank)));
    }
    let e = DistributionFrame::new(e_fields, 3)?;
    if !check_even_contact(&e)? {
        let mut all = e.fields().to_vec();
        for i in 0..3 {
            for j in (i + 1)..3 {
                all.push(lie_bracket(&e.fields()[i], &e.fields()[j])?);
            }
        }
        return Ok(Err(EngelFailure::CubeRank(generic_rank(&all))));
    }
    let w = match characteristic_line_field(&e) {
        Ok(w) => w,
        Err(Error::CharacteristicField(msg)) => {
            return Ok(Err(EngelFailure::Characteristic(msg)))
        }
        Err(other) => return Err(other),
    };
    if !in_span(&w, d.fields()) {
        return Ok(Err(EngelFailure::CharacteristicNotInD));
    }
    let d_forms = annihilators_of_rank2(d.fields())?;
    let e_form = annihilator_of_rank3(e.fields())?;
    Ok(Ok(EngelFlag { w, d: d.clone(), e, d_forms, e_form }))
}

// --- serde ---------------------------------------------------------------
//
// Fields: {"type":"field","ambient":[...],"components":{coord: poly}}
// Forms:  {"type":"form","degree":k,"ambient":[...],
//          "terms":[{"index":[i,j],"coef": poly}]}

#[derive(Serialize, Deserialize)]
struct FieldJson {
    #[serde(rename = "type")]
    tag: String,
    ambient: Vec<String>,
    components: BTreeMap<String, MultiPoly>,
}

impl Serialize for VectorField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FieldJson {
            tag: "field".into(),
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

impl<'de> Deserialize<'de> for VectorField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = FieldJson::deserialize(d)?;
        if raw.tag != "field" {
            return Err(serde::de::Error::custom(format!("expected type \"field\", got {}", raw.tag)));
        }
        let ambient = Ambient::new(raw.ambient);
        let mut components = Vec::with_capacity(ambient.len());
        for name in ambient.names() {
            components.push(
                raw.components
                    .get(name)
                    .cloned()
                    .unwrap_or_else(|| MultiPoly::zero(&ambient)),
            );
        }
        VectorField::new(ambient, components).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct FormTermJson {
    index: Vec<u8>,
    coef: MultiPoly,
}

#[derive(Serialize, Deserialize)]
struct FormJson {
    #[serde(rename = "type")]
    tag: String,
    degree: usize,
    ambient: Vec<String>,
    terms: Vec<FormTermJson>,
}

impl Serialize for DiffForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FormJson {
            tag: "form".into(),
            degree: self.degree,
            ambient: self.ambient.names().to_vec(),
            terms: self
                .terms
                .iter()
                .map(|(i, c)| FormTermJson { index: i.clone(), coef: c.clone() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiffForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = FormJson::deserialize(d)?;
        if raw.tag != "form" {
            return Err(serde::de::Error::custom(format!("expected type \"form\", got {}", raw.tag)));
        }
        let ambient = Ambient::new(raw.ambient);
        let mut form = DiffForm::zero(&ambient, raw.degree);
        for term in raw.terms {
            if term.index.len() != raw.degree
                || term.index.windows(2).any(|w| w[0] >= w[1])
                || term.index.iter().any(|&i| usize::from(i) >= ambient.len())
            {
                return Err(serde::de::Error::custom("malformed form index"));
            }
            let coef = term
                .coef
                .into_ambient(&ambient)
                .map_err(serde::de::Error::custom)?;
            form.add_term(term.index, coef);
        }
        Ok(form)
    }
}

impl Serialize for DistributionFrame {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("DistributionFrame", 2)?;
        st.serialize_field("fields", &self.fields)?;
        st.serialize_field("rank", &self.claimed_rank)?;
        st.end()
    }
}

impl Serialize for EngelFlag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("EngelFlag", 5)?;
        st.serialize_field("w", &self.w)?;
        st.serialize_field("d", &self.d)?;
        st.serialize_field("e", &self.e)?;
        st.serialize_field("d_forms", &self.d_forms)?;
        st.serialize_field("e_form", &self.e_form)?;
        st.end()
    }
}

// --- the standard model --------------------------------------------------------

/// The frame `{∂_w, ∂_x + z ∂_y + w ∂_z}` of the standard Engel structure.
pub fn standard_d_frame() -> DistributionFrame {
    let a = Ambient::wxyz();
    let dw = VectorField::coordinate(&a, "w").unwrap();
    let z = MultiPoly::var(&a, "z").unwrap();
    let w = MultiPoly::var(&a, "w").unwrap();
    let x_field = VectorField::new(
        a.clone(),
        vec![MultiPoly::zero(&a), MultiPoly::one(&a), z, w],
    )
    .unwrap();
    DistributionFrame::new(vec![dw, x_field], 2).unwrap()
}

/// The flag of the standard Engel structure, derived and verified.
pub fn standard_flag() -> EngelFlag {
    check_engel(&standard_d_frame())
        .expect("well-formed input")
        .expect("the standard frame is Engel")
}

/// The 1-form `dy − z dx` on `(w,x,y,z)`.
pub fn standard_e_form() -> DiffForm {
    let a = Ambient::wxyz();
    let z = MultiPoly::var(&a, "z").unwrap();
    let mut coeffs = vec![MultiPoly::zero(&a); 4];
    coeffs[1] = -&z;
    coeffs[2] = MultiPoly::one(&a);
    DiffForm::one_form(&a, coeffs).unwrap()
}

/// The 1-form `dz − w dx` on `(w,x,y,z)`.
pub fn standard_second_form() -> DiffForm {
    let a = Ambient::wxyz();
    let w = MultiPoly::var(&a, "w").unwrap();
    let mut coeffs = vec![MultiPoly::zero(&a); 4];
    coeffs[1] = -&w;
    coeffs[3] = MultiPoly::one(&a);
    DiffForm::one_form(&a, coeffs).unwrap()
}

/// The pair `{dy − z dx, dz − w dx}` annihilating the standard `D`.
pub fn standard_d_forms() -> [DiffForm; 2] {
    [standard_e_form(), standard_second_form()]
}

/// The differentials `{dx, dy, dz}` annihilating the standard `W`.
pub fn standard_w_forms() -> [DiffForm; 3] {
    let a = Ambient::wxyz();
    ["x", "y", "z"].map(|n| DiffForm::coordinate_differential(&a, n).unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ambient() -> Ambient {
        Ambient::wxyz()
    }

    fn dw() -> VectorField {
        VectorField::coordinate(&ambient(), "w").unwrap()
    }

    fn x_st() -> VectorField {
        standard_d_frame().fields()[1].clone()
    }

    #[test]
    fn bracket_examples() {
        let a = ambient();
        let dz = VectorField::coordinate(&a, "z").unwrap();
        let dy = VectorField::coordinate(&a, "y").unwrap();

        // [∂_w, X_st] = ∂_z
        assert_eq!(lie_bracket(&dw(), &x_st()).unwrap(), dz);
        // constant fields commute
        assert!(lie_bracket(&dw(), &dz).unwrap().is_zero());
        // [X_st, ∂_z] = −∂_y
        let b = lie_bracket(&x_st(), &dz).unwrap();
        assert_eq!(b, dy.scale(&GaussianRational::from_int(-1)));
    }

    #[test]
    fn exterior_derivative_examples() {
        let a = ambient();
        let d_alpha = exterior_derivative(&standard_e_form()).unwrap();
        // d(dy − z dx) = dx ∧ dz
        let mut expect = DiffForm::zero(&a, 2);
        expect.add_term(vec![1, 3], MultiPoly::one(&a));
        assert_eq!(d_alpha, expect);

        let dx = DiffForm::coordinate_differential(&a, "x").unwrap();
        assert!(exterior_derivative(&dx).unwrap().is_zero());

        let w = MultiPoly::var(&a, "w").unwrap();
        let w_dx = dx.scale_poly(&w).unwrap();
        let mut dw_dx = DiffForm::zero(&a, 2);
        dw_dx.add_term(vec![0, 1], MultiPoly::one(&a));
        assert_eq!(exterior_derivative(&w_dx).unwrap(), dw_dx);
    }

    #[test]
    fn interior_product_examples() {
        let a = ambient();
        let dx = DiffForm::coordinate_differential(&a, "x").unwrap();
        let ix = interior_product(&VectorField::coordinate(&a, "x").unwrap(), &dx).unwrap();
        assert_eq!(ix.coefficient(&[]), MultiPoly::one(&a));

        assert!(interior_product(&dw(), &standard_e_form()).unwrap().is_zero());

        // ι_{X_st}(dx∧dz) = dz − w dx
        let mut dx_dz = DiffForm::zero(&a, 2);
        dx_dz.add_term(vec![1, 3], MultiPoly::one(&a));
        assert_eq!(interior_product(&x_st(), &dx_dz).unwrap(), standard_second_form());

        assert!(matches!(
            interior_product(&dw(), &ix),
            Err(Error::WrongDegree { .. })
        ));
    }

    #[test]
    fn wedge_examples() {
        let a = ambient();
        let dx = DiffForm::coordinate_differential(&a, "x").unwrap();
        let dy = DiffForm::coordinate_differential(&a, "y").unwrap();
        let dxdy = wedge(&dx, &dy).unwrap();
        assert_eq!(dxdy.coefficient(&[1, 2]), MultiPoly::one(&a));
        assert!(wedge(&dx, &dx).unwrap().is_zero());

        // (dy − z dx) ∧ (dz − w dx) = dy∧dz + w dx∧dy − z dx∧dz
        let p = wedge(&standard_e_form(), &standard_second_form()).unwrap();
        let w = MultiPoly::var(&a, "w").unwrap();
        let z = MultiPoly::var(&a, "z").unwrap();
        assert_eq!(p.coefficient(&[2, 3]), MultiPoly::one(&a));
        assert_eq!(p.coefficient(&[1, 2]), w);
        assert_eq!(p.coefficient(&[1, 3]), -&z);
        assert_eq!(p.terms().count(), 3);
    }

    #[test]
    fn generic_rank_examples() {
        let frame = standard_d_frame();
        assert_eq!(generic_rank(frame.fields()), 2);

        let doubled = vec![dw(), dw().scale(&GaussianRational::from_int(2))];
        assert_eq!(generic_rank(&doubled), 1);

        let triple = vec![dw(), x_st(), lie_bracket(&dw(), &x_st()).unwrap()];
        assert_eq!(generic_rank(&triple), 3);
    }

    #[test]
    fn even_contact_examples() {
        let flag = standard_flag();
        assert!(check_even_contact(&flag.e).unwrap());

        let a = ambient();
        let integrable = DistributionFrame::new(
            vec![
                dw(),
                VectorField::coordinate(&a, "x").unwrap(),
                VectorField::coordinate(&a, "y").unwrap(),
            ],
            3,
        )
        .unwrap();
        assert!(!check_even_contact(&integrable).unwrap());
    }

    #[test]
    fn check_engel_standard_model() {
        let flag = standard_flag();
        // E is annihilated exactly by dy − z dx
        assert_eq!(flag.e_form, standard_e_form());
        // W = span ∂_w, annihilated by dx, dy, dz
        assert_eq!(flag.w, dw());
        for form in standard_w_forms() {
            assert!(form.apply_to_field(&flag.w).unwrap().is_zero());
        }
        for form in &flag.d_forms {
            for field in flag.d.fields() {
                assert!(form.apply_to_field(field).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn check_engel_rejects_integrable_frame() {
        let a = ambient();
        let d = DistributionFrame::new(
            vec![dw(), VectorField::coordinate(&a, "x").unwrap()],
            2,
        )
        .unwrap();
        let outcome = check_engel(&d).unwrap();
        assert_eq!(outcome.unwrap_err(), EngelFailure::SquareRank(2));
    }

    #[test]
    fn characteristic_field_of_standard_e() {
        let flag = standard_flag();
        let w = characteristic_line_field(&flag.e).unwrap();
        assert!(fields_proportional(&w, &dw()));
    }

    #[test]
    fn characteristic_field_invariant_under_recombination() {
        let flag = standard_flag();
        let fields = flag.e.fields();
        let a = ambient();
        let f = MultiPoly::var(&a, "x").unwrap();
        // invertible polynomial recombination of the frame
        let g0 = fields[0].add(&fields[1].scale_poly(&f)).unwrap();
        let g1 = fields[1].clone();
        let g2 = fields[2].add(&fields[0]).unwrap();
        let e2 = DistributionFrame::new(vec![g0, g1, g2], 3).unwrap();
        let w2 = characteristic_line_field(&e2).unwrap();
        assert!(fields_proportional(&w2, &dw()));
    }

    mod properties {
        use super::*;
        use crate::sample;

        fn random_field(rng: &mut sample::Prng) -> VectorField {
            let a = Ambient::wxyz();
            let comps = (0..4).map(|_| sample::multipoly(rng, &a, 2, 3, 4)).collect();
            VectorField::new(a, comps).unwrap()
        }

        #[test]
        fn bracket_antisymmetry_and_jacobi() {
            let mut rng = sample::rng_for(11, 0);
            for _ in 0..25 {
                let x = random_field(&mut rng);
                let y = random_field(&mut rng);
                let z = random_field(&mut rng);
                let xy = lie_bracket(&x, &y).unwrap();
                let yx = lie_bracket(&y, &x).unwrap();
                assert_eq!(xy, yx.scale(&GaussianRational::from_int(-1)));

                let j1 = lie_bracket(&x, &lie_bracket(&y, &z).unwrap()).unwrap();
                let j2 = lie_bracket(&y, &lie_bracket(&z, &x).unwrap()).unwrap();
                let j3 = lie_bracket(&z, &xy).unwrap();
                assert!(j1.add(&j2).unwrap().add(&j3).unwrap().is_zero());
            }
        }

        #[test]
        fn leibniz_rule() {
            let mut rng = sample::rng_for(12, 0);
            let a = Ambient::wxyz();
            for _ in 0..25 {
                let x = random_field(&mut rng);
                let y = random_field(&mut rng);
                let f = sample::multipoly(&mut rng, &a, 2, 3, 4);
                let lhs = lie_bracket(&x, &y.scale_poly(&f)).unwrap();
                let rhs = y
                    .scale_poly(&x.apply(&f).unwrap())
                    .add(&lie_bracket(&x, &y).unwrap().scale_poly(&f))
                    .unwrap();
                assert_eq!(lhs, rhs);
            }
        }

        #[test]
        fn d_squared_is_zero() {
            let mut rng = sample::rng_for(13, 0);
            let a = Ambient::wxyz();
            for _ in 0..25 {
                let coeffs = (0..4).map(|_| sample::multipoly(&mut rng, &a, 2, 3, 4)).collect();
                let omega = DiffForm::one_form(&a, coeffs).unwrap();
                let dd = exterior_derivative(&exterior_derivative(&omega).unwrap()).unwrap();
                assert!(dd.is_zero());
            }
        }
    }
}
