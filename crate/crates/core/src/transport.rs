//! Polynomial shear automorphisms, pullback of vector fields and Engel
//! flags, and Cartan prolongation of contact frames into the two affine
//! fiber charts.
//!
//! Shears add a polynomial in the other coordinates to one coordinate;
//! their inverses subtract it, so compositions have polynomial inverses
//! and unipotent jacobians. Pullback is computed entirely with polynomial
//! data: `(Φ*X)(p) = (DΦ⁻¹)(Φ(p)) · X(Φ(p))`.

use serde::{Deserialize, Serialize};

use crate::distcalc::{
    check_engel, fields_proportional, poly_det, DiffForm, DistributionFrame, EngelFlag,
    VectorField,
};
use crate::exactnum::GaussianRational;
use crate::poly::{Ambient, Expt, MultiPoly, PolyMap};
use crate::sample;
use crate::Error;

/// A polynomial automorphism with verified polynomial inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyAutomorphism {
    forward: PolyMap,
    inverse: PolyMap,
    jacobian: Vec<Vec<MultiPoly>>,
}

impl PolyAutomorphism {
    /// Wrap a forward/inverse pair; both compositions are verified to be
    /// the identity symbolically, and the jacobian determinant must be a
    /// nonzero constant.
    pub fn new(forward: PolyMap, inverse: PolyMap) -> crate::Result<Self> {
        if forward.source() != forward.target() || forward.source() != inverse.source() {
            return Err(Error::AmbientMismatch(
                forward.source().names().to_vec(),
                inverse.source().names().to_vec(),
            ));
        }
        let id = PolyMap::identity(forward.source());
        if forward.compose(&inverse)? != id || inverse.compose(&forward)? != id {
            return Err(Error::Verification(
                "forward and inverse do not compose to the identity".into(),
            ));
        }
        let jacobian = forward.jacobian();
        let rows: Vec<Vec<&MultiPoly>> =
            jacobian.iter().map(|row| row.iter().collect()).collect();
        let det = poly_det(&rows);
        if !det.is_constant() || det.is_zero() {
            return Err(Error::Verification(format!(
                "jacobian determinant must be a nonzero constant, got {det:?}"
            )));
        }
        Ok(PolyAutomorphism { forward, inverse, jacobian })
    }

    pub fn identity(ambient: &Ambient) -> Self {
        let id = PolyMap::identity(ambient);
        PolyAutomorphism::new(id.clone(), id).expect("identity is an automorphism")
    }

    pub fn ambient(&self) -> &Ambient {
        self.forward.source()
    }

    pub fn forward(&self) -> &PolyMap {
        &self.forward
    }

    pub fn inverse_map(&self) -> &PolyMap {
        &self.inverse
    }

    pub fn jacobian(&self) -> &[Vec<MultiPoly>] {
        &self.jacobian
    }

    /// The inverse automorphism.
    pub fn inverted(&self) -> Self {
        PolyAutomorphism::new(self.inverse.clone(), self.forward.clone())
            .expect("inverse pair already verified")
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> crate::Result<Self> {
        PolyAutomorphism::new(
            self.forward.compose(&other.forward)?,
            other.inverse.compose(&self.inverse)?,
        )
    }

    pub fn apply(&self, p: &[GaussianRational]) -> crate::Result<Vec<GaussianRational>> {
        self.forward.apply(p)
    }
}

/// The shear `c ↦ c + m` for a polynomial `m` not involving `c`;
/// the inverse subtracts `m` and the jacobian is unipotent.
pub fn make_shear(ambient: &Ambient, coord: &str, m: &MultiPoly) -> crate::Result<PolyAutomorphism> {
    let idx = ambient.require(coord)?;
    let m = m.into_ambient(ambient)?;
    if !m.differentiate(coord)?.is_zero() {
        return Err(Error::ShearTargetInMonomial(coord.to_string()));
    }
    let mut fw = Vec::with_capacity(ambient.len());
    let mut bw = Vec::with_capacity(ambient.len());
    for (i, name) in ambient.names().iter().enumerate() {
        let var = MultiPoly::var(ambient, name)?;
        if i == idx {
            fw.push(var.try_add(&m)?);
            bw.push(var.try_sub(&m)?);
        } else {
            fw.push(var.clone());
            bw.push(var);
        }
    }
    PolyAutomorphism::new(
        PolyMap::new(ambient.clone(), ambient.clone(), fw)?,
        PolyMap::new(ambient.clone(), ambient.clone(), bw)?,
    )
}

/// The pullback `Φ*X`, computed as `(DΦ⁻¹ ∘ Φ) · (X ∘ Φ)`; exact and
/// polynomial because the inverse map is polynomial.
pub fn pullback_field(phi: &PolyAutomorphism, x: &VectorField) -> crate::Result<VectorField> {
    let ambient = phi.ambient();
    if x.ambient() != ambient {
        return Err(Error::AmbientMismatch(
            ambient.names().to_vec(),
            x.ambient().names().to_vec(),
        ));
    }
    let fw = phi.forward.components();
    let jac_inv = phi.inverse.jacobian();
    // substitute Φ into the inverse jacobian and into X
    let x_at_phi: Vec<MultiPoly> = x
        .components()
        .iter()
        .map(|c| c.substitute(fw))
        .collect::<crate::Result<_>>()?;
    let mut out = Vec::with_capacity(ambient.len());
    for row in &jac_inv {
        let mut acc = MultiPoly::zero(ambient);
        for (entry, xj) in row.iter().zip(&x_at_phi) {
            if entry.is_zero() || xj.is_zero() {
                continue;
            }
            acc = acc.try_add(&entry.substitute(fw)?.try_mul(xj)?)?;
        }
        out.push(acc);
    }
    VectorField::new(ambient.clone(), out)
}

/// Pull back a 1-form: `(Φ*ω)_j = Σ_i (ω_i ∘ Φ) ∂Φ_i/∂x_j`.
pub fn pullback_one_form(phi: &PolyAutomorphism, omega: &DiffForm) -> crate::Result<DiffForm> {
    let ambient = phi.ambient();
    let coeffs = omega.one_form_coeffs()?;
    let fw = phi.forward.components();
    let jac = phi.jacobian();
    let mut out = vec![MultiPoly::zero(ambient); ambient.len()];
    for (i, ci) in coeffs.iter().enumerate() {
        if ci.is_zero() {
            continue;
        }
        let pulled = ci.substitute(fw)?;
        for (j, slot) in out.iter_mut().enumerate() {
            if jac[i][j].is_zero() {
                continue;
            }
            *slot = slot.try_add(&pulled.try_mul(&jac[i][j])?)?;
        }
    }
    DiffForm::one_form(ambient, out)
}

/// Pull back an Engel flag: the transported frame is re-verified from
/// scratch, and the transported characteristic field must agree (up to
/// scale) with the characteristic field derived on the pulled-back side.
/// Any mismatch is an implementation bug and surfaces as a hard error.
pub fn pullback_flag(phi: &PolyAutomorphism, flag: &EngelFlag) -> crate::Result<EngelFlag> {
    let d_fields: Vec<VectorField> = flag
        .d
        .fields()
        .iter()
        .map(|f| pullback_field(phi, f))
        .collect::<crate::Result<_>>()?;
    let d = DistributionFrame::new(d_fields, 2)?;
    let outcome = check_engel(&d)?;
    let pulled_flag = outcome.map_err(|failure| {
        Error::Verification(format!("pulled-back frame is not Engel: {failure}"))
    })?;
    let w_transported = pullback_field(phi, &flag.w)?;
    if !fields_proportional(&pulled_flag.w, &w_transported) {
        return Err(Error::Verification(
            "transported characteristic field differs from the derived one".into(),
        ));
    }
    Ok(pulled_flag)
}

// --- Cartan prolongation ------------------------------------------------

/// A holomorphic contact structure on `C³` given by a defining 1-form and
/// a rank-2 frame of its kernel.
#[derive(Clone, Debug)]
pub struct ContactStructure {
    alpha: DiffForm,
    frame: [VectorField; 2],
}

impl ContactStructure {
    /// Validates the contact condition `α ∧ dα ≠ 0` and that the frame
    /// spans `ker α`.
    pub fn new(alpha: DiffForm, frame: [VectorField; 2]) -> crate::Result<Self> {
        let ambient = alpha.ambient().clone();
        if ambient.len() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, got: ambient.len() });
        }
        let d_alpha = crate::distcalc::exterior_derivative(&alpha)?;
        let contact_form = crate::distcalc::wedge(&alpha, &d_alpha)?;
        if contact_form.is_zero() {
            return Err(Error::NonContact);
        }
        for field in &frame {
            if !alpha.apply_to_field(field)?.is_zero() {
                return Err(Error::Precondition(
                    "frame field does not lie in ker α".into(),
                ));
            }
        }
        if crate::distcalc::generic_rank(&frame) != 2 {
            return Err(Error::WrongRank {
                expected: 2,
                got: crate::distcalc::generic_rank(&frame),
            });
        }
        Ok(ContactStructure { alpha, frame })
    }

    pub fn alpha(&self) -> &DiffForm {
        &self.alpha
    }

    pub fn frame(&self) -> &[VectorField; 2] {
        &self.frame
    }

    pub fn ambient(&self) -> &Ambient {
        self.alpha.ambient()
    }
}

/// The standard contact structure `α = dy − z dx` on `(x, y, z)` with
/// kernel frame `{∂_z, ∂_x + z ∂_y}`.
pub fn standard_contact() -> ContactStructure {
    let a = Ambient::xyz();
    let z = MultiPoly::var(&a, "z").unwrap();
    let mut coeffs = vec![MultiPoly::zero(&a); 3];
    coeffs[0] = -&z;
    coeffs[1] = MultiPoly::one(&a);
    let alpha = DiffForm::one_form(&a, coeffs).unwrap();
    let c1 = VectorField::coordinate(&a, "z").unwrap();
    let c2 = VectorField::new(
        a.clone(),
        vec![MultiPoly::one(&a), z, MultiPoly::zero(&a)],
    )
    .unwrap();
    ContactStructure::new(alpha, [c1, c2]).expect("standard contact data")
}

/// The two affine charts of the fiberwise projectivisation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProlongationChart {
    /// Fiber coordinate `t`; frame `{∂_t, C₁ + t C₂}`.
    Zero,
    /// Fiber coordinate `s`; frame `{∂_s, s C₁ + C₂}`.
    Infinity,
}

impl ProlongationChart {
    pub fn fiber_coordinate(self) -> &'static str {
        match self {
            ProlongationChart::Zero => "t",
            ProlongationChart::Infinity => "s",
        }
    }

    pub fn ambient(self) -> Ambient {
        match self {
            ProlongationChart::Zero => Ambient::xyzt(),
            ProlongationChart::Infinity => Ambient::xyzs(),
        }
    }
}

/// The prolonged rank-2 frame of a contact structure in one affine chart,
/// verified Engel with the fiber direction as characteristic field.
///
/// Returns the chart frame together with its full derived flag.
pub fn cartan_prolong(
    contact: &ContactStructure,
    chart: ProlongationChart,
) -> crate::Result<(DistributionFrame, EngelFlag)> {
    let ambient = chart.ambient();
    let fiber = chart.fiber_coordinate();
    let fiber_field = VectorField::coordinate(&ambient, fiber)?;
    let fiber_var = MultiPoly::var(&ambient, fiber)?;
    let promote = |f: &VectorField| -> crate::Result<VectorField> {
        let mut comps: Vec<MultiPoly> = f
            .components()
            .iter()
            .map(|c| c.into_ambient(&ambient))
            .collect::<crate::Result<_>>()?;
        comps.push(MultiPoly::zero(&ambient));
        VectorField::new(ambient.clone(), comps)
    };
    let c1 = promote(&contact.frame[0])?;
    let c2 = promote(&contact.frame[1])?;
    let second = match chart {
        ProlongationChart::Zero => c1.add(&c2.scale_poly(&fiber_var))?,
        ProlongationChart::Infinity => c1.scale_poly(&fiber_var).add(&c2)?,
    };
    let frame = DistributionFrame::new(vec![fiber_field.clone(), second], 2)?;
    let flag = check_engel(&frame)?
        .map_err(|failure| Error::Verification(format!("prolonged frame is not Engel: {failure}")))?;
    if !fields_proportional(&flag.w, &fiber_field) {
        return Err(Error::Verification(
            "characteristic field of the prolongation is not the fiber direction".into(),
        ));
    }
    Ok((frame, flag))
}

// --- samplers and serde ---------------------------------------------------

/// JSON descriptor of a single shear.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShearDescriptor {
    /// The sheared coordinate.
    pub coord: String,
    /// Exponent vector of the added monomial (in ambient order).
    pub exp: Vec<u32>,
    /// Coefficient of the added monomial.
    pub coef: GaussianRational,
}

impl ShearDescriptor {
    pub fn build(&self, ambient: &Ambient) -> crate::Result<PolyAutomorphism> {
        let m = MultiPoly::monomial(ambient, Expt(self.exp.clone()), self.coef.clone())?;
        make_shear(ambient, &self.coord, &m)
    }
}

/// Compose an ordered list of shear descriptors (first entry applied
/// first).
pub fn compose_shears(
    ambient: &Ambient,
    shears: &[ShearDescriptor],
) -> crate::Result<PolyAutomorphism> {
    let mut acc = PolyAutomorphism::identity(ambient);
    for s in shears {
        acc = s.build(ambient)?.compose(&acc)?;
    }
    Ok(acc)
}

/// A random shear with monomial degree ≤ 2 in the other coordinates.
pub fn sample_shear(rng: &mut sample::Prng, ambient: &Ambient) -> PolyAutomorphism {
    use rand::Rng;
    loop {
        let target = rng.random_range(0..ambient.len());
        let mut exp = vec![0u32; ambient.len()];
        let degree = rng.random_range(1..=2u32);
        for _ in 0..degree {
            let mut slot = rng.random_range(0..ambient.len());
            while slot == target {
                slot = rng.random_range(0..ambient.len());
            }
            exp[slot] += 1;
        }
        let coef = sample::gaussian_nonzero(rng, 3);
        let m = MultiPoly::monomial(ambient, Expt(exp), coef).unwrap();
        if let Ok(shear) = make_shear(ambient, ambient.name(target), &m) {
            return shear;
        }
    }
}

/// A composition of at most `max_count` random shears whose composite map
/// degree stays within `degree_cap` (resampled otherwise, deterministically
/// driven by the same stream). The cap keeps the symbolic Engel
/// verification on pulled-back frames inside test budgets; the transport
/// operations themselves accept arbitrary compositions.
pub fn sample_shear_composition(
    rng: &mut sample::Prng,
    ambient: &Ambient,
    max_count: usize,
    degree_cap: u32,
) -> PolyAutomorphism {
    use rand::Rng;
    loop {
        let count = rng.random_range(1..=max_count);
        let mut acc = PolyAutomorphism::identity(ambient);
        let mut ok = true;
        for _ in 0..count {
            let next = sample_shear(rng, ambient).compose(&acc).expect("shared ambient");
            let degree = next
                .forward()
                .components()
                .iter()
                .map(MultiPoly::total_degree)
                .max()
                .unwrap_or(0);
            if degree > degree_cap {
                ok = false;
                break;
            }
            acc = next;
        }
        if ok {
            return acc;
        }
    }
}
