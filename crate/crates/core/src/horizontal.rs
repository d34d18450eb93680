//! Construction and exact verification of curves tangent to the flag
//! `W ⊂ D ⊂ E` of the standard Engel structure and its transported models.
//!
//! Tangency to the triangular standard model is solved by exact integration
//! in the curve parameter: `y' = z x'` and `z' = w x'` determine `y` and `z`
//! from free `w` and `x`. The verifier works for any list of 1-forms, so
//! transported and prolonged models are checked through the same path.

use std::fmt;

use crate::distcalc::{standard_d_forms, standard_e_form, standard_w_forms, DiffForm};
use crate::exactnum::GaussianRational;
use crate::poly::{Ambient, PolyCurve, UniPoly};
use crate::Error;

/// Which tangency contract a disc claims.
#[derive(Clone, Debug)]
pub enum ModelTag {
    /// Tangent to the characteristic line field of the standard model
    /// (only `w` varies).
    WOfStandard,
    /// Tangent to the standard Engel distribution.
    DOfStandard,
    /// Tangent to the standard even contact structure.
    EOfStandard,
    /// Tangent to an arbitrary model given by annihilating 1-forms.
    General(Vec<DiffForm>),
}

impl ModelTag {
    /// The 1-forms whose vanishing on the velocity defines the model.
    pub fn defining_forms(&self) -> Vec<DiffForm> {
        match self {
            ModelTag::WOfStandard => standard_w_forms().to_vec(),
            ModelTag::DOfStandard => standard_d_forms().to_vec(),
            ModelTag::EOfStandard => vec![standard_e_form()],
            ModelTag::General(forms) => forms.clone(),
        }
    }
}

/// A polynomial disc together with its verified tangency model.
///
/// Constant curves are representable but flagged degenerate: a "line" in
/// the geometric sense must be non-constant.
#[derive(Clone, Debug)]
pub struct HorizontalDisc {
    curve: PolyCurve,
    model: ModelTag,
    basepoint: Vec<GaussianRational>,
    degenerate: bool,
}

impl HorizontalDisc {
    /// Wrap a curve after verifying its tangency identities exactly.
    pub fn new(curve: PolyCurve, model: ModelTag) -> crate::Result<Self> {
        let report = verify_tangency(&curve, &model.defining_forms())?;
        if !report.ok {
            return Err(Error::NotInDistribution(format!(
                "curve violates its model: {report}"
            )));
        }
        let basepoint = curve.at_zero();
        let degenerate = curve.is_constant();
        Ok(HorizontalDisc { curve, model, basepoint, degenerate })
    }

    pub fn curve(&self) -> &PolyCurve {
        &self.curve
    }

    pub fn model(&self) -> &ModelTag {
        &self.model
    }

    pub fn basepoint(&self) -> &[GaussianRational] {
        &self.basepoint
    }

    /// Whether the curve is constant (flagged, not rejected).
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// The velocity `f'(0)`, read off the linear coefficients.
    pub fn velocity_at_zero(&self) -> Vec<GaussianRational> {
        self.curve.components().iter().map(|u| u.coeff(1)).collect()
    }

    /// Exact reparametrization `ζ ↦ f(aζ + b)`, tangent for the same model.
    pub fn reparametrize(&self, a: &GaussianRational, b: &GaussianRational) -> Self {
        let curve = self.curve.compose_affine(a, b);
        let basepoint = curve.at_zero();
        let degenerate = curve.is_constant();
        HorizontalDisc { curve, model: self.model.clone(), basepoint, degenerate }
    }
}

/// Exact residuals of a curve against a list of annihilating 1-forms.
#[derive(Clone, Debug)]
pub struct TangencyReport {
    /// All residual polynomials vanish.
    pub ok: bool,
    /// `(form index, residual)` for each nonzero residual `ω(f'(ζ))`.
    pub residuals: Vec<(usize, UniPoly)>,
}

impl fmt::Display for TangencyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            write!(f, "tangent (all residuals vanish)")
        } else {
            write!(f, "nonzero residuals at forms ")?;
            for (i, (idx, r)) in self.residuals.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "#{idx}: {r:?}")?;
            }
            Ok(())
        }
    }
}

/// Decide `ω(f'(ζ)) = 0` as a polynomial identity for every form.
///
/// Forms must have degree 1; their ambient coordinates must all be covered
/// by the curve's target coordinates.
pub fn verify_tangency(curve: &PolyCurve, forms: &[DiffForm]) -> crate::Result<TangencyReport> {
    let velocity = curve.derivative();
    let mut residuals = Vec::new();
    for (idx, form) in forms.iter().enumerate() {
        if form.degree() != 1 {
            return Err(Error::WrongDegree { expected: 1, got: form.degree() });
        }
        let mut residual = UniPoly::zero();
        for (index, coeff) in form.terms() {
            let coord = form.ambient().name(index[0] as usize);
            let comp_idx = curve
                .ambient()
                .index_of(coord)
                .ok_or_else(|| Error::UnknownCoordinate(coord.to_string()))?;
            let pulled = coeff.compose_curve(curve)?;
            residual = &residual + &(&pulled * velocity.component(comp_idx));
        }
        if !residual.is_zero() {
            residuals.push((idx, residual));
        }
    }
    Ok(TangencyReport { ok: residuals.is_empty(), residuals })
}

/// Integrate the standard-model tangency conditions from free `w(ζ)`,
/// `x(ζ)`: exact `z = z₀ + ∫ w x'` and `y = y₀ + ∫ z x'`.
pub fn integrate_horizontal_d(
    w: UniPoly,
    x: UniPoly,
    y0: GaussianRational,
    z0: GaussianRational,
) -> HorizontalDisc {
    let xp = x.derivative();
    let z = &UniPoly::constant(z0) + &(&w * &xp).antiderivative();
    let y = &UniPoly::constant(y0) + &(&z * &xp).antiderivative();
    let curve = PolyCurve::new(Ambient::wxyz(), vec![w, x, y, z]).expect("four components");
    HorizontalDisc::new(curve, ModelTag::DOfStandard).expect("tangent by construction")
}

/// Integrate the even-contact condition from free `w(ζ)`, `x(ζ)`, `z(ζ)`:
/// exact `y = y₀ + ∫ z x'`.
pub fn integrate_horizontal_e(
    w: UniPoly,
    x: UniPoly,
    z: UniPoly,
    y0: GaussianRational,
) -> HorizontalDisc {
    let xp = x.derivative();
    let y = &UniPoly::constant(y0) + &(&z * &xp).antiderivative();
    let curve = PolyCurve::new(Ambient::wxyz(), vec![w, x, y, z]).expect("four components");
    HorizontalDisc::new(curve, ModelTag::EOfStandard).expect("tangent by construction")
}

/// Check that a velocity lies in the standard Engel plane at a point:
/// `v_y = z₀ v_x` and `v_z = w₀ v_x` (the `w`-component is free: it spans
/// the characteristic direction).
pub fn velocity_in_standard_d(
    p: &[GaussianRational],
    v: &[GaussianRational],
) -> crate::Result<()> {
    if p.len() != 4 || v.len() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: p.len().min(v.len()) });
    }
    let (w0, _x0, _y0, z0) = (&p[0], &p[1], &p[2], &p[3]);
    let (_vw, vx, vy, vz) = (&v[0], &v[1], &v[2], &v[3]);
    if vy != &(z0 * vx) {
        return Err(Error::NotInDistribution(format!(
            "v_y = {vy} but z0·v_x = {}: the relation v_y = z0·v_x fails",
            z0 * vx
        )));
    }
    if vz != &(w0 * vx) {
        return Err(Error::NotInDistribution(format!(
            "v_z = {vz} but w0·v_x = {}: the relation v_z = w0·v_x fails",
            w0 * vx
        )));
    }
    Ok(())
}

/// The explicit cubic horizontal line through `p` with velocity `v ∈ D_p`:
///
/// ```text
/// f(ζ) = ( w₀ + v_w ζ,
///          x₀ + v_x ζ,
///          y₀ + v_y ζ + v_x v_z ζ²/2 + v_x² v_w ζ³/6,
///          z₀ + v_z ζ + v_x v_w ζ²/2 )
/// ```
///
/// Agrees coefficient-for-coefficient with [`integrate_horizontal_d`] on the
/// affine inputs `w₀ + v_w ζ`, `x₀ + v_x ζ`. The zero velocity yields the
/// constant curve, returned with the degenerate flag set.
pub fn remark_line(p: &[GaussianRational], v: &[GaussianRational]) -> crate::Result<HorizontalDisc> {
    velocity_in_standard_d(p, v)?;
    let (w0, x0, y0, z0) = (&p[0], &p[1], &p[2], &p[3]);
    let (vw, vx, vy, vz) = (&v[0], &v[1], &v[2], &v[3]);
    let half = GaussianRational::from_ratio(1, 2);
    let sixth = GaussianRational::from_ratio(1, 6);

    let w = UniPoly::affine(w0.clone(), vw.clone());
    let x = UniPoly::affine(x0.clone(), vx.clone());
    let y = UniPoly::from_coeffs(vec![
        y0.clone(),
        vy.clone(),
        (&(vx * vz) * &half),
        (&(&(vx * vx) * vw) * &sixth),
    ]);
    let z = UniPoly::from_coeffs(vec![z0.clone(), vz.clone(), (&(vx * vw) * &half)]);

    let curve = PolyCurve::new(Ambient::wxyz(), vec![w, x, y, z])?;
    HorizontalDisc::new(curve, ModelTag::DOfStandard)
}

/// Drop a named fiber coordinate from a prolongation-chart curve.
///
/// If the input is tangent to a prolonged distribution, the output is
/// tangent to the underlying contact structure.
pub fn project_prolongation(curve: &PolyCurve, fiber: &str) -> crate::Result<PolyCurve> {
    let fiber_idx = curve.ambient().require(fiber)?;
    let names: Vec<String> = curve
        .ambient()
        .names()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != fiber_idx)
        .map(|(_, n)| n.clone())
        .collect();
    let comps: Vec<UniPoly> = curve
        .components()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != fiber_idx)
        .map(|(_, u)| u.clone())
        .collect();
    PolyCurve::new(Ambient::new(names), comps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gi(n: i64) -> GaussianRational {
        GaussianRational::from_int(n)
    }

    fn pt(vals: [i64; 4]) -> Vec<GaussianRational> {
        vals.map(GaussianRational::from_int).to_vec()
    }

    #[test]
    fn integrator_matches_explicit_formula() {
        // w = w0 + v_w ζ, x = x0 + v_x ζ with admissible velocity relations
        let p = pt([3, 1, 2, 5]);
        let vx = gi(2);
        let vw = gi(7);
        let vy = &p[3] * &vx; // z0 v_x
        let vz = &p[0] * &vx; // w0 v_x
        let v = vec![vw.clone(), vx.clone(), vy, vz];

        let line = remark_line(&p, &v).unwrap();
        let integrated = integrate_horizontal_d(
            UniPoly::affine(p[0].clone(), vw),
            UniPoly::affine(p[1].clone(), vx),
            p[2].clone(),
            p[3].clone(),
        );
        assert_eq!(line.curve(), integrated.curve());
        // cubic and quadratic correction terms are present
        assert!(!line.curve().component(2).coeff(3).is_zero());
        assert!(!line.curve().component(3).coeff(2).is_zero());
    }

    #[test]
    fn constant_x_gives_a_w_line() {
        let disc = integrate_horizontal_d(
            UniPoly::zeta(),
            UniPoly::constant(gi(4)),
            gi(-1),
            gi(9),
        );
        // y, z constant; only w moves: a W-line
        assert!(disc.curve().component(2).is_constant());
        assert!(disc.curve().component(3).is_constant());
        let report = verify_tangency(disc.curve(), &standard_w_forms()).unwrap();
        assert!(report.ok);
    }

    #[test]
    fn x_axis_line() {
        let disc = integrate_horizontal_d(UniPoly::zero(), UniPoly::zeta(), gi(0), gi(0));
        let expect =
            PolyCurve::new(Ambient::wxyz(), vec![UniPoly::zero(), UniPoly::zeta(), UniPoly::zero(), UniPoly::zero()])
                .unwrap();
        assert_eq!(disc.curve(), &expect);
    }

    #[test]
    fn e_integrator_examples() {
        // the vertical E-line (w0, x0, y0, ζ)
        let disc = integrate_horizontal_e(
            UniPoly::constant(gi(5)),
            UniPoly::constant(gi(2)),
            UniPoly::zeta(),
            gi(7),
        );
        assert_eq!(disc.curve().component(2), &UniPoly::constant(gi(7)));
        assert_eq!(disc.curve().component(3), &UniPoly::zeta());

        // z = 0 keeps y constant
        let disc = integrate_horizontal_e(UniPoly::zero(), UniPoly::zeta(), UniPoly::zero(), gi(3));
        assert_eq!(disc.curve().component(2), &UniPoly::constant(gi(3)));

        // x = ζ, z = ζ gives y = y0 + ζ²/2
        let disc = integrate_horizontal_e(UniPoly::zero(), UniPoly::zeta(), UniPoly::zeta(), gi(0));
        assert_eq!(disc.curve().component(2).coeff(2), GaussianRational::from_ratio(1, 2));
    }

    #[test]
    fn remark_line_examples() {
        // p = 0, v = e_x: the x-axis line
        let line = remark_line(&pt([0, 0, 0, 0]), &pt([0, 1, 0, 0])).unwrap();
        assert_eq!(line.curve().component(1), &UniPoly::zeta());
        assert!(line.curve().component(0).is_zero());
        assert!(line.curve().component(2).is_zero());
        assert!(line.curve().component(3).is_zero());
        assert!(!line.is_degenerate());

        // p = (1,0,0,2), v_x = 1 forces v_z = 1, v_y = 2; choose v_w = 2:
        // the y-component picks up ζ³/3 = v_x² v_w ζ³ / 6
        let p = pt([1, 0, 0, 2]);
        let v = pt([2, 1, 2, 1]);
        let line = remark_line(&p, &v).unwrap();
        assert_eq!(line.curve().component(2).coeff(3), GaussianRational::from_ratio(1, 3));

        // zero velocity: degenerate but representable
        let line = remark_line(&pt([1, 2, 3, 4]), &pt([0, 0, 0, 0])).unwrap();
        assert!(line.is_degenerate());
        assert!(line.curve().is_constant());
    }

    #[test]
    fn remark_line_rejects_bad_velocity() {
        let err = remark_line(&pt([0, 0, 0, 0]), &pt([0, 1, 5, 0])).unwrap_err();
        match err {
            Error::NotInDistribution(msg) => assert!(msg.contains("v_y = z0·v_x")),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn verify_tangency_examples() {
        let line = remark_line(&pt([0, 0, 0, 0]), &pt([0, 1, 0, 0])).unwrap();
        assert!(verify_tangency(line.curve(), &standard_d_forms()).unwrap().ok);

        // f(ζ) = (0, ζ, ζ, 0) fails dy − z dx with residual 1
        let bad = PolyCurve::new(
            Ambient::wxyz(),
            vec![UniPoly::zero(), UniPoly::zeta(), UniPoly::zeta(), UniPoly::zero()],
        )
        .unwrap();
        let report = verify_tangency(&bad, &[standard_e_form()]).unwrap();
        assert!(!report.ok);
        assert_eq!(report.residuals.len(), 1);
        assert_eq!(report.residuals[0].1, UniPoly::one());

        // every W-line annihilates dx, dy, dz
        let wline = PolyCurve::new(
            Ambient::wxyz(),
            vec![
                UniPoly::from_coeffs(vec![gi(1), gi(2), gi(3)]),
                UniPoly::constant(gi(4)),
                UniPoly::constant(gi(5)),
                UniPoly::constant(gi(6)),
            ],
        )
        .unwrap();
        assert!(verify_tangency(&wline, &standard_w_forms()).unwrap().ok);
    }

    #[test]
    fn projection_examples() {
        // pure fiber curve projects to a constant
        let fiber = PolyCurve::new(
            Ambient::xyzt(),
            vec![
                UniPoly::constant(gi(1)),
                UniPoly::constant(gi(2)),
                UniPoly::constant(gi(3)),
                UniPoly::zeta(),
            ],
        )
        .unwrap();
        let proj = project_prolongation(&fiber, "t").unwrap();
        assert!(proj.is_constant());
        assert_eq!(proj.ambient().names(), Ambient::xyz().names());

        let constant = PolyCurve::constant(Ambient::xyzt(), &pt([1, 1, 1, 1])).unwrap();
        assert!(project_prolongation(&constant, "t").unwrap().is_constant());

        assert!(matches!(
            project_prolongation(&proj, "t"),
            Err(Error::UnknownCoordinate(_))
        ));
    }

    mod properties {
        use super::*;
        use crate::sample;

        #[test]
        fn remark_equals_integration_on_linear_inputs() {
            let mut rng = sample::rng_for(21, 0);
            for _ in 0..50 {
                let p = sample::point(&mut rng, 4, 6);
                let vx = sample::gaussian(&mut rng, 6);
                let vw = sample::gaussian(&mut rng, 6);
                let v = vec![vw.clone(), vx.clone(), &p[3] * &vx, &p[0] * &vx];
                let line = remark_line(&p, &v).unwrap();
                let integrated = integrate_horizontal_d(
                    UniPoly::affine(p[0].clone(), vw),
                    UniPoly::affine(p[1].clone(), vx),
                    p[2].clone(),
                    p[3].clone(),
                );
                assert_eq!(line.curve(), integrated.curve());
            }
        }

        #[test]
        fn integrators_always_produce_tangent_curves() {
            let mut rng = sample::rng_for(22, 0);
            for _ in 0..40 {
                let w = sample::unipoly(&mut rng, 6, 5);
                let x = sample::unipoly(&mut rng, 6, 5);
                let z = sample::unipoly(&mut rng, 6, 5);
                let y0 = sample::gaussian(&mut rng, 5);
                let z0 = sample::gaussian(&mut rng, 5);
                let d = integrate_horizontal_d(w.clone(), x.clone(), y0.clone(), z0);
                assert!(verify_tangency(d.curve(), &standard_d_forms()).unwrap().ok);
                let e = integrate_horizontal_e(w, x, z, y0);
                assert!(verify_tangency(e.curve(), &[standard_e_form()]).unwrap().ok);
            }
        }

        #[test]
        fn reparametrization_preserves_tangency() {
            let mut rng = sample::rng_for(23, 0);
            for _ in 0..30 {
                let w = sample::unipoly(&mut rng, 4, 4);
                let x = sample::unipoly(&mut rng, 4, 4);
                let disc = integrate_horizontal_d(
                    w,
                    x,
                    sample::gaussian(&mut rng, 4),
                    sample::gaussian(&mut rng, 4),
                );
                let a = sample::gaussian_nonzero(&mut rng, 4);
                let b = sample::gaussian(&mut rng, 4);
                let re = disc.reparametrize(&a, &b);
                assert!(verify_tangency(re.curve(), &standard_d_forms()).unwrap().ok);
            }
        }
    }
}
