//! The decidable obstruction separating the triple families `{0, 1, R·i}`:
//! an affine bijection between two triples exists iff the linear solve
//! through two of the points maps the third correctly, for one of the six
//! possible pairings.
//!
//! For the marked families the complete solution set is `R = R'` together
//! with the exceptional hyperbola `R·R' = −1`, where the rotation
//! `ζ ↦ R'·i·ζ` swaps the two nonzero marks (`1 ↦ R'i` and
//! `Ri ↦ −RR' = 1`). Away from that family (in particular for `R, R'` of
//! equal sign) no pairing works, which is the discrete core of the
//! non-isomorphism argument.

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::exactnum::{ComplexFloat, GaussianRational};
use crate::Error;

/// Three pairwise distinct exact values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleSet {
    elements: [GaussianRational; 3],
}

impl TripleSet {
    pub fn new(elements: [GaussianRational; 3]) -> crate::Result<Self> {
        for i in 0..3 {
            for j in (i + 1)..3 {
                if elements[i] == elements[j] {
                    return Err(Error::Degenerate(format!(
                        "triple elements #{i} and #{j} coincide: {}",
                        elements[i]
                    )));
                }
            }
        }
        Ok(TripleSet { elements })
    }

    /// The marked triple `{0, 1, R·i}` for `R ≠ 0`.
    pub fn standard(r: &BigRational) -> crate::Result<Self> {
        if r.is_zero() {
            return Err(Error::Precondition("R must be nonzero".into()));
        }
        TripleSet::new([
            GaussianRational::zero(),
            GaussianRational::one(),
            GaussianRational::new(BigRational::zero(), r.clone()),
        ])
    }

    pub fn elements(&self) -> &[GaussianRational; 3] {
        &self.elements
    }
}

/// A verified affine map `ζ ↦ aζ + b` carrying one triple onto another
/// under the stated pairing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AffineWitness {
    pub a: GaussianRational,
    pub b: GaussianRational,
    /// `permutation[i]` is the target index of source element `i`.
    pub permutation: [usize; 3],
}

impl AffineWitness {
    /// The inverse witness (valid because `a ≠ 0`).
    pub fn inverted(&self) -> AffineWitness {
        let a_inv = self.a.recip().expect("witness slope is nonzero");
        let b_inv = -&(&a_inv * &self.b);
        let mut inv_perm = [0usize; 3];
        for (i, &pi) in self.permutation.iter().enumerate() {
            inv_perm[pi] = i;
        }
        AffineWitness { a: a_inv, b: b_inv, permutation: inv_perm }
    }
}

const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Search all six bijections for an affine map carrying `s` onto `t`.
///
/// Each pairing determines `(a, b)` exactly from the first two point
/// constraints; it is accepted iff `a ≠ 0` and the third constraint holds
/// exactly. The first witness in lexicographic permutation order wins.
pub fn affine_bijection_exists(s: &TripleSet, t: &TripleSet) -> Option<AffineWitness> {
    let se = s.elements();
    let te = t.elements();
    for perm in PERMUTATIONS {
        let d = &se[1] - &se[0];
        debug_assert!(!d.is_zero(), "triple elements are distinct");
        let a = (&te[perm[1]] - &te[perm[0]]).checked_div(&d).expect("distinct");
        if a.is_zero() {
            continue;
        }
        let b = &te[perm[0]] - &(&a * &se[0]);
        if &(&a * &se[2]) + &b == te[perm[2]] {
            return Some(AffineWitness { a, b, permutation: perm });
        }
    }
    None
}

/// Whether `p ∈ C⁴` lies in the union of the three marked hyperplanes
/// `x ∈ {0, 1, R·i}`; exact.
pub fn vr_membership(r: &BigRational, p: &[GaussianRational]) -> crate::Result<bool> {
    if r.is_zero() {
        return Err(Error::Precondition("R must be nonzero".into()));
    }
    if p.len() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: p.len() });
    }
    let triple = TripleSet::standard(r)?;
    Ok(triple.elements().contains(&p[1]))
}

/// Whether `(w, x) ∈ C²` lies in `(C × {0, 1, R·i}) ∪ ({0} × C)`; exact.
pub fn cr_membership(r: &BigRational, p: &[GaussianRational]) -> crate::Result<bool> {
    if r.is_zero() {
        return Err(Error::Precondition("R must be nonzero".into()));
    }
    if p.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: p.len() });
    }
    if p[0].is_zero() {
        return Ok(true);
    }
    let triple = TripleSet::standard(r)?;
    Ok(triple.elements().contains(&p[1]))
}

/// Float-mode membership in the marked hyperplanes, for irrational `R`;
/// flagged non-exact by the signature.
pub fn vr_membership_f64(r: f64, x: ComplexFloat, tau: f64) -> crate::Result<bool> {
    if r == 0.0 {
        return Err(Error::Precondition("R must be nonzero".into()));
    }
    let targets = [
        ComplexFloat::zero(),
        ComplexFloat::new(1.0, 0.0),
        ComplexFloat::new(0.0, r),
    ];
    Ok(targets
        .iter()
        .any(|t| (x - *t).abs() <= tau * t.abs().max(1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triple(vals: [(i64, i64); 3]) -> TripleSet {
        TripleSet::new(vals.map(|(re, im)| GaussianRational::from_parts(re, im))).unwrap()
    }

    #[test]
    fn identity_witness_on_equal_triples() {
        let s = triple([(0, 0), (1, 0), (0, 1)]);
        let w = affine_bijection_exists(&s, &s).unwrap();
        assert!(w.a.is_one());
        assert!(w.b.is_zero());
        assert_eq!(w.permutation, [0, 1, 2]);
    }

    #[test]
    fn distinct_marked_triples_admit_no_witness() {
        // {0, 1, i} vs {0, 1, 2i}: all six pairings fail the third constraint
        let s = triple([(0, 0), (1, 0), (0, 1)]);
        let t = triple([(0, 0), (1, 0), (0, 2)]);
        assert_eq!(affine_bijection_exists(&s, &t), None);
    }

    #[test]
    fn scaling_witness() {
        let s = triple([(0, 0), (1, 0), (2, 0)]);
        let t = triple([(0, 0), (2, 0), (4, 0)]);
        let w = affine_bijection_exists(&s, &t).unwrap();
        assert_eq!(w.a, GaussianRational::from_int(2));
        assert!(w.b.is_zero());
    }

    #[test]
    fn witness_symmetry() {
        let s = triple([(1, 0), (3, 0), (0, 2)]);
        let t = triple([(5, 0), (9, 0), (3, 4)]); // image under ζ ↦ 2ζ + 3
        let w = affine_bijection_exists(&s, &t).unwrap();
        let back = w.inverted();
        // the inverse carries t onto s under the inverse pairing
        for (i, e) in t.elements().iter().enumerate() {
            let mapped = &(&back.a * e) + &back.b;
            assert_eq!(mapped, s.elements()[back.permutation[i]]);
        }
        assert_eq!(affine_bijection_exists(&t, &s).unwrap().a, back.a);
    }

    #[test]
    fn exceptional_hyperbola_admits_the_rotation_witness() {
        // R·R' = −1: ζ ↦ R'i·ζ carries {0, 1, Ri} onto {0, 1, R'i}
        let r = BigRational::from_integer((-2).into());
        let rp = BigRational::new(1.into(), 2.into());
        let s = TripleSet::standard(&r).unwrap();
        let t = TripleSet::standard(&rp).unwrap();
        let w = affine_bijection_exists(&s, &t).unwrap();
        assert_eq!(w.a, GaussianRational::new(BigRational::zero(), rp));
        assert!(w.b.is_zero());
        assert_eq!(w.permutation, [0, 2, 1]);

        // equal signs never admit a witness when R ≠ R'
        let s = TripleSet::standard(&BigRational::from_integer(2.into())).unwrap();
        let t = TripleSet::standard(&BigRational::new(1.into(), 2.into())).unwrap();
        assert_eq!(affine_bijection_exists(&s, &t), None);
    }

    #[test]
    fn degenerate_triple_is_rejected() {
        assert!(TripleSet::new([
            GaussianRational::zero(),
            GaussianRational::zero(),
            GaussianRational::one(),
        ])
        .is_err());
    }

    #[test]
    fn vr_membership_examples() {
        let r = BigRational::from_integer(1.into());
        let mk = |x: GaussianRational| {
            vec![GaussianRational::from_int(9), x, GaussianRational::zero(), GaussianRational::zero()]
        };
        assert!(vr_membership(&r, &mk(GaussianRational::one())).unwrap());
        assert!(vr_membership(&r, &mk(GaussianRational::i())).unwrap());
        assert!(!vr_membership(&r, &mk(GaussianRational::from_int(2))).unwrap());
        assert!(vr_membership(&BigRational::zero(), &mk(GaussianRational::one())).is_err());
    }

    #[test]
    fn cr_membership_examples() {
        let r = BigRational::from_integer(1.into());
        let g = GaussianRational::from_int;
        assert!(cr_membership(&r, &[g(5), g(0)]).unwrap());
        assert!(cr_membership(&r, &[g(0), g(7)]).unwrap());
        assert!(!cr_membership(&r, &[g(1), g(2)]).unwrap());
    }

    #[test]
    fn float_mode_flags_irrational_r() {
        let r = std::f64::consts::SQRT_2;
        assert!(vr_membership_f64(r, ComplexFloat::new(0.0, r), 1e-9).unwrap());
        assert!(!vr_membership_f64(r, ComplexFloat::new(0.0, 1.4), 1e-9).unwrap());
    }
}
