//! Constructive point-to-point steering for the standard Engel structure.
//!
//! Identifying the structure with the space of 2-jets of maps `C → C`
//! (along graphs over `x`, the tangency conditions force `z = y'` and
//! `w = y''`), any jet data can be matched by a quintic Hermite
//! interpolant, and its 2-jet prolongation is a horizontal path segment.
//! Equal-`x` endpoints get a deterministic two-segment detour.

use num_rational::BigRational;
use serde::Serialize;

use crate::distcalc::standard_d_forms;
use crate::exactnum::GaussianRational;
use crate::horizontal::verify_tangency;
use crate::poly::{Ambient, PolyCurve, UniPoly};
use crate::Error;

/// One horizontal segment; the parameter runs over `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathSegment {
    pub curve: PolyCurve,
}

impl PathSegment {
    pub fn start(&self) -> Vec<GaussianRational> {
        self.curve.at_zero()
    }

    pub fn end(&self) -> Vec<GaussianRational> {
        self.curve.evaluate(&GaussianRational::one())
    }

    /// The segment traversed backwards (`t ↦ 1 − t`), exactly.
    pub fn reversed(&self) -> PathSegment {
        PathSegment {
            curve: self
                .curve
                .compose_affine(&GaussianRational::from_int(-1), &GaussianRational::one()),
        }
    }

    /// Exact tangency against the standard Engel forms.
    pub fn is_tangent(&self) -> bool {
        verify_tangency(&self.curve, &standard_d_forms())
            .map(|r| r.ok)
            .unwrap_or(false)
    }
}

/// A piecewise-polynomial path tangent to the standard Engel structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HorizontalPath {
    pub segments: Vec<PathSegment>,
}

impl HorizontalPath {
    pub fn empty() -> Self {
        HorizontalPath { segments: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn start(&self) -> Option<Vec<GaussianRational>> {
        self.segments.first().map(PathSegment::start)
    }

    pub fn end(&self) -> Option<Vec<GaussianRational>> {
        self.segments.last().map(PathSegment::end)
    }

    /// The path traversed backwards, segmentwise exact.
    pub fn reversed(&self) -> HorizontalPath {
        HorizontalPath {
            segments: self.segments.iter().rev().map(PathSegment::reversed).collect(),
        }
    }

    /// All segments tangent to the standard Engel structure, exactly.
    pub fn is_tangent(&self) -> bool {
        self.segments.iter().all(PathSegment::is_tangent)
    }
}

/// The 2-jet prolongation of a graph `y = y(x)` over the segment from
/// `x0` to `x1`: `t ↦ (y''(x(t)), x(t), y(x(t)), y'(x(t)))` with
/// `x(t) = x0 + t(x1 − x0)`.
pub fn jet_lift(
    y_of_x: &UniPoly,
    x0: &GaussianRational,
    x1: &GaussianRational,
) -> crate::Result<PathSegment> {
    if x0 == x1 {
        return Err(Error::Degenerate("jet lift needs distinct x endpoints".into()));
    }
    let dx = x1 - x0;
    let x_t = UniPoly::affine(x0.clone(), dx.clone());
    let y_t = y_of_x.compose_affine(&dx, x0);
    let z_t = y_of_x.derivative().compose_affine(&dx, x0);
    let w_t = y_of_x.derivative().derivative().compose_affine(&dx, x0);
    let curve = PolyCurve::new(Ambient::wxyz(), vec![w_t, x_t, y_t, z_t])?;
    debug_assert!(verify_tangency(&curve, &standard_d_forms())?.ok);
    Ok(PathSegment { curve })
}

/// Exact Gauss-Jordan solve; `None` when the matrix is singular.
fn solve_linear(
    mut a: Vec<Vec<GaussianRational>>,
    mut b: Vec<GaussianRational>,
) -> Option<Vec<GaussianRational>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip().ok()?;
        for c in col..n {
            a[col][c] = &a[col][c] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in col..n {
                let sub = &factor * &a[col][c];
                a[r][c] = &a[r][c] - &sub;
            }
            let sub = &factor * &b[col];
            b[r] = &b[r] - &sub;
        }
    }
    Some(b)
}

/// The degree-≤5 polynomial matching value, first and second derivative at
/// two distinct nodes (confluent Vandermonde system, always solvable).
fn hermite_quintic(
    x0: &GaussianRational,
    jet0: [&GaussianRational; 3],
    x1: &GaussianRational,
    jet1: [&GaussianRational; 3],
) -> UniPoly {
    let mut rows = Vec::with_capacity(6);
    let mut rhs = Vec::with_capacity(6);
    for (x, jet) in [(x0, jet0), (x1, jet1)] {
        // powers x^0 .. x^5
        let mut pow = vec![GaussianRational::one()];
        for k in 1..=5 {
            pow.push(&pow[k - 1] * x);
        }
        // y(x) = Σ c_k x^k
        rows.push(pow.clone());
        rhs.push(jet[0].clone());
        // y'(x) = Σ k c_k x^(k−1)
        let mut d1 = vec![GaussianRational::zero()];
        for k in 1..=5 {
            d1.push(pow[k - 1].scale(&BigRational::from_integer(k.into())));
        }
        rows.push(d1);
        rhs.push(jet[1].clone());
        // y''(x) = Σ k(k−1) c_k x^(k−2)
        let mut d2 = vec![GaussianRational::zero(), GaussianRational::zero()];
        for k in 2..=5usize {
            d2.push(pow[k - 2].scale(&BigRational::from_integer((k * (k - 1)).into())));
        }
        rows.push(d2);
        rhs.push(jet[2].clone());
    }
    let coeffs = solve_linear(rows, rhs).expect("distinct nodes give a nonsingular system");
    UniPoly::from_coeffs(coeffs)
}

/// Jet data `(y, y', y'') = (y, z, w)` of a point in jet coordinates.
fn jet_of(p: &[GaussianRational]) -> [&GaussianRational; 3] {
    [&p[2], &p[3], &p[0]]
}

/// A path tangent to the standard Engel structure from `p` to `q`, with
/// exact endpoints. Total: distinct `x`-coordinates take one quintic jet
/// lift; equal ones detour through the waypoint at `x_p + 1` carrying the
/// averaged endpoint jets.
pub fn hermite_steer(p: &[GaussianRational], q: &[GaussianRational]) -> crate::Result<HorizontalPath> {
    if p.len() != 4 || q.len() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: p.len().min(q.len()) });
    }
    if p == q {
        return Ok(HorizontalPath::empty());
    }
    let (xp, xq) = (&p[1], &q[1]);
    if xp != xq {
        let y = hermite_quintic(xp, jet_of(p), xq, jet_of(q));
        let segment = jet_lift(&y, xp, xq)?;
        return Ok(HorizontalPath { segments: vec![segment] });
    }
    let half = GaussianRational::from_ratio(1, 2);
    let xm = xp + &GaussianRational::one();
    let mid = vec![
        (&(&p[0] + &q[0]) * &half),
        xm,
        (&(&p[2] + &q[2]) * &half),
        (&(&p[3] + &q[3]) * &half),
    ];
    let first = hermite_steer(p, &mid)?;
    let second = hermite_steer(&mid, q)?;
    let mut segments = first.segments;
    segments.extend(second.segments);
    Ok(HorizontalPath { segments })
}

/// Exact endpoint and continuity check: the path starts at `p`, ends at
/// `q`, and consecutive segments share their junction points.
pub fn path_endpoint_check(
    path: &HorizontalPath,
    p: &[GaussianRational],
    q: &[GaussianRational],
) -> bool {
    if path.is_empty() {
        return p == q;
    }
    if path.start().as_deref() != Some(p) || path.end().as_deref() != Some(q) {
        return false;
    }
    path.segments
        .windows(2)
        .all(|pair| pair[0].end() == pair[1].start())
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
    fn jet_lift_of_zero_graph_is_the_x_line() {
        let seg = jet_lift(&UniPoly::zero(), &gi(0), &gi(1)).unwrap();
        assert_eq!(seg.curve.component(1), &UniPoly::zeta());
        assert!(seg.curve.component(0).is_zero());
        assert!(seg.curve.component(2).is_zero());
        assert!(seg.curve.component(3).is_zero());
        assert!(seg.is_tangent());
    }

    #[test]
    fn jet_lift_of_parabola_carries_its_jets() {
        // y = x²/2: z = x and w = 1 along the lift
        let y = UniPoly::from_coeffs(vec![gi(0), gi(0), GaussianRational::from_ratio(1, 2)]);
        let seg = jet_lift(&y, &gi(0), &gi(1)).unwrap();
        assert_eq!(seg.curve.component(3), seg.curve.component(1)); // z = x
        assert_eq!(seg.curve.component(0), &UniPoly::one()); // w = 1
        assert!(seg.is_tangent());
        assert!(jet_lift(&y, &gi(2), &gi(2)).is_err());
    }

    #[test]
    fn steer_along_x_axis() {
        let path = hermite_steer(&pt([0, 0, 0, 0]), &pt([0, 1, 0, 0])).unwrap();
        assert_eq!(path.segments.len(), 1);
        assert_eq!(path.segments[0].curve.component(1), &UniPoly::zeta());
        assert!(path.segments[0].curve.component(2).is_zero());
    }

    #[test]
    fn steer_to_full_jet_target() {
        let p = pt([0, 0, 0, 0]);
        let q = pt([1, 1, 1, 1]);
        let path = hermite_steer(&p, &q).unwrap();
        assert_eq!(path.segments.len(), 1);
        assert!(path_endpoint_check(&path, &p, &q));
        assert!(path.is_tangent());
        // the quintic reproduces the jets: z(1) = 1 and w(1) = 1
        let end = path.segments[0].end();
        assert_eq!(end, q);
        // degree bounds: y ≤ 5, z ≤ 4, w ≤ 3 in the parameter
        let c = &path.segments[0].curve;
        assert!(c.component(2).degree() <= 5);
        assert!(c.component(3).degree() <= 4);
        assert!(c.component(0).degree() <= 3);
    }

    #[test]
    fn pure_w_displacement_needs_a_detour() {
        let p = pt([0, 0, 0, 0]);
        let q = pt([1, 0, 0, 0]);
        let path = hermite_steer(&p, &q).unwrap();
        assert_eq!(path.segments.len(), 2);
        assert!(path_endpoint_check(&path, &p, &q));
        assert!(path.is_tangent());
        // waypoint sits at x = 1
        assert_eq!(path.segments[0].end()[1], gi(1));
    }

    #[test]
    fn endpoint_check_rejects_perturbed_paths() {
        let p = pt([0, 0, 0, 0]);
        let q = pt([2, 3, 1, 1]);
        let path = hermite_steer(&p, &q).unwrap();
        assert!(path_endpoint_check(&path, &p, &q));

        let mut broken = path.clone();
        let last = broken.segments.last_mut().unwrap();
        let shifted = last
            .curve
            .compose_affine(&GaussianRational::one(), &GaussianRational::from_ratio(1, 7));
        last.curve = shifted;
        assert!(!path_endpoint_check(&broken, &p, &q));

        // empty path connects a point to itself
        assert!(path_endpoint_check(&HorizontalPath::empty(), &p, &p));
        assert!(!path_endpoint_check(&HorizontalPath::empty(), &p, &q));
    }

    #[test]
    fn reversal_connects_backwards_and_stays_tangent() {
        let p = pt([2, -1, 3, 0]);
        let q = pt([0, 4, 1, -2]);
        let path = hermite_steer(&p, &q).unwrap();
        let back = path.reversed();
        assert!(path_endpoint_check(&back, &q, &p));
        assert!(back.is_tangent());
    }

    #[test]
    fn random_pairs_steer_exactly() {
        use crate::sample;
        let mut rng = sample::rng_for(77, 0);
        for k in 0..60 {
            let p = sample::point(&mut rng, 4, 6);
            let mut q = sample::point(&mut rng, 4, 6);
            if k % 6 == 0 {
                q[1] = p[1].clone(); // exercise the x_p = x_q detour
            }
            let path = hermite_steer(&p, &q).unwrap();
            assert!(path_endpoint_check(&path, &p, &q));
            assert!(path.is_tangent());
        }
    }
}
