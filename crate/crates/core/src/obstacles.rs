//! Obstacle families with dyadic shell layers, exact membership tests,
//! certified disc avoidance, and the forced intersection of W-lines with
//! the `(w,y)`-shell family.
//!
//! A shell layer constrains a block of coordinates to a polydisc boundary
//! (or annulus) with dyadic radius and caps the remaining coordinates.
//! Exact points get exact membership decisions; float points are decided
//! with a relative tolerance on the defining equalities.

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::exactnum::{dyadic_pow2, ratio_to_f64, ComplexFloat, GaussianRational};
use crate::horizontal::HorizontalDisc;
use crate::poly::{Ambient, UniPoly};
use crate::sample;
use crate::Error;

/// Relative tolerance for float membership on modulus equalities.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// The obstacle families.
///
/// - `A`: layers `max(|w|,|x|,|z|) = 2^(i−1)`, cap `|y| ≤ 2^(3i+1)`.
/// - `B`: layers `max(|w|,|x|) = 2^(i−1)`, caps `|y| ≤ 2^(5i+2)`,
///   `|z| ≤ 2^(3i+1)`.
/// - `K3`: annuli `2^(i−1)−ε ≤ max(|w|,|x|) ≤ 2^(i−1)+ε`, cap
///   `|y| ≤ 2^(5i+2)`, on the `(w,x,y)` factor.
/// - `KW`: layers `max(|w|,|y|) = 2^(i−1)`, cap `|z| ≤ 2^i`, on the
///   `(w,y,z)` factor.
/// - `Ln`: the union of hyperplane slabs `x ∈ {1, …, n}`.
/// - `CR`: `(C × {0,1,R·i}) ∪ ({0} × C)` in the `(w,x)` plane.
#[derive(Clone, Debug, PartialEq)]
pub enum ShellSet {
    A,
    B,
    K3 { epsilon: BigRational },
    KW,
    Ln { n: u32 },
    CR { r: BigRational },
}

/// One shell layer: block modulus range and caps, all exact.
#[derive(Clone, Debug)]
pub struct LayerSpec {
    /// Lower block-modulus bound (equals `hi` for true boundary shells).
    pub lo: BigRational,
    /// Upper block-modulus bound.
    pub hi: BigRational,
    /// Cap radius per capped coordinate, in kind order.
    pub caps: Vec<BigRational>,
}

/// Membership decision with the witnessing layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    In { layer: u32 },
    Out,
}

impl Membership {
    pub fn is_in(&self) -> bool {
        matches!(self, Membership::In { .. })
    }
}

impl ShellSet {
    pub fn a() -> Self {
        ShellSet::A
    }

    pub fn b() -> Self {
        ShellSet::B
    }

    /// `0 < ε ≤ 1/2` keeps consecutive annuli from interleaving
    /// (they touch at ε = 1/2, the default used throughout).
    pub fn k3(epsilon: BigRational) -> crate::Result<Self> {
        if epsilon <= BigRational::zero() || epsilon > BigRational::new(1.into(), 2.into()) {
            return Err(Error::Precondition(format!(
                "epsilon must lie in (0, 1/2], got {epsilon}"
            )));
        }
        Ok(ShellSet::K3 { epsilon })
    }

    pub fn k3_default() -> Self {
        ShellSet::K3 { epsilon: BigRational::new(1.into(), 2.into()) }
    }

    pub fn kw() -> Self {
        ShellSet::KW
    }

    pub fn ln(n: u32) -> crate::Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("Ln requires n ≥ 1".into()));
        }
        Ok(ShellSet::Ln { n })
    }

    pub fn cr(r: BigRational) -> crate::Result<Self> {
        if r.is_zero() {
            return Err(Error::Precondition("CR requires R ≠ 0".into()));
        }
        Ok(ShellSet::CR { r })
    }

    /// The coordinates this set constrains, in kind order.
    pub fn ambient(&self) -> Ambient {
        match self {
            ShellSet::A | ShellSet::B | ShellSet::Ln { .. } => Ambient::wxyz(),
            ShellSet::K3 { .. } => Ambient::new(["w", "x", "y"]),
            ShellSet::KW => Ambient::new(["w", "y", "z"]),
            ShellSet::CR { .. } => Ambient::new(["w", "x"]),
        }
    }

    /// Indices (into this set's ambient) of the shell-block coordinates.
    fn block_indices(&self) -> &'static [usize] {
        match self {
            ShellSet::A => &[0, 1, 3],    // (w, x, z)
            ShellSet::B => &[0, 1],       // (w, x)
            ShellSet::K3 { .. } => &[0, 1], // (w, x)
            ShellSet::KW => &[0, 1],      // (w, y) inside (w, y, z)
            _ => &[],
        }
    }

    /// Indices of the capped coordinates.
    fn cap_indices(&self) -> &'static [usize] {
        match self {
            ShellSet::A => &[2],     // y
            ShellSet::B => &[2, 3],  // y, z
            ShellSet::K3 { .. } => &[2], // y
            ShellSet::KW => &[2],    // z
            _ => &[],
        }
    }

    fn is_shell_kind(&self) -> bool {
        matches!(self, ShellSet::A | ShellSet::B | ShellSet::K3 { .. } | ShellSet::KW)
    }

    /// Layer `i ≥ 1` of a shell kind.
    pub fn layer(&self, i: u32) -> LayerSpec {
        let i = i64::from(i);
        let radius = dyadic_pow2(i - 1);
        match self {
            ShellSet::A => LayerSpec {
                lo: radius.clone(),
                hi: radius,
                caps: vec![dyadic_pow2(3 * i + 1)],
            },
            ShellSet::B => LayerSpec {
                lo: radius.clone(),
                hi: radius,
                caps: vec![dyadic_pow2(5 * i + 2), dyadic_pow2(3 * i + 1)],
            },
            ShellSet::K3 { epsilon } => LayerSpec {
                lo: &radius - epsilon,
                hi: &radius + epsilon,
                caps: vec![dyadic_pow2(5 * i + 2)],
            },
            ShellSet::KW => LayerSpec {
                lo: radius.clone(),
                hi: radius,
                caps: vec![dyadic_pow2(i)],
            },
            _ => panic!("layer() is only defined for shell kinds"),
        }
    }

    /// Exact membership for a point in this set's ambient.
    ///
    /// Lowest witnessing layer wins when annuli touch.
    pub fn membership_exact(&self, p: &[GaussianRational]) -> crate::Result<Membership> {
        let dim = self.ambient().len();
        if p.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
        }
        match self {
            ShellSet::Ln { n } => {
                let x = &p[1];
                for k in 1..=*n {
                    if *x == GaussianRational::from_int(i64::from(k)) {
                        return Ok(Membership::In { layer: k });
                    }
                }
                Ok(Membership::Out)
            }
            ShellSet::CR { r } => {
                let (w, x) = (&p[0], &p[1]);
                if w.is_zero() {
                    return Ok(Membership::In { layer: 0 });
                }
                let targets = cr_targets(r);
                for (k, t) in targets.iter().enumerate() {
                    if x == t {
                        return Ok(Membership::In { layer: k as u32 + 1 });
                    }
                }
                Ok(Membership::Out)
            }
            _ => {
                let block = self.block_indices();
                let caps = self.cap_indices();
                let mut i = 1u32;
                loop {
                    let layer = self.layer(i);
                    // all later layers have strictly larger lower radii
                    let below = block
                        .iter()
                        .all(|&j| p[j].cmp_abs_to_ratio(&layer.lo) == std::cmp::Ordering::Less);
                    if below {
                        return Ok(Membership::Out);
                    }
                    let within = block
                        .iter()
                        .all(|&j| p[j].cmp_abs_to_ratio(&layer.hi) != std::cmp::Ordering::Greater);
                    let reaches = block
                        .iter()
                        .any(|&j| p[j].cmp_abs_to_ratio(&layer.lo) != std::cmp::Ordering::Less);
                    let capped = caps.iter().zip(&layer.caps).all(|(&j, cap)| {
                        p[j].cmp_abs_to_ratio(cap) != std::cmp::Ordering::Greater
                    });
                    if within && reaches && capped {
                        return Ok(Membership::In { layer: i });
                    }
                    i += 1;
                }
            }
        }
    }

    /// Float membership with relative tolerance `tau` on the defining
    /// equalities.
    pub fn membership_float(&self, p: &[ComplexFloat], tau: f64) -> crate::Result<Membership> {
        let dim = self.ambient().len();
        if p.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
        }
        match self {
            ShellSet::Ln { n } => {
                for k in 1..=*n {
                    let d = (p[1] - ComplexFloat::new(f64::from(k), 0.0)).abs();
                    if d <= tau * f64::from(k).max(1.0) {
                        return Ok(Membership::In { layer: k });
                    }
                }
                Ok(Membership::Out)
            }
            ShellSet::CR { r } => {
                if p[0].abs() <= tau {
                    return Ok(Membership::In { layer: 0 });
                }
                let rf = ratio_to_f64(r);
                let targets = [
                    ComplexFloat::zero(),
                    ComplexFloat::new(1.0, 0.0),
                    ComplexFloat::new(0.0, rf),
                ];
                for (k, t) in targets.iter().enumerate() {
                    if (p[1] - *t).abs() <= tau * t.abs().max(1.0) {
                        return Ok(Membership::In { layer: k as u32 + 1 });
                    }
                }
                Ok(Membership::Out)
            }
            _ => {
                let block = self.block_indices();
                let caps = self.cap_indices();
                let blockmax = block.iter().map(|&j| p[j].abs()).fold(0.0, f64::max);
                let mut i = 1u32;
                loop {
                    let layer = self.layer(i);
                    let lo = ratio_to_f64(&layer.lo);
                    let hi = ratio_to_f64(&layer.hi);
                    if blockmax < lo * (1.0 - tau) {
                        return Ok(Membership::Out);
                    }
                    let on_shell =
                        blockmax >= lo * (1.0 - tau) && blockmax <= hi * (1.0 + tau);
                    let capped = caps.iter().zip(&layer.caps).all(|(&j, cap)| {
                        p[j].abs() <= ratio_to_f64(cap) * (1.0 + tau)
                    });
                    if on_shell && capped {
                        return Ok(Membership::In { layer: i });
                    }
                    i += 1;
                }
            }
        }
    }

    /// An exact random point of layer `i`, for shell kinds.
    ///
    /// Uses rational unit-circle points, so the layer predicate holds
    /// exactly by construction.
    pub fn sample_layer_point(&self, i: u32, rng: &mut sample::Prng) -> Vec<GaussianRational> {
        assert!(self.is_shell_kind(), "layer sampling requires a shell kind");
        use rand::Rng;
        let layer = self.layer(i);
        let dim = self.ambient().len();
        let block = self.block_indices();
        let caps = self.cap_indices();
        let mut point = vec![GaussianRational::zero(); dim];
        let boundary_slot = block[rng.random_range(0..block.len())];
        let unit_fraction = |rng: &mut sample::Prng| {
            let a: i64 = rng.random_range(0..=8);
            let b: i64 = rng.random_range(a..=a + 8);
            if b == 0 {
                BigRational::zero()
            } else {
                BigRational::new(a.into(), b.into())
            }
        };
        for &j in block {
            let circle = GaussianRational::unit_circle(&sample::rational(rng, 9));
            let modulus = if j == boundary_slot {
                // somewhere in [lo, hi]; exactly lo for true shells
                &layer.lo + &((&layer.hi - &layer.lo) * unit_fraction(rng))
            } else {
                &layer.hi * unit_fraction(rng)
            };
            point[j] = circle.scale(&modulus);
        }
        for (&j, cap) in caps.iter().zip(&layer.caps) {
            let circle = GaussianRational::unit_circle(&sample::rational(rng, 9));
            point[j] = circle.scale(&(cap * unit_fraction(rng)));
        }
        point
    }
}

fn cr_targets(r: &BigRational) -> [GaussianRational; 3] {
    [
        GaussianRational::zero(),
        GaussianRational::one(),
        GaussianRational::new(BigRational::zero(), r.clone()),
    ]
}

// --- serde -------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind")]
enum ShellJson {
    A,
    B,
    K3 { epsilon: String },
    KW,
    Ln { n: u32 },
    CR {
        #[serde(rename = "R")]
        r: String,
    },
}

impl Serialize for ShellSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let helper = match self {
            ShellSet::A => ShellJson::A,
            ShellSet::B => ShellJson::B,
            ShellSet::K3 { epsilon } => ShellJson::K3 { epsilon: epsilon.to_string() },
            ShellSet::KW => ShellJson::KW,
            ShellSet::Ln { n } => ShellJson::Ln { n: *n },
            ShellSet::CR { r } => ShellJson::CR { r: r.to_string() },
        };
        helper.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ShellSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let helper = ShellJson::deserialize(d)?;
        let parse = |s: &str| -> Result<BigRational, D::Error> {
            let g: GaussianRational = s.parse().map_err(serde::de::Error::custom)?;
            if !g.is_real() {
                return Err(serde::de::Error::custom("expected a real rational"));
            }
            Ok(g.re().clone())
        };
        Ok(match helper {
            ShellJson::A => ShellSet::A,
            ShellJson::B => ShellSet::B,
            ShellJson::K3 { epsilon } => {
                ShellSet::k3(parse(&epsilon)?).map_err(serde::de::Error::custom)?
            }
            ShellJson::KW => ShellSet::KW,
            ShellJson::Ln { n } => ShellSet::ln(n).map_err(serde::de::Error::custom)?,
            ShellJson::CR { r } => ShellSet::cr(parse(&r)?).map_err(serde::de::Error::custom)?,
        })
    }
}

// --- disc avoidance -----------------------------------------------------

/// Result of the semi-decision procedure for disc avoidance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AvoidanceOutcome {
    /// The closed disc provably misses every layer.
    Certified,
    /// A numeric point of the disc lies on the set (within tolerance).
    Intersects { zeta: ComplexFloat },
    /// Neither certificate was found at the sampling budget.
    Unknown,
}

impl AvoidanceOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, AvoidanceOutcome::Certified)
    }
}

struct GridLevel {
    circles: usize,
    angles: usize,
}

const GRID_LEVELS: [GridLevel; 3] = [
    GridLevel { circles: 8, angles: 64 },
    GridLevel { circles: 16, angles: 128 },
    GridLevel { circles: 32, angles: 256 },
];

/// How much work the avoidance decision may spend.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AvoidanceEffort {
    /// Exact triangle-inequality certificates only; anything unresolved is
    /// reported `Unknown`. Suited to feasibility gates that must run tens
    /// of thousands of times.
    Quick,
    /// Adds exact spot checks, grid sampling with Lipschitz margins and
    /// numeric witness hunts.
    Full,
}

/// Decide whether the disc `{f(ζ) : |ζ| ≤ r}` avoids the set.
///
/// Certificates are layered: triangle-inequality sup/inf bounds on the
/// component polynomials settle well-separated discs exactly; the rest is
/// handled by grid sampling with arc-step Lipschitz margins. The procedure
/// is conservative: `Certified` and `Intersects` are trustworthy at the
/// stated tolerance, `Unknown` is an honest "could not decide".
pub fn disc_avoids(
    set: &ShellSet,
    disc: &HorizontalDisc,
    r: f64,
) -> crate::Result<AvoidanceOutcome> {
    disc_avoids_with_effort(set, disc, r, AvoidanceEffort::Full)
}

/// [`disc_avoids`] with an explicit effort level. `Quick`-certified implies
/// `Full`-certified: the quick path is the full path's first stage.
pub fn disc_avoids_with_effort(
    set: &ShellSet,
    disc: &HorizontalDisc,
    r: f64,
    effort: AvoidanceEffort,
) -> crate::Result<AvoidanceOutcome> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Precondition(format!("disc radius must be in (0, 1], got {r}")));
    }
    let names = set.ambient();
    let comps: Vec<&UniPoly> = names
        .names()
        .iter()
        .map(|n| disc.curve().component_by_name(n))
        .collect::<crate::Result<_>>()?;
    let r_exact = BigRational::from_float(r).expect("finite radius");

    // Exact spot checks at rational boundary and interior points: an exact
    // membership hit short-circuits everything else.
    if effort == AvoidanceEffort::Full {
        for zeta in exact_spots(&r_exact) {
            let p: Vec<GaussianRational> = comps.iter().map(|u| u.evaluate(&zeta)).collect();
            if set.membership_exact(&p)?.is_in() {
                let zf = zeta.to_float();
                return Ok(AvoidanceOutcome::Intersects { zeta: zf });
            }
        }
    }

    match set {
        ShellSet::Ln { .. } | ShellSet::CR { .. } => {
            disc_avoids_varieties(set, &comps, r, &r_exact, effort)
        }
        _ => disc_avoids_shell(set, &comps, r, &r_exact, effort),
    }
}

fn exact_spots(r: &BigRational) -> Vec<GaussianRational> {
    let half = BigRational::new(1.into(), 2.into());
    let mut spots = vec![
        GaussianRational::zero(),
        GaussianRational::from_real(r.clone()),
        GaussianRational::from_real(-r.clone()),
        GaussianRational::from_real(r * &half),
    ];
    for t in [1i64, 2, 3] {
        let c = GaussianRational::unit_circle(&BigRational::new(t.into(), 2.into()));
        spots.push(c.scale(r));
    }
    spots
}

fn disc_avoids_shell(
    set: &ShellSet,
    comps: &[&UniPoly],
    r: f64,
    r_exact: &BigRational,
    effort: AvoidanceEffort,
) -> crate::Result<AvoidanceOutcome> {
    let block = set.block_indices();
    let caps = set.cap_indices();

    let sup_bounds: Vec<BigRational> =
        block.iter().map(|&j| comps[j].sup_bound_exact(r_exact)).collect();
    let block_sup = sup_bounds.iter().cloned().fold(BigRational::zero(), |a, b| a.max(b));
    // inf over the disc of the block max-modulus is at least the best
    // single-coordinate inf
    let block_inf: BigRational = block
        .iter()
        .map(|&j| comps[j].inf_bound_exact(r_exact))
        .fold(BigRational::zero(), |a, b| a.max(b));
    let cap_infs: Vec<BigRational> =
        caps.iter().map(|&j| comps[j].inf_bound_exact(r_exact)).collect();

    let mut unresolved: Vec<u32> = Vec::new();
    let mut i = 1u32;
    loop {
        let layer = set.layer(i);
        if layer.lo > block_sup {
            break; // this layer and all later ones are out of reach
        }
        let outside = block_inf > layer.hi;
        let cap_violated = cap_infs
            .iter()
            .zip(&layer.caps)
            .any(|(inf, cap)| inf > cap);
        if !(outside || cap_violated) {
            unresolved.push(i);
        }
        i += 1;
        if i > 64 || unresolved.len() > 8 {
            // radii grow like 2^i; a disc smeared across that many layers
            // is far from certifiable and not worth grid time
            return Ok(AvoidanceOutcome::Unknown);
        }
    }
    if unresolved.is_empty() {
        return Ok(AvoidanceOutcome::Certified);
    }
    if effort == AvoidanceEffort::Quick {
        return Ok(AvoidanceOutcome::Unknown);
    }

    // Grid refinement with Lipschitz margins.
    let lipschitz: Vec<f64> = comps.iter().map(|u| u.derivative().coeff_sum_bound(r)).collect();
    for level in &GRID_LEVELS {
        let (points, step) = grid_points(r, level);
        let values: Vec<Vec<ComplexFloat>> = comps
            .iter()
            .map(|u| points.iter().map(|&z| u.evaluate_float(z)).collect())
            .collect();
        let block_lip = block.iter().map(|&j| lipschitz[j]).fold(0.0, f64::max);

        unresolved.retain(|&layer_idx| {
            let layer = set.layer(layer_idx);
            let lo = ratio_to_f64(&layer.lo);
            let hi = ratio_to_f64(&layer.hi);
            let mut robust_everywhere = true;
            for (pi, _) in points.iter().enumerate() {
                let blockmax = block
                    .iter()
                    .map(|&j| values[j][pi].abs())
                    .fold(0.0, f64::max);
                let below = blockmax < lo - block_lip * step;
                let above = blockmax > hi + block_lip * step;
                let cap_out = caps.iter().zip(&layer.caps).any(|(&j, cap)| {
                    values[j][pi].abs() > ratio_to_f64(cap) + lipschitz[j] * step
                });
                if !(below || above || cap_out) {
                    robust_everywhere = false;
                    break;
                }
            }
            !robust_everywhere
        });
        if unresolved.is_empty() {
            return Ok(AvoidanceOutcome::Certified);
        }

        // look for a numeric intersection witness among unresolved layers
        for &layer_idx in &unresolved {
            if let Some(zeta) = find_shell_witness(set, comps, block, caps, layer_idx, &points) {
                return Ok(AvoidanceOutcome::Intersects { zeta });
            }
        }
    }
    Ok(AvoidanceOutcome::Unknown)
}

fn grid_points(r: f64, level: &GridLevel) -> (Vec<ComplexFloat>, f64) {
    let mut points = vec![ComplexFloat::zero()];
    for m in 1..=level.circles {
        let rho = r * (m as f64) / (level.circles as f64);
        for k in 0..level.angles {
            let theta = 2.0 * std::f64::consts::PI * (k as f64) / (level.angles as f64);
            points.push(ComplexFloat::cis(theta).scale(rho));
        }
    }
    // max distance from any disc point to its nearest grid point
    let step = r * (0.5 / level.circles as f64 + std::f64::consts::PI / level.angles as f64);
    (points, step)
}

/// Hunt for a point where the layer predicate holds within tolerance:
/// either a grid point already on the shell, or a radial sign change of
/// `blockmax − radius` that can be bisected with the caps holding.
fn find_shell_witness(
    set: &ShellSet,
    comps: &[&UniPoly],
    block: &[usize],
    caps: &[usize],
    layer_idx: u32,
    points: &[ComplexFloat],
) -> Option<ComplexFloat> {
    let layer = set.layer(layer_idx);
    let lo = ratio_to_f64(&layer.lo);
    let hi = ratio_to_f64(&layer.hi);
    let scale = hi.max(1.0);
    let blockmax = |z: ComplexFloat| -> f64 {
        block
            .iter()
            .map(|&j| comps[j].evaluate_float(z).abs())
            .fold(0.0, f64::max)
    };
    let caps_ok = |z: ComplexFloat| -> bool {
        caps.iter().zip(&layer.caps).all(|(&j, cap)| {
            comps[j].evaluate_float(z).abs()
                <= ratio_to_f64(cap) * (1.0 + FLOAT_TOLERANCE)
        })
    };

    // direct hits first
    for &z in points {
        let bm = blockmax(z);
        if bm >= lo * (1.0 - FLOAT_TOLERANCE)
            && bm <= hi * (1.0 + FLOAT_TOLERANCE)
            && caps_ok(z)
        {
            return Some(z);
        }
    }
    // radial bisection on blockmax − lo (true shells have lo = hi)
    let rays = 32;
    let steps = 24;
    let rmax = points.iter().map(|z| z.abs()).fold(0.0, f64::max);
    for k in 0..rays {
        let theta = 2.0 * std::f64::consts::PI * (k as f64) / (rays as f64);
        let dir = ComplexFloat::cis(theta);
        let f = |s: f64| blockmax(dir.scale(s)) - lo;
        let mut prev_s = 0.0;
        let mut prev_v = f(0.0);
        for m in 1..=steps {
            let s = rmax * (m as f64) / (steps as f64);
            let v = f(s);
            if prev_v.signum() != v.signum() {
                let (mut a, mut b) = (prev_s, s);
                for _ in 0..80 {
                    let mid = 0.5 * (a + b);
                    if f(a).signum() == f(mid).signum() {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                let z = dir.scale(0.5 * (a + b));
                let bm = blockmax(z);
                if (bm - lo).abs() <= FLOAT_TOLERANCE * scale && caps_ok(z) {
                    return Some(z);
                }
            }
            prev_s = s;
            prev_v = v;
        }
    }
    None
}

/// Avoidance for the variety-style sets (`Ln` slabs and `C_R`): Newton
/// refinement finds intersection witnesses; exact inf bounds certify
/// avoidance branch by branch.
fn disc_avoids_varieties(
    set: &ShellSet,
    comps: &[&UniPoly],
    r: f64,
    r_exact: &BigRational,
    effort: AvoidanceEffort,
) -> crate::Result<AvoidanceOutcome> {
    let branches: Vec<(usize, GaussianRational)> = match set {
        ShellSet::Ln { n } => (1..=*n)
            .map(|k| (1usize, GaussianRational::from_int(i64::from(k))))
            .collect(),
        ShellSet::CR { r } => {
            let mut v: Vec<(usize, GaussianRational)> =
                cr_targets(r).into_iter().map(|t| (1usize, t)).collect();
            v.push((0usize, GaussianRational::zero())); // the {w = 0} branch
            v
        }
        _ => unreachable!("variety handler"),
    };
    let mut all_certified = true;
    for (coord, target) in branches {
        let shifted = comps[coord] - &UniPoly::constant(target);
        if shifted.inf_bound_exact(r_exact) > BigRational::zero() {
            continue; // branch certifiably avoided
        }
        // try a Newton witness inside the disc
        if effort == AvoidanceEffort::Full {
            if let Some(zeta) = newton_root_in_disc(&shifted, r) {
                return Ok(AvoidanceOutcome::Intersects { zeta });
            }
        }
        all_certified = false;
    }
    if all_certified {
        Ok(AvoidanceOutcome::Certified)
    } else {
        Ok(AvoidanceOutcome::Unknown)
    }
}

fn newton_root_in_disc(u: &UniPoly, r: f64) -> Option<ComplexFloat> {
    if u.is_zero() {
        return Some(ComplexFloat::zero());
    }
    let du = u.derivative();
    for start_k in 0..16 {
        let theta = 2.0 * std::f64::consts::PI * (start_k as f64) / 16.0;
        let mut z = ComplexFloat::cis(theta).scale(r * 0.5);
        for _ in 0..60 {
            let v = u.evaluate_float(z);
            let d = du.evaluate_float(z);
            if d.abs() < 1e-300 {
                break;
            }
            z = z - v / d;
            if z.abs() > 4.0 {
                break;
            }
        }
        if z.abs() <= r && u.evaluate_float(z).abs() <= 1e-12 {
            return Some(z);
        }
    }
    None
}

// --- W-line intersection ---------------------------------------------------

/// Maximum modulus of `w` on the circle of radius `rho`, refined to
/// machine precision around the sampled argmax.
fn circle_max(w: &UniPoly, rho: f64, samples: usize) -> (f64, f64) {
    let mut best_theta = 0.0;
    let mut best = f64::MIN;
    for k in 0..samples {
        let theta = 2.0 * std::f64::consts::PI * (k as f64) / (samples as f64);
        let v = w.evaluate_float(ComplexFloat::cis(theta).scale(rho)).abs();
        if v > best {
            best = v;
            best_theta = theta;
        }
    }
    // golden-section refinement on the bracketing arc
    let span = 2.0 * std::f64::consts::PI / (samples as f64);
    let (mut a, mut b) = (best_theta - span, best_theta + span);
    let phi = 0.5 * (3.0 - 5f64.sqrt());
    let eval = |t: f64| w.evaluate_float(ComplexFloat::cis(t).scale(rho)).abs();
    for _ in 0..200 {
        let m1 = a + phi * (b - a);
        let m2 = b - phi * (b - a);
        if eval(m1) < eval(m2) {
            a = m1;
        } else {
            b = m2;
        }
    }
    let theta = 0.5 * (a + b);
    (eval(theta), theta)
}

/// A parameter value where the W-line `(w(ζ), x₀, y₀, z₀)` meets the
/// `(w,y)-shell family: the layer index is chosen exactly from the base
/// point, then the circle radius with max-modulus equal to the layer
/// radius is located by bisection (the max modulus of a nonconstant
/// polynomial is continuous, strictly increasing and unbounded).
///
/// The returned witness satisfies `||w(ζ)| − 2^(i−1)| ≤ 1e−9 · 2^(i−1)`
/// and `max(|w(ζ)|, |y₀|) = |w(ζ)|`.
pub fn wline_shell_intersection(
    w: &UniPoly,
    base: &[GaussianRational; 3],
    set: &ShellSet,
) -> crate::Result<(u32, ComplexFloat)> {
    if !matches!(set, ShellSet::KW) {
        return Err(Error::Precondition("intersection search expects the KW family".into()));
    }
    if w.is_constant() {
        return Err(Error::ConstantInput);
    }
    let (_x0, y0, z0) = (&base[0], &base[1], &base[2]);

    // smallest valid layer: 2^(i−1) > |y0| and 2^i ≥ |z0|, exactly
    let mut i: u32 = 1;
    loop {
        let ok_y = y0.cmp_abs_to_dyadic(i64::from(i) - 1) == std::cmp::Ordering::Less;
        let ok_z = z0.cmp_abs_to_dyadic(i64::from(i)) != std::cmp::Ordering::Greater;
        if ok_y && ok_z {
            break;
        }
        i += 1;
    }
    // keep a numeric margin so max(|w(ζ)|, |y0|) is decided by w
    let y0f = y0.to_float().abs();
    let w0f = w.coeff(0).to_float().abs();
    loop {
        let target = dyadic_pow2(i64::from(i) - 1);
        let tf = ratio_to_f64(&target);
        if y0f <= tf * (1.0 - 1e-6) && w0f <= tf * (1.0 - 1e-6) {
            break;
        }
        i += 1;
    }
    let target = ratio_to_f64(&dyadic_pow2(i64::from(i) - 1));

    // bracket the radius: M(0) < target ≤ M(r_hi)
    let samples = 256.max(16 * w.degree());
    let mut r_hi = 1.0;
    while circle_max(w, r_hi, samples).0 < target {
        r_hi *= 2.0;
        if r_hi > 1e300 {
            return Err(Error::Degenerate("max modulus failed to reach the shell".into()));
        }
    }
    let mut r_lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (r_lo + r_hi);
        if circle_max(w, mid, samples).0 < target {
            r_lo = mid;
        } else {
            r_hi = mid;
        }
        if (r_hi - r_lo) / r_hi.max(1e-30) < 1e-14 {
            break;
        }
    }
    let (value, theta) = circle_max(w, r_hi, samples);
    let zeta = ComplexFloat::cis(theta).scale(r_hi);
    let residual = (value - target).abs() / target;
    if residual > FLOAT_TOLERANCE {
        return Err(Error::Degenerate(format!(
            "witness residual {residual:.3e} exceeds tolerance"
        )));
    }
    Ok((i, zeta))
}

/// Descriptor of the slab-union family: `n` parallel hyperplane slabs,
/// hence exactly `n` connected components.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LnDescriptor {
    pub n: u32,
    pub slabs: Vec<u32>,
    pub component_count: u32,
}

/// The slab-union structure `{x ∈ {1, …, n}}`.
pub fn ln_structure(n: u32) -> crate::Result<LnDescriptor> {
    if n == 0 {
        return Err(Error::Precondition("n must be ≥ 1".into()));
    }
    Ok(LnDescriptor { n, slabs: (1..=n).collect(), component_count: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::horizontal::{integrate_horizontal_d, remark_line};
    use num_traits::One;

    fn gi(n: i64) -> GaussianRational {
        GaussianRational::from_int(n)
    }

    fn pt4(vals: [i64; 4]) -> Vec<GaussianRational> {
        vals.map(GaussianRational::from_int).to_vec()
    }

    #[test]
    fn b_membership_examples() {
        let b = ShellSet::b();
        // (1,0,0,0): max(|w|,|x|) = 1 = 2⁰, caps 0 ≤ 128 and 0 ≤ 16
        assert_eq!(
            b.membership_exact(&pt4([1, 0, 0, 0])).unwrap(),
            Membership::In { layer: 1 }
        );
        assert_eq!(b.membership_exact(&pt4([0, 0, 0, 0])).unwrap(), Membership::Out);
    }

    #[test]
    fn a_membership_example() {
        let a = ShellSet::a();
        // block max(|w|,|x|,|z|) = 1 but |y| = 17 > c₁ = 16: out everywhere
        assert_eq!(a.membership_exact(&pt4([0, 0, 17, 1])).unwrap(), Membership::Out);
        // same block with |y| = 16 is exactly capped
        assert_eq!(
            a.membership_exact(&pt4([0, 0, 16, 1])).unwrap(),
            Membership::In { layer: 1 }
        );
    }

    #[test]
    fn kw_layer_caps_scale_with_index() {
        let kw = ShellSet::kw();
        let l3 = kw.layer(3);
        assert_eq!(l3.lo, BigRational::from_integer(4.into()));
        assert_eq!(l3.caps[0], BigRational::from_integer(8.into()));
        // (4, 0, 8) sits on layer 3 of the (w,y,z) family
        let p = vec![gi(4), gi(0), gi(8)];
        assert_eq!(kw.membership_exact(&p).unwrap(), Membership::In { layer: 3 });
    }

    #[test]
    fn k3_annulus_membership() {
        let k3 = ShellSet::k3_default();
        // layer 1 annulus: 1/2 ≤ max(|w|,|x|) ≤ 3/2
        let inside = vec![gi(1), gi(0), gi(0)];
        assert_eq!(k3.membership_exact(&inside).unwrap(), Membership::In { layer: 1 });
        let below = vec![GaussianRational::from_ratio(1, 4), gi(0), gi(0)];
        assert_eq!(k3.membership_exact(&below).unwrap(), Membership::Out);
        assert!(ShellSet::k3(BigRational::new(3.into(), 4.into())).is_err());
    }

    #[test]
    fn float_membership_agrees_on_comfortable_margins() {
        let b = ShellSet::b();
        let mut rng = sample::rng_for(31, 0);
        for _ in 0..200 {
            let i = 1 + (sample::rational(&mut rng, 3).numer().magnitude().bits() as u32 % 3);
            let p = b.sample_layer_point(i, &mut rng);
            let exact = b.membership_exact(&p).unwrap();
            let floats: Vec<ComplexFloat> = p.iter().map(|c| c.to_float()).collect();
            let fl = b.membership_float(&floats, FLOAT_TOLERANCE).unwrap();
            assert_eq!(exact.is_in(), fl.is_in());
        }
    }

    #[test]
    fn ln_structure_examples() {
        assert_eq!(ln_structure(1).unwrap().component_count, 1);
        assert_eq!(ln_structure(3).unwrap().component_count, 3);
        let l3 = ShellSet::ln(3).unwrap();
        assert!(l3.membership_exact(&pt4([0, 2, 0, 0])).unwrap().is_in());
        assert_eq!(l3.membership_exact(&pt4([0, 5, 0, 0])).unwrap(), Membership::Out);
    }

    #[test]
    fn disc_avoidance_examples() {
        let b = ShellSet::b();
        // constant disc at the origin
        let constant = remark_line(&pt4([0, 0, 0, 0]), &pt4([0, 0, 0, 0])).unwrap();
        assert!(disc_avoids(&b, &constant, 1.0).unwrap().is_certified());

        // f(ζ) = (1, ζ/2, 0, 0): |w| ≡ 1 on the first shell with caps holding
        let disc = integrate_horizontal_d(
            UniPoly::constant(gi(1)),
            UniPoly::from_coeffs(vec![gi(0), GaussianRational::from_ratio(1, 2)]),
            gi(0),
            gi(0),
        );
        match disc_avoids(&b, &disc, 1.0).unwrap() {
            AvoidanceOutcome::Intersects { .. } => {}
            other => panic!("expected intersection, got {other:?}"),
        }

        // sup max(|w|,|x|) < 1 never reaches the smallest shell
        let small = integrate_horizontal_d(
            UniPoly::from_coeffs(vec![GaussianRational::from_ratio(1, 4), GaussianRational::from_ratio(1, 8)]),
            UniPoly::from_coeffs(vec![gi(0), GaussianRational::from_ratio(1, 3)]),
            gi(0),
            gi(0),
        );
        assert!(disc_avoids(&b, &small, 1.0).unwrap().is_certified());
    }

    #[test]
    fn certified_never_contradicts_exact_membership() {
        let b = ShellSet::b();
        let mut rng = sample::rng_for(33, 0);
        for _ in 0..50 {
            let w = sample::unipoly(&mut rng, 3, 2);
            let x = sample::unipoly(&mut rng, 3, 2);
            let disc = integrate_horizontal_d(
                w,
                x,
                sample::gaussian(&mut rng, 2),
                sample::gaussian(&mut rng, 2),
            );
            if disc_avoids(&b, &disc, 1.0).unwrap().is_certified() {
                // exact spot membership must agree
                for t in [0i64, 1, -1] {
                    let p = disc.curve().evaluate(&GaussianRational::from_ratio(t, 2));
                    assert!(!b.membership_exact(&p).unwrap().is_in());
                }
            }
        }
    }

    #[test]
    fn wline_intersection_examples() {
        let kw = ShellSet::kw();
        // w(ζ) = ζ from the origin: layer 1, |ζ| = 1
        let (layer, zeta) =
            wline_shell_intersection(&UniPoly::zeta(), &[gi(0), gi(0), gi(0)], &kw).unwrap();
        assert_eq!(layer, 1);
        assert!((zeta.abs() - 1.0).abs() < 1e-9);

        // w(ζ) = ζ²: M(r) = r², target 1 → |ζ| = 1
        let sq = UniPoly::from_coeffs(vec![gi(0), gi(0), gi(1)]);
        let (_, zeta) = wline_shell_intersection(&sq, &[gi(0), gi(0), gi(0)], &kw).unwrap();
        assert!((zeta.abs() - 1.0).abs() < 1e-9);

        // w(ζ) = ζ + 5 with base (·, 3, 20): layer 5, |w(ζ)| ≈ 16
        let shifted = UniPoly::from_coeffs(vec![gi(5), gi(1)]);
        let (layer, zeta) =
            wline_shell_intersection(&shifted, &[gi(0), gi(3), gi(20)], &kw).unwrap();
        assert_eq!(layer, 5);
        let val = shifted.evaluate_float(zeta).abs();
        assert!((val - 16.0).abs() / 16.0 < 1e-9);

        assert!(matches!(
            wline_shell_intersection(&UniPoly::constant(gi(2)), &[gi(0), gi(0), gi(0)], &kw),
            Err(Error::ConstantInput)
        ));
    }

    #[test]
    fn b_points_lie_in_k3_times_c() {
        // with c_i = d_i and any ε ∈ (0, 1/2], every B layer point projects
        // into the (w,x,y) annulus family
        let b = ShellSet::b();
        let k3 = ShellSet::k3_default();
        let mut rng = sample::rng_for(34, 0);
        for _ in 0..200 {
            use rand::Rng;
            let i = rng.random_range(1..=4u32);
            let p = b.sample_layer_point(i, &mut rng);
            assert!(b.membership_exact(&p).unwrap().is_in());
            let proj = vec![p[0].clone(), p[1].clone(), p[2].clone()];
            assert!(
                k3.membership_exact(&proj).unwrap().is_in(),
                "B layer point {p:?} escaped K3 × C"
            );
        }
    }

    #[test]
    fn shell_set_json_round_trip() {
        for set in [
            ShellSet::a(),
            ShellSet::b(),
            ShellSet::k3_default(),
            ShellSet::kw(),
            ShellSet::ln(3).unwrap(),
            ShellSet::cr(BigRational::new(1.into(), 2.into())).unwrap(),
        ] {
            let s = serde_json::to_string(&set).unwrap();
            let back: ShellSet = serde_json::from_str(&s).unwrap();
            assert_eq!(set, back);
        }
        let parsed: ShellSet = serde_json::from_str(r#"{"kind":"K3","epsilon":"1/2"}"#).unwrap();
        assert_eq!(parsed, ShellSet::k3_default());
    }

    #[test]
    fn cr_membership_examples() {
        let cr = ShellSet::cr(BigRational::one()).unwrap();
        // (5, 0): second factor hits 0
        assert!(cr.membership_exact(&[gi(5), gi(0)]).unwrap().is_in());
        // (0, 7): first factor zero branch
        assert!(cr.membership_exact(&[gi(0), gi(7)]).unwrap().is_in());
        // (1, 2) misses with R = 1
        assert_eq!(cr.membership_exact(&[gi(1), gi(2)]).unwrap(), Membership::Out);
    }
}
