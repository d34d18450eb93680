//! Derivative-estimate verdicts for shell-avoiding horizontal discs, and
//! the directed Finsler lower bounds they imply.
//!
//! A horizontal disc avoiding the `B` family with basepoint in the
//! `2^N₀`-polydisc has its velocity at the origin capped by
//! `(2^(N₀+1), 2^(N₀+1), 2^(3N₀+2), 2^(2N₀+1))` coordinatewise; avoiding
//! the `A` family caps it by `(2^(N₀+1), 2^(N₀+1), 2^(2N₀+1), 2^(N₀+1))`.
//! The verdict pipeline checks those strict inequalities exactly from the
//! curve coefficients; since every admissible disc is capped, the caps
//! convert into lower bounds for the directed Finsler infimum.

use num_rational::BigRational;
use num_traits::Zero;
use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::exactnum::{dyadic_pow2, exact_sqrt, ratio_to_f64, GaussianRational};
use crate::horizontal::{
    integrate_horizontal_d, velocity_in_standard_d, HorizontalDisc, ModelTag,
};
use crate::obstacles::{disc_avoids, ShellSet};
use crate::poly::UniPoly;
use crate::sample;
use crate::Error;

/// Derivative bound at the center of a `ρ`-circle on which the function is
/// bounded by `M` (Cauchy integral formula).
pub fn cauchy_derivative_bound(m: f64, rho: f64) -> crate::Result<f64> {
    if rho <= 0.0 {
        return Err(Error::Precondition(format!("circle radius must be positive, got {rho}")));
    }
    if m < 0.0 {
        return Err(Error::Precondition(format!("sup bound must be nonnegative, got {m}")));
    }
    Ok(m / rho)
}

/// Which obstacle family's estimates are in force.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ObstacleModel {
    /// Complement of the `A` family (block `(w,x,z)`, cap `y`).
    AComplement,
    /// Complement of the `B` family (block `(w,x)`, caps `y`, `z`).
    BComplement,
}

impl ObstacleModel {
    pub fn shell_set(self) -> ShellSet {
        match self {
            ObstacleModel::AComplement => ShellSet::a(),
            ObstacleModel::BComplement => ShellSet::b(),
        }
    }

    /// Velocity thresholds `(T_w, T_x, T_y, T_z)` at basepoint scale `N₀`.
    pub fn thresholds(self, n0: u32) -> [BigRational; 4] {
        let n = i64::from(n0);
        match self {
            ObstacleModel::BComplement => [
                dyadic_pow2(n + 1),
                dyadic_pow2(n + 1),
                dyadic_pow2(3 * n + 2),
                dyadic_pow2(2 * n + 1),
            ],
            ObstacleModel::AComplement => [
                dyadic_pow2(n + 1),
                dyadic_pow2(n + 1),
                dyadic_pow2(2 * n + 1),
                dyadic_pow2(n + 1),
            ],
        }
    }
}

/// Outcome of checking the four strict velocity bounds on one disc.
#[derive(Clone, Debug)]
pub struct LemmaVerdict {
    pub n0: u32,
    /// `|w'(0)|, |x'(0)|, |y'(0)|, |z'(0)|` as floats, for reporting.
    pub observed: [f64; 4],
    /// The exact dyadic thresholds.
    pub thresholds: [BigRational; 4],
    /// Strict comparison per coordinate, decided exactly on squares.
    pub pass: [bool; 4],
    pub overall: bool,
}

impl Serialize for LemmaVerdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("LemmaVerdict", 5)?;
        st.serialize_field("n0", &self.n0)?;
        st.serialize_field("observed", &self.observed)?;
        let th: Vec<String> = self.thresholds.iter().map(|t| t.to_string()).collect();
        st.serialize_field("thresholds", &th)?;
        st.serialize_field("pass", &self.pass)?;
        st.serialize_field("overall", &self.overall)?;
        st.end()
    }
}

/// Minimal `N₀ ≥ 1` with `p` inside the open polydisc `2^(N₀) D⁴`.
pub fn minimal_n0(p: &[GaussianRational]) -> u32 {
    let mut n0 = 1u32;
    loop {
        if p.iter().all(|c| c.cmp_abs_to_dyadic(i64::from(n0)) == std::cmp::Ordering::Less) {
            return n0;
        }
        n0 += 1;
    }
}

fn verdict_for(disc: &HorizontalDisc, n0: u32, model: ObstacleModel) -> LemmaVerdict {
    let velocity = disc.velocity_at_zero();
    let thresholds = model.thresholds(n0);
    let mut pass = [false; 4];
    let mut observed = [0.0f64; 4];
    for k in 0..4 {
        observed[k] = velocity[k].to_float().abs();
        pass[k] = velocity[k].cmp_abs_to_ratio(&thresholds[k]) == std::cmp::Ordering::Less;
    }
    let overall = pass.iter().all(|&b| b);
    LemmaVerdict { n0, observed, thresholds, pass, overall }
}

fn check_hypotheses(
    disc: &HorizontalDisc,
    n0: u32,
    set: &ShellSet,
    model: ObstacleModel,
) -> crate::Result<()> {
    if !matches!(disc.model(), ModelTag::DOfStandard) {
        return Err(Error::Precondition(
            "the estimates require a disc tangent to the standard Engel structure".into(),
        ));
    }
    let expected = model.shell_set();
    if set != &expected {
        return Err(Error::Precondition(format!(
            "obstacle family mismatch: expected {expected:?}, got {set:?}"
        )));
    }
    if !disc_avoids(set, disc, 1.0)?.is_certified() {
        return Err(Error::Precondition(
            "the disc is not certified to avoid the obstacle family".into(),
        ));
    }
    let p = disc.basepoint();
    for (i, c) in p.iter().enumerate() {
        if c.cmp_abs_to_dyadic(i64::from(n0)) != std::cmp::Ordering::Less {
            return Err(Error::Precondition(format!(
                "basepoint coordinate #{i} is not inside the 2^{n0} polydisc"
            )));
        }
    }
    Ok(())
}

/// Verdict for a certified `B`-avoiding disc with basepoint scale `n0`.
pub fn lemma_b_verdict(
    disc: &HorizontalDisc,
    n0: u32,
    set: &ShellSet,
) -> crate::Result<LemmaVerdict> {
    check_hypotheses(disc, n0, set, ObstacleModel::BComplement)?;
    Ok(verdict_for(disc, n0, ObstacleModel::BComplement))
}

/// Verdict for a certified `A`-avoiding disc with basepoint scale `n0`.
pub fn lemma_a_verdict(
    disc: &HorizontalDisc,
    n0: u32,
    set: &ShellSet,
) -> crate::Result<LemmaVerdict> {
    check_hypotheses(disc, n0, set, ObstacleModel::AComplement)?;
    Ok(verdict_for(disc, n0, ObstacleModel::AComplement))
}

/// A certified lower bound for the directed Finsler pseudo-metric.
///
/// The squared value is exact; `value` is its float square root and
/// [`FinslerLower::exact_value`] recovers the exact value whenever the
/// square root is rational.
#[derive(Clone, Debug)]
pub struct FinslerLower {
    pub point: Vec<GaussianRational>,
    pub direction: Vec<GaussianRational>,
    pub n0: u32,
    pub value_sq: BigRational,
    pub value: f64,
}

impl FinslerLower {
    pub fn exact_value(&self) -> Option<BigRational> {
        exact_sqrt(&self.value_sq)
    }
}

impl Serialize for FinslerLower {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("FinslerLower", 6)?;
        let pt: Vec<String> = self.point.iter().map(|c| c.to_string()).collect();
        let dir: Vec<String> = self.direction.iter().map(|c| c.to_string()).collect();
        st.serialize_field("point", &pt)?;
        st.serialize_field("direction", &dir)?;
        st.serialize_field("n0", &self.n0)?;
        st.serialize_field("value_sq", &self.value_sq.to_string())?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field("value_exact", &self.exact_value().map(|v| v.to_string()))?;
        st.end()
    }
}

/// Lower bound at an explicit basepoint scale (monotone: larger `n0`
/// weakens the bound).
pub fn finsler_lower_bound_with_n0(
    p: &[GaussianRational],
    v: &[GaussianRational],
    n0: u32,
    model: ObstacleModel,
) -> crate::Result<FinslerLower> {
    velocity_in_standard_d(p, v)?;
    let thresholds = model.thresholds(n0);
    let mut value_sq = BigRational::zero();
    for (c, t) in v.iter().zip(&thresholds) {
        let ratio = c.abs2() / (t * t);
        if ratio > value_sq {
            value_sq = ratio;
        }
    }
    let value = ratio_to_f64(&value_sq).sqrt();
    Ok(FinslerLower {
        point: p.to_vec(),
        direction: v.to_vec(),
        n0,
        value_sq,
        value,
    })
}

/// The directed Finsler lower bound at `p` in direction `v ∈ D_p`:
/// every admissible disc through `p` with `f'(0) = λv` has its velocity
/// capped coordinatewise, so `1/|λ| ≥ max_c |v_c| / T_c`.
///
/// Uses the minimal `N₀ ≥ 1` with `p ∈ 2^(N₀) D⁴` (the sharpest scale the
/// estimates admit).
pub fn finsler_lower_bound(
    p: &[GaussianRational],
    v: &[GaussianRational],
    model: ObstacleModel,
) -> crate::Result<FinslerLower> {
    finsler_lower_bound_with_n0(p, v, minimal_n0(p), model)
}

// --- admissible-disc samplers ------------------------------------------------

/// How a sampled disc earns its avoidance certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleRegime {
    /// Block modulus certifiably below the first shell radius.
    SubShell,
    /// Block modulus crosses shells, but the capped coordinate certifiably
    /// exceeds every crossed cap.
    ShellCrossing,
}

/// One sampled admissible disc with its scale and regime.
#[derive(Clone, Debug)]
pub struct SampledDisc {
    pub disc: HorizontalDisc,
    pub n0: u32,
    pub regime: SampleRegime,
    /// A sufficient injectivity witness: some coordinate is affine with
    /// nonzero slope.
    pub injective: bool,
}

fn scale_to_sup(u: &UniPoly, target: &BigRational) -> UniPoly {
    let sup = u.sup_bound_exact(&BigRational::from_integer(1.into()));
    if sup.is_zero() || &sup <= target {
        return u.clone();
    }
    let factor = GaussianRational::from_real(target / &sup);
    u.scale(&factor)
}

fn is_injective_witness(disc: &HorizontalDisc) -> bool {
    disc.curve()
        .components()
        .iter()
        .any(|u| u.degree() == 1 && !u.coeff(1).is_zero())
}

/// Draw one admissible disc for the given obstacle model.
///
/// Two regimes are mixed 70/30: sub-shell discs whose block coordinates
/// certifiably stay below the first shell radius, and shell-crossing discs
/// whose capped coordinate certifiably exceeds the caps of every shell the
/// block can reach. Both certificates are exact, so `disc_avoids` settles
/// them without grid work.
pub fn sample_admissible_disc(model: ObstacleModel, rng: &mut sample::Prng) -> SampledDisc {
    use rand::Rng;
    let crossing = rng.random_range(0..10) >= 7;
    let quarter = BigRational::new(1.into(), 4.into());
    match (model, crossing) {
        (ObstacleModel::BComplement, false) => {
            // sup max(|w|, |x|) < 1; y0, z0 free
            let w = scale_to_sup(&sample::unipoly(rng, 4, 6), &quarter);
            let x = scale_to_sup(&sample::unipoly(rng, 4, 6), &quarter);
            let y0 = sample::gaussian(rng, 12);
            let z0 = sample::gaussian(rng, 12);
            let disc = integrate_horizontal_d(w, x, y0, z0);
            let n0 = minimal_n0(disc.basepoint());
            SampledDisc { injective: is_injective_witness(&disc), n0, regime: SampleRegime::SubShell, disc }
        }
        (ObstacleModel::BComplement, true) => {
            // block reaches a few shells; |z| certifiably exceeds their caps
            let w = scale_to_sup(&sample::unipoly(rng, 3, 6), &BigRational::from_integer(6.into()));
            let x = scale_to_sup(&sample::unipoly(rng, 3, 6), &BigRational::from_integer(6.into()));
            let one = BigRational::from_integer(1.into());
            let block_sup = w.sup_bound_exact(&one).max(x.sup_bound_exact(&one));
            let mut i_max = 1i64;
            while dyadic_pow2(i_max) <= block_sup {
                i_max += 1;
            }
            let cap = dyadic_pow2(3 * i_max + 1); // e_{i_max}
            let drift = (&w * &x.derivative()).antiderivative().sup_bound_exact(&one);
            let margin = BigRational::from_integer((1 + rng.random_range(0..8i64)).into());
            let z0_mod = &cap + &drift + margin;
            let z0 = GaussianRational::unit_circle(&sample::rational(rng, 9)).scale(&z0_mod);
            let y0 = sample::gaussian(rng, 12);
            let disc = integrate_horizontal_d(w, x, y0, z0);
            let n0 = minimal_n0(disc.basepoint());
            SampledDisc { injective: is_injective_witness(&disc), n0, regime: SampleRegime::ShellCrossing, disc }
        }
        (ObstacleModel::AComplement, false) => {
            // sup max(|w|, |x|, |z|) < 1 needs z's integral kept small too
            let w = scale_to_sup(&sample::unipoly(rng, 4, 6), &quarter);
            let x = scale_to_sup(&sample::unipoly(rng, 4, 6), &quarter);
            let y0 = sample::gaussian(rng, 12);
            let z0 = sample::gaussian(rng, 2).scale(&BigRational::new(1.into(), 8.into()));
            let disc = integrate_horizontal_d(w, x, y0, z0);
            let n0 = minimal_n0(disc.basepoint());
            SampledDisc { injective: is_injective_witness(&disc), n0, regime: SampleRegime::SubShell, disc }
        }
        (ObstacleModel::AComplement, true) => {
            // block (w,x,z) reaches shells; |y| exceeds the crossed caps
            let w = scale_to_sup(&sample::unipoly(rng, 3, 6), &BigRational::from_integer(4.into()));
            let x = scale_to_sup(&sample::unipoly(rng, 3, 6), &BigRational::from_integer(4.into()));
            let one = BigRational::from_integer(1.into());
            let z0 = sample::gaussian(rng, 3);
            let z_drift = (&w * &x.derivative()).antiderivative().sup_bound_exact(&one);
            let z_sup = z0.abs_upper_bound() + z_drift;
            let block_sup = w
                .sup_bound_exact(&one)
                .max(x.sup_bound_exact(&one))
                .max(z_sup);
            let mut i_max = 1i64;
            while dyadic_pow2(i_max) <= block_sup {
                i_max += 1;
            }
            let cap = dyadic_pow2(3 * i_max + 1); // c_{i_max}
            // y = y0 + ∫ z x': bound the drift through the integrated z
            let z_preview = integrate_horizontal_d(w.clone(), x.clone(), GaussianRational::zero(), z0.clone());
            let z_poly = z_preview.curve().component(3).clone();
            let y_drift = (&z_poly * &x.derivative()).antiderivative().sup_bound_exact(&one);
            let margin = BigRational::from_integer((1 + rng.random_range(0..8i64)).into());
            let y0_mod = &cap + &y_drift + margin;
            let y0 = GaussianRational::unit_circle(&sample::rational(rng, 9)).scale(&y0_mod);
            let disc = integrate_horizontal_d(w, x, y0, z0);
            let n0 = minimal_n0(disc.basepoint());
            SampledDisc { injective: is_injective_witness(&disc), n0, regime: SampleRegime::ShellCrossing, disc }
        }
    }
}

/// Summary of a sampled verdict suite.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaSuiteReport {
    pub model: ObstacleModel,
    pub samples: usize,
    pub seed: u64,
    pub injective_samples: usize,
    pub sub_shell_samples: usize,
    pub crossing_samples: usize,
    /// Indices of samples whose verdict failed (must stay empty).
    pub failures: Vec<usize>,
    pub verdicts: Vec<LemmaVerdict>,
}

impl LemmaSuiteReport {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Run `samples` seeded verdicts for the given model; a failed verdict is
/// a counterexample to the estimates and is recorded, never masked.
pub fn run_lemma_suite(
    model: ObstacleModel,
    samples: usize,
    seed: u64,
) -> crate::Result<LemmaSuiteReport> {
    let set = model.shell_set();
    let stream = match model {
        ObstacleModel::AComplement => 0xA,
        ObstacleModel::BComplement => 0xB,
    };
    let mut report = LemmaSuiteReport {
        model,
        samples,
        seed,
        injective_samples: 0,
        sub_shell_samples: 0,
        crossing_samples: 0,
        failures: Vec::new(),
        verdicts: Vec::with_capacity(samples),
    };
    for idx in 0..samples {
        // per-sample streams keep samples reproducible independently
        let mut rng = sample::rng_for(seed, stream + ((idx as u64) << 8));
        let sampled = sample_admissible_disc(model, &mut rng);
        if sampled.injective {
            report.injective_samples += 1;
        }
        match sampled.regime {
            SampleRegime::SubShell => report.sub_shell_samples += 1,
            SampleRegime::ShellCrossing => report.crossing_samples += 1,
        }
        let verdict = match model {
            ObstacleModel::AComplement => lemma_a_verdict(&sampled.disc, sampled.n0, &set)?,
            ObstacleModel::BComplement => lemma_b_verdict(&sampled.disc, sampled.n0, &set)?,
        };
        if !verdict.overall {
            report.failures.push(idx);
        }
        report.verdicts.push(verdict);
    }
    Ok(report)
}
