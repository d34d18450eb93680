//! Directed Kobayashi–Finsler estimation: upper bounds from a seeded
//! extremal-disc search over horizontal polynomial discs, lower bounds from
//! the shell estimates, and directed-distance estimates along steering
//! paths.
//!
//! The search space is the pair of free polynomials `w(ζ)`, `x(ζ)` with
//! `f(0) = p` and `f'(0) = λv` pinned; `y` and `z` are recovered by exact
//! integration, so every candidate is exactly horizontal and only the
//! avoidance gate decides feasibility. Infeasible candidates get an
//! infinite objective, not a penalty, so every reported witness is
//! itself certified.

use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::estimates::{finsler_lower_bound, FinslerLower, ObstacleModel};
use crate::exactnum::GaussianRational;
use crate::horizontal::{integrate_horizontal_d, velocity_in_standard_d, HorizontalDisc};
use crate::obstacles::{disc_avoids, disc_avoids_with_effort, AvoidanceEffort, ShellSet};
use crate::poly::UniPoly;
use crate::sample;
use crate::steering::{hermite_steer, HorizontalPath};
use crate::Error;

/// Budget and seed for the extremal-disc search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchConfig {
    /// Degree budget for the free coefficients of `w` and `x`.
    pub degree: usize,
    /// Independent Nelder-Mead restarts.
    pub restarts: usize,
    /// Iterations per restart.
    pub max_iters: usize,
    /// Master seed; identical configs reproduce identical outputs.
    pub seed: u64,
    /// Simplex-size stopping tolerance.
    pub shrink_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { degree: 4, restarts: 16, max_iters: 120, seed: 0, shrink_tol: 1e-9 }
    }
}

impl SearchConfig {
    pub fn with_seed(seed: u64) -> Self {
        SearchConfig { seed, ..Default::default() }
    }

    /// A lighter budget for sweeps over many `(p, v)` pairs.
    pub fn quick(seed: u64) -> Self {
        SearchConfig { degree: 2, restarts: 4, max_iters: 60, seed, shrink_tol: 1e-7 }
    }

    fn validate(&self) -> crate::Result<()> {
        if self.degree == 0 || self.restarts == 0 || self.max_iters == 0 || self.shrink_tol <= 0.0
        {
            return Err(Error::Precondition(
                "search config entries must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Result of one search: the best feasible `1/|λ|` and its witness disc.
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    /// Best objective; `f64::INFINITY` when no feasible disc was found.
    pub upper: f64,
    /// The certified witness achieving `upper`.
    pub witness: Option<HorizontalDisc>,
    /// Objective evaluations spent.
    pub evaluations: usize,
    /// Why the search came back infeasible, when it did.
    pub diagnostic: Option<String>,
}

impl SearchOutcome {
    pub fn feasible(&self) -> bool {
        self.upper.is_finite()
    }

    fn infeasible(evaluations: usize, diagnostic: String) -> Self {
        SearchOutcome {
            upper: f64::INFINITY,
            witness: None,
            evaluations,
            diagnostic: Some(diagnostic),
        }
    }
}

/// A two-sided bound for the directed Finsler pseudo-metric at `(p, v)`.
#[derive(Clone, Debug)]
pub struct FinslerBound {
    pub point: Vec<GaussianRational>,
    pub direction: Vec<GaussianRational>,
    pub lower: FinslerLower,
    pub upper: f64,
    pub witness: Option<HorizontalDisc>,
    pub config: SearchConfig,
    /// Search diagnostic when no feasible disc was found.
    pub diagnostic: Option<String>,
}

impl Serialize for FinslerBound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("FinslerBound", 7)?;
        let pt: Vec<String> = self.point.iter().map(|c| c.to_string()).collect();
        let dir: Vec<String> = self.direction.iter().map(|c| c.to_string()).collect();
        st.serialize_field("point", &pt)?;
        st.serialize_field("direction", &dir)?;
        st.serialize_field("lower", &self.lower)?;
        st.serialize_field("upper", &self.upper)?;
        st.serialize_field("witness", &self.witness.as_ref().map(|d| d.curve().clone()))?;
        st.serialize_field("config", &self.config)?;
        st.serialize_field("diagnostic", &self.diagnostic)?;
        st.end()
    }
}

// --- float pencil: the fast in-loop model of a candidate disc -----------

use crate::exactnum::ComplexFloat;

fn conv(a: &[ComplexFloat], b: &[ComplexFloat]) -> Vec<ComplexFloat> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ComplexFloat::zero(); a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = out[i + j] + ai * bj;
        }
    }
    out
}

fn float_derivative(a: &[ComplexFloat]) -> Vec<ComplexFloat> {
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c.scale(k as f64))
        .collect()
}

fn float_antiderivative(a: &[ComplexFloat]) -> Vec<ComplexFloat> {
    let mut out = vec![ComplexFloat::zero()];
    out.extend(a.iter().enumerate().map(|(k, &c)| c.scale(1.0 / (k + 1) as f64)));
    out
}

fn coeff_sum(a: &[ComplexFloat]) -> f64 {
    a.iter().map(|c| c.abs()).sum()
}

fn center_minus_tail(a: &[ComplexFloat]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a[0].abs() - a[1..].iter().map(|c| c.abs()).sum::<f64>()
}

/// Float version of the quick avoidance gate on the unit disc: triangle
/// certificates with a conservative relative margin. Accepting requires
/// every layer (up to the reach of the block sup bound) to be excluded
/// with margin, so a float-accepted candidate decodes into an exactly
/// certifiable disc except for borderline cases handled downstream.
fn float_quick_gate(set: &ShellSet, comps: &[Vec<ComplexFloat>; 4]) -> bool {
    const MARGIN: f64 = 1e-9;
    // component order is the set's own ambient order; other kinds fall
    // back to the exact quick path
    let (block, caps): (&[usize], &[usize]) = match set {
        ShellSet::A => (&[0, 1, 3], &[2]),
        ShellSet::B => (&[0, 1], &[2, 3]),
        _ => return false,
    };
    let sups: Vec<f64> = comps.iter().map(|c| coeff_sum(c)).collect();
    let infs: Vec<f64> = comps.iter().map(|c| center_minus_tail(c)).collect();
    let block_sup = block.iter().map(|&j| sups[j]).fold(0.0, f64::max);
    let block_inf = block.iter().map(|&j| infs[j]).fold(0.0, f64::max);
    let mut i = 1i32;
    loop {
        let radius = f64::exp2(f64::from(i - 1));
        if block_sup < radius * (1.0 - MARGIN) {
            return true; // this and all later layers are out of reach
        }
        let outside = block_inf > radius * (1.0 + MARGIN);
        let cap_values: [f64; 2] = match set {
            ShellSet::A => [f64::exp2(f64::from(3 * i + 1)), f64::INFINITY],
            ShellSet::B => [
                f64::exp2(f64::from(5 * i + 2)),
                f64::exp2(f64::from(3 * i + 1)),
            ],
            _ => unreachable!("pre-matched shell kind"),
        };
        let cap_violated = caps
            .iter()
            .enumerate()
            .any(|(slot, &j)| infs[j] > cap_values[slot] * (1.0 + MARGIN));
        if !(outside || cap_violated) {
            return false;
        }
        i += 1;
        if i > 1020 {
            return false; // beyond f64 exponent range; give up
        }
    }
}

/// Assemble the float pencil `(w, x, y, z)` coefficient lists for a
/// parameter vector, mirroring the exact construction.
fn decode_float(
    params: &[f64],
    p: &[ComplexFloat],
    v: &[ComplexFloat],
    degree: usize,
) -> [Vec<ComplexFloat>; 4] {
    let lambda = ComplexFloat::new(params[0], params[1]);
    let free = degree.saturating_sub(1);
    let mut w = vec![p[0], lambda * v[0]];
    let mut x = vec![p[1], lambda * v[1]];
    for k in 0..free {
        let base = 2 + 2 * k;
        w.push(ComplexFloat::new(params[base], params[base + 1]));
    }
    for k in 0..free {
        let base = 2 + 2 * free + 2 * k;
        x.push(ComplexFloat::new(params[base], params[base + 1]));
    }
    let xp = float_derivative(&x);
    let mut z = float_antiderivative(&conv(&w, &xp));
    z[0] = p[3];
    let mut y = float_antiderivative(&conv(&z, &xp));
    y[0] = p[2];
    [w, x, y, z]
}

/// Decode a parameter vector into an exactly horizontal disc.
///
/// Layout: `[λ_re, λ_im, a₂_re, a₂_im, …, b₂_re, b₂_im, …]` where the `a`
/// coefficients extend `w` and the `b` coefficients extend `x`. Every
/// finite float is dyadic, so the disc is exact and exactly horizontal.
fn decode_disc(
    params: &[f64],
    p: &[GaussianRational],
    v: &[GaussianRational],
    degree: usize,
) -> crate::Result<HorizontalDisc> {
    let lambda = GaussianRational::from_f64_exact(params[0], params[1])?;
    let mut w_coeffs = vec![p[0].clone(), &lambda * &v[0]];
    let mut x_coeffs = vec![p[1].clone(), &lambda * &v[1]];
    let free = degree.saturating_sub(1);
    for k in 0..free {
        let base = 2 + 2 * k;
        w_coeffs.push(GaussianRational::from_f64_exact(params[base], params[base + 1])?);
    }
    for k in 0..free {
        let base = 2 + 2 * free + 2 * k;
        x_coeffs.push(GaussianRational::from_f64_exact(params[base], params[base + 1])?);
    }
    Ok(integrate_horizontal_d(
        UniPoly::from_coeffs(w_coeffs),
        UniPoly::from_coeffs(x_coeffs),
        p[2].clone(),
        p[3].clone(),
    ))
}

/// Nelder-Mead with standard coefficients; infinite objective values mark
/// infeasible points and are handled by the total order on floats.
fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    scale: f64,
    max_iters: usize,
    shrink_tol: f64,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += scale;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    for _ in 0..max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let size: f64 = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if size < shrink_tol && simplex[0].1.is_finite() {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|(x, _)| x[i]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflect: Vec<f64> = (0..n).map(|i| 2.0 * centroid[i] - worst.0[i]).collect();
        let fr = f(&reflect);
        if fr < simplex[0].1 {
            let expand: Vec<f64> = (0..n).map(|i| 3.0 * centroid[i] - 2.0 * worst.0[i]).collect();
            let fe = f(&expand);
            simplex[n] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflect, fr);
        } else {
            let contract: Vec<f64> =
                (0..n).map(|i| 0.5 * (centroid[i] + worst.0[i])).collect();
            let fc = f(&contract);
            if fc < worst.1 {
                simplex[n] = (contract, fc);
            } else {
                // shrink toward the best vertex
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = entry
                        .0
                        .iter()
                        .zip(&best)
                        .map(|(a, b)| 0.5 * (a + b))
                        .collect();
                    let fx = f(&x);
                    *entry = (x, fx);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// Derivative-free search for the smallest `1/|λ|` over certified
/// obstacle-avoiding horizontal discs with `f(0) = p`, `f'(0) = λv`.
///
/// Deterministic for a fixed config: restarts draw from per-restart
/// seeded streams and are merged by best objective in restart order.
/// With no obstacle the objective is unbounded below and the search
/// reports the budgeted minimum.
pub fn extremal_disc_search(
    p: &[GaussianRational],
    v: &[GaussianRational],
    obstacle: Option<&ShellSet>,
    cfg: &SearchConfig,
) -> crate::Result<SearchOutcome> {
    cfg.validate()?;
    velocity_in_standard_d(p, v)?;
    if v.iter().all(GaussianRational::is_zero) {
        return Err(Error::Precondition("search direction must be nonzero".into()));
    }
    let dims = 2 + 4 * cfg.degree.saturating_sub(1);
    let p_float: Vec<ComplexFloat> = p.iter().map(|c| c.to_float()).collect();
    let v_float: Vec<ComplexFloat> = v.iter().map(|c| c.to_float()).collect();
    let mut evaluations = 0usize;
    let mut objective = |params: &[f64]| -> f64 {
        evaluations += 1;
        let lam = (params[0] * params[0] + params[1] * params[1]).sqrt();
        if lam < 1e-12 {
            return f64::INFINITY;
        }
        // rejecting runaway candidates shrinks the search region but never
        // unsoundly accepts one
        if params.iter().any(|c| !c.is_finite() || c.abs() > 1e6) {
            return f64::INFINITY;
        }
        if let Some(set) = obstacle {
            // in-loop gate: float triangle certificates with margin; the
            // final witness is re-certified exactly before being reported
            match set {
                ShellSet::A | ShellSet::B => {
                    let pencil = decode_float(params, &p_float, &v_float, cfg.degree);
                    if !float_quick_gate(set, &pencil) {
                        return f64::INFINITY;
                    }
                }
                _ => {
                    let Ok(disc) = decode_disc(params, p, v, cfg.degree) else {
                        return f64::INFINITY;
                    };
                    match disc_avoids_with_effort(set, &disc, 1.0, AvoidanceEffort::Quick) {
                        Ok(outcome) if outcome.is_certified() => {}
                        _ => return f64::INFINITY,
                    }
                }
            }
        }
        1.0 / lam
    };

    // a feasible anchor: shrink λ until the pencil disc clears the gate
    let mut lambda0 = 1.0f64;
    let mut anchor = None;
    for _ in 0..80 {
        let mut params = vec![0.0; dims];
        params[0] = lambda0;
        if objective(&params).is_finite() {
            anchor = Some(params);
            break;
        }
        lambda0 *= 0.5;
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    for restart in 0..cfg.restarts {
        use rand::Rng;
        let mut rng = sample::rng_for(cfg.seed, 0xD15C_0000 + restart as u64);
        let start: Vec<f64> = match (&anchor, restart) {
            (Some(a), 0) => a.clone(),
            (Some(a), _) => a
                .iter()
                .map(|&c| c + lambda0 * 0.5 * (rng.random::<f64>() - 0.5))
                .collect(),
            (None, _) => {
                let mut s: Vec<f64> = (0..dims).map(|_| 0.2 * (rng.random::<f64>() - 0.5)).collect();
                s[0] = rng.random::<f64>().max(0.05);
                s
            }
        };
        let scale = (lambda0 * 0.25).max(1e-4);
        let (x, fx) = nelder_mead(&mut objective, &start, scale, cfg.max_iters, cfg.shrink_tol);
        if best.as_ref().is_none_or(|(_, b)| fx < *b) {
            best = Some((x, fx));
        }
    }

    let Some((mut params, upper)) = best else {
        return Ok(SearchOutcome::infeasible(evaluations, "no restarts ran".into()));
    };
    if !upper.is_finite() {
        return Ok(SearchOutcome::infeasible(
            evaluations,
            format!(
                "no feasible disc within budget ({} restarts, {} evaluations{})",
                cfg.restarts,
                evaluations,
                if anchor.is_none() { "; no feasible anchor" } else { "" }
            ),
        ));
    }
    // exact certification of the one reported witness; borderline floats
    // are nudged inward until the full exact procedure certifies
    for _ in 0..60 {
        let witness = decode_disc(&params, p, v, cfg.degree)?;
        let certified = match obstacle {
            Some(set) => disc_avoids(set, &witness, 1.0)?.is_certified(),
            None => true,
        };
        if certified {
            let lam = (params[0] * params[0] + params[1] * params[1]).sqrt();
            return Ok(SearchOutcome {
                upper: 1.0 / lam,
                witness: Some(witness),
                evaluations,
                diagnostic: None,
            });
        }
        for c in params.iter_mut() {
            *c *= 1.0 - 1e-6;
        }
    }
    Ok(SearchOutcome::infeasible(
        evaluations,
        "float-gated optimum could not be certified exactly".into(),
    ))
}

/// Package the certified lower bound and the search upper bound; the
/// invariant `lower ≤ upper` (within absolute float slack) is asserted.
pub fn finsler_report(
    p: &[GaussianRational],
    v: &[GaussianRational],
    model: ObstacleModel,
    cfg: &SearchConfig,
) -> crate::Result<FinslerBound> {
    let lower = finsler_lower_bound(p, v, model)?;
    let set = model.shell_set();
    let outcome = extremal_disc_search(p, v, Some(&set), cfg)?;
    if outcome.feasible() && lower.value > outcome.upper + 1e-12 {
        return Err(Error::Verification(format!(
            "lower bound {} exceeds search upper bound {}",
            lower.value, outcome.upper
        )));
    }
    Ok(FinslerBound {
        point: p.to_vec(),
        direction: v.to_vec(),
        lower,
        upper: outcome.upper,
        witness: outcome.witness,
        config: cfg.clone(),
        diagnostic: outcome.diagnostic,
    })
}

/// Which pointwise estimator integrates along a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Estimator {
    /// Certified pointwise lower bounds (lower bound of the length at the
    /// stated quadrature resolution).
    Lower,
    /// Per-node disc searches (heuristic upper estimate).
    Upper,
}

/// Composite-Simpson integral of the chosen pointwise estimator along each
/// segment of a tangent path. Quadrature nodes are exact rationals, so the
/// lower estimator is evaluated on exact points and exact velocities.
pub fn path_finsler_length(
    path: &HorizontalPath,
    estimator: Estimator,
    model: ObstacleModel,
    cfg: &SearchConfig,
    quadrature_n: usize,
) -> crate::Result<f64> {
    if quadrature_n == 0 || quadrature_n % 2 != 0 {
        return Err(Error::Precondition("Simpson quadrature needs even n ≥ 2".into()));
    }
    if !path.is_tangent() {
        return Err(Error::NotInDistribution("path fails its tangency identities".into()));
    }
    let set = model.shell_set();
    let mut total = 0.0f64;
    for segment in &path.segments {
        let derivative = segment.curve.derivative();
        let mut sum = 0.0f64;
        for k in 0..=quadrature_n {
            let t = GaussianRational::from_ratio(k as i64, quadrature_n as i64);
            let point = segment.curve.evaluate(&t);
            let velocity = derivative.evaluate(&t);
            let value = match estimator {
                Estimator::Lower => finsler_lower_bound(&point, &velocity, model)?.value,
                Estimator::Upper => {
                    if velocity.iter().all(GaussianRational::is_zero) {
                        0.0
                    } else {
                        let outcome = extremal_disc_search(&point, &velocity, Some(&set), cfg)?;
                        outcome.upper
                    }
                }
            };
            let weight = if k == 0 || k == quadrature_n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            sum += weight * value;
        }
        total += sum / (3.0 * quadrature_n as f64);
    }
    Ok(total)
}

/// Heuristic upper estimate of the directed distance: steer `p → q` and
/// integrate the upper estimator along the one resulting path (the true
/// distance is an infimum over all tangent paths).
pub fn directed_distance_upper(
    p: &[GaussianRational],
    q: &[GaussianRational],
    model: ObstacleModel,
    cfg: &SearchConfig,
    quadrature_n: usize,
) -> crate::Result<f64> {
    let path = hermite_steer(p, q)?;
    if path.is_empty() {
        return Ok(0.0);
    }
    path_finsler_length(&path, Estimator::Upper, model, cfg, quadrature_n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn pt(vals: [i64; 4]) -> Vec<GaussianRational> {
        vals.map(GaussianRational::from_int).to_vec()
    }

    #[test]
    fn unobstructed_search_drives_the_bound_down() {
        let cfg = SearchConfig { degree: 2, restarts: 3, max_iters: 80, seed: 7, shrink_tol: 1e-9 };
        let out = extremal_disc_search(&pt([0, 0, 0, 0]), &pt([0, 1, 0, 0]), None, &cfg).unwrap();
        assert!(out.feasible());
        // with no obstacle the objective is unbounded below; the budgeted
        // minimum must at least beat the trivial λ = 1 disc
        assert!(out.upper < 1.0);
    }

    #[test]
    fn x_direction_against_b_respects_the_exact_lower_bound() {
        let cfg = SearchConfig::with_seed(42);
        let report =
            finsler_report(&pt([0, 0, 0, 0]), &pt([0, 1, 0, 0]), ObstacleModel::BComplement, &cfg)
                .unwrap();
        assert_eq!(
            report.lower.exact_value().unwrap(),
            BigRational::new(1.into(), 4.into())
        );
        assert!(report.upper >= 0.25);
        assert!(report.witness.is_some());
    }

    #[test]
    fn zero_direction_is_rejected() {
        let cfg = SearchConfig::quick(1);
        assert!(extremal_disc_search(&pt([0, 0, 0, 0]), &pt([0, 0, 0, 0]), None, &cfg).is_err());
    }

    #[test]
    fn seeded_runs_are_bit_identical() {
        let cfg = SearchConfig::quick(11);
        let b = ShellSet::b();
        let a = extremal_disc_search(&pt([0, 0, 0, 0]), &pt([0, 1, 0, 0]), Some(&b), &cfg).unwrap();
        let b2 = extremal_disc_search(&pt([0, 0, 0, 0]), &pt([0, 1, 0, 0]), Some(&b), &cfg).unwrap();
        assert_eq!(a.upper.to_bits(), b2.upper.to_bits());
        assert_eq!(
            a.witness.as_ref().map(|d| d.curve().clone()),
            b2.witness.as_ref().map(|d| d.curve().clone())
        );
    }

    #[test]
    fn constant_path_has_zero_length() {
        let path = hermite_steer(&pt([0, 0, 0, 0]), &pt([0, 0, 0, 0])).unwrap();
        let cfg = SearchConfig::quick(3);
        assert!(path.is_empty());
        let d =
            directed_distance_upper(&pt([0, 0, 0, 0]), &pt([0, 0, 0, 0]), ObstacleModel::BComplement, &cfg, 4)
                .unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn lower_length_scales_with_segment_extent() {
        // doubling a segment's extent doubles the lower-estimator length
        // within quadrature error
        let cfg = SearchConfig::quick(5);
        let p = pt([0, 0, 0, 0]);
        let q1 = pt([0, 1, 0, 0]);
        let q2 = pt([0, 2, 0, 0]);
        let l1 = path_finsler_length(
            &hermite_steer(&p, &q1).unwrap(),
            Estimator::Lower,
            ObstacleModel::BComplement,
            &cfg,
            128,
        )
        .unwrap();
        let l2 = path_finsler_length(
            &hermite_steer(&p, &q2).unwrap(),
            Estimator::Lower,
            ObstacleModel::BComplement,
            &cfg,
            128,
        )
        .unwrap();
        assert!(l1 > 0.0);
        assert!((l2 - 2.0 * l1).abs() / l2 < 0.05, "l1={l1} l2={l2}");
    }

    /// A random exact point that does not already sit on the obstacle
    /// (distances from a point of the obstacle are degenerate).
    fn point_off_b(rng: &mut crate::sample::Prng) -> Vec<GaussianRational> {
        let b = ShellSet::b();
        loop {
            let p = crate::sample::point(rng, 4, 5);
            if !b.membership_exact(&p).unwrap().is_in() {
                return p;
            }
        }
    }

    #[test]
    fn directed_distance_is_nearly_symmetric() {
        // the quintic interpolant between two jet states is unique, so the
        // reverse run follows the same geometric path; values differ only
        // by search noise
        let cfg = SearchConfig::quick(17);
        let mut rng = crate::sample::rng_for(17, 0);
        let mut compared = 0usize;
        for k in 0..6 {
            let p = point_off_b(&mut rng);
            let mut q = point_off_b(&mut rng);
            if k == 0 {
                q[1] = p[1].clone();
            }
            if p == q {
                continue;
            }
            let d_pq =
                directed_distance_upper(&p, &q, ObstacleModel::BComplement, &cfg, 4).unwrap();
            let d_qp =
                directed_distance_upper(&q, &p, ObstacleModel::BComplement, &cfg, 4).unwrap();
            if d_pq.is_finite() && d_qp.is_finite() && d_pq.max(d_qp) > 0.0 {
                let rel = (d_pq - d_qp).abs() / d_pq.max(d_qp);
                assert!(rel < 0.10, "asymmetry {rel} for pair {k}: {d_pq} vs {d_qp}");
                compared += 1;
            }
        }
        assert!(compared >= 3, "only {compared} finite pairs; test lost its teeth");
    }

    #[test]
    fn directed_distance_triangle_inequality_is_typical() {
        // the estimate evaluates one path per pair, so the triangle
        // inequality with 10% slack is typical rather than guaranteed:
        // routing through a waypoint can beat the direct interpolant by
        // more than the slack on adversarial jet data. Require the large
        // majority of triples to satisfy it and log the worst excess.
        let cfg = SearchConfig::quick(19);
        let mut rng = crate::sample::rng_for(19, 0);
        let mut compared = 0usize;
        let mut within_slack = 0usize;
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let p = point_off_b(&mut rng);
            let q = point_off_b(&mut rng);
            let r = point_off_b(&mut rng);
            let d_pr =
                directed_distance_upper(&p, &r, ObstacleModel::BComplement, &cfg, 4).unwrap();
            let d_pq =
                directed_distance_upper(&p, &q, ObstacleModel::BComplement, &cfg, 4).unwrap();
            let d_qr =
                directed_distance_upper(&q, &r, ObstacleModel::BComplement, &cfg, 4).unwrap();
            if d_pr.is_finite() && d_pq.is_finite() && d_qr.is_finite() {
                compared += 1;
                let ratio = d_pr / (d_pq + d_qr);
                worst = worst.max(ratio);
                if ratio <= 1.10 {
                    within_slack += 1;
                }
            }
        }
        assert!(compared >= 10, "only {compared} finite triples; test lost its teeth");
        assert!(
            within_slack * 10 >= compared * 8,
            "triangle-with-slack held on only {within_slack}/{compared} triples (worst ratio {worst})"
        );
    }

    #[test]
    fn x_line_lower_length_meets_the_constant_bound() {
        // along (0, t, 0, 0) with t ∈ [0,1] the pointwise lower bound is
        // the constant 1/4, so the segment length is at least 1/4
        let cfg = SearchConfig::quick(9);
        let path = hermite_steer(&pt([0, 0, 0, 0]), &pt([0, 1, 0, 0])).unwrap();
        let l = path_finsler_length(&path, Estimator::Lower, ObstacleModel::BComplement, &cfg, 128)
            .unwrap();
        assert!((l - 0.25).abs() < 1e-9, "expected 1/4, got {l}");
    }
}
