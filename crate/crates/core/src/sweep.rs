//! Grid search over the channel-assignment proportions `(a, b)`.
//!
//! The outer design problem maximizes an exponent over the product of two
//! proportion simplices. The objective is piecewise-smooth with no known
//! concavity, so everything here is plain lattice evaluation: deterministic
//! tables, lexicographic order, corner detection by proximity to the
//! deterministic assignments `(e_j, e_k)`. Lattice points are independent
//! and evaluated concurrently; assembly preserves the lattice order.

use rayon::prelude::*;

use crate::engine::binary::{self, Alpha0, ChernoffStar};
use crate::engine::mary::{f_infinity_j, rejection_exponent};
use crate::engine::{BinaryInstance, ExponentResult, MaryInstance};
use crate::error::{Error, Result};
use crate::prob::{Channel, Proportions};
use crate::solver::SolverConfig;

/// Hard cap on the number of `(a, b)` pairs a sweep may evaluate.
const MAX_PAIRS: usize = 250_000;

/// Simplex lattice with spacing `resolution` on `dimension` coordinates.
#[derive(Debug, Clone)]
pub struct SweepGrid {
    resolution: f64,
    dimension: usize,
    steps: usize,
}

impl SweepGrid {
    /// Cost guard: fine resolutions are only admitted for up to three
    /// channels, and the implied pair count must stay enumerable.
    pub fn new(resolution: f64, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter {
                name: "dimension".into(),
                reason: "need at least one channel".into(),
            });
        }
        if !(resolution > 0.0 && resolution <= 0.5) {
            return Err(Error::InvalidParameter {
                name: "resolution".into(),
                reason: format!("{resolution} outside (0, 0.5]"),
            });
        }
        if dimension > 3 && resolution <= 0.05 {
            return Err(Error::Guard(format!(
                "resolution {resolution} with {dimension} channels exceeds the sweep budget"
            )));
        }
        let steps = (1.0 / resolution).round() as usize;
        let grid = Self { resolution, dimension, steps };
        let points = grid.points().len();
        if points.saturating_mul(points) > MAX_PAIRS {
            return Err(Error::Guard(format!(
                "{points}^2 lattice pairs exceed the sweep budget of {MAX_PAIRS}"
            )));
        }
        Ok(grid)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Lattice points in lexicographic order of their integer count vectors.
    /// Every point is a valid proportion vector; the corners `e_k` are the
    /// points whose count vector concentrates on one coordinate.
    pub fn points(&self) -> Vec<Proportions> {
        let mut out = Vec::new();
        let mut counts = vec![0usize; self.dimension];
        compositions(self.steps, 0, &mut counts, &mut |c| {
            let w: Vec<f64> = c.iter().map(|&x| x as f64 / self.steps as f64).collect();
            out.push(Proportions::new(w).expect("lattice point sums to one"));
        });
        out
    }
}

fn compositions(rest: usize, at: usize, counts: &mut [usize], emit: &mut impl FnMut(&[usize])) {
    if at + 1 == counts.len() {
        counts[at] = rest;
        emit(counts);
        return;
    }
    for c in 0..=rest {
        counts[at] = c;
        compositions(rest - c, at + 1, counts, emit);
    }
}

/// Which exponent a proportion sweep evaluates at each lattice pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepObjective {
    FAlpha,
    /// `f_alpha` under the identity-cover processing assumption.
    FAlphaVi,
    FInfinity,
    /// Worst-hypothesis rejection exponent of the two-hypothesis test with
    /// a reject option.
    Rejection,
}

/// One evaluated lattice pair.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub a: Proportions,
    pub b: Proportions,
    pub value: f64,
    pub feasible: bool,
    pub converged: bool,
}

/// Full sweep table plus the located maximum.
#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Lexicographic in the `(a, b)` lattice coordinates.
    pub entries: Vec<SweepEntry>,
    /// Index of the maximizing entry among feasible converged points; ties
    /// resolve to the lexicographically first. `None` when no point is
    /// usable.
    pub best: Option<usize>,
    /// The argmax lies within one lattice step of some `(e_j, e_k)`.
    pub is_corner: bool,
    /// Corner indices `(j, k)` witnessing `is_corner`.
    pub corner_witness: Option<(usize, usize)>,
}

impl SweepResult {
    pub fn best_entry(&self) -> Option<&SweepEntry> {
        self.best.map(|i| &self.entries[i])
    }

    fn locate(entries: Vec<SweepEntry>, resolution: f64) -> Self {
        // Flat objectives (the infinite-ratio exponent ignores `b`) create
        // exact ties; among tied maxima prefer the most structured point so
        // a corner optimum is reported as one: diagonal corner pairs, then
        // corner pairs, then lattice order.
        let rank = |e: &SweepEntry| match corner_of(&e.a, &e.b, resolution) {
            (true, Some((j, k))) if j == k => 0,
            (true, _) => 1,
            _ => 2,
        };
        let mut best: Option<usize> = None;
        for (i, e) in entries.iter().enumerate() {
            if !(e.feasible && e.converged && e.value.is_finite()) {
                continue;
            }
            best = match best {
                None => Some(i),
                Some(b) if e.value > entries[b].value + 1e-12 => Some(i),
                Some(b)
                    if (e.value - entries[b].value).abs() <= 1e-12
                        && rank(e) < rank(&entries[b]) =>
                {
                    Some(i)
                }
                keep => keep,
            };
        }
        let (is_corner, corner_witness) = match best {
            Some(i) => corner_of(&entries[i].a, &entries[i].b, resolution),
            None => (false, None),
        };
        Self { entries, best, is_corner, corner_witness }
    }
}

/// A lattice point counts as a corner hit when every coordinate is within
/// one lattice step of the target unit vector. Figure-level corner claims
/// are judged at lattice resolution, not exactly.
fn near_unit(p: &Proportions, k: usize, resolution: f64) -> bool {
    let tol = resolution + 1e-9;
    p.as_slice()
        .iter()
        .enumerate()
        .all(|(i, &w)| (w - if i == k { 1.0 } else { 0.0 }).abs() <= tol)
}

fn corner_of(a: &Proportions, b: &Proportions, resolution: f64) -> (bool, Option<(usize, usize)>) {
    for j in 0..a.len() {
        if !near_unit(a, j, resolution) {
            continue;
        }
        for k in 0..b.len() {
            if near_unit(b, k, resolution) {
                return (true, Some((j, k)));
            }
        }
    }
    (false, None)
}

fn with_proportions(inst: &BinaryInstance, a: Proportions, b: Proportions) -> BinaryInstance {
    BinaryInstance::new(
        inst.p1.clone(),
        inst.p2.clone(),
        inst.bank.clone(),
        a,
        b,
        inst.alpha,
        inst.lambda,
    )
    .expect("template instance already validated")
}

fn evaluate(inst: &BinaryInstance, objective: SweepObjective, cfg: &SolverConfig) -> SweepEntry {
    let from = |r: ExponentResult| SweepEntry {
        a: inst.a.clone(),
        b: inst.b.clone(),
        value: r.value,
        feasible: r.feasible,
        converged: r.converged,
    };
    let failed = || SweepEntry {
        a: inst.a.clone(),
        b: inst.b.clone(),
        value: f64::NAN,
        feasible: false,
        converged: false,
    };
    match objective {
        SweepObjective::FAlpha => from(binary::f_alpha(inst, cfg)),
        SweepObjective::FAlphaVi => binary::f_alpha_vi(inst, cfg).map(from).unwrap_or_else(|_| failed()),
        SweepObjective::FInfinity => from(binary::f_infinity(inst, cfg)),
        SweepObjective::Rejection => {
            let mary = MaryInstance::new(
                vec![inst.p1.clone(), inst.p2.clone()],
                inst.bank.clone(),
                inst.a.clone(),
                inst.b.clone(),
                inst.alpha,
                inst.lambda,
            )
            .expect("binary instance fields remain valid for m = 2");
            let mut worst: Option<ExponentResult> = None;
            for j in 0..2 {
                match rejection_exponent(&mary, j, cfg) {
                    Ok(r) => {
                        let replace = worst.as_ref().map_or(true, |w| r.value < w.value);
                        let merged_ok = worst.as_ref().map_or(true, |w| w.converged);
                        if replace {
                            let mut r = r;
                            r.converged = r.converged && merged_ok;
                            worst = Some(r);
                        } else if let Some(w) = worst.as_mut() {
                            w.converged = w.converged && r.converged;
                        }
                    }
                    Err(_) => return failed(),
                }
            }
            from(worst.expect("two hypotheses evaluated"))
        }
    }
}

/// Evaluate `objective` at every lattice pair `(a, b)` and locate the
/// maximum. Per-point solver failures are recorded in the table, never
/// fatal; the identity-cover objective rejects banks without a cover up
/// front.
pub fn sweep_ab(
    inst: &BinaryInstance,
    grid: &SweepGrid,
    objective: SweepObjective,
    cfg: &SolverConfig,
) -> Result<SweepResult> {
    if grid.dimension() != inst.bank.len() {
        return Err(Error::DimensionMismatch(format!(
            "grid spans {} channels, instance has {}",
            grid.dimension(),
            inst.bank.len()
        )));
    }
    if objective == SweepObjective::FAlphaVi && !inst.bank.has_deterministic_cover() {
        return Err(Error::InvalidChannel {
            field: "bank".into(),
            reason: "identity-cover objective needs a deterministic cover".into(),
        });
    }
    let points = grid.points();
    let entries: Vec<SweepEntry> = points
        .par_iter()
        .flat_map_iter(|a| points.iter().map(move |b| (a.clone(), b.clone())))
        .map(|(a, b)| evaluate(&with_proportions(inst, a, b), objective, cfg))
        .collect();
    Ok(SweepResult::locate(entries, grid.resolution()))
}

/// One evaluated training ratio.
#[derive(Debug, Clone)]
pub struct AlphaPoint {
    pub alpha: f64,
    pub value: f64,
    /// The ratio sits at or below the zero-region boundary, so the exponent
    /// should vanish.
    pub below_alpha0: bool,
    pub converged: bool,
}

/// Exponent as a function of the training ratio, with its horizontal
/// asymptote and the boundary of the zero region.
#[derive(Debug, Clone)]
pub struct AlphaCurve {
    pub points: Vec<AlphaPoint>,
    pub f_infinity: f64,
    pub f_infinity_converged: bool,
    pub alpha0: Alpha0,
    /// `f_infinity` minus the final point: the remaining loss from training
    /// scarcity at the largest swept ratio.
    pub final_gap: f64,
}

/// Sweep the training ratio over `alphas` (positive, strictly increasing)
/// holding everything else in the template fixed.
pub fn sweep_alpha(
    inst: &BinaryInstance,
    alphas: &[f64],
    cfg: &SolverConfig,
) -> Result<AlphaCurve> {
    if alphas.is_empty() {
        return Err(Error::InvalidParameter {
            name: "alphas".into(),
            reason: "need at least one ratio".into(),
        });
    }
    if alphas.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::InvalidParameter {
            name: "alphas".into(),
            reason: "ratios must be positive and finite".into(),
        });
    }
    if alphas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter {
            name: "alphas".into(),
            reason: "ratios must be strictly increasing".into(),
        });
    }
    let alpha0 = binary::alpha0(inst, cfg);
    let f_inf = binary::f_infinity(inst, cfg);
    let points: Vec<AlphaPoint> = alphas
        .par_iter()
        .map(|&alpha| {
            let at = BinaryInstance::new(
                inst.p1.clone(),
                inst.p2.clone(),
                inst.bank.clone(),
                inst.a.clone(),
                inst.b.clone(),
                alpha,
                inst.lambda,
            )
            .expect("template instance already validated");
            let r = binary::f_alpha(&at, cfg);
            AlphaPoint {
                alpha,
                value: r.value,
                below_alpha0: alpha <= alpha0.value,
                converged: r.converged,
            }
        })
        .collect();
    let final_gap = f_inf.value - points.last().expect("nonempty").value;
    Ok(AlphaCurve {
        points,
        f_infinity: f_inf.value,
        f_infinity_converged: f_inf.converged,
        alpha0,
        final_gap,
    })
}

/// Membership in the identity-cover processing class: every output symbol
/// must be reachable with probability one from some input.
pub fn is_in_vi(v: &Channel) -> bool {
    v.has_deterministic_cover()
}

/// Grid report for the infinite-ratio rejection exponent of hypothesis `j`
/// in an m-ary instance. Infeasible points (the rejection event dies out
/// faster than any exponential) are flagged and excluded from the argmax.
///
/// For `m = 2` and a threshold keeping every lattice pair feasible, the
/// located maximum sits at a diagonal corner `a = b = e_k`. That corner
/// structure holds per rejection hypothesis only: the worst-case exponent
/// across hypotheses mixes two objectives over one feasible set and can
/// peak strictly inside the simplex, so aggregates and larger `m` carry no
/// corner expectation.
pub fn corner_report_mary(
    inst: &MaryInstance,
    j: usize,
    grid: &SweepGrid,
    cfg: &SolverConfig,
) -> Result<SweepResult> {
    if grid.dimension() != inst.bank.len() {
        return Err(Error::DimensionMismatch(format!(
            "grid spans {} channels, instance has {}",
            grid.dimension(),
            inst.bank.len()
        )));
    }
    if j >= inst.n_hypotheses() {
        return Err(Error::InvalidParameter {
            name: "j".into(),
            reason: format!(
                "hypothesis index {j} out of range for {} hypotheses",
                inst.n_hypotheses()
            ),
        });
    }
    let points = grid.points();
    let entries: Vec<SweepEntry> = points
        .par_iter()
        .flat_map_iter(|a| points.iter().map(move |b| (a.clone(), b.clone())))
        .map(|(a, b)| {
            let at = MaryInstance::new(
                inst.p.clone(),
                inst.bank.clone(),
                a.clone(),
                b.clone(),
                inst.alpha,
                inst.lambda,
            )
            .expect("template instance already validated");
            let (value, feasible, converged) = match f_infinity_j(&at, j, cfg) {
                Ok(r) if r.feasible => (r.value, true, r.converged),
                Ok(r) => (f64::NAN, false, r.converged),
                Err(_) => (f64::NAN, false, false),
            };
            SweepEntry { a, b, value, feasible, converged }
        })
        .collect();
    Ok(SweepResult::locate(entries, grid.resolution()))
}

/// Residual of one `f_infinity(e_k, e_k, lambda) = lambda` fixed point.
#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub channel: usize,
    pub lambda: f64,
    pub residual: f64,
    pub converged: bool,
}

/// The two closed-form single-channel limits with their cross-checks.
#[derive(Debug, Clone)]
pub struct NpBayesReport {
    /// Best pushforward divergence `D(P1 W_k || P2 W_k)` and its channel.
    pub np_value: f64,
    pub np_channel: usize,
    /// Best Chernoff information over channels, from the rho grid.
    pub chernoff: ChernoffStar,
    /// Per-channel fixed points of the deterministic-assignment exponent;
    /// the largest should match `chernoff.value`.
    pub fixed_points: Vec<FixedPoint>,
    pub best_fixed_point: usize,
    /// `max_k f_infinity(e_k, e_k, lambda)` at the probe thresholds, for
    /// the small-threshold approach to `np_value`.
    pub np_check: Vec<(f64, f64)>,
}

const NP_PROBE_LAMBDAS: [f64; 2] = [1e-2, 1e-3];

fn f_inf_corner(inst: &BinaryInstance, k: usize, lambda: f64, cfg: &SolverConfig) -> ExponentResult {
    let e_k = Proportions::point_mass(k, inst.bank.len());
    let at = BinaryInstance::new(
        inst.p1.clone(),
        inst.p2.clone(),
        inst.bank.clone(),
        e_k.clone(),
        e_k,
        inst.alpha,
        lambda,
    )
    .expect("template instance already validated");
    binary::f_infinity(&at, cfg)
}

/// Largest `lambda` with `f_infinity(e_k, e_k, lambda) >= lambda`. The map
/// is nonincreasing in `lambda`, so the crossing with the identity is
/// unique; bisection starts from a verified bracket.
fn corner_fixed_point(inst: &BinaryInstance, k: usize, cfg: &SolverConfig) -> FixedPoint {
    let g = |lam: f64| f_inf_corner(inst, k, lam, cfg).value - lam;
    let mut lo = 0.0f64;
    let g0 = g(1e-12);
    if g0 <= 0.0 {
        // Degenerate channel: the exponent vanishes already at zero.
        return FixedPoint { channel: k, lambda: 0.0, residual: g0.abs(), converged: true };
    }
    let mut hi = 1.0f64;
    let mut expansions = 0;
    while g(hi) > 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > 60 {
            return FixedPoint {
                channel: k,
                lambda: f64::INFINITY,
                residual: f64::INFINITY,
                converged: false,
            };
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-11 {
            break;
        }
    }
    let lambda = 0.5 * (lo + hi);
    FixedPoint { channel: k, lambda, residual: g(lambda).abs(), converged: true }
}

/// Closed-form Neyman-Pearson and Bayesian limits plus the grid evidence
/// that the deterministic-assignment exponent attains them: the
/// small-threshold values approach `np_value`, and the identity fixed point
/// reproduces `chernoff.value`.
pub fn np_bayes_report(inst: &BinaryInstance, cfg: &SolverConfig) -> NpBayesReport {
    let (np_value, np_channel) = binary::np_limit(inst);
    let chernoff = binary::chernoff_star(inst);
    let fixed_points: Vec<FixedPoint> = (0..inst.bank.len())
        .into_par_iter()
        .map(|k| corner_fixed_point(inst, k, cfg))
        .collect();
    let mut best_fixed_point = 0usize;
    for (k, fp) in fixed_points.iter().enumerate() {
        if fp.converged
            && (!fixed_points[best_fixed_point].converged
                || fp.lambda > fixed_points[best_fixed_point].lambda)
        {
            best_fixed_point = k;
        }
    }
    let np_check = NP_PROBE_LAMBDAS
        .iter()
        .map(|&lam| {
            let best = (0..inst.bank.len())
                .map(|k| f_inf_corner(inst, k, lam, cfg).value)
                .fold(f64::NEG_INFINITY, f64::max);
            (lam, best)
        })
        .collect();
    NpBayesReport { np_value, np_channel, chernoff, fixed_points, best_fixed_point, np_check }
}
