//! Exponents and auxiliary quantities for two-hypothesis instances.

use super::{BinaryInstance, DistributionTriple, ExponentResult, Minimizers, ACTIVITY_TOL};
use crate::error::{Error, Result};
use crate::prob::{gjs, kl_slices, ChannelBank, Distribution, Proportions};
use crate::solver::{min_weighted_kl, tilted_geometric, KlTerm, MarginalSlice, SolverConfig};

/// Weights and channels shared by the objective terms. Decision rules build
/// this from realized sample counts rather than nominal design proportions.
#[derive(Debug, Clone, Copy)]
pub struct LdContext<'a> {
    pub a: &'a Proportions,
    pub b: &'a Proportions,
    pub alpha: f64,
    pub bank: &'a ChannelBank,
}

impl BinaryInstance {
    pub fn ld_ctx(&self) -> LdContext<'_> {
        LdContext { a: &self.a, b: &self.b, alpha: self.alpha, bank: &self.bank }
    }
}

/// The weighted divergence sum pairing each test block with `p_test` and each
/// training block with its hypothesis's candidate law:
/// `sum_k a_k D(q_k || p_test W_k) + alpha b_k (D(q1_k || p_train1 W_k) + D(q2_k || p_train2 W_k))`.
///
/// Zero-weight terms contribute exactly 0 even when their divergence is
/// infinite, so empty sensor groups never poison the sum.
pub fn ld(
    triple: &DistributionTriple,
    p_test: &Distribution,
    p_train1: &Distribution,
    p_train2: &Distribution,
    ctx: &LdContext,
) -> f64 {
    let mut acc = 0.0;
    for k in 0..ctx.bank.len() {
        let ch = ctx.bank.channel(k);
        let ak = ctx.a.get(k);
        if ak > 0.0 {
            acc += ak * kl_slices(triple.q[k].as_slice(), &ch.push_slice(p_test.as_slice()));
        }
        let bk = ctx.alpha * ctx.b.get(k);
        if bk > 0.0 {
            acc += bk * kl_slices(triple.q1[k].as_slice(), &ch.push_slice(p_train1.as_slice()));
            acc += bk * kl_slices(triple.q2[k].as_slice(), &ch.push_slice(p_train2.as_slice()));
        }
        if !acc.is_finite() {
            return f64::INFINITY;
        }
    }
    acc
}

/// Result of the inner minimization defining the acceptance statistic.
#[derive(Debug, Clone)]
pub struct MinLdResult {
    pub value: f64,
    /// Minimizing law shared by the test blocks and the first training row.
    pub p_tilde: Distribution,
    /// Minimizing law for the second training row.
    pub p: Distribution,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// `min over (pt, p) of ld(triple, pt, pt, p)`: the test statistic of the
/// generalized acceptance region. The minimization separates: `pt` balances
/// the test blocks against the first training row, `p` serves the second row
/// alone.
pub fn min_ld(triple: &DistributionTriple, ctx: &LdContext, cfg: &SolverConfig) -> MinLdResult {
    let k = ctx.bank.len();
    assert_eq!(triple.q.len(), k, "triple must cover every channel");
    let mut shared_terms = Vec::with_capacity(2 * k);
    let mut free_terms = Vec::with_capacity(k);
    for i in 0..k {
        let ak = ctx.a.get(i);
        let bk = ctx.alpha * ctx.b.get(i);
        if ak > 0.0 {
            shared_terms.push(KlTerm {
                weight: ak,
                target: triple.q[i].as_slice(),
                channel: ctx.bank.channel(i),
            });
        }
        if bk > 0.0 {
            shared_terms.push(KlTerm {
                weight: bk,
                target: triple.q1[i].as_slice(),
                channel: ctx.bank.channel(i),
            });
            free_terms.push(KlTerm {
                weight: bk,
                target: triple.q2[i].as_slice(),
                channel: ctx.bank.channel(i),
            });
        }
    }
    let shared = min_weighted_kl(&shared_terms, None, None, cfg);
    let free = min_weighted_kl(&free_terms, None, None, cfg);
    MinLdResult {
        value: shared.value + free.value,
        p_tilde: Distribution::from_normalized(shared.p),
        p: Distribution::from_normalized(free.p),
        iterations: shared.iterations + free.iterations,
        residual: shared.residual.max(free.residual),
        converged: shared.converged && free.converged,
    }
}

/// Divergence cost of matching both nominal output laws with one common input
/// law: `min over pt of sum_k a_k D(p2 W_k || pt W_k) + alpha b_k D(p1 W_k || pt W_k)`
/// evaluated at `alpha_at`. Nondecreasing in `alpha_at` and 0 at `alpha_at = 0`.
pub fn g_alpha_at(inst: &BinaryInstance, alpha_at: f64, cfg: &SolverConfig) -> f64 {
    let mut terms = Vec::with_capacity(2 * inst.n_channels());
    for k in 0..inst.n_channels() {
        let ak = inst.a.get(k);
        let bk = alpha_at * inst.b.get(k);
        if ak > 0.0 {
            terms.push(KlTerm { weight: ak, target: inst.push2(k), channel: inst.bank.channel(k) });
        }
        if bk > 0.0 {
            terms.push(KlTerm { weight: bk, target: inst.push1(k), channel: inst.bank.channel(k) });
        }
    }
    min_weighted_kl(&terms, None, None, cfg).value
}

/// `g_alpha_at` at the instance's own ratio.
pub fn g_alpha(inst: &BinaryInstance, cfg: &SolverConfig) -> f64 {
    g_alpha_at(inst, inst.alpha, cfg)
}

/// The training ratio below which the best achievable exponent is exactly 0.
#[derive(Debug, Clone)]
pub struct Alpha0 {
    /// Root of `g_alpha_at(alpha) = lambda`, or `f64::INFINITY` when no ratio
    /// inside the bracket reaches the threshold.
    pub value: f64,
    /// Set when the bracket `[0, dual_bracket_max]` never crossed `lambda`.
    pub unbounded: bool,
    pub converged: bool,
}

/// Find the ratio where the matching cost crosses the threshold.
pub fn alpha0(inst: &BinaryInstance, cfg: &SolverConfig) -> Alpha0 {
    let lambda = inst.lambda;
    let mut hi = 1.0f64;
    let mut g_hi = g_alpha_at(inst, hi, cfg);
    let mut guard = 0;
    while g_hi < lambda {
        hi *= 2.0;
        if hi > cfg.dual_bracket_max {
            return Alpha0 { value: f64::INFINITY, unbounded: true, converged: true };
        }
        g_hi = g_alpha_at(inst, hi, cfg);
        guard += 1;
        if guard > 200 {
            return Alpha0 { value: f64::INFINITY, unbounded: true, converged: false };
        }
    }
    let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let g = g_alpha_at(inst, mid, cfg);
        if (g - lambda).abs() <= 1e-12 || (hi - lo) <= 1e-12 * (1.0 + hi) {
            return Alpha0 { value: mid, unbounded: false, converged: true };
        }
        if g < lambda {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Alpha0 { value: 0.5 * (lo + hi), unbounded: false, converged: true }
}

/// Outcome of a scalar dual search.
struct DualOutcome {
    s: f64,
    f: f64,
    g: f64,
    converged: bool,
}

/// Maximize the Lagrangian dual over one multiplier `s >= 0` by expanding a
/// bracket and bisecting on the sign of `g - lambda`. `solve(s)` must return
/// the objective and constraint values at a Lagrangian minimizer for `s`, and
/// `g` must be (numerically) nonincreasing in `s`. The caller guarantees
/// `g(0) > lambda`.
fn bisect_dual(
    lambda: f64,
    bracket_max: f64,
    mut solve: impl FnMut(f64) -> (f64, f64),
) -> DualOutcome {
    let mut s_hi = 1.0f64;
    let (mut f, mut g) = solve(s_hi);
    let mut s_lo = 0.0f64;
    while g > lambda {
        s_lo = s_hi;
        s_hi *= 2.0;
        if s_hi > bracket_max {
            return DualOutcome { s: s_lo, f, g, converged: false };
        }
        let r = solve(s_hi);
        f = r.0;
        g = r.1;
        }
    let mut s = s_hi;
    for _ in 0..90 {
        if (g - lambda).abs() <= ACTIVITY_TOL || (s_hi - s_lo) <= 1e-13 * (1.0 + s_hi) {
            break;
        }
        s = 0.5 * (s_lo + s_hi);
        let r = solve(s);
        f = r.0;
        g = r.1;
            if g > lambda {
            s_lo = s;
        } else {
            s_hi = s;
        }
    }
    DualOutcome { s, f, g, converged: true }
}

fn dists(blocks: &[Vec<f64>]) -> Vec<Distribution> {
    blocks.iter().map(|b| Distribution::from_normalized(b.clone())).collect()
}

/// Relative-change stop rule for block-coordinate descent sweeps.
fn bcd_done(prev: f64, cur: f64) -> bool {
    (prev - cur).abs() <= 1e-10 * (1.0 + cur.abs())
}

const BCD_MAX_SWEEPS: usize = 300;

/// The best type-II exponent of the generalized acceptance region at the
/// instance's threshold: the constrained minimum of the mismatch cost against
/// `(p2, p1, p2)` over triples whose acceptance statistic stays within
/// `lambda`.
pub fn f_alpha(inst: &BinaryInstance, cfg: &SolverConfig) -> ExponentResult {
    let k = inst.n_channels();
    let g0 = g_alpha(inst, cfg);
    if g0 <= inst.lambda + ACTIVITY_TOL {
        // The unconstrained optimum (all blocks at their nominal laws) is
        // already inside the acceptance region.
        let q: Vec<Vec<f64>> = (0..k).map(|i| inst.push2(i).to_vec()).collect();
        let y1: Vec<Vec<f64>> = (0..k).map(|i| inst.push1(i).to_vec()).collect();
        return ExponentResult::zero(
            Minimizers { q: dists(&q), trains: vec![dists(&y1), dists(&q)] },
            1,
        );
    }

    let m_in = inst.bank.n_inputs();
    let mut q: Vec<Vec<f64>> = (0..k).map(|i| inst.push2(i).to_vec()).collect();
    let mut y1: Vec<Vec<f64>> = (0..k).map(|i| inst.push1(i).to_vec()).collect();
    let mut y2: Vec<Vec<f64>> = (0..k).map(|i| inst.push2(i).to_vec()).collect();
    let mut ptil = vec![1.0 / m_in as f64; m_in];
    let mut p = ptil.clone();
    let mut sweeps_total = 0usize;

    let outcome = bisect_dual(inst.lambda, cfg.dual_bracket_max, |s| {
        let mut prev = f64::INFINITY;
        let mut fg = (f64::INFINITY, f64::INFINITY);
        for _ in 0..BCD_MAX_SWEEPS {
            sweeps_total += 1;
            for i in 0..k {
                let ch = inst.bank.channel(i);
                let ptil_push = ch.push_slice(&ptil);
                let p_push = ch.push_slice(&p);
                if inst.a.get(i) > 0.0 {
                    if let Some(t) = tilted_geometric(&[(inst.push2(i), 1.0), (&ptil_push, s)]) {
                        q[i] = t;
                    }
                }
                if inst.b.get(i) > 0.0 {
                    if let Some(t) = tilted_geometric(&[(inst.push1(i), 1.0), (&ptil_push, s)]) {
                        y1[i] = t;
                    }
                    if let Some(t) = tilted_geometric(&[(inst.push2(i), 1.0), (&p_push, s)]) {
                        y2[i] = t;
                    }
                }
            }
            let mut shared = Vec::with_capacity(2 * k);
            let mut free = Vec::with_capacity(k);
            for i in 0..k {
                let ak = inst.a.get(i);
                let bk = inst.alpha * inst.b.get(i);
                if ak > 0.0 {
                    shared.push(KlTerm { weight: ak, target: &q[i], channel: inst.bank.channel(i) });
                }
                if bk > 0.0 {
                    shared.push(KlTerm { weight: bk, target: &y1[i], channel: inst.bank.channel(i) });
                    free.push(KlTerm { weight: bk, target: &y2[i], channel: inst.bank.channel(i) });
                }
            }
            ptil = min_weighted_kl(&shared, None, Some(&ptil), cfg).p;
            p = min_weighted_kl(&free, None, Some(&p), cfg).p;

            let mut f_val = 0.0;
            let mut g_val = 0.0;
            for i in 0..k {
                let ch = inst.bank.channel(i);
                let ak = inst.a.get(i);
                let bk = inst.alpha * inst.b.get(i);
                let ptil_push = ch.push_slice(&ptil);
                let p_push = ch.push_slice(&p);
                if ak > 0.0 {
                    f_val += ak * kl_slices(&q[i], inst.push2(i));
                    g_val += ak * kl_slices(&q[i], &ptil_push);
                }
                if bk > 0.0 {
                    f_val += bk * (kl_slices(&y1[i], inst.push1(i))
                        + kl_slices(&y2[i], inst.push2(i)));
                    g_val += bk * (kl_slices(&y1[i], &ptil_push) + kl_slices(&y2[i], &p_push));
                }
            }
            fg = (f_val, g_val);
            let lagr = f_val + s * g_val;
            if bcd_done(prev, lagr) {
                break;
            }
            prev = lagr;
        }
        fg
    });

    let value = (outcome.f + outcome.s * (outcome.g - inst.lambda)).max(0.0);
    ExponentResult {
        value,
        optimizers: Minimizers { q: dists(&q), trains: vec![dists(&y1), dists(&y2)] },
        duals: vec![outcome.s],
        feasible: true,
        converged: outcome.converged,
        iterations: sweeps_total,
        residual: (outcome.g - inst.lambda).abs(),
        witness_pair: None,
    }
}

/// `f_alpha` under the simplified acceptance statistic available when every
/// channel output is deterministically reachable: the second training row
/// drops out of the statistic, leaving one shared matching law.
pub fn f_alpha_vi(inst: &BinaryInstance, cfg: &SolverConfig) -> Result<ExponentResult> {
    if !inst.bank.has_deterministic_cover() {
        return Err(Error::Guard(
            "simplified statistic requires every output to be deterministically reachable".into(),
        ));
    }
    let k = inst.n_channels();
    let g0 = g_alpha(inst, cfg);
    if g0 <= inst.lambda + ACTIVITY_TOL {
        let q: Vec<Vec<f64>> = (0..k).map(|i| inst.push2(i).to_vec()).collect();
        let y1: Vec<Vec<f64>> = (0..k).map(|i| inst.push1(i).to_vec()).collect();
        return Ok(ExponentResult::zero(
            Minimizers { q: dists(&q), trains: vec![dists(&y1)] },
            1,
        ));
    }

    let m_in = inst.bank.n_inputs();
    let mut q: Vec<Vec<f64>> = (0..k).map(|i| inst.push2(i).to_vec()).collect();
    let mut y1: Vec<Vec<f64>> = (0..k).map(|i| inst.push1(i).to_vec()).collect();
    let mut ptil = vec![1.0 / m_in as f64; m_in];
    let mut sweeps_total = 0usize;

    let outcome = bisect_dual(inst.lambda, cfg.dual_bracket_max, |s| {
        let mut prev = f64::INFINITY;
        let mut fg = (f64::INFINITY, f64::INFINITY);
        for _ in 0..BCD_MAX_SWEEPS {
            sweeps_total += 1;
            for i in 0..k {
                let ch = inst.bank.channel(i);
                let ptil_push = ch.push_slice(&ptil);
                if inst.a.get(i) > 0.0 {
                    if let Some(t) = tilted_geometric(&[(inst.push2(i), 1.0), (&ptil_push, s)]) {
                        q[i] = t;
                    }
                }
                if inst.b.get(i) > 0.0 {
                    if let Some(t) = tilted_geometric(&[(inst.push1(i), 1.0), (&ptil_push, s)]) {
                        y1[i] = t;
                    }
                }
            }
            let mut shared = Vec::with_capacity(2 * k);
            for i in 0..k {
                let ak = inst.a.get(i);
                let bk = inst.alpha * inst.b.get(i);
                if ak > 0.0 {
                    shared.push(KlTerm { weight: ak, target: &q[i], channel: inst.bank.channel(i) });
                }
                if bk > 0.0 {
                    shared.push(KlTerm { weight: bk, target: &y1[i], channel: inst.bank.channel(i) });
                }
            }
            ptil = min_weighted_kl(&shared, None, Some(&ptil), cfg).p;

            let mut f_val = 0.0;
            let mut g_val = 0.0;
            for i in 0..k {
                let ch = inst.bank.channel(i);
                let ak = inst.a.get(i);
                let bk = inst.alpha * inst.b.get(i);
                let ptil_push = ch.push_slice(&ptil);
                if ak > 0.0 {
                    f_val += ak * kl_slices(&q[i], inst.push2(i));
                    g_val += ak * kl_slices(&q[i], &ptil_push);
                }
                if bk > 0.0 {
                    f_val += bk * kl_slices(&y1[i], inst.push1(i));
                    g_val += bk * kl_slices(&y1[i], &ptil_push);
                }
            }
            fg = (f_val, g_val);
            let lagr = f_val + s * g_val;
            if bcd_done(prev, lagr) {
                break;
            }
            prev = lagr;
        }
        fg
    });

    let value = (outcome.f + outcome.s * (outcome.g - inst.lambda)).max(0.0);
    Ok(ExponentResult {
        value,
        optimizers: Minimizers { q: dists(&q), trains: vec![dists(&y1)] },
        duals: vec![outcome.s],
        feasible: true,
        converged: outcome.converged,
        iterations: sweeps_total,
        residual: (outcome.g - inst.lambda).abs(),
        witness_pair: None,
    })
}

/// Result of the pinned-marginal matching cost.
#[derive(Debug, Clone)]
pub struct KappaResult {
    pub value: f64,
    pub p_tilde: Distribution,
    pub converged: bool,
}

/// Indices observed in the test phase but never trained on: positive test
/// weight with zero training weight.
pub fn untrained_channels(a: &Proportions, b: &Proportions) -> Vec<usize> {
    (0..a.len()).filter(|&k| a.get(k) > 0.0 && b.get(k) == 0.0).collect()
}

fn kappa_slice(inst: &BinaryInstance) -> MarginalSlice {
    let pinned: Vec<bool> = (0..inst.n_channels()).map(|k| inst.b.get(k) > 0.0).collect();
    MarginalSlice::new(&inst.bank, &inst.p1, &pinned)
}

fn kappa_value(
    q: &[&[f64]],
    inst: &BinaryInstance,
    slice: &MarginalSlice,
    warm: Option<&[f64]>,
    cfg: &SolverConfig,
) -> (f64, Vec<f64>) {
    if untrained_channels(&inst.a, &inst.b).is_empty() {
        // Every weighted test marginal is pinned, so the minimizer is the
        // anchor itself and the cost is a plain divergence sum.
        let mut acc = 0.0;
        for k in 0..inst.n_channels() {
            let ak = inst.a.get(k);
            if ak > 0.0 {
                acc += ak * kl_slices(q[k], inst.push1(k));
            }
            if !acc.is_finite() {
                return (f64::INFINITY, inst.p1.as_slice().to_vec());
            }
        }
        return (acc, inst.p1.as_slice().to_vec());
    }
    let terms: Vec<KlTerm> = (0..inst.n_channels())
        .filter(|&k| inst.a.get(k) > 0.0)
        .map(|k| KlTerm { weight: inst.a.get(k), target: q[k], channel: inst.bank.channel(k) })
        .collect();
    let res = min_weighted_kl(&terms, Some(slice), warm, cfg);
    (res.value, res.p)
}

/// Matching cost of test types `q` against the first hypothesis when training
/// pins channel marginals: `min over pt with pt W_k = p1 W_k (for trained k)
/// of sum_k a_k D(q_k || pt W_k)`.
pub fn kappa(q: &[Distribution], inst: &BinaryInstance, cfg: &SolverConfig) -> Result<KappaResult> {
    if q.len() != inst.n_channels() {
        return Err(Error::DimensionMismatch(format!(
            "{} type blocks for {} channels",
            q.len(),
            inst.n_channels()
        )));
    }
    let slice = kappa_slice(inst);
    let views: Vec<&[f64]> = q.iter().map(|d| d.as_slice()).collect();
    let (value, p) = kappa_value(&views, inst, &slice, None, cfg);
    Ok(KappaResult { value, p_tilde: Distribution::from_normalized(p), converged: true })
}

/// The infinite-training-ratio exponent: smallest mismatch against `p2`
/// pushforwards over test types whose pinned matching cost against `p1` stays
/// within `lambda`.
pub fn f_infinity(inst: &BinaryInstance, cfg: &SolverConfig) -> ExponentResult {
    let k = inst.n_channels();
    let slice = kappa_slice(inst);
    let nominal: Vec<&[f64]> = (0..k).map(|i| inst.push2(i)).collect();
    let (kappa0, ptil0) = kappa_value(&nominal, inst, &slice, None, cfg);
    if kappa0 <= inst.lambda + ACTIVITY_TOL {
        let q: Vec<Vec<f64>> = nominal.iter().map(|s| s.to_vec()).collect();
        return ExponentResult::zero(Minimizers { q: dists(&q), trains: vec![] }, 1);
    }

    let mut q: Vec<Vec<f64>> = nominal.iter().map(|s| s.to_vec()).collect();
    let mut ptil = ptil0;
    let mut sweeps_total = 0usize;

    let outcome = bisect_dual(inst.lambda, cfg.dual_bracket_max, |s| {
        let mut prev = f64::INFINITY;
        let mut fg = (f64::INFINITY, f64::INFINITY);
        for _ in 0..BCD_MAX_SWEEPS {
            sweeps_total += 1;
            for i in 0..k {
                if inst.a.get(i) > 0.0 {
                    let ptil_push = inst.bank.channel(i).push_slice(&ptil);
                    if let Some(t) = tilted_geometric(&[(inst.push2(i), 1.0), (&ptil_push, s)]) {
                        q[i] = t;
                    }
                }
            }
            let views: Vec<&[f64]> = q.iter().map(|v| v.as_slice()).collect();
            let (g_val, new_ptil) = kappa_value(&views, inst, &slice, Some(&ptil), cfg);
            ptil = new_ptil;
            let mut f_val = 0.0;
            for i in 0..k {
                if inst.a.get(i) > 0.0 {
                    f_val += inst.a.get(i) * kl_slices(&q[i], inst.push2(i));
                }
            }
            fg = (f_val, g_val);
            let lagr = f_val + s * g_val;
            if bcd_done(prev, lagr) {
                break;
            }
            prev = lagr;
        }
        fg
    });

    let value = (outcome.f + outcome.s * (outcome.g - inst.lambda)).max(0.0);
    ExponentResult {
        value,
        optimizers: Minimizers { q: dists(&q), trains: vec![] },
        duals: vec![outcome.s],
        feasible: true,
        converged: outcome.converged,
        iterations: sweeps_total,
        residual: (outcome.g - inst.lambda).abs(),
        witness_pair: None,
    }
}

/// Largest per-channel divergence of the two nominal output laws, with the
/// achieving channel. This is the small-threshold limit of the best
/// single-channel exponent.
pub fn np_limit(inst: &BinaryInstance) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for k in 0..inst.n_channels() {
        let v = kl_slices(inst.push1(k), inst.push2(k));
        if v > best {
            best = v;
            arg = k;
        }
    }
    (best, arg)
}

/// Best symmetric-error exponent over channels and tilting exponents.
#[derive(Debug, Clone)]
pub struct ChernoffStar {
    pub value: f64,
    pub channel: usize,
    pub rho: f64,
}

/// `max_k max_{rho in [0,1]} -ln sum_z (p2 W_k)^rho (p1 W_k)^(1-rho)`,
/// located by golden-section search on each channel's concave inner function.
pub fn chernoff_star(inst: &BinaryInstance) -> ChernoffStar {
    let inner = |k: usize, rho: f64| -> f64 {
        let p2 = inst.push2(k);
        let p1 = inst.push1(k);
        let mut s = 0.0;
        for z in 0..p1.len() {
            if p1[z] > 0.0 && p2[z] > 0.0 {
                s += p2[z].powf(rho) * p1[z].powf(1.0 - rho);
            }
        }
        -s.ln()
    };
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut best = ChernoffStar { value: f64::NEG_INFINITY, channel: 0, rho: 0.5 };
    for k in 0..inst.n_channels() {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let mut f1 = inner(k, x1);
        let mut f2 = inner(k, x2);
        for _ in 0..120 {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = inner(k, x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = inner(k, x1);
            }
        }
        let rho = 0.5 * (lo + hi);
        let v = inner(k, rho);
        if v > best.value {
            best = ChernoffStar { value: v, channel: k, rho };
        }
    }
    best
}

/// Single-alphabet specialization: the exponent of the classical two-sample
/// test that thresholds the generalized Jensen-Shannon statistic. Solved
/// directly with closed-form mixture and tilt updates; shares no kernel code
/// with [`f_alpha`], so the two act as independent routes on identity banks.
pub fn gutman_exponent(
    p1: &Distribution,
    p2: &Distribution,
    alpha: f64,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<ExponentResult> {
    if p1.len() != p2.len() {
        return Err(Error::DimensionMismatch("source laws must share an alphabet".into()));
    }
    super::validate_scalars(alpha, lambda)?;
    let g0 = gjs(p1, p2, alpha)?;
    if g0 <= lambda + ACTIVITY_TOL {
        return Ok(ExponentResult::zero(
            Minimizers { q: vec![p2.clone()], trains: vec![vec![p1.clone()]] },
            1,
        ));
    }
    let mut q = p2.as_slice().to_vec();
    let mut qt = p1.as_slice().to_vec();
    let l = q.len();
    let mut sweeps_total = 0usize;
    let outcome = bisect_dual(lambda, cfg.dual_bracket_max, |s| {
        let mut prev = f64::INFINITY;
        let mut fg = (f64::INFINITY, f64::INFINITY);
        for _ in 0..BCD_MAX_SWEEPS {
            sweeps_total += 1;
            // Optimal matching law for the current blocks, then tilt both
            // blocks toward it.
            let mix: Vec<f64> =
                (0..l).map(|z| (q[z] + alpha * qt[z]) / (1.0 + alpha)).collect();
            if let Some(t) = tilted_geometric(&[(p2.as_slice(), 1.0), (&mix, s)]) {
                q = t;
            }
            if let Some(t) = tilted_geometric(&[(p1.as_slice(), 1.0), (&mix, s)]) {
                qt = t;
            }
            let mix: Vec<f64> =
                (0..l).map(|z| (q[z] + alpha * qt[z]) / (1.0 + alpha)).collect();
            let f_val = kl_slices(&q, p2.as_slice()) + alpha * kl_slices(&qt, p1.as_slice());
            let g_val = kl_slices(&q, &mix) + alpha * kl_slices(&qt, &mix);
            fg = (f_val, g_val);
            let lagr = f_val + s * g_val;
            if bcd_done(prev, lagr) {
                break;
            }
            prev = lagr;
        }
        fg
    });
    let value = (outcome.f + outcome.s * (outcome.g - lambda)).max(0.0);
    Ok(ExponentResult {
        value,
        optimizers: Minimizers {
            q: vec![Distribution::from_normalized(q)],
            trains: vec![vec![Distribution::from_normalized(qt)]],
        },
        duals: vec![outcome.s],
        feasible: true,
        converged: outcome.converged,
        iterations: sweeps_total,
        residual: (outcome.g - lambda).abs(),
        witness_pair: None,
    })
}
