//! The one convex kernel every exponent reduces to: minimize a weighted sum of
//! divergences `sum_i w_i * D(r_i || P W_i)` over probability vectors `P`,
//! optionally restricted to the affine slice where selected output marginals
//! `P W_k` are pinned to fixed values.
//!
//! Unconstrained problems use multiplicative-weights (entropic mirror) descent
//! with backtracking. Slice-constrained problems take gradient steps projected
//! onto the slice's tangent space, with an exact ratio test against the
//! nonnegativity boundary, so iterates never leave the slice.

use crate::prob::{kl_slices, Channel, ChannelBank, Distribution};

/// Tolerances and budgets shared by every iterative solve.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Absolute tolerance on objective values and constraint activity.
    pub objective_tol: f64,
    /// Tolerance for simplex membership and slice residual checks.
    pub simplex_tol: f64,
    /// Iteration budget for a single kernel descent.
    pub max_iters: usize,
    /// Largest dual multiplier (and mixing weight) bracketed before giving up.
    pub dual_bracket_max: f64,
    /// Default lattice step for grid-based reference computations.
    pub grid_resolution: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            objective_tol: 1e-8,
            simplex_tol: 1e-10,
            max_iters: 10_000,
            dual_bracket_max: 1e4,
            grid_resolution: 0.01,
        }
    }
}

/// One objective term `weight * D(target || P * channel)`.
pub struct KlTerm<'a> {
    pub weight: f64,
    pub target: &'a [f64],
    pub channel: &'a Channel,
}

/// Outcome of one kernel minimization.
#[derive(Debug, Clone)]
pub struct KernelResult {
    pub p: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Bound on the remaining objective gap (unconstrained) or the norm of the
    /// feasible descent direction (slice-constrained).
    pub residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Modified Gram-Schmidt with a second re-orthogonalization pass.
/// Rows with norm below the drop tolerance are discarded as dependent.
fn orthonormalize(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for row in rows {
        let mut r = row.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&r, b);
                for (ri, bi) in r.iter_mut().zip(b) {
                    *ri -= c * bi;
                }
            }
        }
        let n = norm2(&r);
        if n > 1e-10 {
            for ri in r.iter_mut() {
                *ri /= n;
            }
            basis.push(r);
        }
    }
    basis
}

/// The feasible set `{ P in the simplex : P W_k = anchor W_k for pinned k }`,
/// with precomputed geometry for projecting directions onto it.
#[derive(Debug, Clone)]
pub struct MarginalSlice {
    anchor: Vec<f64>,
    pinned: Vec<usize>,
    pinned_marginals: Vec<Vec<f64>>,
    /// Orthonormal basis of the span of the constraint rows (including 1).
    constraint_basis: Vec<Vec<f64>>,
    /// Orthonormal basis of the tangent space: sum-zero vectors annihilated by
    /// every pinned channel.
    tangent: Vec<Vec<f64>>,
    dim: usize,
}

impl MarginalSlice {
    /// `pinned[k] = true` fixes `P W_k` to `anchor W_k`. The anchor itself is
    /// always a feasible point.
    pub fn new(bank: &ChannelBank, anchor: &Distribution, pinned: &[bool]) -> Self {
        assert_eq!(pinned.len(), bank.len());
        assert_eq!(anchor.len(), bank.n_inputs());
        let m = bank.n_inputs();
        let mut rows: Vec<Vec<f64>> = vec![vec![1.0; m]];
        let mut pinned_idx = Vec::new();
        let mut pinned_marginals = Vec::new();
        for (k, &is_pinned) in pinned.iter().enumerate() {
            if is_pinned {
                let ch = bank.channel(k);
                for z in 0..ch.n_outputs() {
                    rows.push((0..m).map(|x| ch.prob(x, z)).collect());
                }
                pinned_idx.push(k);
                pinned_marginals.push(ch.push_slice(anchor.as_slice()));
            }
        }
        let constraint_basis = orthonormalize(&rows);
        let mut tangent = Vec::new();
        let mut working = constraint_basis.clone();
        for x in 0..m {
            let mut e = vec![0.0; m];
            e[x] = 1.0;
            let before = working.len();
            working = {
                let mut ext = working;
                ext.push(e);
                orthonormalize(&ext)
            };
            if working.len() > before {
                tangent.push(working.last().unwrap().clone());
            }
        }
        let dim = tangent.len();
        Self {
            anchor: anchor.as_slice().to_vec(),
            pinned: pinned_idx,
            pinned_marginals,
            constraint_basis,
            tangent,
            dim,
        }
    }

    /// Dimension of the feasible set's affine hull.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    /// Largest violation of the pinned marginals and the simplex conditions.
    pub fn residual(&self, p: &[f64], bank: &ChannelBank) -> f64 {
        let mut r: f64 = (p.iter().sum::<f64>() - 1.0).abs();
        for v in p {
            r = r.max(-v.min(0.0));
        }
        for (idx, &k) in self.pinned.iter().enumerate() {
            let push = bank.channel(k).push_slice(p);
            for (a, b) in push.iter().zip(&self.pinned_marginals[idx]) {
                r = r.max((a - b).abs());
            }
        }
        r
    }

    pub fn contains(&self, p: &[f64], bank: &ChannelBank, tol: f64) -> bool {
        self.residual(p, bank) <= tol
    }

    /// Component of `v` lying in the tangent space.
    fn project_tangent(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for b in &self.tangent {
            let c = dot(v, b);
            for (o, bi) in out.iter_mut().zip(b) {
                *o += c * bi;
            }
        }
        out
    }

    /// Affine projection of `p` onto the slice's affine hull (nonnegativity
    /// not enforced): `anchor + tangent-component of (p - anchor)`.
    fn project_affine(&self, p: &[f64]) -> Vec<f64> {
        let diff: Vec<f64> = p.iter().zip(&self.anchor).map(|(x, a)| x - a).collect();
        let t = self.project_tangent(&diff);
        self.anchor.iter().zip(&t).map(|(a, d)| a + d).collect()
    }
}

/// Objective and gradient of `sum_i w_i D(r_i || p W_i)` at `p`.
/// The gradient entry for input `x` is `-sum_i w_i sum_z r_i[z] W_i(z|x) / (pW_i)[z]`.
fn eval(terms: &[KlTerm], p: &[f64], grad: &mut [f64]) -> f64 {
    for g in grad.iter_mut() {
        *g = 0.0;
    }
    let mut f = 0.0;
    for t in terms {
        if t.weight <= 0.0 {
            continue;
        }
        let push = t.channel.push_slice(p);
        f += t.weight * kl_slices(t.target, &push);
        if !f.is_finite() {
            return f64::INFINITY;
        }
        for (z, &rz) in t.target.iter().enumerate() {
            if rz > 0.0 {
                let ratio = t.weight * rz / push[z].max(1e-300);
                for (x, g) in grad.iter_mut().enumerate() {
                    *g -= ratio * t.channel.prob(x, z);
                }
            }
        }
    }
    f
}

fn value_only(terms: &[KlTerm], p: &[f64]) -> f64 {
    let mut f = 0.0;
    for t in terms {
        if t.weight <= 0.0 {
            continue;
        }
        let push = t.channel.push_slice(p);
        f += t.weight * kl_slices(t.target, &push);
        if !f.is_finite() {
            return f64::INFINITY;
        }
    }
    f
}

/// True when some target puts mass on an output no input can ever reach, in
/// which case the objective is identically infinite.
fn identically_infinite(terms: &[KlTerm]) -> bool {
    terms.iter().filter(|t| t.weight > 0.0).any(|t| {
        t.target.iter().enumerate().any(|(z, &rz)| {
            rz > 0.0 && (0..t.channel.n_inputs()).all(|x| t.channel.prob(x, z) <= 0.0)
        })
    })
}

/// Minimize `sum_i w_i D(r_i || P W_i)` over the simplex, or over `slice` when
/// given. `warm` seeds the iterate when it is finite and feasible; otherwise
/// descent starts from the uniform point (unconstrained) or the slice anchor.
pub fn min_weighted_kl(
    terms: &[KlTerm],
    slice: Option<&MarginalSlice>,
    warm: Option<&[f64]>,
    cfg: &SolverConfig,
) -> KernelResult {
    let m = terms
        .first()
        .map(|t| t.channel.n_inputs())
        .unwrap_or_else(|| slice.map(|s| s.anchor.len()).unwrap_or(2));
    debug_assert!(terms.iter().all(|t| t.channel.n_inputs() == m));

    if terms.iter().all(|t| t.weight <= 0.0) {
        // Constant objective: hand back the initialization unchanged.
        let p = warm
            .map(|w| w.to_vec())
            .or_else(|| slice.map(|s| s.anchor.clone()))
            .unwrap_or_else(|| vec![1.0 / m as f64; m]);
        return KernelResult { p, value: 0.0, iterations: 0, residual: 0.0, converged: true };
    }

    if identically_infinite(terms) {
        let p = slice.map(|s| s.anchor.clone()).unwrap_or_else(|| vec![1.0 / m as f64; m]);
        return KernelResult {
            p,
            value: f64::INFINITY,
            iterations: 0,
            residual: 0.0,
            converged: true,
        };
    }

    match slice {
        None => mirror_descent(terms, warm, m, cfg),
        Some(s) => slice_descent(terms, s, warm, m, cfg),
    }
}

fn mirror_descent(
    terms: &[KlTerm],
    warm: Option<&[f64]>,
    m: usize,
    cfg: &SolverConfig,
) -> KernelResult {
    let uniform = vec![1.0 / m as f64; m];
    let mut p = match warm {
        Some(w) if value_only(terms, w).is_finite() => {
            // Re-center a warm start so every coordinate can still move.
            let mut v: Vec<f64> = w.iter().map(|&x| x.max(1e-12)).collect();
            let s: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= s);
            v
        }
        _ => uniform.clone(),
    };
    let mut grad = vec![0.0; m];
    let mut f = eval(terms, &p, &mut grad);
    if !f.is_finite() {
        p = uniform;
        f = eval(terms, &p, &mut grad);
    }
    let total_w: f64 = terms.iter().map(|t| t.weight.max(0.0)).sum();
    let rtol = 0.1 * cfg.objective_tol;
    let mut residual;
    let mut iters = 0;
    let mut stall = 0;
    let mut prev = f;
    while iters < cfg.max_iters {
        iters += 1;
        let gmin = grad.iter().cloned().fold(f64::INFINITY, f64::min);
        residual = dot(&grad, &p) - gmin;
        if residual <= rtol {
            return KernelResult { p, value: f, iterations: iters, residual, converged: true };
        }
        // Alternating-minimization step: p[x] <- p[x] * (-g[x]) / sum w.
        // Monotone for this objective and self-normalizing, since
        // sum_x p[x] (-g[x]) equals the total weight exactly.
        let mut s = 0.0;
        for (pi, gi) in p.iter_mut().zip(&grad) {
            *pi *= (-gi).max(0.0) / total_w;
            s += *pi;
        }
        if !(s > 0.0 && s.is_finite()) {
            break;
        }
        p.iter_mut().for_each(|x| *x /= s);
        f = eval(terms, &p, &mut grad);
        stall = if prev - f <= 1e-16 * (1.0 + f.abs()) { stall + 1 } else { 0 };
        prev = f;
        if stall >= 16 {
            break;
        }
    }
    let gmin = grad.iter().cloned().fold(f64::INFINITY, f64::min);
    residual = dot(&grad, &p) - gmin;
    KernelResult { p, value: f, iterations: iters, residual, converged: residual <= 100.0 * rtol }
}

fn slice_descent(
    terms: &[KlTerm],
    slice: &MarginalSlice,
    warm: Option<&[f64]>,
    m: usize,
    cfg: &SolverConfig,
) -> KernelResult {
    let mut p = match warm {
        Some(w) => {
            let proj = slice.project_affine(w);
            if proj.iter().all(|&x| x >= 0.0) && value_only(terms, &proj).is_finite() {
                proj
            } else {
                slice.anchor.clone()
            }
        }
        None => slice.anchor.clone(),
    };
    if !value_only(terms, &p).is_finite() {
        // Walk from the anchor toward the affine projection of the uniform
        // point, looking for a feasible start with finite objective.
        let uniform = vec![1.0 / m as f64; m];
        let target = slice.project_affine(&uniform);
        let mut t = 1.0;
        // Shrink until nonnegative.
        let step: Vec<f64> =
            target.iter().zip(&slice.anchor).map(|(u, a)| u - a).collect();
        for _ in 0..80 {
            let cand: Vec<f64> =
                slice.anchor.iter().zip(&step).map(|(a, d)| a + t * d).collect();
            if cand.iter().all(|&x| x >= 0.0) && value_only(terms, &cand).is_finite() {
                p = cand;
                break;
            }
            t *= 0.5;
        }
    }
    let mut grad = vec![0.0; m];
    let mut f = eval(terms, &p, &mut grad);
    if !f.is_finite() {
        return KernelResult {
            p,
            value: f64::INFINITY,
            iterations: 0,
            residual: f64::INFINITY,
            converged: false,
        };
    }
    if slice.dim() == 0 {
        // The slice is a single point; nothing to optimize.
        return KernelResult { p, value: f, iterations: 0, residual: 0.0, converged: true };
    }
    let dtol = 1e-9;
    let mut eta = 1.0f64;
    let mut iters = 0;
    let mut residual = f64::INFINITY;
    let mut stall = 0;
    while iters < cfg.max_iters {
        iters += 1;
        // Feasible steepest-descent direction: project -grad onto the tangent
        // space, then drop components that would push active coordinates
        // negative, re-projecting each time a face is added.
        let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut d = slice.project_tangent(&neg);
        let mut active: Vec<usize> = Vec::new();
        for _ in 0..m {
            let mut newly: Vec<usize> = (0..m)
                .filter(|&x| p[x] <= 1e-14 && d[x] < -1e-14 && !active.contains(&x))
                .collect();
            if newly.is_empty() {
                break;
            }
            active.append(&mut newly);
            let mut rows: Vec<Vec<f64>> = slice.constraint_basis.clone();
            for &x in &active {
                let mut e = vec![0.0; m];
                e[x] = 1.0;
                rows.push(e);
            }
            let basis = orthonormalize(&rows);
            d = neg.clone();
            for b in &basis {
                let c = dot(&d, b);
                for (di, bi) in d.iter_mut().zip(b) {
                    *di -= c * bi;
                }
            }
        }
        let dn = norm2(&d);
        residual = dn * (1.0 + norm2(&grad));
        if dn <= dtol * (1.0 + norm2(&grad)) {
            return KernelResult { p, value: f, iterations: iters, residual: dn, converged: true };
        }
        // Exact cap from the nonnegativity boundary.
        let mut eta_max = f64::INFINITY;
        for x in 0..m {
            if d[x] < -1e-300 {
                eta_max = eta_max.min(p[x] / -d[x]);
            }
        }
        let mut step_eta = eta.min(eta_max);
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> =
                p.iter().zip(&d).map(|(&pi, &di)| (pi + step_eta * di).max(0.0)).collect();
            let fc = value_only(terms, &cand);
            if fc <= f - 1e-4 * step_eta * dn * dn {
                let drop = f - fc;
                p = cand;
                f = fc;
                eta = (eta * 1.5).min(1e3);
                accepted = true;
                stall = if drop < 1e-13 * (1.0 + f.abs()) { stall + 1 } else { 0 };
                break;
            }
            step_eta *= 0.5;
            if step_eta < 1e-16 {
                break;
            }
        }
        if !accepted || stall >= 8 {
            break;
        }
        f = eval(terms, &p, &mut grad);
    }
    KernelResult { p, value: f, iterations: iters, residual, converged: residual <= 1e-6 }
}

/// Normalized geometric mean `q[z] ∝ prod_t refs[t].0[z] ^ (w_t / sum w)`.
/// Returns `None` when the supports are jointly empty.
pub(crate) fn tilted_geometric(refs: &[(&[f64], f64)]) -> Option<Vec<f64>> {
    let total: f64 = refs.iter().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return refs.first().map(|(r, _)| r.to_vec());
    }
    let l = refs[0].0.len();
    let mut q = vec![0.0; l];
    'outer: for z in 0..l {
        let mut acc = 0.0;
        for (r, w) in refs {
            if *w <= 0.0 {
                continue;
            }
            if r[z] <= 0.0 {
                q[z] = 0.0;
                continue 'outer;
            }
            acc += (w / total) * r[z].ln();
        }
        q[z] = acc.exp();
    }
    let s: f64 = q.iter().sum();
    if s <= 0.0 || !s.is_finite() {
        return None;
    }
    q.iter_mut().for_each(|x| *x /= s);
    Some(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{gjs, Distribution};

    fn dist(v: &[f64]) -> Distribution {
        Distribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn single_identity_term_is_minimized_at_the_target() {
        let w = Channel::identity(3);
        let r = [0.2, 0.5, 0.3];
        let cfg = SolverConfig::default();
        let res = min_weighted_kl(
            &[KlTerm { weight: 1.0, target: &r, channel: &w }],
            None,
            None,
            &cfg,
        );
        assert!(res.converged);
        assert!(res.value < 1e-9);
        for (a, b) in res.p.iter().zip(&r) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn two_identity_terms_recover_the_jensen_shannon_value() {
        // min_P D(q||P) + alpha D(qt||P) has the closed-form optimum
        // P = (q + alpha qt)/(1+alpha) with value gjs(qt, q, alpha).
        let w = Channel::identity(2);
        let q = dist(&[0.8, 0.2]);
        let qt = dist(&[0.3, 0.7]);
        let cfg = SolverConfig::default();
        for &alpha in &[0.3, 1.0, 4.0, 25.0] {
            let res = min_weighted_kl(
                &[
                    KlTerm { weight: 1.0, target: q.as_slice(), channel: &w },
                    KlTerm { weight: alpha, target: qt.as_slice(), channel: &w },
                ],
                None,
                None,
                &cfg,
            );
            let expect = gjs(&qt, &q, alpha).unwrap();
            assert!(res.converged, "alpha = {alpha}");
            assert!((res.value - expect).abs() < 1e-7, "alpha = {alpha}: {} vs {expect}", res.value);
        }
    }

    #[test]
    fn noisy_channel_matches_dense_line_search() {
        let w = Channel::new(vec![vec![0.9, 0.1], vec![0.25, 0.75]]).unwrap();
        let r = [0.4, 0.6];
        let cfg = SolverConfig::default();
        let res = min_weighted_kl(
            &[KlTerm { weight: 1.0, target: &r, channel: &w }],
            None,
            None,
            &cfg,
        );
        let mut best = f64::INFINITY;
        for i in 0..=200_000 {
            let p0 = i as f64 / 200_000.0;
            let push = w.push_slice(&[p0, 1.0 - p0]);
            best = best.min(kl_slices(&r, &push));
        }
        assert!((res.value - best).abs() < 1e-7, "{} vs {best}", res.value);
    }

    #[test]
    fn zero_weights_return_initialization() {
        let w = Channel::identity(2);
        let r = [0.5, 0.5];
        let res = min_weighted_kl(
            &[KlTerm { weight: 0.0, target: &r, channel: &w }],
            None,
            None,
            &SolverConfig::default(),
        );
        assert_eq!(res.p, vec![0.5, 0.5]);
        assert_eq!(res.value, 0.0);
        assert!(res.converged);
    }

    #[test]
    fn unreachable_target_support_is_identically_infinite() {
        let w = Channel::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let r = [0.5, 0.5];
        let res = min_weighted_kl(
            &[KlTerm { weight: 1.0, target: &r, channel: &w }],
            None,
            None,
            &SolverConfig::default(),
        );
        assert!(res.value.is_infinite());
    }

    #[test]
    fn fully_pinned_slice_is_a_single_point() {
        // With M = 2 and a non-constant pinned channel, the slice is exactly
        // the anchor, so the value is the objective evaluated there.
        let bank = ChannelBank::new(vec![
            Channel::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap(),
            Channel::new(vec![vec![0.6, 0.4], vec![0.3, 0.7]]).unwrap(),
        ])
        .unwrap();
        let anchor = dist(&[0.7, 0.3]);
        let slice = MarginalSlice::new(&bank, &anchor, &[true, false]);
        assert_eq!(slice.dim(), 0);
        let target = [0.5, 0.5];
        let res = min_weighted_kl(
            &[KlTerm { weight: 1.0, target: &target, channel: bank.channel(1) }],
            Some(&slice),
            None,
            &SolverConfig::default(),
        );
        let expect = kl_slices(&target, &bank.channel(1).push_slice(anchor.as_slice()));
        assert!((res.value - expect).abs() < 1e-12);
        assert_eq!(res.p, anchor.as_slice().to_vec());
    }

    #[test]
    fn pinning_a_constant_channel_does_not_constrain() {
        // A constant-row channel maps every P to the same output law, so the
        // slice is the whole simplex and the free term is fully minimized.
        let bank = ChannelBank::new(vec![
            Channel::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap(),
            Channel::identity(2),
        ])
        .unwrap();
        let anchor = dist(&[0.9, 0.1]);
        let slice = MarginalSlice::new(&bank, &anchor, &[true, false]);
        assert_eq!(slice.dim(), 1);
        let target = [0.3, 0.7];
        let res = min_weighted_kl(
            &[KlTerm { weight: 1.0, target: &target, channel: bank.channel(1) }],
            Some(&slice),
            None,
            &SolverConfig::default(),
        );
        assert!(res.value < 1e-9, "free term should reach 0, got {}", res.value);
    }

    #[test]
    fn genuine_slice_matches_parametrized_line_search() {
        // M = 3, one pinned binary-output channel: the slice is a segment.
        let bank = ChannelBank::new(vec![
            Channel::new(vec![vec![0.9, 0.1], vec![0.2, 0.8], vec![0.5, 0.5]]).unwrap(),
            Channel::new(vec![vec![0.7, 0.3], vec![0.4, 0.6], vec![0.1, 0.9]]).unwrap(),
        ])
        .unwrap();
        let anchor = dist(&[0.3, 0.3, 0.4]);
        let slice = MarginalSlice::new(&bank, &anchor, &[true, false]);
        assert_eq!(slice.dim(), 1);
        let target = [0.15, 0.85];
        let res = min_weighted_kl(
            &[KlTerm { weight: 1.0, target: &target, channel: bank.channel(1) }],
            Some(&slice),
            None,
            &SolverConfig::default(),
        );
        // Dense search along the same segment.
        let dir = &slice.tangent[0];
        let mut best = f64::INFINITY;
        for i in -300_000..=300_000 {
            let t = i as f64 * 1e-5;
            let cand: Vec<f64> =
                anchor.as_slice().iter().zip(dir).map(|(a, d)| a + t * d).collect();
            if cand.iter().any(|&x| x < 0.0) {
                continue;
            }
            best = best.min(kl_slices(&target, &bank.channel(1).push_slice(&cand)));
        }
        assert!((res.value - best).abs() < 1e-7, "{} vs {best}", res.value);
        assert!(slice.contains(&res.p, &bank, 1e-9));
    }

    #[test]
    fn tilted_geometric_interpolates_endpoints() {
        let a = [0.8, 0.2];
        let b = [0.3, 0.7];
        let q0 = tilted_geometric(&[(&a, 1.0), (&b, 0.0)]).unwrap();
        assert!((q0[0] - 0.8).abs() < 1e-12);
        let q1 = tilted_geometric(&[(&a, 0.0), (&b, 1.0)]).unwrap();
        assert!((q1[0] - 0.3).abs() < 1e-12);
        // Zeros in any referenced support silence that symbol.
        let c = [1.0, 0.0];
        let q = tilted_geometric(&[(&a, 1.0), (&c, 1.0)]).unwrap();
        assert_eq!(q, vec![1.0, 0.0]);
    }
}
