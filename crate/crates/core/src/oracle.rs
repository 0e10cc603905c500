//! Brute-force reference evaluators built on simplex lattices.
//!
//! Everything here recomputes exponents by direct enumeration: lattice scans
//! for minimizations, tables of pairwise divergences for constraint checks,
//! and a locally built null-space parametrization for pinned-marginal sets.
//! None of it touches the descent/bisection machinery in [`crate::solver`] or
//! [`crate::engine`], so agreement between the two routes is meaningful
//! evidence. Guards keep every call inside an enumerable budget; oversized
//! instances return [`Error::Guard`] rather than silently degrading.

use rayon::prelude::*;

use crate::engine::binary::LdContext;
use crate::engine::mary::MaryTypes;
use crate::engine::{BinaryInstance, DistributionTriple, MaryInstance};
use crate::error::{Error, Result};
use crate::prob::{kl_slices, Channel, ChannelBank, Distribution};

/// All lattice points with the given spacing on the `dim`-simplex, i.e.
/// nonnegative integer compositions of `round(1/resolution)` scaled back.
pub fn simplex_grid(dim: usize, resolution: f64) -> Result<Vec<Vec<f64>>> {
    if dim < 2 {
        return Err(Error::InvalidParameter {
            name: "dim".into(),
            reason: "simplex needs at least two coordinates".into(),
        });
    }
    if !(resolution > 0.0 && resolution <= 0.5) {
        return Err(Error::InvalidParameter {
            name: "resolution".into(),
            reason: format!("{resolution} outside (0, 0.5]"),
        });
    }
    let r = (1.0 / resolution).round() as usize;
    let mut out = Vec::new();
    let mut counts = vec![0usize; dim];
    fn rec(slot: usize, left: usize, counts: &mut [usize], r: usize, out: &mut Vec<Vec<f64>>) {
        if slot + 1 == counts.len() {
            counts[slot] = left;
            out.push(counts.iter().map(|&c| c as f64 / r as f64).collect());
            return;
        }
        for c in 0..=left {
            counts[slot] = c;
            rec(slot + 1, left - c, counts, r, out);
        }
    }
    rec(0, r, &mut counts, r, &mut out);
    Ok(out)
}

fn guard(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Guard(format!("reference evaluator limit: {what}")))
    }
}

/// Divergence table `T[x][j] = D(outs[x] || push of ins[j])` for one channel.
fn divergence_table(outs: &[Vec<f64>], ins: &[Vec<f64>], ch: &Channel) -> Vec<Vec<f64>> {
    let pushes: Vec<Vec<f64>> = ins.iter().map(|p| ch.push_slice(p)).collect();
    outs.par_iter()
        .map(|o| pushes.iter().map(|q| kl_slices(o, q)).collect())
        .collect()
}

/// Minimum of `ld` over both candidate laws by independent lattice scans of
/// the shared law and the free law.
pub fn min_ld_grid(triple: &DistributionTriple, ctx: &LdContext, resolution: f64) -> Result<f64> {
    let m = ctx.bank.n_inputs();
    guard(m <= 3, "input alphabet at most 3 for lattice scans")?;
    guard(ctx.bank.len() <= 4, "at most 4 channels")?;
    let grid = simplex_grid(m, resolution)?;
    let k = ctx.bank.len();
    let shared = grid
        .par_iter()
        .map(|p| {
            let mut acc = 0.0;
            for i in 0..k {
                let push = ctx.bank.channel(i).push_slice(p);
                let ak = ctx.a.get(i);
                let bk = ctx.alpha * ctx.b.get(i);
                if ak > 0.0 {
                    acc += ak * kl_slices(triple.q[i].as_slice(), &push);
                }
                if bk > 0.0 {
                    acc += bk * kl_slices(triple.q1[i].as_slice(), &push);
                }
            }
            acc
        })
        .reduce(|| f64::INFINITY, f64::min);
    let free = grid
        .par_iter()
        .map(|p| {
            let mut acc = 0.0;
            for i in 0..k {
                let bk = ctx.alpha * ctx.b.get(i);
                if bk > 0.0 {
                    let push = ctx.bank.channel(i).push_slice(p);
                    acc += bk * kl_slices(triple.q2[i].as_slice(), &push);
                }
            }
            acc
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(shared + free)
}

/// Minimum of the hypothesis-`j` m-ary statistic over its candidate laws:
/// one independent lattice scan per law, with the test types entering only
/// the `j`-th block's scan.
pub fn tilde_ld_grid(
    types: &MaryTypes,
    j: usize,
    ctx: &LdContext,
    resolution: f64,
) -> Result<f64> {
    let m_in = ctx.bank.n_inputs();
    guard(m_in <= 3, "input alphabet at most 3 for lattice scans")?;
    guard(ctx.bank.len() <= 4, "at most 4 channels")?;
    let grid = simplex_grid(m_in, resolution)?;
    let k = ctx.bank.len();
    let mut total = 0.0;
    for i in 0..types.n_hypotheses() {
        let best = grid
            .par_iter()
            .map(|p| {
                let mut acc = 0.0;
                for t in 0..k {
                    let push = ctx.bank.channel(t).push_slice(p);
                    let ak = ctx.a.get(t);
                    let bk = ctx.alpha * ctx.b.get(t);
                    if i == j && ak > 0.0 {
                        acc += ak * kl_slices(types.q[t].as_slice(), &push);
                    }
                    if bk > 0.0 {
                        acc += bk * kl_slices(types.trains[i][t].as_slice(), &push);
                    }
                }
                acc
            })
            .reduce(|| f64::INFINITY, f64::min);
        total += best;
    }
    Ok(total)
}

/// Orthonormal basis (own Gram-Schmidt, independent of the solver's) for the
/// null space of the rows, then lattice points of the affine set
/// `anchor + span(basis)` that stay inside the simplex.
fn affine_slice_points(
    anchor: &[f64],
    rows: &[Vec<f64>],
    resolution: f64,
) -> Result<Vec<Vec<f64>>> {
    let m = anchor.len();
    // Orthonormalize the rows, then extend to the complement.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let push_orth = |v: &[f64], basis: &mut Vec<Vec<f64>>| {
        let mut u = v.to_vec();
        for _ in 0..2 {
            for b in basis.iter() {
                let c: f64 = u.iter().zip(b).map(|(a, b)| a * b).sum();
                for (ui, bi) in u.iter_mut().zip(b) {
                    *ui -= c * bi;
                }
            }
        }
        let n: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-10 {
            u.iter_mut().for_each(|x| *x /= n);
            basis.push(u);
            true
        } else {
            false
        }
    };
    for r in rows {
        push_orth(r, &mut basis);
    }
    let row_rank = basis.len();
    for x in 0..m {
        let mut e = vec![0.0; m];
        e[x] = 1.0;
        push_orth(&e, &mut basis);
    }
    let tangent: Vec<Vec<f64>> = basis.split_off(row_rank);
    let dim = tangent.len();
    if dim == 0 {
        return Ok(vec![anchor.to_vec()]);
    }
    guard(dim <= 2, "pinned set dimension at most 2")?;
    // Coefficients live in a box wide enough to cover the whole simplex:
    // any simplex point is within distance sqrt(2) of the anchor.
    let half_width = 1.5f64;
    let steps = (2.0 * half_width / resolution).round() as i64;
    let coeff = |i: i64| -> f64 { -half_width + i as f64 * resolution };
    let mut pts = Vec::new();
    if dim == 1 {
        for i in 0..=steps {
            let t = coeff(i);
            let cand: Vec<f64> =
                anchor.iter().zip(&tangent[0]).map(|(a, v)| a + t * v).collect();
            if cand.iter().all(|&x| x >= -1e-12) {
                pts.push(cand.iter().map(|&x| x.max(0.0)).collect());
            }
        }
    } else {
        for i in 0..=steps {
            let t1 = coeff(i);
            for jj in 0..=steps {
                let t2 = coeff(jj);
                let cand: Vec<f64> = anchor
                    .iter()
                    .zip(&tangent[0])
                    .zip(&tangent[1])
                    .map(|((a, v1), v2)| a + t1 * v1 + t2 * v2)
                    .collect();
                if cand.iter().all(|&x| x >= -1e-12) {
                    pts.push(cand.iter().map(|&x| x.max(0.0)).collect());
                }
            }
        }
    }
    Ok(pts)
}

/// Constraint rows whose null space is the tangent of the pinned-marginal
/// set: total mass plus every pinned channel's output columns.
fn pinned_rows(bank: &ChannelBank, pinned: &[bool]) -> Vec<Vec<f64>> {
    let m = bank.n_inputs();
    let mut rows = vec![vec![1.0; m]];
    for (k, &pin) in pinned.iter().enumerate() {
        if pin {
            for z in 0..bank.n_outputs() {
                rows.push((0..m).map(|x| bank.channel(k).prob(x, z)).collect());
            }
        }
    }
    rows
}

/// Lattice version of the pinned matching cost.
pub fn kappa_grid(q: &[Distribution], inst: &BinaryInstance, resolution: f64) -> Result<f64> {
    guard(inst.bank.n_inputs() <= 3, "input alphabet at most 3")?;
    guard(inst.n_channels() <= 2, "at most 2 channels")?;
    let pinned: Vec<bool> = (0..inst.n_channels()).map(|k| inst.b.get(k) > 0.0).collect();
    let rows = pinned_rows(&inst.bank, &pinned);
    let pts = affine_slice_points(inst.p1.as_slice(), &rows, resolution)?;
    let best = pts
        .par_iter()
        .map(|p| {
            (0..inst.n_channels())
                .filter(|&k| inst.a.get(k) > 0.0)
                .map(|k| inst.a.get(k) * kl_slices(q[k].as_slice(), &inst.bank.channel(k).push_slice(p)))
                .sum::<f64>()
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best)
}

/// Lattice version of the infinite-ratio binary exponent: scan all per-channel
/// output types, keep those whose pinned matching cost stays within `lambda`,
/// and minimize the mismatch against the alternative's pushforwards.
pub fn f_infinity_grid(inst: &BinaryInstance, resolution: f64) -> Result<f64> {
    let k = inst.n_channels();
    let l = inst.bank.n_outputs();
    guard(k <= 2, "at most 2 channels")?;
    guard(l <= 2, "output alphabet at most 2")?;
    guard(inst.bank.n_inputs() <= 3, "input alphabet at most 3")?;
    let out_grid = simplex_grid(l, resolution)?;
    let n = out_grid.len();
    let pinned: Vec<bool> = (0..k).map(|i| inst.b.get(i) > 0.0).collect();
    let rows = pinned_rows(&inst.bank, &pinned);
    let slice_pts = affine_slice_points(inst.p1.as_slice(), &rows, resolution)?;
    // kappa_tab[i][x]: divergence of output point x against slice point i's
    // pushforward through channel `i`.
    let kappa_tab: Vec<Vec<Vec<f64>>> = (0..k)
        .map(|i| divergence_table(&out_grid, &slice_pts, inst.bank.channel(i)))
        .collect();
    let obj_tab: Vec<Vec<f64>> = (0..k)
        .map(|i| out_grid.iter().map(|o| kl_slices(o, inst.push2(i))).collect())
        .collect();

    let scan_one = |xs: &[usize]| -> (f64, f64) {
        // (kappa, objective) for the joint type with per-channel indices xs.
        let kappa = (0..slice_pts.len())
            .map(|j| {
                (0..k)
                    .filter(|&i| inst.a.get(i) > 0.0)
                    .map(|i| inst.a.get(i) * kappa_tab[i][xs[i]][j])
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        let obj = (0..k)
            .filter(|&i| inst.a.get(i) > 0.0)
            .map(|i| inst.a.get(i) * obj_tab[i][xs[i]])
            .sum::<f64>();
        (kappa, obj)
    };

    let best = if k == 1 {
        (0..n)
            .into_par_iter()
            .map(|x| {
                let (kp, obj) = scan_one(&[x]);
                if kp <= inst.lambda + 1e-12 {
                    obj
                } else {
                    f64::INFINITY
                }
            })
            .reduce(|| f64::INFINITY, f64::min)
    } else {
        (0..n)
            .into_par_iter()
            .map(|x1| {
                let mut local = f64::INFINITY;
                for x2 in 0..n {
                    let (kp, obj) = scan_one(&[x1, x2]);
                    if kp <= inst.lambda + 1e-12 {
                        local = local.min(obj);
                    }
                }
                local
            })
            .reduce(|| f64::INFINITY, f64::min)
    };
    Ok(best)
}

/// Lattice version of the single-alphabet two-sample exponent: scan all
/// `(test, training)` type pairs against the similarity constraint.
pub fn gutman_grid(
    p1: &Distribution,
    p2: &Distribution,
    alpha: f64,
    lambda: f64,
    resolution: f64,
) -> Result<f64> {
    let l = p1.len();
    guard(l <= 3, "alphabet at most 3")?;
    let grid = simplex_grid(l, resolution)?;
    guard(grid.len() * grid.len() <= 40_000_000, "pair scan at most 4e7 points")?;
    let n = grid.len();
    let dq: Vec<f64> = grid.iter().map(|g| kl_slices(g, p2.as_slice())).collect();
    let dt: Vec<f64> = grid.iter().map(|g| kl_slices(g, p1.as_slice())).collect();
    let best = (0..n)
        .into_par_iter()
        .map(|iq| {
            let q = &grid[iq];
            let mut local = f64::INFINITY;
            for it in 0..n {
                let t = &grid[it];
                // Similarity statistic, written out directly.
                let mut g = 0.0;
                for z in 0..l {
                    let mix = (q[z] + alpha * t[z]) / (1.0 + alpha);
                    if q[z] > 0.0 {
                        g += q[z] * (q[z] / mix).ln();
                    }
                    if t[z] > 0.0 {
                        g += alpha * t[z] * (t[z] / mix).ln();
                    }
                }
                if g <= lambda + 1e-12 {
                    local = local.min(dq[iq] + alpha * dt[it]);
                }
            }
            local
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best)
}

fn binary_tables(
    inst: &BinaryInstance,
    resolution: f64,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>, usize)> {
    let l = inst.bank.n_outputs();
    let m = inst.bank.n_inputs();
    guard(inst.n_channels() == 1, "single channel for full acceptance-region scans")?;
    guard(l <= 2, "output alphabet at most 2")?;
    guard(m <= 3, "input alphabet at most 3")?;
    let out_grid = simplex_grid(l, resolution)?;
    let in_res = if m <= 2 { resolution } else { resolution.max(0.01) };
    let in_grid = simplex_grid(m, in_res)?;
    let t = divergence_table(&out_grid, &in_grid, inst.bank.channel(0));
    let n = out_grid.len();
    // g1[x][y] = min over candidate laws of T[x][j] + alpha T[y][j];
    // g2[y] = alpha * min over candidate laws of T[y][j].
    let g1: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|x| {
            (0..n)
                .map(|y| {
                    (0..in_grid.len())
                        .map(|j| t[x][j] + inst.alpha * t[y][j])
                        .fold(f64::INFINITY, f64::min)
                })
                .collect()
        })
        .collect();
    let g2: Vec<f64> = (0..n)
        .map(|y| inst.alpha * (0..in_grid.len()).map(|j| t[y][j]).fold(f64::INFINITY, f64::min))
        .collect();
    // obj[0]: divergences against the alternative's output law (test block and
    // second training row); obj[1]: against the null's (first training row).
    let obj = vec![
        out_grid.iter().map(|o| kl_slices(o, inst.push2(0))).collect(),
        out_grid.iter().map(|o| kl_slices(o, inst.push1(0))).collect(),
    ];
    Ok((g1, obj, g2, n))
}

/// Lattice version of the finite-ratio binary exponent on one channel: scan
/// all `(test, train1, train2)` type triples, evaluating the acceptance
/// statistic from divergence tables over a candidate-law lattice.
pub fn f_alpha_grid(inst: &BinaryInstance, resolution: f64) -> Result<f64> {
    let (g1, obj, g2, n) = binary_tables(inst, resolution)?;
    let (o2, o1) = (&obj[0], &obj[1]);
    let best = (0..n)
        .into_par_iter()
        .map(|q| {
            let mut local = f64::INFINITY;
            for y1 in 0..n {
                let base = g1[q][y1];
                if base > inst.lambda + 1e-12 {
                    continue;
                }
                let part = o2[q] + inst.alpha * o1[y1];
                if part >= local {
                    continue;
                }
                for y2 in 0..n {
                    if base + g2[y2] <= inst.lambda + 1e-12 {
                        let v = part + inst.alpha * o2[y2];
                        if v < local {
                            local = v;
                        }
                    }
                }
            }
            local
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best)
}

/// Lattice version of the simplified-statistic exponent (deterministic-cover
/// channels): the second training row drops from statistic and objective.
pub fn f_alpha_vi_grid(inst: &BinaryInstance, resolution: f64) -> Result<f64> {
    guard(
        inst.bank.has_deterministic_cover(),
        "simplified statistic needs deterministically covered outputs",
    )?;
    let (g1, obj, _, n) = binary_tables(inst, resolution)?;
    let (o2, o1) = (&obj[0], &obj[1]);
    let best = (0..n)
        .into_par_iter()
        .map(|q| {
            let mut local = f64::INFINITY;
            for y1 in 0..n {
                if g1[q][y1] <= inst.lambda + 1e-12 {
                    let v = o2[q] + inst.alpha * o1[y1];
                    if v < local {
                        local = v;
                    }
                }
            }
            local
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best)
}

/// Lattice version of the m-ary rejection exponent on one channel. Training
/// blocks outside the active constraint pair sit at their own pushforwards:
/// that choice is simultaneously optimal for the objective and both
/// constraints, so the scan only ranges over the test type and the pair's
/// training types.
pub fn rejection_grid(inst: &MaryInstance, j: usize, resolution: f64) -> Result<f64> {
    let m = inst.n_hypotheses();
    guard(inst.n_channels() == 1, "single channel for full rejection scans")?;
    guard(inst.bank.n_outputs() <= 2, "output alphabet at most 2")?;
    guard(inst.bank.n_inputs() <= 3, "input alphabet at most 3")?;
    guard(m <= 4, "at most 4 hypotheses")?;
    if j >= m {
        return Err(Error::InvalidParameter {
            name: "j".into(),
            reason: format!("hypothesis index {j} out of range for {m} hypotheses"),
        });
    }
    let l = inst.bank.n_outputs();
    let out_grid = simplex_grid(l, resolution)?;
    let in_res = if inst.bank.n_inputs() <= 2 { resolution } else { resolution.max(0.01) };
    let in_grid = simplex_grid(inst.bank.n_inputs(), in_res)?;
    let t = divergence_table(&out_grid, &in_grid, inst.bank.channel(0));
    let n = out_grid.len();
    let g1: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|x| {
            (0..n)
                .map(|y| {
                    (0..in_grid.len())
                        .map(|jj| t[x][jj] + inst.alpha * t[y][jj])
                        .fold(f64::INFINITY, f64::min)
                })
                .collect()
        })
        .collect();
    let g2: Vec<f64> = (0..n)
        .map(|y| inst.alpha * (0..in_grid.len()).map(|jj| t[y][jj]).fold(f64::INFINITY, f64::min))
        .collect();
    let obj: Vec<Vec<f64>> = (0..m)
        .map(|i| out_grid.iter().map(|o| kl_slices(o, inst.push(i, 0))).collect())
        .collect();

    let mut best = f64::INFINITY;
    for ci in 0..m {
        for cl in (ci + 1)..m {
            let pair_best = (0..n)
                .into_par_iter()
                .map(|q| {
                    let mut local = f64::INFINITY;
                    for yi in 0..n {
                        let c1 = g1[q][yi];
                        if c1 > inst.lambda + 1e-12 {
                            continue;
                        }
                        for yl in 0..n {
                            // Constraint for ci couples the test type with
                            // yi; the one for cl couples it with yl.
                            if c1 + g2[yl] <= inst.lambda + 1e-12
                                && g1[q][yl] + g2[yi] <= inst.lambda + 1e-12
                            {
                                let v = obj[j][q]
                                    + inst.alpha * (obj[ci][yi] + obj[cl][yl]);
                                if v < local {
                                    local = v;
                                }
                            }
                        }
                    }
                    local
                })
                .reduce(|| f64::INFINITY, f64::min);
            best = best.min(pair_best);
        }
    }
    Ok(best)
}

/// Lattice version of the m-ary infinite-ratio exponent on one identity-like
/// channel setup: per pair, scan test types inside both pinned matching balls.
/// Returns `(value, feasible)`.
pub fn f_infinity_j_grid(
    inst: &MaryInstance,
    j: usize,
    resolution: f64,
) -> Result<(f64, bool)> {
    let m = inst.n_hypotheses();
    guard(inst.n_channels() == 1, "single channel for rejection-limit scans")?;
    guard(inst.bank.n_outputs() <= 3, "output alphabet at most 3")?;
    if j >= m {
        return Err(Error::InvalidParameter {
            name: "j".into(),
            reason: format!("hypothesis index {j} out of range for {m} hypotheses"),
        });
    }
    // With one channel the training weight sits on it, so the matching law's
    // pushforward is pinned to each hypothesis's own output law.
    let out_grid = simplex_grid(inst.bank.n_outputs(), resolution)?;
    let d: Vec<Vec<f64>> = (0..m)
        .map(|i| out_grid.iter().map(|o| kl_slices(o, inst.push(i, 0))).collect())
        .collect();
    let mut best = f64::INFINITY;
    let mut feasible = false;
    for ci in 0..m {
        for cl in (ci + 1)..m {
            for (x, _) in out_grid.iter().enumerate() {
                if d[ci][x] <= inst.lambda + 1e-12 && d[cl][x] <= inst.lambda + 1e-12 {
                    feasible = true;
                    best = best.min(d[j][x]);
                }
            }
        }
    }
    Ok((best, feasible))
}
