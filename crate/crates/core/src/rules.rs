//! Fusion-center decision rules.
//!
//! Every test here is a deterministic function of observed partial types: the
//! binary likelihood-style test built on [`min_ld`], its single-statistic
//! reduction for one noiseless channel, the variant for channel banks with a
//! deterministic cover, and two m-ary tests with a rejection option. Test
//! statistics are always evaluated with the *realized* group weights (counts
//! divided by the test length), so groups that received no samples contribute
//! nothing. Thresholds are used raw or with a finite-sample slack term that
//! shrinks like `log n / n`; the slack buys a hard bound of `exp(-n lambda)`
//! on the controlled error probabilities at every finite `n`.
//!
//! Index convention: hypotheses are 0-based in code (`Hypothesis(0)` is the
//! first) and 1-based in display output (`H1`).

use crate::empirical::PartialTypeVector;
use crate::engine::binary::{min_ld, LdContext};
use crate::engine::mary::{tilde_ld_j, MaryTypes};
use crate::engine::{BinaryInstance, DistributionTriple, MaryInstance};
use crate::error::{Error, Result};
use crate::prob::{gjs, Distribution, Proportions};
use crate::solver::{min_weighted_kl, KlTerm, SolverConfig};

/// Verdict of a fusion-center test.
///
/// `Reject` is only producible by the rejection-capable m-ary tests; the
/// binary tests always commit to a hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestOutcome {
    /// Accept hypothesis `i` (0-based).
    Hypothesis(usize),
    /// Decline to match the test sequence with any training source.
    Reject,
}

impl std::fmt::Display for TestOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestOutcome::Hypothesis(i) => write!(f, "H{}", i + 1),
            TestOutcome::Reject => write!(f, "Reject"),
        }
    }
}

/// How a nominal threshold is turned into the one a test actually compares
/// against.
#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdMode {
    /// Use the nominal threshold unchanged.
    Raw,
    /// Add the finite-sample slack `c_n / n` where
    /// `c_n = sum_k L (log(n a_k + 1) + m log(alpha n b_k + 1))`,
    /// the polynomial bound on the number of distinct partial type vectors.
    Adjusted {
        /// Test sequence length.
        n: usize,
        /// Training-to-test length ratio.
        alpha: f64,
        /// Test group proportions.
        a: Proportions,
        /// Training group proportions.
        b: Proportions,
        /// Output alphabet size `L`.
        n_outputs: usize,
    },
}

/// Effective threshold for an `m`-hypothesis test.
///
/// Raw mode returns `lambda`. Adjusted mode returns `lambda + c_n / n`; the
/// binary tests use `m = 2`. The slack vanishes as `n` grows, so both modes
/// agree asymptotically.
pub fn threshold(lambda: f64, mode: &ThresholdMode, m: usize) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "lambda".into(),
            reason: format!("threshold must be positive and finite, got {lambda}"),
        });
    }
    if m < 2 {
        return Err(Error::InvalidParameter {
            name: "m".into(),
            reason: format!("a test discriminates at least 2 hypotheses, got {m}"),
        });
    }
    match mode {
        ThresholdMode::Raw => Ok(lambda),
        ThresholdMode::Adjusted { n, alpha, a, b, n_outputs } => {
            if *n == 0 {
                return Err(Error::InvalidParameter {
                    name: "n".into(),
                    reason: "adjusted threshold needs a positive sample count".into(),
                });
            }
            if !(*alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "alpha".into(),
                    reason: format!("must be positive and finite, got {alpha}"),
                });
            }
            if *n_outputs < 2 {
                return Err(Error::InvalidParameter {
                    name: "n_outputs".into(),
                    reason: format!("output alphabet needs at least 2 symbols, got {n_outputs}"),
                });
            }
            if a.len() != b.len() {
                return Err(Error::DimensionMismatch(format!(
                    "test proportions over {} groups, training over {}",
                    a.len(),
                    b.len()
                )));
            }
            let nf = *n as f64;
            let l = *n_outputs as f64;
            let mf = m as f64;
            let mut c_n = 0.0;
            for k in 0..a.len() {
                c_n += l
                    * ((nf * a.get(k) + 1.0).ln() + mf * (alpha * nf * b.get(k) + 1.0).ln());
            }
            Ok(lambda + c_n / nf)
        }
    }
}

/// Realized weights of an observed dataset: per-group test shares, per-group
/// training shares, and the training-to-test length ratio.
struct EmpiricalWeights {
    a: Proportions,
    b: Proportions,
    alpha: f64,
}

/// Derive the weights a statistic should use from the observed counts.
///
/// All training type vectors must agree on their per-group counts: the model
/// routes every training sequence through the same group assignment.
fn empirical_weights(
    test: &PartialTypeVector,
    trains: &[&PartialTypeVector],
) -> Result<EmpiricalWeights> {
    let k = test.n_groups();
    let n = test.n();
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "test_types".into(),
            reason: "test sequence has no samples".into(),
        });
    }
    let first = trains.first().expect("at least one training vector");
    let cap_n = first.n();
    if cap_n == 0 {
        return Err(Error::InvalidParameter {
            name: "train_types".into(),
            reason: "training sequences have no samples".into(),
        });
    }
    for tv in trains {
        if tv.n_groups() != k {
            return Err(Error::DimensionMismatch(format!(
                "training vector has {} groups, test has {k}",
                tv.n_groups()
            )));
        }
        for g in 0..k {
            if tv.group(g).total() != first.group(g).total() {
                return Err(Error::DimensionMismatch(
                    "training sequences must share one group assignment".into(),
                ));
            }
        }
    }
    let a = test.proportions();
    let b = first.proportions();
    Ok(EmpiricalWeights { a, b, alpha: cap_n as f64 / n as f64 })
}

/// Group types as distributions, with empty groups standing in as uniform.
/// The placeholders are never read: empty groups carry weight zero and every
/// statistic drops zero-weight terms before touching the target.
fn group_laws(tv: &PartialTypeVector) -> Vec<Distribution> {
    let l = tv.alphabet();
    tv.iter().map(|g| g.distribution().unwrap_or_else(|| Distribution::uniform(l))).collect()
}

fn check_shapes(tv: &PartialTypeVector, what: &str, k: usize, l: usize) -> Result<()> {
    if tv.n_groups() != k {
        return Err(Error::DimensionMismatch(format!(
            "{what} has {} groups, bank has {k} channels",
            tv.n_groups()
        )));
    }
    if tv.alphabet() != l {
        return Err(Error::DimensionMismatch(format!(
            "{what} over {} symbols, channels emit {l}",
            tv.alphabet()
        )));
    }
    Ok(())
}

/// Binary test: accept the first hypothesis iff the joint divergence
/// statistic [`min_ld`] of the observed types is at most `thr`.
///
/// The statistic uses the realized weights of the dataset, so it is exactly
/// the normalized log-size of the type class that explains the data with one
/// common source behind the test and first-training types.
pub fn binary_test(
    test_types: &PartialTypeVector,
    train1: &PartialTypeVector,
    train2: &PartialTypeVector,
    inst: &BinaryInstance,
    thr: f64,
    cfg: &SolverConfig,
) -> Result<TestOutcome> {
    let k = inst.bank.len();
    let l = inst.bank.n_outputs();
    check_shapes(test_types, "test types", k, l)?;
    check_shapes(train1, "first training types", k, l)?;
    check_shapes(train2, "second training types", k, l)?;
    let w = empirical_weights(test_types, &[train1, train2])?;
    let triple =
        DistributionTriple::new(group_laws(test_types), group_laws(train1), group_laws(train2))?;
    let ctx = LdContext { a: &w.a, b: &w.b, alpha: w.alpha, bank: &inst.bank };
    let res = min_ld(&triple, &ctx, cfg);
    if !res.converged {
        return Err(Error::NonConvergence(format!(
            "binary test statistic stalled at residual {:.3e}",
            res.residual
        )));
    }
    Ok(if res.value <= thr { TestOutcome::Hypothesis(0) } else { TestOutcome::Hypothesis(1) })
}

/// Single-channel noiseless binary test: accept the first hypothesis iff
/// `GJS(train1, test, alpha) <= thr`.
pub fn gutman_binary(
    test_type: &Distribution,
    train1_type: &Distribution,
    alpha: f64,
    thr: f64,
) -> Result<TestOutcome> {
    let stat = gjs(train1_type, test_type, alpha)?;
    Ok(if stat <= thr { TestOutcome::Hypothesis(0) } else { TestOutcome::Hypothesis(1) })
}

/// Binary test for banks with a deterministic cover: the second training
/// sequence carries no information there, so the statistic keeps only the
/// blocks coupling the test types with the first training types.
///
/// The caller asserts the modeling assumption; the bank itself is checked.
pub fn vi_test(
    test_types: &PartialTypeVector,
    train1: &PartialTypeVector,
    inst: &BinaryInstance,
    thr: f64,
    cfg: &SolverConfig,
) -> Result<TestOutcome> {
    if !inst.bank.has_deterministic_cover() {
        return Err(Error::InvalidChannel {
            field: "bank".into(),
            reason: "this test needs every output reachable deterministically".into(),
        });
    }
    let k = inst.bank.len();
    let l = inst.bank.n_outputs();
    check_shapes(test_types, "test types", k, l)?;
    check_shapes(train1, "first training types", k, l)?;
    let w = empirical_weights(test_types, &[train1])?;
    let q = group_laws(test_types);
    let y1 = group_laws(train1);
    let mut terms = Vec::with_capacity(2 * k);
    for i in 0..k {
        let ak = w.a.get(i);
        let bk = w.alpha * w.b.get(i);
        if ak > 0.0 {
            terms.push(KlTerm { weight: ak, target: q[i].as_slice(), channel: inst.bank.channel(i) });
        }
        if bk > 0.0 {
            terms.push(KlTerm {
                weight: bk,
                target: y1[i].as_slice(),
                channel: inst.bank.channel(i),
            });
        }
    }
    let res = min_weighted_kl(&terms, None, None, cfg);
    if !res.converged {
        return Err(Error::NonConvergence(format!(
            "cover test statistic stalled at residual {:.3e}",
            res.residual
        )));
    }
    Ok(if res.value <= thr { TestOutcome::Hypothesis(0) } else { TestOutcome::Hypothesis(1) })
}

/// The m-ary test statistics together with the two leading indices.
#[derive(Debug, Clone, PartialEq)]
pub struct MaryStatistics {
    /// `values[j]` scores hypothesis `j`: the joint divergence statistic in
    /// which the test types are attributed to training source `j`.
    pub values: Vec<f64>,
    /// Index of the smallest value (smallest index on ties).
    pub i1: usize,
    /// Index of the second smallest value over `j != i1` (smallest index on
    /// ties).
    pub i2: usize,
}

/// Score every hypothesis on the observed types.
///
/// `values[j]` is the statistic of [`tilde_ld_j`] under the realized weights.
/// All training vectors must share one group assignment.
pub fn mary_statistics(
    test_types: &PartialTypeVector,
    train_types: &[PartialTypeVector],
    inst: &MaryInstance,
    cfg: &SolverConfig,
) -> Result<MaryStatistics> {
    let m = inst.n_hypotheses();
    if train_types.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} training type vectors for {m} hypotheses",
            train_types.len()
        )));
    }
    let k = inst.bank.len();
    let l = inst.bank.n_outputs();
    check_shapes(test_types, "test types", k, l)?;
    for tv in train_types {
        check_shapes(tv, "training types", k, l)?;
    }
    let refs: Vec<&PartialTypeVector> = train_types.iter().collect();
    let w = empirical_weights(test_types, &refs)?;
    let types =
        MaryTypes::new(group_laws(test_types), train_types.iter().map(group_laws).collect())?;
    let ctx = LdContext { a: &w.a, b: &w.b, alpha: w.alpha, bank: &inst.bank };
    let mut values = Vec::with_capacity(m);
    for j in 0..m {
        let res = tilde_ld_j(&types, j, &ctx, cfg);
        if !res.converged {
            return Err(Error::NonConvergence(format!(
                "statistic for hypothesis {} stalled at residual {:.3e}",
                j + 1,
                res.residual
            )));
        }
        values.push(res.value);
    }
    let (i1, i2) = leading_indices(&values);
    Ok(MaryStatistics { values, i1, i2 })
}

/// Indices of the minimum and second minimum, ties to the smallest index.
pub fn leading_indices(values: &[f64]) -> (usize, usize) {
    assert!(values.len() >= 2, "need at least two hypotheses");
    let mut i1 = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[i1] {
            i1 = i;
        }
    }
    let mut i2 = usize::MAX;
    for (i, &v) in values.iter().enumerate() {
        if i == i1 {
            continue;
        }
        if i2 == usize::MAX || v < values[i2] {
            i2 = i;
        }
    }
    (i1, i2)
}

/// m-ary test with rejection: accept the best-scoring hypothesis when the
/// runner-up is clearly worse, otherwise reject.
///
/// Equivalently, reject exactly when at least two statistics are at most
/// `thr`: low scores for two sources mean the data cannot single one out.
pub fn unnikrishnan_test(stats: &MaryStatistics, thr: f64) -> TestOutcome {
    if stats.values[stats.i2] > thr {
        TestOutcome::Hypothesis(stats.i1)
    } else {
        TestOutcome::Reject
    }
}

/// Pairwise divergence scores for the single-channel noiseless m-ary test:
/// `GJS(train_type[i], test_type, alpha)` for each source `i`.
pub fn gjs_statistics(
    test_type: &Distribution,
    train_types: &[Distribution],
    alpha: f64,
) -> Result<Vec<f64>> {
    train_types.iter().map(|t| gjs(t, test_type, alpha)).collect()
}

/// Classical single-channel m-ary test with rejection, asymmetric in the
/// first hypothesis.
///
/// Accept the first hypothesis when every other score exceeds `thr`; accept
/// hypothesis `j > 0` when it alone scores at most `thr`; reject when two or
/// more scores are at most `thr`. Its rejection region coincides with that of
/// [`unnikrishnan_test`] on the same scores.
pub fn gutman_mary(gjs_values: &[f64], thr: f64) -> Result<TestOutcome> {
    if gjs_values.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "gjs_values".into(),
            reason: format!("need at least 2 scores, got {}", gjs_values.len()),
        });
    }
    let low: Vec<usize> =
        gjs_values.iter().enumerate().filter(|(_, &v)| v <= thr).map(|(i, _)| i).collect();
    Ok(match low.as_slice() {
        [] | [0] => TestOutcome::Hypothesis(0),
        [j] => TestOutcome::Hypothesis(*j),
        _ => TestOutcome::Reject,
    })
}
