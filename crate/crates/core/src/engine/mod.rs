//! Error-exponent computations for binary and m-ary detection instances.
//!
//! Every optimization here is a convex program over tuples of output-alphabet
//! distributions, coupled to input-alphabet distributions through channel
//! pushforwards. Constrained problems are solved by scalarizing the constraint
//! with a dual multiplier, bisection on the multiplier, and block-coordinate
//! descent inside: output blocks have closed-form tilted updates, input blocks
//! reduce to the kernel in [`crate::solver`].

pub mod binary;
pub mod mary;

use crate::error::{Error, Result};
use crate::prob::{ChannelBank, Distribution, Proportions};

/// How tightly a scalarized constraint must hug its threshold before the dual
/// search stops.
pub(crate) const ACTIVITY_TOL: f64 = 1e-9;

fn validate_weights(name: &str, w: &Proportions, k: usize) -> Result<()> {
    if w.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "{name} has {} entries for {k} channels",
            w.len()
        )));
    }
    Ok(())
}

fn validate_scalars(alpha: f64, lambda: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter {
            name: "alpha".into(),
            reason: format!("must be finite and > 0, got {alpha}"),
        });
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter {
            name: "lambda".into(),
            reason: format!("must be finite and > 0, got {lambda}"),
        });
    }
    Ok(())
}

/// A two-hypothesis detection instance: source laws `p1`, `p2` on the input
/// alphabet, a channel bank, sensing proportions `a` (test) and `b`
/// (training), training-to-test ratio `alpha`, and threshold `lambda`.
#[derive(Debug, Clone)]
pub struct BinaryInstance {
    pub p1: Distribution,
    pub p2: Distribution,
    pub bank: ChannelBank,
    pub a: Proportions,
    pub b: Proportions,
    pub alpha: f64,
    pub lambda: f64,
    p1_push: Vec<Vec<f64>>,
    p2_push: Vec<Vec<f64>>,
}

impl BinaryInstance {
    pub fn new(
        p1: Distribution,
        p2: Distribution,
        bank: ChannelBank,
        a: Proportions,
        b: Proportions,
        alpha: f64,
        lambda: f64,
    ) -> Result<Self> {
        if p1.len() != bank.n_inputs() || p2.len() != bank.n_inputs() {
            return Err(Error::DimensionMismatch(format!(
                "source laws live on {} symbols, channels expect {}",
                p1.len(),
                bank.n_inputs()
            )));
        }
        validate_weights("a", &a, bank.len())?;
        validate_weights("b", &b, bank.len())?;
        validate_scalars(alpha, lambda)?;
        let p1_push = bank.iter().map(|c| c.push_slice(p1.as_slice())).collect();
        let p2_push = bank.iter().map(|c| c.push_slice(p2.as_slice())).collect();
        Ok(Self { p1, p2, bank, a, b, alpha, lambda, p1_push, p2_push })
    }

    pub fn n_channels(&self) -> usize {
        self.bank.len()
    }

    /// Output law of `p1` through channel `k`.
    pub fn push1(&self, k: usize) -> &[f64] {
        &self.p1_push[k]
    }

    /// Output law of `p2` through channel `k`.
    pub fn push2(&self, k: usize) -> &[f64] {
        &self.p2_push[k]
    }

    /// Same instance with different proportions; pushforwards are reused.
    pub fn with_proportions(&self, a: Proportions, b: Proportions) -> Result<Self> {
        validate_weights("a", &a, self.bank.len())?;
        validate_weights("b", &b, self.bank.len())?;
        let mut out = self.clone();
        out.a = a;
        out.b = b;
        Ok(out)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        validate_scalars(self.alpha, lambda)?;
        let mut out = self.clone();
        out.lambda = lambda;
        Ok(out)
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        validate_scalars(alpha, self.lambda)?;
        let mut out = self.clone();
        out.alpha = alpha;
        Ok(out)
    }
}

/// An m-hypothesis instance with rejection. `p[j]` is the source law under
/// hypothesis `j` (0-indexed internally, reported 1-indexed in displays).
#[derive(Debug, Clone)]
pub struct MaryInstance {
    pub p: Vec<Distribution>,
    pub bank: ChannelBank,
    pub a: Proportions,
    pub b: Proportions,
    pub alpha: f64,
    pub lambda: f64,
    pushes: Vec<Vec<Vec<f64>>>,
}

impl MaryInstance {
    pub fn new(
        p: Vec<Distribution>,
        bank: ChannelBank,
        a: Proportions,
        b: Proportions,
        alpha: f64,
        lambda: f64,
    ) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "p".into(),
                reason: format!("needs at least 2 hypotheses, got {}", p.len()),
            });
        }
        for (j, pj) in p.iter().enumerate() {
            if pj.len() != bank.n_inputs() {
                return Err(Error::DimensionMismatch(format!(
                    "hypothesis {} lives on {} symbols, channels expect {}",
                    j + 1,
                    pj.len(),
                    bank.n_inputs()
                )));
            }
        }
        validate_weights("a", &a, bank.len())?;
        validate_weights("b", &b, bank.len())?;
        validate_scalars(alpha, lambda)?;
        let pushes = p
            .iter()
            .map(|pj| bank.iter().map(|c| c.push_slice(pj.as_slice())).collect())
            .collect();
        Ok(Self { p, bank, a, b, alpha, lambda, pushes })
    }

    pub fn n_hypotheses(&self) -> usize {
        self.p.len()
    }

    pub fn n_channels(&self) -> usize {
        self.bank.len()
    }

    /// Output law of hypothesis `j` through channel `k`.
    pub fn push(&self, j: usize, k: usize) -> &[f64] {
        &self.pushes[j][k]
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        validate_scalars(self.alpha, lambda)?;
        let mut out = self.clone();
        out.lambda = lambda;
        Ok(out)
    }

    pub fn with_proportions(&self, a: Proportions, b: Proportions) -> Result<Self> {
        validate_weights("a", &a, self.bank.len())?;
        validate_weights("b", &b, self.bank.len())?;
        let mut out = self.clone();
        out.a = a;
        out.b = b;
        Ok(out)
    }
}

/// Per-channel test and training types entering the binary objective:
/// `q[k]` for the test group, `q1[k]`/`q2[k]` for the two training groups.
#[derive(Debug, Clone)]
pub struct DistributionTriple {
    pub q: Vec<Distribution>,
    pub q1: Vec<Distribution>,
    pub q2: Vec<Distribution>,
}

impl DistributionTriple {
    pub fn new(q: Vec<Distribution>, q1: Vec<Distribution>, q2: Vec<Distribution>) -> Result<Self> {
        if q.len() != q1.len() || q.len() != q2.len() || q.is_empty() {
            return Err(Error::DimensionMismatch(
                "triple components must share one nonempty channel count".into(),
            ));
        }
        Ok(Self { q, q1, q2 })
    }
}

/// Optimizing distributions attached to an exponent value: the test blocks
/// `q[k]` and one row of training blocks per training sequence.
#[derive(Debug, Clone, Default)]
pub struct Minimizers {
    pub q: Vec<Distribution>,
    pub trains: Vec<Vec<Distribution>>,
}

/// Result of one exponent computation.
///
/// `feasible == false` exactly when the constraint set is empty, and then
/// `value` is `f64::INFINITY`. `residual` is the distance of the scalarized
/// constraint from its threshold at the reported point (0 for closed forms).
#[derive(Debug, Clone)]
pub struct ExponentResult {
    pub value: f64,
    pub optimizers: Minimizers,
    pub duals: Vec<f64>,
    pub feasible: bool,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    /// For pairwise-minimized m-ary exponents: the argmin constraint pair,
    /// smallest lexicographic pair on ties (0-indexed).
    pub witness_pair: Option<(usize, usize)>,
}

impl ExponentResult {
    pub(crate) fn zero(optimizers: Minimizers, duals_len: usize) -> Self {
        Self {
            value: 0.0,
            optimizers,
            duals: vec![0.0; duals_len],
            feasible: true,
            converged: true,
            iterations: 0,
            residual: 0.0,
            witness_pair: None,
        }
    }

    pub(crate) fn infeasible(duals_len: usize) -> Self {
        Self {
            value: f64::INFINITY,
            optimizers: Minimizers::default(),
            duals: vec![0.0; duals_len],
            feasible: false,
            converged: true,
            iterations: 0,
            residual: 0.0,
            witness_pair: None,
        }
    }

    /// The invariant every constructor maintains.
    pub fn consistent(&self) -> bool {
        self.feasible == self.value.is_finite()
    }
}
