//! Probability vectors, channels, and the divergences everything else is built on.
//!
//! All logarithms are natural, so every divergence is measured in nats.

use crate::error::{Error, Result};

/// Slack accepted on input mass before a vector is rejected outright.
const INPUT_SUM_TOL: f64 = 1e-9;
/// Entries more negative than this are rejected; anything in (-NEG_TOL, 0) is clamped to 0.
const NEG_TOL: f64 = 1e-12;

fn validate_simplex(field: &str, entries: &[f64], min_len: usize) -> Result<Vec<f64>> {
    if entries.len() < min_len {
        return Err(Error::InvalidDistribution {
            field: field.to_string(),
            reason: format!("needs at least {min_len} entries, got {}", entries.len()),
        });
    }
    let mut v = Vec::with_capacity(entries.len());
    for (i, &x) in entries.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::InvalidDistribution {
                field: field.to_string(),
                reason: format!("entry {i} is not finite"),
            });
        }
        if x < -NEG_TOL {
            return Err(Error::InvalidDistribution {
                field: field.to_string(),
                reason: format!("entry {i} is negative ({x})"),
            });
        }
        v.push(x.max(0.0));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > INPUT_SUM_TOL {
        return Err(Error::InvalidDistribution {
            field: field.to_string(),
            reason: format!("entries sum to {sum}, expected 1 within {INPUT_SUM_TOL}"),
        });
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
    Ok(v)
}

/// A probability distribution on a finite alphabet of size >= 2.
///
/// Entries are nonnegative and renormalized to sum to exactly 1 (in floating
/// point) at construction. Inputs whose mass differs from 1 by more than 1e-9
/// are rejected rather than silently fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    p: Vec<f64>,
}

impl Distribution {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        Ok(Self { p: validate_simplex("", &entries, 2)? })
    }

    /// Like [`Distribution::new`] but names the offending config field in errors.
    pub fn new_named(field: &str, entries: Vec<f64>) -> Result<Self> {
        Ok(Self { p: validate_simplex(field, &entries, 2)? })
    }

    /// Uniform distribution on `n` symbols.
    pub fn uniform(n: usize) -> Self {
        assert!(n >= 2, "alphabet must have at least 2 symbols");
        Self { p: vec![1.0 / n as f64; n] }
    }

    /// Construct from a slice already known to be a valid simplex point.
    /// Used by solvers whose iterates are normalized by construction.
    pub(crate) fn from_normalized(p: Vec<f64>) -> Self {
        debug_assert!(p.iter().all(|&x| x >= 0.0));
        debug_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        Self { p }
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn get(&self, i: usize) -> f64 {
        self.p[i]
    }

    /// Indices carrying strictly positive mass.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.p.iter().enumerate().filter(|(_, &x)| x > 0.0).map(|(i, _)| i)
    }

    /// Mixture `(self + alpha * other) / (1 + alpha)`.
    pub fn mix(&self, other: &Distribution, alpha: f64) -> Distribution {
        assert_eq!(self.len(), other.len(), "mixture needs a common alphabet");
        let w = 1.0 + alpha;
        let p = self
            .p
            .iter()
            .zip(&other.p)
            .map(|(&x, &y)| (x + alpha * y) / w)
            .collect();
        Distribution::from_normalized(p)
    }
}

impl AsRef<[f64]> for Distribution {
    fn as_ref(&self) -> &[f64] {
        &self.p
    }
}

/// Kullback-Leibler divergence `D(P || Q)` in nats.
///
/// Terms with `P(x) = 0` contribute 0. If `P` puts mass where `Q` does not,
/// the value is `f64::INFINITY`; support violations are a legitimate extended
/// value here, never an error.
pub fn kl(p: &Distribution, q: &Distribution) -> f64 {
    assert_eq!(p.len(), q.len(), "kl needs a common alphabet");
    kl_slices(p.as_slice(), q.as_slice())
}

/// `kl` on raw normalized slices; shared with solver internals.
pub(crate) fn kl_slices(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return f64::INFINITY;
            }
            acc += pi * (pi / qi).ln();
        }
    }
    // Rounding can drive the sum of an identical pair a hair below zero.
    acc.max(0.0)
}

/// Generalized Jensen-Shannon divergence with mixing weight `alpha >= 0`:
/// `D(q || mix) + alpha * D(qt || mix)` where `mix = (q + alpha*qt)/(1+alpha)`.
///
/// Always finite: both arguments are absolutely continuous with respect to the
/// mixture. At `alpha = 0` the value is 0 for every pair.
pub fn gjs(qt: &Distribution, q: &Distribution, alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter {
            name: "alpha".into(),
            reason: format!("must be finite and >= 0, got {alpha}"),
        });
    }
    assert_eq!(qt.len(), q.len(), "gjs needs a common alphabet");
    let mix = q.mix(qt, alpha);
    Ok(kl(q, &mix) + alpha * kl(qt, &mix))
}

/// A discrete memoryless channel: a row-stochastic matrix with `m_in` rows
/// (inputs) and `l_out` columns (outputs), `l_out >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    rows: Vec<Vec<f64>>,
    l_out: usize,
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new_named("", rows)
    }

    pub fn new_named(field: &str, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InvalidChannel {
                field: field.to_string(),
                reason: format!("needs at least 2 input rows, got {}", rows.len()),
            });
        }
        let l_out = rows[0].len();
        let mut validated = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != l_out {
                return Err(Error::InvalidChannel {
                    field: field.to_string(),
                    reason: format!("row {i} has {} entries, expected {l_out}", row.len()),
                });
            }
            let row = validate_simplex(&format!("{field}[{i}]"), &row, 2).map_err(|e| {
                Error::InvalidChannel { field: field.to_string(), reason: e.to_string() }
            })?;
            validated.push(row);
        }
        Ok(Self { rows: validated, l_out })
    }

    /// Identity channel on `n` symbols.
    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { rows, l_out: n }
    }

    pub fn n_inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.l_out
    }

    /// `W(z | x)`.
    pub fn prob(&self, x: usize, z: usize) -> f64 {
        self.rows[x][z]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }

    /// Output distribution of `p` sent through the channel.
    pub fn push(&self, p: &Distribution) -> Distribution {
        assert_eq!(p.len(), self.n_inputs(), "pushforward needs len(P) == channel inputs");
        Distribution::from_normalized(self.push_slice(p.as_slice()))
    }

    pub(crate) fn push_slice(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.l_out];
        for (x, row) in self.rows.iter().enumerate() {
            let px = p[x];
            if px > 0.0 {
                for (z, &w) in row.iter().enumerate() {
                    out[z] += px * w;
                }
            }
        }
        // Mass is conserved up to rounding; pin the total so downstream
        // simplex checks never see drift.
        let sum: f64 = out.iter().sum();
        for v in out.iter_mut() {
            *v /= sum;
        }
        out
    }

    /// True when every output symbol has some input mapped to it with
    /// probability exactly 1 (within floating-point slack).
    pub fn has_deterministic_cover(&self) -> bool {
        (0..self.l_out)
            .all(|z| self.rows.iter().any(|row| (row[z] - 1.0).abs() <= 1e-12))
    }

    pub fn is_identity(&self) -> bool {
        self.n_inputs() == self.l_out
            && self
                .rows
                .iter()
                .enumerate()
                .all(|(i, row)| row.iter().enumerate().all(|(j, &w)| {
                    (w - if i == j { 1.0 } else { 0.0 }).abs() <= 1e-12
                }))
    }
}

/// Pushforward `P W`: the output law of `P` through `W`.
pub fn pushforward(p: &Distribution, w: &Channel) -> Distribution {
    w.push(p)
}

/// The ordered collection of channels available to the sensors, all sharing
/// one input alphabet and one output alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelBank {
    channels: Vec<Channel>,
}

impl ChannelBank {
    pub fn new(channels: Vec<Channel>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::InvalidChannel {
                field: "channels".into(),
                reason: "bank must hold at least one channel".into(),
            });
        }
        let m = channels[0].n_inputs();
        let l = channels[0].n_outputs();
        for (k, ch) in channels.iter().enumerate() {
            if ch.n_inputs() != m || ch.n_outputs() != l {
                return Err(Error::DimensionMismatch(format!(
                    "channel {k} is {}x{}, expected {m}x{l}",
                    ch.n_inputs(),
                    ch.n_outputs()
                )));
            }
        }
        Ok(Self { channels })
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n_inputs(&self) -> usize {
        self.channels[0].n_inputs()
    }

    pub fn n_outputs(&self) -> usize {
        self.channels[0].n_outputs()
    }

    pub fn channel(&self, k: usize) -> &Channel {
        &self.channels[k]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Channel> {
        self.channels.iter()
    }

    /// Every output reachable deterministically in every channel.
    pub fn has_deterministic_cover(&self) -> bool {
        self.channels.iter().all(|c| c.has_deterministic_cover())
    }
}

/// Nonnegative weights over the channel index set, summing to 1.
/// Unlike [`Distribution`], a single-channel (length-1) vector is legal.
#[derive(Debug, Clone, PartialEq)]
pub struct Proportions {
    w: Vec<f64>,
}

impl Proportions {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::new_named("", weights)
    }

    pub fn new_named(field: &str, weights: Vec<f64>) -> Result<Self> {
        Ok(Self { w: validate_simplex(field, &weights, 1)? })
    }

    /// All mass on channel `k` of `n`.
    pub fn point_mass(k: usize, n: usize) -> Self {
        assert!(k < n);
        let mut w = vec![0.0; n];
        w[k] = 1.0;
        Self { w }
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n >= 1);
        Self { w: vec![1.0 / n as f64; n] }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, k: usize) -> f64 {
        self.w[k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.w.iter().enumerate().filter(|(_, &x)| x > 0.0).map(|(i, _)| i)
    }
}
