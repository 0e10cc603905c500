//! Monte Carlo simulation of the full sensing pipeline, plus an exact
//! small-instance evaluator.
//!
//! A trial draws a test sequence from the configured true source and one
//! training sequence from every hypothesis source, pushes each sample through
//! the channel its index map assigns, summarizes everything as partial types,
//! and hands the types to a caller-supplied test. Randomness is counter
//! based: sample streams are derived from `(seed, trial, role)`, so tallies
//! are bit-reproducible no matter how trials are scheduled.
//!
//! The exact evaluator sidesteps sampling entirely on instances small enough
//! to enumerate: tests are functions of the types alone, so summing binomial
//! type-class weights over every type combination gives the exact outcome
//! distribution.

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::SeedableRng as _;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use statrs::distribution::{Binomial, Discrete};

use crate::empirical::{index_map, IndexMap, PartialType, PartialTypeVector};
use crate::engine::{BinaryInstance, MaryInstance};
use crate::error::{Error, Result};
use crate::prob::{ChannelBank, Distribution, Proportions};
use crate::rules::TestOutcome;

/// 97.5% standard-normal quantile: two-sided 95% confidence.
const WILSON_Z: f64 = 1.959963984540054;

/// Which source generates the test sequence in a simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum TruthSelector {
    /// Test samples come from hypothesis `i`'s source (0-based).
    Hypothesis(usize),
    /// Test samples come from a source outside the hypothesis set; the
    /// ground truth is then the rejection outcome.
    Other(Distribution),
}

/// Size, length ratio, replication and seeding of one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    n: usize,
    alpha: f64,
    trials: u64,
    seed: u64,
    truth: TruthSelector,
}

impl TrialConfig {
    pub fn new(
        n: usize,
        alpha: f64,
        trials: u64,
        seed: u64,
        truth: TruthSelector,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n".into(),
                reason: "test sequences need at least one sample".into(),
            });
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "alpha".into(),
                reason: format!("must be positive and finite, got {alpha}"),
            });
        }
        if trials == 0 {
            return Err(Error::InvalidParameter {
                name: "trials".into(),
                reason: "need at least one trial".into(),
            });
        }
        Ok(Self { n, alpha, trials, seed, truth })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Training sequence length `N = ceil(alpha n)`.
    pub fn train_len(&self) -> usize {
        (self.alpha * self.n as f64).ceil() as usize
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn truth(&self) -> &TruthSelector {
        &self.truth
    }

    /// Same configuration at a different test length.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(n, self.alpha, self.trials, self.seed, self.truth.clone())
    }
}

/// The sources, channels and proportions a simulation runs against.
#[derive(Debug, Clone, PartialEq)]
pub struct SimInstance {
    pub hypotheses: Vec<Distribution>,
    pub bank: ChannelBank,
    pub a: Proportions,
    pub b: Proportions,
}

impl SimInstance {
    pub fn new(
        hypotheses: Vec<Distribution>,
        bank: ChannelBank,
        a: Proportions,
        b: Proportions,
    ) -> Result<Self> {
        if hypotheses.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "hypotheses".into(),
                reason: format!("need at least 2 sources, got {}", hypotheses.len()),
            });
        }
        let m = bank.n_inputs();
        if hypotheses.iter().any(|p| p.len() != m) {
            return Err(Error::DimensionMismatch(format!(
                "every source must live on the {m}-symbol channel input alphabet"
            )));
        }
        if a.len() != bank.len() || b.len() != bank.len() {
            return Err(Error::DimensionMismatch(format!(
                "proportions over {} and {} groups for {} channels",
                a.len(),
                b.len(),
                bank.len()
            )));
        }
        Ok(Self { hypotheses, bank, a, b })
    }

    pub fn from_binary(inst: &BinaryInstance) -> Self {
        Self {
            hypotheses: vec![inst.p1.clone(), inst.p2.clone()],
            bank: inst.bank.clone(),
            a: inst.a.clone(),
            b: inst.b.clone(),
        }
    }

    pub fn from_mary(inst: &MaryInstance) -> Self {
        Self {
            hypotheses: inst.p.clone(),
            bank: inst.bank.clone(),
            a: inst.a.clone(),
            b: inst.b.clone(),
        }
    }

    pub fn n_hypotheses(&self) -> usize {
        self.hypotheses.len()
    }

    fn truth_law<'a>(&'a self, truth: &'a TruthSelector) -> Result<&'a Distribution> {
        match truth {
            TruthSelector::Hypothesis(i) => {
                self.hypotheses.get(*i).ok_or_else(|| Error::InvalidParameter {
                    name: "truth".into(),
                    reason: format!(
                        "hypothesis {} of {} declared true",
                        i + 1,
                        self.hypotheses.len()
                    ),
                })
            }
            TruthSelector::Other(d) => {
                if d.len() != self.bank.n_inputs() {
                    return Err(Error::DimensionMismatch(format!(
                        "true source over {} symbols, channels take {}",
                        d.len(),
                        self.bank.n_inputs()
                    )));
                }
                Ok(d)
            }
        }
    }
}

/// A test as the simulator sees it: a pure function of the observed types.
pub trait TypeTest: Sync {
    fn decide(
        &self,
        test_types: &PartialTypeVector,
        train_types: &[PartialTypeVector],
    ) -> Result<TestOutcome>;
}

impl<F> TypeTest for F
where
    F: Fn(&PartialTypeVector, &[PartialTypeVector]) -> Result<TestOutcome> + Sync,
{
    fn decide(
        &self,
        test_types: &PartialTypeVector,
        train_types: &[PartialTypeVector],
    ) -> Result<TestOutcome> {
        self(test_types, train_types)
    }
}

/// Per-role ChaCha stream: trial in the high bits, role in the low byte.
/// Distinct `(trial, role)` pairs never share a stream under one seed.
fn role_rng(seed: u64, trial: u64, role: u64) -> ChaCha12Rng {
    debug_assert!(role < 256, "role byte overflow");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream((trial << 8) | role);
    rng
}

/// Prebuilt alias samplers for one instance: the source laws and every
/// channel row.
struct Samplers {
    truth: WeightedIndex<f64>,
    trains: Vec<WeightedIndex<f64>>,
    rows: Vec<Vec<WeightedIndex<f64>>>,
    h: IndexMap,
    g: IndexMap,
    n_outputs: usize,
}

fn weighted(p: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(p.iter().copied()).map_err(|e| Error::InvalidParameter {
        name: "distribution".into(),
        reason: format!("cannot sample from it: {e}"),
    })
}

fn build_samplers(
    p_true: &Distribution,
    p_train: &[Distribution],
    cfg: &TrialConfig,
    bank: &ChannelBank,
    a: &Proportions,
    b: &Proportions,
) -> Result<Samplers> {
    if a.len() != bank.len() || b.len() != bank.len() {
        return Err(Error::DimensionMismatch(format!(
            "proportions over {} and {} groups for {} channels",
            a.len(),
            b.len(),
            bank.len()
        )));
    }
    let m_in = bank.n_inputs();
    if p_true.len() != m_in || p_train.iter().any(|p| p.len() != m_in) {
        return Err(Error::DimensionMismatch(format!(
            "sources must live on the {m_in}-symbol channel input alphabet"
        )));
    }
    let rows = (0..bank.len())
        .map(|k| (0..m_in).map(|x| weighted(bank.channel(k).row(x))).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(Samplers {
        truth: weighted(p_true.as_slice())?,
        trains: p_train.iter().map(|p| weighted(p.as_slice())).collect::<Result<Vec<_>>>()?,
        rows,
        h: index_map(cfg.n, a),
        g: index_map(cfg.train_len(), b),
        n_outputs: bank.n_outputs(),
    })
}

/// Draw one sequence: i.i.d. inputs from `source`, each pushed through the
/// channel row of its group, tallied directly as per-group counts.
fn draw_types(
    source: &WeightedIndex<f64>,
    s: &Samplers,
    map: &IndexMap,
    rng: &mut ChaCha12Rng,
) -> PartialTypeVector {
    let mut groups = Vec::with_capacity(map.n_groups());
    for k in 0..map.n_groups() {
        let mut counts = vec![0u64; s.n_outputs];
        for _ in map.range(k) {
            let x = source.sample(rng);
            let z = s.rows[k][x].sample(rng);
            counts[z] += 1;
        }
        groups.push(PartialType::from_counts(counts));
    }
    PartialTypeVector::new(groups).expect("group shapes are consistent by construction")
}

fn draw_dataset(
    s: &Samplers,
    seed: u64,
    trial: u64,
) -> (PartialTypeVector, Vec<PartialTypeVector>) {
    let test = draw_types(&s.truth, s, &s.h, &mut role_rng(seed, trial, 0));
    let trains = s
        .trains
        .iter()
        .enumerate()
        .map(|(j, src)| draw_types(src, s, &s.g, &mut role_rng(seed, trial, 1 + j as u64)))
        .collect();
    (test, trains)
}

/// Generate the dataset of one trial: the test sequence's partial types and
/// one training type vector per source in `p_train`, all training sequences
/// sharing one group assignment.
pub fn generate_dataset(
    p_true: &Distribution,
    p_train: &[Distribution],
    cfg: &TrialConfig,
    bank: &ChannelBank,
    a: &Proportions,
    b: &Proportions,
    trial: u64,
) -> Result<(PartialTypeVector, Vec<PartialTypeVector>)> {
    let s = build_samplers(p_true, p_train, cfg, bank, a, b)?;
    Ok(draw_dataset(&s, cfg.seed, trial))
}

/// One outcome's tally with its Wilson 95% interval.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeRate {
    pub outcome: TestOutcome,
    pub count: u64,
    /// `count / evaluated`.
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// An empirical exponent cell. When the outcome was never observed the value
/// is only a lower bound (`log(evaluated) / n`), never infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentEstimate {
    pub value: f64,
    pub lower_bound: bool,
}

/// Tallies of a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalRates {
    /// Test length the exponents normalize by.
    pub n: usize,
    /// Trials attempted.
    pub trials: u64,
    /// Trials whose test evaluation succeeded; estimates divide by this.
    pub evaluated: u64,
    /// Trials whose test evaluation failed.
    pub failures: u64,
    /// One row per hypothesis, then the rejection row.
    pub rates: Vec<OutcomeRate>,
}

fn wilson_interval(count: u64, total: u64) -> (f64, f64) {
    let nf = total as f64;
    let p = count as f64 / nf;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = (WILSON_Z / denom) * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

impl EmpiricalRates {
    pub fn rate(&self, outcome: TestOutcome) -> &OutcomeRate {
        let idx = match outcome {
            TestOutcome::Hypothesis(i) => {
                assert!(i + 1 < self.rates.len(), "outcome {outcome} not tracked");
                i
            }
            TestOutcome::Reject => self.rates.len() - 1,
        };
        &self.rates[idx]
    }

    /// `-(1/n) log` of the outcome's estimated probability.
    pub fn exponent(&self, outcome: TestOutcome) -> ExponentEstimate {
        let r = self.rate(outcome);
        let nf = self.n as f64;
        if r.count == 0 {
            ExponentEstimate { value: (self.evaluated as f64).ln() / nf, lower_bound: true }
        } else {
            ExponentEstimate { value: -r.estimate.ln() / nf, lower_bound: false }
        }
    }
}

/// Run independent trials of `test` on freshly simulated datasets and tally
/// the outcomes.
///
/// Trials run in parallel; every trial derives its own sample streams from
/// `(seed, trial, role)` and tallies merge by addition, so the result is a
/// deterministic function of the configuration. Per-trial test failures are
/// counted, not fatal; estimates divide by the number of evaluated trials.
pub fn run_trials<T: TypeTest>(
    inst: &SimInstance,
    test: &T,
    cfg: &TrialConfig,
) -> Result<EmpiricalRates> {
    let m = inst.n_hypotheses();
    let p_true = inst.truth_law(&cfg.truth)?;
    let samplers = build_samplers(p_true, &inst.hypotheses, cfg, &inst.bank, &inst.a, &inst.b)?;
    let zero = || (vec![0u64; m + 1], 0u64);
    let (counts, failures) = (0..cfg.trials)
        .into_par_iter()
        .fold(zero, |(mut counts, mut failures), trial| {
            let (test_tv, train_tvs) = draw_dataset(&samplers, cfg.seed, trial);
            match test.decide(&test_tv, &train_tvs) {
                Ok(TestOutcome::Hypothesis(i)) => {
                    assert!(i < m, "test produced hypothesis {} of {m}", i + 1);
                    counts[i] += 1;
                }
                Ok(TestOutcome::Reject) => counts[m] += 1,
                Err(_) => failures += 1,
            }
            (counts, failures)
        })
        .reduce(zero, |(mut c1, f1), (c2, f2)| {
            for (x, y) in c1.iter_mut().zip(&c2) {
                *x += y;
            }
            (c1, f1 + f2)
        });
    let evaluated = cfg.trials - failures;
    if evaluated == 0 {
        return Err(Error::NonConvergence("every trial's test evaluation failed".into()));
    }
    let rates = counts
        .iter()
        .enumerate()
        .map(|(i, &count)| {
            let outcome =
                if i == m { TestOutcome::Reject } else { TestOutcome::Hypothesis(i) };
            let (ci_lo, ci_hi) = wilson_interval(count, evaluated);
            OutcomeRate {
                outcome,
                count,
                estimate: count as f64 / evaluated as f64,
                ci_lo,
                ci_hi,
            }
        })
        .collect();
    Ok(EmpiricalRates { n: cfg.n, trials: cfg.trials, evaluated, failures, rates })
}

/// Exact outcome probabilities of a type-based test.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactRates {
    /// One row per hypothesis, then the rejection row; rows sum to 1.
    pub probs: Vec<(TestOutcome, f64)>,
}

impl ExactRates {
    pub fn prob(&self, outcome: TestOutcome) -> f64 {
        let idx = match outcome {
            TestOutcome::Hypothesis(i) => {
                assert!(i + 1 < self.probs.len(), "outcome {outcome} not tracked");
                i
            }
            TestOutcome::Reject => self.probs.len() - 1,
        };
        self.probs[idx].1
    }
}

fn sim_guard(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Guard(format!("exact evaluator limit: {what}")))
    }
}

/// Exact outcome distribution by enumerating every type combination.
///
/// Tests depend on data only through `(T_Z, T_Y1, T_Y2)`, and with one
/// channel and a binary output alphabet each type is a binomial count, so
/// summing `Binom(n, p) x Binom(N, p1) x Binom(N, p2)` weights over all
/// `(n+1)(N+1)^2` combinations evaluates the test's law exactly.
pub fn exact_outcome_probs<T: TypeTest>(
    inst: &SimInstance,
    test: &T,
    cfg: &TrialConfig,
) -> Result<ExactRates> {
    let m = inst.n_hypotheses();
    sim_guard(inst.bank.len() == 1, "a single channel")?;
    sim_guard(inst.bank.n_outputs() == 2, "a binary output alphabet")?;
    sim_guard(m == 2, "two hypotheses")?;
    sim_guard(cfg.n <= 12, "test length at most 12")?;
    let cap_n = cfg.train_len();
    sim_guard(cap_n <= 64, "training length at most 64")?;

    let p_true = inst.truth_law(&cfg.truth)?;
    let ch = inst.bank.channel(0);
    let head = |d: &Distribution| ch.push(d).get(0).clamp(0.0, 1.0);
    let binom = |p: f64, len: usize| {
        Binomial::new(p, len as u64).expect("probability and length are validated")
    };
    let test_law = binom(head(p_true), cfg.n);
    let train_laws: Vec<Binomial> =
        inst.hypotheses.iter().map(|p| binom(head(p), cap_n)).collect();

    let single = |z: u64, len: usize| {
        PartialTypeVector::new(vec![PartialType::from_counts(vec![z, len as u64 - z])])
            .expect("single binary group")
    };
    let mut probs = vec![0.0f64; m + 1];
    for z in 0..=cfg.n as u64 {
        let wz = test_law.pmf(z);
        let test_tv = single(z, cfg.n);
        for y1 in 0..=cap_n as u64 {
            let w1 = wz * train_laws[0].pmf(y1);
            let tv1 = single(y1, cap_n);
            for y2 in 0..=cap_n as u64 {
                let w = w1 * train_laws[1].pmf(y2);
                let outcome = test.decide(&test_tv, &[tv1.clone(), single(y2, cap_n)])?;
                match outcome {
                    TestOutcome::Hypothesis(i) => probs[i] += w,
                    TestOutcome::Reject => probs[m] += w,
                }
            }
        }
    }
    let rows = probs
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            // Summed pmf products can overshoot 1 by a few ulps.
            (if i == m { TestOutcome::Reject } else { TestOutcome::Hypothesis(i) }, p.clamp(0.0, 1.0))
        })
        .collect();
    Ok(ExactRates { probs: rows })
}

/// One point of an empirical exponent curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub n: usize,
    pub count: u64,
    pub estimate: f64,
    pub exponent: f64,
    /// The outcome was never observed: `exponent` is only a lower bound.
    pub lower_bound: bool,
}

/// Empirical exponent of one outcome across increasing test lengths.
///
/// `make_test` builds the test for each length, so length-dependent
/// thresholds stay consistent. Points use decorrelated seeds derived from
/// the configured one.
pub fn empirical_exponent_curve<T, F>(
    inst: &SimInstance,
    cfg: &TrialConfig,
    ns: &[usize],
    target: TestOutcome,
    make_test: F,
) -> Result<Vec<CurvePoint>>
where
    T: TypeTest,
    F: Fn(usize) -> T,
{
    if ns.is_empty() {
        return Err(Error::InvalidParameter {
            name: "ns".into(),
            reason: "need at least one test length".into(),
        });
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter {
            name: "ns".into(),
            reason: "test lengths must be strictly increasing".into(),
        });
    }
    let mut points = Vec::with_capacity(ns.len());
    for (idx, &n) in ns.iter().enumerate() {
        let mut point_cfg = cfg.with_n(n)?;
        point_cfg.seed = cfg.seed.wrapping_add((idx as u64).wrapping_mul(0x9E3779B97F4A7C15));
        let rates = run_trials(inst, &make_test(n), &point_cfg)?;
        let rate = rates.rate(target).clone();
        let exp = rates.exponent(target);
        points.push(CurvePoint {
            n,
            count: rate.count,
            estimate: rate.estimate,
            exponent: exp.value,
            lower_bound: exp.lower_bound,
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Channel;
    use crate::rules::{binary_test, gutman_binary, threshold, ThresholdMode};
    use crate::solver::SolverConfig;

    fn dist(v: &[f64]) -> Distribution {
        Distribution::new(v.to_vec()).unwrap()
    }

    fn identity_k1(p1: &[f64], p2: &[f64]) -> SimInstance {
        SimInstance::new(
            vec![dist(p1), dist(p2)],
            ChannelBank::new(vec![Channel::identity(2)]).unwrap(),
            Proportions::new(vec![1.0]).unwrap(),
            Proportions::new(vec![1.0]).unwrap(),
        )
        .unwrap()
    }

    fn noisy_k2(p1: &[f64], p2: &[f64]) -> SimInstance {
        SimInstance::new(
            vec![dist(p1), dist(p2)],
            ChannelBank::new(vec![
                Channel::new(vec![vec![0.9, 0.1], vec![0.15, 0.85]]).unwrap(),
                Channel::new(vec![vec![0.7, 0.3], vec![0.25, 0.75]]).unwrap(),
            ])
            .unwrap(),
            Proportions::new(vec![0.5, 0.5]).unwrap(),
            Proportions::new(vec![0.5, 0.5]).unwrap(),
        )
        .unwrap()
    }

    /// The single-channel noiseless binary test as a type test.
    fn gutman_type_test(
        thr: f64,
    ) -> impl Fn(&PartialTypeVector, &[PartialTypeVector]) -> Result<TestOutcome> + Sync {
        move |test_tv, train_tvs| {
            let alpha = train_tvs[0].n() as f64 / test_tv.n() as f64;
            gutman_binary(
                &test_tv.group(0).distribution().unwrap(),
                &train_tvs[0].group(0).distribution().unwrap(),
                alpha,
                thr,
            )
        }
    }

    #[test]
    fn point_mass_source_yields_constant_types() {
        let cfg = TrialConfig::new(30, 1.0, 1, 9, TruthSelector::Hypothesis(0)).unwrap();
        let point = dist(&[1.0, 0.0]);
        let bank = ChannelBank::new(vec![Channel::identity(2)]).unwrap();
        let one = Proportions::new(vec![1.0]).unwrap();
        let (test_tv, train_tvs) =
            generate_dataset(&point, &[point.clone(), point.clone()], &cfg, &bank, &one, &one, 0)
                .unwrap();
        assert_eq!(test_tv.group(0).counts(), &[30, 0]);
        for tv in &train_tvs {
            assert_eq!(tv.group(0).counts(), &[30, 0]);
        }
    }

    #[test]
    fn large_samples_concentrate_on_the_pushforwards() {
        let inst = noisy_k2(&[0.7, 0.3], &[0.3, 0.7]);
        let cfg = TrialConfig::new(100_000, 0.5, 1, 1, TruthSelector::Hypothesis(0)).unwrap();
        let mut bad = 0;
        for seed_trial in 0..20u64 {
            let (test_tv, _) = generate_dataset(
                &inst.hypotheses[0],
                &inst.hypotheses,
                &cfg,
                &inst.bank,
                &inst.a,
                &inst.b,
                seed_trial,
            )
            .unwrap();
            for k in 0..2 {
                let push = inst.bank.channel(k).push(&inst.hypotheses[0]);
                let t = test_tv.group(k).distribution().unwrap();
                let dev = (0..2)
                    .map(|x| (t.get(x) - push.get(x)).abs())
                    .fold(0.0f64, f64::max);
                if dev > 0.01 {
                    bad += 1;
                }
            }
        }
        assert_eq!(bad, 0, "{bad} of 40 group types drifted past 0.01");
    }

    #[test]
    fn degenerate_proportions_leave_other_groups_empty() {
        let inst = noisy_k2(&[0.7, 0.3], &[0.3, 0.7]);
        let a = Proportions::new(vec![1.0, 0.0]).unwrap();
        let cfg = TrialConfig::new(50, 1.0, 1, 3, TruthSelector::Hypothesis(0)).unwrap();
        let (test_tv, _) = generate_dataset(
            &inst.hypotheses[0],
            &inst.hypotheses,
            &cfg,
            &inst.bank,
            &a,
            &inst.b,
            0,
        )
        .unwrap();
        assert_eq!(test_tv.group(0).total(), 50);
        assert!(test_tv.group(1).is_empty());
    }

    #[test]
    fn identical_configurations_reproduce_identical_tallies() {
        let inst = identity_k1(&[0.8, 0.2], &[0.3, 0.7]);
        let cfg = TrialConfig::new(40, 1.0, 200, 42, TruthSelector::Hypothesis(1)).unwrap();
        let test = gutman_type_test(0.05);
        let first = run_trials(&inst, &test, &cfg).unwrap();
        let second = run_trials(&inst, &test, &cfg).unwrap();
        assert_eq!(first, second);
        assert_eq!(first.trials, 200);
        assert_eq!(first.evaluated, 200);
        assert_eq!(first.rates.iter().map(|r| r.count).sum::<u64>(), 200);

        let single = TrialConfig::new(40, 1.0, 1, 42, TruthSelector::Hypothesis(1)).unwrap();
        let a = run_trials(&inst, &test, &single).unwrap();
        let b = run_trials(&inst, &test, &single).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_roles_draw_distinct_streams() {
        // With one common source, the test and training sequences of a trial
        // must still disagree somewhere; identical streams would make the
        // realized types of equal-length sequences coincide every time.
        let inst = identity_k1(&[0.5, 0.5], &[0.5, 0.5]);
        let cfg = TrialConfig::new(60, 1.0, 1, 5, TruthSelector::Hypothesis(0)).unwrap();
        let mut all_equal = true;
        for trial in 0..10 {
            let (test_tv, train_tvs) = generate_dataset(
                &inst.hypotheses[0],
                &inst.hypotheses,
                &cfg,
                &inst.bank,
                &inst.a,
                &inst.b,
                trial,
            )
            .unwrap();
            if test_tv.group(0).counts() != train_tvs[0].group(0).counts()
                || train_tvs[0].group(0).counts() != train_tvs[1].group(0).counts()
            {
                all_equal = false;
            }
        }
        assert!(!all_equal, "roles produced identical types on every trial");
    }

    #[test]
    fn adjusted_threshold_keeps_the_controlled_error_below_its_bound() {
        // Five source pairs; the bound exp(-n lambda) holds for each under
        // the slack-adjusted threshold.
        let pairs: [(&[f64], &[f64]); 5] = [
            (&[0.5, 0.5], &[0.5, 0.5]),
            (&[0.9, 0.1], &[0.1, 0.9]),
            (&[0.8, 0.2], &[0.6, 0.4]),
            (&[0.99, 0.01], &[0.3, 0.7]),
            (&[0.2, 0.8], &[0.25, 0.75]),
        ];
        let lambda = 0.05;
        let n = 100;
        let solver = SolverConfig::default();
        for (p1, p2) in pairs {
            let inst = noisy_k2(p1, p2);
            let mode = ThresholdMode::Adjusted {
                n,
                alpha: 1.0,
                a: inst.a.clone(),
                b: inst.b.clone(),
                n_outputs: 2,
            };
            let thr = threshold(lambda, &mode, 2).unwrap();
            let engine = BinaryInstance::new(
                inst.hypotheses[0].clone(),
                inst.hypotheses[1].clone(),
                inst.bank.clone(),
                inst.a.clone(),
                inst.b.clone(),
                1.0,
                lambda,
            )
            .unwrap();
            let test = |tv: &PartialTypeVector, trains: &[PartialTypeVector]| {
                binary_test(tv, &trains[0], &trains[1], &engine, thr, &solver)
            };
            let cfg = TrialConfig::new(n, 1.0, 600, 17, TruthSelector::Hypothesis(0)).unwrap();
            let rates = run_trials(&inst, &test, &cfg).unwrap();
            let beta1 = rates.rate(TestOutcome::Hypothesis(1));
            let half = (beta1.ci_hi - beta1.ci_lo) / 2.0;
            let bound = (-(n as f64) * lambda).exp() + 3.0 * half;
            assert!(
                beta1.estimate <= bound,
                "pair {p1:?}/{p2:?}: controlled error {} above {bound}",
                beta1.estimate
            );
        }
    }

    #[test]
    fn exact_probabilities_sum_to_one_and_saturate_for_huge_thresholds() {
        let inst = identity_k1(&[0.8, 0.2], &[0.3, 0.7]);
        for truth in [TruthSelector::Hypothesis(0), TruthSelector::Hypothesis(1)] {
            let cfg = TrialConfig::new(8, 1.0, 1, 0, truth).unwrap();
            let exact = exact_outcome_probs(&inst, &gutman_type_test(50.0), &cfg).unwrap();
            let total: f64 = exact.probs.iter().map(|(_, p)| p).sum();
            assert!((total - 1.0).abs() < 1e-10);
            assert!((exact.prob(TestOutcome::Hypothesis(0)) - 1.0).abs() < 1e-10);
            assert_eq!(exact.prob(TestOutcome::Reject), 0.0);
        }

        // Identical sources: the enumeration's weights still sum to one.
        let same = identity_k1(&[0.6, 0.4], &[0.6, 0.4]);
        let cfg = TrialConfig::new(6, 1.0, 1, 0, TruthSelector::Hypothesis(0)).unwrap();
        let exact = exact_outcome_probs(&same, &gutman_type_test(0.05), &cfg).unwrap();
        let total: f64 = exact.probs.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn exact_evaluator_enforces_its_guards() {
        let inst = identity_k1(&[0.8, 0.2], &[0.3, 0.7]);
        let cfg = TrialConfig::new(13, 1.0, 1, 0, TruthSelector::Hypothesis(0)).unwrap();
        assert!(matches!(
            exact_outcome_probs(&inst, &gutman_type_test(0.05), &cfg),
            Err(Error::Guard(_))
        ));
        let wide = noisy_k2(&[0.8, 0.2], &[0.3, 0.7]);
        let cfg = TrialConfig::new(8, 1.0, 1, 0, TruthSelector::Hypothesis(0)).unwrap();
        assert!(matches!(
            exact_outcome_probs(&wide, &gutman_type_test(0.05), &cfg),
            Err(Error::Guard(_))
        ));
    }

    #[test]
    fn exact_controlled_error_respects_the_finite_sample_bound() {
        let inst = identity_k1(&[0.8, 0.2], &[0.3, 0.7]);
        let n = 8;
        let lambda = 0.05;
        let mode = ThresholdMode::Adjusted {
            n,
            alpha: 1.0,
            a: Proportions::new(vec![1.0]).unwrap(),
            b: Proportions::new(vec![1.0]).unwrap(),
            n_outputs: 2,
        };
        let thr = threshold(lambda, &mode, 2).unwrap();
        let cfg = TrialConfig::new(n, 1.0, 1, 0, TruthSelector::Hypothesis(0)).unwrap();
        let exact = exact_outcome_probs(&inst, &gutman_type_test(thr), &cfg).unwrap();
        let beta1 = exact.prob(TestOutcome::Hypothesis(1));
        assert!(beta1 <= (-(n as f64) * lambda).exp(), "beta1 {beta1}");
    }

    #[test]
    fn monte_carlo_matches_the_exact_law_across_seed_replicates() {
        let inst = identity_k1(&[0.8, 0.2], &[0.3, 0.7]);
        let test = gutman_type_test(0.05);
        let base = TrialConfig::new(8, 1.0, 1, 0, TruthSelector::Hypothesis(1)).unwrap();
        let exact = exact_outcome_probs(&inst, &test, &base).unwrap();
        let trials = 2000u64;
        let mut hits = 0;
        for seed in 0..100u64 {
            let cfg = TrialConfig::new(8, 1.0, trials, seed, TruthSelector::Hypothesis(1)).unwrap();
            let rates = run_trials(&inst, &test, &cfg).unwrap();
            let ok = rates.rates.iter().all(|r| {
                let p = exact.prob(r.outcome);
                let sigma = (p * (1.0 - p) / trials as f64).sqrt();
                (r.estimate - p).abs() <= 3.0 * sigma + 1e-12
            });
            if ok {
                hits += 1;
            }
        }
        assert!(hits >= 97, "only {hits} of 100 replicates within 3 sigma");
    }

    #[test]
    fn indistinguishable_sources_give_a_flat_exponent_curve() {
        let inst = identity_k1(&[0.5, 0.5], &[0.5, 0.5]);
        let cfg = TrialConfig::new(20, 1.0, 400, 2, TruthSelector::Hypothesis(1)).unwrap();
        let points = empirical_exponent_curve(
            &inst,
            &cfg,
            &[20, 40, 60],
            TestOutcome::Hypothesis(0),
            |_| gutman_type_test(0.05),
        )
        .unwrap();
        for p in &points {
            assert!(!p.lower_bound);
            assert!(p.exponent.abs() < 0.02, "n {}: exponent {}", p.n, p.exponent);
        }
    }

    #[test]
    fn adjusted_thresholds_give_an_increasing_exponent_trend() {
        // With the length-dependent slack, the effective threshold falls
        // toward its nominal value as n grows, so the per-n exponent climbs.
        // A raw threshold would instead approach the limit from above
        // through the vanishing O(log n / n) estimation excess.
        let inst = identity_k1(&[0.995, 0.005], &[0.45, 0.55]);
        let alpha = 64.0;
        let lambda = 1.45;
        let cfg = TrialConfig::new(16, alpha, 12_000, 11, TruthSelector::Hypothesis(1)).unwrap();
        let points = empirical_exponent_curve(
            &inst,
            &cfg,
            &[100, 200, 300],
            TestOutcome::Hypothesis(0),
            |n| {
                let mode = ThresholdMode::Adjusted {
                    n,
                    alpha,
                    a: Proportions::new(vec![1.0]).unwrap(),
                    b: Proportions::new(vec![1.0]).unwrap(),
                    n_outputs: 2,
                };
                gutman_type_test(threshold(lambda, &mode, 2).unwrap())
            },
        )
        .unwrap();
        let increments = points.windows(2).filter(|w| w[1].exponent >= w[0].exponent).count();
        assert!(increments >= 2, "exponents {:?}", points.iter().map(|p| p.exponent).collect::<Vec<_>>());
        let last = points.last().unwrap();
        assert!(!last.lower_bound, "terminal cell never observed");
        assert!(last.count > 50, "terminal count {} too thin to trust", last.count);
    }

    #[test]
    fn zero_count_cells_flag_a_lower_bound() {
        // Far-apart sources and a generous threshold: the controlled error
        // never fires in a small run.
        let inst = identity_k1(&[0.95, 0.05], &[0.05, 0.95]);
        let cfg = TrialConfig::new(100, 1.0, 50, 3, TruthSelector::Hypothesis(0)).unwrap();
        let rates = run_trials(&inst, &gutman_type_test(0.3), &cfg).unwrap();
        let cell = rates.exponent(TestOutcome::Hypothesis(1));
        assert_eq!(rates.rate(TestOutcome::Hypothesis(1)).count, 0);
        assert!(cell.lower_bound);
        assert!((cell.value - 50f64.ln() / 100.0).abs() < 1e-12);
        assert!(cell.value.is_finite());
    }

    #[test]
    fn failing_tests_are_counted_not_fatal() {
        let inst = identity_k1(&[0.8, 0.2], &[0.3, 0.7]);
        let cfg = TrialConfig::new(10, 1.0, 40, 8, TruthSelector::Hypothesis(0)).unwrap();
        let test = |tv: &PartialTypeVector, _: &[PartialTypeVector]| {
            // Fail on every dataset whose first count is even.
            if tv.group(0).counts()[0] % 2 == 0 {
                Err(Error::NonConvergence("synthetic".into()))
            } else {
                Ok(TestOutcome::Hypothesis(0))
            }
        };
        let rates = run_trials(&inst, &test, &cfg).unwrap();
        assert!(rates.failures > 0);
        assert_eq!(rates.evaluated + rates.failures, 40);
        assert_eq!(
            rates.rates.iter().map(|r| r.count).sum::<u64>(),
            rates.evaluated
        );

        let always_fail = |_: &PartialTypeVector, _: &[PartialTypeVector]| -> Result<TestOutcome> {
            Err(Error::NonConvergence("synthetic".into()))
        };
        assert!(run_trials(&inst, &always_fail, &cfg).is_err());
    }

    #[test]
    fn wilson_intervals_bracket_the_estimate() {
        for (count, total) in [(0u64, 50u64), (1, 50), (25, 50), (50, 50)] {
            let (lo, hi) = wilson_interval(count, total);
            let p = count as f64 / total as f64;
            assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
            assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
            assert!(lo < hi);
        }
    }
}
