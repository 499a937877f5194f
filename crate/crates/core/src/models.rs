//! Random scenario generators.
//!
//! Every generator emits samples in a fixed layout: false nulls occupy
//! indices 0..n1, true nulls n1..n. Thresholds depend on the sample only
//! through order statistics, so the layout carries no information. Draw
//! order within a replication is fixed per model, which makes each
//! generator a deterministic function of (spec, seed, replication index).

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{HypothesisPartition, PValueSample};
use crate::schedule::gbs_beta;
use crate::Estimate;

/// Law of the false-null p-values.
///
/// For the exact lower-bound comparisons the relevant condition is
/// P(p_i <= t) >= t for all t; it holds for `DiracZero`, for
/// `Uniform { theta }` with theta <= 1 and for `Beta { a, b: 1 }` with
/// a <= 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum AlternativeLaw {
    /// Point mass at 0.
    DiracZero,
    /// Uniform on (0, theta), 0 < theta <= 1.
    Uniform { theta: f64 },
    /// Beta(a, b), a > 0, b > 0.
    Beta { a: f64, b: f64 },
}

impl AlternativeLaw {
    fn validate(&self) -> Result<()> {
        match *self {
            AlternativeLaw::DiracZero => Ok(()),
            AlternativeLaw::Uniform { theta } => {
                if theta > 0.0 && theta <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::config(format!(
                        "uniform alternative requires theta in (0, 1], got {theta}"
                    )))
                }
            }
            AlternativeLaw::Beta { a, b } => {
                if a > 0.0 && b > 0.0 {
                    Ok(())
                } else {
                    Err(Error::config(format!(
                        "beta alternative requires a, b > 0, got ({a}, {b})"
                    )))
                }
            }
        }
    }
}

/// Continuous component laws for the Marshall–Olkin constructions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum ComponentLaw {
    Exponential { rate: f64 },
    Uniform01,
}

impl Default for ComponentLaw {
    fn default() -> Self {
        ComponentLaw::Exponential { rate: 1.0 }
    }
}

impl ComponentLaw {
    fn validate(&self) -> Result<()> {
        match *self {
            ComponentLaw::Exponential { rate } => {
                if rate.is_finite() && rate > 0.0 {
                    Ok(())
                } else {
                    Err(Error::config(format!(
                        "exponential component requires rate > 0, got {rate}"
                    )))
                }
            }
            ComponentLaw::Uniform01 => Ok(()),
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        match *self {
            ComponentLaw::Exponential { rate } => -(1.0 - u).ln() / rate,
            ComponentLaw::Uniform01 => u,
        }
    }

    fn cdf(&self, z: f64) -> f64 {
        match *self {
            ComponentLaw::Exponential { rate } => {
                if z <= 0.0 {
                    0.0
                } else {
                    -(-rate * z).exp_m1()
                }
            }
            ComponentLaw::Uniform01 => z.clamp(0.0, 1.0),
        }
    }
}

/// Component laws of the Marshall–Olkin constructions: X_i i.i.d. from `x`,
/// the shared variable Y from `y`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MoComponents {
    #[serde(default)]
    pub x: ComponentLaw,
    #[serde(default)]
    pub y: ComponentLaw,
}

impl MoComponents {
    fn validate(&self) -> Result<()> {
        self.x.validate()?;
        self.y.validate()
    }

    /// Exact cdf of min(X, Y).
    fn cdf_min(&self, z: f64) -> f64 {
        1.0 - (1.0 - self.x.cdf(z)) * (1.0 - self.y.cdf(z))
    }

    /// Exact cdf of max(X, Y).
    fn cdf_max(&self, z: f64) -> f64 {
        self.x.cdf(z) * self.y.cdf(z)
    }
}

/// Dependence law of the true nulls under a Dirac-martingale configuration.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DmDependence {
    /// Independent uniforms (the independence model is itself a
    /// martingale model).
    #[default]
    IndependentUniform,
    /// Marshall–Olkin minima restricted to the true nulls.
    MarshallOlkinMin {
        #[serde(default)]
        components: MoComponents,
    },
}

/// The dependence model of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Model {
    /// Independent true nulls, i.i.d. uniform; false nulls i.i.d. from the
    /// alternative, independent of the nulls.
    BiaUniform { alternative: AlternativeLaw },
    /// Independent true nulls drawn from a law stochastically larger than
    /// uniform (Beta with a >= 1, b <= 1); false nulls as above.
    BiaStochasticallyLarger {
        null_a: f64,
        null_b: f64,
        alternative: AlternativeLaw,
    },
    /// Dirac-uniform: false nulls identically 0, true nulls i.i.d. uniform.
    Du,
    /// Dirac-martingale: false nulls identically 0, true nulls from a
    /// configurable martingale-dependent law.
    Dm {
        #[serde(default)]
        dependence: DmDependence,
    },
    /// The three-hypothesis counterexample construction: p = (0, U1, U2)
    /// with U2 a measure-preserving rearrangement of U1 over (0, 2β_2).
    Example1Counter { alpha: f64 },
    /// True nulls p_i = H(min(X_i, Y)) with H the exact cdf of the minimum;
    /// martingale dependent. False nulls i.i.d. from the alternative.
    MarshallOlkinMin {
        #[serde(default)]
        components: MoComponents,
        alternative: AlternativeLaw,
    },
    /// True nulls p_i = H̃(max(X_i, Y)); reverse-martingale dependent.
    MarshallOlkinMax {
        #[serde(default)]
        components: MoComponents,
        alternative: AlternativeLaw,
    },
    /// Independent blocks; within block j every true-null p-value equals
    /// one shared uniform U_j, false nulls i.i.d. from the alternative.
    Block {
        block_n0: Vec<usize>,
        block_n1: Vec<usize>,
        alternative: AlternativeLaw,
    },
}

/// Declarative description of a random scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub n: usize,
    pub n0: usize,
    pub n1: usize,
    pub model: Model,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("scenario requires n >= 1"));
        }
        if self.n0 == 0 {
            return Err(Error::config("scenario requires n0 >= 1"));
        }
        if self.n0 + self.n1 != self.n {
            return Err(Error::config(format!(
                "n0 + n1 = {} does not match n = {}",
                self.n0 + self.n1,
                self.n
            )));
        }
        match &self.model {
            Model::BiaUniform { alternative } => alternative.validate(),
            Model::BiaStochasticallyLarger {
                null_a,
                null_b,
                alternative,
            } => {
                if !(*null_a >= 1.0 && *null_b > 0.0 && *null_b <= 1.0) {
                    return Err(Error::config(format!(
                        "stochastically-larger null law requires a >= 1 and 0 < b <= 1, \
                         got ({null_a}, {null_b})"
                    )));
                }
                alternative.validate()
            }
            Model::Du => Ok(()),
            Model::Dm { dependence } => match dependence {
                DmDependence::IndependentUniform => Ok(()),
                DmDependence::MarshallOlkinMin { components } => components.validate(),
            },
            Model::Example1Counter { alpha } => {
                if self.n != 3 || self.n1 != 1 {
                    return Err(Error::config(
                        "example1-counter is defined for n = 3, n0 = 2, n1 = 1",
                    ));
                }
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err(Error::config(format!(
                        "example1-counter requires alpha in (0, 1), got {alpha}"
                    )));
                }
                Ok(())
            }
            Model::MarshallOlkinMin {
                components,
                alternative,
            }
            | Model::MarshallOlkinMax {
                components,
                alternative,
            } => {
                components.validate()?;
                alternative.validate()
            }
            Model::Block {
                block_n0,
                block_n1,
                alternative,
            } => {
                if block_n0.len() != block_n1.len() || block_n0.is_empty() {
                    return Err(Error::config(
                        "block model requires equal-length, nonempty block_n0/block_n1",
                    ));
                }
                if block_n0.iter().sum::<usize>() != self.n0
                    || block_n1.iter().sum::<usize>() != self.n1
                {
                    return Err(Error::config(
                        "block sizes must sum to n0 and n1 respectively",
                    ));
                }
                if block_n0
                    .iter()
                    .zip(block_n1)
                    .any(|(a, b)| *a == 0 && *b == 0)
                {
                    return Err(Error::config("blocks must be nonempty"));
                }
                alternative.validate()
            }
        }
    }

    /// The partition matching the generator layout (false nulls first).
    pub fn partition(&self) -> Result<HypothesisPartition> {
        HypothesisPartition::leading_false(self.n, self.n1)
    }
}

enum AltSampler {
    Zero,
    Uniform(f64),
    Beta(rand_distr::Beta<f64>),
}

impl AltSampler {
    fn new(law: &AlternativeLaw) -> Result<Self> {
        Ok(match *law {
            AlternativeLaw::DiracZero => AltSampler::Zero,
            AlternativeLaw::Uniform { theta } => AltSampler::Uniform(theta),
            AlternativeLaw::Beta { a, b } => AltSampler::Beta(
                rand_distr::Beta::new(a, b)
                    .map_err(|e| Error::config(format!("invalid beta alternative: {e}")))?,
            ),
        })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            AltSampler::Zero => 0.0,
            AltSampler::Uniform(theta) => theta * rng.random::<f64>(),
            AltSampler::Beta(beta) => beta.sample(rng),
        }
    }
}

enum NullSampler {
    Uniform,
    Beta(rand_distr::Beta<f64>),
    MoMin(MoComponents),
    MoMax(MoComponents),
    Blocks(Vec<(usize, usize)>),
    Example1 { beta2: f64 },
}

/// A validated scenario with pre-built samplers; build once, draw many.
pub struct ScenarioSampler {
    n: usize,
    n1: usize,
    alt: Option<AltSampler>,
    nulls: NullSampler,
}

impl ScenarioSampler {
    pub fn new(spec: &ScenarioSpec) -> Result<Self> {
        spec.validate()?;
        let (alt, nulls) = match &spec.model {
            Model::BiaUniform { alternative } => {
                (Some(AltSampler::new(alternative)?), NullSampler::Uniform)
            }
            Model::BiaStochasticallyLarger {
                null_a,
                null_b,
                alternative,
            } => (
                Some(AltSampler::new(alternative)?),
                NullSampler::Beta(
                    rand_distr::Beta::new(*null_a, *null_b)
                        .map_err(|e| Error::config(format!("invalid null law: {e}")))?,
                ),
            ),
            Model::Du => (None, NullSampler::Uniform),
            Model::Dm { dependence } => match dependence {
                DmDependence::IndependentUniform => (None, NullSampler::Uniform),
                DmDependence::MarshallOlkinMin { components } => {
                    (None, NullSampler::MoMin(*components))
                }
            },
            Model::Example1Counter { alpha } => {
                let beta2 = gbs_beta(3, *alpha)?.alphas()[1];
                (None, NullSampler::Example1 { beta2 })
            }
            Model::MarshallOlkinMin {
                components,
                alternative,
            } => (
                Some(AltSampler::new(alternative)?),
                NullSampler::MoMin(*components),
            ),
            Model::MarshallOlkinMax {
                components,
                alternative,
            } => (
                Some(AltSampler::new(alternative)?),
                NullSampler::MoMax(*components),
            ),
            Model::Block {
                block_n0,
                block_n1,
                alternative,
            } => (
                Some(AltSampler::new(alternative)?),
                NullSampler::Blocks(
                    block_n0
                        .iter()
                        .zip(block_n1)
                        .map(|(a, b)| (*a, *b))
                        .collect(),
                ),
            ),
        };
        Ok(ScenarioSampler {
            n: spec.n,
            n1: spec.n1,
            alt,
            nulls,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    /// Writes one draw into `out` (resized to n): false nulls at 0..n1,
    /// true nulls at n1..n.
    pub fn sample_into<R: Rng>(&self, rng: &mut R, out: &mut Vec<f64>) {
        out.clear();
        out.resize(self.n, 0.0);
        let (falses, nulls) = out.split_at_mut(self.n1);
        match &self.nulls {
            NullSampler::Example1 { beta2 } => {
                // falses[0] stays 0; the two true nulls are (U1, U2).
                let u1: f64 = rng.random();
                let u2 = if u1 <= *beta2 {
                    u1 + beta2
                } else if u1 < 2.0 * beta2 {
                    u1 - beta2
                } else {
                    u1
                };
                nulls[0] = u1;
                nulls[1] = u2;
            }
            NullSampler::Uniform => {
                if let Some(alt) = &self.alt {
                    for f in falses.iter_mut() {
                        *f = alt.draw(rng);
                    }
                }
                for p in nulls.iter_mut() {
                    *p = rng.random();
                }
            }
            NullSampler::Beta(beta) => {
                if let Some(alt) = &self.alt {
                    for f in falses.iter_mut() {
                        *f = alt.draw(rng);
                    }
                }
                for p in nulls.iter_mut() {
                    *p = beta.sample(rng);
                }
            }
            NullSampler::MoMin(mo) => {
                if let Some(alt) = &self.alt {
                    for f in falses.iter_mut() {
                        *f = alt.draw(rng);
                    }
                }
                let y = mo.y.draw(rng);
                for p in nulls.iter_mut() {
                    let z = mo.x.draw(rng).min(y);
                    *p = mo.cdf_min(z);
                }
            }
            NullSampler::MoMax(mo) => {
                if let Some(alt) = &self.alt {
                    for f in falses.iter_mut() {
                        *f = alt.draw(rng);
                    }
                }
                let y = mo.y.draw(rng);
                for p in nulls.iter_mut() {
                    let z = mo.x.draw(rng).max(y);
                    *p = mo.cdf_max(z);
                }
            }
            NullSampler::Blocks(blocks) => {
                let alt = self.alt.as_ref().expect("block model has an alternative");
                let mut f_off = 0;
                let mut n_off = 0;
                for &(b0, b1) in blocks {
                    for f in falses[f_off..f_off + b1].iter_mut() {
                        *f = alt.draw(rng);
                    }
                    // one shared uniform per block, drawn even for blocks
                    // without true nulls to keep the draw order fixed
                    let u: f64 = rng.random();
                    for p in nulls[n_off..n_off + b0].iter_mut() {
                        *p = u;
                    }
                    f_off += b1;
                    n_off += b0;
                }
            }
        }
    }
}

/// One draw from the scenario. For repeated draws build a
/// [`ScenarioSampler`] once and reuse it.
pub fn sample<R: Rng>(spec: &ScenarioSpec, rng: &mut R) -> Result<PValueSample> {
    let sampler = ScenarioSampler::new(spec)?;
    let mut out = Vec::with_capacity(spec.n);
    sampler.sample_into(rng, &mut out);
    PValueSample::new(out, spec.partition()?)
}

/// Per-bin summary of the increments M(t_{k+1}) − M(t_k) conditioned on
/// the rejection-count level of M(t_k).
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementBin {
    /// Number of true-null p-values <= t_k in this bin (determines M(t_k)).
    pub v_at_start: usize,
    pub count: u64,
    pub increment: Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncrementSummary {
    pub t_start: f64,
    pub t_end: f64,
    /// Unconditional mean increment over the step.
    pub overall: Estimate,
    pub bins: Vec<IncrementBin>,
}

/// Monte Carlo estimates of the centered process
/// M(t) = Σ_{i∈I0} (1[p_i <= t] − t)/(1−t) over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleDiagnostics {
    pub grid: Vec<f64>,
    pub mean_m: Vec<f64>,
    pub se_m: Vec<f64>,
    pub increments: Vec<IncrementSummary>,
    pub reps: u64,
}

struct MeanAcc {
    count: u64,
    sum: f64,
    sumsq: f64,
}

impl MeanAcc {
    fn new() -> Self {
        MeanAcc {
            count: 0,
            sum: 0.0,
            sumsq: 0.0,
        }
    }

    fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sumsq += x * x;
    }

    fn estimate(&self) -> Estimate {
        let n = self.count as f64;
        let mean = self.sum / n;
        let se = if self.count > 1 {
            let var = ((self.sumsq - n * mean * mean) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        } else {
            f64::NAN
        };
        Estimate::new(mean, se)
    }
}

/// Estimates E[M(t)] on the grid and the conditional increment means,
/// binned by the level of the process at the step start. For martingale
/// models both are statistically indistinguishable from 0; for
/// super-martingale models the increments are <= 0 within error.
pub fn martingale_diagnostic(
    spec: &ScenarioSpec,
    grid: &[f64],
    reps: u64,
    seed: u64,
) -> Result<MartingaleDiagnostics> {
    if grid.is_empty() {
        return Err(Error::domain("diagnostic grid must be nonempty"));
    }
    if grid[0] != 0.0 {
        return Err(Error::domain("diagnostic grid must start at 0"));
    }
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0 || *t >= 1.0) {
        return Err(Error::domain("diagnostic grid points must lie in [0, 1)"));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("diagnostic grid must be nondecreasing"));
    }
    if reps == 0 {
        return Err(Error::config("reps must be >= 1"));
    }
    let sampler = ScenarioSampler::new(spec)?;
    let n0 = spec.n0;
    let k = grid.len();

    let mut m_acc: Vec<MeanAcc> = (0..k).map(|_| MeanAcc::new()).collect();
    let mut step_acc: Vec<MeanAcc> = (0..k.saturating_sub(1)).map(|_| MeanAcc::new()).collect();
    let mut bin_acc: Vec<Vec<MeanAcc>> = (0..k.saturating_sub(1))
        .map(|_| (0..=n0).map(|_| MeanAcc::new()).collect())
        .collect();

    let mut values = Vec::with_capacity(spec.n);
    let mut m_path = vec![0.0f64; k];
    let mut v_path = vec![0usize; k];
    for rep in 0..reps {
        let mut rng = crate::rng::substream(seed, rep);
        sampler.sample_into(&mut rng, &mut values);
        let nulls = &values[spec.n1..];
        for (j, &t) in grid.iter().enumerate() {
            let v0 = nulls.iter().filter(|&&p| p <= t).count();
            v_path[j] = v0;
            m_path[j] = (v0 as f64 - n0 as f64 * t) / (1.0 - t);
            m_acc[j].push(m_path[j]);
        }
        for j in 0..k.saturating_sub(1) {
            let inc = m_path[j + 1] - m_path[j];
            step_acc[j].push(inc);
            bin_acc[j][v_path[j]].push(inc);
        }
    }

    let (mut mean_m, mut se_m) = (Vec::with_capacity(k), Vec::with_capacity(k));
    for acc in &m_acc {
        let e = acc.estimate();
        mean_m.push(e.mean);
        se_m.push(e.se);
    }
    let increments = (0..k.saturating_sub(1))
        .map(|j| IncrementSummary {
            t_start: grid[j],
            t_end: grid[j + 1],
            overall: step_acc[j].estimate(),
            bins: bin_acc[j]
                .iter()
                .enumerate()
                .filter(|(_, acc)| acc.count > 0)
                .map(|(v, acc)| IncrementBin {
                    v_at_start: v,
                    count: acc.count,
                    increment: acc.estimate(),
                })
                .collect(),
        })
        .collect();

    Ok(MartingaleDiagnostics {
        grid: grid.to_vec(),
        mean_m,
        se_m,
        increments,
        reps,
    })
}
