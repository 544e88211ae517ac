//! SPSA tuning and its blocking, resampling and second-order variants.
//!
//! [`Spsa`] is an ask/tell state machine: every [`Spsa::ask`] yields one
//! parameter point to evaluate and every [`Spsa::tell`] feeds back its
//! objective value. A completed SPSA step is reported as a [`TunerStep`].
//! This lets a caller place each evaluation in its own backend job and
//! decide, evaluation by evaluation, what the tuner gets to see.
//!
//! Gains follow the usual schedule `a_k = a / (A + k + 1)^α` and
//! `c_k = c / (k + 1)^γ`, with Rademacher perturbations `Δ ∈ {±1}^p`.
//!
//! Evaluations per step: plain 2, resampling `2·r`, second-order 4
//! (`θ ± c_kΔ₁`, `θ + c_kΔ₁ + c_kΔ₂`, `θ − c_kΔ₁ + c_kΔ₂`), blocking 3
//! (`θ ± c_kΔ`, then the candidate) plus one initial evaluation of `θ₀`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Plain,
    /// Commit a step only if the candidate's objective does not exceed the
    /// committed objective by more than `blocking_tolerance`.
    Blocking,
    /// Average `resample_factor` independent gradient estimates.
    Resampling,
    /// 2-SPSA: precondition by a smoothed, regularised Hessian estimate.
    SecondOrder,
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plain" => Ok(Variant::Plain),
            "blocking" => Ok(Variant::Blocking),
            "resampling" => Ok(Variant::Resampling),
            "second_order" | "second-order" | "2spsa" => Ok(Variant::SecondOrder),
            other => Err(Error::config(format!("unknown SPSA variant {other:?}"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Variant::Plain => "plain",
            Variant::Blocking => "blocking",
            Variant::Resampling => "resampling",
            Variant::SecondOrder => "second_order",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpsaConfig {
    pub a: f64,
    pub c: f64,
    /// Stability constant; `None` means `iterations / 10`.
    pub big_a: Option<f64>,
    pub alpha: f64,
    pub gamma: f64,
    pub iterations: usize,
    pub variant: Variant,
    pub resample_factor: usize,
    pub blocking_tolerance: f64,
    /// `ε` in `(ĤᵀĤ + εI)^{1/2}`.
    pub hessian_regularization: f64,
    /// Weight of the running Hessian in the exponential average.
    pub hessian_smoothing: f64,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self {
            a: 0.2,
            c: 0.1,
            big_a: None,
            alpha: 0.602,
            gamma: 0.101,
            iterations: 1000,
            variant: Variant::Plain,
            resample_factor: 2,
            blocking_tolerance: 0.0,
            hessian_regularization: 1e-3,
            hessian_smoothing: 0.9,
        }
    }
}

impl SpsaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.c > 0.0) {
            return Err(Error::config("SPSA gains a and c must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0 && self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config("SPSA exponents alpha and gamma must lie in (0, 1]"));
        }
        if self.iterations == 0 {
            return Err(Error::config("SPSA needs at least one iteration"));
        }
        if self.big_a.is_some_and(|a| a.is_nan() || a < 0.0) {
            return Err(Error::config("SPSA stability constant A must be non-negative"));
        }
        if self.resample_factor == 0 {
            return Err(Error::config("resample_factor must be at least 1"));
        }
        if self.blocking_tolerance.is_nan() || self.blocking_tolerance < 0.0 {
            return Err(Error::config("blocking_tolerance must be non-negative"));
        }
        if self.hessian_regularization.is_nan() || self.hessian_regularization <= 0.0 {
            return Err(Error::config("hessian_regularization must be positive"));
        }
        if !(0.0..1.0).contains(&self.hessian_smoothing) {
            return Err(Error::config("hessian_smoothing must lie in [0, 1)"));
        }
        Ok(())
    }

    pub fn stability_constant(&self) -> f64 {
        self.big_a.unwrap_or(self.iterations as f64 / 10.0)
    }

    /// Step gain `a_k`.
    pub fn learning_rate(&self, k: usize) -> f64 {
        self.a / (self.stability_constant() + k as f64 + 1.0).powf(self.alpha)
    }

    /// Perturbation size `c_k`.
    pub fn perturbation(&self, k: usize) -> f64 {
        self.c / (k as f64 + 1.0).powf(self.gamma)
    }

    fn gradient_samples(&self) -> usize {
        match self.variant {
            Variant::Resampling => self.resample_factor,
            _ => 1,
        }
    }
}

/// The state after one completed SPSA step.
#[derive(Debug, Clone, PartialEq)]
pub struct TunerStep {
    pub k: usize,
    /// Parameters after the step.
    pub theta: Vec<f64>,
    /// Objective estimate attached to the step: the mean of the gradient
    /// evaluations, or for blocking the committed objective.
    pub objective_value: f64,
    pub gradient_estimate: Vec<f64>,
}

pub fn rademacher<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

fn shifted(theta: &[f64], terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = theta.to_vec();
    for &(scale, dir) in terms {
        for (x, d) in out.iter_mut().zip(dir) {
            *x += scale * d;
        }
    }
    out
}

fn pair_gradient(plus: f64, minus: f64, ck: f64, delta: &[f64]) -> Vec<f64> {
    delta.iter().map(|d| (plus - minus) / (2.0 * ck * d)).collect()
}

/// `ĝ_i = [f(θ + c_kΔ) − f(θ − c_kΔ)] / (2 c_k Δ_i)` for a given `Δ`.
pub fn spsa_gradient_with_delta<F>(theta: &[f64], ck: f64, delta: &[f64], mut eval: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let plus = eval(&shifted(theta, &[(ck, delta)]))?;
    let minus = eval(&shifted(theta, &[(-ck, delta)]))?;
    Ok(pair_gradient(plus, minus, ck, delta))
}

/// SPSA gradient at iteration `k`; the resampling variant averages
/// `resample_factor` independent estimates.
pub fn spsa_gradient<F, R>(theta: &[f64], k: usize, mut eval: F, cfg: &SpsaConfig, rng: &mut R) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
    R: Rng + ?Sized,
{
    let ck = cfg.perturbation(k);
    let samples = cfg.gradient_samples();
    let mut acc = vec![0.0; theta.len()];
    for _ in 0..samples {
        let delta = rademacher(theta.len(), rng);
        let g = spsa_gradient_with_delta(theta, ck, &delta, &mut eval)?;
        for (a, gi) in acc.iter_mut().zip(g) {
            *a += gi;
        }
    }
    Ok(acc.into_iter().map(|a| a / samples as f64).collect())
}

/// `θ' = θ − a_k·g`.
pub fn spsa_update(theta: &[f64], k: usize, g: &[f64], cfg: &SpsaConfig) -> Vec<f64> {
    let ak = cfg.learning_rate(k);
    theta.iter().zip(g).map(|(t, gi)| t - ak * gi).collect()
}

/// `(ĤᵀĤ + εI)^{1/2}` for a symmetric `Ĥ`; its eigenvalues are `√(λ² + ε)`.
pub fn regularize_hessian(h: &DMatrix<f64>, eps: f64) -> DMatrix<f64> {
    map_symmetric_eigen(h, |l| (l * l + eps).sqrt())
}

/// `(ĤᵀĤ + εI)^{-1/2}·g`.
pub fn precondition(h: &DMatrix<f64>, g: &[f64], eps: f64) -> Vec<f64> {
    let inv = map_symmetric_eigen(h, |l| 1.0 / (l * l + eps).sqrt());
    (inv * DVector::from_column_slice(g)).iter().copied().collect()
}

fn map_symmetric_eigen(h: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let sym = (h + h.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// One-sample 2-SPSA Hessian estimate
/// `δf / (2c²) · (Δ₁Δ₂ᵀ + Δ₂Δ₁ᵀ) / 2` with
/// `δf = [f(θ+cΔ₁+cΔ₂) − f(θ+cΔ₁)] − [f(θ−cΔ₁+cΔ₂) − f(θ−cΔ₁)]`.
fn hessian_sample(values: &[f64], ck: f64, d1: &[f64], d2: &[f64]) -> DMatrix<f64> {
    let diff = (values[2] - values[0]) - (values[3] - values[1]);
    let scale = diff / (2.0 * ck * ck);
    let p = d1.len();
    DMatrix::from_fn(p, p, |i, j| scale * 0.5 * (d1[i] * d2[j] + d2[i] * d1[j]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    /// Blocking only: evaluate the starting point once.
    Initial,
    Gradient,
    /// Blocking only: evaluate the proposed step.
    Candidate,
}

/// Ask/tell SPSA tuner.
#[derive(Debug, Clone)]
pub struct Spsa {
    cfg: SpsaConfig,
    theta: Vec<f64>,
    k: usize,
    rng: ChaCha8Rng,
    stage: Stage,
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    deltas: Vec<Vec<f64>>,
    awaiting: bool,
    hessian: Option<DMatrix<f64>>,
    committed_value: Option<f64>,
    pending: Option<(Vec<f64>, Vec<f64>)>,
}

impl Spsa {
    pub fn new(cfg: SpsaConfig, theta0: Vec<f64>, rng: ChaCha8Rng) -> Result<Self> {
        cfg.validate()?;
        if theta0.is_empty() || theta0.iter().any(|t| !t.is_finite()) {
            return Err(Error::config("initial parameters must be non-empty and finite"));
        }
        let stage = if cfg.variant == Variant::Blocking { Stage::Initial } else { Stage::Gradient };
        let mut tuner = Self {
            cfg,
            theta: theta0,
            k: 0,
            rng,
            stage,
            points: Vec::new(),
            values: Vec::new(),
            deltas: Vec::new(),
            awaiting: false,
            hessian: None,
            committed_value: None,
            pending: None,
        };
        tuner.plan();
        Ok(tuner)
    }

    pub fn config(&self) -> &SpsaConfig {
        &self.cfg
    }

    /// Committed parameters.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Number of completed steps.
    pub fn steps(&self) -> usize {
        self.k
    }

    /// Smoothed Hessian (second-order variant only).
    pub fn hessian(&self) -> Option<&DMatrix<f64>> {
        self.hessian.as_ref()
    }

    /// The point to evaluate next. Repeated calls without an intervening
    /// [`tell`](Self::tell) return the same point.
    pub fn ask(&mut self) -> &[f64] {
        self.awaiting = true;
        &self.points[self.values.len()]
    }

    /// Feed back the objective at the last asked point.
    pub fn tell(&mut self, value: f64) -> Result<Option<TunerStep>> {
        if !self.awaiting {
            return Err(Error::Run("tell called without a pending ask".into()));
        }
        if !value.is_finite() {
            return Err(Error::Run(format!("non-finite objective value {value}")));
        }
        self.awaiting = false;
        self.values.push(value);
        if self.values.len() < self.points.len() {
            return Ok(None);
        }
        let step = self.finish_stage();
        self.plan();
        Ok(step)
    }

    fn plan(&mut self) {
        self.values.clear();
        self.deltas.clear();
        let ck = self.cfg.perturbation(self.k);
        let dim = self.theta.len();
        self.points = match self.stage {
            Stage::Initial => vec![self.theta.clone()],
            Stage::Candidate => vec![self.pending.as_ref().expect("candidate planned").1.clone()],
            Stage::Gradient if self.cfg.variant == Variant::SecondOrder => {
                let d1 = rademacher(dim, &mut self.rng);
                let d2 = rademacher(dim, &mut self.rng);
                let pts = vec![
                    shifted(&self.theta, &[(ck, &d1)]),
                    shifted(&self.theta, &[(-ck, &d1)]),
                    shifted(&self.theta, &[(ck, &d1), (ck, &d2)]),
                    shifted(&self.theta, &[(-ck, &d1), (ck, &d2)]),
                ];
                self.deltas = vec![d1, d2];
                pts
            }
            Stage::Gradient => {
                let mut pts = Vec::new();
                for _ in 0..self.cfg.gradient_samples() {
                    let d = rademacher(dim, &mut self.rng);
                    pts.push(shifted(&self.theta, &[(ck, &d)]));
                    pts.push(shifted(&self.theta, &[(-ck, &d)]));
                    self.deltas.push(d);
                }
                pts
            }
        };
    }

    fn finish_stage(&mut self) -> Option<TunerStep> {
        let k = self.k;
        let ck = self.cfg.perturbation(k);
        match self.stage {
            Stage::Initial => {
                self.committed_value = Some(self.values[0]);
                self.stage = Stage::Gradient;
                None
            }
            Stage::Gradient => {
                let samples = self.deltas.len().min(self.values.len() / 2);
                let samples = if self.cfg.variant == Variant::SecondOrder { 1 } else { samples };
                let mut g = vec![0.0; self.theta.len()];
                for s in 0..samples {
                    let gs = pair_gradient(self.values[2 * s], self.values[2 * s + 1], ck, &self.deltas[s]);
                    for (a, b) in g.iter_mut().zip(gs) {
                        *a += b / samples as f64;
                    }
                }
                let mean_value = self.values[..2 * samples].iter().sum::<f64>() / (2 * samples) as f64;
                match self.cfg.variant {
                    Variant::Blocking => {
                        let candidate = spsa_update(&self.theta, k, &g, &self.cfg);
                        self.pending = Some((g, candidate));
                        self.stage = Stage::Candidate;
                        None
                    }
                    Variant::SecondOrder => {
                        let sample = hessian_sample(&self.values, ck, &self.deltas[0], &self.deltas[1]);
                        let beta = self.cfg.hessian_smoothing;
                        let smoothed = match self.hessian.take() {
                            None => sample,
                            Some(h) => h * beta + sample * (1.0 - beta),
                        };
                        let direction = precondition(&smoothed, &g, self.cfg.hessian_regularization);
                        self.hessian = Some(smoothed);
                        self.theta = spsa_update(&self.theta, k, &direction, &self.cfg);
                        Some(self.complete(mean_value, g))
                    }
                    Variant::Plain | Variant::Resampling => {
                        self.theta = spsa_update(&self.theta, k, &g, &self.cfg);
                        Some(self.complete(mean_value, g))
                    }
                }
            }
            Stage::Candidate => {
                let (g, candidate) = self.pending.take().expect("candidate planned");
                let value = self.values[0];
                let committed = self.committed_value.expect("initial value recorded");
                if value <= committed + self.cfg.blocking_tolerance {
                    self.theta = candidate;
                    self.committed_value = Some(value);
                }
                self.stage = Stage::Gradient;
                let objective = self.committed_value.expect("initial value recorded");
                Some(self.complete(objective, g))
            }
        }
    }

    fn complete(&mut self, objective_value: f64, gradient_estimate: Vec<f64>) -> TunerStep {
        let step = TunerStep { k: self.k, theta: self.theta.clone(), objective_value, gradient_estimate };
        self.k += 1;
        step
    }
}

/// A run stopped by an evaluator failure, with the steps completed so far.
#[derive(Debug)]
pub struct Aborted {
    pub partial: Vec<TunerStep>,
    pub error: Error,
}

impl fmt::Display for Aborted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tuning aborted after {} steps: {}", self.partial.len(), self.error)
    }
}

impl std::error::Error for Aborted {}

/// Drive `cfg.iterations` SPSA steps against `eval`.
pub fn run<F>(cfg: &SpsaConfig, theta0: Vec<f64>, mut eval: F, rng: ChaCha8Rng) -> std::result::Result<Vec<TunerStep>, Aborted>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut tuner = Spsa::new(cfg.clone(), theta0, rng).map_err(|error| Aborted { partial: Vec::new(), error })?;
    let mut history = Vec::with_capacity(cfg.iterations);
    while history.len() < cfg.iterations {
        let outcome = eval(tuner.ask()).and_then(|v| tuner.tell(v));
        match outcome {
            Ok(Some(step)) => history.push(step),
            Ok(None) => {}
            Err(error) => return Err(Aborted { partial: history, error }),
        }
    }
    Ok(history)
}
