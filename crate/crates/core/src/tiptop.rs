//! The TipTop search/verify loop and its sample-size constants.
//!
//! Each iteration grows the search pool to `N_t = ⌈Λ·e^{εt}⌉` RR sets, solves
//! max coverage on it exactly, and checks the candidate against an independent
//! verification pool. The loop ends once a candidate verifies or its search
//! coverage passes `Λ_max`.

use std::io::Write;
use std::time::{Duration, Instant};

use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::coverage::{benefit_estimate, RRCollection};
use crate::error::{domain, Result};
use crate::graph::{Graph, Model};
use crate::maxcover::{self, CoverSolution, SeedSet, SolverLimits};
use crate::sampler::{derive_seed, Executor, Sampler};

/// Precision-halving rounds inside [`verify`].
pub const V_MAX: u32 = 6;

fn check_unit_open(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        domain(format!("{name} must lie in (0, 1), got {x}"))
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        domain(format!("epsilon must lie in (0, 1], got {eps}"))
    }
}

/// `Λ = (1+ε)(2+⅔ε)(1/ε²)·ln(2/δ)`.
pub fn lambda_initial(eps: f64, delta: f64) -> Result<f64> {
    check_eps(eps)?;
    check_unit_open("delta", delta)?;
    Ok((1.0 + eps) * (2.0 + 2.0 * eps / 3.0) * (2.0 / delta).ln() / (eps * eps))
}

/// `ln C(n, k)`.
pub fn ln_choose(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return domain(format!("k = {k} exceeds n = {n}"));
    }
    Ok(ln_binomial(n, k))
}

/// Which constant multiplies `Λ_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMaxRule {
    /// `2/ε²`, as in the algorithm listing.
    #[default]
    Listing,
    /// `1/ε²`, as in the derivation from θ.
    Analysis,
}

/// `Λ_max = (1+ε)(2+⅔ε)(2/ε²)(ln(8/δ) + ln C(n,k))`.
pub fn lambda_max(eps: f64, delta: f64, n: u64, k: u64) -> Result<f64> {
    lambda_max_with(LambdaMaxRule::Listing, eps, delta, n, k)
}

pub fn lambda_max_with(rule: LambdaMaxRule, eps: f64, delta: f64, n: u64, k: u64) -> Result<f64> {
    check_eps(eps)?;
    check_unit_open("delta", delta)?;
    if k == 0 {
        return domain("k must be at least 1");
    }
    let factor = match rule {
        LambdaMaxRule::Listing => 2.0,
        LambdaMaxRule::Analysis => 1.0,
    };
    let logs = (8.0 / delta).ln() + ln_choose(n, k)?;
    Ok((1.0 + eps) * (2.0 + 2.0 * eps / 3.0) * factor / (eps * eps) * logs)
}

/// Sample-count threshold θ with the constant `c = 2+⅔ε`:
/// `(2+⅔ε)(ln C(n,k) + ln(2/δ))·n/(OPT·ε²)`.
///
/// The printed form also carries a factor `8+ε` next to `c`; that reading is
/// `(8+ε)` times larger. Only used for reporting.
pub fn theta_threshold(eps: f64, delta: f64, n: u64, k: u64, opt: f64) -> Result<f64> {
    check_eps(eps)?;
    check_unit_open("delta", delta)?;
    if !(opt > 0.0) {
        return domain(format!("opt must be positive, got {opt}"));
    }
    let logs = ln_choose(n, k)? + (2.0 / delta).ln();
    Ok((2.0 + 2.0 * eps / 3.0) * logs * n as f64 / (opt * eps * eps))
}

/// `ε₃ = sqrt(3·ln(t_max/δ₁) / ((1−ε₁)(1−ε₂)·cov))`.
pub fn epsilon3(eps1: f64, eps2: f64, cov: u64, t_max: u32, delta1: f64) -> Result<f64> {
    if cov == 0 {
        return domain("epsilon3 needs positive coverage");
    }
    let denom = (1.0 - eps1) * (1.0 - eps2) * cov as f64;
    if !(denom > 0.0) || !(eps1 < 1.0) || !(eps2 < 1.0) {
        return domain(format!("epsilon3 factors must be positive (eps1={eps1}, eps2={eps2})"));
    }
    Ok((3.0 * (t_max as f64 / delta1).ln() / denom).sqrt())
}

/// Stopping-rule coverage threshold
/// `Λ₂ = 1 + (2+⅔ε′)(1+ε′)·ln(2/δ′)/ε′²`.
pub fn lambda2(eps_prime: f64, delta_prime: f64) -> f64 {
    1.0 + (2.0 + 2.0 * eps_prime / 3.0) * (1.0 + eps_prime) * (2.0 / delta_prime).ln()
        / (eps_prime * eps_prime)
}

/// `⌈2/ε⌉`.
pub fn delta_t_max(eps: f64) -> u32 {
    (2.0 / eps).ceil() as u32
}

/// `⌈2·ln n/ε⌉`, at least 1.
pub fn t_max(n: usize, eps: f64) -> u32 {
    ((2.0 * (n as f64).ln() / eps).ceil() as u32).max(1)
}

/// Next iteration index: `t + min(max(⌈ln(ε₁²/ε²)/ε⌉, 1), ⌈2/ε⌉)`.
pub fn increase_samples(t: u32, eps1: f64, eps: f64) -> u32 {
    let jump = ((eps1 * eps1 / (eps * eps)).ln() / eps).ceil();
    let step = jump.max(1.0).min(delta_t_max(eps) as f64);
    t + step as u32
}

/// `N_t = ⌈Λ·e^{εt}⌉`.
pub fn pool_size(lambda: f64, eps: f64, t: u32) -> u64 {
    (lambda * (eps * t as f64).exp()).ceil() as u64
}

/// Which max-coverage solver the loop calls on the search pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverMethod {
    #[default]
    Exact,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub budget: f64,
    pub model: Model,
    pub seed: u64,
    pub workers: usize,
    pub lambda_max_rule: LambdaMaxRule,
    pub method: CoverMethod,
    pub limits: SolverLimits,
}

impl SolveConfig {
    pub fn new(epsilon: f64, delta: f64, budget: f64, model: Model, seed: u64) -> SolveConfig {
        SolveConfig {
            epsilon,
            delta,
            budget,
            model,
            seed,
            workers: 1,
            lambda_max_rule: LambdaMaxRule::default(),
            method: CoverMethod::default(),
            limits: SolverLimits::from_env(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit_open("epsilon", self.epsilon)?;
        check_unit_open("delta", self.delta)?;
        if !(self.budget >= 0.0) || !self.budget.is_finite() {
            return domain(format!("budget must be a nonnegative number, got {}", self.budget));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TipTopState {
    pub t: u32,
    pub n_t: u64,
    pub t_max: u32,
    pub v_max: u32,
    pub lambda: f64,
    pub lambda_max: f64,
    pub pool: RRCollection,
}

impl TipTopState {
    pub fn new(g: &Graph, cfg: &SolveConfig, k: usize) -> Result<TipTopState> {
        let n = g.node_count();
        let lambda = lambda_initial(cfg.epsilon, cfg.delta)?;
        Ok(TipTopState {
            t: 1,
            n_t: pool_size(lambda, cfg.epsilon, 1),
            t_max: t_max(n, cfg.epsilon),
            v_max: V_MAX,
            lambda,
            lambda_max: lambda_max_with(
                cfg.lambda_max_rule,
                cfg.epsilon,
                cfg.delta,
                n as u64,
                k.max(1) as u64,
            )?,
            pool: RRCollection::new(n),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyOutcome {
    pub passed: bool,
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: Option<f64>,
    pub verify_samples: u64,
    /// `Γ·cov/|R_ver|` at the last completed round.
    pub verify_benefit: Option<f64>,
}

impl VerifyOutcome {
    /// `(1−ε₁)(1−ε₂)(1−ε₃)`, when ε₃ was reached.
    pub fn product(&self) -> Option<f64> {
        self.eps3
            .map(|e3| (1.0 - self.eps1) * (1.0 - self.eps2) * (1.0 - e3))
    }
}

/// Estimates the benefit of `candidate` on a fresh pool drawn from
/// `verify_seed`, with the precision-halving stopping rule.
///
/// `search_benefit` is the candidate's estimate on the search pool and
/// `search_cov` its coverage there.
#[allow(clippy::too_many_arguments)]
pub fn verify(
    sampler: &Sampler<'_>,
    candidate: &SeedSet,
    search_benefit: f64,
    search_cov: u64,
    cfg: &SolveConfig,
    state: &TipTopState,
    t_cap: u64,
    verify_seed: u64,
    exec: &Executor,
) -> VerifyOutcome {
    let g = sampler.graph();
    let eps = cfg.epsilon;
    let gamma = g.total_benefit();
    let delta1 = cfg.delta / 4.0;
    let delta2 = cfg.delta / 4.0;
    let delta2p = delta2 / (state.v_max as f64 * state.t_max as f64);

    let mut mask = vec![false; g.node_count()];
    for &v in &candidate.nodes {
        mask[v as usize] = true;
    }
    let mut stream = sampler.stream(verify_seed, exec);
    let mut cov: u64 = 0;
    let mut drawn: u64 = 0;
    let mut out = VerifyOutcome {
        passed: false,
        eps1: f64::INFINITY,
        eps2: f64::INFINITY,
        eps3: None,
        verify_samples: 0,
        verify_benefit: None,
    };

    for i in 0..state.v_max {
        let eps2 = eps.min(1.0) / 2f64.powi(i as i32);
        let eps2p = eps2 / (1.0 - eps2);
        let threshold = lambda2(eps2p, delta2p);
        out.eps2 = eps2;
        while (cov as f64) < threshold {
            let set = stream.next().expect("sample stream is unbounded");
            drawn += 1;
            if set.hits(&mask) {
                cov += 1;
            }
            if drawn > t_cap {
                out.eps2 = 2.0 * eps2;
                out.verify_samples = drawn;
                return out;
            }
        }
        let b_ver = gamma * cov as f64 / drawn as f64;
        out.verify_benefit = Some(b_ver);
        out.eps1 = if search_benefit > 0.0 {
            1.0 - b_ver / search_benefit
        } else {
            f64::INFINITY
        };
        if out.eps1 > eps {
            out.verify_samples = drawn;
            return out;
        }
        let eps3 = epsilon3(out.eps1, eps2, search_cov, state.t_max, delta1)
            .expect("coverage is positive once the candidate verified");
        out.eps3 = Some(eps3);
        if (1.0 - out.eps1) * (1.0 - eps2) * (1.0 - eps3) > 1.0 - eps {
            out.passed = true;
            out.verify_samples = drawn;
            return out;
        }
    }
    out.verify_samples = drawn;
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Verified,
    LambdaMax,
    /// `t` moved past `t_max` without either exit firing.
    IterationCap,
    /// No single node fits the budget.
    Unaffordable,
}

/// One line of the run log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub t: u32,
    pub n_t: u64,
    pub objective: u64,
    pub search_benefit: f64,
    pub seed: Vec<u32>,
    pub passed: bool,
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: Option<f64>,
    pub verify_samples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub seed: SeedSet,
    /// `Γ·Cov/N_t` on the final search pool.
    pub est_benefit: f64,
    pub search_samples: u64,
    pub verify_samples: u64,
    pub iterations: u32,
    pub stop_reason: StopReason,
    pub wall_time: Duration,
    pub t_max: u32,
    pub lambda: f64,
    pub lambda_max: f64,
    /// Coverage of `seed` on the final search pool.
    pub search_cov: u64,
    pub log: Vec<IterationRecord>,
}

impl Solution {
    /// Writes the run log as JSON lines.
    pub fn write_log<W: Write>(&self, mut w: W) -> Result<()> {
        for rec in &self.log {
            let line = serde_json::to_string(rec).map_err(std::io::Error::other)?;
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

fn solve_pool(pool: &RRCollection, g: &Graph, cfg: &SolveConfig) -> Result<CoverSolution> {
    match cfg.method {
        CoverMethod::Exact => maxcover::solve_exact(pool, g.costs(), cfg.budget, cfg.limits),
        CoverMethod::Greedy => Ok(maxcover::solve_greedy(pool, g.costs(), cfg.budget)),
    }
}

/// Runs TipTop on `g`.
pub fn run_tiptop(g: &Graph, cfg: &SolveConfig) -> Result<Solution> {
    let start = Instant::now();
    cfg.validate()?;
    let sampler = Sampler::new(g, cfg.model)?;
    let k = g.max_seed_size(cfg.budget);
    let mut state = TipTopState::new(g, cfg, k)?;
    let mut solution = Solution {
        seed: SeedSet::empty(),
        est_benefit: 0.0,
        search_samples: 0,
        verify_samples: 0,
        iterations: 0,
        stop_reason: StopReason::Unaffordable,
        wall_time: Duration::ZERO,
        t_max: state.t_max,
        lambda: state.lambda,
        lambda_max: state.lambda_max,
        search_cov: 0,
        log: Vec::new(),
    };
    if k == 0 {
        solution.wall_time = start.elapsed();
        return Ok(solution);
    }

    let exec = Executor::new(cfg.workers);
    let search_seed = derive_seed(cfg.seed, 0);
    let gamma = g.total_benefit();
    loop {
        state.n_t = pool_size(state.lambda, cfg.epsilon, state.t);
        let have = state.pool.len() as u64;
        if state.n_t > have {
            state
                .pool
                .extend(sampler.batch(search_seed, have..state.n_t, &exec));
        }
        let cand = solve_pool(&state.pool, g, cfg)?;
        let cov = cand.covered as u64;
        let search_benefit = benefit_estimate(cand.covered, state.pool.len(), gamma)?;
        solution.iterations += 1;

        let outcome = if cand.seed.is_empty() {
            VerifyOutcome {
                passed: false,
                eps1: f64::INFINITY,
                eps2: f64::INFINITY,
                eps3: None,
                verify_samples: 0,
                verify_benefit: None,
            }
        } else {
            let t_cap = (1u64 << state.v_max) * state.n_t;
            let verify_seed = derive_seed(cfg.seed, solution.iterations as u64);
            verify(
                &sampler,
                &cand.seed,
                search_benefit,
                cov,
                cfg,
                &state,
                t_cap,
                verify_seed,
                &exec,
            )
        };
        debug_assert!(!outcome.passed || outcome.product().unwrap() > 1.0 - cfg.epsilon);
        solution.verify_samples += outcome.verify_samples;
        solution.log.push(IterationRecord {
            t: state.t,
            n_t: state.n_t,
            objective: cov,
            search_benefit,
            seed: cand.seed.nodes.clone(),
            passed: outcome.passed,
            eps1: outcome.eps1,
            eps2: outcome.eps2,
            eps3: outcome.eps3,
            verify_samples: outcome.verify_samples,
        });
        solution.seed = cand.seed;
        solution.est_benefit = search_benefit;
        solution.search_samples = state.n_t;
        solution.search_cov = cov;

        if outcome.passed {
            solution.stop_reason = StopReason::Verified;
            break;
        }
        if cov as f64 > state.lambda_max {
            solution.stop_reason = StopReason::LambdaMax;
            break;
        }
        state.t = increase_samples(state.t, outcome.eps1, cfg.epsilon);
        if state.t > state.t_max {
            solution.stop_reason = StopReason::IterationCap;
            break;
        }
    }
    solution.wall_time = start.elapsed();
    Ok(solution)
}
