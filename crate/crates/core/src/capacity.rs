//! Sum-capacities and their bounds.
//!
//! Every capacity is a maximum of the sum-rate `I(M; Y)` over product message
//! distributions and an encoder class. The distribution part is handled by
//! [`maximize_over_pi`], a coarse grid followed by multi-start Nelder-Mead on
//! the product of simplices.

use alloc::{format, string::String, vec, vec::Vec};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channels::{ChannelType, MacChannel};
use crate::correlations::{
    deterministic_map, e_star, pseudo_telepathy_box, tsirelson_box, CorrelationBox,
    DeterministicStrategy, Encoder, Resource, StrategySpace, DEFAULT_ENUMERATION_CAP,
};
use crate::error::{invalid, Error, Result};
use crate::games::{chsh_game, NonlocalGame};
use crate::index;
use crate::infotheory::{deterministic_rate, entropy, output_distribution, sum_rate, ProductDistribution};

/// Grid points beyond which the coarse grid is thinned.
const MAX_GRID_POINTS: usize = 250_000;
const HYPOTHESIS_TOLERANCE: f64 = 1e-10;
const CROSS_CHECK_TOLERANCE: f64 = 1e-9;
const INITIAL_SIMPLEX_STEP: f64 = 0.05;

/// Settings for [`maximize_over_pi`] and the exhaustive enumerations.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    /// Coarse grid step; `None` picks 0.05 for `d = 2` and 0.1 otherwise.
    pub grid_step: Option<f64>,
    /// Number of local refinements, including the one from the grid best.
    pub restarts: usize,
    /// Stop when the simplex's objective spread falls below this.
    pub tolerance: f64,
    /// Nelder-Mead iteration budget per restart.
    pub max_iterations: usize,
    pub seed: u64,
    pub enumeration_cap: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grid_step: None,
            restarts: 20,
            tolerance: 1e-7,
            max_iterations: 2000,
            seed: 0,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(invalid("tolerance", format!("must be > 0, got {}", self.tolerance)));
        }
        if self.restarts < 1 {
            return Err(invalid("restarts", "must be >= 1"));
        }
        if let Some(step) = self.grid_step {
            if !(step > 0.0 && step <= 1.0) {
                return Err(invalid("grid_step", format!("must be in (0, 1], got {step}")));
            }
        }
        Ok(())
    }

    pub fn grid_step_for(&self, symbols: usize) -> f64 {
        self.grid_step
            .unwrap_or(if symbols <= 2 { 0.05 } else { 0.1 })
    }
}

/// Exact, or a one-sided bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    Exact,
    LowerBound,
    UpperBound,
}

impl BoundKind {
    pub fn label(self) -> &'static str {
        match self {
            BoundKind::Exact => "exact",
            BoundKind::LowerBound => "lower-bound",
            BoundKind::UpperBound => "upper-bound",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OptimizerDiagnostics {
    pub grid_step: f64,
    pub grid_points: usize,
    pub grid_best: f64,
    pub restarts: usize,
    /// Nelder-Mead iterations summed over restarts.
    pub iterations: usize,
    /// Largest coordinate distance from the best vertex in the final simplex of
    /// the restart that produced the result (the grid-best restart when no
    /// refinement improved on the grid).
    pub simplex_size: f64,
    /// Objective evaluations; for enumerations, summed over vertices.
    pub evaluations: usize,
}

/// Output of [`maximize_over_pi`].
#[derive(Clone, Debug, PartialEq)]
pub struct PiMaximum {
    pub value: f64,
    pub argmax: ProductDistribution,
    pub diagnostics: OptimizerDiagnostics,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CapacityResult {
    /// Bits per channel use.
    pub value: f64,
    pub kind: BoundKind,
    pub resource: Resource,
    pub argmax_pi: Option<ProductDistribution>,
    /// Human-readable identifier of the maximizing encoder.
    pub argmax_encoder: Option<String>,
    pub diagnostics: Option<OptimizerDiagnostics>,
    /// Residual of the internal consistency check, when one is run.
    pub cross_check: Option<f64>,
}

impl CapacityResult {
    /// One-line `key=value;…` summary suitable for a CSV cell.
    pub fn diagnostic_summary(&self) -> String {
        let mut parts = Vec::new();
        if let Some(enc) = &self.argmax_encoder {
            parts.push(format!("encoder={enc}"));
        }
        if let Some(d) = &self.diagnostics {
            parts.push(format!("restarts={}", d.restarts));
            parts.push(format!("iterations={}", d.iterations));
            parts.push(format!("simplex={:.3e}", d.simplex_size));
        }
        if let Some(r) = self.cross_check {
            parts.push(format!("residual={r:.3e}"));
        }
        parts.join(";")
    }
}

fn grid_units(step: f64) -> usize {
    libm::round(1.0 / step).max(1.0) as usize
}

/// All compositions of `units` into `parts` non-negative parts, in
/// lexicographic order.
fn compositions(units: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(units: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(units);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=units {
            prefix.push(k);
            rec(units - k, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(units, parts, &mut Vec::new(), &mut out);
    out
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Maps unconstrained free coordinates to a product distribution by
/// clipping at zero and renormalizing each sender's vector.
fn project(z: &[f64], players: usize, symbols: usize, out: &mut [Vec<f64>]) {
    let free = symbols - 1;
    for (k, marginal) in out.iter_mut().enumerate().take(players) {
        let coords = &z[k * free..(k + 1) * free];
        let mut total = 0.0;
        for (slot, &v) in marginal.iter_mut().zip(coords) {
            *slot = v.max(0.0);
            total += *slot;
        }
        let last = (1.0 - coords.iter().sum::<f64>()).max(0.0);
        marginal[free] = last;
        total += last;
        if total > 0.0 {
            marginal.iter_mut().for_each(|p| *p /= total);
        } else {
            marginal.fill(1.0 / symbols as f64);
        }
    }
}

fn free_coordinates(marginals: &[Vec<f64>]) -> Vec<f64> {
    marginals
        .iter()
        .flat_map(|m| m[..m.len() - 1].iter().copied())
        .collect()
}

struct Evaluator<'a, F> {
    objective: &'a F,
    players: usize,
    symbols: usize,
    scratch: Vec<Vec<f64>>,
    evaluations: usize,
}

impl<F: Fn(&ProductDistribution) -> f64> Evaluator<'_, F> {
    fn marginals(&mut self, z: &[f64]) -> Vec<Vec<f64>> {
        project(z, self.players, self.symbols, &mut self.scratch);
        self.scratch.clone()
    }

    fn eval(&mut self, z: &[f64]) -> f64 {
        let pi = ProductDistribution::from_unchecked(self.marginals(z));
        self.evaluations += 1;
        let v = (self.objective)(&pi);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }
}

struct LocalResult {
    value: f64,
    point: Vec<f64>,
    iterations: usize,
    simplex_size: f64,
}

/// Nelder-Mead maximization started at `start`.
fn nelder_mead<F: Fn(&ProductDistribution) -> f64>(
    ev: &mut Evaluator<'_, F>,
    start: &[f64],
    cfg: &OptimizerConfig,
) -> LocalResult {
    let dim = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..dim {
        let mut v = start.to_vec();
        v[i] += if v[i] + INITIAL_SIMPLEX_STEP <= 1.0 {
            INITIAL_SIMPLEX_STEP
        } else {
            -INITIAL_SIMPLEX_STEP
        };
        simplex.push(v);
    }
    // Work on negated values so the textbook minimization steps apply.
    let mut values: Vec<f64> = simplex.iter().map(|v| -ev.eval(v)).collect();
    let mut iterations = 0;
    let mut order: Vec<usize> = (0..=dim).collect();
    loop {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let best = order[0];
        let worst = order[dim];
        let spread = values[worst] - values[best];
        if spread.abs() < cfg.tolerance || iterations >= cfg.max_iterations {
            let size = simplex
                .iter()
                .map(|v| {
                    v.iter()
                        .zip(&simplex[best])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            return LocalResult {
                value: -values[best],
                point: simplex[best].clone(),
                iterations,
                simplex_size: size,
            };
        }
        iterations += 1;
        let second_worst = order[dim - 1];
        let mut centroid = vec![0.0; dim];
        for &i in &order[..dim] {
            for (c, &x) in centroid.iter_mut().zip(&simplex[i]) {
                *c += x / dim as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(&c, &w)| c + t * (c - w))
                .collect()
        };
        let reflected = along(1.0);
        let fr = -ev.eval(&reflected);
        if fr < values[best] {
            let expanded = along(2.0);
            let fe = -ev.eval(&expanded);
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[worst] {
            let p = along(0.5);
            let f = -ev.eval(&p);
            (p, f)
        } else {
            let p = along(-0.5);
            let f = -ev.eval(&p);
            (p, f)
        };
        if fc < values[worst].min(fr) {
            simplex[worst] = contracted;
            values[worst] = fc;
            continue;
        }
        let anchor = simplex[best].clone();
        for &i in &order[1..] {
            let shrunk: Vec<f64> = anchor
                .iter()
                .zip(&simplex[i])
                .map(|(&a, &x)| a + 0.5 * (x - a))
                .collect();
            values[i] = -ev.eval(&shrunk);
            simplex[i] = shrunk;
        }
    }
}

fn random_marginals(rng: &mut ChaCha8Rng, players: usize, symbols: usize) -> Vec<Vec<f64>> {
    (0..players)
        .map(|_| {
            // Dirichlet(1, …, 1) via normalized exponentials.
            let mut m: Vec<f64> = (0..symbols)
                .map(|_| -libm::log(1.0 - rng.gen::<f64>()))
                .collect();
            let total: f64 = m.iter().sum();
            m.iter_mut().for_each(|p| *p /= total);
            m
        })
        .collect()
}

/// Maximizes `objective` over product distributions of `players` senders with
/// `symbols` messages each.
///
/// The coarse grid is scanned in lexicographic order and only a strictly
/// better point replaces the incumbent; refinements start from the grid best
/// and from `restarts − 1` seeded random points. The result is never worse
/// than the best grid point and is reproducible for a fixed seed.
pub fn maximize_over_pi<F>(objective: F, players: usize, symbols: usize, cfg: &OptimizerConfig) -> PiMaximum
where
    F: Fn(&ProductDistribution) -> f64,
{
    assert!(players >= 1 && symbols >= 1, "empty message alphabet");
    let mut ev = Evaluator {
        objective: &objective,
        players,
        symbols,
        scratch: vec![vec![0.0; symbols]; players],
        evaluations: 0,
    };

    if symbols == 1 {
        let z: Vec<f64> = Vec::new();
        let value = ev.eval(&z);
        return PiMaximum {
            value,
            argmax: ProductDistribution::uniform(players, 1),
            diagnostics: OptimizerDiagnostics {
                evaluations: 1,
                grid_best: value,
                ..OptimizerDiagnostics::default()
            },
        };
    }

    let mut units = grid_units(cfg.grid_step_for(symbols));
    while units > 1
        && binomial(units + symbols - 1, symbols - 1)
            .checked_pow(players as u32)
            .map_or(true, |c| c > MAX_GRID_POINTS)
    {
        units -= 1;
    }
    let simplex_grid = compositions(units, symbols);
    let grid_points = index::pow(simplex_grid.len(), players);
    let mut best_value = f64::NEG_INFINITY;
    let mut best_point: Vec<f64> = Vec::new();
    let mut digits = vec![0; players];
    for g in 0..grid_points {
        index::decode(g, simplex_grid.len(), &mut digits);
        let z: Vec<f64> = digits
            .iter()
            .flat_map(|&i| simplex_grid[i][..symbols - 1].iter().map(|&u| u as f64 / units as f64))
            .collect();
        let v = ev.eval(&z);
        if v > best_value || best_point.is_empty() {
            best_value = v;
            best_point = z;
        }
    }
    let grid_best = best_value;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts = vec![best_point.clone()];
    for _ in 1..cfg.restarts.max(1) {
        starts.push(free_coordinates(&random_marginals(&mut rng, players, symbols)));
    }

    let mut iterations = 0;
    let mut simplex_size = None;
    let mut first_size = 0.0;
    for (i, start) in starts.iter().enumerate() {
        let local = nelder_mead(&mut ev, start, cfg);
        iterations += local.iterations;
        if i == 0 {
            first_size = local.simplex_size;
        }
        if local.value > best_value {
            best_value = local.value;
            best_point = local.point;
            simplex_size = Some(local.simplex_size);
        }
    }
    let simplex_size = simplex_size.unwrap_or(first_size);

    let argmax = ProductDistribution::from_unchecked(ev.marginals(&best_point));
    PiMaximum {
        value: best_value,
        argmax,
        diagnostics: OptimizerDiagnostics {
            grid_step: 1.0 / units as f64,
            grid_points,
            grid_best,
            restarts: starts.len(),
            iterations,
            simplex_size,
            evaluations: ev.evaluations,
        },
    }
}

fn strategy_space(game: &NonlocalGame, cfg: &OptimizerConfig) -> Result<StrategySpace> {
    StrategySpace::new(
        game.players(),
        game.questions(),
        game.input_alphabet(),
        cfg.enumeration_cap,
    )
    .map_err(|e| match e {
        Error::EnumerationCap { count, cap, .. } => Error::EnumerationCap {
            what: "deterministic encoders",
            count,
            cap,
            hint: "use classical_upper_bound (L-bound) for this game instead",
        },
        other => other,
    })
}

/// Folds `(index, value)` candidates keeping the larger value and, on ties,
/// the lower index. Associative and commutative, so parallel reduction order
/// does not matter.
fn better<T>(a: (u64, f64, T), b: (u64, f64, T)) -> (u64, f64, T) {
    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
        b
    } else {
        a
    }
}

#[cfg(feature = "parallel")]
fn best_over_indices<T, F>(count: u64, f: F) -> Option<(u64, f64, T)>
where
    T: Send,
    F: Fn(u64) -> (f64, T) + Sync + Send,
{
    use rayon::prelude::*;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let (v, t) = f(i);
            (i, v, t)
        })
        .reduce_with(better)
}

#[cfg(not(feature = "parallel"))]
fn best_over_indices<T, F>(count: u64, f: F) -> Option<(u64, f64, T)>
where
    F: Fn(u64) -> (f64, T),
{
    (0..count)
        .map(|i| {
            let (v, t) = f(i);
            (i, v, t)
        })
        .reduce(better)
}

fn describe_map(ch: &MacChannel, map: &[usize]) -> String {
    let game = ch.game();
    let n = game.players();
    let mut q = vec![0; n];
    let mut a = vec![0; n];
    let cells: Vec<String> = map
        .iter()
        .map(|&x| {
            game.split_input(x, &mut q, &mut a);
            let pairs: Vec<String> = q.iter().zip(&a).map(|(q, a)| format!("{q}.{a}")).collect();
            pairs.join(" ")
        })
        .collect();
    cells.join("|")
}

/// Classical sum-capacity by enumerating every deterministic encoder (the
/// vertices of the local set) and maximizing the rate over `π` at each.
pub fn classical_capacity_exact(ch: &MacChannel, cfg: &OptimizerConfig) -> Result<CapacityResult> {
    cfg.validate()?;
    let game = ch.game();
    let space = strategy_space(game, cfg)?;
    let (n, d) = (game.players(), game.questions());
    let (index, _, (pm, evaluations)) = best_over_indices(space.count(), |i| {
        let map = deterministic_map(&space.strategy(i));
        let pm = maximize_over_pi(|pi| deterministic_rate(pi, &map, ch), n, d, cfg);
        let evals = pm.diagnostics.evaluations;
        (pm.value, (pm, evals))
    })
    .ok_or(Error::EmptyVertexSet)?;
    let map = deterministic_map(&space.strategy(index));
    let mut diagnostics = pm.diagnostics;
    diagnostics.evaluations = evaluations;
    Ok(CapacityResult {
        value: pm.value,
        kind: BoundKind::Exact,
        resource: Resource::Local,
        argmax_pi: Some(pm.argmax),
        argmax_encoder: Some(format!("vertex#{index}[{}]", describe_map(ch, &map))),
        diagnostics: Some(diagnostics),
        cross_check: None,
    })
}

/// Largest rate any deterministic encoder achieves at the fixed `pi`, with
/// the index of the first encoder attaining it.
pub fn best_deterministic_rate(ch: &MacChannel, pi: &ProductDistribution, cfg: &OptimizerConfig) -> Result<(f64, u64)> {
    let space = strategy_space(ch.game(), cfg)?;
    let (index, value, ()) = best_over_indices(space.count(), |i| {
        (deterministic_rate(pi, &deterministic_map(&space.strategy(i)), ch), ())
    })
    .ok_or(Error::EmptyVertexSet)?;
    Ok((value, index))
}

/// Sum of the `r` largest entries of `weights`.
pub fn top_mass(weights: &[f64], r: usize) -> f64 {
    let mut sorted = weights.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.iter().take(r).sum()
}

/// Upper limit on the win probability an encoder class can reach.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WinCeiling {
    /// `ω ≤ c` for every `π`.
    Constant(f64),
    /// `ω ≤ Σ` of the `r` most likely messages under `π`: at most `r`
    /// question tuples can be won by one deterministic strategy.
    TopMessages(usize),
}

impl WinCeiling {
    fn at(&self, joint: &[f64]) -> f64 {
        match *self {
            WinCeiling::Constant(c) => c,
            WinCeiling::TopMessages(r) => top_mass(joint, r),
        }
    }
}

/// `max_π { H(M) + (f_L − f_W) · ω_max(π) } − f_L`.
pub fn resource_dependent_bound(ch: &MacChannel, ceiling: WinCeiling, cfg: &OptimizerConfig) -> Result<CapacityResult> {
    cfg.validate()?;
    match ceiling {
        WinCeiling::Constant(c) if !(0.0..=1.0).contains(&c) => {
            return Err(invalid("max_omega", format!("must lie in [0, 1], got {c}")));
        }
        WinCeiling::TopMessages(r) if r > ch.output_count() => {
            return Err(invalid("r_max", format!("{r} exceeds Δ = {}", ch.output_count())));
        }
        _ => {}
    }
    let game = ch.game();
    let (fw, fl) = (ch.noise_win(), ch.noise_lose());
    let pm = maximize_over_pi(
        |pi| pi.entropy() + (fl - fw) * ceiling.at(&pi.joint()) - fl,
        game.players(),
        game.questions(),
        cfg,
    );
    Ok(CapacityResult {
        value: pm.value,
        kind: BoundKind::UpperBound,
        resource: Resource::Any,
        argmax_pi: Some(pm.argmax),
        argmax_encoder: None,
        diagnostics: Some(pm.diagnostics),
        cross_check: None,
    })
}

/// `r_max = round(ω*_L · Δ)`.
pub fn r_max(omega: f64, delta: usize) -> usize {
    libm::round(omega * delta as f64) as usize
}

/// Classical upper bound from the optimal classical win probability `omega`
/// at uniform questions.
pub fn classical_upper_bound(ch: &MacChannel, omega: f64, cfg: &OptimizerConfig) -> Result<CapacityResult> {
    if !(omega > 0.0 && omega <= 1.0) {
        return Err(invalid("omega", format!("must lie in (0, 1], got {omega}")));
    }
    let r = r_max(omega, ch.output_count());
    let mut result = resource_dependent_bound(ch, WinCeiling::TopMessages(r), cfg)?;
    result.resource = Resource::Local;
    Ok(result)
}

/// Optimal classical win probability with one optimal strategy.
#[derive(Clone, Debug, PartialEq)]
pub struct GameValue {
    pub value: f64,
    /// Number of question tuples won by `strategy`.
    pub wins: usize,
    pub questions: usize,
    pub strategy: DeterministicStrategy,
}

/// Brute-force `ω*_L` over all `(D^d)^n` deterministic strategies at uniform
/// questions. Ties keep the lowest strategy index.
pub fn classical_game_value(game: &NonlocalGame, cap: u64) -> Result<GameValue> {
    let space = StrategySpace::new(game.players(), game.questions(), game.answers(), cap)?;
    let n = game.players();
    let tuples = game.message_count();
    let (index, _, wins) = best_over_indices(space.count(), |i| {
        let s = space.strategy(i);
        let mut q = vec![0; n];
        let mut a = vec![0; n];
        let wins = (0..tuples)
            .filter(|&qi| {
                index::decode(qi, game.questions(), &mut q);
                for (k, slot) in a.iter_mut().enumerate() {
                    *slot = s.response(k, q[k]);
                }
                game.wins(&q, &a)
            })
            .count();
        (wins as f64, wins)
    })
    .ok_or(Error::EmptyVertexSet)?;
    Ok(GameValue {
        value: wins as f64 / tuples as f64,
        wins,
        questions: tuples,
        strategy: space.strategy(index),
    })
}

/// Closed form `3/4 + 2^{−(⌈n/2⌉ + 1)}` for the parity game, `n >= 3`.
pub fn mpp_classical_value(players: usize) -> Result<f64> {
    if players < 3 {
        return Err(invalid("players", format!("closed form needs n >= 3, got {players}")));
    }
    let exponent = players.div_ceil(2) + 1;
    Ok(0.75 + libm::pow(2.0, -(exponent as f64)))
}

/// `log2 Δ − f_W` for a box that wins with certainty and has uniform output
/// marginals, cross-checked against the rate of its lift at uniform `π`.
pub fn pseudo_telepathy_capacity(ch: &MacChannel, b: &CorrelationBox) -> Result<CapacityResult> {
    let game = ch.game();
    if !b.matches_game(game) {
        return Err(Error::DimensionMismatch {
            what: "box scenario vs game",
            expected: game.message_count() * game.answer_tuple_count(),
            found: b.table().len(),
        });
    }
    let enc = e_star(b);
    let pi = ProductDistribution::uniform(game.players(), game.questions());
    let omega = crate::infotheory::win_probability(&pi, &enc, game)?;
    if (1.0 - omega).abs() > HYPOTHESIS_TOLERANCE {
        return Err(Error::Hypothesis(format!(
            "box does not win with certainty (ω = {omega})"
        )));
    }
    let uniformity = b.output_uniformity_violation();
    if uniformity > HYPOTHESIS_TOLERANCE {
        return Err(Error::Hypothesis(format!(
            "box outputs are not uniform over their support (deviation {uniformity:e})"
        )));
    }
    let value = ch.rate_ceiling();
    let direct = sum_rate(&pi, &enc, ch)?;
    let output_entropy = entropy(&output_distribution(&pi, &enc, ch)?);
    let log_delta = libm::log2(ch.output_count() as f64);
    let residual = (direct - value).abs().max((output_entropy - log_delta).abs());
    if residual > CROSS_CHECK_TOLERANCE {
        return Err(Error::Hypothesis(format!(
            "direct sum-rate {direct} disagrees with log Δ − f_W = {value}"
        )));
    }
    Ok(CapacityResult {
        value,
        kind: BoundKind::Exact,
        resource: b.resource().clone(),
        argmax_pi: Some(pi),
        argmax_encoder: Some(String::from("E*(box)")),
        diagnostics: None,
        cross_check: Some(residual),
    })
}

/// Lower bound from the lift of one box, maximized over `π`.
pub fn box_lower_bound(ch: &MacChannel, b: &CorrelationBox, cfg: &OptimizerConfig) -> Result<CapacityResult> {
    cfg.validate()?;
    let game = ch.game();
    let enc = e_star(b);
    if !enc.matches_game(game) {
        return Err(Error::DimensionMismatch {
            what: "box scenario vs game",
            expected: game.message_count() * game.answer_tuple_count(),
            found: b.table().len(),
        });
    }
    let pm = maximize_encoder(ch, &enc, cfg);
    Ok(CapacityResult {
        value: pm.value,
        kind: BoundKind::LowerBound,
        resource: b.resource().clone(),
        argmax_pi: Some(pm.argmax),
        argmax_encoder: Some(String::from("E*(box)")),
        diagnostics: Some(pm.diagnostics),
        cross_check: None,
    })
}

fn maximize_encoder(ch: &MacChannel, enc: &Encoder, cfg: &OptimizerConfig) -> PiMaximum {
    let game = ch.game();
    maximize_over_pi(
        |pi| sum_rate(pi, enc, ch).unwrap_or(f64::NEG_INFINITY),
        game.players(),
        game.questions(),
        cfg,
    )
}

fn is_chsh(game: &NonlocalGame) -> bool {
    let chsh = chsh_game();
    game.players() == 2
        && game.questions() == 2
        && game.answers() == 2
        && game.winning_inputs() == chsh.winning_inputs()
}

/// Quantum lower bound for CHSH channels from the lifted Tsirelson box.
pub fn quantum_lower_bound_chsh(ch: &MacChannel, cfg: &OptimizerConfig) -> Result<CapacityResult> {
    if !is_chsh(ch.game()) {
        return Err(Error::Unsupported(format!(
            "quantum lower bound needs a CHSH channel, got `{}`",
            ch.game().name()
        )));
    }
    let mut result = box_lower_bound(ch, &tsirelson_box(), cfg)?;
    result.argmax_encoder = Some(String::from("E*(tsirelson)"));
    Ok(result)
}

/// Largest lifted-box rate over a set of boxes, reported as an upper bound
/// for the set's convex hull under `label`.
pub fn vertex_bound(ch: &MacChannel, boxes: &[CorrelationBox], label: &str, cfg: &OptimizerConfig) -> Result<CapacityResult> {
    cfg.validate()?;
    if boxes.is_empty() {
        return Err(Error::EmptyVertexSet);
    }
    let game = ch.game();
    if let Some(bad) = boxes.iter().position(|b| !b.matches_game(game)) {
        return Err(Error::DimensionMismatch {
            what: "vertex scenario vs game",
            expected: game.message_count() * game.answer_tuple_count(),
            found: boxes[bad].table().len(),
        });
    }
    let (index, _, pm) = best_over_indices(boxes.len() as u64, |i| {
        let pm = maximize_encoder(ch, &e_star(&boxes[i as usize]), cfg);
        (pm.value, pm)
    })
    .ok_or(Error::EmptyVertexSet)?;
    Ok(CapacityResult {
        value: pm.value,
        kind: BoundKind::UpperBound,
        resource: Resource::Custom(label.into()),
        argmax_pi: Some(pm.argmax),
        argmax_encoder: Some(format!("vertex#{index}")),
        diagnostics: Some(pm.diagnostics),
        cross_check: None,
    })
}

/// A capacity kind requested in a sweep.
#[derive(Clone, Debug, PartialEq)]
pub enum SweepResource {
    LocalExact,
    LocalBound,
    QuantumLower,
    QuantumExact,
    NoSignalingExact,
    Vertices { label: String, boxes: Vec<CorrelationBox> },
}

impl SweepResource {
    pub fn label(&self) -> String {
        match self {
            SweepResource::LocalExact => "L-exact".into(),
            SweepResource::LocalBound => "L-bound".into(),
            SweepResource::QuantumLower => "Q-lower".into(),
            SweepResource::QuantumExact => "Q-exact".into(),
            SweepResource::NoSignalingExact => "NS-exact".into(),
            SweepResource::Vertices { label, .. } => format!("vertex-file:{label}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    /// Requested grid value.
    pub eta: f64,
    /// Value used to build the channel after endpoint clamping.
    pub eta_used: f64,
    pub resource: String,
    pub result: CapacityResult,
}

/// `points` evenly spaced values from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(invalid("eta_grid", "need at least one point"));
    }
    for (name, v) in [("eta_grid start", start), ("eta_grid stop", stop)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(invalid("eta_grid", format!("{name} {v} is outside [0, 1]")));
        }
    }
    if points == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| if i + 1 == points { stop } else { start + step * i as f64 })
        .collect())
}

/// Pseudo-telepathy box of `game` whose resource class is admissible for
/// `wanted`.
fn exact_box(game: &NonlocalGame, wanted: &Resource) -> Option<CorrelationBox> {
    let b = pseudo_telepathy_box(game)?;
    match (wanted, b.resource()) {
        (Resource::Quantum, Resource::Quantum) => Some(b),
        // quantum boxes are no-signaling
        (Resource::NoSignaling, _) => Some(b.with_resource(Resource::NoSignaling)),
        _ => None,
    }
}

/// Rows of every requested capacity for each `η` of a one-parameter family.
/// Requests that cannot be served for the game are refused before any work.
pub fn sweep(
    game: &NonlocalGame,
    family: ChannelType,
    etas: &[f64],
    resources: &[SweepResource],
    cfg: &OptimizerConfig,
) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    if let Some(&bad) = etas.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(invalid("eta", format!("{bad} is outside [0, 1]")));
    }
    let mut omega = None;
    for r in resources {
        match r {
            SweepResource::LocalExact => {
                strategy_space(game, cfg)?;
            }
            SweepResource::LocalBound => {
                let value = match classical_game_value(game, cfg.enumeration_cap) {
                    Ok(v) => v.value,
                    Err(e) if game.name().starts_with("mpp:") => {
                        mpp_classical_value(game.players()).map_err(|_| e)?
                    }
                    Err(e) => return Err(e),
                };
                omega = Some(value);
            }
            SweepResource::QuantumLower if !is_chsh(game) => {
                return Err(Error::Unsupported(format!(
                    "Q-lower is only available for chsh, not `{}`",
                    game.name()
                )));
            }
            SweepResource::QuantumExact if exact_box(game, &Resource::Quantum).is_none() => {
                return Err(Error::Unsupported(format!(
                    "Q-exact needs a built-in quantum pseudo-telepathy box; `{}` has none",
                    game.name()
                )));
            }
            SweepResource::NoSignalingExact if exact_box(game, &Resource::NoSignaling).is_none() => {
                return Err(Error::Unsupported(format!(
                    "NS-exact needs a built-in box winning `{}` with certainty",
                    game.name()
                )));
            }
            SweepResource::Vertices { boxes, .. } => {
                if boxes.is_empty() {
                    return Err(Error::EmptyVertexSet);
                }
                if boxes.iter().any(|b| !b.matches_game(game)) {
                    return Err(invalid("vertex-file", "vertex scenario does not match the game"));
                }
            }
            _ => {}
        }
    }

    let mut rows = Vec::with_capacity(etas.len() * resources.len());
    for &eta in etas {
        let (eta_used, _) = family.clamp_eta(eta);
        let ch = family.build(game, eta_used)?;
        for r in resources {
            let result = match r {
                SweepResource::LocalExact => classical_capacity_exact(&ch, cfg)?,
                SweepResource::LocalBound => {
                    classical_upper_bound(&ch, omega.expect("computed during validation"), cfg)?
                }
                SweepResource::QuantumLower => quantum_lower_bound_chsh(&ch, cfg)?,
                SweepResource::QuantumExact => pseudo_telepathy_capacity(
                    &ch,
                    &exact_box(game, &Resource::Quantum).expect("validated"),
                )?,
                SweepResource::NoSignalingExact => pseudo_telepathy_capacity(
                    &ch,
                    &exact_box(game, &Resource::NoSignaling).expect("validated"),
                )?,
                SweepResource::Vertices { label, boxes } => vertex_bound(&ch, boxes, label, cfg)?,
            };
            rows.push(SweepRow {
                eta,
                eta_used,
                resource: r.label(),
                result,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::noise_f;
    use crate::correlations::{magic_square_box, mpp_box, pr_box};
    use crate::games::{magic_square_game, mpp_game};

    fn quick() -> OptimizerConfig {
        OptimizerConfig {
            restarts: 4,
            ..OptimizerConfig::default()
        }
    }

    #[test]
    fn compositions_are_lexicographic() {
        let c = compositions(2, 3);
        assert_eq!(c.len(), binomial(4, 2));
        assert_eq!(c[0], vec![0, 0, 2]);
        assert_eq!(c[c.len() - 1], vec![2, 0, 0]);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn projection_clips_and_renormalizes() {
        let mut out = vec![vec![0.0; 3]];
        project(&[-0.5, 2.0], 1, 3, &mut out);
        assert_eq!(out[0], vec![0.0, 1.0, 0.0]);
        project(&[0.2, 0.3], 1, 3, &mut out);
        assert!((out[0][2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn entropy_objective_peaks_at_uniform() {
        for (n, d) in [(2, 2), (2, 3), (3, 2)] {
            let pm = maximize_over_pi(|pi| pi.entropy(), n, d, &quick());
            let expected = n as f64 * libm::log2(d as f64);
            assert!((pm.value - expected).abs() < 1e-6, "{n} {d}: {}", pm.value);
            assert!(pm.value >= pm.diagnostics.grid_best);
        }
    }

    #[test]
    fn refinement_beats_off_grid_optimum() {
        // maximum at p = 0.333 for sender 1, off the 0.05 grid
        let pm = maximize_over_pi(
            |pi| -(pi.marginal(0)[0] - 0.333).powi(2) - (pi.marginal(1)[1] - 0.71).powi(2),
            2,
            2,
            &quick(),
        );
        assert!(pm.value > -1e-6, "{}", pm.value);
        assert!((pm.argmax.marginal(0)[0] - 0.333).abs() < 1e-3);
        assert!(pm.value >= pm.diagnostics.grid_best);
    }

    #[test]
    fn optimizer_is_deterministic() {
        let f = |pi: &ProductDistribution| pi.entropy() - 3.0 * pi.marginal(0)[0] * pi.marginal(1)[1];
        let a = maximize_over_pi(f, 2, 2, &quick());
        let b = maximize_over_pi(f, 2, 2, &quick());
        assert_eq!(a, b);
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig { tolerance: 0.0, ..quick() }.validate().is_err());
        assert!(OptimizerConfig { restarts: 0, ..quick() }.validate().is_err());
        assert!(OptimizerConfig { grid_step: Some(1.5), ..quick() }.validate().is_err());
        assert_eq!(quick().grid_step_for(2), 0.05);
        assert_eq!(quick().grid_step_for(3), 0.1);
    }

    #[test]
    fn top_mass_matches_subset_search() {
        let w = [0.1, 0.3, 0.05, 0.2, 0.35];
        for r in 0..=w.len() {
            let best = (0u32..1 << w.len())
                .filter(|s| s.count_ones() as usize == r)
                .map(|s| (0..w.len()).filter(|&i| s >> i & 1 == 1).map(|i| w[i]).sum::<f64>())
                .fold(0.0, f64::max);
            assert!((top_mass(&w, r) - best).abs() < 1e-15);
        }
    }

    #[test]
    fn game_values() {
        let chsh = classical_game_value(&chsh_game(), 1000).unwrap();
        assert_eq!(chsh.wins, 3);
        assert_eq!(chsh.value, 0.75);
        let mpp = classical_game_value(&mpp_game(3).unwrap(), 1000).unwrap();
        assert_eq!(mpp.value, 0.875);
        assert_eq!(mpp_classical_value(3).unwrap(), 0.875);
        assert_eq!(mpp_classical_value(4).unwrap(), 0.875);
        assert!(mpp_classical_value(2).is_err());
        assert!(classical_game_value(&magic_square_game(), 1000).is_err());
    }

    #[test]
    fn pseudo_telepathy_values() {
        let g = chsh_game();
        let eta = 0.4;
        let ns = pseudo_telepathy_capacity(&MacChannel::type_ii(&g, eta).unwrap(), &pr_box()).unwrap();
        assert!((ns.value - (2.0 - noise_f(4, eta).unwrap())).abs() < 1e-12);
        assert_eq!(ns.resource, Resource::NoSignaling);
        let ms = magic_square_game();
        let q = pseudo_telepathy_capacity(&MacChannel::type_i(&ms, eta).unwrap(), &magic_square_box()).unwrap();
        assert!((q.value - libm::log2(9.0)).abs() < 1e-12);
        assert!(q.cross_check.unwrap() < 1e-9);
        let m3 = mpp_game(3).unwrap();
        let r = pseudo_telepathy_capacity(&MacChannel::type_ii(&m3, eta).unwrap(), &mpp_box(3).unwrap()).unwrap();
        assert!((r.value - (3.0 - noise_f(8, eta).unwrap())).abs() < 1e-12);
    }

    #[test]
    fn pseudo_telepathy_refuses_imperfect_box() {
        let ch = MacChannel::type_i(&chsh_game(), 0.3).unwrap();
        assert!(matches!(
            pseudo_telepathy_capacity(&ch, &tsirelson_box()),
            Err(Error::Hypothesis(_))
        ));
        let ms = MacChannel::type_i(&magic_square_game(), 0.3).unwrap();
        assert!(matches!(
            pseudo_telepathy_capacity(&ms, &pr_box()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn constant_ceiling_of_one_is_rate_ceiling() {
        let ch = MacChannel::type_ii(&chsh_game(), 0.7).unwrap();
        let b = resource_dependent_bound(&ch, WinCeiling::Constant(1.0), &quick()).unwrap();
        assert!((b.value - ch.rate_ceiling()).abs() < 1e-7);
        let lower = resource_dependent_bound(&ch, WinCeiling::Constant(0.5), &quick()).unwrap();
        assert!(lower.value <= b.value);
    }

    #[test]
    fn magic_square_exact_is_refused() {
        let ch = MacChannel::type_ii(&magic_square_game(), 1.0).unwrap();
        let err = classical_capacity_exact(&ch, &quick()).unwrap_err();
        assert!(matches!(err, Error::EnumerationCap { .. }));
        assert!(format!("{err}").contains("classical_upper_bound"));
    }

    #[test]
    fn linear_grids() {
        assert_eq!(linear_grid(0.0, 1.0, 3).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(linear_grid(0.2, 0.2, 1).unwrap(), vec![0.2]);
        assert!(linear_grid(0.0, 1.5, 3).is_err());
        assert!(linear_grid(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn sweep_validates_requests_up_front() {
        let ms = magic_square_game();
        let etas = [0.5];
        let cfg = quick();
        assert!(sweep(&ms, ChannelType::TypeI, &etas, &[SweepResource::LocalExact], &cfg).is_err());
        assert!(sweep(&ms, ChannelType::TypeI, &etas, &[SweepResource::QuantumLower], &cfg).is_err());
        assert!(sweep(&chsh_game(), ChannelType::TypeI, &etas, &[SweepResource::QuantumExact], &cfg).is_err());
        let rows = sweep(&ms, ChannelType::TypeI, &[0.2, 1.0], &[SweepResource::QuantumExact], &cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].eta_used < 1.0);
        assert!(rows.iter().all(|r| (r.result.value - libm::log2(9.0)).abs() < 1e-12));
    }
}
