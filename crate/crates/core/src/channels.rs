//! Two-branch multiple access channels built on a nonlocal game.
//!
//! An input `x = ((q_1,a_1),…,(q_n,a_n))` is routed through the "win" branch
//! when it satisfies the game's predicate and through the "lose" branch
//! otherwise. Outputs range over the question tuples, `Δ = d^n` symbols.

use alloc::{format, vec::Vec};

use crate::error::{invalid, Error, Result};
use crate::games::NonlocalGame;
use crate::infotheory::entropy;

const STOCHASTIC_TOLERANCE: f64 = 1e-12;
const CONSTANT_NOISE_TOLERANCE: f64 = 1e-12;

/// Entropy in bits of a `Δ`-ary depolarizing row that keeps the echoed symbol
/// with probability `η` and is uniform otherwise.
pub fn noise_f(delta: usize, eta: f64) -> Result<f64> {
    if delta < 2 {
        return Err(invalid("delta", format!("need Δ >= 2, got {delta}")));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid("eta", format!("{eta} is outside [0, 1]")));
    }
    let d = delta as f64;
    let peak = (1.0 + (d - 1.0) * eta) / d;
    let rest = (1.0 - eta) / d;
    Ok(-xlog2x(peak) - (d - 1.0) * xlog2x(rest))
}

fn xlog2x(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * libm::log2(p)
    }
}

/// One-parameter depolarizing families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelType {
    /// `(η_w, η_l) = (1, η)`: noiseless on a win.
    TypeI,
    /// `(η_w, η_l) = (η, 0)`: fully noisy on a loss.
    TypeII,
}

/// Offset used to move a degenerate endpoint (`f_W = f_L`) inside the family.
pub const ETA_CLAMP: f64 = 1e-9;

impl ChannelType {
    pub fn build(self, game: &NonlocalGame, eta: f64) -> Result<MacChannel> {
        match self {
            ChannelType::TypeI => MacChannel::type_i(game, eta),
            ChannelType::TypeII => MacChannel::type_ii(game, eta),
        }
    }

    /// Moves the degenerate endpoint (η = 1 for Type-I, η = 0 for Type-II)
    /// inside the admissible range. Returns the value and whether it changed.
    pub fn clamp_eta(self, eta: f64) -> (f64, bool) {
        match self {
            ChannelType::TypeI if eta > 1.0 - ETA_CLAMP => (1.0 - ETA_CLAMP, true),
            ChannelType::TypeII if eta < ETA_CLAMP => (ETA_CLAMP, true),
            _ => (eta, false),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ChannelType::TypeI => "1",
            ChannelType::TypeII => "2",
        }
    }
}

/// Dense channel `P(y | x)` with its win/lose branch structure.
#[derive(Clone, Debug)]
pub struct MacChannel {
    game: NonlocalGame,
    matrix: Vec<f64>,
    winning: Vec<bool>,
    row_entropy: Vec<f64>,
    noise_win: f64,
    noise_lose: f64,
    branch: Option<(f64, f64)>,
}

impl MacChannel {
    /// Depolarizing channel: on branch `b` the output equals the question
    /// tuple with probability `η_b` and is uniform otherwise. Requires
    /// `0 <= η_l < η_w <= 1`.
    pub fn depolarizing(game: &NonlocalGame, eta_win: f64, eta_lose: f64) -> Result<Self> {
        for (name, eta) in [("eta_win", eta_win), ("eta_lose", eta_lose)] {
            if !(0.0..=1.0).contains(&eta) {
                return Err(invalid(name, format!("{eta} is outside [0, 1]")));
            }
        }
        if eta_lose >= eta_win {
            return Err(invalid(
                "eta",
                format!("need eta_lose < eta_win for f_W < f_L, got ({eta_win}, {eta_lose})"),
            ));
        }
        let delta = game.message_count();
        let winning = game.winning_inputs();
        let mut matrix = alloc::vec![0.0; winning.len() * delta];
        for (x, row) in matrix.chunks_mut(delta).enumerate() {
            let eta = if winning[x] { eta_win } else { eta_lose };
            row.fill((1.0 - eta) / delta as f64);
            row[game.echoed_questions(x)] += eta;
        }
        let mut ch = Self::assemble(game, matrix, winning);
        ch.noise_win = noise_f(delta, eta_win)?;
        ch.noise_lose = noise_f(delta, eta_lose)?;
        ch.branch = Some((eta_win, eta_lose));
        Ok(ch)
    }

    /// Type-I member `(1, η)`, `0 <= η < 1`.
    pub fn type_i(game: &NonlocalGame, eta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eta) {
            return Err(invalid("eta", format!("Type-I needs 0 <= η < 1, got {eta}")));
        }
        Self::depolarizing(game, 1.0, eta)
    }

    /// Type-II member `(η, 0)`, `0 < η <= 1`.
    pub fn type_ii(game: &NonlocalGame, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(invalid("eta", format!("Type-II needs 0 < η <= 1, got {eta}")));
        }
        Self::depolarizing(game, eta, 0.0)
    }

    /// General two-branch channel. Each kernel is a `Δ × Δ` row-stochastic
    /// matrix `K(y | echoed question tuple)`; every row of a kernel must have
    /// the same entropy and the win branch may not be noisier than the lose
    /// branch.
    pub fn two_branch(game: &NonlocalGame, win_kernel: &[f64], lose_kernel: &[f64]) -> Result<Self> {
        let delta = game.message_count();
        for k in [win_kernel, lose_kernel] {
            if k.len() != delta * delta {
                return Err(Error::DimensionMismatch {
                    what: "branch kernel",
                    expected: delta * delta,
                    found: k.len(),
                });
            }
        }
        let winning = game.winning_inputs();
        let mut matrix = alloc::vec![0.0; winning.len() * delta];
        for (x, row) in matrix.chunks_mut(delta).enumerate() {
            let kernel = if winning[x] { win_kernel } else { lose_kernel };
            let echo = game.echoed_questions(x);
            row.copy_from_slice(&kernel[echo * delta..(echo + 1) * delta]);
        }
        let ch = Self::from_rows(game, matrix)?;
        let violation = ch.constant_noise_violation();
        if violation > CONSTANT_NOISE_TOLERANCE {
            return Err(invalid(
                "kernel",
                format!("row entropies differ within a branch by {violation:e}"),
            ));
        }
        if ch.noise_win > ch.noise_lose + CONSTANT_NOISE_TOLERANCE {
            return Err(invalid(
                "kernel",
                format!("f_W = {} exceeds f_L = {}", ch.noise_win, ch.noise_lose),
            ));
        }
        Ok(ch)
    }

    /// Channel from an explicit `(dD)^n × Δ` matrix. Only row-stochasticity
    /// is enforced; `f_W`/`f_L` are read from the first winning/losing row and
    /// [`constant_noise_violation`](Self::constant_noise_violation) reports
    /// how far the remaining rows stray from them.
    pub fn from_rows(game: &NonlocalGame, matrix: Vec<f64>) -> Result<Self> {
        let delta = game.message_count();
        let expected = game.input_count() * delta;
        if matrix.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "channel matrix",
                expected,
                found: matrix.len(),
            });
        }
        let mut deviation: f64 = 0.0;
        for row in matrix.chunks(delta) {
            deviation = deviation.max((row.iter().sum::<f64>() - 1.0).abs());
            for &p in row {
                deviation = deviation.max(-p);
            }
        }
        if deviation > STOCHASTIC_TOLERANCE {
            return Err(Error::NotStochastic {
                what: "channel matrix",
                deviation,
            });
        }
        let winning = game.winning_inputs();
        Ok(Self::assemble(game, matrix, winning))
    }

    fn assemble(game: &NonlocalGame, matrix: Vec<f64>, winning: Vec<bool>) -> Self {
        let delta = game.message_count();
        let row_entropy: Vec<f64> = matrix.chunks(delta).map(entropy).collect();
        let first = |want: bool| {
            winning
                .iter()
                .position(|&w| w == want)
                .map_or(0.0, |x| row_entropy[x])
        };
        let (noise_win, noise_lose) = (first(true), first(false));
        Self {
            game: game.clone(),
            matrix,
            winning,
            row_entropy,
            noise_win,
            noise_lose,
            branch: None,
        }
    }

    pub fn game(&self) -> &NonlocalGame {
        &self.game
    }

    /// `Δ`.
    pub fn output_count(&self) -> usize {
        self.game.message_count()
    }

    pub fn input_count(&self) -> usize {
        self.winning.len()
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let delta = self.output_count();
        &self.matrix[x * delta..(x + 1) * delta]
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.row(x)[y]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn is_winning(&self, x: usize) -> bool {
        self.winning[x]
    }

    /// `H(Y | X = x)` for every input.
    pub fn row_entropies(&self) -> &[f64] {
        &self.row_entropy
    }

    /// `f_W` in bits.
    pub fn noise_win(&self) -> f64 {
        self.noise_win
    }

    /// `f_L` in bits.
    pub fn noise_lose(&self) -> f64 {
        self.noise_lose
    }

    /// `(η_w, η_l)` for depolarizing channels.
    pub fn branch_parameters(&self) -> Option<(f64, f64)> {
        self.branch
    }

    /// `max_x |H(Y|X=x) − f_branch(x)|`.
    pub fn constant_noise_violation(&self) -> f64 {
        self.row_entropy
            .iter()
            .zip(&self.winning)
            .map(|(&h, &w)| (h - if w { self.noise_win } else { self.noise_lose }).abs())
            .fold(0.0, f64::max)
    }

    /// `log2 Δ − f_W`, the resource-independent ceiling on the sum-rate.
    pub fn rate_ceiling(&self) -> f64 {
        libm::log2(self.output_count() as f64) - self.noise_win
    }
}
