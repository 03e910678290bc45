//! Correlation boxes for `(n, d, D)` Bell scenarios and the encoders built from them.

use alloc::{format, string::String, vec, vec::Vec};
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use crate::error::{invalid, Error, Result};
use crate::games::NonlocalGame;
use crate::index;
use crate::quantum::{
    self, c, Observable, StateVector, UnitaryMatrix, C64,
};

/// Default cap on the number of objects an exhaustive enumeration may visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

const STOCHASTIC_TOLERANCE: f64 = 1e-9;
const SUPPORT_THRESHOLD: f64 = 1e-9;

/// Resource class of a correlation or of a capacity value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Resource {
    Local,
    Quantum,
    NoSignaling,
    /// Holds for every resource class.
    Any,
    /// User-supplied label, e.g. for imported vertex sets.
    Custom(String),
}

impl Resource {
    pub fn label(&self) -> &str {
        match self {
            Resource::Local => "L",
            Resource::Quantum => "Q",
            Resource::NoSignaling => "NS",
            Resource::Any => "any",
            Resource::Custom(s) => s,
        }
    }
}

/// `P(a_1..a_n | q_1..q_n)` stored densely as `table[q * D^n + a]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationBox {
    players: usize,
    questions: usize,
    answers: usize,
    table: Vec<f64>,
    resource: Resource,
}

/// Which property [`validate_box`] measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoxCheck {
    /// Negativity and per-question normalization error.
    Normalization,
    /// Dependence of any `n-1` parties' marginal on the remaining party's question.
    NoSignaling,
    /// Deviation of each party's answer marginal from uniform over its support.
    UniformOutputs,
}

/// Maximum violation of `check` by `b`; zero for a perfect box. Never mutates.
pub fn validate_box(b: &CorrelationBox, check: BoxCheck) -> f64 {
    match check {
        BoxCheck::Normalization => b.normalization_violation(),
        BoxCheck::NoSignaling => b.signaling_violation(),
        BoxCheck::UniformOutputs => b.output_uniformity_violation(),
    }
}

impl CorrelationBox {
    /// Validates nonnegativity and per-question normalization within 1e-9.
    pub fn new(
        players: usize,
        questions: usize,
        answers: usize,
        table: Vec<f64>,
        resource: Resource,
    ) -> Result<Self> {
        let expected = index::pow(questions, players) * index::pow(answers, players);
        if table.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "correlation box table",
                expected,
                found: table.len(),
            });
        }
        let b = Self {
            players,
            questions,
            answers,
            table,
            resource,
        };
        let deviation = b.normalization_violation();
        if deviation > STOCHASTIC_TOLERANCE {
            return Err(Error::NotStochastic {
                what: "correlation box",
                deviation,
            });
        }
        Ok(b)
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn questions(&self) -> usize {
        self.questions
    }

    pub fn answers(&self) -> usize {
        self.answers
    }

    pub fn resource(&self) -> &Resource {
        &self.resource
    }

    pub fn with_resource(mut self, resource: Resource) -> Self {
        self.resource = resource;
        self
    }

    pub fn question_tuple_count(&self) -> usize {
        index::pow(self.questions, self.players)
    }

    pub fn answer_tuple_count(&self) -> usize {
        index::pow(self.answers, self.players)
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Answer distribution for the question tuple with dense index `q`.
    pub fn row(&self, q: usize) -> &[f64] {
        let width = self.answer_tuple_count();
        &self.table[q * width..(q + 1) * width]
    }

    pub fn prob(&self, questions: &[usize], answers: &[usize]) -> f64 {
        let q = index::encode(questions, self.questions);
        let a = index::encode(answers, self.answers);
        self.row(q)[a]
    }

    pub fn matches_game(&self, game: &NonlocalGame) -> bool {
        self.players == game.players()
            && self.questions == game.questions()
            && self.answers == game.answers()
    }

    pub fn is_deterministic(&self) -> bool {
        self.table.iter().all(|&p| p == 0.0 || p == 1.0)
    }

    /// Answer marginal of `party` for the question tuple `q`.
    pub fn marginal(&self, party: usize, q: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.answers];
        let mut digits = vec![0; self.players];
        for (a, &p) in self.row(q).iter().enumerate() {
            index::decode(a, self.answers, &mut digits);
            out[digits[party]] += p;
        }
        out
    }

    /// Win probability for the question tuple with dense index `q`.
    pub fn win_probability_at(&self, game: &NonlocalGame, q: usize) -> f64 {
        let mut qd = vec![0; self.players];
        let mut ad = vec![0; self.players];
        index::decode(q, self.questions, &mut qd);
        self.row(q)
            .iter()
            .enumerate()
            .filter(|&(a, _)| {
                index::decode(a, self.answers, &mut ad);
                game.wins(&qd, &ad)
            })
            .map(|(_, &p)| p)
            .sum()
    }

    /// Win probability under uniformly distributed questions.
    pub fn win_probability(&self, game: &NonlocalGame) -> f64 {
        let count = self.question_tuple_count();
        (0..count).map(|q| self.win_probability_at(game, q)).sum::<f64>() / count as f64
    }

    pub fn normalization_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for q in 0..self.question_tuple_count() {
            let row = self.row(q);
            let total: f64 = row.iter().sum();
            worst = worst.max((total - 1.0).abs());
            for &p in row {
                worst = worst.max(-p);
            }
        }
        worst
    }

    pub fn signaling_violation(&self) -> f64 {
        let n = self.players;
        let na = self.answer_tuple_count();
        let mut worst: f64 = 0.0;
        let mut qd = vec![0; n];
        let mut ad = vec![0; n];
        for k in 0..n {
            // marginal over everyone but k, indexed by the remaining answers
            let reduced = |qd: &[usize], ad: &mut [usize]| -> Vec<f64> {
                let q = index::encode(qd, self.questions);
                let mut out = vec![0.0; na];
                for (a, &p) in self.row(q).iter().enumerate() {
                    index::decode(a, self.answers, ad);
                    ad[k] = 0;
                    out[index::encode(ad, self.answers)] += p;
                }
                out
            };
            for q in 0..self.question_tuple_count() {
                index::decode(q, self.questions, &mut qd);
                if qd[k] != 0 {
                    continue;
                }
                let base = reduced(&qd, &mut ad);
                for alt in 1..self.questions {
                    qd[k] = alt;
                    let other = reduced(&qd, &mut ad);
                    for (x, y) in base.iter().zip(&other) {
                        worst = worst.max((x - y).abs());
                    }
                }
                qd[k] = 0;
            }
        }
        worst
    }

    pub fn output_uniformity_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for q in 0..self.question_tuple_count() {
            for k in 0..self.players {
                let m = self.marginal(k, q);
                let support = m.iter().filter(|&&p| p > SUPPORT_THRESHOLD).count();
                let target = 1.0 / support as f64;
                for &p in m.iter().filter(|&&p| p > SUPPORT_THRESHOLD) {
                    worst = worst.max((p - target).abs());
                }
            }
        }
        worst
    }
}

/// Deterministic strategy: each player's answer as a function of its question.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterministicStrategy {
    players: usize,
    inputs: usize,
    outputs: usize,
    responses: Vec<usize>,
}

impl DeterministicStrategy {
    pub fn new(players: usize, inputs: usize, outputs: usize, responses: Vec<usize>) -> Result<Self> {
        if responses.len() != players * inputs {
            return Err(Error::DimensionMismatch {
                what: "strategy responses",
                expected: players * inputs,
                found: responses.len(),
            });
        }
        if let Some(&bad) = responses.iter().find(|&&r| r >= outputs) {
            return Err(invalid("responses", format!("output {bad} out of range 0..{outputs}")));
        }
        Ok(Self {
            players,
            inputs,
            outputs,
            responses,
        })
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn response(&self, player: usize, input: usize) -> usize {
        self.responses[player * self.inputs + input]
    }

    /// Per player, the answer to each question in order.
    pub fn responses(&self) -> &[usize] {
        &self.responses
    }

    /// The deterministic box this strategy induces.
    pub fn to_box(&self) -> CorrelationBox {
        let nq = index::pow(self.inputs, self.players);
        let na = index::pow(self.outputs, self.players);
        let mut table = vec![0.0; nq * na];
        let mut qd = vec![0; self.players];
        for q in 0..nq {
            index::decode(q, self.inputs, &mut qd);
            let a = qd
                .iter()
                .enumerate()
                .fold(0, |acc, (k, &qk)| acc * self.outputs + self.response(k, qk));
            table[q * na + a] = 1.0;
        }
        CorrelationBox {
            players: self.players,
            questions: self.inputs,
            answers: self.outputs,
            table,
            resource: Resource::Local,
        }
    }
}

/// All `(outputs^inputs)^players` deterministic strategies, indexed densely.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StrategySpace {
    players: usize,
    inputs: usize,
    outputs: usize,
    count: u64,
}

impl StrategySpace {
    pub fn new(players: usize, inputs: usize, outputs: usize, cap: u64) -> Result<Self> {
        let count = index::checked_pow(outputs as u64, (inputs * players) as u64);
        match count {
            Some(count) if count <= cap => Ok(Self {
                players,
                inputs,
                outputs,
                count,
            }),
            _ => Err(Error::EnumerationCap {
                what: "local deterministic strategies",
                count,
                cap,
                hint: "",
            }),
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Strategy with dense index `index`; player 1's question 0 is the most
    /// significant digit.
    pub fn strategy(&self, index: u64) -> DeterministicStrategy {
        let mut responses = vec![0; self.players * self.inputs];
        let mut rest = index;
        for slot in responses.iter_mut().rev() {
            *slot = (rest % self.outputs as u64) as usize;
            rest /= self.outputs as u64;
        }
        DeterministicStrategy {
            players: self.players,
            inputs: self.inputs,
            outputs: self.outputs,
            responses,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = DeterministicStrategy> + '_ {
        (0..self.count).map(move |i| self.strategy(i))
    }
}

/// Enumerates the `(D^d)^n` local deterministic boxes of the `(n, d, D)` scenario.
pub fn local_deterministic_boxes(
    players: usize,
    questions: usize,
    answers: usize,
    cap: u64,
) -> Result<impl Iterator<Item = CorrelationBox>> {
    let space = StrategySpace::new(players, questions, answers, cap)?;
    Ok((0..space.count()).map(move |i| space.strategy(i).to_box()))
}

/// The PR box: `P(a1, a2 | q1, q2) = 1/2` iff `a1 ⊕ a2 = q1 q2`.
pub fn pr_box() -> CorrelationBox {
    let mut table = vec![0.0; 16];
    for q in 0..4 {
        for a in 0..4 {
            let (q1, q2, a1, a2) = (q >> 1, q & 1, a >> 1, a & 1);
            if a1 ^ a2 == q1 & q2 {
                table[q * 4 + a] = 0.5;
            }
        }
    }
    CorrelationBox {
        players: 2,
        questions: 2,
        answers: 2,
        table,
        resource: Resource::NoSignaling,
    }
}

fn bell_state() -> StateVector {
    let h = FRAC_1_SQRT_2;
    StateVector::new(vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)])
        .expect("normalized")
}

/// Maximally entangled qubit pair measured with the Tsirelson settings:
/// player 1 uses `σ_z`, `σ_x`; player 2 uses `(−σ_z ∓ σ_x)/√2`. Of the four
/// local outcome relabellings the first one maximizing the CHSH win
/// probability is kept.
pub fn tsirelson_box() -> CorrelationBox {
    let z = Observable::pauli_z();
    let x = Observable::pauli_x();
    let h = FRAC_1_SQRT_2;
    let first = [z, x];
    let second = [
        Observable::combine(-h, &z, -h, &x).expect("hermitian"),
        Observable::combine(-h, &z, h, &x).expect("hermitian"),
    ];
    let state = bell_state();
    let mut raw = [[[[0.0; 2]; 2]; 2]; 2];
    for (q1, o1) in first.iter().enumerate() {
        for (q2, o2) in second.iter().enumerate() {
            let p = quantum::projective_binary_measurement(&state, o1, o2).expect("two qubits");
            raw[q1][q2] = p;
        }
    }
    let game = crate::games::chsh_game();
    let mut best: Option<(f64, CorrelationBox)> = None;
    for (flip1, flip2) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let mut table = vec![0.0; 16];
        for q1 in 0..2 {
            for q2 in 0..2 {
                for a1 in 0..2 {
                    for a2 in 0..2 {
                        let q = q1 * 2 + q2;
                        let a = (a1 ^ flip1) * 2 + (a2 ^ flip2);
                        table[q * 4 + a] = raw[q1][q2][a1][a2];
                    }
                }
            }
        }
        let b = CorrelationBox {
            players: 2,
            questions: 2,
            answers: 2,
            table,
            resource: Resource::Quantum,
        };
        let w = b.win_probability(&game);
        if best.as_ref().map_or(true, |(bw, _)| w > *bw + 1e-12) {
            best = Some((w, b));
        }
    }
    best.expect("four candidates").1
}

fn entries(rows: [[(f64, f64); 4]; 4]) -> Vec<C64> {
    rows.iter().flat_map(|r| r.iter().map(|&(re, im)| c(re, im))).collect()
}

/// Player 1's unitary for question `q` in the magic-square protocol.
pub fn magic_square_alice_unitary(q: usize) -> UnitaryMatrix {
    const O: (f64, f64) = (0.0, 0.0);
    const P: (f64, f64) = (1.0, 0.0);
    const M: (f64, f64) = (-1.0, 0.0);
    const I: (f64, f64) = (0.0, 1.0);
    const J: (f64, f64) = (0.0, -1.0);
    let (scale, rows) = match q {
        0 => (FRAC_1_SQRT_2, [[I, O, O, P], [O, J, P, O], [O, I, P, O], [P, O, O, I]]),
        1 => (0.5, [[I, P, P, I], [J, P, M, I], [I, P, M, J], [J, P, P, J]]),
        2 => (0.5, [[M, M, M, P], [P, P, M, P], [P, M, P, P], [P, M, M, M]]),
        _ => panic!("magic square question {q} out of range"),
    };
    let e: Vec<C64> = entries(rows).into_iter().map(|z| z * scale).collect();
    UnitaryMatrix::new(4, e).expect("transcribed matrix is unitary")
}

/// Player 2's unitary for question `q` in the magic-square protocol.
pub fn magic_square_bob_unitary(q: usize) -> UnitaryMatrix {
    const O: (f64, f64) = (0.0, 0.0);
    const P: (f64, f64) = (1.0, 0.0);
    const M: (f64, f64) = (-1.0, 0.0);
    const I: (f64, f64) = (0.0, 1.0);
    const J: (f64, f64) = (0.0, -1.0);
    let (scale, rows) = match q {
        0 => (0.5, [[I, J, P, P], [J, J, P, M], [P, P, J, I], [J, I, P, P]]),
        1 => (0.5, [[M, I, P, I], [P, I, P, J], [P, J, P, I], [M, J, P, J]]),
        2 => (FRAC_1_SQRT_2, [[P, O, O, P], [M, O, O, P], [O, P, P, O], [O, P, M, O]]),
        _ => panic!("magic square question {q} out of range"),
    };
    let e: Vec<C64> = entries(rows).into_iter().map(|z| z * scale).collect();
    UnitaryMatrix::new(4, e).expect("transcribed matrix is unitary")
}

/// The shared four-qubit state `½(|00⟩|11⟩ − |01⟩|10⟩ − |10⟩|01⟩ + |11⟩|00⟩)`,
/// player 1 holding the two high-order qubits.
pub fn magic_square_state() -> StateVector {
    let mut amps = vec![c(0.0, 0.0); 16];
    amps[0b0011] = c(0.5, 0.0);
    amps[0b0110] = c(-0.5, 0.0);
    amps[0b1001] = c(-0.5, 0.0);
    amps[0b1100] = c(0.5, 0.0);
    StateVector::new(amps).expect("normalized")
}

/// Magic-square box: each player rotates its two qubits, measures them as
/// `(a^0, a^1)` (first qubit is `a^0`) and sets `a^2` to fix the parity (even
/// for player 1, odd for player 2). Answers are packed with bit `j` = `a^j`.
pub fn magic_square_box() -> CorrelationBox {
    let state = magic_square_state();
    let mut table = vec![0.0; 9 * 64];
    let pack = |outcome: usize, parity: usize| {
        let a0 = outcome >> 1;
        let a1 = outcome & 1;
        a0 | (a1 << 1) | ((a0 ^ a1 ^ parity) << 2)
    };
    for q1 in 0..3 {
        for q2 in 0..3 {
            let rotated = state
                .apply_local_unitary(&magic_square_alice_unitary(q1), 0)
                .and_then(|s| s.apply_local_unitary(&magic_square_bob_unitary(q2), 2))
                .expect("dimensions match");
            let outcomes = quantum::measurement_distribution(&rotated, &[2, 2]).expect("4 qubits");
            let q = q1 * 3 + q2;
            for (basis, &p) in outcomes.probabilities().iter().enumerate() {
                let o = outcomes.outcomes(basis);
                let a = pack(o[0], 0) * 8 + pack(o[1], 1);
                table[q * 64 + a] += p;
            }
        }
    }
    CorrelationBox {
        players: 2,
        questions: 3,
        answers: 8,
        table,
        resource: Resource::Quantum,
    }
}

/// GHZ-based box for the `n`-player parity game: phase `e^{iπ q_k/2}` on
/// `|1⟩`, then a Hadamard, then a computational-basis measurement per player.
pub fn mpp_box(players: usize) -> Result<CorrelationBox> {
    if players < 2 {
        return Err(invalid("players", format!("mpp box needs n >= 2, got {players}")));
    }
    if players > 16 {
        return Err(invalid("players", format!("dense mpp box limited to n <= 16, got {players}")));
    }
    let dim = 1usize << players;
    let h = FRAC_1_SQRT_2;
    let mut ghz = vec![c(0.0, 0.0); dim];
    ghz[0] = c(h, 0.0);
    ghz[dim - 1] = c(h, 0.0);
    let ghz = StateVector::new(ghz)?;
    let hadamard = UnitaryMatrix::hadamard();
    let mut table = vec![0.0; dim * dim];
    let mut qd = vec![0; players];
    for q in 0..dim {
        index::decode(q, 2, &mut qd);
        let mut state = ghz.clone();
        for (k, &qk) in qd.iter().enumerate() {
            let local = hadamard.matmul(&UnitaryMatrix::phase(FRAC_PI_2 * qk as f64));
            state = state.apply_local_unitary(&local, k)?;
        }
        table[q * dim..(q + 1) * dim].copy_from_slice(&state.probabilities());
    }
    Ok(CorrelationBox {
        players,
        questions: 2,
        answers: 2,
        table,
        resource: Resource::Quantum,
    })
}

/// The built-in box that wins `game` with certainty, when one exists.
pub fn pseudo_telepathy_box(game: &NonlocalGame) -> Option<CorrelationBox> {
    match game.name() {
        "chsh" => Some(pr_box()),
        "magic-square" => Some(magic_square_box()),
        name => name
            .strip_prefix("mpp:")
            .and_then(|n| n.parse().ok())
            .and_then(|n| mpp_box(n).ok()),
    }
}

/// Channel encoder `P(x | m)` in the `(n, d, d·D)` scenario, stored as
/// `table[m * (dD)^n + x]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Encoder {
    players: usize,
    messages: usize,
    answers: usize,
    table: Vec<f64>,
    deterministic: bool,
}

impl Encoder {
    pub fn from_table(players: usize, messages: usize, answers: usize, table: Vec<f64>) -> Result<Self> {
        let rows = index::pow(messages, players);
        let cols = index::pow(messages * answers, players);
        if table.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "encoder table",
                expected: rows * cols,
                found: table.len(),
            });
        }
        let mut deviation: f64 = 0.0;
        for row in table.chunks(cols) {
            deviation = deviation.max((row.iter().sum::<f64>() - 1.0).abs());
            for &p in row {
                deviation = deviation.max(-p);
            }
        }
        if deviation > STOCHASTIC_TOLERANCE {
            return Err(Error::NotStochastic {
                what: "encoder",
                deviation,
            });
        }
        let deterministic = table.iter().all(|&p| p == 0.0 || p == 1.0);
        Ok(Self {
            players,
            messages,
            answers,
            table,
            deterministic,
        })
    }

    /// Deterministic encoder from a strategy whose outputs are channel input
    /// symbols `q * D + a`.
    pub fn from_strategy(strategy: &DeterministicStrategy, answers: usize) -> Result<Self> {
        if strategy.outputs != strategy.inputs * answers {
            return Err(Error::DimensionMismatch {
                what: "strategy outputs (d * D)",
                expected: strategy.inputs * answers,
                found: strategy.outputs,
            });
        }
        let rows = index::pow(strategy.inputs, strategy.players);
        let cols = index::pow(strategy.outputs, strategy.players);
        let mut table = vec![0.0; rows * cols];
        for (m, x) in deterministic_map(strategy).into_iter().enumerate() {
            table[m * cols + x] = 1.0;
        }
        Ok(Self {
            players: strategy.players,
            messages: strategy.inputs,
            answers,
            table,
            deterministic: true,
        })
    }

    /// Convex combination of encoders over the same scenario.
    pub fn mixture(parts: &[(f64, &Encoder)]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyVertexSet)?.1;
        let mut table = vec![0.0; first.table.len()];
        for &(w, e) in parts {
            if e.table.len() != table.len() || e.answers != first.answers {
                return Err(Error::DimensionMismatch {
                    what: "encoder mixture",
                    expected: table.len(),
                    found: e.table.len(),
                });
            }
            for (t, &p) in table.iter_mut().zip(&e.table) {
                *t += w * p;
            }
        }
        Self::from_table(first.players, first.messages, first.answers, table)
    }

    pub fn players(&self) -> usize {
        self.players
    }

    /// Per-sender message alphabet `d`.
    pub fn messages(&self) -> usize {
        self.messages
    }

    pub fn answers(&self) -> usize {
        self.answers
    }

    pub fn message_count(&self) -> usize {
        index::pow(self.messages, self.players)
    }

    pub fn input_count(&self) -> usize {
        index::pow(self.messages * self.answers, self.players)
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    pub fn row(&self, m: usize) -> &[f64] {
        let cols = self.input_count();
        &self.table[m * cols..(m + 1) * cols]
    }

    pub fn prob(&self, m: usize, x: usize) -> f64 {
        self.row(m)[x]
    }

    pub fn matches_game(&self, game: &NonlocalGame) -> bool {
        self.players == game.players()
            && self.messages == game.questions()
            && self.answers == game.answers()
    }

    /// For deterministic encoders, the input chosen for each message.
    pub fn deterministic_map(&self) -> Option<Vec<usize>> {
        if !self.deterministic {
            return None;
        }
        (0..self.message_count())
            .map(|m| self.row(m).iter().position(|&p| p == 1.0))
            .collect()
    }
}

/// Input index chosen for every message tuple by a deterministic strategy
/// whose outputs are channel input symbols.
pub fn deterministic_map(strategy: &DeterministicStrategy) -> Vec<usize> {
    let rows = index::pow(strategy.inputs, strategy.players);
    let mut md = vec![0; strategy.players];
    (0..rows)
        .map(|m| {
            index::decode(m, strategy.inputs, &mut md);
            md.iter()
                .enumerate()
                .fold(0, |acc, (k, &mk)| acc * strategy.outputs + strategy.response(k, mk))
        })
        .collect()
}

/// Lifts a box to an encoder: messages are fed as questions and each sender
/// inputs `(m_k, a_k)` to the channel.
pub fn e_star(b: &CorrelationBox) -> Encoder {
    let n = b.players;
    let rows = b.question_tuple_count();
    let symbol = b.questions * b.answers;
    let cols = index::pow(symbol, n);
    let mut table = vec![0.0; rows * cols];
    let mut md = vec![0; n];
    let mut ad = vec![0; n];
    for m in 0..rows {
        index::decode(m, b.questions, &mut md);
        for (a, &p) in b.row(m).iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            index::decode(a, b.answers, &mut ad);
            let x = md
                .iter()
                .zip(&ad)
                .fold(0, |acc, (&q, &ak)| acc * symbol + q * b.answers + ak);
            table[m * cols + x] = p;
        }
    }
    Encoder {
        players: n,
        messages: b.questions,
        answers: b.answers,
        table,
        deterministic: b.is_deterministic(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{chsh_game, magic_square_game, mpp_game};

    #[test]
    fn local_box_counts() {
        assert_eq!(local_deterministic_boxes(2, 2, 2, DEFAULT_ENUMERATION_CAP).unwrap().count(), 16);
        assert_eq!(local_deterministic_boxes(2, 2, 4, DEFAULT_ENUMERATION_CAP).unwrap().count(), 256);
        let err = StrategySpace::new(2, 3, 24, DEFAULT_ENUMERATION_CAP).unwrap_err();
        assert!(matches!(err, Error::EnumerationCap { count: Some(191_102_976), .. }));
    }

    #[test]
    fn best_local_chsh_is_three_quarters() {
        let g = chsh_game();
        let best = local_deterministic_boxes(2, 2, 2, DEFAULT_ENUMERATION_CAP)
            .unwrap()
            .map(|b| b.win_probability(&g))
            .fold(0.0, f64::max);
        assert_eq!(best, 0.75);
    }

    #[test]
    fn pr_box_examples() {
        let b = pr_box();
        assert_eq!(b.prob(&[1, 1], &[0, 1]), 0.5);
        assert_eq!(b.prob(&[1, 1], &[1, 0]), 0.5);
        assert_eq!(b.prob(&[1, 1], &[0, 0]), 0.0);
        assert_eq!(b.win_probability(&chsh_game()), 1.0);
        for q in 0..4 {
            for k in 0..2 {
                assert_eq!(b.marginal(k, q), vec![0.5, 0.5]);
            }
        }
        assert_eq!(validate_box(&b, BoxCheck::NoSignaling), 0.0);
    }

    #[test]
    fn tsirelson_box_examples() {
        let b = tsirelson_box();
        let cos2 = libm::pow(libm::cos(core::f64::consts::PI / 8.0), 2.0);
        assert!((b.win_probability(&chsh_game()) - cos2).abs() < 1e-12);
        // cross-check by direct evaluation of the box table
        let mut direct = 0.0;
        for q1 in 0..2 {
            for q2 in 0..2 {
                for a1 in 0..2 {
                    for a2 in 0..2 {
                        if a1 ^ a2 == q1 & q2 {
                            direct += 0.25 * b.prob(&[q1, q2], &[a1, a2]);
                        }
                    }
                }
            }
        }
        assert!((direct - cos2).abs() < 1e-12);
        assert!(validate_box(&b, BoxCheck::Normalization) < 1e-12);
        assert!(validate_box(&b, BoxCheck::NoSignaling) < 1e-10);
        for q in 0..4 {
            for k in 0..2 {
                let m = b.marginal(k, q);
                assert!((m[0] - 0.5).abs() < 1e-12 && (m[1] - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn magic_square_matrices_are_unitary() {
        for q in 0..3 {
            assert!(magic_square_alice_unitary(q).unitarity_deviation() < 1e-10);
            assert!(magic_square_bob_unitary(q).unitarity_deviation() < 1e-10);
        }
        let s = magic_square_state()
            .apply_local_unitary(&magic_square_alice_unitary(0), 0)
            .unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn magic_square_box_wins_everywhere() {
        let b = magic_square_box();
        let g = magic_square_game();
        assert!(b.normalization_violation() < 1e-12);
        for q in 0..9 {
            assert!((b.win_probability_at(&g, q) - 1.0).abs() < 1e-10, "q={q}");
            for k in 0..2 {
                let m = b.marginal(k, q);
                let support: Vec<_> = m.iter().filter(|&&p| p > 1e-9).collect();
                assert_eq!(support.len(), 4);
                for &&p in &support {
                    assert!((p - 0.25).abs() < 1e-10);
                }
            }
        }
        assert!(b.signaling_violation() < 1e-10);
    }

    #[test]
    fn mpp_box_examples() {
        let b = mpp_box(3).unwrap();
        let g = mpp_game(3).unwrap();
        for q in 0..8 {
            assert!((b.win_probability_at(&g, q) - 1.0).abs() < 1e-10);
        }
        // q = 000: uniform over the four even-parity answers
        for a in 0..8usize {
            let expected = if a.count_ones() % 2 == 0 { 0.25 } else { 0.0 };
            assert!((b.row(0)[a] - expected).abs() < 1e-12);
        }
        // odd question parity: every outcome has probability 1/8
        for a in 0..8 {
            assert!((b.row(0b001)[a] - 0.125).abs() < 1e-12);
        }
        assert!(b.signaling_violation() < 1e-10);
        assert!(b.output_uniformity_violation() < 1e-10);
        assert!(mpp_box(1).is_err());
    }

    #[test]
    fn signaling_table_is_detected() {
        // player 1's marginal depends on player 2's question
        let mut table = vec![0.0; 16];
        for q in 0..4 {
            let a1 = q & 1;
            table[q * 4 + a1 * 2] = 1.0;
        }
        let b = CorrelationBox::new(2, 2, 2, table, Resource::Any).unwrap();
        assert!(validate_box(&b, BoxCheck::NoSignaling) > 0.5);
    }

    #[test]
    fn rejects_unnormalized_table() {
        let table = vec![0.3; 16];
        assert!(matches!(
            CorrelationBox::new(2, 2, 2, table, Resource::Any),
            Err(Error::NotStochastic { .. })
        ));
        assert!(CorrelationBox::new(2, 2, 2, vec![0.25; 15], Resource::Any).is_err());
    }

    #[test]
    fn e_star_examples() {
        let enc = e_star(&pr_box());
        let g = chsh_game();
        for a1 in 0..2 {
            for a2 in 0..2 {
                let x = g.input_index(&[0, 0], &[a1, a2]);
                let expected = if a1 ^ a2 == 0 { 0.5 } else { 0.0 };
                assert_eq!(enc.prob(0, x), expected);
            }
        }
        for m in 0..4 {
            assert!((enc.row(m).iter().sum::<f64>() - 1.0).abs() < 1e-15);
            // question part echoes the message
            for (x, &p) in enc.row(m).iter().enumerate() {
                if p > 0.0 {
                    assert_eq!(g.echoed_questions(x), m);
                }
            }
        }
        assert!(!enc.is_deterministic());
        let local = StrategySpace::new(2, 2, 2, 100).unwrap().strategy(5).to_box();
        assert!(e_star(&local).is_deterministic());
    }

    #[test]
    fn strategy_encoder_map() {
        let space = StrategySpace::new(2, 2, 4, 1000).unwrap();
        let s = space.strategy(space.count() - 1);
        assert_eq!(s.responses(), &[3, 3, 3, 3]);
        let enc = Encoder::from_strategy(&s, 2).unwrap();
        assert!(enc.is_deterministic());
        assert_eq!(enc.deterministic_map().unwrap(), vec![15, 15, 15, 15]);
        let bad = StrategySpace::new(2, 2, 3, 1000).unwrap().strategy(0);
        assert!(Encoder::from_strategy(&bad, 2).is_err());
    }
}
