//! Nonlocal games as plain data: alphabet sizes plus a total winning predicate.

use alloc::{format, string::String, sync::Arc, vec, vec::Vec};
use core::fmt;

use crate::error::{invalid, Error, Result};
use crate::index;

/// Winning predicate over `(questions, answers)`, both of length `n`.
pub type WinPredicate = dyn Fn(&[usize], &[usize]) -> bool + Send + Sync;

/// An `n`-player game with `d` questions and `D` answers per player.
#[derive(Clone)]
pub struct NonlocalGame {
    name: String,
    players: usize,
    questions: usize,
    answers: usize,
    wins: Arc<WinPredicate>,
}

impl NonlocalGame {
    pub fn new<F>(
        name: impl Into<String>,
        players: usize,
        questions: usize,
        answers: usize,
        wins: F,
    ) -> Result<Self>
    where
        F: Fn(&[usize], &[usize]) -> bool + Send + Sync + 'static,
    {
        if players < 2 {
            return Err(invalid("players", format!("need at least 2, got {players}")));
        }
        if questions < 2 {
            return Err(invalid("questions", format!("need at least 2, got {questions}")));
        }
        if answers < 2 {
            return Err(invalid("answers", format!("need at least 2, got {answers}")));
        }
        Ok(Self {
            name: name.into(),
            players,
            questions,
            answers,
            wins: Arc::new(wins),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of players `n`.
    pub fn players(&self) -> usize {
        self.players
    }

    /// Questions per player `d`; also the per-sender message alphabet.
    pub fn questions(&self) -> usize {
        self.questions
    }

    /// Answers per player `D`.
    pub fn answers(&self) -> usize {
        self.answers
    }

    /// `Δ = d^n`, the number of message tuples and of channel outputs.
    pub fn message_count(&self) -> usize {
        index::pow(self.questions, self.players)
    }

    /// `D^n`.
    pub fn answer_tuple_count(&self) -> usize {
        index::pow(self.answers, self.players)
    }

    /// Per-sender channel input alphabet `d * D`.
    pub fn input_alphabet(&self) -> usize {
        self.questions * self.answers
    }

    /// `(dD)^n`, the number of channel input tuples.
    pub fn input_count(&self) -> usize {
        index::pow(self.input_alphabet(), self.players)
    }

    pub fn wins(&self, questions: &[usize], answers: &[usize]) -> bool {
        debug_assert_eq!(questions.len(), self.players);
        debug_assert_eq!(answers.len(), self.players);
        (self.wins)(questions, answers)
    }

    /// Splits a channel input index into its question and answer tuples.
    pub fn split_input(&self, input: usize, questions: &mut [usize], answers: &mut [usize]) {
        let mut rest = input;
        for k in (0..self.players).rev() {
            let symbol = rest % self.input_alphabet();
            rest /= self.input_alphabet();
            questions[k] = symbol / self.answers;
            answers[k] = symbol % self.answers;
        }
    }

    pub fn input_index(&self, questions: &[usize], answers: &[usize]) -> usize {
        questions
            .iter()
            .zip(answers)
            .fold(0, |acc, (&q, &a)| acc * self.input_alphabet() + q * self.answers + a)
    }

    /// Index of the question tuple carried by a channel input.
    pub fn echoed_questions(&self, input: usize) -> usize {
        let mut rest = input;
        let mut echo = 0;
        let mut scale = 1;
        for _ in 0..self.players {
            let symbol = rest % self.input_alphabet();
            rest /= self.input_alphabet();
            echo += (symbol / self.answers) * scale;
            scale *= self.questions;
        }
        echo
    }

    pub fn input_wins(&self, input: usize) -> bool {
        let mut q = vec![0; self.players];
        let mut a = vec![0; self.players];
        self.split_input(input, &mut q, &mut a);
        self.wins(&q, &a)
    }

    /// Membership of every channel input in the winning set.
    pub fn winning_inputs(&self) -> Vec<bool> {
        let mut q = vec![0; self.players];
        let mut a = vec![0; self.players];
        (0..self.input_count())
            .map(|x| {
                self.split_input(x, &mut q, &mut a);
                self.wins(&q, &a)
            })
            .collect()
    }

    /// Number of winning `(questions, answers)` tuples.
    pub fn winning_tuple_count(&self) -> usize {
        self.winning_inputs().iter().filter(|&&w| w).count()
    }
}

impl fmt::Debug for NonlocalGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlocalGame")
            .field("name", &self.name)
            .field("players", &self.players)
            .field("questions", &self.questions)
            .field("answers", &self.answers)
            .finish_non_exhaustive()
    }
}

fn parity(bits: usize) -> usize {
    (bits.count_ones() & 1) as usize
}

/// CHSH: two players, binary questions and answers, win iff `a1 ⊕ a2 = q1 q2`.
pub fn chsh_game() -> NonlocalGame {
    NonlocalGame::new("chsh", 2, 2, 2, |q, a| (a[0] ^ a[1]) == (q[0] & q[1]))
        .expect("static alphabet sizes are valid")
}

/// Magic square: `d = 3`, answers are 3-bit words packed with bit `j` holding
/// `a^j`. Player 1 fills row `q1` with even parity, player 2 fills column
/// `q2` with odd parity, and they must agree on the shared cell, i.e. bit
/// `q2` of player 1's word equals bit `q1` of player 2's word.
pub fn magic_square_game() -> NonlocalGame {
    NonlocalGame::new("magic-square", 2, 3, 8, |q, a| {
        parity(a[0]) == 0 && parity(a[1]) == 1 && ((a[0] >> q[1]) & 1) == ((a[1] >> q[0]) & 1)
    })
    .expect("static alphabet sizes are valid")
}

/// Promise-free multi-player parity game. Odd question parity always wins;
/// otherwise the answer parity must be 0 when `Σq ≡ 0 (mod 4)` and 1 when
/// `Σq ≡ 2 (mod 4)`.
pub fn mpp_game(players: usize) -> Result<NonlocalGame> {
    if players < 2 {
        return Err(invalid("players", format!("mpp needs n >= 2, got {players}")));
    }
    NonlocalGame::new(format!("mpp:{players}"), players, 2, 2, |q, a| {
        let sum: usize = q.iter().sum();
        if sum % 2 == 1 {
            return true;
        }
        let answer_parity = a.iter().fold(0, |acc, &x| acc ^ x);
        let required = usize::from(sum % 4 != 0);
        answer_parity == required
    })
}

/// Looks a game up by its CLI name: `chsh`, `magic-square` or `mpp:<n>`.
pub fn by_name(name: &str) -> Result<NonlocalGame> {
    match name {
        "chsh" => Ok(chsh_game()),
        "magic-square" | "ms" => Ok(magic_square_game()),
        other => {
            let n = other
                .strip_prefix("mpp:")
                .and_then(|n| n.parse::<usize>().ok())
                .ok_or_else(|| Error::UnknownGame(other.into()))?;
            mpp_game(n)
        }
    }
}
