//! Exact finite-alphabet information quantities for the chain `M → X → Y`.

use alloc::{format, vec, vec::Vec};

use crate::channels::MacChannel;
use crate::correlations::Encoder;
use crate::error::{invalid, Error, Result};
use crate::games::NonlocalGame;
use crate::index;

const SIMPLEX_TOLERANCE: f64 = 1e-12;
const MASS_TOLERANCE: f64 = 1e-11;

/// Shannon entropy in bits with `0 log 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * libm::log2(x))
        .sum::<f64>()
}

/// Independent per-sender message distributions, `π(m) = Π_k π_k(m_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductDistribution {
    marginals: Vec<Vec<f64>>,
}

impl ProductDistribution {
    pub fn new(marginals: Vec<Vec<f64>>) -> Result<Self> {
        let symbols = marginals.first().map_or(0, Vec::len);
        if marginals.is_empty() || symbols == 0 {
            return Err(invalid("marginals", "need at least one non-empty marginal"));
        }
        for (k, m) in marginals.iter().enumerate() {
            if m.len() != symbols {
                return Err(Error::DimensionMismatch {
                    what: "sender marginal",
                    expected: symbols,
                    found: m.len(),
                });
            }
            let total: f64 = m.iter().sum();
            if m.iter().any(|&p| p < 0.0 || !p.is_finite()) || (total - 1.0).abs() > SIMPLEX_TOLERANCE {
                return Err(invalid(
                    "marginals",
                    format!("sender {k} is not a distribution (sum {total})"),
                ));
            }
        }
        Ok(Self { marginals })
    }

    /// Caller guarantees each marginal is a distribution.
    pub(crate) fn from_unchecked(marginals: Vec<Vec<f64>>) -> Self {
        Self { marginals }
    }

    pub fn uniform(players: usize, symbols: usize) -> Self {
        Self {
            marginals: vec![vec![1.0 / symbols as f64; symbols]; players],
        }
    }

    pub fn players(&self) -> usize {
        self.marginals.len()
    }

    pub fn symbols(&self) -> usize {
        self.marginals[0].len()
    }

    pub fn marginal(&self, k: usize) -> &[f64] {
        &self.marginals[k]
    }

    pub fn marginals(&self) -> &[Vec<f64>] {
        &self.marginals
    }

    pub fn message_count(&self) -> usize {
        index::pow(self.symbols(), self.players())
    }

    /// Joint probability of the message tuple with dense index `m`.
    pub fn prob(&self, m: usize) -> f64 {
        let d = self.symbols();
        let mut rest = m;
        let mut p = 1.0;
        for marginal in self.marginals.iter().rev() {
            p *= marginal[rest % d];
            rest /= d;
        }
        p
    }

    /// Dense joint `π(m)` over all message tuples.
    pub fn joint(&self) -> Vec<f64> {
        self.marginals.iter().fold(vec![1.0], |acc, marginal| {
            acc.iter()
                .flat_map(|&a| marginal.iter().map(move |&b| a * b))
                .collect()
        })
    }

    /// `H(M) = Σ_k H(π_k)`.
    pub fn entropy(&self) -> f64 {
        self.marginals.iter().map(|m| entropy(m)).sum()
    }
}

/// Axis of `M` in a composed joint.
pub const AXIS_M: usize = 0;
/// Axis of `X` in a composed joint.
pub const AXIS_X: usize = 1;
/// Axis of `Y` in a composed joint.
pub const AXIS_Y: usize = 2;

/// Dense probability array over several labelled axes (row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    shape: Vec<usize>,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(shape: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let size: usize = shape.iter().product();
        if probs.len() != size {
            return Err(Error::DimensionMismatch {
                what: "joint distribution",
                expected: size,
                found: probs.len(),
            });
        }
        let total: f64 = probs.iter().sum();
        let negative = probs.iter().fold(0.0f64, |w, &p| w.max(-p));
        let deviation = (total - 1.0).abs().max(negative);
        if deviation > MASS_TOLERANCE {
            return Err(Error::NotStochastic {
                what: "joint distribution",
                deviation,
            });
        }
        Ok(Self { shape, probs })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Marginal over `axes` (in the given order, row-major).
    pub fn marginal(&self, axes: &[usize]) -> Vec<f64> {
        let sizes: Vec<usize> = axes.iter().map(|&a| self.shape[a]).collect();
        let mut out = vec![0.0; sizes.iter().product()];
        let mut strides = vec![1usize; self.shape.len()];
        for a in (0..self.shape.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * self.shape[a + 1];
        }
        for (flat, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let target = axes
                .iter()
                .zip(&sizes)
                .fold(0, |acc, (&a, &s)| acc * s + (flat / strides[a]) % self.shape[a]);
            out[target] += p;
        }
        out
    }

    pub fn entropy(&self, axes: &[usize]) -> f64 {
        if axes.is_empty() {
            return 0.0;
        }
        entropy(&self.marginal(axes))
    }

    /// `I(A; B) = H(A) + H(B) − H(A, B)`.
    pub fn mutual_information(&self, a: &[usize], b: &[usize]) -> f64 {
        let ab: Vec<usize> = a.iter().chain(b).copied().collect();
        self.entropy(a) + self.entropy(b) - self.entropy(&ab)
    }

    /// `I(A; B | C) = H(A, C) + H(B, C) − H(A, B, C) − H(C)`.
    pub fn conditional_mutual_information(&self, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
        let ac: Vec<usize> = a.iter().chain(c).copied().collect();
        let bc: Vec<usize> = b.iter().chain(c).copied().collect();
        let abc: Vec<usize> = a.iter().chain(b).chain(c).copied().collect();
        self.entropy(&ac) + self.entropy(&bc) - self.entropy(&abc) - self.entropy(c)
    }
}

fn check_dimensions(pi: &ProductDistribution, enc: &Encoder, game: &NonlocalGame) -> Result<()> {
    if pi.players() != game.players() || pi.symbols() != game.questions() {
        return Err(Error::DimensionMismatch {
            what: "message distribution vs game",
            expected: game.message_count(),
            found: pi.message_count(),
        });
    }
    if !enc.matches_game(game) {
        return Err(Error::DimensionMismatch {
            what: "encoder inputs vs channel inputs",
            expected: game.input_count(),
            found: enc.input_count(),
        });
    }
    Ok(())
}

/// `p(m, x, y) = π(m) · E(x | m) · N(y | x)` on axes `(M, X, Y)`.
pub fn compose(pi: &ProductDistribution, enc: &Encoder, ch: &MacChannel) -> Result<JointDistribution> {
    check_dimensions(pi, enc, ch.game())?;
    let nm = pi.message_count();
    let nx = ch.input_count();
    let ny = ch.output_count();
    let weights = pi.joint();
    let mut probs = vec![0.0; nm * nx * ny];
    for (m, &pm) in weights.iter().enumerate() {
        if pm == 0.0 {
            continue;
        }
        for (x, &px) in enc.row(m).iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            let base = (m * nx + x) * ny;
            for (slot, &py) in probs[base..base + ny].iter_mut().zip(ch.row(x)) {
                *slot = pm * px * py;
            }
        }
    }
    JointDistribution::new(vec![nm, nx, ny], probs)
}

/// `p(y)` induced by `π` and `E` through the channel.
pub fn output_distribution(pi: &ProductDistribution, enc: &Encoder, ch: &MacChannel) -> Result<Vec<f64>> {
    check_dimensions(pi, enc, ch.game())?;
    let mut py = vec![0.0; ch.output_count()];
    for (m, &pm) in pi.joint().iter().enumerate() {
        if pm == 0.0 {
            continue;
        }
        for (x, &px) in enc.row(m).iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            for (slot, &p) in py.iter_mut().zip(ch.row(x)) {
                *slot += pm * px * p;
            }
        }
    }
    Ok(py)
}

/// Sum-rate `I(M; Y)` with identity decoding.
pub fn sum_rate(pi: &ProductDistribution, enc: &Encoder, ch: &MacChannel) -> Result<f64> {
    check_dimensions(pi, enc, ch.game())?;
    let ny = ch.output_count();
    let mut py = vec![0.0; ny];
    let mut conditional = 0.0;
    let mut row = vec![0.0; ny];
    for (m, &pm) in pi.joint().iter().enumerate() {
        if pm == 0.0 {
            continue;
        }
        row.fill(0.0);
        for (x, &px) in enc.row(m).iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            for (slot, &p) in row.iter_mut().zip(ch.row(x)) {
                *slot += px * p;
            }
        }
        conditional += pm * entropy(&row);
        for (slot, &p) in py.iter_mut().zip(&row) {
            *slot += pm * p;
        }
    }
    Ok(entropy(&py) - conditional)
}

/// `I(X; Y)` of the composed chain, using the cached row entropies.
pub fn input_output_information(pi: &ProductDistribution, enc: &Encoder, ch: &MacChannel) -> Result<f64> {
    let py = output_distribution(pi, enc, ch)?;
    let px = input_distribution(pi, enc);
    let conditional: f64 = px
        .iter()
        .zip(ch.row_entropies())
        .map(|(&p, &h)| p * h)
        .sum();
    Ok(entropy(&py) - conditional)
}

fn input_distribution(pi: &ProductDistribution, enc: &Encoder) -> Vec<f64> {
    let mut px = vec![0.0; enc.input_count()];
    for (m, &pm) in pi.joint().iter().enumerate() {
        if pm == 0.0 {
            continue;
        }
        for (slot, &p) in px.iter_mut().zip(enc.row(m)) {
            *slot += pm * p;
        }
    }
    px
}

/// Sum-rate of a deterministic encoder given as message → input map. For
/// such encoders `I(M; Y) = I(X; Y)`, so only `H(Y)` and the row entropies
/// are needed.
pub fn deterministic_rate(pi: &ProductDistribution, map: &[usize], ch: &MacChannel) -> f64 {
    let mut py = vec![0.0; ch.output_count()];
    let mut conditional = 0.0;
    let entropies = ch.row_entropies();
    for (m, &x) in map.iter().enumerate() {
        let pm = pi.prob(m);
        if pm == 0.0 {
            continue;
        }
        conditional += pm * entropies[x];
        for (slot, &p) in py.iter_mut().zip(ch.row(x)) {
            *slot += pm * p;
        }
    }
    entropy(&py) - conditional
}

/// `ω = Σ_{x ∈ W} Σ_m π(m) E(x | m)`.
pub fn win_probability(pi: &ProductDistribution, enc: &Encoder, game: &NonlocalGame) -> Result<f64> {
    check_dimensions(pi, enc, game)?;
    let winning = game.winning_inputs();
    Ok(input_distribution(pi, enc)
        .iter()
        .zip(&winning)
        .filter(|(_, &w)| w)
        .map(|(&p, _)| p)
        .sum())
}

/// `H(Y) − f_L + ω (f_L − f_W)`, which equals `I(X; Y)` whenever every row of
/// each branch has the branch's noise entropy.
pub fn prop3_rate(pi: &ProductDistribution, enc: &Encoder, ch: &MacChannel) -> Result<f64> {
    let py = output_distribution(pi, enc, ch)?;
    let px = input_distribution(pi, enc);
    let omega: f64 = px
        .iter()
        .enumerate()
        .filter(|&(x, _)| ch.is_winning(x))
        .map(|(_, &p)| p)
        .sum();
    let (fw, fl) = (ch.noise_win(), ch.noise_lose());
    Ok(entropy(&py) - fl + omega * (fl - fw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::{e_star, pr_box, StrategySpace};
    use crate::games::chsh_game;

    #[test]
    fn entropy_basics() {
        assert_eq!(entropy(&[0.25; 4]), 2.0);
        assert_eq!(entropy(&[1.0, 0.0]), 0.0);
        assert!((entropy(&[0.5, 0.5, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_distribution() {
        let pi = ProductDistribution::new(vec![vec![0.2, 0.8], vec![0.5, 0.5]]).unwrap();
        assert_eq!(pi.joint(), vec![0.1, 0.1, 0.4, 0.4]);
        assert!((pi.prob(2) - 0.4).abs() < 1e-15);
        assert!((pi.entropy() - entropy(&pi.joint())).abs() < 1e-12);
        assert!(ProductDistribution::new(vec![vec![0.2, 0.7]]).is_err());
        assert!(ProductDistribution::new(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
        assert!(ProductDistribution::new(vec![vec![1.5, -0.5]]).is_err());
    }

    #[test]
    fn independent_axes_have_zero_information() {
        let probs: Vec<f64> = [0.3, 0.7]
            .iter()
            .flat_map(|&a| [0.1, 0.6, 0.3].iter().map(move |&b| a * b))
            .collect();
        let j = JointDistribution::new(vec![2, 3], probs).unwrap();
        assert!(j.mutual_information(&[0], &[1]).abs() < 1e-15);
        assert!(JointDistribution::new(vec![2], vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn compose_noiseless_identity() {
        let g = chsh_game();
        let ch = MacChannel::type_i(&g, 0.0).unwrap();
        // every sender inputs (m_k, 0): wins unless m = (1, 1)
        let space = StrategySpace::new(2, 2, 4, 1000).unwrap();
        let strategy = crate::correlations::DeterministicStrategy::new(2, 2, 4, vec![0, 2, 0, 2]).unwrap();
        assert!(space.count() == 256);
        let enc = Encoder::from_strategy(&strategy, 2).unwrap();
        let pi = ProductDistribution::uniform(2, 2);
        let joint = compose(&pi, &enc, &ch).unwrap();
        assert!((joint.total_mass() - 1.0).abs() < 1e-15);
        assert_eq!(joint.marginal(&[AXIS_M]), pi.joint());
        let x = g.input_index(&[0, 1], &[0, 0]);
        let probs = joint.probs();
        assert_eq!(probs[(16 + x) * 4 + 1], 0.25);
    }

    #[test]
    fn pr_box_rates() {
        let g = chsh_game();
        let enc = e_star(&pr_box());
        let pi = ProductDistribution::uniform(2, 2);
        let eta = 0.6;
        let ch = MacChannel::type_ii(&g, eta).unwrap();
        let rate = sum_rate(&pi, &enc, &ch).unwrap();
        let expected = 2.0 - crate::channels::noise_f(4, eta).unwrap();
        assert!((rate - expected).abs() < 1e-12);
        assert!((win_probability(&pi, &enc, &g).unwrap() - 1.0).abs() < 1e-15);
        let skew = ProductDistribution::new(vec![vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        assert!((win_probability(&skew, &enc, &g).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_branches_ignore_omega() {
        let g = chsh_game();
        let mut k = vec![0.0; 16];
        for y0 in 0..4 {
            for y in 0..4 {
                k[y0 * 4 + y] = if y == y0 { 0.7 } else { 0.1 };
            }
        }
        let ch = MacChannel::two_branch(&g, &k, &k).unwrap();
        let pi = ProductDistribution::new(vec![vec![0.4, 0.6], vec![0.3, 0.7]]).unwrap();
        for enc in [e_star(&pr_box()), e_star(&crate::correlations::tsirelson_box())] {
            let py = output_distribution(&pi, &enc, &ch).unwrap();
            let expected = entropy(&py) - ch.noise_win();
            assert!((prop3_rate(&pi, &enc, &ch).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let ch = MacChannel::type_i(&chsh_game(), 0.5).unwrap();
        let pi = ProductDistribution::uniform(2, 3);
        assert!(sum_rate(&pi, &e_star(&pr_box()), &ch).is_err());
        let ms = e_star(&crate::correlations::magic_square_box());
        assert!(sum_rate(&ProductDistribution::uniform(2, 2), &ms, &ch).is_err());
    }
}
