//! Seeded random instances for property checks.

use alloc::{vec, vec::Vec};

use rand::Rng;

use crate::channels::MacChannel;
use crate::correlations::{e_star, pseudo_telepathy_box, DeterministicStrategy, Encoder};
use crate::error::Result;
use crate::games::NonlocalGame;
use crate::infotheory::{entropy, ProductDistribution};

/// Dirichlet(1, …, 1) sample. With probability `sparsity` each coordinate
/// is zeroed first, keeping at least one.
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, len: usize, sparsity: f64) -> Vec<f64> {
    let mut p: Vec<f64> = (0..len)
        .map(|_| -libm::log(1.0 - rng.gen::<f64>()))
        .collect();
    if sparsity > 0.0 {
        let keep = rng.gen_range(0..len);
        for (i, v) in p.iter_mut().enumerate() {
            if i != keep && rng.gen_bool(sparsity) {
                *v = 0.0;
            }
        }
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    p
}

/// Product distribution with occasional zero-probability messages.
pub fn random_product_distribution<R: Rng + ?Sized>(rng: &mut R, players: usize, symbols: usize) -> ProductDistribution {
    let sparse = rng.gen_bool(0.2);
    let marginals = (0..players)
        .map(|_| random_simplex(rng, symbols, if sparse { 0.3 } else { 0.0 }))
        .collect();
    ProductDistribution::from_unchecked(marginals)
}

/// Uniformly random deterministic encoder for `game`'s channel.
pub fn random_deterministic_encoder<R: Rng + ?Sized>(rng: &mut R, game: &NonlocalGame) -> Encoder {
    let (n, d, alphabet) = (game.players(), game.questions(), game.input_alphabet());
    let responses = (0..n * d).map(|_| rng.gen_range(0..alphabet)).collect();
    let strategy = DeterministicStrategy::new(n, d, alphabet, responses).expect("responses within range");
    Encoder::from_strategy(&strategy, game.answers()).expect("outputs are d * D")
}

fn random_lifted_local_box<R: Rng + ?Sized>(rng: &mut R, game: &NonlocalGame) -> Encoder {
    let (n, d, answers) = (game.players(), game.questions(), game.answers());
    let responses = (0..n * d).map(|_| rng.gen_range(0..answers)).collect();
    let strategy = DeterministicStrategy::new(n, d, answers, responses).expect("responses within range");
    e_star(&strategy.to_box())
}

/// Convex mixture of one to three parts, each a random deterministic encoder,
/// the lift of a random local deterministic box, or the lift of the game's
/// built-in perfect box.
pub fn random_encoder<R: Rng + ?Sized>(rng: &mut R, game: &NonlocalGame) -> Encoder {
    let parts = rng.gen_range(1..=3);
    let perfect = pseudo_telepathy_box(game).map(|b| e_star(&b));
    let encoders: Vec<Encoder> = (0..parts)
        .map(|_| match rng.gen_range(0..3) {
            0 => random_deterministic_encoder(rng, game),
            1 => random_lifted_local_box(rng, game),
            _ => perfect
                .clone()
                .unwrap_or_else(|| random_deterministic_encoder(rng, game)),
        })
        .collect();
    if encoders.len() == 1 {
        return encoders.into_iter().next().expect("one part");
    }
    let weights = random_simplex(rng, encoders.len(), 0.0);
    let mixture: Vec<(f64, &Encoder)> = weights.iter().copied().zip(&encoders).collect();
    Encoder::mixture(&mixture).expect("parts share the scenario")
}

/// `Δ × Δ` kernel whose row `i` is `base` cyclically shifted by `i`.
pub fn cyclic_kernel(base: &[f64]) -> Vec<f64> {
    let delta = base.len();
    let mut k = vec![0.0; delta * delta];
    for i in 0..delta {
        for j in 0..delta {
            k[i * delta + (i + j) % delta] = base[j];
        }
    }
    k
}

/// Either a depolarizing channel with random `η_l < η_w`, or a two-branch
/// channel with cyclic-shift kernels built from two random rows.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, game: &NonlocalGame) -> Result<MacChannel> {
    if rng.gen_bool(0.5) {
        let a = rng.gen::<f64>();
        let b = rng.gen::<f64>();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if hi - lo > 1e-6 {
            return MacChannel::depolarizing(game, hi, lo);
        }
        return MacChannel::depolarizing(game, 1.0, 0.0);
    }
    let delta = game.message_count();
    let x = random_simplex(rng, delta, 0.1);
    let y = random_simplex(rng, delta, 0.1);
    let (win, lose) = if entropy(&x) <= entropy(&y) { (x, y) } else { (y, x) };
    MacChannel::two_branch(game, &cyclic_kernel(&win), &cyclic_kernel(&lose))
}

/// A channel whose first winning row has been replaced so that the winning
/// branch no longer has constant row entropy.
pub fn faulty_channel(game: &NonlocalGame) -> Result<MacChannel> {
    let base = MacChannel::depolarizing(game, 0.9, 0.1)?;
    let delta = base.output_count();
    let mut matrix = base.matrix().to_vec();
    if let Some(x) = (0..base.input_count()).find(|&x| base.is_winning(x)) {
        let row = &mut matrix[x * delta..(x + 1) * delta];
        row.fill(1.0 / delta as f64);
    }
    // the first winning row now carries log Δ, the rest keep f(Δ, 0.9)
    MacChannel::from_rows(game, matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{chsh_game, magic_square_game};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn simplex_samples_are_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let p = random_simplex(&mut rng, 5, 0.5);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn cyclic_kernel_has_constant_row_entropy() {
        let k = cyclic_kernel(&[0.5, 0.3, 0.2]);
        for row in k.chunks(3) {
            assert!((entropy(row) - entropy(&[0.5, 0.3, 0.2])).abs() < 1e-15);
        }
        for col in 0..3 {
            let s: f64 = (0..3).map(|r| k[r * 3 + col]).sum();
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn random_objects_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for game in [chsh_game(), magic_square_game()] {
            for _ in 0..20 {
                let ch = random_channel(&mut rng, &game).unwrap();
                assert!(ch.constant_noise_violation() < 1e-12);
                assert!(ch.noise_win() <= ch.noise_lose() + 1e-12);
                let enc = random_encoder(&mut rng, &game);
                assert!(enc.matches_game(&game));
                let pi = random_product_distribution(&mut rng, game.players(), game.questions());
                assert!((pi.joint().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn faulty_channel_breaks_constant_noise() {
        let ch = faulty_channel(&chsh_game()).unwrap();
        assert!(ch.constant_noise_violation() > 0.1);
    }
}
