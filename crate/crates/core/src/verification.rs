//! Randomized checks of the information identities and the perfect-box
//! hypotheses, collected into a deterministic report.

use alloc::{format, string::String, vec, vec::Vec};
use core::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::capacity::pseudo_telepathy_capacity;
use crate::channels::MacChannel;
use crate::correlations::{pseudo_telepathy_box, CorrelationBox};
use crate::error::Result;
use crate::games::{chsh_game, magic_square_game, mpp_game, NonlocalGame};
use crate::infotheory::{
    compose, deterministic_rate, input_output_information, prop3_rate, sum_rate, AXIS_M, AXIS_X, AXIS_Y,
};
use crate::sampling::{
    faulty_channel, random_channel, random_deterministic_encoder, random_encoder, random_product_distribution,
};

pub const IDENTITY_TOLERANCE: f64 = 1e-10;
pub const CEILING_TOLERANCE: f64 = 1e-9;
pub const CONSTANT_NOISE_TOLERANCE: f64 = 1e-12;
pub const BOX_TOLERANCE: f64 = 1e-10;

/// Outcome of one named check: the worst residual seen over its samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub samples: usize,
    pub residual: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    fn push(&mut self, name: String, samples: usize, residual: f64, tolerance: f64) {
        self.checks.push(Check {
            name,
            samples,
            residual,
            tolerance,
        });
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            writeln!(
                f,
                "{} {:width$}  samples={:<5} max_residual={:.3e} tolerance={:.0e}",
                if c.passed() { "PASS" } else { "FAIL" },
                c.name,
                c.samples,
                c.residual,
                c.tolerance,
            )?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub triples_per_game: usize,
    pub seed: u64,
    pub games: Vec<NonlocalGame>,
    /// Replace every sampled channel with one whose winning rows do not share
    /// a single entropy.
    pub inject_fault: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            triples_per_game: 1000,
            seed: 0,
            games: vec![
                chsh_game(),
                magic_square_game(),
                mpp_game(3).expect("n = 3 is valid"),
            ],
            inject_fault: false,
        }
    }
}

#[derive(Default)]
struct Worst {
    chain: f64,
    fast_sum_rate: f64,
    deterministic: f64,
    prop3: f64,
    ceiling: f64,
    data_processing: f64,
    constant_noise: f64,
}

fn worst(a: &mut f64, v: f64) {
    if v > *a || v.is_nan() {
        *a = v;
    }
}

/// Runs the proposition suite on random triples for every configured game,
/// then the perfect-box checks.
pub fn run(cfg: &VerifyConfig) -> Result<Report> {
    let mut report = Report::default();
    for (stream, game) in cfg.games.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(stream as u64);
        let mut w = Worst::default();
        let fault = if cfg.inject_fault { Some(faulty_channel(game)?) } else { None };
        for _ in 0..cfg.triples_per_game {
            let sampled = random_channel(&mut rng, game)?;
            let ch = fault.as_ref().unwrap_or(&sampled);
            let pi = random_product_distribution(&mut rng, game.players(), game.questions());
            let enc = random_encoder(&mut rng, game);
            let joint = compose(&pi, &enc, ch)?;
            let ixy = joint.mutual_information(&[AXIS_X], &[AXIS_Y]);
            let imy = joint.mutual_information(&[AXIS_M], &[AXIS_Y]);
            let ixy_m = joint.conditional_mutual_information(&[AXIS_X], &[AXIS_Y], &[AXIS_M]);
            worst(&mut w.chain, (ixy - imy - ixy_m).abs());
            worst(&mut w.fast_sum_rate, (sum_rate(&pi, &enc, ch)? - imy).abs());
            worst(&mut w.prop3, (ixy - prop3_rate(&pi, &enc, ch)?).abs());
            worst(&mut w.ceiling, imy - ch.rate_ceiling());
            worst(&mut w.data_processing, imy - ixy);
            worst(&mut w.constant_noise, ch.constant_noise_violation());

            let det = random_deterministic_encoder(&mut rng, game);
            let map = det.deterministic_map().expect("deterministic by construction");
            let dj = compose(&pi, &det, ch)?;
            let d_imy = dj.mutual_information(&[AXIS_M], &[AXIS_Y]);
            let d_ixy = dj.mutual_information(&[AXIS_X], &[AXIS_Y]);
            worst(&mut w.deterministic, (d_imy - d_ixy).abs());
            worst(&mut w.deterministic, (deterministic_rate(&pi, &map, ch) - d_imy).abs());
            worst(&mut w.deterministic, (input_output_information(&pi, &det, ch)? - d_ixy).abs());
            worst(&mut w.ceiling, d_imy - ch.rate_ceiling());
        }
        let n = cfg.triples_per_game;
        let g = game.name();
        report.push(format!("{g}: I(X;Y) = I(M;Y) + I(X;Y|M)"), n, w.chain, IDENTITY_TOLERANCE);
        report.push(format!("{g}: direct sum-rate = I(M;Y)"), n, w.fast_sum_rate, IDENTITY_TOLERANCE);
        report.push(format!("{g}: deterministic I(M;Y) = I(X;Y)"), n, w.deterministic, IDENTITY_TOLERANCE);
        report.push(
            format!("{g}: I(X;Y) = H(Y) - f_L + w(f_L - f_W)"),
            n,
            w.prop3,
            IDENTITY_TOLERANCE,
        );
        report.push(format!("{g}: I(M;Y) <= log D - f_W"), 2 * n, w.ceiling.max(0.0), CEILING_TOLERANCE);
        report.push(
            format!("{g}: I(M;Y) <= I(X;Y)"),
            n,
            w.data_processing.max(0.0),
            IDENTITY_TOLERANCE,
        );
        report.push(
            format!("{g}: constant branch noise"),
            n,
            w.constant_noise,
            CONSTANT_NOISE_TOLERANCE,
        );
    }
    for game in &cfg.games {
        if let Some(b) = pseudo_telepathy_box(game) {
            box_checks(&mut report, game, &b)?;
        }
    }
    Ok(report)
}

fn box_checks(report: &mut Report, game: &NonlocalGame, b: &CorrelationBox) -> Result<()> {
    let g = game.name();
    let loss = (0..b.question_tuple_count())
        .map(|q| (1.0 - b.win_probability_at(game, q)).abs())
        .fold(0.0, f64::max);
    report.push(format!("{g} box: wins every question tuple"), b.question_tuple_count(), loss, BOX_TOLERANCE);
    report.push(format!("{g} box: no-signaling"), 1, b.signaling_violation(), BOX_TOLERANCE);
    report.push(format!("{g} box: uniform outputs"), 1, b.output_uniformity_violation(), BOX_TOLERANCE);
    let mut residual: f64 = 0.0;
    let mut samples = 0;
    for eta in [0.0, 0.25, 0.5, 0.75] {
        let ch = MacChannel::type_i(game, eta)?;
        residual = residual.max(capacity_residual(&ch, b));
        samples += 1;
    }
    for eta in [0.25, 0.5, 0.75, 1.0] {
        let ch = MacChannel::type_ii(game, eta)?;
        residual = residual.max(capacity_residual(&ch, b));
        samples += 1;
    }
    report.push(format!("{g} box: log D - f_W = direct sum-rate"), samples, residual, 1e-9);
    Ok(())
}

fn capacity_residual(ch: &MacChannel, b: &CorrelationBox) -> f64 {
    match pseudo_telepathy_capacity(ch, b) {
        Ok(r) => r.cross_check.unwrap_or(f64::INFINITY),
        Err(_) => f64::INFINITY,
    }
}
