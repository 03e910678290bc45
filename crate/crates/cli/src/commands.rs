//! Subcommand implementations. Each returns its output as text so the binary
//! only decides where it goes.

use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};
use ngmac_core::capacity::{
    self, classical_capacity_exact, classical_game_value, classical_upper_bound, linear_grid,
    mpp_classical_value, pseudo_telepathy_capacity, OptimizerConfig, SweepResource,
};
use ngmac_core::correlations::{
    local_deterministic_boxes, magic_square_box, mpp_box, pr_box, tsirelson_box, CorrelationBox, Resource,
};
use ngmac_core::games::{self, NonlocalGame};
use ngmac_core::verification::{self, Report, VerifyConfig};
use ngmac_core::{ChannelType, MacChannel};

use crate::config::{ResourceSpec, RunConfig};
use crate::csv_io;
use crate::format::sig10;

pub fn game(name: &str) -> Result<NonlocalGame> {
    games::by_name(name).map_err(|e| anyhow!("invalid `game`: {e}"))
}

#[derive(Debug)]
pub struct SweepOutput {
    pub csv: String,
    pub warnings: Vec<String>,
}

fn sweep_resources(cfg: &RunConfig) -> Result<Vec<SweepResource>> {
    cfg.resources
        .iter()
        .map(|r| {
            Ok(match r {
                ResourceSpec::LocalExact => SweepResource::LocalExact,
                ResourceSpec::LocalBound => SweepResource::LocalBound,
                ResourceSpec::QuantumLower => SweepResource::QuantumLower,
                ResourceSpec::QuantumExact => SweepResource::QuantumExact,
                ResourceSpec::NoSignalingExact => SweepResource::NoSignalingExact,
                ResourceSpec::VertexFile(path) => {
                    let path = path
                        .as_ref()
                        .or(cfg.vertex_file.as_ref())
                        .ok_or_else(|| anyhow!("invalid `vertex_file`: no path given"))?;
                    let label = path.display().to_string();
                    let boxes = csv_io::read_box_file(path, &Resource::Custom(label.clone()))
                        .map_err(|e| anyhow!("invalid `vertex_file`: {e:#}"))?;
                    SweepResource::Vertices { label, boxes }
                }
            })
        })
        .collect()
}

/// Runs the configured sweep and renders it as CSV.
pub fn sweep(cfg: &RunConfig) -> Result<SweepOutput> {
    let g = game(&cfg.game)?;
    let grid = cfg.eta_grid;
    let etas = linear_grid(grid.start, grid.stop, grid.points).map_err(|e| anyhow!("invalid `eta_grid`: {e}"))?;
    let resources = sweep_resources(cfg)?;
    let mut warnings = Vec::new();
    for &eta in &etas {
        let (used, clamped) = cfg.channel_type.clamp_eta(eta);
        if clamped {
            warnings.push(format!(
                "warning: eta = {} is degenerate for Type-{}; using {used:e}",
                sig10(eta),
                if cfg.channel_type == ChannelType::TypeI { "I" } else { "II" },
            ));
        }
    }
    let rows = capacity::sweep(&g, cfg.channel_type, &etas, &resources, &cfg.optimizer)
        .map_err(|e| anyhow!("invalid `resources` for game `{}`: {e}", cfg.game))?;
    let records: Vec<[String; 5]> = rows
        .iter()
        .map(|r| {
            let mut diagnostic = r.result.diagnostic_summary();
            if r.eta_used != r.eta {
                diagnostic = format!("eta_used={:e};{diagnostic}", r.eta_used);
            }
            [
                sig10(r.eta),
                r.resource.clone(),
                r.result.kind.label().to_string(),
                sig10(r.result.value),
                diagnostic,
            ]
        })
        .collect();
    Ok(SweepOutput {
        csv: csv_io::write_sweep(&records)?,
        warnings,
    })
}

pub fn verify(seed: u64, triples: usize, inject_fault: bool) -> Result<Report> {
    let cfg = VerifyConfig {
        triples_per_game: triples,
        seed,
        inject_fault,
        ..VerifyConfig::default()
    };
    Ok(verification::run(&cfg)?)
}

#[derive(Clone, Debug)]
pub struct TableRow {
    pub game: &'static str,
    pub quantity: &'static str,
    pub published: f64,
    pub computed: f64,
}

/// Recomputes the comparison table for the `(η_w, η_l) = (1, 0)` channels.
pub fn table_rows(cfg: &OptimizerConfig) -> Result<Vec<TableRow>> {
    let chsh = games::chsh_game();
    let ms = games::magic_square_game();
    let mpp = games::mpp_game(3)?;
    let ch = MacChannel::type_ii(&chsh, 1.0)?;
    let ms_ch = MacChannel::type_ii(&ms, 1.0)?;
    let mpp_ch = MacChannel::type_ii(&mpp, 1.0)?;
    let omega = |g: &NonlocalGame| -> Result<f64> { Ok(classical_game_value(g, cfg.enumeration_cap)?.value) };
    let row = |game, quantity, published, computed| TableRow {
        game,
        quantity,
        published,
        computed,
    };
    Ok(vec![
        row("chsh", "C(L) exact", 1.44, classical_capacity_exact(&ch, cfg)?.value),
        row("chsh", "C(L) upper bound", 1.63, classical_upper_bound(&ch, omega(&chsh)?, cfg)?.value),
        row("magic-square", "C(L) upper bound", 2.93, classical_upper_bound(&ms_ch, omega(&ms)?, cfg)?.value),
        row("magic-square", "C(Q) exact", 3.17, pseudo_telepathy_capacity(&ms_ch, &magic_square_box())?.value),
        row("mpp:3", "C(L) upper bound", 2.72, classical_upper_bound(&mpp_ch, omega(&mpp)?, cfg)?.value),
        row("mpp:3", "C(Q) exact", 3.00, pseudo_telepathy_capacity(&mpp_ch, &mpp_box(3)?)?.value),
    ])
}

pub fn render_table(rows: &[TableRow]) -> String {
    let mut out = String::from("channel (eta_w, eta_l) = (1, 0)\n");
    let _ = writeln!(
        out,
        "{:<13} {:<17} {:>9} {:>12} {:>9}",
        "game", "quantity", "published", "computed", "delta"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<13} {:<17} {:>9.2} {:>12.6} {:>+9.4}",
            r.game,
            r.quantity,
            r.published,
            r.computed,
            r.computed - r.published
        );
    }
    out
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn game_value(name: &str, cap: u64) -> Result<String> {
    let g = game(name)?;
    let v = classical_game_value(&g, cap)?;
    let k = gcd(v.wins, v.questions);
    let mut out = String::new();
    let _ = writeln!(out, "game: {}", g.name());
    let _ = writeln!(out, "omega_L: {} ({}/{})", sig10(v.value), v.wins / k, v.questions / k);
    if g.name().starts_with("mpp:") {
        if let Ok(closed) = mpp_classical_value(g.players()) {
            let _ = writeln!(out, "closed form 3/4 + 2^-(ceil(n/2)+1): {}", sig10(closed));
        }
    }
    let _ = writeln!(out, "optimal strategy (answer per question):");
    for k in 0..g.players() {
        let answers: Vec<String> = (0..g.questions())
            .map(|q| format!("{q}->{}", v.strategy.response(k, q)))
            .collect();
        let _ = writeln!(out, "  player {}: {}", k + 1, answers.join(" "));
    }
    Ok(out)
}

/// Built-in boxes by name: `pr`, `tsirelson`, `magic-square`, `mpp:<n>`, or
/// `local:<game>` for every local deterministic box of a game's scenario.
pub fn named_boxes(name: &str, cap: u64) -> Result<Vec<CorrelationBox>> {
    if let Some(g) = name.strip_prefix("local:") {
        let g = game(g)?;
        let boxes = local_deterministic_boxes(g.players(), g.questions(), g.answers(), cap)?;
        return Ok(boxes.collect());
    }
    Ok(vec![match name {
        "pr" | "chsh" => pr_box(),
        "tsirelson" => tsirelson_box(),
        "magic-square" | "ms" => magic_square_box(),
        other => match other.strip_prefix("mpp:").and_then(|n| n.parse().ok()) {
            Some(n) => mpp_box(n)?,
            None => bail!("unknown box `{other}` (expected pr, tsirelson, magic-square, mpp:<n> or local:<game>)"),
        },
    }])
}

pub fn box_export(name: &str, cap: u64) -> Result<String> {
    let mut out = String::new();
    for b in named_boxes(name, cap)? {
        out.push_str(&csv_io::write_box(&b)?);
    }
    Ok(out)
}

pub fn channel_export(name: &str, family: ChannelType, eta: f64) -> Result<String> {
    let g = game(name)?;
    let ch = family.build(&g, eta).context("invalid `eta`")?;
    csv_io::write_channel(&ch)
}
