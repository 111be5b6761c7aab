//! Command-line front end for the `pauli-switch` engines: channel
//! classification, distillation rates, grid sweeps, fixed-point constants,
//! twirling reports, multi-qubit witnesses, Choi reports, and a
//! cross-engine self-verification command.
//!
//! Every command is a deterministic wrapper over the library: the same
//! [`RunConfig`] (including the seed) produces byte-identical output, and
//! every CSV/JSON report embeds the tool version, arithmetic mode, seed,
//! and canonical command line so results stay traceable. Usage errors exit
//! with code 2; `verify` exits 0 only when every binding suite passes.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use serde_json::{json, Value};

use pauli_switch::channel::{bloch_lambdas, classify, conjugate_by_pauli};
use pauli_switch::choi::{
    channel_to_bell, is_separable, state_level_switch, state_level_switch_via_pairings,
    BELL_LABELS,
};
use pauli_switch::kraus::{
    clifford_twirl, measure_ensemble, pauli_kraus, random_cptp_kraus, superswitch_kraus,
    switch_kraus, Mat2, C64,
};
use pauli_switch::multiqubit::{
    bracket, identity_outcome_rate_multi, switch_ensemble_multi, MultiPauliChannel,
    SymplecticPauli,
};
use pauli_switch::recurrence::{
    compare_closed_forms, converged_rate, depolarising_rate_curve, face_step, fixed_point,
    rate_at_order, FaceBucketState, FixedPoint, FixedPointRegion, RateCurvePoint, StepMode,
    MAX_CURVE_ORDER, MAX_FIXED_POINT_ITERS,
};
use pauli_switch::sample;
use pauli_switch::switch::{
    distillation_rate, order2_closed_form, pair_minus_unnorm, quantum_switch, superswitch,
};
use pauli_switch::twirl::{
    depolarising_parameter, depolarising_parameter_square_trace, order_two_rate_variants,
    resource_cost, twirled_rate,
};
use pauli_switch::{Exact, PauliVec4, Region, Scalar};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const TOOL_NAME: &str = "pauli-switch";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Complete, reproducible description of one CLI invocation.
#[derive(Parser, Debug, Clone)]
#[command(
    name = "pauli-switch",
    version,
    about = "Exact simulator and verifier for Pauli-channel distillation via quantum switches"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Arithmetic mode: exact arbitrary-precision rationals or f64.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,

    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for every randomised sweep in the run (recorded in the output
    /// header).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Report a channel's tetrahedron region, Kraus rank,
    /// entanglement-breaking status, and Bloch contraction factors.
    Classify {
        /// Channel weights `p0,p1,p2,p3`; each entry a fraction `a/b`, an
        /// integer, or a decimal.
        #[arg(long)]
        channel: String,
    },
    /// Distillation rate of one channel at one cascade order.
    Rate {
        #[arg(long)]
        channel: String,
        /// Cascade order `n >= 0` (number of switch-nesting levels).
        #[arg(long)]
        order: i64,
    },
    /// Rate table over a parameter grid and a set of orders, as CSV.
    Sweep {
        /// Channel family swept by the grid parameter.
        #[arg(long, value_enum, default_value_t = Family::Depolarising)]
        family: Family,
        /// Orders: an inclusive range `1..8` or a comma list `2,4,6`.
        #[arg(long)]
        orders: String,
        /// Grid `start:stop:steps`: `steps` equal intervals, so `steps + 1`
        /// evaluation points. Endpoints may be fractions (`0:4/3:100`).
        #[arg(long)]
        grid: String,
    },
    /// Closed-form asymptotic fixed points (one region, or all of them).
    FixedPoint {
        #[arg(long, value_enum)]
        region: Option<RegionArg>,
    },
    /// Run the cross-engine verification suites; exit 0 iff all pass.
    Verify {
        #[arg(long, value_enum, default_value_t = Level::Quick)]
        level: Level,
    },
    /// Depolarising parameter and twirled rates for a Kraus set.
    Twirl {
        /// JSON file holding an array of 2x2 complex matrices; each matrix
        /// is `[[a00, a01], [a10, a11]]` with entries `[re, im]`.
        #[arg(long)]
        kraus: PathBuf,
        /// Cascade order for the twirled rate (1..=31, so the resource
        /// ledger's exponent stays in range).
        #[arg(long, default_value_t = 2)]
        order: i64,
        /// Unitary-design size for the resource ledger.
        #[arg(long, default_value_t = 24)]
        design_size: u64,
    },
    /// Multi-qubit witness report: nested switches stop producing exact
    /// identity outcomes beyond one qubit.
    Nogo {
        /// Number of random zero-identity two-qubit channels to test.
        #[arg(long, default_value_t = 200)]
        channels: u32,
    },
    /// Bell-diagonal (Choi) report and state-level switch consistency.
    Choi {
        #[arg(long)]
        channel: String,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Depolarising,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionArg {
    Interior,
    SideFace,
    BaseFace,
    DepolarisingEndpoint,
}

impl RegionArg {
    fn to_region(self) -> FixedPointRegion {
        match self {
            RegionArg::Interior => FixedPointRegion::Interior,
            RegionArg::SideFace => FixedPointRegion::SideFace,
            RegionArg::BaseFace => FixedPointRegion::BaseFace,
            RegionArg::DepolarisingEndpoint => FixedPointRegion::DepolarisingEndpoint,
        }
    }
}

/// Rendered report plus the overall verdict (`false` only for a failing
/// `verify` run; the process exit code follows it).
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub text: String,
    pub all_passed: bool,
}

/// Execute a parsed configuration and render its report.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let (text, all_passed) = match &cfg.command {
        Command::Classify { channel } => (
            match cfg.mode {
                Mode::Exact => cmd_classify::<Exact>(cfg, channel)?,
                Mode::Float => cmd_classify::<f64>(cfg, channel)?,
            },
            true,
        ),
        Command::Rate { channel, order } => (
            match cfg.mode {
                Mode::Exact => cmd_rate::<Exact>(cfg, channel, *order)?,
                Mode::Float => cmd_rate::<f64>(cfg, channel, *order)?,
            },
            true,
        ),
        Command::Sweep {
            family,
            orders,
            grid,
        } => (
            match cfg.mode {
                Mode::Exact => cmd_sweep::<Exact>(cfg, *family, orders, grid)?,
                Mode::Float => cmd_sweep::<f64>(cfg, *family, orders, grid)?,
            },
            true,
        ),
        Command::FixedPoint { region } => (cmd_fixed_point(cfg, *region)?, true),
        Command::Verify { level } => cmd_verify(cfg, *level)?,
        Command::Twirl {
            kraus,
            order,
            design_size,
        } => (cmd_twirl(cfg, kraus, *order, *design_size)?, true),
        Command::Nogo { channels } => (cmd_nogo(cfg, *channels)?, true),
        Command::Choi { channel } => (
            match cfg.mode {
                Mode::Exact => cmd_choi::<Exact>(cfg, channel)?,
                Mode::Float => cmd_choi::<f64>(cfg, channel)?,
            },
            true,
        ),
    };
    Ok(RunOutput { text, all_passed })
}

/// Deliver a report to `--out` or stdout.
pub fn write_output(cfg: &RunConfig, output: &RunOutput) -> Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, output.text.as_bytes())
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{}", output.text);
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Headers and shared plumbing
// ---------------------------------------------------------------------------

/// The normalised command line for the header. Rebuilt from the config (not
/// from `argv`) so defaults are always spelled out; `--out` is omitted on
/// purpose — report bytes must not depend on where the report is written.
pub fn canonical_command_line(cfg: &RunConfig) -> String {
    let mut parts: Vec<String> = vec![TOOL_NAME.to_string()];
    match &cfg.command {
        Command::Classify { channel } => {
            parts.push("classify".into());
            parts.push(format!("--channel {}", compact(channel)));
        }
        Command::Rate { channel, order } => {
            parts.push("rate".into());
            parts.push(format!("--channel {}", compact(channel)));
            parts.push(format!("--order {order}"));
        }
        Command::Sweep {
            family,
            orders,
            grid,
        } => {
            parts.push("sweep".into());
            parts.push(format!("--family {}", family_name(*family)));
            parts.push(format!("--orders {}", compact(orders)));
            parts.push(format!("--grid {}", compact(grid)));
        }
        Command::FixedPoint { region } => {
            parts.push("fixed-point".into());
            if let Some(r) = region {
                parts.push(format!("--region {}", region_arg_name(*r)));
            }
        }
        Command::Verify { level } => {
            parts.push("verify".into());
            parts.push(format!(
                "--level {}",
                match level {
                    Level::Quick => "quick",
                    Level::Full => "full",
                }
            ));
        }
        Command::Twirl {
            kraus,
            order,
            design_size,
        } => {
            parts.push("twirl".into());
            parts.push(format!("--kraus {}", kraus.display()));
            parts.push(format!("--order {order}"));
            parts.push(format!("--design-size {design_size}"));
        }
        Command::Nogo { channels } => {
            parts.push("nogo".into());
            parts.push(format!("--channels {channels}"));
        }
        Command::Choi { channel } => {
            parts.push("choi".into());
            parts.push(format!("--channel {}", compact(channel)));
        }
    }
    parts.push(format!("--mode {}", cfg.mode.as_str()));
    parts.push(format!("--seed {}", cfg.seed));
    parts.join(" ")
}

fn compact(text: &str) -> String {
    text.chars().filter(|c| !c.is_whitespace()).collect()
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Depolarising => "depolarising",
    }
}

fn region_arg_name(r: RegionArg) -> &'static str {
    match r {
        RegionArg::Interior => "interior",
        RegionArg::SideFace => "side-face",
        RegionArg::BaseFace => "base-face",
        RegionArg::DepolarisingEndpoint => "depolarising-endpoint",
    }
}

fn meta_json(cfg: &RunConfig) -> Value {
    json!({
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "mode": cfg.mode.as_str(),
        "seed": cfg.seed,
        "command": canonical_command_line(cfg),
    })
}

fn meta_comment_block(cfg: &RunConfig) -> String {
    format!(
        "# tool: {} {}\n# mode: {}\n# seed: {}\n# command: {}\n",
        TOOL_NAME,
        TOOL_VERSION,
        cfg.mode.as_str(),
        cfg.seed,
        canonical_command_line(cfg)
    )
}

fn render_json(doc: &Value) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("report serialisation");
    text.push('\n');
    text
}

fn parse_channel<S: Scalar>(text: &str) -> Result<PauliVec4<S>> {
    PauliVec4::parse(text).map_err(|e| anyhow!("bad --channel {text:?}: {e}"))
}

/// Parse `--orders`: an inclusive `lo..hi` range or a comma list. The result
/// is sorted ascending and deduplicated so sweep rows come out in `(p, n)`
/// order no matter how the orders were spelled.
pub fn parse_orders(text: &str) -> Result<Vec<i64>> {
    let t = text.trim();
    let mut orders: Vec<i64> = if let Some((a, b)) = t.split_once("..") {
        let lo: i64 = a
            .trim()
            .parse()
            .map_err(|_| anyhow!("bad order range start in {text:?}"))?;
        let hi: i64 = b
            .trim()
            .parse()
            .map_err(|_| anyhow!("bad order range end in {text:?}"))?;
        if lo > hi {
            bail!("empty order range {text:?}");
        }
        (lo..=hi).collect()
    } else {
        t.split(',')
            .map(|s| {
                s.trim()
                    .parse::<i64>()
                    .map_err(|_| anyhow!("bad order {s:?} in {text:?}"))
            })
            .collect::<Result<Vec<i64>>>()?
    };
    if orders.is_empty() {
        bail!("no orders in {text:?}");
    }
    orders.sort_unstable();
    orders.dedup();
    Ok(orders)
}

/// Parse `--grid start:stop:steps` into the `steps + 1` evaluation points
/// `start + k (stop - start) / steps`. Requires `steps >= 1`.
pub fn parse_grid<S: Scalar>(text: &str) -> Result<Vec<S>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        bail!("grid must be start:stop:steps, got {text:?}");
    }
    let start = S::parse(parts[0]).map_err(|e| anyhow!("bad grid start in {text:?}: {e}"))?;
    let stop = S::parse(parts[1]).map_err(|e| anyhow!("bad grid stop in {text:?}: {e}"))?;
    let steps: u64 = parts[2]
        .trim()
        .parse()
        .map_err(|_| anyhow!("bad grid step count in {text:?}"))?;
    if steps < 1 {
        bail!("grid needs at least one step, got {text:?}");
    }
    if steps > 1_000_000 {
        bail!("grid step count {steps} is unreasonably large");
    }
    let h = (stop - start.clone()) / S::from_int(steps as i64);
    Ok((0..=steps)
        .map(|k| start.clone() + S::from_int(k as i64) * h.clone())
        .collect())
}

// ---------------------------------------------------------------------------
// classify / rate / sweep / fixed-point
// ---------------------------------------------------------------------------

fn axis_letter(a: u8) -> char {
    match a {
        1 => 'x',
        2 => 'y',
        3 => 'z',
        _ => unreachable!("axis indices are 1..=3"),
    }
}

fn region_name(r: Region) -> String {
    match r {
        Region::IdentityVertex => "identity-vertex".into(),
        Region::UnitaryVertex(a) => format!("unitary-vertex-{}", axis_letter(a)),
        Region::AxisEdge(a) => format!("axis-edge-{}", axis_letter(a)),
        Region::Edge(u, v) => format!("edge-{}{}", axis_letter(u), axis_letter(v)),
        Region::Face(w) => format!("face-no-{}", axis_letter(w)),
        Region::BaseFace => "base-face".into(),
        Region::Interior => "interior".into(),
    }
}

fn render_vec<S: Scalar>(v: &[S]) -> Vec<String> {
    v.iter().map(|x| x.render()).collect()
}

fn float_vec<S: Scalar>(v: &[S]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64()).collect()
}

fn cmd_classify<S: Scalar>(cfg: &RunConfig, channel: &str) -> Result<String> {
    let ch = parse_channel::<S>(channel)?;
    let class = classify(&ch);
    let lambdas = bloch_lambdas(&ch);
    let doc = json!({
        "meta": meta_json(cfg),
        "channel": {
            "weights": render_vec(ch.components()),
            "weights_float": float_vec(ch.components()),
        },
        "region": region_name(class.region),
        "kraus_rank": class.kraus_rank,
        "entanglement_breaking": class.entanglement_breaking,
        "bloch_lambdas": render_vec(lambdas.lambdas()),
        "bloch_lambdas_float": float_vec(lambdas.lambdas()),
    });
    Ok(render_json(&doc))
}

fn cmd_rate<S: Scalar>(cfg: &RunConfig, channel: &str, order: i64) -> Result<String> {
    let ch = parse_channel::<S>(channel)?;
    if order > MAX_CURVE_ORDER {
        bail!("--order must be at most {MAX_CURVE_ORDER}");
    }
    let rate = rate_at_order(&ch, order).map_err(|e| anyhow!("rate failed: {e}"))?;
    let doc = json!({
        "meta": meta_json(cfg),
        "channel": render_vec(ch.components()),
        "order": order,
        "rate": rate.render(),
        "rate_float": rate.to_f64(),
    });
    Ok(render_json(&doc))
}

/// Evaluate the sweep cells with one worker per available core; each worker
/// takes a contiguous block of grid points, so concatenating the block
/// results preserves the deterministic `(p, order)` row order.
fn sweep_cells<S: Scalar + Send + Sync>(
    ps: &[S],
    orders: &[i64],
) -> Result<Vec<RateCurvePoint<S>>, pauli_switch::Error> {
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(ps.len().max(1));
    let chunk = ps.len().div_ceil(workers);
    let blocks: Vec<Result<Vec<RateCurvePoint<S>>, pauli_switch::Error>> =
        std::thread::scope(|scope| {
            let handles: Vec<_> = ps
                .chunks(chunk)
                .map(|slice| scope.spawn(move || depolarising_rate_curve(slice, orders)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sweep worker panicked"))
                .collect()
        });
    let mut cells = Vec::with_capacity(ps.len() * orders.len());
    for block in blocks {
        cells.extend(block?);
    }
    Ok(cells)
}

fn cmd_sweep<S: Scalar + Send + Sync>(
    cfg: &RunConfig,
    family: Family,
    orders_text: &str,
    grid_text: &str,
) -> Result<String> {
    let Family::Depolarising = family;
    let orders = parse_orders(orders_text)?;
    let ps: Vec<S> = parse_grid(grid_text)?;
    let cells = sweep_cells(&ps, &orders).map_err(|e| anyhow!("sweep failed: {e}"))?;
    let mut text = meta_comment_block(cfg);
    text.push_str("p,order,rate_exact,rate_float\n");
    for cell in &cells {
        text.push_str(&format!(
            "{},{},{},{}\n",
            cell.p.render(),
            cell.order,
            cell.rate.render(),
            cell.rate.to_f64()
        ));
    }
    Ok(text)
}

fn fixed_point_json(region: FixedPointRegion) -> Value {
    let fp = fixed_point(region);
    let rate = fp.rate();
    match fp {
        FixedPoint::Interior {
            alpha,
            beta,
            gamma,
            p_limit,
            q_limit,
        } => json!({
            "region": "interior",
            "identity_mass": alpha,
            "zero_identity_mass": beta,
            "generic_mass": gamma,
            "generic_limit_direction": p_limit,
            "zero_identity_limit_direction": q_limit,
            "asymptotic_rate": rate,
        }),
        FixedPoint::SideFace {
            alpha,
            unitary,
            gamma,
            delta,
            p_limit,
            q_limit,
        } => json!({
            "region": "side-face",
            "identity_mass": alpha,
            "heralded_unitary_mass": unitary,
            "generic_mass": gamma,
            "zero_identity_mass": delta,
            "generic_limit_direction": p_limit,
            "zero_identity_limit_direction": q_limit,
            "asymptotic_rate": rate,
        }),
        FixedPoint::BaseFace {
            alpha,
            beta,
            p_limit,
        } => json!({
            "region": "base-face",
            "identity_mass": alpha,
            "zero_identity_mass": beta,
            "zero_identity_limit_direction": p_limit,
            "asymptotic_rate": rate,
        }),
        FixedPoint::DepolarisingEndpoint {
            alpha,
            beta,
            gamma,
            p_limit,
            q_limit,
        } => json!({
            "region": "depolarising-endpoint",
            "identity_mass": alpha,
            "zero_identity_mass": beta,
            "generic_mass": gamma,
            "generic_escape_direction": p_limit,
            "zero_identity_limit_direction": q_limit,
            "asymptotic_rate": rate,
        }),
    }
}

fn cmd_fixed_point(cfg: &RunConfig, region: Option<RegionArg>) -> Result<String> {
    let regions: Vec<FixedPointRegion> = match region {
        Some(r) => vec![r.to_region()],
        None => vec![
            FixedPointRegion::Interior,
            FixedPointRegion::SideFace,
            FixedPointRegion::BaseFace,
            FixedPointRegion::DepolarisingEndpoint,
        ],
    };
    let doc = json!({
        "meta": meta_json(cfg),
        "fixed_points": regions.into_iter().map(fixed_point_json).collect::<Vec<_>>(),
    });
    Ok(render_json(&doc))
}

// ---------------------------------------------------------------------------
// twirl / nogo / choi
// ---------------------------------------------------------------------------

fn cmd_twirl(cfg: &RunConfig, kraus_path: &PathBuf, order: i64, design_size: u64) -> Result<String> {
    if !(1..=31).contains(&order) {
        bail!("--order must be between 1 and 31 for the resource ledger");
    }
    if design_size < 1 {
        bail!("--design-size must be at least 1");
    }
    let raw = std::fs::read_to_string(kraus_path)
        .with_context(|| format!("cannot read {}", kraus_path.display()))?;
    let mats: Vec<[[[f64; 2]; 2]; 2]> = serde_json::from_str(&raw)
        .with_context(|| format!("bad Kraus JSON in {}", kraus_path.display()))?;
    if mats.is_empty() {
        bail!("Kraus file {} holds no operators", kraus_path.display());
    }
    let ops: Vec<Mat2> = mats
        .iter()
        .map(|m| {
            Mat2([
                C64::new(m[0][0][0], m[0][0][1]),
                C64::new(m[0][1][0], m[0][1][1]),
                C64::new(m[1][0][0], m[1][0][1]),
                C64::new(m[1][1][0], m[1][1][1]),
            ])
        })
        .collect();
    let eta = depolarising_parameter(&ops).map_err(|e| anyhow!("twirl failed: {e}"))?;
    let eta_alt = depolarising_parameter_square_trace(&ops)
        .map_err(|e| anyhow!("twirl failed: {e}"))?;
    let rate = twirled_rate::<f64>(eta, order).map_err(|e| anyhow!("twirled rate failed: {e}"))?;
    let (composed, inflated) = order_two_rate_variants(&eta);
    let cost = resource_cost(order as u32, design_size);
    let doc = json!({
        "meta": meta_json(cfg),
        "kraus_ops": ops.len(),
        "eta": eta,
        "eta_square_trace_variant": eta_alt,
        "rate": { "order": order, "value_float": rate },
        "order2_rate_variants": {
            "composed_3_eta4_over_64": composed,
            "inflated_3_eta4_over_4": inflated,
        },
        "resource_cost": {
            "order": cost.order,
            "design_size": cost.design_size,
            "state_copies": cost.state_copies.to_string(),
            "channel_copies": cost.channel_copies.to_string(),
            "superswitch_count": cost.superswitch_count.to_string(),
        },
    });
    Ok(render_json(&doc))
}

fn word_label(w: &SymplecticPauli) -> String {
    (0..w.m)
        .map(|i| match ((w.x >> i) & 1, (w.z >> i) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (1, 1) => 'Y',
            (0, 1) => 'Z',
            _ => unreachable!(),
        })
        .collect()
}

fn identity_weight(ch: &MultiPauliChannel<Exact>) -> Exact {
    ch.weights()
        .get(&(0, 0))
        .cloned()
        .unwrap_or_else(|| Exact::from_int(0))
}

/// True when the channel's whole support is the identity label, i.e. the
/// outcome it conditions would count toward the identity-outcome rate.
fn is_exactly_identity(ch: &MultiPauliChannel<Exact>) -> bool {
    let support: Vec<_> = ch.weights().iter().filter(|(_, w)| !w.is_zero()).collect();
    support.len() == 1 && *support[0].0 == (0, 0)
}

fn cmd_nogo(cfg: &RunConfig, channels: u32) -> Result<String> {
    // Witness 1: the anticommutator bracket of two commuting single-site
    // words survives with coefficient 2 on their product, so the '+'
    // branch of a two-qubit switch retains non-identity words.
    let a = SymplecticPauli::new(2, 0b01, 0);
    let b = SymplecticPauli::new(2, 0b10, 0);
    let surviving = bracket(&a, &b, true).map_err(|e| anyhow!("bracket failed: {e}"))?;
    let (coeff, word) = surviving.ok_or_else(|| anyhow!("bracket unexpectedly vanished"))?;
    let witness_ok = coeff == C64::new(2.0, 0.0) && word == SymplecticPauli::new(2, 0b11, 0);

    // Witness 2: random zero-identity two-qubit channels. One switch's '+'
    // outcome keeps identity weight strictly below 1 (on one qubit it is
    // exactly 1), and the order-2 record that purifies every one-qubit
    // channel ('--+') never conditions an exactly-identity channel, so it
    // contributes zero mass to the identity-outcome rate.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut max_plus_identity = Exact::from_int(0);
    let mut max_mmp_identity = Exact::from_int(0);
    let mut all_below_one = true;
    let mut all_mmp_impure = true;
    let mut all_rates_zero = true;
    for _ in 0..channels {
        let ch = sample::zero_identity_two_qubit(&mut rng);
        let (plus, minus) =
            switch_ensemble_multi(&ch, &ch).map_err(|e| anyhow!("switch failed: {e}"))?;
        let w_id = identity_weight(&plus.channel);
        if w_id >= Exact::from_int(1) {
            all_below_one = false;
        }
        if w_id > max_plus_identity {
            max_plus_identity = w_id;
        }
        if !minus.weight.is_zero() {
            let (root_plus, _) = switch_ensemble_multi(&minus.channel, &minus.channel)
                .map_err(|e| anyhow!("switch failed: {e}"))?;
            if !root_plus.weight.is_zero() {
                if is_exactly_identity(&root_plus.channel) {
                    all_mmp_impure = false;
                }
                let w = identity_weight(&root_plus.channel);
                if w > max_mmp_identity {
                    max_mmp_identity = w;
                }
            }
        }
        for order in 1..=2 {
            if !identity_outcome_rate_multi(&ch, order)
                .map_err(|e| anyhow!("rate failed: {e}"))?
                .is_zero()
            {
                all_rates_zero = false;
            }
        }
    }
    let doc = json!({
        "meta": meta_json(cfg),
        "bracket_witness": {
            "a": word_label(&a),
            "b": word_label(&b),
            "survives": true,
            "coefficient": [coeff.re, coeff.im],
            "word": word_label(&word),
            "matches_2_XX": witness_ok,
        },
        "channels": channels,
        "plus_identity_weight_max": {
            "exact": max_plus_identity.render(),
            "float": max_plus_identity.to_f64(),
        },
        "all_plus_identity_below_one": all_below_one,
        "record_mmp_identity_weight_max": {
            "exact": max_mmp_identity.render(),
            "float": max_mmp_identity.to_f64(),
        },
        "all_record_mmp_identity_outcome_mass_zero": all_mmp_impure,
        "all_identity_outcome_rates_zero_orders_1_2": all_rates_zero,
    });
    Ok(render_json(&doc))
}

fn bell_weights_json<S: Scalar>(weights: &[S; 4]) -> Value {
    let mut map = BTreeMap::new();
    for (label, w) in BELL_LABELS.iter().zip(weights.iter()) {
        map.insert(
            label.to_string(),
            json!({ "exact": w.render(), "float": w.to_f64() }),
        );
    }
    json!(map)
}

fn cmd_choi<S: Scalar>(cfg: &RunConfig, channel: &str) -> Result<String> {
    let ch = parse_channel::<S>(channel)?;
    let bell = channel_to_bell(&ch);
    let (max_idx, max_w) = bell.max_weight();
    let class = classify(&ch);
    let separable = is_separable(&bell);

    let (plus, minus) = state_level_switch(&ch);
    let (plus_p, minus_p) = state_level_switch_via_pairings(&ch);
    let ens = quantum_switch(&ch);
    let channel_level_match = {
        let tp = &ens.entries[0];
        let tm = &ens.entries[1];
        plus.prob.scalar_eq(&tp.prob)
            && minus.prob.scalar_eq(&tm.prob)
            && channel_to_bell(&tp.channel)
                .weights
                .iter()
                .zip(plus.state.weights.iter())
                .all(|(a, b)| a.scalar_eq(b))
            && (tm.placeholder
                || channel_to_bell(&tm.channel)
                    .weights
                    .iter()
                    .zip(minus.state.weights.iter())
                    .all(|(a, b)| a.scalar_eq(b)))
    };
    let pairing_match = plus_p.prob.scalar_eq(&plus.prob)
        && minus_p.prob.scalar_eq(&minus.prob)
        && plus_p
            .state
            .weights
            .iter()
            .zip(plus.state.weights.iter())
            .all(|(a, b)| a.scalar_eq(b));

    let doc = json!({
        "meta": meta_json(cfg),
        "channel": render_vec(ch.components()),
        "bell_weights": bell_weights_json(&bell.weights),
        "max_weight": {
            "label": BELL_LABELS[max_idx],
            "exact": max_w.render(),
            "float": max_w.to_f64(),
        },
        "separable": separable,
        "entanglement_breaking": class.entanglement_breaking,
        "eb_equals_separability": class.entanglement_breaking == separable,
        "switch": {
            "plus": {
                "prob": plus.prob.render(),
                "prob_float": plus.prob.to_f64(),
                "state": bell_weights_json(&plus.state.weights),
            },
            "minus": {
                "prob": minus.prob.render(),
                "prob_float": minus.prob.to_f64(),
                "state": bell_weights_json(&minus.state.weights),
                "placeholder": minus.placeholder,
            },
        },
        "state_vs_channel_level_match": channel_level_match,
        "interference_vs_pairing_match": pairing_match,
    });
    Ok(render_json(&doc))
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct SuiteOutcome {
    name: &'static str,
    passed: bool,
    cells: usize,
    detail: String,
}

fn outcome(
    name: &'static str,
    cells: usize,
    failures: Vec<String>,
    detail_ok: String,
) -> SuiteOutcome {
    if failures.is_empty() {
        SuiteOutcome {
            name,
            passed: true,
            cells,
            detail: detail_ok,
        }
    } else {
        let shown = failures.iter().take(3).cloned().collect::<Vec<_>>().join("; ");
        SuiteOutcome {
            name,
            passed: false,
            cells,
            detail: format!("{} failure(s): {shown}", failures.len()),
        }
    }
}

fn suite_order2_engines(full: bool, seed: u64) -> SuiteOutcome {
    let n = if full { 100 } else { 30 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA1);
    let mut fails = Vec::new();
    for i in 0..n {
        let ch = sample::rational_channel(&mut rng, 12);
        let tree = superswitch(&ch, 2).expect("order 2 is enumerable");
        let closed = order2_closed_form(&ch);
        if tree.entries.len() != 8 || closed.entries.len() != 8 {
            fails.push(format!("channel #{i}: wrong outcome count"));
            continue;
        }
        for (t, c) in tree.entries.iter().zip(closed.entries.iter()) {
            if t.outcome != c.outcome || t.prob != c.prob || t.channel != c.channel {
                fails.push(format!("channel #{i} outcome {}: symbolic mismatch", t.outcome));
            }
        }
        let dense = measure_ensemble(&superswitch_kraus(&ch.to_f64(), 2).expect("order 2"))
            .expect("dense measurement");
        for (m, s) in dense.entries.iter().zip(tree.entries.iter()) {
            if (m.prob - s.prob.to_f64()).abs() > 1e-10 {
                fails.push(format!("channel #{i} outcome {}: dense prob off", s.outcome));
            }
            if !s.placeholder && !m.placeholder {
                for k in 0..4 {
                    if (m.channel.p(k) - s.channel.p(k).to_f64()).abs() > 1e-10 {
                        fails.push(format!(
                            "channel #{i} outcome {}: dense weight {k} off",
                            s.outcome
                        ));
                    }
                }
            }
        }
    }
    outcome(
        "order2-three-engine-agreement",
        n,
        fails,
        format!("{n} random channels: symbolic tree == closed-form table exactly on all 8 outcomes; dense oracle within 1e-10"),
    )
}

fn suite_identity_outcome(full: bool, seed: u64) -> SuiteOutcome {
    let n = if full { 100 } else { 30 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA2);
    let mut fails = Vec::new();
    let four = Exact::from_int(4);
    for i in 0..n {
        let ch = sample::interior_channel(&mut rng, 24);
        let [_, p1, p2, p3] = ch.components().clone();
        let formula = four.clone()
            * (p1.clone() * p1.clone() * p2.clone() * p2.clone()
                + p2.clone() * p2.clone() * p3.clone() * p3.clone()
                + p3.clone() * p3.clone() * p1.clone() * p1.clone());
        let ens = superswitch(&ch, 2).expect("order 2");
        let entry = ens.get("--+").expect("record --+ exists at order 2");
        if entry.prob != formula {
            fails.push(format!("channel #{i}: record --+ probability differs"));
        }
        if entry.channel.exact_basis_index() != Some(0) {
            fails.push(format!("channel #{i}: record --+ channel is not the identity"));
        }
    }
    outcome(
        "identity-outcome-quartic",
        n,
        fails,
        format!("{n} interior channels: prob(--+) == 4(p1^2 p2^2 + p2^2 p3^2 + p3^2 p1^2) exactly, conditional channel exactly the identity"),
    )
}

fn suite_tree_vs_recurrence(full: bool, seed: u64) -> SuiteOutcome {
    let per_region = if full { 5 } else { 3 };
    let max_order = if full { 4 } else { 3 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA3);
    let mut fails = Vec::new();
    let mut cells = 0usize;
    let edges = [(1u8, 2u8), (2, 3), (1, 3)];
    for i in 0..per_region {
        let w = (i % 3 + 1) as u8;
        let (u, v) = edges[i % 3];
        let samples: Vec<(&str, PauliVec4<Exact>)> = vec![
            ("interior", sample::interior_channel(&mut rng, 10)),
            ("base-face", sample::region_channel(&mut rng, Region::BaseFace, 10)),
            ("side-face", sample::region_channel(&mut rng, Region::Face(w), 10)),
            ("edge", sample::region_channel(&mut rng, Region::Edge(u, v), 10)),
            ("axis-edge", sample::region_channel(&mut rng, Region::AxisEdge(w), 10)),
        ];
        for (label, ch) in samples {
            let tree_input = match classify(&ch).region {
                Region::AxisEdge(a) => conjugate_by_pauli(&ch, if a == 1 { 2 } else { 1 }),
                _ => ch.clone(),
            };
            for n in 0..=max_order {
                cells += 1;
                let from_recurrence = rate_at_order(&ch, n).expect("supported order");
                let from_tree =
                    distillation_rate(&superswitch(&tree_input, n).expect("supported order"));
                if from_recurrence != from_tree {
                    fails.push(format!("{label} sample #{i} order {n}: rate mismatch"));
                }
            }
        }
    }
    for n in 0..=max_order {
        cells += 4;
        for ch in [
            PauliVec4::<Exact>::identity(),
            PauliVec4::unitary(1),
            PauliVec4::unitary(2),
            PauliVec4::unitary(3),
        ] {
            if !rate_at_order(&ch, n).expect("supported order").is_zero() {
                fails.push(format!("vertex channel at order {n}: nonzero rate"));
            }
        }
    }
    outcome(
        "tree-vs-recurrence-rates",
        cells,
        fails,
        format!("{per_region} samples x 5 regions, orders 0..={max_order}: bucket recurrences equal the enumerated outcome-tree rates exactly; vertex channels pinned to rate 0"),
    )
}

fn thirty_three_points() -> Vec<Exact> {
    (0..=32).map(|k| Exact::ratio(k, 32)).collect()
}

fn suite_rate_polynomials() -> SuiteOutcome {
    let ps = thirty_three_points();
    let rows = compare_closed_forms(&[2, 3, 4, 5], &ps);
    let fails: Vec<String> = rows
        .iter()
        .filter(|r| !r.matches)
        .map(|r| format!("order {} at p = {}", r.order, r.p.render()))
        .collect();
    outcome(
        "closed-form-rate-polynomials",
        rows.len(),
        fails,
        "orders 2..=5 at 33 rational grid points: recurrence equals the tabulated closed forms exactly".into(),
    )
}

fn suite_fixed_points() -> SuiteOutcome {
    let mut fails = Vec::new();
    let runs = [
        (
            "depolarising p=1/2",
            PauliVec4::<f64>::depolarising(0.5).expect("valid"),
            fixed_point(FixedPointRegion::Interior).rate(),
        ),
        (
            "side-face sample",
            PauliVec4::<f64>::parse("0.3, 0.4, 0.3, 0").expect("valid"),
            fixed_point(FixedPointRegion::SideFace).rate(),
        ),
        (
            "base channel (0,1/3,1/3,1/3)",
            PauliVec4::<f64>::parse("0, 1/3, 1/3, 1/3").expect("valid"),
            fixed_point(FixedPointRegion::BaseFace).rate(),
        ),
    ];
    for (label, ch, expected) in &runs {
        let (rate, iters) = converged_rate(ch, StepMode::ExactBilinear);
        if (rate - expected).abs() >= 1e-9 {
            fails.push(format!("{label}: converged to {rate}, expected {expected}"));
        }
        if iters > MAX_FIXED_POINT_ITERS {
            fails.push(format!("{label}: did not settle within the iteration cap"));
        }
    }
    outcome(
        "fixed-point-convergence",
        runs.len(),
        fails,
        "interior, side-face, and base-face iterations land on the closed-form asymptotic rates within 1e-9".into(),
    )
}

fn suite_order2_monotonicity(full: bool, seed: u64) -> SuiteOutcome {
    let n = if full { 1000 } else { 200 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA6);
    let mut fails = Vec::new();
    for i in 0..n {
        let (noisier, cleaner) = sample::noisier_pair(&mut rng, 60);
        let r_noisy = rate_at_order(&noisier, 2).expect("order 2");
        let r_clean = rate_at_order(&cleaner, 2).expect("order 2");
        if r_noisy < r_clean {
            fails.push(format!("pair #{i}: noisier channel has smaller order-2 rate"));
        }
        if noisier != cleaner && r_noisy == r_clean {
            fails.push(format!("pair #{i}: strict domination gave equal rates"));
        }
    }
    outcome(
        "order2-noise-monotonicity",
        n,
        fails,
        format!("{n} componentwise-ordered channel pairs: order-2 rate respects the noise ordering, strictly when strict"),
    )
}

fn suite_depolarising_curves() -> SuiteOutcome {
    let mut fails = Vec::new();
    let mut cells = 0usize;
    for k in 1..=50i64 {
        let p = Exact::ratio(k, 50);
        let ch = PauliVec4::depolarising(p.clone()).expect("valid");
        let rates: Vec<Exact> = (1..=8)
            .map(|n| rate_at_order(&ch, n).expect("supported order"))
            .collect();
        cells += 8;
        if !rates[0].is_zero() {
            fails.push(format!("p = {}: order-1 rate nonzero", p.render()));
        }
        if rates[1] <= Exact::from_int(0) {
            fails.push(format!("p = {}: order-2 rate not positive", p.render()));
        }
        for w in rates[1..].windows(2) {
            if w[1] <= w[0] {
                fails.push(format!("p = {}: rates not strictly increasing", p.render()));
            }
        }
    }
    let endpoint = PauliVec4::depolarising(Exact::ratio(4, 3)).expect("valid");
    let rates: Vec<Exact> = (1..=8)
        .map(|n| rate_at_order(&endpoint, n).expect("supported order"))
        .collect();
    cells += 8;
    if rates[0] != Exact::ratio(1, 3) {
        fails.push("p = 4/3: order-1 rate is not 1/3".into());
    }
    if rates[1] != Exact::ratio(7, 27) {
        fails.push("p = 4/3: order-2 rate is not 7/27".into());
    }
    let quarter = Exact::ratio(1, 4);
    for w in rates.windows(2) {
        if w[1] >= w[0] {
            fails.push("p = 4/3: rates not strictly decreasing".into());
        }
    }
    for r in &rates {
        if *r <= quarter {
            fails.push("p = 4/3: a rate fell to or below the limit 1/4".into());
        }
    }
    outcome(
        "depolarising-order-curves",
        cells,
        fails,
        "50-point grid on (0,1]: order-1 rate 0 and orders 2..=8 strictly increasing; at p = 4/3 the rates descend strictly toward 1/4 from 1/3, 7/27, ...".into(),
    )
}

fn suite_multiqubit_witness(full: bool, seed: u64) -> SuiteOutcome {
    let n = if full { 200 } else { 50 };
    let mut fails = Vec::new();
    let a = SymplecticPauli::new(2, 0b01, 0);
    let b = SymplecticPauli::new(2, 0b10, 0);
    match bracket(&a, &b, true) {
        Ok(Some((coeff, word)))
            if coeff == C64::new(2.0, 0.0) && word == SymplecticPauli::new(2, 0b11, 0) => {}
        _ => fails.push("anticommutator bracket of XI and IX is not (2, XX)".into()),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA8);
    for i in 0..n {
        let ch = sample::zero_identity_two_qubit(&mut rng);
        let (plus, minus) = switch_ensemble_multi(&ch, &ch).expect("same qubit count");
        if identity_weight(&plus.channel) >= Exact::from_int(1) {
            fails.push(format!("channel #{i}: '+' branch collapsed to the identity"));
        }
        if !minus.weight.is_zero() {
            let (root_plus, _) =
                switch_ensemble_multi(&minus.channel, &minus.channel).expect("same qubit count");
            if !root_plus.weight.is_zero() && is_exactly_identity(&root_plus.channel) {
                fails.push(format!(
                    "channel #{i}: record --+ conditions an exactly-identity channel"
                ));
            }
        }
        if !identity_outcome_rate_multi(&ch, 2).expect("order 2").is_zero() {
            fails.push(format!("channel #{i}: nonzero identity-outcome rate at order 2"));
        }
    }
    outcome(
        "multiqubit-witness",
        n + 1,
        fails,
        format!("bracket witness (2, XX) exact; {n} zero-identity two-qubit channels: '+' identity weight stays below 1 and no outcome through order 2 is exactly the identity"),
    )
}

fn suite_state_channel_bridge(full: bool, seed: u64) -> SuiteOutcome {
    let n = if full { 100 } else { 30 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA9);
    let mut fails = Vec::new();
    for i in 0..n {
        let ch = sample::rational_channel(&mut rng, 16);
        let (plus, minus) = state_level_switch(&ch);
        let ens = quantum_switch(&ch);
        let tp = &ens.entries[0];
        let tm = &ens.entries[1];
        if plus.prob != tp.prob || minus.prob != tm.prob {
            fails.push(format!("channel #{i}: branch probabilities differ"));
        }
        if channel_to_bell(&tp.channel).weights != plus.state.weights {
            fails.push(format!("channel #{i}: '+' states differ"));
        }
        if !tm.placeholder && channel_to_bell(&tm.channel).weights != minus.state.weights {
            fails.push(format!("channel #{i}: '-' states differ"));
        }
        let (pp, pm) = state_level_switch_via_pairings(&ch);
        if pp.prob != plus.prob
            || pm.prob != minus.prob
            || pp.state.weights != plus.state.weights
            || pm.state.weights != minus.state.weights
        {
            fails.push(format!("channel #{i}: interference terms differ from pairing algebra"));
        }
        let bell = channel_to_bell(&ch);
        if classify(&ch).entanglement_breaking != is_separable(&bell) {
            fails.push(format!("channel #{i}: EB flag differs from Bell separability"));
        }
    }
    outcome(
        "state-channel-bridge",
        n,
        fails,
        format!("{n} random channels: state-level switch equals channel-level switch exactly; entanglement breaking equals Bell-diagonal separability"),
    )
}

fn suite_twirl_convention(full: bool, seed: u64) -> SuiteOutcome {
    let n = if full { 50 } else { 10 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xAA);
    let mut fails = Vec::new();
    for i in 0..n {
        let ops = random_cptp_kraus(&mut rng, 3);
        let from_traces = depolarising_parameter(&ops).expect("CPTP by construction");
        // `clifford_twirl` itself asserts the group average is exactly
        // depolarising (Bell-diagonal, equal X/Y/Z weights within 1e-10).
        let from_average = clifford_twirl(&ops).expect("CPTP by construction");
        if (from_traces - from_average).abs() > 1e-10 {
            fails.push(format!("channel #{i}: trace formula disagrees with the group average"));
        }
    }
    for (k, denom) in [(3i64, 10i64), (7, 10), (1, 2)] {
        let ch = PauliVec4::<Exact>::depolarising(Exact::ratio(k, denom)).expect("valid");
        let ops = pauli_kraus(&ch);
        let eta = depolarising_parameter(&ops).expect("CPTP");
        let expected = 4.0 / 3.0 * (1.0 - ch.p(0).to_f64());
        if (eta - expected).abs() > 1e-12 {
            fails.push(format!("Pauli reduction failed at parameter {k}/{denom}"));
        }
    }
    let cost = resource_cost(1, 10);
    if cost.state_copies.to_string() != "100"
        || cost.channel_copies.to_string() != "200"
        || cost.superswitch_count.to_string() != "100"
    {
        fails.push("resource_cost(1, 10) != (100, 200, 100)".into());
    }
    let cost = resource_cost(2, 3);
    if cost.state_copies.to_string() != "81" || cost.channel_copies.to_string() != "324" {
        fails.push("resource_cost(2, 3) != (81, 324, 81)".into());
    }
    outcome(
        "twirl-convention",
        n + 5,
        fails,
        format!("{n} random CPTP channels: Kraus-trace depolarising parameter equals the Clifford-24 dense average within 1e-10; Pauli reduction and resource ledger pinned"),
    )
}

/// The formula-variant comparisons: places where two inconsistent forms of
/// the same quantity are in circulation. Each entry records both variants,
/// the adopted one, and a computed piece of evidence. These are report
/// items, never hard failures.
fn errata_entries() -> Vec<Value> {
    let mut entries = Vec::new();

    // 1. Ordering of the '-' branch components.
    {
        let ch = PauliVec4::<f64>::parse("0.4, 0.3, 0.2, 0.1").expect("valid");
        let dense = measure_ensemble(&switch_kraus(&ch, &ch)).expect("dense switch");
        let minus = &dense.entries[1];
        let pm = pair_minus_unnorm(ch.components(), ch.components());
        let total: f64 = pm.iter().sum();
        let adopted: Vec<f64> = pm.iter().map(|x| x / total).collect();
        let shifted = [pm[0], pm[2] / total, pm[3] / total, pm[1] / total];
        let adopted_err = (0..4)
            .map(|k| (minus.channel.p(k) - adopted[k]).abs())
            .fold(0.0f64, f64::max);
        let shifted_err = (0..4)
            .map(|k| (minus.channel.p(k) - shifted[k]).abs())
            .fold(0.0f64, f64::max);
        entries.push(json!({
            "id": "minus-branch-component-order",
            "quantity": "component order of the '-' switch branch",
            "stated": "the three anticommutator binomials cyclically shifted one slot",
            "adopted": "X from p2q3+p3q2, Y from p3q1+p1q3, Z from p1q2+p2q1",
            "verdict": "mismatch-resolved",
            "evidence": format!(
                "dense oracle on (0.4,0.3,0.2,0.1): adopted order deviates {:.1e}, shifted order deviates {:.3}",
                adopted_err, shifted_err
            ),
        }));
    }

    // 2. A worked conjugation example.
    {
        let ch = PauliVec4::<Exact>::parse("0, 0, 1/2, 1/2").expect("valid");
        let image = conjugate_by_pauli(&ch, 1);
        entries.push(json!({
            "id": "conjugation-worked-example",
            "quantity": "image of (0, 0, 1/2, 1/2) under conjugation by the X axis",
            "stated": "(1/2, 1/2, 0, 0), which is the Y-axis permutation",
            "adopted": format!("({}, {}, {}, {}) from the frozen dense-oracle table: swap identity<->X and Y<->Z",
                image.p(0).render(), image.p(1).render(), image.p(2).render(), image.p(3).render()),
            "verdict": "mismatch-resolved",
            "evidence": "explicit 2x2 matrix conjugation of each Kraus term fixes the permutation; the channel is invariant under the X-axis swap",
        }));
    }

    // 3. The side-face asymptotic rate constant.
    {
        let ch = PauliVec4::<f64>::parse("0.3, 0.4, 0.3, 0").expect("valid");
        let (rate, iters) = converged_rate(&ch, StepMode::ExactBilinear);
        let adopted = (3.0 - std::f64::consts::SQRT_2) / 4.0;
        let stated = (3.0 - 3.0f64.sqrt()) / 4.0;
        entries.push(json!({
            "id": "side-face-asymptotic-rate",
            "quantity": "asymptotic side-face distillation rate",
            "stated": format!("(3 - sqrt(3))/4 = {stated:.10}"),
            "adopted": format!("(3 - sqrt(2))/4 = {adopted:.10}"),
            "verdict": "mismatch-resolved",
            "evidence": format!(
                "iterating the face recurrence from (0.3, 0.4, 0.3, 0) converges to {rate:.12} in {iters} steps; |rate - adopted| = {:.1e}, |rate - stated| = {:.2}",
                (rate - adopted).abs(), (rate - stated).abs()
            ),
        }));
    }

    // 4. The missing cross term in the side-face unitary-bucket update.
    {
        let s2 = std::f64::consts::SQRT_2;
        let gamma = 0.25;
        let p_limit = [s2 - 1.0, 1.0 - 1.0 / s2, 1.0 - 1.0 / s2, 0.0];
        let delta = 1.0 / (2.0 * s2);
        let st = FaceBucketState::<f64> {
            face_axis: 3,
            a: (2.0 - s2) / 4.0,
            bu: 0.25,
            c: [
                gamma * p_limit[0],
                gamma * p_limit[1],
                gamma * p_limit[2],
                0.0,
            ],
            d: [delta * 0.5, delta * 0.5, 0.0],
            order: 0,
        };
        let stepped = face_step(&st).expect("valid face state").normalised();
        let dropped_term = 2.0 * st.bu * st.c[0];
        entries.push(json!({
            "id": "side-face-unitary-update",
            "quantity": "heralded-unitary bucket update of the on-face recurrence",
            "stated": "update without the cross term 2 * unitary_mass * identity_component_of_generic_bucket",
            "adopted": "full bilinear routing including that cross term",
            "verdict": "mismatch-resolved",
            "evidence": format!(
                "at the side-face fixed point the full step keeps the unitary mass at {:.12}; dropping the cross term (value {:.6}) would send 0.25 to {:.6} = (3 - sqrt(2))/8, so the stated update does not even fix its own fixed point; it also breaks quadratic mass conservation by the same amount",
                stepped.bu, dropped_term, 0.25 - dropped_term
            ),
        }));
    }

    // 5. A stray factor 2 in the base-face direction numerator.
    {
        let ch = PauliVec4::<Exact>::parse("0, 1/3, 1/3, 1/3").expect("valid");
        let r2 = rate_at_order(&ch, 2).expect("order 2");
        entries.push(json!({
            "id": "base-face-direction-factor",
            "quantity": "unnormalised direction numerator of the zero-identity recurrence",
            "stated": "carries an extra factor 2",
            "adopted": "either reading - the factor cancels against the normalisation",
            "verdict": "benign-variant",
            "evidence": format!(
                "both readings normalise to the same step; the worked uniform-channel value is reproduced: rate at order 2 = {} = 7/27",
                r2.render()
            ),
        }));
    }

    // 6. The twirl trace convention.
    {
        let id_eta = depolarising_parameter(&[Mat2::id()]).expect("identity is CPTP");
        let id_eta_variant =
            depolarising_parameter_square_trace(&[Mat2::id()]).expect("identity is CPTP");
        entries.push(json!({
            "id": "twirl-trace-convention",
            "quantity": "depolarising parameter from Kraus traces",
            "stated": "uses |tr(K_i^2)|",
            "adopted": "uses |tr K_i|^2, i.e. eta = (4 - sum_i |tr K_i|^2) / 3",
            "verdict": "mismatch-resolved",
            "evidence": format!(
                "the identity channel must give eta = 0: adopted formula gives {id_eta}, stated variant gives {id_eta_variant:.6} = 2/3; the adopted formula also matches the dense Clifford-24 average on random CPTP channels within 1e-10"
            ),
        }));
    }

    // 7. The order-2 twirled-rate coefficient.
    {
        let eta = Exact::ratio(1, 2);
        let (composed, inflated) = order_two_rate_variants(&eta);
        let direct = twirled_rate(eta, 2).expect("valid parameter");
        entries.push(json!({
            "id": "order2-twirled-rate-coefficient",
            "quantity": "order-2 rate of a twirled channel as a function of eta",
            "stated": "3 eta^4 / 4",
            "adopted": "3 eta^4 / 64",
            "verdict": "mismatch-resolved",
            "evidence": format!(
                "at eta = 1/2 the recurrence gives {}, the adopted form gives {}, the stated form gives {} (16x too large)",
                direct.render(), composed.render(), inflated.render()
            ),
        }));
    }

    // 8. Squares in the order-2 interior rate.
    {
        let ch = PauliVec4::<Exact>::parse("2/5, 3/10, 1/5, 1/10").expect("valid");
        let ens = superswitch(&ch, 2).expect("order 2");
        let tree = ens.get("--+").expect("record exists").prob.clone();
        let [_, p1, p2, p3] = ch.components().clone();
        let four = Exact::from_int(4);
        let squared = four.clone()
            * (p1.clone() * p1.clone() * p2.clone() * p2.clone()
                + p2.clone() * p2.clone() * p3.clone() * p3.clone()
                + p3.clone() * p3.clone() * p1.clone() * p1.clone());
        let squareless =
            four * (p1.clone() * p2.clone() + p2 * p3.clone() + p3 * p1);
        entries.push(json!({
            "id": "order2-identity-outcome-squares",
            "quantity": "closed form of the order-2 identity-outcome probability",
            "stated": "4 (p1 p2 + p2 p3 + p3 p1)",
            "adopted": "4 (p1^2 p2^2 + p2^2 p3^2 + p3^2 p1^2)",
            "verdict": "mismatch-resolved",
            "evidence": format!(
                "on (2/5, 3/10, 1/5, 1/10) the outcome tree gives {}, the adopted form {}, the stated form {}",
                tree.render(), squared.render(), squareless.render()
            ),
        }));
    }

    // 9. The outcome-record serialisation order.
    {
        let ch = PauliVec4::<Exact>::parse("1/2, 1/4, 1/8, 1/8").expect("valid");
        let ens = superswitch(&ch, 3).expect("order 3");
        let len = 7;
        let mut checked = 0;
        let mut pure = true;
        for e in &ens.entries {
            if e.outcome.is_minus(len - 3) && e.outcome.is_minus(len - 2) && !e.outcome.is_minus(len - 1)
                && !e.placeholder
            {
                checked += 1;
                if e.channel.exact_basis_index() != Some(0) {
                    pure = false;
                }
            }
        }
        entries.push(json!({
            "id": "outcome-record-order",
            "quantity": "serialisation order of nested-switch outcome records",
            "stated": "plain depth-first concatenation of the two sub-records plus the root sign",
            "adopted": "level order: ancilla signs grouped by nesting depth, innermost first, left block before right, root last",
            "verdict": "mismatch-resolved",
            "evidence": format!(
                "under level order every order-3 record ending '--+' has an exactly-identity channel ({checked} records checked, all pure: {pure}); under depth-first reading the record '++++--+' is a counterexample with a mixed channel"
            ),
        }));
    }

    // 10. The long order-4 and order-5 rate polynomials.
    {
        let ps = thirty_three_points();
        let rows = compare_closed_forms(&[4, 5], &ps);
        let all = rows.iter().all(|r| r.matches);
        entries.push(json!({
            "id": "order4-order5-rate-polynomials",
            "quantity": "long tabulated coefficient lists for the order-4 and order-5 depolarising rates",
            "stated": "13- and 29-term coefficient tables",
            "adopted": "the same tables - transcription verified",
            "verdict": "verified-exact",
            "evidence": format!(
                "recurrence equals both tables exactly at 33 rational grid points ({} cells, all matched: {all})",
                rows.len()
            ),
        }));
    }

    entries
}

fn cmd_verify(cfg: &RunConfig, level: Level) -> Result<(String, bool)> {
    let full = level == Level::Full;
    let seed = cfg.seed;
    let suites = vec![
        suite_order2_engines(full, seed),
        suite_identity_outcome(full, seed),
        suite_tree_vs_recurrence(full, seed),
        suite_rate_polynomials(),
        suite_fixed_points(),
        suite_order2_monotonicity(full, seed),
        suite_depolarising_curves(),
        suite_multiqubit_witness(full, seed),
        suite_state_channel_bridge(full, seed),
        suite_twirl_convention(full, seed),
    ];
    let passed = suites.iter().filter(|s| s.passed).count();
    let all_passed = passed == suites.len();
    let mut doc = json!({
        "meta": meta_json(cfg),
        "level": match level { Level::Quick => "quick", Level::Full => "full" },
        "suites": suites.iter().map(|s| json!({
            "name": s.name,
            "passed": s.passed,
            "cells": s.cells,
            "detail": s.detail,
        })).collect::<Vec<_>>(),
        "suites_passed": passed,
        "suites_total": suites.len(),
        "all_passed": all_passed,
    });
    if full {
        doc.as_object_mut()
            .expect("report is an object")
            .insert("errata".into(), Value::Array(errata_entries()));
    }
    Ok((render_json(&doc), all_passed))
}
