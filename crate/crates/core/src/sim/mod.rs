//! Monte Carlo BER/SER engine.
//!
//! Every trial draws its bits, channel and noise from its own ChaCha stream
//! keyed by `(seed, trial_index)`. Trials run in fixed-size batches and the
//! stopping rule is only evaluated between batches, so the result of a
//! sweep does not depend on how many worker threads execute it. The same
//! trial index is reused at every grid point, which pairs the random draws
//! across SNRs, imbalance levels and decoders.

mod config;
mod report;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{add_noise, draw_channel, snr_to_sigma2, ImbalanceProfile, NoiseModel};
use crate::codes::{
    alamouti_effective_channel, alamouti_encode, conjugate_second_slot, effective_channel, flatten_slots,
    golden_effective_channel, golden_encode, proposed_encode, propagate, subchannel, CodeKind, GoldenGenerator,
    Normalization, BASELINE_ANTENNAS,
};
use crate::constellation::{Constellation, ConstellationKind};
use crate::decode::{alamouti_combine, alamouti_ml_decode, decode, DecoderInput, DecoderKind};
use crate::error::{Error, Result};
use crate::linalg::CVec;

pub use config::{SimConfig, DEFAULT_MAX_TRIALS, DEFAULT_MIN_BIT_ERRORS};
pub use report::{emit_csv, format_sig10, read_csv, write_csv_file, CSV_HEADER};

/// Trials per batch between stopping-rule checks.
pub const TRIAL_BATCH: u64 = 2048;

/// Consecutive singular channel draws tolerated within one trial.
pub const MAX_REDRAWS: u64 = 32;

/// Random stream of one trial.
pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    rng
}

/// Aggregated result of one `(snr, imbalance)` grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct BerPoint {
    pub code: CodeKind,
    pub decoder: DecoderKind,
    pub constellation: ConstellationKind,
    pub snr_db: f64,
    pub imbalance_db: f64,
    pub trials: u64,
    pub bit_errors: u64,
    pub symbol_errors: u64,
    pub codeword_errors: u64,
    pub redraws: u64,
    pub ber: f64,
    pub ser: f64,
}

impl BerPoint {
    #[allow(clippy::too_many_arguments)]
    fn from_tally(
        code: CodeKind,
        decoder: DecoderKind,
        constellation: ConstellationKind,
        snr_db: f64,
        imbalance_db: f64,
        tally: &Tally,
    ) -> Self {
        let symbols = code.symbols_per_codeword() as u64;
        let bits = symbols * constellation.order().trailing_zeros() as u64;
        let ratio = |errors: u64, per_trial: u64| {
            if tally.trials == 0 {
                0.0
            } else {
                errors as f64 / (tally.trials * per_trial) as f64
            }
        };
        BerPoint {
            code,
            decoder,
            constellation,
            snr_db,
            imbalance_db,
            trials: tally.trials,
            bit_errors: tally.bit_errors,
            symbol_errors: tally.symbol_errors,
            codeword_errors: tally.codeword_errors,
            redraws: tally.redraws,
            ber: ratio(tally.bit_errors, bits),
            ser: ratio(tally.symbol_errors, symbols),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrialOutcome {
    pub bit_errors: u64,
    pub symbol_errors: u64,
    pub codeword_error: bool,
    pub redraws: u64,
    pub metric_evals: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub trials: u64,
    pub bit_errors: u64,
    pub symbol_errors: u64,
    pub codeword_errors: u64,
    pub redraws: u64,
    pub metric_evals: u64,
}

impl Tally {
    fn of(outcome: &TrialOutcome) -> Self {
        Tally {
            trials: 1,
            bit_errors: outcome.bit_errors,
            symbol_errors: outcome.symbol_errors,
            codeword_errors: outcome.codeword_error as u64,
            redraws: outcome.redraws,
            metric_evals: outcome.metric_evals,
        }
    }

    fn merge(self, other: Self) -> Self {
        Tally {
            trials: self.trials + other.trials,
            bit_errors: self.bit_errors + other.bit_errors,
            symbol_errors: self.symbol_errors + other.symbol_errors,
            codeword_errors: self.codeword_errors + other.codeword_errors,
            redraws: self.redraws + other.redraws,
            metric_evals: self.metric_evals + other.metric_evals,
        }
    }
}

/// Everything a trial needs at one grid point.
#[derive(Clone, Debug)]
pub struct TrialContext {
    pub code: CodeKind,
    pub decoder: DecoderKind,
    pub constellation: Constellation,
    pub generator: GoldenGenerator,
    pub profile: ImbalanceProfile,
    pub noise: NoiseModel,
    pub seed: u64,
}

impl TrialContext {
    pub fn new(cfg: &SimConfig, snr_db: f64, imbalance_db: f64) -> Result<Self> {
        Self::with_noise(cfg, NoiseModel::new(snr_to_sigma2(snr_db, cfg.code))?, imbalance_db)
    }

    pub fn with_noise(cfg: &SimConfig, noise: NoiseModel, imbalance_db: f64) -> Result<Self> {
        cfg.validate()?;
        Ok(TrialContext {
            code: cfg.code,
            decoder: cfg.decoder,
            constellation: cfg.constellation.build(),
            generator: GoldenGenerator::new(),
            profile: ImbalanceProfile::new(imbalance_db),
            noise,
            seed: cfg.seed,
        })
    }
}

struct Decision {
    indices: [usize; 4],
    metric_evals: u64,
}

/// Sends one codeword through a fresh channel and decodes it. Returns
/// `Ok(None)` when the channel draw is singular for the chosen decoder.
fn transmit_and_decode(ctx: &TrialContext, rng: &mut ChaCha8Rng, tx: &[usize; 4]) -> Result<Option<Decision>> {
    let c = &ctx.constellation;
    let h = draw_channel(rng, &ctx.profile).h;
    let outcome = match ctx.code {
        CodeKind::Proposed => {
            let s = CVec(tx.map(|k| c.point(k)));
            let cw = proposed_encode(&s, Normalization::Normalized).entries;
            let y = add_noise(&flatten_slots(&propagate(&h, &cw)), &ctx.noise, rng);
            let input = DecoderInput::from_effective(
                conjugate_second_slot(&y),
                &effective_channel(&h),
                &ctx.generator,
                c,
                ctx.code.tx_scale(),
            );
            decode(ctx.decoder, &input).map(|r| Decision {
                indices: r.indices,
                metric_evals: r.metric_evals,
            })
        }
        CodeKind::Golden2x2 => {
            let s = CVec(tx.map(|k| c.point(k)));
            let cw = golden_encode(&s).entries;
            let sub = subchannel(&h, BASELINE_ANTENNAS);
            let y = add_noise(&flatten_slots(&propagate(&sub, &cw)), &ctx.noise, rng);
            let input = DecoderInput::from_effective(
                y,
                &golden_effective_channel(&h, BASELINE_ANTENNAS),
                &ctx.generator,
                c,
                ctx.code.tx_scale(),
            );
            decode(ctx.decoder, &input).map(|r| Decision {
                indices: r.indices,
                metric_evals: r.metric_evals,
            })
        }
        CodeKind::Alamouti => {
            let s = CVec([c.point(tx[0]), c.point(tx[1])]);
            let cw = alamouti_encode(&s).entries;
            let sub = subchannel(&h, BASELINE_ANTENNAS);
            let y = add_noise(&flatten_slots(&propagate(&sub, &cw)), &ctx.noise, rng);
            let y = conjugate_second_slot(&y);
            let a = alamouti_effective_channel(&h, BASELINE_ANTENNAS);
            let tx_scale = ctx.code.tx_scale();
            let result = match ctx.decoder {
                DecoderKind::Ml => Ok(alamouti_ml_decode(&y, &a, c, tx_scale)),
                DecoderKind::Zf => alamouti_combine(&y, &a, c, tx_scale),
                DecoderKind::CondMl => {
                    return Err(Error::Config("cond-ml is not defined for alamouti".into()));
                }
            };
            result.map(|r| Decision {
                indices: [r.indices[0], r.indices[1], 0, 0],
                metric_evals: r.metric_evals,
            })
        }
    };
    match outcome {
        Ok(d) => Ok(Some(d)),
        Err(Error::SingularMatrix { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Runs trial `trial_index` at the grid point described by `ctx`.
///
/// Bits, channel and noise are drawn in that order from the trial's own
/// stream. A singular channel is redrawn (new channel and noise) from the
/// same stream and counted.
pub fn run_trial(ctx: &TrialContext, trial_index: u64) -> Result<TrialOutcome> {
    let c = &ctx.constellation;
    let q = ctx.code.symbols_per_codeword();
    let bps = c.bits_per_symbol();
    let mut rng = trial_rng(ctx.seed, trial_index);

    let word: u64 = rng.random();
    let mask = (1u64 << bps) - 1;
    let mut labels = [0u32; 4];
    let mut tx = [0usize; 4];
    for k in 0..q {
        labels[k] = ((word >> (k * bps)) & mask) as u32;
        tx[k] = c.index_of_label(labels[k]);
    }

    let mut redraws = 0;
    let decision = loop {
        if let Some(d) = transmit_and_decode(ctx, &mut rng, &tx)? {
            break d;
        }
        redraws += 1;
        if redraws > MAX_REDRAWS {
            return Err(Error::SingularMatrix {
                magnitude: 0.0,
                threshold: 0.0,
            });
        }
    };

    let mut outcome = TrialOutcome {
        redraws,
        metric_evals: decision.metric_evals,
        ..TrialOutcome::default()
    };
    for k in 0..q {
        let diff = labels[k] ^ c.label(decision.indices[k]);
        outcome.bit_errors += diff.count_ones() as u64;
        outcome.symbol_errors += (diff != 0) as u64;
    }
    outcome.codeword_error = outcome.symbol_errors > 0;
    Ok(outcome)
}

/// Runs trials `0..` at one grid point until `min_bit_errors` or
/// `max_trials` is reached, on the current rayon pool.
pub fn run_point(ctx: &TrialContext, max_trials: u64, min_bit_errors: u64) -> Result<Tally> {
    let mut tally = Tally::default();
    while tally.trials < max_trials && tally.bit_errors < min_bit_errors {
        let start = tally.trials;
        let end = (start + TRIAL_BATCH).min(max_trials);
        let batch = (start..end)
            .into_par_iter()
            .map(|t| run_trial(ctx, t).map(|o| Tally::of(&o)))
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
        tally = tally.merge(batch);
    }
    Ok(tally)
}

/// Sweeps every `(imbalance, snr)` pair of `cfg` using `cfg.workers`
/// threads. Points come back imbalance-major, in config order.
pub fn run_sweep(cfg: &SimConfig) -> Result<Vec<BerPoint>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", cfg.workers)))?;
    let mut points = Vec::with_capacity(cfg.snr_db.len() * cfg.imbalance_db.len());
    for &imbalance_db in &cfg.imbalance_db {
        for &snr_db in &cfg.snr_db {
            let ctx = TrialContext::new(cfg, snr_db, imbalance_db)?;
            let tally = pool.install(|| run_point(&ctx, cfg.max_trials, cfg.min_bit_errors))?;
            points.push(BerPoint::from_tally(
                cfg.code,
                cfg.decoder,
                cfg.constellation,
                snr_db,
                imbalance_db,
                &tally,
            ));
        }
    }
    Ok(points)
}
