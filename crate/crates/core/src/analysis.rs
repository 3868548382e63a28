//! Algebraic property checks for the distributed code and curve analysis of
//! simulated BER points.
//!
//! For two symbol vectors `s != ŝ` the difference `D = C(s) - C(ŝ)` of raw
//! codewords keeps the Alamouti column structure, so `D^H D` is a multiple
//! of the identity. Its two eigenvalues both equal `|d|^2 = |G (s - ŝ)|^2 =
//! |s - ŝ|^2`, where `d` is the first column of `D`. The pair scans below
//! verify rank, eigenvalue equality and that norm identity on every pair.

use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codes::{generator_matrix, golden_stack, proposed_encode, CodeKind, Normalization, RX_ANTENNAS};
use crate::constellation::{make_qam, Constellation};
use crate::decode::{conditional_ml_decode, ml_decode_with_budget, zf_decode, DecoderInput, DecoderKind};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian2, rank_numeric, CMat, CVec};
use crate::sim::BerPoint;

/// Pair count accepted by an exhaustive scan by default.
pub const DEFAULT_EXHAUSTIVE_PAIRS: u64 = 1 << 24;
pub const DEFAULT_SAMPLED_PAIRS: u64 = 100_000;
pub const DEFAULT_SAMPLE_SEED: u64 = 0x005e_ed0f_c0de;
/// Slope fits need this many bit errors at every point.
pub const MIN_SLOPE_BIT_ERRORS: u64 = 100;

/// How codeword pairs get enumerated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairScan {
    Exhaustive { max_pairs: u64 },
    Sampled { pairs: u64, seed: u64 },
}

impl PairScan {
    /// Exhaustive for QPSK, seeded sampling for larger alphabets.
    pub fn default_for(c: &Constellation) -> Self {
        if c.order() <= 4 {
            PairScan::Exhaustive {
                max_pairs: DEFAULT_EXHAUSTIVE_PAIRS,
            }
        } else {
            PairScan::Sampled {
                pairs: DEFAULT_SAMPLED_PAIRS,
                seed: DEFAULT_SAMPLE_SEED,
            }
        }
    }
}

/// Results of a pairwise scan over raw codewords.
#[derive(Clone, Debug, PartialEq)]
pub struct PairwiseReport {
    pub pairs_checked: u64,
    pub min_rank: usize,
    /// Pairs whose difference matrix has rank below 2.
    pub rank_deficient_pairs: u64,
    /// Minimum over pairs of `sqrt(λ1 λ2)` for raw codewords.
    pub min_eigen_product_root: f64,
    /// Same figure with the transmit `1/√2` applied (half the raw value).
    pub min_eigen_product_root_normalized: f64,
    pub argmin_pair: (CVec<4>, CVec<4>),
    /// Number of symbol positions in which the minimising pair differs.
    pub argmin_symbols_differing: usize,
    /// Largest `|λ1 - λ2| / λ1`.
    pub max_eigen_gap: f64,
    /// Largest `|λk - |d|^2| / |d|^2`.
    pub max_eigen_column_error: f64,
    /// Largest `| |d|^2 - |s - ŝ|^2 |`.
    pub max_norm_identity_error: f64,
    /// `d_min^2` of the constellation.
    pub d_min_sqr: f64,
}

/// `C(s) - C(ŝ)` for raw codewords.
pub fn codeword_difference(s: &CVec<4>, s_hat: &CVec<4>) -> Result<CMat<4, 2>> {
    if s == s_hat {
        return Err(Error::IdenticalInputs);
    }
    Ok(proposed_encode(s, Normalization::Raw).entries - proposed_encode(s_hat, Normalization::Raw).entries)
}

#[derive(Clone, Copy, Debug)]
struct PairStats {
    pairs: u64,
    min_rank: usize,
    rank_deficient: u64,
    min_root: f64,
    argmin: (u64, u64),
    max_gap: f64,
    max_column_error: f64,
    max_norm_error: f64,
}

impl PairStats {
    fn empty() -> Self {
        PairStats {
            pairs: 0,
            min_rank: usize::MAX,
            rank_deficient: 0,
            min_root: f64::INFINITY,
            argmin: (u64::MAX, u64::MAX),
            max_gap: 0.0,
            max_column_error: 0.0,
            max_norm_error: 0.0,
        }
    }

    fn merge(self, other: Self) -> Self {
        let take_other = other.min_root < self.min_root
            || (other.min_root == self.min_root && other.argmin < self.argmin);
        PairStats {
            pairs: self.pairs + other.pairs,
            min_rank: self.min_rank.min(other.min_rank),
            rank_deficient: self.rank_deficient + other.rank_deficient,
            min_root: if take_other { other.min_root } else { self.min_root },
            argmin: if take_other { other.argmin } else { self.argmin },
            max_gap: self.max_gap.max(other.max_gap),
            max_column_error: self.max_column_error.max(other.max_column_error),
            max_norm_error: self.max_norm_error.max(other.max_norm_error),
        }
    }
}

fn symbols_of(c: &Constellation, index: u64) -> CVec<4> {
    let m = c.order() as u64;
    CVec(std::array::from_fn(|k| {
        let digit = (index / m.pow(3 - k as u32)) % m;
        c.point(digit as usize)
    }))
}

fn pair_stats(s: &CVec<4>, s_hat: &CVec<4>, ids: (u64, u64)) -> Result<PairStats> {
    let d = codeword_difference(s, s_hat)?;
    let rank = rank_numeric(&d);
    let (l1, l2) = eig_hermitian2(&d.gram())?;
    let col = d.col(0).norm_sqr();
    let diff = (*s - *s_hat).norm_sqr();
    Ok(PairStats {
        pairs: 1,
        min_rank: rank,
        rank_deficient: (rank < 2) as u64,
        min_root: (l1 * l2).max(0.0).sqrt(),
        argmin: ids,
        max_gap: (l1 - l2).abs() / l1,
        max_column_error: (l1 - col).abs().max((l2 - col).abs()) / col,
        max_norm_error: (col - diff).abs(),
    })
}

fn scan_pairs(c: &Constellation, scan: PairScan) -> Result<PairwiseReport> {
    let m = c.order() as u64;
    let codewords = m.pow(4);
    let stats = match scan {
        PairScan::Exhaustive { max_pairs } => {
            let required = codewords * (codewords - 1) / 2;
            if required > max_pairs {
                return Err(Error::BudgetExceeded {
                    required,
                    budget: max_pairs,
                });
            }
            let symbols: Vec<CVec<4>> = (0..codewords).map(|i| symbols_of(c, i)).collect();
            (0..codewords)
                .into_par_iter()
                .map(|i| {
                    let mut acc = PairStats::empty();
                    for j in (i + 1)..codewords {
                        acc = acc.merge(pair_stats(&symbols[i as usize], &symbols[j as usize], (i, j))?);
                    }
                    Ok::<_, Error>(acc)
                })
                .try_reduce(PairStats::empty, |a, b| Ok(a.merge(b)))?
        }
        PairScan::Sampled { pairs, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut acc = PairStats::empty();
            let mut drawn = 0;
            while drawn < pairs {
                let i = rng.random_range(0..codewords);
                let j = rng.random_range(0..codewords);
                if i == j {
                    continue;
                }
                let (i, j) = (i.min(j), i.max(j));
                acc = acc.merge(pair_stats(&symbols_of(c, i), &symbols_of(c, j), (i, j))?);
                drawn += 1;
            }
            acc
        }
    };

    let (s, s_hat) = if stats.pairs == 0 {
        (CVec::zeros(), CVec::zeros())
    } else {
        (symbols_of(c, stats.argmin.0), symbols_of(c, stats.argmin.1))
    };
    let differing = (0..4).filter(|&k| s[k] != s_hat[k]).count();
    Ok(PairwiseReport {
        pairs_checked: stats.pairs,
        min_rank: if stats.pairs == 0 { 0 } else { stats.min_rank },
        rank_deficient_pairs: stats.rank_deficient,
        min_eigen_product_root: stats.min_root,
        min_eigen_product_root_normalized: stats.min_root / 2.0,
        argmin_pair: (s, s_hat),
        argmin_symbols_differing: differing,
        max_eigen_gap: stats.max_gap,
        max_eigen_column_error: stats.max_column_error,
        max_norm_identity_error: stats.max_norm_error,
        d_min_sqr: c.d_min() * c.d_min(),
    })
}

/// Rank of the codeword difference matrix over all (or sampled) pairs.
pub fn verify_rank_property(c: &Constellation, scan: PairScan) -> Result<PairwiseReport> {
    scan_pairs(c, scan)
}

/// Eigenvalues of `D^H D` over all (or sampled) pairs and their minimum
/// geometric mean.
pub fn verify_coding_gain(c: &Constellation, scan: PairScan) -> Result<PairwiseReport> {
    scan_pairs(c, scan)
}

/// Least-squares slope of `log10(BER)` against `SNR_dB / 10`.
pub fn diversity_slope(curve: &[BerPoint]) -> Result<f64> {
    if curve.len() < 2 {
        return Err(Error::InsufficientErrors {
            reason: format!("need at least 2 points, got {}", curve.len()),
        });
    }
    if let Some(p) = curve.iter().find(|p| p.bit_errors < MIN_SLOPE_BIT_ERRORS || !(p.ber > 0.0)) {
        return Err(Error::InsufficientErrors {
            reason: format!(
                "point at {} dB has {} bit errors (need {MIN_SLOPE_BIT_ERRORS})",
                p.snr_db, p.bit_errors
            ),
        });
    }
    let n = curve.len() as f64;
    let xs: Vec<f64> = curve.iter().map(|p| p.snr_db / 10.0).collect();
    let ys: Vec<f64> = curve.iter().map(|p| p.ber.log10()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientErrors {
            reason: "all points share one SNR".into(),
        });
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// SNR at which a BER curve crosses `target`, interpolating `log10(BER)`
/// linearly between the first bracketing pair of points.
pub fn snr_at_ber(curve: &[BerPoint], target: f64) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = curve.iter().map(|p| (p.snr_db, p.ber)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lt = target.log10();
    pts.windows(2).find_map(|w| {
        let ((x0, b0), (x1, b1)) = (w[0], w[1]);
        if b0 >= target && b1 <= target && b0 > 0.0 && b1 > 0.0 {
            let (y0, y1) = (b0.log10(), b1.log10());
            if y0 == y1 {
                Some(x0)
            } else {
                Some(x0 + (lt - y0) * (x1 - x0) / (y1 - y0))
            }
        } else {
            None
        }
    })
}

/// Measured metric-evaluation count of one decoder call.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecoderRun {
    pub decoder: DecoderKind,
    pub order: usize,
    pub metric_evals: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComplexityRow {
    pub decoder: DecoderKind,
    pub order: usize,
    pub measured: u64,
    /// `M^4` for ML, `M^2` for conditional ML, 0 for linear ZF.
    pub analytic: u64,
}

impl ComplexityRow {
    pub fn matches(&self) -> bool {
        self.measured == self.analytic
    }

    pub fn analytic_label(&self) -> &'static str {
        match self.decoder {
            DecoderKind::Ml => "M^4",
            DecoderKind::CondMl => "M^2",
            DecoderKind::Zf => "linear",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexityReport {
    pub rows: Vec<ComplexityRow>,
}

impl ComplexityReport {
    pub fn all_match(&self) -> bool {
        self.rows.iter().all(ComplexityRow::matches)
    }
}

impl fmt::Display for ComplexityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<8} {:>4} {:>10} {:>10} {:>7}", "decoder", "M", "measured", "analytic", "form")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<8} {:>4} {:>10} {:>10} {:>7}{}",
                r.decoder.name(),
                r.order,
                r.measured,
                r.analytic,
                r.analytic_label(),
                if r.matches() { "" } else { "  MISMATCH" }
            )?;
        }
        Ok(())
    }
}

pub fn analytic_evals(decoder: DecoderKind, order: usize) -> u64 {
    let m = order as u64;
    match decoder {
        DecoderKind::Ml => m.pow(4),
        DecoderKind::CondMl => m.pow(2),
        DecoderKind::Zf => 0,
    }
}

pub fn complexity_report(runs: &[DecoderRun]) -> ComplexityReport {
    ComplexityReport {
        rows: runs
            .iter()
            .map(|r| ComplexityRow {
                decoder: r.decoder,
                order: r.order,
                measured: r.metric_evals,
                analytic: analytic_evals(r.decoder, r.order),
            })
            .collect(),
    }
}

/// Runs every decoder once per constellation on a seeded random channel and
/// records the metric-evaluation counters.
pub fn measure_decoder_runs(orders: &[usize], seed: u64) -> Result<Vec<DecoderRun>> {
    let g = generator_matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut runs = Vec::new();
    for &order in orders {
        let c = make_qam(order)?;
        let h = CMat::<4, 4>(std::array::from_fn(|_| {
            std::array::from_fn(|_| crate::channel::complex_gaussian(&mut rng))
        }));
        let y = CVec::<4>(std::array::from_fn(|_| crate::channel::complex_gaussian(&mut rng)));
        let input = DecoderInput::from_effective(y, &h, &g, &c, CodeKind::Proposed.tx_scale());
        for decoder in DecoderKind::ALL {
            let result = match decoder {
                DecoderKind::Ml => ml_decode_with_budget(&input, u64::MAX),
                DecoderKind::CondMl => conditional_ml_decode(&input),
                DecoderKind::Zf => zf_decode(&input),
            }?;
            runs.push(DecoderRun {
                decoder,
                order,
                metric_evals: result.metric_evals,
            });
        }
    }
    Ok(runs)
}

/// One line of the property suite.
#[derive(Clone, Debug, PartialEq)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub passed: bool,
    pub measured: String,
    pub expected: String,
    pub tolerance: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertySuite {
    pub checks: Vec<PropertyCheck>,
}

impl PropertySuite {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,passed,measured,expected,tolerance\n");
        for c in &self.checks {
            let _ = writeln!(out, "{},{},{},{},{}", c.name, c.passed, c.measured, c.expected, c.tolerance);
        }
        out
    }
}

impl fmt::Display for PropertySuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "[{}] {:<28} measured {} (expected {}, tol {})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.expected,
                c.tolerance
            )?;
        }
        Ok(())
    }
}

fn check(name: &'static str, passed: bool, measured: String, expected: &str, tolerance: &str) -> PropertyCheck {
    PropertyCheck {
        name,
        passed,
        measured,
        expected: expected.to_owned(),
        tolerance: tolerance.to_owned(),
    }
}

/// Generator unitarity and agreement of `G s` with the codeword entries over
/// `draws` random symbol vectors. Returns `(unitarity error, consistency error)`.
pub fn generator_errors(draws: usize, seed: u64) -> (f64, f64) {
    let g = generator_matrix();
    let unitarity = g.matrix().gram().max_abs_diff(&CMat::identity());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut consistency: f64 = 0.0;
    for _ in 0..draws {
        let s = CVec::<4>(std::array::from_fn(|_| crate::channel::complex_gaussian(&mut rng)));
        let gs = g.matrix().mul_vec(&s);
        let c = proposed_encode(&s, Normalization::Raw).entries;
        let stacked = CVec([c[(0, 0)], c[(3, 0)], c[(2, 0)], c[(1, 0)]]);
        consistency = consistency
            .max(gs.max_abs_diff(&stacked))
            .max(gs.max_abs_diff(&golden_stack(&s)));
    }
    (unitarity, consistency)
}

/// Runs the full algebraic property suite.
pub fn property_suite() -> Result<PropertySuite> {
    let mut checks = Vec::new();

    let (unitarity, consistency) = generator_errors(1000, 1);
    checks.push(check("generator_unitary", unitarity <= 1e-12, format!("{unitarity:e}"), "0", "1e-12"));
    checks.push(check(
        "generator_consistency",
        consistency <= 1e-12,
        format!("{consistency:e}"),
        "0",
        "1e-12",
    ));

    let rate = CodeKind::Proposed.rate();
    checks.push(check(
        "full_rate",
        rate == RX_ANTENNAS as f64 && CodeKind::Proposed.is_full_rate(),
        format!("{rate}"),
        "2",
        "exact",
    ));

    let qpsk = make_qam(4)?;
    let report = verify_coding_gain(&qpsk, PairScan::default_for(&qpsk))?;
    checks.push(check(
        "qpsk_pairs_checked",
        report.pairs_checked == 32_640,
        report.pairs_checked.to_string(),
        "32640",
        "exact",
    ));
    checks.push(check(
        "qpsk_min_rank",
        report.min_rank == 2,
        report.min_rank.to_string(),
        "2",
        "exact",
    ));
    checks.push(check(
        "qpsk_coding_gain",
        (report.min_eigen_product_root - report.d_min_sqr).abs() <= 1e-9,
        format!("{:.12}", report.min_eigen_product_root),
        &format!("{}", report.d_min_sqr),
        "1e-9",
    ));
    checks.push(check(
        "qpsk_coding_gain_normalized",
        (report.min_eigen_product_root_normalized - report.d_min_sqr / 2.0).abs() <= 1e-9,
        format!("{:.12}", report.min_eigen_product_root_normalized),
        &format!("{}", report.d_min_sqr / 2.0),
        "1e-9",
    ));
    checks.push(check(
        "qpsk_argmin_single_symbol",
        report.argmin_symbols_differing == 1,
        report.argmin_symbols_differing.to_string(),
        "1",
        "exact",
    ));
    checks.push(check(
        "qpsk_equal_eigenvalues",
        report.max_eigen_gap <= 1e-9 && report.max_eigen_column_error <= 1e-9,
        format!("{:e}", report.max_eigen_gap.max(report.max_eigen_column_error)),
        "0",
        "1e-9",
    ));
    checks.push(check(
        "qpsk_norm_identity",
        report.max_norm_identity_error <= 1e-10,
        format!("{:e}", report.max_norm_identity_error),
        "0",
        "1e-10",
    ));

    let qam16 = make_qam(16)?;
    let sampled = verify_coding_gain(&qam16, PairScan::default_for(&qam16))?;
    checks.push(check(
        "qam16_sampled_min_rank",
        sampled.min_rank == 2 && sampled.pairs_checked == DEFAULT_SAMPLED_PAIRS,
        sampled.min_rank.to_string(),
        "2",
        "exact",
    ));
    checks.push(check(
        "qam16_sampled_coding_gain",
        sampled.min_eigen_product_root >= sampled.d_min_sqr - 1e-9
            && sampled.max_eigen_gap <= 1e-9
            && sampled.max_norm_identity_error <= 1e-10,
        format!("{:.12}", sampled.min_eigen_product_root),
        &format!(">= {}", sampled.d_min_sqr),
        "1e-9",
    ));

    let complexity = complexity_report(&measure_decoder_runs(&[4, 16], 2)?);
    for row in &complexity.rows {
        let name = match (row.decoder, row.order) {
            (DecoderKind::Ml, 4) => "complexity_ml_qpsk",
            (DecoderKind::CondMl, 4) => "complexity_cond_ml_qpsk",
            (DecoderKind::Zf, 4) => "complexity_zf_qpsk",
            (DecoderKind::Ml, _) => "complexity_ml_qam16",
            (DecoderKind::CondMl, _) => "complexity_cond_ml_qam16",
            (DecoderKind::Zf, _) => "complexity_zf_qam16",
        };
        checks.push(check(
            name,
            row.matches(),
            row.measured.to_string(),
            &row.analytic.to_string(),
            "exact",
        ));
    }

    Ok(PropertySuite { checks })
}
