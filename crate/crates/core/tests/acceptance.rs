//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Criteria listed in `KNOWN_FAILURES` are measured and reported like the
//! others; a FAIL on them does not fail the run. Any other FAIL does.

use std::process::ExitCode;
use std::time::Instant;

use dstbc_core::analysis::{
    complexity_report, diversity_slope, generator_errors, measure_decoder_runs, snr_at_ber, verify_coding_gain,
    verify_rank_property, PairScan,
};
use dstbc_core::channel::NoiseModel;
use dstbc_core::codes::{CodeKind, RX_ANTENNAS};
use dstbc_core::constellation::{make_qam, ConstellationKind};
use dstbc_core::decode::DecoderKind;
use dstbc_core::sim::{emit_csv, run_point, run_sweep, BerPoint, SimConfig, TrialContext};

/// Uncoded desk-scale runs cannot meet these; see the project README.
const KNOWN_FAILURES: [u32; 2] = [7, 8];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn qpsk_config(decoder: DecoderKind, snr_db: Vec<f64>, imbalance_db: Vec<f64>) -> SimConfig {
    SimConfig {
        code: CodeKind::Proposed,
        decoder,
        constellation: ConstellationKind::Qpsk,
        snr_db,
        imbalance_db,
        max_trials: 50_000_000,
        min_bit_errors: 200,
        seed: 20_240_601,
        workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
    }
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let (unitarity, consistency) = generator_errors(1000, 17);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        unitarity <= 1e-12 && consistency <= 1e-12 && secs < 1.0,
        format!("|G^H G - I|max = {unitarity:.2e}, |Gs - stack|max = {consistency:.2e} (tol 1e-12), {secs:.3} s (< 1 s)"),
    )
}

fn ac2() -> Outcome {
    let code = CodeKind::Proposed;
    let q = code.symbols_per_codeword();
    let t = code.time_slots();
    outcome(
        code.rate() == 2.0 && q as f64 / t as f64 == RX_ANTENNAS as f64 && code.is_full_rate(),
        format!("R = Q/T = {q}/{t} = {} (expected 2)", code.rate()),
    )
}

fn ac3() -> Outcome {
    let c = make_qam(4).unwrap();
    let start = Instant::now();
    let r = verify_rank_property(&c, PairScan::Exhaustive { max_pairs: 32_640 }).unwrap();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        r.pairs_checked == 32_640 && r.min_rank == 2 && r.rank_deficient_pairs == 0 && secs < 30.0,
        format!("{} pairs, min_rank = {}, {secs:.3} s (< 30 s)", r.pairs_checked, r.min_rank),
    )
}

fn ac4() -> Outcome {
    let c = make_qam(4).unwrap();
    let start = Instant::now();
    let r = verify_coding_gain(&c, PairScan::Exhaustive { max_pairs: 32_640 }).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let gain = r.min_eigen_product_root;
    outcome(
        (gain - 2.0).abs() <= 1e-9 && (r.d_min_sqr - 2.0).abs() <= 1e-9 && r.max_eigen_gap <= 1e-9 && secs < 60.0,
        format!(
            "min sqrt(l1 l2) = {gain:.12} (2.0 +- 1e-9), d_min^2 = {:.12}, max |l1-l2|/l1 = {:.2e}, {secs:.3} s (< 60 s)",
            r.d_min_sqr, r.max_eigen_gap
        ),
    )
}

fn ac5() -> Outcome {
    let cfg = qpsk_config(DecoderKind::Ml, vec![16.0, 18.0, 20.0, 22.0], vec![0.0]);
    let points = run_sweep(&cfg).unwrap();
    let counts: Vec<String> = points.iter().map(|p| format!("{}@{}dB", p.bit_errors, p.snr_db)).collect();
    let enough = points.iter().all(|p| p.bit_errors >= 200);
    match diversity_slope(&points) {
        Ok(slope) => {
            let magnitude = -slope;
            outcome(
                enough && (3.0..=4.5).contains(&magnitude),
                format!("slope magnitude {magnitude:.3} (in [3.0, 4.5]); bit errors {}", counts.join(" ")),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn ac6() -> Outcome {
    let report = complexity_report(&measure_decoder_runs(&[4], 21).unwrap());
    let get = |d| report.rows.iter().find(|r| r.decoder == d).unwrap().measured;
    let (ml, cond) = (get(DecoderKind::Ml), get(DecoderKind::CondMl));
    outcome(
        ml == 256 && cond == 16,
        format!("metric_evals ML = {ml} (256), cond-ML = {cond} (16)"),
    )
}

fn crossing(points: &[BerPoint], imbalance_db: f64) -> Option<f64> {
    let curve: Vec<BerPoint> = points.iter().filter(|p| p.imbalance_db == imbalance_db).cloned().collect();
    snr_at_ber(&curve, 1e-3)
}

fn fine_grid() -> Vec<f64> {
    (11..=17).map(f64::from).collect()
}

fn ac7() -> Outcome {
    let mut ml = qpsk_config(DecoderKind::Ml, fine_grid(), vec![0.0]);
    ml.min_bit_errors = 2000;
    let mut cond = ml.clone();
    cond.decoder = DecoderKind::CondMl;
    match (crossing(&run_sweep(&ml).unwrap(), 0.0), crossing(&run_sweep(&cond).unwrap(), 0.0)) {
        (Some(a), Some(b)) => outcome(
            b - a <= 0.3,
            format!("SNR at BER 1e-3: ML {a:.3} dB, cond-ML {b:.3} dB, penalty {:.3} dB (<= 0.3 dB)", b - a),
        ),
        other => outcome(false, format!("no 1e-3 crossing: {other:?}")),
    }
}

fn ac8() -> Outcome {
    let mut cfg = qpsk_config(DecoderKind::Ml, fine_grid(), vec![0.0, 15.0]);
    cfg.min_bit_errors = 2000;
    let points = run_sweep(&cfg).unwrap();
    match (crossing(&points, 0.0), crossing(&points, 15.0)) {
        (Some(a), Some(b)) => outcome(
            b - a < 1.0,
            format!("SNR at BER 1e-3: delta 0 dB {a:.3} dB, delta 15 dB {b:.3} dB, loss {:.3} dB (< 1 dB)", b - a),
        ),
        other => outcome(false, format!("no 1e-3 crossing: {other:?}")),
    }
}

fn ac9() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let base = qpsk_config(DecoderKind::Ml, vec![0.0], vec![0.0]);
    for decoder in DecoderKind::ALL {
        let cfg = SimConfig { decoder, ..base.clone() };
        let ctx = TrialContext::with_noise(&cfg, NoiseModel::new(0.0).unwrap(), 0.0).unwrap();
        let t = run_point(&ctx, 1000, u64::MAX).unwrap();
        ok &= t.trials == 1000 && t.bit_errors == 0;
        notes.push(format!("{decoder} noiseless {}/{} errors", t.bit_errors, t.trials));
    }
    for snr in [8.0, 12.0, 16.0] {
        let count = |decoder| {
            let cfg = SimConfig { decoder, ..base.clone() };
            let ctx = TrialContext::new(&cfg, snr, 0.0).unwrap();
            run_point(&ctx, 10_000, u64::MAX).unwrap().codeword_errors
        };
        let (ml, cond) = (count(DecoderKind::Ml), count(DecoderKind::CondMl));
        ok &= ml <= cond;
        notes.push(format!("{snr} dB cw errors ML {ml} <= cond-ML {cond}"));
    }
    outcome(ok, notes.join("; "))
}

fn ac10() -> Outcome {
    let mut cfg = qpsk_config(DecoderKind::CondMl, vec![6.0, 10.0, 14.0], vec![0.0, 15.0]);
    cfg.max_trials = 100_000;
    let bytes = |workers| {
        let mut out = Vec::new();
        emit_csv(&run_sweep(&SimConfig { workers, ..cfg.clone() }).unwrap(), &mut out).unwrap();
        out
    };
    let (one, eight) = (bytes(1), bytes(8));
    outcome(
        one == eight,
        format!("{} bytes with 1 worker, {} bytes with 8, identical = {}", one.len(), eight.len(), one == eight),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "generator unitarity", ac1),
        (2, "full rate", ac2),
        (3, "rank (QPSK exhaustive)", ac3),
        (4, "coding gain (QPSK exhaustive)", ac4),
        (5, "diversity slope", ac5),
        (6, "complexity counters", ac6),
        (7, "conditional-ML penalty", ac7),
        (8, "imbalance robustness", ac8),
        (9, "decoder sanity", ac9),
        (10, "determinism", ac10),
    ];
    let mut unexpected = 0;
    let mut passed = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        let known = KNOWN_FAILURES.contains(&id);
        let tag = match (o.passed, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("AC{id:<2} {tag:<12} {name}: {} [{secs:.1} s]", o.detail);
        passed += o.passed as u32;
        unexpected += (!o.passed && !known) as u32;
    }
    println!("acceptance: {passed}/10 passed, {unexpected} unexpected failures");
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
