//! Detectors for the block model `y = t (F1 u + F2 v) + w`.
//!
//! `u = [s1, s2]` and `v = [s3, s4]`, `t` is the transmit amplitude and
//! `F_j = H_j G_j` come from splitting the effective channel. Three
//! detectors share this model:
//!
//! * exhaustive ML over all `M^4` symbol vectors,
//! * conditional ML: for each of the `M^2` candidates `u`, zero-force `v`,
//!   slice it, and keep the candidate with the smallest residual,
//! * plain zero forcing over the full 4x4 system.
//!
//! The Alamouti baseline has its own linear combiner at the bottom.

use std::fmt;
use std::str::FromStr;

use crate::codes::GoldenGenerator;
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::linalg::{inv2, solve, CMat, CVec, C64};

/// Largest `M^4` the exhaustive detector accepts unless told otherwise.
pub const DEFAULT_ML_BUDGET: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecoderKind {
    Ml,
    CondMl,
    Zf,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 3] = [DecoderKind::Ml, DecoderKind::CondMl, DecoderKind::Zf];

    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Ml => "ml",
            DecoderKind::CondMl => "cond-ml",
            DecoderKind::Zf => "zf",
        }
    }
}

impl FromStr for DecoderKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        DecoderKind::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown decoder {s:?} (expected ml, cond-ml or zf)")))
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DecoderInput<'a> {
    pub y: CVec<4>,
    pub f1: CMat<4, 2>,
    pub f2: CMat<4, 2>,
    pub constellation: &'a Constellation,
    pub tx_scale: f64,
}

impl<'a> DecoderInput<'a> {
    /// Builds the block model from an effective channel and the generator.
    pub fn from_effective(
        y: CVec<4>,
        effective: &CMat<4, 4>,
        generator: &GoldenGenerator,
        constellation: &'a Constellation,
        tx_scale: f64,
    ) -> Self {
        let (f1, f2) = split_effective(effective, generator);
        DecoderInput {
            y,
            f1,
            f2,
            constellation,
            tx_scale,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecodeResult {
    pub s_hat: CVec<4>,
    /// Constellation indices of `s_hat`.
    pub indices: [usize; 4],
    pub metric: f64,
    pub metric_evals: u64,
}

/// `F1 = H[:, 0..2] G1`, `F2 = H[:, 2..4] G2`.
pub fn split_effective(h: &CMat<4, 4>, generator: &GoldenGenerator) -> (CMat<4, 2>, CMat<4, 2>) {
    let h1 = h.columns::<2>(0);
    let h2 = h.columns::<2>(2);
    (h1.mul_mat(&generator.g1), h2.mul_mat(&generator.g2))
}

#[inline]
fn dist2(a: &CVec<4>, b: &CVec<4>) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        let d = a.0[i] - b.0[i];
        acc += d.re * d.re + d.im * d.im;
    }
    acc
}

/// `|y - t (F1 u + F2 v)|^2`.
pub fn residual_metric(input: &DecoderInput<'_>, u: &CVec<2>, v: &CVec<2>) -> f64 {
    let model = (input.f1.mul_vec(u) + input.f2.mul_vec(v)).scale(input.tx_scale);
    dist2(&input.y, &model)
}

fn pair_images(f: &CMat<4, 2>, points: &[C64], tx_scale: f64) -> Vec<CVec<4>> {
    let mut out = Vec::with_capacity(points.len() * points.len());
    for &a in points {
        for &b in points {
            out.push(f.mul_vec(&CVec([a, b])).scale(tx_scale));
        }
    }
    out
}

pub fn ml_decode(input: &DecoderInput<'_>) -> Result<DecodeResult> {
    ml_decode_with_budget(input, DEFAULT_ML_BUDGET)
}

/// Exhaustive search over `M^4` hypotheses in lexicographic order of
/// `(s1, s2, s3, s4)`; the first minimiser wins.
pub fn ml_decode_with_budget(input: &DecoderInput<'_>, budget: u64) -> Result<DecodeResult> {
    let m = input.constellation.order();
    let pairs = m * m;
    let required = (pairs as u64) * (pairs as u64);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let points = input.constellation.points();
    let left = pair_images(&input.f1, points, input.tx_scale);
    let right = pair_images(&input.f2, points, input.tx_scale);

    let mut best = (0usize, 0usize);
    let mut best_metric = f64::INFINITY;
    for (iu, a) in left.iter().enumerate() {
        let r = input.y - *a;
        for (iv, b) in right.iter().enumerate() {
            let d = dist2(&r, b);
            if d < best_metric {
                best_metric = d;
                best = (iu, iv);
            }
        }
    }
    let indices = [best.0 / m, best.0 % m, best.1 / m, best.1 % m];
    Ok(DecodeResult {
        s_hat: CVec(indices.map(|k| points[k])),
        indices,
        metric: best_metric,
        metric_evals: required,
    })
}

/// Zero-forcing pseudo-inverse `(F2^H F2)^{-1} F2^H`.
fn f2_pseudo_inverse(f2: &CMat<4, 2>) -> Result<CMat<2, 4>> {
    Ok(inv2(&f2.gram())?.mul_mat(&f2.hermitian()))
}

/// Unquantised zero-forcing estimate of `v` given `u`:
/// `(F2^H F2)^{-1} F2^H (y - t F1 u) / t`.
pub fn zf_inner(input: &DecoderInput<'_>, u: &CVec<2>) -> Result<CVec<2>> {
    let pinv = f2_pseudo_inverse(&input.f2)?;
    let residual = input.y - input.f1.mul_vec(u).scale(input.tx_scale);
    Ok(pinv.mul_vec(&residual).scale(1.0 / input.tx_scale))
}

/// Residual of `y - t F1 u` after projecting out the span of `F2`.
pub fn projection_metric(input: &DecoderInput<'_>, u: &CVec<2>) -> Result<f64> {
    let ginv = inv2(&input.f2.gram())?;
    let r = input.y - input.f1.mul_vec(u).scale(input.tx_scale);
    let z = input.f2.hermitian().mul_vec(&r);
    let projected = z.dot(&ginv.mul_vec(&z)).re;
    Ok((r.norm_sqr() - projected).max(0.0))
}

/// Two-step conditional ML over `M^2` candidates for `u`.
pub fn conditional_ml_decode(input: &DecoderInput<'_>) -> Result<DecodeResult> {
    let c = input.constellation;
    let m = c.order();
    let points = c.points();
    let pinv = f2_pseudo_inverse(&input.f2)?;
    // ṽ(u) = pinv y / t - (pinv F1) u
    let w = pinv.mul_vec(&input.y).scale(1.0 / input.tx_scale);
    let coupling = pinv.mul_mat(&input.f1);
    let f1 = input.f1.scale(input.tx_scale);
    let f2 = input.f2.scale(input.tx_scale);

    let mut best = [0usize; 4];
    let mut best_metric = f64::INFINITY;
    for i1 in 0..m {
        for i2 in 0..m {
            let u = CVec([points[i1], points[i2]]);
            let v_tilde = w - coupling.mul_vec(&u);
            let i3 = c.hard_decision(v_tilde[0]);
            let i4 = c.hard_decision(v_tilde[1]);
            let model = f1.mul_vec(&u) + f2.mul_vec(&CVec([points[i3], points[i4]]));
            let d = dist2(&input.y, &model);
            if d < best_metric {
                best_metric = d;
                best = [i1, i2, i3, i4];
            }
        }
    }
    Ok(DecodeResult {
        s_hat: CVec(best.map(|k| points[k])),
        indices: best,
        metric: best_metric,
        metric_evals: (m * m) as u64,
    })
}

/// Per-symbol slicing of `[F1 F2]^{-1} y / t`.
pub fn zf_decode(input: &DecoderInput<'_>) -> Result<DecodeResult> {
    let c = input.constellation;
    let a = CMat::hcat(&input.f1, &input.f2);
    let x = solve(&a, &input.y)?.scale(1.0 / input.tx_scale);
    let indices = x.0.map(|z| c.hard_decision(z));
    let s_hat = CVec(indices.map(|k| c.point(k)));
    let (u, v) = s_hat.split();
    Ok(DecodeResult {
        s_hat,
        indices,
        metric: residual_metric(input, &u, &v),
        metric_evals: 0,
    })
}

pub fn decode(kind: DecoderKind, input: &DecoderInput<'_>) -> Result<DecodeResult> {
    match kind {
        DecoderKind::Ml => ml_decode(input),
        DecoderKind::CondMl => conditional_ml_decode(input),
        DecoderKind::Zf => zf_decode(input),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlamoutiResult {
    pub s_hat: CVec<2>,
    pub indices: [usize; 2],
    pub metric: f64,
    pub metric_evals: u64,
}

/// Matched-filter combining for the Alamouti model `y = t A s + w`.
///
/// The columns of `A` are orthogonal with equal norm, so combining followed
/// by slicing is both the ZF and the ML decision.
pub fn alamouti_combine(
    y: &CVec<4>,
    a: &CMat<4, 2>,
    constellation: &Constellation,
    tx_scale: f64,
) -> Result<AlamoutiResult> {
    let gain = a.col(0).norm_sqr();
    let threshold = 1e-12;
    if !(gain > threshold) {
        return Err(Error::SingularMatrix {
            magnitude: gain,
            threshold,
        });
    }
    let z = a.hermitian().mul_vec(y).scale(1.0 / (tx_scale * gain));
    let indices = z.0.map(|v| constellation.hard_decision(v));
    let s_hat = CVec(indices.map(|k| constellation.point(k)));
    let model = a.mul_vec(&s_hat).scale(tx_scale);
    Ok(AlamoutiResult {
        s_hat,
        indices,
        metric: (*y - model).norm_sqr(),
        metric_evals: 0,
    })
}

/// Exhaustive `M^2` search for the Alamouti model.
pub fn alamouti_ml_decode(
    y: &CVec<4>,
    a: &CMat<4, 2>,
    constellation: &Constellation,
    tx_scale: f64,
) -> AlamoutiResult {
    let points = constellation.points();
    let mut best = [0usize; 2];
    let mut best_metric = f64::INFINITY;
    for (i, &p) in points.iter().enumerate() {
        for (j, &q) in points.iter().enumerate() {
            let model = a.mul_vec(&CVec([p, q])).scale(tx_scale);
            let d = dist2(y, &model);
            if d < best_metric {
                best_metric = d;
                best = [i, j];
            }
        }
    }
    AlamoutiResult {
        s_hat: CVec(best.map(|k| points[k])),
        indices: best,
        metric: best_metric,
        metric_evals: (points.len() * points.len()) as u64,
    }
}
