//! Space-time block encoders and the matching effective channel models.
//!
//! The distributed 4x2 code places a single Golden codeword
//! `[X1(1) X1(2); X2(1) X2(2)]` into an Alamouti arrangement over four
//! antennas:
//!
//! ```text
//!          [ X1(1)  -X1(2)* ]
//! C = 1/√2 [ X2(1)  -X2(2)* ]
//!          [ X1(2)   X1(1)* ]
//!          [ X2(2)   X2(1)* ]
//! ```
//!
//! Antennas 1-2 sit in the first cell and antennas 3-4 in the second. The
//! two-antenna baselines (Golden, Alamouti) transmit from antennas 1 and 3,
//! one per cell.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64, I, ZERO};

/// Physical antennas used by the two-antenna baselines.
pub const BASELINE_ANTENNAS: [usize; 2] = [0, 2];

/// Number of receive antennas.
pub const RX_ANTENNAS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CodeKind {
    Proposed,
    Golden2x2,
    Alamouti,
}

impl CodeKind {
    pub const ALL: [CodeKind; 3] = [CodeKind::Proposed, CodeKind::Golden2x2, CodeKind::Alamouti];

    pub fn name(self) -> &'static str {
        match self {
            CodeKind::Proposed => "proposed",
            CodeKind::Golden2x2 => "golden2x2",
            CodeKind::Alamouti => "alamouti",
        }
    }

    /// Information symbols per codeword (Q).
    pub fn symbols_per_codeword(self) -> usize {
        match self {
            CodeKind::Proposed | CodeKind::Golden2x2 => 4,
            CodeKind::Alamouti => 2,
        }
    }

    /// Channel uses per codeword (T).
    pub fn time_slots(self) -> usize {
        2
    }

    /// Symbols per channel use, `Q / T`.
    pub fn rate(self) -> f64 {
        self.symbols_per_codeword() as f64 / self.time_slots() as f64
    }

    pub fn tx_antennas(self) -> usize {
        match self {
            CodeKind::Proposed => 4,
            CodeKind::Golden2x2 | CodeKind::Alamouti => 2,
        }
    }

    /// Full rate means the rate equals the number of receive antennas.
    pub fn is_full_rate(self) -> bool {
        self.symbols_per_codeword() == RX_ANTENNAS * self.time_slots()
    }

    /// Amplitude applied to the codeword at the transmitter.
    pub fn tx_scale(self) -> f64 {
        match self {
            CodeKind::Proposed | CodeKind::Alamouti => FRAC_1_SQRT_2,
            CodeKind::Golden2x2 => 1.0,
        }
    }

    /// Mean received energy per receive antenna per channel use for
    /// unit-energy symbols and unit-variance balanced fading, i.e.
    /// `E[|C|_F^2] / T` of the transmitted codeword.
    pub fn rx_energy_per_channel_use(self) -> f64 {
        // Every code here maps unit-energy symbols to codewords carrying one
        // unit of energy per information symbol.
        self.rate()
    }
}

impl FromStr for CodeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CodeKind::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown code {s:?} (expected proposed, golden2x2 or alamouti)"
                ))
            })
    }
}

impl fmt::Display for CodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Whether the leading `1/√2` of the distributed code has been applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    Raw,
    Normalized,
}

/// Transmit matrix: rows are antennas, columns are the two time slots.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Codeword<const A: usize> {
    pub entries: CMat<A, 2>,
    pub normalization: Normalization,
}

impl<const A: usize> Codeword<A> {
    pub fn frobenius_sqr(&self) -> f64 {
        self.entries.frobenius_sqr()
    }

    /// `column1^H column2`.
    pub fn column_inner(&self) -> C64 {
        self.entries.col(0).dot(&self.entries.col(1))
    }
}

/// Golden-ratio constants and the unitary block-diagonal generator `G`
/// mapping `s = [s1, s2, s3, s4]` to `x = [X1(1), X2(2), X1(2), X2(1)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GoldenGenerator {
    pub theta: f64,
    pub theta_bar: f64,
    pub alpha: C64,
    pub alpha_bar: C64,
    pub sin_phi: f64,
    pub cos_phi: f64,
    pub psi_alpha: f64,
    pub psi_alpha_bar: f64,
    /// Row phases of `G`, recovered from the constructed blocks.
    pub phases: [C64; 4],
    pub g1: CMat<2, 2>,
    pub g2: CMat<2, 2>,
}

impl GoldenGenerator {
    pub fn new() -> Self {
        let sqrt5 = 5f64.sqrt();
        let theta = (1.0 + sqrt5) / 2.0;
        let theta_bar = (1.0 - sqrt5) / 2.0;
        let alpha = C64::new(1.0, theta_bar);
        let alpha_bar = C64::new(1.0, theta);
        let norm = 1.0 + theta_bar * theta_bar;
        let sin_phi = 1.0 / norm.sqrt();
        let cos_phi = -theta_bar / norm.sqrt();

        // Read the blocks straight off the codeword definition:
        //   X1(1) = α(s1 + θ s2)/√5,   X2(2) = ᾱ(s1 + θ̄ s2)/√5,
        //   X1(2) = α(s3 + θ s4)/√5,   X2(1) = iᾱ(s3 + θ̄ s4)/√5.
        let g1 = CMat([
            [alpha / sqrt5, alpha * theta / sqrt5],
            [alpha_bar / sqrt5, alpha_bar * theta_bar / sqrt5],
        ]);
        let g2 = CMat([
            [alpha / sqrt5, alpha * theta / sqrt5],
            [I * alpha_bar / sqrt5, I * alpha_bar * theta_bar / sqrt5],
        ]);
        let phases = [
            g1[(0, 0)] / cos_phi,
            g1[(1, 1)] / cos_phi,
            g2[(0, 0)] / cos_phi,
            g2[(1, 1)] / cos_phi,
        ];

        GoldenGenerator {
            theta,
            theta_bar,
            alpha,
            alpha_bar,
            sin_phi,
            cos_phi,
            psi_alpha: theta_bar.atan(),
            psi_alpha_bar: theta.atan(),
            phases,
            g1,
            g2,
        }
    }

    /// The row phases as they appear in the usual rotation form of `G`, with
    /// `φ4 = e^{i(ψ_ᾱ + π)}`. That `φ4` does not reproduce the factor `i` on
    /// `X2(1)`; [`Self::phases`] holds the consistent value
    /// `e^{i(ψ_ᾱ - π/2)}` and [`Self::matrix`] is built from it.
    pub fn printed_phases(&self) -> [C64; 4] {
        let a = C64::from_polar(1.0, self.psi_alpha);
        let b = C64::from_polar(1.0, self.psi_alpha_bar + PI);
        [a, b, a, b]
    }

    /// `G = diag(G1, G2)`.
    pub fn matrix(&self) -> CMat<4, 4> {
        CMat::block_diag(&self.g1, &self.g2)
    }

    pub fn apply(&self, s: &CVec<4>) -> CVec<4> {
        let (u, v) = s.split();
        CVec::join(&self.g1.mul_vec(&u), &self.g2.mul_vec(&v))
    }
}

impl Default for GoldenGenerator {
    fn default() -> Self {
        Self::new()
    }
}

pub fn generator_matrix() -> GoldenGenerator {
    GoldenGenerator::new()
}

struct GoldenEntries {
    x11: C64,
    x12: C64,
    x21: C64,
    x22: C64,
}

fn golden_entries(s: &CVec<4>) -> GoldenEntries {
    let sqrt5 = 5f64.sqrt();
    let theta = (1.0 + sqrt5) / 2.0;
    let theta_bar = (1.0 - sqrt5) / 2.0;
    let alpha = C64::new(1.0, theta_bar);
    let alpha_bar = C64::new(1.0, theta);
    GoldenEntries {
        x11: alpha * (s[0] + s[1] * theta) / sqrt5,
        x12: alpha * (s[2] + s[3] * theta) / sqrt5,
        x21: I * alpha_bar * (s[2] + s[3] * theta_bar) / sqrt5,
        x22: alpha_bar * (s[0] + s[1] * theta_bar) / sqrt5,
    }
}

/// Golden codeword `[X1(1) X1(2); X2(1) X2(2)]`.
pub fn golden_encode(s: &CVec<4>) -> Codeword<2> {
    let x = golden_entries(s);
    Codeword {
        entries: CMat([[x.x11, x.x12], [x.x21, x.x22]]),
        normalization: Normalization::Raw,
    }
}

/// The Golden codeword entries stacked as `[X1(1), X2(2), X1(2), X2(1)]`.
pub fn golden_stack(s: &CVec<4>) -> CVec<4> {
    let x = golden_entries(s);
    CVec([x.x11, x.x22, x.x12, x.x21])
}

/// The distributed 4x2 codeword.
pub fn proposed_encode(s: &CVec<4>, normalization: Normalization) -> Codeword<4> {
    let x = golden_entries(s);
    let mut entries = CMat([
        [x.x11, -x.x12.conj()],
        [x.x21, -x.x22.conj()],
        [x.x12, x.x11.conj()],
        [x.x22, x.x21.conj()],
    ]);
    if normalization == Normalization::Normalized {
        entries = entries.scale(FRAC_1_SQRT_2);
    }
    Codeword {
        entries,
        normalization,
    }
}

/// `[s1 -s2*; s2 s1*] / √2`.
pub fn alamouti_encode(s: &CVec<2>) -> Codeword<2> {
    Codeword {
        entries: CMat([[s[0], -s[1].conj()], [s[1], s[0].conj()]]).scale(FRAC_1_SQRT_2),
        normalization: Normalization::Normalized,
    }
}

/// Effective 4x4 channel of the distributed code.
///
/// With `y = [Y1(1), Y2(1), Y1(2)*, Y2(2)*]` and
/// `x = [X1(1), X2(2), X1(2), X2(1)]`, the unnormalised codeword gives
/// `y = H x + w`. Row `m` is `[h_m1, h_m4, h_m3, h_m2]`, row `m + 2` is
/// `[h_m3*, -h_m2*, -h_m1*, h_m4*]`.
pub fn effective_channel(h: &CMat<2, 4>) -> CMat<4, 4> {
    let mut out = CMat::<4, 4>::zeros();
    for m in 0..2 {
        out.0[m] = [h[(m, 0)], h[(m, 3)], h[(m, 2)], h[(m, 1)]];
        out.0[m + 2] = [
            h[(m, 2)].conj(),
            -h[(m, 1)].conj(),
            -h[(m, 0)].conj(),
            h[(m, 3)].conj(),
        ];
    }
    out
}

/// Effective channel of the Golden code sent from antennas `antennas`, with
/// `y = [Y1(1), Y2(1), Y1(2), Y2(2)]` and the same `x` ordering as above.
pub fn golden_effective_channel(h: &CMat<2, 4>, antennas: [usize; 2]) -> CMat<4, 4> {
    let [a, b] = antennas;
    let mut out = CMat::<4, 4>::zeros();
    for m in 0..2 {
        out.0[m] = [h[(m, a)], ZERO, ZERO, h[(m, b)]];
        out.0[m + 2] = [ZERO, h[(m, b)], h[(m, a)], ZERO];
    }
    out
}

/// Effective channel of the (unnormalised) Alamouti code sent from antennas
/// `antennas`, with `y = [Y1(1), Y2(1), Y1(2)*, Y2(2)*]`.
pub fn alamouti_effective_channel(h: &CMat<2, 4>, antennas: [usize; 2]) -> CMat<4, 2> {
    let [a, b] = antennas;
    let mut out = CMat::<4, 2>::zeros();
    for m in 0..2 {
        out.0[m] = [h[(m, a)], h[(m, b)]];
        out.0[m + 2] = [h[(m, b)].conj(), -h[(m, a)].conj()];
    }
    out
}

/// Receive matrix `Y = h C` (rows: receive antennas, columns: slots).
pub fn propagate<const A: usize>(h: &CMat<2, A>, codeword: &CMat<A, 2>) -> CMat<2, 2> {
    h.mul_mat(codeword)
}

/// Restricts a 2x4 channel to the given pair of transmit antennas.
pub fn subchannel(h: &CMat<2, 4>, antennas: [usize; 2]) -> CMat<2, 2> {
    CMat(std::array::from_fn(|m| [h[(m, antennas[0])], h[(m, antennas[1])]]))
}

/// Slot-major flattening `[Y1(1), Y2(1), Y1(2), Y2(2)]`.
pub fn flatten_slots(y: &CMat<2, 2>) -> CVec<4> {
    CVec([y[(0, 0)], y[(1, 0)], y[(0, 1)], y[(1, 1)]])
}

/// `[Y1(1), Y2(1), Y1(2)*, Y2(2)*]` from a slot-major flattening.
pub fn conjugate_second_slot(y: &CVec<4>) -> CVec<4> {
    CVec([y[0], y[1], y[2].conj(), y[3].conj()])
}

/// Lifts symbol indices to the symbol vector.
pub fn symbols_from_indices<const N: usize>(points: &[C64], indices: &[usize; N]) -> CVec<N> {
    CVec(indices.map(|k| points[k]))
}
