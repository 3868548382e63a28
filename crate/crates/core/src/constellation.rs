//! Square QAM alphabets with reflected-binary Gray labels.
//!
//! Points are indexed geometrically: index `k = i * L + q`, where `i` and `q`
//! are the in-phase and quadrature level indices (0 = most negative) and `L`
//! is the number of levels per axis. The label of point `k` concatenates the
//! Gray codes of `i` (high bits) and `q` (low bits).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstellationKind {
    Qpsk,
    Qam16,
    Qam64,
}

impl ConstellationKind {
    pub fn order(self) -> usize {
        match self {
            ConstellationKind::Qpsk => 4,
            ConstellationKind::Qam16 => 16,
            ConstellationKind::Qam64 => 64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConstellationKind::Qpsk => "qpsk",
            ConstellationKind::Qam16 => "qam16",
            ConstellationKind::Qam64 => "qam64",
        }
    }

    pub fn build(self) -> Constellation {
        make_qam(self.order()).expect("supported order")
    }
}

impl FromStr for ConstellationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qpsk" => Ok(ConstellationKind::Qpsk),
            "qam16" => Ok(ConstellationKind::Qam16),
            "qam64" => Ok(ConstellationKind::Qam64),
            other => Err(Error::Config(format!(
                "unknown constellation {other:?} (expected qpsk, qam16 or qam64)"
            ))),
        }
    }
}

impl fmt::Display for ConstellationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A finite unit-average-energy complex alphabet with bit labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    kind: ConstellationKind,
    bits_per_symbol: usize,
    points: Vec<C64>,
    labels: Vec<u32>,
    index_of_label: Vec<usize>,
    d_min: f64,
    avg_energy: f64,
}

fn gray(x: u32) -> u32 {
    x ^ (x >> 1)
}

/// Builds Gray-labelled square `M`-QAM normalised to unit average energy.
pub fn make_qam(order: usize) -> Result<Constellation> {
    let kind = match order {
        4 => ConstellationKind::Qpsk,
        16 => ConstellationKind::Qam16,
        64 => ConstellationKind::Qam64,
        other => return Err(Error::UnsupportedOrder(other)),
    };
    let bits_per_symbol = order.trailing_zeros() as usize;
    let axis_bits = bits_per_symbol / 2;
    let levels = 1usize << axis_bits;
    // Mean energy of the odd-integer grid {±1, ±3, ...}^2 is 2(M - 1)/3.
    let scale = 1.0 / (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
    let amplitude = |level: usize| (2.0 * level as f64 - (levels as f64 - 1.0)) * scale;

    let mut points = Vec::with_capacity(order);
    let mut labels = Vec::with_capacity(order);
    for i in 0..levels {
        for q in 0..levels {
            points.push(C64::new(amplitude(i), amplitude(q)));
            labels.push((gray(i as u32) << axis_bits) | gray(q as u32));
        }
    }
    let mut index_of_label = vec![0; order];
    for (k, &label) in labels.iter().enumerate() {
        index_of_label[label as usize] = k;
    }

    let avg_energy = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
    let mut d_min = f64::INFINITY;
    for (j, a) in points.iter().enumerate() {
        for b in &points[j + 1..] {
            d_min = d_min.min((a - b).norm());
        }
    }

    Ok(Constellation {
        kind,
        bits_per_symbol,
        points,
        labels,
        index_of_label,
        d_min,
        avg_energy,
    })
}

impl Constellation {
    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> C64 {
        self.points[index]
    }

    /// Label of point `index` as an integer, most significant bit first.
    pub fn label(&self, index: usize) -> u32 {
        self.labels[index]
    }

    pub fn label_bits(&self, index: usize) -> Vec<bool> {
        let label = self.labels[index];
        (0..self.bits_per_symbol)
            .rev()
            .map(|b| (label >> b) & 1 == 1)
            .collect()
    }

    pub fn index_of_label(&self, label: u32) -> usize {
        self.index_of_label[label as usize]
    }

    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn avg_energy(&self) -> f64 {
        self.avg_energy
    }

    /// Index of the nearest point; ties go to the lowest index.
    pub fn hard_decision(&self, z: C64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (k, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_dist {
                best = k;
                best_dist = d;
            }
        }
        best
    }

    /// Groups `bits` into labels (MSB first) and maps them to point indices.
    pub fn bits_to_indices(&self, bits: &[bool]) -> Result<Vec<usize>> {
        if !bits.len().is_multiple_of(self.bits_per_symbol) {
            return Err(Error::LengthMismatch {
                len: bits.len(),
                multiple: self.bits_per_symbol,
            });
        }
        Ok(bits
            .chunks(self.bits_per_symbol)
            .map(|chunk| {
                let label = chunk.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
                self.index_of_label(label)
            })
            .collect())
    }

    pub fn bits_to_symbols(&self, bits: &[bool]) -> Result<Vec<C64>> {
        Ok(self
            .bits_to_indices(bits)?
            .into_iter()
            .map(|k| self.points[k])
            .collect())
    }

    pub fn indices_to_bits(&self, indices: &[usize]) -> Vec<bool> {
        indices.iter().flat_map(|&k| self.label_bits(k)).collect()
    }

    /// Inverse of [`Self::bits_to_symbols`]; each symbol is first snapped to
    /// its nearest point.
    pub fn symbols_to_bits(&self, symbols: &[C64]) -> Vec<bool> {
        symbols
            .iter()
            .flat_map(|&z| self.label_bits(self.hard_decision(z)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force_d_min(points: &[C64]) -> f64 {
        let mut best = f64::INFINITY;
        for a in points {
            for b in points {
                if a != b {
                    best = best.min((a - b).norm());
                }
            }
        }
        best
    }

    #[test]
    fn qpsk_geometry() {
        let c = make_qam(4).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for p in c.points() {
            assert!((p.re.abs() - r).abs() < 1e-15 && (p.im.abs() - r).abs() < 1e-15);
        }
        assert!((c.d_min() - 2f64.sqrt()).abs() < 1e-12);
        assert!((brute_force_d_min(c.points()) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn qam16_scaling() {
        let c = make_qam(16).unwrap();
        assert!((c.avg_energy() - 1.0).abs() < 1e-12);
        let expected = 2.0 / 10f64.sqrt();
        assert!((c.d_min() - expected).abs() < 1e-12);
        assert!((brute_force_d_min(c.points()) - expected).abs() < 1e-12);
    }

    #[test]
    fn normalisation_and_distinct_points() {
        for m in [4, 16, 64] {
            let c = make_qam(m).unwrap();
            assert_eq!(c.order(), m);
            assert!((c.avg_energy() - 1.0).abs() < 1e-12);
            assert!((c.d_min() - brute_force_d_min(c.points())).abs() < 1e-12);
            assert!(c.d_min() > 0.0);
            let mut labels: Vec<u32> = (0..m).map(|k| c.label(k)).collect();
            labels.sort_unstable();
            labels.dedup();
            assert_eq!(labels.len(), m);
        }
    }

    #[test]
    fn unsupported_orders() {
        for m in [0, 2, 8, 32, 256] {
            assert!(matches!(make_qam(m), Err(Error::UnsupportedOrder(o)) if o == m));
        }
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        for m in [4, 16, 64] {
            let c = make_qam(m).unwrap();
            let step = c.d_min();
            for j in 0..m {
                for k in 0..m {
                    let d = c.point(j) - c.point(k);
                    let horizontal_or_vertical = (d.norm() - step).abs() < 1e-9
                        && (d.re.abs() < 1e-9 || d.im.abs() < 1e-9);
                    if horizontal_or_vertical {
                        assert_eq!((c.label(j) ^ c.label(k)).count_ones(), 1, "m={m} {j} {k}");
                    }
                }
            }
        }
    }

    #[test]
    fn hard_decision_examples() {
        let qpsk = make_qam(4).unwrap();
        assert_eq!(qpsk.hard_decision(qpsk.point(3)), 3);
        assert_eq!(qpsk.hard_decision(C64::new(0.0, 0.0)), 0);

        // Brute-forced: p2 and p5 of 16-QAM are diagonal neighbours, so a
        // point 49% of the way from p2 to p5 stays in p2's cell.
        let qam = make_qam(16).unwrap();
        let z = qam.point(2) + (qam.point(5) - qam.point(2)) * 0.49;
        let oracle = (0..16)
            .min_by(|&a, &b| (z - qam.point(a)).norm().total_cmp(&(z - qam.point(b)).norm()))
            .unwrap();
        assert_eq!(oracle, 2);
        assert_eq!(qam.hard_decision(z), 2);
    }

    #[test]
    fn hard_decision_matches_brute_force_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in [4, 16, 64] {
            let c = make_qam(m).unwrap();
            for _ in 0..10_000 {
                let z = C64::new(rng.random_range(-1.6..1.6), rng.random_range(-1.6..1.6));
                let mut best = 0;
                for k in 1..m {
                    if (z - c.point(k)).norm() < (z - c.point(best)).norm() {
                        best = k;
                    }
                }
                assert_eq!(c.hard_decision(z), best);
            }
        }
    }

    #[test]
    fn hard_decision_is_idempotent_on_points() {
        for m in [4, 16, 64] {
            let c = make_qam(m).unwrap();
            for k in 0..m {
                assert_eq!(c.hard_decision(c.point(k)), k);
            }
        }
    }

    #[test]
    fn bits_to_symbols_edges() {
        let c = make_qam(4).unwrap();
        assert!(c.bits_to_symbols(&[]).unwrap().is_empty());
        assert!(matches!(
            c.bits_to_symbols(&[true, false, true]),
            Err(Error::LengthMismatch { len: 3, multiple: 2 })
        ));
        for k in 0..4 {
            assert_eq!(c.bits_to_symbols(&c.label_bits(k)).unwrap(), vec![c.point(k)]);
        }
    }

    #[test]
    fn qpsk_two_symbol_round_trip_exhaustive() {
        let c = make_qam(4).unwrap();
        for word in 0u32..16 {
            let bits: Vec<bool> = (0..4).rev().map(|b| (word >> b) & 1 == 1).collect();
            let symbols = c.bits_to_symbols(&bits).unwrap();
            assert_eq!(symbols.len(), 2);
            assert_eq!(c.symbols_to_bits(&symbols), bits);
        }
    }

    #[test]
    fn names_parse() {
        for kind in [ConstellationKind::Qpsk, ConstellationKind::Qam16, ConstellationKind::Qam64] {
            assert_eq!(kind.name().parse::<ConstellationKind>().unwrap(), kind);
        }
        assert!("8psk".parse::<ConstellationKind>().is_err());
    }

    proptest! {
        #[test]
        fn bits_round_trip(order in prop::sample::select(vec![4usize, 16, 64]), raw in prop::collection::vec(any::<bool>(), 0..96)) {
            let c = make_qam(order).unwrap();
            let n = raw.len() - raw.len() % c.bits_per_symbol();
            let bits = &raw[..n];
            let symbols = c.bits_to_symbols(bits).unwrap();
            prop_assert_eq!(c.symbols_to_bits(&symbols), bits.to_vec());
        }
    }
}
