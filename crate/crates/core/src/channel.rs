//! Quasi-static Rayleigh fading with per-cell receive-power imbalance.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::codes::CodeKind;
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64};

/// Amplitude gains `(g, g, g', g')` for the two cells, with
/// `20 log10(g / g') = delta_db` and `g^2 + g'^2 = 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImbalanceProfile {
    pub delta_db: f64,
    pub gains: [f64; 4],
}

impl ImbalanceProfile {
    pub fn new(delta_db: f64) -> Self {
        let ratio = 10f64.powf(delta_db / 20.0);
        let weak = (2.0 / (1.0 + ratio * ratio)).sqrt();
        let strong = ratio * weak;
        ImbalanceProfile {
            delta_db,
            gains: [strong, strong, weak, weak],
        }
    }

    pub fn balanced() -> Self {
        Self::new(0.0)
    }
}

/// Noise with variance `sigma2` per real dimension, `2 sigma2` per entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    sigma2: f64,
}

impl NoiseModel {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 >= 0.0) {
            return Err(Error::Config(format!("noise variance must be finite and >= 0, got {sigma2}")));
        }
        Ok(NoiseModel { sigma2 })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Variance of a complex noise entry.
    pub fn entry_variance(&self) -> f64 {
        2.0 * self.sigma2
    }
}

/// One 2x4 fading draw; entry `(m, n)` is the gain from transmit antenna `n`
/// to receive antenna `m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelRealization {
    pub h: CMat<2, 4>,
}

/// Circularly symmetric `CN(0, 1)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * FRAC_1_SQRT_2
}

pub fn draw_channel<R: Rng + ?Sized>(rng: &mut R, profile: &ImbalanceProfile) -> ChannelRealization {
    let mut h = CMat::<2, 4>::zeros();
    for m in 0..2 {
        for n in 0..4 {
            h[(m, n)] = complex_gaussian(rng) * profile.gains[n];
        }
    }
    ChannelRealization { h }
}

pub fn add_noise<R: Rng + ?Sized, const N: usize>(
    y_clean: &CVec<N>,
    noise: &NoiseModel,
    rng: &mut R,
) -> CVec<N> {
    let sigma = noise.sigma2.sqrt();
    let mut out = *y_clean;
    for z in out.0.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z += C64::new(re, im) * sigma;
    }
    out
}

/// Noise parameter for a per-receive-antenna SNR.
///
/// SNR is the balanced mean received signal energy per receive antenna per
/// channel use divided by the complex noise variance `2 sigma^2`. For a
/// code with unit receive energy this is `10^(-snr/10) / 2`.
pub fn snr_to_sigma2(snr_db: f64, code: CodeKind) -> f64 {
    code.rx_energy_per_channel_use() * 10f64.powf(-snr_db / 10.0) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{flatten_slots, proposed_encode, propagate, Normalization};
    use crate::constellation::make_qam;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn imbalance_profile_invariants() {
        for delta in [-20.0, -3.0, 0.0, 5.0, 10.0, 15.0, 20.0, 37.5] {
            let p = ImbalanceProfile::new(delta);
            let (g, gp) = (p.gains[0], p.gains[2]);
            assert!((20.0 * (g / gp).log10() - delta).abs() < 1e-9);
            assert!((g * g + gp * gp - 2.0).abs() < 1e-12);
            assert_eq!(p.gains[0], p.gains[1]);
            assert_eq!(p.gains[2], p.gains[3]);
        }
        assert_eq!(ImbalanceProfile::balanced().gains, [1.0; 4]);
    }

    #[test]
    fn balanced_channel_has_unit_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let mut power = [[0.0; 4]; 2];
        for _ in 0..n {
            let h = draw_channel(&mut rng, &ImbalanceProfile::balanced()).h;
            for m in 0..2 {
                for k in 0..4 {
                    power[m][k] += h[(m, k)].norm_sqr();
                }
            }
        }
        for row in power {
            for p in row {
                assert!((p / n as f64 - 1.0).abs() < 0.02);
            }
        }
    }

    #[test]
    fn imbalanced_channel_power_ratio_and_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        for delta in [0.0, 15.0] {
            let p = ImbalanceProfile::new(delta);
            let mut col_power = [0.0; 4];
            for _ in 0..n {
                let h = draw_channel(&mut rng, &p).h;
                for k in 0..4 {
                    col_power[k] += h[(0, k)].norm_sqr() / n as f64;
                }
            }
            let ratio = col_power[0] / col_power[2];
            let expected = 10f64.powf(delta / 10.0);
            assert!((ratio / expected - 1.0).abs() < 0.05, "ratio {ratio}");
            let total: f64 = col_power.iter().sum();
            assert!((total / 4.0 - 1.0).abs() < 0.02, "total {total}");
        }
    }

    #[test]
    fn seeded_draws_repeat() {
        let p = ImbalanceProfile::new(7.0);
        let a = draw_channel(&mut ChaCha8Rng::seed_from_u64(99), &p);
        let b = draw_channel(&mut ChaCha8Rng::seed_from_u64(99), &p);
        assert_eq!(a, b);
    }

    #[test]
    fn noiseless_limit_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y = CVec([C64::new(1.0, -2.0), C64::new(0.5, 0.0), C64::new(0.0, 3.0), C64::new(-1.0, 1.0)]);
        assert_eq!(add_noise(&y, &NoiseModel::new(0.0).unwrap(), &mut rng), y);
    }

    #[test]
    fn noise_model_rejects_bad_variance() {
        assert!(NoiseModel::new(-1.0).is_err());
        assert!(NoiseModel::new(f64::NAN).is_err());
    }

    #[test]
    fn noise_variance_and_circularity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let noise = NoiseModel::new(0.3).unwrap();
        let mut power = 0.0;
        let mut pseudo = C64::new(0.0, 0.0);
        let mut count = 0usize;
        for _ in 0..250_000 {
            let w = add_noise(&CVec::<4>::zeros(), &noise, &mut rng);
            for z in w.iter() {
                power += z.norm_sqr();
                pseudo += z * z;
                count += 1;
            }
        }
        let var = power / count as f64;
        assert!((var / noise.entry_variance() - 1.0).abs() < 0.01, "var {var}");
        let pseudo = pseudo / count as f64;
        assert!(pseudo.norm() < 0.01 * noise.entry_variance(), "pseudo {pseudo}");
    }

    #[test]
    fn snr_definition() {
        // Alamouti carries unit receive energy per channel use.
        assert!((snr_to_sigma2(0.0, CodeKind::Alamouti) - 0.5).abs() < 1e-15);
        assert!((snr_to_sigma2(10.0, CodeKind::Alamouti) - 0.05).abs() < 1e-15);
        assert!((snr_to_sigma2(0.0, CodeKind::Proposed) - 1.0).abs() < 1e-15);
        assert!((snr_to_sigma2(10.0, CodeKind::Proposed) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn snr_energy_accounting() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let qpsk = make_qam(4).unwrap();
        let noise = NoiseModel::new(snr_to_sigma2(10.0, CodeKind::Proposed)).unwrap();
        let (mut signal, mut noise_energy) = (0.0, 0.0);
        for _ in 0..100_000 {
            let s = CVec(std::array::from_fn(|_| qpsk.point(rng.random_range(0..4))));
            let cw = proposed_encode(&s, Normalization::Normalized).entries;
            let h = draw_channel(&mut rng, &ImbalanceProfile::balanced()).h;
            let clean = flatten_slots(&propagate(&h, &cw));
            let noisy = add_noise(&clean, &noise, &mut rng);
            signal += clean.norm_sqr();
            noise_energy += (noisy - clean).norm_sqr();
        }
        let ratio = signal / noise_energy;
        assert!((ratio / 10.0 - 1.0).abs() < 0.03, "ratio {ratio}");
    }
}
