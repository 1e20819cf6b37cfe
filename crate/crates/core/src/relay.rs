//! Dual-hop link through a full-duplex relay.
//!
//! An uplink UE transmits to the relay while the relay simultaneously
//! transmits to a downlink UE; the relay's own transmission leaks into its
//! receiver through an SI channel. Uplink and downlink rates are evaluated
//! independently. Half-duplex operation removes the SI term and halves both
//! rates (time sharing); hybrid duplex mixes the two modes linearly in the
//! time fraction spent in full duplex.

use std::f64::consts::LN_2;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::CVector;

/// Relay operating mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DuplexMode {
    FullDuplex,
    HalfDuplex,
    /// Fraction of time spent in full duplex, in `[0, 1]`.
    Hybrid(f64),
}

impl DuplexMode {
    pub fn validate(&self) -> Result<()> {
        if let DuplexMode::Hybrid(a) = self {
            if !(0.0..=1.0).contains(a) {
                return Err(Error::InvalidConfig(format!(
                    "hybrid fraction must lie in [0, 1], got {a}"
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            DuplexMode::FullDuplex => "fd",
            DuplexMode::HalfDuplex => "hd",
            DuplexMode::Hybrid(_) => "hybrid",
        }
    }
}

/// Relay scenario: uplink channel (UE to relay), downlink channel (relay to
/// UE), the relay SI channel, and linear-scale powers.
#[derive(Debug, Clone)]
pub struct RelayScenario {
    pub h_u: ChannelMatrix,
    pub h_d: ChannelMatrix,
    pub h_si: ChannelMatrix,
    /// Uplink UE transmit power.
    pub rho_u: f64,
    /// Relay SI leakage power.
    pub tau_u: f64,
    /// Relay transmit power.
    pub rho_d: f64,
    /// Shared noise variance.
    pub sigma2: f64,
}

impl RelayScenario {
    pub fn new(
        h_u: ChannelMatrix,
        h_d: ChannelMatrix,
        h_si: ChannelMatrix,
        rho_u: f64,
        tau_u: f64,
        rho_d: f64,
        sigma2: f64,
    ) -> Result<Self> {
        if h_si.n_rx() != h_u.n_rx() {
            return Err(Error::DimensionMismatch(format!(
                "relay RX arrays disagree: h_si has {}, h_u has {}",
                h_si.n_rx(),
                h_u.n_rx()
            )));
        }
        if h_si.n_tx() != h_d.n_tx() {
            return Err(Error::DimensionMismatch(format!(
                "relay TX arrays disagree: h_si has {}, h_d has {}",
                h_si.n_tx(),
                h_d.n_tx()
            )));
        }
        let powers_ok = [rho_u, tau_u, rho_d].iter().all(|p| p.is_finite() && *p >= 0.0);
        if !powers_ok {
            return Err(Error::InvalidConfig("powers must be >= 0".into()));
        }
        let noise_ok = sigma2.is_finite() && sigma2 > 0.0;
        if !noise_ok {
            return Err(Error::InvalidConfig(format!(
                "noise variance must be > 0, got {sigma2}"
            )));
        }
        Ok(Self { h_u, h_d, h_si, rho_u, tau_u, rho_d, sigma2 })
    }

    /// The same scenario with the SI leakage removed; the half-duplex phases
    /// are optimized against this.
    pub fn without_si(&self) -> Self {
        Self { tau_u: 0.0, ..self.clone() }
    }

    fn check_vectors(
        &self,
        f_ue: &CVector,
        f_r: &CVector,
        w_r: &CVector,
        w_d: &CVector,
    ) -> Result<()> {
        let checks = [
            ("f_ue", f_ue.len(), self.h_u.n_tx()),
            ("f_r", f_r.len(), self.h_si.n_tx()),
            ("w_r", w_r.len(), self.h_si.n_rx()),
            ("w_d", w_d.len(), self.h_d.n_rx()),
        ];
        for (name, got, want) in checks {
            if got != want {
                return Err(Error::DimensionMismatch(format!(
                    "{name} has length {got}, expected {want}"
                )));
            }
        }
        Ok(())
    }

    fn rates_unchecked(&self, f_ue: &CVector, f_r: &CVector, w_r: &CVector, w_d: &CVector) -> (f64, f64) {
        let g_u = w_r.dotc(&(&self.h_u.entries * f_ue));
        let h_si = w_r.dotc(&(&self.h_si.entries * f_r));
        let denom_u = self.tau_u * h_si.norm_sqr() + self.sigma2 * w_r.norm_squared();
        let uplink = (1.0 + self.rho_u * g_u.norm_sqr() / denom_u).log2();

        let g_d = w_d.dotc(&(&self.h_d.entries * f_r));
        let downlink = (1.0 + self.rho_d * g_d.norm_sqr() / (self.sigma2 * w_d.norm_squared())).log2();
        (uplink, downlink)
    }

    /// Full-duplex `(uplink, downlink)` rates in bits/s/Hz.
    pub fn rates(
        &self,
        f_ue: &CVector,
        f_r: &CVector,
        w_r: &CVector,
        w_d: &CVector,
    ) -> Result<(f64, f64)> {
        self.check_vectors(f_ue, f_r, w_r, w_d)?;
        Ok(self.rates_unchecked(f_ue, f_r, w_r, w_d))
    }

    /// Wirtinger gradients of uplink + downlink with respect to the
    /// conjugates of `f_ue`, `f_r`, `w_r`, `w_d`, in that order.
    ///
    /// `f_r` couples both terms: it carries the downlink signal and the
    /// uplink interference.
    pub fn gradients(
        &self,
        f_ue: &CVector,
        f_r: &CVector,
        w_r: &CVector,
        w_d: &CVector,
    ) -> Result<[CVector; 4]> {
        self.check_vectors(f_ue, f_r, w_r, w_d)?;
        let inv_ln2 = 1.0 / LN_2;

        let signal_u = &self.h_u.entries * f_ue;
        let leak = &self.h_si.entries * f_r;
        let g_u = w_r.dotc(&signal_u);
        let h_si = w_r.dotc(&leak);
        let denom_u = self.sigma2 * w_r.norm_squared() + self.tau_u * h_si.norm_sqr();
        let total_u = denom_u + self.rho_u * g_u.norm_sqr();

        let signal_d = &self.h_d.entries * f_r;
        let g_d = w_d.dotc(&signal_d);
        let denom_d = self.sigma2 * w_d.norm_squared();
        let total_d = denom_d + self.rho_d * g_d.norm_sqr();

        // Uplink combiner.
        let noise_si = w_r.scale(self.sigma2) + leak.clone() * (h_si.conj() * self.tau_u);
        let full = &noise_si + signal_u.clone() * (g_u.conj() * self.rho_u);
        let gw_r = (full.unscale(total_u) - noise_si.unscale(denom_u)).scale(inv_ln2);

        // Uplink precoder: signal term only.
        let gf_ue = (self.h_u.entries.ad_mul(w_r) * (g_u * (self.rho_u / total_u))).scale(inv_ln2);

        // Relay precoder: downlink signal plus uplink interference.
        let leak_scale = h_si * self.tau_u * (1.0 / total_u - 1.0 / denom_u);
        let signal_scale = g_d * (self.rho_d / total_d);
        let gf_r = (self.h_si.entries.ad_mul(w_r) * leak_scale
            + self.h_d.entries.ad_mul(w_d) * signal_scale)
            .scale(inv_ln2);

        // Downlink combiner.
        let gw_d = ((w_d.scale(self.sigma2) + signal_d.clone() * (g_d.conj() * self.rho_d))
            .unscale(total_d)
            - w_d.scale(self.sigma2 / denom_d))
        .scale(inv_ln2);

        Ok([gf_ue, gf_r, gw_r, gw_d])
    }

    /// Objective closure over `[f_ue, f_r, w_r, w_d]` for the ascent driver.
    pub fn objective(&self) -> impl Fn(&[CVector]) -> f64 + '_ {
        move |x| {
            let (up, down) = self.rates_unchecked(&x[0], &x[1], &x[2], &x[3]);
            up + down
        }
    }

    /// Gradient closure over `[f_ue, f_r, w_r, w_d]` for the ascent driver.
    pub fn gradient(&self) -> impl Fn(&[CVector]) -> Vec<CVector> + '_ {
        move |x| {
            self.gradients(&x[0], &x[1], &x[2], &x[3])
                .expect("dimensions validated by caller")
                .into()
        }
    }
}

/// Beamformer set for one relay optimization run, in ascent order.
#[derive(Debug, Clone)]
pub struct RelayVectors {
    pub f_ue: CVector,
    pub f_r: CVector,
    pub w_r: CVector,
    pub w_d: CVector,
}

impl RelayVectors {
    pub fn from_slice(x: &[CVector]) -> Self {
        Self { f_ue: x[0].clone(), f_r: x[1].clone(), w_r: x[2].clone(), w_d: x[3].clone() }
    }
}

/// `(uplink, downlink)` rates for one operating mode.
///
/// `fd` carries vectors optimized with the SI present, `hd` vectors
/// optimized without it; half-duplex rates drop the SI term and halve both
/// components, hybrid rates combine the two modes linearly.
pub fn mode_rates(
    s: &RelayScenario,
    mode: DuplexMode,
    fd: &RelayVectors,
    hd: &RelayVectors,
) -> Result<(f64, f64)> {
    mode.validate()?;
    match mode {
        DuplexMode::FullDuplex => s.rates(&fd.f_ue, &fd.f_r, &fd.w_r, &fd.w_d),
        DuplexMode::HalfDuplex => {
            let (up, down) = s.without_si().rates(&hd.f_ue, &hd.f_r, &hd.w_r, &hd.w_d)?;
            Ok((0.5 * up, 0.5 * down))
        }
        DuplexMode::Hybrid(alpha) => {
            let (fd_up, fd_down) = mode_rates(s, DuplexMode::FullDuplex, fd, hd)?;
            let (hd_up, hd_down) = mode_rates(s, DuplexMode::HalfDuplex, fd, hd)?;
            Ok((
                alpha * fd_up + (1.0 - alpha) * hd_up,
                alpha * fd_down + (1.0 - alpha) * hd_down,
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{
        sample_geometric_channel, sample_si_channel, ArrayGeometry, ChannelKind, ClusterParams,
        RicianParams,
    };
    use crate::optimizer::{finite_difference_gradient, init_gaussian, init_svd, Constraint};
    use crate::{C64, CMatrix, CVector};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scenario(seed: u64, relay_n: usize, ue_tx: usize, ue_rx: usize, rho: f64, tau: f64) -> RelayScenario {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let clusters = ClusterParams::default();
        let up_geom = ArrayGeometry::new(ue_tx, relay_n, 0.5, 2.0, 0.5).unwrap();
        let down_geom = ArrayGeometry::new(relay_n, ue_rx, 0.5, 2.0, 0.5).unwrap();
        let si_geom = ArrayGeometry::new(relay_n, relay_n, 0.5, 2.0, 0.5).unwrap();
        let h_u = sample_geometric_channel(&up_geom, &clusters, &mut rng);
        let h_d = sample_geometric_channel(&down_geom, &clusters, &mut rng);
        let h_si = sample_si_channel(&si_geom, &RicianParams::default(), &mut rng).unwrap();
        RelayScenario::new(h_u, h_d, h_si, rho, tau, rho, 1.0).unwrap()
    }

    fn vectors(seed: u64, s: &RelayScenario) -> RelayVectors {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RelayVectors {
            f_ue: init_gaussian(s.h_u.n_tx(), Constraint::UnitNorm, &mut rng).coeffs,
            f_r: init_gaussian(s.h_si.n_tx(), Constraint::UnitNorm, &mut rng).coeffs,
            w_r: init_gaussian(s.h_si.n_rx(), Constraint::UnitNorm, &mut rng).coeffs,
            w_d: init_gaussian(s.h_d.n_rx(), Constraint::UnitNorm, &mut rng).coeffs,
        }
    }

    fn one() -> CVector {
        CVector::from_element(1, C64::new(1.0, 0.0))
    }

    #[test]
    fn unity_gains_give_one_bit_each() {
        let unit_matrix = |kind| ChannelMatrix { entries: CMatrix::identity(1, 1), kind };
        let s = RelayScenario::new(
            unit_matrix(ChannelKind::Propagation),
            unit_matrix(ChannelKind::Propagation),
            unit_matrix(ChannelKind::SelfInterference),
            1.0,
            0.0,
            1.0,
            1.0,
        )
        .unwrap();
        let (up, down) = s.rates(&one(), &one(), &one(), &one()).unwrap();
        assert_relative_eq!(up, 1.0, epsilon = 1e-12);
        assert_relative_eq!(down, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn nulled_relay_precoder_removes_interference() {
        let s = scenario(31, 4, 2, 1, 2.0, 5.0);
        let mut v = vectors(32, &s);
        // Put f_r in the null space of w_r^H H_si (project out the row).
        let row = s.h_si.entries.ad_mul(&v.w_r);
        let coef = row.dotc(&v.f_r) / C64::new(row.norm_squared(), 0.0);
        v.f_r -= row * coef;
        v.f_r = v.f_r.clone().unscale(v.f_r.norm());
        let (up, _) = s.rates(&v.f_ue, &v.f_r, &v.w_r, &v.w_d).unwrap();
        let (up_free, _) = s.without_si().rates(&v.f_ue, &v.f_r, &v.w_r, &v.w_d).unwrap();
        assert_relative_eq!(up, up_free, epsilon = 1e-10);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let s = scenario(7, 4, 2, 2, 1.8, 0.9);
        let v = vectors(8, &s);
        let point = [v.f_ue, v.f_r, v.w_r, v.w_d];
        let analytic = s.gradients(&point[0], &point[1], &point[2], &point[3]).unwrap();
        let numeric = finite_difference_gradient(s.objective(), &point, 1e-6);
        for (a, n) in analytic.iter().zip(&numeric) {
            let rel = (a - n).norm() / n.norm();
            assert!(rel < 1e-6, "relative error {rel}");
        }
    }

    #[test]
    fn relay_precoder_gradient_decouples_without_si() {
        let s = scenario(11, 4, 2, 1, 1.5, 0.0);
        let v = vectors(12, &s);
        let [_, gf_r, _, _] = s.gradients(&v.f_ue, &v.f_r, &v.w_r, &v.w_d).unwrap();
        // Downlink-only term computed directly.
        let g_d = v.w_d.dotc(&(&s.h_d.entries * &v.f_r));
        let total_d = s.sigma2 * v.w_d.norm_squared() + s.rho_d * g_d.norm_sqr();
        let expect = (s.h_d.entries.ad_mul(&v.w_d) * (g_d * (s.rho_d / total_d)))
            .scale(1.0 / std::f64::consts::LN_2);
        assert!((gf_r - expect).norm() < 1e-12);
    }

    #[test]
    fn downlink_combiner_stationary_at_top_pair() {
        let s = scenario(23, 4, 2, 3, 2.0, 1.0);
        let mut v = vectors(24, &s);
        let (f_r, w_d) = init_svd(&s.h_d, Constraint::UnitNorm).unwrap();
        v.f_r = f_r.coeffs;
        v.w_d = w_d.coeffs;
        let [_, _, _, gw_d] = s.gradients(&v.f_ue, &v.f_r, &v.w_r, &v.w_d).unwrap();
        let tangential = &gw_d - &v.w_d * v.w_d.dotc(&gw_d);
        assert!(tangential.norm() < 1e-6, "tangential norm {}", tangential.norm());
    }

    #[test]
    fn uplink_rate_non_increasing_in_si_power() {
        let s = scenario(3, 4, 2, 1, 1.0, 0.5);
        let v = vectors(4, &s);
        let (up_a, down_a) = s.rates(&v.f_ue, &v.f_r, &v.w_r, &v.w_d).unwrap();
        let mut harsher = s.clone();
        harsher.tau_u = 5.0;
        let (up_b, down_b) = harsher.rates(&v.f_ue, &v.f_r, &v.w_r, &v.w_d).unwrap();
        assert!(up_b <= up_a);
        assert_relative_eq!(down_a, down_b, epsilon = 1e-14);
    }

    #[test]
    fn downlink_independent_of_uplink_side() {
        let s = scenario(17, 4, 2, 1, 1.0, 2.0);
        let v = vectors(18, &s);
        let (_, down_a) = s.rates(&v.f_ue, &v.f_r, &v.w_r, &v.w_d).unwrap();
        let other = vectors(99, &s);
        let (_, down_b) = s.rates(&other.f_ue, &v.f_r, &v.w_r, &v.w_d).unwrap();
        assert_relative_eq!(down_a, down_b, epsilon = 1e-14);
    }

    #[test]
    fn hybrid_endpoints_match_pure_modes() {
        let s = scenario(41, 4, 2, 1, 2.0, 1.0);
        let fd = vectors(42, &s);
        let hd = vectors(43, &s);
        let full = mode_rates(&s, DuplexMode::FullDuplex, &fd, &hd).unwrap();
        let half = mode_rates(&s, DuplexMode::HalfDuplex, &fd, &hd).unwrap();
        assert_eq!(mode_rates(&s, DuplexMode::Hybrid(1.0), &fd, &hd).unwrap(), full);
        assert_eq!(mode_rates(&s, DuplexMode::Hybrid(0.0), &fd, &hd).unwrap(), half);
    }

    #[test]
    fn hybrid_is_linear_in_the_fraction() {
        let s = scenario(51, 4, 2, 1, 2.0, 1.0);
        let fd = vectors(52, &s);
        let hd = vectors(53, &s);
        let full = mode_rates(&s, DuplexMode::FullDuplex, &fd, &hd).unwrap();
        let half = mode_rates(&s, DuplexMode::HalfDuplex, &fd, &hd).unwrap();
        for &alpha in &[0.25, 0.5, 0.9] {
            let (up, down) = mode_rates(&s, DuplexMode::Hybrid(alpha), &fd, &hd).unwrap();
            assert_relative_eq!(up, alpha * full.0 + (1.0 - alpha) * half.0, epsilon = 1e-14);
            assert_relative_eq!(down, alpha * full.1 + (1.0 - alpha) * half.1, epsilon = 1e-14);
        }
    }

    #[test]
    fn hybrid_fraction_is_validated() {
        let s = scenario(61, 2, 2, 1, 1.0, 1.0);
        let v = vectors(62, &s);
        assert!(mode_rates(&s, DuplexMode::Hybrid(1.5), &v, &v).is_err());
    }
}
