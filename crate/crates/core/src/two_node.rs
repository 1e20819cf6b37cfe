//! Bidirectional full-duplex link between two nodes.
//!
//! Each node transmits with a precoder and receives with a combiner while its
//! own transmission leaks into its receiver through an SI channel. The sum
//! rate (base-2 logs, bits/s/Hz) and its Wirtinger gradients are exposed
//! together with the interference-free SVD upper bound.

use std::f64::consts::LN_2;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::{CVector, C64};

/// Per-node power triple: transmit power, SI leakage power, noise variance.
/// All linear scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkPowers {
    pub rho: f64,
    pub tau: f64,
    pub sigma2: f64,
}

impl LinkPowers {
    pub fn new(rho: f64, tau: f64, sigma2: f64) -> Result<Self> {
        let powers_ok = rho.is_finite() && rho >= 0.0 && tau.is_finite() && tau >= 0.0;
        if !powers_ok {
            return Err(Error::InvalidConfig(format!(
                "powers must be >= 0, got rho={rho}, tau={tau}"
            )));
        }
        let noise_ok = sigma2.is_finite() && sigma2 > 0.0;
        if !noise_ok {
            return Err(Error::InvalidConfig(format!(
                "noise variance must be > 0, got {sigma2}"
            )));
        }
        Ok(Self { rho, tau, sigma2 })
    }
}

/// The two-node scenario: cross channels `h12`/`h21`, SI channels
/// `h11`/`h22`, and one power triple per node.
#[derive(Debug, Clone)]
pub struct TwoNodeScenario {
    pub h12: ChannelMatrix,
    pub h21: ChannelMatrix,
    pub h11: ChannelMatrix,
    pub h22: ChannelMatrix,
    pub powers: [LinkPowers; 2],
}

/// Signal/interference products shared by the rate and gradient paths of
/// one receive side.
struct LinkTerms {
    /// Received signal vector `H f` for the wanted stream.
    signal: CVector,
    /// Received SI vector `H_si f_own`.
    leak: CVector,
    /// `w^H signal`.
    g: C64,
    /// `w^H leak`.
    h: C64,
    /// Denominator `sigma2 ||w||^2 + tau |h|^2`.
    denom: f64,
    /// `denom + rho |g|^2`.
    total: f64,
}

fn link_terms(
    cross: &ChannelMatrix,
    si: &ChannelMatrix,
    f_wanted: &CVector,
    f_own: &CVector,
    w: &CVector,
    p: &LinkPowers,
) -> LinkTerms {
    let signal = &cross.entries * f_wanted;
    let leak = &si.entries * f_own;
    let g = w.dotc(&signal);
    let h = w.dotc(&leak);
    let denom = p.sigma2 * w.norm_squared() + p.tau * h.norm_sqr();
    let total = denom + p.rho * g.norm_sqr();
    LinkTerms { signal, leak, g, h, denom, total }
}

impl TwoNodeScenario {
    /// Validates the mutual dimension consistency of the four channels.
    pub fn new(
        h12: ChannelMatrix,
        h21: ChannelMatrix,
        h11: ChannelMatrix,
        h22: ChannelMatrix,
        powers: [LinkPowers; 2],
    ) -> Result<Self> {
        // Node 1 has h11: n_rx1 x n_tx1; node 2 has h22: n_rx2 x n_tx2.
        let (rx1, tx1) = (h11.n_rx(), h11.n_tx());
        let (rx2, tx2) = (h22.n_rx(), h22.n_tx());
        if h21.n_rx() != rx1 || h21.n_tx() != tx2 {
            return Err(Error::DimensionMismatch(format!(
                "h21 is {}x{}, expected {rx1}x{tx2}",
                h21.n_rx(),
                h21.n_tx()
            )));
        }
        if h12.n_rx() != rx2 || h12.n_tx() != tx1 {
            return Err(Error::DimensionMismatch(format!(
                "h12 is {}x{}, expected {rx2}x{tx1}",
                h12.n_rx(),
                h12.n_tx()
            )));
        }
        Ok(Self { h12, h21, h11, h22, powers })
    }

    fn check_vectors(&self, f1: &CVector, f2: &CVector, w1: &CVector, w2: &CVector) -> Result<()> {
        let checks = [
            ("f1", f1.len(), self.h11.n_tx()),
            ("f2", f2.len(), self.h22.n_tx()),
            ("w1", w1.len(), self.h11.n_rx()),
            ("w2", w2.len(), self.h22.n_rx()),
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

    fn terms(&self, f1: &CVector, f2: &CVector, w1: &CVector, w2: &CVector) -> (LinkTerms, LinkTerms) {
        let t1 = link_terms(&self.h21, &self.h11, f2, f1, w1, &self.powers[0]);
        let t2 = link_terms(&self.h12, &self.h22, f1, f2, w2, &self.powers[1]);
        (t1, t2)
    }

    /// Per-receive-side rates in bits/s/Hz: `(rate at node 1, rate at node 2)`.
    pub fn link_rates(
        &self,
        f1: &CVector,
        f2: &CVector,
        w1: &CVector,
        w2: &CVector,
    ) -> Result<(f64, f64)> {
        self.check_vectors(f1, f2, w1, w2)?;
        let (t1, t2) = self.terms(f1, f2, w1, w2);
        Ok(((t1.total / t1.denom).log2(), (t2.total / t2.denom).log2()))
    }

    /// Sum rate in bits/s/Hz; non-negative and finite for valid powers.
    pub fn sum_rate(&self, f1: &CVector, f2: &CVector, w1: &CVector, w2: &CVector) -> Result<f64> {
        let (r1, r2) = self.link_rates(f1, f2, w1, w2)?;
        Ok(r1 + r2)
    }

    /// Wirtinger gradients of the sum rate with respect to the conjugates of
    /// `f1`, `f2`, `w1`, `w2`, in that order.
    pub fn gradients(
        &self,
        f1: &CVector,
        f2: &CVector,
        w1: &CVector,
        w2: &CVector,
    ) -> Result<[CVector; 4]> {
        self.check_vectors(f1, f2, w1, w2)?;
        let (t1, t2) = self.terms(f1, f2, w1, w2);
        let [p1, p2] = [&self.powers[0], &self.powers[1]];
        let inv_ln2 = 1.0 / LN_2;

        // d/d conj(w): the signal and noise-plus-SI terms appear in the
        // total, only the latter in the denominator.
        let grad_w = |w: &CVector, t: &LinkTerms, p: &LinkPowers| -> CVector {
            let noise_si = w.scale(p.sigma2) + t.leak.clone() * (t.h.conj() * p.tau);
            let full = &noise_si + t.signal.clone() * (t.g.conj() * p.rho);
            (full.unscale(t.total) - noise_si.unscale(t.denom)).scale(inv_ln2)
        };
        let gw1 = grad_w(w1, &t1, p1);
        let gw2 = grad_w(w2, &t2, p2);

        // d/d conj(f_u): own-SI leakage enters link u (total and denominator,
        // with opposite signs), the wanted-signal term enters the other link.
        let grad_f = |si: &ChannelMatrix,
                      cross: &ChannelMatrix,
                      w_own: &CVector,
                      w_other: &CVector,
                      t_own: &LinkTerms,
                      t_other: &LinkTerms,
                      p_own: &LinkPowers,
                      p_other: &LinkPowers|
         -> CVector {
            let si_dir = si.entries.ad_mul(w_own);
            let cross_dir = cross.entries.ad_mul(w_other);
            let leak_scale = t_own.h * p_own.tau * (1.0 / t_own.total - 1.0 / t_own.denom);
            let signal_scale = t_other.g * (p_other.rho / t_other.total);
            (si_dir * leak_scale + cross_dir * signal_scale).scale(inv_ln2)
        };
        let gf1 = grad_f(&self.h11, &self.h12, w1, w2, &t1, &t2, p1, p2);
        let gf2 = grad_f(&self.h22, &self.h21, w2, w1, &t2, &t1, p2, p1);

        Ok([gf1, gf2, gw1, gw2])
    }

    /// Interference-free benchmark: `log2(1 + lam12^2 rho1/sigma2_2) +
    /// log2(1 + lam21^2 rho2/sigma2_1)` with `lam` the top singular values
    /// of the cross channels.
    pub fn upper_bound(&self) -> f64 {
        let l12 = self.h12.max_singular_value();
        let l21 = self.h21.max_singular_value();
        let snr1 = self.powers[0].rho / self.powers[1].sigma2;
        let snr2 = self.powers[1].rho / self.powers[0].sigma2;
        (1.0 + l12 * l12 * snr1).log2() + (1.0 + l21 * l21 * snr2).log2()
    }

    /// Objective closure over `[f1, f2, w1, w2]` for the ascent driver.
    /// Dimensions must already be consistent.
    pub fn objective(&self) -> impl Fn(&[CVector]) -> f64 + '_ {
        move |x| {
            let (t1, t2) = self.terms(&x[0], &x[1], &x[2], &x[3]);
            (t1.total / t1.denom).log2() + (t2.total / t2.denom).log2()
        }
    }

    /// Gradient closure over `[f1, f2, w1, w2]` for the ascent driver.
    pub fn gradient(&self) -> impl Fn(&[CVector]) -> Vec<CVector> + '_ {
        move |x| {
            self.gradients(&x[0], &x[1], &x[2], &x[3])
                .expect("dimensions validated by caller")
                .into()
        }
    }
}
