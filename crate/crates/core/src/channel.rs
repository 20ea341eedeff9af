//! Line-of-sight THz link budget.
//!
//! The channel power gain is `Gt * Gr * (c / 4 pi f d)^2 * exp(-k_abs d)`; noise
//! is `N0 * W` per subwindow. All inputs are linear units.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::units::{db_to_linear, dbm_to_watt};

pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Radio constants shared by every link in a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    pub gt_linear: f64,
    pub gr_linear: f64,
    /// Noise power spectral density, W/Hz.
    pub n0: f64,
    /// Propagation speed, m/s.
    pub c: f64,
    /// Total transmit power budget, W.
    pub p_total: f64,
}

impl LinkParams {
    pub fn new(gt_linear: f64, gr_linear: f64, n0: f64, c: f64, p_total: f64) -> Result<Self> {
        ensure_positive("gt_linear", gt_linear)?;
        ensure_positive("gr_linear", gr_linear)?;
        ensure_positive("n0", n0)?;
        ensure_positive("c", c)?;
        ensure_positive("p_total", p_total)?;
        Ok(Self {
            gt_linear,
            gr_linear,
            n0,
            c,
            p_total,
        })
    }

    /// Builds parameters from the log-domain values radio engineers usually quote.
    pub fn from_db(gt_dbi: f64, gr_dbi: f64, n0_dbm_per_hz: f64, p_total_dbm: f64) -> Result<Self> {
        Self::new(
            db_to_linear(gt_dbi),
            db_to_linear(gr_dbi),
            dbm_to_watt(n0_dbm_per_hz),
            SPEED_OF_LIGHT,
            dbm_to_watt(p_total_dbm),
        )
    }

    pub fn with_total_power(self, p_total: f64) -> Result<Self> {
        Self::new(self.gt_linear, self.gr_linear, self.n0, self.c, p_total)
    }

    pub fn antenna_gain(&self) -> f64 {
        self.gt_linear * self.gr_linear
    }

    /// sigma^2 = N0 * W.
    pub fn noise_power(&self, bandwidth: f64) -> f64 {
        self.n0 * bandwidth
    }
}

/// The frequency-dependent part of a link: which subwindow a device sits on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Carrier {
    pub frequency: f64,
    pub k_abs: f64,
    pub bandwidth: f64,
}

impl Carrier {
    pub fn new(frequency: f64, k_abs: f64, bandwidth: f64) -> Self {
        Self {
            frequency,
            k_abs,
            bandwidth,
        }
    }

    pub fn link(&self, distance: f64, power: f64) -> Link {
        Link {
            frequency: self.frequency,
            k_abs: self.k_abs,
            distance,
            power,
            bandwidth: self.bandwidth,
        }
    }

    /// `ln(Gt Gr / sigma^2 * (c / 4 pi f)^2)`, the distance- and power-free part of
    /// the log-SNR. Kept in log space so very lossy links stay representable.
    pub fn ln_snr_scale(&self, params: &LinkParams) -> f64 {
        params.antenna_gain().ln() - params.noise_power(self.bandwidth).ln()
            + 2.0 * (params.c / (4.0 * PI * self.frequency)).ln()
    }

    /// Natural log of the SNR at `(distance, power)`.
    pub fn ln_snr(&self, distance: f64, power: f64, params: &LinkParams) -> f64 {
        power.ln() + self.ln_snr_scale(params) - self.k_abs * distance - 2.0 * distance.ln()
    }

    /// `ln(sigma^2 / |h|^2)`: the log of the inverse effective gain that water-filling
    /// works with.
    pub fn ln_inverse_gain(&self, distance: f64, params: &LinkParams) -> f64 {
        -self.ln_snr(distance, 1.0, params)
    }

    /// Rate in bps from the log-space SNR; zero power gives exactly 0.
    pub fn rate(&self, distance: f64, power: f64, params: &LinkParams) -> f64 {
        if power <= 0.0 {
            return 0.0;
        }
        self.bandwidth * spectral_efficiency(self.ln_snr(distance, power, params).exp())
    }
}

/// One transmitter-receiver pair on one subwindow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub frequency: f64,
    pub k_abs: f64,
    pub distance: f64,
    pub power: f64,
    pub bandwidth: f64,
}

impl Link {
    fn validate(&self) -> Result<()> {
        ensure_positive("frequency", self.frequency)?;
        ensure_non_negative("k_abs", self.k_abs)?;
        ensure_positive("distance", self.distance)?;
        ensure_non_negative("power", self.power)?;
        ensure_positive("bandwidth", self.bandwidth)?;
        Ok(())
    }
}

pub fn spreading_loss(frequency: f64, distance: f64, c: f64) -> Result<f64> {
    ensure_positive("frequency", frequency)?;
    ensure_positive("distance", distance)?;
    ensure_positive("c", c)?;
    let ratio = c / (4.0 * PI * frequency * distance);
    Ok(ratio * ratio)
}

pub fn absorption_loss(k_abs: f64, distance: f64) -> Result<f64> {
    ensure_non_negative("k_abs", k_abs)?;
    ensure_non_negative("distance", distance)?;
    Ok((-k_abs * distance).exp())
}

pub fn channel_gain(link: &Link, params: &LinkParams) -> Result<f64> {
    link.validate()?;
    Ok(params.antenna_gain()
        * spreading_loss(link.frequency, link.distance, params.c)?
        * absorption_loss(link.k_abs, link.distance)?)
}

pub fn path_loss_db(link: &Link, params: &LinkParams) -> Result<f64> {
    Ok(-10.0 * channel_gain(link, params)?.log10())
}

pub fn snr(link: &Link, params: &LinkParams) -> Result<f64> {
    let gain = channel_gain(link, params)?;
    Ok(link.power * gain / params.noise_power(link.bandwidth))
}

/// Achievable rate in bps: `W log2(1 + snr)`.
pub fn rate(link: &Link, params: &LinkParams) -> Result<f64> {
    Ok(link.bandwidth * snr(link, params)?.ln_1p() / std::f64::consts::LN_2)
}

/// Rate-distance product `d * R` in m*bps. Summed over devices this is the
/// transport capacity.
pub fn rate_distance_product(link: &Link, params: &LinkParams) -> Result<f64> {
    Ok(link.distance * rate(link, params)?)
}

pub fn transport_capacity<'a>(
    links: impl IntoIterator<Item = &'a Link>,
    params: &LinkParams,
) -> Result<f64> {
    links
        .into_iter()
        .map(|l| rate_distance_product(l, params))
        .sum()
}

/// Spectral efficiency `log2(1 + snr)` in bps/Hz.
pub fn spectral_efficiency(snr: f64) -> f64 {
    snr.ln_1p() / std::f64::consts::LN_2
}

/// Inverse of [`spectral_efficiency`]: the SNR needed for `bits_per_hz`.
pub fn required_snr(bits_per_hz: f64) -> f64 {
    (bits_per_hz * std::f64::consts::LN_2).exp_m1()
}

pub(crate) fn check_link_params(params: &LinkParams) -> Result<()> {
    LinkParams::new(
        params.gt_linear,
        params.gr_linear,
        params.n0,
        params.c,
        params.p_total,
    )
    .map(|_| ())
    .map_err(|e| match e {
        Error::Domain { what, value } => {
            Error::InvalidParameter(format!("link parameter {what} = {value}"))
        }
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_params() -> LinkParams {
        LinkParams::new(1.0, 1.0, 1e-20, SPEED_OF_LIGHT, 1.0).unwrap()
    }

    fn fig3_params() -> LinkParams {
        LinkParams::from_db(15.0, 15.0, -168.0, 10.0).unwrap()
    }

    #[test]
    fn spreading_loss_identity_case() {
        let f = SPEED_OF_LIGHT / (4.0 * PI);
        assert_relative_eq!(
            spreading_loss(f, 1.0, SPEED_OF_LIGHT).unwrap(),
            1.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn spreading_loss_at_500_ghz() {
        // 40-digit evaluation of (c / 4 pi f)^2 with c = 2.998e8.
        let s = spreading_loss(500e9, 1.0, SPEED_OF_LIGHT).unwrap();
        assert_relative_eq!(s, 2.276_688_009_655_166e-9, max_relative = 1e-13);
        assert_relative_eq!(
            10.0 * s.log10(),
            -86.426_964_796_917_09,
            max_relative = 1e-12
        );
        // Same expression with c = 3e8.
        let s3 = spreading_loss(500e9, 1.0, 3e8).unwrap();
        assert_relative_eq!(s3, 2.279_726_631_952_6e-9, max_relative = 1e-13);

        let s10 = spreading_loss(500e9, 10.0, SPEED_OF_LIGHT).unwrap();
        assert_relative_eq!(s10, s / 100.0, max_relative = 1e-14);
    }

    #[test]
    fn spreading_loss_rejects_bad_input() {
        assert!(spreading_loss(0.0, 1.0, SPEED_OF_LIGHT).is_err());
        assert!(spreading_loss(1e9, 0.0, SPEED_OF_LIGHT).is_err());
        assert!(spreading_loss(1e9, -1.0, SPEED_OF_LIGHT).is_err());
    }

    #[test]
    fn absorption_loss_cases() {
        assert_eq!(absorption_loss(3.7, 0.0).unwrap(), 1.0);
        assert_relative_eq!(
            absorption_loss(0.2, 10.0).unwrap(),
            (-2f64).exp(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            absorption_loss(0.2, 10.0).unwrap(),
            0.135_335_283,
            max_relative = 1e-8
        );
        assert_eq!(absorption_loss(0.0, 35.0).unwrap(), 1.0);
        assert!(absorption_loss(-0.1, 1.0).is_err());
        assert!(absorption_loss(0.1, -1.0).is_err());
    }

    #[test]
    fn channel_gain_composition() {
        let p = unit_params();
        let link = Link {
            frequency: 500e9,
            k_abs: 0.0,
            distance: 3.0,
            power: 1.0,
            bandwidth: 1e9,
        };
        assert_eq!(
            channel_gain(&link, &p).unwrap(),
            spreading_loss(500e9, 3.0, SPEED_OF_LIGHT).unwrap()
        );
        let doubled = Link {
            distance: 6.0,
            ..link
        };
        assert_relative_eq!(
            channel_gain(&doubled, &p).unwrap(),
            channel_gain(&link, &p).unwrap() / 4.0,
            max_relative = 1e-14
        );

        let fp = fig3_params();
        let link = Link {
            frequency: 500e9,
            k_abs: 0.2,
            distance: 1.0,
            power: 0.01,
            bandwidth: 1e9,
        };
        // 40-digit evaluation: spreading * e^-0.2 * 10^3.
        assert_relative_eq!(
            channel_gain(&link, &fp).unwrap(),
            1.863_994_488_668_586e-6,
            max_relative = 1e-12
        );
    }

    #[test]
    fn path_loss_identities() {
        let f = SPEED_OF_LIGHT / (4.0 * PI);
        let p = unit_params();
        let link = Link {
            frequency: f,
            k_abs: 0.0,
            distance: 1.0,
            power: 1.0,
            bandwidth: 1.0,
        };
        assert!(path_loss_db(&link, &p).unwrap().abs() < 1e-12);
        // Choose distance so that the gain is exactly 1e-9.
        let link = Link {
            distance: 10f64.powf(4.5),
            ..link
        };
        assert_relative_eq!(path_loss_db(&link, &p).unwrap(), 90.0, max_relative = 1e-12);
    }

    #[test]
    fn snr_cases() {
        let fp = fig3_params();
        let link = Link {
            frequency: 500e9,
            k_abs: 0.2,
            distance: 10.0,
            power: 0.0,
            bandwidth: 1e9,
        };
        assert_eq!(snr(&link, &fp).unwrap(), 0.0);
        let link = Link {
            power: 0.01,
            ..link
        };
        let s = snr(&link, &fp).unwrap();
        // 40-digit evaluation of p Gt Gr e^{-kd} (c/4 pi f d)^2 / (N0 W).
        assert_relative_eq!(s, 1.944_081_898_349_385, max_relative = 1e-12);
        let twice = Link {
            power: 0.02,
            ..link
        };
        assert_relative_eq!(snr(&twice, &fp).unwrap(), 2.0 * s, max_relative = 1e-15);
        // the log-space path agrees
        let carrier = Carrier::new(500e9, 0.2, 1e9);
        assert_relative_eq!(
            carrier.ln_snr(10.0, 0.01, &fp).exp(),
            s,
            max_relative = 1e-12
        );
    }

    #[test]
    fn rate_cases() {
        let p = unit_params();
        let base = Link {
            frequency: 500e9,
            k_abs: 0.0,
            distance: 1.0,
            power: 0.0,
            bandwidth: 1e9,
        };
        assert_eq!(rate(&base, &p).unwrap(), 0.0);
        let noise = p.noise_power(1e9);
        let gain = channel_gain(&base, &p).unwrap();
        let at_snr3 = Link {
            power: 3.0 * noise / gain,
            ..base
        };
        assert_relative_eq!(rate(&at_snr3, &p).unwrap(), 2e9, max_relative = 1e-12);
        let wide = Link {
            bandwidth: 20e9,
            ..base
        };
        let noise = p.noise_power(20e9);
        let at_snr1 = Link {
            power: noise / gain,
            ..wide
        };
        assert_relative_eq!(rate(&at_snr1, &p).unwrap(), 20e9, max_relative = 1e-12);
    }

    #[test]
    fn rate_distance_product_cases() {
        let p = unit_params();
        let zero = Link {
            frequency: 500e9,
            k_abs: 0.0,
            distance: 2.0,
            power: 0.0,
            bandwidth: 1e9,
        };
        assert_eq!(rate_distance_product(&zero, &p).unwrap(), 0.0);
        let gain = channel_gain(&zero, &p).unwrap();
        let one_gbps = Link {
            power: p.noise_power(1e9) / gain,
            ..zero
        };
        assert_relative_eq!(
            rate_distance_product(&one_gbps, &p).unwrap(),
            2e9,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            transport_capacity([&one_gbps, &one_gbps], &p).unwrap(),
            4e9,
            max_relative = 1e-12
        );
    }

    #[test]
    fn rate_monotone_in_distance_and_absorption() {
        let fp = fig3_params();
        let mut prev = f64::INFINITY;
        for i in 1..200 {
            let d = 0.05 * i as f64;
            let r = rate(
                &Link {
                    frequency: 500e9,
                    k_abs: 0.2,
                    distance: d,
                    power: 0.01,
                    bandwidth: 1e9,
                },
                &fp,
            )
            .unwrap();
            assert!(r < prev);
            prev = r;
        }
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let k = 0.05 * i as f64;
            let r = rate(
                &Link {
                    frequency: 500e9,
                    k_abs: k,
                    distance: 3.0,
                    power: 0.01,
                    bandwidth: 1e9,
                },
                &fp,
            )
            .unwrap();
            assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn rate_linear_in_bandwidth_at_fixed_snr() {
        let s = 7.5;
        assert_relative_eq!(
            20e9 * spectral_efficiency(s),
            20.0 * (1e9 * spectral_efficiency(s)),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            spectral_efficiency(required_snr(4.0)),
            4.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(required_snr(4.0), 15.0, max_relative = 1e-14);
    }

    #[test]
    fn link_params_validation() {
        assert!(LinkParams::new(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(LinkParams::new(1.0, 1.0, 1.0, 1.0, -1.0).is_err());
        assert!(LinkParams::new(1.0, 1.0, f64::NAN, 1.0, 1.0).is_err());
        let p = fig3_params();
        assert_relative_eq!(p.antenna_gain(), 1000.0, max_relative = 1e-12);
        assert_relative_eq!(p.p_total, 0.01, max_relative = 1e-12);
    }
}
