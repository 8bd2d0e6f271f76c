//! Free-space link geometry and budget: slant range, path loss, received
//! power, and Shannon capacity over an AWGN channel.

use crate::units::{db_to_linear, BOLTZMANN, EARTH_RADIUS_M};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinkError {
    #[error("elevation {0} deg outside (0, 90]")]
    Elevation(f64),
    #[error("{field} must be strictly positive and finite, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("{field} must be finite, got {value}")]
    NonFinite { field: &'static str, value: f64 },
}

fn positive(field: &'static str, value: f64) -> Result<f64, LinkError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(LinkError::NonPositive { field, value })
    }
}

fn finite(field: &'static str, value: f64) -> Result<f64, LinkError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(LinkError::NonFinite { field, value })
    }
}

/// Ground terminal to satellite geometry on a spherical Earth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub satellite_altitude_m: f64,
    pub elevation_deg: f64,
    pub earth_radius_m: f64,
}

impl Geometry {
    pub fn new(satellite_altitude_m: f64, elevation_deg: f64) -> Result<Self, LinkError> {
        Self::with_earth_radius(satellite_altitude_m, elevation_deg, EARTH_RADIUS_M)
    }

    pub fn with_earth_radius(
        satellite_altitude_m: f64,
        elevation_deg: f64,
        earth_radius_m: f64,
    ) -> Result<Self, LinkError> {
        let g = Self {
            satellite_altitude_m,
            elevation_deg,
            earth_radius_m,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), LinkError> {
        positive("satellite_altitude_m", self.satellite_altitude_m)?;
        positive("earth_radius_m", self.earth_radius_m)?;
        if !(self.elevation_deg > 0.0 && self.elevation_deg <= 90.0) {
            return Err(LinkError::Elevation(self.elevation_deg));
        }
        Ok(())
    }
}

/// One direction of one loop's radio link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    pub tx_power_w: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub carrier_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_temperature_k: f64,
    pub geometry: Geometry,
}

impl LinkParams {
    pub fn validate(&self) -> Result<(), LinkError> {
        positive("tx_power_w", self.tx_power_w)?;
        finite("tx_gain_dbi", self.tx_gain_dbi)?;
        finite("rx_gain_dbi", self.rx_gain_dbi)?;
        positive("carrier_freq_hz", self.carrier_freq_hz)?;
        positive("bandwidth_hz", self.bandwidth_hz)?;
        positive("noise_temperature_k", self.noise_temperature_k)?;
        self.geometry.validate()
    }

    pub fn with_bandwidth(mut self, bandwidth_hz: f64) -> Self {
        self.bandwidth_hz = bandwidth_hz;
        self
    }

    pub fn with_tx_power(mut self, tx_power_w: f64) -> Self {
        self.tx_power_w = tx_power_w;
        self
    }

    pub fn slant_range_m(&self) -> f64 {
        slant_range_unchecked(&self.geometry)
    }

    /// Linear end-to-end gain G_t * G_r / L_fs; received power is
    /// `tx_power_w * channel_gain()`.
    pub fn channel_gain(&self) -> f64 {
        let loss = fspl_db_unchecked(self.slant_range_m(), self.carrier_freq_hz);
        db_to_linear(self.tx_gain_dbi + self.rx_gain_dbi - loss)
    }

    /// Noise power spectral density k_B * T, W/Hz.
    pub fn noise_density(&self) -> f64 {
        BOLTZMANN * self.noise_temperature_k
    }
}

/// Line-of-sight distance from the terminal to the satellite.
pub fn slant_range(geometry: &Geometry) -> Result<f64, LinkError> {
    geometry.validate()?;
    Ok(slant_range_unchecked(geometry))
}

fn slant_range_unchecked(g: &Geometry) -> f64 {
    if g.elevation_deg == 90.0 {
        return g.satellite_altitude_m;
    }
    let re = g.earth_radius_m;
    let h = g.satellite_altitude_m;
    let s = g.elevation_deg.to_radians().sin();
    let re_s = re * s;
    // d = sqrt(Re^2 s^2 + 2 Re h + h^2) - Re s, rewritten to avoid cancellation.
    let k = 2.0 * re * h + h * h;
    k / ((re_s * re_s + k).sqrt() + re_s)
}

/// Free-space path loss 92.45 + 20 log10(d_km) + 20 log10(f_GHz).
pub fn fspl_db(distance_m: f64, carrier_freq_hz: f64) -> Result<f64, LinkError> {
    positive("distance_m", distance_m)?;
    positive("carrier_freq_hz", carrier_freq_hz)?;
    Ok(fspl_db_unchecked(distance_m, carrier_freq_hz))
}

fn fspl_db_unchecked(distance_m: f64, carrier_freq_hz: f64) -> f64 {
    92.45 + 20.0 * (distance_m / 1e3).log10() + 20.0 * (carrier_freq_hz / 1e9).log10()
}

pub fn received_power_w(link: &LinkParams) -> Result<f64, LinkError> {
    link.validate()?;
    Ok(link.tx_power_w * link.channel_gain())
}

/// Shannon capacity `B log2(1 + P_r / (k_B T B))`.
pub fn shannon_rate_bps(link: &LinkParams) -> Result<f64, LinkError> {
    let pr = received_power_w(link)?;
    Ok(capacity_bps(pr, link.noise_density(), link.bandwidth_hz))
}

/// AWGN capacity for a received power, noise density and bandwidth. Zero
/// power or zero bandwidth yields zero rate.
#[inline]
pub fn capacity_bps(received_power_w: f64, noise_density: f64, bandwidth_hz: f64) -> f64 {
    if received_power_w <= 0.0 || bandwidth_hz <= 0.0 {
        return 0.0;
    }
    let snr = received_power_w / (noise_density * bandwidth_hz);
    bandwidth_hz * snr.ln_1p() / std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{linear_to_db, watts_to_dbw};
    use proptest::prelude::*;

    fn overhead() -> Geometry {
        Geometry::new(600e3, 90.0).unwrap()
    }

    fn downlink(bandwidth_hz: f64) -> LinkParams {
        LinkParams {
            tx_power_w: 20.0,
            tx_gain_dbi: 38.5,
            rx_gain_dbi: 14.0,
            carrier_freq_hz: 30e9,
            bandwidth_hz,
            noise_temperature_k: 290.0,
            geometry: overhead(),
        }
    }

    #[test]
    fn slant_range_examples() {
        assert_eq!(slant_range(&overhead()).unwrap(), 600e3);
        // mpmath, 30 digits, direct closed form.
        let d30 = slant_range(&Geometry::new(600e3, 30.0).unwrap()).unwrap();
        assert!((d30 - 1_075_088.016_929_118_7).abs() < 1e-6, "{d30}");
        let grazing = slant_range(&Geometry::new(600e3, 1e-9).unwrap()).unwrap();
        assert!((grazing - 2_829_346.214_233_952_7).abs() < 1e-3, "{grazing}");
    }

    #[test]
    fn slant_range_rejects_bad_elevation() {
        for el in [0.0, -5.0, 90.5, f64::NAN] {
            let g = Geometry {
                satellite_altitude_m: 600e3,
                elevation_deg: el,
                earth_radius_m: EARTH_RADIUS_M,
            };
            assert!(matches!(slant_range(&g), Err(LinkError::Elevation(_))));
        }
        assert!(Geometry::new(0.0, 45.0).is_err());
    }

    #[test]
    fn slant_range_monotone_in_elevation() {
        let mut prev = f64::INFINITY;
        for el in 1..=90 {
            let d = slant_range(&Geometry::new(600e3, el as f64).unwrap()).unwrap();
            assert!(d <= prev);
            assert!(d >= 600e3);
            prev = d;
        }
    }

    #[test]
    fn fspl_examples() {
        let loss = fspl_db(600e3, 30e9).unwrap();
        assert!((loss - 177.555_450_102_066_12).abs() < 1e-9, "{loss}");
        assert!((fspl_db(1e3, 1e9).unwrap() - 92.45).abs() < 1e-12);
        let doubled = fspl_db(2e3, 1e9).unwrap();
        assert!((doubled - (92.45 + 6.020_599_913_279_624)).abs() < 1e-12);
        assert!(fspl_db(0.0, 1e9).is_err());
        assert!(fspl_db(1.0, -1.0).is_err());
    }

    #[test]
    fn received_power_examples() {
        let identity = LinkParams {
            tx_power_w: 1.0,
            tx_gain_dbi: 0.0,
            rx_gain_dbi: 0.0,
            // fspl = 0 at d_km * f_GHz = 10^(-92.45/20)
            carrier_freq_hz: 1e9,
            bandwidth_hz: 1.0,
            noise_temperature_k: 290.0,
            geometry: Geometry::new(1e3 * 10f64.powf(-92.45 / 20.0), 90.0).unwrap(),
        };
        assert!((received_power_w(&identity).unwrap() - 1.0).abs() < 1e-12);

        let pr = received_power_w(&downlink(1e6)).unwrap();
        let chained = 10f64.powf((watts_to_dbw(20.0) + 38.5 + 14.0 - 177.555_450_102_066_12) / 10.0);
        assert!(((pr - chained) / chained).abs() < 1e-12);
        assert!(((pr - 6.244_317_618_888_262e-12) / pr).abs() < 1e-12);

        let doubled = received_power_w(&downlink(1e6).with_tx_power(40.0)).unwrap();
        assert_eq!(doubled / pr, 2.0);
    }

    #[test]
    fn shannon_examples() {
        assert!((capacity_bps(1.0, 1.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((capacity_bps(3e6, 1.0, 1e6) - 2e6).abs() < 1e-6);
        // mpmath regression constants for the 20 W overhead downlink.
        let r1m = shannon_rate_bps(&downlink(1e6)).unwrap();
        assert!(((r1m - 10_607_853.479_855_605) / r1m).abs() < 1e-12, "{r1m}");
        let r10k = shannon_rate_bps(&downlink(10e3)).unwrap();
        assert!(((r10k - 172_507.941_546_858_2) / r10k).abs() < 1e-12, "{r10k}");
        assert_eq!(capacity_bps(0.0, 1.0, 1e6), 0.0);
    }

    #[test]
    fn shannon_rejects_invalid_link() {
        assert!(shannon_rate_bps(&downlink(0.0)).is_err());
        assert!(shannon_rate_bps(&downlink(1e6).with_tx_power(-1.0)).is_err());
    }

    #[test]
    fn shannon_monotone_on_grid() {
        let mut prev = 0.0;
        for k in 1..=60 {
            let r = shannon_rate_bps(&downlink(k as f64 * 1e5)).unwrap();
            assert!(r > prev);
            prev = r;
        }
        let mut prev = 0.0;
        for k in 1..=60 {
            let r = shannon_rate_bps(&downlink(1e6).with_tx_power(k as f64 * 0.5)).unwrap();
            assert!(r > prev);
            prev = r;
        }
    }

    #[test]
    fn shannon_bandwidth_derivative_positive() {
        for b in [1e3, 1e4, 1e5, 1e6, 1e7, 1e8] {
            let h = b * 1e-6;
            let hi = shannon_rate_bps(&downlink(b + h)).unwrap();
            let lo = shannon_rate_bps(&downlink(b - h)).unwrap();
            assert!((hi - lo) / (2.0 * h) > 0.0);
        }
    }

    #[test]
    fn channel_gain_matches_db_chain() {
        let l = downlink(1e6);
        let loss = fspl_db(l.slant_range_m(), l.carrier_freq_hz).unwrap();
        assert!((linear_to_db(l.channel_gain()) - (52.5 - loss)).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn fspl_doubling_distance(d in 1.0f64..1e8, f in 1e6f64..1e12) {
            let diff = fspl_db(2.0 * d, f).unwrap() - fspl_db(d, f).unwrap();
            prop_assert!((diff - 20.0 * 2f64.log10()).abs() < 1e-9);
        }
    }
}
