//! First-order channel estimation: the log-distance model and the
//! Okumura-Hata closed-form baseline.
//!
//! The log-distance model predicts the ensemble mean received power as
//! `intercept - 10 * exponent * log10(d / ref_distance)` and is fit to a
//! dataset by ordinary least squares. The difference between that mean and a
//! measurement is the link's total fading loss, the quantity the loss-field
//! estimator explains.

use crate::error::{Error, Result};
use crate::geometry::Link;

/// Fitted log-distance path loss model.
///
/// `intercept_dbm` is the predicted power at `ref_distance_m`; `exponent` is
/// the path loss exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDistanceModel {
    pub intercept_dbm: f64,
    pub exponent: f64,
    pub ref_distance_m: f64,
}

impl LogDistanceModel {
    pub fn new(intercept_dbm: f64, exponent: f64, ref_distance_m: f64) -> Result<Self> {
        if !(ref_distance_m.is_finite() && ref_distance_m > 0.0) {
            return Err(Error::InvalidParameter {
                name: "ref_distance",
                value: ref_distance_m,
                requirement: "finite and > 0",
            });
        }
        if !intercept_dbm.is_finite() || !exponent.is_finite() {
            return Err(Error::NonFinite {
                what: "log-distance model coefficients".into(),
            });
        }
        Ok(Self {
            intercept_dbm,
            exponent,
            ref_distance_m,
        })
    }

    /// Ordinary least squares of measured power against
    /// `-10 log10(d / ref_distance)`.
    ///
    /// Needs at least two links and at least two distinct distances.
    pub fn fit(links: &[Link], ref_distance_m: f64) -> Result<Self> {
        if links.len() < 2 {
            return Err(Error::SingularRegression {
                detail: "need at least 2 links",
            });
        }
        if !(ref_distance_m.is_finite() && ref_distance_m > 0.0) {
            return Err(Error::InvalidParameter {
                name: "ref_distance",
                value: ref_distance_m,
                requirement: "finite and > 0",
            });
        }
        let n = links.len() as f64;
        let xs: Vec<f64> = links
            .iter()
            .map(|l| -10.0 * (l.distance() / ref_distance_m).log10())
            .collect();
        let ys: Vec<f64> = links.iter().map(|l| l.rss_dbm()).collect();
        let x_mean = xs.iter().sum::<f64>() / n;
        let y_mean = ys.iter().sum::<f64>() / n;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for (x, y) in xs.iter().zip(&ys) {
            let dx = x - x_mean;
            sxx += dx * dx;
            sxy += dx * (y - y_mean);
        }
        if sxx == 0.0 {
            return Err(Error::SingularRegression {
                detail: "all links at identical distance",
            });
        }
        let exponent = sxy / sxx;
        let intercept = y_mean - exponent * x_mean;
        Self::new(intercept, exponent, ref_distance_m)
    }

    /// Ensemble mean received power at distance `d` (meters), in dBm.
    pub fn mean_power(&self, distance_m: f64) -> f64 {
        self.intercept_dbm - 10.0 * self.exponent * (distance_m / self.ref_distance_m).log10()
    }

    /// Total fading loss of a measurement: predicted mean minus measured
    /// power, positive when the measurement is below the model mean.
    pub fn fading_loss(&self, link: &Link) -> f64 {
        self.mean_power(link.distance()) - link.rss_dbm()
    }

    /// Fading losses of a whole dataset, in input order.
    pub fn fading_losses(&self, links: &[Link]) -> Vec<f64> {
        links.iter().map(|l| self.fading_loss(l)).collect()
    }
}

/// Environment variant selecting the Okumura-Hata correction terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HataEnvironment {
    /// Medium or small city (the default mobile-antenna correction).
    UrbanMedium,
    /// Large city (frequency-split mobile-antenna correction).
    UrbanLarge,
    Suburban,
    Open,
}

impl HataEnvironment {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "urban_medium" => Some(Self::UrbanMedium),
            "urban_large" => Some(Self::UrbanLarge),
            "suburban" => Some(Self::Suburban),
            "open" => Some(Self::Open),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::UrbanMedium => "urban_medium",
            Self::UrbanLarge => "urban_large",
            Self::Suburban => "suburban",
            Self::Open => "open",
        }
    }
}

/// Inputs of the Okumura-Hata formula. Frequency is checked against the
/// model's 150-1500 MHz validity range at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HataParams {
    frequency_mhz: f64,
    tx_height_m: f64,
    rx_height_m: f64,
    environment: HataEnvironment,
}

/// A Hata prediction plus a flag for distances outside the nominal
/// 1-20 km fitting range (accepted, but worth surfacing).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HataPrediction {
    pub loss_db: f64,
    pub outside_nominal_range: bool,
}

impl HataParams {
    pub fn new(
        frequency_mhz: f64,
        tx_height_m: f64,
        rx_height_m: f64,
        environment: HataEnvironment,
    ) -> Result<Self> {
        if !frequency_mhz.is_finite() || !(150.0..=1500.0).contains(&frequency_mhz) {
            return Err(Error::FrequencyOutOfRange {
                mhz: frequency_mhz,
            });
        }
        for (name, v) in [("tx_height", tx_height_m), ("rx_height", rx_height_m)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    requirement: "finite and > 0",
                });
            }
        }
        Ok(Self {
            frequency_mhz,
            tx_height_m,
            rx_height_m,
            environment,
        })
    }

    pub fn frequency_mhz(&self) -> f64 {
        self.frequency_mhz
    }

    pub fn environment(&self) -> HataEnvironment {
        self.environment
    }

    /// Path loss in dB at `distance_km`.
    ///
    /// Uses Hata's 1980 urban formulation; suburban and open-area variants
    /// subtract their standard correction terms from the urban value with
    /// the medium/small-city mobile correction.
    pub fn path_loss(&self, distance_km: f64) -> Result<HataPrediction> {
        if !(distance_km.is_finite() && distance_km > 0.0) {
            return Err(Error::InvalidParameter {
                name: "distance_km",
                value: distance_km,
                requirement: "finite and > 0",
            });
        }
        let f = self.frequency_mhz;
        let hb = self.tx_height_m;
        let hm = self.rx_height_m;
        let log_f = f.log10();

        let a_hm = match self.environment {
            HataEnvironment::UrbanLarge => {
                if f <= 300.0 {
                    8.29 * (1.54 * hm).log10().powi(2) - 1.1
                } else {
                    3.2 * (11.75 * hm).log10().powi(2) - 4.97
                }
            }
            _ => (1.1 * log_f - 0.7) * hm - (1.56 * log_f - 0.8),
        };

        let urban = 69.55 + 26.16 * log_f - 13.82 * hb.log10() - a_hm
            + (44.9 - 6.55 * hb.log10()) * distance_km.log10();

        let loss_db = match self.environment {
            HataEnvironment::UrbanMedium | HataEnvironment::UrbanLarge => urban,
            HataEnvironment::Suburban => urban - 2.0 * (f / 28.0).log10().powi(2) - 5.4,
            HataEnvironment::Open => urban - 4.78 * log_f.powi(2) + 18.33 * log_f - 40.94,
        };

        Ok(HataPrediction {
            loss_db,
            outside_nominal_range: !(1.0..=20.0).contains(&distance_km),
        })
    }
}
