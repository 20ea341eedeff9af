//! Subwindow plans and absorption-coefficient tables.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::channel::Carrier;
use crate::error::{Error, Result};

/// One OFDM subwindow: its center frequency and the absorption coefficient there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subwindow {
    pub frequency: f64,
    pub k_abs: f64,
}

/// The N subwindows available to the access point, all of equal bandwidth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandPlan {
    subwindows: Vec<Subwindow>,
    bandwidth: f64,
}

impl BandPlan {
    pub fn new(subwindows: Vec<Subwindow>, bandwidth: f64) -> Result<Self> {
        if subwindows.is_empty() {
            return Err(Error::InvalidParameter(
                "band plan has no subwindows".into(),
            ));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        for (n, s) in subwindows.iter().enumerate() {
            if !(s.frequency > 0.0 && s.frequency.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "subwindow {n}: frequency must be positive, got {}",
                    s.frequency
                )));
            }
            if !(s.k_abs >= 0.0 && s.k_abs.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "subwindow {n}: k_abs must be non-negative, got {}",
                    s.k_abs
                )));
            }
        }
        if subwindows
            .windows(2)
            .any(|w| w[1].frequency <= w[0].frequency)
        {
            return Err(Error::InvalidParameter(
                "subwindow frequencies must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            subwindows,
            bandwidth,
        })
    }

    /// `count` contiguous subwindows of width `bandwidth` starting at `start_hz`,
    /// with the absorption coefficient taken at each center frequency.
    pub fn contiguous(
        start_hz: f64,
        bandwidth: f64,
        count: usize,
        k_abs: impl Fn(f64) -> Result<f64>,
    ) -> Result<Self> {
        let subwindows = (0..count)
            .map(|n| {
                let frequency = start_hz + (n as f64 + 0.5) * bandwidth;
                Ok(Subwindow {
                    frequency,
                    k_abs: k_abs(frequency)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(subwindows, bandwidth)
    }

    pub fn len(&self) -> usize {
        self.subwindows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subwindows.is_empty()
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn subwindows(&self) -> &[Subwindow] {
        &self.subwindows
    }

    pub fn carrier(&self, n: usize) -> Carrier {
        let s = self.subwindows[n];
        Carrier::new(s.frequency, s.k_abs, self.bandwidth)
    }
}

/// Absorption coefficient samples, ascending in frequency, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionTable {
    frequencies: Vec<f64>,
    k_abs: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct TableRow {
    frequency_hz: f64,
    k_abs_per_m: f64,
}

pub const TABLE_HEADER: [&str; 2] = ["frequency_hz", "k_abs_per_m"];

/// Bundled stand-in for a measured table: flat 0.05 /m with a Gaussian
/// water-vapour line at 555.5 GHz (peak 2 /m above baseline, sigma 4 GHz).
const SYNTHETIC_TABLE_CSV: &str = include_str!("../data/synthetic_absorption.csv");

pub const SYNTHETIC_BASELINE: f64 = 0.05;
pub const SYNTHETIC_PEAK_HZ: f64 = 555.5e9;
pub const SYNTHETIC_PEAK_AMPLITUDE: f64 = 2.0;
pub const SYNTHETIC_PEAK_SIGMA_HZ: f64 = 4e9;

/// The analytic profile the bundled table was sampled from.
pub fn synthetic_k_abs(frequency: f64) -> f64 {
    let z = (frequency - SYNTHETIC_PEAK_HZ) / SYNTHETIC_PEAK_SIGMA_HZ;
    SYNTHETIC_BASELINE + SYNTHETIC_PEAK_AMPLITUDE * (-0.5 * z * z).exp()
}

impl AbsorptionTable {
    pub fn new(frequencies: Vec<f64>, k_abs: Vec<f64>) -> Result<Self> {
        if frequencies.len() != k_abs.len() {
            return Err(Error::Dimension(format!(
                "{} frequencies vs {} coefficients",
                frequencies.len(),
                k_abs.len()
            )));
        }
        if frequencies.is_empty() {
            return Err(Error::Table {
                line: 1,
                message: "table has no rows".into(),
            });
        }
        for (i, (&f, &k)) in frequencies.iter().zip(&k_abs).enumerate() {
            // header is line 1
            let line = i as u64 + 2;
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::Table {
                    line,
                    message: format!("frequency must be positive, got {f}"),
                });
            }
            if !(k >= 0.0 && k.is_finite()) {
                return Err(Error::Table {
                    line,
                    message: format!("k_abs must be non-negative, got {k}"),
                });
            }
            if i > 0 && f <= frequencies[i - 1] {
                return Err(Error::Table {
                    line,
                    message: "frequencies must be strictly ascending".into(),
                });
            }
        }
        Ok(Self { frequencies, k_abs })
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Table {
            line: 1,
            message: e.to_string(),
        })?;
        if headers.iter().collect::<Vec<_>>() != TABLE_HEADER {
            return Err(Error::Table {
                line: 1,
                message: format!("expected header `{}`", TABLE_HEADER.join(",")),
            });
        }
        let mut frequencies = Vec::new();
        let mut k_abs = Vec::new();
        for (i, row) in rdr.deserialize::<TableRow>().enumerate() {
            let line = i as u64 + 2;
            let row = row.map_err(|e| Error::Table {
                line: e.position().map_or(line, |p| p.line()),
                message: e.to_string(),
            })?;
            frequencies.push(row.frequency_hz);
            k_abs.push(row.k_abs_per_m);
        }
        Self::new(frequencies, k_abs)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        Self::from_csv_reader(text.as_bytes())
    }

    pub fn synthetic() -> Self {
        Self::from_csv_str(SYNTHETIC_TABLE_CSV).expect("bundled absorption table is well-formed")
    }

    /// Frequency-independent coefficient over `[min_hz, max_hz]`.
    pub fn flat(k_abs: f64, min_hz: f64, max_hz: f64) -> Result<Self> {
        Self::new(vec![min_hz, max_hz], vec![k_abs, k_abs])
    }

    pub fn range(&self) -> (f64, f64) {
        (self.frequencies[0], *self.frequencies.last().unwrap())
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.frequencies
            .iter()
            .copied()
            .zip(self.k_abs.iter().copied())
    }

    pub fn lookup(&self, frequency: f64) -> Result<f64> {
        let (min, max) = self.range();
        if !(frequency >= min && frequency <= max) {
            return Err(Error::OutOfTableRange {
                frequency,
                min,
                max,
            });
        }
        let hi = self.frequencies.partition_point(|&f| f < frequency);
        if self.frequencies[hi] == frequency {
            return Ok(self.k_abs[hi]);
        }
        let lo = hi - 1;
        let t = (frequency - self.frequencies[lo]) / (self.frequencies[hi] - self.frequencies[lo]);
        Ok(self.k_abs[lo] + t * (self.k_abs[hi] - self.k_abs[lo]))
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(TABLE_HEADER)?;
        for (f, k) in self.rows() {
            w.write_record([f.to_string(), k.to_string()])?;
        }
        w.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_interpolates_linearly() {
        let t =
            AbsorptionTable::from_csv_str("frequency_hz,k_abs_per_m\n1e9,0.0\n2e9,1.0\n4e9,3.0\n")
                .unwrap();
        assert_eq!(t.lookup(1e9).unwrap(), 0.0);
        assert_eq!(t.lookup(4e9).unwrap(), 3.0);
        assert!((t.lookup(1.5e9).unwrap() - 0.5).abs() < 1e-15);
        assert!((t.lookup(3e9).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(
            t.lookup(0.5e9),
            Err(Error::OutOfTableRange { .. })
        ));
        assert!(t.lookup(4.1e9).is_err());
    }

    #[test]
    fn malformed_row_names_its_line() {
        let err = AbsorptionTable::from_csv_str("frequency_hz,k_abs_per_m\n1e9,0.1\n2e9,oops\n")
            .unwrap_err();
        assert!(matches!(err, Error::Table { line: 3, .. }), "{err:?}");
        let err = AbsorptionTable::from_csv_str("frequency_hz,k_abs_per_m\n2e9,0.1\n1e9,0.2\n")
            .unwrap_err();
        assert!(matches!(err, Error::Table { line: 3, .. }), "{err:?}");
        let err =
            AbsorptionTable::from_csv_str("frequency_hz,k_abs_per_m\n2e9,-0.1\n").unwrap_err();
        assert!(matches!(err, Error::Table { line: 2, .. }), "{err:?}");
        let err = AbsorptionTable::from_csv_str("freq,k\n2e9,0.1\n").unwrap_err();
        assert!(matches!(err, Error::Table { line: 1, .. }), "{err:?}");
    }

    #[test]
    fn synthetic_table_matches_its_profile() {
        let t = AbsorptionTable::synthetic();
        let (min, max) = t.range();
        assert!(min <= 500e9 && max >= 600e9);
        for (f, k) in t.rows() {
            assert!((k - synthetic_k_abs(f)).abs() < 1e-9, "{f}: {k}");
        }
        let peak = t.rows().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        assert_eq!(peak.0, SYNTHETIC_PEAK_HZ);
    }

    #[test]
    fn table_csv_round_trip() {
        let t = AbsorptionTable::synthetic();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(AbsorptionTable::from_csv_reader(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn contiguous_plan_uses_centers() {
        let t = AbsorptionTable::synthetic();
        let plan = BandPlan::contiguous(500e9, 1e9, 100, |f| t.lookup(f)).unwrap();
        assert_eq!(plan.len(), 100);
        assert_eq!(plan.subwindows()[0].frequency, 500.5e9);
        assert_eq!(plan.subwindows()[99].frequency, 599.5e9);
        assert!(BandPlan::new(vec![], 1e9).is_err());
        let dup = vec![
            Subwindow {
                frequency: 1e9,
                k_abs: 0.0
            };
            2
        ];
        assert!(BandPlan::new(dup, 1e9).is_err());
    }
}
