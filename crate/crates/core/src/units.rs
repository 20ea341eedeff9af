//! dB conversions used at the ingestion boundary. Everything past this point is linear.

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

pub fn watt_to_dbm(watt: f64) -> f64 {
    10.0 * (watt * 1000.0).log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn conversions() {
        assert_relative_eq!(dbm_to_watt(30.0), 1.0, max_relative = 1e-15);
        assert_relative_eq!(dbm_to_watt(10.0), 0.01, max_relative = 1e-15);
        assert_relative_eq!(db_to_linear(15.0), 10f64.powf(1.5), max_relative = 1e-15);
        // -168 dBm/Hz
        assert_relative_eq!(
            dbm_to_watt(-168.0),
            1.584_893_192_461_113e-20,
            max_relative = 1e-12
        );
        assert_relative_eq!(watt_to_dbm(dbm_to_watt(-17.3)), -17.3, max_relative = 1e-12);
        assert_relative_eq!(linear_to_db(db_to_linear(7.0)), 7.0, max_relative = 1e-12);
    }
}
