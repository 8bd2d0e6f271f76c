//! Physical constants and the single place where dB <-> linear conversions live.

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Mean spherical Earth radius, m.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[inline]
pub fn watts_to_dbw(watts: f64) -> f64 {
    linear_to_db(watts)
}

#[inline]
pub fn dbw_to_watts(dbw: f64) -> f64 {
    db_to_linear(dbw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_points() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((db_to_linear(30.0) - 1000.0).abs() < 1e-9);
        assert!((watts_to_dbw(20.0) - 13.010_299_956_639_812).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn db_round_trip(db in -300.0f64..300.0) {
            let back = linear_to_db(db_to_linear(db));
            prop_assert!((back - db).abs() <= 1e-9 * db.abs().max(1.0));
        }

        #[test]
        fn linear_round_trip(exp in -30.0f64..30.0) {
            let x = 10f64.powf(exp);
            let back = dbw_to_watts(watts_to_dbw(x));
            prop_assert!(((back - x) / x).abs() <= 1e-9);
        }
    }
}
