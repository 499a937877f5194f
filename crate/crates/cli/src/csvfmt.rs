//! CSV cell formatting.
//!
//! Floats are printed in scientific notation with 17 significant digits,
//! which round-trips every f64 exactly and keeps output bytes stable
//! across platforms and thread counts.

pub fn f64_cell(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::f64_cell;

    #[test]
    fn round_trips_doubles() {
        for &x in &[
            0.2,
            1.0 / 3.0,
            5.0 / 6.0,
            4.0 / 15.0,
            f64::MIN_POSITIVE,
            1e300,
            -0.0,
        ] {
            let s = f64_cell(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }
}
