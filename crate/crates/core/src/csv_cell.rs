//! Text form of CSV cells.

/// Shortest round-trip decimal, switching to exponent form outside `[1e-4, 1e15)`.
pub fn float_cell(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// Values that can fill a CSV cell.
pub trait Cell {
    fn cell(&self) -> String;
}

impl Cell for f64 {
    fn cell(&self) -> String {
        float_cell(*self)
    }
}

macro_rules! display_cell {
    ($($t:ty),*) => {$(
        impl Cell for $t {
            fn cell(&self) -> String {
                self.to_string()
            }
        }
    )*};
}
display_cell!(u32, u64, usize, i32, bool, &str, String);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        assert_eq!(float_cell(1e-6), "1e-6");
        assert_eq!(float_cell(0.25), "0.25");
        assert_eq!(float_cell(0.0), "0");
        assert_eq!(float_cell(-3.5e-9), "-3.5e-9");
        assert_eq!(float_cell(2e20), "2e20");
        for x in [1.2345678901234567e-7, 0.1 + 0.2, 12345.678] {
            assert_eq!(float_cell(x).parse::<f64>().unwrap(), x);
        }
    }
}
