//! One-dimensional maximization by golden-section search.

/// Result of [`golden_section_max`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOutcome {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
    pub bracket_width: f64,
    /// False when the returned interior point does not beat both interval
    /// endpoints, i.e. the objective is not unimodal on the interval.
    pub unimodal: bool,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes `f` on `[lo, hi]` until the bracket is narrower than `tol`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> SearchOutcome {
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while b - a > tol && iterations < 500 {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        iterations += 1;
    }
    let (x, value) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    let unimodal = value >= f(lo) && value >= f(hi);
    SearchOutcome {
        x,
        value,
        iterations,
        bracket_width: b - a,
        unimodal,
    }
}
