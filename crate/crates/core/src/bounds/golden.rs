/// Golden-section search for the minimum of a unimodal function on `[lo, hi]`.
///
/// Returns `(argmin, min)`; stops once the bracket is narrower than `tol`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    let fm = f(mid);
    [(x1, f1), (x2, f2), (mid, fm)].into_iter().fold((mid, fm), |best, cand| if cand.1 < best.1 { cand } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_minimum() {
        let (x, v) = golden_section_min(|x| (x - 0.3).powi(2), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(v < 1e-16);
    }

    #[test]
    fn handles_minimum_at_edge() {
        let (x, _) = golden_section_min(|x| x, 0.0, 1.0, 1e-10);
        assert!(x < 1e-9);
    }
}
