/// Hausdorff distance between the parts of two spectra below `c`.
///
/// Values below zero are treated as roundoff and clamped to 0. Two empty
/// windows are at distance 0; a single empty window is at distance `c`.
pub fn hausdorff_window(a: &[f64], b: &[f64], c: f64) -> f64 {
    let wa = window(a, c);
    let wb = window(b, c);
    match (wa.is_empty(), wb.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => c,
        _ => directed(&wa, &wb).max(directed(&wb, &wa)),
    }
}

fn window(v: &[f64], c: f64) -> Vec<f64> {
    v.iter().filter(|&&x| x < c).map(|&x| x.max(0.0)).collect()
}

fn directed(from: &[f64], to: &[f64]) -> f64 {
    from.iter()
        .map(|&x| to.iter().map(|&y| (x - y).abs()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}
