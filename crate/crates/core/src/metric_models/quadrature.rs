use crate::error::{Error, Result};

// 10-point Gauss-Legendre on [-1, 1]
const GL_X: [f64; 5] = [
    0.148_874_338_981_631_22,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_W: [f64; 5] = [
    0.295_524_224_714_752_87,
    0.269_266_719_309_996_35,
    0.219_086_362_515_982_04,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_14,
];

pub fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for k in 0..5 {
        s += GL_W[k] * (f(c - h * GL_X[k]) + f(c + h * GL_X[k]));
    }
    s * h
}

/// Adaptive Gauss-Legendre; returns panel breakpoints and the integral per panel.
pub fn adaptive_panels<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let init = 16;
    let mut breaks = vec![a];
    let mut vals = Vec::new();
    let total_guess: f64 = (0..init)
        .map(|i| {
            let x0 = a + (b - a) * i as f64 / init as f64;
            let x1 = a + (b - a) * (i + 1) as f64 / init as f64;
            gauss_legendre(f, x0, x1).abs()
        })
        .sum();
    let abs_tol = rel_tol * total_guess.max(1e-300);
    for i in 0..init {
        let x0 = a + (b - a) * i as f64 / init as f64;
        let x1 = if i + 1 == init { b } else { a + (b - a) * (i + 1) as f64 / init as f64 };
        refine(f, x0, x1, gauss_legendre(f, x0, x1), abs_tol / init as f64, 0, &mut breaks, &mut vals)?;
    }
    Ok((breaks, vals))
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    breaks: &mut Vec<f64>,
    vals: &mut Vec<f64>,
) -> Result<()> {
    let m = 0.5 * (a + b);
    let l = gauss_legendre(f, a, m);
    let r = gauss_legendre(f, m, b);
    if !(l + r).is_finite() {
        return Err(Error::UnboundedDomain(format!("integrand not finite on [{a}, {b}]")));
    }
    if (l + r - whole).abs() <= tol.max(1e-15 * (l + r).abs()) || depth > 60 {
        breaks.push(b);
        vals.push(l + r);
        return Ok(());
    }
    refine(f, a, m, l, 0.5 * tol, depth + 1, breaks, vals)?;
    refine(f, m, b, r, 0.5 * tol, depth + 1, breaks, vals)
}
