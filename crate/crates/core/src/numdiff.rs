//! Central finite differences used by the runtime identity checks.
//!
//! Points are measured in units `scale` (one per coordinate). Steps are
//! `step(|x̂|)·scale_k` with `x̂ = x / scale`, so with unit scales the step is
//! `1e-6·(1 + |x|)` or `1e-5·(1 + |x|)`.

/// Unit scales for dimensionless coordinates.
pub const UNIT: [f64; 2] = [1.0, 1.0];

/// Step for first derivatives at a point of size `x`.
pub fn gradient_step(x: f64) -> f64 {
    1e-6 * (1.0 + x.abs())
}

/// Step for second derivatives and Jacobian determinants at a point of size `x`.
pub fn hessian_step(x: f64) -> f64 {
    1e-5 * (1.0 + x.abs())
}

/// Euclidean norm of `x` in units of `scale`.
pub fn scaled_norm(x: [f64; 2], scale: [f64; 2]) -> f64 {
    (x[0] / scale[0]).hypot(x[1] / scale[1])
}

fn steps(x: [f64; 2], scale: [f64; 2], step: fn(f64) -> f64) -> (f64, f64) {
    let h = step(scaled_norm(x, scale));
    (h * scale[0], h * scale[1])
}

pub fn central_diff<F, E>(f: F, x: f64, h: f64) -> Result<f64, E>
where
    F: Fn(f64) -> Result<f64, E>,
{
    Ok((f(x + h)? - f(x - h)?) / (2.0 * h))
}

pub fn gradient2<F, E>(f: F, x: [f64; 2], scale: [f64; 2]) -> Result<[f64; 2], E>
where
    F: Fn([f64; 2]) -> Result<f64, E>,
{
    let (h0, h1) = steps(x, scale, gradient_step);
    let d0 = (f([x[0] + h0, x[1]])? - f([x[0] - h0, x[1]])?) / (2.0 * h0);
    let d1 = (f([x[0], x[1] + h1])? - f([x[0], x[1] - h1])?) / (2.0 * h1);
    Ok([d0, d1])
}

pub fn hessian2<F, E>(f: F, x: [f64; 2], scale: [f64; 2]) -> Result<[[f64; 2]; 2], E>
where
    F: Fn([f64; 2]) -> Result<f64, E>,
{
    let (h0, h1) = steps(x, scale, hessian_step);
    hessian2_with(&f, x, h0, h1)
}

/// Richardson extrapolation of [`hessian2`] over steps `h` and `2h`.
///
/// Removes the leading `O(h²)` term, which matters when the determinant of
/// the Hessian is much smaller than the products of its entries.
pub fn hessian2_extrapolated<F, E>(f: F, x: [f64; 2], scale: [f64; 2]) -> Result<[[f64; 2]; 2], E>
where
    F: Fn([f64; 2]) -> Result<f64, E>,
{
    let (h0, h1) = steps(x, scale, hessian_step);
    let fine = hessian2_with(&f, x, h0, h1)?;
    let coarse = hessian2_with(&f, x, 2.0 * h0, 2.0 * h1)?;
    let r = |i: usize, k: usize| (4.0 * fine[i][k] - coarse[i][k]) / 3.0;
    Ok([[r(0, 0), r(0, 1)], [r(1, 0), r(1, 1)]])
}

fn hessian2_with<F, E>(f: &F, x: [f64; 2], h0: f64, h1: f64) -> Result<[[f64; 2]; 2], E>
where
    F: Fn([f64; 2]) -> Result<f64, E>,
{
    let f00 = f(x)?;
    let fp0 = f([x[0] + h0, x[1]])?;
    let fm0 = f([x[0] - h0, x[1]])?;
    let f0p = f([x[0], x[1] + h1])?;
    let f0m = f([x[0], x[1] - h1])?;
    let fpp = f([x[0] + h0, x[1] + h1])?;
    let fpm = f([x[0] + h0, x[1] - h1])?;
    let fmp = f([x[0] - h0, x[1] + h1])?;
    let fmm = f([x[0] - h0, x[1] - h1])?;
    let d00 = (fp0 - 2.0 * f00 + fm0) / (h0 * h0);
    let d11 = (f0p - 2.0 * f00 + f0m) / (h1 * h1);
    let d01 = (fpp - fpm - fmp + fmm) / (4.0 * h0 * h1);
    Ok([[d00, d01], [d01, d11]])
}

/// Jacobian `∂F/∂x` of a map `R² → R²`.
pub fn jacobian2<F, E>(f: F, x: [f64; 2], scale: [f64; 2], step: fn(f64) -> f64) -> Result<[[f64; 2]; 2], E>
where
    F: Fn([f64; 2]) -> Result<[f64; 2], E>,
{
    let (h0, h1) = steps(x, scale, step);
    let p0 = f([x[0] + h0, x[1]])?;
    let m0 = f([x[0] - h0, x[1]])?;
    let p1 = f([x[0], x[1] + h1])?;
    let m1 = f([x[0], x[1] - h1])?;
    Ok([
        [(p0[0] - m0[0]) / (2.0 * h0), (p1[0] - m1[0]) / (2.0 * h1)],
        [(p0[1] - m0[1]) / (2.0 * h0), (p1[1] - m1[1]) / (2.0 * h1)],
    ])
}

/// `|a − b| / max(|b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}
