//! Small dense-vector helpers over `f64` slices.

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm_sq(x: &[f64]) -> f64 {
    dot(x, x)
}

pub fn norm(x: &[f64]) -> f64 {
    norm_sq(x).sqrt()
}

/// `y += alpha · x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x {
        *xi *= alpha;
    }
}

/// `‖x − y‖`
pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// `max_i |x_i − y_i| / max(‖y‖_∞, tiny)`
pub fn rel_diff_inf(x: &[f64], y: &[f64]) -> f64 {
    let num = x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let den = y.iter().map(|b| b.abs()).fold(0.0, f64::max);
    num / den.max(f64::MIN_POSITIVE)
}

/// `x / ‖x‖`; `None` for the zero vector.
pub fn normalized(mut x: Vec<f64>) -> Option<Vec<f64>> {
    let n = norm(&x);
    if n == 0.0 || !n.is_finite() {
        return None;
    }
    scale(1.0 / n, &mut x);
    Some(x)
}
