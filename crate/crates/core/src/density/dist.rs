use thiserror::Error;

pub const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum DistParamError {
    #[error("normal stddev must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("uniform bounds must satisfy a < b, got [{0}, {1})")]
    EmptySupport(f64, f64),
}

pub fn logpdf_normal(x: f64, mu: f64, sigma: f64) -> Result<f64, DistParamError> {
    if !(sigma > 0.0) {
        return Err(DistParamError::NonPositiveScale(sigma));
    }
    Ok(normal_lp(x, mu, sigma))
}

/// `-log(b - a)` on `[a, b)`, `-inf` elsewhere.
pub fn logpdf_uniform(x: f64, a: f64, b: f64) -> Result<f64, DistParamError> {
    if !(a < b) {
        return Err(DistParamError::EmptySupport(a, b));
    }
    Ok(uniform_lp(x, a, b))
}

/// Total version used during inference: bad parameters give `-inf`.
#[inline]
pub(crate) fn normal_lp(x: f64, mu: f64, sigma: f64) -> f64 {
    if !(sigma > 0.0) {
        return f64::NEG_INFINITY;
    }
    let z = (x - mu) / sigma;
    -HALF_LN_2PI - sigma.ln() - 0.5 * z * z
}

#[inline]
pub(crate) fn uniform_lp(x: f64, a: f64, b: f64) -> f64 {
    if a < b && a <= x && x < b {
        -(b - a).ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Partial derivatives of the normal log-density with respect to
/// `(x, mu, sigma)`.
#[inline]
pub(crate) fn normal_lp_grad(x: f64, mu: f64, sigma: f64) -> [f64; 3] {
    let d = x - mu;
    let s2 = sigma * sigma;
    [-d / s2, d / s2, -1.0 / sigma + d * d / (s2 * sigma)]
}

/// Partial derivatives of the uniform log-density with respect to
/// `(x, a, b)` inside the support.
#[inline]
pub(crate) fn uniform_lp_grad(a: f64, b: f64) -> [f64; 3] {
    let w = b - a;
    [0.0, 1.0 / w, -1.0 / w]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert!((logpdf_normal(1.0, 1.0, 1.0).unwrap() + 0.918_938_5).abs() < 1e-7);
        assert!((HALF_LN_2PI - 0.5 * (2.0 * std::f64::consts::PI).ln()).abs() < 1e-15);
        assert_eq!(logpdf_uniform(0.5, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(logpdf_uniform(-0.1, 0.0, 1.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(logpdf_uniform(1.0, 0.0, 1.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(logpdf_uniform(0.0, 0.0, 1.0).unwrap(), 0.0);
        assert!((logpdf_uniform(1.0, 0.0, 4.0).unwrap() + 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn parameter_errors() {
        assert_eq!(
            logpdf_normal(0.0, 0.0, 0.0),
            Err(DistParamError::NonPositiveScale(0.0))
        );
        assert!(logpdf_normal(0.0, 0.0, -1.0).is_err());
        assert!(logpdf_uniform(0.0, 1.0, 1.0).is_err());
        assert_eq!(normal_lp(0.0, 0.0, -1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn normal_gradient_matches_differences() {
        let (x, mu, s) = (0.7, -0.3, 1.3);
        let g = normal_lp_grad(x, mu, s);
        let h = 1e-6;
        let fd = [
            (normal_lp(x + h, mu, s) - normal_lp(x - h, mu, s)) / (2.0 * h),
            (normal_lp(x, mu + h, s) - normal_lp(x, mu - h, s)) / (2.0 * h),
            (normal_lp(x, mu, s + h) - normal_lp(x, mu, s - h)) / (2.0 * h),
        ];
        for i in 0..3 {
            assert!((g[i] - fd[i]).abs() < 1e-8, "{i}: {} vs {}", g[i], fd[i]);
        }
    }
}
