//! ArcTan surrogate for the Heaviside spike nonlinearity.
//!
//! The backward pass substitutes `g(x) = (1/a) / (1 + (pi*x/a)^2)`, the
//! derivative of `sigma(x) = arctan(pi*x/a)/pi + 1/2`, for the Dirac spike
//! derivative. Relaxation-mode training replaces the forward Heaviside with
//! `sigma` itself so the whole network becomes differentiable.

use crate::engine::tensor::Scalar;

/// Width `a` of the surrogate; larger values widen and lower the peak.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurrogateConfig {
    pub width: f64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig { width: 1.0 }
    }
}

impl SurrogateConfig {
    pub fn new(width: f64) -> Self {
        assert!(width > 0.0, "surrogate width must be positive");
        SurrogateConfig { width }
    }
}

/// `g(x) = (1/a) / (1 + (pi*x/a)^2)`, evaluated at the membrane offset
/// `x = U - u_th`. Peaks at `1/a` on the threshold and is even in `x`.
#[inline]
pub fn arctan_surrogate_grad<T: Scalar>(x: T, cfg: &SurrogateConfig) -> T {
    let a = cfg.width;
    let z = std::f64::consts::PI * x.to_f64() / a;
    T::from_f64((1.0 / a) / (1.0 + z * z))
}

/// The smooth spike used in relaxation mode: `arctan(pi*x/a)/pi + 1/2`.
#[inline]
pub fn arctan_sigma<T: Scalar>(x: T, cfg: &SurrogateConfig) -> T {
    let a = cfg.width;
    let z = std::f64::consts::PI * x.to_f64() / a;
    T::from_f64(z.atan() / std::f64::consts::PI + 0.5)
}
