//! Points of the right half-plane stored as (log modulus, argument).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogPolar {
    pub lambda: f64,
    pub theta: f64,
}

impl LogPolar {
    pub fn new(lambda: f64, theta: f64) -> Self {
        LogPolar { lambda, theta }
    }

    /// Positive real t = e^lambda.
    pub fn real(t: f64) -> Self {
        LogPolar { lambda: t.ln(), theta: 0.0 }
    }

    pub fn from_log(lambda: f64) -> Self {
        LogPolar { lambda, theta: 0.0 }
    }

    pub fn from_complex(w: C64) -> Self {
        LogPolar { lambda: w.norm().ln(), theta: w.arg() }
    }

    /// Linear coordinates; overflows to infinity for huge lambda.
    pub fn to_complex(self) -> C64 {
        C64::from_polar(self.lambda.exp(), self.theta)
    }

    pub fn in_half_plane(self) -> bool {
        self.theta.abs() < FRAC_PI_2
    }

    /// log Re w.
    pub fn log_re(self) -> f64 {
        self.lambda + self.theta.cos().ln()
    }

    /// Complex logarithm lambda + i theta.
    pub fn log(self) -> C64 {
        C64::new(self.lambda, self.theta)
    }

    pub fn re(self) -> f64 {
        self.lambda.exp() * self.theta.cos()
    }

    pub fn im(self) -> f64 {
        self.lambda.exp() * self.theta.sin()
    }
}

/// ln(1 + x) accurate for small complex x.
pub fn log1p_c(x: C64) -> C64 {
    if x.norm() < 1e-4 {
        let x2 = x * x;
        x - x2 / 2.0 + x2 * x / 3.0 - x2 * x2 / 4.0
    } else {
        (C64::new(1.0, 0.0) + x).ln()
    }
}

/// log(e^l + i b) for real b, stable when l is large.
pub fn log_shift(l: C64, b: f64) -> C64 {
    if l.re > 30.0 {
        l + log1p_c(C64::new(0.0, b) * (-l).exp())
    } else {
        (l.exp() + C64::new(0.0, b)).ln()
    }
}
