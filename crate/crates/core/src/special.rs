//! Polygamma functions and a few zeta values.
//!
//! Arguments are shifted upward by the recurrence until they clear
//! `ASYMPTOTIC_START`, after which the Stirling-type series with ten
//! Bernoulli terms is accurate to well below double precision.

use crate::sum::Neumaier;

/// Apéry's constant to 30 digits.
pub const ZETA3: f64 = 1.202_056_903_159_594_3;
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

const ASYMPTOTIC_START: f64 = 20.0;

// B_2, B_4, ..., B_20
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

pub fn zeta4() -> f64 {
    std::f64::consts::PI.powi(4) / 90.0
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn asymptotic(m: u32, y: f64) -> f64 {
    if m == 0 {
        let mut s = Neumaier::new();
        s.add(y.ln());
        s.add(-0.5 / y);
        let y2 = y * y;
        let mut p = y2;
        for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
            let two_k = 2.0 * (k + 1) as f64;
            s.add(-b / (two_k * p));
            p *= y2;
        }
        return s.value();
    }
    let mf = m as i32;
    let mut s = Neumaier::new();
    s.add(factorial(m - 1) / y.powi(mf));
    s.add(factorial(m) / (2.0 * y.powi(mf + 1)));
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let two_k = 2 * (k as u32 + 1);
        // (2k+m-1)!/(2k)! as a running product avoids overflow
        let ratio: f64 = (two_k + 1..two_k + m).fold(1.0, |a, j| a * j as f64);
        s.add(b * ratio / y.powi(two_k as i32 + mf));
    }
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    sign * s.value()
}

/// m-th derivative of the digamma function. Returns NaN at the poles
/// (non-positive integers) and for non-finite input.
pub fn polygamma(m: u32, x: f64) -> f64 {
    if !x.is_finite() || (x <= 0.0 && x == x.floor()) {
        return f64::NAN;
    }
    let mut acc = Neumaier::new();
    let mut y = x;
    while y < ASYMPTOTIC_START {
        acc.add(y.powi(-(m as i32) - 1));
        y += 1.0;
    }
    let shift = if m == 0 {
        -acc.value()
    } else {
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        sign * factorial(m) * acc.value()
    };
    asymptotic(m, y) + shift
}

pub fn digamma(x: f64) -> f64 {
    polygamma(0, x)
}

pub fn trigamma(x: f64) -> f64 {
    polygamma(1, x)
}
