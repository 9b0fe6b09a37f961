//! Special functions for tail probabilities.
//!
//! `ln_gamma` uses the Lanczos approximation (g = 7, 9 terms; relative error
//! about 1e-15 for positive arguments). The regularized incomplete gamma
//! function switches between its power series (x < a + 1) and Legendre's
//! continued fraction; the regularized incomplete beta function uses the
//! Lentz-evaluated continued fraction with the usual symmetry swap. Both
//! iterate to a relative increment of 1e-16, giving tail probabilities with
//! relative error below 1e-10 over the degrees of freedom and statistics
//! used for residual and correlation tests.

use libm::{exp, fabs, log, sin};

const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 10_000;

pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = core::f64::consts::PI;
        return log(pi / fabs(sin(pi * x))) - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + 7.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * log(2.0 * core::f64::consts::PI) + (x + 0.5) * log(t) - t + log(a)
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if fabs(del) < fabs(sum) * EPS {
            break;
        }
    }
    sum * exp(-x + a * log(x) - ln_gamma(a))
}

fn gamma_cont_frac(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = b + an / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if fabs(del - 1.0) < EPS {
            break;
        }
    }
    exp(-x + a * log(x) - ln_gamma(a)) * h
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_cont_frac(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_cont_frac(a, x)
    }
}

fn beta_cont_frac(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if fabs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if fabs(del - 1.0) < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn beta_inc(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * log(x) + b * libm::log1p(-x);
    if x < (a + 1.0) / (a + b + 2.0) {
        exp(ln_front) * beta_cont_frac(a, b, x) / a
    } else {
        1.0 - exp(ln_front) * beta_cont_frac(b, a, 1.0 - x) / b
    }
}

/// Upper tail `P(X >= x)` of the chi-square distribution.
pub fn chi2_sf(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(0.5 * dof, 0.5 * x).clamp(0.0, 1.0)
}

/// Two-sided tail `P(|T| >= |t|)` of Student's t.
pub fn student_t_two_sided(t: f64, dof: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let x = dof / (dof + t * t);
    beta_inc(0.5 * dof, 0.5, x).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_at_integers() {
        // ln((n-1)!)
        let mut fact = 1.0f64;
        for n in 1..20 {
            if n > 1 {
                fact *= (n - 1) as f64;
            }
            let rel = (ln_gamma(n as f64) - libm::log(fact)).abs() / libm::log(fact).abs().max(1.0);
            assert!(rel < 1e-13, "n = {n}");
        }
        assert!((ln_gamma(0.5) - 0.5 * libm::log(core::f64::consts::PI)).abs() < 1e-14);
    }

    #[test]
    fn chi2_two_dof_closed_form() {
        for &x in &[0.01, 0.5, 1.0, 3.0, 10.0, 50.0] {
            let exact = libm::exp(-0.5 * x);
            assert!((chi2_sf(x, 2.0) - exact).abs() <= 1e-12 * exact);
        }
    }

    #[test]
    fn t_one_dof_is_cauchy() {
        for &t in &[0.1, 1.0, 2.5, 10.0] {
            let exact = 1.0 - 2.0 * libm::atan(t) / core::f64::consts::PI;
            assert!((student_t_two_sided(t, 1.0) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn tails_are_monotone() {
        let mut prev = 1.0;
        for i in 0..100 {
            let p = chi2_sf(i as f64 * 0.3, 2.0);
            assert!(p <= prev);
            prev = p;
        }
    }
}
