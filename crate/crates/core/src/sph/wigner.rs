use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

type Key = [i32; 6];

fn cache() -> &'static RwLock<HashMap<Key, f64>> {
    static CACHE: OnceLock<RwLock<HashMap<Key, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn factorial(n: i32) -> BigInt {
    let mut f = BigInt::one();
    for i in 2..=n {
        f *= i;
    }
    f
}

/// Wigner 3j symbol for integer arguments, evaluated with exact rational arithmetic.
///
/// Returns 0 whenever a selection rule is violated.
pub fn wigner3j(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> f64 {
    if j1 < 0 || j2 < 0 || j3 < 0 {
        return 0.0;
    }
    if m1 + m2 + m3 != 0 || m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return 0.0;
    }
    if j3 < (j1 - j2).abs() || j3 > j1 + j2 {
        return 0.0;
    }
    if m1 == 0 && m2 == 0 && (j1 + j2 + j3) % 2 == 1 {
        return 0.0;
    }
    let key = [j1, j2, j3, m1, m2, m3];
    if let Some(v) = cache().read().ok().and_then(|c| c.get(&key).copied()) {
        return v;
    }
    let v = racah(j1, j2, j3, m1, m2, m3);
    if let Ok(mut c) = cache().write() {
        c.insert(key, v);
    }
    v
}

fn racah(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> f64 {
    let tmin = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let tmax = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = BigRational::zero();
    for t in tmin..=tmax {
        let den = factorial(t)
            * factorial(j3 - j2 + t + m1)
            * factorial(j3 - j1 + t - m2)
            * factorial(j1 + j2 - j3 - t)
            * factorial(j1 - t - m1)
            * factorial(j2 - t + m2);
        let term = BigRational::new(BigInt::one(), den);
        if t % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return 0.0;
    }
    let delta = BigRational::new(
        factorial(j1 + j2 - j3) * factorial(j1 - j2 + j3) * factorial(-j1 + j2 + j3),
        factorial(j1 + j2 + j3 + 1),
    );
    let prod = factorial(j1 + m1)
        * factorial(j1 - m1)
        * factorial(j2 + m2)
        * factorial(j2 - m2)
        * factorial(j3 + m3)
        * factorial(j3 - m3);
    let negative = sum.is_negative();
    let square = delta * BigRational::from_integer(prod) * &sum * &sum;
    let mag = square.to_f64().unwrap_or(f64::NAN).sqrt();
    let phase = if (j1 - j2 - m3).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    if negative {
        -phase * mag
    } else {
        phase * mag
    }
}

/// Gaunt coefficient `W_{v,n,n'}^{u,m,m'} = \int Y_v^u Y_n^{m*} Y_{n'}^{m'} dOmega`.
pub fn gaunt_w(v: u32, u: i32, n: u32, m: i32, n2: u32, m2: i32) -> f64 {
    if u - m + m2 != 0 {
        return 0.0;
    }
    let (v, n, n2) = (v as i32, n as i32, n2 as i32);
    let a = wigner3j(v, n, n2, 0, 0, 0);
    if a == 0.0 {
        return 0.0;
    }
    let b = wigner3j(v, n, n2, u, -m, m2);
    let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let norm = (((2 * v + 1) * (2 * n + 1) * (2 * n2 + 1)) as f64 / (4.0 * PI)).sqrt();
    sign * norm * a * b
}
