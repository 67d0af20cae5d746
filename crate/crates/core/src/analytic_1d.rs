//! Closed-form averaged minibatch plan on the real line.
//!
//! For `n` distinct sorted points, uniform weights, sampling without
//! replacement and any batch size `m`, every batch plan is the sorted
//! coupling, and the averaged plan has the binomial closed form computed here.
//! Indices are 0-based.

use ndarray::Array2;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational plan entries.
pub type Rational = BigRational;

pub fn rational_to_f64(v: &Rational) -> f64 {
    v.to_f64().expect("finite rational")
}

/// Largest `n` accepted by the closed form.
pub const MAX_N: usize = 64;

/// Largest `n` accepted by the with-replacement enumerator.
pub const MAX_N_WITH_REPLACEMENT: usize = 6;

fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

fn check(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 || m > n {
        return Err(Error::InvalidParameter(format!("need 1 <= m <= n, got n = {n}, m = {m}")));
    }
    if n > MAX_N {
        return Err(Error::InvalidParameter(format!("closed form limited to n <= {MAX_N}, got {n}")));
    }
    Ok(())
}

/// Entry `(j, k)` of the averaged plan, in exact rational arithmetic.
pub fn mb_plan_1d_entry(n: usize, m: usize, j: usize, k: usize) -> Result<BigRational> {
    check(n, m)?;
    if j >= n || k >= n {
        return Err(Error::IndexOutOfRange(format!("({j}, {k}) outside a {n}x{n} plan")));
    }
    let (n, m, j, k) = (n as i64, m as i64, j as i64 + 1, k as i64 + 1);
    let lo = 1.max(m - n + j).max(m - n + k);
    let hi = j.min(k);
    let mut sum = BigInt::zero();
    for i in lo..=hi {
        sum += binomial(j - 1, i - 1) * binomial(k - 1, i - 1) * binomial(n - j, m - i) * binomial(n - k, m - i);
    }
    let c = binomial(n, m);
    Ok(BigRational::new(sum, BigInt::from(m) * &c * &c))
}

/// The full averaged plan in exact arithmetic.
pub fn mb_plan_1d_exact(n: usize, m: usize) -> Result<Vec<Vec<BigRational>>> {
    check(n, m)?;
    (0..n).map(|j| (0..n).map(|k| mb_plan_1d_entry(n, m, j, k)).collect()).collect()
}

/// The full averaged plan rounded to `f64`.
pub fn mb_plan_1d(n: usize, m: usize) -> Result<Array2<f64>> {
    let exact = mb_plan_1d_exact(n, m)?;
    Ok(Array2::from_shape_fn((n, n), |(j, k)| exact[j][k].to_f64().expect("finite rational")))
}

/// Averaged plan for sampling with replacement and uniform reweighting, by
/// brute-force enumeration of batch multisets.
///
/// A batch pair couples its `r`-th smallest elements with mass `1/m`; repeated
/// indices receive the mass of every position they occupy.
pub fn mb_plan_1d_with_replacement(n: usize, m: usize) -> Result<Vec<Vec<BigRational>>> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter("need n >= 1 and m >= 1".into()));
    }
    if n > MAX_N_WITH_REPLACEMENT {
        return Err(Error::InvalidParameter(format!(
            "with-replacement enumeration limited to n <= {MAX_N_WITH_REPLACEMENT}, got {n}"
        )));
    }
    let multisets = sorted_multisets(n, m);
    let total = BigInt::from(n).pow(m as u32);
    let mut plan = vec![vec![BigRational::zero(); n]; n];
    for (s, ws) in &multisets {
        for (t, wt) in &multisets {
            let w = BigRational::new(ws * wt, &total * &total * BigInt::from(m));
            for r in 0..m {
                plan[s[r]][t[r]] += &w;
            }
        }
    }
    Ok(plan)
}

/// Nondecreasing m-tuples over `0..n` with their number of orderings.
fn sorted_multisets(n: usize, m: usize) -> Vec<(Vec<usize>, BigInt)> {
    let mut out = Vec::new();
    let mut t = vec![0usize; m];
    loop {
        let mut count = BigInt::one();
        let mut run = 0i64;
        for q in 0..m {
            run = if q > 0 && t[q] == t[q - 1] { run + 1 } else { 1 };
            count = count * BigInt::from(q as i64 + 1) / BigInt::from(run);
        }
        out.push((t.clone(), count));
        let mut pos = m;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if t[pos] < n - 1 {
                t[pos] += 1;
                for q in pos + 1..m {
                    t[q] = t[pos];
                }
                break;
            }
        }
    }
}
