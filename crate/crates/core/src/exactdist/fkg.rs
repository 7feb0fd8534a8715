use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::bits::BitString;
use crate::error::{check_log2_budget, Error, Result};
use crate::rational::{self, Rational};

/// Exact comparison of `Pr[A and B]` against `Pr[A] Pr[B]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FkgVerdict {
    #[serde(with = "rational::fraction")]
    pub pr_a: Rational,
    #[serde(with = "rational::fraction")]
    pub pr_b: Rational,
    #[serde(with = "rational::fraction")]
    pub lhs: Rational,
    #[serde(with = "rational::fraction")]
    pub rhs: Rational,
    pub holds: bool,
}

/// Default cap on the universe size enumerated by [`fkg_check`].
pub const FKG_UNIVERSE_LIMIT: u32 = 20;

/// Evaluates both events on every point of `{0,1}^u` under the product
/// measure with `Pr[x_i = 1] = p[i - 1]`.
///
/// Both events are first checked for monotonicity over every single-bit
/// raise; a failure names the offending pair.
pub fn fkg_check(
    p: &[Rational],
    a: impl Fn(&BitString) -> bool,
    b: impl Fn(&BitString) -> bool,
    limit: u32,
) -> Result<FkgVerdict> {
    let u = p.len();
    check_log2_budget("FKG universe", u, limit.min(63))?;
    if let Some(bad) = p.iter().find(|q| !rational::in_unit_interval(q)) {
        return Err(Error::Precondition(format!("probability {bad} outside [0,1]")));
    }
    let points = 1usize << u;
    let table_a: Vec<bool> = (0..points).map(|x| a(&BitString::from_index(u, x as u64))).collect();
    let table_b: Vec<bool> = (0..points).map(|x| b(&BitString::from_index(u, x as u64))).collect();
    check_monotone(u, &table_a)?;
    check_monotone(u, &table_b)?;

    // With p_i = a_i / b_i every point weight is an integer over D = prod b_i.
    let mut weights: Vec<BigInt> = vec![BigInt::one()];
    let mut denom = BigInt::one();
    for q in p {
        let (num, den) = (q.numer(), q.denom());
        let miss = den - num;
        let mut next = Vec::with_capacity(weights.len() * 2);
        next.extend(weights.iter().map(|w| w * &miss));
        next.extend(weights.iter().map(|w| w * num));
        weights = next;
        denom *= den;
    }
    let (mut sa, mut sb, mut sab) = (BigInt::zero(), BigInt::zero(), BigInt::zero());
    for (x, w) in weights.iter().enumerate() {
        if table_a[x] {
            sa += w;
        }
        if table_b[x] {
            sb += w;
        }
        if table_a[x] && table_b[x] {
            sab += w;
        }
    }
    let holds = &sab * &denom >= &sa * &sb;
    let pr_a = Rational::new(sa, denom.clone());
    let pr_b = Rational::new(sb, denom.clone());
    let lhs = Rational::new(sab, denom);
    let rhs = &pr_a * &pr_b;
    Ok(FkgVerdict { pr_a, pr_b, lhs, rhs, holds })
}

fn check_monotone(u: usize, table: &[bool]) -> Result<()> {
    for x in 0..table.len() {
        if !table[x] {
            continue;
        }
        for i in 0..u {
            let up = x | (1 << i);
            if up != x && !table[up] {
                return Err(Error::Monotonicity {
                    lower: BitString::from_index(u, x as u64),
                    upper: BitString::from_index(u, up as u64),
                });
            }
        }
    }
    Ok(())
}
