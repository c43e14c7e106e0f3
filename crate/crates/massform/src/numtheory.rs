//! Exact integer and rational number theory.
//!
//! Everything here is exact: factorization and Kronecker symbols on machine
//! integers, Bernoulli numbers (ordinary and generalized) as big rationals,
//! Dirichlet L-values at non-positive integers via the functional-equation
//! identities, imaginary-quadratic class numbers by reduced-form counting,
//! and the cyclotomic invariants w_k of quadratic fields.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with positive
/// denominator (guaranteed by the backing implementation).
pub type ExactRational = BigRational;

/// Convenience constructor for an exact rational from machine integers.
pub fn rat(num: i64, den: i64) -> ExactRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Convenience constructor for an exact rational integer.
pub fn rat_int(n: i64) -> ExactRational {
    BigRational::from_integer(BigInt::from(n))
}

// ---------------------------------------------------------------------------
// Primality, factorization
// ---------------------------------------------------------------------------

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin primality test, valid for all `u64` inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    // This base set is known to be deterministic for all n < 3.3·10^24.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Pollard's rho (Brent's cycle variant). Caller guarantees `n` composite,
/// odd, and not a prime power handled elsewhere; returns a nontrivial factor.
fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorization of `m ≥ 1` as (prime, exponent) pairs with strictly
/// increasing primes. Trial division up to 10^6, Pollard rho beyond.
pub fn factorize(m: u64) -> Vec<(u64, u32)> {
    assert!(m >= 1, "factorize requires m >= 1");
    let mut n = m;
    let mut out: Vec<(u64, u32)> = Vec::new();
    let push = |p: u64, e: u32, out: &mut Vec<(u64, u32)>| {
        if e > 0 {
            out.push((p, e));
        }
    };
    for p in [2u64, 3, 5] {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        push(p, e, &mut out);
    }
    // Wheel over 6k±1.
    let mut p = 7u64;
    while p <= 1_000_000 && p * p <= n {
        for q in [p, p + 4] {
            let mut e = 0;
            while n % q == 0 {
                n /= q;
                e += 1;
            }
            push(q, e, &mut out);
        }
        p += 6;
    }
    // Remaining cofactor: prime, or split recursively with rho.
    fn split(n: u64, acc: &mut Vec<u64>) {
        if n == 1 {
            return;
        }
        if is_prime(n) {
            acc.push(n);
            return;
        }
        let d = pollard_rho(n);
        split(d, acc);
        split(n / d, acc);
    }
    let mut rest = Vec::new();
    split(n, &mut rest);
    rest.sort_unstable();
    let mut i = 0;
    while i < rest.len() {
        let p = rest[i];
        let mut e = 0;
        while i < rest.len() && rest[i] == p {
            e += 1;
            i += 1;
        }
        out.push((p, e));
    }
    out.sort_unstable();
    out
}

/// Number of distinct odd prime divisors of `m` (the multiplicity counter
/// used by the valuation bounds).
pub fn odd_prime_divisor_count(m: u64) -> u32 {
    factorize(m).iter().filter(|&&(p, _)| p != 2).count() as u32
}

/// All primes up to `n` inclusive, by sieve.
pub fn primes_upto(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut p = 2usize;
    while p * p <= n {
        if sieve[p] {
            let mut q = p * p;
            while q <= n {
                sieve[q] = false;
                q += p;
            }
        }
        p += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| if b { Some(i as u64) } else { None })
        .collect()
}

/// True if `m ≥ 1` is squarefree.
pub fn is_squarefree(m: u64) -> bool {
    m >= 1 && factorize(m).iter().all(|&(_, e)| e == 1)
}

/// The squarefree part s of a nonzero integer: m/s is a positive perfect
/// square and s carries the sign of m.
pub fn squarefree_part(m: i64) -> Result<i64> {
    if m == 0 {
        return Err(Error::InvalidInput("squarefree_part of 0".into()));
    }
    let mut s: i64 = 1;
    for (p, e) in factorize(m.unsigned_abs()) {
        if e % 2 == 1 {
            s *= p as i64;
        }
    }
    Ok(if m < 0 { -s } else { s })
}

/// p-adic valuation of a nonzero machine integer.
pub fn vp_i64(mut n: i64, p: u64) -> u32 {
    assert!(n != 0);
    let p = p as i64;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

// ---------------------------------------------------------------------------
// Kronecker symbol
// ---------------------------------------------------------------------------

/// Kronecker symbol (a|n), fully multiplicative extension of the Jacobi
/// symbol to all integer pairs except (0, 0).
pub fn kronecker(a: i64, n: i64) -> i64 {
    assert!(a != 0 || n != 0, "kronecker symbol (0|0) is undefined");
    // (2|a) for odd a, indexed by a mod 8.
    const TAB2: [i64; 8] = [0, 1, 0, -1, 0, -1, 0, 1];
    let (mut a, mut n) = (a, n);
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    let mut v = 0;
    while n % 2 == 0 {
        n /= 2;
        v += 1;
    }
    let mut k = if v % 2 == 0 { 1 } else { TAB2[(a & 7) as usize] };
    if n < 0 {
        n = -n;
        if a < 0 {
            k = -k;
        }
    }
    loop {
        if a == 0 {
            return if n > 1 { 0 } else { k };
        }
        v = 0;
        while a % 2 == 0 {
            a /= 2;
            v += 1;
        }
        if v % 2 == 1 {
            k *= TAB2[(n & 7) as usize];
        }
        // Quadratic reciprocity sign flip when both are ≡ 3 mod 4.
        if a & n & 2 != 0 {
            k = -k;
        }
        let r = a.abs();
        a = n % r;
        n = r;
    }
}

/// Checked variant for untrusted input.
pub fn kronecker_checked(a: i64, n: i64) -> Result<i64> {
    if a == 0 && n == 0 {
        return Err(Error::InvalidInput("kronecker symbol (0|0)".into()));
    }
    Ok(kronecker(a, n))
}

// ---------------------------------------------------------------------------
// Bernoulli numbers and L-values
// ---------------------------------------------------------------------------

/// B_0..B_k with the convention B_1 = −1/2, via the defining recurrence
/// Σ_{j≤n} C(n+1,j)·B_j = 0.
pub fn bernoulli_upto(k: usize) -> Vec<ExactRational> {
    let mut b: Vec<ExactRational> = Vec::with_capacity(k + 1);
    b.push(ExactRational::one());
    for n in 1..=k {
        // binom accumulates C(n+1, j) incrementally.
        let mut binom = BigInt::one();
        let mut sum = ExactRational::zero();
        for (j, bj) in b.iter().enumerate().take(n) {
            sum += bj * BigRational::from_integer(binom.clone());
            binom = binom * BigInt::from(n as i64 + 1 - j as i64) / BigInt::from(j as i64 + 1);
        }
        b.push(-sum / BigRational::from_integer(BigInt::from(n as i64 + 1)));
    }
    b
}

/// The k-th Bernoulli number, B_1 = −1/2 convention.
pub fn bernoulli(k: usize) -> ExactRational {
    bernoulli_upto(k).pop().unwrap()
}

/// ζ(s) at an integer s = 1−k ≤ −1 with k even, via ζ(1−k) = −B_k/k.
pub fn zeta_nonpositive(s: i64) -> Result<ExactRational> {
    if s >= 0 {
        return Err(Error::InvalidInput(format!("zeta_nonpositive needs s <= -1, got {s}")));
    }
    let k = 1 - s; // k >= 2
    if k % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "zeta_nonpositive needs 1-s even, got s = {s}"
        )));
    }
    Ok(-bernoulli(k as usize) / rat_int(k))
}

/// A real quadratic Dirichlet character attached to a fundamental
/// discriminant, evaluated through the Kronecker symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadCharacter {
    disc: i64,
}

impl QuadCharacter {
    /// Builds the character for a fundamental discriminant. `1` is accepted
    /// and denotes the trivial character of ℚ.
    pub fn new(disc: i64) -> Result<Self> {
        if !is_fundamental_discriminant(disc) {
            return Err(Error::InvalidInput(format!("{disc} is not a fundamental discriminant")));
        }
        Ok(QuadCharacter { disc })
    }

    /// The underlying fundamental discriminant.
    pub fn discriminant(&self) -> i64 {
        self.disc
    }

    /// Conductor = |discriminant|.
    pub fn conductor(&self) -> u64 {
        self.disc.unsigned_abs()
    }

    /// χ(a) ∈ {−1, 0, 1}.
    pub fn eval(&self, a: i64) -> i64 {
        kronecker(self.disc, a)
    }

    /// True for the trivial character (discriminant 1).
    pub fn is_principal(&self) -> bool {
        self.disc == 1
    }
}

/// True if d is 1 or a fundamental discriminant: squarefree d ≡ 1 mod 4, or
/// d = 4m with m squarefree and m ≡ 2, 3 mod 4.
pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree_signed(d),
        0 => {
            let m = d / 4;
            is_squarefree_signed(m) && matches!(m.rem_euclid(4), 2 | 3)
        }
        _ => false,
    }
}

fn is_squarefree_signed(m: i64) -> bool {
    m != 0 && is_squarefree(m.unsigned_abs())
}

/// Fundamental discriminant of the quadratic field ℚ(√m) (returns 1 when m
/// is a perfect square).
pub fn fundamental_discriminant(m: i64) -> Result<i64> {
    let s = squarefree_part(m)?;
    Ok(if s.rem_euclid(4) == 1 { s } else { 4 * s })
}

/// Generalized Bernoulli number B_{k,χ} = F^{k−1} Σ_{a=1..F} χ(a)·B_k(a/F),
/// with B_k(x) the Bernoulli polynomial.
pub fn generalized_bernoulli(k: usize, chi: &QuadCharacter) -> ExactRational {
    assert!(k >= 1);
    let f = chi.conductor() as i64;
    let bern = bernoulli_upto(k);
    // Precompute binomial row C(k, j).
    let mut binom: Vec<BigInt> = Vec::with_capacity(k + 1);
    let mut c = BigInt::one();
    for j in 0..=k {
        binom.push(c.clone());
        c = c * BigInt::from((k - j) as i64) / BigInt::from(j as i64 + 1);
    }
    let mut total = ExactRational::zero();
    for a in 1..=f {
        let ca = chi.eval(a);
        if ca == 0 {
            continue;
        }
        // B_k(a/F) = Σ_j C(k,j) B_j (a/F)^{k−j}
        let x = BigRational::new(BigInt::from(a), BigInt::from(f));
        let mut poly = ExactRational::zero();
        let mut xpow = ExactRational::one();
        // Accumulate from j = k downward so xpow tracks (a/F)^{k−j}.
        for j in (0..=k).rev() {
            poly += BigRational::from_integer(binom[j].clone()) * &bern[j] * &xpow;
            xpow *= &x;
        }
        total += rat_int(ca) * poly;
    }
    let scale = num_traits::pow(BigRational::from_integer(BigInt::from(f)), k - 1);
    scale * total
}

/// L(1−k, χ) = −B_{k,χ}/k for k ≥ 1 and non-principal quadratic χ.
pub fn dirichlet_l_nonpositive(s: i64, chi: &QuadCharacter) -> Result<ExactRational> {
    if s > 0 {
        return Err(Error::InvalidInput(format!("dirichlet_l_nonpositive needs s <= 0, got {s}")));
    }
    if chi.is_principal() {
        return Err(Error::InvalidInput("L-values of the principal character are not supported".into()));
    }
    let k = (1 - s) as usize;
    Ok(-generalized_bernoulli(k, chi) / rat_int(k as i64))
}

// ---------------------------------------------------------------------------
// Class numbers
// ---------------------------------------------------------------------------

/// Class number h(d) for a negative discriminant d ≡ 0, 1 mod 4: the number
/// of primitive reduced binary forms (a, b, c) with b²−4ac = d.
pub fn class_number_of_discriminant(d: i64) -> Result<u64> {
    if d >= 0 || d.rem_euclid(4) > 1 {
        return Err(Error::InvalidInput(format!("{d} is not a negative discriminant")));
    }
    let mut h = 0u64;
    let mut b: i64 = if d.rem_euclid(2) == 0 { 0 } else { 1 };
    while b * b <= -d / 3 {
        let t = (b * b - d) / 4;
        let mut a = std::cmp::max(b, 1);
        while a * a <= t {
            if t % a == 0 {
                let c = t / a;
                if gcd3(a, b, c) == 1 {
                    // (a, ±b, c) are distinct classes except at the
                    // reduction boundary b = 0, b = a, or a = c.
                    h += if b == 0 || b == a || a == c { 1 } else { 2 };
                }
            }
            a += 1;
        }
        b += 2;
    }
    Ok(h)
}

fn gcd3(a: i64, b: i64, c: i64) -> i64 {
    a.gcd(&b).gcd(&c)
}

/// h(−b): class number of the imaginary quadratic field ℚ(√−b) for
/// squarefree b ≥ 1.
pub fn class_number_imag(b: u64) -> Result<u64> {
    if !is_squarefree(b) {
        return Err(Error::InvalidInput(format!("class_number_imag needs squarefree b, got {b}")));
    }
    let d = fundamental_discriminant(-(b as i64))?;
    class_number_of_discriminant(d)
}

/// Number of roots of unity in the imaginary quadratic field of fundamental
/// discriminant d < 0: 6 for −3, 4 for −4, else 2.
pub fn roots_of_unity_count(d: i64) -> u64 {
    match d {
        -3 => 6,
        -4 => 4,
        _ => 2,
    }
}

// ---------------------------------------------------------------------------
// w_k of quadratic fields
// ---------------------------------------------------------------------------

/// w_k(F): the largest N such that every element of Gal(F(ζ_N)/F) is killed
/// by k, for F = ℚ (field_disc = 1) or a quadratic field with fundamental
/// discriminant `field_disc`.
///
/// Per prime ℓ, the ℓ-part is the largest ℓ^a such that the exponent of
/// Gal(F(ζ_{ℓ^a})/F) divides k. That Galois group is the full unit group
/// (ℤ/ℓ^a)^× when F ⊄ ℚ(ζ_{ℓ^a}), i.e. when field_disc ∤ ℓ^a, and the
/// index-2 kernel of the field character otherwise. Only primes with
/// (ℓ−1) | 2k can contribute: already at a = 1 the group exponent is ℓ−1 or
/// (ℓ−1)/2.
pub fn w_k_quadratic(k: u64, field_disc: i64) -> Result<u64> {
    if k == 0 {
        return Err(Error::InvalidInput("w_k needs k >= 1".into()));
    }
    if !is_fundamental_discriminant(field_disc) {
        return Err(Error::InvalidInput(format!(
            "{field_disc} is not a fundamental discriminant"
        )));
    }
    let mut candidates: Vec<u64> = vec![2];
    for l in primes_upto(2 * k + 1) {
        if l != 2 && (2 * k) % (l - 1) == 0 {
            candidates.push(l);
        }
    }
    let mut w = 1u64;
    for l in candidates {
        let mut part = 1u64;
        let mut m = l;
        while galois_exponent_divides(m, l, field_disc, k) {
            part = m;
            m = m.checked_mul(l).expect("w_k modulus overflow");
        }
        w *= part;
    }
    Ok(w)
}

/// Does the exponent of Gal(F(ζ_m)/F) divide k, for m = ℓ^a?
fn galois_exponent_divides(m: u64, l: u64, field_disc: i64, k: u64) -> bool {
    let in_kernel_only = field_disc != 1 && m % field_disc.unsigned_abs() == 0;
    for g in 1..m {
        if g % l == 0 {
            continue;
        }
        if in_kernel_only && kronecker(field_disc, g as i64) != 1 {
            continue;
        }
        if pow_mod(g, k, m) != 1 {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Square classes
// ---------------------------------------------------------------------------

/// The square class of n in ℚ_ℓ^×: valuation parity plus a unit tag
/// (Legendre symbol for odd ℓ, the unit residue mod 8 for ℓ = 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SquareClass {
    pub parity: u8,
    pub unit_tag: i8,
}

/// Square class of a positive integer at a prime ℓ.
pub fn square_class_at(n: u64, l: u64) -> SquareClass {
    assert!(n >= 1);
    let v = {
        let mut v = 0u32;
        let mut m = n;
        while m % l == 0 {
            m /= l;
            v += 1;
        }
        v
    };
    let unit = n / l.pow(v);
    let unit_tag = if l == 2 {
        (unit % 8) as i8
    } else {
        kronecker(unit as i64, l as i64) as i8
    };
    SquareClass { parity: (v % 2) as u8, unit_tag }
}

/// True iff n1/n2 is a square in ℚ_ℓ^× for every prime ℓ dividing M.
pub fn square_linked(n1: u64, n2: u64, modulus: i64) -> Result<bool> {
    if modulus == 1 || modulus == -1 || modulus == 0 {
        return Err(Error::InvalidInput("square_linked needs |M| >= 2".into()));
    }
    Ok(factorize(modulus.unsigned_abs())
        .iter()
        .all(|&(l, _)| square_class_at(n1, l) == square_class_at(n2, l)))
}

// ---------------------------------------------------------------------------
// 2-adic valuations with half-integers
// ---------------------------------------------------------------------------

/// A 2-adic valuation that may be a half-integer (from square roots of
/// rationals) or +∞ (valuation of zero). Stored as twice the value so that
/// ordering and arithmetic stay integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfIntValuation {
    Finite { twice: i64 },
    Infinity,
}

impl HalfIntValuation {
    pub fn from_int(v: i64) -> Self {
        HalfIntValuation::Finite { twice: 2 * v }
    }

    pub fn from_twice(twice: i64) -> Self {
        HalfIntValuation::Finite { twice }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, HalfIntValuation::Infinity)
    }

    /// Sum, with +∞ absorbing.
    pub fn add(self, other: HalfIntValuation) -> HalfIntValuation {
        match (self, other) {
            (HalfIntValuation::Finite { twice: a }, HalfIntValuation::Finite { twice: b }) => {
                HalfIntValuation::Finite { twice: a + b }
            }
            _ => HalfIntValuation::Infinity,
        }
    }

    /// Least integer ≥ the value (valuations of integers are integers, so a
    /// half-integer bound can be rounded up when comparing against one).
    pub fn ceil_int(&self) -> Option<i64> {
        match self {
            HalfIntValuation::Finite { twice } => Some((twice + 1).div_euclid(2)),
            HalfIntValuation::Infinity => None,
        }
    }
}

impl PartialOrd for HalfIntValuation {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HalfIntValuation {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (HalfIntValuation::Infinity, HalfIntValuation::Infinity) => std::cmp::Ordering::Equal,
            (HalfIntValuation::Infinity, _) => std::cmp::Ordering::Greater,
            (_, HalfIntValuation::Infinity) => std::cmp::Ordering::Less,
            (HalfIntValuation::Finite { twice: a }, HalfIntValuation::Finite { twice: b }) => {
                a.cmp(b)
            }
        }
    }
}

impl std::fmt::Display for HalfIntValuation {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HalfIntValuation::Infinity => write!(fm, "inf"),
            HalfIntValuation::Finite { twice } if twice % 2 == 0 => write!(fm, "{}", twice / 2),
            HalfIntValuation::Finite { twice } => write!(fm, "{twice}/2"),
        }
    }
}

fn v2_bigint(n: &BigInt) -> i64 {
    debug_assert!(!n.is_zero());
    n.trailing_zeros().expect("nonzero") as i64
}

/// v₂ of a rational: +∞ at zero, otherwise v₂(num) − v₂(den).
pub fn v2_rational(q: &ExactRational) -> HalfIntValuation {
    if q.is_zero() {
        return HalfIntValuation::Infinity;
    }
    HalfIntValuation::from_int(v2_bigint(q.numer()) - v2_bigint(q.denom()))
}

/// v₂(√q) = v₂(q)/2, possibly a half-integer.
pub fn v2_sqrt_rational(q: &ExactRational) -> HalfIntValuation {
    if q.is_zero() {
        return HalfIntValuation::Infinity;
    }
    HalfIntValuation::from_twice(v2_bigint(q.numer()) - v2_bigint(q.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    #[test]
    fn factorize_basics() {
        assert_eq!(factorize(1), vec![]);
        assert_eq!(factorize(28), vec![(2, 2), (7, 1)]);
        assert_eq!(factorize(3705), vec![(3, 1), (5, 1), (13, 1), (19, 1)]);
        // Round-trip small range.
        for n in 1..3000u64 {
            let prod: u64 = factorize(n).iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(prod, n);
        }
        // Large semiprime exercises the rho fallback.
        let a = 1_000_003u64;
        let b = 999_999_937u64;
        assert!(is_prime(a) && is_prime(b));
        assert_eq!(factorize(a * b), vec![(a, 1), (b, 1)]);
    }

    #[test]
    fn primality_spot_checks() {
        assert!(is_prime(2));
        assert!(is_prime((1u64 << 61) - 1));
        assert!(!is_prime(1));
        assert!(!is_prime((1u64 << 32) + 1));
        let sieve = primes_upto(1000);
        for n in 0..=1000u64 {
            assert_eq!(is_prime(n), sieve.binary_search(&n).is_ok(), "n = {n}");
        }
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(5, 1), 1);
        assert_eq!(kronecker(-3, 1), 1);
        assert_eq!(kronecker(-7, 3), -1);
        assert_eq!(kronecker(5, 11), 1);
        assert_eq!(kronecker(2, 7), 1);
        assert_eq!(kronecker(2, 3), -1);
        assert_eq!(kronecker(-1, 7), -1);
        assert_eq!(kronecker(-4, 7), -1);
        assert_eq!(kronecker(12, 0), 0);
        assert_eq!(kronecker(-1, 0), 1);
    }

    #[test]
    fn kronecker_matches_euler_criterion() {
        for p in primes_upto(50).into_iter().filter(|&p| p > 2) {
            for a in -(p as i64)..=(p as i64) {
                let euler = if a.rem_euclid(p as i64) == 0 {
                    0
                } else {
                    let e = pow_mod(a.rem_euclid(p as i64) as u64, (p - 1) / 2, p);
                    if e == 1 {
                        1
                    } else {
                        -1
                    }
                };
                assert_eq!(kronecker(a, p as i64), euler, "a={a} p={p}");
            }
        }
    }

    #[test]
    fn kronecker_bimultiplicative() {
        for a in -30i64..=30 {
            for b in -30i64..=30 {
                for n in [3i64, 5, 7, 9, 15, -7, 2, 8] {
                    assert_eq!(kronecker(a * b, n), kronecker(a, n) * kronecker(b, n));
                }
            }
        }
        for n in -30i64..=30 {
            for m in -30i64..=30 {
                if n == 0 || m == 0 {
                    continue;
                }
                for a in [3i64, 5, -7, 11] {
                    assert_eq!(kronecker(a, n * m), kronecker(a, n) * kronecker(a, m));
                }
            }
        }
    }

    #[test]
    fn squarefree_parts() {
        assert_eq!(squarefree_part(1).unwrap(), 1);
        assert_eq!(squarefree_part(28).unwrap(), 7);
        assert_eq!(squarefree_part(-360).unwrap(), -10);
        assert!(squarefree_part(0).is_err());
    }

    #[test]
    fn bernoulli_values() {
        let b = bernoulli_upto(12);
        assert_eq!(b[0], rat_int(1));
        assert_eq!(b[1], rat(-1, 2));
        assert_eq!(b[2], rat(1, 6));
        assert_eq!(b[4], rat(-1, 30));
        assert_eq!(b[12], rat(-691, 2730));
        for k in (3..12).step_by(2) {
            assert!(b[k].is_zero(), "B_{k} should vanish");
        }
        // Sign alternation of the even-index values.
        for k in 1..=6 {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            assert!((b[2 * k].clone() * rat_int(sign)).is_positive());
        }
    }

    #[test]
    fn zeta_values() {
        assert_eq!(zeta_nonpositive(-1).unwrap(), rat(-1, 12));
        assert_eq!(zeta_nonpositive(-3).unwrap(), rat(1, 120));
        assert_eq!(zeta_nonpositive(-5).unwrap(), rat(-1, 252));
        assert_eq!(zeta_nonpositive(-11).unwrap(), rat(691, 32760));
        assert!(zeta_nonpositive(0).is_err());
        assert!(zeta_nonpositive(-2).is_err());
    }

    #[test]
    fn fundamental_discriminants() {
        assert!(is_fundamental_discriminant(1));
        assert!(is_fundamental_discriminant(-4));
        assert!(is_fundamental_discriminant(28));
        assert!(is_fundamental_discriminant(-420));
        assert!(!is_fundamental_discriminant(-12));
        assert!(!is_fundamental_discriminant(3));
        assert_eq!(fundamental_discriminant(-105).unwrap(), -420);
        assert_eq!(fundamental_discriminant(-7).unwrap(), -7);
        assert_eq!(fundamental_discriminant(7).unwrap(), 28);
        assert_eq!(fundamental_discriminant(18).unwrap(), 8);
    }

    #[test]
    fn generalized_bernoulli_values() {
        let chi4 = QuadCharacter::new(-4).unwrap();
        assert_eq!(generalized_bernoulli(1, &chi4), rat(-1, 2));
        let chi7 = QuadCharacter::new(-7).unwrap();
        assert_eq!(generalized_bernoulli(1, &chi7), rat_int(-1));
        // Cross-checked against ζ_F(-1) = 2/3 for F = ℚ(√7) (Siegel's
        // formula: (1/60)·Σ σ₁((28-b²)/4) = 40/60), so L(-1) = -8 and
        // B_{2,χ} = +16.
        let chi28 = QuadCharacter::new(28).unwrap();
        assert_eq!(generalized_bernoulli(2, &chi28), rat_int(16));
    }

    #[test]
    fn dirichlet_l_values() {
        let chi7 = QuadCharacter::new(-7).unwrap();
        assert_eq!(dirichlet_l_nonpositive(0, &chi7).unwrap(), rat_int(1));
        let chi28 = QuadCharacter::new(28).unwrap();
        assert_eq!(dirichlet_l_nonpositive(-1, &chi28).unwrap(), rat_int(-8));
        let chi420 = QuadCharacter::new(-420).unwrap();
        assert_eq!(dirichlet_l_nonpositive(0, &chi420).unwrap(), rat_int(8));
        let principal = QuadCharacter::new(1).unwrap();
        assert!(dirichlet_l_nonpositive(0, &principal).is_err());
    }

    #[test]
    fn class_numbers() {
        assert_eq!(class_number_imag(1).unwrap(), 1);
        assert_eq!(class_number_imag(23).unwrap(), 3);
        assert_eq!(class_number_imag(105).unwrap(), 8);
        assert_eq!(class_number_of_discriminant(-3).unwrap(), 1);
        assert_eq!(class_number_of_discriminant(-4).unwrap(), 1);
        assert_eq!(class_number_of_discriminant(-23).unwrap(), 3);
        let known = [
            (2u64, 1u64),
            (3, 1),
            (5, 2),
            (6, 2),
            (7, 1),
            (10, 2),
            (11, 1),
            (13, 2),
            (14, 4),
            (15, 2),
            (163, 1),
        ];
        for (b, h) in known {
            assert_eq!(class_number_imag(b).unwrap(), h, "h(-{b})");
        }
        assert!(class_number_imag(12).is_err());
    }

    #[test]
    fn class_number_matches_l_value() {
        // h(−b) = w·L(0,χ)/2 with w the number of roots of unity.
        for b in 1..=200u64 {
            if !is_squarefree(b) {
                continue;
            }
            let d = fundamental_discriminant(-(b as i64)).unwrap();
            let chi = QuadCharacter::new(d).unwrap();
            let l0 = dirichlet_l_nonpositive(0, &chi).unwrap();
            let w = roots_of_unity_count(d);
            let h = rat_int(w as i64) * l0 / rat_int(2);
            assert_eq!(h, rat_int(class_number_imag(b).unwrap() as i64), "b = {b}");
        }
    }

    #[test]
    fn character_sum_identity() {
        // Σ_{x mod p} (x²+a | p) is −1 for p ∤ a and p−1 for p | a.
        for p in primes_upto(50).into_iter().filter(|&p| p > 2) {
            for a in 0..p {
                let sum: i64 = (1..=p).map(|x| kronecker(((x * x) + a) as i64, p as i64)).sum();
                let expect = if a == 0 { p as i64 - 1 } else { -1 };
                assert_eq!(sum, expect, "p={p} a={a}");
            }
        }
    }

    #[test]
    fn w_k_values() {
        assert_eq!(w_k_quadratic(2, 28).unwrap(), 24);
        assert_eq!(w_k_quadratic(2, 5).unwrap(), 120);
        assert_eq!(w_k_quadratic(2, 1).unwrap(), 24);
        assert_eq!(w_k_quadratic(2, 8).unwrap(), 48);
        assert_eq!(w_k_quadratic(4, 1).unwrap(), 240);
        assert_eq!(w_k_quadratic(6, 1).unwrap(), 504);
        assert_eq!(w_k_quadratic(2, 12).unwrap(), 24);
        assert!(w_k_quadratic(2, 20).is_err());
    }

    #[test]
    fn square_classes() {
        assert_eq!(square_class_at(57, 2), SquareClass { parity: 0, unit_tag: 1 });
        assert_eq!(square_class_at(43, 2), SquareClass { parity: 0, unit_tag: 3 });
        assert_eq!(square_class_at(15, 5), SquareClass { parity: 1, unit_tag: -1 });
        assert!(square_linked(57, 113, 28).unwrap());
        assert!(!square_linked(57, 43, 28).unwrap());
        assert!(square_linked(7, 7, 40).unwrap());
        assert!(square_linked(0x39, 57, 28).is_ok());
        assert!(square_linked(3, 5, 1).is_err());
    }

    #[test]
    fn square_linked_is_equivalence() {
        let sample: Vec<u64> = (1..200).filter(|&n| is_squarefree(n)).collect();
        let m = 28;
        for &a in &sample {
            assert!(square_linked(a, a, m).unwrap());
            for &b in &sample {
                assert_eq!(square_linked(a, b, m).unwrap(), square_linked(b, a, m).unwrap());
                if square_linked(a, b, m).unwrap() {
                    for &c in &sample {
                        if square_linked(b, c, m).unwrap() {
                            assert!(square_linked(a, c, m).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn two_adic_valuations() {
        assert_eq!(v2_rational(&rat(4, 3)), HalfIntValuation::from_int(2));
        assert_eq!(v2_rational(&rat(3, 8)), HalfIntValuation::from_int(-3));
        assert_eq!(v2_sqrt_rational(&rat_int(4)), HalfIntValuation::from_int(1));
        assert_eq!(v2_sqrt_rational(&rat_int(2)), HalfIntValuation::from_twice(1));
        assert_eq!(v2_rational(&rat_int(0)), HalfIntValuation::Infinity);
        // ξ·a/√ℒ with ξ = 2/3, a = 4, ℒ = 4.
        let q = rat(2, 3) * rat_int(4) / rat_int(2);
        assert_eq!(v2_rational(&q), HalfIntValuation::from_int(2));
        assert!(HalfIntValuation::Infinity > HalfIntValuation::from_int(100));
        assert_eq!(HalfIntValuation::from_twice(3).ceil_int(), Some(2));
        assert_eq!(HalfIntValuation::from_int(2).ceil_int(), Some(2));
        assert_eq!(format!("{}", HalfIntValuation::from_twice(3)), "3/2");
        assert_eq!(format!("{}", HalfIntValuation::Infinity), "inf");
    }

    #[test]
    fn odd_prime_divisor_counts() {
        assert_eq!(odd_prime_divisor_count(1), 0);
        assert_eq!(odd_prime_divisor_count(8), 0);
        assert_eq!(odd_prime_divisor_count(105), 3);
        assert_eq!(odd_prime_divisor_count(2 * 3 * 5 * 7), 3);
    }
}
