//! The weight-3/2 cusp form θ_f − θ_g of a two-class genus: exact
//! coefficients, the half-integral-weight Hecke operators T_{p²},
//! eigenvalue extraction, the Shimura-lift Euler product (a weight-2 series
//! of half the level), matching the lift against an elliptic curve up to
//! quadratic twist, and Waldspurger-style coefficient/L-value ratio checks.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use crate::curves::{self, CurveModel};
use crate::error::{Error, Result};
use crate::numtheory;
use crate::siegel::GenusDescriptor;

/// Coefficients a_n of θ_f − θ_g for a two-class genus {f, g} with f the
/// diagonal representative: a weight-3/2 cusp form of level N_f with
/// character χ = (4D/·). a_0 = 0 by construction.
#[derive(Debug, Clone)]
pub struct CuspDifference {
    coeffs: Vec<i64>,
    level: u64,
    d_product: u64,
    d_squarefree: u64,
}

/// Doubled weight of the cusp difference (weight 3/2).
pub const TWICE_WEIGHT_THETA: u32 = 3;

/// Exact coefficients a_n = r_f(n) − r_g(n) for n ≤ precision, from the
/// genus theta series (computed here if not yet cached on the descriptor).
pub fn theta_difference(genus: &GenusDescriptor, precision: usize) -> Result<CuspDifference> {
    if genus.classes().len() != 2 {
        return Err(Error::Unsupported(format!(
            "theta difference needs a two-class genus, this one has {}",
            genus.classes().len()
        )));
    }
    genus.ensure_thetas(precision)?;
    let f_idx = genus.diagonal_index();
    let g_idx = 1 - f_idx;
    let mut coeffs = Vec::with_capacity(precision + 1);
    for n in 0..=precision as u64 {
        let rf = genus.representation(f_idx, n)?;
        let rg = genus.representation(g_idx, n)?;
        let diff = num_bigint::BigInt::from(rf) - num_bigint::BigInt::from(rg);
        coeffs.push(
            diff.to_i64()
                .ok_or_else(|| Error::Unsupported("coefficient exceeds i64".into()))?,
        );
    }
    debug_assert_eq!(coeffs[0], 0);
    Ok(CuspDifference {
        coeffs,
        level: genus.level(),
        d_product: genus.d_product(),
        d_squarefree: genus.d_squarefree(),
    })
}

impl CuspDifference {
    pub fn precision(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Result<i64> {
        self.coeffs.get(n).copied().ok_or(Error::Precision {
            need: n as f64,
            have: self.precision() as f64,
        })
    }

    /// The nebentypus χ = (4D/·).
    pub fn chi(&self, x: i64) -> i64 {
        numtheory::kronecker(4 * self.d_product as i64, x)
    }

    /// T_{p²} for p ∤ N in half-integral weight k (passed doubled; 3 here):
    /// b_n = a_{p²n} + χ(p)·((−1)^{k−1/2}n / p)·p^{k−3/2}·a_n
    ///     + χ(p²)·p^{2k−2}·a_{n/p²}.
    /// Returns b_0..b_M with M = precision/p².
    pub fn hecke_tp2(&self, p: u64) -> Result<Vec<i64>> {
        hecke_tp2_general(
            &self.coeffs,
            p,
            self.level,
            TWICE_WEIGHT_THETA,
            &|x| self.chi(x),
        )
    }

    /// The T_{p²}-eigenvalue, extracted as b_n/a_n at the smallest usable n
    /// (a_n ≠ 0, p ∤ n) and validated against the next three; any mismatch
    /// or non-divisibility means the input is not an eigenform and aborts.
    pub fn eigenvalue(&self, p: u64) -> Result<i64> {
        let b = self.hecke_tp2(p)?;
        let mut lambda: Option<i64> = None;
        let mut confirmations = 0;
        for n in 1..b.len() {
            if self.coeffs[n] == 0 || n as u64 % p == 0 {
                continue;
            }
            if b[n] % self.coeffs[n] != 0 {
                return Err(Error::IntegralityFailure(format!(
                    "T_{{{p}²}} does not act integrally at n={n}: {} / {}",
                    b[n], self.coeffs[n]
                )));
            }
            let l = b[n] / self.coeffs[n];
            match lambda {
                None => lambda = Some(l),
                Some(l0) if l0 != l => {
                    return Err(Error::IntegralityFailure(format!(
                        "not an eigenform: T_{{{p}²}} gives {l0} and {l} (n={n})"
                    )));
                }
                _ => confirmations += 1,
            }
            if confirmations >= 3 {
                break;
            }
        }
        lambda.ok_or(Error::Precision {
            need: (p * p) as f64,
            have: self.precision() as f64,
        })
    }

    /// The Shimura lift as a weight-2 Euler product over primes p ≤
    /// prime_bound, p ∤ N: eigenvalues λ_p and multiplicative coefficients
    /// b_n for n ≤ m, with b_{p^{r+1}} = λ_p·b_{p^r} − χ(p²)·p·b_{p^{r−1}}.
    /// Coefficients needing a prime outside the eigenvalue set are `None`.
    pub fn shimura_lift(&self, prime_bound: u64, m: usize) -> Result<LiftSeries> {
        let mut eigenvalues = BTreeMap::new();
        for p in numtheory::primes_upto(prime_bound) {
            if self.level % p == 0 {
                continue;
            }
            eigenvalues.insert(p, self.eigenvalue(p)?);
        }

        let mut coeffs: Vec<Option<i64>> = vec![None; m + 1];
        if m >= 1 {
            coeffs[1] = Some(1);
        }
        for (&p, &lp) in &eigenvalues {
            let chi_p2 = self.chi((p * p) as i64);
            let pu = p as usize;
            if pu > m {
                continue;
            }
            // Fill prime powers by the degree-2 recursion...
            let mut powers = vec![1i64, lp];
            let mut q = pu;
            while q * pu <= m {
                q *= pu;
                let r = powers.len();
                powers.push(
                    lp * powers[r - 1] - chi_p2 * p as i64 * powers[r - 2],
                );
            }
            // ...then spread multiplicatively onto indices already known.
            let mut step = pu;
            for pw in powers.iter().skip(1) {
                for i in 1..=(m / step) {
                    if i % pu != 0 {
                        if let Some(bi) = coeffs[i] {
                            coeffs[i * step] = Some(bi * pw);
                        }
                    }
                }
                step *= pu;
            }
        }

        Ok(LiftSeries {
            eigenvalues,
            coeffs,
            level: self.level / 2,
            d_squarefree: self.d_squarefree,
        })
    }
}

/// General half-integral-weight T_{p²} on a coefficient vector; `twice_k`
/// is the doubled weight (odd), `chi` evaluates the nebentypus.
fn hecke_tp2_general(
    a: &[i64],
    p: u64,
    level: u64,
    twice_k: u32,
    chi: &dyn Fn(i64) -> i64,
) -> Result<Vec<i64>> {
    if !numtheory::is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    if level % p == 0 {
        return Err(Error::Unsupported(format!(
            "T_{{p²}} at p = {p} dividing the level {level} is not implemented"
        )));
    }
    if twice_k % 2 == 0 || twice_k < 3 {
        return Err(Error::InvalidInput(format!(
            "half-integral weight needs odd doubled weight ≥ 3, got {twice_k}"
        )));
    }
    let p2 = (p * p) as usize;
    let out_len = (a.len() - 1) / p2 + 1;
    // (−1)^{k−1/2} with k − 1/2 = (twice_k − 1)/2.
    let sign = if ((twice_k - 1) / 2) % 2 == 0 { 1i64 } else { -1 };
    let mid_scale = (p as i64).pow((twice_k - 3) / 2);
    let last_scale = (p as i64).pow(twice_k - 2);
    let chi_p = chi(p as i64);
    let chi_p2 = chi((p * p) as i64);
    let mut b = vec![0i64; out_len];
    for n in 1..out_len {
        let mut v = a[p2 * n];
        if chi_p != 0 {
            v += chi_p
                * numtheory::kronecker(sign * n as i64, p as i64)
                * mid_scale
                * a[n];
        }
        if chi_p2 != 0 && n % p2 == 0 {
            v += chi_p2 * last_scale * a[n / p2];
        }
        b[n] = v;
    }
    Ok(b)
}

/// The Shimura lift of a cusp difference: a weight-2 eigenvalue system at
/// half the level, with multiplicatively generated coefficients.
#[derive(Debug, Clone)]
pub struct LiftSeries {
    eigenvalues: BTreeMap<u64, i64>,
    coeffs: Vec<Option<i64>>,
    level: u64,
    d_squarefree: u64,
}

impl LiftSeries {
    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn eigenvalue(&self, p: u64) -> Option<i64> {
        self.eigenvalues.get(&p).copied()
    }

    pub fn eigenvalues(&self) -> &BTreeMap<u64, i64> {
        &self.eigenvalues
    }

    /// b_n, when determined by the extracted eigenvalues.
    pub fn coeff(&self, n: usize) -> Option<i64> {
        self.coeffs.get(n).copied().flatten()
    }

    pub fn max_index(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// Outcome of matching a lift against a curve up to quadratic twist.
#[derive(Debug, Clone)]
pub struct ShimuraMatch {
    /// Twists tried (squarefree m) with whether every tested prime agreed.
    pub candidates: Vec<(i64, bool)>,
    /// The unique matching twist, when exactly one candidate survived.
    pub matched: Option<i64>,
    /// Primes actually compared.
    pub tested: Vec<u64>,
    pub ok: bool,
}

/// Compares lift eigenvalues λ_p against a_p of the curve and of its
/// quadratic twists by −1, ±D° for all usable p ≤ prime_bound (odd, good
/// reduction everywhere, eigenvalue present). The match must be unique.
pub fn verify_sh_e(
    lift: &LiftSeries,
    curve: &CurveModel,
    prime_bound: u64,
) -> Result<ShimuraMatch> {
    let d0 = lift.d_squarefree as i64;
    let mut twists = vec![1i64, -1];
    if d0 != 1 {
        twists.push(d0);
        twists.push(-d0);
    }
    let models = twists
        .iter()
        .map(|&m| curve.twist(m))
        .collect::<Result<Vec<_>>>()?;

    let mut tested = Vec::new();
    let mut agree = vec![true; twists.len()];
    for p in numtheory::primes_upto(prime_bound) {
        if p == 2 || lift.eigenvalue(p).is_none() {
            continue;
        }
        let traces: Option<Vec<i64>> = models.iter().map(|e| e.ap(p).ok()).collect();
        let Some(traces) = traces else {
            continue; // bad reduction somewhere: skip this prime
        };
        let lp = lift.eigenvalue(p).unwrap();
        for (i, &t) in traces.iter().enumerate() {
            if t != lp {
                agree[i] = false;
            }
        }
        tested.push(p);
    }
    if tested.is_empty() {
        return Err(Error::Precision {
            need: prime_bound as f64,
            have: 0.0,
        });
    }

    let candidates: Vec<(i64, bool)> = twists.iter().copied().zip(agree).collect();
    let survivors: Vec<i64> =
        candidates.iter().filter(|(_, ok)| *ok).map(|(m, _)| *m).collect();
    let matched = if survivors.len() == 1 { Some(survivors[0]) } else { None };
    Ok(ShimuraMatch {
        candidates,
        matched,
        tested,
        ok: matched.is_some(),
    })
}

/// One Waldspurger consistency check: |a_n| against |a_{n₀}|·√(ℒ(n)/ℒ(n₀))
/// for square-linked n, n₀.
#[derive(Debug, Clone)]
pub struct WaldspurgerReport {
    pub n: u64,
    pub n0: u64,
    pub a_n: i64,
    pub a_n0: i64,
    pub l_n: f64,
    pub l_n0: f64,
    /// |a_{n₀}|·√(ℒ(n)/ℒ(n₀)).
    pub expected: f64,
    /// Relative error of |a_n| against `expected` (absolute when expected
    /// is 0).
    pub error: f64,
    pub ok: bool,
}

/// Checks |a_n| ≈ |a_{n₀}|·√(ℒ(n)/ℒ(n₀)) where ℒ(m) = L(ℰ^{(−mD°)},1)/Ω is
/// taken from the genus L-value table when present, else computed
/// numerically from `curve`. Requires n, n₀ squarefree coprime to 2D,
/// square-linked at every prime of the level, and ℒ(n₀) ≠ 0 (the
/// nonvanishing hypothesis of the reference twist).
pub fn waldspurger_ratio_check(
    genus: &GenusDescriptor,
    n: u64,
    n0: u64,
    curve: &CurveModel,
    tolerance: f64,
) -> Result<WaldspurgerReport> {
    let theta = theta_difference(genus, n.max(n0) as usize)?;
    for v in [n, n0] {
        if v == 0 || !numtheory::is_squarefree(v) || gcd(v, 2 * genus.d_product()) != 1 {
            return Err(Error::InvalidInput(format!(
                "{v} must be positive squarefree and coprime to 2D"
            )));
        }
    }
    if !numtheory::square_linked(n, n0, genus.level() as i64)? {
        return Err(Error::InvalidInput(format!(
            "{n} and {n0} are not in the same square class at every prime of the level"
        )));
    }
    let l_n0 = algebraic_lvalue(genus, curve, n0)?;
    if l_n0 == 0.0 {
        return Err(Error::InvalidInput(format!(
            "reference L-value vanishes at n₀ = {n0}; the ratio needs a nonvanishing twist"
        )));
    }
    let l_n = algebraic_lvalue(genus, curve, n)?;
    let a_n = theta.coeff(n as usize)?;
    let a_n0 = theta.coeff(n0 as usize)?;
    let expected = (a_n0.abs() as f64) * (l_n / l_n0).max(0.0).sqrt();
    let error = if expected == 0.0 {
        a_n.abs() as f64
    } else {
        ((a_n.abs() as f64) - expected).abs() / expected
    };
    Ok(WaldspurgerReport {
        n,
        n0,
        a_n,
        a_n0,
        l_n,
        l_n0,
        expected,
        error,
        ok: error <= tolerance,
    })
}

/// ℒ(m) = L(ℰ^{(−mD°)}, 1)/Ω: exact table value when the genus has one,
/// else the numeric approximation (0.0 when the twist provably vanishes).
fn algebraic_lvalue(genus: &GenusDescriptor, curve: &CurveModel, m: u64) -> Result<f64> {
    if let Some(exact) = genus.lvalues().get(&m) {
        return exact
            .to_f64()
            .ok_or_else(|| Error::Unsupported("table L-value does not fit f64".into()));
    }
    let twist = -i64::try_from(m * genus.d_squarefree())
        .map_err(|_| Error::InvalidInput("twist overflows".into()))?;
    let conductor = curves::twisted_conductor(curve, twist)?;
    let terms = 4 * (conductor as f64).sqrt().ceil() as usize + 64;
    let lv = curves::numeric_l(curve, twist, terms)?;
    Ok(if lv.vanishing { 0.0 } else { lv.ratio })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}
