//! Two-adic lower bounds on diagonal representation numbers.
//!
//! For a two-class ternary genus {f, g} with f diagonal, the exact identity
//! r_f(n) = ξ·a_n + λ_f(n)·h(−nD°) (a_n the cusp-difference coefficient)
//! combines with the Waldspurger square-class structure of the a_n to give
//! computable lower bounds on v₂(r_f(n)). This module extracts the genus
//! constants (ξ, A, B, κ) from the bundled L-value table and evaluates the
//! resulting bound — min{A_{n₀} + t_E(n*)/2, B_{n₁} + v₂(h(−nD°))}, or the
//! uniform A + t_E(n*)/2 once n has at least κ odd prime factors — against
//! the actual valuation from the theta series.

use num_integer::Integer;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::modforms;
use crate::numtheory::{self, HalfIntValuation};
use crate::siegel::{self, GenusDescriptor};
use crate::ExactRational;

/// Constants attached to one square class of the L-value table: the
/// reference index n₀ with its table value and cusp coefficient, and the
/// two per-class valuations entering the bound.
#[derive(Debug, Clone)]
pub struct SquareClassRow {
    pub n0: u64,
    pub lvalue: ExactRational,
    /// Cusp-difference coefficient a_{n₀} = r_f(n₀) − r_g(n₀).
    pub a_n0: i64,
    /// A_{n₀} = v₂(ξ·a_{n₀}/√ℒ(n₀)) − (1 + v₂(ν))/2, undefined (None) on
    /// rows where the L-value vanishes.
    pub sqrt_valuation: Option<HalfIntValuation>,
    /// B_{n₀} = v₂(λ_f(n₀)), shifted down by 1 when both D° and n₀ are
    /// ≡ 3 mod 4 (the convention of the reference constant tables; in that
    /// case the field ℚ(√−n₀D°) has even discriminant, so genus theory
    /// grants the class-number factor one extra power of two, which the
    /// published constants move out of B). Infinite when λ_f(n₀) = 0.
    pub multiplier_valuation: HalfIntValuation,
}

/// The genus-level bound constants: the cusp weight ξ and the minima A, B
/// over the square-class rows, plus the threshold κ above which the uniform
/// square-root-branch bound applies.
#[derive(Debug, Clone)]
pub struct BoundConstants {
    /// Weight of the cusp coefficient in r_f(n) = ξ·a_n + λ_f(n)h(−nD°).
    pub xi: ExactRational,
    /// A = min over nonvanishing table rows of A_{n₀}.
    pub a: HalfIntValuation,
    /// B = min over table rows (and the auxiliary classes of 1 and 3) of
    /// B_{n₀}.
    pub b: HalfIntValuation,
    /// κ = max{2(A − B + 1 − μ(D°)), 1}: once μ(n) ≥ κ, genus theory makes
    /// the class-number branch dominate and v₂(r_f(n)) ≥ A + t_E(n*)/2
    /// holds on its own.
    pub kappa: u32,
    /// v₂ of the curve's Manin constant (enters every A_{n₀}).
    pub v2_manin: u32,
    pub rows: Vec<SquareClassRow>,
}

/// One evaluated bound at a squarefree n coprime to 2D.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub n: u64,
    /// μ(n): number of distinct odd prime divisors.
    pub mu: u32,
    /// t_E(n*): number of odd primes q | n where the defining cubic has an
    /// odd number of roots mod q — the parity sum of the Tamagawa numbers
    /// of the twisted curve at the primes of n.
    pub t_e: u32,
    /// The certified lower bound on v₂(r_f(n)).
    pub bound: HalfIntValuation,
    /// v₂(r_f(n)) itself (infinite when n is not represented).
    pub actual: HalfIntValuation,
    /// actual ≥ bound.
    pub satisfied: bool,
    /// A_{n₀} + t_E(n*)/2 for the table row square-linked to n, when that
    /// row's L-value does not vanish.
    pub sqrt_branch: Option<HalfIntValuation>,
    /// B_{n₁} + v₂(h(−nD°)) for n's own multiplier class.
    pub class_branch: HalfIntValuation,
    /// True when μ(n) ≥ κ and the uniform bound A + t_E(n*)/2 was used.
    pub uniform: bool,
    /// The twist direction defining E: −D° when n ≡ 1 mod 4, +D° otherwise.
    /// (Root counts agree between the base cubic and its twists away from
    /// the twisting primes, so t_E is computed on the base model.)
    pub twist_dir: i64,
}

impl BoundReport {
    /// Header matching [`BoundReport::csv_row`].
    pub const CSV_HEADER: &'static str = "n,mu,tE,bound_num,bound_den,actual,ok";

    /// One CSV line: the bound as a reduced fraction (denominator 1 or 2),
    /// the actual valuation as an integer, infinities spelled "inf".
    pub fn csv_row(&self) -> String {
        let (num, den) = match self.bound {
            HalfIntValuation::Finite { twice } if twice % 2 == 0 => {
                ((twice / 2).to_string(), 1)
            }
            HalfIntValuation::Finite { twice } => (twice.to_string(), 2),
            HalfIntValuation::Infinity => ("inf".to_string(), 1),
        };
        format!(
            "{},{},{},{},{},{},{}",
            self.n, self.mu, self.t_e, num, den, self.actual, self.satisfied
        )
    }
}

/// v₂(λ_f(n))'s class valuation with the reference-table convention: one
/// power of two moves from B to the class-number factor when D° ≡ 3 mod 4
/// and n ≡ 3 mod 4 (even field discriminant −4nD°).
fn multiplier_valuation(genus: &GenusDescriptor, n: u64) -> Result<HalfIntValuation> {
    let lambda = siegel::lambda_f(genus.diagonal_form(), n)?;
    Ok(match numtheory::v2_rational(&lambda) {
        HalfIntValuation::Finite { twice } => {
            let shift = if genus.d_squarefree() % 4 == 3 && n % 4 == 3 { 2 } else { 0 };
            HalfIntValuation::from_twice(twice - shift)
        }
        HalfIntValuation::Infinity => HalfIntValuation::Infinity,
    })
}

/// Extracts (ξ, A, B, κ) and the per-class rows from a two-class ternary
/// genus with a curve and an L-value table covering the square classes.
pub fn bound_constants(genus: &GenusDescriptor) -> Result<BoundConstants> {
    let curve = genus
        .curve()
        .ok_or_else(|| Error::Descriptor("bound constants need a curve".into()))?;
    if genus.lvalues().is_empty() {
        return Err(Error::Descriptor("bound constants need an L-value table".into()));
    }
    let xi = genus.xi_cusp()?;
    let HalfIntValuation::Finite { twice: xi_twice } = numtheory::v2_rational(&xi) else {
        return Err(Error::Descriptor("cusp weight vanishes".into()));
    };
    let v2_manin = numtheory::vp_i64(curve.manin() as i64, 2);

    let max_n0 = *genus.lvalues().keys().next_back().expect("nonempty");
    let cusp = modforms::theta_difference(genus, max_n0 as usize)?;

    let mut rows = Vec::new();
    for (&n0, lvalue) in genus.lvalues() {
        let a_n0 = cusp.coeff(n0 as usize)?;
        if lvalue.is_zero() != (a_n0 == 0) {
            return Err(Error::IntegralityFailure(format!(
                "table row {n0}: L-value {lvalue} and coefficient {a_n0} disagree about vanishing"
            )));
        }
        let sqrt_valuation = if lvalue.is_zero() {
            None
        } else {
            let HalfIntValuation::Finite { twice: l_v2 } = numtheory::v2_sqrt_rational(lvalue)
            else {
                unreachable!("nonzero L-value");
            };
            // twice(A_{n0}) = 2v₂(ξ) + 2v₂(a) − v₂(ℒ) − 1 − v₂(ν).
            Some(HalfIntValuation::from_twice(
                xi_twice + 2 * numtheory::vp_i64(a_n0, 2) as i64 - l_v2 - 1 - v2_manin as i64,
            ))
        };
        rows.push(SquareClassRow {
            n0,
            lvalue: lvalue.clone(),
            a_n0,
            sqrt_valuation,
            multiplier_valuation: multiplier_valuation(genus, n0)?,
        });
    }

    let a = rows
        .iter()
        .filter_map(|r| r.sqrt_valuation)
        .min()
        .ok_or_else(|| {
            Error::InvalidInput("every table L-value vanishes; no reference row".into())
        })?;
    // B additionally ranges over the multiplier classes of 1 and 3, which
    // the square-class table of n > 3 representatives can miss.
    let mut b = HalfIntValuation::Infinity;
    for v in rows
        .iter()
        .map(|r| r.multiplier_valuation)
        .chain([1u64, 3].into_iter().map(|s| multiplier_valuation(genus, s)).collect::<Result<Vec<_>>>()?)
    {
        b = b.min(v);
    }

    let kappa = match (a, b) {
        (HalfIntValuation::Finite { twice: a2 }, HalfIntValuation::Finite { twice: b2 }) => {
            let mu_d = numtheory::odd_prime_divisor_count(genus.d_squarefree()) as i64;
            (a2 - b2 + 2 - 2 * mu_d).max(1) as u32
        }
        _ => 1,
    };

    Ok(BoundConstants { xi, a, b, kappa, v2_manin, rows })
}

/// Evaluates the valuation bound at one squarefree n > 3 coprime to 2D and
/// compares it with the actual v₂(r_f(n)).
pub fn valuation_bound(
    genus: &GenusDescriptor,
    constants: &BoundConstants,
    n: u64,
) -> Result<BoundReport> {
    if n <= 3 {
        return Err(Error::InvalidInput(format!("n = {n} must exceed 3")));
    }
    let curve = genus
        .curve()
        .ok_or_else(|| Error::Descriptor("valuation bound needs a curve".into()))?;
    let mu = numtheory::odd_prime_divisor_count(n);
    let t_e = curve.t_e(n)?;
    let twist_dir = if n % 4 == 1 {
        -(genus.d_squarefree() as i64)
    } else {
        genus.d_squarefree() as i64
    };

    // Class-number branch: B of n's own multiplier class plus v₂(h(−nD°)).
    let nd = n
        .checked_mul(genus.d_squarefree())
        .ok_or_else(|| Error::InvalidInput("nD° overflows".into()))?;
    let class_number = numtheory::class_number_imag(nd)?;
    let class_branch = multiplier_valuation(genus, n)?
        .add(HalfIntValuation::from_int(numtheory::vp_i64(class_number as i64, 2) as i64));

    // Square-root branch: A_{n₀} of the table row square-linked to n, plus
    // t_E(n*)/2. Available only when that row's L-value does not vanish.
    let level = i64::try_from(genus.level())
        .map_err(|_| Error::InvalidInput("level overflows".into()))?;
    let mut sqrt_branch = None;
    for row in &constants.rows {
        if numtheory::square_linked(n, row.n0, level)? {
            sqrt_branch = row
                .sqrt_valuation
                .map(|a| a.add(HalfIntValuation::from_twice(t_e as i64)));
            break;
        }
    }

    let uniform = mu >= constants.kappa;
    let bound = if uniform {
        constants.a.add(HalfIntValuation::from_twice(t_e as i64))
    } else {
        match sqrt_branch {
            Some(sb) => sb.min(class_branch),
            None => class_branch,
        }
    };

    genus.ensure_thetas(n as usize)?;
    let r = genus.representation(genus.diagonal_index(), n)?;
    let actual = if r.is_zero() {
        HalfIntValuation::Infinity
    } else {
        HalfIntValuation::from_int(r.trailing_zeros().expect("nonzero") as i64)
    };

    Ok(BoundReport {
        n,
        mu,
        t_e,
        bound,
        actual,
        satisfied: actual >= bound,
        sqrt_branch,
        class_branch,
        uniform,
        twist_dir,
    })
}

/// Bound reports for every squarefree n ≤ max_n coprime to 2D with at
/// least `mu_min` odd prime divisors, in increasing order of n.
pub fn bound_sweep(
    genus: &GenusDescriptor,
    constants: &BoundConstants,
    max_n: u64,
    mu_min: u32,
) -> Result<Vec<BoundReport>> {
    genus.ensure_thetas(max_n as usize)?;
    let two_d = 2 * genus.d_product();
    let mut reports = Vec::new();
    for n in 5..=max_n {
        if !numtheory::is_squarefree(n) || n.gcd(&two_d) != 1 {
            continue;
        }
        if numtheory::odd_prime_divisor_count(n) < mu_min {
            continue;
        }
        reports.push(valuation_bound(genus, constants, n)?);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::rat;

    /// The level-28 genus with its full eight-row L-value table.
    fn p7_genus() -> GenusDescriptor {
        GenusDescriptor::from_json(
            r#"{
                "name": "p7",
                "dim": 3,
                "forms": [
                    {"gram": [[2,0,0],[0,2,0],[0,0,14]], "mu": 16},
                    {"gram": [[2,0,0],[0,4,2],[0,2,8]], "mu": 8}
                ],
                "diagonal": [1, 1, 7],
                "curve": {"P": [1, 1, -8, 16], "label": "14a"},
                "lvalues": {
                    "57": [4,1], "43": [4,1], "29": [0,1], "15": [4,1],
                    "89": [4,1], "19": [4,1], "5": [0,1], "103": [16,1]
                }
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn constants_match_the_reference_banner() {
        let genus = p7_genus();
        let c = bound_constants(&genus).unwrap();
        assert_eq!(c.xi, rat(2, 3));
        assert_eq!(c.a, HalfIntValuation::from_twice(3)); // A = 3/2
        assert_eq!(c.b, HalfIntValuation::from_int(0)); // B = 0
        assert_eq!(c.kappa, 3);
        assert_eq!(c.v2_manin, 0);

        // Per-row columns (n₀, ℒ, a, A_{n₀}, B_{n₀}); A is "/" on the two
        // vanishing rows, B depends only on the square class of n₀.
        let expect: &[(u64, i64, Option<i64>, Option<i64>)] = &[
            (5, 0, None, Some(2)),
            (15, 4, Some(3), Some(0)),
            (19, -4, Some(3), Some(0)),
            (29, 0, None, Some(2)),
            (43, 4, Some(3), Some(0)),
            (57, -4, Some(3), Some(3)),
            (89, -4, Some(3), Some(3)),
            (103, 8, Some(3), Some(0)),
        ];
        assert_eq!(c.rows.len(), expect.len());
        for (row, &(n0, a_n0, a_twice, b)) in c.rows.iter().zip(expect) {
            assert_eq!(row.n0, n0);
            assert_eq!(row.a_n0, a_n0, "a at {n0}");
            assert_eq!(
                row.sqrt_valuation,
                a_twice.map(HalfIntValuation::from_twice),
                "A at {n0}"
            );
            assert_eq!(
                row.multiplier_valuation,
                b.map_or(HalfIntValuation::Infinity, HalfIntValuation::from_int),
                "B at {n0}"
            );
        }
    }

    #[test]
    fn uniform_bound_rows() {
        let genus = p7_genus();
        let c = bound_constants(&genus).unwrap();

        // μ(165) = 3 = κ: uniform bound 3/2 + 3/2 = 3; r_f(165) = 32.
        let rep = valuation_bound(&genus, &c, 165).unwrap();
        assert!(rep.uniform);
        assert_eq!((rep.mu, rep.t_e), (3, 3));
        assert_eq!(rep.bound, HalfIntValuation::from_int(3));
        assert_eq!(rep.actual, HalfIntValuation::from_int(5));
        assert!(rep.satisfied);
        assert_eq!(rep.twist_dir, -7);

        // μ(3705) = 4: bound 3/2 + 2 = 7/2; r_f(3705) = 304 = 2⁴·19, so the
        // integer ceiling of the bound is attained exactly.
        let rep = valuation_bound(&genus, &c, 3705).unwrap();
        assert!(rep.uniform);
        assert_eq!(rep.bound, HalfIntValuation::from_twice(7));
        assert_eq!(
            genus.representation(genus.diagonal_index(), 3705).unwrap(),
            304u32.into()
        );
        assert_eq!(rep.actual, HalfIntValuation::from_int(4));
        assert_eq!(rep.bound.ceil_int(), Some(4));
        assert!(rep.satisfied);
        assert_eq!(rep.csv_row(), "3705,4,4,7,2,4,true");
    }

    #[test]
    fn two_branch_rows() {
        let genus = p7_genus();
        let c = bound_constants(&genus).unwrap();

        // n = 5 sits in a vanishing square class: only the class-number
        // branch applies, v₂(λ_f(5)) + v₂(h(−35)) = 2 + 1, and r_f(5) = 8
        // attains it.
        let rep = valuation_bound(&genus, &c, 5).unwrap();
        assert!(!rep.uniform);
        assert_eq!(rep.sqrt_branch, None);
        assert_eq!(rep.bound, HalfIntValuation::from_int(3));
        assert_eq!(rep.actual, HalfIntValuation::from_int(3));
        assert!(rep.satisfied);
        assert_eq!(rep.twist_dir, -7);

        // n = 57: both branches live; min{3/2 + 1, 3 + 4} = 5/2 against
        // r_f(57) = 40.
        let rep = valuation_bound(&genus, &c, 57).unwrap();
        assert!(!rep.uniform);
        assert_eq!(rep.sqrt_branch, Some(HalfIntValuation::from_twice(5)));
        assert_eq!(rep.class_branch, HalfIntValuation::from_int(7));
        assert_eq!(rep.bound, HalfIntValuation::from_twice(5));
        assert_eq!(rep.actual, HalfIntValuation::from_int(3));
        assert!(rep.satisfied);

        // n = 19: in its class the form misses n entirely (r_f(19) = 0), so
        // the actual valuation is infinite and any bound is satisfied.
        let rep = valuation_bound(&genus, &c, 19).unwrap();
        assert_eq!(rep.actual, HalfIntValuation::Infinity);
        assert!(rep.satisfied);
        assert_eq!(rep.twist_dir, 7);
    }

    #[test]
    fn sweep_filters_and_orders() {
        let genus = p7_genus();
        let c = bound_constants(&genus).unwrap();
        let reports = bound_sweep(&genus, &c, 700, 3).unwrap();
        // 3·5·11 = 165 is the smallest coprime squarefree n with μ = 3.
        assert_eq!(reports.first().map(|r| r.n), Some(165));
        assert!(reports.iter().all(|r| r.mu >= 3 && r.satisfied));
        assert!(reports.windows(2).all(|w| w[0].n < w[1].n));
        let csv = reports[0].csv_row();
        assert_eq!(csv, "165,3,3,3,1,5,true");
    }

    #[test]
    fn rejects_bad_arguments() {
        let genus = p7_genus();
        let c = bound_constants(&genus).unwrap();
        assert!(valuation_bound(&genus, &c, 3).is_err()); // too small
        assert!(valuation_bound(&genus, &c, 12).is_err()); // even
        assert!(valuation_bound(&genus, &c, 45).is_err()); // not squarefree
        assert!(valuation_bound(&genus, &c, 35).is_err()); // shares 7 with D
    }
}
