//! Canonical renderings of the reproducible numeric tables.
//!
//! The CLI prints these and the golden tests compare them byte-for-byte,
//! so rendering is deterministic: exact integers and rationals only, fixed
//! column order, `\n` line endings, no locale or float formatting anywhere.

use std::fmt::Write as _;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::numtheory;
use crate::qform;
use crate::siegel::GenusDescriptor;
use crate::{fixtures, ExactRational};

/// The reproducible tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableId {
    /// Representation numbers and |K₂| orders for the five-dimensional
    /// standard genus: columns n, mu, rf, k2.
    D5,
    /// Two-class nine-dimensional genus: n, mu, rf, rg, k6, k6 factored.
    D9,
    /// Three-class thirteen-dimensional genus: n, mu, rf, rg, rh, k10,
    /// k10 factored.
    D13,
    /// 2-adic valuations of r_f(n) for x² + y² + 7z² at squarefree n with
    /// at least three odd prime factors: n, mu, bound, rf, v2.
    ValP7,
    /// Registry of the bundled small-level two-class pairs.
    Levels,
    /// Class-number multiplier λ_f(n) of a ternary genus: n, lambda.
    Lambda,
    /// Local-average multiplier ρ_f(n) of a d ≡ 1 mod 4 genus: n, rho.
    Rho,
}

impl TableId {
    /// Default n-range when `--max` is not given. The d13 default is the
    /// CI-friendly budget; larger ranges need `--full`.
    pub fn default_max(self) -> u64 {
        match self {
            TableId::D13 => 39,
            TableId::ValP7 => 1000,
            _ => 97,
        }
    }

    /// Budget on n beyond which rows are marked `skipped` unless `--full`
    /// is passed (the 12-dimensional theta block dominates d13 run time).
    fn budget(self) -> Option<u64> {
        match self {
            TableId::D13 => Some(39),
            _ => None,
        }
    }
}

impl std::str::FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "d5" => TableId::D5,
            "d9" => TableId::D9,
            "d13" => TableId::D13,
            "val-p7" => TableId::ValP7,
            "levels" => TableId::Levels,
            "lambda" => TableId::Lambda,
            "rho" => TableId::Rho,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "unknown table {s:?} (expected d5, d9, d13, val-p7, levels, lambda or rho)"
                )))
            }
        })
    }
}

/// Output shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    /// Space-padded columns with a header row.
    Text,
    /// Comma-separated with a header row.
    Csv,
}

/// One table request.
pub struct TableRequest<'a> {
    pub id: TableId,
    /// Upper bound on n; `None` uses the table's default.
    pub max: Option<u64>,
    /// Compute past the table's budget instead of marking rows skipped.
    pub full: bool,
    pub format: TableFormat,
    /// Genus override: required for lambda/rho, optional for d5/d9/d13
    /// (which default to the bundled standard genera).
    pub genus: Option<&'a GenusDescriptor>,
}

/// Renders one table to its canonical string (trailing newline included).
pub fn render(req: &TableRequest) -> Result<String> {
    let max = req.max.unwrap_or_else(|| req.id.default_max());
    let (header, rows) = match req.id {
        TableId::D5 => kgroup_rows(req, "d5_std", max, 7)?,
        TableId::D9 => kgroup_rows(req, "d9_std", max, 7)?,
        TableId::D13 => kgroup_rows(req, "d13_std", max, 15)?,
        TableId::ValP7 => val_p7_rows(max)?,
        TableId::Levels => level_rows(max)?,
        TableId::Lambda => multiplier_rows(req, max, false)?,
        TableId::Rho => multiplier_rows(req, max, true)?,
    };
    Ok(match req.format {
        TableFormat::Csv => {
            let mut out = String::new();
            writeln!(out, "{}", header.join(",")).unwrap();
            for row in rows {
                writeln!(out, "{}", row.join(",")).unwrap();
            }
            out
        }
        TableFormat::Text => {
            let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
            for row in &rows {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.len());
                }
            }
            let mut out = String::new();
            let mut emit = |cells: &[String]| {
                let line: Vec<String> = cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:>w$}"))
                    .collect();
                writeln!(out, "{}", line.join("  ").trim_end()).unwrap();
            };
            emit(&header);
            for row in &rows {
                emit(row);
            }
            out
        }
    })
}

fn strings(header: &[&str]) -> Vec<String> {
    header.iter().map(|s| s.to_string()).collect()
}

/// `p^a*q*...` with exponent-one primes printed bare; "1" for the empty
/// product.
fn factored(n: &num_bigint::BigUint) -> Result<String> {
    use num_traits::ToPrimitive;
    if n.is_zero() {
        return Err(Error::InvalidInput("cannot factor zero".into()));
    }
    let small = n
        .to_u64()
        .ok_or_else(|| Error::Unsupported(format!("{n} is too large to factor")))?;
    if small == 1 {
        return Ok("1".into());
    }
    let parts: Vec<String> = numtheory::factorize(small)
        .into_iter()
        .map(|(p, e)| if e == 1 { p.to_string() } else { format!("{p}^{e}") })
        .collect();
    Ok(parts.join("*"))
}

/// Exact rational as `num/den`, integers without the `/1`.
pub fn rational_str(q: &ExactRational) -> String {
    use num_traits::One;
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Representation numbers and K-group orders of a standard genus at odd
/// squarefree n in [start, max].
fn kgroup_rows(
    req: &TableRequest,
    fixture: &str,
    max: u64,
    start: u64,
) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let loaded;
    let genus = match req.genus {
        Some(g) => g,
        None => {
            loaded = fixtures::load(fixture)?;
            &loaded
        }
    };
    let budget = req.id.budget().filter(|_| !req.full);
    let computed_max = budget.map_or(max, |b| max.min(b));
    if computed_max >= start {
        genus.ensure_thetas(computed_max as usize)?;
    }

    let class_headers: &[&str] = match genus.classes().len() {
        1 => &["rf"],
        2 => &["rf", "rg"],
        3 => &["rf", "rg", "rh"],
        n => return Err(Error::Unsupported(format!("{n}-class table"))),
    };
    let k_index = genus.dim() - 3;
    // The five-dimensional orders are small enough to read unfactored; the
    // higher tables carry the factorization column.
    let with_factored = req.id != TableId::D5;
    let mut header = vec!["n".to_string(), "mu".to_string()];
    header.extend(strings(class_headers));
    header.push(format!("k{k_index}"));
    if with_factored {
        header.push(format!("k{k_index}_factored"));
    }

    let mut rows = Vec::new();
    for n in start..=max {
        if n % 2 == 0 || !numtheory::is_squarefree(n) {
            continue;
        }
        let mu = numtheory::odd_prime_divisor_count(n);
        if n > computed_max {
            rows.push(vec![n.to_string(), mu.to_string(), "skipped".to_string()]);
            continue;
        }
        let mut row = vec![n.to_string(), mu.to_string()];
        for idx in 0..genus.classes().len() {
            row.push(genus.representation(idx, n)?.to_string());
        }
        let k = genus.kgroup_order(n)?;
        row.push(k.order.to_string());
        if with_factored {
            row.push(factored(&k.order)?);
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// n, mu, the valuation bound (3 + mu)/2 as a reduced fraction, r_f(n) for
/// x² + y² + 7z², and v₂(r_f(n)) — at odd squarefree n coprime to 7 with
/// mu ≥ 3.
fn val_p7_rows(max: u64) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let genus = fixtures::load("p7")?;
    genus.ensure_thetas(max as usize)?;
    let header = strings(&["n", "mu", "bound", "rf", "v2"]);
    let mut rows = Vec::new();
    for n in 3..=max {
        if n % 2 == 0 || n % 7 == 0 || !numtheory::is_squarefree(n) {
            continue;
        }
        let mu = numtheory::odd_prime_divisor_count(n);
        if mu < 3 {
            continue;
        }
        let bound = if mu % 2 == 1 {
            format!("{}", (3 + mu) / 2)
        } else {
            format!("{}/2", 3 + mu)
        };
        let rf = genus.representation(0, n)?;
        let v2 = match rf.trailing_zeros() {
            Some(v) => v.to_string(),
            None => "inf".to_string(),
        };
        rows.push(vec![n.to_string(), mu.to_string(), bound, rf.to_string(), v2]);
    }
    Ok((header, rows))
}

/// Registry of the bundled small-level pairs with level ≤ max: fixture
/// name, level, both forms as `a:b:c:r:s:t` sextuples, automorphism
/// counts, and the matched curve label.
fn level_rows(max: u64) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let header = strings(&["name", "level", "f", "g", "muf", "mug", "curve"]);
    let mut rows = Vec::new();
    for entry in fixtures::PAIR_TABLE {
        if entry.level > max {
            continue;
        }
        let genus = fixtures::load(entry.name)?;
        let mut row = vec![entry.name.to_string(), entry.level.to_string()];
        for class in genus.classes() {
            row.push(sextuple_str(&class.form)?);
        }
        for class in genus.classes() {
            let mu = class
                .automorphism_order
                .ok_or_else(|| Error::Descriptor("pair fixture without mu".into()))?;
            row.push(mu.to_string());
        }
        row.push(entry.curve.unwrap_or("-").to_string());
        rows.push(row);
    }
    Ok((header, rows))
}

/// Ternary form as the classical sextuple a:b:c:r:s:t with
/// f = ax² + by² + cz² + ryz + sxz + txy.
fn sextuple_str(f: &qform::QuadForm) -> Result<String> {
    if f.dim() != 3 {
        return Err(Error::Unsupported("sextuple needs a ternary form".into()));
    }
    let g = f.gram();
    Ok(format!(
        "{}:{}:{}:{}:{}:{}",
        g[0][0] / 2,
        g[1][1] / 2,
        g[2][2] / 2,
        g[1][2],
        g[0][2],
        g[0][1]
    ))
}

/// λ_f(n) or ρ_f(n) of the request's genus at odd squarefree n coprime to
/// D, n ≥ 2.
fn multiplier_rows(
    req: &TableRequest,
    max: u64,
    rho: bool,
) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let genus = req.genus.ok_or_else(|| {
        Error::InvalidInput("lambda/rho tables need --genus (e.g. a bundled fixture name)".into())
    })?;
    let header = strings(&["n", if rho { "rho" } else { "lambda" }]);
    let mut rows = Vec::new();
    for n in 2..=max {
        if n % 2 == 0 || !numtheory::is_squarefree(n) || n % genus.d_squarefree() == 0 {
            continue;
        }
        let value = if rho {
            crate::siegel::rho_f(genus.diagonal_form(), n)?
        } else {
            crate::siegel::lambda_f(genus.diagonal_form(), n)?
        };
        rows.push(vec![n.to_string(), rational_str(&value)]);
    }
    Ok((header, rows))
}
