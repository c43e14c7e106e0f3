//! Genus-level machinery: weighted representation masses G_f(n) = Σ ξ_h r_h(n),
//! the closed-form multipliers λ_f(n) (ternary forms) and ρ_f(n) (odd
//! dimension ≥ 5) that express the mass through class numbers and L-values,
//! the induced K-group order predictions for real quadratic fields, and
//! deterministic square-class representative sets.
//!
//! A `GenusDescriptor` bundles the classes of a genus with their Siegel
//! weights, usually loaded from a JSON file (see `from_json`). Theta series
//! are computed lazily and cached per descriptor, so verification sweeps pay
//! for lattice enumeration once.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::RwLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Deserialize;

use crate::curves::{CurveModel, CurveSpec};
use crate::error::{Error, Result};
use crate::localdensity;
use crate::numtheory::{self, ExactRational};
use crate::qform::{self, QuadForm, ThetaSeries};

/// One class of a genus: the form, its Siegel weight ξ, and (when supplied)
/// the order of its automorphism group that the weight was derived from.
#[derive(Debug, Clone)]
pub struct GenusClass {
    pub form: QuadForm,
    pub weight: ExactRational,
    pub automorphism_order: Option<u64>,
}

/// A genus with a designated diagonal representative, optional attached
/// curve data, and an optional table of precomputed algebraic L-values.
#[derive(Debug)]
pub struct GenusDescriptor {
    name: String,
    classes: Vec<GenusClass>,
    diagonal_rep: usize,
    dim: usize,
    level: u64,
    d_product: u64,
    d_squarefree: u64,
    curve: Option<CurveModel>,
    lvalues: BTreeMap<u64, ExactRational>,
    thetas: RwLock<Vec<Option<ThetaSeries>>>,
}

/// Predicted order of the even K-group attached to a mass computation over
/// the real quadratic field F = ℚ(√(nD)).
#[derive(Debug, Clone)]
pub struct KGroupPrediction {
    pub d: usize,
    pub n: u64,
    /// Fundamental discriminant of F.
    pub field_disc: i64,
    /// |K_{d−3}(O_F)|, a positive integer.
    pub order: BigUint,
    /// w_𝔡(F).
    pub w: u64,
    /// W_𝔡(F): equal to w, divided by 4 when d ≡ 1 mod 8.
    pub w_used: u64,
}

/// Both sides of the ternary Siegel identity G_f(n) = λ_f(n)·h(−Dn).
#[derive(Debug, Clone)]
pub struct SiegelReport {
    pub n: u64,
    pub mass: ExactRational,
    pub lambda: ExactRational,
    /// Squarefree kernel of Dn, i.e. the b with ℚ(√−Dn) = ℚ(√−b).
    pub kernel: u64,
    pub class_number: u64,
    pub ok: bool,
}

// ---------------------------------------------------------------------------
// JSON shape
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenusFile {
    name: String,
    dim: usize,
    forms: Vec<FormEntry>,
    /// Coefficients of the designated diagonal representative. May be
    /// omitted for genera with no diagonal class; the first form is then
    /// the distinguished one and D is its classical determinant.
    #[serde(default)]
    diagonal: Option<Vec<u64>>,
    #[serde(default)]
    curve: Option<CurveSpec>,
    #[serde(default)]
    lvalues: Option<BTreeMap<String, [i64; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FormEntry {
    gram: Vec<Vec<i64>>,
    #[serde(default)]
    xi: Option<[i64; 2]>,
    #[serde(default)]
    mu: Option<u64>,
}

/// Automorphism groups are verified by brute force only up to this
/// dimension; beyond it the search space is far too large (a unimodular
/// 13-dimensional lattice has ~5·10¹³ automorphisms) and supplied orders
/// are trusted.
const AUT_VERIFY_MAX_DIM: usize = 5;

/// Backtracking-node budget for that verification; small forms finish in
/// well under this.
const AUT_VERIFY_NODE_BUDGET: u64 = 50_000_000;

impl GenusDescriptor {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GenusFile =
            serde_json::from_str(text).map_err(|e| Error::Descriptor(format!("bad JSON: {e}")))?;
        if file.forms.is_empty() {
            return Err(Error::Descriptor("genus needs at least one form".into()));
        }

        // Exactly one weighting mode, uniformly across entries.
        let xi_mode = file.forms[0].xi.is_some();
        for (i, entry) in file.forms.iter().enumerate() {
            match (entry.xi.is_some(), entry.mu.is_some()) {
                (true, true) | (false, false) => {
                    return Err(Error::Descriptor(format!(
                        "form {i}: exactly one of xi or mu must be given"
                    )));
                }
                (has_xi, _) if has_xi != xi_mode => {
                    return Err(Error::Descriptor(
                        "forms mix xi and mu weighting modes".into(),
                    ));
                }
                _ => {}
            }
        }

        let mut classes = Vec::with_capacity(file.forms.len());
        for (i, entry) in file.forms.iter().enumerate() {
            let form = QuadForm::from_gram(entry.gram.clone())
                .map_err(|e| Error::Descriptor(format!("form {i}: {e}")))?;
            if form.dim() != file.dim {
                return Err(Error::Descriptor(format!(
                    "form {i} has dimension {}, descriptor says {}",
                    form.dim(),
                    file.dim
                )));
            }
            let weight = match (entry.xi, entry.mu) {
                (Some([num, den]), None) => {
                    if num <= 0 || den <= 0 {
                        return Err(Error::Descriptor(format!(
                            "form {i}: xi must be a positive rational"
                        )));
                    }
                    numtheory::rat(num, den)
                }
                (None, Some(_)) => ExactRational::zero(), // filled in below
                _ => unreachable!("validated above"),
            };
            classes.push(GenusClass {
                form,
                weight,
                automorphism_order: entry.mu,
            });
        }

        if xi_mode {
            let total: ExactRational = classes.iter().map(|c| c.weight.clone()).sum();
            if !total.is_one() {
                return Err(Error::Descriptor(format!("weights sum to {total}, not 1")));
            }
        } else {
            // ξ_h = (1/μ_h) / Σ_g (1/μ_g).
            let mut inv_sum = ExactRational::zero();
            for class in &classes {
                let mu = class.automorphism_order.unwrap();
                if mu == 0 {
                    return Err(Error::Descriptor("mu must be positive".into()));
                }
                inv_sum += ExactRational::new(BigInt::one(), BigInt::from(mu));
            }
            for class in &mut classes {
                let mu = class.automorphism_order.unwrap();
                class.weight = ExactRational::new(BigInt::one(), BigInt::from(mu)) / &inv_sum;
            }
            if file.dim <= AUT_VERIFY_MAX_DIM {
                for (i, class) in classes.iter().enumerate() {
                    let mu = class.automorphism_order.unwrap();
                    let counted =
                        qform::automorphism_count(&class.form, AUT_VERIFY_NODE_BUDGET).exact();
                    if counted != Some(mu) {
                        return Err(Error::Descriptor(format!(
                            "form {i}: declared automorphism order {mu}, counted {counted:?}"
                        )));
                    }
                }
            }
        }

        let level = classes[0].form.level()?;
        for (i, class) in classes.iter().enumerate() {
            let l = class.form.level()?;
            if l != level {
                return Err(Error::Descriptor(format!(
                    "form {i} has level {l}, form 0 has level {level}"
                )));
            }
        }

        let (diagonal_rep, d_product) = match &file.diagonal {
            Some(diag) => {
                let diag_form = QuadForm::from_diagonal(diag)
                    .map_err(|e| Error::Descriptor(format!("diagonal: {e}")))?;
                let rep = classes
                    .iter()
                    .position(|c| c.form.gram() == diag_form.gram())
                    .ok_or_else(|| {
                        Error::Descriptor(format!(
                            "no form matches the designated diagonal {diag:?}"
                        ))
                    })?;
                let mut d: u64 = 1;
                for &b in diag {
                    d = d.checked_mul(b).ok_or_else(|| {
                        Error::Descriptor("coefficient product overflows".into())
                    })?;
                }
                (rep, d)
            }
            // No diagonal class: the first form is the distinguished
            // representative and D generalizes to its classical determinant
            // det(A/2) = det(A)/2^dim (equal to the coefficient product when
            // a diagonal form exists).
            None => {
                let det = classes[0].form.det_gram();
                let (q, r) = det.div_rem(&(BigInt::one() << file.dim));
                if !r.is_zero() {
                    return Err(Error::Descriptor(
                        "classical determinant is not integral; designate a diagonal form"
                            .into(),
                    ));
                }
                let d = q.to_u64().ok_or_else(|| {
                    Error::Descriptor("classical determinant exceeds u64".into())
                })?;
                (0, d)
            }
        };
        let d_squarefree = numtheory::squarefree_part(i64::try_from(d_product).map_err(
            |_| Error::Descriptor("coefficient product overflows".into()),
        )?)? as u64;

        let curve = file.curve.as_ref().map(CurveModel::from_spec).transpose()?;

        let mut lvalues = BTreeMap::new();
        if let Some(table) = &file.lvalues {
            for (key, [num, den]) in table {
                let n0: u64 = key.parse().map_err(|_| {
                    Error::Descriptor(format!("lvalues key {key} is not a positive integer"))
                })?;
                if *den <= 0 {
                    return Err(Error::Descriptor(format!(
                        "lvalues[{key}] has nonpositive denominator"
                    )));
                }
                lvalues.insert(n0, numtheory::rat(*num, *den));
            }
        }

        let slots = classes.len();
        Ok(GenusDescriptor {
            name: file.name,
            classes,
            diagonal_rep,
            dim: file.dim,
            level,
            d_product,
            d_squarefree,
            curve,
            lvalues,
            thetas: RwLock::new(vec![None; slots]),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn classes(&self) -> &[GenusClass] {
        &self.classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    /// D: the product of the diagonal representative's coefficients (its
    /// classical determinant when the genus has no diagonal class).
    pub fn d_product(&self) -> u64 {
        self.d_product
    }

    /// D°: the squarefree part of D.
    pub fn d_squarefree(&self) -> u64 {
        self.d_squarefree
    }

    /// Index of the distinguished representative (the designated diagonal
    /// class, or the first form when none was designated).
    pub fn diagonal_index(&self) -> usize {
        self.diagonal_rep
    }

    pub fn diagonal_form(&self) -> &QuadForm {
        &self.classes[self.diagonal_rep].form
    }

    pub fn curve(&self) -> Option<&CurveModel> {
        self.curve.as_ref()
    }

    pub fn lvalues(&self) -> &BTreeMap<u64, ExactRational> {
        &self.lvalues
    }

    /// For a two-class genus, the weight ξ of the non-diagonal class — the
    /// factor in front of the cusp coefficient in r_f(n) = ξ·a_n + G_f(n).
    pub fn xi_cusp(&self) -> Result<ExactRational> {
        if self.classes.len() != 2 {
            return Err(Error::Unsupported(format!(
                "cusp weight needs a two-class genus, this one has {}",
                self.classes.len()
            )));
        }
        Ok(self.classes[1 - self.diagonal_rep].weight.clone())
    }

    /// Computes (or extends) the cached theta series of every class to at
    /// least the given precision. Classes already long enough are kept.
    pub fn ensure_thetas(&self, precision: usize) -> Result<()> {
        {
            let cache = self.thetas.read().unwrap();
            if cache
                .iter()
                .all(|s| s.as_ref().is_some_and(|s| s.precision >= precision))
            {
                return Ok(());
            }
        }
        let mut cache = self.thetas.write().unwrap();
        for (class, slot) in self.classes.iter().zip(cache.iter_mut()) {
            if slot.as_ref().is_some_and(|s| s.precision >= precision) {
                continue;
            }
            // Diagonal forms get the cheap unary-product route; everything
            // else goes through lattice enumeration.
            let series = match class.form.diagonal_coeffs() {
                Some(b) => qform::theta_diagonal(&b.to_vec(), precision)?,
                None => qform::theta_general(&class.form, precision)?,
            };
            *slot = Some(series);
        }
        Ok(())
    }

    /// Installs an externally obtained theta series (e.g. from a disk
    /// cache) for the class at `idx`, after checking it belongs to it.
    pub fn install_theta(&self, idx: usize, series: ThetaSeries) -> Result<()> {
        let class = self
            .classes
            .get(idx)
            .ok_or_else(|| Error::InvalidInput(format!("no class {idx}")))?;
        if series.form.gram() != class.form.gram() {
            return Err(Error::InvalidInput(format!(
                "theta series belongs to a different form than class {idx}"
            )));
        }
        self.thetas.write().unwrap()[idx] = Some(series);
        Ok(())
    }

    /// A clone of the cached theta series of class `idx`, if computed.
    pub fn theta_snapshot(&self, idx: usize) -> Option<ThetaSeries> {
        self.thetas.read().unwrap().get(idx).and_then(|s| s.clone())
    }

    /// r_h(n) for the class at `idx`, from the cached theta series.
    /// Errors if `ensure_thetas(n)` has not been called.
    pub fn representation(&self, idx: usize, n: u64) -> Result<BigUint> {
        let n = usize::try_from(n).map_err(|_| Error::InvalidInput("n too large".into()))?;
        let cache = self.thetas.read().unwrap();
        let slot = cache
            .get(idx)
            .ok_or_else(|| Error::InvalidInput(format!("no class {idx}")))?;
        match slot {
            Some(series) if series.precision >= n => Ok(series.coeff(n).clone()),
            other => Err(Error::Precision {
                need: n as f64,
                have: other.as_ref().map_or(0.0, |s| s.precision as f64),
            }),
        }
    }

    /// The genus mass G_f(n) = Σ_h ξ_h r_h(n), exact. Theta series must
    /// have been prepared to precision ≥ n via `ensure_thetas`.
    pub fn mass(&self, n: u64) -> Result<ExactRational> {
        let mut total = ExactRational::zero();
        for idx in 0..self.classes.len() {
            let r = self.representation(idx, n)?;
            total += &self.classes[idx].weight * ExactRational::from(BigInt::from(r));
        }
        Ok(total)
    }

    /// Checks the ternary Siegel identity G_f(n) = λ_f(n)·h(−Dn) exactly,
    /// returning both sides. h(−Dn) is the class number of ℚ(√−Dn), i.e.
    /// of the imaginary field for the squarefree kernel of Dn.
    pub fn verify_siegel_d3(&self, n: u64) -> Result<SiegelReport> {
        if self.dim != 3 {
            return Err(Error::Unsupported(format!(
                "Siegel identity check is for ternary genera, dimension is {}",
                self.dim
            )));
        }
        let mass = self.mass(n)?;
        let lambda = lambda_f(self.diagonal_form(), n)?;
        let dn = i64::try_from(self.d_product * n)
            .map_err(|_| Error::InvalidInput("Dn too large".into()))?;
        let kernel = numtheory::squarefree_part(dn)? as u64;
        let class_number = numtheory::class_number_imag(kernel)?;
        let rhs = &lambda * ExactRational::from(BigInt::from(class_number));
        Ok(SiegelReport {
            n,
            ok: mass == rhs,
            mass,
            lambda,
            kernel,
            class_number,
        })
    }

    /// Predicts |K_{d−3}(O_F)| for F = ℚ(√(nD)) from the mass:
    /// order = G_f(n)·W_𝔡(F)·ζ(1−𝔡)/ρ_f(n), 𝔡 = (d−1)/2, which must come
    /// out a positive integer. The result is cross-checked against the
    /// independent closed form |W_𝔡(F)·ζ(1−𝔡)·L(1−𝔡, χ_K)|.
    pub fn kgroup_order(&self, n: u64) -> Result<KGroupPrediction> {
        if self.dim % 4 != 1 || self.dim < 5 {
            return Err(Error::Unsupported(format!(
                "K-group prediction needs d ≡ 1 mod 4, d ≥ 5; dimension is {}",
                self.dim
            )));
        }
        let fd = (self.dim - 1) as i64 / 2;
        let rho = rho_f(self.diagonal_form(), n)?;
        if rho.is_zero() {
            return Err(Error::MassVanishes);
        }
        let nd = i64::try_from(n.checked_mul(self.d_product).ok_or_else(|| {
            Error::InvalidInput("nD overflows".into())
        })?)
        .map_err(|_| Error::InvalidInput("nD overflows".into()))?;
        let field_disc = numtheory::fundamental_discriminant(nd)?;
        let w = numtheory::w_k_quadratic(fd as u64, field_disc)?;
        let w_used = if self.dim % 8 == 1 {
            debug_assert_eq!(w % 4, 0);
            w / 4
        } else {
            w
        };
        let zeta = numtheory::zeta_nonpositive(1 - fd)?;
        let mass = self.mass(n)?;
        let order_rat = mass * ExactRational::from(BigInt::from(w_used)) * zeta.clone() / rho;
        if !order_rat.is_integer() || !order_rat.is_positive() {
            return Err(Error::IntegralityFailure(format!(
                "K-group order candidate {order_rat} for n={n} is not a positive integer"
            )));
        }
        let order = order_rat.to_integer().to_biguint().unwrap();

        // Independent path: |K| = |W_𝔡·ζ(1−𝔡)·L(1−𝔡, χ_K)| with χ_K the
        // character of the (real or imaginary) field attached to ρ.
        let m = numtheory::squarefree_part(
            i64::try_from(n * self.d_squarefree)
                .map_err(|_| Error::InvalidInput("nD° overflows".into()))?,
        )?;
        let disc_k = numtheory::fundamental_discriminant(if fd % 2 == 0 { m } else { -m })?;
        let chi = numtheory::QuadCharacter::new(disc_k)?;
        let lval = numtheory::dirichlet_l_nonpositive(1 - fd, &chi)?;
        let alt = (ExactRational::from(BigInt::from(w_used)) * zeta * lval).abs();
        let alt_int = alt.is_integer().then(|| alt.to_integer().to_biguint().unwrap());
        if alt_int.as_ref() != Some(&order) {
            return Err(Error::IntegralityFailure(format!(
                "mass path gives {order}, closed form gives {alt} for n={n}"
            )));
        }

        Ok(KGroupPrediction {
            d: self.dim,
            n,
            field_disc,
            order,
            w,
            w_used,
        })
    }
}

// ---------------------------------------------------------------------------
// Closed-form multipliers
// ---------------------------------------------------------------------------

/// Shared hypothesis check: diagonal form, positive squarefree n coprime
/// to 2D. Returns (coefficients, D).
fn diagonal_hypotheses<'f>(f: &'f QuadForm, n: u64) -> Result<(&'f [u64], u64)> {
    let b = f
        .diagonal_coeffs()
        .ok_or_else(|| Error::InvalidInput("multiplier needs a diagonal form".into()))?;
    let mut d: u64 = 1;
    for &bi in b {
        d = d
            .checked_mul(bi)
            .ok_or_else(|| Error::InvalidInput("coefficient product overflows".into()))?;
    }
    if n == 0 || !numtheory::is_squarefree(n) {
        return Err(Error::InvalidInput(format!("n = {n} must be positive squarefree")));
    }
    if n % 2 == 0 || numtheory::factorize(d).iter().any(|&(p, _)| n % p == 0) {
        return Err(Error::InvalidInput(format!("n = {n} must be coprime to 2D = {}", 2 * d)));
    }
    Ok((b, d))
}

/// Local product Π_{p | 2D} δ_p(n, f)·(1 − χ(p)/p^s)·(1 − 1/p^{2s})^{−1}
/// common to both multipliers; χ is the quadratic character of K and the
/// exponent s is 1 for λ and 𝔡 for ρ.
fn local_product(f: &QuadForm, n: u64, d: u64, chi: &numtheory::QuadCharacter, s: u32) -> Result<ExactRational> {
    let mut primes = vec![2u64];
    primes.extend(numtheory::factorize(d).iter().map(|&(p, _)| p).filter(|&p| p != 2));
    let mut prod = ExactRational::one();
    for p in primes {
        let delta = localdensity::delta_p_exact(f, n, p)?;
        let ps = BigInt::from(p).pow(s);
        let chi_p = chi.eval(p as i64);
        let euler = ExactRational::new(&ps - BigInt::from(chi_p), ps.clone());
        let p2s = &ps * &ps;
        let zeta_fix = ExactRational::new(p2s.clone(), &p2s - BigInt::one());
        prod *= delta * euler * zeta_fix;
    }
    Ok(prod)
}

/// λ_f(n) for a diagonal ternary form f and squarefree n coprime to 2D:
/// (24/w_K)·√(n/(D·|D_K|))·Π_{p|2D} δ_p(n,f)(1−χ(p)/p)(1−1/p²)^{−1},
/// where K = ℚ(√−Dn). The square-root factor is exactly t/(D·ε_K) with
/// Dn = t²·m, m squarefree, and ε_K² = |D_K|/m ∈ {1, 4}, so the result is
/// an exact rational; G_f(n) = λ_f(n)·h(−Dn).
pub fn lambda_f(f: &QuadForm, n: u64) -> Result<ExactRational> {
    let (b, d) = diagonal_hypotheses(f, n)?;
    if b.len() != 3 {
        return Err(Error::InvalidInput(format!(
            "λ needs a ternary form, dimension is {}",
            b.len()
        )));
    }
    let dn = i64::try_from(d * n).map_err(|_| Error::InvalidInput("Dn too large".into()))?;
    let m = numtheory::squarefree_part(dn)? as u64;
    let t = integer_sqrt_exact(d * n / m);
    let disc_k = numtheory::fundamental_discriminant(-(m as i64))?;
    let eps_k = integer_sqrt_exact(disc_k.unsigned_abs() / m);
    let w_k = numtheory::roots_of_unity_count(disc_k);
    let chi = numtheory::QuadCharacter::new(disc_k)?;

    let front = numtheory::rat(24, w_k as i64)
        * ExactRational::new(BigInt::from(t), BigInt::from(d * eps_k));
    Ok(front * local_product(f, n, d, &chi, 1)?)
}

/// ρ_f(n) for a diagonal form of odd dimension d ≥ 5 and squarefree n
/// coprime to 2D, with 𝔡 = (d−1)/2:
///
///   2^{𝔡−1}(−1)^{⌊𝔡/2⌋}√(D°/D)
///   ───────────────────────────── · Π_{p|2D} δ_p(n,f)(1−χ(p)/p^𝔡)(1−1/p^{2𝔡})^{−1}
///   (D°)^𝔡·ε_K^{2𝔡−1}·ζ(1−2𝔡)
///
/// where K = ℚ(√((−1)^𝔡·nD°)), D_K = ε_K²(−1)^𝔡 nD°, and √(D°/D) = 1/u for
/// D = D°u²; G_f(n) = ρ_f(n)·L(1−𝔡, χ_K).
pub fn rho_f(f: &QuadForm, n: u64) -> Result<ExactRational> {
    let (b, d) = diagonal_hypotheses(f, n)?;
    let dim = b.len();
    if dim < 5 || dim % 2 == 0 {
        return Err(Error::InvalidInput(format!(
            "ρ needs odd dimension ≥ 5, got {dim}"
        )));
    }
    let fd = (dim as i64 - 1) / 2;
    let d0 = numtheory::squarefree_part(
        i64::try_from(d).map_err(|_| Error::InvalidInput("D too large".into()))?,
    )? as u64;
    let u = integer_sqrt_exact(d / d0);

    let m = (n * d0) as i64; // squarefree: n, D° squarefree and coprime
    let disc_k = numtheory::fundamental_discriminant(if fd % 2 == 0 { m } else { -m })?;
    let eps_k = integer_sqrt_exact(disc_k.unsigned_abs() / m as u64);
    let chi = numtheory::QuadCharacter::new(disc_k)?;

    let sign = if (fd / 2) % 2 == 0 { 1 } else { -1 };
    let numerator = BigInt::from(sign) * BigInt::from(2).pow(fd as u32 - 1);
    let denominator = BigInt::from(d0).pow(fd as u32)
        * BigInt::from(eps_k).pow(2 * fd as u32 - 1)
        * BigInt::from(u);
    let zeta = numtheory::zeta_nonpositive(1 - 2 * fd)?;
    let front = ExactRational::new(numerator, denominator) / zeta;
    Ok(front * local_product(f, n, d, &chi, fd as u32)?)
}

/// Exact integer square root of a perfect square (panics otherwise; all
/// call sites feed quotients that are squares by construction).
fn integer_sqrt_exact(v: u64) -> u64 {
    let r = (v as f64).sqrt().round() as u64;
    assert_eq!(r * r, v, "{v} is not a perfect square");
    r
}

// ---------------------------------------------------------------------------
// Square-class representatives
// ---------------------------------------------------------------------------

/// One representative per square class of ℚ_ℓ^× for every ℓ | modulus,
/// among positive odd squarefree integers coprime to the modulus, scanning
/// upward (so the result is deterministic: smallest representative per
/// class, ascending). Errors when `bound` is exhausted before every class
/// is seen, reporting what was found.
pub fn sfrak_representatives(modulus: u64, bound: u64) -> Result<Vec<u64>> {
    if modulus < 2 {
        return Err(Error::InvalidInput("modulus must be at least 2".into()));
    }
    let primes: Vec<u64> = numtheory::factorize(modulus).iter().map(|&(p, _)| p).collect();
    let expected: usize = primes.iter().map(|&p| if p == 2 { 4 } else { 2 }).product();
    let mut seen: BTreeMap<Vec<numtheory::SquareClass>, u64> = BTreeMap::new();
    let mut n = 1u64;
    while n <= bound && seen.len() < expected {
        if gcd(n, modulus) == 1 && numtheory::is_squarefree(n) {
            let key: Vec<_> = primes.iter().map(|&p| numtheory::square_class_at(n, p)).collect();
            seen.entry(key).or_insert(n);
        }
        n += 2;
    }
    if seen.len() < expected {
        let found: Vec<u64> = seen.values().copied().collect();
        return Err(Error::BudgetExceeded(format!(
            "found {}/{expected} square classes up to {bound}: {found:?}",
            seen.len()
        )));
    }
    let mut reps: Vec<u64> = seen.values().copied().collect();
    reps.sort_unstable();
    Ok(reps)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P7_GENUS: &str = r#"{
        "name": "p7",
        "dim": 3,
        "forms": [
            { "gram": [[2,0,0],[0,2,0],[0,0,14]], "mu": 16 },
            { "gram": [[2,0,0],[0,4,2],[0,2,8]], "mu": 8 }
        ],
        "diagonal": [1, 1, 7],
        "curve": { "P": [1, 1, -8, 16], "label": "14a" },
        "lvalues": { "57": [4, 1], "15": [4, 1], "5": [0, 1] }
    }"#;

    #[test]
    fn p7_genus_loads_and_verifies() {
        let genus = GenusDescriptor::from_json(P7_GENUS).unwrap();
        assert_eq!(genus.name(), "p7");
        assert_eq!(genus.level(), 28);
        assert_eq!(genus.d_product(), 7);
        assert_eq!(genus.diagonal_index(), 0);
        assert_eq!(genus.classes()[0].weight, numtheory::rat(1, 3));
        assert_eq!(genus.classes()[1].weight, numtheory::rat(2, 3));
        assert_eq!(genus.xi_cusp().unwrap(), numtheory::rat(2, 3));
        assert_eq!(genus.curve().unwrap().label(), "14a");
        assert_eq!(genus.lvalues()[&57], numtheory::rat(4, 1));

        // Theta access is gated on ensure_thetas.
        assert!(matches!(genus.mass(15), Err(Error::Precision { .. })));
        genus.ensure_thetas(20).unwrap();
        assert_eq!(genus.representation(0, 15).unwrap(), BigUint::from(8u32));
        assert_eq!(genus.representation(1, 15).unwrap(), BigUint::from(4u32));
        assert_eq!(genus.mass(15).unwrap(), numtheory::rat(16, 3));
        assert_eq!(genus.mass(0).unwrap(), numtheory::rat(1, 1));

        let report = genus.verify_siegel_d3(15).unwrap();
        assert!(report.ok);
        assert_eq!(report.lambda, numtheory::rat(2, 3));
        assert_eq!(report.kernel, 105);
        assert_eq!(report.class_number, 8);
    }

    #[test]
    fn lambda_multiplier_pins() {
        let f = QuadForm::from_diagonal(&[1, 1, 7]).unwrap();
        assert_eq!(lambda_f(&f, 15).unwrap(), numtheory::rat(2, 3)); // n ≡ 3 mod 4
        assert_eq!(lambda_f(&f, 57).unwrap(), numtheory::rat(8, 3)); // n ≡ 1 mod 8
        assert_eq!(lambda_f(&f, 5).unwrap(), numtheory::rat(4, 1)); // n ≡ 5 mod 8

        // p ≡ 1 mod 4 with pn ≡ 7 mod 8 kills the multiplier.
        let f13 = QuadForm::from_diagonal(&[1, 1, 13]).unwrap();
        assert!(lambda_f(&f13, 3).unwrap().is_zero());

        // Hypothesis violations are rejected.
        assert!(lambda_f(&f, 12).is_err()); // not squarefree
        assert!(lambda_f(&f, 21).is_err()); // shares a factor with D
    }

    #[test]
    fn rho_multiplier_pins() {
        let f = QuadForm::from_diagonal(&[1, 1, 1, 1, 7]).unwrap();
        assert_eq!(rho_f(&f, 5).unwrap(), numtheory::rat(-4, 5)); // n ≡ 1 mod 4
        assert_eq!(rho_f(&f, 3).unwrap(), numtheory::rat(-28, 5)); // n ≡ 3 mod 8
        assert_eq!(rho_f(&f, 15).unwrap(), numtheory::rat(-12, 5)); // n ≡ 7 mod 8
    }

    #[test]
    fn unimodular_d5_kgroup() {
        let genus = GenusDescriptor::from_json(
            r#"{
                "name": "d5",
                "dim": 5,
                "forms": [
                    { "gram": [[2,0,0,0,0],[0,2,0,0,0],[0,0,2,0,0],[0,0,0,2,0],[0,0,0,0,2]],
                      "mu": 3840 }
                ],
                "diagonal": [1, 1, 1, 1, 1]
            }"#,
        )
        .unwrap();
        assert_eq!(genus.classes()[0].weight, numtheory::rat(1, 1));
        genus.ensure_thetas(7).unwrap();
        assert_eq!(genus.representation(0, 7).unwrap(), BigUint::from(320u32));
        let pred = genus.kgroup_order(7).unwrap();
        assert_eq!(pred.order, BigUint::from(16u32));
        assert_eq!(pred.field_disc, 28);
        assert_eq!(pred.w, 24);
        assert_eq!(pred.w_used, 24);
    }

    #[test]
    fn descriptor_validation_failures() {
        // Mixed weighting modes.
        let mixed = r#"{
            "name": "bad", "dim": 3,
            "forms": [
                { "gram": [[2,0,0],[0,2,0],[0,0,14]], "xi": [1, 3] },
                { "gram": [[2,0,0],[0,4,2],[0,2,8]], "mu": 8 }
            ],
            "diagonal": [1, 1, 7]
        }"#;
        assert!(matches!(
            GenusDescriptor::from_json(mixed),
            Err(Error::Descriptor(_))
        ));

        // Weights that do not sum to 1.
        let short = r#"{
            "name": "bad", "dim": 3,
            "forms": [
                { "gram": [[2,0,0],[0,2,0],[0,0,14]], "xi": [1, 3] },
                { "gram": [[2,0,0],[0,4,2],[0,2,8]], "xi": [1, 3] }
            ],
            "diagonal": [1, 1, 7]
        }"#;
        assert!(matches!(
            GenusDescriptor::from_json(short),
            Err(Error::Descriptor(_))
        ));

        // Diagonal marker matches no form.
        let nodiag = r#"{
            "name": "bad", "dim": 3,
            "forms": [ { "gram": [[2,0,0],[0,4,2],[0,2,8]], "xi": [1, 1] } ],
            "diagonal": [1, 1, 7]
        }"#;
        assert!(matches!(
            GenusDescriptor::from_json(nodiag),
            Err(Error::Descriptor(_))
        ));

        // Wrong declared automorphism order is caught at d ≤ 5.
        let badmu = r#"{
            "name": "bad", "dim": 3,
            "forms": [ { "gram": [[2,0,0],[0,2,0],[0,0,14]], "mu": 12 } ],
            "diagonal": [1, 1, 7]
        }"#;
        assert!(matches!(
            GenusDescriptor::from_json(badmu),
            Err(Error::Descriptor(_))
        ));
    }

    #[test]
    fn sfrak_classes_for_level_28() {
        let reps = sfrak_representatives(28, 500).unwrap();
        assert_eq!(reps.len(), 8);
        assert_eq!(reps[0], 1);
        // Pairwise inequivalent...
        for (i, &a) in reps.iter().enumerate() {
            for &b in &reps[i + 1..] {
                assert!(!numtheory::square_linked(a, b, 28).unwrap());
            }
        }
        // ...and {57,43,29,15,89,19,5,103} is an equally valid system: each
        // member links to exactly one scan representative.
        let alt = [57u64, 43, 29, 15, 89, 19, 5, 103];
        for &a in &alt {
            let hits = reps
                .iter()
                .filter(|&&r| numtheory::square_linked(a, r, 28).unwrap())
                .count();
            assert_eq!(hits, 1, "n = {a}");
        }

        // Too small a bound reports the shortfall.
        assert!(matches!(
            sfrak_representatives(28, 10),
            Err(Error::BudgetExceeded(_))
        ));

        // Trivial modulus 4: the odd residues mod 8.
        assert_eq!(sfrak_representatives(4, 100).unwrap(), vec![1, 3, 5, 7]);
    }
}
