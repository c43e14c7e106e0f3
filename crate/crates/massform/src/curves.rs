//! Elliptic curves given as y² = P(x): point counts, reduction data,
//! quadratic twists, real periods, and numeric central L-values.
//!
//! Models are minimalized with the Laska–Kraus–Connell method, point
//! counts walk quadratic-residue tables, real periods come from the
//! arithmetic-geometric mean on the roots of the associated short model
//! X³ − 27c₄X − 54c₆, and L(E^{(m)}, 1) is approximated by the standard
//! exponentially weighted Dirichlet series at the conductor of the twist.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::numtheory;

/// A curve y² = P(x) with monic integral cubic P, plus bookkeeping used by
/// the verification pipeline (a label for reports, the Manin constant for
/// valuation bounds, an optional conductor override, and the period-lattice
/// index tying this model to the reference L-value normalization).
#[derive(Debug, Clone)]
pub struct CurveModel {
    coeffs: [i64; 4],
    label: String,
    manin: u64,
    conductor_override: Option<u64>,
    lattice_scale: u64,
    minimal: MinimalModel,
}

/// Minimal Weierstrass data: invariants (c4, c6), the scaling u that
/// produced them, the recovered coefficients [a1, a2, a3, a4, a6], and the
/// minimal discriminant.
#[derive(Debug, Clone)]
struct MinimalModel {
    c4: i128,
    c6: i128,
    a: [i128; 5],
    disc: BigInt,
}

/// Raw JSON shape of a curve entry in a genus descriptor.
#[derive(Debug, Deserialize)]
pub struct CurveSpec {
    #[serde(rename = "P")]
    pub p: Vec<i64>,
    #[serde(default)]
    pub label: String,
    #[serde(default = "default_manin")]
    pub manin: u64,
    #[serde(default)]
    pub conductor: Option<u64>,
    #[serde(default = "default_manin")]
    pub lattice_scale: u64,
}

fn default_manin() -> u64 {
    1
}

impl CurveModel {
    /// Build and validate a model from cubic coefficients [c3, c2, c1, c0]
    /// (c3 must be 1) for y² = x³ + c2x² + c1x + c0.
    pub fn new(
        coeffs: [i64; 4],
        label: &str,
        manin: u64,
        conductor: Option<u64>,
    ) -> Result<Self> {
        if coeffs[0] != 1 {
            return Err(Error::InvalidInput("cubic must be monic".into()));
        }
        if manin == 0 {
            return Err(Error::InvalidInput("manin constant must be positive".into()));
        }
        if cubic_disc(coeffs[1] as i128, coeffs[2] as i128, coeffs[3] as i128) == 0 {
            return Err(Error::InvalidInput("cubic has a repeated root".into()));
        }
        let (c4, c6) = invariants_of_cubic(coeffs[1] as i128, coeffs[2] as i128, coeffs[3] as i128);
        let minimal = minimal_model(c4, c6)?;
        Ok(CurveModel {
            coeffs,
            label: label.to_string(),
            manin,
            conductor_override: conductor,
            lattice_scale: 1,
            minimal,
        })
    }

    /// Set the period-lattice index of this model relative to the curve that
    /// normalizes the reference L-value tables (see
    /// [`CurveModel::lattice_scale`]). The default is 1.
    pub fn with_lattice_scale(mut self, scale: u64) -> Result<Self> {
        if scale == 0 {
            return Err(Error::InvalidInput("lattice scale must be positive".into()));
        }
        self.lattice_scale = scale;
        Ok(self)
    }

    pub fn from_spec(spec: &CurveSpec) -> Result<Self> {
        if spec.p.len() != 4 {
            return Err(Error::Descriptor(
                "curve key P must have exactly four coefficients".into(),
            ));
        }
        CurveModel::new(
            [spec.p[0], spec.p[1], spec.p[2], spec.p[3]],
            &spec.label,
            spec.manin,
            spec.conductor,
        )?
        .with_lattice_scale(spec.lattice_scale)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn manin(&self) -> u64 {
        self.manin
    }

    /// Index of this model's real period against the period used by the
    /// bundled L-value tables: Ω_reference = Ω_model / lattice_scale. Models
    /// isogenous to the curve the tables were normalized with can carry a
    /// period lattice finer by an integer factor (e.g. a degree-5 isogeny),
    /// and this factor makes `numeric_l` report ratios on the table's scale.
    pub fn lattice_scale(&self) -> u64 {
        self.lattice_scale
    }

    /// Coefficients [1, c2, c1, c0] of the defining cubic.
    pub fn cubic(&self) -> [i64; 4] {
        self.coeffs
    }

    /// P evaluated at an integer.
    pub fn eval_cubic(&self, x: i128) -> i128 {
        ((x + self.coeffs[1] as i128) * x + self.coeffs[2] as i128) * x + self.coeffs[3] as i128
    }

    /// Discriminant of the cubic P (not the curve discriminant).
    pub fn cubic_discriminant(&self) -> i128 {
        cubic_disc(
            self.coeffs[1] as i128,
            self.coeffs[2] as i128,
            self.coeffs[3] as i128,
        )
    }

    /// Minimal discriminant of the curve.
    pub fn minimal_discriminant(&self) -> BigInt {
        self.minimal.disc.clone()
    }

    /// Minimal-model invariants (c4, c6).
    pub fn minimal_invariants(&self) -> (i128, i128) {
        (self.minimal.c4, self.minimal.c6)
    }

    /// The conductor: the supplied override if any, else computed from the
    /// minimal model. Reduction is multiplicative at p | Δ_min with p ∤ c4
    /// (exponent 1) and additive otherwise (exponent 2 for p ≥ 5); additive
    /// reduction at 2 or 3 needs a supplied conductor.
    pub fn conductor(&self) -> Result<u64> {
        if let Some(n) = self.conductor_override {
            return Ok(n);
        }
        let disc = self
            .minimal
            .disc
            .abs()
            .to_u64()
            .ok_or_else(|| Error::Unsupported("minimal discriminant exceeds u64".into()))?;
        let mut n = 1u64;
        for (p, _) in numtheory::factorize(disc) {
            if self.minimal.c4 % p as i128 != 0 {
                n = n
                    .checked_mul(p)
                    .ok_or_else(|| Error::Unsupported("conductor exceeds u64".into()))?;
            } else if p >= 5 {
                n = n
                    .checked_mul(p * p)
                    .ok_or_else(|| Error::Unsupported("conductor exceeds u64".into()))?;
            } else {
                return Err(Error::Unsupported(format!(
                    "additive reduction at {p}: supply the conductor explicitly"
                )));
            }
        }
        Ok(n)
    }

    /// The quadratic twist by a squarefree integer m: y² = x³ + mc2x² +
    /// m²c1x + m³c0.
    pub fn twist(&self, m: i64) -> Result<CurveModel> {
        if m == 0 {
            return Err(Error::InvalidInput("twist by zero".into()));
        }
        if numtheory::squarefree_part(m)? != m {
            return Err(Error::InvalidInput(format!("twist {m} is not squarefree")));
        }
        let c2 = self.coeffs[1]
            .checked_mul(m)
            .ok_or_else(|| Error::Unsupported("twisted coefficients exceed i64".into()))?;
        let c1 = self.coeffs[2]
            .checked_mul(m)
            .and_then(|v| v.checked_mul(m))
            .ok_or_else(|| Error::Unsupported("twisted coefficients exceed i64".into()))?;
        let c0 = m
            .checked_mul(m)
            .and_then(|v| v.checked_mul(m))
            .and_then(|v| v.checked_mul(self.coeffs[3]))
            .ok_or_else(|| Error::Unsupported("twisted coefficients exceed i64".into()))?;
        CurveModel::new([1, c2, c1, c0], &format!("{}^({m})", self.label), self.manin, None)?
            .with_lattice_scale(self.lattice_scale)
    }

    /// a_p at an odd prime of good reduction for the cubic model:
    /// a_p = p + 1 − #E(F_p), with the Hasse bound asserted.
    pub fn ap(&self, p: u64) -> Result<i64> {
        if p == 2 || !numtheory::is_prime(p) {
            return Err(Error::InvalidInput(format!("{p} is not an odd prime")));
        }
        if p >= 1 << 31 {
            return Err(Error::Unsupported(format!("prime {p} too large for point counting")));
        }
        if self.cubic_discriminant() % p as i128 == 0 {
            return Err(Error::InvalidInput(format!("bad reduction at {p}")));
        }
        let a = self.ap_any(p);
        assert!(
            a * a <= 4 * p as i64,
            "Hasse bound violated at p={p}: a_p={a}"
        );
        Ok(a)
    }

    /// a_p for any prime, good or bad, computed on the minimal model.
    /// Good reduction: p + 1 − #E(F_p). Bad reduction: p − #E_ns(F_p), which
    /// is 1 / −1 / 0 for split / nonsplit / additive. The whole loop stays in
    /// u64 (products stay below 2⁶⁴ for p < 2³¹), which matters: L-value
    /// sieves call this for every prime up to ~10⁵.
    fn ap_any(&self, p: u64) -> i64 {
        if p == 2 {
            return self.a2_minimal();
        }
        debug_assert!(p < 1 << 31);
        let pm = p as i128;
        let b2 = (self.minimal.a[0] * self.minimal.a[0] + 4 * self.minimal.a[1]).rem_euclid(pm)
            as u64;
        let b4_2 = (2 * (2 * self.minimal.a[3] + self.minimal.a[0] * self.minimal.a[2]))
            .rem_euclid(pm) as u64;
        let b6 = (self.minimal.a[2] * self.minimal.a[2] + 4 * self.minimal.a[4]).rem_euclid(pm)
            as u64;
        // Completed square: (2y + a1x + a3)² = Q(x) := 4x³ + b2x² + 2b4x + b6.
        let mut qr = vec![false; p as usize];
        for x in 0..=p / 2 {
            qr[(x * x % p) as usize] = true;
        }
        let good = self.minimal.disc.clone() % BigInt::from(p) != BigInt::zero();
        let mut chi_sum: i64 = 0;
        let mut singular: i64 = 0;
        for x in 0..p {
            let t = ((4 * x + b2) % p * x + b4_2) % p;
            let q = (t * x + b6) % p;
            if q == 0 {
                // Singular iff x is also a root of Q′ = 12x² + 2b2x + 2b4.
                let dq = ((12 * x + 2 * b2 % p) % p * x + b4_2) % p;
                if dq == 0 {
                    singular += 1;
                }
            } else {
                chi_sum += if qr[q as usize] { 1 } else { -1 };
            }
        }
        if good {
            debug_assert_eq!(singular, 0);
            -chi_sum
        } else {
            // #E_ns = 1 + Σ_x (1 + χ(Q(x))) − #singular; a_p = p − #E_ns.
            p as i64 - (1 + p as i64 + chi_sum - singular)
        }
    }

    /// a_2 from the minimal model by enumerating F_2 points.
    fn a2_minimal(&self) -> i64 {
        let a = &self.minimal.a;
        let mut smooth: i64 = 0;
        for x in 0..2i128 {
            for y in 0..2i128 {
                let f = y * y + a[0] * x * y + a[2] * y - x * x * x - a[1] * x * x - a[3] * x
                    - a[4];
                if f.rem_euclid(2) != 0 {
                    continue;
                }
                let fy = (2 * y + a[0] * x + a[2]).rem_euclid(2);
                let fx = (a[0] * y - 3 * x * x - 2 * a[1] * x - a[3]).rem_euclid(2);
                if fy != 0 || fx != 0 {
                    smooth += 1;
                }
            }
        }
        let good = self.minimal.disc.clone() % BigInt::from(2) != BigInt::zero();
        if good {
            3 - (smooth + 1)
        } else {
            2 - (smooth + 1)
        }
    }

    /// Number of distinct roots of P mod an odd prime q.
    pub fn cubic_root_count(&self, q: u64) -> Result<u32> {
        if q == 2 || !numtheory::is_prime(q) {
            return Err(Error::InvalidInput(format!("{q} is not an odd prime")));
        }
        let qm = q as i128;
        let mut count = 0;
        for x in 0..qm {
            if self.eval_cubic_mod(x, qm) == 0 {
                count += 1;
            }
        }
        Ok(count)
    }

    fn eval_cubic_mod(&self, x: i128, q: i128) -> i128 {
        (((x + self.coeffs[1] as i128).rem_euclid(q) * x + self.coeffs[2] as i128)
            .rem_euclid(q)
            * x
            + self.coeffs[3] as i128)
            .rem_euclid(q)
    }

    /// t_E(M): the number of odd primes q | M at which P has an odd number
    /// of roots mod q (equivalently, the twisted Tamagawa number c_q is
    /// even).
    pub fn t_e(&self, m: u64) -> Result<u32> {
        if m == 0 {
            return Err(Error::InvalidInput("t_E needs a positive argument".into()));
        }
        let mut t = 0;
        for (q, _) in numtheory::factorize(m) {
            if q == 2 {
                continue;
            }
            if self.cubic_root_count(q)? % 2 == 1 {
                t += 1;
            }
        }
        Ok(t)
    }

    /// L-series coefficients a_1..a_T of this curve (index 0 unused).
    /// Multiplicative, built from point counts at primes with the usual
    /// recursion a_{pn} = a_p a_n − ε(p)·p·a_{n/p}, ε = 1 at good primes.
    pub fn l_coefficients(&self, t: usize) -> Vec<i64> {
        let mut spf = vec![0u32; t + 1];
        for i in 2..=t {
            if spf[i] == 0 {
                let mut j = i;
                while j <= t {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        let mut a = vec![0i64; t + 1];
        let mut good = vec![false; t + 1];
        if t >= 1 {
            a[1] = 1;
        }
        for n in 2..=t {
            let p = spf[n] as usize;
            if n == p {
                a[n] = self.ap_any(p as u64);
                good[p] = self.minimal.disc.clone() % BigInt::from(p as u64) != BigInt::zero();
                continue;
            }
            let s = n / p;
            let correction = if s % p == 0 && good[p] {
                p as i64 * a[s / p]
            } else {
                0
            };
            a[n] = a[p] * a[s] - correction;
        }
        a
    }

    /// Real period of the minimal model (doubled when E(ℝ) is
    /// disconnected, i.e. when the discriminant is positive).
    pub fn real_period(&self) -> f64 {
        let omega = component_period(self.minimal.c4, self.minimal.c6);
        if self.minimal.disc.is_positive() {
            2.0 * omega
        } else {
            omega
        }
    }
}

/// Outcome of a numeric L-value computation for a quadratic twist.
#[derive(Debug, Clone)]
pub struct LValue {
    /// Approximation of L(E^{(m)}, 1).
    pub l_value: f64,
    /// Real period of E^{(m)} in the reference normalization: the period of
    /// the model with the base minimal invariants scaled by m (component-
    /// doubled when disconnected), divided by the model's lattice scale.
    pub period: f64,
    /// The algebraic ratio L/Ω.
    pub ratio: f64,
    /// True when L is numerically indistinguishable from 0 (functional
    /// equation sign −1 or higher vanishing).
    pub vanishing: bool,
    /// Sign of the functional equation of the twisted L-series.
    pub sign: i8,
    /// Conductor of the twist used in the exponential weights.
    pub conductor: u64,
    /// Terms actually summed.
    pub terms: usize,
    /// Crude bound on the truncation tail.
    pub tail_bound: f64,
}

/// L(E^{(m)}, 1) ≈ 2 Σ_{n ≤ T} χ_m(n) a_n / n · e^{−2πn/√N′}, where χ_m is
/// the quadratic character of ℚ(√m), a_n are the coefficients of the base
/// curve, and N′ is the conductor of the twist (exact here: the base
/// conductor part coprime to disc(ℚ(√m)) times disc²).
///
/// That identity only holds when the functional equation has sign +1; when
/// the sign is −1 the central value is 0 exactly, while the raw sum is
/// meaningless. The sign is therefore detected first from the Fricke
/// relation g(1/t) = w·t²·g(t) for g(t) = Σ χ(n)aₙe^{−2πnt/√N′} — which
/// doubles as a consistency check on N′ — and a sign of −1 short-circuits
/// to `l_value = 0` with the `vanishing` flag set. The `ratio` field
/// divides by the twist's real period in the lattice normalization (see
/// [`twisted_lattice_period`]), rescaled by the model's
/// [`CurveModel::lattice_scale`].
pub fn numeric_l(curve: &CurveModel, m: i64, terms: usize) -> Result<LValue> {
    let plan = twist_plan(curve, m)?;
    if (terms as f64) < plan.sqrt_n {
        return Err(Error::Precision {
            need: plan.sqrt_n.ceil(),
            have: terms as f64,
        });
    }
    numeric_l_from(curve, m, &curve.l_coefficients(terms))
}

/// Same as [`numeric_l`], but reusing base-curve coefficients already
/// computed by [`CurveModel::l_coefficients`]; the term count is taken from
/// the slice (index 0 unused). Twists of one curve share their base a_n, so
/// callers evaluating several twists should sieve once and use this.
pub fn numeric_l_from(curve: &CurveModel, m: i64, a: &[i64]) -> Result<LValue> {
    let plan = twist_plan(curve, m)?;
    let terms = a.len().saturating_sub(1);
    if (terms as f64) < plan.sqrt_n {
        return Err(Error::Precision {
            need: plan.sqrt_n.ceil(),
            have: terms as f64,
        });
    }
    let rate = 2.0 * std::f64::consts::PI / plan.sqrt_n;

    // Functional-equation sign from g(1/t) = w·t²·g(t). The ratio must land
    // near ±1; anything else means the series is too short (or the conductor
    // heuristic failed) and is reported as a precision problem.
    let t0 = 1.25f64;
    let (mut g_hi, mut g_lo) = (0.0f64, 0.0f64);
    for n in 1..=terms {
        if a[n] == 0 {
            continue;
        }
        let chi = numtheory::kronecker(plan.disc_k, n as i64);
        if chi == 0 {
            continue;
        }
        let c = (chi * a[n]) as f64;
        g_hi += c * (-rate * t0 * n as f64).exp();
        g_lo += c * (-rate / t0 * n as f64).exp();
    }
    let fricke = g_lo / (t0 * t0 * g_hi);
    let sign: i8 = if (fricke - 1.0).abs() < 0.2 {
        1
    } else if (fricke + 1.0).abs() < 0.2 {
        -1
    } else {
        return Err(Error::Precision {
            need: (4.0 * plan.sqrt_n).ceil(),
            have: terms as f64,
        });
    };

    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for n in 1..=terms {
        if a[n] == 0 {
            continue;
        }
        let chi = numtheory::kronecker(plan.disc_k, n as i64);
        if chi == 0 {
            continue;
        }
        let term = (chi * a[n]) as f64 / n as f64 * (-rate * n as f64).exp();
        // Neumaier-compensated accumulation keeps the sum deterministic and
        // tight even with ~10^5 terms.
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    let l_value = if sign == -1 { 0.0 } else { 2.0 * (sum + comp) };
    // |a_n| ≤ n, so the dropped tail is below 2 Σ_{n>T} e^{−rate·n}.
    let tail_bound = 2.0 * (-rate * (terms as f64 + 1.0)).exp() / (1.0 - (-rate).exp());
    let first = 2.0 * (-rate).exp();
    let vanishing = sign == -1 || l_value.abs() < 1e-4 * first;

    let period = twisted_lattice_period(curve, m) / curve.lattice_scale as f64;
    Ok(LValue {
        l_value,
        period,
        ratio: l_value / period,
        vanishing,
        sign,
        conductor: plan.conductor,
        terms,
        tail_bound,
    })
}

/// Real period of the twist of `curve` by squarefree m in the lattice
/// normalization: the period of the model with invariants (c4·m², c6·m³)
/// built from the base curve's *minimal* invariants, doubled when the real
/// locus is disconnected (Δ > 0, a twist-invariant condition).
///
/// For m ≡ 1 mod 4 the scaled invariants are themselves minimal, so this is
/// the minimal real period of the twisted curve; for m ≡ 3 mod 4 they are
/// not 2-adically integral and the minimal period is half of this one. The
/// reference ℒ tables are stated in this normalization — switching to the
/// strictly minimal period would double the m ≡ 3 mod 4 entries.
fn twisted_lattice_period(curve: &CurveModel, m: i64) -> f64 {
    let m = m as i128;
    let omega = component_period(curve.minimal.c4 * m * m, curve.minimal.c6 * m * m * m);
    if curve.minimal.disc.is_positive() {
        2.0 * omega
    } else {
        omega
    }
}

/// Conductor of the quadratic twist of `curve` by squarefree m, as used by
/// `numeric_l` — handy for sizing the coefficient sieve before calling it.
pub fn twisted_conductor(curve: &CurveModel, m: i64) -> Result<u64> {
    Ok(twist_plan(curve, m)?.conductor)
}

struct TwistPlan {
    disc_k: i64,
    conductor: u64,
    sqrt_n: f64,
}

/// Character discriminant and conductor of the twist by squarefree m: the
/// base conductor keeps its part coprime to disc(ℚ(√m)), and each ramified
/// prime of the character contributes its square.
fn twist_plan(curve: &CurveModel, m: i64) -> Result<TwistPlan> {
    if m == 0 || numtheory::squarefree_part(m)? != m {
        return Err(Error::InvalidInput(format!(
            "twist {m} must be squarefree and nonzero"
        )));
    }
    let disc_k = numtheory::fundamental_discriminant(m)?;
    let n_base = curve.conductor()?;
    let mut conductor: u64 = (disc_k.unsigned_abs()).pow(2);
    for (q, e) in numtheory::factorize(n_base) {
        if disc_k % q as i64 != 0 {
            conductor = conductor
                .checked_mul(q.pow(e))
                .ok_or_else(|| Error::Unsupported("twisted conductor exceeds u64".into()))?;
        }
    }
    Ok(TwistPlan {
        disc_k,
        conductor,
        sqrt_n: (conductor as f64).sqrt(),
    })
}

/// c4, c6 of y² = x³ + c2x² + c1x + c0 (so b2 = 4c2, b4 = 2c1, b6 = 4c0).
fn invariants_of_cubic(c2: i128, c1: i128, c0: i128) -> (i128, i128) {
    let c4 = 16 * c2 * c2 - 48 * c1;
    let c6 = -64 * c2 * c2 * c2 + 288 * c2 * c1 - 864 * c0;
    (c4, c6)
}

/// Discriminant of x³ + ax² + bx + c.
fn cubic_disc(a: i128, b: i128, c: i128) -> i128 {
    18 * a * b * c - 4 * a * a * a * c + a * a * b * b - 4 * b * b * b - 27 * c * c
}

fn vp_i128(mut x: i128, p: i128) -> u32 {
    debug_assert!(x != 0);
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

fn vp_bigint(x: &BigInt, p: i128) -> u32 {
    debug_assert!(!x.is_zero());
    let p = BigInt::from(p);
    let mut x = x.clone();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        x = q;
        v += 1;
    }
}

/// Kraus' admissibility conditions: a pair (c4, c6) with c4³ − c6² =
/// 1728Δ, Δ ≠ 0, comes from an integral Weierstrass model iff
/// v₃(c6) ≠ 2 and either c6 ≡ −1 mod 4, or c4 ≡ 0 mod 16 with
/// c6 ≡ 0 or 8 mod 32.
fn kraus_admissible(c4: i128, c6: i128) -> bool {
    if c6 != 0 && vp_i128(c6, 3) == 2 {
        return false;
    }
    if c6.rem_euclid(4) == 3 {
        return true;
    }
    (c4 == 0 || vp_i128(c4, 2) >= 4) && matches!(c6.rem_euclid(32), 0 | 8)
}

/// Laska–Kraus–Connell minimalization: find the largest u with
/// (c4/u⁴, c6/u⁶, Δ/u¹²) integral and (c4/u⁴, c6/u⁶) Kraus-admissible,
/// then recover a reduced integral model from the minimal invariants.
/// The Δ condition is not implied by the other two at p ∈ {2, 3}: Kraus'
/// congruences presuppose an integral discriminant.
fn minimal_model(c4: i128, c6: i128) -> Result<MinimalModel> {
    let (disc_big, rem) =
        (BigInt::from(c4).pow(3) - BigInt::from(c6).pow(2)).div_rem(&BigInt::from(1728));
    if !rem.is_zero() {
        return Err(Error::InvalidInput(format!(
            "invariants (c4, c6) = ({c4}, {c6}) have no integral discriminant"
        )));
    }
    if disc_big.is_zero() {
        return Err(Error::InvalidInput("curve discriminant vanishes".into()));
    }
    let factor_target = if c4 != 0 { c4 } else { c6 };
    let target_u64 = u64::try_from(factor_target.unsigned_abs())
        .map_err(|_| Error::Unsupported("curve invariants too large to minimalize".into()))?;
    let mut u: i128 = 1;
    for (p, _) in numtheory::factorize(target_u64) {
        let p = p as i128;
        let e4 = if c4 == 0 { u32::MAX } else { vp_i128(c4, p) / 4 };
        let e6 = if c6 == 0 { u32::MAX } else { vp_i128(c6, p) / 6 };
        let e12 = vp_bigint(&disc_big, p) / 12;
        let mut e = e4.min(e6).min(e12);
        debug_assert!(e < u32::MAX);
        if p == 2 || p == 3 {
            while e > 0 {
                let s = p.pow(e);
                if kraus_admissible(c4 / (s * s * s * s), c6 / (s * s * s * s * s * s)) {
                    break;
                }
                e -= 1;
            }
        }
        u *= p.pow(e);
    }
    let c4m = c4 / (u * u * u * u);
    let c6m = c6 / (u * u * u * u * u * u);
    if !kraus_admissible(c4m, c6m) {
        return Err(Error::InvalidInput(format!(
            "invariants (c4, c6) = ({c4}, {c6}) admit no integral model"
        )));
    }

    // Connell's recovery: b2 ≡ −c6 mod 12 normalized into (−6, 6].
    let mut b2 = (-c6m).rem_euclid(12);
    if b2 > 6 {
        b2 -= 12;
    }
    let b4 = (b2 * b2 - c4m) / 24;
    let b6 = (-b2 * b2 * b2 + 36 * b2 * b4 - c6m) / 216;
    debug_assert_eq!(b2 * b2 - 24 * b4, c4m);
    debug_assert_eq!(-b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6, c6m);
    let a1 = b2.rem_euclid(2);
    let a2 = (b2 - a1) / 4;
    let a3 = b6.rem_euclid(2);
    let a4 = (b4 - a1 * a3) / 2;
    let a6 = (b6 - a3) / 4;
    let (disc, rem) = disc_big.div_rem(&BigInt::from(u).pow(12));
    debug_assert!(rem.is_zero());
    Ok(MinimalModel {
        c4: c4m,
        c6: c6m,
        a: [a1, a2, a3, a4, a6],
        disc,
    })
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        let (na, nb) = ((a + b) / 2.0, (a * b).sqrt());
        if (na - nb).abs() <= 1e-15 * na.abs() {
            return na;
        }
        a = na;
        b = nb;
    }
    a
}

/// Real roots (descending) of t³ + pt + q (simple roots assumed).
fn depressed_cubic_roots(p: f64, q: f64) -> Vec<f64> {
    let disc = -4.0 * p * p * p - 27.0 * q * q;
    let mut roots = if disc > 0.0 {
        // Three real roots via the trigonometric form.
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .collect::<Vec<_>>()
    } else {
        // One real root via Cardano, arranged to avoid cancellation.
        let s = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        let u = (if q <= 0.0 { -q / 2.0 + s } else { -q / 2.0 - s }).cbrt();
        vec![if u == 0.0 { 0.0 } else { u - p / (3.0 * u) }]
    };
    for r in roots.iter_mut() {
        for _ in 0..4 {
            let f = (*r * *r + p) * *r + q;
            let df = 3.0 * *r * *r + p;
            if df != 0.0 {
                *r -= f / df;
            }
        }
    }
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
    roots
}

/// Connected-component period of the curve with invariants (c4, c6): the
/// short model W² = X³ − 27c4·X − 54c6 carries dX/W = ω/3, so the period
/// is 3·2π/AGM on the root gaps when all three roots are real. With one
/// real root the AGM of the conjugate-pair gaps converges to the half
/// period, hence the extra factor 2 there — checked against y² = x³ + 1
/// (Ω = 4.20654…) and the X₁(11) model y² + y = x³ − x² (Ω = 6.34604…).
fn component_period(c4: i128, c6: i128) -> f64 {
    let p = -27.0 * c4 as f64;
    let q = -54.0 * c6 as f64;
    let roots = depressed_cubic_roots(p, q);
    let two_pi = 2.0 * std::f64::consts::PI;
    if roots.len() == 3 {
        let (e1, e2, e3) = (roots[0], roots[1], roots[2]);
        3.0 * two_pi / agm((e1 - e3).sqrt(), (e1 - e2).sqrt())
    } else {
        // t³ + pt + q = (t − e1)(t² + e1t + (p + e1²)), complex roots
        // β ± iγ with β = −e1/2; set a = |β ± iγ − e1|.
        let e1 = roots[0];
        let beta = -e1 / 2.0;
        let c = e1 * e1 + p;
        let gamma_sq = (c - beta * beta).max(0.0);
        let a = ((e1 - beta) * (e1 - beta) + gamma_sq).sqrt();
        6.0 * two_pi / agm(2.0 * a.sqrt(), (2.0 * a + 2.0 * (e1 - beta)).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve_14a() -> CurveModel {
        CurveModel::new([1, 1, -8, 16], "14a", 1, None).unwrap()
    }

    #[test]
    fn ap_examples() {
        let e = curve_14a();
        // Fourier coefficients of η(z)η(2z)η(7z)η(14z), the weight-2 form
        // of level 14: a_3 = -2, a_5 = 0, a_11 = 0, a_13 = -4.
        assert_eq!(e.ap(3).unwrap(), -2);
        assert_eq!(e.ap(5).unwrap(), 0);
        assert_eq!(e.ap(11).unwrap(), 0);
        assert_eq!(e.ap(13).unwrap(), -4);
        assert!(e.ap(7).is_err(), "bad reduction must be rejected");
        // y² = x³ − x has CM by ℤ[i]: a_p = 0 at p ≡ 3 mod 4, and
        // a_5 = −2 (eight points over F_5).
        let cm = CurveModel::new([1, 0, -1, 0], "x3-x", 1, None).unwrap();
        assert_eq!(cm.ap(3).unwrap(), 0);
        assert_eq!(cm.ap(7).unwrap(), 0);
        assert_eq!(cm.ap(5).unwrap(), -2);
    }

    #[test]
    fn hasse_sweep() {
        let curves = [
            [1i64, 1, -8, 16],
            [1, -4, 0, 16],
            [1, -3, -40, 208],
            [1, 1, -48, 64],
            [1, 5, 88, 592],
        ];
        for c in curves {
            let e = CurveModel::new(c, "sweep", 1, None).unwrap();
            for p in numtheory::primes_upto(200) {
                if p == 2 || e.cubic_discriminant() % p as i128 == 0 {
                    continue;
                }
                e.ap(p).unwrap();
            }
        }
    }

    #[test]
    fn minimal_models() {
        // y² = x³ − 4x² + 16 minimalizes to [0, -1, 1, 0, 0] with Δ = −11.
        let e11 = CurveModel::new([1, -4, 0, 16], "11a", 1, None).unwrap();
        assert_eq!(e11.minimal_invariants(), (16, -152));
        assert_eq!(e11.minimal.a, [0, -1, 1, 0, 0]);
        assert_eq!(e11.minimal_discriminant(), BigInt::from(-11));
        assert_eq!(e11.conductor().unwrap(), 11);

        let e14 = curve_14a();
        assert_eq!(e14.minimal_invariants(), (25, -253));
        assert_eq!(e14.minimal_discriminant(), BigInt::from(-28));
        assert_eq!(e14.conductor().unwrap(), 14);

        let e58 = CurveModel::new([1, 5, 88, 592], "58b", 1, None).unwrap();
        assert_eq!(e58.minimal_discriminant(), BigInt::from(-29696));
        assert_eq!(e58.conductor().unwrap(), 58);

        // y² = x³ + 4x² + 64x + 256 scales down once (u = 2) but not twice:
        // u = 4 satisfies Kraus' congruences yet leaves Δ/u¹² non-integral,
        // so stopping at the congruences alone fabricates a phantom model.
        let e20 = CurveModel::new([1, 4, 64, 256], "20a", 1, Some(20)).unwrap();
        assert_eq!(e20.minimal_invariants(), (-176, -2368));
        assert_eq!(e20.minimal_discriminant(), BigInt::from(-6400));

        // y² = x³ + 1 is already minimal with Δ = −432; its reduction at 2
        // is additive, so the conductor must be supplied.
        let e36 = CurveModel::new([1, 0, 0, 1], "36a", 1, None).unwrap();
        assert_eq!(e36.minimal_invariants(), (0, -864));
        assert_eq!(e36.minimal_discriminant(), BigInt::from(-432));
        assert!(e36.conductor().is_err());
        let e36 = CurveModel::new([1, 0, 0, 1], "36a", 1, Some(36)).unwrap();
        assert_eq!(e36.conductor().unwrap(), 36);
    }

    #[test]
    fn bad_prime_traces() {
        // Level-14 eta product η(z)η(2z)η(7z)η(14z): a_2 = −1, a_7 = 1.
        let e14 = curve_14a();
        assert_eq!(e14.ap_any(2), -1);
        assert_eq!(e14.ap_any(7), 1);
        // η(z)²η(11z)²: a_11 = 1; good a_2 = −2 on the minimal model.
        let e11 = CurveModel::new([1, -4, 0, 16], "11a", 1, None).unwrap();
        assert_eq!(e11.ap_any(11), 1);
        assert_eq!(e11.ap_any(2), -2);
    }

    #[test]
    fn l_coefficients_match_eta_product() {
        // η(z)η(2z)η(7z)η(14z) = q − q² − 2q³ + q⁴ + 2q⁶ + q⁷ − q⁸ + …
        let e14 = curve_14a();
        let a = e14.l_coefficients(8);
        assert_eq!(&a[1..], &[1, -1, -2, 1, 0, 2, 1, -1]);
    }

    #[test]
    fn l_coefficient_multiplicativity() {
        let e = CurveModel::new([1, -3, -40, 208], "26b", 1, None).unwrap();
        let a = e.l_coefficients(400);
        for m in 2..20usize {
            for n in 2..20usize {
                if m * n <= 400 && num_integer::gcd(m, n) == 1 {
                    assert_eq!(a[m * n], a[m] * a[n], "m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn cubic_root_counts() {
        let e14 = curve_14a();
        assert_eq!(e14.cubic_root_count(3).unwrap(), 1);
        // P = (x + 4)(x² − 3x + 4) has an integral root, so the count is
        // always odd (1 or 3).
        for q in [3u64, 5, 11, 13, 17, 19, 23] {
            let c = e14.cubic_root_count(q).unwrap();
            assert!(c == 1 || c == 3, "q={q}: {c}");
        }
        let split = CurveModel::new([1, -6, 11, -6], "split", 1, None).unwrap();
        assert_eq!(split.cubic_root_count(7).unwrap(), 3);
    }

    #[test]
    fn tamagawa_parity_sum() {
        let e14 = curve_14a();
        // For this curve every odd prime sees an odd root count, so t_E
        // counts the odd prime divisors.
        assert_eq!(e14.t_e(1).unwrap(), 0);
        assert_eq!(e14.t_e(15).unwrap(), 2);
        assert_eq!(e14.t_e(165).unwrap(), 3);
        let e11 = CurveModel::new([1, -4, 0, 16], "11a", 1, None).unwrap();
        let t65 = (e11.cubic_root_count(5).unwrap() % 2) + (e11.cubic_root_count(13).unwrap() % 2);
        assert_eq!(e11.t_e(65).unwrap(), t65);
    }

    #[test]
    fn lemniscatic_period() {
        // y² = x³ − x has real period Γ(1/4)²/√(2π) (both components).
        let e = CurveModel::new([1, 0, -1, 0], "cm", 1, None).unwrap();
        assert_eq!(e.minimal_invariants(), (48, 0));
        let gamma_quarter = 3.6256099082219083_f64;
        let expected = gamma_quarter * gamma_quarter / (2.0 * std::f64::consts::PI).sqrt();
        assert!(
            (e.real_period() - expected).abs() < 1e-9,
            "period {} vs {}",
            e.real_period(),
            expected
        );
    }

    #[test]
    fn one_root_period_matches_quadrature() {
        // y² = x³ + 1: one real root; the loop integral over the real locus
        // runs over both square-root branches, so the period is
        // 3·2∫ dX/√(X³ + 46656) beyond the root. (Sanity anchor: the result
        // must equal ∫ dx/√(x³+1) from −1, which is 4.20654… by standard
        // tables.)
        let e = CurveModel::new([1, 0, 0, 1], "j0", 1, None).unwrap();
        // Substituting X = −36 + t² turns the integral into
        // ∫_0^∞ 2 dt/√(t⁴ − 108t² + 3888).
        let h = |t: f64| {
            let s = t * t;
            (s * s - 108.0 * s + 3888.0).sqrt()
        };
        let (step, t_max) = (5e-4, 2000.0);
        let mut acc = 0.0;
        let mut t = 0.0;
        while t < t_max {
            // Simpson's rule on [t, t + step].
            acc += step / 6.0 * (2.0 / h(t) + 8.0 / h(t + step / 2.0) + 2.0 / h(t + step));
            t += step;
        }
        acc += 2.0 / t_max; // tail of ∫ 2/t² dt
        let quadrature = 3.0 * 2.0 * acc;
        assert!((quadrature - 4.20654631).abs() < 1e-4, "quadrature {quadrature}");
        assert!(
            (e.real_period() - quadrature).abs() < 1e-5 * quadrature,
            "AGM {} vs quadrature {}",
            e.real_period(),
            quadrature
        );
    }

    #[test]
    fn twisted_traces_follow_the_character() {
        let e = curve_14a();
        for m in [-3i64, 5, -7, 13] {
            let disc = numtheory::fundamental_discriminant(m).unwrap();
            let tw = e.twist(m).unwrap();
            for p in [3u64, 5, 11, 13, 17, 19, 23] {
                if disc % p as i64 == 0 || e.cubic_discriminant() % p as i128 == 0 {
                    continue;
                }
                assert_eq!(
                    tw.ap(p).unwrap(),
                    numtheory::kronecker(disc, p as i64) * e.ap(p).unwrap(),
                    "m={m} p={p}"
                );
            }
        }
    }

    #[test]
    fn numeric_l_values() {
        // Rank 0: L(1) of the level-11 curve is ≈ 0.2538418; on this model
        // (minimal Δ = −11, period 6.34604…) the algebraic ratio L/Ω is
        // 1/25, matching the strong BSD prediction Ш·c₁₁/|T|² = 1·1/5².
        let e11 = CurveModel::new([1, -4, 0, 16], "11a", 1, None).unwrap();
        let lv = numeric_l(&e11, 1, 2000).unwrap();
        assert_eq!(lv.conductor, 11);
        assert_eq!(lv.sign, 1);
        assert!(!lv.vanishing);
        assert!((lv.l_value - 0.2538418).abs() < 1e-4, "L = {}", lv.l_value);
        assert!((lv.period - 6.34604652).abs() < 1e-6, "period = {}", lv.period);
        assert!(
            (lv.ratio / 0.04 - 1.0).abs() < 0.01,
            "ratio = {} (expected 1/25)",
            lv.ratio
        );

        // Rank 1: the level-37 curve has sign −1, so the central value is 0.
        let e37 = CurveModel::new([1, 0, -16, 16], "37a", 1, None).unwrap();
        assert_eq!(e37.minimal_discriminant(), BigInt::from(37));
        let lv = numeric_l(&e37, 1, 2000).unwrap();
        assert_eq!(lv.conductor, 37);
        assert_eq!(lv.sign, -1);
        assert!(lv.vanishing, "L = {}", lv.l_value);
        assert_eq!(lv.l_value, 0.0);

        // Coefficient reuse across twists matches the direct path.
        let coeffs = e11.l_coefficients(2000);
        for m in [1i64, -7, 5] {
            let direct = numeric_l(&e11, m, 2000).unwrap();
            let shared = numeric_l_from(&e11, m, &coeffs).unwrap();
            assert_eq!(direct.l_value, shared.l_value);
            assert_eq!(direct.sign, shared.sign);
        }

        // Precision guard: too few terms is an error.
        assert!(matches!(
            numeric_l(&e11, -7, 3),
            Err(Error::Precision { .. })
        ));
    }

    #[test]
    fn lattice_scale_rescales_the_reported_ratio() {
        // The level-11 model above is 5-isogenous to the curve with minimal
        // period 1.26920930… that normalizes the bundled L-value tables;
        // declaring lattice scale 5 reports ratios on that curve's scale:
        // L/Ω jumps from 1/25 to 1/5.
        let scaled = CurveModel::new([1, -4, 0, 16], "11a", 1, None)
            .unwrap()
            .with_lattice_scale(5)
            .unwrap();
        assert_eq!(scaled.lattice_scale(), 5);
        let lv = numeric_l(&scaled, 1, 2000).unwrap();
        assert!((lv.period - 1.26920930).abs() < 1e-6, "period = {}", lv.period);
        assert!((lv.ratio / 0.2 - 1.0).abs() < 0.01, "ratio = {}", lv.ratio);

        // Twists inherit the scale, and the JSON spec path applies it.
        assert_eq!(scaled.twist(5).unwrap().lattice_scale(), 5);
        let spec: CurveSpec = serde_json::from_str(
            r#"{"P": [1, -4, 0, 16], "label": "11a", "lattice_scale": 5}"#,
        )
        .unwrap();
        assert_eq!(CurveModel::from_spec(&spec).unwrap().lattice_scale(), 5);
        assert!(scaled.clone().with_lattice_scale(0).is_err());
    }
}
