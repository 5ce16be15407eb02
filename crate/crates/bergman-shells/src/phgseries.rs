//! Finite polyhomogeneous series `Σ c_{i,j} (log t)ʲ / tⁱ` with exact
//! rational exponents `i ≥ 0` and integer log powers `j ≥ 0`.
//!
//! These series carry the weight corrections: the tail of the model weight,
//! the correction series `κ` supplied by the user, and the expansions of the
//! peak location. Exponents are exact rationals so that terms merge exactly;
//! coefficients are plain `f64` (they are O(1) in every use here).
//!
//! A series carries a truncation order `N`: terms with exponent > N are
//! dropped and the series is understood modulo `o(t^{−N})` up to log factors.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{Signed, Zero};

use crate::{Error, Result};

/// Exact rational exponent of `1/t`.
pub type Expo = Rational64;

/// Convenience constructor for exponents.
pub fn expo(num: i64, den: i64) -> Expo {
    Rational64::new(num, den)
}

/// One term `coeff · (log t)^logpow / t^expo`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhgTerm {
    pub expo: Expo,
    pub logpow: u32,
    pub coeff: f64,
}

/// Canonical finite series: unique `(expo, logpow)` keys, sorted, no zero
/// coefficients stored.
#[derive(Clone, Debug, PartialEq)]
pub struct PhgSeries {
    terms: BTreeMap<(Expo, u32), f64>,
    order: Expo,
}

/// Default truncation order, matching the weight's own cap on exponents.
pub const DEFAULT_ORDER: i64 = 6;

impl PhgSeries {
    pub fn zero(order: Expo) -> Self {
        PhgSeries { terms: BTreeMap::new(), order }
    }

    pub fn from_terms<I: IntoIterator<Item = PhgTerm>>(order: Expo, terms: I) -> Result<Self> {
        let mut s = PhgSeries::zero(order);
        for t in terms {
            if t.expo.is_negative() {
                return Err(Error::InvalidSeries(format!(
                    "negative exponent {} not allowed",
                    t.expo
                )));
            }
            if t.expo > order {
                continue;
            }
            let slot = s.terms.entry((t.expo, t.logpow)).or_insert(0.0);
            *slot += t.coeff;
            if *slot == 0.0 {
                s.terms.remove(&(t.expo, t.logpow));
            }
        }
        Ok(s)
    }

    /// Single-term series; panics on a negative exponent (programmer error).
    pub fn monomial(coeff: f64, e: Expo, logpow: u32, order: Expo) -> Self {
        Self::from_terms(order, [PhgTerm { expo: e, logpow, coeff }]).expect("exponent >= 0")
    }

    pub fn order(&self) -> Expo {
        self.order
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = PhgTerm> + '_ {
        self.terms.iter().map(|(&(e, j), &c)| PhgTerm { expo: e, logpow: j, coeff: c })
    }

    pub fn coeff(&self, e: Expo, logpow: u32) -> f64 {
        self.terms.get(&(e, logpow)).copied().unwrap_or(0.0)
    }

    pub fn min_expo(&self) -> Option<Expo> {
        self.terms.keys().next().map(|&(e, _)| e)
    }

    pub fn max_expo(&self) -> Option<Expo> {
        self.terms.keys().next_back().map(|&(e, _)| e)
    }

    fn insert(&mut self, e: Expo, j: u32, c: f64) {
        if c == 0.0 || e > self.order {
            return;
        }
        let slot = self.terms.entry((e, j)).or_insert(0.0);
        *slot += c;
        if *slot == 0.0 {
            self.terms.remove(&(e, j));
        }
    }

    /// Coefficient-wise sum. Both operands should share a truncation order;
    /// the result uses the smaller one.
    pub fn add(&self, other: &Self) -> Self {
        let mut out = PhgSeries::zero(self.order.min(other.order));
        for t in self.terms().chain(other.terms()) {
            out.insert(t.expo, t.logpow, t.coeff);
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = PhgSeries::zero(self.order);
        for t in self.terms() {
            out.insert(t.expo, t.logpow, c * t.coeff);
        }
        out
    }

    /// Distributive product truncated at `order`: exponents add, log powers
    /// add.
    pub fn mul(&self, other: &Self, order: Expo) -> Self {
        let mut out = PhgSeries::zero(order);
        for a in self.terms() {
            if a.expo > order {
                continue;
            }
            for b in other.terms() {
                let e = a.expo + b.expo;
                if e > order {
                    break; // terms() is sorted by expo
                }
                out.insert(e, a.logpow + b.logpow, a.coeff * b.coeff);
            }
        }
        out
    }

    fn require_positive_min_expo(&self, what: &str) -> Result<()> {
        if let Some(m) = self.min_expo() {
            if !m.is_positive() {
                return Err(Error::InvalidSeries(format!(
                    "{what} needs every exponent > 0, found term at t^0"
                )));
            }
        }
        Ok(())
    }

    /// Mercator series `log(1 + s) = Σ (−1)^{m+1} sᵐ/m` truncated at `order`.
    /// Requires min exponent > 0 so the composition is well defined.
    pub fn log1p(&self, order: Expo) -> Result<Self> {
        self.require_positive_min_expo("log1p")?;
        let mut out = PhgSeries::zero(order);
        let mut power = self.clone();
        let mut m = 1u32;
        while !power.is_empty() {
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            for t in power.terms() {
                out.insert(t.expo, t.logpow, sign * t.coeff / f64::from(m));
            }
            power = power.mul(self, order);
            m += 1;
        }
        Ok(out)
    }

    /// Exponential `Σ sᵐ/m!` (including the constant 1) truncated at `order`.
    pub fn exp(&self, order: Expo) -> Result<Self> {
        self.require_positive_min_expo("exp")?;
        let mut out = PhgSeries::monomial(1.0, Expo::zero(), 0, order);
        let mut power = self.clone();
        let mut inv_fact = 1.0f64;
        let mut m = 1u32;
        while !power.is_empty() {
            inv_fact /= f64::from(m);
            for t in power.terms() {
                out.insert(t.expo, t.logpow, inv_fact * t.coeff);
            }
            power = power.mul(self, order);
            m += 1;
        }
        Ok(out)
    }

    /// Rewrites a series in the shifted variable `σ = t + c` as a series in
    /// `t`, truncated at `order`:
    ///
    /// `1/σⁱ = t^{−i} Σₘ C(−i, m) (c/t)ᵐ` and
    /// `log σ = log t + log(1 + c/t)`.
    pub fn shift_substitute(&self, c: f64, order: Expo) -> Self {
        if c == 0.0 {
            let mut out = PhgSeries::zero(order);
            for t in self.terms() {
                out.insert(t.expo, t.logpow, t.coeff);
            }
            return out;
        }
        // log(1 + c/t) as a pure power series in 1/t
        let mut log_shift = PhgSeries::zero(order);
        {
            let mut pow_c = c;
            let mut m = 1i64;
            while Expo::from_integer(m) <= order {
                let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                log_shift.insert(Expo::from_integer(m), 0, sign * pow_c / m as f64);
                pow_c *= c;
                m += 1;
            }
        }
        // powers of log_shift, built lazily up to the largest log power seen
        let max_logpow = self.terms().map(|t| t.logpow).max().unwrap_or(0);
        let mut shift_pows: Vec<PhgSeries> =
            vec![PhgSeries::monomial(1.0, Expo::zero(), 0, order)];
        for q in 1..=max_logpow as usize {
            let next = shift_pows[q - 1].mul(&log_shift, order);
            shift_pows.push(next);
        }

        let mut out = PhgSeries::zero(order);
        for term in self.terms() {
            // binomial expansion of (1 + c/t)^{−i} with rational i
            let i_f = rat_to_f64(term.expo);
            let mut binom = PhgSeries::zero(order);
            let mut coeff = 1.0f64;
            let mut m = 0i64;
            while term.expo + Expo::from_integer(m) <= order {
                binom.insert(term.expo + Expo::from_integer(m), 0, coeff);
                coeff *= (-i_f - m as f64) * c / (m as f64 + 1.0);
                m += 1;
            }
            // (log σ)^j = Σ_q C(j, q) (log t)^{j−q} log(1 + c/t)^q
            let j = term.logpow;
            let mut choose = 1.0f64;
            for q in 0..=j {
                if q > 0 {
                    choose *= f64::from(j - q + 1) / f64::from(q);
                }
                for b in binom.mul(&shift_pows[q as usize], order).terms() {
                    out.insert(b.expo, b.logpow + (j - q), term.coeff * choose * b.coeff);
                }
            }
        }
        out
    }

    /// Term-wise `d/dt`:
    /// `c (log t)ʲ t^{−i} ↦ c·j (log t)^{j−1} t^{−i−1} − c·i (log t)ʲ t^{−i−1}`.
    ///
    /// The result is valid modulo `o(t^{−N−1})`, so its order is bumped by 1.
    pub fn derivative(&self) -> Self {
        let one = Expo::from_integer(1);
        let mut out = PhgSeries::zero(self.order + one);
        for t in self.terms() {
            if t.logpow > 0 {
                out.insert(t.expo + one, t.logpow - 1, t.coeff * f64::from(t.logpow));
            }
            if !t.expo.is_zero() {
                out.insert(t.expo + one, t.logpow, -t.coeff * rat_to_f64(t.expo));
            }
        }
        out
    }

    /// Evaluates `Σ c_{i,j} (log t)ʲ t^{−i}` with compensated summation.
    /// Requires `t > 1` (the monotone error bounds below rely on `log t > 0`;
    /// the whole regime of interest is `t ≥ k^{1/3} ≫ 1`).
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t <= 1.0 {
            return Err(Error::Domain(format!("series evaluation needs t > 1, got {t}")));
        }
        let ln_t = t.ln();
        let mut acc = 0.0f64;
        let mut comp = 0.0f64;
        for term in self.terms() {
            let x = term.coeff * ln_t.powi(term.logpow as i32) * (-rat_to_f64(term.expo) * ln_t).exp();
            let s = acc + x;
            comp += if acc.abs() >= x.abs() { (acc - s) + x } else { (x - s) + acc };
            acc = s;
        }
        Ok(acc + comp)
    }

    /// Canonical text form: `order N/D` header, then one `coeff num/den j`
    /// line per term in sorted order. Floats carry 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = format!("order {}/{}\n", self.order.numer(), self.order.denom());
        for t in self.terms() {
            out.push_str(&format!(
                "{:.16e} {}/{} {}\n",
                t.coeff,
                t.expo.numer(),
                t.expo.denom(),
                t.logpow
            ));
        }
        out
    }
}

fn rat_to_f64(r: Expo) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Parses an exponent written as `num/den` or as a bare integer.
pub fn parse_expo(s: &str) -> Result<Expo> {
    let bad = |m: &str| Error::InvalidSeries(format!("bad exponent '{s}': {m}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: i64 = n.trim().parse().map_err(|_| bad("numerator"))?;
    let den: i64 = d.trim().parse().map_err(|_| bad("denominator"))?;
    if den == 0 {
        return Err(bad("zero denominator"));
    }
    Ok(Rational64::new(num, den))
}

impl fmt::Display for PhgSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for PhgSeries {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidSeries("empty series text".into()))?;
        let order = match header.trim().strip_prefix("order") {
            Some(rest) => parse_expo(rest.trim())?,
            None => return Err(Error::InvalidSeries(format!("missing order header: '{header}'"))),
        };
        let mut terms = Vec::new();
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::InvalidSeries(format!(
                    "term line must be 'coeff num/den j': '{line}'"
                )));
            }
            let coeff: f64 = fields[0]
                .parse()
                .map_err(|_| Error::InvalidSeries(format!("bad coefficient '{}'", fields[0])))?;
            let e = parse_expo(fields[1])?;
            let logpow: u32 = fields[2]
                .parse()
                .map_err(|_| Error::InvalidSeries(format!("bad log power '{}'", fields[2])))?;
            terms.push(PhgTerm { expo: e, logpow, coeff });
        }
        PhgSeries::from_terms(order, terms)
    }
}
