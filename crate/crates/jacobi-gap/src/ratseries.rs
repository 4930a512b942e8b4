//! Truncated power series over exact rationals.
//!
//! Precision tracking follows the usual computer-algebra convention: a series
//! carries `prec`, meaning its coefficients are trusted for `t^0 .. t^{prec-1}`
//! and everything from `t^prec` on is unknown (`O(t^prec)`). The rules that
//! matter downstream:
//!
//! * `prec(a ± b) = min(prec_a, prec_b)`
//! * `prec(a * b) = min(prec_a + val(b), prec_b + val(a))`
//! * `prec(a') = prec(a) - 1`, `prec(∫a) = prec(a) + 1`
//!
//! where `val` is the index of the first nonzero coefficient (or `prec` for a
//! series that is zero as far as it is known). The valuation-aware product
//! rule is essential: the recursion in `series_solver` multiplies by factors
//! with positive valuation and would otherwise lose exactly the coefficients
//! it is about to solve for.
//!
//! [`QuadPoly`] and [`UnknownSeries`] extend the coefficient ring by one
//! indeterminate `X` of degree at most two, enough to carry the single
//! unknown coefficient through the sigma-form residual.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::params::rational_to_f64;

/// Precision value standing in for "exact polynomial, no truncation".
pub const INF_PREC: usize = usize::MAX / 4;

fn rat_zero() -> BigRational {
    BigRational::zero()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalSeries {
    coeffs: Vec<BigRational>,
    prec: usize,
}

impl RationalSeries {
    /// Build from explicit low-order coefficients; anything past the list is
    /// zero up to `prec`.
    pub fn from_coeffs(mut coeffs: Vec<BigRational>, prec: usize) -> Self {
        coeffs.truncate(prec.min(coeffs.len()));
        RationalSeries { coeffs, prec }
    }

    pub fn zero(prec: usize) -> Self {
        RationalSeries {
            coeffs: Vec::new(),
            prec,
        }
    }

    pub fn constant(c: BigRational, prec: usize) -> Self {
        RationalSeries {
            coeffs: vec![c],
            prec,
        }
    }

    /// `c * t^k + O(t^prec)`.
    pub fn monomial(c: BigRational, k: usize, prec: usize) -> Self {
        if k >= prec {
            return Self::zero(prec);
        }
        let mut coeffs = vec![rat_zero(); k + 1];
        coeffs[k] = c;
        RationalSeries { coeffs, prec }
    }

    /// Exact polynomial, infinite precision.
    pub fn poly(coeffs: Vec<BigRational>) -> Self {
        RationalSeries {
            coeffs,
            prec: INF_PREC,
        }
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    /// Index of the first nonzero coefficient; `prec` if none is known.
    pub fn val(&self) -> usize {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .unwrap_or(self.prec)
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        debug_assert!(k < self.prec, "coefficient {k} beyond precision {}", self.prec);
        self.coeffs.get(k).cloned().unwrap_or_else(rat_zero)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn truncate(&self, prec: usize) -> Self {
        let prec = prec.min(self.prec);
        Self::from_coeffs(self.coeffs[..self.coeffs.len().min(prec)].to_vec(), prec)
    }

    pub fn neg(&self) -> Self {
        RationalSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            prec: self.prec,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec.min(other.prec);
        let n = self.coeffs.len().max(other.coeffs.len()).min(prec);
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.coeffs.get(i);
            let b = other.coeffs.get(i);
            coeffs.push(match (a, b) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => rat_zero(),
            });
        }
        RationalSeries { coeffs, prec }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        RationalSeries {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            prec: self.prec,
        }
    }

    pub fn add_constant(&self, c: &BigRational) -> Self {
        let mut out = self.clone();
        if out.prec == 0 {
            return out;
        }
        if out.coeffs.is_empty() {
            out.coeffs.push(rat_zero());
        }
        out.coeffs[0] += c;
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_cap(other, INF_PREC)
    }

    /// Product with the valuation-aware precision rule, additionally capped
    /// at `cap` to skip work on coefficients nobody will read.
    pub fn mul_cap(&self, other: &Self, cap: usize) -> Self {
        let prec = (self.prec.saturating_add(other.val()))
            .min(other.prec.saturating_add(self.val()))
            .min(cap);
        let n = (self.coeffs.len() + other.coeffs.len()).saturating_sub(1);
        let mut coeffs = vec![rat_zero(); n.min(prec)];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= prec {
                break;
            }
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= prec {
                    break;
                }
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] += a * b;
            }
        }
        RationalSeries { coeffs, prec }
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
            .collect();
        RationalSeries {
            coeffs,
            prec: self.prec.saturating_sub(1),
        }
    }

    /// Antiderivative with zero constant term.
    pub fn integrate(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(rat_zero());
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / BigRational::from_integer(BigInt::from(i + 1)));
        }
        RationalSeries {
            coeffs,
            prec: self.prec.saturating_add(1),
        }
    }

    /// Exact division by `(t - 1)`; same precision, since the divisor is a
    /// unit in the series ring. `q_0 = -a_0`, `q_k = q_{k-1} - a_k`.
    pub fn div_by_t_minus_1(&self) -> Self {
        let n = self.coeffs.len().min(self.prec);
        let mut coeffs: Vec<BigRational> = Vec::with_capacity(n);
        for k in 0..n {
            let ak = &self.coeffs[k];
            let q = if k == 0 {
                -ak
            } else {
                &coeffs[k - 1] - ak
            };
            coeffs.push(q);
        }
        RationalSeries {
            coeffs,
            prec: self.prec,
        }
    }

    /// Divide by `t^m`. The dropped coefficients must be exactly zero.
    pub fn shift_down(&self, m: usize) -> Result<Self> {
        if self.coeffs.iter().take(m).any(|c| !c.is_zero()) {
            return Err(Error::domain(format!(
                "series not divisible by t^{m}: nonzero low-order coefficient"
            )));
        }
        let coeffs = self.coeffs.iter().skip(m).cloned().collect();
        Ok(RationalSeries {
            coeffs,
            prec: self.prec.saturating_sub(m),
        })
    }

    /// Series exponential; requires a zero constant term.
    /// `e_0 = 1`, `e_k = (1/k) Σ_{j=1}^{k} j a_j e_{k-j}`.
    pub fn exp(&self) -> Result<Self> {
        if self.coeffs.first().map_or(false, |c| !c.is_zero()) {
            return Err(Error::domain("series exp needs zero constant term"));
        }
        let prec = self.prec;
        let n = prec.min(INF_PREC);
        let mut e: Vec<BigRational> = Vec::with_capacity(n);
        e.push(BigRational::one());
        for k in 1..n {
            let mut acc = rat_zero();
            for j in 1..=k.min(self.coeffs.len().saturating_sub(1)) {
                let aj = &self.coeffs[j];
                if aj.is_zero() {
                    continue;
                }
                acc += aj * BigRational::from_integer(BigInt::from(j)) * &e[k - j];
            }
            e.push(acc / BigRational::from_integer(BigInt::from(k)));
        }
        Ok(RationalSeries { coeffs: e, prec })
    }

    /// Exact evaluation by Horner over the known coefficients.
    pub fn eval_rational(&self, t: &BigRational) -> BigRational {
        let mut acc = rat_zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    /// Coefficient images in `f64`, safe for operands far beyond `f64` range.
    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational_to_f64).collect()
    }
}

/// Polynomial of degree at most two in the unknown `X`, `c[0] + c[1] X + c[2] X²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadPoly {
    pub c: [BigRational; 3],
}

impl QuadPoly {
    pub fn zero() -> Self {
        QuadPoly {
            c: [rat_zero(), rat_zero(), rat_zero()],
        }
    }

    pub fn constant(c: BigRational) -> Self {
        QuadPoly {
            c: [c, rat_zero(), rat_zero()],
        }
    }

    /// The bare unknown `X`.
    pub fn unknown() -> Self {
        QuadPoly {
            c: [rat_zero(), BigRational::one(), rat_zero()],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|c| c.is_zero())
    }

    pub fn is_constant(&self) -> bool {
        self.c[1].is_zero() && self.c[2].is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        QuadPoly {
            c: [
                &self.c[0] + &other.c[0],
                &self.c[1] + &other.c[1],
                &self.c[2] + &other.c[2],
            ],
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for i in 0..3 {
            if !other.c[i].is_zero() {
                self.c[i] += &other.c[i];
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        QuadPoly {
            c: [
                &self.c[0] - &other.c[0],
                &self.c[1] - &other.c[1],
                &self.c[2] - &other.c[2],
            ],
        }
    }

    pub fn neg(&self) -> Self {
        QuadPoly {
            c: [-&self.c[0], -&self.c[1], -&self.c[2]],
        }
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        QuadPoly {
            c: [&self.c[0] * s, &self.c[1] * s, &self.c[2] * s],
        }
    }

    /// Product, which must stay within degree two. Degree three can only
    /// arise from a misuse of the truncation cap in the residual computation,
    /// so it panics rather than returning an error.
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_constant() {
            if self.c[0].is_zero() {
                return QuadPoly::zero();
            }
            return other.scale(&self.c[0]);
        }
        if other.is_constant() {
            if other.c[0].is_zero() {
                return QuadPoly::zero();
            }
            return self.scale(&other.c[0]);
        }
        let mut full = [
            rat_zero(),
            rat_zero(),
            rat_zero(),
            rat_zero(),
            rat_zero(),
        ];
        for i in 0..3 {
            if self.c[i].is_zero() {
                continue;
            }
            for j in 0..3 {
                if other.c[j].is_zero() {
                    continue;
                }
                full[i + j] += &self.c[i] * &other.c[j];
            }
        }
        assert!(
            full[3].is_zero() && full[4].is_zero(),
            "unknown exceeded quadratic degree; residual truncation cap is wrong"
        );
        let [c0, c1, c2, _, _] = full;
        QuadPoly { c: [c0, c1, c2] }
    }

    /// Substitute a rational value for `X`.
    pub fn eval(&self, x: &BigRational) -> BigRational {
        &self.c[0] + (&self.c[1] + &self.c[2] * x) * x
    }
}

/// Series whose coefficients live in `Q[X]/(X³)`, used for one step of the
/// coefficient recursion where a single unknown coefficient is in flight.
#[derive(Debug, Clone)]
pub struct UnknownSeries {
    coeffs: Vec<QuadPoly>,
    prec: usize,
}

impl UnknownSeries {
    pub fn from_parts(coeffs: Vec<QuadPoly>, prec: usize) -> Self {
        let mut coeffs = coeffs;
        coeffs.truncate(prec.min(coeffs.len()));
        UnknownSeries { coeffs, prec }
    }

    pub fn from_rational(s: &RationalSeries) -> Self {
        UnknownSeries {
            coeffs: s.coeffs().iter().cloned().map(QuadPoly::constant).collect(),
            prec: s.prec(),
        }
    }

    /// Exact polynomial with rational coefficients, infinite precision.
    pub fn poly(coeffs: Vec<BigRational>) -> Self {
        UnknownSeries {
            coeffs: coeffs.into_iter().map(QuadPoly::constant).collect(),
            prec: INF_PREC,
        }
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn val(&self) -> usize {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .unwrap_or(self.prec)
    }

    pub fn coeff(&self, k: usize) -> QuadPoly {
        debug_assert!(k < self.prec);
        self.coeffs.get(k).cloned().unwrap_or_else(QuadPoly::zero)
    }

    pub fn neg(&self) -> Self {
        UnknownSeries {
            coeffs: self.coeffs.iter().map(QuadPoly::neg).collect(),
            prec: self.prec,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec.min(other.prec);
        let n = self.coeffs.len().max(other.coeffs.len()).min(prec);
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.coeffs.get(i);
            let b = other.coeffs.get(i);
            coeffs.push(match (a, b) {
                (Some(a), Some(b)) => a.add(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => QuadPoly::zero(),
            });
        }
        UnknownSeries { coeffs, prec }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        UnknownSeries {
            coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect(),
            prec: self.prec,
        }
    }

    pub fn add_constant(&self, c: &BigRational) -> Self {
        let mut out = self.clone();
        if out.prec == 0 {
            return out;
        }
        if out.coeffs.is_empty() {
            out.coeffs.push(QuadPoly::zero());
        }
        out.coeffs[0] = out.coeffs[0].add(&QuadPoly::constant(c.clone()));
        out
    }

    pub fn mul_cap(&self, other: &Self, cap: usize) -> Self {
        let prec = (self.prec.saturating_add(other.val()))
            .min(other.prec.saturating_add(self.val()))
            .min(cap);
        let n = (self.coeffs.len() + other.coeffs.len()).saturating_sub(1);
        let mut coeffs = vec![QuadPoly::zero(); n.min(prec)];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= prec {
                break;
            }
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= prec {
                    break;
                }
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j].add_assign(&a.mul(b));
            }
        }
        UnknownSeries { coeffs, prec }
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.scale(&BigRational::from_integer(BigInt::from(i))))
            .collect();
        UnknownSeries {
            coeffs,
            prec: self.prec.saturating_sub(1),
        }
    }

    /// Collapse to a rational series; every coefficient must be constant in `X`.
    pub fn into_rational(self) -> Result<RationalSeries> {
        let prec = self.prec;
        let mut out = Vec::with_capacity(self.coeffs.len());
        for (i, c) in self.coeffs.into_iter().enumerate() {
            if !c.is_constant() {
                return Err(Error::domain(format!(
                    "coefficient of t^{i} still depends on the unknown"
                )));
            }
            let [c0, _, _] = c.c;
            out.push(c0);
        }
        Ok(RationalSeries::from_coeffs(out, prec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn series(cs: &[(i64, i64)], prec: usize) -> RationalSeries {
        RationalSeries::from_coeffs(cs.iter().map(|&(p, q)| rat(p, q)).collect(), prec)
    }

    #[test]
    fn product_of_units() {
        let a = series(&[(1, 1), (1, 1)], 6); // 1 + t
        let b = series(&[(1, 1), (-1, 1)], 6); // 1 - t
        let p = a.mul(&b);
        assert_eq!(p.prec(), 6);
        assert_eq!(p.coeff(0), rat(1, 1));
        assert_eq!(p.coeff(1), rat(0, 1));
        assert_eq!(p.coeff(2), rat(-1, 1));
        assert_eq!(p.coeff(3), rat(0, 1));
    }

    #[test]
    fn valuation_aware_product_precision() {
        // a = t^2 * (unit), prec 5; b = unit, prec 4.
        let a = series(&[(0, 1), (0, 1), (3, 1), (1, 1)], 5);
        let b = series(&[(2, 1), (1, 1)], 4);
        assert_eq!(a.val(), 2);
        let p = a.mul(&b);
        // min(prec_a + val_b, prec_b + val_a) = min(5+0, 4+2) = 5
        assert_eq!(p.prec(), 5);
        // top retained coefficients of (3t^2+t^3)(2+t)
        assert_eq!(p.coeff(3), rat(3, 1) * rat(1, 1) + rat(1, 1) * rat(2, 1));
        assert_eq!(p.coeff(4), rat(1, 1));
    }

    #[test]
    fn zero_series_val_equals_prec() {
        let z = RationalSeries::zero(7);
        assert_eq!(z.val(), 7);
        let a = series(&[(1, 2)], 7);
        // unit times all-zero: min(prec_a + val_z, prec_z + val_a) = min(14, 7)
        assert_eq!(a.mul(&z).prec(), 7);
    }

    #[test]
    fn derivative_and_integral_round_trip() {
        let a = series(&[(5, 1), (1, 2), (7, 3), (-4, 5)], 4);
        let d = a.derivative();
        assert_eq!(d.prec(), 3);
        let i = d.integrate();
        assert_eq!(i.prec(), 4);
        let diff = i.sub(&a);
        assert_eq!(diff.val(), 0); // integration forgets the constant term
        assert_eq!(i.coeff(0), rat(0, 1));
        assert_eq!(diff.add_constant(&rat(5, 1)).val(), 4);
    }

    #[test]
    fn divide_by_t_minus_1_is_exact() {
        let a = series(&[(3, 1), (-2, 7), (5, 3), (0, 1), (11, 13)], 5);
        let q = a.div_by_t_minus_1();
        assert_eq!(q.prec(), 5);
        let back = q.mul(&RationalSeries::poly(vec![rat(-1, 1), rat(1, 1)]));
        for k in 0..5 {
            assert_eq!(back.coeff(k), a.coeff(k), "coefficient {k}");
        }
    }

    #[test]
    fn exp_of_linear_term() {
        let a = RationalSeries::monomial(rat(2, 1), 1, 7);
        let e = a.exp().unwrap();
        let mut fact = rat(1, 1);
        for k in 0..7 {
            if k > 0 {
                fact = fact * rat(k as i64, 1);
            }
            // coefficient of t^k in exp(2t) is 2^k / k!
            assert_eq!(e.coeff(k) * fact.clone(), rat(1 << k, 1), "k = {k}");
        }
    }

    #[test]
    fn exp_is_multiplicative() {
        let a = series(&[(0, 1), (1, 3), (-2, 5)], 6);
        let b = series(&[(0, 1), (-1, 2), (1, 7), (3, 4)], 6);
        let lhs = a.add(&b).exp().unwrap();
        let rhs = a.exp().unwrap().mul_cap(&b.exp().unwrap(), 6);
        for k in 0..6 {
            assert_eq!(lhs.coeff(k), rhs.coeff(k), "k = {k}");
        }
    }

    #[test]
    fn exp_rejects_nonzero_constant() {
        assert!(series(&[(1, 1)], 3).exp().is_err());
    }

    #[test]
    fn shift_down_checks_low_coefficients() {
        let a = series(&[(0, 1), (0, 1), (9, 2)], 6);
        let s = a.shift_down(2).unwrap();
        assert_eq!(s.prec(), 4);
        assert_eq!(s.coeff(0), rat(9, 2));
        assert!(series(&[(1, 1)], 3).shift_down(1).is_err());
    }

    #[test]
    fn quad_poly_products() {
        let x = QuadPoly::unknown();
        let lin = x.add(&QuadPoly::constant(rat(3, 1))); // X + 3
        let sq = lin.mul(&lin); // X^2 + 6X + 9
        assert_eq!(sq.c, [rat(9, 1), rat(6, 1), rat(1, 1)]);
        let c = QuadPoly::constant(rat(-2, 1));
        assert_eq!(sq.mul(&c).c, [rat(-18, 1), rat(-12, 1), rat(-2, 1)]);
        assert_eq!(sq.eval(&rat(1, 2)), rat(49, 4));
    }

    #[test]
    #[should_panic(expected = "quadratic degree")]
    fn quad_poly_cubic_panics() {
        let x = QuadPoly::unknown();
        let sq = x.mul(&x);
        let _ = sq.mul(&x);
    }

    #[test]
    fn unknown_series_round_trip() {
        let a = series(&[(1, 1), (2, 1), (3, 1)], 5);
        let u = UnknownSeries::from_rational(&a);
        let back = u.mul_cap(&UnknownSeries::poly(vec![rat(1, 1)]), INF_PREC);
        let r = back.into_rational().unwrap();
        assert_eq!(r, a.truncate(5));
    }

    #[test]
    fn unknown_series_tracks_x() {
        // (c + X t)^2 = c^2 + 2cX t + X^2 t^2
        let u = UnknownSeries::from_parts(
            vec![QuadPoly::constant(rat(5, 1)), QuadPoly::unknown()],
            4,
        );
        let sq = u.mul_cap(&u, 4);
        assert_eq!(sq.coeff(0).c, [rat(25, 1), rat(0, 1), rat(0, 1)]);
        assert_eq!(sq.coeff(1).c, [rat(0, 1), rat(10, 1), rat(0, 1)]);
        assert_eq!(sq.coeff(2).c, [rat(0, 1), rat(0, 1), rat(1, 1)]);
        assert!(sq.into_rational().is_err());
    }
}
