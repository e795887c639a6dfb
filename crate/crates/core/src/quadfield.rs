//! Exact arithmetic in an imaginary quadratic field k = Q(sqrt(Delta)).
//!
//! The integral basis is fixed as {1, w} with w = (Delta + sqrt(Delta))/2 for
//! every discriminant, so tr(w) = Delta and N(w) = Delta(Delta-1)/4. All
//! operations are pure and exact: integers are `BigInt`, field elements are
//! pairs of `BigRational` coordinates over that basis.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// A place of Q: a finite prime or the archimedean place.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Place {
    Finite(u64),
    Infinity,
}

/// Splitting behavior of a rational prime in O_k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitType {
    Split,
    Inert,
    Ramified,
}

/// The field Q(sqrt(Delta)) with its class number and unit data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldContext {
    /// Negative fundamental discriminant.
    pub delta: i64,
    /// Sorted primes dividing Delta.
    pub delta_primes: Vec<u64>,
    /// Number of ramified primes, written delta in formulas.
    pub ramified_count: u32,
    /// Class number, by exhaustive reduced-form enumeration.
    pub class_number: u64,
    /// Order of the unit group: 6 for Delta = -3, 4 for Delta = -4, else 2.
    pub unit_count: u64,
}

/// An element a + b*w of k, coordinates over the fixed basis {1, w}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KElt {
    pub a: BigRational,
    pub b: BigRational,
}

impl KElt {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        KElt { a, b }
    }

    pub fn from_ints(a: i64, b: i64) -> Self {
        KElt {
            a: BigRational::from_integer(BigInt::from(a)),
            b: BigRational::from_integer(BigInt::from(b)),
        }
    }

    pub fn from_rational(a: BigRational) -> Self {
        KElt {
            a,
            b: BigRational::zero(),
        }
    }

    pub fn zero() -> Self {
        KElt::from_ints(0, 0)
    }

    pub fn one() -> Self {
        KElt::from_ints(1, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// True when both coordinates are integers, i.e. the element lies in O_k.
    pub fn is_integral(&self) -> bool {
        self.a.is_integer() && self.b.is_integer()
    }

    /// True when the element is fixed by conjugation, i.e. lies in Q.
    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn add(&self, other: &KElt) -> KElt {
        KElt::new(&self.a + &other.a, &self.b + &other.b)
    }

    pub fn sub(&self, other: &KElt) -> KElt {
        KElt::new(&self.a - &other.a, &self.b - &other.b)
    }

    pub fn neg(&self) -> KElt {
        KElt::new(-self.a.clone(), -self.b.clone())
    }

    pub fn scale(&self, c: &BigRational) -> KElt {
        KElt::new(&self.a * c, &self.b * c)
    }
}

impl FieldContext {
    /// tr(w) = Delta.
    pub fn omega_trace(&self) -> BigInt {
        BigInt::from(self.delta)
    }

    /// N(w) = Delta(Delta-1)/4, an integer for any discriminant.
    pub fn omega_norm(&self) -> BigInt {
        let d = BigInt::from(self.delta);
        (&d * (&d - BigInt::one())) / BigInt::from(4)
    }

    /// conj(a + b*w) = (a + b*Delta) - b*w.
    pub fn conj(&self, x: &KElt) -> KElt {
        let tr = BigRational::from_integer(self.omega_trace());
        KElt::new(&x.a + &x.b * tr, -x.b.clone())
    }

    /// Product in k, using w^2 = Delta*w - Delta(Delta-1)/4.
    pub fn mul(&self, x: &KElt, y: &KElt) -> KElt {
        let tr = BigRational::from_integer(self.omega_trace());
        let nm = BigRational::from_integer(self.omega_norm());
        let bb = &x.b * &y.b;
        KElt::new(
            &x.a * &y.a - &bb * nm,
            &x.a * &y.b + &x.b * &y.a + bb * tr,
        )
    }

    /// x * conj(x) as a rational (integer when x is integral).
    pub fn norm_rational(&self, x: &KElt) -> BigRational {
        let p = self.mul(x, &self.conj(x));
        debug_assert!(p.b.is_zero());
        p.a
    }

    /// Norm of an integral element.
    pub fn norm(&self, x: &KElt) -> BigInt {
        let n = self.norm_rational(x);
        debug_assert!(n.is_integer());
        n.to_integer()
    }

    /// x + conj(x) as a rational.
    pub fn trace_rational(&self, x: &KElt) -> BigRational {
        let s = x.add(&self.conj(x));
        debug_assert!(s.b.is_zero());
        s.a
    }

    pub fn inverse(&self, x: &KElt) -> Result<KElt> {
        if x.is_zero() {
            return Err(Error::ZeroArgument);
        }
        let n = self.norm_rational(x);
        Ok(self.conj(x).scale(&n.recip()))
    }

    pub fn div(&self, x: &KElt, y: &KElt) -> Result<KElt> {
        Ok(self.mul(x, &self.inverse(y)?))
    }

    /// Splitting of a rational prime, by the Kronecker symbol (Delta | p).
    pub fn splitting(&self, p: u64) -> SplitType {
        match kronecker(self.delta, p) {
            0 => SplitType::Ramified,
            1 => SplitType::Split,
            _ => SplitType::Inert,
        }
    }

    /// The quadratic character chi_v(a) = (a, Delta)_v.
    pub fn hilbert_chi(&self, a: &BigRational, v: Place) -> Result<i32> {
        if a.is_zero() {
            return Err(Error::ZeroArgument);
        }
        Ok(hilbert_symbol(a, &BigRational::from_integer(BigInt::from(self.delta)), v))
    }

    /// chi_p of a nonzero integer, convenience wrapper.
    pub fn chi_int(&self, a: &BigInt, p: u64) -> Result<i32> {
        self.hilbert_chi(&BigRational::from_integer(a.clone()), Place::Finite(p))
    }

    /// Number of geometrically irreducible components of the moduli space in
    /// dimension n, following the component-count dichotomy: h for odd n,
    /// 2^(1-delta) h for even n, and 2^(2-delta) h in the exceptional 2-adic
    /// split case with ord_2(Delta) = 2 (except 1 for Delta = -4).
    pub fn moduli_component_count(&self, n: u32, exceptional_2adic: bool) -> Result<u64> {
        if n < 2 {
            return Err(Error::UnsupportedCase(format!("n = {n} < 2")));
        }
        if n % 2 == 1 {
            return Ok(self.class_number);
        }
        let halvings = (self.ramified_count - 1) as u64;
        if !exceptional_2adic {
            let div = 1u64 << halvings;
            if self.class_number % div != 0 {
                return Err(Error::UnsupportedCase(format!(
                    "2^{halvings} does not divide h = {}",
                    self.class_number
                )));
            }
            return Ok(self.class_number / div);
        }
        // Exceptional case requires ord_2(Delta) = 2.
        if self.delta % 4 != 0 || (self.delta / 4) % 2 == 0 {
            return Err(Error::UnsupportedCase(
                "exceptional case needs ord_2(Delta) = 2".into(),
            ));
        }
        if self.delta == -4 {
            return Ok(1);
        }
        let num = self.class_number * 2;
        let div = 1u64 << halvings;
        if num % div != 0 {
            return Err(Error::UnsupportedCase(format!(
                "2^{halvings} does not divide 2h = {num}"
            )));
        }
        Ok(num / div)
    }
}

/// Builds the field context for a negative fundamental discriminant.
pub fn make_field(delta: i64) -> Result<FieldContext> {
    if delta >= 0 {
        return Err(Error::NonNegative(delta));
    }
    if !is_fundamental(delta) {
        return Err(Error::NonFundamental(delta));
    }
    let delta_primes = prime_divisors(delta.unsigned_abs());
    let class_number = reduced_form_count(delta);
    let unit_count = match delta {
        -3 => 6,
        -4 => 4,
        _ => 2,
    };
    Ok(FieldContext {
        delta,
        ramified_count: delta_primes.len() as u32,
        delta_primes,
        class_number,
        unit_count,
    })
}

/// Fundamental discriminant test: Delta ≡ 1 mod 4 and squarefree, or
/// Delta = 4m with m squarefree and m ≡ 2, 3 mod 4.
pub fn is_fundamental(delta: i64) -> bool {
    if delta >= 0 {
        return false;
    }
    let m4 = delta.rem_euclid(4);
    if m4 == 1 {
        is_squarefree(delta.unsigned_abs())
    } else if m4 == 0 {
        let m = delta / 4;
        let mm4 = m.rem_euclid(4);
        (mm4 == 2 || mm4 == 3) && is_squarefree(m.unsigned_abs())
    } else {
        false
    }
}

fn is_squarefree(mut n: u64) -> bool {
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return false;
            }
        }
        d += 1;
    }
    true
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Class number by exhaustive enumeration of reduced primitive positive
/// definite forms (a, b, c) with b^2 - 4ac = Delta, -a < b <= a <= c, and
/// b >= 0 when a = c.
pub fn reduced_form_count(delta: i64) -> u64 {
    debug_assert!(delta < 0);
    let mut count = 0u64;
    let mut a = 1i64;
    while 3 * a * a <= -delta {
        for b in (-a + 1)..=a {
            let num = b * b - delta;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a {
                continue;
            }
            if a == c && b < 0 {
                continue;
            }
            if gcd3(a, b.abs(), c) == 1 {
                count += 1;
            }
        }
        a += 1;
    }
    count
}

fn gcd3(a: i64, b: i64, c: i64) -> i64 {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    gcd(gcd(a, b), c)
}

/// Kronecker symbol (a | n) for prime n (including n = 2) as used for
/// splitting; returns 0, +1 or -1.
pub fn kronecker(a: i64, p: u64) -> i32 {
    if p == 2 {
        if a % 2 == 0 {
            return 0;
        }
        let r = a.rem_euclid(8);
        if r == 1 || r == 7 {
            1
        } else {
            -1
        }
    } else {
        legendre(a, p)
    }
}

/// Legendre symbol (a | p) for odd prime p, by Euler's criterion.
pub fn legendre(a: i64, p: u64) -> i32 {
    let pa = a.rem_euclid(p as i64) as u64;
    if pa == 0 {
        return 0;
    }
    let e = (p - 1) / 2;
    let r = pow_mod(pa % p, e, p);
    if r == 1 {
        1
    } else {
        -1
    }
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u128;
    let mut bb = (b % m) as u128;
    let m = m as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % m;
        }
        bb = bb * bb % m;
        e >>= 1;
    }
    b = acc as u64;
    b
}

/// p-adic valuation of a nonzero rational.
pub fn val_p(a: &BigRational, p: u64) -> i64 {
    assert!(!a.is_zero());
    let p = BigInt::from(p);
    let mut v = 0i64;
    let mut num = a.numer().clone();
    let mut den = a.denom().clone();
    while (&num % &p).is_zero() {
        num /= &p;
        v += 1;
    }
    while (&den % &p).is_zero() {
        den /= &p;
        v -= 1;
    }
    v
}

/// The p-free unit part of a nonzero rational: a / p^val_p(a).
pub fn unit_part(a: &BigRational, p: u64) -> BigRational {
    let v = val_p(a, p);
    let p = BigRational::from_integer(BigInt::from(p));
    let mut u = a.clone();
    let mut vv = v;
    while vv > 0 {
        u /= &p;
        vv -= 1;
    }
    while vv < 0 {
        u *= &p;
        vv += 1;
    }
    u
}

/// Quadratic Hilbert symbol (a, b)_v over Q.
pub fn hilbert_symbol(a: &BigRational, b: &BigRational, v: Place) -> i32 {
    assert!(!a.is_zero() && !b.is_zero());
    match v {
        Place::Infinity => {
            if a.is_negative() && b.is_negative() {
                -1
            } else {
                1
            }
        }
        Place::Finite(2) => hilbert_2(a, b),
        Place::Finite(p) => hilbert_odd(a, b, p),
    }
}

fn legendre_rational_unit(u: &BigRational, p: u64) -> i32 {
    // (x/y | p) = (x | p)(y | p) for p-units x, y.
    let p_big = BigInt::from(p);
    let nr = (u.numer() % &p_big).to_string().parse::<i64>().unwrap();
    let dr = (u.denom() % &p_big).to_string().parse::<i64>().unwrap();
    legendre(nr, p) * legendre(dr, p)
}

fn hilbert_odd(a: &BigRational, b: &BigRational, p: u64) -> i32 {
    let alpha = val_p(a, p);
    let beta = val_p(b, p);
    let u = unit_part(a, p);
    let w = unit_part(b, p);
    let mut s = 1;
    if alpha % 2 != 0 && beta % 2 != 0 {
        s *= legendre(-1, p);
    }
    if beta % 2 != 0 {
        s *= legendre_rational_unit(&u, p);
    }
    if alpha % 2 != 0 {
        s *= legendre_rational_unit(&w, p);
    }
    s
}

fn odd_residue_mod8(u: &BigRational) -> u64 {
    // u = x/y with x, y odd; u mod 8 = x * y^{-1} mod 8, and y ≡ y^{-1} mod 8.
    fn mod8(n: &BigInt) -> u64 {
        let r = n % BigInt::from(8);
        let r = if r < BigInt::zero() { r + BigInt::from(8) } else { r };
        r.to_string().parse::<u64>().unwrap()
    }
    (mod8(u.numer()) * mod8(u.denom())) % 8
}

fn hilbert_2(a: &BigRational, b: &BigRational) -> i32 {
    let alpha = val_p(a, 2);
    let beta = val_p(b, 2);
    let u = odd_residue_mod8(&unit_part(a, 2));
    let w = odd_residue_mod8(&unit_part(b, 2));
    let eps = |x: u64| ((x - 1) / 2) % 2; // (x-1)/2 mod 2
    let om = |x: u64| ((x * x - 1) / 8) % 2; // (x^2-1)/8 mod 2
    let mut e = eps(u) * eps(w);
    e += (alpha.rem_euclid(2) as u64) * om(w);
    e += (beta.rem_euclid(2) as u64) * om(u);
    if e % 2 == 0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn field_constants() {
        let f = make_field(-4).unwrap();
        assert_eq!((f.ramified_count, f.class_number, f.unit_count), (1, 1, 4));
        let f = make_field(-3).unwrap();
        assert_eq!((f.ramified_count, f.class_number, f.unit_count), (1, 1, 6));
        let f = make_field(-15).unwrap();
        assert_eq!((f.ramified_count, f.class_number, f.unit_count), (2, 2, 2));
        assert_eq!(f.delta_primes, vec![3, 5]);
        let f = make_field(-23).unwrap();
        assert_eq!((f.ramified_count, f.class_number, f.unit_count), (1, 3, 2));
    }

    #[test]
    fn fundamental_checks() {
        assert_eq!(make_field(4).unwrap_err(), Error::NonNegative(4));
        assert_eq!(make_field(-5).unwrap_err(), Error::NonFundamental(-5));
        assert_eq!(make_field(-12).unwrap_err(), Error::NonFundamental(-12));
        assert!(make_field(-8).is_ok());
        assert!(make_field(-7).is_ok());
    }

    #[test]
    fn splitting_examples() {
        let f = make_field(-4).unwrap();
        assert_eq!(f.splitting(5), SplitType::Split);
        assert_eq!(f.splitting(3), SplitType::Inert);
        assert_eq!(f.splitting(2), SplitType::Ramified);
        let f = make_field(-3).unwrap();
        assert_eq!(f.splitting(5), SplitType::Inert);
        assert_eq!(f.splitting(2), SplitType::Inert);
        let f = make_field(-15).unwrap();
        assert_eq!(f.splitting(2), SplitType::Split);
    }

    #[test]
    fn hilbert_examples() {
        let f = make_field(-4).unwrap();
        assert_eq!(f.hilbert_chi(&rat(1), Place::Finite(3)).unwrap(), 1);
        assert_eq!(f.hilbert_chi(&rat(3), Place::Finite(3)).unwrap(), -1);
        assert_eq!(f.hilbert_chi(&rat(-1), Place::Infinity).unwrap(), -1);
        assert_eq!(
            f.hilbert_chi(&rat(0), Place::Finite(3)).unwrap_err(),
            Error::ZeroArgument
        );
    }

    #[test]
    fn hilbert_product_formula() {
        // Product over all places of 2*a*Delta plus infinity is +1.
        for delta in [-3i64, -4, -8, -15, -23, -20] {
            let f = make_field(delta).unwrap();
            for a_num in [1i64, -1, 2, 3, -6, 10, 15, -35, 9, 49] {
                for a_den in [1i64, 2, 3, 5] {
                    let a = BigRational::new(BigInt::from(a_num), BigInt::from(a_den));
                    let mut prod = f.hilbert_chi(&a, Place::Infinity).unwrap();
                    let mut primes = vec![2u64];
                    primes.extend(prime_divisors(
                        (a.numer() * a.denom()).magnitude().to_string().parse::<u64>().unwrap(),
                    ));
                    primes.extend(f.delta_primes.iter().copied());
                    primes.sort_unstable();
                    primes.dedup();
                    for p in primes {
                        prod *= f.hilbert_chi(&a, Place::Finite(p)).unwrap();
                    }
                    assert_eq!(prod, 1, "delta={delta} a={a_num}/{a_den}");
                }
            }
        }
    }

    #[test]
    fn inert_iff_chi_minus_one() {
        for delta in [-4i64, -3, -15, -23] {
            let f = make_field(delta).unwrap();
            for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 29] {
                if f.delta_primes.contains(&p) {
                    continue;
                }
                let chi = f.hilbert_chi(&rat(p as i64), Place::Finite(p)).unwrap();
                let inert = f.splitting(p) == SplitType::Inert;
                assert_eq!(inert, chi == -1, "delta={delta} p={p}");
            }
        }
    }

    #[test]
    fn norm_examples() {
        let f = make_field(-4).unwrap();
        // 2 + i: in the fixed basis w = -2 + i, so 2 + i = 4 + w.
        let x = KElt::from_ints(4, 1);
        assert_eq!(f.norm(&x), BigInt::from(5));
        // 2 + w = i has norm 1.
        assert_eq!(f.norm(&KElt::from_ints(2, 1)), BigInt::one());
        assert_eq!(f.norm(&KElt::zero()), BigInt::zero());
        // The stated oracle: norm(w) = w * conj(w) = Delta(Delta-1)/4.
        let f3 = make_field(-3).unwrap();
        assert_eq!(f3.norm(&KElt::from_ints(0, 1)), BigInt::from(3));
    }

    #[test]
    fn norm_multiplicative() {
        let f = make_field(-23).unwrap();
        for (a1, b1, a2, b2) in [(1i64, 2i64, 3i64, -1i64), (5, -4, 2, 7), (0, 1, 1, 1)] {
            let x = KElt::from_ints(a1, b1);
            let y = KElt::from_ints(a2, b2);
            assert_eq!(f.norm(&f.mul(&x, &y)), f.norm(&x) * f.norm(&y));
        }
    }

    #[test]
    fn conj_involution_and_trace() {
        let f = make_field(-15).unwrap();
        let x = KElt::from_ints(3, -7);
        assert_eq!(f.conj(&f.conj(&x)), x);
        assert!(f.trace_rational(&x).is_integer());
    }

    #[test]
    fn inverse_works() {
        let f = make_field(-4).unwrap();
        let x = KElt::from_ints(3, 2);
        let inv = f.inverse(&x).unwrap();
        assert_eq!(f.mul(&x, &inv), KElt::one());
        assert_eq!(f.inverse(&KElt::zero()).unwrap_err(), Error::ZeroArgument);
    }

    #[test]
    fn moduli_components() {
        let f = make_field(-23).unwrap();
        assert_eq!(f.moduli_component_count(3, false).unwrap(), 3);
        let f = make_field(-15).unwrap();
        assert_eq!(f.moduli_component_count(2, false).unwrap(), 1);
        let f = make_field(-4).unwrap();
        assert_eq!(f.moduli_component_count(2, true).unwrap(), 1);
        assert!(f.moduli_component_count(1, false).is_err());
        // Exceptional flag requires ord_2(Delta) = 2.
        let f = make_field(-3).unwrap();
        assert!(f.moduli_component_count(2, true).is_err());
    }
}
