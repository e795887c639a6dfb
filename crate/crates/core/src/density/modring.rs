//! Arithmetic in O_k / p^k O_k for an odd inert prime p, with elements
//! stored as coordinate pairs (a, b) = a + b*w modulo p^k.

/// Ring data for O_k mod p^k: w^2 = tr*w - nm with tr = Delta, nm = Delta(Delta-1)/4.
#[derive(Debug, Clone, Copy)]
pub struct ModRing {
    pub p: u64,
    pub k: u32,
    /// p^k
    pub q: u64,
    /// trace of w, reduced mod q
    pub tr: u64,
    /// norm of w, reduced mod q
    pub nm: u64,
}

/// An element of O/p^k, coordinates in [0, q).
pub type Elt = (u64, u64);

impl ModRing {
    pub fn new(delta: i64, p: u64, k: u32) -> ModRing {
        let q = p.pow(k);
        let rem = |x: i64| -> u64 { x.rem_euclid(q as i64) as u64 };
        let tr = rem(delta);
        // Delta(Delta-1)/4 is an exact integer; reduce it, not its factors.
        let nm_exact: i64 = delta
            .checked_mul(delta - 1)
            .expect("norm of w fits in i64")
            / 4;
        ModRing {
            p,
            k,
            q,
            tr,
            nm: rem(nm_exact),
        }
    }

    #[inline]
    pub fn radd(&self, x: u64, y: u64) -> u64 {
        let s = x + y;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn rsub(&self, x: u64, y: u64) -> u64 {
        if x >= y {
            x - y
        } else {
            x + self.q - y
        }
    }

    #[inline]
    pub fn rmul(&self, x: u64, y: u64) -> u64 {
        ((x as u128 * y as u128) % self.q as u128) as u64
    }

    #[inline]
    pub fn add(&self, x: Elt, y: Elt) -> Elt {
        (self.radd(x.0, y.0), self.radd(x.1, y.1))
    }

    #[inline]
    pub fn sub(&self, x: Elt, y: Elt) -> Elt {
        (self.rsub(x.0, y.0), self.rsub(x.1, y.1))
    }

    #[inline]
    pub fn neg(&self, x: Elt) -> Elt {
        (
            if x.0 == 0 { 0 } else { self.q - x.0 },
            if x.1 == 0 { 0 } else { self.q - x.1 },
        )
    }

    /// (a1 + b1 w)(a2 + b2 w) with w^2 = tr*w - nm.
    #[inline]
    pub fn mul(&self, x: Elt, y: Elt) -> Elt {
        let bb = self.rmul(x.1, y.1);
        let a = self.rsub(self.rmul(x.0, y.0), self.rmul(bb, self.nm));
        let b = self.radd(
            self.radd(self.rmul(x.0, y.1), self.rmul(x.1, y.0)),
            self.rmul(bb, self.tr),
        );
        (a, b)
    }

    /// conj(a + b w) = (a + b tr) - b w.
    #[inline]
    pub fn conj(&self, x: Elt) -> Elt {
        (
            self.radd(x.0, self.rmul(x.1, self.tr)),
            if x.1 == 0 { 0 } else { self.q - x.1 },
        )
    }

    /// x * conj(x), a scalar in Z/p^k.
    #[inline]
    pub fn norm(&self, x: Elt) -> u64 {
        // a^2 + ab*tr + b^2*nm
        let t = self.radd(self.rmul(x.0, x.0), self.rmul(self.rmul(x.0, x.1), self.tr));
        self.radd(t, self.rmul(self.rmul(x.1, x.1), self.nm))
    }

    /// x + conj(x), a scalar in Z/p^k.
    #[inline]
    pub fn trace(&self, x: Elt) -> u64 {
        self.radd(self.radd(x.0, x.0), self.rmul(x.1, self.tr))
    }

    /// p-valuation of an element; the valuation of 0 is k.
    #[inline]
    pub fn val(&self, x: Elt) -> u32 {
        if x == (0, 0) {
            return self.k;
        }
        let mut v = 0;
        let (mut a, mut b) = x;
        while v < self.k && a % self.p == 0 && b % self.p == 0 {
            a /= self.p;
            b /= self.p;
            v += 1;
        }
        v
    }

    pub fn is_unit(&self, x: Elt) -> bool {
        self.val(x) == 0
    }

    /// Inverse of a unit: conj(x) / N(x).
    pub fn inv(&self, x: Elt) -> Elt {
        debug_assert!(self.is_unit(x));
        let n = self.norm(x);
        let ninv = inv_mod(n, self.q);
        let c = self.conj(x);
        (self.rmul(c.0, ninv), self.rmul(c.1, ninv))
    }

    /// Exact division by p^e on both coordinates (requires divisibility).
    pub fn div_pow(&self, x: Elt, e: u32) -> Elt {
        let d = self.p.pow(e);
        debug_assert!(x.0 % d == 0 && x.1 % d == 0);
        (x.0 / d, x.1 / d)
    }

    /// Reduce a (possibly negative) integer pair into the ring.
    pub fn from_i64(&self, a: i64, b: i64) -> Elt {
        (
            a.rem_euclid(self.q as i64) as u64,
            b.rem_euclid(self.q as i64) as u64,
        )
    }
}

/// Inverse of a unit modulo m by extended Euclid.
pub fn inv_mod(a: u64, m: u64) -> u64 {
    let (mut t, mut newt) = (0i128, 1i128);
    let (mut r, mut newr) = (m as i128, (a % m) as i128);
    while newr != 0 {
        let q = r / newr;
        (t, newt) = (newt, t - q * newt);
        (r, newr) = (newr, r - q * newr);
    }
    debug_assert_eq!(r, 1, "not a unit");
    t.rem_euclid(m as i128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_ops() {
        // Delta = -4: w = -2 + i, tr = -4, nm = 5.
        let r = ModRing::new(-4, 3, 2);
        assert_eq!(r.q, 9);
        let i_elt = r.from_i64(2, 1); // 2 + w = i
        assert_eq!(r.norm(i_elt), 1);
        let sq = r.mul(i_elt, i_elt); // i^2 = -1
        assert_eq!(sq, r.from_i64(-1, 0));
        let x = r.from_i64(4, 1); // 2 + i
        assert_eq!(r.norm(x), 5);
        assert_eq!(r.mul(x, r.conj(x)), (5, 0));
        assert_eq!(r.trace(x), 4); // trace of 2+i is 4
    }

    #[test]
    fn units_and_valuations() {
        let r = ModRing::new(-4, 3, 3);
        assert_eq!(r.val((0, 0)), 3);
        assert_eq!(r.val((9, 18)), 2);
        assert_eq!(r.val((3, 1)), 0);
        let x = (5u64, 7u64);
        assert!(r.is_unit(x));
        let xi = r.inv(x);
        assert_eq!(r.mul(x, xi), (1, 0));
    }
}
