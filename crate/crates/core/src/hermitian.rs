//! Hermitian matrices over O_k: determinants, signatures, local invariants,
//! Diff sets, Jordan reduction at odd inert primes and the nondegeneracy
//! classification.
//!
//! Conventions: the form is conjugate-linear in the second argument, so a
//! Gram matrix satisfies T[j][i] = conj(T[i][j]) and h(x, y) for coordinate
//! vectors is sum_{i,j} x_i T_{ij} conj(y_j).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::quadfield::{val_p, FieldContext, KElt, Place, SplitType};

/// An n x n conjugate-symmetric matrix over k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermMatrix {
    pub n: usize,
    pub entries: Vec<Vec<KElt>>,
}

/// Global invariants of a hermitian space: signature, finite local signs
/// and determinant class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceInvariants {
    pub n: usize,
    /// (r, s) with r + s = n; inv_infinity = (-1)^s.
    pub sig: (u32, u32),
    /// Signs at the finitely many primes where they were computed; absent
    /// means +1.
    pub inv: BTreeMap<u64, i32>,
    pub det_class: BigRational,
}

/// Diff sets of a nonsingular T.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffReport {
    /// Finite places where chi_p(det T) = -inv_p(V).
    pub diff_v: Vec<u64>,
    /// Inert primes where ord_p(det T) is odd.
    pub diff0: Vec<u64>,
}

/// Jordan exponents of T over O_{k,p} at an odd inert prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalJordan {
    pub p: u64,
    /// Non-decreasing exponents (a_1, ..., a_n) with sum = ord_p det T.
    pub exponents: Vec<u64>,
}

/// Outcome of the nondegeneracy classification at an odd inert prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NondegeneracyReport {
    pub nondeg: bool,
    /// Present exactly when the Jordan pattern is (0,...,0,a,b), 0 <= a < b.
    pub ab: Option<(u64, u64)>,
    /// Dimension of the radical of T mod p.
    pub r0: u32,
    /// floor((r0 - 1)/2); -1 means the predicted cycle is empty.
    pub predicted_dim: i64,
}

/// Counts of relevant hermitian spaces of a given dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelevantSpaceCount {
    pub count: u64,
    pub strict_sim_count: u64,
}

impl HermMatrix {
    /// Validates conjugate symmetry (and hence rational diagonal).
    pub fn new(ctx: &FieldContext, entries: Vec<Vec<KElt>>) -> Result<Self> {
        let n = entries.len();
        for row in &entries {
            if row.len() != n {
                return Err(Error::SchemaError("matrix is not square".into()));
            }
        }
        for i in 0..n {
            for j in 0..n {
                if entries[j][i] != ctx.conj(&entries[i][j]) {
                    return Err(Error::SymmetryError(format!("entries ({i},{j})/({j},{i})")));
                }
            }
        }
        Ok(HermMatrix { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![vec![KElt::zero(); n]; n];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = KElt::one();
        }
        HermMatrix { n, entries }
    }

    pub fn diag_rational(values: &[BigRational]) -> Self {
        let n = values.len();
        let mut entries = vec![vec![KElt::zero(); n]; n];
        for i in 0..n {
            entries[i][i] = KElt::from_rational(values[i].clone());
        }
        HermMatrix { n, entries }
    }

    pub fn diag_ints(values: &[i64]) -> Self {
        let vals: Vec<BigRational> = values
            .iter()
            .map(|&v| BigRational::from_integer(BigInt::from(v)))
            .collect();
        HermMatrix::diag_rational(&vals)
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().flatten().all(KElt::is_integral)
    }

    /// h(x, y) for coordinate vectors in k^n.
    pub fn form(&self, ctx: &FieldContext, x: &[KElt], y: &[KElt]) -> KElt {
        let mut acc = KElt::zero();
        for i in 0..self.n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.n {
                if y[j].is_zero() || self.entries[i][j].is_zero() {
                    continue;
                }
                let t = ctx.mul(&x[i], &ctx.mul(&self.entries[i][j], &ctx.conj(&y[j])));
                acc = acc.add(&t);
            }
        }
        acc
    }

    /// Exact determinant by fraction-free (Bareiss) elimination in k.
    pub fn det(&self, ctx: &FieldContext) -> KElt {
        let n = self.n;
        if n == 0 {
            return KElt::one();
        }
        let mut m = self.entries.clone();
        let mut sign = false;
        let mut prev = KElt::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                let Some(swap) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                    return KElt::zero();
                };
                m.swap(k, swap);
                sign = !sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = ctx
                        .mul(&m[i][j], &m[k][k])
                        .sub(&ctx.mul(&m[i][k], &m[k][j]));
                    m[i][j] = ctx.div(&num, &prev).expect("Bareiss pivot is nonzero");
                }
            }
            prev = m[k][k].clone();
        }
        let d = m[n - 1][n - 1].clone();
        if sign {
            d.neg()
        } else {
            d
        }
    }

    /// Determinant of a hermitian matrix, as an exact rational.
    pub fn det_class(&self, ctx: &FieldContext) -> BigRational {
        let d = self.det(ctx);
        debug_assert!(d.b.is_zero(), "hermitian determinant must be rational");
        d.a
    }

    /// Conjugate transpose.
    pub fn conj_transpose(&self, ctx: &FieldContext) -> Self {
        let mut entries = vec![vec![KElt::zero(); self.n]; self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                entries[j][i] = ctx.conj(&self.entries[i][j]);
            }
        }
        HermMatrix { n: self.n, entries }
    }

    /// Matrix product over k.
    pub fn mat_mul(ctx: &FieldContext, a: &HermMatrix, b: &HermMatrix) -> HermMatrix {
        let n = a.n;
        let mut entries = vec![vec![KElt::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = KElt::zero();
                for (k, bk) in b.entries.iter().enumerate() {
                    acc = acc.add(&ctx.mul(&a.entries[i][k], &bk[j]));
                }
                entries[i][j] = acc;
            }
        }
        HermMatrix { n, entries }
    }

    /// The Gram matrix U T U* of the transformed basis.
    pub fn transform(&self, ctx: &FieldContext, u: &HermMatrix) -> HermMatrix {
        let ut = HermMatrix::mat_mul(ctx, u, self);
        HermMatrix::mat_mul(ctx, &ut, &u.conj_transpose(ctx))
    }

    /// Exact signature (r, s) by recursive orthogonal splitting.
    pub fn signature(&self, ctx: &FieldContext) -> Result<(u32, u32)> {
        if self.det_class(ctx).is_zero() {
            return Err(Error::SingularMatrix);
        }
        let diag = diagonalize(ctx, self.entries.clone());
        let mut r = 0;
        let mut s = 0;
        for d in diag {
            if d.is_positive() {
                r += 1;
            } else {
                s += 1;
            }
        }
        Ok((r, s))
    }
}

/// Diagonalizes a hermitian form over k; returns the (rational) diagonal
/// values of an orthogonal basis, skipping the zero radical.
fn diagonalize(ctx: &FieldContext, mut m: Vec<Vec<KElt>>) -> Vec<BigRational> {
    let n = m.len();
    let mut out = Vec::new();
    let omega = KElt::from_ints(0, 1);
    for k in 0..n {
        // Find a nonzero diagonal entry at or after k, moving it to position k.
        if let Some(i) = (k..n).find(|&i| !m[i][i].is_zero()) {
            if i != k {
                swap_sym(&mut m, k, i);
            }
        } else {
            // All diagonal entries vanish: make one with x_k -> x_k + c x_j.
            let Some((i, j, c)) = ({
                let mut found = None;
                'outer: for i in k..n {
                    for j in k..n {
                        if i != j && !m[i][j].is_zero() {
                            for c in [KElt::one(), omega.clone()] {
                                let bump = ctx.trace_rational(&ctx.mul(&ctx.conj(&c), &m[i][j]));
                                if !bump.is_zero() {
                                    found = Some((i, j, c));
                                    break 'outer;
                                }
                            }
                        }
                    }
                }
                found
            }) else {
                break; // zero block: radical, contributes nothing
            };
            add_multiple_sym(ctx, &mut m, i, j, &c);
            if i != k {
                swap_sym(&mut m, k, i);
            }
        }
        let d = m[k][k].clone();
        debug_assert!(d.b.is_zero());
        out.push(d.a.clone());
        // Clear row/column k against the pivot.
        for j in k + 1..n {
            if m[j][k].is_zero() {
                continue;
            }
            let lambda = ctx.div(&m[j][k], &d).unwrap().neg();
            add_multiple_sym(ctx, &mut m, j, k, &lambda);
        }
    }
    out
}

fn swap_sym(m: &mut [Vec<KElt>], i: usize, j: usize) {
    m.swap(i, j);
    for row in m.iter_mut() {
        row.swap(i, j);
    }
}

/// Basis move x_i -> x_i + c x_j applied symmetrically to the Gram matrix.
fn add_multiple_sym(ctx: &FieldContext, m: &mut Vec<Vec<KElt>>, i: usize, j: usize, c: &KElt) {
    let n = m.len();
    let cb = ctx.conj(c);
    // Row i += c * row j, then column i += conj(c) * column j.
    for l in 0..n {
        let t = ctx.mul(c, &m[j][l]);
        m[i][l] = m[i][l].add(&t);
    }
    for l in 0..n {
        let t = ctx.mul(&m[l][j], &cb);
        m[l][i] = m[l][i].add(&t);
    }
}

/// Signature, local invariant signs and determinant class of the space V_T.
pub fn space_invariants(ctx: &FieldContext, t: &HermMatrix) -> Result<SpaceInvariants> {
    let det = t.det_class(ctx);
    if det.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let sig = t.signature(ctx)?;
    let mut inv = BTreeMap::new();
    for p in support_primes(ctx, &det) {
        inv.insert(p, ctx.hilbert_chi(&det, Place::Finite(p))?);
    }
    let si = SpaceInvariants {
        n: t.n,
        sig,
        inv,
        det_class: det,
    };
    debug_assert!(si.product_formula_holds());
    Ok(si)
}

impl SpaceInvariants {
    pub fn inv_at(&self, p: u64) -> i32 {
        *self.inv.get(&p).unwrap_or(&1)
    }

    /// prod_p inv(p) * (-1)^s = +1.
    pub fn product_formula_holds(&self) -> bool {
        let mut prod: i32 = if self.sig.1 % 2 == 0 { 1 } else { -1 };
        for v in self.inv.values() {
            prod *= v;
        }
        prod == 1
    }

    /// A self-dual lattice exists iff inv(p) = +1 at every inert prime.
    pub fn selfdual_feasible(&self, ctx: &FieldContext) -> bool {
        self.inv
            .iter()
            .all(|(&p, &s)| s == 1 || ctx.splitting(p) != SplitType::Inert)
    }
}

/// Primes where chi_p(det) can be nontrivial: divisors of 2, Delta and det.
fn support_primes(ctx: &FieldContext, det: &BigRational) -> Vec<u64> {
    let mut ps = vec![2u64];
    ps.extend(ctx.delta_primes.iter().copied());
    for part in [det.numer(), det.denom()] {
        let mut n = part.magnitude().clone();
        let one = num_bigint::BigUint::from(1u32);
        let mut d = 2u64;
        loop {
            let db = num_bigint::BigUint::from(d);
            if &db * &db > n {
                break;
            }
            if (&n % &db).is_zero() {
                ps.push(d);
                while (&n % &db).is_zero() {
                    n /= &db;
                }
            }
            d += 1;
        }
        if n > one {
            ps.push(n.to_string().parse::<u64>().expect("prime fits u64"));
        }
    }
    ps.sort_unstable();
    ps.dedup();
    ps
}

/// Diff(T, V) and Diff_0(T). With `v = None` the report is taken against the
/// distinguished relevant space that matches chi_p(det T) at as many ramified
/// primes as the product formula allows (flipping at the smallest ramified
/// prime when |Diff_0| is even), so diff_v = diff0 whenever |Diff_0| is odd.
pub fn diff_sets(
    ctx: &FieldContext,
    t: &HermMatrix,
    v: Option<&SpaceInvariants>,
) -> Result<DiffReport> {
    let det = t.det_class(ctx);
    if det.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let mut diff0 = Vec::new();
    for p in support_primes(ctx, &det) {
        if ctx.splitting(p) == SplitType::Inert && val_p(&det, p) % 2 != 0 {
            diff0.push(p);
        }
    }
    let diff_v = match v {
        Some(space) => {
            let mut ps = support_primes(ctx, &det);
            ps.extend(space.inv.keys().copied());
            ps.sort_unstable();
            ps.dedup();
            let mut out = Vec::new();
            for p in ps {
                let chi = ctx.hilbert_chi(&det, Place::Finite(p))?;
                if chi == -space.inv_at(p) {
                    out.push(p);
                }
            }
            out
        }
        None => {
            let mut out = diff0.clone();
            if out.len() % 2 == 0 {
                out.push(ctx.delta_primes[0]);
                out.sort_unstable();
            }
            out
        }
    };
    Ok(DiffReport { diff_v, diff0 })
}

/// Diagonalizes T over O_{k,p} by a GL_n(O_{k,p})-congruence at an odd
/// inert prime; returns the exact rational diagonal values, p-integral for
/// integral T.
///
/// The reduction picks an entry of minimal valuation; an off-diagonal
/// minimum is moved onto the diagonal by x_i -> x_i + c x_j with c in
/// {1, w}, valid because the trace form is unimodular at p (p odd, p
/// unramified). Symmetric elimination then splits off the pivot.
pub fn diagonalize_at_p(ctx: &FieldContext, t: &HermMatrix, p: u64) -> Result<Vec<BigRational>> {
    if p == 2 {
        return Err(Error::EvenPrime);
    }
    if ctx.splitting(p) != SplitType::Inert {
        return Err(Error::NotInert(p));
    }
    let det = t.det_class(ctx);
    if det.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let mut m = t.entries.clone();
    let n = t.n;
    let omega = KElt::from_ints(0, 1);
    let mut diag: Vec<BigRational> = Vec::with_capacity(n);
    for k in 0..n {
        // Locate the entry of minimal p-valuation in the trailing block.
        let mut best: Option<(i64, usize, usize)> = None;
        for i in k..n {
            for j in k..n {
                if m[i][j].is_zero() {
                    continue;
                }
                let v = kelt_val(&m[i][j], p);
                if best.map_or(true, |(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                }
            }
        }
        let (vmin, bi, bj) = best.ok_or(Error::SingularMatrix)?;
        if bi == bj {
            if bi != k {
                swap_sym(&mut m, k, bi);
            }
        } else {
            // Bring the minimal valuation onto the diagonal.
            let mut done = false;
            for c in [KElt::one(), omega.clone()] {
                let bump = ctx.trace_rational(&ctx.mul(&ctx.conj(&c), &m[bi][bj]));
                if !bump.is_zero() && val_p(&bump, p) == vmin {
                    let mut m2 = m.clone();
                    add_multiple_sym(ctx, &mut m2, bi, bj, &c);
                    m = m2;
                    done = true;
                    break;
                }
            }
            debug_assert!(done, "trace form is unimodular at odd unramified p");
            if bi != k {
                swap_sym(&mut m, k, bi);
            }
        }
        let d = m[k][k].clone();
        debug_assert_eq!(kelt_val(&d, p), vmin);
        for j in k + 1..n {
            if m[j][k].is_zero() {
                continue;
            }
            let lambda = ctx.div(&m[j][k], &d).unwrap().neg();
            add_multiple_sym(ctx, &mut m, j, k, &lambda);
        }
        debug_assert!(d.b.is_zero());
        diag.push(d.a);
    }
    Ok(diag)
}

/// Jordan exponents of T over O_{k,p} at an odd inert prime.
pub fn local_jordan_inert(ctx: &FieldContext, t: &HermMatrix, p: u64) -> Result<LocalJordan> {
    let diag = diagonalize_at_p(ctx, t, p)?;
    let mut exps: Vec<u64> = diag
        .iter()
        .map(|d| u64::try_from(val_p(d, p)).map_err(|_| Error::SingularMatrix))
        .collect::<Result<_>>()?;
    exps.sort_unstable();
    debug_assert_eq!(
        exps.iter().sum::<u64>() as i64,
        val_p(&t.det_class(ctx), p),
        "Jordan exponents must sum to ord_p det"
    );
    Ok(LocalJordan { p, exponents: exps })
}

/// Minimal p-valuation of the two coordinates; at inert p this is the
/// valuation of a + b*w since {1, w} is a local basis.
fn kelt_val(x: &KElt, p: u64) -> i64 {
    let va = if x.a.is_zero() { i64::MAX } else { val_p(&x.a, p) };
    let vb = if x.b.is_zero() { i64::MAX } else { val_p(&x.b, p) };
    va.min(vb)
}

/// Nondegeneracy classification of a positive definite T at an odd inert p.
pub fn nondegeneracy_report(
    ctx: &FieldContext,
    t: &HermMatrix,
    p: u64,
) -> Result<NondegeneracyReport> {
    let jordan = local_jordan_inert(ctx, t, p)?;
    let n = jordan.exponents.len();
    let r0 = jordan.exponents.iter().filter(|&&e| e >= 1).count() as u32;
    let predicted_dim = (r0 as i64 - 1).div_euclid(2);
    let nondeg = n >= 2
        && jordan.exponents[..n - 2].iter().all(|&e| e == 0)
        && jordan.exponents[n - 2] < jordan.exponents[n - 1]
        && (jordan.exponents[n - 2] + jordan.exponents[n - 1]) % 2 == 1;
    let ab = if nondeg {
        Some((jordan.exponents[n - 2], jordan.exponents[n - 1]))
    } else {
        None
    };
    Ok(NondegeneracyReport {
        nondeg,
        ab,
        r0,
        predicted_dim,
    })
}

/// Cardinality of the set of relevant hermitian spaces of dimension n:
/// 2^(delta-1), and 1 strict similarity class when n is odd.
pub fn relevant_space_count(ctx: &FieldContext, n: u32) -> RelevantSpaceCount {
    let count = 1u64 << (ctx.ramified_count - 1);
    let strict_sim_count = if n % 2 == 0 { count } else { 1 };
    RelevantSpaceCount {
        count,
        strict_sim_count,
    }
}

/// Landherr existence: assembles the unique global space with the given
/// local data, rejecting sign collections that violate the product formula.
pub fn landherr(
    ctx: &FieldContext,
    n: usize,
    sig: (u32, u32),
    inv_spec: &BTreeMap<u64, i32>,
) -> Result<SpaceInvariants> {
    if sig.0 + sig.1 != n as u32 {
        return Err(Error::SchemaError("signature does not sum to n".into()));
    }
    for (&p, &s) in inv_spec {
        if !(s == 1 || s == -1) {
            return Err(Error::SchemaError(format!("invalid sign at {p}")));
        }
        if s == -1 && ctx.splitting(p) == SplitType::Split {
            return Err(Error::SchemaError(format!(
                "split prime {p} must carry +1"
            )));
        }
    }
    let mut prod: i32 = if sig.1 % 2 == 0 { 1 } else { -1 };
    for s in inv_spec.values() {
        prod *= s;
    }
    if prod != 1 {
        return Err(Error::ProductFormulaViolation);
    }
    // Determinant class is determined only up to norms; a representative is
    // not reconstructed here.
    Ok(SpaceInvariants {
        n,
        sig,
        inv: inv_spec.clone(),
        det_class: BigRational::one(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadfield::make_field;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    /// [[2, i],[-i, 2]] over Q(i): i = 2 + w in the fixed basis.
    fn gauss_example(ctx: &FieldContext) -> HermMatrix {
        let i_elt = KElt::from_ints(2, 1);
        let entries = vec![
            vec![KElt::from_ints(2, 0), i_elt.clone()],
            vec![ctx.conj(&i_elt), KElt::from_ints(2, 0)],
        ];
        HermMatrix::new(ctx, entries).unwrap()
    }

    #[test]
    fn det_examples() {
        let f = make_field(-4).unwrap();
        assert_eq!(HermMatrix::diag_ints(&[1, 3]).det_class(&f), rat(3));
        assert_eq!(HermMatrix::identity(3).det_class(&f), rat(1));
        let m = HermMatrix::new(
            &f,
            vec![
                vec![KElt::from_ints(3, 0), KElt::from_ints(1, 0)],
                vec![KElt::from_ints(1, 0), KElt::from_ints(3, 0)],
            ],
        )
        .unwrap();
        assert_eq!(m.det_class(&f), rat(8));
        assert_eq!(gauss_example(&f).det_class(&f), rat(3));
    }

    #[test]
    fn symmetry_validation() {
        let f = make_field(-4).unwrap();
        let bad = vec![
            vec![KElt::from_ints(1, 0), KElt::from_ints(0, 1)],
            vec![KElt::from_ints(0, 1), KElt::from_ints(3, 0)],
        ];
        assert!(matches!(
            HermMatrix::new(&f, bad),
            Err(Error::SymmetryError(_))
        ));
    }

    #[test]
    fn invariants_examples() {
        let f = make_field(-4).unwrap();
        let si = space_invariants(&f, &HermMatrix::diag_ints(&[1, 3])).unwrap();
        assert_eq!(si.sig, (2, 0));
        assert_eq!(si.inv_at(3), -1);
        assert_eq!(si.inv_at(7), 1);
        assert!(si.product_formula_holds());

        let si = space_invariants(&f, &HermMatrix::diag_ints(&[1, -1])).unwrap();
        assert_eq!(si.sig, (1, 1));

        let si = space_invariants(&f, &gauss_example(&f)).unwrap();
        assert_eq!(si.sig, (2, 0));
        assert_eq!(si.inv_at(3), -1);
    }

    #[test]
    fn signature_of_split_form() {
        // All-zero diagonal exercises the hyperbolic bump.
        let f = make_field(-4).unwrap();
        let m = HermMatrix::new(
            &f,
            vec![
                vec![KElt::zero(), KElt::one()],
                vec![KElt::one(), KElt::zero()],
            ],
        )
        .unwrap();
        assert_eq!(m.signature(&f).unwrap(), (1, 1));
    }

    #[test]
    fn diff_examples() {
        let f = make_field(-4).unwrap();
        let d = diff_sets(&f, &HermMatrix::diag_ints(&[1, 3]), None).unwrap();
        assert_eq!(d.diff0, vec![3]);
        assert_eq!(d.diff_v, vec![3]);
        let d = diff_sets(&f, &HermMatrix::diag_ints(&[3, 7]), None).unwrap();
        assert_eq!(d.diff0, vec![3, 7]);
        let d = diff_sets(&f, &HermMatrix::identity(2), None).unwrap();
        assert!(d.diff0.is_empty());
        // Against an explicit space the report has odd cardinality.
        let v = space_invariants(&f, &HermMatrix::diag_ints(&[1, -1])).unwrap();
        let d = diff_sets(&f, &HermMatrix::diag_ints(&[1, 3]), Some(&v)).unwrap();
        assert_eq!(d.diff_v.len() % 2, 1);
    }

    #[test]
    fn jordan_examples() {
        let f = make_field(-4).unwrap();
        let j = local_jordan_inert(&f, &HermMatrix::diag_ints(&[1, 3]), 3).unwrap();
        assert_eq!(j.exponents, vec![0, 1]);
        let m = HermMatrix::new(
            &f,
            vec![
                vec![KElt::from_ints(3, 0), KElt::from_ints(1, 0)],
                vec![KElt::from_ints(1, 0), KElt::from_ints(3, 0)],
            ],
        )
        .unwrap();
        assert_eq!(local_jordan_inert(&f, &m, 3).unwrap().exponents, vec![0, 0]);
        assert_eq!(
            local_jordan_inert(&f, &HermMatrix::diag_ints(&[1, 3]), 5).unwrap_err(),
            Error::NotInert(5)
        );
        assert_eq!(
            local_jordan_inert(&f, &HermMatrix::diag_ints(&[1, 3]), 2).unwrap_err(),
            Error::EvenPrime
        );
    }

    #[test]
    fn jordan_off_diagonal_minimum() {
        // diag entries valuation 1, off-diagonal valuation 0.
        let f = make_field(-4).unwrap();
        let m = HermMatrix::new(
            &f,
            vec![
                vec![KElt::from_ints(3, 0), KElt::from_ints(1, 0)],
                vec![KElt::from_ints(1, 0), KElt::from_ints(6, 0)],
            ],
        )
        .unwrap();
        // det = 18 - 1 = 17, a 3-adic unit: exponents (0, 0).
        assert_eq!(local_jordan_inert(&f, &m, 3).unwrap().exponents, vec![0, 0]);
    }

    #[test]
    fn nondeg_examples() {
        let f = make_field(-4).unwrap();
        let r = nondegeneracy_report(&f, &HermMatrix::diag_ints(&[1, 1, 3]), 3).unwrap();
        assert!(r.nondeg);
        assert_eq!(r.ab, Some((0, 1)));
        assert_eq!((r.r0, r.predicted_dim), (1, 0));

        let r = nondegeneracy_report(&f, &HermMatrix::diag_ints(&[3, 3, 3]), 3).unwrap();
        assert!(!r.nondeg);
        assert_eq!((r.r0, r.predicted_dim), (3, 1));

        let r = nondegeneracy_report(&f, &HermMatrix::diag_ints(&[1, 3, 9]), 3).unwrap();
        assert!(r.nondeg);
        assert_eq!(r.ab, Some((1, 2)));
    }

    #[test]
    fn relevant_counts() {
        let f = make_field(-4).unwrap();
        assert_eq!(relevant_space_count(&f, 2).count, 1);
        let f = make_field(-15).unwrap();
        assert_eq!(relevant_space_count(&f, 2).count, 2);
        assert_eq!(relevant_space_count(&f, 2).strict_sim_count, 2);
        assert_eq!(relevant_space_count(&f, 3).strict_sim_count, 1);
    }

    #[test]
    fn landherr_examples() {
        let f = make_field(-4).unwrap();
        let mut spec = BTreeMap::new();
        spec.insert(3u64, -1);
        spec.insert(2u64, 1);
        let v = landherr(&f, 2, (1, 1), &spec).unwrap();
        assert!(!v.selfdual_feasible(&f));

        assert_eq!(
            landherr(&f, 2, (2, 0), &spec).unwrap_err(),
            Error::ProductFormulaViolation
        );

        let f = make_field(-15).unwrap();
        let mut spec = BTreeMap::new();
        spec.insert(3u64, -1);
        spec.insert(5u64, -1);
        let v = landherr(&f, 2, (2, 0), &spec).unwrap();
        assert!(v.selfdual_feasible(&f));
    }

    #[test]
    fn jordan_invariance_under_unimodular_change() {
        let f = make_field(-4).unwrap();
        let t = HermMatrix::diag_ints(&[1, 3, 9]);
        // Elementary unimodular transforms.
        let mut u_entries = HermMatrix::identity(3).entries;
        u_entries[0][1] = KElt::from_ints(1, 1);
        u_entries[2][0] = KElt::from_ints(0, -1);
        let u = HermMatrix {
            n: 3,
            entries: u_entries,
        };
        let t2 = t.transform(&f, &u);
        assert_eq!(
            local_jordan_inert(&f, &t, 3).unwrap(),
            local_jordan_inert(&f, &t2, 3).unwrap()
        );
        assert_eq!(t.det_class(&f), t2.det_class(&f));
    }
}
