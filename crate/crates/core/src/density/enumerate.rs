//! Column-recursive residue counting for |A_{p^k}(S, T)|.
//!
//! Columns of x in M_{m,n}(O/p^k) are chosen left to right. The first column
//! is enumerated outright (in parallel); for each later column the cross
//! congruences against the fixed columns form a linear system over the chain
//! ring O/p^k which is solved parametrically, so only the affine solution
//! set is visited. The final column is never materialized: its count is a
//! scalar quadratic-congruence count over the solution box, memoized on the
//! reduced coefficients.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use super::modring::{Elt, ModRing};
use crate::error::{Error, Result};

/// Shared node budget: every visited partial column costs one node.
#[derive(Debug)]
pub struct Budget {
    pub limit: u64,
    used: AtomicU64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget {
            limit,
            used: AtomicU64::new(0),
        }
    }

    /// Default limit of 1e9 visited partial columns, overridable through
    /// the UC_NODE_BUDGET environment variable.
    pub fn from_env() -> Self {
        let limit = std::env::var("UC_NODE_BUDGET")
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
            .unwrap_or(1_000_000_000);
        Budget::new(limit)
    }

    fn charge(&self, nodes: u64) -> Result<()> {
        let prev = self.used.fetch_add(nodes, Ordering::Relaxed);
        if prev + nodes > self.limit {
            Err(Error::Overflow(self.limit))
        } else {
            Ok(())
        }
    }

    pub fn used(&self) -> u64 {
        self.used.load(Ordering::Relaxed)
    }
}

/// S and T reduced mod p^k, entries as coordinate pairs.
pub struct Instance {
    pub ring: ModRing,
    pub m: usize,
    pub n: usize,
    pub s: Vec<Vec<Elt>>,
    pub t: Vec<Vec<Elt>>,
}

/// q(y) = sum_{s,t} conj(y_s) S_{st} y_t for a column y (scalar part).
#[inline]
fn gram_value(inst: &Instance, x: &[Elt], y: &[Elt]) -> Elt {
    // h(x, y) = sum_{s,t} x_s S_st conj(y_t)
    let r = &inst.ring;
    let mut acc = (0u64, 0u64);
    for s in 0..inst.m {
        if x[s] == (0, 0) {
            continue;
        }
        for t in 0..inst.m {
            if y[t] == (0, 0) || inst.s[s][t] == (0, 0) {
                continue;
            }
            let v = r.mul(x[s], r.mul(inst.s[s][t], r.conj(y[t])));
            acc = r.add(acc, v);
        }
    }
    acc
}

/// Affine parameterization of the solutions of a linear system over O/p^k:
/// z = z0 + sum_i t_i * gens[i] with t_i running over a transversal of
/// O/p^{e_i} (coordinates in [0, p^{e_i})).
struct SolutionSet {
    z0: Vec<Elt>,
    gens: Vec<Vec<Elt>>,
    /// exponent e_i per generator; the parameter box has p^{2 e_i} points
    exps: Vec<u32>,
}

impl SolutionSet {
    fn point_count(&self, ring: &ModRing) -> u64 {
        self.exps
            .iter()
            .fold(1u64, |acc, &e| acc.saturating_mul(ring.p.pow(2 * e)))
    }
}

/// Solves rows * z = rhs over O/p^k by valuation-pivoted elimination.
/// Returns None when inconsistent.
fn solve_linear(ring: &ModRing, rows: &mut Vec<Vec<Elt>>, rhs: &mut Vec<Elt>, m: usize) -> Option<SolutionSet> {
    let k = ring.k;
    let mut pivots: Vec<(usize, usize, u32)> = Vec::new(); // (row, col, val)
    let mut used_cols = vec![false; m];
    let nrows = rows.len();
    let mut used_rows = vec![false; nrows];
    loop {
        // Global minimal-valuation entry among unused rows/cols.
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in rows.iter().enumerate() {
            if used_rows[i] {
                continue;
            }
            for (j, &e) in row.iter().enumerate() {
                if used_cols[j] || e == (0, 0) {
                    continue;
                }
                let v = ring.val(e);
                if best.map_or(true, |(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                }
            }
        }
        let Some((v, pi, pj)) = best else { break };
        if v >= k {
            break;
        }
        // Normalize the pivot row so the pivot is exactly p^v.
        let unit = ring.div_pow(rows[pi][pj], v);
        let uinv = ring.inv(unit);
        for j in 0..m {
            rows[pi][j] = ring.mul(rows[pi][j], uinv);
        }
        rhs[pi] = ring.mul(rhs[pi], uinv);
        // Eliminate the pivot column from all other unused rows (their
        // entries have valuation >= v by pivot minimality).
        for i in 0..nrows {
            if i == pi || used_rows[i] {
                continue;
            }
            let e = rows[i][pj];
            if e == (0, 0) {
                continue;
            }
            let f = ring.div_pow(e, v);
            for j in 0..m {
                let t = ring.mul(f, rows[pi][j]);
                rows[i][j] = ring.sub(rows[i][j], t);
            }
            let t = ring.mul(f, rhs[pi]);
            rhs[i] = ring.sub(rhs[i], t);
        }
        used_rows[pi] = true;
        used_cols[pj] = true;
        pivots.push((pi, pj, v));
    }
    // Remaining unused rows must have rhs = 0.
    for i in 0..nrows {
        if !used_rows[i] && rhs[i] != (0, 0) {
            return None;
        }
    }
    // Back-substitute in reverse pivot order. Pivot rows now read
    // p^v * z_pj + sum_{free or later} c_j z_j = rhs_pi.
    let mut z0 = vec![(0u64, 0u64); m];
    let mut gens: Vec<Vec<Elt>> = Vec::new();
    let mut exps: Vec<u32> = Vec::new();
    // Free columns contribute full-range generators.
    for j in 0..m {
        if !used_cols[j] {
            let mut g = vec![(0u64, 0u64); m];
            g[j] = (1, 0);
            gens.push(g);
            exps.push(k);
        }
    }
    // Process pivots from last chosen to first so later variables are known.
    for &(pi, pj, v) in pivots.iter().rev() {
        // residual = rhs - sum_{j != pj} c_j z0_j  (z0 holds settled values)
        let mut residual = rhs[pi];
        for j in 0..m {
            if j == pj {
                continue;
            }
            let c = rows[pi][j];
            if c == (0, 0) || z0[j] == (0, 0) {
                continue;
            }
            residual = ring.sub(residual, ring.mul(c, z0[j]));
        }
        if ring.val(residual) < v {
            return None;
        }
        z0[pj] = ring.div_pow(residual, v);
        if v > 0 {
            // Freedom p^{k-v} * t for t in O/p^v.
            let step = ring.p.pow(k - v);
            let mut g = vec![(0u64, 0u64); m];
            g[pj] = (step, 0);
            gens.push(g);
            exps.push(v);
        }
        // Each earlier pivot must also see the dependence of z_pj on free
        // generators: fold pivot-row coefficients into the generators.
        for (gi, g) in gens.iter_mut().enumerate() {
            if exps[gi] == 0 {
                continue;
            }
            // contribution of generator to this pivot's equation
            let mut dot = (0u64, 0u64);
            for j in 0..m {
                if j == pj {
                    continue;
                }
                let c = rows[pi][j];
                if c == (0, 0) || g[j] == (0, 0) {
                    continue;
                }
                dot = ring.add(dot, ring.mul(c, g[j]));
            }
            if dot == (0, 0) {
                continue;
            }
            if ring.val(dot) < v {
                // The generator violates this equation at its own scale;
                // shrink it: only multiples with p^v | t*dot survive.
                // This cannot happen because pivots were chosen with
                // globally minimal valuation, making later coefficients
                // divisible by p^v.
                debug_assert!(false, "pivot minimality violated");
            }
            let corr = ring.neg(ring.div_pow(dot, v));
            g[pj] = ring.add(g[pj], corr);
        }
    }
    Some(SolutionSet { z0, gens, exps })
}

/// Iterates the parameter transversal of a solution set, yielding z.
fn for_each_solution<F: FnMut(&[Elt])>(ring: &ModRing, sol: &SolutionSet, mut f: F) {
    let d = sol.gens.len();
    let mut coords: Vec<Elt> = vec![(0, 0); d];
    let mut z = sol.z0.clone();
    fn rec<F: FnMut(&[Elt])>(
        ring: &ModRing,
        sol: &SolutionSet,
        idx: usize,
        coords: &mut Vec<Elt>,
        z: &mut Vec<Elt>,
        f: &mut F,
    ) {
        if idx == sol.gens.len() {
            f(z);
            return;
        }
        let bound = ring.p.pow(sol.exps[idx]);
        for a in 0..bound {
            for b in 0..bound {
                coords[idx] = (a, b);
                // z' = z + t * gen
                let mut z2 = z.clone();
                if (a, b) != (0, 0) {
                    for (zi, gi) in z2.iter_mut().zip(&sol.gens[idx]) {
                        let t = ring.mul((a, b), *gi);
                        *zi = ring.add(*zi, t);
                    }
                }
                rec(ring, sol, idx + 1, coords, &mut z2, f);
            }
        }
    }
    rec(ring, sol, 0, &mut coords, &mut z, &mut f);
}

/// Memoized count of a scalar hermitian-quadratic congruence over a box:
/// #{ u in box : c0 + sum Tr(conj(u_i) beta_i) + sum N(u_i) gamma_ii
///              + sum_{i<j} Tr(conj(u_i) u_j gamma_ij) = 0 }.
type QKey = (Vec<u32>, u64, Vec<Elt>, Vec<Elt>);

fn quadratic_count(
    ring: &ModRing,
    exps: &[u32],
    c0: u64,
    betas: &[Elt],
    gammas: &[Vec<Elt>],
    memo: &mut HashMap<QKey, u64>,
    budget: &Budget,
) -> Result<u64> {
    let mut gflat = Vec::new();
    for (i, row) in gammas.iter().enumerate() {
        for g in row.iter().skip(i) {
            gflat.push(*g);
        }
    }
    let key: QKey = (exps.to_vec(), c0, betas.to_vec(), gflat);
    if let Some(&v) = memo.get(&key) {
        return Ok(v);
    }
    let d = exps.len();
    let mut total = 0u64;
    let mut u: Vec<Elt> = vec![(0, 0); d];
    let mut nodes = 0u64;
    fn rec(
        ring: &ModRing,
        exps: &[u32],
        c0: u64,
        betas: &[Elt],
        gammas: &[Vec<Elt>],
        idx: usize,
        u: &mut Vec<Elt>,
        total: &mut u64,
        nodes: &mut u64,
    ) {
        if idx == exps.len() {
            // Evaluate the congruence.
            let mut acc = c0;
            for i in 0..u.len() {
                if u[i] == (0, 0) {
                    continue;
                }
                acc = ring.radd(acc, ring.rmul(ring.norm(u[i]), gammas[i][i].0));
                acc = ring.radd(acc, ring.trace(ring.mul(ring.conj(u[i]), betas[i])));
                for j in i + 1..u.len() {
                    if u[j] == (0, 0) {
                        continue;
                    }
                    let t = ring.mul(ring.mul(ring.conj(u[i]), u[j]), gammas[i][j]);
                    acc = ring.radd(acc, ring.trace(t));
                }
            }
            *nodes += 1;
            if acc == 0 {
                *total += 1;
            }
            return;
        }
        let bound = ring.p.pow(exps[idx]);
        for a in 0..bound {
            for b in 0..bound {
                u[idx] = (a, b);
                rec(ring, exps, c0, betas, gammas, idx + 1, u, total, nodes);
            }
        }
    }
    rec(ring, exps, c0, betas, gammas, 0, &mut u, &mut total, &mut nodes);
    budget.charge(nodes)?;
    memo.insert(key, total);
    Ok(total)
}

/// B(x, w) = sum_{s,t} conj(x_s) S_{st} w_t; q(z) = B(z, z).
#[inline]
fn bform(inst: &Instance, x: &[Elt], w: &[Elt]) -> Elt {
    let r = &inst.ring;
    let mut acc = (0u64, 0u64);
    for s in 0..inst.m {
        if x[s] == (0, 0) {
            continue;
        }
        let xc = r.conj(x[s]);
        for t in 0..inst.m {
            if w[t] == (0, 0) || inst.s[s][t] == (0, 0) {
                continue;
            }
            acc = r.add(acc, r.mul(xc, r.mul(inst.s[s][t], w[t])));
        }
    }
    acc
}

/// Count of solutions for the trailing columns j..n given fixed columns,
/// where `zcols` stores z_i = conj(column_i).
fn count_from(
    inst: &Instance,
    zcols: &mut Vec<Vec<Elt>>,
    j: usize,
    memo: &mut HashMap<QKey, u64>,
    budget: &Budget,
) -> Result<u64> {
    let r = inst.ring;
    let m = inst.m;
    // Cross congruences: for i < j, sum_t w_{it} z_t = T_{ij} where
    // w_{it} = sum_s x_{si} S_{st} = conj over... rows built from conj(z_i).
    let mut rows: Vec<Vec<Elt>> = Vec::with_capacity(j);
    let mut rhs: Vec<Elt> = Vec::with_capacity(j);
    for zi in zcols.iter().take(j) {
        // x_i = conj(z_i); row_t = sum_s x_{si} S_{st}
        let mut row = vec![(0u64, 0u64); m];
        for t in 0..m {
            let mut acc = (0u64, 0u64);
            for s in 0..m {
                if zi[s] == (0, 0) || inst.s[s][t] == (0, 0) {
                    continue;
                }
                acc = r.add(acc, r.mul(r.conj(zi[s]), inst.s[s][t]));
            }
            row[t] = acc;
        }
        rows.push(row);
    }
    for i in 0..j {
        rhs.push(inst.t[i][j]);
    }
    let Some(sol) = solve_linear(&r, &mut rows, &mut rhs, m) else {
        return Ok(0);
    };
    let tjj = inst.t[j][j].0;
    debug_assert_eq!(inst.t[j][j].1, 0);
    if j == inst.n - 1 {
        // Quadratic count over the solution box, memoized.
        let d = sol.gens.len();
        let c0 = r.rsub(bform(inst, &sol.z0, &sol.z0).0, tjj);
        let mut betas = Vec::with_capacity(d);
        for g in &sol.gens {
            betas.push(bform(inst, g, &sol.z0));
        }
        let mut gammas = vec![vec![(0u64, 0u64); d]; d];
        for a in 0..d {
            for b in a..d {
                gammas[a][b] = bform(inst, &sol.gens[a], &sol.gens[b]);
            }
        }
        return quadratic_count(&r, &sol.exps, c0, &betas, &gammas, memo, budget);
    }
    // Middle column: enumerate the affine solution set.
    budget.charge(sol.point_count(&r))?;
    let mut total = 0u64;
    let mut err = None;
    for_each_solution(&r, &sol, |z| {
        if err.is_some() {
            return;
        }
        // Diagonal congruence for column j: q(z) = T_jj.
        let q = bform(inst, z, z);
        if q.0 != tjj {
            return;
        }
        zcols.push(z.to_vec());
        match count_from(inst, zcols, j + 1, memo, budget) {
            Ok(c) => total += c,
            Err(e) => err = Some(e),
        }
        zcols.pop();
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(total)
}

/// |A_{p^k}(S, T)| by column-recursive enumeration with pruning.
pub fn count(inst: &Instance, budget: &Budget) -> Result<u128> {
    let r = inst.ring;
    let m = inst.m;
    let q = r.q;
    let t00 = inst.t[0][0].0;
    // First column: enumerate (O/p^k)^m, parallelized over the first
    // coordinate pair; each worker keeps its own memo across its chunk.
    let outer: u64 = q * q;
    let inner_dims = m - 1;
    let inner_size = (q * q).saturating_pow(inner_dims as u32);
    budget.charge(outer.saturating_mul(inner_size))?;
    (0..outer)
        .into_par_iter()
        .try_fold(
            || (HashMap::<QKey, u64>::new(), 0u128),
            |(mut memo, mut local), first| {
                let mut z = vec![(0u64, 0u64); m];
                z[0] = (first / q, first % q);
                let mut idxs = vec![0u64; inner_dims];
                'candidates: loop {
                    for (d, &ix) in idxs.iter().enumerate() {
                        z[d + 1] = (ix / q, ix % q);
                    }
                    // z holds conj(column); q(z) = q(column) is conj-invariant.
                    let qv = bform(inst, &z, &z);
                    if qv.0 == t00 {
                        if inst.n == 1 {
                            local += 1;
                        } else {
                            let mut zcols = vec![z.clone()];
                            local += count_from(inst, &mut zcols, 1, &mut memo, budget)? as u128;
                        }
                    }
                    let mut d = 0;
                    loop {
                        if d == inner_dims {
                            break 'candidates;
                        }
                        idxs[d] += 1;
                        if idxs[d] < q * q {
                            break;
                        }
                        idxs[d] = 0;
                        d += 1;
                    }
                }
                Ok((memo, local))
            },
        )
        .map(|r: Result<(HashMap<QKey, u64>, u128)>| r.map(|(_, v)| v))
        .try_reduce(|| 0u128, |a, b| Ok(a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(delta: i64, p: u64, k: u32, s: &[&[i64]], t: &[&[i64]]) -> Instance {
        let ring = ModRing::new(delta, p, k);
        let to_mat = |rows: &[&[i64]]| -> Vec<Vec<Elt>> {
            rows.iter()
                .map(|r| r.iter().map(|&v| ring.from_i64(v, 0)).collect())
                .collect()
        };
        Instance {
            ring,
            m: s.len(),
            n: t.len(),
            s: to_mat(s),
            t: to_mat(t),
        }
    }

    /// Raw reference count with no pruning at all, for tiny instances.
    fn raw_count(inst: &Instance) -> u128 {
        let r = inst.ring;
        let q = r.q;
        let cells = inst.m * inst.n;
        let space = (q * q).pow(cells as u32);
        let mut total = 0u128;
        for idx in 0..space {
            let mut rem = idx;
            let mut x = vec![vec![(0u64, 0u64); inst.n]; inst.m];
            for s in 0..inst.m {
                for t in 0..inst.n {
                    let v = rem % (q * q);
                    rem /= q * q;
                    x[s][t] = (v / q, v % q);
                }
            }
            let mut ok = true;
            'check: for i in 0..inst.n {
                for j in 0..inst.n {
                    // (S[x])_{ij} = sum_{s,t} x_{si} S_st conj(x_{tj})
                    let mut acc = (0u64, 0u64);
                    for s in 0..inst.m {
                        for t in 0..inst.m {
                            let v = r.mul(x[s][i], r.mul(inst.s[s][t], r.conj(x[t][j])));
                            acc = r.add(acc, v);
                        }
                    }
                    if acc != inst.t[i][j] {
                        ok = false;
                        break 'check;
                    }
                }
            }
            if ok {
                total += 1;
            }
        }
        total
    }

    #[test]
    fn norm_fiber_counts() {
        let budget = Budget::new(u64::MAX);
        // #{x in O/3 : N(x) = 1 mod 3} = 4
        let i1 = inst(-4, 3, 1, &[&[1]], &[&[1]]);
        assert_eq!(count(&i1, &budget).unwrap(), 4);
        // #{x in O/9 : N(x) = 1 mod 9} = 12
        let i2 = inst(-4, 3, 2, &[&[1]], &[&[1]]);
        assert_eq!(count(&i2, &budget).unwrap(), 12);
        // #{x in O/3 : N(x) = 0 mod 3} = 1
        let i3 = inst(-4, 3, 1, &[&[1]], &[&[3]]);
        assert_eq!(count(&i3, &budget).unwrap(), 1);
    }

    #[test]
    fn matches_raw_reference() {
        let budget = Budget::new(u64::MAX);
        for (s, t) in [
            (vec![vec![1i64, 0], vec![0, 1]], vec![vec![1i64, 0], vec![0, 1]]),
            (vec![vec![1, 0], vec![0, 3]], vec![vec![1, 0], vec![0, 3]]),
            (vec![vec![1, 0], vec![0, 1]], vec![vec![1, 0], vec![0, 3]]),
            (vec![vec![3, 1], vec![1, 3]], vec![vec![1, 0], vec![0, 3]]),
        ] {
            let sref: Vec<&[i64]> = s.iter().map(|r| r.as_slice()).collect();
            let tref: Vec<&[i64]> = t.iter().map(|r| r.as_slice()).collect();
            let i = inst(-4, 3, 1, &sref, &tref);
            assert_eq!(count(&i, &budget).unwrap(), raw_count(&i), "s={s:?} t={t:?}");
        }
    }

    #[test]
    fn matches_raw_reference_k2_rank1() {
        let budget = Budget::new(u64::MAX);
        for tval in [1i64, 2, 3, 6, 9] {
            let i = inst(-4, 3, 2, &[&[1, 0], &[0, 3]], &[&[tval]]);
            assert_eq!(count(&i, &budget).unwrap(), raw_count(&i), "t={tval}");
        }
    }

    #[test]
    fn budget_is_enforced() {
        let budget = Budget::new(10);
        let i = inst(-4, 3, 2, &[&[1, 0], &[0, 1]], &[&[1, 0], &[0, 1]]);
        assert!(matches!(count(&i, &budget), Err(Error::Overflow(10))));
    }

    #[test]
    fn off_diagonal_targets() {
        // T with a nonzero off-diagonal entry, checked against raw.
        let budget = Budget::new(u64::MAX);
        let ring = ModRing::new(-4, 3, 1);
        let om = (0u64, 1u64);
        let t = vec![
            vec![ring.from_i64(1, 0), om],
            vec![ring.conj(om), ring.from_i64(2, 0)],
        ];
        let s = vec![
            vec![ring.from_i64(1, 0), ring.from_i64(0, 0)],
            vec![ring.from_i64(0, 0), ring.from_i64(1, 0)],
        ];
        let i = Instance {
            ring,
            m: 2,
            n: 2,
            s,
            t,
        };
        assert_eq!(count(&i, &budget).unwrap(), raw_count(&i));
    }
}
