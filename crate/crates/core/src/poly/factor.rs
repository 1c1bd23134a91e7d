use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::multipoly::{Monomial, MultiPoly, Var};
use super::real::quadratic_definiteness;
use crate::scalar::Q;

/// One irreducible factor with multiplicity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub poly: MultiPoly,
    pub multiplicity: u32,
    /// Sign-definite quadratic form (a sum of squares up to sign).
    pub semidefinite: bool,
}

/// `p = unit · Π factorᵐ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub unit: Q,
    pub factors: Vec<Factor>,
    /// Some factor could not be certified irreducible and is left as is.
    pub scope_exceeded: bool,
}

impl Factorization {
    pub fn expand(&self) -> MultiPoly {
        let mut acc = MultiPoly::constant(self.unit.clone());
        for f in &self.factors {
            acc = &acc * &f.poly.pow(f.multiplicity);
        }
        acc
    }
}

/// Largest magnitude for which rational-root candidates are enumerated.
const ROOT_SEARCH_LIMIT: u64 = 1_000_000_000_000;

/// Factors `p` over the rationals as far as the supported patterns allow.
///
/// Handles monomial and polynomial content, quadratics in some variable
/// (via perfect-square discriminants), and rational linear factors of
/// univariate or homogeneous bivariate polynomials. Anything of degree
/// three or more in every variable that those rules cannot split is
/// returned unfactored with `scope_exceeded` set.
pub fn factor_restricted(p: &MultiPoly) -> Factorization {
    if p.is_zero() {
        return Factorization { unit: Q::zero(), factors: Vec::new(), scope_exceeded: false };
    }
    let mut raw = Vec::new();
    let mut scope = false;
    factor_into(p, &mut raw, &mut scope);

    let mut merged: BTreeMap<MultiPoly, u32> = BTreeMap::new();
    for f in raw {
        let (_, prim) = f.primitive_part();
        if prim.is_constant() {
            continue;
        }
        *merged.entry(prim).or_default() += 1;
    }
    let factors: Vec<Factor> = merged
        .into_iter()
        .map(|(poly, multiplicity)| Factor {
            semidefinite: quadratic_definiteness(&poly).is_some_and(|d| d.is_semidefinite()),
            poly,
            multiplicity,
        })
        .collect();
    let mut prod = MultiPoly::one();
    for f in &factors {
        prod = &prod * &f.poly.pow(f.multiplicity);
    }
    let unit = p.leading_term().unwrap().1 / prod.leading_term().unwrap().1;
    Factorization { unit, factors, scope_exceeded: scope }
}

fn factor_into(p: &MultiPoly, out: &mut Vec<MultiPoly>, scope: &mut bool) {
    if p.is_constant() {
        return;
    }
    let (_, prim) = p.primitive_part();
    let content = prim.monomial_content();
    for &(v, e) in content.powers() {
        for _ in 0..e {
            out.push(MultiPoly::var(v));
        }
    }
    let mut rest = prim.div_monomial(&content).expect("content divides");
    if rest.is_constant() {
        return;
    }

    let vars = rest.vars();
    let v = *vars.iter().min_by_key(|&&v| (rest.degree_in(v), std::cmp::Reverse(v))).unwrap();

    // content with respect to v: factors of a coefficient that divide everything
    if vars.len() > 1 {
        let coeffs = rest.coefficients_in(v);
        let smallest = coeffs.values().min_by_key(|c| c.num_terms()).unwrap().clone();
        if !smallest.is_constant() {
            let mut cand = Vec::new();
            let mut sub_scope = false;
            factor_into(&smallest, &mut cand, &mut sub_scope);
            let mut found = false;
            for f in cand {
                if let Some(q) = rest.div_exact(&f) {
                    out.push(f);
                    rest = q;
                    found = true;
                }
            }
            if found {
                factor_into(&rest, out, scope);
                return;
            }
        }
    }

    match rest.degree_in(v) {
        1 => out.push(rest),
        2 => split_quadratic(&rest, v, out, scope),
        _ => split_by_roots(&rest, out, scope),
    }
}

fn split_quadratic(p: &MultiPoly, v: Var, out: &mut Vec<MultiPoly>, scope: &mut bool) {
    let c = p.coefficients_in(v);
    let get = |e: u32| c.get(&e).cloned().unwrap_or_default();
    let (a, b, c0) = (get(2), get(1), get(0));
    let disc = &(&b * &b) - &(&a * &c0).scale(&Q::from_integer(4.into()));
    let Some(s) = poly_sqrt(&disc) else {
        out.push(p.clone());
        return;
    };
    let two_av = &a.scale(&Q::from_integer(2.into())) * &MultiPoly::var(v);
    let base = &two_av + &b;
    let (mut f1, mut f2) = (&base - &s, &base + &s);
    // f1·f2 = 4a·p, so every factor of a divides exactly one side
    let mut a_factors = Vec::new();
    factor_into(&a, &mut a_factors, scope);
    for g in a_factors {
        if let Some(q) = f1.div_exact(&g) {
            f1 = q;
        } else if let Some(q) = f2.div_exact(&g) {
            f2 = q;
        } else {
            *scope = true;
            out.push(p.clone());
            return;
        }
    }
    factor_into(&f1, out, scope);
    factor_into(&f2, out, scope);
}

/// Rational linear factors of a univariate or homogeneous bivariate
/// polynomial; the cofactor is then re-examined.
fn split_by_roots(p: &MultiPoly, out: &mut Vec<MultiPoly>, scope: &mut bool) {
    let vars: Vec<Var> = p.vars().into_iter().collect();
    let homogeneous = p.terms().map(|(m, _)| m.degree()).all(|d| d == p.total_degree());
    let (x, y) = match vars.as_slice() {
        [x] => (*x, None),
        [x, y] if homogeneous => (*x, Some(*y)),
        _ => {
            *scope = true;
            out.push(p.clone());
            return;
        }
    };
    // coefficients of the dehomogenized polynomial in x, ascending
    let n = p.degree_in(x);
    let coeffs: Vec<Q> = (0..=n)
        .map(|e| {
            p.terms()
                .filter(|(m, _)| m.exponent(x) == e)
                .map(|(_, c)| c.clone())
                .fold(Q::zero(), |a, c| a + c)
        })
        .collect();
    match rational_root(&coeffs) {
        Some(r) => {
            // x − r·y (or x − r)
            let lin = match y {
                Some(y) => &MultiPoly::var(x) - &MultiPoly::var(y).scale(&r),
                None => &MultiPoly::var(x) - &MultiPoly::constant(r),
            };
            let (_, lin) = lin.primitive_part();
            let q = p.div_exact(&lin).expect("root gives a factor");
            out.push(lin);
            factor_into(&q, out, scope);
        }
        None => {
            // a cubic without rational roots is irreducible; higher degree may not be
            if n > 3 || y.is_some_and(|y| p.degree_in(y) > 3) {
                *scope = true;
            }
            out.push(p.clone());
        }
    }
}

fn rational_root(coeffs: &[Q]) -> Option<Q> {
    let lcm = coeffs.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let ints: Vec<BigInt> = coeffs.iter().map(|c| (c * Q::from_integer(lcm.clone())).to_integer()).collect();
    let a0 = ints.iter().find(|c| !c.is_zero())?;
    if ints[0].is_zero() {
        return Some(Q::zero());
    }
    let an = ints.last()?;
    let dp = small_divisors(a0)?;
    let dq = small_divisors(an)?;
    for p in &dp {
        for q in &dq {
            for sign in [1i64, -1] {
                let r = Q::new(BigInt::from(*p as i64 * sign), BigInt::from(*q));
                let val = coeffs.iter().rev().fold(Q::zero(), |acc, c| acc * &r + c);
                if val.is_zero() {
                    return Some(r);
                }
            }
        }
    }
    None
}

fn small_divisors(n: &BigInt) -> Option<Vec<u64>> {
    let n = n.abs().to_u64()?;
    if n > ROOT_SEARCH_LIMIT {
        return None;
    }
    let mut d = Vec::new();
    let mut i = 1u64;
    while i * i <= n {
        if n % i == 0 {
            d.push(i);
            if i != n / i {
                d.push(n / i);
            }
        }
        i += 1;
    }
    Some(d)
}

fn rational_sqrt(q: &Q) -> Option<Q> {
    if q.is_negative() {
        return None;
    }
    let (n, d) = (q.numer(), q.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    (&sn * &sn == *n && &sd * &sd == *d).then(|| Q::new(sn, sd))
}

/// Exact square root of a polynomial, if it is a perfect square.
pub fn poly_sqrt(p: &MultiPoly) -> Option<MultiPoly> {
    if p.is_zero() {
        return Some(MultiPoly::zero());
    }
    let (lm, lc) = p.leading_term()?;
    if lm.powers().iter().any(|&(_, e)| e % 2 == 1) {
        return None;
    }
    let root_m = Monomial::from_powers(lm.powers().iter().map(|&(v, e)| (v, e / 2)).collect());
    let root_c = rational_sqrt(lc)?;
    let (lead_m, lead_c) = (root_m.clone(), root_c.clone());
    let mut s = MultiPoly::term(root_m, root_c);
    let two_lead = &lead_c * Q::from_integer(2.into());
    for _ in 0..=4 * p.num_terms() + 8 {
        let rem = p - &(&s * &s);
        let Some((m, c)) = rem.leading_term() else { return Some(s) };
        let tm = m.div(&lead_m)?;
        if tm >= lead_m {
            return None;
        }
        s = &s + &MultiPoly::term(tm, c / &two_lead);
    }
    None
}
