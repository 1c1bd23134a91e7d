//! Higher-order loop constraints.
//!
//! Differentiating the velocity constraint `Σ σ_j ẋ_j S_j = 0` along a curve
//! uses `Ṡ_j = Σ_{m <_l j} σ_m ẋ_m [S_m, S_j]`. Repeating this gives
//!
//! ```text
//! S_j^(k) = Σ_{m<j} σ_m Σ_{a+b+c=k−1} (k−1)!/(a! b! c!) x_{a+1,m} [S_m^(b), S_j^(c)]
//! H^(i)   = Σ_j σ_j Σ_{a<i} C(i−1, a) x_{a+1,j} S_j^(i−1−a)
//! ```
//!
//! The recursion is written once over [`Ring`], so the same code builds the
//! symbolic systems in the variables `x_{k,j}`, evaluates them on exact or
//! floating jets, and evaluates them on branch expressions in cone parameters.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::linkage::{ExactCycleScrews, Linkage, LinkageError};
use crate::poly::{MultiPoly, RationalMatrix, Var};
use crate::scalar::{Ring, Q};
use crate::screw::{lie_bracket, Twist};

/// First-order data of the loop equations at `q0`.
#[derive(Clone, Debug)]
pub struct LoopSystem {
    pub n: usize,
    /// Per cycle: `(coordinate, sign, S(q0))` in traversal order.
    pub cycles: Vec<ExactCycleScrews>,
    /// Stacked `6γ × n` velocity constraint matrix.
    pub jacobian: RationalMatrix,
    pub nullspace: Vec<Vec<Q>>,
    pub left_nullspace: Vec<Vec<Q>>,
    /// Particular-solution operator of [`RationalMatrix::particular_operator`].
    pub particular: RationalMatrix,
}

impl LoopSystem {
    pub fn new(linkage: &Linkage) -> Result<Self, LinkageError> {
        Ok(Self::from_cycles(linkage.n(), linkage.exact_screws_at_q0()?))
    }

    pub fn from_cycles(n: usize, cycles: Vec<ExactCycleScrews>) -> Self {
        let mut jacobian = RationalMatrix::zeros(6 * cycles.len(), n);
        for (l, cycle) in cycles.iter().enumerate() {
            for (coord, sign, s) in cycle {
                for k in 0..6 {
                    jacobian[(6 * l + k, *coord)] += s.component(k) * Q::from_integer((*sign).into());
                }
            }
        }
        Self {
            n,
            nullspace: jacobian.nullspace(),
            left_nullspace: jacobian.left_nullspace(),
            particular: jacobian.particular_operator(),
            jacobian,
            cycles,
        }
    }

    pub fn gamma(&self) -> usize {
        self.cycles.len()
    }

    pub fn rank(&self) -> usize {
        self.n - self.nullspace.len()
    }

    /// `H^(order)` for each cycle; `jets[k-1]` holds `x_k` and must cover `order`.
    pub fn constraint_values<T: Ring>(&self, order: usize, jets: &[Vec<T>]) -> Vec<Twist<T>> {
        assert!(order >= 1 && jets.len() >= order, "need jets up to order {order}");
        self.cycles
            .iter()
            .map(|cycle| {
                let mut table = ScrewJets::new(cycle);
                while table.len() < order {
                    table.extend(cycle, jets);
                }
                table.constraint(cycle, order, jets)
            })
            .collect()
    }

    /// Same as [`constraint_values`](Self::constraint_values), stacked into a `6γ` vector.
    pub fn stacked_values<T: Ring>(&self, order: usize, jets: &[Vec<T>]) -> Vec<T> {
        self.constraint_values(order, jets).into_iter().flat_map(|t| t.to_array()).collect()
    }
}

/// Derivatives `S_j^(k)` of the screws along one cycle, indexed `[k][position]`.
#[derive(Clone, Debug)]
pub struct ScrewJets<T> {
    table: Vec<Vec<Twist<T>>>,
}

impl<T: Ring> ScrewJets<T> {
    pub fn new(cycle: &ExactCycleScrews) -> Self {
        Self { table: vec![cycle.iter().map(|(_, _, s)| s.lift()).collect()] }
    }

    /// Number of stored orders (`S^(0)` through `S^(len−1)`).
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn get(&self, k: usize) -> &[Twist<T>] {
        &self.table[k]
    }

    /// Appends `S^(k)` for `k = len()`, using jets `x_1 … x_k`.
    pub fn extend(&mut self, cycle: &ExactCycleScrews, jets: &[Vec<T>]) {
        let k = self.table.len();
        let len = cycle.len();
        let mut next: Vec<Twist<T>> = vec![Twist::zero(); len];
        for j in 0..len {
            let mut acc = Twist::zero();
            for m in 0..j {
                let (coord_m, sign_m, _) = &cycle[m];
                for b in 0..k {
                    for c in 0..(k - b) {
                        let a = k - 1 - b - c;
                        let x = &jets[a][*coord_m];
                        if x.is_ring_zero() {
                            continue;
                        }
                        let br = lie_bracket(&self.table[b][m], &self.table[c][j]);
                        if br.is_zero() {
                            continue;
                        }
                        let coef = multinomial(k - 1, a, b) * i64::from(*sign_m);
                        acc = acc.add(&br.scale(&x.scale_int(coef)));
                    }
                }
            }
            next[j] = acc;
        }
        self.table.push(next);
    }

    /// `H^(order)` for this cycle; requires `len() ≥ order`.
    pub fn constraint(&self, cycle: &ExactCycleScrews, order: usize, jets: &[Vec<T>]) -> Twist<T> {
        let mut acc = Twist::zero();
        for (pos, (coord, sign, _)) in cycle.iter().enumerate() {
            for a in 0..order {
                let x = &jets[a][*coord];
                if x.is_ring_zero() {
                    continue;
                }
                let coef = binomial(order - 1, a) * i64::from(*sign);
                acc = acc.add(&self.table[order - 1 - a][pos].scale(&x.scale_int(coef)));
            }
        }
        acc
    }
}

fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// `n! / (a! b! (n−a−b)!)`.
fn multinomial(n: usize, a: usize, b: usize) -> i64 {
    binomial(n, a) * binomial(n - a, b)
}

/// Formal jet variables `x_{k,j}` for `k = 1..=order` as polynomials.
pub fn symbolic_jets(n: usize, order: usize) -> Vec<Vec<MultiPoly>> {
    (1..=order).map(|k| (1..=n).map(|j| MultiPoly::var(Var::jet(k, j))).collect()).collect()
}

/// `H_l^(i)` as exact polynomials in `x_{k,j}`, one 6-vector per cycle.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    pub order: usize,
    pub n: usize,
    pub cycles: Vec<[MultiPoly; 6]>,
    loops: LoopSystem,
    tables: Vec<ScrewJets<MultiPoly>>,
}

impl ConstraintSystem {
    pub fn loops(&self) -> &LoopSystem {
        &self.loops
    }

    /// Stacked components, cycle by cycle.
    pub fn components(&self) -> impl Iterator<Item = &MultiPoly> {
        self.cycles.iter().flat_map(|c| c.iter())
    }

    /// Coefficient matrix of the highest-order variables `x_{i,·}`.
    pub fn leading_matrix(&self) -> RationalMatrix {
        let rows: Vec<Vec<Q>> = self
            .components()
            .map(|p| {
                (1..=self.n)
                    .map(|j| {
                        let d = p.derivative(Var::jet(self.order, j));
                        // linear in x_i: the derivative is a constant
                        d.constant_value().unwrap_or_default()
                    })
                    .collect()
            })
            .collect();
        RationalMatrix::from_rows(rows)
    }

    /// Evaluates on exact jet values; every variable must be assigned.
    pub fn evaluate(&self, values: &BTreeMap<Var, Q>) -> Result<Vec<[Q; 6]>, MissingJet> {
        self.cycles
            .iter()
            .map(|c| {
                let mut out: [Q; 6] = Default::default();
                for k in 0..6 {
                    out[k] = c[k].eval(values).ok_or_else(|| missing(&c[k], values))?;
                }
                Ok(out)
            })
            .collect()
    }

    pub fn evaluate_f64(&self, values: &BTreeMap<Var, f64>) -> Result<Vec<[f64; 6]>, MissingJet> {
        self.cycles
            .iter()
            .map(|c| {
                let mut out = [0.0; 6];
                for k in 0..6 {
                    out[k] = c[k].eval_f64(values).ok_or_else(|| missing(&c[k], values))?;
                }
                Ok(out)
            })
            .collect()
    }
}

fn missing<V>(p: &MultiPoly, values: &BTreeMap<Var, V>) -> MissingJet {
    let var = p.vars().into_iter().find(|v| !values.contains_key(v)).expect("some variable is missing");
    MissingJet { var: var.to_string() }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no value assigned to jet variable {var}")]
pub struct MissingJet {
    pub var: String,
}

/// `H^(1) = Σ σ_j x_{1,j} S_j(q0)` per cycle.
pub fn first_order_system(linkage: &Linkage) -> Result<ConstraintSystem, LinkageError> {
    Ok(first_order_from(LoopSystem::new(linkage)?))
}

pub fn first_order_from(loops: LoopSystem) -> ConstraintSystem {
    let jets = symbolic_jets(loops.n, 1);
    let tables: Vec<ScrewJets<MultiPoly>> = loops.cycles.iter().map(ScrewJets::new).collect();
    let cycles = loops
        .cycles
        .iter()
        .zip(&tables)
        .map(|(cycle, t)| t.constraint(cycle, 1, &jets).to_array())
        .collect();
    ConstraintSystem { order: 1, n: loops.n, cycles, loops, tables }
}

/// The next-order system, reusing the screw-derivative tables of `sys`.
pub fn derive_next(sys: &ConstraintSystem) -> ConstraintSystem {
    let order = sys.order + 1;
    let jets = symbolic_jets(sys.n, order);
    let mut tables = sys.tables.clone();
    let cycles = sys
        .loops
        .cycles
        .iter()
        .zip(tables.iter_mut())
        .map(|(cycle, t)| {
            while t.len() < order {
                t.extend(cycle, &jets);
            }
            t.constraint(cycle, order, &jets).to_array()
        })
        .collect();
    ConstraintSystem { order, n: sys.n, cycles, loops: sys.loops.clone(), tables }
}

/// Systems of orders `1..=max_order`.
pub fn systems_up_to(linkage: &Linkage, max_order: usize) -> Result<Vec<ConstraintSystem>, LinkageError> {
    let mut out = vec![first_order_system(linkage)?];
    while out.len() < max_order {
        let next = derive_next(out.last().unwrap());
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{qi, qr};

    fn pair_cycles(y: Twist<Q>) -> Vec<ExactCycleScrews> {
        vec![vec![(0, 1, y.clone()), (1, -1, y)]]
    }

    fn p(s: &str) -> MultiPoly {
        s.parse().unwrap()
    }

    #[test]
    fn anti_aligned_pair() {
        let y = Twist::from_array([qi(0), qi(0), qi(1), qi(0), qi(-1), qi(0)]);
        let sys = first_order_from(LoopSystem::from_cycles(2, pair_cycles(y.clone())));
        let expect: Vec<MultiPoly> = y.to_array().iter().map(|c| p("x1_1 - x1_2").scale(c)).collect();
        assert_eq!(sys.cycles[0].to_vec(), expect);
        let sys2 = derive_next(&sys);
        let expect2: Vec<MultiPoly> = y.to_array().iter().map(|c| p("x2_1 - x2_2").scale(c)).collect();
        assert_eq!(sys2.cycles[0].to_vec(), expect2);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(multinomial(4, 1, 2), 12);
    }

    #[test]
    fn second_order_has_bracket_term() {
        // two non-commuting screws in one loop: H² = x2 terms + x1_1 x1_2 [Y1, Y2]
        let y1 = Twist::from_array([qi(1), qi(0), qi(0), qi(0), qi(0), qi(0)]);
        let y2 = Twist::from_array([qi(0), qi(1), qi(0), qi(0), qi(0), qi(0)]);
        let loops = LoopSystem::from_cycles(2, vec![vec![(0, 1, y1), (1, 1, y2)]]);
        let sys2 = derive_next(&first_order_from(loops));
        assert_eq!(sys2.cycles[0][0], p("x2_1"));
        assert_eq!(sys2.cycles[0][1], p("x2_2"));
        assert_eq!(sys2.cycles[0][2], p("x1_1*x1_2"));
    }

    #[test]
    fn generic_evaluation_agrees_with_symbolic() {
        let y1 = Twist::from_array([qr(3, 5), qr(4, 5), qi(0), qi(0), qi(0), qr(-6, 5)]);
        let y2 = Twist::from_array([qi(0), qr(3, 5), qr(4, 5), qr(16, 5), qi(0), qi(0)]);
        let y3 = Twist::from_array([qi(0), qi(0), qi(1), qi(1), qi(2), qi(0)]);
        let loops = LoopSystem::from_cycles(3, vec![vec![(0, 1, y1), (1, -1, y2), (2, 1, y3)]]);
        let mut sys = first_order_from(loops.clone());
        for _ in 0..3 {
            sys = derive_next(&sys);
        }
        let jets: Vec<Vec<Q>> = (1..=4).map(|k| (1..=3).map(|j| qr((k * 7 + j * 3) as i64 % 11 - 5, k as i64 + 1)).collect()).collect();
        let mut values = BTreeMap::new();
        for (k, row) in jets.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                values.insert(Var::jet(k + 1, j + 1), v.clone());
            }
        }
        let sym = sys.evaluate(&values).unwrap();
        let direct = loops.constraint_values(4, &jets);
        assert_eq!(sym[0].to_vec(), direct[0].to_array().to_vec());
    }

    #[test]
    fn missing_assignment_is_reported() {
        let y = Twist::from_array([qi(0), qi(0), qi(1), qi(0), qi(0), qi(0)]);
        let sys = first_order_from(LoopSystem::from_cycles(2, pair_cycles(y)));
        let err = sys.evaluate(&BTreeMap::from([(Var::jet(1, 1), qi(1))])).unwrap_err();
        assert_eq!(err.var, "x1_2");
    }
}
