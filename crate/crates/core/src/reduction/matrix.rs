use rayon::prelude::*;

use crate::expr::{Expr, Symbol};
use crate::oracle::{eval, is_zero, OracleError, SamplePlan, ZeroVerdict};

/// Above this size determinants use fraction-free elimination instead of cofactors.
const COFACTOR_LIMIT: usize = 4;

/// A square matrix of expressions.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolicMatrix {
    n: usize,
    entries: Vec<Expr>,
}

impl SymbolicMatrix {
    /// Panics unless `rows` is square.
    pub fn new(rows: Vec<Vec<Expr>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Self {
            n,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Expr) -> Self {
        Self {
            n,
            entries: (0..n * n).map(|k| f(k / n, k % n)).collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { Expr::one() } else { Expr::zero() })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<Expr>> {
        self.entries
            .chunks(self.n.max(1))
            .map(<[Expr]>::to_vec)
            .collect()
    }

    pub fn mul(&self, other: &SymbolicMatrix) -> SymbolicMatrix {
        assert_eq!(self.n, other.n);
        Self::from_fn(self.n, |i, j| {
            Expr::sum((0..self.n).map(|k| self.get(i, k) * other.get(k, j)))
        })
    }

    pub fn mul_vec(&self, v: &[Expr]) -> Vec<Expr> {
        assert_eq!(self.n, v.len());
        (0..self.n)
            .map(|i| Expr::sum((0..self.n).map(|k| self.get(i, k) * &v[k])))
            .collect()
    }

    fn minor(&self, row: usize, col: usize) -> SymbolicMatrix {
        let n = self.n - 1;
        Self::from_fn(n, |i, j| {
            let si = if i < row { i } else { i + 1 };
            let sj = if j < col { j } else { j + 1 };
            self.get(si, sj).clone()
        })
    }

    pub fn det(&self) -> Expr {
        match self.n {
            0 => Expr::one(),
            1 => self.get(0, 0).clone(),
            n if n <= COFACTOR_LIMIT => Expr::sum((0..n).map(|j| {
                let c = self.get(0, j);
                if c.is_literal_zero() {
                    return Expr::zero();
                }
                let term = c * &self.minor(0, j).det();
                if j % 2 == 0 {
                    term
                } else {
                    -term
                }
            })),
            _ => self.bareiss_det(),
        }
    }

    /// Fraction-free elimination; pivots are the entries of largest magnitude at a fixed
    /// sample point, so that symbolically nonzero pivots are preferred.
    fn bareiss_det(&self) -> Expr {
        let n = self.n;
        let mut m = self.rows();
        let symbols: Vec<Symbol> = self
            .entries
            .iter()
            .flat_map(|e| e.free_symbols())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let plan = SamplePlan::default();
        let point = plan.sample(&symbols, &mut plan.rng_for(0));
        let magnitude = |e: &Expr| {
            if e.is_literal_zero() {
                -1.0
            } else {
                eval(e, &point).map(f64::abs).unwrap_or(0.0)
            }
        };
        let mut sign = false;
        let mut prev = Expr::one();
        for k in 0..n - 1 {
            let (best, best_mag) =
                (k..n)
                    .map(|i| (i, magnitude(&m[i][k])))
                    .fold(
                        (k, f64::NEG_INFINITY),
                        |acc, x| if x.1 > acc.1 { x } else { acc },
                    );
            if best_mag < 0.0 {
                return Expr::zero();
            }
            if best != k {
                m.swap(best, k);
                sign = !sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &(&m[k][k] * &m[i][j]) - &(&m[i][k] * &m[k][j]);
                    m[i][j] = &num / &prev;
                }
                m[i][k] = Expr::zero();
            }
            prev = m[k][k].clone();
        }
        let d = m[n - 1][n - 1].clone();
        if sign {
            -d
        } else {
            d
        }
    }

    /// Adjugate divided by the determinant; the caller is responsible for `det != 0`.
    pub fn inverse_with_det(&self, det: &Expr) -> SymbolicMatrix {
        let n = self.n;
        if n == 1 {
            return Self::new(vec![vec![det.recip()]]);
        }
        let inv_det = det.recip();
        let entries: Vec<Expr> = (0..n * n)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / n, k % n);
                // (A^-1)_{ij} = C_{ji} / det
                let c = self.minor(j, i).det();
                let c = if (i + j) % 2 == 0 { c } else { -c };
                &c * &inv_det
            })
            .collect();
        Self { n, entries }
    }

    pub fn inverse(&self) -> SymbolicMatrix {
        self.inverse_with_det(&self.det())
    }

    /// Zero-tests `self * other - I` entry by entry.
    pub fn is_inverse_of(
        &self,
        other: &SymbolicMatrix,
        plan: &SamplePlan,
    ) -> Result<bool, OracleError> {
        let prod = self.mul(other);
        let id = Self::identity(self.n);
        for (a, b) in prod.entries.iter().zip(&id.entries) {
            if let ZeroVerdict::NonZero(_) = is_zero(&(a - b), plan)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn m(rows: &[&[&str]]) -> SymbolicMatrix {
        SymbolicMatrix::new(
            rows.iter()
                .map(|r| r.iter().map(|s| parse(s, "u").unwrap()).collect())
                .collect(),
        )
    }

    #[test]
    fn small_determinants() {
        assert_eq!(
            m(&[&["a", "b"], &["c", "d"]]).det(),
            parse("a*d - b*c", "u").unwrap()
        );
        let phi = m(&[
            &["x^4", "x^5", "x^6"],
            &["4*x^3", "5*x^4", "6*x^5"],
            &["12*x^2", "20*x^3", "30*x^4"],
        ]);
        assert_eq!(phi.det(), parse("2*x^12", "u").unwrap());
        let inv = phi.inverse();
        assert!(phi.is_inverse_of(&inv, &SamplePlan::default()).unwrap());
        assert!(inv.is_inverse_of(&phi, &SamplePlan::default()).unwrap());
    }

    #[test]
    fn eliminated_and_cofactor_determinants_agree() {
        let mat = SymbolicMatrix::from_fn(5, |i, j| {
            let c = Expr::int(((i * 3 + j * 7) % 5) as i64 - 2);
            if i == j {
                &c + &Expr::x()
            } else if i + 1 == j {
                &c * &Expr::t()
            } else {
                c
            }
        });
        let by_elimination = mat.det();
        let by_cofactors = Expr::sum((0..5).map(|j| {
            let t = mat.get(0, j) * &mat.minor(0, j).det();
            if j % 2 == 0 {
                t
            } else {
                -t
            }
        }));
        let plan = SamplePlan::default();
        assert!(is_zero(&(&by_elimination - &by_cofactors), &plan)
            .unwrap()
            .is_zero());

        let numeric = SymbolicMatrix::from_fn(5, |i, j| {
            Expr::int(if i == j {
                4
            } else {
                ((i + 2 * j) % 3) as i64 - 1
            })
        });
        assert!(numeric.is_inverse_of(&numeric.inverse(), &plan).unwrap());
    }

    #[test]
    fn singular_and_identity() {
        assert!(m(&[&["x", "x"], &["1", "1"]]).det().is_literal_zero());
        let id = SymbolicMatrix::identity(6);
        assert_eq!(id.det(), Expr::one());
        let zero_col = SymbolicMatrix::from_fn(5, |i, j| {
            if j == 2 {
                Expr::zero()
            } else {
                Expr::int((i * j + 1) as i64)
            }
        });
        assert!(zero_col.det().is_literal_zero());
    }
}
