//! Second-order truncated Taylor arithmetic (2-jets) in `d` variables.
//!
//! A [`Jet2`] carries a value together with its gradient and symmetric
//! Hessian with respect to `d` seeded coordinates. Arithmetic and the
//! elementary functions propagate both derivative orders exactly, so any
//! quantity computed from seeded coordinates arrives with exact first and
//! second derivatives. Truncation stops at order two: nothing in this
//! crate needs third derivatives.

use thiserror::Error;

/// Errors from jet construction and elementary functions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jet dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("seed index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("domain violation in {op} at argument {value}")]
    Domain { op: &'static str, value: f64 },
}

/// Value, gradient and symmetric Hessian of a scalar quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    /// Length `d`.
    pub grad: Vec<f64>,
    /// Row-major `d × d`, kept symmetric by every operation.
    pub hess: Vec<f64>,
}

#[allow(clippy::should_implement_trait)]
impl Jet2 {
    /// A constant: zero gradient and Hessian.
    pub fn constant(value: f64, dim: usize) -> Self {
        Jet2 {
            value,
            grad: vec![0.0; dim],
            hess: vec![0.0; dim * dim],
        }
    }

    /// Seed coordinate `index` of `point` as an independent variable.
    pub fn seed(point: &[f64], index: usize) -> Result<Self, JetError> {
        let dim = point.len();
        if index >= dim {
            return Err(JetError::IndexOutOfRange { index, dim });
        }
        let mut jet = Jet2::constant(point[index], dim);
        jet.grad[index] = 1.0;
        Ok(jet)
    }

    /// Seed every coordinate of `point`; the usual starting set for evaluation.
    pub fn seed_all(point: &[f64]) -> Vec<Jet2> {
        (0..point.len())
            .map(|i| Jet2::seed(point, i).expect("index in range"))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    fn check_dim(&self, other: &Jet2) -> Result<(), JetError> {
        if self.dim() != other.dim() {
            return Err(JetError::DimMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    pub fn neg(&self) -> Jet2 {
        Jet2 {
            value: -self.value,
            grad: self.grad.iter().map(|g| -g).collect(),
            hess: self.hess.iter().map(|h| -h).collect(),
        }
    }

    pub fn scale(&self, k: f64) -> Jet2 {
        Jet2 {
            value: k * self.value,
            grad: self.grad.iter().map(|g| k * g).collect(),
            hess: self.hess.iter().map(|h| k * h).collect(),
        }
    }

    /// Panics on dimension mismatch; evaluation fronts validate dimensions once.
    pub fn add(&self, other: &Jet2) -> Jet2 {
        self.check_dim(other).expect("jet dimensions agree");
        Jet2 {
            value: self.value + other.value,
            grad: zip(&self.grad, &other.grad, |a, b| a + b),
            hess: zip(&self.hess, &other.hess, |a, b| a + b),
        }
    }

    pub fn sub(&self, other: &Jet2) -> Jet2 {
        self.check_dim(other).expect("jet dimensions agree");
        Jet2 {
            value: self.value - other.value,
            grad: zip(&self.grad, &other.grad, |a, b| a - b),
            hess: zip(&self.hess, &other.hess, |a, b| a - b),
        }
    }

    /// Product rule to second order:
    /// `(ab)'' = a·Hb + b·Ha + ∇a∇bᵀ + ∇b∇aᵀ`.
    pub fn mul(&self, other: &Jet2) -> Jet2 {
        self.checked_mul(other).expect("jet dimensions agree")
    }

    /// Dimension-checked product.
    pub fn checked_mul(&self, other: &Jet2) -> Result<Jet2, JetError> {
        self.check_dim(other)?;
        let d = self.dim();
        let value = self.value * other.value;
        let grad: Vec<f64> = (0..d)
            .map(|i| self.value * other.grad[i] + other.value * self.grad[i])
            .collect();
        let mut hess = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let v = self.value * other.hess[i * d + j]
                    + other.value * self.hess[i * d + j]
                    + self.grad[i] * other.grad[j]
                    + self.grad[j] * other.grad[i];
                hess[i * d + j] = v;
                hess[j * d + i] = v;
            }
        }
        Ok(Jet2 { value, grad, hess })
    }

    /// Unary chain rule to second order:
    /// `f(a)'' = f′(a)·Ha + f″(a)·∇a∇aᵀ`.
    pub fn chain(&self, f: f64, df: f64, d2f: f64) -> Jet2 {
        let d = self.dim();
        let grad: Vec<f64> = self.grad.iter().map(|g| df * g).collect();
        let mut hess = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let v = df * self.hess[i * d + j] + d2f * self.grad[i] * self.grad[j];
                hess[i * d + j] = v;
                hess[j * d + i] = v;
            }
        }
        Jet2 { value: f, grad, hess }
    }

    pub fn sin(&self) -> Jet2 {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Jet2 {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.chain(c, -s, -c)
    }

    pub fn exp(&self) -> Jet2 {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Result<Jet2, JetError> {
        if self.value <= 0.0 {
            return Err(JetError::Domain { op: "log", value: self.value });
        }
        let inv = 1.0 / self.value;
        Ok(self.chain(self.value.ln(), inv, -inv * inv))
    }

    pub fn sqrt(&self) -> Result<Jet2, JetError> {
        if self.value < 0.0 {
            return Err(JetError::Domain { op: "sqrt", value: self.value });
        }
        let r = self.value.sqrt();
        // f' = 1/(2√a), f'' = -1/(4 a^{3/2}); a = 0 yields inf derivatives,
        // reported as a domain violation instead.
        if r == 0.0 {
            return Err(JetError::Domain { op: "sqrt", value: self.value });
        }
        Ok(self.chain(r, 0.5 / r, -0.25 / (r * r * r)))
    }

    pub fn recip(&self) -> Result<Jet2, JetError> {
        if self.value == 0.0 {
            return Err(JetError::Domain { op: "inv", value: self.value });
        }
        let inv = 1.0 / self.value;
        Ok(self.chain(inv, -inv * inv, 2.0 * inv * inv * inv))
    }

    /// Quotient rule: `q = a/b`, `∇q = (∇a − q∇b)/b`,
    /// `Hq = (Ha − q·Hb − ∇q∇bᵀ − ∇b∇qᵀ)/b`.
    pub fn div(&self, other: &Jet2) -> Result<Jet2, JetError> {
        self.check_dim(other)?;
        if other.value == 0.0 {
            return Err(JetError::Domain { op: "inv", value: other.value });
        }
        let d = self.dim();
        let value = self.value / other.value;
        let inv = 1.0 / other.value;
        let grad: Vec<f64> = (0..d)
            .map(|i| (self.grad[i] - value * other.grad[i]) * inv)
            .collect();
        let mut hess = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let v = (self.hess[i * d + j]
                    - value * other.hess[i * d + j]
                    - grad[i] * other.grad[j]
                    - grad[j] * other.grad[i])
                    * inv;
                hess[i * d + j] = v;
                hess[j * d + i] = v;
            }
        }
        Ok(Jet2 { value, grad, hess })
    }

    /// Integer power by repeated multiplication; negative exponents go
    /// through [`Jet2::recip`].
    pub fn powi(&self, k: i32) -> Result<Jet2, JetError> {
        if k == 0 {
            return Ok(Jet2::constant(1.0, self.dim()));
        }
        let mut acc = self.clone();
        for _ in 1..k.unsigned_abs() {
            acc = acc.mul(self);
        }
        if k < 0 {
            acc = acc.recip()?;
        }
        Ok(acc)
    }

    /// Real power, positive base only.
    pub fn powf(&self, k: f64) -> Result<Jet2, JetError> {
        if self.value <= 0.0 {
            return Err(JetError::Domain { op: "pow", value: self.value });
        }
        let f = self.value.powf(k);
        let df = k * self.value.powf(k - 1.0);
        let d2f = k * (k - 1.0) * self.value.powf(k - 2.0);
        Ok(self.chain(f, df, d2f))
    }
}

fn zip(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn coordinate_seeds() {
        let a = Jet2::seed(&[3.0, 5.0], 0).unwrap();
        assert_eq!(a.value, 3.0);
        assert_eq!(a.grad, vec![1.0, 0.0]);
        assert!(a.hess.iter().all(|&h| h == 0.0));

        let b = Jet2::seed(&[3.0, 5.0], 1).unwrap();
        assert_eq!(b.value, 5.0);
        assert_eq!(b.grad, vec![0.0, 1.0]);

        let c = Jet2::seed(&[7.0], 0).unwrap();
        assert_eq!((c.value, c.grad[0], c.hess[0]), (7.0, 1.0, 0.0));

        assert_eq!(
            Jet2::seed(&[1.0], 3),
            Err(JetError::IndexOutOfRange { index: 3, dim: 1 })
        );
    }

    #[test]
    fn product_rule_square() {
        // x·x at x=3: value 9, derivative 6, second derivative 2.
        let x = Jet2::seed(&[3.0], 0).unwrap();
        let sq = x.mul(&x);
        assert_eq!((sq.value, sq.grad[0], sq.hess[0]), (9.0, 6.0, 2.0));
    }

    #[test]
    fn product_rule_bilinear() {
        let x = Jet2::seed(&[2.0, 3.0], 0).unwrap();
        let y = Jet2::seed(&[2.0, 3.0], 1).unwrap();
        let xy = x.mul(&y);
        assert_eq!(xy.value, 6.0);
        assert_eq!(xy.grad, vec![3.0, 2.0]);
        assert_eq!(xy.hess, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn cube_from_repeated_products() {
        // x²·x at x=2 carries the derivatives of x³: (8, 12, 12).
        let x = Jet2::seed(&[2.0], 0).unwrap();
        let cube = x.mul(&x).mul(&x);
        assert_eq!((cube.value, cube.grad[0], cube.hess[0]), (8.0, 12.0, 12.0));
    }

    #[test]
    fn elementary_chains_at_seeds() {
        let zero = Jet2::seed(&[0.0], 0).unwrap();
        let s = zero.sin();
        assert_eq!((s.value, s.grad[0], s.hess[0]), (0.0, 1.0, 0.0));
        let e = zero.exp();
        assert_eq!((e.value, e.grad[0], e.hess[0]), (1.0, 1.0, 1.0));
        let one = Jet2::seed(&[1.0], 0).unwrap();
        let l = one.ln().unwrap();
        assert_eq!((l.value, l.grad[0], l.hess[0]), (0.0, 1.0, -1.0));
    }

    #[test]
    fn chain_on_affine_input_reproduces_bare_derivatives() {
        // a = 2x + 1 at x = 0.4: sin(a) must carry sin'(a)·2 and sin''(a)·4.
        let x = Jet2::seed(&[0.4], 0).unwrap();
        let a = x.scale(2.0).add(&Jet2::constant(1.0, 1));
        let s = a.sin();
        assert_relative_eq!(s.grad[0], 1.8f64.cos() * 2.0, max_relative = 1e-15);
        assert_relative_eq!(s.hess[0], -1.8f64.sin() * 4.0, max_relative = 1e-15);
    }

    #[test]
    fn domain_violations() {
        let neg = Jet2::constant(-1.0, 1);
        assert!(matches!(neg.ln(), Err(JetError::Domain { op: "log", .. })));
        assert!(matches!(neg.sqrt(), Err(JetError::Domain { op: "sqrt", .. })));
        let zero = Jet2::constant(0.0, 1);
        assert!(matches!(zero.recip(), Err(JetError::Domain { op: "inv", .. })));
        assert!(matches!(neg.powf(0.5), Err(JetError::Domain { op: "pow", .. })));
    }

    #[test]
    fn negative_integer_power() {
        let x = Jet2::seed(&[2.0], 0).unwrap();
        let p = x.powi(-2).unwrap();
        assert_relative_eq!(p.value, 0.25, max_relative = 1e-15);
        assert_relative_eq!(p.grad[0], -2.0 / 8.0, max_relative = 1e-14);
        assert_relative_eq!(p.hess[0], 6.0 / 16.0, max_relative = 1e-14);
    }

    fn arb_jet() -> impl Strategy<Value = Jet2> {
        // Random symmetric 2-jets in two variables.
        (
            -2.0..2.0f64,
            prop::array::uniform2(-2.0..2.0f64),
            prop::array::uniform3(-2.0..2.0f64),
        )
            .prop_map(|(v, g, h)| Jet2 {
                value: v,
                grad: g.to_vec(),
                hess: vec![h[0], h[1], h[1], h[2]],
            })
    }

    proptest! {
        #[test]
        fn mul_commutes(a in arb_jet(), b in arb_jet()) {
            let ab = a.mul(&b);
            let ba = b.mul(&a);
            prop_assert!((ab.value - ba.value).abs() <= 1e-14);
            for i in 0..2 {
                prop_assert!((ab.grad[i] - ba.grad[i]).abs() <= 1e-14);
            }
            for i in 0..4 {
                prop_assert!((ab.hess[i] - ba.hess[i]).abs() <= 1e-14);
            }
        }

        #[test]
        fn mul_associates(a in arb_jet(), b in arb_jet(), c in arb_jet()) {
            let left = a.mul(&b).mul(&c);
            let right = a.mul(&b.mul(&c));
            prop_assert!((left.value - right.value).abs() <= 1e-12);
            for i in 0..2 {
                prop_assert!((left.grad[i] - right.grad[i]).abs() <= 1e-12);
            }
            for i in 0..4 {
                prop_assert!((left.hess[i] - right.hess[i]).abs() <= 1e-12);
            }
        }

        #[test]
        fn hessian_stays_symmetric(a in arb_jet(), b in arb_jet()) {
            let p = a.mul(&b);
            prop_assert_eq!(p.hess_at(0, 1), p.hess_at(1, 0));
            let q = p.sin();
            prop_assert_eq!(q.hess_at(0, 1), q.hess_at(1, 0));
        }
    }
}
