//! Elimination of `s` from `t^2 + 1 = 2C s^(k+1)/(s^2+1)` and the quadratic
//! in `s^2` satisfied by `(t, g)`.
//!
//! With `W = t^2 + 1` the quadratic reads
//! `(k-1)^2 σ^2 - (2(k^2-1) + 16 k^2 g^2/W) σ + (k+1)^2 = 0`, `σ = s^2`, so
//! `σ = A ± B` with
//!
//! ```text
//! A   = ((n^2 - m^2) W + 8 n^2 g^2) / ((n - m)^2 W)
//! B^2 = A^2 - ((n + m)/(n - m))^2
//! ```
//!
//! Raising `W (σ + 1) = 2C σ^(k+1)/... ` to the power `m` (or `2m` when `n + m`
//! is odd) makes every exponent an integer. Writing `A = Ā/W`, `B = B̄/W`
//! the relation becomes the polynomial identity
//! `(2C)^μ (Ā + B̄)^e = W^e (Ā + W + B̄)^μ`; expanding both sides as
//! `P + Q B̄` and squaring away `B̄` leaves
//! `B̄^2 (Q_1 - Q_2)^2 - (P_1 - P_2)^2 = 0`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;

use super::poly::{rat, MultiPoly, RationalFunction};
use crate::error::{CrpcError, Result};

const T: usize = 0;
const G: usize = 1;
const CV: usize = 2;

/// How the shape constant `C` enters the polynomial.
#[derive(Debug, Clone, PartialEq)]
pub enum CMode {
    /// `C` stays the third variable.
    Symbolic,
    /// `C` is replaced by an exact rational value.
    Numeric(BigRational),
}

fn reduce(n: u64, m: u64) -> Result<(i64, i64)> {
    if n == 0 || m == 0 {
        return Err(CrpcError::InvalidK {
            k: n as f64 / m as f64,
            reason: "k = n/m needs positive n and m",
        });
    }
    let d = n.gcd(&m);
    let (n, m) = (n / d, m / d);
    if n == m {
        return Err(CrpcError::InvalidK {
            k: 1.0,
            reason: "k = 1 describes developable surfaces",
        });
    }
    Ok((n as i64, m as i64))
}

/// `4 (3m + n)`.
pub fn degree_bound(n: u64, m: u64) -> u32 {
    4 * (3 * m as u32 + n as u32)
}

fn w_poly() -> MultiPoly {
    &MultiPoly::var(T).pow(2) + &MultiPoly::one()
}

/// `(Ā, B̄^2)` with `A = Ā/W`, `B^2 = B̄^2/W^2`.
fn cleared_branches(n: i64, m: i64) -> (MultiPoly, MultiPoly) {
    let w = w_poly();
    let a_bar = (&w.scale(&rat(n * n - m * m, 1)) + &MultiPoly::var(G).pow(2).scale(&rat(8 * n * n, 1)))
        .scale(&rat(1, (n - m) * (n - m)));
    let q = rat(n + m, n - m);
    let beta_bar = &a_bar.pow(2) - &w.pow(2).scale(&(&q * &q));
    (a_bar, beta_bar)
}

/// `A` and `B^2` as rational functions of `(t, g)` (slots 0 and 1).
pub fn s_squared_branches(n: u64, m: u64) -> Result<(RationalFunction, RationalFunction)> {
    let (n, m) = reduce(n, m)?;
    let (a_bar, beta_bar) = cleared_branches(n, m);
    let w = w_poly();
    Ok((
        RationalFunction::new(a_bar, w.clone())?,
        RationalFunction::new(beta_bar, w.pow(2))?,
    ))
}

/// `p + q B̄` with `B̄^2 = beta`.
#[derive(Clone)]
struct Quadratic {
    p: MultiPoly,
    q: MultiPoly,
}

impl Quadratic {
    fn mul(&self, other: &Quadratic, beta: &MultiPoly) -> Quadratic {
        Quadratic {
            p: &(&self.p * &other.p) + &(&(&self.q * &other.q) * beta),
            q: &(&self.p * &other.q) + &(&self.q * &other.p),
        }
    }

    fn pow(&self, e: u32, beta: &MultiPoly) -> Quadratic {
        let mut out = Quadratic {
            p: MultiPoly::one(),
            q: MultiPoly::zero(),
        };
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base, beta);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, beta);
            }
        }
        out
    }

    fn scale(&self, f: &MultiPoly) -> Quadratic {
        Quadratic {
            p: &self.p * f,
            q: &self.q * f,
        }
    }
}

/// Implicit equation in `(x, y)` (and `C`, when symbolic) of the top view of
/// the profile for `k = n/m`, primitive with a positive leading coefficient.
///
/// Extraneous factors from squaring are not removed, so the zero set may
/// contain more than the top view.
pub fn build_implicit_polynomial(n: u64, m: u64, c_mode: CMode) -> Result<MultiPoly> {
    let bound = degree_bound(n, m);
    let (n, m) = reduce(n, m)?;
    let (a_bar, beta) = cleared_branches(n, m);
    let w = w_poly();
    let (e, mu) = if (n + m) % 2 == 0 {
        (((n + m) / 2) as u32, m as u32)
    } else {
        ((n + m) as u32, 2 * m as u32)
    };
    let two_c = match &c_mode {
        CMode::Symbolic => MultiPoly::var(CV).scale(&rat(2, 1)),
        CMode::Numeric(c) => MultiPoly::constant(c * BigRational::from_integer(BigInt::from(2))),
    };
    let lhs = Quadratic {
        p: a_bar.clone(),
        q: MultiPoly::one(),
    }
    .pow(e, &beta)
    .scale(&two_c.pow(mu));
    let rhs = Quadratic {
        p: &a_bar + &w,
        q: MultiPoly::one(),
    }
    .pow(mu, &beta)
    .scale(&w.pow(e));
    let dq = &lhs.q - &rhs.q;
    let dp = &lhs.p - &rhs.p;
    let resultant = &(&beta * &dq.pow(2)) - &dp.pow(2);
    let (stripped, _) = resultant.strip_square_plus_one(T);
    // t = 2x, g = y
    let poly = stripped.scale_var(T, &rat(2, 1)).primitive();
    let degree = poly.degree_xy().unwrap_or(0);
    if degree > bound {
        return Err(CrpcError::DegreeBlowup { degree, bound });
    }
    Ok(poly)
}

/// The degree-six top-view curve for `k = 3`, as printed in the literature:
/// `(C/3 - 1/16 - x^2/4 - y^2/4)(4x^2+1)^2 - (4C^2/9)(4x^2+1) + 6C y^2 (4x^2+3y^2+1)`.
pub fn example_sextic() -> MultiPoly {
    let x2 = MultiPoly::var(0).pow(2);
    let y2 = MultiPoly::var(1).pow(2);
    let c = MultiPoly::var(2);
    let one = MultiPoly::one();
    let q =
        &(&(&c.scale(&rat(1, 3)) - &MultiPoly::constant(rat(1, 16))) - &x2.scale(&rat(1, 4))) - &y2.scale(&rat(1, 4));
    let u = &x2.scale(&rat(4, 1)) + &one;
    let first = &q * &u.pow(2);
    let second = &c.pow(2).scale(&rat(4, 9)) * &u;
    let third = &(&c * &y2).scale(&rat(6, 1)) * &(&(&x2.scale(&rat(4, 1)) + &y2.scale(&rat(3, 1))) + &one);
    &(&first - &second) + &third
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branches_for_k3() {
        let (a, b2) = s_squared_branches(3, 1).unwrap();
        let t2 = MultiPoly::var(T).pow(2);
        let g2 = MultiPoly::var(G).pow(2);
        let w = w_poly();
        let a_expect = RationalFunction::new(
            &(&g2.scale(&rat(18, 1)) + &t2.scale(&rat(2, 1))) + &MultiPoly::from_int(2),
            w.clone(),
        )
        .unwrap();
        assert!(a.same_as(&a_expect));
        let b_expect = RationalFunction::new(
            &g2.scale(&rat(36, 1)) * &(&(&g2.scale(&rat(9, 1)) + &t2.scale(&rat(2, 1))) + &MultiPoly::from_int(2)),
            w.pow(2),
        )
        .unwrap();
        assert!(b2.same_as(&b_expect));
        // A^2 - B^2 is the product of the two roots, ((k+1)/(k-1))^2 = 4
        let prod = a.mul(&a).sub(&b2);
        assert!(prod.same_as(&RationalFunction::new(MultiPoly::from_int(4), MultiPoly::one()).unwrap()));
    }

    #[test]
    fn branches_reproduce_s_squared() {
        use crate::profile::{g_of_s, t_of_s};
        for &(n, m) in &[(3u64, 1u64), (2, 1), (1, 2)] {
            let k = n as f64 / m as f64;
            let c = 2.0;
            let (a, b2) = s_squared_branches(n, m).unwrap();
            let d = crate::params::compute_domain(k, c).unwrap();
            for i in 1..10 {
                let s = d.s0 * (1.0 + 0.1 * i as f64);
                if !d.contains(s) {
                    continue;
                }
                let (t, g) = (t_of_s(s, k, c).unwrap(), g_of_s(s, k, c).unwrap());
                let av = a.eval_f64([t, g, 0.0]);
                let bv = b2.eval_f64([t, g, 0.0]).max(0.0).sqrt();
                let best = (s * s - av - bv).abs().min((s * s - av + bv).abs());
                assert!(best < 1e-10 * s * s, "{n}/{m} s={s}");
            }
        }
    }

    #[test]
    fn k3_is_the_printed_sextic() {
        let p = build_implicit_polynomial(3, 1, CMode::Symbolic).unwrap();
        assert_eq!(p.degree_xy(), Some(6));
        assert_eq!(p, example_sextic().primitive());
    }

    #[test]
    fn degrees_within_bound() {
        for &(n, m, d) in &[(2u64, 1u64, 10u32), (1, 2, 16), (5, 3, 14)] {
            let p = build_implicit_polynomial(n, m, CMode::Symbolic).unwrap();
            assert_eq!(p.degree_xy(), Some(d), "{n}/{m}");
            assert!(d <= degree_bound(n, m));
        }
    }

    #[test]
    fn rejects_k_one() {
        assert!(matches!(
            build_implicit_polynomial(2, 2, CMode::Symbolic),
            Err(CrpcError::InvalidK { .. })
        ));
        assert!(build_implicit_polynomial(0, 1, CMode::Symbolic).is_err());
    }

    #[test]
    fn numeric_c_matches_symbolic() {
        let sym = build_implicit_polynomial(2, 1, CMode::Symbolic).unwrap();
        for c in [rat(1, 1), rat(3, 7), rat(5, 2)] {
            let num = build_implicit_polynomial(2, 1, CMode::Numeric(c.clone())).unwrap();
            assert!(sym.evaluate_var(CV, &c).equal_up_to_scalar(&num));
        }
    }
}
