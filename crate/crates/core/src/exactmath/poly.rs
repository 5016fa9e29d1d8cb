//! Univariate polynomials over `Q(i)`, minimal polynomials of matrices and
//! rational root extraction.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::gauss::GaussRational as G;
use super::qimat::{solve_combination, QIMatrix};

/// Coefficients from the constant term upwards, without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: Vec<G>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<G>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| G::from(c)).collect())
    }

    /// `t - λ`
    pub fn linear(lambda: &G) -> Self {
        Poly::new(vec![-lambda, G::one()])
    }

    pub fn coeffs(&self) -> &[G] {
        &self.coeffs
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(One::is_one)
    }

    pub fn eval(&self, x: &G) -> G {
        self.coeffs
            .iter()
            .rev()
            .fold(G::zero(), |acc, c| &(&acc * x) + c)
    }

    pub fn eval_matrix(&self, a: &QIMatrix) -> QIMatrix {
        let r = a.size();
        let mut acc = QIMatrix::zero(r);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(a).add(&QIMatrix::identity(r).scale(c));
        }
        acc
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return Poly::new(vec![]);
        }
        let mut out = vec![G::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += &(a * b);
            }
        }
        Poly::new(out)
    }

    /// Synthetic division by `t - λ`; returns quotient and remainder.
    pub fn div_linear(&self, lambda: &G) -> (Poly, G) {
        if self.coeffs.is_empty() {
            return (Poly::new(vec![]), G::zero());
        }
        let n = self.coeffs.len();
        let mut q = vec![G::zero(); n - 1];
        let mut carry = G::zero();
        for k in (0..n).rev() {
            let v = &self.coeffs[k] + &(&carry * lambda);
            if k == 0 {
                return (Poly::new(q), v);
            }
            q[k - 1] = v.clone();
            carry = v;
        }
        unreachable!()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match k {
                0 => String::new(),
                1 => "t".to_string(),
                _ => format!("t^{k}"),
            };
            let simple = c.is_real() || c.re.is_zero();
            let neg = if simple {
                c.re.is_negative() || (c.re.is_zero() && c.im.is_negative())
            } else {
                false
            };
            let abs = if neg { -c } else { c.clone() };
            let coef = if abs.is_one() && k > 0 {
                String::new()
            } else if simple {
                abs.to_string()
            } else {
                format!("({abs})")
            };
            let sep = match (first, neg) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => "-",
                (false, false) => "+",
            };
            write!(f, "{sep}{coef}{mono}")?;
            first = false;
        }
        Ok(())
    }
}

/// Monic polynomial of least degree annihilating `a`, from the first linear
/// dependency among `I, a, a², …`.
pub fn minimal_polynomial(a: &QIMatrix) -> Poly {
    let r = a.size();
    let mut powers = vec![QIMatrix::identity(r).entries().to_vec()];
    let mut cur = QIMatrix::identity(r);
    for _ in 0..=r * r {
        cur = cur.mul(a);
        let target = cur.entries().to_vec();
        if let Some(sol) = solve_combination(&powers, &target) {
            let mut coeffs: Vec<G> = sol.iter().map(|c| -c).collect();
            coeffs.push(G::one());
            return Poly::new(coeffs);
        }
        powers.push(target);
    }
    unreachable!("Cayley–Hamilton bounds the degree by r")
}

/// Outcome of splitting off all roots that lie in `Q(i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootSplit {
    /// Distinct roots, in discovery order.
    pub roots: Vec<G>,
    /// Monic factor left after removing every linear factor found; has no
    /// roots in `Q(i)` unless the candidate search was cut off.
    pub residual: Poly,
    /// True when coefficient sizes exceeded the divisor search cap.
    pub truncated: bool,
}

const NORM_CAP: i64 = 40_000;

fn gauss_int_coeffs(p: &Poly) -> Vec<(BigInt, BigInt)> {
    let lcm = p.coeffs().iter().fold(BigInt::one(), |acc, c| {
        acc.lcm(c.re.denom()).lcm(c.im.denom())
    });
    p.coeffs()
        .iter()
        .map(|c| {
            let re = (&c.re * &lcm).to_integer();
            let im = (&c.im * &lcm).to_integer();
            (re, im)
        })
        .collect()
}

/// All Gaussian integers dividing `z`, associates included. `None` when the norm is beyond the search cap.
fn gaussian_divisors(z: &(BigInt, BigInt)) -> Option<Vec<(i64, i64)>> {
    let n = (&z.0 * &z.0 + &z.1 * &z.1).to_i64()?;
    if n == 0 || n > NORM_CAP {
        return None;
    }
    let (zr, zi) = (z.0.to_i64()?, z.1.to_i64()?);
    let bound = (n as f64).sqrt() as i64 + 1;
    let mut out = Vec::new();
    for x in -bound..=bound {
        for y in -bound..=bound {
            let d = x * x + y * y;
            if d == 0 || n % d != 0 {
                continue;
            }
            // z / (x+iy) = z (x-iy) / d
            let re = zr * x + zi * y;
            let im = zi * x - zr * y;
            if re % d == 0 && im % d == 0 {
                out.push((x, y));
            }
        }
    }
    Some(out)
}

/// Finds every root of `p` in `Q(i)` by the rational root theorem over the
/// Gaussian integers, deflating as roots are found.
pub fn roots_in_qi(p: &Poly) -> RootSplit {
    let lead = p.coeffs().last().cloned().unwrap_or_else(G::one);
    let mut rest = Poly::new(p.coeffs().iter().map(|c| c.clone() / lead.clone()).collect());
    let mut roots = Vec::new();
    let mut truncated = false;
    // zero roots
    while rest.coeffs().first().is_some_and(Zero::is_zero) && rest.degree() > Some(0) {
        if !roots.contains(&G::zero()) {
            roots.push(G::zero());
        }
        rest = rest.div_linear(&G::zero()).0;
    }
    loop {
        if rest.degree().unwrap_or(0) == 0 {
            break;
        }
        let ints = gauss_int_coeffs(&rest);
        let (Some(num), Some(den)) = (
            gaussian_divisors(&ints[0]),
            gaussian_divisors(ints.last().unwrap()),
        ) else {
            truncated = true;
            break;
        };
        let mut found = None;
        'search: for a in &num {
            for b in &den {
                let cand = G::from_parts(a.0, 1, a.1, 1)
                    .checked_div(&G::from_parts(b.0, 1, b.1, 1))
                    .unwrap();
                if rest.eval(&cand).is_zero() {
                    found = Some(cand);
                    break 'search;
                }
            }
        }
        match found {
            Some(lambda) => {
                rest = rest.div_linear(&lambda).0;
                if !roots.contains(&lambda) {
                    roots.push(lambda);
                }
            }
            None => break,
        }
    }
    RootSplit {
        roots,
        residual: rest,
        truncated,
    }
}
