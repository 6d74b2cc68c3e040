//! Smooth real potentials on the sphere, stored as finite real-harmonic
//! expansions with an optional closed-form polynomial evaluator.
//!
//! The public polynomial grammar (shared with the CLI) is
//!   expr   := ['-'] term (('+'|'-') term)*
//!   term   := factor ('*' factor)*
//!   factor := number | ('x1'|'x2'|'x3') ['^' uint]
//! with real coefficients in the usual decimal or scientific notation.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::SpherePoint;
use crate::harmonics::{synthesize, HarmonicBasis};
use crate::quad::gauss_sphere_rule;

/// One monomial c * x1^a * x2^b * x3^c of an ambient polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    pub powers: [u32; 3],
}

/// A polynomial in the ambient coordinates (x1, x2, x3).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn eval(&self, p: &SpherePoint) -> f64 {
        let v = p.vec();
        self.terms
            .iter()
            .map(|t| {
                t.coeff
                    * v.x.powi(t.powers[0] as i32)
                    * v.y.powi(t.powers[1] as i32)
                    * v.z.powi(t.powers[2] as i32)
            })
            .sum()
    }

    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .map(|t| (t.powers[0] + t.powers[1] + t.powers[2]) as usize)
            .max()
            .unwrap_or(0)
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_digit() || b == b'.' {
                self.pos += 1;
            } else if (b == b'e' || b == b'E')
                && self.pos > start
                && self
                    .bytes
                    .get(self.pos + 1)
                    .is_some_and(|&c| c.is_ascii_digit() || c == b'+' || c == b'-')
            {
                self.pos += 2;
            } else {
                break;
            }
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| self.err("expected a number"))
    }

    fn factor(&mut self) -> Result<Monomial> {
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                let axis = match self.bytes.get(self.pos) {
                    Some(b'1') => 0usize,
                    Some(b'2') => 1,
                    Some(b'3') => 2,
                    _ => return Err(self.err("expected x1, x2 or x3")),
                };
                self.pos += 1;
                let mut powers = [0u32; 3];
                powers[axis] = 1;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    let n = self.number()?;
                    if n.fract() != 0.0 || n < 0.0 {
                        return Err(self.err("exponent must be a nonnegative integer"));
                    }
                    powers[axis] = n as u32;
                }
                Ok(Monomial { coeff: 1.0, powers })
            }
            Some(b) if b.is_ascii_digit() || b == b'.' => Ok(Monomial {
                coeff: self.number()?,
                powers: [0; 3],
            }),
            _ => Err(self.err("expected a number or a variable")),
        }
    }

    fn term(&mut self) -> Result<Monomial> {
        let mut m = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let f = self.factor()?;
            m.coeff *= f.coeff;
            for i in 0..3 {
                m.powers[i] += f.powers[i];
            }
        }
        Ok(m)
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut terms = Vec::new();
        let mut sign = 1.0;
        if self.peek() == Some(b'-') {
            self.pos += 1;
            sign = -1.0;
        } else if self.peek() == Some(b'+') {
            self.pos += 1;
        }
        loop {
            let mut t = self.term()?;
            t.coeff *= sign;
            terms.push(t);
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    sign = 1.0;
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -1.0;
                }
                None => break,
                Some(c) => {
                    return Err(self.err(format!("unexpected character '{}'", c as char)))
                }
            }
        }
        Ok(Polynomial { terms })
    }
}

/// Parses the public polynomial grammar.
pub fn parse_polynomial(src: &str) -> Result<Polynomial> {
    let mut p = Parser {
        bytes: src.as_bytes(),
        pos: 0,
    };
    p.expr()
}

/// A potential on the sphere: real-harmonic coefficients up to a degree
/// cutoff, plus the closed form it came from when one exists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub coeffs: Vec<f64>,
    pub l_max: usize,
    pub closed_form: Option<Polynomial>,
}

impl PotentialSpec {
    pub fn basis(&self) -> HarmonicBasis {
        HarmonicBasis::new(self.l_max)
    }

    /// From explicit harmonic coefficients (l, m, c).
    pub fn from_harmonics(entries: &[(usize, i64, f64)]) -> Result<Self> {
        let l_max = entries.iter().map(|e| e.0).max().unwrap_or(0);
        let basis = HarmonicBasis::new(l_max);
        let mut coeffs = vec![0.0; basis.dim()];
        for &(l, m, c) in entries {
            coeffs[basis.index(l, m)?] += c;
        }
        Ok(PotentialSpec {
            coeffs,
            l_max,
            closed_form: None,
        })
    }

    /// From an ambient polynomial, projected exactly onto harmonics with a
    /// Gauss rule of sufficient order.
    pub fn from_polynomial(poly: Polynomial) -> Self {
        let deg = poly.degree();
        let basis = HarmonicBasis::new(deg);
        // integrand degree <= 2*deg, rule(L) is exact through degree 2L
        let grid = gauss_sphere_rule(deg + 1);
        let mut coeffs = vec![0.0; basis.dim()];
        for (p, w) in grid.nodes.iter().zip(&grid.weights) {
            let v = poly.eval(p);
            let b = crate::harmonics::eval_basis(deg, p);
            for (c, bi) in coeffs.iter_mut().zip(&b) {
                *c += w * v * bi;
            }
        }
        // wash out projection roundoff on exactly-zero coefficients
        for c in coeffs.iter_mut() {
            if c.abs() < 1e-13 {
                *c = 0.0;
            }
        }
        PotentialSpec {
            coeffs,
            l_max: deg,
            closed_form: Some(poly),
        }
    }

    pub fn parse_closed_form(src: &str) -> Result<Self> {
        Ok(Self::from_polynomial(parse_polynomial(src)?))
    }

    pub fn constant(c: f64) -> Self {
        PotentialSpec {
            coeffs: vec![c * (4.0 * std::f64::consts::PI).sqrt()],
            l_max: 0,
            closed_form: Some(Polynomial {
                terms: vec![Monomial {
                    coeff: c,
                    powers: [0; 3],
                }],
            }),
        }
    }

    /// Shipped example potentials.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "quadratic" => Self::parse_closed_form("x1^2 + 2*x2^2 + 3*x3^2"),
            "zonal" => Self::parse_closed_form("x3^2"),
            "odd" => Self::parse_closed_form("x3"),
            "constant" => Ok(Self::constant(1.0)),
            other => Err(Error::invalid(format!("unknown potential preset '{other}'"))),
        }
    }

    /// Evaluates the harmonic synthesis.
    pub fn eval(&self, p: &SpherePoint) -> f64 {
        synthesize(&self.coeffs, self.l_max, p)
    }

    /// Largest deviation between synthesis and closed form over sampled
    /// points; zero when no closed form is attached.
    pub fn projection_defect(&self, samples: &[SpherePoint]) -> f64 {
        match &self.closed_form {
            None => 0.0,
            Some(poly) => samples
                .iter()
                .map(|p| (self.eval(p) - poly.eval(p)).abs())
                .fold(0.0, f64::max),
        }
    }

    /// The potential composed with the inverse rotation, i.e. the potential
    /// "carried along" by `rot`. Degree is preserved; coefficients are
    /// recovered by exact re-projection.
    pub fn rotated(&self, rot: &Matrix3<f64>) -> Self {
        let inv = rot.transpose();
        let l_max = self.l_max;
        let grid = gauss_sphere_rule(l_max + 1);
        let mut coeffs = vec![0.0; (l_max + 1) * (l_max + 1)];
        for (p, w) in grid.nodes.iter().zip(&grid.weights) {
            let v = self.eval(&p.rotate(&inv));
            let b = crate::harmonics::eval_basis(l_max, p);
            for (c, bi) in coeffs.iter_mut().zip(&b) {
                *c += w * v * bi;
            }
        }
        PotentialSpec {
            coeffs,
            l_max,
            closed_form: None,
        }
    }

    /// Max harmonic degree carrying a nonzero coefficient.
    pub fn effective_degree(&self) -> usize {
        let basis = self.basis();
        (0..self.coeffs.len())
            .filter(|&i| self.coeffs[i] != 0.0)
            .map(|i| basis.degree(i))
            .max()
            .unwrap_or(0)
    }

    /// Canonical byte representation, used for cache keys.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 8 * self.coeffs.len());
        out.extend_from_slice(&(self.l_max as u64).to_le_bytes());
        for c in &self.coeffs {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::sphere_grid;
    use rand::{Rng, SeedableRng};

    #[test]
    fn parses_quadratic() {
        let poly = parse_polynomial("x1^2 + 2*x2^2 + 3*x3^2").unwrap();
        assert_eq!(poly.terms.len(), 3);
        let p = SpherePoint::new(1.0, 1.0, 1.0).unwrap();
        // on the unit sphere at (1,1,1)/sqrt(3): (1 + 2 + 3)/3 = 2
        assert!((poly.eval(&p) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn parses_signs_and_scientific() {
        let poly = parse_polynomial("-0.5*x1*x2 + 1e-2*x3^3 - 4").unwrap();
        assert_eq!(poly.degree(), 3);
        let p = SpherePoint::z_axis();
        assert!((poly.eval(&p) - (0.01 - 4.0)).abs() < 1e-14);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_polynomial("x4 + 1").is_err());
        assert!(parse_polynomial("2 ** x1").is_err());
        assert!(parse_polynomial("x1^-2").is_err());
        assert!(parse_polynomial("").is_err());
    }

    #[test]
    fn projection_matches_closed_form() {
        let v = PotentialSpec::preset("quadratic").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let samples: Vec<SpherePoint> = (0..100)
            .map(|_| {
                SpherePoint::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )
                .unwrap()
            })
            .collect();
        assert!(v.projection_defect(&samples) < 1e-8);
    }

    #[test]
    fn constant_potential_is_degree_zero() {
        let v = PotentialSpec::constant(5.0);
        assert_eq!(v.effective_degree(), 0);
        assert!((v.eval(&SpherePoint::x_axis()) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_preserves_values() {
        let v = PotentialSpec::preset("quadratic").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let rot = crate::geom::random_rotation(&mut rng);
        let vr = v.rotated(&rot);
        for p in sphere_grid(50).nodes {
            let expected = v.eval(&p.rotate(&rot.transpose()));
            assert!((vr.eval(&p) - expected).abs() < 1e-9);
        }
    }
}
