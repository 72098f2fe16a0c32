//! Dense multivectors over Cl(3,0,1).

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use super::blade::{
    idx, BLADE_COUNT, BLADE_NAMES, DUAL, GEOMETRIC, GRADE, INVOLUTION_SIGN, IS_EUCLIDEAN, JOIN,
    OUTER, REVERSE_SIGN, UNDUAL,
};
use super::PgaError;

/// Absolute tolerance for unit-norm checks on versors and normalized inputs.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// A dense element of Cl(3,0,1): 16 coefficients in the canonical blade order
/// `[1, e0, e1, e2, e3, e01, e02, e03, e12, e13, e23, e012, e013, e023, e123, e0123]`.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct Multivector {
    coeffs: [f64; BLADE_COUNT],
}

impl Multivector {
    pub const ZERO: Multivector = Multivector {
        coeffs: [0.0; BLADE_COUNT],
    };

    pub fn new(coeffs: [f64; BLADE_COUNT]) -> Self {
        Multivector { coeffs }
    }

    pub fn scalar(s: f64) -> Self {
        let mut mv = Self::ZERO;
        mv.coeffs[idx::SCALAR] = s;
        mv
    }

    /// Basis blade by canonical index.
    pub fn basis(i: usize) -> Self {
        assert!(i < BLADE_COUNT, "blade index {i} out of range");
        let mut mv = Self::ZERO;
        mv.coeffs[i] = 1.0;
        mv
    }

    /// Grade-1 element with Euclidean part (x, y, z) and e0 part w.
    pub fn vector(w: f64, x: f64, y: f64, z: f64) -> Self {
        let mut mv = Self::ZERO;
        mv.coeffs[idx::E0] = w;
        mv.coeffs[idx::E1] = x;
        mv.coeffs[idx::E2] = y;
        mv.coeffs[idx::E3] = z;
        mv
    }

    pub fn coeffs(&self) -> &[f64; BLADE_COUNT] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64; BLADE_COUNT] {
        &mut self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Geometric product.
    pub fn geometric_product(&self, rhs: &Multivector) -> Multivector {
        let mut out = Multivector::ZERO;
        for i in 0..BLADE_COUNT {
            let a = self.coeffs[i];
            if a == 0.0 {
                continue;
            }
            let row = &GEOMETRIC[i];
            for j in 0..BLADE_COUNT {
                let e = row[j];
                out.coeffs[e.target] += e.sign as f64 * a * rhs.coeffs[j];
            }
        }
        out
    }

    /// Outer product (the meet).
    pub fn outer_product(&self, rhs: &Multivector) -> Multivector {
        let mut out = Multivector::ZERO;
        for i in 0..BLADE_COUNT {
            let a = self.coeffs[i];
            if a == 0.0 {
                continue;
            }
            let row = &OUTER[i];
            for j in 0..BLADE_COUNT {
                let e = row[j];
                if e.sign != 0 {
                    out.coeffs[e.target] += e.sign as f64 * a * rhs.coeffs[j];
                }
            }
        }
        out
    }

    /// Join: `undual(dual(rhs) ^ dual(self))`.
    pub fn join(&self, rhs: &Multivector) -> Multivector {
        let mut out = Multivector::ZERO;
        for i in 0..BLADE_COUNT {
            let a = self.coeffs[i];
            if a == 0.0 {
                continue;
            }
            let row = &JOIN[i];
            for j in 0..BLADE_COUNT {
                let e = row[j];
                if e.sign != 0 {
                    out.coeffs[e.target] += e.sign as f64 * a * rhs.coeffs[j];
                }
            }
        }
        out
    }

    /// Inner product of two grade-1 elements: the symmetric part of their
    /// geometric product. The e0 components contribute nothing.
    pub fn inner_product_vectors(&self, rhs: &Multivector) -> Result<f64, PgaError> {
        for mv in [self, rhs] {
            for i in 0..BLADE_COUNT {
                if GRADE[i] != 1 && mv.coeffs[i] != 0.0 {
                    return Err(PgaError::NotAVector {
                        blade: BLADE_NAMES[i],
                    });
                }
            }
        }
        let ab = self.geometric_product(rhs);
        let ba = rhs.geometric_product(self);
        Ok(0.5 * (ab.coeffs[idx::SCALAR] + ba.coeffs[idx::SCALAR]))
    }

    /// Reversion: sign flip on grades 2 and 3.
    pub fn reverse(&self) -> Multivector {
        let mut out = *self;
        for i in 0..BLADE_COUNT {
            out.coeffs[i] *= REVERSE_SIGN[i];
        }
        out
    }

    /// Grade involution: sign flip on odd grades.
    pub fn grade_involution(&self) -> Multivector {
        let mut out = *self;
        for i in 0..BLADE_COUNT {
            out.coeffs[i] *= INVOLUTION_SIGN[i];
        }
        out
    }

    /// Projection onto grade `k` (0..=4).
    pub fn grade_project(&self, k: usize) -> Multivector {
        assert!(k <= 4, "grade {k} out of range 0..=4");
        let mut out = Multivector::ZERO;
        for i in 0..BLADE_COUNT {
            if GRADE[i] == k {
                out.coeffs[i] = self.coeffs[i];
            }
        }
        out
    }

    /// Scalar part.
    pub fn scalar_part(&self) -> f64 {
        self.coeffs[idx::SCALAR]
    }

    /// Norm `sqrt(<reverse(x) x>_0)`; blades containing e0 contribute zero.
    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn norm_squared(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..BLADE_COUNT {
            if IS_EUCLIDEAN[i] {
                s += self.coeffs[i] * self.coeffs[i];
            }
        }
        s
    }

    /// Infinity norm: the norm of the Hodge dual, i.e. of the e0-carrying part.
    pub fn infinity_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..BLADE_COUNT {
            if !IS_EUCLIDEAN[i] {
                s += self.coeffs[i] * self.coeffs[i];
            }
        }
        s.sqrt()
    }

    /// Hodge dual, blade-wise.
    pub fn hodge_dual(&self) -> Multivector {
        let mut out = Multivector::ZERO;
        for i in 0..BLADE_COUNT {
            let e = DUAL[i];
            out.coeffs[e.target] = e.sign as f64 * self.coeffs[i];
        }
        out
    }

    /// Inverse Hodge dual: `inverse_hodge_dual(hodge_dual(x)) = x`.
    pub fn inverse_hodge_dual(&self) -> Multivector {
        let mut out = Multivector::ZERO;
        for i in 0..BLADE_COUNT {
            let e = UNDUAL[i];
            out.coeffs[e.target] = e.sign as f64 * self.coeffs[i];
        }
        out
    }

    /// Sandwich action of a unit versor. Odd versors (products of an odd
    /// number of reflection planes) act through the grade involution of the
    /// operand; even versors act directly: `v x~v` resp. `v x^ ~v`.
    pub fn sandwich(versor: &Multivector, x: &Multivector, odd: bool) -> Result<Multivector, PgaError> {
        let n = versor.norm();
        if (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(PgaError::NotUnitVersor { norm: n });
        }
        Ok(Self::sandwich_unchecked(versor, x, odd))
    }

    /// Sandwich without the unit-norm check; callers guarantee the invariant.
    pub fn sandwich_unchecked(versor: &Multivector, x: &Multivector, odd: bool) -> Multivector {
        let core = if odd { x.grade_involution() } else { *x };
        versor
            .geometric_product(&core)
            .geometric_product(&versor.reverse())
    }

    pub fn scale(&self, s: f64) -> Multivector {
        let mut out = *self;
        for c in &mut out.coeffs {
            *c *= s;
        }
        out
    }
}

impl Index<usize> for Multivector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coeffs[i]
    }
}

impl IndexMut<usize> for Multivector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.coeffs[i]
    }
}

impl Add for Multivector {
    type Output = Multivector;
    fn add(mut self, rhs: Multivector) -> Multivector {
        for i in 0..BLADE_COUNT {
            self.coeffs[i] += rhs.coeffs[i];
        }
        self
    }
}

impl AddAssign for Multivector {
    fn add_assign(&mut self, rhs: Multivector) {
        for i in 0..BLADE_COUNT {
            self.coeffs[i] += rhs.coeffs[i];
        }
    }
}

impl Sub for Multivector {
    type Output = Multivector;
    fn sub(mut self, rhs: Multivector) -> Multivector {
        for i in 0..BLADE_COUNT {
            self.coeffs[i] -= rhs.coeffs[i];
        }
        self
    }
}

impl SubAssign for Multivector {
    fn sub_assign(&mut self, rhs: Multivector) {
        for i in 0..BLADE_COUNT {
            self.coeffs[i] -= rhs.coeffs[i];
        }
    }
}

impl Neg for Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        self.scale(-1.0)
    }
}

impl Mul for Multivector {
    type Output = Multivector;
    fn mul(self, rhs: Multivector) -> Multivector {
        self.geometric_product(&rhs)
    }
}

impl Mul<f64> for Multivector {
    type Output = Multivector;
    fn mul(self, s: f64) -> Multivector {
        self.scale(s)
    }
}

impl fmt::Debug for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in 0..BLADE_COUNT {
            if self.coeffs[i] != 0.0 {
                if !first {
                    write!(f, " + ")?;
                }
                write!(f, "{}*{}", self.coeffs[i], BLADE_NAMES[i])?;
                first = false;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Maximum absolute coefficient difference between two multivectors.
pub fn max_abs_diff(a: &Multivector, b: &Multivector) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..BLADE_COUNT {
        m = m.max((a.coeffs()[i] - b.coeffs()[i]).abs());
    }
    m
}

/// Iterator over all 16 basis blades.
pub fn basis_blades() -> impl Iterator<Item = Multivector> {
    (0..BLADE_COUNT).map(Multivector::basis)
}
