//! Closed-form holomorphic functions with exact first partials.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{BlochError, Result};
use crate::polydisk::MultiIndex;
use crate::testfn::{rising_coefficients, TestFunction};

use super::{HoloFunction, Jet, Series};

/// Smallest admissible `|1 - conj(w) z|` before a kernel is treated as singular.
pub const KERNEL_FLOOR: f64 = 1e-12;

/// A user-supplied evaluator pairing the value with all first partials.
///
/// Such functions cannot be differentiated further or truncated.
pub trait JetEvaluator: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn jet(&self, z: &[Complex64]) -> Result<Jet>;
    fn label(&self) -> String {
        "custom evaluator".to_string()
    }
}

/// `base^s`, with the principal branch for non-integer `s`.
pub(crate) fn cpow(base: Complex64, s: f64) -> Complex64 {
    if s.fract() == 0.0 && s.abs() <= 64.0 {
        base.powi(s as i32)
    } else {
        base.powf(s)
    }
}

pub(crate) fn kernel_base(w: Complex64, zl: Complex64) -> Result<Complex64> {
    let base = Complex64::new(1.0, 0.0) - w.conj() * zl;
    if base.norm() < KERNEL_FLOOR {
        return Err(BlochError::Singular(format!(
            "|1 - conj(w) z| = {:e} below {KERNEL_FLOOR:e} (w = {w}, z = {zl})",
            base.norm()
        )));
    }
    Ok(base)
}

fn check_dim(expected: usize, z: &[Complex64]) -> Result<()> {
    if z.len() != expected {
        return Err(BlochError::DimensionMismatch { expected, got: z.len() });
    }
    Ok(())
}

/// `e^{iθ} (z_s - a) / (1 - conj(a) z_s)`, a disk automorphism acting on
/// coordinate `source`.
#[derive(Clone, Debug, PartialEq)]
pub struct Moebius {
    pub dim: usize,
    pub source: usize,
    pub a: Complex64,
    pub theta: f64,
}

impl Moebius {
    pub fn new(dim: usize, source: usize, a: Complex64, theta: f64) -> Result<Self> {
        if source >= dim {
            return Err(BlochError::IndexOutOfRange { index: source, dim });
        }
        if !(a.norm() < 1.0) {
            return Err(BlochError::InvalidParameter(format!("Möbius parameter |a| = {} must be < 1", a.norm())));
        }
        Ok(Self { dim, source, a, theta })
    }

    fn rotation(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }

    pub fn jet(&self, z: &[Complex64]) -> Result<Jet> {
        check_dim(self.dim, z)?;
        let zs = z[self.source];
        let denom = kernel_base(self.a, zs)?;
        let rot = self.rotation();
        let value = rot * (zs - self.a) / denom;
        let mut gradient = vec![Complex64::new(0.0, 0.0); self.dim];
        gradient[self.source] = rot * (1.0 - self.a.norm_sqr()) / (denom * denom);
        Ok(Jet { value, gradient })
    }

    fn derivative(&self) -> Kernel {
        Kernel {
            dim: self.dim,
            var: self.source,
            coef: self.rotation() * (1.0 - self.a.norm_sqr()),
            w: self.a,
            exponent: 2.0,
        }
    }

    /// Taylor polynomial: `e^{iθ}(-a + Σ_{j≥1} (1-|a|^2) conj(a)^{j-1} z^j)`.
    pub fn truncate(&self, m: usize) -> Series {
        let rot = self.rotation();
        let mut s = Series::constant(self.dim, -rot * self.a);
        let weight = 1.0 - self.a.norm_sqr();
        let mut abar_pow = Complex64::new(1.0, 0.0);
        for j in 1..=m {
            let mut idx = MultiIndex::zero(self.dim);
            idx.0[self.source] = j as u32;
            s.add_term(idx, rot * weight * abar_pow);
            abar_pow *= self.a.conj();
        }
        s
    }
}

/// `coef · (1 - conj(w) z_var)^{-exponent}`; closed under differentiation.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    pub dim: usize,
    pub var: usize,
    pub coef: Complex64,
    pub w: Complex64,
    pub exponent: f64,
}

impl Kernel {
    pub fn jet(&self, z: &[Complex64]) -> Result<Jet> {
        check_dim(self.dim, z)?;
        let base = kernel_base(self.w, z[self.var])?;
        let value = self.coef * cpow(base, -self.exponent);
        let mut gradient = vec![Complex64::new(0.0, 0.0); self.dim];
        gradient[self.var] = self.coef * self.exponent * self.w.conj() * cpow(base, -self.exponent - 1.0);
        Ok(Jet { value, gradient })
    }

    fn derivative(&self) -> Kernel {
        Kernel {
            coef: self.coef * self.exponent * self.w.conj(),
            exponent: self.exponent + 1.0,
            ..self.clone()
        }
    }

    pub fn truncate(&self, m: usize) -> Series {
        let coeffs = rising_coefficients(self.exponent, m);
        let mut s = Series::zero(self.dim);
        let mut wbar_pow = Complex64::new(1.0, 0.0);
        for (j, cj) in coeffs.iter().enumerate() {
            let mut idx = MultiIndex::zero(self.dim);
            idx.0[self.var] = j as u32;
            s.add_term(idx, self.coef * *cj * wbar_pow);
            wbar_pow *= self.w.conj();
        }
        s
    }
}

#[derive(Clone, Debug)]
pub enum ClosedForm {
    Moebius(Moebius),
    Kernel(Kernel),
    Test(TestFunction),
    Custom(Arc<dyn JetEvaluator>),
}

impl ClosedForm {
    pub fn dim(&self) -> usize {
        match self {
            ClosedForm::Moebius(m) => m.dim,
            ClosedForm::Kernel(k) => k.dim,
            ClosedForm::Test(t) => t.dim(),
            ClosedForm::Custom(c) => c.dim(),
        }
    }

    pub fn jet(&self, z: &[Complex64]) -> Result<Jet> {
        match self {
            ClosedForm::Moebius(m) => m.jet(z),
            ClosedForm::Kernel(k) => k.jet(z),
            ClosedForm::Test(t) => t.jet(z),
            ClosedForm::Custom(c) => {
                check_dim(c.dim(), z)?;
                c.jet(z)
            }
        }
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        match self {
            ClosedForm::Test(t) => t.eval(z),
            _ => Ok(self.jet(z)?.value),
        }
    }

    pub fn partial(&self, k: usize) -> Result<HoloFunction> {
        let dim = self.dim();
        if k >= dim {
            return Err(BlochError::IndexOutOfRange { index: k, dim });
        }
        match self {
            ClosedForm::Moebius(m) if k == m.source => Ok(HoloFunction::Closed(ClosedForm::Kernel(m.derivative()))),
            ClosedForm::Kernel(kr) if k == kr.var => Ok(HoloFunction::Closed(ClosedForm::Kernel(kr.derivative()))),
            ClosedForm::Moebius(_) | ClosedForm::Kernel(_) => Ok(HoloFunction::zero(dim)),
            ClosedForm::Test(t) => t.partial(k),
            ClosedForm::Custom(c) => Err(BlochError::DerivativeUnavailable(c.label())),
        }
    }

    pub fn truncate(&self, m: usize) -> Result<Series> {
        match self {
            ClosedForm::Moebius(mb) => Ok(mb.truncate(m)),
            ClosedForm::Kernel(k) => Ok(k.truncate(m)),
            ClosedForm::Test(t) => Ok(t.truncate(m)),
            ClosedForm::Custom(c) => Err(BlochError::TruncationUnavailable(c.label())),
        }
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        match self {
            ClosedForm::Moebius(m) => format!(
                "moebius(z_{}; a = {}, θ = {:.4}π)",
                m.source + 1,
                m.a,
                m.theta / PI
            ),
            ClosedForm::Kernel(k) => format!("{} (1 - conj({}) z_{})^-{}", k.coef, k.w, k.var + 1, k.exponent),
            ClosedForm::Test(t) => t.describe(),
            ClosedForm::Custom(c) => c.label(),
        }
    }
}
