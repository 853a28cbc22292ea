//! The three test-function families on the polydisk.
//!
//! For `p > 0`, a coordinate index `l` and `w` in the unit disk:
//!
//! * `F`: `f(z) = ∫_0^{z_l} (1 - conj(w) t)^{-p} dt`
//! * `G`: `g(z) = (1 - |w|^2) / (1 - conj(w) z_l)^p`
//! * `H`: `h(z) = (z_1 + 2) (1 - |w|^2)^{p-1} g(z)`, only for `l ≠ 1`
//!
//! Each family has uniformly bounded `B^p` norms in `w` (claimed), explicit
//! polynomial truncations, and a tail bound for those truncations.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BlochError, Result};
use crate::holo::{cpow, kernel_base, ClosedForm, HoloFunction, Jet, Kernel, Series};
use crate::polydisk::MultiIndex;

/// Relative accuracy of the antiderivative series used by family `F`.
const F_SERIES_RTOL: f64 = 1e-14;
const F_SERIES_MAX_TERMS: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    F,
    G,
    H,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::F => "F",
            Family::G => "G",
            Family::H => "H",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Family {
    type Err = BlochError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "F" | "f" | "1" => Ok(Family::F),
            "G" | "g" | "2" => Ok(Family::G),
            "H" | "h" | "3" => Ok(Family::H),
            other => Err(BlochError::Spec(format!("unknown test family {other:?}"))),
        }
    }
}

/// Coefficients `c_j = p(p+1)...(p+j-1)/j!` for `j = 0..=m`.
pub fn rising_coefficients(p: f64, m: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(m + 1);
    let mut c = 1.0;
    for j in 0..=m {
        out.push(c);
        c *= (p + j as f64) / (j as f64 + 1.0);
    }
    out
}

/// A member of one of the families, living on `C^n` with 0-based index `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    family: Family,
    dim: usize,
    l: usize,
    w: Complex64,
    p: f64,
}

impl TestFunction {
    pub fn new(family: Family, dim: usize, l: usize, w: Complex64, p: f64) -> Result<Self> {
        if l >= dim {
            return Err(BlochError::IndexOutOfRange { index: l, dim });
        }
        if !(w.norm() < 1.0) {
            return Err(BlochError::InvalidParameter(format!("test function parameter |w| = {} must be < 1", w.norm())));
        }
        if !(p > 0.0) || !p.is_finite() {
            return Err(BlochError::InvalidParameter(format!("exponent p = {p} must be positive")));
        }
        if family == Family::H && (dim < 2 || l == 0) {
            return Err(BlochError::InvalidParameter("family H needs n >= 2 and l != 1".into()));
        }
        Ok(Self { family, dim, l, w, p })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// 0-based coordinate index.
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn w(&self) -> Complex64 {
        self.w
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn to_holo(&self) -> HoloFunction {
        HoloFunction::Closed(ClosedForm::Test(self.clone()))
    }

    fn check_point(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.dim {
            return Err(BlochError::DimensionMismatch { expected: self.dim, got: z.len() });
        }
        Ok(())
    }

    fn weight(&self) -> f64 {
        1.0 - self.w.norm_sqr()
    }

    /// Sum of the antiderivative series `Σ_j c_j conj(w)^j z^{j+1}/(j+1)`.
    fn f_value(&self, zl: Complex64) -> Result<Complex64> {
        let wbar = self.w.conj();
        let q = (wbar * zl).norm();
        if q >= 1.0 {
            return Err(BlochError::Singular(format!("|conj(w) z_l| = {q} >= 1")));
        }
        let mut sum = Complex64::new(0.0, 0.0);
        // term_j = c_j conj(w)^j z^{j+1} / (j+1), tracked through its power part.
        let mut power = zl;
        let mut c = 1.0;
        for j in 0..F_SERIES_MAX_TERMS {
            let jf = j as f64;
            let term = power * (c / (jf + 1.0));
            sum += term;
            if term.norm() == 0.0 {
                return Ok(sum);
            }
            // Ratio bound for the remaining terms.
            let ratio = q * ((self.p + jf) / (jf + 2.0)).max(1.0);
            if ratio < 1.0 && term.norm() * ratio / (1.0 - ratio) <= F_SERIES_RTOL * sum.norm() {
                return Ok(sum);
            }
            c *= (self.p + jf) / (jf + 1.0);
            power *= wbar * zl;
        }
        Err(BlochError::NotConverged { terms: F_SERIES_MAX_TERMS })
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        self.check_point(z)?;
        let zl = z[self.l];
        match self.family {
            Family::F => self.f_value(zl),
            Family::G => Ok(self.weight() * cpow(kernel_base(self.w, zl)?, -self.p)),
            Family::H => {
                let g = self.weight() * cpow(kernel_base(self.w, zl)?, -self.p);
                Ok((z[0] + 2.0) * self.weight().powf(self.p - 1.0) * g)
            }
        }
    }

    /// Value and partials, using the closed-form derivative formulas.
    pub fn jet(&self, z: &[Complex64]) -> Result<Jet> {
        let gradient = self.gradient(z)?;
        Ok(Jet { value: self.eval(z)?, gradient })
    }

    /// All first partials at `z`.
    pub fn gradient(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_point(z)?;
        let zl = z[self.l];
        let base = kernel_base(self.w, zl)?;
        let wbar = self.w.conj();
        let p = self.p;
        let mut gradient = vec![Complex64::new(0.0, 0.0); self.dim];
        match self.family {
            Family::F => gradient[self.l] = cpow(base, -p),
            Family::G => gradient[self.l] = p * wbar * self.weight() * cpow(base, -(p + 1.0)),
            Family::H => {
                let wp = self.weight().powf(p);
                gradient[0] = wp * cpow(base, -p);
                gradient[self.l] = p * (z[0] + 2.0) * wbar * wp * cpow(base, -(p + 1.0));
            }
        }
        Ok(gradient)
    }

    fn kernel(&self, coef: Complex64, exponent: f64) -> HoloFunction {
        HoloFunction::Closed(ClosedForm::Kernel(Kernel { dim: self.dim, var: self.l, coef, w: self.w, exponent }))
    }

    pub fn partial(&self, k: usize) -> Result<HoloFunction> {
        if k >= self.dim {
            return Err(BlochError::IndexOutOfRange { index: k, dim: self.dim });
        }
        let one = Complex64::new(1.0, 0.0);
        let p = self.p;
        let wbar = self.w.conj();
        Ok(match (self.family, k) {
            (Family::F, k) if k == self.l => self.kernel(one, p),
            (Family::G, k) if k == self.l => self.kernel(p * wbar * self.weight(), p + 1.0),
            (Family::H, 0) => self.kernel(self.weight().powf(p) * one, p),
            (Family::H, k) if k == self.l => {
                let shift = Series::coordinate(self.dim, 0).add(&Series::constant(self.dim, 2.0 * one));
                HoloFunction::Series(shift).mul(self.kernel(p * wbar * self.weight().powf(p), p + 1.0))
            }
            _ => HoloFunction::zero(self.dim),
        })
    }

    /// The family's explicit degree-indexed polynomial truncation.
    ///
    /// * `F`: `Σ_{j≤m} c_j conj(w)^j z_l^{j+1}/(j+1)`
    /// * `G`: `(1-|w|^2) Σ_{j≤m} c_j (conj(w) z_l)^j`
    /// * `H`: `(z_1+2)(1-|w|^2)^p Σ_{j≤m} c_j (conj(w) z_l)^j`
    pub fn truncate(&self, m: usize) -> Series {
        let coeffs = rising_coefficients(self.p, m);
        let wbar = self.w.conj();
        let mut s = Series::zero(self.dim);
        let mut wpow = Complex64::new(1.0, 0.0);
        for (j, cj) in coeffs.iter().enumerate() {
            let mut idx = MultiIndex::zero(self.dim);
            match self.family {
                Family::F => {
                    idx.0[self.l] = j as u32 + 1;
                    s.add_term(idx, wpow * (cj / (j as f64 + 1.0)));
                }
                Family::G | Family::H => {
                    idx.0[self.l] = j as u32;
                    s.add_term(idx, wpow * *cj);
                }
            }
            wpow *= wbar;
        }
        match self.family {
            Family::F => s,
            Family::G => s.scale(Complex64::new(self.weight(), 0.0)),
            Family::H => {
                let shift =
                    Series::coordinate(self.dim, 0).add(&Series::constant(self.dim, Complex64::new(2.0, 0.0)));
                s.mul(&shift).scale(Complex64::new(self.weight().powf(self.p), 0.0))
            }
        }
    }

    pub fn norm_bound(&self) -> f64 {
        family_norm_bound(self.family, self.p)
    }

    pub fn describe(&self) -> String {
        format!("{}-family(l = {}, w = {}, p = {})", self.family, self.l + 1, self.w, self.p)
    }
}

/// Builds `f_w^{(l)}` on `C^n` (0-based `l`).
pub fn make_f(n: usize, l: usize, w: Complex64, p: f64) -> Result<TestFunction> {
    TestFunction::new(Family::F, n, l, w, p)
}

/// Builds `g_w^{(l)}` on `C^n` (0-based `l`).
pub fn make_g(n: usize, l: usize, w: Complex64, p: f64) -> Result<TestFunction> {
    TestFunction::new(Family::G, n, l, w, p)
}

/// Builds `h_w^{(l)}` on `C^n` (0-based `l`, which must not be 0).
pub fn make_h(n: usize, l: usize, w: Complex64, p: f64) -> Result<TestFunction> {
    TestFunction::new(Family::H, n, l, w, p)
}

/// Uniform-in-`w` bound on the `B^p` norm claimed for each family:
/// `2^p`, `1 + p 2^{p+1}` and `2 + 2^p + 3p 2^{p+1}`.
pub fn family_norm_bound(family: Family, p: f64) -> f64 {
    match family {
        Family::F => 2f64.powf(p),
        Family::G => 1.0 + p * 2f64.powf(p + 1.0),
        Family::H => 2.0 + 2f64.powf(p) + 3.0 * p * 2f64.powf(p + 1.0),
    }
}

/// Truncation of a test function; see [`TestFunction::truncate`].
pub fn truncate_test(t: &TestFunction, m: usize) -> HoloFunction {
    HoloFunction::Series(t.truncate(m))
}

/// `Σ_{j>m} c_j |w|^j`, summed until the remaining terms are negligible at
/// relative `1e-16`.
pub fn tail_bound(p: f64, w: Complex64, m: usize) -> Result<f64> {
    let q = w.norm();
    if !(q < 1.0) {
        return Err(BlochError::InvalidParameter(format!("|w| = {q} must be < 1")));
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    let mut term = 1.0;
    for j in 0..=m {
        term *= (p + j as f64) / (j as f64 + 1.0) * q;
    }
    let mut sum = 0.0;
    let mut j = m + 1;
    loop {
        sum += term;
        let jf = j as f64;
        let ratio = q * ((p + jf) / (jf + 1.0)).max(1.0);
        if term == 0.0 || (ratio < 1.0 && term * ratio / (1.0 - ratio) <= 1e-16 * sum) {
            return Ok(sum);
        }
        if j > m + F_SERIES_MAX_TERMS {
            return Err(BlochError::NotConverged { terms: F_SERIES_MAX_TERMS });
        }
        term *= (p + jf) / (jf + 1.0) * q;
        j += 1;
    }
}

/// `Σ_{j>m} j c_j |w|^j`, the tail of the differentiated series.
pub fn derivative_tail(p: f64, w: Complex64, m: usize) -> Result<f64> {
    let q = w.norm();
    if !(q < 1.0) {
        return Err(BlochError::InvalidParameter(format!("|w| = {q} must be < 1")));
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    // term = c_j q^j, starting at j = m + 1.
    let mut term = 1.0;
    for j in 0..=m {
        term *= (p + j as f64) / (j as f64 + 1.0) * q;
    }
    let mut sum = 0.0;
    let mut j = m + 1;
    loop {
        let jf = j as f64;
        let weighted = jf * term;
        sum += weighted;
        let ratio = q * ((p + jf) / jf).max(1.0);
        if weighted == 0.0 || (ratio < 1.0 && weighted * ratio / (1.0 - ratio) <= 1e-16 * sum) {
            return Ok(sum);
        }
        if j > m + F_SERIES_MAX_TERMS {
            return Err(BlochError::NotConverged { terms: F_SERIES_MAX_TERMS });
        }
        term *= (p + jf) / (jf + 1.0) * q;
        j += 1;
    }
}

/// Upper bound on `‖t - truncate_test(t, m)‖_{B^p}` read off the remainder
/// `R = Σ_{j>m} c_j (conj(w) z_l)^j`, using `|R| <= tail_bound`,
/// `|R'| <= derivative_tail` and `(1-|z|^2)^p <= 1`:
///
/// * `F`: `tail_bound`
/// * `G`: `(1-|w|^2) derivative_tail`
/// * `H`: `(1-|w|^2)^p (tail_bound + 3 derivative_tail)`
///
/// Only the `F` bound equals `tail_bound` itself; for `G` and `H` with
/// `p < 1` the plain tail is exceeded.
pub fn truncation_gap_bound(t: &TestFunction, m: usize) -> Result<f64> {
    let (p, w) = (t.p, t.w);
    let weight = 1.0 - w.norm_sqr();
    Ok(match t.family {
        Family::F => tail_bound(p, w, m)?,
        Family::G => weight * derivative_tail(p, w, m)?,
        Family::H => weight.powf(p) * (tail_bound(p, w, m)? + 3.0 * derivative_tail(p, w, m)?),
    })
}

/// Closed form `|w|^{m+1}/(1-|w|)` of the tail for `p = 1`.
pub fn geometric_tail(w: Complex64, m: usize) -> f64 {
    let q = w.norm();
    q.powi(m as i32 + 1) / (1.0 - q)
}
