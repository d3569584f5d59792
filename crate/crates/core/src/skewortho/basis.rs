use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Polynomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisSource {
    ClosedForm,
    WMatrix,
}

/// Monic skew-orthogonal polynomials `q_0 .. q_{2R-1}` with norms
/// `r_0 .. r_{R-1}`.
///
/// Chiral bases store polynomials in the variable `s = z^2`; every
/// evaluation method takes the original argument `z` and squares it.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewBasis {
    polys: Vec<Polynomial>,
    norms: Vec<Complex64>,
    chiral: bool,
    nu: usize,
    source: BasisSource,
}

/// Pre-kernel together with its first and mixed second derivatives in the
/// original (unsquared) arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelDerivatives {
    pub value: Complex64,
    pub dx: Complex64,
    pub dt: Complex64,
    pub dxdt: Complex64,
}

impl SkewBasis {
    pub fn new(
        polys: Vec<Polynomial>,
        norms: Vec<Complex64>,
        chiral: bool,
        nu: usize,
        source: BasisSource,
    ) -> Result<Self> {
        if polys.len() < 2 * norms.len() {
            return Err(Error::Size(format!(
                "{} polynomials cannot carry {} norms",
                polys.len(),
                norms.len()
            )));
        }
        for (k, p) in polys.iter().enumerate() {
            if p.degree() != k || !p.is_monic(1e-12) {
                return Err(Error::Validation(format!("q_{k} is not monic of degree {k}")));
            }
        }
        Ok(SkewBasis { polys, norms, chiral, nu, source })
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn poly(&self, k: usize) -> &Polynomial {
        &self.polys[k]
    }

    pub fn norms(&self) -> &[Complex64] {
        &self.norms
    }

    pub fn chiral(&self) -> bool {
        self.chiral
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn source(&self) -> BasisSource {
        self.source
    }

    /// Number of complete pairs `(q_{2k}, q_{2k+1})` with a norm.
    pub fn pairs(&self) -> usize {
        self.norms.len()
    }

    /// Argument of the stored polynomials: `z` or `z^2`.
    pub fn var(&self, z: Complex64) -> Complex64 {
        if self.chiral {
            z * z
        } else {
            z
        }
    }

    pub fn eval(&self, k: usize, z: Complex64) -> Complex64 {
        self.polys[k].eval(self.var(z))
    }

    /// `q_k(z)` and its derivative with respect to `z`.
    pub fn eval_with_derivative(&self, k: usize, z: Complex64) -> (Complex64, Complex64) {
        let (p, dp) = self.polys[k].eval_with_derivative(self.var(z));
        if self.chiral {
            (p, dp * 2.0 * z)
        } else {
            (p, dp)
        }
    }

    fn check_pairs(&self, r: usize) -> Result<()> {
        if r > self.pairs() {
            return Err(Error::Size(format!("kernel of order {r} needs {r} norms, basis has {}", self.pairs())));
        }
        Ok(())
    }

    /// `kappa_R(z, v) = sum_k [q_{2k+1}(z) q_{2k}(v) - q_{2k+1}(v) q_{2k}(z)] / r_k`.
    pub fn prekernel(&self, r: usize, z: Complex64, v: Complex64) -> Result<Complex64> {
        self.check_pairs(r)?;
        let (a, b) = (self.var(z), self.var(v));
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..r {
            let (e, o) = (&self.polys[2 * k], &self.polys[2 * k + 1]);
            acc += (o.eval(a) * e.eval(b) - o.eval(b) * e.eval(a)) / self.norms[k];
        }
        Ok(acc)
    }

    /// Exact derivatives of `kappa_R(x, t)` from differentiated polynomials;
    /// the chiral chain rule `d/dx = 2x d/ds` is applied.
    pub fn kernel_derivatives(&self, r: usize, x: Complex64, t: Complex64) -> Result<KernelDerivatives> {
        self.check_pairs(r)?;
        let (a, b) = (self.var(x), self.var(t));
        let zero = Complex64::new(0.0, 0.0);
        let (mut v, mut dx, mut dt, mut dxdt) = (zero, zero, zero, zero);
        for k in 0..r {
            let (e, o) = (&self.polys[2 * k], &self.polys[2 * k + 1]);
            let (oa, doa) = o.eval_with_derivative(a);
            let (ob, dob) = o.eval_with_derivative(b);
            let (ea, dea) = e.eval_with_derivative(a);
            let (eb, deb) = e.eval_with_derivative(b);
            let inv = 1.0 / self.norms[k];
            v += (oa * eb - ob * ea) * inv;
            dx += (doa * eb - ob * dea) * inv;
            dt += (oa * deb - dob * ea) * inv;
            dxdt += (doa * deb - dob * dea) * inv;
        }
        if self.chiral {
            dx *= 2.0 * x;
            dt *= 2.0 * t;
            dxdt *= 4.0 * x * t;
        }
        Ok(KernelDerivatives { value: v, dx, dt, dxdt })
    }

    /// Copy with `q_{2k+1}` replaced by `q_{2k+1} + c q_{2k}`, an admissible
    /// change of basis that leaves every kernel unchanged.
    pub fn with_odd_shift(&self, k: usize, c: Complex64) -> SkewBasis {
        let mut out = self.clone();
        out.polys[2 * k + 1] = &self.polys[2 * k + 1] + &self.polys[2 * k].scale(c);
        out
    }

    /// Truncation to the first `r` pairs plus, when available, `q_{2r}`.
    pub fn truncated(&self, r: usize) -> SkewBasis {
        let keep = (2 * r + 1).min(self.polys.len());
        SkewBasis {
            polys: self.polys[..keep].to_vec(),
            norms: self.norms[..r.min(self.norms.len())].to_vec(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> BasisJson {
        BasisJson {
            chiral: self.chiral,
            nu: self.nu,
            source: self.source,
            norms: self.norms.iter().map(|c| [c.re, c.im]).collect(),
            polys: self
                .polys
                .iter()
                .map(|p| p.coeffs().iter().map(|c| [c.re, c.im]).collect())
                .collect(),
        }
    }

    pub fn from_json(j: &BasisJson) -> Result<Self> {
        let polys = j
            .polys
            .iter()
            .map(|p| Polynomial::new(p.iter().map(|c| Complex64::new(c[0], c[1])).collect()))
            .collect();
        let norms = j.norms.iter().map(|c| Complex64::new(c[0], c[1])).collect();
        SkewBasis::new(polys, norms, j.chiral, j.nu, j.source)
    }
}

/// Serialized form of a [`SkewBasis`]; coefficients in ascending degree as
/// `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisJson {
    pub chiral: bool,
    pub nu: usize,
    pub source: BasisSource,
    pub norms: Vec<[f64; 2]>,
    pub polys: Vec<Vec<[f64; 2]>>,
}
