//! Complex Hermitian linear-algebra primitives.
//!
//! Everything downstream works with dense `Complex<f64>` matrices. This
//! module wraps the decompositions we rely on (Hermitian eigendecomposition,
//! thin QR with a deterministic sign convention, SVD-based polar factor,
//! principal angles) and the handful of scalar-function-of-a-matrix maps
//! needed by the geometry (exp, log, square roots, the second-order
//! exponential substitute Γ).

use nalgebra::{Cholesky, Complex, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{CoreError, Result};

/// Complex scalar used throughout.
pub type C64 = Complex<f64>;
/// Dense complex matrix.
pub type CMat = DMatrix<C64>;
/// Dense complex column vector.
pub type CVec = DVector<C64>;
/// Dense real matrix.
pub type RMat = DMatrix<f64>;
/// Dense real vector.
pub type RVec = DVector<f64>;

/// Relative eigenvalue tolerance below which a "positive definite" input is
/// rejected by [`hermitian_matfun`].
pub const PD_REL_TOL: f64 = 1e-12;

/// Relative singular-value tolerance below which [`polar_unitary_factor`]
/// declares its input singular.
pub const POLAR_REL_TOL: f64 = 1e-12;

fn require_square(a: &CMat, context: &'static str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(CoreError::Dimension {
            context,
            expected: "square matrix".into(),
            got: format!("{}x{}", a.nrows(), a.ncols()),
        });
    }
    Ok(())
}

/// Cholesky factorization of a Hermitian positive definite matrix.
///
/// The input is symmetrized first. nalgebra's complex Cholesky happily
/// takes complex square roots of negative pivots instead of failing, so a
/// successful factorization is only accepted when every diagonal entry of
/// the factor is real and strictly positive.
pub fn cholesky_hpd(a: &CMat, context: &'static str) -> Result<Cholesky<C64, Dyn>> {
    let symmetrized = herm(a)?;
    let chol = Cholesky::new(symmetrized);
    let valid = chol.as_ref().is_some_and(|c| {
        let l = c.l_dirty();
        (0..l.nrows()).all(|i| {
            let d = l[(i, i)];
            d.re.is_finite() && d.re > 0.0 && d.im.abs() <= 1e-12 * (1.0 + d.re)
        })
    });
    match (valid, chol) {
        (true, Some(c)) => Ok(c),
        _ => {
            let min_eig = hermitian_eig(a)
                .map(|e| e.eigenvalues[0])
                .unwrap_or(f64::NAN);
            Err(CoreError::NotPositiveDefinite { context, min_eig })
        }
    }
}

/// Hermitian part `(A + Aᴴ)/2`.
///
/// The result is Hermitian in exact storage: IEEE addition commutes with
/// conjugation, so no explicit re-symmetrization pass is needed.
pub fn herm(a: &CMat) -> Result<CMat> {
    require_square(a, "herm")?;
    Ok((a + a.adjoint()).scale(0.5))
}

/// Skew-Hermitian part `(A - Aᴴ)/2`.
pub fn skewh(a: &CMat) -> Result<CMat> {
    require_square(a, "skewh")?;
    Ok((a - a.adjoint()).scale(0.5))
}

/// `Re tr(Aᴴ B)` — the real Frobenius inner product.
pub fn frob_inner_re(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// `Re tr(A B)` (no conjugation). Real for products of Hermitian factors.
pub fn re_trace_prod(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// `Re tr(A)`.
pub fn re_trace(a: &CMat) -> f64 {
    a.diagonal().iter().map(|z| z.re).sum()
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    /// Real eigenvalues in ascending order.
    pub eigenvalues: RVec,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub eigenvectors: CMat,
}

/// Hermitian eigendecomposition (the input is symmetrized first).
pub fn hermitian_eig(a: &CMat) -> Result<HermitianEig> {
    let h = herm(a)?;
    let se = h.symmetric_eigen();
    let n = se.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let eigenvalues = RVec::from_iterator(n, order.iter().map(|&i| se.eigenvalues[i]));
    let mut eigenvectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &se.eigenvectors.column(src));
    }
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors,
    })
}

/// Scalar functions applicable through [`hermitian_matfun`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MatFun {
    Exp,
    Log,
    Sqrt,
    InvSqrt,
    /// Real matrix power `A^t`.
    Power(f64),
    /// Second-order exponential substitute `Γ(x) = 1 + x + x²/2`.
    Gamma,
}

impl MatFun {
    fn needs_positive_definite(self) -> bool {
        matches!(
            self,
            MatFun::Log | MatFun::Sqrt | MatFun::InvSqrt | MatFun::Power(_)
        )
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            MatFun::Exp => x.exp(),
            MatFun::Log => x.ln(),
            MatFun::Sqrt => x.sqrt(),
            MatFun::InvSqrt => 1.0 / x.sqrt(),
            MatFun::Power(t) => x.powf(t),
            MatFun::Gamma => 1.0 + x + 0.5 * x * x,
        }
    }
}

/// Applies a scalar function to a Hermitian matrix through its
/// eigendecomposition: `f(A) = V f(Λ) Vᴴ`.
///
/// `Log`, `Sqrt`, `InvSqrt` and `Power` require the input to be positive
/// definite; eigenvalues at or below `PD_REL_TOL · |λ|_max` trigger
/// [`CoreError::NotPositiveDefinite`] carrying the offending eigenvalue.
pub fn hermitian_matfun(a: &CMat, f: MatFun) -> Result<CMat> {
    let eig = hermitian_eig(a)?;
    if f.needs_positive_definite() {
        let max_abs = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
        let min = eig.eigenvalues[0];
        if min <= PD_REL_TOL * max_abs || max_abs == 0.0 {
            return Err(CoreError::NotPositiveDefinite {
                context: "hermitian_matfun",
                min_eig: min,
            });
        }
    }
    let n = eig.eigenvalues.len();
    let mut scaled = eig.eigenvectors.clone();
    for j in 0..n {
        let fj = f.apply(eig.eigenvalues[j]);
        scaled.column_mut(j).scale_mut(fj);
    }
    herm(&(scaled * eig.eigenvectors.adjoint()))
}

/// `Γ(X) = I + X + X²/2` for a general square matrix.
///
/// Used on skew-Hermitian blocks inside the retraction, where the Hermitian
/// eigendecomposition path does not apply.
pub fn gamma_poly(a: &CMat) -> Result<CMat> {
    require_square(a, "gamma_poly")?;
    let n = a.nrows();
    Ok(CMat::identity(n, n) + a + (a * a).scale(0.5))
}

/// Thin QR factorization `A = QR` of a `p×k` matrix with `p ≥ k`.
///
/// `Q` is `p×k` with orthonormal columns and `R` is `k×k` upper triangular
/// with real, non-negative diagonal — the sign convention that makes the
/// factorization deterministic wherever `A` has full column rank.
pub fn thin_qr(a: &CMat) -> Result<(CMat, CMat)> {
    let (p, k) = a.shape();
    if p < k {
        return Err(CoreError::Dimension {
            context: "thin_qr",
            expected: "rows >= cols".into(),
            got: format!("{p}x{k}"),
        });
    }
    let qr = a.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..k {
        let d = r[(i, i)];
        let m = d.norm();
        if m > 0.0 {
            let phase = d.unscale(m);
            let phase_conj = phase.conj();
            for row in 0..p {
                q[(row, i)] *= phase;
            }
            for col in i..k {
                r[(i, col)] *= phase_conj;
            }
            r[(i, i)] = C64::new(m, 0.0);
        }
    }
    Ok((q, r))
}

/// Unitary polar factor `uf(A) = W Vᴴ` from the SVD `A = W S Vᴴ`.
///
/// This is the closest unitary matrix to `A` in Frobenius norm. Inputs that
/// are singular to working precision are rejected because the factor is then
/// not unique.
pub fn polar_unitary_factor(a: &CMat) -> Result<CMat> {
    require_square(a, "polar_unitary_factor")?;
    let svd = a.clone().svd(true, true);
    let s = &svd.singular_values;
    let max = s.iter().fold(0.0f64, |m, &v| m.max(v));
    let min = s.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if max == 0.0 || min < POLAR_REL_TOL * max {
        return Err(CoreError::Singular {
            context: "polar_unitary_factor",
            ratio: if max == 0.0 { 0.0 } else { min / max },
        });
    }
    let w = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    Ok(w * v_t)
}

/// Principal angles between the column spans of two orthonormal `p×k` frames.
///
/// Returns `(O, θ, Ô)` from the SVD `Uᴴ Û = O cos(θ) Ôᴴ`; the cosines are
/// clamped into `[0, 1]` before `acos`, and the angles come out ascending.
pub fn principal_angles(u: &CMat, uhat: &CMat) -> Result<(CMat, RVec, CMat)> {
    if u.shape() != uhat.shape() {
        return Err(CoreError::Dimension {
            context: "principal_angles",
            expected: format!("{}x{}", u.nrows(), u.ncols()),
            got: format!("{}x{}", uhat.nrows(), uhat.ncols()),
        });
    }
    let m = u.adjoint() * uhat;
    let svd = m.svd(true, true);
    let k = svd.singular_values.len();
    let theta = RVec::from_iterator(
        k,
        svd.singular_values
            .iter()
            .map(|&s| s.clamp(0.0, 1.0).acos()),
    );
    let o = svd.u.expect("svd requested u");
    let ohat = svd.v_t.expect("svd requested v_t").adjoint();
    Ok((o, theta, ohat))
}

/// `rows×cols` matrix with i.i.d. standard circular complex Gaussian entries
/// (real and imaginary parts each `N(0, 1/2)`, unit expected square modulus).
pub fn standard_complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * std::f64::consts::FRAC_1_SQRT_2, im * std::f64::consts::FRAC_1_SQRT_2)
    })
}

/// Haar-ish random unitary matrix (QR of a complex Gaussian draw).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = standard_complex_gaussian(n, n, rng);
    let (q, _) = thin_qr(&g).expect("square input");
    q
}

/// Random Hermitian matrix (Hermitian part of a complex Gaussian draw).
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = standard_complex_gaussian(n, n, rng);
    herm(&g).expect("square input")
}
