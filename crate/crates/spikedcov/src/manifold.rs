//! Quotient geometry of spiked covariance factors.
//!
//! A spiked covariance `R = I + U Σ Uᴴ` is parameterized by a representative
//! `(U, Σ)` on the product of the complex Stiefel manifold and the Hermitian
//! positive definite cone, modulo the unitary gauge action
//! `(U, Σ) ↦ (U O, Oᴴ Σ O)`. This module implements the Riemannian structure
//! of that quotient through representatives:
//!
//! * the metric
//!   `⟨ξ, η⟩ = Re tr(ξ_Uᴴ (I − ½UUᴴ) η_U) + α tr(Σ⁻¹ξ_Σ Σ⁻¹η_Σ)
//!     + β tr(Σ⁻¹ξ_Σ) tr(Σ⁻¹η_Σ)` with `α > 0`, `β > −α/k`,
//! * tangent and horizontal projections (the horizontal space is the metric
//!   complement of the gauge orbits),
//! * the Levi-Civita connection, geodesics and a second-order retraction,
//! * conversion of ambient (Euclidean) gradients and Hessians into their
//!   Riemannian counterparts.
//!
//! All quotient-level quantities are gauge-invariant; the test suite checks
//! this systematically.

use nalgebra::Cholesky;
use rand::Rng;

use crate::error::{CoreError, Result};
use crate::numkernel::{
    cholesky_hpd, frob_inner_re, gamma_poly, herm, hermitian_eig, hermitian_matfun,
    polar_unitary_factor, random_hermitian, re_trace, re_trace_prod, skewh,
    standard_complex_gaussian, thin_qr, C64, CMat, MatFun,
};

/// Absolute tolerance on the horizontality residual accepted by [`geodesic`].
pub const HORIZONTAL_TOL: f64 = 1e-8;

/// Orthonormality tolerance enforced by [`ManifoldPoint::new`].
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

/// Dimensions and metric weights `(p, k, α, β)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricParams {
    pub p: usize,
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
}

impl MetricParams {
    /// Validated constructor: requires `1 ≤ k < p`, `α > 0` and `β > −α/k`.
    pub fn new(p: usize, k: usize, alpha: f64, beta: f64) -> Result<Self> {
        if k < 1 || k >= p {
            return Err(CoreError::InvalidParam(format!(
                "rank k must satisfy 1 <= k < p, got k={k}, p={p}"
            )));
        }
        if !(alpha > 0.0) {
            return Err(CoreError::InvalidParam(format!(
                "metric weight alpha must be positive, got {alpha}"
            )));
        }
        if !(beta > -alpha / k as f64) {
            return Err(CoreError::InvalidParam(format!(
                "metric weight beta must exceed -alpha/k = {}, got {beta}",
                -alpha / k as f64
            )));
        }
        Ok(Self { p, k, alpha, beta })
    }

    /// Default weights `α = 1`, `β = 0`.
    pub fn isotropic(p: usize, k: usize) -> Result<Self> {
        Self::new(p, k, 1.0, 0.0)
    }

    /// `α + kβ`, the weight of the trace direction (positive by the
    /// parameter constraint).
    pub fn alpha_plus_k_beta(&self) -> f64 {
        self.alpha + self.k as f64 * self.beta
    }
}

/// Representative `(U, Σ)` of a quotient point.
#[derive(Clone, Debug)]
pub struct ManifoldPoint {
    /// `p×k` frame with orthonormal columns.
    pub u: CMat,
    /// `k×k` Hermitian positive definite factor.
    pub sigma: CMat,
}

impl ManifoldPoint {
    /// Validated constructor; checks orthonormality and positive
    /// definiteness.
    pub fn new(u: CMat, sigma: CMat) -> Result<Self> {
        let point = Self { u, sigma };
        point.validate()?;
        Ok(point)
    }

    /// Constructor bypassing validation — callers must guarantee the
    /// invariants (used on hot paths where the output is on-manifold by
    /// construction).
    pub fn new_unchecked(u: CMat, sigma: CMat) -> Self {
        Self { u, sigma }
    }

    pub fn p(&self) -> usize {
        self.u.nrows()
    }

    pub fn k(&self) -> usize {
        self.u.ncols()
    }

    /// Re-checks both representative invariants.
    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if self.p() <= k || self.sigma.nrows() != k || self.sigma.ncols() != k {
            return Err(CoreError::Dimension {
                context: "ManifoldPoint",
                expected: format!("U: p×k with p > k, Sigma: {k}×{k}"),
                got: format!(
                    "U: {}×{}, Sigma: {}×{}",
                    self.u.nrows(),
                    self.u.ncols(),
                    self.sigma.nrows(),
                    self.sigma.ncols()
                ),
            });
        }
        let gram_residual = (self.u.adjoint() * &self.u - CMat::identity(k, k)).norm();
        if !(gram_residual < ORTHONORMALITY_TOL) {
            return Err(CoreError::Structural(format!(
                "frame not orthonormal: ||U^H U - I|| = {gram_residual:.3e}"
            )));
        }
        let hermitian_residual = (&self.sigma - self.sigma.adjoint()).norm();
        if !(hermitian_residual < ORTHONORMALITY_TOL * (1.0 + self.sigma.norm())) {
            return Err(CoreError::Structural(format!(
                "Sigma not Hermitian: ||S - S^H|| = {hermitian_residual:.3e}"
            )));
        }
        cholesky_hpd(&self.sigma, "ManifoldPoint")?;
        Ok(())
    }
}

/// Tangent representative `(ξ_U, ξ_Σ)`; `Uᴴ ξ_U` is skew-Hermitian at the
/// base point and `ξ_Σ` is Hermitian.
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub xi_u: CMat,
    pub xi_sigma: CMat,
}

impl TangentVector {
    /// Wraps the pair, re-symmetrizing the Σ component to arrest drift.
    pub fn new(xi_u: CMat, xi_sigma: CMat) -> Self {
        let xi_sigma = herm(&xi_sigma).expect("xi_sigma must be square");
        Self { xi_u, xi_sigma }
    }

    pub fn zeros(p: usize, k: usize) -> Self {
        Self {
            xi_u: CMat::zeros(p, k),
            xi_sigma: CMat::zeros(k, k),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            xi_u: self.xi_u.scale(factor),
            xi_sigma: self.xi_sigma.scale(factor),
        }
    }

    /// `self + factor · other`.
    pub fn add_scaled(&self, factor: f64, other: &Self) -> Self {
        Self {
            xi_u: &self.xi_u + other.xi_u.scale(factor),
            xi_sigma: herm(&(&self.xi_sigma + other.xi_sigma.scale(factor)))
                .expect("square by construction"),
        }
    }
}

/// Unitary gauge element acting as `(U, Σ) ↦ (U O, Oᴴ Σ O)`.
#[derive(Clone, Debug)]
pub struct Gauge {
    pub o: CMat,
}

impl Gauge {
    /// Validated constructor; `O` must be unitary to `1e-10`.
    pub fn new(o: CMat) -> Result<Self> {
        let k = o.nrows();
        if o.ncols() != k {
            return Err(CoreError::Dimension {
                context: "Gauge",
                expected: "square".into(),
                got: format!("{}x{}", o.nrows(), o.ncols()),
            });
        }
        let residual = (o.adjoint() * &o - CMat::identity(k, k)).norm();
        if !(residual < 1e-10) {
            return Err(CoreError::Structural(format!(
                "gauge not unitary: ||O^H O - I|| = {residual:.3e}"
            )));
        }
        Ok(Self { o })
    }

    /// Haar-ish random gauge.
    pub fn random<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Self {
        Self {
            o: crate::numkernel::random_unitary(k, rng),
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            o: self.o.adjoint(),
        }
    }
}

fn sigma_cholesky(point: &ManifoldPoint) -> Cholesky<C64, nalgebra::Dyn> {
    cholesky_hpd(&point.sigma, "sigma_cholesky")
        .expect("point invariant violated: Sigma not positive definite")
}

/// Riemannian metric of the quotient evaluated on representatives.
pub fn inner(
    params: &MetricParams,
    point: &ManifoldPoint,
    xi: &TangentVector,
    eta: &TangentVector,
) -> f64 {
    let chol = sigma_cholesky(point);
    let s_inv_xi = chol.solve(&xi.xi_sigma);
    let s_inv_eta = chol.solve(&eta.xi_sigma);
    let utxi = point.u.adjoint() * &xi.xi_u;
    let uteta = point.u.adjoint() * &eta.xi_u;
    let stiefel = frob_inner_re(&xi.xi_u, &eta.xi_u) - 0.5 * frob_inner_re(&utxi, &uteta);
    let hpd = params.alpha * re_trace_prod(&s_inv_xi, &s_inv_eta)
        + params.beta * re_trace(&s_inv_xi) * re_trace(&s_inv_eta);
    stiefel + hpd
}

/// Metric norm `√⟨ξ, ξ⟩`.
pub fn norm(params: &MetricParams, point: &ManifoldPoint, xi: &TangentVector) -> f64 {
    inner(params, point, xi, xi).max(0.0).sqrt()
}

/// Metric-orthogonal projection of an ambient pair onto the tangent space:
/// `P(Z) = (Z_U − U herm(Uᴴ Z_U), herm(Z_Σ))`.
pub fn project_tangent(point: &ManifoldPoint, z_u: &CMat, z_sigma: &CMat) -> Result<TangentVector> {
    if z_u.shape() != point.u.shape() || z_sigma.nrows() != point.k() || z_sigma.ncols() != point.k()
    {
        return Err(CoreError::Dimension {
            context: "project_tangent",
            expected: format!("({}x{}, {}x{})", point.p(), point.k(), point.k(), point.k()),
            got: format!(
                "({}x{}, {}x{})",
                z_u.nrows(),
                z_u.ncols(),
                z_sigma.nrows(),
                z_sigma.ncols()
            ),
        });
    }
    let sym = herm(&(point.u.adjoint() * z_u))?;
    let xi_u = z_u - &point.u * sym;
    Ok(TangentVector::new(xi_u, z_sigma.clone()))
}

/// Frobenius residual of the horizontality condition
/// `Uᴴ ξ_U = 2α (Σ⁻¹ ξ_Σ − ξ_Σ Σ⁻¹)`.
pub fn horizontality_residual(
    params: &MetricParams,
    point: &ManifoldPoint,
    xi: &TangentVector,
) -> f64 {
    let chol = sigma_cholesky(point);
    let s_inv_xi = chol.solve(&xi.xi_sigma);
    // ξ_Σ Σ⁻¹ is the adjoint of Σ⁻¹ ξ_Σ for Hermitian ξ_Σ, Σ.
    let commutator = &s_inv_xi - s_inv_xi.adjoint();
    let lhs = point.u.adjoint() * &xi.xi_u;
    (lhs - commutator.scale(2.0 * params.alpha)).norm()
}

/// Projection onto the horizontal space: removes the vertical (gauge-orbit)
/// component `(UΩ, ΣΩ − ΩΣ)`.
///
/// `Ω` is the skew-Hermitian solution of
/// `(1 − 4α)Ω + 2α(Σ⁻¹ΩΣ + ΣΩΣ⁻¹) = Uᴴξ_U + 2α(ξ_ΣΣ⁻¹ − Σ⁻¹ξ_Σ)`,
/// solved entrywise in the eigenbasis of Σ where the diagonal factors
/// `1 − 4α + 2α(λ_i/λ_j + λ_j/λ_i) ≥ 1` make the system safely invertible.
pub fn project_horizontal(
    params: &MetricParams,
    point: &ManifoldPoint,
    xi: &TangentVector,
) -> Result<TangentVector> {
    let alpha = params.alpha;
    let chol = sigma_cholesky(point);
    let s_inv_xi = chol.solve(&xi.xi_sigma);
    let commutator = &s_inv_xi - s_inv_xi.adjoint(); // Σ⁻¹ξ_Σ − ξ_ΣΣ⁻¹
    let rhs = point.u.adjoint() * &xi.xi_u - commutator.scale(2.0 * alpha);

    let eig = hermitian_eig(&point.sigma)?;
    let v = &eig.eigenvectors;
    let rhs_rot = v.adjoint() * rhs * v;
    let k = params.k;
    let mut omega_rot = CMat::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let ratio = eig.eigenvalues[i] / eig.eigenvalues[j];
            let denom = 1.0 - 4.0 * alpha + 2.0 * alpha * (ratio + 1.0 / ratio);
            omega_rot[(i, j)] = rhs_rot[(i, j)].unscale(denom);
        }
    }
    let omega = skewh(&(v * omega_rot * v.adjoint()))?;

    let xi_u = &xi.xi_u - &point.u * &omega;
    let xi_sigma = &xi.xi_sigma + &omega * &point.sigma - &point.sigma * &omega;
    Ok(TangentVector::new(xi_u, xi_sigma))
}

/// Horizontal representative of the quotient Levi-Civita connection
/// `∇_ξ η`, given the ambient directional derivative `deta_xi` of the
/// `η`-field along `ξ` (supplied by the caller).
///
/// On the product the connection is
/// `∇̄_ξ η = P(Dη[ξ]) + ((I − UUᴴ) herm(η_U ξ_Uᴴ) U, −herm(η_Σ Σ⁻¹ ξ_Σ))`;
/// the quotient representative is its horizontal projection.
pub fn levi_civita(
    params: &MetricParams,
    point: &ManifoldPoint,
    xi: &TangentVector,
    eta: &TangentVector,
    deta_xi: (&CMat, &CMat),
) -> Result<TangentVector> {
    let base = project_tangent(point, deta_xi.0, deta_xi.1)?;
    let outer = herm(&(&eta.xi_u * xi.xi_u.adjoint()))?;
    let correction_u = {
        let ou = &outer * &point.u;
        &ou - &point.u * (point.u.adjoint() * &ou)
    };
    let chol = sigma_cholesky(point);
    let correction_sigma = herm(&(&eta.xi_sigma * chol.solve(&xi.xi_sigma)))?.scale(-1.0);
    let product_value = TangentVector::new(base.xi_u + correction_u, base.xi_sigma + correction_sigma);
    project_horizontal(params, point, &product_value)
}

/// Builds the `2k×2k` skew-Hermitian geodesic generator
/// `[[UᴴξU, −Rᴴ], [R, 0]]` and the orthonormal complement factor `Q`.
fn stiefel_blocks(point: &ManifoldPoint, xi: &TangentVector) -> Result<(CMat, CMat)> {
    let k = point.k();
    let a = point.u.adjoint() * &xi.xi_u;
    let normal = &xi.xi_u - &point.u * &a;
    let (q, r) = thin_qr(&normal)?;
    let mut block = CMat::zeros(2 * k, 2 * k);
    block.view_mut((0, 0), (k, k)).copy_from(&a);
    block.view_mut((0, k), (k, k)).copy_from(&(-r.adjoint()));
    block.view_mut((k, 0), (k, k)).copy_from(&r);
    Ok((q, block))
}

/// Matrix exponential of a skew-Hermitian matrix via the Hermitian
/// eigendecomposition of `−iB` (exactly unitary up to roundoff).
fn expm_skew_hermitian(b: &CMat) -> Result<CMat> {
    let minus_i = C64::new(0.0, -1.0);
    let hermitian = b.map(|z| z * minus_i);
    let eig = hermitian_eig(&hermitian)?;
    let n = eig.eigenvalues.len();
    let mut scaled = eig.eigenvectors.clone();
    for j in 0..n {
        let phase = C64::new(0.0, eig.eigenvalues[j]).exp();
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    Ok(scaled * eig.eigenvectors.adjoint())
}

/// Geodesic `γ(t)` from `point` with horizontal initial velocity `xi`.
///
/// The Stiefel factor follows the canonical-metric geodesic
/// `U(t) = [U Q] exp(t[[UᴴξU, −Rᴴ],[R, 0]]) [I_k; 0]` and the HPD factor the
/// affine-invariant geodesic `Σ^{1/2} exp(t Σ^{-1/2} ξ_Σ Σ^{-1/2}) Σ^{1/2}`.
pub fn geodesic(
    params: &MetricParams,
    point: &ManifoldPoint,
    xi: &TangentVector,
    t: f64,
) -> Result<ManifoldPoint> {
    geodesic_with_tol(params, point, xi, t, HORIZONTAL_TOL)
}

/// [`geodesic`] with a caller-chosen horizontality tolerance.
pub fn geodesic_with_tol(
    params: &MetricParams,
    point: &ManifoldPoint,
    xi: &TangentVector,
    t: f64,
    horizontal_tol: f64,
) -> Result<ManifoldPoint> {
    let residual = horizontality_residual(params, point, xi);
    if !(residual <= horizontal_tol) {
        return Err(CoreError::NotHorizontal {
            residual,
            tol: horizontal_tol,
        });
    }
    let k = point.k();
    let (q, block) = stiefel_blocks(point, xi)?;
    let exp_block = expm_skew_hermitian(&block.scale(t))?;
    let mut frame = CMat::zeros(point.p(), 2 * k);
    frame.view_mut((0, 0), (point.p(), k)).copy_from(&point.u);
    frame.view_mut((0, k), (point.p(), k)).copy_from(&q);
    let u_t = &frame * exp_block.view((0, 0), (2 * k, k));

    let sqrt = hermitian_matfun(&point.sigma, MatFun::Sqrt)?;
    let inv_sqrt = hermitian_matfun(&point.sigma, MatFun::InvSqrt)?;
    let whitened = herm(&(&inv_sqrt * &xi.xi_sigma * &inv_sqrt))?;
    let exp_w = hermitian_matfun(&whitened.scale(t), MatFun::Exp)?;
    let sigma_t = herm(&(&sqrt * exp_w * &sqrt))?;

    ManifoldPoint::new(u_t, sigma_t)
}

/// Second-order retraction: the geodesic formula with
/// `Γ(X) = I + X + X²/2` in place of `exp`, and the unitary polar factor
/// restoring orthonormality on the Stiefel side.
///
/// Defined for any tangent `xi` (not only horizontal ones); agrees with the
/// geodesic to second order along horizontal directions.
pub fn retract(
    params: &MetricParams,
    point: &ManifoldPoint,
    xi: &TangentVector,
) -> Result<ManifoldPoint> {
    let _ = params; // the retraction itself is metric-independent
    let k = point.k();
    let (q, block) = stiefel_blocks(point, xi)?;
    let gamma = gamma_poly(&block)?;
    let unitary = polar_unitary_factor(&gamma)?;
    let mut frame = CMat::zeros(point.p(), 2 * k);
    frame.view_mut((0, 0), (point.p(), k)).copy_from(&point.u);
    frame.view_mut((0, k), (point.p(), k)).copy_from(&q);
    let u_new = &frame * unitary.view((0, 0), (2 * k, k));

    let sqrt = hermitian_matfun(&point.sigma, MatFun::Sqrt)?;
    let inv_sqrt = hermitian_matfun(&point.sigma, MatFun::InvSqrt)?;
    let whitened = herm(&(&inv_sqrt * &xi.xi_sigma * &inv_sqrt))?;
    // Γ(X) on a Hermitian argument has eigenvalues 1 + λ + λ²/2 ≥ 1/2, so the
    // HPD factor can never degenerate, whatever the step.
    let gamma_w = hermitian_matfun(&whitened, MatFun::Gamma)?;
    let sigma_new = herm(&(&sqrt * gamma_w * &sqrt))?;

    ManifoldPoint::new(u_new, sigma_new)
}

/// Converts the ambient (Euclidean) gradient pair `G = (G_U, G_Σ)` of a
/// gauge-invariant function into the Riemannian gradient:
/// `(G_U − U G_Uᴴ U, Σ herm(G_Σ) Σ / α − β tr(G_Σ Σ)/(α(α+kβ)) · Σ)`.
pub fn egrad_to_rgrad(
    params: &MetricParams,
    point: &ManifoldPoint,
    g_u: &CMat,
    g_sigma: &CMat,
) -> Result<TangentVector> {
    let alpha = params.alpha;
    let akb = params.alpha_plus_k_beta();
    let gh = herm(g_sigma)?;
    let trace_term = re_trace_prod(&gh, &point.sigma);
    let rg_u = g_u - &point.u * (g_u.adjoint() * &point.u);
    let rg_sigma = (&point.sigma * &gh * &point.sigma).scale(1.0 / alpha)
        - point
            .sigma
            .scale(params.beta * trace_term / (alpha * akb));
    Ok(TangentVector::new(rg_u, rg_sigma))
}

/// Converts an ambient gradient `G` and ambient Hessian-vector product
/// `Hdir = D(egrad)[ξ]` into the horizontal representative of the Riemannian
/// Hessian applied to the horizontal direction `ξ`.
pub fn ehess_to_rhess(
    params: &MetricParams,
    point: &ManifoldPoint,
    g: (&CMat, &CMat),
    hdir: (&CMat, &CMat),
    xi: &TangentVector,
) -> Result<TangentVector> {
    let (g_u, g_sigma) = g;
    let (h_u, h_sigma) = hdir;
    let alpha = params.alpha;
    let akb = params.alpha_plus_k_beta();
    let coeff = params.beta / (alpha * akb);
    let u = &point.u;
    let sigma = &point.sigma;

    // Value of the Riemannian gradient field at the point.
    let gu_h_u = g_u.adjoint() * u;
    let eta_u = g_u - u * &gu_h_u;
    let s = herm(g_sigma)?;
    let h = herm(h_sigma)?;
    let t_g = re_trace_prod(&s, sigma);
    let eta_sigma = (sigma * &s * sigma).scale(1.0 / alpha) - sigma.scale(coeff * t_g);

    // Directional derivative of that field along ξ: the ambient gradient
    // varies as Hdir while the base point varies as ξ.
    let deta_u =
        h_u - &xi.xi_u * &gu_h_u - u * (h_u.adjoint() * u) - u * (g_u.adjoint() * &xi.xi_u);
    let t_d = re_trace_prod(&h, sigma) + re_trace_prod(&s, &xi.xi_sigma);
    let deta_sigma = ((&xi.xi_sigma * &s * sigma)
        + (sigma * &s * &xi.xi_sigma)
        + (sigma * &h * sigma))
        .scale(1.0 / alpha)
        - sigma.scale(coeff * t_d)
        - xi.xi_sigma.scale(coeff * t_g);

    // The Hessian is the covariant derivative of the gradient field.
    let eta = TangentVector::new(eta_u, eta_sigma);
    levi_civita(params, point, xi, &eta, (&deta_u, &deta_sigma))
}

/// Gauge action on a point: `(U O, Oᴴ Σ O)`.
pub fn gauge_point(point: &ManifoldPoint, gauge: &Gauge) -> Result<ManifoldPoint> {
    ManifoldPoint::new(
        &point.u * &gauge.o,
        herm(&(gauge.o.adjoint() * &point.sigma * &gauge.o))?,
    )
}

/// Gauge action on a tangent representative: `(ξ_U O, Oᴴ ξ_Σ O)`.
pub fn gauge_tangent(xi: &TangentVector, gauge: &Gauge) -> TangentVector {
    TangentVector::new(
        &xi.xi_u * &gauge.o,
        gauge.o.adjoint() * &xi.xi_sigma * &gauge.o,
    )
}

/// Random point: `U` from the thin QR of a complex Gaussian draw, `Σ = exp(H)`
/// for a random Hermitian `H`.
pub fn random_point<R: Rng + ?Sized>(params: &MetricParams, rng: &mut R) -> ManifoldPoint {
    let g = standard_complex_gaussian(params.p, params.k, rng);
    let (u, _) = thin_qr(&g).expect("p >= k by MetricParams invariant");
    let h = random_hermitian(params.k, rng);
    let sigma = hermitian_matfun(&h, MatFun::Exp).expect("exp never fails");
    ManifoldPoint::new(u, sigma).expect("constructive invariants")
}

/// Random unit-norm tangent vector; horizontal when `horizontal` is set.
pub fn random_tangent<R: Rng + ?Sized>(
    params: &MetricParams,
    point: &ManifoldPoint,
    rng: &mut R,
    horizontal: bool,
) -> TangentVector {
    let z_u = standard_complex_gaussian(params.p, params.k, rng);
    let z_sigma = standard_complex_gaussian(params.k, params.k, rng);
    let mut xi = project_tangent(point, &z_u, &z_sigma).expect("dimensions by construction");
    if horizontal {
        xi = project_horizontal(params, point, &xi).expect("always solvable");
    }
    let len = norm(params, point, &xi);
    assert!(
        len > 1e-12,
        "degenerate random tangent draw (norm {len:.3e})"
    );
    xi.scale(1.0 / len)
}

/// Restores exact orthonormality of the frame without moving the represented
/// covariance: `U = QR` gives the equivalent representative `(Q, R Σ Rᴴ)`.
pub fn reorthonormalize(point: &ManifoldPoint) -> Result<ManifoldPoint> {
    let (q, r) = thin_qr(&point.u)?;
    let sigma = herm(&(&r * &point.sigma * r.adjoint()))?;
    ManifoldPoint::new(q, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::random_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn default_setup(seed: u64) -> (MetricParams, ManifoldPoint, ChaCha8Rng) {
        let params = MetricParams::new(8, 3, 0.9, -0.1).unwrap();
        let mut r = rng(seed);
        let point = random_point(&params, &mut r);
        (params, point, r)
    }

    #[test]
    fn metric_params_reject_bad_weights() {
        assert!(MetricParams::new(8, 3, 0.0, 0.0).is_err());
        assert!(MetricParams::new(8, 3, 1.0, -0.35).is_err());
        assert!(MetricParams::new(3, 3, 1.0, 0.0).is_err());
        assert!(MetricParams::new(8, 3, 1.0, -0.32).is_ok());
    }

    #[test]
    fn inner_of_zero_vanishes_and_identity_case_matches() {
        let params = MetricParams::new(6, 2, 0.7, 0.3).unwrap();
        let mut r = rng(1);
        let g = standard_complex_gaussian(6, 2, &mut r);
        let (u, _) = thin_qr(&g).unwrap();
        let point = ManifoldPoint::new(u, CMat::identity(2, 2)).unwrap();
        let zero = TangentVector::zeros(6, 2);
        assert_eq!(inner(&params, &point, &zero, &zero), 0.0);

        // Σ = I, ξ_U = 0, ξ_Σ = I → αk + βk².
        let xi = TangentVector::new(CMat::zeros(6, 2), CMat::identity(2, 2));
        let value = inner(&params, &point, &xi, &xi);
        let expected = 0.7 * 2.0 + 0.3 * 4.0;
        assert!((value - expected).abs() < 1e-12);
    }

    #[test]
    fn inner_is_positive_and_gauge_invariant() {
        let (params, point, mut r) = default_setup(2);
        for _ in 0..10 {
            let xi = random_tangent(&params, &point, &mut r, false);
            let eta = random_tangent(&params, &point, &mut r, false);
            let value = inner(&params, &point, &xi, &eta);
            assert!(inner(&params, &point, &xi, &xi) > 0.0);
            let gauge = Gauge::random(params.k, &mut r);
            let gp = gauge_point(&point, &gauge).unwrap();
            let gxi = gauge_tangent(&xi, &gauge);
            let geta = gauge_tangent(&eta, &gauge);
            let gvalue = inner(&params, &gp, &gxi, &geta);
            assert!((value - gvalue).abs() < 1e-10 * (1.0 + value.abs()));
        }
    }

    #[test]
    fn project_tangent_fixes_tangents_and_kills_normal_direction() {
        let (params, point, mut r) = default_setup(3);
        let xi = random_tangent(&params, &point, &mut r, false);
        let again = project_tangent(&point, &xi.xi_u, &xi.xi_sigma).unwrap();
        assert!((&again.xi_u - &xi.xi_u).norm() < 1e-12);
        assert!((&again.xi_sigma - &xi.xi_sigma).norm() < 1e-12);

        // Z = (U, 0) is purely normal.
        let zero = CMat::zeros(params.k, params.k);
        let projected = project_tangent(&point, &point.u, &zero).unwrap();
        assert!(projected.xi_u.norm() < 1e-12);
        assert!(projected.xi_sigma.norm() < 1e-12);
    }

    #[test]
    fn project_horizontal_fixes_horizontal_and_annihilates_vertical() {
        let (params, point, mut r) = default_setup(4);
        let xi = random_tangent(&params, &point, &mut r, true);
        assert!(horizontality_residual(&params, &point, &xi) < 1e-9);
        let again = project_horizontal(&params, &point, &xi).unwrap();
        assert!((&again.xi_u - &xi.xi_u).norm() < 1e-10);
        assert!((&again.xi_sigma - &xi.xi_sigma).norm() < 1e-10);

        // Vertical input (UΩ, ΣΩ − ΩΣ) must project to zero.
        let omega = skewh(&standard_complex_gaussian(params.k, params.k, &mut r)).unwrap();
        let vertical = TangentVector::new(
            &point.u * &omega,
            &point.sigma * &omega - &omega * &point.sigma,
        );
        let projected = project_horizontal(&params, &point, &vertical).unwrap();
        assert!(projected.xi_u.norm() < 1e-10);
        assert!(projected.xi_sigma.norm() < 1e-10);
    }

    #[test]
    fn levi_civita_of_zero_field_is_zero() {
        let (params, point, mut r) = default_setup(5);
        let xi = random_tangent(&params, &point, &mut r, false);
        let eta = TangentVector::zeros(params.p, params.k);
        let zero_u = CMat::zeros(params.p, params.k);
        let zero_s = CMat::zeros(params.k, params.k);
        let value = levi_civita(&params, &point, &xi, &eta, (&zero_u, &zero_s)).unwrap();
        assert!(value.xi_u.norm() < 1e-12 && value.xi_sigma.norm() < 1e-12);
    }

    #[test]
    fn geodesic_at_zero_time_is_identity_and_needs_horizontality() {
        let (params, point, mut r) = default_setup(6);
        let xi = random_tangent(&params, &point, &mut r, true);
        let start = geodesic(&params, &point, &xi, 0.0).unwrap();
        assert!((&start.u - &point.u).norm() < 1e-12);
        assert!((&start.sigma - &point.sigma).norm() < 1e-12);

        // A generically non-horizontal tangent must be rejected.
        let skew = random_tangent(&params, &point, &mut r, false);
        if horizontality_residual(&params, &point, &skew) > 1e-6 {
            assert!(matches!(
                geodesic(&params, &point, &skew, 0.5),
                Err(CoreError::NotHorizontal { .. })
            ));
        }
    }

    #[test]
    fn geodesic_with_fixed_frame_reduces_to_hpd_geodesic() {
        let (params, point, mut r) = default_setup(7);
        // A Σ-only horizontal direction: ξ_Σ commuting with Σ ⇒ ξ_U = 0 works.
        // Simplest such direction: ξ_Σ = Σ itself.
        let _ = &mut r;
        let xi = TangentVector::new(CMat::zeros(params.p, params.k), point.sigma.clone());
        assert!(horizontality_residual(&params, &point, &xi) < 1e-10);
        let t = 0.8;
        let end = geodesic(&params, &point, &xi, t).unwrap();
        assert!((&end.u - &point.u).norm() < 1e-10);
        let sqrt = hermitian_matfun(&point.sigma, MatFun::Sqrt).unwrap();
        let inv_sqrt = hermitian_matfun(&point.sigma, MatFun::InvSqrt).unwrap();
        let w = herm(&(&inv_sqrt * &xi.xi_sigma * &inv_sqrt)).unwrap();
        let expected = herm(
            &(&sqrt * hermitian_matfun(&w.scale(t), MatFun::Exp).unwrap() * &sqrt),
        )
        .unwrap();
        assert!((&end.sigma - expected).norm() < 1e-10);
    }

    #[test]
    fn retract_at_zero_is_identity() {
        let (params, point, mut r) = default_setup(8);
        let _ = &mut r;
        let zero = TangentVector::zeros(params.p, params.k);
        let same = retract(&params, &point, &zero).unwrap();
        assert!((&same.u - &point.u).norm() < 1e-12);
        assert!((&same.sigma - &point.sigma).norm() < 1e-12);
    }

    #[test]
    fn retract_first_order_rigidity() {
        let (params, point, mut r) = default_setup(9);
        let xi = random_tangent(&params, &point, &mut r, false);
        let h = 1e-6;
        let plus = retract(&params, &point, &xi.scale(h)).unwrap();
        let minus = retract(&params, &point, &xi.scale(-h)).unwrap();
        let fd_u = (&plus.u - &minus.u).scale(1.0 / (2.0 * h));
        let fd_sigma = (&plus.sigma - &minus.sigma).scale(1.0 / (2.0 * h));
        assert!((fd_u - &xi.xi_u).norm() < 1e-6);
        assert!((fd_sigma - &xi.xi_sigma).norm() < 1e-6);
    }

    #[test]
    fn egrad_examples_match_closed_forms() {
        let (params, point, mut r) = default_setup(10);
        // G = (0, Σ⁻¹) → (0, Σ/(α+kβ)).
        let sigma_inv = hermitian_matfun(&point.sigma, MatFun::Power(-1.0)).unwrap();
        let zero_u = CMat::zeros(params.p, params.k);
        let rg = egrad_to_rgrad(&params, &point, &zero_u, &sigma_inv).unwrap();
        assert!(rg.xi_u.norm() < 1e-12);
        let expected = point.sigma.scale(1.0 / params.alpha_plus_k_beta());
        assert!((&rg.xi_sigma - expected).norm() < 1e-10);

        // Metric duality against random tangents.
        let g_u = standard_complex_gaussian(params.p, params.k, &mut r);
        let g_sigma = standard_complex_gaussian(params.k, params.k, &mut r);
        let rg = egrad_to_rgrad(&params, &point, &g_u, &g_sigma).unwrap();
        for _ in 0..5 {
            let eta = random_tangent(&params, &point, &mut r, false);
            let lhs = inner(&params, &point, &rg, &eta);
            let rhs = frob_inner_re(&g_u, &eta.xi_u) + frob_inner_re(&g_sigma, &eta.xi_sigma);
            assert!(
                (lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()),
                "duality violated: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn gauge_round_trip_and_embedding_stability() {
        let (params, point, mut r) = default_setup(11);
        let gauge = Gauge::random(params.k, &mut r);
        let forward = gauge_point(&point, &gauge).unwrap();
        let back = gauge_point(&forward, &gauge.inverse()).unwrap();
        assert!((&back.u - &point.u).norm() < 1e-12);
        assert!((&back.sigma - &point.sigma).norm() < 1e-12);

        let embed_a = &point.u * &point.sigma * point.u.adjoint();
        let embed_b = &forward.u * &forward.sigma * forward.u.adjoint();
        assert!((embed_a - embed_b).norm() < 1e-12);

        let not_unitary = CMat::identity(params.k, params.k).scale(2.0);
        assert!(Gauge::new(not_unitary).is_err());
    }

    #[test]
    fn random_generators_are_deterministic_and_valid() {
        let params = MetricParams::new(7, 2, 1.0, 0.0).unwrap();
        let mut r1 = rng(42);
        let mut r2 = rng(42);
        let p1 = random_point(&params, &mut r1);
        let p2 = random_point(&params, &mut r2);
        assert_eq!(p1.u, p2.u);
        assert_eq!(p1.sigma, p2.sigma);
        p1.validate().unwrap();
        let t1 = random_tangent(&params, &p1, &mut r1, true);
        let t2 = random_tangent(&params, &p2, &mut r2, true);
        assert_eq!(t1.xi_u, t2.xi_u);
        assert!(horizontality_residual(&params, &p1, &t1) < 1e-9);
        assert!((norm(&params, &p1, &t1) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reorthonormalize_preserves_embedding() {
        let (params, point, mut r) = default_setup(12);
        let _ = params;
        // Perturb the frame slightly off the manifold.
        let noise = standard_complex_gaussian(point.p(), point.k(), &mut r).scale(1e-6);
        let dirty = ManifoldPoint::new_unchecked(&point.u + noise, point.sigma.clone());
        let clean = reorthonormalize(&dirty).unwrap();
        clean.validate().unwrap();
        let embed_dirty = &dirty.u * &dirty.sigma * dirty.u.adjoint();
        let embed_clean = &clean.u * &clean.sigma * clean.u.adjoint();
        assert!((embed_dirty - embed_clean).norm() < 1e-12 * (1.0 + dirty.sigma.norm()));
    }

    #[test]
    fn gauge_rejects_and_accepts_properly() {
        let mut r = rng(13);
        let o = random_unitary(3, &mut r);
        Gauge::new(o).unwrap();
    }
}
