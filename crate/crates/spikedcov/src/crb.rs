//! Error measures and intrinsic Cramér-Rao bounds.
//!
//! Provides the quotient divergence used as the total estimation error, the
//! Grassmann subspace error, an orthonormal basis of the tangent space at a
//! point, assembly of the Fisher information matrix of elliptical models on
//! that basis, and the resulting lower bounds on the two error measures.
//!
//! The Fisher information of the covariance parameter is
//! `⟨ξ, η⟩_F = n α⁺⁺ tr(R⁻¹ξR⁻¹η) + n(α⁺⁺ − 1) tr(R⁻¹ξ) tr(R⁻¹η)` on the
//! ambient cone, pulled back through the spiked embedding. Its kernel is
//! exactly the gauge directions, so the matrix assembled on the full
//! `2pk`-vector basis has rank `2pk − k²`. Curvature terms of the intrinsic
//! bounds are neglected throughout.

use std::ops::Range;

use crate::error::{CoreError, Result};
use crate::manifold::{ManifoldPoint, MetricParams, TangentVector};
use crate::model::{dembed, embed_full};
use crate::numkernel::{
    cholesky_hpd, herm, hermitian_matfun, principal_angles, re_trace, re_trace_prod, C64, CMat,
    MatFun, RMat,
};

/// Margin around `π/2` within which the largest principal angle makes the
/// rotational alignment of [`divergence`] degenerate.
pub const ALIGNMENT_MARGIN: f64 = 1e-6;

/// Relative eigenvalue cutoff for the pseudo-inverse and for rank counting
/// in [`assemble_fim`].
pub const RANK_REL_CUTOFF: f64 = 1e-10;

/// Density-generator constant `α⁺⁺` of the complex Gaussian.
pub fn alpha_pp_gaussian() -> f64 {
    1.0
}

/// Density-generator constant `α⁺⁺` of the complex Student-t with `dof`
/// degrees of freedom in dimension `p`.
pub fn alpha_pp_student_t(p: usize, dof: f64) -> f64 {
    let p = p as f64;
    (p + dof) / (p + dof + 1.0)
}

/// Sample count and density-generator constant entering the Fisher metric.
#[derive(Clone, Copy, Debug)]
pub struct FisherSpec {
    pub n: usize,
    pub alpha_pp: f64,
}

impl FisherSpec {
    pub fn new(n: usize, alpha_pp: f64) -> Result<Self> {
        if n < 1 {
            return Err(CoreError::InvalidParam(
                "Fisher spec requires n >= 1".into(),
            ));
        }
        if !(alpha_pp > 0.0) {
            return Err(CoreError::InvalidParam(format!(
                "alpha_pp must be positive, got {alpha_pp}"
            )));
        }
        Ok(Self { n, alpha_pp })
    }
}

/// Symmetric divergence between two quotient points:
/// `α‖log(Σ^{−1/2} OÔᴴ Σ̂ ÔOᴴ Σ^{−1/2})‖² + β (log det(Σ⁻¹ OÔᴴ Σ̂ ÔOᴴ))²
///  + ‖Θ‖²`,
/// where `UᴴÛ = O cos(Θ) Ôᴴ` aligns the two frames and `Θ` are the
/// principal angles.
pub fn divergence(
    params: &MetricParams,
    theta: &ManifoldPoint,
    theta_hat: &ManifoldPoint,
) -> Result<f64> {
    if theta.p() != theta_hat.p() || theta.k() != theta_hat.k() {
        return Err(CoreError::Dimension {
            context: "divergence",
            expected: format!("{}x{}", theta.p(), theta.k()),
            got: format!("{}x{}", theta_hat.p(), theta_hat.k()),
        });
    }
    let (o, angles, o_hat) = principal_angles(&theta.u, &theta_hat.u)?;
    let max_angle = angles[angles.len() - 1];
    if max_angle > std::f64::consts::FRAC_PI_2 - ALIGNMENT_MARGIN {
        return Err(CoreError::DegenerateAlignment {
            angle: max_angle,
            margin: ALIGNMENT_MARGIN,
        });
    }
    // Align the Σ factors through the frame rotation O Ôᴴ.
    let rot = &o * o_hat.adjoint();
    let aligned = herm(&(&rot * &theta_hat.sigma * rot.adjoint()))?;
    let inv_sqrt = hermitian_matfun(&theta.sigma, MatFun::InvSqrt)?;
    let congruent = herm(&(&inv_sqrt * aligned * &inv_sqrt))?;
    let log_m = hermitian_matfun(&congruent, MatFun::Log)?;
    let log_norm_sq = log_m.norm_squared();
    let log_trace = re_trace(&log_m);
    let angle_sq: f64 = angles.iter().map(|t| t * t).sum();
    Ok(params.alpha * log_norm_sq + params.beta * log_trace * log_trace + angle_sq)
}

/// Squared Grassmann distance between the column spans: the sum of squared
/// principal angles, in `[0, k·π²/4]`.
pub fn subspace_error(u: &CMat, u_hat: &CMat) -> Result<f64> {
    let (_, angles, _) = principal_angles(u, u_hat)?;
    Ok(angles.iter().map(|t| t * t).sum())
}

/// Ordered orthonormal basis of the tangent space at a point, grouped into
/// the `U⊥` block (dimension `2(p−k)k`), the `U`-skew block (`k²`) and the
/// `Σ` block (`k²`).
#[derive(Clone, Debug)]
pub struct TangentBasis {
    vectors: Vec<TangentVector>,
    uperp_len: usize,
    u_len: usize,
    sigma_len: usize,
}

impl TangentBasis {
    pub fn vectors(&self) -> &[TangentVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn uperp_range(&self) -> Range<usize> {
        0..self.uperp_len
    }

    pub fn u_range(&self) -> Range<usize> {
        self.uperp_len..self.uperp_len + self.u_len
    }

    pub fn sigma_range(&self) -> Range<usize> {
        self.uperp_len + self.u_len..self.uperp_len + self.u_len + self.sigma_len
    }
}

/// Deterministic orthonormal completion of the frame: a `p×(p−k)` matrix
/// whose columns span the orthogonal complement of the columns of `u`.
///
/// Built from the column-pivoted QR of the projector `I − UUᴴ`; the result
/// depends on the pivoting order but is a deterministic function of `u`.
pub fn uperp_completion(u: &CMat) -> Result<CMat> {
    let p = u.nrows();
    let k = u.ncols();
    if k >= p {
        return Err(CoreError::Dimension {
            context: "uperp_completion",
            expected: "strictly tall frame (k < p)".into(),
            got: format!("{p}x{k}"),
        });
    }
    let proj = CMat::identity(p, p) - u * u.adjoint();
    let qr = proj.col_piv_qr();
    let q = qr.q();
    let uperp = q.columns(0, p - k).into_owned();
    let cross = (u.adjoint() * &uperp).norm();
    let gram = (uperp.adjoint() * &uperp - CMat::identity(p - k, p - k)).norm();
    if cross > 1e-10 || gram > 1e-10 {
        return Err(CoreError::Structural(format!(
            "uperp completion failed: cross {cross:.3e}, gram residual {gram:.3e}"
        )));
    }
    Ok(uperp)
}

/// Orthonormal tangent basis at `point` (see [`TangentBasis`] for the block
/// layout) with the default deterministic `U⊥` completion.
pub fn tangent_basis(params: &MetricParams, point: &ManifoldPoint) -> Result<TangentBasis> {
    let uperp = uperp_completion(&point.u)?;
    tangent_basis_with_uperp(params, point, &uperp)
}

/// [`tangent_basis`] with a caller-supplied orthonormal completion of the
/// frame (any `U⊥V` for unitary `V` spans the same block; traces of the
/// assembled Fisher information are invariant to this choice).
pub fn tangent_basis_with_uperp(
    params: &MetricParams,
    point: &ManifoldPoint,
    uperp: &CMat,
) -> Result<TangentBasis> {
    let p = params.p;
    let k = params.k;
    if point.p() != p || point.k() != k {
        return Err(CoreError::Dimension {
            context: "tangent_basis",
            expected: format!("{p}x{k}"),
            got: format!("{}x{}", point.p(), point.k()),
        });
    }
    if uperp.nrows() != p || uperp.ncols() != p - k {
        return Err(CoreError::Dimension {
            context: "tangent_basis",
            expected: format!("{}x{}", p, p - k),
            got: format!("{}x{}", uperp.nrows(), uperp.ncols()),
        });
    }
    let cross = (point.u.adjoint() * uperp).norm();
    let gram = (uperp.adjoint() * uperp - CMat::identity(p - k, p - k)).norm();
    if cross > 1e-8 || gram > 1e-8 {
        return Err(CoreError::Structural(format!(
            "supplied uperp is not an orthonormal completion: cross {cross:.3e}, gram {gram:.3e}"
        )));
    }

    let mut vectors = Vec::with_capacity(2 * p * k);
    let zeros_sigma = CMat::zeros(k, k);
    let one = C64::new(1.0, 0.0);
    let im = C64::new(0.0, 1.0);

    // U⊥ block: for each (row i of the completion, column j of the frame)
    // the real and imaginary unit directions U⊥ K^{ij} and i·U⊥ K^{ij}.
    for j in 0..k {
        for i in 0..(p - k) {
            let mut kmat = CMat::zeros(p - k, k);
            kmat[(i, j)] = one;
            let dir = uperp * &kmat;
            let dir_im = dir.map(|x| x * im);
            vectors.push(TangentVector::new(dir, zeros_sigma.clone()));
            vectors.push(TangentVector::new(dir_im, zeros_sigma.clone()));
        }
    }
    let uperp_len = vectors.len();

    // U-skew block: U Ω for an orthogonal family of skew-Hermitian Ω with
    // ‖Ω‖² = 2 (the metric halves the square norm of in-span directions).
    for i in 0..k {
        let mut omega = CMat::zeros(k, k);
        omega[(i, i)] = im * C64::new(std::f64::consts::SQRT_2, 0.0);
        vectors.push(TangentVector::new(&point.u * &omega, zeros_sigma.clone()));
    }
    for i in 0..k {
        for j in 0..i {
            let mut omega = CMat::zeros(k, k);
            omega[(i, j)] = one;
            omega[(j, i)] = -one;
            vectors.push(TangentVector::new(&point.u * &omega, zeros_sigma.clone()));
            let mut omega_t = CMat::zeros(k, k);
            omega_t[(i, j)] = im;
            omega_t[(j, i)] = im;
            vectors.push(TangentVector::new(&point.u * &omega_t, zeros_sigma.clone()));
        }
    }
    let u_len = vectors.len() - uperp_len;

    // Σ block: congruences of an orthonormal Hermitian family by Σ^{1/2},
    // with a trace correction so the β-part of the metric is absorbed.
    let sqrt_sigma = hermitian_matfun(&point.sigma, MatFun::Sqrt)?;
    let alpha = params.alpha;
    let akb = params.alpha_plus_k_beta();
    let trace_coeff = (alpha.sqrt() - akb.sqrt()) / (k as f64 * alpha.sqrt() * akb.sqrt());
    let zeros_u = CMat::zeros(p, k);
    let push_sigma_direction = |h: &CMat, trace_h: f64, vectors: &mut Vec<TangentVector>| {
        let mut xi = (&sqrt_sigma * h * &sqrt_sigma).scale(1.0 / alpha.sqrt());
        if trace_h != 0.0 {
            xi += point.sigma.scale(trace_coeff * trace_h);
        }
        vectors.push(TangentVector::new(zeros_u.clone(), xi));
    };
    for i in 0..k {
        let mut h = CMat::zeros(k, k);
        h[(i, i)] = one;
        push_sigma_direction(&h, 1.0, &mut vectors);
    }
    let inv_sqrt2 = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    for i in 0..k {
        for j in 0..i {
            let mut h = CMat::zeros(k, k);
            h[(i, j)] = inv_sqrt2;
            h[(j, i)] = inv_sqrt2;
            push_sigma_direction(&h, 0.0, &mut vectors);
            let mut h_t = CMat::zeros(k, k);
            h_t[(i, j)] = im * inv_sqrt2;
            h_t[(j, i)] = -im * inv_sqrt2;
            push_sigma_direction(&h_t, 0.0, &mut vectors);
        }
    }
    let sigma_len = vectors.len() - uperp_len - u_len;

    debug_assert_eq!(vectors.len(), 2 * p * k);
    Ok(TangentBasis {
        vectors,
        uperp_len,
        u_len,
        sigma_len,
    })
}

/// Fisher information metric of elliptical models on the ambient cone:
/// `n α⁺⁺ tr(R⁻¹ξR⁻¹η) + n(α⁺⁺ − 1) tr(R⁻¹ξ) tr(R⁻¹η)`.
pub fn fisher_inner_hpd(spec: &FisherSpec, r: &CMat, xi_r: &CMat, eta_r: &CMat) -> Result<f64> {
    let chol = cholesky_hpd(r, "fisher_inner_hpd")?;
    let a = chol.solve(xi_r);
    let b = chol.solve(eta_r);
    let n = spec.n as f64;
    Ok(n * spec.alpha_pp * re_trace_prod(&a, &b)
        + n * (spec.alpha_pp - 1.0) * re_trace(&a) * re_trace(&b))
}

/// Pullback of [`fisher_inner_hpd`] through the spiked embedding at
/// `R = I + UΣUᴴ`.
pub fn fisher_inner_product(
    spec: &FisherSpec,
    point: &ManifoldPoint,
    xi: &TangentVector,
    eta: &TangentVector,
) -> Result<f64> {
    let r = embed_full(point);
    fisher_inner_hpd(spec, r.matrix(), &dembed(point, xi), &dembed(point, eta))
}

/// Assembled Fisher information on a tangent basis, with the sub-blocks
/// entering each bound.
#[derive(Clone, Debug)]
pub struct FimBundle {
    /// Full matrix on the `2pk`-vector basis (rank `2pk − k²`).
    pub f: RMat,
    /// Block-diagonal restriction `diag(F_{U⊥}, F_Σ)` to the alternative
    /// horizontal space (dimension `2pk − k²`).
    pub f_tilde: RMat,
    /// Leading `U⊥` block.
    pub f_uperp: RMat,
    /// Trailing `Σ` block.
    pub f_sigma: RMat,
    pub spec: FisherSpec,
    uperp_len: usize,
    u_len: usize,
    sigma_len: usize,
    /// Largest absolute entry coupling the `U⊥` block to the rest
    /// (theoretically zero).
    pub max_coupling: f64,
    /// Numerical rank under [`RANK_REL_CUTOFF`].
    pub rank: usize,
}

impl FimBundle {
    pub fn uperp_range(&self) -> Range<usize> {
        0..self.uperp_len
    }

    pub fn u_range(&self) -> Range<usize> {
        self.uperp_len..self.uperp_len + self.u_len
    }

    pub fn sigma_range(&self) -> Range<usize> {
        self.uperp_len + self.u_len..self.uperp_len + self.u_len + self.sigma_len
    }
}

/// Assembles the Fisher information matrix on the orthonormal tangent
/// basis at `point` and extracts the blocks used by the bounds.
///
/// Fails with a structural error when the numerical rank differs from
/// `2pk − k²` — that signals an upstream inconsistency, not a property of
/// the input.
pub fn assemble_fim(
    spec: &FisherSpec,
    params: &MetricParams,
    point: &ManifoldPoint,
) -> Result<FimBundle> {
    let basis = tangent_basis(params, point)?;
    assemble_fim_on_basis(spec, params, point, &basis)
}

/// [`assemble_fim`] on a caller-supplied basis (used to check that traces
/// do not depend on the completion gauge).
pub fn assemble_fim_on_basis(
    spec: &FisherSpec,
    params: &MetricParams,
    point: &ManifoldPoint,
    basis: &TangentBasis,
) -> Result<FimBundle> {
    let dim = basis.len();
    let r = embed_full(point);
    let chol = cholesky_hpd(r.matrix(), "assemble_fim")?;

    // Cache W_q = R⁻¹ Dφ[e_q]; then F_{qℓ} = nα⁺⁺ Re tr(W_q W_ℓ)
    // + n(α⁺⁺−1) tr(W_q) tr(W_ℓ).
    let mut w = Vec::with_capacity(dim);
    let mut t = Vec::with_capacity(dim);
    for e in basis.vectors() {
        let wq = chol.solve(&dembed(point, e));
        t.push(re_trace(&wq));
        w.push(wq);
    }
    let n = spec.n as f64;
    let mut f = RMat::zeros(dim, dim);
    for q in 0..dim {
        for l in q..dim {
            let value =
                n * spec.alpha_pp * re_trace_prod(&w[q], &w[l]) + n * (spec.alpha_pp - 1.0) * t[q] * t[l];
            f[(q, l)] = value;
            f[(l, q)] = value;
        }
    }

    let uperp_range = basis.uperp_range();
    let u_range = basis.u_range();
    let sigma_range = basis.sigma_range();

    let mut max_coupling = 0.0f64;
    for q in uperp_range.clone() {
        for l in u_range.start..sigma_range.end {
            max_coupling = max_coupling.max(f[(q, l)].abs());
        }
    }

    let f_uperp = f
        .view(
            (uperp_range.start, uperp_range.start),
            (uperp_range.len(), uperp_range.len()),
        )
        .into_owned();
    let f_sigma = f
        .view(
            (sigma_range.start, sigma_range.start),
            (sigma_range.len(), sigma_range.len()),
        )
        .into_owned();
    let reduced = uperp_range.len() + sigma_range.len();
    let mut f_tilde = RMat::zeros(reduced, reduced);
    f_tilde
        .view_mut((0, 0), (uperp_range.len(), uperp_range.len()))
        .copy_from(&f_uperp);
    f_tilde
        .view_mut(
            (uperp_range.len(), uperp_range.len()),
            (sigma_range.len(), sigma_range.len()),
        )
        .copy_from(&f_sigma);

    let eigs = f.clone().symmetric_eigen().eigenvalues;
    let max_eig = eigs.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let rank = eigs
        .iter()
        .filter(|&&l| l > RANK_REL_CUTOFF * max_eig)
        .count();
    let expected = 2 * params.p * params.k - params.k * params.k;
    if rank != expected {
        return Err(CoreError::Structural(format!(
            "Fisher information rank {rank} differs from expected {expected}"
        )));
    }

    Ok(FimBundle {
        f,
        f_tilde,
        f_uperp,
        f_sigma,
        spec: *spec,
        uperp_len: uperp_range.len(),
        u_len: u_range.len(),
        sigma_len: sigma_range.len(),
        max_coupling,
        rank,
    })
}

/// Trace of the inverse of a symmetric positive definite matrix, with a
/// domain error when the matrix is numerically singular.
fn trace_inverse_spd(m: &RMat, context: &'static str) -> Result<f64> {
    let eigs = m.clone().symmetric_eigen().eigenvalues;
    let max_eig = eigs.iter().fold(0.0f64, |acc, &l| acc.max(l.abs()));
    let min_eig = eigs.iter().fold(f64::INFINITY, |acc, &l| acc.min(l));
    if !(min_eig > RANK_REL_CUTOFF * max_eig) || max_eig == 0.0 {
        return Err(CoreError::NotPositiveDefinite { context, min_eig });
    }
    Ok(eigs.iter().map(|l| 1.0 / l).sum())
}

/// Lower bound on the expected total (divergence) error: `tr(F†)`, the
/// pseudo-inverse trace over the rank-`2pk − k²` eigenspace.
pub fn bound_total(bundle: &FimBundle) -> Result<f64> {
    let eigs = bundle.f.clone().symmetric_eigen().eigenvalues;
    let max_eig = eigs.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let kept: Vec<f64> = eigs
        .iter()
        .copied()
        .filter(|&l| l > RANK_REL_CUTOFF * max_eig)
        .collect();
    if kept.len() != bundle.rank {
        return Err(CoreError::Structural(format!(
            "pseudo-inverse kept {} eigenvalues, expected rank {}",
            kept.len(),
            bundle.rank
        )));
    }
    Ok(kept.iter().map(|l| 1.0 / l).sum())
}

/// Conjectured lower bound on the expected total error using the
/// block-diagonal restriction: `tr(F̃⁻¹) = tr(F_{U⊥}⁻¹) + tr(F_Σ⁻¹)`.
pub fn bound_total_tilde(bundle: &FimBundle) -> Result<f64> {
    trace_inverse_spd(&bundle.f_tilde, "bound_total_tilde")
}

/// Lower bound on the expected subspace error: `tr(F_{U⊥}⁻¹)`.
pub fn bound_subspace(bundle: &FimBundle) -> Result<f64> {
    trace_inverse_spd(&bundle.f_uperp, "bound_subspace")
}

/// Closed form of the subspace bound for spike eigenvalues `σ_i`:
/// `(p−k)/(n α⁺⁺) Σ_i (1+σ_i)/σ_i²`.
pub fn bound_subspace_closed(
    spec: &FisherSpec,
    p: usize,
    k: usize,
    sigma_eigs: &[f64],
) -> Result<f64> {
    if sigma_eigs.len() != k {
        return Err(CoreError::Dimension {
            context: "bound_subspace_closed",
            expected: format!("{k} spike eigenvalues"),
            got: format!("{}", sigma_eigs.len()),
        });
    }
    if k >= p {
        return Err(CoreError::InvalidParam(format!(
            "bound_subspace_closed requires k < p, got k={k}, p={p}"
        )));
    }
    for &s in sigma_eigs {
        if !(s > 0.0) {
            return Err(CoreError::InvalidParam(format!(
                "spike eigenvalues must be positive, got {s}"
            )));
        }
    }
    let sum: f64 = sigma_eigs.iter().map(|&s| (1.0 + s) / (s * s)).sum();
    Ok((p - k) as f64 / (spec.n as f64 * spec.alpha_pp) * sum)
}
