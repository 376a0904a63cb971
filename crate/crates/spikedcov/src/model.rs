//! Statistical layer: the spiked-covariance embedding, Tyler's cost with
//! its ambient derivatives, heavy-tailed sampling, and the projected
//! sample-covariance baseline.
//!
//! The covariance model is `R = I_p + U Σ Uᴴ` for a quotient point
//! `(U, Σ)`. Tyler's cost is evaluated on the ambient positive-definite
//! cone and pulled back through the embedding; the chain-rule lifts here
//! combine with the manifold module's gradient/Hessian conversions to give
//! horizontal Riemannian derivatives.

use std::io::{Read as IoRead, Write as IoWrite};
use std::path::Path;

use nalgebra::{Cholesky, Dyn};
use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{CoreError, Result};
use crate::manifold::{egrad_to_rgrad, ehess_to_rhess, ManifoldPoint, MetricParams, TangentVector};
use crate::numkernel::{
    cholesky_hpd, herm, hermitian_eig, hermitian_matfun, standard_complex_gaussian, thin_qr, C64,
    CMat, MatFun,
};
use crate::optim::Objective;

/// Degrees of freedom at or above which the Student-t sampler degenerates
/// to the complex Gaussian (the mixing variable is pinned to its mean).
pub const GAUSSIAN_DOF_THRESHOLD: f64 = 1e6;

/// Floor applied to vanishing spike eigenvalues in [`pscm`] so the output
/// stays a valid manifold point.
pub const PSCM_EIG_FLOOR: f64 = 1e-8;

const SPIKED_MIN_EIG_TOL: f64 = 1e-10;

/// A batch of i.i.d. complex samples, stored as the `p×n` matrix whose
/// columns are the samples.
#[derive(Clone, Debug)]
pub struct SampleSet {
    x: CMat,
}

impl SampleSet {
    /// Wraps a `p×n` matrix of samples; rejects non-finite entries and
    /// zero columns (Tyler's cost is undefined at the origin).
    pub fn new(x: CMat) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(CoreError::Dimension {
                context: "SampleSet",
                expected: "p >= 1, n >= 1".into(),
                got: format!("{}x{}", x.nrows(), x.ncols()),
            });
        }
        for (i, col) in x.column_iter().enumerate() {
            let sq = col.norm_squared();
            if !sq.is_finite() {
                return Err(CoreError::InvalidParam(format!(
                    "sample {i} contains non-finite entries"
                )));
            }
            if sq == 0.0 {
                return Err(CoreError::InvalidParam(format!(
                    "sample {i} is the zero vector; Tyler's cost is undefined there"
                )));
            }
        }
        Ok(Self { x })
    }

    pub fn p(&self) -> usize {
        self.x.nrows()
    }

    pub fn n(&self) -> usize {
        self.x.ncols()
    }

    pub fn matrix(&self) -> &CMat {
        &self.x
    }

    /// Plain sample covariance `XXᴴ/n`.
    pub fn sample_covariance(&self) -> CMat {
        let s = &self.x * self.x.adjoint();
        s.scale(1.0 / self.n() as f64)
    }

    /// Reads samples from CSV: one row per sample, `2p` numeric columns
    /// alternating real and imaginary parts, header row required.
    pub fn read_csv<R: IoRead>(reader: R) -> Result<Self> {
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header_len = csv_reader
            .headers()
            .map_err(|e| csv_to_parse_error(&e))?
            .len();
        if header_len < 2 || header_len % 2 != 0 {
            return Err(CoreError::Parse {
                line: 1,
                msg: format!(
                    "expected an even number (>= 2) of columns (re/im pairs), got {header_len}"
                ),
            });
        }
        let p = header_len / 2;
        let mut columns: Vec<C64> = Vec::new();
        let mut n = 0usize;
        for record in csv_reader.records() {
            let record = record.map_err(|e| csv_to_parse_error(&e))?;
            let line = record.position().map_or(0, |pos| pos.line() as usize);
            if record.len() != header_len {
                return Err(CoreError::Parse {
                    line,
                    msg: format!("expected {header_len} fields, got {}", record.len()),
                });
            }
            for j in 0..p {
                let re = parse_field(&record, 2 * j, line)?;
                let im = parse_field(&record, 2 * j + 1, line)?;
                columns.push(C64::new(re, im));
            }
            n += 1;
        }
        if n == 0 {
            return Err(CoreError::Parse {
                line: 1,
                msg: "no data rows after the header".into(),
            });
        }
        // `columns` holds samples row-major (sample-by-sample); each sample
        // is a column of the matrix.
        let x = CMat::from_fn(p, n, |i, j| columns[j * p + i]);
        Self::new(x)
    }

    /// Writes samples as CSV (inverse of [`SampleSet::read_csv`]).
    pub fn write_csv<W: IoWrite>(&self, writer: W) -> Result<()> {
        let mut csv_writer = csv::Writer::from_writer(writer);
        let header: Vec<String> = (1..=self.p())
            .flat_map(|j| [format!("re_{j}"), format!("im_{j}")])
            .collect();
        csv_writer.write_record(&header).map_err(csv_io_error)?;
        let mut row: Vec<String> = Vec::with_capacity(2 * self.p());
        for col in self.x.column_iter() {
            row.clear();
            for value in col.iter() {
                row.push(format_float(value.re));
                row.push(format_float(value.im));
            }
            csv_writer.write_record(&row).map_err(csv_io_error)?;
        }
        csv_writer.flush()?;
        Ok(())
    }

    pub fn read_csv_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    pub fn write_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Round-trip-exact float formatting for CSV export.
fn format_float(v: f64) -> String {
    let mut buf = ryu_like(v);
    if !buf.contains(['.', 'e', 'E', 'n', 'i']) {
        buf.push_str(".0");
    }
    buf
}

fn ryu_like(v: f64) -> String {
    // `{:?}` on f64 produces the shortest representation that round-trips.
    format!("{v:?}")
}

fn parse_field(record: &csv::StringRecord, idx: usize, line: usize) -> Result<f64> {
    let raw = record.get(idx).unwrap_or("");
    let value: f64 = raw.parse().map_err(|_| CoreError::Parse {
        line,
        msg: format!("field {} is not a number: {raw:?}", idx + 1),
    })?;
    if !value.is_finite() {
        return Err(CoreError::Parse {
            line,
            msg: format!("field {} is not finite: {raw:?}", idx + 1),
        });
    }
    Ok(value)
}

fn csv_to_parse_error(err: &csv::Error) -> CoreError {
    let line = err
        .position()
        .map_or(0, |pos: &csv::Position| pos.line() as usize);
    CoreError::Parse {
        line,
        msg: err.to_string(),
    }
}

fn csv_io_error(err: csv::Error) -> CoreError {
    CoreError::Parse {
        line: 0,
        msg: err.to_string(),
    }
}

/// Covariance of the form `I_p + H` with `H` Hermitian PSD of low rank.
#[derive(Clone, Debug)]
pub struct SpikedCovariance {
    r: CMat,
}

impl SpikedCovariance {
    /// Validated constructor: Hermitian with minimum eigenvalue at least
    /// `1 − 1e−10`.
    pub fn new(r: CMat) -> Result<Self> {
        let eig = hermitian_eig(&r)?;
        let hermitian_residual = (&r - r.adjoint()).norm();
        if !(hermitian_residual <= 1e-10 * (1.0 + r.norm())) {
            return Err(CoreError::Structural(format!(
                "spiked covariance not Hermitian: residual {hermitian_residual:.3e}"
            )));
        }
        let min_eig = eig.eigenvalues[0];
        if !(min_eig >= 1.0 - SPIKED_MIN_EIG_TOL) {
            return Err(CoreError::Structural(format!(
                "spiked covariance must satisfy min eig >= 1, got {min_eig:.12}"
            )));
        }
        Ok(Self { r })
    }

    fn new_unchecked(r: CMat) -> Self {
        Self { r }
    }

    pub fn p(&self) -> usize {
        self.r.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.r
    }

    pub fn into_matrix(self) -> CMat {
        self.r
    }

    /// Principal (Hermitian PD) square root.
    pub fn sqrt(&self) -> Result<CMat> {
        hermitian_matfun(&self.r, MatFun::Sqrt)
    }
}

/// Parameters of the complex multivariate Student-t distribution used by
/// the sampler: degrees of freedom and the scatter matrix.
#[derive(Clone, Debug)]
pub struct StudentTParams {
    pub dof: f64,
    pub scatter: SpikedCovariance,
}

impl StudentTParams {
    pub fn new(dof: f64, scatter: SpikedCovariance) -> Result<Self> {
        if !(dof > 0.0) {
            return Err(CoreError::InvalidParam(format!(
                "degrees of freedom must be positive, got {dof}"
            )));
        }
        Ok(Self { dof, scatter })
    }

    /// True whether this parameter set runs the sampler in its exact
    /// Gaussian mode.
    pub fn is_gaussian_mode(&self) -> bool {
        self.dof >= GAUSSIAN_DOF_THRESHOLD
    }
}

/// Low-rank part of the covariance: `φ(U, Σ) = U Σ Uᴴ` (Hermitian PSD of
/// rank `k`).
pub fn embed(point: &ManifoldPoint) -> CMat {
    let m = &point.u * &point.sigma * point.u.adjoint();
    herm(&m).expect("square by construction")
}

/// Full covariance `I_p + U Σ Uᴴ`.
pub fn embed_full(point: &ManifoldPoint) -> SpikedCovariance {
    let mut r = embed(point);
    for i in 0..r.nrows() {
        r[(i, i)] += C64::new(1.0, 0.0);
    }
    SpikedCovariance::new_unchecked(r)
}

/// Directional derivative of the embedding:
/// `Dφ(θ)[ξ] = U Σ ξ_Uᴴ + ξ_U Σ Uᴴ + U ξ_Σ Uᴴ`.
pub fn dembed(point: &ManifoldPoint, xi: &TangentVector) -> CMat {
    let us = &point.u * &point.sigma;
    let m = &us * xi.xi_u.adjoint()
        + &xi.xi_u * &point.sigma * point.u.adjoint()
        + &point.u * &xi.xi_sigma * point.u.adjoint();
    herm(&m).expect("square by construction")
}

/// Per-sample quadratic forms `q_i = x_iᴴ R⁻¹ x_i` along with `Z = R⁻¹X`.
fn quadratic_forms(
    chol: &Cholesky<C64, Dyn>,
    data: &SampleSet,
    context: &'static str,
) -> Result<(CMat, Vec<f64>)> {
    let z = chol.solve(data.matrix());
    let mut q = Vec::with_capacity(data.n());
    for i in 0..data.n() {
        let qi: f64 = data
            .matrix()
            .column(i)
            .iter()
            .zip(z.column(i).iter())
            .map(|(x, zi)| (x.conj() * zi).re)
            .sum();
        if !(qi > 0.0 && qi.is_finite()) {
            return Err(CoreError::Structural(format!(
                "{context}: quadratic form of sample {i} is {qi:.3e}, expected positive"
            )));
        }
        q.push(qi);
    }
    Ok((z, q))
}

/// Tyler's cost on the ambient positive-definite cone:
/// `L(R) = p Σ_i log(x_iᴴ R⁻¹ x_i) + n log det R`.
pub fn tyler_cost_hpd(r: &CMat, data: &SampleSet) -> Result<f64> {
    check_ambient_dim(r, data, "tyler_cost_hpd")?;
    let chol = cholesky_hpd(r, "tyler_cost_hpd")?;
    let (_, q) = quadratic_forms(&chol, data, "tyler_cost_hpd")?;
    let log_det: f64 = (0..r.nrows())
        .map(|i| 2.0 * chol.l_dirty()[(i, i)].re.ln())
        .sum();
    let p = data.p() as f64;
    let n = data.n() as f64;
    Ok(p * q.iter().map(|qi| qi.ln()).sum::<f64>() + n * log_det)
}

/// Tyler's cost at a quotient point (pullback through the embedding).
pub fn tyler_cost(point: &ManifoldPoint, data: &SampleSet) -> Result<f64> {
    tyler_cost_hpd(embed_full(point).matrix(), data)
}

/// Weighted scatter `Ψ(R) = Σ_i x_i x_iᴴ / (x_iᴴ R⁻¹ x_i)`.
pub fn tyler_psi(r: &CMat, data: &SampleSet) -> Result<CMat> {
    check_ambient_dim(r, data, "tyler_psi")?;
    let chol = cholesky_hpd(r, "tyler_psi")?;
    let (_, q) = quadratic_forms(&chol, data, "tyler_psi")?;
    let mut scaled = data.matrix().clone();
    for (i, qi) in q.iter().enumerate() {
        scaled.column_mut(i).scale_mut(1.0 / qi.sqrt());
    }
    let psi = &scaled * scaled.adjoint();
    herm(&psi)
}

/// Directional derivative of `Ψ`:
/// `DΨ(R)[ξ] = Σ_i (x_iᴴ R⁻¹ ξ R⁻¹ x_i)/(x_iᴴ R⁻¹ x_i)² · x_i x_iᴴ`.
pub fn tyler_dpsi(r: &CMat, data: &SampleSet, xi_r: &CMat) -> Result<CMat> {
    check_ambient_dim(r, data, "tyler_dpsi")?;
    check_ambient_dim(xi_r, data, "tyler_dpsi")?;
    let chol = cholesky_hpd(r, "tyler_dpsi")?;
    let (z, q) = quadratic_forms(&chol, data, "tyler_dpsi")?;
    let xi_z = xi_r * &z;
    let mut weighted = data.matrix().clone();
    for i in 0..data.n() {
        let w: f64 = z
            .column(i)
            .iter()
            .zip(xi_z.column(i).iter())
            .map(|(zi, xz)| (zi.conj() * xz).re)
            .sum();
        weighted.column_mut(i).scale_mut(w / (q[i] * q[i]));
    }
    let dpsi = &weighted * data.matrix().adjoint();
    herm(&dpsi)
}

/// Ambient Euclidean gradient of Tyler's cost:
/// `∇L(R) = R⁻¹ (nR − pΨ(R)) R⁻¹`.
pub fn tyler_egrad_hpd(r: &CMat, data: &SampleSet) -> Result<CMat> {
    check_ambient_dim(r, data, "tyler_egrad_hpd")?;
    let chol = cholesky_hpd(r, "tyler_egrad_hpd")?;
    let psi = tyler_psi(r, data)?;
    let r_inv = chol.inverse();
    let sandwich = sandwich_inverse(&chol, &psi);
    let p = data.p() as f64;
    let n = data.n() as f64;
    herm(&(r_inv.scale(n) - sandwich.scale(p)))
}

/// Ambient Euclidean Hessian-vector product of Tyler's cost:
/// `∇²L(R)[ξ] = 2p R⁻¹ herm(ξ R⁻¹ Ψ(R)) R⁻¹ − R⁻¹ (p DΨ(R)[ξ] + nξ) R⁻¹`.
pub fn tyler_ehess_hpd(r: &CMat, data: &SampleSet, xi_r: &CMat) -> Result<CMat> {
    check_ambient_dim(r, data, "tyler_ehess_hpd")?;
    check_ambient_dim(xi_r, data, "tyler_ehess_hpd")?;
    let chol = cholesky_hpd(r, "tyler_ehess_hpd")?;
    let psi = tyler_psi(r, data)?;
    let dpsi = tyler_dpsi(r, data, xi_r)?;
    let p = data.p() as f64;
    let n = data.n() as f64;
    let cross = herm(&(xi_r * chol.solve(&psi)))?;
    let first = sandwich_inverse(&chol, &cross).scale(2.0 * p);
    let second = sandwich_inverse(&chol, &(dpsi.scale(p) + xi_r.scale(n)));
    herm(&(first - second))
}

/// `R⁻¹ M R⁻¹` through an existing Cholesky factorization.
fn sandwich_inverse(chol: &Cholesky<C64, Dyn>, m: &CMat) -> CMat {
    let a = chol.solve(m);
    chol.solve(&a.adjoint()).adjoint()
}

fn check_ambient_dim(r: &CMat, data: &SampleSet, context: &'static str) -> Result<()> {
    let p = data.p();
    if r.nrows() != p || r.ncols() != p {
        return Err(CoreError::Dimension {
            context,
            expected: format!("{p}x{p}"),
            got: format!("{}x{}", r.nrows(), r.ncols()),
        });
    }
    Ok(())
}

/// Chain rule for the embedding: the product-space Euclidean gradient of
/// `θ ↦ L(I + φ(θ))` given the ambient gradient `G` at `I + φ(θ)` is
/// `(2 G U Σ, Uᴴ G U)`.
pub fn lift_egrad(point: &ManifoldPoint, gpp: &CMat) -> (CMat, CMat) {
    let g_u = (gpp * &point.u * &point.sigma).scale(2.0);
    let g_sigma = herm(&(point.u.adjoint() * gpp * &point.u)).expect("square by construction");
    (g_u, g_sigma)
}

/// Chain rule for the Hessian: given the ambient gradient `G`, the ambient
/// Hessian-vector `H = ∇²L[Dφ(θ)[ξ]]` and the tangent direction `ξ`,
/// returns the product-space Euclidean Hessian-vector of the pullback.
pub fn lift_ehess(
    point: &ManifoldPoint,
    gpp: &CMat,
    hpp: &CMat,
    xi: &TangentVector,
) -> (CMat, CMat) {
    let h_u = (hpp * &point.u * &point.sigma + gpp * (&xi.xi_u * &point.sigma + &point.u * &xi.xi_sigma))
        .scale(2.0);
    let h_sigma = herm(
        &(point.u.adjoint() * hpp * &point.u
            + point.u.adjoint() * gpp * &xi.xi_u
            + xi.xi_u.adjoint() * gpp * &point.u),
    )
    .expect("square by construction");
    (h_u, h_sigma)
}

/// Draws `n` samples from the complex multivariate Student-t distribution
/// with the given scatter: `x = √(d/s) R^{1/2} z` with `z` standard
/// complex Gaussian and `s ~ Gamma(d, 1)`. For `dof ≥ 1e6` the mixing
/// variable is pinned to `d`, making the draw exactly Gaussian.
pub fn sample_student_t<R: Rng + ?Sized>(
    params: &StudentTParams,
    n: usize,
    rng: &mut R,
) -> Result<SampleSet> {
    if n == 0 {
        return Err(CoreError::InvalidParam(
            "sample count must be at least 1".into(),
        ));
    }
    let p = params.scatter.p();
    let root = params.scatter.sqrt()?;
    let gamma = if params.is_gaussian_mode() {
        None
    } else {
        Some(Gamma::new(params.dof, 1.0).map_err(|e| {
            CoreError::InvalidParam(format!("invalid Gamma mixing parameters: {e}"))
        })?)
    };
    let mut x = CMat::zeros(p, n);
    for i in 0..n {
        // Fixed draw order (Gaussian vector first, then the mixing
        // variable) keeps streams reproducible across code paths.
        let z = standard_complex_gaussian(p, 1, rng);
        let scale = match &gamma {
            Some(g) => {
                let s: f64 = g.sample(rng);
                (params.dof / s).sqrt()
            }
            None => 1.0,
        };
        let col = (&root * z).scale(scale);
        x.column_mut(i).copy_from(&col);
    }
    SampleSet::new(x)
}

/// Draws a random spiked covariance: `U` uniform on the Stiefel manifold,
/// `Σ` diagonal with extreme entries `1/√c` and `√c` and interior entries
/// uniform in between, trace-normalized to `k`, then scaled by the
/// spike-to-noise ratio `sigma`. Returns the truth point `(U, σΣ)` and
/// `R = I + σ U Σ Uᴴ`.
pub fn make_spiked<R: Rng + ?Sized>(
    p: usize,
    k: usize,
    sigma: f64,
    c: f64,
    rng: &mut R,
) -> Result<(ManifoldPoint, SpikedCovariance)> {
    if k < 1 || k >= p {
        return Err(CoreError::InvalidParam(format!(
            "make_spiked requires 1 <= k < p, got k={k}, p={p}"
        )));
    }
    if !(sigma > 0.0) {
        return Err(CoreError::InvalidParam(format!(
            "spike-to-noise ratio must be positive, got {sigma}"
        )));
    }
    if !(c >= 1.0) {
        return Err(CoreError::InvalidParam(format!(
            "condition number must be at least 1, got {c}"
        )));
    }
    let g = standard_complex_gaussian(p, k, rng);
    let (u, _) = thin_qr(&g)?;
    let mut entries = vec![0.0f64; k];
    if k == 1 {
        entries[0] = 1.0;
    } else {
        let lo = 1.0 / c.sqrt();
        let hi = c.sqrt();
        entries[0] = lo;
        entries[k - 1] = hi;
        for e in entries.iter_mut().take(k - 1).skip(1) {
            *e = rng.gen_range(lo..=hi);
        }
        let total: f64 = entries.iter().sum();
        let norm = k as f64 / total;
        for e in entries.iter_mut() {
            *e *= norm;
        }
    }
    let sigma_mat = CMat::from_fn(k, k, |i, j| {
        if i == j {
            C64::new(sigma * entries[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let point = ManifoldPoint::new(u, sigma_mat)?;
    let cov = embed_full(&point);
    Ok((point, cov))
}

/// Projected sample covariance: eigendecompose `S = XXᴴ/n`, keep the top
/// `k` eigenpairs, and set spike eigenvalues to `max(λ_i − 1, 0)` (the
/// Frobenius projection of `S` onto `I + {rank-k PSD}`), floored at
/// [`PSCM_EIG_FLOOR`] so the result is a valid manifold point.
pub fn pscm(data: &SampleSet, k: usize) -> Result<ManifoldPoint> {
    let p = data.p();
    if k < 1 || k >= p {
        return Err(CoreError::InvalidParam(format!(
            "pscm requires 1 <= k < p, got k={k}, p={p}"
        )));
    }
    let s = data.sample_covariance();
    let eig = hermitian_eig(&s)?;
    let mut u = CMat::zeros(p, k);
    let mut sigma = CMat::zeros(k, k);
    for j in 0..k {
        // Eigenvalues come back ascending; take the top k in descending
        // order.
        let src = p - 1 - j;
        u.column_mut(j).copy_from(&eig.eigenvectors.column(src));
        let spike = (eig.eigenvalues[src] - 1.0).max(0.0).max(PSCM_EIG_FLOOR);
        sigma[(j, j)] = C64::new(spike, 0.0);
    }
    ManifoldPoint::new(u, sigma)
}

/// Standard solver initializer for the benchmark protocol: the principal
/// subspace of the projected sample covariance paired with `Σ = I_k`.
pub fn pscm_init(data: &SampleSet, k: usize) -> Result<ManifoldPoint> {
    let base = pscm(data, k)?;
    let k = base.k();
    ManifoldPoint::new(base.u, CMat::identity(k, k))
}

/// Tyler's cost as a solver objective over the quotient manifold.
///
/// Gradient and Hessian-vector products are produced by lifting the
/// ambient derivatives through the embedding and converting with the
/// metric-aware transformations; outputs are horizontal by construction.
pub struct TylerObjective<'a> {
    params: MetricParams,
    data: &'a SampleSet,
}

impl<'a> TylerObjective<'a> {
    pub fn new(params: MetricParams, data: &'a SampleSet) -> Result<Self> {
        if params.p != data.p() {
            return Err(CoreError::Dimension {
                context: "TylerObjective",
                expected: format!("data dimension {}", params.p),
                got: format!("{}", data.p()),
            });
        }
        Ok(Self { params, data })
    }

    pub fn params(&self) -> &MetricParams {
        &self.params
    }

    pub fn data(&self) -> &'a SampleSet {
        self.data
    }
}

impl Objective for TylerObjective<'_> {
    fn cost(&self, point: &ManifoldPoint) -> Result<f64> {
        tyler_cost(point, self.data)
    }

    fn rgrad(&self, point: &ManifoldPoint) -> Result<TangentVector> {
        let r = embed_full(point);
        let gpp = tyler_egrad_hpd(r.matrix(), self.data)?;
        let (g_u, g_sigma) = lift_egrad(point, &gpp);
        egrad_to_rgrad(&self.params, point, &g_u, &g_sigma)
    }

    fn rhess(&self, point: &ManifoldPoint, xi: &TangentVector) -> Option<Result<TangentVector>> {
        let compute = || {
            let r = embed_full(point);
            let gpp = tyler_egrad_hpd(r.matrix(), self.data)?;
            let direction = dembed(point, xi);
            let hpp = tyler_ehess_hpd(r.matrix(), self.data, &direction)?;
            let (g_u, g_sigma) = lift_egrad(point, &gpp);
            let (h_u, h_sigma) = lift_ehess(point, &gpp, &hpp, xi);
            ehess_to_rhess(
                &self.params,
                point,
                (&g_u, &g_sigma),
                (&h_u, &h_sigma),
                xi,
            )
        };
        Some(compute())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{self, random_point, random_tangent};
    use crate::numkernel::{frob_inner_re, random_hermitian};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_samples(p: usize, n: usize, seed: u64) -> SampleSet {
        let mut r = rng(seed);
        SampleSet::new(standard_complex_gaussian(p, n, &mut r)).unwrap()
    }

    #[test]
    fn sample_set_rejects_zero_and_nonfinite() {
        let mut x = standard_complex_gaussian(3, 4, &mut rng(0));
        x.column_mut(2).fill(C64::new(0.0, 0.0));
        assert!(SampleSet::new(x).is_err());

        let mut y = standard_complex_gaussian(3, 4, &mut rng(1));
        y[(0, 0)] = C64::new(f64::NAN, 0.0);
        assert!(SampleSet::new(y).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let data = random_samples(3, 7, 42);
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let back = SampleSet::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.p(), 3);
        assert_eq!(back.n(), 7);
        assert_eq!(data.matrix(), back.matrix());
    }

    #[test]
    fn csv_rejects_malformed_input() {
        // Odd column count.
        let odd = "re_1,im_1,re_2\n1.0,2.0,3.0\n";
        assert!(SampleSet::read_csv(odd.as_bytes()).is_err());
        // Non-numeric field.
        let bad = "re_1,im_1\n1.0,x\n";
        let err = SampleSet::read_csv(bad.as_bytes()).unwrap_err();
        assert!(matches!(err, CoreError::Parse { line: 2, .. }), "{err}");
        // Header only.
        let empty = "re_1,im_1\n";
        assert!(SampleSet::read_csv(empty.as_bytes()).is_err());
    }

    #[test]
    fn embed_block_diagonal_example() {
        let p = 5;
        let k = 2;
        let mut u = CMat::zeros(p, k);
        u[(0, 0)] = C64::new(1.0, 0.0);
        u[(1, 1)] = C64::new(1.0, 0.0);
        let sigma = random_hermitian(k, &mut rng(3)).scale(0.1)
            + CMat::identity(k, k).scale(2.0);
        let point = ManifoldPoint::new(u, sigma.clone()).unwrap();
        let m = embed(&point);
        for i in 0..p {
            for j in 0..p {
                let expected = if i < k && j < k {
                    sigma[(i, j)]
                } else {
                    C64::new(0.0, 0.0)
                };
                assert_relative_eq!(m[(i, j)].re, expected.re, epsilon = 1e-12);
                assert_relative_eq!(m[(i, j)].im, expected.im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn embed_gauge_invariant_and_eigenvalues_match_sigma() {
        let params = MetricParams::isotropic(6, 3).unwrap();
        let mut r = rng(7);
        let point = random_point(&params, &mut r);
        let gauge = manifold::Gauge::random(3, &mut r);
        let moved = manifold::gauge_point(&point, &gauge).unwrap();
        assert!((embed(&point) - embed(&moved)).norm() < 1e-12);

        let m_eigs = hermitian_eig(&embed(&point)).unwrap().eigenvalues;
        let s_eigs = hermitian_eig(&point.sigma).unwrap().eigenvalues;
        // p−k zero eigenvalues, then Σ's spectrum.
        for i in 0..3 {
            assert!(m_eigs[i].abs() < 1e-12);
            assert_relative_eq!(m_eigs[i + 3], s_eigs[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn embed_full_adds_identity() {
        let params = MetricParams::isotropic(5, 2).unwrap();
        let point = random_point(&params, &mut rng(11));
        let r = embed_full(&point);
        assert!((r.matrix() - embed(&point) - CMat::identity(5, 5)).norm() < 1e-14);
        let eig = hermitian_eig(r.matrix()).unwrap();
        assert!(eig.eigenvalues[0] >= 1.0 - 1e-10);
        // The validated constructor accepts it too.
        SpikedCovariance::new(r.matrix().clone()).unwrap();
    }

    #[test]
    fn dembed_trivial_cases_and_finite_differences() {
        let params = MetricParams::isotropic(8, 3).unwrap();
        let mut r = rng(13);
        let point = random_point(&params, &mut r);

        let zero = TangentVector::zeros(8, 3);
        assert!(dembed(&point, &zero).norm() < 1e-15);

        let sigma_dir = random_hermitian(3, &mut r);
        let xi = TangentVector::new(CMat::zeros(8, 3), sigma_dir.clone());
        let expect = &point.u * &sigma_dir * point.u.adjoint();
        assert!((dembed(&point, &xi) - expect).norm() < 1e-12);

        // Finite differences through the retraction.
        let xi = random_tangent(&params, &point, &mut r, true);
        let h = 1e-6;
        let stepped = manifold::retract(&params, &point, &xi.scale(h)).unwrap();
        let fd = (embed(&stepped) - embed(&point)).scale(1.0 / h);
        let analytic = dembed(&point, &xi);
        assert!(
            (fd.clone() - &analytic).norm() < 1e-5 * (1.0 + analytic.norm()),
            "relative error {}",
            (fd - &analytic).norm() / analytic.norm()
        );
    }

    #[test]
    fn tyler_cost_hpd_scalar_and_identity_examples() {
        // p = 1, R = 1, single sample: L = log |x|².
        let x = CMat::from_fn(1, 1, |_, _| C64::new(0.6, -0.8));
        let data = SampleSet::new(x).unwrap();
        let r1 = CMat::identity(1, 1);
        let cost = tyler_cost_hpd(&r1, &data).unwrap();
        assert_relative_eq!(cost, (0.36f64 + 0.64).ln(), epsilon = 1e-14);

        // R = I_p: L = p Σ log ‖x_i‖².
        let data = random_samples(5, 9, 17);
        let cost = tyler_cost_hpd(&CMat::identity(5, 5), &data).unwrap();
        let expected: f64 = 5.0
            * (0..9)
                .map(|i| data.matrix().column(i).norm_squared().ln())
                .sum::<f64>();
        assert_relative_eq!(cost, expected, epsilon = 1e-10 * expected.abs());
    }

    #[test]
    fn tyler_cost_hpd_matches_naive_oracle() {
        let data = random_samples(4, 11, 19);
        let mut r = random_hermitian(4, &mut rng(23)).scale(0.2) + CMat::identity(4, 4).scale(2.0);
        r = herm(&r).unwrap();
        let fast = tyler_cost_hpd(&r, &data).unwrap();

        // Naive: dense inverse and determinant via the eigendecomposition.
        let eig = hermitian_eig(&r).unwrap();
        let r_inv = r.clone().try_inverse().unwrap();
        let log_det: f64 = eig.eigenvalues.iter().map(|l| l.ln()).sum();
        let mut naive = data.n() as f64 * log_det;
        for i in 0..data.n() {
            let x = data.matrix().column(i);
            let q = (x.adjoint() * &r_inv * x)[(0, 0)].re;
            naive += data.p() as f64 * q.ln();
        }
        assert_relative_eq!(fast, naive, epsilon = 1e-10 * (1.0 + naive.abs()));
    }

    #[test]
    fn tyler_cost_hpd_rejects_non_pd() {
        let data = random_samples(3, 5, 29);
        let mut r = CMat::identity(3, 3);
        r[(2, 2)] = C64::new(-1.0, 0.0);
        assert!(matches!(
            tyler_cost_hpd(&r, &data),
            Err(CoreError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn tyler_cost_gauge_invariant_and_matches_hpd() {
        let params = MetricParams::isotropic(6, 2).unwrap();
        let mut r = rng(31);
        let data = random_samples(6, 20, 37);
        let point = random_point(&params, &mut r);
        let cost = tyler_cost(&point, &data).unwrap();

        let direct = tyler_cost_hpd(embed_full(&point).matrix(), &data).unwrap();
        assert_relative_eq!(cost, direct, epsilon = 1e-12 * (1.0 + direct.abs()));

        let gauge = manifold::Gauge::random(2, &mut r);
        let moved = manifold::gauge_point(&point, &gauge).unwrap();
        let cost_moved = tyler_cost(&moved, &data).unwrap();
        assert!((cost - cost_moved).abs() < 1e-10 * (1.0 + cost.abs()));
    }

    #[test]
    fn tyler_cost_continuous_at_vanishing_spikes() {
        let params = MetricParams::isotropic(6, 2).unwrap();
        let mut r = rng(41);
        let data = random_samples(6, 15, 43);
        let mut point = random_point(&params, &mut r);
        point.sigma = CMat::identity(2, 2).scale(1e-8);
        let near = tyler_cost(&point, &data).unwrap();
        let at_identity = tyler_cost_hpd(&CMat::identity(6, 6), &data).unwrap();
        assert!(
            (near - at_identity).abs() < 1e-5 * (1.0 + at_identity.abs()),
            "gap {}",
            near - at_identity
        );
    }

    #[test]
    fn tyler_psi_scalar_homogeneity_and_dpsi_fd() {
        // p = 1 single sample: Ψ = r.
        let x = CMat::from_fn(1, 1, |_, _| C64::new(1.5, 0.5));
        let data = SampleSet::new(x).unwrap();
        let r = CMat::from_fn(1, 1, |_, _| C64::new(2.5, 0.0));
        let psi = tyler_psi(&r, &data).unwrap();
        assert_relative_eq!(psi[(0, 0)].re, 2.5, epsilon = 1e-12);

        // Homogeneity Ψ(cR) = cΨ(R).
        let data = random_samples(4, 9, 47);
        let r = herm(&(random_hermitian(4, &mut rng(53)).scale(0.2) + CMat::identity(4, 4).scale(3.0)))
            .unwrap();
        let psi1 = tyler_psi(&r, &data).unwrap();
        let psi_scaled = tyler_psi(&r.scale(4.0), &data).unwrap();
        assert!((psi_scaled - psi1.scale(4.0)).norm() < 1e-10 * psi1.norm());

        // DΨ against central finite differences.
        let xi = random_hermitian(4, &mut rng(59));
        let h = 1e-6;
        let plus = tyler_psi(&(herm(&(&r + xi.scale(h))).unwrap()), &data).unwrap();
        let minus = tyler_psi(&(herm(&(&r - xi.scale(h))).unwrap()), &data).unwrap();
        let fd = (plus - minus).scale(0.5 / h);
        let analytic = tyler_dpsi(&r, &data, &xi).unwrap();
        assert!(
            (fd.clone() - &analytic).norm() < 1e-6 * (1.0 + analytic.norm()),
            "relative error {}",
            (fd - &analytic).norm() / analytic.norm()
        );
    }

    #[test]
    fn tyler_egrad_scalar_fixed_point() {
        // p = 1, n = 1: every scalar r is a stationary point.
        let x = CMat::from_fn(1, 1, |_, _| C64::new(0.3, 2.0));
        let data = SampleSet::new(x).unwrap();
        let r = CMat::from_fn(1, 1, |_, _| C64::new(1.7, 0.0));
        let g = tyler_egrad_hpd(&r, &data).unwrap();
        assert!(g.norm() < 1e-14);
    }

    #[test]
    fn tyler_egrad_matches_finite_differences() {
        let data = random_samples(4, 13, 61);
        let r = herm(&(random_hermitian(4, &mut rng(67)).scale(0.2) + CMat::identity(4, 4).scale(2.0)))
            .unwrap();
        let grad = tyler_egrad_hpd(&r, &data).unwrap();
        let mut gen = rng(71);
        for _ in 0..10 {
            let xi = random_hermitian(4, &mut gen);
            let h = 1e-6;
            let plus = tyler_cost_hpd(&herm(&(&r + xi.scale(h))).unwrap(), &data).unwrap();
            let minus = tyler_cost_hpd(&herm(&(&r - xi.scale(h))).unwrap(), &data).unwrap();
            let fd = (plus - minus) * 0.5 / h;
            let analytic = frob_inner_re(&grad, &xi);
            assert!(
                (fd - analytic).abs() < 1e-5 * (1.0 + analytic.abs()),
                "fd {fd} vs analytic {analytic}"
            );
        }
    }

    #[test]
    fn tyler_ehess_matches_fd_and_is_self_adjoint() {
        let data = random_samples(4, 13, 73);
        let r = herm(&(random_hermitian(4, &mut rng(79)).scale(0.2) + CMat::identity(4, 4).scale(2.0)))
            .unwrap();
        let mut gen = rng(83);
        let xi = random_hermitian(4, &mut gen);
        let eta = random_hermitian(4, &mut gen);

        // Hessian-vector against finite differences of the gradient.
        let h = 1e-6;
        let g_plus = tyler_egrad_hpd(&herm(&(&r + xi.scale(h))).unwrap(), &data).unwrap();
        let g_minus = tyler_egrad_hpd(&herm(&(&r - xi.scale(h))).unwrap(), &data).unwrap();
        let fd = (g_plus - g_minus).scale(0.5 / h);
        let analytic = tyler_ehess_hpd(&r, &data, &xi).unwrap();
        assert!(
            (fd.clone() - &analytic).norm() < 1e-4 * (1.0 + analytic.norm()),
            "relative error {}",
            (fd - &analytic).norm() / analytic.norm()
        );

        // Self-adjointness in the ambient inner product.
        let h_eta = tyler_ehess_hpd(&r, &data, &eta).unwrap();
        let lhs = frob_inner_re(&analytic, &eta);
        let rhs = frob_inner_re(&xi, &h_eta);
        assert!((lhs - rhs).abs() < 1e-8 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn lift_egrad_examples_and_chain_rule() {
        let params = MetricParams::isotropic(6, 3).unwrap();
        let mut r = rng(89);
        let point = random_point(&params, &mut r);

        let zero = CMat::zeros(6, 6);
        let (gu, gs) = lift_egrad(&point, &zero);
        assert!(gu.norm() == 0.0 && gs.norm() == 0.0);

        let (gu, gs) = lift_egrad(&point, &CMat::identity(6, 6));
        assert!((gu - (&point.u * &point.sigma).scale(2.0)).norm() < 1e-14);
        assert!((gs - CMat::identity(3, 3)).norm() < 1e-12);

        // Chain rule: ⟨lifted G, ξ⟩ = ⟨G, Dφ[ξ]⟩ for random draws.
        for _ in 0..20 {
            let gpp = random_hermitian(6, &mut r);
            let xi = random_tangent(&params, &point, &mut r, false);
            let (gu, gs) = lift_egrad(&point, &gpp);
            let lhs = frob_inner_re(&gu, &xi.xi_u) + frob_inner_re(&gs, &xi.xi_sigma);
            let rhs = frob_inner_re(&gpp, &dembed(&point, &xi));
            assert!(
                (lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()),
                "{lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let params = MetricParams::isotropic(4, 2).unwrap();
        let point = random_point(&params, &mut rng(97));
        let scatter = embed_full(&point);
        let tp = StudentTParams::new(3.0, scatter).unwrap();
        let a = sample_student_t(&tp, 25, &mut rng(101)).unwrap();
        let b = sample_student_t(&tp, 25, &mut rng(101)).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn sampler_moment_matches_scatter_scaling() {
        // E[xxᴴ] = d/(d−1) · R; R = I here. Check every entry within three
        // Monte Carlo standard errors.
        let p = 3;
        let d = 100.0;
        let n = 60_000;
        let tp = StudentTParams::new(d, SpikedCovariance::new(CMat::identity(p, p)).unwrap())
            .unwrap();
        let data = sample_student_t(&tp, n, &mut rng(103)).unwrap();
        let target = d / (d - 1.0);
        for a in 0..p {
            for b in 0..p {
                // Mean and standard error of x_a conj(x_b) over samples.
                let mut mean = C64::new(0.0, 0.0);
                for i in 0..n {
                    mean += data.matrix()[(a, i)] * data.matrix()[(b, i)].conj();
                }
                mean /= C64::new(n as f64, 0.0);
                let mut var = 0.0;
                for i in 0..n {
                    let v = data.matrix()[(a, i)] * data.matrix()[(b, i)].conj() - mean;
                    var += v.norm_sqr();
                }
                let se = (var / (n as f64 * (n - 1) as f64)).sqrt();
                let want = if a == b { target } else { 0.0 };
                let dev = (mean - C64::new(want, 0.0)).norm();
                assert!(
                    dev <= 3.0 * se,
                    "entry ({a},{b}): dev {dev:.4e} exceeds 3 SE {:.4e}",
                    3.0 * se
                );
            }
        }
    }

    #[test]
    fn sampler_gaussian_mode_norm_moments() {
        // dof above the threshold: ‖x‖² is a sum of p unit-mean
        // exponentials (squared moduli of CN(0,1) entries).
        let p = 4;
        let n = 50_000;
        let tp = StudentTParams::new(
            1e7,
            SpikedCovariance::new(CMat::identity(p, p)).unwrap(),
        )
        .unwrap();
        assert!(tp.is_gaussian_mode());
        let data = sample_student_t(&tp, n, &mut rng(107)).unwrap();
        let sq: Vec<f64> = (0..n)
            .map(|i| data.matrix().column(i).norm_squared())
            .collect();
        let mean: f64 = sq.iter().sum::<f64>() / n as f64;
        let var: f64 =
            sq.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - p as f64).abs() <= 3.0 * se,
            "mean {mean} vs {} (3 SE = {})",
            p,
            3.0 * se
        );
        // Var ‖x‖² = p for i.i.d. Exp(1) squared moduli; generous 4-sigma
        // band using the chi-square variance of the variance estimate.
        let se_var = (2.0 / (n as f64 - 1.0)).sqrt() * var;
        assert!((var - p as f64).abs() <= 4.0 * se_var.max(0.05));
    }

    #[test]
    fn make_spiked_matches_contract() {
        let mut r = rng(109);
        let (p, k, sigma, c) = (10, 4, 2.5, 8.0);
        let (truth, cov) = make_spiked(p, k, sigma, c, &mut r).unwrap();

        // Trace normalization: tr(Σ)/σ = k.
        let trace: f64 = (0..k).map(|i| truth.sigma[(i, i)].re).sum();
        assert_relative_eq!(trace, sigma * k as f64, epsilon = 1e-12 * sigma * k as f64);

        // Pre-scale extremes ratio equals c.
        let entries: Vec<f64> = (0..k).map(|i| truth.sigma[(i, i)].re).collect();
        let min = entries.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = entries.iter().cloned().fold(0.0, f64::max);
        assert_relative_eq!(max / min, c, epsilon = 1e-10 * c);

        // Eigenvalues of R: p − k ones plus 1 + spikes.
        let eig = hermitian_eig(cov.matrix()).unwrap();
        for i in 0..(p - k) {
            assert_relative_eq!(eig.eigenvalues[i], 1.0, epsilon = 1e-10);
        }
        let mut spikes: Vec<f64> = entries.iter().map(|e| 1.0 + e).collect();
        spikes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (i, s) in spikes.iter().enumerate() {
            assert_relative_eq!(eig.eigenvalues[p - k + i], *s, epsilon = 1e-10 * s);
        }

        // Truth point reproduces R through the embedding.
        assert!((embed_full(&truth).matrix() - cov.matrix()).norm() < 1e-12);

        // k = 1 degenerate rule.
        let (t1, _) = make_spiked(6, 1, 3.0, 10.0, &mut r).unwrap();
        assert_relative_eq!(t1.sigma[(0, 0)].re, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn pscm_identity_and_exact_spike() {
        // Samples whose covariance is exactly I_p.
        let p = 4;
        let x = CMat::identity(p, p).scale((p as f64).sqrt());
        let data = SampleSet::new(x).unwrap();
        let point = pscm(&data, 2).unwrap();
        for i in 0..2 {
            assert_relative_eq!(point.sigma[(i, i)].re, PSCM_EIG_FLOOR, epsilon = 1e-20);
        }

        // S = I + 5uuᴴ exactly.
        let mut r = rng(113);
        let g = standard_complex_gaussian(p, 1, &mut r);
        let u = g.scale(1.0 / g.norm());
        let s = CMat::identity(p, p) + (&u * u.adjoint()).scale(5.0);
        let root = hermitian_matfun(&s, MatFun::Sqrt).unwrap();
        let n = p;
        let x = root.scale((n as f64).sqrt());
        let data = SampleSet::new(x).unwrap();
        let point = pscm(&data, 1).unwrap();
        assert_relative_eq!(point.sigma[(0, 0)].re, 5.0, epsilon = 1e-8);
        let overlap = (point.u.adjoint() * &u).norm();
        assert_relative_eq!(overlap, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn pscm_is_frobenius_projection() {
        // Brute force over eigenvalue subsets for small p.
        let p = 5;
        let k = 2;
        let data = random_samples(p, 40, 127);
        let s = data.sample_covariance();
        let eig = hermitian_eig(&s).unwrap();

        let mut best = f64::INFINITY;
        let idx: Vec<usize> = (0..p).collect();
        for a in 0..p {
            for b in (a + 1)..p {
                let subset = [idx[a], idx[b]];
                let mut h = CMat::zeros(p, p);
                for &i in &subset {
                    let spike = (eig.eigenvalues[i] - 1.0).max(0.0);
                    let v = eig.eigenvectors.column(i);
                    h += (v * v.adjoint()).scale(spike);
                }
                let dist = (&s - CMat::identity(p, p) - &h).norm();
                if dist < best {
                    best = dist;
                }
            }
        }

        let point = pscm(&data, k).unwrap();
        let dist = (&s - embed_full(&point).matrix()).norm();
        assert!(
            dist <= best + 1e-6,
            "pscm distance {dist} vs brute-force best {best}"
        );
    }

    #[test]
    fn pscm_init_uses_identity_sigma() {
        let data = random_samples(6, 30, 131);
        let init = pscm_init(&data, 3).unwrap();
        assert!((init.sigma.clone() - CMat::identity(3, 3)).norm() == 0.0);
        init.validate().unwrap();
    }

    #[test]
    fn tyler_objective_gradient_is_horizontal() {
        let params = MetricParams::new(8, 3, 1.0, 0.5).unwrap();
        let data = random_samples(8, 50, 137);
        let objective = TylerObjective::new(params, &data).unwrap();
        let point = random_point(&params, &mut rng(139));
        let grad = objective.rgrad(&point).unwrap();
        let residual = manifold::horizontality_residual(&params, &point, &grad);
        assert!(residual < 1e-8, "horizontality residual {residual}");
    }

    #[test]
    fn student_t_cost_finite_at_truth() {
        let mut r = rng(149);
        let (truth, cov) = make_spiked(8, 2, 3.0, 5.0, &mut r).unwrap();
        let tp = StudentTParams::new(3.0, cov).unwrap();
        let data = sample_student_t(&tp, 100, &mut r).unwrap();
        let cost = tyler_cost(&truth, &data).unwrap();
        assert!(cost.is_finite());
    }

    #[test]
    fn zero_norm_column_never_sampled() {
        // Tiny mixing draws inflate the scale but never produce zeros.
        let tp = StudentTParams::new(
            0.5,
            SpikedCovariance::new(CMat::identity(2, 2)).unwrap(),
        )
        .unwrap();
        let data = sample_student_t(&tp, 200, &mut rng(151)).unwrap();
        for i in 0..data.n() {
            assert!(data.matrix().column(i).norm_squared() > 0.0);
        }
    }
}
