//! Reference reduction methods and the side-by-side comparison driver.
//!
//! Balanced truncation is stable but generally returns a nonsymmetric `A_r`.
//! Projection onto an orthonormal basis, `(UᵀAU, UᵀB, CU)`, keeps `A_r` SPD by
//! congruence; [`stiefel_descent`] optimizes `U` with first-order steps.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::lti::{h2_error_from_squared, h2_error_squared_model, LtiSystem, ReducedModel};
use crate::manifold::{ProductPoint, SpdPoint};
use crate::matlib::{sym, sym_eig, Matrix, SymEig};
use crate::objective::{
    check_orthonormal, stiefel_point, stiefel_value, stiefel_value_and_grad, GradientH2Objective,
    H2Objective,
};
use crate::optimizer::{trust_region_minimize, TrustRegionConfig, TrustRegionState};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    BalancedTruncation,
    Stiefel,
    TrustRegion,
    TrustRegionGradient,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::BalancedTruncation,
        Method::Stiefel,
        Method::TrustRegion,
        Method::TrustRegionGradient,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::BalancedTruncation => "bt",
            Method::Stiefel => "stiefel",
            Method::TrustRegion => "tr",
            Method::TrustRegionGradient => "tr-gradient",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of one reduction run.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    pub method: Method,
    pub model: ReducedModel,
    pub h2_error: f64,
    pub relative_h2_error: f64,
    pub symmetry_defect: f64,
    pub spd_flag: bool,
    pub iterations: Option<usize>,
    pub grad_norm: Option<f64>,
    pub converged: Option<bool>,
    pub wall_time_ms: Option<f64>,
}

impl ReductionReport {
    /// Measures a reduced triple against the full system.
    pub fn from_model(full: &LtiSystem, method: Method, model: ReducedModel) -> Result<Self> {
        let h2_error = h2_error_from_squared(h2_error_squared_model(full, &model)?);
        let norm = full.h2_norm();
        Ok(Self {
            method,
            h2_error,
            relative_h2_error: if norm > 0.0 { h2_error / norm } else { 0.0 },
            symmetry_defect: model.symmetry_defect(),
            spd_flag: model.is_spd(),
            model,
            iterations: None,
            grad_norm: None,
            converged: None,
            wall_time_ms: None,
        })
    }

    fn with_run(mut self, iterations: usize, grad_norm: f64, converged: bool) -> Self {
        self.iterations = Some(iterations);
        self.grad_norm = Some(grad_norm);
        self.converged = Some(converged);
        self
    }
}

/// Square-root balanced truncation output.
#[derive(Debug, Clone)]
pub struct BalancedTruncation {
    pub model: ReducedModel,
    /// All Hankel singular values, descending.
    pub hankel_singular_values: Vec<f64>,
    /// `T` with `A_r = WᵀAT`; its range is the kept subspace.
    pub right_projection: Matrix,
    pub left_projection: Matrix,
    /// Set when a kept Hankel value is below `1e-12` of the largest.
    pub warning: Option<Error>,
}

/// Relative size below which a kept Hankel value signals a non-minimal realization.
pub const HANKEL_TOLERANCE: f64 = 1e-12;

fn gramian_factor(eig: &SymEig) -> Matrix {
    let mut l = eig.eigenvectors.clone();
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let s = libm::sqrt(lambda.max(0.0));
        l.column_mut(j).scale_mut(s);
    }
    l
}

fn check_order(full: &LtiSystem, r: usize) -> Result<()> {
    if r == 0 || r > full.n() {
        return Err(Error::InvalidOrder { r, n: full.n() });
    }
    Ok(())
}

pub fn balanced_truncation(full: &LtiSystem, r: usize) -> Result<BalancedTruncation> {
    check_order(full, r)?;
    let lc = gramian_factor(&sym_eig(&full.controllability_gramian()?)?);
    let lo = gramian_factor(&sym_eig(&full.observability_gramian()?)?);
    let svd = (lo.transpose() * &lc).svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::EigenNoConvergence),
    };
    // nalgebra does not promise an ordering.
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let hsv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();

    let largest = hsv.first().copied().unwrap_or(0.0);
    let mut warning = None;
    for (index, &value) in hsv.iter().enumerate().take(r) {
        if !(value > 0.0) {
            return Err(Error::NonMinimal { index, value });
        }
        if warning.is_none() && value < HANKEL_TOLERANCE * largest {
            warning = Some(Error::NonMinimal { index, value });
        }
    }

    let n = full.n();
    let mut t = Matrix::zeros(n, r);
    let mut w = Matrix::zeros(n, r);
    for (k, &i) in order.iter().take(r).enumerate() {
        let scale = 1.0 / libm::sqrt(svd.singular_values[i]);
        t.set_column(k, &(&lc * vt.row(i).transpose() * scale));
        w.set_column(k, &(&lo * u.column(i) * scale));
    }
    let model = ReducedModel {
        a: w.transpose() * full.a() * &t,
        b: w.transpose() * full.b(),
        c: full.c() * &t,
    };
    Ok(BalancedTruncation {
        model,
        hankel_singular_values: hsv,
        right_projection: t,
        left_projection: w,
        warning,
    })
}

/// `sym(M)` with eigenvalues raised to at least `1e-6·λ_max`.
pub fn spd_projection(m: &Matrix) -> Result<SpdPoint> {
    let eig = sym_eig(&sym(m))?;
    let top = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, l| acc.max(l.abs()));
    let floor = 1e-6 * if top > 0.0 { top } else { 1.0 };
    SpdPoint::new(eig.map(|l| l.max(floor)))
}

/// Structure-projected balanced truncation: a starting point on `M`.
pub fn bt_initial_point(full: &LtiSystem, r: usize) -> Result<ProductPoint> {
    let bt = balanced_truncation(full, r)?;
    let a_r = spd_projection(&bt.model.a)?;
    ProductPoint::from_parts(a_r, bt.model.b, Some(bt.model.c))
}

/// QR factor `Q` with a non-negative `R` diagonal.
pub fn qr_orthonormalize(m: &Matrix) -> Matrix {
    let qr = m.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Orthonormal basis for the range of the balanced-truncation projection.
pub fn bt_stiefel_basis(full: &LtiSystem, r: usize) -> Result<Matrix> {
    Ok(qr_orthonormalize(
        &balanced_truncation(full, r)?.right_projection,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StiefelConfig {
    pub max_iters: usize,
    /// Stop once the Frobenius norm of the Stiefel gradient is below this.
    pub grad_tol: f64,
    /// Sufficient-decrease constant.
    pub armijo: f64,
    pub min_step: f64,
}

impl Default for StiefelConfig {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            grad_tol: 1e-8,
            armijo: 1e-4,
            min_step: 1e-16,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StiefelResult {
    pub u: Matrix,
    pub j: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Stopped because `J` could no longer resolve a decrease.
    pub stalled: bool,
}

impl StiefelResult {
    pub fn point(&self, full: &LtiSystem) -> Result<ProductPoint> {
        stiefel_point(full, &self.u)
    }

    pub fn report(&self, full: &LtiSystem) -> Result<ReductionReport> {
        let model = self.point(full)?.to_reduced_system()?.into_model();
        Ok(
            ReductionReport::from_model(full, Method::Stiefel, model)?.with_run(
                self.iterations,
                self.grad_norm,
                self.converged,
            ),
        )
    }
}

/// Gradient descent on `J(UᵀAU, UᵀB, CU)` over orthonormal `U`, with Armijo
/// backtracking from a Barzilai-Borwein trial step and a QR retraction.
pub fn stiefel_descent(
    full: &LtiSystem,
    u0: &Matrix,
    cfg: &StiefelConfig,
) -> Result<StiefelResult> {
    check_orthonormal(u0)?;
    if u0.nrows() != full.n() {
        return Err(Error::ShapeMismatch {
            what: "U",
            expected: (full.n(), u0.ncols()),
            found: u0.shape(),
        });
    }
    check_order(full, u0.ncols())?;
    let mut u = u0.clone();
    let (mut j, mut g) = stiefel_value_and_grad(full, &u)?;
    let mut g_norm = g.norm();
    let mut step = 1.0 / g_norm.max(1.0);
    let mut iterations = 0;
    let mut stalled = false;
    'outer: while g_norm > cfg.grad_tol && iterations < cfg.max_iters {
        iterations += 1;
        let mut t = step;
        let (u_next, j_next) = loop {
            if t < cfg.min_step {
                // Below round-off in J no decrease is detectable.
                let noise = 1e3 * f64::EPSILON * (full.h2_norm_squared() + j.abs());
                if step * g_norm * g_norm <= noise {
                    stalled = true;
                    break 'outer;
                }
                return Err(Error::LineSearchFailed { step: t });
            }
            let cand = qr_orthonormalize(&(&u - &g * t));
            check_orthonormal(&cand)?;
            let jc = stiefel_value(full, &cand)?;
            if jc <= j - cfg.armijo * t * g_norm * g_norm {
                break (cand, jc);
            }
            t *= 0.5;
        };
        let (_, g_next) = stiefel_value_and_grad(full, &u_next)?;
        let s = &u_next - &u;
        let y = &g_next - &g;
        let sy = s.dot(&y);
        step = if sy > 0.0 { s.dot(&s) / sy } else { 2.0 * t };
        u = u_next;
        j = j_next;
        g = g_next;
        g_norm = g.norm();
    }
    Ok(StiefelResult {
        u,
        j,
        grad_norm: g_norm,
        iterations,
        converged: g_norm <= cfg.grad_tol,
        stalled,
    })
}

/// Runs the trust-region method on `M` from `init` and reports the result.
pub fn reduce_trust_region(
    full: &LtiSystem,
    init: ProductPoint,
    cfg: &TrustRegionConfig,
) -> Result<(ReductionReport, TrustRegionState)> {
    let obj = H2Objective::new(full);
    let state = trust_region_minimize(&obj, init.to_full_form(), cfg)?;
    let model = state.iterate.to_reduced_system()?.into_model();
    let report = ReductionReport::from_model(full, Method::TrustRegion, model)?.with_run(
        state.iter,
        state.grad_norm,
        state.converged(),
    );
    Ok((report, state))
}

/// Runs the trust-region method on `M̃` (`C_r = B_rᵀ`) for a gradient system.
pub fn reduce_trust_region_gradient(
    full: &LtiSystem,
    init: ProductPoint,
    cfg: &TrustRegionConfig,
) -> Result<(ReductionReport, TrustRegionState)> {
    let gs = full
        .as_gradient_system(GRADIENT_SYSTEM_TOLERANCE)
        .ok_or(Error::InvalidConfig(
            "system is not a gradient system (C != B^T)",
        ))?;
    let obj = GradientH2Objective::new(&gs);
    let init = ProductPoint::from_parts(init.a_r().clone(), init.b_r().clone(), None)?;
    let state = trust_region_minimize(&obj, init, cfg)?;
    let model = state.iterate.to_reduced_system()?.into_model();
    let report = ReductionReport::from_model(full, Method::TrustRegionGradient, model)?.with_run(
        state.iter,
        state.grad_norm,
        state.converged(),
    );
    Ok((report, state))
}

/// Relative `‖C − Bᵀ‖_F / ‖B‖_F` below which a system counts as a gradient system.
pub const GRADIENT_SYSTEM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Default)]
pub struct CompareOptions {
    /// Starting basis for the Stiefel method; the balanced-truncation basis otherwise.
    pub stiefel_init: Option<Matrix>,
    pub stiefel: StiefelConfig,
    pub trust_region: TrustRegionConfig,
}

/// Balanced truncation, Stiefel descent, the trust-region method warm-started
/// at the Stiefel result and, for gradient systems, its `C_r = B_rᵀ` variant.
///
/// `clock` returns milliseconds from any fixed origin. Reports are sorted by
/// relative error, best first.
pub fn compare_methods(
    full: &LtiSystem,
    r: usize,
    opts: &CompareOptions,
    clock: Option<&dyn Fn() -> f64>,
) -> Result<Vec<ReductionReport>> {
    check_order(full, r)?;
    let timed = |f: &mut dyn FnMut() -> Result<ReductionReport>| -> Result<ReductionReport> {
        let start = clock.map(|c| c());
        let mut report = f()?;
        report.wall_time_ms = start.zip(clock).map(|(s, c)| c() - s);
        Ok(report)
    };
    let mut reports = Vec::new();
    reports.push(timed(&mut || {
        let bt = balanced_truncation(full, r)?;
        ReductionReport::from_model(full, Method::BalancedTruncation, bt.model)
    })?);

    let mut stiefel = None;
    let report = timed(&mut || {
        let u0 = match &opts.stiefel_init {
            Some(u) => u.clone(),
            None => bt_stiefel_basis(full, r)?,
        };
        let res = stiefel_descent(full, &u0, &opts.stiefel)?;
        let report = res.report(full)?;
        stiefel = Some(res);
        Ok(report)
    })?;
    reports.push(report);
    let warm = stiefel.expect("set above").point(full)?;

    reports.push(timed(&mut || {
        Ok(reduce_trust_region(full, warm.clone(), &opts.trust_region)?.0)
    })?);
    if full.as_gradient_system(GRADIENT_SYSTEM_TOLERANCE).is_some() {
        reports.push(timed(&mut || {
            Ok(reduce_trust_region_gradient(full, warm.clone(), &opts.trust_region)?.0)
        })?);
    }
    reports.sort_by(|a, b| a.relative_h2_error.total_cmp(&b.relative_h2_error));
    Ok(reports)
}

/// One-line summary, e.g. for logs.
pub fn summarize(report: &ReductionReport) -> String {
    alloc::format!(
        "{:<12} h2_error={:.6e} relative={:.6e} symmetric_spd={}",
        report.method.name(),
        report.h2_error,
        report.relative_h2_error,
        report.spd_flag
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{
        five_state_bt_reference_a_r, five_state_stiefel_basis, five_state_system, two_state_system,
    };
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
    }

    fn random_system(rng: &mut ChaCha8Rng, n: usize, m: usize, p: usize) -> LtiSystem {
        let g = random(rng, n, n);
        let a = &g * g.transpose() + Matrix::identity(n, n) * n as f64;
        LtiSystem::new(a, random(rng, n, m), random(rng, p, n)).unwrap()
    }

    fn sorted_eigenvalues(m: &Matrix) -> Vec<f64> {
        let mut ev: Vec<f64> = m
            .clone()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(Method::from_name(m.name()), Some(m));
        }
        assert_eq!(Method::from_name("newton"), None);
    }

    #[test]
    fn bt_full_order_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let full = random_system(&mut rng, 5, 2, 2);
        let bt = balanced_truncation(&full, 5).unwrap();
        let report =
            ReductionReport::from_model(&full, Method::BalancedTruncation, bt.model).unwrap();
        assert!(report.relative_h2_error <= 1e-6);
    }

    #[test]
    fn bt_projections_are_biorthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let full = random_system(&mut rng, 8, 2, 3);
        let bt = balanced_truncation(&full, 3).unwrap();
        let wt = bt.left_projection.transpose() * &bt.right_projection;
        assert!((wt - Matrix::identity(3, 3)).norm() <= 1e-8);
        assert!(bt.hankel_singular_values.windows(2).all(|w| w[0] >= w[1]));
        assert!(bt.warning.is_none());
    }

    #[test]
    fn bt_on_five_state_fixture() {
        let full = five_state_system();
        let bt = balanced_truncation(&full, 3).unwrap();
        let report =
            ReductionReport::from_model(&full, Method::BalancedTruncation, bt.model.clone())
                .unwrap();
        assert!(
            (report.h2_error - 0.0157).abs() <= 5e-4,
            "{}",
            report.h2_error
        );
        assert!(report.symmetry_defect > 0.1);
        assert!(!report.spd_flag);
        // Realizations differ by a similarity, so only the spectrum is comparable.
        let ours = sorted_eigenvalues(&bt.model.a);
        let printed = sorted_eigenvalues(&five_state_bt_reference_a_r());
        for (a, b) in ours.iter().zip(&printed) {
            assert!((a - b).abs() <= 1e-2 * b.abs(), "{ours:?} vs {printed:?}");
        }
    }

    #[test]
    fn bt_rejects_bad_orders() {
        let full = two_state_system();
        assert_eq!(
            balanced_truncation(&full, 0).unwrap_err(),
            Error::InvalidOrder { r: 0, n: 2 }
        );
        assert_eq!(
            balanced_truncation(&full, 3).unwrap_err(),
            Error::InvalidOrder { r: 3, n: 2 }
        );
    }

    #[test]
    fn bt_flags_non_minimal_realization() {
        let a = Matrix::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![1.0, 2.0, 3.0]));
        let b = Matrix::from_column_slice(3, 1, &[1.0, 1.0, 0.0]);
        let c = Matrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let full = LtiSystem::new(a, b, c).unwrap();
        assert!(matches!(
            balanced_truncation(&full, 3),
            Err(Error::NonMinimal { index: 2, .. })
        ));
        assert!(balanced_truncation(&full, 2).unwrap().warning.is_none());
    }

    #[test]
    fn spd_projection_clamps() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, -3.0]);
        let s = spd_projection(&m).unwrap();
        assert!(s.min_eigenvalue() > 0.0);
        assert_eq!(s.matrix(), &s.matrix().transpose());
        let id = Matrix::identity(3, 3);
        assert_relative_eq!(spd_projection(&id).unwrap().matrix(), &id, epsilon = 1e-14);
    }

    #[test]
    fn stiefel_descent_on_two_state_system() {
        let full = two_state_system();
        let cfg = StiefelConfig::default();
        let near = Matrix::from_column_slice(2, 1, &[0.5642, libm::sqrt(1.0 - 0.5642 * 0.5642)]);
        let res = stiefel_descent(&full, &near, &cfg).unwrap();
        assert!(res.converged);
        assert!((res.j - 0.0389).abs() <= 1e-3);

        let e2 = Matrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let res = stiefel_descent(&full, &e2, &cfg).unwrap();
        assert_eq!(res.iterations, 0);
        assert_relative_eq!(res.j, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn stiefel_descent_is_monotone_and_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let full = random_system(&mut rng, 10, 2, 2);
        let mut u = qr_orthonormalize(&random(&mut rng, 10, 3));
        let one_step = StiefelConfig {
            max_iters: 1,
            ..StiefelConfig::default()
        };
        let mut last = stiefel_value(&full, &u).unwrap();
        for _ in 0..30 {
            let res = stiefel_descent(&full, &u, &one_step).unwrap();
            assert!((res.u.transpose() * &res.u - Matrix::identity(3, 3)).norm() <= 1e-10);
            assert!(res.j <= last);
            last = res.j;
            u = res.u;
        }
    }

    #[test]
    fn stiefel_rejects_non_orthonormal_start() {
        let full = five_state_system();
        assert!(matches!(
            stiefel_descent(
                &full,
                &Matrix::from_element(5, 3, 1.0),
                &StiefelConfig::default()
            ),
            Err(Error::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn five_state_printed_basis_and_warm_start() {
        let full = five_state_system();
        let u = qr_orthonormalize(&five_state_stiefel_basis());
        let j = stiefel_value(&full, &u).unwrap();
        assert!((libm::sqrt(j) - 0.0217).abs() <= 5e-4, "{}", libm::sqrt(j));
        let refined = stiefel_descent(&full, &u, &StiefelConfig::default()).unwrap();
        assert!(refined.grad_norm < 1e-5);
        let (report, state) = reduce_trust_region(
            &full,
            refined.point(&full).unwrap(),
            &TrustRegionConfig::default(),
        )
        .unwrap();
        assert!(report.h2_error <= 0.0160, "{}", report.h2_error);
        assert!(report.spd_flag);
        assert!(state.converged());
    }

    #[test]
    fn compare_orders_methods_on_five_state_system() {
        let full = five_state_system();
        let opts = CompareOptions {
            stiefel_init: Some(qr_orthonormalize(&five_state_stiefel_basis())),
            ..CompareOptions::default()
        };
        let reports = compare_methods(&full, 3, &opts, None).unwrap();
        assert_eq!(reports.len(), 3);
        let by = |m: Method| reports.iter().find(|r| r.method == m).unwrap().h2_error;
        assert!(by(Method::TrustRegion) <= by(Method::BalancedTruncation));
        assert!(by(Method::BalancedTruncation) < by(Method::Stiefel));
        assert!(reports
            .windows(2)
            .all(|w| w[0].relative_h2_error <= w[1].relative_h2_error));
        assert!(reports.iter().all(|r| r.wall_time_ms.is_none()));
    }

    #[test]
    fn compare_on_gradient_system_adds_gradient_variant() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let g = random(&mut rng, 12, 12);
        let a = &g * g.transpose() + Matrix::identity(12, 12) * 12.0;
        let b = random(&mut rng, 12, 2);
        let full = LtiSystem::new(a, b.clone(), b.transpose()).unwrap();
        let ticks = core::cell::Cell::new(0.0);
        let clock = || {
            ticks.set(ticks.get() + 1.0);
            ticks.get()
        };
        let reports = compare_methods(&full, 3, &CompareOptions::default(), Some(&clock)).unwrap();
        assert_eq!(reports.len(), 4);
        let tr = reports
            .iter()
            .find(|r| r.method == Method::TrustRegion)
            .unwrap();
        let trg = reports
            .iter()
            .find(|r| r.method == Method::TrustRegionGradient)
            .unwrap();
        let st = reports
            .iter()
            .find(|r| r.method == Method::Stiefel)
            .unwrap();
        assert!(tr.h2_error <= st.h2_error * (1.0 + 1e-12));
        assert!(trg.h2_error <= st.h2_error * (1.0 + 1e-12));
        assert!(reports.iter().all(|r| r.wall_time_ms == Some(1.0)));
    }

    #[test]
    fn summary_line_names_method() {
        let full = five_state_system();
        let bt = balanced_truncation(&full, 2).unwrap();
        let report =
            ReductionReport::from_model(&full, Method::BalancedTruncation, bt.model).unwrap();
        assert!(summarize(&report).starts_with("bt "));
    }
}
