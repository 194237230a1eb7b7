//! Riemannian trust-region minimization with a truncated conjugate gradient
//! (Steihaug-Toint) inner solver.
//!
//! Steps are mapped back to the manifold with the exponential map, so every
//! iterate keeps an SPD `A_r`.

use alloc::vec::Vec;

use crate::manifold::{product_exp, product_inner, product_norm, ProductPoint, ProductTangent};
use crate::objective::RiemannianObjective;
use crate::{Error, Result};

/// Inner solver controls. The residual target is `‖g‖·min(κ, ‖g‖^θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TcgConfig {
    pub theta: f64,
    pub kappa: f64,
    /// Defaults to the manifold dimension.
    pub max_inner_iters: Option<usize>,
}

impl Default for TcgConfig {
    fn default() -> Self {
        Self {
            theta: 1.0,
            kappa: 0.1,
            max_inner_iters: None,
        }
    }
}

/// Outer loop controls. `None` fields are resolved from the initial point:
/// `Δ̄ = 10(1 + ‖grad‖)`, `Δ₀ = Δ̄/8`, `grad_tol = 1e-8·max(1, |J|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustRegionConfig {
    pub delta_bar: Option<f64>,
    pub delta0: Option<f64>,
    pub rho_prime: f64,
    pub max_outer_iters: usize,
    pub grad_tol: Option<f64>,
    /// Stop once the radius falls below this.
    pub min_delta: f64,
    /// Both sides of the ratio get `rho_regularization · ε · max(1, |J|)`
    /// added so that steps at round-off level are still judged sensibly.
    pub rho_regularization: f64,
    pub tcg: TcgConfig,
}

impl Default for TrustRegionConfig {
    fn default() -> Self {
        Self {
            delta_bar: None,
            delta0: None,
            rho_prime: 0.1,
            max_outer_iters: 500,
            grad_tol: None,
            min_delta: 1e-14,
            rho_regularization: 1e3,
            tcg: TcgConfig::default(),
        }
    }
}

impl TrustRegionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.25).contains(&self.rho_prime) {
            return Err(Error::InvalidConfig("rho_prime must lie in [0, 1/4)"));
        }
        if self.delta_bar.is_some_and(|d| !(d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidConfig(
                "delta_bar must be positive and finite",
            ));
        }
        if let Some(d0) = self.delta0 {
            if !(d0 > 0.0) || self.delta_bar.is_some_and(|db| d0 >= db) {
                return Err(Error::InvalidConfig("delta0 must lie in (0, delta_bar)"));
            }
        }
        if self.grad_tol.is_some_and(|t| !(t >= 0.0)) {
            return Err(Error::InvalidConfig("grad_tol must be non-negative"));
        }
        if !(self.min_delta >= 0.0) || !(self.rho_regularization >= 0.0) {
            return Err(Error::InvalidConfig(
                "min_delta and rho_regularization must be non-negative",
            ));
        }
        if !(self.tcg.theta > 0.0) || !(self.tcg.kappa > 0.0 && self.tcg.kappa < 1.0) {
            return Err(Error::InvalidConfig(
                "tCG needs theta > 0 and kappa in (0, 1)",
            ));
        }
        if self.tcg.max_inner_iters == Some(0) {
            return Err(Error::InvalidConfig("max_inner_iters must be positive"));
        }
        Ok(())
    }
}

/// Radius update: shrink by 4 on poor agreement, double (capped) on very
/// good agreement at the boundary, otherwise keep.
pub fn update_radius(delta: f64, rho: f64, hit_boundary: bool, delta_bar: f64) -> f64 {
    if rho < 0.25 {
        delta / 4.0
    } else if rho > 0.75 && hit_boundary {
        (2.0 * delta).min(delta_bar)
    } else {
        delta
    }
}

/// `base + τ·dir` with `τ > 0` chosen so the result has norm `delta`.
pub fn boundary_step_to_radius(
    pt: &ProductPoint,
    base: &ProductTangent,
    dir: &ProductTangent,
    delta: f64,
) -> Result<(ProductTangent, f64)> {
    let a = product_inner(pt, dir, dir)?;
    let b = 2.0 * product_inner(pt, base, dir)?;
    let c = product_inner(pt, base, base)? - delta * delta;
    let disc = b * b - 4.0 * a * c;
    if !(a > 0.0) || !(c <= 0.0) || !disc.is_finite() {
        return Err(Error::NonFiniteValue("trust-region boundary intersection"));
    }
    let sq = libm::sqrt(disc.max(0.0));
    let tau = if b >= 0.0 {
        let q = -0.5 * (b + sq);
        if q == 0.0 {
            0.0
        } else {
            c / q
        }
    } else {
        0.5 * (sq - b) / a
    };
    Ok((base.combine(1.0, dir, tau), tau))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcgStop {
    ResidualTolerance,
    NegativeCurvature,
    ExceededRadius,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct TcgResult {
    pub step: ProductTangent,
    /// `Hess[step]`, accumulated alongside the step.
    pub hess_step: ProductTangent,
    pub hit_boundary: bool,
    pub inner_iters: usize,
    pub stop: TcgStop,
}

/// Approximately minimizes `⟨g, t⟩ + ½⟨H t, t⟩` over `‖t‖ ≤ delta`.
pub fn solve_tcg<H>(
    pt: &ProductPoint,
    grad: &ProductTangent,
    mut hess: H,
    delta: f64,
    cfg: &TcgConfig,
) -> Result<TcgResult>
where
    H: FnMut(&ProductTangent) -> Result<ProductTangent>,
{
    let max_inner = cfg
        .max_inner_iters
        .unwrap_or_else(|| pt.manifold_dim())
        .max(1);
    let mut eta = ProductTangent::zero_at(pt);
    let mut h_eta = ProductTangent::zero_at(pt);
    let mut res = grad.clone();
    let mut rr = product_inner(pt, &res, &res)?;
    let r0 = libm::sqrt(rr);
    let target = r0 * cfg.kappa.min(libm::pow(r0, cfg.theta));
    let mut dir = res.scaled(-1.0);
    let mut eta_sq = 0.0;

    for it in 1..=max_inner {
        let h_dir = hess(&dir)?;
        let d_hd = product_inner(pt, &dir, &h_dir)?;
        let d_sq = product_inner(pt, &dir, &dir)?;
        let eta_d = product_inner(pt, &eta, &dir)?;
        if !d_hd.is_finite() || !d_sq.is_finite() {
            return Err(Error::NonFiniteValue("truncated CG"));
        }
        let alpha = rr / d_hd;
        let next_sq = eta_sq + 2.0 * alpha * eta_d + alpha * alpha * d_sq;
        if d_hd <= 0.0 || next_sq >= delta * delta {
            let (step, tau) = boundary_step_to_radius(pt, &eta, &dir, delta)?;
            h_eta.axpy(tau, &h_dir);
            let stop = if d_hd <= 0.0 {
                TcgStop::NegativeCurvature
            } else {
                TcgStop::ExceededRadius
            };
            return Ok(TcgResult {
                step,
                hess_step: h_eta,
                hit_boundary: true,
                inner_iters: it,
                stop,
            });
        }
        eta.axpy(alpha, &dir);
        h_eta.axpy(alpha, &h_dir);
        eta_sq = next_sq;
        res.axpy(alpha, &h_dir);
        let rr_next = product_inner(pt, &res, &res)?;
        if libm::sqrt(rr_next) <= target {
            return Ok(TcgResult {
                step: eta,
                hess_step: h_eta,
                hit_boundary: false,
                inner_iters: it,
                stop: TcgStop::ResidualTolerance,
            });
        }
        let beta = rr_next / rr;
        rr = rr_next;
        dir = dir.combine(beta, &res, -1.0);
    }
    Ok(TcgResult {
        step: eta,
        hess_step: h_eta,
        hit_boundary: false,
        inner_iters: max_inner,
        stop: TcgStop::MaxIterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Gradient norm fell below the tolerance.
    Converged,
    /// Outer iteration cap reached.
    MaxIterations,
    /// The radius shrank below `min_delta` without reaching the tolerance.
    RadiusCollapse,
}

/// One outer iteration; `j`, `grad_norm` describe the iterate after the update.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub j: f64,
    pub grad_norm: f64,
    /// Radius used for this iteration's subproblem.
    pub delta: f64,
    pub rho: f64,
    pub accepted: bool,
    pub inner_iters: usize,
    pub tcg_stop: TcgStop,
}

#[derive(Debug, Clone)]
pub struct TrustRegionState {
    pub iterate: ProductPoint,
    pub delta: f64,
    pub delta_bar: f64,
    pub grad_tol: f64,
    pub last_rho: f64,
    pub grad_norm: f64,
    pub j_value: f64,
    pub iter: usize,
    pub history: Vec<IterationRecord>,
    pub termination: Termination,
}

impl TrustRegionState {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

pub fn trust_region_minimize<O: RiemannianObjective>(
    obj: &O,
    init: ProductPoint,
    cfg: &TrustRegionConfig,
) -> Result<TrustRegionState> {
    trust_region_minimize_with(obj, init, cfg, |_| {})
}

/// As [`trust_region_minimize`], calling `observer` after every outer iteration.
pub fn trust_region_minimize_with<O, F>(
    obj: &O,
    init: ProductPoint,
    cfg: &TrustRegionConfig,
    mut observer: F,
) -> Result<TrustRegionState>
where
    O: RiemannianObjective,
    F: FnMut(&IterationRecord),
{
    cfg.validate()?;
    let mut x = init;
    let mut ws = obj.prepare(&x)?;
    let mut j = obj.value(&x, &ws)?;
    let mut grad = obj.gradient(&x, &ws)?;
    let mut grad_norm = product_norm(&x, &grad)?;
    if !grad_norm.is_finite() {
        return Err(Error::NonFiniteValue("initial gradient"));
    }

    let delta_bar = cfg.delta_bar.unwrap_or(10.0 * (1.0 + grad_norm));
    let mut delta = cfg.delta0.unwrap_or(delta_bar / 8.0);
    if delta >= delta_bar && cfg.delta0.is_some() {
        return Err(Error::InvalidConfig("delta0 must lie in (0, delta_bar)"));
    }
    let grad_tol = cfg.grad_tol.unwrap_or(1e-8 * j.abs().max(1.0));

    let mut state = TrustRegionState {
        iterate: x.clone(),
        delta,
        delta_bar,
        grad_tol,
        last_rho: f64::NAN,
        grad_norm,
        j_value: j,
        iter: 0,
        history: Vec::new(),
        termination: Termination::MaxIterations,
    };
    if grad_norm <= grad_tol {
        state.termination = Termination::Converged;
        return Ok(state);
    }

    let mut termination = Termination::MaxIterations;
    let mut iter = 0;
    while iter < cfg.max_outer_iters {
        iter += 1;
        let tcg = solve_tcg(&x, &grad, |d| obj.hessian(&x, &ws, d), delta, &cfg.tcg)?;
        let model_change = product_inner(&x, &grad, &tcg.step)?
            + 0.5 * product_inner(&x, &tcg.hess_step, &tcg.step)?;
        let model_decrease = -model_change;

        let candidate = product_exp(&x, &tcg.step).and_then(|c| {
            let w = obj.prepare(&c)?;
            let jc = obj.value(&c, &w)?;
            Ok((c, w, jc))
        });
        let reg = cfg.rho_regularization * f64::EPSILON * j.abs().max(1.0);
        let (rho, accepted_candidate) = match candidate {
            Ok((c, w, jc)) if jc.is_finite() && model_decrease > 0.0 => {
                let rho = (j - jc + reg) / (model_decrease + reg);
                (rho, Some((c, w, jc)))
            }
            // A non-positive model decrease or an unrepresentable candidate
            // counts as a failed step.
            Ok(_)
            | Err(Error::ExponentOutOfRange { .. })
            | Err(Error::NotPositiveDefinite { .. }) => (f64::NEG_INFINITY, None),
            Err(e) => return Err(e),
        };

        let used_delta = delta;
        delta = update_radius(delta, rho, tcg.hit_boundary, delta_bar);
        let accepted = rho > cfg.rho_prime;
        if accepted {
            let (c, w, jc) = accepted_candidate.expect("finite rho implies a candidate");
            debug_assert!(c.a_r().min_eigenvalue() > 0.0);
            x = c;
            ws = w;
            j = jc;
            grad = obj.gradient(&x, &ws)?;
            grad_norm = product_norm(&x, &grad)?;
            if !grad_norm.is_finite() {
                return Err(Error::NonFiniteValue("gradient"));
            }
        }

        let record = IterationRecord {
            iter,
            j,
            grad_norm,
            delta: used_delta,
            rho,
            accepted,
            inner_iters: tcg.inner_iters,
            tcg_stop: tcg.stop,
        };
        observer(&record);
        state.history.push(record);
        state.last_rho = rho;

        if grad_norm <= grad_tol {
            termination = Termination::Converged;
            break;
        }
        if delta < cfg.min_delta {
            termination = Termination::RadiusCollapse;
            break;
        }
    }

    state.iterate = x;
    state.delta = delta;
    state.grad_norm = grad_norm;
    state.j_value = j;
    state.iter = iter;
    state.termination = termination;
    Ok(state)
}
