//! The squared H² error `J(A_r, B_r, C_r) = ‖G − G_r‖²_{H²}` and its
//! derivatives.
//!
//! With `A_r` symmetric the Gramian-type unknowns satisfy
//!
//! ```text
//! A_rP + PA_r = B_rB_rᵀ      AX + XA_r = BB_rᵀ
//! A_rQ + QA_r = C_rᵀC_r      AY + YA_r = −CᵀC_r
//! ```
//!
//! and `∇J̄ = 2(−QP − YᵀX, QB_r + YᵀB, C_rP − CX)`. For gradient systems
//! (`C = Bᵀ`, `C_r = B_rᵀ`) one has `Q = P` and `Y = −X`, so only two of the
//! four equations are solved.

use core::sync::atomic::{AtomicUsize, Ordering};

use alloc::borrow::Cow;

use crate::lti::{GradientSystem, LtiSystem};
use crate::manifold::{
    spd_grad_from_euclidean, spd_hess_from_euclidean, ProductPoint, ProductTangent,
};
use crate::matlib::{ensure_shape, solve_lyapunov_spectral, solve_sylvester_spectral, sym, Matrix};
use crate::{Error, Result};

/// FNV-1a hash of the shapes and entry bits of a reduced triple.
pub fn fingerprint(a: &Matrix, b: &Matrix, c: Option<&Matrix>) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let mut feed = |word: u64| {
        for byte in word.to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(PRIME);
        }
    };
    for m in [Some(a), Some(b), c] {
        match m {
            Some(m) => {
                feed(m.nrows() as u64);
                feed(m.ncols() as u64);
                m.iter().for_each(|v| feed(v.to_bits()));
            }
            None => feed(u64::MAX),
        }
    }
    h
}

fn point_fingerprint(pt: &ProductPoint) -> u64 {
    fingerprint(pt.a_r().matrix(), pt.b_r(), pt.c_r())
}

/// `C_r`, or `B_rᵀ` on the gradient-system manifold.
fn c_r_of(pt: &ProductPoint) -> Cow<'_, Matrix> {
    match pt.c_r() {
        Some(c) => Cow::Borrowed(c),
        None => Cow::Owned(pt.b_r().transpose()),
    }
}

/// `P, Q, X, Y` at one point, tagged with that point's fingerprint.
#[derive(Debug, Clone)]
pub struct GramianWorkspace {
    p: Matrix,
    q: Matrix,
    x: Matrix,
    y: Matrix,
    fingerprint: u64,
}

impl GramianWorkspace {
    pub fn p(&self) -> &Matrix {
        &self.p
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &Matrix {
        &self.y
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    fn check(&self, pt: &ProductPoint) -> Result<()> {
        if self.fingerprint == point_fingerprint(pt) {
            Ok(())
        } else {
            Err(Error::StaleWorkspace)
        }
    }
}

/// `P′, Q′, X′, Y′` for one direction.
#[derive(Debug, Clone)]
pub struct DerivativeWorkspace {
    p: Matrix,
    q: Matrix,
    x: Matrix,
    y: Matrix,
}

impl DerivativeWorkspace {
    pub fn p(&self) -> &Matrix {
        &self.p
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &Matrix {
        &self.y
    }
}

/// The Euclidean gradient triple; the `a` block is generally not symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanGradient {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Option<Matrix>,
}

/// A smooth cost on a product manifold, as consumed by the trust-region solver.
pub trait RiemannianObjective {
    type Workspace;

    /// Solves whatever auxiliary equations the point needs.
    fn prepare(&self, pt: &ProductPoint) -> Result<Self::Workspace>;

    fn value(&self, pt: &ProductPoint, ws: &Self::Workspace) -> Result<f64>;

    fn gradient(&self, pt: &ProductPoint, ws: &Self::Workspace) -> Result<ProductTangent>;

    fn hessian(
        &self,
        pt: &ProductPoint,
        ws: &Self::Workspace,
        dir: &ProductTangent,
    ) -> Result<ProductTangent>;
}

fn check_direction(pt: &ProductPoint, dir: &ProductTangent, with_c: bool) -> Result<()> {
    let r = pt.r();
    ensure_shape("direction xi", &dir.xi, (r, r))?;
    ensure_shape("direction eta", &dir.eta, pt.b_r().shape())?;
    match (&dir.zeta, with_c) {
        (Some(z), true) => ensure_shape("direction zeta", z, (c_r_of(pt).nrows(), r)),
        (None, false) => Ok(()),
        (Some(z), false) => Err(Error::ShapeMismatch {
            what: "direction zeta",
            expected: (0, 0),
            found: z.shape(),
        }),
        (None, true) => Err(Error::ShapeMismatch {
            what: "direction zeta",
            expected: (c_r_of(pt).nrows(), r),
            found: (0, 0),
        }),
    }
}

/// `J` for a general full-order system.
#[derive(Debug)]
pub struct H2Objective<'a> {
    full: &'a LtiSystem,
    solves: AtomicUsize,
}

impl<'a> H2Objective<'a> {
    pub fn new(full: &'a LtiSystem) -> Self {
        Self {
            full,
            solves: AtomicUsize::new(0),
        }
    }

    pub fn system(&self) -> &LtiSystem {
        self.full
    }

    /// Number of Lyapunov/Sylvester solves performed so far.
    pub fn sylvester_solves(&self) -> usize {
        self.solves.load(Ordering::Relaxed)
    }

    pub fn reset_sylvester_solves(&self) {
        self.solves.store(0, Ordering::Relaxed);
    }

    fn count(&self, k: usize) {
        self.solves.fetch_add(k, Ordering::Relaxed);
    }

    fn check_point(&self, pt: &ProductPoint) -> Result<()> {
        ensure_shape("B_r", pt.b_r(), (pt.r(), self.full.m()))?;
        ensure_shape("C_r", &c_r_of(pt), (self.full.p(), pt.r()))
    }

    pub fn solve_workspace(&self, pt: &ProductPoint) -> Result<GramianWorkspace> {
        self.check_point(pt)?;
        let (a, b, c) = (self.full.spectrum(), self.full.b(), self.full.c());
        let (ar, br, cr) = (pt.a_r().eig(), pt.b_r(), c_r_of(pt));
        let p = solve_lyapunov_spectral(ar, &(br * br.transpose()))?;
        let q = solve_lyapunov_spectral(ar, &(cr.transpose() * cr.as_ref()))?;
        let x = solve_sylvester_spectral(a, ar, &(b * br.transpose()))?;
        let y = -solve_sylvester_spectral(a, ar, &(c.transpose() * cr.as_ref()))?;
        self.count(4);
        Ok(GramianWorkspace {
            p,
            q,
            x,
            y,
            fingerprint: point_fingerprint(pt),
        })
    }

    /// `tr(CΣ_cCᵀ + C_rPC_rᵀ − 2C_rXᵀCᵀ)`, unclamped.
    pub fn eval_j(&self, pt: &ProductPoint, ws: &GramianWorkspace) -> Result<f64> {
        ws.check(pt)?;
        let cr = c_r_of(pt);
        let reduced = (cr.as_ref() * &ws.p * cr.transpose()).trace();
        let cross = (cr.as_ref() * ws.x.transpose() * self.full.c().transpose()).trace();
        let j = self.full.h2_norm_squared() + reduced - 2.0 * cross;
        if j.is_finite() {
            Ok(j)
        } else {
            Err(Error::NonFiniteValue("H2 error"))
        }
    }

    pub fn euclidean_grad(
        &self,
        pt: &ProductPoint,
        ws: &GramianWorkspace,
    ) -> Result<EuclideanGradient> {
        ws.check(pt)?;
        let (b, c) = (self.full.b(), self.full.c());
        let cr = c_r_of(pt);
        let yt = ws.y.transpose();
        Ok(EuclideanGradient {
            a: (&ws.q * &ws.p + &yt * &ws.x) * -2.0,
            b: (&ws.q * pt.b_r() + &yt * b) * 2.0,
            c: Some((cr.as_ref() * &ws.p - c * &ws.x) * 2.0),
        })
    }

    /// `(A_r sym(∇_A) A_r, ∇_B, ∇_C)`.
    pub fn riemannian_grad(
        &self,
        pt: &ProductPoint,
        ws: &GramianWorkspace,
    ) -> Result<ProductTangent> {
        let g = self.euclidean_grad(pt, ws)?;
        let xi = spd_grad_from_euclidean(pt.a_r(), &g.a)?.into_matrix();
        Ok(ProductTangent {
            xi,
            eta: g.b,
            zeta: g.c,
        })
    }

    pub fn solve_derivative_workspace(
        &self,
        pt: &ProductPoint,
        ws: &GramianWorkspace,
        dir: &ProductTangent,
    ) -> Result<DerivativeWorkspace> {
        ws.check(pt)?;
        check_direction(pt, dir, true)?;
        let (a, b, c) = (self.full.spectrum(), self.full.b(), self.full.c());
        let (ar, br, cr) = (pt.a_r().eig(), pt.b_r(), c_r_of(pt));
        let (xi, eta) = (&dir.xi, &dir.eta);
        let zeta = dir.zeta.as_ref().expect("checked above");
        let bt = eta * br.transpose();
        let rhs_p = -(xi * &ws.p + &ws.p * xi) + &bt + bt.transpose();
        let ct = zeta.transpose() * cr.as_ref();
        let rhs_q = -(xi * &ws.q + &ws.q * xi) + &ct + ct.transpose();
        let p = solve_lyapunov_spectral(ar, &rhs_p)?;
        let q = solve_lyapunov_spectral(ar, &rhs_q)?;
        let x = solve_sylvester_spectral(a, ar, &(-(&ws.x * xi) + b * eta.transpose()))?;
        let y = solve_sylvester_spectral(a, ar, &(-(&ws.y * xi) - c.transpose() * zeta))?;
        self.count(4);
        Ok(DerivativeWorkspace { p, q, x, y })
    }

    pub fn riemannian_hess(
        &self,
        pt: &ProductPoint,
        ws: &GramianWorkspace,
        dir: &ProductTangent,
    ) -> Result<ProductTangent> {
        let g = self.euclidean_grad(pt, ws)?;
        let d = self.solve_derivative_workspace(pt, ws, dir)?;
        let (b, c) = (self.full.b(), self.full.c());
        let zeta = dir.zeta.as_ref().expect("checked above");
        let yt = ws.y.transpose();
        let dyt = d.y.transpose();
        let dg_a = (&d.q * &ws.p + &ws.q * &d.p + &dyt * &ws.x + &yt * &d.x) * -2.0;
        let xi = spd_hess_from_euclidean(pt.a_r(), &g.a, &dg_a, &dir.spd_part())?.into_matrix();
        let eta = (&d.q * pt.b_r() + &ws.q * &dir.eta + &dyt * b) * 2.0;
        let zeta = (zeta * &ws.p + c_r_of(pt).as_ref() * &d.p - c * &d.x) * 2.0;
        Ok(ProductTangent {
            xi,
            eta,
            zeta: Some(zeta),
        })
    }
}

impl RiemannianObjective for H2Objective<'_> {
    type Workspace = GramianWorkspace;

    fn prepare(&self, pt: &ProductPoint) -> Result<GramianWorkspace> {
        self.solve_workspace(pt)
    }

    fn value(&self, pt: &ProductPoint, ws: &GramianWorkspace) -> Result<f64> {
        self.eval_j(pt, ws)
    }

    fn gradient(&self, pt: &ProductPoint, ws: &GramianWorkspace) -> Result<ProductTangent> {
        self.riemannian_grad(pt, ws)
    }

    fn hessian(
        &self,
        pt: &ProductPoint,
        ws: &GramianWorkspace,
        dir: &ProductTangent,
    ) -> Result<ProductTangent> {
        self.riemannian_hess(pt, ws, dir)
    }
}

/// `P` and `X` for a gradient system; `Q = P` and `Y = −X` are implied.
#[derive(Debug, Clone)]
pub struct GradientWorkspace {
    p: Matrix,
    x: Matrix,
    fingerprint: u64,
}

impl GradientWorkspace {
    pub fn p(&self) -> &Matrix {
        &self.p
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    fn check(&self, pt: &ProductPoint) -> Result<()> {
        if self.fingerprint == point_fingerprint(pt) {
            Ok(())
        } else {
            Err(Error::StaleWorkspace)
        }
    }
}

/// `J̃(A_r, B_r) = J(A_r, B_r, B_rᵀ)` for a gradient system, on `Sym₊(r) × R^{r×m}`.
#[derive(Debug)]
pub struct GradientH2Objective<'a> {
    full: &'a GradientSystem,
    solves: AtomicUsize,
}

impl<'a> GradientH2Objective<'a> {
    pub fn new(full: &'a GradientSystem) -> Self {
        Self {
            full,
            solves: AtomicUsize::new(0),
        }
    }

    pub fn system(&self) -> &GradientSystem {
        self.full
    }

    pub fn sylvester_solves(&self) -> usize {
        self.solves.load(Ordering::Relaxed)
    }

    pub fn reset_sylvester_solves(&self) {
        self.solves.store(0, Ordering::Relaxed);
    }

    fn check_point(&self, pt: &ProductPoint) -> Result<()> {
        if !pt.is_gradient_form() {
            return Err(Error::InvalidConfig(
                "gradient-system objective needs a point without C_r",
            ));
        }
        ensure_shape("B_r", pt.b_r(), (pt.r(), self.full.m()))
    }

    pub fn solve_workspace(&self, pt: &ProductPoint) -> Result<GradientWorkspace> {
        self.check_point(pt)?;
        let (ar, br) = (pt.a_r().eig(), pt.b_r());
        let p = solve_lyapunov_spectral(ar, &(br * br.transpose()))?;
        let x =
            solve_sylvester_spectral(self.full.spectrum(), ar, &(self.full.b() * br.transpose()))?;
        self.solves.fetch_add(2, Ordering::Relaxed);
        Ok(GradientWorkspace {
            p,
            x,
            fingerprint: point_fingerprint(pt),
        })
    }

    /// `‖G‖² + tr(B_rᵀPB_r) − 2tr(B_rᵀXᵀB)`.
    pub fn eval_j(&self, pt: &ProductPoint, ws: &GradientWorkspace) -> Result<f64> {
        ws.check(pt)?;
        let br = pt.b_r();
        let reduced = (br.transpose() * &ws.p * br).trace();
        let cross = (br.transpose() * ws.x.transpose() * self.full.b()).trace();
        let j = self.full.h2_norm_squared() + reduced - 2.0 * cross;
        if j.is_finite() {
            Ok(j)
        } else {
            Err(Error::NonFiniteValue("H2 error"))
        }
    }

    /// `(−2(P² − XᵀX), 4PB_r − 4XᵀB)`.
    pub fn euclidean_grad(
        &self,
        pt: &ProductPoint,
        ws: &GradientWorkspace,
    ) -> Result<EuclideanGradient> {
        ws.check(pt)?;
        let xt = ws.x.transpose();
        Ok(EuclideanGradient {
            a: (&ws.p * &ws.p - &xt * &ws.x) * -2.0,
            b: (&ws.p * pt.b_r() - &xt * self.full.b()) * 4.0,
            c: None,
        })
    }

    pub fn riemannian_grad(
        &self,
        pt: &ProductPoint,
        ws: &GradientWorkspace,
    ) -> Result<ProductTangent> {
        let g = self.euclidean_grad(pt, ws)?;
        let xi = spd_grad_from_euclidean(pt.a_r(), &g.a)?.into_matrix();
        Ok(ProductTangent {
            xi,
            eta: g.b,
            zeta: None,
        })
    }

    /// `P′` and `X′`; the `q`, `y` slots hold `P′` and `−X′`.
    pub fn solve_derivative_workspace(
        &self,
        pt: &ProductPoint,
        ws: &GradientWorkspace,
        dir: &ProductTangent,
    ) -> Result<DerivativeWorkspace> {
        ws.check(pt)?;
        check_direction(pt, dir, false)?;
        let (ar, br) = (pt.a_r().eig(), pt.b_r());
        let (xi, eta) = (&dir.xi, &dir.eta);
        let bt = eta * br.transpose();
        let rhs_p = -(xi * &ws.p + &ws.p * xi) + &bt + bt.transpose();
        let p = solve_lyapunov_spectral(ar, &rhs_p)?;
        let rhs_x = -(&ws.x * xi) + self.full.b() * eta.transpose();
        let x = solve_sylvester_spectral(self.full.spectrum(), ar, &rhs_x)?;
        self.solves.fetch_add(2, Ordering::Relaxed);
        Ok(DerivativeWorkspace {
            q: p.clone(),
            y: -&x,
            p,
            x,
        })
    }

    pub fn riemannian_hess(
        &self,
        pt: &ProductPoint,
        ws: &GradientWorkspace,
        dir: &ProductTangent,
    ) -> Result<ProductTangent> {
        let g = self.euclidean_grad(pt, ws)?;
        let d = self.solve_derivative_workspace(pt, ws, dir)?;
        let xt = ws.x.transpose();
        let dxt = d.x.transpose();
        let dg_a = (&d.p * &ws.p + &ws.p * &d.p - &dxt * &ws.x - &xt * &d.x) * -2.0;
        let xi = spd_hess_from_euclidean(pt.a_r(), &g.a, &dg_a, &dir.spd_part())?.into_matrix();
        let eta = (&d.p * pt.b_r() + &ws.p * &dir.eta) * 4.0 - &dxt * self.full.b() * 4.0;
        Ok(ProductTangent {
            xi,
            eta,
            zeta: None,
        })
    }
}

impl RiemannianObjective for GradientH2Objective<'_> {
    type Workspace = GradientWorkspace;

    fn prepare(&self, pt: &ProductPoint) -> Result<GradientWorkspace> {
        self.solve_workspace(pt)
    }

    fn value(&self, pt: &ProductPoint, ws: &GradientWorkspace) -> Result<f64> {
        self.eval_j(pt, ws)
    }

    fn gradient(&self, pt: &ProductPoint, ws: &GradientWorkspace) -> Result<ProductTangent> {
        self.riemannian_grad(pt, ws)
    }

    fn hessian(
        &self,
        pt: &ProductPoint,
        ws: &GradientWorkspace,
        dir: &ProductTangent,
    ) -> Result<ProductTangent> {
        self.riemannian_hess(pt, ws, dir)
    }
}

/// Largest allowed `‖UᵀU − I‖_F` for a Stiefel point.
pub const ORTHONORMALITY_TOLERANCE: f64 = 1e-10;

pub(crate) fn check_orthonormal(u: &Matrix) -> Result<()> {
    let r = u.ncols();
    let defect = (u.transpose() * u - Matrix::identity(r, r)).norm();
    if defect <= ORTHONORMALITY_TOLERANCE {
        Ok(())
    } else {
        Err(Error::NotOrthonormal { defect })
    }
}

/// The projected triple `(UᵀAU, UᵀB, CU)` as a point of `M`.
pub fn stiefel_point(full: &LtiSystem, u: &Matrix) -> Result<ProductPoint> {
    ensure_shape("U", u, (full.n(), u.ncols()))?;
    check_orthonormal(u)?;
    let a_r = sym(&(u.transpose() * full.a() * u));
    ProductPoint::new(a_r, u.transpose() * full.b(), full.c() * u)
}

/// `J₃(U) = J(UᵀAU, UᵀB, CU)`.
pub fn stiefel_value(full: &LtiSystem, u: &Matrix) -> Result<f64> {
    let obj = H2Objective::new(full);
    let pt = stiefel_point(full, u)?;
    let ws = obj.solve_workspace(&pt)?;
    obj.eval_j(&pt, &ws)
}

/// Stiefel gradient `∇J̄₃ − U sym(Uᵀ∇J̄₃)` with
/// `∇J̄₃ = 2AU sym(∇_A J̄) + B(∇_B J̄)ᵀ + Cᵀ∇_C J̄` at the projected triple.
pub fn stiefel_grad_j3(full: &LtiSystem, u: &Matrix) -> Result<Matrix> {
    Ok(stiefel_value_and_grad(full, u)?.1)
}

pub(crate) fn stiefel_value_and_grad(full: &LtiSystem, u: &Matrix) -> Result<(f64, Matrix)> {
    let obj = H2Objective::new(full);
    let pt = stiefel_point(full, u)?;
    let ws = obj.solve_workspace(&pt)?;
    let j = obj.eval_j(&pt, &ws)?;
    let g = obj.euclidean_grad(&pt, &ws)?;
    let gc = g.c.expect("general objective has a C block");
    let eucl =
        full.a() * u * sym(&g.a) * 2.0 + full.b() * g.b.transpose() + full.c().transpose() * gc;
    let grad = &eucl - u * sym(&(u.transpose() * &eucl));
    Ok((j, grad))
}
