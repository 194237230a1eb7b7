//! Continuous-time LTI systems `ẋ = −Ax + Bu, y = Cx` with SPD `A`.
//!
//! H² quantities are computed exclusively through Gramian traces.

use crate::matlib::{
    self, ensure_finite, ensure_shape, ensure_square, solve_lyapunov_spectral,
    solve_sylvester_dense, solve_sylvester_sym_general, spd_eig, Matrix, SymEig,
};
use crate::objective::{fingerprint, GramianWorkspace};
use crate::{Error, Result};

/// Full-order system with symmetric positive definite `A` (state matrix is `−A`).
#[derive(Debug, Clone)]
pub struct LtiSystem {
    a: Matrix,
    b: Matrix,
    c: Matrix,
    a_eig: SymEig,
    h2_norm_sq: f64,
}

impl LtiSystem {
    pub fn new(a: Matrix, b: Matrix, c: Matrix) -> Result<Self> {
        let n = ensure_square("A", &a)?;
        if n == 0 {
            return Err(Error::InvalidConfig("system order must be positive"));
        }
        if b.nrows() != n {
            return Err(Error::ShapeMismatch {
                what: "B",
                expected: (n, b.ncols()),
                found: b.shape(),
            });
        }
        if c.ncols() != n {
            return Err(Error::ShapeMismatch {
                what: "C",
                expected: (c.nrows(), n),
                found: c.shape(),
            });
        }
        ensure_finite("B", &b)?;
        ensure_finite("C", &c)?;
        let a_eig = spd_eig("A", &a)?;
        let a = matlib::sym(&a);
        let sigma_c = solve_lyapunov_spectral(&a_eig, &(&b * b.transpose()))?;
        let h2_norm_sq = (&c * sigma_c * c.transpose()).trace().max(0.0);
        Ok(Self {
            a,
            b,
            c,
            a_eig,
            h2_norm_sq,
        })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Number of inputs.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// Number of outputs.
    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    /// Cached eigendecomposition of `A`.
    pub fn spectrum(&self) -> &SymEig {
        &self.a_eig
    }

    /// `Σ_c` solving `AΣ_c + Σ_cA = BBᵀ`.
    pub fn controllability_gramian(&self) -> Result<Matrix> {
        solve_lyapunov_spectral(&self.a_eig, &(&self.b * self.b.transpose()))
    }

    /// `Σ_o` solving `AΣ_o + Σ_oA = CᵀC`.
    pub fn observability_gramian(&self) -> Result<Matrix> {
        solve_lyapunov_spectral(&self.a_eig, &(self.c.transpose() * &self.c))
    }

    /// `‖G‖²_{H²} = tr(C Σ_c Cᵀ)`, computed once at construction.
    pub fn h2_norm_squared(&self) -> f64 {
        self.h2_norm_sq
    }

    /// The observability form `tr(Bᵀ Σ_o B)` of the same quantity.
    pub fn h2_norm_squared_dual(&self) -> Result<f64> {
        let sigma_o = self.observability_gramian()?;
        Ok((self.b.transpose() * sigma_o * &self.b).trace())
    }

    pub fn h2_norm(&self) -> f64 {
        libm::sqrt(self.h2_norm_sq)
    }

    /// `‖C − Bᵀ‖_F`, or `None` when the shapes rule out `C = Bᵀ`.
    pub fn gradient_defect(&self) -> Option<f64> {
        (self.c.shape() == (self.m(), self.n())).then(|| (&self.c - self.b.transpose()).norm())
    }

    /// The gradient-system view, when `C = Bᵀ` up to `tol · ‖B‖_F`.
    pub fn as_gradient_system(&self, tol: f64) -> Option<GradientSystem> {
        let defect = self.gradient_defect()?;
        (defect <= tol * self.b.norm()).then(|| GradientSystem {
            a: self.a.clone(),
            b: self.b.clone(),
            a_eig: self.a_eig.clone(),
            h2_norm_sq: self.h2_norm_sq,
        })
    }
}

/// A linear gradient system: `C = Bᵀ` is enforced by not storing `C`.
#[derive(Debug, Clone)]
pub struct GradientSystem {
    a: Matrix,
    b: Matrix,
    a_eig: SymEig,
    h2_norm_sq: f64,
}

impl GradientSystem {
    pub fn new(a: Matrix, b: Matrix) -> Result<Self> {
        let c = b.transpose();
        let full = LtiSystem::new(a, b, c)?;
        Ok(Self {
            a: full.a,
            b: full.b,
            a_eig: full.a_eig,
            h2_norm_sq: full.h2_norm_sq,
        })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn spectrum(&self) -> &SymEig {
        &self.a_eig
    }

    pub fn h2_norm_squared(&self) -> f64 {
        self.h2_norm_sq
    }

    /// Materializes `C = Bᵀ`.
    pub fn to_lti(&self) -> LtiSystem {
        LtiSystem {
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.b.transpose(),
            a_eig: self.a_eig.clone(),
            h2_norm_sq: self.h2_norm_sq,
        }
    }
}

/// A reduced model with SPD `A_r`: `ẋ_r = −A_r x_r + B_r u, y_r = C_r x_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSystem {
    a_r: Matrix,
    b_r: Matrix,
    c_r: Matrix,
}

impl ReducedSystem {
    pub fn new(a_r: Matrix, b_r: Matrix, c_r: Matrix) -> Result<Self> {
        let r = ensure_square("A_r", &a_r)?;
        if r == 0 {
            return Err(Error::InvalidOrder { r, n: 0 });
        }
        spd_eig("A_r", &a_r)?;
        ensure_shape("B_r", &b_r, (r, b_r.ncols()))?;
        ensure_shape("C_r", &c_r, (c_r.nrows(), r))?;
        ensure_finite("B_r", &b_r)?;
        ensure_finite("C_r", &c_r)?;
        Ok(Self {
            a_r: matlib::sym(&a_r),
            b_r,
            c_r,
        })
    }

    pub fn a_r(&self) -> &Matrix {
        &self.a_r
    }

    pub fn b_r(&self) -> &Matrix {
        &self.b_r
    }

    pub fn c_r(&self) -> &Matrix {
        &self.c_r
    }

    pub fn r(&self) -> usize {
        self.a_r.nrows()
    }

    pub fn into_model(self) -> ReducedModel {
        ReducedModel {
            a: self.a_r,
            b: self.b_r,
            c: self.c_r,
        }
    }
}

/// An unconstrained reduced triple, e.g. the output of balanced truncation,
/// whose `A_r` need not be symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedModel {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
}

impl ReducedModel {
    pub fn r(&self) -> usize {
        self.a.nrows()
    }

    /// `‖A_r − A_rᵀ‖_F`.
    pub fn symmetry_defect(&self) -> f64 {
        (&self.a - self.a.transpose()).norm()
    }

    /// Whether `A_r` is symmetric (to the crate-wide tolerance) and positive definite.
    pub fn is_spd(&self) -> bool {
        self.symmetry_defect() <= matlib::SYMMETRY_TOLERANCE * self.a.norm()
            && matlib::sym_eig(&self.a).is_ok_and(|e| e.is_positive_definite())
    }

    pub fn to_reduced_system(&self) -> Result<ReducedSystem> {
        matlib::symmetrized("A_r", &self.a)?;
        ReducedSystem::new(self.a.clone(), self.b.clone(), self.c.clone())
    }
}

fn check_compatible(full: &LtiSystem, a_r: &Matrix, b_r: &Matrix, c_r: &Matrix) -> Result<()> {
    let r = ensure_square("A_r", a_r)?;
    ensure_shape("B_r", b_r, (r, full.m()))?;
    ensure_shape("C_r", c_r, (full.p(), r))
}

/// `J = tr(CΣ_cCᵀ + C_rPC_rᵀ − 2C_rXᵀCᵀ)`, clamped at zero.
pub fn h2_error_squared(
    full: &LtiSystem,
    red: &ReducedSystem,
    ws: &GramianWorkspace,
) -> Result<f64> {
    check_compatible(full, &red.a_r, &red.b_r, &red.c_r)?;
    if ws.fingerprint() != fingerprint(&red.a_r, &red.b_r, Some(&red.c_r)) {
        return Err(Error::StaleWorkspace);
    }
    let c = full.c();
    let reduced = (&red.c_r * ws.p() * red.c_r.transpose()).trace();
    let cross = (&red.c_r * ws.x().transpose() * c.transpose()).trace();
    Ok(clamp_error(full.h2_norm_squared() + reduced - 2.0 * cross))
}

/// The observability form `tr(BᵀΣ_oB + B_rᵀQB_r + 2BᵀYB_r)`.
pub fn h2_error_squared_dual(
    full: &LtiSystem,
    red: &ReducedSystem,
    ws: &GramianWorkspace,
) -> Result<f64> {
    check_compatible(full, &red.a_r, &red.b_r, &red.c_r)?;
    if ws.fingerprint() != fingerprint(&red.a_r, &red.b_r, Some(&red.c_r)) {
        return Err(Error::StaleWorkspace);
    }
    let b = full.b();
    let base = full.h2_norm_squared_dual()?;
    let reduced = (red.b_r.transpose() * ws.q() * &red.b_r).trace();
    let cross = (b.transpose() * ws.y() * &red.b_r).trace();
    Ok(clamp_error(base + reduced + 2.0 * cross))
}

/// H² error of an arbitrary stable reduced triple (nonsymmetric `A_r` allowed).
///
/// Uses `A_rP + PA_rᵀ = B_rB_rᵀ` and `AX + XA_rᵀ = BB_rᵀ`.
pub fn h2_error_squared_model(full: &LtiSystem, model: &ReducedModel) -> Result<f64> {
    check_compatible(full, &model.a, &model.b, &model.c)?;
    ensure_finite("A_r", &model.a)?;
    let at = model.a.transpose();
    let p = solve_sylvester_dense(&model.a, &at, &(&model.b * model.b.transpose()))?;
    let x = solve_sylvester_sym_general(full.spectrum(), &at, &(full.b() * model.b.transpose()))?;
    let reduced = (&model.c * p * model.c.transpose()).trace();
    let cross = (&model.c * x.transpose() * full.c().transpose()).trace();
    Ok(clamp_error(full.h2_norm_squared() + reduced - 2.0 * cross))
}

/// `‖G − G_r‖_{H²}` from its square.
pub fn h2_error_from_squared(j: f64) -> f64 {
    libm::sqrt(j.max(0.0))
}

// Trace cancellation near an optimum can leave a tiny negative residue.
fn clamp_error(j: f64) -> f64 {
    j.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::manifold::ProductPoint;
    use crate::objective::H2Objective;
    use approx::assert_relative_eq;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
    }

    fn random_system(rng: &mut ChaCha8Rng, n: usize, m: usize, p: usize) -> LtiSystem {
        let g = random(rng, n, n);
        let a = &g * g.transpose() + Matrix::identity(n, n);
        LtiSystem::new(a, random(rng, n, m), random(rng, p, n)).unwrap()
    }

    fn scalar(v: f64) -> Matrix {
        Matrix::from_element(1, 1, v)
    }

    #[test]
    fn gramian_examples() {
        let sys = LtiSystem::new(
            Matrix::identity(2, 2),
            Matrix::identity(2, 2),
            Matrix::identity(2, 2),
        )
        .unwrap();
        assert_relative_eq!(
            sys.controllability_gramian().unwrap(),
            Matrix::identity(2, 2) * 0.5,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            sys.observability_gramian().unwrap(),
            Matrix::identity(2, 2) * 0.5,
            epsilon = 1e-15
        );

        let sys = fixtures::two_state_system();
        let sc = sys.controllability_gramian().unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[0.25, -1.0 / 3.0, -1.0 / 3.0, 0.5]);
        assert_relative_eq!(sc, expected, epsilon = 1e-14);
        let so = sys.observability_gramian().unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[0.25, 1.0 / 3.0, 1.0 / 3.0, 0.5]);
        assert_relative_eq!(so, expected, epsilon = 1e-14);

        let (a, b, c) = (1.7, -0.4, 2.5);
        let sys = LtiSystem::new(scalar(a), scalar(b), scalar(c)).unwrap();
        assert_relative_eq!(
            sys.controllability_gramian().unwrap()[(0, 0)],
            b * b / (2.0 * a),
            epsilon = 1e-15
        );
        assert_relative_eq!(
            sys.observability_gramian().unwrap()[(0, 0)],
            c * c / (2.0 * a),
            epsilon = 1e-15
        );
    }

    #[test]
    fn gramians_satisfy_their_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sys = random_system(&mut rng, 9, 2, 3);
        let sc = sys.controllability_gramian().unwrap();
        let res = (sys.a() * &sc + &sc * sys.a() - sys.b() * sys.b().transpose()).norm();
        assert!(res <= 1e-10 * sys.a().norm() * sc.norm());
        assert!(matlib::sym_eig(&sc).unwrap().min() > -1e-12);
    }

    #[test]
    fn h2_norm_examples() {
        let one = scalar(1.0);
        let sys = LtiSystem::new(one.clone(), one.clone(), one).unwrap();
        assert_relative_eq!(sys.h2_norm_squared(), 0.5, epsilon = 1e-15);

        let sys = fixtures::two_state_system();
        assert_relative_eq!(
            sys.h2_norm_squared(),
            sys.h2_norm_squared_dual().unwrap(),
            max_relative = 1e-10
        );
        assert_relative_eq!(sys.h2_norm_squared(), 1.0 / 12.0, max_relative = 1e-13);

        let sys = LtiSystem::new(
            Matrix::identity(3, 3),
            Matrix::identity(3, 1),
            Matrix::zeros(2, 3),
        )
        .unwrap();
        assert_eq!(sys.h2_norm_squared(), 0.0);
    }

    #[test]
    fn gramian_duality_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..30 {
            let n = rng.random_range(1..=50);
            let m = rng.random_range(1..=4);
            let p = rng.random_range(1..=4);
            let sys = random_system(&mut rng, n, m, p);
            assert_relative_eq!(
                sys.h2_norm_squared(),
                sys.h2_norm_squared_dual().unwrap(),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn constructor_rejects_bad_systems() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            LtiSystem::new(a, Matrix::zeros(2, 1), Matrix::zeros(1, 2)),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(matches!(
            LtiSystem::new(
                Matrix::identity(2, 2),
                Matrix::zeros(3, 1),
                Matrix::zeros(1, 2)
            ),
            Err(Error::ShapeMismatch { .. })
        ));
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            LtiSystem::new(a, Matrix::zeros(2, 1), Matrix::zeros(1, 2)),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn identical_reduced_system_has_zero_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let sys = random_system(&mut rng, 4, 2, 2);
        let red = ReducedSystem::new(sys.a().clone(), sys.b().clone(), sys.c().clone()).unwrap();
        let obj = H2Objective::new(&sys);
        let pt = ProductPoint::from_reduced(&red).unwrap();
        let ws = obj.solve_workspace(&pt).unwrap();
        let j = h2_error_squared(&sys, &red, &ws).unwrap();
        assert!(j.abs() <= 1e-12 * sys.h2_norm_squared());
        assert!(
            h2_error_squared_model(&sys, &red.clone().into_model()).unwrap()
                <= 1e-12 * sys.h2_norm_squared()
        );
    }

    #[test]
    fn two_state_closed_form_values() {
        let sys = fixtures::two_state_system();
        let obj = H2Objective::new(&sys);
        let eval = |ar: f64, br: f64, cr: f64| {
            let red = ReducedSystem::new(scalar(ar), scalar(br), scalar(cr)).unwrap();
            let pt = ProductPoint::from_reduced(&red).unwrap();
            let ws = obj.solve_workspace(&pt).unwrap();
            let j = h2_error_squared(&sys, &red, &ws).unwrap();
            let jd = h2_error_squared_dual(&sys, &red, &ws).unwrap();
            assert_relative_eq!(j, jd, max_relative = 1e-9);
            j
        };
        assert_relative_eq!(eval(2.0, -1.0, 1.0), 0.5, max_relative = 1e-12);
        let s33 = libm::sqrt(33.0);
        let ar = -0.5 + s33 / 6.0;
        let k = 6.0 - s33;
        assert_relative_eq!(
            eval(ar, 1.0, k),
            (569.0 - 99.0 * s33) / 24.0,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            eval(ar, k / 3.0, 3.0),
            (569.0 - 99.0 * s33) / 24.0,
            max_relative = 1e-10
        );
    }

    #[test]
    fn stale_workspace_is_rejected() {
        let sys = fixtures::two_state_system();
        let obj = H2Objective::new(&sys);
        let red1 = ReducedSystem::new(scalar(1.0), scalar(1.0), scalar(1.0)).unwrap();
        let red2 = ReducedSystem::new(scalar(1.0), scalar(1.0), scalar(1.5)).unwrap();
        let ws = obj
            .solve_workspace(&ProductPoint::from_reduced(&red1).unwrap())
            .unwrap();
        assert_eq!(
            h2_error_squared(&sys, &red2, &ws),
            Err(Error::StaleWorkspace)
        );
    }

    /// Error system `diag(A, A_r)`, `(B; B_r)`, `(C, −C_r)` as an independent oracle.
    fn augmented_error(sys: &LtiSystem, red: &ReducedSystem) -> f64 {
        let (n, r) = (sys.n(), red.r());
        let mut a = Matrix::zeros(n + r, n + r);
        a.view_mut((0, 0), (n, n)).copy_from(sys.a());
        a.view_mut((n, n), (r, r)).copy_from(red.a_r());
        let mut b = Matrix::zeros(n + r, sys.m());
        b.view_mut((0, 0), (n, sys.m())).copy_from(sys.b());
        b.view_mut((n, 0), (r, sys.m())).copy_from(red.b_r());
        let mut c = Matrix::zeros(sys.p(), n + r);
        c.view_mut((0, 0), (sys.p(), n)).copy_from(sys.c());
        c.view_mut((0, n), (sys.p(), r)).copy_from(&(-red.c_r()));
        LtiSystem::new(a, b, c).unwrap().h2_norm_squared()
    }

    fn random_reduced(rng: &mut ChaCha8Rng, r: usize, m: usize, p: usize) -> ReducedSystem {
        let g = random(rng, r, r);
        ReducedSystem::new(
            &g * g.transpose() + Matrix::identity(r, r) * 0.3,
            random(rng, r, m),
            random(rng, p, r),
        )
        .unwrap()
    }

    #[test]
    fn error_matches_augmented_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..20 {
            let n = rng.random_range(2..=15);
            let r = rng.random_range(1..n);
            let (m, p) = (rng.random_range(1..=3), rng.random_range(1..=3));
            let sys = random_system(&mut rng, n, m, p);
            let red = random_reduced(&mut rng, r, m, p);
            let obj = H2Objective::new(&sys);
            let ws = obj
                .solve_workspace(&ProductPoint::from_reduced(&red).unwrap())
                .unwrap();
            let j = h2_error_squared(&sys, &red, &ws).unwrap();
            let oracle = augmented_error(&sys, &red);
            assert_relative_eq!(j, oracle, max_relative = 1e-9);
            assert_relative_eq!(
                j,
                h2_error_squared_dual(&sys, &red, &ws).unwrap(),
                max_relative = 1e-9
            );
            assert_relative_eq!(
                j,
                h2_error_squared_model(&sys, &red.into_model()).unwrap(),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn error_invariant_under_orthogonal_state_change() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let sys = random_system(&mut rng, 8, 2, 3);
        let red = random_reduced(&mut rng, 3, 2, 3);
        let o = random(&mut rng, 3, 3).qr().q();
        let rotated = ReducedSystem::new(
            o.transpose() * red.a_r() * &o,
            o.transpose() * red.b_r(),
            red.c_r() * &o,
        )
        .unwrap();
        let obj = H2Objective::new(&sys);
        let j1 = {
            let ws = obj
                .solve_workspace(&ProductPoint::from_reduced(&red).unwrap())
                .unwrap();
            h2_error_squared(&sys, &red, &ws).unwrap()
        };
        let j2 = {
            let ws = obj
                .solve_workspace(&ProductPoint::from_reduced(&rotated).unwrap())
                .unwrap();
            h2_error_squared(&sys, &rotated, &ws).unwrap()
        };
        assert_relative_eq!(j1, j2, max_relative = 1e-10);
    }

    #[test]
    fn nonsymmetric_model_error_matches_similarity_invariance() {
        // A similarity transform of an SPD reduced model gives a nonsymmetric
        // A_r with the same transfer function.
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let sys = random_system(&mut rng, 7, 2, 2);
        let red = random_reduced(&mut rng, 3, 2, 2);
        let t = random(&mut rng, 3, 3) + Matrix::identity(3, 3) * 3.0;
        let ti = t.clone().try_inverse().unwrap();
        let model = ReducedModel {
            a: &ti * red.a_r() * &t,
            b: &ti * red.b_r(),
            c: red.c_r() * &t,
        };
        assert!(!model.is_spd());
        assert!(model.symmetry_defect() > 1e-3);
        let j = h2_error_squared_model(&sys, &model).unwrap();
        assert_relative_eq!(j, augmented_error(&sys, &red), max_relative = 1e-9);
    }

    #[test]
    fn gradient_system_view() {
        let a = Matrix::from_diagonal(&DVector::from_vec(alloc::vec![1.0, 2.0, 3.0]));
        let b = Matrix::from_row_slice(3, 1, &[1.0, -1.0, 0.5]);
        let g = GradientSystem::new(a, b).unwrap();
        let lti = g.to_lti();
        assert_eq!(lti.c(), &g.b().transpose());
        assert_eq!(lti.gradient_defect(), Some(0.0));
        assert!(lti.as_gradient_system(1e-12).is_some());
        assert!(fixtures::five_state_system()
            .as_gradient_system(1e-12)
            .is_none());
    }

    #[test]
    fn clamp_behaviour() {
        assert_eq!(clamp_error(-1e-13), 0.0);
        assert_eq!(h2_error_from_squared(-1e-13), 0.0);
        assert_relative_eq!(h2_error_from_squared(0.25), 0.5);
    }
}
