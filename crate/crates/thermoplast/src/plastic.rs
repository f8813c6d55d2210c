//! Convex-analysis core of the flow rule: the von Mises admissible set,
//! its nearest-point projection (radial return), the Yosida regularization
//! of the associated subdifferential flow, and scalar truncation.
//!
//! The Yosida map is
//!
//! ```text
//! Y_lambda(T) = (|PT| - k)_+ / (2 lambda) * PT / |PT|,    Y_lambda(T) = 0 when PT = 0,
//! ```
//!
//! which coincides with (T - proj_K(T)) / (2 lambda).

use crate::tensor::{deviator, SymTensor};

/// Von Mises admissible set K = { T : |deviator(T)| <= k }.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldSurface {
    k: f64,
}

impl YieldSurface {
    pub fn new(k: f64) -> Result<Self, String> {
        if !(k > 0.0) {
            return Err(format!("yield limit k must be positive, got {k}"));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

/// Regularization parameter lambda > 0; also sets the truncation height 1/lambda.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YosidaParam {
    lambda: f64,
}

impl YosidaParam {
    pub fn new(lambda: f64) -> Result<Self, String> {
        if !(lambda > 0.0) {
            return Err(format!("lambda must be positive, got {lambda}"));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Truncation height 1/lambda used on both coupling terms.
    pub fn trunc_height(&self) -> f64 {
        1.0 / self.lambda
    }
}

/// Membership test |deviator(T)| <= k.
pub fn in_k(t: &SymTensor, ys: &YieldSurface) -> bool {
    deviator(t).norm() <= ys.k
}

/// Nearest point of K: the spherical part is kept, the deviatoric part is
/// rescaled onto the yield surface when it lies outside (radial return).
pub fn project_k(t: &SymTensor, ys: &YieldSurface) -> SymTensor {
    let dev = deviator(t);
    let n = dev.norm();
    if n <= ys.k {
        return *t;
    }
    let sph = t.sub(&dev);
    sph.add(&dev.scale(ys.k / n))
}

/// Yosida regularization of the subdifferential of the indicator of K.
/// Always traceless; zero exactly on K. Guarded at PT = 0.
pub fn yosida(t: &SymTensor, ys: &YieldSurface, yp: &YosidaParam) -> SymTensor {
    let dev = deviator(t);
    let n = dev.norm();
    if n <= 1e-300 {
        return SymTensor::ZERO;
    }
    let excess = n - ys.k;
    if excess <= 0.0 {
        return SymTensor::ZERO;
    }
    let y = dev.scale(excess / (2.0 * yp.lambda * n));
    // rescaling reintroduces one-ulp trace noise; pin it back to zero
    SymTensor::new(y.xx, y.yy, -(y.xx + y.yy), y.xy, y.xz, y.yz)
}

/// Dissipation density Y_lambda(T) : T = (|PT| - k)_+ |PT| / (2 lambda) >= 0,
/// returned in closed form.
pub fn dissipation_density(t: &SymTensor, ys: &YieldSurface, yp: &YosidaParam) -> f64 {
    let n = deviator(t).norm();
    (n - ys.k).max(0.0) * n / (2.0 * yp.lambda)
}

/// Scalar truncation T_K(r) = min(K, max(r, -K)).
pub fn truncate(r: f64, height: f64) -> f64 {
    debug_assert!(height > 0.0);
    r.max(-height).min(height)
}

/// Antiderivative phi_K(r) of T_K: r^2/2 inside [-K, K],
/// K^2/2 + K(|r| - K) outside. Even and convex with linear growth.
pub fn phi(r: f64, height: f64) -> f64 {
    debug_assert!(height > 0.0);
    let a = r.abs();
    if a <= height {
        0.5 * r * r
    } else {
        0.5 * height * height + height * (a - height)
    }
}

/// One time-step implicit stress return: given the elastic trial stress
/// (computed from the previous plastic strain), find T with
/// T = T_trial - dt * D Y_lambda(T). The flow is deviatoric and the isotropic
/// operator acts on deviators as 2*mu, so the deviatoric magnitude solves a
/// scalar equation in closed form while the direction and spherical part
/// are those of the trial state.
pub fn viscous_return(
    t_trial: &SymTensor,
    ys: &YieldSurface,
    yp: &YosidaParam,
    mu: f64,
    dt: f64,
) -> SymTensor {
    let dev = deviator(t_trial);
    let q = dev.norm();
    if q <= ys.k || q <= 1e-300 {
        return *t_trial;
    }
    let c = mu * dt / yp.lambda;
    let s = (q + c * ys.k) / (1.0 + c);
    let sph = t_trial.sub(&dev);
    sph.add(&dev.scale(s / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{inner, ElasticityTensor};
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(rng: &mut impl Rng, scale: f64) -> SymTensor {
        SymTensor::new(
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
        )
    }

    fn shear(v: f64) -> SymTensor {
        SymTensor::new(0.0, 0.0, 0.0, v, 0.0, 0.0)
    }

    #[test]
    fn membership_cases() {
        let ys = YieldSurface::new(1.0).unwrap();
        assert!(in_k(&SymTensor::ZERO, &ys));
        // purely spherical stress has zero deviator
        assert!(in_k(&SymTensor::identity().scale(100.0), &ys));
        // xy = sqrt(2) gives |PT| = 2 > 1
        assert!(!in_k(&shear(std::f64::consts::SQRT_2), &ys));
    }

    #[test]
    fn projection_fixes_k_and_rescales_shear() {
        let ys = YieldSurface::new(1.0).unwrap();
        let inside = shear(0.5);
        assert_eq!(project_k(&inside, &ys), inside);
        // |PT| = 2 scales by 1/2
        let t = shear(std::f64::consts::SQRT_2);
        let p = project_k(&t, &ys);
        assert_relative_eq!(p.xy, std::f64::consts::SQRT_2 / 2.0, epsilon = 1e-14);
        assert_relative_eq!(deviator(&p).norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn projection_keeps_spherical_part() {
        let ys = YieldSurface::new(0.7).unwrap();
        let t = SymTensor::new(5.0, 3.0, -1.0, 2.0, -0.5, 0.3);
        let p = project_k(&t, &ys);
        assert_relative_eq!(p.trace(), t.trace(), epsilon = 1e-12);
        assert_relative_eq!(deviator(&p).norm(), 0.7, epsilon = 1e-13);
    }

    #[test]
    fn yosida_zero_inside_k() {
        let ys = YieldSurface::new(1.0).unwrap();
        let yp = YosidaParam::new(0.5).unwrap();
        assert_eq!(yosida(&shear(0.3), &ys, &yp), SymTensor::ZERO);
        assert_eq!(yosida(&SymTensor::identity().scale(9.0), &ys, &yp), SymTensor::ZERO);
    }

    #[test]
    fn yosida_hand_value() {
        // |PT| = 2, k = 1, lambda = 0.5: (2-1)/(2*0.5) * PT/2 = PT/2
        let ys = YieldSurface::new(1.0).unwrap();
        let yp = YosidaParam::new(0.5).unwrap();
        let y = yosida(&shear(std::f64::consts::SQRT_2), &ys, &yp);
        assert_relative_eq!(y.xy, std::f64::consts::SQRT_2 / 2.0, epsilon = 1e-14);
        assert!(y.trace().abs() <= 1e-14);
    }

    #[test]
    fn yosida_resolvent_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let ys = YieldSurface::new(1.0).unwrap();
        for &lambda in &[0.05, 0.5, 2.0] {
            let yp = YosidaParam::new(lambda).unwrap();
            for _ in 0..2000 {
                let t = random_tensor(&mut rng, 3.0);
                let y = yosida(&t, &ys, &yp);
                let alt = t.sub(&project_k(&t, &ys)).scale(1.0 / (2.0 * lambda));
                assert!(y.sub(&alt).norm() <= 1e-12);
                assert!(y.trace().abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn yosida_monotone_and_lipschitz() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let ys = YieldSurface::new(1.0).unwrap();
        let yp = YosidaParam::new(0.25).unwrap();
        let lip = 1.0 / (2.0 * yp.lambda());
        for _ in 0..10_000 {
            let a = random_tensor(&mut rng, 3.0);
            let b = random_tensor(&mut rng, 3.0);
            let ya = yosida(&a, &ys, &yp);
            let yb = yosida(&b, &ys, &yp);
            assert!(inner(&ya.sub(&yb), &a.sub(&b)) >= -1e-12);
            assert!(ya.sub(&yb).norm() <= lip * a.sub(&b).norm() * (1.0 + 1e-10));
        }
    }

    #[test]
    fn dissipation_closed_form_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let ys = YieldSurface::new(0.8).unwrap();
        let yp = YosidaParam::new(0.1).unwrap();
        for _ in 0..5000 {
            let t = random_tensor(&mut rng, 3.0);
            let direct = inner(&yosida(&t, &ys, &yp), &t);
            let closed = dissipation_density(&t, &ys, &yp);
            assert!(closed >= 0.0);
            assert_relative_eq!(direct, closed, epsilon = 1e-11, max_relative = 1e-11);
        }
    }

    #[test]
    fn projection_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let ys = YieldSurface::new(1.2).unwrap();
        for _ in 0..5000 {
            let a = random_tensor(&mut rng, 4.0);
            let b = random_tensor(&mut rng, 4.0);
            assert!(
                project_k(&a, &ys).sub(&project_k(&b, &ys)).norm()
                    <= a.sub(&b).norm() + 1e-12
            );
        }
    }

    #[test]
    fn truncation_saturation_and_identity() {
        assert_eq!(truncate(0.0, 5.0), 0.0);
        assert_eq!(truncate(7.0, 5.0), 5.0);
        assert_eq!(truncate(-7.0, 5.0), -5.0);
        assert_eq!(truncate(3.0, 5.0), 3.0);
    }

    #[test]
    fn truncation_lipschitz_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..5000 {
            let r = rng.gen_range(-10.0..10.0);
            let s = rng.gen_range(-10.0..10.0);
            let (tr, ts) = (truncate(r, 2.5), truncate(s, 2.5));
            assert!((tr - ts).abs() <= (r - s).abs() + 1e-15);
            if r >= s {
                assert!(tr >= ts);
            }
            assert!(tr.abs() <= 2.5);
        }
    }

    #[test]
    fn phi_values_and_evenness() {
        assert_eq!(phi(0.0, 3.0), 0.0);
        // quadrature oracle for phi(3, 2): integrate T_2 over [0, 3] with a
        // fine midpoint rule
        let height = 2.0;
        let n = 400_000;
        let hstep = 3.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let s = (i as f64 + 0.5) * hstep;
            acc += truncate(s, height) * hstep;
        }
        assert_relative_eq!(phi(3.0, height), acc, epsilon = 1e-9);
        assert_relative_eq!(phi(3.0, height), 4.0, epsilon = 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(26);
        for _ in 0..2000 {
            let r = rng.gen_range(-8.0..8.0);
            assert_relative_eq!(phi(r, 2.0), phi(-r, 2.0), epsilon = 1e-14);
        }
    }

    #[test]
    fn phi_derivative_matches_truncation() {
        // central differences away from the kinks |r| = K
        let height = 1.5;
        let h = 1e-5;
        for &r in &[-3.0, -1.0, -0.3, 0.0, 0.4, 1.2, 2.7] {
            let fd = (phi(r + h, height) - phi(r - h, height)) / (2.0 * h);
            assert_relative_eq!(fd, truncate(r, height), epsilon = 1e-9);
        }
    }

    #[test]
    fn viscous_return_solves_implicit_relation() {
        // T = T_trial - dt * D Y_lambda(T) must hold exactly for the
        // returned stress.
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let ys = YieldSurface::new(0.6).unwrap();
        let yp = YosidaParam::new(0.05).unwrap();
        let d = ElasticityTensor::new(1.0, 1.3).unwrap();
        let dt = 0.01;
        for _ in 0..2000 {
            let trial = random_tensor(&mut rng, 2.0);
            let t = viscous_return(&trial, &ys, &yp, d.lame_second(), dt);
            let back = trial.sub(&d.apply(&yosida(&t, &ys, &yp)).scale(dt));
            assert!(t.sub(&back).norm() <= 1e-12 * trial.norm().max(1.0));
            assert_relative_eq!(t.trace(), trial.trace(), epsilon = 1e-12);
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(YieldSurface::new(0.0).is_err());
        assert!(YieldSurface::new(-1.0).is_err());
        assert!(YosidaParam::new(0.0).is_err());
        assert!(YosidaParam::new(-0.5).is_err());
    }
}
