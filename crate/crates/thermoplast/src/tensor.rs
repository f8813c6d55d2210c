//! Symmetric 3x3 tensor algebra and the isotropic elasticity operator.
//!
//! All stress/strain-like quantities are stored as six independent
//! components (Voigt-style layout) with the symmetry built into the type.
//! Inner products count the off-diagonal entries twice so that
//! `inner(a, b)` equals the full matrix contraction `a : b`.

/// Symmetric 3x3 tensor with components (xx, yy, zz, xy, xz, yz).
///
/// Off-diagonal entries are stored once; all contractions account for
/// their double multiplicity explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xy: f64,
    pub xz: f64,
    pub yz: f64,
}

impl SymTensor {
    pub const ZERO: SymTensor = SymTensor {
        xx: 0.0,
        yy: 0.0,
        zz: 0.0,
        xy: 0.0,
        xz: 0.0,
        yz: 0.0,
    };

    pub fn new(xx: f64, yy: f64, zz: f64, xy: f64, xz: f64, yz: f64) -> Self {
        Self {
            xx,
            yy,
            zz,
            xy,
            xz,
            yz,
        }
    }

    /// 3x3 identity.
    pub fn identity() -> Self {
        Self::new(1.0, 1.0, 1.0, 0.0, 0.0, 0.0)
    }

    /// Diagonal tensor diag(a, b, c).
    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Self::new(a, b, c, 0.0, 0.0, 0.0)
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy + self.zz
    }

    /// Frobenius norm sqrt(T : T).
    pub fn norm(&self) -> f64 {
        inner(self, self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(
            self.xx * s,
            self.yy * s,
            self.zz * s,
            self.xy * s,
            self.xz * s,
            self.yz * s,
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.xx + other.xx,
            self.yy + other.yy,
            self.zz + other.zz,
            self.xy + other.xy,
            self.xz + other.xz,
            self.yz + other.yz,
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(
            self.xx - other.xx,
            self.yy - other.yy,
            self.zz - other.zz,
            self.xy - other.xy,
            self.xz - other.xz,
            self.yz - other.yz,
        )
    }

    /// a + s * b, the usual axpy update.
    pub fn add_scaled(&self, s: f64, other: &Self) -> Self {
        Self::new(
            self.xx + s * other.xx,
            self.yy + s * other.yy,
            self.zz + s * other.zz,
            self.xy + s * other.xy,
            self.xz + s * other.xz,
            self.yz + s * other.yz,
        )
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.xx, self.yy, self.zz, self.xy, self.xz, self.yz]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }
}

/// Deviatoric projection P T = T - (tr T / 3) Id.
///
/// The zz entry is reconstructed as -(xx + yy) so the returned trace is
/// exactly zero in floating point; the redistribution stays within one ulp
/// of the direct formula.
pub fn deviator(t: &SymTensor) -> SymTensor {
    let m = t.trace() / 3.0;
    let xx = t.xx - m;
    let yy = t.yy - m;
    SymTensor::new(xx, yy, -(xx + yy), t.xy, t.xz, t.yz)
}

/// Full contraction A : B with off-diagonal entries counted twice.
pub fn inner(a: &SymTensor, b: &SymTensor) -> f64 {
    a.xx * b.xx
        + a.yy * b.yy
        + a.zz * b.zz
        + 2.0 * (a.xy * b.xy + a.xz * b.xz + a.yz * b.yz)
}

/// Isotropic fourth-order elasticity operator in Lame parameterization.
///
/// D e = 2 mu e + lambda tr(e) Id, positive definite on symmetric tensors
/// whenever mu > 0 and 2 mu + 3 lambda > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticityTensor {
    lame_first: f64,
    lame_second: f64,
}

impl ElasticityTensor {
    /// Build the operator, validating positive definiteness.
    pub fn new(lame_first: f64, lame_second: f64) -> Result<Self, String> {
        if !(lame_second > 0.0) {
            return Err(format!(
                "lame_second must be positive, got {lame_second}"
            ));
        }
        if !(lame_first > -2.0 / 3.0 * lame_second) {
            return Err(format!(
                "lame_first must exceed -(2/3)*lame_second = {}, got {lame_first}",
                -2.0 / 3.0 * lame_second
            ));
        }
        Ok(Self {
            lame_first,
            lame_second,
        })
    }

    pub fn lame_first(&self) -> f64 {
        self.lame_first
    }

    pub fn lame_second(&self) -> f64 {
        self.lame_second
    }

    /// Coercivity constant c0 = min(2 mu, 2 mu + 3 lambda), so that
    /// D e : e >= c0 |e|^2.
    pub fn coercivity(&self) -> f64 {
        let two_mu = 2.0 * self.lame_second;
        two_mu.min(two_mu + 3.0 * self.lame_first)
    }

    /// Apply D: 2 mu e + lambda tr(e) Id.
    pub fn apply(&self, e: &SymTensor) -> SymTensor {
        let two_mu = 2.0 * self.lame_second;
        let vol = self.lame_first * e.trace();
        SymTensor::new(
            two_mu * e.xx + vol,
            two_mu * e.yy + vol,
            two_mu * e.zz + vol,
            two_mu * e.xy,
            two_mu * e.xz,
            two_mu * e.yz,
        )
    }

    /// Apply the exact inverse of D:
    /// s / (2 mu) - lambda tr(s) Id / (2 mu (2 mu + 3 lambda)).
    pub fn apply_inv(&self, s: &SymTensor) -> SymTensor {
        let two_mu = 2.0 * self.lame_second;
        let bulk = two_mu + 3.0 * self.lame_first;
        let vol = self.lame_first * s.trace() / (two_mu * bulk);
        SymTensor::new(
            s.xx / two_mu - vol,
            s.yy / two_mu - vol,
            s.zz / two_mu - vol,
            s.xy / two_mu,
            s.xz / two_mu,
            s.yz / two_mu,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
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

    #[test]
    fn deviator_of_identity_is_zero() {
        let d = deviator(&SymTensor::identity());
        assert!(d.norm() <= 1e-15);
    }

    #[test]
    fn deviator_hand_value() {
        // diag(3,0,0): trace 3, mean 1, so P T = diag(2,-1,-1)
        let d = deviator(&SymTensor::diag(3.0, 0.0, 0.0));
        assert_relative_eq!(d.xx, 2.0, epsilon = 1e-14);
        assert_relative_eq!(d.yy, -1.0, epsilon = 1e-14);
        assert_relative_eq!(d.zz, -1.0, epsilon = 1e-14);
    }

    #[test]
    fn deviator_fixes_traceless() {
        let t = SymTensor::new(1.0, -2.0, 1.0, 0.3, -0.4, 0.5);
        assert!(t.trace().abs() <= 1e-15);
        let d = deviator(&t);
        assert!(d.sub(&t).norm() <= 1e-15);
    }

    #[test]
    fn deviator_traceless_and_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let t = random_tensor(&mut rng, 5.0);
            let d = deviator(&t);
            assert!(d.trace().abs() <= 1e-14);
            assert!(deviator(&d).sub(&d).norm() <= 1e-14);
            // orthogonality of the split
            assert!(inner(&d, &SymTensor::identity()).abs() <= 1e-13);
        }
    }

    #[test]
    fn inner_identity_and_shear() {
        assert_relative_eq!(
            inner(&SymTensor::identity(), &SymTensor::identity()),
            3.0
        );
        // only xy = 1: contraction counts (xy) and (yx), so |A|^2 = 2
        let a = SymTensor::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
        assert_relative_eq!(inner(&a, &a), 2.0);
    }

    #[test]
    fn inner_nonnegative_and_bilinear() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let a = random_tensor(&mut rng, 3.0);
            let b = random_tensor(&mut rng, 3.0);
            assert!(inner(&a, &a) >= 0.0);
            assert_relative_eq!(inner(&a, &b), inner(&b, &a), epsilon = 1e-13);
        }
    }

    #[test]
    fn apply_d_on_identity() {
        let d = ElasticityTensor::new(1.5, 2.0).unwrap();
        // e = Id: D Id = (2 mu + 3 lambda) Id
        let s = d.apply(&SymTensor::identity());
        let expect = 2.0 * 2.0 + 3.0 * 1.5;
        assert_relative_eq!(s.xx, expect, epsilon = 1e-13);
        assert_relative_eq!(s.yy, expect, epsilon = 1e-13);
        assert_relative_eq!(s.zz, expect, epsilon = 1e-13);
    }

    #[test]
    fn apply_d_on_traceless() {
        let d = ElasticityTensor::new(1.5, 2.0).unwrap();
        let e = SymTensor::new(1.0, -1.0, 0.0, 0.7, 0.0, -0.2);
        let s = d.apply(&e);
        assert!(s.sub(&e.scale(4.0)).norm() <= 1e-13);
    }

    #[test]
    fn d_inverse_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let d = ElasticityTensor::new(0.9, 1.3).unwrap();
        assert!(d.apply_inv(&SymTensor::ZERO).norm() == 0.0);
        for _ in 0..1000 {
            let e = random_tensor(&mut rng, 4.0);
            assert!(d.apply_inv(&d.apply(&e)).sub(&e).norm() <= 1e-13);
            assert!(d.apply(&d.apply_inv(&e)).sub(&e).norm() <= 1e-13);
        }
    }

    #[test]
    fn d_inverse_matches_matrix_inversion_oracle() {
        // Brute-force oracle: represent apply_D as a 6x6 matrix acting on the
        // component vector (with the double-multiplicity metric folded in via
        // plain componentwise action), invert it numerically, and compare.
        use nalgebra::DMatrix;
        let d = ElasticityTensor::new(0.8, 1.7).unwrap();
        let mut m = DMatrix::<f64>::zeros(6, 6);
        for j in 0..6 {
            let mut basis = [0.0; 6];
            basis[j] = 1.0;
            let col = d.apply(&SymTensor::from_array(basis)).as_array();
            for i in 0..6 {
                m[(i, j)] = col[i];
            }
        }
        let m_inv = m.try_inverse().expect("D matrix invertible");
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..200 {
            let s = random_tensor(&mut rng, 3.0);
            let sv = s.as_array();
            let mut expect = [0.0; 6];
            for i in 0..6 {
                for j in 0..6 {
                    expect[i] += m_inv[(i, j)] * sv[j];
                }
            }
            let got = d.apply_inv(&s).as_array();
            for i in 0..6 {
                assert_relative_eq!(got[i], expect[i], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn d_positivity_and_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let d = ElasticityTensor::new(-0.4, 1.0).unwrap();
        let c0 = d.coercivity();
        assert!(c0 > 0.0);
        for _ in 0..10_000 {
            let a = random_tensor(&mut rng, 3.0);
            let b = random_tensor(&mut rng, 3.0);
            assert!(inner(&d.apply(&a), &a) >= c0 * inner(&a, &a) - 1e-12);
            let lhs = inner(&d.apply(&a), &b);
            let rhs = inner(&a, &d.apply(&b));
            let scale = lhs.abs().max(rhs.abs()).max(1.0);
            assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn invalid_lame_parameters_rejected() {
        assert!(ElasticityTensor::new(1.0, 0.0).is_err());
        assert!(ElasticityTensor::new(1.0, -1.0).is_err());
        assert!(ElasticityTensor::new(-1.0, 1.0).is_err());
    }
}
