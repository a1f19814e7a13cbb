//! Free rigid body and heavy top integrated with the Cayley map on SO(3).
//!
//! Both are left-trivialized discrete Euler-Poincaré systems solved by
//! [`dep_step`] with an analytic Jacobian. The `h²/4` cubic terms are kept.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::lie_core::{cst, dep_step, DepState, DiscreteEulerPoincare, NewtonConfig, Trivialization};
use crate::{Real, Result};

/// `v ↦ v̂` with `v̂ w = v × w`.
pub fn hat<T: Real>(v: &Vector3<T>) -> Matrix3<T> {
    Matrix3::new(T::zero(), -v.z, v.y, v.z, T::zero(), -v.x, -v.y, v.x, T::zero())
}

/// Inverse of [`hat`] applied to the skew part of `m`.
pub fn vee<T: Real>(m: &Matrix3<T>) -> Vector3<T> {
    let half = cst::<T>(0.5);
    Vector3::new(
        (m[(2, 1)] - m[(1, 2)]) * half,
        (m[(0, 2)] - m[(2, 0)]) * half,
        (m[(1, 0)] - m[(0, 1)]) * half,
    )
}

/// Closed-form Cayley map on so(3): `I + 4/(4 + |a|²)(â + â²/2)`.
pub fn cay_so3<T: Real>(a: &Vector3<T>) -> Matrix3<T> {
    let ah = hat(a);
    let c = cst::<T>(4.0) / (cst::<T>(4.0) + a.norm_squared());
    Matrix3::identity() + (ah + ah * ah * cst::<T>(0.5)) * c
}

/// `(dcay⁻¹_ξ)* μ` in vector form: `μ − ½ μ×ξ + ¼(ξ·μ)ξ`.
pub fn dcay_inv_star_so3<T: Real>(xi: &Vector3<T>, mu: &Vector3<T>) -> Vector3<T> {
    mu - mu.cross(xi) * cst::<T>(0.5) + xi * (xi.dot(mu) * cst::<T>(0.25))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RigidBodyState<T: Real> {
    pub r: Matrix3<T>,
    pub omega: Vector3<T>,
    pub inertia: Vector3<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeavyTopState<T: Real> {
    pub body: RigidBodyState<T>,
    /// Gravity direction seen from the body.
    pub gamma: Vector3<T>,
    pub mass: T,
    pub gravity: T,
    pub length: T,
    pub chi: Vector3<T>,
}

impl<T: Real> RigidBodyState<T> {
    pub fn new(omega: Vector3<T>, inertia: Vector3<T>) -> Self {
        Self { r: Matrix3::identity(), omega, inertia }
    }

    pub fn body_momentum(&self) -> Vector3<T> {
        self.inertia.component_mul(&self.omega)
    }

    pub fn energy(&self) -> T {
        self.body_momentum().dot(&self.omega) * cst::<T>(0.5)
    }
}

impl<T: Real> HeavyTopState<T> {
    pub fn mgl(&self) -> T {
        self.mass * self.gravity * self.length
    }
}

/// Left-invariant Lagrangian `½⟨𝕀Ω, Ω⟩ − Mgl Γ·χ` on so(3).
#[derive(Clone, Debug)]
pub struct So3Problem<T: Real> {
    pub inertia: Vector3<T>,
    pub mgl: T,
    pub chi: Vector3<T>,
}

fn v3<T: Real>(v: &DVector<T>) -> Vector3<T> {
    Vector3::new(v[0], v[1], v[2])
}

fn dv<T: Real>(v: &Vector3<T>) -> DVector<T> {
    DVector::from_column_slice(v.as_slice())
}

impl<T: Real> DiscreteEulerPoincare<T> for So3Problem<T> {
    type Group = Matrix3<T>;
    type Advected = Vector3<T>;

    fn trivialization(&self) -> Trivialization {
        Trivialization::Left
    }
    fn tau(&self, xi: &DVector<T>) -> Result<Matrix3<T>> {
        Ok(cay_so3(&v3(xi)))
    }
    fn compose(&self, a: &Matrix3<T>, b: &Matrix3<T>) -> Matrix3<T> {
        a * b
    }
    fn act(&self, g: &Matrix3<T>, a: &Vector3<T>) -> Vector3<T> {
        g * a
    }
    fn momentum(&self, xi: &DVector<T>, _a: &Vector3<T>) -> DVector<T> {
        dv(&self.inertia.component_mul(&v3(xi)))
    }
    fn dtau_inv_star(&self, xi: &DVector<T>, mu: &DVector<T>) -> Result<DVector<T>> {
        Ok(dv(&dcay_inv_star_so3(&v3(xi), &v3(mu))))
    }
    fn diamond_force(&self, _xi: &DVector<T>, gamma: &Vector3<T>) -> Option<DVector<T>> {
        if self.mgl == T::zero() {
            None
        } else {
            Some(dv(&(gamma.cross(&self.chi) * self.mgl)))
        }
    }
    fn residual_jacobian(&self, x: &DVector<T>, _a: &Vector3<T>, h: T) -> Option<DMatrix<T>> {
        // d/dΩ of F(ξ, μ) = μ − ½μ×ξ + ¼(ξ·μ)ξ with ξ = hΩ, μ = 𝕀Ω.
        let om = v3(x);
        let xi = om * h;
        let mu = self.inertia.component_mul(&om);
        let inertia = Matrix3::from_diagonal(&self.inertia);
        let quarter = cst::<T>(0.25);
        let j = inertia - (-hat(&xi) * inertia + hat(&mu) * h) * cst::<T>(0.5)
            + (xi * (mu.transpose() * h + xi.transpose() * inertia)
                + Matrix3::identity() * (xi.dot(&mu) * h))
                * quarter;
        Some(DMatrix::from_column_slice(3, 3, j.as_slice()))
    }
}

/// One rigid-body step: `R_{k+1} = R_k cay(hΩ̂_k)` and the momentum balance.
pub fn rigid_step<T: Real>(s: &RigidBodyState<T>, h: T, cfg: &NewtonConfig) -> Result<RigidBodyState<T>> {
    let p = So3Problem { inertia: s.inertia, mgl: T::zero(), chi: Vector3::z() };
    let next = dep_step(&p, &DepState { g: s.r, xi: dv(&s.omega), a: Vector3::z() }, h, cfg)?;
    Ok(RigidBodyState { r: next.g, omega: v3(&next.xi), inertia: s.inertia })
}

/// One heavy-top step: `Γ_{k+1} = cay(−hΩ̂_k) Γ_k` and the forced momentum balance.
pub fn heavy_top_step<T: Real>(s: &HeavyTopState<T>, h: T, cfg: &NewtonConfig) -> Result<HeavyTopState<T>> {
    let p = So3Problem { inertia: s.body.inertia, mgl: s.mgl(), chi: s.chi };
    let next = dep_step(&p, &DepState { g: s.body.r, xi: dv(&s.body.omega), a: s.gamma }, h, cfg)?;
    Ok(HeavyTopState {
        body: RigidBodyState { r: next.g, omega: v3(&next.xi), inertia: s.body.inertia },
        gamma: next.a,
        ..s.clone()
    })
}

/// `π_k = R_k (dτ⁻¹_{hΩ̂_k})* Π̂_k R_k⁻¹`, unhatted.
pub fn spatial_momentum<T: Real>(s: &RigidBodyState<T>, h: T) -> Vector3<T> {
    s.r * dcay_inv_star_so3(&(s.omega * h), &s.body_momentum())
}
