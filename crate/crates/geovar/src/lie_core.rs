//! Matrix Lie-group calculus for the discrete diffeomorphism group and its
//! semidirect extensions: Cayley map, trivialized tangents and their duals,
//! semidirect exponential and difference maps, and a generic discrete
//! Euler-Poincaré stepper.
//!
//! Cell volumes Ω are stored as a vector. The pairing of a one-form `C` with an
//! algebra element `B` is `Tr(Cᵀ Ω B)`; on zero-forms it is `πᵀ Ω ψ`.

use nalgebra::{DMatrix, DVector};

use crate::{GeovarError, Real, Result};

const INVARIANT_TOL: f64 = 1e-12;
const MAX_CONDITION: f64 = 1e12;

#[inline]
pub(crate) fn cst<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

#[inline]
pub(crate) fn to_f64<T: Real>(x: T) -> f64 {
    nalgebra::try_convert(x).unwrap_or(f64::NAN)
}

fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |a, &x| a.max(x.abs()))
}

fn norm1<T: Real>(m: &DMatrix<T>) -> T {
    (0..m.ncols())
        .map(|j| m.column(j).iter().fold(T::zero(), |a, &x| a + x.abs()))
        .fold(T::zero(), |a, x| a.max(x))
}

/// `M · diag(Ω)`.
pub fn right_scale<T: Real>(m: &DMatrix<T>, omega: &DVector<T>) -> DMatrix<T> {
    let mut out = m.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col *= omega[j];
    }
    out
}

/// `M · diag(Ω)⁻¹`.
pub fn right_unscale<T: Real>(m: &DMatrix<T>, omega: &DVector<T>) -> DMatrix<T> {
    let mut out = m.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col /= omega[j];
    }
    out
}

fn check_square<T: Real>(m: &DMatrix<T>, omega: &DVector<T>) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() != omega.len() {
        return Err(GeovarError::ShapeMismatch(format!(
            "matrix {}x{} with {} cell volumes",
            m.nrows(),
            m.ncols(),
            omega.len()
        )));
    }
    if omega.iter().any(|&w| w <= T::zero()) {
        return Err(GeovarError::ConstraintViolated("cell volumes must be positive".into()));
    }
    Ok(())
}

/// Inverts `m`, rejecting it when the 1-norm condition estimate exceeds 1e12.
pub fn invert_checked<T: Real>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    let inv = m
        .clone()
        .try_inverse()
        .ok_or(GeovarError::SingularMatrix(f64::INFINITY))?;
    let cond = to_f64(norm1(m) * norm1(&inv));
    if !(cond <= MAX_CONDITION) {
        return Err(GeovarError::SingularMatrix(cond));
    }
    Ok(inv)
}

/// Ω-antisymmetric, row-null matrix: a discrete divergence-free vector field.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraMatrix<T: Real> {
    entries: DMatrix<T>,
    omega: DVector<T>,
}

impl<T: Real> AlgebraMatrix<T> {
    pub fn new(entries: DMatrix<T>, omega: DVector<T>) -> Result<Self> {
        check_square(&entries, &omega)?;
        let wmax = omega.iter().fold(T::zero(), |a, &w| a.max(w));
        let tol = cst::<T>(INVARIANT_TOL) * (T::one().max(max_abs(&entries) * wmax));
        let n = entries.nrows();
        for i in 0..n {
            let s = entries.row(i).sum();
            if s.abs() > tol {
                return Err(GeovarError::ConstraintViolated(format!(
                    "row {i} sums to {:e}",
                    to_f64(s)
                )));
            }
            for j in 0..n {
                let a = entries[(j, i)] * omega[j] + omega[i] * entries[(i, j)];
                if a.abs() > tol {
                    return Err(GeovarError::ConstraintViolated(format!(
                        "not Ω-antisymmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { entries, omega })
    }

    /// Wraps entries known to satisfy the invariants (e.g. a commutator).
    pub fn new_unchecked(entries: DMatrix<T>, omega: DVector<T>) -> Self {
        Self { entries, omega }
    }

    pub fn zeros(omega: DVector<T>) -> Self {
        let n = omega.len();
        Self { entries: DMatrix::zeros(n, n), omega }
    }

    pub fn entries(&self) -> &DMatrix<T> {
        &self.entries
    }
    pub fn omega(&self) -> &DVector<T> {
        &self.omega
    }
    pub fn dim(&self) -> usize {
        self.omega.len()
    }
    pub fn into_entries(self) -> DMatrix<T> {
        self.entries
    }

    pub fn scale(&self, s: T) -> Self {
        Self { entries: &self.entries * s, omega: self.omega.clone() }
    }
    pub fn add(&self, o: &Self) -> Self {
        Self { entries: &self.entries + &o.entries, omega: self.omega.clone() }
    }
    pub fn sub(&self, o: &Self) -> Self {
        Self { entries: &self.entries - &o.entries, omega: self.omega.clone() }
    }
    pub fn apply(&self, x: &DVector<T>) -> DVector<T> {
        &self.entries * x
    }
}

/// Ω-orthogonal, signed-stochastic matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupMatrix<T: Real> {
    entries: DMatrix<T>,
    omega: DVector<T>,
}

impl<T: Real> GroupMatrix<T> {
    pub fn new(entries: DMatrix<T>, omega: DVector<T>) -> Result<Self> {
        check_square(&entries, &omega)?;
        let (sto, orth) = group_defects(&entries, &omega);
        let tol = cst::<T>(INVARIANT_TOL);
        let wmax = omega.iter().fold(T::zero(), |a, &w| a.max(w));
        if sto > tol {
            return Err(GeovarError::ConstraintViolated(format!(
                "row sums deviate from 1 by {:e}",
                to_f64(sto)
            )));
        }
        if orth > tol * wmax {
            return Err(GeovarError::ConstraintViolated(format!(
                "qᵀΩq deviates from Ω by {:e}",
                to_f64(orth)
            )));
        }
        Ok(Self { entries, omega })
    }

    pub fn new_unchecked(entries: DMatrix<T>, omega: DVector<T>) -> Self {
        Self { entries, omega }
    }

    pub fn identity(omega: DVector<T>) -> Self {
        let n = omega.len();
        Self { entries: DMatrix::identity(n, n), omega }
    }

    pub fn entries(&self) -> &DMatrix<T> {
        &self.entries
    }
    pub fn omega(&self) -> &DVector<T> {
        &self.omega
    }
    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    /// Largest deviation from stochasticity and from Ω-orthogonality.
    pub fn defects(&self) -> (T, T) {
        group_defects(&self.entries, &self.omega)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self { entries: &self.entries * &o.entries, omega: self.omega.clone() }
    }

    /// `q⁻¹ = Ω⁻¹ qᵀ Ω`.
    pub fn inverse(&self) -> Self {
        let n = self.dim();
        let q = &self.entries;
        let w = &self.omega;
        let inv = DMatrix::from_fn(n, n, |i, j| q[(j, i)] * w[j] / w[i]);
        Self { entries: inv, omega: self.omega.clone() }
    }

    pub fn apply(&self, x: &DVector<T>) -> DVector<T> {
        &self.entries * x
    }
}

fn group_defects<T: Real>(q: &DMatrix<T>, omega: &DVector<T>) -> (T, T) {
    let n = q.nrows();
    let sto = (0..n).fold(T::zero(), |a, i| a.max((q.row(i).sum() - T::one()).abs()));
    let qtwq = q.transpose() * right_scale_rows(q, omega);
    let mut orth = T::zero();
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { omega[i] } else { T::zero() };
            orth = orth.max((qtwq[(i, j)] - target).abs());
        }
    }
    (sto, orth)
}

/// `diag(Ω) · M`.
fn right_scale_rows<T: Real>(m: &DMatrix<T>, omega: &DVector<T>) -> DMatrix<T> {
    let mut out = m.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row *= omega[i];
    }
    out
}

/// `(I − M/2)⁻¹(I + M/2)` for any square matrix.
pub fn cayley_matrix<T: Real>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = m.nrows();
    let half = m * cst::<T>(0.5);
    let id = DMatrix::<T>::identity(n, n);
    let inv = invert_checked(&(&id - &half))?;
    Ok(inv * (id + half))
}

/// Cayley transform of an algebra element.
pub fn cayley<T: Real>(a: &AlgebraMatrix<T>) -> Result<GroupMatrix<T>> {
    Ok(GroupMatrix::new_unchecked(cayley_matrix(&a.entries)?, a.omega.clone()))
}

/// `dcay⁻¹_Y(Z) = (I − Y/2) Z (I + Y/2)`.
pub fn dcay_inv<T: Real>(y: &AlgebraMatrix<T>, z: &AlgebraMatrix<T>) -> AlgebraMatrix<T> {
    let n = y.dim();
    let id = DMatrix::<T>::identity(n, n);
    let half = &y.entries * cst::<T>(0.5);
    AlgebraMatrix::new_unchecked((&id - &half) * &z.entries * (&id + &half), y.omega.clone())
}

/// `dcay_Y(W) = (I − Y/2)⁻¹ W (I + Y/2)⁻¹`.
pub fn dcay<T: Real>(y: &AlgebraMatrix<T>, w: &AlgebraMatrix<T>) -> Result<AlgebraMatrix<T>> {
    let n = y.dim();
    let id = DMatrix::<T>::identity(n, n);
    let half = &y.entries * cst::<T>(0.5);
    let l = invert_checked(&(&id - &half))?;
    let r = invert_checked(&(&id + &half))?;
    Ok(AlgebraMatrix::new_unchecked(l * &w.entries * r, y.omega.clone()))
}

/// `(dcay⁻¹_Y)* X♭ = (I + Y/2) X♭ Ω (I − Y/2) Ω⁻¹`.
pub fn dcay_inv_star<T: Real>(y: &AlgebraMatrix<T>, x_flat: &DMatrix<T>) -> DMatrix<T> {
    let n = y.dim();
    let id = DMatrix::<T>::identity(n, n);
    let half = &y.entries * cst::<T>(0.5);
    let inner = (&id + &half) * right_scale(x_flat, &y.omega) * (&id - &half);
    right_unscale(&inner, &y.omega)
}

/// `(dcay_Y)* X♭ = (I + Y/2)⁻¹ X♭ Ω (I − Y/2)⁻¹ Ω⁻¹`.
pub fn dcay_star<T: Real>(y: &AlgebraMatrix<T>, x_flat: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = y.dim();
    let id = DMatrix::<T>::identity(n, n);
    let half = &y.entries * cst::<T>(0.5);
    let l = invert_checked(&(&id + &half))?;
    let r = invert_checked(&(&id - &half))?;
    let inner = l * right_scale(x_flat, &y.omega) * r;
    Ok(right_unscale(&inner, &y.omega))
}

/// `£_A C♭ = −[A, C♭Ω]Ω⁻¹`.
pub fn lie_deriv_one_form<T: Real>(a: &AlgebraMatrix<T>, c_flat: &DMatrix<T>) -> DMatrix<T> {
    let cw = right_scale(c_flat, &a.omega);
    let comm = &a.entries * &cw - &cw * &a.entries;
    -right_unscale(&comm, &a.omega)
}

/// `£_A B = −[A, B]` (no sparsification).
pub fn lie_bracket<T: Real>(a: &AlgebraMatrix<T>, b: &AlgebraMatrix<T>) -> AlgebraMatrix<T> {
    let comm = &a.entries * &b.entries - &b.entries * &a.entries;
    AlgebraMatrix::new_unchecked(-comm, a.omega.clone())
}

/// Dropped-cubic approximation `(I − ½£_Y) X♭` of [`dcay_inv_star`].
pub fn dcay_inv_star_linear<T: Real>(y: &AlgebraMatrix<T>, x_flat: &DMatrix<T>) -> DMatrix<T> {
    x_flat - lie_deriv_one_form(y, x_flat) * cst::<T>(0.5)
}

/// `⟨C, B⟩ = Tr(Cᵀ Ω B)`.
pub fn pairing<T: Real>(c: &DMatrix<T>, b: &DMatrix<T>, omega: &DVector<T>) -> T {
    let mut s = T::zero();
    for i in 0..c.nrows() {
        let mut row = T::zero();
        for j in 0..c.ncols() {
            row += c[(i, j)] * b[(i, j)];
        }
        s += omega[i] * row;
    }
    s
}

/// `⟨π, ψ⟩ = πᵀ Ω ψ`.
pub fn pairing_vec<T: Real>(pi: &DVector<T>, psi: &DVector<T>, omega: &DVector<T>) -> T {
    pi.iter().zip(psi.iter()).zip(omega.iter()).fold(T::zero(), |a, ((&p, &q), &w)| a + p * w * q)
}

/// `½(M − Mᵀ)`.
pub fn skew<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m - m.transpose()) * cst::<T>(0.5)
}

/// `skew(β αᵀ)`.
pub fn skew_outer<T: Real>(beta: &DVector<T>, alpha: &DVector<T>) -> DMatrix<T> {
    skew(&(beta * alpha.transpose()))
}

/// Element `(A, ω)` of the semidirect algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct SemidirectAlgebraElement<T: Real> {
    pub matrix_part: AlgebraMatrix<T>,
    pub vector_part: DVector<T>,
}

/// Element `(q, θ)` of the semidirect group; product `(q₁q₂, q₂⁻¹θ₁ + θ₂)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SemidirectGroupElement<T: Real> {
    pub matrix_part: GroupMatrix<T>,
    pub vector_part: DVector<T>,
}

/// Dual element `(C♭, π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SemidirectDual<T: Real> {
    pub one_form: DMatrix<T>,
    pub density: DVector<T>,
}

impl<T: Real> SemidirectGroupElement<T> {
    pub fn identity(omega: DVector<T>) -> Self {
        let n = omega.len();
        Self { matrix_part: GroupMatrix::identity(omega), vector_part: DVector::zeros(n) }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let q2inv = o.matrix_part.inverse();
        Self {
            matrix_part: self.matrix_part.mul(&o.matrix_part),
            vector_part: q2inv.apply(&self.vector_part) + &o.vector_part,
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            matrix_part: self.matrix_part.inverse(),
            vector_part: -self.matrix_part.apply(&self.vector_part),
        }
    }
}

impl<T: Real> SemidirectDual<T> {
    pub fn pair(&self, x: &SemidirectAlgebraElement<T>) -> T {
        let w = x.matrix_part.omega();
        pairing(&self.one_form, x.matrix_part.entries(), w) + pairing_vec(&self.density, &x.vector_part, w)
    }
}

/// `exp(t(A, ω)) = (e^{tA}, A⁻¹(I − e^{−tA})ω)`, the second factor summed as a
/// power series so that singular `A` is fine.
pub fn semidirect_exp<T: Real>(a: &AlgebraMatrix<T>, omega: &DVector<T>, t: T) -> SemidirectGroupElement<T> {
    let q = (&a.entries * t).exp();
    let mut term = omega * t;
    let mut sum = term.clone();
    let stop = cst::<T>(1e-15);
    for n in 1..2000 {
        term = (&a.entries * &term) * (-t / nalgebra::convert::<f64, T>((n + 1) as f64));
        sum += &term;
        let tn = term.norm();
        if tn == T::zero() || tn <= stop * sum.norm() {
            break;
        }
    }
    SemidirectGroupElement {
        matrix_part: GroupMatrix::new_unchecked(q, a.omega.clone()),
        vector_part: sum,
    }
}

/// Group difference map `τ(A, ω) = (cay(A), cay(−A/2)ω)`.
pub fn semidirect_tau<T: Real>(a: &AlgebraMatrix<T>, omega: &DVector<T>) -> Result<SemidirectGroupElement<T>> {
    let q = cayley(a)?;
    let back = cayley(&a.scale(cst(-0.5)))?;
    Ok(SemidirectGroupElement { matrix_part: q, vector_part: back.apply(omega) })
}

/// `dτ⁻¹_{(A,ω)}(B, ψ) = (dcay⁻¹_A B, cay(−A/2)ψ + ½ dcay_{A/2}(dcay⁻¹_A B) ω)`.
pub fn semidirect_dtau_inv<T: Real>(
    a: &AlgebraMatrix<T>,
    omega: &DVector<T>,
    b: &AlgebraMatrix<T>,
    psi: &DVector<T>,
) -> Result<SemidirectAlgebraElement<T>> {
    let half_a = a.scale(cst(0.5));
    let m = dcay_inv(a, b);
    let inner = dcay(&half_a, &m)?;
    let v = cayley(&a.scale(cst(-0.5)))?.apply(psi) + inner.apply(omega) * cst::<T>(0.5);
    Ok(SemidirectAlgebraElement { matrix_part: m, vector_part: v })
}

/// Dual of [`semidirect_dtau_inv`]:
/// `((dcay⁻¹_A)*[C♭ + ½(dcay_{A/2})* skew(πωᵀ)], cay(A/2)π)`.
pub fn semidirect_dtau_inv_star<T: Real>(
    a: &AlgebraMatrix<T>,
    omega: &DVector<T>,
    c_flat: &DMatrix<T>,
    pi: &DVector<T>,
) -> Result<SemidirectDual<T>> {
    let half_a = a.scale(cst(0.5));
    let extra = dcay_star(&half_a, &skew_outer(pi, omega))?;
    let form = dcay_inv_star(a, &(c_flat + extra * cst::<T>(0.5)));
    let density = cayley(&half_a)?.apply(pi);
    Ok(SemidirectDual { one_form: form, density })
}

/// The dual when `π` is parallel to `ω`, where the skew term vanishes.
pub fn semidirect_dtau_inv_star_parallel<T: Real>(
    a: &AlgebraMatrix<T>,
    c_flat: &DMatrix<T>,
    pi: &DVector<T>,
) -> Result<SemidirectDual<T>> {
    Ok(SemidirectDual {
        one_form: dcay_inv_star(a, c_flat),
        density: cayley(&a.scale(cst(0.5)))?.apply(pi),
    })
}

/// Which side the Lagrangian is invariant under.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trivialization {
    /// `g_{k+1} = g_k τ(hξ_k)`, `a_{k+1} = τ(−hξ_k) a_k` (rigid bodies).
    Left,
    /// `g_{k+1} = τ(hξ_k) g_k`, `a_{k+1} = a_k τ(−hξ_k)` (fluids).
    Right,
}

/// Damped Newton settings for the implicit momentum equation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Relative step of the finite-difference Jacobian fallback.
    pub fd_step: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 50, fd_step: 1e-7 }
    }
}

/// A reduced Lagrangian on a Lie algebra written in coordinates, together with
/// the difference-map calculus needed by [`dep_step`].
pub trait DiscreteEulerPoincare<T: Real> {
    type Group: Clone;
    type Advected: Clone;

    fn trivialization(&self) -> Trivialization;
    fn tau(&self, xi: &DVector<T>) -> Result<Self::Group>;
    fn compose(&self, a: &Self::Group, b: &Self::Group) -> Self::Group;
    /// `g·a` for left trivialization, `a·g` for right.
    fn act(&self, g: &Self::Group, a: &Self::Advected) -> Self::Advected;
    /// `δℓ/δξ` in dual coordinates.
    fn momentum(&self, xi: &DVector<T>, a: &Self::Advected) -> DVector<T>;
    /// `(dτ⁻¹_ξ)* μ`.
    fn dtau_inv_star(&self, xi: &DVector<T>, mu: &DVector<T>) -> Result<DVector<T>>;
    /// `δℓ/δa ◇ a`; `None` when there is no advected force.
    fn diamond_force(&self, _xi: &DVector<T>, _a: &Self::Advected) -> Option<DVector<T>> {
        None
    }
    /// Jacobian in `ξ` of `(dτ⁻¹_{±hξ})* μ(ξ) − h δℓ/δa ◇ a` at the new level,
    /// with the sign set by [`Self::trivialization`]. `None` selects finite differences.
    fn residual_jacobian(&self, _xi: &DVector<T>, _a: &Self::Advected, _h: T) -> Option<DMatrix<T>> {
        None
    }
}

/// State `(g_k, ξ_k, a_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DepState<G, A, T: Real> {
    pub g: G,
    pub xi: DVector<T>,
    pub a: A,
}

/// One step of the discrete Euler-Poincaré equations with an advected parameter.
///
/// Right: `(dτ⁻¹_{−hξ_{k+1}})* μ_{k+1} = (dτ⁻¹_{hξ_k})* μ_k + h δℓ/δa_{k+1} ◇ a_{k+1}`.
/// Left uses the opposite signs inside `dτ⁻¹`.
pub fn dep_step<T: Real, P: DiscreteEulerPoincare<T>>(
    p: &P,
    s: &DepState<P::Group, P::Advected, T>,
    h: T,
    cfg: &NewtonConfig,
) -> Result<DepState<P::Group, P::Advected, T>> {
    let (s_new, s_old) = match p.trivialization() {
        Trivialization::Left => (T::one(), -T::one()),
        Trivialization::Right => (-T::one(), T::one()),
    };
    let step = p.tau(&(&s.xi * h))?;
    let back = p.tau(&(&s.xi * (-h)))?;
    let (g, a) = match p.trivialization() {
        Trivialization::Left => (p.compose(&s.g, &step), p.act(&back, &s.a)),
        Trivialization::Right => (p.compose(&step, &s.g), p.act(&back, &s.a)),
    };
    let rhs = p.dtau_inv_star(&(&s.xi * (h * s_old)), &p.momentum(&s.xi, &s.a))?;

    let residual = |x: &DVector<T>| -> Result<DVector<T>> {
        let mut r = p.dtau_inv_star(&(x * (h * s_new)), &p.momentum(x, &a))? - &rhs;
        if let Some(f) = p.diamond_force(x, &a) {
            r -= f * h;
        }
        Ok(r)
    };
    let norm = |v: &DVector<T>| v.iter().fold(0.0f64, |m, &x| m.max(to_f64(x).abs()));

    let mut x = s.xi.clone();
    let mut r = residual(&x)?;
    let mut rn = norm(&r);
    let mut converged_once = false;
    for _ in 0..cfg.max_iter {
        if rn <= cfg.tol {
            if converged_once || rn == 0.0 {
                break;
            }
            converged_once = true;
        }
        let jac = match p.residual_jacobian(&x, &a, h) {
            Some(j) => j,
            None => fd_jacobian(&residual, &x, &r, cfg.fd_step)?,
        };
        let dx = jac
            .lu()
            .solve(&r)
            .ok_or(GeovarError::NoConvergence { iterations: 0, residual: rn })?;
        let mut lambda = T::one();
        let mut accepted = false;
        for _ in 0..8 {
            let trial = &x - &dx * lambda;
            let rt = residual(&trial)?;
            let rtn = norm(&rt);
            if rtn < rn || (rtn <= cfg.tol && rtn <= rn) {
                x = trial;
                r = rt;
                rn = rtn;
                accepted = true;
                break;
            }
            lambda *= cst::<T>(0.5);
        }
        if !accepted {
            if rn <= cfg.tol {
                break;
            }
            return Err(GeovarError::NoConvergence { iterations: cfg.max_iter, residual: rn });
        }
    }
    if !(rn <= cfg.tol) {
        return Err(GeovarError::NoConvergence { iterations: cfg.max_iter, residual: rn });
    }
    Ok(DepState { g, xi: x, a })
}

fn fd_jacobian<T: Real, F>(f: &F, x: &DVector<T>, _fx: &DVector<T>, rel: f64) -> Result<DMatrix<T>>
where
    F: Fn(&DVector<T>) -> Result<DVector<T>>,
{
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let step = cst::<T>(rel) * T::one().max(x[j].abs());
        let mut xp = x.clone();
        xp[j] += step;
        let mut xm = x.clone();
        xm[j] -= step;
        let col = (f(&xp)? - f(&xm)?) / (step + step);
        jac.set_column(j, &col);
    }
    Ok(jac)
}
