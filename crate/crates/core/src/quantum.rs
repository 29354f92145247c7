//! Master equations for density matrices in superoperator (vectorized)
//! form.
//!
//! Superoperators act on column-stacked density matrices, built from the
//! identity `vec(A·B·C) = (Cᵀ ⊗ A)·vec(B)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::generator::{GeneratorSum, Term};
use crate::linalg::{self, hermitian_eigenvalues, kron, ComplexMatrix, C64};
use crate::par::{self, Exec};
use crate::scalar::{Interval, ScalarFn};
use crate::solver::{Propagator, Trajectory, TrajectoryKind};

const I: C64 = C64::new(0.0, 1.0);

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn sigma1() -> ComplexMatrix {
    ComplexMatrix::adiag_real(&[1.0, 1.0])
}

/// `[[0, i], [−i, 0]]`. Note the sign: this is the transpose of the more
/// common convention.
pub fn sigma2() -> ComplexMatrix {
    ComplexMatrix::adiag(&[I, -I])
}

pub fn sigma3() -> ComplexMatrix {
    ComplexMatrix::diag_real(&[1.0, -1.0])
}

/// `σ⁺ = √2·|0⟩⟨1|`, i.e. `(σ₁ − iσ₂)/√2` with [`sigma2`]. This
/// normalization and orientation reproduce the 4×4 generator of
/// [`example2`] entry for entry.
pub fn sigma_plus() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 1)] = c(std::f64::consts::SQRT_2);
    m
}

/// `σ⁻ = (σ⁺)† = √2·|1⟩⟨0|`.
pub fn sigma_minus() -> ComplexMatrix {
    sigma_plus().adjoint()
}

/// Default tolerances on a state: Hermiticity and trace within 1e-10,
/// eigenvalues no lower than −1e-9.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalityTol {
    pub hermiticity: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
}

impl PhysicalityTol {
    pub const STATE: PhysicalityTol = PhysicalityTol { hermiticity: 1e-10, trace: 1e-10, min_eigenvalue: -1e-9 };
    /// Looser bounds for evolved states, which carry integration drift.
    pub const TRAJECTORY: PhysicalityTol = PhysicalityTol { hermiticity: 1e-8, trace: 1e-9, min_eigenvalue: -1e-9 };
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhysicalityReport {
    /// `‖ρ − ρ†‖_F`.
    pub hermiticity_defect: f64,
    /// `|tr ρ − 1|`.
    pub trace_defect: f64,
    /// Smallest eigenvalue of the Hermitian part `(ρ + ρ†)/2`.
    pub min_eigenvalue: f64,
}

impl PhysicalityReport {
    pub fn is_physical(&self, tol: &PhysicalityTol) -> bool {
        self.violation(tol).is_none()
    }

    pub fn violation(&self, tol: &PhysicalityTol) -> Option<String> {
        let mut bad = Vec::new();
        if self.hermiticity_defect > tol.hermiticity {
            bad.push(format!("hermiticity defect {:.3e}", self.hermiticity_defect));
        }
        if self.trace_defect > tol.trace {
            bad.push(format!("trace defect {:.3e}", self.trace_defect));
        }
        if self.min_eigenvalue < tol.min_eigenvalue {
            bad.push(format!("minimum eigenvalue {:.3e}", self.min_eigenvalue));
        }
        (!bad.is_empty()).then(|| bad.join(", "))
    }
}

pub fn physicality_check(rho: &ComplexMatrix) -> Result<PhysicalityReport> {
    if !rho.is_square() {
        return Err(Error::NotSquare { rows: rho.rows(), cols: rho.cols() });
    }
    let adj = rho.adjoint();
    let herm = (rho + &adj).scale_real(0.5);
    let eig = hermitian_eigenvalues(&herm)?;
    Ok(PhysicalityReport {
        hermiticity_defect: rho.distance(&adj),
        trace_defect: (rho.trace() - 1.0).norm(),
        min_eigenvalue: eig[0],
    })
}

/// A validated quantum state.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let report = physicality_check(&m)?;
        match report.violation(&PhysicalityTol::STATE) {
            Some(why) => Err(Error::InvalidState(why)),
            None => Ok(Self(m)),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.rows()
    }
}

/// Matrix form of a linear map on `n × n` matrices, `n² × n²`.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    matrix: ComplexMatrix,
    system_dim: usize,
}

impl Superoperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare { rows: matrix.rows(), cols: matrix.cols() });
        }
        let d = matrix.rows();
        let n = (d as f64).sqrt().round() as usize;
        if n * n != d {
            return Err(Error::DimensionMismatch(format!("superoperator size {d} is not a perfect square")));
        }
        Ok(Self { matrix, system_dim: n })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    /// `unvec(S·vec(ρ))`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != self.system_dim || rho.cols() != self.system_dim {
            return Err(Error::DimensionMismatch(format!(
                "superoperator on {0}x{0} applied to {1}x{2}",
                self.system_dim,
                rho.rows(),
                rho.cols()
            )));
        }
        linalg::unvec(&(&self.matrix * &linalg::vec(rho)), self.system_dim)
    }
}

fn require_square(m: &ComplexMatrix) -> Result<usize> {
    if m.is_square() {
        Ok(m.rows())
    } else {
        Err(Error::NotSquare { rows: m.rows(), cols: m.cols() })
    }
}

/// `ρ ↦ UρU† − ρ`, as `conj(U) ⊗ U − I`.
pub fn conjugation_channel(u: &ComplexMatrix) -> Result<Superoperator> {
    let n = require_square(u)?;
    Superoperator::new(&kron(&u.conj(), u) - &ComplexMatrix::identity(n * n))
}

/// `ρ ↦ −(i/ħ)[H, ρ]`, as `−(i/ħ)(I ⊗ H − Hᵀ ⊗ I)`.
pub fn hamiltonian_part(h: &ComplexMatrix, hbar: f64) -> Result<Superoperator> {
    let n = require_square(h)?;
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::Invalid(format!("hbar must be positive, got {hbar}")));
    }
    let defect = h.distance(&h.adjoint());
    if defect > linalg::HERMITIAN_TOL * h.frob_norm().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let id = ComplexMatrix::identity(n);
    let comm = &kron(&id, h) - &kron(&h.transpose(), &id);
    Superoperator::new(comm.scale(-I / hbar))
}

/// `ρ ↦ AρA† − ½{A†A, ρ}`.
pub fn dissipator(a: &ComplexMatrix) -> Result<Superoperator> {
    let n = require_square(a)?;
    let id = ComplexMatrix::identity(n);
    let ada = &a.adjoint() * a;
    let anti = &kron(&id, &ada) + &kron(&ada.transpose(), &id);
    Superoperator::new(kron(&a.conj(), a).add_scaled(&anti, c(-0.5)))
}

/// `ρ ↦ ½([F_a, ρF_b] + [F_aρ, F_b]) = F_aρF_b − ½(ρF_bF_a + F_bF_aρ)`.
pub fn bilinear_term(f_a: &ComplexMatrix, f_b: &ComplexMatrix) -> Result<Superoperator> {
    let n = require_square(f_a)?;
    if f_b.rows() != n || f_b.cols() != n {
        return Err(Error::DimensionMismatch("bilinear term operators differ in size".into()));
    }
    let id = ComplexMatrix::identity(n);
    let ba = f_b * f_a;
    let anti = &kron(&id, &ba) + &kron(&ba.transpose(), &id);
    Superoperator::new(kron(&f_b.transpose(), f_a).add_scaled(&anti, c(-0.5)))
}

/// `scale · exp(Σ_j factor_j · ∫_0^t f_j(τ) dτ)`.
#[derive(Clone, Debug)]
pub struct ReferenceWeight {
    pub scale: C64,
    pub exponents: Vec<(C64, ScalarFn)>,
}

impl ReferenceWeight {
    fn constant(scale: f64) -> Self {
        Self { scale: c(scale), exponents: Vec::new() }
    }

    fn exp(scale: f64, exponents: Vec<(C64, ScalarFn)>) -> Self {
        Self { scale: c(scale), exponents }
    }

    pub fn eval(&self, t: f64) -> Result<C64> {
        let mut arg = C64::new(0.0, 0.0);
        for (factor, f) in &self.exponents {
            arg += factor * f.integrate(0.0, t)?;
        }
        Ok(self.scale * arg.exp())
    }
}

/// Closed-form `Φ(t) = Σ_k w_k(t)·M_k` over fixed structural matrices.
#[derive(Clone, Debug)]
pub struct AnalyticReference {
    pub terms: Vec<(ReferenceWeight, ComplexMatrix)>,
}

impl AnalyticReference {
    pub fn eval(&self, t: f64) -> Result<ComplexMatrix> {
        let n = self.terms[0].1.rows();
        let mut acc = ComplexMatrix::zeros(n, n);
        for (w, m) in &self.terms {
            acc = acc.add_scaled(m, w.eval(t)?);
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug)]
pub enum ProblemParams {
    Example1 { gamma: C64, alphas: [ScalarFn; 3] },
    Example2 { mu: f64, hbar: f64, gamma: ScalarFn, eps: ScalarFn, c: [[ScalarFn; 2]; 2] },
    Custom,
}

#[derive(Clone, Debug)]
pub struct QuantumProblem {
    pub name: String,
    pub system_dim: usize,
    pub generator: GeneratorSum,
    pub params: ProblemParams,
    pub reference: Option<AnalyticReference>,
}

impl QuantumProblem {
    /// Wraps a generator already in superoperator form.
    pub fn custom(name: impl Into<String>, generator: GeneratorSum) -> Result<Self> {
        let d = generator.dimension();
        let n = (d as f64).sqrt().round() as usize;
        if n * n != d {
            return Err(Error::DimensionMismatch(format!("generator size {d} is not a perfect square")));
        }
        Ok(Self { name: name.into(), system_dim: n, generator, params: ProblemParams::Custom, reference: None })
    }
}

fn constant(z: C64) -> ScalarFn {
    ScalarFn::constant(z)
}

/// Structural matrices of the two-level examples.
fn diag1001() -> ComplexMatrix {
    ComplexMatrix::diag_real(&[1.0, 0.0, 0.0, 1.0])
}

fn diag0110() -> ComplexMatrix {
    ComplexMatrix::diag_real(&[0.0, 1.0, 1.0, 0.0])
}

fn adiag1001() -> ComplexMatrix {
    ComplexMatrix::adiag_real(&[1.0, 0.0, 0.0, 1.0])
}

fn adiag0110() -> ComplexMatrix {
    ComplexMatrix::adiag_real(&[0.0, 1.0, 1.0, 0.0])
}

/// Random-unitary-style dephasing of a qubit,
/// `dρ/dt = γ Σ_k α_k(t)(σ_k ρ σ_k* − ρ)`, with the generator split into
/// four commuting proper functions:
///
/// | G | f(t, λ) |
/// |---|---|
/// | adiag(1,0,0,1) | γ(α₁+α₂)λ |
/// | adiag(0,1,1,0) | γ(α₁−α₂)λ |
/// | I | −γ(α₁+α₂)λ |
/// | diag(0,1,1,0) | −2γα₃λ |
pub fn example1(
    gamma: C64,
    a1: ScalarFn,
    a2: ScalarFn,
    a3: ScalarFn,
    interval: Interval,
) -> Result<QuantumProblem> {
    let sum12 = a1.clone() + a2.clone();
    let diff12 = a1.clone() - a2.clone();
    let terms = vec![
        Term::new(constant(gamma) * sum12.clone(), adiag1001()),
        Term::new(constant(gamma) * diff12, adiag0110()),
        Term::new(constant(-gamma) * sum12.clone(), ComplexMatrix::identity(4)),
        Term::new(constant(-2.0 * gamma) * a3.clone(), diag0110()),
    ];
    let generator = GeneratorSum::new(4, interval, terms)?;

    let m2g = -2.0 * gamma;
    let reference = AnalyticReference {
        terms: vec![
            (ReferenceWeight::constant(0.5), diag1001()),
            (ReferenceWeight::exp(0.5, vec![(m2g, sum12.clone())]), diag1001()),
            (ReferenceWeight::constant(0.5), adiag1001()),
            (ReferenceWeight::exp(-0.5, vec![(m2g, sum12)]), adiag1001()),
            (ReferenceWeight::exp(0.5, vec![(m2g, a2.clone()), (m2g, a3.clone())]), adiag0110()),
            (ReferenceWeight::exp(-0.5, vec![(m2g, a1.clone()), (m2g, a3.clone())]), adiag0110()),
            (ReferenceWeight::exp(0.5, vec![(m2g, a2.clone()), (m2g, a3.clone())]), diag0110()),
            (ReferenceWeight::exp(0.5, vec![(m2g, a1.clone()), (m2g, a3.clone())]), diag0110()),
        ],
    };

    Ok(QuantumProblem {
        name: "example1".into(),
        system_dim: 2,
        generator,
        params: ProblemParams::Example1 { gamma, alphas: [a1, a2, a3] },
        reference: Some(reference),
    })
}

/// The `μ`-dependent corner matrix of [`example2`]:
/// rows `(μ−1, 0, 0, μ)`, `0`, `0`, `(1−μ, 0, 0, −μ)`.
pub fn example2_corner(mu: f64) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(4, 4);
    g[(0, 0)] = c(mu - 1.0);
    g[(0, 3)] = c(mu);
    g[(3, 0)] = c(1.0 - mu);
    g[(3, 3)] = c(-mu);
    g
}

/// Coefficients of `diag(0,1,0,0)` and `diag(0,0,1,0)` in the example-2
/// generator: `4c₀₁ − 2c₀₀ − 2c₁₁ − γ ± iε/ħ`.
fn example2_rates(
    hbar: f64,
    gamma: &ScalarFn,
    eps: &ScalarFn,
    cm: &[[ScalarFn; 2]; 2],
) -> (ScalarFn, ScalarFn) {
    let base = |cross: &ScalarFn| {
        ScalarFn::real(4.0) * cross.clone()
            - ScalarFn::real(2.0) * cm[0][0].clone()
            - ScalarFn::real(2.0) * cm[1][1].clone()
            - gamma.clone()
    };
    let ie = constant(I / hbar) * eps.clone();
    (base(&cm[0][1]) + ie.clone(), base(&cm[1][0]) - ie)
}

/// Qubit with a detuning Hamiltonian, mixed amplitude damping/pumping and
/// bilinear dephasing terms:
///
/// `L(t)ρ = −(i/2ħ)ε[σ₃,ρ] + γ(μL₁ + (1−μ)L₂)ρ + ½Σ c_{αβ}([F_α, ρF_β] + [F_αρ, F_β])`
///
/// with `L₁ = D[σ⁺]`, `L₂ = D[σ⁻]`, `F₀ = σ⁻σ⁺`, `F₁ = σ⁺σ⁻`. The generator
/// is stored as three commuting proper functions on the corner matrix,
/// `diag(0,1,0,0)` and `diag(0,0,1,0)`; [`example2_from_parts`] builds the
/// same map from the individual superoperators.
#[allow(clippy::too_many_arguments)]
pub fn example2(
    mu: f64,
    gamma: ScalarFn,
    eps: ScalarFn,
    c00: ScalarFn,
    c01: ScalarFn,
    c10: ScalarFn,
    c11: ScalarFn,
    interval: Interval,
) -> Result<QuantumProblem> {
    example2_with_hbar(mu, 1.0, gamma, eps, [[c00, c01], [c10, c11]], interval)
}

pub fn example2_with_hbar(
    mu: f64,
    hbar: f64,
    gamma: ScalarFn,
    eps: ScalarFn,
    cm: [[ScalarFn; 2]; 2],
    interval: Interval,
) -> Result<QuantumProblem> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::Invalid(format!("mu must lie in [0, 1], got {mu}")));
    }
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::Invalid(format!("hbar must be positive, got {hbar}")));
    }
    let g1 = example2_corner(mu);
    let g2 = ComplexMatrix::diag_real(&[0.0, 1.0, 0.0, 0.0]);
    let g3 = ComplexMatrix::diag_real(&[0.0, 0.0, 1.0, 0.0]);
    let (k2, k3) = example2_rates(hbar, &gamma, &eps, &cm);
    let terms = vec![
        Term::new(ScalarFn::real(2.0) * gamma.clone(), g1.clone()),
        Term::new(k2.clone(), g2.clone()),
        Term::new(k3.clone(), g3.clone()),
    ];
    let generator = GeneratorSum::new(4, interval, terms)?;

    // exp(∫2γ G₁) = (I + G₁) − e^{−∫2γ} G₁ since G₁² = −G₁; the (I + G₁)
    // corner block is the stationary projector.
    let mut stationary = ComplexMatrix::zeros(4, 4);
    stationary[(0, 0)] = c(mu);
    stationary[(0, 3)] = c(mu);
    stationary[(3, 0)] = c(1.0 - mu);
    stationary[(3, 3)] = c(1.0 - mu);
    let reference = AnalyticReference {
        terms: vec![
            (ReferenceWeight::constant(1.0), stationary),
            (ReferenceWeight::exp(1.0, vec![(c(1.0), k2)]), g2),
            (ReferenceWeight::exp(1.0, vec![(c(1.0), k3)]), g3),
            (ReferenceWeight::exp(-1.0, vec![(c(-2.0), gamma.clone())]), g1),
        ],
    };

    Ok(QuantumProblem {
        name: "example2".into(),
        system_dim: 2,
        generator,
        params: ProblemParams::Example2 { mu, hbar, gamma, eps, c: cm },
        reference: Some(reference),
    })
}

/// The example-2 generator assembled term by term from
/// [`hamiltonian_part`], [`dissipator`] and [`bilinear_term`] (seven terms,
/// not mutually commuting).
pub fn example2_from_parts(
    mu: f64,
    hbar: f64,
    gamma: ScalarFn,
    eps: ScalarFn,
    cm: [[ScalarFn; 2]; 2],
    interval: Interval,
) -> Result<GeneratorSum> {
    let ham = hamiltonian_part(&sigma3().scale_real(0.5), hbar)?;
    let l1 = dissipator(&sigma_plus())?;
    let l2 = dissipator(&sigma_minus())?;
    let f = [&sigma_minus() * &sigma_plus(), &sigma_plus() * &sigma_minus()];
    let mut terms = vec![
        Term::new(eps, ham.into_matrix()),
        Term::new(ScalarFn::real(mu) * gamma.clone(), l1.into_matrix()),
        Term::new(ScalarFn::real(1.0 - mu) * gamma, l2.into_matrix()),
    ];
    for (a, row) in cm.into_iter().enumerate() {
        for (b, coeff) in row.into_iter().enumerate() {
            terms.push(Term::new(coeff, bilinear_term(&f[a], &f[b])?.into_matrix()));
        }
    }
    GeneratorSum::new(4, interval, terms)
}

/// Whether evolved states must stay physical.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhysicalityPolicy {
    Enforce(PhysicalityTol),
    ReportOnly,
}

#[derive(Clone, Debug)]
pub struct StateTrajectory {
    pub trajectory: Trajectory,
    pub reports: Vec<PhysicalityReport>,
}

/// `ρ(t) = unvec(Φ(t)·vec(ρ₀))` at each time, each checked for physicality.
pub fn evolve_state(
    p: &Propagator,
    rho0: &DensityMatrix,
    times: &[f64],
    policy: PhysicalityPolicy,
) -> Result<StateTrajectory> {
    evolve_state_with(p, rho0, times, policy, Exec::default())
}

pub fn evolve_state_with(
    p: &Propagator,
    rho0: &DensityMatrix,
    times: &[f64],
    policy: PhysicalityPolicy,
    exec: Exec,
) -> Result<StateTrajectory> {
    let n = rho0.dimension();
    if p.dimension() != n * n {
        return Err(Error::DimensionMismatch(format!(
            "propagator of size {} cannot act on a {n}x{n} state",
            p.dimension()
        )));
    }
    let phis = p.trajectory_with(times, exec)?;
    let v0 = linalg::vec(rho0.matrix());
    let states: Vec<Result<(ComplexMatrix, PhysicalityReport)>> = par::map(exec, &phis.values, |phi| {
        let rho = linalg::unvec(&(phi * &v0), n)?;
        let report = physicality_check(&rho)?;
        Ok((rho, report))
    });
    let mut values = Vec::with_capacity(times.len());
    let mut reports = Vec::with_capacity(times.len());
    for (state, &t) in states.into_iter().zip(times) {
        let (rho, report) = state?;
        if let PhysicalityPolicy::Enforce(tol) = policy {
            if let Some(detail) = report.violation(&tol) {
                return Err(Error::Unphysical { t, detail });
            }
        }
        values.push(rho);
        reports.push(report);
    }
    Ok(StateTrajectory { trajectory: Trajectory::new(TrajectoryKind::State, times.to_vec(), values)?, reports })
}
