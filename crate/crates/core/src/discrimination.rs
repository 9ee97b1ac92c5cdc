//! Measurements: binary minimum-error discrimination, the square-root
//! measurement for four symmetric states, and the Audenaert–Mosonyi bound.

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, inner, jacobi, psd_sqrt_pinv, trace_norm, DensityOperator, Matrix4, Vector4,
    SUPPORT_CUTOFF,
};
use crate::states::{GramSpectrum, StateFamily};

/// Completeness tolerance `‖Σ E_i − 1‖` (elementwise).
pub const POVM_TOL: f64 = 1e-10;

/// Tolerance on prior probabilities summing to one.
pub const PRIOR_TOL: f64 = 1e-12;

/// Eigenvalues of the Helstrom operator with `|λ| ≤ KERNEL_TOL · max|λ|` are
/// treated as kernel and assigned to outcome 0.
pub const KERNEL_TOL: f64 = 1e-12;

/// A validated POVM on the 4-dimensional A-basis space.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<Matrix4>,
}

impl Povm {
    /// Checks each element is Hermitian PSD (min eigenvalue ≥ −1e-10) and that
    /// the elements sum to the identity within [`POVM_TOL`].
    pub fn new(elements: Vec<Matrix4>) -> Result<Self> {
        let mut sum = Matrix4::zeros();
        for e in &elements {
            let eig = eig_hermitian(e)?;
            if eig.min_value() < -POVM_TOL {
                return Err(Error::InvalidPovm(format!(
                    "element has negative eigenvalue {:e}",
                    eig.min_value()
                )));
            }
            sum += *e;
        }
        let deficit = sum - Matrix4::identity();
        let worst = deficit
            .0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if worst > POVM_TOL {
            return Err(Error::InvalidPovm(format!(
                "elements do not sum to identity (max deviation {worst:e})"
            )));
        }
        Ok(Povm {
            elements: elements.into_iter().map(|e| e.hermitian_part()).collect(),
        })
    }

    pub fn elements(&self) -> &[Matrix4] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Born probabilities `Tr(E_i ρ)`, in element order.
    pub fn probabilities(&self, rho: &DensityOperator) -> Vec<f64> {
        self.elements.iter().map(|e| rho.probability(e)).collect()
    }

    /// Born probabilities `⟨ψ|E_i|ψ⟩` for a pure state.
    pub fn probabilities_pure(&self, psi: &Vector4) -> Vec<f64> {
        self.elements
            .iter()
            .map(|e| e.expectation(psi).re)
            .collect()
    }
}

/// Optimal two-outcome measurement and its error probability.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryDiscrimination {
    pub p_err: f64,
    pub povm: Povm,
}

impl BinaryDiscrimination {
    /// Error probability obtained by evaluating the POVM directly.
    pub fn error_from_povm(
        &self,
        rho0: &DensityOperator,
        p0: f64,
        rho1: &DensityOperator,
        p1: f64,
    ) -> f64 {
        let [e0, e1] = [&self.povm.elements[0], &self.povm.elements[1]];
        p0 * rho0.probability(e1) + p1 * rho1.probability(e0)
    }
}

fn check_priors(priors: &[f64]) -> Result<()> {
    if priors.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidPriors(format!(
            "negative or non-finite prior in {priors:?}"
        )));
    }
    let total: f64 = priors.iter().sum();
    if (total - 1.0).abs() > PRIOR_TOL {
        return Err(Error::InvalidPriors(format!(
            "priors sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// Helstrom measurement for `ρ0` (prior `p0`) versus `ρ1` (prior `p1`).
///
/// `p_err = ½(1 − Tr|p0ρ0 − p1ρ1|)`. Outcome 0 projects onto the non-negative
/// eigenspace of `p0ρ0 − p1ρ1`, kernel included.
pub fn helstrom_binary(
    rho0: &DensityOperator,
    p0: f64,
    rho1: &DensityOperator,
    p1: f64,
) -> Result<BinaryDiscrimination> {
    check_priors(&[p0, p1])?;
    let diff = rho0.matrix().scale(p0) - rho1.matrix().scale(p1);
    let eig = eig_hermitian(&diff)?;
    let scale = eig.values.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let cut = KERNEL_TOL * scale;
    let mut pi0 = Matrix4::zeros();
    let mut pi1 = Matrix4::zeros();
    for (l, v) in eig.values.iter().zip(&eig.vectors) {
        if *l >= -cut {
            pi0 += Matrix4::projector(v);
        } else {
            pi1 += Matrix4::projector(v);
        }
    }
    let p_err = (0.5 * (1.0 - trace_norm(&diff)?)).clamp(0.0, 0.5);
    Ok(BinaryDiscrimination {
        p_err,
        povm: Povm::new(vec![pi0, pi1])?,
    })
}

/// Square-root measurement for the four equiprobable family states.
///
/// Elements 0..3 are `ρ^{-1/2}(¼σ_k)ρ^{-1/2}` in family order; element 4 is the
/// complement `1 − Σ E_k`, supported off the span of the states.
pub fn srm_povm(fam: &StateFamily) -> Povm {
    let rho = fam.average_state();
    let r = psd_sqrt_pinv(&rho, SUPPORT_CUTOFF).expect("average state is PSD");
    let mut elements: Vec<Matrix4> = fam
        .states()
        .iter()
        .map(|psi| {
            let v = r.mul_vec(psi);
            Matrix4::projector(&v).scale(0.25)
        })
        .collect();
    let mut total = Matrix4::zeros();
    for e in &elements {
        total += *e;
    }
    elements.push((Matrix4::identity() - total).hermitian_part());
    Povm::new(elements).expect("square-root measurement is a valid POVM")
}

/// Success probability of the square-root measurement, evaluated from its
/// POVM: `¼ Σ_k ⟨ψ_k|E_k|ψ_k⟩`.
pub fn srm_success_from_povm(fam: &StateFamily, povm: &Povm) -> f64 {
    fam.states()
        .iter()
        .zip(povm.elements())
        .map(|(psi, e)| 0.25 * e.expectation(psi).re)
        .sum()
}

/// `(1/16)(√λ0 + √λ1 + √λ2 + √λ3)²`.
pub fn srm_success_symmetric(s: &GramSpectrum) -> f64 {
    let root_sum: f64 = s.sqrt_values().iter().sum();
    root_sum * root_sum / 16.0
}

/// Pure-state shortcut for rank-one inputs, the matrix formula otherwise.
fn pair_fidelity(a: &DensityOperator, b: &DensityOperator) -> f64 {
    match (pure_vector(a), pure_vector(b)) {
        (Some(u), Some(v)) => inner(&u, &v).norm().min(1.0),
        _ => crate::linalg::fidelity(a, b),
    }
}

fn pure_vector(rho: &DensityOperator) -> Option<Vector4> {
    let eig = jacobi(rho.matrix());
    let rest: f64 = eig.values[1..].iter().map(|l| l.abs()).sum();
    (rest <= 1e-10).then_some(eig.vectors[0])
}

/// `½ Σ_{i≠j} √(p_i p_j) F(ρ_i, ρ_j)`, an upper bound on the minimum error
/// probability of discriminating the `ρ_i`.
pub fn am_bound_states(states: &[DensityOperator], priors: &[f64]) -> Result<f64> {
    if states.len() != priors.len() {
        return Err(Error::InvalidPriors(format!(
            "{} priors for {} states",
            priors.len(),
            states.len()
        )));
    }
    check_priors(priors)?;
    let mut sum = 0.0;
    for i in 0..states.len() {
        for j in 0..states.len() {
            if i != j {
                sum += (priors[i] * priors[j]).sqrt() * pair_fidelity(&states[i], &states[j]);
            }
        }
    }
    Ok(0.5 * sum)
}

/// Audenaert–Mosonyi bound for the four family states.
pub fn am_bound(fam: &StateFamily, priors: [f64; 4]) -> Result<f64> {
    check_priors(&priors)?;
    let mut sum = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                let f = inner(fam.state(i), fam.state(j)).norm().min(1.0);
                sum += (priors[i] * priors[j]).sqrt() * f;
            }
        }
    }
    Ok(0.5 * sum)
}
