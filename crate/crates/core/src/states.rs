//! Symmetric four-state families.
//!
//! Alice's states are ordered `ψ00, ψ01, ψ11, ψ10` so that each is the
//! previous one rotated by a unitary `U` with `U⁴ = 1`. The whole family is
//! fixed by two overlaps: `f = ⟨ψ00|ψ01⟩` (complex) and `g = ⟨ψ00|ψ11⟩` (real).
//! Every quantity in this crate depends only on these overlaps, or
//! equivalently on the four Gram eigenvalues.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{inner, DensityOperator, Matrix4, Vector4, DIM};

/// Slack allowed on the feasibility inequalities before rejecting overlaps.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Tolerance on `Σ λ_i = 4`.
pub const SPECTRUM_SUM_TOL: f64 = 1e-12;

/// Eigenvalues above this count towards the span dimension.
pub const RANK_THRESHOLD: f64 = 1e-10;

/// Eigenvalues computed from overlaps at or below this are set to zero.
pub const ZERO_SNAP: f64 = 64.0 * f64::EPSILON;

/// Labels of the four states in family order.
pub const LABELS: [&str; 4] = ["00", "01", "11", "10"];

/// Alice's bits `(x0, x1)` for the state at family position `k`.
pub fn bits_of(k: usize) -> (u8, u8) {
    match k {
        0 => (0, 0),
        1 => (0, 1),
        2 => (1, 1),
        3 => (1, 0),
        _ => panic!("family index {k} out of range"),
    }
}

/// Family position of the state encoding `(x0, x1)`.
pub fn index_of(x0: u8, x1: u8) -> usize {
    match (x0 & 1, x1 & 1) {
        (0, 0) => 0,
        (0, 1) => 1,
        (1, 1) => 2,
        _ => 3,
    }
}

/// The overlaps `f = ⟨ψ00|ψ01⟩` and `g = ⟨ψ00|ψ11⟩` of a feasible family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapPair {
    f: Complex64,
    g: f64,
}

impl OverlapPair {
    /// Validates `-1 ≤ g ≤ 1`, `|2 Re f| ≤ 1 + g` and `|2 Im f| ≤ 1 - g`.
    pub fn new(f: Complex64, g: f64) -> Result<Self> {
        if !(f.re.is_finite() && f.im.is_finite() && g.is_finite()) {
            return Err(Error::InfeasibleOverlaps("non-finite overlap".into()));
        }
        if g.abs() > 1.0 + FEASIBILITY_TOL {
            return Err(Error::InfeasibleOverlaps(format!(
                "|g| = {} exceeds 1",
                g.abs()
            )));
        }
        if (2.0 * f.re).abs() > 1.0 + g + FEASIBILITY_TOL {
            return Err(Error::InfeasibleOverlaps(format!(
                "|2 Re f| = {} exceeds 1 + g = {}",
                (2.0 * f.re).abs(),
                1.0 + g
            )));
        }
        if (2.0 * f.im).abs() > 1.0 - g + FEASIBILITY_TOL {
            return Err(Error::InfeasibleOverlaps(format!(
                "|2 Im f| = {} exceeds 1 - g = {}",
                (2.0 * f.im).abs(),
                1.0 - g
            )));
        }
        Ok(OverlapPair { f, g })
    }

    pub fn from_parts(f_re: f64, f_im: f64, g: f64) -> Result<Self> {
        Self::new(Complex64::new(f_re, f_im), g)
    }

    pub fn f(&self) -> Complex64 {
        self.f
    }

    pub fn g(&self) -> f64 {
        self.g
    }
}

/// The Gram matrix `G_ij = ⟨ψ_i|ψ_j⟩`, circulant with first row `(1, f, g, f*)`.
pub fn gram_matrix(ov: &OverlapPair) -> Matrix4 {
    let row = [
        Complex64::new(1.0, 0.0),
        ov.f,
        Complex64::new(ov.g, 0.0),
        ov.f.conj(),
    ];
    let mut m = Matrix4::zeros();
    for i in 0..DIM {
        for j in 0..DIM {
            m.0[i][j] = row[(j + DIM - i) % DIM];
        }
    }
    m
}

/// The four Gram eigenvalues: non-negative and summing to four.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramSpectrum([f64; 4]);

impl GramSpectrum {
    /// Rounding-level negatives (down to `-FEASIBILITY_TOL`) are clamped to zero.
    pub fn new(values: [f64; 4]) -> Result<Self> {
        if values.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidSpectrum("non-finite eigenvalue".into()));
        }
        if let Some(l) = values.iter().find(|&&l| l < -FEASIBILITY_TOL) {
            return Err(Error::InvalidSpectrum(format!("negative eigenvalue {l}")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 4.0).abs() > SPECTRUM_SUM_TOL {
            return Err(Error::InvalidSpectrum(format!(
                "eigenvalues sum to {sum}, not 4"
            )));
        }
        Ok(GramSpectrum(values.map(|l| l.max(0.0))))
    }

    pub fn values(&self) -> [f64; 4] {
        self.0
    }

    /// Dimension of the space spanned by the states.
    pub fn rank(&self) -> usize {
        self.0.iter().filter(|&&l| l > RANK_THRESHOLD).count()
    }

    pub fn sqrt_values(&self) -> [f64; 4] {
        self.0.map(f64::sqrt)
    }
}

impl fmt::Display for GramSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "({a}, {b}, {c}, {d})")
    }
}

/// `λ0 = 1+f+g+f*`, `λ1 = 1+if-g-if*`, `λ2 = 1-f+g-f*`, `λ3 = 1-if-g+if*`.
pub fn gram_spectrum(ov: &OverlapPair) -> GramSpectrum {
    let i = Complex64::i();
    let f = ov.f;
    let fc = f.conj();
    let g = ov.g;
    let l0 = 1.0 + f + g + fc;
    let l1 = 1.0 + i * f - g - i * fc;
    let l2 = 1.0 - f + g - fc;
    let l3 = 1.0 - i * f - g + i * fc;
    GramSpectrum([l0.re, l1.re, l2.re, l3.re].map(snap_zero))
}

/// Eigenvalues within [`ZERO_SNAP`] of zero are cancellation noise from
/// sums of order-one terms; their square roots would otherwise leak `~1e-8`
/// into every metric.
fn snap_zero(l: f64) -> f64 {
    if l <= ZERO_SNAP {
        0.0
    } else {
        l
    }
}

/// Inverse of [`gram_spectrum`].
pub fn spectrum_to_overlaps(s: &GramSpectrum) -> OverlapPair {
    let [l0, l1, l2, l3] = s.0;
    let f = Complex64::new((l0 - l2) / 4.0, (l3 - l1) / 4.0);
    let g = (l0 + l2 - l1 - l3) / 4.0;
    // a valid spectrum always maps to feasible overlaps
    OverlapPair { f, g }
}

/// The four family states in the A-basis, plus their generating data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateFamily {
    states: [Vector4; 4],
    overlaps: OverlapPair,
    spectrum: GramSpectrum,
}

/// Realizes the family in the orthonormal A-basis.
///
/// State `k` has coordinates `½ √λ_j (-i)^{jk}`, which is the Appendix A
/// expansion of `ψ00, ψ01 = Uψ00, ψ11 = U²ψ00, ψ10 = U³ψ00` with `U|A_j⟩ = (-i)^j |A_j⟩`.
pub fn build_states(ov: &OverlapPair) -> StateFamily {
    let spectrum = gram_spectrum(ov);
    let roots = spectrum.sqrt_values();
    let minus_i = -Complex64::i();
    let mut states = [[Complex64::new(0.0, 0.0); DIM]; 4];
    for (k, state) in states.iter_mut().enumerate() {
        for j in 0..DIM {
            state[j] = minus_i.powu(((j * k) % 4) as u32) * (0.5 * roots[j]);
        }
    }
    StateFamily {
        states,
        overlaps: *ov,
        spectrum,
    }
}

impl StateFamily {
    pub fn states(&self) -> &[Vector4; 4] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &Vector4 {
        &self.states[k]
    }

    pub fn overlaps(&self) -> &OverlapPair {
        &self.overlaps
    }

    pub fn spectrum(&self) -> &GramSpectrum {
        &self.spectrum
    }

    /// `σ_k = |ψ_k⟩⟨ψ_k|`.
    pub fn density(&self, k: usize) -> DensityOperator {
        DensityOperator::pure(&self.states[k]).expect("family states are normalized")
    }

    /// Gram matrix computed from the realized vectors.
    pub fn realized_gram(&self) -> Matrix4 {
        let mut m = Matrix4::zeros();
        for i in 0..DIM {
            for j in 0..DIM {
                m.0[i][j] = inner(&self.states[i], &self.states[j]);
            }
        }
        m
    }

    /// `ρ = ¼ Σ σ_k`, the average state for equiprobable inputs.
    pub fn average_state(&self) -> Matrix4 {
        let mut m = Matrix4::zeros();
        for v in &self.states {
            m += Matrix4::projector(v);
        }
        m.scale(0.25)
    }
}

/// Which of Alice's bits an honest receiver learns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BitChoice {
    First,
    Second,
}

impl BitChoice {
    pub fn from_bit(c: u8) -> Self {
        if c & 1 == 0 {
            BitChoice::First
        } else {
            BitChoice::Second
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            BitChoice::First => 0,
            BitChoice::Second => 1,
        }
    }

    /// The value of the selected bit in `(x0, x1)`.
    pub fn select(self, (x0, x1): (u8, u8)) -> u8 {
        match self {
            BitChoice::First => x0,
            BitChoice::Second => x1,
        }
    }
}

/// The two equiprobable mixtures an honest receiver must tell apart: states
/// whose selected bit is 0 versus states whose selected bit is 1.
pub fn pair_mixtures(fam: &StateFamily, choice: BitChoice) -> (DensityOperator, DensityOperator) {
    let mut zero = Matrix4::zeros();
    let mut one = Matrix4::zeros();
    for k in 0..4 {
        let sigma = Matrix4::projector(&fam.states[k]).scale(0.5);
        if choice.select(bits_of(k)) == 0 {
            zero += sigma;
        } else {
            one += sigma;
        }
    }
    (
        DensityOperator::new(zero).expect("mixture of family states"),
        DensityOperator::new(one).expect("mixture of family states"),
    )
}

/// The families analysed in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    /// BB84 states `|0⟩, √i|+⟩, i|1⟩, −i√i|−⟩`.
    Wiesner,
    /// `a|0⟩ + i^k b|1⟩`.
    Qubit,
    /// Four-dimensional family interpolating between orthonormal and Wiesner.
    Ququart,
    /// `a|0⟩ ± b|1⟩, a|0⟩ ± b|2⟩`.
    Qutrit,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Wiesner => "wiesner",
            FamilyKind::Qubit => "qubit",
            FamilyKind::Ququart => "ququart",
            FamilyKind::Qutrit => "qutrit",
        }
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "wiesner" => Ok(FamilyKind::Wiesner),
            "qubit" => Ok(FamilyKind::Qubit),
            "ququart" => Ok(FamilyKind::Ququart),
            "qutrit" => Ok(FamilyKind::Qutrit),
            other => Err(format!(
                "unknown family '{other}' (expected wiesner, qubit, ququart or qutrit)"
            )),
        }
    }
}

/// A named family with its real amplitude `a ∈ [0, 1]` (`b = √(1 − a²)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NamedFamily {
    kind: FamilyKind,
    param: f64,
}

impl NamedFamily {
    pub fn new(kind: FamilyKind, param: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&param) {
            return Err(Error::ParamOutOfRange(param));
        }
        Ok(NamedFamily { kind, param })
    }

    pub fn wiesner() -> Self {
        NamedFamily {
            kind: FamilyKind::Wiesner,
            param: FRAC_1_SQRT_2,
        }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    /// The amplitude `a`; fixed at `1/√2` for the Wiesner family.
    pub fn param(&self) -> f64 {
        self.param
    }

    pub fn b(&self) -> f64 {
        (1.0 - self.param * self.param).max(0.0).sqrt()
    }
}

/// Overlaps of a named family.
pub fn named_family(nf: &NamedFamily) -> OverlapPair {
    let a = nf.param;
    let a2 = a * a;
    let (f, g) = match nf.kind {
        FamilyKind::Wiesner => (Complex64::new(0.5, 0.5), 0.0),
        FamilyKind::Qubit => (Complex64::new(a2, 1.0 - a2), 2.0 * a2 - 1.0),
        FamilyKind::Ququart => (Complex64::new(a / 2.0, a / 2.0), 0.0),
        FamilyKind::Qutrit => (Complex64::new(a2, 0.0), 2.0 * a2 - 1.0),
    };
    OverlapPair::new(f, g).expect("named families are feasible for a in [0, 1]")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig_hermitian, jacobi};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::SQRT_2;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_spectrum(s: &GramSpectrum, expected: [f64; 4]) {
        for (a, b) in s.values().iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
    }

    fn wiesner() -> OverlapPair {
        named_family(&NamedFamily::wiesner())
    }

    #[test]
    fn gram_matrix_examples() {
        let id = gram_matrix(&OverlapPair::from_parts(0.0, 0.0, 0.0).unwrap());
        assert_eq!(id, Matrix4::identity());

        let ones = gram_matrix(&OverlapPair::from_parts(1.0, 0.0, 1.0).unwrap());
        assert!(ones.0.iter().flatten().all(|z| *z == cx(1.0, 0.0)));

        let w = gram_matrix(&wiesner());
        assert_eq!(
            w.0[0],
            [cx(1.0, 0.0), cx(0.5, 0.5), cx(0.0, 0.0), cx(0.5, -0.5)]
        );
        assert!(w.is_hermitian(0.0));
    }

    #[test]
    fn wiesner_overlaps_from_explicit_states() {
        // |0⟩, √i|+⟩, i|1⟩, −i√i|−⟩ in the computational basis; the last phase
        // is U³|0⟩ for U = √i·R(π/4), which exact cyclic symmetry needs
        let s = cx(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        let i = Complex64::i();
        let h = FRAC_1_SQRT_2;
        let z = cx(0.0, 0.0);
        let psi00 = [cx(1.0, 0.0), z, z, z];
        let psi01 = [s * h, s * h, z, z];
        let psi11 = [z, i, z, z];
        let psi10 = [-i * s * h, i * s * h, z, z];
        let f = inner(&psi00, &psi01);
        let g = inner(&psi00, &psi11);
        assert_abs_diff_eq!(f.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(f.im, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g.norm(), 0.0, epsilon = 1e-15);
        // remaining overlaps follow the circulant pattern
        let ov = wiesner();
        let fam = [psi00, psi01, psi11, psi10];
        let gram = gram_matrix(&ov);
        for r in 0..4 {
            for c in 0..4 {
                assert!((inner(&fam[r], &fam[c]) - gram.0[r][c]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn spectrum_examples() {
        assert_spectrum(
            &gram_spectrum(&OverlapPair::from_parts(0.0, 0.0, 0.0).unwrap()),
            [1.0; 4],
        );
        assert_spectrum(
            &gram_spectrum(&OverlapPair::from_parts(1.0, 0.0, 1.0).unwrap()),
            [4.0, 0.0, 0.0, 0.0],
        );
        assert_spectrum(&gram_spectrum(&wiesner()), [2.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn inverse_examples() {
        let ov = spectrum_to_overlaps(&GramSpectrum::new([1.0; 4]).unwrap());
        assert_eq!((ov.f(), ov.g()), (cx(0.0, 0.0), 0.0));
        let ov = spectrum_to_overlaps(&GramSpectrum::new([4.0, 0.0, 0.0, 0.0]).unwrap());
        assert_eq!((ov.f(), ov.g()), (cx(1.0, 0.0), 1.0));
        let ov = spectrum_to_overlaps(&GramSpectrum::new([2.0, 0.0, 0.0, 2.0]).unwrap());
        assert_eq!((ov.f(), ov.g()), (cx(0.5, 0.5), 0.0));
    }

    #[test]
    fn infeasible_overlaps_rejected() {
        let err = OverlapPair::from_parts(0.9, 0.9, 0.0).unwrap_err();
        assert!(matches!(err, Error::InfeasibleOverlaps(ref m) if m.contains("Re f")));
        let err = OverlapPair::from_parts(0.0, 0.6, 0.5).unwrap_err();
        assert!(matches!(err, Error::InfeasibleOverlaps(ref m) if m.contains("Im f")));
        assert!(OverlapPair::from_parts(0.0, 0.0, 1.5).is_err());
        assert!(OverlapPair::from_parts(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn spectrum_validation() {
        assert!(GramSpectrum::new([2.0, 2.0, 0.0, 0.1]).is_err());
        assert!(GramSpectrum::new([4.5, -0.5, 0.0, 0.0]).is_err());
        assert!(GramSpectrum::new([4.0, -1e-13, 0.0, 1e-13]).is_ok());
    }

    #[test]
    fn build_states_examples() {
        let fam = build_states(&OverlapPair::from_parts(0.0, 0.0, 0.0).unwrap());
        let gram = fam.realized_gram();
        assert!((gram - Matrix4::identity()).frobenius_norm() < 1e-15);

        let fam = build_states(&OverlapPair::from_parts(1.0, 0.0, 1.0).unwrap());
        for v in fam.states() {
            assert!((v[0] - cx(1.0, 0.0)).norm() < 1e-15);
            assert!(v[1..].iter().all(|z| z.norm() < 1e-15));
        }

        let fam = build_states(&wiesner());
        for v in fam.states() {
            assert_eq!(v[1].norm(), 0.0);
            assert_eq!(v[2].norm(), 0.0);
        }
        let f = inner(fam.state(0), fam.state(1));
        assert!((f - cx(0.5, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn wiesner_first_bit_mixture_matches_appendix_form() {
        // ½(σ00 + σ01) = ⅛ [2λ_i on the diagonal, √(λ_i λ_j)(1±i) off it]
        let lambda = [2.0, 0.0, 0.0, 2.0];
        let fam = build_states(&wiesner());
        let (rho0, rho1) = pair_mixtures(&fam, BitChoice::First);
        let mut expected = Matrix4::zeros();
        let up = cx(1.0, 1.0);
        let down = cx(1.0, -1.0);
        for i in 0..4 {
            expected.0[i][i] = cx(2.0 * lambda[i], 0.0);
        }
        let s = |i: usize, j: usize| (lambda[i] * lambda[j]).sqrt();
        expected.0[0][1] = up * s(0, 1);
        expected.0[1][0] = down * s(0, 1);
        expected.0[1][2] = up * s(1, 2);
        expected.0[2][1] = down * s(1, 2);
        expected.0[2][3] = up * s(2, 3);
        expected.0[3][2] = down * s(2, 3);
        expected.0[0][3] = down * s(0, 3);
        expected.0[3][0] = up * s(0, 3);
        let expected = expected.scale(1.0 / 8.0);
        assert!((*rho0.matrix() - expected).frobenius_norm() < 1e-15);

        // the other mixture flips the sign of every off-diagonal entry
        let mut flipped = expected;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    flipped.0[i][j] = -flipped.0[i][j];
                }
            }
        }
        assert!((*rho1.matrix() - flipped).frobenius_norm() < 1e-15);
    }

    #[test]
    fn appendix_mixture_form_for_random_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let s = random_spectrum(&mut rng);
            let l = s.values();
            let fam = build_states(&spectrum_to_overlaps(&s));
            let (rho0, _) = pair_mixtures(&fam, BitChoice::First);
            let m = rho0.matrix();
            for i in 0..4 {
                assert_abs_diff_eq!(m.0[i][i].re, l[i] / 4.0, epsilon = 1e-14);
            }
            let expect01 = cx(1.0, 1.0) * (l[0] * l[1]).sqrt() / 8.0;
            assert!((m.0[0][1] - expect01).norm() < 1e-14);
            let expect03 = cx(1.0, -1.0) * (l[0] * l[3]).sqrt() / 8.0;
            assert!((m.0[0][3] - expect03).norm() < 1e-14);
            assert!(m.0[0][2].norm() < 1e-14);
        }
    }

    #[test]
    fn pair_mixture_examples() {
        let fam = build_states(&OverlapPair::from_parts(0.0, 0.0, 0.0).unwrap());
        for choice in [BitChoice::First, BitChoice::Second] {
            let (a, b) = pair_mixtures(&fam, choice);
            // rank-2 halves of projectors with orthogonal supports
            assert_eq!(a.rank(1e-10), 2);
            assert_eq!(b.rank(1e-10), 2);
            assert!(a.matrix().trace_product(b.matrix()).norm() < 1e-15);
            assert_abs_diff_eq!(a.matrix().trace().re, 1.0, epsilon = 1e-15);
        }

        let fam = build_states(&OverlapPair::from_parts(1.0, 0.0, 1.0).unwrap());
        for choice in [BitChoice::First, BitChoice::Second] {
            let (a, b) = pair_mixtures(&fam, choice);
            assert!((*a.matrix() - *b.matrix()).frobenius_norm() < 1e-15);
        }
    }

    #[test]
    fn second_bit_pairs_states_by_x1() {
        let fam = build_states(&named_family(
            &NamedFamily::new(FamilyKind::Qutrit, 0.4).unwrap(),
        ));
        let (a, b) = pair_mixtures(&fam, BitChoice::Second);
        let expect_a =
            (Matrix4::projector(fam.state(0)) + Matrix4::projector(fam.state(3))).scale(0.5);
        let expect_b =
            (Matrix4::projector(fam.state(1)) + Matrix4::projector(fam.state(2))).scale(0.5);
        assert!((*a.matrix() - expect_a).frobenius_norm() < 1e-15);
        assert!((*b.matrix() - expect_b).frobenius_norm() < 1e-15);
    }

    #[test]
    fn bit_labels_round_trip() {
        for k in 0..4 {
            let (x0, x1) = bits_of(k);
            assert_eq!(index_of(x0, x1), k);
            assert_eq!(LABELS[k], format!("{x0}{x1}"));
        }
    }

    #[test]
    fn named_family_examples() {
        let q = named_family(&NamedFamily::new(FamilyKind::Qubit, FRAC_1_SQRT_2).unwrap());
        assert!((q.f() - cx(0.5, 0.5)).norm() < 1e-15);
        assert!(q.g().abs() < 1e-15);

        let q = named_family(&NamedFamily::new(FamilyKind::Ququart, 0.0).unwrap());
        assert_eq!((q.f(), q.g()), (cx(0.0, 0.0), 0.0));

        let q = named_family(&NamedFamily::new(FamilyKind::Qutrit, FRAC_1_SQRT_2).unwrap());
        assert!((q.f() - cx(0.5, 0.0)).norm() < 1e-15);
        assert!(q.g().abs() < 1e-15);

        assert_eq!(
            NamedFamily::new(FamilyKind::Qubit, 1.2),
            Err(Error::ParamOutOfRange(1.2))
        );
        assert!(NamedFamily::new(FamilyKind::Qutrit, -0.1).is_err());
    }

    #[test]
    fn named_families_match_explicit_ambient_states() {
        let z = cx(0.0, 0.0);
        let i = Complex64::i();
        for a in [0.0, 0.2, 0.5, FRAC_1_SQRT_2, 0.9, 1.0] {
            let b = (1.0f64 - a * a).sqrt();
            let (ar, br) = (cx(a, 0.0), cx(b, 0.0));
            let h = FRAC_1_SQRT_2;

            let qubit = [
                [ar, br, z, z],
                [ar, i * br, z, z],
                [ar, -br, z, z],
                [ar, -i * br, z, z],
            ];
            let ququart = [
                [cx(h, 0.0), cx(h, 0.0), z, z],
                [ar * h, i * ar * h, br, z],
                [cx(h, 0.0), cx(-h, 0.0), z, z],
                [ar * h, -i * ar * h, z, br],
            ];
            let qutrit = [
                [ar, br, z, z],
                [ar, z, br, z],
                [ar, -br, z, z],
                [ar, z, -br, z],
            ];
            for (kind, states) in [
                (FamilyKind::Qubit, qubit),
                (FamilyKind::Ququart, ququart),
                (FamilyKind::Qutrit, qutrit),
            ] {
                let ov = named_family(&NamedFamily::new(kind, a).unwrap());
                let gram = gram_matrix(&ov);
                for r in 0..4 {
                    for c in 0..4 {
                        let direct = inner(&states[r], &states[c]);
                        assert!(
                            (direct - gram.0[r][c]).norm() < 1e-14,
                            "{kind:?} a={a} ({r},{c}): {direct} vs {}",
                            gram.0[r][c]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn qutrit_span_is_three_dimensional() {
        let ov = named_family(&NamedFamily::new(FamilyKind::Qutrit, FRAC_1_SQRT_2).unwrap());
        let s = gram_spectrum(&ov);
        assert_spectrum(&s, [2.0, 1.0, 0.0, 1.0]);
        assert_eq!(s.rank(), 3);
        assert_eq!(gram_spectrum(&wiesner()).rank(), 2);
        let q = named_family(&NamedFamily::new(FamilyKind::Ququart, 0.5).unwrap());
        assert_eq!(gram_spectrum(&q).rank(), 4);
        let _ = SQRT_2;
    }

    fn random_spectrum(rng: &mut ChaCha8Rng) -> GramSpectrum {
        let mut w: [f64; 4] = std::array::from_fn(|_| -rng.random::<f64>().max(1e-300).ln());
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x *= 4.0 / total);
        let drift = 4.0 - w.iter().sum::<f64>();
        w[0] += drift;
        GramSpectrum::new(w).unwrap()
    }

    #[test]
    fn feasibility_matches_positive_semidefiniteness() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (mut feasible, mut infeasible) = (0, 0);
        for _ in 0..10_000 {
            let (re, im, g) = (
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let ok = OverlapPair::from_parts(re, im, g).is_ok();
            // build the Gram matrix without validation
            let unchecked = OverlapPair { f: cx(re, im), g };
            let min_eig = eig_hermitian(&gram_matrix(&unchecked)).unwrap().min_value();
            assert_eq!(ok, min_eig >= -1e-12, "({re}, {im}, {g}) min eig {min_eig}");
            if ok {
                feasible += 1;
            } else {
                infeasible += 1;
            }
        }
        assert!(feasible > 1000 && infeasible > 1000);
    }

    #[test]
    fn spectrum_equals_gram_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..500 {
            let s = random_spectrum(&mut rng);
            let ov = spectrum_to_overlaps(&s);
            let mut numeric = jacobi(&gram_matrix(&ov)).values;
            let mut closed = gram_spectrum(&ov).values();
            numeric.sort_by(f64::total_cmp);
            closed.sort_by(f64::total_cmp);
            for (a, b) in numeric.iter().zip(closed) {
                assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn span_dimension_equals_realized_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for zeros in 0..4 {
            for _ in 0..50 {
                let mut l = random_spectrum(&mut rng).values();
                for slot in l.iter_mut().take(zeros) {
                    *slot = 0.0;
                }
                let total: f64 = l.iter().sum();
                l.iter_mut().for_each(|x| *x *= 4.0 / total);
                let drift = 4.0 - l.iter().sum::<f64>();
                l[3] += drift;
                let s = GramSpectrum::new(l).unwrap();
                let fam = build_states(&spectrum_to_overlaps(&s));
                let realized = jacobi(&fam.realized_gram()).values;
                let rank = realized.iter().filter(|&&x| x > RANK_THRESHOLD).count();
                assert_eq!(rank, s.rank());
                assert_eq!(rank, 4 - zeros);
            }
        }
    }

    #[test]
    fn qubit_and_qutrit_share_failure_probability() {
        for a in [0.1, 0.3, FRAC_1_SQRT_2, 0.8, 0.95] {
            let q = named_family(&NamedFamily::new(FamilyKind::Qubit, a).unwrap());
            let t = named_family(&NamedFamily::new(FamilyKind::Qutrit, a).unwrap());
            let pq = crate::metrics::failure_probability(&q);
            let pt = crate::metrics::failure_probability(&t);
            assert_abs_diff_eq!(pq, pt, epsilon = 1e-12);
        }
    }

    fn feasible_pair() -> impl Strategy<Value = OverlapPair> {
        (-1.0f64..=1.0, -1.0f64..=1.0, -1.0f64..=1.0).prop_map(|(g, u, v)| {
            let re = u * (1.0 + g) / 2.0;
            let im = v * (1.0 - g) / 2.0;
            OverlapPair::from_parts(re, im, g).unwrap()
        })
    }

    proptest! {
        #[test]
        fn spectrum_round_trip(ov in feasible_pair()) {
            let s = gram_spectrum(&ov);
            let total: f64 = s.values().iter().sum();
            prop_assert!((total - 4.0).abs() < 1e-12);
            let back = spectrum_to_overlaps(&s);
            prop_assert!((back.f() - ov.f()).norm() < 1e-12);
            prop_assert!((back.g() - ov.g()).abs() < 1e-12);
            let again = gram_spectrum(&back);
            for (a, b) in again.values().iter().zip(s.values()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn realized_states_reproduce_gram(ov in feasible_pair()) {
            let fam = build_states(&ov);
            let diff = (fam.realized_gram() - gram_matrix(&ov)).frobenius_norm();
            prop_assert!(diff < 1e-10);
            for v in fam.states() {
                prop_assert!((crate::linalg::norm(v) - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn cyclic_relabeling_preserves_gram(ov in feasible_pair()) {
            let gram = gram_matrix(&ov);
            for i in 0..4 {
                for j in 0..4 {
                    prop_assert_eq!(gram.0[i][j], gram.0[(i + 1) % 4][(j + 1) % 4]);
                }
            }
            // shifting the realized states one step along the orbit gives the same Gram matrix
            let fam = build_states(&ov);
            for i in 0..4 {
                for j in 0..4 {
                    let shifted = inner(fam.state((i + 1) % 4), fam.state((j + 1) % 4));
                    prop_assert!((shifted - gram.0[i][j]).norm() < 1e-12);
                }
            }
        }
    }
}
