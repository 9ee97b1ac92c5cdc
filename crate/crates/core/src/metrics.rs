//! Closed-form protocol quantities.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::discrimination::{helstrom_binary, srm_success_symmetric};
use crate::error::{Error, Result};
use crate::linalg::inner;
use crate::states::{
    build_states, gram_spectrum, named_family, pair_mixtures, BitChoice, FamilyKind, GramSpectrum,
    NamedFamily, OverlapPair, StateFamily,
};

/// The sender's cheating probability. No message travels from Bob to Alice,
/// so by no-signalling her state cannot depend on `c` and she can only guess.
pub const SENDER_CHEAT: f64 = 0.5;

/// `p_f` at the Wiesner point, where the two frontier branches meet: `(2 − √2)/4`.
pub const PF_BRANCH: f64 = (2.0 - SQRT_2) / 4.0;

/// `(1 + √2)/4`, the intercept of the low-`p_r` frontier line.
pub const QUBIT_LINE_INTERCEPT: f64 = (1.0 + SQRT_2) / 4.0;

/// Honest failure probability from a Gram spectrum.
///
/// With `S = (λ0+λ2)(λ1+λ3)` and `P = λ0λ1λ2λ3`,
/// `p_f = ½[1 − ¼√(S + √(S² − 16P)) − ¼√(S − √(S² − 16P))]`.
pub fn pf_from_spectrum(s: &GramSpectrum) -> f64 {
    let [l0, l1, l2, l3] = s.values();
    let sum = (l0 + l2) * (l1 + l3);
    let prod = l0 * l1 * l2 * l3;
    let disc = (sum * sum - 16.0 * prod).max(0.0).sqrt();
    let big = (sum + disc).sqrt();
    // √(S − √d) = 4√P / √(S + √d) avoids cancellation
    let small = if big > 0.0 {
        4.0 * prod.max(0.0).sqrt() / big
    } else {
        0.0
    };
    (0.5 * (1.0 - 0.25 * big - 0.25 * small)).clamp(0.0, 0.5)
}

/// Honest failure probability `p_f` for a feasible family.
pub fn failure_probability(ov: &OverlapPair) -> f64 {
    pf_from_spectrum(&gram_spectrum(ov))
}

/// `(p_f0, p_f1)` from explicit Helstrom measurements on each bit's mixtures.
pub fn failure_by_measurement(ov: &OverlapPair) -> (f64, f64) {
    let fam = build_states(ov);
    let per_bit = |choice| {
        let (rho0, rho1) = pair_mixtures(&fam, choice);
        helstrom_binary(&rho0, 0.5, &rho1, 0.5)
            .expect("bit mixtures are valid density operators")
            .p_err
    };
    (per_bit(BitChoice::First), per_bit(BitChoice::Second))
}

/// Receiver's optimal cheating probability: square-root measurement success.
pub fn receiver_cheat(ov: &OverlapPair) -> f64 {
    srm_success_symmetric(&gram_spectrum(ov))
}

fn check_range(name: &'static str, value: f64, min: f64, max: f64) -> Result<()> {
    if value.is_nan() || value < min || value > max {
        return Err(Error::OutOfRange {
            name,
            value,
            min,
            max,
        });
    }
    Ok(())
}

/// Lowest receiver cheating probability in classical non-interactive
/// protocols with failure probability `p_f`: `max(1 − 2p_f, ½(1 − p_f))`.
pub fn classical_min_cheat(p_f: f64) -> Result<f64> {
    check_range("p_f", p_f, 0.0, 0.5)?;
    Ok((1.0 - 2.0 * p_f).max(0.5 * (1.0 - p_f)))
}

/// Lowest `p_r` reachable by symmetric pure states at failure probability `p_f`.
pub fn frontier_pr_of_pf(p_f: f64) -> Result<f64> {
    check_range("p_f", p_f, 0.0, 0.5)?;
    let p_r = if p_f >= PF_BRANCH {
        QUBIT_LINE_INTERCEPT - p_f * FRAC_1_SQRT_2
    } else {
        let q = 1.0 - 2.0 * p_f;
        0.5 * (1.0 + (2.0 * q * q - 1.0).max(0.0).sqrt())
    };
    Ok(p_r.clamp(0.25, 1.0))
}

/// Lowest `p_f` reachable by symmetric pure states at cheating probability `p_r`.
pub fn frontier_pf_of_pr(p_r: f64) -> Result<f64> {
    check_range("p_r", p_r, 0.25, 1.0)?;
    if p_r >= 0.5 {
        Ok(0.5 * (1.0 - (p_r * p_r + (1.0 - p_r) * (1.0 - p_r)).sqrt()))
    } else {
        Ok((SQRT_2 * (QUBIT_LINE_INTERCEPT - p_r)).clamp(0.0, 0.5))
    }
}

/// A Gram spectrum on the frontier at cheating probability `p_r`.
///
/// For `p_r ≥ ½` it has four nonzero eigenvalues, below ½ only two.
pub fn optimal_spectrum(p_r: f64) -> Result<GramSpectrum> {
    check_range("p_r", p_r, 0.25, 1.0)?;
    let values = if p_r >= 0.5 {
        let (u, v) = (p_r.sqrt(), (1.0 - p_r).sqrt());
        let (s, t) = (u + v, u - v);
        [s * s, s * s, t * t, t * t]
    } else {
        let (u, v) = (p_r.sqrt(), (0.5 - p_r).max(0.0).sqrt());
        [4.0 * (u + v) * (u + v), 4.0 * (u - v) * (u - v), 0.0, 0.0]
    };
    let total: f64 = values.iter().sum();
    GramSpectrum::new(values.map(|l| l * 4.0 / total))
}

/// `p_f` where the low-`p_r` frontier line crosses the classical bound
/// `1 − 2p_f`, found by bisection to within `1e-12`.
pub fn crossover_pf() -> f64 {
    let gap = |p: f64| (1.0 - 2.0 * p) - (QUBIT_LINE_INTERCEPT - p * FRAC_1_SQRT_2);
    let (mut lo, mut hi) = (PF_BRANCH, 0.5);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `p_r` of the qubit family with failure probability `p_f`, defined for
/// `p_f ∈ [(2 − √2)/4, ½]`.
pub fn qubit_pr_of_pf(p_f: f64) -> Option<f64> {
    let ab = qubit_ab(p_f)?;
    Some(0.25 * (1.0 + 2.0 * ab))
}

/// `p_r` of the ququart family with failure probability `p_f`, defined for
/// `p_f ∈ [0, (2 − √2)/4]`. Uses `(1 − 2p_f)² = 1 − a²/2`.
pub fn ququart_pr_of_pf(p_f: f64) -> Option<f64> {
    if !(0.0..=PF_BRANCH).contains(&p_f) {
        return None;
    }
    let q = 1.0 - 2.0 * p_f;
    let a2 = (2.0 * (1.0 - q * q)).clamp(0.0, 1.0);
    Some(0.5 * (1.0 + (1.0 - a2).sqrt()))
}

/// `p_r` of the qutrit family with failure probability `p_f`, on the branch
/// `a ≥ b` that ends at identical states; defined for `p_f ∈ [(2 − √2)/4, ½]`.
pub fn qutrit_pr_of_pf(p_f: f64) -> Option<f64> {
    let ab = qubit_ab(p_f)?;
    let b2 = 0.5 * (1.0 - (1.0 - 4.0 * ab * ab).max(0.0).sqrt());
    Some(0.25 * (1.0 + b2 + 2.0 * SQRT_2 * ab))
}

/// `ab` from `p_f = ½(1 − √2 ab)`.
fn qubit_ab(p_f: f64) -> Option<f64> {
    // allow the branch point itself despite rounding in PF_BRANCH
    if !(PF_BRANCH - 1e-15..=0.5).contains(&p_f) {
        return None;
    }
    Some(((1.0 - 2.0 * p_f) * FRAC_1_SQRT_2).clamp(0.0, 0.5))
}

/// Failure and cheating probabilities for one family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolMetrics {
    pub p_f: f64,
    pub p_f0: f64,
    pub p_f1: f64,
    pub p_r: f64,
    pub p_s: f64,
    pub span_dim: usize,
}

/// Metrics for raw overlaps: `p_f` and `p_r` from the spectrum, `p_f0` and
/// `p_f1` from the per-bit Helstrom measurements.
pub fn metrics_for_overlaps(ov: &OverlapPair) -> ProtocolMetrics {
    let s = gram_spectrum(ov);
    let (p_f0, p_f1) = failure_by_measurement(ov);
    ProtocolMetrics {
        p_f: pf_from_spectrum(&s),
        p_f0,
        p_f1,
        p_r: srm_success_symmetric(&s),
        p_s: SENDER_CHEAT,
        span_dim: s.rank(),
    }
}

/// `(p_f, p_r)` of a named family from its own closed forms.
pub fn family_closed_form(nf: &NamedFamily) -> (f64, f64) {
    let a = nf.param();
    let b = nf.b();
    let ab = a * b;
    match nf.kind() {
        FamilyKind::Wiesner => (PF_BRANCH, 0.5),
        FamilyKind::Qubit => (0.5 * (1.0 - SQRT_2 * ab), 0.25 * (1.0 + 2.0 * ab)),
        FamilyKind::Ququart => {
            let r = a * (2.0 - a * a).max(0.0).sqrt();
            let p_f = 0.25 * (2.0 - (1.0 + r).sqrt() - (1.0 - r).max(0.0).sqrt());
            (p_f, 0.5 * (1.0 + b))
        }
        FamilyKind::Qutrit => (
            0.5 * (1.0 - SQRT_2 * ab),
            0.25 * (1.0 + b * b + 2.0 * SQRT_2 * ab),
        ),
    }
}

/// Metrics of a named family, with `p_f` and `p_r` from the family formulas.
pub fn family_metrics(nf: &NamedFamily) -> ProtocolMetrics {
    let ov = named_family(nf);
    let (p_f, p_r) = family_closed_form(nf);
    let (p_f0, p_f1) = failure_by_measurement(&ov);
    ProtocolMetrics {
        p_f,
        p_f0,
        p_f1,
        p_r,
        p_s: SENDER_CHEAT,
        span_dim: gram_spectrum(&ov).rank(),
    }
}

/// Fidelity-based bounds and tradeoff relations for one family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// Largest nearest-neighbour fidelity.
    pub fidelity_f: f64,
    /// Larger of the two opposite-pair fidelities.
    pub fidelity_g: f64,
    pub p_f: f64,
    pub p_r: f64,
    pub classical_min_pr: f64,
    /// `1 − F − G/2`.
    pub pbfg_lower: f64,
    /// `1 − F − √(p_f(1 − p_f))`.
    pub pure_lower: f64,
    /// `½(1 − √(1 − G²))`, a lower bound on `p_f`.
    pub pf_lower: f64,
    /// `2p_s + p_r`.
    pub tradeoff_lhs: f64,
    /// `2 − F − G/2`.
    pub tradeoff_rhs: f64,
}

impl BoundReport {
    /// Largest violation among the bounds (non-positive when all hold).
    pub fn worst_violation(&self) -> f64 {
        [
            self.pbfg_lower - self.p_r,
            self.pure_lower - self.p_r,
            self.pf_lower - self.p_f,
            self.tradeoff_rhs - self.tradeoff_lhs,
            self.p_r - (1.0 - self.p_f),
        ]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Evaluates the bounds for `fam` at failure probability `p_f`.
pub fn general_bounds(fam: &StateFamily, p_f: f64) -> Result<BoundReport> {
    let classical_min_pr = classical_min_cheat(p_f)?;
    let fid = |i: usize, j: usize| inner(fam.state(i), fam.state(j)).norm().min(1.0);
    // family order is ψ00, ψ01, ψ11, ψ10
    let fidelity_f = [fid(0, 1), fid(0, 3), fid(2, 1), fid(2, 3)]
        .into_iter()
        .fold(0.0, f64::max);
    let fidelity_g = fid(0, 2).max(fid(1, 3));
    let p_r = srm_success_symmetric(fam.spectrum());
    Ok(BoundReport {
        fidelity_f,
        fidelity_g,
        p_f,
        p_r,
        classical_min_pr,
        pbfg_lower: 1.0 - fidelity_f - 0.5 * fidelity_g,
        pure_lower: 1.0 - fidelity_f - (p_f * (1.0 - p_f)).sqrt(),
        pf_lower: 0.5 * (1.0 - (1.0 - fidelity_g * fidelity_g).max(0.0).sqrt()),
        tradeoff_lhs: 2.0 * SENDER_CHEAT + p_r,
        tradeoff_rhs: 2.0 - fidelity_f - 0.5 * fidelity_g,
    })
}
