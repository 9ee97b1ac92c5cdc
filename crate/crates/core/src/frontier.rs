//! Brute-force check of the optimal `(p_f, p_r)` frontier.
//!
//! Both metrics depend only on the Gram spectrum, so the search runs over the
//! lattice `λ = 4(i, j, k, l)/n` with `i + j + k + l = n`. Every permutation of
//! a spectrum is on the lattice, so no pairing of eigenvalues is missed.

use rayon::prelude::*;

use crate::discrimination::srm_success_symmetric;
use crate::error::{Error, Result};
use crate::metrics::{frontier_pf_of_pr, optimal_spectrum, pf_from_spectrum};
use crate::states::{GramSpectrum, RANK_THRESHOLD};

pub const DEFAULT_GRID_STEP: f64 = 0.01;
pub const DEFAULT_BIN_WIDTH: f64 = 0.005;
pub const MAX_GRID_STEP: f64 = 0.1;

/// Lattice resolution and `p_r` binning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    grid_step: f64,
    pr_bin_width: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            grid_step: DEFAULT_GRID_STEP,
            pr_bin_width: DEFAULT_BIN_WIDTH,
        }
    }
}

impl SearchConfig {
    pub fn new(grid_step: f64, pr_bin_width: f64) -> Result<Self> {
        if !(grid_step.is_finite() && grid_step > 0.0 && grid_step <= MAX_GRID_STEP) {
            return Err(Error::InvalidConfig(format!(
                "grid step {grid_step} must be in (0, {MAX_GRID_STEP}]"
            )));
        }
        if !(pr_bin_width.is_finite() && pr_bin_width > 0.0 && pr_bin_width <= 0.75) {
            return Err(Error::InvalidConfig(format!(
                "bin width {pr_bin_width} must be in (0, 0.75]"
            )));
        }
        Ok(SearchConfig {
            grid_step,
            pr_bin_width,
        })
    }

    pub fn grid_step(&self) -> f64 {
        self.grid_step
    }

    pub fn pr_bin_width(&self) -> f64 {
        self.pr_bin_width
    }

    /// Number of subdivisions `n = round(1 / grid_step)` of each simplex edge.
    pub fn subdivisions(&self) -> u32 {
        (1.0 / self.grid_step).round() as u32
    }

    pub fn bin_count(&self) -> usize {
        (0.75 / self.pr_bin_width + 1e-9).floor() as usize + 1
    }

    /// Bin whose center `¼ + k·W` is nearest to `p_r`.
    pub fn bin_index(&self, p_r: f64) -> usize {
        let k = ((p_r - 0.25) / self.pr_bin_width).round().max(0.0) as usize;
        k.min(self.bin_count() - 1)
    }

    pub fn bin_center(&self, index: usize) -> f64 {
        0.25 + index as f64 * self.pr_bin_width
    }
}

/// Integer lattice coordinates `(i, j, k, l)` with `i + j + k + l = n`, in
/// lexicographic order.
pub fn simplex_lattice(n: u32) -> Vec<[u32; 4]> {
    let mut out = Vec::with_capacity(lattice_size(n));
    for i in 0..=n {
        push_shard(n, i, &mut out);
    }
    out
}

/// `C(n + 3, 3)`.
pub fn lattice_size(n: u32) -> usize {
    let n = n as usize;
    (n + 1) * (n + 2) * (n + 3) / 6
}

fn push_shard(n: u32, i: u32, out: &mut Vec<[u32; 4]>) {
    for j in 0..=(n - i) {
        for k in 0..=(n - i - j) {
            out.push([i, j, k, n - i - j - k]);
        }
    }
}

fn lattice_spectrum(c: [u32; 4], n: u32) -> GramSpectrum {
    let scale = 4.0 / n as f64;
    let mut l = c.map(|x| x as f64 * scale);
    // exact integer sum; only rounding drift to absorb
    let drift = 4.0 - l.iter().sum::<f64>();
    let top = (0..4).max_by_key(|&a| c[a]).unwrap_or(0);
    l[top] += drift;
    GramSpectrum::new(l).expect("lattice points are valid spectra")
}

/// All lattice spectra for the configuration, in lexicographic order.
pub fn enumerate_spectra(cfg: &SearchConfig) -> impl Iterator<Item = GramSpectrum> {
    let n = cfg.subdivisions();
    simplex_lattice(n)
        .into_iter()
        .map(move |c| lattice_spectrum(c, n))
}

/// Best lattice point found in one `p_r` bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierPoint {
    pub pr_bin_center: f64,
    /// `p_r` of the achieving spectrum.
    pub pr_found: f64,
    pub min_pf_found: f64,
    pub achieving_spectrum: GramSpectrum,
    /// Frontier `p_f` at `pr_found`.
    pub analytic_pf: f64,
    /// `min_pf_found − analytic_pf`.
    pub gap: f64,
    /// Number of eigenvalues of the achieving spectrum above threshold.
    pub rank: usize,
}

impl FrontierPoint {
    pub fn new(
        pr_bin_center: f64,
        pr_found: f64,
        min_pf_found: f64,
        spectrum: GramSpectrum,
    ) -> Self {
        let analytic_pf = frontier_pf_of_pr(pr_found.clamp(0.25, 1.0)).expect("clamped into range");
        FrontierPoint {
            pr_bin_center,
            pr_found,
            min_pf_found,
            achieving_spectrum: spectrum,
            analytic_pf,
            gap: min_pf_found - analytic_pf,
            rank: spectrum.rank(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    p_f: f64,
    p_r: f64,
    coords: [u32; 4],
}

impl Candidate {
    /// Lower `p_f` wins; ties go to the lexicographically smaller lattice point.
    fn better_than(&self, other: &Candidate) -> bool {
        match self.p_f.total_cmp(&other.p_f) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => self.coords < other.coords,
        }
    }
}

fn merge(mut a: Vec<Option<Candidate>>, b: Vec<Option<Candidate>>) -> Vec<Option<Candidate>> {
    for (slot, other) in a.iter_mut().zip(b) {
        if let Some(o) = other {
            match slot {
                Some(cur) if !o.better_than(cur) => {}
                _ => *slot = Some(o),
            }
        }
    }
    a
}

/// Minimal `p_f` in every nonempty `p_r` bin, in bin order.
///
/// The lattice is sharded by its leading coordinate; shards run in parallel
/// and their per-bin minima are merged. The result does not depend on the
/// number of threads.
pub fn brute_force_frontier(cfg: &SearchConfig) -> Vec<FrontierPoint> {
    let n = cfg.subdivisions();
    let bins = cfg.bin_count();
    let best = (0..=n)
        .into_par_iter()
        .map(|i| {
            let mut shard = Vec::new();
            push_shard(n, i, &mut shard);
            let mut local: Vec<Option<Candidate>> = vec![None; bins];
            for coords in shard {
                let s = lattice_spectrum(coords, n);
                let cand = Candidate {
                    p_f: pf_from_spectrum(&s),
                    p_r: srm_success_symmetric(&s),
                    coords,
                };
                let slot = &mut local[cfg.bin_index(cand.p_r)];
                match slot {
                    Some(cur) if !cand.better_than(cur) => {}
                    _ => *slot = Some(cand),
                }
            }
            local
        })
        .reduce(|| vec![None; bins], merge);

    best.into_iter()
        .enumerate()
        .filter_map(|(k, c)| {
            c.map(|c| {
                FrontierPoint::new(
                    cfg.bin_center(k),
                    c.p_r,
                    c.p_f,
                    lattice_spectrum(c.coords, n),
                )
            })
        })
        .collect()
}

/// Smallest `p_f − frontier_pf(p_r)` over every lattice point.
pub fn min_frontier_margin(cfg: &SearchConfig) -> f64 {
    let n = cfg.subdivisions();
    (0..=n)
        .into_par_iter()
        .map(|i| {
            let mut shard = Vec::new();
            push_shard(n, i, &mut shard);
            shard
                .into_iter()
                .map(|c| {
                    let s = lattice_spectrum(c, n);
                    let p_r = srm_success_symmetric(&s).clamp(0.25, 1.0);
                    pf_from_spectrum(&s) - frontier_pf_of_pr(p_r).expect("clamped into range")
                })
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// Outcome of [`verify_frontier`].
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierReport {
    pub pass: bool,
    pub tol: f64,
    pub n_points: usize,
    /// Most negative gap (brute force below the analytic frontier).
    pub worst_gap: f64,
    /// Largest positive gap. Reported only: bins whose `p_r` range contains
    /// no lattice point close to the optimum stay well above the frontier at
    /// any grid step.
    pub max_gap: f64,
    /// Bins on the `p_r < ½` branch whose rank was checked.
    pub rank_checked_low: usize,
    /// Bins on the `p_r > ½` branch whose rank was checked.
    pub rank_checked_high: usize,
    pub rank_mismatches: usize,
}

/// Checks brute-force points against the analytic frontier.
///
/// Passes iff no gap is below `−tol` and every resolved bin has the rank of
/// the analytic optimum at its `p_r`. A bin is resolved when its gap is at
/// most `tol` and every nonzero eigenvalue of the analytic optimum is at least
/// one lattice quantum `4·grid_step`, so that the lattice can represent it.
pub fn verify_frontier(
    points: &[FrontierPoint],
    tol: f64,
    grid_step: f64,
) -> Result<FrontierReport> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let quantum = 4.0 * grid_step;
    let mut report = FrontierReport {
        pass: true,
        tol,
        n_points: points.len(),
        worst_gap: f64::INFINITY,
        max_gap: f64::NEG_INFINITY,
        rank_checked_low: 0,
        rank_checked_high: 0,
        rank_mismatches: 0,
    };
    for p in points {
        report.worst_gap = report.worst_gap.min(p.gap);
        report.max_gap = report.max_gap.max(p.gap);
        if p.gap < -tol || p.gap.is_nan() {
            report.pass = false;
        }
        if p.gap > tol {
            continue;
        }
        let optimum = optimal_spectrum(p.pr_found.clamp(0.25, 1.0))?.values();
        let nonzero: Vec<f64> = optimum
            .into_iter()
            .filter(|&l| l > RANK_THRESHOLD)
            .collect();
        if nonzero.iter().any(|&l| l < quantum) {
            continue;
        }
        if p.pr_found < 0.5 {
            report.rank_checked_low += 1;
        } else if p.pr_found > 0.5 {
            report.rank_checked_high += 1;
        }
        if nonzero.len() != p.rank {
            report.rank_mismatches += 1;
            report.pass = false;
        }
    }
    Ok(report)
}
