//! Parameter sweeps over Eve's attack, CSV output, and the search for the
//! largest visibility at which Eve's information matches Alice and Bob's.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::attack::{
    ab_error, eve_error, mutual_info_ab, mutual_info_ae, subspace_analysis, AttackParams,
};
use crate::correlations::thresholds;
use crate::error::{QkdError, Result};
use crate::information::LogBase;

pub const F_DOMAIN: (f64, f64) = (0.0, 1.0);
pub const LAM_DOMAIN: (f64, f64) = (-0.5, 1.0);

pub const CSV_COLUMNS: [&str; 11] = [
    "f",
    "lam",
    "v",
    "p0",
    "p1",
    "e_ab",
    "e_eve",
    "i_ab",
    "i_ae",
    "bell_violated",
    "secure",
];

/// All attack-analysis quantities at one `(F, λ)` point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub f: f64,
    pub lam: f64,
    pub v: f64,
    pub p0: f64,
    pub p1: f64,
    pub e_ab: f64,
    pub e_eve: f64,
    pub i_ab: f64,
    pub i_ae: f64,
    pub bell_violated: bool,
    pub secure: bool,
}

impl SweepRow {
    pub fn compute(params: &AttackParams, base: LogBase) -> Self {
        let analysis = subspace_analysis(params);
        let v = params.visibility();
        let i_ab = mutual_info_ab(params, base);
        let i_ae = mutual_info_ae(params, base);
        Self {
            f: params.f(),
            lam: params.lam(),
            v,
            p0: analysis.p[0],
            p1: analysis.p[1],
            e_ab: ab_error(params),
            e_eve: eve_error(params),
            i_ab,
            i_ae,
            bell_violated: v >= thresholds().v0 - 1e-12,
            secure: i_ab > i_ae,
        }
    }

    pub fn to_csv_line(&self) -> String {
        let nums = [
            self.f, self.lam, self.v, self.p0, self.p1, self.e_ab, self.e_eve, self.i_ab, self.i_ae,
        ];
        let mut fields: Vec<String> = nums.iter().map(|x| format_sig9(*x)).collect();
        fields.push(self.bell_violated.to_string());
        fields.push(self.secure.to_string());
        fields.join(",")
    }
}

/// Nine significant digits in scientific notation, e.g. `6.66666667e-1`.
pub fn format_sig9(x: f64) -> String {
    // Avoid printing "-0.00000000e0".
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.8e}")
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(QkdError::InvalidInput(format!(
                "invalid range [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// Evenly spaced points including both ends; a single step yields `lo`.
    pub fn points(&self, steps: usize) -> Vec<f64> {
        if steps <= 1 {
            return vec![self.lo];
        }
        let width = self.hi - self.lo;
        (0..steps)
            .map(|i| {
                if i == steps - 1 {
                    self.hi
                } else {
                    self.lo + width * i as f64 / (steps - 1) as f64
                }
            })
            .collect()
    }

    /// Intersection with `domain`; errors when they do not overlap.
    fn clip(&self, domain: (f64, f64), name: &str) -> Result<(Range, Option<String>)> {
        let lo = self.lo.max(domain.0);
        let hi = self.hi.min(domain.1);
        if lo > hi {
            return Err(QkdError::InvalidInput(format!(
                "{name} range [{}, {}] lies outside the feasible domain [{}, {}]",
                self.lo, self.hi, domain.0, domain.1
            )));
        }
        let clipped = Range { lo, hi };
        let note = (clipped != *self).then(|| {
            format!(
                "{name} range [{}, {}] clipped to [{lo}, {hi}]",
                self.lo, self.hi
            )
        });
        Ok((clipped, note))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub f_range: Range,
    pub lam_range: Range,
    pub steps: usize,
    pub base: LogBase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub spec: SweepSpec,
    /// Notes about ranges clipped to the feasible domain.
    pub clip_notes: Vec<String>,
    pub rows: Vec<SweepRow>,
}

/// Evaluates `steps × steps` grid points, `F` outer and `λ` inner, both
/// ascending. Ranges are clipped to the feasible domain.
pub fn sweep(spec: SweepSpec) -> Result<Sweep> {
    if spec.steps == 0 {
        return Err(QkdError::InvalidInput("steps must be at least 1".into()));
    }
    let (f_range, f_note) = spec.f_range.clip(F_DOMAIN, "f")?;
    let (lam_range, lam_note) = spec.lam_range.clip(LAM_DOMAIN, "lam")?;
    let fs = f_range.points(spec.steps);
    let lams = lam_range.points(spec.steps);

    let grid: Vec<(f64, f64)> = fs
        .iter()
        .flat_map(|&f| lams.iter().map(move |&l| (f, l)))
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(f, l)| AttackParams::new(f, l).map(|p| SweepRow::compute(&p, spec.base)))
        .collect::<Result<Vec<_>>>()?;

    Ok(Sweep {
        spec: SweepSpec {
            f_range,
            lam_range,
            ..spec
        },
        clip_notes: f_note.into_iter().chain(lam_note).collect(),
        rows,
    })
}

impl Sweep {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# qutrit-qkd attack sweep")?;
        writeln!(out, "# log_base={}", self.spec.base.value())?;
        writeln!(
            out,
            "# f_range=[{}, {}] lam_range=[{}, {}] steps={}",
            self.spec.f_range.lo,
            self.spec.f_range.hi,
            self.spec.lam_range.lo,
            self.spec.lam_range.hi,
            self.spec.steps
        )?;
        writeln!(out, "# v0={}", format_sig9(thresholds().v0))?;
        for note in &self.clip_notes {
            writeln!(out, "# clipped: {note}")?;
        }
        writeln!(out, "{}", CSV_COLUMNS.join(","))?;
        for row in &self.rows {
            writeln!(out, "{}", row.to_csv_line())?;
        }
        Ok(())
    }
}

/// Largest `V = Fλ` at which `I_AE = I_AB`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossoverResult {
    pub v_max: f64,
    pub argmax_f: f64,
    pub argmax_lam: f64,
    pub tolerance: f64,
    /// `I_AE − I_AB` at the argmax, in the requested base.
    pub info_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverOptions {
    /// Final bracket width for the outer search over `F`.
    pub tolerance: f64,
    pub base: LogBase,
    pub coarse_f_steps: usize,
    pub coarse_lam_steps: usize,
    /// Shift of the coarse `F` grid, as a fraction of one grid step.
    pub grid_offset: f64,
}

impl Default for CrossoverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            base: LogBase::TRIT,
            coarse_f_steps: 200,
            coarse_lam_steps: 150,
            grid_offset: 0.0,
        }
    }
}

fn info_gap(f: f64, lam: f64, base: LogBase) -> f64 {
    let params = AttackParams::new(f, lam).expect("search stays in the feasible domain");
    mutual_info_ae(&params, base) - mutual_info_ab(&params, base)
}

/// Largest `λ` with `I_AE(F, λ) ≥ I_AB(F, λ)`, found by a downward scan
/// followed by bisection on the sign change.
fn boundary_lambda(f: f64, opts: &CrossoverOptions) -> Option<f64> {
    let (lo, hi) = LAM_DOMAIN;
    let n = opts.coarse_lam_steps.max(2);
    let at = |i: usize| hi - (hi - lo) * i as f64 / n as f64;
    if info_gap(f, hi, opts.base) >= 0.0 {
        return Some(hi);
    }
    let first_feasible = (1..=n).find(|&i| info_gap(f, at(i), opts.base) >= 0.0)?;
    let (mut good, mut bad) = (at(first_feasible), at(first_feasible - 1));
    // Run to machine precision: the gap at the result must be negligible.
    for _ in 0..200 {
        let mid = 0.5 * (good + bad);
        if mid == good || mid == bad {
            break;
        }
        if info_gap(f, mid, opts.base) >= 0.0 {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Some(good)
}

fn boundary_visibility(f: f64, opts: &CrossoverOptions) -> f64 {
    boundary_lambda(f, opts).map_or(f64::NEG_INFINITY, |l| f * l)
}

/// Maximizes `F·λ` subject to `I_AE ≥ I_AB` over the feasible rectangle:
/// a coarse scan over `F`, then golden-section refinement around the best
/// coarse point.
pub fn crossover(opts: &CrossoverOptions) -> Result<CrossoverResult> {
    if opts.tolerance.is_nan() || opts.tolerance <= 0.0 {
        return Err(QkdError::InvalidInput(format!(
            "tolerance must be positive, got {}",
            opts.tolerance
        )));
    }
    if opts.coarse_f_steps < 2 {
        return Err(QkdError::InvalidInput(
            "coarse_f_steps must be at least 2".into(),
        ));
    }
    let (f_lo, f_hi) = F_DOMAIN;
    let n = opts.coarse_f_steps;
    let offset = opts.grid_offset.rem_euclid(1.0);
    let coarse: Vec<f64> = (0..=n)
        .map(|i| (f_lo + (f_hi - f_lo) * (i as f64 + offset) / n as f64).min(f_hi))
        .collect();
    let values: Vec<f64> = coarse
        .par_iter()
        .map(|&f| boundary_visibility(f, opts))
        .collect();
    let best = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("coarse grid is non-empty");

    let step = (f_hi - f_lo) / n as f64;
    let mut a = (coarse[best] - step).max(f_lo);
    let mut b = (coarse[best] + step).min(f_hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut vc, mut vd) = (boundary_visibility(c, opts), boundary_visibility(d, opts));
    while b - a > opts.tolerance {
        if vc >= vd {
            b = d;
            d = c;
            vd = vc;
            c = b - inv_phi * (b - a);
            vc = boundary_visibility(c, opts);
        } else {
            a = c;
            c = d;
            vc = vd;
            d = a + inv_phi * (b - a);
            vd = boundary_visibility(d, opts);
        }
    }

    // Keep the best point seen, including the coarse one.
    let mut candidates = [(coarse[best], values[best]), (c, vc), (d, vd)];
    candidates.sort_by(|x, y| y.1.total_cmp(&x.1));
    let argmax_f = candidates[0].0;
    let argmax_lam = boundary_lambda(argmax_f, opts)
        .ok_or_else(|| QkdError::InvalidInput("no point satisfies I_AE >= I_AB".into()))?;
    Ok(CrossoverResult {
        v_max: argmax_f * argmax_lam,
        argmax_f,
        argmax_lam,
        tolerance: opts.tolerance,
        info_gap: info_gap(argmax_f, argmax_lam, opts.base),
    })
}
