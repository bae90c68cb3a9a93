//! Seeded agreement run over random channels: the four entanglement-breaking
//! criteria against each other, and the contraction test against the Choi
//! spectrum.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::canonical::CanonicalForm;
use crate::cp::{choi_psd, cp_via_contraction};
use crate::ebt::{ebt_choi_bound, ebt_ppt, ebt_region_intersection, ebt_sign_change, EbtVerdict};
use crate::sampling::uniform_params;
use crate::{par, Result};

/// Samples whose Choi eigenvalues come this close to zero are skipped.
pub const SEPARATION: f64 = 1e-8;

/// Contraction comparisons are restricted to `|t₃| + |λ₃|` below this.
pub const EDGE_LIMIT: f64 = 0.98;

const MAX_RECORDED: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelftestConfig {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self { samples: 10_000, seed: 42, tol: crate::DEFAULT_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub index: usize,
    pub t: [f64; 3],
    pub lambda: [f64; 3],
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Tally {
    pub compared: usize,
    pub agreed: usize,
    pub mismatches: Vec<Mismatch>,
}

impl Tally {
    pub fn passed(&self) -> bool {
        self.agreed == self.compared
    }

    fn record(&mut self, outcome: Option<std::result::Result<(), Mismatch>>) {
        let Some(outcome) = outcome else { return };
        self.compared += 1;
        match outcome {
            Ok(()) => self.agreed += 1,
            Err(m) if self.mismatches.len() < MAX_RECORDED => self.mismatches.push(m),
            Err(_) => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub samples: usize,
    pub seed: u64,
    pub ebt_criteria: Tally,
    pub ebt_count: usize,
    pub cp_contraction: Tally,
    pub passed: bool,
}

struct SampleOutcome {
    ebt: Option<std::result::Result<bool, Mismatch>>,
    cp: Option<std::result::Result<(), Mismatch>>,
}

fn ebt_verdicts(cf: &CanonicalForm, tol: f64) -> Result<[EbtVerdict; 4]> {
    let ch = cf.transfer();
    Ok([
        ebt_sign_change(cf, tol)?,
        ebt_ppt(&ch, tol)?,
        ebt_choi_bound(&ch, tol)?,
        ebt_region_intersection(cf, tol)?,
    ])
}

fn evaluate(index: usize, t: [f64; 3], lambda: [f64; 3], tol: f64) -> SampleOutcome {
    let cf = CanonicalForm::from_params(t, lambda);
    let mismatch = |detail: String| Mismatch { index, t, lambda, detail };
    let min_eig = choi_psd(&cf.transfer(), 0.0).min_eigenvalue;
    let separated = min_eig.abs() > SEPARATION;

    let cp = (separated && t[2].abs() + lambda[2].abs() < EDGE_LIMIT).then(|| {
        let analytic = cp_via_contraction(&cf, tol).is_cp();
        if analytic == (min_eig > 0.0) {
            Ok(())
        } else {
            Err(mismatch(format!("contraction says cp={analytic}, Choi minimum {min_eig:e}")))
        }
    });

    let flips_separated = || (0..3).all(|k| choi_psd(&cf.flip(k).transfer(), 0.0).min_eigenvalue.abs() > SEPARATION);
    let ebt = (separated && min_eig > 0.0 && flips_separated()).then(|| match ebt_verdicts(&cf, tol) {
        Ok(v) if v.iter().all(|x| *x == v[0]) && v[0] != EbtVerdict::Boundary => Ok(v[0].is_ebt()),
        Ok(v) => Err(mismatch(format!("verdicts [sign_change, ppt, choi_bound, region] = {v:?}"))),
        Err(e) => Err(mismatch(e.to_string())),
    });
    SampleOutcome { ebt, cp }
}

/// Parameters of sample `index`: `(t, λ)` uniform in `[−1, 1]⁶` from its own
/// stream of the seeded generator.
pub fn sample_params(seed: u64, index: usize) -> ([f64; 3], [f64; 3]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    uniform_params(&mut rng)
}

pub fn run_selftest(cfg: &SelftestConfig) -> SelftestReport {
    let outcomes = par::map_range(cfg.samples, |i| {
        let (t, l) = sample_params(cfg.seed, i);
        evaluate(i, t, l, cfg.tol)
    });
    let mut ebt_criteria = Tally::default();
    let mut cp_contraction = Tally::default();
    let mut ebt_count = 0;
    for o in outcomes {
        if let Some(Ok(true)) = o.ebt {
            ebt_count += 1;
        }
        ebt_criteria.record(o.ebt.map(|r| r.map(|_| ())));
        cp_contraction.record(o.cp);
    }
    let passed = ebt_criteria.passed() && cp_contraction.passed();
    SelftestReport { samples: cfg.samples, seed: cfg.seed, ebt_criteria, ebt_count, cp_contraction, passed }
}
