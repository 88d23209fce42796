//! Randomized property checks of the eccentricity recursions.
//!
//! Each run is fully determined by its seed, so a failure can be replayed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ecc::{
    batch_eccentricity_oracle, batch_eccentricity_with, euclidean, EccError, EccParams, StreamState,
};

/// Tolerance for comparisons against the batch oracle.
pub const ORACLE_TOL: f64 = 1e-9;
/// Tolerance for the explicit exponential-weight average.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Deliberate defects used to confirm the checks can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Oracle uses the plain instead of the squared Euclidean distance.
    PlainEuclidean,
}

#[derive(Debug, Clone)]
pub struct SelftestConfig {
    pub seed: u64,
    pub sequences: usize,
    pub fault: Option<Fault>,
}

impl SelftestConfig {
    pub fn new(seed: u64) -> Self {
        Self { seed, sequences: 1000, fault: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub checks: u64,
    /// First violation, if any.
    pub failure: Option<String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub seed: u64,
    pub results: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(CheckResult::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| !r.passed())
    }

    pub fn render(&self) -> String {
        let mut out = format!("seed={}\n", self.seed);
        for r in &self.results {
            match &r.failure {
                None => out.push_str(&format!("PASS {} ({} checks)\n", r.name, r.checks)),
                Some(why) => out.push_str(&format!("FAIL {}: {} (seed {})\n", r.name, why, self.seed)),
            }
        }
        out
    }
}

struct Check {
    result: CheckResult,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Self { result: CheckResult { name, checks: 0, failure: None } }
    }

    fn expect(&mut self, ok: bool, why: impl FnOnce() -> String) {
        self.result.checks += 1;
        if !ok && self.result.failure.is_none() {
            self.result.failure = Some(why());
        }
    }
}

/// Random sequence: length 2..=50, dimension 1..=3, values in [0, 255].
pub fn random_sequence(rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let len = rng.gen_range(2..=50);
    let dim = rng.gen_range(1..=3);
    (0..len).map(|_| (0..dim).map(|_| rng.gen_range(0.0..=255.0)).collect()).collect()
}

pub fn run_selftest(config: &SelftestConfig) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let oracle = |s: &[Vec<f64>], i: usize| -> Result<f64, EccError> {
        match config.fault {
            None => batch_eccentricity_oracle(s, i),
            Some(Fault::PlainEuclidean) => batch_eccentricity_with(s, i, euclidean),
        }
    };

    let mut equivalence = Check::new("ORACLE EQUIVALENCE");
    let mut sum_rule = Check::new("SUM RULE");
    let mut bounds = Check::new("BOUNDS");
    let mut exclusivity = Check::new("EXCLUSIVITY");
    let mut fixed_point = Check::new("FIXED POINT");
    let mut weights = Check::new("WEIGHT SUM");
    let mut scale = Check::new("SCALE COVARIANCE");

    for n in 0..config.sequences {
        let seq = random_sequence(&mut rng);
        let dim = seq[0].len();

        let mut state = StreamState::new(dim);
        for k in 1..=seq.len() {
            let rec = state.update_infinite(&seq[k - 1]).expect("dimensions match");
            if k < 2 {
                continue;
            }
            match (rec, oracle(&seq[..k], k - 1)) {
                (Some(r), Ok(o)) => equivalence.expect((r - o).abs() <= ORACLE_TOL, || {
                    format!("sequence {n} step {k}: recursive {r} vs batch {o}")
                }),
                (None, Err(EccError::Degenerate)) => equivalence.expect(true, String::new),
                (r, o) => equivalence.expect(false, || format!("sequence {n} step {k}: {r:?} vs {o:?}")),
            }
        }

        let all: Vec<f64> = (0..seq.len()).filter_map(|i| oracle(&seq, i).ok()).collect();
        if all.len() == seq.len() {
            let total: f64 = all.iter().sum();
            sum_rule.expect((total - 2.0).abs() <= ORACLE_TOL, || format!("sequence {n}: sum {total}"));
            for v in &all {
                bounds.expect((0.0..=1.0).contains(v), || format!("sequence {n}: batch value {v}"));
            }
        }

        let params = random_params(&mut rng, 10.0);
        let mut state = StreamState::new(dim);
        for x in &seq {
            let v = state.step_finite(x, &params).expect("dimensions match");
            let finite = [v.xi, v.eps, v.eps_pos, v.eps_neg, v.eps_signed].iter().all(|f| f.is_finite());
            bounds.expect(
                finite && (0.0..=1.0).contains(&v.eps) && (0.0..=1.0).contains(&v.eps_signed) && v.xi <= 1.0 + 1e-12,
                || format!("sequence {n}: {v:?}"),
            );
            exclusivity.expect(v.eps_pos * v.eps_neg == 0.0, || format!("sequence {n}: {v:?}"));
        }

        let constant = &seq[0];
        let mut state = StreamState::new(dim);
        for k in 1..=seq.len() {
            let v = state.step_finite(constant, &params).expect("dimensions match");
            fixed_point.expect(v.eps == 0.0, || format!("sequence {n} step {k}: eps {}", v.eps));
        }

        check_weights(&mut weights, &mut rng, n);
        check_scale(&mut scale, &seq, &mut rng, n);
    }

    SelftestReport {
        seed: config.seed,
        results: [equivalence, sum_rule, bounds, exclusivity, fixed_point, weights, scale]
            .into_iter()
            .map(|c| c.result)
            .collect(),
    }
}

fn random_params(rng: &mut impl Rng, gamma: f64) -> EccParams {
    EccParams::new(rng.gen_range(0.01..0.5), gamma, rng.gen_range(1.0..5.0)).expect("valid ranges")
}

/// Constant run with one impulse: the recursive mean must equal the explicit
/// exponentially weighted average.
fn check_weights(check: &mut Check, rng: &mut impl Rng, n: usize) {
    let alpha = rng.gen_range(0.01..0.5);
    let params = EccParams::new(alpha, 0.0, 3.0).expect("valid");
    let len = rng.gen_range(2..100);
    let base = rng.gen_range(0.0..=255.0);
    let impulse_at = rng.gen_range(1..len);
    let xs: Vec<f64> = (0..len).map(|i| if i == impulse_at { 255.0 - base } else { base }).collect();
    let mut state = StreamState::new(1);
    for (k, x) in xs.iter().enumerate() {
        state.update_finite(&[*x], &params).expect("scalar");
        let mut expected = (1.0 - alpha).powi(k as i32) * xs[0];
        for (j, xj) in xs.iter().enumerate().take(k + 1).skip(1) {
            expected += alpha * (1.0 - alpha).powi((k - j) as i32) * xj;
        }
        let got = state.mean()[0];
        check.expect((got - expected).abs() <= WEIGHT_TOL, || {
            format!("case {n} step {}: recursive {got} vs weighted {expected}", k + 1)
        });
    }
}

/// With no variance floor, scaling every intensity leaves the anomaly
/// decisions unchanged. Decisions within rounding distance of the threshold
/// are not compared.
fn check_scale(check: &mut Check, seq: &[Vec<f64>], rng: &mut impl Rng, n: usize) {
    let params = random_params(rng, 0.0);
    let s = rng.gen_range(0.05..20.0);
    let threshold = params.finite_threshold();
    let mut a = StreamState::new(seq[0].len());
    let mut b = StreamState::new(seq[0].len());
    for (k, x) in seq.iter().enumerate() {
        let scaled: Vec<f64> = x.iter().map(|v| v * s).collect();
        let va = a.step_finite(x, &params).expect("dims");
        let vb = b.step_finite(&scaled, &params).expect("dims");
        if (va.xi - threshold).abs() > 1e-9 {
            check.expect((va.xi > threshold) == (vb.xi > threshold), || {
                format!("case {n} step {}: xi {} vs scaled {} (s={s})", k + 1, va.xi, vb.xi)
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passes_and_is_reproducible() {
        let cfg = SelftestConfig { seed: 42, sequences: 200, fault: None };
        let a = run_selftest(&cfg);
        assert!(a.passed(), "{}", a.render());
        assert_eq!(a, run_selftest(&cfg));
    }

    #[test]
    fn plain_distance_is_caught() {
        let cfg = SelftestConfig { seed: 7, sequences: 50, fault: Some(Fault::PlainEuclidean) };
        let r = run_selftest(&cfg);
        let failed: Vec<_> = r.failures().map(|f| f.name).collect();
        assert!(failed.contains(&"ORACLE EQUIVALENCE"), "{}", r.render());
    }
}
