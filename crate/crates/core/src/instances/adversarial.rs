//! Search for right-hand sides that maximise the worst optimality ratio.
//!
//! Multi-start coordinate hill climbing on `|w|`: each restart draws a random
//! direction and then tries `wᵢ·2` and `wᵢ/2` coordinate by coordinate,
//! keeping a move only if the worst ratio over `k = 1..=k_max` increases.
//! An accepted move is repeated on the same coordinate with the factor
//! squared (2, 4, 16, …) until it stops paying off, so weights can reach
//! the `κ^{−q/2}` scales that extreme instances need within a small budget.
//! Signs of `w` are irrelevant since every ratio depends on `w` only through
//! `wᵢ²`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matfunc::ScalarFunction;
use crate::optimal::{worst_ratio, Method};
use crate::xlinalg::{Precision, Real, XVector};

use super::{ones_b, ProblemInstance};

const MAX_RESTARTS: usize = 8;
/// Evaluations per restart below which extra restarts are not worth it.
const EVALS_PER_RESTART: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdversarialConfig {
    pub k_max: usize,
    /// Ratio evaluations, excluding the `ones_b` baseline.
    pub budget: usize,
    pub seed: u64,
    pub method: Method,
}

impl AdversarialConfig {
    pub fn restarts(&self) -> usize {
        (self.budget / EVALS_PER_RESTART).clamp(1, MAX_RESTARTS)
    }
}

#[derive(Clone, Debug)]
pub struct AdversarialResult {
    /// Unit-norm coefficients of `b` in the eigenbasis.
    pub w: XVector,
    pub worst_ratio: Real,
    pub worst_k: usize,
    pub baseline_ratio: Real,
    pub evaluations: usize,
}

type Score = Option<(Real, usize)>;

fn better(a: &Score, b: &Score) -> bool {
    match (a, b) {
        (Some((x, _)), Some((y, _))) => x > y,
        (Some(_), None) => true,
        _ => false,
    }
}

struct Search<'a> {
    lambda: &'a [Real],
    f: &'a ScalarFunction,
    cfg: &'a AdversarialConfig,
    prec: &'a Precision,
}

impl Search<'_> {
    fn score(&self, w: &[Real]) -> Result<Score> {
        let inst = ProblemInstance::new(self.lambda.to_vec(), XVector::new(w.to_vec())?, self.prec.clone())?;
        worst_ratio(&inst, self.f, self.cfg.k_max, self.cfg.method)
    }

    fn gaussian(&self, rng: &mut ChaCha8Rng) -> Vec<Real> {
        (0..self.lambda.len())
            .map(|_| {
                let g: f64 = StandardNormal.sample(rng);
                // A zero coordinate could never move under multiplicative steps.
                self.prec.real(g.abs().max(f64::MIN_POSITIVE))
            })
            .collect()
    }

    /// Returns the best point, its score and the evaluations spent.
    fn restart(&self, index: usize, budget: usize, baseline: &(Vec<Real>, Score)) -> Result<(Vec<Real>, Score, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(index as u64);
        let draw = self.gaussian(&mut rng);
        let draw_score = self.score(&draw)?;
        let mut used = 1;
        let (mut w, mut best) = if index == 0 && !better(&draw_score, &baseline.1) {
            baseline.clone()
        } else {
            (draw, draw_score)
        };

        let two = self.prec.int(2);
        let mut stale = 0;
        let mut i = 0;
        // A full pass without an accepted move is a local maximum.
        while used < budget && stale < w.len() {
            let mut moved = false;
            for up in [true, false] {
                let mut factor = two.clone();
                while used < budget {
                    let mut trial = w.clone();
                    trial[i] = if up { &trial[i] * &factor } else { &trial[i] / &factor };
                    let s = self.score(&trial)?;
                    used += 1;
                    if !better(&s, &best) {
                        break;
                    }
                    w = trial;
                    best = s;
                    moved = true;
                    factor = factor.square();
                }
                if moved {
                    break;
                }
            }
            stale = if moved { 0 } else { stale + 1 };
            i = (i + 1) % w.len();
        }
        Ok((w, best, used))
    }
}

/// Adversarial right-hand side for `f(A)b` with `A = diag(lambda)`.
///
/// Deterministic for a fixed seed and precision. The result is never worse
/// than `ones_b`.
pub fn adversarial_b(
    lambda: &[Real],
    f: &ScalarFunction,
    cfg: &AdversarialConfig,
    prec: &Precision,
) -> Result<AdversarialResult> {
    if cfg.budget == 0 {
        return Err(Error::Parameter("budget must be at least 1".into()));
    }
    for x in lambda {
        f.eval(x)?;
    }
    let search = Search { lambda, f, cfg, prec };
    let ones = ones_b(lambda.len(), prec)?.into_inner();
    let baseline_score = search.score(&ones)?;
    let baseline = (ones, baseline_score);

    let restarts = cfg.restarts();
    let results = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let share = cfg.budget / restarts + usize::from(r < cfg.budget % restarts);
            search.restart(r, share, &baseline)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut evaluations = 0;
    let mut best: Option<(Vec<Real>, Score)> = None;
    for (w, s, used) in results {
        evaluations += used;
        if best.as_ref().is_none_or(|(_, b)| better(&s, b)) {
            best = Some((w, s));
        }
    }
    let (w, score) = best.expect("at least one restart");
    let (w, score) = if better(&baseline.1, &score) { baseline.clone() } else { (w, score) };
    let (worst_ratio, worst_k) =
        score.ok_or_else(|| Error::Degenerate("every Krylov dimension is exact or undefined".into()))?;
    let baseline_ratio = baseline.1.map(|(r, _)| r).unwrap_or_else(|| prec.zero());

    let w = XVector::new(w)?;
    let norm = w.norm2();
    let w = w.scale(&norm.recip());
    Ok(AdversarialResult {
        w,
        worst_ratio,
        worst_k,
        baseline_ratio,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{spectrum, SpectrumKind};
    use crate::optimal::optimality_ratio;

    fn p() -> Precision {
        Precision::default()
    }

    fn cfg(budget: usize, seed: u64) -> AdversarialConfig {
        AdversarialConfig {
            k_max: 8,
            budget,
            seed,
            method: Method::LanczosFa,
        }
    }

    fn small_spectrum(p: &Precision) -> Vec<Real> {
        (0..12).map(|i| p.int(1) + p.int(i * i)).collect()
    }

    #[test]
    fn zero_budget_is_rejected() {
        let p = p();
        let f = ScalarFunction::inv_power(2).unwrap();
        let e = adversarial_b(&small_spectrum(&p), &f, &cfg(0, 1), &p).unwrap_err();
        assert!(matches!(e, Error::Parameter(_)));
    }

    #[test]
    fn budget_one_keeps_best_of_baseline_and_first_draw() {
        let p = p();
        let lam = small_spectrum(&p);
        let f = ScalarFunction::inv_power(2).unwrap();
        let res = adversarial_b(&lam, &f, &cfg(1, 7), &p).unwrap();
        assert_eq!(res.evaluations, 1);
        assert!(res.worst_ratio >= res.baseline_ratio);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        rng.set_stream(0);
        let draw: Vec<Real> = (0..lam.len())
            .map(|_| {
                let g: f64 = StandardNormal.sample(&mut rng);
                p.real(g.abs())
            })
            .collect();
        let inst = ProblemInstance::new(lam.clone(), XVector::new(draw).unwrap(), p.clone()).unwrap();
        let draw_ratio = worst_ratio(&inst, &f, 8, Method::LanczosFa).unwrap().unwrap().0;
        let expect = draw_ratio.max(res.baseline_ratio.clone());
        assert!((&res.worst_ratio - &expect).abs() <= p.tol() * &expect);
    }

    #[test]
    fn result_is_reproducible_and_unit_norm() {
        let p = p();
        let lam = small_spectrum(&p);
        let f = ScalarFunction::inv_power(2).unwrap();
        let a = adversarial_b(&lam, &f, &cfg(40, 3), &p).unwrap();
        let b = adversarial_b(&lam, &f, &cfg(40, 3), &p).unwrap();
        assert_eq!(a.w, b.w);
        assert_eq!(a.worst_ratio, b.worst_ratio);
        assert_eq!(a.worst_k, b.worst_k);
        assert!(a.evaluations <= 40);
        assert!((a.w.norm2() - p.one()).abs() <= p.tol() * &p.int(10));
        assert!(a.worst_ratio >= a.baseline_ratio);

        let inst = ProblemInstance::new(lam, a.w.clone(), p.clone()).unwrap();
        let r = optimality_ratio(&inst, &f, a.worst_k, Method::LanczosFa).unwrap();
        let r = r.value().unwrap().clone();
        assert!((&r - &a.worst_ratio).abs() <= p.tol() * &p.int(1000) * &r);
    }

    #[test]
    fn cg_case_stays_within_sqrt_kappa() {
        let p = p();
        let lam = spectrum(
            &SpectrumKind::UnitOutlier {
                d: 30,
                kappa: p.int(10_000),
            },
            &p,
        )
        .unwrap();
        let f = ScalarFunction::inv_power(1).unwrap();
        let res = adversarial_b(&lam, &f, &cfg(24, 11), &p).unwrap();
        assert!(res.worst_ratio >= p.one());
        assert!(res.worst_ratio <= p.int(100));
    }

    #[test]
    fn undefined_function_is_a_domain_error() {
        let p = p();
        let lam = vec![p.int(-1), p.int(2)];
        let f = ScalarFunction::Sqrt;
        assert!(matches!(adversarial_b(&lam, &f, &cfg(4, 0), &p), Err(Error::Domain(_))));
    }
}
