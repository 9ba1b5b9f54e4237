use lanfa_core::approx::zolotarev_sqrt;
use lanfa_core::instances::ProblemInstance;
use lanfa_core::krylov::{lanczos, Reorth};
use lanfa_core::matfunc::{lanczos_fa_from, RationalFunction, ScalarFunction};
use lanfa_core::xlinalg::{tridiag_eigenvalues, Precision, Real, Tridiagonal, XVector};

fn p() -> Precision {
    Precision::default()
}

/// `r(x)/√x − 1` on a log-spaced grid over `[lo, hi]`.
fn relative_errors(r: &RationalFunction, lo: f64, hi: f64, n: usize, p: &Precision) -> Vec<Real> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            let x = p.real(a + (b - a) * i as f64 / (n - 1) as f64).exp();
            r.eval(&x).unwrap() / x.sqrt() - 1.0
        })
        .collect()
}

/// Sign alternations among the grid extrema whose magnitude is within
/// `1 − slack` of the maximum.
fn alternations(e: &[Real], slack: f64) -> usize {
    let peak = e.iter().map(Real::abs).reduce(Real::max).unwrap();
    let level = &peak * (1.0 - slack);
    let mut count = 0;
    let mut last_sign = 0i8;
    for (i, v) in e.iter().enumerate() {
        let is_ext = (i == 0 || v.abs() >= e[i - 1].abs()) && (i + 1 == e.len() || v.abs() >= e[i + 1].abs());
        if !is_ext || v.abs() < level {
            continue;
        }
        let s = if v.is_positive() { 1 } else { -1 };
        if s != last_sign {
            count += 1;
            last_sign = s;
        }
    }
    count
}

#[test]
fn zolotarev_relative_error_equioscillates_2r_plus_2_times() {
    let p = p();
    for r in [1, 2, 3, 5] {
        let z = zolotarev_sqrt(&p.int(1), &p.int(100), r, &p).unwrap();
        let e = relative_errors(&z, 1.0, 100.0, 20_000, &p);
        assert_eq!(alternations(&e, 1e-3), 2 * r + 2, "degree {r}");
    }
}

#[test]
fn zolotarev_error_decreases_with_degree() {
    let p = p();
    let mut prev = f64::INFINITY;
    for r in 1..=8 {
        let z = zolotarev_sqrt(&p.int(1), &p.int(1000), r, &p).unwrap();
        let e = relative_errors(&z, 1.0, 1000.0, 4000, &p);
        let peak = e.iter().map(Real::abs).reduce(Real::max).unwrap().to_f64();
        // Geometric convergence: each extra degree buys a fixed factor.
        assert!(peak < prev / 5.0, "degree {r}: {peak} vs {prev}");
        prev = peak;
    }
}

#[test]
fn zolotarev_error_vanishes_as_interval_shrinks() {
    let p = p();
    let mut prev = f64::INFINITY;
    for hi in [4.0, 1.5, 1.01, 1.0001] {
        let z = zolotarev_sqrt(&p.int(1), &p.real(hi), 2, &p).unwrap();
        let e = relative_errors(&z, 1.0, hi, 2000, &p);
        let peak = e.iter().map(Real::abs).reduce(Real::max).unwrap().to_f64();
        assert!(peak < prev, "hi {hi}");
        prev = peak;
    }
    assert!(prev < 1e-20, "{prev}");
}

/// Sturm count of eigenvalues of `T` below `x`.
fn sturm_below(t: &Tridiagonal, x: &Real) -> usize {
    let (a, b) = (t.alpha(), t.beta());
    let mut count = 0;
    let mut d = &a[0] - x;
    for i in 0..a.len() {
        if i > 0 {
            let guard = if d.is_zero() { x.lit(1e-70) } else { d.clone() };
            d = &(&a[i] - x) - &(b[i - 1].square() / guard);
        }
        if d.is_negative() {
            count += 1;
        }
    }
    count
}

/// Newton form of the interpolant to `f` at `nodes`, evaluated at `x`.
fn newton_interp(nodes: &[Real], fvals: &[Real], x: &Real) -> Real {
    let mut dd = fvals.to_vec();
    for level in 1..nodes.len() {
        for i in (level..nodes.len()).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&nodes[i] - &nodes[i - level]);
        }
    }
    let mut acc = dd[nodes.len() - 1].clone();
    for i in (0..nodes.len() - 1).rev() {
        acc = &(&acc * &(x - &nodes[i])) + &dd[i];
    }
    acc
}

/// Lanczos-FA equals `p(A)b` with `p` interpolating `f` at the Ritz values.
#[test]
fn lanczos_fa_is_ritz_interpolation() {
    let p = Precision::new(512).unwrap();
    let d = 30;
    let lambda: Vec<Real> = (0..d).map(|i| p.one() + &(p.int(9 * i) / (d as i32 - 1))).collect();
    let w: Vec<Real> = (0..d).map(|i| p.one() + &(p.int(i % 7) / 10)).collect();
    let inst = ProblemInstance::new(lambda, XVector::new(w).unwrap(), p.clone()).unwrap();
    let f = ScalarFunction::parse("exp:t=1,sign=-1", &p).unwrap();
    for k in [1, 2, 4, 7, 10] {
        let dec = lanczos(&inst, k, Reorth::Full).unwrap();
        let ritz = tridiag_eigenvalues(dec.t()).unwrap();
        // Each Ritz value is a genuine eigenvalue of T: the Sturm count jumps across it.
        let h = p.real(1e-30);
        for (j, th) in ritz.iter().enumerate() {
            assert_eq!(sturm_below(dec.t(), &(th - &h)), j);
            assert_eq!(sturm_below(dec.t(), &(th + &h)), j + 1);
        }
        let fvals: Vec<Real> = ritz.iter().map(|t| f.eval(t).unwrap()).collect();
        let want: Vec<Real> = inst
            .lambda()
            .iter()
            .zip(inst.w().iter())
            .map(|(l, w)| newton_interp(&ritz, &fvals, l) * w)
            .collect();
        let want = XVector::new(want).unwrap();
        let got = lanczos_fa_from(&dec, &f, &p).unwrap();
        let rel = got.sub(&want).unwrap().norm2() / want.norm2();
        assert!(rel < 1e-60, "k={k}: {}", rel.to_f64());
    }
}
