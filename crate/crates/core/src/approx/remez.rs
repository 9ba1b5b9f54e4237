use crate::error::{Error, Result};
use crate::xlinalg::{Matrix, Precision, Real};

use super::chebyshev::{check_interval, chebyshev_extrema, ChebPoly};

const MAX_ITERATIONS: usize = 100;

/// Best uniform polynomial approximation and its alternation set.
#[derive(Clone, Debug)]
pub struct BestApprox {
    pub poly: ChebPoly,
    /// Minimax error `ε`.
    pub error: Real,
    /// Equioscillation abscissae, ascending; empty when degenerate.
    pub alt_points: Vec<Real>,
    /// The target is representable to within `tol`; no alternation exists.
    pub degenerate: bool,
}

/// Remez exchange for the best polynomial of the given degree on `[lo, hi]`.
pub fn remez_best_poly<F>(
    f: &F,
    lo: &Real,
    hi: &Real,
    degree: usize,
    prec: &Precision,
) -> Result<BestApprox>
where
    F: Fn(&Real) -> Result<Real> + ?Sized,
{
    check_interval(lo, hi)?;
    let n = degree + 2;
    let grid = chebyshev_extrema(lo, hi, (50 * n).max(400));
    let fgrid = grid.iter().map(f).collect::<Result<Vec<_>>>()?;
    let scale = fgrid
        .iter()
        .map(Real::abs)
        .reduce(Real::max)
        .expect("non-empty grid")
        .max(prec.one());
    let tol = prec.tol();

    let mut reference = chebyshev_extrema(lo, hi, n);
    let mut last_spread = None;
    for _ in 0..MAX_ITERATIONS {
        let fref = reference.iter().map(f).collect::<Result<Vec<_>>>()?;
        let (poly, level) = solve_reference(&reference, &fref, lo, hi)?;
        let err = |x: &Real| -> Result<Real> { Ok(f(x)? - poly.eval(x)) };

        let egrid: Vec<Real> = grid
            .iter()
            .zip(&fgrid)
            .map(|(x, fx)| fx - &poly.eval(x))
            .collect();
        let grid_max = egrid.iter().map(Real::abs).reduce(Real::max).expect("non-empty");
        if grid_max <= tol * &scale {
            return Ok(BestApprox {
                poly,
                error: grid_max,
                alt_points: vec![],
                degenerate: true,
            });
        }

        let mut extrema = Vec::new();
        for (start, end) in sign_runs(&egrid) {
            let i = (start..end)
                .max_by(|&a, &b| egrid[a].abs().total_cmp(&egrid[b].abs()))
                .expect("non-empty run");
            let a = &grid[i.saturating_sub(1)];
            let b = &grid[(i + 1).min(grid.len() - 1)];
            extrema.push(refine_max(&err, a, b, &grid[i], prec)?);
        }
        trim_to(&mut extrema, n);
        if extrema.len() < n {
            return Err(Error::Convergence {
                method: "remez",
                iterations: 0,
                detail: format!(
                    "only {} alternating extrema for degree {degree} (level {:e})",
                    extrema.len(),
                    level.to_f64()
                ),
            });
        }
        let mags: Vec<Real> = extrema.iter().map(|(_, e)| e.abs()).collect();
        let max = mags.iter().cloned().reduce(Real::max).expect("non-empty");
        let min = mags.iter().cloned().reduce(Real::min).expect("non-empty");
        let spread = &max - &min;
        reference = extrema.into_iter().map(|(x, _)| x).collect();
        if spread <= tol * &max {
            return Ok(BestApprox {
                poly,
                error: max,
                alt_points: reference,
                degenerate: false,
            });
        }
        last_spread = Some(spread / &max);
    }
    Err(Error::Convergence {
        method: "remez",
        iterations: MAX_ITERATIONS,
        detail: format!(
            "relative spread {:e}; last reference {:?}",
            last_spread.map(|s| s.to_f64()).unwrap_or(f64::NAN),
            reference.iter().map(Real::to_f64).collect::<Vec<_>>()
        ),
    })
}

/// Discrete minimax polynomial on a finite point set.
pub fn discrete_best_poly<F>(
    f: &F,
    points: &[Real],
    degree: usize,
    prec: &Precision,
) -> Result<BestApprox>
where
    F: Fn(&Real) -> Result<Real> + ?Sized,
{
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    let n = degree + 2;
    if pts.len() < n {
        return Err(Error::Parameter(format!(
            "degree {degree} needs at least {n} distinct points, got {}",
            pts.len()
        )));
    }
    let lo = pts[0].clone();
    let hi = pts[pts.len() - 1].clone();
    let fvals = pts.iter().map(f).collect::<Result<Vec<_>>>()?;
    let scale = fvals
        .iter()
        .map(Real::abs)
        .reduce(Real::max)
        .expect("non-empty")
        .max(prec.one());
    let tol = prec.tol();

    // Start from the points nearest the Chebyshev extrema.
    let mut idx: Vec<usize> = chebyshev_extrema(&lo, &hi, n)
        .iter()
        .map(|c| {
            (0..pts.len())
                .min_by(|&a, &b| (&pts[a] - c).abs().total_cmp(&(&pts[b] - c).abs()))
                .expect("non-empty")
        })
        .collect();
    idx.dedup();
    if idx.len() < n {
        idx = (0..n).map(|i| i * (pts.len() - 1) / (n - 1)).collect();
    }

    for iteration in 0..MAX_ITERATIONS {
        let xs: Vec<Real> = idx.iter().map(|&i| pts[i].clone()).collect();
        let fs: Vec<Real> = idx.iter().map(|&i| fvals[i].clone()).collect();
        let (poly, level) = solve_reference(&xs, &fs, &lo, &hi)?;
        let e: Vec<Real> = pts.iter().zip(&fvals).map(|(x, fx)| fx - &poly.eval(x)).collect();
        let emax = e.iter().map(Real::abs).reduce(Real::max).expect("non-empty");
        if emax <= tol * &scale {
            return Ok(BestApprox {
                poly,
                error: emax,
                alt_points: vec![],
                degenerate: true,
            });
        }
        let level_abs = level.abs();
        if emax <= &level_abs * &(prec.one() + tol) {
            return Ok(BestApprox {
                poly,
                error: level_abs,
                alt_points: xs,
                degenerate: false,
            });
        }
        let mut extrema: Vec<(usize, Real)> = sign_runs(&e)
            .into_iter()
            .map(|(s, t)| {
                let i = (s..t)
                    .max_by(|&a, &b| e[a].abs().total_cmp(&e[b].abs()))
                    .expect("non-empty run");
                (i, e[i].clone())
            })
            .collect();
        trim_to(&mut extrema, n);
        if extrema.len() < n {
            return Err(Error::Convergence {
                method: "discrete remez",
                iterations: iteration,
                detail: format!("only {} alternating extrema", extrema.len()),
            });
        }
        let next: Vec<usize> = extrema.into_iter().map(|(i, _)| i).collect();
        if next == idx {
            return Err(Error::Convergence {
                method: "discrete remez",
                iterations: iteration,
                detail: "reference set stalled".into(),
            });
        }
        idx = next;
    }
    Err(Error::Convergence {
        method: "discrete remez",
        iterations: MAX_ITERATIONS,
        detail: "iteration cap reached".into(),
    })
}

/// Solves `Σ c_j T_j(x_i) + (−1)^i E = f(x_i)` for the Chebyshev coefficients and the level `E`.
fn solve_reference(xs: &[Real], fs: &[Real], lo: &Real, hi: &Real) -> Result<(ChebPoly, Real)> {
    let n = xs.len();
    let bits = xs[0].prec();
    let probe = ChebPoly::new(vec![Real::zero(bits)], lo.clone(), hi.clone())?;
    let mut m = Matrix::zeros(bits, n, n);
    for (i, x) in xs.iter().enumerate() {
        let t = probe.to_unit(x);
        let mut t_prev = Real::one(bits);
        let mut t_cur = t.clone();
        for j in 0..n - 1 {
            m[(i, j)] = match j {
                0 => t_prev.clone(),
                1 => t_cur.clone(),
                _ => {
                    let next = &(&(&t * 2) * &t_cur) - &t_prev;
                    t_prev = std::mem::replace(&mut t_cur, next);
                    t_cur.clone()
                }
            };
        }
        m[(i, n - 1)] = if i % 2 == 0 { Real::one(bits) } else { Real::from_i64(bits, -1) };
    }
    let sol = m.lu_solve(fs)?;
    let level = sol[n - 1].clone();
    let poly = ChebPoly::new(sol[..n - 1].to_vec(), lo.clone(), hi.clone())?;
    Ok((poly, level))
}

/// Maximal runs of equal nonzero sign, as half-open index ranges.
fn sign_runs(e: &[Real]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start: Option<(usize, bool)> = None;
    for (i, v) in e.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        let s = v.is_positive();
        match start {
            Some((_, sign)) if sign == s => {}
            Some((st, _)) => {
                runs.push((st, i));
                start = Some((i, s));
            }
            None => start = Some((i, s)),
        }
    }
    if let Some((st, _)) = start {
        runs.push((st, e.len()));
    }
    runs
}

/// Drops the smaller end extremum until `n` remain.
fn trim_to<T>(extrema: &mut Vec<(T, Real)>, n: usize) {
    while extrema.len() > n {
        let first = extrema[0].1.abs();
        let last = extrema[extrema.len() - 1].1.abs();
        if first < last {
            extrema.remove(0);
        } else {
            extrema.pop();
        }
    }
}

/// Golden-section search for the maximum of `|e|` on `[a, b]`, seeded with
/// the grid point `x0`; the bracket endpoints are candidates too.
fn refine_max<E>(e: &E, a: &Real, b: &Real, x0: &Real, prec: &Precision) -> Result<(Real, Real)>
where
    E: Fn(&Real) -> Result<Real>,
{
    let invphi = (prec.int(5).sqrt() - 1) / 2;
    let stop = prec.tol() * &(b - a).abs().max(a.abs().max(b.abs()));
    let (mut lo, mut hi) = (a.clone(), b.clone());
    let mut c = &hi - &(&(&hi - &lo) * &invphi);
    let mut d = &lo + &(&(&hi - &lo) * &invphi);
    let mut fc = e(&c)?.abs();
    let mut fd = e(&d)?.abs();
    while (&hi - &lo) > stop {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = &hi - &(&(&hi - &lo) * &invphi);
            fc = e(&c)?.abs();
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = &lo + &(&(&hi - &lo) * &invphi);
            fd = e(&d)?.abs();
        }
    }
    let mut best = (x0.clone(), e(x0)?);
    for x in [c, d, a.clone(), b.clone()] {
        let v = e(&x)?;
        if v.abs() > best.1.abs() {
            best = (x, v);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::default()
    }

    fn inv(x: &Real) -> Result<Real> {
        Ok(x.recip())
    }

    #[test]
    fn best_constant_for_inverse_on_1_2() {
        let p = p();
        let b = remez_best_poly(&inv, &p.int(1), &p.int(2), 0, &p).unwrap();
        let tiny = Real::pow2(256, -120);
        assert!((&b.error - 0.25).abs() <= tiny);
        assert!((&b.poly.coeffs()[0] - 0.75).abs() <= tiny);
        assert_eq!(b.alt_points.len(), 2);
        assert!((&b.alt_points[0] - 1.0).abs() <= tiny && (&b.alt_points[1] - 2.0).abs() <= tiny);
    }

    #[test]
    fn alternation_and_sup_norm_agree() {
        let p = p();
        let (lo, hi) = (p.int(1), p.int(100));
        for degree in [1usize, 4, 9] {
            let b = remez_best_poly(&inv, &lo, &hi, degree, &p).unwrap();
            assert_eq!(b.alt_points.len(), degree + 2);
            let errs: Vec<Real> = b
                .alt_points
                .iter()
                .map(|x| x.recip() - b.poly.eval(x))
                .collect();
            for (i, e) in errs.iter().enumerate() {
                assert!((&e.abs() - &b.error).abs() <= p.tol() * &b.error);
                if i > 0 {
                    assert_ne!(e.is_positive(), errs[i - 1].is_positive());
                }
            }
            let sup = super::super::sup_error(&inv, &|x: &Real| Ok(b.poly.eval(x)), &lo, &hi, 20_000)
                .unwrap();
            assert!(sup <= &b.error * &(p.one() + p.tol() * 10));
        }
    }

    #[test]
    fn polynomial_targets_are_degenerate() {
        let p = p();
        let cube = |x: &Real| Ok(&(x * x * x) - x);
        let b = remez_best_poly(&cube, &p.int(-1), &p.int(3), 3, &p).unwrap();
        assert!(b.degenerate && b.error <= *p.tol());
        let pts: Vec<Real> = (1..=5).map(|i| p.int(i)).collect();
        let sq = |x: &Real| Ok(x.square());
        let b = discrete_best_poly(&sq, &pts, 2, &p).unwrap();
        assert!(b.degenerate && b.error <= *p.tol());
    }

    #[test]
    fn discrete_endpoints_match_interval_answer() {
        let p = p();
        let b = discrete_best_poly(&inv, &[p.int(1), p.int(2)], 0, &p).unwrap();
        assert_eq!(b.error, 0.25);
        assert_eq!(b.poly.coeffs()[0], 0.75);
    }

    #[test]
    fn discrete_error_is_below_interval_error() {
        let p = p();
        let pts: Vec<Real> = (0..50)
            .map(|i| p.int(1) + &(p.int(99) * i / 49))
            .collect();
        let d = discrete_best_poly(&inv, &pts, 4, &p).unwrap();
        let c = remez_best_poly(&inv, &p.int(1), &p.int(100), 4, &p).unwrap();
        assert!(d.error <= c.error);
        assert_eq!(d.alt_points.len(), 6);
        for x in &d.alt_points {
            assert!(pts.contains(x));
        }
        let emax = pts
            .iter()
            .map(|x| (x.recip() - d.poly.eval(x)).abs())
            .reduce(Real::max)
            .unwrap();
        assert!(emax <= &d.error * &(p.one() + p.tol()));
        assert!(matches!(
            discrete_best_poly(&inv, &pts[..3], 2, &p),
            Err(Error::Parameter(_))
        ));
    }
}
