use std::fmt;

use crate::error::{Error, Result};
use crate::xlinalg::{Precision, Real};

/// Polynomial in the monomial basis, coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Real>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Real>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Parameter("polynomial needs at least one coefficient".into()));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::Parameter(format!("coefficient {i} is not finite")));
        }
        Ok(Polynomial { coeffs })
    }

    pub fn constant(c: Real) -> Self {
        Polynomial { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[Real] {
        &self.coeffs
    }

    /// Degree ignoring trailing zero coefficients; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| !c.is_zero())
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &Real) -> Real {
        let mut acc = self.coeffs[self.coeffs.len() - 1].clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = &(acc * x) + c;
        }
        acc
    }
}

/// A pole of a rational function: a real point or a conjugate pair `re ± i·im`.
#[derive(Clone, Debug, PartialEq)]
pub enum Pole {
    Real(Real),
    Conjugate { re: Real, im: Real },
}

impl Pole {
    /// Contribution to the denominator degree.
    pub fn multiplicity(&self) -> usize {
        match self {
            Pole::Real(_) => 1,
            Pole::Conjugate { .. } => 2,
        }
    }

    /// Denominator factor at `x`: `x − z`, or `(x − re)² + im²` for a pair.
    pub fn factor(&self, x: &Real) -> Real {
        match self {
            Pole::Real(z) => x - z,
            Pole::Conjugate { re, im } => &(x - re).square() + &im.square(),
        }
    }

    /// Distance from the real point `x` to the nearest pole location.
    pub fn distance(&self, x: &Real) -> Real {
        match self {
            Pole::Real(z) => (x - z).abs(),
            Pole::Conjugate { re, im } => (x - re).hypot(im),
        }
    }
}

/// `r(x) = n(x) / m(x)` with monic `m(x) = Π (x − z_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction {
    numer: Polynomial,
    poles: Vec<Pole>,
}

impl RationalFunction {
    pub fn new(numer: Polynomial, poles: Vec<Pole>) -> Result<Self> {
        for p in &poles {
            match p {
                Pole::Real(z) if !z.is_finite() => {
                    return Err(Error::Parameter("pole is not finite".into()))
                }
                Pole::Conjugate { re, im } if !re.is_finite() || !im.is_positive() => {
                    return Err(Error::Parameter(
                        "conjugate pole needs a finite real part and positive imaginary part".into(),
                    ))
                }
                _ => {}
            }
        }
        Ok(RationalFunction { numer, poles })
    }

    pub fn with_real_poles(numer: Polynomial, poles: Vec<Real>) -> Result<Self> {
        RationalFunction::new(numer, poles.into_iter().map(Pole::Real).collect())
    }

    /// `x^{-q}`.
    pub fn inv_power(q: u32, prec: &Precision) -> Self {
        RationalFunction {
            numer: Polynomial::constant(prec.one()),
            poles: (0..q).map(|_| Pole::Real(prec.zero())).collect(),
        }
    }

    pub fn numer(&self) -> &Polynomial {
        &self.numer
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    /// Denominator degree `q`.
    pub fn q(&self) -> usize {
        self.poles.iter().map(Pole::multiplicity).sum()
    }

    pub fn numer_degree(&self) -> usize {
        self.numer.degree()
    }

    /// The poles `z₁…z_q` when all are real.
    pub fn real_poles(&self) -> Option<Vec<Real>> {
        self.poles
            .iter()
            .map(|p| match p {
                Pole::Real(z) => Some(z.clone()),
                Pole::Conjugate { .. } => None,
            })
            .collect()
    }

    /// `r_j = n / m_{1,j}`: the first `j` poles only. Requires real poles.
    pub fn truncated(&self, j: usize) -> Result<RationalFunction> {
        let poles = self
            .real_poles()
            .ok_or_else(|| Error::Domain("truncation needs real poles".into()))?;
        if j > poles.len() {
            return Err(Error::Parameter(format!("r_{j} with only {} poles", poles.len())));
        }
        RationalFunction::with_real_poles(self.numer.clone(), poles[..j].to_vec())
    }

    /// `m_{i,j}(x) = Π_{l=i}^{j} (x − z_l)` with 1-based inclusive indices; empty product is 1.
    pub fn partial_denominator(&self, i: usize, j: usize, x: &Real) -> Real {
        let mut acc = x.one_like();
        for p in self.poles.iter().take(j).skip(i.saturating_sub(1)) {
            acc *= p.factor(x);
        }
        acc
    }

    pub fn eval(&self, x: &Real) -> Result<Real> {
        let mut den = x.one_like();
        for p in &self.poles {
            den *= p.factor(x);
        }
        if den.is_zero() {
            return Err(Error::Domain(format!("{} is a pole", x.to_f64())));
        }
        Ok(self.numer.eval(x) / den)
    }
}

/// The functions `f` applied to `A`.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarFunction {
    Polynomial(Polynomial),
    Rational(RationalFunction),
    Sqrt,
    InvSqrt,
    InvPower(u32),
    /// `exp(sign · t · x)`.
    ExpScaled { t: Real, sign: i8 },
    Sign,
}

impl ScalarFunction {
    pub fn inv_power(q: u32) -> Result<Self> {
        if q == 0 {
            return Err(Error::Parameter("inverse power must be at least 1".into()));
        }
        Ok(ScalarFunction::InvPower(q))
    }

    pub fn eval(&self, x: &Real) -> Result<Real> {
        let outside = |what: &str| Error::Domain(format!("{what} undefined at {}", x.to_f64()));
        match self {
            ScalarFunction::Polynomial(p) => Ok(p.eval(x)),
            ScalarFunction::Rational(r) => r.eval(x),
            ScalarFunction::Sqrt => {
                if x.is_negative() {
                    return Err(outside("sqrt"));
                }
                Ok(x.sqrt())
            }
            ScalarFunction::InvSqrt => {
                if !x.is_positive() {
                    return Err(outside("inv_sqrt"));
                }
                Ok(x.sqrt().recip())
            }
            ScalarFunction::InvPower(q) => {
                if x.is_zero() {
                    return Err(outside("inv_power"));
                }
                Ok(x.powi(*q as i32).recip())
            }
            ScalarFunction::ExpScaled { t, sign } => {
                let s = t * x;
                Ok(if *sign < 0 { (-s).exp() } else { s.exp() })
            }
            ScalarFunction::Sign => {
                if x.is_zero() {
                    return Err(outside("sign"));
                }
                Ok(x.signum())
            }
        }
    }

    /// The rational form, for polynomials, rationals and inverse powers.
    pub fn as_rational(&self, prec: &Precision) -> Option<RationalFunction> {
        match self {
            ScalarFunction::Polynomial(p) => Some(RationalFunction {
                numer: p.clone(),
                poles: vec![],
            }),
            ScalarFunction::Rational(r) => Some(r.clone()),
            ScalarFunction::InvPower(q) => Some(RationalFunction::inv_power(*q, prec)),
            _ => None,
        }
    }

    /// Whether `f` is continuous on `[lo, hi]`.
    pub fn continuous_on(&self, lo: &Real, hi: &Real) -> bool {
        let contains = |z: &Real| lo <= z && z <= hi;
        match self {
            ScalarFunction::Polynomial(_) | ScalarFunction::ExpScaled { .. } => true,
            ScalarFunction::Rational(r) => r.poles.iter().all(|p| match p {
                Pole::Real(z) => !contains(z),
                Pole::Conjugate { .. } => true,
            }),
            ScalarFunction::Sqrt => !lo.is_negative(),
            ScalarFunction::InvSqrt | ScalarFunction::InvPower(_) => lo.is_positive(),
            ScalarFunction::Sign => lo.is_positive() || hi.is_negative(),
        }
    }

    /// Parses the canonical text form, e.g. `inv_power:4`, `sqrt`,
    /// `exp:t=1,sign=-1`, `poly:[1,0,2]`, `rational:numer=[0,1];poles=[-1,-2]`.
    pub fn parse(s: &str, prec: &Precision) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s, None),
        };
        let bad = |why: &str| Error::Parameter(format!("cannot parse function {s:?}: {why}"));
        let no_args = |f: ScalarFunction| match args {
            None => Ok(f),
            Some(_) => Err(bad("takes no arguments")),
        };
        match name {
            "sqrt" => no_args(ScalarFunction::Sqrt),
            "inv_sqrt" => no_args(ScalarFunction::InvSqrt),
            "sign" => no_args(ScalarFunction::Sign),
            "inv_power" => {
                let q: u32 = args
                    .ok_or_else(|| bad("missing power"))?
                    .parse()
                    .map_err(|_| bad("power must be a positive integer"))?;
                ScalarFunction::inv_power(q)
            }
            "exp" => {
                let mut t = prec.one();
                let mut sign: i8 = 1;
                for kv in args.unwrap_or("").split(',').filter(|x| !x.trim().is_empty()) {
                    let (k, v) = kv.split_once('=').ok_or_else(|| bad("expected key=value"))?;
                    match k.trim() {
                        "t" => t = prec.parse(v)?,
                        "sign" => {
                            sign = match v.trim() {
                                "1" | "+1" => 1,
                                "-1" => -1,
                                _ => return Err(bad("sign must be 1 or -1")),
                            }
                        }
                        other => return Err(bad(&format!("unknown key {other:?}"))),
                    }
                }
                Ok(ScalarFunction::ExpScaled { t, sign })
            }
            "poly" => {
                let coeffs = parse_list(args.ok_or_else(|| bad("missing coefficients"))?, prec)?;
                Ok(ScalarFunction::Polynomial(Polynomial::new(coeffs)?))
            }
            "rational" => {
                let mut numer = None;
                let mut poles = None;
                for kv in args.ok_or_else(|| bad("missing numer/poles"))?.split(';') {
                    let (k, v) = kv.split_once('=').ok_or_else(|| bad("expected key=value"))?;
                    match k.trim() {
                        "numer" => numer = Some(parse_list(v, prec)?),
                        "poles" => poles = Some(parse_list(v, prec)?),
                        other => return Err(bad(&format!("unknown key {other:?}"))),
                    }
                }
                let numer = Polynomial::new(numer.ok_or_else(|| bad("missing numer"))?)?;
                let poles = poles.ok_or_else(|| bad("missing poles"))?;
                Ok(ScalarFunction::Rational(RationalFunction::with_real_poles(
                    numer, poles,
                )?))
            }
            _ => Err(bad("unknown function name")),
        }
    }
}

fn parse_list(s: &str, prec: &Precision) -> Result<Vec<Real>> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|x| x.strip_suffix(']'))
        .ok_or_else(|| Error::Parameter(format!("expected a [..] list, got {s:?}")))?;
    if inner.trim().is_empty() {
        return Ok(vec![]);
    }
    inner.split(',').map(|x| prec.parse(x)).collect()
}

fn fmt_list(f: &mut fmt::Formatter<'_>, xs: &[Real]) -> fmt::Result {
    write!(f, "[")?;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{}", x.to_sci(25))?;
    }
    write!(f, "]")
}

/// Canonical text form; parses back to the same function for real poles.
impl fmt::Display for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFunction::Polynomial(p) => {
                write!(f, "poly:")?;
                fmt_list(f, &p.coeffs)
            }
            ScalarFunction::Rational(r) => {
                write!(f, "rational:numer=")?;
                fmt_list(f, &r.numer.coeffs)?;
                write!(f, ";poles=[")?;
                for (i, p) in r.poles.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    match p {
                        Pole::Real(z) => write!(f, "{}", z.to_sci(25))?,
                        Pole::Conjugate { re, im } => {
                            write!(f, "{}±{}i", re.to_sci(25), im.to_sci(25))?
                        }
                    }
                }
                write!(f, "]")
            }
            ScalarFunction::Sqrt => write!(f, "sqrt"),
            ScalarFunction::InvSqrt => write!(f, "inv_sqrt"),
            ScalarFunction::InvPower(q) => write!(f, "inv_power:{q}"),
            ScalarFunction::ExpScaled { t, sign } => {
                write!(f, "exp:t={},sign={sign}", t.to_sci(25))
            }
            ScalarFunction::Sign => write!(f, "sign"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::default()
    }

    #[test]
    fn eval_examples() {
        let p = p();
        assert_eq!(ScalarFunction::Sign.eval(&p.int(-3)).unwrap(), -1.0);
        let r = ScalarFunction::Rational(
            RationalFunction::with_real_poles(Polynomial::constant(p.one()), vec![p.zero(), p.zero()])
                .unwrap(),
        );
        assert_eq!(r.eval(&p.int(2)).unwrap(), 0.25);
        let e = ScalarFunction::ExpScaled {
            t: p.one(),
            sign: -1,
        };
        assert_eq!(e.eval(&p.zero()).unwrap(), 1.0);
    }

    #[test]
    fn domain_errors_name_the_value() {
        let p = p();
        for (f, x) in [
            (ScalarFunction::Sqrt, -1.0),
            (ScalarFunction::InvSqrt, 0.0),
            (ScalarFunction::InvPower(2), 0.0),
            (ScalarFunction::Sign, 0.0),
        ] {
            match f.eval(&p.real(x)) {
                Err(Error::Domain(msg)) => assert!(msg.contains(&format!("{x}"))),
                other => panic!("{f}: {other:?}"),
            }
        }
        let r = RationalFunction::with_real_poles(Polynomial::constant(p.one()), vec![p.int(3)])
            .unwrap();
        assert!(matches!(r.eval(&p.int(3)), Err(Error::Domain(_))));
    }

    #[test]
    fn text_forms_round_trip() {
        let p = p();
        for s in [
            "inv_power:4",
            "sqrt",
            "inv_sqrt",
            "sign",
            "exp:t=1,sign=-1",
            "poly:[1,0,2.5]",
            "rational:numer=[0,1];poles=[-1,-2]",
        ] {
            let f = ScalarFunction::parse(s, &p).unwrap();
            let again = ScalarFunction::parse(&f.to_string(), &p).unwrap();
            assert_eq!(f, again, "{s}");
        }
        let r = ScalarFunction::parse("rational:numer=[0,1];poles=[-1,-2]", &p).unwrap();
        assert_eq!(r.eval(&p.one()).unwrap(), p.one() / 6);
        for bad in ["inv_power:0", "inv_power", "exp:t=1,sign=2", "cosh", "sqrt:2", "poly:1,2"] {
            assert!(ScalarFunction::parse(bad, &p).is_err(), "{bad}");
        }
    }

    #[test]
    fn decimal_arguments_parse_at_working_precision() {
        let p = p();
        let f = ScalarFunction::parse("exp:t=0.1", &p).unwrap();
        match f {
            ScalarFunction::ExpScaled { t, .. } => assert_eq!(t, p.parse("0.1").unwrap()),
            _ => unreachable!(),
        }
    }

    #[test]
    fn rational_structure() {
        let p = p();
        let r = RationalFunction::new(
            Polynomial::new(vec![p.int(1), p.int(2)]).unwrap(),
            vec![
                Pole::Real(p.int(-1)),
                Pole::Conjugate {
                    re: p.int(-2),
                    im: p.int(1),
                },
            ],
        )
        .unwrap();
        assert_eq!(r.q(), 3);
        assert_eq!(r.numer_degree(), 1);
        assert!(r.real_poles().is_none());
        // (1 + 2·0) / ((0+1)((0+2)² + 1)) = 1/5
        assert_eq!(r.eval(&p.zero()).unwrap(), p.one() / 5);

        let r = RationalFunction::with_real_poles(
            Polynomial::constant(p.one()),
            vec![p.int(-1), p.int(-2), p.int(-3)],
        )
        .unwrap();
        let r1 = r.truncated(1).unwrap();
        assert_eq!(r1.eval(&p.one()).unwrap(), 0.5);
        assert_eq!(r.truncated(0).unwrap().q(), 0);
        // m_{2,3}(1) = (1+2)(1+3)
        assert_eq!(r.partial_denominator(2, 3, &p.one()), 12.0);
        assert_eq!(r.partial_denominator(4, 3, &p.one()), 1.0);
    }

    #[test]
    fn continuity_classification() {
        let p = p();
        let (lo, hi) = (p.int(-1), p.int(1));
        assert!(!ScalarFunction::Sign.continuous_on(&lo, &hi));
        assert!(ScalarFunction::Sign.continuous_on(&p.int(1), &p.int(2)));
        assert!(!ScalarFunction::InvPower(1).continuous_on(&lo, &hi));
        assert!(ScalarFunction::Sqrt.continuous_on(&p.zero(), &hi));
    }
}
