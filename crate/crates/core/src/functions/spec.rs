//! JSON description of a function, e.g. `{"kind":"blaschke","zeros":[[0.5,0]]}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{AnalyticFunction, BlaschkeProduct, LacunarySeries, Polynomial, ProductFunction, RationalFunction};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FunctionSpec {
    Polynomial { coeffs: Vec<[f64; 2]> },
    /// `[k, re, im]` for the term `(re + i im) z^{2^k}`.
    Lacunary { terms: Vec<(u32, f64, f64)> },
    Blaschke { zeros: Vec<[f64; 2]> },
    Rational { num: Vec<[f64; 2]>, den: Vec<[f64; 2]> },
    Product { factors: Vec<FunctionSpec> },
}

fn complex_list(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

fn pair_list(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

impl TryFrom<&FunctionSpec> for AnalyticFunction {
    type Error = Error;

    fn try_from(spec: &FunctionSpec) -> Result<Self> {
        let finite = |v: &[[f64; 2]]| {
            if v.iter().flatten().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(Error::parameter("non-finite coefficient in function spec"))
            }
        };
        Ok(match spec {
            FunctionSpec::Polynomial { coeffs } => {
                finite(coeffs)?;
                Polynomial::new(complex_list(coeffs)).into()
            }
            FunctionSpec::Lacunary { terms } => LacunarySeries::new(
                terms.iter().map(|&(k, re, im)| (k, Complex64::new(re, im))).collect(),
            )?
            .into(),
            FunctionSpec::Blaschke { zeros } => BlaschkeProduct::new(complex_list(zeros))?.into(),
            FunctionSpec::Rational { num, den } => {
                finite(num)?;
                finite(den)?;
                RationalFunction::new(Polynomial::new(complex_list(num)), Polynomial::new(complex_list(den)))?
                    .into()
            }
            FunctionSpec::Product { factors } => ProductFunction::new(
                factors.iter().map(AnalyticFunction::try_from).collect::<Result<_>>()?,
            )
            .into(),
        })
    }
}

impl From<&AnalyticFunction> for FunctionSpec {
    fn from(f: &AnalyticFunction) -> Self {
        match f {
            AnalyticFunction::Polynomial(p) => FunctionSpec::Polynomial { coeffs: pair_list(p.coeffs()) },
            AnalyticFunction::Lacunary(l) => FunctionSpec::Lacunary {
                terms: l.terms().iter().map(|&(k, a)| (k, a.re, a.im)).collect(),
            },
            AnalyticFunction::Blaschke(b) => FunctionSpec::Blaschke { zeros: pair_list(b.zeros()) },
            AnalyticFunction::Rational(r) => FunctionSpec::Rational {
                num: pair_list(r.numerator().coeffs()),
                den: pair_list(r.denominator().coeffs()),
            },
            AnalyticFunction::Product(p) => FunctionSpec::Product {
                factors: p.factors().iter().map(FunctionSpec::from).collect(),
            },
        }
    }
}

impl FunctionSpec {
    pub fn build(&self) -> Result<AnalyticFunction> {
        AnalyticFunction::try_from(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_kind() {
        let json = r#"{"kind":"product","factors":[
            {"kind":"polynomial","coeffs":[[0,0],[1,0]]},
            {"kind":"lacunary","terms":[[1,1,0],[3,0,-1]]},
            {"kind":"blaschke","zeros":[[0.5,0],[0,0.25]]},
            {"kind":"rational","num":[[1,0]],"den":[[1,0],[-0.5,0]]}
        ]}"#;
        let spec: FunctionSpec = serde_json::from_str(json).unwrap();
        let f = spec.build().unwrap();
        assert_eq!(f.kind(), "product");
        assert_eq!(f.degree(), 1 + 8 + 2 + 1);
        let back = FunctionSpec::from(&f);
        assert_eq!(back, spec);
    }

    #[test]
    fn rejects_bad_specs() {
        let bad_zero: FunctionSpec = serde_json::from_str(r#"{"kind":"blaschke","zeros":[[1.5,0]]}"#).unwrap();
        assert!(bad_zero.build().unwrap_err().is_parameter());
        assert!(serde_json::from_str::<FunctionSpec>(r#"{"kind":"spline","knots":[]}"#).is_err());
        let bad_pole: FunctionSpec =
            serde_json::from_str(r#"{"kind":"rational","num":[[1,0]],"den":[[0.5,0],[1,0]]}"#).unwrap();
        assert!(bad_pole.build().unwrap_err().is_parameter());
    }
}
