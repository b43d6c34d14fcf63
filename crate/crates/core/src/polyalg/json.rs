use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::Scalar;

use super::{MultiIndex, PolyVectorField, Polynomial};

#[derive(Serialize, Deserialize)]
struct TermRepr {
    alpha: MultiIndex,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolynomialRepr {
    d: usize,
    degree: usize,
    terms: Vec<TermRepr>,
}

/// Serialized as `{d, degree, terms: [{alpha, re, im}]}`, listing nonzero
/// terms only.
impl<T: Scalar> Serialize for Polynomial<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let terms = self
            .terms()
            .filter(|(_, c)| *c != T::zero())
            .map(|(alpha, c)| TermRepr {
                alpha,
                re: c.re(),
                im: c.im(),
            })
            .collect();
        PolynomialRepr {
            d: self.dim(),
            degree: self.degree(),
            terms,
        }
        .serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Polynomial<T> {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let repr = PolynomialRepr::deserialize(de)?;
        if repr.d == 0 {
            return Err(D::Error::custom("d must be at least 1"));
        }
        let terms = repr
            .terms
            .into_iter()
            .map(|t| {
                T::from_parts(t.re, t.im)
                    .map(|c| (t.alpha, c))
                    .ok_or_else(|| D::Error::custom("nonzero imaginary part in a real polynomial"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Polynomial::from_terms(repr.d, repr.degree, terms).map_err(D::Error::custom)
    }
}

/// Serialized as the list of its component polynomials.
impl<T: Scalar> Serialize for PolyVectorField<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.components().serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for PolyVectorField<T> {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let comps = Vec::<Polynomial<T>>::deserialize(de)?;
        PolyVectorField::new(comps).map_err(D::Error::custom)
    }
}
