use serde::{Deserialize, Serialize};

use super::{FormKind, NormalForm, NormalFormError, RelationInfo};
use crate::series::{
    AkHamiltonian, Coefficient, Ring, SeriesError, Sigma, TruncatedSeries1, DEFAULT_PRECISION,
    EXACT,
};

/// Serialized normal form. `components[l]` lists `[exponent, coeff]` pairs;
/// `component_orders[l]` is its truncation order (`null` when exact).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormJson {
    pub kind: FormKind,
    pub k: u32,
    pub sigma: Sigma,
    pub smooth_mode: bool,
    pub ring: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<usize>,
    pub components: Vec<Vec<(u32, String)>>,
    #[serde(default)]
    pub component_orders: Vec<Option<u32>>,
    #[serde(default)]
    pub source_order: Option<u32>,
    #[serde(default)]
    pub flipped: bool,
    #[serde(default)]
    pub orientation_flipped: bool,
    #[serde(default, skip_deserializing)]
    pub relation: Option<RelationInfo>,
}

fn finite(order: u32) -> Option<u32> {
    (order != EXACT).then_some(order)
}

impl NormalFormJson {
    pub fn from_form<C: Coefficient>(nf: &NormalForm<C>) -> Self {
        let ring = nf.components.first().map_or(Ring::Rational, |c| c.ring());
        NormalFormJson {
            kind: nf.kind,
            k: nf.k(),
            sigma: nf.sigma(),
            smooth_mode: nf.smooth_mode,
            ring: ring.tag().to_string(),
            precision: ring.precision(),
            components: nf
                .components
                .iter()
                .map(|c| c.terms().map(|(e, v)| (e, v.to_text())).collect())
                .collect(),
            component_orders: nf.components.iter().map(|c| finite(c.order())).collect(),
            source_order: finite(nf.source_order),
            flipped: nf.flipped,
            orientation_flipped: nf.orientation_flipped,
            relation: Some(nf.relation()),
        }
    }

    pub fn ring(&self) -> Result<Ring, SeriesError> {
        match self.ring.as_str() {
            "rational" => Ok(Ring::Rational),
            "big-float" => Ok(Ring::big_float(self.precision.unwrap_or(DEFAULT_PRECISION))),
            other => Err(SeriesError::Parse(format!("unknown ring {other:?}"))),
        }
    }

    pub fn to_form<C: Coefficient>(&self) -> Result<NormalForm<C>, NormalFormError> {
        let ring = self.ring()?;
        if !C::accepts(ring) {
            return Err(SeriesError::Parse(format!(
                "normal form ring {ring} does not match the requested ring"
            ))
            .into());
        }
        let hamiltonian = AkHamiltonian::new(self.k, self.sigma)?;
        let expected = match self.kind {
            FormKind::FForm => self.k - 1,
            FormKind::ChForm => self.k - 1,
            FormKind::FibrationForm => self.k - 2,
        } as usize;
        if self.components.len() != expected {
            return Err(NormalFormError::Structure(format!(
                "{:?} with k={} needs {expected} components, got {}",
                self.kind,
                self.k,
                self.components.len()
            )));
        }
        let components = self
            .components
            .iter()
            .enumerate()
            .map(|(l, terms)| {
                let order = self
                    .component_orders
                    .get(l)
                    .copied()
                    .flatten()
                    .unwrap_or(EXACT);
                let parsed = terms
                    .iter()
                    .map(|(e, v)| Ok((*e, C::parse_text(v, ring)?)))
                    .collect::<Result<Vec<_>, SeriesError>>()?;
                Ok(TruncatedSeries1::from_terms(ring, order, parsed))
            })
            .collect::<Result<Vec<_>, SeriesError>>()?;
        Ok(NormalForm {
            kind: self.kind,
            hamiltonian,
            components,
            smooth_mode: self.smooth_mode,
            flipped: self.flipped,
            orientation_flipped: self.orientation_flipped,
            source_order: self.source_order.unwrap_or(EXACT),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalform::f_form;
    use crate::series::Rational;

    #[test]
    fn json_round_trip() {
        let h = AkHamiltonian::new(4, Sigma::Plus).unwrap();
        let c = TruncatedSeries1::from_terms(
            Ring::Rational,
            11,
            [
                (0, Rational::ONE),
                (1, Rational::from(-3)),
                (5, Rational::from(2)),
            ],
        );
        let nf = f_form(&c, h).unwrap();
        let text = serde_json::to_string(&NormalFormJson::from_form(&nf)).unwrap();
        assert!(text.contains("\"kind\":\"F_FORM\""));
        let back: NormalFormJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_form::<Rational>().unwrap(), nf);
    }
}
