//! Frame definition files (JSON). Exact rationals are written as `"num/den"`
//! strings; plain JSON integers are also accepted.

use serde::{Deserialize, Serialize};

use crate::derivative::{make_preset, FrameKind};
use crate::error::{QcalcError, Result};
use crate::scalar::{format_rational, parse_rational, Rational};
use crate::tension::{Domain, QuantumFrame, ShiftMap, TensionFn};

/// A rational carried as text in config files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalText(pub Rational);

impl Serialize for RationalText {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for RationalText {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => parse_rational(&s).map(RationalText).map_err(serde::de::Error::custom),
            Raw::Int(v) => Ok(RationalText(Rational::from_integer(v.into()))),
        }
    }
}

impl From<Rational> for RationalText {
    fn from(r: Rational) -> Self {
        RationalText(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindTag {
    H,
    Q,
    HSymmetric,
    QSymmetric,
    Affine,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaSpec {
    /// `theta(p1, p2) = p1 - p2`
    #[default]
    Difference,
    /// `theta(p1, p2) = p1 * p2`; not additive, useful as a negative control.
    Product,
}

/// `x -> scale * x + offset`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineSpec {
    pub scale: RationalText,
    pub offset: RationalText,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasePoint {
    pub label: String,
    pub point: RationalText,
}

/// A frame definition as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub kind: KindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<RationalText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<RationalText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_prime: Option<RationalText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_prime: Option<RationalText>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exclusions: Vec<RationalText>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub base_points: Vec<BasePoint>,
    /// Custom frames only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<AffineSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<AffineSpec>,
    #[serde(default)]
    pub theta: ThetaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<RationalText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<RationalText>,
}

impl FrameSpec {
    pub fn preset(kind: &FrameKind) -> Self {
        let (q, h, qp, hp) = kind.affine_params();
        let tag = match kind {
            FrameKind::H { .. } => KindTag::H,
            FrameKind::Q { .. } => KindTag::Q,
            FrameKind::HSymmetric { .. } => KindTag::HSymmetric,
            FrameKind::QSymmetric { .. } => KindTag::QSymmetric,
            FrameKind::Affine { .. } => KindTag::Affine,
        };
        let mut spec = FrameSpec::empty(tag);
        match tag {
            KindTag::H | KindTag::HSymmetric => spec.h = Some(h.into()),
            KindTag::Q | KindTag::QSymmetric => spec.q = Some(q.into()),
            _ => {
                spec.q = Some(q.into());
                spec.h = Some(h.into());
                spec.q_prime = Some(qp.into());
                spec.h_prime = Some(hp.into());
            }
        }
        spec
    }

    pub fn empty(kind: KindTag) -> Self {
        FrameSpec {
            kind,
            h: None,
            q: None,
            h_prime: None,
            q_prime: None,
            exclusions: Vec::new(),
            base_points: Vec::new(),
            sigma: None,
            tau: None,
            theta: ThetaSpec::Difference,
            s: None,
            t: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| QcalcError::Parse(format!("frame config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("frame spec serializes")
    }

    fn param(&self, value: &Option<RationalText>, name: &str) -> Result<Rational> {
        value
            .as_ref()
            .map(|r| r.0.clone())
            .ok_or_else(|| QcalcError::InvalidParams(format!("missing parameter {name}")))
    }

    fn param_or(value: &Option<RationalText>, default: i64) -> Rational {
        value.as_ref().map_or_else(|| Rational::from_integer(default.into()), |r| r.0.clone())
    }

    /// The preset family, or `None` for custom frames.
    pub fn frame_kind(&self) -> Result<Option<FrameKind>> {
        Ok(Some(match self.kind {
            KindTag::H => FrameKind::H { h: self.param(&self.h, "h")? },
            KindTag::Q => FrameKind::Q { q: self.param(&self.q, "q")? },
            KindTag::HSymmetric => FrameKind::HSymmetric { h: self.param(&self.h, "h")? },
            KindTag::QSymmetric => FrameKind::QSymmetric { q: self.param(&self.q, "q")? },
            KindTag::Affine => FrameKind::Affine {
                q: Self::param_or(&self.q, 1),
                h: Self::param_or(&self.h, 0),
                q_prime: Self::param_or(&self.q_prime, 1),
                h_prime: Self::param_or(&self.h_prime, 0),
            },
            KindTag::Custom => return Ok(None),
        }))
    }

    pub fn to_frame(&self) -> Result<QuantumFrame<Rational>> {
        let mut frame = match self.frame_kind()? {
            Some(kind) => {
                if self.theta != ThetaSpec::Difference {
                    return Err(QcalcError::InvalidParams("preset frames use the difference tension".into()));
                }
                make_preset(&kind)?
            }
            None => self.custom_frame()?,
        };
        if !self.exclusions.is_empty() {
            let extra: Vec<Rational> = self.exclusions.iter().map(|r| r.0.clone()).collect();
            frame.domain = frame.domain.clone().excluding(extra);
        }
        for bp in &self.base_points {
            frame = frame.with_base_point(bp.label.clone(), bp.point.0.clone());
        }
        Ok(frame)
    }

    fn custom_frame(&self) -> Result<QuantumFrame<Rational>> {
        let map = |spec: &Option<AffineSpec>, name: &str| -> Result<ShiftMap<Rational>> {
            let spec = spec.as_ref().ok_or_else(|| QcalcError::InvalidParams(format!("custom frame needs {name}")))?;
            Ok(ShiftMap::affine(spec.scale.0.clone(), spec.offset.0.clone()))
        };
        let sigma = map(&self.sigma, "sigma")?;
        let tau = map(&self.tau, "tau")?;
        let s = self.s.as_ref().map(|r| r.0.clone()).or_else(|| sigma.declared_homogeneity().cloned());
        let t = self.t.as_ref().map(|r| r.0.clone()).or_else(|| tau.declared_homogeneity().cloned());
        let (s, t) = match (s, t) {
            (Some(s), Some(t)) => (s, t),
            _ => return Err(QcalcError::InvalidParams("custom frame needs s and t".into())),
        };
        let theta = match self.theta {
            ThetaSpec::Difference => TensionFn::difference(),
            ThetaSpec::Product => TensionFn::new("p1 * p2", |a: &Rational, b: &Rational| a * b),
        };
        Ok(QuantumFrame::new("custom", sigma, tau, theta, s, t).with_domain(Domain::all()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn parses_preset_with_fraction_strings() {
        let spec =
            FrameSpec::from_json(r#"{"kind": "q", "q": "3/2", "base_points": [{"label": "a", "point": 1}]}"#).unwrap();
        let frame = spec.to_frame().unwrap();
        assert_eq!(frame.t, rat(3, 2));
        assert_eq!(frame.s, int(1));
        assert_eq!(frame.base_point("a"), Some(&int(1)));
        assert!(frame.domain.is_excluded(&int(0)));
    }

    #[test]
    fn round_trips_through_json() {
        let mut spec =
            FrameSpec::preset(&FrameKind::Affine { q: int(2), h: int(1), q_prime: int(1), h_prime: rat(-1, 3) });
        spec.exclusions.push(rat(5, 7).into());
        spec.base_points.push(BasePoint { label: "s".into(), point: rat(1, 2).into() });
        let back = FrameSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn custom_product_theta() {
        let text = r#"{"kind": "custom", "theta": "product",
            "sigma": {"scale": "1", "offset": "0"}, "tau": {"scale": "1", "offset": "1"}}"#;
        let frame = FrameSpec::from_json(text).unwrap().to_frame().unwrap();
        assert_eq!(frame.theta.eval(&int(2), &int(3)), int(6));
    }

    #[test]
    fn missing_parameters_are_reported() {
        let spec = FrameSpec::from_json(r#"{"kind": "h"}"#).unwrap();
        assert!(matches!(spec.to_frame(), Err(QcalcError::InvalidParams(_))));
        assert!(FrameSpec::from_json(r#"{"kind": "q", "q": "1/0"}"#).is_err());
        assert!(FrameSpec::from_json(r#"{"kind": "cubic"}"#).is_err());
    }
}
