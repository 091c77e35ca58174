use serde::{Deserialize, Serialize};

use super::rate::{Monomial, Polynomial, RateFunction};
use crate::error::{Error, Result};

/// Which species a reaction moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReactionClass {
    /// Moves slow species only.
    SlowOnly,
    /// Moves both slow and fast species.
    Coupled,
    /// Moves fast species only.
    FastOnly,
}

impl ReactionClass {
    pub fn of(gamma_x: &[i64], gamma_y: &[i64]) -> Option<Self> {
        let slow = gamma_x.iter().any(|&g| g != 0);
        let fast = gamma_y.iter().any(|&g| g != 0);
        match (slow, fast) {
            (true, false) => Some(Self::SlowOnly),
            (true, true) => Some(Self::Coupled),
            (false, true) => Some(Self::FastOnly),
            (false, false) => None,
        }
    }

    /// True for reactions that move fast species and must conserve them.
    pub fn moves_fast(self) -> bool {
        matches!(self, Self::Coupled | Self::FastOnly)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub gamma_x: Vec<i64>,
    pub gamma_y: Vec<i64>,
    pub rate: RateFunction,
    class: ReactionClass,
}

impl Reaction {
    /// Fails only on the zero jump.
    pub fn new(gamma_x: Vec<i64>, gamma_y: Vec<i64>, rate: RateFunction) -> Option<Self> {
        let class = ReactionClass::of(&gamma_x, &gamma_y)?;
        Some(Self { gamma_x, gamma_y, rate, class })
    }

    pub fn class(&self) -> ReactionClass {
        self.class
    }

    pub fn fast_jump_sum(&self) -> i64 {
        self.gamma_y.iter().sum()
    }

    /// `<p, gamma_x>`
    pub fn slow_dot(&self, p: &[f64]) -> f64 {
        self.gamma_x.iter().zip(p).map(|(&g, &pi)| g as f64 * pi).sum()
    }
}

/// Two-time-scale reaction network: `slow_dim` slow species rescaled by the
/// system size, `fast_dim` fast species whose total count is `conservation`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiScaleNetwork {
    slow_dim: usize,
    fast_dim: usize,
    conservation: u32,
    reactions: Vec<Reaction>,
}

impl MultiScaleNetwork {
    /// Builds and fully validates a network, including conservation of fast
    /// molecules.
    pub fn new(slow_dim: usize, fast_dim: usize, conservation: u32, reactions: Vec<Reaction>) -> Result<Self> {
        let net = Self::new_structural(slow_dim, fast_dim, conservation, reactions)?;
        if let Some(&i) = net.conservation_violations().first() {
            return Err(Error::ConservationViolated { reaction: i, sum: net.reactions[i].fast_jump_sum() });
        }
        Ok(net)
    }

    /// Validates everything except conservation, so that a report on a
    /// non-conserving model can still be produced.
    pub fn new_structural(
        slow_dim: usize,
        fast_dim: usize,
        conservation: u32,
        reactions: Vec<Reaction>,
    ) -> Result<Self> {
        if slow_dim == 0 || fast_dim == 0 {
            return Err(Error::Schema("slow_dim and fast_dim must be positive".into()));
        }
        if reactions.is_empty() {
            return Err(Error::NoReactions);
        }
        for (i, r) in reactions.iter().enumerate() {
            check_len(i, "gamma_x", slow_dim, r.gamma_x.len())?;
            check_len(i, "gamma_y", fast_dim, r.gamma_y.len())?;
            r.rate
                .polynomial()
                .check_dims(slow_dim, fast_dim)
                .map_err(|(what, expected, found)| Error::DimensionMismatch { reaction: i, what, expected, found })?;
        }
        Ok(Self { slow_dim, fast_dim, conservation, reactions })
    }

    pub fn slow_dim(&self) -> usize {
        self.slow_dim
    }

    pub fn fast_dim(&self) -> usize {
        self.fast_dim
    }

    pub fn conservation(&self) -> u32 {
        self.conservation
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn classes(&self) -> Vec<ReactionClass> {
        self.reactions.iter().map(Reaction::class).collect()
    }

    /// Indices of fast-moving reactions whose fast jump does not sum to zero.
    pub fn conservation_violations(&self) -> Vec<usize> {
        self.reactions
            .iter()
            .enumerate()
            .filter(|(_, r)| r.class().moves_fast() && r.fast_jump_sum() != 0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Same network with every rate coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut net = self.clone();
        for r in &mut net.reactions {
            r.rate = r.rate.scaled(factor);
        }
        net
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            slow_dim: self.slow_dim,
            fast_dim: self.fast_dim,
            conservation_m: self.conservation,
            reactions: self
                .reactions
                .iter()
                .map(|r| ReactionDocument {
                    gamma_x: r.gamma_x.clone(),
                    gamma_y: r.gamma_y.clone(),
                    rate: r.rate.polynomial().clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("model document serializes")
    }
}

fn check_len(reaction: usize, what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { reaction, what, expected, found });
    }
    Ok(())
}

/// On-disk layout of a model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub slow_dim: usize,
    pub fast_dim: usize,
    #[serde(rename = "conservation_M")]
    pub conservation_m: u32,
    pub reactions: Vec<ReactionDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionDocument {
    pub gamma_x: Vec<i64>,
    pub gamma_y: Vec<i64>,
    pub rate: Polynomial,
}

impl ModelDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    fn reactions(&self) -> Result<Vec<Reaction>> {
        self.reactions
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let rate = RateFunction::new(r.rate.clone()).map_err(|k| Error::NegativeCoefficient { reaction: i, k })?;
                Reaction::new(r.gamma_x.clone(), r.gamma_y.clone(), rate).ok_or(Error::ZeroJump { reaction: i })
            })
            .collect()
    }

    pub fn into_network(self) -> Result<MultiScaleNetwork> {
        MultiScaleNetwork::new(self.slow_dim, self.fast_dim, self.conservation_m, self.reactions()?)
    }

    pub fn into_network_structural(self) -> Result<MultiScaleNetwork> {
        MultiScaleNetwork::new_structural(self.slow_dim, self.fast_dim, self.conservation_m, self.reactions()?)
    }
}

/// Parses and validates a model document.
pub fn parse_model(text: &str) -> Result<MultiScaleNetwork> {
    ModelDocument::from_json(text)?.into_network()
}

/// Parses a model document without enforcing conservation.
pub fn parse_model_structural(text: &str) -> Result<MultiScaleNetwork> {
    ModelDocument::from_json(text)?.into_network_structural()
}

/// Enzyme kinetics with substrate inflow. Slow species `(S, P)`, fast
/// species `(E, ES)`, with `E + ES = m_total`.
///
/// 1. `0 -> S` at rate `k0`
/// 2. `E + S -> ES` at rate `k1 x1 y1`
/// 3. `ES -> E + S` at rate `k2 y2`
/// 4. `ES -> P + E` at rate `k3 y2`
pub fn builtin_michaelis_menten(k: [f64; 4], m_total: u32) -> Result<MultiScaleNetwork> {
    if m_total < 1 {
        return Err(Error::InvalidArgument("Michaelis-Menten needs M >= 1".into()));
    }
    let mono = |i: usize, k: f64, x_exp: [u32; 2], y_exp: [u32; 2]| {
        RateFunction::new(Polynomial::new(vec![Monomial::new(k, x_exp.to_vec(), y_exp.to_vec())]))
            .map_err(|k| Error::NegativeCoefficient { reaction: i, k })
    };
    let reactions = vec![
        Reaction::new(vec![1, 0], vec![0, 0], mono(0, k[0], [0, 0], [0, 0])?),
        Reaction::new(vec![-1, 0], vec![-1, 1], mono(1, k[1], [1, 0], [1, 0])?),
        Reaction::new(vec![1, 0], vec![1, -1], mono(2, k[2], [0, 0], [0, 1])?),
        Reaction::new(vec![0, 1], vec![1, -1], mono(3, k[3], [0, 0], [0, 1])?),
    ];
    MultiScaleNetwork::new(2, 2, m_total, reactions.into_iter().map(|r| r.expect("nonzero jumps")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ReactionClass::*;

    fn doc(reactions: &str) -> String {
        format!(r#"{{"slow_dim": 2, "fast_dim": 2, "conservation_M": 1, "reactions": [{reactions}]}}"#)
    }

    #[test]
    fn michaelis_menten_classes() {
        let net = builtin_michaelis_menten([1.0; 4], 1).unwrap();
        assert_eq!(net.classes(), vec![SlowOnly, Coupled, Coupled, Coupled]);
        let parsed = parse_model(&net.to_json()).unwrap();
        assert_eq!(parsed.classes(), vec![SlowOnly, Coupled, Coupled, Coupled]);
    }

    #[test]
    fn zero_inflow_is_valid() {
        let net = builtin_michaelis_menten([0.0, 1.0, 1.0, 1.0], 1).unwrap();
        assert_eq!(net.reactions()[0].rate.eval(&[3.0, 4.0], &[1, 0]), 0.0);
    }

    #[test]
    fn zero_jump_rejected() {
        let text = doc(r#"{"gamma_x": [0, 0], "gamma_y": [0, 0], "rate": {"monomials": [{"k": 1, "x_exp": [0, 0], "y_exp": [0, 0]}]}}"#);
        let err = parse_model(&text).unwrap_err();
        assert!(matches!(err, Error::ZeroJump { reaction: 0 }));
        assert!(err.to_string().contains("zero jump"));
    }

    #[test]
    fn conservation_violation_rejected() {
        let text = doc(r#"{"gamma_x": [1, 0], "gamma_y": [1, 0], "rate": {"monomials": [{"k": 1, "x_exp": [0, 0], "y_exp": [0, 0]}]}}"#);
        let err = parse_model(&text).unwrap_err();
        assert!(matches!(err, Error::ConservationViolated { reaction: 0, sum: 1 }));
        assert!(err.to_string().contains("conservation violated"));
        // the structural parse keeps it for reporting
        assert!(parse_model_structural(&text).is_ok());
    }

    #[test]
    fn negative_coefficient_reports_index() {
        let ok = r#"{"gamma_x": [1, 0], "gamma_y": [0, 0], "rate": {"monomials": [{"k": 1, "x_exp": [0, 0], "y_exp": [0, 0]}]}}"#;
        let bad = r#"{"gamma_x": [1, 0], "gamma_y": [0, 0], "rate": {"monomials": [{"k": -2, "x_exp": [0, 0], "y_exp": [0, 0]}]}}"#;
        let err = parse_model(&doc(&format!("{ok}, {bad}"))).unwrap_err();
        assert!(matches!(err, Error::NegativeCoefficient { reaction: 1, .. }));
    }

    #[test]
    fn dimension_mismatch_reports_index() {
        let bad = r#"{"gamma_x": [1], "gamma_y": [0, 0], "rate": {"monomials": [{"k": 1, "x_exp": [0, 0], "y_exp": [0, 0]}]}}"#;
        let err = parse_model(&doc(bad)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { reaction: 0, what: "gamma_x", .. }));
        let bad = r#"{"gamma_x": [1, 0], "gamma_y": [0, 0], "rate": {"monomials": [{"k": 1, "x_exp": [0], "y_exp": [0, 0]}]}}"#;
        assert!(matches!(
            parse_model(&doc(bad)).unwrap_err(),
            Error::DimensionMismatch { what: "x_exp", .. }
        ));
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(parse_model("{}").unwrap_err(), Error::Schema(_)));
        let text = r#"{"slow_dim": "two", "fast_dim": 2, "conservation_M": 1, "reactions": []}"#;
        assert!(matches!(parse_model(text).unwrap_err(), Error::Schema(_)));
        assert!(matches!(parse_model(&doc("")).unwrap_err(), Error::NoReactions));
    }
}
