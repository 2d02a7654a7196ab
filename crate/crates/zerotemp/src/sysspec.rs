//! JSON system descriptions and serializable analysis reports.
//!
//! A spec file holds `alphabet`, an optional locality `r` (default 1), a map
//! `phi` from (r+1)-words to rational literal strings, and an optional map
//! `psi` from the same words to numbers.  Words absent from `phi` are
//! forbidden; rational strings are parsed exactly.

use crate::graph::{Digraph, Symbol};
use crate::potentials::{parse_rat, recode, PotentialPhi, PotentialPsi, Rat};
use crate::renorm::ZeroTemperatureLimit;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemSpec {
    pub alphabet: Vec<String>,
    #[serde(default = "default_r")]
    pub r: usize,
    /// (r+1)-word -> rational literal, e.g. "-5/3".
    pub phi: BTreeMap<String, String>,
    /// (r+1)-word -> real value; missing words default to 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<BTreeMap<String, f64>>,
}

fn default_r() -> usize {
    1
}

impl SystemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SystemSpec =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if spec.alphabet.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        let mut seen = std::collections::BTreeSet::new();
        for name in &spec.alphabet {
            if !seen.insert(name) {
                return Err(Error::DuplicateSymbol(name.clone()));
            }
        }
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialization cannot fail")
    }

    /// Splits a word key into alphabet symbols: character-wise when every
    /// symbol name is a single character, else whitespace-separated.
    pub fn tokenize(&self, word: &str) -> Result<Vec<Symbol>> {
        let lookup = |tok: &str| -> Result<Symbol> {
            self.alphabet
                .iter()
                .position(|n| n == tok)
                .ok_or_else(|| Error::SymbolNotInAlphabet(tok.to_string()))
        };
        if self.alphabet.iter().all(|n| n.chars().count() == 1) {
            word.chars().map(|c| lookup(&c.to_string())).collect()
        } else {
            word.split_whitespace().map(lookup).collect()
        }
    }

    /// Builds the arrow-presented system via the r-block recoding.
    pub fn build(&self) -> Result<(Digraph, PotentialPhi, PotentialPsi)> {
        let mut words: BTreeMap<Vec<Symbol>, (Rat, f64)> = BTreeMap::new();
        for (key, lit) in &self.phi {
            let word = self.tokenize(key)?;
            let phi_value = parse_rat(lit)?;
            let psi_value = self
                .psi
                .as_ref()
                .and_then(|m| m.get(key).copied())
                .unwrap_or(0.0);
            words.insert(word, (phi_value, psi_value));
        }
        if let Some(psi) = &self.psi {
            if let Some(orphan) = psi.keys().find(|k| !self.phi.contains_key(*k)) {
                return Err(Error::Parse(format!(
                    "psi key `{orphan}` has no phi entry (word is forbidden)"
                )));
            }
        }
        recode(&self.alphabet, self.r, &words)
    }
}

/// Serializable per-component entry of a limit report.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentReport {
    pub vertices: Vec<String>,
    pub alpha: f64,
    /// Stationary single-symbol masses of nu_J, keyed by symbol name.
    pub stationary: BTreeMap<String, f64>,
    /// Markov transition probabilities nu_J[ab]/nu_J[a].
    pub transitions: BTreeMap<String, f64>,
}

/// One rung of the serialized renormalization ladder.
#[derive(Debug, Clone, Serialize)]
pub struct LevelReport {
    pub alphabet: Vec<String>,
    pub heavy_components: Vec<Vec<String>>,
    /// Renormalized arrows with exact phi' literals and psi' values.
    pub renormalized_arrows: Vec<ArrowReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArrowReport {
    pub from: usize,
    pub to: usize,
    pub phi: String,
    pub psi: f64,
}

/// The full serializable output of the limit computation.
#[derive(Debug, Clone, Serialize)]
pub struct LimitReport {
    pub components: Vec<ComponentReport>,
    pub symbol_masses: BTreeMap<String, f64>,
    pub ladder: Vec<LevelReport>,
    pub warnings: Vec<String>,
}

impl LimitReport {
    pub fn new(limit: &ZeroTemperatureLimit) -> Self {
        let level0 = limit.level0();
        let graph = &level0.sys.graph;
        let mut components = Vec::new();
        for (j, comp) in level0.heavy.components[..level0.heavy.n_phi]
            .iter()
            .enumerate()
        {
            let masses = comp.measure.single_masses();
            let stationary: BTreeMap<String, f64> = masses
                .iter()
                .map(|(&s, &m)| (graph.name(s).to_string(), m))
                .collect();
            let mut transitions = BTreeMap::new();
            for &(a, b) in &comp.arrows {
                let pa = masses[&a];
                if pa > 0.0 {
                    let pab = comp.measure.cylinder(&[a, b]);
                    transitions.insert(
                        format!("{}{}", graph.name(a), graph.name(b)),
                        pab / pa,
                    );
                }
            }
            components.push(ComponentReport {
                vertices: comp.vertices.iter().map(|&v| graph.name(v).to_string()).collect(),
                alpha: limit.alpha[j],
                stationary,
                transitions,
            });
        }
        let symbol_masses = (0..graph.n())
            .map(|s| (graph.name(s).to_string(), limit.cylinder(&[s]).unwrap()))
            .collect();
        let mut ladder = Vec::new();
        let mut warnings = Vec::new();
        for level in &limit.levels {
            let g = &level.sys.graph;
            warnings.extend(level.heavy.warnings.iter().cloned());
            let renormalized_arrows = match &level.renormalized {
                Some(r) => r
                    .graph
                    .arrows()
                    .map(|(a, b)| ArrowReport {
                        from: a + 1,
                        to: b + 1,
                        phi: r.phi.get(a, b).unwrap().to_string(),
                        psi: r.psi.get(a, b).unwrap(),
                    })
                    .collect(),
                None => Vec::new(),
            };
            ladder.push(LevelReport {
                alphabet: (0..g.n()).map(|s| g.name(s).to_string()).collect(),
                heavy_components: level.heavy.components[..level.heavy.n_phi]
                    .iter()
                    .map(|c| c.vertices.iter().map(|&v| g.name(v).to_string()).collect())
                    .collect(),
                renormalized_arrows,
            });
        }
        LimitReport { components, symbol_masses, ladder, warnings }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// True when the weight is a dyadic-free simple fraction recovered from a
/// pure counting (entropy-free) computation; used for pretty printing.
pub fn as_simple_fraction(x: f64, max_den: u64) -> Option<(i64, u64)> {
    for den in 1..=max_den {
        let num = (x * den as f64).round();
        if (num / den as f64 - x).abs() < 1e-10 {
            return Some((num as i64, den));
        }
    }
    None
}

/// Convenience: parse a spec file into a built system.
pub fn load_system(text: &str) -> Result<(SystemSpec, Digraph, PotentialPhi, PotentialPsi)> {
    let spec = SystemSpec::from_json(text)?;
    let (g, phi, psi) = spec.build()?;
    Ok((spec, g, phi, psi))
}

/// Serializable analysis (maximization + heavy structure) report.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub phi_bar: String,
    pub e_phi: Vec<String>,
    pub phi_g: Option<String>,
    pub maximizing_arrows: Vec<(String, String)>,
    pub components: Vec<AnalysisComponent>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisComponent {
    pub vertices: Vec<String>,
    pub pressure: f64,
    pub heavy: bool,
}

impl AnalysisReport {
    pub fn new(
        sys: &crate::potentials::NormalizedSystem,
        heavy: &crate::renorm::HeavyDecomposition,
        raw_phi_bar: &Rat,
    ) -> Self {
        let graph = &sys.graph;
        AnalysisReport {
            phi_bar: raw_phi_bar.to_string(),
            e_phi: sys
                .report
                .e_phi
                .iter()
                .map(|m| (m + raw_phi_bar).to_string())
                .collect(),
            phi_g: sys
                .report
                .phi_g
                .as_ref()
                .map(|m| (m + raw_phi_bar).to_string()),
            maximizing_arrows: sys
                .report
                .maximizing_arrows
                .iter()
                .map(|&(a, b)| (graph.name(a).to_string(), graph.name(b).to_string()))
                .collect(),
            components: heavy
                .components
                .iter()
                .enumerate()
                .map(|(i, c)| AnalysisComponent {
                    vertices: c.vertices.iter().map(|&v| graph.name(v).to_string()).collect(),
                    pressure: c.pressure,
                    heavy: i < heavy.n_phi,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE1_JSON: &str = r#"{
        "alphabet": ["a", "b", "c"],
        "r": 1,
        "phi": {
            "aa": "0",  "ab": "-1", "ac": "-2",
            "ba": "-1", "bb": "0",  "bc": "-2",
            "ca": "-2", "cb": "-2", "cc": "0"
        }
    }"#;

    #[test]
    fn parse_and_build_example1() {
        let (spec, g, phi, _) = load_system(EXAMPLE1_JSON).unwrap();
        assert_eq!(spec.r, 1);
        assert_eq!(g.n(), 3);
        assert_eq!(g.arrow_count(), 9);
        assert_eq!(phi.get(0, 1), Some(&crate::potentials::rat_int(-1)));
    }

    #[test]
    fn round_trip_preserves_rationals() {
        let spec = SystemSpec::from_json(EXAMPLE1_JSON).unwrap();
        let text = spec.to_json();
        let spec2 = SystemSpec::from_json(&text).unwrap();
        assert_eq!(spec.phi, spec2.phi);
        assert_eq!(spec.alphabet, spec2.alphabet);
    }

    #[test]
    fn multichar_symbols_use_whitespace_tokens() {
        let json = r#"{
            "alphabet": ["s1", "s2"],
            "phi": {"s1 s1": "0", "s1 s2": "-1", "s2 s1": "-1"}
        }"#;
        let (_, g, _, _) = load_system(json).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.arrow_count(), 3);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            SystemSpec::from_json(r#"{"alphabet": [], "phi": {}}"#),
            Err(Error::EmptyAlphabet)
        ));
        assert!(matches!(
            SystemSpec::from_json(r#"{"alphabet": ["a", "a"], "phi": {}}"#),
            Err(Error::DuplicateSymbol(_))
        ));
        let bad_rat = r#"{"alphabet": ["a"], "phi": {"aa": "1/0"}}"#;
        assert!(load_system(bad_rat).is_err());
        let bad_word = r#"{"alphabet": ["a"], "phi": {"az": "0"}}"#;
        assert!(matches!(
            load_system(bad_word),
            Err(Error::SymbolNotInAlphabet(_))
        ));
    }

    #[test]
    fn limit_report_serializes() {
        let (_, g, phi, psi) = load_system(EXAMPLE1_JSON).unwrap();
        let limit = crate::renorm::zero_temperature_limit(&g, &phi, &psi).unwrap();
        let report = LimitReport::new(&limit);
        let json = report.to_json();
        assert!(json.contains("\"symbol_masses\""));
        assert_eq!(report.components.len(), 3);
        assert!((report.symbol_masses["a"] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn simple_fractions() {
        assert_eq!(as_simple_fraction(0.5, 64), Some((1, 2)));
        assert_eq!(as_simple_fraction(1.0 / 6.0, 64), Some((1, 6)));
        assert_eq!(as_simple_fraction(0.273237, 64), None);
    }
}
