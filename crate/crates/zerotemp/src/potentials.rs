//! Locally constant potentials on an SFT: exact-rational `phi`, floating
//! `psi`, recoding of (r+1)-symbol potentials to arrow functions, exact
//! maximization (phi-bar, E_phi, phi_g, the maximizing subshift) and
//! normalization of the pair.
//!
//! All maximizing-circuit decisions are made in exact rational arithmetic:
//! the branching of the downstream renormalization (which arrows enter the
//! maximizing subshift, which excursion paths maximize) is discontinuous in
//! `phi`, so floating ties would corrupt the combinatorics.

use crate::graph::{Component, ComponentKind, Digraph, PathRec, Symbol};
use crate::perron;
use crate::{Error, Result};
use num::BigRational;
use num::{FromPrimitive, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(n.into(), d.into())
}

pub fn rat_int(n: i64) -> Rat {
    BigRational::from_i64(n).unwrap()
}

/// Parses "−5/3", "-5/3", "7", "0" exactly.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim().replace('\u{2212}', "-");
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim().to_string(), d.trim().to_string()),
        None => (s.clone(), "1".to_string()),
    };
    let n: num::BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
    let d: num::BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{s}`")));
    }
    Ok(BigRational::new(n, d))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap()
}

/// Rational arrow potential; domain is exactly the arrow set of its graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialPhi {
    values: BTreeMap<(Symbol, Symbol), Rat>,
}

/// Real arrow potential; `-oo` is representable only by arrow absence.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialPsi {
    values: BTreeMap<(Symbol, Symbol), f64>,
}

impl PotentialPhi {
    pub fn new(graph: &Digraph, values: BTreeMap<(Symbol, Symbol), Rat>) -> Self {
        debug_assert!(graph.arrows().all(|ab| values.contains_key(&ab)));
        debug_assert_eq!(values.len(), graph.arrow_count());
        PotentialPhi { values }
    }

    pub fn constant(graph: &Digraph, c: Rat) -> Self {
        PotentialPhi {
            values: graph.arrows().map(|ab| (ab, c.clone())).collect(),
        }
    }

    pub fn get(&self, a: Symbol, b: Symbol) -> Option<&Rat> {
        self.values.get(&(a, b))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Symbol, Symbol), &Rat)> {
        self.values.iter()
    }

    pub fn shifted(&self, c: &Rat) -> Self {
        PotentialPhi {
            values: self
                .values
                .iter()
                .map(|(k, v)| (*k, v - c))
                .collect(),
        }
    }

    pub fn path_sum(&self, path: &PathRec) -> Result<Rat> {
        let mut total = Rat::zero();
        for (a, b) in path.arrows() {
            total += self
                .get(a, b)
                .ok_or_else(|| Error::ArrowNotInGraph(a.to_string(), b.to_string()))?;
        }
        Ok(total)
    }
}

impl PotentialPsi {
    pub fn new(graph: &Digraph, values: BTreeMap<(Symbol, Symbol), f64>) -> Self {
        debug_assert!(graph.arrows().all(|ab| values.contains_key(&ab)));
        debug_assert_eq!(values.len(), graph.arrow_count());
        PotentialPsi { values }
    }

    pub fn constant(graph: &Digraph, c: f64) -> Self {
        PotentialPsi {
            values: graph.arrows().map(|ab| (ab, c)).collect(),
        }
    }

    pub fn get(&self, a: Symbol, b: Symbol) -> Option<f64> {
        self.values.get(&(a, b)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Symbol, Symbol), &f64)> {
        self.values.iter()
    }

    pub fn shifted(&self, c: f64) -> Self {
        PotentialPsi {
            values: self.values.iter().map(|(k, v)| (*k, v - c)).collect(),
        }
    }

    pub fn path_sum(&self, path: &PathRec) -> Result<f64> {
        let mut total = 0.0;
        for (a, b) in path.arrows() {
            total += self
                .get(a, b)
                .ok_or_else(|| Error::ArrowNotInGraph(a.to_string(), b.to_string()))?;
        }
        Ok(total)
    }
}

/// Recodes (r+1)-symbol potentials to arrow potentials on the r-block
/// presentation: vertices are the length-r words occurring as prefixes or
/// suffixes of admissible words, arrows are the admissible (r+1)-words with
/// overlap gluing.  `r = 0` (product case) is lifted to `r = 1` with
/// `phi(a,b) := Phi(b)`.
pub fn recode(
    alphabet: &[String],
    r: usize,
    words: &BTreeMap<Vec<Symbol>, (Rat, f64)>,
) -> Result<(Digraph, PotentialPhi, PotentialPsi)> {
    if words.is_empty() {
        return Err(Error::EmptyLanguage);
    }
    let word_name = |w: &[Symbol]| -> String {
        let parts: Vec<&str> = w.iter().map(|&s| alphabet[s].as_str()).collect();
        if parts.iter().all(|p| p.chars().count() == 1) {
            parts.concat()
        } else {
            parts.join(".")
        }
    };
    for w in words.keys() {
        if w.len() != r + 1 {
            return Err(Error::InconsistentWordSet(word_name(w), r + 1));
        }
        for &s in w {
            if s >= alphabet.len() {
                return Err(Error::SymbolNotInAlphabet(s.to_string()));
            }
        }
    }
    if r == 0 {
        // product case: full shift on the admissible symbols, phi(a,b) = Phi(b)
        let symbols: Vec<Symbol> = words.keys().map(|w| w[0]).collect();
        let names: Vec<String> = symbols.iter().map(|&s| alphabet[s].clone()).collect();
        let mut arrows = Vec::new();
        let mut phi = BTreeMap::new();
        let mut psi = BTreeMap::new();
        for i in 0..symbols.len() {
            for (j, (phi_value, psi_value)) in words.values().enumerate() {
                arrows.push((i, j));
                phi.insert((i, j), phi_value.clone());
                psi.insert((i, j), *psi_value);
            }
        }
        let graph = Digraph::from_indices(names, arrows);
        let phi = PotentialPhi::new(&graph, phi);
        let psi = PotentialPsi::new(&graph, psi);
        return Ok((graph, phi, psi));
    }
    let mut vertex_words: BTreeSet<Vec<Symbol>> = BTreeSet::new();
    for w in words.keys() {
        vertex_words.insert(w[..r].to_vec());
        vertex_words.insert(w[1..].to_vec());
    }
    let vertex_words: Vec<Vec<Symbol>> = vertex_words.into_iter().collect();
    let index: BTreeMap<&[Symbol], usize> = vertex_words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_slice(), i))
        .collect();
    let names: Vec<String> = vertex_words.iter().map(|w| word_name(w)).collect();
    let mut arrows = Vec::new();
    let mut phi = BTreeMap::new();
    let mut psi = BTreeMap::new();
    for (w, (phi_value, psi_value)) in words {
        let a = index[&w[..r]];
        let b = index[&w[1..]];
        arrows.push((a, b));
        phi.insert((a, b), phi_value.clone());
        psi.insert((a, b), *psi_value);
    }
    let graph = Digraph::from_indices(names, arrows);
    let phi = PotentialPhi::new(&graph, phi);
    let psi = PotentialPsi::new(&graph, psi);
    Ok((graph, phi, psi))
}

/// Everything `maximize` learns about `phi`.
#[derive(Debug, Clone)]
pub struct MaximizationReport {
    /// Maximum elementary-circuit mean.
    pub phi_bar: Rat,
    /// All circuit-mean values, descending.
    pub e_phi: Vec<Rat>,
    /// Second largest circuit mean, when at least two values exist.
    pub phi_g: Option<Rat>,
    /// Arrows lying on maximizing circuits (the span of C-bar).
    pub maximizing_arrows: BTreeSet<(Symbol, Symbol)>,
    /// The maximizing subshift as a digraph on the original vertex set.
    pub maximizing_subgraph: Digraph,
    /// One maximizing elementary circuit per transitive component of X-bar.
    pub c_bar_witnesses: Vec<PathRec>,
}

/// Computes phi-bar, E_phi, phi_g and the maximizing subshift exactly.
///
/// phi-bar and the maximizing arrow set use Karp's maximum-cycle-mean
/// algorithm plus a zero-circuit arrow test on the normalized weights (all
/// circuit sums <= 0 after subtracting phi-bar, so longest-path values are
/// finite); E_phi and phi_g fall back on explicit circuit enumeration.
pub fn maximize(graph: &Digraph, phi: &PotentialPhi) -> Result<MaximizationReport> {
    let dec = graph.decompose();
    if dec.transitive().count() == 0 {
        return Err(Error::NoCircuit);
    }
    // per-component cycle-mean maxima (Karp, exact)
    let mut phi_bar: Option<Rat> = None;
    let mut comp_means: Vec<(usize, Rat)> = Vec::new();
    for (ci, comp) in dec.components.iter().enumerate() {
        if comp.kind != ComponentKind::Transitive {
            continue;
        }
        let mean = karp_max_cycle_mean(comp, phi);
        if phi_bar.as_ref().map_or(true, |m| mean > *m) {
            phi_bar = Some(mean.clone());
        }
        comp_means.push((ci, mean));
    }
    let phi_bar = phi_bar.unwrap();

    // E_phi and phi_g from the full circuit list (desk-scale graphs)
    let mut e_phi_set: BTreeSet<Rat> = BTreeSet::new();
    for circuit in graph.elementary_circuits() {
        let mean = phi.path_sum(&circuit)? / rat_int(circuit.len() as i64);
        e_phi_set.insert(mean);
    }
    let e_phi: Vec<Rat> = e_phi_set.into_iter().rev().collect();
    debug_assert_eq!(e_phi[0], phi_bar);
    let phi_g = e_phi.get(1).cloned();

    // maximizing arrows via the zero-circuit test inside maximal components
    let mut maximizing_arrows: BTreeSet<(Symbol, Symbol)> = BTreeSet::new();
    for (ci, mean) in &comp_means {
        if *mean != phi_bar {
            continue;
        }
        let comp = &dec.components[*ci];
        maximizing_arrows.extend(zero_circuit_arrows(comp, phi, &phi_bar));
    }

    let maximizing_subgraph =
        graph.restrict_arrows(|a, b| maximizing_arrows.contains(&(a, b)));

    // one witness circuit per transitive component of X-bar
    let mut c_bar_witnesses = Vec::new();
    for comp in maximizing_subgraph.decompose().transitive() {
        let sub = maximizing_subgraph
            .restrict_arrows(|a, b| comp.arrows.contains(&(a, b)));
        let witness = sub
            .elementary_circuits()
            .into_iter()
            .find(|c| phi.path_sum(c).unwrap() == &phi_bar * rat_int(c.len() as i64));
        c_bar_witnesses.push(witness.expect("maximizing component without maximizing circuit"));
    }

    Ok(MaximizationReport {
        phi_bar,
        e_phi,
        phi_g,
        maximizing_arrows,
        maximizing_subgraph,
        c_bar_witnesses,
    })
}

/// Karp's maximum cycle mean on one strongly connected component, exact.
fn karp_max_cycle_mean(comp: &Component, phi: &PotentialPhi) -> Rat {
    let vs = &comp.vertices;
    let n = vs.len();
    let pos: BTreeMap<Symbol, usize> = vs.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    // d[k][i]: max weight of a k-arrow walk from vs[0] to vs[i]
    let mut d: Vec<Vec<Option<Rat>>> = vec![vec![None; n]; n + 1];
    d[0][0] = Some(Rat::zero());
    for k in 0..n {
        for (i, _) in vs.iter().enumerate() {
            let Some(base) = d[k][i].clone() else { continue };
            for &(a, b) in &comp.arrows {
                if pos[&a] != i {
                    continue;
                }
                let j = pos[&b];
                let cand = &base + phi.get(a, b).unwrap();
                if d[k + 1][j].as_ref().map_or(true, |cur| cand > *cur) {
                    d[k + 1][j] = Some(cand);
                }
            }
        }
    }
    let mut best: Option<Rat> = None;
    for i in 0..n {
        let Some(dn) = d[n][i].clone() else { continue };
        let mut worst: Option<Rat> = None;
        for k in 0..n {
            let Some(dk) = d[k][i].clone() else { continue };
            let mean = (&dn - &dk) / rat_int((n - k) as i64);
            if worst.as_ref().map_or(true, |w| mean < *w) {
                worst = Some(mean);
            }
        }
        if let Some(w) = worst {
            if best.as_ref().map_or(true, |b| w > *b) {
                best = Some(w);
            }
        }
    }
    best.expect("strongly connected component without closed walk")
}

/// Arrows of a maximal-mean component lying on some zero-mean circuit of the
/// normalized weights w = phi - phi_bar: arrow (a,b) qualifies iff the
/// longest-path value b -> a plus w(a,b) is exactly 0.  Longest paths are
/// finite because every circuit has w-sum <= 0.
fn zero_circuit_arrows(
    comp: &Component,
    phi: &PotentialPhi,
    phi_bar: &Rat,
) -> Vec<(Symbol, Symbol)> {
    let vs = &comp.vertices;
    let n = vs.len();
    let pos: BTreeMap<Symbol, usize> = vs.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let weight = |a: Symbol, b: Symbol| phi.get(a, b).unwrap() - phi_bar;
    // longest[i][j]: max walk value vs[i] -> vs[j]; n relaxation rounds
    // suffice since no circuit is gainful
    let mut longest: Vec<Vec<Option<Rat>>> = vec![vec![None; n]; n];
    for i in 0..n {
        longest[i][i] = Some(Rat::zero());
    }
    for _ in 0..n {
        let mut changed = false;
        for &(a, b) in &comp.arrows {
            let (ia, ib) = (pos[&a], pos[&b]);
            let w = weight(a, b);
            for s in 0..n {
                let Some(base) = longest[s][ia].clone() else { continue };
                let cand = base + &w;
                if longest[s][ib].as_ref().map_or(true, |cur| cand > *cur) {
                    longest[s][ib] = Some(cand);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    comp.arrows
        .iter()
        .copied()
        .filter(|&(a, b)| {
            longest[pos[&b]][pos[&a]]
                .as_ref()
                .map_or(false, |back| back + weight(a, b) == Rat::zero())
        })
        .collect()
}

/// A system with phi-bar = 0 and max component pressure of psi on X-bar = 0.
#[derive(Debug, Clone)]
pub struct NormalizedSystem {
    pub graph: Digraph,
    pub phi: PotentialPhi,
    pub psi: PotentialPsi,
    /// Maximization report of the *normalized* phi (phi_bar = 0).
    pub report: MaximizationReport,
    /// P(psi | X-bar) before subtraction.
    pub psi_pressure_on_xbar: f64,
}

/// Subtracts phi-bar from phi and P(psi|X-bar) from psi.  The pressure is
/// the max over transitive components of X-bar of the log Perron root of the
/// psi-transfer matrix restricted to the component.
pub fn normalize(graph: &Digraph, phi: &PotentialPhi, psi: &PotentialPsi) -> Result<NormalizedSystem> {
    let report = maximize(graph, phi)?;
    let phi_n = phi.shifted(&report.phi_bar);
    let xbar = &report.maximizing_subgraph;
    let mut pressure = f64::NEG_INFINITY;
    for comp in xbar.decompose().transitive() {
        let p = perron::component_pressure(xbar, psi, comp)?;
        pressure = pressure.max(p);
    }
    let psi_n = psi.shifted(pressure);
    let report_n = maximize(graph, &phi_n)?;
    debug_assert!(report_n.phi_bar.is_zero());
    Ok(NormalizedSystem {
        graph: graph.clone(),
        phi: phi_n,
        psi: psi_n,
        report: report_n,
        psi_pressure_on_xbar: pressure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Example-1 system: 3 symbols, full shift, phi from the first worked
    /// example (self-loops maximal).
    pub fn example1() -> (Digraph, PotentialPhi, PotentialPsi) {
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let arrows: Vec<_> = (0..3).flat_map(|a| (0..3).map(move |b| (a, b))).collect();
        let graph = Digraph::from_indices(names, arrows);
        let m = [[0, -1, -2], [-1, 0, -2], [-2, -2, 0]];
        let phi = PotentialPhi::new(
            &graph,
            (0..3)
                .flat_map(|a| (0..3).map(move |b| ((a, b), rat_int(m[a][b]))))
                .collect(),
        );
        let psi = PotentialPsi::constant(&graph, 0.0);
        (graph, phi, psi)
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rat("-5/3").unwrap(), rat(-5, 3));
        assert_eq!(parse_rat("7").unwrap(), rat_int(7));
        assert_eq!(parse_rat("\u{2212}1/2").unwrap(), rat(-1, 2));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn recode_r1_is_identity() {
        let alphabet: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let mut words = BTreeMap::new();
        for a in 0..3usize {
            for b in 0..3usize {
                words.insert(vec![a, b], (rat_int((a as i64) - (b as i64)), 0.0));
            }
        }
        let (g, phi, _) = recode(&alphabet, 1, &words).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.arrow_count(), 9);
        assert_eq!(phi.get(2, 0), Some(&rat_int(2)));
    }

    #[test]
    fn recode_r2_de_bruijn() {
        let alphabet: Vec<String> = ["0", "1"].iter().map(|s| s.to_string()).collect();
        let mut words = BTreeMap::new();
        for a in 0..2usize {
            for b in 0..2usize {
                for c in 0..2usize {
                    words.insert(vec![a, b, c], (Rat::zero(), 0.0));
                }
            }
        }
        let (g, _, _) = recode(&alphabet, 2, &words).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.arrow_count(), 8);
    }

    #[test]
    fn recode_r2_golden_mean_like() {
        let alphabet: Vec<String> = ["0", "1"].iter().map(|s| s.to_string()).collect();
        let triples = [[0, 0, 0], [0, 0, 1], [0, 1, 0], [1, 0, 0]];
        let words: BTreeMap<Vec<usize>, (Rat, f64)> = triples
            .iter()
            .map(|t| (t.to_vec(), (Rat::zero(), 0.0)))
            .collect();
        let (g, _, _) = recode(&alphabet, 2, &words).unwrap();
        assert_eq!(g.n(), 3); // 00, 01, 10
        assert_eq!(g.arrow_count(), 4);
    }

    #[test]
    fn recode_rejects_bad_words() {
        let alphabet: Vec<String> = vec!["a".into()];
        let words: BTreeMap<Vec<usize>, (Rat, f64)> =
            [(vec![0, 0, 0], (Rat::zero(), 0.0))].into();
        assert!(matches!(
            recode(&alphabet, 1, &words),
            Err(Error::InconsistentWordSet(_, 2))
        ));
        let empty: BTreeMap<Vec<usize>, (Rat, f64)> = BTreeMap::new();
        assert!(matches!(recode(&alphabet, 1, &empty), Err(Error::EmptyLanguage)));
    }

    #[test]
    fn maximize_example1() {
        let (g, phi, _) = example1();
        let rep = maximize(&g, &phi).unwrap();
        assert_eq!(rep.phi_bar, Rat::zero());
        // X-bar = the three self-loops
        let expected: BTreeSet<_> = [(0, 0), (1, 1), (2, 2)].into();
        assert_eq!(rep.maximizing_arrows, expected);
        // E_phi = {0, -1, -5/3, -2}
        assert_eq!(rep.e_phi, vec![rat_int(0), rat_int(-1), rat(-5, 3), rat_int(-2)]);
        assert_eq!(rep.phi_g, Some(rat_int(-1)));
        assert_eq!(rep.c_bar_witnesses.len(), 3);
    }

    #[test]
    fn maximize_constant_phi() {
        let (g, _, _) = example1();
        let phi = PotentialPhi::constant(&g, rat(3, 2));
        let rep = maximize(&g, &phi).unwrap();
        assert_eq!(rep.phi_bar, rat(3, 2));
        assert_eq!(rep.maximizing_arrows.len(), 9);
        assert_eq!(rep.e_phi.len(), 1);
        assert!(rep.phi_g.is_none());
    }

    #[test]
    fn maximize_dag_fails() {
        let g = Digraph::from_indices(vec!["a".into(), "b".into()], vec![(0, 1)]);
        let phi = PotentialPhi::constant(&g, Rat::zero());
        assert!(matches!(maximize(&g, &phi), Err(Error::NoCircuit)));
    }

    #[test]
    fn shift_invariance_of_argmax() {
        let (g, phi, _) = example1();
        let shifted = phi.shifted(&rat(-7, 1));
        let a = maximize(&g, &phi).unwrap();
        let b = maximize(&g, &shifted).unwrap();
        assert_eq!(a.maximizing_arrows, b.maximizing_arrows);
        assert_eq!(b.phi_bar, rat_int(7));
    }

    #[test]
    fn karp_agrees_with_enumeration_on_random_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let mut tested = 0;
        while tested < 150 {
            let n = rng.gen_range(1..=5);
            let mut arrows = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    if rng.gen_bool(0.5) {
                        arrows.push((a, b));
                    }
                }
            }
            let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
            let g = Digraph::from_indices(names, arrows);
            let phi = PotentialPhi::new(
                &g,
                g.arrows()
                    .map(|ab| {
                        (
                            ab,
                            rat(rng.gen_range(-5..=5), *[1, 2, 3].get(rng.gen_range(0..3)).unwrap()),
                        )
                    })
                    .collect(),
            );
            let Ok(rep) = maximize(&g, &phi) else { continue };
            tested += 1;
            // oracle: enumerate all circuits
            let circuits = g.elementary_circuits();
            let mut best: Option<Rat> = None;
            let mut arrows_best: BTreeSet<(usize, usize)> = BTreeSet::new();
            for c in &circuits {
                let mean = phi.path_sum(c).unwrap() / rat_int(c.len() as i64);
                match &best {
                    Some(b) if mean < *b => {}
                    Some(b) if mean == *b => arrows_best.extend(c.arrows()),
                    _ => {
                        best = Some(mean);
                        arrows_best = c.arrows().collect();
                    }
                }
            }
            assert_eq!(rep.phi_bar, best.unwrap());
            assert_eq!(rep.maximizing_arrows, arrows_best);
        }
    }

    #[test]
    fn normalized_xbar_circuits_sum_to_zero() {
        let (g, phi, psi) = example1();
        let sys = normalize(&g, &phi, &psi).unwrap();
        let xbar = &sys.report.maximizing_subgraph;
        for c in xbar.elementary_circuits() {
            assert_eq!(sys.phi.path_sum(&c).unwrap(), Rat::zero());
        }
        assert!(sys.report.phi_g.clone().unwrap() < Rat::zero());
    }

    #[test]
    fn normalize_full_shift_with_constant_psi() {
        // psi = log 2 on the full 2-shift, phi = 0: P = log 4
        let names: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let arrows: Vec<_> = (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).collect();
        let g = Digraph::from_indices(names, arrows);
        let phi = PotentialPhi::constant(&g, Rat::zero());
        let psi = PotentialPsi::constant(&g, 2f64.ln());
        let sys = normalize(&g, &phi, &psi).unwrap();
        assert!((sys.psi_pressure_on_xbar - 4f64.ln()).abs() < 1e-10);
        for (_, v) in sys.psi.iter() {
            assert!((v - (-(2f64.ln()))).abs() < 1e-10);
        }
    }
}
