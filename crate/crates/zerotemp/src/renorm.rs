//! Heavy components, the renormalized SFT and potentials, and the finite
//! recursion computing the zero-temperature limit sum_J alpha_J nu_J.
//!
//! One renormalization step coarse-grains a normalized system to its heavy
//! components: the new symbols are the components, the new phi records the
//! optimal cost of excursions between them (central term + transition term),
//! and the new psi records the entropy collected along maximizing excursions
//! (eigenvector factors, path weights and return-series pressures).  The
//! recursion terminates in finitely many steps at a singleton alphabet; the
//! limit weights alpha_J are then read off by back-propagating the next
//! level's single-symbol masses.

use crate::graph::{Digraph, PathRec, Symbol};
use crate::perron::{self, Eigensystem, MarkovGibbsMeasure, TransferMatrix};
use crate::potentials::{self, NormalizedSystem, PotentialPhi, PotentialPsi, Rat};
use crate::{Error, Result, EIG_TOL, EPS_RHO};
use num::Zero;
use std::collections::{BTreeMap, HashSet};

/// One transitive component of X-bar with its pressure and Markov measure.
#[derive(Debug, Clone)]
pub struct HeavyComponent {
    pub vertices: Vec<Symbol>,
    pub arrows: Vec<(Symbol, Symbol)>,
    /// log rho of the psi-matrix restricted to the component; 0 (within
    /// eps_rho) exactly for heavy components of a normalized system.
    pub pressure: f64,
    pub eig: Eigensystem,
    pub measure: MarkovGibbsMeasure,
}

impl HeavyComponent {
    pub fn local_of(&self, v: Symbol) -> Option<usize> {
        self.vertices.iter().position(|&x| x == v)
    }
}

/// Transitive components of X-bar ordered heavy-first; among equals by
/// ascending size, then smallest vertex.
#[derive(Debug, Clone)]
pub struct HeavyDecomposition {
    pub components: Vec<HeavyComponent>,
    /// Number of heavy components (the first `n_phi` entries).
    pub n_phi: usize,
    /// E-bar_phi: union of the heavy components' arrow sets.
    pub heavy_arrows: HashSet<(Symbol, Symbol)>,
    /// Union of the heavy components' vertex sets.
    pub heavy_vertices: HashSet<Symbol>,
    /// Near-tie diagnostics (pressures within 10*eps_rho of the cut).
    pub warnings: Vec<String>,
}

/// Transitive components of the maximizing subshift with their psi-pressures
/// and measures, classified by pressure maximality.
pub fn heavy_components(sys: &NormalizedSystem) -> Result<HeavyDecomposition> {
    let xbar = &sys.report.maximizing_subgraph;
    let mut comps = Vec::new();
    for comp in xbar.decompose().transitive() {
        let matrix =
            TransferMatrix::restricted(&sys.graph, &sys.psi, &comp.vertices, &comp.arrows);
        let eig = perron::eigensystem(&matrix, EIG_TOL)?;
        let pressure = eig.log_rho;
        let measure = MarkovGibbsMeasure { matrix: matrix.clone(), eig: eig.clone() };
        comps.push(HeavyComponent {
            vertices: comp.vertices.clone(),
            arrows: comp.arrows.clone(),
            pressure,
            eig,
            measure,
        });
    }
    let max_p = comps.iter().map(|c| c.pressure).fold(f64::NEG_INFINITY, f64::max);
    let heavy = |c: &HeavyComponent| c.pressure >= max_p - EPS_RHO;
    let mut warnings = Vec::new();
    for c in &comps {
        let gap = max_p - c.pressure;
        if gap > EPS_RHO && gap < 10.0 * EPS_RHO {
            warnings.push(format!(
                "component at vertex {} is non-heavy by a margin of only {gap:.3e}",
                c.vertices[0]
            ));
        }
    }
    comps.sort_by_key(|c| (!heavy(c), c.vertices.len(), c.vertices[0]));
    let n_phi = comps.iter().take_while(|c| heavy(c)).count();
    let heavy_arrows = comps[..n_phi]
        .iter()
        .flat_map(|c| c.arrows.iter().copied())
        .collect();
    let heavy_vertices = comps[..n_phi]
        .iter()
        .flat_map(|c| c.vertices.iter().copied())
        .collect();
    Ok(HeavyDecomposition { components: comps, n_phi, heavy_arrows, heavy_vertices, warnings })
}

/// Central terms phi_ell of one heavy component: phi_ell(c_J) = 0 at the
/// smallest vertex, accumulated exactly along internal arrows.
#[derive(Debug, Clone)]
pub struct CentralTerms {
    pub central_vertex: Symbol,
    pub phi_ell: BTreeMap<Symbol, Rat>,
}

/// Exact-rational accumulation of phi over a spanning tree of the heavy
/// component, verified against every internal arrow (all internal circuits
/// must have exact phi-sum 0).
pub fn central_terms(
    comp: &HeavyComponent,
    phi: &PotentialPhi,
    comp_index: usize,
    central_vertex: Symbol,
) -> Result<CentralTerms> {
    let mut phi_ell: BTreeMap<Symbol, Rat> = BTreeMap::new();
    phi_ell.insert(central_vertex, Rat::zero());
    let mut queue = std::collections::VecDeque::from([central_vertex]);
    while let Some(a) = queue.pop_front() {
        let base = phi_ell[&a].clone();
        for &(x, y) in &comp.arrows {
            if x != a || phi_ell.contains_key(&y) {
                continue;
            }
            phi_ell.insert(y, &base + phi.get(x, y).unwrap());
            queue.push_back(y);
        }
    }
    for &(a, b) in &comp.arrows {
        let expected = &phi_ell[&a] + phi.get(a, b).unwrap();
        if phi_ell[&b] != expected {
            return Err(Error::InconsistentHeavyComponent(comp_index));
        }
    }
    Ok(CentralTerms { central_vertex, phi_ell })
}

/// Excursion paths a -> c: every arrow outside E-bar_phi, every strictly
/// interior vertex outside all heavy components.  For a = c only genuine
/// closed excursions of length >= 1 qualify.
fn excursion_paths(
    graph: &Digraph,
    heavy: &HeavyDecomposition,
    a: Symbol,
    c: Symbol,
) -> Vec<PathRec> {
    if a == c {
        graph.elementary_closed_paths(a, &heavy.heavy_arrows, &heavy.heavy_vertices)
    } else {
        graph.elementary_paths(a, c, &heavy.heavy_arrows, &heavy.heavy_vertices)
    }
}

/// Transition pressure of one excursion path: log of the summed return
/// series of its interior vertices in the psi-matrix restricted to the
/// transitive components of X-bar; 0 for direct arrows (empty excursion).
pub fn transition_pressure(mbar: &TransferMatrix, path: &PathRec) -> Result<f64> {
    let interior = path.interior();
    if interior.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for &b in interior {
        total += perron::return_series(mbar, b)?;
    }
    Ok(total.ln())
}

/// The psi-matrix restricted to all transitive components of X-bar (heavy
/// and non-heavy), on the full vertex set so local = global indices.
pub fn mbar_psi(sys: &NormalizedSystem) -> TransferMatrix {
    let xbar = &sys.report.maximizing_subgraph;
    let arrows: Vec<_> = xbar
        .decompose()
        .transitive()
        .flat_map(|c| c.arrows.clone())
        .collect();
    let vertices: Vec<_> = (0..sys.graph.n()).collect();
    TransferMatrix::restricted(&sys.graph, &sys.psi, &vertices, &arrows)
}

/// The coarse-grained system over the heavy alphabet.
#[derive(Debug, Clone)]
pub struct RenormalizedSystem {
    pub graph: Digraph,
    pub phi: PotentialPhi,
    pub psi: PotentialPsi,
    /// Exact argmax vertex pairs per renormalized arrow.
    pub argmax_pairs: BTreeMap<(usize, usize), Vec<(Symbol, Symbol)>>,
}

/// Builds X', phi', psi' and the argmax data from a normalized system and
/// its heavy decomposition.
pub fn renormalized_system(
    sys: &NormalizedSystem,
    heavy: &HeavyDecomposition,
) -> Result<RenormalizedSystem> {
    let n_phi = heavy.n_phi;
    let mbar = mbar_psi(sys);
    let centrals: Vec<CentralTerms> = heavy.components[..n_phi]
        .iter()
        .enumerate()
        .map(|(j, c)| central_terms(c, &sys.phi, j, c.vertices[0]))
        .collect::<Result<_>>()?;

    let mut arrows = Vec::new();
    let mut phi_values = BTreeMap::new();
    let mut psi_values = BTreeMap::new();
    let mut argmax_pairs = BTreeMap::new();

    for j in 0..n_phi {
        for k in 0..n_phi {
            let comp_j = &heavy.components[j];
            let comp_k = &heavy.components[k];
            // phi'(J,K) = max over (a,c) of phi_ell(a) + phi_r(a,c) - phi_ell(c)
            let mut best: Option<Rat> = None;
            let mut best_pairs: Vec<(Symbol, Symbol, Vec<PathRec>)> = Vec::new();
            for &a in &comp_j.vertices {
                for &c in &comp_k.vertices {
                    let paths = excursion_paths(&sys.graph, heavy, a, c);
                    if paths.is_empty() {
                        continue;
                    }
                    // transition term: exact max of path phi-sums
                    let sums: Vec<Rat> = paths
                        .iter()
                        .map(|p| sys.phi.path_sum(p))
                        .collect::<Result<_>>()?;
                    let phi_r = sums.iter().max().unwrap().clone();
                    let maximizing: Vec<PathRec> = paths
                        .into_iter()
                        .zip(&sums)
                        .filter(|(_, s)| **s == phi_r)
                        .map(|(p, _)| p)
                        .collect();
                    let value =
                        &centrals[j].phi_ell[&a] + &phi_r - &centrals[k].phi_ell[&c];
                    match &best {
                        Some(b) if value < *b => {}
                        Some(b) if value == *b => best_pairs.push((a, c, maximizing)),
                        _ => {
                            best = Some(value);
                            best_pairs = vec![(a, c, maximizing)];
                        }
                    }
                }
            }
            let Some(phi_prime) = best else { continue };
            // psi'(J,K) = log sum over argmax pairs of
            //   w_J(a) v_K(c) * sum over maximizing paths of exp(psi + P_psi);
            // the departure vertex carries the left eigenvector and the
            // arrival vertex the right one, the only pairing that makes psi'
            // coboundary-covariant (a psi-coboundary then conjugates the
            // effective matrix diagonally, leaving the next-level measure
            // unchanged)
            let mut total = 0.0;
            for (a, c, paths) in &best_pairs {
                let va = comp_j.eig.w[comp_j.local_of(*a).unwrap()];
                let wc = comp_k.eig.v[comp_k.local_of(*c).unwrap()];
                let mut path_sum = 0.0;
                for p in paths {
                    let psi_p = sys.psi.path_sum(p)?;
                    let pp = transition_pressure(&mbar, p)?;
                    path_sum += (psi_p + pp).exp();
                }
                total += va * wc * path_sum;
            }
            arrows.push((j, k));
            phi_values.insert((j, k), phi_prime);
            psi_values.insert((j, k), total.ln());
            argmax_pairs.insert((j, k), best_pairs.iter().map(|(a, c, _)| (*a, *c)).collect());
        }
    }

    let names: Vec<String> = (1..=n_phi).map(|i| i.to_string()).collect();
    let graph = Digraph::from_indices(names, arrows);
    let phi = PotentialPhi::new(&graph, phi_values);
    let psi = PotentialPsi::new(&graph, psi_values);
    Ok(RenormalizedSystem { graph, phi, psi, argmax_pairs })
}

/// The renormalized SFT alone (arrow existence over the heavy alphabet).
pub fn renormalized_sft(sys: &NormalizedSystem, heavy: &HeavyDecomposition) -> Result<Digraph> {
    Ok(renormalized_system(sys, heavy)?.graph)
}

/// One full renormalization step: build (X', phi', psi'), require X'
/// irreducible, re-run maximize + normalize.
pub fn renormalize(
    sys: &NormalizedSystem,
    heavy: &HeavyDecomposition,
) -> Result<(RenormalizedSystem, NormalizedSystem)> {
    let rsys = renormalized_system(sys, heavy)?;
    if !rsys.graph.is_irreducible() {
        let dump: Vec<String> = rsys
            .graph
            .arrows()
            .map(|(a, b)| format!("({},{})", a + 1, b + 1))
            .collect();
        return Err(Error::RenormalizedNotIrreducible(dump.join(" ")));
    }
    let next = potentials::normalize(&rsys.graph, &rsys.phi, &rsys.psi)?;
    Ok((rsys, next))
}

/// One rung of the renormalization ladder.
#[derive(Debug, Clone)]
pub struct Level {
    pub sys: NormalizedSystem,
    pub heavy: HeavyDecomposition,
    pub renormalized: Option<RenormalizedSystem>,
}

/// The computed zero-temperature limit.
#[derive(Debug, Clone)]
pub struct ZeroTemperatureLimit {
    pub levels: Vec<Level>,
    /// Weight per level-0 heavy component (indices into
    /// `levels[0].heavy.components[..n_phi]`).
    pub alpha: Vec<f64>,
    /// Level-0 heavy components with weight 0.
    pub eliminated: Vec<usize>,
}

/// Runs the full recursion and back-propagates the weights.
pub fn zero_temperature_limit(
    graph: &Digraph,
    phi: &PotentialPhi,
    psi: &PotentialPsi,
) -> Result<ZeroTemperatureLimit> {
    let cap = 2 * graph.n();
    let mut sys = potentials::normalize(graph, phi, psi)?;
    let mut levels: Vec<Level> = Vec::new();
    loop {
        let heavy = heavy_components(&sys)?;
        let singleton = sys.graph.n() == 1;
        levels.push(Level { sys: sys.clone(), heavy, renormalized: None });
        if singleton {
            break;
        }
        if levels.len() > cap {
            return Err(Error::IterationCap(cap));
        }
        let heavy_ref = levels.last().unwrap().heavy.clone();
        let rsys = renormalized_system(&sys, &heavy_ref)?;
        levels.last_mut().unwrap().renormalized = Some(rsys.clone());
        if rsys.graph.n() == 1 && !rsys.graph.has_arrow(0, 0) {
            // loopless singleton: the unique heavy component absorbs
            // everything and there is nothing left to renormalize
            break;
        }
        if !rsys.graph.is_irreducible() {
            let dump: Vec<String> = rsys
                .graph
                .arrows()
                .map(|(a, b)| format!("({},{})", a + 1, b + 1))
                .collect();
            return Err(Error::RenormalizedNotIrreducible(dump.join(" ")));
        }
        sys = potentials::normalize(&rsys.graph, &rsys.phi, &rsys.psi)?;
    }

    // back-propagation: alpha at the top level is 1 on its single heavy
    // component; below, symbol J inherits mass through the next level's
    // measure of the heavy component containing it.
    let top = levels.last().unwrap();
    let mut alpha = vec![1.0 / top.heavy.n_phi as f64; top.heavy.n_phi];
    debug_assert_eq!(top.heavy.n_phi, 1);
    for idx in (0..levels.len() - 1).rev() {
        let cur_nphi = levels[idx].heavy.n_phi;
        let next = &levels[idx + 1];
        let mut a = vec![0.0; cur_nphi];
        for (j, aj) in a.iter_mut().enumerate() {
            // j is symbol j of the next level's graph
            for (k, comp) in next.heavy.components[..next.heavy.n_phi].iter().enumerate() {
                if comp.vertices.contains(&j) {
                    *aj = alpha[k] * comp.measure.cylinder(&[j]);
                }
            }
        }
        alpha = a;
    }
    let eliminated = alpha
        .iter()
        .enumerate()
        .filter(|(_, &a)| a == 0.0)
        .map(|(j, _)| j)
        .collect();
    Ok(ZeroTemperatureLimit { levels, alpha, eliminated })
}

impl ZeroTemperatureLimit {
    pub fn level0(&self) -> &Level {
        &self.levels[0]
    }

    /// Mass of a cylinder word (over the level-0 alphabet) under the limit
    /// measure sum_J alpha_J nu_J.
    pub fn cylinder(&self, word: &[Symbol]) -> Result<f64> {
        let n = self.level0().sys.graph.n();
        if let Some(&bad) = word.iter().find(|&&s| s >= n) {
            return Err(Error::SymbolNotInAlphabet(bad.to_string()));
        }
        let heavy = &self.level0().heavy;
        let mut total = 0.0;
        for (j, comp) in heavy.components[..heavy.n_phi].iter().enumerate() {
            total += self.alpha[j] * comp.measure.cylinder(word);
        }
        Ok(total)
    }

    /// Per-symbol limit masses over the level-0 alphabet.
    pub fn symbol_masses(&self) -> Vec<f64> {
        (0..self.level0().sys.graph.n())
            .map(|s| self.cylinder(&[s]).unwrap())
            .collect()
    }
}
