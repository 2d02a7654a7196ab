//! Nonnegative-matrix engine: transfer matrices built from potentials,
//! Perron-Frobenius eigensystems for primitive and periodic irreducible
//! patterns with Birkhoff-contraction error control, Markov/Gibbs measures
//! with cylinder evaluation, pressures and return series.
//!
//! All entries are carried as logarithms and matrices are renormalized by a
//! uniform shift before dense work, so inverse temperatures up to several
//! hundred neither overflow nor underflow.  The dominant eigenpair is found
//! by repeated squaring of the (scaled) matrix; the Birkhoff bound
//! tau^{floor(m/l)} * l * d(x, Fx) / (1 - tau) certifies the exponent.
//!
//! Matrices built from beta*phi + psi carry their log-entries as exact
//! rationals alongside the f64 copies.  At large beta the top of the
//! spectrum can contain clusters whose eigenvalues agree to far below
//! double precision while the mixing between them is decided by couplings
//! that are smaller still; rounding the entries to f64 breaks those exact
//! ties and silently selects the wrong eigenvector.  Such matrices are
//! therefore solved in adaptive high precision (see `bigfloat`), with the
//! Hilbert projective diameter of the columns of the iterated power as a
//! rigorous a posteriori error bound on the eigenvector.

use crate::bigfloat::Bf;
use crate::graph::{Component, Digraph, Symbol};
use crate::potentials::{rat_to_f64, PotentialPhi, PotentialPsi, Rat};
use crate::{Error, Result, EIG_TOL, EPS_RHO};
use nalgebra::DMatrix;
use num::FromPrimitive;
use std::collections::BTreeMap;

/// Weighted pattern matrix; strictly positive on arrows, zero elsewhere.
/// Vertex indices are local; `global` maps them back to the host alphabet
/// (identity for full-system matrices).  `exact_log` is present when the
/// log-entries are known as exact rationals (beta-dependent matrices).
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    pattern: Digraph,
    log_entries: BTreeMap<(usize, usize), f64>,
    global: Vec<Symbol>,
    exact_log: Option<BTreeMap<(usize, usize), Rat>>,
}

impl TransferMatrix {
    /// Full-system transfer matrix with entries exp(beta*phi + psi).
    pub fn new(graph: &Digraph, phi: &PotentialPhi, psi: &PotentialPsi, beta: f64) -> Self {
        let beta_rat = Rat::from_f64(beta).expect("beta must be finite");
        let mut log_entries = BTreeMap::new();
        let mut exact = BTreeMap::new();
        for (a, b) in graph.arrows() {
            let p = phi.get(a, b).unwrap();
            let s = psi.get(a, b).unwrap();
            log_entries.insert((a, b), beta * rat_to_f64(p) + s);
            let l = &beta_rat * p + Rat::from_f64(s).expect("psi must be finite");
            exact.insert((a, b), l);
        }
        TransferMatrix {
            pattern: graph.clone(),
            log_entries,
            global: (0..graph.n()).collect(),
            exact_log: Some(exact),
        }
    }

    /// psi-only matrix (beta = 0) restricted to a vertex/arrow subset, with
    /// local reindexing.
    pub fn restricted(
        graph: &Digraph,
        psi: &PotentialPsi,
        vertices: &[Symbol],
        arrows: &[(Symbol, Symbol)],
    ) -> Self {
        let local: BTreeMap<Symbol, usize> =
            vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let names = vertices.iter().map(|&v| graph.name(v).to_string()).collect();
        let idx_arrows: Vec<_> = arrows.iter().map(|&(a, b)| (local[&a], local[&b])).collect();
        let log_entries = arrows
            .iter()
            .map(|&(a, b)| ((local[&a], local[&b]), psi.get(a, b).unwrap()))
            .collect();
        TransferMatrix {
            pattern: Digraph::from_indices(names, idx_arrows),
            log_entries,
            global: vertices.to_vec(),
            exact_log: None,
        }
    }

    /// Arbitrary log-weighted matrix over an explicit pattern.
    pub fn from_log_entries(
        pattern: Digraph,
        log_entries: BTreeMap<(usize, usize), f64>,
    ) -> Self {
        let global = (0..pattern.n()).collect();
        TransferMatrix { pattern, log_entries, global, exact_log: None }
    }

    pub fn n(&self) -> usize {
        self.pattern.n()
    }

    pub fn pattern(&self) -> &Digraph {
        &self.pattern
    }

    pub fn global(&self) -> &[Symbol] {
        &self.global
    }

    pub fn local_of(&self, global: Symbol) -> Option<usize> {
        self.global.iter().position(|&g| g == global)
    }

    pub fn log_entry(&self, a: usize, b: usize) -> Option<f64> {
        self.log_entries.get(&(a, b)).copied()
    }

    /// Dense scaled matrix exp(log - shift) and the shift used.
    fn scaled_dense(&self) -> (DMatrix<f64>, f64) {
        let shift = self
            .log_entries
            .values()
            .fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for (&(a, b), &lv) in &self.log_entries {
            m[(a, b)] = (lv - shift).exp();
        }
        (m, shift)
    }
}

/// Perron data of an irreducible transfer matrix.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    /// Perron root (may overflow to infinity for extreme exponents; use
    /// `log_rho` for arithmetic).
    pub rho: f64,
    pub log_rho: f64,
    /// Right eigenvector, strictly positive, local indexing.
    pub v: Vec<f64>,
    /// Left eigenvector; normalized so that w'v = 1 and |v|_2 = |w|_2.
    pub w: Vec<f64>,
    /// Pattern period p.
    pub period: usize,
    /// The p cyclic classes; arrows map class i into class i+1 mod p.
    pub cyclic_blocks: Vec<Vec<usize>>,
    /// Primitivity index l of the power-iterated block pattern.
    pub primitivity_index: usize,
    /// Birkhoff contraction coefficient of the l-th power (1.0 when the
    /// certificate degenerated and the residual fallback was used).
    pub birkhoff_tau: f64,
    /// A posteriori bound on max of the scaled relative eigen-residuals.
    pub certified_residual: f64,
}

/// Hilbert projective distance between positive vectors.
fn projective_distance(x: &[f64], y: &[f64]) -> f64 {
    let mut max_ratio = f64::NEG_INFINITY;
    let mut min_ratio = f64::INFINITY;
    for (a, b) in x.iter().zip(y) {
        let r = a.ln() - b.ln();
        max_ratio = max_ratio.max(r);
        min_ratio = min_ratio.min(r);
    }
    max_ratio - min_ratio
}

/// Birkhoff contraction coefficient of a strictly positive matrix:
/// tau = (sqrt(D) - 1) / (sqrt(D) + 1) with D the maximal cross-ratio.
fn birkhoff_coefficient(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut d: f64 = 1.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let num = m[(i, k)] * m[(j, l)];
                    let den = m[(j, k)] * m[(i, l)];
                    if den > 0.0 && num > den * d {
                        d = num / den;
                    }
                }
            }
        }
    }
    let s = d.sqrt();
    (s - 1.0) / (s + 1.0)
}

/// Smallest l with (pattern of m)^l strictly positive, capped by the
/// Wielandt bound (n-1)^2 + 1.  Returns None if the cap is hit (matrix not
/// primitive or pathologically sparse).
fn primitivity_index(m: &DMatrix<f64>) -> Option<usize> {
    let n = m.nrows();
    let cap = (n - 1) * (n - 1) + 1;
    let mut pat = m.map(|x| if x > 0.0 { 1.0f64 } else { 0.0 });
    let mut power = 1usize;
    let base = pat.clone();
    while power <= cap {
        if pat.iter().all(|&x| x > 0.0) {
            return Some(power);
        }
        // multiply by the base pattern; saturate to {0,1}
        pat = (&pat * &base).map(|x| if x > 0.0 { 1.0 } else { 0.0 });
        power += 1;
    }
    None
}

/// Dominant eigenpair of a primitive nonnegative block by repeated squaring
/// with per-step sup renormalization.  The number of effective matrix-power
/// steps 2^k is chosen so the Birkhoff bound drops below `tol`; a residual
/// stop covers the degenerate case tau ~ 1.
fn primitive_eigenpair(block: &DMatrix<f64>, tol: f64) -> (f64, Vec<f64>, Vec<f64>, usize, f64) {
    let n = block.nrows();
    if n == 1 {
        return (block[(0, 0)], vec![1.0], vec![1.0], 1, 0.0);
    }
    let ell = primitivity_index(block);
    let tau = match ell {
        Some(l) => {
            // tau of the l-th power (strictly positive)
            let mut p = DMatrix::identity(n, n);
            for _ in 0..l {
                p = &p * block;
                let s = p.amax();
                p /= s;
            }
            birkhoff_coefficient(&p)
        }
        None => 1.0,
    };
    let ell = ell.unwrap_or((n - 1) * (n - 1) + 1);

    // initial projective step from the uniform vector
    let ones = vec![1.0; n];
    let step: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| block[(i, j)]).sum::<f64>().max(f64::MIN_POSITIVE))
        .collect();
    let d0 = projective_distance(&step, &ones);

    // planned power exponent from the Birkhoff bound
    let planned: f64 = if tau < 1.0 - 1e-12 && d0 > 0.0 {
        let need = (ell as f64) * d0 / (tol * (1.0 - tau));
        if need > 1.0 {
            (ell as f64) * need.ln() / (1.0 / tau).ln()
        } else {
            1.0
        }
    } else {
        f64::INFINITY
    };

    // squarings: C = block^{2^k}
    let mut c = block.clone();
    let s = c.amax();
    c /= s;
    let mut exponent: f64 = 1.0;
    let max_squarings = 200;
    for _ in 0..max_squarings {
        if exponent >= planned {
            break;
        }
        let next = &c * &c;
        let s = next.amax();
        if !(s.is_finite() && s > 0.0) {
            break;
        }
        c = next / s;
        exponent *= 2.0;
        // early stop (and fallback when tau ~ 1): the columns of the power
        // have projectively collapsed onto the eigendirection
        let col0: Vec<f64> = (0..n).map(|i| c[(i, 0)].max(f64::MIN_POSITIVE)).collect();
        let colsum: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| c[(i, j)]).sum::<f64>().max(f64::MIN_POSITIVE))
            .collect();
        if projective_distance(&col0, &colsum) < tol * 1e-2 {
            break;
        }
    }

    let mut v: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| c[(i, j)]).sum::<f64>())
        .collect();
    let mut w: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| c[(i, j)]).sum::<f64>())
        .collect();
    normalize_sup(&mut v);
    normalize_sup(&mut w);
    // one polish step with the block itself tightens the residual
    for _ in 0..2 {
        let mut nv: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| block[(i, j)] * v[j]).sum())
            .collect();
        let mut nw: Vec<f64> = (0..n)
            .map(|j| (0..n).map(|i| w[i] * block[(i, j)]).sum())
            .collect();
        normalize_sup(&mut nv);
        normalize_sup(&mut nw);
        v = nv;
        w = nw;
    }
    let wv: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
    let wav: f64 = (0..n)
        .map(|i| (0..n).map(|j| w[i] * block[(i, j)] * v[j]).sum::<f64>())
        .sum();
    let rho = wav / wv;
    (rho, v, w, ell, tau)
}

fn normalize_sup(x: &mut [f64]) {
    let m = x.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if m > 0.0 {
        for xi in x {
            *xi /= m;
        }
    }
}

/// Rescale a high-precision matrix so its largest entry has log2 in [0, 1):
/// a pure exponent shift, no rounding.
fn hp_rescale(c: &mut [Bf]) {
    let top = c.iter().map(Bf::log2).fold(f64::NEG_INFINITY, f64::max);
    let shift = -(top.floor() as i64);
    for x in c.iter_mut() {
        x.shift_exp(shift);
    }
}

fn hp_matmul(a: &[Bf], b: &[Bf], n: usize, prec: u64) -> Vec<Bf> {
    let mut out = vec![Bf::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            if a[i * n + k].is_zero() {
                continue;
            }
            for j in 0..n {
                if b[k * n + j].is_zero() {
                    continue;
                }
                let p = a[i * n + k].mul(&b[k * n + j], prec);
                out[i * n + j] = out[i * n + j].add(&p, prec);
            }
        }
    }
    out
}

/// Cheap f64 estimate of the largest projective spread among the columns
/// (and rows) of a strictly positive matrix; saturates near 1e-13 because
/// the logs are doubles.
fn hp_diameter_estimate(c: &[Bf], n: usize) -> f64 {
    let logs: Vec<f64> = c.iter().map(Bf::log2).collect();
    let mut d = 0.0f64;
    for j in 1..n {
        let (mut cmax, mut cmin) = (f64::NEG_INFINITY, f64::INFINITY);
        let (mut rmax, mut rmin) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..n {
            let rc = logs[i * n + j] - logs[i * n];
            cmax = cmax.max(rc);
            cmin = cmin.min(rc);
            let rr = logs[j * n + i] - logs[i];
            rmax = rmax.max(rr);
            rmin = rmin.min(rr);
        }
        d = d.max(cmax - cmin).max(rmax - rmin);
    }
    d * std::f64::consts::LN_2
}

/// Certified bound on the Hilbert projective diameter of the columns of a
/// strictly positive matrix: 2 max_j d(col_j, col_0), with each distance
/// evaluated by exact cross-product comparisons so it stays meaningful far
/// below f64 resolution.  `transpose` measures the rows instead.
fn hp_certified_diameter(c: &[Bf], n: usize, prec: u64, transpose: bool) -> f64 {
    let at = |i: usize, j: usize| -> &Bf {
        if transpose {
            &c[j * n + i]
        } else {
            &c[i * n + j]
        }
    };
    let mut worst = 0.0f64;
    for j in 1..n {
        // extremal rows of the ratio col_j / col_0
        let mut imax = 0;
        let mut imin = 0;
        for i in 1..n {
            if Bf::ratio_lt(at(imax, j), at(imax, 0), at(i, j), at(i, 0)) {
                imax = i;
            }
            if Bf::ratio_lt(at(i, j), at(i, 0), at(imin, j), at(imin, 0)) {
                imin = i;
            }
        }
        // d(col_j, col_0) = log(1 + x) <= x with
        // x = (C[imax,j] C[imin,0] - C[imin,j] C[imax,0]) / (C[imin,j] C[imax,0])
        let hi = at(imax, j).mul(at(imin, 0), prec);
        let lo = at(imin, j).mul(at(imax, 0), prec);
        let x = hi.sub(&lo, prec).div(&lo, prec).to_f64();
        worst = worst.max(x);
    }
    2.0 * worst
}

/// High-precision Perron eigensystem from exact rational log-entries.
///
/// The matrix is reconstituted at a precision adapted to its logarithmic
/// spread, made primitive as B = E + E^2 (same Perron vectors; any
/// irreducible pattern becomes aperiodic), and squared until the projective
/// hull of the columns of B^(2^k) has certified diameter below 1e-32.  The
/// Perron direction lies inside that hull, so the extracted vectors carry a
/// rigorous relative error bound regardless of how degenerate the top of
/// the spectrum is.
fn eigensystem_hp(m: &TransferMatrix, exact: &BTreeMap<(usize, usize), Rat>) -> Result<Eigensystem> {
    let n = m.n();
    let dec = m.pattern.decompose();
    let transitive: Vec<_> = dec.transitive().collect();
    if transitive.len() != 1 || transitive[0].vertices.len() != n {
        return Err(Error::NotIrreducible);
    }
    let comp = transitive[0];
    let classes = comp.cyclic_partition.clone();
    let period = comp.period;

    let shift_rat = exact.values().max().unwrap().clone();
    let shift = rat_to_f64(&shift_rat);
    if n == 1 {
        let log_rho = shift;
        return Ok(Eigensystem {
            rho: log_rho.exp(),
            log_rho,
            v: vec![1.0],
            w: vec![1.0],
            period: 1,
            cyclic_blocks: classes,
            primitivity_index: 1,
            birkhoff_tau: 0.0,
            certified_residual: 0.0,
        });
    }
    let spread = exact
        .values()
        .map(|l| shift - rat_to_f64(l))
        .fold(0.0f64, f64::max);
    // deep enough for every eigenvector-mixing scale: path products reach
    // down to exp(-n * spread), and second-order splittings to twice that
    let prec = (256.0 + 3.0 * n as f64 * spread * std::f64::consts::LOG2_E)
        .ceil()
        .min(65536.0) as u64;

    let mut emat = vec![Bf::zero(); n * n];
    for (&(a, b), l) in exact {
        emat[a * n + b] = Bf::exp_rat(&(l.clone() - &shift_rat), prec);
    }
    // B = E + E^2 is primitive for any irreducible pattern and shares the
    // Perron vectors of E (monotone spectral map z -> z + z^2)
    let mut bmat = hp_matmul(&emat, &emat, n, prec);
    for (x, e) in bmat.iter_mut().zip(&emat) {
        *x = x.add(e, prec);
    }
    hp_rescale(&mut bmat);

    let kmax = prec as usize + 64;
    let mut c = bmat;
    let mut certified = f64::INFINITY;
    for _ in 0..kmax {
        c = hp_matmul(&c, &c, n, prec);
        hp_rescale(&mut c);
        if c.iter().all(Bf::is_positive) {
            // the f64 estimate saturates around 1e-13; once it is small the
            // Birkhoff contraction is quadratic, so the certified bound
            // closes the remaining gap within a handful of squarings
            if hp_diameter_estimate(&c, n) < 1e-2 {
                certified = hp_certified_diameter(&c, n, prec, false)
                    .max(hp_certified_diameter(&c, n, prec, true));
                if certified < 1e-32 {
                    break;
                }
            }
        }
    }

    // extremal-hull representatives: row sums for v, column sums for w
    let mut vb = vec![Bf::zero(); n];
    let mut wb = vec![Bf::zero(); n];
    for i in 0..n {
        for j in 0..n {
            vb[i] = vb[i].add(&c[i * n + j], prec);
            wb[j] = wb[j].add(&c[i * n + j], prec);
        }
    }
    // Rayleigh quotient on the scaled original matrix
    let mut wv = Bf::zero();
    let mut wav = Bf::zero();
    for i in 0..n {
        wv = wv.add(&wb[i].mul(&vb[i], prec), prec);
        for j in 0..n {
            if !emat[i * n + j].is_zero() {
                let t = wb[i].mul(&emat[i * n + j], prec).mul(&vb[j], prec);
                wav = wav.add(&t, prec);
            }
        }
    }
    let rho_scaled = wav.div(&wv, prec);
    let log_rho = shift + rho_scaled.ln(prec);

    // down-convert sup-normalized vectors; components more than ~2^-1180
    // below the sup round to zero, which is far outside every tolerance
    let arg_sup = |x: &[Bf]| -> usize {
        (0..x.len())
            .max_by(|&a, &b| x[a].log2().partial_cmp(&x[b].log2()).unwrap())
            .unwrap()
    };
    let vi = arg_sup(&vb);
    let wi = arg_sup(&wb);
    let mut v: Vec<f64> = vb.iter().map(|x| x.div(&vb[vi], prec).to_f64()).collect();
    let mut w: Vec<f64> = wb.iter().map(|x| x.div(&wb[wi], prec).to_f64()).collect();

    // normalization: w'v = 1 with |v|_2 = |w|_2
    let nv: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nw: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let wvf: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
    let sv = (nw / (nv * wvf)).sqrt();
    let sw = (nv / (nw * wvf)).sqrt();
    for x in &mut v {
        *x *= sv;
    }
    for x in &mut w {
        *x *= sw;
    }

    // descriptive pattern data (the error certificate above does not use it)
    let (a_dense, _) = m.scaled_dense();
    let ell = primitivity_index(&a_dense);
    let tau = match ell {
        Some(l) => {
            let mut p = DMatrix::identity(n, n);
            for _ in 0..l {
                p = &p * &a_dense;
                let s = p.amax();
                if s > 0.0 {
                    p /= s;
                }
            }
            birkhoff_coefficient(&p)
        }
        None => 1.0,
    };

    Ok(Eigensystem {
        rho: log_rho.exp(),
        log_rho,
        v,
        w,
        period,
        cyclic_blocks: classes,
        primitivity_index: ell.unwrap_or((n - 1) * (n - 1) + 1),
        birkhoff_tau: tau,
        certified_residual: certified,
    })
}

/// Perron-Frobenius eigensystem of an irreducible transfer matrix.
pub fn eigensystem(m: &TransferMatrix, tol: f64) -> Result<Eigensystem> {
    if let Some(exact) = &m.exact_log {
        return eigensystem_hp(m, exact);
    }
    let n = m.n();
    let dec = m.pattern.decompose();
    let transitive: Vec<_> = dec.transitive().collect();
    if transitive.len() != 1 || transitive[0].vertices.len() != n {
        return Err(Error::NotIrreducible);
    }
    let comp = transitive[0];
    let p = comp.period;
    let classes = comp.cyclic_partition.clone();
    let (a, shift) = m.scaled_dense();

    let (rho_scaled, v, w, ell, tau) = if p == 1 {
        let (rho, v, w, ell, tau) = primitive_eigenpair(&a, tol);
        (rho, v, w, ell, tau)
    } else {
        // block 0 of A^p is primitive; propagate the eigenpair around the
        // cyclic classes: v|c_i = A[c_i, c_{i+1}] v|c_{i+1} / rho
        let mut ap = DMatrix::identity(n, n);
        let mut log_scale = 0.0f64;
        for _ in 0..p {
            ap = &ap * &a;
            let s = ap.amax();
            ap /= s;
            log_scale += s.ln();
        }
        let c0 = &classes[0];
        let b0 = DMatrix::from_fn(c0.len(), c0.len(), |i, j| ap[(c0[i], c0[j])]);
        let (rho0_scaled, v0, w0, ell, tau) = primitive_eigenpair(&b0, tol);
        let log_rho_p = rho0_scaled.ln() + log_scale; // log rho(A)^p, scaled
        let log_rho_scaled = log_rho_p / p as f64;
        let rho_scaled = log_rho_scaled.exp();

        let mut v = vec![0.0; n];
        let mut w = vec![0.0; n];
        for (i, &vtx) in c0.iter().enumerate() {
            v[vtx] = v0[i];
            w[vtx] = w0[i];
        }
        // backward propagation for v
        for i in (1..p).rev() {
            let ci = &classes[i];
            let cnext = &classes[(i + 1) % p];
            for &x in ci {
                let mut acc = 0.0;
                for &y in cnext {
                    acc += a[(x, y)] * v[y];
                }
                v[x] = acc / rho_scaled;
            }
        }
        // forward propagation for w
        for i in 1..p {
            let cprev = &classes[i - 1];
            let ci = &classes[i];
            for &y in ci {
                let mut acc = 0.0;
                for &x in cprev {
                    acc += w[x] * a[(x, y)];
                }
                w[y] = acc / rho_scaled;
            }
        }
        (rho_scaled, v, w, ell, tau)
    };

    let mut v = v;
    let mut w = w;
    // Rayleigh quotient on the full scaled matrix
    let wv: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
    let wav: f64 = (0..n)
        .map(|i| (0..n).map(|j| w[i] * a[(i, j)] * v[j]).sum::<f64>())
        .sum();
    let rho_scaled = if wv > 0.0 && wav > 0.0 { wav / wv } else { rho_scaled };

    // normalization: w'v = 1 with |v|_2 = |w|_2
    let nv: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nw: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let wv: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
    let sv = (nw / (nv * wv)).sqrt();
    let sw = (nv / (nw * wv)).sqrt();
    for x in &mut v {
        *x *= sv;
    }
    for x in &mut w {
        *x *= sw;
    }

    // a posteriori residuals on the scaled matrix
    let mut res_v: f64 = 0.0;
    let mut res_w: f64 = 0.0;
    for i in 0..n {
        let av: f64 = (0..n).map(|j| a[(i, j)] * v[j]).sum();
        res_v = res_v.max((av - rho_scaled * v[i]).abs());
        let wa: f64 = (0..n).map(|j| w[j] * a[(j, i)]).sum();
        res_w = res_w.max((wa - rho_scaled * w[i]).abs());
    }
    let sup_v = v.iter().cloned().fold(0.0f64, f64::max);
    let sup_w = w.iter().cloned().fold(0.0f64, f64::max);
    let certified_residual = (res_v / (rho_scaled * sup_v)).max(res_w / (rho_scaled * sup_w));

    let log_rho = shift + rho_scaled.ln();
    Ok(Eigensystem {
        rho: log_rho.exp(),
        log_rho,
        v,
        w,
        period: p,
        cyclic_blocks: classes,
        primitivity_index: ell,
        birkhoff_tau: tau,
        certified_residual,
    })
}

/// 1-step Markov (Gibbs) measure attached to a transfer matrix.
#[derive(Debug, Clone)]
pub struct MarkovGibbsMeasure {
    pub matrix: TransferMatrix,
    pub eig: Eigensystem,
}

impl MarkovGibbsMeasure {
    pub fn new(matrix: TransferMatrix, tol: f64) -> Result<Self> {
        let eig = eigensystem(&matrix, tol)?;
        Ok(MarkovGibbsMeasure { matrix, eig })
    }

    /// Cylinder mass of a word over the *host* alphabet:
    /// w(b_0) prod M(b_i, b_{i+1}) v(b_n) / rho^n, log domain.  Words that
    /// leave the support (or are non-admissible) have mass 0.
    pub fn cylinder(&self, word: &[Symbol]) -> f64 {
        debug_assert!(!word.is_empty());
        let Some(locals) = word
            .iter()
            .map(|&g| self.matrix.local_of(g))
            .collect::<Option<Vec<_>>>()
        else {
            return 0.0;
        };
        let mut log_mass = self.eig.w[locals[0]].ln() + self.eig.v[*locals.last().unwrap()].ln();
        for pair in locals.windows(2) {
            match self.matrix.log_entry(pair[0], pair[1]) {
                Some(lv) => log_mass += lv - self.eig.log_rho,
                None => return 0.0,
            }
        }
        log_mass.exp()
    }

    /// Single-symbol masses keyed by host symbols.
    pub fn single_masses(&self) -> BTreeMap<Symbol, f64> {
        self.matrix
            .global()
            .iter()
            .enumerate()
            .map(|(i, &g)| (g, self.eig.w[i] * self.eig.v[i]))
            .collect()
    }
}

/// log of the Perron root of the psi-transfer matrix of an irreducible graph.
pub fn pressure(graph: &Digraph, psi: &PotentialPsi) -> Result<f64> {
    let vertices: Vec<_> = (0..graph.n()).collect();
    let arrows: Vec<_> = graph.arrows().collect();
    let m = TransferMatrix::restricted(graph, psi, &vertices, &arrows);
    Ok(eigensystem(&m, EIG_TOL)?.log_rho)
}

/// Pressure of psi restricted to one transitive component.
pub fn component_pressure(graph: &Digraph, psi: &PotentialPsi, comp: &Component) -> Result<f64> {
    let m = TransferMatrix::restricted(graph, psi, &comp.vertices, &comp.arrows);
    Ok(eigensystem(&m, EIG_TOL)?.log_rho)
}

/// Return series sum_{k>=0} M^k(b,b), the (b,b) resolvent entry on the
/// communicating class of b.  `b` is a local index of `m`.
pub fn return_series(m: &TransferMatrix, b: usize) -> Result<f64> {
    let dec = m.pattern.decompose();
    let comp = dec.component_of(b).expect("vertex outside decomposition");
    if comp.kind == crate::graph::ComponentKind::Trivial {
        return Ok(1.0);
    }
    let k = comp.vertices.len();
    let local: BTreeMap<Symbol, usize> =
        comp.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut a = DMatrix::zeros(k, k);
    for &(x, y) in &comp.arrows {
        a[(local[&x], local[&y])] = m.log_entry(x, y).unwrap().exp();
    }
    // spectral radius of the class must be < 1
    let sub = TransferMatrix::from_log_entries(
        Digraph::from_indices(
            comp.vertices.iter().map(|&v| m.pattern.name(v).to_string()).collect(),
            comp.arrows.iter().map(|&(x, y)| (local[&x], local[&y])).collect(),
        ),
        comp.arrows
            .iter()
            .map(|&(x, y)| ((local[&x], local[&y]), m.log_entry(x, y).unwrap()))
            .collect(),
    );
    let rho = eigensystem(&sub, EIG_TOL)?.rho;
    if rho >= 1.0 - EPS_RHO {
        return Err(Error::DivergentSeries(m.pattern.name(b).to_string(), rho));
    }
    let id = DMatrix::identity(k, k);
    let lu = (id - a).lu();
    let mut e = DMatrix::zeros(k, 1);
    e[(local[&b], 0)] = 1.0;
    let x = lu.solve(&e).expect("resolvent solve failed despite rho < 1");
    Ok(x[(local[&b], 0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{rat_int, PotentialPhi, PotentialPsi, Rat};
    use num::Zero;

    fn full_shift(n: usize) -> Digraph {
        let names = (0..n).map(|i| format!("{}", (b'a' + i as u8) as char)).collect();
        let arrows = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
        Digraph::from_indices(names, arrows)
    }

    #[test]
    fn transfer_matrix_entries() {
        let g = full_shift(2);
        let phi = PotentialPhi::constant(&g, rat_int(-1));
        let psi = PotentialPsi::constant(&g, 0.3);
        let m = TransferMatrix::new(&g, &phi, &psi, 2.0);
        assert!((m.log_entry(0, 1).unwrap() - (-1.7)).abs() < 1e-14);
    }

    #[test]
    fn eigensystem_two_cycle() {
        let g = Digraph::from_indices(vec!["a".into(), "b".into()], vec![(0, 1), (1, 0)]);
        let psi = PotentialPsi::constant(&g, 0.0);
        let m = TransferMatrix::restricted(&g, &psi, &[0, 1], &[(0, 1), (1, 0)]);
        let e = eigensystem(&m, EIG_TOL).unwrap();
        assert!((e.rho - 1.0).abs() < 1e-12);
        assert_eq!(e.period, 2);
        for x in e.v.iter().chain(e.w.iter()) {
            assert!((x - 1.0 / 2f64.sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn eigensystem_all_ones() {
        let g = full_shift(2);
        let phi = PotentialPhi::constant(&g, Rat::zero());
        let psi = PotentialPsi::constant(&g, 0.0);
        let m = TransferMatrix::new(&g, &phi, &psi, 0.0);
        let e = eigensystem(&m, EIG_TOL).unwrap();
        assert!((e.rho - 2.0).abs() < 1e-12);
        let mu = MarkovGibbsMeasure { matrix: m, eig: e };
        let masses = mu.single_masses();
        assert!((masses[&0] - 0.5).abs() < 1e-12);
        assert!((mu.cylinder(&[0, 1]) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn eigensystem_rejects_reducible() {
        let g = Digraph::from_indices(vec!["a".into(), "b".into()], vec![(0, 0), (1, 1)]);
        let psi = PotentialPsi::constant(&g, 0.0);
        let m = TransferMatrix::restricted(&g, &psi, &[0, 1], &[(0, 0), (1, 1)]);
        assert!(matches!(eigensystem(&m, EIG_TOL), Err(Error::NotIrreducible)));
    }

    #[test]
    fn example2_renormalized_adjacency_root() {
        // arrows 1<->2, 1<->3, 2<->3, 3<->4; rho is the largest root of
        // x^4 - 4x^2 - 2x + 1
        let arrows = vec![(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1), (2, 3), (3, 2)];
        let g = Digraph::from_indices(
            (1..=4).map(|i| i.to_string()).collect(),
            arrows.clone(),
        );
        let psi = PotentialPsi::constant(&g, 0.0);
        let m = TransferMatrix::restricted(&g, &psi, &[0, 1, 2, 3], &arrows);
        let e = eigensystem(&m, EIG_TOL).unwrap();
        let r = e.rho;
        assert!((r.powi(4) - 4.0 * r.powi(2) - 2.0 * r + 1.0).abs() < 1e-9);
        assert!((r - 2.170086).abs() < 1e-5);
    }

    #[test]
    fn pressures() {
        let g = full_shift(2);
        let psi = PotentialPsi::constant(&g, 0.0);
        assert!((pressure(&g, &psi).unwrap() - 2f64.ln()).abs() < 1e-12);
        let loopg = Digraph::from_indices(vec!["a".into()], vec![(0, 0)]);
        let psi = PotentialPsi::constant(&loopg, 0.0);
        assert!(pressure(&loopg, &psi).unwrap().abs() < 1e-12);
        let golden = Digraph::from_indices(
            vec!["0".into(), "1".into()],
            vec![(0, 0), (0, 1), (1, 0)],
        );
        let psi = PotentialPsi::constant(&golden, 0.0);
        let expected = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((pressure(&golden, &psi).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn return_series_cases() {
        // single self-loop of weight 1/2
        let g = Digraph::from_indices(vec!["a".into()], vec![(0, 0)]);
        let m = TransferMatrix::from_log_entries(g, [((0, 0), 0.5f64.ln())].into());
        assert!((return_series(&m, 0).unwrap() - 2.0).abs() < 1e-12);
        // 2-cycle with both weights 1/2: sum (1/4)^k = 4/3
        let g = Digraph::from_indices(vec!["a".into(), "b".into()], vec![(0, 1), (1, 0)]);
        let m = TransferMatrix::from_log_entries(
            g,
            [((0, 1), 0.5f64.ln()), ((1, 0), 0.5f64.ln())].into(),
        );
        assert!((return_series(&m, 0).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        // vertex on no circuit
        let g = Digraph::from_indices(vec!["a".into(), "b".into()], vec![(0, 1)]);
        let m = TransferMatrix::from_log_entries(g, [((0, 1), 0.0)].into());
        assert!((return_series(&m, 0).unwrap() - 1.0).abs() < 1e-12);
        // divergent: self-loop of weight 1
        let g = Digraph::from_indices(vec!["a".into()], vec![(0, 0)]);
        let m = TransferMatrix::from_log_entries(g, [((0, 0), 0.0)].into());
        assert!(matches!(return_series(&m, 0), Err(Error::DivergentSeries(_, _))));
    }

    #[test]
    fn high_beta_does_not_lose_the_eigenvector() {
        // {a} loop and {b<->c} 2-cycle inside the full 3-shift: at beta = 60
        // the top eigenvalues differ by ~e^{-60}; squaring must still find
        // the true eigenvector, giving masses (1/3, 1/3, 1/3).
        let g = full_shift(3);
        let phi_m = [[0, -1, -1], [-1, -1, 0], [-1, 0, -1]];
        let phi = PotentialPhi::new(
            &g,
            (0..3)
                .flat_map(|a| (0..3).map(move |b| ((a, b), rat_int(phi_m[a][b]))))
                .collect(),
        );
        let psi = PotentialPsi::constant(&g, 0.0);
        let m = TransferMatrix::new(&g, &phi, &psi, 60.0);
        let mu = MarkovGibbsMeasure::new(m, EIG_TOL).unwrap();
        for (_, mass) in mu.single_masses() {
            assert!((mass - 1.0 / 3.0).abs() < 1e-6, "mass = {mass}");
        }
    }

    #[test]
    fn residuals_are_certified() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = rng.gen_range(2..=5);
            let mut arrows = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    if rng.gen_bool(0.6) {
                        arrows.push((a, b));
                    }
                }
            }
            let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
            let g = Digraph::from_indices(names, arrows);
            if !g.is_irreducible() || g.arrow_count() == 0 {
                continue;
            }
            let psi = PotentialPsi::new(
                &g,
                g.arrows().map(|ab| (ab, rng.gen_range(-1.0..1.0))).collect(),
            );
            let vertices: Vec<_> = (0..g.n()).collect();
            let arrows: Vec<_> = g.arrows().collect();
            let m = TransferMatrix::restricted(&g, &psi, &vertices, &arrows);
            let e = eigensystem(&m, EIG_TOL).unwrap();
            assert!(e.certified_residual < 1e-10, "residual {}", e.certified_residual);
            let wv: f64 = e.w.iter().zip(&e.v).map(|(a, b)| a * b).sum();
            assert!((wv - 1.0).abs() < 1e-12);
        }
    }
}
