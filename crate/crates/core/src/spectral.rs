//! The Schrödinger operator -Laplacian + V in the real harmonic basis:
//! assembly, dense symmetric eigensolve, spectral multipliers, the exact
//! block-diagonal quantum Radon projection, and Weinstein cluster
//! statistics, plus a bit-exact spectrum cache.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geom::SpherePoint;
use crate::harmonics::{eval_basis, HarmonicBasis};
use crate::potential::PotentialSpec;
use crate::quad::gauss_sphere_rule;

/// Dense symmetric matrix of -Laplacian + V in the real harmonic basis.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    pub matrix: DMatrix<f64>,
    pub l_max: usize,
    pub potential: PotentialSpec,
}

/// Gram matrix <Y_a, V Y_b>, exact for band-limited V: the integrand has
/// degree at most 2 l_max + D, and the rule of order l_max + ceil(D/2) is
/// exact through twice its order.
pub fn potential_matrix(v: &PotentialSpec, l_max: usize) -> DMatrix<f64> {
    let d = v.effective_degree();
    let grid = gauss_sphere_rule(l_max + d.div_ceil(2));
    let dim = (l_max + 1) * (l_max + 1);
    let n = grid.nodes.len();
    // B[a, k] = Y_a(node k); weighted column product assembles the Gram
    let mut b = DMatrix::zeros(dim, n);
    let mut bw = DMatrix::zeros(dim, n);
    for (k, (p, w)) in grid.nodes.iter().zip(&grid.weights).enumerate() {
        let vals = eval_basis(l_max, p);
        let vw = w * v.eval(p);
        for a in 0..dim {
            b[(a, k)] = vals[a];
            bw[(a, k)] = vals[a] * vw;
        }
    }
    let mut m = bw * b.transpose();
    // wash out roundoff asymmetry
    for a in 0..dim {
        for bb in (a + 1)..dim {
            let s = 0.5 * (m[(a, bb)] + m[(bb, a)]);
            m[(a, bb)] = s;
            m[(bb, a)] = s;
        }
    }
    m
}

/// Kinetic diagonal l(l+1) plus the potential Gram matrix.
pub fn assemble_hamiltonian(v: &PotentialSpec, l_max: usize) -> Result<HamiltonianMatrix> {
    if l_max < v.effective_degree() {
        return Err(Error::invalid(
            "basis cutoff must be at least the potential degree",
        ));
    }
    let mut matrix = potential_matrix(v, l_max);
    let basis = HarmonicBasis::new(l_max);
    for a in 0..matrix.nrows() {
        let l = basis.degree(a) as f64;
        matrix[(a, a)] += l * (l + 1.0);
    }
    Ok(HamiltonianMatrix {
        matrix,
        l_max,
        potential: v.clone(),
    })
}

/// One solved mode: eigenvalue, frequency, unit coefficient vector, and the
/// degree cluster it is assigned to (nearest l(l+1)).
#[derive(Debug, Clone, Serialize)]
pub struct Eigenpair {
    pub lambda_sq: f64,
    pub lambda: f64,
    pub coeffs: Vec<f64>,
    pub cluster: usize,
}

/// Degree whose free eigenvalue l(l+1) is closest to the given one.
pub fn nearest_cluster(lambda_sq: f64) -> usize {
    let l = (-0.5 + (0.25 + lambda_sq.max(0.0)).sqrt()).round().max(0.0) as usize;
    // rounding of the quadratic inverse can be off by one near midpoints
    let score = |l: usize| ((l * (l + 1)) as f64 - lambda_sq).abs();
    let mut best = l;
    for cand in [l.saturating_sub(1), l + 1] {
        if score(cand) < score(best) {
            best = cand;
        }
    }
    best
}

/// Dense symmetric eigendecomposition, ascending in the eigenvalue, with a
/// deterministic sign convention and a residual audit.
pub fn eigensolve(h: &HamiltonianMatrix) -> Result<Vec<Eigenpair>> {
    let dim = h.matrix.nrows();
    if dim > 5000 {
        return Err(Error::invalid("eigensolve limited to dimension 5000"));
    }
    let decomp = h.matrix.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        decomp.eigenvalues[a]
            .partial_cmp(&decomp.eigenvalues[b])
            .unwrap()
    });
    let mut out = Vec::with_capacity(dim);
    for &idx in &order {
        let mut lambda_sq = decomp.eigenvalues[idx];
        let mut vc: DVector<f64> = decomp.eigenvectors.column(idx).into_owned();
        let mut residual = (&h.matrix * &vc - &vc * lambda_sq).norm();
        let budget = |lam: f64| 1e-8 * (1.0 + lam.abs());
        if residual > budget(lambda_sq) {
            // first-order polish against the rest of the computed spectrum:
            // dq = sum_j q_j (q_j . r) / (lambda - lambda_j), skipping
            // near-degenerate neighbors
            for _ in 0..3 {
                let r = &h.matrix * &vc - &vc * lambda_sq;
                let mut weights = decomp.eigenvectors.transpose() * &r;
                for j in 0..dim {
                    let gap = lambda_sq - decomp.eigenvalues[j];
                    weights[j] = if gap.abs() > 1e-6 { weights[j] / gap } else { 0.0 };
                }
                vc += &decomp.eigenvectors * weights;
                vc /= vc.norm();
                lambda_sq = (vc.transpose() * &h.matrix * &vc)[(0, 0)];
                residual = (&h.matrix * &vc - &vc * lambda_sq).norm();
                if residual <= budget(lambda_sq) {
                    break;
                }
            }
        }
        if residual > budget(lambda_sq) {
            return Err(Error::EigenFailure(format!(
                "residual {residual:.3e} at eigenvalue {lambda_sq:.6} after polish"
            )));
        }
        let mut coeffs: Vec<f64> = vc.iter().copied().collect();
        // sign convention: largest-magnitude entry positive
        let pivot = coeffs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        if coeffs[pivot] < 0.0 {
            for c in coeffs.iter_mut() {
                *c = -*c;
            }
        }
        out.push(Eigenpair {
            lambda_sq,
            lambda: lambda_sq.max(0.0).sqrt(),
            coeffs,
            cluster: nearest_cluster(lambda_sq),
        });
    }
    Ok(out)
}

/// Scales every coefficient of degree l by m(l).
pub fn apply_multiplier(coeffs: &[f64], l_max: usize, m: impl Fn(usize) -> f64) -> Vec<f64> {
    let basis = HarmonicBasis::new(l_max);
    debug_assert_eq!(coeffs.len(), basis.dim());
    let scales: Vec<f64> = (0..=l_max).map(m).collect();
    coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c * scales[basis.degree(i)])
        .collect()
}

/// Spectral Laplacian: multiplier l(l+1). Negated Laplace-Beltrami.
pub fn minus_laplacian(coeffs: &[f64], l_max: usize) -> Vec<f64> {
    apply_multiplier(coeffs, l_max, |l| (l * (l + 1)) as f64)
}

/// Fejér-type window: (sin(u/2) / (u/2))^2. Nonnegative, equals 1 at 0,
/// Fourier transform supported in [-1, 1].
pub fn rho_fejer(u: f64) -> f64 {
    let x = u / 2.0;
    if x.abs() < 1e-4 {
        let x2 = x * x;
        let s = 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
        s * s
    } else {
        let s = x.sin() / x;
        s * s
    }
}

/// Frequency window around lambda: multiplier
/// rho(r (lambda - lambda_l)) + rho(r (lambda + lambda_l)),
/// lambda_l = sqrt(l(l+1)).
pub fn t_operator(coeffs: &[f64], l_max: usize, lambda: f64, r: f64) -> Result<Vec<f64>> {
    if lambda < 1.0 {
        return Err(Error::invalid("window center must be at least 1"));
    }
    if !(r > 0.0 && r <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::invalid("window width must lie in (0, pi/2]"));
    }
    Ok(apply_multiplier(coeffs, l_max, |l| {
        let ll = ((l * (l + 1)) as f64).sqrt();
        rho_fejer(r * (lambda - ll)) + rho_fejer(r * (lambda + ll))
    }))
}

/// Conjugation average (1/2pi) Int e^{isA} M e^{-isA} ds, evaluated exactly:
/// A acts as l + 1/2 per degree, so the average keeps an entry iff its row
/// and column degrees agree — the block-diagonal restriction.
pub fn quantum_radon(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let dim = m.nrows();
    if m.ncols() != dim {
        return Err(Error::invalid("matrix must be square"));
    }
    let l_max = (dim as f64).sqrt().round() as usize;
    if l_max == 0 || l_max * l_max != dim {
        return Err(Error::invalid(
            "dimension must be a perfect square (l_max + 1)^2",
        ));
    }
    let l_max = l_max - 1;
    let basis = HarmonicBasis::new(l_max);
    let mut out = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            if basis.degree(a) == basis.degree(b) {
                out[(a, b)] = m[(a, b)];
            }
        }
    }
    Ok(out)
}

/// The eigenvalues of the degree-l diagonal block of a symmetric matrix.
pub fn degree_block_eigenvalues(m: &DMatrix<f64>, l: usize) -> Vec<f64> {
    let start = l * l;
    let size = 2 * l + 1;
    let block = m.view((start, start), (size, size)).into_owned();
    let mut eigs: Vec<f64> = block.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

/// Shifts of one eigenvalue cluster away from the free value l(l+1),
/// alongside the first-order prediction from the degree-l block of the
/// averaged potential matrix.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterShifts {
    pub l: usize,
    /// the 2l+1 eigenvalues nearest l(l+1), minus l(l+1), ascending
    pub shifts: Vec<f64>,
    /// eigenvalues of the degree-l block of the potential matrix, ascending
    pub predicted: Vec<f64>,
    /// set when the cluster's gap to its neighbors is below its own width
    pub overlap: bool,
}

/// Extracts the 2l+1 eigenvalues nearest l(l+1) and the block prediction.
/// The eigenpairs must come from a basis with l_max >= l + D.
pub fn cluster_shifts(
    eigenpairs: &[Eigenpair],
    potential: &PotentialSpec,
    l_max: usize,
    l: usize,
) -> Result<ClusterShifts> {
    if l + potential.effective_degree() > l_max {
        return Err(Error::invalid(
            "cluster degree too close to the basis truncation edge",
        ));
    }
    let size = 2 * l + 1;
    if eigenpairs.len() < size + 1 {
        return Err(Error::invalid("not enough eigenpairs for the cluster"));
    }
    let center = (l * (l + 1)) as f64;
    let mut order: Vec<usize> = (0..eigenpairs.len()).collect();
    order.sort_by(|&a, &b| {
        (eigenpairs[a].lambda_sq - center)
            .abs()
            .partial_cmp(&(eigenpairs[b].lambda_sq - center).abs())
            .unwrap()
    });
    let mut shifts: Vec<f64> = order[..size]
        .iter()
        .map(|&i| eigenpairs[i].lambda_sq - center)
        .collect();
    shifts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let width = shifts.last().unwrap() - shifts.first().unwrap();
    let gap = order[size..]
        .iter()
        .map(|&i| {
            let d = eigenpairs[i].lambda_sq - center;
            (d - shifts.last().unwrap())
                .abs()
                .min((d - shifts.first().unwrap()).abs())
        })
        .fold(f64::INFINITY, f64::min);
    let overlap = gap < width;

    let vm = potential_matrix(potential, l_max.min(l + potential.effective_degree()));
    let predicted = degree_block_eigenvalues(&vm, l);
    Ok(ClusterShifts {
        l,
        shifts,
        predicted,
        overlap,
    })
}

/// Cluster rows for every degree up to the trust horizon.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterTable {
    pub l_trust: usize,
    pub rows: Vec<ClusterShifts>,
}

/// Degrees above this leak into the truncation edge for a degree-D
/// potential.
pub fn l_trust(l_max: usize, potential_degree: usize) -> usize {
    l_max.saturating_sub(potential_degree + 2)
}

pub fn cluster_table(
    eigenpairs: &[Eigenpair],
    potential: &PotentialSpec,
    l_max: usize,
) -> Result<ClusterTable> {
    let horizon = l_trust(l_max, potential.effective_degree());
    let rows = (0..=horizon)
        .map(|l| cluster_shifts(eigenpairs, potential, l_max, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClusterTable {
        l_trust: horizon,
        rows,
    })
}

/// Two-sample Kolmogorov-Smirnov distance between empirical distributions.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < sa.len() && j < sb.len() {
        // advance past the smaller value in both samples (tie-safe)
        let x = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= x {
            i += 1;
        }
        while j < sb.len() && sb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Pointwise residual of the solved mode against the equation, with the
/// Laplacian applied spectrally and the potential applied in the truncated
/// basis (the Galerkin sense; the pointwise product leaks out of the basis
/// for clusters near the truncation edge).
pub fn pde_residual(
    pair: &Eigenpair,
    h: &HamiltonianMatrix,
    points: &[SpherePoint],
) -> f64 {
    let vc = DVector::from_column_slice(&pair.coeffs);
    let resid_coeffs: Vec<f64> = (&h.matrix * &vc - &vc * pair.lambda_sq)
        .iter()
        .copied()
        .collect();
    points
        .iter()
        .map(|p| crate::harmonics::synthesize(&resid_coeffs, h.l_max, p).abs())
        .fold(0.0, f64::max)
}

/// Pointwise residual with the potential applied as a true pointwise
/// product. Only meaningful for clusters at least D+2 below the truncation.
pub fn pde_residual_pointwise(
    pair: &Eigenpair,
    v: &PotentialSpec,
    l_max: usize,
    points: &[SpherePoint],
) -> f64 {
    let lap = minus_laplacian(&pair.coeffs, l_max);
    points
        .iter()
        .map(|p| {
            let psi = crate::harmonics::synthesize(&pair.coeffs, l_max, p);
            let lpsi = crate::harmonics::synthesize(&lap, l_max, p);
            (lpsi + v.eval(p) * psi - pair.lambda_sq * psi).abs()
        })
        .fold(0.0, f64::max)
}

/// Free (V = 0) highest-weight mode Y_{l,l}: a Gaussian beam concentrating
/// on the equator, used as the no-improvement control.
pub fn highest_weight_pair(l: usize, l_max: usize) -> Result<Eigenpair> {
    let basis = HarmonicBasis::new(l_max);
    let mut coeffs = vec![0.0; basis.dim()];
    coeffs[basis.index(l, l as i64)?] = 1.0;
    Ok(Eigenpair {
        lambda_sq: (l * (l + 1)) as f64,
        lambda: ((l * (l + 1)) as f64).sqrt(),
        coeffs,
        cluster: l,
    })
}

// ---------------------------------------------------------------------------
// spectrum cache

const CACHE_MAGIC: &[u8; 8] = b"RLSPEC01";

/// Cache key: hash of the potential's canonical bytes and the basis cutoff.
pub fn spectrum_cache_key(v: &PotentialSpec, l_max: usize) -> String {
    let mut hasher = Sha256::new();
    hasher.update(v.canonical_bytes());
    hasher.update((l_max as u64).to_le_bytes());
    let digest = hasher.finalize();
    digest.iter().take(16).map(|b| format!("{b:02x}")).collect()
}

pub fn spectrum_cache_path(dir: &Path, v: &PotentialSpec, l_max: usize) -> PathBuf {
    dir.join(format!("spectrum-{}.bin", spectrum_cache_key(v, l_max)))
}

/// Writes eigenvalues and coefficient vectors bit-exactly.
pub fn save_spectrum(
    dir: &Path,
    v: &PotentialSpec,
    l_max: usize,
    pairs: &[Eigenpair],
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = spectrum_cache_path(dir, v, l_max);
    let dim = (l_max + 1) * (l_max + 1);
    let mut buf: Vec<u8> =
        Vec::with_capacity(8 + 24 + pairs.len() * 8 * (dim + 1));
    buf.extend_from_slice(CACHE_MAGIC);
    buf.extend_from_slice(&(l_max as u64).to_le_bytes());
    buf.extend_from_slice(&(dim as u64).to_le_bytes());
    buf.extend_from_slice(&(pairs.len() as u64).to_le_bytes());
    for p in pairs {
        buf.extend_from_slice(&p.lambda_sq.to_le_bytes());
        for c in &p.coeffs {
            buf.extend_from_slice(&c.to_le_bytes());
        }
    }
    let tmp = path.with_extension("tmp");
    let mut f = std::fs::File::create(&tmp)?;
    f.write_all(&buf)?;
    f.sync_all()?;
    std::fs::rename(&tmp, &path)?;
    Ok(path)
}

/// Reloads a cached spectrum; `Ok(None)` when absent, `Err` when corrupt.
pub fn load_spectrum(
    dir: &Path,
    v: &PotentialSpec,
    l_max: usize,
) -> Result<Option<Vec<Eigenpair>>> {
    let path = spectrum_cache_path(dir, v, l_max);
    if !path.exists() {
        return Ok(None);
    }
    let mut bytes = Vec::new();
    std::fs::File::open(&path)?.read_to_end(&mut bytes)?;
    let corrupt = |msg: &str| Error::Cache(format!("{}: {msg}", path.display()));
    if bytes.len() < 32 || &bytes[..8] != CACHE_MAGIC {
        return Err(corrupt("bad header"));
    }
    let read_u64 = |off: usize| u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
    let file_l_max = read_u64(8) as usize;
    let dim = read_u64(16) as usize;
    let count = read_u64(24) as usize;
    if file_l_max != l_max || dim != (l_max + 1) * (l_max + 1) {
        return Err(corrupt("header does not match the request"));
    }
    let expected = 32 + count * 8 * (dim + 1);
    if bytes.len() != expected {
        return Err(corrupt("truncated payload"));
    }
    let mut off = 32;
    let mut read_f64 = || {
        let v = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        off += 8;
        v
    };
    let mut pairs = Vec::with_capacity(count);
    for _ in 0..count {
        let lambda_sq = read_f64();
        let coeffs: Vec<f64> = (0..dim).map(|_| read_f64()).collect();
        pairs.push(Eigenpair {
            lambda_sq,
            lambda: lambda_sq.max(0.0).sqrt(),
            coeffs,
            cluster: nearest_cluster(lambda_sq),
        });
    }
    Ok(Some(pairs))
}

/// Loads the spectrum from cache or solves and stores it.
pub fn eigensolve_cached(
    cache_dir: &Path,
    v: &PotentialSpec,
    l_max: usize,
) -> Result<(Vec<Eigenpair>, bool)> {
    match load_spectrum(cache_dir, v, l_max) {
        Ok(Some(pairs)) => return Ok((pairs, true)),
        Ok(None) => {}
        Err(e) => {
            // corrupt cache: recompute below
            eprintln!("warning: {e}; recomputing");
        }
    }
    let h = assemble_hamiltonian(v, l_max)?;
    let pairs = eigensolve(&h)?;
    save_spectrum(cache_dir, v, l_max, &pairs)?;
    Ok((pairs, false))
}
