//! Dense side-information features attached to users or items.
//!
//! Tag-like count matrices are compressed with PCA; binary and demographic
//! blocks are encoded directly and concatenated.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::warn;
use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{CfnError, Result};
use crate::ingest::{CategoryMatrix, Demographics, TagMatrix};
use crate::ratings::SparseRatings;

/// Row-major `n_entities x dim` feature matrix with a record of the blocks it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct SideFeatures {
    n_entities: usize,
    dim: usize,
    data: Vec<f64>,
    provenance: Vec<BlockInfo>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockInfo {
    pub name: String,
    pub dim: usize,
}

impl SideFeatures {
    pub fn new(name: &str, n_entities: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_entities * dim {
            return Err(CfnError::Dimension(format!(
                "block `{name}`: {} values for a {n_entities}x{dim} matrix",
                data.len()
            )));
        }
        if let Some(p) = data.iter().position(|v| !v.is_finite()) {
            return Err(CfnError::NonFinite(format!(
                "block `{name}` entity {} column {}",
                p / dim.max(1),
                p % dim.max(1)
            )));
        }
        Ok(SideFeatures {
            n_entities,
            dim,
            data,
            provenance: vec![BlockInfo {
                name: name.to_string(),
                dim,
            }],
        })
    }

    pub fn from_rows(name: &str, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().position(|r| r.len() != dim) {
            return Err(CfnError::Dimension(format!("block `{name}` row {r} has a different width")));
        }
        Self::new(name, rows.len(), dim, rows.concat())
    }

    pub fn n_entities(&self) -> usize {
        self.n_entities
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> &[BlockInfo] {
        &self.provenance
    }

    pub fn row(&self, e: usize) -> &[f64] {
        &self.data[e * self.dim..(e + 1) * self.dim]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n_entities).map(|e| self.data[e * self.dim + c]).collect()
    }

    /// Appends zero rows up to `n_entities` (entities that appeared after the features were built).
    pub fn padded_to(&self, n_entities: usize) -> Result<Self> {
        if n_entities < self.n_entities {
            return Err(CfnError::Dimension(format!(
                "cannot shrink side features from {} to {n_entities} entities",
                self.n_entities
            )));
        }
        let mut out = self.clone();
        out.data.resize(n_entities * self.dim, 0.0);
        out.n_entities = n_entities;
        Ok(out)
    }

    /// Keeps the first `n_entities` rows, padding with zeros when there are fewer.
    pub fn fitted_to(&self, n_entities: usize) -> Self {
        let mut out = self.clone();
        out.data.resize(n_entities * self.dim, 0.0);
        out.n_entities = n_entities;
        out
    }

    /// `entity_index<TAB>v1,v2,...` per line.
    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| CfnError::io(path, e))?;
        let mut w = BufWriter::new(file);
        for e in 0..self.n_entities {
            let vals: Vec<String> = self.row(e).iter().map(|v| v.to_string()).collect();
            writeln!(w, "{e}\t{}", vals.join(",")).map_err(|err| CfnError::io(path, err))?;
        }
        w.flush().map_err(|e| CfnError::io(path, e))
    }

    pub fn read_tsv(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| CfnError::io(path, e))?;
        let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| CfnError::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let (idx, vals) = line
                .split_once('\t')
                .ok_or_else(|| CfnError::parse(path, i + 1, "expected `index<TAB>values`"))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| CfnError::parse(path, i + 1, format!("bad index `{idx}`")))?;
            let vals = if vals.is_empty() {
                Vec::new()
            } else {
                vals.split(',')
                    .map(|v| {
                        v.parse::<f64>()
                            .map_err(|_| CfnError::parse(path, i + 1, format!("bad value `{v}`")))
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            rows.push((idx, vals));
        }
        rows.sort_by_key(|r| r.0);
        for (expected, (idx, _)) in rows.iter().enumerate() {
            if *idx != expected {
                return Err(CfnError::parse(path, expected + 1, "entity indices must be dense 0..n"));
            }
        }
        let rows: Vec<Vec<f64>> = rows.into_iter().map(|r| r.1).collect();
        Self::from_rows(&path.display().to_string(), &rows)
    }
}

/// Eigen-solver used by [`pca_compress`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcaSolver {
    /// Dense symmetric decomposition when the Gram matrix is small, power iteration otherwise.
    Auto,
    Dense,
    /// Matrix-free deflated power iteration on the smaller Gram matrix.
    PowerIteration,
}

const DENSE_GRAM_LIMIT: usize = 1500;
const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITERS: usize = 10_000;

/// Keeps the top `k_prime` principal directions of the entity-by-tag matrix, each column
/// scaled so that its squared norm is the matching eigenvalue of `T Tᵀ`.
pub fn pca_compress(tags: &TagMatrix, k_prime: usize) -> Result<SideFeatures> {
    pca_compress_with(&tags.counts, k_prime, PcaSolver::Auto)
}

pub fn pca_compress_with(t: &SparseRatings, k_prime: usize, solver: PcaSolver) -> Result<SideFeatures> {
    if k_prime == 0 {
        return Err(CfnError::Precondition("PCA needs at least one component".into()));
    }
    let (m, n) = (t.n_rows(), t.n_cols());
    let gram_dim = m.min(n);
    let solver = match solver {
        PcaSolver::Auto if gram_dim <= DENSE_GRAM_LIMIT => PcaSolver::Dense,
        PcaSolver::Auto => PcaSolver::PowerIteration,
        s => s,
    };
    let wanted = k_prime.min(gram_dim);
    if k_prime > gram_dim {
        warn!("PCA asked for {k_prime} components of a {m}x{n} matrix; padding with zero columns");
    }

    // eigenpairs of the smaller Gram matrix, largest first
    let pairs = match solver {
        PcaSolver::Dense => dense_eigenpairs(t, wanted),
        _ => power_eigenpairs(t, wanted),
    };

    let top = pairs.first().map_or(0.0, |p| p.0);
    let rank_tol = top * 1e-12 * gram_dim.max(1) as f64;
    let mut data = vec![0.0; m * k_prime];
    let mut rank = 0;
    for (j, (lambda, vec)) in pairs.iter().enumerate() {
        if *lambda <= rank_tol || *lambda <= 0.0 {
            break;
        }
        rank += 1;
        // column of Y = P D^{1/2}
        let col: Vec<f64> = if m <= n {
            vec.iter().map(|p| p * lambda.sqrt()).collect()
        } else {
            sparse_matvec(t, vec)
        };
        let sign = sign_of_largest(&col);
        for (e, v) in col.into_iter().enumerate() {
            data[e * k_prime + j] = sign * v;
        }
    }
    if rank < k_prime && k_prime <= gram_dim {
        warn!("tag matrix has rank {rank} < {k_prime}; padding with zero columns");
    }
    SideFeatures::new("pca-tags", m, k_prime, data)
}

fn sign_of_largest(v: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for &x in v {
        if x.abs() > best.abs() {
            best = x;
        }
    }
    if best < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// `T v`
fn sparse_matvec(t: &SparseRatings, v: &[f64]) -> Vec<f64> {
    (0..t.n_rows())
        .map(|r| t.row(r).iter().map(|(c, x)| x * v[c]).sum())
        .collect()
}

/// `Tᵀ v`
fn sparse_matvec_t(t: &SparseRatings, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; t.n_cols()];
    for (r, c, x) in t.iter() {
        out[c] += x * v[r];
    }
    out
}

/// Product with the smaller of `T Tᵀ` and `Tᵀ T`.
fn gram_apply(t: &SparseRatings, v: &[f64]) -> Vec<f64> {
    if t.n_rows() <= t.n_cols() {
        sparse_matvec(t, &sparse_matvec_t(t, v))
    } else {
        sparse_matvec_t(t, &sparse_matvec(t, v))
    }
}

fn dense_eigenpairs(t: &SparseRatings, wanted: usize) -> Vec<(f64, Vec<f64>)> {
    let small = t.n_rows().min(t.n_cols());
    let mut gram = DMatrix::<f64>::zeros(small, small);
    if t.n_rows() <= t.n_cols() {
        let dense: Vec<Vec<f64>> = (0..t.n_rows()).map(|r| t.row(r).to_dense(t.n_cols())).collect();
        for i in 0..small {
            for j in i..small {
                let d: f64 = dense[i].iter().zip(&dense[j]).map(|(a, b)| a * b).sum();
                gram[(i, j)] = d;
                gram[(j, i)] = d;
            }
        }
    } else {
        for r in 0..t.n_rows() {
            let row = t.row(r);
            for (a, va) in row.iter() {
                for (b, vb) in row.iter() {
                    gram[(a, b)] += va * vb;
                }
            }
        }
    }
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..small).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    order
        .into_iter()
        .take(wanted)
        .map(|j| {
            let v: Vec<f64> = eig.eigenvectors.column(j).iter().copied().collect();
            (eig.eigenvalues[j].max(0.0), v)
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize_in_place(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn power_eigenpairs(t: &SparseRatings, wanted: usize) -> Vec<(f64, Vec<f64>)> {
    let dim = t.n_rows().min(t.n_cols());
    let mut found: Vec<(f64, Vec<f64>)> = Vec::with_capacity(wanted);
    for j in 0..wanted {
        // deterministic start vector, not orthogonal to anything in particular
        let mut v: Vec<f64> = (0..dim)
            .map(|i| 1.0 + ((i * 7919 + j * 104_729) % 1000) as f64 / 1000.0)
            .collect();
        project_out(&mut v, &found);
        if normalize_in_place(&mut v) == 0.0 {
            break;
        }
        let mut lambda = 0.0;
        let mut converged = false;
        for _ in 0..POWER_MAX_ITERS {
            let mut w = gram_apply(t, &v);
            project_out(&mut w, &found);
            lambda = dot(&w, &v);
            if normalize_in_place(&mut w) == 0.0 {
                lambda = 0.0;
                converged = true;
                break;
            }
            let delta = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            v = w;
            if delta < POWER_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            warn!("power iteration for eigenvector {j} stopped after {POWER_MAX_ITERS} iterations");
        }
        project_out(&mut v, &found);
        normalize_in_place(&mut v);
        found.push((lambda.max(0.0), v));
    }
    found
}

/// Removes the components along already-found eigenvectors (deflation).
fn project_out(v: &mut [f64], found: &[(f64, Vec<f64>)]) {
    for (_, u) in found {
        let d = dot(v, u);
        v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
    }
}

/// Horizontal concatenation, columns in block order.
pub fn assemble(blocks: &[SideFeatures]) -> Result<SideFeatures> {
    let first = blocks
        .first()
        .ok_or_else(|| CfnError::Precondition("assemble needs at least one block".into()))?;
    let n = first.n_entities;
    for b in blocks {
        if b.n_entities != n {
            let names = |f: &SideFeatures| {
                f.provenance
                    .iter()
                    .map(|p| p.name.as_str())
                    .collect::<Vec<_>>()
                    .join("+")
            };
            return Err(CfnError::Dimension(format!(
                "block `{}` has {} entities but `{}` has {}",
                names(b),
                b.n_entities,
                names(first),
                n
            )));
        }
    }
    let dim: usize = blocks.iter().map(|b| b.dim).sum();
    let mut data = Vec::with_capacity(n * dim);
    for e in 0..n {
        for b in blocks {
            data.extend_from_slice(b.row(e));
        }
    }
    Ok(SideFeatures {
        n_entities: n,
        dim,
        data,
        provenance: blocks.iter().flat_map(|b| b.provenance.clone()).collect(),
    })
}

pub fn category_block(categories: &CategoryMatrix) -> Result<SideFeatures> {
    SideFeatures::new(
        "categories",
        categories.n_entities(),
        categories.n_categories(),
        categories.to_dense().concat(),
    )
}

/// One-hot gender and occupation followed by min-max scaled age; absent users get zeros.
pub fn demographic_block(demo: &Demographics) -> Result<SideFeatures> {
    let mut genders: Vec<&str> = Vec::new();
    let mut occupations: Vec<&str> = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for rec in demo.records.iter().flatten() {
        if !genders.contains(&rec.gender.as_str()) {
            genders.push(&rec.gender);
        }
        if !occupations.contains(&rec.occupation.as_str()) {
            occupations.push(&rec.occupation);
        }
        lo = lo.min(rec.age);
        hi = hi.max(rec.age);
    }
    genders.sort_unstable();
    occupations.sort_unstable();
    let dim = genders.len() + occupations.len() + 1;
    let mut data = vec![0.0; demo.records.len() * dim];
    for (u, rec) in demo.records.iter().enumerate() {
        let Some(rec) = rec else { continue };
        let row = &mut data[u * dim..(u + 1) * dim];
        let g = genders.binary_search(&rec.gender.as_str()).unwrap();
        let o = occupations.binary_search(&rec.occupation.as_str()).unwrap();
        row[g] = 1.0;
        row[genders.len() + o] = 1.0;
        row[dim - 1] = if hi > lo { (rec.age - lo) / (hi - lo) } else { 0.0 };
    }
    SideFeatures::new("demographics", demo.records.len(), dim, data)
}
