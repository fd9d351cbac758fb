//! Pointwise linear algebra for the k-Hessian operator family.
//!
//! The central objects are the sum of all k×k principal minors of a symmetric
//! matrix (`s_k`) and the gradient-type term `h_k` built from column-replaced
//! principal submatrices:
//!
//! ```text
//!   s_k(A)       = sum over index sets |α|=k of det A[α,α]
//!   h_k(g, A)    = sum over index sets α, sum over t=1..k of
//!                  det( A[α,α] with column t replaced by g[α_t] · g[α] )
//! ```
//!
//! For k=1 these reduce to the trace and the squared gradient norm; for k=n
//! they give the determinant and its rank-one-update companion.
//!
//! All functions are pure; nothing here mutates shared state beyond a cache of
//! index-set enumerations keyed by (n, k).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Dense symmetric n×n matrix, row-major full storage.
///
/// Stands for a Hessian evaluated at a point. Symmetry is enforced at
/// construction and preserved by all provided operations.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    /// Build from row-major entries. Fails if `entries` is not n², if n = 0,
    /// or if any pair (i,j)/(j,i) disagrees beyond a roundoff allowance
    /// relative to the entry magnitudes.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("symmetric matrix dimension must be >= 1"));
        }
        if entries.len() != n * n {
            return Err(Error::domain(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let a = entries[i * n + j];
                let b = entries[j * n + i];
                let scale = a.abs().max(b.abs()).max(1.0);
                if (a - b).abs() > 1e-12 * scale {
                    return Err(Error::domain(format!(
                        "matrix not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(SymmetricMatrix { n, data: entries })
    }

    /// Symmetrize arbitrary entries by (M + Mᵀ)/2. Used for finite-difference
    /// Hessians where roundoff breaks exact symmetry.
    pub fn symmetrized(n: usize, entries: &[f64]) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::domain("bad dimensions for symmetrized matrix"));
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = 0.5 * (entries[i * n + j] + entries[j * n + i]);
            }
        }
        Ok(SymmetricMatrix { n, data })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Ok(SymmetricMatrix { n, data })
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_fn(n, |_, _| 0.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    /// y = M x.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::domain("apply: vector length mismatch"));
        }
        Ok((0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect())
    }
}

/// Strictly increasing set of 0-based indices drawn from {0, …, n−1},
/// selecting a principal submatrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexSet {
    indices: Vec<usize>,
}

impl IndexSet {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::domain("index set must be nonempty"));
        }
        for w in indices.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::domain("index set must be strictly increasing"));
            }
        }
        if *indices.last().unwrap() >= n {
            return Err(Error::domain(format!(
                "index {} out of range for dimension {n}",
                indices.last().unwrap()
            )));
        }
        Ok(IndexSet { indices })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

/// Small dense square matrix used as workspace for principal minors.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::domain("bad square matrix dimensions"));
        }
        Ok(SquareMatrix { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, j)).collect()
    }

    /// Determinant: direct cofactor formulas up to 3×3, LU with partial
    /// pivoting beyond. Minors here are small (k ≤ n ≤ desk scale), so
    /// robustness of pivoting matters more than asymptotics.
    pub fn det(&self) -> f64 {
        match self.dim {
            1 => self.data[0],
            2 => self.data[0] * self.data[3] - self.data[1] * self.data[2],
            3 => {
                let m = &self.data;
                m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                    + m[2] * (m[3] * m[7] - m[4] * m[6])
            }
            _ => self.det_lu(),
        }
    }

    fn det_lu(&self) -> f64 {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let mut pivot = col;
            let mut best = a[col * n + col].abs();
            for row in (col + 1)..n {
                let v = a[row * n + col].abs();
                if v > best {
                    best = v;
                    pivot = row;
                }
            }
            if best == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for row in (col + 1)..n {
                let factor = a[row * n + col] / p;
                for j in col..n {
                    a[row * n + j] -= factor * a[col * n + j];
                }
            }
        }
        det
    }
}

fn binomial_usize(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// C(n, k) as f64; exact for the small arguments used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    binomial_usize(n, k) as f64
}

type IndexSetCache = Mutex<HashMap<(usize, usize), Arc<Vec<IndexSet>>>>;

fn index_set_cache() -> &'static IndexSetCache {
    static CACHE: OnceLock<IndexSetCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn enumerate_index_sets(n: usize, k: usize) -> Vec<IndexSet> {
    // Lexicographic k-subset enumeration.
    let mut out = Vec::with_capacity(binomial_usize(n, k));
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(IndexSet {
            indices: current.clone(),
        });
        // advance to the next subset
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        current[i] += 1;
        for j in (i + 1)..k {
            current[j] = current[j - 1] + 1;
        }
    }
}

fn cached_index_sets(n: usize, k: usize) -> Arc<Vec<IndexSet>> {
    let mut cache = index_set_cache().lock().expect("index set cache poisoned");
    cache
        .entry((n, k))
        .or_insert_with(|| Arc::new(enumerate_index_sets(n, k)))
        .clone()
}

/// All C(n,k) principal index sets of size k in lexicographic order.
///
/// `k` must satisfy 1 ≤ k ≤ n; k=0 is rejected (orders are indexed from 1
/// throughout this crate).
pub fn principal_index_sets(n: usize, k: usize) -> Result<Vec<IndexSet>> {
    check_order(n, k)?;
    Ok(cached_index_sets(n, k).as_ref().clone())
}

fn check_order(n: usize, k: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("dimension must be >= 1"));
    }
    if k == 0 || k > n {
        return Err(Error::domain(format!(
            "order k={k} out of range 1..={n}"
        )));
    }
    Ok(())
}

/// Principal submatrix A[α, α].
pub fn submatrix(a: &SymmetricMatrix, set: &IndexSet) -> Result<SquareMatrix> {
    let n = a.n();
    if set.is_empty() || *set.indices().last().unwrap() >= n {
        return Err(Error::domain("index set out of range for matrix"));
    }
    let k = set.len();
    let mut data = Vec::with_capacity(k * k);
    for &i in set.indices() {
        for &j in set.indices() {
            data.push(a.get(i, j));
        }
    }
    SquareMatrix::new(k, data)
}

/// The matrix equal to `a` except column `t` (0-based), which becomes `b`.
pub fn column_replace(a: &SquareMatrix, t: usize, b: &[f64]) -> Result<SquareMatrix> {
    let k = a.dim();
    if t >= k {
        return Err(Error::domain(format!("column index {t} out of range 0..{k}")));
    }
    if b.len() != k {
        return Err(Error::domain(format!(
            "replacement column has length {}, expected {k}",
            b.len()
        )));
    }
    let mut out = a.clone();
    for (i, &v) in b.iter().enumerate() {
        out.set(i, t, v);
    }
    Ok(out)
}

/// Sum of all k×k principal minors of `a`.
///
/// k=1 gives the trace, k=n the determinant.
///
/// ```
/// use hessian_kk_core::minors::{s_k, SymmetricMatrix};
///
/// let a = SymmetricMatrix::diagonal(&[1.0, 2.0, 3.0]).unwrap();
/// assert_eq!(s_k(&a, 1).unwrap(), 6.0);  // trace
/// assert_eq!(s_k(&a, 2).unwrap(), 11.0); // 1*2 + 1*3 + 2*3
/// assert_eq!(s_k(&a, 3).unwrap(), 6.0);  // determinant
/// ```
pub fn s_k(a: &SymmetricMatrix, k: usize) -> Result<f64> {
    check_order(a.n(), k)?;
    let sets = cached_index_sets(a.n(), k);
    let mut sum = 0.0;
    for set in sets.iter() {
        sum += submatrix(a, set)?.det();
    }
    Ok(sum)
}

/// Gradient-type companion of `s_k`.
///
/// For each principal index set α = {α_1, …, α_k} and each position t, the
/// t-th column of A[α,α] is replaced by grad[α_t] · (grad[α_1], …, grad[α_k])ᵀ
/// and the determinants are summed. For k=1 this is |grad|².
pub fn h_k(grad: &[f64], hess: &SymmetricMatrix, k: usize) -> Result<f64> {
    let n = hess.n();
    if grad.len() != n {
        return Err(Error::domain(format!(
            "gradient length {} does not match matrix dimension {n}",
            grad.len()
        )));
    }
    check_order(n, k)?;
    let sets = cached_index_sets(n, k);
    let mut sum = 0.0;
    let mut restricted = vec![0.0; k];
    let mut scaled = vec![0.0; k];
    for set in sets.iter() {
        for (slot, &idx) in set.indices().iter().enumerate() {
            restricted[slot] = grad[idx];
        }
        let sub = submatrix(hess, set)?;
        for t in 0..k {
            let factor = restricted[t];
            for i in 0..k {
                scaled[i] = factor * restricted[i];
            }
            sum += column_replace(&sub, t, &scaled)?.det();
        }
    }
    Ok(sum)
}
