//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

pub fn vector(components: &[f64]) -> Vector {
    DVector::from_column_slice(components)
}

/// Row-major construction, matching the JSON layout.
pub fn matrix(rows: usize, cols: usize, row_major: &[f64]) -> Matrix {
    DMatrix::from_row_slice(rows, cols, row_major)
}

pub fn to_row_major(m: &Matrix) -> Vec<f64> {
    (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)]))
        .collect()
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

pub fn is_symmetric(m: &Matrix, tol: f64) -> bool {
    m.is_square() && (m - m.transpose()).amax() <= tol * m.amax().max(1.0)
}

pub fn min_eigenvalue(m: &Matrix) -> f64 {
    SymmetricEigen::new(symmetrize(m)).eigenvalues.min()
}

/// Frobenius-norm relative difference `|a - b| / max(|b|, tiny)`.
pub fn relative_difference(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Orthonormalize `vectors` under `inner`, dropping (numerically) dependent ones.
pub fn gram_schmidt<'a>(
    vectors: impl IntoIterator<Item = &'a Vector>,
    inner: impl Fn(&Vector, &Vector) -> f64,
    tol: f64,
) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for v in vectors {
        let scale = inner(v, v).sqrt();
        if scale == 0.0 {
            continue;
        }
        let mut w = v.clone();
        // two passes keep the basis orthogonal to working precision
        for _ in 0..2 {
            for e in &out {
                let c = inner(e, &w);
                w.axpy(-c, e, 1.0);
            }
        }
        let len = inner(&w, &w).sqrt();
        if len > tol * scale {
            out.push(w / len);
        }
    }
    out
}

/// `a`-orthonormal bases of `span(basis)` and of its `a`-orthogonal complement.
pub fn split_orthonormal(a: &Matrix, basis: &[Vector], tol: f64) -> (Vec<Vector>, Vec<Vector>) {
    let inner = |u: &Vector, v: &Vector| u.dot(&(a * v));
    let w = gram_schmidt(basis.iter(), inner, tol);
    let n = a.nrows();
    let mut all = w.clone();
    let canonical: Vec<Vector> = (0..n).map(|i| Vector::from_fn(n, |j, _| (i == j) as u8 as f64)).collect();
    for e in &canonical {
        if all.len() == n {
            break;
        }
        let ext = gram_schmidt(all.iter().chain(std::iter::once(e)), inner, 1e-8);
        if ext.len() > all.len() {
            all = ext;
        }
    }
    let h = all.split_off(w.len());
    (w, h)
}

/// Orthonormal basis of `ker m`.
pub fn null_space(m: &Matrix, tol: f64) -> Vec<Vector> {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let top = svd.singular_values.amax();
    // orthonormal row-space basis, then complete greedily with coordinate axes
    let mut basis: Vec<Vector> = (0..svd.singular_values.len())
        .filter(|&i| top > 0.0 && svd.singular_values[i] > tol * top)
        .map(|i| v_t.row(i).transpose())
        .collect();
    let rank = basis.len();
    let mut out = Vec::with_capacity(n - rank);
    while basis.len() < n {
        let best = (0..n)
            .map(|i| {
                let mut e = Vector::zeros(n);
                e[i] = 1.0;
                for b in &basis {
                    e -= b * b.dot(&e);
                }
                e
            })
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("n > 0");
        let mut e = best.normalize();
        for b in &basis {
            e -= b * b.dot(&e);
        }
        let e = e.normalize();
        basis.push(e.clone());
        out.push(e);
    }
    out
}

pub fn singular_values(m: &Matrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `threshold`.
pub fn rank_above(m: &Matrix, threshold: f64) -> usize {
    singular_values(m).into_iter().filter(|&s| s > threshold).count()
}

pub fn columns(vectors: &[Vector], rows: usize) -> Matrix {
    if vectors.is_empty() {
        return Matrix::zeros(rows, 0);
    }
    Matrix::from_columns(vectors)
}

/// Serde adapter: a [`Vector`] as a flat JSON array.
pub mod as_array {
    use super::Vector;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector, D::Error> {
        Ok(Vector::from_vec(Vec::<f64>::deserialize(d)?))
    }
}

/// Serde adapter: a list of [`Vector`]s as nested arrays.
pub mod as_arrays {
    use super::Vector;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(vs: &[Vector], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(vs.iter().map(|v| v.iter().copied().collect::<Vec<f64>>()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vector>, D::Error> {
        Ok(Vec::<Vec<f64>>::deserialize(d)?
            .into_iter()
            .map(Vector::from_vec)
            .collect())
    }
}

/// Serde adapter: a [`Matrix`] as a list of rows.
pub mod as_rows {
    use super::Matrix;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(m.row_iter().map(|r| r.iter().copied().collect::<Vec<f64>>()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        let flat: Vec<f64> = rows.concat();
        Ok(Matrix::from_row_slice(rows.len(), cols, &flat))
    }
}

/// Serde adapter: a square [`Matrix`] as a flat row-major array.
pub mod as_square_flat {
    use super::Matrix;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(super::to_row_major(m))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let flat = Vec::<f64>::deserialize(d)?;
        let n = (flat.len() as f64).sqrt().round() as usize;
        if n * n != flat.len() {
            return Err(D::Error::custom(format!(
                "expected a square matrix, got {} entries",
                flat.len()
            )));
        }
        Ok(Matrix::from_row_slice(n, n, &flat))
    }
}
