//! Compressed sparse row matrices.
//!
//! Column indices inside every row are kept sorted and unique, so two
//! matrices with the same entries have identical storage and runs are
//! bit-reproducible.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![1.0; n],
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(r, c, _) in &entries {
            if r >= nrows || c >= ncols {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({r}, {c}) outside {nrows}x{ncols}"
                )));
            }
        }
        entries.sort_by_key(|e| (e.0, e.1));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut data: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
                continue;
            }
            indptr[r + 1] += 1;
            indices.push(c);
            data.push(v);
            last = Some((r, c));
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Ok(Self {
            nrows,
            ncols,
            indptr,
            indices,
            data,
        })
    }

    /// 0/1 pattern matrix from a list of coordinate pairs.
    pub fn from_pattern(
        nrows: usize,
        ncols: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        Ok(Self::from_triplets(nrows, ncols, pairs.into_iter().map(|(r, c)| (r, c, 1.0)))?.binarized())
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut triplets = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)] != 0.0 {
                    triplets.push((r, c, m[(r, c)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), triplets).expect("in range")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    /// Column indices and values of one row.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[a..b], &self.data[a..b])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// Iterates stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.iter().map(|(r, c, v)| (c, r, v)))
            .expect("in range")
    }

    pub fn matmul(&self, rhs: &CsrMatrix) -> Result<Self> {
        if self.ncols != rhs.nrows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.nrows, self.ncols, rhs.nrows, rhs.ncols
            )));
        }
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        let mut acc = vec![0.0f64; rhs.ncols];
        let mut touched = vec![false; rhs.ncols];
        let mut cols: Vec<usize> = Vec::new();
        for r in 0..self.nrows {
            let (lc, lv) = self.row(r);
            for (&k, &a) in lc.iter().zip(lv) {
                let (rc, rv) = rhs.row(k);
                for (&c, &b) in rc.iter().zip(rv) {
                    if !touched[c] {
                        touched[c] = true;
                        cols.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            cols.sort_unstable();
            for &c in &cols {
                indices.push(c);
                data.push(acc[c]);
                acc[c] = 0.0;
                touched[c] = false;
            }
            indptr[r + 1] = indices.len();
            cols.clear();
        }
        Ok(Self {
            nrows: self.nrows,
            ncols: rhs.ncols,
            indptr,
            indices,
            data,
        })
    }

    /// Replaces every positive entry by 1 and drops the rest.
    pub fn binarized(&self) -> Self {
        self.filter_map(|_, _, v| (v > 0.0).then_some(1.0))
    }

    pub fn without_diagonal(&self) -> Self {
        self.filter_map(|r, c, v| (r != c).then_some(v))
    }

    fn filter_map(&self, f: impl Fn(usize, usize, f64) -> Option<f64>) -> Self {
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if let Some(nv) = f(r, c, v) {
                    indices.push(c);
                    data.push(nv);
                }
            }
            indptr[r + 1] = indices.len();
        }
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr,
            indices,
            data,
        }
    }

    /// Binary union `A ∪ Aᵀ` of a square pattern.
    pub fn symmetrized(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("symmetrize needs a square matrix".into()));
        }
        let both = self.iter().flat_map(|(r, c, _)| [(r, c), (c, r)]);
        Self::from_pattern(self.nrows, self.ncols, both)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && self.iter().all(|(r, c, v)| self.get(c, r) == v)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows).map(|r| self.row(r).1.iter().sum()).collect()
    }

    /// Scales entry `(r, c)` by `left[r] * right[c]`.
    pub fn scaled(&self, left: &[f64], right: &[f64]) -> Self {
        self.filter_map(|r, c, v| Some(v * left[r] * right[c]))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    /// `self · x` for a dense block of column signals.
    pub fn mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(self.ncols, x.nrows(), "sparse-dense product shape");
        let mut y = DMatrix::zeros(self.nrows, x.ncols());
        for j in 0..x.ncols() {
            let xc = x.column(j);
            for r in 0..self.nrows {
                let (cols, vals) = self.row(r);
                let mut s = 0.0;
                for (&c, &v) in cols.iter().zip(vals) {
                    s += v * xc[c];
                }
                y[(r, j)] = s;
            }
        }
        y
    }

    /// `selfᵀ · x` without materializing the transpose.
    pub fn tmul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(self.nrows, x.nrows(), "sparse-dense transposed product shape");
        let mut y = DMatrix::zeros(self.ncols, x.ncols());
        for j in 0..x.ncols() {
            for r in 0..self.nrows {
                let xr = x[(r, j)];
                if xr == 0.0 {
                    continue;
                }
                let (cols, vals) = self.row(r);
                for (&c, &v) in cols.iter().zip(vals) {
                    y[(c, j)] += v * xr;
                }
            }
        }
        y
    }

    /// Principal submatrix on the given (sorted or unsorted) index set.
    pub fn induced(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.nrows];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let triplets = keep.iter().enumerate().flat_map(|(new_r, &old_r)| {
            let (cols, vals) = self.row(old_r);
            let map = &map;
            cols.iter()
                .zip(vals)
                .filter(move |(c, _)| map[**c] != usize::MAX)
                .map(move |(&c, &v)| (new_r, map[c], v))
        });
        Self::from_triplets(keep.len(), keep.len(), triplets.collect::<Vec<_>>()).expect("in range")
    }
}
