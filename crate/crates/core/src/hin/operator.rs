use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// `I − D^{-1/2} A D^{-1/2}`; isolated nodes get an identity row.
    #[default]
    NormalizedLaplacian,
    /// `D − A`.
    UnnormalizedLaplacian,
    Adjacency,
}

impl std::str::FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normalized_laplacian" => Ok(Self::NormalizedLaplacian),
            "unnormalized_laplacian" => Ok(Self::UnnormalizedLaplacian),
            "adjacency" => Ok(Self::Adjacency),
            other => Err(Error::InvalidArgument(format!("unknown operator kind `{other}`"))),
        }
    }
}

/// A graph shift operator: the sparse matrix whose polynomials act as filters.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftOperator {
    pub matrix: CsrMatrix,
    pub kind: OperatorKind,
}

impl ShiftOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

pub fn laplacian(adjacency: &CsrMatrix, kind: OperatorKind) -> Result<ShiftOperator> {
    if !adjacency.is_square() || !adjacency.is_symmetric() {
        return Err(Error::Asymmetric);
    }
    if adjacency.iter().any(|(_, _, v)| v < 0.0) {
        return Err(Error::InvalidArgument("adjacency has negative weights".into()));
    }
    let n = adjacency.nrows();
    let degree = adjacency.row_sums();
    let matrix = match kind {
        OperatorKind::Adjacency => adjacency.clone(),
        OperatorKind::UnnormalizedLaplacian => {
            let off = adjacency.iter().map(|(r, c, v)| (r, c, -v));
            let diag = (0..n).map(|i| (i, i, degree[i]));
            CsrMatrix::from_triplets(n, n, off.chain(diag).collect::<Vec<_>>())?
        }
        OperatorKind::NormalizedLaplacian => {
            let inv_sqrt: Vec<f64> = degree
                .iter()
                .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
                .collect();
            let off = adjacency
                .scaled(&inv_sqrt, &inv_sqrt)
                .iter()
                .map(|(r, c, v)| (r, c, -v))
                .collect::<Vec<_>>();
            let diag = (0..n).map(|i| (i, i, 1.0));
            CsrMatrix::from_triplets(n, n, off.into_iter().chain(diag).collect::<Vec<_>>())?
        }
    };
    Ok(ShiftOperator { matrix, kind })
}
