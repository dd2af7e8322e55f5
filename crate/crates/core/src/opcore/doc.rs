//! JSON document form `{"kind": ..., "params": ...}` of operator expressions.

use serde::{Deserialize, Serialize};

use super::{DenseMatrix, DiagonalSeq, OperatorExpr};
use crate::circlemeasure::CircleMeasure;
use crate::error::Error;
use crate::scalar::Scalar;
use crate::shiftlab::WeightRule;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", bound = "")]
pub enum OperatorDoc<S: Scalar> {
    FiniteMatrix {
        rows: DenseMatrix<S>,
    },
    WeightedShift {
        weights: WeightRule,
    },
    Diagonal {
        entries: DiagonalSeq,
    },
    MeasureMultiplication {
        measure: CircleMeasure,
    },
    DirectSum {
        left: Box<OperatorDoc<S>>,
        right: Box<OperatorDoc<S>>,
    },
    Conjugate {
        s: DenseMatrix<S>,
        inner: Box<OperatorDoc<S>>,
    },
}

impl<S: Scalar> TryFrom<OperatorDoc<S>> for OperatorExpr<S> {
    type Error = Error;

    fn try_from(doc: OperatorDoc<S>) -> Result<Self, Error> {
        Ok(match doc {
            OperatorDoc::FiniteMatrix { rows } => OperatorExpr::FiniteMatrix(rows),
            OperatorDoc::WeightedShift { weights } => OperatorExpr::shift(weights)?,
            OperatorDoc::Diagonal { entries } => OperatorExpr::diagonal(entries)?,
            OperatorDoc::MeasureMultiplication { measure } => OperatorExpr::multiplication(measure)?,
            OperatorDoc::DirectSum { left, right } => {
                OperatorExpr::direct_sum(Self::try_from(*left)?, Self::try_from(*right)?)
            }
            OperatorDoc::Conjugate { s, inner } => OperatorExpr::conjugate(s, Self::try_from(*inner)?)?,
        })
    }
}

impl<S: Scalar> From<OperatorExpr<S>> for OperatorDoc<S> {
    fn from(op: OperatorExpr<S>) -> Self {
        match op {
            OperatorExpr::FiniteMatrix(rows) => OperatorDoc::FiniteMatrix { rows },
            OperatorExpr::WeightedShift(weights) => OperatorDoc::WeightedShift { weights },
            OperatorExpr::Diagonal(entries) => OperatorDoc::Diagonal { entries },
            OperatorExpr::MeasureMultiplication(measure) => OperatorDoc::MeasureMultiplication { measure },
            OperatorExpr::DirectSum(l, r) => OperatorDoc::DirectSum {
                left: Box::new((*l).into()),
                right: Box::new((*r).into()),
            },
            OperatorExpr::Conjugate { s, inner, .. } => OperatorDoc::Conjugate {
                s,
                inner: Box::new((*inner).into()),
            },
        }
    }
}
