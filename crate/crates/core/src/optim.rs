//! First-order optimizers for parameter vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    GradientDescent,
    Adam,
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "adam" => Ok(OptimizerKind::Adam),
            "gd" | "sgd" | "gradient_descent" => Ok(OptimizerKind::GradientDescent),
            other => Err(Error::InvalidArgument(format!("unknown optimizer {other:?}"))),
        }
    }
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OptimizerKind::GradientDescent => "gradient_descent",
            OptimizerKind::Adam => "adam",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Stateful minimizer: each `step` moves `params` against `grad`.
#[derive(Debug, Clone)]
pub enum Optimizer {
    GradientDescent {
        lr: f64,
    },
    Adam {
        lr: f64,
        hyper: AdamParams,
        m: Vec<f64>,
        v: Vec<f64>,
        t: i32,
    },
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, hyper: AdamParams, n_params: usize) -> Self {
        match kind {
            OptimizerKind::GradientDescent => Optimizer::GradientDescent { lr },
            OptimizerKind::Adam => Optimizer::Adam {
                lr,
                hyper,
                m: vec![0.0; n_params],
                v: vec![0.0; n_params],
                t: 0,
            },
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        debug_assert_eq!(params.len(), grad.len());
        match self {
            Optimizer::GradientDescent { lr } => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= *lr * g;
                }
            }
            Optimizer::Adam { lr, hyper, m, v, t } => {
                *t += 1;
                let bc1 = 1.0 - hyper.beta1.powi(*t);
                let bc2 = 1.0 - hyper.beta2.powi(*t);
                for i in 0..params.len() {
                    m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * grad[i];
                    v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * grad[i] * grad[i];
                    let m_hat = m[i] / bc1;
                    let v_hat = v[i] / bc2;
                    params[i] -= *lr * m_hat / (v_hat.sqrt() + hyper.epsilon);
                }
            }
        }
    }
}
