//! Error type shared by all library modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("netlist build error: {0}")]
    Build(String),
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("stress computation error: {0}")]
    Stress(String),
    #[error("timing error: {0}")]
    Timing(String),
    #[error("attack construction error: {0}")]
    Attack(String),
    #[error("tamper plan does not match netlist: {0}")]
    PlanMismatch(String),
    #[error("fault table error: {0}")]
    Fault(String),
    #[error("inference error: {0}")]
    Inference(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
