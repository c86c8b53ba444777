use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A radius left the open interval where the warping factor is admissible.
    #[error("radius {r}{} is outside the admissible interval ({a}, {b})", node_suffix(*.node))]
    Domain {
        r: f64,
        a: f64,
        b: f64,
        node: Option<usize>,
    },

    #[error("{what} failed to converge: {detail}")]
    Convergence { what: &'static str, detail: String },

    #[error("length mismatch: expected {expected} node values, got {actual}")]
    Size { expected: usize, actual: usize },

    #[error("index k = {k} outside 0..={n}")]
    Index { k: usize, n: usize },

    /// Principal curvatures left the cone on which the speed is defined.
    #[error("principal curvatures {kappa:?}{} leave the Gamma_{k} cone", node_suffix(*.node))]
    ConeViolation {
        node: Option<usize>,
        k: usize,
        kappa: Vec<f64>,
    },

    #[error("non-finite value in {what}{}", node_suffix(*.node))]
    NonFinite {
        what: &'static str,
        node: Option<usize>,
    },

    #[error("mean curvature H = {h} <= 0 at node {node}")]
    MeanConvexity { node: usize, h: f64 },

    #[error("value {value} outside tabulated range [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),
}

fn node_suffix(node: Option<usize>) -> String {
    node.map(|i| format!(" at node {i}")).unwrap_or_default()
}

impl Error {
    /// Attaches a node index to a domain error raised by a pointwise evaluation.
    pub(crate) fn at_node(self, i: usize) -> Self {
        match self {
            Error::Domain { r, a, b, .. } => Error::Domain {
                r,
                a,
                b,
                node: Some(i),
            },
            Error::ConeViolation { k, kappa, .. } => Error::ConeViolation {
                node: Some(i),
                k,
                kappa,
            },
            other => other,
        }
    }
}
