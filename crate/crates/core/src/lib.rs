//! Exact Cartan equivalence computations on totally nondegenerate model CR
//! manifolds of CR dimension one and arbitrary codimension `k`.
//!
//! The pipeline builds the model `M_k`, its graded frame, the ambiguity matrix
//! of lifted coframes, the absorption system, and finally the graded symmetry
//! algebra with a rigidity verdict.

pub mod exactalg;
pub mod freelie;
pub mod model;
pub mod frame;
pub mod ambiguity;
pub mod cartan;
pub mod liealg;
pub mod report;
