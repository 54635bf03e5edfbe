//! Motor-imagery EEG classification with marginalized discrete wavelet
//! features, Dirichlet/beta modelling and feature selection after a
//! parallel nonlinear transformation.
//!
//! Pipeline: [`msignal`] turns raw channels into mDWT vectors on the simplex,
//! [`dirstat`] fits Dirichlet parameters, [`neutral`] decorrelates the vectors
//! into independent beta coordinates, [`selection`] ranks channels and keeps
//! the most informative coordinates, and [`classify`] makes the MAP decision.

pub mod classify;
pub mod dataset;
pub mod dirstat;
pub mod error;
pub mod msignal;
pub mod neutral;
pub mod selection;

pub use dataset::{FeatureTrial, Label};
pub use error::{Error, Result};
pub use msignal::MdwtVector;
