//! Quadrature, element loops and mortar coupling.

mod mortar;
mod quadrature;
mod volume;

pub use mortar::{
    assemble_coupling, assemble_multiplier_gram, build_multiplier, Coupling, MultiplierFace,
    MultiplierKind, MultiplierSpace,
};
pub use quadrature::{gauss_legendre, span_rule};
pub(crate) use volume::element_table;
pub use volume::{
    assemble_curlcurl, assemble_load, assemble_mass, assemble_matrix, assemble_matrix_on,
    default_points, element_functions, fold_elements, fold_patch_elements, map_elements,
    Coefficient, Element, Operator, QPoint, VectorField,
};
