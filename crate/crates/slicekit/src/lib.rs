//! slicekit: STL meshes in, printer-ready G-code and build estimates out.
//!
//! The pipeline mirrors the usual FDM workflow: load and validate an STL
//! mesh, cut it into layers, plan perimeters and infill, emit G-code, and
//! estimate time, filament volume, and mass. A melt-flow model caps print
//! speeds at what the hotend can actually melt.

pub mod cli;
pub mod estimator;
pub mod flow;
pub mod gcode;
pub mod geom;
pub mod mesh_io;
pub mod offset;
pub mod profile;
pub mod shapes;
pub mod slicer;
pub mod svg;
pub mod toolpath;
