//! Nested ideal-lattice codes for the fading wiretap channel.
//!
//! ```
//! # fn main() -> lattice_wiretap::Result<()> {
//! use lattice_wiretap::numberfield::NumberField;
//! use lattice_wiretap::receiver::decode;
//! use lattice_wiretap::seeds::stream_rng;
//! use lattice_wiretap::wiretap::{design_code, Message, NestingSpec};
//! use num_complex::Complex64;
//!
//! let field = NumberField::from_catalog("Q(zeta8)")?;
//! let code = design_code(&field, 2, 10.0, 2f64.ln() / 2.0, 4.5, &NestingSpec::Auto)?;
//! let mut rng = stream_rng(1, 0);
//! let x = code.encode(Message(1), &mut rng)?;
//! let h = [Complex64::new(1.0, 0.0); 2];
//! assert_eq!(decode(&code, &x.point, &h, 1e12)?, Message(1));
//! # Ok(())
//! # }
//! ```

pub mod analysis;
pub mod channel;
pub mod error;
pub mod gaussian;
pub mod lattice;
pub mod numberfield;
pub mod quadrature;
pub mod receiver;
pub mod seeds;
pub mod wiretap;

pub use error::{Error, Result};
