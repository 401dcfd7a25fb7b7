//! C ABI for the heatkern library: opaque handles, status codes, and a
//! cbindgen-generated header (include/heatkern.h).

mod ffi;

pub use ffi::*;
