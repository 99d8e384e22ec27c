//! Print the source of the default Gaussian mixture model.
//!
//! `cargo run -p sppl-core --example emit_gmm > gmm.sppl`

use sppl::oracle::{gmm_source, GmmSpec};

fn main() {
    print!("{}", gmm_source(&GmmSpec::default()));
}
