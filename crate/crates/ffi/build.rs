fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    match cbindgen::generate(&crate_dir) {
        Ok(bindings) => {
            bindings.write_to_file(format!("{crate_dir}/include/fracsep.h"));
        }
        // header generation must not break a plain `cargo build` (e.g.
        // while the crate itself still has syntax errors mid-edit)
        Err(e) => println!("cargo:warning=cbindgen skipped: {e}"),
    }
}
