//! Loading extension libraries from a directory.
//!
//! An extension library is a `cdylib` built against this crate that exports
//! its registration function with [`export_extensions!`](crate::export_extensions).
//! Rust has no stable ABI, so the library also exports the crate version and
//! compiler it was built with, and loading refuses any mismatch.

use std::ffi::OsStr;
use std::path::{Path, PathBuf};

use super::{ExtensionRegistrar, TranslationError};

/// Build identity an extension must match to be loaded.
pub const EXTENSION_ABI: &str = concat!("csx-core ", env!("CARGO_PKG_VERSION"), "; ", env!("CSX_RUSTC_VERSION"));

pub const ABI_SYMBOL: &[u8] = b"csx_extension_abi";
pub const REGISTER_SYMBOL: &[u8] = b"csx_register_extensions";

type AbiFn = unsafe extern "C" fn(*mut usize) -> *const u8;
type RegisterFn = unsafe extern "C" fn(*mut &mut dyn ExtensionRegistrar);

/// Exports `$register: fn(&mut dyn ExtensionRegistrar)` from a `cdylib`.
#[macro_export]
macro_rules! export_extensions {
    ($register:path) => {
        #[no_mangle]
        pub extern "C" fn csx_extension_abi(len: *mut usize) -> *const u8 {
            let abi = $crate::translation::EXTENSION_ABI;
            if !len.is_null() {
                // SAFETY: the loader passes a valid pointer.
                unsafe { *len = abi.len() };
            }
            abi.as_ptr()
        }

        /// # Safety
        /// `registrar` must point to a live registrar for the duration of the call.
        #[no_mangle]
        pub unsafe extern "C" fn csx_register_extensions(
            registrar: *mut &mut dyn $crate::translation::ExtensionRegistrar,
        ) {
            // SAFETY: guaranteed by the caller.
            let registrar: &mut dyn $crate::translation::ExtensionRegistrar = unsafe { &mut **registrar };
            $register(registrar);
        }
    };
}

fn load_error(path: &Path, message: impl Into<String>) -> TranslationError {
    TranslationError::ExtensionLoad {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Every regular file in `dir` with the platform's dynamic-library suffix,
/// sorted by name.
pub(super) fn library_files(dir: &Path) -> Result<Vec<PathBuf>, TranslationError> {
    let entries = std::fs::read_dir(dir).map_err(|e| {
        TranslationError::Startup(format!("cannot read extensions directory {}: {e}", dir.display()))
    })?;
    let suffix = OsStr::new(std::env::consts::DLL_EXTENSION);
    let mut files = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|e| TranslationError::Startup(format!("cannot read {}: {e}", dir.display())))?
            .path();
        if path.is_file() && path.extension() == Some(suffix) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub(super) fn load_dir(dir: &Path, registrar: &mut dyn ExtensionRegistrar) -> Result<Vec<PathBuf>, TranslationError> {
    let files = library_files(dir)?;
    for path in &files {
        load_library(path, registrar)?;
    }
    Ok(files)
}

fn load_library(path: &Path, registrar: &mut dyn ExtensionRegistrar) -> Result<(), TranslationError> {
    // SAFETY: loading runs the library's initializers; extension libraries
    // are trusted code chosen by whoever configured the extensions directory.
    let library = unsafe { libloading::Library::new(path) }.map_err(|e| load_error(path, e.to_string()))?;

    // SAFETY: the symbol type matches the one emitted by `export_extensions!`.
    let abi = unsafe { library.get::<AbiFn>(ABI_SYMBOL) }
        .map_err(|_| load_error(path, "not an extension library (no csx_extension_abi symbol)"))?;
    let mut len = 0usize;
    // SAFETY: returns a pointer to a static string of `len` bytes.
    let found = unsafe {
        let ptr = abi(&mut len);
        std::slice::from_raw_parts(ptr, len)
    };
    if found != EXTENSION_ABI.as_bytes() {
        return Err(load_error(
            path,
            format!(
                "built for '{}', expected '{EXTENSION_ABI}'",
                String::from_utf8_lossy(found)
            ),
        ));
    }

    // SAFETY: as above; the ABI check ensures both sides agree on the
    // registrar's vtable layout.
    let register = unsafe { library.get::<RegisterFn>(REGISTER_SYMBOL) }
        .map_err(|_| load_error(path, "missing csx_register_extensions symbol"))?;
    let mut handle: &mut dyn ExtensionRegistrar = registrar;
    unsafe { register(&mut handle) };

    // Factories and the objects they create point into the library's code,
    // so it stays loaded for the life of the process.
    std::mem::forget(library);
    Ok(())
}
