//! Module resolution: maps `/m` to the parsed contents of `m.mod`.
//!
//! Modules load lazily on first use and are cached for the lifetime of the
//! registry. Programs registered inline take precedence over files.

use std::collections::HashMap;
use std::env;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};

use crate::error::RegistryError;
use crate::syntax::{parse_module_file, Decl, ModuleName, Program};

/// Environment variable holding extra module directories.
pub const PATH_ENV: &str = "MODLANG_PATH";

/// File extension of module files.
pub const EXTENSION: &str = "mod";

#[derive(Debug, Default)]
struct State {
    cache: HashMap<ModuleName, Arc<Program>>,
    /// Modules whose imports are currently being expanded, outermost first.
    loading: Vec<ModuleName>,
}

#[derive(Debug, Default)]
pub struct ModuleRegistry {
    search_path: Vec<PathBuf>,
    state: Mutex<State>,
}

impl Clone for ModuleRegistry {
    fn clone(&self) -> Self {
        let state = self.lock();
        ModuleRegistry {
            search_path: self.search_path.clone(),
            state: Mutex::new(State {
                cache: state.cache.clone(),
                loading: Vec::new(),
            }),
        }
    }
}

impl ModuleRegistry {
    pub fn new(search_path: Vec<PathBuf>) -> Self {
        ModuleRegistry {
            search_path,
            state: Mutex::default(),
        }
    }

    /// Search order: `extra` directories, then `MODLANG_PATH`, then the
    /// current directory.
    pub fn from_env(extra: &[PathBuf]) -> Self {
        let mut path = extra.to_vec();
        if let Some(var) = env::var_os(PATH_ENV) {
            path.extend(env::split_paths(&var).filter(|p| !p.as_os_str().is_empty()));
        }
        path.push(PathBuf::from("."));
        Self::new(path)
    }

    pub fn search_path(&self) -> &[PathBuf] {
        &self.search_path
    }

    pub fn push_search_dir(&mut self, dir: impl Into<PathBuf>) {
        self.search_path.push(dir.into());
    }

    pub fn prepend_search_dir(&mut self, dir: impl Into<PathBuf>) {
        self.search_path.insert(0, dir.into());
    }

    fn lock(&self) -> MutexGuard<'_, State> {
        self.state.lock().expect("registry lock poisoned")
    }

    /// Make `program` the contents of `name`, shadowing any file and any
    /// earlier registration.
    pub fn register_inline(&mut self, name: ModuleName, program: Program) -> &mut Self {
        self.lock().cache.insert(name, Arc::new(program));
        self
    }

    pub fn with_module(mut self, name: ModuleName, program: Program) -> Self {
        self.register_inline(name, program);
        self
    }

    pub fn is_loaded(&self, name: &ModuleName) -> bool {
        self.lock().cache.contains_key(name)
    }

    /// Return the declarations of module `name` exactly as written.
    pub fn resolve(&self, name: &ModuleName) -> Result<Arc<Program>, RegistryError> {
        {
            let state = self.lock();
            if let Some(i) = state.loading.iter().position(|m| m == name) {
                let mut chain = state.loading[i..].to_vec();
                chain.push(name.clone());
                return Err(RegistryError::CyclicImport { chain });
            }
            if let Some(p) = state.cache.get(name) {
                return Ok(p.clone());
            }
        }
        let program = Arc::new(self.load_file(name)?);
        // A concurrent resolver may have won the race; keep whichever is
        // cached so every caller sees the same Program.
        let mut state = self.lock();
        Ok(state.cache.entry(name.clone()).or_insert(program).clone())
    }

    fn load_file(&self, name: &ModuleName) -> Result<Program, RegistryError> {
        let file_name = format!("{name}.{EXTENSION}");
        let mut searched = Vec::new();
        for dir in &self.search_path {
            let path = dir.join(&file_name);
            if path.is_file() {
                return read_module(&path, name);
            }
            searched.push(path);
        }
        Err(RegistryError::ModuleNotFound {
            name: name.clone(),
            searched,
        })
    }

    /// Resolve `name` and splice in the transitive closure of its imports.
    /// Queries and definitions are left in place.
    pub fn resolve_closure(&self, name: &ModuleName) -> Result<Program, RegistryError> {
        let program = self.resolve(name)?;
        self.lock().loading.push(name.clone());
        let result = self.splice_imports(&program);
        self.lock().loading.pop();
        result
    }

    fn splice_imports(&self, program: &Program) -> Result<Program, RegistryError> {
        let mut out = Vec::with_capacity(program.len());
        for decl in program {
            match decl {
                Decl::Import(m) => out.extend(self.resolve_closure(m)?.decls),
                other => out.push(other.clone()),
            }
        }
        Ok(Program::new(out))
    }
}

/// Read and parse a module file, checking that its header matches `expected`.
pub fn read_module(path: &Path, expected: &ModuleName) -> Result<Program, RegistryError> {
    let source = fs::read_to_string(path).map_err(|e| RegistryError::Io {
        file: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let (declared, program) = parse_module_file(&source).map_err(|error| RegistryError::Parse {
        file: path.to_path_buf(),
        error,
    })?;
    if &declared != expected {
        return Err(RegistryError::HeaderMismatch {
            file: path.to_path_buf(),
            declared: declared.to_string(),
            expected: expected.clone(),
        });
    }
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    fn m(s: &str) -> ModuleName {
        ModuleName::new(s).unwrap()
    }

    fn write(dir: &Path, name: &str, body: &str) {
        fs::write(dir.join(format!("{name}.mod")), body).unwrap();
    }

    #[test]
    fn resolves_and_caches() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "mf", "/mf = fib(1) = 1. fib(2) = 1. fib(n+2) = fib(n) + fib(n+1).");
        let reg = ModuleRegistry::new(vec![dir.path().to_path_buf()]);
        let first = reg.resolve(&m("mf")).unwrap();
        assert_eq!(first.len(), 3);
        fs::remove_file(dir.path().join("mf.mod")).unwrap();
        let second = reg.resolve(&m("mf")).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn missing_module() {
        let dir = tempfile::tempdir().unwrap();
        let reg = ModuleRegistry::new(vec![dir.path().to_path_buf()]);
        let err = reg.resolve(&m("nosuch")).unwrap_err();
        let RegistryError::ModuleNotFound { name, searched } = err else {
            panic!("{err:?}")
        };
        assert_eq!(name, m("nosuch"));
        assert_eq!(searched, vec![dir.path().join("nosuch.mod")]);
    }

    #[test]
    fn first_directory_wins() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        write(a.path(), "k", "/k = k = 1.");
        write(b.path(), "k", "/k = k = 2. j = 3.");
        let reg = ModuleRegistry::new(vec![a.path().into(), b.path().into()]);
        assert_eq!(reg.resolve(&m("k")).unwrap().len(), 1);
    }

    #[test]
    fn header_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a", "/b = f = 1.");
        let reg = ModuleRegistry::new(vec![dir.path().into()]);
        assert!(matches!(
            reg.resolve(&m("a")),
            Err(RegistryError::HeaderMismatch { ref declared, .. }) if declared == "b"
        ));
    }

    #[test]
    fn parse_errors_carry_file() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "bad", "/bad = f(x = 1.");
        let reg = ModuleRegistry::new(vec![dir.path().into()]);
        assert!(matches!(reg.resolve(&m("bad")), Err(RegistryError::Parse { .. })));
    }

    #[test]
    fn inline_registration_shadows_files() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "mf", "/mf = fib(1) = 1.");
        let mut reg = ModuleRegistry::new(vec![dir.path().into()]);
        let inline = parse_program("fib(1) = 100. fib(2) = 200.").unwrap();
        reg.register_inline(m("mf"), inline.clone());
        assert_eq!(*reg.resolve(&m("mf")).unwrap(), inline);

        reg.register_inline(m("empty"), Program::default());
        assert!(reg.resolve(&m("empty")).unwrap().is_empty());
    }

    #[test]
    fn last_registration_wins() {
        let mut reg = ModuleRegistry::default();
        reg.register_inline(m("x"), parse_program("f = 1.").unwrap());
        reg.register_inline(m("x"), parse_program("f = 2. g = 3.").unwrap());
        assert_eq!(reg.resolve(&m("x")).unwrap().len(), 2);
    }

    #[test]
    fn two_module_cycle() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a", "/a = /b. f = 1.");
        write(dir.path(), "b", "/b = /a. g = 2.");
        let reg = ModuleRegistry::new(vec![dir.path().into()]);
        let err = reg.resolve_closure(&m("a")).unwrap_err();
        assert_eq!(
            err,
            RegistryError::CyclicImport {
                chain: vec![m("a"), m("b"), m("a")]
            }
        );
        // The failed expansion leaves nothing marked as loading.
        assert_eq!(reg.resolve(&m("a")).unwrap().len(), 2);
    }

    #[test]
    fn closure_splices_in_place() {
        let reg = ModuleRegistry::default()
            .with_module(m("a"), parse_program("x = 1. /b. y = 2.").unwrap())
            .with_module(m("b"), parse_program("z = 3.").unwrap());
        let closure = reg.resolve_closure(&m("a")).unwrap();
        assert_eq!(closure.to_string(), "x() = 1.\nz() = 3.\ny() = 2.\n");
        // Diamond imports are not cycles.
        let reg = reg
            .with_module(m("c"), parse_program("/b. /b.").unwrap());
        assert_eq!(reg.resolve_closure(&m("c")).unwrap().len(), 2);
    }
}
