use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use fqgroups::weil::{enumerate, format_corpus, parse_corpus, ClassSource, WeilError, WeilPolynomial};

/// Directory of enumeration results, one `q<q>_g<g>.txt` file per
/// `(q, g)` in the corpus text format.
#[derive(Clone, Debug)]
pub struct CorpusCache {
    dir: PathBuf,
}

impl CorpusCache {
    pub fn new(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(CorpusCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, q: u64, g: usize) -> PathBuf {
        self.dir.join(format!("q{q}_g{g}.txt"))
    }

    /// The cached enumeration, or `None` if it is missing or unreadable.
    pub fn load(&self, q: u64, g: usize) -> Option<Vec<WeilPolynomial>> {
        let text = fs::read_to_string(self.path(q, g)).ok()?;
        parse_corpus(&text, q, g).ok()
    }

    pub fn store(&self, q: u64, g: usize, polys: &[WeilPolynomial]) -> io::Result<()> {
        write_atomically(&self.path(q, g), format_corpus(q, g, polys).as_bytes())
    }

    /// Reads `(q, g)` from the cache, enumerating and storing it on a miss.
    pub fn load_or_enumerate(&self, q: u64, g: usize) -> Result<Vec<WeilPolynomial>, CacheError> {
        if let Some(hit) = self.load(q, g) {
            return Ok(hit);
        }
        let all = enumerate(q, g)?;
        self.store(q, g, &all)?;
        Ok(all)
    }
}

impl ClassSource for CorpusCache {
    fn enumerated(&self, q: u64, g: usize) -> Option<Vec<WeilPolynomial>> {
        self.load(q, g)
    }
}

#[derive(Debug)]
pub enum CacheError {
    Io(io::Error),
    Weil(WeilError),
}

impl From<io::Error> for CacheError {
    fn from(e: io::Error) -> Self {
        CacheError::Io(e)
    }
}

impl From<WeilError> for CacheError {
    fn from(e: WeilError) -> Self {
        CacheError::Weil(e)
    }
}

impl std::fmt::Display for CacheError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CacheError::Io(e) => write!(f, "{e}"),
            CacheError::Weil(e) => write!(f, "{e}"),
        }
    }
}

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Writes `path` through a temporary file in the same directory, so readers
/// see either the old contents or the new ones.
pub fn write_atomically(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let n = TEMP_COUNTER.fetch_add(1, Ordering::Relaxed);
    let tmp = dir.join(format!(".{name}.{}.{n}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}
