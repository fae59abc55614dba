//! Dataset acquisition and caching.
//!
//! Named datasets resolve to SNAP download URLs. A download is normalized
//! to a plain edge list, hashed, and installed into the cache atomically;
//! the recorded sha256 is re-verified on every later load so cache
//! corruption surfaces as an error instead of bad numbers. Offline mode
//! never touches the network.
//!
//! The sha256 values for the named datasets are recorded on first
//! download (the hosts publish no checksums); from then on the cache is
//! pinned. `install_archive_bytes` lets an offline machine seed the cache
//! from a manually downloaded archive.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use sha2::{Digest, Sha256};

/// How a downloaded artifact becomes a plain edge list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceKind {
    /// Already a whitespace edge list (possibly with `#` comments).
    Plain,
    /// Gzip-compressed edge list.
    Gzip,
    /// Zip archive containing a `*_edges.csv` file with a header row.
    ZipEdgesCsv,
}

#[derive(Clone, Copy, Debug)]
pub struct DatasetSpec {
    pub name: &'static str,
    pub url: &'static str,
    /// Pinned sha256 of the normalized edge list, when known.
    pub sha256: Option<&'static str>,
    pub kind: SourceKind,
}

/// Built-in dataset registry.
pub const REGISTRY: &[DatasetSpec] = &[
    DatasetSpec {
        name: "deezer",
        url: "https://snap.stanford.edu/data/deezer_europe.zip",
        sha256: None,
        kind: SourceKind::ZipEdgesCsv,
    },
    DatasetSpec {
        name: "dblp",
        url: "https://snap.stanford.edu/data/bigdata/communities/com-dblp.ungraph.txt.gz",
        sha256: None,
        kind: SourceKind::Gzip,
    },
    DatasetSpec {
        name: "amazon",
        url: "https://snap.stanford.edu/data/bigdata/communities/com-amazon.ungraph.txt.gz",
        sha256: None,
        kind: SourceKind::Gzip,
    },
];

pub fn dataset_by_name(name: &str) -> Option<&'static DatasetSpec> {
    REGISTRY.iter().find(|d| d.name == name)
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

/// Resolves graph sources: local paths pass through, registry names and
/// URLs download into the cache once and verify their checksum afterwards.
pub struct Fetcher {
    cache_dir: PathBuf,
    offline: bool,
}

impl Fetcher {
    pub fn new(cache_dir: impl Into<PathBuf>, offline: bool) -> Self {
        Fetcher {
            cache_dir: cache_dir.into(),
            offline,
        }
    }

    pub fn cache_dir(&self) -> &Path {
        &self.cache_dir
    }

    /// Local path, registry name, or URL, in that order of interpretation.
    pub fn resolve(&self, source: &str) -> Result<PathBuf> {
        if Path::new(source).is_file() {
            return Ok(PathBuf::from(source));
        }
        if let Some(spec) = dataset_by_name(source) {
            return self.fetch(spec.name, spec.url, spec.kind, spec.sha256);
        }
        if source.starts_with("http://") || source.starts_with("https://") {
            let name = url_cache_name(source);
            let kind = if source.ends_with(".gz") {
                SourceKind::Gzip
            } else if source.ends_with(".zip") {
                SourceKind::ZipEdgesCsv
            } else {
                SourceKind::Plain
            };
            return self.fetch(&name, source, kind, None);
        }
        bail!("{source}: not a file, a known dataset name, or a URL");
    }

    /// Cached, checksum-verified path for a dataset; downloads at most
    /// once.
    pub fn fetch(
        &self,
        name: &str,
        url: &str,
        kind: SourceKind,
        expected_sha256: Option<&str>,
    ) -> Result<PathBuf> {
        if let Some(path) = self.cached(name, expected_sha256)? {
            return Ok(path);
        }
        if self.offline {
            bail!(
                "offline mode and dataset {name:?} is not in the cache ({})",
                self.cache_dir.display()
            );
        }
        let raw = download(url)?;
        self.install_archive_bytes(name, &raw, kind, expected_sha256)
    }

    /// Verified cache lookup. `Ok(None)` means not cached; a cached file
    /// whose recorded or pinned checksum does not match is an error.
    pub fn cached(&self, name: &str, expected_sha256: Option<&str>) -> Result<Option<PathBuf>> {
        let path = self.data_path(name);
        if !path.is_file() {
            return Ok(None);
        }
        let bytes = fs::read(&path)
            .with_context(|| format!("reading cached dataset {}", path.display()))?;
        let actual = sha256_hex(&bytes);
        let recorded = match fs::read_to_string(self.sum_path(name)) {
            Ok(s) => s.trim().to_string(),
            // cache predates the checksum record: adopt the pinned value
            // if any, otherwise record what we have
            Err(_) => {
                let adopt = expected_sha256
                    .map(str::to_string)
                    .unwrap_or_else(|| actual.clone());
                fs::write(self.sum_path(name), &adopt)?;
                adopt
            }
        };
        if let Some(pinned) = expected_sha256 {
            if recorded != pinned {
                bail!(
                    "dataset {name}: recorded checksum {recorded} does not match pinned {pinned}"
                );
            }
        }
        if actual != recorded {
            bail!(
                "dataset {name}: cached file checksum {actual} does not match recorded {recorded} (cache corrupted; delete {} to re-download)",
                path.display()
            );
        }
        Ok(Some(path))
    }

    /// Normalize raw archive bytes, verify the pinned checksum when there
    /// is one, and install into the cache. The cache is left untouched on
    /// any failure.
    pub fn install_archive_bytes(
        &self,
        name: &str,
        raw: &[u8],
        kind: SourceKind,
        expected_sha256: Option<&str>,
    ) -> Result<PathBuf> {
        let normalized = normalize(raw, kind)?;
        let actual = sha256_hex(&normalized);
        if let Some(pinned) = expected_sha256 {
            if actual != pinned {
                bail!("dataset {name}: checksum mismatch: expected {pinned}, got {actual}");
            }
        }
        fs::create_dir_all(&self.cache_dir)?;
        let tmp = self.cache_dir.join(format!(".{name}.tmp"));
        fs::write(&tmp, &normalized)?;
        fs::write(self.sum_path(name), &actual)?;
        let path = self.data_path(name);
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    pub fn data_path(&self, name: &str) -> PathBuf {
        self.cache_dir.join(format!("{name}.txt"))
    }

    fn sum_path(&self, name: &str) -> PathBuf {
        self.cache_dir.join(format!("{name}.txt.sha256"))
    }
}

/// One-call form of the fetch flow for registry names or URLs.
pub fn fetch_dataset(source: &str, cache_dir: &Path, offline: bool) -> Result<PathBuf> {
    Fetcher::new(cache_dir, offline).resolve(source)
}

fn url_cache_name(url: &str) -> String {
    let base = url
        .rsplit('/')
        .next()
        .unwrap_or("download")
        .trim_end_matches(".gz")
        .trim_end_matches(".zip")
        .trim_end_matches(".txt")
        .to_string();
    // disambiguate identical basenames from different hosts
    format!("{base}-{}", &sha256_hex(url.as_bytes())[..8])
}

fn download(url: &str) -> Result<Vec<u8>> {
    let response = ureq::get(url)
        .call()
        .with_context(|| format!("downloading {url}"))?;
    let mut bytes = Vec::new();
    response
        .into_reader()
        .read_to_end(&mut bytes)
        .with_context(|| format!("reading body of {url}"))?;
    Ok(bytes)
}

fn normalize(raw: &[u8], kind: SourceKind) -> Result<Vec<u8>> {
    match kind {
        SourceKind::Plain => Ok(raw.to_vec()),
        SourceKind::Gzip => {
            let mut out = Vec::new();
            flate2::read::GzDecoder::new(raw)
                .read_to_end(&mut out)
                .context("decompressing gzip archive")?;
            Ok(out)
        }
        SourceKind::ZipEdgesCsv => {
            let mut archive =
                zip::ZipArchive::new(std::io::Cursor::new(raw)).context("opening zip archive")?;
            let entry_name = (0..archive.len())
                .filter_map(|i| archive.by_index(i).ok().map(|f| f.name().to_string()))
                .find(|n| n.ends_with("_edges.csv"))
                .ok_or_else(|| anyhow!("no *_edges.csv entry in zip archive"))?;
            let mut text = String::new();
            archive
                .by_name(&entry_name)
                .context("reading zip entry")?
                .read_to_string(&mut text)
                .context("decoding zip entry")?;
            Ok(csv_pairs_to_edge_list(&text))
        }
    }
}

/// Convert `node_1,node_2` CSV rows (with a header) to whitespace pairs.
fn csv_pairs_to_edge_list(text: &str) -> Vec<u8> {
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || !line.starts_with(|c: char| c.is_ascii_digit()) {
            continue; // header or blank
        }
        out.push_str(&line.replace(',', " "));
        out.push('\n');
    }
    out.into_bytes()
}
