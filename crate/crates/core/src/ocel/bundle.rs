//! Named-file containers for the relational CSV bundle.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;

pub trait BundleSink {
    fn create(&mut self, name: &str) -> io::Result<Box<dyn Write + '_>>;
}

pub trait BundleSource {
    /// `Ok(None)` when the bundle has no file of that name.
    fn open(&self, name: &str) -> io::Result<Option<Box<dyn Read + '_>>>;
}

/// A directory on disk; created on first write.
#[derive(Debug, Clone)]
pub struct DirBundle {
    pub root: PathBuf,
}

impl DirBundle {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }
}

impl BundleSink for DirBundle {
    fn create(&mut self, name: &str) -> io::Result<Box<dyn Write + '_>> {
        fs::create_dir_all(&self.root)?;
        Ok(Box::new(BufWriter::new(File::create(self.root.join(name))?)))
    }
}

impl BundleSource for DirBundle {
    fn open(&self, name: &str) -> io::Result<Option<Box<dyn Read + '_>>> {
        match File::open(self.root.join(name)) {
            Ok(f) => Ok(Some(Box::new(io::BufReader::new(f)))),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemoryBundle {
    pub files: BTreeMap<String, Vec<u8>>,
}

impl BundleSink for MemoryBundle {
    fn create(&mut self, name: &str) -> io::Result<Box<dyn Write + '_>> {
        let buf = self.files.entry(name.to_string()).or_default();
        buf.clear();
        Ok(Box::new(buf))
    }
}

impl BundleSource for MemoryBundle {
    fn open(&self, name: &str) -> io::Result<Option<Box<dyn Read + '_>>> {
        Ok(self.files.get(name).map(|b| Box::new(&b[..]) as Box<dyn Read>))
    }
}
