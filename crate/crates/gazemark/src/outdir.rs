//! Output directory that removes what it wrote unless the run commits.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

pub struct OutputDir {
    root: PathBuf,
    created_root: bool,
    written: Vec<PathBuf>,
    committed: bool,
}

impl OutputDir {
    pub fn create(root: &Path) -> io::Result<Self> {
        let created_root = !root.exists();
        fs::create_dir_all(root)?;
        Ok(OutputDir { root: root.to_path_buf(), created_root, written: Vec::new(), committed: false })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    /// Writes `name` (a bare file name) through `fill`.
    pub fn write<E>(&mut self, name: &str, fill: impl FnOnce(&mut BufWriter<File>) -> Result<(), E>) -> anyhow::Result<PathBuf>
    where
        E: std::error::Error + Send + Sync + 'static,
    {
        assert!(!name.contains(['/', '\\']) && name != ".." && !name.is_empty(), "output names are plain file names");
        let path = self.root.join(name);
        if !self.written.contains(&path) {
            self.written.push(path.clone());
        }
        let mut w = BufWriter::new(File::create(&path)?);
        fill(&mut w).map_err(|e| anyhow::Error::new(e).context(format!("writing {}", path.display())))?;
        w.flush()?;
        Ok(path)
    }

    pub fn write_str(&mut self, name: &str, text: &str) -> anyhow::Result<PathBuf> {
        self.write(name, |w| w.write_all(text.as_bytes()))
    }

    /// Keeps everything written so far.
    pub fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.written)
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
        if self.created_root {
            let _ = fs::remove_dir(&self.root);
        }
    }
}
