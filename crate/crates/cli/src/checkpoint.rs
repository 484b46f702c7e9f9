//! `sqg checkpoint info|diff`.

use std::fs::File;
use std::path::Path;

use anyhow::{Context, Result};
use sqg_core::checkpoint::Checkpoint;

pub fn info(path: &Path) -> Result<()> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let h = Checkpoint::read_header(file).with_context(|| path.display().to_string())?;
    println!("n = {}", h.n);
    println!("length = {:?}", h.length);
    println!("gamma = {:?}", h.gamma);
    println!("time = {:?}", h.time);
    Ok(())
}

pub fn diff(a: &Path, b: &Path) -> Result<()> {
    let load = |p: &Path| Checkpoint::load(p).with_context(|| p.display().to_string());
    let d = load(a)?.max_diff(&load(b)?)?;
    println!("max_diff = {d:?}");
    Ok(())
}
