//! `pdd gen`: writes a seeded random instance.

use anyhow::{Context, Result};

use crate::app;
use crate::args::GenArgs;

pub fn run(args: &GenArgs) -> Result<()> {
    let inst = app::generate(args.app, &args.gen, args.seed)?;
    app::write_instance(&inst, &args.out).with_context(|| format!("writing {}", args.out.display()))
}
