//! Built-in models and actions selected by family name.

use std::fs;
use std::path::Path;

use chamberwalk::action::{
    FinitePermutationAction, FreeGroupAction, FreeProductAction, IntegerTranslations, LatticeAction,
};
use chamberwalk::netwalk::{cycle_network, path_network, FiniteNetwork};

use crate::config::Settings;
use crate::Failure;

pub fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Schema(format!("{}: {e}", path.display())))
}

/// A finite network from `--network` or the `path`/`cycle` families.
pub fn finite_network(s: &Settings) -> Result<FiniteNetwork, Failure> {
    if let Some(path) = &s.network {
        return Ok(FiniteNetwork::from_json(&read(path)?)?);
    }
    let n = s.n.unwrap_or(6);
    match s.family.as_deref() {
        Some("path") => Ok(path_network(n)),
        Some("cycle") => Ok(cycle_network(n)),
        other => Err(Failure::Schema(format!("no finite network family {other:?}; use path, cycle or --network"))),
    }
}

/// Work to run against whichever action the settings select.
pub trait ActionJob {
    type Output;
    fn run<A: LatticeAction>(self, action: &A) -> Result<Self::Output, Failure>;
}

pub fn with_action<J: ActionJob>(s: &Settings, job: J) -> Result<J::Output, Failure> {
    match s.family.as_deref() {
        Some("free2-tree") => job.run(&FreeGroupAction::new(2)?),
        Some("free-group") => job.run(&FreeGroupAction::new(s.rank.unwrap_or(2))?),
        Some("free-product") => job.run(&FreeProductAction::new(s.q_single(2))?),
        Some("integers") => job.run(&IntegerTranslations::new(s.period.unwrap_or(1))?),
        Some("cycle-rotation") => {
            job.run(&FinitePermutationAction::cycle_rotation(s.n.unwrap_or(6), s.shift.unwrap_or(2))?)
        }
        Some("file") | None if s.action.is_some() => {
            let net = finite_network(s)?;
            let text = read(s.action.as_deref().expect("checked above"))?;
            job.run(&FinitePermutationAction::from_json(net, &text)?)
        }
        other => Err(Failure::Schema(format!(
            "unknown action family {other:?}; expected free2-tree, free-group, free-product, integers, cycle-rotation or --action"
        ))),
    }
}
