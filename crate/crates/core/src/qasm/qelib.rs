//! Built-in gate table. `U` and `CX` are always available; the rest appear
//! once `include "qelib1.inc";` is seen.

use crate::state::GateKind;

pub const QELIB1: &str = "qelib1.inc";

pub fn lookup(name: &str, qelib_included: bool) -> Option<GateKind> {
    match name {
        "U" => return Some(GateKind::U),
        "CX" => return Some(GateKind::CX),
        _ => {}
    }
    if !qelib_included {
        return None;
    }
    GateKind::ALL
        .iter()
        .copied()
        .filter(|g| !matches!(g, GateKind::U | GateKind::CX))
        .find(|g| g.name() == name)
}
