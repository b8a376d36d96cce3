use std::fmt::Write;

use super::{EffectKind, ModelDistribution};

/// Human-readable dump of factors, symbols, partitions and count tables.
pub fn summary(h: &ModelDistribution) -> String {
    let mut out = String::new();
    let t = &h.trace;
    let _ = writeln!(out, "factors: {}", t.factors.len());
    for (f, table) in t.factors.iter().zip(&t.symbolizer.tables) {
        let _ = writeln!(out, "  f{} vars {:?} symbols {}", f.id, f.variables, table.len());
    }
    let _ = writeln!(out, "outcomes observed: {} of universe {}", t.outcomes.len(), t.universe);
    for (i, o) in t.outcomes.iter().enumerate() {
        let _ = writeln!(out, "  e{i}: factors {:?} -> {:?}", o.factors, o.values);
    }
    for om in &h.options {
        let _ = writeln!(
            out,
            "option {}: partitions {} unexecuted {} classifier {:?} precondition factors {:?}",
            om.option,
            om.partitions.len(),
            om.unexecuted.len(),
            om.classifier,
            om.precondition_factors
        );
        for &c in om.partitions.iter().chain(&om.unexecuted) {
            let e = &h.effects[c];
            let members: Vec<String> = e.members.iter().map(|m| m.to_string()).collect();
            let kind = match e.kind {
                EffectKind::Partition => "partition".to_string(),
                EffectKind::Unexecuted { matched } => match matched {
                    Some(m) => format!("unexecuted (matches c{m})"),
                    None => "unexecuted".to_string(),
                },
            };
            let counts: Vec<String> = e.model.counts().iter().map(|(k, v)| format!("e{k}:{v}")).collect();
            let _ = writeln!(out, "  c{c} {kind} [{}] counts {{{}}}", members.join(" "), counts.join(", "));
        }
        for &p in &om.preconditions {
            let pc = &h.preconditions[p];
            let _ = writeln!(
                out,
                "  pre {:?}: Beta({}, {}) mean {:.3}",
                pc.key,
                pc.model.alpha,
                pc.model.beta,
                pc.model.mean()
            );
        }
    }
    out
}
