// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::fmt::Write;

use indexmap::IndexMap;

use super::{graph, is_valid_name, key_input_index, Gate, GateKind, Netlist, NetlistError, Result};

enum Line<'a> {
    Input(&'a str),
    Output(&'a str),
    Gate {
        name: &'a str,
        kind: GateKind,
        args: Vec<&'a str>,
    },
}

fn syntax(line: usize, message: impl Into<String>) -> NetlistError {
    NetlistError::Syntax {
        line,
        message: message.into(),
    }
}

fn checked_name(line: usize, s: &str) -> Result<&str> {
    let s = s.trim();
    if is_valid_name(s) {
        Ok(s)
    } else {
        Err(syntax(line, format!("invalid signal name `{s}`")))
    }
}

/// Splits `KEYWORD(args)` into the keyword and the argument text.
fn split_call(line: usize, text: &str) -> Result<(&str, &str)> {
    let open = text.find('(').ok_or_else(|| syntax(line, "expected `(`"))?;
    let rest = text[open + 1..].trim_end();
    let args = rest
        .strip_suffix(')')
        .ok_or_else(|| syntax(line, "expected `)` at end of line"))?;
    if args.contains(['(', ')']) {
        return Err(syntax(line, "unbalanced parentheses"));
    }
    Ok((text[..open].trim(), args))
}

fn parse_line(line: usize, text: &str) -> Result<Line<'_>> {
    if let Some((lhs, rhs)) = text.split_once('=') {
        let name = checked_name(line, lhs)?;
        let (kw, args) = split_call(line, rhs.trim())?;
        if kw.eq_ignore_ascii_case("DFF") {
            return Err(syntax(line, "sequential element DFF is not supported"));
        }
        let kind = GateKind::from_keyword(kw)
            .ok_or_else(|| syntax(line, format!("unknown gate kind `{kw}`")))?;
        let args = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| checked_name(line, a))
                .collect::<Result<Vec<_>>>()?
        };
        return Ok(Line::Gate { name, kind, args });
    }
    let (kw, arg) = split_call(line, text)?;
    let name = checked_name(line, arg)?;
    if kw.eq_ignore_ascii_case("INPUT") {
        Ok(Line::Input(name))
    } else if kw.eq_ignore_ascii_case("OUTPUT") {
        Ok(Line::Output(name))
    } else {
        Err(syntax(line, format!("unknown declaration `{kw}`")))
    }
}

/// Parses `.bench` text into a validated [`Netlist`] called `name`.
///
/// Gates keep file order. Inputs named `keyinput<digits>` become key inputs.
/// Forward references are allowed; every referenced signal must be declared
/// somewhere in the file.
pub fn parse_bench(name: &str, text: &str) -> Result<Netlist> {
    let mut pis = Vec::new();
    let mut keys = Vec::new();
    let mut pos: Vec<(String, usize)> = Vec::new();
    let mut gates: IndexMap<String, Gate> = IndexMap::new();
    let mut defined_at: HashMap<String, usize> = HashMap::new();
    let mut gate_line: HashMap<String, usize> = HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        match parse_line(line, body)? {
            Line::Input(n) | Line::Gate { name: n, .. } if defined_at.contains_key(n) => {
                return Err(NetlistError::Duplicate {
                    name: n.to_string(),
                    line: Some(line),
                });
            }
            Line::Input(n) => {
                defined_at.insert(n.to_string(), line);
                if key_input_index(n).is_some() {
                    keys.push(n.to_string());
                } else {
                    pis.push(n.to_string());
                }
            }
            Line::Output(n) => {
                if pos.iter().any(|(p, _)| p == n) {
                    return Err(NetlistError::Duplicate {
                        name: n.to_string(),
                        line: Some(line),
                    });
                }
                pos.push((n.to_string(), line));
            }
            Line::Gate {
                name: n,
                kind,
                args,
            } => {
                if !kind.accepts_arity(args.len()) {
                    return Err(NetlistError::Arity {
                        gate: n.to_string(),
                        kind,
                        got: args.len(),
                        line: Some(line),
                    });
                }
                defined_at.insert(n.to_string(), line);
                gate_line.insert(n.to_string(), line);
                let inputs = args.into_iter().map(str::to_string).collect();
                gates.insert(n.to_string(), Gate::new(kind, inputs));
            }
        }
    }

    for (gname, gate) in &gates {
        if let Some(missing) = gate.inputs.iter().find(|i| !defined_at.contains_key(*i)) {
            return Err(NetlistError::Undefined {
                name: missing.clone(),
                user: gname.clone(),
                line: gate_line.get(gname).copied(),
            });
        }
    }
    if let Some((po, line)) = pos.iter().find(|(p, _)| !defined_at.contains_key(p)) {
        return Err(NetlistError::Undefined {
            name: po.clone(),
            user: "OUTPUT".into(),
            line: Some(*line),
        });
    }

    let n = Netlist {
        name: name.to_string(),
        gates,
        primary_inputs: pis,
        primary_outputs: pos.into_iter().map(|(p, _)| p).collect(),
        key_inputs: keys,
    };
    graph::topo_gate_indices(&n)?;
    Ok(n)
}

/// Writes the canonical `.bench` form: primary inputs, key inputs, outputs,
/// then gates in stored order.
pub fn write_bench(n: &Netlist) -> String {
    let mut out = String::new();
    for pi in n.primary_inputs.iter().chain(&n.key_inputs) {
        let _ = writeln!(out, "INPUT({pi})");
    }
    for po in &n.primary_outputs {
        let _ = writeln!(out, "OUTPUT({po})");
    }
    for (name, gate) in &n.gates {
        let _ = writeln!(out, "{name} = {}({})", gate.kind, gate.inputs.join(", "));
    }
    out
}
