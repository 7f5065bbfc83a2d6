//! Line-oriented circuit format.
//!
//! ```text
//! # comment
//! qubits 4
//! reg clock 1 3
//! RX 0.5 0
//! RXX 1.5707963267948966 0,1
//! H - 2
//! X - 3 ctrl=q0:1,q1:0
//! ```
//!
//! Each gate line is `KIND angle q0[,q1] [ctrl=qK:pol,...]`. Kinds are
//! `RX RY RZ RXX X H SWAP`; kinds without an angle write `-`. Opaque
//! unitaries have no text form and must be decomposed first.

use super::{Gate, GateKind, QuantumCircuit, Register};
use crate::error::{Error, Result};
use crate::statevector::Control;

pub(super) fn format_gate(g: &Gate) -> String {
    let angle = g.kind.angle().map_or_else(|| "-".to_string(), |a| format!("{a:?}"));
    let qubits: Vec<String> = g.qubits.iter().map(|q| q.to_string()).collect();
    let mut line = format!("{} {} {}", g.kind.name(), angle, qubits.join(","));
    if !g.controls.is_empty() {
        let ctrl: Vec<String> = g.controls.iter().map(|c| format!("q{}:{}", c.qubit, u8::from(c.polarity))).collect();
        line.push_str(" ctrl=");
        line.push_str(&ctrl.join(","));
    }
    line
}

pub fn write_circuit(circuit: &QuantumCircuit) -> Result<String> {
    let mut out = format!("qubits {}\n", circuit.num_qubits());
    for r in circuit.registers() {
        out.push_str(&format!("reg {} {} {}\n", r.name, r.start, r.len));
    }
    for g in circuit.gates() {
        if matches!(g.kind, GateKind::Unitary(_)) {
            return Err(Error::invalid("opaque unitaries cannot be serialized; decompose first"));
        }
        out.push_str(&format_gate(g));
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_circuit(src: &str) -> Result<QuantumCircuit> {
    let mut circuit: Option<QuantumCircuit> = None;
    for (idx, raw) in src.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| Error::Parse { line: line_no, message };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "qubits" => {
                if circuit.is_some() {
                    return Err(err("duplicate `qubits` header".into()));
                }
                let n = tokens.get(1).and_then(|t| t.parse().ok()).ok_or_else(|| err("expected qubit count".into()))?;
                circuit = Some(QuantumCircuit::new(n));
            }
            "reg" => {
                let c = circuit.as_mut().ok_or_else(|| err("`reg` before `qubits`".into()))?;
                if tokens.len() != 4 {
                    return Err(err("expected `reg NAME START LEN`".into()));
                }
                let start = tokens[2].parse().map_err(|_| err("bad register start".into()))?;
                let len = tokens[3].parse().map_err(|_| err("bad register length".into()))?;
                c.declare_register(Register { name: tokens[1].to_string(), start, len }).map_err(|e| err(e.to_string()))?;
            }
            kind => {
                let c = circuit.as_mut().ok_or_else(|| err("gate before `qubits` header".into()))?;
                let gate = parse_gate(kind, &tokens[1..]).map_err(err)?;
                c.push(gate).map_err(|e| err(e.to_string()))?;
            }
        }
    }
    circuit.ok_or_else(|| Error::Parse { line: 0, message: "missing `qubits` header".into() })
}

fn parse_gate(kind: &str, rest: &[&str]) -> std::result::Result<Gate, String> {
    if rest.len() < 2 || rest.len() > 3 {
        return Err("expected `KIND angle qubits [ctrl=...]`".into());
    }
    let angle = if rest[0] == "-" {
        None
    } else {
        Some(rest[0].parse::<f64>().map_err(|_| format!("bad angle `{}`", rest[0]))?)
    };
    let qubits = rest[1]
        .split(',')
        .map(|q| q.parse::<usize>().map_err(|_| format!("bad qubit `{q}`")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let need_angle = |a: Option<f64>| a.ok_or_else(|| format!("{kind} requires an angle"));
    let kind = match kind {
        "RX" => GateKind::Rx(need_angle(angle)?),
        "RY" => GateKind::Ry(need_angle(angle)?),
        "RZ" => GateKind::Rz(need_angle(angle)?),
        "RXX" => GateKind::Rxx(need_angle(angle)?),
        "X" => GateKind::X,
        "H" => GateKind::H,
        "SWAP" => GateKind::Swap,
        other => return Err(format!("unknown gate kind `{other}`")),
    };
    let mut controls = Vec::new();
    if let Some(spec) = rest.get(2) {
        let list = spec.strip_prefix("ctrl=").ok_or_else(|| format!("unexpected token `{spec}`"))?;
        for item in list.split(',') {
            let (q, pol) = item
                .strip_prefix('q')
                .and_then(|s| s.split_once(':'))
                .ok_or_else(|| format!("bad control `{item}`"))?;
            let qubit = q.parse().map_err(|_| format!("bad control qubit `{q}`"))?;
            let polarity = match pol {
                "1" => true,
                "0" => false,
                _ => return Err(format!("bad control polarity `{pol}`")),
            };
            controls.push(Control { qubit, polarity });
        }
    }
    Ok(Gate { kind, qubits, controls })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = QuantumCircuit::with_registers(&[("ancilla", 1), ("clock", 2)]);
        c.extend([
            Gate::rx(0, 0.5),
            Gate::rxx(0, 2, std::f64::consts::FRAC_PI_2),
            Gate::h(1),
            Gate::x(2).controlled_by([Control::on(0), Control::off(1)]),
            Gate::rz(1, -1e-17),
        ])
        .unwrap();
        let text = write_circuit(&c).unwrap();
        assert_eq!(parse_circuit(&text).unwrap(), c);
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = parse_circuit("qubits 2\nRX 0.1 0\nFOO 1 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        assert!(parse_circuit("RX 0.1 0").is_err());
        assert!(parse_circuit("qubits 1\nRX - 0").is_err());
        assert!(parse_circuit("qubits 1\nRX 0.1 1").is_err());
    }
}
