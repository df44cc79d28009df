//! Line-oriented circuit files.
//!
//! ```text
//! # comment
//! HEADER m=<int> n=<int>
//! PHASE <bitstring of j then k> <radians>
//! GLOBALPHASE <radians>
//! XROT <radians> q<i0>,q<i1>,...
//! ```
//!
//! A file carries a phase table, a gate list, or both. Missing `PHASE`
//! entries are zero.

use std::fmt::Write as _;

use crate::bits::{fmt_sig17, parse_bitstring, to_bitstring};
use crate::error::{Error, Result};
use crate::synth::walsh::{gates_to_phases, GateList, XRotation};
use crate::synth::PhaseTable;

/// Parsed contents of a circuit file.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitFile {
    pub m: usize,
    pub n: usize,
    pub phases: Option<PhaseTable>,
    pub gates: Option<GateList>,
}

impl CircuitFile {
    pub fn from_phases(pt: PhaseTable) -> Self {
        Self { m: pt.m(), n: pt.n(), phases: Some(pt), gates: None }
    }

    pub fn total_qubits(&self) -> usize {
        self.m + self.n
    }

    /// The phase table, evaluated from the gates when none is stored.
    pub fn phase_table(&self) -> Result<PhaseTable> {
        match (&self.phases, &self.gates) {
            (Some(pt), _) => Ok(pt.clone()),
            (None, Some(g)) => gates_to_phases(g),
            (None, None) => Ok(PhaseTable::zeros(self.m, self.n)),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let total = self.total_qubits();
        let _ = writeln!(
            out,
            "# IQP circuit: hidden qubits 0..{}, visible qubits {}..{}",
            self.m, self.m, total
        );
        let _ = writeln!(out, "HEADER m={} n={}", self.m, self.n);
        if let Some(pt) = &self.phases {
            let _ = writeln!(out, "# phase table");
            for (x, &theta) in pt.phases().iter().enumerate() {
                let _ = writeln!(out, "PHASE {} {}", to_bitstring(x, total), fmt_sig17(theta));
            }
        }
        if let Some(g) = &self.gates {
            let _ = writeln!(out, "# gates: exp(i*angle*X) on the listed qubits");
            let _ = writeln!(out, "GLOBALPHASE {}", fmt_sig17(g.global_phase()));
            for gate in g.gates() {
                let support: Vec<String> = gate.support.iter().map(|q| format!("q{q}")).collect();
                let _ = writeln!(out, "XROT {} {}", fmt_sig17(gate.angle), support.join(","));
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut phases: Option<Vec<Option<f64>>> = None;
        let mut global_phase: Option<f64> = None;
        let mut rotations = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse(format!("line {}: {msg}", lineno + 1));
            let mut fields = line.split_whitespace();
            let keyword = fields.next().expect("nonempty line");
            let args: Vec<&str> = fields.collect();

            if keyword == "HEADER" {
                if header.is_some() {
                    return Err(err("duplicate HEADER".into()));
                }
                header = Some(parse_header(&args).map_err(err)?);
                continue;
            }
            let (m, n) = header.ok_or_else(|| err(format!("{keyword} before HEADER")))?;
            let total = m + n;
            match (keyword, args.as_slice()) {
                ("PHASE", [bits, value]) => {
                    let table = phases.get_or_insert_with(|| vec![None; 1 << total]);
                    let index = parse_bitstring(bits, total).map_err(|e| err(e.to_string()))?;
                    if table[index].replace(parse_radians(value).map_err(err)?).is_some() {
                        return Err(err(format!("phase of {bits} given twice")));
                    }
                }
                ("GLOBALPHASE", [value]) => {
                    if global_phase.replace(parse_radians(value).map_err(err)?).is_some() {
                        return Err(err("duplicate GLOBALPHASE".into()));
                    }
                }
                ("XROT", [value, qubits]) => {
                    let angle = parse_radians(value).map_err(err)?;
                    let support = qubits
                        .split(',')
                        .map(|q| {
                            q.strip_prefix('q')
                                .and_then(|i| i.parse::<usize>().ok())
                                .ok_or_else(|| err(format!("bad qubit {q:?}")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    rotations.push(XRotation { support, angle });
                }
                _ => return Err(err(format!("cannot parse {line:?}"))),
            }
        }

        let (m, n) = header.ok_or_else(|| Error::Parse("missing HEADER".into()))?;
        let phases = phases
            .map(|t| PhaseTable::new(m, n, t.into_iter().map(|v| v.unwrap_or(0.0)).collect()))
            .transpose()?;
        let gates = if global_phase.is_some() || !rotations.is_empty() {
            Some(GateList::new(m, n, global_phase.unwrap_or(0.0), rotations)?)
        } else {
            None
        };
        Ok(Self { m, n, phases, gates })
    }
}

fn parse_header(args: &[&str]) -> std::result::Result<(usize, usize), String> {
    let mut m = None;
    let mut n = None;
    for arg in args {
        match arg.split_once('=') {
            Some(("m", v)) => m = v.parse::<usize>().ok(),
            Some(("n", v)) => n = v.parse::<usize>().ok(),
            _ => return Err(format!("unexpected HEADER field {arg:?}")),
        }
    }
    match (m, n) {
        (Some(m), Some(n)) if m + n <= 40 => Ok((m, n)),
        (Some(_), Some(_)) => Err("register too large".into()),
        _ => Err("HEADER needs m=<int> n=<int>".into()),
    }
}

fn parse_radians(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("bad angle {s:?}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::walsh_lower;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn writes_and_reads_both_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let theta = (0..8).map(|_| rng.gen::<f64>() * 6.0).collect();
        let pt = PhaseTable::new(1, 2, theta).unwrap();
        let file = CircuitFile {
            gates: Some(walsh_lower(&pt).unwrap()),
            ..CircuitFile::from_phases(pt.clone())
        };
        let text = file.to_text();
        assert!(text.contains("HEADER m=1 n=2\n"));
        assert!(text.contains("PHASE 101 "));
        let back = CircuitFile::parse(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.phase_table().unwrap(), pt);
    }

    #[test]
    fn gate_only_file() {
        let text = "HEADER m=0 n=1\nGLOBALPHASE 1.5707963267948966\nXROT 1.5707963267948966 q0 # flip\n";
        let file = CircuitFile::parse(text).unwrap();
        assert!(file.phases.is_none());
        let pt = file.phase_table().unwrap();
        assert!((pt.phases()[0] - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn missing_phases_are_zero() {
        let file = CircuitFile::parse("HEADER m=1 n=1\nPHASE 11 3.0\n").unwrap();
        assert_eq!(file.phase_table().unwrap().phases(), &[0.0, 0.0, 0.0, 3.0]);
    }

    #[test]
    fn rejects_malformed_files() {
        for text in [
            "PHASE 0 1.0\n",
            "HEADER m=1\n",
            "HEADER m=0 n=1\nHEADER m=0 n=1\n",
            "HEADER m=0 n=1\nPHASE 00 1.0\n",
            "HEADER m=0 n=1\nPHASE 0 1.0\nPHASE 0 2.0\n",
            "HEADER m=0 n=1\nXROT 1.0 q1\n",
            "HEADER m=0 n=1\nXROT 1.0 x0\n",
            "HEADER m=0 n=1\nXROT nan q0\n",
            "HEADER m=0 n=1\nFOO\n",
            "",
        ] {
            assert!(CircuitFile::parse(text).is_err(), "{text:?}");
        }
    }
}
