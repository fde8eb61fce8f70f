//! The toy machine `BT-8`: a deterministic bit-tape interpreter with a
//! read-only condition register and two input disciplines.
//!
//! Opcodes form a prefix code, read MSB first from the program bits:
//!
//! | bits     | op     | effect                                             |
//! |----------|--------|----------------------------------------------------|
//! | `00`     | EMIT0  | append `0` to the output                           |
//! | `01`     | EMIT1  | append `1`                                         |
//! | `10`     | DUP    | output := output ++ output                         |
//! | `110`    | HALT   | stop                                               |
//! | `1110`   | COPY   | append the condition string                        |
//! | `11110`  | LIT    | literal block (see below)                          |
//! | `111110` | LEN    | append the binary numeral of the condition length  |
//! | `111111` | LOOP   | jump back to bit 0                                 |
//!
//! Every executed instruction costs one step. Output longer than
//! [`MachineSpec::max_output`] bits makes the run invalid.
//!
//! *Plain* discipline: the program is given whole. Running off the end at an
//! instruction boundary halts; stopping inside an opcode is invalid. `LIT`
//! appends every remaining program bit and halts.
//!
//! *Prefix-free* discipline: bits are read on demand and a run is valid only
//! if it executes `HALT` having read exactly the whole program. `LIT` reads a
//! self-delimiting length `L` (each bit of its binary numeral doubled, then
//! `01`) and appends the next `L` program bits. A proper prefix of a valid
//! program would need bits it does not have, so valid programs form a prefix
//! free set.

use std::fmt;

use crate::bits::BitString;

pub const MACHINE_ID: &str = "BT-8";
pub const MACHINE_VERSION: u32 = 1;

/// Plain literal overhead: `|literal_program(x)| = |x| + 5`.
pub const PLAIN_LITERAL_HEADER: usize = 5;
/// Prefix literal overhead beyond `|x| + 2*bits(|x|)`.
pub const PREFIX_LITERAL_OVERHEAD: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Discipline {
    Plain,
    PrefixFree,
}

impl Discipline {
    pub fn as_str(&self) -> &'static str {
        match self {
            Discipline::Plain => "plain",
            Discipline::PrefixFree => "prefix",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "plain" => Some(Discipline::Plain),
            "prefix" => Some(Discipline::PrefixFree),
            _ => None,
        }
    }
}

impl fmt::Display for Discipline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MachineSpec {
    pub discipline: Discipline,
    pub max_output: usize,
}

impl MachineSpec {
    pub const DEFAULT_MAX_OUTPUT: usize = 64;

    pub fn plain() -> Self {
        Self { discipline: Discipline::Plain, max_output: Self::DEFAULT_MAX_OUTPUT }
    }

    pub fn prefix_free() -> Self {
        Self { discipline: Discipline::PrefixFree, max_output: Self::DEFAULT_MAX_OUTPUT }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Emit0,
    Emit1,
    Dup,
    Halt,
    Copy,
    Lit,
    Len,
    Loop,
}

impl Op {
    pub fn encoding(&self) -> &'static str {
        match self {
            Op::Emit0 => "00",
            Op::Emit1 => "01",
            Op::Dup => "10",
            Op::Halt => "110",
            Op::Copy => "1110",
            Op::Lit => "11110",
            Op::Len => "111110",
            Op::Loop => "111111",
        }
    }
}

/// Concatenates opcode encodings; handy for fixtures.
pub fn assemble(ops: &[Op]) -> BitString {
    let mut out = BitString::new();
    for op in ops {
        out.extend_from(&op.encoding().parse().expect("static encoding"));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InvalidReason {
    /// Plain program ends inside an opcode.
    TruncatedOpcode,
    /// Prefix-free run needed more bits than the program has.
    ReadPastEnd,
    /// Prefix-free run halted before reading the whole program.
    TrailingBits,
    /// Malformed self-delimiting length in a prefix-free literal.
    BadLength,
    OutputLimit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    Halted { output: BitString, bits_consumed: usize, steps: u64 },
    OutOfBudget,
    Invalid(InvalidReason),
}

impl RunOutcome {
    pub fn output(&self) -> Option<&BitString> {
        match self {
            RunOutcome::Halted { output, .. } => Some(output),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("step budget must be at least 1")]
pub struct ZeroBudget;

enum Fetch {
    Bit(bool),
    End,
}

struct Run<'a> {
    spec: &'a MachineSpec,
    program: &'a [bool],
    cond: &'a BitString,
    pc: usize,
    consumed: usize,
    output: Vec<bool>,
}

impl Run<'_> {
    fn fetch(&mut self) -> Fetch {
        match self.program.get(self.pc) {
            Some(&b) => {
                self.pc += 1;
                self.consumed = self.consumed.max(self.pc);
                Fetch::Bit(b)
            }
            None => Fetch::End,
        }
    }

    /// Reads the next bit inside an instruction.
    fn operand_bit(&mut self) -> Result<bool, InvalidReason> {
        match self.fetch() {
            Fetch::Bit(b) => Ok(b),
            Fetch::End => Err(match self.spec.discipline {
                Discipline::Plain => InvalidReason::TruncatedOpcode,
                Discipline::PrefixFree => InvalidReason::ReadPastEnd,
            }),
        }
    }

    /// Decodes the next opcode; `Ok(None)` means the plain program ended.
    fn decode(&mut self) -> Result<Option<Op>, InvalidReason> {
        let first = match self.fetch() {
            Fetch::Bit(b) => b,
            Fetch::End => {
                return match self.spec.discipline {
                    Discipline::Plain => Ok(None),
                    Discipline::PrefixFree => Err(InvalidReason::ReadPastEnd),
                }
            }
        };
        if !first {
            return Ok(Some(if self.operand_bit()? { Op::Emit1 } else { Op::Emit0 }));
        }
        if !self.operand_bit()? {
            return Ok(Some(Op::Dup));
        }
        // Unary tail: 110, 1110, 11110, then two six-bit codes.
        for op in [Op::Halt, Op::Copy, Op::Lit] {
            if !self.operand_bit()? {
                return Ok(Some(op));
            }
        }
        Ok(Some(if self.operand_bit()? { Op::Loop } else { Op::Len }))
    }

    fn emit(&mut self, bits: impl IntoIterator<Item = bool>) -> Result<(), InvalidReason> {
        for b in bits {
            if self.output.len() >= self.spec.max_output {
                return Err(InvalidReason::OutputLimit);
            }
            self.output.push(b);
        }
        Ok(())
    }

    fn read_length(&mut self) -> Result<usize, InvalidReason> {
        let mut len = 0usize;
        loop {
            match (self.operand_bit()?, self.operand_bit()?) {
                (false, true) => return Ok(len),
                (a, b) if a == b => {
                    len = len.checked_mul(2).ok_or(InvalidReason::BadLength)? + a as usize;
                    if len > self.spec.max_output {
                        return Err(InvalidReason::OutputLimit);
                    }
                }
                _ => return Err(InvalidReason::BadLength),
            }
        }
    }

    fn execute(&mut self, step_budget: u64) -> RunOutcome {
        let mut steps = 0u64;
        loop {
            if self.spec.discipline == Discipline::Plain && self.pc >= self.program.len() {
                return self.halted(steps);
            }
            if steps >= step_budget {
                return RunOutcome::OutOfBudget;
            }
            let op = match self.decode() {
                Ok(Some(op)) => op,
                Ok(None) => return self.halted(steps),
                Err(e) => return RunOutcome::Invalid(e),
            };
            steps += 1;
            let r = match op {
                Op::Emit0 => self.emit([false]),
                Op::Emit1 => self.emit([true]),
                Op::Dup => {
                    let copy = self.output.clone();
                    self.emit(copy)
                }
                Op::Halt => {
                    return match self.spec.discipline {
                        Discipline::PrefixFree if self.consumed != self.program.len() => {
                            RunOutcome::Invalid(InvalidReason::TrailingBits)
                        }
                        _ => self.halted(steps),
                    };
                }
                Op::Copy => {
                    let c = self.cond.bits().to_vec();
                    self.emit(c)
                }
                Op::Len => {
                    let l = BitString::from_natural(self.cond.len() as u64);
                    self.emit(l.bits().to_vec())
                }
                Op::Loop => {
                    self.pc = 0;
                    Ok(())
                }
                Op::Lit => match self.spec.discipline {
                    Discipline::Plain => {
                        let rest = self.program[self.pc..].to_vec();
                        self.pc = self.program.len();
                        self.consumed = self.pc;
                        if let Err(e) = self.emit(rest) {
                            return RunOutcome::Invalid(e);
                        }
                        return self.halted(steps);
                    }
                    Discipline::PrefixFree => self.read_length().and_then(|len| {
                        let mut block = Vec::with_capacity(len);
                        for _ in 0..len {
                            block.push(self.operand_bit()?);
                        }
                        self.emit(block)
                    }),
                },
            };
            if let Err(e) = r {
                return RunOutcome::Invalid(e);
            }
        }
    }

    fn halted(&self, steps: u64) -> RunOutcome {
        RunOutcome::Halted {
            output: BitString::from_bits(self.output.clone()),
            bits_consumed: self.consumed,
            steps,
        }
    }
}

/// Runs `program` on condition `cond` for at most `step_budget` instructions.
pub fn run_program(
    spec: &MachineSpec,
    program: &BitString,
    cond: &BitString,
    step_budget: u64,
) -> Result<RunOutcome, ZeroBudget> {
    if step_budget == 0 {
        return Err(ZeroBudget);
    }
    let mut run = Run { spec, program: program.bits(), cond, pc: 0, consumed: 0, output: Vec::new() };
    Ok(run.execute(step_budget))
}

/// A program printing `x` under the given discipline, in one step.
pub fn literal_program(x: &BitString, discipline: Discipline) -> BitString {
    let mut p = assemble(&[Op::Lit]);
    match discipline {
        Discipline::Plain => p.extend_from(x),
        Discipline::PrefixFree => {
            for b in BitString::from_natural(x.len() as u64).bits() {
                p.push(*b);
                p.push(*b);
            }
            p.push(false);
            p.push(true);
            p.extend_from(x);
            p.extend_from(&assemble(&[Op::Halt]));
        }
    }
    p
}
