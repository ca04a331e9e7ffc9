//! Generates straight-line boolean circuits for the eight DES S-boxes.
//!
//! Each 6-to-4 S-box is decomposed into a tree of 2:1 multiplexers over its
//! input bits (Shannon expansion), with constant folding and hash-consing so
//! that identical sub-functions are shared between the four output bits. All
//! 720 input orders are tried and the smallest circuit is kept.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

#[allow(dead_code)]
#[path = "src/des/tables.rs"]
mod tables;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Node {
    Zero,
    One,
    Var(u8),
    Not(usize),
    And(usize, usize),
    AndNot(usize, usize),
    Or(usize, usize),
    Xor(usize, usize),
}

struct Circuit {
    nodes: Vec<Node>,
    ids: HashMap<Node, usize>,
    memo: HashMap<(u64, usize), usize>,
}

impl Circuit {
    fn new() -> Self {
        let mut c = Circuit {
            nodes: Vec::new(),
            ids: HashMap::new(),
            memo: HashMap::new(),
        };
        c.intern(Node::Zero);
        c.intern(Node::One);
        c
    }

    const ZERO: usize = 0;
    const ONE: usize = 1;

    fn intern(&mut self, node: Node) -> usize {
        let node = match node {
            Node::And(a, b) if a > b => Node::And(b, a),
            Node::Or(a, b) if a > b => Node::Or(b, a),
            Node::Xor(a, b) if a > b => Node::Xor(b, a),
            other => other,
        };
        if let Some(&id) = self.ids.get(&node) {
            return id;
        }
        self.nodes.push(node);
        self.ids.insert(node, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    fn not(&mut self, a: usize) -> usize {
        match self.nodes[a] {
            Node::Zero => Self::ONE,
            Node::One => Self::ZERO,
            Node::Not(x) => x,
            _ => self.intern(Node::Not(a)),
        }
    }

    fn is_not_of(&self, a: usize, b: usize) -> bool {
        self.nodes[a] == Node::Not(b) || self.nodes[b] == Node::Not(a)
    }

    /// `sel ? hi : lo`
    fn mux(&mut self, sel: usize, lo: usize, hi: usize) -> usize {
        if lo == hi {
            return lo;
        }
        match (lo, hi) {
            (Self::ZERO, Self::ONE) => sel,
            (Self::ONE, Self::ZERO) => self.not(sel),
            (Self::ZERO, _) => self.intern(Node::And(sel, hi)),
            (_, Self::ZERO) => self.intern(Node::AndNot(lo, sel)),
            (_, Self::ONE) => self.intern(Node::Or(lo, sel)),
            (Self::ONE, _) => {
                let t = self.intern(Node::AndNot(sel, hi));
                self.not(t)
            }
            _ if self.is_not_of(lo, hi) => self.intern(Node::Xor(lo, sel)),
            _ => {
                let diff = self.intern(Node::Xor(lo, hi));
                let gated = self.intern(Node::And(sel, diff));
                self.intern(Node::Xor(lo, gated))
            }
        }
    }

    /// `truth` holds 2^(order.len()) entries indexed by the variables in
    /// `order`, first variable most significant.
    fn build(&mut self, truth: u64, order: &[u8]) -> usize {
        let width = order.len();
        let key = (truth, 6 - width);
        if let Some(&id) = self.memo.get(&key) {
            return id;
        }
        let id = if width == 0 {
            if truth & 1 == 1 {
                Self::ONE
            } else {
                Self::ZERO
            }
        } else {
            let half = 1usize << (width - 1);
            let lo_mask = if half == 64 {
                u64::MAX
            } else {
                (1u64 << half) - 1
            };
            let lo = self.build(truth & lo_mask, &order[1..]);
            let hi = self.build(truth >> half, &order[1..]);
            let sel = self.intern(Node::Var(order[0]));
            self.mux(sel, lo, hi)
        };
        self.memo.insert(key, id);
        id
    }

    fn gate_count(&self, outputs: &[usize]) -> usize {
        let mut live = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = outputs.to_vec();
        while let Some(n) = stack.pop() {
            if live[n] {
                continue;
            }
            live[n] = true;
            match self.nodes[n] {
                Node::Not(a) => stack.push(a),
                Node::And(a, b) | Node::AndNot(a, b) | Node::Or(a, b) | Node::Xor(a, b) => {
                    stack.push(a);
                    stack.push(b)
                }
                _ => {}
            }
        }
        live.iter()
            .zip(&self.nodes)
            .filter(|(l, n)| **l && !matches!(n, Node::Zero | Node::One | Node::Var(_)))
            .count()
    }
}

fn sbox_output(sbox: usize, input: u8, bit: usize) -> bool {
    let row = ((input >> 4) & 0b10) | (input & 1);
    let col = (input >> 1) & 0xf;
    let value = tables::SBOXES[sbox][row as usize][col as usize];
    (value >> (3 - bit)) & 1 == 1
}

/// Truth table of output `bit` (0 = MSB) with inputs re-ordered so that
/// `order[0]` is the most significant index bit.
fn truth_table(sbox: usize, bit: usize, order: &[u8]) -> u64 {
    (0..64u32).fold(0u64, |acc, idx| {
        let mut input = 0u8;
        for (pos, &var) in order.iter().enumerate() {
            if (idx >> (5 - pos)) & 1 == 1 {
                input |= 1 << (5 - var);
            }
        }
        if sbox_output(sbox, input, bit) {
            acc | (1 << idx)
        } else {
            acc
        }
    })
}

fn permutations(items: &[u8]) -> Vec<Vec<u8>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn best_circuit(sbox: usize) -> (Circuit, [usize; 4]) {
    let mut best: Option<(usize, Circuit, [usize; 4])> = None;
    for order in permutations(&[0, 1, 2, 3, 4, 5]) {
        let mut circuit = Circuit::new();
        let outputs: [usize; 4] =
            std::array::from_fn(|bit| circuit.build(truth_table(sbox, bit, &order), &order));
        let gates = circuit.gate_count(&outputs);
        if best.as_ref().is_none_or(|(g, _, _)| gates < *g) {
            best = Some((gates, circuit, outputs));
        }
    }
    let (_, circuit, outputs) = best.unwrap();
    (circuit, outputs)
}

fn evaluate(circuit: &Circuit, outputs: &[usize; 4], input: u8) -> u8 {
    let mut values = vec![false; circuit.nodes.len()];
    for (i, node) in circuit.nodes.iter().enumerate() {
        values[i] = match *node {
            Node::Zero => false,
            Node::One => true,
            Node::Var(v) => (input >> (5 - v)) & 1 == 1,
            Node::Not(a) => !values[a],
            Node::And(a, b) => values[a] & values[b],
            Node::AndNot(a, b) => values[a] & !values[b],
            Node::Or(a, b) => values[a] | values[b],
            Node::Xor(a, b) => values[a] ^ values[b],
        };
    }
    outputs
        .iter()
        .fold(0u8, |acc, &o| (acc << 1) | u8::from(values[o]))
}

fn operand(circuit: &Circuit, id: usize) -> String {
    match circuit.nodes[id] {
        Node::Zero => "0".into(),
        Node::One => "!0".into(),
        Node::Var(v) => format!("a{}", v + 1),
        _ => format!("t{id}"),
    }
}

fn emit(out: &mut String, sbox: usize, circuit: &Circuit, outputs: &[usize; 4]) {
    let gates = circuit.gate_count(outputs);
    writeln!(out, "/// S{} as a {gates}-gate circuit.", sbox + 1).unwrap();
    writeln!(out, "#[inline(always)]").unwrap();
    writeln!(
        out,
        "pub(crate) fn s{}(a1: u64, a2: u64, a3: u64, a4: u64, a5: u64, a6: u64) -> [u64; 4] {{",
        sbox + 1
    )
    .unwrap();
    for (id, node) in circuit.nodes.iter().enumerate() {
        let expr = match *node {
            Node::Zero | Node::One | Node::Var(_) => continue,
            Node::Not(a) => format!("!{}", operand(circuit, a)),
            Node::And(a, b) => format!("{} & {}", operand(circuit, a), operand(circuit, b)),
            Node::AndNot(a, b) => format!("{} & !{}", operand(circuit, a), operand(circuit, b)),
            Node::Or(a, b) => format!("{} | {}", operand(circuit, a), operand(circuit, b)),
            Node::Xor(a, b) => format!("{} ^ {}", operand(circuit, a), operand(circuit, b)),
        };
        writeln!(out, "    let t{id} = {expr};").unwrap();
    }
    let outs: Vec<String> = outputs.iter().map(|&o| operand(circuit, o)).collect();
    writeln!(out, "    [{}]", outs.join(", ")).unwrap();
    writeln!(out, "}}\n").unwrap();
}

fn main() {
    println!("cargo:rerun-if-changed=build.rs");
    println!("cargo:rerun-if-changed=src/des/tables.rs");

    let mut out = String::from("// Generated by build.rs from the FIPS S-box tables.\n\n");
    out.push_str("#[allow(unused_variables, clippy::all)]\nmod generated {\n");
    for sbox in 0..8 {
        let (circuit, outputs) = best_circuit(sbox);
        for input in 0..64u8 {
            let row = ((input >> 4) & 0b10) | (input & 1);
            let col = (input >> 1) & 0xf;
            assert_eq!(
                evaluate(&circuit, &outputs, input),
                tables::SBOXES[sbox][row as usize][col as usize],
                "S{} circuit disagrees with its table at input {input}",
                sbox + 1
            );
        }
        emit(&mut out, sbox, &circuit, &outputs);
    }
    out.push_str("}\npub(crate) use generated::*;\n");

    let path = PathBuf::from(std::env::var("OUT_DIR").unwrap()).join("sbox_circuits.rs");
    std::fs::write(path, out).unwrap();
}
