//! LP-format export of the compact batch-retrieval integer program, plus an
//! importer that validates external solver output against the simulator.
//!
//! Per target b, positions are encoded as (b, i) with retrieval level
//! i ∈ {0, …, R(b)} — level i means i of b's same-stack lower targets are
//! already gone, so b currently sits at height h(b) − i.
//!
//! Variables, all indexed by cycle c ∈ 1..=n and position (b, i):
//!   x   b is retrieved at level i in cycle c
//!   y   cycle c is anchored at position (b, i)
//!   z1  membership typed "same row as the anchor, left of it"
//!   z2  membership typed "row above the anchor, fully supported"
//!   z3  membership typed "one row below the anchor"
//!   z4  membership typed "deeper below, directly under another member"
//!   u   b is at level i when cycle c starts
//! plus continuous E_c (cycle energy) and h_c_s (height of target-occupied
//! stack s at the start of cycle c).
//!
//! The energy row charges the anchor's closed-form clearance cost A(b, i)
//! and refunds one unit per already-retrieved or riding UL that the formula
//! counted. The refund sum runs over positions left of the anchor or above
//! it in its own stack; z3/z4 members (below the anchor's row) were also
//! subtracted there despite costing nothing, so they are added back — only
//! the strictly-left ones, since same-stack deep members never enter the
//! refund sum in the first place. Positions whose A is undefined (a
//! target-free stack to the left is too short to ever support that passage)
//! get no energy row; their y is pinned to zero in Bounds so a cycle cannot
//! escape energy accounting by anchoring there.

use crate::instance::Instance;
use crate::sim::simulate_solution;
use crate::solution::Solution;
use crate::sparse::{derive_sparse, SparseView};
use crate::state::SliceState;
use serde::Serialize;
use std::fmt;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

/// Absolute tolerance for binary integrality and for the declared-vs-
/// simulated energy comparison on import.
pub const IMPORT_TOLERANCE: f64 = 1e-6;

/// Exact variable and constraint tally of an emitted model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModelCounts {
    pub binaries: usize,
    pub continuous: usize,
    pub constraints: usize,
    pub x: usize,
    pub y: usize,
    pub z1: usize,
    pub z2: usize,
    pub z3: usize,
    pub z4: usize,
    pub u: usize,
    pub e: usize,
    pub h: usize,
}

fn vx(c: usize, b: usize, i: u32) -> String {
    format!("x_{c}_{b}_{i}")
}
fn vy(c: usize, b: usize, i: u32) -> String {
    format!("y_{c}_{b}_{i}")
}
fn vz(z: usize, c: usize, b: usize, i: u32) -> String {
    format!("z{z}_{c}_{b}_{i}")
}
fn vu(c: usize, b: usize, i: u32) -> String {
    format!("u_{c}_{b}_{i}")
}
fn ve(c: usize) -> String {
    format!("E_{c}")
}
fn vh(c: usize, s: u32) -> String {
    format!("h_{c}_{s}")
}

/// One `name: terms relation rhs` row; zero-coefficient terms are dropped
/// and a row with no terms left is not emitted at all.
struct Rows {
    buf: String,
    count: usize,
}

impl Rows {
    fn new() -> Self {
        Rows {
            buf: String::new(),
            count: 0,
        }
    }

    fn push(&mut self, name: &str, terms: &[(i64, String)], relation: &str, rhs: i64) {
        let mut line = String::new();
        for &(coef, ref var) in terms {
            if coef == 0 {
                continue;
            }
            if line.is_empty() {
                if coef < 0 {
                    line.push_str("- ");
                }
            } else if coef < 0 {
                line.push_str(" - ");
            } else {
                line.push_str(" + ");
            }
            match coef.unsigned_abs() {
                1 => line.push_str(var),
                a => {
                    let _ = write!(line, "{a} {var}");
                }
            }
        }
        if line.is_empty() {
            return;
        }
        let _ = writeln!(self.buf, " {name}: {line} {relation} {rhs}");
        self.count += 1;
    }
}

/// All (b, i) positions, targets in index order, levels ascending.
fn positions(view: &SparseView) -> Vec<(usize, u32)> {
    (0..view.below.len())
        .flat_map(|b| (0..=view.below[b]).map(move |i| (b, i)))
        .collect()
}

/// Emits the model as LP text and returns its exact tally.
pub fn write_model<W: io::Write>(instance: &Instance, out: &mut W) -> io::Result<ModelCounts> {
    let n = instance.target_count();
    assert!(n > 0, "cannot export a model with no targets");
    let view = derive_sparse(instance);
    let pos = positions(&view);
    let stacks = &view.occupied_stacks;
    let cur = |b: usize, i: u32| instance.target(b).height - i;
    let big_m = i64::from(
        (0..n)
            .map(|b| instance.target(b).height)
            .max()
            .unwrap()
            .saturating_sub(1)
            .max(1),
    );

    let mut rows = Rows::new();
    for b in 0..n {
        let terms: Vec<(i64, String)> = (1..=n)
            .flat_map(|c| (0..=view.below[b]).map(move |i| (1, vx(c, b, i))))
            .collect();
        rows.push(&format!("cover_{b}"), &terms, "=", 1);
    }
    for &s in stacks {
        rows.push(
            &format!("hinit_{s}"),
            &[(1, vh(1, s))],
            "=",
            i64::from(instance.stack_height(s)),
        );
    }
    for c in 1..n {
        for &s in stacks {
            let mut terms = vec![(1, vh(c, s))];
            for &(b, i) in &pos {
                if instance.target(b).stack == s {
                    terms.push((-1, vx(c, b, i)));
                }
            }
            terms.push((-1, vh(c + 1, s)));
            rows.push(&format!("hupd_{c}_{s}"), &terms, "=", 0);
        }
    }
    // Level tracking: retrievals of b's lower stack-mates in earlier cycles
    // equal b's current level.
    for c in 1..=n {
        for b in 0..n {
            let tb = instance.target(b);
            let mut terms: Vec<(i64, String)> = Vec::new();
            for cp in 1..c {
                for &(bp, ip) in &pos {
                    let t = instance.target(bp);
                    if t.stack == tb.stack && t.height < tb.height {
                        terms.push((1, vx(cp, bp, ip)));
                    }
                }
            }
            for i in 1..=view.below[b] {
                terms.push((-i64::from(i), vu(c, b, i)));
            }
            rows.push(&format!("lvl_{c}_{b}"), &terms, "=", 0);
        }
    }
    for c in 1..=n {
        for &(b, i) in &pos {
            rows.push(
                &format!("xu_{c}_{b}_{i}"),
                &[(1, vx(c, b, i)), (-1, vu(c, b, i))],
                "<=",
                0,
            );
        }
    }
    for c in 1..=n {
        for b in 0..n {
            let terms: Vec<(i64, String)> = (0..=view.below[b]).map(|i| (1, vu(c, b, i))).collect();
            rows.push(&format!("uone_{c}_{b}"), &terms, "=", 1);
        }
    }
    // Accessibility over target-free stacks: the passage at height cur-1
    // must not exceed the shortest target-free stack to the left.
    for c in 1..=n {
        for &(b, i) in &pos {
            if let Some(support) = view.left_support[b] {
                rows.push(
                    &format!("accw_{c}_{b}_{i}"),
                    &[(big_m, vx(c, b, i))],
                    "<=",
                    i64::from(support) + big_m - i64::from(cur(b, i)) + 1,
                );
            }
        }
    }
    // Accessibility over target-occupied stacks, via their height variables.
    for c in 1..=n {
        for &(b, i) in &pos {
            for &s in stacks {
                if s < instance.target(b).stack {
                    rows.push(
                        &format!("acch_{c}_{b}_{i}_{s}"),
                        &[(big_m, vx(c, b, i)), (-1, vh(c, s))],
                        "<=",
                        big_m - i64::from(cur(b, i)) + 1,
                    );
                }
            }
        }
    }
    // Typing: same-row membership needs the anchor at this row, right of b.
    for c in 1..=n {
        for &(b, i) in &pos {
            let mut terms = vec![(1, vz(1, c, b, i))];
            for &(bp, ip) in &pos {
                if cur(bp, ip) == cur(b, i) && instance.target(bp).stack > instance.target(b).stack
                {
                    terms.push((-1, vy(c, bp, ip)));
                }
            }
            rows.push(&format!("z1def_{c}_{b}_{i}"), &terms, "<=", 0);
        }
    }
    // Typing: row-above membership needs riders one row down in every stack
    // up to b's — and those supporters must not themselves sit below the
    // anchor's row (not z3/z4), or stacked deep rows could fake support.
    for c in 1..=n {
        for &(b, i) in &pos {
            let s = i64::from(instance.target(b).stack);
            let mut terms = vec![(s, vz(2, c, b, i))];
            for &(bp, ip) in &pos {
                if cur(b, i) >= 1
                    && cur(bp, ip) == cur(b, i) - 1
                    && instance.target(bp).stack <= instance.target(b).stack
                {
                    terms.push((-1, vx(c, bp, ip)));
                    terms.push((1, vz(3, c, bp, ip)));
                    terms.push((1, vz(4, c, bp, ip)));
                }
            }
            rows.push(&format!("z2def_{c}_{b}_{i}"), &terms, "<=", 0);
        }
    }
    // Typing: one-below membership needs the anchor directly above (at or
    // right of b's stack) and, unless b is in stack 1, a left neighbor.
    for c in 1..=n {
        for &(b, i) in &pos {
            let tb = instance.target(b);
            let f = i64::from(tb.stack == 1);
            let mut terms = vec![(2, vz(3, c, b, i))];
            for &(bp, ip) in &pos {
                let t = instance.target(bp);
                if cur(bp, ip) == cur(b, i) + 1 && t.stack >= tb.stack {
                    terms.push((-1, vy(c, bp, ip)));
                }
                if cur(bp, ip) == cur(b, i) && t.stack + 1 == tb.stack {
                    terms.push((-1, vx(c, bp, ip)));
                }
            }
            rows.push(&format!("z3def_{c}_{b}_{i}"), &terms, "<=", f);
        }
    }
    // Typing: deeper-below membership needs a member directly above in the
    // same stack and, unless b is in stack 1, a left neighbor.
    for c in 1..=n {
        for &(b, i) in &pos {
            let tb = instance.target(b);
            let f = i64::from(tb.stack == 1);
            let mut terms = vec![(2, vz(4, c, b, i))];
            for &(bp, ip) in &pos {
                let t = instance.target(bp);
                if cur(bp, ip) == cur(b, i) + 1 && t.stack == tb.stack {
                    terms.push((-1, vx(c, bp, ip)));
                }
                if cur(bp, ip) == cur(b, i) && t.stack + 1 == tb.stack {
                    terms.push((-1, vx(c, bp, ip)));
                }
            }
            rows.push(&format!("z4def_{c}_{b}_{i}"), &terms, "<=", f);
        }
    }
    // Every retrieval is typed; the anchor types itself through y.
    for c in 1..=n {
        for &(b, i) in &pos {
            rows.push(
                &format!("zty_{c}_{b}_{i}"),
                &[
                    (1, vx(c, b, i)),
                    (-1, vz(1, c, b, i)),
                    (-1, vz(2, c, b, i)),
                    (-1, vz(3, c, b, i)),
                    (-1, vz(4, c, b, i)),
                    (-1, vy(c, b, i)),
                ],
                "<=",
                0,
            );
        }
    }
    // One anchor per cycle.
    for c in 1..=n {
        let terms: Vec<(i64, String)> = pos.iter().map(|&(b, i)| (1, vy(c, b, i))).collect();
        rows.push(&format!("yone_{c}"), &terms, "<=", 1);
    }
    // The anchor is rightmost: every member's stack is at most the anchor's.
    for c in 1..=n {
        for &(b, i) in &pos {
            let mut terms = vec![(1, vx(c, b, i))];
            for &(bp, ip) in &pos {
                if instance.target(bp).stack >= instance.target(b).stack {
                    terms.push((-1, vy(c, bp, ip)));
                }
            }
            rows.push(&format!("anchor_{c}_{b}_{i}"), &terms, "<=", 0);
        }
    }
    // Energy: charge the anchor's clearance cost, refund earlier retrievals
    // and riders the formula counted, and add back strictly-left deep
    // members whose refund was unearned.
    let mut pinned: Vec<String> = Vec::new();
    for c in 1..=n {
        for &(b, i) in &pos {
            let Some(a) = view.anchor_energy[b][i as usize] else {
                pinned.push(vy(c, b, i));
                continue;
            };
            let tb = instance.target(b);
            let mut terms = vec![(i64::try_from(a).unwrap(), vy(c, b, i))];
            for cp in 1..=c {
                for &(bp, ip) in &pos {
                    let t = instance.target(bp);
                    if t.stack < tb.stack || (t.stack == tb.stack && t.height > tb.height) {
                        terms.push((-1, vx(cp, bp, ip)));
                    }
                }
            }
            for &(bp, ip) in &pos {
                if instance.target(bp).stack < tb.stack {
                    terms.push((1, vz(3, c, bp, ip)));
                    terms.push((1, vz(4, c, bp, ip)));
                }
            }
            terms.push((-1, ve(c)));
            rows.push(&format!("en_{c}_{b}_{i}"), &terms, "<=", 0);
        }
    }

    let per_cycle = pos.len();
    let counts = ModelCounts {
        binaries: 7 * n * per_cycle,
        continuous: n + n * stacks.len(),
        constraints: rows.count,
        x: n * per_cycle,
        y: n * per_cycle,
        z1: n * per_cycle,
        z2: n * per_cycle,
        z3: n * per_cycle,
        z4: n * per_cycle,
        u: n * per_cycle,
        e: n,
        h: n * stacks.len(),
    };

    let mut text = String::new();
    text.push_str("Minimize\n obj: ");
    for c in 1..=n {
        if c > 1 {
            text.push_str(" + ");
        }
        text.push_str(&ve(c));
    }
    text.push_str("\nSubject To\n");
    text.push_str(&rows.buf);
    text.push_str("Bounds\n");
    for name in &pinned {
        let _ = writeln!(text, " {name} = 0");
    }
    text.push_str("Binaries\n");
    for c in 1..=n {
        for &(b, i) in &pos {
            let _ = writeln!(text, " {}", vx(c, b, i));
        }
    }
    for c in 1..=n {
        for &(b, i) in &pos {
            let _ = writeln!(text, " {}", vy(c, b, i));
        }
    }
    for z in 1..=4 {
        for c in 1..=n {
            for &(b, i) in &pos {
                let _ = writeln!(text, " {}", vz(z, c, b, i));
            }
        }
    }
    for c in 1..=n {
        for &(b, i) in &pos {
            let _ = writeln!(text, " {}", vu(c, b, i));
        }
    }
    text.push_str("End\n");

    out.write_all(text.as_bytes())?;
    Ok(counts)
}

/// Writes the model to `path`.
pub fn export_model(instance: &Instance, path: &Path) -> io::Result<ModelCounts> {
    let mut file = std::fs::File::create(path)?;
    let counts = write_model(instance, &mut file)?;
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ImportError {
    Parse {
        line: usize,
        message: String,
    },
    UnknownVariable {
        line: usize,
        name: String,
    },
    NotBinary {
        name: String,
        value: f64,
    },
    /// A target is retrieved zero or multiple times.
    Coverage {
        target: usize,
        row: String,
    },
    /// x is set at a level that contradicts the retrieval history.
    Level {
        cycle: usize,
        target: usize,
        row: String,
        expected: u32,
        found: u32,
    },
    /// A provided u assignment contradicts the retrieval history.
    LevelVar {
        cycle: usize,
        target: usize,
        row: String,
    },
    /// x is set but the matching u is explicitly zero.
    Unsupported {
        row: String,
    },
    /// A cycle's batch cannot be retrieved in one cycle.
    Cycle {
        cycle: usize,
        message: String,
    },
    EnergyMismatch {
        declared: f64,
        simulated: u64,
    },
}

impl fmt::Display for ImportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImportError::Parse { line, message } => write!(f, "line {line}: {message}"),
            ImportError::UnknownVariable { line, name } => {
                write!(f, "line {line}: unknown variable `{name}`")
            }
            ImportError::NotBinary { name, value } => {
                write!(f, "`{name}` = {value} is not binary within tolerance")
            }
            ImportError::Coverage { target, row } => {
                write!(
                    f,
                    "target {target} is not retrieved exactly once (violates {row})"
                )
            }
            ImportError::Level {
                cycle,
                target,
                row,
                expected,
                found,
            } => write!(
                f,
                "target {target} enters cycle {cycle} at level {expected}, but x is set at level \
                 {found} (violates {row})"
            ),
            ImportError::LevelVar { cycle, target, row } => write!(
                f,
                "u for target {target} in cycle {cycle} contradicts the retrieval history \
                 (violates {row})"
            ),
            ImportError::Unsupported { row } => {
                write!(f, "x is set where u is zero (violates {row})")
            }
            ImportError::Cycle { cycle, message } => {
                write!(f, "cycle {cycle} is not retrievable: {message}")
            }
            ImportError::EnergyMismatch {
                declared,
                simulated,
            } => write!(
                f,
                "declared cycle energies sum to {declared}, simulation gives {simulated}"
            ),
        }
    }
}

impl std::error::Error for ImportError {}

#[derive(Clone, Copy)]
enum Var {
    X(usize, usize, u32),
    Y,
    Z,
    U(usize, usize, u32),
    E,
    H,
}

fn parse_name(
    name: &str,
    n: usize,
    view: &SparseView,
    line: usize,
) -> Result<(Var, bool), ImportError> {
    let unknown = || ImportError::UnknownVariable {
        line,
        name: name.to_string(),
    };
    let parts: Vec<&str> = name.split('_').collect();
    let idx = |p: &str| p.parse::<usize>().map_err(|_| unknown());
    match parts.as_slice() {
        [fam @ ("x" | "y" | "z1" | "z2" | "z3" | "z4" | "u"), c, b, i] => {
            let (c, b, i) = (idx(c)?, idx(b)?, idx(i)?);
            if c < 1 || c > n || b >= n || i > view.below[b] as usize {
                return Err(unknown());
            }
            let var = match *fam {
                "x" => Var::X(c, b, i as u32),
                "u" => Var::U(c, b, i as u32),
                "y" => Var::Y,
                _ => Var::Z,
            };
            Ok((var, true))
        }
        ["E", c] => {
            let c = idx(c)?;
            if c < 1 || c > n {
                return Err(unknown());
            }
            Ok((Var::E, false))
        }
        ["h", c, s] => {
            let (c, s) = (idx(c)?, idx(s)?);
            if c < 1 || c > n || !view.occupied_stacks.contains(&(s as u32)) {
                return Err(unknown());
            }
            Ok((Var::H, false))
        }
        _ => Err(unknown()),
    }
}

/// Parses `name value` solver output, validates it against the model's
/// semantics, and rebuilds the canonical solution. Binaries must be integral
/// within tolerance; the declared Σ E_c (when any E is given) must match the
/// simulated energy within tolerance.
pub fn import_solution(instance: &Instance, text: &str) -> Result<Solution, ImportError> {
    let n = instance.target_count();
    let view = derive_sparse(instance);

    let mut x_set: Vec<Vec<(usize, u32)>> = vec![Vec::new(); n]; // per target: (cycle, level)
    let mut u_set: Vec<(usize, usize, u32, bool)> = Vec::new(); // (cycle, target, level, on)
    let mut declared_energy: Option<f64> = None;
    let mut seen: std::collections::HashSet<String> = std::collections::HashSet::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut parts = content.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(ImportError::Parse {
                line,
                message: format!("expected `name value`, got `{content}`"),
            });
        };
        let value: f64 = value.parse().map_err(|_| ImportError::Parse {
            line,
            message: format!("bad numeric value `{value}`"),
        })?;
        if !seen.insert(name.to_string()) {
            return Err(ImportError::Parse {
                line,
                message: format!("duplicate assignment for `{name}`"),
            });
        }
        let (var, binary) = parse_name(name, n, &view, line)?;
        let on = if binary {
            if (value - value.round()).abs() > IMPORT_TOLERANCE
                || !(0.0..=1.0 + IMPORT_TOLERANCE).contains(&value.round())
            {
                return Err(ImportError::NotBinary {
                    name: name.to_string(),
                    value,
                });
            }
            value.round() == 1.0
        } else {
            false
        };
        match var {
            Var::X(c, b, i) if on => x_set[b].push((c, i)),
            Var::U(c, b, i) => u_set.push((c, b, i, on)),
            Var::E => *declared_energy.get_or_insert(0.0) += value,
            _ => {}
        }
    }

    let mut assignment: Vec<(usize, u32)> = Vec::with_capacity(n);
    for (b, hits) in x_set.iter().enumerate() {
        let [one] = hits[..] else {
            return Err(ImportError::Coverage {
                target: b,
                row: format!("cover_{b}"),
            });
        };
        assignment.push(one);
    }

    // Replay cycles in order, checking each x level against the history.
    let mut batches: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    let mut retrieved_in: Vec<usize> = vec![usize::MAX; n]; // cycle index per target
    for (b, &(c, _)) in assignment.iter().enumerate() {
        batches[c].push(b);
        retrieved_in[b] = c;
    }
    let level_at = |b: usize, c: usize| -> u32 {
        let tb = instance.target(b);
        (0..n)
            .filter(|&bp| {
                let t = instance.target(bp);
                t.stack == tb.stack && t.height < tb.height && retrieved_in[bp] < c
            })
            .count() as u32
    };
    for (b, &(c, i)) in assignment.iter().enumerate() {
        let expected = level_at(b, c);
        if i != expected {
            return Err(ImportError::Level {
                cycle: c,
                target: b,
                row: format!("lvl_{c}_{b}"),
                expected,
                found: i,
            });
        }
    }
    for &(c, b, i, on) in &u_set {
        let expected = level_at(b, c);
        if on && i != expected {
            return Err(ImportError::LevelVar {
                cycle: c,
                target: b,
                row: format!("lvl_{c}_{b}"),
            });
        }
        if !on && assignment[b] == (c, i) {
            return Err(ImportError::Unsupported {
                row: format!("xu_{c}_{b}_{i}"),
            });
        }
    }

    let mut retrieved = vec![false; n];
    let mut cycles = Vec::new();
    for (c, batch) in batches.iter().enumerate().skip(1) {
        if batch.is_empty() {
            continue;
        }
        let state = SliceState::from_retrieved(instance, &retrieved);
        let plan = crate::geometry::plan_cycle(&state, batch).map_err(|e| ImportError::Cycle {
            cycle: c,
            message: e.to_string(),
        })?;
        for &b in batch {
            retrieved[b] = true;
        }
        cycles.push(plan);
    }
    let solution = Solution { cycles };
    let simulated = simulate_solution(instance, &solution).expect("planned cycles always simulate");
    if let Some(declared) = declared_energy {
        if (declared - simulated as f64).abs() > IMPORT_TOLERANCE {
            return Err(ImportError::EnergyMismatch {
                declared,
                simulated,
            });
        }
    }
    Ok(solution)
}
