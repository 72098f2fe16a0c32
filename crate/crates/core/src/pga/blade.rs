//! Basis blades of Cl(3,0,1) and the product tables derived from them.
//!
//! Blades are encoded as 4-bit masks (bit 0 = e0, bits 1..3 = e1..e3).
//! The public coefficient order groups blades by grade:
//! `[1, e0, e1, e2, e3, e01, e02, e03, e12, e13, e23, e012, e013, e023, e123, e0123]`.
//! All sign tables are computed at compile time from the anticommutation
//! rule and the metric (e1..e3 square to +1, e0 squares to 0), so the
//! orientation conventions are self-consistent by construction.

/// Number of basis blades.
pub const BLADE_COUNT: usize = 16;

/// Canonical blade order as bit masks.
pub const INDEX_TO_MASK: [u8; BLADE_COUNT] = [
    0b0000, // 1
    0b0001, // e0
    0b0010, // e1
    0b0100, // e2
    0b1000, // e3
    0b0011, // e01
    0b0101, // e02
    0b1001, // e03
    0b0110, // e12
    0b1010, // e13
    0b1100, // e23
    0b0111, // e012
    0b1011, // e013
    0b1101, // e023
    0b1110, // e123
    0b1111, // e0123
];

/// Blade names in canonical order, for debug output and table dumps.
pub const BLADE_NAMES: [&str; BLADE_COUNT] = [
    "1", "e0", "e1", "e2", "e3", "e01", "e02", "e03", "e12", "e13", "e23", "e012", "e013", "e023",
    "e123", "e0123",
];

/// Convenient index constants in the canonical order.
pub mod idx {
    pub const SCALAR: usize = 0;
    pub const E0: usize = 1;
    pub const E1: usize = 2;
    pub const E2: usize = 3;
    pub const E3: usize = 4;
    pub const E01: usize = 5;
    pub const E02: usize = 6;
    pub const E03: usize = 7;
    pub const E12: usize = 8;
    pub const E13: usize = 9;
    pub const E23: usize = 10;
    pub const E012: usize = 11;
    pub const E013: usize = 12;
    pub const E023: usize = 13;
    pub const E123: usize = 14;
    pub const E0123: usize = 15;
}

const fn build_mask_to_index() -> [usize; BLADE_COUNT] {
    let mut out = [0usize; BLADE_COUNT];
    let mut i = 0;
    while i < BLADE_COUNT {
        out[INDEX_TO_MASK[i] as usize] = i;
        i += 1;
    }
    out
}

/// Inverse of [`INDEX_TO_MASK`].
pub const MASK_TO_INDEX: [usize; BLADE_COUNT] = build_mask_to_index();

const fn build_grades() -> [usize; BLADE_COUNT] {
    let mut out = [0usize; BLADE_COUNT];
    let mut i = 0;
    while i < BLADE_COUNT {
        out[i] = INDEX_TO_MASK[i].count_ones() as usize;
        i += 1;
    }
    out
}

/// Grade of each blade in canonical order.
pub const GRADE: [usize; BLADE_COUNT] = build_grades();

/// Sign of the permutation that merges the factors of blade `a` (ascending)
/// in front of the factors of blade `b` (ascending): one transposition per
/// (i in a, j in b) pair with i > j.
const fn reorder_sign(a: u8, b: u8) -> i8 {
    let mut swaps = 0u32;
    let mut j = 0;
    while j < 4 {
        if b & (1 << j) != 0 {
            swaps += (a >> (j + 1)).count_ones();
        }
        j += 1;
    }
    if swaps % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Geometric product of two basis blades: `(target_index, sign)`.
/// Sign is 0 when the shared null factor e0 annihilates the product.
const fn mul_basis(a: u8, b: u8) -> (usize, i8) {
    if a & b & 1 != 0 {
        return (0, 0); // e0 * e0 = 0
    }
    // Shared Euclidean factors contract to +1, so only the reorder sign
    // and the symmetric-difference mask remain.
    (MASK_TO_INDEX[(a ^ b) as usize], reorder_sign(a, b))
}

/// One entry of a bilinear blade-product table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TableEntry {
    pub target: usize,
    pub sign: i8,
}

pub type BladeTable = [[TableEntry; BLADE_COUNT]; BLADE_COUNT];

const ZERO_ENTRY: TableEntry = TableEntry { target: 0, sign: 0 };

const fn build_geometric_table() -> BladeTable {
    let mut t = [[ZERO_ENTRY; BLADE_COUNT]; BLADE_COUNT];
    let mut i = 0;
    while i < BLADE_COUNT {
        let mut j = 0;
        while j < BLADE_COUNT {
            let (target, sign) = mul_basis(INDEX_TO_MASK[i], INDEX_TO_MASK[j]);
            t[i][j] = TableEntry { target, sign };
            j += 1;
        }
        i += 1;
    }
    t
}

/// Cayley table of the geometric product on basis blades.
pub const GEOMETRIC: BladeTable = build_geometric_table();

const fn build_outer_table() -> BladeTable {
    let mut t = [[ZERO_ENTRY; BLADE_COUNT]; BLADE_COUNT];
    let mut i = 0;
    while i < BLADE_COUNT {
        let mut j = 0;
        while j < BLADE_COUNT {
            let (a, b) = (INDEX_TO_MASK[i], INDEX_TO_MASK[j]);
            if a & b == 0 {
                let (target, sign) = mul_basis(a, b);
                t[i][j] = TableEntry { target, sign };
            }
            j += 1;
        }
        i += 1;
    }
    t
}

/// Outer (wedge) product table: zero whenever the blades share a factor.
pub const OUTER: BladeTable = build_outer_table();

/// Hodge dual of blade `i`: the complementary blade with the sign fixed by
/// requiring `blade * dual(blade) = +e0123`.
const fn build_dual() -> [TableEntry; BLADE_COUNT] {
    let mut t = [ZERO_ENTRY; BLADE_COUNT];
    let mut i = 0;
    while i < BLADE_COUNT {
        let mask = INDEX_TO_MASK[i];
        let comp = !mask & 0xF;
        let (_, sign) = mul_basis(mask, comp);
        t[i] = TableEntry {
            target: MASK_TO_INDEX[comp as usize],
            sign,
        };
        i += 1;
    }
    t
}

pub const DUAL: [TableEntry; BLADE_COUNT] = build_dual();

/// Inverse Hodge dual, satisfying `undual(dual(x)) = x` blade-wise.
const fn build_undual() -> [TableEntry; BLADE_COUNT] {
    let mut t = [ZERO_ENTRY; BLADE_COUNT];
    let mut i = 0;
    while i < BLADE_COUNT {
        let d = DUAL[i];
        // dual maps i -> (d.target, d.sign); invert the permutation.
        t[d.target] = TableEntry {
            target: i,
            sign: d.sign,
        };
        i += 1;
    }
    t
}

pub const UNDUAL: [TableEntry; BLADE_COUNT] = build_undual();

/// Join table: `join(a, b) = undual(dual(b) ^ dual(a))` on basis blades.
const fn build_join_table() -> BladeTable {
    let mut t = [[ZERO_ENTRY; BLADE_COUNT]; BLADE_COUNT];
    let mut i = 0;
    while i < BLADE_COUNT {
        let mut j = 0;
        while j < BLADE_COUNT {
            let da = DUAL[i];
            let db = DUAL[j];
            let w = OUTER[db.target][da.target];
            if w.sign != 0 {
                let u = UNDUAL[w.target];
                t[i][j] = TableEntry {
                    target: u.target,
                    sign: da.sign * db.sign * w.sign * u.sign,
                };
            }
            j += 1;
        }
        i += 1;
    }
    t
}

pub const JOIN: BladeTable = build_join_table();

/// Reversion sign per blade: (-1)^(g(g-1)/2).
const fn build_reverse_signs() -> [f64; BLADE_COUNT] {
    let mut t = [1.0f64; BLADE_COUNT];
    let mut i = 0;
    while i < BLADE_COUNT {
        let g = GRADE[i];
        if (g * (g.saturating_sub(1)) / 2) % 2 == 1 {
            t[i] = -1.0;
        }
        i += 1;
    }
    t
}

pub const REVERSE_SIGN: [f64; BLADE_COUNT] = build_reverse_signs();

/// Grade involution sign per blade: (-1)^g.
const fn build_involution_signs() -> [f64; BLADE_COUNT] {
    let mut t = [1.0f64; BLADE_COUNT];
    let mut i = 0;
    while i < BLADE_COUNT {
        if GRADE[i] % 2 == 1 {
            t[i] = -1.0;
        }
        i += 1;
    }
    t
}

pub const INVOLUTION_SIGN: [f64; BLADE_COUNT] = build_involution_signs();

/// Left multiplication by e0: blades already containing e0 are annihilated,
/// Euclidean blades pick up e0 with sign +1 (e0 is leftmost in canonical order).
const fn build_e0_lift() -> [Option<usize>; BLADE_COUNT] {
    let mut t = [None; BLADE_COUNT];
    let mut i = 0;
    while i < BLADE_COUNT {
        let mask = INDEX_TO_MASK[i];
        if mask & 1 == 0 {
            t[i] = Some(MASK_TO_INDEX[(mask | 1) as usize]);
        }
        i += 1;
    }
    t
}

pub const E0_LIFT: [Option<usize>; BLADE_COUNT] = build_e0_lift();

/// Inverse of [`E0_LIFT`]: for a blade containing e0, the blade with e0
/// removed. `None` for Euclidean blades.
const fn build_e0_strip() -> [Option<usize>; BLADE_COUNT] {
    let mut t = [None; BLADE_COUNT];
    let mut i = 0;
    while i < BLADE_COUNT {
        let mask = INDEX_TO_MASK[i];
        if mask & 1 == 1 {
            t[i] = Some(MASK_TO_INDEX[(mask & !1) as usize]);
        }
        i += 1;
    }
    t
}

pub const E0_STRIP: [Option<usize>; BLADE_COUNT] = build_e0_strip();

/// True for blades without the null factor e0; only these contribute to the norm.
const fn build_euclidean_flags() -> [bool; BLADE_COUNT] {
    let mut t = [false; BLADE_COUNT];
    let mut i = 0;
    while i < BLADE_COUNT {
        t[i] = INDEX_TO_MASK[i] & 1 == 0;
        i += 1;
    }
    t
}

pub const IS_EUCLIDEAN: [bool; BLADE_COUNT] = build_euclidean_flags();

/// Blade indices of the even subalgebra (grades 0, 2, 4), home of motors.
pub const EVEN_BLADES: [usize; 8] = [
    idx::SCALAR,
    idx::E01,
    idx::E02,
    idx::E03,
    idx::E12,
    idx::E13,
    idx::E23,
    idx::E0123,
];
