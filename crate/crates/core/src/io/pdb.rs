//! A minimal PDB subset: single-chain ATOM records carrying the three
//! backbone atoms N, CA, C per residue. Other atom names are ignored on
//! parse; occupancy and temperature factor are written as 1.00 and 0.00.

use std::collections::BTreeMap;

use nalgebra::Vector3;

use crate::motor::{BackboneChain, Residue};

use super::IoError;

#[derive(Default, Clone, Copy)]
struct PartialResidue {
    n: Option<Vector3<f64>>,
    ca: Option<Vector3<f64>>,
    c: Option<Vector3<f64>>,
}

fn slice(line: &str, start: usize, end: usize) -> &str {
    line.get(start..end.min(line.len())).unwrap_or("")
}

fn parse_coord(line: &str, start: usize, line_no: usize) -> Result<f64, IoError> {
    slice(line, start, start + 8)
        .trim()
        .parse::<f64>()
        .map_err(|_| IoError::MalformedRecord {
            line: line_no,
            reason: "unreadable coordinate",
        })
}

/// Parse ATOM records into a backbone chain, residues ordered by residue
/// sequence number. Every residue must carry N, CA, and C exactly once.
pub fn parse_pdb_backbone(text: &str) -> Result<BackboneChain, IoError> {
    let mut residues: BTreeMap<i64, PartialResidue> = BTreeMap::new();
    let mut chain_id: Option<char> = None;

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if !line.starts_with("ATOM") {
            continue;
        }
        if line.len() < 54 {
            return Err(IoError::MalformedRecord {
                line: line_no,
                reason: "record too short for coordinates",
            });
        }
        let atom_name = slice(line, 12, 16).trim().to_string();
        let chain = slice(line, 21, 22).chars().next().unwrap_or(' ');
        match chain_id {
            None => chain_id = Some(chain),
            Some(c) if c != chain => return Err(IoError::MultipleChains),
            _ => {}
        }
        let res_seq: i64 = slice(line, 22, 26)
            .trim()
            .parse()
            .map_err(|_| IoError::MalformedRecord {
                line: line_no,
                reason: "unreadable residue number",
            })?;
        let x = parse_coord(line, 30, line_no)?;
        let y = parse_coord(line, 38, line_no)?;
        let z = parse_coord(line, 46, line_no)?;
        let pos = Vector3::new(x, y, z);

        let entry = residues.entry(res_seq).or_default();
        let slot = match atom_name.as_str() {
            "N" => &mut entry.n,
            "CA" => &mut entry.ca,
            "C" => &mut entry.c,
            _ => continue,
        };
        if slot.is_some() {
            return Err(IoError::DuplicateAtom {
                residue: res_seq,
                atom: atom_name,
            });
        }
        *slot = Some(pos);
    }

    let mut out = Vec::with_capacity(residues.len());
    for (res_seq, partial) in residues {
        let n = partial.n.ok_or(IoError::MissingAtom {
            residue: res_seq,
            atom: "N",
        })?;
        let ca = partial.ca.ok_or(IoError::MissingAtom {
            residue: res_seq,
            atom: "CA",
        })?;
        let c = partial.c.ok_or(IoError::MissingAtom {
            residue: res_seq,
            atom: "C",
        })?;
        out.push(Residue { n, ca, c });
    }
    BackboneChain::new(out).map_err(IoError::Backbone)
}

fn check_coord(v: f64) -> Result<f64, IoError> {
    if !v.is_finite() {
        return Err(IoError::NonFiniteCoordinate);
    }
    if !(-999.999..=9999.999).contains(&v) {
        return Err(IoError::CoordinateOutOfRange { value: v });
    }
    Ok(v)
}

fn atom_record(
    serial: usize,
    name: &str,
    element: &str,
    res_seq: usize,
    p: &Vector3<f64>,
) -> Result<String, IoError> {
    Ok(format!(
        "ATOM  {:>5} {:<4}{}{:<3} {}{:>4}{}   {:>8.3}{:>8.3}{:>8.3}{:>6.2}{:>6.2}          {:>2}",
        serial,
        name,
        " ",
        "GLY",
        "A",
        res_seq,
        " ",
        check_coord(p.x)?,
        check_coord(p.y)?,
        check_coord(p.z)?,
        1.00,
        0.00,
        element,
    ))
}

/// Render a chain as fixed-width ATOM records with sequential serials.
/// An empty chain produces only the header and END.
pub fn write_pdb_backbone(chain: &BackboneChain) -> Result<String, IoError> {
    let mut out = String::new();
    out.push_str("HEADER    PROTEIN BACKBONE\n");
    let mut serial = 1;
    for (i, r) in chain.residues().iter().enumerate() {
        let res_seq = i + 1;
        for (name, element, pos) in [("N", "N", &r.n), ("CA", "C", &r.ca), ("C", "C", &r.c)] {
            out.push_str(&atom_record(serial, name, element, res_seq, pos)?);
            out.push('\n');
            serial += 1;
        }
    }
    if !chain.is_empty() {
        out.push_str("TER\n");
    }
    out.push_str("END\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_chain(n: usize, seed: u64) -> BackboneChain {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let residues = (0..n)
            .map(|i| {
                let ca = Vector3::new(
                    3.8 * i as f64 + rng.gen_range(-0.2..0.2),
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(-3.0..3.0),
                );
                Residue {
                    ca,
                    c: ca + Vector3::new(1.5, rng.gen_range(-0.2..0.2), 0.1),
                    n: ca + Vector3::new(-0.5, 1.3, rng.gen_range(-0.2..0.2)),
                }
            })
            .collect();
        BackboneChain::new(residues).unwrap()
    }

    #[test]
    fn round_trip_keeps_three_decimals() {
        let chain = random_chain(7, 63);
        let text = write_pdb_backbone(&chain).unwrap();
        let parsed = parse_pdb_backbone(&text).unwrap();
        assert_eq!(parsed.len(), chain.len());
        for (a, b) in chain.residues().iter().zip(parsed.residues()) {
            for (p, q) in [(a.n, b.n), (a.ca, b.ca), (a.c, b.c)] {
                assert!((p - q).abs().max() <= 5e-4 + 1e-12);
            }
        }
    }

    #[test]
    fn handcrafted_file_parses_exactly() {
        let text = "\
HEADER    TEST
ATOM      1  N   GLY A   1      -0.572   1.337   0.000  1.00  0.00           N
ATOM      2  CA  GLY A   1       0.000   0.000   0.000  1.00  0.00           C
ATOM      3  C   GLY A   1       1.526   0.000   0.000  1.00  0.00           C
ATOM      4  N   GLY A   2       2.000   1.300   0.500  1.00  0.00           N
ATOM      5  CA  GLY A   2       2.500   0.100   0.250  1.00  0.00           C
ATOM      6  C   GLY A   2       4.000   0.200   0.125  1.00  0.00           C
ATOM      7  N   GLY A   3       5.100   1.300   0.000  1.00  0.00           N
ATOM      8  CA  GLY A   3       5.600   0.000   0.300  1.00  0.00           C
ATOM      9  C   GLY A   3       7.100   0.100   0.200  1.00  0.00           C
TER
END
";
        let chain = parse_pdb_backbone(text).unwrap();
        assert_eq!(chain.len(), 3);
        assert_eq!(chain.residues()[0].n, Vector3::new(-0.572, 1.337, 0.0));
        assert_eq!(chain.residues()[1].ca, Vector3::new(2.5, 0.1, 0.25));
        assert_eq!(chain.residues()[2].c, Vector3::new(7.1, 0.1, 0.2));
    }

    #[test]
    fn missing_ca_error_names_the_residue() {
        let text = "\
ATOM      1  N   GLY A   1       0.000   1.300   0.000  1.00  0.00           N
ATOM      2  CA  GLY A   1       0.500   0.000   0.000  1.00  0.00           C
ATOM      3  C   GLY A   1       2.000   0.100   0.000  1.00  0.00           C
ATOM      4  N   GLY A   2       3.000   1.300   0.000  1.00  0.00           N
ATOM      5  C   GLY A   2       5.000   0.200   0.000  1.00  0.00           C
END
";
        match parse_pdb_backbone(text) {
            Err(IoError::MissingAtom { residue: 2, atom: "CA" }) => {}
            other => panic!("expected missing CA on residue 2, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_atom_is_rejected() {
        let text = "\
ATOM      1  N   GLY A   1       0.000   1.300   0.000  1.00  0.00           N
ATOM      2  N   GLY A   1       0.100   1.200   0.000  1.00  0.00           N
";
        assert!(matches!(
            parse_pdb_backbone(text),
            Err(IoError::DuplicateAtom { residue: 1, .. })
        ));
    }

    #[test]
    fn multiple_chains_are_rejected() {
        let text = "\
ATOM      1  N   GLY A   1       0.000   1.300   0.000  1.00  0.00           N
ATOM      2  CA  GLY B   1       0.500   0.000   0.000  1.00  0.00           C
";
        assert!(matches!(parse_pdb_backbone(text), Err(IoError::MultipleChains)));
    }

    #[test]
    fn malformed_coordinates_are_rejected() {
        let text = "ATOM      1  N   GLY A   1       x.xxx   1.300   0.000  1.00  0.00\n";
        assert!(matches!(
            parse_pdb_backbone(text),
            Err(IoError::MalformedRecord { line: 1, .. })
        ));
    }

    #[test]
    fn empty_chain_writes_header_only() {
        let chain = BackboneChain::new(vec![]).unwrap();
        let text = write_pdb_backbone(&chain).unwrap();
        assert_eq!(text, "HEADER    PROTEIN BACKBONE\nEND\n");
    }

    #[test]
    fn non_finite_coordinates_are_rejected_on_write() {
        let mut residues = random_chain(2, 64).residues().to_vec();
        residues[1].ca.y = f64::NAN;
        // construction still succeeds geometrically? NaN breaks validation,
        // so build the record directly
        let err = atom_record(1, "CA", "C", 1, &residues[1].ca).unwrap_err();
        assert!(matches!(err, IoError::NonFiniteCoordinate));
    }
}
