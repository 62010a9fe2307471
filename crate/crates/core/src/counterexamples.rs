//! Non-generation certificates in finite powers of a finite group.
//!
//! Working in `G^m` for a finite group `G`, group the coordinates by the
//! tuple of generator values they carry: every word in the generators is
//! constant on each such agreement class, so a target that separates two
//! coordinates of one class cannot be generated — by words of any length.
//! When `m > |G|^|S|` the pigeonhole principle guarantees a class of size
//! at least two. A breadth-first closure over short words provides an
//! independent oracle for the certificates on small instances.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::report::Report;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum GroupTableError {
    #[error("line {0}: {1}")]
    Parse(usize, String),
    #[error("table is not a group: {0}")]
    NotAGroup(String),
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
#[error("search budget exceeded: {0}")]
pub struct BudgetExceeded(pub String);

/// Finite group given by its multiplication table; the axioms are checked
/// at construction.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct FiniteGroupTable {
    pub name: String,
    order: usize,
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    identity: usize,
}

impl FiniteGroupTable {
    pub fn from_table(name: impl Into<String>, table: Vec<Vec<usize>>) -> Result<Self, GroupTableError> {
        let order = table.len();
        let bad = |msg: String| GroupTableError::NotAGroup(msg);
        if order == 0 {
            return Err(bad("empty table".into()));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != order {
                return Err(bad(format!("row {i} has {} entries, expected {order}", row.len())));
            }
            for (j, &v) in row.iter().enumerate() {
                if v >= order {
                    return Err(bad(format!("entry ({i},{j}) = {v} out of range")));
                }
            }
        }
        // identity
        let identity = (0..order)
            .find(|&e| (0..order).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| bad("no identity element".into()))?;
        // inverses
        let mut inverse = vec![usize::MAX; order];
        for a in 0..order {
            let inv = (0..order)
                .find(|&b| table[a][b] == identity && table[b][a] == identity)
                .ok_or_else(|| bad(format!("element {a} has no inverse")))?;
            inverse[a] = inv;
        }
        // associativity
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(bad(format!("associativity fails at ({a},{b},{c})")));
                    }
                }
            }
        }
        Ok(FiniteGroupTable {
            name: name.into(),
            order,
            table,
            inverse,
            identity,
        })
    }

    /// Plain-text format: the order on the first non-comment line, then
    /// `order` rows of `order` whitespace-separated indices.
    pub fn parse(text: &str) -> Result<Self, GroupTableError> {
        let mut rows: Vec<Vec<usize>> = Vec::new();
        let mut order: Option<usize> = None;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if order.is_none() {
                let n: usize = line
                    .parse()
                    .map_err(|_| GroupTableError::Parse(ln + 1, format!("expected the group order, got {line:?}")))?;
                order = Some(n);
                continue;
            }
            let row: Result<Vec<usize>, _> = line.split_whitespace().map(str::parse).collect();
            let row = row.map_err(|_| GroupTableError::Parse(ln + 1, "expected element indices".into()))?;
            rows.push(row);
            if rows.len() == order.unwrap() {
                break;
            }
        }
        let order = order.ok_or_else(|| GroupTableError::Parse(0, "missing group order".into()))?;
        if rows.len() != order {
            return Err(GroupTableError::Parse(
                0,
                format!("expected {order} table rows, found {}", rows.len()),
            ));
        }
        Self::from_table(format!("order-{order} table"), rows)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
        Self::from_table(format!("Z/{n}"), table).expect("cyclic tables are groups")
    }

    fn from_permutations(name: &str, perms: Vec<Vec<usize>>) -> Self {
        let index: HashMap<Vec<usize>, usize> =
            perms.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let compose = |p: &[usize], q: &[usize]| -> Vec<usize> {
            // apply q first, then p
            q.iter().map(|&v| p[v]).collect()
        };
        let table: Vec<Vec<usize>> = perms
            .iter()
            .map(|p| perms.iter().map(|qp| index[&compose(p, qp)]).collect())
            .collect();
        Self::from_table(name, table).expect("permutation tables are groups")
    }

    /// Symmetric group on three letters (order 6).
    pub fn symmetric_3() -> Self {
        let perms = vec![
            vec![0, 1, 2],
            vec![0, 2, 1],
            vec![1, 0, 2],
            vec![1, 2, 0],
            vec![2, 0, 1],
            vec![2, 1, 0],
        ];
        Self::from_permutations("S3", perms)
    }

    /// Alternating group on four letters (order 12).
    pub fn alternating_4() -> Self {
        let mut perms = Vec::new();
        let base = [0usize, 1, 2, 3];
        // enumerate all permutations of 4 letters, keep the even ones
        fn heaps(a: &mut [usize; 4], k: usize, out: &mut Vec<Vec<usize>>) {
            if k == 1 {
                out.push(a.to_vec());
                return;
            }
            for i in 0..k {
                heaps(a, k - 1, out);
                if k.is_multiple_of(2) {
                    a.swap(i, k - 1);
                } else {
                    a.swap(0, k - 1);
                }
            }
        }
        let mut all = Vec::new();
        let mut arr = base;
        heaps(&mut arr, 4, &mut all);
        for p in all {
            let mut inversions = 0;
            for i in 0..4 {
                for j in (i + 1)..4 {
                    if p[i] > p[j] {
                        inversions += 1;
                    }
                }
            }
            if inversions % 2 == 0 {
                perms.push(p);
            }
        }
        perms.sort();
        perms.dedup();
        Self::from_permutations("A4", perms)
    }
}

/// Element of the truncated power `G^m`, coordinatewise.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq, Hash)]
pub struct ProductElement {
    pub coords: Vec<usize>,
}

impl ProductElement {
    pub fn identity(g: &FiniteGroupTable, m: usize) -> Self {
        ProductElement {
            coords: vec![g.identity(); m],
        }
    }

    pub fn mul(&self, g: &FiniteGroupTable, other: &ProductElement) -> ProductElement {
        ProductElement {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(&a, &b)| g.mul(a, b))
                .collect(),
        }
    }

    pub fn inv(&self, g: &FiniteGroupTable) -> ProductElement {
        ProductElement {
            coords: self.coords.iter().map(|&a| g.inv(a)).collect(),
        }
    }
}

/// Group coordinates by their generator-column tuple; classes are sorted by
/// least member. With no generators there is a single class.
pub fn agreement_partition(gens: &[ProductElement], m: usize) -> Vec<Vec<usize>> {
    let mut classes: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for j in 0..m {
        let key: Vec<usize> = gens.iter().map(|s| s.coords[j]).collect();
        classes.entry(key).or_default().push(j);
    }
    let mut out: Vec<Vec<usize>> = classes.into_values().collect();
    out.sort_by_key(|c| c[0]);
    out
}

/// A proof that `target` is not a word in the generators, valid for words
/// of every length: all generators agree on `witness_class` but the target
/// separates `witness_pair`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct AgreementCertificate {
    pub partition: Vec<Vec<usize>>,
    pub witness_class: Vec<usize>,
    pub witness_pair: (usize, usize),
    pub target: ProductElement,
}

/// Search the agreement classes for a pair of coordinates the target
/// separates. `None` means no class certifies non-generation (it does not
/// prove generability).
pub fn nongeneration_certificate(
    gens: &[ProductElement],
    target: &ProductElement,
) -> Option<AgreementCertificate> {
    let m = target.coords.len();
    debug_assert!(gens.iter().all(|s| s.coords.len() == m));
    let partition = agreement_partition(gens, m);
    for class in &partition {
        for a in 0..class.len() {
            for b in (a + 1)..class.len() {
                let (j1, j2) = (class[a], class[b]);
                if target.coords[j1] != target.coords[j2] {
                    return Some(AgreementCertificate {
                        partition: partition.clone(),
                        witness_class: class.clone(),
                        witness_pair: (j1, j2),
                        target: target.clone(),
                    });
                }
            }
        }
    }
    None
}

/// Re-check a certificate: the partition is the agreement partition, every
/// generator is constant on the witness class, and the target separates the
/// witness pair.
pub fn verify_agreement_certificate(
    g: &FiniteGroupTable,
    gens: &[ProductElement],
    cert: &AgreementCertificate,
) -> Report {
    let _ = g;
    let mut report = Report::new("agreement certificate");
    let m = cert.target.coords.len();
    report.check(
        "partition matches the generator columns",
        cert.partition == agreement_partition(gens, m),
        "stored partition differs",
    );
    let constant = gens.iter().all(|s| {
        cert.witness_class
            .iter()
            .all(|&j| s.coords[j] == s.coords[cert.witness_class[0]])
    });
    report.check(
        "every generator is constant on the witness class",
        constant,
        format!("class {:?}", cert.witness_class),
    );
    let (j1, j2) = cert.witness_pair;
    report.check(
        "witness pair lies in the witness class",
        cert.witness_class.contains(&j1) && cert.witness_class.contains(&j2),
        format!("pair ({j1}, {j2})"),
    );
    report.check(
        "target separates the witness pair",
        cert.target.coords[j1] != cert.target.coords[j2],
        format!(
            "target[{j1}] = {} equals target[{j2}] = {}",
            cert.target.coords[j1], cert.target.coords[j2]
        ),
    );
    if report.passed() {
        report.note(
            "every word in the generators is constant on each agreement class, \
             so the certificate rules out words of all lengths"
                .to_string(),
        );
    }
    report
}

/// Exhaustive breadth-first closure of the generators (and their inverses)
/// up to `max_len` letters; answers membership of `target`.
pub fn brute_force_generated(
    g: &FiniteGroupTable,
    gens: &[ProductElement],
    target: &ProductElement,
    max_len: u32,
) -> Result<bool, BudgetExceeded> {
    let m = target.coords.len();
    let mut state_budget: u64 = 2_000_000;
    let mut space: u64 = 1;
    for _ in 0..m {
        space = space.saturating_mul(g.order() as u64);
        if space > state_budget {
            return Err(BudgetExceeded(format!(
                "|G|^m = {}^{m} exceeds the state budget",
                g.order()
            )));
        }
    }
    let identity = ProductElement::identity(g, m);
    if *target == identity {
        return Ok(true);
    }
    let mut seen: HashMap<ProductElement, u32> = HashMap::new();
    seen.insert(identity.clone(), 0);
    let mut frontier: VecDeque<ProductElement> = VecDeque::new();
    frontier.push_back(identity);
    let mut steps: Vec<ProductElement> = Vec::new();
    for s in gens {
        steps.push(s.clone());
        steps.push(s.inv(g));
    }
    while let Some(current) = frontier.pop_front() {
        let len = seen[&current];
        if len >= max_len {
            continue;
        }
        for s in &steps {
            let next = current.mul(g, s);
            if next == *target {
                return Ok(true);
            }
            if !seen.contains_key(&next) {
                seen.insert(next.clone(), len + 1);
                frontier.push_back(next);
                state_budget = state_budget.saturating_sub(1);
                if state_budget == 0 {
                    return Err(BudgetExceeded("visited-state budget exhausted".into()));
                }
            }
        }
    }
    Ok(false)
}

/// Parse a combined instance: a group table, a `gens` section with one
/// product element per line, and a `target` section with a single element.
pub fn parse_counterexample_input(
    text: &str,
) -> Result<(FiniteGroupTable, Vec<ProductElement>, ProductElement), GroupTableError> {
    let mut table_lines: Vec<&str> = Vec::new();
    let mut gen_lines: Vec<(usize, &str)> = Vec::new();
    let mut target_lines: Vec<(usize, &str)> = Vec::new();
    let mut section = 0; // 0 = table, 1 = gens, 2 = target
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line {
            "gens" => {
                section = 1;
                continue;
            }
            "target" => {
                section = 2;
                continue;
            }
            _ => {}
        }
        match section {
            0 => table_lines.push(raw),
            1 => gen_lines.push((ln + 1, line)),
            _ => target_lines.push((ln + 1, line)),
        }
    }
    let table = FiniteGroupTable::parse(&table_lines.join("\n"))?;
    let parse_row = |ln: usize, line: &str| -> Result<ProductElement, GroupTableError> {
        let coords: Result<Vec<usize>, _> = line.split_whitespace().map(str::parse).collect();
        let coords =
            coords.map_err(|_| GroupTableError::Parse(ln, "expected element indices".into()))?;
        for &c in &coords {
            if c >= table.order() {
                return Err(GroupTableError::Parse(ln, format!("index {c} out of range")));
            }
        }
        Ok(ProductElement { coords })
    };
    let gens: Result<Vec<ProductElement>, _> = gen_lines
        .iter()
        .map(|(ln, line)| parse_row(*ln, line))
        .collect();
    let gens = gens?;
    let target = match target_lines.as_slice() {
        [(ln, line)] => parse_row(*ln, line)?,
        _ => {
            return Err(GroupTableError::Parse(
                0,
                "expected exactly one target row".into(),
            ))
        }
    };
    let m = target.coords.len();
    if gens.iter().any(|s| s.coords.len() != m) {
        return Err(GroupTableError::Parse(
            0,
            "generator and target dimensions disagree".into(),
        ));
    }
    Ok((table, gens, target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pe(coords: Vec<usize>) -> ProductElement {
        ProductElement { coords }
    }

    #[test]
    fn fixture_tables_are_groups() {
        assert_eq!(FiniteGroupTable::cyclic(2).order(), 2);
        assert_eq!(FiniteGroupTable::cyclic(3).order(), 3);
        assert_eq!(FiniteGroupTable::symmetric_3().order(), 6);
        assert_eq!(FiniteGroupTable::alternating_4().order(), 12);
    }

    #[test]
    fn partition_by_columns() {
        // Z/2, one generator (0,1,0,1): classes {0,2} and {1,3}
        let gens = vec![pe(vec![0, 1, 0, 1])];
        let classes = agreement_partition(&gens, 4);
        assert_eq!(classes, vec![vec![0, 2], vec![1, 3]]);
        // no generators: a single class of all coordinates
        assert_eq!(agreement_partition(&[], 5), vec![vec![0, 1, 2, 3, 4]]);
    }

    #[test]
    fn pigeonhole_forces_a_large_class() {
        // |S3|^2 = 36 < 37 coordinates
        let g = FiniteGroupTable::symmetric_3();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let gens: Vec<ProductElement> = (0..2)
                .map(|_| pe((0..37).map(|_| rng.gen_range(0..g.order())).collect()))
                .collect();
            let classes = agreement_partition(&gens, 37);
            assert!(classes.iter().any(|c| c.len() >= 2));
        }
    }

    #[test]
    fn basis_style_target_is_not_generated() {
        // the classic sequence (g, id, id, ...): generators constant on a
        // class through coordinates 0 and 1
        let g = FiniteGroupTable::cyclic(3);
        let gens = vec![pe(vec![1, 1, 2, 0]), pe(vec![2, 2, 0, 1])];
        let target = pe(vec![1, 0, 0, 0]);
        let cert = nongeneration_certificate(&gens, &target).expect("certificate");
        assert_eq!(cert.witness_pair, (0, 1));
        assert!(verify_agreement_certificate(&g, &gens, &cert).passed());
        for len in 0..=4 {
            assert!(!brute_force_generated(&g, &gens, &target, len).unwrap());
        }
    }

    #[test]
    fn constant_target_yields_no_certificate() {
        let gens = vec![pe(vec![1, 1, 0]), pe(vec![2, 2, 1])];
        // target constant on every agreement class
        let target = pe(vec![2, 2, 1]);
        assert!(nongeneration_certificate(&gens, &target).is_none());
    }

    #[test]
    fn brute_force_finds_members() {
        let g = FiniteGroupTable::symmetric_3();
        let gens = vec![pe(vec![1, 2]), pe(vec![3, 3])];
        let id = ProductElement::identity(&g, 2);
        assert!(brute_force_generated(&g, &gens, &id, 0).unwrap());
        assert!(brute_force_generated(&g, &gens, &gens[0], 1).unwrap());
        let product = gens[0].mul(&g, &gens[1]);
        assert!(brute_force_generated(&g, &gens, &product, 2).unwrap());
    }

    #[test]
    fn certificates_agree_with_brute_force_on_random_instances() {
        let g = FiniteGroupTable::symmetric_3();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut certified = 0;
        for _ in 0..40 {
            let m = rng.gen_range(2..=5);
            let gens: Vec<ProductElement> = (0..rng.gen_range(1..=2))
                .map(|_| pe((0..m).map(|_| rng.gen_range(0..g.order())).collect()))
                .collect();
            let target = pe((0..m).map(|_| rng.gen_range(0..g.order())).collect());
            if let Some(cert) = nongeneration_certificate(&gens, &target) {
                certified += 1;
                assert!(verify_agreement_certificate(&g, &gens, &cert).passed());
                for len in [2u32, 4] {
                    assert!(
                        !brute_force_generated(&g, &gens, &target, len).unwrap(),
                        "certificate contradicted by the oracle"
                    );
                }
            }
        }
        assert!(certified > 0, "random instances never produced certificates");
    }

    #[test]
    fn words_are_constant_on_classes() {
        let g = FiniteGroupTable::alternating_4();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let m = 9;
        let gens: Vec<ProductElement> = (0..2)
            .map(|_| pe((0..m).map(|_| rng.gen_range(0..g.order())).collect()))
            .collect();
        let classes = agreement_partition(&gens, m);
        let mut steps = Vec::new();
        for s in &gens {
            steps.push(s.clone());
            steps.push(s.inv(&g));
        }
        for _ in 0..200 {
            let mut word = ProductElement::identity(&g, m);
            for _ in 0..rng.gen_range(0..=5) {
                word = word.mul(&g, &steps[rng.gen_range(0..steps.len())]);
            }
            for class in &classes {
                let v = word.coords[class[0]];
                assert!(class.iter().all(|&j| word.coords[j] == v));
            }
        }
    }

    #[test]
    fn budget_guard_trips() {
        let g = FiniteGroupTable::symmetric_3();
        let gens = vec![pe(vec![0; 12])];
        let target = pe(vec![1; 12]);
        assert!(brute_force_generated(&g, &gens, &target, 3).is_err());
    }

    #[test]
    fn parse_combined_input() {
        let text = "# Z/2 with two generators\n2\n0 1\n1 0\ngens\n0 1 0 1\n1 1 0 0\ntarget\n1 0 0 0\n";
        let (g, gens, target) = parse_counterexample_input(text).unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(gens.len(), 2);
        assert_eq!(target.coords, vec![1, 0, 0, 0]);
        assert!(parse_counterexample_input("2\n0 1\n1 0\ngens\ntarget\n5 0\n").is_err());
    }

    #[test]
    fn table_validation_rejects_non_groups() {
        // constant table: no identity
        let bad = vec![vec![0, 0], vec![0, 0]];
        assert!(matches!(
            FiniteGroupTable::from_table("bad", bad),
            Err(GroupTableError::NotAGroup(_))
        ));
    }
}
