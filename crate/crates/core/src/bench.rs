//! Benchmark ontology families.

use std::fmt::Write as _;

use crate::parser::{parse_ontology, OntologyDocument};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestOntVariant {
    Cons,
    Incons,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemberFamily {
    CaProvinces,
    EuMembers,
}

#[derive(Debug, Clone)]
pub struct GeneratedOntology {
    pub text: String,
    pub document: OntologyDocument,
}

impl GeneratedOntology {
    pub fn metrics(&self) -> (usize, usize, usize) {
        (
            self.document.statements.len(),
            self.document.concept_names.len(),
            self.document.individuals.len(),
        )
    }
}

fn finish(text: String) -> GeneratedOntology {
    let document = parse_ontology(&text).expect("generated ontology parses");
    GeneratedOntology { text, document }
}

/// The scaling family: a class whose R-fillers must simultaneously realize n
/// disjoint concepts and stay inside n pairwise-disjoint nominals, seeded by
/// an incoming R-edge from a C individual. The consistent variant leaves one
/// filler concept compatible with C; the inconsistent variant closes it off.
pub fn gen_testont(n: usize, variant: TestOntVariant) -> GeneratedOntology {
    assert!(n >= 1);
    let mut text = String::new();
    let _ = writeln!(text, "; TestOnt n={} variant={:?}", n, variant);
    let _ = writeln!(text, "(implies C (some (inv R) A))");
    let mut conjuncts = Vec::new();
    for i in 1..=n {
        conjuncts.push(format!("(some R X{})", i));
    }
    let nominal_list = (1..=n).map(|i| format!("o{}", i)).collect::<Vec<_>>();
    conjuncts.push(format!("(all R (oneof {}))", nominal_list.join(" ")));
    let _ = writeln!(text, "(implies A (and {}))", conjuncts.join(" "));
    let _ = writeln!(text, "(disjoint {})", nominal_list.join(" "));
    let x_list = (1..=n).map(|i| format!("X{}", i)).collect::<Vec<_>>();
    if n >= 2 {
        let _ = writeln!(text, "(disjoint {})", x_list.join(" "));
    }
    let closed = match variant {
        TestOntVariant::Cons => n - 1,
        TestOntVariant::Incons => n,
    };
    if closed >= 1 {
        let _ = writeln!(text, "(disjoint C {})", x_list[..closed].join(" "));
    }
    let _ = writeln!(text, "(instance c C)");
    finish(text)
}

const CA_PROVINCES: [&str; 10] = [
    "Ontario",
    "Quebec",
    "NovaScotia",
    "NewBrunswick",
    "Manitoba",
    "BritishColumbia",
    "PrinceEdwardIsland",
    "Saskatchewan",
    "NewfoundlandAndLabrador",
    "Alberta",
];

/// Closed enumerations: a class equivalent to a fixed set of pairwise
/// disjoint nominals, plus `extra` further pairwise-distinct members
/// asserted into the class.
pub fn gen_members(extra: usize, family: MemberFamily) -> GeneratedOntology {
    let (class, base): (&str, Vec<String>) = match family {
        MemberFamily::CaProvinces => (
            "CA_Province",
            CA_PROVINCES.iter().map(|s| s.to_string()).collect(),
        ),
        MemberFamily::EuMembers => (
            "EU_Member",
            (1..=28).map(|i| format!("m{}", i)).collect(),
        ),
    };
    let mut text = String::new();
    let _ = writeln!(text, "; {:?} extra={}", family, extra);
    let _ = writeln!(text, "(equivalent {} (oneof {}))", class, base.join(" "));
    let mut all = base.clone();
    for i in 1..=extra {
        all.push(format!("p{}", i));
    }
    let _ = writeln!(text, "(disjoint {})", all.join(" "));
    for i in 1..=extra {
        let _ = writeln!(text, "(instance p{} {})", i, class);
    }
    finish(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn testont_metrics_match_expected_shape() {
        let g = gen_testont(10, TestOntVariant::Incons);
        let (_, _, individuals) = g.metrics();
        // Ten nominals plus the seed individual.
        assert_eq!(individuals, 11);
    }

    #[test]
    fn ca_provinces_base_has_ten_members() {
        let g = gen_members(0, MemberFamily::CaProvinces);
        assert_eq!(g.document.individuals.len(), 10);
        assert!(g.document.individuals.contains("Saskatchewan"));
    }

    #[test]
    fn eu_members_extra_adds_individuals() {
        let g = gen_members(1, MemberFamily::EuMembers);
        assert_eq!(g.document.individuals.len(), 29);
    }
}
