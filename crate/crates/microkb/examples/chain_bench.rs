use std::time::Instant;
use microkb::kb::{KnowledgeBase, Provenance, BASE_MT};
use microkb::clause::Strength;
use microkb::parser::parse_formula;
use microkb::symbol::Symbol;

fn main() {
    let mut kb = KnowledgeBase::new();
    let base = Symbol::new(BASE_MT);
    let pred = Symbol::new("locIn");
    kb.declare_transitive(&pred).unwrap();
    let t0 = Instant::now();
    for i in 0..10_000u32 {
        let f = parse_formula(&format!("(locIn N{} N{})", i, i + 1)).unwrap();
        kb.assert_formula(&f, &base, Strength::Default, Provenance::new("", 0)).unwrap();
    }
    println!("load: {:?}", t0.elapsed());
    let t1 = Instant::now();
    let path = kb.transitive_path(&pred, &base, &Symbol::new("N0"), &Symbol::new("N10000"));
    println!("query: {:?}, path len {:?}", t1.elapsed(), path.map(|p| p.len()));
}
