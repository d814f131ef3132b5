use mapcheck::{parse_litmus, AnyTest};
use proptest::prelude::*;

#[derive(Clone, Debug)]
enum Op {
    Load(usize, &'static str),
    Store(usize, &'static str),
}

const LOCS: [&str; 3] = ["x", "y", "z"];

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (
            0..3usize,
            prop::sample::select(vec!["relaxed", "acquire", "seq_cst"])
        )
            .prop_map(|(l, o)| Op::Load(l, o)),
        (
            0..3usize,
            prop::sample::select(vec!["relaxed", "release", "seq_cst"])
        )
            .prop_map(|(l, o)| Op::Store(l, o)),
    ]
}

/// Builds a well-formed test: fresh registers, distinct store values, and an
/// outcome naming every register.
fn program(threads: Vec<Vec<Op>>) -> Option<String> {
    let mut text = String::from("c11 test gen\ninit x=0 y=0 z=0\n");
    let (mut reg, mut val) = (0, 0);
    let mut terms = vec![];
    for (t, ops) in threads.iter().enumerate() {
        text.push_str(&format!("thread {t} {{\n"));
        for op in ops {
            match op {
                Op::Load(l, o) => {
                    reg += 1;
                    text.push_str(&format!("  r{reg} = load({}, {o});\n", LOCS[*l]));
                    terms.push(format!("r{reg}=0"));
                }
                Op::Store(l, o) => {
                    val += 1;
                    text.push_str(&format!("  store({}, {val}, {o})\n", LOCS[*l]));
                }
            }
        }
        text.push_str("}\n");
    }
    if terms.is_empty() {
        return None;
    }
    text.push_str(&format!("forbidden {}\n", terms.join(" /\\ ")));
    Some(text)
}

proptest! {
    #[test]
    fn render_then_parse_is_identity(threads in prop::collection::vec(prop::collection::vec(op(), 1..4), 1..4)) {
        let Some(text) = program(threads) else { return Ok(()) };
        let parsed = parse_litmus(&text).unwrap();
        let AnyTest::C11(t) = &parsed else { panic!() };
        let rendered = t.to_string();
        let again = parse_litmus(&rendered).unwrap();
        prop_assert_eq!(&again, &parsed);
        prop_assert_eq!(again.to_string(), rendered);
    }

    #[test]
    fn parser_never_panics(s in "[a-z0-9 =(){},;/\\\\\n]{0,80}") {
        let _ = parse_litmus(&s);
    }
}
