use std::collections::BTreeSet;

use csx_core::assets::{DEFAULT_SCHEMA, SAMPLE_SCRIPT};
use csx_core::schema::yaml::path_segment;
use csx_core::schema::{
    load_schema, parse_component, parse_component_at, parse_document, DocValue, IssueCode, Schema, SchemaDocument,
};
use indexmap::IndexMap;
use proptest::prelude::*;

fn schema() -> SchemaDocument {
    load_schema(DEFAULT_SCHEMA).unwrap()
}

fn network(text: &str) -> DocValue {
    parse_document(text).unwrap().get("GlobalDatacenterNetwork").unwrap().clone()
}

/// Reference checker: collects (path, code) for every violation, walking an
/// explicit work list instead of recursing.
fn oracle(value: &DocValue, root: &str, doc: &SchemaDocument) -> BTreeSet<(String, IssueCode)> {
    let mut issues = BTreeSet::new();
    let mut work: Vec<(&DocValue, Schema, String)> = vec![(value, Schema::Ref(root.into()), String::new())];
    while let Some((v, s, path)) = work.pop() {
        let s = match s {
            Schema::Ref(name) => match doc.get(&name) {
                Some(t) => t.clone(),
                None => {
                    issues.insert((path, IssueCode::UnresolvedRef));
                    continue;
                }
            },
            other => other,
        };
        let ok = match (&s, v) {
            (Schema::String, DocValue::Str(_)) => true,
            (Schema::Integer, DocValue::Int(_)) => true,
            (Schema::Integer, DocValue::Float(f)) => f.fract() == 0.0,
            (Schema::Number, DocValue::Int(_) | DocValue::Float(_)) => true,
            (Schema::Boolean, DocValue::Bool(_)) => true,
            (Schema::Array(items), DocValue::Seq(vs)) => {
                for (i, x) in vs.iter().enumerate() {
                    work.push((x, (**items).clone(), format!("{path}/{i}")));
                }
                true
            }
            (
                Schema::Object {
                    properties,
                    required,
                    additional,
                },
                DocValue::Map(m),
            ) => {
                for (k, x) in m {
                    if *x == DocValue::Null {
                        continue;
                    }
                    let p = format!("{path}/{}", path_segment(k));
                    match properties.get(k).cloned().or_else(|| additional.as_deref().cloned()) {
                        Some(child) => work.push((x, child, p)),
                        None => {
                            issues.insert((p, IssueCode::UnknownField));
                        }
                    }
                }
                for r in required {
                    if matches!(m.get(r), None | Some(DocValue::Null)) {
                        issues.insert((format!("{path}/{}", path_segment(r)), IssueCode::MissingRequired));
                    }
                }
                true
            }
            _ => false,
        };
        if !ok {
            issues.insert((path, IssueCode::TypeMismatch));
        }
    }
    issues
}

fn library(value: &DocValue, root: &str, doc: &SchemaDocument) -> BTreeSet<(String, IssueCode)> {
    match parse_component(value, root, doc) {
        Ok(_) => BTreeSet::new(),
        Err(issues) => issues.into_iter().map(|i| (i.path, i.code)).collect(),
    }
}

#[derive(Debug, Clone)]
enum Mutation {
    Remove,
    ToString,
    ToBool,
    ToList,
    AddUnknown,
}

fn count_nodes(v: &DocValue) -> usize {
    1 + match v {
        DocValue::Seq(items) => items.iter().map(count_nodes).sum(),
        DocValue::Map(m) => m.values().map(count_nodes).sum(),
        _ => 0,
    }
}

/// Applies `m` to the `target`-th node (pre-order) below the root.
fn mutate(v: &mut DocValue, target: &mut usize, m: &Mutation) -> bool {
    let children: Vec<&mut DocValue> = match v {
        DocValue::Seq(items) => items.iter_mut().collect(),
        DocValue::Map(map) => {
            if *target < map.len() && matches!(m, Mutation::Remove) {
                let key = map.get_index(*target).unwrap().0.clone();
                map.shift_remove(&key);
                return true;
            }
            map.values_mut().collect()
        }
        _ => Vec::new(),
    };
    for child in children {
        if *target == 0 {
            match m {
                Mutation::Remove => return false,
                Mutation::ToString => *child = DocValue::Str("x".into()),
                Mutation::ToBool => *child = DocValue::Bool(true),
                Mutation::ToList => *child = DocValue::Seq(vec![]),
                Mutation::AddUnknown => match child {
                    DocValue::Map(cm) => {
                        cm.insert("bogusField".into(), DocValue::Int(1));
                    }
                    other => *other = DocValue::Map(IndexMap::new()),
                },
            }
            return true;
        }
        *target -= 1;
        if mutate(child, target, m) {
            return true;
        }
    }
    false
}

fn mutation() -> impl Strategy<Value = Mutation> {
    prop_oneof![
        Just(Mutation::Remove),
        Just(Mutation::ToString),
        Just(Mutation::ToBool),
        Just(Mutation::ToList),
        Just(Mutation::AddUnknown),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn validator_agrees_with_reference(edits in prop::collection::vec((any::<usize>(), mutation()), 0..4)) {
        let doc = schema();
        let mut value = network(SAMPLE_SCRIPT);
        for (seed, m) in &edits {
            let mut target = seed % count_nodes(&value);
            mutate(&mut value, &mut target, m);
        }
        let expected = oracle(&value, "GlobalDatacenterNetwork", &doc);
        let got = library(&value, "GlobalDatacenterNetwork", &doc);
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn accepted_nodes_round_trip(edits in prop::collection::vec((any::<usize>(), mutation()), 0..3)) {
        let doc = schema();
        let mut value = network(SAMPLE_SCRIPT);
        for (seed, m) in &edits {
            let mut target = seed % count_nodes(&value);
            mutate(&mut value, &mut target, m);
        }
        if let Ok(node) = parse_component(&value, "GlobalDatacenterNetwork", &doc) {
            let text = node.to_doc().to_document();
            let again = parse_component(&parse_document(&text).unwrap(), "GlobalDatacenterNetwork", &doc).unwrap();
            prop_assert_eq!(again, node);
        }
    }
}

#[test]
fn sample_script_is_valid() {
    assert!(parse_component(&network(SAMPLE_SCRIPT), "GlobalDatacenterNetwork", &schema()).is_ok());
}

#[test]
fn aliases_validate_like_inline_copies() {
    let aliased = "\
C: &C {arch: x86, os: Linux}
H: &H {id: 0, pes: 2, mips: 100, ramMb: 1, bwMbps: 1, storageMb: 1}
GlobalDatacenterNetwork:
  zones:
    - name: a
      datacenter:
        characteristics: *C
        hosts: [*H, {<<: *H, id: 5}]
";
    let inline = "\
GlobalDatacenterNetwork:
  zones:
    - name: a
      datacenter:
        characteristics: {arch: x86, os: Linux}
        hosts:
          - {id: 0, pes: 2, mips: 100, ramMb: 1, bwMbps: 1, storageMb: 1}
          - {id: 5, pes: 2, mips: 100, ramMb: 1, bwMbps: 1, storageMb: 1}
";
    let doc = schema();
    let a = parse_component(&network(aliased), "GlobalDatacenterNetwork", &doc).unwrap();
    let b = parse_component(&network(inline), "GlobalDatacenterNetwork", &doc).unwrap();
    assert_eq!(a.to_doc().to_document(), b.to_doc().to_document());
}

#[test]
fn independent_mistakes_reported_once_each() {
    let text = "\
GlobalDatacenterNetwork:
  zones:
    - name: 7
      datacenter:
        characteristics: {arch: x86, colour: red}
        hosts:
          - {id: 0, pes: two, mips: 100, ramMb: 1, bwMbps: 1}
";
    let issues = parse_component(&network(text), "GlobalDatacenterNetwork", &schema()).unwrap_err();
    let got: BTreeSet<_> = issues.iter().map(|i| (i.path.as_str(), i.code)).collect();
    let want = BTreeSet::from([
        ("/zones/0/name", IssueCode::TypeMismatch),
        ("/zones/0/datacenter/characteristics/colour", IssueCode::UnknownField),
        ("/zones/0/datacenter/hosts/0/pes", IssueCode::TypeMismatch),
        ("/zones/0/datacenter/hosts/0/storageMb", IssueCode::MissingRequired),
    ]);
    assert_eq!(issues.len(), 4);
    assert_eq!(got, want);
}

#[test]
fn mismatched_object_not_descended() {
    let text = "GlobalDatacenterNetwork:\n  zones:\n    - name: a\n      datacenter: [1, 2]\n";
    let issues = parse_component(&network(text), "GlobalDatacenterNetwork", &schema()).unwrap_err();
    assert_eq!(issues.len(), 1);
    assert_eq!(issues[0].path, "/zones/0/datacenter");
    assert_eq!(issues[0].code, IssueCode::TypeMismatch);
}

#[test]
fn base_path_prefixes_issues() {
    let issues = parse_component_at(&DocValue::Map(IndexMap::new()), "Broker", &schema(), "/x").unwrap_err();
    assert_eq!(issues[0].path, "/x/name");
}

#[test]
fn null_field_counts_as_absent() {
    let text = "GlobalDatacenterNetwork:\n  zones:\n    - name: a\n      broker:\n      datacenter: {characteristics: {}, hosts: []}\n";
    let node = parse_component(&network(text), "GlobalDatacenterNetwork", &schema()).unwrap();
    let zone = node.list("zones")[0].as_node().unwrap();
    assert!(zone.get("broker").is_none());
}

#[test]
fn integers_widen_to_numbers_but_not_back() {
    let doc = schema();
    let host = |mips: &str, pes: &str| {
        parse_document(&format!(
            "{{id: 0, pes: {pes}, mips: {mips}, ramMb: 1, bwMbps: 1, storageMb: 1}}"
        ))
        .unwrap()
    };
    assert!(parse_component(&host("1000", "2"), "Host", &doc).is_ok());
    assert!(parse_component(&host("1000.5", "2.0"), "Host", &doc).is_ok());
    let issues = parse_component(&host("1000", "2.5"), "Host", &doc).unwrap_err();
    assert_eq!(issues[0].path, "/pes");
}

#[test]
fn extension_properties_are_string_maps() {
    let doc = schema();
    let ok = parse_document("{className: a.B, extensionProperties: {k: v}}").unwrap();
    let node = parse_component(&ok, "Extension", &doc).unwrap();
    assert_eq!(node.map("extensionProperties").unwrap().len(), 1);
    let bad = parse_document("{className: a.B, extensionProperties: {k: [1]}}").unwrap();
    let issues = parse_component(&bad, "Extension", &doc).unwrap_err();
    assert_eq!(issues[0].path, "/extensionProperties/k");
}
