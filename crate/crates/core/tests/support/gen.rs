//! Proptest strategies for condition trees and literal values.
#![allow(dead_code)]

use aku_core::condition::{CmpOp, Path};
use aku_core::{ConditionExpr, SlotValue, UnitId};
use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use rust_decimal::Decimal;

pub fn token() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z][a-z0-9_]{0,6}",
        "[A-Z][A-Za-z0-9_]{0,4}".prop_filter("not a keyword", |s| !aku_core::condition::KEYWORDS.contains(&s.as_str())),
    ]
}

pub fn path() -> impl Strategy<Value = Path> {
    let subject = prop_oneof![
        token(),
        "ex:[a-z][a-z0-9-]{0,6}",
        (token(), token()).prop_map(|(a, b)| format!("{a}.{b}")),
    ];
    (subject, "[a-z][a-z0-9_:]{0,8}").prop_map(|(s, a)| Path::new(&s, &a).expect("generated path is valid"))
}

pub fn unit_token() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("1".to_string()),
        Just("pct".to_string()),
        Just("psu".to_string()),
        "[A-Za-z][A-Za-z0-9_]{0,5}".prop_filter("not a keyword", |s| !aku_core::condition::KEYWORDS.contains(&s.as_str())),
    ]
}

pub fn decimal() -> impl Strategy<Value = Decimal> {
    (-1_000_000_i64..1_000_000, 0u32..5).prop_map(|(m, s)| Decimal::new(m, s))
}

pub fn timestamp() -> impl Strategy<Value = chrono::DateTime<Utc>> {
    (0i64..4_000_000_000, prop_oneof![Just(0u32), 0u32..1_000_000_000])
        .prop_map(|(secs, nanos)| Utc.timestamp_opt(secs, nanos).single().expect("in range"))
}

pub fn literal() -> impl Strategy<Value = SlotValue> {
    prop_oneof![
        (decimal(), unit_token()).prop_map(|(m, u)| SlotValue::Number { magnitude: m, unit: u }),
        "[ -~\n]{0,12}".prop_map(SlotValue::Text),
        any::<bool>().prop_map(SlotValue::Boolean),
        "ex:[A-Za-z][A-Za-z0-9_.:-]{0,8}".prop_map(|s| SlotValue::Ref(UnitId::new(s).expect("valid id"))),
        timestamp().prop_map(SlotValue::Timestamp),
    ]
}

pub fn cmp_op() -> impl Strategy<Value = CmpOp> {
    prop_oneof![
        Just(CmpOp::Lt),
        Just(CmpOp::Le),
        Just(CmpOp::Gt),
        Just(CmpOp::Ge),
        Just(CmpOp::Eq),
        Just(CmpOp::Ne),
    ]
}

fn between() -> impl Strategy<Value = ConditionExpr> {
    let numbers = (path(), decimal(), decimal(), unit_token()).prop_map(|(path, a, b, u)| {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        ConditionExpr::Between {
            path,
            lo: SlotValue::Number { magnitude: lo, unit: u.clone() },
            hi: SlotValue::Number { magnitude: hi, unit: u },
        }
    });
    let times = (path(), timestamp(), timestamp()).prop_map(|(path, a, b)| ConditionExpr::Between {
        path,
        lo: SlotValue::Timestamp(a.min(b)),
        hi: SlotValue::Timestamp(a.max(b)),
    });
    prop_oneof![numbers, times]
}

pub fn clause() -> impl Strategy<Value = ConditionExpr> {
    prop_oneof![
        (path(), cmp_op(), literal()).prop_map(|(path, op, literal)| ConditionExpr::Cmp { path, op, literal }),
        between(),
        (path(), prop::collection::vec(literal(), 1..4)).prop_map(|(path, values)| ConditionExpr::In { path, values }),
        path().prop_map(|path| ConditionExpr::Exists { path }),
        (token(), "ex:[a-z][a-z0-9-]{0,6}").prop_map(|(input_role, s)| ConditionExpr::SchemaConforms {
            input_role,
            schema_id: UnitId::new(s).expect("valid id"),
        }),
        token().prop_map(|capability| ConditionExpr::Attested { capability }),
    ]
}

pub fn expr() -> impl Strategy<Value = ConditionExpr> {
    clause().prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| ConditionExpr::and(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| ConditionExpr::or(l, r)),
            inner.prop_map(ConditionExpr::negate),
        ]
    })
}
