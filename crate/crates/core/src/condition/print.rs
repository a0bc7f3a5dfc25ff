use std::fmt;

use super::ConditionExpr;

const OR: u8 = 1;
const AND: u8 = 2;
const NOT: u8 = 3;

fn precedence(e: &ConditionExpr) -> u8 {
    match e {
        ConditionExpr::Or(..) => OR,
        ConditionExpr::And(..) => AND,
        ConditionExpr::Not(..) => NOT,
        _ => NOT + 1,
    }
}

fn write_at(e: &ConditionExpr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if precedence(e) < min {
        f.write_str("(")?;
        write_expr(e, f)?;
        f.write_str(")")
    } else {
        write_expr(e, f)
    }
}

fn write_expr(e: &ConditionExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        // right operands need strictly higher precedence to keep left associativity
        ConditionExpr::Or(l, r) => {
            write_at(l, OR, f)?;
            f.write_str(" OR ")?;
            write_at(r, AND, f)
        }
        ConditionExpr::And(l, r) => {
            write_at(l, AND, f)?;
            f.write_str(" AND ")?;
            write_at(r, NOT, f)
        }
        ConditionExpr::Not(inner) => {
            f.write_str("NOT ")?;
            write_at(inner, NOT, f)
        }
        ConditionExpr::Cmp { path, op, literal } => write!(f, "{path} {} {literal}", op.symbol()),
        ConditionExpr::Between { path, lo, hi } => write!(f, "{path} BETWEEN {lo} AND {hi}"),
        ConditionExpr::In { path, values } => {
            write!(f, "{path} IN {{")?;
            for (i, v) in values.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str("}")
        }
        ConditionExpr::Exists { path } => write!(f, "EXISTS {path}"),
        ConditionExpr::SchemaConforms { input_role, schema_id } => write!(f, "SCHEMA({input_role}, {schema_id})"),
        ConditionExpr::Attested { capability } => write!(f, "ATTESTED({capability})"),
    }
}

/// Prints canonical source text with the fewest parentheses that preserve the tree.
impl fmt::Display for ConditionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, f)
    }
}
