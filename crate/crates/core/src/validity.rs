//! Admittable versus valid type arguments.
//!
//! A type argument is *admittable* when it is a well-formed ground type of
//! the right count; bounds play no part. It is *valid* when it additionally
//! sits between its instantiated lower and upper bound. The bound
//! instantiations themselves are only ever compared by subtyping: inside a
//! bound, every admittable argument counts as valid, so checking `Enum<T>`
//! against `T extends Enum<T>` never recurses into checking the bound
//! `Enum<T>` again.

use std::fmt;

use serde::Serialize;

use crate::classtable::ClassTable;
use crate::subtyping::{is_subtype, well_formed_ground, GroundType};
use crate::syntax::TypeExpr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidityError {
    #[error("unknown class {0}")]
    UnknownClass(String),
    #[error("not admittable: {0}")]
    NotAdmittable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Valid,
    Invalid,
    /// Well-formed, accepted without a bound check (bound-declaration context).
    Admittable,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Valid => "valid",
            Status::Invalid => "invalid",
            Status::Admittable => "admittable",
        })
    }
}

/// Where a type is being checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Context {
    /// Any position except a type-parameter bound: bounds are enforced.
    Ordinary,
    /// Inside the bound of a type parameter: admittable means valid.
    BoundDeclaration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

/// One subtype query issued while checking the arguments of `owner`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubtypeQuery {
    /// The application whose arguments were being checked.
    pub owner: GroundType,
    pub param: String,
    pub side: Side,
    pub sub: GroundType,
    pub sup: GroundType,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub reasons: Vec<String>,
    pub query_log: Vec<SubtypeQuery>,
}

impl Verdict {
    fn from_parts(reasons: Vec<String>, query_log: Vec<SubtypeQuery>) -> Self {
        let status = if reasons.is_empty() {
            Status::Valid
        } else {
            Status::Invalid
        };
        Verdict {
            status,
            reasons,
            query_log,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.status == Status::Valid
    }

    /// The applications whose arguments were bound-checked, in order.
    pub fn checked_owners(&self) -> Vec<&GroundType> {
        let mut out: Vec<&GroundType> = Vec::new();
        for q in &self.query_log {
            if out.last() != Some(&&q.owner) {
                out.push(&q.owner);
            }
        }
        out
    }
}

/// Well-formed ground arguments of the right count; bounds are ignored.
pub fn is_admittable(
    table: &ClassTable,
    class_name: &str,
    args: &[TypeExpr],
) -> Result<bool, ValidityError> {
    let arity = table
        .arity(class_name)
        .ok_or_else(|| ValidityError::UnknownClass(class_name.to_string()))?;
    Ok(arity == args.len() && args.iter().all(|a| well_formed_ground(table, a).is_ok()))
}

fn admittability_detail(table: &ClassTable, class_name: &str, args: &[TypeExpr]) -> String {
    let arity = table.arity(class_name).unwrap_or(0);
    if arity != args.len() {
        return format!(
            "class {class_name} expects {arity} type argument(s) but got {}",
            args.len()
        );
    }
    args.iter()
        .find_map(|a| well_formed_ground(table, a).err())
        .unwrap_or_else(|| "ill-formed argument".to_string())
}

/// Checks each argument of `class_name<args>` against its instantiated
/// bounds: `lower[i] <: args[i]` and `args[i] <: upper[i]`.
///
/// All parameters are checked; every failure is reported. The bound
/// instantiations are not validated themselves.
pub fn is_valid_argument(
    table: &ClassTable,
    class_name: &str,
    args: &[TypeExpr],
) -> Result<Verdict, ValidityError> {
    let mut reasons = Vec::new();
    let mut log = Vec::new();
    check_arguments(table, class_name, args, &mut reasons, &mut log)?;
    Ok(Verdict::from_parts(reasons, log))
}

fn check_arguments(
    table: &ClassTable,
    class_name: &str,
    args: &[TypeExpr],
    reasons: &mut Vec<String>,
    log: &mut Vec<SubtypeQuery>,
) -> Result<(), ValidityError> {
    if !is_admittable(table, class_name, args)? {
        return Err(ValidityError::NotAdmittable(admittability_detail(
            table, class_name, args,
        )));
    }
    let info = table.get(class_name).expect("admittable implies declared");
    let owner = GroundType::trusted(TypeExpr::App(class_name.to_string(), args.to_vec()));
    let bounds = table
        .bounds_of(class_name, args)
        .expect("admittable implies arity match");

    for ((param, arg), (lower, upper)) in info.params.iter().zip(args).zip(bounds) {
        let arg = GroundType::trusted(arg.clone());
        let lower = GroundType::trusted(lower);
        let upper = GroundType::trusted(upper);

        let lower_ok = is_subtype(table, &lower, &arg);
        log.push(SubtypeQuery {
            owner: owner.clone(),
            param: param.clone(),
            side: Side::Lower,
            sub: lower.clone(),
            sup: arg.clone(),
            holds: lower_ok,
        });
        if !lower_ok {
            reasons.push(format!(
                "{lower} is not a subtype of {arg} (lower bound of {param} in {owner})"
            ));
        }

        let upper_ok = is_subtype(table, &arg, &upper);
        log.push(SubtypeQuery {
            owner: owner.clone(),
            param: param.clone(),
            side: Side::Upper,
            sub: arg.clone(),
            sup: upper.clone(),
            holds: upper_ok,
        });
        if !upper_ok {
            reasons.push(format!(
                "{arg} is not a subtype of {upper} (upper bound of {param} in {owner})"
            ));
        }
    }
    Ok(())
}

/// Validates a ground type in an ordinary context: the arguments of every
/// application in `t`, outermost first, are checked against their bounds.
pub fn check_type(table: &ClassTable, t: &TypeExpr) -> Result<Verdict, ValidityError> {
    check_type_in(table, t, Context::Ordinary)
}

pub fn check_type_in(
    table: &ClassTable,
    t: &TypeExpr,
    context: Context,
) -> Result<Verdict, ValidityError> {
    let TypeExpr::App(head, args) = t else {
        return Err(ValidityError::NotAdmittable(format!(
            "type variable {t} in a ground position"
        )));
    };
    if !table.contains(head) {
        return Err(ValidityError::UnknownClass(head.clone()));
    }
    if !is_admittable(table, head, args)? {
        return Err(ValidityError::NotAdmittable(admittability_detail(
            table, head, args,
        )));
    }
    if context == Context::BoundDeclaration {
        return Ok(Verdict {
            status: Status::Admittable,
            reasons: Vec::new(),
            query_log: Vec::new(),
        });
    }

    let mut reasons = Vec::new();
    let mut log = Vec::new();
    let mut result = Ok(());
    t.for_each_app(&mut |name, args| {
        if result.is_ok() {
            result = check_arguments(table, name, args, &mut reasons, &mut log);
        }
    });
    result?;
    Ok(Verdict::from_parts(reasons, log))
}
