//! Validated class declarations plus bound and superclass instantiation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::syntax::{ClassDecl, Pos, Program, TypeExpr};

pub const OBJECT: &str = "Object";
pub const NULL: &str = "Null";

/// Where in the program a diagnostic points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Site {
    pub class: String,
    pub context: String,
    pub pos: Pos,
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} of class {} at {}",
            self.context, self.class, self.pos
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TableError {
    #[error("class {name} is declared more than once (at {pos})")]
    DuplicateClass { name: String, pos: Pos },
    #[error("unknown class {name} in {site}")]
    UnknownClass { name: String, site: Site },
    #[error("class {name} expects {expected} type argument(s) but got {got}{}", fmt_site(.site))]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
        site: Option<Site>,
    },
    #[error("circular inheritance: {}", cycle_text(.0))]
    CircularInheritance(Vec<String>),
    #[error("unbound type variable {name} in {site}")]
    UnboundVariable { name: String, site: Site },
    #[error("duplicate type parameter {name} in {site}")]
    DuplicateParameter { name: String, site: Site },
    #[error("invalid superclass {found} in {site}: {reason}")]
    InvalidExtends {
        found: String,
        reason: &'static str,
        site: Site,
    },
    #[error("{0} has no superclass")]
    NoSuperclass(String),
    #[error("unknown class {0}")]
    NotDeclared(String),
}

fn fmt_site(site: &Option<Site>) -> String {
    site.as_ref()
        .map(|s| format!(" in {s}"))
        .unwrap_or_default()
}

fn cycle_text(cycle: &[String]) -> String {
    let mut parts: Vec<&str> = cycle.iter().map(String::as_str).collect();
    if let Some(first) = cycle.first() {
        parts.push(first);
    }
    parts.join(" -> ")
}

/// Declaration-time diagnostic that does not reject the program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Warning {
    pub class: String,
    pub param: String,
    pub pos: Pos,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: warning: {}", self.pos, self.message)
    }
}

/// A class after normalization: every bound and the superclass are explicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassInfo {
    pub name: String,
    pub params: Vec<String>,
    pub lowers: Vec<TypeExpr>,
    pub uppers: Vec<TypeExpr>,
    /// `None` only for the built-ins `Object` and `Null`.
    pub extends: Option<TypeExpr>,
    pub pos: Pos,
}

impl ClassInfo {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    fn builtin(name: &str) -> Self {
        ClassInfo {
            name: name.to_string(),
            params: Vec::new(),
            lowers: Vec::new(),
            uppers: Vec::new(),
            extends: None,
            pos: Pos::default(),
        }
    }
}

/// Immutable, validated class table. Always contains `Object` and `Null`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassTable {
    classes: BTreeMap<String, ClassInfo>,
    warnings: Vec<Warning>,
}

impl ClassTable {
    /// Validates `program` and normalizes missing bounds to `Null`/`Object`
    /// and missing superclasses to `Object`.
    pub fn build(program: &Program) -> Result<Self, TableError> {
        let mut classes = BTreeMap::new();
        classes.insert(OBJECT.to_string(), ClassInfo::builtin(OBJECT));
        classes.insert(NULL.to_string(), ClassInfo::builtin(NULL));

        // Sorted so that the first reported error doesn't depend on declaration order.
        let mut decls: Vec<&ClassDecl> = program.decls.iter().collect();
        decls.sort_by(|a, b| a.name.cmp(&b.name).then(a.pos.cmp(&b.pos)));

        for d in &decls {
            if classes.contains_key(&d.name) {
                return Err(TableError::DuplicateClass {
                    name: d.name.clone(),
                    pos: d.pos,
                });
            }
            let mut seen = BTreeSet::new();
            for p in &d.params {
                if !seen.insert(p.name.as_str()) {
                    return Err(TableError::DuplicateParameter {
                        name: p.name.clone(),
                        site: site(d, "parameter list"),
                    });
                }
            }
            classes.insert(
                d.name.clone(),
                ClassInfo {
                    name: d.name.clone(),
                    params: d.param_names(),
                    lowers: d
                        .params
                        .iter()
                        .map(|p| p.lower.clone().unwrap_or_else(TypeExpr::null))
                        .collect(),
                    uppers: d
                        .params
                        .iter()
                        .map(|p| p.upper.clone().unwrap_or_else(TypeExpr::object))
                        .collect(),
                    extends: Some(d.extends_clause.clone().unwrap_or_else(TypeExpr::object)),
                    pos: d.pos,
                },
            );
        }

        let table = ClassTable {
            classes,
            warnings: Vec::new(),
        };
        for d in &decls {
            let info = &table.classes[&d.name];
            for (i, p) in info.params.iter().enumerate() {
                let ctx = format!("bounds of {p}");
                table.check_well_formed(&info.lowers[i], &info.params, &site(d, &ctx))?;
                table.check_well_formed(&info.uppers[i], &info.params, &site(d, &ctx))?;
            }
            let sup = info
                .extends
                .as_ref()
                .expect("declared classes have a superclass");
            let sup_site = site(d, "extends clause");
            table.check_well_formed(sup, &info.params, &sup_site)?;
            match sup {
                TypeExpr::Var(v) => {
                    return Err(TableError::InvalidExtends {
                        found: v.clone(),
                        reason: "a type variable cannot be a superclass",
                        site: sup_site,
                    })
                }
                TypeExpr::App(head, _) if head == NULL => {
                    return Err(TableError::InvalidExtends {
                        found: NULL.to_string(),
                        reason: "Null cannot be extended",
                        site: sup_site,
                    })
                }
                _ => {}
            }
        }

        table.check_acyclic()?;

        let warnings = decls
            .iter()
            .flat_map(|d| useless_param_warnings(&table.classes[&d.name]))
            .collect();
        Ok(ClassTable { warnings, ..table })
    }

    pub fn get(&self, name: &str) -> Option<&ClassInfo> {
        self.classes.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.classes.contains_key(name)
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.get(name).map(ClassInfo::arity)
    }

    /// All classes, built-ins included, in name order.
    pub fn classes(&self) -> impl Iterator<Item = &ClassInfo> {
        self.classes.values()
    }

    /// User-declared classes in name order.
    pub fn declared(&self) -> impl Iterator<Item = &ClassInfo> {
        self.classes.values().filter(|c| c.extends.is_some())
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    fn info_with_arity(&self, name: &str, got: usize) -> Result<&ClassInfo, TableError> {
        let info = self
            .get(name)
            .ok_or_else(|| TableError::NotDeclared(name.to_string()))?;
        if info.arity() != got {
            return Err(TableError::ArityMismatch {
                name: name.to_string(),
                expected: info.arity(),
                got,
                site: None,
            });
        }
        Ok(info)
    }

    /// The declared superclass of `name<args>` with parameters substituted.
    pub fn superclass_of(&self, name: &str, args: &[TypeExpr]) -> Result<TypeExpr, TableError> {
        let info = self.info_with_arity(name, args.len())?;
        match &info.extends {
            Some(sup) => Ok(sup.substitute(&info.params, args)),
            None => Err(TableError::NoSuperclass(name.to_string())),
        }
    }

    /// Per-parameter `(lower, upper)` bounds of `name<args>`, with all
    /// parameters substituted simultaneously.
    pub fn bounds_of(
        &self,
        name: &str,
        args: &[TypeExpr],
    ) -> Result<Vec<(TypeExpr, TypeExpr)>, TableError> {
        let info = self.info_with_arity(name, args.len())?;
        Ok(info
            .lowers
            .iter()
            .zip(&info.uppers)
            .map(|(l, u)| {
                (
                    l.substitute(&info.params, args),
                    u.substitute(&info.params, args),
                )
            })
            .collect())
    }

    fn check_well_formed(
        &self,
        t: &TypeExpr,
        scope: &[String],
        site: &Site,
    ) -> Result<(), TableError> {
        match t {
            TypeExpr::Var(v) if scope.contains(v) => Ok(()),
            TypeExpr::Var(v) => Err(TableError::UnboundVariable {
                name: v.clone(),
                site: site.clone(),
            }),
            TypeExpr::App(name, args) => {
                let info = self.get(name).ok_or_else(|| TableError::UnknownClass {
                    name: name.clone(),
                    site: site.clone(),
                })?;
                if info.arity() != args.len() {
                    return Err(TableError::ArityMismatch {
                        name: name.clone(),
                        expected: info.arity(),
                        got: args.len(),
                        site: Some(site.clone()),
                    });
                }
                args.iter()
                    .try_for_each(|a| self.check_well_formed(a, scope, site))
            }
        }
    }

    fn check_acyclic(&self) -> Result<(), TableError> {
        let mut done: BTreeSet<&str> = BTreeSet::new();
        for start in self.declared() {
            let mut path: Vec<&str> = Vec::new();
            let mut cur = start.name.as_str();
            while !done.contains(cur) {
                if let Some(i) = path.iter().position(|n| *n == cur) {
                    return Err(TableError::CircularInheritance(
                        path[i..].iter().map(|s| s.to_string()).collect(),
                    ));
                }
                path.push(cur);
                match self.classes[cur].extends.as_ref().and_then(TypeExpr::head) {
                    Some(next) => cur = next,
                    None => break,
                }
            }
            done.extend(path);
        }
        Ok(())
    }
}

fn site(d: &ClassDecl, context: &str) -> Site {
    Site {
        class: d.name.clone(),
        context: context.to_string(),
        pos: d.pos,
    }
}

/// A parameter whose lower and upper bound are the same term, with the
/// parameter occurring strictly inside it, admits no argument: antisymmetry
/// would force `t` to equal a term properly containing `t`.
fn useless_param_warnings(info: &ClassInfo) -> Vec<Warning> {
    info.params
        .iter()
        .enumerate()
        .filter(|(i, p)| {
            let (l, u) = (&info.lowers[*i], &info.uppers[*i]);
            l == u && l.mentions_var(p) && *l != TypeExpr::Var(p.to_string())
        })
        .map(|(i, p)| Warning {
            class: info.name.clone(),
            param: p.clone(),
            pos: info.pos,
            message: format!(
                "useless declaration: no type argument can instantiate class {}, since {p} would have to equal {}",
                info.name, info.uppers[i]
            ),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_program, parse_type};

    const GENERICS: &str =
        "class C<T> {}\nclass D<T> extends C<T> {}\nclass E<T> extends D<T> {}\n\
                            class F<E<T> extends T extends C<T>> {}";

    fn table(src: &str) -> Result<ClassTable, TableError> {
        ClassTable::build(&parse_program(src).unwrap())
    }

    fn ty(s: &str) -> TypeExpr {
        parse_type(s).unwrap()
    }

    #[test]
    fn superclass_chain() {
        let t = table(GENERICS).unwrap();
        let x = vec![ty("X")];
        assert_eq!(t.superclass_of("E", &x).unwrap(), ty("D<X>"));
        assert_eq!(t.superclass_of("D", &x).unwrap(), ty("C<X>"));
        assert_eq!(t.superclass_of("C", &x).unwrap(), ty("Object"));
        assert_eq!(
            t.superclass_of("Object", &[]),
            Err(TableError::NoSuperclass("Object".into()))
        );
    }

    #[test]
    fn superclass_substitution() {
        let t = table("class C<T> {} class D<T> extends C<T> {}").unwrap();
        assert_eq!(
            t.superclass_of("D", &[ty("Color")]).unwrap(),
            ty("C<Color>")
        );
        let t =
            table("class Enum<T extends Enum<T>> {} class Color extends Enum<Color> {}").unwrap();
        assert_eq!(t.superclass_of("Color", &[]).unwrap(), ty("Enum<Color>"));
        assert!(matches!(
            t.superclass_of("Enum", &[]),
            Err(TableError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn bounds_examples() {
        let t = table("class Enum<T extends Enum<T>> {}").unwrap();
        assert_eq!(
            t.bounds_of("Enum", &[ty("Object")]).unwrap(),
            vec![(ty("Null"), ty("Enum<Object>"))]
        );
        let t = table(GENERICS).unwrap();
        assert_eq!(
            t.bounds_of("F", &[ty("X")]).unwrap(),
            vec![(ty("E<X>"), ty("C<X>"))]
        );
        assert_eq!(
            t.bounds_of("C", &[ty("X")]).unwrap(),
            vec![(ty("Null"), ty("Object"))]
        );
        assert_eq!(t.bounds_of("Object", &[]).unwrap(), vec![]);
    }

    #[test]
    fn multi_parameter_bounds_substitute_simultaneously() {
        let t = table("class P<A> {} class M<S extends P<U>, U extends P<S>> {}").unwrap();
        let b = t.bounds_of("M", &[ty("X"), ty("Y")]).unwrap();
        assert_eq!(b[0].1, ty("P<Y>"));
        assert_eq!(b[1].1, ty("P<X>"));
    }

    #[test]
    fn two_cycle_rejected() {
        let err = table("class A extends B {} class B extends A {}").unwrap_err();
        assert_eq!(
            err,
            TableError::CircularInheritance(vec!["A".into(), "B".into()])
        );
        let err = table("class B extends A {} class A extends B {}").unwrap_err();
        assert_eq!(
            err,
            TableError::CircularInheritance(vec!["A".into(), "B".into()])
        );
        assert!(matches!(
            table("class A extends A {}"),
            Err(TableError::CircularInheritance(_))
        ));
        assert!(matches!(
            table("class A<T> extends B<T> {} class B<T> extends A<C> {} class C {}"),
            Err(TableError::CircularInheritance(_))
        ));
    }

    #[test]
    fn self_referential_bound_is_legal() {
        let t = table("class Enum<T extends Enum<T>> {}").unwrap();
        assert_eq!(
            t.get("Enum").unwrap().uppers[0],
            TypeExpr::app("Enum", vec![TypeExpr::var("T")])
        );
        assert!(t.warnings().is_empty());
    }

    #[test]
    fn error_cases() {
        assert!(matches!(
            table("class A {} class A {}"),
            Err(TableError::DuplicateClass { .. })
        ));
        assert!(matches!(
            table("class Object {}"),
            Err(TableError::DuplicateClass { .. })
        ));
        assert!(matches!(
            table("class A extends B {}"),
            Err(TableError::UnknownClass { .. })
        ));
        assert!(matches!(
            table("class A<T extends Q> {}"),
            Err(TableError::UnknownClass { .. })
        ));
        assert!(matches!(
            table("class C<T> {} class A<T extends C> {}"),
            Err(TableError::ArityMismatch {
                expected: 1,
                got: 0,
                ..
            })
        ));
        assert!(matches!(
            table("class A<T> extends T {}"),
            Err(TableError::InvalidExtends { .. })
        ));
        assert!(matches!(
            table("class A extends Null {}"),
            Err(TableError::InvalidExtends { .. })
        ));
    }

    #[test]
    fn hand_built_unbound_variable() {
        let mut p = parse_program("class C<T> {} class A<T extends C<T>> {}").unwrap();
        p.decls[1].params[0].upper = Some(TypeExpr::app("C", vec![TypeExpr::var("U")]));
        assert!(matches!(
            ClassTable::build(&p),
            Err(TableError::UnboundVariable { .. })
        ));
    }

    #[test]
    fn useless_declaration_warns() {
        let t = table("class Fx<Fx<T> extends T extends Fx<T>> {}").unwrap();
        assert_eq!(t.warnings().len(), 1);
        assert_eq!(t.warnings()[0].class, "Fx");
        // identical bounds that do not mention the parameter are satisfiable
        let t = table("class A<T extends B super B> {} class B {}").unwrap();
        assert!(t.warnings().is_empty());
    }

    #[test]
    fn order_insensitive() {
        let a =
            table("class C<T> {} class D<T> extends C<T> {} class E<T> extends D<T> {}").unwrap();
        let b =
            table("class E<T> extends D<T> {} class C<T> {} class D<T> extends C<T> {}").unwrap();
        let names = |t: &ClassTable| {
            t.classes()
                .map(|c| (c.name.clone(), c.params.clone(), c.extends.clone()))
                .collect::<Vec<_>>()
        };
        assert_eq!(names(&a), names(&b));
    }
}
