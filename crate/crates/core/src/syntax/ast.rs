use std::fmt;

use serde::Serialize;

/// Line/column position in source text, both 1-based.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A type term: a type variable, or a class applied to arguments.
///
/// Non-generic classes (including the built-ins `Null` and `Object`) are
/// applications with an empty argument list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeExpr {
    Var(String),
    App(String, Vec<TypeExpr>),
}

impl TypeExpr {
    pub fn var(name: impl Into<String>) -> Self {
        TypeExpr::Var(name.into())
    }

    pub fn app(name: impl Into<String>, args: Vec<TypeExpr>) -> Self {
        TypeExpr::App(name.into(), args)
    }

    /// Nullary class reference.
    pub fn class(name: impl Into<String>) -> Self {
        TypeExpr::App(name.into(), Vec::new())
    }

    pub fn object() -> Self {
        Self::class("Object")
    }

    pub fn null() -> Self {
        Self::class("Null")
    }

    pub fn head(&self) -> Option<&str> {
        match self {
            TypeExpr::App(name, _) => Some(name),
            TypeExpr::Var(_) => None,
        }
    }

    pub fn args(&self) -> &[TypeExpr] {
        match self {
            TypeExpr::App(_, args) => args,
            TypeExpr::Var(_) => &[],
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            TypeExpr::Var(_) => false,
            TypeExpr::App(_, args) => args.iter().all(TypeExpr::is_ground),
        }
    }

    /// Nesting depth: 0 for variables and nullary applications.
    pub fn depth(&self) -> usize {
        match self {
            TypeExpr::Var(_) => 0,
            TypeExpr::App(_, args) => args.iter().map(|a| 1 + a.depth()).max().unwrap_or(0),
        }
    }

    /// Number of `App` nodes in the term.
    pub fn app_count(&self) -> usize {
        match self {
            TypeExpr::Var(_) => 0,
            TypeExpr::App(_, args) => 1 + args.iter().map(TypeExpr::app_count).sum::<usize>(),
        }
    }

    pub fn mentions_var(&self, name: &str) -> bool {
        match self {
            TypeExpr::Var(v) => v == name,
            TypeExpr::App(_, args) => args.iter().any(|a| a.mentions_var(name)),
        }
    }

    /// True if `other` occurs somewhere inside `self` (including `self` itself).
    pub fn contains(&self, other: &TypeExpr) -> bool {
        self == other || self.args().iter().any(|a| a.contains(other))
    }

    /// Simultaneous substitution of `params[i]` by `args[i]`.
    ///
    /// Variables not listed in `params` are left untouched.
    pub fn substitute(&self, params: &[String], args: &[TypeExpr]) -> TypeExpr {
        debug_assert_eq!(params.len(), args.len());
        match self {
            TypeExpr::Var(v) => match params.iter().position(|p| p == v) {
                Some(i) => args[i].clone(),
                None => self.clone(),
            },
            TypeExpr::App(name, inner) => TypeExpr::App(
                name.clone(),
                inner.iter().map(|a| a.substitute(params, args)).collect(),
            ),
        }
    }

    /// Visits every variable name in left-to-right order.
    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            TypeExpr::Var(v) => f(v),
            TypeExpr::App(_, args) => args.iter().for_each(|a| a.for_each_var(f)),
        }
    }

    /// Visits every `App` node, outermost first.
    pub fn for_each_app<'a>(&'a self, f: &mut impl FnMut(&'a str, &'a [TypeExpr])) {
        if let TypeExpr::App(name, args) = self {
            f(name, args);
            args.iter().for_each(|a| a.for_each_app(f));
        }
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Var(v) => f.write_str(v),
            TypeExpr::App(name, args) => {
                f.write_str(name)?;
                if !args.is_empty() {
                    f.write_str("<")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(">")?;
                }
                Ok(())
            }
        }
    }
}

impl Serialize for TypeExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Canonical text of a type term.
pub fn render(t: &TypeExpr) -> String {
    t.to_string()
}

/// One type parameter with its optional bounds. Absent bounds mean `Null`
/// (lower) and `Object` (upper); the class table fills them in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeParamDecl {
    pub name: String,
    pub lower: Option<TypeExpr>,
    pub upper: Option<TypeExpr>,
}

impl TypeParamDecl {
    pub fn unbounded(name: impl Into<String>) -> Self {
        TypeParamDecl {
            name: name.into(),
            lower: None,
            upper: None,
        }
    }
}

impl fmt::Display for TypeParamDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if let Some(upper) = &self.upper {
            write!(f, " extends {upper}")?;
        }
        if let Some(lower) = &self.lower {
            write!(f, " super {lower}")?;
        }
        Ok(())
    }
}

/// `class Name<params> extends Super {}`
///
/// Equality is structural: the source position is ignored.
#[derive(Debug, Clone)]
pub struct ClassDecl {
    pub name: String,
    pub params: Vec<TypeParamDecl>,
    pub extends_clause: Option<TypeExpr>,
    pub pos: Pos,
}

impl PartialEq for ClassDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.params == other.params
            && self.extends_clause == other.extends_clause
    }
}

impl Eq for ClassDecl {}

impl ClassDecl {
    pub fn param_names(&self) -> Vec<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }
}

impl fmt::Display for ClassDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "class {}", self.name)?;
        if !self.params.is_empty() {
            f.write_str("<")?;
            for (i, p) in self.params.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{p}")?;
            }
            f.write_str(">")?;
        }
        if let Some(sup) = &self.extends_clause {
            write!(f, " extends {sup}")?;
        }
        f.write_str(" {}")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    pub decls: Vec<ClassDecl>,
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.decls {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}
