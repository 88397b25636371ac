use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{EvalError, Expr, ExprDisplay, Symbol, Tape};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("a vector field needs at least one state variable")]
    NoVariables,
    #[error("field has {vars} variables but {components} components")]
    ComponentCount { vars: usize, components: usize },
    #[error("duplicate identifier `{0}`")]
    DuplicateIdentifier(String),
    #[error("component {component} references {symbol:?}, which is not declared")]
    UndeclaredSymbol { component: usize, symbol: Symbol },
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
}

/// A state `x` together with parameter values `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl Point {
    pub fn new(x: Vec<f64>, alpha: Vec<f64>) -> Self {
        Point { x, alpha }
    }

    pub fn get(&self, s: Symbol) -> f64 {
        match s {
            Symbol::Var(i) => self.x[i],
            Symbol::Param(i) => self.alpha[i],
        }
    }

    pub fn set(&mut self, s: Symbol, v: f64) {
        match s {
            Symbol::Var(i) => self.x[i] = v,
            Symbol::Param(i) => self.alpha[i] = v,
        }
    }

    /// `x` followed by `alpha`.
    pub fn coords(&self) -> Vec<f64> {
        self.x.iter().chain(&self.alpha).copied().collect()
    }

    pub fn max_distance(&self, other: &Point) -> f64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A parameterized vector field `F: R^n x R^r -> R^n`.
#[derive(Debug, Clone)]
pub struct VectorField {
    name: String,
    var_names: Vec<String>,
    param_names: Vec<String>,
    components: Vec<Expr>,
}

impl VectorField {
    pub fn new(
        name: impl Into<String>,
        var_names: Vec<String>,
        param_names: Vec<String>,
        components: Vec<Expr>,
    ) -> Result<Self, FieldError> {
        if var_names.is_empty() {
            return Err(FieldError::NoVariables);
        }
        if components.len() != var_names.len() {
            return Err(FieldError::ComponentCount {
                vars: var_names.len(),
                components: components.len(),
            });
        }
        let mut seen = HashSet::new();
        for id in var_names.iter().chain(&param_names) {
            if !seen.insert(id.as_str()) {
                return Err(FieldError::DuplicateIdentifier(id.clone()));
            }
        }
        let n = var_names.len();
        let r = param_names.len();
        for (c, e) in components.iter().enumerate() {
            for i in n..64 {
                if e.depends_on(Symbol::Var(i)) {
                    return Err(FieldError::UndeclaredSymbol { component: c, symbol: Symbol::Var(i) });
                }
            }
            for i in r..64 {
                if e.depends_on(Symbol::Param(i)) {
                    return Err(FieldError::UndeclaredSymbol { component: c, symbol: Symbol::Param(i) });
                }
            }
        }
        Ok(VectorField {
            name: name.into(),
            var_names,
            param_names,
            components,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// State dimension `n`.
    pub fn dim(&self) -> usize {
        self.var_names.len()
    }

    /// Parameter count `r`.
    pub fn num_params(&self) -> usize {
        self.param_names.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn param_names(&self) -> &[String] {
        &self.param_names
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Expr {
        &self.components[i]
    }

    pub fn vars(&self) -> Vec<Symbol> {
        (0..self.dim()).map(Symbol::Var).collect()
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.param_names.iter().position(|p| p == name)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_names.iter().position(|p| p == name)
    }

    pub fn symbol_by_name(&self, name: &str) -> Option<Symbol> {
        self.var_index(name)
            .map(Symbol::Var)
            .or_else(|| self.param_index(name).map(Symbol::Param))
    }

    pub fn symbol_name(&self, s: Symbol) -> &str {
        match s {
            Symbol::Var(i) => &self.var_names[i],
            Symbol::Param(i) => &self.param_names[i],
        }
    }

    pub fn display<'a>(&'a self, e: &'a Expr) -> ExprDisplay<'a> {
        ExprDisplay::named(e, &self.var_names, &self.param_names)
    }

    /// Freeze the named parameters at constant values and drop them from the
    /// declaration. Remaining parameters keep their relative order.
    pub fn fix_params(&self, fixed: &[(String, f64)]) -> Result<VectorField, FieldError> {
        let mut values: Vec<Option<f64>> = vec![None; self.num_params()];
        for (name, v) in fixed {
            let i = self
                .param_index(name)
                .ok_or_else(|| FieldError::UnknownParameter(name.clone()))?;
            values[i] = Some(*v);
        }
        let mut remap = vec![0; self.num_params()];
        let mut names = Vec::new();
        for (i, v) in values.iter().enumerate() {
            if v.is_none() {
                remap[i] = names.len();
                names.push(self.param_names[i].clone());
            }
        }
        let components = self
            .components
            .iter()
            .map(|c| c.substitute_params(&values).remap_params(&remap))
            .collect();
        VectorField::new(self.name.clone(), self.var_names.clone(), names, components)
    }

    /// Move the named parameters to the front, in the given order.
    pub fn reorder_params(&self, front: &[String]) -> Result<VectorField, FieldError> {
        let mut order = Vec::new();
        for name in front {
            let i = self
                .param_index(name)
                .ok_or_else(|| FieldError::UnknownParameter(name.clone()))?;
            if order.contains(&i) {
                return Err(FieldError::DuplicateIdentifier(name.clone()));
            }
            order.push(i);
        }
        for i in 0..self.num_params() {
            if !order.contains(&i) {
                order.push(i);
            }
        }
        let mut remap = vec![0; self.num_params()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let names = order.iter().map(|&i| self.param_names[i].clone()).collect();
        let components = self.components.iter().map(|c| c.remap_params(&remap)).collect();
        VectorField::new(self.name.clone(), self.var_names.clone(), names, components)
    }

    /// Multiply component `j` by `c`.
    pub fn scale_component(&self, j: usize, c: f64) -> VectorField {
        let mut out = self.clone();
        out.components[j] = &out.components[j] * c;
        out
    }

    pub fn evaluate(&self, p: &Point) -> Result<Vec<f64>, EvalError> {
        Tape::compile(&self.components).eval_point(p)
    }

    /// Write the field in the line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("vars: {}\n", self.var_names.join(" ")));
        s.push_str(&format!("params: {}\n", self.param_names.join(" ")));
        for c in &self.components {
            s.push_str(&format!("eq: {}\n", self.display(c)));
        }
        s
    }
}
