//! Primitive operations, used only when no program clause matches a call.

use num_integer::Integer;
use num_traits::Zero;

use crate::error::EvalError;
use crate::syntax::Value;

pub const BUILTINS: &[&str] = &["+", "-", "*", "<", "<=", "==", "mod", "div"];

pub fn is_builtin(name: &str, arity: usize) -> bool {
    arity == 2 && BUILTINS.contains(&name)
}

fn type_error(name: &str, args: &[Value]) -> EvalError {
    EvalError::TypeError {
        op: name.to_string(),
        args: args
            .iter()
            .map(|a| format!("{a} : {}", a.kind()))
            .collect::<Vec<_>>()
            .join(", "),
    }
}

/// Apply builtin `name`. Returns `None` when no builtin of that name and
/// arity exists.
pub fn builtin(name: &str, args: &[Value]) -> Option<Result<Value, EvalError>> {
    if !is_builtin(name, args.len()) {
        return None;
    }
    let (a, b) = (&args[0], &args[1]);
    if name == "==" {
        return Some(if a.kind() == b.kind() {
            Ok(Value::Bool(a == b))
        } else {
            Err(type_error(name, args))
        });
    }
    let (Value::Int(x), Value::Int(y)) = (a, b) else {
        return Some(Err(type_error(name, args)));
    };
    let v = match name {
        "+" => Value::Int(x + y),
        "-" => Value::Int(x - y),
        "*" => Value::Int(x * y),
        "<" => Value::Bool(x < y),
        "<=" => Value::Bool(x <= y),
        "mod" | "div" if y.is_zero() => {
            return Some(Err(EvalError::DivisionByZero { op: name.to_string() }))
        }
        "mod" => Value::Int(x.mod_floor(y)),
        "div" => Value::Int(x.div_floor(y)),
        _ => unreachable!("checked by is_builtin"),
    };
    Some(Ok(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(name: &str, a: i64, b: i64) -> Value {
        builtin(name, &[Value::int(a), Value::int(b)]).unwrap().unwrap()
    }

    #[test]
    fn arithmetic() {
        assert_eq!(run("+", 2, 3), Value::int(5));
        assert_eq!(run("-", 6, 1), Value::int(5));
        assert_eq!(run("*", -4, 3), Value::int(-12));
        assert_eq!(run("<", 3, 3), Value::Bool(false));
        assert_eq!(run("<=", 3, 3), Value::Bool(true));
        assert_eq!(run("==", 3, 3), Value::Bool(true));
    }

    #[test]
    fn floor_division() {
        assert_eq!(run("div", 7, 2), Value::int(3));
        assert_eq!(run("div", -7, 2), Value::int(-4));
        assert_eq!(run("mod", -7, 2), Value::int(1));
        assert_eq!(run("mod", 7, -2), Value::int(-1));
        assert!(matches!(
            builtin("mod", &[Value::int(1), Value::int(0)]),
            Some(Err(EvalError::DivisionByZero { .. }))
        ));
    }

    #[test]
    fn kinds() {
        assert!(matches!(
            builtin("+", &[Value::int(1), Value::Bool(true)]),
            Some(Err(EvalError::TypeError { .. }))
        ));
        assert!(matches!(
            builtin("==", &[Value::int(1), Value::Bool(true)]),
            Some(Err(EvalError::TypeError { .. }))
        ));
        assert_eq!(
            builtin("==", &[Value::Bool(true), Value::Bool(true)]).unwrap().unwrap(),
            Value::Bool(true)
        );
        assert!(builtin("+", &[Value::int(1)]).is_none());
        assert!(builtin("fib", &[Value::int(1), Value::int(2)]).is_none());
    }
}
