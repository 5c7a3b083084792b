use std::fmt;

use crate::error::{Error, Result};
use crate::shape::{Color, Shape};

/// Parsed `the <color> <shape>` expression. `shape == None` means `any`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Expression {
    pub color: Color,
    pub shape: Option<Shape>,
}

impl Expression {
    pub fn parse(text: &str) -> Result<Self> {
        let err = || Error::ExpressionParse(text.to_string());
        let lower = text.trim().to_ascii_lowercase();
        let words: Vec<&str> = lower.split_whitespace().collect();
        let [the, color, shape] = words.as_slice() else {
            return Err(err());
        };
        if *the != "the" {
            return Err(err());
        }
        let color = color.parse::<Color>().map_err(|_| err())?;
        let shape = match *shape {
            "any" => None,
            s => Some(s.parse::<Shape>().map_err(|_| err())?),
        };
        Ok(Self { color, shape })
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shape = self.shape.map_or("any", Shape::name);
        write!(f, "the {} {}", self.color, shape)
    }
}
